//! Parameter weights, alias resolution, task definitions and literature
//! references.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::esr::EsrThresholds;

/// Built-in solver parameters with their weights.
///
/// Core background parameters carry 2.0, extension parameters 1.5 and
/// secondary parameters 1.0.
pub const BUILTIN_WEIGHTS: [(&str, f64); 10] = [
    ("H0", 2.0),
    ("ombh2", 2.0),
    ("omch2", 2.0),
    ("ns", 2.0),
    ("As", 2.0),
    ("omk", 1.5),
    ("w0", 1.5),
    ("tau", 1.0),
    ("mnu", 1.0),
    ("Alens", 1.0),
];

/// Default alternate spellings, `(alias, canonical)`.
pub const BUILTIN_ALIASES: [(&str, &str); 10] = [
    ("hubble", "H0"),
    ("omega_b_h2", "ombh2"),
    ("omega_c_h2", "omch2"),
    ("n_s", "ns"),
    ("A_s", "As"),
    ("tau_reio", "tau"),
    ("m_nu", "mnu"),
    ("omega_k", "omk"),
    ("w", "w0"),
    ("A_lens", "Alens"),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("weight for `{name}` must be positive and finite, got {weight}")]
    InvalidWeight { name: String, weight: f64 },
    #[error("alias `{alias}` already maps to `{existing}`")]
    ConflictingAlias { alias: String, existing: String },
    #[error("alias `{alias}` points at unknown parameter `{canonical}`")]
    UnknownCanonical { alias: String, canonical: String },
}

/// Canonical parameter names, their weights and a case-insensitive alias
/// table. Immutable once built; share freely between scoring workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    weights: BTreeMap<String, f64>,
    /// Lower-cased spelling -> canonical name. Canonical names map to
    /// themselves.
    lookup: BTreeMap<String, String>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            weights: BTreeMap::new(),
            lookup: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        for (name, weight) in BUILTIN_WEIGHTS {
            registry
                .insert_parameter(name, weight)
                .expect("built-in weights are valid");
        }
        for (alias, canonical) in BUILTIN_ALIASES {
            registry
                .insert_alias(alias, canonical)
                .expect("built-in aliases are consistent");
        }
        registry
    }

    /// Adds or re-weights a canonical parameter.
    pub fn insert_parameter(&mut self, name: &str, weight: f64) -> Result<(), RegistryError> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(RegistryError::InvalidWeight {
                name: name.to_owned(),
                weight,
            });
        }
        self.weights.insert(name.to_owned(), weight);
        self.lookup.insert(name.to_lowercase(), name.to_owned());
        Ok(())
    }

    pub fn insert_alias(&mut self, alias: &str, canonical: &str) -> Result<(), RegistryError> {
        if !self.weights.contains_key(canonical) {
            return Err(RegistryError::UnknownCanonical {
                alias: alias.to_owned(),
                canonical: canonical.to_owned(),
            });
        }
        let key = alias.to_lowercase();
        match self.lookup.get(&key) {
            Some(existing) if existing != canonical => Err(RegistryError::ConflictingAlias {
                alias: alias.to_owned(),
                existing: existing.clone(),
            }),
            _ => {
                self.lookup.insert(key, canonical.to_owned());
                Ok(())
            }
        }
    }

    /// Case-insensitive lookup of a canonical name. Unknown spellings yield
    /// `None`.
    pub fn resolve_alias(&self, name: &str) -> Option<&str> {
        self.lookup.get(&name.to_lowercase()).map(String::as_str)
    }

    pub fn weight(&self, canonical: &str) -> Option<f64> {
        self.weights.get(canonical).copied()
    }

    pub fn canonical_names(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }
}

/// One reference parameter of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub canonical_name: String,
    pub weight: f64,
    pub aliases: Vec<String>,
    pub reference_value: f64,
}

/// A benchmark task with its reference solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub tier_label: String,
    pub reference_curve: String,
    pub reference: Curve,
    pub parameters: Vec<ParameterSpec>,
    pub esr: EsrThresholds,
}

impl TaskSpec {
    pub fn parameter(&self, canonical: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.canonical_name == canonical)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiteratureError {
    #[error("sigma for {task_id}/{parameter} must be positive, got {sigma}")]
    NonPositiveSigma {
        task_id: String,
        parameter: String,
        sigma: f64,
    },
    #[error("value for {task_id}/{parameter} is not finite")]
    NonFiniteValue { task_id: String, parameter: String },
}

/// A published `value ± sigma` used as ground truth for recovery scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteratureReference {
    pub task_id: String,
    pub parameter: String,
    pub value: f64,
    pub sigma: f64,
    pub source: String,
}

impl LiteratureReference {
    pub fn new(
        task_id: &str,
        parameter: &str,
        value: f64,
        sigma: f64,
        source: &str,
    ) -> Result<Self, LiteratureError> {
        if !value.is_finite() {
            return Err(LiteratureError::NonFiniteValue {
                task_id: task_id.to_owned(),
                parameter: parameter.to_owned(),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(LiteratureError::NonPositiveSigma {
                task_id: task_id.to_owned(),
                parameter: parameter.to_owned(),
                sigma,
            });
        }
        Ok(Self {
            task_id: task_id.to_owned(),
            parameter: parameter.to_owned(),
            value,
            sigma,
            source: source.to_owned(),
        })
    }
}

/// Literature ground truth for the four research-style tasks:
/// `(task, parameter, value, sigma, source)`.
pub const BUILTIN_LITERATURE: [(&str, &str, f64, f64, &str); 7] = [
    ("T1", "Omega_Lambda", 0.72, 0.02, "Suzuki et al. 2012"),
    ("T2", "log10_M200", 11.97, 0.15, "Karukes et al. 2015"),
    ("T2", "c", 6.8, 2.0, "Karukes et al. 2015"),
    ("T3", "alpha_N", 0.67, 0.05, "Muller et al. 2024"),
    ("T3", "alpha_J", -0.06, 0.07, "Muller et al. 2024"),
    ("T3", "M_br", 127.0, 17.0, "Muller et al. 2024"),
    ("T4", "f", 1.019, 0.008, "Bolton et al. 2008"),
];

pub fn builtin_literature() -> Vec<LiteratureReference> {
    BUILTIN_LITERATURE
        .iter()
        .map(|&(t, p, v, s, src)| LiteratureReference::new(t, p, v, s, src).expect("valid table"))
        .collect()
}

/// Groups references by task id, preserving row order within a task.
pub fn literature_by_task(refs: &[LiteratureReference]) -> BTreeMap<String, Vec<LiteratureReference>> {
    let mut out: BTreeMap<String, Vec<LiteratureReference>> = BTreeMap::new();
    for r in refs {
        out.entry(r.task_id.to_string()).or_default().push(r.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_weight_sum() {
        assert_eq!(Registry::builtin().total_weight(), 16.0);
        for (_, w) in BUILTIN_WEIGHTS {
            assert!([1.0, 1.5, 2.0].contains(&w));
        }
    }

    #[test]
    fn aliases() {
        let r = Registry::builtin();
        assert_eq!(r.resolve_alias("H0"), Some("H0"));
        assert_eq!(r.resolve_alias("hubble"), Some("H0"));
        assert_eq!(r.resolve_alias("h0"), Some("H0"));
        assert_eq!(r.resolve_alias("Omega_B_H2"), Some("ombh2"));
        assert_eq!(r.resolve_alias("foo_param"), None);
    }

    #[test]
    fn user_weights_and_alias_errors() {
        let mut r = Registry::empty();
        r.insert_parameter("sigma8", 0.25).unwrap();
        assert!(r.insert_parameter("bad", 0.0).is_err());
        assert!(r.insert_alias("s8", "nope").is_err());
        r.insert_alias("s8", "sigma8").unwrap();
        r.insert_parameter("other", 1.0).unwrap();
        assert!(matches!(
            r.insert_alias("S8", "other"),
            Err(RegistryError::ConflictingAlias { .. })
        ));
    }

    #[test]
    fn literature_rows() {
        let refs = builtin_literature();
        let t1 = refs.iter().find(|r| r.task_id == "T1").unwrap();
        assert_eq!((t1.value, t1.sigma), (0.72, 0.02));
        let mbr = refs.iter().find(|r| r.parameter == "M_br").unwrap();
        assert_eq!((mbr.value, mbr.sigma), (127.0, 17.0));
        assert!(matches!(
            LiteratureReference::new("T9", "x", 1.0, 0.0, ""),
            Err(LiteratureError::NonPositiveSigma { .. })
        ));
        assert_eq!(literature_by_task(&refs)["T3"].len(), 3);
    }
}
