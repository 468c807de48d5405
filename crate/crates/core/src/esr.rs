//! Execution-success gate: did the trial produce an output of the right shape?

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, CurveError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsrThresholds {
    /// Required share of the reference x-range covered by the candidate.
    pub coverage_frac: f64,
    /// Required candidate point count relative to the reference.
    pub points_frac: f64,
}

impl Default for EsrThresholds {
    fn default() -> Self {
        Self {
            coverage_frac: 0.95,
            points_frac: 0.95,
        }
    }
}

impl EsrThresholds {
    pub fn is_valid(&self) -> bool {
        let ok = |f: f64| f > 0.0 && f <= 1.0;
        ok(self.coverage_frac) && ok(self.points_frac)
    }
}

/// Why a trial failed the gate. Several may apply at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EsrFailure {
    NoOutput,
    Unreadable,
    NoNumericColumns { found: usize },
    EmptyOutput,
    TooFewPoints { found: usize },
    Coverage { got: f64, required: f64 },
    Points { got: f64, required: f64 },
}

impl From<&CurveError> for EsrFailure {
    fn from(err: &CurveError) -> Self {
        match *err {
            CurveError::NoNumericColumns { found } => EsrFailure::NoNumericColumns { found },
            CurveError::TooFewPoints { found } => EsrFailure::TooFewPoints { found },
            _ => EsrFailure::EmptyOutput,
        }
    }
}

impl core::fmt::Display for EsrFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EsrFailure::NoOutput => f.write_str("no output"),
            EsrFailure::Unreadable => f.write_str("output unreadable"),
            EsrFailure::NoNumericColumns { found } => {
                write!(f, "fewer than two numeric columns ({found})")
            }
            EsrFailure::EmptyOutput => f.write_str("empty output"),
            EsrFailure::TooFewPoints { found } => write!(f, "too few points ({found})"),
            EsrFailure::Coverage { got, required } => {
                write!(f, "x-range coverage {got:.4} < {required:.4}")
            }
            EsrFailure::Points { got, required } => {
                write!(f, "point fraction {got:.4} < {required:.4}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsrVerdict {
    pub passed: bool,
    pub coverage_frac: f64,
    pub points_frac: f64,
    pub reasons: Vec<EsrFailure>,
}

impl EsrVerdict {
    /// Verdict for a trial whose output never became a curve.
    pub fn failed(reason: EsrFailure) -> Self {
        Self {
            passed: false,
            coverage_frac: 0.0,
            points_frac: 0.0,
            reasons: alloc::vec![reason],
        }
    }
}

/// Fraction of the reference x-range spanned by the candidate, in `[0, 1]`.
pub fn coverage_fraction(candidate: &Curve, reference: &Curve) -> f64 {
    let lo = candidate.x_min().max(reference.x_min());
    let hi = candidate.x_max().min(reference.x_max());
    ((hi - lo) / reference.x_span()).clamp(0.0, 1.0)
}

/// Evaluates the three gate criteria. Having a [`Curve`] at all already
/// implies two numeric columns; a missing candidate fails with `NoOutput`.
pub fn check_esr(
    candidate: Option<&Curve>,
    reference: &Curve,
    thresholds: &EsrThresholds,
) -> EsrVerdict {
    let Some(candidate) = candidate else {
        return EsrVerdict::failed(EsrFailure::NoOutput);
    };
    let coverage_frac = coverage_fraction(candidate, reference);
    let points_frac = candidate.len() as f64 / reference.len() as f64;
    let mut reasons = Vec::new();
    if coverage_frac < thresholds.coverage_frac {
        reasons.push(EsrFailure::Coverage {
            got: coverage_frac,
            required: thresholds.coverage_frac,
        });
    }
    if points_frac < thresholds.points_frac {
        reasons.push(EsrFailure::Points {
            got: points_frac,
            required: thresholds.points_frac,
        });
    }
    EsrVerdict {
        passed: reasons.is_empty(),
        coverage_frac,
        points_frac,
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Curve {
        let xs: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let ys = xs.iter().map(|x| x * x).collect();
        Curve::new(xs, ys).unwrap()
    }

    #[test]
    fn identity_passes() {
        let r = grid(2.0, 2500.0, 200);
        let v = check_esr(Some(&r), &r, &EsrThresholds::default());
        assert!(v.passed);
        assert_eq!((v.coverage_frac, v.points_frac), (1.0, 1.0));
    }

    #[test]
    fn ninety_percent_span_fails() {
        let r = grid(0.0, 100.0, 101);
        let c = grid(0.0, 90.0, 200);
        let v = check_esr(Some(&c), &r, &EsrThresholds::default());
        assert!(!v.passed);
        assert!((v.coverage_frac - 0.9).abs() < 1e-12);
        assert!(matches!(v.reasons[0], EsrFailure::Coverage { .. }));
    }

    #[test]
    fn absent_output() {
        let r = grid(0.0, 1.0, 10);
        let v = check_esr(None, &r, &EsrThresholds::default());
        assert!(!v.passed);
        assert_eq!(v.reasons, alloc::vec![EsrFailure::NoOutput]);
        assert_eq!(alloc::format!("{}", v.reasons[0]), "no output");
    }

    #[test]
    fn sparse_output_fails_and_dense_passes() {
        let r = grid(0.0, 1.0, 100);
        let sparse = grid(0.0, 1.0, 94);
        assert!(!check_esr(Some(&sparse), &r, &EsrThresholds::default()).passed);
        let dense = grid(0.0, 1.0, 1000);
        let v = check_esr(Some(&dense), &r, &EsrThresholds::default());
        assert!(v.passed);
        assert!(v.points_frac > 1.0);
    }

    #[test]
    fn disjoint_has_zero_coverage() {
        let r = grid(0.0, 1.0, 10);
        let c = grid(2.0, 3.0, 10);
        assert_eq!(coverage_fraction(&c, &r), 0.0);
    }

    proptest! {
        #[test]
        fn reference_always_passes_itself(n in 2usize..200, cov in 0.01f64..=1.0, pts in 0.01f64..=1.0) {
            let r = grid(-3.0, 7.0, n);
            let t = EsrThresholds { coverage_frac: cov, points_frac: pts };
            prop_assert!(check_esr(Some(&r), &r, &t).passed);
        }

        #[test]
        fn adding_interior_points_never_breaks_a_pass(
            extra in proptest::collection::vec(0.0f64..100.0, 0..50)
        ) {
            let r = grid(0.0, 100.0, 60);
            let base: Vec<(f64, f64)> = r.points().collect();
            let t = EsrThresholds::default();
            prop_assert!(check_esr(Some(&r), &r, &t).passed);
            let mut more = base.clone();
            more.extend(extra.iter().map(|&x| (x, 1.0)));
            let (c, _) = Curve::from_unsorted(more).unwrap();
            prop_assert!(check_esr(Some(&c), &r, &t).passed);
        }
    }
}
