//! Four-way failure taxonomy plus the unit/normalization flag.

use serde::{Deserialize, Serialize};

use crate::metrics::MetricBundle;

/// Decision thresholds. Defaults are the published ones; overrides exist for
/// sensitivity studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub pas: f64,
    pub nas: f64,
    /// `s_ccc` must exceed this for the unit flag.
    pub unit_ccc: f64,
    /// `s_nrmse` must fall below this for the unit flag.
    pub unit_nrmse: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pas: 0.5,
            nas: 0.5,
            unit_ccc: 0.8,
            unit_nrmse: 0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Code failure: no valid output.
    A,
    /// Wrong parameters.
    B,
    /// Wrong computation.
    C,
    /// Correct.
    D,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A, Mode::B, Mode::C, Mode::D];

    pub fn as_char(self) -> char {
        match self {
            Mode::A => 'A',
            Mode::B => 'B',
            Mode::C => 'C',
            Mode::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Mode::A),
            'B' => Some(Mode::B),
            'C' => Some(Mode::C),
            'D' => Some(Mode::D),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn description(self) -> &'static str {
        match self {
            Mode::A => "code failure",
            Mode::B => "wrong parameters",
            Mode::C => "wrong computation",
            Mode::D => "correct",
        }
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureMode {
    pub mode: Mode,
    /// Shape right, amplitude wrong. Evaluated for every trial that passed
    /// the execution gate, including Mode D where it is only diagnostic.
    pub unit_error_flag: bool,
}

impl FailureMode {
    /// The Mode-C sub-class label, present only for flagged Mode-C trials.
    pub fn subclass(&self) -> Option<&'static str> {
        (self.mode == Mode::C && self.unit_error_flag).then_some("unit/normalization")
    }
}

pub fn classify(bundle: &MetricBundle, thresholds: &Thresholds) -> FailureMode {
    let mode = if !bundle.esr {
        Mode::A
    } else if bundle.pas < thresholds.pas {
        Mode::B
    } else if bundle.nas < thresholds.nas {
        Mode::C
    } else {
        Mode::D
    };
    let unit_error_flag =
        bundle.esr && bundle.s_ccc > thresholds.unit_ccc && bundle.s_nrmse < thresholds.unit_nrmse;
    FailureMode {
        mode,
        unit_error_flag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::NasScores;
    use alloc::collections::BTreeMap;
    use proptest::prelude::*;

    fn bundle(esr: bool, pas: f64, nrmse: f64, smape: f64, ccc: f64) -> MetricBundle {
        MetricBundle::new(esr, pas, NasScores::from_parts(nrmse, smape, ccc), BTreeMap::new())
    }

    #[test]
    fn esr_failure_is_a() {
        let fm = classify(&bundle(false, 1.0, 1.0, 1.0, 1.0), &Thresholds::default());
        assert_eq!(fm.mode, Mode::A);
        assert!(!fm.unit_error_flag);
    }

    #[test]
    fn unit_subclass() {
        let mut b = bundle(true, 0.9, 0.1, 0.0, 0.95);
        b.nas = 0.2;
        let fm = classify(&b, &Thresholds::default());
        assert_eq!(fm.mode, Mode::C);
        assert!(fm.unit_error_flag);
        assert_eq!(fm.subclass(), Some("unit/normalization"));
    }

    #[test]
    fn boundary_goes_up() {
        let mut b = bundle(true, 0.5, 0.0, 0.0, 0.0);
        b.nas = 0.5;
        assert_eq!(classify(&b, &Thresholds::default()).mode, Mode::D);
    }

    #[test]
    fn flag_recorded_on_d_without_subclass() {
        let b = bundle(true, 1.0, 0.68, 0.38, 0.82);
        let fm = classify(&b, &Thresholds::default());
        assert_eq!(fm.mode, Mode::D);
        assert!(fm.unit_error_flag);
        assert_eq!(fm.subclass(), None);
    }

    #[test]
    fn chars() {
        for m in Mode::ALL {
            assert_eq!(Mode::from_char(m.as_char()), Some(m));
        }
        assert_eq!(Mode::from_char('e'), None);
    }

    proptest! {
        #[test]
        fn exactly_one_mode(esr: bool, pas in 0.0f64..=1.0, n in 0.0f64..=1.0, s in 0.0f64..=1.0, c in 0.0f64..=1.0) {
            let b = bundle(esr, pas, n, s, c);
            let t = Thresholds::default();
            let fm = classify(&b, &t);
            let holds = [
                !b.esr,
                b.esr && b.pas < 0.5,
                b.esr && b.pas >= 0.5 && b.nas < 0.5,
                b.esr && b.pas >= 0.5 && b.nas >= 0.5,
            ];
            prop_assert_eq!(holds.iter().filter(|h| **h).count(), 1);
            prop_assert!(holds[fm.mode.index()]);
            if fm.unit_error_flag {
                prop_assert!(b.s_ccc > 0.8 && b.s_nrmse < 0.7);
            }
        }
    }
}
