//! Seeded synthetic trial corpora.
//!
//! Each trial is built to land in a known failure mode:
//!
//! | kind             | construction                                   | mode |
//! |------------------|------------------------------------------------|------|
//! | golden           | reference copied, parameters exact             | D    |
//! | missing-output   | code only                                      | A    |
//! | partial-coverage | first 80% of the reference x-range            | A    |
//! | wrong-params     | reference copied, parameters wrong or absent   | B    |
//! | scaled-output    | reference times 1e5, parameters exact          | C    |
//!
//! Source files vary in style (literals, named constants, aliases, dict
//! splats, settings split over files, an unparseable companion) so that
//! extraction is exercised too. The same seed always yields the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sciscore_core::Mode;

use crate::error::{Error, Result};
use crate::manifest::{ManifestFile, ParameterEntry, TaskEntry, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const EXPECTED_FILE: &str = "expected_modes.csv";
pub const TRIALS_DIR: &str = "trials";
pub const REFERENCES_DIR: &str = "references";
pub const SCALE_FACTOR: f64 = 1e5;
pub const PARTIAL_COVERAGE: f64 = 0.8;

const TIERS: [&str; 14] = [
    "Single API call",
    "Single API call",
    "Single API call",
    "Single API call",
    "Single API call",
    "Single API call",
    "Single API call with tensor handling",
    "Alternate solver module",
    "Multi API calls",
    "Multi API + multi-result combination",
    "Multi API + delensing pipeline",
    "Multi API + delensing pipeline",
    "Multi API + ratio computation",
    "Multi API + noise-informed delensing pipeline",
];

/// Canonical parameter, reference value, keyword alias, configuring call.
const PARAMETERS: [(&str, f64, &str, Call); 10] = [
    ("H0", 67.5, "hubble", Call::Cosmology),
    ("ombh2", 0.022, "omega_b_h2", Call::Cosmology),
    ("omch2", 0.122, "omega_c_h2", Call::Cosmology),
    ("ns", 0.965, "n_s", Call::InitPower),
    ("As", 2.1e-9, "A_s", Call::InitPower),
    ("tau", 0.054, "tau_reio", Call::Cosmology),
    ("mnu", 0.06, "m_nu", Call::Cosmology),
    ("omk", 0.0, "omega_k", Call::Cosmology),
    ("w0", -1.0, "w", Call::DarkEnergy),
    ("Alens", 1.0, "A_lens", Call::Cosmology),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Call {
    Cosmology,
    InitPower,
    DarkEnergy,
}

impl Call {
    fn callee(self) -> &'static str {
        match self {
            Call::Cosmology => "pars.set_cosmology",
            Call::InitPower => "pars.InitPower.set_params",
            Call::DarkEnergy => "pars.set_dark_energy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    Golden,
    MissingOutput,
    PartialCoverage,
    WrongParams,
    ScaledOutput,
}

impl TrialKind {
    pub fn expected_mode(self) -> Mode {
        match self {
            TrialKind::Golden => Mode::D,
            TrialKind::MissingOutput | TrialKind::PartialCoverage => Mode::A,
            TrialKind::WrongParams => Mode::B,
            TrialKind::ScaledOutput => Mode::C,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrialKind::Golden => "golden",
            TrialKind::MissingOutput => "missing-output",
            TrialKind::PartialCoverage => "partial-coverage",
            TrialKind::WrongParams => "wrong-params",
            TrialKind::ScaledOutput => "scaled-output",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemProfile {
    pub name: String,
    /// Requested proportions of modes A, B, C, D.
    pub modes: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub name: String,
    pub systems: Vec<SystemProfile>,
    pub tasks: usize,
    pub trials_per_task: usize,
}

pub const PROFILE_NAMES: [&str; 2] = ["standard", "mode-a-91"];

impl Profile {
    pub fn named(name: &str) -> Option<Self> {
        let system = |name: &str, modes: [f64; 4]| SystemProfile {
            name: name.to_owned(),
            modes,
        };
        match name {
            "standard" => Some(Self {
                name: name.to_owned(),
                systems: vec![
                    system("agentic", [0.0, 0.05, 0.10, 0.85]),
                    system("hybrid", [0.50, 0.25, 0.15, 0.10]),
                    system("baseline", [0.90, 0.05, 0.05, 0.0]),
                ],
                tasks: 14,
                trials_per_task: 10,
            }),
            // 91 of 100 trials in Mode A; 91% of a 140-trial system is not
            // a whole number of trials.
            "mode-a-91" => Some(Self {
                name: name.to_owned(),
                systems: vec![system("baseline", [0.91, 0.03, 0.03, 0.03])],
                tasks: 10,
                trials_per_task: 10,
            }),
            _ => None,
        }
    }

    pub fn total_trials(&self) -> usize {
        self.systems.len() * self.tasks * self.trials_per_task
    }

    fn validate(&self) -> Result<()> {
        if self.tasks > TIERS.len() {
            return Err(Error::Config(format!(
                "profile {}: at most {} tasks supported",
                self.name,
                TIERS.len()
            )));
        }
        for s in &self.systems {
            let sum: f64 = s.modes.iter().sum();
            if s.modes.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "profile {}: mode proportions of {} must be in [0, 1] and sum to 1",
                    self.name, s.name
                )));
            }
        }
        Ok(())
    }
}

/// Splits `total` trials over modes by largest remainder; ties go to the
/// earlier mode.
pub fn mode_counts(proportions: [f64; 4], total: usize) -> [usize; 4] {
    let exact: Vec<f64> = proportions.iter().map(|p| p * total as f64).collect();
    let mut counts: [usize; 4] = [0; 4];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = (e + 1e-9).floor() as usize;
    }
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpectedTrial {
    pub system: String,
    pub task: String,
    pub trial: String,
    pub kind: TrialKind,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub root: PathBuf,
    /// Absent when the profile requests no trials.
    pub manifest: Option<PathBuf>,
    pub trials_root: PathBuf,
    pub expected: Vec<ExpectedTrial>,
}

impl Corpus {
    pub fn mode_proportion(&self, system: &str, mode: Mode) -> f64 {
        let trials: Vec<&ExpectedTrial> = self.expected.iter().filter(|t| t.system == system).collect();
        trials.iter().filter(|t| t.mode == mode).count() as f64 / trials.len() as f64
    }
}

struct Task {
    id: String,
    tier: &'static str,
    xs: Vec<f64>,
    ys: Vec<f64>,
    params: Vec<(&'static str, f64, &'static str, Call)>,
}

fn build_task(index: usize, rng: &mut ChaCha8Rng) -> Task {
    let n = 100 + 10 * index;
    let amplitude = rng.gen_range(500.0..5000.0);
    let period = rng.gen_range(20.0..80.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let damping = rng.gen_range(100.0..400.0);
    let floor = rng.gen_range(1.0..50.0);
    let xs: Vec<f64> = (0..n).map(|i| (i + 2) as f64).collect();
    let ys = xs
        .iter()
        .map(|&x: &f64| {
            let y = amplitude * (1.0 + 0.6 * (x / period + phase).sin()) * (-x / damping).exp() + floor;
            // four significant decimals keep files short and exact to re-read
            (y * 1e4).round() / 1e4
        })
        .collect();
    let extra = (index * 3) % 8;
    let params = PARAMETERS[..(3 + extra).min(PARAMETERS.len())].to_vec();
    Task {
        id: format!("T{:02}", index + 1),
        tier: TIERS[index],
        xs,
        ys,
        params,
    }
}

fn table(xs: &[f64], ys: &[f64], header: Option<&str>, sep: &str) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x}{sep}{y}");
    }
    out
}

/// Writes a candidate output table in one of several dialects.
fn render_output(xs: &[f64], ys: &[f64], rng: &mut ChaCha8Rng) -> String {
    let mut rows: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let dialect = rng.gen_range(0..4);
    if dialect == 3 {
        rows.shuffle(rng);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    match dialect {
        0 => table(&xs, &ys, Some("ell,Dl"), ","),
        1 => table(&xs, &ys, Some("ell\tDl"), "\t"),
        2 => format!("# ell Dl\n{}", table(&xs, &ys, None, " ")),
        _ => table(&xs, &ys, Some("x,y"), ","),
    }
}

#[derive(Debug, Clone, Copy)]
enum Style {
    Literal,
    Constants,
    Aliases,
    DictSplat,
    SplitFiles,
}

const STYLES: [Style; 5] = [
    Style::Literal,
    Style::Constants,
    Style::Aliases,
    Style::DictSplat,
    Style::SplitFiles,
];

const PRELUDE: &str = "import camb\nimport numpy as np\n\npars = camb.CAMBparams()\n";

const EPILOGUE: &str = "\
pars.set_for_lmax(2500, lens_potential_accuracy=1)
results = camb.get_results(pars)
powers = results.get_cmb_power_spectra(pars, CMB_unit=\"muK\")
cl = powers[\"total\"][:, 0]
ell = np.arange(cl.shape[0])
np.savetxt(\"output.csv\", np.column_stack([ell[2:], cl[2:]]), delimiter=\",\", header=\"ell,Dl\", comments=\"\")
";

/// Value as a Python literal.
fn py(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_owned()
    } else if v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn calls(assignments: &[(String, String, Call)]) -> String {
    let mut out = String::new();
    for call in [Call::Cosmology, Call::InitPower, Call::DarkEnergy] {
        let args: Vec<String> = assignments
            .iter()
            .filter(|(_, _, c)| *c == call)
            .map(|(k, v, _)| format!("{k}={v}"))
            .collect();
        if !args.is_empty() {
            let _ = writeln!(out, "{}({})", call.callee(), args.join(", "));
        }
    }
    out
}

/// Source files that set every task parameter to its reference value.
fn correct_code(task: &Task, rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let style = STYLES[rng.gen_range(0..STYLES.len())];
    let literal: Vec<(String, String, Call)> = task
        .params
        .iter()
        .map(|&(name, v, alias, call)| {
            let key = if call == Call::DarkEnergy { alias } else { name };
            (key.to_owned(), py(v), call)
        })
        .collect();
    match style {
        Style::Literal => vec![("main.py".into(), format!("{PRELUDE}{}{EPILOGUE}", calls(&literal)))],
        Style::Aliases => {
            let aliased: Vec<(String, String, Call)> = task
                .params
                .iter()
                .map(|&(_, v, alias, call)| (alias.to_owned(), py(v), call))
                .collect();
            vec![("main.py".into(), format!("{PRELUDE}{}{EPILOGUE}", calls(&aliased)))]
        }
        Style::Constants => {
            let mut consts = String::new();
            let mut named = Vec::new();
            for (i, (key, v, call)) in literal.iter().enumerate() {
                let cname = format!("{}_VALUE", key.to_uppercase());
                if i == 0 {
                    let _ = writeln!(consts, "FIDUCIAL = {v}\n{cname} = FIDUCIAL");
                } else {
                    let _ = writeln!(consts, "{cname} = {v}");
                }
                named.push((key.clone(), cname, *call));
            }
            let body = format!(
                "import camb\nimport numpy as np\n\n{consts}\n\ndef configure():\n    pars = camb.CAMBparams()\n{}    return pars\n\n\npars = configure()\n{EPILOGUE}",
                calls(&named)
                    .lines()
                    .map(|l| format!("    {l}\n"))
                    .collect::<String>()
            );
            vec![("main.py".into(), body)]
        }
        Style::DictSplat => {
            let (cosmo, rest): (Vec<_>, Vec<_>) =
                literal.iter().cloned().partition(|(_, _, c)| *c == Call::Cosmology);
            let entries: Vec<String> = cosmo.iter().map(|(k, v, _)| format!("    \"{k}\": {v},")).collect();
            let body = format!(
                "{PRELUDE}cosmology = {{\n{}\n}}\npars.set_cosmology(**cosmology)\n{}{EPILOGUE}",
                entries.join("\n"),
                calls(&rest)
            );
            vec![("main.py".into(), body)]
        }
        Style::SplitFiles => {
            let (first, v, call) = &literal[0];
            let wrong = format!("{first}={}", py(v.parse::<f64>().unwrap_or(1.0) * 0.5 + 1.0));
            let main = format!(
                "{PRELUDE}{}({wrong})\nfrom setup_params import configure\nconfigure(pars)\n{EPILOGUE}",
                call.callee()
            );
            let setup = format!(
                "def configure(pars):\n{}",
                calls(&literal)
                    .lines()
                    .map(|l| format!("    {l}\n"))
                    .collect::<String>()
            );
            vec![
                ("main.py".into(), main),
                ("setup_params.py".into(), setup),
                ("zz_notes.py".into(), "print \"finished\"\n".into()),
            ]
        }
    }
}

/// Source files in which every parameter is wrong, computed at run time or
/// missing.
fn wrong_code(task: &Task, rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut helpers = String::new();
    let mut assignments = Vec::new();
    for &(name, v, alias, call) in &task.params {
        let key = if call == Call::DarkEnergy { alias } else { name };
        match rng.gen_range(0..3) {
            0 => {
                let wrong = if v == 0.0 { 0.1 } else { 3.0 * v };
                assignments.push((key.to_owned(), py(wrong), call));
            }
            1 => {
                let _ = writeln!(helpers, "def compute_{name}():\n    return {} * 1.0\n", py(v));
                assignments.push((key.to_owned(), format!("compute_{name}()"), call));
            }
            _ => {}
        }
    }
    vec![(
        "main.py".into(),
        format!("{PRELUDE}{helpers}{}{EPILOGUE}", calls(&assignments)),
    )]
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a corpus under `out`: `manifest.json`, `references/`, `trials/`
/// and `expected_modes.csv`.
pub fn generate(out: &Path, profile: &Profile, seed: u64) -> Result<Corpus> {
    profile.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let trials_root = out.join(TRIALS_DIR);
    if profile.total_trials() == 0 {
        return Ok(Corpus {
            root: out.to_path_buf(),
            manifest: None,
            trials_root,
            expected: Vec::new(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks: Vec<Task> = (0..profile.tasks).map(|i| build_task(i, &mut rng)).collect();

    let mut entries = Vec::new();
    for task in &tasks {
        let rel = format!("{REFERENCES_DIR}/{}.csv", task.id);
        write(&out.join(&rel), &table(&task.xs, &task.ys, Some("ell,Dl"), ","))?;
        entries.push(TaskEntry {
            task_id: task.id.clone(),
            tier_label: task.tier.to_owned(),
            reference_curve: rel,
            parameters: task
                .params
                .iter()
                .map(|&(name, value, _, _)| ParameterEntry {
                    name: name.to_owned(),
                    value,
                    weight: None,
                })
                .collect(),
            esr_coverage_frac: None,
            esr_points_frac: None,
            prompt: None,
        });
    }
    let manifest = ManifestFile {
        schema_version: SCHEMA_VERSION,
        tasks: entries,
        weights: BTreeMap::new(),
        aliases: BTreeMap::new(),
        callees: None,
        grammar: Some("python".to_owned()),
        code_glob: None,
        output_name: None,
        thresholds: None,
    };
    let manifest_path = out.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&manifest_path, &text)?;

    let mut expected = Vec::new();
    for system in &profile.systems {
        let per_system = profile.tasks * profile.trials_per_task;
        let [a, b, c, d] = mode_counts(system.modes, per_system);
        let missing = a.div_ceil(2);
        let mut kinds = Vec::with_capacity(per_system);
        kinds.extend(std::iter::repeat_n(TrialKind::MissingOutput, missing));
        kinds.extend(std::iter::repeat_n(TrialKind::PartialCoverage, a - missing));
        kinds.extend(std::iter::repeat_n(TrialKind::WrongParams, b));
        kinds.extend(std::iter::repeat_n(TrialKind::ScaledOutput, c));
        kinds.extend(std::iter::repeat_n(TrialKind::Golden, d));
        kinds.shuffle(&mut rng);

        let mut kinds = kinds.into_iter();
        for task in &tasks {
            for k in 0..profile.trials_per_task {
                let kind = kinds.next().expect("one kind per trial");
                let trial = format!("trial_{k}");
                let dir = trials_root.join(&system.name).join(&task.id).join(&trial);
                let code = match kind {
                    TrialKind::WrongParams => wrong_code(task, &mut rng),
                    _ => correct_code(task, &mut rng),
                };
                for (name, text) in code {
                    write(&dir.join(name), &text)?;
                }
                let output = match kind {
                    TrialKind::MissingOutput => None,
                    TrialKind::Golden | TrialKind::WrongParams => Some(render_output(&task.xs, &task.ys, &mut rng)),
                    TrialKind::ScaledOutput => {
                        let ys: Vec<f64> = task.ys.iter().map(|y| y * SCALE_FACTOR).collect();
                        Some(render_output(&task.xs, &ys, &mut rng))
                    }
                    TrialKind::PartialCoverage => {
                        let cut = task.xs[0] + PARTIAL_COVERAGE * (task.xs[task.xs.len() - 1] - task.xs[0]);
                        let n = task.xs.iter().take_while(|&&x| x <= cut).count();
                        Some(render_output(&task.xs[..n], &task.ys[..n], &mut rng))
                    }
                };
                if let Some(text) = output {
                    write(&dir.join("output.csv"), &text)?;
                }
                expected.push(ExpectedTrial {
                    system: system.name.clone(),
                    task: task.id.clone(),
                    trial,
                    kind,
                    mode: kind.expected_mode(),
                });
            }
        }
    }

    let mut csv = String::from("system,task,trial,kind,mode\n");
    for e in &expected {
        let _ = writeln!(csv, "{},{},{},{},{}", e.system, e.task, e.trial, e.kind.as_str(), e.mode);
    }
    write(&out.join(EXPECTED_FILE), &csv)?;

    Ok(Corpus {
        root: out.to_path_buf(),
        manifest: Some(manifest_path),
        trials_root,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_are_exact_for_named_profiles() {
        assert_eq!(mode_counts([0.91, 0.03, 0.03, 0.03], 100), [91, 3, 3, 3]);
        assert_eq!(mode_counts([0.0, 0.05, 0.10, 0.85], 140), [0, 7, 14, 119]);
        assert_eq!(mode_counts([0.90, 0.05, 0.05, 0.0], 140), [126, 7, 7, 0]);
        assert_eq!(mode_counts([0.5, 0.25, 0.15, 0.10], 140), [70, 35, 21, 14]);
    }

    proptest! {
        #[test]
        fn counts_sum_to_total(w in proptest::array::uniform4(0.0f64..1.0), total in 0usize..500) {
            let s: f64 = w.iter().sum();
            prop_assume!(s > 1e-6);
            let p = w.map(|x| x / s);
            let counts = mode_counts(p, total);
            prop_assert_eq!(counts.iter().sum::<usize>(), total);
            for i in 0..4 {
                prop_assert!((counts[i] as f64 - p[i] * total as f64).abs() < 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn python_literals() {
        assert_eq!(py(2.1e-9), "2.1e-9");
        assert_eq!(py(67.5), "67.5");
        assert_eq!(py(-1.0), "-1");
        assert_eq!(py(0.0), "0.0");
    }
}
