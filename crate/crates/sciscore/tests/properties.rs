use std::fs;
use std::path::Path;

use proptest::prelude::*;

use sciscore::ingest::{parse_output, trial_artifacts, Layout};
use sciscore::report::{emit_reports, Format, SuiteReportFile};
use sciscore::{score_suite, score_trial, Manifest, SuiteFilter};
use sciscore_core::recovery::recovery_score;
use sciscore_core::{
    check_esr, extract_parameters, Curve, EsrThresholds, ExtractionConfig, LiteratureReference,
    Registry, SourceFile,
};

const PARAMS: [(&str, f64); 10] = [
    ("H0", 67.5),
    ("ombh2", 0.0224),
    ("omch2", 0.12),
    ("ns", 0.965),
    ("As", 2.1e-9),
    ("tau", 0.054),
    ("mnu", 0.06),
    ("omk", 0.0),
    ("w0", -1.0),
    ("Alens", 1.0),
];

fn grid(n: usize) -> Curve {
    let xs: Vec<f64> = (0..n).map(|i| (i * 3 + 2) as f64).collect();
    let ys = xs.iter().map(|x| 100.0 + 50.0 * (x / 17.0).cos()).collect();
    Curve::new(xs, ys).unwrap()
}

fn write_manifest(dir: &Path, reference: &Curve, values: &[(&str, f64)]) -> std::path::PathBuf {
    let mut text = String::from("ell,Dl\n");
    for (x, y) in reference.points() {
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(dir.join("ref.csv"), text).unwrap();
    let params: Vec<String> = values
        .iter()
        .map(|(n, v)| format!(r#"{{"name":"{n}","value":{v:e}}}"#))
        .collect();
    let manifest = format!(
        r#"{{"schema_version":1,"tasks":[{{"task_id":"T01","tier_label":"Single API call","reference_curve":"ref.csv","parameters":[{}]}}]}}"#,
        params.join(",")
    );
    let path = dir.join("manifest.json");
    fs::write(&path, manifest).unwrap();
    path
}

fn literal_code(values: &[(&str, f64)]) -> String {
    let get = |name: &str| values.iter().find(|(n, _)| *n == name).map(|(_, v)| *v).unwrap();
    format!(
        "import camb\n\
         pars = camb.CAMBparams()\n\
         pars.set_cosmology(H0={:e}, ombh2={:e}, omch2={:e}, tau={:e}, mnu={:e}, omk={:e}, Alens={:e})\n\
         pars.InitPower.set_params(As={:e}, ns={:e})\n\
         pars.set_dark_energy(w={:e})\n",
        get("H0"),
        get("ombh2"),
        get("omch2"),
        get("tau"),
        get("mnu"),
        get("omk"),
        get("Alens"),
        get("As"),
        get("ns"),
        get("w0"),
    )
}

fn param_values() -> impl Strategy<Value = Vec<(&'static str, f64)>> {
    proptest::collection::vec(-1.0e3f64..1.0e3, PARAMS.len()).prop_map(|vals| {
        PARAMS
            .iter()
            .zip(vals)
            .map(|((n, _), v)| (*n, v))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn esr_fractions_ignore_row_order(n in 6usize..60, lo in 0usize..5, seed in any::<u64>()) {
        let reference = grid(n);
        let mut rows: Vec<(f64, f64)> = reference.points().skip(lo).collect();
        let mut shuffled = rows.clone();
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let dir = tempfile::tempdir().unwrap();
        let mut verdicts = Vec::new();
        for (name, table) in [("a.csv", &mut rows), ("b.csv", &mut shuffled)] {
            let text: String = table.iter().map(|(x, y)| format!("{x},{y}\n")).collect();
            let path = dir.path().join(name);
            fs::write(&path, text).unwrap();
            let parsed = parse_output(&path).unwrap();
            verdicts.push(check_esr(Some(&parsed.curve), &reference, &EsrThresholds::default()));
        }
        prop_assert_eq!(verdicts[0].coverage_frac, verdicts[1].coverage_frac);
        prop_assert_eq!(verdicts[0].points_frac, verdicts[1].points_frac);
        prop_assert_eq!(verdicts[0].passed, verdicts[1].passed);
    }

    #[test]
    fn literal_parameters_score_exactly_one(values in param_values()) {
        let dir = tempfile::tempdir().unwrap();
        let reference = grid(20);
        let manifest = Manifest::load(write_manifest(dir.path(), &reference, &values)).unwrap();
        let trial_dir = dir.path().join("trial_0");
        fs::create_dir_all(&trial_dir).unwrap();
        fs::write(trial_dir.join("run.py"), literal_code(&values)).unwrap();
        let trial = trial_artifacts("sys", "T01", "trial_0", &trial_dir, &Layout::default()).unwrap();
        let score = score_trial(&trial, &manifest.tasks[0], &manifest);
        prop_assert_eq!(score.record.metrics.pas, 1.0);
    }

    #[test]
    fn extraction_is_deterministic(values in param_values()) {
        let code = literal_code(&values);
        let files = [SourceFile { name: "a.py", text: &code }, SourceFile { name: "b.py", text: &code }];
        let registry = Registry::builtin();
        let config = ExtractionConfig::default();
        let first = extract_parameters(&files, &registry, &config);
        let second = extract_parameters(&files, &registry, &config);
        prop_assert_eq!(first, second);
    }

    #[test]
    fn recovery_is_invariant_to_rescaling(
        value in -10.0f64..10.0,
        sigma in 0.01f64..5.0,
        got in -10.0f64..10.0,
        k in 0.01f64..100.0,
    ) {
        let at = |s: f64| {
            let refs = vec![LiteratureReference::new("T1", "p", value * s, sigma * s, "ref").unwrap()];
            let values = [("p".to_owned(), got * s)].into_iter().collect();
            recovery_score(&values, &refs).unwrap().1
        };
        prop_assert!((at(1.0) - at(k)).abs() < 1e-9);
    }
}

#[test]
fn manifest_loading_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), &grid(12), &PARAMS);
    let a = Manifest::load(&path).unwrap();
    let b = Manifest::load(&path).unwrap();
    assert_eq!(a.tasks, b.tasks);
    assert_eq!(a.registry, b.registry);
    assert_eq!(a.extraction, b.extraction);
}

#[test]
fn report_emission_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let reference = grid(30);
    let manifest = Manifest::load(write_manifest(dir.path(), &reference, &PARAMS)).unwrap();
    let root = dir.path().join("trials");
    for (system, k) in [("alpha", 0), ("alpha", 1), ("beta", 0)] {
        let trial_dir = root.join(system).join("T01").join(format!("trial_{k}"));
        fs::create_dir_all(&trial_dir).unwrap();
        fs::write(trial_dir.join("run.py"), literal_code(&PARAMS)).unwrap();
        let text: String = reference.points().map(|(x, y)| format!("{x},{}\n", y * (1.0 + k as f64))).collect();
        fs::write(trial_dir.join("output.csv"), text).unwrap();
    }
    let suite = score_suite(&manifest, &root, &SuiteFilter::default(), 2).unwrap();
    let report = SuiteReportFile::new(suite, Vec::new());
    let first = emit_reports(&report, &dir.path().join("a"), Format::All).unwrap();
    let second = emit_reports(&report, &dir.path().join("b"), Format::All).unwrap();
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }
}
