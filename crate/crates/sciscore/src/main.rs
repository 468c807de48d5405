use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sciscore::dr::{self, DrStore, RatingEntry};
use sciscore::error::{Error, Result, EXIT_OK};
use sciscore::fixtures::{self, Profile, PROFILE_NAMES};
use sciscore::ingest::{trial_artifacts, Layout};
use sciscore::manifest::{validate_thresholds, Manifest};
use sciscore::report::{self, emit_dr_summary, emit_reports, Format, SuiteReportFile};
use sciscore::{literature, score_suite, score_trial, SuiteFilter, TrialScore};
use sciscore_core::recovery::dr_summary;

#[derive(Debug, Parser)]
#[command(name = "sciscore", version, about = "Score generated scientific code and its numerical output")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a single trial and print its metrics.
    ScoreTrial(ScoreTrialArgs),
    /// Score every trial under a root and write suite reports.
    ScoreSuite(ScoreSuiteArgs),
    /// Score research-style trials against literature values.
    DrScore(DrScoreArgs),
    /// Record qualitative ratings for one research-style trial.
    DrRate(DrRateArgs),
    /// Re-emit report files from a saved suite_report.json.
    Report(ReportArgs),
    /// Write a seeded synthetic trial corpus.
    GenFixtures(GenFixturesArgs),
}

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Task manifest (JSON).
    #[arg(long, env = "SCISCORE_MANIFEST")]
    manifest: PathBuf,
    /// Mode B cut-off on PAS.
    #[arg(long)]
    pas_threshold: Option<f64>,
    /// Mode C cut-off on NAS.
    #[arg(long)]
    nas_threshold: Option<f64>,
    /// CCC score the unit flag requires to be exceeded.
    #[arg(long)]
    ccc_unit_threshold: Option<f64>,
    /// NRMSE score the unit flag requires to be undercut.
    #[arg(long)]
    nrmse_unit_threshold: Option<f64>,
    /// Required fraction of the reference x-range, for every task.
    #[arg(long)]
    esr_coverage: Option<f64>,
    /// Required fraction of the reference point count, for every task.
    #[arg(long)]
    esr_points: Option<f64>,
}

impl ScoringArgs {
    fn load(&self) -> Result<Manifest> {
        let mut m = Manifest::load(&self.manifest)?;
        let t = &mut m.thresholds;
        t.pas = self.pas_threshold.unwrap_or(t.pas);
        t.nas = self.nas_threshold.unwrap_or(t.nas);
        t.unit_ccc = self.ccc_unit_threshold.unwrap_or(t.unit_ccc);
        t.unit_nrmse = self.nrmse_unit_threshold.unwrap_or(t.unit_nrmse);
        validate_thresholds(&m.thresholds)?;
        m.override_esr(self.esr_coverage, self.esr_points)?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrialFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct ScoreTrialArgs {
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Root of the trial tree (`<root>/<system>/<task>/trial_<k>`).
    #[arg(long)]
    root: PathBuf,
    #[arg(long)]
    system: String,
    #[arg(long)]
    task: String,
    /// Trial directory name or index (`3` means `trial_3`).
    #[arg(long)]
    trial: String,
    #[arg(long, value_enum, default_value = "text")]
    format: TrialFormat,
    /// Also write the full result as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Args)]
struct ScoreSuiteArgs {
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long)]
    root: PathBuf,
    /// Directory for report files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    format: Format,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs(), value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    jobs: usize,
    /// Only these systems (comma-separated).
    #[arg(long, value_delimiter = ',')]
    systems: Option<Vec<String>>,
    /// Only these tasks (comma-separated).
    #[arg(long, value_delimiter = ',')]
    tasks: Option<Vec<String>>,
    /// Research-trial store to include in the suite report.
    #[arg(long)]
    dr_store: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DrScoreArgs {
    /// Root of the research trials (`<root>/<task>/trial_<k>/results.json`).
    #[arg(long)]
    root: PathBuf,
    /// Literature table (CSV or JSON); defaults to the bundled table.
    #[arg(long)]
    literature: Option<PathBuf>,
    /// Ratings CSV with columns task_id,trial_id,pp,ft,notes.
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Directory for the store and summary files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    format: Format,
}

#[derive(Debug, Args)]
struct DrRateArgs {
    /// Store written by `dr-score`.
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    task: String,
    #[arg(long)]
    trial: String,
    /// Physical plausibility: pass, partial, fail or unrated.
    #[arg(long, default_value = "unrated")]
    pp: String,
    /// Failure transparency: pass, partial, fail or unrated.
    #[arg(long, default_value = "unrated")]
    ft: String,
    #[arg(long, default_value = "")]
    notes: String,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// A suite_report.json written by `score-suite`.
    #[arg(long)]
    input: PathBuf,
    /// Research-trial store to merge in.
    #[arg(long)]
    dr_store: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    format: Format,
}

#[derive(Debug, Args)]
struct GenFixturesArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "standard", value_parser = clap::builder::PossibleValuesParser::new(PROFILE_NAMES))]
    profile: String,
    /// Override the profile's trials per task.
    #[arg(long)]
    trials_per_task: Option<usize>,
}

fn render_trial(score: &TrialScore) -> String {
    let r = &score.record;
    let m = &r.metrics;
    let mut out = String::new();
    let _ = writeln!(out, "{}/{}/{}", r.system, r.task, r.trial);
    let _ = writeln!(
        out,
        "  esr    {}  (coverage {:.4}, points {:.4})",
        if m.esr { "pass" } else { "fail" },
        score.esr.coverage_frac,
        score.esr.points_frac
    );
    let _ = writeln!(out, "  pas    {:.4}", m.pas);
    for (p, e) in &m.per_param_eps {
        let _ = writeln!(out, "    eps[{p}] = {e:.4}");
    }
    let _ = writeln!(
        out,
        "  nas    {:.4}  (nrmse {:.4}, smape {:.4}, ccc {:.4})",
        m.nas, m.s_nrmse, m.s_smape, m.s_ccc
    );
    let _ = writeln!(out, "  final  {:.4}", m.final_score);
    let _ = write!(out, "  mode   {} ({})", r.failure.mode, r.failure.mode.description());
    if let Some(sub) = r.failure.subclass() {
        let _ = write!(out, " [{sub}]");
    }
    out.push('\n');
    let _ = writeln!(out, "  unit_error_flag {}", r.failure.unit_error_flag);
    for reason in &r.reasons {
        let _ = writeln!(out, "  note: {reason}");
    }
    for u in &score.extraction.unresolved {
        let _ = writeln!(
            out,
            "  unresolved: {} ({}) at {}:{}",
            u.name, u.reason, u.location.file, u.location.line
        );
    }
    out
}

fn cmd_score_trial(args: &ScoreTrialArgs) -> Result<()> {
    let manifest = args.scoring.load()?;
    let task = manifest
        .task(&args.task)
        .ok_or_else(|| Error::Config(format!("task `{}` is not in the manifest", args.task)))?;
    let trial_id = dr::normalize_trial_id(&args.trial);
    let dir = args.root.join(&args.system).join(&args.task).join(&trial_id);
    if !dir.is_dir() {
        return Err(Error::io(
            &dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "trial directory not found"),
        ));
    }
    let layout = Layout::new(&manifest.code_glob, &manifest.output_name)?;
    let trial = trial_artifacts(&args.system, &args.task, &trial_id, &dir, &layout)?;
    let score = score_trial(&trial, task, &manifest);
    let json = report::to_sorted_json(&score);
    if let Some(path) = &args.out {
        std::fs::write(path, &json).map_err(|e| Error::io(path, e))?;
    }
    match args.format {
        TrialFormat::Text => print!("{}", render_trial(&score)),
        TrialFormat::Json => print!("{json}"),
    }
    Ok(())
}

fn load_dr_store(path: Option<&Path>) -> Result<Vec<sciscore_core::DrTrialReport>> {
    Ok(match path {
        Some(p) => DrStore::load(p)?.reports,
        None => Vec::new(),
    })
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_score_suite(args: &ScoreSuiteArgs) -> Result<()> {
    let manifest = args.scoring.load()?;
    let filter = SuiteFilter {
        systems: args.systems.as_ref().map(|s| s.iter().cloned().collect::<BTreeSet<_>>()),
        tasks: args.tasks.as_ref().map(|t| t.iter().cloned().collect::<BTreeSet<_>>()),
    };
    let suite = score_suite(&manifest, &args.root, &filter, args.jobs)?;
    let dr_reports = load_dr_store(args.dr_store.as_deref())?;
    let file = SuiteReportFile::new(suite, dr_reports);
    print!("{}", report::summary_md(&file.suite));
    print_written(&emit_reports(&file, &args.out, args.format)?);
    Ok(())
}

fn cmd_dr_score(args: &DrScoreArgs) -> Result<()> {
    let refs = match &args.literature {
        Some(p) => literature::load_literature(p)?,
        None => literature::builtin(),
    };
    let mut store = DrStore::new(dr::score_dr(&args.root, &refs)?);
    if let Some(path) = &args.ratings {
        for entry in dr::load_ratings(path)? {
            store.rate(&entry)?;
        }
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let store_path = args.out.join(dr::STORE_FILE);
    store.save(&store_path)?;
    let rows = dr_summary(&store.reports);
    print!("{}", report::dr_summary_md(&rows));
    println!("wrote {}", store_path.display());
    print_written(&emit_dr_summary(&rows, &args.out, args.format)?);
    Ok(())
}

fn cmd_dr_rate(args: &DrRateArgs) -> Result<()> {
    let mut store = DrStore::load(&args.store)?;
    store.rate(&RatingEntry {
        task_id: args.task.clone(),
        trial_id: args.trial.clone(),
        pp: args.pp.clone(),
        ft: args.ft.clone(),
        notes: args.notes.clone(),
    })?;
    store.save(&args.store)?;
    let dir = args.store.parent().unwrap_or_else(|| Path::new("."));
    let rows = dr_summary(&store.reports);
    print!("{}", report::dr_summary_md(&rows));
    print_written(&emit_dr_summary(&rows, dir, Format::All)?);
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let mut file = SuiteReportFile::load(&args.input)?;
    if let Some(p) = &args.dr_store {
        file = SuiteReportFile::new(file.suite, DrStore::load(p)?.reports);
    }
    print_written(&emit_reports(&file, &args.out, args.format)?);
    Ok(())
}

fn cmd_gen_fixtures(args: &GenFixturesArgs) -> Result<()> {
    let mut profile = Profile::named(&args.profile)
        .ok_or_else(|| Error::Config(format!("unknown profile `{}`", args.profile)))?;
    if let Some(n) = args.trials_per_task {
        profile.trials_per_task = n;
    }
    let corpus = fixtures::generate(&args.out, &profile, args.seed)?;
    println!(
        "generated {} trials ({} profile, seed {}) in {}",
        corpus.expected.len(),
        profile.name,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::ScoreTrial(a) => cmd_score_trial(a),
        Command::ScoreSuite(a) => cmd_score_suite(a),
        Command::DrScore(a) => cmd_dr_score(a),
        Command::DrRate(a) => cmd_dr_rate(a),
        Command::Report(a) => cmd_report(a),
        Command::GenFixtures(a) => cmd_gen_fixtures(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
