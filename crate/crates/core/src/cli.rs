//! Command-line front end.
//!
//! Each command writes one output file atomically (temp file + rename),
//! except `split`, which writes the train and test files. Exit status is 0
//! on success, 1 on a usage error and 2 on a data or model error.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::data::{
    crosstab, load_csv, stratified_split, vif, write_csv, Dataset, Mode, Schema, SynthConfig, LEVEL_OF_SERVICE,
};
use crate::error::Error;
use crate::eval::{cross_validate, segment_report, segment_report_csv, CVReport};
use crate::interpret::{
    center_curves, effects_suite, global_slope, ice, Condition, CurveFamily, Grid, DEFAULT_CURVE_CAP,
    DEFAULT_GRID_POINTS,
};
use crate::models::{fit, Hyperparams, ModelKind, SoftClassifier};
use crate::svg;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "modeswitch", version, about = "Train and interpret soft classifiers for mode switching")]
pub struct Cli {
    /// Worker threads for curve evaluation, cross-validation and forests.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Run the commands listed in a JSON manifest: {"steps": [[args...], ...]}.
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, env = "MODESWITCH_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Trained model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Data CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Feature to vary.
    #[arg(long)]
    pub feature: String,
    /// Points on a continuous feature's grid.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Center curves at this grid index (0 is the smallest grid value).
    #[arg(long)]
    pub center: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    /// Conditioning feature, or `mode` to condition on the current mode.
    #[arg(long)]
    pub segment_by: String,
    /// Conditioning value (a number, or a mode name with `--segment-by mode`).
    #[arg(long)]
    pub value: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Generator configuration JSON; defaults to the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n_rows: Option<usize>,
    },
    /// Stratified train/test split by current mode.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        test_fraction: f64,
        #[command(flatten)]
        seed: SeedArg,
        /// Training rows.
        #[arg(long, alias = "out")]
        train_out: PathBuf,
        /// Test rows.
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Variance inflation factor of every feature.
    Vif {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Current mode by switching decision counts.
    Crosstab {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// k-fold cross-validation and model selection.
    Cv {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Comma-separated model kinds; all seven by default.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<ModelKind>>,
        /// Hyperparameter JSON; defaults to the built-in values.
        #[arg(long)]
        hyperparams: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit one model on a dataset and save it as JSON.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Model kind; taken from `--cv` when omitted.
        #[arg(long)]
        model_kind: Option<ModelKind>,
        /// Cross-validation report whose selected model is trained.
        #[arg(long)]
        cv: Option<PathBuf>,
        #[arg(long)]
        hyperparams: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy and market-share report, overall and per current mode.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Partial dependence curve.
    Pdp(CurveArgs),
    /// Individual conditional expectation curves (sampled) and their mean.
    Ice {
        #[command(flatten)]
        curve: CurveArgs,
        /// Maximum number of exported curves.
        #[arg(long, default_value_t = DEFAULT_CURVE_CAP)]
        cap: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Partial dependence over a conditioned subpopulation.
    Cpdp {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        condition: ConditionArgs,
    },
    /// Individual curves of a conditioned subpopulation.
    Cipdp {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        condition: ConditionArgs,
        #[arg(long, default_value_t = DEFAULT_CURVE_CAP)]
        cap: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Endpoint slopes of the PDP and of each current mode's CPDP.
    Slopes {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Features; the level-of-service variables by default.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Marginal effects and elasticities of the level-of-service variables.
    Effects {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

impl clap::ValueEnum for ModelKind {
    fn value_variants<'a>() -> &'a [Self] {
        &ModelKind::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// A failed run: usage problems exit 1, data and model problems exit 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownFeature(_) => Failure::Usage(e.to_string()),
            e => Failure::Data(e),
        }
    }
}

type Outcome = std::result::Result<String, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Write `contents` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> crate::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn format_of(out: &OutArgs, allowed: &[Format]) -> std::result::Result<Format, Failure> {
    let f = match out.format {
        Some(f) => f,
        None => match out.out.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("json") => Format::Json,
            Some("svg") => Format::Svg,
            _ => Format::Csv,
        },
    };
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage(format!(
            "--format {:?} is not available for this command",
            f
        )))
    }
}

fn load_data(path: &Path) -> std::result::Result<Dataset, Failure> {
    if !path.exists() {
        return Err(usage(format!("--data: file {} does not exist", path.display())));
    }
    Ok(load_csv(path, &Schema::mode_switching())?)
}

fn load_model(path: &Path) -> std::result::Result<SoftClassifier, Failure> {
    if !path.exists() {
        return Err(usage(format!("--model: file {} does not exist", path.display())));
    }
    Ok(SoftClassifier::load(path)?)
}

fn load_hyperparams(path: Option<&Path>) -> std::result::Result<Hyperparams, Failure> {
    match path {
        None => Ok(Hyperparams::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("--hyperparams: {}: {e}", p.display())))?;
            let hp: Hyperparams =
                serde_json::from_str(&text).map_err(|e| usage(format!("--hyperparams: {}: {e}", p.display())))?;
            hp.validate()?;
            Ok(hp)
        }
    }
}

fn json_bytes<T: serde::Serialize>(v: &T) -> std::result::Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn condition_from(args: &ConditionArgs, data: &Dataset) -> std::result::Result<Condition, Failure> {
    if args.segment_by.eq_ignore_ascii_case("mode") {
        let mode: Mode = args
            .value
            .parse()
            .map_err(|_| usage(format!("--value: {:?} is not a mode (Car, Walk, Bike, Bus)", args.value)))?;
        return Ok(Condition::mode(data, mode)?);
    }
    data.feature_index(&args.segment_by)
        .map_err(|_| usage(format!("--segment-by: unknown feature {:?}", args.segment_by)))?;
    let v: f64 = args
        .value
        .parse()
        .map_err(|_| usage(format!("--value: {:?} is not a number", args.value)))?;
    Ok(Condition::single(&args.segment_by, v))
}

fn write_family(family: &CurveFamily, out: &OutArgs) -> std::result::Result<(), Failure> {
    let bytes = match format_of(out, &[Format::Csv, Format::Json, Format::Svg])? {
        Format::Csv => family.to_csv().into_bytes(),
        Format::Json => json_bytes(family)?,
        Format::Svg => svg::render_curves(family)?.into_bytes(),
    };
    Ok(write_atomic(&out.out, &bytes)?)
}

/// Compute the family, center it if asked, and keep at most `cap` curves.
fn curves(
    args: &CurveArgs,
    condition: Option<&ConditionArgs>,
    cap: usize,
    seed: u64,
) -> std::result::Result<(CurveFamily, usize), Failure> {
    let model = load_model(&args.model)?;
    let data = load_data(&args.data)?;
    data.feature_index(&args.feature)
        .map_err(|_| usage(format!("--feature: unknown feature {:?}", args.feature)))?;
    let grid = Grid::for_feature(&data, &args.feature, args.grid_points)?;
    let cond = condition.map(|c| condition_from(c, &data)).transpose()?;
    let mut family = ice(&model, &data, &grid, cond.as_ref())?;
    if let Some(anchor) = args.center {
        family = center_curves(&family, anchor).map_err(|e| usage(format!("--center: {e}")))?;
    }
    let n = family.curves.len();
    Ok((family.sample_curves(cap, seed), n))
}

fn run_command(cmd: Command) -> Outcome {
    match cmd {
        Command::Synth {
            out,
            seed,
            config,
            n_rows,
        } => {
            let mut cfg = match config {
                Some(p) => SynthConfig::from_json_file(&p).map_err(|e| usage(format!("--config: {e}")))?,
                None => SynthConfig::default(),
            };
            cfg.seed = seed.seed;
            if let Some(n) = n_rows {
                cfg.n_rows = n;
            }
            let data = crate::data::synthesize(&cfg)?;
            let mut buf = Vec::new();
            write_csv(&data, &mut buf)?;
            write_atomic(&out, &buf)?;
            Ok(format!(
                "synth: wrote {} rows to {} (switching share {:.2}%)",
                data.n_rows(),
                out.display(),
                100.0 * data.positive_share()
            ))
        }
        Command::Split {
            data,
            test_fraction,
            seed,
            train_out,
            test_out,
        } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(usage("--test-fraction must lie in (0, 1)"));
            }
            let d = load_data(&data)?;
            let split = stratified_split(&d, test_fraction, seed.seed)?;
            for w in &split.warnings {
                log::warn!("{w}");
                eprintln!("warning: {w}");
            }
            for (set, path) in [(&split.train, &train_out), (&split.test, &test_out)] {
                let mut buf = Vec::new();
                write_csv(set, &mut buf)?;
                write_atomic(path, &buf)?;
            }
            Ok(format!(
                "split: {} training rows to {}, {} test rows to {}",
                split.train.n_rows(),
                train_out.display(),
                split.test.n_rows(),
                test_out.display()
            ))
        }
        Command::Vif { data, out } => {
            let fmt = format_of(&out, &[Format::Csv, Format::Json])?;
            let d = load_data(&data)?;
            let v = vif(&d)?;
            let bytes = match fmt {
                Format::Json => json_bytes(&v)?,
                _ => {
                    let mut s = String::from("feature,vif\n");
                    for r in &v {
                        if r.value.is_finite() {
                            s.push_str(&format!("{},{:.4}\n", r.feature, r.value));
                        } else {
                            s.push_str(&format!("{},inf\n", r.feature));
                        }
                    }
                    s.into_bytes()
                }
            };
            write_atomic(&out.out, &bytes)?;
            let worst = v.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
            Ok(format!("vif: {} features, largest {:.4}, wrote {}", v.len(), worst, out.out.display()))
        }
        Command::Crosstab { data, out } => {
            let fmt = format_of(&out, &[Format::Csv, Format::Json])?;
            let d = load_data(&data)?;
            let ct = crosstab(&d)?;
            let bytes = match fmt {
                Format::Json => json_bytes(&ct)?,
                _ => ct.to_csv().into_bytes(),
            };
            write_atomic(&out.out, &bytes)?;
            Ok(format!("crosstab: {} rows tallied, wrote {}", ct.total(), out.out.display()))
        }
        Command::Cv {
            data,
            k,
            models,
            hyperparams,
            seed,
            out,
        } => {
            let fmt = format_of(&out, &[Format::Csv, Format::Json])?;
            let hp = load_hyperparams(hyperparams.as_deref())?;
            let d = load_data(&data)?;
            if k < 2 || k > d.n_rows() {
                return Err(usage(format!("--k must lie in [2, {}]", d.n_rows())));
            }
            let kinds = models.unwrap_or_else(|| ModelKind::ALL.to_vec());
            let report = cross_validate(&d, k, &kinds, &hp, seed.seed)?;
            let bytes = match fmt {
                Format::Json => json_bytes(&report)?,
                _ => report.to_csv().into_bytes(),
            };
            write_atomic(&out.out, &bytes)?;
            let best = report.scores(report.selected_model).unwrap();
            Ok(format!(
                "cv: selected {} (mean accuracy {:.4}), wrote {}",
                report.selected_model,
                best.mean_accuracy,
                out.out.display()
            ))
        }
        Command::Train {
            data,
            model_kind,
            cv,
            hyperparams,
            seed,
            out,
        } => {
            let kind = match (model_kind, cv) {
                (Some(k), _) => k,
                (None, Some(p)) => {
                    let text = fs::read_to_string(&p).map_err(|e| usage(format!("--cv: {}: {e}", p.display())))?;
                    let rep: CVReport =
                        serde_json::from_str(&text).map_err(|e| usage(format!("--cv: {}: {e}", p.display())))?;
                    rep.selected_model
                }
                (None, None) => return Err(usage("train needs --model-kind or --cv")),
            };
            let hp = load_hyperparams(hyperparams.as_deref())?;
            let d = load_data(&data)?;
            let model = fit(kind, &d, &hp, seed.seed)?;
            let mut text = model.to_json()?;
            text.push('\n');
            write_atomic(&out, text.as_bytes())?;
            Ok(format!("train: fit {kind} on {} rows, wrote {}", d.n_rows(), out.display()))
        }
        Command::Evaluate { model, data, out } => {
            let fmt = format_of(&out, &[Format::Csv, Format::Json])?;
            let m = load_model(&model)?;
            let d = load_data(&data)?;
            let rep = segment_report(&m, &d)?;
            let bytes = match fmt {
                Format::Json => json_bytes(&rep)?,
                _ => segment_report_csv(&rep).into_bytes(),
            };
            write_atomic(&out.out, &bytes)?;
            let all = rep[0].report.as_ref().ok_or(Error::EmptyDataset)?;
            Ok(format!(
                "evaluate: accuracy {:.4}, L1-norm {:.4}, wrote {}",
                all.overall_accuracy,
                all.l1_norm,
                out.out.display()
            ))
        }
        Command::Pdp(args) => {
            let (family, n) = curves(&args, None, 0, 0)?;
            write_family(&family, &args.out)?;
            Ok(format!(
                "pdp: {} over {} instances at {} grid points, wrote {}",
                args.feature,
                n,
                family.grid.values.len(),
                args.out.out.display()
            ))
        }
        Command::Ice { curve, cap, seed } => {
            let (family, n) = curves(&curve, None, cap, seed.seed)?;
            write_family(&family, &curve.out)?;
            Ok(format!(
                "ice: {} curves of {} exported for {}, wrote {}",
                family.curves.len(),
                n,
                curve.feature,
                curve.out.out.display()
            ))
        }
        Command::Cpdp { curve, condition } => {
            let (family, n) = curves(&curve, Some(&condition), 0, 0)?;
            write_family(&family, &curve.out)?;
            Ok(format!(
                "cpdp: {} given {}={} over {} instances, wrote {}",
                curve.feature,
                condition.segment_by,
                condition.value,
                n,
                curve.out.out.display()
            ))
        }
        Command::Cipdp {
            curve,
            condition,
            cap,
            seed,
        } => {
            let (family, n) = curves(&curve, Some(&condition), cap, seed.seed)?;
            write_family(&family, &curve.out)?;
            Ok(format!(
                "cipdp: {} curves of {} exported for {} given {}={}, wrote {}",
                family.curves.len(),
                n,
                curve.feature,
                condition.segment_by,
                condition.value,
                curve.out.out.display()
            ))
        }
        Command::Slopes {
            model,
            data,
            features,
            grid_points,
            out,
        } => {
            let fmt = format_of(&out, &[Format::Csv, Format::Json])?;
            let m = load_model(&model)?;
            let d = load_data(&data)?;
            let features = features.unwrap_or_else(|| LEVEL_OF_SERVICE.iter().map(|s| s.to_string()).collect());
            #[derive(serde::Serialize)]
            struct Row {
                feature: String,
                segment: String,
                n: usize,
                slope: Option<f64>,
            }
            let mut rows = Vec::new();
            for f in &features {
                d.feature_index(f)
                    .map_err(|_| usage(format!("--features: unknown feature {f:?}")))?;
                let grid = Grid::for_feature(&d, f, grid_points)?;
                let mut segs: Vec<(String, Option<Condition>)> = vec![("All".into(), None)];
                for mode in Mode::ALL {
                    segs.push((mode.to_string(), Some(Condition::mode(&d, mode)?)));
                }
                for (label, cond) in segs {
                    let row = match ice(&m, &d, &grid, cond.as_ref()) {
                        Ok(fam) => Row {
                            feature: f.clone(),
                            segment: label,
                            n: fam.curves.len(),
                            slope: global_slope(&fam).ok(),
                        },
                        Err(Error::EmptySelection) => Row {
                            feature: f.clone(),
                            segment: label,
                            n: 0,
                            slope: None,
                        },
                        Err(e) => return Err(e.into()),
                    };
                    rows.push(row);
                }
            }
            let bytes = match fmt {
                Format::Json => json_bytes(&rows)?,
                _ => {
                    let mut s = String::from("feature,segment,n,slope\n");
                    for r in &rows {
                        let v = r.slope.map(|v| format!("{v:.4}")).unwrap_or_default();
                        s.push_str(&format!("{},{},{},{}\n", r.feature, r.segment, r.n, v));
                    }
                    s.into_bytes()
                }
            };
            write_atomic(&out.out, &bytes)?;
            Ok(format!("slopes: {} rows, wrote {}", rows.len(), out.out.display()))
        }
        Command::Effects { model, data, out } => {
            let fmt = format_of(&out, &[Format::Csv, Format::Json, Format::Svg])?;
            let m = load_model(&model)?;
            let d = load_data(&data)?;
            let table = effects_suite(&m, &d)?;
            let bytes = match fmt {
                Format::Json => json_bytes(&table)?,
                Format::Svg => svg::render_effects(&table)?.into_bytes(),
                Format::Csv => table.to_csv().into_bytes(),
            };
            write_atomic(&out.out, &bytes)?;
            Ok(format!("effects: {} rows, wrote {}", table.rows.len(), out.out.display()))
        }
    }
}

#[derive(Debug, Deserialize)]
struct Manifest {
    steps: Vec<Vec<String>>,
}

fn run_manifest(path: &Path, threads: usize) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("usage error: --manifest: {}: {e}", path.display());
            return 1;
        }
    };
    let manifest: Manifest = match serde_json::from_str(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("usage error: --manifest: {}: {e}", path.display());
            return 1;
        }
    };
    for (k, step) in manifest.steps.iter().enumerate() {
        let mut args: Vec<OsString> = vec!["modeswitch".into(), "--threads".into(), threads.to_string().into()];
        args.extend(step.iter().map(OsString::from));
        let code = run(args);
        if code != 0 {
            eprintln!("manifest step {} failed with exit status {code}", k + 1);
            return code;
        }
    }
    0
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == 0 {
        eprintln!("usage error: --threads must be at least 1");
        return 1;
    }
    if let Some(m) = &cli.manifest {
        if cli.command.is_some() {
            eprintln!("usage error: --manifest cannot be combined with a command");
            return 1;
        }
        return run_manifest(m, cli.threads);
    }
    let Some(command) = cli.command else {
        eprintln!("usage error: a command or --manifest is required (see --help)");
        return 1;
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 2;
        }
    };
    match pool.install(|| run_command(command)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
