//! Command implementations behind the `rankfit` binary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;

use rankfit::analysis::correlate_fits;
use rankfit::data::{
    build_series, group_strata, load_csv, pooled_stratum, StratumDataset, DEFAULT_MIN_UNITS,
};
use rankfit::report::{
    compare_fit_reports, read_fit_report, write_compare_csv, write_correlation_csv, write_fit_csv,
    write_json, FitReport, FitRow, FitStatus,
};
use rankfit::synth::{sampled_counts, SYNTHETIC_STRATUM};
use rankfit::{fit_mle, FitConfig, Indicator, UpConvention};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rankfit::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_io() => EXIT_IO,
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "rankfit",
    version,
    about = "Fit DGB rank-size laws to stratified data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit every stratum of a census CSV.
    Fit(FitArgs),
    /// Correlate fitted parameters across reports.
    Correlate(CorrelateArgs),
    /// Per-stratum changes between two fit reports.
    Compare(CompareArgs),
    /// Draw a synthetic series and write it as a census CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// population|lr|wpr|sr-lr|sr-wpr|custom:<column>
    #[arg(long, default_value = "population")]
    pub indicator: Indicator,
    #[arg(long)]
    pub year: i32,
    #[arg(long, default_value_t = DEFAULT_MIN_UNITS)]
    pub min_units: usize,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Also fit all units together as one stratum with this name.
    #[arg(long)]
    pub pooled: Option<String>,
    /// normalized | nats-over-log2
    #[arg(long, default_value_t = UpConvention::Normalized)]
    pub up_convention: UpConvention,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    /// Fit reports (CSV or JSON).
    #[arg(long, num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,
    /// Required year of every report; taken from the first one when omitted.
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Earlier report, then later report.
    #[arg(long, num_args = 2, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(short, long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(short, long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Year stamped on every row.
    #[arg(long, default_value_t = 0)]
    pub year: i32,
    /// Output file; defaults to `<out-dir>/simulated.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub exit_code: u8,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Correlate(args) => cmd_correlate(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn fit_stratum(ds: &StratumDataset, indicator: &Indicator, config: &FitConfig) -> FitRow {
    let id = ds.stratum_id.as_str();
    if !ds.included {
        let reason = ds.exclusion_reason.clone().unwrap_or_default();
        return FitRow::without_fit(
            id,
            indicator,
            ds.year,
            Some(ds.units.len()),
            FitStatus::Excluded,
            reason,
        );
    }
    let series = match build_series(ds, indicator) {
        Ok(s) => s,
        Err(e) => {
            return FitRow::without_fit(
                id,
                indicator,
                ds.year,
                Some(ds.units.len()),
                FitStatus::Failed,
                e.to_string(),
            )
        }
    };
    match fit_mle(&series, config) {
        Ok(fit) => FitRow::from_fit(id, indicator, ds.year, &fit),
        Err(rankfit::Error::NonConvergence { best }) => {
            FitRow::from_fit(id, indicator, ds.year, &best)
        }
        Err(e @ rankfit::Error::StratumTooSmall { .. }) => FitRow::without_fit(
            id,
            indicator,
            ds.year,
            Some(series.len()),
            FitStatus::Excluded,
            e.to_string(),
        ),
        Err(e) => FitRow::without_fit(
            id,
            indicator,
            ds.year,
            Some(series.len()),
            FitStatus::Failed,
            e.to_string(),
        ),
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

/// Fit each state (and the optional pooled stratum) and write the report.
pub fn cmd_fit(args: &FitArgs) -> Result<Outcome> {
    let config = FitConfig {
        min_units: args.min_units,
        up_convention: args.up_convention,
        ..FitConfig::default()
    };
    config.validate()?;

    let loaded = load_csv(&args.input)?;
    for w in &loaded.warnings {
        warn!("{w}");
    }
    for r in &loaded.rejects {
        warn!("{}:{}: {}", args.input.display(), r.line, r.reason);
    }
    info!("{}", loaded.summary());

    let mut strata = group_strata(&loaded.records, args.year, args.min_units);
    if let Some(label) = &args.pooled {
        if strata.iter().any(|s| &s.stratum_id == label) {
            return Err(CliError::Usage(format!(
                "pooled label {label:?} collides with a state name"
            )));
        }
        strata.insert(
            0,
            pooled_stratum(&loaded.records, args.year, label, args.min_units),
        );
    }
    if !strata.iter().any(|s| s.included) {
        return Err(CliError::Usage(format!(
            "no stratum for year {} has at least {} units",
            args.year, args.min_units
        )));
    }

    // indexed parallel collect keeps input order
    let rows: Vec<FitRow> = thread_pool(args.jobs)?.install(|| {
        strata
            .par_iter()
            .map(|ds| fit_stratum(ds, &args.indicator, &config))
            .collect()
    });
    for r in rows.iter().filter(|r| r.status != FitStatus::Ok) {
        warn!(
            "{} {}: {}",
            r.stratum,
            r.status.label(),
            r.reason.as_deref().unwrap_or("")
        );
    }

    let report = FitReport {
        indicator: args.indicator.clone(),
        year: args.year,
        up_convention: args.up_convention,
        rows,
    };
    let stem = format!("fit_{}_{}", args.indicator.slug(), args.year);
    let files = write_outputs(&args.out_dir, &stem, args.format, &report, |r, w| {
        write_fit_csv(r, w)
    })?;
    let exit_code = if report.has_non_converged() {
        EXIT_NON_CONVERGENCE
    } else {
        EXIT_OK
    };
    Ok(Outcome { files, exit_code })
}

fn write_outputs<T: serde::Serialize>(
    dir: &Path,
    stem: &str,
    format: Format,
    value: &T,
    csv: impl Fn(&T, &mut BufWriter<File>) -> rankfit::Result<()>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut files = Vec::new();
    if format.csv() {
        let path = dir.join(format!("{stem}.csv"));
        let mut w = create(&path)?;
        csv(value, &mut w)?;
        finish(w, &path)?;
        files.push(path);
    }
    if format.json() {
        let path = dir.join(format!("{stem}.json"));
        let mut w = create(&path)?;
        write_json(value, &mut w)?;
        finish(w, &path)?;
        files.push(path);
    }
    Ok(files)
}

/// Correlation report over the strata shared by all inputs.
pub fn cmd_correlate(args: &CorrelateArgs) -> Result<Outcome> {
    let reports = args
        .input
        .iter()
        .map(read_fit_report)
        .collect::<rankfit::Result<Vec<_>>>()?;
    let year = args.year.unwrap_or(reports[0].year);
    let mut labels: Vec<String> = Vec::new();
    let mut fits = Vec::new();
    for (rep, path) in reports.iter().zip(&args.input) {
        if rep.year != year {
            return Err(CliError::Usage(format!(
                "{} is for year {}, expected {year}",
                path.display(),
                rep.year
            )));
        }
        let base = rep.indicator.slug();
        let mut label = base.clone();
        let mut k = 2;
        while labels.contains(&label) {
            label = format!("{base}#{k}");
            k += 1;
        }
        fits.extend(rep.stratum_fits(&label));
        labels.push(label);
    }
    let report = correlate_fits(&fits, year)?;
    let files = write_outputs(
        &args.out_dir,
        &format!("correlation_{year}"),
        args.format,
        &report,
        |r, w| write_correlation_csv(r, w),
    )?;
    Ok(Outcome {
        files,
        exit_code: EXIT_OK,
    })
}

/// Delta table between an earlier and a later report.
pub fn cmd_compare(args: &CompareArgs) -> Result<Outcome> {
    let [first, second] = args.input.as_slice() else {
        return Err(CliError::Usage("compare takes exactly two reports".into()));
    };
    let earlier = read_fit_report(first)?;
    let later = read_fit_report(second)?;
    let report = compare_fit_reports(&earlier, &later)?;
    let stem = if earlier.indicator == later.indicator {
        format!(
            "compare_{}_{}_{}",
            earlier.indicator.slug(),
            earlier.year,
            later.year
        )
    } else {
        format!(
            "compare_{}_{}_{}_{}",
            earlier.indicator.slug(),
            earlier.year,
            later.indicator.slug(),
            later.year
        )
    };
    let files = write_outputs(&args.out_dir, &stem, args.format, &report, |r, w| {
        write_compare_csv(r, w)
    })?;
    Ok(Outcome {
        files,
        exit_code: EXIT_OK,
    })
}

/// Sample counts and write them in the census schema so `fit` can read them
/// back with `--indicator population`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let counts = sampled_counts(args.a, args.b, args.n, args.draws, args.seed)?;
    let path = match &args.output {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(parent)?;
            }
            p.clone()
        }
        None => {
            ensure_dir(&args.out_dir)?;
            args.out_dir.join("simulated.csv")
        }
    };
    let width = args.n.to_string().len();
    let mut w = create(&path)?;
    let io = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    writeln!(w, "state,district,year,pop_t").map_err(io)?;
    for (i, c) in counts.iter().enumerate() {
        writeln!(
            w,
            "{SYNTHETIC_STRATUM},u{:0width$},{},{c}",
            i + 1,
            args.year
        )
        .map_err(io)?;
    }
    finish(w, &path)?;
    Ok(Outcome {
        files: vec![path],
        exit_code: EXIT_OK,
    })
}
