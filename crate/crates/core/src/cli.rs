//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numeric failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::datagen::FieldConfig;
use crate::error::Error;
use crate::estimators::{
    band, covariance_auto, ledoit_wolf, pairwise_covariance, pd_margin_check, sample_covariance,
    threshold, ThresholdSpec,
};
use crate::experiments::{
    cv_vs_oracle, eof_pipeline, rate_study, run_table1, scree, CvOracleConfig, EofThreshold,
    RateConfig, ScreeConfig, Table1Config,
};
use crate::io::{format_g17, read_obs_matrix, sym_matrix_to_csv, write_text};
use crate::matcore::{min_eigenvalue, SymMatrix};
use crate::selection::{
    default_threshold_grid, full_band_grid, select, Regularizer, SplitRule, SplitScheme,
    TuningGrid, DEFAULT_SPLITS,
};
use crate::sparsity::profile;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "covthresh",
    version,
    about = "Sparse covariance estimation by hard thresholding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory receiving all output files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Seed for every random draw; overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sample,
    Pairwise,
    Threshold,
    Band,
    LedoitWolf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Threshold,
    Band,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a covariance matrix from an observation CSV.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Threshold level for `threshold`.
        #[arg(long)]
        s: Option<f64>,
        /// Band width for `band`.
        #[arg(long)]
        k: Option<usize>,
        /// Leave the diagonal untouched when thresholding.
        #[arg(long)]
        keep_diagonal: bool,
        /// Exponent of the reported sparsity profile.
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Choose a threshold or band width by random sample splitting.
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Threshold)]
        kind: Kind,
        #[arg(long, default_value_t = DEFAULT_SPLITS)]
        splits: usize,
        /// Pieces each base threshold step is divided into.
        #[arg(long, default_value_t = 1)]
        subdivisions: usize,
        /// Size the fitting half as this fraction of the rows instead of
        /// the default `n - n / ln n`.
        #[arg(long)]
        train_fraction: Option<f64>,
        /// Explicit comma-separated grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// AR(1) comparison of all estimators (loss summary table).
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalue summaries by rank.
    Scree {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical convergence rate along a (p, n) ladder.
    Rate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Frobenius loss of the cross-validated threshold relative to the oracle.
    Cvoracle {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Leading EOFs of a synthetic two-region field.
    Eof {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Configuration of the `eof` command.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct EofConfig {
    pub field: FieldConfig,
    #[serde(default = "default_eof_threshold")]
    pub threshold: EofThreshold,
    #[serde(default = "default_components")]
    pub components: usize,
}

fn default_eof_threshold() -> EofThreshold {
    EofThreshold::Oracle {
        grid_subdivisions: 10,
    }
}

fn default_components() -> usize {
    3
}

impl Default for EofConfig {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            threshold: default_eof_threshold(),
            components: default_components(),
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Estimate { common, .. }
        | Command::Select { common, .. }
        | Command::Simulate { common, .. }
        | Command::Scree { common, .. }
        | Command::Rate { common, .. }
        | Command::Cvoracle { common, .. }
        | Command::Eof { common, .. } => common,
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let c = common(&cli.command).clone();
    if c.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    std::fs::create_dir_all(&c.out_dir).map_err(|e| {
        CliError::Lib(Error::Io {
            path: c.out_dir.display().to_string(),
            message: e.to_string(),
        })
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &c))
}

struct Output {
    out_dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Self {
            out_dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        write_text(&self.out_dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.write(name, &text)
    }

    fn write_matrix(&mut self, stem: &str, m: &SymMatrix, format: OutputFormat) -> CliResult<()> {
        match format {
            OutputFormat::Csv => self.write(&format!("{stem}.csv"), &sym_matrix_to_csv(m)),
            OutputFormat::Json => self.write_json(
                &format!("{stem}.json"),
                &json!({ "p": m.dim(), "rows": m.to_rows() }),
            ),
        }
    }

    /// Manifest echoing the command, its resolved configuration and every
    /// file written. No timestamp, so reruns are byte-identical.
    fn finish(
        mut self,
        command: &str,
        common: &Common,
        seed: Option<u64>,
        config: serde_json::Value,
    ) -> CliResult<()> {
        let mut files = self.files.clone();
        files.push("manifest.json".into());
        let manifest = json!({
            "tool": "covthresh",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "threads": common.threads,
            "format": common.format,
            "config": config,
            "outputs": files,
        });
        self.write_json("manifest.json", &manifest)
    }
}

fn load_config<T, F>(path: Option<&Path>, seed: Option<u64>, set_seed: F) -> CliResult<T>
where
    T: DeserializeOwned + Default,
    F: FnOnce(&mut T, u64),
{
    let (mut cfg, from_file) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            let cfg: T = serde_json::from_str(&text).map_err(|e| Error::Parse {
                source_name: p.display().to_string(),
                line: e.line(),
                message: e.to_string(),
            })?;
            (cfg, true)
        }
        None => (T::default(), false),
    };
    match seed {
        Some(s) => set_seed(&mut cfg, s),
        None if from_file => {}
        None => {
            return Err(CliError::Usage(
                "a seed is required: pass --seed or a --config file with a seed".into(),
            ))
        }
    }
    Ok(cfg)
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

fn dispatch(cmd: &Command, c: &Common) -> CliResult<()> {
    let mut out = Output::new(&c.out_dir);
    match cmd {
        Command::Estimate {
            input,
            method,
            s,
            k,
            keep_diagonal,
            q,
            ..
        } => {
            let x = read_obs_matrix(input)?;
            let mut margin = None;
            let estimate = match method {
                Method::Sample => sample_covariance(&x)?,
                Method::Pairwise => pairwise_covariance(&x)?,
                Method::LedoitWolf => ledoit_wolf(&x)?,
                Method::Threshold => {
                    let s =
                        s.ok_or_else(|| CliError::Usage("--s is required for threshold".into()))?;
                    let base = covariance_auto(&x)?;
                    let t = threshold(&base, ThresholdSpec::new(s, *keep_diagonal)?);
                    margin = Some(pd_margin_check(&base, &t)?);
                    t
                }
                Method::Band => {
                    let k = k.ok_or_else(|| CliError::Usage("--k is required for band".into()))?;
                    band(&covariance_auto(&x)?, k)
                }
            };
            let pr = profile(&estimate, *q)?;
            out.write_matrix("estimate", &estimate, c.format)?;
            out.write_json(
                "report.json",
                &json!({
                    "method": method,
                    "n": x.n(),
                    "p": estimate.dim(),
                    "missing": x.missing_count(),
                    "min_eigenvalue": min_eigenvalue(&estimate)?,
                    "pd_margin_check": margin,
                    "sparsity": {
                        "q": pr.q,
                        "c0_hat": pr.c0_hat,
                        "m_hat": pr.m_hat,
                        "min_eig": pr.min_eig,
                        "max_eig": pr.max_eig,
                        "lambda_max_bound": pr.lambda_max_bound,
                    },
                }),
            )?;
            let config = json!({
                "input": input.display().to_string(),
                "method": method,
                "s": s,
                "k": k,
                "keep_diagonal": keep_diagonal,
                "q": q,
            });
            out.finish("estimate", c, None, config)
        }
        Command::Select {
            input,
            kind,
            splits,
            subdivisions,
            train_fraction,
            grid,
            ..
        } => {
            let seed = c
                .seed
                .ok_or_else(|| CliError::Usage("select requires --seed".into()))?;
            let x = read_obs_matrix(input)?;
            let rule = match train_fraction {
                Some(f) => SplitRule::TrainFraction { fraction: *f },
                None => SplitRule::LogN,
            };
            let scheme = SplitScheme::from_rule(rule, x.n(), *splits, seed)?;
            let reg = match kind {
                Kind::Threshold => Regularizer::Threshold,
                Kind::Band => Regularizer::Band,
            };
            let grid = match (grid, reg) {
                (Some(points), _) => TuningGrid::from_points(points.clone(), reg)?,
                (None, Regularizer::Threshold) => default_threshold_grid(&x, *subdivisions)?,
                (None, Regularizer::Band) => full_band_grid(x.p())?,
            };
            let result = select(&x, &grid, &scheme)?;
            let estimate = reg.apply(&covariance_auto(&x)?, result.chosen);
            out.write("selection.json", &(result.to_json() + "\n"))?;
            out.write_matrix("estimate", &estimate, c.format)?;
            let config = json!({
                "input": input.display().to_string(),
                "kind": reg.as_str(),
                "split": rule,
                "n1": scheme.n1,
                "n2": scheme.n2,
                "n_splits": splits,
                "subdivisions": subdivisions,
                "grid": grid.points(),
            });
            out.finish("select", c, Some(seed), config)
        }
        Command::Simulate { config, .. } => {
            let cfg = load_config::<Table1Config, _>(config.as_deref(), c.seed, |t, s| t.seed = s)?;
            let result = run_table1(&cfg)?;
            match c.format {
                OutputFormat::Csv => out.write("summary.csv", &result.summary.to_csv())?,
                OutputFormat::Json => out.write_json(
                    "summary.json",
                    &json!({ "config": &cfg, "rows": &result.summary.rows }),
                )?,
            }
            let mut raw = String::from(
                "p,rep,estimator,one_norm,operator,frobenius,lambda_max_err,pc1_cos,selected\n",
            );
            for r in &result.replications {
                for rec in &r.records {
                    raw.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{}\n",
                        r.p,
                        r.rep,
                        rec.estimator,
                        format_g17(rec.one_norm_loss),
                        format_g17(rec.op_norm_loss),
                        format_g17(rec.frob_loss),
                        format_g17(rec.lambda_max_abs_err),
                        format_g17(rec.pc1_abs_cos),
                        rec.chosen_param
                            .map(format_g17)
                            .unwrap_or_else(|| "NA".into()),
                    ));
                }
            }
            out.write("replications.csv", &raw)?;
            out.finish("simulate", c, Some(cfg.seed), to_value(&cfg))
        }
        Command::Scree { config, .. } => {
            let cfg = load_config::<ScreeConfig, _>(config.as_deref(), c.seed, |t, s| t.seed = s)?;
            let data = scree(&cfg)?;
            match c.format {
                OutputFormat::Csv => out.write("scree.csv", &data.to_csv())?,
                OutputFormat::Json => out.write_json("scree.json", &data)?,
            }
            out.finish("scree", c, Some(cfg.seed), to_value(&cfg))
        }
        Command::Rate { config, .. } => {
            let cfg = load_config::<RateConfig, _>(config.as_deref(), c.seed, |t, s| t.seed = s)?;
            let study = rate_study(&cfg)?;
            out.write_json("rate.json", &study)?;
            if c.format == OutputFormat::Csv {
                let mut csv = String::from("p,n,log_ratio,threshold,mean_loss\n");
                for pt in &study.points {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        pt.p,
                        pt.n,
                        format_g17(pt.log_ratio),
                        format_g17(pt.threshold),
                        format_g17(pt.mean_loss)
                    ));
                }
                out.write("rate_points.csv", &csv)?;
            }
            out.finish("rate", c, Some(cfg.seed), to_value(&cfg))
        }
        Command::Cvoracle { config, .. } => {
            let cfg =
                load_config::<CvOracleConfig, _>(config.as_deref(), c.seed, |t, s| t.seed = s)?;
            let result = cv_vs_oracle(&cfg)?;
            out.write_json("cvoracle.json", &result)?;
            if c.format == OutputFormat::Csv {
                let mut csv = String::from("rep,ratio,chosen_cv,chosen_oracle\n");
                for (r, ((ratio, cv), oracle)) in result
                    .ratios
                    .iter()
                    .zip(&result.chosen_cv)
                    .zip(&result.chosen_oracle)
                    .enumerate()
                {
                    csv.push_str(&format!(
                        "{r},{},{},{}\n",
                        format_g17(*ratio),
                        format_g17(*cv),
                        format_g17(*oracle)
                    ));
                }
                out.write("cvoracle_ratios.csv", &csv)?;
            }
            out.finish("cvoracle", c, Some(cfg.seed), to_value(&cfg))
        }
        Command::Eof { config, .. } => {
            let cfg = load_config::<EofConfig, _>(config.as_deref(), c.seed, |t, s| {
                t.field.seed = s;
                if let EofThreshold::Cv { seed, .. } = &mut t.threshold {
                    *seed = s;
                }
            })?;
            let field = crate::datagen::synthetic_spatial_field(&cfg.field)?;
            let result = eof_pipeline(&field, &cfg.threshold, cfg.components)?;
            for comp in &result.components {
                match c.format {
                    OutputFormat::Csv => {
                        out.write(&format!("eof_{}.csv", comp.index), &comp.raster_csv())?
                    }
                    OutputFormat::Json => {
                        out.write_json(&format!("eof_{}.json", comp.index), &comp.raster)?
                    }
                }
            }
            let summary: Vec<_> = result
                .components
                .iter()
                .map(|e| {
                    json!({
                        "index": e.index,
                        "eigenvalue": e.eigenvalue,
                        "variance_fraction": e.variance_fraction,
                        "region_mass": e.region_mass,
                    })
                })
                .collect();
            out.write_json(
                "eof.json",
                &json!({
                    "threshold": result.threshold,
                    "negative_mass_fraction": result.negative_mass_fraction,
                    "components": summary,
                }),
            )?;
            out.finish("eof", c, Some(cfg.field.seed), to_value(&cfg))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("covthresh").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn parses_estimate_flags() {
        let cli = parse(&[
            "estimate",
            "--input",
            "x.csv",
            "--method",
            "threshold",
            "--s",
            "0.5",
        ]);
        match cli.command {
            Command::Estimate {
                method, s, common, ..
            } => {
                assert_eq!(method, Method::Threshold);
                assert_eq!(s, Some(0.5));
                assert_eq!(common.threads, 1);
                assert_eq!(common.format, OutputFormat::Csv);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_grid_list() {
        let cli = parse(&[
            "select",
            "--input",
            "x.csv",
            "--grid",
            "0,0.1,0.2",
            "--seed",
            "3",
        ]);
        match cli.command {
            Command::Select { grid, common, .. } => {
                assert_eq!(grid, Some(vec![0.0, 0.1, 0.2]));
                assert_eq!(common.seed, Some(3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["covthresh", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["covthresh", "estimate"]), EXIT_USAGE);
    }

    #[test]
    fn numeric_errors_exit_three() {
        let e = CliError::Lib(Error::NotPositiveDefinite("x".into()));
        assert_eq!(e.exit_code(), EXIT_NUMERIC);
        assert_eq!(CliError::Lib(Error::MissingData).exit_code(), EXIT_USAGE);
    }

    #[test]
    fn seed_is_required_without_config() {
        let r = load_config::<Table1Config, _>(None, None, |t, s| t.seed = s);
        assert!(matches!(r, Err(CliError::Usage(_))));
        let cfg = load_config::<Table1Config, _>(None, Some(9), |t, s| t.seed = s).unwrap();
        assert_eq!(cfg.seed, 9);
    }
}
