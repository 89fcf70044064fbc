//! `ldpc-store` command-line front end.

mod config;

pub use config::{load_config, parse_config, parse_rate, ConfigError};

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::construct::{girth, peg_construct, ConstructError, ConstructionSpec};
use crate::ddopt::{optimize_threshold, tradeoff_curve, OptError, OptProblem, RowStatus};
use crate::density_evolution::{decoding_threshold, scaled_threshold, DeConfig, DeError};
use crate::graph::{alist, DegreeDistribution, DegreeError, DegreeMap, FactorGraph};
use crate::peeling::{data_loss_probability, tolerance_profile, PeelError, ProfileConfig, ToleranceProfile};
use crate::reliability::{
    mds_loss_probability, mttdl_for_graph, mttdl_mds, mttdl_replication, reference_rows,
    MttdlReport, ReliabilityError, StorageSystemParams,
};

#[derive(Debug, Parser)]
#[command(name = "ldpc-store", version, about = "LDPC code design and reliability analysis for distributed storage")]
pub struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// System parameter file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Ldpc,
    Rs,
    Replication,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a factor graph by progressive edge growth and print it as alist.
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        dv: usize,
        /// Build an `n/L x m/L` base graph and lift it with `L x L` circulants.
        #[arg(long)]
        qc: Option<usize>,
        /// Write the alist here and print a summary instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the erasure tolerance profile of a code.
    Profile {
        #[arg(long)]
        alist: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        exact_upto: usize,
        /// Also write the JSON profile to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decoding threshold of a degree distribution pair given as `coef:degree` lists.
    Threshold {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
    },
    /// Optimise a check-regular variable degree distribution.
    Optimize {
        #[arg(long)]
        rate: String,
        #[arg(long)]
        dc: u32,
        #[arg(long, default_value_t = 16)]
        dmax: u32,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Repair bandwidth versus threshold for a range of check degrees.
    Tradeoff {
        #[arg(long)]
        rate: String,
        #[arg(long)]
        dc_min: u32,
        #[arg(long)]
        dc_max: u32,
        #[arg(long, default_value_t = 16)]
        dmax: u32,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Normalised mean time to data loss of one scheme.
    Mttdl {
        #[arg(long, value_enum)]
        scheme: SchemeKind,
        #[arg(long)]
        alist: Option<PathBuf>,
        /// Stripe length, or copy count for replication.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Reuse a saved profile instead of estimating one.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        exact_upto: usize,
    },
    /// Side-by-side MTTDL table for several schemes.
    Compare {
        /// Comma-separated: `replication3`, `rs_15_10`, `ldpc:path.alist`.
        #[arg(long, value_delimiter = ',', default_value = "")]
        schemes: Vec<String>,
        /// Append published rows for locally repairable codes.
        #[arg(long)]
        reference: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        exact_upto: usize,
    },
    /// Data-loss probability against independent block erasures.
    Lossprob {
        #[arg(long)]
        alist: PathBuf,
        /// Comma-separated erasure probabilities.
        #[arg(long, value_delimiter = ',', default_value = "0,0.0001,0.001,0.01,0.05,0.1")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("graph file not found: {}", .0.display())]
    MissingGraphFile(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Alist(#[from] alist::AlistError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Peel(#[from] PeelError),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    De(#[from] DeError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Reliability(#[from] ReliabilityError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::MissingGraphFile(_) => 3,
            _ => 1,
        }
    }
}

/// Parses arguments (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli)
}

/// Runs a parsed command and returns what it prints.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let params = match &cli.config {
        Some(path) => load_config(path)?,
        None => StorageSystemParams::reference_cluster(1.0),
    };
    let meta = Meta::new(cli, &params)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    pool.install(|| dispatch(cli, &params, &meta))
}

#[derive(Debug, Serialize)]
struct Meta {
    version: &'static str,
    seed: u64,
    config_hash: String,
}

impl Meta {
    fn new(cli: &Cli, params: &StorageSystemParams) -> Result<Self, CliError> {
        let text = format!("{:?}\n{}", cli.command, serde_json::to_string(params)?);
        let digest = Sha256::digest(text.as_bytes());
        let config_hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(Meta { version: env!("CARGO_PKG_VERSION"), seed: cli.seed, config_hash })
    }

    fn comment(&self) -> String {
        format!("# version={} seed={} config_hash={}\n", self.version, self.seed, self.config_hash)
    }
}

fn table<R: Serialize>(format: Format, header: &[&str], rows: &[R], meta: &Meta) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(header)?;
            for row in rows {
                w.serialize(row)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
            Ok(String::from_utf8_lossy(&bytes).into_owned() + &meta.comment())
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, R> {
                rows: &'a [R],
                meta: &'a Meta,
            }
            Ok(serde_json::to_string_pretty(&Doc { rows, meta })? + "\n")
        }
    }
}

fn object<T: Serialize, R: Serialize>(
    format: Format,
    value: &T,
    header: &[&str],
    rows: &[R],
    meta: &Meta,
) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        Format::Csv => table(format, header, rows, meta),
    }
}

fn read_graph(path: &Path) -> Result<FactorGraph, CliError> {
    if !path.exists() {
        return Err(CliError::MissingGraphFile(path.to_path_buf()));
    }
    Ok(alist::read(path)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Parses `coef:degree` pairs separated by commas.
fn parse_degree_list(which: &str, s: &str) -> Result<DegreeMap, ConfigError> {
    let bad = |item: &str| ConfigError::InvalidArgument(format!("{which}: expected coef:degree, got {item:?}"));
    let mut map = DegreeMap::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (c, d) = item.split_once(':').ok_or_else(|| bad(item))?;
        let c: f64 = c.trim().parse().map_err(|_| bad(item))?;
        let d: u32 = d.trim().parse().map_err(|_| bad(item))?;
        *map.entry(d).or_insert(0.0) += c;
    }
    if map.is_empty() {
        return Err(ConfigError::InvalidArgument(format!("{which}: empty degree list")));
    }
    // Printed coefficients are rounded; accept a small shortfall and rescale.
    let sum: f64 = map.values().sum();
    if (sum - 1.0).abs() > 1e-9 && (sum - 1.0).abs() <= 5e-3 {
        log::info!("{which} coefficients sum to {sum}; rescaling to 1");
        map.values_mut().for_each(|c| *c /= sum);
    }
    Ok(map)
}

fn profile_for(g: &FactorGraph, samples: u64, exact_upto: usize, seed: u64) -> Result<ToleranceProfile, CliError> {
    Ok(tolerance_profile(g, &ProfileConfig::new(samples, exact_upto, seed))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Computed,
    Reference,
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scheme: String,
    pub storage_overhead: f64,
    pub repair_bw_overhead: f64,
    pub mttdl_days: f64,
    pub source: Source,
    pub citation: String,
}

impl CompareRow {
    fn computed(r: &MttdlReport) -> Self {
        CompareRow {
            scheme: r.scheme.clone(),
            storage_overhead: r.storage_overhead,
            repair_bw_overhead: r.repair_bw_overhead,
            mttdl_days: r.normalized_days,
            source: Source::Computed,
            citation: String::new(),
        }
    }
}

/// A scheme named on the `compare` command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeSpec {
    Replication(usize),
    Rs { n: usize, k: usize },
    Ldpc(PathBuf),
}

pub fn parse_scheme(s: &str) -> Result<SchemeSpec, ConfigError> {
    let bad = || ConfigError::InvalidArgument(format!("unknown scheme {s:?}"));
    if let Some(path) = s.strip_prefix("ldpc:") {
        return Ok(SchemeSpec::Ldpc(PathBuf::from(path)));
    }
    if let Some(copies) = s.strip_prefix("replication") {
        let copies = copies.trim_start_matches([':', '_']).parse().map_err(|_| bad())?;
        if copies < 2 {
            return Err(bad());
        }
        return Ok(SchemeSpec::Replication(copies));
    }
    if let Some(rest) = s.strip_prefix("rs_") {
        let (n, k) = rest.split_once('_').ok_or_else(bad)?;
        let (n, k): (usize, usize) = (n.parse().map_err(|_| bad())?, k.parse().map_err(|_| bad())?);
        if k == 0 || k >= n {
            return Err(bad());
        }
        return Ok(SchemeSpec::Rs { n, k });
    }
    Err(bad())
}

const MTTDL_HEADER: &[&str] =
    &["scheme", "storage_overhead", "repair_bw_overhead", "mttdl_days", "stripe_mttdl_s", "s_star", "method"];

#[derive(Serialize)]
struct MttdlCsv<'a> {
    scheme: &'a str,
    storage_overhead: f64,
    repair_bw_overhead: f64,
    mttdl_days: f64,
    stripe_mttdl_s: f64,
    s_star: Option<usize>,
    method: crate::reliability::Method,
}

fn dispatch(cli: &Cli, params: &StorageSystemParams, meta: &Meta) -> Result<String, CliError> {
    let seed = cli.seed;
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Construct { n, m, dv, qc, out } => {
            let l = qc.unwrap_or(1);
            if l == 0 || n % l != 0 || m % l != 0 {
                return Err(ConfigError::InvalidArgument(format!("--qc {l} must divide n = {n} and m = {m}")).into());
            }
            let mut spec = ConstructionSpec::regular(n / l, m / l, *dv, seed);
            spec.circulant_size = qc.filter(|&l| l > 1);
            let g = peg_construct(&spec)?;
            let text = alist::to_string(&g);
            let Some(path) = out else {
                return Ok(text);
            };
            write_file(path, &text)?;
            #[derive(Serialize)]
            struct Summary {
                n: usize,
                m: usize,
                edges: usize,
                girth: String,
                repair_bandwidth: f64,
                cn_regular: bool,
            }
            let s = Summary {
                n: g.n(),
                m: g.m(),
                edges: g.edge_count(),
                girth: girth(&g).to_string(),
                repair_bandwidth: g.repair_bandwidth(),
                cn_regular: g.is_cn_regular(),
            };
            let header = ["n", "m", "edges", "girth", "repair_bandwidth", "cn_regular"];
            object(fmt(Format::Json), &s, &header, &[&s], meta)
        }
        Command::Profile { alist, samples, exact_upto, out } => {
            let g = read_graph(alist)?;
            let prof = profile_for(&g, *samples, *exact_upto, seed)?;
            let json = serde_json::to_string_pretty(&prof)? + "\n";
            if let Some(path) = out {
                write_file(path, &json)?;
            }
            #[derive(Serialize)]
            struct Level {
                level: usize,
                q: f64,
                p: Option<f64>,
                exact: bool,
            }
            let rows: Vec<Level> = (0..prof.q.len())
                .map(|i| Level { level: i, q: prof.q[i], p: prof.p.get(i).copied(), exact: prof.exact[i] })
                .collect();
            object(fmt(Format::Json), &prof, &["level", "q", "p", "exact"], &rows, meta)
        }
        Command::Threshold { lambda, rho } => {
            let dd = DegreeDistribution::new(parse_degree_list("lambda", lambda)?, parse_degree_list("rho", rho)?)?;
            let epsilon_star = decoding_threshold(&dd, &DeConfig::default())?;
            #[derive(Serialize)]
            struct Out {
                epsilon_star: f64,
                scaled: Option<f64>,
            }
            let o = Out { epsilon_star, scaled: scaled_threshold(&dd, epsilon_star) };
            object(fmt(Format::Json), &o, &["epsilon_star", "scaled"], &[&o], meta)
        }
        Command::Optimize { rate, dc, dmax, grid } => {
            let p = OptProblem { dmax: *dmax, grid_points: *grid, ..OptProblem::new(parse_rate(rate)?, *dc) };
            let r = optimize_threshold(&p)?;
            #[derive(Serialize)]
            struct Row {
                epsilon_star: f64,
                scaled: f64,
                dv: f64,
                lambda: String,
            }
            let lambda = r.lambda.iter().map(|(d, c)| format!("{c}:{d}")).collect::<Vec<_>>().join(" ");
            let row = Row { epsilon_star: r.epsilon_star, scaled: r.scaled, dv: r.dv, lambda };
            object(fmt(Format::Json), &r, &["epsilon_star", "scaled", "dv", "lambda"], &[row], meta)
        }
        Command::Tradeoff { rate, dc_min, dc_max, dmax, grid } => {
            let rate = parse_rate(rate)?;
            if dc_min > dc_max || *dc_min < 2 {
                return Err(ConfigError::InvalidArgument(format!("check degree range {dc_min}..={dc_max}")).into());
            }
            let template = OptProblem { dmax: *dmax, grid_points: *grid, ..OptProblem::new(rate, *dc_min) };
            #[derive(Serialize)]
            struct Row {
                dc: u32,
                gamma: u32,
                scaled_threshold: Option<f64>,
                dv: Option<f64>,
                status: RowStatus,
            }
            let rows: Vec<Row> = tradeoff_curve(rate, *dc_min..=*dc_max, &template)
                .into_iter()
                .map(|r| Row { dc: r.dc, gamma: r.gamma, scaled_threshold: r.scaled, dv: r.dv, status: r.status })
                .collect();
            table(fmt(Format::Csv), &["dc", "gamma", "scaled_threshold", "dv", "status"], &rows, meta)
        }
        Command::Mttdl { scheme, alist, n, k, profile, samples, exact_upto } => {
            let missing = |what: &str| ConfigError::InvalidArgument(format!("--scheme {scheme:?} needs {what}"));
            let report = match scheme {
                SchemeKind::Ldpc => {
                    let path = alist.as_ref().ok_or_else(|| missing("--alist"))?;
                    let g = read_graph(path)?;
                    let prof = match profile {
                        Some(p) => {
                            let text = std::fs::read_to_string(p)
                                .map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
                            serde_json::from_str(&text)?
                        }
                        None => profile_for(&g, *samples, *exact_upto, seed)?,
                    };
                    mttdl_for_graph(&g, &prof, params)?
                }
                SchemeKind::Rs => {
                    let (n, k) = (n.ok_or_else(|| missing("--n"))?, k.ok_or_else(|| missing("--k"))?);
                    mttdl_mds(n, k, params)?
                }
                SchemeKind::Replication => mttdl_replication(n.unwrap_or(3), params)?,
            };
            let row = MttdlCsv {
                scheme: &report.scheme,
                storage_overhead: report.storage_overhead,
                repair_bw_overhead: report.repair_bw_overhead,
                mttdl_days: report.normalized_days,
                stripe_mttdl_s: report.stripe_mttdl,
                s_star: report.s_star,
                method: report.method,
            };
            object(fmt(Format::Json), &report, MTTDL_HEADER, &[row], meta)
        }
        Command::Compare { schemes, reference, samples, exact_upto } => {
            let specs = schemes
                .iter()
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(parse_scheme)
                .collect::<Result<Vec<_>, _>>()?;
            let mut rows = Vec::with_capacity(specs.len());
            for spec in specs {
                let report = match spec {
                    SchemeSpec::Replication(r) => mttdl_replication(r, params)?,
                    SchemeSpec::Rs { n, k } => mttdl_mds(n, k, params)?,
                    SchemeSpec::Ldpc(path) => {
                        let g = read_graph(&path)?;
                        let prof = profile_for(&g, *samples, *exact_upto, seed)?;
                        mttdl_for_graph(&g, &prof, params)?
                    }
                };
                rows.push(CompareRow::computed(&report));
            }
            if *reference {
                rows.extend(reference_rows().into_iter().map(|r| CompareRow {
                    scheme: r.scheme.to_string(),
                    storage_overhead: r.storage_overhead,
                    repair_bw_overhead: r.repair_bw_overhead,
                    mttdl_days: r.mttdl_days,
                    source: Source::Reference,
                    citation: r.citation.to_string(),
                }));
            }
            let header = ["scheme", "storage_overhead", "repair_bw_overhead", "mttdl_days", "source", "citation"];
            table(fmt(Format::Csv), &header, &rows, meta)
        }
        Command::Lossprob { alist, p, trials } => {
            let g = read_graph(alist)?;
            #[derive(Serialize)]
            struct Row {
                p: f64,
                ldpc_loss: f64,
                ci_lo: f64,
                ci_hi: f64,
                rs_loss: f64,
                rep3_loss: f64,
            }
            let rows = p
                .iter()
                .map(|&pe| {
                    let est = data_loss_probability(&g, pe, *trials, seed)?;
                    Ok(Row {
                        p: pe,
                        ldpc_loss: est.estimate,
                        ci_lo: est.ci_lo,
                        ci_hi: est.ci_hi,
                        rs_loss: mds_loss_probability(15, 5, pe),
                        rep3_loss: mds_loss_probability(3, 2, pe),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let header = ["p", "ldpc_loss", "ci_lo", "ci_hi", "rs_loss", "rep3_loss"];
            table(fmt(Format::Csv), &header, &rows, meta)
        }
    }
}
