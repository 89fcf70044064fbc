//! System-level parameters and normalised MTTDL reports.

use serde::{Deserialize, Serialize};

use super::{mttdl_closed_form, mttdl_dominant, MarkovSpec, ReliabilityError};
use crate::graph::FactorGraph;
use crate::peeling::ToleranceProfile;

pub const DAY: f64 = 86_400.0;
pub const YEAR: f64 = 365.25 * DAY;

const UNITS: &str = "sizes in bytes, bandwidth in bit/s, times in s, 1 year = 365.25 d";

/// Storage cluster description. Sizes are bytes, bandwidth is bits per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSystemParams {
    pub total_data: f64,
    pub block_size: f64,
    pub disk_count: u64,
    pub disk_capacity: f64,
    pub node_bandwidth: f64,
    /// Failure detection and repair trigger delay, seconds.
    pub trigger_time: f64,
    /// Mean time to failure of one node, seconds.
    pub mttf: f64,
    /// Blocks downloaded per repaired block.
    pub bw_cost: f64,
}

impl StorageSystemParams {
    /// 40 PB over 2000 disks of 20 TB, 256 MB blocks, 1 Gbit/s links,
    /// 15 minute trigger delay and a one-year MTTF.
    pub fn reference_cluster(bw_cost: f64) -> Self {
        Self {
            total_data: 40e15,
            block_size: 256e6,
            disk_count: 2000,
            disk_capacity: 20e12,
            node_bandwidth: 1e9,
            trigger_time: 900.0,
            mttf: YEAR,
            bw_cost,
        }
    }

    pub fn with_bw_cost(&self, bw_cost: f64) -> Self {
        Self { bw_cost, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), ReliabilityError> {
        let fields = [
            ("C", self.total_data),
            ("B", self.block_size),
            ("S", self.disk_capacity),
            ("r_node", self.node_bandwidth),
            ("mttf", self.mttf),
            ("bw_cost", self.bw_cost),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ReliabilityError::InvalidParams(format!("{name} = {v}")));
            }
        }
        if !(self.trigger_time >= 0.0 && self.trigger_time.is_finite()) {
            return Err(ReliabilityError::InvalidParams(format!("T_t = {}", self.trigger_time)));
        }
        if self.disk_count < 2 {
            return Err(ReliabilityError::InvalidParams(format!("N_disk = {}", self.disk_count)));
        }
        Ok(())
    }

    pub fn fail_rate(&self) -> f64 {
        1.0 / self.mttf
    }

    /// Time to pull a failed disk's worth of repair traffic spread over the other disks.
    pub fn download_time(&self) -> f64 {
        self.disk_capacity * 8.0 * self.bw_cost
            / (self.node_bandwidth * (self.disk_count - 1) as f64)
    }

    /// Stripes needed to hold all data with `n`-block stripes.
    pub fn stripes(&self, n: usize) -> f64 {
        self.total_data / (n as f64 * self.block_size)
    }
}

/// `mu = 1 / (T_t + T_r)`.
pub fn repair_rate(params: &StorageSystemParams) -> f64 {
    1.0 / (params.trigger_time + params.download_time())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Dominant,
    CtmcOracle,
    Mds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MttdlReport {
    pub scheme: String,
    pub n: usize,
    pub m: usize,
    pub storage_overhead: f64,
    pub repair_bw_overhead: f64,
    /// Seconds.
    pub stripe_mttdl: f64,
    /// Seconds, divided by the stripe count.
    pub normalized_mttdl: f64,
    pub normalized_days: f64,
    pub stripes: f64,
    pub method: Method,
    pub s_star: Option<usize>,
    /// Normalised dominant-path estimate in days, when it applies.
    pub dominant_days: Option<f64>,
    /// Survival probabilities assumed zero because the profile ran out.
    pub padded_levels: usize,
    pub units: String,
}

/// Divides a stripe MTTDL by the number of stripes `C / (n B)`.
pub fn normalize_mttdl(
    stripe_mttdl: f64,
    params: &StorageSystemParams,
    n: usize,
    method: Method,
) -> Result<MttdlReport, ReliabilityError> {
    params.validate()?;
    let stripes = params.stripes(n);
    if stripes < 1.0 {
        return Err(ReliabilityError::InvalidParams(format!(
            "C = {} holds less than one stripe of {n} blocks",
            params.total_data
        )));
    }
    let normalized = stripe_mttdl / stripes;
    Ok(MttdlReport {
        scheme: String::new(),
        n,
        m: 0,
        storage_overhead: 0.0,
        repair_bw_overhead: params.bw_cost,
        stripe_mttdl,
        normalized_mttdl: normalized,
        normalized_days: normalized / DAY,
        stripes,
        method,
        s_star: None,
        dominant_days: None,
        padded_levels: 0,
        units: UNITS.to_string(),
    })
}

/// MTTDL of an `(n, k)` MDS code; repair reads `k` blocks.
pub fn mttdl_mds(n: usize, k: usize, base: &StorageSystemParams) -> Result<MttdlReport, ReliabilityError> {
    if k == 0 || k >= n {
        return Err(ReliabilityError::InvalidSpec(format!("(n, k) = ({n}, {k})")));
    }
    let params = base.with_bw_cost(k as f64);
    params.validate()?;
    let spec = MarkovSpec::mds(n, n - k, params.fail_rate(), repair_rate(&params));
    let stripe = mttdl_closed_form(&spec)?;
    let mut report = normalize_mttdl(stripe, &params, n, Method::Mds)?;
    report.scheme = format!("({n}, {k}) RS");
    report.m = n - k;
    report.storage_overhead = n as f64 / k as f64;
    report.s_star = Some(n - k + 1);
    Ok(report)
}

/// MTTDL of `copies`-way replication; repair reads one block.
pub fn mttdl_replication(copies: usize, base: &StorageSystemParams) -> Result<MttdlReport, ReliabilityError> {
    if copies < 2 {
        return Err(ReliabilityError::InvalidSpec(format!("{copies} copies")));
    }
    let params = base.with_bw_cost(1.0);
    params.validate()?;
    let spec = MarkovSpec::mds(copies, copies - 1, params.fail_rate(), repair_rate(&params));
    let stripe = mttdl_closed_form(&spec)?;
    let mut report = normalize_mttdl(stripe, &params, copies, Method::Mds)?;
    report.scheme = format!("{copies}-replication");
    report.m = copies - 1;
    report.storage_overhead = copies as f64;
    report.s_star = Some(copies);
    Ok(report)
}

/// MTTDL of an LDPC code from its measured tolerance profile.
///
/// The repair cost is the graph's repair bandwidth. Missing survival
/// probabilities past a truncated profile are taken as zero.
pub fn mttdl_for_graph(
    g: &FactorGraph,
    profile: &ToleranceProfile,
    base: &StorageSystemParams,
) -> Result<MttdlReport, ReliabilityError> {
    if profile.n != g.n() || profile.m != g.m() {
        return Err(ReliabilityError::InvalidSpec(format!(
            "profile is for ({}, {}), graph is ({}, {})",
            profile.n,
            profile.m,
            g.n(),
            g.m()
        )));
    }
    let (n, m) = (g.n(), g.m());
    let params = base.with_bw_cost(g.repair_bandwidth());
    params.validate()?;
    let mut p = profile.p.clone();
    p.truncate(m);
    let padded = m - p.len();
    if padded > 0 {
        log::warn!("tolerance profile covers {} of {m} levels; padding with p = 0", p.len());
        p.resize(m, 0.0);
    }
    let spec = MarkovSpec { n, m, fail_rate: params.fail_rate(), repair_rate: repair_rate(&params), p };
    let stripe = mttdl_closed_form(&spec)?;
    let mut report = normalize_mttdl(stripe, &params, n, Method::ClosedForm)?;
    let s_star = spec.p.iter().position(|&x| x < 1.0).map_or(m + 1, |i| i + 1);
    report.dominant_days =
        mttdl_dominant(&spec, s_star).ok().map(|d| d / report.stripes / DAY);
    report.scheme = format!("({n}, {}) LDPC", n - m);
    report.m = m;
    report.storage_overhead = n as f64 / (n - m) as f64;
    report.s_star = Some(s_star);
    report.padded_levels = padded;
    Ok(report)
}

/// Published figures for schemes whose Markov models are not reproduced here.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub scheme: &'static str,
    pub storage_overhead: f64,
    pub repair_bw_overhead: f64,
    pub mttdl_days: f64,
    pub citation: &'static str,
}

pub fn reference_rows() -> Vec<ReferenceRow> {
    vec![
        ReferenceRow {
            scheme: "(10, 6, 5) Xorbas LRC",
            storage_overhead: 1.6,
            repair_bw_overhead: 5.0,
            mttdl_days: 7.38e7,
            citation: "Sathiamoorthy et al., XORing Elephants, VLDB 2013",
        },
        ReferenceRow {
            scheme: "(15, 10, 6) Binary LRC",
            storage_overhead: 1.5,
            repair_bw_overhead: 6.0,
            mttdl_days: 3.00e4,
            citation: "Shahabinejad et al., binary locally repairable codes",
        },
    ]
}
