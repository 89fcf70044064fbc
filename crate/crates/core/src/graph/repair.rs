//! Single-failure repair accounting.

use num_rational::Ratio;
use serde::Serialize;

use super::{FactorGraph, GraphError};

/// One way to rebuild a failed block: read every other member of `check`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairOption {
    pub check: usize,
    pub download: Vec<usize>,
}

impl FactorGraph {
    /// Average repair bandwidth `sum_r d_r (d_r - 1) / E`, in blocks.
    pub fn repair_bandwidth(&self) -> f64 {
        let r = self.repair_bandwidth_exact();
        *r.numer() as f64 / *r.denom() as f64
    }

    /// [`FactorGraph::repair_bandwidth`] as an exact ratio.
    pub fn repair_bandwidth_exact(&self) -> Ratio<u64> {
        let total: u64 = self
            .cn_adj
            .iter()
            .map(|row| {
                let d = row.len() as u64;
                d * d.saturating_sub(1)
            })
            .sum();
        Ratio::new(total, self.edges as u64)
    }

    /// Blocks downloaded per failure when every VN is weighted equally and picks
    /// a check uniformly at random. Diagnostic only; differs from
    /// [`FactorGraph::repair_bandwidth`] on VN-irregular graphs.
    pub fn uniform_vn_repair_average(&self) -> f64 {
        let total: f64 = self
            .vn_adj
            .iter()
            .map(|cns| {
                let s: usize = cns.iter().map(|&r| self.cn_degree(r) - 1).sum();
                s as f64 / cns.len() as f64
            })
            .sum();
        total / self.n as f64
    }

    /// Every single-check repair option for `failed_vn`, in check order.
    pub fn repair_plan(&self, failed_vn: usize) -> Result<Vec<RepairOption>, GraphError> {
        if failed_vn >= self.n {
            return Err(GraphError::IndexOutOfRange { check: 0, index: failed_vn, n: self.n });
        }
        let cns = &self.vn_adj[failed_vn];
        if cns.is_empty() {
            return Err(GraphError::IsolatedNode(failed_vn));
        }
        Ok(cns
            .iter()
            .map(|&r| RepairOption {
                check: r,
                download: self.cn_adj[r].iter().copied().filter(|&u| u != failed_vn).collect(),
            })
            .collect())
    }
}

/// Outcome of the minimum-repair-bandwidth rate test.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MinRepairBandwidth {
    /// A `(dv_min, check_degree)`-regular code attains `gamma = check_degree - 1`.
    Feasible { gamma: u64, check_degree: u64 },
    /// `dv_min / (1 - R)` is fractional or not above `dv_min`.
    Infeasible { check_degree: f64 },
}

/// Smallest achievable repair bandwidth for rate `rate` when every VN has degree at least `dv_min`.
pub fn min_repair_bandwidth(
    rate: Ratio<u64>,
    dv_min: u32,
) -> Result<MinRepairBandwidth, GraphError> {
    if *rate.denom() == 0 || *rate.numer() == 0 || rate >= Ratio::from_integer(1) || dv_min == 0 {
        return Err(GraphError::InvalidRate(rate.to_string()));
    }
    // dv_min / (1 - p/q) = dv_min * q / (q - p)
    let (p, q) = (*rate.numer(), *rate.denom());
    let dc = Ratio::new(dv_min as u64 * q, q - p);
    if dc.is_integer() && dc.to_integer() > dv_min as u64 {
        let d = dc.to_integer();
        Ok(MinRepairBandwidth::Feasible { gamma: d - 1, check_degree: d })
    } else {
        Ok(MinRepairBandwidth::Infeasible {
            check_degree: *dc.numer() as f64 / *dc.denom() as f64,
        })
    }
}
