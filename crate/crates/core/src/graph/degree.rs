use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Degree -> coefficient.
pub type DegreeMap = BTreeMap<u32, f64>;

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("{which} coefficients sum to {sum}, expected 1")]
    NotNormalized { which: &'static str, sum: f64 },
    #[error("{which} coefficient for degree {degree} is {value}, outside [0, 1]")]
    CoefficientOutOfRange { which: &'static str, degree: u32, value: f64 },
    #[error("degree 0 is not a valid node degree")]
    ZeroDegree,
    #[error("sum of lambda_d / d is zero")]
    ZeroDenominator,
}

/// Edge-perspective degree distribution pair `(lambda, rho)`.
///
/// `lambda[d]` is the fraction of edges attached to degree-`d` variable nodes and
/// `rho[d]` the same for check nodes, so `lambda(x) = sum_d lambda_d x^(d-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    lambda: DegreeMap,
    rho: DegreeMap,
}

fn validate(which: &'static str, map: &DegreeMap) -> Result<(), DegreeError> {
    let mut sum = 0.0;
    for (&d, &c) in map {
        if d == 0 {
            return Err(DegreeError::ZeroDegree);
        }
        if !(0.0..=1.0).contains(&c) || c.is_nan() {
            return Err(DegreeError::CoefficientOutOfRange { which, degree: d, value: c });
        }
        sum += c;
    }
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(DegreeError::NotNormalized { which, sum });
    }
    Ok(())
}

fn integral(map: &DegreeMap) -> f64 {
    map.iter().map(|(&d, &c)| c / d as f64).sum()
}

fn eval(map: &DegreeMap, x: f64) -> f64 {
    map.iter().map(|(&d, &c)| c * x.powi(d as i32 - 1)).sum()
}

fn to_node(map: &DegreeMap) -> DegreeMap {
    let total = integral(map);
    map.iter().map(|(&d, &c)| (d, c / d as f64 / total)).collect()
}

fn to_edge(map: &DegreeMap) -> DegreeMap {
    let avg: f64 = map.iter().map(|(&d, &c)| d as f64 * c).sum();
    map.iter().map(|(&d, &c)| (d, d as f64 * c / avg)).collect()
}

impl DegreeDistribution {
    pub fn new(lambda: DegreeMap, rho: DegreeMap) -> Result<Self, DegreeError> {
        validate("lambda", &lambda)?;
        validate("rho", &rho)?;
        Ok(Self::from_parts_unchecked(lambda, rho))
    }

    pub(crate) fn from_parts_unchecked(mut lambda: DegreeMap, mut rho: DegreeMap) -> Self {
        lambda.retain(|_, c| *c != 0.0);
        rho.retain(|_, c| *c != 0.0);
        Self { lambda, rho }
    }

    /// `(dv, dc)`-regular ensemble: `lambda(x) = x^(dv-1)`, `rho(x) = x^(dc-1)`.
    pub fn regular(dv: u32, dc: u32) -> Result<Self, DegreeError> {
        Self::new(DegreeMap::from([(dv, 1.0)]), DegreeMap::from([(dc, 1.0)]))
    }

    /// Variable-irregular, check-regular ensemble.
    pub fn check_regular(lambda: DegreeMap, dc: u32) -> Result<Self, DegreeError> {
        Self::new(lambda, DegreeMap::from([(dc, 1.0)]))
    }

    /// Builds from node-perspective fractions `Lambda_d`, `P_d`.
    pub fn from_node_perspective(vn: &DegreeMap, cn: &DegreeMap) -> Result<Self, DegreeError> {
        validate("Lambda", vn)?;
        validate("P", cn)?;
        Self::new(to_edge(vn), to_edge(cn))
    }

    pub fn lambda(&self) -> &DegreeMap {
        &self.lambda
    }

    pub fn rho(&self) -> &DegreeMap {
        &self.rho
    }

    /// `lambda(x)`.
    pub fn lambda_at(&self, x: f64) -> f64 {
        eval(&self.lambda, x)
    }

    /// `rho(x)`.
    pub fn rho_at(&self, x: f64) -> f64 {
        eval(&self.rho, x)
    }

    /// `lambda'(0)`, i.e. the degree-2 edge fraction.
    pub fn lambda_slope_at_zero(&self) -> f64 {
        self.lambda.get(&2).copied().unwrap_or(0.0)
    }

    /// `rho'(1) = sum_d rho_d (d - 1)`.
    pub fn rho_slope_at_one(&self) -> f64 {
        self.rho.iter().map(|(&d, &c)| c * (d as f64 - 1.0)).sum()
    }

    /// `sum_d lambda_d / d`, the integral of `lambda` over `[0, 1]`.
    pub fn lambda_integral(&self) -> f64 {
        integral(&self.lambda)
    }

    pub fn rho_integral(&self) -> f64 {
        integral(&self.rho)
    }

    /// Node-perspective variable degree fractions `Lambda_d`.
    pub fn vn_node_perspective(&self) -> DegreeMap {
        to_node(&self.lambda)
    }

    /// Node-perspective check degree fractions `P_d`.
    pub fn cn_node_perspective(&self) -> DegreeMap {
        to_node(&self.rho)
    }

    /// Design rate `1 - (sum rho_d/d) / (sum lambda_d/d)`, assuming a full-rank parity-check matrix.
    pub fn design_rate(&self) -> Result<f64, DegreeError> {
        let l = self.lambda_integral();
        if l == 0.0 {
            return Err(DegreeError::ZeroDenominator);
        }
        Ok(1.0 - self.rho_integral() / l)
    }

    /// Average variable degree `1 / sum_d (lambda_d / d)`.
    pub fn average_vn_degree(&self) -> Result<f64, DegreeError> {
        let l = self.lambda_integral();
        if l == 0.0 {
            return Err(DegreeError::ZeroDenominator);
        }
        Ok(1.0 / l)
    }

    pub fn average_cn_degree(&self) -> Result<f64, DegreeError> {
        let r = self.rho_integral();
        if r == 0.0 {
            return Err(DegreeError::ZeroDenominator);
        }
        Ok(1.0 / r)
    }

    pub fn min_vn_degree(&self) -> Option<u32> {
        self.lambda.keys().next().copied()
    }
}
