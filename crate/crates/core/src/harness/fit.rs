//! Least-squares power-law fits in log-log coordinates.

use crate::error::{Error, Result};

pub const MIN_RUNGS: usize = 4;

/// `log y ≈ α log x + c`, fitted by ordinary least squares.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub pairs: Vec<(f64, f64)>,
    pub alpha: f64,
    pub log_constant: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

impl ExponentFit {
    /// `e^c`, the prefactor of the fitted law.
    pub fn prefactor(&self) -> f64 {
        self.log_constant.exp()
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.alpha * x.ln() + self.log_constant).exp()
    }
}

pub fn fit_decay_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < MIN_RUNGS {
        return Err(Error::DegenerateFit(format!(
            "{} rungs, at least {MIN_RUNGS} needed",
            pairs.len()
        )));
    }
    if let Some(&(x, y)) = pairs
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::DegenerateFit(format!(
            "non-positive pair ({x}, {y})"
        )));
    }
    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let log_constant = my - alpha * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - alpha * p.0 - log_constant).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ExponentFit {
        pairs: pairs.to_vec(),
        alpha,
        log_constant,
        residual,
    })
}
