//! Binomial confidence intervals and histograms.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Exact (Clopper-Pearson) two-sided interval for `n_viol` successes in
/// `n_tot` trials at level `alpha`.
pub fn clopper_pearson(n_viol: u64, n_tot: u64, alpha: f64) -> Result<(f64, f64)> {
    if n_tot == 0 || n_viol > n_tot {
        return Err(Error::InvalidConfig(format!(
            "binomial counts {n_viol} of {n_tot}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            low: 0.0,
            high: 1.0,
        });
    }
    let (x, n) = (n_viol as f64, n_tot as f64);
    let tail = alpha / 2.0;
    // P(X >= x; p) = I_p(x, n - x + 1) grows with p
    let low = if n_viol == 0 {
        0.0
    } else {
        bisect(|p| beta_reg(x, n - x + 1.0, p) - tail)
    };
    // P(X <= x; p) = 1 - I_p(x + 1, n - x) falls with p
    let high = if n_viol == n_tot {
        1.0
    } else {
        bisect(|p| tail - (1.0 - beta_reg(x + 1.0, n - x, p)))
    };
    Ok((low, high))
}

/// Root of an increasing function on `[0, 1]`.
fn bisect(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: u64,
    pub frequency: f64,
}

/// Contiguous half-open bins `[origin + n w, origin + (n + 1) w)` covering
/// the data, plus an overflow bin for capped values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    pub bins: Vec<Bin>,
    pub overflow: u64,
    pub total: u64,
}

pub fn histogram(values: &[f64], bin_width: f64, origin: f64) -> Result<Histogram> {
    histogram_with_overflow(values, 0, bin_width, origin)
}

/// As [`histogram`], with `overflow` additional values counted only in the
/// overflow bin.
pub fn histogram_with_overflow(values: &[f64], overflow: u64, bin_width: f64, origin: f64) -> Result<Histogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::OutOfRange {
            what: "bin width",
            value: bin_width,
            low: 0.0,
            high: f64::INFINITY,
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Precondition(format!("non-finite histogram value {v}")));
    }
    let total = values.len() as u64 + overflow;
    let index = |v: f64| ((v - origin) / bin_width).floor() as i64;
    let mut bins = Vec::new();
    if let (Some(first), Some(last)) = (
        values.iter().map(|&v| index(v)).min(),
        values.iter().map(|&v| index(v)).max(),
    ) {
        let mut counts = vec![0u64; (last - first + 1) as usize];
        for &v in values {
            counts[(index(v) - first) as usize] += 1;
        }
        bins = counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| {
                let n = first + i as i64;
                Bin {
                    low: origin + n as f64 * bin_width,
                    high: origin + (n + 1) as f64 * bin_width,
                    count,
                    frequency: count as f64 / total as f64,
                }
            })
            .collect();
    }
    Ok(Histogram {
        bin_width,
        origin,
        bins,
        overflow,
        total,
    })
}
