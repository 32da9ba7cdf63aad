//! Published violation probabilities and the interval-overlap comparison
//! used for reduced-sample replications.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimateSummary, Mode, TrialConfig};
use crate::polytope::Search;

/// Published interval endpoints are rounded; they are widened by this many
/// percentage points before comparison.
pub const ROUNDING_SLACK_PP: f64 = 0.01;

/// Half-width in percentage points used where no interval is published.
pub const VALUE_ONLY_HALF_WIDTH_PP: f64 = 0.5;

/// One published estimate, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub d: usize,
    pub mu: usize,
    pub nu: usize,
    pub mode: Mode,
    pub n_tot: u64,
    pub percent: f64,
    pub ci: Option<(f64, f64)>,
}

impl GoldenEntry {
    /// Reference interval as fractions.
    pub fn interval(&self) -> (f64, f64) {
        let (lo, hi) = match self.ci {
            Some((lo, hi)) => (lo - ROUNDING_SLACK_PP, hi + ROUNDING_SLACK_PP),
            None => (self.percent - VALUE_ONLY_HALF_WIDTH_PP, self.percent + VALUE_ONLY_HALF_WIDTH_PP),
        };
        (lo.max(0.0) / 100.0, hi.min(100.0) / 100.0)
    }

    /// Whether `[low, high]` meets the reference interval.
    pub fn overlaps(&self, low: f64, high: f64) -> bool {
        let (lo, hi) = self.interval();
        low <= hi && lo <= high
    }

    pub fn config(&self, n_tot: u64, master_seed: u64) -> TrialConfig {
        TrialConfig::new(self.d, self.mu, self.nu, n_tot, self.mode, master_seed).with_search(Search::Decision)
    }
}

const fn e(d: usize, mu: usize, nu: usize, mode: Mode, n_tot: u64, percent: f64, lo: f64, hi: f64) -> GoldenEntry {
    GoldenEntry {
        d,
        mu,
        nu,
        mode,
        n_tot,
        percent,
        ci: Some((lo, hi)),
    }
}

const fn v(d: usize, mu: usize, nu: usize, n_tot: u64, percent: f64) -> GoldenEntry {
    GoldenEntry {
        d,
        mu,
        nu,
        mode: Mode::Lp2,
        n_tot,
        percent,
        ci: None,
    }
}

use Mode::{Cglmp as C, Lp2 as L};

pub const QUBIT: &[GoldenEntry] = &[v(2, 2, 2, 100_000, 41.3), v(2, 2, 3, 10_000, 90.8), v(2, 3, 3, 10_000, 100.0)];

pub const QUTRIT: &[GoldenEntry] = &[
    e(3, 2, 2, C, 1_000_000, 7.67, 7.61, 7.72),
    e(3, 2, 2, L, 1_000_000, 32.056, 31.96, 32.15),
    e(3, 3, 3, C, 1_000_000, 47.01, 46.91, 47.10),
    e(3, 3, 3, L, 1_000_000, 98.389, 98.36, 98.41),
    e(3, 4, 4, C, 1_000_000, 68.24, 68.15, 68.33),
    e(3, 4, 4, L, 1_000_000, 99.999, 99.9983, 99.9996),
    e(3, 2, 3, C, 1_000_000, 21.63, 21.55, 21.71),
    e(3, 2, 3, L, 100_000, 71.08, 70.8, 71.36),
    e(3, 2, 4, C, 1_000_000, 40.55, 40.45, 40.65),
    e(3, 2, 4, L, 100_000, 97.7, 97.61, 97.79),
    e(3, 3, 4, C, 1_000_000, 60.98, 60.89, 61.08),
    e(3, 3, 4, L, 100_000, 99.999, 99.994, 100.0),
];

pub const QUQUART: &[GoldenEntry] = &[
    e(4, 2, 2, C, 20_000, 0.29, 0.22, 0.38),
    e(4, 2, 2, L, 100_000, 14.74, 14.52, 14.96),
    e(4, 3, 3, C, 10_000, 2.25, 1.97, 2.56),
    e(4, 3, 3, L, 100_000, 76.39, 76.13, 76.65),
    e(4, 4, 4, C, 10_000, 7.15, 6.65, 7.67),
    e(4, 4, 4, L, 100_000, 99.87, 99.84, 99.89),
    e(4, 5, 5, C, 10_000, 12.92, 12.27, 13.59),
    e(4, 5, 5, L, 5_000_000, 100.0, 99.99989, 100.0),
    e(4, 2, 3, C, 10_000, 0.79, 0.63, 0.98),
    e(4, 2, 3, L, 10_000, 37.11, 36.16, 38.06),
    e(4, 2, 4, C, 10_000, 1.65, 1.41, 1.92),
    e(4, 2, 4, L, 10_000, 62.31, 61.35, 63.26),
    e(4, 2, 5, C, 10_000, 2.80, 2.49, 3.14),
    e(4, 2, 5, L, 10_000, 83.74, 83.0, 84.46),
    e(4, 3, 4, C, 10_000, 3.82, 3.45, 4.21),
    e(4, 3, 4, L, 10_000, 95.57, 95.15, 95.96),
    e(4, 3, 5, C, 10_000, 6.28, 5.81, 6.77),
    e(4, 3, 5, L, 10_000, 99.62, 99.48, 99.73),
    e(4, 4, 5, C, 10_000, 10.27, 9.68, 10.88),
    e(4, 4, 5, L, 10_000, 99.99, 99.944, 99.9997),
];

pub const QUQUINT: &[GoldenEntry] = &[
    e(5, 2, 2, L, 10_000, 3.08, 2.75, 3.44),
    e(5, 3, 3, L, 10_000, 23.28, 22.45, 24.12),
    e(5, 4, 4, L, 10_000, 64.84, 63.9, 65.77),
    e(5, 5, 5, L, 10_000, 94.00, 93.52, 94.46),
    e(5, 6, 6, L, 10_000, 99.84, 99.74, 99.91),
    e(5, 2, 3, L, 10_000, 8.38, 7.84, 8.94),
    e(5, 2, 4, L, 10_000, 15.33, 14.63, 16.05),
    e(5, 2, 5, L, 10_000, 25.49, 24.64, 26.36),
    e(5, 2, 6, L, 10_000, 35.91, 34.97, 36.86),
    e(5, 3, 4, L, 10_000, 40.81, 39.85, 41.78),
    e(5, 3, 5, L, 10_000, 57.93, 56.96, 58.9),
    e(5, 3, 6, L, 10_000, 73.7, 72.83, 74.56),
    e(5, 4, 5, L, 10_000, 82.46, 81.7, 83.2),
    e(5, 4, 6, L, 10_000, 92.39, 91.85, 92.9),
    e(5, 5, 6, L, 10_000, 98.58, 98.33, 98.8),
];

pub const D6: &[GoldenEntry] = &[
    e(6, 2, 2, L, 10_000, 0.28, 0.19, 0.4),
    e(6, 3, 3, L, 10_000, 2.77, 2.46, 3.11),
    e(6, 2, 3, L, 10_000, 1.01, 0.82, 1.23),
];

pub const D7: &[GoldenEntry] = &[
    e(7, 2, 2, L, 10_000, 0.01, 0.00025, 0.0557),
    e(7, 3, 3, L, 10_000, 0.15, 0.084, 0.247),
    e(7, 4, 4, L, 10_000, 0.64, 0.49, 0.82),
    e(7, 5, 5, L, 10_000, 2.07, 1.80, 2.37),
    e(7, 6, 6, L, 10_000, 4.87, 4.46, 5.31),
    e(7, 7, 7, L, 10_000, 9.14, 8.58, 9.72),
    e(7, 8, 8, L, 10_000, 15.5, 14.80, 16.22),
];

/// Two-setting and three-setting minimum visibilities of the published
/// local ququint instances, in the published order.
pub const QUQUINT_LOCAL_INSTANCES: &[(f64, f64)] = &[
    (1.00002, 0.97848),
    (1.00008, 0.97707),
    (1.00011, 0.95696),
    (1.00019, 0.95161),
    (1.00031, 0.94172),
    (1.00062, 0.97782),
    (1.00069, 0.96014),
    (1.00071, 0.96421),
    (1.00073, 0.96287),
    (1.00086, 0.94129),
    (1.00088, 0.95822),
    (1.00092, 0.96384),
    (1.00127, 0.97256),
    (1.00165, 0.96569),
    (1.00199, 0.95567),
    (1.00357, 0.96540),
];

pub const TABLE_NAMES: &[&str] = &["qubit", "qutrit", "ququart", "ququint", "d6", "d7"];

pub fn table(name: &str) -> Result<&'static [GoldenEntry]> {
    Ok(match name {
        "qubit" => QUBIT,
        "qutrit" => QUTRIT,
        "ququart" => QUQUART,
        "ququint" => QUQUINT,
        "d6" => D6,
        "d7" => D7,
        _ => {
            return Err(Error::InvalidConfig(format!(
                "unknown table '{name}' (expected one of {})",
                TABLE_NAMES.join(", ")
            )))
        }
    })
}

/// Replication of one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub entry: GoldenEntry,
    pub summary: EstimateSummary,
    pub overlap: bool,
}

pub fn check_entry(entry: &GoldenEntry, config: &TrialConfig) -> Result<EntryCheck> {
    let summary = estimate(config)?.summary;
    Ok(EntryCheck {
        entry: *entry,
        overlap: entry.overlaps(summary.ci_low, summary.ci_high),
        summary,
    })
}

/// Replicates every entry of a table at `n_tot` trials from one seed.
pub fn verify_table(name: &str, n_tot: u64, master_seed: u64, collapse_seed_stream: bool) -> Result<Vec<EntryCheck>> {
    table(name)?
        .iter()
        .map(|entry| {
            let mut config = entry.config(n_tot, master_seed);
            config.collapse_seed_stream = collapse_seed_stream;
            check_entry(entry, &config)
        })
        .collect()
}
