//! Seeded Monte Carlo campaigns: per-trial violation tests, aggregation and
//! confidence intervals.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{all_pair_indices, correlation_unchecked, extract_two_setting, white_noise, Correlation, PairIndex};
use crate::error::{Error, Result};
use crate::inequality::{cglmp, max_over_family_unchecked, relabelings, InequalityFamily};
use crate::mub::{rotate_prefix, standard_mubs, MubSet};
use crate::polytope::{
    min_visibility_over_pairs_with, min_visibility_over_subsets, Search, SelectionVisibility, DEFAULT_CAP,
    VIOLATION_TOL,
};
use crate::quantum::{
    max_entangled_state, partial_qutrit_state, sample_haar_unitary, splitmix64, SchmidtState, Stream, TrialSeed,
};
use crate::stats::{clopper_pearson, histogram_with_overflow, Histogram};

/// A CGLMP value above `local_bound + CGLMP_TOL` counts as a violation.
pub const CGLMP_TOL: f64 = 1e-9;

/// Largest fraction of trials allowed to end in an LP failure.
pub const LP_FAILURE_BUDGET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StateSpec {
    MaxEntangled,
    /// The partially entangled qutrit `|alpha, beta>`.
    Partial { alpha: f64, beta: f64 },
}

impl StateSpec {
    pub fn state(&self, d: usize) -> Result<SchmidtState> {
        match *self {
            StateSpec::MaxEntangled => max_entangled_state(d),
            StateSpec::Partial { alpha, beta } => {
                if d != 3 {
                    return Err(Error::InvalidConfig(format!("partial states need d = 3 (got {d})")));
                }
                partial_qutrit_state(alpha, beta)
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::MaxEntangled => write!(f, "mes"),
            StateSpec::Partial { alpha, beta } => write!(f, "partial:{alpha},{beta}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mes" {
            return Ok(StateSpec::MaxEntangled);
        }
        let bad = || Error::Parse(format!("state '{s}': expected mes or partial:ALPHA,BETA"));
        let rest = s.strip_prefix("partial:").ok_or_else(bad)?;
        let (a, b) = rest.split_once(',').ok_or_else(bad)?;
        Ok(StateSpec::Partial {
            alpha: a.trim().parse().map_err(|_| bad())?,
            beta: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl From<StateSpec> for String {
    fn from(s: StateSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for StateSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// How each trial is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Mode {
    /// CGLMP relabelings on every extracted pair.
    Cglmp,
    /// Visibility against the two-setting-lifted polytope.
    Lp2,
    /// Minimum visibility over all `(m, m; d)` sub-scenarios.
    LpFull(usize),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Cglmp => write!(f, "cglmp"),
            Mode::Lp2 => write!(f, "lp2"),
            Mode::LpFull(m) => write!(f, "lpfull:{m}"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cglmp" => Ok(Mode::Cglmp),
            "lp2" => Ok(Mode::Lp2),
            _ => s
                .strip_prefix("lpfull:")
                .and_then(|m| m.parse().ok())
                .map(Mode::LpFull)
                .ok_or_else(|| Error::Parse(format!("mode '{s}': expected cglmp, lp2 or lpfull:M"))),
        }
    }
}

impl From<Mode> for String {
    fn from(m: Mode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Mode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_bin() -> f64 {
    2.5e-3
}

fn default_search() -> Search {
    Search::Exact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub d: usize,
    pub state: StateSpec,
    pub mu: usize,
    pub nu: usize,
    pub n_tot: u64,
    pub mode: Mode,
    pub master_seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha_level: f64,
    #[serde(default = "default_bin")]
    pub histogram_bin: f64,
    /// `Decision` skips the exact minimum once a trial is settled; recorded
    /// visibilities of local trials are then reported as 1.
    #[serde(default = "default_search")]
    pub search: Search,
    /// Test hook: every trial reuses the seed of trial 0.
    #[doc(hidden)]
    #[serde(skip)]
    pub collapse_seed_stream: bool,
}

impl TrialConfig {
    /// Maximally entangled state, level 0.05, exact visibilities.
    pub fn new(d: usize, mu: usize, nu: usize, n_tot: u64, mode: Mode, master_seed: u64) -> Self {
        Self {
            d,
            state: StateSpec::MaxEntangled,
            mu,
            nu,
            n_tot,
            mode,
            master_seed,
            alpha_level: default_alpha(),
            histogram_bin: default_bin(),
            search: default_search(),
            collapse_seed_stream: false,
        }
    }

    pub fn with_search(mut self, search: Search) -> Self {
        self.search = search;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        let available = cached_mubs(self.d)?.len();
        if self.mu < 1 || self.nu < 1 || self.mu > available || self.nu > available {
            return fail(format!(
                "mu = {}, nu = {} must lie in 1..={available} for d = {}",
                self.mu, self.nu, self.d
            ));
        }
        if self.n_tot < 1 {
            return fail("n_tot must be at least 1".into());
        }
        if !(self.alpha_level > 0.0 && self.alpha_level < 1.0) {
            return fail(format!("alpha level {} outside (0, 1)", self.alpha_level));
        }
        if !(self.histogram_bin > 0.0 && self.histogram_bin.is_finite()) {
            return fail(format!("histogram bin {} must be positive", self.histogram_bin));
        }
        self.state.state(self.d)?;
        match self.mode {
            Mode::Cglmp | Mode::Lp2 if self.mu < 2 || self.nu < 2 => {
                fail(format!("mode {} needs mu, nu >= 2", self.mode))
            }
            Mode::LpFull(m) if m < 2 || m > self.mu.min(self.nu) => {
                fail(format!("lpfull:{m} needs 2 <= m <= min(mu, nu)"))
            }
            Mode::Cglmp => cglmp_family(self.d).map(|_| ()),
            _ => Ok(()),
        }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub violated: bool,
    /// Minimum visibility over the tested selections (LP modes).
    pub min_visibility: Option<f64>,
    pub cap_hit: bool,
    /// Largest CGLMP value over pairs and relabelings (CGLMP mode).
    pub max_cglmp: Option<f64>,
    /// Selection attaining the extreme value, when it is a pair.
    pub argmax: Option<PairIndex>,
    pub lp_failure: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    trial_index: u64,
    violated: bool,
    min_visibility: Option<f64>,
    cap_hit: bool,
    max_cglmp: Option<f64>,
    argmax_x1: Option<usize>,
    argmax_x2: Option<usize>,
    argmax_y1: Option<usize>,
    argmax_y2: Option<usize>,
    lp_failure: bool,
}

impl From<&TrialRecord> for RecordRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            trial_index: r.trial_index,
            violated: r.violated,
            min_visibility: r.min_visibility,
            cap_hit: r.cap_hit,
            max_cglmp: r.max_cglmp,
            argmax_x1: r.argmax.map(|p| p.x1),
            argmax_x2: r.argmax.map(|p| p.x2),
            argmax_y1: r.argmax.map(|p| p.y1),
            argmax_y2: r.argmax.map(|p| p.y2),
            lp_failure: r.lp_failure,
        }
    }
}

impl TryFrom<RecordRow> for TrialRecord {
    type Error = Error;

    fn try_from(r: RecordRow) -> Result<Self> {
        let argmax = match (r.argmax_x1, r.argmax_x2, r.argmax_y1, r.argmax_y2) {
            (Some(x1), Some(x2), Some(y1), Some(y2)) => Some(PairIndex::new(x1, x2, y1, y2)?),
            (None, None, None, None) => None,
            _ => return Err(Error::Parse(format!("partial argmax in trial {}", r.trial_index))),
        };
        Ok(Self {
            trial_index: r.trial_index,
            violated: r.violated,
            min_visibility: r.min_visibility,
            cap_hit: r.cap_hit,
            max_cglmp: r.max_cglmp,
            argmax,
            lp_failure: r.lp_failure,
        })
    }
}

pub fn write_records_csv<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(RecordRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(reader)
        .deserialize::<RecordRow>()
        .map(|row| TrialRecord::try_from(row?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub config: TrialConfig,
    pub n_viol: u64,
    /// Trials that completed; LP failures are excluded.
    pub n_tot: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub lp_failures: u64,
    pub wall_time_s: f64,
}

impl EstimateSummary {
    pub fn from_records(config: &TrialConfig, records: &[TrialRecord], wall_time_s: f64) -> Result<Self> {
        let lp_failures = records.iter().filter(|r| r.lp_failure).count() as u64;
        let n_tot = records.len() as u64 - lp_failures;
        let n_viol = records.iter().filter(|r| !r.lp_failure && r.violated).count() as u64;
        let (ci_low, ci_high) = clopper_pearson(n_viol, n_tot, config.alpha_level)?;
        Ok(Self {
            config: config.clone(),
            n_viol,
            n_tot,
            fraction: n_viol as f64 / n_tot as f64,
            ci_low,
            ci_high,
            lp_failures,
            wall_time_s,
        })
    }

    pub fn failure_budget_exceeded(&self) -> bool {
        self.lp_failures as f64 > LP_FAILURE_BUDGET * (self.n_tot + self.lp_failures) as f64
    }
}

/// Shared per-configuration state of a campaign.
struct Engine {
    d: usize,
    mu: usize,
    nu: usize,
    mode: Mode,
    search: Search,
    master_seed: u64,
    collapse: bool,
    state: SchmidtState,
    mubs: Arc<MubSet>,
    family: Option<Arc<InequalityFamily>>,
}

impl Engine {
    fn new(config: &TrialConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            d: config.d,
            mu: config.mu,
            nu: config.nu,
            mode: config.mode,
            search: config.search,
            master_seed: config.master_seed,
            collapse: config.collapse_seed_stream,
            state: config.state.state(config.d)?,
            mubs: cached_mubs(config.d)?,
            family: match config.mode {
                Mode::Cglmp => Some(cglmp_family(config.d)?),
                _ => None,
            },
        })
    }

    fn correlation(&self, trial_index: u64) -> Result<Correlation> {
        let seed = TrialSeed {
            master_seed: self.master_seed,
            trial_index: if self.collapse { 0 } else { trial_index },
        };
        let ua = sample_haar_unitary(self.d, seed, Stream::Alice)?;
        let ub = sample_haar_unitary(self.d, seed, Stream::Bob)?;
        let alice = rotate_prefix(&self.mubs, &ua, self.mu);
        let bob = rotate_prefix(&self.mubs, &ub, self.nu);
        Ok(correlation_unchecked(&self.state, &alice, &bob))
    }

    fn run(&self, trial_index: u64) -> Result<TrialRecord> {
        let p = self.correlation(trial_index)?;
        let mut rec = TrialRecord {
            trial_index,
            violated: false,
            min_visibility: None,
            cap_hit: false,
            max_cglmp: None,
            argmax: None,
            lp_failure: false,
        };
        if let Some(family) = &self.family {
            let mut best = (f64::NEG_INFINITY, None);
            for idx in all_pair_indices(self.mu, self.nu)? {
                let (v, _) = max_over_family_unchecked(family, &extract_two_setting(&p, idx)?);
                if v > best.0 {
                    best = (v, Some(idx));
                }
            }
            rec.violated = best.0 > family.members()[0].local_bound() + CGLMP_TOL;
            rec.max_cglmp = Some(best.0);
            rec.argmax = best.1;
            return Ok(rec);
        }
        let found = match self.mode {
            Mode::LpFull(m) => min_visibility_over_subsets(&p, m, DEFAULT_CAP, self.search),
            _ => min_visibility_over_pairs_with(&p, DEFAULT_CAP, self.search),
        };
        match found {
            Ok(sel) => fill_visibility(&mut rec, &sel),
            Err(Error::Lp(_)) => rec.lp_failure = true,
            Err(e) => return Err(e),
        }
        Ok(rec)
    }
}

fn fill_visibility(rec: &mut TrialRecord, sel: &SelectionVisibility) {
    rec.min_visibility = Some(sel.result.vstar);
    rec.cap_hit = sel.result.cap_hit;
    rec.violated = sel.result.vstar < 1.0 - VIOLATION_TOL;
    rec.argmax = sel.pair();
}

fn cached_mubs(d: usize) -> Result<Arc<MubSet>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MubSet>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().expect("mub cache").get(&d) {
        return Ok(m.clone());
    }
    let built = Arc::new(standard_mubs(d)?);
    Ok(cache.lock().expect("mub cache").entry(d).or_insert(built).clone())
}

fn cglmp_family(k: usize) -> Result<Arc<InequalityFamily>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<InequalityFamily>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().expect("family cache").get(&k) {
        return Ok(f.clone());
    }
    let built = Arc::new(relabelings(&cglmp(k)?)?);
    Ok(cache.lock().expect("family cache").entry(k).or_insert(built).clone())
}

/// The correlation sampled for a trial.
pub fn trial_correlation(config: &TrialConfig, trial_index: u64) -> Result<Correlation> {
    Engine::new(config)?.correlation(trial_index)
}

/// One trial, fully determined by the configuration and the index.
pub fn run_trial(config: &TrialConfig, trial_index: u64) -> Result<TrialRecord> {
    Engine::new(config)?.run(trial_index)
}

/// Output of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub summary: EstimateSummary,
    /// One record per trial in index order.
    pub records: Vec<TrialRecord>,
}

impl Estimate {
    /// Visibility histogram (LP modes) or CGLMP visibility histogram;
    /// capped values go to the overflow bin.
    pub fn histogram(&self) -> Result<Histogram> {
        let config = &self.summary.config;
        let mut values = Vec::new();
        let mut overflow = 0;
        if config.mode == Mode::Cglmp {
            let k = config.d;
            let fam = cglmp_family(k)?;
            let ineq = &fam.members()[0];
            let iw = ineq.evaluate(&white_noise(2, 2, k))?;
            let il = ineq.local_bound();
            for v in self.records.iter().filter_map(|r| r.max_cglmp) {
                let vis = (il - iw) / (v - iw);
                if v <= iw || vis >= DEFAULT_CAP {
                    overflow += 1;
                } else {
                    values.push(vis);
                }
            }
        } else {
            for r in self.records.iter().filter(|r| !r.lp_failure) {
                match r.min_visibility {
                    Some(_) if r.cap_hit => overflow += 1,
                    Some(v) => values.push(v),
                    None => {}
                }
            }
        }
        histogram_with_overflow(&values, overflow, config.histogram_bin, 0.0)
    }
}

/// Runs all trials in parallel on the current rayon pool; results do not
/// depend on the number of workers.
pub fn estimate(config: &TrialConfig) -> Result<Estimate> {
    let start = Instant::now();
    let engine = Engine::new(config)?;
    let records = (0..config.n_tot)
        .into_par_iter()
        .map(|i| engine.run(i))
        .collect::<Result<Vec<_>>>()?;
    let summary = EstimateSummary::from_records(config, &records, start.elapsed().as_secs_f64())?;
    Ok(Estimate { summary, records })
}

/// Correlations of the first `limit` local trials, regenerated from their
/// seeds.
pub fn nonviolating_instances(
    config: &TrialConfig,
    records: &[TrialRecord],
    limit: usize,
) -> Result<Vec<(u64, Correlation)>> {
    let engine = Engine::new(config)?;
    records
        .iter()
        .filter(|r| !r.violated && !r.lp_failure)
        .take(limit)
        .map(|r| Ok((r.trial_index, engine.correlation(r.trial_index)?)))
        .collect()
}

/// A local trial found by [`find_nonviolating`].
#[derive(Debug, Clone, PartialEq)]
pub struct RareInstance {
    pub trial_index: u64,
    pub correlation: Correlation,
    /// Exact minimum visibility over the configuration's selections.
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RareEventSearch {
    pub trials_run: u64,
    pub instances: Vec<RareInstance>,
}

/// Runs trials in chunks until `wanted` local trials are found or
/// `max_trials` are spent.
pub fn find_nonviolating(config: &TrialConfig, wanted: usize, max_trials: u64, chunk: u64) -> Result<RareEventSearch> {
    if config.mode == Mode::Cglmp {
        return Err(Error::InvalidConfig("rare-event search needs an LP mode".into()));
    }
    let decision = TrialConfig {
        search: Search::Decision,
        ..config.clone()
    };
    let engine = Engine::new(&decision)?;
    let chunk = chunk.max(1);
    let mut found = Vec::new();
    let mut next = 0;
    while found.len() < wanted && next < max_trials {
        let end = (next + chunk).min(max_trials);
        let local: Vec<u64> = (next..end)
            .into_par_iter()
            .map(|i| engine.run(i))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|r| !r.violated && !r.lp_failure)
            .map(|r| r.trial_index)
            .collect();
        found.extend(local);
        next = end;
    }
    found.truncate(wanted);
    let instances = found
        .into_iter()
        .map(|i| {
            let p = engine.correlation(i)?;
            let sel = match config.mode {
                Mode::LpFull(m) => min_visibility_over_subsets(&p, m, DEFAULT_CAP, Search::Exact)?,
                _ => min_visibility_over_pairs_with(&p, DEFAULT_CAP, Search::Exact)?,
            };
            Ok(RareInstance {
                trial_index: i,
                correlation: p,
                visibility: sel.result.vstar,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RareEventSearch {
        trials_run: next,
        instances,
    })
}

/// One cell of the partially entangled qutrit scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
    pub beta: f64,
    pub summary: EstimateSummary,
}

/// Seed of grid cell `(i, j)`.
pub fn cell_seed(master_seed: u64, i: usize, j: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ i as u64) ^ j as u64)
}

/// Estimates on the `points x points` grid `alpha_i = i/(points-1) alpha_max`,
/// `beta_j = j/(points-1) pi/4`, with `base.n_tot` trials per cell.
pub fn grid_scan(base: &TrialConfig, points: usize) -> Result<Vec<GridCell>> {
    if base.d != 3 {
        return Err(Error::InvalidConfig(format!("the grid scan needs d = 3 (got {})", base.d)));
    }
    if points < 2 {
        return Err(Error::InvalidConfig("the grid needs at least 2 points per axis".into()));
    }
    let step = (points - 1) as f64;
    let mut cells = Vec::with_capacity(points * points);
    for i in 0..points {
        for j in 0..points {
            let alpha = i as f64 / step * crate::quantum::alpha_max();
            let beta = j as f64 / step * std::f64::consts::FRAC_PI_4;
            let config = TrialConfig {
                state: StateSpec::Partial { alpha, beta },
                master_seed: cell_seed(base.master_seed, i, j),
                ..base.clone()
            };
            let summary = estimate(&config)?.summary;
            cells.push(GridCell {
                i,
                j,
                alpha,
                beta,
                summary,
            });
        }
    }
    Ok(cells)
}
