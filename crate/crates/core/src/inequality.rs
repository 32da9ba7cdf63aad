//! Linear Bell functionals, the CHSH and CGLMP inequalities, relabeling
//! orbits and outcome liftings.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::{Error, Result};

/// Largest raw relabeling count accepted by [`relabelings`].
pub const RELABELING_BOUND: f64 = 1e7;

/// Largest strategy count accepted by [`BellInequality::local_maximum`].
pub const LOCAL_BOUND_LIMIT: f64 = 1e6;

/// A Bell functional `sum beta[a][b][x][y] P(a,b|x,y) <= local_bound`.
///
/// Coefficients are stored in correlation order `[x][y][a][b]` so that
/// evaluation is a flat dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct BellInequality {
    mu: usize,
    nu: usize,
    k: usize,
    weights: Vec<f64>,
    local_bound: f64,
}

impl BellInequality {
    /// `beta` is flat in `[a][b][x][y]` order.
    pub fn new(mu: usize, nu: usize, k: usize, beta: &[f64], local_bound: f64) -> Result<Self> {
        if mu == 0 || nu == 0 || k == 0 {
            return Err(Error::ShapeMismatch(format!("empty scenario ({mu},{nu};{k})")));
        }
        if beta.len() != mu * nu * k * k {
            return Err(Error::ShapeMismatch(format!(
                "({mu},{nu};{k}) needs {} coefficients, got {}",
                mu * nu * k * k,
                beta.len()
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) || !local_bound.is_finite() {
            return Err(Error::Precondition("non-finite Bell coefficient".into()));
        }
        let mut weights = vec![0.0; beta.len()];
        for a in 0..k {
            for b in 0..k {
                for x in 0..mu {
                    for y in 0..nu {
                        weights[((x * nu + y) * k + a) * k + b] = beta[((a * k + b) * mu + x) * nu + y];
                    }
                }
            }
        }
        Ok(Self {
            mu,
            nu,
            k,
            weights,
            local_bound,
        })
    }

    fn from_weights(mu: usize, nu: usize, k: usize, weights: Vec<f64>, local_bound: f64) -> Self {
        Self {
            mu,
            nu,
            k,
            weights,
            local_bound,
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.mu, self.nu, self.k)
    }

    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    #[inline]
    fn widx(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.nu + y) * self.k + a) * self.k + b
    }

    pub fn coefficient(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.weights[self.widx(x, y, a, b)]
    }

    /// Coefficients in `[x][y][a][b]` order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coefficients flattened in `[a][b][x][y]` order.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.weights.len());
        for a in 0..self.k {
            for b in 0..self.k {
                for x in 0..self.mu {
                    for y in 0..self.nu {
                        out.push(self.coefficient(a, b, x, y));
                    }
                }
            }
        }
        out
    }

    pub fn evaluate(&self, p: &Correlation) -> Result<f64> {
        if p.shape() != self.shape() {
            return Err(Error::ShapeMismatch(format!(
                "inequality {:?} vs correlation {:?}",
                self.shape(),
                p.shape()
            )));
        }
        Ok(self.evaluate_unchecked(p))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, p: &Correlation) -> f64 {
        self.weights.iter().zip(p.values()).map(|(w, v)| w * v).sum()
    }

    /// Value on the deterministic strategy `a = alice[x]`, `b = bob[y]`.
    pub fn evaluate_deterministic(&self, alice: &[usize], bob: &[usize]) -> f64 {
        let mut s = 0.0;
        for (x, &a) in alice.iter().enumerate() {
            for (y, &b) in bob.iter().enumerate() {
                s += self.weights[self.widx(x, y, a, b)];
            }
        }
        s
    }

    /// Maximum over all deterministic strategies, by enumerating Alice's maps
    /// and taking Bob's best response setting by setting.
    pub fn local_maximum(&self) -> Result<f64> {
        let count = (self.k as f64).powi((self.mu + self.nu) as i32);
        if count > LOCAL_BOUND_LIMIT {
            return Err(Error::EnumerationTooLarge {
                raw: count,
                bound: LOCAL_BOUND_LIMIT,
            });
        }
        let mut alice = vec![0usize; self.mu];
        let mut best = f64::NEG_INFINITY;
        loop {
            let mut total = 0.0;
            for y in 0..self.nu {
                let mut m = f64::NEG_INFINITY;
                for b in 0..self.k {
                    let s: f64 = alice.iter().enumerate().map(|(x, &a)| self.weights[self.widx(x, y, a, b)]).sum();
                    m = m.max(s);
                }
                total += m;
            }
            best = best.max(total);
            if !next_tuple(&mut alice, self.k) {
                break;
            }
        }
        Ok(best)
    }

    /// Canonical form for deduplication: coefficients rounded to 12 decimals.
    pub fn canonical_key(&self) -> Vec<i64> {
        self.weights.iter().map(|w| (w * 1e12).round() as i64).collect()
    }

    pub fn to_json(&self) -> InequalityJson {
        InequalityJson {
            scenario: Scenario {
                mu: self.mu,
                nu: self.nu,
                k: self.k,
            },
            local_bound: self.local_bound,
            coefficients: self.coefficients(),
        }
    }

    pub fn from_json(json: &InequalityJson) -> Result<Self> {
        let s = json.scenario;
        Self::new(s.mu, s.nu, s.k, &json.coefficients, json.local_bound)
    }
}

/// Advances a base-`k` counter with the first digit most significant.
pub(crate) fn next_tuple(t: &mut [usize], k: usize) -> bool {
    for i in (0..t.len()).rev() {
        t[i] += 1;
        if t[i] < k {
            return true;
        }
        t[i] = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub mu: usize,
    pub nu: usize,
    pub k: usize,
}

/// Export layout with coefficients flat in `[a][b][x][y]` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityJson {
    pub scenario: Scenario,
    pub local_bound: f64,
    pub coefficients: Vec<f64>,
}

/// `sum (-1)^(a+b+xy) P(a,b|x,y) <= 2`.
pub fn chsh() -> BellInequality {
    let mut beta = Vec::with_capacity(16);
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    beta.push(if (a + b + x * y) % 2 == 0 { 1.0 } else { -1.0 });
                }
            }
        }
    }
    BellInequality::new(2, 2, 2, &beta, 2.0).expect("static shape")
}

/// The CGLMP inequality for `k` outcomes with local bound 2.
///
/// `P(A_x = B_y + s)` is `sum_j P(j, j + s mod k | x, y)`; the `i`-th term
/// group carries the weight `1 - 2i/(k-1)`.
pub fn cglmp(k: usize) -> Result<BellInequality> {
    if k < 2 {
        return Err(Error::InvalidDimension(k));
    }
    let kk = k as i64;
    let mut weights = vec![0.0; 4 * k * k];
    let mut add = |x: usize, y: usize, shift: i64, c: f64| {
        for a in 0..k {
            let b = (a as i64 + shift).rem_euclid(kk) as usize;
            weights[((x * 2 + y) * k + a) * k + b] += c;
        }
    };
    for i in 0..(k / 2) as i64 {
        let w = 1.0 - 2.0 * i as f64 / (k - 1) as f64;
        add(0, 0, i, w);
        add(0, 1, -i, w);
        add(1, 0, -i - 1, w);
        add(1, 1, i, w);
        add(0, 0, -i - 1, -w);
        add(0, 1, i + 1, -w);
        add(1, 0, i, -w);
        add(1, 1, -i - 1, -w);
    }
    Ok(BellInequality::from_weights(2, 2, k, weights, 2.0))
}

/// Lifts a two-outcome inequality to `k` outcomes by merging outcomes
/// `1..k` into outcome 1 on both sides.
pub fn lift_outcomes(ineq: &BellInequality, k: usize) -> Result<BellInequality> {
    if ineq.k != 2 {
        return Err(Error::Precondition(format!(
            "outcome lifting expects a two-outcome inequality, got k = {}",
            ineq.k
        )));
    }
    if k < 2 {
        return Err(Error::InvalidDimension(k));
    }
    let (mu, nu) = (ineq.mu, ineq.nu);
    let mut weights = vec![0.0; mu * nu * k * k];
    for x in 0..mu {
        for y in 0..nu {
            for a in 0..k {
                for b in 0..k {
                    weights[((x * nu + y) * k + a) * k + b] = ineq.weights[ineq.widx(x, y, a.min(1), b.min(1))];
                }
            }
        }
    }
    Ok(BellInequality::from_weights(mu, nu, k, weights, ineq.local_bound))
}

/// A relabeling of inputs and outputs, optionally exchanging the parties.
///
/// Setting `x` becomes `alice_inputs[x]`, and outcome `a` at original
/// setting `x` becomes `alice_outputs[x][a]`; Bob likewise. The party swap
/// is applied last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    pub alice_inputs: Vec<usize>,
    pub bob_inputs: Vec<usize>,
    pub alice_outputs: Vec<Vec<usize>>,
    pub bob_outputs: Vec<Vec<usize>>,
    pub swap: bool,
}

impl Relabeling {
    pub fn identity(mu: usize, nu: usize, k: usize) -> Self {
        Self {
            alice_inputs: (0..mu).collect(),
            bob_inputs: (0..nu).collect(),
            alice_outputs: vec![(0..k).collect(); mu],
            bob_outputs: vec![(0..k).collect(); nu],
            swap: false,
        }
    }

    fn check(&self, mu: usize, nu: usize, k: usize) -> Result<()> {
        let is_perm = |p: &[usize], n: usize| {
            let mut seen = vec![false; n];
            p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
        };
        let ok = is_perm(&self.alice_inputs, mu)
            && is_perm(&self.bob_inputs, nu)
            && self.alice_outputs.len() == mu
            && self.bob_outputs.len() == nu
            && self.alice_outputs.iter().chain(&self.bob_outputs).all(|p| is_perm(p, k))
            && (!self.swap || mu == nu);
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("relabeling does not fit ({mu},{nu};{k})")))
        }
    }

    /// Moves every entry of an `[x][y][a][b]` tensor to its relabeled slot.
    fn permute(&self, mu: usize, nu: usize, k: usize, src: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for x in 0..mu {
            for y in 0..nu {
                for a in 0..k {
                    for b in 0..k {
                        let (mut x2, mut y2) = (self.alice_inputs[x], self.bob_inputs[y]);
                        let (mut a2, mut b2) = (self.alice_outputs[x][a], self.bob_outputs[y][b]);
                        if self.swap {
                            std::mem::swap(&mut x2, &mut y2);
                            std::mem::swap(&mut a2, &mut b2);
                        }
                        out[((x2 * nu + y2) * k + a2) * k + b2] = src[((x * nu + y) * k + a) * k + b];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, ineq: &BellInequality) -> Result<BellInequality> {
        let (mu, nu, k) = ineq.shape();
        self.check(mu, nu, k)?;
        Ok(BellInequality::from_weights(mu, nu, k, self.permute(mu, nu, k, &ineq.weights), ineq.local_bound))
    }

    /// The same relabeling acting on a correlation; evaluation is invariant
    /// when both sides are relabeled together.
    pub fn apply_correlation(&self, p: &Correlation) -> Result<Correlation> {
        let (mu, nu, k) = p.shape();
        self.check(mu, nu, k)?;
        Correlation::new(mu, nu, k, self.permute(mu, nu, k, p.values()))
    }
}

/// Generators of the relabeling group: adjacent transpositions of inputs and
/// of the outcomes at each setting, plus the party swap when `mu == nu`.
pub fn relabeling_generators(mu: usize, nu: usize, k: usize) -> Vec<Relabeling> {
    let id = Relabeling::identity(mu, nu, k);
    let mut gens = Vec::new();
    for i in 0..mu.saturating_sub(1) {
        let mut g = id.clone();
        g.alice_inputs.swap(i, i + 1);
        gens.push(g);
    }
    for i in 0..nu.saturating_sub(1) {
        let mut g = id.clone();
        g.bob_inputs.swap(i, i + 1);
        gens.push(g);
    }
    for x in 0..mu {
        for t in 0..k - 1 {
            let mut g = id.clone();
            g.alice_outputs[x].swap(t, t + 1);
            gens.push(g);
        }
    }
    for y in 0..nu {
        for t in 0..k - 1 {
            let mut g = id.clone();
            g.bob_outputs[y].swap(t, t + 1);
            gens.push(g);
        }
    }
    if mu == nu {
        let mut g = id;
        g.swap = true;
        gens.push(g);
    }
    gens
}

/// `mu! nu! (k!)^(mu+nu)`, doubled when the parties can be swapped.
pub fn raw_relabeling_count(mu: usize, nu: usize, k: usize) -> f64 {
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    let swap = if mu == nu { 2.0 } else { 1.0 };
    fact(mu) * fact(nu) * fact(k).powi((mu + nu) as i32) * swap
}

/// A deduplicated list of inequalities sharing one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityFamily {
    members: Vec<BellInequality>,
}

impl InequalityFamily {
    /// Keeps the first occurrence of every canonical coefficient tensor.
    pub fn new(members: Vec<BellInequality>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::EmptyFamily);
        };
        let shape = first.shape();
        if let Some(m) = members.iter().find(|m| m.shape() != shape) {
            return Err(Error::ShapeMismatch(format!("family mixes {shape:?} and {:?}", m.shape())));
        }
        let mut seen = HashSet::new();
        let members = members.into_iter().filter(|m| seen.insert(m.canonical_key())).collect();
        Ok(Self { members })
    }

    pub fn members(&self) -> &[BellInequality] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.members[0].shape()
    }

    /// Members of `self` followed by the new members of `other`.
    pub fn union(&self, other: &InequalityFamily) -> Result<Self> {
        Self::new(self.members.iter().chain(&other.members).cloned().collect())
    }

    pub fn contains(&self, ineq: &BellInequality) -> bool {
        let key = ineq.canonical_key();
        self.members.iter().any(|m| m.canonical_key() == key)
    }
}

/// The relabeling orbit of `ineq`, starting with `ineq` itself and
/// continuing in breadth-first order over [`relabeling_generators`].
pub fn relabelings(ineq: &BellInequality) -> Result<InequalityFamily> {
    let (mu, nu, k) = ineq.shape();
    let raw = raw_relabeling_count(mu, nu, k);
    if raw > RELABELING_BOUND {
        return Err(Error::EnumerationTooLarge {
            raw,
            bound: RELABELING_BOUND,
        });
    }
    let gens = relabeling_generators(mu, nu, k);
    let mut seen = HashSet::new();
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(ineq.canonical_key());
    queue.push_back(ineq.clone());
    while let Some(cur) = queue.pop_front() {
        for g in &gens {
            let next = g.apply(&cur)?;
            if seen.insert(next.canonical_key()) {
                queue.push_back(next);
            }
        }
        members.push(cur);
    }
    InequalityFamily::new(members)
}

/// Largest member value on `p`, with the lowest index among ties.
pub fn max_over_family(family: &InequalityFamily, p: &Correlation) -> Result<(f64, usize)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if family.shape() != p.shape() {
        return Err(Error::ShapeMismatch(format!(
            "family {:?} vs correlation {:?}",
            family.shape(),
            p.shape()
        )));
    }
    Ok(max_over_family_unchecked(family, p))
}

pub(crate) fn max_over_family_unchecked(family: &InequalityFamily, p: &Correlation) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, m) in family.members.iter().enumerate() {
        let v = m.evaluate_unchecked(p);
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}
