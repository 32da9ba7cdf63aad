//! Bell correlations `P(a, b | x, y)` for a `(mu, nu; k)` scenario.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mub::MubSet;
use crate::quantum::{born_unchecked, SchmidtState};

/// Tolerance for normalization and no-signaling checks.
pub const CORRELATION_TOL: f64 = 1e-9;

/// Dense probability tensor indexed `[x][y][a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    mu: usize,
    nu: usize,
    k: usize,
    p: Vec<f64>,
}

impl Correlation {
    /// Checks the tensor shape only; see [`Correlation::validate`].
    pub fn new(mu: usize, nu: usize, k: usize, p: Vec<f64>) -> Result<Self> {
        if mu == 0 || nu == 0 || k == 0 {
            return Err(Error::ShapeMismatch(format!("empty scenario ({mu},{nu};{k})")));
        }
        if p.len() != mu * nu * k * k {
            return Err(Error::ShapeMismatch(format!(
                "({mu},{nu};{k}) needs {} entries, got {}",
                mu * nu * k * k,
                p.len()
            )));
        }
        Ok(Self { mu, nu, k, p })
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.mu, self.nu, self.k)
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.nu + y) * self.k + a) * self.k + b
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.index(x, y, a, b)]
    }

    /// The `k x k` block for settings `(x, y)`, row `a`, column `b`.
    pub fn block(&self, x: usize, y: usize) -> &[f64] {
        let start = self.index(x, y, 0, 0);
        &self.p[start..start + self.k * self.k]
    }

    /// Entries in `[0, 1]`, every block sums to one, and no-signaling, all
    /// within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if let Some(v) = self.p.iter().find(|v| !(-tol..=1.0 + tol).contains(*v)) {
            return Err(Error::Precondition(format!("probability {v} outside [0, 1]")));
        }
        for x in 0..self.mu {
            for y in 0..self.nu {
                let s: f64 = self.block(x, y).iter().sum();
                if (s - 1.0).abs() > tol {
                    return Err(Error::Precondition(format!(
                        "block ({x},{y}) sums to {s}"
                    )));
                }
            }
        }
        let ns = check_no_signaling(self, tol);
        if !ns.pass {
            return Err(Error::Precondition(format!(
                "signaling correlation (deviation {:e})",
                ns.max_deviation
            )));
        }
        Ok(())
    }

    /// Alice's marginal `P(a|x)` computed at Bob's setting `y`.
    pub fn alice_marginal(&self, x: usize, y: usize, a: usize) -> f64 {
        (0..self.k).map(|b| self.get(x, y, a, b)).sum()
    }

    pub fn bob_marginal(&self, x: usize, y: usize, b: usize) -> f64 {
        (0..self.k).map(|a| self.get(x, y, a, b)).sum()
    }

    /// Sum of squared deviations from white noise.
    pub(crate) fn noise_distance_sqr(&self) -> f64 {
        let w = 1.0 / (self.k * self.k) as f64;
        self.p.iter().map(|v| (v - w) * (v - w)).sum()
    }

    pub fn to_json(&self) -> CorrelationJson {
        let p = (0..self.mu)
            .map(|x| {
                (0..self.nu)
                    .map(|y| {
                        (0..self.k)
                            .map(|a| (0..self.k).map(|b| self.get(x, y, a, b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CorrelationJson {
            mu: self.mu,
            nu: self.nu,
            k: self.k,
            p,
        }
    }

    pub fn from_json(json: &CorrelationJson) -> Result<Self> {
        let (mu, nu, k) = (json.mu, json.nu, json.k);
        let mut p = Vec::with_capacity(mu * nu * k * k);
        if json.p.len() != mu {
            return Err(Error::ShapeMismatch("outer array length != mu".into()));
        }
        for row in &json.p {
            if row.len() != nu {
                return Err(Error::ShapeMismatch("second array length != nu".into()));
            }
            for block in row {
                if block.len() != k || block.iter().any(|r| r.len() != k) {
                    return Err(Error::ShapeMismatch("block is not k x k".into()));
                }
                p.extend(block.iter().flatten());
            }
        }
        Self::new(mu, nu, k, p)
    }

    /// CSV with header `x,y,a,b,p`, one row per entry in index order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "a", "b", "p"])?;
        for x in 0..self.mu {
            for y in 0..self.nu {
                for a in 0..self.k {
                    for b in 0..self.k {
                        w.serialize((x, y, a, b, self.get(x, y, a, b)))?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rows: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "a", "b", "p"] {
            return Err(Error::Parse(format!("unexpected correlation header {headers:?}")));
        }
        for rec in r.deserialize() {
            rows.push(rec?);
        }
        let mu = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
        let nu = rows.iter().map(|r| r.1).max().map_or(0, |m| m + 1);
        let k = rows.iter().map(|r| r.2.max(r.3)).max().map_or(0, |m| m + 1);
        let mut p = vec![f64::NAN; mu * nu * k * k];
        for (x, y, a, b, v) in rows {
            p[((x * nu + y) * k + a) * k + b] = v;
        }
        if p.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("correlation CSV is missing entries".into()));
        }
        Self::new(mu, nu, k, p)
    }
}

/// JSON layout: `p[x][y][a][b]` nested arrays plus the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationJson {
    pub mu: usize,
    pub nu: usize,
    pub k: usize,
    pub p: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Choice of two Alice settings `x1 < x2` and two Bob settings `y1 < y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairIndex {
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
}

impl PairIndex {
    pub fn new(x1: usize, x2: usize, y1: usize, y2: usize) -> Result<Self> {
        if x1 >= x2 || y1 >= y2 {
            return Err(Error::IndexOutOfRange(format!(
                "pair ({x1},{x2};{y1},{y2}) must satisfy x1 < x2, y1 < y2"
            )));
        }
        Ok(Self { x1, x2, y1, y2 })
    }
}

/// `p[x][y][a][b] = |<alice_x,a| <bob_y,b| psi>|^2` over all bases of both sets.
pub fn compute_correlation(
    state: &SchmidtState,
    alice: &MubSet,
    bob: &MubSet,
) -> Result<Correlation> {
    let d = state.dim();
    for set in [alice, bob] {
        if set.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: set.dim(),
            });
        }
    }
    Ok(correlation_unchecked(state, alice, bob))
}

pub(crate) fn correlation_unchecked(state: &SchmidtState, alice: &MubSet, bob: &MubSet) -> Correlation {
    let (mu, nu, k) = (alice.len(), bob.len(), state.dim());
    let c = state.coeffs();
    let mut p = Vec::with_capacity(mu * nu * k * k);
    for ea in alice.bases() {
        for eb in bob.bases() {
            for va in ea.vectors() {
                for vb in eb.vectors() {
                    p.push(born_unchecked(c, va, vb));
                }
            }
        }
    }
    Correlation { mu, nu, k, p }
}

/// Outcome of [`check_no_signaling`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoSignalingReport {
    pub pass: bool,
    pub max_deviation: f64,
}

/// Largest change of either party's marginal under a change of the other
/// party's setting.
pub fn check_no_signaling(p: &Correlation, tol: f64) -> NoSignalingReport {
    let mut worst: f64 = 0.0;
    for x in 0..p.mu {
        for a in 0..p.k {
            let m0 = p.alice_marginal(x, 0, a);
            for y in 1..p.nu {
                worst = worst.max((p.alice_marginal(x, y, a) - m0).abs());
            }
        }
    }
    for y in 0..p.nu {
        for b in 0..p.k {
            let m0 = p.bob_marginal(0, y, b);
            for x in 1..p.mu {
                worst = worst.max((p.bob_marginal(x, y, b) - m0).abs());
            }
        }
    }
    NoSignalingReport {
        pass: worst <= tol,
        max_deviation: worst,
    }
}

/// Sub-correlation at Alice settings `xs` and Bob settings `ys`, relabeled
/// `0..xs.len()` and `0..ys.len()`.
pub fn extract(p: &Correlation, xs: &[usize], ys: &[usize]) -> Result<Correlation> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::IndexOutOfRange("empty setting selection".into()));
    }
    if let Some(x) = xs.iter().find(|&&x| x >= p.mu) {
        return Err(Error::IndexOutOfRange(format!("Alice setting {x} >= {}", p.mu)));
    }
    if let Some(y) = ys.iter().find(|&&y| y >= p.nu) {
        return Err(Error::IndexOutOfRange(format!("Bob setting {y} >= {}", p.nu)));
    }
    let mut out = Vec::with_capacity(xs.len() * ys.len() * p.k * p.k);
    for &x in xs {
        for &y in ys {
            out.extend_from_slice(p.block(x, y));
        }
    }
    Ok(Correlation {
        mu: xs.len(),
        nu: ys.len(),
        k: p.k,
        p: out,
    })
}

/// The `(2, 2; k)` sub-correlation at `idx`.
pub fn extract_two_setting(p: &Correlation, idx: PairIndex) -> Result<Correlation> {
    if idx.x1 >= idx.x2 || idx.y1 >= idx.y2 {
        return Err(Error::IndexOutOfRange(format!("{idx:?} is not ordered")));
    }
    extract(p, &[idx.x1, idx.x2], &[idx.y1, idx.y2])
}

/// All `C(n, size)` increasing index tuples in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

/// The `C(mu,2) C(nu,2)` two-setting selections in lexicographic order.
pub fn all_pair_indices(mu: usize, nu: usize) -> Result<Vec<PairIndex>> {
    if mu < 2 || nu < 2 {
        return Err(Error::Precondition(format!(
            "pair extraction needs mu, nu >= 2 (got {mu}, {nu})"
        )));
    }
    let xs = subsets(mu, 2);
    let ys = subsets(nu, 2);
    Ok(xs
        .iter()
        .flat_map(|x| {
            ys.iter().map(move |y| PairIndex {
                x1: x[0],
                x2: x[1],
                y1: y[0],
                y2: y[1],
            })
        })
        .collect())
}

/// Uniform distribution `1/k^2` in every block.
pub fn white_noise(mu: usize, nu: usize, k: usize) -> Correlation {
    Correlation {
        mu,
        nu,
        k,
        p: vec![1.0 / (k * k) as f64; mu * nu * k * k],
    }
}

/// `v P + (1 - v) Q` entrywise; the result may leave the probability simplex.
pub fn mix(p: &Correlation, q: &Correlation, v: f64) -> Result<Correlation> {
    if p.shape() != q.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            p.shape(),
            q.shape()
        )));
    }
    Ok(Correlation {
        mu: p.mu,
        nu: p.nu,
        k: p.k,
        p: p.p.iter().zip(&q.p).map(|(a, b)| v * a + (1.0 - v) * b).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::{rotate_mubs, standard_mubs, Basis, MubSet};
    use crate::quantum::{max_entangled_state, sample_haar_unitary, Stream, TrialSeed};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Alice measures the sigma_x, sigma_y, sigma_z eigenbases, Bob the same
    /// bases rotated by the real rotation R(t); outcome 0 is eigenvalue +1.
    fn rotated_pauli_correlation(t: f64) -> Correlation {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pauli_bases = vec![
            vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]],
            vec![vec![c(h, 0.0), c(0.0, h)], vec![c(h, 0.0), c(0.0, -h)]],
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        ];
        let rot = |v: &Vec<Complex64>| vec![v[0] * t.cos() - v[1] * t.sin(), v[0] * t.sin() + v[1] * t.cos()];
        let alice = MubSet::new(pauli_bases.iter().map(|b| Basis::new(b.clone()).unwrap()).collect()).unwrap();
        let bob = MubSet::new(
            pauli_bases
                .iter()
                .map(|b| Basis::new(b.iter().map(rot).collect()).unwrap())
                .collect(),
        )
        .unwrap();
        compute_correlation(&max_entangled_state(2).unwrap(), &alice, &bob).unwrap()
    }

    /// The 6 x 6 tabular form: rows (x, a), columns (y, b).
    fn tabular(t: f64) -> [[f64; 6]; 6] {
        let (cc, s) = ((2.0 * t).cos(), (2.0 * t).sin());
        let q = 0.25;
        [
            [q * (cc + 1.0), q * (1.0 - cc), q, q, q * (s + 1.0), q * (1.0 - s)],
            [q * (1.0 - cc), q * (cc + 1.0), q, q, q * (1.0 - s), q * (s + 1.0)],
            [q, q, 0.0, 0.5, q, q],
            [q, q, 0.5, 0.0, q, q],
            [q * (1.0 - s), q * (s + 1.0), q, q, q * (cc + 1.0), q * (1.0 - cc)],
            [q * (s + 1.0), q * (1.0 - s), q, q, q * (1.0 - cc), q * (cc + 1.0)],
        ]
    }

    #[test]
    fn rotated_pauli_correlation_matches_table() {
        for t in [0.0, 0.3, std::f64::consts::PI / 8.0, 1.1] {
            let p = rotated_pauli_correlation(t);
            let tab = tabular(t);
            for x in 0..3 {
                for y in 0..3 {
                    for a in 0..2 {
                        for b in 0..2 {
                            let want = tab[2 * x + a][2 * y + b];
                            assert!((p.get(x, y, a, b) - want).abs() < 1e-14, "t={t} ({x},{y},{a},{b})");
                        }
                    }
                }
            }
        }
        let p = rotated_pauli_correlation(0.0);
        assert_eq!(p.block(0, 0).iter().map(|v| (v * 1e12).round() / 1e12).collect::<Vec<_>>(), vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn two_setting_extraction_matches_table() {
        let t = 0.37;
        let p = rotated_pauli_correlation(t);
        let tab = tabular(t);
        // 1-based (1,2;1,2), (1,2;1,3), (1,2;2,3)
        for (ys, cols) in [([0usize, 1usize], [0usize, 1usize]), ([0, 2], [0, 2]), ([1, 2], [1, 2])] {
            let idx = PairIndex::new(0, 1, ys[0], ys[1]).unwrap();
            let sub = extract_two_setting(&p, idx).unwrap();
            assert_eq!(sub.shape(), (2, 2, 2));
            for x in 0..2 {
                for (yy, &col) in cols.iter().enumerate() {
                    for a in 0..2 {
                        for b in 0..2 {
                            assert!((sub.get(x, yy, a, b) - tab[2 * x + a][2 * col + b]).abs() < 1e-14);
                        }
                    }
                }
            }
        }
        // P'_{1,2;1,2}, block (x=2, y=2) = [[0, 1/2], [1/2, 0]]
        let sub = extract_two_setting(&p, PairIndex::new(0, 1, 0, 1).unwrap()).unwrap();
        let blk: Vec<f64> = sub.block(1, 1).to_vec();
        for (v, w) in blk.iter().zip([0.0, 0.5, 0.5, 0.0]) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_extraction() {
        let p = white_noise(2, 2, 3);
        let q = extract_two_setting(&p, PairIndex::new(0, 1, 0, 1).unwrap()).unwrap();
        assert_eq!(p, q);
        assert!(extract_two_setting(&p, PairIndex { x1: 0, x2: 2, y1: 0, y2: 1 }).is_err());
        assert!(PairIndex::new(1, 1, 0, 1).is_err());
    }

    #[test]
    fn computational_bases_on_max_entangled_state() {
        for d in 2..=7 {
            let m = standard_mubs(d).unwrap().take(1).unwrap();
            let p = compute_correlation(&max_entangled_state(d).unwrap(), &m, &m).unwrap();
            for a in 0..d {
                for b in 0..d {
                    let want = if a == b { 1.0 / d as f64 } else { 0.0 };
                    assert!((p.get(0, 0, a, b) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rotated_mub_correlations_are_valid() {
        let m = standard_mubs(3).unwrap();
        let st = max_entangled_state(3).unwrap();
        for t in 0..50 {
            let seed = TrialSeed { master_seed: 3, trial_index: t };
            let a = rotate_mubs(&m, &sample_haar_unitary(3, seed, Stream::Alice).unwrap()).unwrap();
            let b = rotate_mubs(&m, &sample_haar_unitary(3, seed, Stream::Bob).unwrap()).unwrap();
            let p = compute_correlation(&st, &a, &b).unwrap();
            p.validate(CORRELATION_TOL).unwrap();
        }
        let bad = compute_correlation(&st, &standard_mubs(2).unwrap(), &m);
        assert!(bad.is_err());
    }

    #[test]
    fn no_signaling_checks() {
        let w = white_noise(2, 3, 4);
        let r = check_no_signaling(&w, 1e-9);
        assert!(r.pass && r.max_deviation == 0.0);

        // block (0,0): P(0,0) = 1; block (0,1): P(0,b) = 1/k so Alice's marginal moves
        let k = 3;
        let mut p = white_noise(2, 2, k).values().to_vec();
        let c = white_noise(2, 2, k);
        for a in 0..k {
            for b in 0..k {
                p[c.index(0, 0, a, b)] = if a == 0 && b == 0 { 1.0 } else { 0.0 };
                p[c.index(0, 1, a, b)] = if a == 0 { 1.0 / k as f64 } else { 0.0 };
            }
        }
        let bad = Correlation::new(2, 2, k, p).unwrap();
        let r = check_no_signaling(&bad, 1e-9);
        assert!(!r.pass);
        assert!(bad.validate(1e-9).is_err());
    }

    #[test]
    fn pair_counts() {
        assert_eq!(all_pair_indices(2, 2).unwrap().len(), 1);
        assert_eq!(all_pair_indices(3, 3).unwrap().len(), 9);
        assert_eq!(all_pair_indices(4, 4).unwrap().len(), 36);
        assert_eq!(all_pair_indices(8, 5).unwrap().len(), 28 * 10);
        assert!(all_pair_indices(1, 3).is_err());
        let v = all_pair_indices(3, 4).unwrap();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn white_noise_and_mixing() {
        let w = white_noise(2, 2, 3);
        assert_eq!(w.values().len(), 36);
        assert!(w.values().iter().all(|&v| v == 1.0 / 9.0));
        let p = rotated_pauli_correlation(0.2);
        let w2 = white_noise(3, 3, 2);
        assert_eq!(mix(&p, &w2, 1.0).unwrap(), p);
        for v in [0.0, 0.4, 2.5] {
            let m = mix(&w2, &w2, v).unwrap();
            for (a, b) in m.values().iter().zip(w2.values()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert!(mix(&p, &w, 0.5).is_err());
    }

    #[test]
    fn extraction_commutes_with_mixing() {
        let p = rotated_pauli_correlation(0.9);
        let w = white_noise(3, 3, 2);
        for idx in all_pair_indices(3, 3).unwrap() {
            for v in [0.3, 0.77, 1.4] {
                let lhs = extract_two_setting(&mix(&p, &w, v).unwrap(), idx).unwrap();
                let rhs = mix(&extract_two_setting(&p, idx).unwrap(), &white_noise(2, 2, 2), v).unwrap();
                for (a, b) in lhs.values().iter().zip(rhs.values()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn csv_and_json_round_trip() {
        let p = rotated_pauli_correlation(0.123456789);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,y,a,b,p\n"));
        assert_eq!(Correlation::read_csv(buf.as_slice()).unwrap(), p);

        let text = serde_json::to_string(&p.to_json()).unwrap();
        let back: CorrelationJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Correlation::from_json(&back).unwrap(), p);
    }

    #[test]
    fn subsets_enumerates_combinations() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(6, 3).len(), 20);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert!(subsets(2, 3).is_empty());
    }
}
