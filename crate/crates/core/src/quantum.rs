//! Two-qudit pure states in Schmidt form, Born-rule probabilities and
//! Haar-distributed unitaries.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Pure two-qudit state `sum_j c_j |j>|j>` stored by its Schmidt coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtState {
    coeffs: Vec<f64>,
}

impl SchmidtState {
    /// Validates nonnegativity and normalization (within 1e-12).
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidDimension(coeffs.len()));
        }
        if let Some(&c) = coeffs.iter().find(|c| **c < 0.0 || !c.is_finite()) {
            return Err(Error::OutOfRange {
                what: "Schmidt coefficient",
                value: c,
                low: 0.0,
                high: 1.0,
            });
        }
        let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// `|Phi_d> = d^{-1/2} sum_j |jj>`.
pub fn max_entangled_state(d: usize) -> Result<SchmidtState> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    SchmidtState::new(vec![1.0 / (d as f64).sqrt(); d])
}

/// Upper end of the partially entangled qutrit family's `alpha` range.
pub fn alpha_max() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

/// `cos(a)|00> + sin(a)cos(b)|11> + sin(a)sin(b)|22>` for
/// `0 <= a <= arccos(1/sqrt 3)`, `0 <= b <= pi/4`.
pub fn partial_qutrit_state(alpha: f64, beta: f64) -> Result<SchmidtState> {
    const SLACK: f64 = 1e-9;
    let a_hi = alpha_max();
    let b_hi = std::f64::consts::FRAC_PI_4;
    if !(-SLACK..=a_hi + SLACK).contains(&alpha) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            low: 0.0,
            high: a_hi,
        });
    }
    if !(-SLACK..=b_hi + SLACK).contains(&beta) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta,
            low: 0.0,
            high: b_hi,
        });
    }
    let (alpha, beta) = (alpha.clamp(0.0, a_hi + SLACK), beta.clamp(0.0, b_hi + SLACK));
    let coeffs = vec![
        alpha.cos(),
        alpha.sin() * beta.cos(),
        alpha.sin() * beta.sin(),
    ];
    // renormalize away rounding so the constructor's 1e-12 check always holds
    let n = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    SchmidtState::new(coeffs.into_iter().map(|c| (c / n).max(0.0)).collect())
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `|<alice|<bob| psi>|^2` for the rank-1 projectors onto the two vectors.
pub fn born_probability(
    state: &SchmidtState,
    alice: &[Complex64],
    bob: &[Complex64],
) -> Result<f64> {
    let d = state.dim();
    for v in [alice, bob] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        let n = norm_sqr(v);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
    }
    Ok(born_unchecked(state.coeffs(), alice, bob))
}

#[inline]
pub(crate) fn born_unchecked(coeffs: &[f64], alice: &[Complex64], bob: &[Complex64]) -> f64 {
    let mut amp = Complex64::new(0.0, 0.0);
    for ((c, a), b) in coeffs.iter().zip(alice).zip(bob) {
        amp += (a * b).conj() * *c;
    }
    amp.norm_sqr()
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    d: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn identity(d: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            entries[i * d + i] = Complex64::new(1.0, 0.0);
        }
        Self { d, entries }
    }

    /// Wraps `entries` (row-major) after checking `U^dagger U = 1` to 1e-10.
    pub fn from_row_major(d: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: entries.len(),
            });
        }
        let u = Self { d, entries };
        let dev = u.unitarity_deviation();
        if dev > 1e-10 {
            return Err(Error::Precondition(format!(
                "matrix is not unitary (max deviation {dev:e})"
            )));
        }
        Ok(u)
    }

    pub(crate) fn from_raw(d: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), d * d);
        Self { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.d + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.d;
        (0..d)
            .map(|i| {
                self.entries[i * d..(i + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.d;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                for j in 0..d {
                    out[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        Self { d, entries: out }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        Self { d, entries: out }
    }

    /// Max absolute entry of `U^dagger U - 1`.
    pub fn unitarity_deviation(&self) -> f64 {
        let g = self.adjoint().mul(self);
        let mut worst: f64 = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - target).norm());
            }
        }
        worst
    }
}

/// Seed material for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

/// Which party a random stream belongs to within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Alice,
    Bob,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Alice => 0,
            Stream::Bob => 1,
        }
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-style generator: the key comes from the master seed, the ChaCha
/// stream id from `(trial_index, stream)`, so no trial depends on another.
pub(crate) fn trial_rng(seed: TrialSeed, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = seed.master_seed;
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(seed.trial_index.wrapping_mul(4).wrapping_add(stream.tag()));
    rng
}

/// Haar-random `d x d` unitary: complex Ginibre matrix, Gram-Schmidt with
/// reorthogonalization, and `R` diagonal made real positive.
pub fn sample_haar_unitary(d: usize, seed: TrialSeed, stream: Stream) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = trial_rng(seed, stream);
    Ok(haar_from_rng(d, &mut rng))
}

pub(crate) fn haar_from_rng<R: rand::Rng>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // columns[c][r]
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    for c in 0..d {
        let (done, rest) = cols.split_at_mut(c);
        let col = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let proj: Complex64 = q.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, qv) in col.iter_mut().zip(q) {
                    *x -= proj * qv;
                }
            }
        }
        // Dividing by the positive norm leaves R_cc real and positive, which is
        // exactly the phase convention that makes Q Haar distributed.
        let n = norm_sqr(col).sqrt();
        for x in col.iter_mut() {
            *x /= n;
        }
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            entries[r * d + c] = *z;
        }
    }
    UnitaryMatrix::from_raw(d, entries)
}
