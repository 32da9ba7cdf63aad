//! Reference sets of mutually unbiased bases for `d = 2..=7`.
//!
//! Prime dimensions use the eigenbases of the Weyl operators `Z`, `X`,
//! `ZX`, `ZX^2`, ..., `ZX^{d-1}` (a complete set of `d + 1` bases). `d = 4`
//! uses the five stabilizer bases of the two-qubit Pauli partition and
//! `d = 6` the index-aligned tensor products of the first three qubit and
//! qutrit bases.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::UnitaryMatrix;

/// Tolerance for orthonormality and unbiasedness checks.
pub const MUB_TOL: f64 = 1e-10;

/// An orthonormal basis of `C^d`; `vectors[i]` is the direction of outcome `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    vectors: Vec<Vec<Complex64>>,
}

impl Basis {
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = vectors.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        let b = Self { vectors };
        let dev = b.orthonormality_deviation();
        if dev > MUB_TOL {
            return Err(Error::Precondition(format!(
                "basis not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }

    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(u, v).norm() - target).abs());
            }
        }
        worst
    }
}

/// `<u|v>`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// An ordered list of pairwise mutually unbiased bases.
#[derive(Debug, Clone, PartialEq)]
pub struct MubSet {
    d: usize,
    bases: Vec<Basis>,
}

impl MubSet {
    pub fn new(bases: Vec<Basis>) -> Result<Self> {
        let d = bases
            .first()
            .map(Basis::dim)
            .ok_or_else(|| Error::Precondition("empty MUB set".into()))?;
        if let Some(b) = bases.iter().find(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: b.dim(),
            });
        }
        let set = Self { d, bases };
        let dev = set.unbiasedness_deviation();
        if dev > MUB_TOL {
            return Err(Error::Precondition(format!(
                "bases are not mutually unbiased (deviation {dev:e})"
            )));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    /// The first `count` bases, in the fixed reference order.
    pub fn take(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.bases.len() {
            return Err(Error::OutOfRange {
                what: "number of bases",
                value: count as f64,
                low: 1.0,
                high: self.bases.len() as f64,
            });
        }
        Ok(Self {
            d: self.d,
            bases: self.bases[..count].to_vec(),
        })
    }

    /// Max over distinct basis pairs of `| |<e_i|f_j>|^2 - 1/d |`.
    pub fn unbiasedness_deviation(&self) -> f64 {
        let target = 1.0 / self.d as f64;
        let mut worst: f64 = 0.0;
        for (p, e) in self.bases.iter().enumerate() {
            for f in &self.bases[p + 1..] {
                for u in e.vectors() {
                    for v in f.vectors() {
                        worst = worst.max((inner(u, v).norm_sqr() - target).abs());
                    }
                }
            }
        }
        worst
    }

    /// Serializable form: bases -> vectors -> `[re, im]` components.
    pub fn to_json_value(&self) -> MubSetJson {
        MubSetJson(
            self.bases
                .iter()
                .map(|b| {
                    b.vectors()
                        .iter()
                        .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn from_json_value(json: &MubSetJson) -> Result<Self> {
        let bases = json
            .0
            .iter()
            .map(|b| {
                Basis::new(
                    b.iter()
                        .map(|v| v.iter().map(|p| Complex64::new(p[0], p[1])).collect())
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bases)
    }
}

/// JSON layout of a [`MubSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MubSetJson(pub Vec<Vec<Vec<[f64; 2]>>>);

/// The shift `X = sum_j |j+1><j|` and phase `Z = sum_j w^j |j><j|`.
pub fn weyl_operators(d: usize) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; d * d];
    let mut z = vec![zero; d * d];
    for j in 0..d {
        x[((j + 1) % d) * d + j] = Complex64::new(1.0, 0.0);
        z[j * d + j] = root_of_unity(d, j as i64);
    }
    Ok((UnitaryMatrix::from_raw(d, x), UnitaryMatrix::from_raw(d, z)))
}

fn root_of_unity(d: usize, power: i64) -> Complex64 {
    let e = power.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * e / d as f64)
}

/// Integer `p` such that `p * k = 1 (mod d)`; `d` prime.
fn mod_inverse(k: usize, d: usize) -> usize {
    (1..d).find(|p| (p * k) % d == 1).expect("k invertible mod prime d")
}

fn is_prime(d: usize) -> bool {
    d >= 2 && (2..d).take_while(|p| p * p <= d).all(|p| d % p != 0)
}

/// An eigenbasis together with its eigenvalues, ordered by eigenvalue
/// argument in `[0, 2 pi)`.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    pub operator: UnitaryMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub basis: Basis,
}

fn sorted_eigenbasis(op: UnitaryMatrix, vectors: Vec<Vec<Complex64>>) -> Result<Eigenbasis> {
    let mut pairs: Vec<(f64, Complex64, Vec<Complex64>)> = vectors
        .into_iter()
        .map(|v| {
            let lambda = inner(&v, &op.mul_vec(&v));
            let mut arg = lambda.arg();
            if arg < -1e-9 {
                arg += 2.0 * PI;
            }
            (arg.max(0.0), lambda, v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues = pairs.iter().map(|p| p.1).collect();
    let basis = Basis::new(pairs.into_iter().map(|p| p.2).collect())?;
    Ok(Eigenbasis {
        operator: op,
        eigenvalues,
        basis,
    })
}

/// Eigenbasis of `Z^z_pow X^x_pow` for prime `d` with `(z_pow, x_pow)` one of
/// `(1, 0)`, `(0, 1)` or `(1, k)` with `1 <= k < d`.
pub fn weyl_eigenbasis(d: usize, z_pow: usize, x_pow: usize) -> Result<Eigenbasis> {
    if !is_prime(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let (x, z) = weyl_operators(d)?;
    let mut op = UnitaryMatrix::identity(d);
    for _ in 0..z_pow {
        op = op.mul(&z);
    }
    for _ in 0..x_pow {
        op = op.mul(&x);
    }
    let zero = Complex64::new(0.0, 0.0);
    let norm = 1.0 / (d as f64).sqrt();
    let vectors: Vec<Vec<Complex64>> = match (z_pow, x_pow % d) {
        (_, 0) => (0..d)
            .map(|l| {
                let mut v = vec![zero; d];
                v[l] = Complex64::new(1.0, 0.0);
                v
            })
            .collect(),
        (0, _) => (0..d)
            .map(|l| (0..d).map(|j| root_of_unity(d, (l * j) as i64) * norm).collect())
            .collect(),
        (1, 1) if d == 2 => {
            // ZX = [[0, 1], [-1, 0]] has eigenvectors (1, +-i)/sqrt 2
            let i = Complex64::new(0.0, norm);
            let r = Complex64::new(norm, 0.0);
            vec![vec![r, i], vec![r, -i]]
        }
        (1, k) => {
            // (ZX^k) v = w^{-l} v  for  v_j = w^{k t(t+1)/2 + l t} / sqrt d,  t = j k^{-1} mod d
            let kinv = mod_inverse(k, d);
            (0..d)
                .map(|l| {
                    (0..d)
                        .map(|j| {
                            let t = (j * kinv) % d;
                            let e = (k * (t * (t + 1) / 2) + l * t) as i64;
                            root_of_unity(d, e) * norm
                        })
                        .collect()
                })
                .collect()
        }
        _ => {
            return Err(Error::Precondition(format!(
                "no closed-form eigenbasis for Z^{z_pow} X^{x_pow}"
            )))
        }
    };
    sorted_eigenbasis(op, vectors)
}

/// Eigenbases of `Z, X, ZX, ..., ZX^{d-1}` for prime `d`.
fn prime_mub_eigenbases(d: usize) -> Result<Vec<Eigenbasis>> {
    let mut out = vec![weyl_eigenbasis(d, 1, 0)?, weyl_eigenbasis(d, 0, 1)?];
    for k in 1..d {
        out.push(weyl_eigenbasis(d, 1, k)?);
    }
    Ok(out)
}

fn pauli(label: char) -> [[Complex64; 2]; 2] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match label {
        'I' => [[l, o], [o, l]],
        'X' => [[o, l], [l, o]],
        'Y' => [[o, -i], [i, o]],
        'Z' => [[l, o], [o, -l]],
        _ => unreachable!("not a Pauli label"),
    }
}

fn two_qubit_pauli(label: &str) -> Vec<Complex64> {
    let mut chars = label.chars();
    let a = pauli(chars.next().unwrap());
    let b = pauli(chars.next().unwrap());
    let mut m = vec![Complex64::new(0.0, 0.0); 16];
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    m[(2 * i1 + i2) * 4 + 2 * j1 + j2] = a[i1][j1] * b[i2][j2];
                }
            }
        }
    }
    m
}

/// Commuting generator pairs of the five classes partitioning the fifteen
/// nontrivial two-qubit Paulis.
const PAULI_PARTITION: [[&str; 2]; 5] = [
    ["ZI", "IZ"],
    ["XI", "IX"],
    ["YI", "IY"],
    ["XZ", "YX"],
    ["YZ", "ZX"],
];

fn fix_phase(v: &mut [Complex64]) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-9) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

fn ququart_bases() -> Result<Vec<Basis>> {
    let id = two_qubit_pauli("II");
    PAULI_PARTITION
        .iter()
        .map(|[g1, g2]| {
            let p1 = two_qubit_pauli(g1);
            let p2 = two_qubit_pauli(g2);
            let vectors = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                .iter()
                .map(|&(s1, s2)| {
                    // rank-1 projector (1 + s1 P1)(1 + s2 P2) / 4
                    let a: Vec<Complex64> = id.iter().zip(&p1).map(|(i, p)| i + p * s1).collect();
                    let b: Vec<Complex64> = id.iter().zip(&p2).map(|(i, p)| i + p * s2).collect();
                    let mut proj = vec![Complex64::new(0.0, 0.0); 16];
                    for r in 0..4 {
                        for c in 0..4 {
                            proj[r * 4 + c] = (0..4).map(|t| a[r * 4 + t] * b[t * 4 + c]).sum::<Complex64>() / 4.0;
                        }
                    }
                    let best = (0..4)
                        .max_by(|&x, &y| {
                            let nx: f64 = (0..4).map(|r| proj[r * 4 + x].norm_sqr()).sum();
                            let ny: f64 = (0..4).map(|r| proj[r * 4 + y].norm_sqr()).sum();
                            nx.total_cmp(&ny)
                        })
                        .unwrap();
                    let mut v: Vec<Complex64> = (0..4).map(|r| proj[r * 4 + best]).collect();
                    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|z| *z /= n);
                    fix_phase(&mut v);
                    v
                })
                .collect();
            Basis::new(vectors)
        })
        .collect()
}

fn tensor_basis(a: &Basis, b: &Basis) -> Result<Basis> {
    let mut vectors = Vec::with_capacity(a.dim() * b.dim());
    for u in a.vectors() {
        for v in b.vectors() {
            vectors.push(u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect());
        }
    }
    Basis::new(vectors)
}

/// The fixed reference MUB set for `d`; index 0 is the computational basis.
pub fn standard_mubs(d: usize) -> Result<MubSet> {
    let bases = match d {
        2 | 3 | 5 | 7 => prime_mub_eigenbases(d)?
            .into_iter()
            .map(|e| e.basis)
            .collect(),
        4 => ququart_bases()?,
        6 => {
            let qubit = standard_mubs(2)?;
            let qutrit = standard_mubs(3)?;
            (0..3)
                .map(|i| tensor_basis(&qubit.bases[i], &qutrit.bases[i]))
                .collect::<Result<Vec<_>>>()?
        }
        _ => return Err(Error::UnsupportedDimension(d)),
    };
    MubSet::new(bases)
}

/// Replaces every basis vector `v` by `U v`.
pub fn rotate_mubs(mubs: &MubSet, u: &UnitaryMatrix) -> Result<MubSet> {
    if u.dim() != mubs.dim() {
        return Err(Error::DimensionMismatch {
            expected: mubs.dim(),
            found: u.dim(),
        });
    }
    Ok(MubSet {
        d: mubs.d,
        bases: mubs
            .bases
            .iter()
            .map(|b| Basis {
                vectors: b.vectors.iter().map(|v| u.mul_vec(v)).collect(),
            })
            .collect(),
    })
}

/// Rotates only the first `count` bases (no validation; used on hot paths).
pub(crate) fn rotate_prefix(mubs: &MubSet, u: &UnitaryMatrix, count: usize) -> MubSet {
    MubSet {
        d: mubs.d,
        bases: mubs.bases[..count]
            .iter()
            .map(|b| Basis {
                vectors: b.vectors.iter().map(|v| u.mul_vec(v)).collect(),
            })
            .collect(),
    }
}
