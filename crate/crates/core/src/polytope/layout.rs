//! Collins-Gisin coordinates and the cached starting basis.
//!
//! A no-signaling correlation is determined by the joint probabilities with
//! `a, b < k-1` together with the marginals. Alice's coordinate index is `0`
//! for the empty event and `1 + x(k-1) + a` for `(a|x)`, `a < k-1`; Bob
//! likewise. Row `iA * nb + iB` holds the probability of both events, so a
//! deterministic strategy maps to an outer product of 0/1 vectors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::correlation::Correlation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Layout {
    pub mu: usize,
    pub nu: usize,
    pub k: usize,
    pub na: usize,
    pub nb: usize,
    pub m: usize,
}

impl Layout {
    pub fn new(mu: usize, nu: usize, k: usize) -> Self {
        let na = mu * (k - 1) + 1;
        let nb = nu * (k - 1) + 1;
        Self {
            mu,
            nu,
            k,
            na,
            nb,
            m: na * nb,
        }
    }

    /// Coordinates switched on by a local map `setting -> outcome`.
    pub fn support(k: usize, map: &[usize], out: &mut Vec<usize>) {
        out.clear();
        out.push(0);
        for (x, &a) in map.iter().enumerate() {
            if a < k - 1 {
                out.push(1 + x * (k - 1) + a);
            }
        }
    }

    /// Rows equal to one in the column of the strategy `(alice, bob)`.
    pub fn vertex_rows(&self, alice: &[usize], bob: &[usize], out: &mut Vec<usize>) {
        let (mut sa, mut sb) = (Vec::with_capacity(self.mu + 1), Vec::with_capacity(self.nu + 1));
        Self::support(self.k, alice, &mut sa);
        Self::support(self.k, bob, &mut sb);
        out.clear();
        for &ia in &sa {
            for &ib in &sb {
                out.push(ia * self.nb + ib);
            }
        }
    }

    /// Coordinates of `p`; marginals are averaged over the other party's
    /// setting.
    pub fn coordinates(&self, p: &Correlation) -> Vec<f64> {
        let (mu, nu, k) = (self.mu, self.nu, self.k);
        let mut c = vec![0.0; self.m];
        c[0] = 1.0;
        for x in 0..mu {
            for a in 0..k - 1 {
                let ia = 1 + x * (k - 1) + a;
                c[ia * self.nb] = (0..nu).map(|y| p.alice_marginal(x, y, a)).sum::<f64>() / nu as f64;
            }
        }
        for y in 0..nu {
            for b in 0..k - 1 {
                let ib = 1 + y * (k - 1) + b;
                c[ib] = (0..mu).map(|x| p.bob_marginal(x, y, b)).sum::<f64>() / mu as f64;
                for x in 0..mu {
                    for a in 0..k - 1 {
                        let ia = 1 + x * (k - 1) + a;
                        c[ia * self.nb + ib] = p.get(x, y, a, b);
                    }
                }
            }
        }
        c
    }

    /// Coordinates of the uniform correlation.
    pub fn noise_coordinates(&self) -> Vec<f64> {
        let q = 1.0 / self.k as f64;
        let side = |n: usize| {
            let mut v = vec![q; n];
            v[0] = 1.0;
            v
        };
        let (wa, wb) = (side(self.na), side(self.nb));
        let mut c = vec![0.0; self.m];
        for ia in 0..self.na {
            for ib in 0..self.nb {
                c[ia * self.nb + ib] = wa[ia] * wb[ib];
            }
        }
        c
    }
}

/// Local maps whose supports form a basis of one party's coordinate space:
/// the `k` constant maps, then for every setting `x >= 1` and `t < k-1` the
/// map sending `x` to `t` and every other setting to `k-1`.
pub(crate) fn start_maps(n_settings: usize, k: usize) -> Vec<Vec<usize>> {
    let mut maps: Vec<Vec<usize>> = (0..k).map(|t| vec![t; n_settings]).collect();
    for x in 1..n_settings {
        for t in 0..k - 1 {
            let mut m = vec![k - 1; n_settings];
            m[x] = t;
            maps.push(m);
        }
    }
    maps
}

/// Inverse of a dense `n x n` row-major matrix by Gauss-Jordan elimination
/// with partial pivoting, returned column-major.
pub(crate) fn invert_to_col_major(n: usize, mut a: Vec<f64>) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let d = 1.0 / a[col * n + col];
        for j in 0..n {
            a[col * n + j] *= d;
            inv[col * n + j] *= d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[i * n + j] -= f * a[col * n + j];
                inv[i * n + j] -= f * inv[col * n + j];
            }
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = inv[i * n + j];
        }
    }
    Some(out)
}

/// Scenario data shared by every solve: the starting basis, its inverse and
/// the noise coordinates.
#[derive(Debug)]
pub(crate) struct LpContext {
    pub layout: Layout,
    pub start_alice: Vec<Vec<usize>>,
    pub start_bob: Vec<Vec<usize>>,
    /// Column-major inverse of the starting basis.
    pub start_inverse: Vec<f64>,
    pub noise: Vec<f64>,
    /// Starting basic solution for the noise right-hand side.
    pub start_x: Vec<f64>,
}

impl LpContext {
    fn build(mu: usize, nu: usize, k: usize) -> Self {
        let layout = Layout::new(mu, nu, k);
        let start_alice = start_maps(mu, k);
        let start_bob = start_maps(nu, k);
        let side_inverse = |maps: &[Vec<usize>], n: usize| {
            let mut dense = vec![0.0; n * n];
            let mut s = Vec::new();
            for (j, map) in maps.iter().enumerate() {
                Layout::support(k, map, &mut s);
                for &i in &s {
                    dense[i * n + j] = 1.0;
                }
            }
            invert_to_col_major(n, dense).expect("starting maps span the coordinate space")
        };
        let (na, nb, m) = (layout.na, layout.nb, layout.m);
        let ia = side_inverse(&start_alice, na);
        let ib = side_inverse(&start_bob, nb);
        // (A (x) B)^-1 = A^-1 (x) B^-1; basis column ja * nb + jb
        let mut start_inverse = vec![0.0; m * m];
        for ja in 0..na {
            for jb in 0..nb {
                let col = ja * nb + jb;
                for ra in 0..na {
                    let va = ia[col_major(na, ra, ja)];
                    for rb in 0..nb {
                        start_inverse[col * m + ra * nb + rb] = va * ib[col_major(nb, rb, jb)];
                    }
                }
            }
        }
        let noise = layout.noise_coordinates();
        let mut start_x = vec![0.0; m];
        for (c, &bc) in noise.iter().enumerate() {
            if bc != 0.0 {
                for (i, xi) in start_x.iter_mut().enumerate() {
                    *xi += start_inverse[c * m + i] * bc;
                }
            }
        }
        Self {
            layout,
            start_alice,
            start_bob,
            start_inverse,
            noise,
            start_x,
        }
    }

    /// Shared context for the scenario, built on first use.
    pub fn get(mu: usize, nu: usize, k: usize) -> Arc<LpContext> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<LpContext>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = cache.lock().expect("context cache").get(&(mu, nu, k)) {
            return c.clone();
        }
        let built = Arc::new(Self::build(mu, nu, k));
        cache
            .lock()
            .expect("context cache")
            .entry((mu, nu, k))
            .or_insert(built)
            .clone()
    }
}

#[inline]
fn col_major(n: usize, row: usize, col: usize) -> usize {
    col * n + row
}
