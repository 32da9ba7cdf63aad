//! Locality certificates by iterative proportional fitting.
//!
//! A correlation is local iff some joint distribution `J` over all of
//! Alice's and Bob's outcomes `(a_0, .., b_0, ..)` has every `P(., .|x, y)`
//! as a pairwise marginal. Proportional fitting drives `J` towards such a
//! distribution; the remaining marginal residual is then removed exactly by
//! an additive correction spread uniformly over the other coordinates. If
//! the corrected table is nonnegative it is an explicit local model.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::correlation::Correlation;

/// Largest joint table attempted.
pub(crate) const MAX_CELLS: usize = 1 << 17;

#[derive(Debug)]
struct Tables {
    cells: usize,
    /// `pair[(x * nu + y) * cells + cell] = a_x * k + b_y`
    pair: Vec<u16>,
    /// `alice[x * cells + cell] = a_x`, `bob[y * cells + cell] = b_y`
    alice: Vec<u8>,
    bob: Vec<u8>,
}

impl Tables {
    fn build(mu: usize, nu: usize, k: usize) -> Self {
        let cells = k.pow((mu + nu) as u32);
        let mut pair = vec![0u16; mu * nu * cells];
        let mut alice = vec![0u8; mu * cells];
        let mut bob = vec![0u8; nu * cells];
        let mut digits = vec![0usize; mu + nu];
        for cell in 0..cells {
            let mut rest = cell;
            for slot in digits.iter_mut().rev() {
                *slot = rest % k;
                rest /= k;
            }
            for x in 0..mu {
                alice[x * cells + cell] = digits[x] as u8;
                for y in 0..nu {
                    pair[(x * nu + y) * cells + cell] = (digits[x] * k + digits[mu + y]) as u16;
                }
            }
            for y in 0..nu {
                bob[y * cells + cell] = digits[mu + y] as u8;
            }
        }
        Self { cells, pair, alice, bob }
    }

    fn get(mu: usize, nu: usize, k: usize) -> Arc<Tables> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<Tables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("table cache");
        guard
            .entry((mu, nu, k))
            .or_insert_with(|| Arc::new(Self::build(mu, nu, k)))
            .clone()
    }
}

/// A joint distribution reproducing `c P + (1 - c) P_w`, if one is found
/// within `max_sweeps` fitting sweeps.
pub(crate) fn local_model(p: &Correlation, c: f64, max_sweeps: usize) -> Option<Vec<f64>> {
    let (mu, nu, k) = p.shape();
    let cells = k.checked_pow((mu + nu) as u32)?;
    if cells > MAX_CELLS || k > 255 {
        return None;
    }
    let t = Tables::get(mu, nu, k);
    let kk = k * k;
    let noise = (1.0 - c) / kk as f64;
    let target: Vec<f64> = p.values().iter().map(|v| c * v + noise).collect();
    if target.iter().any(|&v| v < 0.0) {
        return None;
    }
    let mut joint = vec![1.0 / cells as f64; cells];
    let mut marg = vec![0.0; mu * nu * kk];
    let mut factor = vec![0.0; kk];
    for _ in 0..max_sweeps {
        for xy in 0..mu * nu {
            let idx = &t.pair[xy * cells..(xy + 1) * cells];
            let m = &mut marg[..kk];
            m.iter_mut().for_each(|v| *v = 0.0);
            for (&i, &j) in idx.iter().zip(&joint) {
                m[i as usize] += j;
            }
            let goal = &target[xy * kk..(xy + 1) * kk];
            for ((f, &have), &want) in factor.iter_mut().zip(m.iter()).zip(goal) {
                *f = if have > 0.0 {
                    want / have
                } else if want > 0.0 {
                    return None;
                } else {
                    0.0
                };
            }
            for (j, &i) in joint.iter_mut().zip(idx) {
                *j *= factor[i as usize];
            }
        }
        if let Some(model) = corrected(&t, mu, nu, k, &joint, &target, &mut marg) {
            return Some(model);
        }
    }
    None
}

/// `joint` plus the exact correction of its marginal residual, when the
/// result is nonnegative.
fn corrected(t: &Tables, mu: usize, nu: usize, k: usize, joint: &[f64], target: &[f64], marg: &mut [f64]) -> Option<Vec<f64>> {
    let cells = t.cells;
    let kk = k * k;
    marg.iter_mut().for_each(|v| *v = 0.0);
    for xy in 0..mu * nu {
        let idx = &t.pair[xy * cells..(xy + 1) * cells];
        let m = &mut marg[xy * kk..(xy + 1) * kk];
        for (&i, &j) in idx.iter().zip(joint) {
            m[i as usize] += j;
        }
    }
    // residuals: pairwise E, single-party e_A (averaged over y) and e_B
    let mut resid: Vec<f64> = target.iter().zip(marg.iter()).map(|(a, b)| a - b).collect();
    let mut ea = vec![0.0; mu * k];
    let mut eb = vec![0.0; nu * k];
    for x in 0..mu {
        for y in 0..nu {
            let e = &resid[(x * nu + y) * kk..(x * nu + y + 1) * kk];
            for a in 0..k {
                for b in 0..k {
                    ea[x * k + a] += e[a * k + b] / nu as f64;
                    eb[y * k + b] += e[a * k + b] / mu as f64;
                }
            }
        }
    }
    let inv_k = 1.0 / k as f64;
    for x in 0..mu {
        for y in 0..nu {
            let e = &mut resid[(x * nu + y) * kk..(x * nu + y + 1) * kk];
            for a in 0..k {
                for b in 0..k {
                    e[a * k + b] -= (ea[x * k + a] + eb[y * k + b]) * inv_k;
                }
            }
        }
    }
    // each lifted term is spread uniformly over the remaining coordinates
    let pair_scale = inv_k.powi((mu + nu - 2) as i32);
    let single_scale = inv_k.powi((mu + nu - 1) as i32);
    let mut out = joint.to_vec();
    for (cell, o) in out.iter_mut().enumerate() {
        let mut d = 0.0;
        for xy in 0..mu * nu {
            d += resid[xy * kk + t.pair[xy * cells + cell] as usize];
        }
        let mut s = 0.0;
        for x in 0..mu {
            s += ea[x * k + t.alice[x * cells + cell] as usize];
        }
        for y in 0..nu {
            s += eb[y * k + t.bob[y * cells + cell] as usize];
        }
        *o += d * pair_scale + s * single_scale;
        if *o < 0.0 {
            return None;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{mix, white_noise};
    use crate::polytope::tests::random_quantum;

    fn marginals_match(p: &Correlation, c: f64, model: &[f64]) -> f64 {
        let (mu, nu, k) = p.shape();
        let target = mix(p, &white_noise(mu, nu, k), c).unwrap();
        let t = Tables::build(mu, nu, k);
        let mut worst: f64 = 0.0;
        for xy in 0..mu * nu {
            let mut m = vec![0.0; k * k];
            for (cell, &j) in model.iter().enumerate() {
                m[t.pair[xy * t.cells + cell] as usize] += j;
            }
            for (i, v) in m.iter().enumerate() {
                worst = worst.max((v - target.values()[xy * k * k + i]).abs());
            }
        }
        worst
    }

    #[test]
    fn certificates_reproduce_the_target() {
        let mut found = 0;
        for (d, mu) in [(3, 2), (4, 2), (7, 2), (3, 3)] {
            for trial in 0..5 {
                let p = random_quantum(d, mu, mu, 21, trial);
                for c in [0.3, 0.9] {
                    if let Some(model) = local_model(&p, c, 60) {
                        found += 1;
                        assert!(model.iter().all(|&v| v >= 0.0));
                        assert!(marginals_match(&p, c, &model) < 1e-13);
                    }
                }
            }
        }
        assert!(found > 20, "{found}");
    }

    #[test]
    fn nonlocal_targets_are_never_certified() {
        // the PR box stays nonlocal for any mixing weight above 1/2
        let mut p = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        p.push(if (a ^ b) == x * y { 0.5 } else { 0.0 });
                    }
                }
            }
        }
        let pr = Correlation::new(2, 2, 2, p).unwrap();
        assert!(local_model(&pr, 0.55, 500).is_none());
        assert!(local_model(&pr, 0.45, 500).is_some());
    }
}
