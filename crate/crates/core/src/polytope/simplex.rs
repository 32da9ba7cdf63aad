//! Revised simplex for the visibility LP
//!
//! ```text
//! maximize v  subject to  sum_j q_j D_j + v (N - P) = N,  q >= 0,  0 <= v <= cap
//! ```
//!
//! in Collins-Gisin coordinates, where `N` is white noise and the `D_j` are
//! deterministic strategies. The basis inverse is kept explicitly and
//! updated by rank-one pivots. Vertex columns are never stored: pricing
//! either scans an explicit list or runs a best-response oracle.

use super::layout::{LpContext, Layout};
use super::LpFailure;

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Col {
    V,
    Vertex { alice: u32, bob: u32 },
}

pub(crate) enum Pricing<'a> {
    Oracle,
    Explicit(&'a [(u32, u32)]),
}

pub(crate) struct Options<'a> {
    pub cap: f64,
    /// Return as soon as a feasible `v >= stop_at` is found.
    pub stop_at: f64,
    pub max_pivots: usize,
    pub pricing: Pricing<'a>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Optimal,
    CapHit,
    Stopped,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub v: f64,
    pub status: Status,
    /// Basic vertex columns with their weights (empty on a cap hit).
    pub weights: Vec<(u32, u32, f64)>,
}

pub(crate) fn decode(mut id: u32, n: usize, k: usize, out: &mut [usize]) {
    for slot in out[..n].iter_mut().rev() {
        *slot = id as usize % k;
        id /= k as u32;
    }
}

pub(crate) fn encode(map: &[usize], k: usize) -> u32 {
    map.iter().fold(0u32, |acc, &a| acc * k as u32 + a as u32)
}

struct Engine<'c> {
    ctx: &'c LpContext,
    m: usize,
    binv: Vec<f64>,
    x: Vec<f64>,
    b: Vec<f64>,
    g: Vec<f64>,
    basis: Vec<Col>,
    v_row: Option<usize>,
    w: Vec<f64>,
    rows: Vec<usize>,
    alice: Vec<usize>,
    bob: Vec<usize>,
    pivots: usize,
    since_refactor: usize,
}

/// Solve with a few perturbation scales before giving up.
pub(crate) fn solve(ctx: &LpContext, target: &[f64], opts: &Options) -> Result<Solution, LpFailure> {
    let mut last = None;
    for (attempt, scale) in [1e-10, 1e-11, 1e-9].into_iter().enumerate() {
        match Engine::new(ctx, target, scale, attempt as u64).run(opts) {
            Ok(s) => return Ok(s),
            Err(e @ LpFailure::IterationLimit(_)) => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

impl<'c> Engine<'c> {
    fn new(ctx: &'c LpContext, target: &[f64], scale: f64, attempt: u64) -> Self {
        let l = ctx.layout;
        let m = l.m;
        let basis: Vec<Col> = ctx
            .start_alice
            .iter()
            .flat_map(|a| {
                ctx.start_bob.iter().map(move |b| Col::Vertex {
                    alice: encode(a, l.k),
                    bob: encode(b, l.k),
                })
            })
            .collect();
        let g: Vec<f64> = ctx.noise.iter().zip(target).map(|(n, p)| n - p).collect();
        let mut engine = Self {
            ctx,
            m,
            binv: ctx.start_inverse.clone(),
            x: ctx.start_x.clone(),
            b: ctx.noise.clone(),
            g,
            basis,
            v_row: None,
            w: vec![0.0; m],
            rows: Vec::with_capacity((l.mu + 1) * (l.nu + 1)),
            alice: vec![0; l.mu],
            bob: vec![0; l.nu],
            pivots: 0,
            since_refactor: 0,
        };
        // Shift the basic solution off degenerate vertices; the right-hand
        // side moves with it so the basis stays consistent.
        let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ attempt.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        for j in 0..m {
            state = crate::quantum::splitmix64(state);
            let delta = scale * (0.5 + 0.5 * (state >> 11) as f64 / (1u64 << 53) as f64);
            engine.x[j] += delta;
            engine.column_rows(engine.basis[j]);
            for &r in &engine.rows {
                engine.b[r] += delta;
            }
        }
        engine
    }

    fn column_rows(&mut self, col: Col) {
        let l: Layout = self.ctx.layout;
        if let Col::Vertex { alice, bob } = col {
            decode(alice, l.mu, l.k, &mut self.alice);
            decode(bob, l.nu, l.k, &mut self.bob);
            l.vertex_rows(&self.alice, &self.bob, &mut self.rows);
        }
    }

    /// `w = B^-1 a` for the entering column.
    fn ftran(&mut self, col: Col) {
        let m = self.m;
        self.w.iter_mut().for_each(|v| *v = 0.0);
        match col {
            Col::V => {
                for (c, &gc) in self.g.iter().enumerate() {
                    if gc != 0.0 {
                        let src = &self.binv[c * m..(c + 1) * m];
                        for (wi, &s) in self.w.iter_mut().zip(src) {
                            *wi += s * gc;
                        }
                    }
                }
            }
            Col::Vertex { .. } => {
                self.column_rows(col);
                for &r in &self.rows {
                    let src = &self.binv[r * m..(r + 1) * m];
                    for (wi, &s) in self.w.iter_mut().zip(src) {
                        *wi += s;
                    }
                }
            }
        }
    }

    /// Most negative reduced cost `y . D_j` with `y` row `r` of `B^-1`.
    fn price(&self, r: usize, pricing: &Pricing) -> (f64, Col) {
        let m = self.m;
        let y: Vec<f64> = (0..m).map(|j| self.binv[j * m + r]).collect();
        match pricing {
            Pricing::Explicit(list) => {
                let l = self.ctx.layout;
                let mut best = (f64::INFINITY, Col::V);
                let (mut a, mut b, mut rows) = (vec![0; l.mu], vec![0; l.nu], Vec::new());
                for &(ai, bi) in list.iter() {
                    decode(ai, l.mu, l.k, &mut a);
                    decode(bi, l.nu, l.k, &mut b);
                    l.vertex_rows(&a, &b, &mut rows);
                    let rc: f64 = rows.iter().map(|&i| y[i]).sum();
                    if rc < best.0 {
                        best = (rc, Col::Vertex { alice: ai, bob: bi });
                    }
                }
                best
            }
            Pricing::Oracle => best_response(&self.ctx.layout, &y),
        }
    }

    fn refactor(&mut self) -> Result<(), LpFailure> {
        let m = self.m;
        let mut dense = vec![0.0; m * m];
        for j in 0..m {
            match self.basis[j] {
                Col::V => {
                    for i in 0..m {
                        dense[i * m + j] = self.g[i];
                    }
                }
                col => {
                    self.column_rows(col);
                    for &r in &self.rows {
                        dense[r * m + j] = 1.0;
                    }
                }
            }
        }
        self.binv = super::layout::invert_to_col_major(m, dense).ok_or(LpFailure::SingularBasis)?;
        self.x = self.mul_binv(&self.b);
        self.since_refactor = 0;
        Ok(())
    }

    fn mul_binv(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (c, &rc) in rhs.iter().enumerate() {
            if rc != 0.0 {
                for (o, &s) in out.iter_mut().zip(&self.binv[c * m..(c + 1) * m]) {
                    *o += s * rc;
                }
            }
        }
        out
    }

    fn pivot(&mut self, p: usize, theta: f64, entering: Col) {
        let m = self.m;
        for (xi, &wi) in self.x.iter_mut().zip(&self.w) {
            *xi -= theta * wi;
        }
        self.x[p] = theta;
        let wp = self.w[p];
        for c in 0..m {
            let col = &mut self.binv[c * m..(c + 1) * m];
            let t = col[p] / wp;
            if t != 0.0 {
                for (ci, &wi) in col.iter_mut().zip(&self.w) {
                    *ci -= wi * t;
                }
                col[p] = t;
            }
        }
        self.basis[p] = entering;
        if entering == Col::V {
            self.v_row = Some(p);
        }
        self.pivots += 1;
        self.since_refactor += 1;
    }

    /// Basic solution for the unperturbed right-hand side, checked for
    /// feasibility and residual.
    fn finish(&mut self, status: Status) -> Result<Solution, LpFailure> {
        let x = self.mul_binv(&self.ctx.noise);
        let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -FEAS_TOL {
            return Err(LpFailure::Infeasible(min));
        }
        let mut resid = self.ctx.noise.clone();
        for j in 0..self.m {
            match self.basis[j] {
                Col::V => resid.iter_mut().zip(&self.g).for_each(|(r, g)| *r -= x[j] * g),
                col => {
                    self.column_rows(col);
                    for &r in &self.rows {
                        resid[r] -= x[j];
                    }
                }
            }
        }
        let res = resid.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if res > RESIDUAL_TOL {
            return Err(LpFailure::Residual(res));
        }
        let v = self.v_row.map_or(0.0, |r| x[r]);
        let weights = self
            .basis
            .iter()
            .zip(&x)
            .filter_map(|(c, &xi)| match *c {
                Col::Vertex { alice, bob } if xi > 0.0 => Some((alice, bob, xi)),
                _ => None,
            })
            .collect();
        Ok(Solution {
            v,
            status,
            weights,
        })
    }

    fn cap_hit(&self, cap: f64) -> Solution {
        Solution {
            v: cap,
            status: Status::CapHit,
            weights: Vec::new(),
        }
    }

    fn run(mut self, opts: &Options) -> Result<Solution, LpFailure> {
        let m = self.m;
        let refactor_every = (8 * m).max(64);
        let mut refactors_at_end = 0;
        loop {
            if self.pivots >= opts.max_pivots {
                return Err(LpFailure::IterationLimit(self.pivots));
            }
            if self.since_refactor >= refactor_every {
                self.refactor()?;
            }
            let entering = match self.v_row {
                None => Col::V,
                Some(r) => {
                    let (rc, col) = self.price(r, &opts.pricing);
                    if rc >= -PRICE_TOL {
                        match self.finish(Status::Optimal) {
                            Err(LpFailure::Residual(_)) if refactors_at_end < 2 => {
                                refactors_at_end += 1;
                                self.refactor()?;
                                continue;
                            }
                            other => return other,
                        }
                    }
                    col
                }
            };
            self.ftran(entering);

            // Harris ratio test: bound the step with slack, then take the
            // largest pivot within the bound.
            let mut bound = f64::INFINITY;
            for (&xi, &wi) in self.x.iter().zip(&self.w) {
                if wi > PIVOT_TOL {
                    bound = bound.min((xi.max(0.0) + HARRIS_TOL) / wi);
                }
            }
            let mut leave: Option<usize> = None;
            for (i, (&xi, &wi)) in self.x.iter().zip(&self.w).enumerate() {
                if wi > PIVOT_TOL && xi.max(0.0) / wi <= bound && leave.is_none_or(|l| wi > self.w[l]) {
                    leave = Some(i);
                }
            }
            let cap_theta = match self.v_row {
                None => opts.cap,
                Some(r) => (opts.cap - self.x[r]) / -self.w[r],
            };
            let Some(p) = leave else {
                return Ok(self.cap_hit(opts.cap));
            };
            let theta = self.x[p].max(0.0) / self.w[p];
            if theta >= cap_theta {
                return Ok(self.cap_hit(opts.cap));
            }
            self.pivot(p, theta, entering);
            if let Some(r) = self.v_row {
                if self.x[r] >= opts.stop_at {
                    match self.finish(Status::Stopped) {
                        Ok(s) if s.v >= opts.stop_at - FEAS_TOL => return Ok(s),
                        Ok(_) | Err(LpFailure::Residual(_)) => self.refactor()?,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
}

/// Minimum of `y . D` over all deterministic strategies: Alice's maps are
/// enumerated depth first, Bob answers setting by setting.
pub(crate) fn best_response(l: &Layout, y: &[f64]) -> (f64, Col) {
    let (mu, nu, k, nb) = (l.mu, l.nu, l.k, l.nb);
    // partial[level] holds sum of y rows selected by the first `level` settings
    let mut partial = vec![0.0; (mu + 1) * nb];
    partial[..nb].copy_from_slice(&y[..nb]);
    let mut alice = vec![0usize; mu];
    let mut best = (f64::INFINITY, Col::V);
    let mut bob = vec![0usize; nu];
    let mut best_bob = vec![0usize; nu];

    fn recurse(
        level: usize,
        l: &Layout,
        y: &[f64],
        partial: &mut [f64],
        alice: &mut [usize],
        bob: &mut [usize],
        best_bob: &mut [usize],
        best: &mut (f64, Col),
    ) {
        let (mu, nu, k, nb) = (l.mu, l.nu, l.k, l.nb);
        if level == mu {
            let r = &partial[mu * nb..(mu + 1) * nb];
            let mut val = r[0];
            for (yb, slot) in bob.iter_mut().enumerate() {
                let base = 1 + yb * (k - 1);
                let (mut m, mut arg) = (0.0, k - 1);
                for b in 0..k - 1 {
                    if r[base + b] < m {
                        m = r[base + b];
                        arg = b;
                    }
                }
                val += m;
                *slot = arg;
            }
            if val < best.0 {
                best.0 = val;
                best.1 = Col::Vertex {
                    alice: encode(alice, k),
                    bob: 0,
                };
                best_bob[..nu].copy_from_slice(bob);
            }
            return;
        }
        for a in 0..k {
            alice[level] = a;
            let (head, tail) = partial.split_at_mut((level + 1) * nb);
            let src = &head[level * nb..];
            let dst = &mut tail[..nb];
            if a < k - 1 {
                let row = 1 + level * (k - 1) + a;
                let yr = &y[row * nb..(row + 1) * nb];
                for ((d, &s), &add) in dst.iter_mut().zip(src).zip(yr) {
                    *d = s + add;
                }
            } else {
                dst.copy_from_slice(src);
            }
            recurse(level + 1, l, y, partial, alice, bob, best_bob, best);
        }
    }

    recurse(0, l, y, &mut partial, &mut alice, &mut bob, &mut best_bob, &mut best);
    if let Col::Vertex { alice, .. } = best.1 {
        best.1 = Col::Vertex {
            alice,
            bob: encode(&best_bob, k),
        };
    }
    best
}
