//! The local polytope: deterministic strategies, membership and white-noise
//! visibility.

mod certify;
mod layout;
mod simplex;

use crate::correlation::{extract, subsets, white_noise, Correlation, PairIndex, CORRELATION_TOL};
use crate::error::{Error, Result};
use crate::inequality::{next_tuple, BellInequality};

use layout::LpContext;
use simplex::{decode, encode, Options, Pricing, Status};

/// Visibility reported when the optimum exceeds it or is unbounded.
pub const DEFAULT_CAP: f64 = 4.0;

/// A correlation is nonlocal iff its visibility is below `1 - VIOLATION_TOL`.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Default limit for [`enumerate_vertices`].
pub const VERTEX_CAP: f64 = 1e5;

/// Enumeration is refused above this count whatever the caller's cap.
pub const HARD_VERTEX_CAP: f64 = 2e6;

/// Default pivot limit of a single visibility solve.
pub const COLUMN_CAP: usize = 10_000;

/// Fitting sweeps spent on a local model before falling back to a solve.
const FIT_SWEEPS: usize = 40;

/// Numerical breakdown of a visibility solve.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpFailure {
    #[error("no optimum after {0} pivots")]
    IterationLimit(usize),
    #[error("singular basis on refactorization")]
    SingularBasis,
    #[error("final basis infeasible (smallest weight {0:e})")]
    Infeasible(f64),
    #[error("basis residual {0:e} above tolerance")]
    Residual(f64),
}

/// A local deterministic strategy `x -> a`, `y -> b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub alice_map: Vec<usize>,
    pub bob_map: Vec<usize>,
}

impl DeterministicStrategy {
    /// The correlation `P(a,b|x,y) = [a = alice_map[x]] [b = bob_map[y]]`.
    pub fn correlation(&self, k: usize) -> Correlation {
        let (mu, nu) = (self.alice_map.len(), self.bob_map.len());
        let mut p = vec![0.0; mu * nu * k * k];
        for (x, &a) in self.alice_map.iter().enumerate() {
            for (y, &b) in self.bob_map.iter().enumerate() {
                p[((x * nu + y) * k + a) * k + b] = 1.0;
            }
        }
        Correlation::new(mu, nu, k, p).expect("consistent shape")
    }
}

/// Outcome of a visibility computation.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityResult {
    pub vstar: f64,
    pub cap_hit: bool,
    /// Convex weights over vertices reproducing `vstar P + (1 - vstar) P_w`.
    pub certificate: Option<Vec<(DeterministicStrategy, f64)>>,
}

impl VisibilityResult {
    pub fn violated(&self) -> bool {
        self.vstar < 1.0 - VIOLATION_TOL
    }

    fn capped(cap: f64) -> Self {
        Self {
            vstar: cap,
            cap_hit: true,
            certificate: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
}

/// All `k^mu k^nu` strategies, Alice's map most significant and the first
/// setting the leading digit of each map.
pub fn enumerate_vertices(mu: usize, nu: usize, k: usize) -> Result<Vec<DeterministicStrategy>> {
    enumerate_vertices_with_cap(mu, nu, k, VERTEX_CAP)
}

pub fn enumerate_vertices_with_cap(mu: usize, nu: usize, k: usize, cap: f64) -> Result<Vec<DeterministicStrategy>> {
    let count = (k as f64).powi((mu + nu) as i32);
    let cap = cap.min(HARD_VERTEX_CAP);
    if count > cap {
        return Err(Error::VertexCapExceeded { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut a = vec![0; mu];
    loop {
        let mut b = vec![0; nu];
        loop {
            out.push(DeterministicStrategy {
                alice_map: a.clone(),
                bob_map: b.clone(),
            });
            if !next_tuple(&mut b, k) {
                break;
            }
        }
        if !next_tuple(&mut a, k) {
            break;
        }
    }
    Ok(out)
}

fn check_correlation(p: &Correlation) -> Result<()> {
    if p.k() < 2 {
        return Err(Error::InvalidDimension(p.k()));
    }
    p.validate(CORRELATION_TOL)
}

fn check_cap(cap: f64) -> Result<()> {
    if !(cap.is_finite() && cap >= 1.0) {
        return Err(Error::OutOfRange {
            what: "visibility cap",
            value: cap,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    Ok(())
}

/// Solves the visibility LP for a valid correlation; `stop_at` ends the
/// solve early once a feasible visibility at least that large is found.
pub(crate) fn solve_visibility(
    p: &Correlation,
    cap: f64,
    stop_at: f64,
    explicit: Option<&[(u32, u32)]>,
    max_pivots: usize,
) -> std::result::Result<(VisibilityResult, Status), LpFailure> {
    let (mu, nu, k) = p.shape();
    let ctx = LpContext::get(mu, nu, k);
    let target = ctx.layout.coordinates(p);
    let opts = Options {
        cap,
        stop_at,
        max_pivots,
        pricing: explicit.map_or(Pricing::Oracle, Pricing::Explicit),
    };
    let sol = simplex::solve(&ctx, &target, &opts)?;
    if sol.status == Status::CapHit || sol.v >= cap {
        return Ok((VisibilityResult::capped(cap), Status::CapHit));
    }
    let certificate = sol
        .weights
        .iter()
        .map(|&(ai, bi, w)| {
            let mut alice_map = vec![0; mu];
            let mut bob_map = vec![0; nu];
            decode(ai, mu, k, &mut alice_map);
            decode(bi, nu, k, &mut bob_map);
            (DeterministicStrategy { alice_map, bob_map }, w)
        })
        .collect();
    Ok((
        VisibilityResult {
            vstar: sol.v.max(0.0),
            cap_hit: false,
            certificate: Some(certificate),
        },
        sol.status,
    ))
}

/// White-noise visibility against the explicitly enumerated vertex set.
pub fn visibility(p: &Correlation, cap: f64) -> Result<VisibilityResult> {
    check_correlation(p)?;
    check_cap(cap)?;
    let (mu, nu, k) = p.shape();
    let verts = enumerate_vertices(mu, nu, k)?;
    let ids: Vec<(u32, u32)> = verts
        .iter()
        .map(|v| (encode(&v.alice_map, k), encode(&v.bob_map, k)))
        .collect();
    Ok(solve_visibility(p, cap, f64::INFINITY, Some(&ids), COLUMN_CAP)?.0)
}

/// White-noise visibility with vertices generated on demand by a
/// best-response pricing oracle; no vertex list is materialized.
pub fn visibility_cg(p: &Correlation, cap: f64) -> Result<VisibilityResult> {
    visibility_cg_with_limit(p, cap, COLUMN_CAP)
}

pub fn visibility_cg_with_limit(p: &Correlation, cap: f64, max_columns: usize) -> Result<VisibilityResult> {
    check_correlation(p)?;
    check_cap(cap)?;
    Ok(solve_visibility(p, cap, f64::INFINITY, None, max_columns)?.0)
}

/// Inside iff the visibility is at least `1 - VIOLATION_TOL`.
pub fn membership(p: &Correlation) -> Result<Membership> {
    check_correlation(p)?;
    let (res, _) = solve_visibility(p, DEFAULT_CAP, 1.0, None, COLUMN_CAP)?;
    Ok(if res.violated() {
        Membership::Outside
    } else {
        Membership::Inside
    })
}

/// `(I_L - I(P_w)) / (I(P) - I(P_w))`, the noise tolerance certified by a
/// single inequality.
pub fn visibility_wrt_inequality(ineq: &BellInequality, p: &Correlation, cap: f64) -> Result<VisibilityResult> {
    check_cap(cap)?;
    let (mu, nu, k) = p.shape();
    let iw = ineq.evaluate(&white_noise(mu, nu, k))?;
    let ip = ineq.evaluate(p)?;
    let il = ineq.local_bound();
    if iw >= il {
        return Err(Error::Precondition(format!(
            "white noise value {iw} reaches the local bound {il}"
        )));
    }
    if ip <= iw {
        return Ok(VisibilityResult::capped(cap));
    }
    let v = (il - iw) / (ip - iw);
    if v >= cap {
        return Ok(VisibilityResult::capped(cap));
    }
    Ok(VisibilityResult {
        vstar: v,
        cap_hit: false,
        certificate: None,
    })
}

/// Minimum visibility over a family of setting selections.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionVisibility {
    pub result: VisibilityResult,
    /// Alice's and Bob's settings of a minimizing selection.
    pub alice_settings: Vec<usize>,
    pub bob_settings: Vec<usize>,
    /// Number of selections solved to optimality or stopped early.
    pub solves: usize,
    /// Number of selections settled by an explicit local model without a
    /// solve.
    pub certified: usize,
}

impl SelectionVisibility {
    /// The minimizing selection as a pair index when both sides chose two
    /// settings.
    pub fn pair(&self) -> Option<PairIndex> {
        match (self.alice_settings.as_slice(), self.bob_settings.as_slice()) {
            (&[x1, x2], &[y1, y2]) => Some(PairIndex { x1, x2, y1, y2 }),
            _ => None,
        }
    }
}

/// How hard to work on a minimum over selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Search {
    /// The exact minimum visibility.
    Exact,
    /// Only whether some selection is nonlocal; returns the first nonlocal
    /// selection found, or the minimum capped at 1 when all are local.
    Decision,
}

pub(crate) fn min_over_selections(
    p: &Correlation,
    selections: &[(Vec<usize>, Vec<usize>)],
    cap: f64,
    search: Search,
    screen: bool,
) -> Result<SelectionVisibility> {
    // Selections far from white noise tend to have low visibility; solving
    // them first makes the early-stop bound bite sooner.
    let mut order: Vec<(f64, usize, Correlation)> = selections
        .iter()
        .enumerate()
        .map(|(i, (xs, ys))| {
            let sub = extract(p, xs, ys)?;
            Ok((sub.noise_distance_sqr(), i, sub))
        })
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut best: Option<(VisibilityResult, usize)> = None;
    let (mut solves, mut certified) = (0, 0);
    for (_, i, sub) in &order {
        let bound = best.as_ref().map_or(f64::INFINITY, |b| b.0.vstar);
        let stop_at = match search {
            Search::Exact => bound,
            Search::Decision => bound.min(1.0),
        };
        // a local model at this level settles the selection without a solve
        let level = match search {
            Search::Exact => bound,
            Search::Decision => bound.min(1.0 - VIOLATION_TOL),
        };
        if screen && level.is_finite() && certify::local_model(sub, level, FIT_SWEEPS).is_some() {
            certified += 1;
            if best.is_none() {
                best = Some((
                    VisibilityResult {
                        vstar: 1.0,
                        cap_hit: false,
                        certificate: None,
                    },
                    *i,
                ));
            }
            continue;
        }
        let (res, status) = solve_visibility(sub, cap, stop_at, None, COLUMN_CAP)?;
        solves += 1;
        if status == Status::Stopped {
            // only certifies visibility >= stop_at
            if best.is_none() {
                best = Some((res, *i));
            }
            continue;
        }
        if res.vstar < bound || best.is_none() {
            let violated = res.violated();
            best = Some((res, *i));
            if search == Search::Decision && violated {
                break;
            }
        }
    }
    let (mut result, i) = best.ok_or(Error::EmptyFamily)?;
    if search == Search::Decision && !result.violated() && result.vstar > 1.0 {
        // early stops only certify visibility >= 1
        result = VisibilityResult {
            vstar: 1.0,
            cap_hit: false,
            certificate: None,
        };
    }
    Ok(SelectionVisibility {
        result,
        alice_settings: selections[i].0.clone(),
        bob_settings: selections[i].1.clone(),
        solves,
        certified,
    })
}

fn all_selections(mu: usize, nu: usize, ma: usize, mb: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let xs = subsets(mu, ma);
    let ys = subsets(nu, mb);
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

/// Visibility with respect to the two-setting-lifted polytope: the minimum
/// over all extracted `(2, 2; k)` sub-correlations.
pub fn min_visibility_over_pairs(p: &Correlation, cap: f64) -> Result<SelectionVisibility> {
    min_visibility_over_pairs_with(p, cap, Search::Exact)
}

pub fn min_visibility_over_pairs_with(p: &Correlation, cap: f64, search: Search) -> Result<SelectionVisibility> {
    check_correlation(p)?;
    check_cap(cap)?;
    let (mu, nu, _) = p.shape();
    if mu < 2 || nu < 2 {
        return Err(Error::Precondition(format!("pairs need mu, nu >= 2 (got {mu}, {nu})")));
    }
    min_over_selections(p, &all_selections(mu, nu, 2, 2), cap, search, true)
}

/// Minimum visibility over every `(m, m; k)` sub-correlation; `m = mu = nu`
/// is the visibility of the full correlation.
pub fn min_visibility_over_subsets(p: &Correlation, m: usize, cap: f64, search: Search) -> Result<SelectionVisibility> {
    check_correlation(p)?;
    check_cap(cap)?;
    let (mu, nu, _) = p.shape();
    if m < 2 || m > mu || m > nu {
        return Err(Error::Precondition(format!(
            "subset size {m} must lie in 2..=min({mu}, {nu})"
        )));
    }
    min_over_selections(p, &all_selections(mu, nu, m, m), cap, search, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{compute_correlation, mix};
    use crate::inequality::{chsh, cglmp, lift_outcomes, relabelings};
    use crate::mub::{rotate_mubs, standard_mubs, Basis, MubSet};
    use crate::quantum::{max_entangled_state, sample_haar_unitary, Stream, TrialSeed};
    use num_complex::Complex64;

    fn pr_box() -> Correlation {
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
        Correlation::new(2, 2, 2, p).unwrap()
    }

    fn real_basis(th: f64) -> Basis {
        let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
        Basis::new(vec![
            vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            vec![Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
        ])
        .unwrap()
    }

    fn tsirelson() -> Correlation {
        let q = std::f64::consts::FRAC_PI_4;
        let alice = MubSet::new(vec![real_basis(0.0), real_basis(2.0 * q)]).unwrap();
        let bob = MubSet::new(vec![real_basis(q), real_basis(-q)]).unwrap();
        compute_correlation(&max_entangled_state(2).unwrap(), &alice, &bob).unwrap()
    }

    pub(crate) fn random_quantum(d: usize, mu: usize, nu: usize, master_seed: u64, trial_index: u64) -> Correlation {
        let m = standard_mubs(d).unwrap();
        let seed = TrialSeed { master_seed, trial_index };
        let a = rotate_mubs(&m.take(mu).unwrap(), &sample_haar_unitary(d, seed, Stream::Alice).unwrap()).unwrap();
        let b = rotate_mubs(&m.take(nu).unwrap(), &sample_haar_unitary(d, seed, Stream::Bob).unwrap()).unwrap();
        compute_correlation(&max_entangled_state(d).unwrap(), &a, &b).unwrap()
    }

    fn check_certificate(p: &Correlation, r: &VisibilityResult) {
        let cert = r.certificate.as_ref().expect("certificate");
        let total: f64 = cert.iter().map(|c| c.1).sum();
        assert!((total - 1.0).abs() < 1e-8, "weights sum {total}");
        assert!(cert.iter().all(|c| c.1 >= 0.0));
        let (mu, nu, k) = p.shape();
        let target = mix(p, &white_noise(mu, nu, k), r.vstar).unwrap();
        let mut rec = vec![0.0; target.values().len()];
        for (s, w) in cert {
            for (r, v) in rec.iter_mut().zip(s.correlation(k).values()) {
                *r += w * v;
            }
        }
        for (a, b) in rec.iter().zip(target.values()) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(enumerate_vertices(2, 2, 2).unwrap().len(), 16);
        assert_eq!(enumerate_vertices(2, 2, 5).unwrap().len(), 625);
        let v = enumerate_vertices(4, 4, 3).unwrap();
        assert_eq!(v.len(), 6561);
        assert_eq!(v[1].bob_map, vec![0, 0, 0, 1]);
        assert!(matches!(enumerate_vertices(5, 5, 4), Err(Error::VertexCapExceeded { .. })));
        assert_eq!(enumerate_vertices_with_cap(5, 5, 4, 1e9).unwrap().len(), 1 << 20);
        assert!(enumerate_vertices_with_cap(5, 5, 5, 1e9).is_err());
    }

    #[test]
    fn noise_is_unbounded() {
        let r = visibility(&white_noise(2, 2, 3), DEFAULT_CAP).unwrap();
        assert!(r.cap_hit);
        assert_eq!(r.vstar, DEFAULT_CAP);
        assert!(visibility_cg(&white_noise(3, 2, 4), DEFAULT_CAP).unwrap().cap_hit);
    }

    #[test]
    fn pr_box_has_visibility_one_half() {
        for r in [visibility(&pr_box(), 4.0).unwrap(), visibility_cg(&pr_box(), 4.0).unwrap()] {
            assert!((r.vstar - 0.5).abs() < 1e-9, "{}", r.vstar);
            assert!(!r.cap_hit && r.violated());
            check_certificate(&pr_box(), &r);
        }
        assert_eq!(membership(&pr_box()).unwrap(), Membership::Outside);
    }

    #[test]
    fn tsirelson_visibility() {
        let p = tsirelson();
        let r = visibility(&p, 4.0).unwrap();
        assert!((r.vstar - 1.0 / 2f64.sqrt()).abs() < 1e-6);
        let wrt = visibility_wrt_inequality(&chsh(), &p, 4.0).unwrap();
        assert!((wrt.vstar - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((visibility_wrt_inequality(&chsh(), &pr_box(), 4.0).unwrap().vstar - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inequality_visibility_edge_cases() {
        let det = DeterministicStrategy {
            alice_map: vec![0, 0],
            bob_map: vec![0, 0],
        };
        // CHSH value 2 on this vertex
        let r = visibility_wrt_inequality(&chsh(), &det.correlation(2), 4.0).unwrap();
        assert!((r.vstar - 1.0).abs() < 1e-15);
        let r = visibility_wrt_inequality(&chsh(), &white_noise(2, 2, 2), 4.0).unwrap();
        assert!(r.cap_hit);
        let bad = BellInequality::new(2, 2, 2, &[1.0; 16], 2.0).unwrap();
        assert!(visibility_wrt_inequality(&bad, &pr_box(), 4.0).is_err());
    }

    #[test]
    fn vertices_are_inside() {
        for s in enumerate_vertices(2, 2, 3).unwrap().iter().step_by(7) {
            let p = s.correlation(3);
            assert_eq!(membership(&p).unwrap(), Membership::Inside);
            let r = visibility(&p, 4.0).unwrap();
            assert!(r.vstar >= 1.0 - 1e-9);
        }
        assert_eq!(membership(&white_noise(2, 2, 2)).unwrap(), Membership::Inside);
    }

    #[test]
    fn dense_and_oracle_pricing_agree() {
        for t in 0..30 {
            let p = random_quantum(3, 2, 2, 99, t);
            let a = visibility(&p, 4.0).unwrap();
            let b = visibility_cg(&p, 4.0).unwrap();
            assert_eq!(a.cap_hit, b.cap_hit);
            assert!((a.vstar - b.vstar).abs() < 1e-6, "{} vs {}", a.vstar, b.vstar);
            if !a.cap_hit {
                check_certificate(&p, &a);
                check_certificate(&p, &b);
            }
        }
    }

    #[test]
    fn visibility_bounded_by_inequalities() {
        let fam = relabelings(&cglmp(3).unwrap())
            .unwrap()
            .union(&relabelings(&lift_outcomes(&chsh(), 3).unwrap()).unwrap())
            .unwrap();
        for t in 0..40 {
            let p = random_quantum(3, 2, 2, 5, t);
            let v = visibility_cg(&p, 4.0).unwrap().vstar;
            for m in fam.members() {
                let wi = visibility_wrt_inequality(m, &p, 4.0).unwrap().vstar;
                assert!(v <= wi + 1e-9);
            }
        }
    }

    #[test]
    fn pair_minimum_matches_individual_solves() {
        for t in 0..10 {
            let p = random_quantum(3, 3, 3, 7, t);
            let got = min_visibility_over_pairs(&p, 4.0).unwrap();
            let mut best = f64::INFINITY;
            for idx in crate::correlation::all_pair_indices(3, 3).unwrap() {
                let sub = crate::correlation::extract_two_setting(&p, idx).unwrap();
                best = best.min(visibility(&sub, 4.0).unwrap().vstar);
            }
            assert!((got.result.vstar - best).abs() < 1e-9, "{} vs {best}", got.result.vstar);
            let idx = got.pair().unwrap();
            let at = visibility(&crate::correlation::extract_two_setting(&p, idx).unwrap(), 4.0).unwrap();
            assert!((at.vstar - best).abs() < 1e-9);

            let dec = min_visibility_over_pairs_with(&p, 4.0, Search::Decision).unwrap();
            assert_eq!(dec.result.violated(), got.result.violated());
        }
        let single = random_quantum(3, 2, 2, 7, 0);
        let a = min_visibility_over_pairs(&single, 4.0).unwrap();
        assert!((a.result.vstar - visibility(&single, 4.0).unwrap().vstar).abs() < 1e-12);
    }

    #[test]
    fn screening_does_not_change_results() {
        let pairs = all_selections(3, 3, 2, 2);
        let mut seen_violation = false;
        for (d, seed) in [(3, 31), (4, 32), (5, 33)] {
            for t in 0..25 {
                let p = random_quantum(d, 3, 3, seed, t);
                for search in [Search::Exact, Search::Decision] {
                    let fast = min_over_selections(&p, &pairs, 4.0, search, true).unwrap();
                    let slow = min_over_selections(&p, &pairs, 4.0, search, false).unwrap();
                    assert_eq!(fast.result.violated(), slow.result.violated());
                    seen_violation |= slow.result.violated();
                    if search == Search::Exact {
                        assert!((fast.result.vstar - slow.result.vstar).abs() < 1e-9);
                    }
                }
            }
        }
        assert!(seen_violation);
    }

    #[test]
    fn full_subset_is_direct_visibility() {
        let p = random_quantum(3, 3, 3, 11, 2);
        let full = min_visibility_over_subsets(&p, 3, 4.0, Search::Exact).unwrap();
        let direct = visibility(&p, 4.0).unwrap();
        assert!((full.result.vstar - direct.vstar).abs() < 1e-9);
        let pairs = min_visibility_over_subsets(&p, 2, 4.0, Search::Exact).unwrap();
        let lifted = min_visibility_over_pairs(&p, 4.0).unwrap();
        assert!((pairs.result.vstar - lifted.result.vstar).abs() < 1e-12);
        assert!(full.result.vstar <= pairs.result.vstar + 1e-9);
        assert!(min_visibility_over_subsets(&p, 4, 4.0, Search::Exact).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(visibility(&pr_box(), 0.5).is_err());
        let bad = Correlation::new(2, 2, 2, vec![0.5; 16]).unwrap();
        assert!(visibility(&bad, 4.0).is_err());
        assert!(min_visibility_over_pairs(&random_quantum(3, 2, 1, 1, 1), 4.0).is_err());
    }
}
