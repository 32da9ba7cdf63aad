//! Acceptance criteria: reduced-sample replications of the published tables,
//! the rare-event re-test and the property suites. Each test prints one
//! PASS/FAIL line.

use mubell_core::correlation::{check_no_signaling, mix, white_noise, Correlation, CORRELATION_TOL};
use mubell_core::estimator::{
    estimate, find_nonviolating, read_records_csv, trial_correlation, write_records_csv, EstimateSummary, Mode,
    StateSpec, TrialConfig,
};
use mubell_core::golden::{GoldenEntry, D6, D7, QUBIT, QUQUART, QUQUINT, QUTRIT};
use mubell_core::inequality::{chsh, cglmp, lift_outcomes, max_over_family, relabelings};
use mubell_core::mub::{rotate_mubs, standard_mubs};
use mubell_core::polytope::{
    membership, min_visibility_over_subsets, visibility, visibility_cg, visibility_wrt_inequality, Membership, Search,
    DEFAULT_CAP,
};
use mubell_core::quantum::{sample_haar_unitary, Stream, TrialSeed};
use mubell_core::stats::clopper_pearson;

const SEED: u64 = 20_260_101;

/// Written to the stdout handle directly so the line survives test capture.
fn report(criterion: u32, pass: bool, lines: &[String]) {
    use std::io::Write;
    let line = format!(
        "{} criterion {criterion}: {}\n",
        if pass { "PASS" } else { "FAIL" },
        lines.join("; ")
    );
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

fn describe(s: &EstimateSummary) -> String {
    format!(
        "d={} ({},{}) {} N={} {:.3}% ({:.3}, {:.3})",
        s.config.d,
        s.config.mu,
        s.config.nu,
        s.config.mode,
        s.n_tot,
        pct(s.fraction),
        pct(s.ci_low),
        pct(s.ci_high)
    )
}

fn find(table: &[GoldenEntry], mu: usize, nu: usize, mode: Mode) -> GoldenEntry {
    *table
        .iter()
        .find(|e| e.mu == mu && e.nu == nu && e.mode == mode)
        .expect("published entry")
}

/// Runs an entry at `n` trials; returns the summary and whether the run's
/// interval meets the published one.
fn replicate(entry: &GoldenEntry, n: u64) -> (EstimateSummary, bool) {
    let s = estimate(&entry.config(n, SEED)).unwrap().summary;
    assert_eq!(s.lp_failures, 0, "{}", describe(&s));
    let ok = entry.overlaps(s.ci_low, s.ci_high);
    (s, ok)
}

fn replicate_runs(runs: &[(GoldenEntry, u64)]) -> (bool, Vec<String>) {
    let mut pass = true;
    let mut lines = Vec::new();
    for (entry, n) in runs {
        let (s, ok) = replicate(entry, *n);
        let (lo, hi) = entry.interval();
        lines.push(format!(
            "{} vs {:.3}% ({:.4}, {:.4}) {}",
            describe(&s),
            entry.percent,
            pct(lo),
            pct(hi),
            if ok { "overlap" } else { "no overlap" }
        ));
        pass &= ok;
    }
    (pass, lines)
}

fn replicate_all(criterion: u32, runs: &[(GoldenEntry, u64)]) -> bool {
    let (pass, lines) = replicate_runs(runs);
    report(criterion, pass, &lines);
    pass
}

#[test]
fn criterion_1_qubit_baseline() {
    let start = std::time::Instant::now();
    let (mut pass, mut lines) = replicate_runs(&[(QUBIT[0], 100_000), (QUBIT[1], 10_000)]);
    let (s, _) = replicate(&QUBIT[2], 10_000);
    let all = s.n_viol == s.n_tot;
    let secs = start.elapsed().as_secs_f64();
    pass &= all && secs < 120.0;
    lines.push(format!("{} all violating: {all}; {secs:.1} s", describe(&s)));
    report(1, pass, &lines);
    assert!(pass);
}

#[test]
fn criterion_2_qutrit() {
    let start = std::time::Instant::now();
    let (mut pass, mut lines) = replicate_runs(
        &[
            (find(QUTRIT, 2, 2, Mode::Cglmp), 100_000),
            (find(QUTRIT, 2, 2, Mode::Lp2), 100_000),
            (find(QUTRIT, 3, 3, Mode::Lp2), 100_000),
        ],
    );
    let (s, _) = replicate(&find(QUTRIT, 4, 4, Mode::Lp2), 10_000);
    let secs = start.elapsed().as_secs_f64();
    pass &= s.fraction >= 0.999 && secs <= 1800.0;
    lines.push(format!("{} observed >= 99.9%; {secs:.1} s", describe(&s)));
    report(2, pass, &lines);
    assert!(pass);
}

#[test]
fn criterion_3_ququart() {
    let runs: Vec<_> = [2, 3, 4].iter().map(|&m| (find(QUQUART, m, m, Mode::Lp2), 10_000)).collect();
    assert!(replicate_all(3, &runs));
}

#[test]
fn criterion_4_ququint() {
    let runs: Vec<_> = [2, 4, 6].iter().map(|&m| (find(QUQUINT, m, m, Mode::Lp2), 5_000)).collect();
    assert!(replicate_all(4, &runs));
}

#[test]
fn criterion_5_six_and_seven() {
    let runs = [
        (find(D6, 2, 2, Mode::Lp2), 10_000),
        (find(D6, 3, 3, Mode::Lp2), 10_000),
        (find(D7, 3, 3, Mode::Lp2), 10_000),
        (find(D7, 5, 5, Mode::Lp2), 10_000),
    ];
    assert!(replicate_all(5, &runs));
}

#[test]
fn criterion_6_rare_event_retest() {
    let config = TrialConfig::new(3, 4, 4, 1, Mode::Lp2, SEED);
    let found = find_nonviolating(&config, 3, 1_000_000, 50_000).unwrap();
    let mut pass = true;
    let mut lines = vec![format!(
        "{} local instances in {} trials",
        found.instances.len(),
        found.trials_run
    )];
    for inst in &found.instances {
        let full = min_visibility_over_subsets(&inst.correlation, 4, DEFAULT_CAP, Search::Exact).unwrap();
        let v = full.result.vstar;
        let ok = inst.visibility >= 1.0 - 1e-9 && (0.80..=0.90).contains(&v);
        pass &= ok;
        lines.push(format!(
            "trial {}: two-setting {:.5}, four-setting {:.4}",
            inst.trial_index, inst.visibility, v
        ));
    }
    if found.instances.is_empty() {
        lines.push("vacuous pass".into());
    }
    report(6, pass, &lines);
    assert!(pass);
}

fn sampled(d: usize, mu: usize, nu: usize, seed: u64, i: u64) -> Correlation {
    trial_correlation(&TrialConfig::new(d, mu, nu, 1, Mode::Lp2, seed), i).unwrap()
}

fn mub_unbiasedness() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for d in 2..=7 {
        let m = standard_mubs(d).unwrap();
        worst = worst.max(m.unbiasedness_deviation());
        for i in 0..5 {
            let u = sample_haar_unitary(d, TrialSeed { master_seed: SEED, trial_index: i }, Stream::Alice).unwrap();
            worst = worst.max(rotate_mubs(&m, &u).unwrap().unbiasedness_deviation());
        }
    }
    (worst <= 1e-10, format!("MUB deviation {worst:.1e}"))
}

fn no_signaling() -> (bool, String) {
    let shapes = [(2, 3, 3), (3, 4, 4), (4, 5, 5), (5, 6, 6), (6, 3, 3), (7, 8, 8), (7, 3, 5)];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..10_000u64 {
        let (d, mu, nu) = shapes[(i % shapes.len() as u64) as usize];
        let p = sampled(d, mu, nu, SEED + 1, i);
        ok &= p.validate(CORRELATION_TOL).is_ok();
        worst = worst.max(check_no_signaling(&p, CORRELATION_TOL).max_deviation);
    }
    let mut part = TrialConfig::new(3, 4, 4, 1, Mode::Lp2, SEED);
    part.state = StateSpec::Partial { alpha: 0.4, beta: 0.2 };
    for i in 0..200 {
        let p = trial_correlation(&part, i).unwrap();
        ok &= p.validate(CORRELATION_TOL).is_ok();
        worst = worst.max(check_no_signaling(&p, CORRELATION_TOL).max_deviation);
    }
    (ok && worst <= 1e-9, format!("no-signaling deviation {worst:.1e}"))
}

fn qutrit_completeness() -> (bool, String) {
    let fam = relabelings(&cglmp(3).unwrap())
        .unwrap()
        .union(&relabelings(&lift_outcomes(&chsh(), 3).unwrap()).unwrap())
        .unwrap();
    let bound = fam.members()[0].local_bound();
    assert!(fam.members().iter().all(|m| m.local_bound() == bound));
    let mut disagreements = 0;
    let mut nonlocal = 0;
    for i in 0..1000u64 {
        let mut p = sampled(3, 2, 2, SEED + 2, i);
        if i % 4 == 3 {
            // pull some samples towards the boundary
            p = mix(&p, &white_noise(2, 2, 3), 0.9).unwrap();
        }
        let lp = membership(&p).unwrap() == Membership::Outside;
        let ineq = max_over_family(&fam, &p).unwrap().0 > bound + 1e-9;
        nonlocal += lp as usize;
        disagreements += (lp != ineq) as usize;
    }
    (
        disagreements == 0 && nonlocal > 0,
        format!("k=3 completeness: {disagreements} disagreements, {nonlocal} nonlocal of 1000"),
    )
}

fn mode_dominance() -> (bool, String) {
    let mut ok = true;
    let mut checked = 0;
    for (d, mu, nu, n) in [(2, 2, 2, 2000), (3, 2, 2, 2000), (3, 2, 3, 2000), (3, 3, 3, 2000), (4, 2, 2, 2000), (4, 3, 3, 1000)] {
        let base = TrialConfig::new(d, mu, nu, n, Mode::Cglmp, SEED + 3).with_search(Search::Decision);
        let c = estimate(&base).unwrap();
        let l = estimate(&TrialConfig { mode: Mode::Lp2, ..base.clone() }).unwrap();
        ok &= c.summary.n_viol <= l.summary.n_viol;
        ok &= c.records.iter().zip(&l.records).all(|(a, b)| !a.violated || b.violated);
        checked += 1;
        if mu == nu && mu >= 3 {
            let f = estimate(&TrialConfig { mode: Mode::LpFull(mu), n_tot: n.min(300), ..base.clone() }).unwrap();
            ok &= l.records.iter().zip(&f.records).all(|(a, b)| !a.violated || b.violated);
            checked += 1;
        }
    }
    (ok, format!("mode dominance on {checked} comparisons"))
}

fn visibility_below_inequalities() -> (bool, String) {
    let fam = relabelings(&cglmp(3).unwrap())
        .unwrap()
        .union(&relabelings(&lift_outcomes(&chsh(), 3).unwrap()).unwrap())
        .unwrap();
    let mut ok = true;
    for i in 0..1000u64 {
        let p = sampled(3, 2, 2, SEED + 4, i);
        let v = visibility_cg(&p, DEFAULT_CAP).unwrap().vstar;
        for m in fam.members() {
            ok &= v <= visibility_wrt_inequality(m, &p, DEFAULT_CAP).unwrap().vstar + 1e-9;
        }
    }
    (ok, format!("visibility below {} inequality visibilities on 1000", fam.len()))
}

fn dense_vs_column_generation() -> (bool, String) {
    let shapes = [(3, 2, 2), (4, 2, 2), (2, 3, 3), (3, 2, 3), (5, 2, 2)];
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let (d, mu, nu) = shapes[(i % 5) as usize];
        let p = sampled(d, mu, nu, SEED + 5, i);
        let a = visibility(&p, DEFAULT_CAP).unwrap();
        let b = visibility_cg(&p, DEFAULT_CAP).unwrap();
        worst = worst.max((a.vstar - b.vstar).abs());
    }
    (worst <= 1e-6, format!("dense vs column generation {worst:.1e}"))
}

fn coverage() -> (bool, String) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 1.0;
    for p in [0.01, 0.2, 0.5, 0.9] {
        let reps = 10_000;
        let mut hit = 0;
        for _ in 0..reps {
            let x = (0..100).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = clopper_pearson(x, 100, 0.05).unwrap();
            hit += (lo <= p && p <= hi) as usize;
        }
        worst = worst.min(hit as f64 / reps as f64);
    }
    (worst >= 0.95, format!("CPI coverage {:.4}", worst))
}

fn worker_determinism() -> (bool, String) {
    let mut ok = true;
    for mode in [Mode::Cglmp, Mode::Lp2, Mode::LpFull(3)] {
        let config = TrialConfig::new(3, 3, 3, 200, mode, SEED + 6);
        let bytes = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let mut est = pool.install(|| estimate(&config)).unwrap();
            est.summary.wall_time_s = 0.0;
            let mut csv = Vec::new();
            write_records_csv(&est.records, &mut csv).unwrap();
            assert_eq!(read_records_csv(&csv[..]).unwrap().len(), est.records.len());
            (serde_json::to_vec(&est.summary).unwrap(), csv)
        };
        ok &= bytes(1) == bytes(4);
    }
    (ok, "1 vs 4 workers byte-identical".into())
}

#[test]
fn criterion_7_property_suites() {
    let checks = [
        mub_unbiasedness(),
        no_signaling(),
        qutrit_completeness(),
        mode_dominance(),
        visibility_below_inequalities(),
        dense_vs_column_generation(),
        coverage(),
        worker_determinism(),
    ];
    let pass = checks.iter().all(|c| c.0);
    let lines: Vec<String> = checks
        .iter()
        .map(|(ok, m)| format!("{m} {}", if *ok { "ok" } else { "FAILED" }))
        .collect();
    report(7, pass, &lines);
    assert!(pass);
}

#[test]
fn criterion_8_out_of_reach_rows_are_substituted() {
    // rows needing 10^6 or more trials are covered by the checks above
    let heavy = [find(QUTRIT, 4, 4, Mode::Lp2), find(QUQUART, 5, 5, Mode::Lp2)];
    let pass = heavy.iter().all(|e| e.n_tot >= 1_000_000 && e.ci.is_some());
    report(
        8,
        pass,
        &[
            "published 10^6 and 5x10^6 trial rows and exact rare-event counts are not rerun".into(),
            "replaced by the observed-fraction check of criterion 2 and the band check of criterion 6".into(),
        ],
    );
    assert!(pass);
}
