//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::process::Command;
use std::time::{Duration, Instant};

use gordonlab::diophantine::{badly_approx_classify, convergents, AlphaRep, Verdict};
use gordonlab::dynsys::{DynSystem, TorusPoint};
use gordonlab::potential::{
    def3_check, flatten_along_tube, gordon_bound, gordon_certify, gordon_gap_verify, omega_f_tube_sample,
    periodic_approximant, synthesize_window, PotentialWindow, SampleFn,
};
use gordonlab::repetition::{prp_probe, rp_search, rp_search_exhaustive, theorem4_probe, PrpOutcome};
use gordonlab::spectrum::{build_truncation, covariance_check, eigenvalues_sturm};
use gordonlab::transfer::{aux1_suite, aux2_suite, gordon_lower_bound_probe, transfer_matrix, StateVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unimodularity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let e: f64 = rng.gen_range(-5.0..=5.0);
        let v: f64 = rng.gen_range(-5.0..=5.0);
        worst = worst.max((transfer_matrix(e, v).det() - 1.0).abs());
    }
    check(worst <= 1e-12, format!("max |det - 1| = {worst:.3e}"))
}

fn aux2() -> Outcome {
    let s = aux2_suite(10_000, 2).map_err(|e| e.to_string())?;
    check(
        s.failures == 0 && s.min_slack >= -1e-9,
        format!("{} cases, {} failures, min(max_norm) - 1/2 = {:.3e}", s.cases, s.failures, s.min_slack),
    )
}

fn aux1() -> Outcome {
    let s = aux1_suite(1000, 20, 3).map_err(|e| e.to_string())?;
    check(
        s.failures == 0,
        format!("{} cases, {} failures, min slack = {:.3e}", s.cases, s.failures, s.min_slack),
    )
}

fn periodic_gordon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    for p in [1u64, 2, 3, 5] {
        let cell: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let t_list: Vec<u64> = (1..=5).map(|m| m * p).collect();
        let tm = 5 * p as i64;
        let v = PotentialWindow::from_fn(-2 * tm, 2 * tm + 1, |n| cell[n.rem_euclid(p as i64) as usize])
            .map_err(|e| e.to_string())?;
        for i in 0..16 {
            let e = -3.0 + 6.0 * i as f64 / 15.0;
            let report = gordon_lower_bound_probe(&v, e, StateVec::new(1.0, 0.0), &t_list).map_err(|e| e.to_string())?;
            worst = report.rows.iter().map(|r| r.ratio).fold(worst, f64::min);
        }
    }
    check(worst >= 0.5 - 1e-9, format!("min ratio over p, E, m = {worst:.6}"))
}

fn rotation_rp() -> Outcome {
    let sys = DynSystem::circle_rotation(AlphaRep::golden());
    let w = TorusPoint::origin(1);
    let fast = rp_search(&sys, &w, 0.01, 2, 100).map_err(|e| e.to_string())?;
    let oracle = rp_search_exhaustive(&sys, &w, 0.01, 2, 100).map_err(|e| e.to_string())?;
    match (fast, oracle) {
        (Some(c), Some(o)) => check(
            c.q == 55 && o.q == 55 && (c.worst_dist - 8.13e-3).abs() <= 1e-5,
            format!("q = {} (oracle {}), worst_dist = {:.6e}", c.q, o.q, c.worst_dist),
        ),
        (a, b) => Err(format!("search {:?}, oracle {:?}", a.map(|c| c.q), b.map(|c| c.q))),
    }
}

fn classifier() -> Outcome {
    let g = badly_approx_classify(&AlphaRep::golden(), 100_000).map_err(|e| e.to_string())?;
    let l = AlphaRep::liouville(4).map_err(|e| e.to_string())?;
    let best = convergents(&l, 64)
        .iter()
        .map(|c| num_traits::ToPrimitive::to_f64(&c.q).unwrap_or(f64::INFINITY) * c.dist)
        .fold(f64::INFINITY, f64::min);
    check(
        (0.44..=0.46).contains(&g.c_estimate) && best <= 1e-6,
        format!("c_estimate(golden) = {:.6}, min q<qa> for liouville:4 = {best:.3e}", g.c_estimate),
    )
}

fn theorem4() -> Outcome {
    let w = TorusPoint::new(vec![0.0, 0.0]).map_err(|e| e.to_string())?;
    let l = theorem4_probe(&AlphaRep::liouville(4).map_err(|e| e.to_string())?, &w, 3, 2000, 100_000)
        .map_err(|e| e.to_string())?;
    let g = theorem4_probe(&AlphaRep::golden(), &w, 3, 2000, 100_000).map_err(|e| e.to_string())?;
    let liou_ok = l.classification.verdict == Verdict::NotBadlyApproximableEvidence && l.probe.all_found();
    let k2 = g.probe.entries.iter().find(|e| e.k == 2).map(|e| &e.outcome);
    let golden_ok = g.classification.verdict == Verdict::BadlyApproximableEvidence
        && matches!(k2, Some(PrpOutcome::NotFound { q_max_searched: 2000 }));
    check(
        liou_ok && golden_ok,
        format!(
            "liouville:4 {:?} q_k = {:?}; golden {:?} k=2 outcome {:?}",
            l.classification.verdict,
            (1..=3).map(|k| l.probe.q_at(k)).collect::<Vec<_>>(),
            g.classification.verdict,
            k2
        ),
    )
}

fn free_laplacian() -> Outcome {
    let v = PotentialWindow::from_fn(-50, 49, |_| 0.0).map_err(|e| e.to_string())?;
    let t = build_truncation(&v, 100, 0).map_err(|e| e.to_string())?;
    let ev = eigenvalues_sturm(&t, 1e-13).map_err(|e| e.to_string())?;
    let mut exact: Vec<f64> = (1..=100)
        .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / 101.0).cos())
        .collect();
    exact.sort_by(f64::total_cmp);
    let err = ev.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    let trace = (ev.iter().sum::<f64>() - t.trace()).abs();
    check(
        ev.len() == 100 && err <= 1e-10 && trace <= 1e-6,
        format!("max eigenvalue error = {err:.3e}, trace error = {trace:.3e}"),
    )
}

fn covariance() -> Outcome {
    let f = SampleFn::cos_coord(0);
    let systems = [
        (DynSystem::circle_rotation(AlphaRep::golden()), vec![0.37]),
        (
            DynSystem::rotation(vec![AlphaRep::golden(), AlphaRep::silver()]).map_err(|e| e.to_string())?,
            vec![0.2, 0.7],
        ),
        (DynSystem::skew_shift(AlphaRep::golden()), vec![0.3, 0.6]),
    ];
    let mut worst = 0.0f64;
    for (sys, w) in &systems {
        let w = TorusPoint::new(w.clone()).map_err(|e| e.to_string())?;
        for t in -5..=5 {
            let r = covariance_check(&f, sys, &w, t, 64).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_abs_diff);
        }
    }
    check(worst <= 1e-12, format!("max interior discrepancy = {worst:.3e}"))
}

fn tube_replay() -> Outcome {
    let alpha = AlphaRep::golden();
    let probe = prp_probe(&DynSystem::circle_rotation(alpha.clone()), &TorusPoint::origin(1), 3, 10_000)
        .map_err(|e| e.to_string())?;
    let q3 = probe.q_at(3).ok_or("no certificate at k = 3")?;
    let g = flatten_along_tube(&SampleFn::cos_coord(0), &alpha, 3, q3).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for j in [1, q3] {
        let w = omega_f_tube_sample(&alpha, 3, q3, j, g.radius(), 0.0).map_err(|e| e.to_string())?;
        let r = gordon_gap_verify(&g, &w, 3, q3).map_err(|e| e.to_string())?;
        ok &= r.fwd == 0.0 && r.bwd == 0.0 && r.fwd < gordon_bound(2.0, 3, q3);
        lines.push(format!("j={j}: fwd={:e} bwd={:e} bound={:.3e}", r.fwd, r.bwd, r.bound));
    }
    check(ok, format!("q_3 = {q3}; {}", lines.join("; ")))
}

/// `V = Σ_j ε_j P_j` with `P_j` of period `q_j`, `q_j | q_{j+1}`, and
/// `2 Σ_{j>m} ε_j ≤ C·m^{−q_m}`.
fn random_gordon_window(rng: &mut ChaCha8Rng, c: f64) -> (PotentialWindow, Vec<u64>) {
    let levels = rng.gen_range(2..=4);
    let mut q = vec![rng.gen_range(1..=3u64)];
    for _ in 1..levels {
        let last = *q.last().unwrap();
        q.push(last * rng.gen_range(2..=3u64));
    }
    let mut pieces: Vec<(u64, f64, Vec<f64>)> = Vec::new();
    for (i, &qj) in q.iter().enumerate() {
        let amp = if i == 0 {
            1.0
        } else {
            0.25 * gordon_bound(c, i as u64, q[i - 1]) * rng.gen_range(0.0..=1.0)
        };
        let cell = (0..qj).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        pieces.push((qj, amp, cell));
    }
    let qm = *q.last().unwrap() as i64;
    let v = PotentialWindow::from_fn(-2 * qm, 2 * qm, |n| {
        pieces
            .iter()
            .map(|(p, a, cell)| a * cell[n.rem_euclid(*p as i64) as usize])
            .sum()
    })
    .expect("non-empty window");
    (v, q)
}

fn characterization() -> Outcome {
    let c = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    for case in 0..100 {
        let (v, q) = random_gordon_window(&mut rng, c);
        let run = || -> gordonlab::Result<bool> {
            if !gordon_certify(&v, &q, c)?.pass {
                return Ok(false);
            }
            let approx = q
                .iter()
                .enumerate()
                .map(|(i, &qm)| periodic_approximant(&v, qm, i as u64 + 1))
                .collect::<gordonlab::Result<Vec<_>>>()?;
            let def3 = def3_check(&v, &approx, 2.0 * c)?;
            let w = synthesize_window(&approx, c, v.lo(), v.hi())?;
            Ok(def3.all() && gordon_certify(&w, &q, 2.0 * c)?.pass)
        };
        match run() {
            Ok(true) => {}
            Ok(false) => failures.push(format!("case {case}")),
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    check(failures.is_empty(), format!("100 windows, failures: {failures:?}"))
}

fn cli_output(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gordonlab"))
        .args(args)
        .args(["--threads", threads])
        .env_remove("GORDONLAB_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited {:?}", out.status.code()));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["aux1-suite", "--cases", "300", "--seed", "9"],
        &["aux2-suite", "--cases", "3000", "--seed", "9"],
        &["gordon-probe", "--system", "skew", "--omega", "0.1,0.2", "--f", "cos:1", "--e-min", "-3", "--e-max", "3", "--e-count", "32", "--T", "3,5,8"],
        &["spectrum", "--system", "rotation", "--alpha", "golden", "--f", "cos:0", "--N", "60"],
        &["prp-probe", "--system", "skew", "--alpha", "golden", "--omega", "0.1,0.2", "--kmax", "2", "--qmax", "400"],
    ];
    for args in runs {
        let a = cli_output(args, "1")?;
        let b = cli_output(args, "4")?;
        let c = cli_output(args, "4")?;
        if a != b || b != c {
            return Err(format!("{} output differs across runs", args[0]));
        }
    }
    Ok(format!("{} subcommands byte-identical at 1 and 4 threads, repeated", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 12] = [
        ("1 unimodularity", unimodularity, Duration::from_secs(1)),
        ("2 aux2 suite", aux2, Duration::from_secs(5)),
        ("3 aux1 suite", aux1, Duration::from_secs(5)),
        ("4 exact-periodic Gordon bound", periodic_gordon, Duration::from_secs(1)),
        ("5 rotation RP", rotation_rp, Duration::from_secs(1)),
        ("6 diophantine classifier", classifier, Duration::from_secs(10)),
        ("7 theorem 4 agreement", theorem4, Duration::from_secs(60)),
        ("8 free Laplacian spectrum", free_laplacian, Duration::from_secs(1)),
        ("9 covariance", covariance, Duration::from_secs(1)),
        ("10 tube replay", tube_replay, Duration::from_secs(5)),
        ("11 characterization round trip", characterization, Duration::from_secs(10)),
        ("12 determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {name}: {detail} ({:.3} s, limit {} s)",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
