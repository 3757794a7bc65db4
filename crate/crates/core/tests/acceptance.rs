//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use qwalk::compiler::{compile, compile_with, verify, CompileOptions, SlotKind, DEFAULT_TOLERANCE};
use qwalk::hardware::{capacity, coin_to_eom, schedule_to_timebins};
use qwalk::linalg::{haar_random_unitary, haar_random_unitary_with, Mat2, C64};
use qwalk::meshes::{decompose, Architecture};
use qwalk::metrics::fidelity;
use qwalk::noise::{noisy_evolve, ImperfectionDraw};
use qwalk::sweep::{
    csv_string, realize_compiled, run_sweep, task_rng, SweepConfig, SweepKind, SweepRecord,
};
use qwalk::walk::{evolve, CoinField, LatticeSpec};
use qwalk::Error;
use rand::Rng;

type Outcome = Result<String, String>;
type Pairs = Vec<(i64, i64)>;

fn check(ok: bool, mut detail: String) -> Outcome {
    if detail.ends_with("; ") {
        detail.truncate(detail.len() - 2);
    }
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn haar_k(seed: u64, i: usize, k: usize) -> qwalk::linalg::UnitaryMatrix {
    haar_random_unitary_with(k, &mut task_rng(seed, &[i as u64])).unwrap()
}

fn compiler_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for i in 0..200 {
        let k = 2 + i % 11;
        let target = haar_k(100, i, k);
        let r = compile(&target, DEFAULT_TOLERANCE).map_err(|e| format!("case {i} K={k}: {e}"))?;
        let residual = verify(&r, &target).map_err(|e| e.to_string())?;
        worst = worst.max(residual);
        let programmed = r.schedule.programmed_count();
        if residual > 1e-9 || r.steps_used > k || programmed > k * (k - 1) / 2 {
            bad.push(format!(
                "case {i} K={k}: residual {residual:.2e}, steps {}, programmed {programmed}",
                r.steps_used
            ));
        }
    }
    check(
        bad.is_empty(),
        format!(
            "200 targets, worst residual {worst:.2e}; {}",
            bad.join("; ")
        ),
    )
}

fn fig1_structure() -> Outcome {
    let target = haar_random_unitary(6, 6).unwrap();
    let options = CompileOptions {
        reduce: false,
        ..CompileOptions::default()
    };
    let r = compile_with(&target, &options).map_err(|e| e.to_string())?;
    let pair = |m: i64| (m, m + 1);
    let mut problems = Vec::new();
    for step in r.schedule.steps() {
        let interior: Vec<(i64, i64)> = step
            .slots
            .iter()
            .filter(|s| s.kind != SlotKind::BoundaryX)
            .map(|s| pair(s.m))
            .collect();
        let fixed: Vec<(i64, i64)> = step
            .slots
            .iter()
            .filter(|s| s.kind == SlotKind::BoundaryX)
            .map(|s| pair(s.m))
            .collect();
        let x_ok = step
            .slots
            .iter()
            .filter(|s| s.kind == SlotKind::BoundaryX)
            .all(|s| s.coin().max_abs_diff(&Mat2::PAULI_X) == 0.0);
        let (want_interior, want_fixed): (Pairs, Pairs) = if step.n % 2 == 1 {
            (vec![(1, 2), (3, 4)], vec![(-1, 0), (5, 6)])
        } else {
            (vec![(0, 1), (2, 3), (4, 5)], vec![(6, 7)])
        };
        if interior != want_interior || fixed != want_fixed || !x_ok {
            problems.push(format!(
                "step {}: interior {interior:?}, fixed {fixed:?}",
                step.n
            ));
        }
    }
    check(
        problems.is_empty() && r.schedule.num_steps() == 6,
        format!(
            "{} steps alternate {{(1,2),(3,4)}} / {{(0,1),(2,3),(4,5)}}, X at (-1,0),(5,6); {}",
            r.schedule.num_steps(),
            problems.join("; ")
        ),
    )
}

fn random_draw<R: Rng>(rng: &mut R) -> ImperfectionDraw {
    let mut z = || C64::from_polar(rng.random_range(0.5..1.0), rng.random_range(-3.0..3.0));
    ImperfectionDraw::new([z(), z()], [z(), z()], [z(), z()]).unwrap()
}

fn factorization() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let mut rng = task_rng(300, &[i]);
        let k = rng.random_range(2..=12);
        let steps = rng.random_range(1..=20);
        let lattice = LatticeSpec::for_modes(k);
        let field = CoinField::random(steps, &lattice, &mut rng).unwrap();
        match noisy_evolve(&random_draw(&mut rng), &field, steps, &lattice) {
            Ok((_, cert)) => worst = worst.max(cert.residual),
            Err(Error::FactorizationViolation { residual }) => {
                return Err(format!("draw {i}: residual {residual:.2e}"))
            }
            Err(e) => return Err(format!("draw {i}: {e}")),
        }
    }
    check(
        worst <= 1e-9,
        format!("100 draws, worst residual {worst:.2e}"),
    )
}

fn rows(records: &[SweepRecord], arch: Architecture) -> Vec<&SweepRecord> {
    records.iter().filter(|r| r.arch == arch).collect()
}

fn phase_immunity() -> Outcome {
    let cfg = SweepConfig::default_for(SweepKind::Phase);
    let out = run_sweep(&cfg, SweepKind::Phase, None).map_err(|e| e.to_string())?;
    let q = rows(&out.records, Architecture::Qwalk);
    let q_dev = q
        .iter()
        .map(|r| (r.mean_similarity - 1.0).abs())
        .fold(0.0, f64::max);
    let mut problems = Vec::new();
    for arch in [
        Architecture::Reck,
        Architecture::Clements,
        Architecture::Mgdr,
    ] {
        for r in rows(&out.records, arch)
            .into_iter()
            .filter(|r| r.axis >= 0.2 - 1e-12)
        {
            if r.mean_similarity >= 0.999 {
                problems.push(format!("{arch} at {:.2}: {:.5}", r.axis, r.mean_similarity));
            }
        }
    }
    let worst_mesh = out
        .records
        .iter()
        .filter(|r| r.arch != Architecture::Qwalk && r.axis >= 0.2 - 1e-12)
        .map(|r| r.mean_similarity)
        .fold(0.0, f64::max);
    check(
        q_dev <= 1e-9 && problems.is_empty(),
        format!("K=12 50x50, qwalk similarity deviation {q_dev:.2e}, highest mesh similarity at >=0.2 rad {worst_mesh:.5}; {}", problems.join("; ")),
    )
}

fn strictly_decreasing(rs: &[&SweepRecord]) -> bool {
    rs.windows(2)
        .all(|w| w[1].mean_fidelity < w[0].mean_fidelity)
}

fn loss_ordering() -> Outcome {
    let cfg = SweepConfig::default_for(SweepKind::Loss);
    let out = run_sweep(&cfg, SweepKind::Loss, None).map_err(|e| e.to_string())?;
    let q = rows(&out.records, Architecture::Qwalk);
    let c = rows(&out.records, Architecture::Clements);
    let r = rows(&out.records, Architecture::Reck);
    let m = rows(&out.records, Architecture::Mgdr);
    let q_min = q.iter().map(|x| x.mean_fidelity).fold(1.0, f64::min);
    let mut problems = Vec::new();
    if q_min < 0.999 {
        problems.push(format!("qwalk min {q_min:.5}"));
    }
    if !strictly_decreasing(&r) || !strictly_decreasing(&m) {
        problems.push("reck or mgdr not strictly decreasing".into());
    }
    for i in 0..q.len() {
        if !(q[i].mean_fidelity > c[i].mean_fidelity
            && c[i].mean_fidelity > r[i].mean_fidelity.max(m[i].mean_fidelity))
        {
            problems.push(format!("ordering at loss {:.2}", q[i].axis));
        }
    }
    let last = q.len() - 1;
    check(
        problems.is_empty(),
        format!(
            "qwalk min {q_min:.6}; at loss {:.2}: clements {:.3}, reck {:.3}, mgdr {:.3}; {}",
            q[last].axis,
            c[last].mean_fidelity,
            r[last].mean_fidelity,
            m[last].mean_fidelity,
            problems.join("; ")
        ),
    )
}

fn balanced_loss() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = task_rng(600, &[i]);
        let k = rng.random_range(2..=12);
        let target = haar_random_unitary_with(k, &mut rng).unwrap();
        let result = compile(&target, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
        let mut z = || C64::from_polar(rng.random_range(0.5..1.0), rng.random_range(-3.0..3.0));
        let (a, b, c) = (z(), z(), z());
        let draw = ImperfectionDraw::new([a, a], [b, b], [c, c]).unwrap();
        let realized = realize_compiled(&result, &draw).map_err(|e| e.to_string())?;
        let f = fidelity(&realized, &target).map_err(|e| e.to_string())?;
        worst = worst.max((f - 1.0).abs());
    }
    check(
        worst <= 1e-10,
        format!("50 balanced draws, worst |F - 1| {worst:.2e}"),
    )
}

fn parity() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = task_rng(700, &[i]);
        let lattice = LatticeSpec::for_modes(rng.random_range(2..=12));
        let field = CoinField::random(2, &lattice, &mut rng).unwrap();
        let u = evolve(&field, 2, &lattice).unwrap();
        let (even, odd) = lattice.parity_split();
        let off = u
            .matrix()
            .submatrix(&even, &odd)
            .frobenius_norm()
            .hypot(u.matrix().submatrix(&odd, &even).frobenius_norm());
        worst = worst.max(off);
    }
    check(
        worst <= 1e-12,
        format!("50 random fields, worst off-diagonal Frobenius norm {worst:.2e}"),
    )
}

fn mesh_soundness() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (a_idx, arch) in [
        Architecture::Reck,
        Architecture::Clements,
        Architecture::Mgdr,
    ]
    .into_iter()
    .enumerate()
    {
        let mut worst = 0.0f64;
        for i in 0..100 {
            let k = 2 + i % 11;
            let target = haar_k(800 + a_idx as u64, i, k);
            let program = decompose(arch, &target).map_err(|e| e.to_string())?;
            worst = worst.max(program.synthesize().max_abs_diff(target.matrix()));
            if arch != Architecture::Mgdr && program.sites.len() != k * (k - 1) / 2 {
                ok = false;
                details.push(format!("{arch} K={k}: {} sites", program.sites.len()));
            }
        }
        ok &= worst <= 1e-9;
        details.push(format!("{arch} worst {worst:.2e}"));
    }
    check(ok, details.join(", "))
}

fn hardware_closure() -> Outcome {
    let mut worst = 0.0f64;
    let mut coins = 0usize;
    let mut capacity_cases = 0usize;
    for k in 1..=12usize {
        for i in 0..5 {
            let target = haar_k(900 + k as u64, i, k);
            let r = compile(&target, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
            for step in r.schedule.steps() {
                for slot in &step.slots {
                    let coin = slot.coin();
                    let fit = coin_to_eom(&coin)
                        .map_err(|e| format!("K={k} step {} m={}: {e}", step.n, slot.m))?;
                    worst = worst.max(fit.reconstruct().max_abs_diff(&coin));
                    coins += 1;
                }
            }
            let needed = schedule_to_timebins(&r, 1e6, 1.0)
                .map_err(|e| e.to_string())?
                .occupied_bins();
            for bins in 1..=needed + 3 {
                let tau = bins as f64 * 10.0 + 3.0;
                let cap = capacity(tau, 10.0).map_err(|e| e.to_string())?;
                let res = schedule_to_timebins(&r, tau, 10.0);
                let expect_err = cap < needed;
                if expect_err != matches!(res, Err(Error::Capacity { .. })) {
                    return Err(format!(
                        "K={k}: capacity {cap}, occupied {needed}, got {:?}",
                        res.err()
                    ));
                }
                capacity_cases += 1;
            }
        }
    }
    check(
        worst <= 1e-10,
        format!("{coins} coins, worst fit residual {worst:.2e}; {capacity_cases} capacity cases agree with floor(tau/dt) - 1"),
    )
}

fn determinism() -> Outcome {
    let mut details = Vec::new();
    for kind in [SweepKind::Loss, SweepKind::Phase] {
        let cfg = SweepConfig::default_for(kind);
        let a = csv_string(
            &run_sweep(&cfg, kind, Some(1))
                .map_err(|e| e.to_string())?
                .records,
        );
        let b = csv_string(
            &run_sweep(&cfg, kind, Some(4))
                .map_err(|e| e.to_string())?
                .records,
        );
        let c = csv_string(
            &run_sweep(&cfg, kind, Some(4))
                .map_err(|e| e.to_string())?
                .records,
        );
        if a != b || b != c {
            return Err(format!("{kind:?} sweep CSV differs between runs"));
        }
        details.push(format!("{kind:?} {} bytes", a.len()));
    }
    Ok(format!(
        "byte-identical CSV at 1 and 4 threads: {}",
        details.join(", ")
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "compiler round-trip",
            compiler_round_trip,
            Duration::from_secs(60),
        ),
        ("K=6 slot structure", fig1_structure, Duration::from_secs(1)),
        (
            "noisy factorization",
            factorization,
            Duration::from_secs(60),
        ),
        ("phase immunity", phase_immunity, Duration::from_secs(600)),
        (
            "loss resilience ordering",
            loss_ordering,
            Duration::from_secs(600),
        ),
        (
            "balanced-loss exactness",
            balanced_loss,
            Duration::from_secs(10),
        ),
        ("parity structure", parity, Duration::from_secs(10)),
        (
            "rival-mesh soundness",
            mesh_soundness,
            Duration::from_secs(60),
        ),
        (
            "hardware family closure",
            hardware_closure,
            Duration::from_secs(30),
        ),
        ("sweep determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > *budget;
        let (tag, detail) = match &outcome {
            Ok(d) if !over => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; over time budget {budget:?}")),
            Err(d) => ("FAIL", d.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} criterion {:2} {name} [{:.2}s]: {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
