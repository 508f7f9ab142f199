//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex;
use periodic_frames::certify::{
    check_theorem1, check_theorem2, cross_sum, parseval_oracle, probe_cross_sum, probe_defect, Condition,
};
use periodic_frames::construct::{
    activation_profile, build_masks, check_sys2, pinned_rho1_tilde, product_certificate, solve_sys2_general,
    tilde_from_angles, AngleParameters, AnglePair, Sign,
};
use periodic_frames::masks::{telescoping_energy, theta_closed_form, theta_recursion};
use periodic_frames::schedules::{
    check_example1_feasibility, example1_forward, example2_forward, solve_example1, solve_example2, AngleSolution,
    Inequality, Infeasibility, Schedule, SparseSchedule,
};
use periodic_frames::{haar, FrameError, FrameSystem, Mask, RefinementChain, Spectrum, Tolerances, Verdict, WaveletSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[(bool, String)]) -> Outcome {
    let pass = checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "!! " }))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass, detail }
}

fn run(name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "{} {name}: {} [{:.2}s of {:.0}s budget{}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn haar_end_to_end() -> Outcome {
    let top = 12;
    let bound = 1 << 7;
    let system = haar::system::<f64>(top, bound);
    let tol = Tolerances::default();

    let cert = check_theorem1(&system, top, -bound..=bound, &tol).unwrap();
    let cross = cert.max_residual(Condition::FrameCross);
    let cross_count = cert.of(Condition::FrameCross).count();

    let mut theta_dev = 0.0f64;
    for j in 1..=top {
        for &t in system.theta.level(j).values() {
            theta_dev = theta_dev.max((t - 1.0).abs());
        }
    }

    let mut tele = 0.0f64;
    for q in 1..=top {
        for n in -bound..=bound {
            let (lhs, rhs) = telescoping_energy(&system.chain, &system.wavelets, q, n);
            tele = tele.max((lhs - rhs).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xAC1);
    let stats = parseval_oracle(&system, 100, bound, top, &mut rng).unwrap();

    outcome(&[
        (cross < 1e-11, format!("max cross sum {cross:.2e} over {cross_count} (j,n,k) < 1e-11")),
        (theta_dev < 1e-12, format!("max |theta - 1| {theta_dev:.2e} < 1e-12")),
        (tele < 1e-10, format!("max telescoping residual {tele:.2e} < 1e-10")),
        (
            stats.max_relative_error < 1e-9,
            format!("oracle max relative error {:.2e} over {} trials < 1e-9", stats.max_relative_error, stats.trials),
        ),
    ])
}

fn random_angles(rng: &mut ChaCha8Rng, rho: usize) -> Vec<f64> {
    (0..2 * rho + 1).map(|_| rng.random_range(0.0..TAU)).collect()
}

fn parameterization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC2);
    let mut sphere = 0.0f64;
    let mut solved = 0usize;
    let mut singular = 0usize;
    let mut sys2 = 0.0f64;
    let mut cross = 0.0f64;
    let draws = 10_000;
    for i in 0..draws {
        let rho = 1 + i % 3;
        let pair = AnglePair::new(random_angles(&mut rng, rho), random_angles(&mut rng, rho)).unwrap();
        let params = AngleParameters::new(1, vec![pair.clone()]).unwrap();
        sphere = sphere.max(tilde_from_angles(&params).unit_sphere_residual());

        // Random draws essentially never satisfy the cross system; complete
        // them with the solver and check those that pass.
        let completed = match solve_sys2_general(&pair) {
            Ok(p) => p,
            Err(FrameError::Singular(_)) => {
                singular += 1;
                continue;
            }
            Err(e) => panic!("unexpected error {e}"),
        };
        let (c, s) = check_sys2(&completed);
        let r = c.hypot(s);
        sys2 = sys2.max(r);
        if r < 1e-12 {
            solved += 1;
            cross = cross.max(completed.evaluate().cross().norm());
        }
    }
    outcome(&[
        (sphere < 1e-12, format!("max unit-sphere residual {sphere:.2e} < 1e-12 over {draws} draws")),
        (
            solved + singular == draws,
            format!("{solved} completed draws pass the angle system (max {sys2:.2e}), {singular} singular"),
        ),
        (cross < 1e-11, format!("max direct cross sum {cross:.2e} < 1e-11")),
    ])
}

fn construction_from_angles() -> Outcome {
    let top = 8;
    let chain = haar::chain::<f64>(top, 64);
    let base = haar::wavelets::<f64>(top);
    let tol = Tolerances::default();
    let profile = activation_profile(&chain, &base, tol.zero);
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC3);
    let mut con2 = 0.0f64;
    let mut oracle = 0.0f64;
    let mut passing = 0usize;
    let mut product_pass = 0usize;
    let mut built_ok = 0usize;
    let systems = 100;
    for _ in 0..systems {
        let amplitude: f64 = rng.random_range(0.0..0.5);
        let tilde: Vec<_> = (2..=top)
            .map(|j| {
                let step = PI / (1u64 << j) as f64;
                pinned_rho1_tilde(&chain, j, |r| {
                    // Residue 0 pairs a derived slot with the zero of a_j; its
                    // wavelet coefficient must vanish.
                    let t01 = if r == 0 {
                        0.0
                    } else {
                        step * r as f64 + amplitude * rng.random_range(-1.0..1.0) * step
                    };
                    let sign = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
                    (t01, rng.random_range(0.0..TAU), sign)
                })
                .unwrap()
            })
            .collect();
        let built = build_masks(&chain, &base, &tilde, &tol).unwrap();
        built_ok += 1;
        let system = FrameSystem::assemble(chain.clone(), built.wavelets).unwrap();
        let cert = check_theorem2(&system, top, 0..=0, &tol).unwrap();
        con2 = con2.max(cert.max_residual(Condition::MaskCross));

        let records = product_certificate(&chain, &profile, &base, &tilde, top, &tol).unwrap();
        let pass = records.iter().filter(|r| r.verdict == Verdict::Pass).count();
        product_pass += pass;
        if pass > 0 {
            passing += 1;
        }
        let stats = parseval_oracle(&system, 5, 32, top, &mut rng).unwrap();
        oracle = oracle.max(stats.max_relative_error);
    }
    outcome(&[
        (built_ok == systems, format!("{built_ok}/{systems} systems built")),
        (con2 < 1e-10, format!("max mask cross residual {con2:.2e} < 1e-10 at every level")),
        (
            oracle < 1e-8,
            format!(
                "oracle max relative error {oracle:.2e} < 1e-8 on all systems ({passing} with passing product records, {product_pass} records total)"
            ),
        ),
    ])
}

fn random_chain(rng: &mut ChaCha8Rng, top: u32) -> RefinementChain<f64> {
    let c = |rng: &mut ChaCha8Rng| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let spectrum = Spectrum::from_fn(-40..=40, |_| c(rng));
    let masks = (2..=top).map(|j| Mask::from_fn(j, |_| c(rng))).collect();
    RefinementChain::derive(spectrum, top, masks).unwrap()
}

fn theta_equivalence() -> Outcome {
    let top = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC4);
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for _ in 0..1000 {
        let chain = random_chain(&mut rng, top);
        let masks = (1..=top)
            .map(|j| {
                let rho = rng.random_range(1..=3);
                (0..rho)
                    .map(|_| Mask::from_fn(j, |_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                    .collect()
            })
            .collect();
        let system = WaveletSystem::new(masks).unwrap();
        let theta = theta_recursion(&chain, &system).unwrap();
        for q in 1..=top {
            for n in 0..(1i64 << q) {
                let closed = theta_closed_form(&chain, &system, q, n);
                let rec = theta.get(q, n);
                worst = worst.max((rec - closed).abs() / closed.abs().max(f64::MIN_POSITIVE));
                compared += 1;
            }
        }
    }
    outcome(&[(worst < 1e-12, format!("max relative gap {worst:.2e} < 1e-12 over {compared} (q,n) on 1000 systems"))])
}

fn max_rel(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs() / y.abs())
        .fold(0.0, f64::max)
}

fn infeasible(result: periodic_frames::Result<AngleSolution>) -> Option<Infeasibility> {
    match result {
        Err(FrameError::Infeasible(inf)) => Some(inf),
        _ => None,
    }
}

fn example_solvers() -> Outcome {
    let n_max = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC5);
    let mut checks = Vec::new();

    // Feasible Example 1 schedules come from random angles pushed forward.
    let mut worst1 = 0.0f64;
    for _ in 0..20 {
        let rows = (2..=n_max)
            .map(|l| (0..1usize << (l - 1)).map(|_| rng.random_range(0.02..0.98)).collect())
            .collect();
        let schedule = example1_forward(&AngleSolution::new(n_max, rows).unwrap());
        let sol = solve_example1(&schedule).unwrap();
        worst1 = worst1.max(max_rel(example1_forward(&sol).rows(), schedule.rows()));
    }
    checks.push((worst1 < 1e-12, format!("full-regime round trip {worst1:.2e} < 1e-12")));

    let mut worst2 = 0.0f64;
    for _ in 0..20 {
        let targets: Vec<f64> = (0..1usize << (n_max - 1)).map(|_| rng.random_range(0.05..0.95)).collect();
        let schedule = SparseSchedule::geometric(n_max, targets).unwrap();
        let sol = solve_example2(&schedule).unwrap();
        let expected: Vec<Vec<f64>> = (2..=n_max)
            .map(|l| (0..1u64 << (l - 1)).map(|n| schedule.f(n, l)).collect())
            .collect();
        worst2 = worst2.max(max_rel(&example2_forward(&sol), &expected));
    }
    checks.push((worst2 < 1e-12, format!("sparse-regime round trip {worst2:.2e} < 1e-12")));

    // Infeasible schedules: inflate one term of a chain until its margin is negative.
    let base_rows: Vec<Vec<f64>> = (2..=n_max)
        .map(|l| (0..1usize << (l - 1)).map(|_| rng.random_range(0.2..0.8)).collect())
        .collect();
    let base = example1_forward(&AngleSolution::new(n_max, base_rows).unwrap());
    let cases: [(u32, u64, Inequality); 4] = [
        (4, 0b110, Inequality::RootChain { k: 0 }),
        (5, 0b1111, Inequality::RootChain { k: 1 }),
        (6, 0b11001, Inequality::NestedChain { m: 3, k: 1 }),
        (9, 0b0010_0110, Inequality::NestedChain { m: 8, k: 38 }),
    ];
    let mut named = 0;
    for (level, n, expected) in cases {
        let margins = check_example1_feasibility(&base);
        let before = margins.iter().find(|m| m.chain == expected).unwrap().margin;
        let mut rows = base.rows().to_vec();
        rows[(level - 2) as usize][n as usize] += before * 1.5;
        let schedule = Schedule::new(n_max, rows).unwrap();
        let flagged = check_example1_feasibility(&schedule)
            .iter()
            .any(|m| m.chain == expected && m.verdict == Verdict::Fail);
        let inf = infeasible(solve_example1(&schedule));
        let ok = flagged && inf.map(|i| i.inequality) == Some(expected);
        if ok {
            named += 1;
        } else {
            checks.push((false, format!("expected {expected}, solver said {inf:?}")));
        }
    }
    checks.push((named == 4, format!("{named}/4 full-regime violations named correctly")));

    let targets = vec![0.5; 1 << (n_max - 1)];
    let mut xi = SparseSchedule::geometric(n_max, targets.clone()).unwrap().xi_rows().to_vec();
    xi[4][3] = xi[3][3] - 1e-3;
    let mono = infeasible(solve_example2(&SparseSchedule::new(n_max, targets.clone(), xi).unwrap()));
    let mut xi = SparseSchedule::geometric(n_max, targets.clone()).unwrap().xi_rows().to_vec();
    xi[5][40] = 0.45;
    let lower = infeasible(solve_example2(&SparseSchedule::new(n_max, targets, xi).unwrap()));
    checks.push((
        mono.map(|i| i.inequality) == Some(Inequality::XiMonotonicity { n: 3, level: 6 }),
        format!("monotonicity violation named: {}", mono.map(|i| i.to_string()).unwrap_or_default()),
    ));
    checks.push((
        lower.map(|i| i.inequality) == Some(Inequality::XiLowerBound { n: 40, level: 7 }),
        format!("lower-bound violation named: {}", lower.map(|i| i.to_string()).unwrap_or_default()),
    ));
    outcome(&checks)
}

fn necessity_probes() -> Outcome {
    let top = 12;
    let bound = 128;
    let system = haar::system::<f64>(top, bound);
    let tol = Tolerances::default();
    let mut checks = Vec::new();

    // 1% scaling of one level's wavelet mask.
    let mut flipped = 0usize;
    let mut affected_total = 0usize;
    for j in 0..5u32 {
        let m = system.wavelets.rho(j) - 1;
        let scaled = system.wavelets.masks_at(j + 1)[m].map(|v| *v * 1.01);
        let wavelets = system.wavelets.with_mask(j, m, scaled).unwrap();
        let perturbed = FrameSystem::assemble(system.chain.clone(), wavelets).unwrap();
        let cert = check_theorem1(&perturbed, top, -64..=63, &tol).unwrap();
        for n in -64..=63 {
            // Predicted from the unperturbed sum plus the injected energy.
            let extra = (1.01f64.powi(2) - 1.0) * 2f64.powi(j as i32) * system.wavelets.psi(j, m).get(n).norm_sqr();
            if system.partial_energy(top, n) + extra > 1.0 + tol.convergence {
                affected_total += 1;
                let rec = cert.of(Condition::FrameEnergy).find(|r| r.n == n).unwrap();
                if rec.verdict == Verdict::Fail {
                    flipped += 1;
                }
            }
        }
    }
    checks.push((
        affected_total > 0 && flipped == affected_total,
        format!("energy condition FAILs at {flipped}/{affected_total} affected frequencies"),
    ));

    // Phase rotation of one mask entry breaks cross orthogonality but keeps
    // every diagonal energy.
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC6);
    let mut detected = 0usize;
    let mut weakest = f64::INFINITY;
    let mut agreement = 0.0f64;
    let injections = 200;
    for _ in 0..injections {
        let j = rng.random_range(1..=3u32);
        let r = rng.random_range(1..(1i64 << j));
        let angle = rng.random_range(0.3..PI);
        let b = system.wavelets.masks_at(j + 1)[0].clone();
        let mut rotated = b.clone();
        rotated.set(r, b.get(r) * C::from_polar(1.0, angle));
        let broken = FrameSystem::assemble(system.chain.clone(), system.wavelets.with_mask(j, 0, rotated).unwrap()).unwrap();
        let defect = probe_defect(&broken, top, j, r, 1);
        let direct = cross_sum(&broken, j, r, r + (1 << j));
        agreement = agreement.max((probe_cross_sum(&broken, top, j, r, 1) - direct).norm());
        weakest = weakest.min(defect);
        if defect > 1e-4 {
            detected += 1;
        }
    }
    checks.push((
        detected == injections,
        format!("probes detect {detected}/{injections} injected violations (weakest defect {weakest:.2e} > 1e-4)"),
    ));
    checks.push((agreement < 1e-12, format!("probe-recovered cross sums match direct sums to {agreement:.2e}")));
    outcome(&checks)
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run("haar end-to-end", secs(10), haar_end_to_end),
        run("parameterization soundness", secs(5), parameterization),
        run("construction from angles", secs(30), construction_from_angles),
        run("theta equivalence", secs(60), theta_equivalence),
        run("example solvers round trip", secs(60), example_solvers),
        run("necessity probes", secs(60), necessity_probes),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
