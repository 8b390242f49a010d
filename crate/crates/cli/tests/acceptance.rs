//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command as Process, ExitCode};
use std::time::Instant;

use discrete_ito::basis::{gram_schmidt_basis, walsh_completion, walsh_driver_vector, IncrementLaw, OrthonormalSystem};
use discrete_ito::dif::{
    decompose_joint_scheme, decompose_multidim, decompose_scheme, decompose_walk_1d, decompose_weak_scheme,
    full_truncation, spanning_defect, Realization, StatePoint,
};
use discrete_ito::fdsolver::{
    backward_solve, consistency_defect, ContinuousGenerator, DiscreteGenerator, LatticeOptions, Polynomial,
};
use discrete_ito::montecarlo::{
    complete_market_experiment, high_dimension_smoke, moment_matched_experiment, DesignMoments, OrderOptions,
    COMPLETE_MARKET_GRID, MOMENT_MATCHED_GRID,
};
use discrete_ito::scheme::{enumerate_paths, DriverKind, JointLaw, QmcKind, Sampler, SchemeField};
use discrete_ito::stats::fit_loglog;
use dito::presets::PRESETS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_law(rng: &mut ChaCha8Rng, max_atoms: usize) -> IncrementLaw<f64> {
    loop {
        let n = rng.random_range(2..=max_atoms);
        let mut points: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mean: f64 = points.iter().zip(&weights).map(|(x, w)| x * w).sum();
        points.iter_mut().for_each(|x| *x -= mean);
        let mut sorted = points.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|p| p[1] - p[0] > 0.05) {
            return IncrementLaw::finite(&points, &weights).unwrap();
        }
    }
}

/// Bounded smooth test function of a weighted coordinate sum.
fn random_function(rng: &mut ChaCha8Rng) -> impl Fn(f64, &[f64]) -> f64 + Clone {
    let c: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    move |t: f64, x: &[f64]| {
        let s: f64 = x.iter().enumerate().map(|(i, v)| v * (1.0 + 0.3 * i as f64)).sum::<f64>() + c[5] * t;
        c[0] * (2.0 * c[1] * s).sin() + c[2] * s * s / (1.0 + s * s) + c[3] * s + c[4] * (0.5 * s).cos()
    }
}

fn pathwise_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut cases, mut worst) = (0usize, 0.0f64);
    let mut record = |truth: f64, got: f64| {
        worst = worst.max((truth - got).abs());
        1
    };
    let mut kind = 0;
    while cases < 10_000 {
        let f = random_function(&mut rng);
        let t = rng.random_range(0.0..1.0);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        match kind % 5 {
            0 => {
                let law = random_law(&mut rng, 6);
                let m = law.support_size().unwrap();
                let basis = gram_schmidt_basis(&law, m).unwrap();
                let g = |y: f64| f(0.0, &[y]);
                let d = decompose_walk_1d(g, &StatePoint::origin(vec![x[0]]), &law, &basis, m).unwrap();
                for a in law.atoms().unwrap() {
                    cases +=
                        record(g(x[0] + a.point) - g(x[0]), d.reconstruct(&Realization::Components(vec![a.point])));
                }
            }
            1 => {
                let laws = [random_law(&mut rng, 3), random_law(&mut rng, 3)];
                let bases: Vec<_> =
                    laws.iter().map(|l| gram_schmidt_basis(l, l.support_size().unwrap()).unwrap()).collect();
                let dt = rng.random_range(0.01..0.5);
                let state = StatePoint::new(1, t, x[..2].to_vec());
                let d = decompose_multidim(&f, &state, &laws, &bases, full_truncation(&bases), dt).unwrap();
                for a in laws[0].atoms().unwrap() {
                    for b in laws[1].atoms().unwrap() {
                        let next = [x[0] + a.point, x[1] + b.point];
                        let truth = f(t + dt, &next) - f(t, &x[..2]);
                        cases += record(truth, d.reconstruct(&Realization::Components(vec![a.point, b.point])));
                    }
                }
            }
            2 => {
                let law = random_law(&mut rng, 5);
                let basis = gram_schmidt_basis(&law, law.support_size().unwrap()).unwrap();
                let (s, m) = (rng.random_range(0.1..1.5), rng.random_range(-1.0..1.0));
                let field = SchemeField::euler_maruyama_diagonal(
                    1,
                    move |y: &[f64], o: &mut [f64]| o[0] = s * (1.0 + 0.3 * y[0].sin()),
                    move |y: &[f64], o: &mut [f64]| o[0] = m * y[0],
                );
                let dt = rng.random_range(0.01..0.5);
                let state = StatePoint::new(1, t, vec![x[0]]);
                let d = decompose_scheme(
                    &f,
                    &state,
                    &field,
                    std::slice::from_ref(&law),
                    std::slice::from_ref(&basis),
                    basis.len(),
                    dt,
                )
                .unwrap();
                for a in law.atoms().unwrap() {
                    let truth = f(t + dt, &field.step(&[x[0]], dt, &[a.point])) - f(t, &[x[0]]);
                    cases += record(truth, d.reconstruct(&Realization::Components(vec![a.point])));
                }
            }
            3 => {
                let n = rng.random_range(1..=3);
                let drivers = walsh_driver_vector(n);
                let field = SchemeField::constant(n, rng.random_range(0.1..1.5), rng.random_range(-1.0..1.0));
                let dt = rng.random_range(0.01..0.5);
                let state = StatePoint::new(1, t, x[..n].to_vec());
                let d = decompose_weak_scheme(
                    &f,
                    &state,
                    &field,
                    &IncrementLaw::lebesgue_unit(),
                    &drivers,
                    &walsh_completion(&drivers),
                    dt,
                )
                .unwrap();
                let kind = DriverKind::Walsh(drivers.clone());
                let res = kind.walsh_resolution().unwrap();
                for k in 0..(1u32 << res) {
                    let u = (f64::from(k) + rng.random_range(0.0..1.0)) / f64::from(1u32 << res);
                    let mut y = vec![0.0; n];
                    kind.innovation(&[u], &mut y);
                    let truth = f(t + dt, &field.step(&x[..n], dt, &y)) - f(t, &x[..n]);
                    cases += record(truth, d.reconstruct(&Realization::Unit(u)));
                }
            }
            _ => {
                let law = random_law(&mut rng, 4);
                let atoms = law.support_size().unwrap();
                let basis = gram_schmidt_basis(&law, atoms).unwrap();
                let drivers = rng.random_range(1..atoms);
                let joint = JointLaw::from_basis(&basis, drivers).unwrap();
                let field = SchemeField::constant(drivers, rng.random_range(0.1..1.5), rng.random_range(-1.0..1.0));
                let dt = rng.random_range(0.01..0.5);
                let state = StatePoint::new(1, t, x[..drivers].to_vec());
                let d = decompose_joint_scheme(&f, &state, &field, &joint, dt).unwrap();
                for (i, y) in joint.atoms().iter().enumerate() {
                    let truth = f(t + dt, &field.step(&x[..drivers], dt, y)) - f(t, &x[..drivers]);
                    cases += record(truth, d.reconstruct(&Realization::Atom(i)));
                }
            }
        }
        kind += 1;
    }
    outcome(worst <= 1e-10, format!("{cases} cases, max reconstruction error {worst:.2e} (tolerance 1e-10)"))
}

fn bernoulli_coefficients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let law = IncrementLaw::symmetric_bernoulli();
    let basis = gram_schmidt_basis(&law, 2).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let f = move |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x.sin();
        let w = rng.random_range(-2.0..2.0);
        let d = decompose_walk_1d(f, &StatePoint::origin(vec![w]), &law, &basis, 2).unwrap();
        let (up, down) = (f(w + 1.0), f(w - 1.0));
        worst = worst.max((d.martingale_coeffs[0] - (up - down) / 2.0).abs());
        worst = worst.max((d.drift_part() - ((up + down) / 2.0 - f(w))).abs());
    }
    outcome(worst <= 1e-14, format!("100 functions, max coefficient error {worst:.2e} (tolerance 1e-14)"))
}

fn gram_error(system: &OrthonormalSystem<f64>, k: usize) -> f64 {
    let g = system.gram_matrix(k);
    let mut worst = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn orthonormality() -> Outcome {
    let walsh = gram_error(&OrthonormalSystem::walsh(&walsh_driver_vector(9)), 9);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let laws = (0..20)
        .map(|_| {
            let law = random_law(&mut rng, 6);
            let m = law.support_size().unwrap();
            gram_error(&gram_schmidt_basis(&law, m).unwrap(), m)
        })
        .fold(0.0f64, f64::max);
    outcome(
        walsh <= 1e-10 && laws <= 1e-10,
        format!("Walsh drivers {walsh:.2e}, 20 random laws {laws:.2e} (tolerance 1e-10)"),
    )
}

fn completeness_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut designs = vec![JointLaw::triangle(), JointLaw::product(&[IncrementLaw::symmetric_bernoulli()]).unwrap()];
    for atoms in 2..=5 {
        let law = random_law(&mut rng, atoms);
        let m = law.support_size().unwrap();
        designs.push(JointLaw::from_basis(&gram_schmidt_basis(&law, m).unwrap(), m - 1).unwrap());
    }
    let mut complete = 0.0f64;
    for joint in &designs {
        let n = joint.dimension();
        let f = random_function(&mut rng);
        let field = SchemeField::constant(n, 0.7, 0.2);
        let d = decompose_joint_scheme(&f, &StatePoint::origin(vec![0.3; n]), &field, joint, 0.1).unwrap();
        complete = complete.max(spanning_defect(&d));
    }
    let law = IncrementLaw::unit_trinomial();
    let basis = gram_schmidt_basis(&law, 3).unwrap();
    let d = decompose_walk_1d(|x| x * x, &StatePoint::origin(vec![0.4]), &law, &basis, 3).unwrap();
    let trinomial = spanning_defect(&d);
    outcome(
        complete <= 1e-10 && trinomial > 1e-3,
        format!(
            "{} designs with #G = n + 1: max defect {complete:.2e} (<= 1e-10); trinomial x^2: {trinomial:.3} (> 1e-3)",
            designs.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=2);
        let driver = if n == 1 {
            DriverKind::Product(vec![random_law(&mut rng, 3)])
        } else if rng.random_bool(0.5) {
            DriverKind::Joint(JointLaw::triangle())
        } else {
            let law = random_law(&mut rng, 3);
            let law = if law.support_size() == Some(3) { law } else { IncrementLaw::unit_trinomial() };
            DriverKind::Joint(JointLaw::from_basis(&gram_schmidt_basis(&law, 3).unwrap(), 2).unwrap())
        };
        let (s, m) = (rng.random_range(0.1..1.0), rng.random_range(-0.5..0.5));
        let field = SchemeField::euler_maruyama_diagonal(
            n,
            move |x: &[f64], o: &mut [f64]| o.iter_mut().zip(x).for_each(|(o, x)| *o = s * (1.0 + 0.3 * x.cos())),
            move |x: &[f64], o: &mut [f64]| o.iter_mut().zip(x).for_each(|(o, x)| *o = m - 0.5 * x),
        );
        let steps = rng.random_range(1..=6);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = random_function(&mut rng);
        let g = |x: &[f64]| f(1.0, x);
        let sol = backward_solve(&field, &driver, g, &x0, steps, 1.0, LatticeOptions::default()).unwrap();
        let paths = enumerate_paths(&field, &driver, &x0, steps, 1.0).unwrap();
        let oracle: f64 = paths.iter().map(|(p, w)| w * g(p.terminal())).sum();
        worst = worst.max((sol.root_value() - oracle).abs());
    }
    outcome(worst <= 1e-12, format!("50 instances, max |lattice - enumeration| {worst:.2e} (tolerance 1e-12)"))
}

fn consistency_rate() -> Outcome {
    let field = SchemeField::euler_maruyama_diagonal(
        1,
        |x: &[f64], o: &mut [f64]| o[0] = 0.8 + 0.2 * x[0],
        |x: &[f64], o: &mut [f64]| o[0] = 0.3 - 0.5 * x[0],
    );
    let cont = ContinuousGenerator::from_field(&field).unwrap();
    let phi = Polynomial::univariate(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let grid = [16usize, 32, 64, 128];
    let (mut dts, mut defects) = (Vec::new(), Vec::new());
    for n in grid {
        let disc =
            DiscreteGenerator::new(field.clone(), DriverKind::Product(vec![IncrementLaw::symmetric_bernoulli()]), n)
                .unwrap();
        dts.push(1.0 / n as f64);
        defects.push(consistency_defect(&disc, &cont, &phi, &[0.7]).unwrap());
    }
    let slope = fit_loglog(&dts, &defects).map_or(f64::NAN, |f| f.slope);
    outcome((0.85..=1.15).contains(&slope), format!("x^4 defect over N = {grid:?}: slope {slope:.4} (in [0.85, 1.15])"))
}

fn rate_dichotomy() -> Outcome {
    let options = OrderOptions::default();
    let matched = moment_matched_experiment(&MOMENT_MATCHED_GRID, 24301, options);
    let market = complete_market_experiment(&COMPLETE_MARKET_GRID, 60, 24301, options);
    match (matched, market) {
        (Ok(a), Ok(report)) => {
            let b = report.fit;
            let (ia, ib) = (a.slope_interval(), b.slope_interval());
            let disjoint = ib.1 < ia.0 || ia.1 < ib.0;
            let pass = a.slope >= 0.8
                && (0.35..=0.70).contains(&b.slope)
                && disjoint
                && a.points.len() >= 4
                && b.points.len() >= 4;
            outcome(
                pass,
                format!(
                    "moment-matched slope {:.3} [{:.3}, {:.3}] (>= 0.8); #G = 3 slope {:.3} [{:.3}, {:.3}] (in [0.35, 0.70]); \
                     intervals disjoint: {disjoint}",
                    a.slope, ia.0, ia.1, b.slope, ib.0, ib.1
                ),
            )
        }
        (a, b) => outcome(false, format!("experiment failed: {:?} / {:?}", a.err(), b.err())),
    }
}

fn third_moment_obstruction() -> Outcome {
    let d = DesignMoments::of(&JointLaw::triangle());
    let mean = d.mean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cov = [1.0, 0.0, 0.0, 1.0].iter().zip(&d.covariance).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    outcome(
        mean <= 1e-12 && cov <= 1e-12 && d.third_mismatch > 0.1,
        format!("|mean| {mean:.1e}, |cov - I| {cov:.1e}, third-moment mismatch {:.4} (> 0.1)", d.third_mismatch),
    )
}

fn high_dimension() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let sampler = Sampler::LowDiscrepancy { seed: 17, kind: QmcKind::Halton };
    match pool.install(|| high_dimension_smoke(100, 16, 1 << 14, sampler)) {
        Ok(r) => outcome(
            r.z_score <= 3.0,
            format!(
                "n = 100, M = 2^14, N = 16, one thread: estimate {:.6} vs exact {:.6}, {:.2} standard errors (<= 3)",
                r.run.estimate, r.exact, r.z_score
            ),
        ),
        Err(e) => outcome(false, format!("run failed: {e}")),
    }
}

fn preset_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("dito-acceptance-{}", std::process::id()));
    let mut failures = Vec::new();
    for p in PRESETS {
        let mut outputs = Vec::new();
        for (run, threads) in [(0, None), (1, Some("2"))] {
            let out = dir.join(p.name).join(run.to_string());
            let mut cmd = Process::new(env!("CARGO_BIN_EXE_dito"));
            cmd.args([p.command.name(), "--preset", p.name, "--out"]).arg(&out);
            if let Some(t) = threads {
                cmd.args(["--threads", t]);
            }
            let status = cmd.output().map(|o| o.status.success()).unwrap_or(false);
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .map(|d| d.filter_map(Result::ok).map(|e| e.path()).collect())
                .unwrap_or_default();
            files.retain(|f| f.file_name().is_some_and(|n| n != dito::TIMING_FILE));
            files.sort();
            let contents: Vec<_> =
                files.iter().map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap())).collect();
            outputs.push((status, contents));
        }
        if !(outputs[0].0 && outputs[1].0 && outputs[0].1 == outputs[1].1 && !outputs[0].1.is_empty()) {
            failures.push(p.name);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        failures.is_empty(),
        format!("{} presets run twice (second with 2 threads); differing or failing: {failures:?}", PRESETS.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("pathwise decomposition identity", pathwise_identity),
        ("Bernoulli half-sum and half-difference coefficients", bernoulli_coefficients),
        ("orthonormality", orthonormality),
        ("completeness dichotomy", completeness_dichotomy),
        ("lattice equals path enumeration", oracle_equivalence),
        ("consistency rate", consistency_rate),
        ("weak-rate dichotomy", rate_dichotomy),
        ("third-moment obstruction", third_moment_obstruction),
        ("high-dimension smoke test", high_dimension),
        ("CLI determinism", preset_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {} [{:.1} s]", i + 1, o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
