//! End-to-end acceptance suite. Each test prints one PASS/FAIL line with
//! the measured numbers (written straight to stderr so it survives output
//! capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use singular_fbm::excursion::{
    decompose_excursions, residual_on_window, verify_initial_identity, window, DEFAULT_MARGIN,
};
use singular_fbm::fbm::{
    fgn_autocovariance, generate_fbm, generate_fgn, refine_midpoint, FbmPath, GeneratorTag,
    HurstParam, SeedRecord, TimeGrid,
};
use singular_fbm::harness::{run_campaign, CheckId, ExperimentConfig, LadderConfig};
use singular_fbm::limit::{
    build_family, check_nesting, compute_compensator, verify_eps_continuity,
    verify_limit_nonnegativity, verify_measure_decay, verify_upper_bound, EpsilonFamily,
    EpsilonLadder, FLOOR_FRACTION,
};
use singular_fbm::picard::{picard_solve, select_delta, LocalProblem};
use singular_fbm::sde::{solve_regularized, SdeSpec, StepScheme};

fn verdict(name: &str, passed: bool, detail: String) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} {name}: {detail}");
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn quarter() -> HurstParam<f64> {
    HurstParam::new(0.25).unwrap()
}

/// (X0, a, b, sigma) = (1, 1, 1/2, 1), H = 1/4.
fn campaign_spec() -> SdeSpec<f64> {
    SdeSpec::new(1.0, 1.0, 0.5, 1.0, quarter()).unwrap()
}

fn noise(seed: u64, index: u64, steps: usize) -> FbmPath<f64> {
    let grid = TimeGrid::new(1.0, steps).unwrap();
    generate_fbm(
        grid,
        quarter(),
        SeedRecord::new(seed, index),
        GeneratorTag::Circulant,
    )
    .unwrap()
}

fn families(
    seed: u64,
    paths: u64,
    steps: usize,
    ladder: EpsilonLadder<f64>,
) -> Vec<EpsilonFamily<f64>> {
    let spec = campaign_spec();
    (0..paths)
        .into_par_iter()
        .map(|i| build_family(&spec, &noise(seed, i, steps), ladder).unwrap())
        .collect()
}

#[test]
fn fgn_autocovariance_matches_kernel() {
    const N: usize = 1024;
    const PATHS: u64 = 4096;
    const LAGS: usize = 10;
    let start = Instant::now();
    let mut worst_z: f64 = 0.0;
    let mut misses = Vec::new();
    for h in [0.1, 0.25, 0.4] {
        let hurst = HurstParam::new(h).unwrap();
        // per-path lag estimates
        let per_path: Vec<[f64; LAGS + 1]> = (0..PATHS)
            .into_par_iter()
            .map(|i| {
                let mut rng = SeedRecord::new(20_240_501, i).rng(0);
                let z: Vec<f64> =
                    generate_fgn(N, hurst, &mut rng, GeneratorTag::Circulant).unwrap();
                let mut row = [0.0; LAGS + 1];
                for (k, r) in row.iter_mut().enumerate() {
                    *r = (0..N - k).map(|t| z[t] * z[t + k]).sum::<f64>() / (N - k) as f64;
                }
                row
            })
            .collect();
        for k in 0..=LAGS {
            let m = PATHS as f64;
            let mean = per_path.iter().map(|r| r[k]).sum::<f64>() / m;
            let var = per_path.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let se = (var / m).sqrt();
            let z = (mean - fgn_autocovariance(k, hurst)).abs() / se;
            worst_z = worst_z.max(z);
            if z > 4.0 {
                misses.push((h, k, z));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = misses.is_empty() && secs < 60.0;
    verdict(
        "fgn_autocovariance",
        passed,
        format!("worst |z| = {worst_z:.2} over 33 lags (limit 4), {secs:.1} s (limit 60), misses {misses:?}"),
    );
    assert!(passed);
}

#[test]
fn deterministic_oracle_solver_and_picard() {
    let spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, quarter()).unwrap();
    let oracle = |t: f64| (1.0 + t.sqrt() / 0.25).sqrt();
    let rel = |values: &[f64], grid: TimeGrid<f64>| {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| ((v - oracle(grid.node(k))) / oracle(grid.node(k))).abs())
            .fold(0.0, f64::max)
    };

    let mut solver_errors = Vec::new();
    for p in 10..=14 {
        let grid = TimeGrid::new(0.5, 1 << p).unwrap();
        let path = solve_regularized(&spec, 1e-12, &FbmPath::zero(grid, quarter())).unwrap();
        solver_errors.push(rel(&path.values, grid));
    }

    let mut picard_errors = Vec::new();
    let mut delta = 0.0;
    for p in 10..=14 {
        let quiet = FbmPath::zero(TimeGrid::new(1.0, 1024).unwrap(), quarter());
        let problem = LocalProblem::from_sde(&spec, &quiet).unwrap();
        let cert = select_delta(&problem, 200).unwrap();
        delta = cert.delta;
        let sol = picard_solve(&problem, &cert, 1 << p, 1e-12).unwrap();
        picard_errors.push(rel(&sol.values, sol.grid));
    }

    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let solver_ok = solver_errors[4] <= 1e-3 && decreasing(&solver_errors);
    let picard_ok = picard_errors[4] <= 1e-4 && decreasing(&picard_errors);
    let passed = solver_ok && picard_ok;
    verdict(
        "deterministic_oracle",
        passed,
        format!(
            "solver rel err n=2^10..2^14 {} (limit 1e-3), picard on [0, {delta}] {} (limit 1e-4)",
            sci(&solver_errors),
            sci(&picard_errors)
        ),
    );
    assert!(passed);
}

/// Shared campaign for ordering, nesting, the upper bound, measure decay
/// and nonnegativity: 100 seeds, n = 4096, ladder 0.1 · 0.5^j, j ≤ 10.
fn ladder_campaign() -> &'static [EpsilonFamily<f64>] {
    static CELL: std::sync::OnceLock<Vec<EpsilonFamily<f64>>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| families(7, 100, 4096, EpsilonLadder::new(0.1, 0.5, 10).unwrap()))
}

#[test]
fn ordering_and_nesting() {
    let fams = ladder_campaign();
    let violations: usize = fams.iter().map(|f| f.monotonicity.violations).sum();
    let tol = fams[0].monotonicity.tolerance;
    let unnested: Vec<usize> = (0..fams.len())
        .filter(|&i| !check_nesting(&fams[i]).nested)
        .collect();
    let passed = violations == 0 && unnested.is_empty() && tol <= 1e-12;
    verdict(
        "ordering_and_nesting",
        passed,
        format!(
            "{} seeds: {violations} ordering violations (tol {tol:e}), non-nested seeds {unnested:?}",
            fams.len()
        ),
    );
    assert!(passed);
}

#[test]
fn uniform_upper_bound() {
    let fams = ladder_campaign();
    let constant = SdeSpec::new(1.0, 1.0, 0.0, 1.0, quarter())
        .unwrap()
        .bound_constant(1.0);
    let certs: Vec<_> = fams.iter().map(verify_upper_bound).collect();
    let worst = certs
        .iter()
        .map(|c| c.max_violation)
        .fold(f64::NEG_INFINITY, f64::max);
    let failures = certs.iter().filter(|c| !c.passes(1e-9)).count();
    let passed = failures == 0 && (constant - 5.0).abs() < 1e-12;
    verdict(
        "uniform_upper_bound",
        passed,
        format!("C = {constant}, worst excess over bound {worst:.3e} (tol 1e-9), {failures} failing seeds"),
    );
    assert!(passed);
}

#[test]
fn nonpositive_measure_decays() {
    let fams = ladder_campaign();
    let decays: Vec<_> = fams.iter().map(|f| verify_measure_decay(f, 0.02)).collect();
    let increasing: Vec<usize> = (0..decays.len())
        .filter(|&i| !decays[i].nonincreasing)
        .collect();
    let m = decays.len() as f64;
    let first = decays.iter().map(|d| d.first()).sum::<f64>() / m;
    let last = decays.iter().map(|d| d.last()).sum::<f64>() / m;
    let passed = increasing.is_empty() && (first <= 0.0 || last < first);
    verdict(
        "nonpositive_measure_decay",
        passed,
        format!("seed-mean measure level 0 {first:.4e}, level J {last:.4e}; seeds with an increase {increasing:?}"),
    );
    assert!(passed);
}

#[test]
fn limit_is_nonnegative() {
    let fams = ladder_campaign();
    let checks: Vec<_> = fams
        .iter()
        .map(|f| verify_limit_nonnegativity(f, f.cauchy_gap + 1e-9))
        .collect();
    let failing: Vec<usize> = (0..checks.len()).filter(|&i| !checks[i].passed).collect();
    let worst = checks
        .iter()
        .map(|c| c.worst_value)
        .fold(f64::INFINITY, f64::min);
    let passed = failing.is_empty();
    verdict(
        "limit_nonnegativity",
        passed,
        format!("min limit value {worst:.3e} (allowed -(gap + 1e-9)); failing seeds {failing:?}"),
    );
    assert!(passed);
}

#[test]
fn compensator_vanishes_or_stays_nonnegative() {
    let ladder = EpsilonLadder::new(0.1, 0.25, 10).unwrap();
    let quiet_spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, quarter()).unwrap();
    let quiet = FbmPath::zero(TimeGrid::new(1.0, 4096).unwrap(), quarter());
    let det = compute_compensator(
        &build_family(&quiet_spec, &quiet, ladder).unwrap(),
        FLOOR_FRACTION,
    );
    let det_ok = det.max_abs() <= det.vanishing_tolerance();

    let fams = families(11, 100, 4096, ladder);
    let floor = FLOOR_FRACTION * campaign_spec().x0;
    let mut failures = Vec::new();
    for (i, f) in fams.iter().enumerate() {
        let c = compute_compensator(f, floor);
        let t = 2.0 * c.cauchy_gap + c.truncation_budget + 1e-6;
        if c.min() < -t {
            failures.push((i, c.min(), t));
        }
    }
    for (i, min, t) in &failures {
        let _ = writeln!(
            std::io::stderr(),
            "  compensator seed {i}: min {min:.3e} below -{t:.3e}"
        );
    }
    let rate = 1.0 - failures.len() as f64 / fams.len() as f64;
    let passed = det_ok && rate >= 0.95;
    verdict(
        "compensator",
        passed,
        format!(
            "deterministic max|L| {:.3e} (tol {:.3e}); stochastic {:.0}% of {} seeds nonnegative within budget (need 95%)",
            det.max_abs(),
            det.vanishing_tolerance(),
            100.0 * rate,
            fams.len()
        ),
    );
    assert!(passed);
}

#[test]
fn picard_contraction() {
    let spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, quarter()).unwrap();
    let quiet = FbmPath::zero(TimeGrid::new(1.0, 1024).unwrap(), quarter());
    let problem = LocalProblem::from_sde(&spec, &quiet).unwrap();
    let q01 = problem.contraction_modulus(0.01);

    let mut lines = Vec::new();
    let mut ok = (q01 - 0.8).abs() < 1e-12;
    // driver-free plus a few noisy drivers for good measure
    let mut problems = vec![("driver-free".to_string(), problem)];
    let noisy = SdeSpec::new(1.0, 1.0, 0.5, 0.1, quarter()).unwrap();
    for i in 0..5 {
        let p = LocalProblem::from_sde(&noisy, &noise(3, i, 1024)).unwrap();
        problems.push((format!("noisy seed {i}"), p));
    }
    for (name, p) in &problems {
        let cert = select_delta(p, 200).unwrap();
        match picard_solve(p, &cert, 1024, 1e-10) {
            Ok(sol) => {
                let ratio = sol.max_ratio().unwrap_or(0.0);
                let good = ratio <= cert.q + 0.05 && sol.log.len() <= sol.budget;
                ok &= good;
                lines.push(format!(
                    "{name}: δ={} q={:.4} max ratio {ratio:.4}, {} of {} iterations",
                    cert.delta,
                    cert.q,
                    sol.log.len(),
                    sol.budget
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("{name}: {e}"));
            }
        }
    }
    verdict(
        "picard_contraction",
        ok,
        format!("q(0.01) = {q01}; {}", lines.join("; ")),
    );
    assert!(ok);
}

#[test]
fn epsilon_continuity() {
    let spec = campaign_spec();
    let three = [0.025, 0.0125, 0.00625];
    let four = [0.025, 0.0125, 0.00625, 0.003125];
    let tables: Vec<_> = (0..50)
        .into_par_iter()
        .map(|i| {
            let b = noise(13, i, 4096);
            let t3 = verify_eps_continuity(&spec, &b, 0.05, &three, StepScheme::default()).unwrap();
            let t4 = verify_eps_continuity(&spec, &b, 0.05, &four, StepScheme::default()).unwrap();
            (t3, t4)
        })
        .collect();
    let ratio = |g: &[f64]| g.last().unwrap() / g[0];
    let worst = |pick: fn(&(_, _)) -> &singular_fbm::limit::ContinuityTable<f64>| {
        tables
            .iter()
            .map(|t| ratio(&pick(t).above).max(ratio(&pick(t).below)))
            .fold(0.0, f64::max)
    };
    let pass3 = tables.iter().filter(|t| t.0.passed).count();
    let pass4 = tables.iter().filter(|t| t.1.passed).count();
    let _ = writeln!(
        std::io::stderr(),
        "  eps_continuity three h values: {pass3}/50 seeds, worst last/first {:.3}",
        worst(|t| &t.0)
    );
    let passed = pass4 == 50;
    verdict(
        "eps_continuity",
        passed,
        format!(
            "ε* = 0.05, h = ε*/2 .. ε*/16: {pass4}/50 seeds nonincreasing with last ≤ first/4, worst ratio {:.3}",
            worst(|t| &t.1)
        ),
    );
    assert!(passed);
}

#[test]
fn restart_residuals_and_initial_identity() {
    const MIN_INTERIOR: usize = 20;
    let spec = campaign_spec();
    let ladder = EpsilonLadder::new(0.1, 0.1, 14).unwrap();
    let per_seed: Vec<_> = (0..50)
        .into_par_iter()
        .map(|i| {
            let coarse_noise = noise(17, i, 2048);
            let fine_noise = refine_midpoint(&coarse_noise).unwrap();
            let coarse = build_family(&spec, &coarse_noise, ladder).unwrap();
            let fine = build_family(&spec, &fine_noise, ladder).unwrap();
            let set = decompose_excursions(&coarse.limit_estimate, coarse.cauchy_gap + 1e-6);
            let mut windows = Vec::new();
            for e in &set.intervals {
                let (s, t) = window(e, DEFAULT_MARGIN);
                if t <= s || t - s - 1 < MIN_INTERIOR {
                    continue;
                }
                let rc = residual_on_window(&coarse.limit_estimate, &coarse_noise, &spec, s, t)
                    .unwrap()
                    .sup_residual;
                let rf = residual_on_window(&fine.limit_estimate, &fine_noise, &spec, 2 * s, 2 * t)
                    .unwrap()
                    .sup_residual;
                windows.push((rc, rf));
            }
            let identity = verify_initial_identity(&coarse, DEFAULT_MARGIN).unwrap();
            (windows, identity)
        })
        .collect();
    let windows: Vec<(f64, f64)> = per_seed.iter().flat_map(|s| s.0.iter().copied()).collect();
    let improved = windows.iter().filter(|(rc, rf)| rf < rc).count();
    let worst_ratio = windows.iter().map(|(rc, rf)| rf / rc).fold(0.0, f64::max);
    let identity_fail: Vec<usize> = (0..per_seed.len())
        .filter(|&i| !per_seed[i].1.passed)
        .collect();
    let worst_identity = per_seed
        .iter()
        .map(|s| s.1.residual.sup_residual / s.1.budget)
        .fold(0.0, f64::max);
    let passed = !windows.is_empty() && improved == windows.len() && identity_fail.is_empty();
    verdict(
        "restart_residuals",
        passed,
        format!(
            "{improved}/{} windows improve under 2x nested refinement (worst fine/coarse {worst_ratio:.3}); \
             initial identity residual/budget worst {worst_identity:.3}, failing seeds {identity_fail:?}",
            windows.len()
        ),
    );
    assert!(passed);
}

fn acceptance_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::deterministic_preset();
    c.zero_noise = false;
    c.spec.b = 0.5;
    c.grid.steps = 2048;
    c.seeds.master_seed = 99;
    c.seeds.paths = 50;
    c.ladder = LadderConfig {
        base: 0.1,
        ratio: 0.5,
        depth: 10,
    };
    let deep = |ratio, depth| LadderConfig {
        base: 0.1,
        ratio,
        depth,
    };
    c.ladder_overrides
        .insert(CheckId::Compensator, deep(0.25, 10));
    c.ladder_overrides
        .insert(CheckId::InitialIdentity, deep(0.1, 14));
    c.ladder_overrides
        .insert(CheckId::RestartRefinement, deep(0.1, 14));
    c.write_paths = false;
    c
}

#[test]
fn campaign_is_reproducible() {
    let config = acceptance_config();
    let start = Instant::now();
    let first = run_campaign(&config, None).unwrap();
    let second = run_campaign(&config, None).unwrap();
    let same = first.without_timing() == second.without_timing()
        && first.without_timing().to_json().unwrap() == second.without_timing().to_json().unwrap();
    let _ = write!(std::io::stderr(), "{}", first.render_table());
    verdict(
        "reproducibility",
        same,
        format!(
            "two runs of {} paths x {} checks, config {}, identical modulo timing: {same} ({:.1} s)",
            first.paths,
            first.checks.len(),
            &first.environment.config_hash[..12],
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(same);
}
