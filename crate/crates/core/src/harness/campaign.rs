use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{CheckId, ExperimentConfig, LadderConfig};
use super::report::{CheckOutcome, CheckRecord, Environment, VerificationReport};
use crate::error::{Error, Result};
use crate::excursion::{
    decompose_excursions, residual_on_window, restart_residual, verify_endpoint_limits,
    verify_initial_identity, window, write_excursion_report,
};
use crate::fbm::{
    generate_fbm, generate_fbm_with_fallback, refine_midpoint, FbmPath, GeneratorTag, SeedRecord,
};
use crate::limit::{
    build_family_with, check_nesting, compute_compensator, verify_eps_continuity,
    verify_limit_nonnegativity, verify_measure_decay, verify_upper_bound, write_family_csv,
    EpsilonFamily, FLOOR_FRACTION,
};
use crate::picard::{picard_solve, select_delta, write_iteration_log, LocalProblem};
use crate::sde::{SdeSpec, StepScheme};

/// Check nodes used when certifying the Picard horizon.
const PICARD_CHECK_NODES: usize = 200;
/// Grid steps of the Picard iteration on `[0, δ]`.
const PICARD_STEPS: usize = 1024;

struct PathResult {
    outcomes: BTreeMap<CheckId, (CheckOutcome, Duration)>,
    /// First- and last-level nonpositive measure.
    measures: Option<(f64, f64)>,
}

/// Per-path state: the noise and the families built so far, by ladder.
struct PathContext<'a> {
    config: &'a ExperimentConfig,
    spec: SdeSpec<f64>,
    noise: FbmPath<f64>,
    families: Vec<(
        LadderConfig,
        std::result::Result<EpsilonFamily<f64>, String>,
    )>,
}

impl<'a> PathContext<'a> {
    fn family(&mut self, ladder: LadderConfig) -> std::result::Result<&EpsilonFamily<f64>, String> {
        let pos = match self.families.iter().position(|(l, _)| *l == ladder) {
            Some(p) => p,
            None => {
                let built = build(self.config, &self.spec, &self.noise, ladder);
                self.families.push((ladder, built));
                self.families.len() - 1
            }
        };
        self.families[pos].1.as_ref().map_err(Clone::clone)
    }
}

fn build(
    config: &ExperimentConfig,
    spec: &SdeSpec<f64>,
    noise: &FbmPath<f64>,
    ladder: LadderConfig,
) -> std::result::Result<EpsilonFamily<f64>, String> {
    let ladder = ladder.build().map_err(|e| e.to_string())?;
    build_family_with(
        spec,
        noise,
        ladder,
        StepScheme::default(),
        config.tolerances.tol_mono,
    )
    .map_err(|e| e.to_string())
}

fn make_noise(config: &ExperimentConfig, index: u64) -> Result<FbmPath<f64>> {
    let grid = config.time_grid()?;
    let hurst = config.sde_spec()?.hurst;
    if config.zero_noise {
        return Ok(FbmPath::zero(grid, hurst));
    }
    let seed = SeedRecord::new(config.seeds.master_seed, index);
    match config.generator {
        GeneratorTag::Circulant => generate_fbm_with_fallback(grid, hurst, seed),
        GeneratorTag::Zero => Ok(FbmPath::zero(grid, hurst)),
        other => generate_fbm(grid, hurst, seed, other),
    }
}

/// Runs every enabled check on every path, writes the report (and per-path
/// CSVs when enabled) to `out_dir`, and returns the report.
pub fn run_campaign(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<VerificationReport> {
    config.validate()?;
    let started = Instant::now();
    let hash = config.hash();
    let dir: Option<PathBuf> = out_dir.map(Path::to_path_buf);
    if let Some(d) = &dir {
        std::fs::create_dir_all(d)?;
    }
    let results: Vec<PathResult> = (0..config.seeds.paths)
        .into_par_iter()
        .map(|index| run_path(config, index, dir.as_deref(), &hash))
        .collect::<Result<_>>()?;

    let report = aggregate(config, &hash, &results, started.elapsed());
    if let Some(d) = &dir {
        std::fs::write(d.join("report.json"), report.to_json()?)?;
    }
    Ok(report)
}

fn run_path(
    config: &ExperimentConfig,
    index: u64,
    dir: Option<&Path>,
    hash: &str,
) -> Result<PathResult> {
    let spec = config.sde_spec()?;
    let mut outcomes = BTreeMap::new();
    let mut measures = None;
    let noise = match make_noise(config, index) {
        Ok(n) => n,
        Err(e) => {
            for &id in &config.checks {
                outcomes.insert(
                    id,
                    (
                        CheckOutcome::aborted(format!("noise generation: {e}")),
                        Duration::ZERO,
                    ),
                );
            }
            return Ok(PathResult { outcomes, measures });
        }
    };
    let mut ctx = PathContext {
        config,
        spec,
        noise,
        families: Vec::new(),
    };
    let mut picard_log = None;
    for &id in &config.checks {
        let t0 = Instant::now();
        let outcome = match run_check(&mut ctx, id, &mut measures, &mut picard_log) {
            Ok(o) => o,
            Err(msg) => CheckOutcome::aborted(msg),
        };
        outcomes.insert(id, (outcome, t0.elapsed()));
    }
    if let Some(d) = dir.filter(|_| config.write_paths) {
        write_path_artifacts(&mut ctx, d, index, hash, picard_log.as_deref())?;
    }
    Ok(PathResult { outcomes, measures })
}

type CheckResult = std::result::Result<CheckOutcome, String>;

fn run_check(
    ctx: &mut PathContext<'_>,
    id: CheckId,
    measures: &mut Option<(f64, f64)>,
    picard_log: &mut Option<Vec<crate::picard::IterationRecord<f64>>>,
) -> CheckResult {
    let config = ctx.config;
    let tol = config.tolerances;
    let spec = ctx.spec;
    let ladder = config.ladder_for(id);
    let err = |e: Error| e.to_string();
    match id {
        CheckId::Ordering => {
            let f = ctx.family(ladder)?;
            let m = f.monotonicity;
            let mut o = CheckOutcome::at_most(m.worst, tol.tol_mono)
                .and(m.violations == 0, "ordering violated");
            if let Some((j, k)) = m.first_break {
                o = o.with_note(format!(
                    "{} violations, first at level {j} node {k}",
                    m.violations
                ));
            }
            Ok(o)
        }
        CheckId::Nesting => {
            let f = ctx.family(ladder)?;
            let n = check_nesting(f);
            let o = CheckOutcome::at_most(if n.nested { 0.0 } else { 1.0 }, 0.0);
            Ok(match n.first_break {
                Some((j, k)) => o.with_note(format!("containment breaks at level {j} node {k}")),
                None => o,
            })
        }
        CheckId::UpperBound => {
            let f = ctx.family(ladder)?;
            let c = verify_upper_bound(f);
            Ok(CheckOutcome::at_most(c.max_violation, tol.tol_bound))
        }
        CheckId::MeasureDecay => {
            let f = ctx.family(ladder)?;
            let threshold = tol.measure_threshold * f.grid().horizon();
            let d = verify_measure_decay(f, threshold);
            *measures = Some((d.first(), d.last()));
            Ok(CheckOutcome::at_most(d.last(), threshold)
                .and(d.nonincreasing, "measure increased down the ladder"))
        }
        CheckId::Nonnegativity => {
            let f = ctx.family(ladder)?;
            let t = f.cauchy_gap + tol.tol_nonneg;
            let c = verify_limit_nonnegativity(f, t);
            let o = CheckOutcome::at_least_minus(c.worst_value, t);
            Ok(if c.ladder_too_shallow {
                o.with_note(format!(
                    "worst at node {}; ladder too shallow",
                    c.worst_node
                ))
            } else {
                o
            })
        }
        CheckId::Compensator => {
            let f = ctx.family(ladder)?;
            let c = compute_compensator(f, FLOOR_FRACTION * spec.x0);
            Ok(if config.zero_noise {
                CheckOutcome::at_most(c.max_abs(), c.vanishing_tolerance())
            } else {
                let t = 2.0 * c.cauchy_gap + c.truncation_budget + tol.tol_compensator;
                CheckOutcome::at_least_minus(c.min(), t)
            })
        }
        CheckId::Contraction => {
            let p = LocalProblem::from_sde(&spec, &ctx.noise).map_err(err)?;
            let cert = select_delta(&p, PICARD_CHECK_NODES).map_err(err)?;
            let sol = picard_solve(&p, &cert, PICARD_STEPS, tol.picard).map_err(err)?;
            let ratio = sol.max_ratio().unwrap_or(0.0);
            let o = CheckOutcome::at_most(ratio, cert.q + tol.picard_slack)
                .and(
                    sol.residual <= 2.0 * tol.picard,
                    "fixed-point residual above 2·tolerance",
                )
                .with_note(format!(
                    "delta = {}, q = {}, iterations = {}",
                    cert.delta,
                    cert.q,
                    sol.log.len()
                ));
            *picard_log = Some(sol.log);
            Ok(o)
        }
        CheckId::EpsContinuity => {
            let c = &config.continuity;
            let table = verify_eps_continuity(
                &spec,
                &ctx.noise,
                c.eps_star,
                &c.steps,
                StepScheme::default(),
            )
            .map_err(err)?;
            let shrink = |g: &[f64]| {
                let (first, last) = (g[0], *g.last().unwrap());
                if first == 0.0 {
                    0.0
                } else {
                    last / first
                }
            };
            let worst = shrink(&table.above).max(shrink(&table.below));
            let mut o = CheckOutcome::at_most(worst, 0.25);
            o.passed = table.passed;
            Ok(o)
        }
        CheckId::EndpointLimits => {
            let f = ctx.family(ladder)?;
            let set = decompose_excursions(&f.limit_estimate, 0.0);
            let t = f.cauchy_gap + tol.tol_endpoint;
            let checks = verify_endpoint_limits(
                &f.limit_estimate,
                &f.noise,
                &spec,
                &set,
                t,
                config.excursions.approach,
            );
            let worst = checks
                .iter()
                .flat_map(|c| [c.alpha_value, c.beta_value])
                .flatten()
                .map(f64::abs)
                .fold(0.0, f64::max);
            let bad = checks.iter().filter(|c| !c.passed).count();
            let o = CheckOutcome::at_most(worst, t);
            Ok(if bad > 0 {
                let mut o = o.and(false, "approach to zero too steep");
                o.note = Some(format!("{bad} of {} intervals failed", checks.len()));
                o
            } else {
                o
            })
        }
        CheckId::InitialIdentity => {
            let f = ctx.family(ladder)?;
            let id = verify_initial_identity(f, config.excursions.margin).map_err(err)?;
            Ok(CheckOutcome::at_most(id.residual.sup_residual, id.budget))
        }
        CheckId::RestartRefinement => restart_refinement(ctx, ladder),
    }
}

/// Windows (from the coarse path) must show a smaller residual on the
/// nested 2× grid, unless the fine residual is already within twice the
/// fine Cauchy gap, the resolution of the ladder.
fn restart_refinement(ctx: &mut PathContext<'_>, ladder: LadderConfig) -> CheckResult {
    let config = ctx.config;
    let spec = ctx.spec;
    let err = |e: Error| e.to_string();
    let coarse = ctx.family(ladder)?.clone();
    let fine_noise = if config.zero_noise {
        FbmPath::zero(ctx.noise.grid.refined(), ctx.noise.hurst)
    } else {
        refine_midpoint(&ctx.noise).map_err(err)?
    };
    let fine = build(config, &spec, &fine_noise, ladder)?;
    let set = decompose_excursions(&coarse.limit_estimate, coarse.cauchy_gap + 1e-6);
    let floor = 2.0 * fine.cauchy_gap;
    let mut worst: f64 = 0.0;
    let mut windows = 0;
    let mut failures = 0;
    for e in &set.intervals {
        let (s, t) = window(e, config.excursions.margin);
        if t <= s || t - s - 1 < config.excursions.min_interior {
            continue;
        }
        windows += 1;
        let rc = residual_on_window(&coarse.limit_estimate, &coarse.noise, &spec, s, t)
            .map_err(err)?
            .sup_residual;
        let rf = residual_on_window(&fine.limit_estimate, &fine_noise, &spec, 2 * s, 2 * t)
            .map_err(err)?
            .sup_residual;
        let ratio = if rc > 0.0 {
            rf / rc
        } else if rf > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if !(rf < rc || rf <= floor) {
            failures += 1;
        }
        worst = worst.max(ratio);
    }
    let mut o = CheckOutcome::at_most(worst, 1.0);
    o.passed = failures == 0;
    o.excess = if failures == 0 { 0.0 } else { worst - 1.0 };
    Ok(o.with_note(format!("{windows} windows, {failures} without improvement")))
}

fn header(out: &mut impl Write, hash: &str) -> std::io::Result<()> {
    writeln!(out, "# config_hash={hash}")
}

fn write_path_artifacts(
    ctx: &mut PathContext<'_>,
    dir: &Path,
    index: u64,
    hash: &str,
    picard_log: Option<&[crate::picard::IterationRecord<f64>]>,
) -> Result<()> {
    let io = |stage: &'static str| {
        move |source: std::io::Error| Error::Artifact {
            path_index: index,
            stage,
            source,
        }
    };
    let wrap = |stage: &'static str| {
        move |e: Error| match e {
            Error::Io(source) => Error::Artifact {
                path_index: index,
                stage,
                source,
            },
            other => other,
        }
    };
    let path_dir = dir.join("paths").join(format!("path_{index:05}"));
    std::fs::create_dir_all(&path_dir).map_err(io("create path directory"))?;
    let open = |name: &str, stage: &'static str| -> Result<BufWriter<File>> {
        let mut w = BufWriter::new(File::create(path_dir.join(name)).map_err(io(stage))?);
        header(&mut w, hash).map_err(io(stage))?;
        Ok(w)
    };

    let (config, spec) = (ctx.config, ctx.spec);
    if let Ok(family) = ctx.family(config.ladder) {
        let mut w = open("family.csv", "write family csv")?;
        write_family_csv(family, &mut w).map_err(wrap("write family csv"))?;

        let set = decompose_excursions(&family.limit_estimate, 0.0);
        let residuals: Vec<_> = (0..set.intervals.len())
            .map(|i| {
                restart_residual(
                    &family.limit_estimate,
                    &family.noise,
                    &spec,
                    &set,
                    i,
                    config.excursions.margin,
                )
                .ok()
            })
            .collect();
        let mut w = open("excursions.csv", "write excursion report")?;
        write_excursion_report(
            &family.limit_estimate,
            family.grid(),
            &set,
            &residuals,
            &mut w,
        )
        .map_err(wrap("write excursion report"))?;
    }
    if let Some(log) = picard_log {
        let mut w = open("picard_log.csv", "write iteration log")?;
        write_iteration_log(log, &mut w).map_err(wrap("write iteration log"))?;
    }
    Ok(())
}

fn aggregate(
    config: &ExperimentConfig,
    hash: &str,
    results: &[PathResult],
    elapsed: Duration,
) -> VerificationReport {
    let paths = config.seeds.paths;
    let mut checks = BTreeMap::new();
    for &id in &config.checks {
        let allowed = (config.allowance(id) * paths as f64 + 1e-9).floor() as u64;
        let mut rec = CheckRecord {
            description: id.description().to_string(),
            pass: true,
            pass_count: 0,
            fail_count: 0,
            allowed_failures: allowed,
            worst_value: None,
            tolerance: None,
            worst_path: None,
            seeds: 0,
            failed_paths: Vec::new(),
            notes: BTreeMap::new(),
            summary: BTreeMap::new(),
            runtime_seconds: 0.0,
        };
        let mut worst_excess = f64::NEG_INFINITY;
        for (index, r) in results.iter().enumerate() {
            let Some((o, dt)) = r.outcomes.get(&id) else {
                continue;
            };
            let index = index as u64;
            rec.seeds += 1;
            rec.runtime_seconds += dt.as_secs_f64();
            if o.passed {
                rec.pass_count += 1;
            } else {
                rec.fail_count += 1;
                rec.failed_paths.push(index);
                if let Some(n) = &o.note {
                    rec.notes.insert(index, n.clone());
                }
            }
            if o.excess > worst_excess {
                worst_excess = o.excess;
                rec.worst_value = Some(o.worst_value).filter(|v| v.is_finite());
                rec.tolerance = Some(o.tolerance).filter(|v| v.is_finite());
                rec.worst_path = Some(index);
            }
        }
        if id == CheckId::MeasureDecay {
            let m: Vec<(f64, f64)> = results.iter().filter_map(|r| r.measures).collect();
            if !m.is_empty() {
                let n = m.len() as f64;
                let first = m.iter().map(|p| p.0).sum::<f64>() / n;
                let last = m.iter().map(|p| p.1).sum::<f64>() / n;
                rec.summary.insert("mean_first_level".into(), first);
                rec.summary.insert("mean_last_level".into(), last);
                if first > 0.0 && !(last < first) {
                    rec.pass = false;
                }
            }
        }
        rec.pass &= rec.fail_count <= allowed;
        checks.insert(id, rec);
    }
    let failed = checks.values().filter(|c| !c.pass).count() as u64;
    VerificationReport {
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: hash.to_string(),
        },
        master_seed: config.seeds.master_seed,
        paths,
        zero_noise: config.zero_noise,
        passed_checks: checks.len() as u64 - failed,
        failed_checks: failed,
        checks,
        runtime_seconds: elapsed.as_secs_f64(),
    }
}
