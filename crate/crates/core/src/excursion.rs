//! Excursions of a limit path away from zero and the restart identities
//! that hold on each of them.
//!
//! On an excursion interval `(α, β)` the compensator does not charge, so
//! `X_t = X_α* + a∫_{α*}^t s^{2H-1}/X_s ds - b∫_{α*}^t X_s ds + σ(B_t - B_α*)`
//! for any anchor `α*` inside the interval. [`restart_residual`] measures
//! how far a sampled path is from satisfying that identity.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fbm::{FbmPath, TimeGrid};
use crate::limit::{singular_integral_window, EpsilonFamily, FLOOR_FRACTION};
use crate::scalar::Real;
use crate::sde::{kernel_integral, SdeSpec};

/// Default retreat from each interval endpoint, in grid steps.
pub const DEFAULT_MARGIN: usize = 5;
/// Nodes next to each endpoint inspected by [`verify_endpoint_limits`].
pub const DEFAULT_APPROACH: usize = 3;

/// A maximal run of nodes `first..=last` above the threshold.
///
/// `alpha` and `beta` are the bracketing nodes at or below the threshold.
/// A run starting at node 0 is closed on the left and has `alpha = 0`; a run
/// reaching the horizon is censored on the right and has `beta = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Excursion {
    pub first: usize,
    pub last: usize,
    pub alpha: usize,
    pub beta: usize,
    pub closed_left: bool,
    pub censored_right: bool,
}

impl Excursion {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Both endpoints are observed zeros of the path.
    pub fn is_interior(&self) -> bool {
        !self.closed_left && !self.censored_right
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionSet<T> {
    pub intervals: Vec<Excursion>,
    pub first_interval_closed_left: bool,
    pub threshold: T,
}

impl<T: Real> ExcursionSet<T> {
    /// Indices of all nodes covered by some interval's run.
    pub fn covered(&self) -> Vec<usize> {
        self.intervals
            .iter()
            .flat_map(|e| e.first..=e.last)
            .collect()
    }
}

/// Maximal runs of consecutive nodes with `X̂ > threshold`.
pub fn decompose_excursions<T: Real>(values: &[T], threshold: T) -> ExcursionSet<T> {
    assert!(threshold >= T::zero(), "threshold must be nonnegative");
    let n = values.len().saturating_sub(1);
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < values.len() {
        if values[k] > threshold {
            let first = k;
            while k + 1 < values.len() && values[k + 1] > threshold {
                k += 1;
            }
            intervals.push(Excursion {
                first,
                last: k,
                alpha: first.saturating_sub(1),
                beta: (k + 1).min(n),
                closed_left: first == 0,
                censored_right: k == n,
            });
        }
        k += 1;
    }
    let first_interval_closed_left = intervals.first().is_some_and(|e| e.closed_left);
    ExcursionSet {
        intervals,
        first_interval_closed_left,
        threshold,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointCheck<T> {
    pub interval: usize,
    /// `X̂` at `alpha` and `beta` (`None` when that side is not a zero).
    pub alpha_value: Option<T>,
    pub beta_value: Option<T>,
    /// Largest `X̂_k - (tol + budget_k)` over the approach nodes; `<= 0` passes.
    pub approach_excess: T,
    pub passed: bool,
}

/// Endpoints must satisfy `|X̂| <= tol`; the `approach` nodes next to each
/// endpoint must stay below `tol + sqrt(2a K) + 4σ osc(B)`, where `K` is the
/// kernel mass and `osc(B)` the noise oscillation between the endpoint and
/// the node. That is how far a path started at zero can climb.
#[allow(clippy::needless_range_loop)] // k also feeds climb()
pub fn verify_endpoint_limits<T: Real>(
    values: &[T],
    noise: &FbmPath<T>,
    spec: &SdeSpec<T>,
    excursions: &ExcursionSet<T>,
    tol: T,
    approach: usize,
) -> Vec<EndpointCheck<T>> {
    let grid = noise.grid;
    let climb = |from: usize, to: usize| -> T {
        let (lo, hi) = (from.min(to), from.max(to));
        let kern = kernel_integral(grid.node(lo), grid.node(hi), T::zero(), spec.hurst)
            .expect("grid nodes are ordered");
        let osc = (lo..=hi)
            .map(|i| (noise.values[i] - noise.values[from]).abs())
            .fold(T::zero(), T::max);
        (T::two() * spec.a * kern).sqrt() + T::of(4.0) * spec.sigma * osc
    };
    excursions
        .intervals
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut excess = T::neg_infinity();
            let mut ok = true;
            let alpha_value = (!e.closed_left).then(|| values[e.alpha]);
            let beta_value = (!e.censored_right).then(|| values[e.beta]);
            if let Some(v) = alpha_value {
                ok &= v.abs() <= tol;
                for k in e.first..=(e.first + approach - 1).min(e.last) {
                    excess = excess.max(values[k] - tol - climb(e.alpha, k));
                }
            }
            if let Some(v) = beta_value {
                ok &= v.abs() <= tol;
                for k in e.last.saturating_sub(approach - 1).max(e.first)..=e.last {
                    excess = excess.max(values[k] - tol - climb(e.beta, k));
                }
            }
            if excess.is_finite() {
                ok &= excess <= T::zero();
            } else {
                excess = T::zero();
            }
            EndpointCheck {
                interval: i,
                alpha_value,
                beta_value,
                approach_excess: excess,
                passed: ok,
            }
        })
        .collect()
}

/// Residual of the restart identity on the window `start..=end`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartResidual<T> {
    pub interval: Option<usize>,
    pub margin: usize,
    pub start: usize,
    pub end: usize,
    /// `R` at nodes `start..=end`; `profile[0] = 0`.
    pub profile: Vec<T>,
    pub sup_residual: T,
    /// `a · Σ K|1/X̂_k - 1/X̂_{k+1}| + b · (Δt/2) Σ|X̂_{k+1} - X̂_k|` over the window.
    pub quadrature_budget: T,
    /// `a · #flagged · Δt / η`.
    pub truncation_budget: T,
    pub flagged: usize,
}

/// `R_t = X̂_t - X̂_s - a∫_s^t u^{2H-1}/X̂ du + b∫_s^t X̂ du - σ(B_t - B_s)` for
/// `t` in the window anchored at `s = start`.
pub fn residual_on_window<T: Real>(
    values: &[T],
    noise: &FbmPath<T>,
    spec: &SdeSpec<T>,
    start: usize,
    end: usize,
) -> Result<RestartResidual<T>> {
    let grid: TimeGrid<T> = noise.grid;
    if values.len() != grid.len() {
        return Err(crate::error::domain("path and noise grids differ"));
    }
    if start >= end || end > grid.steps() {
        return Err(Error::WindowTooShort(format!(
            "window {start}..={end} on a grid of {} steps",
            grid.steps()
        )));
    }
    let floor = T::of(FLOOR_FRACTION) * spec.x0;
    let integral = singular_integral_window(values, grid, spec.hurst, floor, start, end);
    let half_dt = T::half() * grid.dt();
    let mut trapezoid = T::zero();
    let mut linear_spread = T::zero();
    let mut profile = Vec::with_capacity(end - start + 1);
    let mut sup = T::zero();
    for (i, k) in (start..=end).enumerate() {
        if k > start {
            trapezoid = trapezoid + half_dt * (values[k - 1] + values[k]);
            linear_spread = linear_spread + half_dt * (values[k] - values[k - 1]).abs();
        }
        let r = if k == start {
            T::zero()
        } else {
            values[k] - values[start] - spec.a * integral.running[i] + spec.b * trapezoid
                - spec.sigma * (noise.values[k] - noise.values[start])
        };
        sup = sup.max(r.abs());
        profile.push(r);
    }
    Ok(RestartResidual {
        interval: None,
        margin: 0,
        start,
        end,
        profile,
        sup_residual: sup,
        quadrature_budget: spec.a * integral.spread + spec.b * linear_spread,
        truncation_budget: spec.a * T::of_usize(integral.flagged.len()) * grid.dt() / floor,
        flagged: integral.flagged.len(),
    })
}

/// Residual on `[α_i + margin, β_i - margin]` (the right end is not retracted
/// for an interval censored at the horizon).
pub fn restart_residual<T: Real>(
    values: &[T],
    noise: &FbmPath<T>,
    spec: &SdeSpec<T>,
    excursions: &ExcursionSet<T>,
    interval: usize,
    margin: usize,
) -> Result<RestartResidual<T>> {
    let e = excursions
        .intervals
        .get(interval)
        .ok_or_else(|| Error::WindowTooShort(format!("no interval {interval}")))?;
    let (start, end) = window(e, margin);
    if start >= end {
        return Err(Error::WindowTooShort(format!(
            "interval {interval} spans nodes {}..={} with margin {margin}",
            e.alpha, e.beta
        )));
    }
    let mut r = residual_on_window(values, noise, spec, start, end)?;
    r.interval = Some(interval);
    r.margin = margin;
    Ok(r)
}

/// Window of an interval after retreating `margin` steps from each zero.
pub fn window(e: &Excursion, margin: usize) -> (usize, usize) {
    let start = if e.closed_left { 0 } else { e.alpha + margin };
    let end = if e.censored_right {
        e.beta
    } else {
        e.beta.saturating_sub(margin)
    };
    (start, end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialIdentity<T> {
    pub residual: RestartResidual<T>,
    /// `quadrature + truncation + 2·cauchy_gap`.
    pub budget: T,
    pub passed: bool,
}

/// The identity anchored at `t = 0` (with the `X_0` term) on the first
/// excursion, retreated by `margin` from its first zero. Windows are cut at
/// `threshold = cauchy_gap + 1e-6` so `1/X̂` stays controlled.
pub fn verify_initial_identity<T: Real>(
    family: &EpsilonFamily<T>,
    margin: usize,
) -> Result<InitialIdentity<T>> {
    let x = &family.limit_estimate;
    let threshold = family.cauchy_gap + T::of(1e-6);
    let set = decompose_excursions(x, threshold);
    let first = set
        .intervals
        .first()
        .filter(|e| e.closed_left)
        .ok_or_else(|| Error::WindowTooShort("X_0 is not above the threshold".into()))?;
    let (_, end) = window(first, margin);
    let residual = residual_on_window(x, &family.noise, &family.spec, 0, end.max(1))?;
    let budget =
        residual.quadrature_budget + residual.truncation_budget + T::two() * family.cauchy_gap;
    let passed = residual.sup_residual <= budget;
    Ok(InitialIdentity {
        residual,
        budget,
        passed,
    })
}

/// CSV `interval_index,alpha_t,beta_t,length,endpoint_values,sup_residual`.
///
/// `endpoint_values` is `X̂(α);X̂(β)`; `sup_residual` is empty when the
/// interval is too short for a window.
pub fn write_excursion_report<T: Real, W: Write>(
    values: &[T],
    grid: TimeGrid<T>,
    excursions: &ExcursionSet<T>,
    residuals: &[Option<RestartResidual<T>>],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "interval_index",
        "alpha_t",
        "beta_t",
        "length",
        "endpoint_values",
        "sup_residual",
    ])?;
    for (i, e) in excursions.intervals.iter().enumerate() {
        let (ta, tb) = (grid.node(e.alpha), grid.node(e.beta));
        let sup = residuals
            .get(i)
            .and_then(|r| r.as_ref())
            .map(|r| r.sup_residual.as_f64().to_string())
            .unwrap_or_default();
        w.write_record([
            i.to_string(),
            ta.as_f64().to_string(),
            tb.as_f64().to_string(),
            (tb - ta).as_f64().to_string(),
            format!("{};{}", values[e.alpha].as_f64(), values[e.beta].as_f64()),
            sup,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{generate_fbm, GeneratorTag, HurstParam, SeedRecord};
    use crate::limit::{build_family, EpsilonLadder};
    use proptest::prelude::*;

    fn hurst() -> HurstParam<f64> {
        HurstParam::new(0.25).unwrap()
    }

    #[test]
    fn positive_path_is_one_interval() {
        let set = decompose_excursions(&[1.0, 2.0, 0.5, 0.1], 0.0);
        assert_eq!(set.intervals.len(), 1);
        assert!(set.first_interval_closed_left);
        let e = set.intervals[0];
        assert_eq!((e.first, e.last), (0, 3));
        assert!(e.censored_right && !e.is_interior());
    }

    #[test]
    fn zero_path_has_no_intervals() {
        let set = decompose_excursions(&[0.0f64; 50], 0.0);
        assert!(set.intervals.is_empty());
        assert!(!set.first_interval_closed_left);
    }

    #[test]
    fn hand_built_runs() {
        let mut v = vec![0.0f64; 50];
        for k in (10..=20).chain(30..=35) {
            v[k] = 1.0;
        }
        let set = decompose_excursions(&v, 0.0);
        let runs: Vec<_> = set.intervals.iter().map(|e| (e.first, e.last)).collect();
        assert_eq!(runs, vec![(10, 20), (30, 35)]);
        assert_eq!((set.intervals[0].alpha, set.intervals[0].beta), (9, 21));
        assert!(set.intervals.iter().all(Excursion::is_interior));
    }

    proptest! {
        #[test]
        fn decomposition_is_exact(v in prop::collection::vec(-1.0f64..1.0, 1..200), thr in 0.0f64..0.5) {
            let set = decompose_excursions(&v, thr);
            let covered = set.covered();
            let expected: Vec<usize> = (0..v.len()).filter(|&k| v[k] > thr).collect();
            prop_assert_eq!(covered, expected);
            for pair in set.intervals.windows(2) {
                prop_assert!(pair[1].first > pair[0].last + 1);
                prop_assert!(v[pair[0].last + 1] <= thr);
            }
            for e in &set.intervals {
                if !e.closed_left { prop_assert!(v[e.alpha] <= thr); }
                if !e.censored_right { prop_assert!(v[e.beta] <= thr); }
            }
        }
    }

    #[test]
    fn deterministic_path_has_vacuous_endpoints() {
        let spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, hurst()).unwrap();
        let noise = FbmPath::zero(TimeGrid::new(1.0, 512).unwrap(), hurst());
        let family = build_family(&spec, &noise, EpsilonLadder::new(0.1, 0.5, 6).unwrap()).unwrap();
        let set = decompose_excursions(&family.limit_estimate, 0.0);
        assert_eq!(set.intervals.len(), 1);
        let checks = verify_endpoint_limits(&family.limit_estimate, &noise, &spec, &set, 1e-6, 3);
        assert!(checks.iter().all(|c| c.passed));
    }

    #[test]
    fn single_dip_endpoints() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let noise = FbmPath::zero(grid, hurst());
        let spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, hurst()).unwrap();
        let mut v: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|t| (t - 0.5).abs().sqrt())
            .collect();
        v[50] = 0.0;
        let set = decompose_excursions(&v, 0.0);
        assert_eq!(set.intervals.len(), 2);
        assert_eq!(set.intervals[0].beta, 50);
        assert_eq!(set.intervals[1].alpha, 50);
        let checks = verify_endpoint_limits(&v, &noise, &spec, &set, 1e-9, 3);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert_eq!(checks[0].beta_value, Some(0.0));
        assert_eq!(checks[1].alpha_value, Some(0.0));
        // A jump that no drift can produce fails the approach check.
        v[51] = 5.0;
        let checks = verify_endpoint_limits(&v, &noise, &spec, &set, 1e-9, 3);
        assert!(!checks[1].passed);
    }

    #[test]
    fn deterministic_residual_within_budget() {
        let spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, hurst()).unwrap();
        let noise = FbmPath::zero(TimeGrid::new(1.0, 1024).unwrap(), hurst());
        let family =
            build_family(&spec, &noise, EpsilonLadder::new(0.1, 0.1, 14).unwrap()).unwrap();
        let set = decompose_excursions(&family.limit_estimate, 0.0);
        let r = restart_residual(&family.limit_estimate, &noise, &spec, &set, 0, 0).unwrap();
        assert_eq!(r.profile[0], 0.0);
        assert!(r.sup_residual <= r.quadrature_budget + 2.0 * family.cauchy_gap + 1e-12);
        assert!(r.sup_residual < 1e-6, "{}", r.sup_residual);
    }

    #[test]
    fn damped_residual_shrinks_with_refinement() {
        let spec = SdeSpec::new(1.0, 1.0, 0.5, 1.0, hurst()).unwrap();
        let ladder = EpsilonLadder::new(0.1, 0.1, 14).unwrap();
        let mut previous = f64::INFINITY;
        for steps in [256, 512, 1024, 2048] {
            let noise = FbmPath::zero(TimeGrid::new(1.0, steps).unwrap(), hurst());
            let family = build_family(&spec, &noise, ladder).unwrap();
            let set = decompose_excursions(&family.limit_estimate, 0.0);
            let r = restart_residual(&family.limit_estimate, &noise, &spec, &set, 0, 0).unwrap();
            assert!(r.sup_residual <= r.quadrature_budget + 2.0 * family.cauchy_gap);
            assert!(
                r.sup_residual < previous,
                "{steps}: {} vs {previous}",
                r.sup_residual
            );
            previous = r.sup_residual;
        }
    }

    #[test]
    fn short_window_is_reported() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let noise = FbmPath::zero(grid, hurst());
        let spec = SdeSpec::new(1.0, 1.0, 0.0, 1.0, hurst()).unwrap();
        let mut v = vec![0.0; 101];
        v[40] = 1.0;
        v[41] = 1.0;
        let set = decompose_excursions(&v, 0.0);
        assert!(matches!(
            restart_residual(&v, &noise, &spec, &set, 0, 5),
            Err(Error::WindowTooShort(_))
        ));
        let r = restart_residual(&v, &noise, &spec, &set, 0, 1).unwrap();
        assert_eq!((r.start, r.end), (40, 41));
    }

    #[test]
    fn initial_identity_on_noisy_paths() {
        let spec = SdeSpec::new(1.0, 1.0, 0.5, 1.0, hurst()).unwrap();
        let grid = TimeGrid::new(1.0, 2048).unwrap();
        for seed in 0..5 {
            let noise = generate_fbm(
                grid,
                hurst(),
                SeedRecord::new(seed, 0),
                GeneratorTag::Circulant,
            )
            .unwrap();
            let family =
                build_family(&spec, &noise, EpsilonLadder::new(0.1, 0.25, 10).unwrap()).unwrap();
            let id = verify_initial_identity(&family, DEFAULT_MARGIN).unwrap();
            assert_eq!(id.residual.profile[0], 0.0);
            assert!(
                id.passed,
                "seed {seed}: {} > {}",
                id.residual.sup_residual, id.budget
            );

            let set = decompose_excursions(&family.limit_estimate, 0.0);
            let tol = family.cauchy_gap + 1e-6;
            for c in verify_endpoint_limits(
                &family.limit_estimate,
                &noise,
                &spec,
                &set,
                tol,
                DEFAULT_APPROACH,
            ) {
                assert!(c.passed, "seed {seed}: {c:?}");
            }
        }
    }

    #[test]
    fn report_csv() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let v = vec![1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let set = decompose_excursions(&v, 0.0);
        let mut buf = Vec::new();
        write_excursion_report(&v, grid, &set, &[None, None, None], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "interval_index,alpha_t,beta_t,length,endpoint_values,sup_residual"
        );
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1,0.2,0.6"));
    }
}
