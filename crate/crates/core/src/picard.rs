//! Local existence by contraction: pick a short horizon `δ` on which the
//! integral operator
//! `(Tx)_t = x_0 + a∫_0^t s^{2H-1}/x_s ds - b∫_0^t x_s ds + g(t)`
//! maps the band `[x_0/2, 2x_0]` into itself and contracts, then iterate it.

use std::io::Write;

use crate::error::{domain, Error, Result};
use crate::fbm::{estimate_holder, FbmPath, HolderEstimate, HurstParam, TimeGrid};
use crate::scalar::{sup_distance, Real};
use crate::sde::{kernel_integral, SdeSpec};

/// Relative safety margin applied to each admissibility inequality.
pub const DELTA_MARGIN: f64 = 0.05;
/// Smallest candidate horizon is `2^-DELTA_MAX_EXPONENT`.
pub const DELTA_MAX_EXPONENT: u32 = 40;

/// Driver `g` sampled on a grid starting at `t = 0` with `g(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalProblem<T> {
    pub x0: T,
    pub a: T,
    pub b: T,
    pub hurst: HurstParam<T>,
    pub grid: TimeGrid<T>,
    pub driver: Vec<T>,
    pub holder: HolderEstimate<T>,
}

impl<T: Real> LocalProblem<T> {
    /// Estimates the driver's Hölder constant at exponent `beta`.
    pub fn new(
        x0: T,
        a: T,
        b: T,
        hurst: HurstParam<T>,
        grid: TimeGrid<T>,
        driver: Vec<T>,
        beta: T,
    ) -> Result<Self> {
        let holder = estimate_holder(&driver, grid, beta)?;
        Self::with_holder(x0, a, b, hurst, grid, driver, holder)
    }

    pub fn with_holder(
        x0: T,
        a: T,
        b: T,
        hurst: HurstParam<T>,
        grid: TimeGrid<T>,
        driver: Vec<T>,
        holder: HolderEstimate<T>,
    ) -> Result<Self> {
        if !(x0 > T::zero() && a > T::zero() && b >= T::zero()) {
            return Err(domain("local problem needs x0 > 0, a > 0, b >= 0"));
        }
        if driver.len() != grid.len() {
            return Err(domain("driver length does not match its grid"));
        }
        if driver[0] != T::zero() {
            return Err(domain("driver must start at zero"));
        }
        if !(holder.exponent > T::zero() && holder.exponent < hurst.value()) {
            return Err(domain("Hölder exponent must lie in (0, H)"));
        }
        Ok(Self {
            x0,
            a,
            b,
            hurst,
            grid,
            driver,
            holder,
        })
    }

    /// `g = σB` with the Hölder constant estimated at `β = H/2`.
    pub fn from_sde(spec: &SdeSpec<T>, noise: &FbmPath<T>) -> Result<Self> {
        let driver = noise.values.iter().map(|&v| spec.sigma * v).collect();
        let beta = T::half() * spec.hurst.value();
        Self::new(
            spec.x0, spec.a, spec.b, spec.hurst, noise.grid, driver, beta,
        )
    }

    /// `q(δ) = 2aδ^{2H}/(H x_0^2) + bδ`.
    pub fn contraction_modulus(&self, delta: T) -> T {
        let h = self.hurst.value();
        T::two() * self.a * delta.powf(T::two() * h) / (h * self.x0 * self.x0) + self.b * delta
    }

    /// Upper envelope `a t^{2H}/(H x_0) - b x_0 t/2 + C t^β`.
    pub fn upper_envelope(&self, t: T) -> T {
        let h = self.hurst.value();
        self.a * t.powf(T::two() * h) / (h * self.x0) - self.b * self.x0 * t * T::half()
            + self.holder.envelope(t)
    }

    /// Lower envelope `a t^{2H}/(2H x_0) - b x_0 t - C t^β`.
    pub fn lower_envelope(&self, t: T) -> T {
        let h = self.hurst.value();
        self.a * t.powf(T::two() * h) / (T::two() * h * self.x0)
            - self.b * self.x0 * t
            - self.holder.envelope(t)
    }

    /// Driver at time `t`, linearly interpolated.
    pub fn driver_at(&self, t: T) -> T {
        let dt = self.grid.dt();
        if t <= T::zero() {
            return self.driver[0];
        }
        if t >= self.grid.horizon() {
            return self.driver[self.grid.steps()];
        }
        let pos = t / dt;
        let k = pos
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.grid.steps() - 1);
        let w = pos - T::of_usize(k);
        self.driver[k] + w * (self.driver[k + 1] - self.driver[k])
    }

    fn check(&self, delta: T, nodes: usize) -> Option<DeltaCertificate<T>> {
        let keep = T::one() - T::of(DELTA_MARGIN);
        let q = self.contraction_modulus(delta);
        if !(q <= keep) {
            return None;
        }
        let mut lowest = T::infinity();
        let mut highest = T::neg_infinity();
        for i in 0..=nodes {
            let t = delta * T::of_usize(i) / T::of_usize(nodes);
            let (f, h) = (self.upper_envelope(t), self.lower_envelope(t));
            if !(f <= keep * self.x0 && h >= -keep * self.x0 * T::half() && h <= f) {
                return None;
            }
            lowest = lowest.min(self.x0 + h);
            highest = highest.max(self.x0 + f);
        }
        Some(DeltaCertificate {
            delta,
            q,
            lower_margin: lowest - self.x0 * T::half(),
            upper_margin: T::two() * self.x0 - highest,
            check_nodes: nodes,
        })
    }
}

/// A horizon on which the band is invariant and `T` contracts with modulus `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaCertificate<T> {
    pub delta: T,
    pub q: T,
    /// `min (x_0 + h) - x_0/2` over the check nodes.
    pub lower_margin: T,
    /// `2x_0 - max (x_0 + f)` over the check nodes.
    pub upper_margin: T,
    pub check_nodes: usize,
}

/// Largest dyadic `δ = 2^-k` passing both envelope conditions and `q < 1`,
/// each with a 5% margin, at `nodes + 1` evenly spaced check points.
pub fn select_delta<T: Real>(
    problem: &LocalProblem<T>,
    nodes: usize,
) -> Result<DeltaCertificate<T>> {
    if nodes < 100 {
        return Err(domain(format!(
            "need at least 100 check nodes, got {nodes}"
        )));
    }
    (1..=DELTA_MAX_EXPONENT)
        .map(|k| T::of(0.5f64.powi(k as i32)))
        .filter(|&delta| delta <= problem.grid.horizon())
        .find_map(|delta| problem.check(delta, nodes))
        .ok_or(Error::Infeasible {
            max_exponent: DELTA_MAX_EXPONENT,
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    /// `‖x^{(m)} - x^{(m-1)}‖_∞`.
    pub sup_distance: T,
    /// Ratio to the previous distance; `None` for the first iterate.
    pub contraction_ratio: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution<T> {
    pub grid: TimeGrid<T>,
    pub values: Vec<T>,
    pub log: Vec<IterationRecord<T>>,
    /// `‖Tx - x‖_∞` at the returned iterate.
    pub residual: T,
    pub budget: usize,
}

impl<T: Real> PicardSolution<T> {
    pub fn max_ratio(&self) -> Option<T> {
        self.log
            .iter()
            .filter_map(|r| r.contraction_ratio)
            .reduce(T::max)
    }
}

/// Discretised operator on a uniform grid over `[0, δ]`: exact kernel
/// integration with `1/x` and `x` frozen at the left node.
struct Operator<T> {
    x0: T,
    a: T,
    b: T,
    dt: T,
    kernels: Vec<T>,
    driver: Vec<T>,
}

impl<T: Real> Operator<T> {
    fn new(problem: &LocalProblem<T>, grid: TimeGrid<T>) -> Result<Self> {
        let kernels = (0..grid.steps())
            .map(|k| kernel_integral(grid.node(k), grid.node(k + 1), T::zero(), problem.hurst))
            .collect::<Result<_>>()?;
        let driver = grid
            .nodes()
            .into_iter()
            .map(|t| problem.driver_at(t))
            .collect();
        Ok(Self {
            x0: problem.x0,
            a: problem.a,
            b: problem.b,
            dt: grid.dt(),
            kernels,
            driver,
        })
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(x.len());
        let mut singular = T::zero();
        let mut linear = T::zero();
        out.push(self.x0 + self.driver[0]);
        for (k, &kern) in self.kernels.iter().enumerate() {
            singular = singular + kern / x[k];
            linear = linear + self.dt * x[k];
            out.push(self.x0 + self.a * singular - self.b * linear + self.driver[k + 1]);
        }
        out
    }
}

pub fn picard_solve<T: Real>(
    problem: &LocalProblem<T>,
    cert: &DeltaCertificate<T>,
    steps: usize,
    tolerance: T,
) -> Result<PicardSolution<T>> {
    picard_solve_from(problem, cert, steps, tolerance, problem.x0)
}

/// Iterates from the constant `start` (clipped into the band).
pub fn picard_solve_from<T: Real>(
    problem: &LocalProblem<T>,
    cert: &DeltaCertificate<T>,
    steps: usize,
    tolerance: T,
    start: T,
) -> Result<PicardSolution<T>> {
    if !(tolerance > T::zero()) {
        return Err(domain("tolerance must be positive"));
    }
    if !(cert.q > T::zero() && cert.q < T::one()) {
        return Err(domain(format!(
            "contraction modulus {} is not in (0, 1)",
            cert.q
        )));
    }
    let grid = TimeGrid::new(cert.delta, steps)?;
    let op = Operator::new(problem, grid)?;
    let lower = problem.x0 * T::half();
    let upper = problem.x0 * T::two();
    let in_band = |iteration: usize, x: &[T]| -> Result<()> {
        match x.iter().position(|&v| !(v >= lower && v <= upper)) {
            Some(node) => Err(Error::BandEscape {
                iteration,
                node,
                value: x[node].as_f64(),
                lower: lower.as_f64(),
                upper: upper.as_f64(),
            }),
            None => Ok(()),
        }
    };

    let mut x = vec![start.max(lower).min(upper); grid.len()];
    let mut next = op.apply(&x);
    in_band(1, &next)?;
    let first = sup_distance(&next, &x);
    let mut log = vec![IterationRecord {
        iteration: 1,
        sup_distance: first,
        contraction_ratio: None,
    }];
    let budget = if first <= tolerance {
        1
    } else {
        let steps_needed = ((tolerance / first).ln() / cert.q.ln()).ceil();
        steps_needed.to_usize().unwrap_or(usize::MAX - 10) + 10
    };
    let mut last = first;
    let mut iteration = 1;
    while last > tolerance {
        if iteration >= budget {
            return Err(Error::NoConvergence {
                budget,
                tolerance: tolerance.as_f64(),
                last: last.as_f64(),
            });
        }
        x = next;
        next = op.apply(&x);
        iteration += 1;
        in_band(iteration, &next)?;
        let d = sup_distance(&next, &x);
        log.push(IterationRecord {
            iteration,
            sup_distance: d,
            contraction_ratio: Some(d / last),
        });
        last = d;
    }
    let residual = sup_distance(&op.apply(&next), &next);
    Ok(PicardSolution {
        grid,
        values: next,
        log,
        residual,
        budget,
    })
}

/// CSV `iteration,sup_distance,contraction_ratio` (empty ratio on the first row).
pub fn write_iteration_log<T: Real, W: Write>(log: &[IterationRecord<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "sup_distance", "contraction_ratio"])?;
    for r in log {
        w.write_record([
            r.iteration.to_string(),
            r.sup_distance.as_f64().to_string(),
            r.contraction_ratio
                .map(|q| q.as_f64().to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{generate_fbm, GeneratorTag, SeedRecord};
    use crate::limit::{build_family, EpsilonLadder};

    fn quiet(b: f64, holder_constant: f64) -> LocalProblem<f64> {
        let grid = TimeGrid::new(1.0, 1024).unwrap();
        let hurst = HurstParam::new(0.25).unwrap();
        let holder = HolderEstimate {
            exponent: 0.125,
            constant: holder_constant,
            grid,
        };
        LocalProblem::with_holder(1.0, 1.0, b, hurst, grid, vec![0.0; 1025], holder).unwrap()
    }

    #[test]
    fn modulus_values() {
        let p = quiet(0.0, 0.0);
        assert!((p.contraction_modulus(0.01) - 0.8).abs() < 1e-12);
        assert!(
            (p.contraction_modulus(0.5f64.powi(7)) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7
        );
        assert!(p.contraction_modulus(1e-30) < 1e-12);
    }

    #[test]
    fn quiet_problem_selects_two_to_minus_seven() {
        let cert = select_delta(&quiet(0.0, 0.0), 200).unwrap();
        assert_eq!(cert.delta, 0.5f64.powi(7));
        assert!((cert.q - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        assert!(cert.lower_margin > 0.0 && cert.upper_margin > 0.0);
        assert!(select_delta(&quiet(0.0, 0.0), 50).is_err());
    }

    #[test]
    fn huge_holder_constant_is_infeasible() {
        assert!(matches!(
            select_delta(&quiet(0.0, 1e6), 100),
            Err(Error::Infeasible { max_exponent: 40 })
        ));
    }

    #[test]
    fn envelopes_are_ordered() {
        let p = quiet(2.0, 3.0);
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert!(p.lower_envelope(t) <= p.upper_envelope(t));
        }
    }

    #[test]
    fn quiet_fixed_point_matches_closed_form() {
        let p = quiet(0.0, 0.0);
        let cert = select_delta(&p, 200).unwrap();
        let sol = picard_solve(&p, &cert, 1 << 12, 1e-10).unwrap();
        assert_eq!(sol.values[0], 1.0);
        for (k, &x) in sol.values.iter().enumerate() {
            let t = sol.grid.node(k);
            let exact = (1.0 + t.sqrt() / 0.25).sqrt();
            assert!((x - exact).abs() < 1e-4, "node {k}");
        }
        assert!(sol.residual <= 2e-10);
        assert!(sol.log.len() <= sol.budget);
        assert!(sol.max_ratio().unwrap() <= cert.q + 0.05);
    }

    #[test]
    fn noisy_fixed_point_is_unique() {
        let hurst = HurstParam::new(0.25).unwrap();
        let spec = SdeSpec::new(1.0, 1.0, 0.5, 0.2, hurst).unwrap();
        let grid = TimeGrid::new(1.0, 2048).unwrap();
        for seed in 0..4 {
            let noise = generate_fbm(
                grid,
                hurst,
                SeedRecord::new(seed, 0),
                GeneratorTag::Circulant,
            )
            .unwrap();
            let p = LocalProblem::from_sde(&spec, &noise).unwrap();
            let cert = select_delta(&p, 200).unwrap();
            let a = picard_solve(&p, &cert, 512, 1e-11).unwrap();
            let b = picard_solve_from(&p, &cert, 512, 1e-11, 2.0).unwrap();
            assert!(sup_distance(&a.values, &b.values) <= 1e-10, "seed {seed}");
            assert!(a.residual <= 2e-11);
            for r in a.log.iter().chain(&b.log) {
                if let Some(ratio) = r.contraction_ratio {
                    assert!(ratio <= cert.q + 0.05, "seed {seed}: {ratio}");
                }
            }
        }
    }

    #[test]
    fn agrees_with_ladder_limit() {
        let hurst = HurstParam::new(0.25).unwrap();
        let spec = SdeSpec::new(1.0, 1.0, 0.5, 0.05, hurst).unwrap();
        let grid = TimeGrid::new(1.0, 1 << 14).unwrap();
        let noise =
            generate_fbm(grid, hurst, SeedRecord::new(11, 0), GeneratorTag::Circulant).unwrap();
        let p = LocalProblem::from_sde(&spec, &noise).unwrap();
        let cert = select_delta(&p, 200).unwrap();
        let steps = (cert.delta * grid.steps() as f64).round() as usize;
        assert!(steps >= 16);
        let sol = picard_solve(&p, &cert, steps, 1e-11).unwrap();
        let family =
            build_family(&spec, &noise, EpsilonLadder::new(0.1, 0.25, 10).unwrap()).unwrap();
        let gap = sup_distance(&sol.values, &family.limit_estimate[..=steps]);
        assert!(
            gap <= family.cauchy_gap + 1e-3,
            "{gap} vs {}",
            family.cauchy_gap
        );
    }

    #[test]
    fn band_escape_is_reported() {
        let p = quiet(0.0, 0.0);
        let cert = DeltaCertificate {
            delta: 0.5,
            q: 0.9,
            lower_margin: 0.0,
            upper_margin: 0.0,
            check_nodes: 100,
        };
        assert!(matches!(
            picard_solve(&p, &cert, 256, 1e-10),
            Err(Error::BandEscape { .. })
        ));
    }

    #[test]
    fn iteration_log_csv() {
        let p = quiet(0.0, 0.0);
        let cert = select_delta(&p, 100).unwrap();
        let sol = picard_solve(&p, &cert, 256, 1e-8).unwrap();
        let mut buf = Vec::new();
        write_iteration_log(&sol.log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("iteration,sup_distance,contraction_ratio")
        );
        assert!(lines.next().unwrap().ends_with(','));
        assert_eq!(text.lines().count(), sol.log.len() + 1);
    }
}
