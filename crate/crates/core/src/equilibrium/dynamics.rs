use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};

use super::EquilibriumProblem;

/// Share of the trajectory used for the stability band.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.2;

/// Step sizes `η_t`.
///
/// `RobbinsMonro` uses `η_t = initial / (t + 1)^exponent`; exponents in
/// `(0.5, 1]` satisfy `Σ η_t = ∞, Σ η_t² < ∞`. Constant steps fall outside
/// those conditions and give a band whose width does not shrink with time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    RobbinsMonro { initial: f64, exponent: f64 },
}

impl StepSchedule {
    pub fn step(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::RobbinsMonro { initial, exponent } => initial / ((t + 1) as f64).powf(exponent),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::Constant(eta) => eta > 0.0 && eta.is_finite(),
            StepSchedule::RobbinsMonro { initial, exponent } => {
                initial > 0.0 && initial.is_finite() && exponent > 0.0 && exponent.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "step sizes must be positive, got {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub initial: f64,
    pub steps: usize,
    pub schedule: StepSchedule,
    /// Standard deviation of the additive gradient noise.
    pub sigma: f64,
    pub seed: u64,
    pub window_fraction: f64,
}

impl SimulationConfig {
    /// Noise-free run with constant step 0.1.
    pub fn new(initial: f64, steps: usize) -> Self {
        Self {
            initial,
            steps,
            schedule: StepSchedule::Constant(0.1),
            sigma: 0.0,
            seed: 0,
            window_fraction: DEFAULT_WINDOW_FRACTION,
        }
    }

    pub fn schedule(mut self, schedule: StepSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn noise(mut self, sigma: f64, seed: u64) -> Self {
        self.sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn window_fraction(mut self, fraction: f64) -> Self {
        self.window_fraction = fraction;
        self
    }

    /// Number of trailing values that make up the band.
    pub fn window_len(&self) -> usize {
        ((self.window_fraction * self.steps as f64).ceil() as usize).clamp(1, self.steps + 1)
    }
}

/// Recorded iterates `R_0, …, R_steps` with the trailing-window band.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<usize>,
    pub values: Vec<f64>,
    pub band: (f64, f64),
    pub noise_scale: f64,
    pub seed: u64,
}

impl Trajectory {
    pub fn band_width(&self) -> f64 {
        self.band.1 - self.band.0
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("trajectory is never empty")
    }
}

/// Runs `R_{t+1} = clamp(R_t − η_t (Φ'(R_t) + ξ_t))` with `ξ_t ~ N(0, σ²)`.
///
/// Noise comes from SplitMix64 seeded with `config.seed`; one standard normal
/// is drawn per step even when `σ = 0`, so runs that differ only in `σ` share
/// the same noise path.
pub fn simulate_band(problem: &EquilibriumProblem, config: &SimulationConfig) -> Result<Trajectory> {
    if config.steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    if !(config.sigma >= 0.0 && config.sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be >= 0, got {}",
            config.sigma
        )));
    }
    if !(config.window_fraction > 0.0 && config.window_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction must lie in (0, 1], got {}",
            config.window_fraction
        )));
    }
    config.schedule.validate()?;
    let curve = problem.curve();
    if !curve.contains(config.initial) {
        return Err(Error::Domain(format!(
            "initial R = {} outside the curve domain",
            config.initial
        )));
    }

    let (lo, hi) = curve.domain();
    let mut rng = SplitMix64::seed_from_u64(config.seed);
    let mut values = Vec::with_capacity(config.steps + 1);
    let mut r = config.initial.clamp(lo, hi);
    values.push(r);
    for t in 0..config.steps {
        let slope = problem.phi_slope(r);
        if !slope.is_finite() {
            return Err(Error::Numerical {
                step: t,
                detail: format!("slope of phi is {slope} at R = {r}"),
            });
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        r = (r - config.schedule.step(t) * (slope + config.sigma * z)).clamp(lo, hi);
        values.push(r);
    }

    let window = &values[values.len() - config.window_len()..];
    let band = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(Trajectory {
        times: (0..=config.steps).collect(),
        values,
        band,
        noise_scale: config.sigma,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::RiskCurve;
    use approx::assert_abs_diff_eq;

    fn problem() -> EquilibriumProblem {
        EquilibriumProblem::new(RiskCurve::quadratic(0.5, 1.0, 0.0, 0.0, 1.0).unwrap(), 0.2).unwrap()
    }

    #[test]
    fn deterministic_flow_collapses() {
        let traj = simulate_band(&problem(), &SimulationConfig::new(0.9, 500)).unwrap();
        assert_abs_diff_eq!(traj.band.0, 0.4, epsilon = 1e-6);
        assert_abs_diff_eq!(traj.band.1, 0.4, epsilon = 1e-6);
        assert_eq!(traj.values.len(), 501);
    }

    #[test]
    fn single_step() {
        let traj = simulate_band(&problem(), &SimulationConfig::new(0.9, 1)).unwrap();
        assert_eq!(traj.times, vec![0, 1]);
        // 0.9 − 0.1·(2·0.4 + 0.2)
        assert_abs_diff_eq!(traj.values[1], 0.8, epsilon = 1e-15);
        assert_eq!(traj.band, (traj.values[1], traj.values[1]));
    }

    #[test]
    fn noisy_band_matches_inline_recursion() {
        let config = SimulationConfig::new(0.9, 5000).noise(0.05, 7);
        let traj = simulate_band(&problem(), &config).unwrap();

        let mut rng = SplitMix64::seed_from_u64(7);
        let mut r = 0.9f64;
        let mut tail = Vec::new();
        for t in 0..5000 {
            let z: f64 = StandardNormal.sample(&mut rng);
            r = (r - 0.1 * (2.0 * (r - 0.5) + 0.2 + 0.05 * z)).clamp(0.0, 1.0);
            if t >= 4000 {
                tail.push(r);
            }
        }
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(traj.band, (lo, hi));

        assert!(traj.band.0 < 0.4 && 0.4 < traj.band.1);
        // stationary AR(1) spread: ησ / sqrt(1 − (1 − 2η)²)
        let stationary_sd = 0.1 * 0.05 / (1.0f64 - 0.8 * 0.8).sqrt();
        let width = traj.band_width();
        assert!(width > 2.0 * stationary_sd && width < 10.0 * stationary_sd, "{width}");
    }

    #[test]
    fn robbins_monro_schedule_converges() {
        let config = SimulationConfig::new(0.9, 20_000)
            .schedule(StepSchedule::RobbinsMonro {
                initial: 0.4,
                exponent: 0.75,
            })
            .noise(0.05, 3);
        let traj = simulate_band(&problem(), &config).unwrap();
        assert!((traj.last() - 0.4).abs() < 0.01);
        assert!(traj.band_width() < 0.02);
    }

    #[test]
    fn numeric_slope_path() {
        let curve = RiskCurve::new(0.0, 1.0, |r| (r - 0.5) * (r - 0.5)).unwrap();
        let p = EquilibriumProblem::new(curve, 0.2).unwrap();
        let traj = simulate_band(&p, &SimulationConfig::new(0.9, 500)).unwrap();
        assert_abs_diff_eq!(traj.last(), 0.4, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_configs() {
        let p = problem();
        assert!(simulate_band(&p, &SimulationConfig::new(0.9, 0)).is_err());
        assert!(simulate_band(&p, &SimulationConfig::new(0.9, 10).noise(-1.0, 0)).is_err());
        assert!(simulate_band(
            &p,
            &SimulationConfig::new(0.9, 10).schedule(StepSchedule::Constant(0.0))
        )
        .is_err());
        assert!(simulate_band(&p, &SimulationConfig::new(1.9, 10)).is_err());
        assert!(simulate_band(&p, &SimulationConfig::new(0.9, 10).window_fraction(0.0)).is_err());
    }

    #[test]
    fn non_finite_slope_reports_step() {
        let curve = RiskCurve::new(0.0, 1.0, |r| r)
            .unwrap()
            .with_derivative(|r| if r < 0.5 { f64::NAN } else { 1.0 });
        let p = EquilibriumProblem::new(curve, 1.0).unwrap();
        let err = simulate_band(&p, &SimulationConfig::new(0.9, 100)).unwrap_err();
        assert!(matches!(err, Error::Numerical { step, .. } if step > 0));
    }
}
