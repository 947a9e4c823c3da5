//! Lattice discretization of the mild equation: exponential-Euler stepping
//! u_{t+dt} = P_dt[u_t + sigma(u_t) dF] through the stable semigroup, the
//! truncation stopping time, and free (periodic) or killed-ball dynamics.

mod noise;

pub use noise::{NoiseGenerator, NoiseIncrement, NoiseKind};

use crate::error::{Error, Result};
use crate::lattice::{norm, Lattice, ScalarField};
use crate::sampling::stream_rng;
use crate::stable_kernel::{simulate_killed_path, Propagator, StableKernelSpec};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// The nonlinearity sigma acting pointwise on the field.
#[derive(Clone, Debug, Serialize)]
pub enum SigmaSpec {
    /// sigma(u) = |u|^{1+gamma}: the growth condition's lower envelope,
    /// satisfied with equality.
    PurePower { gamma: f64 },
    /// sigma(u) = lambda u.
    Linear { lambda: f64 },
    /// Piecewise-linear table; `compliant` records whether
    /// sigma(x) >= |x|^{1+gamma} held at every node when constructed.
    Custom { table: Vec<(f64, f64)>, gamma: f64, compliant: bool },
}

impl SigmaSpec {
    pub fn pure_power(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(SigmaSpec::PurePower { gamma })
    }

    pub fn linear(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::domain("lambda must be finite".to_string()));
        }
        Ok(SigmaSpec::Linear { lambda })
    }

    /// Table nodes must be sorted by x; the compliance flag is checked
    /// against the declared growth exponent at the nodes.
    pub fn custom(table: Vec<(f64, f64)>, gamma: f64) -> Result<Self> {
        if table.len() < 2 || table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain("table needs >= 2 strictly increasing nodes".to_string()));
        }
        let compliant = table.iter().all(|&(x, s)| s >= x.abs().powf(1.0 + gamma) - 1e-12);
        Ok(SigmaSpec::Custom { table, gamma, compliant })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            SigmaSpec::PurePower { gamma } => u.abs().powf(1.0 + gamma),
            SigmaSpec::Linear { lambda } => lambda * u,
            SigmaSpec::Custom { table, .. } => {
                let n = table.len();
                if u <= table[0].0 {
                    return table[0].1;
                }
                if u >= table[n - 1].0 {
                    return table[n - 1].1;
                }
                let idx = table.partition_point(|&(x, _)| x < u);
                let (x0, y0) = table[idx - 1];
                let (x1, y1) = table[idx];
                y0 + (y1 - y0) * (u - x0) / (x1 - x0)
            }
        }
    }
}

/// Spatial domain of the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Domain {
    /// Periodic lattice standing in for R^d.
    Free,
    /// Dirichlet ball: values outside B(0, radius) are forced to zero
    /// after every step.
    Ball { radius: f64 },
}

/// Initial condition, realized on the lattice at path start.
#[derive(Clone, Debug, Serialize)]
pub enum InitialData {
    Constant { level: f64 },
    BallIndicator { level: f64, radius: f64 },
    Field(ScalarField),
}

impl InitialData {
    pub fn realize(&self, lattice: Lattice) -> Result<ScalarField> {
        let field = match self {
            InitialData::Constant { level } => ScalarField::constant(lattice, *level),
            InitialData::BallIndicator { level, radius } => {
                ScalarField::ball_indicator(lattice, *level, *radius)
            }
            InitialData::Field(f) => {
                if f.lattice() != lattice {
                    return Err(Error::domain("initial field lattice mismatch".to_string()));
                }
                f.clone()
            }
        };
        if !field.is_finite() || !field.is_nonnegative() {
            return Err(Error::domain("initial data must be finite and nonnegative".to_string()));
        }
        Ok(field)
    }

    /// Uniform lower bound kappa when one is structurally known.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            InitialData::Constant { level } => Some(*level),
            _ => None,
        }
    }
}

/// Full configuration of one simulated path ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    pub spec: StableKernelSpec,
    pub sigma: SigmaSpec,
    pub noise: NoiseKind,
    pub lattice: Lattice,
    pub initial: InitialData,
    pub dt: f64,
    pub t_end: f64,
    pub trunc_level: f64,
    pub domain: Domain,
}

impl SimConfig {
    /// Cross-field validation shared by every runner.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::domain(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain(format!("t_end must be > 0, got {}", self.t_end)));
        }
        if !(self.trunc_level > 0.0) {
            return Err(Error::domain("trunc_level must be > 0".to_string()));
        }
        if self.lattice.dim() != self.spec.dim() {
            return Err(Error::domain("lattice dim must match spec dim".to_string()));
        }
        if let Domain::Ball { radius } = self.domain {
            if !(radius > 0.0 && radius <= self.lattice.half_width()) {
                return Err(Error::domain("ball radius must be in (0, L]".to_string()));
            }
        }
        if matches!(self.noise, NoiseKind::White) {
            // the local-solution theory needs d = 1, 1 < alpha < 2; alpha = 2
            // is additionally admitted here because the linear oracle and its
            // cross-validation run in the Gaussian case
            if self.spec.dim() != 1 || self.spec.alpha() <= 1.0 {
                return Err(Error::domain(
                    "white-noise simulation requires d = 1 and alpha in (1, 2]".to_string(),
                ));
            }
        }
        // wrap-around budget for the heavy-tailed semigroup on the torus
        let needed = 4.0 * self.spec.time_scale(self.t_end);
        if self.lattice.half_width() < needed {
            return Err(Error::domain(format!(
                "half_width {} is below the wrap-around budget 4 t_end^(1/alpha) = {needed:.3}",
                self.lattice.half_width()
            )));
        }
        Ok(())
    }
}

/// Solution snapshot with truncation bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct FieldState {
    pub field: ScalarField,
    pub time: f64,
    pub trunc_level: f64,
    pub alive: bool,
    pub hit_time: Option<f64>,
}

impl FieldState {
    /// Initial state; fields already violating sup |u| <= N are rejected.
    pub fn new(field: ScalarField, trunc_level: f64) -> Result<Self> {
        if !(trunc_level > 0.0) {
            return Err(Error::domain("trunc_level must be > 0".to_string()));
        }
        if field.sup_abs() > trunc_level {
            return Err(Error::domain(
                "initial field already exceeds the truncation level".to_string(),
            ));
        }
        Ok(FieldState { field, time: 0.0, trunc_level, alive: true, hit_time: None })
    }
}

/// Precomputed machinery for fixed-dt stepping.
pub struct MildStepper {
    propagator: Propagator,
    noise: NoiseGenerator,
    sigma: SigmaSpec,
    dt: f64,
    domain: Domain,
}

impl MildStepper {
    pub fn new(
        spec: StableKernelSpec,
        sigma: SigmaSpec,
        noise_kind: &NoiseKind,
        lattice: Lattice,
        dt: f64,
        domain: Domain,
    ) -> Result<Self> {
        Ok(MildStepper {
            propagator: Propagator::new(lattice, spec, dt)?,
            noise: NoiseGenerator::new(lattice, noise_kind)?,
            sigma,
            dt,
            domain,
        })
    }

    pub fn noise_clip_fraction(&self) -> f64 {
        self.noise.clip_fraction()
    }

    /// One exponential-Euler step: P_dt applied to u + sigma(u) dF (the
    /// left-endpoint discretization of the mild integral), then the
    /// truncation check. Stepping a dead state is a contract error.
    pub fn step(&self, state: &FieldState, rng: &mut impl Rng) -> Result<FieldState> {
        if !state.alive {
            return Err(Error::domain("cannot step a dead (truncated) state".to_string()));
        }
        let increment = self.noise.sample(self.dt, rng)?;
        let lattice = state.field.lattice();
        let forced: Vec<f64> = state
            .field
            .values()
            .iter()
            .zip(&increment.values)
            .map(|(&u, &df)| u + self.sigma.eval(u) * df)
            .collect();
        let mut new_field =
            self.propagator.apply_linear(&ScalarField::from_values(lattice, forced)?)?;
        if let Domain::Ball { radius } = self.domain {
            for (i, v) in new_field.values_mut().iter_mut().enumerate() {
                if norm(&lattice.site_coords(i)) > radius {
                    *v = 0.0;
                }
            }
        }
        let time = state.time + self.dt;
        if new_field.sup_abs() > state.trunc_level {
            return Ok(FieldState {
                field: new_field,
                time,
                trunc_level: state.trunc_level,
                alive: false,
                hit_time: Some(time),
            });
        }
        Ok(FieldState {
            field: new_field,
            time,
            trunc_level: state.trunc_level,
            alive: true,
            hit_time: None,
        })
    }
}

/// One-shot step for callers without a stepper; builds the spectral plan
/// per call, so simulation loops should use [`MildStepper`] directly.
pub fn step_mild(
    state: &FieldState,
    spec: StableKernelSpec,
    sigma: SigmaSpec,
    noise_kind: &NoiseKind,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<FieldState> {
    let stepper =
        MildStepper::new(spec, sigma, noise_kind, state.field.lattice(), dt, Domain::Free)?;
    stepper.step(state, rng)
}

/// Full-field record of one path.
#[derive(Clone, Debug)]
pub struct PathRecord {
    pub hit_time: Option<f64>,
    pub snapshots: Vec<(f64, ScalarField)>,
}

/// Values-at-sites record of one path, for moment estimation without
/// storing whole fields.
#[derive(Clone, Debug)]
pub struct SiteRecord {
    pub hit_time: Option<f64>,
    /// values[time_index][site_index], frozen at the hit snapshot after death
    pub values: Vec<Vec<f64>>,
}

fn drive_path(
    config: &SimConfig,
    seed: u64,
    stream: u64,
    mut observe: impl FnMut(f64, &FieldState),
) -> Result<Option<f64>> {
    config.validate()?;
    let mut u0 = config.initial.realize(config.lattice)?;
    if let Domain::Ball { radius } = config.domain {
        let lattice = config.lattice;
        for (i, v) in u0.values_mut().iter_mut().enumerate() {
            if norm(&lattice.site_coords(i)) > radius {
                *v = 0.0;
            }
        }
    }
    let mut state = FieldState::new(u0, config.trunc_level)?;
    let stepper = MildStepper::new(
        config.spec,
        config.sigma.clone(),
        &config.noise,
        config.lattice,
        config.dt,
        config.domain,
    )?;
    let mut rng = stream_rng(seed, stream);
    observe(0.0, &state);
    let n_steps = (config.t_end / config.dt).round() as u64;
    for _ in 0..n_steps {
        state = stepper.step(&state, &mut rng)?;
        observe(state.time, &state);
        if !state.alive {
            break;
        }
    }
    Ok(state.hit_time)
}

/// Run one path, recording full-field snapshots at the first step time at
/// or past each requested time (the frozen field after truncation).
pub fn run_path(
    config: &SimConfig,
    seed: u64,
    stream: u64,
    snapshot_times: &[f64],
) -> Result<PathRecord> {
    let mut wanted: Vec<f64> = snapshot_times.to_vec();
    wanted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut snapshots: Vec<(f64, ScalarField)> = Vec::with_capacity(wanted.len());
    let mut next = 0usize;
    let mut last: Option<FieldState> = None;
    let hit_time = drive_path(config, seed, stream, |t, state| {
        while next < wanted.len() && t + 1e-12 >= wanted[next] {
            snapshots.push((wanted[next], state.field.clone()));
            next += 1;
        }
        last = Some(state.clone());
    })?;
    // a dead path freezes: emit the frozen field for the remaining times
    if let Some(state) = last {
        while next < wanted.len() {
            snapshots.push((wanted[next], state.field.clone()));
            next += 1;
        }
    }
    Ok(PathRecord { hit_time, snapshots })
}

/// Run one path observing only the given lattice sites.
pub fn run_path_sites(
    config: &SimConfig,
    seed: u64,
    stream: u64,
    snapshot_times: &[f64],
    sites: &[usize],
) -> Result<SiteRecord> {
    let wanted = snapshot_times;
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(wanted.len());
    let mut next = 0usize;
    let mut last_row: Vec<f64> = Vec::new();
    let hit_time = drive_path(config, seed, stream, |t, state| {
        last_row = sites.iter().map(|&i| state.field.value_at_site(i)).collect();
        while next < wanted.len() && t + 1e-12 >= wanted[next] {
            values.push(last_row.clone());
            next += 1;
        }
    })?;
    while next < wanted.len() {
        values.push(last_row.clone());
        next += 1;
    }
    Ok(SiteRecord { hit_time, values })
}

/// Hit times of an ensemble of paths, in path order, run in parallel with
/// per-path RNG streams.
pub fn ensemble_hit_times(config: &SimConfig, n_paths: u64, seed: u64) -> Result<Vec<Option<f64>>> {
    config.validate()?;
    (0..n_paths)
        .into_par_iter()
        .map(|p| drive_path(config, seed, p, |_, _| {}))
        .collect()
}

/// Monte Carlo lower-bound check of the killed deterministic part
/// (G_D u)_t(x) for x in B(0, R/2), via Feynman-Kac on killed paths:
/// E[u0(X_t); path alive]. Returns the minimum over (t, x) of the
/// estimate minus `confidence_z` standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct DirichletLowerBound {
    pub min_estimate: f64,
    pub min_lower_conf: f64,
    pub rows: Vec<(f64, Vec<f64>, f64, f64)>,
}

#[allow(clippy::too_many_arguments)]
pub fn dirichlet_deterministic_check(
    spec: StableKernelSpec,
    radius: f64,
    u0: &ScalarField,
    ts: &[f64],
    xs: &[Vec<f64>],
    n_paths: u64,
    seed: u64,
    confidence_z: f64,
) -> Result<DirichletLowerBound> {
    let horizon = (radius / 2.0).powf(spec.alpha());
    if ts.iter().any(|&t| t > horizon) {
        return Err(Error::hypothesis(format!(
            "requires t <= (R/2)^alpha = {horizon:.6}"
        )));
    }
    if xs.iter().any(|x| norm(x) > radius / 2.0) {
        return Err(Error::domain("x grid must lie in B(0, R/2)".to_string()));
    }
    // Assumption on the initial data: strictly positive on B(0, R/2)
    let lattice = u0.lattice();
    let kappa_tilde = (0..lattice.site_count())
        .filter(|&i| norm(&lattice.site_coords(i)) <= radius / 2.0)
        .map(|i| u0.value_at_site(i))
        .fold(f64::INFINITY, f64::min);
    if !(kappa_tilde > 0.0) {
        return Err(Error::domain(
            "u0 must be bounded below by a positive constant on B(0, R/2)".to_string(),
        ));
    }

    let n_steps = 64u32;
    let mut rows = Vec::new();
    let mut min_est = f64::INFINITY;
    let mut min_low = f64::INFINITY;
    for &t in ts {
        for (xi, x) in xs.iter().enumerate() {
            let dt = t / f64::from(n_steps);
            let stream0 = (xi as u64) << 24;
            let chunk = 512u64;
            let n_chunks = n_paths.div_ceil(chunk);
            let sums: Vec<(f64, f64)> = (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream_rng(seed ^ t.to_bits(), stream0 + c);
                    let lo = c * chunk;
                    let hi = (lo + chunk).min(n_paths);
                    let mut s = 0.0;
                    let mut q = 0.0;
                    for _ in lo..hi {
                        let w = match simulate_killed_path(spec, radius, dt, n_steps, x, &mut rng)
                        {
                            Some(pos) => {
                                let idx = lattice.nearest_site(&pos).unwrap_or(0);
                                u0.value_at_site(idx)
                            }
                            None => 0.0,
                        };
                        s += w;
                        q += w * w;
                    }
                    (s, q)
                })
                .collect();
            let (s, q) = sums.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
            let n = n_paths as f64;
            let mean = s / n;
            let se = ((q / n - mean * mean).max(0.0) / n).sqrt();
            min_est = min_est.min(mean);
            min_low = min_low.min(mean - confidence_z * se);
            rows.push((t, x.clone(), mean, se));
        }
    }
    Ok(DirichletLowerBound { min_estimate: min_est, min_lower_conf: min_low, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SimConfig {
        SimConfig {
            spec: StableKernelSpec::new(1.5, 1).unwrap(),
            sigma: SigmaSpec::linear(0.0).unwrap(),
            noise: NoiseKind::White,
            lattice: Lattice::new(1, 8.0, 256).unwrap(),
            initial: InitialData::Constant { level: 1.0 },
            dt: 1e-2,
            t_end: 0.5,
            trunc_level: 100.0,
            domain: Domain::Free,
        }
    }

    #[test]
    fn sigma_forms() {
        let pp = SigmaSpec::pure_power(1.0).unwrap();
        assert_eq!(pp.eval(-2.0), 4.0);
        let lin = SigmaSpec::linear(3.0).unwrap();
        assert_eq!(lin.eval(-2.0), -6.0);
        let table = SigmaSpec::custom(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 5.0)], 1.0).unwrap();
        assert_eq!(table.eval(0.5), 1.0);
        match &table {
            SigmaSpec::Custom { compliant, .. } => assert!(*compliant),
            _ => unreachable!(),
        }
        // a table falling under |x|^{1+gamma} is flagged, not rejected
        let low = SigmaSpec::custom(vec![(0.0, 0.0), (2.0, 1.0)], 1.0).unwrap();
        match &low {
            SigmaSpec::Custom { compliant, .. } => assert!(!*compliant),
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_sigma_reduces_to_semigroup() {
        let config = base_config();
        let rec = run_path(&config, 11, 0, &[0.25, 0.5]).unwrap();
        assert!(rec.hit_time.is_none());
        for (_, field) in &rec.snapshots {
            // constants are preserved exactly by the spectral propagator
            assert!(field.max_abs_diff(&ScalarField::constant(config.lattice, 1.0)) < 1e-12);
        }

        // non-constant initial data: iterated semigroup is matched exactly
        let mut config = base_config();
        config.initial = InitialData::BallIndicator { level: 1.0, radius: 1.0 };
        let rec = run_path(&config, 11, 0, &[0.5]).unwrap();
        let u0 = config.initial.realize(config.lattice).unwrap();
        let mut expected = u0;
        let prop = Propagator::new(config.lattice, config.spec, config.dt).unwrap();
        for _ in 0..50 {
            expected = prop.apply_linear(&expected).unwrap();
        }
        assert!(rec.snapshots[0].1.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut config = base_config();
        config.sigma = SigmaSpec::pure_power(0.5).unwrap();
        let a = run_path(&config, 42, 3, &[0.5]).unwrap();
        let b = run_path(&config, 42, 3, &[0.5]).unwrap();
        assert_eq!(a.hit_time, b.hit_time);
        assert_eq!(a.snapshots[0].1.values(), b.snapshots[0].1.values());
        let c = run_path(&config, 43, 3, &[0.5]).unwrap();
        assert_ne!(a.snapshots[0].1.values(), c.snapshots[0].1.values());
    }

    #[test]
    fn initial_state_above_truncation_rejected() {
        let lattice = Lattice::new(1, 8.0, 64).unwrap();
        let field = ScalarField::constant(lattice, 5.0);
        assert!(FieldState::new(field, 4.0).is_err());
    }

    #[test]
    fn dead_state_cannot_step() {
        let lattice = Lattice::new(1, 8.0, 64).unwrap();
        let field = ScalarField::constant(lattice, 1.0);
        let mut state = FieldState::new(field, 2.0).unwrap();
        state.alive = false;
        let stepper = MildStepper::new(
            StableKernelSpec::new(1.5, 1).unwrap(),
            SigmaSpec::linear(0.0).unwrap(),
            &NoiseKind::White,
            lattice,
            0.01,
            Domain::Free,
        )
        .unwrap();
        let mut rng = stream_rng(1, 0);
        assert!(stepper.step(&state, &mut rng).is_err());
    }

    #[test]
    fn truncation_freezes_path() {
        // huge noise with a tiny truncation level dies almost immediately
        let mut config = base_config();
        config.sigma = SigmaSpec::pure_power(1.0).unwrap();
        config.initial = InitialData::Constant { level: 1.0 };
        config.trunc_level = 1.05;
        config.dt = 1e-3;
        let rec = run_path(&config, 5, 0, &[0.5]).unwrap();
        let hit = rec.hit_time.expect("tight truncation must trigger");
        assert!(hit <= 0.5);
        // the frozen snapshot carries the hit state
        assert!(rec.snapshots[0].1.sup_abs() > 1.05);
    }

    #[test]
    fn linear_mean_evolution() {
        // E u_{t} = P_t E u_0 for linear sigma: flat initial data stays flat
        // in expectation, so the ensemble mean at any site tracks kappa
        let mut config = base_config();
        config.sigma = SigmaSpec::linear(1.0).unwrap();
        config.dt = 1e-3;
        config.t_end = 0.2;
        let m = 2_000u64;
        let site = config.lattice.nearest_site(&[0.0]).unwrap();
        let values: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|p| {
                let rec = run_path_sites(&config, 77, p, &[0.2], &[site]).unwrap();
                rec.values[0][0]
            })
            .collect();
        let mean = values.iter().sum::<f64>() / m as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0);
        let se = (var / m as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se,
            "ensemble mean {mean:.4} vs 1.0 (se {se:.4})"
        );
    }

    #[test]
    fn killed_dominated_by_free_on_shared_noise() {
        // small fields keep the discrete coupling monotone: the killed run
        // stays under the free run driven by the same noise realization
        let mut free_config = base_config();
        free_config.sigma = SigmaSpec::pure_power(1.0).unwrap();
        free_config.initial = InitialData::Constant { level: 0.5 };
        free_config.dt = 1e-3;
        free_config.t_end = 0.3;
        let mut killed_config = free_config.clone();
        killed_config.domain = Domain::Ball { radius: 2.0 };
        for stream in 0..3 {
            let free = run_path(&free_config, 123, stream, &[0.1, 0.3]).unwrap();
            let killed = run_path(&killed_config, 123, stream, &[0.1, 0.3]).unwrap();
            for ((_, uf), (_, uk)) in free.snapshots.iter().zip(&killed.snapshots) {
                for (a, b) in uk.values().iter().zip(uf.values()) {
                    assert!(*a <= b + 1e-9, "killed {a} exceeded free {b}");
                }
            }
        }
    }

    #[test]
    fn wrap_budget_enforced() {
        let mut config = base_config();
        config.t_end = 1000.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn white_noise_range_enforced() {
        let mut config = base_config();
        config.spec = StableKernelSpec::new(0.9, 1).unwrap();
        assert!(config.validate().is_err());
        // alpha = 2 is admitted for the linear-oracle case
        config.spec = StableKernelSpec::new(2.0, 1).unwrap();
        config.lattice = Lattice::new(1, 8.0, 256).unwrap();
        assert!(config.validate().is_ok());
    }

    #[test]
    fn dirichlet_lower_bound_positive_and_linear_in_u0() {
        let spec = StableKernelSpec::new(1.5, 1).unwrap();
        let lattice = Lattice::new(1, 4.0, 256).unwrap();
        let u0 = ScalarField::ball_indicator(lattice, 1.0, 1.0);
        let t = (0.5_f64).powf(1.5);
        let xs = vec![vec![0.0], vec![0.25], vec![-0.4]];
        let out =
            dirichlet_deterministic_check(spec, 1.0, &u0, &[t], &xs, 20_000, 9, 2.326).unwrap();
        assert!(out.min_lower_conf > 0.0, "bound {:.4}", out.min_lower_conf);

        let u0_double = ScalarField::ball_indicator(lattice, 2.0, 1.0);
        let out2 =
            dirichlet_deterministic_check(spec, 1.0, &u0_double, &[t], &xs, 20_000, 9, 2.326)
                .unwrap();
        let ratio = out2.min_estimate / out.min_estimate;
        assert!((ratio - 2.0).abs() < 0.2, "doubling u0 doubles the bound, got {ratio:.3}");

        // outside B(0, R/2) is out of contract
        assert!(dirichlet_deterministic_check(
            spec,
            1.0,
            &u0,
            &[t],
            &[vec![0.9]],
            100,
            9,
            2.326
        )
        .is_err());
        // t beyond (R/2)^alpha is a hypothesis failure
        assert!(matches!(
            dirichlet_deterministic_check(spec, 1.0, &u0, &[1.0], &xs, 100, 9, 2.326),
            Err(Error::HypothesisNotMet(_))
        ));
    }
}
