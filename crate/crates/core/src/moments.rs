//! Monte Carlo moment estimation and blow-up proxies: truncated second and
//! cross moments with standard errors, truncation-hit statistics, the
//! kappa and horizon sweeps, and the linear-case Volterra oracle.
//!
//! Blow-up itself is not observable in finite samples; the proxy is the
//! fraction of paths whose truncation stopping time has triggered, crossing
//! a configured threshold.

use crate::error::{Error, Result};
use crate::field_sim::{
    ensemble_hit_times, run_path_sites, Domain, InitialData, NoiseKind, SimConfig,
};
use crate::renewal::{solve_volterra_numeric, KernelForm, RenewalProblem};
use crate::sampling::stream_rng;
use crate::stable_kernel::{kernel_at_origin, StableKernelSpec};
use crate::correlation::CorrelationVariant;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Probe points and point pairs, all of which must be lattice sites.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ProbeSet {
    pub points: Vec<Vec<f64>>,
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Truncated-moment estimates over time.
#[derive(Clone, Debug, Serialize)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    /// E[min(|u_t(x)|, N)^2] per [time][point]
    pub second_moment: Vec<Vec<f64>>,
    pub second_stderr: Vec<Vec<f64>>,
    /// E[min(|u_t(x) u_t(y)|, N^2)] per [time][pair]
    pub cross_moment: Vec<Vec<f64>>,
    pub cross_stderr: Vec<Vec<f64>>,
    /// Fraction of paths with hit_time <= t.
    pub hit_fraction: Vec<f64>,
    pub n_paths: u64,
    pub trunc_level: f64,
    /// Uniform initial lower bound, when the configuration provides one.
    pub kappa: Option<f64>,
}

/// Sample second and cross moments over `n_paths` independent paths.
pub fn estimate_moments(
    config: &SimConfig,
    probes: &ProbeSet,
    times: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<MomentSeries> {
    if n_paths < 100 {
        return Err(Error::domain(format!(
            "need at least 100 paths for moment estimation, got {n_paths}"
        )));
    }
    if times.is_empty() {
        return Err(Error::domain("need at least one snapshot time".to_string()));
    }
    config.validate()?;
    let lattice = config.lattice;
    let mut sites: Vec<usize> = Vec::new();
    let mut site_index = |x: &Vec<f64>| -> Result<usize> {
        if !lattice.is_on_lattice(x, 1e-9) {
            return Err(Error::domain(format!("probe {x:?} is not a lattice site")));
        }
        let idx = lattice.nearest_site(x)?;
        Ok(match sites.iter().position(|&s| s == idx) {
            Some(k) => k,
            None => {
                sites.push(idx);
                sites.len() - 1
            }
        })
    };
    let point_slots: Vec<usize> =
        probes.points.iter().map(&mut site_index).collect::<Result<_>>()?;
    let pair_slots: Vec<(usize, usize)> = probes
        .pairs
        .iter()
        .map(|(a, b)| {
            let ia = site_index(&a.clone())?;
            let ib = site_index(&b.clone())?;
            Ok((ia, ib))
        })
        .collect::<Result<_>>()?;

    let records: Vec<_> = (0..n_paths)
        .into_par_iter()
        .map(|p| run_path_sites(config, seed, p, times, &sites))
        .collect::<Result<_>>()?;

    let n = n_paths as f64;
    let cap = config.trunc_level;
    let cap2 = cap * cap;
    let nt = times.len();
    let mut second = vec![vec![0.0; point_slots.len()]; nt];
    let mut second_sq = vec![vec![0.0; point_slots.len()]; nt];
    let mut cross = vec![vec![0.0; pair_slots.len()]; nt];
    let mut cross_sq = vec![vec![0.0; pair_slots.len()]; nt];
    let mut hits = vec![0.0; nt];
    for rec in &records {
        for (ti, t) in times.iter().enumerate() {
            if rec.hit_time.map_or(false, |h| h <= *t + 1e-12) {
                hits[ti] += 1.0;
            }
            for (pi, &slot) in point_slots.iter().enumerate() {
                let v = rec.values[ti][slot].abs().min(cap);
                let v2 = v * v;
                second[ti][pi] += v2;
                second_sq[ti][pi] += v2 * v2;
            }
            for (pi, &(sa, sb)) in pair_slots.iter().enumerate() {
                let w = (rec.values[ti][sa] * rec.values[ti][sb]).abs().min(cap2);
                cross[ti][pi] += w;
                cross_sq[ti][pi] += w * w;
            }
        }
    }
    let finalize = |sums: &mut Vec<Vec<f64>>, sqs: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut err = vec![vec![0.0; sums[0].len()]; sums.len()];
        for ti in 0..sums.len() {
            for pi in 0..sums[ti].len() {
                let mean = sums[ti][pi] / n;
                let var = (sqs[ti][pi] / n - mean * mean).max(0.0);
                sums[ti][pi] = mean;
                err[ti][pi] = (var / n).sqrt();
            }
        }
        err
    };
    let second_stderr = finalize(&mut second, &second_sq);
    let cross_stderr = finalize(&mut cross, &cross_sq);

    Ok(MomentSeries {
        times: times.to_vec(),
        points: probes.points.clone(),
        pairs: probes.pairs.clone(),
        second_moment: second,
        second_stderr,
        cross_moment: cross,
        cross_stderr,
        hit_fraction: hits.iter().map(|h| h / n).collect(),
        n_paths,
        trunc_level: cap,
        kappa: config.initial.kappa(),
    })
}

/// Second-moment curve of the linear equation (sigma = lambda u, constant
/// initial level kappa, white noise, d = 1): solves
///   m(t) = kappa^2 + lambda^2 int_0^t m(s) p_{2(t-s)}(0) ds
/// by the renewal module's product-integration solver (gamma = 0), with
/// p_{2r}(0) = (2r)^{-1/alpha} p_1(0) folded into the Abel kernel.
pub fn linear_moment_oracle(
    lambda: f64,
    spec: StableKernelSpec,
    kappa: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    if spec.dim() != 1 || spec.alpha() <= 1.0 {
        return Err(Error::unsupported(
            "the linear oracle is the d = 1 white-noise case, alpha in (1, 2]".to_string(),
        ));
    }
    if !(kappa > 0.0) {
        return Err(Error::domain("kappa must be > 0".to_string()));
    }
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("times must be positive".to_string()));
    }
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let p1_zero = kernel_at_origin(spec, 1.0)?;
    let forcing = lambda * lambda * p1_zero * 2.0_f64.powf(-1.0 / spec.alpha());
    let problem = RenewalProblem::new(
        kappa * kappa,
        forcing,
        0.0,
        spec.alpha(),
        t_max * 1.0001,
        KernelForm::SingularDifference,
    )?;
    let sol = solve_volterra_numeric(&problem, t_max / 4096.0, 1e12)?;
    times
        .iter()
        .map(|&t| {
            sol.value_at(t)
                .ok_or_else(|| Error::accuracy(format!("oracle trajectory misses t = {t}")))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BlowupVerdict {
    BlowupProxyDetected,
    NoneWithinHorizon,
}

/// The empirical surrogate for moment blow-up: the first time the
/// truncation-hit fraction crosses the threshold.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub verdict: BlowupVerdict,
    pub t0_hat: Option<f64>,
    pub kappa: Option<f64>,
    pub threshold: f64,
    pub times: Vec<f64>,
    pub hit_fraction: Vec<f64>,
}

/// t0_hat = min { t in series.times : hit_fraction(t) >= threshold }.
pub fn detect_blowup_proxy(series: &MomentSeries, threshold: f64) -> Result<BlowupReport> {
    detect_from_fractions(&series.times, &series.hit_fraction, threshold, series.kappa)
}

fn detect_from_fractions(
    times: &[f64],
    fractions: &[f64],
    threshold: f64,
    kappa: Option<f64>,
) -> Result<BlowupReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::domain(format!("threshold must be in (0, 1], got {threshold}")));
    }
    let t0_hat = times
        .iter()
        .zip(fractions)
        .find(|(_, &f)| f >= threshold)
        .map(|(&t, _)| t);
    Ok(BlowupReport {
        verdict: if t0_hat.is_some() {
            BlowupVerdict::BlowupProxyDetected
        } else {
            BlowupVerdict::NoneWithinHorizon
        },
        t0_hat,
        kappa,
        threshold,
        times: times.to_vec(),
        hit_fraction: fractions.to_vec(),
    })
}

fn grid_times(t_end: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

fn fractions_from_hits(hits: &[Option<f64>], grid: &[f64]) -> Vec<f64> {
    let n = hits.len() as f64;
    grid.iter()
        .map(|&t| hits.iter().filter(|h| h.map_or(false, |v| v <= t + 1e-12)).count() as f64 / n)
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaSweepRow {
    pub kappa: f64,
    pub t0_hat: Option<f64>,
    pub hit_fraction_at_end: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaSweepReport {
    pub rows: Vec<KappaSweepRow>,
    /// Whether t0_hat is nonincreasing in kappa (ties allowed, absent
    /// detections count as +infinity).
    pub monotone: bool,
    /// Bootstrap fraction of resampled ensembles in which the ordering held.
    pub bootstrap_confidence: f64,
    /// Smallest kappa with a detection: empirical analogue of the
    /// initial-level threshold.
    pub kappa0_hat: Option<f64>,
    pub threshold: f64,
    pub trunc_level: f64,
}

/// Run the blow-up proxy across increasing initial levels. Each level gets
/// its own independent ensemble; the truncation level is shared
/// (10 x the largest kappa) so hit times are comparable across levels.
pub fn kappa_sweep(
    base: &SimConfig,
    kappas: &[f64],
    n_paths: u64,
    seed: u64,
    threshold: f64,
) -> Result<KappaSweepReport> {
    if kappas.len() < 3 || kappas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "kappa sweep needs >= 3 strictly increasing values".to_string(),
        ));
    }
    let trunc = 10.0 * kappas.last().unwrap();
    let grid = grid_times(base.t_end, 64);
    let mut all_hits: Vec<Vec<Option<f64>>> = Vec::with_capacity(kappas.len());
    let mut rows = Vec::with_capacity(kappas.len());
    for (k, &kappa) in kappas.iter().enumerate() {
        let mut config = base.clone();
        config.initial = InitialData::Constant { level: kappa };
        config.trunc_level = trunc;
        let ensemble_seed = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let hits = ensemble_hit_times(&config, n_paths, ensemble_seed)?;
        let fracs = fractions_from_hits(&hits, &grid);
        let report = detect_from_fractions(&grid, &fracs, threshold, Some(kappa))?;
        rows.push(KappaSweepRow {
            kappa,
            t0_hat: report.t0_hat,
            hit_fraction_at_end: *fracs.last().unwrap(),
        });
        all_hits.push(hits);
    }
    let as_inf = |t: &Option<f64>| t.unwrap_or(f64::INFINITY);
    let monotone = rows.windows(2).all(|w| as_inf(&w[1].t0_hat) <= as_inf(&w[0].t0_hat) + 1e-12);
    let bootstrap_confidence =
        bootstrap_ordering_confidence(&all_hits, &grid, threshold, 500, seed ^ 0xb007);
    let kappa0_hat = rows.iter().find(|r| r.t0_hat.is_some()).map(|r| r.kappa);
    Ok(KappaSweepReport {
        rows,
        monotone,
        bootstrap_confidence,
        kappa0_hat,
        threshold,
        trunc_level: trunc,
    })
}

/// Fraction of bootstrap resamples (per-level resampling with replacement)
/// in which t0_hat is nonincreasing across the levels.
fn bootstrap_ordering_confidence(
    all_hits: &[Vec<Option<f64>>],
    grid: &[f64],
    threshold: f64,
    n_boot: u32,
    seed: u64,
) -> f64 {
    let mut rng = stream_rng(seed, 0);
    let mut ok = 0u32;
    for _ in 0..n_boot {
        let mut prev = f64::INFINITY;
        let mut holds = true;
        for hits in all_hits {
            let m = hits.len();
            let resample: Vec<Option<f64>> =
                (0..m).map(|_| hits[rng.random_range(0..m)]).collect();
            let fracs = fractions_from_hits(&resample, grid);
            let t0 = grid
                .iter()
                .zip(&fracs)
                .find(|(_, &f)| f >= threshold)
                .map_or(f64::INFINITY, |(&t, _)| t);
            if t0 > prev + 1e-12 {
                holds = false;
                break;
            }
            prev = t0;
        }
        if holds {
            ok += 1;
        }
    }
    f64::from(ok) / f64::from(n_boot)
}

#[derive(Clone, Debug, Serialize)]
pub struct HorizonSweepRow {
    pub horizon: f64,
    pub hit_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HorizonSweepReport {
    pub rows: Vec<HorizonSweepRow>,
    /// Nondecreasing trend of hit fraction in the horizon, with a two
    /// binomial-standard-error slack per step.
    pub nondecreasing_trend: bool,
}

/// Hit fraction at each horizon, independent ensembles per horizon; the
/// long-run analogue of "any positive level suffices, given enough time"
/// for Riesz-correlated noise.
pub fn horizon_sweep_riesz(
    base: &SimConfig,
    horizons: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<HorizonSweepReport> {
    require_riesz(base)?;
    if horizons.len() < 2 || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("need >= 2 strictly increasing horizons".to_string()));
    }
    let mut rows = Vec::with_capacity(horizons.len());
    for (k, &horizon) in horizons.iter().enumerate() {
        let mut config = base.clone();
        config.t_end = horizon;
        let ensemble_seed = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let hits = ensemble_hit_times(&config, n_paths, ensemble_seed)?;
        let frac =
            hits.iter().filter(|h| h.map_or(false, |v| v <= horizon + 1e-12)).count() as f64
                / n_paths as f64;
        rows.push(HorizonSweepRow { horizon, hit_fraction: frac });
    }
    let slack = 2.0 / (n_paths as f64).sqrt();
    let nondecreasing_trend =
        rows.windows(2).all(|w| w[1].hit_fraction >= w[0].hit_fraction - slack);
    Ok(HorizonSweepReport { rows, nondecreasing_trend })
}

fn require_riesz(config: &SimConfig) -> Result<f64> {
    match &config.noise {
        NoiseKind::Colored(kernel) => match kernel.variant() {
            CorrelationVariant::Riesz { beta } => {
                let limit = config.spec.alpha().min(config.spec.dim() as f64);
                if beta >= limit {
                    return Err(Error::hypothesis(format!(
                        "requires beta < alpha AND d = {limit:.3}, got beta = {beta}"
                    )));
                }
                Ok(beta)
            }
            _ => Err(Error::domain("this experiment requires a Riesz kernel".to_string())),
        },
        _ => Err(Error::domain("this experiment requires colored Riesz noise".to_string())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RieszGrowthDiagnostic {
    pub times: Vec<f64>,
    pub cross_moment: Vec<f64>,
    pub cross_stderr: Vec<f64>,
    /// cross moment minus the deterministic product (kappa^2 for constant
    /// initial data in free space): the stochastic-convolution content.
    pub excess: Vec<f64>,
    /// Least-squares slope of log(excess) against log(t).
    pub slope: f64,
    /// (alpha - beta)/alpha, the scaling exponent of the §-style bound.
    pub target_slope: f64,
}

/// Growth diagnostic for Riesz-correlated noise: the measured cross moment
/// at a probe pair inside B(0, t^{1/alpha}) should grow at least like
/// t^{(alpha-beta)/alpha} once the deterministic floor is removed.
pub fn riesz_growth_diagnostic(
    base: &SimConfig,
    pair: (&[f64], &[f64]),
    times: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<RieszGrowthDiagnostic> {
    let beta = require_riesz(base)?;
    let kappa = base.initial.kappa().ok_or_else(|| {
        Error::domain("the diagnostic needs constant initial data (known kappa)".to_string())
    })?;
    if base.domain != Domain::Free {
        return Err(Error::domain("the diagnostic runs in free space".to_string()));
    }
    let t_min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let ball = base.spec.time_scale(t_min);
    let within =
        |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>().sqrt() <= ball + 1e-12;
    if !within(pair.0) || !within(pair.1) {
        return Err(Error::hypothesis(format!(
            "probe pair must lie in B(0, t_min^(1/alpha)) = B(0, {ball:.4})"
        )));
    }
    let mut config = base.clone();
    config.t_end = times.iter().cloned().fold(0.0, f64::max);
    let probes = ProbeSet {
        points: vec![],
        pairs: vec![(pair.0.to_vec(), pair.1.to_vec())],
    };
    let series = estimate_moments(&config, &probes, times, n_paths, seed)?;
    let cross: Vec<f64> = series.cross_moment.iter().map(|row| row[0]).collect();
    let stderr: Vec<f64> = series.cross_stderr.iter().map(|row| row[0]).collect();
    let excess: Vec<f64> = cross.iter().map(|&c| c - kappa * kappa).collect();
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&excess)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&t, &e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::accuracy(
            "too few positive excess values to fit a growth slope".to_string(),
        ));
    }
    let slope = least_squares_slope(&pts);
    Ok(RieszGrowthDiagnostic {
        times: times.to_vec(),
        cross_moment: cross,
        cross_stderr: stderr,
        excess,
        slope,
        target_slope: (base.spec.alpha() - beta) / base.spec.alpha(),
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct DirichletExperimentReport {
    pub killed: BlowupReport,
    pub free: BlowupReport,
    /// t0_hat(killed) >= t0_hat(free) on shared seeds: killing removes mass,
    /// so detection comes later or not at all.
    pub killed_not_earlier: bool,
}

/// The blow-up proxy pipeline on killed-ball dynamics, compared against the
/// free-space run at identical parameters and identical noise streams.
pub fn dirichlet_experiment(
    config: &SimConfig,
    n_paths: u64,
    seed: u64,
    threshold: f64,
) -> Result<DirichletExperimentReport> {
    let Domain::Ball { .. } = config.domain else {
        return Err(Error::domain("dirichlet_experiment needs a ball domain".to_string()));
    };
    let grid = grid_times(config.t_end, 64);
    let killed_hits = ensemble_hit_times(config, n_paths, seed)?;
    let mut free_config = config.clone();
    free_config.domain = Domain::Free;
    let free_hits = ensemble_hit_times(&free_config, n_paths, seed)?;
    let killed = detect_from_fractions(
        &grid,
        &fractions_from_hits(&killed_hits, &grid),
        threshold,
        config.initial.kappa(),
    )?;
    let free = detect_from_fractions(
        &grid,
        &fractions_from_hits(&free_hits, &grid),
        threshold,
        config.initial.kappa(),
    )?;
    let as_inf = |t: &Option<f64>| t.unwrap_or(f64::INFINITY);
    let killed_not_earlier = as_inf(&killed.t0_hat) >= as_inf(&free.t0_hat) - 1e-12;
    Ok(DirichletExperimentReport { killed, free, killed_not_earlier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_sim::SigmaSpec;
    use crate::lattice::Lattice;

    fn quiet_config() -> SimConfig {
        SimConfig {
            spec: StableKernelSpec::new(1.5, 1).unwrap(),
            sigma: SigmaSpec::linear(0.0).unwrap(),
            noise: NoiseKind::White,
            lattice: Lattice::new(1, 8.0, 256).unwrap(),
            initial: InitialData::Constant { level: 2.0 },
            dt: 1e-2,
            t_end: 0.5,
            trunc_level: 100.0,
            domain: Domain::Free,
        }
    }

    #[test]
    fn deterministic_field_has_exact_moments() {
        let config = quiet_config();
        let probes = ProbeSet { points: vec![vec![0.0]], pairs: vec![(vec![0.0], vec![0.5])] };
        let series = estimate_moments(&config, &probes, &[0.25, 0.5], 128, 3).unwrap();
        for row in &series.second_moment {
            assert!((row[0] - 4.0).abs() < 1e-10, "sigma = 0 keeps u = kappa");
        }
        for row in &series.second_stderr {
            assert!(row[0] < 1e-12, "deterministic field has zero stderr");
        }
        for row in &series.cross_moment {
            assert!((row[0] - 4.0).abs() < 1e-10);
        }
        assert!(series.hit_fraction.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn small_ensembles_rejected() {
        let config = quiet_config();
        let probes = ProbeSet { points: vec![vec![0.0]], pairs: vec![] };
        assert!(estimate_moments(&config, &probes, &[0.1], 10, 3).is_err());
    }

    #[test]
    fn off_lattice_probe_rejected() {
        let config = quiet_config();
        let probes = ProbeSet { points: vec![vec![0.011]], pairs: vec![] };
        assert!(estimate_moments(&config, &probes, &[0.1], 128, 3).is_err());
    }

    #[test]
    fn cross_moment_symmetric_in_pair_order() {
        let mut config = quiet_config();
        config.sigma = SigmaSpec::linear(1.0).unwrap();
        config.dt = 1e-3;
        config.t_end = 0.1;
        let probes = ProbeSet {
            points: vec![],
            pairs: vec![(vec![0.0], vec![0.5]), (vec![0.5], vec![0.0])],
        };
        let series = estimate_moments(&config, &probes, &[0.1], 200, 9).unwrap();
        assert_eq!(
            series.cross_moment[0][0].to_bits(),
            series.cross_moment[0][1].to_bits(),
            "same samples, same value, exactly"
        );
    }

    #[test]
    fn oracle_linear_cases() {
        let spec = StableKernelSpec::new(2.0, 1).unwrap();
        // lambda = 0: m = kappa^2
        let m = linear_moment_oracle(0.0, spec, 2.0, &[0.1, 0.4]).unwrap();
        assert!(m.iter().all(|&v| (v - 4.0).abs() < 1e-9));

        // closed form at alpha = 2: m(t) = e^{t/8} (1 + erf(sqrt(t/8)))
        let want = [
            (0.1, 1.1397916582108126),
            (0.25, 1.2354226091027345),
            (0.5, 1.35864237010472212),
        ];
        let ts: Vec<f64> = want.iter().map(|w| w.0).collect();
        let m = linear_moment_oracle(1.0, spec, 1.0, &ts).unwrap();
        for ((_, w), got) in want.iter().zip(&m) {
            assert!(
                (got - w).abs() / w < 2e-3,
                "oracle {got:.6} vs closed form {w:.6}"
            );
        }

        // kappa scaling is exact: m scales by kappa^2
        let m2 = linear_moment_oracle(1.0, spec, 3.0, &ts).unwrap();
        for (a, b) in m.iter().zip(&m2) {
            assert!((b / a - 9.0).abs() < 1e-9);
        }
    }

    #[test]
    fn detect_threshold_semantics() {
        let series = MomentSeries {
            times: vec![0.1, 0.2, 0.3, 0.4],
            points: vec![],
            pairs: vec![],
            second_moment: vec![],
            second_stderr: vec![],
            cross_moment: vec![],
            cross_stderr: vec![],
            hit_fraction: vec![0.0, 0.2, 0.6, 0.9],
            n_paths: 100,
            trunc_level: 1.0,
            kappa: Some(1.0),
        };
        let r = detect_blowup_proxy(&series, 0.5).unwrap();
        assert_eq!(r.verdict, BlowupVerdict::BlowupProxyDetected);
        assert_eq!(r.t0_hat, Some(0.3), "crossing at the third snapshot");
        // threshold 1.0 with one surviving path: no detection
        let r = detect_blowup_proxy(&series, 1.0).unwrap();
        assert_eq!(r.verdict, BlowupVerdict::NoneWithinHorizon);
        assert!(r.t0_hat.is_none());
        assert!(detect_blowup_proxy(&series, 0.0).is_err());
    }

    #[test]
    fn kappa_sweep_sigma_zero_control() {
        let config = quiet_config();
        let report = kappa_sweep(&config, &[1.0, 2.0, 4.0], 120, 5, 0.5).unwrap();
        assert!(report.rows.iter().all(|r| r.t0_hat.is_none()));
        assert!(report.monotone);
        assert!(report.kappa0_hat.is_none());
        assert!(report.bootstrap_confidence >= 0.999);
    }

    #[test]
    fn kappa_sweep_needs_three_increasing() {
        let config = quiet_config();
        assert!(kappa_sweep(&config, &[1.0], 120, 5, 0.5).is_err());
        assert!(kappa_sweep(&config, &[1.0, 1.0, 2.0], 120, 5, 0.5).is_err());
    }

    #[test]
    fn horizon_sweep_requires_riesz() {
        let config = quiet_config();
        assert!(horizon_sweep_riesz(&config, &[0.5, 1.0], 100, 1).is_err());
    }
}
