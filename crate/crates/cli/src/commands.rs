//! Subcommand implementations: each runs its experiment, writes the CSV and
//! JSON artifacts into the output directory, and finishes by writing the
//! run manifest (the manifest's presence marks a completed run).

use crate::config::{ExperimentConfig, ExperimentKind};
use fracheat_core::correlation::{
    check_dalang, CorrelationKernel, CorrelationVariant,
};
use fracheat_core::error::{Error, Result};
use fracheat_core::field_sim::NoiseGenerator;
use fracheat_core::moments::{
    detect_blowup_proxy, dirichlet_experiment, estimate_moments, horizon_sweep_riesz, kappa_sweep,
    riesz_growth_diagnostic, ProbeSet,
};
use fracheat_core::renewal::{
    blowup_time_power, blowup_time_singular, reduce_exponent, solve_volterra_numeric_to,
    KernelForm, RenewalProblem,
};
use fracheat_core::stable_kernel::{check_two_sided_bound, StableKernelSpec};
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Run outcome: the written manifest plus whether every checked hypothesis
/// held (false maps to exit code 2).
pub struct Outcome {
    pub manifest: RunManifest,
    pub hypothesis_met: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub master_seed: Option<u64>,
    pub wall_clock_secs: f64,
    pub version: String,
    pub notes: serde_json::Value,
}

pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn new(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path)
            .map_err(|e| Error::domain(format!("cannot create output dir: {e}")))?;
        Ok(OutDir { root: path.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.root.join(name), body)
            .map_err(|e| Error::domain(format!("cannot write {name}: {e}")))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let body = serde_json::to_string_pretty(value)
            .map_err(|e| Error::domain(format!("cannot serialize {name}: {e}")))?;
        self.write(name, &body)
    }

    /// Written last; consumes the collected artifact list.
    pub fn finish(
        mut self,
        command: &str,
        config: BTreeMap<String, String>,
        master_seed: Option<u64>,
        started: Instant,
        notes: serde_json::Value,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            artifacts: self.artifacts.clone(),
            master_seed,
            wall_clock_secs: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            notes,
        };
        let body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::domain(format!("cannot serialize manifest: {e}")))?;
        self.artifacts.clear();
        std::fs::write(self.root.join("run.json"), body)
            .map_err(|e| Error::domain(format!("cannot write run.json: {e}")))?;
        Ok(manifest)
    }
}

pub struct VerifyKernelArgs {
    pub alpha: f64,
    pub dim: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub x_max: f64,
    pub resolution: usize,
    pub report: String,
}

pub fn verify_kernel(args: &VerifyKernelArgs, out: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let spec = StableKernelSpec::new(args.alpha, args.dim)?;
    let report = check_two_sided_bound(
        spec,
        (args.t_min, args.t_max),
        args.x_max,
        (args.resolution, args.resolution),
    )?;

    let mut csv = String::from("t,x,p,bound_lo,bound_hi,ratio\n");
    for s in &report.grid {
        let shape = s.rhs;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            s.coords[0],
            s.coords[1],
            s.lhs,
            report.c1_hat * shape,
            report.c2_hat * shape,
            s.ratio
        );
    }
    let mut dir = OutDir::new(out)?;
    dir.write(&args.report, &csv)?;
    dir.write_json(
        "kernel_report.json",
        &json!({
            "alpha": args.alpha,
            "dim": args.dim,
            "c1_hat": report.c1_hat,
            "c2_hat": report.c2_hat,
            "hypothesis_met": report.hypothesis_met,
            "violations": report.violations.len(),
        }),
    )?;

    let mut config = BTreeMap::new();
    config.insert("alpha".into(), args.alpha.to_string());
    config.insert("dim".into(), args.dim.to_string());
    config.insert("t_min".into(), args.t_min.to_string());
    config.insert("t_max".into(), args.t_max.to_string());
    config.insert("x_max".into(), args.x_max.to_string());
    config.insert("resolution".into(), args.resolution.to_string());
    let hypothesis_met = report.hypothesis_met;
    let manifest = dir.finish(
        "verify-kernel",
        config,
        None,
        started,
        json!({ "c1_hat": report.c1_hat, "c2_hat": report.c2_hat }),
    )?;
    Ok(Outcome { manifest, hypothesis_met })
}

pub struct VerifyCorrelationArgs {
    pub kernel: String,
    pub beta: Option<f64>,
    pub ou_exponent: Option<f64>,
    pub dim: usize,
    pub alpha: f64,
    pub radius: f64,
}

pub fn verify_correlation(args: &VerifyCorrelationArgs, out: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let spec = StableKernelSpec::new(args.alpha, args.dim)?;
    let variant = match args.kernel.as_str() {
        "white" => CorrelationVariant::WhiteNoise,
        "riesz" => CorrelationVariant::Riesz {
            beta: args
                .beta
                .ok_or_else(|| Error::domain("riesz kernel requires --beta".to_string()))?,
        },
        "expo" => CorrelationVariant::ExponentialType,
        "ou" => CorrelationVariant::OrnsteinUhlenbeck {
            exponent: args.ou_exponent.unwrap_or(1.0),
        },
        "poisson" => CorrelationVariant::Poisson,
        "cauchy" => CorrelationVariant::Cauchy,
        other => return Err(Error::domain(format!("unknown kernel '{other}'"))),
    };
    let kernel = CorrelationKernel::new(variant, args.dim)?;
    let dalang = check_dalang(&kernel, spec);
    let k_f = if kernel.is_white() { None } else { Some(kernel.infimum_on_ball(args.radius)?) };
    let k_f_grid = if kernel.is_white() {
        None
    } else {
        Some(kernel.infimum_on_ball_grid(args.radius, 9)?)
    };

    let mut dir = OutDir::new(out)?;
    dir.write_json(
        "correlation.json",
        &json!({
            "kernel": args.kernel,
            "dim": args.dim,
            "alpha": args.alpha,
            "radius": args.radius,
            "K_f": k_f,
            "K_f_grid_check": k_f_grid,
            "dalang": dalang,
            "samplable": kernel.is_translation_invariant(),
        }),
    )?;
    let mut config = BTreeMap::new();
    config.insert("kernel".into(), args.kernel.clone());
    config.insert("dim".into(), args.dim.to_string());
    config.insert("alpha".into(), args.alpha.to_string());
    config.insert("radius".into(), args.radius.to_string());
    if let Some(b) = args.beta {
        config.insert("beta".into(), b.to_string());
    }
    let hypothesis_met = dalang.passes || kernel.is_white();
    let manifest =
        dir.finish("verify-correlation", config, None, started, json!({ "passes": dalang.passes }))?;
    Ok(Outcome { manifest, hypothesis_met })
}

pub struct RenewalArgs {
    pub initial: f64,
    pub forcing: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub form: String,
    pub mesh: f64,
    pub cap: f64,
    pub trajectory: Option<String>,
}

pub fn renewal(args: &RenewalArgs, out: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let form = match args.form.as_str() {
        "singular" => KernelForm::SingularDifference,
        "power" => KernelForm::PowerState,
        "constant" => KernelForm::Constant,
        other => {
            return Err(Error::domain(format!(
                "unknown form '{other}' (expected singular|power|constant)"
            )))
        }
    };

    // analytic side: the constant/singular forms share the horizon-frozen
    // formula; the power form has its own, after exponent reduction if the
    // problem is supercritical
    let mut reduced = None;
    let (analytic, problem) = match form {
        KernelForm::Constant | KernelForm::SingularDifference => {
            let analytic = if args.gamma > 0.0 {
                Some(blowup_time_singular(
                    args.initial,
                    args.forcing,
                    args.gamma,
                    args.alpha,
                    args.horizon,
                )?)
            } else {
                None
            };
            let problem = RenewalProblem::new(
                args.initial,
                args.forcing,
                args.gamma,
                args.alpha,
                args.horizon,
                form,
            )?;
            (analytic, problem)
        }
        KernelForm::PowerState => {
            let (g0, mult) = reduce_exponent(args.gamma, args.initial, args.alpha)?;
            if g0 != args.gamma {
                reduced = Some((g0, mult));
            }
            let b_eff = args.forcing * mult;
            let analytic = Some(blowup_time_power(args.initial, b_eff, g0, args.alpha)?);
            let problem = RenewalProblem::new(
                args.initial,
                b_eff,
                g0,
                args.alpha,
                args.horizon,
                KernelForm::PowerState,
            )?;
            (analytic, problem)
        }
    };

    // integrate far enough to see an analytic blow-up even past the horizon
    let t_max = match analytic {
        Some(t) if t.is_finite() => (1.5 * t).max(problem.horizon),
        _ => problem.horizon,
    };
    let solution = solve_volterra_numeric_to(&problem, args.mesh, args.cap, t_max)?;
    let rel_err = match (analytic, solution.t_star) {
        (Some(a), Some(n)) => Some((n - a).abs() / a),
        _ => None,
    };
    let certified = solution.t_star.map(|t| t <= args.horizon);

    let mut dir = OutDir::new(out)?;
    dir.write_json(
        "renewal.json",
        &json!({
            "form": args.form,
            "A": args.initial,
            "B": args.forcing,
            "gamma": args.gamma,
            "alpha": args.alpha,
            "T": args.horizon,
            "mesh": args.mesh,
            "cap": args.cap,
            "t_star_analytic": analytic,
            "t_star_numeric": solution.t_star,
            "rel_err": rel_err,
            "certified_within_horizon": certified,
            "exponent_reduction": reduced.map(|(g0, mult)| json!({
                "gamma0": g0, "forcing_multiplier": mult
            })),
        }),
    )?;
    if let Some(name) = &args.trajectory {
        let mut csv = String::from("t,g\n");
        if let Some(traj) = &solution.trajectory {
            for (t, g) in traj {
                let _ = writeln!(csv, "{t},{g}");
            }
        }
        dir.write(name, &csv)?;
    }

    let mut config = BTreeMap::new();
    for (k, v) in [
        ("A", args.initial),
        ("B", args.forcing),
        ("gamma", args.gamma),
        ("alpha", args.alpha),
        ("T", args.horizon),
        ("mesh", args.mesh),
        ("cap", args.cap),
    ] {
        config.insert(k.to_string(), v.to_string());
    }
    config.insert("form".into(), args.form.clone());
    let manifest = dir.finish(
        "renewal",
        config,
        None,
        started,
        json!({ "t_star_numeric": solution.t_star }),
    )?;
    Ok(Outcome { manifest, hypothesis_met: true })
}

fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn simulate(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let sim = &config.sim;
    sim.validate()?;
    let mut dir = OutDir::new(out)?;

    // per-path hit times and per-site running moments at the snapshot times
    let times = &config.snapshot_times;
    let n_sites = sim.lattice.site_count();
    let all_sites: Vec<usize> = (0..n_sites).collect();
    let records: Vec<_> = {
        use rayon::prelude::*;
        (0..config.paths)
            .into_par_iter()
            .map(|p| fracheat_core::field_sim::run_path_sites(sim, config.seed, p, times, &all_sites))
            .collect::<Result<Vec<_>>>()?
    };

    let mut csv = String::from("path_id,hit_time\n");
    for (i, rec) in records.iter().enumerate() {
        match rec.hit_time {
            Some(t) => {
                let _ = writeln!(csv, "{i},{t}");
            }
            None => {
                let _ = writeln!(csv, "{i},");
            }
        }
    }
    dir.write("paths.csv", &csv)?;

    let m = config.paths as f64;
    let mut csv = String::from("t,x,mean,var\n");
    for (ti, t) in times.iter().enumerate() {
        for site in 0..n_sites {
            let mut s = 0.0;
            let mut q = 0.0;
            for rec in &records {
                let v = rec.values[ti][site];
                s += v;
                q += v * v;
            }
            let mean = s / m;
            let var = (q / m - mean * mean).max(0.0);
            let x = fmt_point(&sim.lattice.site_coords(site));
            let _ = writeln!(csv, "{t},{x},{mean},{var}");
        }
    }
    dir.write("snapshots.csv", &csv)?;

    let clip = NoiseGenerator::new(sim.lattice, &sim.noise)?.clip_fraction();
    let manifest = dir.finish(
        "simulate",
        config.echo.clone(),
        Some(config.seed),
        started,
        json!({ "noise_spectrum_clip_fraction": clip }),
    )?;
    Ok(Outcome { manifest, hypothesis_met: true })
}

pub fn moments(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let sim = &config.sim;
    let mut dir = OutDir::new(out)?;
    let mut notes = json!({});

    match config.experiment {
        ExperimentKind::Moments => {
            let probes = ProbeSet {
                points: config.probes.clone(),
                pairs: config.probe_pairs.clone(),
            };
            let series = estimate_moments(
                sim,
                &probes,
                &config.snapshot_times,
                config.paths,
                config.seed,
            )?;
            let mut csv = String::from("t,kind,probe,estimate,stderr,hit_fraction\n");
            for (ti, t) in series.times.iter().enumerate() {
                for (pi, p) in series.points.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{t},second,{},{},{},{}",
                        fmt_point(p),
                        series.second_moment[ti][pi],
                        series.second_stderr[ti][pi],
                        series.hit_fraction[ti]
                    );
                }
                for (pi, (a, b)) in series.pairs.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{t},cross,{}|{},{},{},{}",
                        fmt_point(a),
                        fmt_point(b),
                        series.cross_moment[ti][pi],
                        series.cross_stderr[ti][pi],
                        series.hit_fraction[ti]
                    );
                }
            }
            dir.write("moments.csv", &csv)?;
            let report = detect_blowup_proxy(&series, config.threshold)?;
            dir.write_json("report.json", &json!({ "series": series, "blowup": report }))?;
        }
        ExperimentKind::KappaSweep => {
            let report =
                kappa_sweep(sim, &config.kappas, config.paths, config.seed, config.threshold)?;
            let mut csv = String::from("kappa,t0_hat,hit_fraction_at_end\n");
            for row in &report.rows {
                let t0 = row.t0_hat.map_or(String::new(), |t| t.to_string());
                let _ = writeln!(csv, "{},{t0},{}", row.kappa, row.hit_fraction_at_end);
            }
            dir.write("sweep.csv", &csv)?;
            dir.write_json("report.json", &report)?;
            notes = json!({
                "monotone": report.monotone,
                "bootstrap_confidence": report.bootstrap_confidence,
            });
        }
        ExperimentKind::HorizonSweep => {
            let report =
                horizon_sweep_riesz(sim, &config.horizons, config.paths, config.seed)?;
            let mut csv = String::from("horizon,hit_fraction\n");
            for row in &report.rows {
                let _ = writeln!(csv, "{},{}", row.horizon, row.hit_fraction);
            }
            dir.write("sweep.csv", &csv)?;
            let diagnostic = if let Some((a, b)) = config.probe_pairs.first() {
                Some(riesz_growth_diagnostic(
                    sim,
                    (a, b),
                    &config.snapshot_times,
                    config.paths,
                    config.seed ^ 0xd1a6,
                )?)
            } else {
                None
            };
            dir.write_json(
                "report.json",
                &json!({ "sweep": report, "growth_diagnostic": diagnostic }),
            )?;
        }
        ExperimentKind::Dirichlet => {
            let report = dirichlet_experiment(sim, config.paths, config.seed, config.threshold)?;
            let mut csv = String::from("t,killed_hit_fraction,free_hit_fraction\n");
            for ((t, k), f) in report
                .killed
                .times
                .iter()
                .zip(&report.killed.hit_fraction)
                .zip(&report.free.hit_fraction)
            {
                let _ = writeln!(csv, "{t},{k},{f}");
            }
            dir.write("sweep.csv", &csv)?;
            dir.write_json("report.json", &report)?;
            notes = json!({ "killed_not_earlier": report.killed_not_earlier });
        }
    }

    let manifest = dir.finish("moments", config.echo.clone(), Some(config.seed), started, notes)?;
    Ok(Outcome { manifest, hypothesis_met: true })
}

/// Library-facing dispatch used by both main and the e2e tests.
pub fn run_experiment(
    config: &ExperimentConfig,
    command: &str,
    out: &Path,
) -> Result<Outcome> {
    match command {
        "simulate" => simulate(config, out),
        "moments" => moments(config, out),
        other => Err(Error::domain(format!("config-driven command must be simulate|moments, got {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    #[test]
    fn verify_kernel_writes_expected_columns() {
        let tmp = std::env::temp_dir().join("fracheat_test_vk");
        let args = VerifyKernelArgs {
            alpha: 1.5,
            dim: 1,
            t_min: 0.5,
            t_max: 2.0,
            x_max: 3.0,
            resolution: 4,
            report: "kernel.csv".to_string(),
        };
        let outcome = verify_kernel(&args, &tmp).unwrap();
        assert!(outcome.hypothesis_met);
        let body = std::fs::read_to_string(tmp.join("kernel.csv")).unwrap();
        assert!(body.starts_with("t,x,p,bound_lo,bound_hi,ratio\n"));
        assert_eq!(body.lines().count(), 1 + 4 * 5);
        assert!(tmp.join("run.json").exists(), "manifest written last");
        std::fs::remove_dir_all(&tmp).ok();
    }

    #[test]
    fn renewal_reports_analytic_and_numeric() {
        let tmp = std::env::temp_dir().join("fracheat_test_rn");
        let args = RenewalArgs {
            initial: 2.0,
            forcing: 1.0,
            gamma: 1.0,
            alpha: 2.0,
            horizon: 1.0,
            form: "constant".to_string(),
            mesh: 0.5 / 800.0,
            cap: 1e12,
            trajectory: Some("traj.csv".to_string()),
        };
        renewal(&args, &tmp).unwrap();
        let body = std::fs::read_to_string(tmp.join("renewal.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert!((v["t_star_analytic"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        let rel = v["rel_err"].as_f64().unwrap();
        assert!(rel < 0.02, "rel_err {rel}");
        assert!(tmp.join("traj.csv").exists());
        std::fs::remove_dir_all(&tmp).ok();
    }

    #[test]
    fn simulate_roundtrip_small() {
        let tmp = std::env::temp_dir().join("fracheat_test_sim");
        let cfg = validate_config(
            "kappa=1\nalpha=1.5\nkernel=white\nsigma_form=zero\nn=64\nL=8\n\
             dt=0.01\nt_end=0.1\npaths=4\nseed=7\nsnapshot_times=0.05,0.1\n",
        )
        .unwrap();
        let outcome = simulate(&cfg, &tmp).unwrap();
        assert!(outcome.manifest.artifacts.contains(&"paths.csv".to_string()));
        assert!(outcome.manifest.artifacts.contains(&"snapshots.csv".to_string()));
        let snaps = std::fs::read_to_string(tmp.join("snapshots.csv")).unwrap();
        assert_eq!(snaps.lines().count(), 1 + 2 * 64);
        std::fs::remove_dir_all(&tmp).ok();
    }
}
