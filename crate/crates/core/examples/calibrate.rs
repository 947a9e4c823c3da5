//! Offline calibration runs for the acceptance-scale experiments; prints
//! the measured quantities so grid sizes and tolerances can be pinned.

use fracheat_core::field_sim::{Domain, InitialData, NoiseKind, SigmaSpec, SimConfig};
use fracheat_core::lattice::Lattice;
use fracheat_core::moments::*;
use fracheat_core::correlation::{CorrelationKernel, CorrelationVariant};
use fracheat_core::StableKernelSpec;
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".to_string());

    if which == "kappa" || which == "all" {
        let t0 = Instant::now();
        let base = SimConfig {
            spec: StableKernelSpec::new(1.5, 1).unwrap(),
            sigma: SigmaSpec::pure_power(1.0).unwrap(),
            noise: NoiseKind::White,
            lattice: Lattice::new(1, 8.0, 512).unwrap(),
            initial: InitialData::Constant { level: 1.0 },
            dt: 1e-3,
            t_end: 1.0,
            trunc_level: 160.0,
            domain: Domain::Free,
        };
        let report = kappa_sweep(&base, &[1.0, 4.0, 16.0], 200, 11, 0.5).unwrap();
        println!("kappa sweep ({} paths): {:?}", 200, t0.elapsed());
        for row in &report.rows {
            println!(
                "  kappa={} t0_hat={:?} frac_end={:.3}",
                row.kappa, row.t0_hat, row.hit_fraction_at_end
            );
        }
        println!("  monotone={} boot={:.3}", report.monotone, report.bootstrap_confidence);
    }

    if which == "riesz" || which == "all" {
        let t0 = Instant::now();
        let kernel = CorrelationKernel::new(CorrelationVariant::Riesz { beta: 0.5 }, 1).unwrap();
        let base = SimConfig {
            spec: StableKernelSpec::new(1.5, 1).unwrap(),
            sigma: SigmaSpec::pure_power(1.0).unwrap(),
            noise: NoiseKind::Colored(kernel),
            lattice: Lattice::new(1, 8.0, 512).unwrap(),
            initial: InitialData::Constant { level: 0.5 },
            dt: 2e-3,
            t_end: 2.5,
            trunc_level: 5.0,
            domain: Domain::Free,
        };
        let times: Vec<f64> = (0..6).map(|i| 0.25 * (10.0_f64).powf(i as f64 / 5.0)).collect();
        let x = vec![0.0];
        let y = vec![0.3125];
        let diag = riesz_growth_diagnostic(&base, (&x, &y), &times, 500, 7).unwrap();
        println!("riesz diagnostic (500 paths): {:?}", t0.elapsed());
        for ((t, c), e) in diag.times.iter().zip(&diag.cross_moment).zip(&diag.excess) {
            println!("  t={t:.3} cross={c:.5} excess={e:.5}");
        }
        println!("  slope={:.4} target={:.4}", diag.slope, diag.target_slope);
    }

    if which == "linear" || which == "all" {
        let t0 = Instant::now();
        let base = SimConfig {
            spec: StableKernelSpec::new(2.0, 1).unwrap(),
            sigma: SigmaSpec::linear(1.0).unwrap(),
            noise: NoiseKind::White,
            lattice: Lattice::new(1, 4.0, 512).unwrap(),
            initial: InitialData::Constant { level: 1.0 },
            dt: 1e-3,
            t_end: 0.5,
            trunc_level: 1e6,
            domain: Domain::Free,
        };
        let times = [0.1, 0.2, 0.3, 0.4, 0.5];
        let probes = ProbeSet { points: vec![vec![0.0]], pairs: vec![] };
        let series = estimate_moments(&base, &probes, &times, 2000, 3).unwrap();
        let oracle = linear_moment_oracle(1.0, base.spec, 1.0, &times).unwrap();
        println!("linear cross-validation (2000 paths): {:?}", t0.elapsed());
        for (i, t) in times.iter().enumerate() {
            let m = series.second_moment[i][0];
            let se = series.second_stderr[i][0];
            let o = oracle[i];
            println!(
                "  t={t}: mc={m:.5} +-{se:.5} oracle={o:.5} dev={:.2} se",
                (m - o).abs() / se
            );
        }
    }

    if which == "dirichlet" || which == "all" {
        let t0 = Instant::now();
        let base = SimConfig {
            spec: StableKernelSpec::new(1.5, 1).unwrap(),
            sigma: SigmaSpec::pure_power(1.0).unwrap(),
            noise: NoiseKind::White,
            lattice: Lattice::new(1, 8.0, 512).unwrap(),
            initial: InitialData::BallIndicator { level: 8.0, radius: 1.0 },
            dt: 1e-3,
            t_end: 1.0,
            trunc_level: 80.0,
            domain: Domain::Ball { radius: 1.0 },
        };
        let report = dirichlet_experiment(&base, 200, 5, 0.5).unwrap();
        println!("dirichlet experiment (200 paths): {:?}", t0.elapsed());
        println!(
            "  killed t0={:?} free t0={:?} ok={}",
            report.killed.t0_hat, report.free.t0_hat, report.killed_not_earlier
        );
    }
}
