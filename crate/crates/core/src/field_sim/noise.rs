//! Gaussian noise increments on the periodic lattice: spatially white, or
//! colored with a translation-invariant correlation kernel via spectral
//! (circulant) factorization. Negative circulant eigenvalues are clipped
//! at zero and the clipped fraction is recorded.

use crate::correlation::{CorrelationKernel, CorrelationVariant};
use crate::error::{Error, Result};
use crate::lattice::{fft_nd, FftPlans, Lattice};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub enum NoiseKind {
    /// Space-time white noise: iid per site, variance dt / h^d.
    White,
    /// White in time, spatially correlated with covariance dt f(x_i, x_j).
    Colored(CorrelationKernel),
}

/// One time-slice increment of the driving noise.
#[derive(Clone, Debug)]
pub struct NoiseIncrement {
    pub values: Vec<f64>,
    pub dt: f64,
}

/// Sampler for repeated increments on a fixed lattice; precomputes the
/// spectral amplitudes once.
pub struct NoiseGenerator {
    lattice: Lattice,
    mode: Mode,
    plans: Option<FftPlans>,
    /// Fraction of spectral mass removed by clipping negative eigenvalues.
    clip_fraction: f64,
}

enum Mode {
    White { site_sd: f64 },
    Colored { amplitude: Vec<f64> },
}

impl NoiseGenerator {
    pub fn new(lattice: Lattice, kind: &NoiseKind) -> Result<Self> {
        match kind {
            NoiseKind::White => Ok(NoiseGenerator {
                lattice,
                mode: Mode::White { site_sd: (1.0 / lattice.cell_volume()).sqrt() },
                plans: None,
                clip_fraction: 0.0,
            }),
            NoiseKind::Colored(kernel) => {
                if kernel.is_white() {
                    return Err(Error::domain(
                        "use NoiseKind::White for white noise".to_string(),
                    ));
                }
                if !kernel.is_translation_invariant() {
                    return Err(Error::unsupported(
                        "no stationary spectral factorization for this kernel; \
                         it is excluded from noise sampling"
                            .to_string(),
                    ));
                }
                if kernel.dim() != lattice.dim() {
                    return Err(Error::domain("kernel dim does not match lattice".to_string()));
                }
                let (amplitude, clip_fraction) = spectral_amplitudes(lattice, kernel)?;
                Ok(NoiseGenerator {
                    lattice,
                    mode: Mode::Colored { amplitude },
                    plans: Some(lattice.plans()),
                    clip_fraction,
                })
            }
        }
    }

    pub fn clip_fraction(&self) -> f64 {
        self.clip_fraction
    }

    /// Draw one increment over `dt`. dt = 0 yields the zero field (and
    /// consumes no randomness).
    pub fn sample(&self, dt: f64, rng: &mut impl Rng) -> Result<NoiseIncrement> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("dt must be >= 0, got {dt}")));
        }
        let n_total = self.lattice.site_count();
        if dt == 0.0 {
            return Ok(NoiseIncrement { values: vec![0.0; n_total], dt });
        }
        let sqrt_dt = dt.sqrt();
        match &self.mode {
            Mode::White { site_sd } => {
                let s = site_sd * sqrt_dt;
                let values = (0..n_total)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(rng);
                        s * g
                    })
                    .collect();
                Ok(NoiseIncrement { values, dt })
            }
            Mode::Colored { amplitude } => {
                // X = Re(IFFT(sqrt(lambda) zeta)) / sqrt(n), zeta = a + i b
                // with a, b standard normal, gives covariance c exactly
                // (up to the clipped part of the spectrum).
                let mut buf: Vec<Complex64> = amplitude
                    .iter()
                    .map(|&s| {
                        let a: f64 = StandardNormal.sample(rng);
                        let b: f64 = StandardNormal.sample(rng);
                        Complex64::new(s * a, s * b)
                    })
                    .collect();
                let plans = self.plans.as_ref().expect("colored mode has plans");
                fft_nd(&self.lattice, &mut buf, &plans.inverse);
                let scale = sqrt_dt / (n_total as f64).sqrt();
                let values = buf.iter().map(|c| c.re * scale).collect();
                Ok(NoiseIncrement { values, dt })
            }
        }
    }
}

/// sqrt of the circulant eigenvalues of the covariance sampled on the
/// periodic lattice, negatives clipped; returns (amplitudes, clip fraction).
fn spectral_amplitudes(lattice: Lattice, kernel: &CorrelationKernel) -> Result<(Vec<f64>, f64)> {
    let n_total = lattice.site_count();
    let mut cov: Vec<Complex64> = Vec::with_capacity(n_total);
    for idx in 0..n_total {
        let delta = lattice.periodic_displacement(idx);
        let value = if delta.iter().all(|&c| c == 0.0) {
            regularized_diagonal(lattice, kernel)?
        } else {
            kernel.eval_displacement(&delta)?
        };
        cov.push(Complex64::new(value, 0.0));
    }
    let plans = lattice.plans();
    fft_nd(&lattice, &mut cov, &plans.forward);
    let mut clipped = 0.0;
    let mut total = 0.0;
    let amplitude: Vec<f64> = cov
        .iter()
        .map(|c| {
            let lam = c.re;
            total += lam.abs();
            if lam < 0.0 {
                clipped += -lam;
                0.0
            } else {
                lam.sqrt()
            }
        })
        .collect();
    let clip_fraction = if total > 0.0 { clipped / total } else { 0.0 };
    Ok((amplitude, clip_fraction))
}

/// Variance assigned to the zero displacement. Kernels that are finite at
/// coincidence use f(0); the Riesz kernel is cell-averaged (over the ball
/// of cell volume, where the average is closed-form), which is the natural
/// variance of a cell-sampled singular field.
fn regularized_diagonal(lattice: Lattice, kernel: &CorrelationKernel) -> Result<f64> {
    match kernel.variant() {
        CorrelationVariant::Riesz { beta } => {
            let d = lattice.dim() as f64;
            let h = lattice.spacing();
            let rho = match lattice.dim() {
                1 => h / 2.0,
                2 => h / std::f64::consts::PI.sqrt(),
                _ => h * (3.0 / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0),
            };
            Ok(d / (d - beta) * rho.powf(-beta))
        }
        _ => kernel.eval_displacement(&vec![0.0; lattice.dim()]),
    }
}
