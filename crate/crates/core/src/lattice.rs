//! Periodic lattice standing in for R^d, plus the scalar fields living on
//! it and the d-dimensional FFT plumbing used for spectral convolution.
//!
//! The lattice covers [-L, L)^d with n sites per axis (n a power of two so
//! every spectral operation is a radix-2 transform), spacing h = 2L/n, and
//! Fourier frequencies xi_k = pi k / L in the usual signed FFT ordering.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lattice {
    dim: usize,
    half_width: f64,
    n: usize,
}

impl Lattice {
    /// A periodic lattice on [-L, L)^d with `n` sites per axis.
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::domain(format!("dim must be 1..=3, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::domain(format!("half_width must be > 0, got {half_width}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::domain(format!("n must be a power of two >= 2, got {n}")));
        }
        Ok(Lattice { dim, half_width, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Sites per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice spacing h = 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Total number of sites, n^d.
    pub fn site_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate along one axis for axis-index `i`: -L + i h.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + self.spacing() * i as f64
    }

    /// Full coordinates of the site with flat (row-major) index `idx`.
    pub fn site_coords(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut rem = idx;
        for ax in (0..self.dim).rev() {
            out[ax] = self.axis_coord(rem % self.n);
            rem /= self.n;
        }
        out
    }

    /// Flat index of the site nearest to `x` (coordinates folded periodically).
    pub fn nearest_site(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::domain(format!(
                "point has {} coordinates, lattice dim is {}",
                x.len(),
                self.dim
            )));
        }
        let mut idx = 0usize;
        for &c in x {
            let span = 2.0 * self.half_width;
            let folded = (c + self.half_width).rem_euclid(span);
            let i = (folded / self.spacing()).round() as usize % self.n;
            idx = idx * self.n + i;
        }
        Ok(idx)
    }

    /// Whether `x` coincides with a lattice site up to `tol`.
    pub fn is_on_lattice(&self, x: &[f64], tol: f64) -> bool {
        match self.nearest_site(x) {
            Ok(idx) => {
                let s = self.site_coords(idx);
                s.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol)
            }
            Err(_) => false,
        }
    }

    /// Signed frequency for axis-index `k`: xi = pi k' / L with
    /// k' = k for k <= n/2 and k - n beyond.
    pub fn frequency(&self, k: usize) -> f64 {
        let k_signed = if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        };
        PI * k_signed / self.half_width
    }

    /// |xi|^2 at the flattened spectral index.
    pub fn freq_norm_sq(&self, idx: usize) -> f64 {
        let mut rem = idx;
        let mut s = 0.0;
        for _ in 0..self.dim {
            let f = self.frequency(rem % self.n);
            s += f * f;
            rem /= self.n;
        }
        s
    }

    /// Minimal-image displacement vector for the flattened offset index.
    pub fn periodic_displacement(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut rem = idx;
        for ax in (0..self.dim).rev() {
            let m = rem % self.n;
            rem /= self.n;
            let signed = if m <= self.n / 2 {
                m as f64
            } else {
                m as f64 - self.n as f64
            };
            out[ax] = signed * self.spacing();
        }
        out
    }

    /// Forward/inverse FFT plans shared by the spectral operators.
    pub(crate) fn plans(&self) -> FftPlans {
        let mut planner = FftPlanner::new();
        FftPlans {
            forward: planner.plan_fft_forward(self.n),
            inverse: planner.plan_fft_inverse(self.n),
        }
    }
}

#[derive(Clone)]
pub(crate) struct FftPlans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

/// In-place d-dimensional transform of a flattened row-major buffer,
/// applied axis by axis. `plan` must match the per-axis length.
pub(crate) fn fft_nd(lattice: &Lattice, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
    let n = lattice.n();
    let d = lattice.dim();
    debug_assert_eq!(buf.len(), lattice.site_count());
    if d == 1 {
        plan.process(buf);
        return;
    }
    let total = buf.len();
    let mut line = vec![Complex64::default(); n];
    // stride of axis `ax` in row-major order is n^(d-1-ax)
    for ax in 0..d {
        let stride = n.pow((d - 1 - ax) as u32);
        let block = stride * n;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                for (j, item) in line.iter_mut().enumerate() {
                    *item = buf[base + off + j * stride];
                }
                plan.process(&mut line);
                for (j, item) in line.iter().enumerate() {
                    buf[base + off + j * stride] = *item;
                }
            }
        }
    }
}

/// A real-valued field sampled on a lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarField {
    lattice: Lattice,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.site_count() {
            return Err(Error::domain(format!(
                "field has {} values, lattice has {} sites",
                values.len(),
                lattice.site_count()
            )));
        }
        Ok(ScalarField { lattice, values })
    }

    pub fn constant(lattice: Lattice, level: f64) -> Self {
        let count = lattice.site_count();
        ScalarField { lattice, values: vec![level; count] }
    }

    /// `level` inside the closed ball B(0, radius), zero outside.
    pub fn ball_indicator(lattice: Lattice, level: f64, radius: f64) -> Self {
        let count = lattice.site_count();
        let values = (0..count)
            .map(|i| {
                let x = lattice.site_coords(i);
                if norm(&x) <= radius {
                    level
                } else {
                    0.0
                }
            })
            .collect();
        ScalarField { lattice, values }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Lattice approximation of the integral over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.lattice.cell_volume()
    }

    /// Lattice approximation of the integral over the closed ball B(0, R).
    pub fn integral_over_ball(&self, radius: f64) -> f64 {
        let mut s = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            if norm(&self.lattice.site_coords(i)) <= radius {
                s += v;
            }
        }
        s * self.lattice.cell_volume()
    }

    /// Minimum value over sites in the closed ball B(0, R).
    pub fn min_over_ball(&self, radius: f64) -> Option<f64> {
        let mut min: Option<f64> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if norm(&self.lattice.site_coords(i)) <= radius {
                min = Some(min.map_or(v, |m: f64| m.min(v)));
            }
        }
        min
    }

    pub fn value_at_site(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_counts() {
        let l = Lattice::new(1, 16.0, 512).unwrap();
        assert_eq!(l.spacing(), 0.0625);
        assert_eq!(l.site_count(), 512);
        let l2 = Lattice::new(2, 8.0, 128).unwrap();
        assert_eq!(l2.spacing(), 0.125);
        assert_eq!(l2.site_count(), 128 * 128);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Lattice::new(1, 16.0, 100).is_err());
        assert!(Lattice::new(1, 16.0, 0).is_err());
        assert!(Lattice::new(4, 16.0, 64).is_err());
    }

    #[test]
    fn nearest_site_roundtrip() {
        let l = Lattice::new(2, 4.0, 64).unwrap();
        for idx in [0usize, 17, 63, 64, 4095] {
            let x = l.site_coords(idx);
            assert_eq!(l.nearest_site(&x).unwrap(), idx);
            assert!(l.is_on_lattice(&x, 1e-12));
        }
        assert!(!l.is_on_lattice(&[0.01, 0.0], 1e-12));
    }

    #[test]
    fn frequencies_signed_ordering() {
        let l = Lattice::new(1, 4.0, 8).unwrap();
        let f: Vec<f64> = (0..8).map(|k| l.frequency(k)).collect();
        let q = PI / 4.0;
        let want = [0.0, q, 2.0 * q, 3.0 * q, 4.0 * q, -3.0 * q, -2.0 * q, -q];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fft_roundtrip_2d() {
        let l = Lattice::new(2, 2.0, 8).unwrap();
        let plans = l.plans();
        let orig: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64).sin(), 0.0))
            .collect();
        let mut buf = orig.clone();
        fft_nd(&l, &mut buf, &plans.forward);
        fft_nd(&l, &mut buf, &plans.inverse);
        let scale = 1.0 / 64.0;
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a.re * scale - b.re).abs() < 1e-12);
            assert!((a.im * scale).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_indicator_mass() {
        let l = Lattice::new(1, 4.0, 256).unwrap();
        let f = ScalarField::ball_indicator(l, 2.0, 1.0);
        // 2 * kappa * R with kappa = 2, R = 1, up to one cell
        assert!((f.integral() - 4.0).abs() < 2.0 * l.spacing() * 2.0);
        assert_eq!(f.integral(), f.integral_over_ball(1.0));
    }
}
