//! The deterministic semigroup u0 -> integral p_t(x-y) u0(y) dy, realized
//! as spectral multiplication by exp(-t |xi|^alpha) on the periodic
//! lattice, plus the short-time lower-bound check it supports.

use super::{kernel_at_origin, StableKernelSpec};
use crate::error::{Error, Result};
use crate::lattice::{fft_nd, FftPlans, Lattice, ScalarField};
use rustfft::num_complex::Complex64;

/// Precomputed spectral multiplier for one (lattice, alpha, t) triple.
/// Cheap to build, reusable across many applications (e.g. every step of a
/// fixed-dt simulation); safe to share across threads.
pub struct Propagator {
    lattice: Lattice,
    symbol: Vec<f64>,
    plans: FftPlans,
}

impl Propagator {
    pub fn new(lattice: Lattice, spec: StableKernelSpec, t: f64) -> Result<Self> {
        if spec.dim() != lattice.dim() {
            return Err(Error::domain(format!(
                "spec dim {} does not match lattice dim {}",
                spec.dim(),
                lattice.dim()
            )));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::domain(format!("t must be > 0, got {t}")));
        }
        let half = spec.alpha() / 2.0;
        let symbol = (0..lattice.site_count())
            .map(|i| (-t * lattice.freq_norm_sq(i).powf(half)).exp())
            .collect();
        Ok(Propagator { lattice, symbol, plans: lattice.plans() })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Apply the semigroup without sign constraints; exact spectral
    /// linearity, suitable for signed fields (SPDE states, linear algebra).
    pub fn apply_linear(&self, field: &ScalarField) -> Result<ScalarField> {
        if field.lattice() != self.lattice {
            return Err(Error::domain("field lattice does not match propagator".to_string()));
        }
        let n_total = self.lattice.site_count();
        let mut buf: Vec<Complex64> = field
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft_nd(&self.lattice, &mut buf, &self.plans.forward);
        for (b, &s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        fft_nd(&self.lattice, &mut buf, &self.plans.inverse);
        let scale = 1.0 / n_total as f64;
        let values = buf.iter().map(|c| c.re * scale).collect();
        ScalarField::from_values(self.lattice, values)
    }

    /// Apply the semigroup to a nonnegative field, clipping the small
    /// negative excursions produced by spectral ringing; the clipped mass
    /// (integral of the removed negative part) is reported.
    pub fn apply(&self, field: &ScalarField) -> Result<(ScalarField, f64)> {
        let mut out = self.apply_linear(field)?;
        let mut clip = 0.0;
        for v in out.values_mut() {
            if *v < 0.0 {
                clip -= *v;
                *v = 0.0;
            }
        }
        Ok((out, clip * self.lattice.cell_volume()))
    }
}

/// Result of one deterministic smoothing step.
#[derive(Clone, Debug)]
pub struct SmoothedField {
    pub field: ScalarField,
    /// Mass removed by clipping spectral ringing at zero.
    pub clip_mass: f64,
}

/// (G u)_t on the lattice: spectral convolution of `u0` with p_t. `u0`
/// must be finite and nonnegative; output is clipped at zero with the clip
/// mass recorded.
pub fn apply_semigroup(spec: StableKernelSpec, t: f64, u0: &ScalarField) -> Result<SmoothedField> {
    if !u0.is_finite() {
        return Err(Error::domain("u0 must be finite".to_string()));
    }
    if !u0.is_nonnegative() {
        return Err(Error::domain("u0 must be nonnegative".to_string()));
    }
    let prop = Propagator::new(u0.lattice(), spec, t)?;
    let (field, clip_mass) = prop.apply(u0)?;
    Ok(SmoothedField { field, clip_mass })
}

/// Min over x in B(0,1) and t in `ts` of (G u)_{t + t0}(x) / K_{u0}, where
/// K_{u0} is the initial mass on the unit ball. Requires p_{t0}(0) < 1
/// (the construction's hypothesis) and K_{u0} > 0.
pub fn deterministic_lower_bound_check(
    spec: StableKernelSpec,
    u0: &ScalarField,
    t0: f64,
    ts: &[f64],
) -> Result<f64> {
    if ts.is_empty() {
        return Err(Error::domain("need at least one time".to_string()));
    }
    if ts.iter().any(|&t| !(t > 0.0 && t <= t0)) {
        return Err(Error::domain("every t must lie in (0, t0]".to_string()));
    }
    if kernel_at_origin(spec, t0)? >= 1.0 {
        return Err(Error::hypothesis(format!(
            "p_t0(0) >= 1 at t0={t0}; pick t0 large enough that p_t0(0) < 1"
        )));
    }
    let k_u0 = u0.integral_over_ball(1.0);
    if !(k_u0 > 0.0) {
        return Err(Error::domain(
            "initial mass on B(0,1) must be positive (Assumption on u0 violated)".to_string(),
        ));
    }
    let mut worst = f64::INFINITY;
    for &t in ts {
        let smoothed = apply_semigroup(spec, t + t0, u0)?;
        let min = smoothed
            .field
            .min_over_ball(1.0)
            .ok_or_else(|| Error::domain("lattice has no site in B(0,1)".to_string()))?;
        worst = worst.min(min / k_u0);
    }
    Ok(worst)
}
