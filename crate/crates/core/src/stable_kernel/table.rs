//! Tabulated standard density for hot loops (killed-path smoothing,
//! correlation quadratures), where millions of kernel values are needed at
//! modest accuracy. Linear interpolation on a two-resolution grid, exact
//! tail handoff to the series-backed evaluator.

use super::density::std_density;
use crate::error::Result;

const HEAD_END: f64 = 2.0;
const HEAD_STEP: f64 = 5e-4;
const MID_END: f64 = 64.0;
const MID_STEP: f64 = 5e-3;

/// Lookup table for the standardized density of one (alpha, dim) pair.
/// Interpolation error is a few 1e-9 absolute; callers needing certified
/// accuracy use `eval_kernel` directly.
pub struct DensityTable {
    alpha: f64,
    dim: usize,
    head: Vec<f64>,
    mid: Vec<f64>,
}

impl DensityTable {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        let n_head = (HEAD_END / HEAD_STEP) as usize + 2;
        let head = (0..n_head)
            .map(|i| std_density(alpha, dim, i as f64 * HEAD_STEP))
            .collect::<Result<Vec<_>>>()?;
        let n_mid = ((MID_END - HEAD_END) / MID_STEP) as usize + 2;
        let mid = (0..n_mid)
            .map(|i| std_density(alpha, dim, HEAD_END + i as f64 * MID_STEP))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityTable { alpha, dim, head, mid })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Space scale t^{1/alpha} of the tabulated law.
    pub fn alpha_scale(&self, t: f64) -> f64 {
        t.powf(1.0 / self.alpha)
    }

    /// Standardized density at radius z >= 0.
    pub fn std_at(&self, z: f64) -> f64 {
        if z < HEAD_END {
            lerp(&self.head, z / HEAD_STEP)
        } else if z < MID_END {
            lerp(&self.mid, (z - HEAD_END) / MID_STEP)
        } else {
            // deep tail: series converges in a handful of terms
            std_density(self.alpha, self.dim, z).unwrap_or(0.0)
        }
    }

    /// p_t at radius r, via self-similar rescaling of the table.
    pub fn at(&self, t: f64, r: f64) -> f64 {
        let scale = t.powf(1.0 / self.alpha);
        self.std_at(r / scale) * scale.powi(-(self.dim as i32))
    }
}

fn lerp(table: &[f64], pos: f64) -> f64 {
    let i = pos as usize;
    let frac = pos - i as f64;
    table[i] * (1.0 - frac) + table[i + 1] * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_tracks_direct_evaluation() {
        let table = DensityTable::new(1.5, 1).unwrap();
        for &z in &[0.0, 0.317, 1.9991, 2.0, 7.77, 63.2, 100.0] {
            let want = std_density(1.5, 1, z).unwrap();
            let got = table.std_at(z);
            assert!(
                (got - want).abs() < 2e-8,
                "z={z}: table {got:.12e} vs direct {want:.12e}"
            );
        }
    }

    #[test]
    fn rescaling_matches_eval_kernel() {
        let spec = crate::stable_kernel::StableKernelSpec::new(1.5, 1).unwrap();
        let table = DensityTable::new(1.5, 1).unwrap();
        for &(t, r) in &[(0.01, 0.05), (0.5, 1.0), (2.0, 10.0)] {
            let want = crate::stable_kernel::eval_kernel_radial(spec, t, r).unwrap();
            let got = table.at(t, r);
            assert!((got - want).abs() <= 1e-6 * want.max(1e-9), "t={t} r={r}");
        }
    }
}
