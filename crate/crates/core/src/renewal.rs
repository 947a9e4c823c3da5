//! Nonlinear renewal inequalities g >= A + B int g^{1+gamma} k: closed-form
//! blow-up times and thresholds of the comparison ODEs, the exponent
//! reduction, and a weakly-singular Volterra solver (product integration,
//! exact on the singular factor) used as an independent numerical oracle.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum KernelForm {
    /// k(t, s) = (t - s)^{-1/alpha}, integrated from 0; needs alpha > 1.
    SingularDifference,
    /// k(t, s) = s^{-(1+gamma)/alpha}, integrated from 1 with g(1) = A.
    PowerState,
    /// k = T^{-1/alpha}, the horizon-frozen reduction of the singular kernel.
    Constant,
}

/// The (A, B, gamma, alpha, T) data of one renewal inequality.
///
/// gamma = 0 is admitted (the linear Volterra equation used as the moment
/// oracle); the closed-form blow-up formulas themselves require gamma > 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RenewalProblem {
    pub initial: f64,
    pub forcing: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub form: KernelForm,
}

impl RenewalProblem {
    pub fn new(
        initial: f64,
        forcing: f64,
        gamma: f64,
        alpha: f64,
        horizon: f64,
        form: KernelForm,
    ) -> Result<Self> {
        if !(initial >= 0.0 && initial.is_finite()) {
            return Err(Error::domain(format!("initial level must be >= 0, got {initial}")));
        }
        if !(forcing >= 0.0 && forcing.is_finite()) {
            return Err(Error::domain(format!("forcing must be >= 0, got {forcing}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!("alpha must be in (0, 2], got {alpha}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon must be > 0, got {horizon}")));
        }
        if form == KernelForm::SingularDifference && alpha <= 1.0 {
            return Err(Error::domain(
                "(t-s)^{-1/alpha} is not integrable for alpha <= 1".to_string(),
            ));
        }
        if form == KernelForm::PowerState && horizon <= 1.0 {
            return Err(Error::domain(
                "the power-state form runs on [1, T]; need T > 1".to_string(),
            ));
        }
        Ok(RenewalProblem { initial, forcing, gamma, alpha, horizon, form })
    }

    /// Whether (1 + gamma)/alpha < 1 (the power-state subcritical window).
    pub fn power_state_subcritical(&self) -> bool {
        (1.0 + self.gamma) / self.alpha < 1.0
    }
}

/// Blow-up time of the comparison ODE for the horizon-frozen kernel:
/// t* = T^{1/alpha} / (A^gamma B gamma). Values beyond T mean "no blow-up
/// certified within the horizon" (the inequality constrains only t <= T).
pub fn blowup_time_singular(a: f64, b: f64, gamma: f64, alpha: f64, horizon: f64) -> Result<f64> {
    for (name, v) in [("A", a), ("B", b), ("gamma", gamma), ("alpha", alpha), ("T", horizon)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(horizon.powf(1.0 / alpha) / (a.powf(gamma) * b * gamma))
}

/// Initial-level threshold A_0 = (T^{1/alpha} / (B gamma t0))^{1/gamma}:
/// every A > A_0 gives blowup_time_singular(A, ...) <= t0.
pub fn threshold_a0(b: f64, gamma: f64, alpha: f64, horizon: f64, t0: f64) -> Result<f64> {
    for (name, v) in [("B", b), ("gamma", gamma), ("alpha", alpha), ("T", horizon), ("t0", t0)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    if t0 > horizon {
        return Err(Error::domain(format!("t0 must be <= T, got t0={t0}, T={horizon}")));
    }
    Ok((horizon.powf(1.0 / alpha) / (b * gamma * t0)).powf(1.0 / gamma))
}

/// Blow-up time of h'/h^{1+gamma} = B t^{-(1+gamma)/alpha}, h(1) = A, in the
/// subcritical window p = (1+gamma)/alpha < 1:
/// t* = (1 + (1-p)/(gamma B A^gamma))^{1/(1-p)}, always finite and > 1.
pub fn blowup_time_power(a: f64, b: f64, gamma: f64, alpha: f64) -> Result<f64> {
    for (name, v) in [("A", a), ("B", b), ("gamma", gamma), ("alpha", alpha)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let p = (1.0 + gamma) / alpha;
    if p >= 1.0 {
        return Err(Error::domain(format!(
            "(1+gamma)/alpha = {p:.4} >= 1; reduce the exponent first (reduce_exponent)"
        )));
    }
    Ok((1.0 + (1.0 - p) / (gamma * b * a.powf(gamma))).powf(1.0 / (1.0 - p)))
}

/// Split gamma = gamma0 + (gamma - gamma0) with (1 + gamma0)/alpha < 1,
/// using g > A to trade the excess exponent for forcing:
/// returns (gamma0, B-multiplier A^{gamma - gamma0}).
///
/// gamma0 is fixed deterministically to (alpha - 1)/2 (clipped to (0, gamma]);
/// when the problem is already subcritical the reduction is the identity.
pub fn reduce_exponent(gamma: f64, a: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("A must be > 0, got {a}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be > 0, got {gamma}")));
    }
    if alpha <= 1.0 {
        return Err(Error::domain(format!(
            "alpha = {alpha} <= 1 leaves no gamma0 > 0 with (1+gamma0)/alpha < 1"
        )));
    }
    if (1.0 + gamma) / alpha < 1.0 {
        return Ok((gamma, 1.0));
    }
    let gamma0 = (alpha - 1.0) / 2.0;
    debug_assert!(gamma0 < gamma && (1.0 + gamma0) / alpha < 1.0);
    Ok((gamma0, a.powf(gamma - gamma0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SolveMethod {
    Analytic,
    Numeric,
}

/// A solved renewal problem: the detected blow-up time (None when the
/// trajectory stayed under the cap through the horizon) and, for numeric
/// solves, the trajectory itself.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupSolution {
    pub t_star: Option<f64>,
    pub trajectory: Option<Vec<(f64, f64)>>,
    pub method: SolveMethod,
}

impl BlowupSolution {
    /// Linear interpolation on the stored trajectory.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let traj = self.trajectory.as_ref()?;
        if traj.is_empty() || t < traj[0].0 || t > traj[traj.len() - 1].0 {
            return None;
        }
        let idx = traj.partition_point(|&(s, _)| s < t);
        if idx == 0 {
            return Some(traj[0].1);
        }
        if idx == traj.len() {
            return Some(traj[traj.len() - 1].1);
        }
        let (t0, v0) = traj[idx - 1];
        let (t1, v1) = traj[idx];
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        Some(v0 * (1.0 - w) + v1 * w)
    }
}

/// Solve g = A + B int g(s)^{1+gamma} k ds as an equality by explicit
/// product integration over [start, problem.horizon]: g is frozen per
/// cell, the kernel factor is integrated exactly over each cell. Blow-up
/// is declared at the first mesh time where g exceeds `cap`, and confirmed
/// by re-solving at half the mesh (Richardson check); disagreement is an
/// accuracy error. The reported solution is the refined one.
pub fn solve_volterra_numeric(
    problem: &RenewalProblem,
    mesh: f64,
    cap: f64,
) -> Result<BlowupSolution> {
    solve_volterra_numeric_to(problem, mesh, cap, problem.horizon)
}

/// Same solver with an explicit integration window `t_max`, which may
/// exceed the problem horizon: the horizon then only parameterizes the
/// kernel (its T^{-1/alpha} value), and callers are responsible for
/// flagging detections past the horizon as uncertified.
pub fn solve_volterra_numeric_to(
    problem: &RenewalProblem,
    mesh: f64,
    cap: f64,
    t_max: f64,
) -> Result<BlowupSolution> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(Error::domain(format!("mesh must be > 0, got {mesh}")));
    }
    if !(cap >= 1e12) {
        return Err(Error::domain(format!("cap must be >= 1e12, got {cap}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!("t_max must be > 0, got {t_max}")));
    }
    let coarse = solve_on_mesh(problem, mesh, cap, t_max);
    let fine = solve_on_mesh(problem, mesh / 2.0, cap, t_max);
    match (coarse.0, fine.0) {
        (Some(tc), Some(tf)) => {
            let tol = (2.0 * mesh / 2.0).max(0.05 * tf);
            if (tc - tf).abs() > tol {
                return Err(Error::accuracy(format!(
                    "Richardson check failed: t* = {tc:.6} at mesh {mesh} vs {tf:.6} at mesh/2"
                )));
            }
        }
        (None, Some(tf)) | (Some(tf), None) => {
            // tolerated only when the single detection sits at the window edge
            if t_max - tf > 3.0 * mesh {
                return Err(Error::accuracy(format!(
                    "Richardson check failed: blow-up at {tf:.6} seen at one mesh only"
                )));
            }
        }
        (None, None) => {}
    }
    Ok(BlowupSolution { t_star: fine.0, trajectory: Some(fine.1), method: SolveMethod::Numeric })
}

fn solve_on_mesh(
    problem: &RenewalProblem,
    mesh: f64,
    cap: f64,
    t_max: f64,
) -> (Option<f64>, Vec<(f64, f64)>) {
    let t_start = match problem.form {
        KernelForm::PowerState => 1.0,
        _ => 0.0,
    };
    let n = ((t_max - t_start) / mesh).ceil() as usize;
    let a = problem.initial;
    let b = problem.forcing;
    let one_over_alpha = 1.0 / problem.alpha;
    let q = 1.0 - one_over_alpha;

    let times: Vec<f64> = (0..=n).map(|i| t_start + mesh * i as f64).collect();
    let mut g = Vec::with_capacity(n + 1);
    let mut powed = Vec::with_capacity(n + 1);
    g.push(a);
    powed.push(a.powf(1.0 + problem.gamma));

    let mut t_star = None;
    // constant kernels admit an O(1) running sum per step
    let mut const_running = 0.0;
    for i in 1..=n {
        let ti = times[i];
        let mut sum = 0.0;
        match problem.form {
            KernelForm::Constant => {
                let w = mesh * problem.horizon.powf(-one_over_alpha);
                const_running += powed[i - 1] * w;
                sum = const_running;
            }
            KernelForm::SingularDifference => {
                // int_{t_j}^{t_{j+1}} (t_i - s)^{-1/alpha} ds, exact
                for (j, p) in powed.iter().enumerate().take(i) {
                    let hi = ti - times[j];
                    let lo = ti - times[j + 1];
                    let w = (hi.powf(q) - lo.powf(q)) / q;
                    sum += p * w;
                }
            }
            KernelForm::PowerState => {
                let p_exp = (1.0 + problem.gamma) / problem.alpha;
                let qq = 1.0 - p_exp;
                for (j, p) in powed.iter().enumerate().take(i) {
                    let w = (times[j + 1].powf(qq) - times[j].powf(qq)) / qq;
                    sum += p * w;
                }
            }
        }
        let gi = a + b * sum;
        if !gi.is_finite() || gi > cap {
            t_star = Some(ti);
            g.push(gi.min(f64::MAX));
            break;
        }
        powed.push(gi.powf(1.0 + problem.gamma));
        g.push(gi);
    }

    // decimate long trajectories so reports stay small enough to store
    let stride = (g.len() / 2048).max(1);
    let traj: Vec<(f64, f64)> = g
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == g.len() - 1)
        .map(|(i, &v)| (times[i], v))
        .collect();
    (t_star, traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn singular_blowup_formula() {
        assert_abs_diff_eq!(blowup_time_singular(1.0, 1.0, 1.0, 2.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(blowup_time_singular(2.0, 1.0, 1.0, 2.0, 1.0).unwrap(), 0.5);
        // monotone limit: blow-up time vanishes as A grows
        let big = blowup_time_singular(1e9, 1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(big < 1e-8);
        assert!(blowup_time_singular(0.0, 1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn threshold_formula_and_consistency() {
        assert_abs_diff_eq!(threshold_a0(1.0, 1.0, 2.0, 1.0, 0.5).unwrap(), 2.0);
        assert_abs_diff_eq!(threshold_a0(1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(threshold_a0(1.0, 1.0, 2.0, 1.0, 1.5).is_err(), "t0 > T rejected");
        // A slightly above the threshold blows up before t0
        let a0 = threshold_a0(1.0, 0.7, 1.6, 2.0, 0.4).unwrap();
        let t = blowup_time_singular(1.01 * a0, 1.0, 0.7, 1.6, 2.0).unwrap();
        assert!(t < 0.4, "t={t}");
    }

    #[test]
    fn power_blowup_formula() {
        // p = 0.75: (1 + 0.25/0.5)^4 = 1.5^4 = 5.0625
        let t = blowup_time_power(1.0, 1.0, 0.5, 2.0).unwrap();
        assert_abs_diff_eq!(t, 5.0625, epsilon = 1e-12);
        assert!(t > 1.0);
        // A -> infinity pushes t* toward 1+
        assert!(blowup_time_power(1e12, 1.0, 0.5, 2.0).unwrap() < 1.0 + 1e-4);
        // B -> 0 removes the forcing
        assert!(blowup_time_power(1.0, 1e-12, 0.5, 2.0).unwrap() > 1e10);
        // supercritical exponent is rejected
        assert!(blowup_time_power(1.0, 1.0, 1.5, 2.0).is_err());
    }

    #[test]
    fn exponent_reduction() {
        let (g0, mult) = reduce_exponent(2.0, 3.0, 2.0).unwrap();
        assert_abs_diff_eq!(g0, 0.5);
        assert_abs_diff_eq!(mult, 3.0_f64.powf(1.5), epsilon = 1e-12);
        assert!((1.0 + g0) / 2.0 < 1.0);

        // already subcritical: identity
        let (g0, mult) = reduce_exponent(0.5, 3.0, 2.0).unwrap();
        assert_abs_diff_eq!(g0, 0.5);
        assert_abs_diff_eq!(mult, 1.0);

        assert!(reduce_exponent(2.0, 3.0, 1.0).is_err(), "alpha = 1 admits no gamma0");
    }

    #[test]
    fn numeric_constant_kernel_matches_formula() {
        // g = A + (B/T^{1/alpha}) int g^2, A=2: t* = 0.5
        let p = RenewalProblem::new(2.0, 1.0, 1.0, 2.0, 1.0, KernelForm::Constant).unwrap();
        let sol = solve_volterra_numeric(&p, 0.5 / 800.0, 1e12).unwrap();
        let t = sol.t_star.expect("must blow up");
        assert!((t - 0.5).abs() / 0.5 < 0.02, "t={t}");
    }

    #[test]
    fn numeric_window_can_extend_past_horizon() {
        // A = 1, gamma = 0.5: t* = 2 lies beyond the kernel horizon T = 1
        let p = RenewalProblem::new(1.0, 1.0, 0.5, 2.0, 1.0, KernelForm::Constant).unwrap();
        let within = solve_volterra_numeric(&p, 2.0 / 800.0, 1e12).unwrap();
        assert!(within.t_star.is_none(), "not reached inside [0, T]");
        let extended = solve_volterra_numeric_to(&p, 2.0 / 800.0, 1e12, 3.0).unwrap();
        let t = extended.t_star.expect("blows up at 2");
        assert!((t - 2.0).abs() / 2.0 < 0.02, "t={t}");
    }

    #[test]
    fn numeric_linear_case_is_exponential() {
        // gamma = 0: g(t) = A exp(B t / T^{1/alpha}), no blow-up
        let p = RenewalProblem::new(2.0, 1.0, 0.0, 2.0, 1.0, KernelForm::Constant).unwrap();
        let sol = solve_volterra_numeric(&p, 1e-4, 1e12).unwrap();
        assert!(sol.t_star.is_none());
        for &t in &[0.25, 0.5, 0.9] {
            let got = sol.value_at(t).unwrap();
            let want = 2.0 * (t * 1.0 / 1.0_f64).exp();
            assert!((got - want).abs() / want < 5e-3, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn numeric_zero_initial_stays_zero() {
        let p = RenewalProblem::new(0.0, 1.0, 1.0, 2.0, 1.0, KernelForm::Constant).unwrap();
        let sol = solve_volterra_numeric(&p, 1e-3, 1e12).unwrap();
        assert!(sol.t_star.is_none());
        assert_eq!(sol.value_at(0.5).unwrap(), 0.0);
    }

    #[test]
    fn singular_kernel_dominates_constant_kernel() {
        // (t-s)^{-1/alpha} >= T^{-1/alpha} on [0, T]: the singular-kernel
        // trajectory dominates pointwise and blows up no later
        let mesh = 1e-3;
        let sing =
            RenewalProblem::new(1.0, 0.2, 1.0, 1.5, 4.0, KernelForm::SingularDifference).unwrap();
        let cons = RenewalProblem::new(1.0, 0.2, 1.0, 1.5, 4.0, KernelForm::Constant).unwrap();
        let s_sol = solve_volterra_numeric(&sing, mesh, 1e12).unwrap();
        let c_sol = solve_volterra_numeric_to(&cons, mesh, 1e12, 16.0).unwrap();
        let ts = s_sol.t_star.expect("singular kernel blows up near 0.24");
        let tc = c_sol.t_star.expect("constant kernel blows up near 12.6");
        assert!(ts <= tc + mesh, "singular {ts} vs constant {tc}");
        for &t in &[0.05, 0.1, 0.2] {
            let gs = s_sol.value_at(t).unwrap();
            let gc = c_sol.value_at(t).unwrap();
            assert!(gs >= gc - 1e-12, "trajectory order at t={t}: {gs} < {gc}");
        }
    }

    #[test]
    fn comparison_principle_in_initial_level() {
        let mesh = 1e-3;
        let lo = RenewalProblem::new(1.0, 0.1, 1.0, 1.5, 0.4, KernelForm::SingularDifference)
            .unwrap();
        let hi = RenewalProblem::new(1.5, 0.1, 1.0, 1.5, 0.4, KernelForm::SingularDifference)
            .unwrap();
        let a = solve_volterra_numeric(&lo, mesh, 1e12).unwrap();
        let b = solve_volterra_numeric(&hi, mesh, 1e12).unwrap();
        let ta = a.trajectory.unwrap();
        let tb = b.trajectory.unwrap();
        for (&(t1, v1), &(t2, v2)) in ta.iter().zip(&tb) {
            assert_eq!(t1, t2);
            assert!(v1 <= v2 + 1e-12, "comparison failed at t={t1}: {v1} > {v2}");
        }
    }

    #[test]
    fn power_state_numeric_matches_closed_form() {
        let t_star = blowup_time_power(1.0, 1.0, 0.5, 2.0).unwrap(); // 5.0625
        let p = RenewalProblem::new(1.0, 1.0, 0.5, 2.0, 8.0, KernelForm::PowerState).unwrap();
        let sol = solve_volterra_numeric(&p, 2e-3, 1e12).unwrap();
        let t = sol.t_star.expect("subcritical power kernel blows up");
        assert!((t - t_star).abs() / t_star < 0.02, "numeric {t} vs analytic {t_star}");
    }

    #[test]
    fn richards_check_spots_mesh_dependence() {
        // a mesh far too coarse for the blow-up time must be rejected
        let p = RenewalProblem::new(8.0, 4.0, 2.0, 2.0, 1.0, KernelForm::Constant).unwrap();
        // analytic t* = 1/(8^2*4*2) tiny; mesh 0.25 cannot see it coherently
        assert!(solve_volterra_numeric(&p, 0.25, 1e12).is_err());
    }

    proptest! {
        // t* strictly decreasing in A, B, gamma (within the formula domain)
        #[test]
        fn singular_time_monotone(a in 1.0f64..8.0, b in 0.2f64..4.0, g in 0.3f64..3.0) {
            let base = blowup_time_singular(a, b, g, 1.5, 1.0).unwrap();
            prop_assert!(blowup_time_singular(a * 1.1, b, g, 1.5, 1.0).unwrap() < base);
            prop_assert!(blowup_time_singular(a, b * 1.1, g, 1.5, 1.0).unwrap() < base);
            // gamma-monotonicity needs A > 1 so A^gamma grows with gamma
            prop_assert!(blowup_time_singular(a.max(1.01), b, g + 0.1, 1.5, 1.0).unwrap()
                < blowup_time_singular(a.max(1.01), b, g, 1.5, 1.0).unwrap());
        }
    }
}
