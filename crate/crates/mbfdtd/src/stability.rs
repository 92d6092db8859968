//! Von Neumann stability analysis of the generalized (moving-interface)
//! update equations, restricted to 1D (wave and modulation along z).
//!
//! Inserting the test wave `psi = psi0 zeta^n e^(i k_z z)` into the
//! generalized update equations, eliminating the constitutive relations and
//! the one-sided advection stencils, gives a quadratic for the per-step
//! amplification factor zeta:
//!
//! ```text
//!   zeta^2 - 2 b zeta + d = 0,
//!   b = 1 - (A/2)(u_d + u_b) - (2 S^2 / n^2) sin^2(theta/2),
//!   d = (A u_d - 1)(A u_b - 1),
//!   A = beta S (1 - cos theta),
//! ```
//!
//! where `S = c dt / dz`, `theta = k_z dz`, and `(u_d, u_b)` collect the
//! branch factors selected by the signum toggles of the upwinded stencils:
//!
//! ```text
//!   beta >= 0:  u_d = 1,                        u_b = i sin theta - cos theta
//!   beta <  0:  u_d = i sin theta - cos theta - 2,  u_b = cos theta + i sin theta
//! ```
//!
//! Setting zeta = -1 and theta = pi (the marginally stable mode, as in the
//! stationary von Neumann analysis) and solving for S yields the generalized
//! Courant limit
//!
//! ```text
//!   S_max = n / (1 + n |beta|),
//! ```
//!
//! which reduces to the usual S_max = n for beta = 0. The same quadratic,
//! read as a polynomial in S for fixed zeta on the unit circle, is solved by
//! [`solve_s`]. For a 2D grid the spatial bound tightens by sqrt(2) since
//! only the z-stencil is modified by the motion.

use num_complex::Complex64;

/// One evaluated point of the stability analysis.
#[derive(Debug, Clone, Copy)]
pub struct StabilityPoint {
    pub s: f64,
    pub n: f64,
    pub beta: f64,
    /// Normalized spatial frequency k_z dz, radians.
    pub theta_z: f64,
    /// Dominant amplification factor per step.
    pub zeta: Complex64,
    /// Cells per wavelength, 2 pi / theta_z.
    pub n_lambda: f64,
}

/// Branch factors selected by sgn(beta).
fn branch_factors(beta: f64, theta: f64) -> (Complex64, Complex64) {
    let (sin, cos) = theta.sin_cos();
    if beta < 0.0 {
        (Complex64::new(-cos - 2.0, sin), Complex64::new(cos, sin))
    } else {
        (Complex64::new(1.0, 0.0), Complex64::new(-cos, sin))
    }
}

/// Coefficients (b, d) of `zeta^2 - 2 b zeta + d = 0`.
pub fn characteristic_coefficients(
    s: f64,
    n: f64,
    beta: f64,
    theta_z: f64,
) -> (Complex64, Complex64) {
    let (u_d, u_b) = branch_factors(beta, theta_z);
    let a = beta * s * (1.0 - theta_z.cos());
    let sin_half_sq = (0.5 * theta_z).sin().powi(2);
    let b = Complex64::new(1.0 - 2.0 * s * s / (n * n) * sin_half_sq, 0.0)
        - 0.5 * a * (u_d + u_b);
    let d = (a * u_d - 1.0) * (a * u_b - 1.0);
    (b, d)
}

/// The two roots of the characteristic equation, larger |zeta| first.
pub fn characteristic_roots(s: f64, n: f64, beta: f64, theta_z: f64) -> [Complex64; 2] {
    assert!(s > 0.0 && beta.abs() < 1.0);
    let (b, d) = characteristic_coefficients(s, n, beta, theta_z);
    let disc = (b * b - d).sqrt();
    let mut roots = [b + disc, b - disc];
    if roots[1].norm() > roots[0].norm() {
        roots.swap(0, 1);
    }
    roots
}

/// Generalized Courant limit S_max = n / (1 + n |beta|).
pub fn courant_limit(n: f64, beta: f64) -> f64 {
    assert!(n >= 1.0 && beta.abs() < 1.0);
    n / (1.0 + n * beta.abs())
}

/// |zeta| of the dominant root versus cells per wavelength, for the forward
/// (+theta_z) and backward (-theta_z) test waves.
pub fn attenuation_curve(
    n: f64,
    beta: f64,
    s: f64,
    n_lambda_range: impl IntoIterator<Item = f64>,
) -> Vec<(f64, f64, f64)> {
    n_lambda_range
        .into_iter()
        .map(|n_lambda| {
            let theta = 2.0 * std::f64::consts::PI / n_lambda;
            let fwd = characteristic_roots(s, n, beta, theta)[0].norm();
            let bwd = characteristic_roots(s, n, beta, -theta)[0].norm();
            (n_lambda, fwd, bwd)
        })
        .collect()
}

/// Solve the characteristic equation for S at fixed `zeta = e^(i phi)`.
///
/// The quadratic in S reads
///
/// ```text
///   [beta^2 (1-cos t)^2 u_d u_b + (4 zeta / n^2) sin^2(t/2)] S^2
///   + (zeta - 1) beta (1 - cos t)(u_d + u_b) S + (zeta - 1)^2 = 0.
/// ```
pub fn solve_s(zeta_phase: f64, n: f64, beta: f64, theta_z: f64) -> [Complex64; 2] {
    let zeta = Complex64::from_polar(1.0, zeta_phase);
    let (u_d, u_b) = branch_factors(beta, theta_z);
    let one_m_cos = 1.0 - theta_z.cos();
    let sin_half_sq = (0.5 * theta_z).sin().powi(2);

    let c2 = u_d * u_b * (beta * one_m_cos).powi(2)
        + zeta * 4.0 * sin_half_sq / (n * n);
    let c1 = (zeta - 1.0) * beta * one_m_cos * (u_d + u_b);
    let c0 = (zeta - 1.0) * (zeta - 1.0);

    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    let mut roots = [(-c1 + disc) / (2.0 * c2), (-c1 - disc) / (2.0 * c2)];
    if roots[1].norm() > roots[0].norm() {
        roots.swap(0, 1);
    }
    roots
}

/// The admissible (real, positive) root of [`solve_s`], if one exists.
pub fn solve_s_real(zeta_phase: f64, n: f64, beta: f64, theta_z: f64) -> Option<f64> {
    solve_s(zeta_phase, n, beta, theta_z)
        .iter()
        .filter(|r| r.im.abs() < 1e-9 && r.re > 0.0)
        .map(|r| r.re)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
}

/// Evaluate a [`StabilityPoint`] at the dominant root.
pub fn stability_point(s: f64, n: f64, beta: f64, theta_z: f64) -> StabilityPoint {
    let zeta = characteristic_roots(s, n, beta, theta_z)[0];
    StabilityPoint {
        s,
        n,
        beta,
        theta_z,
        zeta,
        n_lambda: 2.0 * std::f64::consts::PI / theta_z,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn stationary_courant_limit_is_marginal() {
        // beta = 0, theta = pi, S = n: the worst mode sits exactly on the
        // unit circle.
        for &n in &[1.0, 1.5, 2.0] {
            let roots = characteristic_roots(n, n, 0.0, PI);
            assert!((roots[0].norm() - 1.0).abs() < 1e-12, "n = {n}: {roots:?}");
        }
    }

    #[test]
    fn fine_mesh_near_unity_at_dynamic_limit() {
        let s = courant_limit(1.5, 0.3);
        let theta = 2.0 * PI / 25.0;
        let z = characteristic_roots(s, 1.5, 0.3, theta)[0].norm();
        assert!((z - 1.0).abs() < 0.05, "|zeta| = {z}");
    }

    #[test]
    fn above_limit_grows() {
        let s = 1.1 * courant_limit(1.5, 0.3);
        let z = characteristic_roots(s, 1.5, 0.3, PI)[0].norm();
        assert!(z > 1.0, "|zeta| = {z}");
    }

    #[test]
    fn courant_limit_values() {
        assert!((courant_limit(1.5, 0.3) - 1.5 / 1.45).abs() < 1e-15);
        assert!((courant_limit(1.5, 0.3) - 1.0344827586206897).abs() < 1e-12);
        for &n in &[1.0, 1.7, 3.0] {
            assert_eq!(courant_limit(n, 0.0), n);
        }
        // n = 1, beta -> 1: limit 0.5.
        assert!((courant_limit(1.0, 1.0 - 1e-12) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn courant_limit_zeta_is_root_both_signs() {
        // zeta = -1, theta = pi must solve the characteristic equation
        // exactly at S = S_max, for either direction of motion.
        for &beta in &[0.0, 0.2, 0.3, -0.2, -0.3, 0.7, -0.7] {
            for &n in &[1.0, 1.5, 2.0] {
                let s = courant_limit(n, beta);
                let (b, d) = characteristic_coefficients(s, n, beta, PI);
                let zeta = Complex64::new(-1.0, 0.0);
                let residual = (zeta * zeta - 2.0 * b * zeta + d).norm();
                assert!(residual < 1e-12, "n={n} beta={beta}: residual {residual}");
            }
        }
    }

    #[test]
    fn stationary_curve_is_flat() {
        let curve = attenuation_curve(1.5, 0.0, 1.5, (3..200).map(|k| k as f64));
        for (nl, fwd, bwd) in curve {
            assert!((fwd - 1.0).abs() < 1e-9, "N_lambda = {nl}: fwd {fwd}");
            assert!((bwd - 1.0).abs() < 1e-9, "N_lambda = {nl}: bwd {bwd}");
        }
    }

    #[test]
    fn coarse_mesh_attenuates_in_dynamic_regime() {
        let s = courant_limit(1.5, 0.3);
        let curve = attenuation_curve(1.5, 0.3, s, [5.0]);
        let (_, fwd, bwd) = curve[0];
        assert!(fwd < 1.0 - 1e-3 || bwd < 1.0 - 1e-3, "fwd {fwd}, bwd {bwd}");
    }

    #[test]
    fn continuum_limit_recovers_unity() {
        let s = courant_limit(1.5, 0.3);
        let curve = attenuation_curve(1.5, 0.3, s, [1e6]);
        let (_, fwd, bwd) = curve[0];
        assert!((fwd - 1.0).abs() < 1e-4 && (bwd - 1.0).abs() < 1e-4);
    }

    #[test]
    fn solve_s_recovers_courant_limit() {
        let s = solve_s_real(PI, 1.5, 0.3, PI).expect("real root");
        assert!((s - 1.0344827586206897).abs() < 1e-9, "S = {s}");
        let s = solve_s_real(PI, 1.5, 0.0, PI).expect("real root");
        assert!((s - 1.5).abs() < 1e-9);
    }

    #[test]
    fn solve_s_round_trip() {
        // Roots of the S-quadratic must put zeta back on the unit circle.
        for &(n, beta, theta) in &[(1.5, 0.3, PI), (2.0, -0.2, 2.0), (1.2, 0.5, 1.0)] {
            for root in solve_s(PI, n, beta, theta) {
                if root.im.abs() < 1e-10 && root.re > 0.0 {
                    let zs = characteristic_roots(root.re, n, beta, theta);
                    let best =
                        zs.iter().map(|z| (z.norm() - 1.0).abs()).fold(f64::INFINITY, f64::min);
                    assert!(best < 1e-9, "n={n} beta={beta}: off circle by {best}");
                }
            }
        }
    }

    proptest! {
        /// Vieta consistency: zeta1 zeta2 = d and zeta1 + zeta2 = 2b.
        #[test]
        fn roots_match_coefficients(
            s in 0.05_f64..2.0,
            n in 1.0_f64..3.0,
            beta in -0.9_f64..0.9,
            theta in 0.05_f64..PI,
        ) {
            let (b, d) = characteristic_coefficients(s, n, beta, theta);
            let [z1, z2] = characteristic_roots(s, n, beta, theta);
            let scale = z1.norm().max(1.0);
            prop_assert!((z1 * z2 - d).norm() <= 1e-12 * scale * scale.max(1.0) * 10.0);
            prop_assert!((z1 + z2 - 2.0 * b).norm() <= 1e-11 * scale);
        }

        /// Inside the stability region the dominant root stays on or inside
        /// the unit circle.
        #[test]
        fn stable_below_courant_limit(
            n in 1.0_f64..2.5,
            beta in -0.8_f64..0.8,
            frac in 0.05_f64..1.0,
            theta in 0.05_f64..PI,
        ) {
            let s = frac * courant_limit(n, beta);
            let z = characteristic_roots(s, n, beta, theta)[0].norm();
            prop_assert!(z <= 1.0 + 1e-9, "S={s} n={n} beta={beta} theta={theta}: |zeta|={z}");
        }
    }
}
