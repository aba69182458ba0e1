//! Operator lab: discretized quantum operators on charts and numerical
//! verification of the commutator identities the dummy factors are built
//! to satisfy.

mod chart;
mod identities;
mod operator;
mod spectral;

pub use chart::{Chart, ChartKind};
pub use identities::{
    broadcast_theta_profile, residual_torus_secondorder, verify_cylinder_identity,
    verify_general_symmetrized, verify_torus_identity, windowed_fourier, AxisWindow, CommutatorEntry,
    CommutatorReport, CylinderVariant, QJet, TorusPdeChoice, TorusQCandidate, WindowSpec, ZeroCandidate,
};
pub use operator::{
    angular_momentum_z_op, commutator, exp_q_op, geometric_momentum_op, hamiltonian_op,
    hermiticity_defect, position_op, GridOperator, GridWavefunction,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfactor::{solve_q, Component, QFactorRequest, SolveOptions};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_4, TAU};
    use std::sync::Arc;

    fn no_window() -> WindowSpec {
        WindowSpec::default()
    }

    #[test]
    fn circle_identity_with_zero_q_is_exact() {
        // the hard-gate identity: q = 0 on the unit circle
        let chart = Chart::circle(1.0, 256, 1.0, 1.0).unwrap();
        let q = vec![0.0; chart.nodes()];
        let ks: Vec<i64> = (-8..=8).collect();
        let report = verify_cylinder_identity(&chart, &q, CylinderVariant::Eq6, &ks, no_window()).unwrap();
        assert!(
            report.max_relative_residual < 1e-10,
            "relative residual {}",
            report.max_relative_residual
        );
    }

    #[test]
    fn straight_line_identity_is_trivially_zero() {
        let curve = crate::surface::PlaneCurve::from_source("0*x", [-4.0, 4.0]).unwrap();
        let chart = Chart::cross_section(&curve, [-3.0, 3.0], 128, 1.0, 1.0).unwrap();
        let q = vec![0.0; chart.nodes()];
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.5, 5.5)), axis1: None };
        for variant in [CylinderVariant::Eq6, CylinderVariant::Eq8] {
            let report = verify_cylinder_identity(&chart, &q, variant, &[1, 3], window).unwrap();
            for e in &report.entries {
                assert!(e.lhs_sup < 1e-10, "lhs {}", e.lhs_sup);
                assert!(e.residual_sup < 1e-10, "residual {}", e.residual_sup);
            }
        }
    }

    #[test]
    fn gauge_shift_leaves_cylinder_residuals_unchanged() {
        let curve = crate::surface::PlaneCurve::from_source("x^2", [-2.0, 2.0]).unwrap();
        let chart = Chart::cross_section(&curve, [0.75, 1.4], 96, 1.0, 1.0).unwrap();
        let len = chart.axis_period(0);
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.08 * len, 0.92 * len)), axis1: None };
        // an arbitrary smooth q field
        let q: Vec<f64> = (0..chart.nodes()).map(|n| 0.3 * (chart.coord0[n] * 2.1).sin()).collect();
        let q_shifted: Vec<f64> = q.iter().map(|v| v + 1.7).collect();
        for variant in [CylinderVariant::Eq6, CylinderVariant::Eq8] {
            let r1 = verify_cylinder_identity(&chart, &q, variant, &[2, 5], window).unwrap();
            let r2 = verify_cylinder_identity(&chart, &q_shifted, variant, &[2, 5], window).unwrap();
            for (a, b) in r1.entries.iter().zip(&r2.entries) {
                let scale = a.residual_sup.abs().max(a.lhs_sup).max(1e-30);
                assert!(
                    (a.residual_sup - b.residual_sup).abs() < 1e-9 * scale,
                    "{variant:?} {}: {} vs {}",
                    a.basis,
                    a.residual_sup,
                    b.residual_sup
                );
            }
        }
    }

    fn torus_q_fields(chart: &Arc<Chart>, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        // solve deq1/deq2 on [lo, hi] and spread over the chart, 0 outside
        let grid: Vec<f64> = chart
            .coord0
            .iter()
            .copied()
            .filter(|&t| t > lo && t < hi)
            .collect();
        let opts = SolveOptions::default();
        let qx = solve_q(
            &QFactorRequest::TorusComponent { a: 3.0, b: 1.0, component: Component::X },
            [lo, hi],
            FRAC_PI_4,
            &grid,
            &opts,
        )
        .unwrap();
        let qz = solve_q(
            &QFactorRequest::TorusComponent { a: 3.0, b: 1.0, component: Component::Z },
            [lo, hi],
            FRAC_PI_4,
            &grid,
            &opts,
        )
        .unwrap();
        let spread = |profile: &crate::qfactor::QFactorProfile| {
            let mut per_theta = vec![0.0; chart.n0];
            let mut gi = 0;
            for (j, &t) in chart.coord0.iter().enumerate() {
                if t > lo && t < hi {
                    per_theta[j] = profile.values[gi];
                    gi += 1;
                }
            }
            broadcast_theta_profile(chart, &per_theta)
        };
        (spread(&qx), spread(&qz))
    }

    #[test]
    fn torus_identity_reports_and_gauge_invariance() {
        let chart = Chart::torus(3.0, 1.0, 48, 24, 1.0, 1.0).unwrap();
        let (lo, hi) = (0.2, 1.35);
        let (q_xy, q_z) = torus_q_fields(&chart, lo, hi);
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.3, 1.2)), axis1: None };
        let modes = [(1i64, 0i64), (0, 2), (2, 1)];
        let r1 = verify_torus_identity(&chart, 1.0, &q_xy, &q_z, &modes, window).unwrap();
        assert_eq!(r1.entries.len(), 9);
        for e in &r1.entries {
            assert!(e.residual_sup.is_finite());
        }
        // constant gauge shift leaves every residual unchanged
        let q_xy_s: Vec<f64> = q_xy.iter().map(|v| v + 1.7).collect();
        let q_z_s: Vec<f64> = q_z.iter().map(|v| v - 0.9).collect();
        let r2 = verify_torus_identity(&chart, 1.0, &q_xy_s, &q_z_s, &modes, window).unwrap();
        for (a, b) in r1.entries.iter().zip(&r2.entries) {
            let scale = a.residual_sup.max(a.lhs_sup).max(1e-30);
            assert!((a.residual_sup - b.residual_sup).abs() < 1e-8 * scale, "{}", a.basis);
        }
    }

    #[test]
    fn torus_identity_is_axisymmetric() {
        // phi-rotated basis functions give identical residuals
        let chart = Chart::torus(3.0, 1.0, 32, 24, 1.0, 1.0).unwrap();
        let q = vec![0.0; chart.nodes()];
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.3, 1.2)), axis1: None };
        let r = verify_torus_identity(&chart, 1.0, &q, &q, &[(1, 2)], window).unwrap();
        // rotate: e^{i m phi} -> e^{i m (phi + c)} is a constant phase per row;
        // residual sup-norms cannot change
        let p_x = geometric_momentum_op(&chart, Component::X);
        let h = hamiltonian_op(&chart);
        let w = window.field(&chart);
        for shift in [0.0, 0.7, 2.1] {
            let psi_values: Vec<Complex64> = (0..chart.nodes())
                .map(|n| {
                    let theta = chart.coord0[n / chart.n1];
                    let phi = chart.coord1[n % chart.n1];
                    Complex64::from_polar(w[n], theta + 2.0 * (phi + shift))
                })
                .collect();
            let psi = GridWavefunction::new(chart.clone(), psi_values).unwrap();
            let lhs = commutator(&p_x, &h, &psi).unwrap();
            let sup = lhs.sup_norm();
            let base = r.entries[0].lhs_sup;
            assert!((sup - base).abs() < 1e-9 * base, "shift {shift}: {sup} vs {base}");
        }
    }

    #[test]
    fn torus_pde_residuals_for_zero_candidate() {
        // third choice with q = 0 leaves exactly the printed inhomogeneous term
        let samples = [(1.0, 0.4), (1.3, 2.0), (0.7, 5.5)];
        let r3 = residual_torus_secondorder(3.0, 1.0, &ZeroCandidate, TorusPdeChoice::Third, &samples).unwrap();
        for (res, &(theta, phi)) in r3.iter().zip(&samples) {
            let (a, b) = (3.0f64, 1.0f64);
            let st = theta.sin();
            let expect = -a / st
                * phi.cos()
                * (6.0 * a * a + 3.0 * b * b + 10.0 * a * b * st + (4.0 * a * a - b * b) * (2.0 * theta).cos()
                    + 6.0 * a * b * (3.0 * theta).sin()
                    - 2.0 * b * b * (4.0 * theta).cos());
            assert!((res - expect).abs() < 1e-10 * expect.abs());
            assert!(res.abs() > 1.0, "inhomogeneous term should be macroscopic");
        }
        // residual / cos(phi) is phi-invariant for phi-independent candidates
        let (theta, c) = (1.1, 0.9);
        let pair = residual_torus_secondorder(
            3.0,
            1.0,
            &ZeroCandidate,
            TorusPdeChoice::First,
            &[(theta, 0.3), (theta, 0.3 + c)],
        )
        .unwrap();
        let ratio = pair[0] / 0.3f64.cos();
        let ratio2 = pair[1] / (0.3 + c).cos();
        assert!((ratio - ratio2).abs() < 1e-9 * ratio.abs());
    }

    #[test]
    fn torus_pde_inhomogeneity_scales_cubically_in_major_radius() {
        // log-log slope of the q = 0 residual against a near theta = pi/2
        let theta = 1.3;
        let phi = 0.3;
        let mut values = Vec::new();
        for a in [1e2, 1e3, 1e4] {
            let r =
                residual_torus_secondorder(a, 1.0, &ZeroCandidate, TorusPdeChoice::Third, &[(theta, phi)]).unwrap();
            values.push(r[0].abs());
        }
        let slope1 = (values[1] / values[0]).log10();
        let slope2 = (values[2] / values[1]).log10();
        assert!((slope1 - 3.0).abs() < 0.05, "slope {slope1}");
        assert!((slope2 - 3.0).abs() < 0.01, "slope {slope2}");
    }

    #[test]
    fn general_symmetrized_on_sphere_patch() {
        let spec = crate::surface::SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1").unwrap();
        let window = WindowSpec {
            axis0: Some(AxisWindow::new(0.35, 1.1)),
            axis1: Some(AxisWindow::new(0.25, 1.32)),
        };
        let modes = [(2i64, 1i64), (1, 3)];
        for n in [48usize, 96] {
            let chart = Chart::sphere(1.0, n, n, 1.0, 1.0).unwrap();
            let q = vec![0.0; chart.nodes()];
            let r = verify_general_symmetrized(&spec, &chart, [&q, &q, &q], &modes, window).unwrap();
            // q = 0 does not satisfy the identity: residuals stay macroscopic
            assert!(r.max_relative_residual > 1e-3, "unexpectedly small: {}", r.max_relative_residual);
        }
        // gauge invariance: constant shift changes nothing
        let chart = Chart::sphere(1.0, 48, 48, 1.0, 1.0).unwrap();
        let q0 = vec![0.0; chart.nodes()];
        let qc = vec![2.4; chart.nodes()];
        let r0 = verify_general_symmetrized(&spec, &chart, [&q0, &q0, &q0], &modes, window).unwrap();
        let rc = verify_general_symmetrized(&spec, &chart, [&qc, &qc, &qc], &modes, window).unwrap();
        for (a, b) in r0.entries.iter().zip(&rc.entries) {
            assert!((a.residual_sup - b.residual_sup).abs() < 1e-9 * a.residual_sup.max(1e-30));
        }
    }

    #[test]
    fn canonical_pair_on_a_line_chart() {
        // [x, p_x] psi = i hbar psi on a horizontal line
        let curve = crate::surface::PlaneCurve::from_source("0*x", [-7.0, 7.0]).unwrap();
        let chart = Chart::cross_section(&curve, [-6.0, 6.0], 256, 1.0, 1.0).unwrap();
        let len = chart.axis_period(0);
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.0, len)), axis1: None };
        let x_op = position_op(&chart, Component::X);
        let p_x = geometric_momentum_op(&chart, Component::X);
        let psi = windowed_fourier(&chart, 3, 0, &window);
        let c = commutator(&x_op, &p_x, &psi).unwrap();
        let mut worst = 0.0f64;
        for (cv, pv) in c.values.iter().zip(&psi.values) {
            worst = worst.max((cv - Complex64::new(0.0, 1.0) * pv).norm());
        }
        assert!(worst < 1e-10 * psi.sup_norm(), "defect {worst}");
    }

    #[test]
    fn classical_limit_recovers_the_force_law() {
        // WKB scaling on the unit circle: [p_x, H]/(i hbar) applied to
        // e^{i k tau} with p0 = hbar k fixed approaches the classical force
        // component as hbar -> 0.
        let n = 512;
        let p0 = 3.0;
        let k0 = 12i64;
        let mut errs = Vec::new();
        for m in 0..3 {
            let k = k0 << m;
            let hbar = p0 / k as f64;
            let chart = Chart::circle(1.0, n, hbar, 1.0).unwrap();
            let p_x = geometric_momentum_op(&chart, Component::X);
            let h = hamiltonian_op(&chart);
            let psi = GridWavefunction::from_fn(&chart, |s, _| Complex64::from_polar(1.0, k as f64 * s));
            let lhs = commutator(&p_x, &h, &psi).unwrap();
            // classical cylinder force component: 2 H_c kappa n_x with kappa = -1
            let hc = p0 * p0 / 2.0;
            let mut worst = 0.0f64;
            for (j, v) in lhs.values.iter().enumerate() {
                let tau = chart.coord0[j];
                let classical = -2.0 * hc * tau.cos();
                let symbol = v / Complex64::new(0.0, hbar) / psi.values[j];
                worst = worst.max((symbol - classical).norm());
            }
            errs.push(worst / (p0 * p0));
        }
        // error shrinks linearly with hbar
        assert!(errs[1] < 0.6 * errs[0], "{errs:?}");
        assert!(errs[2] < 0.6 * errs[1], "{errs:?}");
        assert!(errs[2] < 0.05, "{errs:?}");
    }

    #[test]
    fn cylinder_eq8_residuals_converge_with_resolution() {
        // parabola cross-section with q from the first-order equations
        let curve = crate::surface::PlaneCurve::from_source("x^2", [-2.0, 2.0]).unwrap();
        let (x_lo, x_hi) = (0.75, 1.4);
        let mut reports = Vec::new();
        for n in [96usize, 192] {
            let chart = Chart::cross_section(&curve, [x_lo, x_hi], n, 1.0, 1.0).unwrap();
            let opts = SolveOptions::default();
            let anchor = 1.05;
            let xs: Vec<f64> = chart.position.iter().map(|p| p.x).collect();
            let mut order: Vec<usize> = (0..chart.n0).collect();
            order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
            let grid: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
            let px = solve_q(
                &QFactorRequest::CylinderFirstOrder { curve: curve.clone(), component: Component::X },
                [x_lo - 1e-9, x_hi + 1e-9],
                anchor,
                &grid,
                &opts,
            )
            .unwrap();
            let mut qx = vec![0.0; chart.n0];
            for (rank, &node) in order.iter().enumerate() {
                qx[node] = px.values[rank];
            }
            let len = chart.axis_period(0);
            let window = WindowSpec { axis0: Some(AxisWindow::new(0.06 * len, 0.94 * len)), axis1: None };
            let q_nodes = broadcast_theta_profile(&chart, &qx);
            let r = verify_cylinder_identity(&chart, &q_nodes, CylinderVariant::Eq8, &[2, 4], window).unwrap();
            reports.push(r);
        }
        for r in &reports {
            for e in &r.entries {
                assert!(e.residual_sup.is_finite());
            }
        }
        // refinement does not grow the converged residual
        let coarse = reports[0].max_relative_residual;
        let fine = reports[1].max_relative_residual;
        assert!(fine <= coarse * 1.5 + 1e-12, "coarse {coarse}, fine {fine}");
    }

    #[test]
    fn spectral_mode_differentiation_is_exact_on_chart() {
        let chart = Chart::circle(2.0, 64, 1.0, 1.0).unwrap();
        let psi = windowed_fourier(&chart, 5, 0, &WindowSpec::default());
        let d = GridOperator::differentiate(&chart, 0, 1).apply(&psi).unwrap();
        let k = TAU * 5.0 / chart.axis_period(0);
        for (dv, pv) in d.values.iter().zip(&psi.values) {
            assert!((dv - pv * Complex64::new(0.0, k)).norm() < 1e-12);
        }
    }
}
