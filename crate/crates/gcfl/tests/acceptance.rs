//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured value. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use gcfl::dynamics::{
    gcfl_cylinder, gcfl_general_components, gcfl_generic, gcfl_quadric, gcfl_torus_form,
    integrate_constrained, sampling, verify_force_along_trajectory, ClassicalState, TorusForm,
};
use gcfl::math::Vec3;
use gcfl::oplab::{
    geometric_momentum_op, hamiltonian_op, hermiticity_defect, verify_cylinder_identity,
    verify_torus_identity, windowed_fourier, AxisWindow, Chart, CylinderVariant, WindowSpec,
};
use gcfl::qfactor::{
    closed_form_q_derivative, linspace, residual_quadratic_cylinder, rhs_first_order_cylinder,
    rhs_torus, solve_q, verify_closed_forms, ClosedFormCase, Component, EquationId, QFactorRequest,
    SolveOptions,
};
use gcfl::surface::{
    curvature_fd_oracle, torus_gaussian_curvature, PlaneCurve, QuadricParams, SurfaceSpec,
};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::Instant;

fn criterion(id: u32, name: &str, pass: bool, detail: &str) {
    println!("acceptance {id:02} ({name}): {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn surfaces_under_test() -> Vec<(&'static str, SurfaceSpec)> {
    vec![
        ("unit-sphere", SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1").unwrap()),
        ("torus-3-1", SurfaceSpec::torus(3.0, 1.0).unwrap()),
        (
            "ellipsoid-1-2-3",
            SurfaceSpec::quadric(QuadricParams {
                a: 1.0,
                b: 2.0,
                c: 3.0,
                alpha: 1,
                beta: 1,
                gamma: 1,
                delta: 1,
            })
            .unwrap(),
        ),
        (
            "parabola-cylinder",
            SurfaceSpec::cylinder(PlaneCurve::from_source("x^2", [-1.5, 1.5]).unwrap()).unwrap(),
        ),
        (
            "sine-cylinder",
            SurfaceSpec::cylinder(PlaneCurve::from_source("sin(x)", [0.3, 2.8]).unwrap()).unwrap(),
        ),
        (
            "circle-cylinder",
            SurfaceSpec::cylinder(PlaneCurve::from_source("sqrt(1 - x^2)", [-0.9, 0.9]).unwrap())
                .unwrap(),
        ),
    ]
}

#[test]
fn acceptance_01_curvature_oracle_agreement() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for (name, spec) in surfaces_under_test() {
        let mut rng = sampling::seeded_rng(1001);
        for i in 0..100 {
            let x = sampling::random_surface_point(&spec, &mut rng).unwrap();
            let bundle = spec.curvature_bundle(x).unwrap();
            let h = 1e-4 * (1.0 + x.norm());
            let (om, ok) = curvature_fd_oracle(&spec, x, h).unwrap();
            for (est, exact) in [(om.abs(), bundle.mean.abs()), (ok, bundle.gauss)] {
                let err = (est - exact).abs();
                let bound = (1e-5 * exact.abs()).max(1e-8);
                let score = err / bound;
                if score > worst {
                    worst = score;
                    worst_at = format!("{name} sample {i}");
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < 1.0 && elapsed < 10.0;
    criterion(
        1,
        "curvature oracle agreement",
        pass,
        &format!("worst error = {worst:.3}x the bound at {worst_at}; {elapsed:.2} s"),
    );
}

#[test]
fn acceptance_02_torus_k_spot_value() {
    let k_formula = torus_gaussian_curvature(3.0, 1.0, FRAC_PI_2);
    let spec = SurfaceSpec::torus(3.0, 1.0).unwrap();
    let (_, k_oracle) = curvature_fd_oracle(&spec, Vec3::new(4.0, 0.0, 0.0), 1e-4).unwrap();
    let pass = k_formula == 0.25 && (k_oracle - 0.25).abs() < 1e-6;
    criterion(
        2,
        "torus K spot value",
        pass,
        &format!("formula K(pi/2) = {k_formula} (exact), oracle = {k_oracle}"),
    );
}

#[test]
fn acceptance_03_force_form_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut at = String::new();
    let mut track = |name: &str, a: Vec3, b: Vec3| {
        let scale = a.norm().max(b.norm()).max(1e-12);
        let d = (a - b).norm() / scale;
        if d > worst {
            worst = d;
            at = name.to_string();
        }
    };

    // torus: three RHS forms and the generic law, pairwise
    let mut rng = sampling::seeded_rng(2002);
    let spec = SurfaceSpec::torus(3.0, 1.0).unwrap();
    for _ in 0..100 {
        let state = sampling::random_torus_state(3.0, 1.0, 1.0, (0.1, 0.9), &mut rng);
        let forces = [
            gcfl_generic(&spec, &state).unwrap().force,
            gcfl_torus_form(TorusForm::Form1, 3.0, 1.0, &state).unwrap().force,
            gcfl_torus_form(TorusForm::Form2, 3.0, 1.0, &state).unwrap().force,
            gcfl_torus_form(TorusForm::Form3, 3.0, 1.0, &state).unwrap().force,
        ];
        for i in 0..4 {
            for j in i + 1..4 {
                track("torus", forces[i], forces[j]);
            }
        }
    }

    // cylinders: eq4 against eq2
    use rand::Rng;
    for (name, src, dom) in [
        ("parabola", "x^2", [-1.5f64, 1.5f64]),
        ("sine", "sin(x)", [0.3, 2.8]),
        ("circle", "sqrt(1 - x^2)", [-0.9, 0.9]),
    ] {
        let curve = PlaneCurve::from_source(src, dom).unwrap();
        let spec = SurfaceSpec::cylinder(curve.clone()).unwrap();
        for _ in 0..100 {
            let span = dom[1] - dom[0];
            let x = rng.gen_range(dom[0] + 0.05 * span..dom[1] - 0.05 * span);
            let jets = curve.jets(x).unwrap();
            let t = Vec3::new(1.0, jets.up, 0.0) / jets.g;
            let state = ClassicalState::new(
                Vec3::new(x, jets.u, 0.0),
                t * rng.gen_range(0.2..1.5),
                1.0,
            );
            track(
                name,
                gcfl_generic(&spec, &state).unwrap().force,
                gcfl_cylinder(&curve, &state).unwrap().force,
            );
        }
    }

    // quadrics: compact form against eq2 on a sphere and the ellipsoid
    for (name, q) in [
        ("sphere-quadric", QuadricParams { a: 2.0, b: 2.0, c: 2.0, alpha: 1, beta: 1, gamma: 1, delta: 1 }),
        ("ellipsoid", QuadricParams { a: 1.0, b: 2.0, c: 3.0, alpha: 1, beta: 1, gamma: 1, delta: 1 }),
    ] {
        let spec = SurfaceSpec::quadric(q).unwrap();
        for _ in 0..100 {
            let state = sampling::random_state(&spec, 1.0, &mut rng).unwrap();
            track(
                name,
                gcfl_generic(&spec, &state).unwrap().force,
                gcfl_quadric(&q, &state).unwrap().force,
            );
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < 1e-8 && elapsed < 10.0;
    criterion(
        3,
        "force form equivalence",
        pass,
        &format!("max pairwise relative deviation = {worst:.3e} ({at}); {elapsed:.2} s"),
    );
}

#[test]
fn acceptance_04_trajectory_oracle() {
    let mut detail = String::new();
    let mut pass = true;
    for (name, spec, x0, p0) in [
        (
            "sphere",
            SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1").unwrap(),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
        ),
        (
            "torus",
            SurfaceSpec::torus(3.0, 1.0).unwrap(),
            Vec3::new(4.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ),
    ] {
        let state = ClassicalState::new(x0, p0, 1.0);
        let traj = integrate_constrained(&spec, state, 1e-3, 10_000).unwrap();
        let report = verify_force_along_trajectory(&traj, &spec).unwrap();
        let drift = traj.relative_energy_drift();
        let residual = traj.max_constraint_residual();
        let ok = report.max_relative_deviation < 1e-3 && drift < 1e-8 && residual < 1e-9;
        pass &= ok;
        detail.push_str(&format!(
            "{name}: dp/dt dev {:.2e}, drift {:.2e}, max|f| {:.2e}; ",
            report.max_relative_deviation, drift, residual
        ));
    }
    criterion(4, "trajectory oracle", pass, detail.trim_end());
}

#[test]
fn acceptance_05_general_equation_calibration() {
    // gate: on a sphere the measured ratio equals mu |grad f|
    let spec = SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1.69").unwrap();
    let mu = 1.0;
    let mut rng = sampling::seeded_rng(3003);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let state = sampling::random_state_generic_safe(&spec, mu, 0.1, &mut rng).unwrap();
        let gen = gcfl_general_components(&spec, &state).unwrap();
        let expect = mu * spec.gradient(state.x).unwrap().norm();
        worst = worst.max((gen.ratio_to_generic - expect).abs());
    }

    // report: ellipsoid ratio table published, values documented but not gated
    let dir = std::env::temp_dir().join(format!("gcfl-acceptance-05-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = gcfl::cli::RunConfig {
        spec_path: dir.join("ellipsoid.toml"),
        out_dir: dir.clone(),
        seed: 7,
        grid: 64,
        tol: 1e-10,
        command: gcfl::cli::CommandKind::Force,
        dt: 1e-3,
        steps: 100,
        x0: None,
        p0: None,
        domain: None,
    };
    std::fs::write(
        &config.spec_path,
        "[surface]\nkind = \"quadric\"\na = 1\nb = 2\nc = 3\nalpha = 1\nbeta = 1\ngamma = 1\ndelta = 1\n",
    )
    .unwrap();
    gcfl::cli::run(&config).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("force.json")).unwrap()).unwrap();
    let table_rows = report["gen_calibration"]["rows"].as_array().map(|r| r.len()).unwrap_or(0);
    std::fs::remove_dir_all(&dir).ok();

    let pass = worst < 1e-8 && table_rows > 0;
    criterion(
        5,
        "componentwise-law calibration",
        pass,
        &format!("sphere max |ratio - mu|grad f|| = {worst:.3e}; ellipsoid table rows published = {table_rows}"),
    );
}

#[test]
fn acceptance_06_dummy_factor_harness() {
    // flat plane: every residual exactly zero
    let mut plane_exact = true;
    for component in [Component::X, Component::Y] {
        for rep in verify_closed_forms(ClosedFormCase::Plane, component, &linspace(-1.0, 1.0, 11)).unwrap()
        {
            plane_exact &= rep.max_abs_residual == 0.0;
        }
        let curve = ClosedFormCase::Plane.curve();
        plane_exact &= residual_quadratic_cylinder(&curve, 0.0, 0.3, component).unwrap() == 0.0;
    }

    // parabola discrepancy: closed-form derivative 1 vs printed rhs 5500/(1848 sqrt 5)
    let curve = ClosedFormCase::Parabola.curve();
    let rhs = rhs_first_order_cylinder(&curve, 1.0, Component::X).unwrap();
    let expect_rhs = 5500.0 / (1848.0 * 5f64.sqrt());
    let derivative = closed_form_q_derivative(ClosedFormCase::Parabola, Component::X, 1.0).unwrap();
    let discrepancy_reproduced =
        (rhs - expect_rhs).abs() < 1e-12 && (derivative - 1.0).abs() < 1e-14 && (rhs / derivative - 1.331).abs() < 1e-3;
    // and it shows up as a nonzero reported residual
    let reports = verify_closed_forms(ClosedFormCase::Parabola, Component::X, &[1.0]).unwrap();
    let recorded = reports
        .iter()
        .find(|r| r.equation == EquationId::First101)
        .map(|r| r.max_abs_residual > 1e-3)
        .unwrap_or(false);

    // torus deq1 singular at pi/2 with inhomogeneous term 244
    let err = rhs_torus(3.0, 1.0, FRAC_PI_2, Component::X).unwrap_err();
    let singular_detected = matches!(
        &err,
        gcfl::Error::SingularEquation { detail, .. } if detail.contains("244")
    );

    let pass = plane_exact && discrepancy_reproduced && recorded && singular_detected;
    criterion(
        6,
        "dummy-factor harness",
        pass,
        &format!(
            "plane exact = {plane_exact}; parabola rhs = {rhs:.6} vs derivative = {derivative:.4} (ratio {:.4}); deq1 singularity detail = {singular_detected}",
            rhs / derivative
        ),
    );
}

#[test]
fn acceptance_07_torus_profile_reproduction() {
    let domain = [0.15, 1.40];
    let grid = linspace(domain[0], domain[1], 200);
    let solve = |component, rtol| {
        solve_q(
            &QFactorRequest::TorusComponent { a: 3.0, b: 1.0, component },
            domain,
            FRAC_PI_4,
            &grid,
            &SolveOptions { rtol, atol: rtol * 1e-2, singular_margin: 0.05 },
        )
        .unwrap()
    };
    let qx = solve(Component::X, 1e-10);
    let qy = solve(Component::Y, 1e-10);
    let qz = solve(Component::Z, 1e-10);
    let bitwise = qx
        .values
        .iter()
        .zip(&qy.values)
        .all(|(a, b)| a.to_bits() == b.to_bits());

    let qz_tight = solve(Component::Z, 1e-12);
    let qx_tight = solve(Component::X, 1e-12);
    let conv = qz
        .values
        .iter()
        .zip(&qz_tight.values)
        .chain(qx.values.iter().zip(&qx_tight.values))
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));

    let svg = gcfl::cli::profile_plot_svg(&qx, &qz);
    let svg_ok = svg.matches("<polyline").count() == 2 && svg.contains("stroke-dasharray");

    let pass = bitwise && conv < 1e-8 && svg_ok;
    criterion(
        7,
        "torus profile reproduction",
        pass,
        &format!("q_x == q_y bitwise = {bitwise}; tolerance self-convergence = {conv:.3e}; two-curve svg = {svg_ok}"),
    );
}

#[test]
fn acceptance_08_circle_identity_hard_gate() {
    let start = Instant::now();
    let chart = Chart::circle(1.0, 256, 1.0, 1.0).unwrap();
    let q = vec![0.0; chart.nodes()];
    let ks: Vec<i64> = (-8..=8).collect();
    let report =
        verify_cylinder_identity(&chart, &q, CylinderVariant::Eq6, &ks, WindowSpec::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = report.max_relative_residual < 1e-10 && elapsed < 5.0;
    criterion(
        8,
        "circle identity",
        pass,
        &format!(
            "max relative sup-norm residual = {:.3e} over k <= 8 on 256 nodes; {elapsed:.2} s",
            report.max_relative_residual
        ),
    );
}

#[test]
fn acceptance_09_hermiticity_and_gauge_invariance() {
    // hermiticity on the circle and torus charts
    let mut worst_defect = 0.0f64;
    {
        let chart = Chart::circle(1.0, 256, 1.0, 1.0).unwrap();
        let basis: Vec<_> = (-4i64..=4).map(|k| windowed_fourier(&chart, k, 0, &WindowSpec::default())).collect();
        for op in [
            geometric_momentum_op(&chart, Component::X),
            geometric_momentum_op(&chart, Component::Y),
            hamiltonian_op(&chart),
        ] {
            worst_defect = worst_defect.max(hermiticity_defect(&op, &basis).unwrap());
        }
    }
    {
        let chart = Chart::torus(3.0, 1.0, 64, 32, 1.0, 1.0).unwrap();
        let basis: Vec<_> = [(0i64, 1i64), (1, 0), (2, 3), (-3, 2)]
            .into_iter()
            .map(|(k, m)| windowed_fourier(&chart, k, m, &WindowSpec::default()))
            .collect();
        for comp in [Component::X, Component::Y, Component::Z] {
            worst_defect =
                worst_defect.max(hermiticity_defect(&geometric_momentum_op(&chart, comp), &basis).unwrap());
        }
        worst_defect = worst_defect.max(hermiticity_defect(&hamiltonian_op(&chart), &basis).unwrap());
    }

    // gauge invariance of the e^{±q} constructions under q -> q + const
    let mut worst_gauge = 0.0f64;
    {
        let curve = PlaneCurve::from_source("x^2", [-2.0, 2.0]).unwrap();
        let chart = Chart::cross_section(&curve, [0.75, 1.4], 128, 1.0, 1.0).unwrap();
        let len = chart.axis_period(0);
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.06 * len, 0.94 * len)), axis1: None };
        let q: Vec<f64> = (0..chart.nodes()).map(|n| 0.4 * (2.3 * chart.coord0[n]).cos()).collect();
        let q_shift: Vec<f64> = q.iter().map(|v| v + 1.7).collect();
        for variant in [CylinderVariant::Eq6, CylinderVariant::Eq8] {
            let r1 = verify_cylinder_identity(&chart, &q, variant, &[2, 5], window).unwrap();
            let r2 = verify_cylinder_identity(&chart, &q_shift, variant, &[2, 5], window).unwrap();
            for (a, b) in r1.entries.iter().zip(&r2.entries) {
                let scale = a.residual_sup.max(a.lhs_sup).max(1e-30);
                worst_gauge = worst_gauge.max((a.residual_sup - b.residual_sup).abs() / scale);
            }
        }
    }
    {
        let chart = Chart::torus(3.0, 1.0, 64, 32, 1.0, 1.0).unwrap();
        let window = WindowSpec { axis0: Some(AxisWindow::new(0.3, 1.2)), axis1: None };
        let q: Vec<f64> = (0..chart.nodes())
            .map(|n| 0.2 * (chart.coord0[n / chart.n1]).sin())
            .collect();
        let q_shift: Vec<f64> = q.iter().map(|v| v - 0.8).collect();
        let r1 = verify_torus_identity(&chart, 1.0, &q, &q, &[(1, 0), (0, 2)], window).unwrap();
        let r2 = verify_torus_identity(&chart, 1.0, &q_shift, &q_shift, &[(1, 0), (0, 2)], window).unwrap();
        for (a, b) in r1.entries.iter().zip(&r2.entries) {
            let scale = a.residual_sup.max(a.lhs_sup).max(1e-30);
            worst_gauge = worst_gauge.max((a.residual_sup - b.residual_sup).abs() / scale);
        }
    }

    let pass = worst_defect < 1e-10 && worst_gauge < 1e-8;
    criterion(
        9,
        "hermiticity and gauge invariance",
        pass,
        &format!("max hermiticity defect = {worst_defect:.3e}; max gauge-shift residual change = {worst_gauge:.3e}"),
    );
}

#[test]
fn acceptance_10_verify_determinism() {
    let bin = env!("CARGO_BIN_EXE_gcfl");
    let dir = std::env::temp_dir().join(format!("gcfl-acceptance-10-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec_path = dir.join("torus.toml");
    std::fs::write(&spec_path, "[surface]\nkind = \"torus\"\na = 3\nb = 1\n").unwrap();

    let mut bodies = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("run-{run}"));
        let status = std::process::Command::new(bin)
            .args([
                "--spec",
                spec_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "42",
                "--command",
                "verify",
            ])
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "verify run {run} failed");
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
        v["meta"]
            .as_object_mut()
            .unwrap()
            .remove("generated_at_unix_ms");
        bodies.push(serde_json::to_string(&v).unwrap());
    }
    std::fs::remove_dir_all(&dir).ok();
    let pass = bodies[0] == bodies[1];
    criterion(
        10,
        "verify determinism",
        pass,
        &format!("byte-identical after timestamp removal = {pass} ({} bytes)", bodies[0].len()),
    );
}
