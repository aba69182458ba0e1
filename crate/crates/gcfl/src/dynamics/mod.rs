//! Classical dynamics of free motion constrained to f(x) = 0: the force law
//! dp/dt = -n (p . grad n . p)/mu and its specialized forms for cylinders,
//! tori and quadrics, cross-validated against each other and against a
//! constraint-projecting trajectory integrator.

mod rattle;
pub mod sampling;

pub use rattle::{integrate_constrained, verify_force_along_trajectory, Trajectory, TrajectoryForceReport};

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::surface::{
    quadric_gaussian_curvature, torus_gaussian_curvature, torus_normal, PlaneCurve, QuadricParams,
    SurfaceSpec,
};
use serde::Serialize;

/// Position, momentum and mass of a particle on the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub x: Vec3,
    pub p: Vec3,
    pub mu: f64,
}

impl ClassicalState {
    pub fn new(x: Vec3, p: Vec3, mu: f64) -> Self {
        ClassicalState { x, p, mu }
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.p.norm_sq() / (2.0 * self.mu)
    }

    /// Check the surface-membership and tangency invariants.
    pub fn validate(&self, spec: &SurfaceSpec) -> Result<()> {
        spec.check_on_surface(self.x)?;
        let n = spec.unit_normal_unchecked(self.x)?;
        let t = n.dot(self.p).abs();
        let tol = 1e-9 * (1.0 + self.p.norm());
        if t > tol {
            return Err(Error::Domain(format!(
                "momentum not tangent: |n.p| = {t:.3e} exceeds {tol:.3e}"
            )));
        }
        Ok(())
    }
}

/// Which evaluator produced a force sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceForm {
    Generic,
    Cylinder,
    TorusForm1,
    TorusForm2,
    TorusForm3,
    QuadricCompact,
    GeneralComponents,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub force: Vec3,
    /// Scalar coefficient along the unit normal (force = normal_component * n).
    pub normal_component: f64,
    pub form_id: ForceForm,
}

/// Select a torus right-hand-side form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusForm {
    /// -n (b^3 K^3 L_z^2 / mu + p_z^2/(mu b)) / sin^2(theta)
    Form1,
    /// -n K b (a p_z^2 / (mu b sin^3 theta) + p^2/mu)
    Form2,
    /// -n K b (a p_z^2 / (mu b sin^3 theta) + 2 H_c)
    Form3,
}

/// Remove the normal component of p at x.
pub fn project_tangent(spec: &SurfaceSpec, x: Vec3, p: Vec3) -> Result<Vec3> {
    spec.check_on_surface(x)?;
    let n = spec.unit_normal_unchecked(x)?;
    Ok(p - n * n.dot(p))
}

/// Generic force law: -n (p . grad n . p) / mu with grad n the exact
/// Jacobian of the unit-normal field.
pub fn gcfl_generic(spec: &SurfaceSpec, state: &ClassicalState) -> Result<ForceSample> {
    let n = spec.unit_normal(state.x)?;
    let jac = spec.normal_jacobian(state.x)?;
    let coeff = -jac.quad(state.p, state.p) / state.mu;
    Ok(ForceSample { force: n * coeff, normal_component: coeff, form_id: ForceForm::Generic })
}

/// Cylinder form 2 H_c n / R with 1/R the signed cross-section curvature.
/// Motion must lie in the cross-section plane (p_z = 0).
pub fn gcfl_cylinder(curve: &PlaneCurve, state: &ClassicalState) -> Result<ForceSample> {
    if state.p.z.abs() > 1e-12 * (1.0 + state.p.norm()) {
        return Err(Error::Domain(format!(
            "cylinder force law needs p_z = 0, got p_z = {}",
            state.p.z
        )));
    }
    let jets = curve.jets(state.x.x)?;
    if (state.x.y - jets.u).abs() > 1e-9 * (1.0 + state.x.norm_sq()) {
        return Err(Error::OffSurface { residual: (state.x.y - jets.u).abs(), tol: 1e-9 });
    }
    let hc = (state.p.x * state.p.x + state.p.y * state.p.y) / (2.0 * state.mu);
    let n = Vec3::new(-jets.up, 1.0, 0.0) / jets.g;
    let coeff = 2.0 * hc * jets.kappa;
    Ok(ForceSample { force: n * coeff, normal_component: coeff, form_id: ForceForm::Cylinder })
}

/// Recover torus chart angles from a Cartesian point.
pub fn torus_angles(a: f64, b: f64, x: Vec3) -> (f64, f64) {
    let rho = (x.x * x.x + x.y * x.y).sqrt();
    let theta = f64::atan2(rho - a, x.z);
    let phi = f64::atan2(x.y, x.x);
    let _ = b;
    (theta, phi)
}

/// One of the equivalent torus right-hand-side forms.
pub fn gcfl_torus_form(form: TorusForm, a: f64, b: f64, state: &ClassicalState) -> Result<ForceSample> {
    let spec = SurfaceSpec::torus(a, b)?;
    spec.check_on_surface(state.x)?;
    let (theta, phi) = torus_angles(a, b, state.x);
    let sin_t = theta.sin();
    if sin_t.abs() < 1e-9 {
        return Err(Error::SingularEquation {
            equation: "torus force form".into(),
            coordinate: "theta".into(),
            value: theta,
            detail: "1/sin(theta) factor diverges".into(),
        });
    }
    let n = torus_normal(theta, phi);
    let k = torus_gaussian_curvature(a, b, theta);
    let mu = state.mu;
    let pz2 = state.p.z * state.p.z;
    let coeff = match form {
        TorusForm::Form1 => {
            let lz = state.x.x * state.p.y - state.x.y * state.p.x;
            -(b.powi(3) * k.powi(3) * lz * lz / mu + pz2 / (mu * b)) / (sin_t * sin_t)
        }
        TorusForm::Form2 => {
            -k * b * (a * pz2 / (mu * b * sin_t.powi(3)) + state.p.norm_sq() / mu)
        }
        TorusForm::Form3 => {
            -k * b * (a * pz2 / (mu * b * sin_t.powi(3)) + 2.0 * state.kinetic_energy())
        }
    };
    let form_id = match form {
        TorusForm::Form1 => ForceForm::TorusForm1,
        TorusForm::Form2 => ForceForm::TorusForm2,
        TorusForm::Form3 => ForceForm::TorusForm3,
    };
    Ok(ForceSample { force: n * coeff, normal_component: coeff, form_id })
}

/// Compact quadric form
/// -n (sqrt(abc)/mu) (K/(alpha beta gamma delta))^(1/4)
///   (alpha p_x^2/a^2 + beta p_y^2/b^2 + gamma p_z^2/c^2).
pub fn gcfl_quadric(q: &QuadricParams, state: &ClassicalState) -> Result<ForceSample> {
    if q.sign_product() == 0 {
        return Err(Error::Domain(
            "quadric force law requires alpha*beta*gamma*delta != 0".into(),
        ));
    }
    let spec = SurfaceSpec::quadric(*q)?;
    spec.check_on_surface(state.x)?;
    let n = spec.unit_normal_unchecked(state.x)?;
    let k = quadric_gaussian_curvature(q, state.x)?;
    let arg = k / q.sign_product() as f64;
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "fourth-root argument K/(alpha beta gamma delta) = {arg:.3e} is not positive"
        )));
    }
    let quad = q.alpha as f64 * state.p.x * state.p.x / (q.a * q.a)
        + q.beta as f64 * state.p.y * state.p.y / (q.b * q.b)
        + q.gamma as f64 * state.p.z * state.p.z / (q.c * q.c);
    let coeff = -(q.a * q.b * q.c).sqrt() / state.mu * arg.powf(0.25) * quad;
    Ok(ForceSample { force: n * coeff, normal_component: coeff, form_id: ForceForm::QuadricCompact })
}

/// Componentwise bracket sum for a general implicit surface, plus the
/// calibrated force under the working hypothesis factor 1/(mu |grad f|).
#[derive(Debug, Clone, Copy)]
pub struct GeneralComponents {
    /// The three curly brackets, one per Cartesian component.
    pub brackets: [f64; 3],
    /// sum_i bracket_i p_i^2, exactly as printed.
    pub raw_sum: f64,
    /// -n raw_sum / (mu |grad f|).
    pub calibrated: ForceSample,
    /// raw_sum divided by the generic normal coefficient (p . grad n . p)/mu;
    /// equals mu |grad f| wherever the hypothesis holds.
    pub ratio_to_generic: f64,
}

/// The three curly brackets of the componentwise force law at a point, one
/// per Cartesian component.
pub fn general_brackets(spec: &SurfaceSpec, x: Vec3) -> Result<[f64; 3]> {
    let jet = spec.implicit_expr().eval_jet(x.x, x.y, x.z)?;
    let g = jet.g;
    let h = jet.h;
    let scale = g[0].abs().max(g[1].abs()).max(g[2].abs());
    for (i, gi) in g.iter().enumerate() {
        if gi.abs() <= 1e-9 * (scale + 1e-300) {
            return Err(Error::SingularEquation {
                equation: "general componentwise force law".into(),
                coordinate: ["f'_x", "f'_y", "f'_z"][i].into(),
                value: *gi,
                detail: "formula divides by each first partial of f".into(),
            });
        }
    }
    let mut brackets = [0.0; 3];
    for i in 0..3 {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        brackets[i] = (h[i][i] / g[i] + g[i] * h[j][k] / (g[j] * g[k])) * g[i]
            - (h[i][k] / g[k] + h[i][j] / g[j]) * g[i];
    }
    Ok(brackets)
}

pub fn gcfl_general_components(spec: &SurfaceSpec, state: &ClassicalState) -> Result<GeneralComponents> {
    spec.check_on_surface(state.x)?;
    let brackets = general_brackets(spec, state.x)?;
    let jet = spec.implicit_expr().eval_jet(state.x.x, state.x.y, state.x.z)?;
    let p = state.p.as_array();
    let raw_sum = brackets[0] * p[0] * p[0] + brackets[1] * p[1] * p[1] + brackets[2] * p[2] * p[2];

    let grad_norm = jet.gradient().norm();
    let n = jet.gradient() / grad_norm;
    let coeff = -raw_sum / (state.mu * grad_norm);
    let calibrated =
        ForceSample { force: n * coeff, normal_component: coeff, form_id: ForceForm::GeneralComponents };

    let generic = gcfl_generic(spec, state)?;
    let ratio = if generic.normal_component != 0.0 {
        raw_sum / (-generic.normal_component)
    } else {
        f64::NAN
    };
    Ok(GeneralComponents { brackets, raw_sum, calibrated, ratio_to_generic: ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn unit_sphere() -> SurfaceSpec {
        SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1").unwrap()
    }

    #[test]
    fn tangent_projection_examples() {
        let s = unit_sphere();
        let p = project_tangent(&s, Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 3.0)).unwrap();
        assert!((p - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-14);

        // already tangent: unchanged
        let t = Vec3::new(0.3, -0.4, 0.0);
        let p2 = project_tangent(&s, Vec3::new(0.0, 0.0, 1.0), t).unwrap();
        assert!((p2 - t).norm() < 1e-15);

        // torus outer equator: n = (1,0,0)
        let torus = SurfaceSpec::torus(3.0, 1.0).unwrap();
        let p3 = project_tangent(&torus, Vec3::new(4.0, 0.0, 0.0), Vec3::new(5.0, 0.0, 1.0)).unwrap();
        assert!((p3 - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn generic_force_on_unit_sphere() {
        let s = unit_sphere();
        let state = ClassicalState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), 1.0);
        let f = gcfl_generic(&s, &state).unwrap();
        assert!((f.force - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-13, "{:?}", f.force);
    }

    #[test]
    fn generic_force_vanishes_on_plane() {
        let s = SurfaceSpec::implicit_from_source("z").unwrap();
        let state = ClassicalState::new(Vec3::new(0.3, 0.9, 0.0), Vec3::new(1.0, -2.0, 0.0), 1.3);
        let f = gcfl_generic(&s, &state).unwrap();
        assert_eq!(f.force, Vec3::ZERO);
    }

    #[test]
    fn generic_force_on_torus_tube() {
        let s = SurfaceSpec::torus(3.0, 1.0).unwrap();
        let state = ClassicalState::new(Vec3::new(4.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), 1.0);
        let f = gcfl_generic(&s, &state).unwrap();
        assert!((f.force - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12, "{:?}", f.force);
    }

    #[test]
    fn cylinder_form_examples() {
        // unit circle cross-section, |p| = 1: inward force of magnitude 1
        let circle = PlaneCurve::from_source("sqrt(1 - x^2)", [-0.95, 0.95]).unwrap();
        let state = ClassicalState::new(Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0), 1.0);
        let f = gcfl_cylinder(&circle, &state).unwrap();
        assert!((f.force - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-13, "{:?}", f.force);

        let line = PlaneCurve::from_source("x", [-2.0, 2.0]).unwrap();
        let diag = std::f64::consts::FRAC_1_SQRT_2;
        let state = ClassicalState::new(Vec3::new(0.5, 0.5, 0.0), Vec3::new(diag, diag, 0.0), 1.0);
        let f = gcfl_cylinder(&line, &state).unwrap();
        assert_eq!(f.force, Vec3::ZERO);

        // parabola at x = 0 with p = (1,0,0): magnitude 2 H_c kappa = 2
        let parabola = PlaneCurve::from_source("x^2", [-2.0, 2.0]).unwrap();
        let state = ClassicalState::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), 1.0);
        let f = gcfl_cylinder(&parabola, &state).unwrap();
        assert!((f.force.norm() - 2.0).abs() < 1e-13);
        // cross-check against the generic law on the cylinder surface
        let spec = SurfaceSpec::cylinder(parabola).unwrap();
        let g = gcfl_generic(&spec, &state).unwrap();
        assert!((f.force - g.force).norm() < 1e-12);
    }

    #[test]
    fn torus_forms_at_outer_equator() {
        let state = ClassicalState::new(Vec3::new(4.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), 1.0);
        for form in [TorusForm::Form1, TorusForm::Form2, TorusForm::Form3] {
            let f = gcfl_torus_form(form, 3.0, 1.0, &state).unwrap();
            assert!((f.force - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12, "{form:?}: {:?}", f.force);
        }
    }

    #[test]
    fn torus_form_singular_at_sin_zero() {
        // theta = pi: point (a - 0, ...) has z = -b, rho = a
        let state = ClassicalState::new(Vec3::new(3.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0), 1.0);
        let err = gcfl_torus_form(TorusForm::Form1, 3.0, 1.0, &state).unwrap_err();
        assert!(matches!(err, Error::SingularEquation { .. }));
    }

    #[test]
    fn quadric_sphere_reduces_to_centripetal() {
        let q = QuadricParams { a: 2.0, b: 2.0, c: 2.0, alpha: 1, beta: 1, gamma: 1, delta: 1 };
        let state = ClassicalState::new(Vec3::new(0.0, 0.0, 2.0), Vec3::new(1.0, 0.0, 0.0), 1.0);
        let f = gcfl_quadric(&q, &state).unwrap();
        assert!((f.force.norm() - 0.5).abs() < 1e-13, "magnitude {}", f.force.norm());
        let spec = SurfaceSpec::quadric(q).unwrap();
        let g = gcfl_generic(&spec, &state).unwrap();
        assert!((f.force - g.force).norm() < 1e-13);
    }

    #[test]
    fn quadric_rejects_degenerate_signs() {
        let q = QuadricParams { a: 1.0, b: 1.0, c: 1.0, alpha: 1, beta: -1, gamma: 0, delta: 1 };
        let state = ClassicalState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), 1.0);
        assert!(matches!(gcfl_quadric(&q, &state), Err(Error::Domain(_))));
    }

    #[test]
    fn general_brackets_on_sphere() {
        // f = x^2+y^2+z^2-R^2: every bracket evaluates to 2.
        let r = 1.5;
        let s = SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 2.25").unwrap();
        let x = Vec3::new(0.9, 0.8, 0.8944271909999159);
        assert!(s.f_value(x).unwrap().abs() < 1e-12);
        let p = project_tangent(&s, x, Vec3::new(0.3, -0.5, 0.4)).unwrap();
        let state = ClassicalState::new(x, p, 1.0);
        let gen = gcfl_general_components(&s, &state).unwrap();
        for b in gen.brackets {
            assert!((b - 2.0).abs() < 1e-12, "bracket {b}");
        }
        assert!((gen.raw_sum - 2.0 * p.norm_sq()).abs() < 1e-12);
        // calibrated with 1/(mu |grad f|) matches the generic law
        let g = gcfl_generic(&s, &state).unwrap();
        assert!((gen.calibrated.force - g.force).norm() < 1e-12 * g.force.norm());
        assert!((gen.ratio_to_generic - 2.0 * r).abs() < 1e-9, "ratio {}", gen.ratio_to_generic);
    }

    #[test]
    fn general_brackets_reject_axis_points() {
        let s = unit_sphere();
        // f'_x = 0 at x = 0
        let x = Vec3::new(0.0, 0.6, 0.8);
        let state = ClassicalState::new(x, Vec3::new(1.0, 0.0, 0.0), 1.0);
        assert!(matches!(
            gcfl_general_components(&s, &state),
            Err(Error::SingularEquation { .. })
        ));
    }

    #[test]
    fn force_scales_quadratically_in_momentum() {
        let s = SurfaceSpec::torus(3.0, 1.0).unwrap();
        let x = crate::surface::torus_point(3.0, 1.0, 0.9, 0.4);
        let p = project_tangent(&s, x, Vec3::new(0.3, 0.8, -0.2)).unwrap();
        let f1 = gcfl_generic(&s, &ClassicalState::new(x, p, 1.0)).unwrap();
        let f2 = gcfl_generic(&s, &ClassicalState::new(x, p * 2.0, 1.0)).unwrap();
        assert_eq!(f2.force, f1.force * 4.0);
        let t1 = gcfl_torus_form(TorusForm::Form1, 3.0, 1.0, &ClassicalState::new(x, p, 1.0)).unwrap();
        let t2 = gcfl_torus_form(TorusForm::Form1, 3.0, 1.0, &ClassicalState::new(x, p * 2.0, 1.0)).unwrap();
        assert_eq!(t2.force, t1.force * 4.0);
    }

    #[test]
    fn force_is_normal_at_random_states() {
        let spec = SurfaceSpec::torus(3.0, 1.0).unwrap();
        let mut rng = sampling::seeded_rng(7);
        for _ in 0..50 {
            let state = sampling::random_torus_state(3.0, 1.0, 1.0, (0.1, 0.9), &mut rng);
            let f = gcfl_generic(&spec, &state).unwrap();
            let n = spec.unit_normal(state.x).unwrap();
            assert!(f.force.cross(n).norm() <= 1e-10 * f.force.norm().max(1e-30));
        }
        let _ = FRAC_PI_2;
    }
}
