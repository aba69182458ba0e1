//! Constraint-projecting trajectory integrator, used as an independent
//! oracle for the force law. Each step advances free motion and restores
//! f(x) = 0 with a position-level Lagrange multiplier (Newton solve along
//! grad f) followed by a velocity-level tangency projection.

use super::{gcfl_generic, ClassicalState};
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::surface::SurfaceSpec;
use serde::Serialize;

const PROJECTION_TOL: f64 = 1e-12;
const PROJECTION_MAX_ITER: usize = 50;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    pub energy: Vec<f64>,
    pub constraint_residual: Vec<f64>,
    pub dt: f64,
}

impl Trajectory {
    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_residual.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// max |H(t) - H(0)| / H(0)
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.energy[0];
        if h0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().fold(0.0f64, |acc, &h| acc.max((h - h0).abs())) / h0.abs()
    }
}

fn position_project(spec: &SurfaceSpec, x: Vec3, p_over_mu: Vec3, grad0: Vec3, dt: f64) -> Result<(Vec3, f64)> {
    let mut lambda = 0.0;
    for it in 0..PROJECTION_MAX_ITER {
        let x1 = x + (p_over_mu + grad0 * lambda) * dt;
        let f = spec.f_value(x1)?;
        let tol = PROJECTION_TOL * (1.0 + x1.norm_sq());
        if f.abs() <= tol {
            return Ok((x1, lambda));
        }
        let slope = spec.gradient(x1)?.dot(grad0) * dt;
        if slope.abs() < 1e-300 {
            return Err(Error::ProjectionFailed { iterations: it, residual: f.abs() });
        }
        lambda -= f / slope;
        if !lambda.is_finite() {
            return Err(Error::ProjectionFailed { iterations: it, residual: f.abs() });
        }
    }
    let x1 = x + (p_over_mu + grad0 * lambda) * dt;
    let f = spec.f_value(x1)?.abs();
    Err(Error::ProjectionFailed { iterations: PROJECTION_MAX_ITER, residual: f })
}

/// Advance free constrained motion for `steps` steps of size `dt`.
pub fn integrate_constrained(
    spec: &SurfaceSpec,
    initial: ClassicalState,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    initial.validate(spec)?;
    let mu = initial.mu;
    let mut x = initial.x;
    let mut p = initial.p;

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        constraint_residual: Vec::with_capacity(steps + 1),
        dt,
    };
    let mut record = |t: f64, x: Vec3, p: Vec3, f: f64| {
        traj.times.push(t);
        traj.states.push(ClassicalState::new(x, p, mu));
        traj.energy.push(p.norm_sq() / (2.0 * mu));
        traj.constraint_residual.push(f);
    };
    record(0.0, x, p, spec.f_value(x)?);

    for step in 1..=steps {
        let grad0 = spec.gradient(x)?;
        let (x1, lambda) = position_project(spec, x, p / mu, grad0, dt)?;
        let p_half = p + grad0 * (lambda * mu);
        // velocity-level projection: exact for the linear tangency constraint
        let n1 = spec.unit_normal_unchecked(x1)?;
        let p1 = p_half - n1 * n1.dot(p_half);
        x = x1;
        p = p1;
        record(step as f64 * dt, x, p, spec.f_value(x)?);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryForceReport {
    pub interior_samples: usize,
    /// sup |dp/dt - force| / sup |force| over interior samples.
    pub max_relative_deviation: f64,
    pub max_absolute_deviation: f64,
    pub force_scale: f64,
}

/// Compare central-difference dp/dt against the generic force law along a
/// trajectory.
pub fn verify_force_along_trajectory(traj: &Trajectory, spec: &SurfaceSpec) -> Result<TrajectoryForceReport> {
    let n = traj.states.len();
    if n < 3 {
        return Err(Error::Domain(format!("trajectory too short for differencing ({n} samples)")));
    }
    let mut force_scale = 0.0f64;
    let mut max_abs = 0.0f64;
    for k in 1..n - 1 {
        let state = &traj.states[k];
        let force = gcfl_generic(spec, state)?.force;
        let fd = (traj.states[k + 1].p - traj.states[k - 1].p) / (2.0 * traj.dt);
        force_scale = force_scale.max(force.norm());
        max_abs = max_abs.max((fd - force).norm());
    }
    let max_rel = if force_scale > 0.0 { max_abs / force_scale } else { max_abs };
    Ok(TrajectoryForceReport {
        interior_samples: n - 2,
        max_relative_deviation: max_rel,
        max_absolute_deviation: max_abs,
        force_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_great_circle() {
        let spec = SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1").unwrap();
        let state = ClassicalState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), 1.0);
        let traj = integrate_constrained(&spec, state, 1e-3, 2000).unwrap();
        assert!(traj.max_constraint_residual() < 1e-10);
        assert!(traj.relative_energy_drift() < 1e-10);
        // stays on the great circle y = 0
        let plane_normal = state.x.cross(state.p);
        for s in &traj.states {
            assert!(s.x.dot(plane_normal).abs() < 1e-9);
        }
        let report = verify_force_along_trajectory(&traj, &spec).unwrap();
        assert!(report.max_relative_deviation < 1e-4, "{report:?}");
    }

    #[test]
    fn plane_trajectory_is_straight() {
        let spec = SurfaceSpec::implicit_from_source("z").unwrap();
        let state = ClassicalState::new(Vec3::ZERO, Vec3::new(0.6, -0.2, 0.0), 1.0);
        let traj = integrate_constrained(&spec, state, 1e-2, 500).unwrap();
        assert_eq!(traj.relative_energy_drift(), 0.0);
        let last = traj.states.last().unwrap();
        let expect = state.p * (traj.times.last().unwrap() / state.mu);
        assert!((last.x - expect).norm() < 1e-12);
        let report = verify_force_along_trajectory(&traj, &spec).unwrap();
        assert!(report.max_absolute_deviation < 1e-12);
    }

    #[test]
    fn torus_tube_geodesic_is_a_circle() {
        let spec = SurfaceSpec::torus(3.0, 1.0).unwrap();
        let state = ClassicalState::new(Vec3::new(4.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), 1.0);
        let traj = integrate_constrained(&spec, state, 1e-3, 4000).unwrap();
        for s in &traj.states {
            // circle of radius b around (a, 0, 0) in the y = 0 plane
            assert!(s.x.y.abs() < 1e-9);
            let rho = (s.x.x * s.x.x + s.x.y * s.x.y).sqrt();
            let d = ((rho - 3.0).powi(2) + s.x.z * s.x.z).sqrt();
            assert!((d - 1.0).abs() < 1e-9);
        }
        assert!(traj.relative_energy_drift() < 1e-10);
    }

    #[test]
    fn short_trajectory_rejected_for_differencing() {
        let spec = SurfaceSpec::implicit_from_source("z").unwrap();
        let state = ClassicalState::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), 1.0);
        let traj = integrate_constrained(&spec, state, 1e-2, 1).unwrap();
        assert!(verify_force_along_trajectory(&traj, &spec).is_err());
    }

    #[test]
    fn invalid_initial_state_rejected() {
        let spec = SurfaceSpec::implicit_from_source("x^2 + y^2 + z^2 - 1").unwrap();
        let off = ClassicalState::new(Vec3::new(0.0, 0.0, 1.4), Vec3::new(1.0, 0.0, 0.0), 1.0);
        assert!(integrate_constrained(&spec, off, 1e-3, 10).is_err());
        let non_tangent = ClassicalState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0), 1.0);
        assert!(integrate_constrained(&spec, non_tangent, 1e-3, 10).is_err());
    }
}
