//! Seeded sampling of on-surface points and tangent states for the
//! cross-validation harnesses. Positions are drawn in chart coordinates away
//! from formula singularities; momenta come from the unit ball and are then
//! tangent-projected.

use super::ClassicalState;
use crate::error::Result;
use crate::math::Vec3;
use crate::surface::{project_to_surface, torus_point, QuadricParams, SurfaceShape, SurfaceSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ball_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.05 && n <= 1.0 {
            return v;
        }
    }
}

/// Torus state with sin(theta) confined to the given band.
pub fn random_torus_state(
    a: f64,
    b: f64,
    mu: f64,
    sin_band: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> ClassicalState {
    let theta = rng.gen_range(sin_band.0.asin()..sin_band.1.asin());
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let x = torus_point(a, b, theta, phi);
    let n = crate::surface::torus_normal(theta, phi);
    let raw = ball_vector(rng);
    let p = raw - n * n.dot(raw);
    ClassicalState::new(x, p, mu)
}

/// On-surface point for any supported spec kind.
pub fn random_surface_point(spec: &SurfaceSpec, rng: &mut ChaCha8Rng) -> Result<Vec3> {
    Ok(match &spec.shape {
        SurfaceShape::Torus { major, minor } => {
            let theta = rng.gen_range(0.05..std::f64::consts::TAU - 0.05);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            torus_point(*major, *minor, theta, phi)
        }
        SurfaceShape::PlaneCurveCylinder { curve } => {
            let span = curve.domain[1] - curve.domain[0];
            let x = rng.gen_range(curve.domain[0] + 0.05 * span..curve.domain[1] - 0.05 * span);
            let u = curve.u.eval_taylor(x)?.value();
            Vec3::new(x, u, rng.gen_range(-1.0..1.0))
        }
        SurfaceShape::Quadric(q) => random_quadric_point(q, rng)?,
        SurfaceShape::Implicit { .. } => {
            // project a random direction from a shell of radii onto f = 0
            let dir = ball_vector(rng).normalized().unwrap();
            let r = rng.gen_range(0.5..1.5);
            project_to_surface(spec, dir * r)?
        }
    })
}

fn random_quadric_point(q: &QuadricParams, rng: &mut ChaCha8Rng) -> Result<Vec3> {
    let signs = [q.alpha, q.beta, q.gamma];
    let semis = [q.a, q.b, q.c];
    let negatives: Vec<usize> = (0..3).filter(|&i| signs[i] < 0).collect();
    let zeros: Vec<usize> = (0..3).filter(|&i| signs[i] == 0).collect();
    let v = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut out = [0.0; 3];
    match (q.delta, negatives.len(), zeros.len()) {
        // ellipsoid
        (1, 0, 0) => {
            let u = rng.gen_range(0.25..std::f64::consts::PI - 0.25);
            out[0] = semis[0] * u.sin() * v.cos();
            out[1] = semis[1] * u.sin() * v.sin();
            out[2] = semis[2] * u.cos();
        }
        // one-sheet hyperboloid: cosh on the two positive axes
        (1, 1, 0) => {
            let neg = negatives[0];
            let pos: Vec<usize> = (0..3).filter(|&i| i != neg).collect();
            let u: f64 = rng.gen_range(-0.8..0.8);
            out[pos[0]] = semis[pos[0]] * u.cosh() * v.cos();
            out[pos[1]] = semis[pos[1]] * u.cosh() * v.sin();
            out[neg] = semis[neg] * u.sinh();
        }
        // two-sheet hyperboloid: cosh on the single positive axis
        (1, 2, 0) => {
            let pos = (0..3).find(|&i| signs[i] > 0).unwrap();
            let neg = negatives.clone();
            let u: f64 = rng.gen_range(0.2..1.0);
            let sheet = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            out[pos] = sheet * semis[pos] * u.cosh();
            out[neg[0]] = semis[neg[0]] * u.sinh() * v.cos();
            out[neg[1]] = semis[neg[1]] * u.sinh() * v.sin();
        }
        other => {
            return Err(crate::error::Error::Domain(format!(
                "no sampler for quadric class (delta, negatives, zeros) = {other:?}"
            )))
        }
    }
    Ok(Vec3::new(out[0], out[1], out[2]))
}

/// Random tangent state on the spec's surface.
pub fn random_state(spec: &SurfaceSpec, mu: f64, rng: &mut ChaCha8Rng) -> Result<ClassicalState> {
    let x = random_surface_point(spec, rng)?;
    let n = spec.unit_normal_unchecked(x)?;
    let raw = ball_vector(rng);
    let p = raw - n * n.dot(raw);
    Ok(ClassicalState::new(x, p, mu))
}

/// Random tangent state with all |f'_i| bounded below, as the componentwise
/// force law requires.
pub fn random_state_generic_safe(
    spec: &SurfaceSpec,
    mu: f64,
    min_partial: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ClassicalState> {
    for _ in 0..1000 {
        let state = random_state(spec, mu, rng)?;
        let g = spec.gradient(state.x)?;
        if g.x.abs() > min_partial && g.y.abs() > min_partial && g.z.abs() > min_partial {
            return Ok(state);
        }
    }
    Err(crate::error::Error::Domain(
        "could not sample a point with all partials bounded away from zero".into(),
    ))
}
