//! Finite-difference shape-operator oracle.
//!
//! Estimates (M, K) by central-differencing the unit-normal field along two
//! orthonormal tangent directions. The normal evaluations use exact gradients
//! of f, so this route shares no second-derivative code with the closed-form
//! curvature path it cross-checks.

use super::SurfaceSpec;
use crate::error::{Error, Result};
use crate::math::{tangent_basis, Vec3};

pub fn curvature_fd_oracle(spec: &SurfaceSpec, x: Vec3, h: f64) -> Result<(f64, f64)> {
    spec.check_on_surface(x)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let n = spec.unit_normal_unchecked(x)?;
    let (t1, t2) = tangent_basis(n);

    let mut s = [[0.0; 2]; 2];
    for (b, tb) in [t1, t2].into_iter().enumerate() {
        let fwd = x + tb * h;
        let bwd = x - tb * h;
        if fwd == x || bwd == x {
            return Err(Error::Domain(format!("step underflow: h = {h} does not move the point")));
        }
        let dn = (spec.unit_normal_unchecked(fwd)? - spec.unit_normal_unchecked(bwd)?) / (2.0 * h);
        s[0][b] = t1.dot(dn);
        s[1][b] = t2.dot(dn);
    }
    // symmetrize; the exact shape operator is symmetric
    let off = 0.5 * (s[0][1] + s[1][0]);
    let mean = 0.5 * (s[0][0] + s[1][1]);
    let gauss = s[0][0] * s[1][1] - off * off;
    Ok((mean, gauss))
}
