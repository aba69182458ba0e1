//! Discretized charts carrying the geometry the operator constructions need:
//! positions, the orthonormal frame, reciprocal scale factors, curvatures and
//! quadrature weights on uniform periodic grids.
//!
//! The mean curvature stored here carries the sign that makes the geometric
//! momentum symmetric under the chart measure (d t_i/ds = 2 M n_i on curves
//! and its surface analogue); it is the negative of the shape-operator value
//! the surface module reports for the same grad-f-oriented normal. M^2 - K
//! and every n_i M product are unchanged by that choice.

use super::spectral::SpectralAxis;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::qfactor::{integrate_dense, OdeOptions};
use crate::surface::PlaneCurve;
use std::f64::consts::TAU;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Circle,
    CrossSection,
    Torus,
    Sphere,
}

#[derive(Debug)]
pub struct Chart {
    pub kind: ChartKind,
    pub n0: usize,
    /// 1 for curve charts.
    pub n1: usize,
    pub coord0: Vec<f64>,
    pub coord1: Vec<f64>,
    pub position: Vec<Vec3>,
    /// Unit frame vector along coordinate 0 (tangent t on curves, e_theta).
    pub frame0: Vec<Vec3>,
    /// Unit frame vector along coordinate 1 (e_phi); empty on curves.
    pub frame1: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    /// Reciprocal scale factor along coordinate 0 (1 on arc-length curves).
    pub inv_h0: Vec<f64>,
    pub inv_h1: Vec<f64>,
    /// First-derivative coefficient of the Laplace-Beltrami operator.
    pub lap_drift: Vec<f64>,
    pub mean_curv: Vec<f64>,
    pub gauss_curv: Vec<f64>,
    pub weight: Vec<f64>,
    pub hbar: f64,
    pub mu: f64,
    axis0: SpectralAxis,
    axis1: Option<SpectralAxis>,
}

impl Chart {
    pub fn nodes(&self) -> usize {
        self.n0 * self.n1
    }

    pub fn index(&self, i0: usize, i1: usize) -> usize {
        i0 * self.n1 + i1
    }

    pub fn is_curve(&self) -> bool {
        self.n1 == 1
    }

    pub fn axis_period(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.axis0.period
        } else {
            self.axis1.as_ref().expect("chart has no second axis").period
        }
    }

    pub(super) fn differentiate(&self, values: &mut [num_complex::Complex64], axis: usize, order: u32) {
        assert_eq!(values.len(), self.nodes());
        if axis == 0 {
            if self.n1 == 1 {
                self.axis0.differentiate(values, order);
            } else {
                let mut column = vec![num_complex::Complex64::new(0.0, 0.0); self.n0];
                for i1 in 0..self.n1 {
                    for i0 in 0..self.n0 {
                        column[i0] = values[self.index(i0, i1)];
                    }
                    self.axis0.differentiate(&mut column, order);
                    for i0 in 0..self.n0 {
                        values[self.index(i0, i1)] = column[i0];
                    }
                }
            }
        } else {
            let axis1 = self.axis1.as_ref().expect("chart has no second axis");
            for i0 in 0..self.n0 {
                let row = &mut values[i0 * self.n1..(i0 + 1) * self.n1];
                axis1.differentiate(row, order);
            }
        }
    }

    /// Weighted inner product under the surface measure.
    pub fn inner(&self, a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for i in 0..self.nodes() {
            acc += self.weight[i] * a[i].conj() * b[i];
        }
        acc
    }

    pub fn norm(&self, a: &[num_complex::Complex64]) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// Closed circle of the given radius in the z = 0 plane, arc-length
    /// parameterized, outward normal, kappa = -1/R under that orientation.
    pub fn circle(radius: f64, n: usize, hbar: f64, mu: f64) -> Result<Arc<Chart>> {
        if radius <= 0.0 || n < 8 {
            return Err(Error::Domain("circle chart needs radius > 0 and n >= 8".into()));
        }
        let length = TAU * radius;
        let kappa = -1.0 / radius;
        let mut chart = Chart {
            kind: ChartKind::Circle,
            n0: n,
            n1: 1,
            coord0: Vec::with_capacity(n),
            coord1: vec![0.0],
            position: Vec::with_capacity(n),
            frame0: Vec::with_capacity(n),
            frame1: Vec::new(),
            normal: Vec::with_capacity(n),
            inv_h0: vec![1.0; n],
            inv_h1: Vec::new(),
            lap_drift: vec![0.0; n],
            mean_curv: vec![kappa / 2.0; n],
            gauss_curv: vec![0.0; n],
            weight: vec![length / n as f64; n],
            hbar,
            mu,
            axis0: SpectralAxis::new(n, length),
            axis1: None,
        };
        for j in 0..n {
            let s = length * j as f64 / n as f64;
            let tau = s / radius;
            chart.coord0.push(s);
            chart.position.push(Vec3::new(radius * tau.cos(), radius * tau.sin(), 0.0));
            chart.frame0.push(Vec3::new(-tau.sin(), tau.cos(), 0.0));
            chart.normal.push(Vec3::new(tau.cos(), tau.sin(), 0.0));
        }
        Ok(Arc::new(chart))
    }

    /// Open cross-section curve y = u(x) over an x-window, re-parameterized
    /// by arc length. The grid is treated as periodic for spectral purposes;
    /// identities on such charts need window functions vanishing at the ends.
    pub fn cross_section(curve: &PlaneCurve, x_range: [f64; 2], n: usize, hbar: f64, mu: f64) -> Result<Arc<Chart>> {
        let [x0, x1] = x_range;
        if !(x0 < x1) || n < 8 {
            return Err(Error::Domain("cross-section chart needs x0 < x1 and n >= 8".into()));
        }
        if !curve.contains(x0) || !curve.contains(x1) {
            return Err(Error::Domain("x-range outside the curve domain".into()));
        }
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, coordinate: "x".into() };
        // arc length as a function of x
        let s_of_x = integrate_dense(|x, _| Ok(curve.jets(x)?.g), x0, 0.0, x1, &opts)?;
        let length = s_of_x.eval(x1)?;
        // invert: x as a function of arc length
        let opts_s = OdeOptions { rtol: 1e-12, atol: 1e-14, coordinate: "s".into() };
        let x_of_s = integrate_dense(|_, x| Ok(1.0 / curve.jets(x)?.g), 0.0, x0, length, &opts_s)?;

        let mut chart = Chart {
            kind: ChartKind::CrossSection,
            n0: n,
            n1: 1,
            coord0: Vec::with_capacity(n),
            coord1: vec![0.0],
            position: Vec::with_capacity(n),
            frame0: Vec::with_capacity(n),
            frame1: Vec::new(),
            normal: Vec::with_capacity(n),
            inv_h0: vec![1.0; n],
            inv_h1: Vec::new(),
            lap_drift: vec![0.0; n],
            mean_curv: Vec::with_capacity(n),
            gauss_curv: vec![0.0; n],
            weight: vec![length / n as f64; n],
            hbar,
            mu,
            axis0: SpectralAxis::new(n, length),
            axis1: None,
        };
        for j in 0..n {
            let s = length * j as f64 / n as f64;
            let x = x_of_s.eval(s)?;
            let jets = curve.jets(x)?;
            // independent arc-length check: the two ODE routes must agree
            let s_back = s_of_x.eval(x)?;
            if (s_back - s).abs() > 1e-10 * (1.0 + length) {
                return Err(Error::Eval(format!(
                    "arc-length inversion inconsistent at s = {s}: {s_back}"
                )));
            }
            chart.coord0.push(s);
            chart.position.push(Vec3::new(x, jets.u, 0.0));
            chart.frame0.push(Vec3::new(1.0, jets.up, 0.0) / jets.g);
            chart.normal.push(Vec3::new(-jets.up, 1.0, 0.0) / jets.g);
            chart.mean_curv.push(jets.kappa / 2.0);
        }
        Ok(Arc::new(chart))
    }

    /// Torus chart, theta half-offset so no node hits sin(theta) = 0.
    pub fn torus(a: f64, b: f64, n_theta: usize, n_phi: usize, hbar: f64, mu: f64) -> Result<Arc<Chart>> {
        if !(a > b && b > 0.0) {
            return Err(Error::InvalidSpec(format!("torus constraint a > b > 0 violated (a = {a}, b = {b})")));
        }
        if n_theta < 8 || n_phi < 8 || n_theta % 2 != 0 {
            return Err(Error::Domain("torus chart needs even n_theta >= 8 and n_phi >= 8".into()));
        }
        let nodes = n_theta * n_phi;
        let d_theta = TAU / n_theta as f64;
        let d_phi = TAU / n_phi as f64;
        let mut chart = Chart {
            kind: ChartKind::Torus,
            n0: n_theta,
            n1: n_phi,
            coord0: (0..n_theta).map(|j| (j as f64 + 0.5) * d_theta).collect(),
            coord1: (0..n_phi).map(|k| k as f64 * d_phi).collect(),
            position: Vec::with_capacity(nodes),
            frame0: Vec::with_capacity(nodes),
            frame1: Vec::with_capacity(nodes),
            normal: Vec::with_capacity(nodes),
            inv_h0: Vec::with_capacity(nodes),
            inv_h1: Vec::with_capacity(nodes),
            lap_drift: Vec::with_capacity(nodes),
            mean_curv: Vec::with_capacity(nodes),
            gauss_curv: Vec::with_capacity(nodes),
            weight: Vec::with_capacity(nodes),
            hbar,
            mu,
            axis0: SpectralAxis::new(n_theta, TAU),
            axis1: Some(SpectralAxis::new(n_phi, TAU)),
        };
        for j in 0..n_theta {
            let theta = chart.coord0[j];
            let (st, ct) = theta.sin_cos();
            let rho = a + b * st;
            for k in 0..n_phi {
                let phi = chart.coord1[k];
                let (sp, cp) = phi.sin_cos();
                chart.position.push(Vec3::new(rho * cp, rho * sp, b * ct));
                chart.frame0.push(Vec3::new(ct * cp, ct * sp, -st));
                chart.frame1.push(Vec3::new(-sp, cp, 0.0));
                chart.normal.push(Vec3::new(st * cp, st * sp, ct));
                chart.inv_h0.push(1.0 / b);
                chart.inv_h1.push(1.0 / rho);
                chart.lap_drift.push(ct / (b * rho));
                chart.mean_curv.push(-0.5 * (1.0 / b + st / rho));
                chart.gauss_curv.push(st / (b * rho));
                chart.weight.push(b * rho * d_theta * d_phi);
            }
        }
        Ok(Arc::new(chart))
    }

    /// Sphere in polar coordinates. The theta axis runs over a full period
    /// so the parameterization stays smooth and periodic (the sphere is
    /// covered twice); work on it is windowed to a patch inside (0, pi).
    pub fn sphere(radius: f64, n_theta: usize, n_phi: usize, hbar: f64, mu: f64) -> Result<Arc<Chart>> {
        if radius <= 0.0 || n_theta < 8 || n_phi < 8 || n_theta % 2 != 0 {
            return Err(Error::Domain("sphere chart needs radius > 0, even n_theta >= 8, n_phi >= 8".into()));
        }
        let nodes = n_theta * n_phi;
        let d_theta = TAU / n_theta as f64;
        let d_phi = TAU / n_phi as f64;
        let r = radius;
        let mut chart = Chart {
            kind: ChartKind::Sphere,
            n0: n_theta,
            n1: n_phi,
            coord0: (0..n_theta).map(|j| (j as f64 + 0.5) * d_theta).collect(),
            coord1: (0..n_phi).map(|k| k as f64 * d_phi).collect(),
            position: Vec::with_capacity(nodes),
            frame0: Vec::with_capacity(nodes),
            frame1: Vec::with_capacity(nodes),
            normal: Vec::with_capacity(nodes),
            inv_h0: Vec::with_capacity(nodes),
            inv_h1: Vec::with_capacity(nodes),
            lap_drift: Vec::with_capacity(nodes),
            mean_curv: Vec::with_capacity(nodes),
            gauss_curv: Vec::with_capacity(nodes),
            weight: Vec::with_capacity(nodes),
            hbar,
            mu,
            axis0: SpectralAxis::new(n_theta, TAU),
            axis1: Some(SpectralAxis::new(n_phi, TAU)),
        };
        for j in 0..n_theta {
            let theta = chart.coord0[j];
            let (st, ct) = theta.sin_cos();
            for k in 0..n_phi {
                let phi = chart.coord1[k];
                let (sp, cp) = phi.sin_cos();
                chart.position.push(Vec3::new(r * st * cp, r * st * sp, r * ct));
                chart.frame0.push(Vec3::new(ct * cp, ct * sp, -st));
                chart.frame1.push(Vec3::new(-sp, cp, 0.0));
                chart.normal.push(Vec3::new(st * cp, st * sp, ct));
                chart.inv_h0.push(1.0 / r);
                chart.inv_h1.push(1.0 / (r * st));
                chart.lap_drift.push(ct / (r * r * st));
                chart.mean_curv.push(-1.0 / r);
                chart.gauss_curv.push(1.0 / (r * r));
                chart.weight.push(r * r * st.abs() * d_theta * d_phi);
            }
        }
        Ok(Arc::new(chart))
    }
}
