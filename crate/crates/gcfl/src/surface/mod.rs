//! Surface descriptions and their differential geometry.
//!
//! Every supported kind carries an implicit representation f(x) = 0. Normals
//! point along grad f; principal curvatures are the eigenvalues of the shape
//! operator dn/dx restricted to the tangent plane with that orientation, the
//! mean curvature is their true average, and the Gaussian curvature their
//! product. Where the sign of M matters downstream, comparisons are done on
//! magnitudes or within one fixed orientation.

mod oracle;
mod specfile;

pub use oracle::curvature_fd_oracle;
pub use specfile::{parse_surface, write_surface};

use crate::error::{Error, Result};
use crate::expr::{Expr, Taylor, Var};
use crate::math::{tangent_basis, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: i32,
    pub beta: i32,
    pub gamma: i32,
    pub delta: i32,
}

impl QuadricParams {
    pub fn sign_product(&self) -> i32 {
        self.alpha * self.beta * self.gamma * self.delta
    }
}

/// Cross-section curve y = u(x) of a cylinder ruled along z.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurve {
    pub u: Expr,
    pub source: String,
    pub domain: [f64; 2],
}

/// Curve data with exact derivatives: u', u'', the metric factor
/// g = sqrt(1 + u'^2) and the curvature chain kappa, kappa', kappa''.
#[derive(Debug, Clone, Copy)]
pub struct CurveJets {
    pub u: f64,
    pub up: f64,
    pub upp: f64,
    pub g: f64,
    pub kappa: f64,
    pub kappa_p: f64,
    pub kappa_pp: f64,
}

impl PlaneCurve {
    pub fn from_source(source: &str, domain: [f64; 2]) -> Result<Self> {
        let u = crate::expr::parse_expression(source)?;
        if !u.is_univariate() {
            return Err(Error::InvalidSpec("cross-section expression may only use x".into()));
        }
        Ok(PlaneCurve { u, source: source.to_string(), domain })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain[0] && x <= self.domain[1]
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "x = {x} outside curve domain [{}, {}]",
                self.domain[0], self.domain[1]
            )))
        }
    }

    pub fn jets(&self, x: f64) -> Result<CurveJets> {
        self.check_domain(x)?;
        let u = self.u.eval_taylor(x)?;
        let up = u.derive();
        let upp = up.derive();
        let one = Taylor::constant(1.0);
        let g2 = one.add(up.mul(up));
        let g = g2.sqrt();
        let kappa = upp.div(g2.powf(1.5));
        Ok(CurveJets {
            u: u.value(),
            up: up.value(),
            upp: upp.value(),
            g: g.value(),
            kappa: kappa.value(),
            kappa_p: kappa.derivative(1),
            kappa_pp: kappa.derivative(2),
        })
    }

    /// Signed curvature kappa = u'' / (1 + u'^2)^(3/2).
    pub fn curvature(&self, x: f64) -> Result<f64> {
        Ok(self.jets(x)?.kappa)
    }

    /// Arc-length factor sqrt(1 + u'^2).
    pub fn metric_factor(&self, x: f64) -> Result<f64> {
        Ok(self.jets(x)?.g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceShape {
    Implicit { f: Expr, source: String },
    PlaneCurveCylinder { curve: PlaneCurve },
    Torus { major: f64, minor: f64 },
    Quadric(QuadricParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub shape: SurfaceShape,
    pub hbar: f64,
    pub mu: f64,
    /// Membership tolerance scale: a point is on the surface when
    /// |f(x)| < tol_factor * (1 + |x|^2).
    pub tol_factor: f64,
    implicit: Expr,
}

/// Point argument for curvature evaluation: Cartesian, or torus chart angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointOnSurface {
    Xyz(Vec3),
    TorusAngles { theta: f64, phi: f64 },
}

/// Normal, curvatures and geometric potential at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBundle {
    pub normal: Vec3,
    pub mean: f64,
    pub gauss: f64,
    pub geometric_potential: f64,
}

fn num(v: f64) -> Box<Expr> {
    Box::new(Expr::Num(v))
}

fn var(v: Var) -> Box<Expr> {
    Box::new(Expr::Var(v))
}

fn build_implicit(shape: &SurfaceShape) -> Expr {
    use Expr::{Add, Call, Mul, Pow, Sub};
    match shape {
        SurfaceShape::Implicit { f, .. } => f.clone(),
        // f = y - u(x); the normal (-u', 1, 0)/g points to the concave side
        // of curves like the upper half circle.
        SurfaceShape::PlaneCurveCylinder { curve } => Sub(var(Var::Y), Box::new(curve.u.clone())),
        // f = (sqrt(x^2 + y^2) - a)^2 - b^2 + z^2
        SurfaceShape::Torus { major, minor } => {
            let rho = Call(
                crate::expr::Func::Sqrt,
                Box::new(Add(
                    Box::new(Pow(var(Var::X), num(2.0))),
                    Box::new(Pow(var(Var::Y), num(2.0))),
                )),
            );
            Add(
                Box::new(Sub(
                    Box::new(Pow(Box::new(Sub(Box::new(rho), num(*major))), num(2.0))),
                    num(minor * minor),
                )),
                Box::new(Pow(var(Var::Z), num(2.0))),
            )
        }
        // f = alpha x^2/a^2 + beta y^2/b^2 + gamma z^2/c^2 - delta
        SurfaceShape::Quadric(q) => {
            let term = |axis: Var, sign: i32, semi: f64| -> Box<Expr> {
                Box::new(Mul(
                    num(sign as f64 / (semi * semi)),
                    Box::new(Pow(var(axis), num(2.0))),
                ))
            };
            Sub(
                Box::new(Add(
                    Box::new(Add(term(Var::X, q.alpha, q.a), term(Var::Y, q.beta, q.b))),
                    term(Var::Z, q.gamma, q.c),
                )),
                num(q.delta as f64),
            )
        }
    }
}

impl SurfaceSpec {
    pub fn new(shape: SurfaceShape, hbar: f64, mu: f64, tol_factor: f64) -> Result<Self> {
        if let SurfaceShape::Torus { major, minor } = shape {
            if !(major > minor && minor > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "torus constraint a > b > 0 violated (a = {major}, b = {minor})"
                )));
            }
        }
        if let SurfaceShape::Quadric(q) = &shape {
            if q.a <= 0.0 || q.b <= 0.0 || q.c <= 0.0 {
                return Err(Error::InvalidSpec("quadric semi-axes must be positive".into()));
            }
        }
        let implicit = build_implicit(&shape);
        // The expression must differentiate twice on its declared domain;
        // probe one representative point.
        let spec = SurfaceSpec { shape, hbar, mu, tol_factor, implicit };
        if let Some(p) = spec.probe_point() {
            spec.implicit.eval_jet(p.x, p.y, p.z)?;
        }
        Ok(spec)
    }

    pub fn implicit_from_source(source: &str) -> Result<Self> {
        let f = crate::expr::parse_expression(source)?;
        SurfaceSpec::new(SurfaceShape::Implicit { f, source: source.to_string() }, 1.0, 1.0, 1e-10)
    }

    pub fn torus(a: f64, b: f64) -> Result<Self> {
        SurfaceSpec::new(SurfaceShape::Torus { major: a, minor: b }, 1.0, 1.0, 1e-10)
    }

    pub fn quadric(params: QuadricParams) -> Result<Self> {
        SurfaceSpec::new(SurfaceShape::Quadric(params), 1.0, 1.0, 1e-10)
    }

    pub fn cylinder(curve: PlaneCurve) -> Result<Self> {
        SurfaceSpec::new(SurfaceShape::PlaneCurveCylinder { curve }, 1.0, 1.0, 1e-10)
    }

    pub fn with_units(mut self, hbar: f64, mu: f64) -> Self {
        self.hbar = hbar;
        self.mu = mu;
        self
    }

    pub fn implicit_expr(&self) -> &Expr {
        &self.implicit
    }

    pub fn curve(&self) -> Option<&PlaneCurve> {
        match &self.shape {
            SurfaceShape::PlaneCurveCylinder { curve } => Some(curve),
            _ => None,
        }
    }

    fn probe_point(&self) -> Option<Vec3> {
        match &self.shape {
            SurfaceShape::Torus { major, minor } => Some(Vec3::new(major + minor, 0.0, 0.0)),
            SurfaceShape::PlaneCurveCylinder { curve } => {
                let x = 0.5 * (curve.domain[0] + curve.domain[1]);
                let u = curve.u.eval_taylor(x).ok()?;
                Some(Vec3::new(x, u.value(), 0.0))
            }
            _ => None,
        }
    }

    pub fn membership_tolerance(&self, p: Vec3) -> f64 {
        self.tol_factor * (1.0 + p.norm_sq())
    }

    pub fn f_value(&self, p: Vec3) -> Result<f64> {
        self.implicit.eval_xyz(p.x, p.y, p.z)
    }

    pub fn check_on_surface(&self, p: Vec3) -> Result<()> {
        let residual = self.f_value(p)?.abs();
        let tol = self.membership_tolerance(p);
        if residual < tol {
            Ok(())
        } else {
            Err(Error::OffSurface { residual, tol })
        }
    }

    pub fn gradient(&self, p: Vec3) -> Result<Vec3> {
        Ok(self.implicit.eval_jet(p.x, p.y, p.z)?.gradient())
    }

    /// Unit normal n = grad f / |grad f| without the membership check;
    /// used where evaluation points sit slightly off the surface.
    pub fn unit_normal_unchecked(&self, p: Vec3) -> Result<Vec3> {
        let g = self.gradient(p)?;
        if g.norm() <= 1e-12 {
            return Err(Error::SingularGradient(p.x, p.y, p.z));
        }
        Ok(g.normalized().unwrap())
    }

    pub fn unit_normal(&self, p: Vec3) -> Result<Vec3> {
        self.check_on_surface(p)?;
        self.unit_normal_unchecked(p)
    }

    /// Jacobian of the unit-normal field, d n_i / d x_j = (H - n (n^T H))_ij / |grad f|.
    pub fn normal_jacobian(&self, p: Vec3) -> Result<Mat3> {
        let jet = self.implicit.eval_jet(p.x, p.y, p.z)?;
        let grad = jet.gradient();
        let norm = grad.norm();
        if norm <= 1e-12 {
            return Err(Error::SingularGradient(p.x, p.y, p.z));
        }
        let n = grad / norm;
        let h = jet.h;
        let nth = [
            n.x * h[0][0] + n.y * h[1][0] + n.z * h[2][0],
            n.x * h[0][1] + n.y * h[1][1] + n.z * h[2][1],
            n.x * h[0][2] + n.y * h[1][2] + n.z * h[2][2],
        ];
        let narr = n.as_array();
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (h[i][j] - narr[i] * nth[j]) / norm;
            }
        }
        Ok(Mat3(out))
    }

    /// Shape operator in an orthonormal tangent basis, S_ab = t_a^T H t_b / |grad f|.
    fn shape_operator(&self, p: Vec3) -> Result<(Vec3, [[f64; 2]; 2])> {
        let jet = self.implicit.eval_jet(p.x, p.y, p.z)?;
        let grad = jet.gradient();
        let norm = grad.norm();
        if norm <= 1e-12 {
            return Err(Error::SingularGradient(p.x, p.y, p.z));
        }
        let n = grad / norm;
        let (t1, t2) = tangent_basis(n);
        let h = jet.hessian();
        let s = [
            [h.quad(t1, t1) / norm, h.quad(t1, t2) / norm],
            [h.quad(t2, t1) / norm, h.quad(t2, t2) / norm],
        ];
        Ok((n, s))
    }

    pub fn curvature_bundle(&self, p: Vec3) -> Result<CurvatureBundle> {
        self.check_on_surface(p)?;
        if let SurfaceShape::Quadric(q) = &self.shape {
            if q.sign_product() == 0 {
                return Err(Error::Domain(
                    "quadric curvature requires alpha*beta*gamma*delta != 0".into(),
                ));
            }
        }
        let (normal, s) = self.shape_operator(p)?;
        let mean = 0.5 * (s[0][0] + s[1][1]);
        let gauss = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let geometric_potential = -self.hbar * self.hbar * (mean * mean - gauss) / (2.0 * self.mu);
        Ok(CurvatureBundle { normal, mean, gauss, geometric_potential })
    }

    pub fn curvatures(&self, point: PointOnSurface) -> Result<CurvatureBundle> {
        let p = match point {
            PointOnSurface::Xyz(p) => p,
            PointOnSurface::TorusAngles { theta, phi } => match self.shape {
                SurfaceShape::Torus { major, minor } => torus_point(major, minor, theta, phi),
                _ => {
                    return Err(Error::Domain(
                        "chart angles are only accepted for torus surfaces".into(),
                    ))
                }
            },
        };
        self.curvature_bundle(p)
    }
}

/// Embedding of the torus chart (theta, phi).
pub fn torus_point(a: f64, b: f64, theta: f64, phi: f64) -> Vec3 {
    let rho = a + b * theta.sin();
    Vec3::new(rho * phi.cos(), rho * phi.sin(), b * theta.cos())
}

/// Outward unit normal of the torus at chart angles.
pub fn torus_normal(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Gaussian curvature of the torus, K = sin(theta) / (ab + b^2 sin(theta)).
pub fn torus_gaussian_curvature(a: f64, b: f64, theta: f64) -> f64 {
    theta.sin() / (a * b + b * b * theta.sin())
}

/// Gaussian curvature of a quadric with nonvanishing K:
/// K = alpha beta gamma delta { abc ((alpha x)^2/a^4 + (beta y)^2/b^4 + (gamma z)^2/c^4) }^-2.
pub fn quadric_gaussian_curvature(q: &QuadricParams, p: Vec3) -> Result<f64> {
    if q.sign_product() == 0 {
        return Err(Error::Domain(
            "quadric Gaussian curvature requires alpha*beta*gamma*delta != 0".into(),
        ));
    }
    let h2 = (q.alpha as f64 * p.x).powi(2) / q.a.powi(4)
        + (q.beta as f64 * p.y).powi(2) / q.b.powi(4)
        + (q.gamma as f64 * p.z).powi(2) / q.c.powi(4);
    let braced = q.a * q.b * q.c * h2;
    Ok(q.sign_product() as f64 / (braced * braced))
}

/// Signed curvature of a cross-section curve (paper formula, no
/// magnitude normalization).
pub fn curvature_plane_curve(curve: &PlaneCurve, x: f64) -> Result<f64> {
    curve.curvature(x)
}

/// Project a nearby point onto f(x) = 0 by Newton steps along the gradient.
pub fn project_to_surface(spec: &SurfaceSpec, start: Vec3) -> Result<Vec3> {
    let mut p = start;
    for _ in 0..50 {
        let f = spec.f_value(p)?;
        if f.abs() < 0.1 * spec.membership_tolerance(p) {
            return Ok(p);
        }
        let g = spec.gradient(p)?;
        let g2 = g.norm_sq();
        if g2 <= 1e-24 {
            return Err(Error::SingularGradient(p.x, p.y, p.z));
        }
        p = p - g * (f / g2);
    }
    spec.check_on_surface(p)?;
    Ok(p)
}
