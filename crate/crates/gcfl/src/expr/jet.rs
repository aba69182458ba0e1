//! Second-order forward jets in three variables: value, gradient, Hessian.

use crate::math::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }

    pub fn variable(axis: usize, v: f64) -> Self {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Jet2 { v, g, h: [[0.0; 3]; 3] }
    }

    pub fn gradient(&self) -> Vec3 {
        Vec3::new(self.g[0], self.g[1], self.g[2])
    }

    pub fn hessian(&self) -> Mat3 {
        Mat3(self.h)
    }

    pub fn add(self, r: Jet2) -> Jet2 {
        let mut out = self;
        out.v += r.v;
        for i in 0..3 {
            out.g[i] += r.g[i];
            for j in 0..3 {
                out.h[i][j] += r.h[i][j];
            }
        }
        out
    }

    pub fn sub(self, r: Jet2) -> Jet2 {
        let mut out = self;
        out.v -= r.v;
        for i in 0..3 {
            out.g[i] -= r.g[i];
            for j in 0..3 {
                out.h[i][j] -= r.h[i][j];
            }
        }
        out
    }

    pub fn neg(self) -> Jet2 {
        let mut out = self;
        out.v = -out.v;
        for i in 0..3 {
            out.g[i] = -out.g[i];
            for j in 0..3 {
                out.h[i][j] = -out.h[i][j];
            }
        }
        out
    }

    pub fn mul(self, r: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * r.v);
        for i in 0..3 {
            out.g[i] = self.g[i] * r.v + self.v * r.g[i];
        }
        for i in 0..3 {
            for j in 0..3 {
                out.h[i][j] = self.h[i][j] * r.v
                    + self.g[i] * r.g[j]
                    + self.g[j] * r.g[i]
                    + self.v * r.h[i][j];
            }
        }
        out
    }

    /// Chain rule for a scalar function with value/first/second derivative at self.v.
    fn unary(self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let mut out = Jet2::constant(f0);
        for i in 0..3 {
            out.g[i] = f1 * self.g[i];
        }
        for i in 0..3 {
            for j in 0..3 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn recip(self) -> Jet2 {
        let u = self.v;
        self.unary(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))
    }

    pub fn div(self, r: Jet2) -> Jet2 {
        self.mul(r.recip())
    }

    pub fn sin(self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.unary(s, c, -s)
    }

    pub fn cos(self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.unary(c, -s, -c)
    }

    pub fn exp(self) -> Jet2 {
        let e = self.v.exp();
        self.unary(e, e, e)
    }

    pub fn ln(self) -> Jet2 {
        let u = self.v;
        self.unary(u.ln(), 1.0 / u, -1.0 / (u * u))
    }

    pub fn sqrt(self) -> Jet2 {
        let s = self.v.sqrt();
        self.unary(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn powf(self, p: f64) -> Jet2 {
        let u = self.v;
        self.unary(u.powf(p), p * u.powf(p - 1.0), p * (p - 1.0) * u.powf(p - 2.0))
    }

    pub fn powi(self, n: i32) -> Jet2 {
        if n == 0 {
            return Jet2::constant(1.0);
        }
        let recip = n < 0;
        let mut e = n.unsigned_abs();
        let mut base = self;
        let mut acc = Jet2::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        if recip {
            acc.recip()
        } else {
            acc
        }
    }
}
