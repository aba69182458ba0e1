//! Univariate truncated Taylor arithmetic.
//!
//! `Taylor` carries the Taylor coefficients c_k = f^(k)(x0)/k! of a function
//! around the evaluation point, truncated at order 4. Propagating these
//! through an expression yields exact derivatives up to f'''' in one pass,
//! which is what the curvature chain kappa -> kappa' -> kappa'' needs.

pub const ORDER: usize = 4;
const LEN: usize = ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor {
    pub c: [f64; LEN],
}

impl Taylor {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Taylor { c }
    }

    /// The independent variable seeded at `x`.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x;
        c[1] = 1.0;
        Taylor { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative value (k! * c_k).
    pub fn derivative(&self, k: usize) -> f64 {
        const FACT: [f64; LEN] = [1.0, 1.0, 2.0, 6.0, 24.0];
        self.c[k] * FACT[k]
    }

    /// Series of the derivative f'; the top coefficient is lost.
    pub fn derive(&self) -> Taylor {
        let mut c = [0.0; LEN];
        for k in 0..ORDER {
            c[k] = self.c[k + 1] * (k as f64 + 1.0);
        }
        Taylor { c }
    }

    pub fn add(self, rhs: Taylor) -> Taylor {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            c[k] = self.c[k] + rhs.c[k];
        }
        Taylor { c }
    }

    pub fn sub(self, rhs: Taylor) -> Taylor {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            c[k] = self.c[k] - rhs.c[k];
        }
        Taylor { c }
    }

    pub fn neg(self) -> Taylor {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            c[k] = -self.c[k];
        }
        Taylor { c }
    }

    pub fn mul(self, rhs: Taylor) -> Taylor {
        let mut c = [0.0; LEN];
        for i in 0..LEN {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..LEN - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Taylor { c }
    }

    pub fn div(self, rhs: Taylor) -> Taylor {
        let b0 = rhs.c[0];
        let mut q = [0.0; LEN];
        for k in 0..LEN {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= q[j] * rhs.c[k - j];
            }
            q[k] = acc / b0;
        }
        Taylor { c: q }
    }

    /// Composition with an outer function given by its derivative values
    /// phi^(k)(u0), k = 0..=4.
    fn compose(self, phi: [f64; LEN]) -> Taylor {
        const INV_FACT: [f64; LEN] = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        let mut d = self;
        d.c[0] = 0.0;
        let mut acc = Taylor::constant(phi[0]);
        let mut dp = d;
        for k in 1..LEN {
            let coeff = phi[k] * INV_FACT[k];
            for j in 0..LEN {
                acc.c[j] += coeff * dp.c[j];
            }
            if k + 1 < LEN {
                dp = dp.mul(d);
            }
        }
        acc
    }

    pub fn sin(self) -> Taylor {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(self) -> Taylor {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn exp(self) -> Taylor {
        let e = self.c[0].exp();
        self.compose([e, e, e, e, e])
    }

    pub fn ln(self) -> Taylor {
        let u = self.c[0];
        let u2 = u * u;
        self.compose([u.ln(), 1.0 / u, -1.0 / u2, 2.0 / (u2 * u), -6.0 / (u2 * u2)])
    }

    pub fn sqrt(self) -> Taylor {
        self.powf(0.5)
    }

    pub fn powf(self, p: f64) -> Taylor {
        let u = self.c[0];
        let mut phi = [0.0; LEN];
        let mut coeff = 1.0;
        for (k, slot) in phi.iter_mut().enumerate() {
            *slot = coeff * u.powf(p - k as f64);
            coeff *= p - k as f64;
        }
        self.compose(phi)
    }

    pub fn powi(self, n: i32) -> Taylor {
        if n == 0 {
            return Taylor::constant(1.0);
        }
        let recip = n < 0;
        let mut e = n.unsigned_abs();
        let mut base = self;
        let mut acc = Taylor::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        if recip {
            Taylor::constant(1.0).div(acc)
        } else {
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // f(x) = x^3 - 2x
        let x = Taylor::variable(1.5);
        let f = x.powi(3).sub(x.mul(Taylor::constant(2.0)));
        assert_eq!(f.value(), 1.5f64.powi(3) - 3.0);
        assert_eq!(f.derivative(1), 3.0 * 1.5 * 1.5 - 2.0);
        assert_eq!(f.derivative(2), 6.0 * 1.5);
        assert_eq!(f.derivative(3), 6.0);
        assert_eq!(f.derivative(4), 0.0);
    }

    #[test]
    fn sin_matches_known_derivatives() {
        let x = Taylor::variable(0.7);
        let f = x.sin();
        assert_close(f.derivative(0), 0.7f64.sin(), 1e-15);
        assert_close(f.derivative(1), 0.7f64.cos(), 1e-15);
        assert_close(f.derivative(2), -0.7f64.sin(), 1e-15);
        assert_close(f.derivative(3), -0.7f64.cos(), 1e-15);
        assert_close(f.derivative(4), 0.7f64.sin(), 1e-15);
    }

    #[test]
    fn quotient_and_sqrt_chain() {
        // f = 1/sqrt(1+x^2); check f' against the closed form -x (1+x^2)^{-3/2}
        let xv = 0.8;
        let x = Taylor::variable(xv);
        let f = Taylor::constant(1.0).div(x.mul(x).add(Taylor::constant(1.0)).sqrt());
        let expect = -xv * (1.0 + xv * xv).powf(-1.5);
        assert_close(f.derivative(1), expect, 1e-14);
    }

    #[test]
    fn fourth_derivative_of_log() {
        let xv = 1.3;
        let x = Taylor::variable(xv);
        let f = x.ln();
        assert_close(f.derivative(4), -6.0 / xv.powi(4), 1e-13);
    }
}
