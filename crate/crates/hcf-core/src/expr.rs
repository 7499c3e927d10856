//! Closed-form expression trees over the chart coordinates. A single tree is
//! the source of truth for every catalog metric component: it evaluates to a
//! plain complex number at a point, and lifts to a [`ComplexJet`] of any
//! order by running the same arithmetic on jets.

use std::sync::Arc;

use num_complex::Complex64;

use crate::jets::{ComplexJet, JetError};

#[derive(Debug, Clone)]
pub enum Expr {
    Const(Complex64),
    /// Coordinate z_i.
    Z(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Powi(Arc<Expr>, u32),
    Neg(Arc<Expr>),
    Conj(Arc<Expr>),
    Exp(Arc<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Arc<Expr> {
        Arc::new(Expr::Const(Complex64::new(c, 0.0)))
    }

    pub fn cconst(c: Complex64) -> Arc<Expr> {
        Arc::new(Expr::Const(c))
    }

    pub fn z(i: usize) -> Arc<Expr> {
        Arc::new(Expr::Z(i))
    }

    pub fn zbar(i: usize) -> Arc<Expr> {
        Arc::new(Expr::Conj(Self::z(i)))
    }

    pub fn add(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Add(a, b))
    }

    pub fn sub(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Sub(a, b))
    }

    pub fn mul(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Mul(a, b))
    }

    pub fn div(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Div(a, b))
    }

    pub fn powi(a: Arc<Expr>, k: u32) -> Arc<Expr> {
        Arc::new(Expr::Powi(a, k))
    }

    pub fn neg(a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Neg(a))
    }

    pub fn conj(a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Conj(a))
    }

    pub fn exp(a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Exp(a))
    }

    pub fn scale(c: f64, a: Arc<Expr>) -> Arc<Expr> {
        Self::mul(Self::constant(c), a)
    }

    /// |z|^2 = sum_i z_i zbar_i over the first `n` coordinates.
    pub fn norm_sq(n: usize) -> Arc<Expr> {
        let mut acc = Self::mul(Self::z(0), Self::zbar(0));
        for i in 1..n {
            acc = Self::add(acc, Self::mul(Self::z(i), Self::zbar(i)));
        }
        acc
    }

    /// cos of a real linear form: (exp(i f) + exp(-i f)) / 2.
    pub fn cos_of(f: Arc<Expr>) -> Arc<Expr> {
        let i = Self::cconst(Complex64::new(0.0, 1.0));
        let e1 = Self::exp(Self::mul(i.clone(), f.clone()));
        let e2 = Self::exp(Self::mul(Self::cconst(Complex64::new(0.0, -1.0)), f));
        Self::scale(0.5, Self::add(e1, e2))
    }

    /// 2 pi Re(z_i) as an expression: pi (z_i + zbar_i).
    pub fn two_pi_re(i: usize) -> Arc<Expr> {
        Expr::scale(std::f64::consts::PI, Expr::add(Expr::z(i), Expr::zbar(i)))
    }

    /// 2 pi Im(z_i) as an expression: -i pi (z_i - zbar_i).
    pub fn two_pi_im(i: usize) -> Arc<Expr> {
        Expr::mul(
            Expr::cconst(Complex64::new(0.0, -std::f64::consts::PI)),
            Expr::sub(Expr::z(i), Expr::zbar(i)),
        )
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Z(i) => z[*i],
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Div(a, b) => a.eval(z) / b.eval(z),
            Expr::Powi(a, k) => a.eval(z).powi(*k as i32),
            Expr::Neg(a) => -a.eval(z),
            Expr::Conj(a) => a.eval(z).conj(),
            Expr::Exp(a) => a.eval(z).exp(),
        }
    }

    pub fn eval_jet(&self, center: &[Complex64], order: usize) -> Result<ComplexJet, JetError> {
        match self {
            Expr::Const(c) => Ok(ComplexJet::constant(center, order, *c)),
            Expr::Z(i) => Ok(ComplexJet::coordinate(center, order, *i, true)),
            Expr::Add(a, b) => a.eval_jet(center, order)?.add(&b.eval_jet(center, order)?),
            Expr::Sub(a, b) => a.eval_jet(center, order)?.sub(&b.eval_jet(center, order)?),
            Expr::Mul(a, b) => a.eval_jet(center, order)?.mul(&b.eval_jet(center, order)?),
            Expr::Div(a, b) => a
                .eval_jet(center, order)?
                .mul(&b.eval_jet(center, order)?.invert()?),
            Expr::Powi(a, k) => {
                let base = a.eval_jet(center, order)?;
                let mut out = ComplexJet::constant(center, order, Complex64::ONE);
                for _ in 0..*k {
                    out = out.mul(&base)?;
                }
                Ok(out)
            }
            Expr::Neg(a) => Ok(a.eval_jet(center, order)?.neg()),
            Expr::Conj(a) => Ok(a.eval_jet(center, order)?.conj()),
            Expr::Exp(a) => Ok(a.eval_jet(center, order)?.exp()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_value_matches_eval() {
        // f = (1 + z zbar)^{-2} at a generic point
        let f = Expr::powi(
            Expr::div(Expr::constant(1.0), Expr::add(Expr::constant(1.0), Expr::norm_sq(1))),
            2,
        );
        let z = [Complex64::new(0.3, -0.7)];
        let jet = f.eval_jet(&z, 3).unwrap();
        assert!((jet.value() - f.eval(&z)).norm() < 1e-14);
    }

    #[test]
    fn cos_is_real_on_real_form() {
        let f = Expr::cos_of(Expr::two_pi_re(0));
        let z = [Complex64::new(0.21, 0.48)];
        let v = f.eval(&z);
        let expected = (2.0 * std::f64::consts::PI * 0.21).cos();
        assert!((v.re - expected).abs() < 1e-13);
        assert!(v.im.abs() < 1e-13);
    }

    #[test]
    fn jet_derivative_matches_finite_difference() {
        let f = Expr::div(Expr::constant(1.0), Expr::norm_sq(2));
        let z = [Complex64::new(0.9, 0.2), Complex64::new(-0.4, 0.6)];
        let jet = f.eval_jet(&z, 2).unwrap();
        let d_jet = jet.extract(&[1, 0], &[0, 0]).unwrap();
        for h in [1e-3, 1e-4] {
            // holomorphic partial: (f(z+h) - f(z-h)) / 2h with real step in z_0
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[0] += h;
            zm[0] -= h;
            let mut zpi = z.to_vec();
            let mut zmi = z.to_vec();
            zpi[0] += Complex64::new(0.0, h);
            zmi[0] -= Complex64::new(0.0, h);
            // treat f as function of (x,y); d/dz = (d/dx - i d/dy)/2
            let fx = (f.eval(&zp) - f.eval(&zm)) / (2.0 * h);
            let fy = (f.eval(&zpi) - f.eval(&zmi)) / (2.0 * h);
            let dz = (fx - Complex64::new(0.0, 1.0) * fy) / 2.0;
            assert!((dz - d_jet).norm() < 100.0 * h * h);
        }
    }
}
