//! Forward-mode dual numbers with an arbitrary number of partials.
//!
//! `DualOf<T>` nests: `DualOf<f64>` carries first derivatives, `DualOf<DualOf<f64>>`
//! second derivatives, and so on. All arithmetic propagates partials exactly
//! (to machine precision) by the Leibniz and chain rules.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar types that chart maps and geometry code can be evaluated on.
///
/// Implemented by `f64` and by `DualOf<T>` for any `T: Real`. Branch decisions
/// (pivoting, sign choices) must be made on `primal()` values so that they are
/// locally constant and do not break derivative propagation.
pub trait Real:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    /// The underlying f64 value, stripping all derivative information.
    fn primal(&self) -> f64;
    /// Multiplication by an f64 constant.
    fn scale(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn abs(&self) -> Self {
        if self.primal() < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Real for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn primal(&self) -> f64 {
        *self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// A value together with its partial derivatives with respect to the chart
/// coordinates. Constants may carry an empty partials vector; binary
/// operations pad the shorter side with zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct DualOf<T> {
    pub re: T,
    pub eps: Vec<T>,
}

/// First-order dual number over f64.
pub type Dual = DualOf<f64>;
/// Second-order (dual-over-dual) number, used for second fundamental forms.
pub type Dual2 = DualOf<Dual>;
/// Third-order nesting, needed when differentiating maps that internally
/// differentiate another map (e.g. second derivatives of a parallel chart
/// whose normal comes from the base chart's jacobian).
pub type Dual3 = DualOf<Dual2>;

impl<T: Real> DualOf<T> {
    pub fn constant(re: T) -> Self {
        DualOf { re, eps: Vec::new() }
    }

    /// Seed coordinate `i` of `n`: value `re` with unit partial in slot `i`.
    pub fn seed(re: T, i: usize, n: usize) -> Self {
        let mut eps = vec![T::zero(); n];
        eps[i] = T::one();
        DualOf { re, eps }
    }

    /// Value with an explicitly supplied partials vector.
    pub fn with_eps(re: T, eps: Vec<T>) -> Self {
        DualOf { re, eps }
    }

    fn zip_eps(a: &[T], b: &[T], f: impl Fn(&T, &T) -> T) -> Vec<T> {
        let n = a.len().max(b.len());
        let zero = T::zero();
        (0..n)
            .map(|i| f(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
            .collect()
    }

    fn map_eps(&self, f: impl Fn(&T) -> T) -> Vec<T> {
        self.eps.iter().map(f).collect()
    }
}

impl<T: Real> Add for DualOf<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        DualOf {
            re: self.re.clone() + rhs.re.clone(),
            eps: Self::zip_eps(&self.eps, &rhs.eps, |a, b| a.clone() + b.clone()),
        }
    }
}

impl<T: Real> Sub for DualOf<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        DualOf {
            re: self.re.clone() - rhs.re.clone(),
            eps: Self::zip_eps(&self.eps, &rhs.eps, |a, b| a.clone() - b.clone()),
        }
    }
}

impl<T: Real> Mul for DualOf<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        // d(xy) = x dy + y dx
        let eps = Self::zip_eps(&self.eps, &rhs.eps, |da, db| {
            self.re.clone() * db.clone() + rhs.re.clone() * da.clone()
        });
        DualOf { re: self.re * rhs.re, eps }
    }
}

impl<T: Real> Div for DualOf<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // d(x/y) = (y dx - x dy) / y^2
        let denom = rhs.re.clone() * rhs.re.clone();
        let eps = Self::zip_eps(&self.eps, &rhs.eps, |da, db| {
            (rhs.re.clone() * da.clone() - self.re.clone() * db.clone()) / denom.clone()
        });
        DualOf { re: self.re / rhs.re, eps }
    }
}

impl<T: Real> Neg for DualOf<T> {
    type Output = Self;
    fn neg(self) -> Self {
        DualOf {
            re: -self.re,
            eps: self.eps.into_iter().map(|e| -e).collect(),
        }
    }
}

impl<T: Real> Real for DualOf<T> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn one() -> Self {
        Self::constant(T::one())
    }
    fn from_f64(x: f64) -> Self {
        Self::constant(T::from_f64(x))
    }
    fn primal(&self) -> f64 {
        self.re.primal()
    }
    fn scale(&self, c: f64) -> Self {
        DualOf {
            re: self.re.scale(c),
            eps: self.map_eps(|e| e.scale(c)),
        }
    }
    fn sin(&self) -> Self {
        let d = self.re.cos();
        DualOf {
            re: self.re.sin(),
            eps: self.map_eps(|e| d.clone() * e.clone()),
        }
    }
    fn cos(&self) -> Self {
        let d = -self.re.sin();
        DualOf {
            re: self.re.cos(),
            eps: self.map_eps(|e| d.clone() * e.clone()),
        }
    }
    fn exp(&self) -> Self {
        let v = self.re.exp();
        DualOf {
            re: v.clone(),
            eps: self.map_eps(|e| v.clone() * e.clone()),
        }
    }
    fn sqrt(&self) -> Self {
        let v = self.re.sqrt();
        let d = T::one() / (v.clone().scale(2.0));
        DualOf {
            re: v,
            eps: self.map_eps(|e| d.clone() * e.clone()),
        }
    }
    fn atan2(&self, x: &Self) -> Self {
        // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
        let y = self;
        let denom = x.re.clone() * x.re.clone() + y.re.clone() * y.re.clone();
        let eps = Self::zip_eps(&y.eps, &x.eps, |dy, dx| {
            (x.re.clone() * dy.clone() - y.re.clone() * dx.clone()) / denom.clone()
        });
        DualOf {
            re: y.re.atan2(&x.re),
            eps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn var(x: f64) -> Dual {
        Dual::seed(x, 0, 1)
    }

    #[test]
    fn leibniz_rule_exact() {
        let x = var(1.7);
        let y = Dual::with_eps(0.3, vec![2.5]);
        let p = x.clone() * y.clone();
        // d(xy) = x dy + y dx, bitwise
        assert_eq!(p.eps[0], 1.7 * 2.5 + 0.3 * 1.0);
        assert_eq!(p.re, 1.7 * 0.3);
    }

    #[test]
    fn elementary_function_derivatives() {
        let x = var(0.8);
        assert_relative_eq!(x.sin().eps[0], 0.8f64.cos(), max_relative = 1e-15);
        assert_relative_eq!(x.cos().eps[0], -0.8f64.sin(), max_relative = 1e-15);
        assert_relative_eq!(x.exp().eps[0], 0.8f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(x.sqrt().eps[0], 0.5 / 0.8f64.sqrt(), max_relative = 1e-15);
        // atan2(y, x) partials against the closed form
        let y = Dual::with_eps(0.4, vec![1.0]);
        let x0 = Dual::with_eps(-0.9, vec![0.0]);
        let a = y.atan2(&x0);
        assert_relative_eq!(a.re, 0.4f64.atan2(-0.9), max_relative = 1e-15);
        assert_relative_eq!(a.eps[0], -0.9 / (0.81 + 0.16), max_relative = 1e-14);
    }

    #[test]
    fn nested_dual_second_derivative() {
        // f(x) = sin(x^2): f'' = 2 cos(x^2) - 4x^2 sin(x^2)
        let x0 = 0.62;
        let x: Dual2 = DualOf::with_eps(Dual::seed(x0, 0, 1), vec![Dual::one()]);
        let f = (x.clone() * x.clone()).sin();
        let expect = 2.0 * (x0 * x0).cos() - 4.0 * x0 * x0 * (x0 * x0).sin();
        assert_relative_eq!(f.eps[0].eps[0], expect, max_relative = 1e-13);
    }

    #[test]
    fn constants_pad_partials() {
        let x = var(2.0);
        let c = Dual::constant(3.0);
        let s = x.clone() + c.clone();
        assert_eq!(s.eps, vec![1.0]);
        let p = c * x;
        assert_eq!(p.eps, vec![3.0]);
    }

    proptest! {
        #[test]
        fn division_inverts_multiplication(a in -5.0..5.0f64, b in 0.3..4.0f64,
                                           da in -2.0..2.0f64, db in -2.0..2.0f64) {
            let x = Dual::with_eps(a, vec![da]);
            let y = Dual::with_eps(b, vec![db]);
            let z = (x.clone() * y.clone()) / y.clone();
            prop_assert!((z.re - x.re).abs() < 1e-12);
            prop_assert!((z.eps[0] - x.eps[0]).abs() < 1e-11);
        }

        #[test]
        fn chain_rule_matches_finite_difference(x0 in -1.2..1.2f64) {
            // f(x) = exp(sin x) * sqrt(x^2 + 2)
            let f = |x: f64| (x.sin()).exp() * (x * x + 2.0).sqrt();
            let x = var(x0);
            let two = Dual::constant(2.0);
            let fx = x.sin().exp() * (x.clone() * x.clone() + two).sqrt();
            let h = 1e-6;
            let fd = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
            prop_assert!((fx.eps[0] - fd).abs() < 1e-7 * (1.0 + fd.abs()));
        }
    }
}
