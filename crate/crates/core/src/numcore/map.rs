//! Differentiable maps between coordinate boxes and ambient space.
//!
//! A [`RealMap`] can be evaluated on plain `f64` points and on dual numbers up
//! to third order. Analytic maps implement [`Smooth`] once, generically over
//! the scalar type, and get the `RealMap` levels for free. Derived maps whose
//! evaluation internally differentiates another map (parallel charts, gauge
//! rotated lifts) implement `RealMap` directly, consuming one nesting level of
//! their base map per requested order.

use super::dual::{Dual, Dual2, Dual3, DualOf, Real};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Object-safe evaluation interface at fixed dual orders.
pub trait RealMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, p: &[f64]) -> Vec<f64>;
    fn eval_d1(&self, p: &[Dual]) -> Vec<Dual>;
    fn eval_d2(&self, p: &[Dual2]) -> Vec<Dual2>;
    fn eval_d3(&self, p: &[Dual3]) -> Vec<Dual3>;
}

/// Analytic maps, written once over a generic scalar.
pub trait Smooth: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T>;
}

impl<M: Smooth> RealMap for M {
    fn dim_in(&self) -> usize {
        Smooth::dim_in(self)
    }
    fn dim_out(&self) -> usize {
        Smooth::dim_out(self)
    }
    fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.apply(p)
    }
    fn eval_d1(&self, p: &[Dual]) -> Vec<Dual> {
        self.apply(p)
    }
    fn eval_d2(&self, p: &[Dual2]) -> Vec<Dual2> {
        self.apply(p)
    }
    fn eval_d3(&self, p: &[Dual3]) -> Vec<Dual3> {
        self.apply(p)
    }
}

/// Scalar levels at which a `RealMap` can be evaluated. Links each scalar to
/// the matching trait method so generic code can evaluate "at level T".
pub trait Level: Real {
    fn eval_map(map: &dyn RealMap, p: &[Self]) -> Vec<Self>;
}

impl Level for f64 {
    fn eval_map(map: &dyn RealMap, p: &[Self]) -> Vec<Self> {
        map.eval(p)
    }
}
impl Level for Dual {
    fn eval_map(map: &dyn RealMap, p: &[Self]) -> Vec<Self> {
        map.eval_d1(p)
    }
}
impl Level for Dual2 {
    fn eval_map(map: &dyn RealMap, p: &[Self]) -> Vec<Self> {
        map.eval_d2(p)
    }
}
impl Level for Dual3 {
    fn eval_map(map: &dyn RealMap, p: &[Self]) -> Vec<Self> {
        map.eval_d3(p)
    }
}

/// Values and first derivatives of a map at a point, at scalar level `T`.
pub struct Jet1<T> {
    pub value: Vec<T>,
    /// `columns[j][m]` = d(out_m)/d(in_j).
    pub columns: Vec<Vec<T>>,
}

/// Evaluate value and jacobian columns at level `T` by seeding one dual level.
pub fn jet1<T: Level>(map: &dyn RealMap, p: &[T]) -> Jet1<T>
where
    DualOf<T>: Level,
{
    let n = p.len();
    let seeded: Vec<DualOf<T>> = p
        .iter()
        .enumerate()
        .map(|(i, x)| DualOf::seed(x.clone(), i, n))
        .collect();
    let out = <DualOf<T> as Level>::eval_map(map, &seeded);
    let zero = T::zero();
    let value: Vec<T> = out.iter().map(|o| o.re.clone()).collect();
    let columns: Vec<Vec<T>> = (0..n)
        .map(|j| {
            out.iter()
                .map(|o| o.eps.get(j).unwrap_or(&zero).clone())
                .collect()
        })
        .collect();
    Jet1 { value, columns }
}

/// Differentiation scheme: exact forward-mode duals (default) or central
/// finite differences with step `h = eps^(1/3) * max(1, |p_j|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Dual,
    FiniteDifference,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Dual => "dual",
            Scheme::FiniteDifference => "fd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dual" => Ok(Scheme::Dual),
            "fd" => Ok(Scheme::FiniteDifference),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme '{other}' (expected 'dual' or 'fd')"
            ))),
        }
    }
}

fn fd_step(p: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 3.0) * p.abs().max(1.0)
}

fn fd_step2(p: f64) -> f64 {
    f64::EPSILON.powf(0.25) * p.abs().max(1.0)
}

/// Jacobian matrix of a map, dim_out x dim_in, with the scheme recorded.
pub struct Jacobian {
    pub matrix: DMatrix<f64>,
    pub scheme: Scheme,
}

/// First derivatives of `map` at `p`. Column j is the partial in coordinate j.
/// Non-finite output reports an invalid chart point.
pub fn jacobian(map: &dyn RealMap, p: &[f64], scheme: Scheme) -> Result<Jacobian> {
    let (n_in, n_out) = (map.dim_in(), map.dim_out());
    assert_eq!(p.len(), n_in, "point dimension mismatch");
    let mut m = DMatrix::zeros(n_out, n_in);
    match scheme {
        Scheme::Dual => {
            let jet = jet1::<f64>(map, p);
            for j in 0..n_in {
                for i in 0..n_out {
                    m[(i, j)] = jet.columns[j][i];
                }
            }
        }
        Scheme::FiniteDifference => {
            let mut q = p.to_vec();
            for j in 0..n_in {
                let h = fd_step(p[j]);
                q[j] = p[j] + h;
                let fp = map.eval(&q);
                q[j] = p[j] - h;
                let fm = map.eval(&q);
                q[j] = p[j];
                for i in 0..n_out {
                    m[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
        }
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteChart);
    }
    Ok(Jacobian { matrix: m, scheme })
}

/// Second derivatives: one symmetric `dim_in x dim_in` matrix per output
/// component. Dual scheme nests duals; fallback uses second-order central
/// differences.
pub fn hessians(map: &dyn RealMap, p: &[f64], scheme: Scheme) -> Result<Vec<DMatrix<f64>>> {
    let (n, m_out) = (map.dim_in(), map.dim_out());
    let mut hs = vec![DMatrix::zeros(n, n); m_out];
    match scheme {
        Scheme::Dual => {
            let seeded: Vec<Dual2> = p
                .iter()
                .enumerate()
                .map(|(i, &x)| DualOf::with_eps(Dual::seed(x, i, n), basis_dual(i, n)))
                .collect();
            let out = map.eval_d2(&seeded);
            let zero = Dual::zero();
            for (m, o) in out.iter().enumerate() {
                for k in 0..n {
                    let col = o.eps.get(k).unwrap_or(&zero);
                    for j in 0..n {
                        hs[m][(j, k)] = col.eps.get(j).copied().unwrap_or(0.0);
                    }
                }
            }
        }
        Scheme::FiniteDifference => {
            let f0 = map.eval(p);
            let mut q = p.to_vec();
            for j in 0..n {
                let hj = fd_step2(p[j]);
                for k in j..n {
                    let hk = fd_step2(p[k]);
                    let vals = if j == k {
                        q[j] = p[j] + hj;
                        let fp = map.eval(&q);
                        q[j] = p[j] - hj;
                        let fm = map.eval(&q);
                        q[j] = p[j];
                        (0..m_out)
                            .map(|m| (fp[m] - 2.0 * f0[m] + fm[m]) / (hj * hj))
                            .collect::<Vec<_>>()
                    } else {
                        let mut stencil = |sj: f64, sk: f64| {
                            q[j] = p[j] + sj * hj;
                            q[k] = p[k] + sk * hk;
                            let f = map.eval(&q);
                            q[j] = p[j];
                            q[k] = p[k];
                            f
                        };
                        let fpp = stencil(1.0, 1.0);
                        let fpm = stencil(1.0, -1.0);
                        let fmp = stencil(-1.0, 1.0);
                        let fmm = stencil(-1.0, -1.0);
                        (0..m_out)
                            .map(|m| (fpp[m] - fpm[m] - fmp[m] + fmm[m]) / (4.0 * hj * hk))
                            .collect::<Vec<_>>()
                    };
                    for m in 0..m_out {
                        hs[m][(j, k)] = vals[m];
                        hs[m][(k, j)] = vals[m];
                    }
                }
            }
        }
    }
    if hs.iter().any(|h| h.iter().any(|x| !x.is_finite())) {
        return Err(Error::NonFiniteChart);
    }
    Ok(hs)
}

fn basis_dual(i: usize, n: usize) -> Vec<Dual> {
    (0..n)
        .map(|j| if i == j { Dual::one() } else { Dual::zero() })
        .collect()
}

/// Determinant over a generic scalar by Gaussian elimination, pivoting on
/// primal magnitudes.
pub fn det_generic<T: Real>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut sign = 1.0;
    let mut det = T::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| {
                m[a][col]
                    .primal()
                    .abs()
                    .partial_cmp(&m[b][col].primal().abs())
                    .unwrap()
            })
            .unwrap();
        if m[pivot_row][col].primal().abs() < 1e-300 {
            return T::zero();
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            sign = -sign;
        }
        let pivot = m[col][col].clone();
        det = det * pivot.clone();
        for row in (col + 1)..n {
            let factor = m[row][col].clone() / pivot.clone();
            for c in col..n {
                let sub = factor.clone() * m[col][c].clone();
                m[row][c] = m[row][c].clone() - sub;
            }
        }
    }
    det.scale(sign)
}

/// The vector orthogonal to `n+1` vectors in R^{n+2}, oriented so that
/// `det[v_1, ..., v_{n+1}, w] = |w|^2 > 0` (generalized cross product via
/// cofactor expansion along the final column).
pub fn cross_complement<T: Real>(vs: &[Vec<T>]) -> Vec<T> {
    let k = vs.len();
    let dim = k + 1;
    debug_assert!(vs.iter().all(|v| v.len() == dim));
    (0..dim)
        .map(|m| {
            // minor: rows != m, columns = the k vectors
            let minor: Vec<Vec<T>> = (0..dim)
                .filter(|&r| r != m)
                .map(|r| vs.iter().map(|v| v[r].clone()).collect())
                .collect();
            let d = det_generic(minor);
            // cofactor sign for entry (m, dim-1) of the dim x dim matrix
            if (m + dim - 1) % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Embed2;
    impl Smooth for Embed2 {
        fn dim_in(&self) -> usize {
            2
        }
        fn dim_out(&self) -> usize {
            4
        }
        fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
            vec![p[0].clone(), p[1].clone(), T::zero(), T::zero()]
        }
    }

    struct Trig;
    impl Smooth for Trig {
        fn dim_in(&self) -> usize {
            2
        }
        fn dim_out(&self) -> usize {
            1
        }
        fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
            vec![p[0].sin() * p[1].cos() + (p[0].clone() * p[1].clone()).exp()]
        }
    }

    #[test]
    fn identity_embedding_jacobian() {
        let j = jacobian(&Embed2, &[0.3, -1.2], Scheme::Dual).unwrap();
        let expect = DMatrix::from_row_slice(4, 2, &[1., 0., 0., 1., 0., 0., 0., 0.]);
        assert_eq!(j.matrix, expect);
        assert_eq!(j.scheme, Scheme::Dual);
    }

    #[test]
    fn dual_and_fd_jacobians_agree() {
        let p = [0.7, -0.4];
        let jd = jacobian(&Trig, &p, Scheme::Dual).unwrap();
        let jf = jacobian(&Trig, &p, Scheme::FiniteDifference).unwrap();
        assert!((jd.matrix.clone() - jf.matrix).abs().max() < 1e-8);
    }

    #[test]
    fn dual_and_fd_hessians_agree() {
        let p = [0.7, -0.4];
        let hd = hessians(&Trig, &p, Scheme::Dual).unwrap();
        let hf = hessians(&Trig, &p, Scheme::FiniteDifference).unwrap();
        assert!((hd[0].clone() - hf[0].clone()).abs().max() < 1e-6);
        // symmetry of the dual-computed Hessian is exact
        assert_eq!(hd[0][(0, 1)], hd[0][(1, 0)]);
    }

    #[test]
    fn hessian_closed_form() {
        // f = exp(xy): f_xy = (1 + xy) exp(xy)
        struct ExpXY;
        impl Smooth for ExpXY {
            fn dim_in(&self) -> usize {
                2
            }
            fn dim_out(&self) -> usize {
                1
            }
            fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
                vec![(p[0].clone() * p[1].clone()).exp()]
            }
        }
        let (x, y) = (0.5, -0.3);
        let h = hessians(&ExpXY, &[x, y], Scheme::Dual).unwrap();
        let e = (x * y).exp();
        assert_relative_eq!(h[0][(0, 0)], y * y * e, max_relative = 1e-13);
        assert_relative_eq!(h[0][(0, 1)], (1.0 + x * y) * e, max_relative = 1e-13);
    }

    #[test]
    fn cross_complement_orientation() {
        // In R^3 with one vector e1: complement of {e1, e2} is e3 with
        // det[e1, e2, e3] = 1 > 0.
        let vs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let w = cross_complement(&vs);
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn det_generic_matches_nalgebra() {
        let m = vec![
            vec![2.0, -1.0, 0.5, 0.0],
            vec![1.0, 3.0, -0.2, 1.1],
            vec![0.0, 0.7, 1.9, -0.4],
            vec![-1.3, 0.2, 0.0, 2.2],
        ];
        let flat: Vec<f64> = m.iter().flatten().copied().collect();
        let na = DMatrix::from_row_slice(4, 4, &flat).determinant();
        assert_relative_eq!(det_generic(m), na, max_relative = 1e-12);
    }
}
