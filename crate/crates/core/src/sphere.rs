//! Parametrized hypersurfaces of the unit sphere S^{n+1}(1) in R^{n+2}:
//! unit normals, fundamental forms, principal data, and parallel families.

use crate::error::{Error, Result};
use crate::numcore::dual::{Dual, Dual2, Dual3, DualOf};
use crate::numcore::eig::{generalized_sym_eig, SymEigResult};
use crate::numcore::map::{cross_complement, hessians, jacobian, jet1, Level, RealMap, Scheme};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Axis-aligned open box in R^n, the chart domain.
#[derive(Clone, Debug)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(hi.iter()).all(|(a, b)| a < b));
        BoxDomain { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(x, (a, b))| a < x && x < b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Uniform sample, shrunk slightly away from the boundary.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(&a, &b)| {
                let pad = 0.05 * (b - a);
                rng.random_range(a + pad..b - pad)
            })
            .collect()
    }

    /// Regular lattice with `counts[i]` nodes per axis, inset from the boundary.
    pub fn lattice(&self, counts: &[usize]) -> Vec<Vec<f64>> {
        assert_eq!(counts.len(), self.dim());
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| {
                let (a, b) = (self.lo[i], self.hi[i]);
                let pad = 0.02 * (b - a);
                let (a, b) = (a + pad, b - pad);
                let m = counts[i].max(2);
                (0..m)
                    .map(|k| a + (b - a) * k as f64 / (m - 1) as f64)
                    .collect()
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for p in &points {
                for &x in axis {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }
}

/// Where the unit normal of a patch comes from.
enum NormalSource {
    /// Completed from the chart jacobian by the oriented cross product.
    Cross,
    /// An explicit normal map (parallel patches, reconstructed patches).
    Map(Arc<dyn RealMap>),
}

/// A chart map from a box in R^n into S^{n+1}(1) together with its
/// orientation convention.
pub struct HypersurfacePatch {
    n: usize,
    domain: BoxDomain,
    chart: Arc<dyn RealMap>,
    orientation_flipped: bool,
    normal: NormalSource,
    /// Chart whose first-fundamental form normalizes immersion margins.
    /// `None` means the patch is its own reference.
    metric_ref: Option<Arc<dyn RealMap>>,
}

/// Metric, second fundamental form and diagonalized shape-operator data at a
/// chart point. `lambdas` sorted descending; `directions` are G-orthonormal
/// chart-coordinate vectors with `second_form e_j = lambda_j G e_j`.
#[derive(Clone, Debug)]
pub struct PrincipalData {
    pub metric: DMatrix<f64>,
    pub second_form: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub directions: Vec<DVector<f64>>,
    /// Disagreement between the two second-form routes <dda, b> and -<db, da>.
    pub second_form_residual: f64,
}

/// Tolerance for the cross-check between the two second-form computations.
pub const SECOND_FORM_TOL: f64 = 1e-6;

impl HypersurfacePatch {
    pub fn new(n: usize, domain: BoxDomain, chart: Arc<dyn RealMap>) -> Self {
        assert_eq!(domain.dim(), n);
        assert_eq!(chart.dim_in(), n);
        assert_eq!(chart.dim_out(), n + 2);
        HypersurfacePatch {
            n,
            domain,
            chart,
            orientation_flipped: false,
            normal: NormalSource::Cross,
            metric_ref: None,
        }
    }

    pub fn with_orientation_flipped(mut self, flipped: bool) -> Self {
        self.orientation_flipped = flipped;
        self
    }

    pub fn with_normal_map(mut self, normal: Arc<dyn RealMap>) -> Self {
        self.normal = NormalSource::Map(normal);
        self
    }

    pub fn with_metric_reference(mut self, reference: Arc<dyn RealMap>) -> Self {
        self.metric_ref = Some(reference);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn chart(&self) -> &Arc<dyn RealMap> {
        &self.chart
    }

    pub fn orientation_flipped(&self) -> bool {
        self.orientation_flipped
    }

    /// Position a(p) in R^{n+2}.
    pub fn position(&self, p: &[f64]) -> Vec<f64> {
        self.chart.eval(p)
    }

    /// A copy of this patch with the opposite normal orientation.
    pub fn flipped(&self) -> Self {
        HypersurfacePatch {
            n: self.n,
            domain: self.domain.clone(),
            chart: self.chart.clone(),
            orientation_flipped: !self.orientation_flipped,
            normal: match &self.normal {
                NormalSource::Cross => NormalSource::Cross,
                NormalSource::Map(m) => NormalSource::Map(m.clone()),
            },
            metric_ref: self.metric_ref.clone(),
        }
    }

    /// Unit normal at scalar level T (dual levels give normal derivatives).
    pub fn normal_at<T: Level>(&self, p: &[T]) -> Result<Vec<T>>
    where
        DualOf<T>: Level,
    {
        let b = match &self.normal {
            NormalSource::Cross => cross_normal::<T>(self.chart.as_ref(), p)?,
            NormalSource::Map(m) => T::eval_map(m.as_ref(), p),
        };
        Ok(if self.orientation_flipped {
            b.into_iter().map(|x| -x).collect()
        } else {
            b
        })
    }
}

/// Oriented unit normal by cross-product completion of the chart frame:
/// orthogonal to a(p) and to all chart partials, with
/// det[da_1, ..., da_n, a, b] > 0.
fn cross_normal<T: Level>(chart: &dyn RealMap, p: &[T]) -> Result<Vec<T>>
where
    DualOf<T>: Level,
{
    let jet = jet1::<T>(chart, p);
    let mut frame: Vec<Vec<T>> = jet.columns;
    frame.push(jet.value);
    let raw = cross_complement(&frame);
    let norm2 = raw
        .iter()
        .fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
    if norm2.primal() < 1e-24 {
        return Err(Error::NotImmersion);
    }
    let inv = T::one() / norm2.sqrt();
    Ok(raw.into_iter().map(|x| x * inv.clone()).collect())
}

/// Unit normal b at a chart point: <b, a> = 0, <b, da_j> = 0, |b| = 1,
/// orientation fixed by the determinant convention (flipped when the patch's
/// orientation flag is set).
pub fn unit_normal(patch: &HypersurfacePatch, p: &[f64]) -> Result<Vec<f64>> {
    patch.normal_at::<f64>(p)
}

/// First and second fundamental forms and principal curvatures/directions.
///
/// The second form is computed both as `<dda_jk, b>` and as `-<db_j, da_k>`;
/// the two must agree within [`SECOND_FORM_TOL`].
pub fn principal_data(
    patch: &HypersurfacePatch,
    p: &[f64],
    scheme: Scheme,
) -> Result<PrincipalData> {
    let n = patch.n;
    let jac = jacobian(patch.chart.as_ref(), p, scheme)?.matrix;
    let metric = jac.transpose() * &jac;

    let b = patch.normal_at::<f64>(p)?;
    let bvec = DVector::from_vec(b.clone());

    // Route 1: Hessian of the chart contracted with b.
    let hs = hessians(patch.chart.as_ref(), p, scheme)?;
    let mut h1 = DMatrix::zeros(n, n);
    for (m, hm) in hs.iter().enumerate() {
        h1 += hm * b[m];
    }
    let h1 = (&h1 + h1.transpose()) * 0.5;

    // Route 2: -<db_j, da_k> from the derivative of the normal field.
    let db = normal_jacobian(patch, p, scheme)?;
    let h2 = -(db.transpose() * &jac);
    let h2 = (&h2 + h2.transpose()) * 0.5;

    let residual = (&h1 - &h2).abs().max();
    if residual > SECOND_FORM_TOL {
        return Err(Error::SecondFormMismatch {
            residual,
            tol: SECOND_FORM_TOL,
        });
    }

    let eig = generalized_sym_eig(&h1, &metric).map_err(|e| match e {
        Error::DegenerateMetric { .. } => Error::NotImmersion,
        other => other,
    })?;
    let _ = &bvec;
    Ok(PrincipalData {
        metric,
        second_form: h1,
        lambdas: eig.eigenvalues,
        directions: eig.eigenvectors,
        second_form_residual: residual,
    })
}

fn normal_jacobian(patch: &HypersurfacePatch, p: &[f64], scheme: Scheme) -> Result<DMatrix<f64>> {
    let n = patch.n;
    let dim = n + 2;
    match scheme {
        Scheme::Dual => {
            let seeded: Vec<Dual> = p
                .iter()
                .enumerate()
                .map(|(i, &x)| Dual::seed(x, i, n))
                .collect();
            let b = patch.normal_at::<Dual>(&seeded)?;
            let mut m = DMatrix::zeros(dim, n);
            for (i, bi) in b.iter().enumerate() {
                for j in 0..n {
                    m[(i, j)] = bi.eps.get(j).copied().unwrap_or(0.0);
                }
            }
            Ok(m)
        }
        Scheme::FiniteDifference => {
            let mut m = DMatrix::zeros(dim, n);
            let mut q = p.to_vec();
            for j in 0..n {
                let h = f64::EPSILON.powf(1.0 / 3.0) * p[j].abs().max(1.0);
                q[j] = p[j] + h;
                let bp = patch.normal_at::<f64>(&q)?;
                q[j] = p[j] - h;
                let bm = patch.normal_at::<f64>(&q)?;
                q[j] = p[j];
                for i in 0..dim {
                    m[(i, j)] = (bp[i] - bm[i]) / (2.0 * h);
                }
            }
            Ok(m)
        }
    }
}

/// Chart of the parallel hypersurface family: the lift rotation e^{it}
/// acting on (a + ib)/sqrt2, i.e. a_t = cos(t) a - sin(t) b with unit normal
/// b_t = sin(t) a + cos(t) b. Shares the Gauss map of the base patch for all t.
struct ParallelChart {
    base: Arc<HypersurfacePatch>,
    t: f64,
    /// false -> emit a_t, true -> emit b_t
    emit_normal: bool,
}

impl ParallelChart {
    fn go<T: Level>(&self, p: &[T]) -> Vec<T>
    where
        DualOf<T>: Level,
    {
        let a = T::eval_map(self.base.chart.as_ref(), p);
        let b = self
            .base
            .normal_at::<T>(p)
            .expect("parallel chart evaluated at a non-immersion point of its base");
        let (c, s) = (self.t.cos(), self.t.sin());
        if self.emit_normal {
            a.iter()
                .zip(b.iter())
                .map(|(ai, bi)| ai.scale(s) + bi.scale(c))
                .collect()
        } else {
            a.iter()
                .zip(b.iter())
                .map(|(ai, bi)| ai.scale(c) - bi.scale(s))
                .collect()
        }
    }
}

impl RealMap for ParallelChart {
    fn dim_in(&self) -> usize {
        self.base.n
    }
    fn dim_out(&self) -> usize {
        self.base.n + 2
    }
    fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.go::<f64>(p)
    }
    fn eval_d1(&self, p: &[Dual]) -> Vec<Dual> {
        self.go::<Dual>(p)
    }
    fn eval_d2(&self, p: &[Dual2]) -> Vec<Dual2> {
        self.go::<Dual2>(p)
    }
    fn eval_d3(&self, _p: &[Dual3]) -> Vec<Dual3> {
        unimplemented!("third-order evaluation of a parallel chart needs fourth-order base data")
    }
}

/// The parallel hypersurface at distance t along the unit normal, carrying
/// its analytic normal map. May fail to be an immersion for some t; callers
/// detect that through `immersion_margin` or `principal_data`.
pub fn parallel_patch(patch: &Arc<HypersurfacePatch>, t: f64) -> HypersurfacePatch {
    let chart = Arc::new(ParallelChart {
        base: patch.clone(),
        t,
        emit_normal: false,
    });
    let normal = Arc::new(ParallelChart {
        base: patch.clone(),
        t,
        emit_normal: true,
    });
    HypersurfacePatch::new(patch.n, patch.domain.clone(), chart)
        .with_normal_map(normal)
        .with_metric_reference(patch.chart.clone())
}

/// Smallest singular value of the chart jacobian at p, measured against the
/// reference metric (the base patch metric for parallel patches, the patch's
/// own metric otherwise). Zero means rank-deficient.
pub fn immersion_margin(patch: &HypersurfacePatch, p: &[f64]) -> Result<f64> {
    let jac = jacobian(patch.chart.as_ref(), p, Scheme::Dual)?.matrix;
    let g_ref = match &patch.metric_ref {
        Some(reference) => {
            let jr = jacobian(reference.as_ref(), p, Scheme::Dual)?.matrix;
            jr.transpose() * jr
        }
        None => jac.transpose() * &jac,
    };
    let chol = match g_ref.cholesky() {
        Some(c) => c,
        None => return Ok(0.0),
    };
    let l_inv_t = match chol.l().try_inverse() {
        Some(li) => li.transpose(),
        None => return Ok(0.0),
    };
    let normalized = jac * l_inv_t;
    let svd = normalized.svd(false, false);
    Ok(svd.singular_values.min())
}

/// Re-diagonalized principal data aligned to a previous frame (for sweeps
/// across umbilic points).
pub fn principal_data_aligned(
    patch: &HypersurfacePatch,
    p: &[f64],
    scheme: Scheme,
    prev: &[DVector<f64>],
) -> Result<PrincipalData> {
    let mut data = principal_data(patch, p, scheme)?;
    let aligned = crate::numcore::eig::align_to_previous(
        &SymEigResult {
            eigenvalues: data.lambdas.clone(),
            eigenvectors: data.directions.clone(),
        },
        prev,
        &data.metric,
        1e-9,
    );
    data.directions = aligned.eigenvectors;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clifford(rho: f64) -> Arc<HypersurfacePatch> {
        Arc::new(catalog::clifford_torus(rho).unwrap().patch)
    }

    #[test]
    fn great_sphere_normal_constant() {
        let entry = catalog::great_sphere(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = entry.patch.domain().sample(&mut rng);
            let b = unit_normal(&entry.patch, &p).unwrap();
            let a = entry.patch.position(&p);
            assert_relative_eq!(b[3].abs(), 1.0, epsilon = 1e-12);
            assert!(b[..3].iter().all(|x| x.abs() < 1e-12));
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn clifford_normal_closed_form() {
        // at (0,0), rho = pi/4: b = (1/sqrt2, 0, -1/sqrt2, 0)
        let patch = clifford(std::f64::consts::FRAC_PI_4);
        let b = unit_normal(&patch, &[0.0, 0.0]).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_relative_eq!(b[0], s, epsilon = 1e-14);
        assert_relative_eq!(b[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(b[2], -s, epsilon = 1e-14);
        assert_relative_eq!(b[3], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn geodesic_sphere_normal_orthogonality() {
        let rho = std::f64::consts::FRAC_PI_4;
        let entry = catalog::geodesic_sphere(2, rho).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let p = entry.patch.domain().sample(&mut rng);
            let b = unit_normal(&entry.patch, &p).unwrap();
            let a = entry.patch.position(&p);
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!(dot.abs() < 1e-12);
            let nrm: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_relative_eq!(nrm, 1.0, epsilon = 1e-12);
            // closed form: +- (cos rho * radial - sin rho * pole)
            let radial: Vec<f64> = a[..3].iter().map(|x| x / rho.sin()).collect();
            let expect: Vec<f64> = radial
                .iter()
                .map(|q| -rho.cos() * q)
                .chain([rho.sin()])
                .collect();
            let diff: f64 = b
                .iter()
                .zip(&expect)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let diff_neg: f64 = b
                .iter()
                .zip(&expect)
                .map(|(x, y)| (x + y).abs())
                .fold(0.0, f64::max);
            assert!(diff.min(diff_neg) < 1e-12);
        }
    }

    #[test]
    fn great_sphere_totally_geodesic() {
        let entry = catalog::great_sphere(2).unwrap();
        let data = principal_data(&entry.patch, &[1.1, 0.4], Scheme::Dual).unwrap();
        for l in &data.lambdas {
            assert!(l.abs() < 1e-10);
        }
    }

    #[test]
    fn geodesic_sphere_constant_curvature() {
        let rho = std::f64::consts::FRAC_PI_3;
        let entry = catalog::geodesic_sphere(2, rho).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = entry.patch.domain().sample(&mut rng);
            let data = principal_data(&entry.patch, &p, Scheme::Dual).unwrap();
            for l in &data.lambdas {
                assert_relative_eq!(*l, 1.0 / rho.tan(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn clifford_principal_curvatures() {
        let patch = clifford(std::f64::consts::FRAC_PI_4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let p = patch.domain().sample(&mut rng);
            let data = principal_data(&patch, &p, Scheme::Dual).unwrap();
            assert_relative_eq!(data.lambdas[0], 1.0, epsilon = 1e-9);
            assert_relative_eq!(data.lambdas[1], -1.0, epsilon = 1e-9);
            // shape-operator relation H e_j = lambda_j G e_j
            for (l, v) in data.lambdas.iter().zip(&data.directions) {
                let lhs = &data.second_form * v;
                let rhs = &data.metric * v * *l;
                assert!((lhs - rhs).abs().max() < 1e-9);
            }
        }
    }

    #[test]
    fn orientation_flip_negates_lambdas() {
        let patch = clifford(0.6);
        let flipped = patch.flipped();
        let p = [0.3, -0.8];
        let d0 = principal_data(&patch, &p, Scheme::Dual).unwrap();
        let d1 = principal_data(&flipped, &p, Scheme::Dual).unwrap();
        let b0 = unit_normal(&patch, &p).unwrap();
        let b1 = unit_normal(&flipped, &p).unwrap();
        for (x, y) in b0.iter().zip(&b1) {
            assert_relative_eq!(*x, -y, epsilon = 1e-14);
        }
        let mut neg: Vec<f64> = d0.lambdas.iter().map(|l| -l).collect();
        neg.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (x, y) in d1.lambdas.iter().zip(&neg) {
            assert_relative_eq!(*x, *y, epsilon = 1e-9);
        }
    }

    #[test]
    fn parallel_identity_at_zero() {
        let patch = clifford(std::f64::consts::FRAC_PI_4);
        let par = parallel_patch(&patch, 0.0);
        let p = [0.5, 1.2];
        let a0 = patch.position(&p);
        let a1 = par.position(&p);
        for (x, y) in a0.iter().zip(&a1) {
            assert_relative_eq!(*x, *y, epsilon = 1e-15);
        }
        let b0 = unit_normal(&patch, &p).unwrap();
        let b1 = unit_normal(&par, &p).unwrap();
        for (x, y) in b0.iter().zip(&b1) {
            assert_relative_eq!(*x, *y, epsilon = 1e-15);
        }
    }

    #[test]
    fn parallel_clifford_shifts_rho() {
        // rho = pi/4, t = pi/6: curvatures cot(5pi/12), cot(11pi/12)
        let patch = clifford(std::f64::consts::FRAC_PI_4);
        let t = std::f64::consts::FRAC_PI_6;
        let par = parallel_patch(&patch, t);
        let p = [0.7, -0.2];
        let data = principal_data(&par, &p, Scheme::Dual).unwrap();
        assert_relative_eq!(data.lambdas[0], 1.0 / (5.0 * std::f64::consts::PI / 12.0).tan(), epsilon = 1e-9);
        assert_relative_eq!(data.lambdas[1], 1.0 / (11.0 * std::f64::consts::PI / 12.0).tan(), epsilon = 1e-9);
        // |a_t| = 1 pointwise
        let a = par.position(&p);
        let nrm: f64 = a.iter().map(|x| x * x).sum::<f64>();
        assert_relative_eq!(nrm, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn parallel_geodesic_reaches_great_sphere() {
        let rho = std::f64::consts::FRAC_PI_4;
        let entry = catalog::geodesic_sphere(2, rho).unwrap();
        let patch = Arc::new(entry.patch);
        let par = parallel_patch(&patch, std::f64::consts::FRAC_PI_4);
        let data = principal_data(&par, &[1.0, 0.5], Scheme::Dual).unwrap();
        for l in &data.lambdas {
            assert!(l.abs() < 1e-9, "lambda = {l}");
        }
    }

    #[test]
    fn parallel_group_law() {
        let patch = clifford(0.7);
        let (s, t) = (0.22, -0.41);
        let ps = Arc::new(parallel_patch(&patch, s));
        let pst = parallel_patch(&ps, t);
        let direct = parallel_patch(&patch, s + t);
        let p = [1.0, -1.3];
        let a1 = pst.position(&p);
        let a2 = direct.position(&p);
        for (x, y) in a1.iter().zip(&a2) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
        let b1 = unit_normal(&pst, &p).unwrap();
        let b2 = unit_normal(&direct, &p).unwrap();
        for (x, y) in b1.iter().zip(&b2) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn parallel_lambda_law() {
        // lambda of parallel(a, t) = cot(arccot(lambda) + t)
        let patch = clifford(0.6);
        let t = 0.3;
        let par = parallel_patch(&patch, t);
        let p = [0.4, 0.9];
        let base = principal_data(&patch, &p, Scheme::Dual).unwrap();
        let shifted = principal_data(&par, &p, Scheme::Dual).unwrap();
        let mut expect: Vec<f64> = base
            .lambdas
            .iter()
            .map(|&l| 1.0 / (1.0f64.atan2(l) + t).tan())
            .collect();
        expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (x, y) in shifted.lambdas.iter().zip(&expect) {
            assert_relative_eq!(*x, *y, epsilon = 1e-8);
        }
    }

    #[test]
    fn margin_positive_on_base_and_vanishing_at_degeneracy() {
        let patch = clifford(std::f64::consts::FRAC_PI_4);
        let p = [0.1, 0.2];
        assert!(immersion_margin(&patch, &p).unwrap() > 0.9);
        // theta_1 + t = pi at t = 3pi/4 for rho = pi/4
        let degenerate = parallel_patch(&patch, 3.0 * std::f64::consts::FRAC_PI_4);
        assert!(immersion_margin(&degenerate, &p).unwrap() < 1e-12);
        // margin lower bound ~ min |sin(theta_j + t)| / sin(theta_j) at benign t
        let t = std::f64::consts::FRAC_PI_6;
        let par = parallel_patch(&patch, t);
        let m = immersion_margin(&par, &p).unwrap();
        let theta = [std::f64::consts::FRAC_PI_4, 3.0 * std::f64::consts::FRAC_PI_4];
        let predict = theta
            .iter()
            .map(|th| (th + t).sin().abs() / th.sin())
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(m, predict, max_relative = 1e-6);
    }

    #[test]
    fn second_form_routes_agree_across_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for entry in catalog::acceptance_entries().unwrap() {
            for _ in 0..10 {
                let p = entry.patch.domain().sample(&mut rng);
                let data = principal_data(&entry.patch, &p, Scheme::Dual).unwrap();
                assert!(
                    data.second_form_residual <= 1e-6,
                    "{}: residual {}",
                    entry.name,
                    data.second_form_residual
                );
            }
        }
    }

    #[test]
    fn fd_scheme_matches_dual_scheme() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let entry = catalog::geodesic_sphere(2, 0.9).unwrap();
        for _ in 0..50 {
            let p = entry.patch.domain().sample(&mut rng);
            let jd = jacobian(entry.patch.chart().as_ref(), &p, Scheme::Dual)
                .unwrap()
                .matrix;
            let jf = jacobian(entry.patch.chart().as_ref(), &p, Scheme::FiniteDifference)
                .unwrap()
                .matrix;
            assert!((jd - jf).abs().max() <= 1e-6);
        }
    }
}
