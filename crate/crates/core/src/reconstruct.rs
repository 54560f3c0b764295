//! The converse direction: from a Lagrangian immersion into the quadric,
//! given as an arbitrary (possibly non-horizontal) lift into the Stiefel
//! manifold, produce horizontal lifts by integrating the connection form,
//! select non-degenerate parameters t, and emit the family of hypersurfaces
//! whose Gauss map it is.

use crate::error::{Error, Result};
use crate::gaussmap::{angles_from_lift_frame, dist_to_pi_grid};
use crate::numcore::cvec::{self, herm, re_inner, CVec};
use crate::numcore::dual::{Dual, Dual2, Dual3, DualOf, Real};
use crate::numcore::map::{jet1, Level, RealMap};
use crate::quadric::StiefelPoint;
use crate::sphere::{BoxDomain, HypersurfacePatch};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// Default tolerance on closed-loop integrals of the connection form.
pub const LOOP_TOL: f64 = 1e-6;
/// Angles theta_j + t closer than this to a multiple of pi make t degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-3;
/// Lagrangian residual bound for valid input lifts.
pub const LAGRANGIAN_TOL: f64 = 1e-8;

/// A Lagrangian immersion given through a lift map into the Stiefel manifold
/// (interleaved complex output), not necessarily horizontal.
pub struct LagrangianPatch {
    pub n: usize,
    pub domain: BoxDomain,
    pub lift: Arc<dyn RealMap>,
    pub base_point: Vec<f64>,
}

impl LagrangianPatch {
    pub fn new(
        n: usize,
        domain: BoxDomain,
        lift: Arc<dyn RealMap>,
        base_point: Vec<f64>,
    ) -> Result<Self> {
        if lift.dim_in() != n || lift.dim_out() != 2 * (n + 2) {
            return Err(Error::InvalidParameter(format!(
                "lift must map R^{n} to R^{} (interleaved complex pairs)",
                2 * (n + 2)
            )));
        }
        if !domain.contains(&base_point) {
            return Err(Error::InvalidParameter(
                "base point lies outside the chart domain".to_string(),
            ));
        }
        Ok(LagrangianPatch {
            n,
            domain,
            lift,
            base_point,
        })
    }

    /// Stiefel-constraint deviation and Lagrangian residual at one point.
    pub fn residuals_at(&self, p: &[f64]) -> Result<(f64, f64)> {
        let z = cvec::from_interleaved(&self.lift.eval(p));
        let stiefel = (re_inner(&z, &z) - 1.0)
            .abs()
            .max(cvec::bil(&z, &z).norm());
        let jet = jet1::<f64>(self.lift.as_ref(), p);
        let cols: Vec<CVec> = jet.columns.iter().map(|c| cvec::from_interleaved(c)).collect();
        // horizontal parts of the lift differentials
        let iz = cvec::times_i(&z);
        let horiz: Vec<CVec> = cols
            .iter()
            .map(|c| c - &iz * Complex64::from(re_inner(c, &iz)))
            .collect();
        let mut lagr: f64 = 0.0;
        for j in 0..self.n {
            let nj = cvec::norm(&horiz[j]).max(1e-300);
            for k in 0..self.n {
                let nk = cvec::norm(&horiz[k]).max(1e-300);
                lagr = lagr
                    .max(re_inner(&cvec::times_i(&horiz[j]), &horiz[k]).abs() / (nj * nk));
            }
        }
        Ok((stiefel, lagr))
    }

    /// Validate the defining invariants on a sample of points.
    pub fn validate(&self, points: &[Vec<f64>]) -> Result<()> {
        for p in points {
            let z = cvec::from_interleaved(&self.lift.eval(p));
            StiefelPoint::new(z)?;
            let (_, lagr) = self.residuals_at(p)?;
            if lagr > LAGRANGIAN_TOL {
                return Err(Error::NotLagrangian {
                    residual: lagr,
                    tol: LAGRANGIAN_TOL,
                });
            }
        }
        Ok(())
    }
}

/// Connection form of the lift at p: omega_j = Im herm(d_j z, z), at any
/// scalar level.
fn omega_at<S: Level>(lift: &dyn RealMap, p: &[S]) -> Vec<S>
where
    DualOf<S>: Level,
{
    let jet = jet1::<S>(lift, p);
    let m = jet.value.len() / 2;
    jet.columns
        .iter()
        .map(|col| {
            let mut acc = S::zero();
            for k in 0..m {
                // Im[(w_re + i w_im)(z_re - i z_im)] = w_im z_re - w_re z_im
                acc = acc + col[2 * k + 1].clone() * jet.value[2 * k].clone()
                    - col[2 * k].clone() * jet.value[2 * k + 1].clone();
            }
            acc
        })
        .collect()
}

/// The integrated gauge function phi with phi(base) = 0 and differential
/// d phi = -omega, realized as quadrature values along canonical axis-aligned
/// polylines plus the analytic differential at dual levels.
pub struct PhiField {
    lift: Arc<dyn RealMap>,
    base_point: Vec<f64>,
    /// Simpson subintervals per unit leg, per axis.
    steps: Vec<usize>,
}

impl PhiField {
    /// Integrate -omega_axis over the straight leg `coord axis: from -> to`
    /// with the other coordinates frozen at `point`.
    fn leg_integral(&self, point: &[f64], axis: usize, from: f64, to: f64) -> f64 {
        let m = self.steps[axis].max(2) & !1usize; // even
        let m = m.max(2);
        let h = (to - from) / m as f64;
        let mut q = point.to_vec();
        let mut sum = 0.0;
        for k in 0..=m {
            q[axis] = from + h * k as f64;
            let w = omega_at::<f64>(self.lift.as_ref(), &q)[axis];
            let weight = if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += weight * w;
        }
        -(sum * h / 3.0)
    }

    /// Quadrature value of phi at p (axis-by-axis polyline from the base point).
    pub fn value(&self, p: &[f64]) -> f64 {
        let mut q = self.base_point.clone();
        let mut phi = 0.0;
        for axis in 0..p.len() {
            phi += self.leg_integral(&q, axis, self.base_point[axis], p[axis]);
            q[axis] = p[axis];
        }
        phi
    }
}

/// Scalar levels at which the gauge function can be evaluated: the value is
/// quadrature, each additional dual level consumes one level of the lift
/// through the identity d phi = -omega.
pub trait PhiLevel: Level {
    fn phi(field: &PhiField, p: &[Self]) -> Self;
}

impl PhiLevel for f64 {
    fn phi(field: &PhiField, p: &[Self]) -> Self {
        field.value(p)
    }
}

impl<S> PhiLevel for DualOf<S>
where
    S: PhiLevel,
    DualOf<S>: Level,
{
    fn phi(field: &PhiField, p: &[Self]) -> Self {
        let p_re: Vec<S> = p.iter().map(|x| x.re.clone()).collect();
        let value = S::phi(field, &p_re);
        let omega = omega_at::<S>(field.lift.as_ref(), &p_re);
        let width = p.iter().map(|x| x.eps.len()).max().unwrap_or(0);
        let eps = (0..width)
            .map(|s| {
                let mut acc = S::zero();
                for (j, w) in omega.iter().enumerate() {
                    if let Some(e) = p[j].eps.get(s) {
                        acc = acc - w.clone() * e.clone();
                    }
                }
                acc
            })
            .collect();
        DualOf { re: value, eps }
    }
}

/// The gauge-corrected lift e^{i (phi(p) + t)} z(p).
pub struct PhaseRotatedLift {
    lift: Arc<dyn RealMap>,
    phi: Arc<PhiField>,
    extra_phase: f64,
}

impl PhaseRotatedLift {
    fn go<T: PhiLevel>(&self, p: &[T]) -> Vec<T> {
        let vals = T::eval_map(self.lift.as_ref(), p);
        let phi = T::phi(&self.phi, p) + T::from_f64(self.extra_phase);
        let (pc, ps) = (phi.cos(), phi.sin());
        let mut out = Vec::with_capacity(vals.len());
        for c in vals.chunks_exact(2) {
            out.push(c[0].clone() * pc.clone() - c[1].clone() * ps.clone());
            out.push(c[0].clone() * ps.clone() + c[1].clone() * pc.clone());
        }
        out
    }
}

impl RealMap for PhaseRotatedLift {
    fn dim_in(&self) -> usize {
        self.lift.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.lift.dim_out()
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
    fn eval_d3(&self, p: &[Dual3]) -> Vec<Dual3> {
        self.go::<Dual3>(p)
    }
}

/// A lift multiplied by a position-dependent phase e^{i sigma(p)}; used to
/// gauge-scramble horizontal lifts in round-trip checks.
pub struct PhaseScrambledLift {
    pub inner: Arc<dyn RealMap>,
    pub sigma: Arc<dyn RealMap>,
}

impl PhaseScrambledLift {
    fn go<T: Level>(&self, p: &[T]) -> Vec<T> {
        let vals = T::eval_map(self.inner.as_ref(), p);
        let sigma = T::eval_map(self.sigma.as_ref(), p).pop().expect("scalar gauge");
        let (pc, ps) = (sigma.cos(), sigma.sin());
        let mut out = Vec::with_capacity(vals.len());
        for c in vals.chunks_exact(2) {
            out.push(c[0].clone() * pc.clone() - c[1].clone() * ps.clone());
            out.push(c[0].clone() * ps.clone() + c[1].clone() * pc.clone());
        }
        out
    }
}

impl RealMap for PhaseScrambledLift {
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.inner.dim_out()
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
    fn eval_d3(&self, p: &[Dual3]) -> Vec<Dual3> {
        self.go::<Dual3>(p)
    }
}

/// The acceptance-sweep gauge scramble: sigma(p) = c * p_0 * p_1 (or c * p_0
/// in one dimension).
pub struct ScrambleSigma {
    pub n: usize,
    pub coef: f64,
}

impl crate::numcore::map::Smooth for ScrambleSigma {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        let v = if self.n >= 2 {
            p[0].clone() * p[1].clone()
        } else {
            p[0].clone()
        };
        vec![v.scale(self.coef)]
    }
}

/// sigma(p) = amp * sin(p_0); the gauge-scramble of the worked example.
pub struct SineSigma {
    pub n: usize,
    pub amp: f64,
}

impl crate::numcore::map::Smooth for SineSigma {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        vec![p[0].sin().scale(self.amp)]
    }
}

/// Output of the gauge integration.
pub struct HorizontalizationResult {
    pub phi: Arc<PhiField>,
    /// The horizontal lift f0 = e^{i phi} z.
    pub lift0: Arc<PhaseRotatedLift>,
    /// Max |closed-loop integral of omega| over the test loops.
    pub loop_residual: f64,
    /// Max finite-difference horizontality residual of lift0 at sample points.
    pub horizontality_residual: f64,
    domain: BoxDomain,
}

/// Integrate the connection form into a gauge function and return the
/// horizontal lift. `grid_counts` sets the per-axis quadrature resolution and
/// the sample lattice for residual checks. Fails with `NotLagrangian` when
/// closed-loop integrals of omega exceed the tolerance (non-Lagrangian input
/// or under-resolved quadrature).
pub fn horizontalize(
    patch: &LagrangianPatch,
    grid_counts: &[usize],
) -> Result<HorizontalizationResult> {
    horizontalize_with_tol(patch, grid_counts, LOOP_TOL)
}

pub fn horizontalize_with_tol(
    patch: &LagrangianPatch,
    grid_counts: &[usize],
    loop_tol: f64,
) -> Result<HorizontalizationResult> {
    if grid_counts.is_empty() || grid_counts.iter().any(|&c| c < 2) {
        return Err(Error::EmptyGrid);
    }
    let steps: Vec<usize> = grid_counts.iter().map(|&c| (2 * c).max(8)).collect();
    let phi = Arc::new(PhiField {
        lift: patch.lift.clone(),
        base_point: patch.base_point.clone(),
        steps,
    });

    let loop_residual = max_loop_residual(patch, &phi, 20, 12345);
    if loop_residual > loop_tol {
        return Err(Error::NotLagrangian {
            residual: loop_residual,
            tol: loop_tol,
        });
    }

    let lift0 = Arc::new(PhaseRotatedLift {
        lift: patch.lift.clone(),
        phi: phi.clone(),
        extra_phase: 0.0,
    });

    // honest horizontality check: finite differences across the quadrature
    // values of phi, not the analytic differential
    let mut horiz: f64 = 0.0;
    let sample = patch.domain.lattice(&vec![3; patch.n]);
    for p in sample.iter().take(20) {
        let jac = crate::numcore::map::jacobian(
            lift0.as_ref(),
            p,
            crate::numcore::map::Scheme::FiniteDifference,
        )?
        .matrix;
        let z = cvec::from_interleaved(&lift0.eval(p));
        for j in 0..patch.n {
            let col = cvec::from_interleaved(jac.column(j).as_slice());
            horiz = horiz.max(herm(&col, &z).norm() / cvec::norm(&col).max(1e-300));
        }
    }

    Ok(HorizontalizationResult {
        phi,
        lift0,
        loop_residual,
        horizontality_residual: horiz,
        domain: patch.domain.clone(),
    })
}

fn max_loop_residual(patch: &LagrangianPatch, phi: &PhiField, loops: usize, seed: u64) -> f64 {
    if patch.n < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..loops {
        let i = rng.random_range(0..patch.n);
        let mut j = rng.random_range(0..patch.n);
        while j == i {
            j = rng.random_range(0..patch.n);
        }
        let mut corner = patch.domain.sample(&mut rng);
        let other = patch.domain.sample(&mut rng);
        let (ai, bi) = order(corner[i], other[i]);
        let (aj, bj) = order(corner[j], other[j]);
        corner[i] = ai;
        corner[j] = aj;
        // rectangle a -> b in the (i, j) coordinate plane
        let mut q = corner.clone();
        let mut total = 0.0;
        total += phi.leg_integral(&q, i, ai, bi);
        q[i] = bi;
        total += phi.leg_integral(&q, j, aj, bj);
        q[j] = bj;
        total += phi.leg_integral(&q, i, bi, ai);
        q[i] = ai;
        total += phi.leg_integral(&q, j, bj, aj);
        worst = worst.max(total.abs());
    }
    worst
}

fn order(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl HorizontalizationResult {
    /// The lift family f_t = e^{it} f_0. Horizontality is preserved since the
    /// phase is constant.
    pub fn lift_family(&self, t: f64) -> Arc<PhaseRotatedLift> {
        Arc::new(PhaseRotatedLift {
            lift: self.lift0.lift.clone(),
            phi: self.lift0.phi.clone(),
            extra_phase: t,
        })
    }

    /// Angle functions of the horizontal lift at p, by the frame-free pencil.
    pub fn angles_at(&self, p: &[f64]) -> Result<Vec<f64>> {
        let jet = jet1::<f64>(self.lift0.as_ref(), p);
        let cols: Vec<CVec> = jet.columns.iter().map(|c| cvec::from_interleaved(c)).collect();
        angles_from_lift_frame(&cols)
    }
}

/// Split a lift value into the hypersurface position and normal:
/// a = sqrt2 Re f, b = sqrt2 Im f.
pub fn split_lift(lift: &dyn RealMap, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let vals = lift.eval(p);
    let s = 2.0f64.sqrt();
    let a = vals.chunks_exact(2).map(|c| s * c[0]).collect();
    let b = vals.chunks_exact(2).map(|c| s * c[1]).collect();
    (a, b)
}

/// Real or imaginary part of a lift, scaled by sqrt2, as a chart map.
struct SplitChart {
    lift: Arc<PhaseRotatedLift>,
    imaginary: bool,
}

impl SplitChart {
    fn go<T: Level>(&self, p: &[T]) -> Vec<T> {
        let vals = T::eval_map(self.lift.as_ref(), p);
        let s = 2.0f64.sqrt();
        let off = if self.imaginary { 1 } else { 0 };
        vals.chunks_exact(2).map(|c| c[off].scale(s)).collect()
    }
}

impl RealMap for SplitChart {
    fn dim_in(&self) -> usize {
        self.lift.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.lift.dim_out() / 2
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
    fn eval_d3(&self, p: &[Dual3]) -> Vec<Dual3> {
        self.go::<Dual3>(p)
    }
}

/// Parameter selection: either a fixed t or the automatic margin-maximizing
/// scan.
#[derive(Clone, Copy, Debug)]
pub enum TChoice {
    Auto,
    Fixed(f64),
}

/// Distance of the shifted angle set to the degeneracy locus:
/// margin(t) = min over theta of dist(theta + t, pi Z).
pub fn margin_of(thetas: &[f64], t: f64) -> f64 {
    thetas
        .iter()
        .map(|&th| dist_to_pi_grid(th + t))
        .fold(f64::INFINITY, f64::min)
}

/// Scan 360 candidates on [0, pi) and refine by golden section; returns
/// (t_star, margin). Needs the angle sets of the horizontal lift on a grid.
pub fn choose_t(result: &HorizontalizationResult, grid_counts: &[usize]) -> Result<(f64, f64)> {
    let points = result.domain.lattice(grid_counts);
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut all_thetas = Vec::new();
    for p in &points {
        all_thetas.extend(result.angles_at(p)?);
    }
    if all_thetas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let candidates = 360;
    let mut best_t = 0.0;
    let mut best_m = f64::NEG_INFINITY;
    for k in 0..candidates {
        let t = PI * k as f64 / candidates as f64;
        let m = margin_of(&all_thetas, t);
        if m > best_m {
            best_m = m;
            best_t = t;
        }
    }
    // golden-section refinement around the best candidate
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_t - PI / candidates as f64, best_t + PI / candidates as f64);
    for _ in 0..50 {
        let x1 = hi - gr * (hi - lo);
        let x2 = lo + gr * (hi - lo);
        if margin_of(&all_thetas, x1) < margin_of(&all_thetas, x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let t = 0.5 * (lo + hi);
    let m = margin_of(&all_thetas, t);
    Ok(if m >= best_m { (t, m) } else { (best_t, best_m) })
}

/// A reconstructed hypersurface together with the construction data.
pub struct Reconstruction {
    pub patch: HypersurfacePatch,
    pub t: f64,
    pub margin: f64,
    pub horizontalization: HorizontalizationResult,
}

/// Full converse pipeline: horizontalize, pick t, split the lift. The
/// returned patch carries the analytic normal b_t and is metric-referenced to
/// the Lagrangian metric of the horizontal lift.
pub fn reconstruct_hypersurface(
    patch: &LagrangianPatch,
    choice: TChoice,
    grid_counts: &[usize],
) -> Result<Reconstruction> {
    reconstruct_with_tol(patch, choice, grid_counts, LOOP_TOL)
}

pub fn reconstruct_with_tol(
    patch: &LagrangianPatch,
    choice: TChoice,
    grid_counts: &[usize],
    loop_tol: f64,
) -> Result<Reconstruction> {
    let result = horizontalize_with_tol(patch, grid_counts, loop_tol)?;
    let (t, margin) = match choice {
        TChoice::Auto => choose_t(&result, grid_counts)?,
        TChoice::Fixed(t) => {
            let points = result.domain.lattice(grid_counts);
            let mut all = Vec::new();
            for p in &points {
                all.extend(result.angles_at(p)?);
            }
            let m = margin_of(&all, t);
            if m < DEGENERACY_THRESHOLD {
                return Err(Error::DegenerateParameter {
                    t,
                    margin: m,
                    threshold: DEGENERACY_THRESHOLD,
                });
            }
            (t, m)
        }
    };
    let lift_t = result.lift_family(t);
    let chart = Arc::new(SplitChart {
        lift: lift_t.clone(),
        imaginary: false,
    });
    let normal = Arc::new(SplitChart {
        lift: lift_t.clone(),
        imaginary: true,
    });
    let rec = HypersurfacePatch::new(patch.n, result.domain.clone(), chart)
        .with_normal_map(normal)
        .with_metric_reference(result.lift0.clone() as Arc<dyn RealMap>);
    Ok(Reconstruction {
        patch: rec,
        t,
        margin,
        horizontalization: result,
    })
}

/// Best sup-distance from a reconstructed patch to the parallel family of a
/// reference patch over the given points: min over t of
/// sup_p |rec(p) - (cos t a - sin t b)(p)|, with the minimizing t.
pub fn parallel_family_distance(
    reference: &Arc<HypersurfacePatch>,
    reconstructed: &HypersurfacePatch,
    points: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let mut a_vals = Vec::with_capacity(points.len());
    let mut b_vals = Vec::with_capacity(points.len());
    let mut r_vals = Vec::with_capacity(points.len());
    for p in points {
        a_vals.push(reference.position(p));
        b_vals.push(reference.normal_at::<f64>(p)?);
        r_vals.push(reconstructed.position(p));
    }
    let sup_at = |t: f64| -> f64 {
        let (c, s) = (t.cos(), t.sin());
        let mut sup: f64 = 0.0;
        for ((a, b), r) in a_vals.iter().zip(&b_vals).zip(&r_vals) {
            let mut d2 = 0.0;
            for k in 0..a.len() {
                let e = r[k] - (c * a[k] - s * b[k]);
                d2 += e * e;
            }
            sup = sup.max(d2);
        }
        sup.sqrt()
    };
    let candidates = 720;
    let mut best_t = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..candidates {
        let t = 2.0 * PI * k as f64 / candidates as f64;
        let d = sup_at(t);
        if d < best {
            best = d;
            best_t = t;
        }
    }
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (
        best_t - 2.0 * PI / candidates as f64,
        best_t + 2.0 * PI / candidates as f64,
    );
    for _ in 0..60 {
        let x1 = hi - gr * (hi - lo);
        let x2 = lo + gr * (hi - lo);
        if sup_at(x1) > sup_at(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let t = 0.5 * (lo + hi);
    let d = sup_at(t);
    Ok(if d <= best { (t, d) } else { (best_t, best) })
}

/// Report of the parallel-family curvature law sweep on a hypersurface patch.
#[derive(Clone, Debug, Default)]
pub struct ParallelLawReport {
    /// max |lambda_j(t) - cot(theta_j(0) + t)| over points and non-degenerate t.
    pub max_lambda_residual: f64,
    /// max distance mod pi of theta(t) from theta(0) + t.
    pub max_theta_residual: f64,
    /// Projector distance between the Gauss maps at t = 0 and each t.
    pub max_projector_distance: f64,
    /// Spread of |angle-difference invariant| across the sweep, per pair max.
    pub invariant_spread: f64,
    /// Worst single-sample invariant residual across the sweep.
    pub max_invariant_residual: f64,
    /// t values flagged degenerate (margin below threshold) and skipped.
    pub degenerate_ts: Vec<f64>,
}

/// Verify the parallel-family laws on a patch across a t-sweep at the given
/// points: the shifted cotangent law for the curvatures, the angle shift law
/// (via the canonical structure of each parallel lift), Gauss-map invariance,
/// and constancy of the angle-difference invariant.
pub fn parallel_curvature_law(
    patch: &Arc<HypersurfacePatch>,
    ts: &[f64],
    points: &[Vec<f64>],
    scheme: crate::numcore::map::Scheme,
) -> Result<ParallelLawReport> {
    use crate::gaussmap::{angle_spectrum, fold_angle, gauss_map};
    use crate::sphere::{parallel_patch, principal_data};

    let mut report = ParallelLawReport::default();
    let mut base_thetas = Vec::with_capacity(points.len());
    let mut base_gauss = Vec::with_capacity(points.len());
    for p in points {
        let s = angle_spectrum(patch, p, 0.0, scheme)?;
        base_thetas.push(s.thetas.clone());
        base_gauss.push(gauss_map(patch, p)?);
    }
    // invariant values at t = 0 for spread tracking: pair -> |value|
    let mut invariant_lo: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    let mut invariant_hi: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    let mut track_invariants =
        |patch: &Arc<HypersurfacePatch>, points: &[Vec<f64>], report: &mut ParallelLawReport| -> Result<()> {
            for p in points.iter().take(8) {
                let data = principal_data(patch, p, scheme)?;
                let n = data.lambdas.len();
                for j in 0..n {
                    for k in (j + 1)..n {
                        match crate::gaussmap::angle_difference_invariant(patch, p, j, k, scheme) {
                            Ok(s) => {
                                report.max_invariant_residual =
                                    report.max_invariant_residual.max(s.residual);
                                let v = s.curvature_ratio.abs();
                                let e = invariant_lo.entry((j, k)).or_insert(v);
                                *e = e.min(v);
                                let e = invariant_hi.entry((j, k)).or_insert(v);
                                *e = e.max(v);
                            }
                            Err(Error::InvariantUndefined { .. }) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
            Ok(())
        };
    track_invariants(patch, points, &mut report)?;

    for &t in ts {
        // degeneracy test over the sweep points
        let margin = base_thetas
            .iter()
            .flat_map(|ths| ths.iter().map(move |&th| dist_to_pi_grid(th + t)))
            .fold(f64::INFINITY, f64::min);
        let par = Arc::new(parallel_patch(patch, t));
        for (p, g0) in points.iter().zip(&base_gauss) {
            let gt = gauss_map(&par, p)?;
            report.max_projector_distance = report.max_projector_distance.max(g0.distance(&gt));
        }
        if margin < DEGENERACY_THRESHOLD {
            report.degenerate_ts.push(t);
            continue;
        }
        for (p, ths0) in points.iter().zip(&base_thetas) {
            let data = principal_data(&par, p, scheme)?;
            let mut predicted: Vec<f64> = ths0
                .iter()
                .map(|&th| {
                    let a = th + t;
                    a.cos() / a.sin()
                })
                .collect();
            predicted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (l, pr) in data.lambdas.iter().zip(&predicted) {
                report.max_lambda_residual = report.max_lambda_residual.max((l - pr).abs());
            }
            let st = angle_spectrum(&par, p, 0.0, scheme)?;
            let mut got: Vec<f64> = st.thetas.clone();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut want: Vec<f64> = ths0.iter().map(|&th| fold_angle(th + t)).collect();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (g, w) in got.iter().zip(&want) {
                report.max_theta_residual = report.max_theta_residual.max(dist_to_pi_grid(g - w));
            }
        }
        track_invariants(&par, points, &mut report)?;
    }
    report.invariant_spread = invariant_lo
        .iter()
        .map(|(k, lo)| invariant_hi[k] - lo)
        .fold(0.0, f64::max);
    Ok(report)
}

/// Lift samples on a rectilinear grid, interpolated by tensor-product
/// 4-point Lagrange polynomials; the file-based interchange route of the
/// converse direction.
pub struct SampledLift {
    axes: Vec<Vec<f64>>,
    /// Row-major over the grid, each entry 2(n+2) reals.
    values: Vec<Vec<f64>>,
    n: usize,
    dim_out: usize,
}

impl SampledLift {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = axes.len();
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        let count: usize = axes.iter().map(|a| a.len()).product();
        if values.len() != count {
            return Err(Error::InvalidParameter(format!(
                "grid has {count} nodes but {} value rows were provided",
                values.len()
            )));
        }
        for a in &axes {
            if a.len() < 4 {
                return Err(Error::InvalidParameter(
                    "each axis needs at least 4 nodes for cubic interpolation".to_string(),
                ));
            }
            if a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(
                    "axis coordinates must be strictly increasing".to_string(),
                ));
            }
        }
        let dim_out = values
            .first()
            .map(|v| v.len())
            .ok_or(Error::EmptyGrid)?;
        if dim_out != 2 * (n + 2) || values.iter().any(|v| v.len() != dim_out) {
            return Err(Error::InvalidParameter(format!(
                "each sample must hold {} reals (complex pairs)",
                2 * (n + 2)
            )));
        }
        Ok(SampledLift {
            axes,
            values,
            n,
            dim_out,
        })
    }

    /// The domain spanned by the interior of the sample grid (one cell inset
    /// so every evaluation has a full interpolation stencil).
    pub fn interior_domain(&self) -> BoxDomain {
        let lo = self.axes.iter().map(|a| a[1]).collect();
        let hi = self.axes.iter().map(|a| a[a.len() - 2]).collect();
        BoxDomain::new(lo, hi)
    }

    fn window(&self, axis: usize, x: f64) -> usize {
        let nodes = &self.axes[axis];
        let m = nodes.len();
        // first index of a 4-node window around x
        let mut cell = match nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        cell = cell.min(m - 2);
        cell.saturating_sub(1).min(m - 4)
    }

    fn basis<T: Real>(&self, axis: usize, start: usize, x: &T) -> [T; 4] {
        let nodes = &self.axes[axis][start..start + 4];
        std::array::from_fn(|j| {
            let mut acc = T::one();
            for k in 0..4 {
                if k != j {
                    let num = x.clone() - T::from_f64(nodes[k]);
                    acc = acc * num.scale(1.0 / (nodes[j] - nodes[k]));
                }
            }
            acc
        })
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.n];
        for i in (0..self.n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.axes[i + 1].len();
        }
        strides
    }
}

impl crate::numcore::map::Smooth for SampledLift {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        let starts: Vec<usize> = (0..self.n)
            .map(|i| self.window(i, p[i].primal()))
            .collect();
        let bases: Vec<[T; 4]> = (0..self.n)
            .map(|i| self.basis(i, starts[i], &p[i]))
            .collect();
        let strides = self.strides();
        let mut out = vec![T::zero(); self.dim_out];
        let combos = 4usize.pow(self.n as u32);
        for c in 0..combos {
            let mut weight = T::one();
            let mut node = 0usize;
            let mut rem = c;
            for i in 0..self.n {
                let j = rem % 4;
                rem /= 4;
                weight = weight * bases[i][j].clone();
                node += (starts[i] + j) * strides[i];
            }
            let vals = &self.values[node];
            for (o, &v) in out.iter_mut().zip(vals.iter()) {
                *o = o.clone() + weight.scale(v);
            }
        }
        out
    }
}

/// Sample a lift map on a lattice for serialization; inverse of `SampledLift`.
pub fn sample_lift_on_grid(
    lift: &dyn RealMap,
    domain: &BoxDomain,
    counts: &[usize],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let axes: Vec<Vec<f64>> = (0..domain.dim())
        .map(|i| {
            let m = counts[i].max(2);
            (0..m)
                .map(|k| {
                    domain.lo[i] + (domain.hi[i] - domain.lo[i]) * k as f64 / (m - 1) as f64
                })
                .collect()
        })
        .collect();
    let mut values = Vec::new();
    let mut idx = vec![0usize; domain.dim()];
    loop {
        let p: Vec<f64> = idx.iter().enumerate().map(|(i, &k)| axes[i][k]).collect();
        values.push(lift.eval(&p));
        // row-major increment
        let mut axis = domain.dim();
        loop {
            if axis == 0 {
                return (axes, values);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Convenience: the Lagrangian patch whose lift is the canonical Gauss lift
/// of a hypersurface patch, optionally gauge-scrambled.
pub fn lagrangian_from_patch(
    patch: &Arc<HypersurfacePatch>,
    sigma: Option<Arc<dyn RealMap>>,
) -> Result<LagrangianPatch> {
    let lift: Arc<dyn RealMap> = Arc::new(crate::gaussmap::GaussLiftMap::new(patch.clone()));
    let lift = match sigma {
        Some(sigma) => Arc::new(PhaseScrambledLift { inner: lift, sigma }) as Arc<dyn RealMap>,
        None => lift,
    };
    LagrangianPatch::new(
        patch.dim(),
        patch.domain().clone(),
        lift,
        patch.domain().center(),
    )
}
