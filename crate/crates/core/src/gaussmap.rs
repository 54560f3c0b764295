//! The forward correspondence: Gauss map of a sphere hypersurface into the
//! quadric, its canonical horizontal lift, Lagrangian/horizontality checks,
//! angle-function extraction, and the cotangent law linking principal
//! curvatures to angle functions.

use crate::error::{Error, Result};
use crate::numcore::cvec::{self, bil, herm, re_inner, CVec};
use crate::numcore::dual::{Dual, Dual2, Dual3, DualOf};
use crate::numcore::eig::generalized_sym_eig;
use crate::numcore::map::{jet1, Level, RealMap, Scheme};
use crate::quadric::{hopf_project, QuadricPoint, QuadricTangent, StiefelPoint};
use crate::sphere::{principal_data, HypersurfacePatch, PrincipalData};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Tolerance for the angle-decomposition residual; exceeding it means the
/// supplied frame is not adapted.
pub const ADAPTED_FRAME_TOL: f64 = 1e-8;

/// The canonical lift of a patch into the Stiefel manifold,
/// p -> (a(p) + i b(p)) / sqrt2, as a real map with interleaved complex
/// output. Supports dual evaluation up to second order (the normal consumes
/// one differentiation level of the chart).
pub struct GaussLiftMap {
    patch: Arc<HypersurfacePatch>,
}

impl GaussLiftMap {
    pub fn new(patch: Arc<HypersurfacePatch>) -> Self {
        GaussLiftMap { patch }
    }

    pub fn patch(&self) -> &Arc<HypersurfacePatch> {
        &self.patch
    }

    pub fn domain_center(&self) -> Vec<f64> {
        self.patch.domain().center()
    }

    fn go<T: Level>(&self, p: &[T]) -> Vec<T>
    where
        DualOf<T>: Level,
    {
        let a = T::eval_map(self.patch.chart().as_ref(), p);
        let b = self
            .patch
            .normal_at::<T>(p)
            .expect("Gauss lift evaluated at a non-immersion point");
        let s = 1.0 / 2.0f64.sqrt();
        let mut out = Vec::with_capacity(2 * a.len());
        for (ai, bi) in a.iter().zip(b.iter()) {
            out.push(ai.scale(s));
            out.push(bi.scale(s));
        }
        out
    }
}

impl RealMap for GaussLiftMap {
    fn dim_in(&self) -> usize {
        self.patch.dim()
    }
    fn dim_out(&self) -> usize {
        2 * (self.patch.dim() + 2)
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
        unimplemented!("third-order evaluation of a Gauss lift needs fourth-order chart data")
    }
}

/// The canonical horizontal lift (a(p) + i b(p)) / sqrt2 of the Gauss map.
pub fn gauss_lift(patch: &HypersurfacePatch, p: &[f64]) -> Result<StiefelPoint> {
    let a = patch.position(p);
    let b = patch.normal_at::<f64>(p)?;
    let s = 1.0 / 2.0f64.sqrt();
    let z = CVec::from_iterator(
        a.len(),
        a.iter()
            .zip(b.iter())
            .map(|(&x, &y)| Complex64::new(x * s, y * s)),
    );
    StiefelPoint::new(z)
}

/// The Gauss map p -> [a(p) + i b(p)], as a projector-valued quadric point.
pub fn gauss_map(patch: &HypersurfacePatch, p: &[f64]) -> Result<QuadricPoint> {
    Ok(hopf_project(&gauss_lift(patch, p)?))
}

/// Differentials of the Gauss lift at p: value and per-coordinate columns as
/// complex vectors.
pub struct LiftJet {
    pub value: CVec,
    pub columns: Vec<CVec>,
}

pub fn lift_jet(patch: &Arc<HypersurfacePatch>, p: &[f64], scheme: Scheme) -> Result<LiftJet> {
    let map = GaussLiftMap::new(patch.clone());
    match scheme {
        Scheme::Dual => {
            let jet = jet1::<f64>(&map, p);
            Ok(LiftJet {
                value: cvec::from_interleaved(&jet.value),
                columns: jet
                    .columns
                    .iter()
                    .map(|c| cvec::from_interleaved(c))
                    .collect(),
            })
        }
        Scheme::FiniteDifference => {
            let value = cvec::from_interleaved(&map.eval(p));
            let jac = crate::numcore::map::jacobian(&map, p, scheme)?.matrix;
            let columns = (0..map.dim_in())
                .map(|j| cvec::from_interleaved(jac.column(j).as_slice()))
                .collect();
            Ok(LiftJet { value, columns })
        }
    }
}

/// Differential of the Gauss map at p applied to a chart-coordinate vector,
/// returned as a horizontal quadric tangent at the canonical lift.
pub fn gauss_differential(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    v: &[f64],
    scheme: Scheme,
) -> Result<QuadricTangent> {
    let jet = lift_jet(patch, p, scheme)?;
    let z = StiefelPoint::new(jet.value.clone())?;
    let mut w = CVec::zeros(jet.value.len());
    for (c, &vi) in jet.columns.iter().zip(v.iter()) {
        w += c * Complex64::from(vi);
    }
    QuadricTangent::new(z, w)
}

/// Lift-level Lagrangian residual: max over normalized coordinate directions
/// of |re_inner(i dG_j, dG_k)|.
pub fn check_lagrangian(patch: &Arc<HypersurfacePatch>, p: &[f64], scheme: Scheme) -> Result<f64> {
    let jet = lift_jet(patch, p, scheme)?;
    let mut worst: f64 = 0.0;
    for j in 0..jet.columns.len() {
        let nj = cvec::norm(&jet.columns[j]);
        for k in 0..jet.columns.len() {
            let nk = cvec::norm(&jet.columns[k]);
            let r = re_inner(&cvec::times_i(&jet.columns[j]), &jet.columns[k]).abs() / (nj * nk);
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Horizontality residual of the canonical lift: max over normalized
/// coordinate directions of |herm(dG_j, G)|.
pub fn horizontality_residual(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    scheme: Scheme,
) -> Result<f64> {
    let jet = lift_jet(patch, p, scheme)?;
    let mut worst: f64 = 0.0;
    for c in &jet.columns {
        worst = worst.max(herm(c, &jet.value).norm() / cvec::norm(c));
    }
    Ok(worst)
}

/// Local angle functions at a point, with the adapted frame and the gauge
/// they refer to. Angles live on the branch (0, pi]; the order matches the
/// descending principal-curvature order of the frame.
#[derive(Clone, Debug)]
pub struct AngleSpectrum {
    pub thetas: Vec<f64>,
    /// Chart-coordinate principal directions (G-orthonormal).
    pub frame: Vec<DVector<f64>>,
    pub gauge: f64,
    /// Worst decomposition residual across the frame.
    pub residual: f64,
}

/// Fold an angle into the branch (0, pi].
pub fn fold_angle(theta: f64) -> f64 {
    let mut x = theta % PI;
    if x <= 0.0 {
        x += PI;
    }
    x
}

/// Distance from x to the nearest integer multiple of pi.
pub fn dist_to_pi_grid(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    r.min(PI - r)
}

/// Extract the angle functions of the Gauss map at p for the gauge-phi member
/// of the product-structure family, using the principal-direction frame.
/// Fails with `FrameNotAdapted` if the decomposition leaves a residual.
pub fn angle_spectrum(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    phi: f64,
    scheme: Scheme,
) -> Result<AngleSpectrum> {
    let data = principal_data(patch, p, scheme)?;
    angle_spectrum_with_data(patch, p, phi, scheme, &data)
}

/// Same as [`angle_spectrum`] but reusing precomputed principal data.
pub fn angle_spectrum_with_data(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    phi: f64,
    scheme: Scheme,
    data: &PrincipalData,
) -> Result<AngleSpectrum> {
    let jet = lift_jet(patch, p, scheme)?;
    let mut thetas = Vec::with_capacity(data.directions.len());
    let mut residual: f64 = 0.0;
    for dir in &data.directions {
        let mut w = CVec::zeros(jet.value.len());
        for (c, &vi) in jet.columns.iter().zip(dir.iter()) {
            w += c * Complex64::from(vi);
        }
        let (theta, r) = angle_of_lift_direction(&w, phi)?;
        residual = residual.max(r);
        thetas.push(theta);
    }
    if residual > ADAPTED_FRAME_TOL {
        return Err(Error::FrameNotAdapted {
            residual,
            tol: ADAPTED_FRAME_TOL,
        });
    }
    Ok(AngleSpectrum {
        thetas,
        frame: data.directions.clone(),
        gauge: phi,
        residual,
    })
}

/// Decompose A_phi w = alpha w + beta (i w) and read the angle from
/// (cos 2theta, sin 2theta) = (alpha, -beta). Returns (theta, residual).
fn angle_of_lift_direction(w: &CVec, phi: f64) -> Result<(f64, f64)> {
    let g = re_inner(w, w);
    if g < 1e-20 {
        return Err(Error::NotImmersion);
    }
    let aw = -cvec::phase(&cvec::conj(w), phi);
    let alpha = re_inner(&aw, w) / g;
    let beta = re_inner(&aw, &cvec::times_i(w)) / g;
    let recon = w * Complex64::from(alpha) + cvec::times_i(w) * Complex64::from(beta);
    let residual = cvec::norm(&(&aw - recon)) / g.sqrt();
    let theta = fold_angle(0.5 * (-beta).atan2(alpha));
    Ok((theta, residual))
}

/// Forward law residual: max_j |lambda_j - cot theta_j| in the canonical
/// gauge. Errors if some theta sits at a branch endpoint.
pub fn verify_theorem1(patch: &Arc<HypersurfacePatch>, p: &[f64], scheme: Scheme) -> Result<f64> {
    let data = principal_data(patch, p, scheme)?;
    let spectrum = angle_spectrum_with_data(patch, p, 0.0, scheme, &data)?;
    let mut worst: f64 = 0.0;
    for (l, th) in data.lambdas.iter().zip(spectrum.thetas.iter()) {
        if th.sin().abs() < 1e-9 {
            return Err(Error::UndefinedCot { theta: *th });
        }
        worst = worst.max((l - th.cos() / th.sin()).abs());
    }
    Ok(worst)
}

/// Gauge law residual: angles at gauge phi against theta^(0) - phi/2, as a
/// distance mod pi.
pub fn gauge_shift_check(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    phi: f64,
    scheme: Scheme,
) -> Result<f64> {
    let data = principal_data(patch, p, scheme)?;
    let s0 = angle_spectrum_with_data(patch, p, 0.0, scheme, &data)?;
    let sphi = angle_spectrum_with_data(patch, p, phi, scheme, &data)?;
    let mut worst: f64 = 0.0;
    for (a, b) in sphi.thetas.iter().zip(s0.thetas.iter()) {
        worst = worst.max(dist_to_pi_grid(a - (b - phi / 2.0)));
    }
    Ok(worst)
}

/// One evaluation of the angle-difference invariant
/// cot(theta_j - theta_k) = +- (lambda_j lambda_k + 1)/(lambda_j - lambda_k).
#[derive(Clone, Debug)]
pub struct InvariantSample {
    pub j: usize,
    pub k: usize,
    pub cot_theta_diff: f64,
    pub curvature_ratio: f64,
    /// +1 when the two sides matched directly, -1 when they matched after
    /// negating one side.
    pub sign: i8,
    pub residual: f64,
}

pub fn angle_difference_invariant(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    j: usize,
    k: usize,
    scheme: Scheme,
) -> Result<InvariantSample> {
    let data = principal_data(patch, p, scheme)?;
    let gap = (data.lambdas[j] - data.lambdas[k]).abs();
    if gap < 1e-6 {
        return Err(Error::InvariantUndefined { gap });
    }
    let spectrum = angle_spectrum_with_data(patch, p, 0.0, scheme, &data)?;
    let diff = spectrum.thetas[j] - spectrum.thetas[k];
    let cot_theta_diff = diff.cos() / diff.sin();
    let curvature_ratio =
        (data.lambdas[j] * data.lambdas[k] + 1.0) / (data.lambdas[j] - data.lambdas[k]);
    let direct = (cot_theta_diff - curvature_ratio).abs();
    let flipped = (cot_theta_diff + curvature_ratio).abs();
    let (sign, residual) = if direct <= flipped {
        (1, direct)
    } else {
        (-1, flipped)
    };
    Ok(InvariantSample {
        j,
        k,
        cot_theta_diff,
        curvature_ratio,
        sign,
        residual,
    })
}

/// Residual of the curvature form of the lift differential:
/// max_j |dG(e_j) - (1 - i lambda_j) e_j^ambient / sqrt2|.
pub fn differential_curvature_form_residual(
    patch: &Arc<HypersurfacePatch>,
    p: &[f64],
    scheme: Scheme,
) -> Result<f64> {
    let data = principal_data(patch, p, scheme)?;
    let jet = lift_jet(patch, p, scheme)?;
    let jac = crate::numcore::map::jacobian(patch.chart().as_ref(), p, scheme)?.matrix;
    let s = 1.0 / 2.0f64.sqrt();
    let mut worst: f64 = 0.0;
    for (dir, lambda) in data.directions.iter().zip(data.lambdas.iter()) {
        let mut w = CVec::zeros(jet.value.len());
        for (c, &vi) in jet.columns.iter().zip(dir.iter()) {
            w += c * Complex64::from(vi);
        }
        let e_amb = &jac * dir;
        let factor = Complex64::new(s, -s * lambda);
        let expect = CVec::from_iterator(
            jet.value.len(),
            e_amb.iter().map(|&x| factor * x),
        );
        worst = worst.max(cvec::norm(&(&w - expect)));
    }
    Ok(worst)
}

/// Angle functions of an arbitrary Lagrangian lift frame, without principal
/// directions: simultaneous diagonalization of the complex-symmetric pencil
/// bil(W, W) v = mu * re_gram(W) v whose unit-circle eigenvalues are
/// -e^{2 i theta}. This is the frame-free route used by the converse
/// construction (and an independent cross-check of the frame-based route).
pub fn angles_from_lift_frame(columns: &[CVec]) -> Result<Vec<f64>> {
    let n = columns.len();
    let mut g = DMatrix::zeros(n, n);
    let mut c_re = DMatrix::zeros(n, n);
    let mut c_im = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let h = herm(&columns[j], &columns[k]);
            g[(j, k)] = h.re;
            let b = bil(&columns[j], &columns[k]);
            c_re[(j, k)] = b.re;
            c_im[(j, k)] = b.im;
        }
    }
    let g = (&g + g.transpose()) * 0.5;
    let c_re = (&c_re + c_re.transpose()) * 0.5;
    let c_im = (&c_im + c_im.transpose()) * 0.5;
    let first = generalized_sym_eig(&c_re, &g)?;

    // refine within groups of equal Re-eigenvalue by diagonalizing the
    // imaginary part there
    let mut vectors: Vec<DVector<f64>> = first.eigenvectors.clone();
    let mut idx = 0;
    while idx < n {
        let mut end = idx + 1;
        while end < n && (first.eigenvalues[end] - first.eigenvalues[idx]).abs() <= 1e-7 {
            end += 1;
        }
        if end - idx > 1 {
            let m = end - idx;
            let mut sub = DMatrix::zeros(m, m);
            for a in 0..m {
                for b in 0..m {
                    sub[(a, b)] = (vectors[idx + a].transpose() * &c_im * &vectors[idx + b])[(0, 0)];
                }
            }
            let sub = (&sub + sub.transpose()) * 0.5;
            let se = sub.symmetric_eigen();
            let old: Vec<DVector<f64>> = (idx..end).map(|i| vectors[i].clone()).collect();
            for a in 0..m {
                let mut v = DVector::zeros(vectors[0].len());
                for b in 0..m {
                    v += &old[b] * se.eigenvectors[(b, a)];
                }
                vectors[idx + a] = v;
            }
        }
        idx = end;
    }

    let mut thetas: Vec<f64> = vectors
        .iter()
        .map(|v| {
            let mu_re = (v.transpose() * &c_re * v)[(0, 0)] / (v.transpose() * &g * v)[(0, 0)];
            let mu_im = (v.transpose() * &c_im * v)[(0, 0)] / (v.transpose() * &g * v)[(0, 0)];
            // mu = -e^{2 i theta}
            fold_angle(0.5 * (-mu_im).atan2(-mu_re))
        })
        .collect();
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(thetas)
}
