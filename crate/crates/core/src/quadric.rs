//! The ambient geometry: Hopf fibration, Stiefel manifold, quadric points and
//! tangents, the complex structure J, the gauge family of almost product
//! structures A, and the curvature tensor of the quadric with its algebraic
//! checks.

use crate::error::{Error, Result};
use crate::numcore::cvec::{self, bil, herm, re_inner, CVec};
use crate::numcore::map::RealMap;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Tolerance for the algebraic (non-differentiated) identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// A point z = u + iv of the Stiefel manifold V^{2n+1}: |u|^2 = |v|^2 = 1/2,
/// <u, v> = 0; equivalently |z| = 1 and bil(z, z) = 0.
#[derive(Clone, Debug)]
pub struct StiefelPoint {
    z: CVec,
}

impl StiefelPoint {
    pub fn new(z: CVec) -> Result<Self> {
        let norm_dev = (re_inner(&z, &z) - 1.0).abs();
        let bil_dev = bil(&z, &z).norm();
        if norm_dev > ALGEBRAIC_TOL || bil_dev > ALGEBRAIC_TOL {
            return Err(Error::NotOnStiefel { norm_dev, bil_dev });
        }
        Ok(StiefelPoint { z })
    }

    pub fn vector(&self) -> &CVec {
        &self.z
    }

    /// Complex dimension n of the quadric this point projects to.
    pub fn quadric_dim(&self) -> usize {
        self.z.len() - 2
    }

    /// The fiber motion e^{it} z.
    pub fn rotated(&self, t: f64) -> StiefelPoint {
        StiefelPoint {
            z: cvec::phase(&self.z, t),
        }
    }
}

/// A point of the quadric stored as the rank-1 Hermitian projector
/// P = z z^*, together with one Stiefel representative. Projectors are
/// representative-independent up to machine precision.
#[derive(Clone, Debug)]
pub struct QuadricPoint {
    pub projector: DMatrix<Complex64>,
    pub representative: StiefelPoint,
}

impl QuadricPoint {
    /// Frobenius distance between projectors.
    pub fn distance(&self, other: &QuadricPoint) -> f64 {
        (&self.projector - &other.projector).norm()
    }
}

/// The Hopf projection z -> [z], materialized as the projector z z^*.
pub fn hopf_project(z: &StiefelPoint) -> QuadricPoint {
    let v = z.vector();
    let m = v.len();
    let projector = DMatrix::from_fn(m, m, |i, j| v[i] * v[j].conj());
    QuadricPoint {
        projector,
        representative: z.clone(),
    }
}

/// A tangent vector to the quadric at [z], stored through its horizontal
/// representative w at the Stiefel representative z:
/// herm(w, z) = 0 and bil(z, w) = 0.
#[derive(Clone, Debug)]
pub struct QuadricTangent {
    base: StiefelPoint,
    w: CVec,
}

impl QuadricTangent {
    pub fn new(base: StiefelPoint, w: CVec) -> Result<Self> {
        let herm_dev = herm(&w, base.vector()).norm();
        let bil_dev = bil(base.vector(), &w).norm();
        if herm_dev > ALGEBRAIC_TOL || bil_dev > ALGEBRAIC_TOL {
            return Err(Error::NotTangent { herm_dev, bil_dev });
        }
        Ok(QuadricTangent { base, w })
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn lift(&self) -> &CVec {
        &self.w
    }

    pub fn norm(&self) -> f64 {
        cvec::norm(&self.w)
    }

    fn same_base(&self, other: &QuadricTangent) -> Result<()> {
        if (self.base.vector() - other.base.vector()).norm() > 1e-14 {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    fn with_lift(&self, w: CVec) -> QuadricTangent {
        QuadricTangent {
            base: self.base.clone(),
            w,
        }
    }
}

/// The metric on quadric tangents (real part of the Hermitian pairing of
/// horizontal lifts).
pub fn g(x: &QuadricTangent, y: &QuadricTangent) -> f64 {
    re_inner(&x.w, &y.w)
}

/// Project an arbitrary ambient vector to the horizontal tangent space at z:
/// remove the complex span of z (sphere tangency + the Hopf vertical) and the
/// complex span of conj(z) (the quadric normal inside projective space).
pub fn horizontal_project(z: &StiefelPoint, w_raw: &CVec) -> QuadricTangent {
    let zv = z.vector();
    let zbar = cvec::conj(zv);
    let mut w = w_raw - zv * herm(w_raw, zv);
    w -= &zbar * herm(&w, &zbar);
    QuadricTangent {
        base: z.clone(),
        w,
    }
}

/// The complex structure: multiplication by i on horizontal lifts.
pub fn apply_j(x: &QuadricTangent) -> QuadricTangent {
    x.with_lift(cvec::times_i(&x.w))
}

/// A member of the gauge family of almost product structures at a fixed
/// Stiefel representative: A_phi = cos(phi) A_0 + sin(phi) J A_0, where A_0
/// acts on horizontal lifts by w -> -conj(w).
#[derive(Clone, Debug)]
pub struct ProductStructureChoice {
    pub base: StiefelPoint,
    pub phi: f64,
}

impl ProductStructureChoice {
    pub fn canonical(base: StiefelPoint) -> Self {
        ProductStructureChoice { base, phi: 0.0 }
    }

    pub fn with_gauge(base: StiefelPoint, phi: f64) -> Self {
        ProductStructureChoice { base, phi }
    }
}

/// Apply the chosen almost product structure: on lifts,
/// A_phi w = -e^{i phi} conj(w). The result is automatically a horizontal
/// tangent at the same base (asserted).
pub fn apply_a(choice: &ProductStructureChoice, x: &QuadricTangent) -> Result<QuadricTangent> {
    if (choice.base.vector() - x.base.vector()).norm() > 1e-14 {
        return Err(Error::BaseMismatch);
    }
    let rotated = cvec::phase(&cvec::conj(&x.w), choice.phi);
    let w = -rotated;
    // conj of a horizontal tangent is horizontal-tangent again; validate.
    QuadricTangent::new(x.base.clone(), w)
}

/// Residuals of the three structural identities of the product structures:
/// involutivity |A^2 X - X|, symmetry |g(AX,Y) - g(X,AY)|, and
/// anti-commutation with J: |AJX + JAX|.
#[derive(Clone, Debug)]
pub struct StructureResiduals {
    pub involutive: f64,
    pub symmetric: f64,
    pub anticommute: f64,
}

impl StructureResiduals {
    pub fn max(&self) -> f64 {
        self.involutive.max(self.symmetric).max(self.anticommute)
    }
}

pub fn check_lemma1(
    choice: &ProductStructureChoice,
    x: &QuadricTangent,
    y: &QuadricTangent,
) -> Result<StructureResiduals> {
    x.same_base(y)?;
    let ax = apply_a(choice, x)?;
    let ay = apply_a(choice, y)?;
    let aax = apply_a(choice, &ax)?;
    let involutive = (&aax.w - &x.w).norm();
    let symmetric = (g(&ax, y) - g(x, &ay)).abs();
    let ajx = apply_a(choice, &apply_j(x))?;
    let jax = apply_j(&ax);
    let anticommute = (&ajx.w + &jax.w).norm();
    Ok(StructureResiduals {
        involutive,
        symmetric,
        anticommute,
    })
}

/// The curvature tensor of the quadric, evaluated literally term by term on
/// horizontal lifts:
/// R(X,Y)Z = g(Y,Z)X - g(X,Z)Y
///         + g(JY,Z)JX - g(JX,Z)JY - 2 g(JX,Y)JZ
///         + g(AY,Z)AX - g(AX,Z)AY + g(JAY,Z)JAX - g(JAX,Z)JAY.
pub fn curvature_r(
    choice: &ProductStructureChoice,
    x: &QuadricTangent,
    y: &QuadricTangent,
    z: &QuadricTangent,
) -> Result<QuadricTangent> {
    x.same_base(y)?;
    x.same_base(z)?;
    let jx = apply_j(x);
    let jy = apply_j(y);
    let jz = apply_j(z);
    let ax = apply_a(choice, x)?;
    let ay = apply_a(choice, y)?;
    let jax = apply_j(&ax);
    let jay = apply_j(&ay);

    let mut w = &x.w * Complex64::from(g(y, z));
    w -= &y.w * Complex64::from(g(x, z));
    w += &jx.w * Complex64::from(g(&jy, z));
    w -= &jy.w * Complex64::from(g(&jx, z));
    w -= &jz.w * Complex64::from(2.0 * g(&jx, y));
    w += &ax.w * Complex64::from(g(&ay, z));
    w -= &ay.w * Complex64::from(g(&ax, z));
    w += &jax.w * Complex64::from(g(&jay, z));
    w -= &jay.w * Complex64::from(g(&jax, z));
    Ok(x.with_lift(w))
}

/// Sectional curvature of the plane spanned by X, Y.
pub fn sectional(
    choice: &ProductStructureChoice,
    x: &QuadricTangent,
    y: &QuadricTangent,
) -> Result<f64> {
    let r = curvature_r(choice, x, y, y)?;
    let num = g(&r, x);
    let den = g(x, x) * g(y, y) - g(x, y).powi(2);
    Ok(num / den)
}

/// Ricci contraction over a g-orthonormal tangent basis; returns the best-fit
/// Einstein constant and the residual |Ric - c g|_F. The basis is
/// re-orthonormalized internally.
pub fn ricci_check(
    choice: &ProductStructureChoice,
    basis: &[QuadricTangent],
) -> Result<(f64, f64)> {
    let basis = orthonormalize(basis)?;
    let m = basis.len();
    let mut ric = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut sum = 0.0;
            for e in &basis {
                let r = curvature_r(choice, e, &basis[a], &basis[b])?;
                sum += g(&r, e);
            }
            ric[(a, b)] = sum;
        }
    }
    let c = ric.trace() / m as f64;
    let residual = (&ric - DMatrix::identity(m, m) * c).norm();
    Ok((c, residual))
}

fn orthonormalize(basis: &[QuadricTangent]) -> Result<Vec<QuadricTangent>> {
    let mut out: Vec<QuadricTangent> = Vec::with_capacity(basis.len());
    for v in basis {
        if let Some(first) = out.first() {
            first.same_base(v)?;
        }
        let mut w = v.w.clone();
        for u in &out {
            let c = re_inner(&w, &u.w);
            w -= &u.w * Complex64::from(c);
        }
        let n = cvec::norm(&w);
        if n < 1e-10 {
            return Err(Error::InvalidParameter(
                "degenerate tangent basis".to_string(),
            ));
        }
        out.push(v.with_lift(w / Complex64::from(n)));
    }
    Ok(out)
}

/// Extremal sectional curvatures over `samples` seeded random 2-planes at the
/// base point.
pub fn sectional_range(
    choice: &ProductStructureChoice,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = random_unit_tangent(&choice.base, rng);
        let mut y = random_unit_tangent(&choice.base, rng);
        // orthonormalize the pair
        let c = g(&x, &y);
        y = y.with_lift(&y.w - &x.w * Complex64::from(c));
        let n = y.norm();
        if n < 1e-8 {
            continue;
        }
        y = y.with_lift(&y.w / Complex64::from(n));
        let k = sectional(choice, &x, &y)?;
        lo = lo.min(k);
        hi = hi.max(k);
    }
    Ok((lo, hi))
}

/// One evaluation of the covariant-derivative identity for the quadric's
/// normal field along a curve of Stiefel points.
#[derive(Clone, Debug)]
pub struct NormalDerivativeSample {
    pub param: f64,
    /// Extracted coefficient of J zeta (the one-form value s(X)).
    pub s_value: f64,
    /// Deviation of the AX coefficient from its structural value -1.
    pub a_coefficient_dev: f64,
    /// Norm of the component outside span{AX, J zeta}.
    pub rest: f64,
}

/// Differentiate the normal field zeta = d pi(conj z) along a curve of
/// Stiefel points (given as a map R -> R^{2(n+2)}, interleaved), using the
/// ambient projective-space connection realized through the sphere: central
/// finite difference, projected to the sphere tangent, then horizontally.
/// Decomposes the derivative against {lift of A X, lift of J zeta} where X is
/// the curve's own tangent field and A the canonical structure at z(s).
pub fn check_lemma2(
    curve: &dyn RealMap,
    params: &[f64],
) -> Result<Vec<NormalDerivativeSample>> {
    let h = f64::EPSILON.powf(1.0 / 3.0);
    if h == 0.0 {
        return Err(Error::StepUnderflow);
    }
    let eval = |s: f64| -> CVec { cvec::from_interleaved(&curve.eval(&[s])) };
    let mut out = Vec::with_capacity(params.len());
    for &s in params {
        let z = StiefelPoint::new(eval(s))?;
        let zp = eval(s + h);
        let zm = eval(s - h);
        let zdot = (&zp - &zm) / Complex64::from(2.0 * h);
        // derivative of the conjugate field along the curve
        let d = cvec::conj(&zdot);
        // project to the sphere tangent and then horizontally at z
        let zv = z.vector();
        let iz = cvec::times_i(zv);
        let mut dproj = d.clone();
        dproj -= zv * Complex64::from(re_inner(&d, zv));
        dproj -= &iz * Complex64::from(re_inner(&d, &iz));

        // X = d pi (horizontal part of zdot); lift of A X = -conj(Xhat)
        let xhat = horizontal_project(&z, &zdot);
        let ax_lift = -cvec::conj(&xhat.w);
        let jzeta_lift = cvec::times_i(&cvec::conj(zv));

        let ax_norm2 = re_inner(&ax_lift, &ax_lift);
        let (coef_a, a_dev) = if ax_norm2 > 1e-16 {
            let c = re_inner(&dproj, &ax_lift) / ax_norm2;
            (c, (c + 1.0).abs() * ax_norm2.sqrt())
        } else {
            (0.0, 0.0)
        };
        let s_value = re_inner(&dproj, &jzeta_lift);
        let rest_vec =
            &dproj - &ax_lift * Complex64::from(coef_a) - &jzeta_lift * Complex64::from(s_value);
        out.push(NormalDerivativeSample {
            param: s,
            s_value,
            a_coefficient_dev: a_dev,
            rest: cvec::norm(&rest_vec),
        });
    }
    Ok(out)
}

/// Seeded random Stiefel point in V^{2n+1} (ambient C^{n+2}).
pub fn random_stiefel(n: usize, rng: &mut impl Rng) -> StiefelPoint {
    let dim = n + 2;
    loop {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nu < 1e-6 {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= nu);
        let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u.iter()).for_each(|(b, a)| *b -= dot * a);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let s = 1.0 / 2.0f64.sqrt();
        let z = CVec::from_iterator(
            dim,
            u.iter()
                .zip(v.iter())
                .map(|(&a, &b)| Complex64::new(a * s, b * s)),
        );
        return StiefelPoint::new(z).expect("constructed point satisfies the constraints");
    }
}

/// Seeded random unit horizontal tangent at z.
pub fn random_unit_tangent(z: &StiefelPoint, rng: &mut impl Rng) -> QuadricTangent {
    loop {
        let dim = z.vector().len();
        let raw = CVec::from_iterator(
            dim,
            (0..dim).map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }),
        );
        let t = horizontal_project(z, &raw);
        let n = t.norm();
        if n > 1e-6 {
            return t.with_lift(&t.w / Complex64::from(n));
        }
    }
}

/// A unit horizontal tangent w with bil(w, w) = 0, so that
/// cos(s) z + sin(s) w stays on the Stiefel manifold for all s.
/// Needs n >= 2.
pub fn isotropic_horizontal(z: &StiefelPoint, rng: &mut impl Rng) -> QuadricTangent {
    loop {
        let u = random_unit_tangent(z, rng);
        let v = random_unit_tangent(z, rng);
        let bu = bil(&u.w, &u.w);
        let bv = bil(&v.w, &v.w);
        let buv = bil(&u.w, &v.w);
        // solve bil(u + c v, u + c v) = 0 for complex c
        let c = if bv.norm() > 1e-10 {
            let disc = (buv * buv - bu * bv).sqrt();
            (-buv + disc) / bv
        } else if buv.norm() > 1e-10 {
            -bu / (buv * 2.0)
        } else if bu.norm() < 1e-12 {
            Complex64::new(0.0, 0.0)
        } else {
            continue;
        };
        let w = &u.w + &v.w * c;
        let n = cvec::norm(&w);
        if n < 1e-6 {
            continue;
        }
        let w = w / Complex64::from(n);
        if bil(&w, &w).norm() < 1e-10 {
            return QuadricTangent {
                base: z.clone(),
                w,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_point(n: usize, seed: u64) -> StiefelPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_stiefel(n, &mut rng)
    }

    fn reference_point() -> StiefelPoint {
        let s = 1.0 / 2.0f64.sqrt();
        StiefelPoint::new(cvec::from_interleaved(&[
            s, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0,
        ]))
        .unwrap()
    }

    fn slot(k: usize, c: Complex64) -> CVec {
        let mut v = CVec::zeros(4);
        v[k] = c;
        v
    }

    #[test]
    fn hopf_projector_closed_form() {
        let z = reference_point();
        let p = hopf_project(&z);
        assert_relative_eq!(p.projector[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.projector[(0, 1)].im, -0.5, epsilon = 1e-15);
        assert_relative_eq!(p.projector[(1, 0)].im, 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.projector[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert!(p.projector.view_range(2.., ..).norm() < 1e-15);
        // projector identities
        let sq = &p.projector * &p.projector;
        assert!((sq - &p.projector).norm() < 1e-14);
        assert_relative_eq!(p.projector.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn fiber_invariance() {
        let z = sample_point(2, 7);
        let p0 = hopf_project(&z);
        for t in [0.31, std::f64::consts::FRAC_PI_3, 2.9] {
            let p1 = hopf_project(&z.rotated(t));
            assert!(p0.distance(&p1) <= 1e-14);
        }
    }

    #[test]
    fn distinct_planes_have_distant_projectors() {
        let z1 = reference_point();
        let z2 = StiefelPoint::new(cvec::from_interleaved(&[
            0.0,
            0.0,
            0.0,
            0.0,
            1.0 / 2.0f64.sqrt(),
            0.0,
            0.0,
            1.0 / 2.0f64.sqrt(),
        ]))
        .unwrap();
        let d = hopf_project(&z1).distance(&hopf_project(&z2));
        assert_relative_eq!(d, 2.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn horizontal_projection_behaviour() {
        let z = reference_point();
        // already horizontal-tangent: unchanged
        let w = slot(2, Complex64::new(1.0, 0.0));
        let t = horizontal_project(&z, &w);
        assert!((&t.w - &w).iter().map(|c| c.norm()).sum::<f64>() < 1e-14);
        // vertical direction iz is killed
        let t = horizontal_project(&z, &cvec::times_i(z.vector()));
        assert!(t.norm() < 1e-14);
        // the quadric normal conj(z) is killed
        let t = horizontal_project(&z, &cvec::conj(z.vector()));
        assert!(t.norm() < 1e-14);
    }

    #[test]
    fn j_squares_to_minus_one() {
        let z = sample_point(3, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_unit_tangent(&z, &mut rng);
        let jjx = apply_j(&apply_j(&x));
        assert!((&jjx.w + &x.w).norm() < 1e-15);
        assert!(re_inner(&apply_j(&x).w, &x.w).abs() < 1e-15);
        // g(JX, JY) = g(X, Y)
        let y = random_unit_tangent(&z, &mut rng);
        assert_relative_eq!(g(&apply_j(&x), &apply_j(&y)), g(&x, &y), epsilon = 1e-15);
    }

    #[test]
    fn canonical_a_action() {
        let z = reference_point();
        let choice = ProductStructureChoice::canonical(z.clone());
        let x = QuadricTangent::new(z.clone(), slot(2, Complex64::new(1.0, 0.0))).unwrap();
        let ax = apply_a(&choice, &x).unwrap();
        assert!((&ax.w - slot(2, Complex64::new(-1.0, 0.0))).norm() < 1e-15);
        // A(Jw) = -J(Aw): on the imaginary slot vector A acts as +identity
        let xi = QuadricTangent::new(z.clone(), slot(2, Complex64::new(0.0, 1.0))).unwrap();
        let axi = apply_a(&choice, &xi).unwrap();
        assert!((&axi.w - slot(2, Complex64::new(0.0, 1.0))).norm() < 1e-15);
        // phi = pi negates the phi = 0 action
        let neg = ProductStructureChoice::with_gauge(z, std::f64::consts::PI);
        let axn = apply_a(&neg, &x).unwrap();
        assert!((&axn.w + &ax.w).norm() < 1e-12);
    }

    #[test]
    fn lemma1_residuals_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [2usize, 3, 4] {
            let z = random_stiefel(n, &mut rng);
            for _ in 0..50 {
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let choice = ProductStructureChoice::with_gauge(z.clone(), phi);
                let x = random_unit_tangent(&z, &mut rng);
                let y = random_unit_tangent(&z, &mut rng);
                let r = check_lemma1(&choice, &x, &y).unwrap();
                assert!(r.max() <= 1e-12, "residuals {:?}", r);
                // special case X = J w
                let r2 = check_lemma1(&choice, &apply_j(&x), &y).unwrap();
                assert!(r2.anticommute <= 1e-12);
            }
        }
    }

    #[test]
    fn a_is_isometry_and_gauge_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let z = random_stiefel(2, &mut rng);
        let x = random_unit_tangent(&z, &mut rng);
        let y = random_unit_tangent(&z, &mut rng);
        for _ in 0..20 {
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let choice = ProductStructureChoice::with_gauge(z.clone(), phi);
            let ax = apply_a(&choice, &x).unwrap();
            let ay = apply_a(&choice, &y).unwrap();
            assert_relative_eq!(g(&ax, &ay), g(&x, &y), epsilon = 1e-13);
            // gauge covariance against independent evaluation
            let canonical = ProductStructureChoice::canonical(z.clone());
            let a0x = apply_a(&canonical, &x).unwrap();
            let combo = &a0x.w * Complex64::from(phi.cos())
                + cvec::times_i(&a0x.w) * Complex64::from(phi.sin());
            assert!((&ax.w - combo).norm() < 1e-14);
        }
    }

    #[test]
    fn representative_change_is_a_gauge_shift() {
        // lifting tangents along e^{it} maps the A-family to itself with
        // gauge phi -> phi - 2t
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let z = random_stiefel(2, &mut rng);
        let x = random_unit_tangent(&z, &mut rng);
        let t = 0.37;
        let zt = z.rotated(t);
        let xt = QuadricTangent::new(zt.clone(), cvec::phase(&x.w, t)).unwrap();
        let phi = 1.1;
        let a_up = apply_a(&ProductStructureChoice::with_gauge(zt, phi), &xt).unwrap();
        let a_dn = apply_a(
            &ProductStructureChoice::with_gauge(z, phi - 2.0 * t),
            &x,
        )
        .unwrap();
        assert!((&a_up.w - cvec::phase(&a_dn.w, t)).norm() < 1e-13);
        // g and J are invariant under the representative change trivially
        assert_relative_eq!(g(&xt, &xt), g(&x, &x), epsilon = 1e-15);
    }

    #[test]
    fn curvature_antisymmetry_and_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let z = random_stiefel(3, &mut rng);
        let choice = ProductStructureChoice::with_gauge(z.clone(), 0.8);
        for _ in 0..20 {
            let x = random_unit_tangent(&z, &mut rng);
            let y = random_unit_tangent(&z, &mut rng);
            let zz = random_unit_tangent(&z, &mut rng);
            let w = random_unit_tangent(&z, &mut rng);
            // R(X, X)Z = 0 exactly
            let rxx = curvature_r(&choice, &x, &x, &zz).unwrap();
            assert!(rxx.norm() < 1e-13);
            let rxy = curvature_r(&choice, &x, &y, &zz).unwrap();
            let ryx = curvature_r(&choice, &y, &x, &zz).unwrap();
            assert!((g(&rxy, &w) + g(&ryx, &w)).abs() < 1e-12);
            // pair symmetry
            let rzw = curvature_r(&choice, &zz, &w, &x).unwrap();
            assert!((g(&rxy, &w) - g(&rzw, &y)).abs() < 1e-12);
            // first Bianchi
            let b1 = curvature_r(&choice, &x, &y, &zz).unwrap();
            let b2 = curvature_r(&choice, &y, &zz, &x).unwrap();
            let b3 = curvature_r(&choice, &zz, &x, &y).unwrap();
            assert!((&b1.w + &b2.w + &b3.w).norm() < 1e-12);
        }
    }

    #[test]
    fn frozen_sectional_values() {
        // at z = (1, i, 0, 0)/sqrt2 in the 2-dimensional quadric
        let z = reference_point();
        let choice = ProductStructureChoice::canonical(z.clone());
        let x = QuadricTangent::new(z.clone(), slot(2, Complex64::new(1.0, 0.0))).unwrap();
        let jx = apply_j(&x);
        // holomorphic plane through an A-eigenvector: K = 2
        let k = sectional(&choice, &x, &jx).unwrap();
        assert_relative_eq!(k, 2.0, epsilon = 1e-13);
        // the paired numerator g(R(X,JX)X, JX) = -K here
        let r = curvature_r(&choice, &x, &jx, &x).unwrap();
        assert_relative_eq!(g(&r, &jx), -2.0, epsilon = 1e-13);
        // holomorphic plane through an isotropic vector: K = 4
        let iso = QuadricTangent::new(
            z.clone(),
            cvec::from_interleaved(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]) / Complex64::from(2.0f64.sqrt()),
        )
        .unwrap();
        let k4 = sectional(&choice, &iso, &apply_j(&iso)).unwrap();
        assert_relative_eq!(k4, 4.0, epsilon = 1e-12);
        // totally real plane with a quarter-turn phase offset: K = 1 (frozen)
        let y = QuadricTangent::new(
            z.clone(),
            slot(3, Complex64::new(0.5f64.sqrt(), 0.5f64.sqrt())),
        )
        .unwrap();
        let k1 = sectional(&choice, &x, &y).unwrap();
        assert_relative_eq!(k1, 1.0, epsilon = 1e-12);
        // real coordinate plane: K = 0 (frozen)
        let y0 = QuadricTangent::new(z, slot(3, Complex64::new(0.0, 1.0))).unwrap();
        let k0 = sectional(&choice, &x, &y0).unwrap();
        assert_relative_eq!(k0, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn einstein_constant_is_twice_dim() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [2usize, 3, 4] {
            let z = random_stiefel(n, &mut rng);
            let choice = ProductStructureChoice::with_gauge(z.clone(), 0.3);
            let basis: Vec<_> = (0..2 * n)
                .map(|_| random_unit_tangent(&z, &mut rng))
                .collect();
            let (c, residual) = ricci_check(&choice, &basis).unwrap();
            assert_relative_eq!(c, 2.0 * n as f64, epsilon = 1e-8);
            assert!(residual <= 1e-10, "residual {residual}");
        }
    }

    #[test]
    fn sectional_range_of_q2() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let z = random_stiefel(2, &mut rng);
        let choice = ProductStructureChoice::canonical(z);
        let (lo, hi) = sectional_range(&choice, 20_000, &mut rng).unwrap();
        assert!(lo >= -1e-9, "min {lo}");
        assert!(hi <= 4.0 + 1e-9, "max {hi}");
        assert!(hi > 3.9, "max {hi}");
        assert!(lo < 0.1, "min {lo}");
    }

    #[test]
    fn lemma2_constant_curve_is_stationary() {
        struct Constant(Vec<f64>);
        impl RealMap for Constant {
            fn dim_in(&self) -> usize {
                1
            }
            fn dim_out(&self) -> usize {
                self.0.len()
            }
            fn eval(&self, _: &[f64]) -> Vec<f64> {
                self.0.clone()
            }
            fn eval_d1(&self, _: &[crate::numcore::Dual]) -> Vec<crate::numcore::Dual> {
                unimplemented!()
            }
            fn eval_d2(&self, _: &[crate::numcore::Dual2]) -> Vec<crate::numcore::Dual2> {
                unimplemented!()
            }
            fn eval_d3(&self, _: &[crate::numcore::Dual3]) -> Vec<crate::numcore::Dual3> {
                unimplemented!()
            }
        }
        let z = reference_point();
        let curve = Constant(cvec::to_interleaved(z.vector()));
        let samples = check_lemma2(&curve, &[0.0, 0.4]).unwrap();
        for s in samples {
            assert!(s.s_value.abs() < 1e-12);
            assert!(s.rest < 1e-12);
        }
    }
}
