//! Closed-form example hypersurfaces with known principal data, used as
//! oracles by every check, plus the curve corpus for the quadric's
//! normal-field derivative checks.

use crate::error::{Error, Result};
use crate::numcore::map::{RealMap, Smooth};
use crate::numcore::Real;
use crate::sphere::{BoxDomain, HypersurfacePatch};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::sync::Arc;

/// A named example hypersurface together with its expected constant principal
/// curvatures (None for non-isoparametric entries).
pub struct CatalogEntry {
    pub name: String,
    pub patch: HypersurfacePatch,
    /// Sorted descending; None when the curvatures are not constant.
    pub expected_lambdas: Option<Vec<f64>>,
}

impl CatalogEntry {
    /// Expected angle functions arccot(lambda_j) in (0, pi), when defined.
    pub fn expected_thetas(&self) -> Option<Vec<f64>> {
        self.expected_lambdas
            .as_ref()
            .map(|ls| ls.iter().map(|&l| 1.0f64.atan2(l)).collect())
    }
}

/// Embedding of the round k-sphere by nested angles:
/// sph(u; 1) = (cos u_0, sin u_0),
/// sph(u; k) = (cos u_0, sin u_0 * sph(u_1.., k-1)).
pub fn unit_sphere_chart<T: Real>(u: &[T], k: usize) -> Vec<T> {
    debug_assert_eq!(u.len(), k);
    if k == 1 {
        return vec![u[0].cos(), u[0].sin()];
    }
    let c = u[0].cos();
    let s = u[0].sin();
    let mut out = Vec::with_capacity(k + 1);
    out.push(c);
    for x in unit_sphere_chart(&u[1..], k - 1) {
        out.push(s.clone() * x);
    }
    out
}

fn sphere_domain(k: usize) -> BoxDomain {
    // colatitude-like angles stay away from the chart singularities;
    // the final azimuth is unrestricted by geometry
    let mut lo = vec![0.1 + 0.2; k]; // tightened further below
    let mut hi = vec![PI - 0.3; k];
    lo[k - 1] = -3.0;
    hi[k - 1] = 3.0;
    for i in 0..k.saturating_sub(1) {
        lo[i] = 0.3;
        hi[i] = PI - 0.3;
    }
    BoxDomain::new(lo, hi)
}

struct GeodesicSphereChart {
    n: usize,
    rho: f64,
}

impl Smooth for GeodesicSphereChart {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        self.n + 2
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        let (s, c) = (self.rho.sin(), self.rho.cos());
        let q = unit_sphere_chart(p, self.n);
        let mut out: Vec<T> = q.iter().map(|x| x.scale(s)).collect();
        out.push(T::from_f64(c));
        out
    }
}

/// Distance sphere of geodesic radius rho about the pole; principal
/// curvatures cot(rho) with respect to the inward-pointing convention.
pub fn geodesic_sphere(n: usize, rho: f64) -> Result<CatalogEntry> {
    check_dim(n)?;
    if !(rho > 0.0 && rho < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "geodesic sphere radius must lie in (0, pi/2), got {rho}"
        )));
    }
    Ok(geodesic_like(n, rho, format!("geodesic:n={n},rho={rho}")))
}

/// Totally geodesic equatorial sphere (lambda = 0).
pub fn great_sphere(n: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    Ok(geodesic_like(n, FRAC_PI_2, format!("great:n={n}")))
}

fn geodesic_like(n: usize, rho: f64, name: String) -> CatalogEntry {
    let chart = Arc::new(GeodesicSphereChart { n, rho });
    // the oriented cross-product normal equals (-1)^n times the inward
    // normal that yields lambda = cot(rho); flip on odd n
    let patch = HypersurfacePatch::new(n, sphere_domain(n), chart)
        .with_orientation_flipped(n % 2 == 1);
    let lam = 1.0 / rho.tan();
    CatalogEntry {
        name,
        patch,
        expected_lambdas: Some(vec![lam; n]),
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidParameter(format!(
            "hypersurface dimension {n} out of supported range 1..=8"
        )));
    }
    Ok(())
}

struct CliffordChart {
    rho: f64,
}

impl Smooth for CliffordChart {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        4
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        let (c, s) = (self.rho.cos(), self.rho.sin());
        vec![
            p[0].cos().scale(c),
            p[0].sin().scale(c),
            p[1].cos().scale(s),
            p[1].sin().scale(s),
        ]
    }
}

/// Conventional unit normal of the Clifford torus, in closed form. Matches
/// the oriented cross-product normal of `CliffordChart`.
pub(crate) fn clifford_normal<T: Real>(rho: f64, p: &[T]) -> Vec<T> {
    let (c, s) = (rho.cos(), rho.sin());
    vec![
        p[0].cos().scale(s),
        p[0].sin().scale(s),
        p[1].cos().scale(-c),
        p[1].sin().scale(-c),
    ]
}

/// Flat torus S^1(cos rho) x S^1(sin rho) in S^3, principal curvatures
/// (cot rho, -tan rho).
pub fn clifford_torus(rho: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0 && rho < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "clifford torus parameter must lie in (0, pi/2), got {rho}"
        )));
    }
    let chart = Arc::new(CliffordChart { rho });
    let patch = HypersurfacePatch::new(
        2,
        BoxDomain::new(vec![-3.0, -3.0], vec![3.0, 3.0]),
        chart,
    );
    Ok(CatalogEntry {
        name: format!("clifford:rho={rho}"),
        patch,
        expected_lambdas: Some(vec![1.0 / rho.tan(), -rho.tan()]),
    })
}

struct GeneralizedCliffordChart {
    p: usize,
    q: usize,
    rho: f64,
}

impl Smooth for GeneralizedCliffordChart {
    fn dim_in(&self) -> usize {
        self.p + self.q
    }
    fn dim_out(&self) -> usize {
        self.p + self.q + 2
    }
    fn apply<T: Real>(&self, u: &[T]) -> Vec<T> {
        let (s, c) = (self.rho.sin(), self.rho.cos());
        let qp = unit_sphere_chart(&u[..self.p], self.p);
        let qq = unit_sphere_chart(&u[self.p..], self.q);
        qp.iter()
            .map(|x| x.scale(s))
            .chain(qq.iter().map(|x| x.scale(c)))
            .collect()
    }
}

/// Product of round factor spheres inside S^{p+q+1}: curvature cot(rho) with
/// multiplicity p on the first factor and -tan(rho) with multiplicity q on
/// the second.
pub fn generalized_clifford(p: usize, q: usize, rho: f64) -> Result<CatalogEntry> {
    if p == 0 || q == 0 || p + q > 8 {
        return Err(Error::InvalidParameter(format!(
            "factor dimensions must be positive with p + q <= 8, got p={p}, q={q}"
        )));
    }
    if !(rho > 0.0 && rho < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "generalized clifford parameter must lie in (0, pi/2), got {rho}"
        )));
    }
    let n = p + q;
    let chart = Arc::new(GeneralizedCliffordChart { p, q, rho });
    let dom_p = sphere_domain(p);
    let dom_q = sphere_domain(q);
    let domain = BoxDomain::new(
        dom_p.lo.iter().chain(dom_q.lo.iter()).copied().collect(),
        dom_p.hi.iter().chain(dom_q.hi.iter()).copied().collect(),
    );
    // cross-product orientation differs from the cot-convention normal by
    // (-1)^p; flip on odd p
    let patch = HypersurfacePatch::new(n, domain, chart).with_orientation_flipped(p % 2 == 1);
    let mut lambdas = vec![1.0 / rho.tan(); p];
    lambdas.extend(vec![-rho.tan(); q]);
    Ok(CatalogEntry {
        name: format!("genclifford:p={p},q={q},rho={rho}"),
        patch,
        expected_lambdas: Some(lambdas),
    })
}

struct PerturbedGraphChart {
    rho: f64,
    eps: f64,
}

impl PerturbedGraphChart {
    fn height<T: Real>(&self, p: &[T]) -> T {
        // graph height over the Clifford torus; frequency calibrated so the
        // curvature spread stays >= eps/2 for eps <= 0.05
        (p[0].scale(2.0).sin() * p[1].scale(2.0).cos()).scale(self.eps)
    }
}

impl Smooth for PerturbedGraphChart {
    fn dim_in(&self) -> usize {
        2
    }
    fn dim_out(&self) -> usize {
        4
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        let base = CliffordChart { rho: self.rho };
        let a = base.apply(p);
        let b = clifford_normal(self.rho, p);
        let h = self.height(p);
        let (ch, sh) = (h.cos(), h.sin());
        a.iter()
            .zip(b.iter())
            .map(|(ai, bi)| ai.clone() * ch.clone() - bi.clone() * sh.clone())
            .collect()
    }
}

/// Non-isoparametric normal graph over the Clifford torus at rho = pi/4 with
/// amplitude eps. At eps = 0 this is exactly the Clifford torus.
pub fn perturbed_graph(eps: f64) -> Result<CatalogEntry> {
    perturbed_graph_over(FRAC_PI_4, eps)
}

pub fn perturbed_graph_over(rho: f64, eps: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0 && rho < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "perturbed graph base parameter must lie in (0, pi/2), got {rho}"
        )));
    }
    if eps.abs() > 0.2 {
        return Err(Error::InvalidParameter(format!(
            "perturbation amplitude {eps} too large for a graph over the torus"
        )));
    }
    let chart = Arc::new(PerturbedGraphChart { rho, eps });
    let patch = HypersurfacePatch::new(
        2,
        BoxDomain::new(vec![-3.0, -3.0], vec![3.0, 3.0]),
        chart,
    );
    Ok(CatalogEntry {
        name: format!("perturbed:eps={eps}"),
        patch,
        expected_lambdas: None,
    })
}

/// The entries every verification sweep runs over.
pub fn acceptance_entries() -> Result<Vec<CatalogEntry>> {
    let mut entries = vec![great_sphere(2)?, great_sphere(3)?];
    for rho in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        entries.push(geodesic_sphere(2, rho)?);
        entries.push(geodesic_sphere(3, rho)?);
    }
    for rho in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        entries.push(clifford_torus(rho)?);
    }
    entries.push(generalized_clifford(2, 1, FRAC_PI_3)?);
    entries.push(perturbed_graph(0.03)?);
    Ok(entries)
}

/// Parse an entry spec of the form `name:key=value,key=value`.
pub fn parse_entry(spec: &str) -> Result<CatalogEntry> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n, a),
        None => (spec, ""),
    };
    let mut kv = std::collections::BTreeMap::new();
    for part in args.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("malformed entry parameter '{part}'"))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get_f64 = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<f64> {
        kv.get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{key}'")))?
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("parameter '{key}' is not a number")))
    };
    let get_usize = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<usize> {
        kv.get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{key}'")))?
            .parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("parameter '{key}' is not an integer")))
    };
    match name {
        "great" => great_sphere(get_usize(&kv, "n")?),
        "geodesic" => geodesic_sphere(get_usize(&kv, "n")?, get_f64(&kv, "rho")?),
        "clifford" => clifford_torus(get_f64(&kv, "rho")?),
        "genclifford" => {
            generalized_clifford(get_usize(&kv, "p")?, get_usize(&kv, "q")?, get_f64(&kv, "rho")?)
        }
        "perturbed" => {
            let rho = if kv.contains_key("rho") {
                get_f64(&kv, "rho")?
            } else {
                FRAC_PI_4
            };
            perturbed_graph_over(rho, get_f64(&kv, "eps")?)
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown catalog entry '{other}' (known: great, geodesic, clifford, genclifford, perturbed)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Curve corpus for the normal-field derivative checks on the quadric.
// ---------------------------------------------------------------------------

/// A parametrized curve of Stiefel points, given as a map R -> R^{2(n+2)}.
pub struct CurveSpec {
    pub name: String,
    pub map: Arc<dyn RealMap>,
    pub range: (f64, f64),
}

/// Great circle cos(s) z0 + sin(s) w0 with w0 an isotropic horizontal unit
/// tangent, optionally phase-modulated by e^{i alpha s}. Stays on the Stiefel
/// manifold for all s; the phase modulation makes the lift non-horizontal
/// with connection-form value ~ alpha.
struct StiefelCircle {
    z0: Vec<f64>,
    w0: Vec<f64>,
    alpha: f64,
}

impl Smooth for StiefelCircle {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        self.z0.len()
    }
    fn apply<T: Real>(&self, p: &[T]) -> Vec<T> {
        let s = &p[0];
        let (cs, sn) = (s.cos(), s.sin());
        let phase = s.scale(self.alpha);
        let (pc, ps) = (phase.cos(), phase.sin());
        let m = self.z0.len() / 2;
        let mut out = Vec::with_capacity(2 * m);
        for k in 0..m {
            // unrotated value
            let re = cs.clone().scale(self.z0[2 * k]) + sn.clone().scale(self.w0[2 * k]);
            let im = cs.clone().scale(self.z0[2 * k + 1]) + sn.clone().scale(self.w0[2 * k + 1]);
            // multiply by e^{i alpha s}
            out.push(re.clone() * pc.clone() - im.clone() * ps.clone());
            out.push(re * ps.clone() + im * pc.clone());
        }
        out
    }
}

/// A straight parameter line fed through a lift map, optionally
/// phase-modulated.
pub(crate) struct LiftedLine {
    pub lift: Arc<dyn RealMap>,
    pub origin: Vec<f64>,
    pub dir: Vec<f64>,
    pub alpha: f64,
}

impl LiftedLine {
    fn go<T: crate::numcore::Level>(&self, p: &[T]) -> Vec<T> {
        let s = &p[0];
        let point: Vec<T> = self
            .origin
            .iter()
            .zip(self.dir.iter())
            .map(|(&o, &d)| s.scale(d) + T::from_f64(o))
            .collect();
        let vals = T::eval_map(self.lift.as_ref(), &point);
        let phase = s.scale(self.alpha);
        let (pc, ps) = (phase.cos(), phase.sin());
        let mut out = Vec::with_capacity(vals.len());
        for c in vals.chunks_exact(2) {
            out.push(c[0].clone() * pc.clone() - c[1].clone() * ps.clone());
            out.push(c[0].clone() * ps.clone() + c[1].clone() * pc.clone());
        }
        out
    }
}

impl RealMap for LiftedLine {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        self.lift.dim_out()
    }
    fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.go::<f64>(p)
    }
    fn eval_d1(&self, p: &[crate::numcore::Dual]) -> Vec<crate::numcore::Dual> {
        self.go::<crate::numcore::Dual>(p)
    }
    fn eval_d2(&self, p: &[crate::numcore::Dual2]) -> Vec<crate::numcore::Dual2> {
        self.go::<crate::numcore::Dual2>(p)
    }
    fn eval_d3(&self, p: &[crate::numcore::Dual3]) -> Vec<crate::numcore::Dual3> {
        self.go::<crate::numcore::Dual3>(p)
    }
}

/// The curve corpus in the n-dimensional quadric: plain horizontal great
/// circles, phase-modulated circles (non-zero connection form), and Gauss
/// lifts of catalog hypersurfaces along straight parameter lines.
pub fn lemma2_curves(n: usize, seed: u64) -> Result<Vec<CurveSpec>> {
    use crate::numcore::cvec;
    use crate::quadric::{isotropic_horizontal, random_stiefel};
    use rand::SeedableRng;

    if n < 2 {
        return Err(Error::InvalidParameter(
            "curve corpus needs quadric dimension >= 2".to_string(),
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::new();
    let alphas = [0.0, 0.0, 0.0, 0.0, 0.7, -1.3, 0.45, 2.0];
    for (i, &alpha) in alphas.iter().enumerate() {
        let z0 = random_stiefel(n, &mut rng);
        let w0 = isotropic_horizontal(&z0, &mut rng);
        curves.push(CurveSpec {
            name: format!("circle[{i}]:alpha={alpha}"),
            map: Arc::new(StiefelCircle {
                z0: cvec::to_interleaved(z0.vector()),
                w0: cvec::to_interleaved(w0.lift()),
                alpha,
            }),
            range: (-0.5, 0.5),
        });
    }
    if n == 2 {
        for (entry, alpha) in [
            (clifford_torus(FRAC_PI_4)?, 0.0),
            (geodesic_sphere(2, FRAC_PI_3)?, 0.0),
            (clifford_torus(FRAC_PI_4)?, 0.9),
            (geodesic_sphere(2, FRAC_PI_3)?, -0.6),
        ] {
            let lift = Arc::new(crate::gaussmap::GaussLiftMap::new(Arc::new(entry.patch)));
            let origin = lift.domain_center();
            let dir = vec![0.4, -0.3];
            curves.push(CurveSpec {
                name: format!("gausslift[{}]:alpha={alpha}", entry.name),
                map: Arc::new(LiftedLine {
                    lift,
                    origin,
                    dir,
                    alpha,
                }),
                range: (-0.5, 0.5),
            });
        }
    }
    Ok(curves)
}
