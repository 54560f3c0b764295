//! Complex vectors in C^{n+2} with the three pairings used throughout:
//! Hermitian product, its real part (the Euclidean product on R^{2n+4}),
//! and the complex bilinear dot.

use nalgebra::DVector;
use num_complex::Complex64;

/// Ambient complex vector.
pub type CVec = DVector<Complex64>;

/// Hermitian inner product `sum_k w_k conj(z_k)`; conjugate-symmetric.
pub fn herm(w: &CVec, z: &CVec) -> Complex64 {
    w.iter().zip(z.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Real inner product `Re herm(w, z)`; the Euclidean product on R^{2n+4}.
pub fn re_inner(w: &CVec, z: &CVec) -> f64 {
    herm(w, z).re
}

/// Complex bilinear dot `sum_k w_k z_k`; symmetric.
pub fn bil(w: &CVec, z: &CVec) -> Complex64 {
    w.iter().zip(z.iter()).map(|(a, b)| a * b).sum()
}

/// Euclidean norm.
pub fn norm(w: &CVec) -> f64 {
    re_inner(w, w).sqrt()
}

/// Entrywise conjugate.
pub fn conj(w: &CVec) -> CVec {
    w.map(|c| c.conj())
}

/// Multiply by i.
pub fn times_i(w: &CVec) -> CVec {
    w.map(|c| Complex64::new(-c.im, c.re))
}

/// Multiply by the unit phase e^{i t}.
pub fn phase(w: &CVec, t: f64) -> CVec {
    let p = Complex64::new(t.cos(), t.sin());
    w.map(|c| c * p)
}

/// Build a CVec from interleaved reals `[re_0, im_0, re_1, im_1, ...]`.
pub fn from_interleaved(vals: &[f64]) -> CVec {
    debug_assert!(vals.len() % 2 == 0);
    CVec::from_iterator(
        vals.len() / 2,
        vals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])),
    )
}

/// Flatten to interleaved reals.
pub fn to_interleaved(w: &CVec) -> Vec<f64> {
    w.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Build from real and imaginary real vectors.
pub fn from_re_im(re: &[f64], im: &[f64]) -> CVec {
    debug_assert_eq!(re.len(), im.len());
    CVec::from_iterator(
        re.len(),
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(vals: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(vals.len(), vals.iter().map(|&(a, b)| Complex64::new(a, b)))
    }

    proptest! {
        #[test]
        fn pairing_symmetries(raw in prop::collection::vec(-3.0..3.0f64, 16)) {
            let w = cv(&[(raw[0], raw[1]), (raw[2], raw[3]), (raw[4], raw[5]), (raw[6], raw[7])]);
            let z = cv(&[(raw[8], raw[9]), (raw[10], raw[11]), (raw[12], raw[13]), (raw[14], raw[15])]);
            // herm conjugate-symmetric
            let h = herm(&w, &z);
            let hc = herm(&z, &w).conj();
            prop_assert!((h - hc).norm() < 1e-12);
            // bil symmetric
            prop_assert!((bil(&w, &z) - bil(&z, &w)).norm() < 1e-12);
            // re_inner agrees with the Euclidean product on R^{2n+4}
            let wi = to_interleaved(&w);
            let zi = to_interleaved(&z);
            let dot: f64 = wi.iter().zip(zi.iter()).map(|(a, b)| a * b).sum();
            prop_assert!((re_inner(&w, &z) - dot).abs() < 1e-12);
        }
    }

    #[test]
    fn interleave_roundtrip() {
        let w = cv(&[(1.0, -2.0), (0.5, 0.0), (0.0, 3.0)]);
        assert_eq!(from_interleaved(&to_interleaved(&w)), w);
    }

    #[test]
    fn times_i_squares_to_negation() {
        let w = cv(&[(1.0, -2.0), (0.5, 0.25)]);
        assert_eq!(times_i(&times_i(&w)), -w.clone());
    }
}
