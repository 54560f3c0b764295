//! Generalized symmetric eigenproblem S v = lambda G v for small dense
//! matrices, via Cholesky reduction to a standard symmetric problem.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Floor on the smallest eigenvalue of G below which the metric is treated as
/// degenerate.
pub const METRIC_FLOOR: f64 = 1e-12;

/// Result of the generalized symmetric eigenproblem.
///
/// Eigenvalues sorted descending; eigenvectors are G-orthonormal
/// (`v_j^T G v_k = delta_jk`) with the sign convention that the first
/// component of magnitude above 1e-12 is positive. Ties in lambda are ordered
/// by lexicographically largest eigenvector.
#[derive(Clone, Debug)]
pub struct SymEigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<DVector<f64>>,
}

/// Solve S v = lambda G v with S symmetric and G symmetric positive definite.
#[allow(non_snake_case)]
pub fn generalized_sym_eig(S: &DMatrix<f64>, G: &DMatrix<f64>) -> Result<SymEigResult> {
    let n = S.nrows();
    assert_eq!(S.ncols(), n);
    assert_eq!(G.shape(), (n, n));

    let g_eig = G.clone().symmetric_eigen();
    let min_eig = g_eig.eigenvalues.min();
    if min_eig <= METRIC_FLOOR {
        return Err(Error::DegenerateMetric {
            min_eig,
            floor: METRIC_FLOOR,
        });
    }
    let chol = G
        .clone()
        .cholesky()
        .ok_or(Error::DegenerateMetric { min_eig, floor: METRIC_FLOOR })?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMetric { min_eig, floor: METRIC_FLOOR })?;

    // M = L^{-1} S L^{-T} is symmetric with the same eigenvalues.
    let m = &l_inv * S * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();

    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|j| {
            let y = eig.eigenvectors.column(j).into_owned();
            let mut v = l_inv.transpose() * y;
            fix_sign(&mut v);
            (eig.eigenvalues[j], v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| lex_cmp(&b.1, &a.1))
    });

    Ok(SymEigResult {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.1).collect(),
    })
}

fn fix_sign(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            *v = -v.clone();
        }
    }
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y).unwrap() {
            std::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Re-align eigenvectors to a previous frame along a parameter sweep.
///
/// Within groups of (nearly) equal eigenvalues the eigenbasis is not unique;
/// this projects the previous frame onto the current eigenspace,
/// G-orthonormalizes, and keeps the result closest to `prev`. Frames stay
/// continuous across umbilic points.
#[allow(non_snake_case)]
pub fn align_to_previous(
    result: &SymEigResult,
    prev: &[DVector<f64>],
    G: &DMatrix<f64>,
    lambda_tol: f64,
) -> SymEigResult {
    let n = result.eigenvalues.len();
    let mut vectors = result.eigenvectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (result.eigenvalues[end] - result.eigenvalues[start]).abs() <= lambda_tol {
            end += 1;
        }
        if end - start > 1 || {
            // even for 1-dim spaces, match the sign to the previous frame
            true
        } {
            let group: Vec<_> = (start..end).collect();
            // project each previous vector onto span(group) in the G metric
            let mut new_vs: Vec<DVector<f64>> = Vec::with_capacity(group.len());
            for (slot, &gi) in group.iter().enumerate() {
                let target = &prev[start + slot];
                let mut proj = DVector::zeros(target.len());
                for &gj in &group {
                    let c = (target.transpose() * G * &result.eigenvectors[gj])[(0, 0)];
                    proj += &result.eigenvectors[gj] * c;
                }
                // G-orthogonalize against already accepted vectors in the group
                for w in &new_vs {
                    let c = (proj.transpose() * G * w)[(0, 0)];
                    proj -= w * c;
                }
                let norm2 = (proj.transpose() * G * &proj)[(0, 0)];
                if norm2 > 1e-20 {
                    new_vs.push(proj / norm2.sqrt());
                } else {
                    new_vs.push(result.eigenvectors[gi].clone());
                }
            }
            for (slot, v) in new_vs.into_iter().enumerate() {
                vectors[start + slot] = v;
            }
        }
        start = end;
    }
    SymEigResult {
        eigenvalues: result.eigenvalues.clone(),
        eigenvectors: vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_case() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let g = DMatrix::identity(2, 2);
        let r = generalized_sym_eig(&s, &g).unwrap();
        assert_eq!(r.eigenvalues, vec![2.0, 1.0]);
        assert_relative_eq!(r.eigenvectors[0][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvectors[1][1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn umbilic_zero_matrix() {
        let s = DMatrix::zeros(3, 3);
        let g = DMatrix::identity(3, 3);
        let r = generalized_sym_eig(&s, &g).unwrap();
        assert!(r.eigenvalues.iter().all(|&l| l == 0.0));
        // orthonormal with the sign convention
        for v in &r.eigenvectors {
            let first = v.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
        for i in 0..3 {
            for j in 0..3 {
                let d = r.eigenvectors[i].dot(&r.eigenvectors[j]);
                assert_relative_eq!(d, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn offdiagonal_closed_form() {
        // S = [[0,1],[1,0]]: lambda = (1, -1), v = (1,1)/sqrt2 and (1,-1)/sqrt2
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let g = DMatrix::identity(2, 2);
        let r = generalized_sym_eig(&s, &g).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvalues[1], -1.0, epsilon = 1e-14);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert_relative_eq!(r.eigenvectors[0][0], inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvectors[0][1], inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvectors[1][0], inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvectors[1][1], -inv_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let s = DMatrix::identity(2, 2);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            generalized_sym_eig(&s, &g),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    fn random_sym(n: usize, vals: &[f64]) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |i, j| vals[i * n + j]);
        (&a + a.transpose()) * 0.5
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn reconstructs_s(n in 2usize..=6, raw in prop::collection::vec(-2.0..2.0f64, 72)) {
            let s = random_sym(n, &raw);
            let b = DMatrix::from_fn(n, n, |i, j| raw[36 + i * n + j]);
            let g = &b * b.transpose() + DMatrix::identity(n, n) * (n as f64);
            let r = generalized_sym_eig(&s, &g).unwrap();
            // S = G V Lambda V^T G
            let v = DMatrix::from_columns(&r.eigenvectors.iter().map(|c| c.column(0)).collect::<Vec<_>>());
            let lam = DMatrix::from_diagonal(&DVector::from_vec(r.eigenvalues.clone()));
            let rec = &g * &v * lam * v.transpose() * &g;
            let err = (&s - rec).norm();
            prop_assert!(err <= 1e-10 * s.norm().max(1.0), "residual {}", err);
            // G-orthonormality
            let gram = v.transpose() * &g * &v;
            prop_assert!((gram - DMatrix::identity(n, n)).norm() < 1e-10);
        }
    }
}
