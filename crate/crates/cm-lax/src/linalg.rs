//! Complex dense linear algebra helpers: deterministic eigendecomposition
//! and characteristic polynomials.
//!
//! Everything routes through the complex Schur form. Eigenvalues are the
//! triangular diagonal; eigenvectors come from back-substitution in the
//! triangular factor and are rotated back by the unitary factor. The
//! decomposition is post-processed into a canonical form (lexicographic
//! eigenvalue order, unit-norm vectors with positive-real leading entry)
//! so that downstream coordinate charts are deterministic functions of the
//! input matrix.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigendecomposition in canonical order: `values[j]` pairs with column
/// `j` of `vectors`.
#[derive(Debug, Clone)]
pub(crate) struct Eigendecomposition {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
}

/// Total order on complex numbers by (real, imaginary); canonical
/// eigenvalue ordering everywhere in this crate.
pub(crate) fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigenvalues alone, lexicographically sorted.
pub(crate) fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let t = schur_triangle(m)?.1;
    let mut vals: Vec<Complex64> = t.diagonal().iter().copied().collect();
    vals.sort_by(lex_cmp);
    Ok(vals)
}

fn schur_triangle(m: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or_else(|| {
        Error::SingularMatrix {
            message: "Schur iteration did not converge".to_string(),
        }
    })?;
    let (q, t) = schur.unpack();
    Ok((q, t))
}

/// Full eigendecomposition with the canonical normalization: eigenvalues
/// sorted lexicographically by (re, im); each eigenvector unit-norm with
/// its first entry of magnitude above `1e-12` rotated positive-real.
///
/// Eigenvectors of the triangular factor are found by back-substitution;
/// a denominator collapsing below roundoff scale (repeated eigenvalue) is
/// clamped so the result stays finite, and callers that need simple
/// spectra must enforce their own gap thresholds.
pub(crate) fn eigendecompose(m: &DMatrix<Complex64>) -> Result<Eigendecomposition> {
    let n = m.nrows();
    let (q, t) = schur_triangle(m)?;
    let clamp = f64::EPSILON * t.norm().max(1.0);

    let mut pairs: Vec<(Complex64, DMatrix<Complex64>)> = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let mut y = DMatrix::<Complex64>::zeros(n, 1);
        y[(i, 0)] = ONE;
        for j in (0..i).rev() {
            let mut s = ZERO;
            for l in (j + 1)..=i {
                s += t[(j, l)] * y[(l, 0)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < clamp {
                d = Complex64::new(clamp, 0.0);
            }
            y[(j, 0)] = -s / d;
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        if let Some(lead) = v.iter().find(|e| e.norm() > 1e-12) {
            let phase = lead.conj() / Complex64::new(lead.norm(), 0.0);
            v *= phase;
        }
        pairs.push((lambda, v));
    }

    pairs.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let values: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (j, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(j, &v.column(0));
    }
    Ok(Eigendecomposition { values, vectors })
}

/// Monic characteristic polynomial `prod_j (k - lambda_j)` from the
/// eigenvalues, coefficients in descending powers of `k` (leading 1).
pub(crate) fn char_poly_from_eigenvalues(values: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![ONE];
    for &lambda in values {
        let mut next = vec![ZERO; coeffs.len() + 1];
        for (idx, &c) in coeffs.iter().enumerate() {
            next[idx] += c;
            next[idx + 1] -= lambda * c;
        }
        coeffs = next;
    }
    coeffs
}

/// Inverse with an explicit singularity error carrying `context`.
pub(crate) fn inverse_checked(m: &DMatrix<Complex64>, context: &str) -> Result<DMatrix<Complex64>> {
    m.clone().try_inverse().ok_or_else(|| Error::SingularMatrix {
        message: context.to_string(),
    })
}

/// `m^e` by repeated multiplication; exponents here are single digits, so
/// binary powering would only obscure the arithmetic.
pub(crate) fn mat_pow(m: &DMatrix<Complex64>, e: u32) -> DMatrix<Complex64> {
    let mut acc: DMatrix<Complex64> = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..e {
        acc *= m;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(m: &DMatrix<Complex64>, e: &Eigendecomposition) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..e.values.len() {
            let v = e.vectors.column(j).clone_owned();
            let r = m * &v - v * e.values[j];
            worst = worst.max(r.norm());
        }
        worst
    }

    #[test]
    fn diagonal_matrix_sorts_and_normalizes() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(2.0, 0.0),
            c64(-1.0, 0.0),
            c64(2.0, -3.0),
        ]));
        let e = eigendecompose(&m).unwrap();
        assert_eq!(e.values[0], c64(-1.0, 0.0));
        assert_eq!(e.values[1], c64(2.0, -3.0));
        assert_eq!(e.values[2], c64(2.0, 0.0));
        assert!(residual(&m, &e) < 1e-12);
        for j in 0..3 {
            let lead = e
                .vectors
                .column(j)
                .iter()
                .copied()
                .find(|x| x.norm() > 1e-12)
                .unwrap();
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }

    #[test]
    fn rotation_block_has_imaginary_pair() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let e = eigendecompose(&m).unwrap();
        assert!((e.values[0] - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((e.values[1] - c64(0.0, 1.0)).norm() < 1e-14);
        assert!(residual(&m, &e) < 1e-13);
    }

    #[test]
    fn dense_nonnormal_matrix_eigenpairs_are_accurate() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                c64(0.3, 0.1),
                c64(-1.2, 0.4),
                c64(0.5, -0.3),
                c64(0.0, 0.7),
                c64(0.8, 0.0),
                c64(0.1, -0.5),
                c64(-0.4, 0.2),
                c64(0.9, -0.1),
                c64(-0.2, 0.6),
                c64(0.3, 0.3),
                c64(0.7, -0.7),
                c64(-0.5, 0.0),
                c64(0.4, -0.2),
                c64(0.0, 0.1),
                c64(-0.6, 0.5),
                c64(0.2, 0.8),
            ],
        );
        let e = eigendecompose(&m).unwrap();
        assert!(residual(&m, &e) < 1e-10, "residual {}", residual(&m, &e));
        let again = eigendecompose(&m).unwrap();
        for (a, b) in e.values.iter().zip(again.values.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn char_poly_matches_hand_expansion() {
        let coeffs = char_poly_from_eigenvalues(&[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)]);
        let expect = [1.0, -6.0, 11.0, -6.0];
        for (c, e) in coeffs.iter().zip(expect.iter()) {
            assert!((c - c64(*e, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn near_degenerate_spectrum_stays_finite() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                c64(1.0, 0.0),
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(1.0 + 1e-15, 0.0),
            ],
        );
        let e = eigendecompose(&m).unwrap();
        for v in e.vectors.iter() {
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    #[test]
    fn inverse_checked_reports_singularity() {
        let m = DMatrix::<Complex64>::zeros(2, 2);
        let err = inverse_checked(&m, "probe").unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
    }
}
