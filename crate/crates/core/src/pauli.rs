//! Hermitian matrices and the tensorized Pauli basis.
//!
//! Complex arithmetic stays inside this module. Downstream code handles a
//! Hermitian matrix only through its real coefficient vector in the Pauli
//! basis, which is an isometry from Hilbert-Schmidt to Euclidean norm.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix, ParamVector};

const HERMITIAN_TOL: f64 = 1e-12;

/// Largest supported matrix size `m = 2^l`.
pub const MAX_PAULI_SIZE: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(m: usize, data: Vec<Complex64>) -> Result<Self> {
        if m == 0 || data.len() != m * m {
            return Err(Error::Size(format!(
                "expected {m}x{m} entries, got {}",
                data.len()
            )));
        }
        let h = HermitianMatrix { m, data };
        for i in 0..m {
            for j in i..m {
                if (h.get(i, j) - h.get(j, i).conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::Numerical(format!(
                        "matrix not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        Ok(h)
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let m = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(m, data)
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.m + j]
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            m: self.m,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn kron(&self, other: &HermitianMatrix) -> HermitianMatrix {
        let (a, b) = (self.m, other.m);
        let m = a * b;
        let mut data = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..a {
            for j in 0..a {
                let x = self.get(i, j);
                for k in 0..b {
                    for l in 0..b {
                        data[(i * b + k) * m + (j * b + l)] = x * other.get(k, l);
                    }
                }
            }
        }
        HermitianMatrix { m, data }
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Operator (spectral) norm.
    ///
    /// Computed from the real symmetric embedding `[[Re, -Im], [Im, Re]]`,
    /// whose spectrum is that of the Hermitian matrix with each eigenvalue
    /// doubled in multiplicity.
    pub fn operator_norm(&self) -> Result<f64> {
        let m = self.m;
        let mut real = Matrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                let z = self.get(i, j);
                real.set(i, j, z.re);
                real.set(i + m, j + m, z.re);
                real.set(i, j + m, -z.im);
                real.set(i + m, j, z.im);
            }
        }
        let (vals, _) = symmetric_eigen(&real)?;
        Ok(vals.iter().fold(0.0, |acc, v| acc.max(v.abs())))
    }
}

/// Hilbert-Schmidt inner product `Re tr(a^* b)`.
pub fn hs_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.m != b.m {
        return Err(Error::Dimension {
            expected: a.m,
            got: b.m,
        });
    }
    let tr: Complex64 = a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum();
    Ok(tr.re)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The four 2x2 matrices `sigma_0..sigma_3`, with `sigma_2 = [[0, i], [-i, 0]]`.
pub fn sigma_matrices() -> [HermitianMatrix; 4] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        HermitianMatrix { m: 2, data: vec![one, z, z, one] },
        HermitianMatrix { m: 2, data: vec![z, one, one, z] },
        HermitianMatrix { m: 2, data: vec![z, i, -i, z] },
        HermitianMatrix { m: 2, data: vec![one, z, z, -one] },
    ]
}

/// All `4^l` tensor products `W_{i1} x ... x W_{il}` with `W_i = sigma_i / sqrt 2`,
/// indexed lexicographically in `(i1, ..., il)`.
pub fn pauli_basis(l: usize) -> Result<Vec<HermitianMatrix>> {
    if l == 0 || l >= usize::BITS as usize || (1usize << l) > MAX_PAULI_SIZE {
        return Err(Error::Size(format!(
            "Pauli basis needs 1 <= l and 2^l <= {MAX_PAULI_SIZE}, got l = {l}"
        )));
    }
    let w: Vec<HermitianMatrix> = sigma_matrices()
        .iter()
        .map(|s| s.scale(std::f64::consts::FRAC_1_SQRT_2))
        .collect();
    let mut basis = w.clone();
    for _ in 1..l {
        basis = basis
            .iter()
            .flat_map(|b| w.iter().map(move |wi| b.kron(wi)))
            .collect();
    }
    Ok(basis)
}

/// Real coefficients `<H, E_j>_HS` of `h` in the given orthonormal basis.
pub fn to_coefficients(h: &HermitianMatrix, basis: &[HermitianMatrix]) -> Result<ParamVector> {
    let coeffs = basis
        .iter()
        .map(|e| hs_inner(e, h))
        .collect::<Result<Vec<_>>>()?;
    ParamVector::new(coeffs)
}

/// Inverse of [`to_coefficients`]: `sum_j c_j E_j`.
pub fn from_coefficients(coeffs: &ParamVector, basis: &[HermitianMatrix]) -> Result<HermitianMatrix> {
    if coeffs.dim() != basis.len() {
        return Err(Error::Dimension {
            expected: basis.len(),
            got: coeffs.dim(),
        });
    }
    let m = basis[0].m;
    let mut data = vec![c(0.0, 0.0); m * m];
    for (cj, e) in coeffs.iter().zip(basis) {
        for (acc, x) in data.iter_mut().zip(&e.data) {
            *acc += x * cj;
        }
    }
    HermitianMatrix::new(m, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_error(basis: &[HermitianMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b).unwrap() - target).abs());
            }
        }
        worst
    }

    #[test]
    fn single_qubit_basis_matches_sigma_over_sqrt2() {
        let basis = pauli_basis(1).unwrap();
        assert_eq!(basis.len(), 4);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = sigma_matrices();
        for (w, sig) in basis.iter().zip(&s) {
            assert!(w.max_abs_diff(&sig.scale(r)) < 1e-15);
        }
        // sigma_2 as displayed: [[0, i], [-i, 0]]
        assert_eq!(s[2].get(0, 1), c(0.0, 1.0));
        assert_eq!(s[2].get(1, 0), c(0.0, -1.0));
        assert!(gram_error(&basis) < 1e-12);
    }

    #[test]
    fn two_qubit_gram_is_identity() {
        let basis = pauli_basis(2).unwrap();
        assert_eq!(basis.len(), 16);
        assert!(basis.iter().all(|b| b.size() == 4));
        assert!(gram_error(&basis) < 1e-12);
    }

    #[test]
    fn lexicographic_order() {
        let basis = pauli_basis(2).unwrap();
        let w = pauli_basis(1).unwrap();
        // index 1*4 + 3 is W_1 x W_3
        assert!(basis[7].max_abs_diff(&w[1].kron(&w[3])) < 1e-15);
    }

    #[test]
    fn hs_inner_examples() {
        let s = sigma_matrices();
        let id_n = s[0].scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!((hs_inner(&id_n, &id_n).unwrap() - 1.0).abs() < 1e-15);
        let w = pauli_basis(1).unwrap();
        assert_eq!(hs_inner(&w[1], &w[2]).unwrap(), 0.0);
        assert_eq!(hs_inner(&s[3], &s[3]).unwrap(), 2.0);
    }

    #[test]
    fn hs_inner_dimension_mismatch() {
        let a = pauli_basis(1).unwrap();
        let b = pauli_basis(2).unwrap();
        assert!(matches!(
            hs_inner(&a[0], &b[0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(pauli_basis(0).is_err());
        assert!(pauli_basis(6).is_err());
        assert_eq!(pauli_basis(5).unwrap().len(), 1024);
    }

    #[test]
    fn non_hermitian_rejected() {
        let z = c(0.0, 0.0);
        let res = HermitianMatrix::new(2, vec![z, c(1.0, 0.0), z, z]);
        assert!(res.is_err());
    }

    #[test]
    fn operator_norm_bound() {
        for l in 1..=3 {
            let m = (1usize << l) as f64;
            for e in pauli_basis(l).unwrap() {
                assert!(e.operator_norm().unwrap() <= m.powf(-0.5) + 1e-12);
            }
        }
    }
}
