use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{field, EigenSolution, SolverMethod};
use crate::error::Result;
use crate::lattice::CutoffBasis;
use crate::operator::HamiltonianOperator;

// Real orthonormal basis of the Hermitian-symmetric subspace: the constant,
// then for each k > 0 (lexicographic) the pair
//   c_k = (e_k + e_{-k}) / √2,   s_k = -i (e_k - e_{-k}) / √2.
fn real_basis_column(basis: &CutoffBasis, col: usize) -> [(usize, Complex64); 2] {
    let n = basis.len();
    let origin = basis.origin();
    if col == 0 {
        return [
            (origin, Complex64::new(1.0, 0.0)),
            (origin, Complex64::new(0.0, 0.0)),
        ];
    }
    let pair = (col - 1) / 2;
    let p = origin + 1 + pair;
    let q = n - 1 - p;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if (col - 1).is_multiple_of(2) {
        [(p, Complex64::new(r, 0.0)), (q, Complex64::new(r, 0.0))]
    } else {
        [(p, Complex64::new(0.0, -r)), (q, Complex64::new(0.0, r))]
    }
}

/// The Galerkin matrix expressed in the real cosine/sine basis of the
/// real-valued subspace; real symmetric.
pub fn real_symmetric_matrix(op: &HamiltonianOperator) -> Result<DMatrix<f64>> {
    let h = op.dense_matrix()?;
    let basis = op.basis();
    let n = basis.len();
    let cols: Vec<_> = (0..n).map(|c| real_basis_column(basis, c)).collect();
    let mut out = DMatrix::zeros(n, n);
    for b in 0..n {
        for a in 0..=b {
            let mut s = Complex64::new(0.0, 0.0);
            for &(i, ui) in &cols[a] {
                for &(j, uj) in &cols[b] {
                    s += ui.conj() * h[(i, j)] * uj;
                }
            }
            out[(a, b)] = s.re;
            out[(b, a)] = s.re;
        }
    }
    Ok(out)
}

/// Lowest `n` eigenpairs by full diagonalization of the Galerkin matrix.
pub fn solve_dense(op: &HamiltonianOperator, n: usize) -> Result<EigenSolution> {
    let hr = real_symmetric_matrix(op)?;
    let eig = SymmetricEigen::new(hr);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let basis = op.basis();
    let len = basis.len();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut ws = op.workspace();
    let mut hv = vec![Complex64::new(0.0, 0.0); len];
    for &idx in order.iter().take(n) {
        let real = eig.eigenvectors.column(idx);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for (c, &x) in real.iter().enumerate() {
            for (i, u) in real_basis_column(basis, c) {
                coeffs[i] += u * x;
            }
        }
        let e = eig.eigenvalues[idx];
        op.apply_into(&coeffs, &mut hv, &mut ws);
        let r = hv
            .iter()
            .zip(&coeffs)
            .map(|(h, x)| (h - x * e).norm_sqr())
            .sum::<f64>()
            .sqrt();
        eigenvalues.push(e);
        residuals.push(r);
        eigenvectors.push(field(op, coeffs));
    }
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
        iterations: 0,
        method: SolverMethod::Dense,
        hamiltonian: op.spec().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_basis, Cell, Shape};
    use crate::operator::HamiltonianSpec;
    use crate::potential::{Charge, ChargeConfig};

    #[test]
    fn real_form_has_same_spectrum() {
        let cell = Cell::new(2.0).unwrap();
        let cfg = ChargeConfig::new(
            cell,
            [
                Charge {
                    z: 1.0,
                    position: [0.2, 0.3, -0.1],
                },
                Charge {
                    z: 2.0,
                    position: [-0.4, 0.1, 0.6],
                },
            ],
        )
        .unwrap();
        let op = HamiltonianOperator::new(
            build_basis(cell, 2, Shape::Spherical).unwrap(),
            &HamiltonianSpec::coulomb(cfg),
        )
        .unwrap();
        let h = op.dense_matrix().unwrap();
        let mut complex_eigs: Vec<f64> =
            h.clone().symmetric_eigenvalues().iter().cloned().collect();
        let mut real_eigs: Vec<f64> = real_symmetric_matrix(&op)
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .collect();
        complex_eigs.sort_by(f64::total_cmp);
        real_eigs.sort_by(f64::total_cmp);
        for (a, b) in complex_eigs.iter().zip(&real_eigs) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
