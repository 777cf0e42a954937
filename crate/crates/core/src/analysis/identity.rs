use num_complex::Complex64;

use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::operator::HamiltonianOperator;

/// Both sides of the eigenvalue error identity for eigenpair `state`:
/// `lhs = E^M - E_ref` and `rhs = -⟨ψ^M, V Π_M^⊥ ψ_ref⟩`, with the
/// potential applied by the reference operator. `ψ^M` is sign-aligned with
/// `ψ_ref` first.
pub fn error_identity_check(
    solution_m: &EigenSolution,
    solution_ref: &EigenSolution,
    op_ref: &HamiltonianOperator,
    state: usize,
) -> Result<(f64, f64)> {
    if solution_m.hamiltonian != *op_ref.spec() || solution_ref.hamiltonian != *op_ref.spec() {
        return Err(Error::ConfigMismatch(
            "solutions and reference operator describe different Hamiltonians".into(),
        ));
    }
    let (Some(psi_m), Some(psi_ref)) = (
        solution_m.eigenvectors.get(state),
        solution_ref.eigenvectors.get(state),
    ) else {
        return Err(Error::Dimension(format!("no eigenpair {state}")));
    };
    let ref_basis = op_ref.basis();
    if !psi_ref.basis().same_as(ref_basis) {
        return Err(Error::ConfigMismatch(
            "reference solution is not on the operator basis".into(),
        ));
    }
    let small = psi_m.basis();
    if small.shape() != ref_basis.shape() || small.cutoff() > ref_basis.cutoff() {
        return Err(Error::ConfigMismatch(format!(
            "cutoff {} {} is not contained in reference cutoff {} {}",
            small.cutoff(),
            small.shape(),
            ref_basis.cutoff(),
            ref_basis.shape()
        )));
    }

    let embedded = psi_m.transfer(ref_basis)?;
    let overlap = embedded.dot(psi_ref)?.re;
    let sign = if overlap < 0.0 { -1.0 } else { 1.0 };

    let mut perp = psi_ref.clone();
    for (c, k) in perp.coeffs_mut().iter_mut().zip(ref_basis.indices()) {
        if small.position(*k).is_some() {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let v_perp = op_ref.apply_potential(&perp)?;
    let rhs = -sign * embedded.dot(&v_perp)?.re;
    let lhs = solution_m.eigenvalues[state] - solution_ref.eigenvalues[state];
    Ok((lhs, rhs))
}
