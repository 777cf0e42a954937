//! Lowest eigenpairs of the discrete Galerkin problem.
//!
//! Eigenvectors are coefficient vectors of real-valued functions. Both the
//! iterative and the dense path work in real arithmetic on that subspace, so
//! the returned vectors are Hermitian-symmetric up to rounding and only
//! carry a sign ambiguity, which [`phase_normalize`] removes.

mod dense;
mod lobpcg;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::FourierField;
use crate::operator::{HamiltonianOperator, HamiltonianSpec};

pub use dense::{real_symmetric_matrix, solve_dense};
pub use lobpcg::solve_lobpcg;

/// Which algorithm produced (or should produce) a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    /// Dense diagonalization below `dense_threshold`, LOBPCG above.
    #[default]
    Auto,
    Iterative,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub n_eigenpairs: usize,
    /// Defaults to `n_eigenpairs + 2`.
    pub block_size: Option<usize>,
    /// Bound on `‖Hψ - Eψ‖ / ‖ψ‖`.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Shift `σ` of the preconditioner `(½|K|² + σ)⁻¹`; estimated from a
    /// short Lanczos run when absent.
    pub preconditioner_shift: Option<f64>,
    pub seed: u64,
    pub method: SolverMethod,
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_eigenpairs: 1,
            block_size: None,
            residual_tol: 1e-8,
            max_iterations: 400,
            preconditioner_shift: None,
            seed: 0,
            method: SolverMethod::Auto,
            dense_threshold: 2000,
        }
    }
}

impl SolverOptions {
    pub fn lowest(n: usize) -> Self {
        Self {
            n_eigenpairs: n,
            ..Self::default()
        }
    }

    pub fn effective_block_size(&self) -> usize {
        self.block_size.unwrap_or(self.n_eigenpairs + 2)
    }

    pub fn validate(&self, basis_len: usize) -> Result<()> {
        if self.n_eigenpairs == 0 {
            return Err(Error::InvalidOptions(
                "n_eigenpairs must be positive".into(),
            ));
        }
        if self.n_eigenpairs > basis_len {
            return Err(Error::InvalidOptions(format!(
                "{} eigenpairs requested from a basis of {basis_len}",
                self.n_eigenpairs
            )));
        }
        if self.effective_block_size() < self.n_eigenpairs {
            return Err(Error::InvalidOptions("block_size < n_eigenpairs".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidOptions(
                "residual_tol must be positive".into(),
            ));
        }
        if let Some(s) = self.preconditioner_shift {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidOptions(
                    "preconditioner shift must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Lowest eigenpairs `E_1^M ≤ … ≤ E_n^M` with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<FourierField>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub method: SolverMethod,
    pub hamiltonian: HamiltonianSpec,
}

impl EigenSolution {
    pub fn cutoff(&self) -> u32 {
        self.eigenvectors[0].basis().cutoff()
    }

    pub fn ground_state(&self) -> &FourierField {
        &self.eigenvectors[0]
    }
}

/// Lowest `n_eigenpairs` eigenpairs of `op`.
pub fn solve_lowest(op: &HamiltonianOperator, options: &SolverOptions) -> Result<EigenSolution> {
    solve_lowest_from(op, options, &[])
}

/// Like [`solve_lowest`], seeding the iterative block with `guesses`
/// (transferred onto the operator's basis), e.g. solutions at a lower
/// cutoff.
pub fn solve_lowest_from(
    op: &HamiltonianOperator,
    options: &SolverOptions,
    guesses: &[FourierField],
) -> Result<EigenSolution> {
    options.validate(op.len())?;
    let dense = match options.method {
        SolverMethod::Dense => true,
        SolverMethod::Iterative => false,
        SolverMethod::Auto => op.len() <= options.dense_threshold,
    };
    if dense {
        solve_dense(op, options.n_eigenpairs)
    } else {
        let guesses = guesses
            .iter()
            .map(|g| g.transfer(op.basis()))
            .collect::<Result<Vec<_>>>()?;
        solve_lobpcg(op, options, &guesses)
    }
}

/// Rotates every eigenvector by a unit phase so that `ψ(anchor)` is real
/// and positive, then restores exact Hermitian symmetry.
pub fn phase_normalize(solution: &EigenSolution, anchor: [f64; 3]) -> Result<EigenSolution> {
    let mut out = solution.clone();
    for v in &mut out.eigenvectors {
        normalize_field(v, anchor)?;
    }
    Ok(out)
}

pub(crate) fn normalize_field(v: &mut FourierField, anchor: [f64; 3]) -> Result<()> {
    let value = v.evaluate_at_points(&[anchor])[0];
    let scale = v.norm().max(f64::MIN_POSITIVE);
    if value.norm() <= 1e-8 * scale {
        return Err(Error::VanishingAnchor {
            value: value.norm(),
        });
    }
    let phase = value.conj() / value.norm();
    v.scale_complex(phase);
    v.symmetrize();
    Ok(())
}

pub(crate) fn field(op: &HamiltonianOperator, coeffs: Vec<Complex64>) -> FourierField {
    FourierField::from_coeffs(Arc::clone(op.basis()), coeffs)
        .expect("coefficient length matches basis")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_basis, Cell, Shape};
    use crate::potential::{ChargeConfig, SmoothPotential};
    use std::f64::consts::PI;

    fn pair_op(m: i64, shape: Shape) -> HamiltonianOperator {
        let cell = Cell::new(2.0).unwrap();
        let spec = HamiltonianSpec::coulomb(
            ChargeConfig::symmetric_pair(cell, 2.0, [0.7, 0.0, 0.0]).unwrap(),
        );
        HamiltonianOperator::new(build_basis(cell, m, shape).unwrap(), &spec).unwrap()
    }

    fn iterative(n: usize) -> SolverOptions {
        SolverOptions {
            n_eigenpairs: n,
            method: SolverMethod::Iterative,
            residual_tol: 1e-9,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn free_particle_spectrum() {
        let cell = Cell::new(2.0).unwrap();
        let spec = HamiltonianSpec::coulomb(ChargeConfig::new(cell, []).unwrap());
        for method in [SolverMethod::Iterative, SolverMethod::Dense] {
            let op = HamiltonianOperator::new(build_basis(cell, 4, Shape::Cubic).unwrap(), &spec)
                .unwrap();
            let sol = solve_lowest(
                &op,
                &SolverOptions {
                    method,
                    ..SolverOptions::lowest(2)
                },
            )
            .unwrap();
            assert!(sol.eigenvalues[0].abs() < 1e-10);
            let e2 = 0.5 * (2.0 * PI / 2.0_f64).powi(2);
            assert!((sol.eigenvalues[1] - e2).abs() < 1e-9);
            let v = sol
                .ground_state()
                .evaluate_at_points(&[[0.1, 0.2, 0.3], [-0.7, 0.0, 0.9]]);
            assert!((v[0].norm() - v[1].norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn iterative_matches_dense_pair_model() {
        let op = pair_op(3, Shape::Cubic);
        let dense = solve_lowest(
            &op,
            &SolverOptions {
                method: SolverMethod::Dense,
                ..SolverOptions::lowest(3)
            },
        )
        .unwrap();
        let it = solve_lowest(&op, &iterative(3)).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&it.eigenvalues) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        for (i, u) in it.eigenvectors.iter().enumerate() {
            assert!(u.hermitian_asymmetry() < 1e-12);
            for (j, v) in it.eigenvectors.iter().enumerate() {
                let d = u.dot(v).unwrap();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - Complex64::new(e, 0.0)).norm() < 1e-10);
            }
        }
        assert!(it.residuals.iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn separable_cosine_potential() {
        let cell = Cell::new(2.0).unwrap();
        let w = SmoothPotential::from_cosines(cell, &[([1, 0, 0], 2.0)]).unwrap();
        let spec = HamiltonianSpec::new(ChargeConfig::new(cell, []).unwrap(), w);
        let op =
            HamiltonianOperator::new(build_basis(cell, 4, Shape::Cubic).unwrap(), &spec).unwrap();
        let dense = solve_lowest(
            &op,
            &SolverOptions {
                method: SolverMethod::Dense,
                ..SolverOptions::lowest(1)
            },
        )
        .unwrap();
        let it = solve_lowest(&op, &iterative(1)).unwrap();
        assert!((dense.eigenvalues[0] - it.eigenvalues[0]).abs() < 1e-10);

        // 1D oracle: tridiagonal Mathieu-type matrix in k₁ only
        let n = 9;
        let g = PI;
        let m = nalgebra::DMatrix::from_fn(n, n, |a, b| {
            let ka = a as f64 - 4.0;
            if a == b {
                0.5 * g * g * ka * ka
            } else if (a as i64 - b as i64).abs() == 1 {
                1.0
            } else {
                0.0
            }
        });
        let e1d = m
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!((e1d - it.eigenvalues[0]).abs() < 1e-10);
    }

    #[test]
    fn phase_normalization() {
        let op = pair_op(3, Shape::Cubic);
        let sol = solve_lowest(&op, &iterative(1)).unwrap();
        let anchor = [0.35, 0.0, 0.0];
        let a = phase_normalize(&sol, anchor).unwrap();
        let v = a.ground_state().evaluate_at_points(&[anchor])[0];
        assert!(v.re > 0.0 && v.im.abs() < 1e-12);
        assert!(a.ground_state().hermitian_asymmetry() < 1e-12);

        // idempotent
        let b = phase_normalize(&a, anchor).unwrap();
        for (x, y) in a
            .ground_state()
            .coeffs()
            .iter()
            .zip(b.ground_state().coeffs())
        {
            assert!((x - y).norm() < 1e-14);
        }

        // invariant under a global phase
        let mut rotated = sol.clone();
        rotated.eigenvectors[0].scale_complex(Complex64::from_polar(1.0, 1.234));
        let c = phase_normalize(&rotated, anchor).unwrap();
        for (x, y) in a
            .ground_state()
            .coeffs()
            .iter()
            .zip(c.ground_state().coeffs())
        {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn vanishing_anchor() {
        let cell = Cell::new(2.0).unwrap();
        let b = build_basis(cell, 2, Shape::Cubic).unwrap();
        let mut f = FourierField::zeros(Arc::clone(&b));
        let h = cell.volume().sqrt() / 2.0;
        f.coeffs_mut()[b.position([1, 0, 0]).unwrap()] = Complex64::new(0.0, -h);
        f.coeffs_mut()[b.position([-1, 0, 0]).unwrap()] = Complex64::new(0.0, h);
        // sin(π x₁) vanishes at the origin
        assert!(matches!(
            normalize_field(&mut f, [0.0; 3]),
            Err(Error::VanishingAnchor { .. })
        ));
        assert!(normalize_field(&mut f, [0.5, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn options_validation() {
        let op = pair_op(1, Shape::Spherical);
        let bad = SolverOptions {
            n_eigenpairs: 8,
            ..SolverOptions::default()
        };
        assert!(matches!(
            solve_lowest(&op, &bad),
            Err(Error::InvalidOptions(_))
        ));
        let bad = SolverOptions {
            block_size: Some(1),
            n_eigenpairs: 2,
            ..SolverOptions::default()
        };
        assert!(bad.validate(100).is_err());
    }

    #[test]
    fn non_convergence_reports_residuals() {
        let op = pair_op(6, Shape::Cubic);
        let opts = SolverOptions {
            max_iterations: 2,
            residual_tol: 1e-12,
            ..iterative(1)
        };
        match solve_lowest(&op, &opts) {
            Err(Error::NotConverged {
                iterations,
                residuals,
            }) => {
                assert_eq!(iterations, 2);
                assert_eq!(residuals.len(), 1);
                assert!(residuals[0] > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
