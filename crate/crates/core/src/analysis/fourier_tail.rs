use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analysis::tail::phased_tail_sum;
use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::lattice::FourierField;
use crate::potential::ChargeConfig;

/// Leading cusp term of the coefficient at `k`:
/// `8π / (|Γ|^{1/2} |K|⁴) · Σ_I Z_I ψ(R_I) e^{-iK·R_I}`.
fn predicted(
    psi: &FourierField,
    config: &ChargeConfig,
    values: &[Complex64],
    k: [i32; 3],
) -> Complex64 {
    let cell = psi.basis().cell();
    let kv = cell.wavevector(k);
    let k2 = kv.iter().map(|x| x * x).sum::<f64>();
    let scale = 8.0 * PI / (cell.volume().sqrt() * k2 * k2);
    let mut s = Complex64::new(0.0, 0.0);
    for (c, v) in config.charges().iter().zip(values) {
        let phase = -(kv[0] * c.position[0] + kv[1] * c.position[1] + kv[2] * c.position[2]);
        s += Complex64::from_polar(c.z, phase) * v;
    }
    s * scale
}

/// Point values at the nuclei with the truncated cusp tail added back.
///
/// `ψ^M(R_I)` misses `Σ_{K outside M} ψ̂_K e^{iK·R_I}`. Filling that sum
/// with the cusp term gives the linear system
/// `ψ_I - Σ_J T_IJ Z_J ψ_J = ψ^M(R_I)` with
/// `T_IJ = 8π/|Γ| Σ_{K outside M} |K|⁻⁴ cos(K·(R_I - R_J))`.
/// At the cutoffs used here the raw point value sits a percent or two low,
/// which is enough to bias the residual on the outer shells.
pub fn tail_corrected_point_values(
    psi: &FourierField,
    config: &ChargeConfig,
) -> Result<Vec<Complex64>> {
    let basis = psi.basis();
    let cell = basis.cell();
    if config.cell() != cell {
        return Err(Error::ConfigMismatch("cell edge differs".into()));
    }
    let raw = psi.evaluate_at_points(&config.positions());
    let charges = config.charges();
    let n = charges.len();
    let l = cell.edge();
    let scale = 8.0 * PI / cell.volume() * (l / (2.0 * PI)).powi(4);
    let mut a = DMatrix::<Complex64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            let theta = [0, 1, 2].map(|d| (charges[i].position[d] - charges[j].position[d]) / l);
            let t = scale * phased_tail_sum(basis.cutoff(), 4, basis.shape(), theta)?;
            a[(i, j)] -= Complex64::new(t * charges[j].z, 0.0);
        }
    }
    let rhs = DMatrix::from_column_slice(n, 1, &raw);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("tail correction system is singular".into()))?;
    Ok(sol.iter().copied().collect())
}

/// Shell-wise RMS relative residual `‖ψ̂ - p‖ / ‖p‖` between coefficients
/// and the predicted cusp term, over lattice vectors with
/// `r_lo ≤ |k| < r_hi`. The prediction uses
/// [`tail_corrected_point_values`].
pub fn fourier_tail_residuals(
    psi: &FourierField,
    config: &ChargeConfig,
    shells: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let values = tail_corrected_point_values(psi, config)?;
    fourier_tail_residuals_with(psi, config, &values, shells)
}

/// [`fourier_tail_residuals`] with caller-supplied point values `ψ(R_I)`.
pub fn fourier_tail_residuals_with(
    psi: &FourierField,
    config: &ChargeConfig,
    values: &[Complex64],
    shells: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let basis = psi.basis();
    if config.cell() != basis.cell() {
        return Err(Error::ConfigMismatch("cell edge differs".into()));
    }
    if values.len() != config.charges().len() {
        return Err(Error::Dimension(format!(
            "{} point values for {} charges",
            values.len(),
            config.charges().len()
        )));
    }
    let limit = basis.cutoff() as f64;
    shells
        .iter()
        .map(|&(lo, hi)| {
            if hi > limit {
                return Err(Error::Domain(format!(
                    "shell [{lo}, {hi}) reaches past the cutoff {limit}"
                )));
            }
            let (mut num, mut den, mut count) = (0.0, 0.0, 0usize);
            for (pos, &k) in basis.indices().iter().enumerate() {
                let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
                if r < lo || r >= hi || r == 0.0 {
                    continue;
                }
                let p = predicted(psi, config, values, k);
                num += (psi.coeffs()[pos] - p).norm_sqr();
                den += p.norm_sqr();
                count += 1;
            }
            if count == 0 {
                return Err(Error::EmptyShell(lo, hi));
            }
            if den == 0.0 {
                return Err(Error::Domain(format!(
                    "predicted term vanishes on shell [{lo}, {hi})"
                )));
            }
            Ok((num / den).sqrt())
        })
        .collect()
}

/// [`fourier_tail_residuals`] for the ground state of a solution.
pub fn fourier_tail_profile(
    solution: &EigenSolution,
    config: &ChargeConfig,
    shells: &[(f64, f64)],
) -> Result<Vec<f64>> {
    fourier_tail_residuals(solution.ground_state(), config, shells)
}
