use crate::analysis::constants::{tail_constant, CorrectionConstants};
use crate::analysis::tail::phased_tail_sum;
use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::lattice::FourierField;
use crate::potential::ChargeConfig;

// absolute bound on Im ψ(R_I) for a phase-normalized eigenvector
const PHASE_TOL: f64 = 1e-6;

/// Real point values `ψ(R_I)` at every nucleus, rejecting eigenvectors that
/// have not been phase-normalized.
pub fn psi_at_nuclei(psi: &FourierField, config: &ChargeConfig) -> Result<Vec<f64>> {
    psi.evaluate_at_points(&config.positions())
        .into_iter()
        .map(|v| {
            if v.im.abs() > PHASE_TOL {
                Err(Error::PhaseNotNormalized(v.im))
            } else {
                Ok(v.re)
            }
        })
        .collect()
}

/// `prefactor / M³ · Σ_I Z_I² ψ_I²` for given point values.
pub fn correction_from_values(
    constants: &CorrectionConstants,
    cutoff: u32,
    config: &ChargeConfig,
    psi_values: &[f64],
) -> Result<f64> {
    if psi_values.len() != config.charges().len() {
        return Err(Error::Dimension(format!(
            "{} point values for {} charges",
            psi_values.len(),
            config.charges().len()
        )));
    }
    let s: f64 = config
        .charges()
        .iter()
        .zip(psi_values)
        .map(|(c, p)| c.z * c.z * p * p)
        .sum();
    Ok(constants.at_cutoff(cutoff) * s)
}

/// First-order estimate of `E_i^M - E_i` for eigenpair `state`, evaluated
/// with the computed eigenvector `ψ_i^M` at the nuclei.
pub fn first_order_correction(
    solution: &EigenSolution,
    state: usize,
    config: &ChargeConfig,
    constants: &CorrectionConstants,
) -> Result<f64> {
    let psi = solution
        .eigenvectors
        .get(state)
        .ok_or_else(|| Error::Dimension(format!("no eigenpair {state}")))?;
    let basis = psi.basis();
    if basis.shape() != constants.shape {
        return Err(Error::ConfigMismatch(format!(
            "constants for {} cutoff applied to a {} basis",
            constants.shape,
            basis.shape()
        )));
    }
    if basis.cell().edge() != constants.edge || config.cell() != basis.cell() {
        return Err(Error::ConfigMismatch("cell edge differs".into()));
    }
    let values = psi_at_nuclei(psi, config)?;
    correction_from_values(constants, basis.cutoff(), config, &values)
}

/// Leading error with the inter-nuclear cross terms kept:
/// `L³/(2π⁴) Σ_{k outside M} |k|⁻⁶ |Σ_I Z_I ψ_I e^{-iK·R_I}|²`.
///
/// Its diagonal part is the first-order correction with the exact tail sum
/// in place of its `M⁻³` asymptote. The cross terms oscillate in `M` and
/// shift with the nuclear positions, so differences between two geometries
/// keep an `O(M⁻⁴)` piece that does not cancel.
pub fn interference_prediction(
    constants: &CorrectionConstants,
    cutoff: u32,
    config: &ChargeConfig,
    psi_values: &[f64],
) -> Result<f64> {
    let charges = config.charges();
    if psi_values.len() != charges.len() {
        return Err(Error::Dimension(format!(
            "{} point values for {} charges",
            psi_values.len(),
            charges.len()
        )));
    }
    let scale = constants.prefactor / tail_constant(constants.shape);
    let mut s = 0.0;
    for (i, ci) in charges.iter().enumerate() {
        for (j, cj) in charges.iter().enumerate().skip(i) {
            let w = ci.z * cj.z * psi_values[i] * psi_values[j];
            if w == 0.0 {
                continue;
            }
            let theta = [0, 1, 2].map(|d| (ci.position[d] - cj.position[d]) / constants.edge);
            let t = phased_tail_sum(cutoff, 6, constants.shape, theta)?;
            s += if i == j { w * t } else { 2.0 * w * t };
        }
    }
    Ok(scale * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{phase_normalize, solve_lowest, SolverOptions};
    use crate::lattice::{build_basis, Cell, Shape};
    use crate::operator::{HamiltonianOperator, HamiltonianSpec};
    use crate::potential::Charge;

    fn solved(m: i64) -> (EigenSolution, ChargeConfig, Cell) {
        let cell = Cell::new(2.0).unwrap();
        let cfg = ChargeConfig::symmetric_pair(cell, 2.0, [0.7, 0.0, 0.0]).unwrap();
        let op = HamiltonianOperator::new(
            build_basis(cell, m, Shape::Cubic).unwrap(),
            &HamiltonianSpec::coulomb(cfg.clone()),
        )
        .unwrap();
        let sol = solve_lowest(&op, &SolverOptions::lowest(1)).unwrap();
        (
            phase_normalize(&sol, cfg.positions()[0]).unwrap(),
            cfg,
            cell,
        )
    }

    #[test]
    fn zero_charges_give_zero() {
        let cell = Cell::new(2.0).unwrap();
        let cfg = ChargeConfig::new(
            cell,
            [Charge {
                z: 0.0,
                position: [0.1, 0.0, 0.0],
            }],
        )
        .unwrap();
        let k = CorrectionConstants::new(Shape::Cubic, cell);
        assert_eq!(correction_from_values(&k, 6, &cfg, &[1.3]).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_in_charge() {
        let cell = Cell::new(2.0).unwrap();
        let cfg = ChargeConfig::symmetric_pair(cell, 1.5, [0.7, 0.0, 0.0]).unwrap();
        let doubled = cfg.scaled(2.0).unwrap();
        let k = CorrectionConstants::new(Shape::Spherical, cell);
        let a = correction_from_values(&k, 10, &cfg, &[0.8, -0.3]).unwrap();
        let b = correction_from_values(&k, 10, &doubled, &[0.8, -0.3]).unwrap();
        assert!((b - 4.0 * a).abs() <= 1e-15 * b);
        assert!(a > 0.0);
    }

    #[test]
    fn matches_formula_on_solution() {
        let (sol, cfg, cell) = solved(4);
        let k = CorrectionConstants::new(Shape::Cubic, cell);
        let c = first_order_correction(&sol, 0, &cfg, &k).unwrap();
        let psi = sol.ground_state().evaluate_at_points(&cfg.positions());
        let expected = k.prefactor / 64.0 * 4.0 * (psi[0].re.powi(2) + psi[1].re.powi(2));
        assert!((c - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_unnormalized_phase_and_wrong_shape() {
        let (sol, cfg, cell) = solved(3);
        let mut rotated = sol.clone();
        rotated.eigenvectors[0].scale_complex(num_complex::Complex64::new(0.0, 1.0));
        let k = CorrectionConstants::new(Shape::Cubic, cell);
        assert!(matches!(
            first_order_correction(&rotated, 0, &cfg, &k),
            Err(Error::PhaseNotNormalized(_))
        ));
        let ks = CorrectionConstants::new(Shape::Spherical, cell);
        assert!(matches!(
            first_order_correction(&sol, 0, &cfg, &ks),
            Err(Error::ConfigMismatch(_))
        ));
    }

    #[test]
    fn interference_reduces_to_exact_tail_for_one_nucleus() {
        let cell = Cell::new(2.0).unwrap();
        let cfg = ChargeConfig::new(
            cell,
            [Charge {
                z: 2.0,
                position: [0.3, 0.1, 0.0],
            }],
        )
        .unwrap();
        let k = CorrectionConstants::new(Shape::Cubic, cell);
        let got = interference_prediction(&k, 12, &cfg, &[1.1]).unwrap();
        let t = crate::analysis::tail::tail_sum(12, 6, Shape::Cubic).unwrap();
        let want = 8.0 / (2.0 * std::f64::consts::PI.powi(4)) * 4.0 * 1.21 * t;
        assert!((got - want).abs() <= 1e-14 * want);
        // the M⁻³ asymptote sits within a few percent at this cutoff
        let first = correction_from_values(&k, 12, &cfg, &[1.1]).unwrap();
        assert!((got / first - 1.0).abs() < 0.15);
    }

    #[test]
    fn pair_matches_direct_modulus_sum() {
        let cell = Cell::new(2.0).unwrap();
        let k = CorrectionConstants::new(Shape::Cubic, cell);
        let cfg = ChargeConfig::new(
            cell,
            [
                Charge {
                    z: 2.0,
                    position: [0.35, 0.0, 0.0],
                },
                Charge {
                    z: 1.0,
                    position: [-0.2, 0.3, 0.0],
                },
            ],
        )
        .unwrap();
        let psi = [1.2, 0.7];
        let got = interference_prediction(&k, 4, &cfg, &psi).unwrap();
        // |Σ Z ψ e^{-iK·R}|² summed term by term, K = πk for L = 2
        let pi = std::f64::consts::PI;
        let mut terms = vec![];
        let r = 48;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    if Shape::Cubic.contains([a, b, c], 4) {
                        continue;
                    }
                    let (mut re, mut im) = (0.0, 0.0);
                    for (ch, p) in cfg.charges().iter().zip(psi) {
                        let ph = -pi * (a as f64 * ch.position[0] + b as f64 * ch.position[1]);
                        re += ch.z * p * ph.cos();
                        im += ch.z * p * ph.sin();
                    }
                    let n2 = (a * a + b * b + c * c) as f64;
                    terms.push((re * re + im * im) / (n2 * n2 * n2));
                }
            }
        }
        terms.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // beyond r the diagonal is added back; the oscillating cross
        // remainder stays far below the tolerance
        let far = (4.0 * 1.44 + 0.49)
            * crate::analysis::tail::tail_sum(r as u32, 6, Shape::Cubic).unwrap();
        let want = 8.0 / (2.0 * pi.powi(4)) * (terms.iter().sum::<f64>() + far);
        assert!((got - want).abs() < 1e-7 * want, "{got} vs {want}");
    }
}
