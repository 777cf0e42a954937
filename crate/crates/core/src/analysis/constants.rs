use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{Cell, Shape};

/// `∫_{R³ \ [-1,1]³} |x|⁻⁶ dx = 1/3 + (5√2/2) arctan(1/√2)`.
pub fn cubic_tail_constant() -> f64 {
    1.0 / 3.0 + 2.5 * std::f64::consts::SQRT_2 * (1.0 / std::f64::consts::SQRT_2).atan()
}

/// `∫_{|x| > 1} |x|⁻⁶ dx = 4π/3`.
pub fn spherical_tail_constant() -> f64 {
    4.0 * PI / 3.0
}

/// Limit of `M³ Σ_{k outside cutoff M} |k|⁻⁶` for the given truncation.
pub fn tail_constant(shape: Shape) -> f64 {
    match shape {
        Shape::Spherical => spherical_tail_constant(),
        Shape::Cubic => cubic_tail_constant(),
    }
}

/// Prefactor of the leading eigenvalue error
/// `E_M - E ≈ prefactor / M³ · Σ_I Z_I² ψ(R_I)²`.
///
/// Spherical cutoff: `2L³/(3π³)`; cubic cutoff: `A L³/(2π⁴)`. Both equal
/// `tail_constant · L³ / (2π⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConstants {
    pub shape: Shape,
    pub edge: f64,
    pub prefactor: f64,
}

impl CorrectionConstants {
    pub fn new(shape: Shape, cell: Cell) -> Self {
        let l3 = cell.volume();
        let prefactor = match shape {
            Shape::Spherical => 2.0 * l3 / (3.0 * PI.powi(3)),
            Shape::Cubic => cubic_tail_constant() * l3 / (2.0 * PI.powi(4)),
        };
        Self {
            shape,
            edge: cell.edge(),
            prefactor,
        }
    }

    /// `prefactor / M³`.
    pub fn at_cutoff(&self, cutoff: u32) -> f64 {
        self.prefactor / (cutoff as f64).powi(3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // A = (1/3) ∫_{S²} |ω|_∞³ dω = 2 ∫∫_{[-1,1]²} (1 + y² + z²)⁻³ dy dz
    fn cube_integral_by_quadrature(n: usize) -> f64 {
        let h = 2.0 / n as f64;
        let w = |i: usize| {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut s = 0.0;
        for i in 0..=n {
            let y = -1.0 + i as f64 * h;
            for j in 0..=n {
                let z = -1.0 + j as f64 * h;
                s += w(i) * w(j) * (1.0 + y * y + z * z).powi(-3);
            }
        }
        2.0 * s * h * h / 9.0
    }

    #[test]
    fn closed_form_constant_matches_quadrature() {
        let a = cubic_tail_constant();
        assert!(a > 2.50 && a < 2.52);
        assert!((a - cube_integral_by_quadrature(400)).abs() < 1e-9);
    }

    #[test]
    fn prefactor_ratio() {
        let cell = Cell::new(2.0).unwrap();
        let s = CorrectionConstants::new(Shape::Spherical, cell);
        let c = CorrectionConstants::new(Shape::Cubic, cell);
        let ratio = c.prefactor / s.prefactor;
        assert!((ratio - 3.0 * cubic_tail_constant() / (4.0 * PI)).abs() < 1e-14);
        assert!((s.prefactor - 2.0 * 8.0 / (3.0 * PI.powi(3))).abs() < 1e-15);
        assert!(
            (s.prefactor - tail_constant(Shape::Spherical) * 8.0 / (2.0 * PI.powi(4))).abs()
                < 1e-15
        );
    }
}
