//! Fourier representation of the periodic Coulomb potential of point
//! charges in a neutralizing background, and of smooth periodic potentials.
//!
//! The Coulomb part solves the periodic Poisson problem with attractive
//! sign: near each nucleus `V ≈ -Z_I / |x - R_I|`. Its plain Fourier-series
//! coefficients are
//!
//! ```text
//! V̂_K = -(4π / |Γ|) Σ_I Z_I e^{-iK·R_I} / |K|²   (K ≠ 0),   V̂_0 = 0.
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_basis, norm_sq, Cell, FourierField, Shape};

/// One nucleus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub z: f64,
    pub position: [f64; 3],
}

/// Point charges in one periodic cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeConfig {
    cell: Cell,
    charges: Vec<Charge>,
}

impl ChargeConfig {
    /// Validates and reduces positions to `[-L/2, L/2)³`.
    ///
    /// Zero charges are accepted (they contribute nothing); negative or
    /// non-finite charges are rejected, as are coincident positions.
    pub fn new(cell: Cell, charges: impl IntoIterator<Item = Charge>) -> Result<Self> {
        let mut out = Vec::new();
        for (i, c) in charges.into_iter().enumerate() {
            if !(c.z.is_finite() && c.z >= 0.0) {
                return Err(Error::InvalidCharge(format!("charge {i} has Z = {}", c.z)));
            }
            if c.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCharge(format!(
                    "charge {i} has non-finite position {:?}",
                    c.position
                )));
            }
            out.push(Charge {
                z: c.z,
                position: cell.reduce(c.position),
            });
        }
        for i in 0..out.len() {
            for j in 0..i {
                let d = cell.periodic_distance(out[i].position, out[j].position);
                if d <= 1e-12 * cell.edge() {
                    return Err(Error::DegenerateConfiguration(j, i));
                }
            }
        }
        Ok(Self { cell, charges: out })
    }

    /// Two equal charges at `±R/2`.
    pub fn symmetric_pair(cell: Cell, z: f64, separation: [f64; 3]) -> Result<Self> {
        let half = separation.map(|x| 0.5 * x);
        Self::new(
            cell,
            [
                Charge {
                    z,
                    position: half.map(|x| -x),
                },
                Charge { z, position: half },
            ],
        )
    }

    #[inline]
    pub fn cell(&self) -> Cell {
        self.cell
    }

    #[inline]
    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.charges.iter().map(|c| c.position).collect()
    }

    /// Every charge multiplied by `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.cell,
            self.charges.iter().map(|c| Charge {
                z: c.z * s,
                position: c.position,
            }),
        )
    }

    /// Every position shifted by `t`.
    pub fn translated(&self, t: [f64; 3]) -> Result<Self> {
        Self::new(
            self.cell,
            self.charges.iter().map(|c| Charge {
                z: c.z,
                position: [
                    c.position[0] + t[0],
                    c.position[1] + t[1],
                    c.position[2] + t[2],
                ],
            }),
        )
    }
}

/// Finite Fourier series `W(x) = Σ_k ŵ_k e^{iK·x} / |Γ|^{1/2}` with
/// `ŵ_{-k} = conj(ŵ_k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SmoothPotential {
    terms: Vec<([i32; 3], Complex64)>,
}

impl SmoothPotential {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Takes normalized coefficients; repeated indices are summed and the
    /// result must be Hermitian to 1e-14 relative.
    pub fn new(terms: impl IntoIterator<Item = ([i32; 3], Complex64)>) -> Result<Self> {
        let mut merged: Vec<([i32; 3], Complex64)> = Vec::new();
        for (k, w) in terms {
            match merged.iter_mut().find(|(q, _)| *q == k) {
                Some((_, acc)) => *acc += w,
                None => merged.push((k, w)),
            }
        }
        merged.sort_by_key(|a| a.0);
        let scale = merged.iter().map(|(_, w)| w.norm()).fold(0.0, f64::max);
        for &(k, w) in &merged {
            let neg = [-k[0], -k[1], -k[2]];
            let partner = merged
                .iter()
                .find(|(q, _)| *q == neg)
                .map_or(Complex64::new(0.0, 0.0), |t| t.1);
            if (partner - w.conj()).norm() > 1e-14 * scale {
                return Err(Error::NonHermitianPotential(k));
            }
        }
        Ok(Self { terms: merged })
    }

    /// `W(x) = Σ a cos(2π k·x / L)`; an entry with `k = 0` is the constant `a`.
    pub fn from_cosines(cell: Cell, terms: &[([i32; 3], f64)]) -> Result<Self> {
        let root = cell.volume().sqrt();
        let mut out = Vec::new();
        for &(k, a) in terms {
            if k == [0, 0, 0] {
                out.push((k, Complex64::new(a * root, 0.0)));
            } else {
                let c = Complex64::new(0.5 * a * root, 0.0);
                out.push((k, c));
                out.push(([-k[0], -k[1], -k[2]], c));
            }
        }
        Self::new(out)
    }

    pub fn constant(cell: Cell, c: f64) -> Self {
        Self::from_cosines(cell, &[([0, 0, 0], c)]).expect("a constant is Hermitian")
    }

    pub fn terms(&self) -> &[([i32; 3], Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, w)| w.norm() == 0.0)
    }
}

/// Plain Fourier-series coefficient `V̂_K` of the periodic Coulomb
/// potential, `V(x) = Σ_K V̂_K e^{iK·x}`.
pub fn coulomb_coefficient(config: &ChargeConfig, k: [i32; 3]) -> Complex64 {
    let n2 = norm_sq(k);
    if n2 == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let cell = config.cell();
    let kv = cell.wavevector(k);
    let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
    let structure: Complex64 = config
        .charges()
        .iter()
        .map(|c| {
            let phase = kv[0] * c.position[0] + kv[1] * c.position[1] + kv[2] * c.position[2];
            c.z * Complex64::from_polar(1.0, -phase)
        })
        .sum();
    -structure * (4.0 * PI / (cell.volume() * k2))
}

/// Normalized coefficients of `V_per + W_per` on the index set of cutoff
/// `max_wavenumber`: entry `k` holds `|Γ|^{1/2} V̂_K + ŵ_k`.
pub fn assemble_potential_field(
    config: &ChargeConfig,
    w: &SmoothPotential,
    max_wavenumber: i64,
    shape: Shape,
) -> Result<FourierField> {
    let cell = config.cell();
    let basis = build_basis(cell, max_wavenumber, shape)?;
    let m = max_wavenumber as i32;
    let side = (2 * m + 1) as usize;
    let g = cell.reciprocal_unit();
    let root = cell.volume().sqrt();
    let prefactor = -4.0 * PI / (root * g * g);

    // per-axis phase tables e^{-i g k R_a} for each charge
    let tables: Vec<(f64, Vec<Complex64>)> = config
        .charges()
        .iter()
        .map(|c| {
            let mut t = vec![Complex64::new(0.0, 0.0); 3 * side];
            for axis in 0..3 {
                for k in -m..=m {
                    t[axis * side + (k + m) as usize] =
                        Complex64::from_polar(1.0, -g * k as f64 * c.position[axis]);
                }
            }
            (c.z, t)
        })
        .collect();

    let n = basis.len();
    let origin = basis.origin();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for pos in origin + 1..n {
        let k = basis.indices()[pos];
        let mut s = Complex64::new(0.0, 0.0);
        for (z, t) in &tables {
            s += *z
                * t[(k[0] + m) as usize]
                * t[side + (k[1] + m) as usize]
                * t[2 * side + (k[2] + m) as usize];
        }
        let v = s * (prefactor / norm_sq(k) as f64);
        coeffs[pos] = v;
        coeffs[n - 1 - pos] = v.conj();
    }
    for &(k, wk) in w.terms() {
        if let Some(p) = basis.position(k) {
            coeffs[p] += wk;
        }
    }
    // exact symmetry for the combined field
    coeffs[origin].im = 0.0;
    FourierField::from_coeffs(Arc::clone(&basis), coeffs)
}
