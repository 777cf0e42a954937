//! Matrix-free Galerkin application of `H = -½Δ + V_per + W_per` on a
//! cutoff basis, and the explicit Galerkin matrix for small cutoffs.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{GridWorkspace, PaddedGrid};
use crate::lattice::{fft_grid_size, CutoffBasis, FourierField};
use crate::potential::{assemble_potential_field, ChargeConfig, SmoothPotential};

/// Largest basis the dense oracle accepts.
pub const DENSE_ORACLE_LIMIT: usize = 20_000;

/// Physical input: cell, point charges and smooth potential.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub charges: ChargeConfig,
    pub smooth: SmoothPotential,
}

impl HamiltonianSpec {
    pub fn new(charges: ChargeConfig, smooth: SmoothPotential) -> Self {
        Self { charges, smooth }
    }

    pub fn coulomb(charges: ChargeConfig) -> Self {
        Self::new(charges, SmoothPotential::zero())
    }

    pub fn cell(&self) -> crate::lattice::Cell {
        self.charges.cell()
    }
}

/// Discrete Hamiltonian on one cutoff basis.
#[derive(Debug)]
pub struct HamiltonianOperator {
    basis: Arc<CutoffBasis>,
    spec: HamiltonianSpec,
    kinetic: Vec<f64>,
    potential: FourierField,
    grid: PaddedGrid,
    // V(x_j) / N³ on the padded grid
    samples: Vec<f64>,
}

impl HamiltonianOperator {
    /// Builds the operator on the default alias-free grid.
    pub fn new(basis: Arc<CutoffBasis>, spec: &HamiltonianSpec) -> Result<Self> {
        let n = fft_grid_size(&basis)[0];
        Self::with_grid_size(basis, spec, n)
    }

    /// Builds the operator on an `n³` grid, `n ≥ 4M + 1`.
    pub fn with_grid_size(
        basis: Arc<CutoffBasis>,
        spec: &HamiltonianSpec,
        n: usize,
    ) -> Result<Self> {
        if basis.cell() != spec.cell() {
            return Err(Error::Dimension(
                "basis and charges live in different cells".into(),
            ));
        }
        let m = basis.cutoff() as usize;
        if n < 4 * m + 1 {
            return Err(Error::Dimension(format!(
                "grid of {n} points aliases products at cutoff {m}; need at least {}",
                4 * m + 1
            )));
        }
        let potential =
            assemble_potential_field(&spec.charges, &spec.smooth, 2 * m as i64, basis.shape())?;
        let grid = PaddedGrid::new(&basis, n)?;

        let vgrid = PaddedGrid::new(potential.basis(), n)?;
        let mut ws = vgrid.workspace();
        vgrid.to_real_space(potential.coeffs(), &mut ws);
        let scale = 1.0 / (potential.basis().cell().volume().sqrt() * (n * n * n) as f64);
        let samples = ws.values().iter().map(|v| v.re * scale).collect();

        let kinetic = (0..basis.len())
            .map(|p| 0.5 * basis.wavevector_norm_sq(p))
            .collect();
        Ok(Self {
            basis,
            spec: spec.clone(),
            kinetic,
            potential,
            grid,
            samples,
        })
    }

    #[inline]
    pub fn basis(&self) -> &Arc<CutoffBasis> {
        &self.basis
    }

    #[inline]
    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    /// `½|K|²` per basis index.
    #[inline]
    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    /// Normalized coefficients of `V + W` up to wavenumber `2M`.
    #[inline]
    pub fn potential(&self) -> &FourierField {
        &self.potential
    }

    #[inline]
    pub fn grid_size(&self) -> usize {
        self.grid.size()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Fresh FFT buffers; one per thread calling [`Self::apply_into`].
    pub fn workspace(&self) -> GridWorkspace {
        self.grid.workspace()
    }

    /// `out = Π_M (H u)` on raw coefficient slices.
    pub fn apply_into(&self, u: &[Complex64], out: &mut [Complex64], ws: &mut GridWorkspace) {
        self.apply_potential_into(u, out, ws);
        for ((o, &x), &t) in out.iter_mut().zip(u).zip(&self.kinetic) {
            *o += x * t;
        }
    }

    /// `out = Π_M ((V + W) u)`, kinetic part excluded.
    pub fn apply_potential_into(
        &self,
        u: &[Complex64],
        out: &mut [Complex64],
        ws: &mut GridWorkspace,
    ) {
        assert_eq!(u.len(), self.basis.len());
        assert_eq!(out.len(), self.basis.len());
        self.grid.to_real_space(u, ws);
        for (g, &v) in ws.values_mut().iter_mut().zip(&self.samples) {
            *g *= v;
        }
        self.grid.to_coefficients(ws, out);
    }

    /// `Π_M (H u)`.
    pub fn apply(&self, u: &FourierField) -> Result<FourierField> {
        self.check_basis(u)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        let mut ws = self.workspace();
        self.apply_into(u.coeffs(), &mut out, &mut ws);
        FourierField::from_coeffs(Arc::clone(&self.basis), out)
    }

    /// `Π_M ((V + W) u)`.
    pub fn apply_potential(&self, u: &FourierField) -> Result<FourierField> {
        self.check_basis(u)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        let mut ws = self.workspace();
        self.apply_potential_into(u.coeffs(), &mut out, &mut ws);
        FourierField::from_coeffs(Arc::clone(&self.basis), out)
    }

    /// `⟨u, H u⟩ / ⟨u, u⟩`.
    pub fn rayleigh_quotient(&self, u: &FourierField) -> Result<f64> {
        let hu = self.apply(u)?;
        Ok(u.dot(&hu)?.re / u.norm().powi(2))
    }

    /// Galerkin matrix in the normalized plane-wave basis,
    /// `H_{kk'} = ½|K|² δ_{kk'} + v̂_{k-k'} / |Γ|^{1/2}`.
    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.len();
        if n > DENSE_ORACLE_LIMIT {
            return Err(Error::OracleScale {
                size: n,
                limit: DENSE_ORACLE_LIMIT,
            });
        }
        let inv_root = 1.0 / self.basis.cell().volume().sqrt();
        let idx = self.basis.indices();
        let vb = self.potential.basis();
        let v = self.potential.coeffs();
        Ok(DMatrix::from_fn(n, n, |a, b| {
            let ka = idx[a];
            let kb = idx[b];
            let d = [ka[0] - kb[0], ka[1] - kb[1], ka[2] - kb[2]];
            let p = vb
                .position(d)
                .expect("differences of cutoff-M indices lie within cutoff 2M");
            let mut h = v[p] * inv_root;
            if a == b {
                h += self.kinetic[a];
            }
            h
        }))
    }

    fn check_basis(&self, u: &FourierField) -> Result<()> {
        if self.basis.same_as(u.basis()) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "field on cutoff {} applied to operator on cutoff {}",
                u.basis().cutoff(),
                self.basis.cutoff()
            )))
        }
    }
}
