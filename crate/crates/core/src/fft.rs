//! Pruned 3D FFTs between a cutoff index set and a padded real-space grid.
//!
//! Coefficients occupy only the `(2M+1)` lowest frequencies per axis of an
//! `N`-point grid. The inverse transform skips lines that are known to be
//! zero and the forward transform skips lines whose output is discarded, so
//! a round trip costs about 1.75 full-grid passes instead of 3.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::CutoffBasis;

/// Immutable transform plan for one index set on an `N³` grid.
pub struct PaddedGrid {
    n: usize,
    // frequencies 0..=M and N-M..N along each axis
    support: [Range<usize>; 2],
    scatter: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedGrid")
            .field("n", &self.n)
            .field("support", &self.support)
            .field("len", &self.scatter.len())
            .finish()
    }
}

/// Mutable buffers for one thread of transforms.
pub struct GridWorkspace {
    grid: Vec<Complex64>,
    plane: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl GridWorkspace {
    /// Real-space values after [`PaddedGrid::to_real_space`], row-major.
    pub fn values(&self) -> &[Complex64] {
        &self.grid
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.grid
    }
}

impl PaddedGrid {
    /// Plans transforms for `basis` on an `n³` grid; requires `n ≥ 2M + 1`.
    pub fn new(basis: &CutoffBasis, n: usize) -> Result<Self> {
        let m = basis.cutoff() as usize;
        if n < 2 * m + 1 {
            return Err(Error::Dimension(format!(
                "grid of {n} points cannot hold cutoff {m}"
            )));
        }
        let wrap = |k: i32| -> usize {
            if k >= 0 {
                k as usize
            } else {
                (n as i64 + k as i64) as usize
            }
        };
        let scatter = basis
            .indices()
            .iter()
            .map(|k| (wrap(k[0]) * n + wrap(k[1])) * n + wrap(k[2]))
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            support: [0..m + 1, n - m..n],
            scatter,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn workspace(&self) -> GridWorkspace {
        let n = self.n;
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        GridWorkspace {
            grid: vec![Complex64::new(0.0, 0.0); n * n * n],
            plane: vec![Complex64::new(0.0, 0.0); n * n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn support_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.support[0].clone().chain(self.support[1].clone())
    }

    /// `grid_j = Σ_k c_k exp(+2πi k·j/N)` (unnormalized inverse DFT).
    pub fn to_real_space(&self, coeffs: &[Complex64], ws: &mut GridWorkspace) {
        debug_assert_eq!(coeffs.len(), self.scatter.len());
        let n = self.n;
        let n2 = n * n;
        let zero = Complex64::new(0.0, 0.0);
        ws.grid.fill(zero);
        for (&c, &g) in coeffs.iter().zip(&self.scatter) {
            ws.grid[g] = c;
        }
        let GridWorkspace {
            grid,
            plane,
            scratch,
        } = ws;

        // axis 2: only lines with (i0, i1) both in the support
        for i0 in self.support_iter() {
            for r in &self.support {
                let start = (i0 * n + r.start) * n;
                let end = (i0 * n + r.end) * n;
                self.inverse
                    .process_with_scratch(&mut grid[start..end], scratch);
            }
        }
        // axis 1: slabs with i0 in the support
        for i0 in self.support_iter() {
            let slab = &mut grid[i0 * n2..(i0 + 1) * n2];
            transpose(slab, plane, n);
            self.inverse.process_with_scratch(plane, scratch);
            transpose(plane, slab, n);
        }
        // axis 0: every (i1, i2) line, only support rows are nonzero
        for i1 in 0..n {
            plane.fill(zero);
            for i0 in self.support_iter() {
                let row = &grid[i0 * n2 + i1 * n..i0 * n2 + i1 * n + n];
                for (i2, &v) in row.iter().enumerate() {
                    plane[i2 * n + i0] = v;
                }
            }
            self.inverse.process_with_scratch(plane, scratch);
            for i0 in 0..n {
                let row = &mut grid[i0 * n2 + i1 * n..i0 * n2 + i1 * n + n];
                for (i2, v) in row.iter_mut().enumerate() {
                    *v = plane[i2 * n + i0];
                }
            }
        }
    }

    /// `out_k = Σ_j grid_j exp(-2πi k·j/N)` for the stored indices only
    /// (unnormalized forward DFT). Destroys the workspace contents.
    pub fn to_coefficients(&self, ws: &mut GridWorkspace, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.scatter.len());
        let n = self.n;
        let n2 = n * n;
        let GridWorkspace {
            grid,
            plane,
            scratch,
        } = ws;

        // axis 0: every line, keep support rows
        for i1 in 0..n {
            for i0 in 0..n {
                let row = &grid[i0 * n2 + i1 * n..i0 * n2 + i1 * n + n];
                for (i2, &v) in row.iter().enumerate() {
                    plane[i2 * n + i0] = v;
                }
            }
            self.forward.process_with_scratch(plane, scratch);
            for i0 in self.support_iter() {
                let row = &mut grid[i0 * n2 + i1 * n..i0 * n2 + i1 * n + n];
                for (i2, v) in row.iter_mut().enumerate() {
                    *v = plane[i2 * n + i0];
                }
            }
        }
        // axis 1: support slabs, keep support rows
        for i0 in self.support_iter() {
            let slab = &mut grid[i0 * n2..(i0 + 1) * n2];
            transpose(slab, plane, n);
            self.forward.process_with_scratch(plane, scratch);
            for i1 in self.support_iter() {
                for i2 in 0..n {
                    slab[i1 * n + i2] = plane[i2 * n + i1];
                }
            }
        }
        // axis 2: support lines
        for i0 in self.support_iter() {
            for r in &self.support {
                let start = (i0 * n + r.start) * n;
                let end = (i0 * n + r.end) * n;
                self.forward
                    .process_with_scratch(&mut grid[start..end], scratch);
            }
        }
        for (o, &g) in out.iter_mut().zip(&self.scatter) {
            *o = grid[g];
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const TILE: usize = 16;
    for ib in (0..n).step_by(TILE) {
        for jb in (0..n).step_by(TILE) {
            for i in ib..(ib + TILE).min(n) {
                for j in jb..(jb + TILE).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}
