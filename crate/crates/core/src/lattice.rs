//! Periodic cell, reciprocal lattice and plane-wave cutoff sets.
//!
//! A state in the discretization space is stored as a dense vector of
//! coefficients `û_K` over a [`CutoffBasis`], with
//!
//! ```text
//! u(x) = Σ_K û_K e^{iK·x} / |Γ|^{1/2},    K = 2πk / L,  k ∈ Z³
//! ```
//!
//! so that the Euclidean norm of the coefficient vector is the L² norm of
//! the function on the cell `Γ = [-L/2, L/2)³`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::PaddedGrid;

/// Cubic periodic cell of edge `L` (atomic units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    edge: f64,
}

impl Cell {
    pub fn new(edge: f64) -> Result<Self> {
        if !(edge.is_finite() && edge > 0.0) {
            return Err(Error::InvalidCell(edge));
        }
        Ok(Self { edge })
    }

    #[inline]
    pub fn edge(&self) -> f64 {
        self.edge
    }

    /// `|Γ| = L³`.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.edge * self.edge * self.edge
    }

    /// Length of the reciprocal lattice unit `2π/L`.
    #[inline]
    pub fn reciprocal_unit(&self) -> f64 {
        2.0 * PI / self.edge
    }

    /// Wavevector `K = 2πk/L` of an integer index.
    pub fn wavevector(&self, k: [i32; 3]) -> [f64; 3] {
        let g = self.reciprocal_unit();
        [g * k[0] as f64, g * k[1] as f64, g * k[2] as f64]
    }

    /// Reduces a point to the fundamental cell `[-L/2, L/2)³`.
    pub fn reduce(&self, x: [f64; 3]) -> [f64; 3] {
        let l = self.edge;
        x.map(|c| {
            let r = c - l * (c / l).round();
            if r >= 0.5 * l {
                r - l
            } else if r < -0.5 * l {
                r + l
            } else {
                r
            }
        })
    }

    /// Lattice-periodic distance between two points.
    pub fn periodic_distance(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let d = self.reduce([a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Truncation rule for the plane-wave index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `|k| ≤ M` (Euclidean).
    Spherical,
    /// `|k|_∞ ≤ M`.
    Cubic,
}

impl Shape {
    pub fn contains(self, k: [i32; 3], cutoff: u32) -> bool {
        let m = cutoff as i64;
        match self {
            Shape::Spherical => norm_sq(k) <= m * m,
            Shape::Cubic => k.iter().all(|&c| (c as i64).abs() <= m),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::Spherical => f.write_str("spherical"),
            Shape::Cubic => f.write_str("cubic"),
        }
    }
}

#[inline]
pub(crate) fn norm_sq(k: [i32; 3]) -> i64 {
    k.iter().map(|&c| (c as i64) * (c as i64)).sum()
}

const ABSENT: u32 = u32::MAX;

/// Reciprocal-lattice index set `{k : |k| ≤ M}` or `{k : |k|_∞ ≤ M}` in
/// lexicographic order.
#[derive(Debug)]
pub struct CutoffBasis {
    cell: Cell,
    cutoff: u32,
    shape: Shape,
    indices: Vec<[i32; 3]>,
    // dense position table over the bounding cube [-M, M]³
    lookup: Vec<u32>,
}

impl CutoffBasis {
    pub fn new(cell: Cell, cutoff: i64, shape: Shape) -> Result<Self> {
        if !(1..=2048).contains(&cutoff) {
            return Err(Error::InvalidCutoff(cutoff));
        }
        let m = cutoff as i32;
        let side = (2 * m + 1) as usize;
        let mut lookup = vec![ABSENT; side * side * side];
        let mut indices = Vec::new();
        for k0 in -m..=m {
            for k1 in -m..=m {
                for k2 in -m..=m {
                    let k = [k0, k1, k2];
                    if shape.contains(k, cutoff as u32) {
                        lookup[cube_offset(k, m)] = indices.len() as u32;
                        indices.push(k);
                    }
                }
            }
        }
        Ok(Self {
            cell,
            cutoff: cutoff as u32,
            shape,
            indices,
            lookup,
        })
    }

    #[inline]
    pub fn cell(&self) -> Cell {
        self.cell
    }

    #[inline]
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    #[inline]
    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn indices(&self) -> &[[i32; 3]] {
        &self.indices
    }

    /// Position of `k` in the ordered index list.
    pub fn position(&self, k: [i32; 3]) -> Option<usize> {
        let m = self.cutoff as i32;
        if k.iter().any(|&c| c < -m || c > m) {
            return None;
        }
        match self.lookup[cube_offset(k, m)] {
            ABSENT => None,
            p => Some(p as usize),
        }
    }

    /// Position of `-k` given the position of `k`.
    ///
    /// Lexicographic order on a negation-closed set is reversed by negation.
    #[inline]
    pub fn negated(&self, pos: usize) -> usize {
        self.indices.len() - 1 - pos
    }

    /// Position of the zero wavevector.
    #[inline]
    pub fn origin(&self) -> usize {
        self.indices.len() / 2
    }

    pub fn wavevector(&self, pos: usize) -> [f64; 3] {
        self.cell.wavevector(self.indices[pos])
    }

    /// `|K|²` of the index at `pos`.
    pub fn wavevector_norm_sq(&self, pos: usize) -> f64 {
        let g = self.cell.reciprocal_unit();
        g * g * norm_sq(self.indices[pos]) as f64
    }

    /// Same index set and cell.
    pub fn same_as(&self, other: &CutoffBasis) -> bool {
        std::ptr::eq(self, other)
            || (self.cutoff == other.cutoff && self.shape == other.shape && self.cell == other.cell)
    }

    fn check_same(&self, other: &CutoffBasis) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "basis (M={}, {}) does not match (M={}, {})",
                self.cutoff, self.shape, other.cutoff, other.shape
            )))
        }
    }
}

#[inline]
fn cube_offset(k: [i32; 3], m: i32) -> usize {
    let side = (2 * m + 1) as usize;
    let a = (k[0] + m) as usize;
    let b = (k[1] + m) as usize;
    let c = (k[2] + m) as usize;
    (a * side + b) * side + c
}

/// Builds the index set for cutoff `M` and the given truncation rule.
pub fn build_basis(cell: Cell, cutoff: i64, shape: Shape) -> Result<Arc<CutoffBasis>> {
    CutoffBasis::new(cell, cutoff, shape).map(Arc::new)
}

/// Number of lattice vectors in the cutoff set, without building it.
pub fn basis_cardinality(cutoff: u32, shape: Shape) -> usize {
    let m = cutoff as i64;
    match shape {
        Shape::Cubic => ((2 * m + 1) as usize).pow(3),
        Shape::Spherical => {
            let mut n = 0usize;
            for a in -m..=m {
                for b in -m..=m {
                    let rest = m * m - a * a - b * b;
                    if rest >= 0 {
                        let mut r = (rest as f64).sqrt() as i64;
                        while r * r > rest {
                            r -= 1;
                        }
                        while (r + 1) * (r + 1) <= rest {
                            r += 1;
                        }
                        n += 2 * r as usize + 1;
                    }
                }
            }
            n
        }
    }
}

/// Smallest 2,3,5-smooth integer that is at least `min`.
pub fn smooth_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

/// Per-dimension FFT grid size for alias-free Galerkin products.
///
/// A state band-limited to `M` times a potential band-limited to `2M` has
/// content up to `3M`; a grid of `N ≥ 4M + 1` points keeps every aliased
/// image outside `[-M, M]`.
pub fn fft_grid_size(basis: &CutoffBasis) -> [usize; 3] {
    let n = smooth_size(4 * basis.cutoff() as usize + 1);
    [n; 3]
}

/// Complex coefficient vector over a [`CutoffBasis`].
#[derive(Debug, Clone)]
pub struct FourierField {
    basis: Arc<CutoffBasis>,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

impl FourierField {
    pub fn zeros(basis: Arc<CutoffBasis>) -> Self {
        let n = basis.len();
        Self {
            basis,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
            hermitian: true,
        }
    }

    /// Wraps raw coefficients. The Hermitian flag is set when the data are
    /// Hermitian-symmetric to 1e-14 relative.
    pub fn from_coeffs(basis: Arc<CutoffBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a basis of {}",
                coeffs.len(),
                basis.len()
            )));
        }
        let mut field = Self {
            basis,
            coeffs,
            hermitian: false,
        };
        field.hermitian = field.hermitian_asymmetry() <= 1e-14;
        Ok(field)
    }

    /// Constant function with value `c`.
    pub fn constant(basis: Arc<CutoffBasis>, c: f64) -> Self {
        let mut f = Self::zeros(basis);
        let o = f.basis.origin();
        f.coeffs[o] = Complex64::new(c * f.basis.cell().volume().sqrt(), 0.0);
        f
    }

    /// Normalized plane wave `e_K`.
    pub fn plane_wave(basis: Arc<CutoffBasis>, k: [i32; 3]) -> Result<Self> {
        let pos = basis
            .position(k)
            .ok_or_else(|| Error::Dimension(format!("{k:?} is outside the cutoff")))?;
        let mut f = Self::zeros(basis);
        f.coeffs[pos] = Complex64::new(1.0, 0.0);
        f.hermitian = pos == f.basis.origin();
        Ok(f)
    }

    /// Random real-valued function whose coefficients decay like
    /// `1/(1 + |k|²)`, normalized to unit L² norm.
    pub fn random_hermitian<R: Rng + ?Sized>(basis: Arc<CutoffBasis>, rng: &mut R) -> Self {
        let mut f = Self::zeros(basis);
        let n = f.coeffs.len();
        let origin = f.basis.origin();
        for pos in origin..n {
            let w = 1.0 / (1.0 + norm_sq(f.basis.indices[pos]) as f64);
            let re = rng.random::<f64>() - 0.5;
            let im = if pos == origin {
                0.0
            } else {
                rng.random::<f64>() - 0.5
            };
            let c = Complex64::new(re, im) * w;
            f.coeffs[pos] = c;
            f.coeffs[n - 1 - pos] = c.conj();
        }
        let norm = f.norm();
        f.scale(1.0 / norm);
        f.hermitian = true;
        f
    }

    #[inline]
    pub fn basis(&self) -> &Arc<CutoffBasis> {
        &self.basis
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.hermitian = false;
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer index `k`, zero outside the cutoff.
    pub fn coefficient(&self, k: [i32; 3]) -> Complex64 {
        self.basis
            .position(k)
            .map_or(Complex64::new(0.0, 0.0), |p| self.coeffs[p])
    }

    /// Whether the field was built or verified as the coefficients of a
    /// real-valued function.
    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `max_k |û_{-k} - conj(û_k)| / max_k |û_k|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.coeffs.len();
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..n)
            .map(|i| (self.coeffs[n - 1 - i] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Replaces the coefficients by their Hermitian part, i.e. the
    /// coefficients of the real part of the function.
    pub fn symmetrize(&mut self) {
        let n = self.coeffs.len();
        for i in 0..=n / 2 {
            let j = n - 1 - i;
            let a = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
            self.coeffs[i] = a;
            self.coeffs[j] = a.conj();
        }
        self.hermitian = true;
    }

    /// L² norm, i.e. the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩ = Σ conj(self_k) other_k`.
    pub fn dot(&self, other: &FourierField) -> Result<Complex64> {
        self.basis.check_same(&other.basis)?;
        Ok(dot(&self.coeffs, &other.coeffs))
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    /// Multiplies by a complex number; clears the Hermitian flag unless the
    /// factor is real.
    pub fn scale_complex(&mut self, s: Complex64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
        if s.im != 0.0 {
            self.hermitian = false;
        }
    }

    /// Copies the coefficients onto another index set: entries shared by
    /// both sets are kept, the rest are dropped or zero-filled. This is the
    /// embedding `V_M ⊂ V_M'` when the target is larger and the projector
    /// `Π_M` when it is smaller.
    pub fn transfer(&self, target: &Arc<CutoffBasis>) -> Result<FourierField> {
        if self.basis.cell() != target.cell() {
            return Err(Error::Dimension("transfer between different cells".into()));
        }
        let mut out = FourierField::zeros(Arc::clone(target));
        let (small, large) = if self.basis.len() <= target.len() {
            (&self.basis, target)
        } else {
            (target, &self.basis)
        };
        let to_target = Arc::ptr_eq(small, target);
        for (i, &k) in small.indices().iter().enumerate() {
            if let Some(j) = large.position(k) {
                if to_target {
                    out.coeffs[i] = self.coeffs[j];
                } else {
                    out.coeffs[j] = self.coeffs[i];
                }
            }
        }
        out.hermitian = self.hermitian;
        Ok(out)
    }

    /// Point values `u(x) = Σ_K û_K e^{iK·x} / |Γ|^{1/2}`.
    ///
    /// Points are reduced to the fundamental cell first. The exponential
    /// factorizes per axis, so each point costs one complex multiply-add
    /// per stored coefficient.
    pub fn evaluate_at_points(&self, points: &[[f64; 3]]) -> Vec<Complex64> {
        let cell = self.basis.cell();
        let m = self.basis.cutoff() as i32;
        let side = (2 * m + 1) as usize;
        let norm = 1.0 / cell.volume().sqrt();
        let g = cell.reciprocal_unit();
        let mut tables = vec![Complex64::new(0.0, 0.0); 3 * side];
        points
            .iter()
            .map(|&p| {
                let x = cell.reduce(p);
                for axis in 0..3 {
                    for k in -m..=m {
                        tables[axis * side + (k + m) as usize] =
                            Complex64::from_polar(1.0, g * k as f64 * x[axis]);
                    }
                }
                let (t0, rest) = tables.split_at(side);
                let (t1, t2) = rest.split_at(side);
                let mut sum = Complex64::new(0.0, 0.0);
                for (c, k) in self.coeffs.iter().zip(self.basis.indices()) {
                    let phase =
                        t0[(k[0] + m) as usize] * t1[(k[1] + m) as usize] * t2[(k[2] + m) as usize];
                    sum += c * phase;
                }
                sum * norm
            })
            .collect()
    }

    /// Samples `u(x_j)` on the uniform grid `x_j = j L / n`, `n` per axis,
    /// with `n ≥ 2M + 1`. Layout is row-major in `(j0, j1, j2)`.
    pub fn grid_samples(&self, n: usize) -> Result<Vec<Complex64>> {
        let grid = PaddedGrid::new(&self.basis, n)?;
        let mut ws = grid.workspace();
        grid.to_real_space(&self.coeffs, &mut ws);
        let norm = 1.0 / self.basis.cell().volume().sqrt();
        Ok(ws.values().iter().map(|v| v * norm).collect())
    }
}

/// Parallel-free inner product `Σ conj(a_k) b_k` of raw coefficient slices.
#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cell(l: f64) -> Cell {
        Cell::new(l).unwrap()
    }

    #[test]
    fn basis_cardinalities() {
        let c = cell(2.0);
        assert_eq!(build_basis(c, 1, Shape::Cubic).unwrap().len(), 27);
        let s1 = build_basis(c, 1, Shape::Spherical).unwrap();
        assert_eq!(s1.len(), 7);
        let mut set: Vec<_> = s1.indices().to_vec();
        set.sort();
        assert_eq!(
            set,
            vec![
                [-1, 0, 0],
                [0, -1, 0],
                [0, 0, -1],
                [0, 0, 0],
                [0, 0, 1],
                [0, 1, 0],
                [1, 0, 0]
            ]
        );
    }

    #[test]
    fn spherical_m2_matches_enumeration() {
        let mut count = 0;
        for a in -2i32..=2 {
            for b in -2i32..=2 {
                for c in -2i32..=2 {
                    if a * a + b * b + c * c <= 4 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 33);
        assert_eq!(
            build_basis(cell(2.0), 2, Shape::Spherical).unwrap().len(),
            count
        );
    }

    #[test]
    fn invalid_cutoff_and_cell() {
        assert_eq!(
            build_basis(cell(2.0), 0, Shape::Cubic).unwrap_err(),
            Error::InvalidCutoff(0)
        );
        assert!(Cell::new(0.0).is_err());
        assert!(Cell::new(f64::NAN).is_err());
        assert!(Cell::new(-1.0).is_err());
    }

    #[test]
    fn negation_closure_and_ordering() {
        for shape in [Shape::Cubic, Shape::Spherical] {
            for m in 1..6 {
                let b = build_basis(cell(1.5), m, shape).unwrap();
                assert_eq!(b.len() % 2, 1);
                assert_eq!(b.indices()[b.origin()], [0, 0, 0]);
                for (i, k) in b.indices().iter().enumerate() {
                    let neg = [-k[0], -k[1], -k[2]];
                    assert_eq!(b.position(neg), Some(b.negated(i)));
                    assert_eq!(b.position(*k), Some(i));
                }
                assert!(b.indices().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn nesting() {
        for shape in [Shape::Cubic, Shape::Spherical] {
            for m in 1..6 {
                let small = build_basis(cell(2.0), m, shape).unwrap();
                let big = build_basis(cell(2.0), m + 1, shape).unwrap();
                assert!(small.indices().iter().all(|&k| big.position(k).is_some()));
            }
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(smooth_size(5), 5);
        assert_eq!(smooth_size(41), 45);
        assert_eq!(smooth_size(101), 108);
        let c = cell(2.0);
        assert_eq!(
            fft_grid_size(&build_basis(c, 1, Shape::Cubic).unwrap()),
            [5; 3]
        );
        assert_eq!(
            fft_grid_size(&build_basis(c, 10, Shape::Cubic).unwrap()),
            [45; 3]
        );
        assert_eq!(
            fft_grid_size(&build_basis(c, 25, Shape::Cubic).unwrap()),
            [108; 3]
        );
    }

    #[test]
    fn smooth_size_oracle() {
        // enumerate smooth integers directly
        let smooth = |n: usize| {
            let mut r = n;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            r == 1
        };
        for min in 1..400 {
            let expected = (min..).find(|&n| smooth(n)).unwrap();
            assert_eq!(smooth_size(min), expected);
        }
    }

    #[test]
    fn evaluate_constant_and_cosine() {
        let c = cell(2.0 * PI);
        let b = build_basis(c, 2, Shape::Spherical).unwrap();
        let f = FourierField::constant(Arc::clone(&b), 3.25);
        for v in f.evaluate_at_points(&[[0.1, -2.0, 7.0], [100.0, 0.0, 0.0]]) {
            assert!((v - Complex64::new(3.25, 0.0)).norm() < 1e-13);
        }
        let mut cosine = FourierField::zeros(Arc::clone(&b));
        let half = c.volume().sqrt() / 2.0;
        cosine.coeffs_mut()[b.position([1, 0, 0]).unwrap()] = Complex64::new(half, 0.0);
        cosine.coeffs_mut()[b.position([-1, 0, 0]).unwrap()] = Complex64::new(half, 0.0);
        let v = cosine.evaluate_at_points(&[[0.0; 3], [PI / 2.0, 0.0, 0.0]]);
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(v[1].norm() < 1e-13);
    }

    #[test]
    fn evaluate_matches_direct_sum() {
        let c = cell(2.0);
        let b = build_basis(c, 5, Shape::Cubic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = FourierField::random_hermitian(Arc::clone(&b), &mut rng);
        let points: Vec<[f64; 3]> = (0..10)
            .map(|_| {
                [
                    rng.random::<f64>() * 7.0 - 3.0,
                    rng.random::<f64>(),
                    -rng.random::<f64>(),
                ]
            })
            .collect();
        let fast = f.evaluate_at_points(&points);
        let norm = f.norm();
        for (p, v) in points.iter().zip(&fast) {
            let mut direct = Complex64::new(0.0, 0.0);
            for (coef, k) in f.coeffs().iter().zip(b.indices()) {
                let kv = c.wavevector(*k);
                let phase = kv[0] * p[0] + kv[1] * p[1] + kv[2] * p[2];
                direct += coef * Complex64::from_polar(1.0, phase);
            }
            direct /= c.volume().sqrt();
            assert!((direct - v).norm() < 1e-12 * norm.max(1.0));
            assert!(v.im.abs() <= 1e-12 * norm);
        }
    }

    #[test]
    fn parseval_on_fft_grid() {
        let c = cell(1.7);
        for shape in [Shape::Cubic, Shape::Spherical] {
            let b = build_basis(c, 4, shape).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let f = FourierField::random_hermitian(Arc::clone(&b), &mut rng);
            let n = 2 * 4 + 1;
            let samples = f.grid_samples(n).unwrap();
            let weight = c.volume() / (n * n * n) as f64;
            let quad: f64 = samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * weight;
            let exact: f64 = f.coeffs().iter().map(|v| v.norm_sqr()).sum();
            assert!((quad - exact).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn reduce_into_cell() {
        let c = cell(2.0);
        let r = c.reduce([1.0, -1.0, 5.3]);
        assert_eq!(r[0], -1.0);
        assert_eq!(r[1], -1.0);
        assert!((r[2] + 0.7).abs() < 1e-12);
        assert!((c.periodic_distance([0.9, 0.0, 0.0], [-0.9, 0.0, 0.0]) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn transfer_embeds_and_projects() {
        let c = cell(2.0);
        let small = build_basis(c, 2, Shape::Cubic).unwrap();
        let big = build_basis(c, 4, Shape::Cubic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = FourierField::random_hermitian(Arc::clone(&big), &mut rng);
        let p = f.transfer(&small).unwrap();
        let back = p.transfer(&big).unwrap();
        for (i, k) in big.indices().iter().enumerate() {
            let expected = if small.position(*k).is_some() {
                f.coeffs()[i]
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert_eq!(back.coeffs()[i], expected);
        }
    }

    #[test]
    fn cardinality_matches_built_basis() {
        let cell = Cell::new(2.0).unwrap();
        for m in [1, 2, 5, 9] {
            for shape in [Shape::Cubic, Shape::Spherical] {
                let b = build_basis(cell, m, shape).unwrap();
                assert_eq!(basis_cardinality(m as u32, shape), b.len());
            }
        }
    }

    #[test]
    fn hermitian_symmetry_of_random_fields() {
        let b = build_basis(cell(2.0), 3, Shape::Spherical).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = FourierField::random_hermitian(Arc::clone(&b), &mut rng);
        assert!(f.is_hermitian());
        assert_eq!(f.hermitian_asymmetry(), 0.0);
        assert!((f.norm() - 1.0).abs() < 1e-14);
        f.scale_complex(Complex64::new(0.0, 1.0));
        assert!(!f.is_hermitian());
        assert!(f.hermitian_asymmetry() > 0.5);
    }
}
