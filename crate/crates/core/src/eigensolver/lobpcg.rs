//! Locally optimal block preconditioned conjugate gradient iteration.
//!
//! The search space `[X, W, P]` is kept orthonormal explicitly, so each
//! Rayleigh–Ritz step is a small standard symmetric eigenproblem. All
//! vectors are coefficient vectors of real functions; inner products and
//! Ritz coefficients are therefore real.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{field, EigenSolution, SolverMethod, SolverOptions};
use crate::error::{Error, Result};
use crate::fft::GridWorkspace;
use crate::lattice::FourierField;
use crate::operator::HamiltonianOperator;

type Vector = Vec<Complex64>;

// relative norm below which a direction is treated as linearly dependent
const DROP_TOL: f64 = 1e-10;

#[inline]
fn rdot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

#[inline]
fn norm(a: &[Complex64]) -> f64 {
    rdot(a, a).sqrt()
}

#[inline]
fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * a;
    }
}

#[inline]
fn scal(y: &mut [Complex64], a: f64) {
    for yi in y.iter_mut() {
        *yi *= a;
    }
}

/// `out_j = Σ_i coef[(i, j)] cols_i` for `j` in `range`.
fn combine(cols: &[&Vector], coef: &DMatrix<f64>, range: std::ops::Range<usize>) -> Vec<Vector> {
    let len = cols[0].len();
    range
        .map(|j| {
            let mut out = vec![Complex64::new(0.0, 0.0); len];
            for (i, c) in cols.iter().enumerate() {
                let a = coef[(i, j)];
                if a != 0.0 {
                    axpy(&mut out, a, c);
                }
            }
            out
        })
        .collect()
}

/// Orthonormalizes `vs` against the orthonormal set `q` and among
/// themselves (two passes of classical Gram–Schmidt per vector). When
/// `images` is given, the same linear operations are applied to it so that
/// `images[i] = H vs[i]` stays valid. Dependent directions are dropped.
fn orthonormalize(
    q: &[&Vector],
    q_images: &[&Vector],
    vs: Vec<Vector>,
    mut images: Option<Vec<Vector>>,
) -> (Vec<Vector>, Option<Vec<Vector>>) {
    let mut kept: Vec<Vector> = Vec::new();
    let mut kept_images: Vec<Vector> = Vec::new();
    for (idx, mut v) in vs.into_iter().enumerate() {
        let mut hv = images.as_mut().map(|im| std::mem::take(&mut im[idx]));
        let original = norm(&v);
        if original == 0.0 || !original.is_finite() {
            continue;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = q
                .iter()
                .map(|u| rdot(u, &v))
                .chain(kept.iter().map(|u| rdot(u, &v)))
                .collect();
            for (i, &c) in coeffs.iter().enumerate() {
                if i < q.len() {
                    axpy(&mut v, -c, q[i]);
                    if let Some(h) = hv.as_mut() {
                        axpy(h, -c, q_images[i]);
                    }
                } else {
                    let k = i - q.len();
                    axpy(&mut v, -c, &kept[k]);
                    if let Some(h) = hv.as_mut() {
                        axpy(h, -c, &kept_images[k]);
                    }
                }
            }
        }
        let n = norm(&v);
        if n <= DROP_TOL * original {
            continue;
        }
        scal(&mut v, 1.0 / n);
        if let Some(mut h) = hv {
            scal(&mut h, 1.0 / n);
            kept_images.push(h);
        }
        kept.push(v);
    }
    let imgs = images.map(|_| kept_images);
    (kept, imgs)
}

/// Projects onto coefficient vectors of real functions, `v_{-k} = conj(v_k)`.
/// Rounding in the transforms leaks a component outside this subspace, and
/// under the real inner product it would surface as a duplicate `iψ`.
fn symmetrize(v: &mut [Complex64]) {
    let n = v.len();
    for i in 0..=n / 2 {
        let j = n - 1 - i;
        let a = 0.5 * (v[i] + v[j].conj());
        v[i] = a;
        v[j] = a.conj();
    }
}

struct Apply<'a> {
    op: &'a HamiltonianOperator,
    ws: GridWorkspace,
}

impl Apply<'_> {
    fn image(&mut self, v: &[Complex64]) -> Vector {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.op.apply_into(v, &mut out, &mut self.ws);
        out
    }
}

/// Smallest Ritz value of a three-step Lanczos recursion started at `v0`.
fn lanczos_estimate(apply: &mut Apply<'_>, v0: &[Complex64]) -> f64 {
    let steps = 3.min(v0.len());
    let mut basis: Vec<Vector> = vec![v0.to_vec()];
    let n0 = norm(&basis[0]);
    scal(&mut basis[0], 1.0 / n0);
    let mut t = DMatrix::<f64>::zeros(steps, steps);
    let mut size = steps;
    for j in 0..steps {
        let mut w = apply.image(&basis[j]);
        for (i, b) in basis.iter().enumerate() {
            let c = rdot(b, &w);
            if i + 1 >= j {
                t[(i, j)] = c;
                t[(j, i)] = c;
            }
            axpy(&mut w, -c, b);
        }
        if j + 1 == steps {
            break;
        }
        let beta = norm(&w);
        if beta <= 1e-12 {
            size = j + 1;
            break;
        }
        scal(&mut w, 1.0 / beta);
        basis.push(w);
    }
    let t = t.view((0, 0), (size, size)).into_owned();
    t.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

struct RitzStep {
    values: Vec<f64>,
    x: Vec<Vector>,
    hx: Vec<Vector>,
    p: Vec<Vector>,
}

/// Rayleigh–Ritz on the orthonormal set `s` (first `nx` columns are the
/// current iterate).
fn rayleigh_ritz(s: &[&Vector], hs: &[&Vector], nx: usize, nb: usize) -> RitzStep {
    let ns = s.len();
    let mut g = DMatrix::<f64>::zeros(ns, ns);
    for i in 0..ns {
        for j in i..ns {
            let v = 0.5 * (rdot(s[i], hs[j]) + rdot(s[j], hs[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let keep = nb.min(ns);
    let mut c = DMatrix::<f64>::zeros(ns, keep);
    for (j, &o) in order.iter().take(keep).enumerate() {
        c.set_column(j, &eig.eigenvectors.column(o));
    }
    let values = order
        .iter()
        .take(keep)
        .map(|&o| eig.eigenvalues[o])
        .collect();
    let x = combine(s, &c, 0..keep);
    let hx = combine(hs, &c, 0..keep);
    let p = if ns > nx {
        let mut cp = c.clone();
        for i in 0..nx {
            for j in 0..keep {
                cp[(i, j)] = 0.0;
            }
        }
        combine(s, &cp, 0..keep)
    } else {
        Vec::new()
    };
    RitzStep { values, x, hx, p }
}

/// LOBPCG for the lowest `options.n_eigenpairs` eigenpairs.
pub fn solve_lobpcg(
    op: &HamiltonianOperator,
    options: &SolverOptions,
    guesses: &[FourierField],
) -> Result<EigenSolution> {
    options.validate(op.len())?;
    let nev = options.n_eigenpairs;
    let nb = options.effective_block_size().min(op.len());
    let tol = options.residual_tol;
    let mut apply = Apply {
        op,
        ws: op.workspace(),
    };

    // initial block: guesses, the constant function, then random fields
    let basis = op.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut candidates: Vec<Vector> = guesses
        .iter()
        .map(|g| {
            let mut v = g.coeffs().to_vec();
            symmetrize(&mut v);
            v
        })
        .collect();
    candidates.push(FourierField::constant(basis.clone(), 1.0).into_coeffs());
    let mut x: Vec<Vector> = Vec::new();
    while x.len() < nb {
        let need = nb - x.len();
        let mut fresh: Vec<Vector> = std::mem::take(&mut candidates);
        while fresh.len() < need {
            fresh.push(FourierField::random_hermitian(basis.clone(), &mut rng).into_coeffs());
        }
        let refs: Vec<&Vector> = x.iter().collect();
        let (accepted, _) = orthonormalize(&refs, &refs, fresh, None);
        x.extend(accepted.into_iter().take(need));
    }

    let sigma = match options.preconditioner_shift {
        Some(s) => s,
        None => lanczos_estimate(&mut apply, &x[0]).abs().max(1.0),
    };
    let precond: Vec<f64> = op.kinetic().iter().map(|t| 1.0 / (t + sigma)).collect();

    let mut hx: Vec<Vector> = x.iter().map(|v| apply.image(v)).collect();
    let step = {
        let s: Vec<&Vector> = x.iter().collect();
        let hs: Vec<&Vector> = hx.iter().collect();
        rayleigh_ritz(&s, &hs, nb, nb)
    };
    let mut values = step.values;
    x = step.x;
    hx = step.hx;
    let mut p: Vec<Vector> = Vec::new();
    let mut best = vec![f64::INFINITY; nev];
    let mut refreshed = false;

    for iteration in 0..=options.max_iterations {
        let residual_vecs: Vec<Vector> = (0..nb)
            .map(|j| {
                let mut r = hx[j].clone();
                axpy(&mut r, -values[j], &x[j]);
                r
            })
            .collect();
        let res: Vec<f64> = residual_vecs.iter().map(|r| norm(r)).collect();
        for (b, r) in best.iter_mut().zip(&res) {
            *b = b.min(*r);
        }
        log::trace!(
            "lobpcg iteration {iteration}: E = {:?}, residuals = {:?}",
            &values[..nev],
            &res[..nev]
        );

        if res[..nev].iter().all(|&r| r <= tol) {
            if refreshed {
                let eigenvectors = x.iter().take(nev).map(|v| field(op, v.clone())).collect();
                return Ok(EigenSolution {
                    eigenvalues: values[..nev].to_vec(),
                    eigenvectors,
                    residuals: res[..nev].to_vec(),
                    iterations: iteration,
                    method: SolverMethod::Iterative,
                    hamiltonian: op.spec().clone(),
                });
            }
            // images are updated by recurrence; confirm with fresh products
            hx = x.iter().map(|v| apply.image(v)).collect();
            for j in 0..nb {
                values[j] = rdot(&x[j], &hx[j]);
            }
            refreshed = true;
            continue;
        }
        refreshed = false;
        if iteration == options.max_iterations {
            break;
        }

        let active: Vec<bool> = res.iter().map(|&r| r > tol).collect();
        let w: Vec<Vector> = residual_vecs
            .into_iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(mut r, _)| {
                for (ri, t) in r.iter_mut().zip(&precond) {
                    *ri *= *t;
                }
                symmetrize(&mut r);
                r
            })
            .collect();
        let (w, _) = {
            let xr: Vec<&Vector> = x.iter().collect();
            orthonormalize(&xr, &xr, w, None)
        };
        let hw: Vec<Vector> = w.iter().map(|v| apply.image(v)).collect();

        // Directions of converged columns are tiny and their images cannot be
        // updated by recurrence without losing accuracy; keep active ones and
        // apply the operator afresh.
        let p_active: Vec<Vector> = std::mem::take(&mut p)
            .into_iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(v, _)| v)
            .collect();
        let pn = if p_active.is_empty() {
            Vec::new()
        } else {
            let q: Vec<&Vector> = x.iter().chain(w.iter()).collect();
            orthonormalize(&q, &q, p_active, None).0
        };
        let hpn: Vec<Vector> = pn.iter().map(|v| apply.image(v)).collect();

        let s: Vec<&Vector> = x.iter().chain(w.iter()).chain(pn.iter()).collect();
        let hs: Vec<&Vector> = hx.iter().chain(hw.iter()).chain(hpn.iter()).collect();
        let step = rayleigh_ritz(&s, &hs, nb, nb);
        values = step.values;
        x = step.x;
        hx = step.hx;
        p = step.p;
    }
    Err(Error::NotConverged {
        iterations: options.max_iterations,
        residuals: best,
    })
}
