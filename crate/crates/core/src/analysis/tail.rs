//! Lattice tail sums `Σ_{k ∉ cutoff(M)} |k|⁻ᵖ` over `Z³`.
//!
//! The full sum `Z(p) = Σ_{k≠0} |k|⁻ᵖ` (the Epstein zeta function of the
//! cubic lattice) is evaluated by splitting the theta-function integral at
//! `t = 1`, which turns it into two exponentially convergent lattice sums:
//!
//! ```text
//! π^{-s} Γ(s) Z(2s) = Σ'_k [E_{1-s}(π|k|²) + E_{s-1/2}(π|k|²)] + 1/(s - 3/2) - 1/s
//! ```
//!
//! with `E_ν` the generalized exponential integral. The tail is then the
//! full sum minus the finite sum over the cutoff set.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::lattice::Shape;

/// `E_ν(x) = ∫_1^∞ t^{-ν} e^{-xt} dt` for `x ≥ 1` (continued fraction).
pub(crate) fn expint(nu: f64, x: f64) -> f64 {
    debug_assert!(x >= 1.0);
    const TINY: f64 = 1e-300;
    let mut b = x + nu;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let fi = i as f64;
        let a = -fi * (nu - 1.0 + fi);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

// |k|² beyond which e^{-π|k|²} is below double precision
const THETA_RADIUS: i32 = 5;

/// `Σ_{k ∈ Z³, k ≠ 0} |k|⁻ᵖ` for `p > 3`.
pub fn lattice_zeta(p: f64) -> Result<f64> {
    if !(p > 3.0) {
        return Err(Error::DivergentSum(p.floor() as i32));
    }
    let s = 0.5 * p;
    let mut sum = 0.0;
    let r = THETA_RADIUS;
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let n2 = (a * a + b * b + c * c) as f64;
                if n2 == 0.0 {
                    continue;
                }
                let x = PI * n2;
                sum += expint(1.0 - s, x) + expint(s - 0.5, x);
            }
        }
    }
    sum += 1.0 / (s - 1.5) - 1.0 / s;
    Ok(sum * PI.powf(s) / gamma(s))
}

/// Neumaier-compensated sum of `|k|⁻ᵖ` over `0 < k` within the cutoff set.
fn interior_sum(cutoff: u32, p: f64, shape: Shape) -> f64 {
    let m = cutoff as i32;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                let k = [a, b, c];
                if k == [0, 0, 0] || !shape.contains(k, cutoff) {
                    continue;
                }
                let n2 = (a as i64 * a as i64 + b as i64 * b as i64 + c as i64 * c as i64) as f64;
                let term = n2.powf(-0.5 * p);
                let t = sum + term;
                if sum.abs() >= term.abs() {
                    comp += (sum - t) + term;
                } else {
                    comp += (term - t) + sum;
                }
                sum = t;
            }
        }
    }
    sum + comp
}

/// `Σ_{k outside cutoff M} |k|⁻ᵖ` (`|k| > M` or `|k|_∞ > M`).
pub fn tail_sum(cutoff: u32, exponent: i32, shape: Shape) -> Result<f64> {
    if exponent <= 3 {
        return Err(Error::DivergentSum(exponent));
    }
    if cutoff < 1 {
        return Err(Error::InvalidCutoff(cutoff as i64));
    }
    let p = exponent as f64;
    Ok(lattice_zeta(p)? - interior_sum(cutoff, p, shape))
}

/// `E_ν(x)` for `0 < x < 1` from its power series.
fn expint_small(nu: f64, x: f64) -> f64 {
    let n = nu.round();
    if (nu - n).abs() < 1e-12 && n >= 1.0 {
        // E_1 by its series, then upward recurrence
        const EULER: f64 = 0.577_215_664_901_532_9;
        let mut e1 = -EULER - x.ln();
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            e1 -= term / k as f64;
        }
        let mut e = e1;
        for m in 1..n as i32 {
            e = ((-x).exp() - x * e) / m as f64;
        }
        return e;
    }
    let mut series = 0.0;
    let mut term = 1.0;
    for k in 0..60 {
        if k > 0 {
            term *= -x / k as f64;
        }
        series += term / (k as f64 + 1.0 - nu);
    }
    gamma(1.0 - nu) * x.powf(nu - 1.0) - series
}

fn expint_any(nu: f64, x: f64) -> f64 {
    if x >= 1.0 {
        expint(nu, x)
    } else {
        expint_small(nu, x)
    }
}

/// `Σ_{k≠0} |k|⁻ᵖ cos(2π k·θ)` by theta splitting; the `t < 1` half is
/// Poisson-summed onto the shifted lattice `n + θ`.
fn phased_zeta(p: f64, theta: [f64; 3]) -> f64 {
    let s = 0.5 * p;
    let th = theta.map(|t| t - t.round());
    let r = THETA_RADIUS;
    let mut sum = -1.0 / s;
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let k = [a as f64, b as f64, c as f64];
                let n2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if n2 > 0.0 {
                    let phase = 2.0 * PI * (k[0] * th[0] + k[1] * th[1] + k[2] * th[2]);
                    sum += phase.cos() * expint(1.0 - s, PI * n2);
                }
                let d2 = (0..3).map(|i| (k[i] + th[i]).powi(2)).sum::<f64>();
                sum += if d2 == 0.0 {
                    1.0 / (s - 1.5)
                } else {
                    expint_any(s - 0.5, PI * d2)
                };
            }
        }
    }
    sum * PI.powf(s) / gamma(s)
}

/// `Σ_{k outside cutoff M} |k|⁻ᵖ cos(2π k·θ)` for a fractional
/// displacement `θ` (displacement over the cell edge).
pub fn phased_tail_sum(cutoff: u32, exponent: i32, shape: Shape, theta: [f64; 3]) -> Result<f64> {
    if exponent <= 3 {
        return Err(Error::DivergentSum(exponent));
    }
    if cutoff < 1 {
        return Err(Error::InvalidCutoff(cutoff as i64));
    }
    if theta.iter().all(|t| (t - t.round()).abs() < 1e-14) {
        return tail_sum(cutoff, exponent, shape);
    }
    let p = exponent as f64;
    let m = cutoff as i32;
    let mut inner = 0.0;
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                let k = [a, b, c];
                if k == [0, 0, 0] || !shape.contains(k, cutoff) {
                    continue;
                }
                let n2 = (a * a + b * b + c * c) as f64;
                let phase =
                    2.0 * PI * (a as f64 * theta[0] + b as f64 * theta[1] + c as f64 * theta[2]);
                inner += n2.powf(-0.5 * p) * phase.cos();
            }
        }
    }
    Ok(phased_zeta(p, theta) - inner)
}
