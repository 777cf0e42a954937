use crate::error::{Error, Result};

fn check_points(pairs: &[(u32, f64)]) -> Result<()> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pairs.len(),
        });
    }
    if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Domain(
            "cutoffs must be distinct and ascending".into(),
        ));
    }
    Ok(())
}

// least-squares line y = a + b x
fn line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Fits `E_M = E + c / M^rate` to the largest `⌈n/2⌉` (at least two)
/// points; returns `(E, c)`.
pub fn richardson_reference(pairs: &[(u32, f64)], rate: f64) -> Result<(f64, f64)> {
    check_points(pairs)?;
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    let keep = pairs.len().div_ceil(2).max(2);
    let tail = &pairs[pairs.len() - keep..];
    let xs: Vec<f64> = tail.iter().map(|&(m, _)| (m as f64).powf(-rate)).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, e)| e).collect();
    Ok(line(&xs, &ys))
}

/// Least-squares slope of `log(err)` against `log(M)`.
pub fn slope_fit(pairs: &[(u32, f64)]) -> Result<f64> {
    check_points(pairs)?;
    if let Some(&(m, e)) = pairs.iter().find(|&&(_, e)| !(e > 0.0)) {
        return Err(Error::Domain(format!("nonpositive error {e} at M = {m}")));
    }
    let xs: Vec<f64> = pairs.iter().map(|&(m, _)| (m as f64).ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, e)| e.ln()).collect();
    Ok(line(&xs, &ys).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(ms: &[u32], f: impl Fn(f64) -> f64) -> Vec<(u32, f64)> {
        ms.iter().map(|&m| (m, f(m as f64))).collect()
    }

    #[test]
    fn exact_model_recovery() {
        let p = synthetic(&[8, 12, 16, 24], |m| 1.0 + 5.0 / m.powi(3));
        let (e, c) = richardson_reference(&p, 3.0).unwrap();
        assert!((e - 1.0).abs() < 1e-10 && (c - 5.0).abs() < 1e-10);
    }

    #[test]
    fn higher_order_contamination_is_bounded() {
        let p = synthetic(&[8, 12, 16, 24], |m| {
            1.0 + 5.0 / m.powi(3) + 2.0 / m.powi(4)
        });
        let (e, _) = richardson_reference(&p, 3.0).unwrap();
        // the two-point fit on M = 16, 24 leaves 2/M⁴ - x·Δ(2/M⁴)/Δx at x = 0
        let y = |m: f64| 2.0 / m.powi(4);
        let x = |m: f64| m.powi(-3);
        let intercept = y(24.0) - x(24.0) * (y(16.0) - y(24.0)) / (x(16.0) - x(24.0));
        assert!((e - 1.0 - intercept).abs() < 1e-12);
        assert!((e - 1.0).abs() <= 2.0 * 2.0 / 24f64.powi(4));
    }

    #[test]
    fn constant_sequence() {
        let (e, c) = richardson_reference(&synthetic(&[4, 6, 8, 10, 12], |_| 1.0), 3.0).unwrap();
        assert!((e - 1.0).abs() < 1e-14 && c.abs() < 1e-10);
    }

    #[test]
    fn slopes() {
        let ms = [10, 14, 20, 28, 40];
        assert!((slope_fit(&synthetic(&ms, |m| m.powi(-3))).unwrap() + 3.0).abs() < 1e-12);
        assert!((slope_fit(&synthetic(&ms, |m| m.powi(-4))).unwrap() + 4.0).abs() < 1e-12);
        let s = slope_fit(&synthetic(&ms, |m| 7.0 / m.powi(3) * (1.0 + 1.0 / m))).unwrap();
        assert!(s > -3.3 && s < -2.9, "{s}");
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            richardson_reference(&[(4, 1.0), (8, 1.0)], 3.0).unwrap_err(),
            Error::InsufficientData { needed: 3, got: 2 }
        );
        assert!(matches!(
            slope_fit(&[(4, 1.0), (8, 0.0), (12, 0.5)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            richardson_reference(&[(8, 1.0), (4, 1.0), (12, 1.0)], 3.0),
            Err(Error::Domain(_))
        ));
    }
}
