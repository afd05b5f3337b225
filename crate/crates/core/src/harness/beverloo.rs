//! Discharge-rate measurement and the power-law fit `Q = C (D0 − k_c d)^p`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 4 distinct neck diameters with positive rates, got {0}")]
    InsufficientData(String),
    #[error("every offset in the search range makes some D0 − k_c d non-positive")]
    FitDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeverlooFit {
    /// `C` in `Q = C (D0 − k_c d)^p`.
    pub prefactor: f64,
    pub k_c: f64,
    pub exponent: f64,
    /// Sum of squared residuals of `ln Q`.
    pub residual: f64,
}

impl BeverlooFit {
    /// Offset `k_c d`.
    pub fn offset(&self, d: f64) -> f64 {
        self.k_c * d
    }

    /// Prefactor scaled out of `ρ √g`, comparable to the dimensionless 2D coefficient.
    pub fn coefficient(&self, density: f64, gravity: f64) -> f64 {
        self.prefactor / (density * gravity.abs().sqrt())
    }

    pub fn predict(&self, d0: f64, d: f64) -> f64 {
        self.prefactor * (d0 - self.k_c * d).powf(self.exponent)
    }
}

/// Least squares of `ln Q` against `ln(D0 − s)`: `(ln C, p, SSR)`.
fn log_fit(data: &[(f64, f64)], s: f64) -> (f64, f64, f64) {
    let n = data.len() as f64;
    let xy: Vec<(f64, f64)> = data.iter().map(|&(d0, q)| ((d0 - s).ln(), q.ln())).collect();
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let ssr = xy.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    (icpt, slope, ssr)
}

/// Fits `(D0, Q)` samples; `k_c d` is found by a coarse scan over
/// `[0, min D0)` refined by golden-section search.
pub fn beverloo_fit(data: &[(f64, f64)], d: f64) -> Result<BeverlooFit, FitError> {
    let mut distinct: Vec<f64> = data.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 || data.iter().any(|&(d0, q)| !(q > 0.0) || !d0.is_finite()) || !(d > 0.0) {
        return Err(FitError::InsufficientData(format!("{} distinct D0, samples {data:?}, d = {d}", distinct.len())));
    }
    let hi = distinct[0];
    if !(hi > 0.0) {
        return Err(FitError::FitDegenerate);
    }
    let hi = hi * (1.0 - 1e-9);
    let cost = |s: f64| log_fit(data, s).2;

    const SCAN: usize = 400;
    let xs: Vec<f64> = (0..=SCAN).map(|k| hi * k as f64 / SCAN as f64).collect();
    let best = (0..=SCAN).min_by(|&a, &b| cost(xs[a]).total_cmp(&cost(xs[b]))).expect("non-empty scan");
    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(SCAN)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (cost(c), cost(e));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * hi.max(1.0) {
            break;
        }
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = cost(e);
        }
    }
    let mut s = 0.5 * (a + b);
    if cost(xs[best]) < cost(s) {
        s = xs[best];
    }
    let (icpt, p, ssr) = log_fit(data, s);
    Ok(BeverlooFit {
        prefactor: icpt.exp(),
        k_c: s / d,
        exponent: p,
        residual: ssr,
    })
}

/// Slope of the least-squares line through `(t, m)`.
pub fn linear_rate(t: &[f64], m: &[f64]) -> Option<f64> {
    let n = t.len();
    if n < 2 || m.len() != n {
        return None;
    }
    let mt = t.iter().sum::<f64>() / n as f64;
    let mm = m.iter().sum::<f64>() / n as f64;
    let stt: f64 = t.iter().map(|x| (x - mt).powi(2)).sum();
    let stm: f64 = t.iter().zip(m).map(|(x, y)| (x - mt) * (y - mm)).sum();
    (stt > 0.0).then(|| stm / stt)
}

/// Steady discharge rate: regression of discharged mass over the middle half
/// of the discharge window. The window opens at the first record with
/// discharged mass and closes at the first record that reaches the final
/// discharged mass.
pub fn steady_rate(t: &[f64], discharged: &[f64]) -> Option<f64> {
    let first = discharged.iter().position(|&m| m > 0.0)?;
    let fin = *discharged.last()?;
    let last = discharged.iter().position(|&m| m >= fin)?;
    let (t0, t1) = (t[first], t[last]);
    let lo = t0 + 0.25 * (t1 - t0);
    let hi = t0 + 0.75 * (t1 - t0);
    let (tw, mw): (Vec<f64>, Vec<f64>) = t.iter().zip(discharged).filter(|(x, _)| **x >= lo && **x <= hi).map(|(x, y)| (*x, *y)).unzip();
    linear_rate(&tw, &mw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_three_halves() {
        let data: Vec<(f64, f64)> = [2.0, 3.0, 4.0, 5.0].iter().map(|&d0: &f64| (d0, 2.0 * (d0 - 1.0).powf(1.5))).collect();
        let fit = beverloo_fit(&data, 1.0).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-6, "{fit:?}");
        assert!((fit.offset(1.0) - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.prefactor - 2.0).abs() < 1e-5, "{fit:?}");
    }

    #[test]
    fn synthetic_with_grain_size() {
        let d = 0.25;
        let data: Vec<(f64, f64)> = [1.5, 2.0, 2.5, 3.0, 3.5].iter().map(|&d0: &f64| (d0, 0.7 * (d0 - 2.2 * d).powf(1.5))).collect();
        let fit = beverloo_fit(&data, d).unwrap();
        assert!((fit.k_c - 2.2).abs() < 1e-5, "{fit:?}");
        assert!((fit.exponent - 1.5).abs() < 1e-6);
    }

    #[test]
    fn constant_rate_gives_zero_exponent() {
        let data = [(2.0, 3.0), (3.0, 3.0), (4.0, 3.0), (5.0, 3.0)];
        let fit = beverloo_fit(&data, 1.0).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(beverloo_fit(&[(2.0, 1.0), (3.0, 1.0), (4.0, 1.0)], 1.0), Err(FitError::InsufficientData(_))));
        assert!(matches!(beverloo_fit(&[(2.0, 1.0), (3.0, 0.0), (4.0, 1.0), (5.0, 1.0)], 1.0), Err(FitError::InsufficientData(_))));
        assert!(matches!(beverloo_fit(&[(-1.0, 1.0), (3.0, 2.0), (4.0, 3.0), (5.0, 4.0)], 1.0), Err(FitError::FitDegenerate)));
    }

    #[test]
    fn steady_rate_of_linear_ramp() {
        let t: Vec<f64> = (0..101).map(|k| k as f64 * 0.01).collect();
        let m: Vec<f64> = t.iter().map(|&x| if x < 0.2 { 0.0 } else { (3.0 * (x - 0.2)).min(1.5) }).collect();
        let q = steady_rate(&t, &m).unwrap();
        assert!((q - 3.0).abs() < 1e-9, "q = {q}");
    }
}
