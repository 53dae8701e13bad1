use super::{EigenResult, FemError};
use serde::{Deserialize, Serialize};

/// Fit of `lambda_h = lambda_inf + C h^p` through the three finest levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub lambda_inf: f64,
    pub observed_order: f64,
    pub error_estimate: f64,
    /// the last three values are not strictly monotone
    pub non_monotone: bool,
    /// `observed_order` outside `(0.5, 2.5]`
    pub order_flagged: bool,
}

/// Solves `(h1^p - h2^p) / (h2^p - h3^p) = q` for `p` by bisection on `[0.01, 10]`.
fn order_for(h: [f64; 3], q: f64) -> Option<f64> {
    let f = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p)) - q;
    let (mut lo, mut hi) = (0.01, 10.0);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Extrapolated limit of a nested refinement sequence, ordered coarse to fine.
pub fn extrapolate(results: &[EigenResult]) -> Result<Extrapolation, FemError> {
    let pairs: Vec<(f64, f64)> = results.iter().map(|r| (r.h, r.lambda)).collect();
    extrapolate_pairs(&pairs)
}

/// Extrapolated limit from `(h, lambda)` pairs ordered coarse to fine.
pub fn extrapolate_pairs(levels: &[(f64, f64)]) -> Result<Extrapolation, FemError> {
    if levels.len() < 3 {
        return Err(FemError::TooFewLevels(levels.len()));
    }
    let w = &levels[levels.len() - 3..];
    let (h, l) = ([w[0].0, w[1].0, w[2].0], [w[0].1, w[1].1, w[2].1]);
    let (d1, d2) = (l[0] - l[1], l[1] - l[2]);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return Ok(Extrapolation {
            lambda_inf: l[2],
            observed_order: 0.0,
            error_estimate: d1.abs().max(d2.abs()),
            non_monotone: true,
            order_flagged: true,
        });
    }
    let q = d1 / d2;
    let ratio = h[1] / h[2];
    let halving = ((h[0] / h[1]) - ratio).abs() <= 1e-12 * ratio;
    let p = if halving { Some(q.ln() / ratio.ln()) } else { order_for(h, q) };
    let Some(p) = p.filter(|p| p.is_finite() && *p > 0.0) else {
        return Ok(Extrapolation {
            lambda_inf: l[2],
            observed_order: 0.0,
            error_estimate: d1.abs().max(d2.abs()),
            non_monotone: false,
            order_flagged: true,
        });
    };
    let lambda_inf = l[2] - d2 * h[2].powf(p) / (h[1].powf(p) - h[2].powf(p));
    let order_flagged = !(p > 0.5 && p <= 2.5);
    let mut error_estimate = (l[2] - lambda_inf).abs();
    if order_flagged {
        error_estimate = error_estimate.max(d2.abs());
    }
    Ok(Extrapolation { lambda_inf, observed_order: p, error_estimate, non_monotone: false, order_flagged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_quadratic() {
        let lv: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&h| (h, 2.0 + h * h)).collect();
        let e = extrapolate_pairs(&lv).unwrap();
        assert!((e.lambda_inf - 2.0).abs() < 1e-12);
        assert!((e.observed_order - 2.0).abs() < 1e-9);
        assert!(!e.order_flagged && !e.non_monotone);
    }

    #[test]
    fn general_ratios_use_bisection() {
        let lv: Vec<(f64, f64)> = [0.3, 0.2, 0.1].iter().map(|&h: &f64| (h, 1.0 + 3.0 * h.powf(1.5))).collect();
        let e = extrapolate_pairs(&lv).unwrap();
        assert!((e.observed_order - 1.5).abs() < 1e-8);
        assert!((e.lambda_inf - 1.0).abs() < 1e-8);
    }

    #[test]
    fn non_monotone_flagged() {
        let e = extrapolate_pairs(&[(0.4, 3.0), (0.2, 2.5), (0.1, 2.6)]).unwrap();
        assert!(e.non_monotone);
        assert_eq!(e.lambda_inf, 2.6);
        assert!(e.error_estimate >= 0.5);
    }

    #[test]
    fn too_few() {
        assert_eq!(extrapolate_pairs(&[(0.1, 1.0)]), Err(FemError::TooFewLevels(1)));
    }
}
