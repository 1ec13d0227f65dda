//! Log-log power-law fitting for the scaling analyses.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct FitResult {
    /// Decay exponent b in y = prefactor · x^{-b}; positive for decaying data.
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub sample_count: usize,
    pub window: (f64, f64),
}

/// Least-squares line on (ln x, ln y), restricted to `window` when given.
pub fn fit_power_law(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult> {
    let selected: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, _)| window.map_or(true, |(lo, hi)| x >= lo && x <= hi))
        .collect();
    const MIN_POINTS: usize = 4;
    if selected.len() < MIN_POINTS || selected.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::FitDomain {
            min: MIN_POINTS,
            got: selected.iter().filter(|&&(x, y)| x > 0.0 && y > 0.0).count(),
        });
    }
    let logs: Vec<(f64, f64)> = selected.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDomain {
            min: MIN_POINTS,
            got: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, _) in &selected {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok(FitResult {
        exponent: -slope,
        prefactor: intercept.exp(),
        r_squared,
        sample_count: selected.len(),
        window: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_power_law_is_recovered() {
        let points: Vec<(f64, f64)> = (1..=8)
            .map(|i| {
                let x = 10.0_f64.powf(i as f64 / 4.0);
                (x, 7.0 * x.powf(-2.0 / 3.0))
            })
            .collect();
        let fit = fit_power_law(&points, None).unwrap();
        assert_relative_eq!(fit.exponent, 2.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(fit.prefactor, 7.0, max_relative = 1e-10);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_power_law_within_tolerance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let points: Vec<(f64, f64)> = (1..=20)
            .map(|i| {
                let x = 1.5_f64.powi(i);
                let noise = 1.0 + 0.01 * (rng.gen::<f64>() - 0.5);
                (x, x.powf(-0.5) * noise)
            })
            .collect();
        let fit = fit_power_law(&points, None).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.02);
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn window_restricts_samples() {
        let points: Vec<(f64, f64)> = (1..=30).map(|i| (i as f64, (i as f64).powf(-1.0))).collect();
        let fit = fit_power_law(&points, Some((5.0, 12.0))).unwrap();
        assert_eq!(fit.sample_count, 8);
        assert_eq!(fit.window, (5.0, 12.0));
    }

    #[test]
    fn scale_equivariance() {
        let points: Vec<(f64, f64)> = (1..=9)
            .map(|i| (2.0_f64.powi(i), 3.0 * 2.0_f64.powi(-i)))
            .collect();
        let scaled: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, 10.0 * y)).collect();
        let a = fit_power_law(&points, None).unwrap();
        let b = fit_power_law(&scaled, None).unwrap();
        assert_relative_eq!(a.exponent, b.exponent, epsilon = 1e-12);
        assert_relative_eq!(10.0 * a.prefactor, b.prefactor, max_relative = 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.5)], None).is_err());
        let with_negative = [(1.0, 1.0), (2.0, 0.5), (3.0, -0.1), (4.0, 0.2)];
        assert!(fit_power_law(&with_negative, None).is_err());
    }
}
