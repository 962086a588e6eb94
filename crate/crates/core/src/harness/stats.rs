//! Unpaired two-sample t-test with a numerically integrated t distribution.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
}

/// Student t density with `df` degrees of freedom.
pub fn t_density(x: f64, df: f64) -> f64 {
    let log_norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (log_norm - (df + 1.0) / 2.0 * (x * x / df).ln_1p()).exp()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to roughly `rel_tol`
/// relative accuracy.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    let tol = (rel_tol * whole.abs()).max(f64::MIN_POSITIVE);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `P(T > x)` for `x >= 0`, integrating the density over `[x, inf)` after the
/// substitution `u = x + s / (1 - s)`.
fn upper_tail(x: f64, df: f64) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            0.0
        } else {
            let d = 1.0 - s;
            t_density(x + s / d, df) / (d * d)
        }
    };
    // split the unit interval so the peak near s = 0 is resolved
    let cuts = [0.0, 0.05, 0.2, 0.5, 0.8, 0.95, 1.0];
    cuts.windows(2).map(|w| integrate(g, w[0], w[1], 1e-12)).sum()
}

/// Cumulative distribution function of Student's t.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tail = upper_tail(t.abs(), df).clamp(0.0, 0.5);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Pooled-variance unpaired t-test of `a` against `b`.
pub fn ttest_unpaired(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidParameter(
            "each sample needs at least two values".into(),
        ));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    let df = n1 + n2 - 2.0;
    let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
    if pooled <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let t = (m1 - m2) / (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
    let p = (2.0 * upper_tail(t.abs(), df)).clamp(0.0, 1.0);
    Ok(TTest { t, df, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn known_quantile() {
        // two-tailed 5% critical value at df = 4
        let p = 2.0 * (1.0 - t_cdf(2.776445105, 4.0));
        assert!((p - 0.05).abs() < 1e-8, "{p}");
    }

    #[test]
    fn matches_statrs() {
        for df in [2.0, 4.0, 8.0, 30.0] {
            let dist = StudentsT::new(0.0, 1.0, df).unwrap();
            for t in [-7.0, -2.5, -0.3, 0.0, 0.4, 1.0, 3.2423, 12.0] {
                let ours = t_cdf(t, df);
                assert!((ours - dist.cdf(t)).abs() < 1e-9, "df={df} t={t}");
            }
        }
    }

    #[test]
    fn identical_samples() {
        let r = ttest_unpaired(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p - 1.0).abs() < 1e-9);
        assert_eq!(r.df, 4.0);
    }

    #[test]
    fn zero_variance_and_short_input() {
        assert!(matches!(
            ttest_unpaired(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]),
            Err(Error::ZeroVariance)
        ));
        assert!(ttest_unpaired(&[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn printed_statistic_p_value() {
        // the two-tailed value for t = 3.2423 at df = 4
        let p = 2.0 * (1.0 - t_cdf(3.2423, 4.0));
        assert!((p - 0.0318).abs() < 5e-4, "{p}");
    }

    #[test]
    fn tiny_tail_keeps_relative_precision() {
        let dist = StudentsT::new(0.0, 1.0, 8.0).unwrap();
        let ours = upper_tail(40.0, 8.0);
        let reference = dist.sf(40.0);
        assert!(((ours - reference) / reference).abs() < 1e-6, "{ours} {reference}");
    }
}
