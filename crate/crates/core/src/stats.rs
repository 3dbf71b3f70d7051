//! Student-t machinery: the t distribution via the regularized incomplete
//! beta function, a one-sample one-tailed t test and Welch's two-sample
//! one-tailed t test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum iteration budget for the continued fraction.
const CF_MIN_ITER: usize = 300;
/// Relative convergence threshold for continued-fraction steps.
const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;

/// Lanczos approximation (g = 7, 9 terms), accurate to ~1e-15 relative.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for I_x(a, b), modified Lentz.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let max_iter = CF_MIN_ITER.max((20.0 * a.max(b).sqrt()) as usize);
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`, taking `x` and `y = 1 - x`.
fn inc_beta_xy(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(x, a, b) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(y, b, a) / b).clamp(0.0, 1.0)
    }
}

/// Regularized incomplete beta function `I_x(a, b)` for `x ∈ [0, 1]`,
/// `a, b > 0`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::param(format!(
            "incomplete beta needs x in [0,1] and a, b > 0 (got x={x}, a={a}, b={b})"
        )));
    }
    Ok(inc_beta_xy(x, 1.0 - x, a, b))
}

fn check_df(df: f64) -> Result<()> {
    if df > 0.0 && !df.is_nan() {
        Ok(())
    } else {
        Err(Error::param(format!("degrees of freedom must be positive, got {df}")))
    }
}

/// `P(T > |t|)` for `T ~ t(df)`.
fn upper_tail_abs(t: f64, df: f64) -> f64 {
    let t2 = t * t;
    let denom = df + t2;
    0.5 * inc_beta_xy(df / denom, t2 / denom, 0.5 * df, 0.5)
}

/// Cumulative distribution function of Student's t.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(Error::param("t statistic is NaN"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let tail = upper_tail_abs(t, df);
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

/// Survival function `1 - t_cdf(t, df)`, computed without cancellation in
/// the upper tail.
pub fn t_sf(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(Error::param("t statistic is NaN"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let tail = upper_tail_abs(t, df);
    Ok(if t > 0.0 { tail } else { 1.0 - tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// One-tailed p-value for the "greater than" alternative.
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

impl TTestResult {
    fn from_t(t: f64, df: f64, alpha: f64) -> Result<Self> {
        let p = t_sf(t, df)?;
        Ok(TTestResult {
            t_statistic: t,
            degrees_of_freedom: df,
            p_value: p,
            alpha,
            reject: p < alpha,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean and `n - 1` denominator variance. The variance is exactly zero
/// when all observations are identical.
fn mean_and_variance(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::SampleTooSmall(xs.len()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("sample contains a non-finite value"));
    }
    let m = mean(xs);
    if xs.iter().all(|&x| x == xs[0]) {
        return Ok((m, 0.0));
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    Ok((m, var))
}

/// One-sample t test of `H0: E[X] = mu0` against `H1: E[X] > mu0`.
pub fn one_sample_greater(xs: &[f64], mu0: f64, alpha: f64) -> Result<TTestResult> {
    check_alpha(alpha)?;
    let (m, var) = mean_and_variance(xs)?;
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let n = xs.len() as f64;
    let t = (m - mu0) / (var / n).sqrt();
    TTestResult::from_t(t, n - 1.0, alpha)
}

/// Welch's unequal-variance t test of `H0: E[X] = E[Y]` against
/// `H1: E[X] > E[Y]`, with Welch–Satterthwaite degrees of freedom.
pub fn welch_greater(xs: &[f64], ys: &[f64], alpha: f64) -> Result<TTestResult> {
    check_alpha(alpha)?;
    let (mx, vx) = mean_and_variance(xs)?;
    let (my, vy) = mean_and_variance(ys)?;
    if vx == 0.0 && vy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (sx, sy) = (vx / nx, vy / ny);
    let se2 = sx + sy;
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    TTestResult::from_t(t, df, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        // ln(10!) = ln 3628800
        assert!((ln_gamma(11.0) - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b.
        for &x in &[0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            assert!((regularized_incomplete_beta(x, 1.0, 1.0).unwrap() - x).abs() < 1e-14);
            assert!((regularized_incomplete_beta(x, 3.0, 1.0).unwrap() - x.powi(3)).abs() < 1e-13);
            let expect = 1.0 - (1.0 - x).powf(2.5);
            assert!((regularized_incomplete_beta(x, 1.0, 2.5).unwrap() - expect).abs() < 1e-13);
        }
        assert!(regularized_incomplete_beta(1.5, 1.0, 1.0).is_err());
        assert!(regularized_incomplete_beta(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn t_cdf_special_points() {
        assert_eq!(t_cdf(0.0, 3.0).unwrap(), 0.5);
        assert_eq!(t_cdf(0.0, 1e6).unwrap(), 0.5);
        assert!((t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-12);
        let two = 2f64.sqrt();
        let expect = 0.5 + two / (2.0 * (2.0 + 2.0f64).sqrt());
        assert!((expect - 0.853_553).abs() < 1e-6);
        assert!((t_cdf(two, 2.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn t_cdf_saturates_and_validates() {
        assert_eq!(t_cdf(f64::INFINITY, 4.0).unwrap(), 1.0);
        assert_eq!(t_cdf(f64::NEG_INFINITY, 4.0).unwrap(), 0.0);
        assert!(t_cdf(f64::NAN, 4.0).is_err());
        assert!(t_cdf(1.0, 0.0).is_err());
        assert!(t_cdf(1.0, -2.0).is_err());
    }

    #[test]
    fn one_sample_worked_example() {
        let r = one_sample_greater(&[0.6, 0.7, 0.8], 0.5, 0.05).unwrap();
        let t = 0.2 / (0.1 / 3f64.sqrt());
        assert!((r.t_statistic - t).abs() < 1e-9);
        assert!((r.t_statistic - 3.4641).abs() < 1e-4);
        assert_eq!(r.degrees_of_freedom, 2.0);
        let p = 1.0 - (0.5 + t / (2.0 * (2.0 + t * t).sqrt()));
        assert!((r.p_value - p).abs() < 1e-12);
        assert!((r.p_value - 0.0371).abs() < 1e-4);
        assert!(r.reject);
    }

    #[test]
    fn one_sample_degenerate_inputs() {
        let r = one_sample_greater(&[0.4, 0.5, 0.6], 0.5, 0.05).unwrap();
        assert!(r.t_statistic.abs() < 1e-12);
        assert!((r.p_value - 0.5).abs() < 1e-12);
        assert!(!r.reject);
        assert!(matches!(
            one_sample_greater(&[0.1, 0.1, 0.1], 0.0, 0.05),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            one_sample_greater(&[0.1], 0.0, 0.05),
            Err(Error::SampleTooSmall(1))
        ));
        assert!(one_sample_greater(&[0.1, 0.2], 0.0, 1.5).is_err());
    }

    #[test]
    fn welch_identical_and_shifted() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let r = welch_greater(&xs, &xs, 0.05).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert!((r.p_value - 0.5).abs() < 1e-12);
        assert!(!r.reject);

        let ys: Vec<f64> = xs.iter().map(|x| x + 10.0).collect();
        let r = welch_greater(&xs, &ys, 0.05).unwrap();
        assert!(r.t_statistic < 0.0);
        assert!(r.p_value > 0.5);
        assert!(!r.reject);
    }

    #[test]
    fn welch_worked_example() {
        let xs = [0.9, 1.1, 1.0, 1.2];
        let ys = [0.1, 0.2, 0.15, 0.05];
        let r = welch_greater(&xs, &ys, 0.05).unwrap();
        // Hand computation.
        let (vx, vy): (f64, f64) = (0.05 / 3.0, 0.0125 / 3.0);
        let se2 = vx / 4.0 + vy / 4.0;
        let t = 0.925 / se2.sqrt();
        let df = se2 * se2 / ((vx / 4.0f64).powi(2) / 3.0 + (vy / 4.0f64).powi(2) / 3.0);
        assert!((r.t_statistic - t).abs() < 1e-9);
        assert!((r.t_statistic - 12.82).abs() < 0.01);
        assert!((r.degrees_of_freedom - df).abs() < 1e-9);
        assert!((r.degrees_of_freedom - 4.4118).abs() < 1e-4);
        // Closed-form df = 4 and df = 5 tails bracket the t(4.41) tail.
        let a4 = t / (4.0 + t * t).sqrt();
        let tail4 = 0.5 - 0.75 * a4 * (1.0 - a4 * a4 / 3.0);
        let u = t / 5f64.sqrt();
        let tail5 = 0.5 - (u / (1.0 + u * u) * (1.0 + 2.0 / (3.0 * (1.0 + u * u))) + u.atan()) / PI;
        assert!(tail5 < r.p_value && r.p_value < tail4, "{tail5} {} {tail4}", r.p_value);
        assert!(r.p_value < 1e-3);
        assert!(r.reject);
    }

    #[test]
    fn welch_degenerate() {
        assert!(matches!(
            welch_greater(&[1.0, 1.0], &[2.0, 2.0], 0.05),
            Err(Error::ZeroVariance)
        ));
        // One constant side is fine.
        assert!(welch_greater(&[1.0, 1.0], &[2.0, 2.5], 0.05).is_ok());
        assert!(matches!(
            welch_greater(&[1.0], &[2.0, 2.5], 0.05),
            Err(Error::SampleTooSmall(1))
        ));
    }

    proptest! {
        #[test]
        fn t_cdf_symmetric(t in -50.0f64..50.0, df in 0.5f64..1e5) {
            let a = t_cdf(t, df).unwrap();
            let b = t_cdf(-t, df).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-10);
        }

        #[test]
        fn t_cdf_monotone(t in -30.0f64..30.0, dt in 0.0f64..5.0, df in 0.5f64..1e4) {
            prop_assert!(t_cdf(t, df).unwrap() <= t_cdf(t + dt, df).unwrap() + 1e-15);
        }

        #[test]
        fn sf_complements_cdf(t in -20.0f64..20.0, df in 0.5f64..1e3) {
            prop_assert!((t_sf(t, df).unwrap() + t_cdf(t, df).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn one_sample_affine_invariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 3..40),
            mu0 in -5.0f64..5.0,
            a in 0.01f64..100.0,
            b in -100.0f64..100.0,
        ) {
            prop_assume!(xs.iter().any(|&x| x != xs[0]));
            let base = one_sample_greater(&xs, mu0, 0.05).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let moved = one_sample_greater(&ys, a * mu0 + b, 0.05).unwrap();
            prop_assert!((base.t_statistic - moved.t_statistic).abs() < 1e-6 * (1.0 + base.t_statistic.abs()));
            prop_assert_eq!(base.degrees_of_freedom, moved.degrees_of_freedom);
            prop_assert!((base.p_value - moved.p_value).abs() < 1e-6);
        }

        #[test]
        fn welch_antisymmetric(
            xs in proptest::collection::vec(-10.0f64..10.0, 2..30),
            ys in proptest::collection::vec(-10.0f64..10.0, 2..30),
        ) {
            prop_assume!(xs.iter().any(|&x| x != xs[0]) || ys.iter().any(|&y| y != ys[0]));
            let a = welch_greater(&xs, &ys, 0.05).unwrap();
            let b = welch_greater(&ys, &xs, 0.05).unwrap();
            prop_assert!((a.t_statistic + b.t_statistic).abs() < 1e-9 * (1.0 + a.t_statistic.abs()));
            prop_assert!((a.degrees_of_freedom - b.degrees_of_freedom).abs() < 1e-9 * a.degrees_of_freedom);
            prop_assert!((a.p_value + b.p_value - 1.0).abs() < 1e-9);
        }

        #[test]
        fn reject_iff_p_below_alpha(
            xs in proptest::collection::vec(-1.0f64..3.0, 2..30),
            alpha in 0.001f64..0.5,
        ) {
            prop_assume!(xs.iter().any(|&x| x != xs[0]));
            let r = one_sample_greater(&xs, 0.0, alpha).unwrap();
            prop_assert_eq!(r.reject, r.p_value < alpha);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
    }
}
