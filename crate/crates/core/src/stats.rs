//! Welch's t-test, Bonferroni correction, and Pearson correlation.
//!
//! The Student-t tail is evaluated through the regularized incomplete beta
//! function, `p = I_x(df/2, 1/2)` with `x = df / (df + t²)`, using a modified
//! Lentz continued fraction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative convergence tolerance of the continued fraction.
pub const CF_TOLERANCE: f64 = 1e-12;
pub const CF_MAX_ITERATIONS: usize = 300;
/// Floor that keeps Lentz denominators away from zero.
pub const CF_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 observations, got {0}")]
    InsufficientSample(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("continued fraction did not converge for x={x}, a={a}, b={b}")]
    NoConvergence { x: f64, a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (n − 1) variance.
    pub variance: f64,
}

fn is_constant(sample: &[f64]) -> bool {
    sample.iter().all(|&v| v == sample[0])
}

/// Mean and unbiased variance by two passes, with the compensated second pass.
pub fn summarize(sample: &[f64]) -> Result<SampleSummary, StatsError> {
    let n = sample.len();
    if n < 2 {
        return Err(StatsError::InsufficientSample(n));
    }
    if is_constant(sample) {
        // Summation rounding would otherwise leave a tiny spurious variance.
        return Ok(SampleSummary { n, mean: sample[0], variance: 0.0 });
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let (ss, comp) = sample.iter().fold((0.0, 0.0), |(ss, c), &x| {
        let d = x - mean;
        (ss + d * d, c + d)
    });
    let variance = ((ss - comp * comp / nf) / (nf - 1.0)).max(0.0);
    Ok(SampleSummary { n, mean, variance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchStatistic {
    pub t: f64,
    pub df: f64,
    /// Both variances are zero and the means differ.
    pub infinite_t: bool,
}

/// Welch's t statistic and Welch–Satterthwaite degrees of freedom.
///
/// When both variances are zero the statistic is undefined; by convention
/// equal means give `t = 0` and unequal means give `t = ±∞`, both with
/// `df = n_a + n_b − 2`.
pub fn welch_t(a: &SampleSummary, b: &SampleSummary) -> Result<WelchStatistic, StatsError> {
    if a.n < 2 || b.n < 2 {
        return Err(StatsError::InsufficientSample(a.n.min(b.n)));
    }
    let (na, nb) = (a.n as f64, b.n as f64);
    let diff = a.mean - b.mean;
    let (qa, qb) = (a.variance / na, b.variance / nb);
    let se2 = qa + qb;
    if se2 == 0.0 {
        let df = na + nb - 2.0;
        return Ok(if diff == 0.0 {
            WelchStatistic { t: 0.0, df, infinite_t: false }
        } else {
            WelchStatistic {
                t: diff.signum() * f64::INFINITY,
                df,
                infinite_t: true,
            }
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    Ok(WelchStatistic { t, df, infinite_t: false })
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, 9 terms).
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
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64, StatsError> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let floor = |v: f64| if v.abs() < CF_FLOOR { CF_FLOOR } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / floor(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITERATIONS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / floor(1.0 + aa * d);
        c = floor(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / floor(1.0 + aa * d);
        c = floor(1.0 + aa / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_TOLERANCE {
            return Ok(h);
        }
    }
    Err(StatsError::NoConvergence { x, a, b })
}

/// Regularized incomplete beta `I_x(a, b)`, taking `y = 1 − x` separately so
/// callers can supply it without cancellation.
pub fn incomplete_beta_split(x: f64, y: f64, a: f64, b: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&x) || !(a > 0.0 && b > 0.0) {
        return Err(StatsError::Domain(format!("I_x(a,b) with x={x}, a={a}, b={b}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * y.ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(y, b, a)? / b)
    }
}

pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64, StatsError> {
    incomplete_beta_split(x, 1.0 - x, a, b)
}

/// Two-tailed Student-t p-value.
pub fn p_two_tailed(t: f64, df: f64) -> Result<f64, StatsError> {
    if df.is_nan() || df <= 0.0 || df.is_infinite() {
        return Err(StatsError::Domain(format!("degrees of freedom must be positive and finite, got {df}")));
    }
    if t.is_nan() {
        return Err(StatsError::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let t2 = t * t;
    let denom = df + t2;
    let p = incomplete_beta_split(df / denom, t2 / denom, df / 2.0, 0.5)?;
    Ok(p.clamp(0.0, 1.0))
}

/// Per-comparison significance level after Bonferroni correction.
pub fn bonferroni(alpha: f64, m: usize) -> Result<f64, StatsError> {
    if m == 0 {
        return Err(StatsError::Domain("number of comparisons must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(alpha / m as f64)
}

/// A completed Welch test for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub feature_id: String,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub significant: bool,
    pub alpha_used: f64,
    /// Paired documents that entered both samples.
    pub n: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub infinite_t: bool,
}

/// Welch test of `a` against `b`, judged at `alpha_used`.
pub fn welch_test(feature_id: &str, a: &[f64], b: &[f64], alpha_used: f64) -> Result<TestResult, StatsError> {
    let sa = summarize(a)?;
    let sb = summarize(b)?;
    let stat = welch_t(&sa, &sb)?;
    let p = if stat.infinite_t { 0.0 } else { p_two_tailed(stat.t, stat.df)? };
    Ok(TestResult {
        feature_id: feature_id.to_string(),
        t: stat.t,
        df: stat.df,
        p,
        significant: p < alpha_used,
        alpha_used,
        n: a.len().min(b.len()),
        infinite_t: stat.infinite_t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub feature_id: String,
    pub r: f64,
    pub n: usize,
}

/// Pearson product-moment correlation, clamped to [−1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::Domain(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(StatsError::InsufficientSample(n));
    }
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::UndefinedCorrelation("constant sample".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::UndefinedCorrelation("constant sample".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    /// Independent tail evaluation via statrs.
    fn oracle_p(t: f64, df: f64) -> f64 {
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        2.0 * dist.cdf(-t.abs())
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.variance), (2.0, 1.0));
        assert_eq!(summarize(&[5.0; 4]).unwrap().variance, 0.0);
        assert_eq!(summarize(&[1.0]), Err(StatsError::InsufficientSample(1)));
    }

    #[test]
    fn summary_is_stable_for_large_offsets() {
        let s = summarize(&[1e9 + 1.0, 1e9 + 2.0, 1e9 + 3.0]).unwrap();
        assert!((s.variance - 1.0).abs() < 1e-6);
    }

    #[test]
    fn welch_examples() {
        let a = summarize(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = summarize(&[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = welch_t(&a, &b).unwrap();
        assert!(close(w.t, -1.0, 1e-12));
        assert!(close(w.df, 8.0, 1e-12));
        assert_eq!(welch_t(&a, &a).unwrap().t, 0.0);
        let c = SampleSummary { n: 7, mean: 0.3, variance: 2.0 };
        let d = SampleSummary { n: 7, mean: 1.3, variance: 2.0 };
        assert!(close(welch_t(&c, &d).unwrap().df, 12.0, 1e-12));
    }

    #[test]
    fn welch_degenerate_variances() {
        let a = summarize(&[2.0, 2.0, 2.0]).unwrap();
        let b = summarize(&[2.0, 2.0]).unwrap();
        let w = welch_t(&a, &b).unwrap();
        assert_eq!((w.t, w.df, w.infinite_t), (0.0, 3.0, false));
        let c = summarize(&[3.0, 3.0]).unwrap();
        let w = welch_t(&a, &c).unwrap();
        assert!(w.infinite_t && w.t == f64::NEG_INFINITY);
        let r = welch_test("f", &[2.0, 2.0, 2.0], &[3.0, 3.0], 0.05).unwrap();
        assert_eq!(r.p, 0.0);
        assert!(r.significant);
    }

    #[test]
    fn p_value_examples() {
        assert_eq!(p_two_tailed(0.0, 5.0).unwrap(), 1.0);
        assert!((p_two_tailed(-1.0, 8.0).unwrap() - 0.346_593_507_087_334_16).abs() < 1e-12);
        assert!(p_two_tailed(1.0, 0.0).is_err());
        assert!(p_two_tailed(1.0, -3.0).is_err());
        assert_eq!(p_two_tailed(f64::INFINITY, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn incomplete_beta_special_cases() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a.
        for x in [0.1, 0.5, 0.9] {
            assert!((regularized_incomplete_beta(x, 1.0, 1.0).unwrap() - x).abs() < 1e-14);
            assert!((regularized_incomplete_beta(x, 3.0, 1.0).unwrap() - x.powi(3)).abs() < 1e-14);
        }
        assert!(regularized_incomplete_beta(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn bonferroni_examples() {
        assert!((bonferroni(0.05, 3).unwrap() - 0.016_666_666_666_666_666).abs() < 1e-15);
        assert_eq!(bonferroni(0.05, 1).unwrap(), 0.05);
        assert_eq!(bonferroni(0.01, 4).unwrap(), 0.0025);
        assert!(bonferroni(0.05, 0).is_err());
        assert!(bonferroni(1.5, 2).is_err());
    }

    #[test]
    fn pearson_examples() {
        assert!(close(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0, 1e-15));
        assert!(close(pearson(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap(), -1.0, 1e-15));
        assert!(close(pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8, 1e-12));
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(StatsError::UndefinedCorrelation(_))));
        // 3.1291 repeated does not average back to exactly 3.1291.
        let c = vec![3.1291; 30];
        assert!(matches!(pearson(&c, &c), Err(StatsError::UndefinedCorrelation(_))));
        assert_eq!(summarize(&c).unwrap().variance, 0.0);
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(StatsError::Domain(_))));
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 3..40)
    }

    proptest! {
        #[test]
        fn p_symmetric_and_matches_statrs(t in -30.0f64..30.0, df in 0.5f64..500.0) {
            let p = p_two_tailed(t, df).unwrap();
            prop_assert_eq!(p, p_two_tailed(-t, df).unwrap());
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((p - oracle_p(t, df)).abs() < 1e-9, "p={} oracle={}", p, oracle_p(t, df));
        }

        #[test]
        fn p_monotone_in_abs_t(t in 0.0f64..20.0, dt in 0.001f64..5.0, df in 1.0f64..300.0) {
            prop_assert!(p_two_tailed(t + dt, df).unwrap() <= p_two_tailed(t, df).unwrap());
        }

        #[test]
        fn welch_antisymmetric(a in sample(), b in sample()) {
            let (sa, sb) = (summarize(&a).unwrap(), summarize(&b).unwrap());
            prop_assume!(sa.variance > 0.0 || sb.variance > 0.0);
            let ab = welch_t(&sa, &sb).unwrap();
            let ba = welch_t(&sb, &sa).unwrap();
            prop_assert_eq!(ab.t, -ba.t);
            prop_assert_eq!(ab.df, ba.df);
        }

        #[test]
        fn welch_scale_shift_invariant(a in sample(), b in sample(), c in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0], d in -1e3f64..1e3) {
            let (sa, sb) = (summarize(&a).unwrap(), summarize(&b).unwrap());
            prop_assume!(sa.variance > 1e-6 && sb.variance > 1e-6);
            let w = welch_t(&sa, &sb).unwrap();
            let map = |v: &[f64]| v.iter().map(|x| c * x + d).collect::<Vec<_>>();
            let w2 = welch_t(&summarize(&map(&a)).unwrap(), &summarize(&map(&b)).unwrap()).unwrap();
            prop_assert!(close(w.t.abs(), w2.t.abs(), 1e-9));
            prop_assert!(close(w.df, w2.df, 1e-9));
        }

        #[test]
        fn pearson_affine_behaviour(x in sample(), noise in sample(), c in 0.1f64..20.0, d in -50.0f64..50.0) {
            let n = x.len().min(noise.len());
            let x = &x[..n];
            let y: Vec<f64> = x.iter().zip(&noise[..n]).map(|(a, e)| 0.5 * a + e).collect();
            let Ok(r) = pearson(x, &y) else { return Ok(()); };
            let scaled: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            let flipped: Vec<f64> = y.iter().map(|v| -c * v + d).collect();
            prop_assert!(close(pearson(x, &scaled).unwrap(), r, 1e-9));
            prop_assert!(close(pearson(x, &flipped).unwrap(), -r, 1e-9));
            prop_assert!(r.abs() <= 1.0);
        }
    }
}
