//! Distribution tails and small descriptive helpers (always `f64`).

use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};

/// Upper-tail probability of F(df1, df2) at `f`.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if !f.is_finite() {
        return if f > 0.0 { 0.0 } else { 1.0 };
    }
    if f <= 0.0 {
        return 1.0;
    }
    let dist = FisherSnedecor::new(df1, df2).expect("positive degrees of freedom");
    dist.sf(f).clamp(0.0, 1.0)
}

/// Two-sided Student-t p-value.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    percentile_sorted(&v, 50.0)
}

/// Linear-interpolation percentile (`q` in 0..=100) of an ascending slice.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = (q / 100.0).clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let w = pos - lo as f64;
            sorted[lo] + w * (sorted[hi] - sorted[lo])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_matches_linear_rule() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile_sorted(&v, 50.0), 3.0);
        assert!((percentile_sorted(&v, 2.5) - 1.1).abs() < 1e-12);
        assert!((percentile_sorted(&v, 97.5) - 4.9).abs() < 1e-12);
    }

    #[test]
    fn tails() {
        assert!((t_two_sided(1.959963984540054, 1e9) - 0.05).abs() < 1e-6);
        assert_eq!(f_sf(0.0, 2.0, 10.0), 1.0);
        // F(1, df) upper tail equals the two-sided t tail of sqrt(F)
        let f = 4.2;
        assert!((f_sf(f, 1.0, 30.0) - t_two_sided(f64::sqrt(f), 30.0)).abs() < 1e-10);
    }
}
