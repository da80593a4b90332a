//! Kolmogorov–Smirnov statistics and sample moments.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

const KOLMOGOROV_TERMS: usize = 100;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// `P(K > lambda)` for the limiting Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.0 {
        // Theta-function form; the alternating series converges slowly here.
        let l2 = lambda * lambda;
        let s: f64 = (1..=KOLMOGOROV_TERMS)
            .map(|j| {
                let k = (2 * j - 1) as f64;
                (-k * k * std::f64::consts::PI * std::f64::consts::PI / (8.0 * l2)).exp()
            })
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        2.0 * (1..=KOLMOGOROV_TERMS)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp()
            })
            .sum::<f64>()
    };
    p.clamp(0.0, 1.0)
}

/// Asymptotic p-value of a one-sample KS distance `d` at sample size `n`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Target distribution for a KS comparison.
pub trait TargetCdf {
    /// `F(x) = P(X <= x)`.
    fn cdf_at(&self, x: f64) -> f64;
    /// `F(x-) = P(X < x)`.
    fn cdf_left_at(&self, x: f64) -> f64;
    /// Locations of point masses.
    fn atom_locations(&self) -> Vec<f64>;
}

/// Sup of `|F_n - F|` over the continuity points of `F`.
///
/// Both step functions are monotone between consecutive jump points of
/// either one, so the supremum is a limit at some jump point `p` from the
/// left or the right: `|F_n(p-) - F(p-)|` or `|F_n(p) - F(p)|`.
pub fn ks_distance<T: TargetCdf + ?Sized>(sample: &[f64], target: &T) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut points: Vec<f64> = xs.clone();
    points.extend(target.atom_locations());
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup();
    let mut d: f64 = 0.0;
    for p in points {
        let below = xs.partition_point(|&x| x < p) as f64 / n;
        let upto = xs.partition_point(|&x| x <= p) as f64 / n;
        d = d.max((below - target.cdf_left_at(p)).abs());
        d = d.max((upto - target.cdf_at(p)).abs());
    }
    d
}

/// A continuous target given by its CDF.
pub struct ContinuousTarget<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> TargetCdf for ContinuousTarget<F> {
    fn cdf_at(&self, x: f64) -> f64 {
        (self.0)(x)
    }
    fn cdf_left_at(&self, x: f64) -> f64 {
        (self.0)(x)
    }
    fn atom_locations(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// KS comparison against a target CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsResult {
    pub n: usize,
    pub ks_distance: f64,
    pub ks_pvalue: f64,
}

pub fn ks_test<T: TargetCdf + ?Sized>(sample: &[f64], target: &T) -> KsResult {
    let d = ks_distance(sample, target);
    KsResult {
        n: sample.len(),
        ks_distance: d,
        ks_pvalue: ks_pvalue(d, sample.len()),
    }
}
