//! Vertex-weight distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Upper quantile at which half-line supports are truncated for quadrature.
pub const TAIL_QUANTILE: f64 = 1.0 - 1e-12;

/// A one-dimensional weight law.
///
/// `PiecewiseCustom` carries `breakpoints` `b_0 < ... < b_k` and one
/// polynomial per piece: on `[b_i, b_{i+1})` the density is
/// `sum_j pieces[i][j] * x^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightLaw {
    Bernoulli {
        p: f64,
    },
    Exponential {
        lambda: f64,
    },
    Pareto {
        a: f64,
        c: f64,
    },
    Uniform01,
    PiecewiseCustom {
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupportKind {
    HalfLineRight(f64),
    HalfLineLeft(f64),
    Interval(f64, f64),
    FullLine,
    Discrete(Vec<f64>),
}

impl SupportKind {
    /// Closed hull of the support as `(lower, upper)`, infinite where unbounded.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            SupportKind::HalfLineRight(a) => (*a, f64::INFINITY),
            SupportKind::HalfLineLeft(b) => (f64::NEG_INFINITY, *b),
            SupportKind::Interval(a, b) => (*a, *b),
            SupportKind::FullLine => (f64::NEG_INFINITY, f64::INFINITY),
            SupportKind::Discrete(atoms) => {
                let lo = atoms.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = atoms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_antiderivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (j, c)| acc * x + c / (j + 1) as f64)
        * x
}

impl WeightLaw {
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::checked(WeightLaw::Bernoulli { p })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::checked(WeightLaw::Exponential { lambda })
    }

    pub fn pareto(a: f64, c: f64) -> Result<Self> {
        Self::checked(WeightLaw::Pareto { a, c })
    }

    pub fn uniform01() -> Self {
        WeightLaw::Uniform01
    }

    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        Self::checked(WeightLaw::PiecewiseCustom {
            breakpoints,
            pieces,
        })
    }

    fn checked(law: Self) -> Result<Self> {
        law.validate()?;
        Ok(law)
    }

    /// Every parameter violation, keyed by field name.
    pub fn diagnostics(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        match self {
            WeightLaw::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    out.push((
                        "p",
                        format!("Bernoulli probability p = {p} must lie in [0, 1]"),
                    ));
                }
            }
            WeightLaw::Exponential { lambda } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    out.push((
                        "lambda",
                        format!("exponential rate lambda = {lambda} must be > 0"),
                    ));
                }
            }
            WeightLaw::Pareto { a, c } => {
                if !(*a > 0.0 && a.is_finite()) {
                    out.push(("a", format!("Pareto scale a = {a} must be > 0")));
                }
                if !(*c > 0.0 && c.is_finite()) {
                    out.push(("c", format!("Pareto shape c = {c} must be > 0")));
                }
            }
            WeightLaw::Uniform01 => {}
            WeightLaw::PiecewiseCustom {
                breakpoints,
                pieces,
            } => {
                if pieces.is_empty() || breakpoints.len() != pieces.len() + 1 {
                    out.push((
                        "breakpoints",
                        "need one more breakpoint than polynomial pieces".to_string(),
                    ));
                    return out;
                }
                if breakpoints.iter().any(|b| !b.is_finite())
                    || breakpoints.windows(2).any(|w| w[0] >= w[1])
                {
                    out.push((
                        "breakpoints",
                        "breakpoints must be finite and strictly increasing".into(),
                    ));
                    return out;
                }
                if pieces
                    .iter()
                    .any(|p| p.is_empty() || p.iter().any(|c| !c.is_finite()))
                {
                    out.push((
                        "pieces",
                        "every piece needs finite polynomial coefficients".into(),
                    ));
                    return out;
                }
                let mut mass = 0.0;
                for (i, coeffs) in pieces.iter().enumerate() {
                    let (lo, hi) = (breakpoints[i], breakpoints[i + 1]);
                    let negative = (0..=64).any(|k| {
                        let x = lo + (hi - lo) * k as f64 / 64.0;
                        poly_eval(coeffs, x) < -1e-12
                    });
                    if negative {
                        out.push(("pieces", format!("density is negative on piece {i}")));
                    }
                    mass += poly_antiderivative(coeffs, hi) - poly_antiderivative(coeffs, lo);
                }
                if (mass - 1.0).abs() > 1e-9 {
                    out.push(("pieces", format!("density integrates to {mass}, not 1")));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            None => Ok(()),
            Some((_, msg)) => Err(Error::InvalidLaw(msg)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightLaw::Bernoulli { .. } => "bernoulli",
            WeightLaw::Exponential { .. } => "exponential",
            WeightLaw::Pareto { .. } => "pareto",
            WeightLaw::Uniform01 => "uniform01",
            WeightLaw::PiecewiseCustom { .. } => "piecewise_custom",
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, WeightLaw::Bernoulli { .. })
    }

    pub fn support(&self) -> SupportKind {
        match self {
            WeightLaw::Bernoulli { p } => {
                let mut atoms = Vec::new();
                if *p < 1.0 {
                    atoms.push(0.0);
                }
                if *p > 0.0 {
                    atoms.push(1.0);
                }
                SupportKind::Discrete(atoms)
            }
            WeightLaw::Exponential { .. } => SupportKind::HalfLineRight(0.0),
            WeightLaw::Pareto { a, .. } => SupportKind::HalfLineRight(*a),
            WeightLaw::Uniform01 => SupportKind::Interval(0.0, 1.0),
            WeightLaw::PiecewiseCustom { breakpoints, .. } => {
                SupportKind::Interval(breakpoints[0], *breakpoints.last().unwrap())
            }
        }
    }

    /// Point masses `(location, mass)`; empty for continuous laws.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            WeightLaw::Bernoulli { p } => {
                let mut atoms = Vec::new();
                if *p < 1.0 {
                    atoms.push((0.0, 1.0 - p));
                }
                if *p > 0.0 {
                    atoms.push((1.0, *p));
                }
                atoms
            }
            _ => Vec::new(),
        }
    }

    /// Density with respect to Lebesgue measure (0 for discrete laws).
    pub fn density(&self, x: f64) -> f64 {
        match self {
            WeightLaw::Bernoulli { .. } => 0.0,
            WeightLaw::Exponential { lambda } => {
                if x >= 0.0 {
                    lambda * (-lambda * x).exp()
                } else {
                    0.0
                }
            }
            WeightLaw::Pareto { a, c } => {
                if x >= *a {
                    c / a * (a / x).powf(c + 1.0)
                } else {
                    0.0
                }
            }
            WeightLaw::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            WeightLaw::PiecewiseCustom {
                breakpoints,
                pieces,
            } => {
                let last = *breakpoints.last().unwrap();
                if x < breakpoints[0] || x > last {
                    return 0.0;
                }
                let i = breakpoints
                    .partition_point(|b| *b <= x)
                    .saturating_sub(1)
                    .min(pieces.len() - 1);
                poly_eval(&pieces[i], x).max(0.0)
            }
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            WeightLaw::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            WeightLaw::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            WeightLaw::Pareto { a, c } => {
                if x <= *a {
                    0.0
                } else {
                    -(c * (a / x).ln()).exp_m1()
                }
            }
            WeightLaw::Uniform01 => x.clamp(0.0, 1.0),
            WeightLaw::PiecewiseCustom {
                breakpoints,
                pieces,
            } => {
                if x <= breakpoints[0] {
                    return 0.0;
                }
                let mut acc = 0.0;
                for (i, coeffs) in pieces.iter().enumerate() {
                    let (lo, hi) = (breakpoints[i], breakpoints[i + 1]);
                    let top = x.min(hi);
                    acc += poly_antiderivative(coeffs, top) - poly_antiderivative(coeffs, lo);
                    if x <= hi {
                        break;
                    }
                }
                acc.clamp(0.0, 1.0)
            }
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            WeightLaw::Bernoulli { p } => {
                if x <= 0.0 {
                    0.0
                } else if x <= 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            _ => self.cdf(x),
        }
    }

    /// `P(X > x)`, computed without cancellation in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            WeightLaw::Exponential { lambda } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
            WeightLaw::Pareto { a, c } => {
                if x <= *a {
                    1.0
                } else {
                    (a / x).powf(*c)
                }
            }
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Probability of the interval with the given endpoints and openness.
    pub fn prob_interval(&self, lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> f64 {
        if lo > hi {
            return 0.0;
        }
        let upper = if hi_open {
            self.cdf_left(hi)
        } else {
            self.cdf(hi)
        };
        let lower = if lo_open {
            self.cdf(lo)
        } else {
            self.cdf_left(lo)
        };
        (upper - lower).max(0.0)
    }

    /// Generalized inverse of the CDF.
    ///
    /// Continuous laws require `u` in (0, 1). Bernoulli accepts [0, 1] and
    /// returns 0 for `u <= 1 - p`, else 1.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            WeightLaw::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&u) {
                    return Err(Error::ProbabilityOutOfRange(u));
                }
                Ok(if u <= 1.0 - p { 0.0 } else { 1.0 })
            }
            _ if !(u > 0.0 && u < 1.0) => Err(Error::ProbabilityOutOfRange(u)),
            WeightLaw::Exponential { lambda } => Ok(-(-u).ln_1p() / lambda),
            WeightLaw::Pareto { a, c } => Ok(a * (-(-u).ln_1p() / c).exp()),
            WeightLaw::Uniform01 => Ok(u),
            WeightLaw::PiecewiseCustom { breakpoints, .. } => {
                let mut lo = breakpoints[0];
                let mut hi = *breakpoints.last().unwrap();
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    /// Integration range for quadrature: the support hull with unbounded
    /// ends cut at the `TAIL_QUANTILE` (or its mirror).
    pub fn integration_range(&self) -> (f64, f64) {
        let (lo, hi) = self.support().bounds();
        let lo = if lo.is_finite() {
            lo
        } else {
            self.quantile(1.0 - TAIL_QUANTILE).unwrap_or(lo)
        };
        let hi = if hi.is_finite() {
            hi
        } else {
            self.quantile(TAIL_QUANTILE).unwrap_or(hi)
        };
        (lo, hi)
    }

    /// Interior points where the density is not smooth.
    pub fn density_breaks(&self) -> Vec<f64> {
        match self {
            WeightLaw::PiecewiseCustom { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            WeightLaw::Bernoulli { p } => *p,
            WeightLaw::Exponential { lambda } => 1.0 / lambda,
            WeightLaw::Pareto { a, c } => {
                if *c > 1.0 {
                    a * c / (c - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            WeightLaw::Uniform01 => 0.5,
            WeightLaw::PiecewiseCustom {
                breakpoints,
                pieces,
            } => pieces
                .iter()
                .enumerate()
                .map(|(i, coeffs)| {
                    let mut shifted = vec![0.0];
                    shifted.extend_from_slice(coeffs);
                    poly_antiderivative(&shifted, breakpoints[i + 1])
                        - poly_antiderivative(&shifted, breakpoints[i])
                })
                .sum(),
        }
    }

    /// Weight `index` of the stream keyed by `seed`.
    #[inline]
    pub fn draw(&self, seed: u64, index: u64) -> f64 {
        let u = rng::draw_open01(seed, index);
        self.quantile(u).expect("draws lie in (0, 1)")
    }

    /// `n` i.i.d. weights, a pure function of `(self, n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidArgument(
                "sample size must be at least 1".into(),
            ));
        }
        Ok((0..n as u64).map(|i| self.draw(seed, i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;

    fn continuous_laws() -> Vec<WeightLaw> {
        vec![
            WeightLaw::exponential(1.0).unwrap(),
            WeightLaw::exponential(2.5).unwrap(),
            WeightLaw::pareto(1.0, 2.0).unwrap(),
            WeightLaw::pareto(0.5, 1.0).unwrap(),
            WeightLaw::uniform01(),
            // Triangular density 2x on [0, 1] split at 0.5.
            WeightLaw::piecewise(vec![0.0, 0.5, 1.0], vec![vec![0.0, 2.0], vec![0.0, 2.0]])
                .unwrap(),
        ]
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeightLaw::bernoulli(1.3).is_err());
        assert!(WeightLaw::bernoulli(-0.1).is_err());
        assert!(WeightLaw::exponential(0.0).is_err());
        assert!(WeightLaw::pareto(0.0, 1.0).is_err());
        assert!(WeightLaw::pareto(1.0, -2.0).is_err());
        assert!(WeightLaw::piecewise(vec![0.0, 1.0], vec![vec![0.5]]).is_err());
        assert!(WeightLaw::piecewise(vec![0.0, 1.0], vec![vec![2.0, -2.0]]).is_ok());
        assert!(WeightLaw::piecewise(vec![0.0, 1.0], vec![vec![-1.0, 4.0]]).is_err());
    }

    #[test]
    fn degenerate_bernoulli_sample() {
        let law = WeightLaw::bernoulli(1.0).unwrap();
        for seed in [0, 1, 99] {
            assert_eq!(law.sample(5, seed).unwrap(), vec![1.0; 5]);
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let law = WeightLaw::exponential(1.0).unwrap();
        let xs = law.sample(100_000, 7).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn uniform_sample_ks() {
        let mut xs = WeightLaw::uniform01().sample(100_000, 7).unwrap();
        xs.sort_by(|a, b| a.total_cmp(b));
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max);
        assert!(d < 0.01, "KS {d}");
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(WeightLaw::exponential(2.0).unwrap().cdf(0.0), 0.0);
        assert_eq!(WeightLaw::uniform01().cdf(0.3), 0.3);
        // Oracle: integrate the Pareto density from the scale to x.
        let pareto = WeightLaw::pareto(1.0, 2.0).unwrap();
        let oracle = quad::integrate(|x| 2.0 * (1.0 / x).powi(3), 1.0, 2.0, 1e-13).unwrap();
        assert!((oracle - 0.75).abs() < 1e-12);
        assert!((pareto.cdf(2.0) - oracle).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let e = WeightLaw::exponential(1.0).unwrap();
        assert!((e.quantile(1.0 - (-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(WeightLaw::uniform01().quantile(0.25).unwrap(), 0.25);
        let p = WeightLaw::pareto(1.0, 1.0).unwrap();
        assert!((p.quantile(0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!(e.quantile(0.0).is_err());
        assert!(e.quantile(1.0).is_err());
    }

    #[test]
    fn bernoulli_generalized_inverse() {
        let b = WeightLaw::bernoulli(0.3).unwrap();
        assert_eq!(b.quantile(0.0).unwrap(), 0.0);
        assert_eq!(b.quantile(0.7).unwrap(), 0.0);
        assert_eq!(b.quantile(0.7000001).unwrap(), 1.0);
        assert_eq!(b.quantile(1.0).unwrap(), 1.0);
        assert!(b.quantile(1.5).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for law in continuous_laws() {
            let (lo, hi) = law.integration_range();
            let mut breaks = vec![lo, hi];
            breaks.extend(law.density_breaks());
            // Heavy tails keep mass beyond the truncation point; account for it.
            let tail = law.survival(hi);
            let mass =
                quad::integrate_with_breaks(|x| law.density(x), &breaks, 1e-11).unwrap() + tail;
            assert!((mass - 1.0).abs() < 1e-9, "{law:?}: {mass}");
        }
    }

    #[test]
    fn density_vanishes_off_support() {
        for law in continuous_laws() {
            let (lo, hi) = law.support().bounds();
            assert_eq!(law.density(lo - 0.5), 0.0);
            if hi.is_finite() {
                assert_eq!(law.density(hi + 0.5), 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(u in 1e-9f64..(1.0 - 1e-9)) {
            for law in continuous_laws() {
                let x = law.quantile(u).unwrap();
                prop_assert!((law.cdf(x) - u).abs() <= 1e-9, "{:?} u={} x={}", law, u, x);
            }
        }

        #[test]
        fn cdf_inverts_quantile_inside(u in 0.01f64..0.99) {
            for law in continuous_laws() {
                let x = law.quantile(u).unwrap();
                let back = law.quantile(law.cdf(x)).unwrap();
                prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }

        #[test]
        fn cdf_nondecreasing(a in -5.0f64..20.0, b in -5.0f64..20.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for law in continuous_laws().into_iter().chain([WeightLaw::bernoulli(0.4).unwrap()]) {
                prop_assert!(law.cdf(lo) <= law.cdf(hi));
                prop_assert!(law.density(lo) >= 0.0);
            }
        }

        #[test]
        fn sample_is_pure(seed in any::<u64>()) {
            let law = WeightLaw::pareto(1.0, 2.0).unwrap();
            prop_assert_eq!(law.sample(16, seed).unwrap(), law.sample(16, seed).unwrap());
            for x in law.sample(16, seed).unwrap() {
                prop_assert!(x >= 1.0);
            }
        }
    }
}
