//! Connector functions, interval-union Borel sets, and the edge predicate.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightLaw;

/// Interval endpoint on the extended real line; serialized as a number or
/// the strings `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint(pub f64);

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Endpoint;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Endpoint, E> {
                Ok(Endpoint(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Endpoint, E> {
                Ok(Endpoint(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Endpoint, E> {
                Ok(Endpoint(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Endpoint, E> {
                match v.to_ascii_lowercase().as_str() {
                    "inf" | "+inf" | "infinity" | "+infinity" => Ok(Endpoint(f64::INFINITY)),
                    "-inf" | "-infinity" => Ok(Endpoint(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// One interval; infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: Endpoint,
    #[serde(default)]
    pub lo_open: bool,
    pub hi: Endpoint,
    #[serde(default)]
    pub hi_open: bool,
}

impl Interval {
    pub fn new(lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> Self {
        Self {
            lo: Endpoint(lo),
            lo_open: lo_open || lo.is_infinite(),
            hi: Endpoint(hi),
            hi_open: hi_open || hi.is_infinite(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo.0
    }

    pub fn hi(&self) -> f64 {
        self.hi.0
    }

    pub fn is_empty(&self) -> bool {
        self.lo() > self.hi() || (self.lo() == self.hi() && (self.lo_open || self.hi_open))
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        let above = v > self.lo() || (!self.lo_open && v == self.lo());
        let below = v < self.hi() || (!self.hi_open && v == self.hi());
        above && below
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_open) = match self.lo().total_cmp(&other.lo()) {
            std::cmp::Ordering::Greater => (self.lo(), self.lo_open),
            std::cmp::Ordering::Less => (other.lo(), other.lo_open),
            std::cmp::Ordering::Equal => (self.lo(), self.lo_open || other.lo_open),
        };
        let (hi, hi_open) = match self.hi().total_cmp(&other.hi()) {
            std::cmp::Ordering::Less => (self.hi(), self.hi_open),
            std::cmp::Ordering::Greater => (other.hi(), other.hi_open),
            std::cmp::Ordering::Equal => (self.hi(), self.hi_open || other.hi_open),
        };
        Interval::new(lo, lo_open, hi, hi_open)
    }

    fn within(&self, outer: &Interval) -> bool {
        let lo_ok =
            self.lo() > outer.lo() || (self.lo() == outer.lo() && (!outer.lo_open || self.lo_open));
        let hi_ok =
            self.hi() < outer.hi() || (self.hi() == outer.hi() && (!outer.hi_open || self.hi_open));
        lo_ok && hi_ok
    }
}

/// A finite union of intervals, kept sorted, disjoint and maximally merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct BorelSet {
    intervals: Vec<Interval>,
}

impl<'de> Deserialize<'de> for BorelSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Interval>::deserialize(d)?;
        BorelSet::try_new(raw).map_err(de::Error::custom)
    }
}

impl BorelSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full_line() -> Self {
        Self::from_normalized(vec![Interval::new(
            f64::NEG_INFINITY,
            true,
            f64::INFINITY,
            true,
        )])
    }

    /// `(lo, +inf)`.
    pub fn above(lo: f64) -> Self {
        Self::from_normalized(vec![Interval::new(lo, true, f64::INFINITY, true)])
    }

    /// `(-inf, hi]`.
    pub fn at_most(hi: f64) -> Self {
        Self::from_normalized(vec![Interval::new(f64::NEG_INFINITY, true, hi, false)])
    }

    /// `(lo, hi]`.
    pub fn half_open(lo: f64, hi: f64) -> Self {
        Self::new(vec![Interval::new(lo, true, hi, false)])
    }

    pub fn interval(lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> Self {
        Self::new(vec![Interval::new(lo, lo_open, hi, hi_open)])
    }

    /// Rejects NaN endpoints and inverted intervals.
    pub fn try_new(intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if iv.lo().is_nan() || iv.hi().is_nan() {
                return Err(Error::InvalidSet("NaN endpoint".into()));
            }
            if iv.lo() > iv.hi() {
                return Err(Error::InvalidSet(format!(
                    "lo {} exceeds hi {}",
                    iv.lo(),
                    iv.hi()
                )));
            }
            if iv.lo() == iv.hi() && (iv.lo_open || iv.hi_open) {
                return Err(Error::InvalidSet(format!(
                    "degenerate interval at {} must have both endpoints closed",
                    iv.lo()
                )));
            }
        }
        Ok(Self::new(intervals))
    }

    /// Normalizes any collection of intervals; empty ones are dropped.
    pub fn new(intervals: Vec<Interval>) -> Self {
        let mut ivs: Vec<Interval> = intervals
            .into_iter()
            .map(|iv| Interval::new(iv.lo(), iv.lo_open, iv.hi(), iv.hi_open))
            .filter(|iv| !iv.is_empty())
            .collect();
        ivs.sort_by(|a, b| a.lo().total_cmp(&b.lo()).then(a.lo_open.cmp(&b.lo_open)));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            if let Some(last) = out.last_mut() {
                let touches =
                    iv.lo() < last.hi() || (iv.lo() == last.hi() && !(iv.lo_open && last.hi_open));
                if touches {
                    if iv.hi() > last.hi() || (iv.hi() == last.hi() && !iv.hi_open) {
                        last.hi = iv.hi;
                        last.hi_open = iv.hi_open;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        Self { intervals: out }
    }

    fn from_normalized(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, v: f64) -> bool {
        // Few intervals in practice; a linear scan beats bisection.
        self.intervals.iter().any(|iv| iv.contains(v))
    }

    pub fn intersect(&self, other: &BorelSet) -> BorelSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let c = a.intersect(b);
                if !c.is_empty() {
                    out.push(c);
                }
            }
        }
        BorelSet::new(out)
    }

    pub fn union(&self, other: &BorelSet) -> BorelSet {
        BorelSet::new(
            self.intervals
                .iter()
                .chain(other.intervals.iter())
                .copied()
                .collect(),
        )
    }

    /// `{v + t : v in self}`.
    pub fn shift(&self, t: f64) -> BorelSet {
        BorelSet::new(
            self.intervals
                .iter()
                .map(|iv| Interval::new(iv.lo() + t, iv.lo_open, iv.hi() + t, iv.hi_open))
                .collect(),
        )
    }

    /// `{-v : v in self}`.
    pub fn reflect(&self) -> BorelSet {
        BorelSet::new(
            self.intervals
                .iter()
                .map(|iv| Interval::new(-iv.hi(), iv.hi_open, -iv.lo(), iv.lo_open))
                .collect(),
        )
    }

    /// True iff every point of `self` lies in `other`.
    pub fn is_subset(&self, other: &BorelSet) -> bool {
        self.intervals
            .iter()
            .all(|a| other.intervals.iter().any(|b| a.within(b)))
    }

    pub fn probability(&self, law: &WeightLaw) -> f64 {
        self.intervals
            .iter()
            .map(|iv| law.prob_interval(iv.lo(), iv.lo_open, iv.hi(), iv.hi_open))
            .sum::<f64>()
            .min(1.0)
    }

    /// Finite endpoints, in order.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|iv| [iv.lo(), iv.hi()])
            .filter(|x| x.is_finite())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connector {
    Sum,
    AbsDiff,
    RelDiff,
    Max,
    Min,
}

impl Connector {
    pub fn name(self) -> &'static str {
        match self {
            Connector::Sum => "sum",
            Connector::AbsDiff => "abs_diff",
            Connector::RelDiff => "rel_diff",
            Connector::Max => "max",
            Connector::Min => "min",
        }
    }

    #[inline]
    pub fn eval(self, x: f64, y: f64) -> Result<f64> {
        Ok(match self {
            Connector::Sum => x + y,
            Connector::AbsDiff => (x - y).abs(),
            Connector::RelDiff => {
                let s = x + y;
                if s == 0.0 {
                    return Err(Error::Domain {
                        connector: self.name(),
                        x,
                        y,
                    });
                }
                (x - y).abs() / s
            }
            Connector::Max => x.max(y),
            Connector::Min => x.min(y),
        })
    }

    /// `{y : self(x, y) in set}`, restricted to `y >= 0` for `RelDiff`
    /// (which needs `x >= 0`).
    pub fn preimage(self, x: f64, set: &BorelSet) -> Result<BorelSet> {
        Ok(match self {
            Connector::Sum => set.shift(-x),
            Connector::AbsDiff => {
                let nonneg = set.intersect(&BorelSet::interval(0.0, false, f64::INFINITY, true));
                nonneg.shift(x).union(&nonneg.reflect().shift(x))
            }
            Connector::Max => {
                let upper = set.intersect(&BorelSet::above(x));
                if set.contains(x) {
                    upper.union(&BorelSet::at_most(x))
                } else {
                    upper
                }
            }
            Connector::Min => {
                let lower = set.intersect(&BorelSet::interval(f64::NEG_INFINITY, true, x, true));
                if set.contains(x) {
                    lower.union(&BorelSet::interval(x, false, f64::INFINITY, true))
                } else {
                    lower
                }
            }
            Connector::RelDiff => rel_diff_preimage(x, set)?,
        })
    }
}

fn rel_diff_preimage(x: f64, set: &BorelSet) -> Result<BorelSet> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Unsupported(format!(
            "rel_diff preimage needs a nonnegative weight, got {x}"
        )));
    }
    if x == 0.0 {
        // r(0, y) = 1 for every y > 0.
        return Ok(if set.contains(1.0) {
            BorelSet::above(0.0)
        } else {
            BorelSet::empty()
        });
    }
    // With u = y / x >= 0 the connector is |1 - u| / (1 + u): decreasing
    // from 1 to 0 on [0, 1], increasing from 0 towards 1 on [1, inf).
    let clip = set.intersect(&BorelSet::interval(0.0, false, 1.0, false));
    let mut out = Vec::new();
    for iv in clip.intervals() {
        let (r1, r1_open, r2, r2_open) = (iv.lo(), iv.lo_open, iv.hi(), iv.hi_open);
        let down = |r: f64| (1.0 - r) / (1.0 + r);
        out.push(Interval::new(x * down(r2), r2_open, x * down(r1), r1_open));
        let up_hi = if r2 >= 1.0 {
            f64::INFINITY
        } else {
            x * (1.0 + r2) / (1.0 - r2)
        };
        out.push(Interval::new(
            x * (1.0 + r1) / (1.0 - r1),
            r1_open,
            up_hi,
            r2_open || r2 >= 1.0,
        ));
    }
    Ok(BorelSet::new(out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clause {
    pub connector: Connector,
    pub set: BorelSet,
}

/// Edge predicate: `x ~ y` iff every clause's connector value lies in its set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionRule {
    pub clauses: Vec<Clause>,
}

impl ConnectionRule {
    pub fn new(clauses: Vec<Clause>) -> Result<Self> {
        let rule = Self { clauses };
        rule.validate()?;
        Ok(rule)
    }

    /// The classical threshold model: `x + y > theta`.
    pub fn threshold(theta: f64) -> Self {
        Self {
            clauses: vec![Clause {
                connector: Connector::Sum,
                set: BorelSet::above(theta),
            }],
        }
    }

    /// `theta1 < x + y <= theta2`.
    pub fn sum_window(theta1: f64, theta2: f64) -> Self {
        Self {
            clauses: vec![Clause {
                connector: Connector::Sum,
                set: BorelSet::half_open(theta1, theta2),
            }],
        }
    }

    /// `x + y > theta` and `0 < |x - y| <= c`.
    pub fn threshold_with_gap(theta: f64, c: f64) -> Self {
        Self {
            clauses: vec![
                Clause {
                    connector: Connector::Sum,
                    set: BorelSet::above(theta),
                },
                Clause {
                    connector: Connector::AbsDiff,
                    set: BorelSet::half_open(0.0, c),
                },
            ],
        }
    }

    /// Single clause with the given connector and set.
    pub fn single(connector: Connector, set: BorelSet) -> Self {
        Self {
            clauses: vec![Clause { connector, set }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clauses.is_empty() {
            return Err(Error::InvalidRule(
                "a rule needs at least one clause".into(),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn edge(&self, x: f64, y: f64) -> Result<bool> {
        for clause in &self.clauses {
            if !clause.set.contains(clause.connector.eval(x, y)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The set of weights adjacent to a vertex of weight `x`.
    pub fn neighborhood(&self, x: f64) -> Result<BorelSet> {
        let mut acc = BorelSet::full_line();
        for clause in &self.clauses {
            acc = acc.intersect(&clause.connector.preimage(x, &clause.set)?);
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    /// Clause-wise containment with identical connectors.
    pub fn is_sub_rule(&self, other: &ConnectionRule) -> bool {
        self.clauses.len() == other.clauses.len()
            && self
                .clauses
                .iter()
                .zip(&other.clauses)
                .all(|(a, b)| a.connector == b.connector && a.set.is_subset(&b.set))
    }

    pub fn uses(&self, connector: Connector) -> bool {
        self.clauses.iter().any(|c| c.connector == connector)
    }

    /// For a single `Sum` clause, the set it tests.
    pub fn as_sum_clause(&self) -> Option<&BorelSet> {
        match self.clauses.as_slice() {
            [Clause {
                connector: Connector::Sum,
                set,
            }] => Some(set),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_set() -> impl Strategy<Value = BorelSet> {
        prop::collection::vec(
            (-3.0f64..3.0, 0.0f64..2.0, any::<bool>(), any::<bool>()),
            0..4,
        )
        .prop_map(|v| {
            BorelSet::new(
                v.into_iter()
                    .map(|(lo, len, lo_open, hi_open)| {
                        Interval::new(lo, lo_open, lo + len, hi_open)
                    })
                    .collect(),
            )
        })
    }

    #[test]
    fn contains_examples() {
        assert!(!BorelSet::above(1.0).contains(1.0));
        assert!(BorelSet::half_open(0.0, 2.0).contains(2.0));
        assert!(!BorelSet::half_open(0.0, 0.5).contains(0.7));
        assert!(BorelSet::interval(1.0, false, 1.0, false).contains(1.0));
    }

    #[test]
    fn edge_examples() {
        let r = ConnectionRule::threshold(0.5);
        assert!(r.edge(1.0, 0.0).unwrap());
        assert!(!r.edge(0.0, 0.0).unwrap());
        let two = ConnectionRule::threshold_with_gap(1.0, 0.3);
        assert!(!two.edge(0.9, 0.5).unwrap());
        assert!(two.edge(0.9, 0.7).unwrap());
    }

    #[test]
    fn rel_diff_domain_error() {
        let r = ConnectionRule::single(Connector::RelDiff, BorelSet::at_most(0.5));
        assert!(matches!(r.edge(0.0, 0.0), Err(Error::Domain { .. })));
        assert!(r.edge(1.0, 2.0).unwrap());
    }

    #[test]
    fn subset_examples() {
        assert!(BorelSet::above(1.0).is_subset(&BorelSet::above(0.0)));
        assert!(!BorelSet::half_open(0.0, 2.0).is_subset(&BorelSet::half_open(0.0, 1.0)));
        let u = BorelSet::half_open(0.0, 1.0).union(&BorelSet::half_open(2.0, 3.0));
        assert!(u.is_subset(&BorelSet::half_open(0.0, 3.0)));
        assert!(BorelSet::empty().is_subset(&BorelSet::empty()));
    }

    #[test]
    fn adjacent_intervals_merge() {
        let s = BorelSet::new(vec![
            Interval::new(0.0, true, 1.0, false),
            Interval::new(1.0, true, 2.0, false),
        ]);
        assert_eq!(s.intervals().len(), 1);
        let t = BorelSet::new(vec![
            Interval::new(0.0, true, 1.0, true),
            Interval::new(1.0, true, 2.0, false),
        ]);
        assert_eq!(t.intervals().len(), 2);
        assert!(!t.contains(1.0));
    }

    #[test]
    fn try_new_rejects_inverted() {
        assert!(BorelSet::try_new(vec![Interval::new(2.0, false, 1.0, false)]).is_err());
        assert!(BorelSet::try_new(vec![Interval::new(1.0, true, 1.0, false)]).is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{"clauses":[{"connector":"sum","set":[{"lo":0.5,"lo_open":true,"hi":"inf","hi_open":true}]}]}"#;
        let rule: ConnectionRule = serde_json::from_str(text).unwrap();
        assert_eq!(rule, ConnectionRule::threshold(0.5));
        assert_eq!(serde_json::to_string(&rule).unwrap(), text);
    }

    proptest! {
        #[test]
        fn connectors_symmetric(x in 0.001f64..10.0, y in 0.001f64..10.0) {
            for c in [Connector::Sum, Connector::AbsDiff, Connector::RelDiff, Connector::Max, Connector::Min] {
                prop_assert_eq!(c.eval(x, y).unwrap(), c.eval(y, x).unwrap());
            }
            let r = ConnectionRule::threshold_with_gap(1.0, 0.7);
            prop_assert_eq!(r.edge(x, y).unwrap(), r.edge(y, x).unwrap());
        }

        #[test]
        fn set_ops_pointwise(a in arb_set(), b in arb_set(), v in -4.0f64..6.0, t in -1.0f64..1.0) {
            prop_assert_eq!(a.intersect(&b).contains(v), a.contains(v) && b.contains(v));
            prop_assert_eq!(a.union(&b).contains(v), a.contains(v) || b.contains(v));
            prop_assert_eq!(a.shift(t).contains(v + t), a.contains(v));
            prop_assert_eq!(a.reflect().contains(-v), a.contains(v));
        }

        #[test]
        fn subset_matches_sampling(a in arb_set(), b in arb_set()) {
            if a.is_subset(&b) {
                for k in 0..=2000 {
                    let v = -4.0 + 10.0 * k as f64 / 2000.0;
                    prop_assert!(!a.contains(v) || b.contains(v));
                }
                for iv in a.intervals() {
                    for e in [iv.lo(), iv.hi()] {
                        prop_assert!(!a.contains(e) || b.contains(e));
                    }
                }
            } else {
                // Some point of a must escape b: an endpoint, a midpoint
                // between breakpoints, or just inside an endpoint.
                let mut pts: Vec<f64> = a.endpoints();
                pts.extend(b.endpoints());
                pts.sort_by(|x, y| x.total_cmp(y));
                let mut cands = pts.clone();
                cands.extend(pts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                cands.extend(pts.iter().map(|p| p - 1e-9));
                cands.extend(pts.iter().map(|p| p + 1e-9));
                cands.push(-1e9);
                cands.push(1e9);
                prop_assert!(cands.iter().any(|&v| a.contains(v) && !b.contains(v)));
            }
        }

        #[test]
        fn preimage_matches_edge(
            x in 0.0f64..3.0, y in 0.001f64..3.0,
            set in arb_set(),
            which in 0usize..5,
        ) {
            let c = [Connector::Sum, Connector::AbsDiff, Connector::RelDiff, Connector::Max, Connector::Min][which];
            let pre = c.preimage(x, &set).unwrap();
            let direct = set.contains(c.eval(x, y).unwrap());
            prop_assert_eq!(pre.contains(y), direct, "{:?} x={} y={} pre={:?}", c, x, y, pre);
        }
    }
}
