//! Analytic limits of the census and clustering statistics.
//!
//! Every quantity is built from the neighborhood `N(x) = {y : x ~ y}`, an
//! exact finite interval union, so inner probabilities are closed-form CDF
//! differences and only the outer averages over the weight law need
//! quadrature. Discrete laws use exact finite sums throughout.

pub mod degree_law;
pub mod mixed;

use rayon::prelude::*;
use serde::Serialize;

use crate::census::SubgraphFamily;
use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::rules::{BorelSet, ConnectionRule};
use crate::stats;
use crate::weights::WeightLaw;

pub use degree_law::{degree_law, degree_law_empirical};
pub use mixed::{Atom, DensityForm, MixedLaw, Piece};

/// Tolerance of the outer (weight-law) integrals.
pub const OUTER_TOL: f64 = 1e-8;
/// Quantile grid size for the quadrature path of `zeta`.
pub const ZETA_GRID: usize = 2048;
/// Below this, `zeta` counts as zero and the CLT is refused.
pub const ZETA_MIN: f64 = 1e-12;

const GRID_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
    MonteCarlo,
}

/// A limit value with its standard error when estimated by simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub method: Method,
}

impl LimitEstimate {
    fn exact(value: f64, law: &WeightLaw) -> Self {
        let method = if law.is_continuous() {
            Method::Quadrature
        } else {
            Method::Exact
        };
        Self {
            value,
            std_error: None,
            method,
        }
    }
}

/// `(E_D(x), E_T(x), C(1; x))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalLimits {
    pub x: f64,
    pub e_d: f64,
    pub e_t: f64,
    pub c: f64,
}

/// Expected value of `f` over the law, with `f` smooth between `breaks`.
fn expect<F>(law: &WeightLaw, f: F, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !law.is_continuous() {
        let mut acc = 0.0;
        for (v, mass) in law.atoms() {
            acc += mass * f(v)?;
        }
        return Ok(acc);
    }
    integrate_density(law, &f, law.integration_range(), breaks, tol)
}

/// `∫_lo^hi f(y) dF(y)` for a continuous law, with errors from `f` surfaced.
fn integrate_density<F>(
    law: &WeightLaw,
    f: &F,
    range: (f64, f64),
    breaks: &[f64],
    tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = range;
    if hi <= lo {
        return Ok(0.0);
    }
    let mut pts = vec![lo, hi];
    pts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    pts.extend(
        law.density_breaks()
            .into_iter()
            .filter(|b| *b > lo && *b < hi),
    );
    let failure = std::cell::RefCell::new(None);
    let value = quad::integrate_with_breaks(
        |y| match f(y) {
            Ok(v) => v * law.density(y),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &pts,
        tol,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `∫_S f dF` over a Borel set `S`.
fn integrate_over_set<F>(
    law: &WeightLaw,
    set: &BorelSet,
    f: &F,
    breaks: &[f64],
    tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !law.is_continuous() {
        let mut acc = 0.0;
        for (v, mass) in law.atoms() {
            if set.contains(v) {
                acc += mass * f(v)?;
            }
        }
        return Ok(acc);
    }
    let (rlo, rhi) = law.integration_range();
    let mut acc = 0.0;
    for iv in set.intervals() {
        let lo = iv.lo().max(rlo);
        let hi = iv.hi().min(rhi);
        if hi > lo {
            acc += integrate_density(law, f, (lo, hi), breaks, tol)?;
        }
    }
    Ok(acc)
}

/// Finite endpoints of all clause sets.
fn clause_endpoints(rule: &ConnectionRule) -> Vec<f64> {
    rule.clauses
        .iter()
        .flat_map(|c| c.set.endpoints())
        .collect()
}

/// Points where neighborhood endpoints (of the form `t - v`, `v - t`,
/// `v + t` for clause endpoints `t`) meet the anchors `anchors`.
fn crossing_points(rule: &ConnectionRule, anchors: &[f64]) -> Vec<f64> {
    let ts = clause_endpoints(rule);
    let mut out = Vec::with_capacity(anchors.len() * (3 * ts.len() + 1));
    for &e in anchors {
        out.push(e);
        for &t in &ts {
            out.extend([t - e, e - t, e + t]);
        }
    }
    for &t in &ts {
        out.extend([t, -t, t / 2.0, 0.0]);
    }
    out.retain(|v| v.is_finite());
    out
}

/// Kinks of `x ↦ E_D(x)`: neighborhood endpoints crossing the support edges.
fn outer_breaks(law: &WeightLaw, rule: &ConnectionRule) -> Vec<f64> {
    let (lo, hi) = law.support().bounds();
    let mut anchors: Vec<f64> = [lo, hi].into_iter().filter(|v| v.is_finite()).collect();
    anchors.extend(law.density_breaks());
    crossing_points(rule, &anchors)
}

/// `E_D(x) = P(X ~ x)`.
pub fn e_d(law: &WeightLaw, rule: &ConnectionRule, x: f64) -> Result<f64> {
    Ok(rule.neighborhood(x)?.probability(law))
}

/// `E_T(x)`: probability that two independent weights are adjacent to
/// `x` and to each other.
pub fn e_t(law: &WeightLaw, rule: &ConnectionRule, x: f64) -> Result<f64> {
    let nx = rule.neighborhood(x)?;
    let ed = nx.probability(law);
    if ed == 0.0 {
        return Ok(0.0);
    }
    let mut anchors = nx.endpoints();
    let (lo, hi) = law.support().bounds();
    anchors.extend([lo, hi].into_iter().filter(|v| v.is_finite()));
    let breaks = crossing_points(rule, &anchors);
    let tol = quad::DEFAULT_TOL * (ed * ed).max(1e-6);
    let inner =
        |y: f64| -> Result<f64> { Ok(nx.intersect(&rule.neighborhood(y)?).probability(law)) };
    integrate_over_set(law, &nx, &inner, &breaks, tol).map(|v| v.clamp(0.0, ed))
}

/// `C(1; x) = E_T(x) / E_D(x)^2`, or `w` where `E_D(x) = 0`.
pub fn local_limits(law: &WeightLaw, rule: &ConnectionRule, x: f64, w: f64) -> Result<LocalLimits> {
    let ed = e_d(law, rule, x)?;
    let et = e_t(law, rule, x)?;
    let c = if ed > 0.0 { et / (ed * ed) } else { w };
    Ok(LocalLimits {
        x,
        e_d: ed,
        e_t: et,
        c,
    })
}

/// `E[C(1; X)]`, the limit of the global clustering coefficient.
pub fn expected_global_cc(law: &WeightLaw, rule: &ConnectionRule, w: f64) -> Result<f64> {
    let breaks = outer_breaks(law, rule);
    expect(
        law,
        |x| Ok(local_limits(law, rule, x, w)?.c),
        &breaks,
        OUTER_TOL,
    )
}

/// `P(E_D(X) = 0)`: the asymptotic fraction of isolated vertices.
pub fn prob_isolated(law: &WeightLaw, rule: &ConnectionRule) -> Result<f64> {
    let breaks = outer_breaks(law, rule);
    expect(
        law,
        |x| Ok((e_d(law, rule, x)? == 0.0) as u8 as f64),
        &breaks,
        OUTER_TOL,
    )
    .map(|p| p.clamp(0.0, 1.0))
}

/// Limit of the degree-filtered clustering coefficient.
pub fn expected_filtered_cc(law: &WeightLaw, rule: &ConnectionRule) -> Result<f64> {
    let p0 = prob_isolated(law, rule)?;
    if 1.0 - p0 <= 1e-12 {
        return Err(Error::Undefined("the graph is asymptotically empty".into()));
    }
    Ok(expected_global_cc(law, rule, 0.0)? / (1.0 - p0))
}

/// Indices `k` of edge counts on 3 vertices that belong to the family.
fn edge_count_members(family: &SubgraphFamily) -> [bool; 4] {
    let mut out = [false; 4];
    for mask in 0u16..8 {
        if family.contains_mask(mask) {
            out[mask.count_ones() as usize] = true;
        }
    }
    out
}

/// `E[h(x, y, Z)]` for an `m = 3` family, exact in `Z`.
fn kernel3_given_pair(
    law: &WeightLaw,
    rule: &ConnectionRule,
    members: &[bool; 4],
    x: f64,
    nx: &BorelSet,
    px: f64,
    y: f64,
) -> Result<f64> {
    let ny = rule.neighborhood(y)?;
    let py = ny.probability(law);
    let p11 = nx.intersect(&ny).probability(law);
    let p10 = (px - p11).max(0.0);
    let p01 = (py - p11).max(0.0);
    let p00 = (1.0 - p10 - p01 - p11).max(0.0);
    let exy = rule.edge(x, y)? as usize;
    let pick = |k: usize| members[k] as u8 as f64;
    Ok(p00 * pick(exy) + (p10 + p01) * pick(exy + 1) + p11 * pick(exy + 2))
}

/// `g(x) = E[h(x, X_2, ..., X_m)]` for `m` in {2, 3}.
pub fn conditional_kernel_mean(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    x: f64,
) -> Result<f64> {
    match family.m() {
        2 => {
            let ed = e_d(law, rule, x)?;
            Ok(family.contains_mask(1) as u8 as f64 * ed
                + family.contains_mask(0) as u8 as f64 * (1.0 - ed))
        }
        3 => {
            let members = edge_count_members(family);
            let nx = rule.neighborhood(x)?;
            let px = nx.probability(law);
            let mut anchors = nx.endpoints();
            let (lo, hi) = law.support().bounds();
            anchors.extend([lo, hi].into_iter().filter(|v| v.is_finite()));
            let breaks = crossing_points(rule, &anchors);
            let f = |y: f64| kernel3_given_pair(law, rule, &members, x, &nx, px, y);
            if law.is_continuous() {
                integrate_density(law, &f, law.integration_range(), &breaks, quad::DEFAULT_TOL)
            } else {
                let mut acc = 0.0;
                for (v, mass) in law.atoms() {
                    acc += mass * f(v)?;
                }
                Ok(acc)
            }
        }
        m => Err(Error::Unsupported(format!(
            "deterministic limits need m <= 3, got m = {m}"
        ))),
    }
}

/// `F(C, A_m) = E[h(X_1, ..., X_m)]` for `m <= 3`.
pub fn f_limit(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
) -> Result<LimitEstimate> {
    law.validate()?;
    let breaks = outer_breaks(law, rule);
    let value = expect(
        law,
        |x| conditional_kernel_mean(law, rule, family, x),
        &breaks,
        OUTER_TOL,
    )?;
    Ok(LimitEstimate::exact(value.clamp(0.0, 1.0), law))
}

/// Monte Carlo estimate of `F(C, A_m)` for any family size.
pub fn f_limit_mc(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    samples: usize,
    seed: u64,
) -> Result<LimitEstimate> {
    law.validate()?;
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs at least 2 samples".into(),
        ));
    }
    let m = family.m();
    let hits: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let key = rng::derive_seed(seed, s as u64);
            let xs: Vec<f64> = (0..m as u64).map(|k| law.draw(key, k)).collect();
            family.kernel(rule, &xs).map(|h| h as u8 as f64)
        })
        .collect::<Result<_>>()?;
    Ok(LimitEstimate {
        value: stats::mean(&hits),
        std_error: Some(stats::std_error(&hits)),
        method: Method::MonteCarlo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ZetaMethod {
    Quadrature,
    NestedMc {
        outer: usize,
        inner: usize,
        seed: u64,
    },
}

/// `zeta = Var(g(X_1))` for `m` in {2, 3}.
pub fn zeta(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    method: ZetaMethod,
) -> Result<LimitEstimate> {
    law.validate()?;
    if !(2..=3).contains(&family.m()) {
        return Err(Error::Unsupported(format!(
            "zeta needs m in {{2, 3}}, got m = {}",
            family.m()
        )));
    }
    match method {
        ZetaMethod::Quadrature => zeta_quadrature(law, rule, family),
        ZetaMethod::NestedMc { outer, inner, seed } => {
            zeta_nested_mc(law, rule, family, outer, inner, seed)
        }
    }
}

fn zeta_quadrature(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
) -> Result<LimitEstimate> {
    if !law.is_continuous() {
        let atoms = law.atoms();
        let gs: Vec<f64> = atoms
            .iter()
            .map(|(v, _)| conditional_kernel_mean(law, rule, family, *v))
            .collect::<Result<_>>()?;
        let mean: f64 = atoms.iter().zip(&gs).map(|((_, p), g)| p * g).sum();
        let var: f64 = atoms
            .iter()
            .zip(&gs)
            .map(|((_, p), g)| p * (g - mean) * (g - mean))
            .sum();
        return Ok(LimitEstimate {
            value: var.max(0.0),
            std_error: None,
            method: Method::Exact,
        });
    }
    let h = 1.0 / ZETA_GRID as f64;
    let gs: Vec<f64> = (0..=ZETA_GRID)
        .into_par_iter()
        .map(|j| {
            let u = (j as f64 * h).clamp(GRID_CLAMP, 1.0 - GRID_CLAMP);
            conditional_kernel_mean(law, rule, family, law.quantile(u)?)
        })
        .collect::<Result<_>>()?;
    let mean = quad::simpson_grid(&gs, h);
    let sq: Vec<f64> = gs.iter().map(|g| g * g).collect();
    let var = quad::simpson_grid(&sq, h) - mean * mean;
    Ok(LimitEstimate {
        value: var.max(0.0),
        std_error: None,
        method: Method::Quadrature,
    })
}

/// Between-group variance of nested kernel means, corrected for the
/// within-group noise `s_i^2 / inner`.
fn zeta_nested_mc(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    outer: usize,
    inner: usize,
    seed: u64,
) -> Result<LimitEstimate> {
    if outer < 2 || inner < 2 {
        return Err(Error::InvalidArgument(
            "nested Monte Carlo needs outer, inner >= 2".into(),
        ));
    }
    let m = family.m();
    let groups: Vec<(f64, f64)> = (0..outer)
        .into_par_iter()
        .map(|i| {
            let key = rng::derive_seed(seed, i as u64);
            let mut xs = vec![law.draw(key, 0); m];
            let mut hits = 0usize;
            for j in 0..inner {
                for (k, slot) in xs.iter_mut().enumerate().skip(1) {
                    *slot = law.draw(key, 1 + (j * (m - 1) + k - 1) as u64);
                }
                hits += family.kernel(rule, &xs)? as usize;
            }
            let g = hits as f64 / inner as f64;
            let s2 = g * (1.0 - g) * inner as f64 / (inner - 1) as f64;
            Ok((g, s2))
        })
        .collect::<Result<_>>()?;
    let gbar = groups.iter().map(|(g, _)| g).sum::<f64>() / outer as f64;
    let scale = outer as f64 / (outer - 1) as f64;
    let d: Vec<f64> = groups
        .iter()
        .map(|(g, s2)| scale * (g - gbar) * (g - gbar) - s2 / inner as f64)
        .collect();
    Ok(LimitEstimate {
        value: stats::mean(&d),
        std_error: Some(stats::std_error(&d)),
        method: Method::MonteCarlo,
    })
}

/// `P(X + X' > t)` (strict) or `P(X + X' >= t)` for independent copies.
pub fn sum_survival(law: &WeightLaw, t: f64, strict: bool) -> Result<f64> {
    Ok(match law {
        WeightLaw::Exponential { lambda } => {
            if t <= 0.0 {
                1.0
            } else {
                (1.0 + lambda * t) * (-lambda * t).exp()
            }
        }
        WeightLaw::Uniform01 => {
            if t <= 0.0 {
                1.0
            } else if t <= 1.0 {
                1.0 - t * t / 2.0
            } else if t < 2.0 {
                (2.0 - t) * (2.0 - t) / 2.0
            } else {
                0.0
            }
        }
        WeightLaw::Bernoulli { .. } => {
            let atoms = law.atoms();
            let mut acc = 0.0;
            for (a, pa) in &atoms {
                for (b, pb) in &atoms {
                    let s = a + b;
                    if s > t || (!strict && s == t) {
                        acc += pa * pb;
                    }
                }
            }
            acc
        }
        _ => {
            let (lo, hi) = law.support().bounds();
            let mut breaks: Vec<f64> = [t - lo, t - hi]
                .into_iter()
                .filter(|v| v.is_finite())
                .collect();
            breaks.extend(law.density_breaks().into_iter().map(|b| t - b));
            integrate_density(
                law,
                &|x| Ok(law.survival(t - x)),
                law.integration_range(),
                &breaks,
                quad::DEFAULT_TOL,
            )?
            .clamp(0.0, 1.0)
        }
    })
}
