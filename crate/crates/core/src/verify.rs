//! Monte Carlo harnesses confronting simulated statistics with their limits.
//!
//! Every harness is a pure function of its inputs and seed. Replication `r`
//! at size `n` draws its weights from `derive_seed(derive_seed(seed, n), r)`,
//! so extending a grid or a replication count leaves earlier draws intact.
//! Replications run in parallel and are gathered in index order before any
//! reduction, which keeps reports bit-identical across thread counts.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::census::{self, binomial, CensusResult, SubgraphFamily};
use crate::clustering::{local_cc, ClusteringConfig, ClusteringSummary};
use crate::error::{Error, Result};
use crate::graph::{degree_from_weights, Graph};
use crate::limits::{self, LimitEstimate, MixedLaw, ZetaMethod};
use crate::rng::derive_seed;
use crate::rules::ConnectionRule;
use crate::stats::{self, KsResult, TargetCdf};
use crate::weights::WeightLaw;

/// Largest `n` accepted by the sup-deviation sweep (Θ(n²) breakpoints).
pub const SUP_DEV_MAX_N: usize = 4096;
/// Monte Carlo draws for limits that have no deterministic evaluation.
pub const MC_LIMIT_SAMPLES: usize = 1_000_000;
/// Upper edge of the LIL envelope.
pub const LIL_ENVELOPE: f64 = 2.0;
/// The running maximum is expected to reach at least this much.
pub const LIL_FLOOR: f64 = 0.2;
/// First LIL checkpoint.
pub const LIL_MIN_N: usize = 1000;

/// Seed of replication `r` at size `n`.
pub fn replication_seed(seed: u64, n: usize, r: usize) -> u64 {
    derive_seed(derive_seed(seed, n as u64), r as u64)
}

fn check_grid(n_grid: &[usize], replications: usize, min_n: usize) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("n_grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n_grid must be strictly increasing".into(),
        ));
    }
    if n_grid[0] < min_n {
        return Err(Error::TooFewVertices {
            needed: min_n,
            n: n_grid[0],
        });
    }
    if replications == 0 {
        return Err(Error::InvalidArgument(
            "replications must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Mean of a statistic along a size grid against its limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub statistic: String,
    pub target: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_std_error: Option<f64>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Steps along the grid where the deviation shrank.
    pub decreasing_steps: usize,
    pub monotone: bool,
    pub final_gap: f64,
    #[serde(skip)]
    pub raw: Vec<Vec<f64>>,
}

impl ConvergenceReport {
    pub fn new(
        statistic: &str,
        target: LimitEstimate,
        n_grid: &[usize],
        raw: Vec<Vec<f64>>,
    ) -> Self {
        let means: Vec<f64> = raw.iter().map(|v| stats::mean(v)).collect();
        let std_errors = raw.iter().map(|v| stats::std_error(v)).collect();
        let deviations: Vec<f64> = means.iter().map(|m| (m - target.value).abs()).collect();
        let decreasing_steps = deviations.windows(2).filter(|w| w[1] < w[0]).count();
        Self {
            statistic: statistic.to_string(),
            target: target.value,
            target_std_error: target.std_error,
            n_grid: n_grid.to_vec(),
            replications: raw.first().map_or(0, Vec::len),
            monotone: decreasing_steps + 1 == deviations.len().max(1),
            final_gap: *deviations.last().unwrap_or(&f64::NAN),
            means,
            std_errors,
            deviations,
            decreasing_steps,
            raw,
        }
    }

    /// `n,replication,value` rows.
    pub fn raw_csv(&self) -> String {
        let mut s = String::from("n,replication,value\n");
        for (n, vals) in self.n_grid.iter().zip(&self.raw) {
            for (r, v) in vals.iter().enumerate() {
                let _ = writeln!(s, "{n},{r},{v}");
            }
        }
        s
    }
}

fn guard(result: CensusResult) -> Result<CensusResult> {
    if result.identity_holds() {
        Ok(result)
    } else {
        Err(Error::Internal(format!(
            "m * total != sum of per-vertex counts at n = {}",
            result.n
        )))
    }
}

/// Census of one fresh sample of size `n`; `m = 2` families skip the graph.
pub fn census_replication(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    n: usize,
    key: u64,
) -> Result<CensusResult> {
    let w = law.sample(n, key)?;
    let res = if family.m() == 2 {
        census::edge_census_from_weights(rule, &w, family)?
    } else {
        census::census_global(&Graph::build(rule, &w)?, family)?
    };
    guard(res)
}

/// `F(C, A_m)`, by quadrature for `m <= 3` and Monte Carlo beyond.
pub fn census_target(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    seed: u64,
) -> Result<LimitEstimate> {
    if family.m() <= 3 {
        limits::f_limit(law, rule, family)
    } else {
        limits::f_limit_mc(
            law,
            rule,
            family,
            MC_LIMIT_SAMPLES,
            derive_seed(seed, u64::MAX),
        )
    }
}

/// Strong law for the normalized census `Ũ_n / C(n, m)`.
pub fn check_slln_global(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    n_grid: &[usize],
    replications: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    check_grid(n_grid, replications, family.m())?;
    let target = census_target(law, rule, family, seed)?;
    let raw = n_grid
        .iter()
        .map(|&n| {
            (0..replications)
                .into_par_iter()
                .map(|r| {
                    Ok(
                        census_replication(law, rule, family, n, replication_seed(seed, n, r))?
                            .normalized,
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceReport::new(
        "normalized_census",
        target,
        n_grid,
        raw,
    ))
}

/// Standardized census against the standard normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub replications: usize,
    pub f_limit: LimitEstimate,
    pub zeta: LimitEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta_cross_check: Option<LimitEstimate>,
    pub mean: f64,
    pub variance: f64,
    pub ks: KsResult,
    #[serde(skip)]
    pub sample: Vec<f64>,
}

/// `ζ` by quadrature, refusing values too small for the CLT scaling.
pub fn positive_zeta(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
) -> Result<LimitEstimate> {
    let z = limits::zeta(law, rule, family, ZetaMethod::Quadrature)?;
    if z.value < limits::ZETA_MIN {
        return Err(Error::ZetaZero);
    }
    Ok(z)
}

/// `sqrt(n / (m² ζ)) (Ũ_n / C(n, m) - F)` over independent replications.
/// `cross_check` optionally adds a nested Monte Carlo `ζ` estimate.
pub fn check_clt(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    n: usize,
    replications: usize,
    seed: u64,
    cross_check: Option<(usize, usize)>,
) -> Result<CltReport> {
    check_grid(&[n], replications, family.m())?;
    let zeta = positive_zeta(law, rule, family)?;
    let f = census_target(law, rule, family, seed)?;
    let m = family.m() as f64;
    let scale = (n as f64 / (m * m * zeta.value)).sqrt();
    let sample: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let res = census_replication(law, rule, family, n, replication_seed(seed, n, r))?;
            Ok(scale * (res.normalized - f.value))
        })
        .collect::<Result<_>>()?;
    let zeta_cross_check = match cross_check {
        Some((outer, inner)) => Some(limits::zeta(
            law,
            rule,
            family,
            ZetaMethod::NestedMc {
                outer,
                inner,
                seed: derive_seed(seed, u64::MAX - 1),
            },
        )?),
        None => None,
    };
    let ks = stats::ks_test(
        &sample,
        &stats::ContinuousTarget(stats::standard_normal_cdf),
    );
    Ok(CltReport {
        n,
        replications,
        f_limit: f,
        zeta,
        zeta_cross_check,
        mean: stats::mean(&sample),
        variance: stats::variance(&sample),
        ks,
        sample,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LilPoint {
    pub n: usize,
    pub normalized_census: f64,
    pub deviation: f64,
    /// `sqrt(n / (2 m² ζ log log n)) |Ũ_n / C(n, m) - F|`.
    pub lil_value: f64,
}

/// One long trajectory checked against the LIL envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LilReport {
    pub n_max: usize,
    pub f_limit: LimitEstimate,
    pub zeta: LimitEstimate,
    pub points: Vec<LilPoint>,
    pub running_max: f64,
    pub envelope: f64,
    /// Every checkpoint lies in `[0, envelope]`.
    pub within_envelope: bool,
    /// The running maximum reached `LIL_FLOOR`.
    pub reaches_floor: bool,
}

/// Geometric checkpoints from `min(LIL_MIN_N, n_max)` to `n_max`.
pub fn lil_checkpoints(n_max: usize, count: usize) -> Vec<usize> {
    let start = LIL_MIN_N.min(n_max).max(3);
    if count <= 1 || n_max <= start {
        return vec![n_max];
    }
    let ratio = (n_max as f64 / start as f64).powf(1.0 / (count - 1) as f64);
    let mut pts: Vec<usize> = (0..count)
        .map(|i| (start as f64 * ratio.powi(i as i32)).round() as usize)
        .collect();
    *pts.last_mut().unwrap() = n_max;
    pts.dedup();
    pts
}

/// Censuses of the prefixes `weights[..n]` for each checkpoint `n`.
fn prefix_censuses(
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    weights: &[f64],
    checkpoints: &[usize],
) -> Result<Vec<CensusResult>> {
    if family.m() != 2 {
        return checkpoints
            .iter()
            .map(|&n| {
                guard(census::census_global(
                    &Graph::build(rule, &weights[..n])?,
                    family,
                )?)
            })
            .collect();
    }
    if rule.as_sum_clause().is_some() {
        return checkpoints
            .iter()
            .map(|&n| {
                guard(census::edge_census_from_weights(
                    rule,
                    &weights[..n],
                    family,
                )?)
            })
            .collect();
    }
    // Block scan: each new vertex is compared with its predecessors once.
    let mut degrees = vec![0u64; *checkpoints.last().unwrap_or(&0)];
    let mut edges = 0u64;
    let mut done = 0usize;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        for i in done..n {
            for j in 0..i {
                if rule.edge(weights[i], weights[j])? {
                    edges += 1;
                    degrees[i] += 1;
                    degrees[j] += 1;
                }
            }
        }
        done = n;
        let (with_edge, without) = (
            family.contains_mask(1) as u64,
            family.contains_mask(0) as u64,
        );
        let per_vertex = degrees[..n]
            .iter()
            .map(|&d| with_edge * d + without * (n as u64 - 1 - d))
            .collect();
        let total = with_edge * edges + without * (binomial(n as u64, 2) - edges);
        out.push(guard(CensusResult::from_parts(
            n,
            family,
            total,
            Some(per_vertex),
        ))?);
    }
    Ok(out)
}

pub fn check_lil(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    n_max: usize,
    checkpoints: usize,
    seed: u64,
) -> Result<LilReport> {
    if n_max < family.m().max(3) {
        return Err(Error::TooFewVertices {
            needed: family.m().max(3),
            n: n_max,
        });
    }
    let zeta = positive_zeta(law, rule, family)?;
    let f = census_target(law, rule, family, seed)?;
    let weights = law.sample(n_max, seed)?;
    let grid = lil_checkpoints(n_max, checkpoints);
    let m = family.m() as f64;
    let points: Vec<LilPoint> = prefix_censuses(rule, family, &weights, &grid)?
        .into_iter()
        .map(|res| {
            let nf = res.n as f64;
            let deviation = res.normalized - f.value;
            let loglog = nf.ln().ln();
            LilPoint {
                n: res.n,
                normalized_census: res.normalized,
                deviation,
                lil_value: (nf / (2.0 * m * m * zeta.value * loglog)).sqrt() * deviation.abs(),
            }
        })
        .collect();
    let running_max = points.iter().map(|p| p.lil_value).fold(0.0, f64::max);
    let within_envelope = points
        .iter()
        .all(|p| (0.0..=LIL_ENVELOPE).contains(&p.lil_value));
    Ok(LilReport {
        n_max,
        f_limit: f,
        zeta,
        points,
        running_max,
        envelope: LIL_ENVELOPE,
        within_envelope,
        reaches_floor: running_max >= LIL_FLOOR,
    })
}

/// Target of the local-limit comparison.
pub enum LocalTarget {
    Law(MixedLaw),
    /// Sorted draws of `g(X_1)`, used as an empirical stand-in.
    Sampled(Vec<f64>),
}

impl TargetCdf for LocalTarget {
    fn cdf_at(&self, x: f64) -> f64 {
        match self {
            LocalTarget::Law(l) => l.cdf_at(x),
            LocalTarget::Sampled(v) => v.partition_point(|&y| y <= x) as f64 / v.len() as f64,
        }
    }
    fn cdf_left_at(&self, x: f64) -> f64 {
        match self {
            LocalTarget::Law(l) => l.cdf_left_at(x),
            LocalTarget::Sampled(v) => v.partition_point(|&y| y < x) as f64 / v.len() as f64,
        }
    }
    fn atom_locations(&self) -> Vec<f64> {
        match self {
            LocalTarget::Law(l) => l.atom_locations(),
            LocalTarget::Sampled(v) => {
                let mut a = v.clone();
                a.dedup();
                a
            }
        }
    }
}

/// Law of `U(C, A_m) = g(X_1)`: closed form where available, exact atoms
/// for discrete weights, otherwise `samples` draws of `g(X_1)`.
pub fn local_target(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    samples: usize,
    seed: u64,
) -> Result<(LocalTarget, &'static str)> {
    let is_edges = family.m() == 2 && family.contains_mask(1) && !family.contains_mask(0);
    if is_edges {
        match limits::degree_law(law, rule) {
            Ok(l) => return Ok((LocalTarget::Law(l), "closed_form")),
            Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if !law.is_continuous() {
        let atoms = law
            .atoms()
            .into_iter()
            .map(|(v, mass)| {
                Ok(limits::Atom {
                    at: limits::conditional_kernel_mean(law, rule, family, v)?,
                    mass,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((
            LocalTarget::Law(MixedLaw::new(atoms, Vec::new())?),
            "exact_atoms",
        ));
    }
    let mut vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| limits::conditional_kernel_mean(law, rule, family, law.draw(seed, s as u64)))
        .collect::<Result<_>>()?;
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok((LocalTarget::Sampled(vals), "sampled"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalLimitReport {
    pub n: usize,
    pub replications: usize,
    pub target_kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_law: Option<MixedLaw>,
    pub ks: KsResult,
    #[serde(skip)]
    pub sample: Vec<f64>,
}

/// Normalized local census of vertex 0, one per replication.
pub fn local_census_sample(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_grid(&[n], replications, family.m())?;
    let norm = binomial(n as u64 - 1, family.m() as u64 - 1) as f64;
    (0..replications)
        .into_par_iter()
        .map(|r| {
            let w = law.sample(n, replication_seed(seed, n, r))?;
            let count = if family.m() == 2 {
                let d = degree_from_weights(rule, &w, 0)?;
                family.contains_mask(1) as u64 * d
                    + family.contains_mask(0) as u64 * (n as u64 - 1 - d)
            } else {
                census::census_local(&Graph::build(rule, &w)?, family, 0)?
            };
            Ok(count as f64 / norm)
        })
        .collect()
}

/// Local limit law of `U_n(C, A_m; 1) / C(n - 1, m - 1)`.
pub fn check_local_limit(
    law: &WeightLaw,
    rule: &ConnectionRule,
    family: &SubgraphFamily,
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<LocalLimitReport> {
    let sample = local_census_sample(law, rule, family, n, replications, seed)?;
    let samples = (20 * replications).max(10_000);
    let (target, kind) = local_target(law, rule, family, samples, derive_seed(seed, u64::MAX))?;
    let ks = stats::ks_test(&sample, &target);
    let target_law = match target {
        LocalTarget::Law(l) => Some(l),
        LocalTarget::Sampled(_) => None,
    };
    Ok(LocalLimitReport {
        n,
        replications,
        target_kind: kind.to_string(),
        target_law,
        ks,
        sample,
    })
}

/// Per-bin comparison of normalized degrees with a limit law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinCheckReport {
    pub n: usize,
    pub replications: usize,
    pub total_mass: f64,
    /// Inner bin edges; the first and last bins are open-ended.
    pub edges: Vec<f64>,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub max_z: f64,
    pub sigmas: f64,
    pub pass: bool,
    #[serde(skip)]
    pub sample: Vec<f64>,
}

/// `bins` equal bins over the support hull of the limit law, with the
/// outer two bins absorbing everything beyond the hull, compared within
/// `sigmas` binomial standard errors.
pub fn check_degree_bins(
    law: &WeightLaw,
    rule: &ConnectionRule,
    n: usize,
    replications: usize,
    seed: u64,
    bins: usize,
    sigmas: f64,
) -> Result<BinCheckReport> {
    if bins < 2 {
        return Err(Error::InvalidArgument("need at least 2 bins".into()));
    }
    let target = limits::degree_law(law, rule)?;
    let total_mass = target.total_mass()?;
    let sample = local_census_sample(law, rule, &SubgraphFamily::edges(), n, replications, seed)?;
    let (lo, hi) = target.support_hull();
    let edges: Vec<f64> = (1..bins)
        .map(|j| lo + (hi - lo) * j as f64 / bins as f64)
        .collect();
    let bin_of = |k: f64| edges.partition_point(|&e| e <= k);
    let mut counts = vec![0usize; bins];
    for &k in &sample {
        counts[bin_of(k)] += 1;
    }
    let mut cum = Vec::with_capacity(bins + 1);
    cum.push(0.0);
    for &e in &edges {
        cum.push(target.cdf_left(e)?);
    }
    cum.push(1.0);
    let r = replications as f64;
    let expected: Vec<f64> = cum.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
    let std_errors: Vec<f64> = expected
        .iter()
        .map(|p| (p * (1.0 - p) / r).sqrt())
        .collect();
    let mut max_z: f64 = 0.0;
    let mut pass = true;
    for ((o, e), s) in observed.iter().zip(&expected).zip(&std_errors) {
        let gap = (o - e).abs();
        if gap > sigmas * s {
            pass = false;
        }
        if *s > 0.0 {
            max_z = max_z.max(gap / s);
        } else if gap > 0.0 {
            max_z = f64::INFINITY;
        }
    }
    Ok(BinCheckReport {
        n,
        replications,
        total_mass,
        edges,
        observed,
        expected,
        std_errors,
        max_z,
        sigmas,
        pass,
        sample,
    })
}

/// Exact sup over `theta` of `|#{s_ij > theta} / C(n, 2) - P(X + X' > theta)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupDeviationEntry {
    pub n: usize,
    pub sup: f64,
    pub theta_star: f64,
    /// The sup is the limit as `theta` increases to `theta_star`.
    pub from_left: bool,
}

/// Sweep over the pairwise sums of `weights`. The empirical function only
/// jumps at the sums and the analytic one is monotone, so the sup is
/// attained at a breakpoint from one side or the other.
pub fn sup_deviation_of_weights(law: &WeightLaw, weights: &[f64]) -> Result<SupDeviationEntry> {
    let n = weights.len();
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, n });
    }
    if n > SUP_DEV_MAX_N {
        return Err(Error::GraphTooLarge {
            n,
            cap: SUP_DEV_MAX_N,
        });
    }
    let mut sums = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            sums.push(weights[i] + weights[j]);
        }
    }
    sums.sort_by(|a, b| a.total_cmp(b));
    let total = sums.len() as f64;
    let mut best = SupDeviationEntry {
        n,
        sup: 0.0,
        theta_star: sums[0],
        from_left: true,
    };
    let mut start = 0usize;
    while start < sums.len() {
        let b = sums[start];
        let mut end = start;
        while end < sums.len() && sums[end] == b {
            end += 1;
        }
        let at = ((sums.len() - end) as f64 / total - limits::sum_survival(law, b, true)?).abs();
        let left =
            ((sums.len() - start) as f64 / total - limits::sum_survival(law, b, false)?).abs();
        if left > best.sup {
            best = SupDeviationEntry {
                n,
                sup: left,
                theta_star: b,
                from_left: true,
            };
        }
        if at > best.sup {
            best = SupDeviationEntry {
                n,
                sup: at,
                theta_star: b,
                from_left: false,
            };
        }
        start = end;
    }
    Ok(best)
}

// TODO: extend the sweep to finite interval unions and the Max/Min connectors.
pub fn sup_deviation_halfintervals(
    law: &WeightLaw,
    n: usize,
    seed: u64,
) -> Result<SupDeviationEntry> {
    if n > SUP_DEV_MAX_N {
        return Err(Error::GraphTooLarge {
            n,
            cap: SUP_DEV_MAX_N,
        });
    }
    sup_deviation_of_weights(law, &law.sample(n, seed)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupDeviationReport {
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub mean_sup: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub strictly_decreasing: bool,
    pub entries: Vec<Vec<SupDeviationEntry>>,
}

pub fn check_sup_deviation(
    law: &WeightLaw,
    n_grid: &[usize],
    replications: usize,
    seed: u64,
) -> Result<SupDeviationReport> {
    check_grid(n_grid, replications, 2)?;
    let entries: Vec<Vec<SupDeviationEntry>> = n_grid
        .iter()
        .map(|&n| {
            (0..replications)
                .into_par_iter()
                .map(|r| sup_deviation_halfintervals(law, n, replication_seed(seed, n, r)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let sups: Vec<Vec<f64>> = entries
        .iter()
        .map(|v| v.iter().map(|e| e.sup).collect())
        .collect();
    let mean_sup: Vec<f64> = sups.iter().map(|v| stats::mean(v)).collect();
    Ok(SupDeviationReport {
        n_grid: n_grid.to_vec(),
        replications,
        strictly_decreasing: mean_sup.windows(2).all(|w| w[1] < w[0]),
        std_errors: sups.iter().map(|v| stats::std_error(v)).collect(),
        mean_sup,
        entries,
    })
}

/// Clustering statistics along a size grid against their limits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringLimitReport {
    pub w: f64,
    pub global: ConvergenceReport,
    /// Absent when the filtered limit is undefined (asymptotically empty graph).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtered: Option<ConvergenceReport>,
    pub isolated: ConvergenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local: Option<LocalClusteringReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalClusteringReport {
    pub pinned_weight: f64,
    pub limits: limits::LocalLimits,
    pub report: ConvergenceReport,
}

pub fn check_clustering_limits(
    law: &WeightLaw,
    rule: &ConnectionRule,
    n_grid: &[usize],
    replications: usize,
    w: f64,
    seed: u64,
    pin: Option<f64>,
) -> Result<ClusteringLimitReport> {
    check_grid(n_grid, replications, 1)?;
    let cfg = ClusteringConfig::new(w)?;
    let exact = |v: f64| LimitEstimate {
        value: v,
        std_error: None,
        method: limits::Method::Quadrature,
    };
    let global_target = exact(limits::expected_global_cc(law, rule, w)?);
    let isolated_target = exact(limits::prob_isolated(law, rule)?);
    let filtered_target = match limits::expected_filtered_cc(law, rule) {
        Ok(v) => Some(exact(v)),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    let summaries: Vec<Vec<ClusteringSummary>> = n_grid
        .iter()
        .map(|&n| {
            (0..replications)
                .into_par_iter()
                .map(|r| {
                    let g = Graph::build(rule, &law.sample(n, replication_seed(seed, n, r))?)?;
                    Ok(ClusteringSummary::compute(&g, cfg))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let column = |f: &dyn Fn(&ClusteringSummary) -> Option<f64>| -> Vec<Vec<f64>> {
        summaries
            .iter()
            .map(|v| v.iter().filter_map(f).collect())
            .collect()
    };
    let global = ConvergenceReport::new(
        "global_cc",
        global_target,
        n_grid,
        column(&|s| Some(s.global_cc)),
    );
    let isolated = ConvergenceReport::new(
        "fraction_degree_le_1",
        isolated_target,
        n_grid,
        column(&|s| Some(s.fraction_degree_le_1)),
    );
    let filtered = filtered_target
        .map(|t| ConvergenceReport::new("filtered_cc", t, n_grid, column(&|s| s.filtered_cc)));
    let local = match pin {
        Some(x) => {
            let lim = limits::local_limits(law, rule, x, w)?;
            let raw = n_grid
                .iter()
                .map(|&n| {
                    (0..replications)
                        .into_par_iter()
                        .map(|r| {
                            let key = derive_seed(replication_seed(seed, n, r), 1);
                            let g = Graph::build_conditioned(rule, law, n, key, (0, x))?;
                            local_cc(&g, 0, cfg)
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?;
            let report = ConvergenceReport::new("local_cc", exact(lim.c), n_grid, raw);
            Some(LocalClusteringReport {
                pinned_weight: x,
                limits: lim,
                report,
            })
        }
        None => None,
    };
    Ok(ClusteringLimitReport {
        w,
        global,
        filtered,
        isolated,
        local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{BorelSet, Connector};

    fn complete_rule() -> ConnectionRule {
        ConnectionRule::single(Connector::Sum, BorelSet::full_line())
    }

    #[test]
    fn slln_complete_graph_is_exact() {
        let law = WeightLaw::exponential(1.0).unwrap();
        for fam in [SubgraphFamily::edges(), SubgraphFamily::triangle()] {
            let rep = check_slln_global(&law, &complete_rule(), &fam, &[10, 20], 3, 1).unwrap();
            assert!(rep.deviations.iter().all(|&d| d < 1e-9), "{rep:?}");
        }
    }

    #[test]
    fn slln_bernoulli_edges() {
        let law = WeightLaw::bernoulli(0.5).unwrap();
        let rep = check_slln_global(
            &law,
            &ConnectionRule::threshold(0.5),
            &SubgraphFamily::edges(),
            &[100, 400, 1600],
            50,
            4,
        )
        .unwrap();
        // Bounded statistic: Var <= 1/4 per replication mean.
        assert!(rep.final_gap < 3.0 * (0.25f64 / 50.0).sqrt());
    }

    #[test]
    fn clt_refuses_zero_zeta() {
        let law = WeightLaw::exponential(1.0).unwrap();
        let r = check_clt(
            &law,
            &complete_rule(),
            &SubgraphFamily::edges(),
            100,
            10,
            1,
            None,
        );
        assert_eq!(r.unwrap_err(), Error::ZetaZero);
        assert_eq!(
            check_lil(&law, &complete_rule(), &SubgraphFamily::edges(), 2000, 5, 1).unwrap_err(),
            Error::ZetaZero
        );
    }

    #[test]
    fn lil_checkpoints_geometric() {
        let c = lil_checkpoints(100_000, 20);
        assert_eq!(c.len(), 20);
        assert_eq!(c[0], 1000);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn prefix_paths_agree() {
        // The sorted-sum path and the block scan count the same prefixes.
        let law = WeightLaw::exponential(1.0).unwrap();
        let w = law.sample(600, 8).unwrap();
        let grid = [50, 200, 600];
        let fam = SubgraphFamily::edges();
        let fast = prefix_censuses(&ConnectionRule::threshold(1.0), &fam, &w, &grid).unwrap();
        let both = ConnectionRule::new(vec![
            crate::rules::Clause {
                connector: Connector::Sum,
                set: BorelSet::above(1.0),
            },
            crate::rules::Clause {
                connector: Connector::Max,
                set: BorelSet::full_line(),
            },
        ])
        .unwrap();
        let slow = prefix_censuses(&both, &fam, &w, &grid).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert_eq!(a.total, b.total);
            assert_eq!(a.per_vertex, b.per_vertex);
        }
    }

    #[test]
    fn local_limit_complete_graph() {
        let law = WeightLaw::uniform01();
        let rep = check_local_limit(
            &law,
            &ConnectionRule::threshold(-1.0),
            &SubgraphFamily::edges(),
            200,
            20,
            3,
        )
        .unwrap();
        assert!(rep.sample.iter().all(|&k| k == 1.0));
        assert_eq!(rep.ks.ks_distance, 0.0);
    }

    #[test]
    fn local_limit_sampled_target() {
        // Triangle-local law has no closed form; the sampled target should fit.
        let law = WeightLaw::uniform01();
        let rep = check_local_limit(
            &law,
            &ConnectionRule::threshold(1.0),
            &SubgraphFamily::triangle(),
            300,
            200,
            5,
        )
        .unwrap();
        assert_eq!(rep.target_kind, "sampled");
        assert!(rep.ks.ks_distance < 0.15, "{:?}", rep.ks);
    }

    fn dense_grid_oracle(law: &WeightLaw, w: &[f64]) -> f64 {
        let mut sums = Vec::new();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                sums.push(w[i] + w[j]);
            }
        }
        let n = sums.len() as f64;
        let emp = |t: f64| sums.iter().filter(|&&s| s > t).count() as f64 / n;
        let dev = |t: f64| (emp(t) - limits::sum_survival(law, t, true).unwrap()).abs();
        let lo = sums.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let mut best: f64 = 0.0;
        for k in 0..=1_000_000 {
            best = best.max(dev(lo + (hi - lo) * k as f64 / 1_000_000.0));
        }
        for &s in &sums {
            best = best
                .max(dev(s.next_down()))
                .max(dev(s))
                .max(dev(s.next_up()));
        }
        best
    }

    #[test]
    fn sup_sweep_matches_dense_grid() {
        let law = WeightLaw::exponential(1.0).unwrap();
        for seed in 0..50u64 {
            let n = 2 + (seed as usize % 11);
            let w = law.sample(n, seed).unwrap();
            let exact = sup_deviation_of_weights(&law, &w).unwrap().sup;
            let oracle = dense_grid_oracle(&law, &w);
            assert!(oracle <= exact + 1e-12, "seed {seed}: {oracle} > {exact}");
            assert!(exact - oracle < 1e-9, "seed {seed}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn sup_two_points() {
        let law = WeightLaw::uniform01();
        let w = [0.3, 0.9];
        let s: f64 = 1.2;
        // Sum CDF is triangular; for a continuous law both one-sided forms coincide.
        let f2 = 1.0 - limits::sum_survival(&law, s, true).unwrap();
        let e = sup_deviation_of_weights(&law, &w).unwrap();
        assert!((e.sup - f2.max(1.0 - f2)).abs() < 1e-15);
    }

    #[test]
    fn sup_two_points_with_atoms() {
        // Bernoulli(1/2), both weights 1: the sup is F2(2-) = 3/4, attained just below 2.
        let law = WeightLaw::bernoulli(0.5).unwrap();
        let e = sup_deviation_of_weights(&law, &[1.0, 1.0]).unwrap();
        assert!((e.sup - 0.75).abs() < 1e-15);
        assert_eq!(e.theta_star, 2.0);
        assert!(e.from_left);
    }

    #[test]
    fn sup_degenerate_law() {
        let law = WeightLaw::bernoulli(1.0).unwrap();
        assert_eq!(sup_deviation_halfintervals(&law, 30, 2).unwrap().sup, 0.0);
        assert!(sup_deviation_halfintervals(&law, SUP_DEV_MAX_N + 1, 2).is_err());
    }

    #[test]
    fn clustering_complete_graph() {
        let law = WeightLaw::uniform01();
        let rep = check_clustering_limits(&law, &complete_rule(), &[20, 40], 3, 0.0, 7, Some(0.5))
            .unwrap();
        assert!(rep.global.means.iter().all(|&m| m == 1.0));
        assert_eq!(rep.global.target, 1.0);
        assert!(rep.local.unwrap().report.means.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let law = WeightLaw::bernoulli(0.5).unwrap();
        let r = ConnectionRule::threshold(0.5);
        let a = check_clustering_limits(&law, &r, &[60], 4, 0.0, 11, Some(0.0)).unwrap();
        let b = check_clustering_limits(&law, &r, &[60], 4, 0.0, 11, Some(0.0)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.global.raw, b.global.raw);
    }
}
