//! Subgraph families, the census kernel, and exact subgraph counts.
//!
//! A family is a union of isomorphism classes of graphs on `m` labeled
//! vertices (`2 <= m <= 5`). Graphs on `m` vertices are encoded as bitmasks
//! over the `m(m-1)/2` vertex pairs in lexicographic order
//! `(0,1), (0,2), ..., (m-2,m-1)`.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rules::ConnectionRule;

pub const MIN_M: usize = 2;
pub const MAX_M: usize = 5;
/// Subset enumeration (m >= 4) works on 64-bit vertex sets.
pub const ENUMERATION_MAX_N: usize = 64;

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

#[inline]
pub fn pair_count(m: usize) -> usize {
    m * (m - 1) / 2
}

/// Bit position of the pair `(a, b)`, `a < b < m`.
#[inline]
pub fn pair_index(m: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < m);
    a * (2 * m - a - 1) / 2 + (b - a - 1)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

fn permute_mask(m: usize, mask: u16, perm: &[usize]) -> u16 {
    let mut out = 0u16;
    for a in 0..m {
        for b in a + 1..m {
            if mask >> pair_index(m, a, b) & 1 == 1 {
                let (pa, pb) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                out |= 1 << pair_index(m, pa, pb);
            }
        }
    }
    out
}

/// `table[mask]` = lexicographically smallest relabeling of `mask`.
pub fn canonical_table(m: usize) -> &'static [u16] {
    static TABLES: [OnceLock<Vec<u16>>; MAX_M + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    assert!((MIN_M..=MAX_M).contains(&m), "m out of range");
    TABLES[m].get_or_init(|| {
        let perms = permutations(m);
        (0..1u32 << pair_count(m))
            .map(|mask| {
                perms
                    .iter()
                    .map(|p| permute_mask(m, mask as u16, p))
                    .min()
                    .unwrap()
            })
            .collect()
    })
}

pub fn canonical_form(m: usize, mask: u16) -> u16 {
    canonical_table(m)[mask as usize]
}

/// Isomorphism-closed collection of graphs on `m` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphFamily {
    name: String,
    m: usize,
    /// Canonical representatives, ascending.
    classes: Vec<u16>,
    /// Membership of every labeled mask.
    member: Vec<bool>,
}

impl SubgraphFamily {
    /// Closure of the given labeled masks under relabeling.
    pub fn from_masks(name: impl Into<String>, m: usize, masks: &[u16]) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) {
            return Err(Error::InvalidFamily(format!(
                "m = {m} outside {MIN_M}..={MAX_M}"
            )));
        }
        let limit = 1u32 << pair_count(m);
        let table = canonical_table(m);
        let mut classes = BTreeSet::new();
        for &mask in masks {
            if mask as u32 >= limit {
                return Err(Error::InvalidFamily(format!(
                    "mask {mask:#x} too wide for m = {m}"
                )));
            }
            classes.insert(table[mask as usize]);
        }
        let member = (0..limit)
            .map(|mask| classes.contains(&table[mask as usize]))
            .collect();
        Ok(Self {
            name: name.into(),
            m,
            classes: classes.into_iter().collect(),
            member,
        })
    }

    /// Family generated by labeled graphs given as 0-indexed edge lists.
    pub fn from_edge_lists(
        name: impl Into<String>,
        m: usize,
        graphs: &[Vec<(usize, usize)>],
    ) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) {
            return Err(Error::InvalidFamily(format!(
                "m = {m} outside {MIN_M}..={MAX_M}"
            )));
        }
        let mut masks = Vec::with_capacity(graphs.len());
        for edges in graphs {
            let mut mask = 0u16;
            for &(a, b) in edges {
                if a == b || a >= m || b >= m {
                    return Err(Error::InvalidFamily(format!(
                        "bad edge ({a}, {b}) for m = {m}"
                    )));
                }
                mask |= 1 << pair_index(m, a.min(b), a.max(b));
            }
            masks.push(mask);
        }
        Self::from_masks(name, m, &masks)
    }

    /// All graphs on `m` vertices with exactly `k` edges.
    pub fn with_edge_count(name: impl Into<String>, m: usize, k: u32) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) {
            return Err(Error::InvalidFamily(format!(
                "m = {m} outside {MIN_M}..={MAX_M}"
            )));
        }
        let masks: Vec<u16> = (0..1u32 << pair_count(m))
            .filter(|x| x.count_ones() == k)
            .map(|x| x as u16)
            .collect();
        Self::from_masks(name, m, &masks)
    }

    /// An edge on two vertices.
    pub fn edges() -> Self {
        Self::from_masks("edges", 2, &[1]).unwrap()
    }

    pub fn non_edges() -> Self {
        Self::from_masks("non_edges", 2, &[0]).unwrap()
    }

    pub fn triangle() -> Self {
        Self::clique(3).unwrap().renamed("triangle")
    }

    /// Induced path on three vertices (exactly two of the three edges).
    pub fn wedge() -> Self {
        Self::with_edge_count("wedge", 3, 2).unwrap()
    }

    pub fn clique(m: usize) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) {
            return Err(Error::InvalidFamily(format!(
                "m = {m} outside {MIN_M}..={MAX_M}"
            )));
        }
        Self::from_masks(
            format!("clique{m}"),
            m,
            &[((1u32 << pair_count(m)) - 1) as u16],
        )
    }

    pub fn empty(m: usize) -> Result<Self> {
        Self::from_masks(format!("empty{m}"), m, &[0])
    }

    /// Cliques together with edgeless graphs on `m` vertices.
    pub fn clique_or_empty(m: usize) -> Result<Self> {
        let full = ((1u32 << pair_count(m.clamp(MIN_M, MAX_M))) - 1) as u16;
        Self::from_masks(format!("clique_or_empty{m}"), m, &[full, 0])
    }

    /// Triangles together with one edge plus an isolated vertex.
    pub fn triangle_or_edge() -> Self {
        Self::from_masks("triangle_or_edge", 3, &[0b111, 0b001]).unwrap()
    }

    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Catalog lookup; `m` is required for the size-generic names.
    pub fn by_name(name: &str, m: Option<usize>) -> Result<Self> {
        let need_m = || m.ok_or_else(|| Error::InvalidFamily(format!("family '{name}' needs m")));
        let fixed = |fam: Self| match m {
            Some(mm) if mm != fam.m => Err(Error::InvalidFamily(format!(
                "family '{name}' has m = {}, not {mm}",
                fam.m
            ))),
            _ => Ok(fam),
        };
        match name {
            "edges" | "edge" => fixed(Self::edges()),
            "non_edges" => fixed(Self::non_edges()),
            "triangle" | "triangles" => fixed(Self::triangle()),
            "wedge" | "wedges" => fixed(Self::wedge()),
            "triangle_or_edge" => fixed(Self::triangle_or_edge()),
            "clique" => Self::clique(need_m()?),
            "empty" => Self::empty(need_m()?),
            "clique_or_empty" => Self::clique_or_empty(need_m()?),
            other => Err(Error::InvalidFamily(format!("unknown family '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn classes(&self) -> &[u16] {
        &self.classes
    }

    #[inline]
    pub fn contains_mask(&self, mask: u16) -> bool {
        self.member[mask as usize]
    }

    /// The graph on `m` vertices with exactly `k` edges is in the family,
    /// for m <= 3 where edge count determines the class.
    fn has_edge_count(&self, k: u32) -> bool {
        debug_assert!(self.m <= 3);
        (0..self.member.len()).any(|mask| (mask as u32).count_ones() == k && self.member[mask])
    }

    /// `h(xs)`: whether the graph induced on the weights `xs` belongs to the family.
    pub fn kernel(&self, rule: &ConnectionRule, xs: &[f64]) -> Result<bool> {
        if xs.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "kernel of an m = {} family needs {} weights, got {}",
                self.m,
                self.m,
                xs.len()
            )));
        }
        Ok(self.contains_mask(induced_mask_of_weights(rule, xs)?))
    }
}

/// Mask of the graph `rule` induces on `xs`.
pub fn induced_mask_of_weights(rule: &ConnectionRule, xs: &[f64]) -> Result<u16> {
    let m = xs.len();
    let mut mask = 0u16;
    for a in 0..m {
        for b in a + 1..m {
            if rule.edge(xs[a], xs[b])? {
                mask |= 1 << pair_index(m, a, b);
            }
        }
    }
    Ok(mask)
}

/// Mask of the subgraph of `graph` induced on `vertices` (in that order).
pub fn induced_mask(graph: &Graph, vertices: &[usize]) -> u16 {
    let m = vertices.len();
    let mut mask = 0u16;
    for a in 0..m {
        for b in a + 1..m {
            if graph.has_edge(vertices[a], vertices[b]) {
                mask |= 1 << pair_index(m, a, b);
            }
        }
    }
    mask
}

/// Family as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Generating graphs as 0-indexed edge lists, for `name = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graphs: Option<Vec<Vec<[usize; 2]>>>,
}

impl FamilySpec {
    pub fn named(name: &str, m: Option<usize>) -> Self {
        Self {
            name: name.to_string(),
            m,
            graphs: None,
        }
    }

    pub fn resolve(&self) -> Result<SubgraphFamily> {
        if self.name == "custom" {
            let m = self
                .m
                .ok_or_else(|| Error::InvalidFamily("custom family needs m".into()))?;
            let graphs = self
                .graphs
                .as_ref()
                .ok_or_else(|| Error::InvalidFamily("custom family needs graphs".into()))?;
            let lists: Vec<Vec<(usize, usize)>> = graphs
                .iter()
                .map(|g| g.iter().map(|e| (e[0], e[1])).collect())
                .collect();
            return SubgraphFamily::from_edge_lists("custom", m, &lists);
        }
        SubgraphFamily::by_name(&self.name, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusResult {
    pub n: usize,
    pub m: usize,
    pub family: String,
    pub total: u64,
    /// `total / C(n, m)`.
    pub normalized: f64,
    pub binom_n_m: u64,
    pub binom_n1_m1: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_vertex: Option<Vec<u64>>,
}

impl CensusResult {
    pub(crate) fn from_parts(
        n: usize,
        family: &SubgraphFamily,
        total: u64,
        per_vertex: Option<Vec<u64>>,
    ) -> Self {
        let m = family.m;
        let binom_n_m = binomial(n as u64, m as u64);
        Self {
            n,
            m,
            family: family.name.clone(),
            total,
            normalized: total as f64 / binom_n_m as f64,
            binom_n_m,
            binom_n1_m1: binomial(n as u64 - 1, m as u64 - 1),
            per_vertex,
        }
    }

    /// `m * total == sum of per-vertex counts`.
    pub fn identity_holds(&self) -> bool {
        match &self.per_vertex {
            Some(pv) => self.m as u64 * self.total == pv.iter().sum::<u64>(),
            None => true,
        }
    }

    pub fn without_per_vertex(mut self) -> Self {
        self.per_vertex = None;
        self
    }
}

pub fn degree(graph: &Graph, i: usize) -> Result<u64> {
    graph.check_vertex(i)?;
    Ok(graph.neighbors(i).len() as u64)
}

/// Triangles through vertex `i`.
pub fn triangles_at(graph: &Graph, i: usize) -> Result<u64> {
    graph.check_vertex(i)?;
    let twice: u64 = graph
        .neighbors(i)
        .iter()
        .map(|&j| graph.common_neighbors(i, j as usize))
        .sum();
    Ok(twice / 2)
}

/// Pairs of neighbors of `i`: `C(D_n(i), 2)`.
pub fn wedges_at(graph: &Graph, i: usize) -> Result<u64> {
    Ok(binomial(degree(graph, i)?, 2))
}

/// Per-vertex degree, triangle count, and neighbor-degree sum.
pub(crate) struct LocalCounts {
    pub degree: Vec<u64>,
    pub triangles: Vec<u64>,
    pub neighbor_degree_sum: Vec<u64>,
}

pub(crate) fn local_counts(graph: &Graph) -> LocalCounts {
    let n = graph.n();
    let degree: Vec<u64> = (0..n).map(|i| graph.neighbors(i).len() as u64).collect();
    let mut twice_tri = vec![0u64; n];
    for i in 0..n {
        for &j in graph.neighbors(i) {
            let j = j as usize;
            if j > i {
                let c = graph.common_neighbors(i, j);
                twice_tri[i] += c;
                twice_tri[j] += c;
            }
        }
    }
    let neighbor_degree_sum = (0..n)
        .map(|i| graph.neighbors(i).iter().map(|&j| degree[j as usize]).sum())
        .collect();
    LocalCounts {
        degree,
        triangles: twice_tri.into_iter().map(|t| t / 2).collect(),
        neighbor_degree_sum,
    }
}

/// Triples through each vertex with exactly 0..=3 edges.
fn triple_classes_at(n: u64, edges: u64, d: u64, t: u64, s: u64) -> [u64; 4] {
    let (n, e, d, t, s) = (n as i128, edges as i128, d as i128, t as i128, s as i128);
    let c3 = t;
    let c2 = d * (d - 1) / 2 + s - d - 3 * t;
    let c1 = d * (n - d) - 2 * s + 3 * t + e;
    let c0 = (n - 1) * (n - 2) / 2 - c1 - c2 - c3;
    debug_assert!(c0 >= 0 && c1 >= 0 && c2 >= 0 && c3 >= 0);
    [c0 as u64, c1 as u64, c2 as u64, c3 as u64]
}

fn check_size(graph: &Graph, family: &SubgraphFamily) -> Result<()> {
    if graph.n() < family.m {
        return Err(Error::TooFewVertices {
            needed: family.m,
            n: graph.n(),
        });
    }
    if family.m >= 4 && graph.n() > ENUMERATION_MAX_N {
        return Err(Error::Unsupported(format!(
            "m = {} census enumerates subsets and is capped at n = {ENUMERATION_MAX_N}",
            family.m
        )));
    }
    Ok(())
}

/// Visits every `k`-subset of `pool` (ascending), calling `f(subset)`.
fn for_each_subset(pool: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(
        pool: &[usize],
        start: usize,
        k: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for idx in start..=pool.len() - need {
            cur.push(pool[idx]);
            rec(pool, idx + 1, k, cur, f);
            cur.pop();
        }
    }
    if k <= pool.len() {
        rec(pool, 0, k, &mut Vec::with_capacity(k), f);
    }
}

/// Exact count of `m`-subsets whose induced graph lies in `family`, with
/// the per-vertex counts gathered in the same pass.
pub fn census_global(graph: &Graph, family: &SubgraphFamily) -> Result<CensusResult> {
    check_size(graph, family)?;
    let n = graph.n();
    match family.m {
        2 => {
            let (with_edge, without) = (family.contains_mask(1), family.contains_mask(0));
            let per_vertex: Vec<u64> = (0..n)
                .map(|i| {
                    let d = graph.neighbors(i).len() as u64;
                    with_edge as u64 * d + without as u64 * (n as u64 - 1 - d)
                })
                .collect();
            let e = graph.edge_count();
            let total = with_edge as u64 * e + without as u64 * (binomial(n as u64, 2) - e);
            Ok(CensusResult::from_parts(n, family, total, Some(per_vertex)))
        }
        3 => {
            let lc = local_counts(graph);
            let e = graph.edge_count();
            let wanted: Vec<bool> = (0..4).map(|k| family.has_edge_count(k)).collect();
            let per_vertex: Vec<u64> = (0..n)
                .map(|i| {
                    let c = triple_classes_at(
                        n as u64,
                        e,
                        lc.degree[i],
                        lc.triangles[i],
                        lc.neighbor_degree_sum[i],
                    );
                    (0..4).filter(|&k| wanted[k]).map(|k| c[k]).sum()
                })
                .collect();
            let total = per_vertex.iter().sum::<u64>() / 3;
            Ok(CensusResult::from_parts(n, family, total, Some(per_vertex)))
        }
        m => {
            let mut per_vertex = vec![0u64; n];
            let mut total = 0u64;
            let pool: Vec<usize> = (0..n).collect();
            for_each_subset(&pool, m, &mut |s| {
                if family.contains_mask(induced_mask(graph, s)) {
                    total += 1;
                    for &v in s {
                        per_vertex[v] += 1;
                    }
                }
            });
            Ok(CensusResult::from_parts(n, family, total, Some(per_vertex)))
        }
    }
}

/// Count of family members among the `m`-subsets containing `i`.
pub fn census_local(graph: &Graph, family: &SubgraphFamily, i: usize) -> Result<u64> {
    check_size(graph, family)?;
    graph.check_vertex(i)?;
    let n = graph.n() as u64;
    match family.m {
        2 => {
            let d = graph.neighbors(i).len() as u64;
            Ok(family.contains_mask(1) as u64 * d + family.contains_mask(0) as u64 * (n - 1 - d))
        }
        3 => {
            let d = graph.neighbors(i).len() as u64;
            let t = triangles_at(graph, i)?;
            let s = graph
                .neighbors(i)
                .iter()
                .map(|&j| graph.neighbors(j as usize).len() as u64)
                .sum();
            let c = triple_classes_at(n, graph.edge_count(), d, t, s);
            Ok((0..4)
                .filter(|&k| family.has_edge_count(k as u32))
                .map(|k| c[k])
                .sum())
        }
        m => {
            let pool: Vec<usize> = (0..graph.n()).filter(|&v| v != i).collect();
            let mut count = 0u64;
            let mut verts = vec![i; m];
            for_each_subset(&pool, m - 1, &mut |s| {
                verts[1..].copy_from_slice(s);
                if family.contains_mask(induced_mask(graph, &verts)) {
                    count += 1;
                }
            });
            Ok(count)
        }
    }
}

fn count_pairs_below(sorted: &[f64], t: f64, inclusive: bool) -> u64 {
    if t == f64::INFINITY {
        return binomial(sorted.len() as u64, 2);
    }
    if t == f64::NEG_INFINITY {
        return 0;
    }
    let below = |s: f64| if inclusive { s <= t } else { s < t };
    let (mut i, mut j) = (0usize, sorted.len().saturating_sub(1));
    let mut count = 0u64;
    while i < j {
        if below(sorted[i] + sorted[j]) {
            count += (j - i) as u64;
            i += 1;
        } else {
            j -= 1;
        }
    }
    count
}

/// Edge census (`m = 2`) computed from the weights without materializing
/// the graph. A single `Sum` clause is counted in `O(n log n)` by sorting;
/// other rules fall back to pairwise evaluation.
pub fn edge_census_from_weights(
    rule: &ConnectionRule,
    weights: &[f64],
    family: &SubgraphFamily,
) -> Result<CensusResult> {
    if family.m != 2 {
        return Err(Error::InvalidFamily(
            "weight-level census needs an m = 2 family".into(),
        ));
    }
    let n = weights.len();
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, n });
    }
    let (edges, degrees) = match rule.as_sum_clause() {
        Some(set) => {
            let mut sorted = weights.to_vec();
            sorted.sort_by(|a, b| a.total_cmp(b));
            let mut edges = 0u64;
            for iv in set.intervals() {
                edges += count_pairs_below(&sorted, iv.hi(), !iv.hi_open);
                edges -= count_pairs_below(&sorted, iv.lo(), iv.lo_open);
            }
            let degrees: Vec<u64> = weights
                .iter()
                .map(|&x| {
                    let mut d = 0u64;
                    for iv in set.intervals() {
                        let upper = sorted.partition_point(|&y| {
                            let s = x + y;
                            s < iv.hi() || (!iv.hi_open && s == iv.hi())
                        });
                        let lower = sorted.partition_point(|&y| {
                            let s = x + y;
                            s < iv.lo() || (iv.lo_open && s == iv.lo())
                        });
                        d += (upper - lower) as u64;
                    }
                    d - set.contains(x + x) as u64
                })
                .collect();
            (edges, degrees)
        }
        None => {
            let mut degrees = vec![0u64; n];
            let mut edges = 0u64;
            for i in 0..n {
                for j in i + 1..n {
                    if rule.edge(weights[i], weights[j])? {
                        edges += 1;
                        degrees[i] += 1;
                        degrees[j] += 1;
                    }
                }
            }
            (edges, degrees)
        }
    };
    let (with_edge, without) = (family.contains_mask(1), family.contains_mask(0));
    let per_vertex = degrees
        .iter()
        .map(|&d| with_edge as u64 * d + without as u64 * (n as u64 - 1 - d))
        .collect();
    let total = with_edge as u64 * edges + without as u64 * (binomial(n as u64, 2) - edges);
    Ok(CensusResult::from_parts(n, family, total, Some(per_vertex)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightLaw;
    use proptest::prelude::*;

    /// Direct enumeration over all subsets, evaluating the family on each.
    fn oracle(graph: &Graph, family: &SubgraphFamily) -> (u64, Vec<u64>) {
        let n = graph.n();
        let m = family.m();
        let mut total = 0;
        let mut per = vec![0; n];
        for bits in 0u64..(1 << n) {
            if bits.count_ones() as usize != m {
                continue;
            }
            let vs: Vec<usize> = (0..n).filter(|v| bits >> v & 1 == 1).collect();
            let mut mask = 0u16;
            let mut k = 0;
            for a in 0..m {
                for b in a + 1..m {
                    if graph.has_edge(vs[a], vs[b]) {
                        mask |= 1 << k;
                    }
                    k += 1;
                }
            }
            if family.contains_mask(mask) {
                total += 1;
                for v in vs {
                    per[v] += 1;
                }
            }
        }
        (total, per)
    }

    fn families() -> Vec<SubgraphFamily> {
        vec![
            SubgraphFamily::edges(),
            SubgraphFamily::non_edges(),
            SubgraphFamily::wedge(),
            SubgraphFamily::triangle(),
            SubgraphFamily::triangle_or_edge(),
            SubgraphFamily::clique_or_empty(3).unwrap(),
            SubgraphFamily::with_edge_count("one_edge3", 3, 1).unwrap(),
            SubgraphFamily::empty(3).unwrap(),
            SubgraphFamily::clique(4).unwrap(),
            SubgraphFamily::from_edge_lists("path4", 4, &[vec![(0, 1), (1, 2), (2, 3)]]).unwrap(),
            SubgraphFamily::clique_or_empty(5).unwrap(),
            SubgraphFamily::with_edge_count("five_edges5", 5, 5).unwrap(),
        ]
    }

    #[test]
    fn pair_index_is_lexicographic() {
        let m = 4;
        let mut k = 0;
        for a in 0..m {
            for b in a + 1..m {
                assert_eq!(pair_index(m, a, b), k);
                k += 1;
            }
        }
    }

    #[test]
    fn canonical_classes_count() {
        // Non-isomorphic simple graphs on 2..=5 vertices: 2, 4, 11, 34.
        for (m, expect) in [(2, 2), (3, 4), (4, 11), (5, 34)] {
            let classes: BTreeSet<u16> = canonical_table(m).iter().copied().collect();
            assert_eq!(classes.len(), expect, "m = {m}");
        }
    }

    #[test]
    fn family_closed_under_relabeling() {
        for fam in families() {
            let m = fam.m();
            for perm in permutations(m) {
                for mask in 0..1u16 << pair_count(m) {
                    assert_eq!(
                        fam.contains_mask(mask),
                        fam.contains_mask(permute_mask(m, mask, &perm))
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let r = ConnectionRule::threshold(0.5);
        let tri = SubgraphFamily::triangle();
        assert!(tri.kernel(&r, &[1.0, 1.0, 1.0]).unwrap());
        assert!(!tri.kernel(&r, &[1.0, 0.0, 0.0]).unwrap());
        assert!(SubgraphFamily::empty(3)
            .unwrap()
            .kernel(&r, &[0.0, 0.0, 0.0])
            .unwrap());
        assert!(tri.kernel(&r, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn census_examples() {
        let tri = SubgraphFamily::triangle();
        assert_eq!(census_global(&Graph::complete(5), &tri).unwrap().total, 10);
        assert_eq!(
            census_global(&Graph::from_edges(6, &[]).unwrap(), &tri)
                .unwrap()
                .total,
            0
        );
        assert_eq!(census_local(&Graph::complete(4), &tri, 0).unwrap(), 3);
        assert_eq!(census_local(&Graph::star(4), &tri, 0).unwrap(), 0);
        assert!(census_global(&Graph::complete(2), &tri).is_err());
        assert!(census_global(&Graph::complete(70), &SubgraphFamily::clique(4).unwrap()).is_err());
        assert!(census_local(&Graph::complete(4), &tri, 4).is_err());
    }

    #[test]
    fn local_counters_examples() {
        let k = Graph::complete(7);
        for i in 0..7 {
            assert_eq!(degree(&k, i).unwrap(), 6);
            assert_eq!(triangles_at(&k, i).unwrap(), 15);
            assert_eq!(wedges_at(&k, i).unwrap(), 15);
        }
        let s = Graph::star(7);
        assert_eq!(
            (
                degree(&s, 0).unwrap(),
                triangles_at(&s, 0).unwrap(),
                wedges_at(&s, 0).unwrap()
            ),
            (6, 0, 15)
        );
        assert!(degree(&s, 7).is_err());
    }

    #[test]
    fn json_record_shape() {
        let r = census_global(&Graph::complete(4), &SubgraphFamily::triangle())
            .unwrap()
            .without_per_vertex();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["total"], 4);
        assert_eq!(v["normalized"], 1.0);
        assert!(v.get("per_vertex").is_none());
    }

    proptest! {
        #[test]
        fn census_matches_oracle(seed in any::<u64>(), p in 0.05f64..0.95) {
            let law = WeightLaw::uniform01();
            let w = law.sample(8, seed).unwrap();
            // Threshold chosen so that edge density sweeps the whole range.
            let g = Graph::build(&ConnectionRule::threshold(2.0 * (1.0 - p)), &w).unwrap();
            for fam in families() {
                let (total, per) = oracle(&g, &fam);
                let res = census_global(&g, &fam).unwrap();
                prop_assert_eq!(res.total, total, "{}", fam.name());
                prop_assert_eq!(res.per_vertex.as_ref().unwrap(), &per);
                prop_assert!(res.identity_holds());
                for i in 0..8 {
                    prop_assert_eq!(census_local(&g, &fam, i).unwrap(), per[i]);
                }
            }
            for i in 0..8 {
                let d = g.neighbors(i).len() as u64;
                let mut t = 0;
                for a in 0..8 {
                    for b in a + 1..8 {
                        if a != i && b != i && g.has_edge(i, a) && g.has_edge(i, b) && g.has_edge(a, b) {
                            t += 1;
                        }
                    }
                }
                prop_assert_eq!(triangles_at(&g, i).unwrap(), t);
                prop_assert_eq!(wedges_at(&g, i).unwrap(), d * d.saturating_sub(1) / 2);
            }
        }

        #[test]
        fn kernel_permutation_invariant(seed in any::<u64>()) {
            let law = WeightLaw::exponential(1.0).unwrap();
            let r = ConnectionRule::threshold_with_gap(1.0, 1.0);
            for fam in families().into_iter().filter(|f| f.m() <= 4) {
                let xs = law.sample(fam.m(), seed).unwrap();
                let base = fam.kernel(&r, &xs).unwrap();
                for perm in permutations(fam.m()) {
                    let ys: Vec<f64> = perm.iter().map(|&k| xs[k]).collect();
                    prop_assert_eq!(fam.kernel(&r, &ys).unwrap(), base);
                }
            }
        }

        #[test]
        fn weight_census_matches_graph(seed in any::<u64>(), n in 2usize..120, theta in -0.5f64..2.5, disc in any::<bool>()) {
            let law = if disc { WeightLaw::bernoulli(0.4).unwrap() } else { WeightLaw::exponential(1.0).unwrap() };
            let w = law.sample(n, seed).unwrap();
            let rules = [
                ConnectionRule::threshold(theta),
                ConnectionRule::sum_window(theta, theta + 0.7),
                ConnectionRule::threshold_with_gap(theta, 0.6),
            ];
            for rule in rules {
                let g = Graph::build(&rule, &w).unwrap();
                for fam in [SubgraphFamily::edges(), SubgraphFamily::non_edges()] {
                    let a = edge_census_from_weights(&rule, &w, &fam).unwrap();
                    let b = census_global(&g, &fam).unwrap();
                    prop_assert_eq!(&a, &b);
                    prop_assert!(a.identity_holds());
                }
            }
        }
    }
}
