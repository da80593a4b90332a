//! Materialized random graphs.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rules::ConnectionRule;
use crate::weights::WeightLaw;

/// Default ceiling on the vertex count; generation is quadratic.
pub const DEFAULT_MAX_VERTICES: usize = 100_000;

/// Undirected simple graph stored as bitset rows plus sorted neighbor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    neighbors: Vec<Vec<u32>>,
    weights: Option<Vec<f64>>,
}

impl Graph {
    fn empty_rows(n: usize) -> (usize, Vec<u64>) {
        let words = n.div_ceil(64);
        (words, vec![0u64; words * n])
    }

    fn finish(n: usize, words: usize, rows: Vec<u64>, weights: Option<Vec<f64>>) -> Self {
        let neighbors = (0..n)
            .map(|i| {
                let row = &rows[i * words..(i + 1) * words];
                let mut out = Vec::new();
                for (w, &bits) in row.iter().enumerate() {
                    let mut b = bits;
                    while b != 0 {
                        out.push((w * 64 + b.trailing_zeros() as usize) as u32);
                        b &= b - 1;
                    }
                }
                out
            })
            .collect();
        Self {
            n,
            words,
            rows,
            neighbors,
            weights,
        }
    }

    #[inline]
    fn set(rows: &mut [u64], words: usize, i: usize, j: usize) {
        rows[i * words + j / 64] |= 1u64 << (j % 64);
        rows[j * words + i / 64] |= 1u64 << (i % 64);
    }

    /// Pairwise evaluation of `rule` over `weights`.
    pub fn build(rule: &ConnectionRule, weights: &[f64]) -> Result<Self> {
        Self::build_capped(rule, weights, DEFAULT_MAX_VERTICES)
    }

    pub fn build_capped(rule: &ConnectionRule, weights: &[f64], cap: usize) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::TooFewVertices { needed: 1, n });
        }
        if n > cap {
            return Err(Error::GraphTooLarge { n, cap });
        }
        let (words, mut rows) = Self::empty_rows(n);
        for i in 0..n {
            let xi = weights[i];
            for (j, &xj) in weights.iter().enumerate().skip(i + 1) {
                if rule.edge(xi, xj)? {
                    Self::set(&mut rows, words, i, j);
                }
            }
        }
        Ok(Self::finish(n, words, rows, Some(weights.to_vec())))
    }

    /// Samples `n` weights, overwrites vertex `pin.0` with `pin.1`, and builds.
    pub fn build_conditioned(
        rule: &ConnectionRule,
        law: &WeightLaw,
        n: usize,
        seed: u64,
        pin: (usize, f64),
    ) -> Result<Self> {
        if pin.0 >= n {
            return Err(Error::VertexOutOfRange { index: pin.0, n });
        }
        let mut weights = law.sample(n, seed)?;
        weights[pin.0] = pin.1;
        Self::build(rule, &weights)
    }

    /// Graph with explicit edges (0-indexed) and no generating weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewVertices { needed: 1, n });
        }
        let (words, mut rows) = Self::empty_rows(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::VertexOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {i}")));
            }
            Self::set(&mut rows, words, i, j);
        }
        Ok(Self::finish(n, words, rows, None))
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::from_edges(n, &edges).expect("valid edges")
    }

    /// Star centered at vertex 0.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|j| (0, j)).collect();
        Self::from_edges(n, &edges).expect("valid edges")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    pub fn check_vertex(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                index: i,
                n: self.n,
            })
        }
    }

    /// `|N(i) ∩ N(j)|` by row intersection.
    #[inline]
    pub fn common_neighbors(&self, i: usize, j: usize) -> u64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.neighbors.iter().map(|v| v.len() as u64).sum::<u64>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// `i j` per line, 1-indexed.
    pub fn edge_list_text(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }
}

/// Degree of vertex `i` straight from the weights, without building rows.
pub fn degree_from_weights(rule: &ConnectionRule, weights: &[f64], i: usize) -> Result<u64> {
    let xi = *weights.get(i).ok_or(Error::VertexOutOfRange {
        index: i,
        n: weights.len(),
    })?;
    let mut d = 0;
    for (j, &xj) in weights.iter().enumerate() {
        if j != i && rule.edge(xi, xj)? {
            d += 1;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::BorelSet;
    use proptest::prelude::*;

    #[test]
    fn bernoulli_examples() {
        let r = ConnectionRule::threshold(0.5);
        let g = Graph::build(&r, &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(Graph::build(&r, &[0.0, 0.0, 0.0]).unwrap().edge_count(), 0);
        let star = Graph::build(&r, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(star.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn conditioned_pin() {
        let r = ConnectionRule::threshold(0.5);
        let law = WeightLaw::bernoulli(0.3).unwrap();
        let g = Graph::build_conditioned(&r, &law, 200, 11, (0, 1.0)).unwrap();
        assert_eq!(g.weights().unwrap()[0], 1.0);
        assert_eq!(g.neighbors(0).len(), 199);
        assert!(Graph::build_conditioned(&r, &law, 5, 11, (5, 1.0)).is_err());
    }

    #[test]
    fn conditioned_zero_pin_degree_fraction() {
        let r = ConnectionRule::threshold(0.5);
        let law = WeightLaw::bernoulli(0.5).unwrap();
        let mut w = law.sample(10_000, 5).unwrap();
        w[0] = 0.0;
        let d = degree_from_weights(&r, &w, 0).unwrap() as f64 / 9_999.0;
        assert!((d - 0.5).abs() < 0.02, "{d}");
    }

    #[test]
    fn edge_list_is_one_indexed() {
        let g = Graph::complete(3);
        assert_eq!(g.edge_list_text(), "1 2\n1 3\n2 3\n");
    }

    #[test]
    fn cap_enforced() {
        let r = ConnectionRule::threshold(0.0);
        assert!(matches!(
            Graph::build_capped(&r, &[1.0; 10], 5),
            Err(Error::GraphTooLarge { .. })
        ));
    }

    #[test]
    fn domain_errors_propagate() {
        let r = ConnectionRule::single(crate::rules::Connector::RelDiff, BorelSet::at_most(0.5));
        assert!(Graph::build(&r, &[0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn adjacency_matches_rule(seed in any::<u64>(), n in 1usize..50) {
            let law = WeightLaw::exponential(1.0).unwrap();
            let w = law.sample(n, seed).unwrap();
            let r = ConnectionRule::threshold_with_gap(1.0, 0.8);
            let g = Graph::build(&r, &w).unwrap();
            for i in 0..n {
                prop_assert!(!g.has_edge(i, i));
                for j in 0..n {
                    if i != j {
                        prop_assert_eq!(g.has_edge(i, j), r.edge(w[i], w[j]).unwrap());
                        prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                    }
                }
                prop_assert_eq!(g.neighbors(i).len() as u64, degree_from_weights(&r, &w, i).unwrap());
            }
        }

        #[test]
        fn coupling_monotone(seed in any::<u64>(), theta in 0.0f64..3.0, slack in 0.0f64..1.0) {
            let law = WeightLaw::exponential(1.0).unwrap();
            let w = law.sample(40, seed).unwrap();
            let small = ConnectionRule::threshold_with_gap(theta, 0.5);
            let big = ConnectionRule::threshold_with_gap(theta - slack, 0.5 + slack);
            prop_assert!(small.is_sub_rule(&big));
            let gs = Graph::build(&small, &w).unwrap();
            let gb = Graph::build(&big, &w).unwrap();
            for (i, j) in gs.edges() {
                prop_assert!(gb.has_edge(i, j));
            }
        }
    }
}
