//! Limit laws of the normalized degree `D_n(1) / (n - 1)`.

use rayon::prelude::*;

use super::mixed::{Atom, DensityForm, MixedLaw, Piece};
use crate::error::{Error, Result};
use crate::graph::degree_from_weights;
use crate::rng;
use crate::rules::{ConnectionRule, Connector};
use crate::weights::WeightLaw;

/// Closed-form limit law of the normalized degree.
///
/// Supported: any discrete law with any rule; `x + y > theta` with any
/// continuous law; `theta1 < x + y <= theta2` and
/// `{x + y > theta, 0 < |x - y| <= c}` with exponential weights.
pub fn degree_law(law: &WeightLaw, rule: &ConnectionRule) -> Result<MixedLaw> {
    law.validate()?;
    rule.validate()?;
    if !law.is_continuous() {
        let mut atoms = Vec::new();
        for (v, mass) in law.atoms() {
            atoms.push(Atom {
                at: super::e_d(law, rule, v)?,
                mass,
            });
        }
        return MixedLaw::new(atoms, Vec::new());
    }
    if let Some(set) = rule.as_sum_clause() {
        if set.is_empty() {
            return Ok(MixedLaw::point_mass(0.0));
        }
        if let [iv] = set.intervals() {
            if iv.hi() == f64::INFINITY {
                return threshold_law(law, iv.lo());
            }
            if let WeightLaw::Exponential { lambda } = law {
                return window_law(*lambda, iv.lo(), iv.hi());
            }
        }
    }
    if let (WeightLaw::Exponential { lambda }, Some((theta, c))) = (law, gap_parameters(rule)) {
        return gap_law(*lambda, theta, c);
    }
    Err(Error::Unsupported(format!(
        "no closed-form degree law for this rule under a {} law; use the Monte Carlo path \
         (degree_law_empirical)",
        law.name()
    )))
}

/// `(theta, c)` when the rule is `{x + y > theta, |x - y| in (0, c]}` up to
/// null sets.
fn gap_parameters(rule: &ConnectionRule) -> Option<(f64, f64)> {
    let [a, b] = rule.clauses.as_slice() else {
        return None;
    };
    let (sum, gap) = match (a.connector, b.connector) {
        (Connector::Sum, Connector::AbsDiff) => (&a.set, &b.set),
        (Connector::AbsDiff, Connector::Sum) => (&b.set, &a.set),
        _ => return None,
    };
    let [s] = sum.intervals() else { return None };
    let [g] = gap.intervals() else { return None };
    let finite_gap = g.lo() <= 0.0 && g.hi().is_finite() && g.hi() > 0.0;
    (s.hi() == f64::INFINITY && s.lo().is_finite() && finite_gap).then_some((s.lo(), g.hi()))
}

/// `x + y > theta` for a continuous law.
///
/// With support hull `[a, b]`, the degree of a vertex of weight `x` is
/// `1 - F(theta - x)`: an atom at 1 of mass `1 - F(theta - a)`, an atom at
/// 0 of mass `F(theta - b)`, and the transformed density in between.
fn threshold_law(law: &WeightLaw, theta: f64) -> Result<MixedLaw> {
    if theta == f64::NEG_INFINITY {
        return Ok(MixedLaw::point_mass(1.0));
    }
    let (a, b) = law.support().bounds();
    let top = if a.is_finite() {
        1.0 - law.cdf(theta - a)
    } else {
        0.0
    };
    let bottom = if b.is_finite() {
        law.cdf(theta - b)
    } else {
        0.0
    };
    let lo = top;
    let hi = if b.is_finite() {
        1.0 - law.cdf(theta - b)
    } else {
        1.0
    };
    let density = match law {
        WeightLaw::Exponential { lambda } => DensityForm::ExpOverK2 {
            scale: (-lambda * theta).exp(),
        },
        WeightLaw::Uniform01 => DensityForm::Constant { value: 1.0 },
        WeightLaw::Pareto { a, c } => DensityForm::Pareto {
            a: *a,
            c: *c,
            theta,
        },
        _ => DensityForm::Transform {
            theta,
            law: law.clone(),
        },
    };
    MixedLaw::new(
        vec![
            Atom { at: 1.0, mass: top },
            Atom {
                at: 0.0,
                mass: bottom,
            },
        ],
        vec![Piece { lo, hi, density }],
    )
}

/// `theta1 < x + y <= theta2` with exponential weights.
fn window_law(lambda: f64, theta1: f64, theta2: f64) -> Result<MixedLaw> {
    if theta2 <= 0.0 {
        return Ok(MixedLaw::point_mass(0.0));
    }
    let tail2 = (-lambda * theta2).exp();
    let atom = vec![Atom {
        at: 0.0,
        mass: tail2,
    }];
    if theta1 <= 0.0 {
        return MixedLaw::new(
            atom,
            vec![Piece {
                lo: 0.0,
                hi: 1.0 - tail2,
                density: DensityForm::ExpOverOneMinusK2 { scale: tail2 },
            }],
        );
    }
    let width = 1.0 - (-lambda * (theta2 - theta1)).exp();
    let k = (-lambda * theta1).exp() - tail2;
    MixedLaw::new(
        atom,
        vec![
            Piece {
                lo: 0.0,
                hi: width,
                density: DensityForm::ExpOverOneMinusK2 { scale: tail2 },
            },
            Piece {
                lo: k,
                hi: width,
                density: DensityForm::ExpOverK2 { scale: k },
            },
        ],
    )
}

/// `x + y > theta` and `0 < |x - y| <= c` with exponential weights.
fn gap_law(lambda: f64, theta: f64, c: f64) -> Result<MixedLaw> {
    if c <= 0.0 {
        return Err(Error::InvalidRule(format!(
            "gap width c = {c} must be positive"
        )));
    }
    let flat = 1.0 / (2.0 * (lambda * c).sinh());
    let steep = (2.0 * lambda * c).exp() * flat;
    let g = DensityForm::GapG { lambda, theta, c };
    if c <= theta {
        let hi = 2.0 * (-lambda * (theta + c) / 2.0).exp() * (lambda * c).sinh();
        return MixedLaw::new(
            vec![Atom {
                at: 0.0,
                mass: 1.0 - (-lambda * (theta - c) / 2.0).exp(),
            }],
            vec![Piece {
                lo: 0.0,
                hi,
                density: g,
            }],
        );
    }
    let top = 1.0 - (-2.0 * lambda * c).exp();
    if theta >= 0.0 {
        let k1 = (-lambda * theta).exp() - (-lambda * c).exp();
        let k2 = 1.0 - (-lambda * (theta + c)).exp();
        return MixedLaw::new(
            Vec::new(),
            vec![
                Piece {
                    lo: 0.0,
                    hi: k1,
                    density: DensityForm::Constant { value: flat },
                },
                Piece {
                    lo: k1,
                    hi: k2,
                    density: g,
                },
                Piece {
                    lo: k2,
                    hi: top,
                    density: DensityForm::Constant { value: steep },
                },
            ],
        );
    }
    let k1 = 1.0 - (-lambda * c).exp();
    MixedLaw::new(
        Vec::new(),
        vec![
            Piece {
                lo: 0.0,
                hi: k1,
                density: DensityForm::Constant { value: flat },
            },
            Piece {
                lo: k1,
                hi: top,
                density: DensityForm::Constant { value: steep },
            },
        ],
    )
}

/// One normalized degree `D_n(1) / (n - 1)` per independent replication.
pub fn degree_law_empirical(
    law: &WeightLaw,
    rule: &ConnectionRule,
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, n });
    }
    if replications == 0 {
        return Err(Error::InvalidArgument(
            "replications must be at least 1".into(),
        ));
    }
    (0..replications)
        .into_par_iter()
        .map(|r| {
            let w = law.sample(n, rng::derive_seed(seed, r as u64))?;
            Ok(degree_from_weights(rule, &w, 0)? as f64 / (n - 1) as f64)
        })
        .collect()
}
