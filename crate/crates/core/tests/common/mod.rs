//! Independent reference implementations used by the integration tests.
//! None of these call into the library's algorithms.

#![allow(dead_code)]

use rand::Rng;
use splbee::model_io::{AttributeTable, Clause};

/// A clause as bit masks over assignments `a` where bit `v-1` is feature `v`.
#[derive(Clone, Copy)]
pub struct MaskClause {
    pos: u32,
    neg: u32,
}

impl MaskClause {
    pub fn new(clause: &Clause) -> Self {
        let mut c = MaskClause { pos: 0, neg: 0 };
        for &l in clause {
            let bit = 1u32 << (l.unsigned_abs() - 1);
            if l > 0 {
                c.pos |= bit;
            } else {
                c.neg |= bit;
            }
        }
        c
    }

    #[inline]
    pub fn holds(&self, a: u32) -> bool {
        (a & self.pos) | (!a & self.neg) != 0
    }
}

pub fn mask_clauses(clauses: &[Clause]) -> Vec<MaskClause> {
    clauses.iter().map(MaskClause::new).collect()
}

/// Every satisfying assignment of a model with at most 24 features.
pub fn models_of(num_features: usize, clauses: &[Clause]) -> Vec<u32> {
    assert!(num_features <= 24);
    let masks = mask_clauses(clauses);
    (0u32..1 << num_features)
        .filter(|&a| masks.iter().all(|c| c.holds(a)))
        .collect()
}

/// Literals true in every satisfying assignment: `(always_true, always_false)` as masks.
pub fn backbone(num_features: usize, clauses: &[Clause]) -> Option<(u32, u32)> {
    let sols = models_of(num_features, clauses);
    if sols.is_empty() {
        return None;
    }
    let all = if num_features == 32 { u32::MAX } else { (1u32 << num_features) - 1 };
    let ones = sols.iter().fold(all, |acc, &a| acc & a);
    let zeros = sols.iter().fold(all, |acc, &a| acc & !a);
    Some((ones, zeros))
}

/// Random clauses with distinct variables; lengths drawn from `1..=max_len`.
pub fn random_clauses<R: Rng>(rng: &mut R, num_features: usize, num_clauses: usize, max_len: usize) -> Vec<Clause> {
    (0..num_clauses)
        .map(|_| {
            let len = rng.random_range(1..=max_len.min(num_features));
            let mut vars: Vec<i32> = (1..=num_features as i32).collect();
            for i in 0..len {
                let j = rng.random_range(i..vars.len());
                vars.swap(i, j);
            }
            vars[..len]
                .iter()
                .map(|&v| if rng.random_bool(0.5) { v } else { -v })
                .collect()
        })
        .collect()
}

/// Objectives of a raw assignment, computed directly from their definitions.
pub fn objectives_of(a: u32, num_features: usize, clauses: &[MaskClause], attrs: &AttributeTable) -> [f64; 5] {
    let violated = clauses.iter().filter(|c| !c.holds(a)).count();
    let mut richness = 0;
    let mut unused = 0;
    let mut defects = 0;
    let mut cost = 0.0;
    for f in 0..num_features {
        let at = attrs.get(f as u32 + 1);
        if a >> f & 1 == 1 {
            if !at.used_before {
                unused += 1;
            }
            defects += at.defects;
            cost += at.cost;
        } else {
            richness += 1;
        }
    }
    [violated as f64, richness as f64, unused as f64, defects as f64, cost]
}

pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Quadratic non-dominated filter; duplicates keep their first occurrence.
pub fn nd_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let dominated = points.iter().any(|q| dominates(q, p));
        let repeated = points[..i].iter().any(|q| q == p);
        if !dominated && !repeated {
            out.push(p.clone());
        }
    }
    out
}

/// Pareto front of the valid products, by enumerating all `2^F` assignments.
pub fn pareto_by_enumeration(num_features: usize, clauses: &[Clause], attrs: &AttributeTable) -> Vec<Vec<f64>> {
    let masks = mask_clauses(clauses);
    let valid: Vec<Vec<f64>> = models_of(num_features, clauses)
        .into_iter()
        .map(|a| objectives_of(a, num_features, &masks, attrs).to_vec())
        .collect();
    nd_filter(&valid)
}

/// Min-max normalization with bounds from `by`; constant objectives map to 0.
pub fn normalize_by(points: &[Vec<f64>], by: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = by[0].len();
    let lo: Vec<f64> = (0..d).map(|k| by.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|k| by.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    points
        .iter()
        .map(|p| {
            (0..d)
                .map(|k| {
                    let r = hi[k] - lo[k];
                    if r > 0.0 {
                        ((p[k] - lo[k]) / r).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Mean distance from each reference point to its nearest front point.
pub fn igd_oracle(front: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    let total: f64 = reference
        .iter()
        .map(|r| {
            front
                .iter()
                .map(|p| p.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / reference.len() as f64
}

/// Monte Carlo estimate of the volume dominated by `front` inside `[0, 1]^d`.
pub fn hv_monte_carlo<R: Rng>(front: &[Vec<f64>], samples: usize, rng: &mut R) -> f64 {
    let d = front[0].len();
    let mut hit = 0usize;
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        for v in x.iter_mut() {
            *v = rng.random::<f64>();
        }
        if front.iter().any(|p| p.iter().zip(&x).all(|(a, b)| a <= b)) {
            hit += 1;
        }
    }
    hit as f64 / samples as f64
}

/// Sorted copy for order-insensitive comparison of point sets.
pub fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    v.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    v
}
