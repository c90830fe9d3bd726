//! Front quality and diversity indicators, all under minimization.

use serde::{Deserialize, Serialize};

use crate::objectives::dominates;

/// A set of objective points. Dimension is whatever the points carry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub points: Vec<Vec<f64>>,
}

impl Front {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        Front { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationBounds {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec<f64>>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut min = first.clone();
        let mut max = first.clone();
        for p in iter {
            for (o, &v) in p.iter().enumerate() {
                min[o] = min[o].min(v);
                max[o] = max[o].max(v);
            }
        }
        Some(NormalizationBounds { min, max })
    }
}

/// Maps each coordinate to `[0, 1]` by the bounds; a degenerate range maps to 0.
pub fn normalize(front: &Front, bounds: &NormalizationBounds) -> Front {
    let points = front
        .points
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(o, &v)| {
                    let range = bounds.max[o] - bounds.min[o];
                    if range > 0.0 {
                        ((v - bounds.min[o]) / range).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Front { points }
}

/// Non-dominated subset with duplicates removed, first occurrence kept.
pub fn non_dominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if out.iter().any(|q| q == p || dominates(q, p)) {
            continue;
        }
        out.retain(|q| !dominates(p, q));
        out.push(p.clone());
    }
    out
}

/// Exact hypervolume dominated by `front` and bounded by `reference` (WFG
/// exclusive-contribution recursion with a sweep for two objectives). Points
/// not strictly better than the reference in every coordinate contribute nothing.
pub fn hypervolume_with_reference(front: &Front, reference: &[f64]) -> f64 {
    let pts: Vec<Vec<f64>> = front
        .points
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .cloned()
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    wfg(non_dominated(&pts), reference)
}

/// Hypervolume of a normalized front against `(1, …, 1)`.
pub fn hypervolume(front: &Front) -> f64 {
    let reference = vec![1.0; front.dim()];
    hypervolume_with_reference(front, &reference)
}

fn box_volume(p: &[f64], reference: &[f64]) -> f64 {
    p.iter().zip(reference).map(|(x, r)| (r - x).max(0.0)).product()
}

fn wfg(mut pts: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    match pts.len() {
        0 => return 0.0,
        1 => return box_volume(&pts[0], reference),
        _ => {}
    }
    if reference.len() == 1 {
        return pts.iter().map(|p| reference[0] - p[0]).fold(0.0, f64::max);
    }
    if reference.len() == 2 {
        return sweep_2d(&mut pts, reference);
    }
    // Sorting by the last objective keeps the limit sets small.
    let last = reference.len() - 1;
    pts.sort_by(|a, b| b[last].total_cmp(&a[last]));
    let mut total = 0.0;
    for k in 0..pts.len() {
        total += exclusive(&pts[k], &pts[k + 1..], reference);
    }
    total
}

fn exclusive(p: &[f64], rest: &[Vec<f64>], reference: &[f64]) -> f64 {
    let limited: Vec<Vec<f64>> = rest
        .iter()
        .map(|q| q.iter().zip(p).map(|(a, b)| a.max(*b)).collect())
        .collect();
    box_volume(p, reference) - wfg(non_dominated(&limited), reference)
}

fn sweep_2d(pts: &mut [Vec<f64>], reference: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in pts.iter() {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

/// Additive ε: the smallest shift that makes `front` weakly dominate every
/// reference point.
pub fn epsilon(front: &Front, reference: &Front) -> f64 {
    reference
        .points
        .iter()
        .map(|r| {
            front
                .points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(r)
                        .map(|(a, b)| a - b)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn nearest(p: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min)
}

/// Mean distance from each reference point to its nearest front point.
pub fn igd(front: &Front, reference: &Front) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    let sum: f64 = reference.points.iter().map(|r| nearest(r, &front.points)).sum();
    sum / reference.len() as f64
}

/// Generalized Δ spread. Fronts with fewer than two points score 1.0, as does
/// the 0/0 case of a front collapsed onto the reference extremes.
pub fn spread(front: &Front, reference: &Front) -> f64 {
    let n = front.len();
    if n < 2 {
        return 1.0;
    }
    let d: Vec<f64> = (0..n)
        .map(|i| {
            front
                .points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| distance(&front.points[i], q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let extremes = extreme_points(reference);
    let d_extremes: f64 = extremes.iter().map(|e| nearest(e, &front.points)).sum();
    let numerator = d_extremes + d.iter().map(|di| (di - mean).abs()).sum::<f64>();
    let denominator = d_extremes + n as f64 * mean;
    if denominator == 0.0 {
        1.0
    } else {
        numerator / denominator
    }
}

/// For each objective, the reference point minimizing it (ties broken by the
/// smallest coordinate sum, then by position).
pub fn extreme_points(reference: &Front) -> Vec<Vec<f64>> {
    (0..reference.dim())
        .filter_map(|o| {
            reference
                .points
                .iter()
                .min_by(|a, b| {
                    a[o].total_cmp(&b[o])
                        .then(a.iter().sum::<f64>().total_cmp(&b.iter().sum::<f64>()))
                })
                .cloned()
        })
        .collect()
}

/// Vargha–Delaney Â₁₂: probability that a draw from `a` exceeds one from `b`,
/// ties counting half.
pub fn a12(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.5;
    }
    let mut wins = 0.0;
    for x in a {
        for y in b {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    wins / (a.len() * b.len()) as f64
}

/// Non-dominated union of `fronts` and the bounds of every input point.
pub fn build_reference_front(fronts: &[Front]) -> (Front, Option<NormalizationBounds>) {
    let all: Vec<Vec<f64>> = fronts.iter().flat_map(|f| f.points.iter().cloned()).collect();
    let bounds = NormalizationBounds::from_points(&all);
    (Front::new(non_dominated(&all)), bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub hv: f64,
    pub epsilon: f64,
    pub igd: f64,
    pub pfs: usize,
    pub spread: f64,
}

/// All indicators for `front` against `reference`, both normalized by `bounds`.
pub fn indicators(front: &Front, reference: &Front, bounds: &NormalizationBounds) -> Indicators {
    let f = normalize(front, bounds);
    let r = normalize(reference, bounds);
    Indicators {
        hv: hypervolume(&f),
        epsilon: if f.is_empty() { f64::INFINITY } else { epsilon(&f, &r) },
        igd: if f.is_empty() { f64::INFINITY } else { igd(&f, &r) },
        pfs: front.len(),
        spread: spread(&f, &r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn front(pts: &[&[f64]]) -> Front {
        Front::new(pts.iter().map(|p| p.to_vec()).collect())
    }

    #[test]
    fn normalization_corners() {
        let b = NormalizationBounds {
            min: vec![0.0, 2.0, 5.0],
            max: vec![10.0, 4.0, 5.0],
        };
        let n = normalize(&front(&[&[0.0, 2.0, 5.0], &[10.0, 4.0, 5.0], &[20.0, 3.0, 5.0]]), &b);
        assert_eq!(n.points[0], vec![0.0, 0.0, 0.0]);
        assert_eq!(n.points[1], vec![1.0, 1.0, 0.0]);
        assert_eq!(n.points[2], vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn hypervolume_unit_cases() {
        assert_eq!(hypervolume(&front(&[&[0.0; 5]])), 1.0);
        assert_eq!(hypervolume(&front(&[&[1.0; 5]])), 0.0);
        assert_eq!(hypervolume(&Front::default()), 0.0);
        let hv = hypervolume(&front(&[&[0.2, 0.6], &[0.6, 0.2]]));
        assert!((hv - 0.48).abs() < 1e-12, "{hv}");
    }

    #[test]
    fn hypervolume_three_d_inclusion_exclusion() {
        // Two boxes: (0.5)^3 + (0.5)^3 - overlap (0.5*0.5*0.5... ) computed by hand
        // a = (0, 0.5, 0.5) -> box 1 x 0.5 x 0.5 = 0.25
        // b = (0.5, 0, 0.5) -> box 0.5 x 1 x 0.5 = 0.25
        // a∨b = (0.5, 0.5, 0.5) -> 0.125
        let hv = hypervolume(&front(&[&[0.0, 0.5, 0.5], &[0.5, 0.0, 0.5]]));
        assert!((hv - 0.375).abs() < 1e-12);
    }

    #[test]
    fn epsilon_cases() {
        let f = front(&[&[0.1, 0.5], &[0.5, 0.1]]);
        assert_eq!(epsilon(&f, &f), 0.0);
        let shifted = front(&[&[0.2, 0.6], &[0.6, 0.2]]);
        assert!((epsilon(&shifted, &f) - 0.1).abs() < 1e-12);
        assert!(epsilon(&f, &shifted) < 0.0);
    }

    #[test]
    fn igd_cases() {
        assert!((igd(&front(&[&[0.3, 0.4]]), &front(&[&[0.0, 0.0]])) - 0.5).abs() < 1e-12);
        let r = front(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = front(&[&[0.0, 1.0], &[1.0, 0.0], &[0.5, 0.5]]);
        assert_eq!(igd(&f, &r), 0.0);
    }

    #[test]
    fn spread_cases() {
        let even: Vec<Vec<f64>> = (0..=10).map(|i| vec![i as f64 / 10.0, 1.0 - i as f64 / 10.0]).collect();
        let f = Front::new(even);
        assert!(spread(&f, &f) < 1e-12);
        assert_eq!(spread(&front(&[&[0.5, 0.5]]), &f), 1.0);
        let clustered = front(&[&[0.0, 1.0], &[0.05, 0.95], &[1.0, 0.0]]);
        assert!(spread(&clustered, &f) > 0.3);
    }

    #[test]
    fn a12_cases() {
        assert_eq!(a12(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.5);
        assert_eq!(a12(&[5.0, 6.0], &[1.0, 2.0]), 1.0);
        assert_eq!(a12(&[1.0, 2.0], &[5.0, 6.0]), 0.0);
        // 4 of 5 pairs won
        assert!((a12(&[10.0], &[1.0, 2.0, 3.0, 4.0, 11.0]) - 0.8).abs() < 1e-12);
        assert!((a12(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]) - 7.5 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn reference_front_is_non_dominated_union() {
        let a = front(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let (r, b) = build_reference_front(std::slice::from_ref(&a));
        assert_eq!(r, a);
        let worse = front(&[&[0.5, 2.0], &[2.0, 0.5]]);
        let (r, b2) = build_reference_front(&[worse, a.clone()]);
        assert_eq!(r, a);
        assert_eq!(b.unwrap().max, vec![1.0, 1.0]);
        assert_eq!(b2.unwrap().max, vec![2.0, 2.0]);
    }
}
