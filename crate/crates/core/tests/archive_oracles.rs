mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{nd_filter, sorted};
use splbee::mobafs::archive::{grid_cells, truncate_archive, update_archive, LeaderSampler};
use splbee::mobafs::{partition_roles, scout_count, Role};
use splbee::objectives::ObjectiveVector;

fn ov(p: &[u32; 5], cost: f64) -> ObjectiveVector {
    ObjectiveVector {
        correctness: p[0],
        richness: p[1],
        used_before: p[2],
        defects: p[3],
        cost,
    }
}

fn vector_strategy() -> impl Strategy<Value = ObjectiveVector> {
    (prop::array::uniform4(0u32..6), 0u32..24).prop_map(|(a, c)| ov(&[a[0], a[1], a[2], a[3], 0], c as f64 * 0.5))
}

proptest! {
    #[test]
    fn update_matches_quadratic_filter(points in prop::collection::vec(vector_strategy(), 1..=50)) {
        let mut archive = Vec::new();
        update_archive(&mut archive, &points, |c: &ObjectiveVector| *c);
        let raw: Vec<Vec<f64>> = points.iter().map(|p| p.to_array().to_vec()).collect();
        let got = sorted(archive.iter().map(|p: &ObjectiveVector| p.to_array().to_vec()).collect());
        prop_assert_eq!(got, sorted(nd_filter(&raw)));
    }

    #[test]
    fn truncation_respects_size_and_is_subset(
        points in prop::collection::vec(vector_strategy(), 1..=120),
        sp in 1u32..=12,
        seed in any::<u64>(),
    ) {
        let mut archive = Vec::new();
        update_archive(&mut archive, &points, |c: &ObjectiveVector| *c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arch_size = rng.random_range(1..=archive.len());
        let out = truncate_archive(archive.clone(), sp, arch_size, &mut rng);
        prop_assert!(out.len() <= arch_size);
        prop_assert!(out.iter().all(|p| archive.contains(p)));
    }
}

#[test]
fn identical_entries_form_one_group() {
    let pts = vec![ov(&[1, 1, 1, 1, 0], 3.0); 40];
    let cells = grid_cells(&pts, 2);
    assert!(cells.iter().all(|c| c.group == 0 && c.rank == 243));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(truncate_archive(pts.clone(), 2, 39, &mut rng).len(), 39);
    assert_eq!(truncate_archive(pts, 2, 40, &mut rng).len(), 40);
}

#[test]
fn leader_ratio_three_to_one() {
    let sampler = LeaderSampler::from_ranks([3, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let draws = 100_000;
    let first = (0..draws).filter(|_| sampler.sample(&mut rng) == 0).count();
    let ratio = first as f64 / (draws - first) as f64;
    assert!((ratio - 3.0).abs() / 3.0 < 0.05, "ratio {ratio}");
}

#[test]
fn equal_ranks_are_uniform() {
    let k = 8;
    let sampler = LeaderSampler::from_ranks(vec![5; k]);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let draws = 100_000;
    let mut counts = vec![0usize; k];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng)] += 1;
    }
    let expected = draws as f64 / k as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom, 0.999 quantile
    assert!(chi2 < 24.32, "chi-square {chi2}, counts {counts:?}");
}

#[test]
fn scout_counts() {
    assert_eq!(scout_count(100, 0.02), 2);
    assert_eq!(scout_count(3000, 0.02), 60);
    assert_eq!(scout_count(10, 0.02), 1);
    assert_eq!(scout_count(100, 0.0), 0);
}

#[test]
fn roles_follow_archive_membership() {
    let bees: Vec<ObjectiveVector> = (0..100).map(|i| ov(&[0, i % 10, 0, 0, 0], (10 - i % 10) as f64)).collect();
    let archive: Vec<ObjectiveVector> = bees[..10].to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let roles = partition_roles(&bees, &archive, 0.02, &mut rng);
    let mut count = BTreeMap::new();
    for r in &roles {
        *count.entry(format!("{r:?}")).or_insert(0) += 1;
    }
    assert_eq!(count["Scout"], 2);
    assert_eq!(count["Forager"] + count["Scout"], 100);

    let dominated = vec![ov(&[5, 5, 5, 5, 0], 99.0); 50];
    let roles = partition_roles(&dominated, &archive, 0.02, &mut rng);
    assert!(roles.iter().all(|r| *r != Role::Forager));
    assert_eq!(roles.iter().filter(|r| **r == Role::Scout).count(), 1);
}
