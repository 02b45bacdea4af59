//! Seeded instance generators shared by the integration suites.
#![allow(dead_code)]

use std::sync::Arc;

use permstab::group::subgroup_generated;
use permstab::{FiniteGroup, GroupMap, Permutation};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_perm(n: usize, rng: &mut impl Rng) -> Permutation {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Permutation::from_images(v).unwrap()
}

/// ℤ/2 … ℤ/8 and S3.
pub fn small_groups() -> Vec<Arc<FiniteGroup>> {
    let mut out: Vec<_> = (2..=8).map(|m| Arc::new(FiniteGroup::cyclic(m))).collect();
    out.push(Arc::new(FiniteGroup::symmetric(3)));
    out
}

/// Coset actions of the cyclic subgroups and of the whole group.
pub fn transitive_actions(group: &Arc<FiniteGroup>) -> Vec<GroupMap> {
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for g in group.elements() {
        let h = subgroup_generated(group, &[g]);
        if !seen.contains(&h.elements().to_vec()) {
            seen.push(h.elements().to_vec());
            out.push(GroupMap::coset_action(&h));
        }
    }
    out.push(GroupMap::trivial(Arc::clone(group), 1));
    out
}

/// A random genuine action on exactly `n` points, relabelled by a random permutation.
pub fn random_action(group: &Arc<FiniteGroup>, n: usize, rng: &mut impl Rng) -> GroupMap {
    let orbits = transitive_actions(group);
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let fitting: Vec<&GroupMap> = orbits.iter().filter(|o| o.degree() <= left).collect();
        let pick = fitting[rng.gen_range(0..fitting.len())];
        left -= pick.degree();
        parts.push(pick.clone());
    }
    let f = GroupMap::disjoint_union(&parts).unwrap();
    f.conjugate(&random_perm(n, rng)).unwrap()
}

/// Applies a random transposition to the image of a random element, `swaps` times.
pub fn perturb(f: &GroupMap, swaps: usize, rng: &mut impl Rng) -> GroupMap {
    let mut f = f.clone();
    for _ in 0..swaps {
        let g = rng.gen_range(0..f.group().order());
        let mut img = f.image(g).images().to_vec();
        let n = img.len();
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        img.swap(a, b);
        f = f
            .with_image(g, Permutation::from_images(img).unwrap())
            .unwrap();
    }
    f
}

/// A map with independent uniformly random images.
pub fn random_map(group: &Arc<FiniteGroup>, n: usize, rng: &mut impl Rng) -> GroupMap {
    GroupMap::from_fn(Arc::clone(group), |_| random_perm(n, rng)).unwrap()
}
