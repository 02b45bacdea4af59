//! Exhaustive ground truth at tiny scale: homomorphism enumeration, nearest
//! homomorphisms, and the intertwiner distance bound.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::map::{distance, first_violation, GroupMap};
use crate::perm::{all_permutations, Permutation};
use crate::Rational;

pub use crate::gamma_graph::markov_holds as markov_bound_check;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// `PERMSTAB_BUDGET` when set to an integer, otherwise [`DEFAULT_BUDGET`].
pub fn default_budget() -> u64 {
    std::env::var("PERMSTAB_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

struct Search<'a> {
    group: &'a FiniteGroup,
    gens: &'a [usize],
    candidates: Vec<Vec<&'a Permutation>>,
    n: usize,
    spent: &'a AtomicU64,
    budget: u64,
}

impl<'a> Search<'a> {
    fn charge(&self) -> Result<()> {
        if self.spent.fetch_add(1, Ordering::Relaxed) + 1 > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Extends images of the first `level` generators to the subgroup they
    /// generate, checking every Cayley-graph edge.
    fn extend(&self, assigned: &[&Permutation]) -> Option<Vec<Option<Permutation>>> {
        let g = self.group;
        let mut image: Vec<Option<Permutation>> = vec![None; g.order()];
        image[g.identity()] = Some(Permutation::identity(self.n));
        let mut queue = vec![g.identity()];
        let mut head = 0;
        while head < queue.len() {
            let e = queue[head];
            head += 1;
            for (&s, p) in self.gens.iter().zip(assigned) {
                let target = g.mul(e, s);
                let value = image[e].as_ref().expect("visited").compose_unchecked(p);
                match &image[target] {
                    Some(existing) if *existing != value => return None,
                    Some(_) => {}
                    None => {
                        image[target] = Some(value);
                        queue.push(target);
                    }
                }
            }
        }
        Some(image)
    }

    fn run(
        &self,
        assigned: &mut Vec<&'a Permutation>,
        out: &mut Vec<Vec<Permutation>>,
    ) -> Result<()> {
        let level = assigned.len();
        if level == self.gens.len() {
            let full = self.extend(assigned).expect("checked at previous level");
            out.push(
                full.into_iter()
                    .map(|p| p.expect("generators span the group"))
                    .collect(),
            );
            return Ok(());
        }
        for &cand in &self.candidates[level] {
            self.charge()?;
            assigned.push(cand);
            if self.extend(assigned).is_some() {
                self.run(assigned, out)?;
            }
            assigned.pop();
        }
        Ok(())
    }
}

/// Every homomorphism `G → Sym(n)`, in lexicographic order of generator
/// images. Refuses once more than `budget` partial assignments are tried.
pub fn enumerate_homomorphisms(
    group: &Arc<FiniteGroup>,
    n: usize,
    budget: u64,
) -> Result<Vec<GroupMap>> {
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    let gens = group.greedy_generators();
    if gens.is_empty() {
        return Ok(vec![GroupMap::trivial(Arc::clone(group), n)]);
    }
    let perms = all_permutations(n);
    let candidates: Vec<Vec<&Permutation>> = gens
        .iter()
        .map(|&s| {
            let m = group.element_order(s) as u64;
            perms
                .iter()
                .filter(|p| m.is_multiple_of(p.order()))
                .collect()
        })
        .collect();
    let spent = AtomicU64::new(0);
    let search = Search {
        group,
        gens: &gens,
        candidates,
        n,
        spent: &spent,
        budget,
    };
    let branches: Vec<Result<Vec<Vec<Permutation>>>> = search.candidates[0]
        .par_iter()
        .map(|&first| {
            search.charge()?;
            let mut out = Vec::new();
            let mut assigned = vec![first];
            if search.extend(&assigned).is_some() {
                search.run(&mut assigned, &mut out)?;
            }
            Ok(out)
        })
        .collect();
    let mut homs = Vec::new();
    for branch in branches {
        for table in branch? {
            homs.push(GroupMap::new(Arc::clone(group), table)?);
        }
    }
    Ok(homs)
}

#[derive(Clone, Debug)]
pub struct NearestHomomorphism {
    pub h: GroupMap,
    pub n_used: usize,
    pub d_inf: Rational,
    pub d_mean: Rational,
    /// Smallest mean distance over the same search space.
    pub min_mean: Rational,
    pub candidates: usize,
}

/// Minimizes `d_∞(f, h)` over homomorphisms `h: Γ → Sym(N)`, `n ≤ N ≤ n_max`;
/// ties go to smaller `N`, then to the lexicographically smaller table.
pub fn nearest_homomorphism(
    f: &GroupMap,
    n_max: usize,
    budget: u64,
) -> Result<NearestHomomorphism> {
    let n = f.degree();
    if n_max < n {
        return Err(Error::InvalidArgument(format!(
            "n_max {n_max} below the degree {n}"
        )));
    }
    let mut best: Option<(Rational, usize, GroupMap, Rational)> = None;
    let mut min_mean: Option<Rational> = None;
    let mut candidates = 0;
    for big in n..=n_max {
        for h in enumerate_homomorphisms(f.group(), big, budget)? {
            candidates += 1;
            let (di, dm) = distance(f, &h).finite()?;
            min_mean = Some(min_mean.map_or(dm, |m| m.min(dm)));
            let better = match &best {
                None => true,
                Some((bi, bn, bh, _)) => (di, big)
                    .cmp(&(*bi, *bn))
                    .then_with(|| h.table().cmp(bh.table()))
                    .is_lt(),
            };
            if better {
                best = Some((di, big, h, dm));
            }
        }
    }
    let (d_inf, n_used, h, d_mean) =
        best.ok_or_else(|| Error::InvalidArgument("no homomorphism found".into()))?;
    Ok(NearestHomomorphism {
        h,
        n_used,
        d_inf,
        d_mean,
        min_mean: min_mean.unwrap_or_default(),
        candidates,
    })
}

/// Distance from the padded inclusion `T: ℝ^{n−1} → ℝ^n` to the space of
/// intertwiners between the two permutation representations.
#[derive(Clone, Debug, PartialEq)]
pub struct IntertwinerCheck {
    pub n: usize,
    pub distance: f64,
    /// `‖T‖ / √2 = √((n−1)/2)`.
    pub bound: f64,
    /// `max |P² − P|` over operator entries.
    pub idempotence_error: f64,
    /// `max |ρ_f(γ) P(T) − P(T) ρ_h(γ)|` over `γ` and entries.
    pub commutation_error: f64,
}

pub const INTERTWINER_SLACK: f64 = 1e-9;
pub const PROJECTION_TOLERANCE: f64 = 1e-12;

fn perm_matrix(p: &Permutation) -> DMatrix<f64> {
    let n = p.degree();
    DMatrix::from_fn(n, n, |r, c| if p.apply(c) == r { 1.0 } else { 0.0 })
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

pub fn intertwiner_min_distance(h: &GroupMap, f: &GroupMap) -> Result<IntertwinerCheck> {
    if h.group() != f.group() {
        return Err(Error::GroupMismatch);
    }
    let n = f.degree();
    if n < 2 || h.degree() != n - 1 {
        return Err(Error::DegreeMismatch {
            left: h.degree(),
            right: n,
        });
    }
    if !f.is_transitive() {
        return Err(Error::NotTransitive);
    }
    for map in [h, f] {
        if let Some((a, b)) = first_violation(map) {
            return Err(Error::NotHomomorphism { a, b });
        }
    }
    let g = f.group();
    let m = n - 1;
    let scale = 1.0 / g.order() as f64;
    let rho_f: Vec<DMatrix<f64>> = g.elements().map(|x| perm_matrix(f.image(x))).collect();
    let rho_h: Vec<DMatrix<f64>> = g.elements().map(|x| perm_matrix(h.image(x))).collect();
    let t = DMatrix::from_fn(n, m, |r, c| if r == c { 1.0 } else { 0.0 });

    let project = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(n, m);
        for gamma in g.elements() {
            acc += &rho_f[gamma] * x * &rho_h[g.inv(gamma)];
        }
        acc * scale
    };
    let pt = project(&t);
    let distance = (&t - &pt).norm();
    let bound = ((n - 1) as f64 / 2.0).sqrt();

    // The projection as an operator on vec(T): vec(A T B) = (Bᵀ ⊗ A) vec(T).
    let mut op = DMatrix::zeros(n * m, n * m);
    for gamma in g.elements() {
        op += rho_h[g.inv(gamma)].transpose().kronecker(&rho_f[gamma]);
    }
    op *= scale;
    let idempotence_error = max_abs(&(&op * &op - &op));
    let commutation_error = g
        .elements()
        .map(|gamma| max_abs(&(&rho_f[gamma] * &pt - &pt * &rho_h[gamma])))
        .fold(0.0, f64::max);

    let check = IntertwinerCheck {
        n,
        distance,
        bound,
        idempotence_error,
        commutation_error,
    };
    if idempotence_error > PROJECTION_TOLERANCE || commutation_error > PROJECTION_TOLERANCE {
        return Err(Error::invariant(
            "group average is a projection onto intertwiners",
            format!("{check:?}"),
        ));
    }
    if distance < bound - INTERTWINER_SLACK {
        return Err(Error::invariant(
            "intertwiner distance >= sqrt((n-1)/2)",
            format!("{check:?}"),
        ));
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::drop_point;
    use crate::map::is_homomorphism;
    use crate::ratio;

    fn cyclic(m: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(m))
    }

    #[test]
    fn enumeration_small_cases() {
        assert_eq!(
            enumerate_homomorphisms(&cyclic(1), 3, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            1
        );
        let z5 = enumerate_homomorphisms(&cyclic(5), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(z5.len(), 1);
        assert!(z5[0].table().iter().all(Permutation::is_identity));
        assert_eq!(
            enumerate_homomorphisms(&cyclic(2), 2, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn enumeration_matches_order_scan() {
        for m in 1..7 {
            for n in 1..6 {
                let homs = enumerate_homomorphisms(&cyclic(m), n, DEFAULT_BUDGET).unwrap();
                let expected = all_permutations(n)
                    .iter()
                    .filter(|p| (m as u64).is_multiple_of(p.order()))
                    .count();
                assert_eq!(homs.len(), expected, "Z/{m} -> S{n}");
                assert!(homs.iter().all(is_homomorphism));
            }
        }
    }

    #[test]
    fn enumeration_non_abelian() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let homs = enumerate_homomorphisms(&s3, 3, DEFAULT_BUDGET).unwrap();
        assert!(homs.iter().all(is_homomorphism));
        let brute = brute_force_count(&s3, 3);
        assert_eq!(homs.len(), brute);
        let mut tables: Vec<_> = homs.iter().map(|h| h.table().to_vec()).collect();
        tables.sort();
        tables.dedup();
        assert_eq!(tables.len(), homs.len());
    }

    fn brute_force_count(g: &Arc<FiniteGroup>, n: usize) -> usize {
        let perms = all_permutations(n);
        let gens = g.greedy_generators();
        let mut count = 0;
        let mut idx = vec![0usize; gens.len()];
        loop {
            let assigned: Vec<&Permutation> = idx.iter().map(|&i| &perms[i]).collect();
            let spent = AtomicU64::new(0);
            let search = Search {
                group: g,
                gens: &gens,
                candidates: vec![],
                n,
                spent: &spent,
                budget: u64::MAX,
            };
            if let Some(img) = search.extend(&assigned) {
                let table: Vec<Permutation> = img.into_iter().map(Option::unwrap).collect();
                if is_homomorphism(&GroupMap::new(Arc::clone(g), table).unwrap()) {
                    count += 1;
                }
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return count;
                }
                idx[pos] += 1;
                if idx[pos] < perms.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn budget_refusal() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        assert!(matches!(
            enumerate_homomorphisms(&s3, 5, 10),
            Err(Error::BudgetExceeded { budget: 10 })
        ));
    }

    #[test]
    fn nearest_of_homomorphism_is_itself() {
        let f = GroupMap::regular(cyclic(4));
        let r = nearest_homomorphism(&f, 5, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.d_inf, ratio(0, 1));
        assert_eq!(r.n_used, 4);
        assert_eq!(r.h, f);
    }

    #[test]
    fn drop_point_strict_and_flexible() {
        let f = drop_point(&GroupMap::regular(cyclic(5))).unwrap();
        let strict = nearest_homomorphism(&f, 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(strict.candidates, 1);
        assert!(strict.d_inf >= ratio(1, 4));
        let flexible = nearest_homomorphism(&f, 5, DEFAULT_BUDGET).unwrap();
        assert!(flexible.d_inf < strict.d_inf);
        assert_eq!(flexible.n_used, 5);
    }

    #[test]
    fn intertwiner_equality_case() {
        let f = GroupMap::regular(cyclic(2));
        let h = GroupMap::trivial(cyclic(2), 1);
        let c = intertwiner_min_distance(&h, &f).unwrap();
        assert!((c.distance - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((c.distance - c.bound).abs() < INTERTWINER_SLACK);
    }

    #[test]
    fn intertwiner_z5() {
        let f = GroupMap::regular(cyclic(5));
        let h = GroupMap::trivial(cyclic(5), 4);
        let c = intertwiner_min_distance(&h, &f).unwrap();
        assert!(c.distance >= 2f64.sqrt() - INTERTWINER_SLACK);
    }

    #[test]
    fn intertwiner_rejects_intransitive() {
        let z2 = cyclic(2);
        let f = GroupMap::trivial(z2.clone(), 3);
        let h = GroupMap::trivial(z2, 2);
        assert!(matches!(
            intertwiner_min_distance(&h, &f),
            Err(Error::NotTransitive)
        ));
    }

    #[test]
    fn intertwiner_rejects_approximate_actions() {
        let f = GroupMap::regular(cyclic(5));
        let h = crate::counterexamples::drop_point(&f).unwrap();
        assert!(matches!(
            intertwiner_min_distance(&h, &f),
            Err(Error::NotHomomorphism { .. })
        ));
    }

    #[test]
    fn markov_edge_cases() {
        let theta = ratio(1, 4);
        assert!(markov_bound_check(&[ratio(1, 1); 5], theta));
        assert!(markov_bound_check(&[ratio(3, 4); 5], theta));
    }
}
