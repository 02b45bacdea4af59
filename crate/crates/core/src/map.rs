//! Maps `f: Γ → Sym(n)` stored as one permutation per group element, their
//! local defects and distances, and symmetrization.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{left_cosets, FiniteGroup, Subgroup};
use crate::perm::{hamming, Permutation};
use crate::{int, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupMap {
    group: Arc<FiniteGroup>,
    degree: usize,
    table: Vec<Permutation>,
}

impl GroupMap {
    pub fn new(group: Arc<FiniteGroup>, table: Vec<Permutation>) -> Result<Self> {
        if table.len() != group.order() {
            return Err(Error::InvalidMap(format!(
                "{} permutations for a group of order {}",
                table.len(),
                group.order()
            )));
        }
        let degree = table[0].degree();
        if let Some(bad) = table.iter().position(|p| p.degree() != degree) {
            return Err(Error::InvalidMap(format!(
                "image of element {bad} has degree {}, expected {degree}",
                table[bad].degree()
            )));
        }
        Ok(GroupMap {
            group,
            degree,
            table,
        })
    }

    pub fn from_fn(
        group: Arc<FiniteGroup>,
        mut image: impl FnMut(usize) -> Permutation,
    ) -> Result<Self> {
        let table = group.elements().map(&mut image).collect();
        GroupMap::new(group, table)
    }

    /// `γ ↦ id` on `n` points.
    pub fn trivial(group: Arc<FiniteGroup>, n: usize) -> Self {
        let table = vec![Permutation::identity(n); group.order()];
        GroupMap {
            group,
            degree: n,
            table,
        }
    }

    /// Left multiplication of `Γ` on itself, points labelled by element index.
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let table = group
            .elements()
            .map(|g| Permutation::from_images_unchecked(group.row(g).to_vec()))
            .collect();
        GroupMap {
            degree: group.order(),
            group,
            table,
        }
    }

    /// Left multiplication on the cosets of `subgroup`.
    pub fn coset_action(subgroup: &Subgroup) -> Self {
        let cosets = left_cosets(subgroup);
        let group = Arc::clone(subgroup.group());
        let table = group.elements().map(|g| cosets.action(g)).collect();
        GroupMap {
            degree: cosets.len(),
            group,
            table,
        }
    }

    /// Side-by-side action on the disjoint union of the point sets, in order.
    pub fn disjoint_union(parts: &[GroupMap]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidMap("empty union".into()))?;
        if parts.iter().any(|p| p.group != first.group) {
            return Err(Error::GroupMismatch);
        }
        let degree: usize = parts.iter().map(|p| p.degree).sum();
        let table = first
            .group
            .elements()
            .map(|g| {
                let mut image = Vec::with_capacity(degree);
                let mut offset = 0;
                for part in parts {
                    image.extend(part.table[g].images().iter().map(|&y| y + offset));
                    offset += part.degree;
                }
                Permutation::from_images_unchecked(image)
            })
            .collect();
        Ok(GroupMap {
            group: Arc::clone(&first.group),
            degree,
            table,
        })
    }

    /// `γ ↦ σ f(γ) σ⁻¹`.
    pub fn conjugate(&self, sigma: &Permutation) -> Result<Self> {
        let sigma_inv = sigma.inverse();
        let table = self
            .table
            .iter()
            .map(|p| sigma.compose(&p.compose(&sigma_inv)?))
            .collect::<Result<_>>()?;
        Ok(GroupMap {
            group: Arc::clone(&self.group),
            degree: self.degree,
            table,
        })
    }

    /// Extends every image by fixed points up to `big_n` points.
    pub fn pad(&self, big_n: usize) -> Self {
        assert!(big_n >= self.degree);
        let table = self
            .table
            .iter()
            .map(|p| {
                let mut image = p.images().to_vec();
                image.extend(self.degree..big_n);
                Permutation::from_images_unchecked(image)
            })
            .collect();
        GroupMap {
            group: Arc::clone(&self.group),
            degree: big_n,
            table,
        }
    }

    /// Replaces the image of one element.
    pub fn with_image(&self, g: usize, image: Permutation) -> Result<Self> {
        if image.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: image.degree(),
            });
        }
        let mut table = self.table.clone();
        table[g] = image;
        Ok(GroupMap {
            group: Arc::clone(&self.group),
            degree: self.degree,
            table,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn image(&self, g: usize) -> &Permutation {
        &self.table[g]
    }

    pub fn table(&self) -> &[Permutation] {
        &self.table
    }

    /// Points where `f(ab)` and `f(a)f(b)` disagree.
    pub fn pair_disagreements(&self, a: usize, b: usize) -> usize {
        let ab = &self.table[self.group.mul(a, b)];
        let fa = &self.table[a];
        let fb = &self.table[b];
        (0..self.degree)
            .filter(|&x| ab.apply(x) != fa.apply(fb.apply(x)))
            .count()
    }

    /// Whether the single orbit of the action is all of `[n]`.
    pub fn is_transitive(&self) -> bool {
        let mut seen = vec![false; self.degree];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for p in &self.table {
                let y = p.apply(x);
                if !std::mem::replace(&mut seen[y], true) {
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// Uniform and mean local defect of a map, with a pair attaining the maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectReport {
    pub defect_inf: Rational,
    pub defect_mean: Rational,
    pub argmax: (usize, usize),
}

/// Exact defects by scanning all `|Γ|²` ordered pairs.
pub fn defects(f: &GroupMap) -> DefectReport {
    let order = f.group.order();
    // (max count, argmax, total) per first coordinate, merged in index order
    let rows: Vec<(usize, usize, usize)> = (0..order)
        .into_par_iter()
        .map(|a| {
            let mut best = (0usize, 0usize);
            let mut total = 0usize;
            for b in 0..order {
                let c = f.pair_disagreements(a, b);
                total += c;
                if c > best.0 {
                    best = (c, b);
                }
            }
            (best.0, best.1, total)
        })
        .collect();
    let mut max = 0;
    let mut argmax = (0, 0);
    let mut total = 0;
    for (a, &(m, b, t)) in rows.iter().enumerate() {
        total += t;
        if m > max {
            max = m;
            argmax = (a, b);
        }
    }
    let n = f.degree as i128;
    DefectReport {
        defect_inf: Rational::new(max as i128, n),
        defect_mean: Rational::new(total as i128, (order * order) as i128 * n),
        argmax,
    }
}

/// Uniform and mean distance between maps; infinite across different groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distance {
    Finite { sup: Rational, mean: Rational },
    Infinite,
}

impl Distance {
    pub fn sup(&self) -> Option<Rational> {
        match self {
            Distance::Finite { sup, .. } => Some(*sup),
            Distance::Infinite => None,
        }
    }

    pub fn mean(&self) -> Option<Rational> {
        match self {
            Distance::Finite { mean, .. } => Some(*mean),
            Distance::Infinite => None,
        }
    }

    /// Both components, or an error naming the group mismatch.
    pub fn finite(&self) -> Result<(Rational, Rational)> {
        match self {
            Distance::Finite { sup, mean } => Ok((*sup, *mean)),
            Distance::Infinite => Err(Error::GroupMismatch),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite { sup, mean } => write!(f, "d_inf={sup} d_mean={mean}"),
            Distance::Infinite => f.write_str("maps over different groups have distance ∞"),
        }
    }
}

pub fn distance(f: &GroupMap, h: &GroupMap) -> Distance {
    if f.group != h.group {
        return Distance::Infinite;
    }
    let per: Vec<Rational> = f
        .table
        .iter()
        .zip(&h.table)
        .map(|(a, b)| hamming(a, b))
        .collect();
    let sup = per.iter().copied().max().unwrap_or_default();
    let sum: Rational = per.iter().copied().sum();
    Distance::Finite {
        sup,
        mean: sum / int(per.len()),
    }
}

/// First pair `(a, b)` with `f(ab) ≠ f(a)f(b)`.
pub fn first_violation(f: &GroupMap) -> Option<(usize, usize)> {
    let order = f.group.order();
    (0..order)
        .flat_map(|a| (0..order).map(move |b| (a, b)))
        .find(|&(a, b)| f.pair_disagreements(a, b) > 0)
}

pub fn is_homomorphism(f: &GroupMap) -> bool {
    first_violation(f).is_none()
}

/// `f(1) = id` and `f(γ⁻¹) = f(γ)⁻¹` for every `γ`.
pub fn is_symmetric(f: &GroupMap) -> bool {
    let g = &f.group;
    f.table[g.identity()].is_identity()
        && g.elements()
            .all(|a| f.table[g.inv(a)] == f.table[a].inverse())
}

/// Approximate square roots in `Sym(n)` are within `M₂ · d(σ², id)` of an
/// involution; the concrete repair achieves `M₂ = 1`.
const INVOLUTION_REPAIR_RATE: i128 = 1;

/// Measured quantities of one symmetrization, with the guaranteed bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetrizationReport {
    pub defect_inf: Rational,
    pub defect_mean: Rational,
    pub dist_inf: Rational,
    pub dist_mean: Rational,
    pub new_defect_inf: Rational,
    pub new_defect_mean: Rational,
}

impl SymmetrizationReport {
    /// `(measured, bound, label)` for each guaranteed inequality.
    pub fn bounds(&self) -> Vec<(Rational, Rational, &'static str)> {
        let c = Rational::from_integer(2 * INVOLUTION_REPAIR_RATE.max(1));
        let one = Rational::from_integer(1);
        let three = Rational::from_integer(3);
        let four = Rational::from_integer(4);
        vec![
            (
                self.dist_inf,
                c * self.defect_inf,
                "d_inf(f, f') <= 2 defect_inf(f)",
            ),
            (
                self.dist_mean,
                (c + one) * self.defect_mean,
                "d_mean(f, f') <= 3 defect_mean(f)",
            ),
            (
                self.new_defect_inf,
                (three * c + one) * self.defect_inf,
                "defect_inf(f') <= 7 defect_inf(f)",
            ),
            (
                self.new_defect_mean,
                (three * c + four) * self.defect_mean,
                "defect_mean(f') <= 10 defect_mean(f)",
            ),
        ]
    }
}

/// The symmetric map close to `f`: identity at `1`, `f(γ)` on the selector
/// set `{γ : γ < γ⁻¹}` (by element index), inverses on the partner
/// elements, and the nearest involution on elements of order two.
pub fn symmetrize(f: &GroupMap) -> Result<GroupMap> {
    symmetrize_with_report(f).map(|(m, _)| m)
}

pub fn symmetrize_with_report(f: &GroupMap) -> Result<(GroupMap, SymmetrizationReport)> {
    let g = &f.group;
    let table = g
        .elements()
        .map(|a| {
            let inv = g.inv(a);
            if a == g.identity() {
                Permutation::identity(f.degree)
            } else if a == inv {
                f.table[a].nearest_involution()
            } else if a < inv {
                f.table[a].clone()
            } else {
                f.table[inv].inverse()
            }
        })
        .collect();
    let sym = GroupMap {
        group: Arc::clone(g),
        degree: f.degree,
        table,
    };
    debug_assert!(is_symmetric(&sym));

    let before = defects(f);
    let after = defects(&sym);
    let (dist_inf, dist_mean) = distance(f, &sym).finite()?;
    let report = SymmetrizationReport {
        defect_inf: before.defect_inf,
        defect_mean: before.defect_mean,
        dist_inf,
        dist_mean,
        new_defect_inf: after.defect_inf,
        new_defect_mean: after.defect_mean,
    };
    for (measured, bound, label) in report.bounds() {
        if measured > bound {
            return Err(Error::invariant(
                format!("symmetrization: {label} (measured {measured}, bound {bound})"),
                format!("{report:?}"),
            ));
        }
    }
    Ok((sym, report))
}
