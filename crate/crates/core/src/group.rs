//! Finite groups given by multiplication tables, with subgroups, left coset
//! spaces and quotients. Every group carries the normalized counting
//! measure `m(A) = |A| / |Γ|`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::{all_permutations, Permutation};
use crate::Rational;

/// Associativity is checked on every triple up to this order, sampled above.
pub const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 64;

const ASSOCIATIVITY_SAMPLE_SEED: u64 = 0x5eed_a550c;

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    identity: usize,
    name: Option<String>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.mul == other.mul
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Validates a square table of element indices and derives the identity
    /// and inverses.
    pub fn from_mul_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        let mut mul = Vec::with_capacity(order * order);
        for (a, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidGroup(format!(
                    "row {a} has {} entries, expected {order}",
                    row.len()
                )));
            }
            for (b, &c) in row.iter().enumerate() {
                if c >= order {
                    return Err(Error::InvalidGroup(format!(
                        "entry ({a}, {b}) = {c} out of range"
                    )));
                }
                mul.push(c);
            }
        }
        let at = |a: usize, b: usize| mul[a * order + b];

        let identity = (0..order)
            .find(|&e| (0..order).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| Error::InvalidGroup("no two-sided identity".into()))?;

        let inv = (0..order)
            .map(|a| {
                (0..order)
                    .find(|&b| at(a, b) == identity && at(b, a) == identity)
                    .ok_or(Error::MissingInverse(a))
            })
            .collect::<Result<Vec<_>>>()?;

        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if at(at(a, b), c) != at(a, at(b, c)) {
                Err(Error::NotAssociative { a, b, c })
            } else {
                Ok(())
            }
        };
        if order <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(ASSOCIATIVITY_SAMPLE_SEED);
            for _ in 0..10 * order * order {
                check(
                    rng.gen_range(0..order),
                    rng.gen_range(0..order),
                    rng.gen_range(0..order),
                )?;
            }
        }

        Ok(FiniteGroup {
            order,
            mul,
            inv,
            identity,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// `ℤ/m` under addition; element `k` is the residue `k`.
    pub fn cyclic(m: usize) -> Self {
        assert!(m >= 1, "cyclic group order must be positive");
        let mul = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a + b) % m))
            .collect();
        let inv = (0..m).map(|a| (m - a) % m).collect();
        FiniteGroup {
            order: m,
            mul,
            inv,
            identity: 0,
            name: Some(format!("Z/{m}")),
        }
    }

    /// `Sym(n)` with elements numbered by lexicographic order of their image
    /// arrays (so the identity is element 0) and `a*b = a∘b`.
    pub fn symmetric(n: usize) -> Self {
        let elements = all_permutations(n);
        let index = |p: &Permutation| elements.binary_search(p).expect("closed under composition");
        let order = elements.len();
        let mut mul = Vec::with_capacity(order * order);
        for a in &elements {
            for b in &elements {
                mul.push(index(&a.compose_unchecked(b)));
            }
        }
        let inv = elements.iter().map(|a| index(&a.inverse())).collect();
        FiniteGroup {
            order,
            mul,
            inv,
            identity: 0,
            name: Some(format!("S{n}")),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Row `a` of the multiplication table.
    pub fn row(&self, a: usize) -> &[usize] {
        &self.mul[a * self.order..(a + 1) * self.order]
    }

    /// `g^k` for any integer `k`.
    pub fn pow(&self, g: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(g) } else { g };
        (0..k.unsigned_abs()).fold(self.identity, |acc, _| self.mul(acc, base))
    }

    /// Least `k ≥ 1` with `g^k = 1`.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Normalized counting measure of the subset marked by `indicator`.
    pub fn measure(&self, indicator: &[bool]) -> Rational {
        debug_assert_eq!(indicator.len(), self.order);
        let count = indicator.iter().filter(|&&b| b).count();
        Rational::new(count as i128, self.order as i128)
    }

    /// A generating set chosen greedily by element index: each generator is
    /// the least element outside the subgroup generated so far.
    pub fn greedy_generators(self: &Arc<Self>) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut current = vec![false; self.order];
        current[self.identity] = true;
        while let Some(g) = (0..self.order).find(|&g| !current[g]) {
            gens.push(g);
            current = closure(self, &gens);
        }
        gens
    }
}

fn closure(group: &FiniteGroup, gens: &[usize]) -> Vec<bool> {
    let mut member = vec![false; group.order()];
    member[group.identity()] = true;
    let mut frontier = vec![group.identity()];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            for y in [group.mul(x, g), group.mul(x, group.inv(g))] {
                if !std::mem::replace(&mut member[y], true) {
                    frontier.push(y);
                }
            }
        }
    }
    member
}

/// A subgroup, stored as the sorted list of its element indices.
#[derive(Clone, Debug)]
pub struct Subgroup {
    group: Arc<FiniteGroup>,
    elements: Vec<usize>,
    member: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.elements == other.elements
    }
}

impl Subgroup {
    /// Validates that `elements` contains the identity and is closed under
    /// multiplication and inverses.
    pub fn new(group: Arc<FiniteGroup>, elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut member = vec![false; group.order()];
        for g in elements {
            if g >= group.order() {
                return Err(Error::NotSubgroup(format!("element {g} out of range")));
            }
            member[g] = true;
        }
        if !member[group.identity()] {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        let elements: Vec<usize> = (0..group.order()).filter(|&g| member[g]).collect();
        for &a in &elements {
            if !member[group.inv(a)] {
                return Err(Error::NotSubgroup(format!("inverse of {a} missing")));
            }
            for &b in &elements {
                if !member[group.mul(a, b)] {
                    return Err(Error::NotSubgroup(format!("product {a}*{b} missing")));
                }
            }
        }
        debug_assert_eq!(group.order() % elements.len(), 0);
        Ok(Subgroup {
            group,
            elements,
            member,
        })
    }

    pub fn trivial(group: Arc<FiniteGroup>) -> Self {
        let e = group.identity();
        Subgroup::new(group, [e]).expect("trivial subgroup")
    }

    pub fn whole(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        Subgroup::new(group, 0..n).expect("whole group")
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn contains(&self, g: usize) -> bool {
        self.member[g]
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `[Γ : H]`.
    pub fn index(&self) -> usize {
        self.group.order() / self.elements.len()
    }

    pub fn measure(&self) -> Rational {
        self.group.measure(&self.member)
    }

    /// Checks `gDg⁻¹ = D` for every `g`, naming the first violation.
    pub fn check_normal(&self) -> Result<()> {
        let g = &self.group;
        for c in g.elements() {
            for &d in &self.elements {
                if !self.member[g.mul(g.mul(c, d), g.inv(c))] {
                    return Err(Error::NotNormal {
                        conjugator: c,
                        element: d,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Smallest subgroup containing `gens`.
pub fn subgroup_generated(group: &Arc<FiniteGroup>, gens: &[usize]) -> Subgroup {
    let member = closure(group, gens);
    let elements: Vec<usize> = (0..group.order()).filter(|&g| member[g]).collect();
    Subgroup {
        group: Arc::clone(group),
        elements,
        member,
    }
}

/// Left cosets `gH` with minimal-index representatives.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    subgroup: Subgroup,
    transversal: Vec<usize>,
    coset_of: Vec<usize>,
}

impl CosetSpace {
    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// Representatives, one per coset, in increasing order.
    pub fn transversal(&self) -> &[usize] {
        &self.transversal
    }

    pub fn coset_of(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    pub fn len(&self) -> usize {
        self.transversal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transversal.is_empty()
    }

    /// Left multiplication: `γ · (gH) = (γg)H`.
    pub fn act(&self, gamma: usize, coset: usize) -> usize {
        let g = self.subgroup.group();
        self.coset_of[g.mul(gamma, self.transversal[coset])]
    }

    /// The action of `γ` on the cosets as a permutation of `[0, index)`.
    pub fn action(&self, gamma: usize) -> Permutation {
        Permutation::from_images_unchecked((0..self.len()).map(|c| self.act(gamma, c)).collect())
    }
}

pub fn left_cosets(subgroup: &Subgroup) -> CosetSpace {
    let g = subgroup.group();
    let mut coset_of = vec![usize::MAX; g.order()];
    let mut transversal = Vec::with_capacity(subgroup.index());
    for rep in g.elements() {
        if coset_of[rep] != usize::MAX {
            continue;
        }
        let c = transversal.len();
        transversal.push(rep);
        for &h in subgroup.elements() {
            coset_of[g.mul(rep, h)] = c;
        }
    }
    CosetSpace {
        subgroup: subgroup.clone(),
        transversal,
        coset_of,
    }
}

/// `Γ/D` on coset indices together with the projection `Γ → Γ/D`.
pub fn quotient(normal: &Subgroup) -> Result<(FiniteGroup, Vec<usize>)> {
    normal.check_normal()?;
    let g = normal.group();
    let cosets = left_cosets(normal);
    let k = cosets.len();
    let table: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| cosets.coset_of(g.mul(cosets.transversal()[i], cosets.transversal()[j])))
                .collect()
        })
        .collect();
    let mut q = FiniteGroup::from_mul_table(table)?;
    if let Some(name) = g.name() {
        q = q.with_name(format!("{name}/D{}", normal.order()));
    }
    Ok((q, cosets.coset_of.clone()))
}
