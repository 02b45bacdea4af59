//! Γ-graphs on subsets of `[n]`: function graphs, supporter weights, the
//! `X_ε ⊇ Y_ε ⊇ Z_ε` cascade and groupoid structure.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup};
use crate::map::{is_symmetric, GroupMap};
use crate::{int, ratio, Rational};

/// A partial functional edge map `(x, γ) ↦ y` on a vertex subset of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaGraph {
    group: Arc<FiniteGroup>,
    n: usize,
    vertex: Vec<bool>,
    edges: Vec<Option<usize>>,
}

impl GammaGraph {
    /// No edges on the given vertex set.
    pub fn empty(group: Arc<FiniteGroup>, n: usize, vertex: Vec<bool>) -> Self {
        assert_eq!(vertex.len(), n);
        let edges = vec![None; n * group.order()];
        GammaGraph {
            group,
            n,
            vertex,
            edges,
        }
    }

    /// Adds `x →γ y`; both endpoints must be vertices and the slot free.
    pub fn add_edge(&mut self, x: usize, gamma: usize, y: usize) -> Result<()> {
        if !self.contains(x) || !self.contains(y) {
            return Err(Error::InvalidArgument(format!(
                "edge {x} -{gamma}-> {y} leaves the vertex set"
            )));
        }
        let slot = &mut self.edges[x * self.group.order() + gamma];
        if slot.is_some_and(|z| z != y) {
            return Err(Error::InvalidArgument(format!(
                "second edge out of {x} labelled {gamma}"
            )));
        }
        *slot = Some(y);
        Ok(())
    }

    pub fn remove_edge(&mut self, x: usize, gamma: usize) {
        self.edges[x * self.group.order() + gamma] = None;
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// Size of the ambient point set.
    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.n && self.vertex[x]
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&x| self.vertex[x])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex.iter().filter(|&&b| b).count()
    }

    #[inline]
    pub fn edge(&self, x: usize, gamma: usize) -> Option<usize> {
        self.edges[x * self.group.order() + gamma]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let order = self.group.order();
        self.edges
            .iter()
            .enumerate()
            .filter_map(move |(i, e)| e.map(|y| (i / order, i % order, y)))
    }

    /// `|Œ(x)|`, the number of outgoing labels.
    pub fn out_count(&self, x: usize) -> usize {
        let order = self.group.order();
        self.edges[x * order..(x + 1) * order]
            .iter()
            .filter(|e| e.is_some())
            .count()
    }

    /// `deg(x) = m(Œ(x))`.
    pub fn degree(&self, x: usize) -> Rational {
        Rational::new(self.out_count(x) as i128, self.group.order() as i128)
    }

    /// `|D(γ)|`, the number of vertices with an outgoing `γ` edge.
    pub fn domain_size(&self, gamma: usize) -> usize {
        (0..self.n)
            .filter(|&x| self.edge(x, gamma).is_some())
            .count()
    }

    /// Mean of `|D(γ)|` over the group.
    pub fn mean_domain_size(&self) -> Rational {
        let total: usize = self.group.elements().map(|g| self.domain_size(g)).sum();
        Rational::new(total as i128, self.group.order() as i128)
    }

    /// The subgraph induced on `keep ∩ V`.
    pub fn induced(&self, keep: &[bool]) -> GammaGraph {
        let vertex: Vec<bool> = self
            .vertex
            .iter()
            .zip(keep)
            .map(|(&a, &b)| a && b)
            .collect();
        let order = self.group.order();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| e.filter(|&y| vertex[i / order] && vertex[y]))
            .collect();
        GammaGraph {
            group: Arc::clone(&self.group),
            n: self.n,
            vertex,
            edges,
        }
    }

    /// Whether every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &GammaGraph) -> bool {
        self.vertices().all(|x| other.contains(x))
            && self.edges().all(|(x, g, y)| other.edge(x, g) == Some(y))
    }
}

/// `X_f`: every `x` has the edge `x →γ f(γ)(x)`.
pub fn function_graph(f: &GroupMap) -> GammaGraph {
    let group = Arc::clone(f.group());
    let n = f.degree();
    let order = group.order();
    let edges = (0..n * order)
        .map(|i| Some(f.image(i % order).apply(i / order)))
        .collect();
    GammaGraph {
        group,
        n,
        vertex: vec![true; n],
        edges,
    }
}

/// `T(x →γ y) = {t : f(t) f(t⁻¹γ)(x) = y}`.
pub fn supporters(f: &GroupMap, x: usize, gamma: usize, y: usize) -> Vec<usize> {
    let g = f.group();
    g.elements()
        .filter(|&t| f.image(t).apply(f.image(g.mul(g.inv(t), gamma)).apply(x)) == y)
        .collect()
}

/// `w(x →γ y) = |T(x →γ y)| / |Γ|` for an arbitrary target `y`.
pub fn edge_weight(f: &GroupMap, x: usize, gamma: usize, y: usize) -> Rational {
    Rational::new(
        supporters(f, x, gamma, y).len() as i128,
        f.group().order() as i128,
    )
}

/// Supporter counts of the function-graph edges, `w[x][γ] = count / |Γ|`,
/// together with the majority target of each `(x, γ)` vote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTable {
    order: usize,
    n: usize,
    counts: Vec<u32>,
    leaders: Vec<u32>,
    leader_counts: Vec<u32>,
}

const NO_LEADER: u32 = u32::MAX;

impl WeightTable {
    pub fn count(&self, x: usize, gamma: usize) -> usize {
        self.counts[x * self.order + gamma] as usize
    }

    pub fn weight(&self, x: usize, gamma: usize) -> Rational {
        Rational::new(self.count(x, gamma) as i128, self.order as i128)
    }

    /// The target `y` with `w(x →γ y) > 1/2`, with its weight, if any.
    pub fn leader(&self, x: usize, gamma: usize) -> Option<(usize, Rational)> {
        let i = x * self.order + gamma;
        (self.leaders[i] != NO_LEADER).then(|| {
            (
                self.leaders[i] as usize,
                Rational::new(self.leader_counts[i] as i128, self.order as i128),
            )
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn group_order(&self) -> usize {
        self.order
    }

    /// Whether `w[x][γ] > 1 − ε`.
    pub fn exceeds(&self, x: usize, gamma: usize, eps: Rational) -> bool {
        self.weight(x, gamma) > Rational::from_integer(1) - eps
    }

    /// The target of weight `> 1 − ε` out of `x` under `γ`, for `ε < 1/2`.
    pub fn strong_target(&self, x: usize, gamma: usize, eps: Rational) -> Option<usize> {
        self.leader(x, gamma)
            .filter(|&(_, w)| w > Rational::from_integer(1) - eps)
            .map(|(y, _)| y)
    }
}

pub fn weight_table(f: &GroupMap) -> WeightTable {
    let g = f.group();
    let order = g.order();
    let n = f.degree();
    // Precompute f(t⁻¹γ) indices once per (t, γ).
    let shifted: Vec<usize> = (0..order * order)
        .map(|i| g.mul(g.inv(i / order), i % order))
        .collect();
    let cells: Vec<(u32, u32, u32)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let shifted = &shifted;
            (0..order).map(move |gamma| {
                let votes: Vec<usize> = (0..order)
                    .map(|t| {
                        f.image(t)
                            .apply(f.image(shifted[t * order + gamma]).apply(x))
                    })
                    .collect();
                let y = f.image(gamma).apply(x);
                let own = votes.iter().filter(|&&v| v == y).count() as u32;
                // Boyer-Moore majority, then verify
                let mut cand = votes[0];
                let mut run = 0usize;
                for &v in &votes {
                    if run == 0 {
                        cand = v;
                    }
                    run = if v == cand { run + 1 } else { run - 1 };
                }
                let hits = votes.iter().filter(|&&v| v == cand).count();
                if 2 * hits > order {
                    (own, cand as u32, hits as u32)
                } else {
                    (own, NO_LEADER, 0)
                }
            })
        })
        .collect();
    WeightTable {
        order,
        n,
        counts: cells.iter().map(|c| c.0).collect(),
        leaders: cells.iter().map(|c| c.1).collect(),
        leader_counts: cells.iter().map(|c| c.2).collect(),
    }
}

/// Every `x →γ y` with `w(x →γ y) > 1 − ε`, over all targets `y`.
fn threshold_graph(f: &GroupMap, weights: &WeightTable, eps: Rational) -> GammaGraph {
    let group = Arc::clone(f.group());
    let n = f.degree();
    let order = group.order();
    let edges = (0..n * order)
        .map(|i| weights.strong_target(i / order, i % order, eps))
        .collect();
    GammaGraph {
        group,
        n,
        vertex: vec![true; n],
        edges,
    }
}

/// The graphs of one cascade level.
#[derive(Clone, Debug)]
pub struct Cascade {
    pub eps: Rational,
    pub x_eps: GammaGraph,
    pub x_2eps: GammaGraph,
    pub y: GammaGraph,
    pub z: GammaGraph,
}

/// The `ε` at which all guarantees are stated.
pub fn default_eps() -> Rational {
    ratio(1, 6)
}

pub fn build_cascade(f: &GroupMap, eps: Rational) -> Result<Cascade> {
    build_cascade_with_weights(f, &weight_table(f), eps)
}

/// `X_ε` keeps every `x →γ y` of weight `> 1 − ε`, whether or not `y = f(γ)(x)`; `Y_ε` is `X_{2ε}` induced on
/// `{deg_{X_ε} > 2/3}`; `Z_ε` is `Y_ε` induced on `{deg_{Y_ε} ≥ 1/2}`.
pub fn build_cascade_with_weights(
    f: &GroupMap,
    weights: &WeightTable,
    eps: Rational,
) -> Result<Cascade> {
    if eps <= Rational::default() || eps > default_eps() {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    if !is_symmetric(f) {
        return Err(Error::NotSymmetric);
    }
    let n = f.degree();
    let x_eps = threshold_graph(f, weights, eps);
    let x_2eps = threshold_graph(f, weights, eps * int(2));
    let keep_y: Vec<bool> = (0..n).map(|x| x_eps.degree(x) > ratio(2, 3)).collect();
    let y = x_2eps.induced(&keep_y);
    let keep_z: Vec<bool> = (0..n)
        .map(|x| y.contains(x) && y.degree(x) >= ratio(1, 2))
        .collect();
    let z = y.induced(&keep_z);

    // Z is also the union of the components of Y of degree at least 1/2.
    let comps = components(&y)?;
    let mut keep_alt = vec![false; n];
    for comp in &comps {
        if y.degree(comp[0]) >= ratio(1, 2) {
            for &v in comp {
                keep_alt[v] = true;
            }
        }
    }
    if keep_alt != keep_z {
        return Err(Error::invariant(
            "Z equals the union of Y-components of degree >= 1/2",
            format!("vertex filter {keep_z:?}, component filter {keep_alt:?}"),
        ));
    }
    Ok(Cascade {
        eps,
        x_eps,
        x_2eps,
        y,
        z,
    })
}

/// A failed groupoid axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupoidViolation {
    /// `x →γ y` without `y →γ⁻¹ x`.
    MissingReverse { x: usize, gamma: usize, y: usize },
    /// `x →γ₁ y →γ₂ z` without `x →γ₂γ₁ z`.
    MissingTriangle {
        x: usize,
        g1: usize,
        y: usize,
        g2: usize,
        z: usize,
    },
}

pub fn check_groupoid(graph: &GammaGraph) -> std::result::Result<(), GroupoidViolation> {
    let g = &graph.group;
    for (x, gamma, y) in graph.edges() {
        if graph.edge(y, g.inv(gamma)) != Some(x) {
            return Err(GroupoidViolation::MissingReverse { x, gamma, y });
        }
    }
    for (x, g1, y) in graph.edges() {
        for g2 in g.elements() {
            if let Some(z) = graph.edge(y, g2) {
                if graph.edge(x, g.mul(g2, g1)) != Some(z) {
                    return Err(GroupoidViolation::MissingTriangle { x, g1, y, g2, z });
                }
            }
        }
    }
    Ok(())
}

/// Connected components, each sorted, ordered by minimal vertex.
pub fn components(graph: &GammaGraph) -> Result<Vec<Vec<usize>>> {
    if let Err(v) = check_groupoid(graph) {
        return Err(Error::NotGroupoid(format!("{v:?}")));
    }
    let mut dsu = Dsu::new(graph.n);
    for (x, _, y) in graph.edges() {
        dsu.union(x, y);
    }
    let mut by_root: Vec<Option<usize>> = vec![None; graph.n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for x in graph.vertices() {
        let r = dsu.find(x);
        let slot = *by_root[r].get_or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[slot].push(x);
    }
    Ok(out)
}

/// `Γ_x = {γ : x →γ x}`.
pub fn stabilizer(graph: &GammaGraph, x: usize) -> Result<Subgroup> {
    if !graph.contains(x) {
        return Err(Error::InvalidArgument(format!("{x} is not a vertex")));
    }
    let elements: Vec<usize> = graph
        .group
        .elements()
        .filter(|&g| graph.edge(x, g) == Some(x))
        .collect();
    Subgroup::new(Arc::clone(&graph.group), elements)
}

/// `Σ_x deg(x) = (1/|Γ|) Σ_γ |D(γ)|`, compared exactly.
pub fn deg_and_domain_holds(graph: &GammaGraph) -> bool {
    let lhs: Rational = graph.vertices().map(|x| graph.degree(x)).sum();
    lhs == graph.mean_domain_size()
}

/// For each component of positive degree, `|V(C)| / [Γ : Γ_x] = deg(C)`.
pub fn index_degree_holds(graph: &GammaGraph) -> Result<bool> {
    for comp in components(graph)? {
        let base = comp[0];
        let deg = graph.degree(base);
        if deg == Rational::default() {
            continue;
        }
        let index = stabilizer(graph, base)?.index();
        if Rational::new(comp.len() as i128, index as i128) != deg
            || comp.iter().any(|&v| graph.degree(v) != deg)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `|{i : a_i > 1 − θ}| ≥ (1 − (1 − mean)/θ) · m` for values in `[0, 1]`.
pub fn markov_holds(values: &[Rational], theta: Rational) -> bool {
    let m = int(values.len());
    if values.is_empty() {
        return true;
    }
    let one = Rational::from_integer(1);
    let mean = values.iter().copied().sum::<Rational>() / m;
    let hits = values.iter().filter(|&&a| a > one - theta).count();
    int(hits) >= (one - (one - mean) / theta) * m
}

/// Lower bounds on vertex and domain sizes along the cascade, as
/// `(measured, bound, label)`; the `Z` bounds apply only when `δ₁ ≤ ε/13`.
pub fn cascade_bounds(
    c: &Cascade,
    n: usize,
    delta_inf: Rational,
    delta_mean: Rational,
) -> Vec<(Rational, Rational, String)> {
    let one = Rational::from_integer(1);
    let nn = int(n);
    let eps = c.eps;
    let group = c.x_eps.group();
    let lower = |k: Rational, d: Rational| (one - k * d / eps) * nn;
    let min_domain = |g: &GammaGraph| {
        group
            .elements()
            .map(|x| int(g.domain_size(x)))
            .min()
            .unwrap_or_default()
    };
    let mut out = Vec::new();
    // On the X level the bounds hold at every threshold.
    for (graph, e, tag) in [(&c.x_eps, eps, "eps"), (&c.x_2eps, eps * int(2), "2eps")] {
        out.push((
            min_domain(graph),
            (one - delta_inf / e) * nn,
            format!("min |D_X_{tag}(g)| >= (1 - delta_inf/{tag}) n"),
        ));
        out.push((
            graph.mean_domain_size(),
            (one - delta_mean / e) * nn,
            format!("mean |D_X_{tag}(g)| >= (1 - delta_mean/{tag}) n"),
        ));
    }
    let k = |num: i128, den: i128| ratio(num, den);
    out.push((
        int(c.y.vertex_count()),
        lower(k(3, 1), delta_mean),
        "|V(Y)| >= (1 - 3 delta_mean/eps) n".into(),
    ));
    out.push((
        min_domain(&c.y),
        lower(k(13, 2), delta_inf),
        "min |D_Y(g)| >= (1 - 6.5 delta_inf/eps) n".into(),
    ));
    out.push((
        c.y.mean_domain_size(),
        lower(k(13, 2), delta_mean),
        "mean |D_Y(g)| >= (1 - 6.5 delta_mean/eps) n".into(),
    ));
    if delta_mean * int(13) <= eps {
        out.push((
            int(c.z.vertex_count()),
            lower(k(16, 1), delta_mean),
            "|V(Z)| >= (1 - 16 delta_mean/eps) n".into(),
        ));
        out.push((
            min_domain(&c.z),
            lower(k(39, 2), delta_inf),
            "min |D_Z(g)| >= (1 - 19.5 delta_inf/eps) n".into(),
        ));
        out.push((
            c.z.mean_domain_size(),
            lower(k(39, 2), delta_mean),
            "mean |D_Z(g)| >= (1 - 19.5 delta_mean/eps) n".into(),
        ));
        let inv_sum: Rational = c.z.vertices().map(|x| one / c.z.degree(x)).sum();
        // upper bound, stored negated so every entry reads measured >= bound
        out.push((
            -inv_sum,
            -(one + k(13, 1) * delta_mean / eps) * nn,
            "sum 1/deg_Z <= (1 + 13 delta_mean/eps) n".into(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{subgroup_generated, Subgroup};
    use crate::map::{defects, symmetrize};
    use crate::perm::Permutation;
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cyclic(m: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(m))
    }

    fn perturbed_shift(m: usize, seed: u64, swaps: usize) -> GroupMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = GroupMap::regular(cyclic(m));
        for _ in 0..swaps {
            let g = rng.gen_range(0..m);
            let mut img = f.image(g).images().to_vec();
            let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
            img.swap(a, b);
            f = f
                .with_image(g, Permutation::from_images(img).unwrap())
                .unwrap();
        }
        f
    }

    fn random_symmetric(rng: &mut impl Rng, group: Arc<FiniteGroup>, n: usize) -> GroupMap {
        let f = GroupMap::from_fn(group, |_| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(rng);
            Permutation::from_images(v).unwrap()
        })
        .unwrap();
        symmetrize(&f).unwrap_or_else(|e| panic!("{e}"))
    }

    #[test]
    fn function_graph_examples() {
        let trivial = GroupMap::trivial(cyclic(3), 4);
        let x = function_graph(&trivial);
        assert!(x.edges().all(|(a, _, b)| a == b));
        assert_eq!(x.edges().count(), 12);
        let swap = GroupMap::regular(cyclic(2));
        let x = function_graph(&swap);
        assert_eq!(x.edge(0, 1), Some(1));
        assert_eq!(x.edge(1, 1), Some(0));
        assert!(deg_and_domain_holds(&x));
    }

    #[test]
    fn supporters_of_homomorphism() {
        let f = GroupMap::regular(cyclic(5));
        for x in 0..5 {
            for g in 0..5 {
                let y = f.image(g).apply(x);
                assert_eq!(supporters(&f, x, g, y).len(), 5);
                assert!(supporters(&f, x, g, (y + 1) % 5).is_empty());
            }
        }
        assert!(weight_table(&f).counts.iter().all(|&c| c == 5));
        let one = GroupMap::trivial(cyclic(1), 3);
        assert!(weight_table(&one).counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn weight_table_matches_supporters() {
        let f = perturbed_shift(3, 1, 2);
        let w = weight_table(&f);
        for x in 0..3 {
            for g in 0..3 {
                assert_eq!(w.weight(x, g), edge_weight(&f, x, g, f.image(g).apply(x)));
                assert_eq!(
                    w.count(x, g),
                    supporters(&f, x, g, f.image(g).apply(x)).len()
                );
            }
        }
    }

    #[test]
    fn cascade_of_homomorphism_is_function_graph() {
        let f = GroupMap::regular(Arc::new(FiniteGroup::symmetric(3)));
        for eps in [ratio(1, 6), ratio(1, 10), ratio(1, 100)] {
            let c = build_cascade(&f, eps).unwrap();
            let xf = function_graph(&f);
            for g in [&c.x_eps, &c.x_2eps, &c.y, &c.z] {
                assert_eq!(g, &xf);
            }
        }
    }

    #[test]
    fn cascade_preconditions() {
        let f = GroupMap::regular(cyclic(4));
        assert!(matches!(
            build_cascade(&f, ratio(1, 5)),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            build_cascade(&f, ratio(0, 1)),
            Err(Error::EpsilonOutOfRange(_))
        ));
        let t = Permutation::parse_cycles(4, "(0 1)").unwrap();
        let bad = f.with_image(0, t).unwrap();
        assert!(matches!(
            build_cascade(&bad, ratio(1, 6)),
            Err(Error::NotSymmetric)
        ));
    }

    #[test]
    fn groupoid_checks() {
        let f = GroupMap::regular(cyclic(4));
        let mut x = function_graph(&f);
        assert_eq!(check_groupoid(&x), Ok(()));
        x.remove_edge(2, 3);
        assert_eq!(
            check_groupoid(&x),
            Err(GroupoidViolation::MissingReverse {
                x: 1,
                gamma: 1,
                y: 2
            })
        );
        assert!(components(&x).is_err());
    }

    #[test]
    fn majority_edges_close_triangles_that_function_edges_miss() {
        let s4 = Arc::new(FiniteGroup::symmetric(4));
        let base = GroupMap::disjoint_union(&vec![GroupMap::regular(s4.clone()); 5]).unwrap();
        let c = s4.elements().find(|&g| s4.inv(g) > g).unwrap();
        let mut img = base.image(c).images().to_vec();
        img.swap(0, 30);
        let f = symmetrize(
            &base
                .with_image(c, Permutation::from_images(img).unwrap())
                .unwrap(),
        )
        .unwrap();
        let cas = build_cascade(&f, default_eps()).unwrap();
        assert_eq!(check_groupoid(&cas.y), Ok(()));
        assert!(cas.y.contains(0));
        assert_ne!(cas.y.edge(0, c), Some(f.image(c).apply(0)));
        assert_eq!(cas.y.edge(0, c), Some(base.image(c).apply(0)));
        // the same cascade restricted to function-graph edges is not closed under composition
        let mut restricted = cas.y.clone();
        for (x, g, y) in cas.y.edges() {
            if f.image(g).apply(x) != y {
                restricted.remove_edge(x, g);
            }
        }
        assert!(matches!(
            check_groupoid(&restricted),
            Err(GroupoidViolation::MissingTriangle { .. })
        ));
    }

    #[test]
    fn components_and_stabilizers() {
        let z6 = cyclic(6);
        let h = subgroup_generated(&z6, &[3]);
        let coset = GroupMap::coset_action(&h);
        let regular = GroupMap::regular(z6.clone());
        let u = GroupMap::disjoint_union(&[coset.clone(), regular.clone()]).unwrap();
        let x = function_graph(&u);
        let comps = components(&x).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], vec![0, 1, 2]);
        assert_eq!(stabilizer(&x, 0).unwrap().elements(), h.elements());
        assert_eq!(stabilizer(&x, 4).unwrap(), Subgroup::trivial(z6.clone()));
        let triv = function_graph(&GroupMap::trivial(z6.clone(), 2));
        assert_eq!(stabilizer(&triv, 1).unwrap(), Subgroup::whole(z6));
        assert!(index_degree_holds(&x).unwrap());
    }

    #[test]
    fn perturbed_shift_cascade() {
        for seed in 0..20 {
            let f = symmetrize(&perturbed_shift(5, seed, 1)).unwrap();
            let d = defects(&f);
            let c = build_cascade(&f, default_eps()).unwrap();
            for g in [&c.y, &c.z] {
                assert_eq!(check_groupoid(g), Ok(()));
                assert!(index_degree_holds(g).unwrap());
            }
            for g in [&c.x_eps, &c.x_2eps, &c.y, &c.z] {
                assert!(deg_and_domain_holds(g));
            }
            assert!(
                c.z.is_subgraph_of(&c.y)
                    && c.y.is_subgraph_of(&c.x_2eps)
                    && c.x_eps.is_subgraph_of(&c.x_2eps)
            );
            for (measured, bound, label) in cascade_bounds(&c, 5, d.defect_inf, d.defect_mean) {
                assert!(measured >= bound, "{label}: {measured} < {bound}");
            }
            let one = Rational::from_integer(1);
            assert!(int(c.z.vertex_count()) >= (one - int(96) * d.defect_mean) * int(5));
            for g in 0..5 {
                assert!(int(c.z.domain_size(g)) >= (one - int(117) * d.defect_inf) * int(5));
            }
        }
    }

    #[test]
    fn markov_examples() {
        let v = [ratio(1, 1), ratio(1, 2), ratio(0, 1), ratio(9, 10)];
        assert!(markov_holds(&v, ratio(1, 3)));
        assert!(markov_holds(&[], ratio(1, 2)));
        assert!(markov_holds(&[ratio(1, 2); 4], ratio(1, 2)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn markov_inequality(values in prop::collection::vec(0u32..=20, 1..30), theta in 1u32..=20) {
            let values: Vec<Rational> = values.into_iter().map(|v| ratio(v as i128, 20)).collect();
            prop_assert!(markov_holds(&values, ratio(theta as i128, 20)));
        }

        #[test]
        fn inverse_edge_weight(seed in any::<u64>(), m in 2usize..6, n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_symmetric(&mut rng, cyclic(m), n);
            let g = f.group();
            for x in 0..n {
                for gamma in g.elements() {
                    for y in 0..n {
                        prop_assert_eq!(edge_weight(&f, x, gamma, y), edge_weight(&f, y, g.inv(gamma), x));
                    }
                }
            }
        }

        #[test]
        fn weight_lemmas(seed in any::<u64>(), swaps in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let group = if rng.gen_bool(0.5) { cyclic(6) } else { Arc::new(FiniteGroup::symmetric(3)) };
            let base = GroupMap::regular(group.clone());
            let mut f = base;
            for _ in 0..swaps {
                let e = rng.gen_range(0..6);
                let mut img = f.image(e).images().to_vec();
                img.swap(rng.gen_range(0..6), rng.gen_range(0..6));
                f = f.with_image(e, Permutation::from_images(img).unwrap()).unwrap();
            }
            let f = symmetrize(&f).unwrap();
            let n = f.degree();
            let w = |x, g, y| edge_weight(&f, x, g, y);
            let two_thirds = ratio(2, 3);
            let eps = default_eps();
            let one = Rational::from_integer(1);
            let wt = weight_table(&f);
            let x_eps_deg = |x: usize| {
                Rational::new(group.elements().filter(|&g| wt.exceeds(x, g, eps)).count() as i128, group.order() as i128)
            };
            for x in 0..n {
                for g1 in group.elements() {
                    for y in 0..n {
                        let w1 = w(x, g1, y);
                        if w1 == Rational::default() {
                            continue;
                        }
                        for g2 in group.elements() {
                            for z in 0..n {
                                let w2 = w(y, g2, z);
                                if w2 == Rational::default() {
                                    continue;
                                }
                                let g21 = group.mul(g2, g1);
                                let w3 = w(x, g21, z);
                                // completing a triangle loses at most the two deficits
                                prop_assert!(w3 >= w1 + w2 - one);
                                if w1 > two_thirds && w2 > two_thirds {
                                    for u in 0..n {
                                        if w(x, g21, u) > two_thirds {
                                            prop_assert_eq!(u, z);
                                        }
                                    }
                                }
                                if w1 > one - eps * int(2) && w2 > one - eps * int(2)
                                    && x_eps_deg(x) > two_thirds && x_eps_deg(y) > two_thirds && x_eps_deg(z) > two_thirds
                                {
                                    prop_assert!(w3 > one - eps * int(2));
                                }
                            }
                        }
                    }
                }
            }
        }

        #[test]
        fn cascades_of_random_symmetric_maps(seed in any::<u64>(), m in 2usize..7, n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_symmetric(&mut rng, cyclic(m), n);
            let d = defects(&f);
            let c = build_cascade(&f, default_eps()).unwrap();
            prop_assert_eq!(check_groupoid(&c.y), Ok(()));
            prop_assert_eq!(check_groupoid(&c.z), Ok(()));
            prop_assert!(index_degree_holds(&c.z).unwrap());
            for g in [&c.x_eps, &c.x_2eps, &c.y, &c.z] {
                prop_assert!(deg_and_domain_holds(g));
            }
            for (measured, bound, label) in cascade_bounds(&c, n, d.defect_inf, d.defect_mean) {
                prop_assert!(measured >= bound, "{}: {} < {}", label, measured, bound);
            }
        }
    }
}
