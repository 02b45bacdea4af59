//! Repairing an almost-action into an exact action on a slightly larger set.

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::gamma_graph::{
    build_cascade_with_weights, cascade_bounds, components, default_eps, stabilizer, weight_table,
};
use crate::group::{left_cosets, quotient, FiniteGroup, Subgroup};
use crate::map::{
    defects, distance, is_homomorphism, is_symmetric, symmetrize_with_report, GroupMap,
    SymmetrizationReport,
};
use crate::perm::{hamming, Permutation};
use crate::{int, ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
}

/// One asserted inequality with both sides kept exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub label: String,
    pub measured: Rational,
    pub relation: Relation,
    pub bound: Rational,
}

impl BoundCheck {
    pub fn at_most(label: impl Into<String>, measured: Rational, bound: Rational) -> Self {
        BoundCheck {
            label: label.into(),
            measured,
            relation: Relation::AtMost,
            bound,
        }
    }

    pub fn at_least(label: impl Into<String>, measured: Rational, bound: Rational) -> Self {
        BoundCheck {
            label: label.into(),
            measured,
            relation: Relation::AtLeast,
            bound,
        }
    }

    pub fn equal(label: impl Into<String>, measured: Rational, bound: Rational) -> Self {
        BoundCheck {
            label: label.into(),
            measured,
            relation: Relation::Equal,
            bound,
        }
    }

    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.measured <= self.bound,
            Relation::AtLeast => self.measured >= self.bound,
            Relation::Equal => self.measured == self.bound,
        }
    }

    /// Distance to the bound on the admissible side; negative when violated.
    pub fn slack(&self) -> Rational {
        match self.relation {
            Relation::AtMost => self.bound - self.measured,
            Relation::AtLeast => self.measured - self.bound,
            Relation::Equal => -(self.measured - self.bound).abs(),
        }
    }
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        };
        write!(
            f,
            "{}: {} {op} {} (slack {})",
            self.label,
            self.measured,
            self.bound,
            self.slack()
        )
    }
}

/// Everything measured during one correction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrectionReport {
    pub n: usize,
    pub big_n: usize,
    /// Defects of the map handed to the caller-facing operation.
    pub delta_inf: Rational,
    pub delta_mean: Rational,
    /// Defects of the symmetric map fed to the cascade.
    pub symmetric_delta_inf: Rational,
    pub symmetric_delta_mean: Rational,
    pub symmetrization: Option<SymmetrizationReport>,
    pub delta_quotient: Option<Rational>,
    pub z_vertices: usize,
    pub v1: usize,
    pub components: usize,
    pub dist_inf: Rational,
    pub dist_mean: Rational,
    pub used_trivial_fallback: bool,
    pub checks: Vec<BoundCheck>,
}

impl CorrectionReport {
    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.holds())
    }

    fn enforce(&self, stage: &str) -> Result<()> {
        if let Some(bad) = self.failures().next() {
            return Err(Error::invariant(
                format!("{stage}: {bad}"),
                format!("{self:#?}"),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CorrectionResult {
    pub h: GroupMap,
    /// `embedding[x]` is the image of `x ∈ V(Z)` in `[N]`, `None` off `V(Z)`.
    pub embedding: Vec<Option<usize>>,
    pub report: CorrectionReport,
}

impl CorrectionResult {
    pub fn used_trivial_fallback(&self) -> bool {
        self.report.used_trivial_fallback
    }
}

/// Above this mean defect the trivial action is already close enough.
pub fn fallback_threshold() -> Rational {
    ratio(1, 78)
}

/// Corrects a symmetric map: `Z = Z_{1/6}`, one coset space per component
/// of `Z`, glued so that `V(Z)` keeps its labels.
pub fn correct_symmetric(f: &GroupMap) -> Result<CorrectionResult> {
    if !is_symmetric(f) {
        return Err(Error::NotSymmetric);
    }
    let n = f.degree();
    let group = Arc::clone(f.group());
    let d = defects(f);
    let (di, dm) = (d.defect_inf, d.defect_mean);
    let mut report = CorrectionReport {
        n,
        delta_inf: di,
        delta_mean: dm,
        symmetric_delta_inf: di,
        symmetric_delta_mean: dm,
        ..Default::default()
    };

    let (h, embedding) = if dm > fallback_threshold() {
        report.used_trivial_fallback = true;
        (GroupMap::trivial(Arc::clone(&group), n), vec![None; n])
    } else {
        let weights = weight_table(f);
        let cascade = build_cascade_with_weights(f, &weights, default_eps())?;
        for (measured, bound, label) in cascade_bounds(&cascade, n, di, dm) {
            report
                .checks
                .push(BoundCheck::at_least(label, measured, bound));
        }
        let z = &cascade.z;
        let comps =
            components(z).map_err(|e| Error::invariant("Z is a groupoid", e.to_string()))?;

        // label[(component, coset)] in [N]
        let mut labels: Vec<Vec<usize>> = Vec::with_capacity(comps.len());
        let mut spaces = Vec::with_capacity(comps.len());
        let mut fresh = n;
        let mut v1 = 0;
        for comp in &comps {
            let base = comp[0];
            let stab = stabilizer(z, base)?;
            let cosets = left_cosets(&stab);
            let mut hit: Vec<Option<usize>> = vec![None; cosets.len()];
            for &y in comp {
                let mut image = None;
                for gamma in group.elements() {
                    if z.edge(base, gamma) == Some(y) {
                        let c = cosets.coset_of(gamma);
                        if image.is_some_and(|prev| prev != c) {
                            return Err(Error::invariant(
                                "φ is well defined",
                                format!("vertex {y} reached from {base} through two cosets"),
                            ));
                        }
                        image = Some(c);
                    }
                }
                let c = image.ok_or_else(|| {
                    Error::invariant(
                        "components are connected",
                        format!("{y} not adjacent to {base}"),
                    )
                })?;
                if hit[c].replace(y).is_some() {
                    return Err(Error::invariant(
                        "φ is injective",
                        format!("two vertices map to coset {c} of component at {base}"),
                    ));
                }
            }
            let row = hit
                .into_iter()
                .map(|slot| {
                    slot.unwrap_or_else(|| {
                        fresh += 1;
                        fresh - 1
                    })
                })
                .collect();
            v1 += cosets.len();
            labels.push(row);
            spaces.push(cosets);
        }
        let big_n = fresh;
        let table = group
            .elements()
            .map(|gamma| {
                let mut image: Vec<usize> = (0..big_n).collect();
                for (row, space) in labels.iter().zip(&spaces) {
                    for (c, &label) in row.iter().enumerate() {
                        image[label] = row[space.act(gamma, c)];
                    }
                }
                Permutation::from_images_unchecked(image)
            })
            .collect();
        let h = GroupMap::new(Arc::clone(&group), table)?;

        let z_count = z.vertex_count();
        report.z_vertices = z_count;
        report.v1 = v1;
        report.components = comps.len();
        let one = Rational::from_integer(1);
        let nn = int(n);
        let inv_sum: Rational = z.vertices().map(|x| one / z.degree(x)).sum();
        report.checks.push(BoundCheck::equal(
            "sum over V(Z) of 1/deg_Z = |V1|",
            inv_sum,
            int(v1),
        ));
        report.checks.push(BoundCheck::equal(
            "N = |V1| + n - |V(Z)|",
            int(big_n),
            int(v1 + n - z_count),
        ));
        report.checks.push(BoundCheck::at_least(
            "|V(Z)| >= (1 - 96 delta_mean) n",
            int(z_count),
            (one - int(96) * dm) * nn,
        ));
        for gamma in group.elements() {
            report.checks.push(BoundCheck::at_least(
                format!("|D_Z({gamma})| >= (1 - 117 delta_inf) n"),
                int(z.domain_size(gamma)),
                (one - int(117) * di) * nn,
            ));
        }
        report.checks.push(BoundCheck::at_least(
            "mean |D_Z| >= (1 - 117 delta_mean) n",
            z.mean_domain_size(),
            (one - int(117) * dm) * nn,
        ));
        report.checks.push(BoundCheck::at_least(
            "|V1| >= |V(Z)|",
            int(v1),
            int(z_count),
        ));
        report.checks.push(BoundCheck::at_most(
            "|V1| <= (1 + 78 delta_mean) n",
            int(v1),
            (one + int(78) * dm) * nn,
        ));
        for gamma in group.elements() {
            let agree = z
                .vertices()
                .filter(|&x| z.edge(x, gamma) == Some(f.image(gamma).apply(x)))
                .count();
            report.checks.push(BoundCheck::at_most(
                format!("d(h({gamma}), f({gamma})) <= 1 - |D_Z({gamma}) on f|/N"),
                hamming(h.image(gamma), f.image(gamma)),
                one - Rational::new(agree as i128, big_n as i128),
            ));
        }
        let broken = z
            .edges()
            .find(|&(x, gamma, y)| h.image(gamma).apply(x) != y);
        if let Some((x, gamma, y)) = broken {
            return Err(Error::invariant(
                "Z embeds in the function graph of h",
                format!("edge {x} -{gamma}-> {y}"),
            ));
        }
        let embedding = (0..n).map(|x| z.contains(x).then_some(x)).collect();
        (h, embedding)
    };

    if !is_homomorphism(&h) {
        return Err(Error::invariant(
            "h is a homomorphism",
            format!("{report:#?}"),
        ));
    }
    let one = Rational::from_integer(1);
    let nn = int(n);
    let (dist_inf, dist_mean) = distance(&h, f).finite()?;
    report.big_n = h.degree();
    report.dist_inf = dist_inf;
    report.dist_mean = dist_mean;
    let big = int(h.degree());
    report.checks.push(BoundCheck::at_least("N >= n", big, nn));
    report.checks.push(BoundCheck::at_most(
        "N <= (1 + 174 delta_mean) n",
        big,
        (one + int(174) * dm) * nn,
    ));
    report.checks.push(BoundCheck::at_most(
        "d_inf(h, f) <= 291 delta_inf",
        dist_inf,
        int(291) * di,
    ));
    report.checks.push(BoundCheck::at_most(
        "d_mean(h, f) <= 291 delta_mean",
        dist_mean,
        int(291) * dm,
    ));
    report.enforce("symmetric correction")?;
    Ok(CorrectionResult {
        h,
        embedding,
        report,
    })
}

/// Symmetrizes, corrects, and checks the headline constants against `f`.
pub fn correct(f: &GroupMap) -> Result<CorrectionResult> {
    let (sym, sym_report) = symmetrize_with_report(f)?;
    let mut result = correct_symmetric(&sym)?;
    let r = &mut result.report;
    r.delta_inf = sym_report.defect_inf;
    r.delta_mean = sym_report.defect_mean;
    r.symmetric_delta_inf = sym_report.new_defect_inf;
    r.symmetric_delta_mean = sym_report.new_defect_mean;
    for (measured, bound, label) in sym_report.bounds() {
        r.checks.push(BoundCheck::at_most(label, measured, bound));
    }
    r.symmetrization = Some(sym_report);
    let (dist_inf, dist_mean) = distance(&result.h, f).finite()?;
    r.dist_inf = dist_inf;
    r.dist_mean = dist_mean;
    let one = Rational::from_integer(1);
    let (n, big) = (int(r.n), int(r.big_n));
    let (di, dm) = (r.delta_inf, r.delta_mean);
    r.checks.push(BoundCheck::at_most(
        "d_inf(h, f) <= 2039 defect_inf(f)",
        dist_inf,
        int(2039) * di,
    ));
    r.checks.push(BoundCheck::at_most(
        "N <= (1 + 1218 defect_inf(f)) n",
        big,
        (one + int(1218) * di) * n,
    ));
    r.checks.push(BoundCheck::at_most(
        "d_mean(h, f) <= 2913 defect_mean(f)",
        dist_mean,
        int(2913) * dm,
    ));
    r.checks.push(BoundCheck::at_most(
        "N <= (1 + 1740 defect_mean(f)) n",
        big,
        (one + int(1740) * dm) * n,
    ));
    r.enforce("correction")?;
    Ok(result)
}

/// Corrects `f` through `Γ/D`, for `f` nearly trivial on the normal subgroup `D`.
pub fn correct_via_quotient(f: &GroupMap, normal: &Subgroup) -> Result<CorrectionResult> {
    if normal.group() != f.group() {
        return Err(Error::GroupMismatch);
    }
    let (qgroup, proj) = quotient(normal)?;
    let qgroup: Arc<FiniteGroup> = Arc::new(qgroup);
    let n = f.degree();
    let id = Permutation::identity(n);
    let delta_q = normal
        .elements()
        .iter()
        .map(|&g| hamming(f.image(g), &id))
        .max()
        .unwrap_or_default();
    let mut transversal = vec![usize::MAX; qgroup.order()];
    for g in f.group().elements() {
        if transversal[proj[g]] == usize::MAX {
            transversal[proj[g]] = g;
        }
    }
    let fbar = GroupMap::from_fn(Arc::clone(&qgroup), |q| f.image(transversal[q]).clone())?;
    let d = defects(f);
    let dbar = defects(&fbar);
    let inner = correct(&fbar)?;
    let table = f
        .group()
        .elements()
        .map(|g| inner.h.image(proj[g]).clone())
        .collect();
    let h = GroupMap::new(Arc::clone(f.group()), table)?;
    if !is_homomorphism(&h) {
        return Err(Error::invariant(
            "pulled-back h is a homomorphism",
            format!("{:#?}", inner.report),
        ));
    }
    let mut report = inner.report;
    let (dist_inf, dist_mean) = distance(&h, f).finite()?;
    let one = Rational::from_integer(1);
    let (di, dq) = (d.defect_inf, delta_q);
    let (nn, big) = (int(n), int(report.big_n));
    report.delta_inf = di;
    report.delta_mean = d.defect_mean;
    report.delta_quotient = Some(dq);
    report.dist_inf = dist_inf;
    report.dist_mean = dist_mean;
    report.checks.push(BoundCheck::at_most(
        "defect_inf(f on quotient) <= 2 delta_inf + delta_D",
        dbar.defect_inf,
        int(2) * di + dq,
    ));
    report.checks.push(BoundCheck::at_most(
        "d_inf(h, f) <= 4079 delta_inf + 2040 delta_D",
        dist_inf,
        int(4079) * di + int(2040) * dq,
    ));
    report.checks.push(BoundCheck::at_most(
        "N <= (1 + 2436 delta_inf + 1218 delta_D) n",
        big,
        (one + int(2436) * di + int(1218) * dq) * nn,
    ));
    report.enforce("quotient correction")?;
    Ok(CorrectionResult {
        h,
        embedding: inner.embedding,
        report,
    })
}
