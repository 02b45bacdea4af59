//! Randomized homomorphism testers, their exact rejection probabilities,
//! amplification and seeded Monte Carlo estimation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::map::GroupMap;
use crate::Rational;

/// A map between two finite groups given by element indices.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupTableMap {
    pub source: Arc<FiniteGroup>,
    pub target: Arc<FiniteGroup>,
    pub images: Vec<usize>,
}

impl GroupTableMap {
    pub fn new(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        images: Vec<usize>,
    ) -> Result<Self> {
        if images.len() != source.order() || images.iter().any(|&y| y >= target.order()) {
            return Err(Error::InvalidMap(
                "image table does not match the groups".into(),
            ));
        }
        Ok(GroupTableMap {
            source,
            target,
            images,
        })
    }

    fn respects(&self, a: usize, b: usize) -> bool {
        let s = &self.source;
        let t = &self.target;
        self.images[s.mul(a, b)] == t.mul(self.images[a], self.images[b])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Pair(usize, usize),
    Triple(usize, usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestOutcome {
    pub accepted: bool,
    pub witness: Witness,
}

/// One round of the pair test on a group-to-group table.
pub fn blr_test_once(f: &GroupTableMap, rng: &mut impl Rng) -> TestOutcome {
    let m = f.source.order();
    let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
    TestOutcome {
        accepted: f.respects(a, b),
        witness: Witness::Pair(a, b),
    }
}

/// Fraction of pairs with `f(ab) ≠ f(a)f(b)`.
pub fn blr_rejection_exact(f: &GroupTableMap) -> Rational {
    let m = f.source.order();
    let bad = (0..m)
        .flat_map(|a| (0..m).map(move |b| (a, b)))
        .filter(|&(a, b)| !f.respects(a, b))
        .count();
    Rational::new(bad as i128, (m * m) as i128)
}

/// One round of the triple test: accept iff `f(γ₁γ₂)(x) = f(γ₁)f(γ₂)(x)`.
pub fn sym_test_once(f: &GroupMap, rng: &mut impl Rng) -> TestOutcome {
    let m = f.group().order();
    let a = rng.gen_range(0..m);
    let b = rng.gen_range(0..m);
    let x = rng.gen_range(0..f.degree());
    TestOutcome {
        accepted: triple_accepts(f, a, b, x),
        witness: Witness::Triple(a, b, x),
    }
}

#[inline]
fn triple_accepts(f: &GroupMap, a: usize, b: usize, x: usize) -> bool {
    f.image(f.group().mul(a, b)).apply(x) == f.image(a).apply(f.image(b).apply(x))
}

/// Exact rejection probability of the triple test by full enumeration.
pub fn rejection_probability_exact(f: &GroupMap) -> Rational {
    let m = f.group().order();
    let n = f.degree();
    let bad: usize = (0..m)
        .into_par_iter()
        .map(|a| {
            (0..m)
                .map(|b| (0..n).filter(|&x| !triple_accepts(f, a, b, x)).count())
                .sum::<usize>()
        })
        .sum();
    Rational::new(bad as i128, (m * m * n) as i128)
}

/// Worst-case rejection-rate constant for the triple test.
pub const SOUNDNESS_CONSTANT: u32 = 2913;

/// Number of rounds so that a map rejected with probability at least
/// `rate` slips through with probability at most `alpha`.
pub fn iterations_for_rate(rate: f64, alpha: f64) -> Result<u64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rejection rate {rate} outside (0, 1]"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    if rate == 1.0 {
        return Ok(1);
    }
    Ok((alpha.ln() / (1.0 - rate).ln()).ceil().max(1.0) as u64)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_eps(eps: Rational) -> Result<()> {
    if eps <= Rational::default() || eps > Rational::from_integer(1) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    Ok(())
}

/// `⌈log α / log(1 − ε/2913)⌉`.
pub fn amplification_iterations(eps: Rational, alpha: Rational) -> Result<u64> {
    check_eps(eps)?;
    iterations_for_rate(to_f64(eps) / f64::from(SOUNDNESS_CONSTANT), to_f64(alpha))
}

/// Repeats the triple test `k` times, accepting iff every round accepts.
/// `rate` overrides the worst-case rejection rate `ε/2913`.
pub fn amplified_test(
    f: &GroupMap,
    eps: Rational,
    alpha: Rational,
    rate: Option<f64>,
    rng: &mut impl Rng,
) -> Result<(bool, u64)> {
    check_eps(eps)?;
    let k = match rate {
        Some(r) => iterations_for_rate(r, to_f64(alpha))?,
        None => amplification_iterations(eps, alpha)?,
    };
    for i in 0..k {
        if !sym_test_once(f, rng).accepted {
            return Ok((false, i + 1));
        }
    }
    Ok((true, k))
}

/// The pair test repeated `⌈log_{1−ε/2} α⌉` times.
pub fn blr_amplified_test(
    f: &GroupTableMap,
    eps: Rational,
    alpha: Rational,
    rng: &mut impl Rng,
) -> Result<(bool, u64)> {
    check_eps(eps)?;
    let k = iterations_for_rate(to_f64(eps) / 2.0, to_f64(alpha))?;
    for i in 0..k {
        if !blr_test_once(f, rng).accepted {
            return Ok((false, i + 1));
        }
    }
    Ok((true, k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestStats {
    pub samples: u64,
    pub rejections: u64,
    pub estimate: f64,
    pub confidence_radius: f64,
    /// `(samples, rejections)` per batch, in batch order.
    pub batches: Vec<(u64, u64)>,
}

impl TestStats {
    pub fn covers(&self, p: f64) -> bool {
        (self.estimate - p).abs() <= self.confidence_radius
    }
}

pub const BATCH_SIZE: u64 = 1 << 13;

/// Three normal standard deviations, never below `10 / samples`.
pub fn confidence_radius(estimate: f64, samples: u64) -> f64 {
    let s = samples as f64;
    (3.0 * (estimate * (1.0 - estimate) / s).sqrt()).max(10.0 / s)
}

/// Estimates the triple-test rejection probability. The root seed comes
/// from `rng`; batch `i` uses stream `i` of a ChaCha8 generator on it.
pub fn monte_carlo(f: &GroupMap, samples: u64, rng: &mut impl Rng) -> Result<TestStats> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let root: u64 = rng.gen();
    let count = samples.div_ceil(BATCH_SIZE);
    let batches: Vec<(u64, u64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let size = BATCH_SIZE.min(samples - i * BATCH_SIZE);
            let mut stream = ChaCha8Rng::seed_from_u64(root);
            stream.set_stream(i);
            let rejected = (0..size)
                .filter(|_| !sym_test_once(f, &mut stream).accepted)
                .count() as u64;
            (size, rejected)
        })
        .collect();
    let rejections = batches.iter().map(|b| b.1).sum();
    let estimate = rejections as f64 / samples as f64;
    Ok(TestStats {
        samples,
        rejections,
        estimate,
        confidence_radius: confidence_radius(estimate, samples),
        batches,
    })
}
