//! Permutations of `{0, …, n-1}` in one-line notation and the normalized
//! Hamming distance between permutations of possibly different degrees.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::Rational;

/// A bijection of `{0, …, n-1}`, stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    /// The identity of `Sym(n)`. Panics if `n == 0`.
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "permutation degree must be positive");
        Permutation {
            image: (0..n).collect(),
        }
    }

    /// Validates that `image` is a bijection of `{0, …, len-1}`.
    pub fn from_images(image: Vec<usize>) -> Result<Self> {
        if image.is_empty() {
            return Err(Error::InvalidPermutation("degree must be positive".into()));
        }
        let n = image.len();
        let mut seen = vec![false; n];
        for (x, &y) in image.iter().enumerate() {
            if y >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image of {x} is {y}, out of range for degree {n}"
                )));
            }
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::InvalidPermutation(format!(
                    "value {y} appears twice"
                )));
            }
        }
        Ok(Permutation { image })
    }

    /// Builds a permutation of degree `n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation("degree must be positive".into()));
        }
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= n {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle point {x} out of range for degree {n}"
                    )));
                }
                if std::mem::replace(&mut touched[x], true) {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} appears in two cycles"
                    )));
                }
                image[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Permutation { image })
    }

    pub(crate) fn from_images_unchecked(image: Vec<usize>) -> Self {
        debug_assert!(Permutation::from_images(image.clone()).is_ok());
        Permutation { image }
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    /// `a.compose(b)(x) = a(b(x))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            image: other.image.iter().map(|&y| self.image[y]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.degree()];
        for (x, &y) in self.image.iter().enumerate() {
            image[y] = x;
        }
        Permutation { image }
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, exponent: i64) -> Permutation {
        let base = if exponent < 0 {
            self.inverse()
        } else {
            self.clone()
        };
        let mut e = exponent.unsigned_abs();
        let mut acc = Permutation::identity(self.degree());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose_unchecked(&sq);
            }
            sq = sq.compose_unchecked(&sq);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn is_involution(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .all(|(x, &y)| self.image[y] == x)
    }

    /// Number of fixed points.
    pub fn fixed_points(&self) -> usize {
        self.image
            .iter()
            .enumerate()
            .filter(|&(x, &y)| x == y)
            .count()
    }

    /// Least `k ≥ 1` with `self^k = id`.
    pub fn order(&self) -> u64 {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut order = 1u64;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.image[x];
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }

    /// Disjoint cycles of length at least two, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.image[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.image[x];
            }
            out.push(cycle);
        }
        out
    }

    /// Count of points in `[0, min(n, N))` where the two permutations disagree.
    pub fn disagreements(&self, other: &Permutation) -> usize {
        self.image
            .iter()
            .zip(&other.image)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Normalized Hamming distance, extended across degrees: for `n ≤ N`,
    /// `(|{x < n : σ(x) ≠ τ(x)}| + (N − n)) / N`.
    pub fn hamming(&self, other: &Permutation) -> Rational {
        hamming(self, other)
    }

    /// The involution `τ` agreeing with `σ` on `{x : σ²(x) = x}` and fixing
    /// every other point. `d(σ, τ) = d(σ², id)`, and no involution is closer.
    pub fn nearest_involution(&self) -> Permutation {
        nearest_involution(self)
    }

    /// Parses cycle notation such as `(0 1)(2 3 4)` for a given degree.
    /// `()` or an empty string is the identity.
    pub fn parse_cycles(n: usize, text: &str) -> Result<Permutation> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| {
                Error::InvalidPermutation(format!("expected '(' in cycle notation at {rest:?}"))
            })?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::InvalidPermutation("unterminated cycle".into()))?;
            let points = body[..close]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|e| Error::InvalidPermutation(format!("bad point {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !points.is_empty() {
                cycles.push(points);
            }
            rest = body[close + 1..].trim_start();
        }
        Permutation::from_cycles(n, &cycles)
    }
}

/// `compose(a, b)(x) = a(b(x))`.
pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    a.compose(b)
}

pub fn inverse(a: &Permutation) -> Permutation {
    a.inverse()
}

/// Cross-degree normalized Hamming distance; symmetric in its arguments.
pub fn hamming(a: &Permutation, b: &Permutation) -> Rational {
    let (small, large) = if a.degree() <= b.degree() {
        (a, b)
    } else {
        (b, a)
    };
    let n = small.degree();
    let big_n = large.degree();
    let count = small.disagreements(large) + (big_n - n);
    Rational::new(count as i128, big_n as i128)
}

pub fn nearest_involution(s: &Permutation) -> Permutation {
    let image = (0..s.degree())
        .map(|x| {
            let y = s.apply(x);
            if s.apply(y) == x {
                y
            } else {
                x
            }
        })
        .collect();
    Permutation { image }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, y) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{y}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{self}]")
    }
}

/// Parses the comma-separated one-line form, e.g. `"2,0,1"`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let image = s
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPermutation(format!("bad entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_images(image)
    }
}

/// All permutations of degree `n` in lexicographic order of their image arrays.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(Permutation {
            image: current.clone(),
        });
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| current[i] < current[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::ratio;
    use proptest::prelude::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_images(v.to_vec()).unwrap()
    }

    #[test]
    fn compose_identity_and_inverse() {
        let id = Permutation::identity(3);
        assert_eq!(compose(&id, &id).unwrap(), id);
        for s in all_permutations(4) {
            assert!(compose(&s, &inverse(&s)).unwrap().is_identity());
            assert!(compose(&inverse(&s), &s).unwrap().is_identity());
        }
    }

    #[test]
    fn compose_matches_function_composition_on_sym3() {
        // Oracle: compose as closures over the raw arrays.
        let all = all_permutations(3);
        assert_eq!(all.len(), 6);
        let mut products = 0;
        for a in &all {
            for b in &all {
                let fa = |x: usize| a.images()[x];
                let fb = |x: usize| b.images()[x];
                let expected: Vec<usize> = (0..3).map(|x| fa(fb(x))).collect();
                assert_eq!(compose(a, b).unwrap().images(), &expected[..]);
                products += 1;
            }
        }
        assert_eq!(products, 36);
        // (0 1) after (1 2): 0↦1, 1↦2, 2↦0
        let t01 = Permutation::parse_cycles(3, "(0 1)").unwrap();
        let t12 = Permutation::parse_cycles(3, "(1 2)").unwrap();
        assert_eq!(compose(&t01, &t12).unwrap(), p(&[1, 2, 0]));
    }

    #[test]
    fn compose_rejects_degree_mismatch() {
        let err = compose(&Permutation::identity(2), &Permutation::identity(3)).unwrap_err();
        assert!(err.to_string().contains("degree mismatch"));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&Permutation::identity(4)), Permutation::identity(4));
        assert_eq!(inverse(&p(&[1, 0])), p(&[1, 0]));
        let c = p(&[1, 2, 0]);
        let ci = inverse(&c);
        assert_eq!(ci, p(&[2, 0, 1]));
        assert!(compose(&c, &ci).unwrap().is_identity());
    }

    #[test]
    fn from_images_rejects_non_bijections() {
        assert!(Permutation::from_images(vec![0, 0]).is_err());
        assert!(Permutation::from_images(vec![0, 2]).is_err());
        assert!(Permutation::from_images(vec![]).is_err());
    }

    #[test]
    fn text_form_round_trips() {
        let s: Permutation = "2,0,1".parse().unwrap();
        assert_eq!(s, p(&[2, 0, 1]));
        assert_eq!(s.to_string(), "2,0,1");
        assert!("2,0,0".parse::<Permutation>().is_err());
        assert!("a,b".parse::<Permutation>().is_err());
    }

    #[test]
    fn cycle_notation() {
        let s = Permutation::parse_cycles(5, "(0 1)(2 3 4)").unwrap();
        assert_eq!(s, p(&[1, 0, 3, 4, 2]));
        assert_eq!(s.cycles(), vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(s.order(), 6);
        assert!(Permutation::parse_cycles(3, "").unwrap().is_identity());
        assert!(Permutation::parse_cycles(3, "(0 1)(1 2)").is_err());
        assert!(Permutation::parse_cycles(3, "(0 5)").is_err());
    }

    #[test]
    fn hamming_examples() {
        let id3 = Permutation::identity(3);
        assert_eq!(hamming(&id3, &id3), ratio(0, 1));
        assert_eq!(
            hamming(&Permutation::identity(2), &Permutation::identity(4)),
            ratio(1, 2)
        );
        assert_eq!(hamming(&p(&[1, 0]), &id3), ratio(1, 1));
        // symmetric argument order
        assert_eq!(hamming(&id3, &p(&[1, 0])), ratio(1, 1));
    }

    #[test]
    fn nearest_involution_examples() {
        assert!(nearest_involution(&Permutation::identity(4)).is_identity());
        let c = p(&[1, 2, 0]);
        let t = nearest_involution(&c);
        assert!(t.is_identity());
        assert_eq!(hamming(&c, &t), ratio(1, 1));
        let s = Permutation::parse_cycles(5, "(0 1)(2 3 4)").unwrap();
        let t = nearest_involution(&s);
        assert_eq!(t, Permutation::parse_cycles(5, "(0 1)").unwrap());
        assert_eq!(hamming(&s, &t), ratio(3, 5));
        assert_eq!(
            hamming(&s, &t),
            hamming(&s.pow(2), &Permutation::identity(5))
        );
    }

    #[test]
    fn nearest_involution_within_twice_optimal_up_to_degree_6() {
        for n in 1..=6 {
            let all = all_permutations(n);
            let involutions: Vec<_> = all.iter().filter(|s| s.is_involution()).cloned().collect();
            for s in &all {
                let t = nearest_involution(s);
                assert!(t.is_involution());
                assert_eq!(
                    hamming(s, &t),
                    hamming(&s.pow(2), &Permutation::identity(n))
                );
                let best = involutions.iter().map(|i| hamming(s, i)).min().unwrap();
                assert!(hamming(s, &t) <= best * Rational::from_integer(2), "{s:?}");
            }
        }
    }

    #[test]
    fn nearest_involution_is_not_always_closest() {
        // on a 3-cycle the construction returns id at distance 1, while (0 1) is at 2/3
        let s = Permutation::parse_cycles(3, "(0 1 2)").unwrap();
        assert!(nearest_involution(&s).is_identity());
        let t = Permutation::parse_cycles(3, "(0 1)").unwrap();
        assert_eq!(hamming(&s, &t), ratio(2, 3));
    }

    #[test]
    fn involution_counts() {
        // 1, 2, 4, 10, 26, 76 involutions in Sym(1..=6)
        let counts: Vec<usize> = (1..=6)
            .map(|n| {
                all_permutations(n)
                    .iter()
                    .filter(|s| s.is_involution())
                    .count()
            })
            .collect();
        assert_eq!(counts, vec![1, 2, 4, 10, 26, 76]);
    }

    #[test]
    fn pow_matches_repeated_composition() {
        let s = p(&[3, 0, 4, 1, 2]);
        let mut acc = Permutation::identity(5);
        for k in 0..12 {
            assert_eq!(s.pow(k), acc);
            assert_eq!(s.pow(-k), acc.inverse());
            acc = acc.compose(&s).unwrap();
        }
    }

    pub(crate) fn arb_perm(max_degree: usize) -> impl Strategy<Value = Permutation> {
        (1..=max_degree)
            .prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::from_images(v).unwrap())
    }

    fn arb_same_degree_triple(
        max_degree: usize,
    ) -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
        (1..=max_degree).prop_flat_map(|n| {
            let one = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
            (one.clone(), one.clone(), one).prop_map(|(a, b, c)| {
                (
                    Permutation::from_images(a).unwrap(),
                    Permutation::from_images(b).unwrap(),
                    Permutation::from_images(c).unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn triangle_inequality_across_degrees(a in arb_perm(12), b in arb_perm(12), c in arb_perm(12)) {
            prop_assert!(hamming(&a, &b) + hamming(&b, &c) >= hamming(&a, &c));
        }

        #[test]
        fn bi_invariance((a, b, c) in arb_same_degree_triple(9)) {
            let d = hamming(&a, &b);
            prop_assert_eq!(hamming(&a.compose(&c).unwrap(), &b.compose(&c).unwrap()), d);
            prop_assert_eq!(hamming(&c.compose(&a).unwrap(), &c.compose(&b).unwrap()), d);
        }

        #[test]
        fn floor_and_zero(a in arb_perm(10), b in arb_perm(10)) {
            let (n, big_n) = (a.degree().min(b.degree()), a.degree().max(b.degree()));
            let d = hamming(&a, &b);
            prop_assert!(d >= ratio(1, 1) - ratio(n as i128, big_n as i128));
            prop_assert!(d <= ratio(1, 1));
            prop_assert_eq!(d == ratio(0, 1), a == b);
            prop_assert_eq!(d, hamming(&b, &a));
        }

        #[test]
        fn nearest_involution_identity(a in arb_perm(12)) {
            let t = nearest_involution(&a);
            prop_assert!(t.compose(&t).unwrap().is_identity());
            prop_assert_eq!(hamming(&a, &t), hamming(&a.pow(2), &Permutation::identity(a.degree())));
        }
    }
}
