//! Hard instances: the drop-a-point deformation of an action, and the
//! pinched-grid maps `g_k` on the free group `F₂ = ⟨x₁, x₂⟩`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::map::{defects, first_violation, GroupMap};
use crate::perm::{hamming, Permutation};
use crate::{ratio, Rational};

/// `Ψ(σ)(x) = σ(x)` unless `σ(x)` is the last point, in which case `σ(σ(x))`.
pub fn psi(sigma: &Permutation) -> Permutation {
    let n = sigma.degree();
    assert!(n >= 2, "cannot drop a point from a single point");
    let last = n - 1;
    let image = (0..last)
        .map(|x| {
            let y = sigma.apply(x);
            if y == last {
                sigma.apply(y)
            } else {
                y
            }
        })
        .collect();
    Permutation::from_images_unchecked(image)
}

/// `Ψ ∘ f` for a homomorphism `f`, dropping the maximal label.
pub fn drop_point(f: &GroupMap) -> Result<GroupMap> {
    let n = f.degree();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "drop_point needs degree at least 2".into(),
        ));
    }
    if let Some((a, b)) = first_violation(f) {
        return Err(Error::NotHomomorphism { a, b });
    }
    let out = GroupMap::from_fn(std::sync::Arc::clone(f.group()), |g| psi(f.image(g)))?;
    let d = defects(&out).defect_inf;
    let bound = ratio(2, n as i128 - 1);
    if d > bound {
        return Err(Error::invariant(
            "defect_inf of the dropped map <= 2/(n-1)",
            format!("defect {d}, bound {bound}"),
        ));
    }
    Ok(out)
}

/// `t̄`: the residue of `t` in `C_k` for `t ≥ 0`, and `−(−t)‾` for `t < 0`.
pub fn exponent_reduce(t: i64, k: u32) -> i64 {
    assert!(k >= 1);
    let k = i64::from(k);
    if t >= 0 {
        t % k
    } else {
        -((-t) % k)
    }
}

/// An exponent `c·H + b` where `H` stands for `N!` with `N ≥ k²`, so that
/// `H` is divisible by every modulus `k` it is reduced against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Exponent {
    pub huge: i64,
    pub offset: i64,
}

impl Exponent {
    pub const fn int(t: i64) -> Self {
        Exponent { huge: 0, offset: t }
    }

    pub fn is_zero(self) -> bool {
        self.huge == 0 && self.offset == 0
    }

    pub fn is_negative(self) -> bool {
        if self.huge != 0 {
            self.huge < 0
        } else {
            self.offset < 0
        }
    }

    /// `t̄` for this exponent.
    pub fn reduce(self, k: u32) -> i64 {
        let k = i64::from(k);
        if self.is_negative() {
            -((-self.offset).rem_euclid(k))
        } else {
            self.offset.rem_euclid(k)
        }
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent {
            huge: self.huge + rhs.huge,
            offset: self.offset + rhs.offset,
        }
    }
}

impl std::ops::Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent {
            huge: -self.huge,
            offset: -self.offset,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.huge, self.offset) {
            (0, b) => write!(f, "{b}"),
            (c, b) => {
                match c {
                    1 => f.write_str("N!")?,
                    -1 => f.write_str("-N!")?,
                    c => write!(f, "{c}N!")?,
                }
                match b {
                    0 => Ok(()),
                    b if b > 0 => write!(f, "+{b}"),
                    b => write!(f, "{b}"),
                }
            }
        }
    }
}

impl FromStr for Exponent {
    type Err = String;

    /// `-12`, `N!`, `-N!`, `3N!-9`, `N!+2`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let Some(at) = s.find("N!") else {
            return s
                .parse::<i64>()
                .map(Exponent::int)
                .map_err(|e| format!("bad exponent {s:?}: {e}"));
        };
        let coeff = match &s[..at] {
            "" | "+" => 1,
            "-" => -1,
            c => c
                .parse::<i64>()
                .map_err(|e| format!("bad coefficient {c:?}: {e}"))?,
        };
        let rest = &s[at + 2..];
        let offset = if rest.is_empty() {
            0
        } else {
            if !rest.starts_with(['+', '-']) {
                return Err(format!("bad offset {rest:?}"));
            }
            rest.parse::<i64>()
                .map_err(|e| format!("bad offset {rest:?}: {e}"))?
        };
        Ok(Exponent {
            huge: coeff,
            offset,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    X1,
    X2,
}

/// A freely reduced word: adjacent syllables use different generators and
/// no exponent is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeWord {
    syllables: Vec<(Generator, Exponent)>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord::default()
    }

    /// Freely reduces an arbitrary syllable list.
    pub fn from_syllables(syllables: impl IntoIterator<Item = (Generator, Exponent)>) -> Self {
        let mut out: Vec<(Generator, Exponent)> = Vec::new();
        for (g, e) in syllables {
            if e.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some((last, acc)) if *last == g => {
                    *acc = *acc + e;
                    if acc.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        FreeWord { syllables: out }
    }

    pub fn syllable(g: Generator, t: i64) -> Self {
        FreeWord::from_syllables([(g, Exponent::int(t))])
    }

    pub fn syllables(&self) -> &[(Generator, Exponent)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        FreeWord::from_syllables(self.syllables.iter().chain(&other.syllables).copied())
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord {
            syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn pow(&self, t: i64) -> FreeWord {
        let base = if t < 0 { self.inverse() } else { self.clone() };
        (0..t.unsigned_abs()).fold(FreeWord::identity(), |acc, _| acc.concat(&base))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(match g {
                Generator::X1 => "x1",
                Generator::X2 => "x2",
            })?;
            if *e != Exponent::int(1) {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Whitespace-separated tokens `x1`, `x2`, each optionally followed by
/// `^` and a nonzero exponent; `N!` inside an exponent is symbolic.
pub fn parse_word(text: &str) -> Result<FreeWord> {
    let mut syllables = Vec::new();
    for (i, token) in text.split_whitespace().enumerate() {
        let err = |message: String| Error::WordSyntax {
            position: i + 1,
            message,
        };
        let (head, exp) = match token.split_once('^') {
            Some((h, e)) => (h, e.parse::<Exponent>().map_err(err)?),
            None => (token, Exponent::int(1)),
        };
        let g = match head {
            "x1" => Generator::X1,
            "x2" => Generator::X2,
            other => return Err(err(format!("unknown generator {other:?}"))),
        };
        if exp.is_zero() {
            return Err(err(format!("zero exponent in {token:?}")));
        }
        syllables.push((g, exp));
    }
    Ok(FreeWord::from_syllables(syllables))
}

/// A point `(i, j)` of `C_k × C_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridLabel {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl GridLabel {
    /// Row-major: `(i, j) ↦ i·k + j`.
    pub fn index(self) -> usize {
        (self.i * self.k + self.j) as usize
    }

    pub fn from_index(index: usize, k: u32) -> Self {
        GridLabel {
            i: index as u32 / k,
            j: index as u32 % k,
            k,
        }
    }
}

/// `α₂(i, j) = (i, j+1)`.
pub fn alpha2(k: u32) -> Permutation {
    grid_perm(k, |p| GridLabel {
        j: (p.j + 1) % k,
        ..p
    })
}

/// `α₁ = α₁′ ∘ τ`: swap `(0,0)` with `(0,1)`, then `(i, j) ↦ (i+1, j)`.
pub fn alpha1(k: u32) -> Permutation {
    let shift = grid_perm(k, |p| GridLabel {
        i: (p.i + 1) % k,
        ..p
    });
    if k == 1 {
        return shift;
    }
    let tau =
        Permutation::from_cycles((k * k) as usize, &[vec![0, 1]]).expect("valid transposition");
    shift.compose(&tau).expect("same degree")
}

fn grid_perm(k: u32, f: impl Fn(GridLabel) -> GridLabel) -> Permutation {
    let n = (k * k) as usize;
    Permutation::from_images_unchecked(
        (0..n)
            .map(|x| f(GridLabel::from_index(x, k)).index())
            .collect(),
    )
}

/// Evaluates `g_k` with precomputed powers of the two grid permutations.
#[derive(Clone, Debug)]
pub struct GridEvaluator {
    k: u32,
    // powers[g][t + k - 1] = α_g^t for t in (−k, k)
    powers: [Vec<Permutation>; 2],
}

impl GridEvaluator {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1);
        let table = |a: Permutation| {
            (-(i64::from(k)) + 1..i64::from(k))
                .map(|t| a.pow(t))
                .collect::<Vec<_>>()
        };
        GridEvaluator {
            k,
            powers: [table(alpha1(k)), table(alpha2(k))],
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn power(&self, g: Generator, t: i64) -> &Permutation {
        let idx = (t + i64::from(self.k) - 1) as usize;
        &self.powers[g as usize][idx]
    }

    /// `α₁^{d̄₁} α₂^{ē₁} ⋯` over the syllables of `w`.
    pub fn eval(&self, w: &FreeWord) -> Permutation {
        let n = (self.k * self.k) as usize;
        w.syllables
            .iter()
            .fold(Permutation::identity(n), |acc, &(g, e)| {
                acc.compose_unchecked(self.power(g, e.reduce(self.k)))
            })
    }
}

pub fn gk_eval(w: &FreeWord, k: u32) -> Permutation {
    GridEvaluator::new(k).eval(w)
}

/// `d^H(g(w₁w₂), g(w₁)g(w₂))`.
pub fn gk_pair_defect(eval: &GridEvaluator, w1: &FreeWord, w2: &FreeWord) -> Rational {
    let lhs = eval.eval(&w1.concat(w2));
    let rhs = eval.eval(w1).compose_unchecked(&eval.eval(w2));
    hamming(&lhs, &rhs)
}

/// A reduced word with a uniform number of syllables in `[1, max_len]`,
/// alternating generators from a random start, and exponents uniform in
/// `[−3k, 3k] \ {0}`.
pub fn random_word(k: u32, max_len: usize, rng: &mut impl Rng) -> FreeWord {
    let len = rng.gen_range(1..=max_len);
    let mut g = if rng.gen_bool(0.5) {
        Generator::X1
    } else {
        Generator::X2
    };
    let bound = 3 * i64::from(k);
    let mut syllables = Vec::with_capacity(len);
    for _ in 0..len {
        let mut t = rng.gen_range(-bound..bound);
        if t >= 0 {
            t += 1;
        }
        syllables.push((g, Exponent::int(t)));
        g = match g {
            Generator::X1 => Generator::X2,
            Generator::X2 => Generator::X1,
        };
    }
    FreeWord::from_syllables(syllables)
}

/// Largest pair defect of `g_k` over `trials` sampled word pairs.
pub fn gk_defect_sample(
    k: u32,
    max_len: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Rational> {
    if trials == 0 || max_len == 0 {
        return Err(Error::InvalidArgument(
            "trials and word length must be positive".into(),
        ));
    }
    let eval = GridEvaluator::new(k);
    let bound = ratio(2, i128::from(k));
    let mut worst = Rational::default();
    for _ in 0..trials {
        let w1 = random_word(k, max_len, rng);
        let w2 = random_word(k, max_len, rng);
        let d = gk_pair_defect(&eval, &w1, &w2);
        if d > bound {
            return Err(Error::invariant(
                "g_k pair defect <= 2/k",
                format!("k={k}, w1={w1}, w2={w2}, defect {d}"),
            ));
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `(x₁^{N!−k+1} x₂)^k (x₁^{−k+1} x₂)^{−k}` as a reduced word with symbolic `N!`.
pub fn gamma0_word(k: u32) -> FreeWord {
    let k = i64::from(k);
    let first = FreeWord::from_syllables([
        (
            Generator::X1,
            Exponent {
                huge: 1,
                offset: 1 - k,
            },
        ),
        (Generator::X2, Exponent::int(1)),
    ]);
    let second = FreeWord::from_syllables([
        (Generator::X1, Exponent::int(1 - k)),
        (Generator::X2, Exponent::int(1)),
    ]);
    first.pow(k).concat(&second.pow(-k))
}

/// `(α₁α₂)^k · ((α₁^{−k+1}α₂)^k)⁻¹` on `k²` points and its distance to the identity.
pub fn gamma0_image(k: u32) -> (Permutation, Rational) {
    let (a, b) = gamma0_factors(k);
    let p = a.compose_unchecked(&b.inverse());
    let d = hamming(&p, &Permutation::identity(p.degree()));
    (p, d)
}

/// `((α₁α₂)^k, (α₁^{−k+1}α₂)^k)`.
pub fn gamma0_factors(k: u32) -> (Permutation, Permutation) {
    let eval = GridEvaluator::new(k);
    let a1 = eval.power(Generator::X1, 1);
    let a2 = eval.power(Generator::X2, 1);
    let a1_back = eval.power(Generator::X1, 1 - i64::from(k));
    let k = i64::from(k);
    (
        a1.compose_unchecked(a2).pow(k),
        a1_back.compose_unchecked(a2).pow(k),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::map::is_homomorphism;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn shift(n: usize) -> GroupMap {
        GroupMap::regular(Arc::new(FiniteGroup::cyclic(n)))
    }

    #[test]
    fn drop_point_of_trivial_action() {
        let f = GroupMap::trivial(Arc::new(FiniteGroup::cyclic(4)), 5);
        let d = drop_point(&f).unwrap();
        assert!(is_homomorphism(&d));
        assert_eq!(d.degree(), 4);
    }

    #[test]
    fn drop_point_bypasses_last_point() {
        let d = drop_point(&shift(6)).unwrap();
        // 0→1→…→4→(5)→0
        assert_eq!(d.image(1).images(), &[1, 2, 3, 4, 0]);
        assert_eq!(d.image(1).cycles().len(), 1);
        for n in 2..10 {
            let d = drop_point(&shift(n)).unwrap();
            assert!(defects(&d).defect_inf <= ratio(2, n as i128 - 1));
        }
    }

    #[test]
    fn drop_point_rejects_non_homomorphisms() {
        let f = shift(4).with_image(1, Permutation::identity(4)).unwrap();
        assert!(matches!(drop_point(&f), Err(Error::NotHomomorphism { .. })));
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(exponent_reduce(7, 5), 2);
        assert_eq!(exponent_reduce(-12, 5), -2);
        assert_eq!(exponent_reduce(0, 5), 0);
        assert_eq!(exponent_reduce(-10, 5), 0);
        let e: Exponent = "N!-9".parse().unwrap();
        assert_eq!(e.reduce(10), 1);
        assert!(!e.is_negative());
        assert_eq!("-N!+3".parse::<Exponent>().unwrap().reduce(5), -2);
        assert_eq!(e.to_string(), "N!-9");
        assert_eq!((e + Exponent::int(9)).reduce(7), 0);
    }

    #[test]
    fn parse_examples() {
        assert!(parse_word("").unwrap().is_identity());
        let w = parse_word("x1^13 x2^-9 x1^3 x2 x1^-77").unwrap();
        assert_eq!(w.syllables().len(), 5);
        assert_eq!(w.to_string(), "x1^13 x2^-9 x1^3 x2 x1^-77");
        assert_eq!(
            parse_word("x1^2 x1^-2 x2").unwrap(),
            FreeWord::syllable(Generator::X2, 1)
        );
        assert_eq!(
            parse_word("x2 x1 x1^-1 x2^-1").unwrap(),
            FreeWord::identity()
        );
        assert!(matches!(
            parse_word("x1 x3"),
            Err(Error::WordSyntax { position: 2, .. })
        ));
        assert!(matches!(
            parse_word("x1^0"),
            Err(Error::WordSyntax { position: 1, .. })
        ));
        assert!(parse_word("x1^").is_err());
        assert_eq!(parse_word("x1^N!-4").unwrap().to_string(), "x1^N!-4");
    }

    #[test]
    fn worked_example_k5() {
        let w = parse_word("x1^13 x2^-9 x1^3 x2 x1^-77").unwrap();
        let e = GridEvaluator::new(5);
        let expected = [
            (Generator::X1, 3),
            (Generator::X2, -4),
            (Generator::X1, 3),
            (Generator::X2, 1),
            (Generator::X1, -2),
        ]
        .iter()
        .fold(Permutation::identity(25), |acc, &(g, t)| {
            acc.compose(e.power(g, t)).unwrap()
        });
        assert_eq!(e.eval(&w), expected);
    }

    #[test]
    fn grid_generators() {
        for k in 1..8u32 {
            let e = GridEvaluator::new(k);
            let n = (k * k) as usize;
            assert!(e.eval(&FreeWord::identity()).is_identity());
            assert!(e
                .eval(&FreeWord::syllable(Generator::X2, i64::from(k)))
                .is_identity());
            let a1k = alpha1(k).pow(i64::from(k));
            assert!(hamming(&a1k, &Permutation::identity(n)) <= ratio(2, i128::from(k)));
            for x in 0..n {
                let p = GridLabel::from_index(x, k);
                if p.j >= 2 {
                    assert_eq!(a1k.apply(x), x);
                }
            }
        }
        assert_eq!(GridLabel { i: 2, j: 3, k: 5 }.index(), 13);
        // α₁ sends (0,0) to (1,1) via τ then the horizontal shift
        assert_eq!(alpha1(5).apply(0), GridLabel { i: 1, j: 1, k: 5 }.index());
    }

    #[test]
    fn gamma0_bounds() {
        for k in [6u32, 10, 20] {
            let kk = i128::from(k);
            let (a, b) = gamma0_factors(k);
            let n = a.degree();
            let id = Permutation::identity(n);
            assert!(hamming(&a, &id) <= ratio(2, kk));
            assert!(hamming(&b, &id) >= ratio(kk - 1, kk));
            let (_, d) = gamma0_image(k);
            assert!(d >= ratio(kk - 5, kk));
            // the reduced word itself: its middle syllable is x1^{N!}
            let w = gamma0_word(k);
            assert!(w
                .syllables()
                .iter()
                .any(|&(_, e)| e == Exponent { huge: 1, offset: 0 }));
            let dw = hamming(&gk_eval(&w, k), &id);
            assert!(dw >= ratio(kk - 5, kk), "k={k}: {dw}");
        }
        assert!(gamma0_image(10).1 >= ratio(1, 2));
    }

    #[test]
    fn cancellation_reduces_to_shorter_pair() {
        let e = GridEvaluator::new(6);
        let w1 = parse_word("x2^4 x1^5").unwrap();
        let w2 = parse_word("x1^-5 x2^9").unwrap();
        let short1 = parse_word("x2^4").unwrap();
        let short2 = parse_word("x2^9").unwrap();
        assert_eq!(
            gk_pair_defect(&e, &w1, &w2),
            gk_pair_defect(&e, &short1, &short2)
        );
    }

    #[test]
    fn wrap_families_stay_below_bound() {
        for k in [3u32, 6, 10] {
            let e = GridEvaluator::new(k);
            let kk = i64::from(k);
            for g in [Generator::X1, Generator::X2] {
                for e1 in -2 * kk..=2 * kk {
                    for e2 in -2 * kk..=2 * kk {
                        let w1 = FreeWord::syllable(g, e1);
                        let w2 = FreeWord::syllable(g, e2);
                        assert!(gk_pair_defect(&e, &w1, &w2) <= ratio(2, i128::from(k)));
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_defect_k10() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let worst = gk_defect_sample(10, 6, 10_000, &mut rng).unwrap();
        assert!(worst <= ratio(1, 5));
        assert!(worst > ratio(0, 1));
    }

    proptest! {
        #[test]
        fn free_reduction_is_confluent(a in prop::collection::vec((0u8..2, -4i64..5), 0..8), b in prop::collection::vec((0u8..2, -4i64..5), 0..8)) {
            let text = |v: &[(u8, i64)]| v.iter().filter(|s| s.1 != 0).map(|&(g, t)| format!("x{}^{}", g + 1, t)).collect::<Vec<_>>().join(" ");
            let (s1, s2) = (text(&a), text(&b));
            let joined = parse_word(&format!("{s1} {s2}")).unwrap();
            prop_assert_eq!(parse_word(&s1).unwrap().concat(&parse_word(&s2).unwrap()), joined.clone());
            let reparsed = parse_word(&joined.to_string()).unwrap();
            prop_assert_eq!(reparsed, joined);
        }

        #[test]
        fn psi_yields_permutations(images in Just(()).prop_flat_map(|_| crate::perm::tests::arb_perm(10))) {
            if images.degree() >= 2 {
                let p = psi(&images);
                prop_assert!(Permutation::from_images(p.images().to_vec()).is_ok());
            }
        }

        #[test]
        fn exponent_reduce_range(t in -1000i64..1000, k in 1u32..30) {
            let r = exponent_reduce(t, k);
            prop_assert!(r.abs() < i64::from(k));
            prop_assert_eq!((t - r) % i64::from(k), 0);
            prop_assert!(r == 0 || (r > 0) == (t > 0));
            prop_assert_eq!(Exponent::int(t).reduce(k), r);
        }
    }
}
