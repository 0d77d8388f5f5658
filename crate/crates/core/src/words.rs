//! Free-group words on orbifold generators, the rational group ring, Fox
//! derivatives and the bar two-chain housing the fundamental class.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::orbifold::{OrbifoldSignature, Presentation};

pub type Rational = Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GenKind {
    X,
    Y,
    Z,
    S,
}

/// A generator `x_i`, `y_i`, `z_j` or `s_k`; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub kind: GenKind,
    pub index: usize,
}

impl Generator {
    pub fn new(kind: GenKind, index: usize) -> Self {
        assert!(index >= 1, "generator indices are 1-based");
        Generator { kind, index }
    }
    pub fn x(i: usize) -> Self {
        Self::new(GenKind::X, i)
    }
    pub fn y(i: usize) -> Self {
        Self::new(GenKind::Y, i)
    }
    pub fn z(i: usize) -> Self {
        Self::new(GenKind::Z, i)
    }
    pub fn s(i: usize) -> Self {
        Self::new(GenKind::S, i)
    }

    pub fn name(&self) -> String {
        let c = match self.kind {
            GenKind::X => 'x',
            GenKind::Y => 'y',
            GenKind::Z => 'z',
            GenKind::S => 's',
        };
        format!("{c}{}", self.index)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a generator or word")]
pub struct ParseWordError(pub String);

impl FromStr for Generator {
    type Err = ParseWordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseWordError(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next().ok_or_else(err)? {
            'x' => GenKind::X,
            'y' => GenKind::Y,
            'z' => GenKind::Z,
            's' => GenKind::S,
            _ => return Err(err()),
        };
        let index: usize = chars.as_str().parse().map_err(|_| err())?;
        if index == 0 {
            return Err(err());
        }
        Ok(Generator { kind, index })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Generator,
    /// +1 or -1
    pub exp: i8,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, exp: -self.exp }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn gen(g: Generator) -> Word {
        Word { letters: vec![Letter { gen: g, exp: 1 }] }
    }

    pub fn gen_inv(g: Generator) -> Word {
        Word { letters: vec![Letter { gen: g, exp: -1 }] }
    }

    /// Builds a word from arbitrary letters, freely reducing.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            assert!(l.exp == 1 || l.exp == -1, "letter exponents are +-1");
            match out.last() {
                Some(&last) if last == l.inverse() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// `a b a^-1 b^-1`
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.multiply(b).multiply(&a.inverse()).multiply(&b.inverse())
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Word>>(words: I) -> Word {
        Word::from_letters(words.into_iter().flat_map(|w| w.letters.iter().copied()))
    }

    /// Prefix of the first `k` letters.
    pub fn prefix(&self, k: usize) -> Word {
        Word { letters: self.letters[..k].to_vec() }
    }

    pub fn generators(&self) -> impl Iterator<Item = Generator> + '_ {
        self.letters.iter().map(|l| l.gen)
    }

    /// Replaces every generator by a word; the image is freely reduced.
    pub fn substitute<F: Fn(Generator) -> Word>(&self, f: F) -> Word {
        let mut out = Word::identity();
        for l in &self.letters {
            let img = f(l.gen);
            let img = if l.exp < 0 { img.inverse() } else { img };
            out = out.multiply(&img);
        }
        out
    }
}

impl From<Generator> for Word {
    fn from(g: Generator) -> Word {
        Word::gen(g)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| if l.exp > 0 { l.gen.name() } else { format!("{}^-1", l.gen.name()) })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Parses whitespace separated tokens `x1`, `y2^-1`, `s3^2`; `1` is the identity.
impl FromStr for Word {
    type Err = ParseWordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (g, e) = match tok.split_once('^') {
                Some((g, e)) => (g, e.parse::<i64>().map_err(|_| ParseWordError(tok.into()))?),
                None => (tok, 1),
            };
            let g: Generator = g.parse()?;
            let exp = if e < 0 { -1 } else { 1 };
            for _ in 0..e.unsigned_abs() {
                letters.push(Letter { gen: g, exp });
            }
        }
        Ok(Word::from_letters(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Group ring

/// Finite rational combination of words. Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, Rational>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_word(Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        Self::monomial(w, Rational::one())
    }

    pub fn monomial(w: Word, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(w, c);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Rational)>>(terms: I) -> Self {
        let mut e = Self::zero();
        for (w, c) in terms {
            e.add_term(w, c);
        }
        e
    }

    pub fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Rational {
        self.terms.get(w).copied().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Rational::one()))
    }

    pub fn scale(&self, c: Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, v)| (w.clone(), *v * c)))
    }

    /// Product in the group ring of the free group.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.multiply(b), *ca * *cb);
            }
        }
        out
    }

    pub fn left_mul_word(&self, w: &Word) -> Self {
        Self::from_terms(self.terms.iter().map(|(u, c)| (w.multiply(u), *c)))
    }

    pub fn augmentation(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c)
    }

    /// Sum of absolute values of coefficients.
    pub fn mass(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c.abs())
    }
}

pub fn augmentation(e: &GroupRingElement) -> Rational {
    e.augmentation()
}

/// `sum n_i g_i -> sum n_i g_i^-1`
pub fn bar_involution(e: &GroupRingElement) -> GroupRingElement {
    GroupRingElement::from_terms(e.terms().map(|(w, c)| (w.inverse(), *c)))
}

/// Fox derivative by letter-wise recursion: each occurrence of `v` contributes
/// its prefix, each occurrence of `v^-1` minus its prefix times `v^-1`.
pub fn fox_derivative(w: &Word, v: Generator) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    for (k, l) in w.letters().iter().enumerate() {
        if l.gen != v {
            continue;
        }
        if l.exp > 0 {
            out.add_term(w.prefix(k), Rational::one());
        } else {
            out.add_term(w.prefix(k + 1), -Rational::one());
        }
    }
    out
}

/// `sum_v (dw/dv)(v - 1) - (w - 1)`, zero for every word.
pub fn mean_value_defect(w: &Word, generators: &[Generator]) -> GroupRingElement {
    let one = GroupRingElement::one();
    let mut acc = GroupRingElement::from_word(w.clone()).sub(&one).scale(-Rational::one());
    for &v in generators {
        let dv = GroupRingElement::from_word(Word::gen(v)).sub(&one);
        acc = acc.add(&fox_derivative(w, v).mul(&dv));
    }
    acc
}

/// `d(uv)/dx - du/dx - u dv/dx`, zero for all words.
pub fn product_rule_defect(u: &Word, v: &Word, x: Generator) -> GroupRingElement {
    fox_derivative(&u.multiply(v), x).sub(&fox_derivative(u, x)).sub(&fox_derivative(v, x).left_mul_word(u))
}

/// Freely reduced word of length at most `max_len` over the given generators.
pub fn random_word(rng: &mut impl rand::Rng, generators: &[Generator], max_len: usize) -> Word {
    let n = rng.gen_range(0..=max_len);
    Word::from_letters((0..n).map(|_| Letter {
        gen: generators[rng.gen_range(0..generators.len())],
        exp: if rng.gen_bool(0.5) { 1 } else { -1 },
    }))
}

// ---------------------------------------------------------------------------
// Relators and the fundamental chain

pub fn canonical_relator(sig: &OrbifoldSignature) -> Word {
    Presentation::canonical(sig).relator()
}

pub fn torsion_relators(sig: &OrbifoldSignature) -> Vec<Word> {
    sig.cone_orders
        .iter()
        .enumerate()
        .map(|(i, &r)| Word::gen(Generator::s(i + 1)).pow(r as i64))
        .collect()
}

/// Formal sum of bar symbols `[a|b]`; symbols with an identity slot are dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BarTwoChain {
    terms: BTreeMap<(Word, Word), Rational>,
}

impl BarTwoChain {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_symbol(&mut self, a: Word, b: Word, c: Rational) {
        if c.is_zero() || a.is_identity() || b.is_identity() {
            return;
        }
        let key = (a, b);
        let v = *self.terms.get(&key).unwrap_or(&Rational::zero()) + c;
        if v.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v);
        }
    }

    /// Adds `c [e|b]` expanded linearly in the first slot.
    pub fn add_ring_symbol(&mut self, e: &GroupRingElement, b: &Word, c: Rational) {
        for (w, n) in e.terms() {
            self.add_symbol(w.clone(), b.clone(), *n * c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Word, Word), &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, a: &Word, b: &Word) -> Rational {
        self.terms.get(&(a.clone(), b.clone())).copied().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mass(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c.abs())
    }
}

pub fn fundamental_two_chain(sig: &OrbifoldSignature) -> BarTwoChain {
    fundamental_two_chain_of(&Presentation::canonical(sig))
}

/// Two-chain for any block order of the presentation.
pub fn fundamental_two_chain_of(p: &Presentation) -> BarTwoChain {
    let r = p.relator();
    let mut chain = BarTwoChain::zero();
    for v in p.signature.generators() {
        chain.add_ring_symbol(&fox_derivative(&r, v), &Word::gen(v), Rational::one());
    }
    for (i, &order) in p.signature.cone_orders.iter().enumerate() {
        let s = Generator::s(i + 1);
        let ri = Word::gen(s).pow(order as i64);
        let c = -Rational::new(1, order as i64);
        chain.add_ring_symbol(&fox_derivative(&ri, s), &Word::gen(s), c);
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn reduction_and_inverse() {
        assert!(w("x1").multiply(&w("x1^-1")).is_identity());
        assert_eq!(w("x1 y1").inverse(), w("y1^-1 x1^-1"));
        assert_eq!(w("x1 y1 y1^-1 z2"), w("x1 z2"));
        assert_eq!(w("s1^3").len(), 3);
        assert_eq!(w("x2 y1^-1").to_string(), "x2 y1^-1");
    }

    #[test]
    fn augmentation_of_combination() {
        let e = GroupRingElement::from_terms([(w("x1"), q(2, 1)), (w("y1"), q(-3, 1))]);
        assert_eq!(augmentation(&e), q(-1, 1));
    }

    #[test]
    fn fox_of_power() {
        let d = fox_derivative(&w("s1^4"), Generator::s(1));
        let expect = GroupRingElement::from_terms((0..4).map(|k| (w("s1").pow(k), q(1, 1))));
        assert_eq!(d, expect);
    }

    #[test]
    fn fox_of_commutator_in_y() {
        let c = Word::commutator(&w("x1"), &w("y1"));
        let d = fox_derivative(&c, Generator::y(1));
        let expect = GroupRingElement::from_terms([(w("x1"), q(1, 1)), (w("x1 y1 x1^-1 y1^-1"), q(-1, 1))]);
        assert_eq!(d, expect);
    }

    #[test]
    fn fox_of_relator_in_x1() {
        let sig = OrbifoldSignature::new(2, 0, vec![]);
        let d = fox_derivative(&canonical_relator(&sig), Generator::x(1));
        let expect = GroupRingElement::from_terms([(Word::identity(), q(1, 1)), (w("x1 y1 x1^-1"), q(-1, 1))]);
        assert_eq!(d, expect);
    }

    #[test]
    fn fox_of_inverse_letter() {
        let d = fox_derivative(&w("x1^-1"), Generator::x(1));
        assert_eq!(d, GroupRingElement::monomial(w("x1^-1"), q(-1, 1)));
    }

    #[test]
    fn bar_examples() {
        let e = GroupRingElement::from_terms([(w("x1 y1"), q(2, 1)), (w("s1"), q(-3, 1))]);
        let b = bar_involution(&e);
        assert_eq!(b.coefficient(&w("y1^-1 x1^-1")), q(2, 1));
        assert_eq!(b.coefficient(&w("s1^-1")), q(-3, 1));
        assert_eq!(bar_involution(&b), e);
    }

    #[test]
    fn fox_identities_on_a_relator() {
        let sig = OrbifoldSignature::new(1, 1, vec![2, 3]);
        let r = canonical_relator(&sig);
        assert!(mean_value_defect(&r, &sig.generators()).is_zero());
        assert!(product_rule_defect(&r, &w("x1 s2^-1"), Generator::x(1)).is_zero());
    }

    #[test]
    fn relator_instances() {
        assert_eq!(canonical_relator(&OrbifoldSignature::new(0, 3, vec![])), w("z1 z2 z3"));
        assert_eq!(canonical_relator(&OrbifoldSignature::new(1, 0, vec![3])), w("x1 y1 x1^-1 y1^-1 s1"));
        let sig = OrbifoldSignature::new(0, 0, vec![2, 2, 3, 3]);
        assert_eq!(canonical_relator(&sig), w("s1 s2 s3 s4"));
        assert_eq!(torsion_relators(&sig)[2], w("s3^3"));
    }

    #[test]
    fn pants_chain() {
        let c = fundamental_two_chain(&OrbifoldSignature::new(0, 3, vec![]));
        assert_eq!(c.len(), 2);
        assert_eq!(c.coefficient(&w("z1"), &w("z2")), q(1, 1));
        assert_eq!(c.coefficient(&w("z1 z2"), &w("z3")), q(1, 1));
    }

    #[test]
    fn cone_sphere_torsion_terms() {
        let sig = OrbifoldSignature::new(0, 0, vec![2, 2, 3, 3]);
        let c = fundamental_two_chain(&sig);
        assert_eq!(c.coefficient(&w("s1"), &w("s1")), q(-1, 2));
        assert_eq!(c.coefficient(&w("s3"), &w("s3")), q(-1, 3));
        assert_eq!(c.coefficient(&w("s3^2"), &w("s3")), q(-1, 3));
        // prefixes of the long relator
        assert_eq!(c.coefficient(&w("s1 s2"), &w("s3")), q(1, 1));
    }
}
