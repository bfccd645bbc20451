//! Elements of the free group on two generators x, y.
//!
//! Words carry the freely-reduced invariant at all times. Long relators of
//! the inductive construction are held as products of powers
//! ([`ProductWord`]) so that powers with astronomically large exponents are
//! never expanded letter by letter.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    X,
    Y,
}

impl Gen {
    pub fn all() -> [Gen; 2] {
        [Gen::X, Gen::Y]
    }

    pub fn index(self) -> usize {
        match self {
            Gen::X => 0,
            Gen::Y => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: Gen, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inverted(self) -> Self {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }

    fn to_char(self) -> char {
        match (self.gen, self.inverse) {
            (Gen::X, false) => 'x',
            (Gen::X, true) => 'X',
            (Gen::Y, false) => 'y',
            (Gen::Y, true) => 'Y',
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'x' => Some(Letter::new(Gen::X, false)),
            'X' => Some(Letter::new(Gen::X, true)),
            'y' => Some(Letter::new(Gen::Y, false)),
            'Y' => Some(Letter::new(Gen::Y, true)),
            _ => None,
        }
    }
}

/// A freely reduced word in x, y and their inverses.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn gen(g: Gen) -> Self {
        Word {
            letters: vec![Letter::new(g, false)],
        }
    }

    pub fn x() -> Self {
        Word::gen(Gen::X)
    }

    pub fn y() -> Self {
        Word::gen(Gen::Y)
    }

    /// Build from an arbitrary letter sequence, reducing at the seams.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last().is_some_and(|&top| top.cancels(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    /// Parse the text format: juxtaposed letters, `X`/`Y` for inverses.
    /// The empty string is the identity.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(text.len());
        for c in text.chars() {
            if c.is_whitespace() {
                continue;
            }
            let l = Letter::from_char(c)
                .ok_or_else(|| Error::InvalidInput(format!("bad word letter {c:?}")))?;
            letters.push(l);
        }
        Ok(Word::from_letters(letters))
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

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    pub fn pow(&self, n: u64) -> Word {
        let mut out = Word::identity();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn conjugate_by(&self, t: &Word) -> Word {
        t.mul(self).mul(&t.inverse())
    }

    pub fn exponent_sum(&self, g: Gen) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.gen == g)
            .map(|l| if l.inverse { -1 } else { 1 })
            .sum()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Word::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A product of powers `w_1^{e_1} ... w_k^{e_k}`, never expanded.
///
/// Exponents are unbounded: the construction produces factors whose
/// exponents grow far beyond anything materializable.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct ProductWord {
    factors: Vec<(Word, BigUint)>,
}

impl ProductWord {
    pub fn identity() -> Self {
        ProductWord::default()
    }

    pub fn from_word(w: Word) -> Self {
        let mut p = ProductWord::identity();
        p.push_power(w, BigUint::one());
        p
    }

    pub fn push_power(&mut self, w: Word, e: BigUint) {
        if w.is_identity() || e.is_zero() {
            return;
        }
        self.factors.push((w, e));
    }

    pub fn mul_power(&self, w: Word, e: BigUint) -> ProductWord {
        let mut out = self.clone();
        out.push_power(w, e);
        out
    }

    pub fn factors(&self) -> &[(Word, BigUint)] {
        &self.factors
    }

    pub fn is_syntactic_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent_sum(&self, g: Gen) -> BigInt {
        let mut total = BigInt::zero();
        for (w, e) in &self.factors {
            total += BigInt::from(w.exponent_sum(g)) * BigInt::from(e.clone());
        }
        total
    }

    /// Total letter count after expansion, if it fits in u64.
    pub fn expanded_len(&self) -> Option<u64> {
        let mut total: u64 = 0;
        for (w, e) in &self.factors {
            let e = e.to_u64()?;
            total = total.checked_add(e.checked_mul(w.len() as u64)?)?;
        }
        Some(total)
    }

    /// Expand into a plain word when the total length stays under `max_len`.
    pub fn expanded(&self, max_len: u64) -> Option<Word> {
        let len = self.expanded_len()?;
        if len > max_len {
            return None;
        }
        let mut out = Word::identity();
        for (w, e) in &self.factors {
            let e = e.to_u64().expect("checked by expanded_len");
            out = out.mul(&w.pow(e));
        }
        Some(out)
    }
}

impl fmt::Display for ProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (w, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "({w})^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProductWord({})", self)
    }
}

#[derive(Serialize, Deserialize)]
struct FactorRepr {
    word: Word,
    exponent: String,
}

impl Serialize for ProductWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr: Vec<FactorRepr> = self
            .factors
            .iter()
            .map(|(w, e)| FactorRepr {
                word: w.clone(),
                exponent: e.to_string(),
            })
            .collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = Vec::<FactorRepr>::deserialize(d)?;
        let mut out = ProductWord::identity();
        for f in repr {
            let e: BigUint = f
                .exponent
                .parse()
                .map_err(|_| serde::de::Error::custom("bad exponent"))?;
            out.push_power(f.word, e);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Naive reducer: rescan from the start after every cancellation.
    fn naive_reduce(letters: &[Letter]) -> Vec<Letter> {
        let mut v = letters.to_vec();
        loop {
            let pos = (0..v.len().saturating_sub(1)).find(|&i| v[i].cancels(v[i + 1]));
            match pos {
                Some(i) => {
                    v.drain(i..=i + 1);
                }
                None => return v,
            }
        }
    }

    #[test]
    fn reduce_cancels() {
        let w = Word::x().mul(&Word::x().inverse());
        assert!(w.is_identity());
    }

    #[test]
    fn power_and_inverse() {
        let xy = Word::parse("xy").unwrap();
        assert_eq!(xy.pow(2), Word::parse("xyxy").unwrap());
        assert_eq!(
            Word::parse("xYx").unwrap().inverse(),
            Word::parse("XyX").unwrap()
        );
    }

    #[test]
    fn parse_display_roundtrip() {
        for text in ["", "x", "xyXY", "XXyy"] {
            let w = Word::parse(text).unwrap();
            assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
        }
        assert!(Word::parse("abc").is_err());
    }

    #[test]
    fn reduction_confluent_against_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let n = rng.gen_range(0..30);
            let letters: Vec<Letter> = (0..n)
                .map(|_| {
                    let g = if rng.gen_bool(0.5) { Gen::X } else { Gen::Y };
                    Letter::new(g, rng.gen_bool(0.5))
                })
                .collect();
            let fast = Word::from_letters(letters.clone());
            assert_eq!(fast.letters(), naive_reduce(&letters).as_slice());
        }
    }

    #[test]
    fn group_axioms_on_randoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rand_word = |rng: &mut rand_chacha::ChaCha8Rng| {
            let n = rng.gen_range(0..12);
            Word::from_letters((0..n).map(|_| {
                let g = if rng.gen_bool(0.5) { Gen::X } else { Gen::Y };
                Letter::new(g, rng.gen_bool(0.5))
            }))
        };
        for _ in 0..200 {
            let a = rand_word(&mut rng);
            let b = rand_word(&mut rng);
            let c = rand_word(&mut rng);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert!(a.mul(&a.inverse()).is_identity());
        }
    }

    #[test]
    fn product_word_expansion() {
        let mut p = ProductWord::identity();
        p.push_power(Word::parse("xy").unwrap(), BigUint::from(3u32));
        assert_eq!(p.expanded(100).unwrap(), Word::parse("xyxyxy").unwrap());
        assert_eq!(p.expanded_len(), Some(6));
        assert!(p.expanded(5).is_none());
        assert_eq!(p.exponent_sum(Gen::X), BigInt::from(3));
    }

    #[test]
    fn product_word_serde() {
        let mut p = ProductWord::identity();
        p.push_power(Word::parse("xY").unwrap(), BigUint::from(12u32));
        let s = serde_json::to_string(&p).unwrap();
        let q: ProductWord = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
