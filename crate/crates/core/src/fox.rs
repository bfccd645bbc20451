//! Group-ring elements and free differential calculus.
//!
//! Derivatives are evaluated directly in ZG for a finite quotient G of the
//! free group: every coefficient is pushed through the quotient map as it is
//! produced. Powers are never expanded; the power rule
//! `d(w^n) = (1 + pi(w) + ... + pi(w)^{n-1}) d(w)` is applied with the
//! geometric sum compressed along the cyclic order of `pi(w)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::words::{Gen, ProductWord, Word};

/// Element of ZG, keyed by group element index. Zero coefficients are never
/// stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<usize, BigInt>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        GroupRingElement::default()
    }

    pub fn one() -> Self {
        GroupRingElement::from_element(0)
    }

    pub fn from_element(g: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(g, BigInt::one());
        GroupRingElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, g: usize) -> BigInt {
        self.terms.get(&g).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.terms.iter().map(|(&g, c)| (g, c))
    }

    pub fn add_term(&mut self, g: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn add(&self, other: &GroupRingElement) -> GroupRingElement {
        let mut out = self.clone();
        for (g, c) in other.terms() {
            out.add_term(g, c);
        }
        out
    }

    pub fn neg(&self) -> GroupRingElement {
        GroupRingElement {
            terms: self.terms.iter().map(|(&g, c)| (g, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &GroupRingElement) -> GroupRingElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> GroupRingElement {
        if k.is_zero() {
            return GroupRingElement::zero();
        }
        GroupRingElement {
            terms: self.terms.iter().map(|(&g, c)| (g, c * k)).collect(),
        }
    }

    /// Ring product in ZG.
    pub fn mul(&self, other: &GroupRingElement, group: &FiniteGroup) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        for (g, a) in self.terms() {
            for (h, b) in other.terms() {
                out.add_term(group.mult(g, h), &(a * b));
            }
        }
        out
    }

    /// Left translation g . self.
    pub fn left_mul_element(&self, g: usize, group: &FiniteGroup) -> GroupRingElement {
        GroupRingElement {
            terms: self
                .terms
                .iter()
                .map(|(&h, c)| (group.mult(g, h), c.clone()))
                .collect(),
        }
    }

    /// Augmentation: sum of coefficients.
    pub fn augmentation(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Dense coefficient vector of length |G|.
    pub fn to_vec(&self, size: usize) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); size];
        for (g, c) in self.terms() {
            v[g] = c.clone();
        }
        v
    }

    pub fn from_vec(v: &[BigInt]) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        for (g, c) in v.iter().enumerate() {
            out.add_term(g, c);
        }
        out
    }
}

impl fmt::Debug for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(g, c)| format!("{c}*g{g}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `1 + g + g^2 + ... + g^{e-1}` for unbounded `e`, compressed along the
/// cyclic order of `g`.
pub fn geometric_sum(g: usize, e: &BigUint, group: &FiniteGroup) -> GroupRingElement {
    let o = group.element_order(g);
    let (q, r) = e.div_rem(&BigUint::from(o));
    let q = BigInt::from(q);
    let r = r.to_u64().unwrap() as usize;
    let mut out = GroupRingElement::zero();
    let mut cur = 0usize;
    for k in 0..o {
        let mut c = q.clone();
        if k < r {
            c += 1;
        }
        out.add_term(cur, &c);
        cur = group.mult(cur, g);
    }
    out
}

/// Fox derivative of a plain word with respect to one generator, with all
/// coefficients pushed through the quotient map.
pub fn fox_derivative(w: &Word, gen: Gen, group: &FiniteGroup) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    let mut prefix = 0usize; // image of the prefix before the current letter
    for &l in w.letters() {
        let next = group.apply_letter(prefix, l);
        if l.gen == gen {
            if l.inverse {
                // d(g^-1) = -g^-1, translated by the prefix: the coefficient
                // sits at the image of prefix*g^-1, which is `next`.
                out.add_term(next, &BigInt::from(-1));
            } else {
                out.add_term(prefix, &BigInt::one());
            }
        }
        prefix = next;
    }
    out
}

/// Fox derivative of a product of powers via the product and power rules.
pub fn fox_derivative_product(
    pw: &ProductWord,
    gen: Gen,
    group: &FiniteGroup,
) -> GroupRingElement {
    let mut total = GroupRingElement::zero();
    let mut prefix = 0usize;
    for (w, e) in pw.factors() {
        let d = fox_derivative(w, gen, group);
        let base = group.element_of_word(w);
        let geom = geometric_sum(base, e, group);
        let term = geom.mul(&d, group).left_mul_element(prefix, group);
        total = total.add(&term);
        prefix = group.mult(prefix, group.element_power(base, e));
    }
    total
}

/// Both Fox derivatives of a kernel element: the coordinates of its class in
/// the ambient free module (ZG)^2. Rejects words outside the kernel, where
/// the abelianized embedding is not defined.
pub fn magnus_image(w: &Word, group: &FiniteGroup) -> Result<[GroupRingElement; 2]> {
    if group.element_of_word(w) != group.identity() {
        return Err(Error::OutsideSubgroup(format!(
            "magnus_image of {w} which does not map to 1"
        )));
    }
    Ok([
        fox_derivative(w, Gen::X, group),
        fox_derivative(w, Gen::Y, group),
    ])
}

pub fn magnus_image_product(
    pw: &ProductWord,
    group: &FiniteGroup,
) -> Result<[GroupRingElement; 2]> {
    if group.element_of_product(pw) != group.identity() {
        return Err(Error::OutsideSubgroup(format!(
            "magnus_image of {pw} which does not map to 1"
        )));
    }
    Ok([
        fox_derivative_product(pw, Gen::X, group),
        fox_derivative_product(pw, Gen::Y, group),
    ])
}
