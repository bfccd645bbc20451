//! Finite quotients of the free group, realized by their regular action.
//!
//! A [`FiniteGroup`] is built from the two right-multiplication permutations
//! of the generators. Construction certifies that the action is regular
//! (equivalently, that the point stabilizer is a normal subgroup), so the
//! points can be identified with group elements and an exact multiplication
//! table exists.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Gen, Letter, ProductWord, Word};

pub const L_X: usize = 0;
pub const L_Y: usize = 1;
pub const L_XI: usize = 2;
pub const L_YI: usize = 3;

pub fn letter_index(l: Letter) -> usize {
    match (l.gen, l.inverse) {
        (Gen::X, false) => L_X,
        (Gen::Y, false) => L_Y,
        (Gen::X, true) => L_XI,
        (Gen::Y, true) => L_YI,
    }
}

pub fn inverse_letter_index(l: usize) -> usize {
    match l {
        L_X => L_XI,
        L_Y => L_YI,
        L_XI => L_X,
        L_YI => L_Y,
        _ => unreachable!(),
    }
}

pub fn letter_of_index(l: usize) -> Letter {
    match l {
        L_X => Letter::new(Gen::X, false),
        L_Y => Letter::new(Gen::Y, false),
        L_XI => Letter::new(Gen::X, true),
        L_YI => Letter::new(Gen::Y, true),
        _ => unreachable!(),
    }
}

#[derive(Clone)]
pub struct FiniteGroup {
    size: usize,
    /// Right multiplication by x, y, x^-1, y^-1.
    perms: [Vec<usize>; 4],
    /// Prefix-closed transversal words, BFS order x, y, x^-1, y^-1.
    words: Vec<Word>,
    mult: Vec<usize>,
    inv: Vec<usize>,
}

impl FiniteGroup {
    /// Build and certify from the generator permutations.
    pub fn from_perms(x: Vec<usize>, y: Vec<usize>) -> Result<FiniteGroup> {
        let n = x.len();
        if n == 0 || y.len() != n {
            return Err(Error::InvalidInput("bad permutation sizes".into()));
        }
        let xi = invert_perm(&x)?;
        let yi = invert_perm(&y)?;
        let perms = [x, y, xi, yi];

        // BFS transversal.
        let mut words: Vec<Option<Word>> = vec![None; n];
        words[0] = Some(Word::identity());
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            for l in 0..4 {
                let d = perms[l][c];
                if words[d].is_none() {
                    let w = words[c]
                        .as_ref()
                        .unwrap()
                        .mul(&Word::from_letters([letter_of_index(l)]));
                    words[d] = Some(w);
                    queue.push_back(d);
                }
            }
        }
        if words.iter().any(|w| w.is_none()) {
            return Err(Error::InvalidInput(
                "generator action is not transitive".into(),
            ));
        }
        let words: Vec<Word> = words.into_iter().map(|w| w.unwrap()).collect();

        // Permutation of each element, built incrementally along the BFS
        // tree: phi[b.l] = sigma_l o phi[b].
        let mut phi: Vec<Option<Vec<usize>>> = vec![None; n];
        phi[0] = Some((0..n).collect());
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(b) = queue.pop_front() {
            for l in 0..4 {
                let d = perms[l][b];
                if phi[d].is_none() {
                    let pb = phi[b].as_ref().unwrap();
                    phi[d] = Some(pb.iter().map(|&a| perms[l][a]).collect());
                    queue.push_back(d);
                }
            }
        }
        let phi: Vec<Vec<usize>> = phi.into_iter().map(|p| p.unwrap()).collect();

        // Regularity: applying a letter to an element's permutation must give
        // the permutation of the letter-translated element. This fails
        // exactly when the point stabilizer is not normal.
        for b in 0..n {
            for l in 0..4 {
                let d = perms[l][b];
                for a in 0..n {
                    if perms[l][phi[b][a]] != phi[d][a] {
                        return Err(Error::InvalidInput(
                            "action is not regular (stabilizer not normal)".into(),
                        ));
                    }
                }
            }
        }

        let mut mult = vec![0usize; n * n];
        for a in 0..n {
            for b in 0..n {
                mult[a * n + b] = phi[b][a];
            }
        }
        let mut inv = vec![0usize; n];
        for b in 0..n {
            inv[b] = (0..n)
                .find(|&c| mult[b * n + c] == 0)
                .expect("row of a Latin square");
            if mult[inv[b] * n + b] != 0 {
                return Err(Error::InvalidInput("inverse inconsistency".into()));
            }
        }

        Ok(FiniteGroup {
            size: n,
            perms,
            words,
            mult,
            inv,
        })
    }

    pub fn trivial() -> FiniteGroup {
        FiniteGroup::from_perms(vec![0], vec![0]).expect("trivial group")
    }

    pub fn order(&self) -> usize {
        self.size
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mult(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.size + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn gen_elem(&self, g: Gen) -> usize {
        match g {
            Gen::X => self.perms[L_X][0],
            Gen::Y => self.perms[L_Y][0],
        }
    }

    pub fn perm(&self, letter: usize) -> &[usize] {
        &self.perms[letter]
    }

    /// Right multiplication of element `c` by a single letter.
    pub fn apply_letter(&self, c: usize, l: Letter) -> usize {
        self.perms[letter_index(l)][c]
    }

    pub fn element_of_word(&self, w: &Word) -> usize {
        w.letters()
            .iter()
            .fold(0, |c, &l| self.apply_letter(c, l))
    }

    pub fn element_of_product(&self, pw: &ProductWord) -> usize {
        let mut c = 0usize;
        for (w, e) in pw.factors() {
            let g = self.element_of_word(w);
            c = self.mult(c, self.element_power(g, e));
        }
        c
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut c = g;
        let mut k = 1;
        while c != 0 {
            c = self.mult(c, g);
            k += 1;
        }
        k
    }

    /// g^e for unbounded e, via the cyclic order of g.
    pub fn element_power(&self, g: usize, e: &BigUint) -> usize {
        let o = self.element_order(g);
        let r = (e % BigUint::from(o)).to_u64().unwrap() as usize;
        let mut c = 0usize;
        for _ in 0..r {
            c = self.mult(c, g);
        }
        c
    }

    /// BFS transversal word whose image is element `g`.
    pub fn transversal_word(&self, g: usize) -> &Word {
        &self.words[g]
    }

    pub fn is_abelian(&self) -> bool {
        let (x, y) = (self.gen_elem(Gen::X), self.gen_elem(Gen::Y));
        self.mult(x, y) == self.mult(y, x)
    }
}

fn invert_perm(p: &[usize]) -> Result<Vec<usize>> {
    let n = p.len();
    let mut inv = vec![usize::MAX; n];
    for (i, &v) in p.iter().enumerate() {
        if v >= n || inv[v] != usize::MAX {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        inv[v] = i;
    }
    Ok(inv)
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    size: usize,
    x: Vec<usize>,
    y: Vec<usize>,
}

impl Serialize for FiniteGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr {
            size: self.size,
            x: self.perms[L_X].clone(),
            y: self.perms[L_Y].clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GroupRepr::deserialize(d)?;
        if repr.x.len() != repr.size || repr.y.len() != repr.size {
            return Err(serde::de::Error::custom("size mismatch"));
        }
        FiniteGroup::from_perms(repr.x, repr.y).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> FiniteGroup {
        // x acts as the swap, y trivially.
        FiniteGroup::from_perms(vec![1, 0], vec![0, 1]).unwrap()
    }

    #[test]
    fn c2_structure() {
        let g = c2();
        assert_eq!(g.order(), 2);
        let x = g.gen_elem(Gen::X);
        assert_eq!(g.mult(x, x), 0);
        assert_eq!(g.inv(x), x);
        assert_eq!(g.element_order(x), 2);
        assert!(g.is_abelian());
    }

    #[test]
    fn klein_four() {
        // x = (01)(23), y = (02)(13) on four points.
        let g = FiniteGroup::from_perms(vec![1, 0, 3, 2], vec![2, 3, 0, 1]).unwrap();
        assert_eq!(g.order(), 4);
        for a in 0..4 {
            assert_eq!(g.mult(a, a), 0);
        }
    }

    #[test]
    fn rejects_non_regular() {
        // Natural S3 action on 3 points is transitive but not regular.
        let x = vec![1, 0, 2]; // transposition
        let y = vec![1, 2, 0]; // 3-cycle
        assert!(FiniteGroup::from_perms(x, y).is_err());
    }

    #[test]
    fn regular_s3_accepted() {
        // Regular action of S3 built from its Cayley table.
        // Elements: e, r, r2, s, sr, sr2 with x -> r (order 3), y -> s.
        // Right multiplication permutations computed by hand.
        let x = vec![1, 2, 0, 4, 5, 3];
        let y = vec![3, 5, 4, 0, 2, 1];
        let g = FiniteGroup::from_perms(x, y).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        let r = g.gen_elem(Gen::X);
        let s = g.gen_elem(Gen::Y);
        assert_eq!(g.element_order(r), 3);
        assert_eq!(g.element_order(s), 2);
    }

    #[test]
    fn element_of_product_matches_expansion() {
        let g = c2();
        let mut pw = ProductWord::identity();
        pw.push_power(Word::parse("xy").unwrap(), BigUint::from(7u32));
        let expanded = pw.expanded(1000).unwrap();
        assert_eq!(g.element_of_product(&pw), g.element_of_word(&expanded));
    }

    #[test]
    fn word_transversal_consistency() {
        let g = FiniteGroup::from_perms(vec![1, 0, 3, 2], vec![2, 3, 0, 1]).unwrap();
        for e in 0..g.order() {
            assert_eq!(g.element_of_word(g.transversal_word(e)), e);
        }
    }
}
