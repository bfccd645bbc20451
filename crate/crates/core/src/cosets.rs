//! Coset tables for finite-index subgroups of the free group on x, y.
//!
//! Provides Todd–Coxeter enumeration (HLT style with a lookahead pass and
//! full coincidence handling), Schreier transversals and generators,
//! rewriting of subgroup elements into Schreier generators, and subgroup
//! abelianization by rewriting relator conjugates.
//!
//! Tables are deterministic: enumeration processes cosets in definition
//! order and every completed table is renumbered by breadth-first discovery
//! order over the letters x, y, x^-1, y^-1.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::{FGAbelian, Locality};
use crate::error::{Error, Result};
use crate::group::{inverse_letter_index, letter_index, letter_of_index, FiniteGroup, L_X, L_Y};
use crate::linalg::IntMatrix;
use crate::words::{ProductWord, Word};

/// Complete coset table of a finite-index subgroup of the free group,
/// together with its defining data.
#[derive(Clone, PartialEq, Eq)]
pub struct CosetTable {
    n: usize,
    /// next[c][l] for l in x, y, x^-1, y^-1.
    next: Vec<[usize; 4]>,
    relators: Vec<ProductWord>,
    subgroup_gens: Vec<Word>,
}

impl CosetTable {
    /// The table of the whole group (one coset).
    pub fn full_group() -> CosetTable {
        CosetTable {
            n: 1,
            next: vec![[0, 0, 0, 0]],
            relators: Vec::new(),
            subgroup_gens: vec![Word::x(), Word::y()],
        }
    }

    pub fn from_parts(
        next: Vec<[usize; 4]>,
        relators: Vec<ProductWord>,
        subgroup_gens: Vec<Word>,
    ) -> Result<CosetTable> {
        let ct = CosetTable {
            n: next.len(),
            next,
            relators,
            subgroup_gens,
        };
        ct.verify()?;
        Ok(ct)
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn relators(&self) -> &[ProductWord] {
        &self.relators
    }

    pub fn subgroup_gens(&self) -> &[Word] {
        &self.subgroup_gens
    }

    pub fn step(&self, c: usize, l: usize) -> usize {
        self.next[c][l]
    }

    pub fn walk(&self, c: usize, w: &Word) -> usize {
        w.letters()
            .iter()
            .fold(c, |c, &l| self.next[c][letter_index(l)])
    }

    /// Walk a product of powers; each power is traversed along the cycle of
    /// its base word, never letter by letter.
    pub fn walk_product(&self, c: usize, pw: &ProductWord) -> usize {
        let mut c = c;
        for (w, e) in pw.factors() {
            let mut orbit = vec![c];
            loop {
                let d = self.walk(*orbit.last().unwrap(), w);
                if d == c {
                    break;
                }
                orbit.push(d);
            }
            let r = (e % BigUint::from(orbit.len())).to_u64().unwrap() as usize;
            c = orbit[r];
        }
        c
    }

    /// Full invariant check: mutually inverse generator actions, every
    /// relator fixes every coset, every subgroup generator fixes the base.
    pub fn verify(&self) -> Result<()> {
        for c in 0..self.n {
            for l in 0..4 {
                let d = self.next[c][l];
                if d >= self.n {
                    return Err(Error::InvalidInput("transition out of range".into()));
                }
                if self.next[d][inverse_letter_index(l)] != c {
                    return Err(Error::InvalidInput(format!(
                        "actions of a letter and its inverse disagree at coset {c}"
                    )));
                }
            }
        }
        for r in &self.relators {
            for c in 0..self.n {
                if self.walk_product(c, r) != c {
                    return Err(Error::InvalidInput(format!(
                        "relator {r} does not fix coset {c}"
                    )));
                }
            }
        }
        for g in &self.subgroup_gens {
            if self.walk(0, g) != 0 {
                return Err(Error::InvalidInput(format!(
                    "subgroup generator {g} does not fix the base coset"
                )));
            }
        }
        Ok(())
    }

    /// Renumber cosets by BFS discovery order (x, y, x^-1, y^-1 from the
    /// base). Canonical: two tables of the same subgroup become identical.
    pub fn canonical(&self) -> CosetTable {
        let mut map = vec![usize::MAX; self.n];
        let mut order = Vec::with_capacity(self.n);
        map[0] = 0;
        order.push(0);
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for l in 0..4 {
                let d = self.next[c][l];
                if map[d] == usize::MAX {
                    map[d] = order.len();
                    order.push(d);
                }
            }
        }
        assert_eq!(order.len(), self.n, "table not connected");
        let mut next = vec![[0usize; 4]; self.n];
        for (old, &new) in map.iter().enumerate() {
            for l in 0..4 {
                next[new][l] = map[self.next[old][l]];
            }
        }
        CosetTable {
            n: self.n,
            next,
            relators: self.relators.clone(),
            subgroup_gens: self.subgroup_gens.clone(),
        }
    }

    /// Flat encoding used for deterministic lexicographic candidate
    /// selection. Compare canonical tables only.
    pub fn encoding(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n * 4);
        for c in 0..self.n {
            out.extend_from_slice(&self.next[c]);
        }
        out
    }

    /// Conjugation certificate of normality: every Schreier generator,
    /// conjugated by x and by y, still fixes the base coset.
    pub fn is_normal(&self) -> bool {
        let ss = schreier(self);
        for s in &ss.gens {
            for conj in [Word::x(), Word::y()] {
                if self.walk(0, &s.conjugate_by(&conj)) != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// The subgroup of `self` is contained in the subgroup of `other`.
    pub fn is_contained_in(&self, other: &CosetTable) -> bool {
        let ss = schreier(self);
        ss.gens.iter().all(|g| other.walk(0, g) == 0)
    }

    /// Table of the intersection of the two subgroups (product action,
    /// reachable component of the base pair), numbered canonically.
    pub fn intersect(&self, other: &CosetTable) -> CosetTable {
        let mut ids = std::collections::BTreeMap::new();
        let mut order = vec![(0usize, 0usize)];
        ids.insert((0, 0), 0usize);
        let mut next: Vec<[usize; 4]> = Vec::new();
        let mut head = 0;
        while head < order.len() {
            let (a, b) = order[head];
            let mut row = [0usize; 4];
            for l in 0..4 {
                let pair = (self.next[a][l], other.next[b][l]);
                let id = *ids.entry(pair).or_insert_with(|| {
                    order.push(pair);
                    order.len() - 1
                });
                row[l] = id;
            }
            next.push(row);
            head += 1;
        }
        let mut relators = self.relators.clone();
        for r in &other.relators {
            if !relators.contains(r) {
                relators.push(r.clone());
            }
        }
        let mut ct = CosetTable {
            n: next.len(),
            next,
            relators,
            subgroup_gens: Vec::new(),
        };
        ct.subgroup_gens = schreier(&ct).gens;
        ct
    }

    /// The finite quotient group acting regularly on the cosets. Fails when
    /// the subgroup is not normal.
    pub fn finite_group(&self) -> Result<FiniteGroup> {
        let x = (0..self.n).map(|c| self.next[c][L_X]).collect();
        let y = (0..self.n).map(|c| self.next[c][L_Y]).collect();
        FiniteGroup::from_perms(x, y)
    }

    /// Replace the carried relator list (used when a table built inside a
    /// search inherits the ambient presentation).
    pub fn with_relators(mut self, relators: Vec<ProductWord>) -> Result<CosetTable> {
        self.relators = relators;
        self.verify()?;
        Ok(self)
    }
}

impl std::fmt::Debug for CosetTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CosetTable({} cosets)", self.n)?;
        for c in 0..self.n.min(16) {
            writeln!(
                f,
                "  {c}: x->{} y->{} X->{} Y->{}",
                self.next[c][0], self.next[c][1], self.next[c][2], self.next[c][3]
            )?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    count: usize,
    x: Vec<usize>,
    y: Vec<usize>,
    x_inv: Vec<usize>,
    y_inv: Vec<usize>,
    relators: Vec<ProductWord>,
    subgroup_gens: Vec<Word>,
}

impl Serialize for CosetTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableRepr {
            count: self.n,
            x: (0..self.n).map(|c| self.next[c][0]).collect(),
            y: (0..self.n).map(|c| self.next[c][1]).collect(),
            x_inv: (0..self.n).map(|c| self.next[c][2]).collect(),
            y_inv: (0..self.n).map(|c| self.next[c][3]).collect(),
            relators: self.relators.clone(),
            subgroup_gens: self.subgroup_gens.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CosetTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TableRepr::deserialize(d)?;
        let n = r.count;
        if r.x.len() != n || r.y.len() != n || r.x_inv.len() != n || r.y_inv.len() != n {
            return Err(serde::de::Error::custom("transition array length mismatch"));
        }
        let next = (0..n)
            .map(|c| [r.x[c], r.y[c], r.x_inv[c], r.y_inv[c]])
            .collect();
        CosetTable::from_parts(next, r.relators, r.subgroup_gens).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Todd-Coxeter enumeration
// ---------------------------------------------------------------------------

struct Enumerator {
    table: Vec<[Option<usize>; 4]>,
    rep: Vec<usize>,
    live: usize,
    max_cosets: usize,
    queue: VecDeque<(usize, usize)>,
}

impl Enumerator {
    fn new(max_cosets: usize) -> Self {
        Enumerator {
            table: vec![[None; 4]],
            rep: vec![0],
            live: 1,
            max_cosets,
            queue: VecDeque::new(),
        }
    }

    fn find(&mut self, mut c: usize) -> usize {
        while self.rep[c] != c {
            self.rep[c] = self.rep[self.rep[c]];
            c = self.rep[c];
        }
        c
    }

    fn read(&mut self, c: usize, l: usize) -> Option<usize> {
        let c = self.find(c);
        self.table[c][l].map(|d| self.find(d))
    }

    fn define(&mut self) -> Result<usize> {
        if self.live >= self.max_cosets {
            return Err(Error::BudgetExhausted(format!(
                "coset enumeration exceeded {} live cosets",
                self.max_cosets
            )));
        }
        self.table.push([None; 4]);
        self.rep.push(self.table.len() - 1);
        self.live += 1;
        Ok(self.table.len() - 1)
    }

    /// Install the edge a --l--> b, queueing coincidences on conflicts.
    fn set_edge(&mut self, a: usize, l: usize, b: usize) {
        let a = self.find(a);
        let b = self.find(b);
        match self.table[a][l] {
            Some(c) => {
                let c = self.find(c);
                if c != b {
                    self.queue.push_back((c, b));
                }
            }
            None => {
                self.table[a][l] = Some(b);
                let li = inverse_letter_index(l);
                match self.table[b][li] {
                    Some(c) => {
                        let c = self.find(c);
                        if c != a {
                            self.queue.push_back((c, a));
                        }
                    }
                    None => self.table[b][li] = Some(a),
                }
            }
        }
    }

    fn process_coincidences(&mut self) {
        while let Some((p, q)) = self.queue.pop_front() {
            let a = self.find(p);
            let b = self.find(q);
            if a == b {
                continue;
            }
            let (s, t) = (a.min(b), a.max(b));
            self.rep[t] = s;
            self.live -= 1;
            let row = std::mem::replace(&mut self.table[t], [None; 4]);
            for (l, entry) in row.into_iter().enumerate() {
                if let Some(u) = entry {
                    let u = self.find(u);
                    self.set_edge(s, l, u);
                }
            }
        }
    }

    fn scan(&mut self, c: usize, letters: &[usize], fill: bool) -> Result<()> {
        let mut f = self.find(c);
        let mut b = f;
        let mut i = 0usize;
        let mut j = letters.len();
        loop {
            while i < j {
                match self.read(f, letters[i]) {
                    Some(d) => {
                        f = d;
                        i += 1;
                    }
                    None => break,
                }
            }
            if i == j {
                if f != b {
                    self.queue.push_back((f, b));
                    self.process_coincidences();
                }
                return Ok(());
            }
            while j > i {
                match self.read(b, inverse_letter_index(letters[j - 1])) {
                    Some(d) => {
                        b = d;
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j == i {
                if f != b {
                    self.queue.push_back((f, b));
                    self.process_coincidences();
                }
                return Ok(());
            }
            if j == i + 1 {
                self.set_edge(f, letters[i], b);
                self.process_coincidences();
                return Ok(());
            }
            if !fill {
                return Ok(());
            }
            let d = self.define()?;
            self.set_edge(f, letters[i], d);
            self.process_coincidences();
            f = self.find(f);
            b = self.find(b);
        }
    }
}

fn word_letter_indexes(w: &Word) -> Vec<usize> {
    w.letters().iter().map(|&l| letter_index(l)).collect()
}

/// Enumerate the cosets of the subgroup generated by `subgroup_gens` and the
/// normal closure of `relators`. Deterministic (HLT order with one lookahead
/// pass before giving up on the budget).
pub fn todd_coxeter(
    relators: &[Word],
    subgroup_gens: &[Word],
    max_cosets: usize,
) -> Result<CosetTable> {
    if max_cosets == 0 {
        return Err(Error::InvalidInput("zero coset budget".into()));
    }
    let rel_letters: Vec<Vec<usize>> = relators
        .iter()
        .filter(|r| !r.is_identity())
        .map(word_letter_indexes)
        .collect();
    let gen_letters: Vec<Vec<usize>> = subgroup_gens
        .iter()
        .filter(|g| !g.is_identity())
        .map(word_letter_indexes)
        .collect();

    let mut e = Enumerator::new(max_cosets);
    for g in &gen_letters {
        e.scan(0, g, true)?;
    }
    let mut did_lookahead = false;
    let mut c = 0usize;
    while c < e.table.len() {
        if e.find(c) != c {
            c += 1;
            continue;
        }
        let mut attempt = || -> Result<()> {
            for r in &rel_letters {
                let cc = e.find(c);
                if cc != c {
                    return Ok(());
                }
                e.scan(cc, r, true)?;
            }
            if e.find(c) == c {
                for l in 0..4 {
                    if e.read(c, l).is_none() {
                        let d = e.define()?;
                        e.set_edge(c, l, d);
                        e.process_coincidences();
                    }
                }
            }
            Ok(())
        };
        match attempt() {
            Ok(()) => {
                c += 1;
            }
            Err(err @ Error::BudgetExhausted(_)) => {
                if did_lookahead {
                    return Err(err);
                }
                did_lookahead = true;
                // Lookahead: scan every relator at every live coset without
                // defining, hoping for collapses before retrying.
                for cc in 0..e.table.len() {
                    if e.find(cc) != cc {
                        continue;
                    }
                    for r in &rel_letters {
                        let live = e.find(cc);
                        e.scan(live, r, false)?;
                    }
                }
                if e.live >= e.max_cosets {
                    return Err(err);
                }
            }
            Err(other) => return Err(other),
        }
    }

    // Compact into a dense complete table.
    let alloc = e.table.len();
    let mut map = vec![usize::MAX; alloc];
    let mut count = 0usize;
    for i in 0..alloc {
        if e.find(i) == i {
            map[i] = count;
            count += 1;
        }
    }
    let mut next = vec![[0usize; 4]; count];
    for i in 0..alloc {
        if map[i] == usize::MAX {
            continue;
        }
        for l in 0..4 {
            let d = e
                .read(i, l)
                .ok_or_else(|| Error::CertificationFailed {
                    check: "coset-table-totality",
                    detail: format!("undefined entry at coset {i}"),
                })?;
            next[map[i]][l] = map[d];
        }
    }
    let ct = CosetTable {
        n: count,
        next,
        relators: relators
            .iter()
            .filter(|r| !r.is_identity())
            .map(|r| ProductWord::from_word(r.clone()))
            .collect(),
        subgroup_gens: subgroup_gens.to_vec(),
    }
    .canonical();
    ct.verify()?;
    Ok(ct)
}

// ---------------------------------------------------------------------------
// Schreier systems and rewriting
// ---------------------------------------------------------------------------

/// Prefix-closed transversal and the induced free generating set of the
/// subgroup, with the edge-to-generator rewriting data.
pub struct SchreierSystem {
    pub transversal: Vec<Word>,
    pub gens: Vec<Word>,
    /// edge_gen[c][g] for g in {x, y}: index of the Schreier generator on
    /// that edge, None for spanning-tree edges.
    edge_gen: Vec<[Option<usize>; 2]>,
}

impl SchreierSystem {
    pub fn gen_count(&self) -> usize {
        self.gens.len()
    }
}

/// Breadth-first Schreier system in generator order x, y, x^-1, y^-1.
pub fn schreier(ct: &CosetTable) -> SchreierSystem {
    let n = ct.index();
    let mut transversal: Vec<Option<Word>> = vec![None; n];
    let mut tree: Vec<[bool; 2]> = vec![[false; 2]; n];
    transversal[0] = Some(Word::identity());
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for l in 0..4 {
            let d = ct.step(c, l);
            if transversal[d].is_none() {
                let w = transversal[c]
                    .as_ref()
                    .unwrap()
                    .mul(&Word::from_letters([letter_of_index(l)]));
                transversal[d] = Some(w);
                // Mark the undirected generator edge as a tree edge.
                match l {
                    0 | 1 => tree[c][l] = true,
                    _ => tree[d][l - 2] = true,
                }
                queue.push_back(d);
            }
        }
    }
    let transversal: Vec<Word> = transversal.into_iter().map(|w| w.unwrap()).collect();
    let mut gens = Vec::new();
    let mut edge_gen = vec![[None, None]; n];
    for c in 0..n {
        for g in 0..2 {
            if tree[c][g] {
                continue;
            }
            let letter = letter_of_index(g);
            let d = ct.step(c, g);
            let w = transversal[c]
                .mul(&Word::from_letters([letter]))
                .mul(&transversal[d].inverse());
            assert!(
                !w.is_identity(),
                "non-tree Schreier generator reduced to identity"
            );
            edge_gen[c][g] = Some(gens.len());
            gens.push(w);
        }
    }
    // Rank formula for subgroups of a rank-2 free group: index + 1.
    assert_eq!(gens.len(), n + 1, "Schreier generator count");
    SchreierSystem {
        transversal,
        gens,
        edge_gen,
    }
}

/// Rewrite a subgroup element as a sequence of Schreier generators.
/// Returns the abelianized exponent vector and the literal generator
/// sequence. Rejects words that do not fix the base coset.
pub fn rewrite(
    ct: &CosetTable,
    ss: &SchreierSystem,
    w: &Word,
) -> Result<(Vec<BigInt>, Vec<(usize, bool)>)> {
    if ct.walk(0, w) != 0 {
        return Err(Error::OutsideSubgroup(format!("{w}")));
    }
    let mut vec = vec![BigInt::zero(); ss.gens.len()];
    let mut seq = Vec::new();
    let mut c = 0usize;
    for &l in w.letters() {
        let li = letter_index(l);
        match li {
            0 | 1 => {
                if let Some(k) = ss.edge_gen[c][li] {
                    vec[k] += 1;
                    seq.push((k, false));
                }
                c = ct.step(c, li);
            }
            _ => {
                let d = ct.step(c, li);
                if let Some(k) = ss.edge_gen[d][li - 2] {
                    vec[k] -= 1;
                    seq.push((k, true));
                }
                c = d;
            }
        }
    }
    Ok((vec, seq))
}

/// Expand a generator sequence back into a word of the free group.
pub fn expand(ss: &SchreierSystem, seq: &[(usize, bool)]) -> Word {
    let mut out = Word::identity();
    for &(k, inv) in seq {
        let g = if inv {
            ss.gens[k].inverse()
        } else {
            ss.gens[k].clone()
        };
        out = out.mul(&g);
    }
    out
}

/// Abelianized rewriting of a product word starting from an arbitrary coset
/// `c0` (equivalently, of its conjugate by the transversal word of `c0`,
/// starting from the base). Powers are accumulated per cycle of the base
/// word's action, so huge exponents cost only the cycle length.
pub fn rewrite_abelian_from(
    ct: &CosetTable,
    ss: &SchreierSystem,
    c0: usize,
    pw: &ProductWord,
) -> Result<Vec<BigInt>> {
    let mut total = vec![BigInt::zero(); ss.gens.len()];
    let mut c = c0;
    for (w, e) in pw.factors() {
        // Orbit of c under the action of w, with the contribution of one
        // traversal from each orbit point.
        let mut orbit = vec![c];
        let mut contribs: Vec<Vec<BigInt>> = Vec::new();
        loop {
            let start = *orbit.last().unwrap();
            let (end, v) = walk_accumulate(ct, ss, start, w);
            contribs.push(v);
            if end == c {
                break;
            }
            orbit.push(end);
        }
        let o = orbit.len();
        let (q, r) = e.div_rem(&BigUint::from(o));
        let q = BigInt::from(q);
        let r = r.to_u64().unwrap() as usize;
        if !q.is_zero() {
            for v in &contribs {
                for (t, x) in total.iter_mut().zip(v) {
                    *t += &q * x;
                }
            }
        }
        for v in contribs.iter().take(r) {
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
        }
        c = orbit[r % o];
    }
    if c != c0 {
        return Err(Error::OutsideSubgroup(format!(
            "{pw} moves coset {c0} to {c}"
        )));
    }
    Ok(total)
}

fn walk_accumulate(
    ct: &CosetTable,
    ss: &SchreierSystem,
    c0: usize,
    w: &Word,
) -> (usize, Vec<BigInt>) {
    let mut v = vec![BigInt::zero(); ss.gens.len()];
    let mut c = c0;
    for &l in w.letters() {
        let li = letter_index(l);
        match li {
            0 | 1 => {
                if let Some(k) = ss.edge_gen[c][li] {
                    v[k] += 1;
                }
                c = ct.step(c, li);
            }
            _ => {
                let d = ct.step(c, li);
                if let Some(k) = ss.edge_gen[d][li - 2] {
                    v[k] -= 1;
                }
                c = d;
            }
        }
    }
    (c, v)
}

/// Relation matrix of the subgroup presentation: one row per (coset,
/// relator) pair, each the abelianized rewrite of the relator conjugated by
/// that coset's transversal element.
pub fn subgroup_relation_rows(
    relators: &[ProductWord],
    ct: &CosetTable,
    ss: &SchreierSystem,
) -> Result<IntMatrix> {
    let mut rows = Vec::with_capacity(relators.len() * ct.index());
    for r in relators {
        for c in 0..ct.index() {
            rows.push(rewrite_abelian_from(ct, ss, c, r)?);
        }
    }
    Ok(IntMatrix::from_bigint_rows(rows, ss.gens.len()))
}

/// Abelianization of the subgroup of `ct` inside the group presented by
/// `relators`: cokernel of the rewritten relator conjugates. The subgroup
/// has infinite abelianization exactly when the free rank is positive.
pub fn subgroup_abelianization(relators: &[ProductWord], ct: &CosetTable) -> Result<FGAbelian> {
    let ss = schreier(ct);
    let rows = subgroup_relation_rows(relators, ct, &ss)?;
    Ok(FGAbelian::from_relation_matrix(&rows, Locality::Global))
}

/// Kernel table of the map sending x, y to fixed elements of an abelian
/// group presented as Z^k / diag(moduli) (zero modulus = free coordinate is
/// not supported here; all moduli finite). Cosets are the subgroup of the
/// target generated by the two images.
pub fn abelian_quotient_kernel_table(
    moduli: &[u64],
    image_x: &[u64],
    image_y: &[u64],
) -> Result<CosetTable> {
    let k = moduli.len();
    if image_x.len() != k || image_y.len() != k || moduli.iter().any(|&m| m == 0) {
        return Err(Error::InvalidInput("bad abelian quotient data".into()));
    }
    let reduce = |v: &[u64]| -> Vec<u64> { v.iter().zip(moduli).map(|(a, m)| a % m).collect() };
    let add = |a: &[u64], b: &[u64]| -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(moduli)
            .map(|((x, y), m)| (x + y) % m)
            .collect()
    };
    let neg = |a: &[u64]| -> Vec<u64> {
        a.iter().zip(moduli).map(|(x, m)| (m - x % m) % m).collect()
    };
    let ix = reduce(image_x);
    let iy = reduce(image_y);
    let steps = [ix.clone(), iy.clone(), neg(&ix), neg(&iy)];
    let mut ids = std::collections::BTreeMap::new();
    let zero = vec![0u64; k];
    ids.insert(zero.clone(), 0usize);
    let mut order = vec![zero];
    let mut next: Vec<[usize; 4]> = Vec::new();
    let mut head = 0;
    while head < order.len() {
        let cur = order[head].clone();
        let mut row = [0usize; 4];
        for (l, s) in steps.iter().enumerate() {
            let dest = add(&cur, s);
            let id = *ids.entry(dest.clone()).or_insert_with(|| {
                order.push(dest);
                order.len() - 1
            });
            row[l] = id;
        }
        next.push(row);
        head += 1;
    }
    let mut ct = CosetTable {
        n: next.len(),
        next,
        relators: Vec::new(),
        subgroup_gens: Vec::new(),
    }
    .canonical();
    ct.subgroup_gens = schreier(&ct).gens;
    Ok(ct)
}
