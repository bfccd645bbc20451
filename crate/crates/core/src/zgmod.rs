//! Lattices with an exact action of a finite group.
//!
//! A [`ZGLattice`] is a Z-lattice inside a fixed ambient free module,
//! stable under integer action matrices for the two group generators. The
//! module provides relation modules of normal finite-index subgroups
//! (through Fox coordinates), submodule spans, quotient torsion, rational
//! equivariant complements by projection averaging, saturated kernel
//! lattices, and the perturbation construction that forces unbounded
//! torsion in the quotients by the perturbed submodules.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::{FGAbelian, Locality};
use crate::cosets::{self, CosetTable, SchreierSystem};
use crate::error::{Error, Result};
use crate::fox::{self, GroupRingElement};
use crate::group::FiniteGroup;
use crate::linalg::{self, IntMatrix};
use crate::words::{ProductWord, Word};

/// A G-stable lattice in an ambient free Z-module, with the action given by
/// integer matrices for the group generators (acting on row vectors from
/// the right).
#[derive(Clone)]
pub struct ZGLattice {
    ambient: usize,
    /// Canonical HNF basis; rows span the lattice.
    basis: IntMatrix,
    group: FiniteGroup,
    /// Actions of x, y, x^-1, y^-1.
    actions: [IntMatrix; 4],
}

impl ZGLattice {
    /// Build and certify a lattice: the generator actions must be
    /// unimodular and the basis must be stable under them.
    pub fn new(
        ambient: usize,
        rows: IntMatrix,
        group: FiniteGroup,
        action_x: IntMatrix,
        action_y: IntMatrix,
    ) -> Result<ZGLattice> {
        if rows.cols() != ambient
            || action_x.rows() != ambient
            || action_x.cols() != ambient
            || action_y.rows() != ambient
            || action_y.cols() != ambient
        {
            return Err(Error::InvalidInput("ambient dimension mismatch".into()));
        }
        let ax_inv = action_x
            .inverse_unimodular()
            .ok_or_else(|| Error::InvalidInput("x action is not unimodular".into()))?;
        let ay_inv = action_y
            .inverse_unimodular()
            .ok_or_else(|| Error::InvalidInput("y action is not unimodular".into()))?;
        let lat = ZGLattice {
            ambient,
            basis: linalg::hnf_basis(&rows),
            group,
            actions: [action_x, action_y, ax_inv, ay_inv],
        };
        lat.verify_stable()?;
        Ok(lat)
    }

    /// The full free module (ZG)^d with the left-multiplication action.
    pub fn regular_ambient(group: &FiniteGroup, slots: usize) -> ZGLattice {
        let n = group.order();
        let ambient = slots * n;
        let perm_action = |gen_elem: usize| -> IntMatrix {
            let mut m = IntMatrix::zeros(ambient, ambient);
            for slot in 0..slots {
                for g in 0..n {
                    // Left multiplication: coordinate (slot, g) moves to
                    // (slot, gen_elem * g).
                    m.set(
                        slot * n + g,
                        slot * n + group.mult(gen_elem, g),
                        BigInt::one(),
                    );
                }
            }
            m
        };
        let ax = perm_action(group.gen_elem(crate::words::Gen::X));
        let ay = perm_action(group.gen_elem(crate::words::Gen::Y));
        ZGLattice::new(
            ambient,
            IntMatrix::identity(ambient),
            group.clone(),
            ax,
            ay,
        )
        .expect("regular ambient is stable")
    }

    /// Same ambient module and action, new basis rows.
    pub fn with_rows(&self, rows: IntMatrix) -> Result<ZGLattice> {
        let lat = ZGLattice {
            ambient: self.ambient,
            basis: linalg::hnf_basis(&rows),
            group: self.group.clone(),
            actions: self.actions.clone(),
        };
        lat.verify_stable()?;
        Ok(lat)
    }

    fn verify_stable(&self) -> Result<()> {
        for l in [0usize, 1] {
            for row in self.basis.row_iter() {
                let moved = apply_matrix(row, &self.actions[l]);
                if !linalg::in_rowspan(&self.basis, &moved) {
                    return Err(Error::InvalidInput(format!(
                        "lattice is not stable under generator {}",
                        if l == 0 { "x" } else { "y" }
                    )));
                }
            }
        }
        Ok(())
    }

    /// Certify that the generator matrices define an action of the carried
    /// group: every edge of the left Cayley graph must be consistent. Used
    /// when instances come from external files.
    pub fn verify_action_homomorphism(&self) -> Result<()> {
        let n = self.group.order();
        let letter_elems = self.letter_elems();
        let mut mats: Vec<Option<IntMatrix>> = vec![None; n];
        mats[0] = Some(IntMatrix::identity(self.ambient));
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            for l in 0..4 {
                let h = self.group.mult(letter_elems[l], g);
                let candidate = mats[g].as_ref().unwrap().mul(&self.actions[l]);
                match &mats[h] {
                    None => {
                        mats[h] = Some(candidate);
                        queue.push_back(h);
                    }
                    Some(existing) => {
                        if existing != &candidate {
                            return Err(Error::InvalidInput(
                                "generator matrices do not satisfy the group relations".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn letter_elems(&self) -> [usize; 4] {
        let x = self.group.gen_elem(crate::words::Gen::X);
        let y = self.group.gen_elem(crate::words::Gen::Y);
        [x, y, self.group.inv(x), self.group.inv(y)]
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn action(&self, l: usize) -> &IntMatrix {
        &self.actions[l]
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        linalg::in_rowspan(&self.basis, v)
    }

    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        linalg::rowspan_coords(&self.basis, v)
    }

    pub fn contains_lattice(&self, other: &ZGLattice) -> bool {
        linalg::lattice_contains(&self.basis, &other.basis)
    }

    /// Lattice scaled by an integer.
    pub fn scaled(&self, k: &BigInt) -> ZGLattice {
        ZGLattice {
            ambient: self.ambient,
            basis: linalg::hnf_basis(&self.basis.scale(k)),
            group: self.group.clone(),
            actions: self.actions.clone(),
        }
    }

    /// Sum of two lattices in the same ambient module.
    pub fn sum(&self, other: &ZGLattice) -> ZGLattice {
        ZGLattice {
            ambient: self.ambient,
            basis: linalg::hnf_basis(&IntMatrix::stack(&self.basis, &other.basis)),
            group: self.group.clone(),
            actions: self.actions.clone(),
        }
    }

    /// The orbit `g . v` for every group element, indexed by element, built
    /// along the left Cayley tree so each element costs one letter action.
    pub fn orbit_vectors(&self, v: &[BigInt]) -> Vec<Vec<BigInt>> {
        let n = self.group.order();
        let letter_elems = self.letter_elems();
        let mut out: Vec<Option<Vec<BigInt>>> = vec![None; n];
        out[0] = Some(v.to_vec());
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            for l in 0..4 {
                let h = self.group.mult(letter_elems[l], g);
                if out[h].is_none() {
                    let w = apply_matrix(out[g].as_ref().unwrap(), &self.actions[l]);
                    out[h] = Some(w);
                    queue.push_back(h);
                }
            }
        }
        out.into_iter().map(|v| v.unwrap()).collect()
    }

    /// Action of a group-ring element on an ambient vector.
    pub fn apply_group_ring(&self, s: &GroupRingElement, v: &[BigInt]) -> Vec<BigInt> {
        let orbit = self.orbit_vectors(v);
        let mut out = vec![BigInt::zero(); self.ambient];
        for (g, c) in s.terms() {
            for (o, w) in out.iter_mut().zip(&orbit[g]) {
                *o += c * w;
            }
        }
        out
    }

    /// Generator actions expressed in basis coordinates (row convention:
    /// coordinates transform by right multiplication).
    fn coord_actions(&self) -> Result<[IntMatrix; 4]> {
        let r = self.rank();
        let mut out = Vec::with_capacity(4);
        for l in 0..4 {
            let mut m = IntMatrix::zeros(r, r);
            for (i, row) in self.basis.row_iter().enumerate() {
                let moved = apply_matrix(row, &self.actions[l]);
                let coords = self.coords(&moved).ok_or_else(|| {
                    Error::InvalidInput("lattice not stable under action".into())
                })?;
                for (j, c) in coords.into_iter().enumerate() {
                    m.set(i, j, c);
                }
            }
            out.push(m);
        }
        let mut it = out.into_iter();
        Ok([
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        ])
    }

    /// Per-element coordinate action matrices, indexed by group element.
    fn coord_element_matrices(&self) -> Result<Vec<IntMatrix>> {
        let coord = self.coord_actions()?;
        let n = self.group.order();
        let letter_elems = self.letter_elems();
        let r = self.rank();
        let mut mats: Vec<Option<IntMatrix>> = vec![None; n];
        mats[0] = Some(IntMatrix::identity(r));
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            for l in 0..4 {
                let h = self.group.mult(letter_elems[l], g);
                if mats[h].is_none() {
                    mats[h] = Some(mats[g].as_ref().unwrap().mul(&coord[l]));
                    queue.push_back(h);
                }
            }
        }
        Ok(mats.into_iter().map(|m| m.unwrap()).collect())
    }
}

impl std::fmt::Debug for ZGLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ZGLattice(ambient {}, rank {}, |G| = {})",
            self.ambient,
            self.rank(),
            self.group.order()
        )
    }
}

pub fn apply_matrix(v: &[BigInt], m: &IntMatrix) -> Vec<BigInt> {
    assert_eq!(v.len(), m.rows());
    let mut out = vec![BigInt::zero(); m.cols()];
    for (i, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for j in 0..m.cols() {
            let a = m.at(i, j);
            if !a.is_zero() {
                out[j] += c * a;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Relation modules
// ---------------------------------------------------------------------------

/// The abelianized kernel of a normal finite-index subgroup's table, living
/// in (ZG)^2 through Fox coordinates of its Schreier generators.
pub struct RelationModule {
    pub module: ZGLattice,
    pub schreier: SchreierSystem,
    /// Fox coordinate rows of the Schreier generators (gens x 2|G|).
    pub images: IntMatrix,
    /// Unimodular W with hnf(images) = W * images; converts basis
    /// coordinates into Schreier-generator coordinates.
    transform: IntMatrix,
}

impl RelationModule {
    pub fn group(&self) -> &FiniteGroup {
        self.module.group()
    }

    /// Ambient (ZG)^2 vector of the Fox coordinates of a kernel element.
    pub fn magnus_vector(&self, pw: &ProductWord) -> Result<Vec<BigInt>> {
        let group = self.group();
        let [dx, dy] = fox::magnus_image_product(pw, group)?;
        let n = group.order();
        let mut v = dx.to_vec(n);
        v.extend(dy.to_vec(n));
        Ok(v)
    }

    pub fn magnus_vector_word(&self, w: &Word) -> Result<Vec<BigInt>> {
        self.magnus_vector(&ProductWord::from_word(w.clone()))
    }

    /// Coordinates of a module element over the Schreier generators.
    pub fn gen_coords(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        let d = self
            .module
            .coords(v)
            .ok_or_else(|| Error::InvalidInput("vector outside the relation module".into()))?;
        Ok(apply_matrix(&d, &self.transform))
    }

    /// A subgroup word whose abelianized class has the given Fox
    /// coordinates: the corresponding product of Schreier generators, in
    /// generator order. Exact by additivity of Fox coordinates on the
    /// kernel; the lift is recertified before return.
    pub fn word_for(&self, v: &[BigInt]) -> Result<Word> {
        let coords = self.gen_coords(v)?;
        let mut out = Word::identity();
        for (k, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let base = if c.is_negative() {
                self.schreier.gens[k].inverse()
            } else {
                self.schreier.gens[k].clone()
            };
            let e: u64 = c
                .magnitude()
                .try_into()
                .map_err(|_| Error::InvalidInput("lift exponent overflow".into()))?;
            out = out.mul(&base.pow(e));
        }
        let back = self.magnus_vector_word(&out)?;
        if back != v {
            return Err(Error::CertificationFailed {
                check: "fox-lift",
                detail: "lifted word has wrong Fox coordinates".into(),
            });
        }
        Ok(out)
    }
}

/// Relation module of the quotient by a normal finite-index subgroup: the
/// span of the Fox coordinate rows of its Schreier generators inside
/// (ZG)^2. Its rank is index + 1.
pub fn relation_module(ct: &CosetTable) -> Result<RelationModule> {
    let group = ct.finite_group()?;
    let ss = cosets::schreier(ct);
    let n = group.order();
    let mut rows = Vec::with_capacity(ss.gens.len());
    for g in &ss.gens {
        let [dx, dy] = fox::magnus_image(g, &group)?;
        let mut v = dx.to_vec(n);
        v.extend(dy.to_vec(n));
        rows.push(v);
    }
    let images = IntMatrix::from_bigint_rows(rows, 2 * n);
    let f = linalg::hnf(&images);
    if f.rank != ss.gens.len() {
        return Err(Error::CertificationFailed {
            check: "fox-embedding-rank",
            detail: format!(
                "Fox images span rank {} instead of {}",
                f.rank,
                ss.gens.len()
            ),
        });
    }
    let ambient = ZGLattice::regular_ambient(&group, 2);
    let module = ambient.with_rows(images.clone())?;
    Ok(RelationModule {
        module,
        schreier: ss,
        images,
        transform: f.transform,
    })
}

// ---------------------------------------------------------------------------
// Submodule operations
// ---------------------------------------------------------------------------

/// The smallest G-stable lattice containing the given elements of `m`:
/// the Z-span of their G-orbits.
pub fn span_submodule(m: &ZGLattice, gens: &[Vec<BigInt>]) -> Result<ZGLattice> {
    for v in gens {
        if !m.contains(v) {
            return Err(Error::InvalidInput(
                "span generator outside the module".into(),
            ));
        }
    }
    let mut rows = Vec::new();
    for v in gens {
        rows.extend(m.orbit_vectors(v));
    }
    if rows.is_empty() {
        rows.push(vec![BigInt::zero(); m.ambient()]);
    }
    m.with_rows(IntMatrix::from_bigint_rows(rows, m.ambient()))
}

/// Invariants of the quotient M/K as a localized module; requires K <= M.
pub fn quotient_invariants(m: &ZGLattice, k: &ZGLattice, p: u64) -> Result<FGAbelian> {
    let mut rows = Vec::with_capacity(k.rank());
    for row in k.basis.row_iter() {
        let coords = m.coords(row).ok_or_else(|| {
            Error::InvalidInput("quotient by a non-submodule: K is not inside M".into())
        })?;
        rows.push(coords);
    }
    let rel = IntMatrix::from_bigint_rows(rows, m.rank());
    Ok(FGAbelian::from_relation_matrix(&rel, Locality::AtPrime(p)))
}

/// A G-stable complement: the saturated lattice V = M ∩ ker P where P is
/// the average over G of a rational projection onto QU. Guarantees
/// U ∩ V = 0 and rank U + rank V = rank M; V is nonzero whenever U has
/// infinite index in M.
pub fn equivariant_complement(m: &ZGLattice, u: &ZGLattice) -> Result<ZGLattice> {
    let r = m.rank();
    let k = u.rank();
    if k == 0 {
        return Ok(m.clone());
    }
    // U in M coordinates.
    let mut u_rows = Vec::with_capacity(k);
    for row in u.basis.row_iter() {
        let c = m
            .coords(row)
            .ok_or_else(|| Error::InvalidInput("U is not inside M".into()))?;
        u_rows.push(c);
    }
    let u_c = IntMatrix::from_bigint_rows(u_rows.clone(), r);

    // Complete the U rows to a full basis of Q^r with unit vectors.
    let mut t_rows = u_rows;
    let mut have = linalg::hnf_basis(&u_c);
    for j in 0..r {
        if t_rows.len() == r {
            break;
        }
        let mut e = vec![BigInt::zero(); r];
        e[j] = BigInt::one();
        let trial = IntMatrix::stack(&have, &IntMatrix::from_bigint_rows(vec![e.clone()], r));
        let trial_basis = linalg::hnf_basis(&trial);
        if trial_basis.rows() > have.rows() {
            have = trial_basis;
            t_rows.push(e);
        }
    }
    if t_rows.len() != r {
        return Err(Error::InvalidInput(
            "could not complete U to a basis".into(),
        ));
    }
    let t = IntMatrix::from_bigint_rows(t_rows, r);
    let (adj, _det) = linalg::scaled_inverse(&t)
        .ok_or_else(|| Error::InvalidInput("degenerate completion".into()))?;
    // Scaled projection onto the U block: adj * (T with non-U rows zeroed).
    let mut dt = IntMatrix::zeros(r, r);
    for i in 0..k {
        for j in 0..r {
            dt.set(i, j, t.at(i, j).clone());
        }
    }
    let proj0 = adj.mul(&dt);

    // Average over the group in coordinate space.
    let mats = m.coord_element_matrices()?;
    let group = m.group();
    let mut p_s = IntMatrix::zeros(r, r);
    for g in 0..group.order() {
        let term = mats[g].mul(&proj0).mul(&mats[group.inv(g)]);
        p_s = p_s.add(&term);
    }

    // Equivariance certificate: the averaged projection commutes with the
    // generator actions exactly.
    let coord = m.coord_actions()?;
    for l in [0usize, 1] {
        if coord[l].mul(&p_s) != p_s.mul(&coord[l]) {
            return Err(Error::CertificationFailed {
                check: "maschke-equivariance",
                detail: "averaged projection does not commute with the action".into(),
            });
        }
    }

    // V = saturated kernel of P restricted to M, pushed back to the ambient.
    let kernel = linalg::rational_kernel_basis(&p_s.transpose());
    let mut v_rows = Vec::with_capacity(kernel.len());
    for c in &kernel {
        v_rows.push(apply_matrix(c, &m.basis));
    }
    let v = m.with_rows(IntMatrix::from_bigint_rows(v_rows, m.ambient()))?;

    // U ∩ V = 0 and rank additivity.
    if v.rank() + k != r {
        return Err(Error::CertificationFailed {
            check: "complement-rank",
            detail: format!("rank U = {k}, rank V = {}, rank M = {r}", v.rank()),
        });
    }
    let stacked = IntMatrix::stack(&u.basis, &v.basis);
    if linalg::hnf(&stacked).rank != r {
        return Err(Error::CertificationFailed {
            check: "complement-intersection",
            detail: "U and V intersect nontrivially".into(),
        });
    }
    Ok(v)
}

/// The saturated kernel lattice of the evaluation map (ZG)^d -> M sending
/// the i-th slot generator to m_i. Coordinates are slot-major: (i, g) at
/// position i * |G| + g.
pub fn kernel_lattice(m: &ZGLattice, ms: &[Vec<BigInt>]) -> Result<ZGLattice> {
    let d = ms.len();
    let n = m.group().order();
    let mut rows = Vec::with_capacity(d * n);
    for mi in ms {
        if !m.contains(mi) {
            return Err(Error::InvalidInput("evaluation target outside M".into()));
        }
        rows.extend(m.orbit_vectors(mi));
    }
    let phi = IntMatrix::from_bigint_rows(rows, m.ambient());
    let kernel = linalg::rational_kernel_basis(&phi.transpose());
    let ambient = ZGLattice::regular_ambient(m.group(), d);
    ambient.with_rows(IntMatrix::from_bigint_rows(kernel, d * n))
}

// ---------------------------------------------------------------------------
// The perturbation construction
// ---------------------------------------------------------------------------

/// Witness for the perturbation construction: elements h_i of the
/// complement V and a kernel tuple s with `sum_i s_i . h_i = z != 0`,
/// together with the minimal j such that z lies outside p^j V.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationWitness {
    /// One ambient vector per slot; all lie in V.
    pub h: Vec<Vec<String>>,
    /// Kernel tuple, slot-major coordinates in (ZG)^d.
    pub s: Vec<String>,
    /// The nonzero product.
    pub z: Vec<String>,
    pub j: u64,
    pub p: u64,
}

impl PerturbationWitness {
    pub fn h_vectors(&self) -> Vec<Vec<BigInt>> {
        self.h.iter().map(|v| parse_vec(v)).collect()
    }

    pub fn s_vector(&self) -> Vec<BigInt> {
        parse_vec(&self.s)
    }

    pub fn z_vector(&self) -> Vec<BigInt> {
        parse_vec(&self.z)
    }
}

fn parse_vec(v: &[String]) -> Vec<BigInt> {
    v.iter()
        .map(|s| s.parse().expect("witness stores decimal integers"))
        .collect()
}

fn render_vec(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Split a slot-major kernel vector into group-ring components.
pub fn kernel_tuple_components(s: &[BigInt], d: usize, n: usize) -> Vec<GroupRingElement> {
    assert_eq!(s.len(), d * n);
    (0..d)
        .map(|i| GroupRingElement::from_vec(&s[i * n..(i + 1) * n]))
        .collect()
}

/// Search for a perturbation witness.
///
/// Hypotheses checked first: the submodule generated by `ms` has infinite
/// index in `m` (strictly smaller rank), and the rationalized module is
/// d-generated (random-evaluation certificate, three deterministic seeded
/// draws). The search ranges over basis elements of the kernel lattice,
/// slots, and basis elements of the complement; by bilinearity this search
/// is complete. Returns the lexicographically first witness.
pub fn find_perturbation(
    m: &ZGLattice,
    ms: &[Vec<BigInt>],
    p: u64,
) -> Result<PerturbationWitness> {
    let d = ms.len();
    let n = m.group().order();
    let u = span_submodule(m, ms)?;
    if u.rank() >= m.rank() {
        return Err(Error::NoWitness(format!(
            "the submodule generated by the {d} targets has finite index (rank {} = rank M)",
            u.rank()
        )));
    }
    if !is_d_generated(m, d) {
        return Err(Error::NoWitness(format!(
            "rationalized module does not appear to be {d}-generated"
        )));
    }
    let v = equivariant_complement(m, &u)?;
    if v.rank() == 0 {
        return Err(Error::NoWitness("complement is zero".into()));
    }
    let l = kernel_lattice(m, ms)?;

    for s_row in l.basis.row_iter() {
        let comps = kernel_tuple_components(s_row, d, n);
        for (slot, s_i) in comps.iter().enumerate() {
            if s_i.is_zero() {
                continue;
            }
            for v_row in v.basis.row_iter() {
                let z = m.apply_group_ring(s_i, v_row);
                if z.iter().all(|c| c.is_zero()) {
                    continue;
                }
                // z lies in V by stability; j comes from the p-valuation of
                // its V-coordinates.
                let coords = v.coords(&z).ok_or(Error::CertificationFailed {
                    check: "witness-in-complement",
                    detail: "product left the complement".into(),
                })?;
                let val = coords
                    .iter()
                    .filter_map(|c| linalg::p_valuation(c, p))
                    .min()
                    .expect("z nonzero");
                let mut h = vec![vec![BigInt::zero(); m.ambient()]; d];
                h[slot] = v_row.to_vec();
                let witness = PerturbationWitness {
                    h: h.iter().map(|w| render_vec(w)).collect(),
                    s: render_vec(s_row),
                    z: render_vec(&z),
                    j: val + 1,
                    p,
                };
                verify_witness(m, ms, &witness)?;
                return Ok(witness);
            }
        }
    }
    Err(Error::NoWitness(
        "no kernel-basis/complement-basis pair gives a nonzero product".into(),
    ))
}

/// d-generation certificate for the rationalized module: the orbit span of
/// d random small integer combinations of the basis has full rank. Three
/// deterministic draws.
fn is_d_generated(m: &ZGLattice, d: usize) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xD15C0);
    for _ in 0..3 {
        let gens: Vec<Vec<BigInt>> = (0..d)
            .map(|_| {
                let mut acc = vec![BigInt::zero(); m.ambient()];
                for row in m.basis.row_iter() {
                    let c = BigInt::from(rng.gen_range(-3i64..=3));
                    for (a, x) in acc.iter_mut().zip(row) {
                        *a += &c * x;
                    }
                }
                acc
            })
            .collect();
        if let Ok(span) = span_submodule(m, &gens) {
            if span.rank() == m.rank() {
                return true;
            }
        }
    }
    false
}

/// Exact recheck of every witness invariant.
pub fn verify_witness(m: &ZGLattice, ms: &[Vec<BigInt>], w: &PerturbationWitness) -> Result<()> {
    let d = ms.len();
    let n = m.group().order();
    let h = w.h_vectors();
    let s = w.s_vector();
    let z = w.z_vector();
    if h.len() != d || s.len() != d * n {
        return Err(Error::InvalidInput("witness shape mismatch".into()));
    }
    let fail = |detail: String| Error::CertificationFailed {
        check: "witness-invariants",
        detail,
    };
    if z.iter().all(|c| c.is_zero()) {
        return Err(fail("z = 0".into()));
    }
    let comps = kernel_tuple_components(&s, d, n);
    // sum s_i . m_i = 0 (s lies in the kernel lattice).
    let mut acc = vec![BigInt::zero(); m.ambient()];
    for (s_i, m_i) in comps.iter().zip(ms) {
        let t = m.apply_group_ring(s_i, m_i);
        for (a, x) in acc.iter_mut().zip(&t) {
            *a += x;
        }
    }
    if !acc.iter().all(|c| c.is_zero()) {
        return Err(fail("sum s_i m_i != 0".into()));
    }
    // sum s_i . h_i = z.
    let mut acc = vec![BigInt::zero(); m.ambient()];
    for (s_i, h_i) in comps.iter().zip(&h) {
        let t = m.apply_group_ring(s_i, h_i);
        for (a, x) in acc.iter_mut().zip(&t) {
            *a += x;
        }
    }
    if acc != z {
        return Err(fail("sum s_i h_i != z".into()));
    }
    // h_i in V and the j-membership facts.
    let u = span_submodule(m, ms)?;
    let v = equivariant_complement(m, &u)?;
    for h_i in &h {
        if !v.contains(h_i) {
            return Err(fail("some h_i lies outside V".into()));
        }
    }
    if !v.contains(&z) {
        return Err(fail("z outside V".into()));
    }
    let p = BigInt::from(w.p);
    if w.j == 0 {
        return Err(fail("j must be >= 1".into()));
    }
    let v_jm1 = v.scaled(&p.pow((w.j - 1) as u32));
    let v_j = v.scaled(&p.pow(w.j as u32));
    if !v_jm1.contains(&z) {
        return Err(fail(format!("z outside p^{} V", w.j - 1)));
    }
    if v_j.contains(&z) {
        return Err(fail(format!("z inside p^{} V", w.j)));
    }
    Ok(())
}

/// The perturbed submodule K_n generated by the m_i + p^n h_i, and the
/// p-torsion of M/K_n.
pub fn perturbed_submodule(
    m: &ZGLattice,
    ms: &[Vec<BigInt>],
    w: &PerturbationWitness,
    n: u64,
) -> Result<(ZGLattice, BigInt)> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "perturbation level must be >= 1".into(),
        ));
    }
    let h = w.h_vectors();
    let pn = BigInt::from(w.p).pow(n as u32);
    let gens: Vec<Vec<BigInt>> = ms
        .iter()
        .zip(&h)
        .map(|(mi, hi)| {
            mi.iter()
                .zip(hi)
                .map(|(a, b)| a + &pn * b)
                .collect::<Vec<BigInt>>()
        })
        .collect();
    let k = span_submodule(m, &gens)?;
    let t = quotient_invariants(m, &k, w.p)?.torsion();
    Ok((k, t))
}

/// Torsion table n -> t_p(M/K_n).
pub fn growth_table(
    m: &ZGLattice,
    ms: &[Vec<BigInt>],
    w: &PerturbationWitness,
    n_max: u64,
) -> Result<Vec<(u64, BigInt)>> {
    (1..=n_max)
        .map(|n| perturbed_submodule(m, ms, w, n).map(|(_, t)| (n, t)))
        .collect()
}

/// The two membership facts that drive the torsion growth bound:
/// p^n z lies in K_n, and K_n lies inside U + p^n V.
pub fn check_growth_memberships(
    m: &ZGLattice,
    ms: &[Vec<BigInt>],
    w: &PerturbationWitness,
    n: u64,
) -> Result<()> {
    let (k, _) = perturbed_submodule(m, ms, w, n)?;
    let pn = BigInt::from(w.p).pow(n as u32);
    let pnz: Vec<BigInt> = w.z_vector().iter().map(|c| c * &pn).collect();
    if !k.contains(&pnz) {
        return Err(Error::CertificationFailed {
            check: "scaled-witness-membership",
            detail: format!("p^{n} z outside K_{n}"),
        });
    }
    let u = span_submodule(m, ms)?;
    let v = equivariant_complement(m, &u)?;
    let bound = u.sum(&v.scaled(&pn));
    if !bound.contains_lattice(&k) {
        return Err(Error::CertificationFailed {
            check: "perturbed-span-bound",
            detail: format!("K_{n} not inside U + p^{n} V"),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Serialized instances
// ---------------------------------------------------------------------------

/// On-disk form of a perturbation instance: module, action, evaluation
/// targets.
#[derive(Serialize, Deserialize)]
pub struct LatticeInstance {
    pub p: u64,
    pub ambient: usize,
    pub basis: IntMatrix,
    pub action_x: IntMatrix,
    pub action_y: IntMatrix,
    pub group: FiniteGroup,
    pub targets: Vec<Vec<String>>,
}

impl LatticeInstance {
    pub fn build(&self) -> Result<(ZGLattice, Vec<Vec<BigInt>>)> {
        let lat = ZGLattice::new(
            self.ambient,
            self.basis.clone(),
            self.group.clone(),
            self.action_x.clone(),
            self.action_y.clone(),
        )?;
        lat.verify_action_homomorphism()?;
        let ms: Vec<Vec<BigInt>> = self
            .targets
            .iter()
            .map(|t| {
                t.iter()
                    .map(|s| {
                        s.parse()
                            .map_err(|_| Error::InvalidInput(format!("bad target entry {s}")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for t in &ms {
            if t.len() != self.ambient {
                return Err(Error::InvalidInput("target length mismatch".into()));
            }
        }
        Ok((lat, ms))
    }

    pub fn from_parts(p: u64, lat: &ZGLattice, ms: &[Vec<BigInt>]) -> LatticeInstance {
        LatticeInstance {
            p,
            ambient: lat.ambient(),
            basis: lat.basis().clone(),
            action_x: lat.action(0).clone(),
            action_y: lat.action(1).clone(),
            group: lat.group().clone(),
            targets: ms.iter().map(|t| render_vec(t)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::abelian_quotient_kernel_table;
    use crate::linalg::bi;

    fn c2_group() -> FiniteGroup {
        FiniteGroup::from_perms(vec![1, 0], vec![0, 1]).unwrap()
    }

    /// ZG for G = C2 as a lattice in its own regular ambient.
    fn zg_c2() -> ZGLattice {
        ZGLattice::regular_ambient(&c2_group(), 1)
    }

    #[test]
    fn trivial_group_relation_module_is_free_of_rank_two() {
        let ct = CosetTable::full_group();
        let rm = relation_module(&ct).unwrap();
        assert_eq!(rm.module.rank(), 2);
        assert_eq!(rm.module.ambient(), 2);
    }

    #[test]
    fn index_two_relation_module_rank_three() {
        let ct = abelian_quotient_kernel_table(&[2], &[0], &[1]).unwrap();
        let rm = relation_module(&ct).unwrap();
        assert_eq!(rm.module.rank(), 3);
        let v = rm.magnus_vector(&ProductWord::identity()).unwrap();
        assert!(v.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn span_examples() {
        let m = zg_c2();
        let zero = span_submodule(&m, &[]).unwrap();
        assert_eq!(zero.rank(), 0);
        let rows: Vec<Vec<BigInt>> = m.basis().row_iter().map(|r| r.to_vec()).collect();
        let full = span_submodule(&m, &rows).unwrap();
        assert_eq!(full.basis(), m.basis());
        // Orbit span of 1 + g has rank 1.
        let v = vec![bi(1), bi(1)];
        let s = span_submodule(&m, &[v]).unwrap();
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn quotient_examples() {
        let m = zg_c2();
        let q = quotient_invariants(&m, &m, 2).unwrap();
        assert!(q.is_trivial());
        let pk = m.scaled(&bi(8));
        let q = quotient_invariants(&m, &pk, 2).unwrap();
        assert_eq!(q.factors(), &[bi(8), bi(8)]);
        assert_eq!(q.torsion(), bi(64));
        // K not inside M is rejected.
        let ct = abelian_quotient_kernel_table(&[2], &[0], &[1]).unwrap();
        let rm = relation_module(&ct).unwrap();
        let sub = span_submodule(&rm.module, &[rm.module.basis().row_vec(0)]).unwrap();
        assert!(quotient_invariants(&sub, &rm.module, 2).is_err());
    }

    #[test]
    fn complement_c2_eigenlattices() {
        let m = zg_c2();
        let u = span_submodule(&m, &[vec![bi(1), bi(1)]]).unwrap();
        let v = equivariant_complement(&m, &u).unwrap();
        assert_eq!(v.rank(), 1);
        // V = span(1 - g), forced by symmetry.
        assert!(v.contains(&[bi(1), bi(-1)]));
        assert!(!v.contains(&[bi(1), bi(1)]));
        // Degenerate ends.
        let v0 = equivariant_complement(&m, &span_submodule(&m, &[]).unwrap()).unwrap();
        assert_eq!(v0.basis(), m.basis());
        let rows: Vec<Vec<BigInt>> = m.basis().row_iter().map(|r| r.to_vec()).collect();
        let vfull = equivariant_complement(&m, &span_submodule(&m, &rows).unwrap()).unwrap();
        assert_eq!(vfull.rank(), 0);
    }

    #[test]
    fn kernel_lattice_examples() {
        let m = zg_c2();
        // All targets zero: kernel is everything.
        let l = kernel_lattice(&m, &[vec![bi(0), bi(0)], vec![bi(0), bi(0)]]).unwrap();
        assert_eq!(l.rank(), 4);
        // Trivial group, one nonzero target: kernel is zero.
        let triv = ZGLattice::regular_ambient(&FiniteGroup::trivial(), 1);
        let l = kernel_lattice(&triv, &[vec![bi(2)]]).unwrap();
        assert_eq!(l.rank(), 0);
        // Kernel rows evaluate to zero exactly.
        let ms = vec![vec![bi(1), bi(1)], vec![bi(2), bi(0)]];
        let l = kernel_lattice(&m, &ms).unwrap();
        let n = m.group().order();
        for s_row in l.basis().row_iter() {
            let comps = kernel_tuple_components(s_row, 2, n);
            let mut acc = vec![BigInt::zero(); m.ambient()];
            for (s_i, m_i) in comps.iter().zip(&ms) {
                let t = m.apply_group_ring(s_i, m_i);
                for (a, x) in acc.iter_mut().zip(&t) {
                    *a += x;
                }
            }
            assert!(acc.iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn degenerate_first_step_witness() {
        // m1 = m2 = 0 in the rank-3 relation module of an index-2 subgroup.
        let ct = abelian_quotient_kernel_table(&[2], &[0], &[1]).unwrap();
        let rm = relation_module(&ct).unwrap();
        let zero = vec![bi(0); rm.module.ambient()];
        let ms = vec![zero.clone(), zero];
        let w = find_perturbation(&rm.module, &ms, 2).unwrap();
        assert_eq!(w.j, 1);
        verify_witness(&rm.module, &ms, &w).unwrap();
        // First kernel basis vector hits slot 0 with the identity.
        let h = w.h_vectors();
        assert_eq!(h[0], rm.module.basis().row_vec(0));
        assert!(h[1].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn c2_two_slot_witness() {
        // M = ZG + ZG for G = C2, m1 = (1 + g, 0), m2 = 0.
        let m = ZGLattice::regular_ambient(&c2_group(), 2);
        let m1 = vec![bi(1), bi(1), bi(0), bi(0)];
        let m2 = vec![bi(0); 4];
        let ms = vec![m1, m2];
        let w = find_perturbation(&m, &ms, 2).unwrap();
        verify_witness(&m, &ms, &w).unwrap();
        // z lies in the complement of the span of m1.
        let u = span_submodule(&m, &ms).unwrap();
        let v = equivariant_complement(&m, &u).unwrap();
        assert!(v.contains(&w.z_vector()));
    }

    #[test]
    fn growth_bound_small_instance() {
        let ct = abelian_quotient_kernel_table(&[2], &[0], &[1]).unwrap();
        let rm = relation_module(&ct).unwrap();
        let zero = vec![bi(0); rm.module.ambient()];
        let ms = vec![zero.clone(), zero];
        let w = find_perturbation(&rm.module, &ms, 2).unwrap();
        for c in 1..=3u64 {
            let n = w.j + c + 1;
            let (_, t) = perturbed_submodule(&rm.module, &ms, &w, n).unwrap();
            assert!(t >= bi(2).pow(c as u32), "n = {n}: t = {t} < 2^{c}");
            check_growth_memberships(&rm.module, &ms, &w, n).unwrap();
        }
    }

    #[test]
    fn quotient_torsion_matches_brute_force() {
        // |G| <= 2, small rank: enumerate the finite quotient group and
        // count elements of p-power order directly.
        let m = zg_c2();
        let ms = vec![vec![bi(2), bi(2)]]; // 2(1 + g), orbit span of rank 1
        let w = find_perturbation(&m, &ms, 2).unwrap();
        for n in 1..=3u64 {
            let (k, t) = perturbed_submodule(&m, &ms, &w, n).unwrap();
            assert_eq!(t, brute_force_p_torsion(&m, &k, 2));
        }
    }

    /// Exhaustive p-torsion of M/K for finite-index K: walk all residues.
    fn brute_force_p_torsion(m: &ZGLattice, k: &ZGLattice, p: u64) -> BigInt {
        use num_integer::Integer;
        use num_traits::ToPrimitive;
        let rel_rows: Vec<Vec<BigInt>> = k
            .basis()
            .row_iter()
            .map(|r| m.coords(r).expect("K inside M"))
            .collect();
        let r = m.rank();
        let rel = linalg::hnf_basis(&IntMatrix::from_bigint_rows(rel_rows, r));
        assert_eq!(rel.rows(), r, "finite quotient expected");
        let diag: Vec<u64> = (0..r).map(|i| rel.at(i, i).to_u64().unwrap()).collect();
        // Reduce in ascending pivot order: each row only touches columns at
        // or after its pivot.
        let reduce = |v: &mut Vec<BigInt>| {
            for i in 0..r {
                let q = v[i].div_floor(rel.at(i, i));
                if !q.is_zero() {
                    for c in 0..r {
                        let t = &v[c] - &q * rel.at(i, c);
                        v[c] = t;
                    }
                }
            }
        };
        let mut count = BigInt::zero();
        let total: u64 = diag.iter().product();
        let exp: u64 = diag.iter().fold(1u64, |acc, &d| acc.lcm(&d));
        let ppow = linalg::p_part(&bi(exp as i64), p).unwrap();
        for idx in 0..total {
            let mut rem = idx;
            let mut v: Vec<BigInt> = Vec::with_capacity(r);
            for &d in &diag {
                v.push(bi((rem % d) as i64));
                rem /= d;
            }
            // v + K has p-power order iff the p-part of the exponent kills
            // it.
            let mut w: Vec<BigInt> = v.iter().map(|c| c * &ppow).collect();
            reduce(&mut w);
            if w.iter().all(|c| c.is_zero()) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn instance_serde_roundtrip() {
        let m = zg_c2();
        let ms = vec![vec![bi(2), bi(0)]];
        let inst = LatticeInstance::from_parts(2, &m, &ms);
        let text = serde_json::to_string(&inst).unwrap();
        let back: LatticeInstance = serde_json::from_str(&text).unwrap();
        let (lat, targets) = back.build().unwrap();
        assert_eq!(lat.basis(), m.basis());
        assert_eq!(targets, ms);
    }

    #[test]
    fn lift_word_for_module_element() {
        let ct = abelian_quotient_kernel_table(&[2], &[0], &[1]).unwrap();
        let rm = relation_module(&ct).unwrap();
        // Lift a mixed combination of Schreier generators.
        let target: Vec<BigInt> = {
            let b0 = rm.module.basis().row_vec(0);
            let b1 = rm.module.basis().row_vec(1);
            b0.iter().zip(&b1).map(|(a, b)| a * bi(2) - b).collect()
        };
        let w = rm.word_for(&target).unwrap();
        assert_eq!(rm.magnus_vector_word(&w).unwrap(), target);
        // Zero lifts to the identity.
        let zero = vec![bi(0); rm.module.ambient()];
        assert!(rm.word_for(&zero).unwrap().is_identity());
    }
}
