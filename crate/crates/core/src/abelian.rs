//! Finitely generated abelian groups and their torsion functionals.
//!
//! Modules over the integers localized at a prime stand in exactly for
//! finitely generated pro-p modules: every statement checked here is
//! determined by invariant factors and free rank, so the canonical form is
//! the whole representation. Isomorphism is equality of canonical data.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Locality {
    /// Module over the integers.
    Global,
    /// Module over the integers localized at p; all invariant factors are
    /// powers of p.
    AtPrime(u64),
}

/// Canonical form of a finitely generated abelian group (or localized
/// module): divisibility chain of invariant factors plus free rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FGAbelian {
    locality: Locality,
    free_rank: usize,
    /// Each factor is >= 2 and divides the next.
    factors: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct FGAbelianRepr {
    locality: Locality,
    free_rank: usize,
    factors: Vec<String>,
}

impl Serialize for FGAbelian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FGAbelianRepr {
            locality: self.locality,
            free_rank: self.free_rank,
            factors: self.factors.iter().map(|f| f.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FGAbelian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FGAbelianRepr::deserialize(d)?;
        let mut factors = Vec::with_capacity(r.factors.len());
        for f in &r.factors {
            factors.push(
                f.parse()
                    .map_err(|_| serde::de::Error::custom("bad invariant factor"))?,
            );
        }
        FGAbelian::new(r.locality, r.free_rank, factors).map_err(serde::de::Error::custom)
    }
}

impl FGAbelian {
    pub fn new(locality: Locality, free_rank: usize, factors: Vec<BigInt>) -> Result<Self> {
        for w in factors.windows(2) {
            if !w[1].mod_floor(&w[0]).is_zero() {
                return Err(Error::InvalidInput(format!(
                    "invariant factors not a divisibility chain: {} does not divide {}",
                    w[0], w[1]
                )));
            }
        }
        for f in &factors {
            if f < &BigInt::from(2) {
                return Err(Error::InvalidInput(format!("invariant factor {f} < 2")));
            }
            if let Locality::AtPrime(p) = locality {
                if linalg::p_part(f, p)? != *f {
                    return Err(Error::InvalidInput(format!(
                        "factor {f} is not a power of {p} in a localized module"
                    )));
                }
            }
        }
        Ok(FGAbelian {
            locality,
            free_rank,
            factors,
        })
    }

    pub fn trivial(locality: Locality) -> Self {
        FGAbelian {
            locality,
            free_rank: 0,
            factors: Vec::new(),
        }
    }

    pub fn free(locality: Locality, rank: usize) -> Self {
        FGAbelian {
            locality,
            free_rank: rank,
            factors: Vec::new(),
        }
    }

    /// Cokernel of a relation matrix (generators = columns, relations =
    /// rows), in canonical form. In localized mode every invariant factor is
    /// replaced by its p-part and trivial factors are dropped.
    pub fn from_relation_matrix(a: &IntMatrix, locality: Locality) -> Self {
        let s = linalg::snf(a);
        let free_rank = a.cols() - s.rank;
        let mut factors: Vec<BigInt> = Vec::new();
        for f in &s.invariant_factors {
            let f = match locality {
                Locality::Global => f.clone(),
                Locality::AtPrime(p) => linalg::p_part(f, p).expect("positive factor"),
            };
            if !f.is_one() {
                factors.push(f);
            }
        }
        FGAbelian {
            locality,
            free_rank,
            factors,
        }
    }

    pub fn locality(&self) -> Locality {
        self.locality
    }

    pub fn factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    /// Torsion-free rank; for p-adic analytic abelian groups this is the
    /// analytic dimension.
    pub fn dim(&self) -> usize {
        self.free_rank
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Size of the torsion subgroup.
    pub fn torsion(&self) -> BigInt {
        self.factors.iter().product::<BigInt>().max(BigInt::one())
    }

    /// p-part of the torsion.
    pub fn p_torsion(&self, p: u64) -> BigInt {
        linalg::p_part(&self.torsion(), p).expect("torsion is positive")
    }

    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank == 0 {
            Some(self.torsion())
        } else {
            None
        }
    }

    /// The quotient A/nA in canonical form. Rejects n = 0.
    pub fn exponent_quotient(&self, n: &BigInt) -> Result<FGAbelian> {
        if n.is_zero() {
            return Err(Error::InvalidInput("exponent quotient by zero".into()));
        }
        let n = match self.locality {
            Locality::Global => n.abs(),
            Locality::AtPrime(p) => linalg::p_part(n, p)?,
        };
        let mut factors = Vec::new();
        for f in &self.factors {
            let g = f.gcd(&n);
            if !g.is_one() {
                factors.push(g);
            }
        }
        if !n.is_one() {
            for _ in 0..self.free_rank {
                factors.push(n.clone());
            }
        }
        FGAbelian::new(self.locality, 0, factors)
    }

    pub fn direct_sum(&self, other: &FGAbelian) -> Result<FGAbelian> {
        if self.locality != other.locality {
            return Err(Error::InvalidInput("direct sum across localities".into()));
        }
        let n = self.factors.len() + other.factors.len();
        let mut rel = IntMatrix::zeros(n, n + self.free_rank + other.free_rank);
        for (i, f) in self.factors.iter().chain(&other.factors).enumerate() {
            rel.set(i, i, f.clone());
        }
        Ok(FGAbelian::from_relation_matrix(&rel, self.locality))
    }
}

impl fmt::Display for FGAbelian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        for d in &self.factors {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" x "))
    }
}

/// A growth target given by a finite table, extended linearly past the last
/// key (value grows by 1 per step). Below the first key the first value is
/// used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthFunction {
    table: BTreeMap<u64, u64>,
}

impl GrowthFunction {
    pub fn new(table: BTreeMap<u64, u64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidInput("empty growth table".into()));
        }
        Ok(GrowthFunction { table })
    }

    /// f(n) = n + c for every n.
    pub fn linear_offset(c: u64) -> Self {
        let mut table = BTreeMap::new();
        table.insert(1, 1 + c);
        GrowthFunction { table }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, u64> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad growth table: {e}")))?;
        let mut table = BTreeMap::new();
        for (k, v) in raw {
            let k: u64 = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad growth key {k:?}")))?;
            table.insert(k, v);
        }
        GrowthFunction::new(table)
    }

    pub fn eval(&self, n: u64) -> u64 {
        match self.table.range(..=n).next_back() {
            Some((&k, &v)) => v + (n - k),
            None => *self.table.values().next().expect("nonempty table"),
        }
    }

    pub fn table(&self) -> &BTreeMap<u64, u64> {
        &self.table
    }
}

pub mod suites {
    //! Exhaustive verification suites over bounded families.

    use super::*;

    /// Outcome of an exhaustive check: how many hypothesis instances were
    /// tested and which (if any) violated the asserted conclusion.
    #[derive(Clone, Debug, Serialize, Deserialize)]
    pub struct SuiteReport {
        pub name: String,
        pub family_size: u64,
        pub checked: u64,
        pub violations: Vec<String>,
    }

    impl SuiteReport {
        pub fn passed(&self) -> bool {
            self.violations.is_empty()
        }
    }

    /// Which part of the torsion-recovery statement to verify: recovery of a
    /// torsion lower bound from an isomorphism of bounded-exponent
    /// quotients.
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum RecoveryPart {
        /// Localized modules, quotients by p^n with n > log_p t(A).
        Localized,
        /// Integral groups, quotients by n = t(A) * m with m > 1.
        Integral,
    }

    /// Enumerate all modules with free rank <= max_rank and at most two
    /// invariant factors p^e, e <= max_exp.
    pub fn bounded_family(p: u64, max_rank: usize, max_exp: u32, locality: Locality) -> Vec<FGAbelian> {
        let mut out = Vec::new();
        let pow = |e: u32| BigInt::from(p).pow(e);
        for rank in 0..=max_rank {
            let mut torsion_shapes: Vec<Vec<BigInt>> = vec![vec![]];
            for e in 1..=max_exp {
                torsion_shapes.push(vec![pow(e)]);
            }
            for e1 in 1..=max_exp {
                for e2 in e1..=max_exp {
                    torsion_shapes.push(vec![pow(e1), pow(e2)]);
                }
            }
            for shape in torsion_shapes {
                out.push(FGAbelian::new(locality, rank, shape).expect("valid chain"));
            }
        }
        out
    }

    /// For every pair (A, B) in the bounded family whose bounded-exponent
    /// quotients agree under the stated hypotheses, assert t(B) >= t(A).
    pub fn torsion_recovery_suite(
        part: RecoveryPart,
        p: u64,
        max_rank: usize,
        max_exp: u32,
    ) -> SuiteReport {
        let locality = match part {
            RecoveryPart::Localized => Locality::AtPrime(p),
            RecoveryPart::Integral => Locality::Global,
        };
        let family = bounded_family(p, max_rank, max_exp, locality);
        let mut checked = 0u64;
        let mut violations = Vec::new();
        for a in &family {
            let t_a = a.torsion();
            let exponents: Vec<BigInt> = match part {
                RecoveryPart::Localized => {
                    // n > k where t(A) = p^k; quotient exponent p^n. Values of
                    // n beyond max_exp + 1 give the same quotients as
                    // n = max_exp + 1 on this family.
                    let k = linalg::p_valuation(&t_a, p).expect("positive") as u32;
                    (k + 1..=max_exp + 2)
                        .map(|n| BigInt::from(p).pow(n))
                        .collect()
                }
                RecoveryPart::Integral => {
                    // n = t(A) * m with m > 1.
                    [2u64, 3]
                        .iter()
                        .map(|&m| &t_a * BigInt::from(m))
                        .collect()
                }
            };
            for n in &exponents {
                let a_n = a.exponent_quotient(n).expect("n positive");
                for b in &family {
                    if b.exponent_quotient(n).expect("n positive") == a_n {
                        checked += 1;
                        if b.torsion() < t_a {
                            violations.push(format!(
                                "A = {a}, B = {b}, n = {n}: t(B) = {} < t(A) = {}",
                                b.torsion(),
                                t_a
                            ));
                        }
                    }
                }
            }
        }
        SuiteReport {
            name: format!("torsion-recovery-{part:?}-p{p}"),
            family_size: family.len() as u64,
            checked,
            violations,
        }
    }

    /// Enumerate all full-rank superlattices of `diag(factors) + free` with
    /// index at most `max_index`, i.e. all finite-index subgroups of the
    /// group presented by that relation lattice.
    fn superlattices(factors: &[BigInt], free_rank: usize, max_index: u64) -> Vec<IntMatrix> {
        let r = factors.len() + free_rank;
        if r == 0 {
            return vec![IntMatrix::zeros(0, 0)];
        }
        let pivot_choices: Vec<Vec<BigInt>> = (0..r)
            .map(|i| {
                if i < factors.len() {
                    divisors(&factors[i])
                } else {
                    (1..=max_index).map(BigInt::from).collect()
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut h = IntMatrix::zeros(r, r);
        fn rec(
            col: usize,
            r: usize,
            max_index: &BigInt,
            index_so_far: &BigInt,
            pivot_choices: &[Vec<BigInt>],
            h: &mut IntMatrix,
            out: &mut Vec<IntMatrix>,
        ) {
            if col == r {
                out.push(h.clone());
                return;
            }
            for pivot in &pivot_choices[col] {
                let index = index_so_far * pivot;
                if &index > max_index {
                    continue;
                }
                h.set(col, col, pivot.clone());
                // Entries above the pivot range over [0, pivot).
                let mut above = vec![BigInt::zero(); col];
                'odometer: loop {
                    for (i, v) in above.iter().enumerate() {
                        h.set(i, col, v.clone());
                    }
                    rec(col + 1, r, max_index, &index, pivot_choices, h, out);
                    let mut k = 0;
                    loop {
                        if k == col {
                            break 'odometer;
                        }
                        above[k] += 1;
                        if &above[k] < pivot {
                            break;
                        }
                        above[k] = BigInt::zero();
                        k += 1;
                    }
                }
                for i in 0..col {
                    h.set(i, col, BigInt::zero());
                }
            }
            h.set(col, col, BigInt::zero());
        }
        rec(
            0,
            r,
            &BigInt::from(max_index),
            &BigInt::one(),
            &pivot_choices,
            &mut h,
            &mut out,
        );
        out
    }

    fn divisors(n: &BigInt) -> Vec<BigInt> {
        let mut out = Vec::new();
        let mut d = BigInt::one();
        while &d * &d <= *n {
            if n.mod_floor(&d).is_zero() {
                out.push(d.clone());
                let q = n / &d;
                if q != d {
                    out.push(q);
                }
            }
            d += 1;
        }
        out.sort();
        out
    }

    /// All invariant-factor chains with product <= max_order.
    pub fn finite_abelian_groups(max_order: u64) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![]];
        fn rec(chain: &mut Vec<BigInt>, product: &BigInt, max: &BigInt, out: &mut Vec<Vec<BigInt>>) {
            let start = chain.last().cloned().unwrap_or_else(|| BigInt::from(2));
            let mut d = start;
            while product * &d <= *max {
                if chain.last().map_or(true, |l| d.mod_floor(l).is_zero()) {
                    chain.push(d.clone());
                    out.push(chain.clone());
                    let np = product * &d;
                    rec(chain, &np, max, out);
                    chain.pop();
                }
                d += 1;
            }
        }
        let mut chain = Vec::new();
        rec(&mut chain, &BigInt::one(), &BigInt::from(max_order), &mut out);
        out
    }

    /// For every abelian group A of order <= max_order and every subgroup B
    /// (enumerated as a superlattice of A's relation lattice), assert
    /// t(A) <= t(B) |A:B|.
    pub fn index_torsion_suite(max_order: u64) -> SuiteReport {
        let mut checked = 0u64;
        let mut family_size = 0u64;
        let mut violations = Vec::new();
        for chain in finite_abelian_groups(max_order) {
            family_size += 1;
            check_subgroups_of(&chain, 0, max_order, &mut checked, &mut violations);
        }
        SuiteReport {
            name: format!("index-torsion-bound-order-{max_order}"),
            family_size,
            checked,
            violations,
        }
    }

    /// Same inequality on groups with a free summand, exercised with small
    /// bounds (the infinite-A case of the statement).
    pub fn index_torsion_suite_with_free_part(
        max_order: u64,
        free_rank: usize,
        max_index: u64,
    ) -> SuiteReport {
        let mut checked = 0u64;
        let mut family_size = 0u64;
        let mut violations = Vec::new();
        for chain in finite_abelian_groups(max_order) {
            family_size += 1;
            check_subgroups_of(&chain, free_rank, max_index, &mut checked, &mut violations);
        }
        SuiteReport {
            name: format!("index-torsion-bound-free{free_rank}-order-{max_order}"),
            family_size,
            checked,
            violations,
        }
    }

    fn check_subgroups_of(
        chain: &[BigInt],
        free_rank: usize,
        max_index: u64,
        checked: &mut u64,
        violations: &mut Vec<String>,
    ) {
        let r = chain.len() + free_rank;
        let mut rel = IntMatrix::zeros(chain.len(), r);
        for (i, f) in chain.iter().enumerate() {
            rel.set(i, i, f.clone());
        }
        let a = FGAbelian::from_relation_matrix(&rel, Locality::Global);
        let t_a = a.torsion();
        for sup in superlattices(chain, free_rank, max_index) {
            // Containment: every relation row must lie in the superlattice.
            if !(0..rel.rows()).all(|i| linalg::in_rowspan(&sup, rel.row(i))) {
                continue;
            }
            // B = sup / rel, computed by rewriting the relation rows in the
            // superlattice basis.
            let rel_in_b: Vec<Vec<BigInt>> = (0..rel.rows())
                .map(|i| linalg::rowspan_coords(&sup, rel.row(i)).expect("checked"))
                .collect();
            let b = FGAbelian::from_relation_matrix(
                &IntMatrix::from_bigint_rows(rel_in_b, r),
                Locality::Global,
            );
            let index: BigInt = (0..r).map(|i| sup.at(i, i).clone()).product();
            *checked += 1;
            if t_a > b.torsion() * &index {
                violations.push(format!(
                    "A = {a}, B = {b}, index {index}: {} > {} * {index}",
                    t_a,
                    b.torsion()
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::suites::*;
    use super::*;
    use crate::linalg::bi;

    #[test]
    fn from_relation_matrix_examples() {
        let a = FGAbelian::from_relation_matrix(
            &IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]),
            Locality::Global,
        );
        assert_eq!(a.factors(), &[bi(6)]);
        assert_eq!(a.free_rank(), 0);

        let b = FGAbelian::from_relation_matrix(
            &IntMatrix::from_rows(&[vec![12]]),
            Locality::AtPrime(2),
        );
        assert_eq!(b.factors(), &[bi(4)]);

        let c = FGAbelian::from_relation_matrix(
            &IntMatrix::from_rows(&[vec![0, 0]]),
            Locality::Global,
        );
        assert!(c.factors().is_empty());
        assert_eq!(c.free_rank(), 2);
    }

    #[test]
    fn torsion_examples() {
        let a = FGAbelian::new(Locality::AtPrime(2), 1, vec![bi(2), bi(4)]).unwrap();
        assert_eq!(a.torsion(), bi(8));
        assert_eq!(a.p_torsion(2), bi(8));

        let b = FGAbelian::new(Locality::Global, 0, vec![bi(6)]).unwrap();
        assert_eq!(b.torsion(), bi(6));
        assert_eq!(b.p_torsion(3), bi(3));

        let c = FGAbelian::free(Locality::Global, 5);
        assert_eq!(c.torsion(), bi(1));
    }

    #[test]
    fn exponent_quotient_examples() {
        // (Z + Z/2)[4] = Z/4 + Z/2
        let a = FGAbelian::new(Locality::Global, 1, vec![bi(2)]).unwrap();
        let q = a.exponent_quotient(&bi(4)).unwrap();
        assert_eq!(q, FGAbelian::new(Locality::Global, 0, vec![bi(2), bi(4)]).unwrap());

        // Localized: (Z/p + free rank 1)[p^2] = Z/p + Z/p^2 at p = 3
        let a = FGAbelian::new(Locality::AtPrime(3), 1, vec![bi(3)]).unwrap();
        let q = a.exponent_quotient(&bi(9)).unwrap();
        assert_eq!(
            q,
            FGAbelian::new(Locality::AtPrime(3), 0, vec![bi(3), bi(9)]).unwrap()
        );

        // Quotient by 1 is trivial.
        assert!(a.exponent_quotient(&bi(1)).unwrap().is_trivial());
        assert!(a.exponent_quotient(&bi(0)).is_err());
    }

    #[test]
    fn canonicalization_idempotent() {
        let shapes = bounded_family(2, 2, 3, Locality::Global);
        for a in shapes {
            let n = a.factors().len();
            let mut rel = IntMatrix::zeros(n, n + a.free_rank());
            for (i, f) in a.factors().iter().enumerate() {
                rel.set(i, i, f.clone());
            }
            assert_eq!(FGAbelian::from_relation_matrix(&rel, a.locality()), a);
        }
    }

    #[test]
    fn quotient_agrees_with_stacked_relations() {
        // t(A/nA) and |A/nA| computed through exponent_quotient match the
        // cokernel of [relations; n * identity].
        for (factors, rank, n) in [
            (vec![2i64, 4], 1usize, 4i64),
            (vec![6], 0, 9),
            (vec![], 2, 5),
            (vec![3, 9], 1, 6),
        ] {
            let k = factors.len();
            let cols = k + rank;
            let mut rel = IntMatrix::zeros(k, cols);
            for (i, f) in factors.iter().enumerate() {
                rel.set(i, i, bi(*f));
            }
            let a = FGAbelian::from_relation_matrix(&rel, Locality::Global);
            let q1 = a.exponent_quotient(&bi(n)).unwrap();
            let stacked =
                IntMatrix::stack(&rel, &IntMatrix::identity(cols).scale(&bi(n)));
            let q2 = FGAbelian::from_relation_matrix(&stacked, Locality::Global);
            assert_eq!(q1, q2, "factors {factors:?} rank {rank} n {n}");
        }
    }

    #[test]
    fn dim_additivity_on_split_extensions() {
        let fam = bounded_family(2, 2, 2, Locality::Global);
        for a in &fam {
            for b in &fam {
                let s = a.direct_sum(b).unwrap();
                assert_eq!(s.dim(), a.dim() + b.dim());
            }
        }
    }

    #[test]
    fn growth_function_eval() {
        let f = GrowthFunction::from_json(r#"{"1": 2, "2": 3}"#).unwrap();
        assert_eq!(f.eval(1), 2);
        assert_eq!(f.eval(2), 3);
        assert_eq!(f.eval(5), 6); // linear extension
        assert_eq!(f.eval(0), 2); // below the table: first value
        assert!(GrowthFunction::from_json("{}").is_err());
    }

    #[test]
    fn recovery_small_bounds() {
        for part in [RecoveryPart::Localized, RecoveryPart::Integral] {
            let r = torsion_recovery_suite(part, 2, 1, 2);
            assert!(r.passed(), "{:?}", r.violations);
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn recovery_boundary_not_asserted() {
        // n = k is outside the hypotheses: Z/2 and the trivial group have
        // the same quotient by p^k = 2 exponent... the suite must not have
        // used n <= k anywhere, which recovery_small_bounds already
        // witnesses by passing. Here we spot-check the counterexample shape:
        let a = FGAbelian::new(Locality::AtPrime(2), 0, vec![bi(2)]).unwrap();
        let b = FGAbelian::new(Locality::AtPrime(2), 1, vec![]).unwrap();
        // A[2] = Z/2 = B[2] but t(B) = 1 < 2 = t(A): only permitted because
        // n = 1 = k violates n > k.
        assert_eq!(
            a.exponent_quotient(&bi(2)).unwrap(),
            b.exponent_quotient(&bi(2)).unwrap()
        );
        assert!(b.torsion() < a.torsion());
    }

    #[test]
    fn index_bound_small() {
        let r = index_torsion_suite(16);
        assert!(r.passed(), "{:?}", r.violations);
        // Z/4 has subgroups of index 1, 2, 4: three pairs checked at least.
        assert!(r.checked >= 3);
    }

    #[test]
    fn index_bound_with_free_part_small() {
        let r = index_torsion_suite_with_free_part(8, 1, 8);
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.checked > 0);
    }

    #[test]
    fn subgroup_count_of_elementary_abelian() {
        // Independent count: the subgroup lattice of (Z/2)^6 has
        // sum_k binom[6,k]_2 = 1 + 63 + 651 + 1395 + 651 + 63 + 1 = 2825
        // members (Gaussian binomials, computed separately). The suite's
        // checked counter over exactly this one group must agree.
        let before = index_torsion_suite(1).checked; // only the trivial group
        assert_eq!(before, 1);
        let mut checked = 0u64;
        // Run the internal path through the public suite on max_order = 64
        // and count only the (Z/2)^6 contribution by difference is brittle;
        // instead, recount naively: upper triangular 0/1-above matrices with
        // pivots in {1,2} containing 2I.
        let r = 6usize;
        let mut rel = IntMatrix::zeros(r, r);
        for i in 0..r {
            rel.set(i, i, bi(2));
        }
        let mut stack: Vec<(usize, IntMatrix)> = vec![(0, IntMatrix::zeros(r, r))];
        while let Some((col, m)) = stack.pop() {
            if col == r {
                if (0..r).all(|i| linalg::in_rowspan(&m, rel.row(i))) {
                    checked += 1;
                }
                continue;
            }
            for pivot in [1i64, 2] {
                let masks = if pivot == 2 { 1usize << col } else { 1 };
                for mask in 0..masks {
                    let mut next = m.clone();
                    next.set(col, col, bi(pivot));
                    for i in 0..col {
                        next.set(i, col, bi(((mask >> i) & 1) as i64));
                    }
                    stack.push((col + 1, next));
                }
            }
        }
        assert_eq!(checked, 2825);
    }
}
