//! Exact integer matrix algebra.
//!
//! Dense matrices over arbitrary-precision integers, with row Hermite normal
//! form, Smith normal form (both with unimodular transforms), saturated
//! rational kernels and p-part extraction. Everything here is exact; no
//! floating point is used anywhere in the crate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shorthand used pervasively in tests and small constructions.
pub fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Dense matrix of exact integers, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&v| bi(v)).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_bigint_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let r = rows.len();
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        IntMatrix {
            rows: r,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vec(&self, r: usize) -> Vec<BigInt> {
        self.row(r).to_vec()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[BigInt]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.at(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.at(k, c);
                    if !b.is_zero() {
                        let cur = out.at(r, c) + a * b;
                        out.set(r, c, cur);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= k;
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        out
    }

    pub fn stack(top: &IntMatrix, bottom: &IntMatrix) -> IntMatrix {
        assert_eq!(top.cols, bottom.cols, "column mismatch");
        let mut data = top.data.clone();
        data.extend(bottom.data.iter().cloned());
        IntMatrix {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -self.at(r, c).clone();
            self.set(r, c, v);
        }
    }

    /// row[dst] += k * row[src]
    pub fn row_axpy(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = self.at(dst, c) + k * self.at(src, c);
            self.set(dst, c, v);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    pub fn negate_col(&mut self, c: usize) {
        for r in 0..self.rows {
            let v = -self.at(r, c).clone();
            self.set(r, c, v);
        }
    }

    /// col[dst] += k * col[src]
    pub fn col_axpy(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = self.at(r, dst) + k * self.at(r, src);
            self.set(r, dst, v);
        }
    }

    /// Fraction-free Bareiss determinant. Square matrices only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                let swap = (k + 1..n).find(|&r| !m.at(r, k).is_zero());
                match swap {
                    Some(r) => {
                        m.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j)).div_floor(&prev);
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.at(k, k).clone();
        }
        sign * m.at(n - 1, n - 1).clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }

    /// Integer inverse for unimodular matrices.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let h = hnf(self);
        if h.rank != self.rows {
            return None;
        }
        // U * A = H with H upper triangular; A^{-1} = H^{-1} * U, which is
        // integral exactly when det = +-1 (then H has unit diagonal up to
        // the reduction performed by hnf, i.e. H = I).
        if h.h != IntMatrix::identity(self.rows) {
            return None;
        }
        Some(h.transform)
    }

    pub fn rank(&self) -> usize {
        hnf(self).rank
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

// Entries are serialized as decimal strings: JSON numbers cannot carry
// arbitrary-precision integers safely.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<Vec<String>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: (0..self.rows)
                .map(|r| self.row(r).iter().map(|v| v.to_string()).collect())
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        let mut rows = Vec::with_capacity(repr.rows);
        for row in &repr.data {
            if row.len() != repr.cols {
                return Err(serde::de::Error::custom("ragged matrix rows"));
            }
            let mut out = Vec::with_capacity(repr.cols);
            for v in row {
                let parsed: BigInt = v
                    .parse()
                    .map_err(|_| serde::de::Error::custom("bad integer entry"))?;
                out.push(parsed);
            }
            rows.push(out);
        }
        if rows.len() != repr.rows {
            return Err(serde::de::Error::custom("row count mismatch"));
        }
        Ok(IntMatrix::from_bigint_rows(rows, repr.cols))
    }
}

/// Row Hermite normal form `transform * A = h`.
///
/// `h` is in upper echelon shape with positive pivots and entries above each
/// pivot reduced into `[0, pivot)`; `transform` is unimodular.
pub struct HermiteForm {
    pub h: IntMatrix,
    pub transform: IntMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

pub fn hnf(a: &IntMatrix) -> HermiteForm {
    let (m, n) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut r = 0usize;
    let mut pivots = Vec::new();
    for c in 0..n {
        if r == m {
            break;
        }
        // Euclid in column c among rows r..: repeatedly reduce by the entry
        // of minimal absolute value.
        loop {
            let mut piv: Option<usize> = None;
            for i in r..m {
                if h.at(i, c).is_zero() {
                    continue;
                }
                piv = match piv {
                    None => Some(i),
                    Some(p) if h.at(i, c).abs() < h.at(p, c).abs() => Some(i),
                    keep => keep,
                };
            }
            let Some(p) = piv else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..m {
                if h.at(i, c).is_zero() {
                    continue;
                }
                let q = h.at(i, c).div_floor(h.at(r, c));
                h.row_axpy(i, r, &-q.clone());
                u.row_axpy(i, r, &-q);
                if !h.at(i, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.at(r, c).is_zero() {
            continue;
        }
        if h.at(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = h.at(i, c).div_floor(h.at(r, c));
            if !q.is_zero() {
                h.row_axpy(i, r, &-q.clone());
                u.row_axpy(i, r, &-q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    HermiteForm {
        h,
        transform: u,
        rank: r,
        pivots,
    }
}

/// Canonical basis (HNF nonzero rows) of the row lattice of `a`.
pub fn hnf_basis(a: &IntMatrix) -> IntMatrix {
    let f = hnf(a);
    let rows: Vec<Vec<BigInt>> = (0..f.rank).map(|r| f.h.row_vec(r)).collect();
    IntMatrix::from_bigint_rows(rows, a.cols())
}

fn pivot_cols(basis: &IntMatrix) -> Vec<usize> {
    (0..basis.rows())
        .map(|r| {
            (0..basis.cols())
                .find(|&c| !basis.at(r, c).is_zero())
                .expect("zero row in lattice basis")
        })
        .collect()
}

/// Coordinates of `v` in the rows of an HNF basis, or None if `v` is not in
/// the row lattice.
pub fn rowspan_coords(basis: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(basis.cols(), v.len());
    let pivots = pivot_cols(basis);
    let mut rem = v.to_vec();
    let mut coords = vec![BigInt::zero(); basis.rows()];
    for (r, &pc) in pivots.iter().enumerate() {
        for c in 0..pc {
            if !rem[c].is_zero() {
                return None;
            }
        }
        let (q, rest) = rem[pc].div_rem(basis.at(r, pc));
        if !rest.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for c in pc..rem.len() {
                rem[c] = &rem[c] - &q * basis.at(r, c);
            }
        }
        coords[r] = q;
    }
    if rem.iter().all(|x| x.is_zero()) {
        Some(coords)
    } else {
        None
    }
}

pub fn in_rowspan(basis: &IntMatrix, v: &[BigInt]) -> bool {
    rowspan_coords(basis, v).is_some()
}

/// All rows of `sub` lie in the row lattice of `basis` (both HNF bases).
pub fn lattice_contains(basis: &IntMatrix, sub: &IntMatrix) -> bool {
    sub.row_iter().all(|row| in_rowspan(basis, row))
}

/// Intersection of two row lattices in the same ambient space.
pub fn lattice_intersection(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    assert_eq!(a.cols(), b.cols());
    if a.rows() == 0 || b.rows() == 0 {
        return IntMatrix::zeros(0, a.cols());
    }
    // (u, v) with u*A = v*B spans the intersection through u*A.
    let stacked = IntMatrix::stack(a, b);
    let kernel = rational_kernel_basis(&stacked.transpose());
    let mut rows = Vec::new();
    for k in kernel {
        let mut w = vec![BigInt::zero(); a.cols()];
        for (i, coef) in k.iter().take(a.rows()).enumerate() {
            if coef.is_zero() {
                continue;
            }
            for c in 0..a.cols() {
                w[c] = &w[c] + coef * a.at(i, c);
            }
        }
        rows.push(w);
    }
    hnf_basis(&IntMatrix::from_bigint_rows(rows, a.cols()))
}

/// Pivot selection for the Smith reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotStrategy {
    /// Entry of minimal absolute value in the working submatrix. Default:
    /// keeps coefficient growth under control when entries span many orders
    /// of magnitude.
    MinAbs,
    /// First nonzero entry in row-major scan order. Kept as an independent
    /// elimination route for cross-checking invariant factors.
    FirstNonZero,
}

/// Smith normal form `u * A * v = d`.
pub struct SmithForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Diagonal entries greater than 1, in divisibility order.
    pub invariant_factors: Vec<BigInt>,
    pub rank: usize,
}

impl SmithForm {
    /// Recheck the defining identity exactly.
    pub fn verify(&self, a: &IntMatrix) -> bool {
        self.u.mul(a).mul(&self.v) == self.d
            && self.u.is_unimodular()
            && self.v.is_unimodular()
            && self.diagonal_ok()
    }

    fn diagonal_ok(&self) -> bool {
        let n = self.d.rows().min(self.d.cols());
        for r in 0..self.d.rows() {
            for c in 0..self.d.cols() {
                if r != c && !self.d.at(r, c).is_zero() {
                    return false;
                }
            }
        }
        for i in 0..n.saturating_sub(1) {
            let (a, b) = (self.d.at(i, i), self.d.at(i + 1, i + 1));
            if a.is_zero() && !b.is_zero() {
                return false;
            }
            if !a.is_zero() && !b.is_zero() && !b.mod_floor(a).is_zero() {
                return false;
            }
        }
        true
    }
}

pub fn snf(a: &IntMatrix) -> SmithForm {
    snf_with_strategy(a, PivotStrategy::MinAbs)
}

pub fn snf_with_strategy(a: &IntMatrix, strategy: PivotStrategy) -> SmithForm {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    fn pick_pivot(
        d: &IntMatrix,
        t: usize,
        strategy: PivotStrategy,
    ) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for r in t..d.rows() {
            for c in t..d.cols() {
                if d.at(r, c).is_zero() {
                    continue;
                }
                match strategy {
                    PivotStrategy::FirstNonZero => return Some((r, c)),
                    PivotStrategy::MinAbs => {
                        best = match best {
                            None => Some((r, c)),
                            Some((br, bc)) if d.at(r, c).abs() < d.at(br, bc).abs() => {
                                Some((r, c))
                            }
                            keep => keep,
                        };
                    }
                }
            }
        }
        best
    }

    // Diagonalize position t, assuming positions < t are final.
    fn clear_position(
        d: &mut IntMatrix,
        u: &mut IntMatrix,
        v: &mut IntMatrix,
        t: usize,
        strategy: PivotStrategy,
    ) -> bool {
        let Some((pr, pc)) = pick_pivot(d, t, strategy) else {
            return false;
        };
        d.swap_rows(t, pr);
        u.swap_rows(t, pr);
        d.swap_cols(t, pc);
        v.swap_cols(t, pc);
        loop {
            // Column below pivot.
            let mut col_clear = true;
            for r in t + 1..d.rows() {
                while !d.at(r, t).is_zero() {
                    let q = d.at(r, t).div_floor(d.at(t, t));
                    d.row_axpy(r, t, &-q.clone());
                    u.row_axpy(r, t, &-q);
                    if !d.at(r, t).is_zero() {
                        d.swap_rows(t, r);
                        u.swap_rows(t, r);
                        col_clear = false;
                    }
                }
            }
            // Row right of pivot.
            let mut row_clear = true;
            for c in t + 1..d.cols() {
                while !d.at(t, c).is_zero() {
                    let q = d.at(t, c).div_floor(d.at(t, t));
                    d.col_axpy(c, t, &-q.clone());
                    v.col_axpy(c, t, &-q);
                    if !d.at(t, c).is_zero() {
                        d.swap_cols(t, c);
                        v.swap_cols(t, c);
                        row_clear = false;
                    }
                }
            }
            if row_clear && col_clear {
                // Row ops may have refilled the column; recheck.
                if (t + 1..d.rows()).all(|r| d.at(r, t).is_zero()) {
                    break;
                }
            }
        }
        true
    }

    let limit = m.min(n);
    let mut rank = 0usize;
    for t in 0..limit {
        if !clear_position(&mut d, &mut u, &mut v, t, strategy) {
            break;
        }
        rank += 1;
    }

    // Enforce the divisibility chain d_i | d_k for i < k.
    loop {
        let mut violation = None;
        'scan: for i in 0..rank {
            for k in i + 1..rank {
                if !d.at(k, k).mod_floor(d.at(i, i)).is_zero() {
                    violation = Some((i, k));
                    break 'scan;
                }
            }
        }
        let Some((i, k)) = violation else { break };
        // Column k folded into column i creates a non-diagonal entry; the
        // local re-elimination leaves gcd at (i,i) and lcm at (k,k).
        d.col_axpy(i, k, &BigInt::one());
        v.col_axpy(i, k, &BigInt::one());
        for t in i..rank {
            clear_position(&mut d, &mut u, &mut v, t, strategy);
        }
    }

    for i in 0..rank {
        if d.at(i, i).is_negative() {
            d.negate_row(i);
            u.negate_row(i);
        }
    }

    let invariant_factors = (0..rank)
        .map(|i| d.at(i, i).clone())
        .filter(|f| !f.is_one())
        .collect();
    SmithForm {
        d,
        u,
        v,
        invariant_factors,
        rank,
    }
}

/// Basis of the saturated integer kernel lattice `{v : A v = 0}` (column
/// vectors), canonicalized by HNF. Each basis vector is primitive and the
/// count equals `cols - rank(A)`.
pub fn rational_kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    // Left kernel of A^T recovered from the unimodular transform of its HNF:
    // the transform rows facing zero HNF rows span the saturated kernel.
    let at = a.transpose();
    let f = hnf(&at);
    let mut rows = Vec::new();
    for r in f.rank..at.rows() {
        rows.push(f.transform.row_vec(r));
    }
    let canon = hnf_basis(&IntMatrix::from_bigint_rows(rows, a.cols()));
    canon.row_iter().map(|r| r.to_vec()).collect()
}

/// For invertible square `t`, returns `(adj, det)` with
/// `adj * t = t * adj = det * I` and `adj` integral (the adjugate).
pub fn scaled_inverse(t: &IntMatrix) -> Option<(IntMatrix, BigInt)> {
    if t.rows() != t.cols() {
        return None;
    }
    let n = t.rows();
    let f = hnf(t);
    if f.rank != n {
        return None;
    }
    let det_h: BigInt = (0..n).map(|i| f.h.at(i, i).clone()).product();
    let det_w = f.transform.det(); // +-1
    let det = &det_h * &det_w;
    // Solve H * N = det_h * I by back substitution; divisions are exact
    // because det_h * H^{-1} is (up to sign) the adjugate of H.
    let mut nmat = IntMatrix::zeros(n, n);
    for col in 0..n {
        let mut rhs = vec![BigInt::zero(); n];
        rhs[col] = det_h.clone();
        for i in (0..n).rev() {
            let mut acc = rhs[i].clone();
            for j in i + 1..n {
                acc -= f.h.at(i, j) * nmat.at(j, col);
            }
            let (q, r) = acc.div_rem(f.h.at(i, i));
            debug_assert!(r.is_zero(), "inexact division in scaled inverse");
            nmat.set(i, col, q);
        }
    }
    // adj = det * T^{-1} = det_w * (det_h * H^{-1}) * W.
    let adj = nmat.mul(&f.transform).scale(&det_w);
    debug_assert_eq!(adj.mul(t), IntMatrix::identity(n).scale(&det));
    Some((adj, det))
}

/// Largest power of `p` dividing `n`. Rejects `n = 0`.
pub fn p_part(n: &BigInt, p: u64) -> Result<BigInt> {
    if n.is_zero() {
        return Err(Error::InvalidInput("p_part of zero".into()));
    }
    if p < 2 {
        return Err(Error::InvalidInput(format!("p_part with p = {p}")));
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut out = BigInt::one();
    while n.mod_floor(&p).is_zero() {
        n /= &p;
        out *= &p;
    }
    Ok(out)
}

/// Exponent of `p` in `n`; None when `n = 0`.
pub fn p_valuation(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut k = 0u64;
    while n.mod_floor(&p).is_zero() {
        n /= &p;
        k += 1;
    }
    Some(k)
}

/// Parse the matrix text format: first line `rows cols`, then row-major
/// whitespace-separated integers.
pub fn parse_matrix_text(text: &str) -> Result<IntMatrix> {
    let mut tokens = text.split_whitespace();
    let rows: usize = tokens
        .next()
        .ok_or_else(|| Error::InvalidInput("missing row count".into()))?
        .parse()
        .map_err(|_| Error::InvalidInput("bad row count".into()))?;
    let cols: usize = tokens
        .next()
        .ok_or_else(|| Error::InvalidInput("missing column count".into()))?
        .parse()
        .map_err(|_| Error::InvalidInput("bad column count".into()))?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::InvalidInput("not enough matrix entries".into()))?;
        let v: BigInt = tok
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad entry {tok:?}")))?;
        data.push(v);
    }
    if tokens.next().is_some() {
        return Err(Error::InvalidInput("trailing matrix entries".into()));
    }
    Ok(IntMatrix { rows, cols, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent naive row reducer: repeated subtraction only, no pivot
    // strategy shared with hnf().
    fn naive_row_hnf(a: &IntMatrix) -> IntMatrix {
        let mut rows: Vec<Vec<BigInt>> = a.row_iter().map(|r| r.to_vec()).collect();
        let cols = a.cols();
        let mut fixed = 0usize;
        for c in 0..cols {
            loop {
                let nz: Vec<usize> = (fixed..rows.len())
                    .filter(|&i| !rows[i][c].is_zero())
                    .collect();
                if nz.is_empty() {
                    break;
                }
                if nz.len() == 1 {
                    rows.swap(fixed, nz[0]);
                    break;
                }
                // Subtract the smaller-|.| row from the larger one.
                let (mut i, mut j) = (nz[0], nz[1]);
                if rows[i][c].abs() > rows[j][c].abs() {
                    std::mem::swap(&mut i, &mut j);
                }
                let q = rows[j][c].div_floor(&rows[i][c]);
                for k in 0..cols {
                    let v = &rows[j][k] - &q * &rows[i][k];
                    rows[j][k] = v;
                }
            }
            if fixed < rows.len() && !rows[fixed][c].is_zero() {
                if rows[fixed][c].is_negative() {
                    for k in 0..cols {
                        rows[fixed][k] = -rows[fixed][k].clone();
                    }
                }
                for i in 0..fixed {
                    let q = rows[i][c].div_floor(&rows[fixed][c]);
                    if !q.is_zero() {
                        for k in 0..cols {
                            let v = &rows[i][k] - &q * &rows[fixed][k];
                            rows[i][k] = v;
                        }
                    }
                }
                fixed += 1;
            }
        }
        IntMatrix::from_bigint_rows(rows, cols)
    }

    #[test]
    fn hnf_identity_fixed() {
        let a = IntMatrix::identity(2);
        let f = hnf(&a);
        assert_eq!(f.h, a);
        assert_eq!(f.rank, 2);
    }

    #[test]
    fn hnf_already_echelon() {
        let a = IntMatrix::from_rows(&[vec![2, 4], vec![0, 0]]);
        let f = hnf(&a);
        assert_eq!(f.h, a);
        assert_eq!(f.rank, 1);
    }

    #[test]
    fn hnf_unimodular_case_matches_naive_oracle() {
        let a = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        let f = hnf(&a);
        // det = 1, so the row lattice is all of Z^2.
        assert_eq!(f.h, IntMatrix::identity(2));
        assert_eq!(naive_row_hnf(&a), f.h);
        assert_eq!(f.transform.mul(&a), f.h);
        assert!(f.transform.is_unimodular());
    }

    #[test]
    fn hnf_agrees_with_naive_oracle_on_randoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let r = rng.gen_range(1..5);
            let c = rng.gen_range(1..5);
            let rows: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            let a = IntMatrix::from_rows(&rows);
            let f = hnf(&a);
            assert_eq!(f.h, naive_row_hnf(&a), "input {a:?}");
            assert_eq!(f.transform.mul(&a), f.h);
            assert!(f.transform.is_unimodular());
        }
    }

    #[test]
    fn snf_diag_2_3() {
        let a = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let s = snf(&a);
        assert_eq!(s.invariant_factors, vec![bi(6)]);
        assert_eq!(s.d.at(0, 0), &bi(1));
        assert_eq!(s.d.at(1, 1), &bi(6));
        assert!(s.verify(&a));
    }

    #[test]
    fn snf_zero_matrix() {
        let a = IntMatrix::zeros(2, 3);
        let s = snf(&a);
        assert!(s.invariant_factors.is_empty());
        assert_eq!(s.rank, 0);
        assert!(s.verify(&a));
    }

    #[test]
    fn snf_strategies_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let r = rng.gen_range(1..6);
            let c = rng.gen_range(1..6);
            let rows: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            let a = IntMatrix::from_rows(&rows);
            let s1 = snf_with_strategy(&a, PivotStrategy::MinAbs);
            let s2 = snf_with_strategy(&a, PivotStrategy::FirstNonZero);
            assert!(s1.verify(&a));
            assert!(s2.verify(&a));
            assert_eq!(s1.invariant_factors, s2.invariant_factors);
            assert_eq!(s1.rank, s2.rank);
        }
    }

    #[test]
    fn kernel_forced_up_to_sign() {
        let a = IntMatrix::from_rows(&[vec![1, 1]]);
        let k = rational_kernel_basis(&a);
        assert_eq!(k, vec![vec![bi(1), bi(-1)]]);
    }

    #[test]
    fn kernel_injective() {
        let a = IntMatrix::identity(3);
        assert!(rational_kernel_basis(&a).is_empty());
    }

    #[test]
    fn kernel_brute_force_small() {
        let a = IntMatrix::from_rows(&[vec![2, 4], vec![1, 2]]);
        let k = rational_kernel_basis(&a);
        assert_eq!(k, vec![vec![bi(2), bi(-1)]]);
        // Brute force over |v|_inf <= 5: every kernel vector must lie in the
        // span of the returned basis.
        for x in -5i64..=5 {
            for y in -5i64..=5 {
                let in_kernel = 2 * x + 4 * y == 0 && x + 2 * y == 0;
                if in_kernel {
                    // v = t * (2, -1)
                    let ok = x % 2 == 0 && y == -x / 2;
                    assert!(ok, "({x},{y}) outside kernel basis span");
                }
            }
        }
    }

    #[test]
    fn kernel_vectors_annihilate_and_saturate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let r = rng.gen_range(1..5);
            let c = rng.gen_range(1..6);
            let rows: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(-6..=6)).collect())
                .collect();
            let a = IntMatrix::from_rows(&rows);
            let kern = rational_kernel_basis(&a);
            assert_eq!(kern.len(), c - a.rank());
            for v in &kern {
                for row in a.row_iter() {
                    let dot: BigInt = row.iter().zip(v).map(|(x, y)| x * y).sum();
                    assert!(dot.is_zero());
                }
                // Primitivity: gcd of entries is 1.
                let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
                assert!(g.is_one(), "non-primitive kernel vector {v:?}");
            }
        }
    }

    #[test]
    fn p_part_examples() {
        assert_eq!(p_part(&bi(12), 2).unwrap(), bi(4));
        assert_eq!(p_part(&bi(12), 3).unwrap(), bi(3));
        assert_eq!(p_part(&bi(1), 5).unwrap(), bi(1));
        assert!(p_part(&bi(0), 2).is_err());
    }

    #[test]
    fn rowspan_membership() {
        let b = hnf_basis(&IntMatrix::from_rows(&[vec![2, 0, 1], vec![0, 3, 1]]));
        assert!(in_rowspan(&b, &[bi(2), bi(3), bi(2)]));
        assert!(!in_rowspan(&b, &[bi(1), bi(0), bi(0)]));
        let coords = rowspan_coords(&b, &[bi(4), bi(3), bi(3)]).unwrap();
        assert_eq!(coords.len(), 2);
    }

    #[test]
    fn lattice_intersection_simple() {
        // 2Z^2 and the diagonal line both live in Z^2.
        let a = hnf_basis(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 2]]));
        let b = hnf_basis(&IntMatrix::from_rows(&[vec![1, 1]]));
        let i = lattice_intersection(&a, &b);
        assert_eq!(i, hnf_basis(&IntMatrix::from_rows(&[vec![2, 2]])));
    }

    #[test]
    fn matrix_text_roundtrip() {
        let a = parse_matrix_text("2 3\n1 2 3\n4 -5 6\n").unwrap();
        assert_eq!(a.rows(), 2);
        assert_eq!(a.at(1, 1), &bi(-5));
        assert!(parse_matrix_text("2 2\n1 2 3").is_err());
        assert!(parse_matrix_text("2 2\n1 2 3 4 5").is_err());
    }

    #[test]
    fn unimodular_inverse() {
        let a = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        let inv = a.inverse_unimodular().unwrap();
        assert_eq!(inv.mul(&a), IntMatrix::identity(2));
        assert_eq!(a.mul(&inv), IntMatrix::identity(2));
        let sing = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]);
        assert!(sing.inverse_unimodular().is_none());
    }

    #[test]
    fn serde_roundtrip() {
        let a = IntMatrix::from_rows(&[vec![1, -2], vec![30000000000, 4]]);
        let s = serde_json::to_string(&a).unwrap();
        let b: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_inverse_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let mut tested = 0;
        while tested < 50 {
            let n = rng.gen_range(1..5);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect())
                .collect();
            let t = IntMatrix::from_rows(&rows);
            let Some((adj, det)) = scaled_inverse(&t) else {
                continue;
            };
            tested += 1;
            assert!(!det.is_zero());
            assert_eq!(adj.mul(&t), IntMatrix::identity(n).scale(&det));
            assert_eq!(t.mul(&adj), IntMatrix::identity(n).scale(&det));
            assert_eq!(t.det(), det);
        }
    }
}
