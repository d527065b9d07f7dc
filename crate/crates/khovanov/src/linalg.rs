//! Exact dense linear algebra: Smith normal form over ℤ, ℚ and ℤ₍ₚ₎ with
//! unimodular certificates, kernels, and homology of matrix pairs.
//!
//! Pivoting is on minimal absolute value (ℤ), any nonzero entry (ℚ), or
//! minimal p-valuation (ℤ₍ₚ₎). Entries are arbitrary-precision, so the
//! classical intermediate-growth failure mode costs time, not correctness.

use crate::ring::{coef_int, Coef, Ring};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Coef>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.at(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Coef::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Coef::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Coef>>) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == nc));
        Mat {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| coef_int(x)).collect())
                .collect(),
        )
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Coef {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Coef {
        &mut self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Coef) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Mat::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.at(k, c);
                    if !b.is_zero() {
                        *out.at_mut(r, c) += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Mat, s: &Coef) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b * s;
        }
    }

    pub fn scale(&mut self, s: &Coef) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn neg(&self) -> Mat {
        let mut m = self.clone();
        for a in m.data.iter_mut() {
            *a = -a.clone();
        }
        m
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        out
    }

    pub fn col(&self, c: usize) -> Vec<Coef> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row[i] += s * row[j]
    fn row_op(&mut self, i: usize, j: usize, s: &Coef) {
        for c in 0..self.cols {
            let v = self.at(j, c) * s;
            *self.at_mut(i, c) += v;
        }
    }

    /// col[i] += s * col[j]
    fn col_op(&mut self, i: usize, j: usize, s: &Coef) {
        for r in 0..self.rows {
            let v = self.at(r, j) * s;
            *self.at_mut(r, i) += v;
        }
    }

    fn scale_row(&mut self, i: usize, s: &Coef) {
        for c in 0..self.cols {
            let v = self.at(i, c) * s;
            *self.at_mut(i, c) = v;
        }
    }

    /// Exact inverse, provided every entry of the inverse lies in `ring`.
    pub fn inverse(&self, ring: Ring) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.at(r, col).is_zero())?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a.at(col, col).clone();
            let pinv = p.recip();
            a.scale_row(col, &pinv);
            inv.scale_row(col, &pinv);
            for r in 0..n {
                if r != col && !a.at(r, col).is_zero() {
                    let s = -a.at(r, col).clone();
                    a.row_op(r, col, &s);
                    inv.row_op(r, col, &s);
                }
            }
        }
        if inv.data.iter().all(|x| ring.contains(x)) {
            Some(inv)
        } else {
            None
        }
    }
}

/// Smith normal form data: `u * m * v = s` with `u`, `v` invertible over the
/// ring (determinant a unit) and `s` diagonal with the divisibility chain.
pub struct Snf {
    pub s: Mat,
    pub u: Mat,
    pub v: Mat,
    /// Inverse of `v`, maintained incrementally (needed to express vectors in
    /// the new column basis).
    pub v_inv: Mat,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
}

/// Pivot preference: over ℤ the minimal |entry|, over ℤ₍ₚ₎ the minimal
/// p-valuation (breaking ties by size), over ℚ any nonzero (smallest first
/// to limit growth).
fn pivot_weight(ring: Ring, c: &Coef) -> (u64, BigInt) {
    let size = c.numer().abs() * c.denom().abs();
    match ring {
        Ring::Zp(_) => (ring.valuation(c).unwrap() as u64, size),
        _ => (0, size),
    }
}

pub fn smith(m: &Mat, ring: Ring) -> Snf {
    let mut s = m.clone();
    let mut u = Mat::identity(m.rows);
    let mut v = Mat::identity(m.cols);
    let mut v_inv = Mat::identity(m.cols);
    let n = m.rows.min(m.cols);
    let mut k = 0;

    while k < n {
        // find best pivot in the remaining submatrix
        let mut best: Option<(u64, BigInt, usize, usize)> = None;
        for r in k..m.rows {
            for c in k..m.cols {
                let x = s.at(r, c);
                if x.is_zero() {
                    continue;
                }
                let (w, sz) = pivot_weight(ring, x);
                if best
                    .as_ref()
                    .map_or(true, |(bw, bsz, _, _)| (w, &sz) < (*bw, bsz))
                {
                    best = Some((w, sz, r, c));
                }
            }
        }
        let Some((_, _, pr, pc)) = best else { break };
        s.swap_rows(k, pr);
        u.swap_rows(k, pr);
        s.swap_cols(k, pc);
        v.swap_cols(k, pc);
        v_inv.swap_rows(k, pc);

        match ring {
            Ring::Z => {
                // Always reduce against the current global minimum of the
                // working submatrix. Every surviving remainder is at most
                // half the pivot, so re-selection terminates quickly and
                // keeps the entry growth tame.
                'step: loop {
                    let mut best: Option<(BigInt, usize, usize)> = None;
                    for r in k..m.rows {
                        for c in k..m.cols {
                            let x = s.at(r, c);
                            if x.is_zero() {
                                continue;
                            }
                            let size = x.numer().abs();
                            if best.as_ref().map_or(true, |(b, _, _)| &size < b) {
                                best = Some((size, r, c));
                            }
                        }
                    }
                    let Some((_, pr, pc)) = best else { break 'step };
                    s.swap_rows(k, pr);
                    u.swap_rows(k, pr);
                    s.swap_cols(k, pc);
                    v.swap_cols(k, pc);
                    v_inv.swap_rows(k, pc);
                    let mut clean = true;
                    for r in k + 1..m.rows {
                        if s.at(r, k).is_zero() {
                            continue;
                        }
                        let q = rounded_quotient(s.at(r, k), s.at(k, k));
                        debug_assert!(!q.is_zero(), "pivot is the global minimum");
                        let nq = -q;
                        s.row_op(r, k, &nq);
                        u.row_op(r, k, &nq);
                        if !s.at(r, k).is_zero() {
                            clean = false;
                        }
                    }
                    for c in k + 1..m.cols {
                        if s.at(k, c).is_zero() {
                            continue;
                        }
                        let q = rounded_quotient(s.at(k, c), s.at(k, k));
                        if !q.is_zero() {
                            let nq = -q.clone();
                            s.col_op(c, k, &nq);
                            v.col_op(c, k, &nq);
                            v_inv.row_op(k, c, &q);
                        }
                        if !s.at(k, c).is_zero() {
                            clean = false;
                        }
                    }
                    if !clean {
                        continue 'step;
                    }
                    // row and column are clear; enforce the divisor chain
                    for r in k + 1..m.rows {
                        for c in k + 1..m.cols {
                            if !ring.divides(s.at(k, k), s.at(r, c)) {
                                s.row_op(k, r, &Coef::one());
                                u.row_op(k, r, &Coef::one());
                                continue 'step;
                            }
                        }
                    }
                    break 'step;
                }
            }
            Ring::Q | Ring::Zp(_) => {
                // pivot has minimal valuation, so all quotients stay in ring
                let p = s.at(k, k).clone();
                for r in k + 1..m.rows {
                    if !s.at(r, k).is_zero() {
                        let q = -(s.at(r, k) / &p);
                        debug_assert!(ring.contains(&-q.clone()));
                        s.row_op(r, k, &q);
                        u.row_op(r, k, &q);
                    }
                }
                for c in k + 1..m.cols {
                    if !s.at(k, c).is_zero() {
                        let q = -(s.at(k, c) / &p);
                        s.col_op(c, k, &q);
                        v.col_op(c, k, &q);
                        v_inv.row_op(k, c, &-q);
                    }
                }
            }
        }

        // normalize the pivot to its canonical associate
        let d = ring.normalize_divisor(s.at(k, k));
        let unit = s.at(k, k) / &d;
        debug_assert!(ring.is_unit(&unit));
        let uinv = unit.recip();
        s.scale_row(k, &uinv);
        u.scale_row(k, &uinv);
        k += 1;
    }

    let rank = (0..n).take_while(|&i| !s.at(i, i).is_zero()).count();
    Snf {
        s,
        u,
        v,
        v_inv,
        rank,
    }
}

/// Nearest-integer quotient, so the remainder satisfies |r| <= |b|/2.
fn rounded_quotient(a: &Coef, b: &Coef) -> Coef {
    debug_assert!(a.denom().is_one() && b.denom().is_one());
    let (q, r) = a.numer().div_rem(b.numer());
    let two_r = r.abs() * BigInt::from(2);
    let adjust = if two_r > b.numer().abs() {
        if (r.sign() == b.numer().sign()) || r.is_zero() {
            BigInt::one()
        } else {
            -BigInt::one()
        }
    } else {
        BigInt::zero()
    };
    Coef::from_integer(q + adjust)
}

/// Diagonal of the SNF as ring-normalized divisors (nonzero ones only).
pub fn divisors(snf: &Snf) -> Vec<Coef> {
    (0..snf.rank).map(|i| snf.s.at(i, i).clone()).collect()
}

/// Homology of a two-step block `C_prev --a--> C --b--> C_next` at the middle
/// term, i.e. ker b / im a, as (free rank, torsion orders ascending).
///
/// Requires b*a = 0 over the ring.
pub fn homology_block(a: &Mat, b: &Mat, ring: Ring) -> (usize, Vec<num_bigint::BigUint>) {
    let dim = b.cols;
    debug_assert_eq!(a.rows, dim);
    let snf_b = smith(b, ring);
    let kernel_rank = dim - snf_b.rank;
    // coordinates of im(a) in the kernel basis: rows rank.. of v_inv * a
    let coords = snf_b.v_inv.mul(a);
    for r in 0..snf_b.rank {
        for c in 0..a.cols {
            // rows with nonzero divisor must vanish because b*a = 0
            debug_assert!(
                coords.at(r, c).is_zero(),
                "input is not a complex (b*a != 0)"
            );
        }
    }
    let mut inner = Mat::zero(kernel_rank, a.cols);
    for r in 0..kernel_rank {
        for c in 0..a.cols {
            *inner.at_mut(r, c) = coords.at(snf_b.rank + r, c).clone();
        }
    }
    let snf_a = smith(&inner, ring);
    let mut torsion: Vec<num_bigint::BigUint> = divisors(&snf_a)
        .iter()
        .filter_map(|d| ring.torsion_order(d))
        .collect();
    torsion.sort();
    (kernel_rank - snf_a.rank, torsion)
}

/// Verify the SNF certificate: u*m*v = s, s diagonal with the divisor chain,
/// u and v invertible over the ring (|det| a unit).
pub fn check_certificate(m: &Mat, snf: &Snf, ring: Ring) -> bool {
    let prod = snf.u.mul(m).mul(&snf.v);
    if prod != snf.s {
        return false;
    }
    for r in 0..snf.s.rows {
        for c in 0..snf.s.cols {
            if r != c && !snf.s.at(r, c).is_zero() {
                return false;
            }
        }
    }
    let n = snf.s.rows.min(snf.s.cols);
    for i in 1..n {
        let prev = snf.s.at(i - 1, i - 1);
        let cur = snf.s.at(i, i);
        if prev.is_zero() {
            if !cur.is_zero() {
                return false;
            }
        } else if !ring.divides(prev, cur) {
            return false;
        }
    }
    let du = determinant(&snf.u);
    let dv = determinant(&snf.v);
    ring.is_unit(&du) && ring.is_unit(&dv) && snf.v.mul(&snf.v_inv) == Mat::identity(snf.v.rows)
}

pub fn determinant(m: &Mat) -> Coef {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut det = Coef::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a.at(r, col).is_zero()) else {
            return Coef::zero();
        };
        if pivot != col {
            a.swap_rows(col, pivot);
            det = -det;
        }
        let p = a.at(col, col).clone();
        det *= &p;
        let pinv = p.recip();
        a.scale_row(col, &pinv);
        for r in col + 1..n {
            if !a.at(r, col).is_zero() {
                let s = -a.at(r, col).clone();
                a.row_op(r, col, &s);
            }
        }
    }
    det
}
