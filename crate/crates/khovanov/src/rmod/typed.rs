//! Summand-typed view of a free R-complex: each degree is a direct sum of
//! R{q} and (R⊗R){q} summands and differential entries are bimodule maps,
//! stored as small exact matrices in the canonical generator layout.
//!
//! Gaussian elimination here cancels whole summand pairs along invertible
//! bimodule entries, so homotopy equivalences stay equivariant and the
//! basepoint actions on the result are exact on the nose.

use super::{
    expand, r_basis, FreeComplexR, PresTag, RPresentation, RmodError, Side, SparseMat, Summand,
    SummandKind,
};
use crate::linalg::Mat;
use crate::ring::{Coef, Ring};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Typed complex with tombstoned summands (elimination marks them dead).
struct Typed {
    ring: Ring,
    min_h: i32,
    sums: Vec<Vec<Option<Summand>>>,
    /// blocks[i]: (target summand, source summand) → small dense matrix.
    blocks: Vec<BTreeMap<(usize, usize), Mat>>,
    has_left: bool,
    has_right: bool,
}

impl Typed {
    fn from_free(m: &FreeComplexR) -> Option<Typed> {
        let decomp = m.decomp.as_ref()?;
        let offsets: Vec<Vec<usize>> = decomp
            .iter()
            .map(|sums| {
                let mut off = 0;
                sums.iter()
                    .map(|s| {
                        let o = off;
                        off += s.kind.rank();
                        o
                    })
                    .collect()
            })
            .collect();
        let mut blocks = Vec::new();
        for (i, d) in m.diffs.iter().enumerate() {
            let mut map: BTreeMap<(usize, usize), Mat> = BTreeMap::new();
            for (&(r, c), v) in &d.entries {
                let (r, c) = (r as usize, c as usize);
                let t = offsets[i + 1].partition_point(|&o| o <= r) - 1;
                let s = offsets[i].partition_point(|&o| o <= c) - 1;
                let bt = decomp[i + 1][t].kind.rank();
                let bs = decomp[i][s].kind.rank();
                let entry = map.entry((t, s)).or_insert_with(|| Mat::zero(bt, bs));
                *entry.at_mut(r - offsets[i + 1][t], c - offsets[i][s]) = v.clone();
            }
            blocks.push(map);
        }
        Some(Typed {
            ring: m.ring,
            min_h: m.min_h,
            sums: decomp
                .iter()
                .map(|v| v.iter().cloned().map(Some).collect())
                .collect(),
            blocks,
            has_left: m.left.is_some(),
            has_right: m.right.is_some(),
        })
    }

    fn to_free(&self) -> FreeComplexR {
        // compact: drop tombstones, then rebuild raw matrices
        let degrees: Vec<Vec<Summand>> = self
            .sums
            .iter()
            .map(|v| v.iter().filter_map(|s| *s).collect())
            .collect();
        // trim empty degrees at both ends
        let first = degrees.iter().position(|d| !d.is_empty()).unwrap_or(0);
        let last = degrees
            .iter()
            .rposition(|d| !d.is_empty())
            .map_or(0, |p| p + 1);
        let trimmed: Vec<Vec<Summand>> = degrees[first..last].to_vec();
        let mut out = FreeComplexR::from_summands(
            self.ring,
            self.min_h + first as i32,
            trimmed,
            self.has_left,
            self.has_right,
        );
        // remaps: per degree, summand idx -> new generator offset
        let remap: Vec<BTreeMap<usize, usize>> = self
            .sums
            .iter()
            .map(|v| {
                let mut off = 0;
                let mut m = BTreeMap::new();
                for (idx, s) in v.iter().enumerate() {
                    if let Some(s) = s {
                        m.insert(idx, off);
                        off += s.kind.rank();
                    }
                }
                m
            })
            .collect();
        for (i, map) in self.blocks.iter().enumerate() {
            if i < first || i + 1 >= last {
                continue;
            }
            for (&(t, s), b) in map {
                let (Some(&to), Some(&so)) = (remap[i + 1].get(&t), remap[i].get(&s)) else {
                    continue;
                };
                for r in 0..b.rows {
                    for c in 0..b.cols {
                        let v = b.at(r, c);
                        if !v.is_zero() {
                            out.diffs[i - first].add_to(to + r, so + c, v.clone());
                        }
                    }
                }
            }
        }
        out
    }

    fn alive(&self, deg: usize, idx: usize) -> bool {
        self.sums[deg][idx].is_some()
    }

    /// An entry is eliminable when it connects same-kind same-shift summands
    /// by a bimodule isomorphism; for these blocks that means the scalar
    /// (diagonal) coefficient is a unit.
    fn eliminable(&self, deg: usize, t: usize, s: usize, only_pm_one: bool) -> bool {
        let (Some(st), Some(ss)) = (self.sums[deg + 1][t], self.sums[deg][s]) else {
            return false;
        };
        if st.kind != ss.kind || st.shift != ss.shift {
            return false;
        }
        let b = &self.blocks[deg][&(t, s)];
        let a = b.at(0, 0);
        if only_pm_one && !(a.is_one() || (-a).is_one()) {
            return false;
        }
        self.ring.is_unit(a)
    }

    fn find_candidate(&self) -> Option<(usize, usize, usize)> {
        for only_pm_one in [true, false] {
            for deg in 0..self.blocks.len() {
                for (&(t, s), _) in &self.blocks[deg] {
                    if self.alive(deg, s)
                        && self.alive(deg + 1, t)
                        && self.eliminable(deg, t, s, only_pm_one)
                    {
                        return Some((deg, t, s));
                    }
                }
            }
        }
        None
    }

    /// Cancel the summand pair (s at deg, t at deg+1) along an invertible
    /// entry, correcting the surviving entries by the zig-zag composite.
    fn eliminate(&mut self, deg: usize, t: usize, s: usize) {
        let pivot = self.blocks[deg].remove(&(t, s)).expect("pivot exists");
        let pinv = pivot
            .inverse(self.ring)
            .expect("eliminable entry is invertible over the ring");
        let outs: Vec<(usize, Mat)> = self.blocks[deg]
            .iter()
            .filter(|((tt, ss), _)| *ss == s && *tt != t && self.alive(deg + 1, *tt))
            .map(|((tt, _), b)| (*tt, b.clone()))
            .collect();
        let ins: Vec<(usize, Mat)> = self.blocks[deg]
            .iter()
            .filter(|((tt, ss), _)| *tt == t && *ss != s && self.alive(deg, *ss))
            .map(|((_, ss), b)| (*ss, b.clone()))
            .collect();
        for (tt, beta) in &outs {
            let beta_pinv = beta.mul(&pinv);
            for (ss, alpha) in &ins {
                let corr = beta_pinv.mul(alpha);
                let st = self.sums[deg + 1][*tt].unwrap();
                let ssum = self.sums[deg][*ss].unwrap();
                let entry = self
                    .blocks[deg]
                    .entry((*tt, *ss))
                    .or_insert_with(|| Mat::zero(st.kind.rank(), ssum.kind.rank()));
                entry.add_scaled(&corr, &-Coef::one());
                if entry.is_zero() {
                    self.blocks[deg].remove(&(*tt, *ss));
                }
            }
        }
        // drop the cancelled pair and every entry touching it
        self.sums[deg][s] = None;
        self.sums[deg + 1][t] = None;
        self.blocks[deg].retain(|(tt, ss), _| *ss != s && *tt != t);
        if deg > 0 {
            self.blocks[deg - 1].retain(|(tt, _), _| *tt != s);
        }
        if deg + 1 < self.blocks.len() {
            self.blocks[deg + 1].retain(|(_, ss), _| *ss != t);
        }
    }

    fn reduce(&mut self) {
        while let Some((deg, t, s)) = self.find_candidate() {
            self.eliminate(deg, t, s);
        }
    }
}

/// Equivariant reduction: repeatedly cancels summand pairs joined by a unit
/// bimodule isomorphism, preferring ±1 entries, in (degree, target, source)
/// order. Preserves the action-module structure on the nose.
///
/// A complex without a summand decomposition is first retyped: trivially for
/// action-free complexes, via [`r_basis`] for one-action complexes. A
/// two-action complex without decomposition is returned unchanged (no
/// cancellation can be certified equivariant).
pub fn reduce_equivariant(m: &FreeComplexR) -> FreeComplexR {
    let prepared: FreeComplexR;
    let source = if m.decomp.is_some() {
        m
    } else if m.left.is_none() && m.right.is_none() {
        prepared = retype_trivial(m);
        &prepared
    } else if m.left.is_some() != m.right.is_some() {
        match retype_one_action(m) {
            Ok(cx) => {
                prepared = cx;
                &prepared
            }
            Err(_) => return m.clone(),
        }
    } else {
        return m.clone();
    };
    let mut typed = Typed::from_free(source).expect("decomp present");
    typed.reduce();
    let out = typed.to_free();
    #[cfg(debug_assertions)]
    out.validate();
    out
}

/// View an action-free complex as a sum of base-ring summands.
fn retype_trivial(m: &FreeComplexR) -> FreeComplexR {
    let mut out = m.clone();
    out.decomp = Some(
        m.gens
            .iter()
            .map(|qs| qs.iter().map(|&q| Summand::new(SummandKind::One, q)).collect())
            .collect(),
    );
    out
}

/// Change basis so the single action is the canonical block form, yielding an
/// all-R decomposition.
fn retype_one_action(m: &FreeComplexR) -> Result<FreeComplexR, RmodError> {
    let side = if m.left.is_some() {
        Side::Left
    } else {
        Side::Right
    };
    let rb = r_basis(m, side)?;
    let len = m.gens.len();
    // new basis per degree: interleave (m_k, X m_k)
    let mut w: Vec<Mat> = Vec::with_capacity(len);
    let mut w_inv: Vec<Mat> = Vec::with_capacity(len);
    let mut degrees: Vec<Vec<Summand>> = Vec::with_capacity(len);
    for i in 0..len {
        let (bw, bw_inv, pairs) = &rb.per_degree[i];
        let dim = m.gens[i].len();
        let mut perm = Mat::zero(dim, dim);
        for k in 0..*pairs {
            *perm.at_mut(2 * k, k) = Coef::one(); // hmm: maps basis col k -> 2k
        }
        for k in 0..*pairs {
            *perm.at_mut(2 * k + 1, pairs + k) = Coef::one();
        }
        // columns of (bw * permᵀ): interleaved basis
        let p_t = perm.transpose();
        w.push(bw.mul(&p_t));
        w_inv.push(perm.mul(bw_inv));
        degrees.push(
            rb.gen_qs[i]
                .iter()
                .map(|&q| Summand::new(SummandKind::R, q - 1))
                .collect(),
        );
    }
    let mut out = FreeComplexR::from_summands(
        m.ring,
        m.min_h,
        degrees,
        side == Side::Left,
        side == Side::Right,
    );
    for i in 0..len.saturating_sub(1) {
        let d = w_inv[i + 1].mul(&m.diffs[i].to_dense()).mul(&w[i]);
        out.diffs[i] = SparseMat::from_dense(&d);
    }
    #[cfg(debug_assertions)]
    out.validate();
    Ok(out)
}

/// Typed tensor product: requires decompositions on both sides; produces the
/// canonical output decomposition.
pub(super) fn tensor_typed(m: &FreeComplexR, n: &FreeComplexR) -> Result<FreeComplexR, RmodError> {
    let md = m.decomp.as_ref().unwrap();
    let nd = n.decomp.as_ref().unwrap();
    let ring = m.ring;
    let m_len = m.gens.len();
    let n_len = n.gens.len();
    if m_len == 0 || n_len == 0 {
        return Ok(FreeComplexR::empty(ring));
    }
    let has_left = m.left.is_some();
    let has_right = n.right.is_some();
    let out_len = m_len + n_len - 1;

    // generator offsets of each summand
    let offsets = |decomp: &Vec<Vec<Summand>>| -> Vec<Vec<usize>> {
        decomp
            .iter()
            .map(|sums| {
                let mut off = 0;
                sums.iter()
                    .map(|s| {
                        let o = off;
                        off += s.kind.rank();
                        o
                    })
                    .collect()
            })
            .collect()
    };
    let moff = offsets(md);
    let noff = offsets(nd);

    // m-generators (columns of the right-R-basis) per degree: raw indices of
    // the generator and its right-action partner
    let mut mlist: Vec<Vec<(usize, usize)>> = Vec::with_capacity(m_len);
    for (i, sums) in md.iter().enumerate() {
        let mut v = Vec::new();
        for (si, s) in sums.iter().enumerate() {
            let o = moff[i][si];
            match s.kind {
                SummandKind::RR => {
                    v.push((o, o + 2));
                    v.push((o + 1, o + 3));
                }
                SummandKind::R => v.push((o, o + 1)),
                SummandKind::One => return Err(RmodError::MissingAction("right")),
            }
        }
        mlist.push(v);
    }

    // output layout: per degree, summands plus generator keys (i, raw_m, raw_n)
    let mut degrees: Vec<Vec<Summand>> = vec![vec![]; out_len];
    let mut keys: Vec<Vec<(usize, usize, usize)>> = vec![vec![]; out_len];
    for t in 0..out_len {
        for i in 0..m_len {
            let Some(j) = t.checked_sub(i) else { continue };
            if j >= n_len {
                continue;
            }
            for (si, ms) in md[i].iter().enumerate() {
                let mo = moff[i][si];
                for (sj, ns) in nd[j].iter().enumerate() {
                    let no = noff[j][sj];
                    let sum = ms.shift + ns.shift;
                    match (ms.kind, ns.kind) {
                        (SummandKind::RR, SummandKind::R) => {
                            // left pair (1⊗1, X⊗1) against the R factor
                            if has_right {
                                degrees[t].push(Summand::new(SummandKind::RR, sum));
                                for (a, b) in
                                    [(mo, no), (mo + 1, no), (mo, no + 1), (mo + 1, no + 1)]
                                {
                                    keys[t].push((i, a, b));
                                }
                            } else {
                                degrees[t].push(Summand::new(SummandKind::R, sum + 1));
                                keys[t].push((i, mo, no));
                                keys[t].push((i, mo + 1, no));
                                degrees[t].push(Summand::new(SummandKind::R, sum - 1));
                                keys[t].push((i, mo, no + 1));
                                keys[t].push((i, mo + 1, no + 1));
                            }
                        }
                        (SummandKind::RR, SummandKind::RR) => {
                            degrees[t].push(Summand::new(SummandKind::RR, sum + 1));
                            for (a, b) in [(mo, no), (mo + 1, no), (mo, no + 2), (mo + 1, no + 2)]
                            {
                                keys[t].push((i, a, b));
                            }
                            degrees[t].push(Summand::new(SummandKind::RR, sum - 1));
                            for (a, b) in
                                [(mo, no + 1), (mo + 1, no + 1), (mo, no + 3), (mo + 1, no + 3)]
                            {
                                keys[t].push((i, a, b));
                            }
                        }
                        (SummandKind::R, SummandKind::R) => {
                            if has_left || has_right {
                                degrees[t].push(Summand::new(SummandKind::R, sum));
                                keys[t].push((i, mo, no));
                                keys[t].push((i, mo, no + 1));
                            } else {
                                degrees[t].push(Summand::new(SummandKind::One, sum + 1));
                                keys[t].push((i, mo, no));
                                degrees[t].push(Summand::new(SummandKind::One, sum - 1));
                                keys[t].push((i, mo, no + 1));
                            }
                        }
                        (SummandKind::R, SummandKind::RR) => {
                            if has_left {
                                degrees[t].push(Summand::new(SummandKind::RR, sum));
                                for b in [no, no + 1, no + 2, no + 3] {
                                    keys[t].push((i, mo, b));
                                }
                            } else {
                                degrees[t].push(Summand::new(SummandKind::R, sum + 1));
                                keys[t].push((i, mo, no));
                                keys[t].push((i, mo, no + 2));
                                degrees[t].push(Summand::new(SummandKind::R, sum - 1));
                                keys[t].push((i, mo, no + 1));
                                keys[t].push((i, mo, no + 3));
                            }
                        }
                        (SummandKind::One, _) | (_, SummandKind::One) => {
                            return Err(RmodError::MissingAction("left"))
                        }
                    }
                }
            }
        }
    }

    let mut index: Vec<BTreeMap<(usize, usize, usize), usize>> = vec![BTreeMap::new(); out_len];
    for t in 0..out_len {
        for (slot, key) in keys[t].iter().enumerate() {
            index[t].insert(*key, slot);
        }
    }

    let mut out = FreeComplexR::from_summands(
        ring,
        m.min_h + n.min_h,
        degrees,
        has_left,
        has_right,
    );

    // m-basis coefficient lookup: d_M(m_k) = Σ_l (a + bX) m_l with raw reads
    let n_left = n.left.as_ref().unwrap();
    for t in 0..out_len.saturating_sub(1) {
        for i in 0..m_len {
            let Some(j) = t.checked_sub(i) else { continue };
            if j >= n_len {
                continue;
            }
            for &(raw_m, _) in &mlist[i] {
                for raw_n in 0..n.gens[j].len() {
                    let Some(&src) = index[t].get(&(i, raw_m, raw_n)) else {
                        continue;
                    };
                    if i + 1 < m_len {
                        let d = &m.diffs[i];
                        for &(ml, mx) in &mlist[i + 1] {
                            let a = d.get(ml, raw_m);
                            if !a.is_zero() {
                                let tgt = index[t + 1][&(i + 1, ml, raw_n)];
                                out.diffs[t].add_to(tgt, src, a);
                            }
                            let b = d.get(mx, raw_m);
                            if !b.is_zero() {
                                for (&(r, c), v) in &n_left[j].entries {
                                    if c as usize == raw_n {
                                        let tgt = index[t + 1][&(i + 1, ml, r as usize)];
                                        out.diffs[t].add_to(tgt, src, &b * v);
                                    }
                                }
                            }
                        }
                    }
                    if j + 1 < n_len {
                        let sign = if (m.min_h + i as i32).rem_euclid(2) == 0 {
                            Coef::one()
                        } else {
                            -Coef::one()
                        };
                        for (&(r, c), v) in &n.diffs[j].entries {
                            if c as usize == raw_n {
                                let tgt = index[t + 1][&(i, raw_m, r as usize)];
                                out.diffs[t].add_to(tgt, src, &sign * v);
                            }
                        }
                    }
                }
            }
        }
    }
    #[cfg(debug_assertions)]
    out.validate();
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum MatchError {
    #[error("complex has no summand decomposition")]
    NoDecomp,
    #[error("window [{0}, {1}] does not match the target's support")]
    WindowMismatch(i32, i32),
    #[error("window is not a split subquotient; leaking entries: {0:?}")]
    Leak(Vec<String>),
}

/// A certified isomorphism from the window of the source complex onto the
/// expanded target: one block map per window degree.
#[derive(Debug, Clone)]
pub struct Witness {
    pub maps: Vec<Mat>,
}

/// Decide whether `m` restricted to `window` is isomorphic, as a module
/// complex, to `expand(target)`. The window must split off: no differential
/// may cross its boundary.
pub fn match_summand(
    m: &FreeComplexR,
    target: &RPresentation,
    window: (i32, i32),
) -> Result<Option<Witness>, MatchError> {
    let decomp = m.decomp.as_ref().ok_or(MatchError::NoDecomp)?;
    let t_cx = expand(target, m.ring);
    let (lo, hi) = window;
    if t_cx.min_h != lo || t_cx.max_h() != hi {
        return Err(MatchError::WindowMismatch(lo, hi));
    }
    // leak check on both sides of the boundary
    let mut leaks = Vec::new();
    let leak_scan = |h: i32, leaks: &mut Vec<String>| {
        let i = h - m.min_h;
        if i < 0 || i as usize >= m.diffs.len() {
            return;
        }
        let d = &m.diffs[i as usize];
        for (&(r, c), v) in &d.entries {
            if !v.is_zero() {
                leaks.push(format!(
                    "d[{h}]: gen {c} (q={}) → gen {r} (q={})",
                    m.gens[i as usize][c as usize],
                    m.gens[i as usize + 1][r as usize]
                ));
            }
        }
    };
    leak_scan(lo - 1, &mut leaks);
    leak_scan(hi, &mut leaks);
    if !leaks.is_empty() {
        return Err(MatchError::Leak(leaks));
    }

    // shape: window degrees must consist of exactly the target's summands
    let t_decomp = t_cx.decomp.as_ref().unwrap();
    let mut window_sums: Vec<Vec<Summand>> = Vec::new();
    for h in lo..=hi {
        let i = h - m.min_h;
        if i < 0 || i as usize >= decomp.len() {
            return Ok(None);
        }
        window_sums.push(decomp[i as usize].clone());
    }
    for (ws, ts) in window_sums.iter().zip(t_decomp.iter()) {
        if ws.len() != ts.len() {
            return Ok(None);
        }
        let mut a = ws.clone();
        let mut b = ts.clone();
        a.sort_by_key(|s| (s.kind.rank(), s.shift));
        b.sort_by_key(|s| (s.kind.rank(), s.shift));
        if a != b {
            return Ok(None);
        }
    }

    let ring = m.ring;
    let block = |h: i32| -> Mat {
        let i = (h - m.min_h) as usize;
        m.diffs[i].to_dense()
    };
    let witness = match target.tag {
        PresTag::Runit => Some(Witness {
            maps: vec![Mat::identity(2)],
        }),
        PresTag::D(mm) | PresTag::DRight(mm) => {
            match r_block_coeffs(&block(lo)) {
                Some((a, b)) if a.is_zero() => {
                    if mm == 0 {
                        b.is_zero().then(|| Witness {
                            maps: vec![Mat::identity(2), Mat::identity(2)],
                        })
                    } else {
                        let u = &b / Coef::from_integer(mm.into());
                        if ring.is_unit(&u) {
                            let mut phi0 = Mat::identity(2);
                            phi0.scale(&u);
                            let w = Witness {
                                maps: vec![phi0, Mat::identity(2)],
                            };
                            verify_witness(&w, m, &t_cx, lo).then_some(w)
                        } else {
                            None
                        }
                    }
                }
                _ => None,
            }
        }
        PresTag::C(n) => match rr_block_coeffs(&block(lo)) {
            Some((s, p, q, r)) => {
                let u = -q.clone();
                if !s.is_zero()
                    || !ring.is_unit(&u)
                    || p != Coef::from_integer(n.into()) * &u
                {
                    None
                } else {
                    let rp = &r / &u;
                    let mut phi0 = Mat::identity(4);
                    phi0.scale(&u);
                    let mut phi1 = Mat::identity(4);
                    // Id + (r/u)·X_L clears the X⊗X correction
                    *phi1.at_mut(1, 0) = rp.clone();
                    *phi1.at_mut(3, 2) = rp;
                    let w = Witness {
                        maps: vec![phi0, phi1],
                    };
                    verify_witness(&w, m, &t_cx, lo).then_some(w)
                }
            }
            None => None,
        },
        PresTag::E => match mu_block_coeffs(&block(lo)) {
            Some((a, b)) if ring.is_unit(&a) => {
                // e = (a + bX)∘μ, so postcompose with (a + bX)⁻¹
                let mut aut = Mat::zero(2, 2);
                *aut.at_mut(0, 0) = a.clone();
                *aut.at_mut(1, 1) = a.clone();
                *aut.at_mut(1, 0) = b.clone();
                let phi1 = aut.inverse(ring).expect("unit scalar part");
                let w = Witness {
                    maps: vec![Mat::identity(4), phi1],
                };
                verify_witness(&w, m, &t_cx, lo).then_some(w)
            }
            _ => None,
        },
    };
    Ok(witness)
}

/// φ intertwines the differentials: φ_{h+1} ∘ d_m = d_target ∘ φ_h.
fn verify_witness(w: &Witness, m: &FreeComplexR, t: &FreeComplexR, lo: i32) -> bool {
    for (k, pair) in w.maps.windows(2).enumerate() {
        let dm = m.diffs[(lo - m.min_h) as usize + k].to_dense();
        let dt = t.diffs[k].to_dense();
        if pair[1].mul(&dm) != dt.mul(&pair[0]) {
            return false;
        }
    }
    true
}

/// a·Id + b·X on an R summand: [[a, 0], [b, a]].
fn r_block_coeffs(b: &Mat) -> Option<(Coef, Coef)> {
    if b.rows != 2 || b.cols != 2 || !b.at(0, 1).is_zero() || b.at(0, 0) != b.at(1, 1) {
        return None;
    }
    Some((b.at(0, 0).clone(), b.at(1, 0).clone()))
}

/// s + p·X_L + q·X_R + r·X_LX_R on an R⊗R summand.
fn rr_block_coeffs(b: &Mat) -> Option<(Coef, Coef, Coef, Coef)> {
    if b.rows != 4 || b.cols != 4 {
        return None;
    }
    let s = b.at(0, 0).clone();
    let p = b.at(1, 0).clone();
    let q = b.at(2, 0).clone();
    let r = b.at(3, 0).clone();
    let expect = [
        [s.clone(), Coef::zero(), Coef::zero(), Coef::zero()],
        [p.clone(), s.clone(), Coef::zero(), Coef::zero()],
        [q.clone(), Coef::zero(), s.clone(), Coef::zero()],
        [r.clone(), q.clone(), p.clone(), s.clone()],
    ];
    for (i, row) in expect.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if b.at(i, j) != v {
                return None;
            }
        }
    }
    Some((s, p, q, r))
}

/// a·μ + b·Xμ from R⊗R to R: [[a,0,0,0],[b,a,a,0]].
fn mu_block_coeffs(b: &Mat) -> Option<(Coef, Coef)> {
    if b.rows != 2 || b.cols != 4 {
        return None;
    }
    let a = b.at(0, 0).clone();
    let bb = b.at(1, 0).clone();
    let ok = b.at(0, 1).is_zero()
        && b.at(0, 2).is_zero()
        && b.at(0, 3).is_zero()
        && b.at(1, 1) == &a
        && b.at(1, 2) == &a
        && b.at(1, 3).is_zero();
    ok.then_some((a, bb))
}

#[derive(Debug, thiserror::Error)]
pub enum RemoveEError {
    #[error("the C(m)⊗E pattern is absent: {0}")]
    PatternAbsent(String),
}

/// Reduce C(m) ⊗_R E to the chain homotopy equivalent C(−m){−1}, returning
/// the canonical expanded form after certifying the isomorphism.
pub fn remove_e(m: &FreeComplexR) -> Result<FreeComplexR, RemoveEError> {
    let reduced = reduce_equivariant(m);
    let nonempty: Vec<i32> = (reduced.min_h..=reduced.max_h())
        .filter(|&h| reduced.dim(h) > 0)
        .collect();
    if nonempty.len() != 2 || nonempty[1] != nonempty[0] + 1 {
        return Err(RemoveEError::PatternAbsent(format!(
            "reduced complex supported in degrees {nonempty:?}"
        )));
    }
    let lo = nonempty[0];
    let decomp = reduced.decomp.as_ref().unwrap();
    let sums_lo = &decomp[(lo - reduced.min_h) as usize];
    let sums_hi = &decomp[(lo + 1 - reduced.min_h) as usize];
    if sums_lo.len() != 1
        || sums_hi.len() != 1
        || sums_lo[0].kind != SummandKind::RR
        || sums_hi[0].kind != SummandKind::RR
    {
        return Err(RemoveEError::PatternAbsent(
        "reduced complex is not a single R⊗R → R⊗R".into(),
        ));
    }
    let e = reduced.diffs[(lo - reduced.min_h) as usize].to_dense();
    let Some((s, p, q, _r)) = rr_block_coeffs(&e) else {
        return Err(RemoveEError::PatternAbsent(
            "entry is not in the X_L/X_R span".into(),
        ));
    };
    if !s.is_zero() || q.is_zero() || !reduced.ring.is_unit(&q) {
        return Err(RemoveEError::PatternAbsent(format!(
            "entry has scalar part {s} and X_R coefficient {q}"
        )));
    }
    let n = -(&p / &q);
    if !n.denom().is_one() {
        return Err(RemoveEError::PatternAbsent(format!(
            "X_L/X_R ratio {n} is not an integer"
        )));
    }
    let n_int: i64 = match n.numer().try_into() {
        Ok(v) => v,
        Err(_) => {
            return Err(RemoveEError::PatternAbsent("coefficient overflow".into()));
        }
    };
    let pres = RPresentation::shifted(PresTag::C(n_int), lo, sums_lo[0].shift + 1);
    match match_summand(&reduced, &pres, (lo, lo + 1)) {
        Ok(Some(_)) => Ok(expand(&pres, reduced.ring)),
        Ok(None) => Err(RemoveEError::PatternAbsent(
            "no isomorphism onto the C-form".into(),
        )),
        Err(e) => Err(RemoveEError::PatternAbsent(e.to_string())),
    }
}
