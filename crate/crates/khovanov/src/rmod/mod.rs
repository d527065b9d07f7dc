//! Complexes of free modules over R = base[X]/(X²), with up to two
//! commuting basepoint actions, and the tensor calculus over R that computes
//! connected sums.
//!
//! R is graded with 1 in degree 1 and X in degree −1. A one-basepoint complex
//! is a left R-module complex; two basepoints give an R-R bimodule complex.

pub mod typed;

use crate::linalg::{smith, Mat};
use crate::ring::{Coef, Ring};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub use typed::{match_summand, reduce_equivariant, remove_e, MatchError, Witness};

#[derive(Debug, thiserror::Error)]
pub enum RmodError {
    #[error("complex is missing the {0} action required here")]
    MissingAction(&'static str),
    #[error("not free over R on the {side} side at degree {h}, q {q}: elementary divisor {divisor} is not a unit")]
    NotFree {
        side: &'static str,
        h: i32,
        q: i32,
        divisor: String,
    },
    #[error("generator pairing does not span: degree {h} has {got} paired generators of {want}")]
    PairingIncomplete { h: i32, got: usize, want: usize },
}

/// Sparse matrix with entries indexed (row, col) = (target, source).
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "SparseMatSerde", into = "SparseMatSerde")]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(u32, u32), Coef>,
}

#[derive(Serialize, Deserialize, Clone)]
struct SparseMatSerde {
    rows: usize,
    cols: usize,
    entries: Vec<(u32, u32, Coef)>,
}

impl From<SparseMatSerde> for SparseMat {
    fn from(s: SparseMatSerde) -> Self {
        SparseMat {
            rows: s.rows,
            cols: s.cols,
            entries: s.entries.into_iter().map(|(r, c, v)| ((r, c), v)).collect(),
        }
    }
}

impl From<SparseMat> for SparseMatSerde {
    fn from(m: SparseMat) -> Self {
        SparseMatSerde {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries.into_iter().map(|((r, c), v)| (r, c, v)).collect(),
        }
    }
}

impl SparseMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: Coef) {
        if v.is_zero() {
            return;
        }
        debug_assert!(r < self.rows && c < self.cols);
        let slot = self.entries.entry((r as u32, c as u32)).or_insert_with(Coef::zero);
        *slot += v;
        if slot.is_zero() {
            self.entries.remove(&(r as u32, c as u32));
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Coef {
        self.entries
            .get(&(r as u32, c as u32))
            .cloned()
            .unwrap_or_else(Coef::zero)
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zero(self.rows, self.cols);
        for (&(r, c), v) in &self.entries {
            m.set(r as usize, c as usize, v.clone());
        }
        m
    }

    pub fn from_dense(m: &Mat) -> Self {
        let mut out = SparseMat::zero(m.rows, m.cols);
        for r in 0..m.rows {
            for c in 0..m.cols {
                let v = m.at(r, c);
                if !v.is_zero() {
                    out.entries.insert((r as u32, c as u32), v.clone());
                }
            }
        }
        out
    }

    pub fn compose(&self, other: &SparseMat) -> SparseMat {
        // self ∘ other (matrix product self * other)
        assert_eq!(self.cols, other.rows);
        let mut by_col: BTreeMap<u32, Vec<(u32, &Coef)>> = BTreeMap::new();
        for (&(r, c), v) in &self.entries {
            by_col.entry(c).or_default().push((r, v));
        }
        let mut out = SparseMat::zero(self.rows, other.cols);
        for (&(k, c), v) in &other.entries {
            if let Some(col) = by_col.get(&k) {
                for &(r, w) in col {
                    out.add_to(r as usize, c as usize, w * v);
                }
            }
        }
        out
    }
}

/// Summand kinds of the module decomposition: the base ring, R, or R⊗R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SummandKind {
    One,
    R,
    RR,
}

impl SummandKind {
    pub fn rank(&self) -> usize {
        match self {
            SummandKind::One => 1,
            SummandKind::R => 2,
            SummandKind::RR => 4,
        }
    }

    /// q-degree of each generator relative to the summand shift.
    /// R: [1, X]; R⊗R: [1⊗1, X⊗1, 1⊗X, X⊗X].
    pub fn gen_offsets(&self) -> &'static [i32] {
        match self {
            SummandKind::One => &[0],
            SummandKind::R => &[1, -1],
            SummandKind::RR => &[2, 0, 0, -2],
        }
    }

    /// Left X-action in the canonical generator layout.
    pub fn left_action(&self) -> Vec<(usize, usize)> {
        match self {
            SummandKind::One => vec![],
            SummandKind::R => vec![(1, 0)],
            SummandKind::RR => vec![(1, 0), (3, 2)],
        }
    }

    /// Right X-action in the canonical generator layout.
    pub fn right_action(&self) -> Vec<(usize, usize)> {
        match self {
            SummandKind::One => vec![],
            SummandKind::R => vec![(1, 0)],
            SummandKind::RR => vec![(2, 0), (3, 1)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub kind: SummandKind,
    pub shift: i32,
}

impl Summand {
    pub fn new(kind: SummandKind, shift: i32) -> Self {
        Summand { kind, shift }
    }

    pub fn gen_qs(&self) -> Vec<i32> {
        self.kind
            .gen_offsets()
            .iter()
            .map(|o| o + self.shift)
            .collect()
    }
}

impl fmt::Display for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            SummandKind::One => "1",
            SummandKind::R => "R",
            SummandKind::RR => "R⊗R",
        };
        write!(f, "{k}{{{}}}", self.shift)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A finitely generated free complex over the coefficient ring with integer
/// q-gradings and up to two commuting degree-(0,−2) actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeComplexR {
    pub ring: Ring,
    pub min_h: i32,
    /// q-degree of each generator, per homological degree (index 0 = min_h).
    pub gens: Vec<Vec<i32>>,
    /// diffs[i]: degree (min_h + i) → (min_h + i + 1).
    pub diffs: Vec<SparseMat>,
    pub left: Option<Vec<SparseMat>>,
    pub right: Option<Vec<SparseMat>>,
    /// Summand decomposition aligned with `gens` (blocks in order), when the
    /// complex was built from a structured constructor.
    pub decomp: Option<Vec<Vec<Summand>>>,
}

impl FreeComplexR {
    pub fn empty(ring: Ring) -> Self {
        FreeComplexR {
            ring,
            min_h: 0,
            gens: vec![],
            diffs: vec![],
            left: None,
            right: None,
            decomp: None,
        }
    }

    /// Build from a summand decomposition; differentials start at zero and
    /// actions are the canonical block matrices.
    pub fn from_summands(
        ring: Ring,
        min_h: i32,
        degrees: Vec<Vec<Summand>>,
        with_left: bool,
        with_right: bool,
    ) -> Self {
        let gens: Vec<Vec<i32>> = degrees
            .iter()
            .map(|sums| sums.iter().flat_map(|s| s.gen_qs()).collect())
            .collect();
        let dims: Vec<usize> = gens.iter().map(Vec::len).collect();
        let diffs = (0..degrees.len().saturating_sub(1))
            .map(|i| SparseMat::zero(dims[i + 1], dims[i]))
            .collect();
        let action = |pick: fn(&SummandKind) -> Vec<(usize, usize)>| -> Vec<SparseMat> {
            degrees
                .iter()
                .enumerate()
                .map(|(i, sums)| {
                    let mut m = SparseMat::zero(dims[i], dims[i]);
                    let mut off = 0;
                    for s in sums {
                        for (r, c) in pick(&s.kind) {
                            m.add_to(off + r, off + c, Coef::one());
                        }
                        off += s.kind.rank();
                    }
                    m
                })
                .collect()
        };
        FreeComplexR {
            ring,
            min_h,
            diffs,
            left: with_left.then(|| action(SummandKind::left_action)),
            right: with_right.then(|| action(SummandKind::right_action)),
            decomp: Some(degrees),
            gens,
        }
    }

    pub fn max_h(&self) -> i32 {
        self.min_h + self.gens.len() as i32 - 1
    }

    pub fn dim(&self, h: i32) -> usize {
        let i = h - self.min_h;
        if i < 0 || i as usize >= self.gens.len() {
            0
        } else {
            self.gens[i as usize].len()
        }
    }

    pub fn total_rank(&self) -> usize {
        self.gens.iter().map(Vec::len).sum()
    }

    pub fn diff(&self, h: i32) -> Option<&SparseMat> {
        let i = h - self.min_h;
        if i < 0 {
            None
        } else {
            self.diffs.get(i as usize)
        }
    }

    /// Homological shift [k]: degrees move up by k.
    pub fn shift_h(mut self, k: i32) -> Self {
        self.min_h += k;
        self
    }

    /// Quantum shift {q}: all gradings move up by q.
    pub fn shift_q(mut self, q: i32) -> Self {
        for deg in &mut self.gens {
            for g in deg.iter_mut() {
                *g += q;
            }
        }
        if let Some(d) = &mut self.decomp {
            for deg in d {
                for s in deg.iter_mut() {
                    s.shift += q;
                }
            }
        }
        self
    }

    pub fn action(&self, side: Side) -> Option<&Vec<SparseMat>> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }

    /// Direct sum; decomp is preserved when both sides carry one.
    pub fn direct_sum(&self, other: &FreeComplexR) -> FreeComplexR {
        assert_eq!(self.ring, other.ring);
        if self.gens.is_empty() {
            return other.clone();
        }
        if other.gens.is_empty() {
            return self.clone();
        }
        let min_h = self.min_h.min(other.min_h);
        let max_h = self.max_h().max(other.max_h());
        let len = (max_h - min_h + 1) as usize;
        let mut gens: Vec<Vec<i32>> = vec![vec![]; len];
        let mut offsets_a = vec![0usize; len];
        let mut offsets_b = vec![0usize; len];
        for h in min_h..=max_h {
            let i = (h - min_h) as usize;
            let a = self.gens.get((h - self.min_h) as usize).filter(|_| h >= self.min_h);
            offsets_a[i] = 0;
            if let Some(a) = a {
                gens[i].extend_from_slice(a);
            }
            offsets_b[i] = gens[i].len();
            if h >= other.min_h {
                if let Some(b) = other.gens.get((h - other.min_h) as usize) {
                    gens[i].extend_from_slice(b);
                }
            }
        }
        let mut diffs: Vec<SparseMat> = (0..len.saturating_sub(1))
            .map(|i| SparseMat::zero(gens[i + 1].len(), gens[i].len()))
            .collect();
        let splice = |m: &FreeComplexR, offsets: &Vec<usize>, diffs: &mut Vec<SparseMat>| {
            for (j, d) in m.diffs.iter().enumerate() {
                let h = m.min_h + j as i32;
                let i = (h - min_h) as usize;
                for (&(r, c), v) in &d.entries {
                    diffs[i].add_to(
                        offsets[i + 1] + r as usize,
                        offsets[i] + c as usize,
                        v.clone(),
                    );
                }
            }
        };
        splice(self, &offsets_a, &mut diffs);
        splice(other, &offsets_b, &mut diffs);

        let merge_actions = |a: &Option<Vec<SparseMat>>, b: &Option<Vec<SparseMat>>| -> Option<Vec<SparseMat>> {
            match (a, b) {
                (Some(a), Some(b)) => {
                    let mut out: Vec<SparseMat> = (0..len)
                        .map(|i| SparseMat::zero(gens[i].len(), gens[i].len()))
                        .collect();
                    for (j, m) in a.iter().enumerate() {
                        let i = (self.min_h + j as i32 - min_h) as usize;
                        for (&(r, c), v) in &m.entries {
                            out[i].add_to(offsets_a[i] + r as usize, offsets_a[i] + c as usize, v.clone());
                        }
                    }
                    for (j, m) in b.iter().enumerate() {
                        let i = (other.min_h + j as i32 - min_h) as usize;
                        for (&(r, c), v) in &m.entries {
                            out[i].add_to(offsets_b[i] + r as usize, offsets_b[i] + c as usize, v.clone());
                        }
                    }
                    Some(out)
                }
                _ => None,
            }
        };
        let left = merge_actions(&self.left, &other.left);
        let right = merge_actions(&self.right, &other.right);
        let decomp = match (&self.decomp, &other.decomp) {
            (Some(da), Some(db)) => {
                let mut out: Vec<Vec<Summand>> = vec![vec![]; len];
                for (j, sums) in da.iter().enumerate() {
                    out[(self.min_h + j as i32 - min_h) as usize].extend_from_slice(sums);
                }
                for (j, sums) in db.iter().enumerate() {
                    out[(other.min_h + j as i32 - min_h) as usize].extend_from_slice(sums);
                }
                Some(out)
            }
            _ => None,
        };
        FreeComplexR {
            ring: self.ring,
            min_h,
            gens,
            diffs,
            left,
            right,
            decomp,
        }
    }

    /// Check d² = 0, q-homogeneity of d (bidegree (1,0)), action nilpotency,
    /// commutation with d and each other, action bidegree (0,−2), and decomp
    /// consistency. Panics with a description on failure.
    pub fn validate(&self) {
        for (i, d) in self.diffs.iter().enumerate() {
            assert_eq!(d.cols, self.gens[i].len(), "diff {i} cols");
            assert_eq!(d.rows, self.gens[i + 1].len(), "diff {i} rows");
            for (&(r, c), v) in &d.entries {
                assert!(self.ring.contains(v), "entry outside ring");
                assert_eq!(
                    self.gens[i + 1][r as usize],
                    self.gens[i][c as usize],
                    "differential not q-homogeneous at degree {}",
                    self.min_h + i as i32
                );
            }
            if i + 1 < self.diffs.len() {
                let dd = self.diffs[i + 1].compose(d);
                assert!(dd.entries.is_empty(), "d² ≠ 0 at degree {}", self.min_h + i as i32);
            }
        }
        for (side, acts) in [("left", &self.left), ("right", &self.right)] {
            if let Some(acts) = acts {
                assert_eq!(acts.len(), self.gens.len());
                for (i, a) in acts.iter().enumerate() {
                    for (&(r, c), _) in &a.entries {
                        assert_eq!(
                            self.gens[i][r as usize],
                            self.gens[i][c as usize] - 2,
                            "{side} action not of bidegree (0,−2)"
                        );
                    }
                    let sq = a.compose(a);
                    assert!(sq.entries.is_empty(), "{side} action squares nonzero");
                    if i + 1 < self.gens.len() {
                        let ad = self.diffs[i].compose(a);
                        let da = acts[i + 1].compose(&self.diffs[i]);
                        assert_eq!(ad, da, "{side} action does not commute with d");
                    }
                }
            }
        }
        if let (Some(l), Some(r)) = (&self.left, &self.right) {
            for i in 0..self.gens.len() {
                assert_eq!(
                    l[i].compose(&r[i]),
                    r[i].compose(&l[i]),
                    "actions do not commute"
                );
            }
        }
        if let Some(decomp) = &self.decomp {
            assert_eq!(decomp.len(), self.gens.len());
            for (i, sums) in decomp.iter().enumerate() {
                let qs: Vec<i32> = sums.iter().flat_map(|s| s.gen_qs()).collect();
                assert_eq!(qs, self.gens[i], "decomp layout mismatch at index {i}");
                let expect = FreeComplexR::from_summands(
                    self.ring,
                    0,
                    vec![sums.clone()],
                    self.left.is_some(),
                    self.right.is_some(),
                );
                if let (Some(a), Some(b)) = (&self.left, &expect.left) {
                    assert_eq!(a[i], b[0], "left action not canonical at index {i}");
                }
                if let (Some(a), Some(b)) = (&self.right, &expect.right) {
                    assert_eq!(a[i], b[0], "right action not canonical at index {i}");
                }
            }
        }
    }
}

/// Named presentation of a standard complex, with shifts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RPresentation {
    pub tag: PresTag,
    pub h_shift: i32,
    pub q_shift: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PresTag {
    /// C(n): R⊗R{−1} → R⊗R{1} with δₙ(1⊗1) = nX⊗1 − 1⊗X. Bimodule.
    C(i64),
    /// D(m): R{−1} → R{1} with ν_m(1) = mX. Left module only.
    D(i64),
    /// D(m) viewed as a right module.
    DRight(i64),
    /// E: R⊗R → R{1} with the multiplication μ. Bimodule.
    E,
    /// R itself in degree 0: R{−1}. Bimodule (both actions agree).
    Runit,
}

impl fmt::Display for RPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tag {
            PresTag::C(n) => write!(f, "C({n})")?,
            PresTag::D(m) => write!(f, "D({m})")?,
            PresTag::DRight(m) => write!(f, "Dright({m})")?,
            PresTag::E => write!(f, "E")?,
            PresTag::Runit => write!(f, "Runit")?,
        }
        if self.h_shift != 0 {
            write!(f, "[{}]", self.h_shift)?;
        }
        if self.q_shift != 0 {
            write!(f, "{{{}}}", self.q_shift)?;
        }
        Ok(())
    }
}

impl RPresentation {
    pub fn new(tag: PresTag) -> Self {
        RPresentation {
            tag,
            h_shift: 0,
            q_shift: 0,
        }
    }

    pub fn shifted(tag: PresTag, h: i32, q: i32) -> Self {
        RPresentation {
            tag,
            h_shift: h,
            q_shift: q,
        }
    }
}

/// Expand a presentation into an explicit complex over the ring.
pub fn expand(pres: &RPresentation, ring: Ring) -> FreeComplexR {
    let int = |n: i64| Coef::from_integer(n.into());
    let mut cx = match pres.tag {
        PresTag::C(n) => {
            let mut cx = FreeComplexR::from_summands(
                ring,
                0,
                vec![
                    vec![Summand::new(SummandKind::RR, -1)],
                    vec![Summand::new(SummandKind::RR, 1)],
                ],
                true,
                true,
            );
            // δₙ in the basis (1⊗1, X⊗1, 1⊗X, X⊗X)
            cx.diffs[0].add_to(1, 0, int(n));
            cx.diffs[0].add_to(2, 0, -Coef::one());
            cx.diffs[0].add_to(3, 1, -Coef::one());
            cx.diffs[0].add_to(3, 2, int(n));
            cx
        }
        PresTag::D(m) | PresTag::DRight(m) => {
            let right = matches!(pres.tag, PresTag::DRight(_));
            let mut cx = FreeComplexR::from_summands(
                ring,
                0,
                vec![
                    vec![Summand::new(SummandKind::R, -1)],
                    vec![Summand::new(SummandKind::R, 1)],
                ],
                !right,
                right,
            );
            cx.diffs[0].add_to(1, 0, int(m));
            cx
        }
        PresTag::E => {
            let mut cx = FreeComplexR::from_summands(
                ring,
                0,
                vec![
                    vec![Summand::new(SummandKind::RR, 0)],
                    vec![Summand::new(SummandKind::R, 1)],
                ],
                true,
                true,
            );
            cx.diffs[0].add_to(0, 0, Coef::one());
            cx.diffs[0].add_to(1, 1, Coef::one());
            cx.diffs[0].add_to(1, 2, Coef::one());
            cx
        }
        PresTag::Runit => FreeComplexR::from_summands(
            ring,
            0,
            vec![vec![Summand::new(SummandKind::R, -1)]],
            true,
            true,
        ),
    };
    cx = cx.shift_h(pres.h_shift).shift_q(pres.q_shift);
    cx
}

/// An R-basis of one side of a complex: per degree, the change of basis
/// exhibiting the action as pairs (v, Xv).
pub struct RBasis {
    /// Per degree: (w, w_inv, pairs). Columns of `w`: first `pairs` columns
    /// are the R-generators, the next `pairs` are their X-partners in order.
    pub per_degree: Vec<(Mat, Mat, usize)>,
    /// q-degree of each R-generator, per degree.
    pub gen_qs: Vec<Vec<i32>>,
}

/// Extract an R-basis from the designated action via Smith normal form.
/// Fails when a non-unit elementary divisor certifies non-freeness.
pub fn r_basis(m: &FreeComplexR, side: Side) -> Result<RBasis, RmodError> {
    let side_name = match side {
        Side::Left => "left",
        Side::Right => "right",
    };
    let acts = m
        .action(side)
        .ok_or(RmodError::MissingAction(side_name))?;
    let mut per_degree = Vec::new();
    let mut gen_qs = Vec::new();
    for (i, act) in acts.iter().enumerate() {
        let h = m.min_h + i as i32;
        let dim = m.gens[i].len();
        let mut qs: Vec<i32> = m.gens[i].clone();
        qs.sort_unstable();
        qs.dedup();
        qs.reverse();
        let mut m_vecs: Vec<(i32, Vec<Coef>)> = Vec::new();
        for &q in &qs {
            let src: Vec<usize> = (0..dim).filter(|&g| m.gens[i][g] == q).collect();
            let tgt: Vec<usize> = (0..dim).filter(|&g| m.gens[i][g] == q - 2).collect();
            if src.is_empty() {
                continue;
            }
            let mut block = Mat::zero(tgt.len(), src.len());
            for (rr, &gr) in tgt.iter().enumerate() {
                for (cc, &gc) in src.iter().enumerate() {
                    *block.at_mut(rr, cc) = act.get(gr, gc);
                }
            }
            let snf = smith(&block, m.ring);
            for d in 0..snf.rank {
                let v = snf.s.at(d, d);
                if !m.ring.is_unit(v) {
                    return Err(RmodError::NotFree {
                        side: side_name,
                        h,
                        q,
                        divisor: v.to_string(),
                    });
                }
            }
            for d in 0..snf.rank {
                let mut full = vec![Coef::zero(); dim];
                for (cc, &gc) in src.iter().enumerate() {
                    full[gc] = snf.v.at(cc, d).clone();
                }
                m_vecs.push((q, full));
            }
        }
        let pairs = m_vecs.len();
        if 2 * pairs != dim {
            return Err(RmodError::PairingIncomplete {
                h,
                got: 2 * pairs,
                want: dim,
            });
        }
        // assemble W = [m_1..m_k | X m_1..X m_k]
        let mut w = Mat::zero(dim, dim);
        for (col, (_, v)) in m_vecs.iter().enumerate() {
            for (row, x) in v.iter().enumerate() {
                *w.at_mut(row, col) = x.clone();
            }
        }
        let act_dense = act.to_dense();
        for (col, (_, v)) in m_vecs.iter().enumerate() {
            let mut xv = vec![Coef::zero(); dim];
            for (r, row) in xv.iter_mut().enumerate() {
                for (c, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        *row += act_dense.at(r, c) * x;
                    }
                }
            }
            for (row, x) in xv.into_iter().enumerate() {
                *w.at_mut(row, pairs + col) = x;
            }
        }
        let w_inv = w.inverse(m.ring).ok_or(RmodError::PairingIncomplete {
            h,
            got: pairs * 2,
            want: dim + 1, // basis candidates do not span over the ring
        })?;
        gen_qs.push(m_vecs.iter().map(|(q, _)| *q).collect());
        per_degree.push((w, w_inv, pairs));
    }
    Ok(RBasis {
        per_degree,
        gen_qs,
    })
}

/// Tensor product over R. `m` must carry a right action and `n` a left
/// action; those two are consumed. The result keeps m's left action and n's
/// right action when present.
pub fn tensor_over_r(m: &FreeComplexR, n: &FreeComplexR) -> Result<FreeComplexR, RmodError> {
    assert_eq!(m.ring, n.ring);
    if m.right.is_none() {
        return Err(RmodError::MissingAction("right"));
    }
    if n.left.is_none() {
        return Err(RmodError::MissingAction("left"));
    }
    if m.decomp.is_some() && n.decomp.is_some() {
        typed::tensor_typed(m, n)
    } else {
        tensor_raw(m, n)
    }
}

/// Generic tensor path: extract an R-basis of `m` from its right action and
/// assemble the Leibniz differential. Output carries no decomposition.
fn tensor_raw(m: &FreeComplexR, n: &FreeComplexR) -> Result<FreeComplexR, RmodError> {
    let rb = r_basis(m, Side::Right)?;
    let ring = m.ring;
    let m_len = m.gens.len();
    let n_len = n.gens.len();
    if m_len == 0 || n_len == 0 {
        return Ok(FreeComplexR::empty(ring));
    }
    let out_len = m_len + n_len - 1;
    let min_h = m.min_h + n.min_h;

    // d_M and the left action of M in the R-basis: columns indexed by the
    // R-generators, rows split into (scalar part on m_l, X part on m_l).
    let in_basis = |mats: &Vec<SparseMat>, i: usize, next: bool| -> Mat {
        // matrix from degree i to degree i + (next as usize), conjugated
        let src = &rb.per_degree[i];
        let tgt = &rb.per_degree[i + next as usize];
        tgt.1.mul(&mats[i].to_dense()).mul(&src.0)
    };
    let d_in_basis: Vec<Mat> = (0..m_len - 1)
        .map(|i| {
            let src = &rb.per_degree[i];
            let tgt = &rb.per_degree[i + 1];
            tgt.1.mul(&m.diffs[i].to_dense()).mul(&src.0)
        })
        .collect();
    let left_in_basis: Option<Vec<Mat>> = m
        .left
        .as_ref()
        .map(|acts| (0..m_len).map(|i| in_basis(acts, i, false)).collect());

    // output generators: per out degree, blocks (i, m_k, j, n_g)
    let mut gens: Vec<Vec<i32>> = vec![vec![]; out_len];
    let mut index: BTreeMap<(usize, usize, usize, usize), usize> = BTreeMap::new();
    for t in 0..out_len {
        for i in 0..m_len {
            let Some(j) = t.checked_sub(i) else { continue };
            if j >= n_len {
                continue;
            }
            for k in 0..rb.gen_qs[i].len() {
                for g in 0..n.gens[j].len() {
                    let idx = gens[t].len();
                    gens[t].push(rb.gen_qs[i][k] + n.gens[j][g] - 1);
                    index.insert((i, j, k, g), idx);
                }
            }
        }
    }

    let dims: Vec<usize> = gens.iter().map(Vec::len).collect();
    let mut diffs: Vec<SparseMat> = (0..out_len - 1)
        .map(|t| SparseMat::zero(dims[t + 1], dims[t]))
        .collect();
    let mut left_out: Option<Vec<SparseMat>> = m
        .left
        .as_ref()
        .map(|_| (0..out_len).map(|t| SparseMat::zero(dims[t], dims[t])).collect());
    let mut right_out: Option<Vec<SparseMat>> = n
        .right
        .as_ref()
        .map(|_| (0..out_len).map(|t| SparseMat::zero(dims[t], dims[t])).collect());

    let n_left = n.left.as_ref().unwrap();
    for t in 0..out_len {
        for i in 0..m_len {
            let Some(j) = t.checked_sub(i) else { continue };
            if j >= n_len {
                continue;
            }
            let pairs_i = rb.per_degree[i].2;
            for k in 0..pairs_i {
                for g in 0..n.gens[j].len() {
                    let src = index[&(i, j, k, g)];
                    // M part: d_M(m_k) = Σ_l (a + bX) m_l
                    if i + 1 < m_len {
                        let d = &d_in_basis[i];
                        let pairs_next = rb.per_degree[i + 1].2;
                        for l in 0..pairs_next {
                            let a = d.at(l, k);
                            if !a.is_zero() {
                                let tgt = index[&(i + 1, j, l, g)];
                                diffs[t].add_to(tgt, src, a.clone());
                            }
                            let b = d.at(pairs_next + l, k);
                            if !b.is_zero() {
                                // m_l X ⊗ n = m_l ⊗ Xn through N's left action
                                for (&(r, c), v) in &n_left[j].entries {
                                    if c as usize == g {
                                        let tgt = index[&(i + 1, j, l, r as usize)];
                                        diffs[t].add_to(tgt, src, b.clone() * v);
                                    }
                                }
                            }
                        }
                    }
                    // N part with Koszul sign (−1)^{|m|}
                    if j + 1 < n_len {
                        let sign = if (m.min_h + i as i32).rem_euclid(2) == 0 {
                            Coef::one()
                        } else {
                            -Coef::one()
                        };
                        for (&(r, c), v) in &n.diffs[j].entries {
                            if c as usize == g {
                                let tgt = index[&(i, j + 1, k, r as usize)];
                                diffs[t].add_to(tgt, src, &sign * v);
                            }
                        }
                    }
                    // surviving actions
                    if let (Some(out), Some(lm)) = (&mut left_out, &left_in_basis) {
                        let lmat = &lm[i];
                        let pairs_same = rb.per_degree[i].2;
                        for l in 0..pairs_same {
                            let a = lmat.at(l, k);
                            if !a.is_zero() {
                                let tgt = index[&(i, j, l, g)];
                                out[t].add_to(tgt, src, a.clone());
                            }
                            let b = lmat.at(pairs_same + l, k);
                            if !b.is_zero() {
                                for (&(r, c), v) in &n_left[j].entries {
                                    if c as usize == g {
                                        let tgt = index[&(i, j, l, r as usize)];
                                        out[t].add_to(tgt, src, b.clone() * v);
                                    }
                                }
                            }
                        }
                    }
                    if let (Some(out), Some(racts)) = (&mut right_out, &n.right) {
                        for (&(r, c), v) in &racts[j].entries {
                            if c as usize == g {
                                let tgt = index[&(i, j, k, r as usize)];
                                out[t].add_to(tgt, src, v.clone());
                            }
                        }
                    }
                }
            }
        }
    }

    let out = FreeComplexR {
        ring,
        min_h,
        gens,
        diffs,
        left: left_out,
        right: right_out,
        decomp: None,
    };
    #[cfg(debug_assertions)]
    out.validate();
    Ok(out)
}

/// Parse presentation expressions: `C(3)[8]{25}`, `D(2)[2]{7}`, `E{12}`,
/// `Runit{3}`, combined with `(x)` for ⊗_R and `(+)` for ⊕.
pub fn parse_presentation_expr(text: &str) -> Result<PresExpr, String> {
    let mut p = PresParser {
        text: text.trim(),
        pos: 0,
    };
    let e = p.parse_sum()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(format!("trailing input at `{}`", &p.text[p.pos..]));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresExpr {
    Pres(RPresentation),
    Tensor(Box<PresExpr>, Box<PresExpr>),
    Sum(Box<PresExpr>, Box<PresExpr>),
}

impl PresExpr {
    pub fn eval(&self, ring: Ring) -> Result<FreeComplexR, RmodError> {
        match self {
            PresExpr::Pres(p) => Ok(expand(p, ring)),
            PresExpr::Tensor(a, b) => tensor_over_r(&a.eval(ring)?, &b.eval(ring)?),
            PresExpr::Sum(a, b) => Ok(a.eval(ring)?.direct_sum(&b.eval(ring)?)),
        }
    }
}

struct PresParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> PresParser<'a> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn parse_sum(&mut self) -> Result<PresExpr, String> {
        let mut e = self.parse_tensor()?;
        while self.eat("(+)") {
            let rhs = self.parse_tensor()?;
            e = PresExpr::Sum(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_tensor(&mut self) -> Result<PresExpr, String> {
        let mut e = self.parse_atom()?;
        while self.eat("(x)") {
            let rhs = self.parse_atom()?;
            e = PresExpr::Tensor(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_int(&mut self) -> Result<i64, String> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let end = rest
            .char_indices()
            .take_while(|(i, c)| c.is_ascii_digit() || (*i == 0 && *c == '-'))
            .count();
        if end == 0 {
            return Err(format!("expected integer at `{rest}`"));
        }
        let (num, _) = rest.split_at(end);
        self.pos += end;
        num.parse().map_err(|e| format!("bad integer `{num}`: {e}"))
    }

    fn parse_atom(&mut self) -> Result<PresExpr, String> {
        self.skip_ws();
        if self.eat("(") {
            // parenthesized subexpression (not followed by x/+ marker)
            let e = self.parse_sum()?;
            if !self.eat(")") {
                return Err("unclosed parenthesis".into());
            }
            return Ok(self.parse_shifts_into(e)?);
        }
        let tag = if self.eat("C(") {
            let n = self.parse_int()?;
            if !self.eat(")") {
                return Err("unclosed C(".into());
            }
            PresTag::C(n)
        } else if self.eat("Dright(") {
            let m = self.parse_int()?;
            if !self.eat(")") {
                return Err("unclosed Dright(".into());
            }
            PresTag::DRight(m)
        } else if self.eat("D(") {
            let m = self.parse_int()?;
            if !self.eat(")") {
                return Err("unclosed D(".into());
            }
            PresTag::D(m)
        } else if self.eat("Runit") {
            PresTag::Runit
        } else if self.eat("E") {
            PresTag::E
        } else {
            return Err(format!(
                "expected presentation at `{}`",
                &self.text[self.pos..]
            ));
        };
        let mut pres = RPresentation::new(tag);
        if self.eat("[") {
            pres.h_shift = self.parse_int()? as i32;
            if !self.eat("]") {
                return Err("unclosed [".into());
            }
        }
        if self.eat("{") {
            pres.q_shift = self.parse_int()? as i32;
            if !self.eat("}") {
                return Err("unclosed {".into());
            }
        }
        Ok(PresExpr::Pres(pres))
    }

    fn parse_shifts_into(&mut self, e: PresExpr) -> Result<PresExpr, String> {
        // shifts after a parenthesized group are not supported; keep grammar small
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::coef_int;

    #[test]
    fn expand_c3_matrix() {
        let cx = expand(&RPresentation::new(PresTag::C(3)), Ring::Z);
        cx.validate();
        let d = cx.diffs[0].to_dense();
        let expect = Mat::from_int_rows(&[
            &[0, 0, 0, 0],
            &[3, 0, 0, 0],
            &[-1, 0, 0, 0],
            &[0, -1, 3, 0],
        ]);
        assert_eq!(d, expect);
        assert_eq!(cx.gens[0], vec![1, -1, -1, -3]);
        assert_eq!(cx.gens[1], vec![3, 1, 1, -1]);
    }

    #[test]
    fn expand_d2() {
        let cx = expand(&RPresentation::new(PresTag::D(2)), Ring::Z);
        cx.validate();
        assert_eq!(cx.diffs[0].get(1, 0), coef_int(2));
        assert!(cx.right.is_none());
        assert_eq!(cx.gens[0], vec![0, -2]);
        assert_eq!(cx.gens[1], vec![2, 0]);
    }

    #[test]
    fn expand_e_mu() {
        let cx = expand(&RPresentation::new(PresTag::E), Ring::Z);
        cx.validate();
        let d = cx.diffs[0].to_dense();
        assert_eq!(d, Mat::from_int_rows(&[&[1, 0, 0, 0], &[0, 1, 1, 0]]));
    }

    #[test]
    fn shifts_apply() {
        let cx = expand(&RPresentation::shifted(PresTag::C(3), 8, 25), Ring::Zp(3));
        assert_eq!(cx.min_h, 8);
        assert_eq!(cx.gens[0], vec![26, 24, 24, 22]);
        cx.validate();
    }

    #[test]
    fn r_basis_of_rr() {
        // R⊗R with the left action has R-basis {1⊗1, 1⊗X}
        let cx = expand(&RPresentation::new(PresTag::Runit), Ring::Z);
        let rb = r_basis(&cx, Side::Left).unwrap();
        assert_eq!(rb.per_degree[0].2, 1);

        let e = expand(&RPresentation::new(PresTag::E), Ring::Z);
        let rb = r_basis(&e, Side::Left).unwrap();
        assert_eq!(rb.per_degree[0].2, 2); // R⊗R is free of rank 2
        assert_eq!(rb.gen_qs[0], vec![2, 0]);
    }

    #[test]
    fn r_basis_rejects_zero_action() {
        let mut cx = expand(&RPresentation::new(PresTag::Runit), Ring::Z);
        cx.left = Some(vec![SparseMat::zero(2, 2)]);
        cx.decomp = None;
        assert!(matches!(
            r_basis(&cx, Side::Left),
            Err(RmodError::PairingIncomplete { .. })
        ));
    }

    #[test]
    fn presentation_parser() {
        let e = parse_presentation_expr("C(3)[8]{25} (x) E{12} (+) D(2)[2]{7}").unwrap();
        match e {
            PresExpr::Sum(a, _) => match *a {
                PresExpr::Tensor(l, _) => {
                    assert_eq!(
                        *l,
                        PresExpr::Pres(RPresentation::shifted(PresTag::C(3), 8, 25))
                    );
                }
                other => panic!("expected tensor, got {other:?}"),
            },
            other => panic!("expected sum, got {other:?}"),
        }
        assert!(parse_presentation_expr("C(3) junk").is_err());
    }
}
