//! The scanning reduction engine: build one-crossing complexes, tensor them
//! in, deloop, Gaussian-eliminate, close strands progressively, and evaluate
//! the closed diagram to a free complex with basepoint actions.

use crate::braid::ClosurePlan;
use crate::cob::{compose, cycles, deloop_maps, morphism_degree, Assembly, Mor, Obj, Point};
use crate::ring::{Coef, Ring};
use crate::rmod::{FreeComplexR, SparseMat, Summand, SummandKind};
use num_traits::One;
use std::collections::BTreeMap;

/// A cochain complex in the cobordism category. Degrees are internal
/// (starting at 0); the global shift [−n₋]{n₊−2n₋} is applied at closure.
#[derive(Clone, Debug, Default)]
pub struct CobComplex {
    pub degrees: Vec<Vec<Obj>>,
    /// diffs[h]: (target index, source index) → morphism.
    pub diffs: Vec<BTreeMap<(usize, usize), Mor>>,
}

impl CobComplex {
    pub fn object_counts(&self) -> Vec<usize> {
        self.degrees.iter().map(Vec::len).collect()
    }

    pub fn total_objects(&self) -> usize {
        self.degrees.iter().map(Vec::len).sum()
    }

    /// d∘d = 0 and degree homogeneity of every entry (net degree zero
    /// including quantum shifts). Panics with context on failure.
    pub fn check(&self) {
        for (h, d) in self.diffs.iter().enumerate() {
            for (&(t, s), f) in d {
                let src = &self.degrees[h][s];
                let tgt = &self.degrees[h + 1][t];
                let deg = morphism_degree(f, src, tgt)
                    .unwrap_or_else(|| panic!("inhomogeneous entry at degree {h} ({t},{s})"));
                if !f.is_zero() {
                    assert_eq!(
                        deg + tgt.qshift - src.qshift,
                        0,
                        "entry at degree {h} ({t},{s}) has net degree ≠ 0"
                    );
                }
            }
            if h + 1 < self.diffs.len() {
                let mut squares: BTreeMap<(usize, usize), Mor> = BTreeMap::new();
                for (&(t, s), f) in d {
                    for (&(t2, t1), g) in &self.diffs[h + 1] {
                        if t1 != t {
                            continue;
                        }
                        let comp = compose(
                            g,
                            f,
                            &self.degrees[h][s],
                            &self.degrees[h + 1][t],
                            &self.degrees[h + 2][t2],
                        );
                        squares
                            .entry((t2, s))
                            .or_insert_with(Mor::zero)
                            .add(&comp);
                    }
                }
                for ((t2, s), m) in squares {
                    assert!(m.is_zero(), "d² ≠ 0 at degree {h}: ({t2} ← {s}) = {m:?}");
                }
            }
        }
    }
}

/// Scanning state: the complex so far plus the open boundary bookkeeping.
#[derive(Clone, Debug)]
pub struct ScanState {
    pub ring: Ring,
    pub complex: CobComplex,
    pub strands: usize,
    /// current top point of each open strand position (None once closed)
    pub tops: Vec<Option<Point>>,
    pub bottoms: Vec<Option<Point>>,
    pub n_plus: usize,
    pub n_minus: usize,
    /// positions whose closure arc carries a basepoint: (position, tag bit)
    pub based: Vec<(usize, u8)>,
    pub check_every_step: bool,
}

impl ScanState {
    /// The trivial tangle: n vertical strands, one object, zero differential.
    pub fn new(ring: Ring, strands: usize) -> ScanState {
        let arcs: Vec<(Point, Point)> = (0..strands as u32)
            .map(|i| (i, strands as u32 + i))
            .collect();
        ScanState {
            ring,
            complex: CobComplex {
                degrees: vec![vec![Obj::new(arcs, 0)]],
                diffs: vec![],
            },
            strands,
            tops: (0..strands).map(|i| Some((strands + i) as Point)).collect(),
            bottoms: (0..strands).map(|i| Some(i as Point)).collect(),
            n_plus: 0,
            n_minus: 0,
            based: Vec::new(),
            check_every_step: false,
        }
    }

    pub fn open_points(&self) -> usize {
        self.tops.iter().flatten().count() + self.bottoms.iter().flatten().count()
    }

    fn maybe_check(&self) {
        if self.check_every_step {
            self.complex.check();
        }
    }
}

/// Rebuild a morphism after a bridge surgery was applied to both of its
/// endpoints: glue the bridge square at the side lines of x and y, plus a
/// fresh cup square when the surgery adds one.
#[allow(clippy::too_many_arguments)]
fn restack_bridge(
    f: &Mor,
    src: &Obj,
    tgt: &Obj,
    new_src: &Obj,
    new_tgt: &Obj,
    x: Point,
    y: Point,
    add_cup: bool,
) -> Mor {
    let fc = cycles(src, tgt);
    let oc = cycles(new_src, new_tgt);
    let mut out = Mor::zero();
    for (&mask, coef) in &f.terms {
        let mut asm = Assembly::new();
        let fp: Vec<usize> = (0..fc.count)
            .map(|i| asm.piece(1, ((mask >> i) & 1) as u32))
            .collect();
        let bridge = asm.piece(1, 0);
        asm.link(bridge, fp[fc.at_point[&x]]);
        asm.link(bridge, fp[fc.at_point[&y]]);
        let cup = if add_cup { Some(asm.piece(1, 0)) } else { None };

        let mut witness = vec![usize::MAX; oc.count];
        let cup_pair = (x.min(y), x.max(y));
        for (i, &pair) in new_src.arcs.iter().enumerate() {
            let piece = if add_cup && pair == cup_pair {
                cup.unwrap()
            } else if let Some(old) = src.arcs.iter().position(|&p| p == pair) {
                fp[fc.of_src_arc[old]]
            } else {
                bridge
            };
            let cy = oc.of_src_arc[i];
            if witness[cy] == usize::MAX {
                witness[cy] = piece;
            }
        }
        for (i, &pair) in new_tgt.arcs.iter().enumerate() {
            let piece = if add_cup && pair == cup_pair {
                cup.unwrap()
            } else if let Some(old) = tgt.arcs.iter().position(|&p| p == pair) {
                fp[fc.of_tgt_arc[old]]
            } else {
                bridge
            };
            let cy = oc.of_tgt_arc[i];
            if witness[cy] == usize::MAX {
                witness[cy] = piece;
            }
        }
        for i in 0..new_src.circles.len() {
            let piece = if i < src.circles.len() {
                fp[fc.of_src_circle[i]]
            } else {
                bridge // the freshly closed circle
            };
            let cy = oc.of_src_circle[i];
            if witness[cy] == usize::MAX {
                witness[cy] = piece;
            }
        }
        for i in 0..new_tgt.circles.len() {
            let piece = if i < tgt.circles.len() {
                fp[fc.of_tgt_circle[i]]
            } else {
                bridge
            };
            let cy = oc.of_tgt_circle[i];
            if witness[cy] == usize::MAX {
                witness[cy] = piece;
            }
        }
        debug_assert!(witness.iter().all(|&w| w != usize::MAX));
        for (m, c) in asm.finish(&witness, coef.clone()) {
            out.add_term(m, c);
        }
    }
    out
}

/// The saddle cobordism between the two smoothings of one crossing, tensored
/// with the identity of the rest of `base` (the unbridged object).
fn saddle_morphism(base: &Obj, src: &Obj, tgt: &Obj, x: Point, y: Point) -> Mor {
    let oc = cycles(src, tgt);
    let mut asm = Assembly::new();
    let squares: Vec<usize> = (0..base.arcs.len()).map(|_| asm.piece(1, 0)).collect();
    let zone = asm.piece(1, 0);
    let square_at = |p: Point| -> usize { squares[base.arc_at(p).expect("crossing on boundary")] };
    asm.link(zone, square_at(x));
    asm.link(zone, square_at(y));

    let mut witness = vec![usize::MAX; oc.count];
    {
        let side = |obj: &Obj, of_arc: &[usize], of_circle: &[usize], witness: &mut Vec<usize>| {
            for (i, &pair) in obj.arcs.iter().enumerate() {
                let piece = if let Some(old) = base.arcs.iter().position(|&p| p == pair) {
                    squares[old]
                } else {
                    zone // merged arc or the fresh cup
                };
                if witness[of_arc[i]] == usize::MAX {
                    witness[of_arc[i]] = piece;
                }
            }
            for i in 0..obj.circles.len() {
                // base is circle-free, so any circle came from the bridge
                if witness[of_circle[i]] == usize::MAX {
                    witness[of_circle[i]] = zone;
                }
            }
        };
        side(src, &oc.of_src_arc, &oc.of_src_circle, &mut witness);
        side(tgt, &oc.of_tgt_arc, &oc.of_tgt_circle, &mut witness);
    }
    debug_assert!(witness.iter().all(|&w| w != usize::MAX));
    let mut out = Mor::zero();
    for (m, c) in asm.finish(&witness, Coef::one()) {
        out.add_term(m, c);
    }
    out
}

/// Tensor one crossing into the state: σ at positions (j, j+1) with the
/// letter's sign. Doubles the generator count; no reduction is performed.
pub fn tensor_step(state: &mut ScanState, letter: i32) {
    let j = letter.unsigned_abs() as usize - 1;
    let positive = letter > 0;
    let x = state.tops[j].expect("position open");
    let y = state.tops[j + 1].expect("position open");
    if positive {
        state.n_plus += 1;
    } else {
        state.n_minus += 1;
    }

    let old = std::mem::take(&mut state.complex);
    let old_len = old.degrees.len();
    let mut vert: Vec<Vec<Obj>> = Vec::with_capacity(old_len);
    let mut horiz: Vec<Vec<Obj>> = Vec::with_capacity(old_len);
    for degree in &old.degrees {
        let mut v = Vec::with_capacity(degree.len());
        let mut h = Vec::with_capacity(degree.len());
        for o in degree {
            debug_assert!(o.circles.is_empty(), "tensor input is delooped");
            v.push(o.clone());
            let (bridged, _) = o.bridge(x, y, 0);
            h.push(bridged.with_cup(x, y));
        }
        vert.push(v);
        horiz.push(h);
    }
    // A-smoothing sits in degree h, B-smoothing in degree h+1 with qshift +1
    let (a_side, mut b_side) = if positive { (vert, horiz) } else { (horiz, vert) };
    for degree in b_side.iter_mut() {
        for o in degree.iter_mut() {
            o.qshift += 1;
        }
    }

    let mut degrees: Vec<Vec<Obj>> = Vec::with_capacity(old_len + 1);
    let mut a_offset: Vec<usize> = Vec::with_capacity(old_len + 1);
    let mut b_offset: Vec<usize> = Vec::with_capacity(old_len + 1);
    for h in 0..=old_len {
        let mut objs = Vec::new();
        a_offset.push(0);
        if h < old_len {
            objs.extend(a_side[h].iter().cloned());
        }
        b_offset.push(objs.len());
        if h >= 1 {
            objs.extend(b_side[h - 1].iter().cloned());
        }
        degrees.push(objs);
    }

    let mut diffs: Vec<BTreeMap<(usize, usize), Mor>> = vec![BTreeMap::new(); old_len];
    // saddles A(h) → B(h+1) with Koszul sign (−1)^h
    for h in 0..old_len {
        let sign = if h % 2 == 0 { Coef::one() } else { -Coef::one() };
        for (i, base) in old.degrees[h].iter().enumerate() {
            let (src, tgt) = (
                &degrees[h][a_offset[h] + i],
                &degrees[h + 1][b_offset[h + 1] + i],
            );
            let saddle = saddle_morphism(base, src, tgt, x, y).scaled(&sign);
            if !saddle.is_zero() {
                diffs[h].insert((b_offset[h + 1] + i, a_offset[h] + i), saddle);
            }
        }
    }
    for (h, d) in old.diffs.iter().enumerate() {
        for (&(t, s), f) in d {
            // A→A: unchanged for a positive crossing (vertical extension),
            // restacked through the bridge for a negative one
            let (asrc, atgt) = (
                &degrees[h][a_offset[h] + s],
                &degrees[h + 1][a_offset[h + 1] + t],
            );
            let fa = if positive {
                f.clone()
            } else {
                restack_bridge(
                    f,
                    &old.degrees[h][s],
                    &old.degrees[h + 1][t],
                    asrc,
                    atgt,
                    x,
                    y,
                    true,
                )
            };
            if !fa.is_zero() {
                diffs[h].insert((a_offset[h + 1] + t, a_offset[h] + s), fa);
            }
            // B→B
            let (bsrc, btgt) = (
                &degrees[h + 1][b_offset[h + 1] + s],
                &degrees[h + 2][b_offset[h + 2] + t],
            );
            let fb = if positive {
                restack_bridge(
                    f,
                    &old.degrees[h][s],
                    &old.degrees[h + 1][t],
                    bsrc,
                    btgt,
                    x,
                    y,
                    true,
                )
            } else {
                f.clone()
            };
            if !fb.is_zero() {
                diffs[h + 1].insert((b_offset[h + 2] + t, b_offset[h + 1] + s), fb);
            }
        }
    }
    state.complex = CobComplex { degrees, diffs };
    state.maybe_check();
}

/// Replace circle-carrying objects by pairs of circle-free ones with quantum
/// shifts ±1, conjugating adjacent differential entries by the deloop maps.
pub fn deloop_step(state: &mut ScanState) {
    loop {
        let mut found: Option<(usize, usize)> = None;
        'outer: for (h, degree) in state.complex.degrees.iter().enumerate() {
            for (i, o) in degree.iter().enumerate() {
                if !o.circles.is_empty() {
                    found = Some((h, i));
                    break 'outer;
                }
            }
        }
        let Some((h, i)) = found else { break };
        let obj = state.complex.degrees[h][i].clone();
        let dl = deloop_maps(&obj, 0);
        state.complex.degrees[h][i] = dl.obj_plus.clone();
        state.complex.degrees[h].insert(i + 1, dl.obj_minus.clone());
        let bump = |idx: usize| if idx > i { idx + 1 } else { idx };
        if h < state.complex.diffs.len() {
            let old: BTreeMap<(usize, usize), Mor> = std::mem::take(&mut state.complex.diffs[h]);
            let mut new = BTreeMap::new();
            for ((t, s), f) in old {
                if s == i {
                    let tgt = state.complex.degrees[h + 1][t].clone();
                    let fp = compose(&f, &dl.in_plus, &dl.obj_plus, &obj, &tgt);
                    let fm = compose(&f, &dl.in_minus, &dl.obj_minus, &obj, &tgt);
                    if !fp.is_zero() {
                        new.insert((t, i), fp);
                    }
                    if !fm.is_zero() {
                        new.insert((t, i + 1), fm);
                    }
                } else {
                    new.insert((t, bump(s)), f);
                }
            }
            state.complex.diffs[h] = new;
        }
        if h >= 1 {
            let old: BTreeMap<(usize, usize), Mor> =
                std::mem::take(&mut state.complex.diffs[h - 1]);
            let mut new = BTreeMap::new();
            for ((t, s), f) in old {
                if t == i {
                    let src = state.complex.degrees[h - 1][s].clone();
                    let fp = compose(&dl.out_plus, &f, &src, &obj, &dl.obj_plus);
                    let fm = compose(&dl.out_minus, &f, &src, &obj, &dl.obj_minus);
                    if !fp.is_zero() {
                        new.insert((i, s), fp);
                    }
                    if !fm.is_zero() {
                        new.insert((i + 1, s), fm);
                    }
                } else {
                    new.insert((bump(t), s), f);
                }
            }
            state.complex.diffs[h - 1] = new;
        }
    }
    state.maybe_check();
}

/// Cancel generator pairs joined by unit·identity entries until none remain.
/// Scan order is (degree, target, source); ±1 coefficients are preferred.
pub fn eliminate_step(state: &mut ScanState) {
    loop {
        let mut found: Option<(usize, usize, usize, Coef)> = None;
        'outer: for prefer_pm_one in [true, false] {
            for (h, d) in state.complex.diffs.iter().enumerate() {
                for (&(t, s), f) in d {
                    let src = &state.complex.degrees[h][s];
                    let tgt = &state.complex.degrees[h + 1][t];
                    if let Some(u) = f.iso_unit(state.ring, src, tgt) {
                        let pm_one = u.numer().magnitude() == &1u32.into()
                            && num_traits::One::is_one(u.denom());
                        if prefer_pm_one && !pm_one {
                            continue;
                        }
                        found = Some((h, t, s, u));
                        break 'outer;
                    }
                }
            }
        }
        let Some((h, t, s, u)) = found else { break };
        eliminate_pair(state, h, t, s, &u);
    }
    state.maybe_check();
}

fn eliminate_pair(state: &mut ScanState, h: usize, t: usize, s: usize, u: &Coef) {
    let uinv = u.recip();
    let d = &state.complex.diffs[h];
    let alphas: Vec<(usize, Mor)> = d
        .iter()
        .filter(|((tt, ss), _)| *tt == t && *ss != s)
        .map(|((_, ss), f)| (*ss, f.clone()))
        .collect();
    let betas: Vec<(usize, Mor)> = d
        .iter()
        .filter(|((tt, ss), _)| *ss == s && *tt != t)
        .map(|((tt, _), f)| (*tt, f.clone()))
        .collect();
    let cancelled_src = state.complex.degrees[h][s].clone();
    for (sp, alpha) in &alphas {
        for (tp, beta) in &betas {
            let corr = compose(
                beta,
                &alpha.scaled(&uinv),
                &state.complex.degrees[h][*sp],
                &cancelled_src,
                &state.complex.degrees[h + 1][*tp],
            );
            if corr.is_zero() {
                continue;
            }
            let entry = state.complex.diffs[h]
                .entry((*tp, *sp))
                .or_insert_with(Mor::zero);
            entry.add(&corr.negated());
            if entry.is_zero() {
                state.complex.diffs[h].remove(&(*tp, *sp));
            }
        }
    }
    state.complex.degrees[h].remove(s);
    state.complex.degrees[h + 1].remove(t);
    let remap = |d: &mut BTreeMap<(usize, usize), Mor>,
                 drop_t: Option<usize>,
                 drop_s: Option<usize>| {
        let old = std::mem::take(d);
        for ((tt, ss), f) in old {
            if Some(tt) == drop_t || Some(ss) == drop_s {
                continue;
            }
            let nt = match drop_t {
                Some(dt) if tt > dt => tt - 1,
                _ => tt,
            };
            let ns = match drop_s {
                Some(ds) if ss > ds => ss - 1,
                _ => ss,
            };
            d.insert((nt, ns), f);
        }
    };
    remap(&mut state.complex.diffs[h], Some(t), Some(s));
    if h >= 1 {
        remap(&mut state.complex.diffs[h - 1], Some(s), None);
    }
    if h + 1 < state.complex.diffs.len() {
        remap(&mut state.complex.diffs[h + 1], None, Some(t));
    }
}

/// Close one strand position: bridge its top and bottom points through a
/// closure arc on every object and entry.
pub fn close_position(state: &mut ScanState, p: usize, tag: u8) {
    let x = state.tops[p].take().expect("position open");
    let y = state.bottoms[p].take().expect("position open");
    let old = std::mem::take(&mut state.complex);
    let mut degrees: Vec<Vec<Obj>> = Vec::with_capacity(old.degrees.len());
    for degree in &old.degrees {
        degrees.push(degree.iter().map(|o| o.bridge(x, y, tag).0).collect());
    }
    let mut diffs: Vec<BTreeMap<(usize, usize), Mor>> = vec![BTreeMap::new(); old.diffs.len()];
    for (h, d) in old.diffs.iter().enumerate() {
        for (&(t, s), f) in d {
            let nf = restack_bridge(
                f,
                &old.degrees[h][s],
                &old.degrees[h + 1][t],
                &degrees[h][s],
                &degrees[h + 1][t],
                x,
                y,
                false,
            );
            if !nf.is_zero() {
                diffs[h].insert((t, s), nf);
            }
        }
    }
    state.complex = CobComplex { degrees, diffs };
    state.maybe_check();
}

/// Positions untouched by any remaining letter and not reserved for a
/// basepoint can be closed now.
fn closeable_positions(state: &ScanState, remaining: &[i32]) -> Vec<usize> {
    let mut touched = vec![false; state.strands];
    for &l in remaining {
        let j = l.unsigned_abs() as usize - 1;
        touched[j] = true;
        touched[j + 1] = true;
    }
    (0..state.strands)
        .filter(|&p| {
            state.tops[p].is_some() && !touched[p] && !state.based.iter().any(|&(bp, _)| bp == p)
        })
        .collect()
}

/// Run the scanning algorithm over the whole closure plan. Based positions
/// stay open; everything else is progressively closed, delooped, and
/// reduced.
pub fn scan_diagram(plan: &ClosurePlan, ring: Ring) -> ScanState {
    scan_diagram_logged(plan, ring, |_, _| {})
}

/// [`scan_diagram`] with d² = 0 and degree-homogeneity checks after every
/// tensor, deloop, elimination, and closure step. Used by the property
/// suites; prohibitively slow for large words.
pub fn scan_diagram_checked(plan: &ClosurePlan, ring: Ring) -> ScanState {
    let mut state = ScanState::new(ring, plan.word.strands);
    state.check_every_step = true;
    state.based = plan
        .basepoints
        .iter()
        .enumerate()
        .map(|(i, &(p, _))| (p, 1u8 << i))
        .collect();
    for p in closeable_positions(&state, &plan.word.letters) {
        close_position(&mut state, p, 0);
    }
    deloop_step(&mut state);
    eliminate_step(&mut state);
    for (k, &letter) in plan.word.letters.iter().enumerate() {
        tensor_step(&mut state, letter);
        deloop_step(&mut state);
        eliminate_step(&mut state);
        let remaining = &plan.word.letters[k + 1..];
        for p in closeable_positions(&state, remaining) {
            close_position(&mut state, p, 0);
            deloop_step(&mut state);
            eliminate_step(&mut state);
        }
    }
    state
}

/// [`scan_diagram`] with a callback after each crossing is fully reduced,
/// for stage dumps.
pub fn scan_diagram_logged(
    plan: &ClosurePlan,
    ring: Ring,
    mut on_stage: impl FnMut(usize, &ScanState),
) -> ScanState {
    let mut state = ScanState::new(ring, plan.word.strands);
    state.based = plan
        .basepoints
        .iter()
        .enumerate()
        .map(|(i, &(p, _))| (p, 1u8 << i))
        .collect();
    for p in closeable_positions(&state, &plan.word.letters) {
        close_position(&mut state, p, 0);
    }
    deloop_step(&mut state);
    eliminate_step(&mut state);
    for (k, &letter) in plan.word.letters.iter().enumerate() {
        tensor_step(&mut state, letter);
        deloop_step(&mut state);
        eliminate_step(&mut state);
        let remaining = &plan.word.letters[k + 1..];
        for p in closeable_positions(&state, remaining) {
            close_position(&mut state, p, 0);
            deloop_step(&mut state);
            eliminate_step(&mut state);
        }
        on_stage(k, &state);
    }
    state
}

/// Close the based positions, expand every circle through the sign basis,
/// and emit the free complex over the ring with one action per basepoint.
/// The global shift [−n₋]{n₊−2n₋} is applied here.
pub fn close_with_basepoints(mut state: ScanState) -> FreeComplexR {
    let based = state.based.clone();
    for &(p, tag) in &based {
        close_position(&mut state, p, tag);
    }
    let ring = state.ring;
    let n_bp = based.len();
    let global_q = state.n_plus as i32 - 2 * state.n_minus as i32;
    let min_h = -(state.n_minus as i32);

    let cx = &state.complex;
    for degree in &cx.degrees {
        for o in degree {
            assert!(o.arcs.is_empty(), "closure left open arcs");
        }
    }

    struct ObjLayout {
        kind: SummandKind,
        left_circle: Option<usize>,
        right_circle: Option<usize>,
        free_circles: Vec<usize>,
        base: usize,
    }
    let mut layouts: Vec<Vec<ObjLayout>> = Vec::with_capacity(cx.degrees.len());
    let mut decomp: Vec<Vec<Summand>> = Vec::with_capacity(cx.degrees.len());
    let mut dims: Vec<usize> = Vec::with_capacity(cx.degrees.len());
    for degree in &cx.degrees {
        let mut l = Vec::with_capacity(degree.len());
        let mut sums = Vec::new();
        let mut dim = 0usize;
        for o in degree {
            let left_circle = o.circles.iter().position(|&t| t & 1 != 0);
            let right_circle = o.circles.iter().position(|&t| t & 2 != 0);
            let free_circles: Vec<usize> = (0..o.circles.len())
                .filter(|&i| Some(i) != left_circle && Some(i) != right_circle)
                .collect();
            let kind = match (left_circle, right_circle) {
                (Some(a), Some(b)) if a != b => SummandKind::RR,
                (None, None) => SummandKind::One,
                _ => SummandKind::R,
            };
            debug_assert_eq!(
                n_bp,
                usize::from(left_circle.is_some()) + usize::from(right_circle.is_some())
            );
            let base = dim;
            for bits in 0..(1u32 << free_circles.len()) {
                let free_q: i32 = (0..free_circles.len())
                    .map(|i| if bits >> i & 1 == 0 { 1 } else { -1 })
                    .sum();
                let shift = o.qshift + free_q + global_q;
                sums.push(Summand::new(kind, shift));
                dim += kind.rank();
            }
            l.push(ObjLayout {
                kind,
                left_circle,
                right_circle,
                free_circles,
                base,
            });
        }
        layouts.push(l);
        decomp.push(sums);
        dims.push(dim);
    }

    // per-circle sign (+ = true) of a local generator index
    let signs_of = |layout: &ObjLayout, local: usize, n_circles: usize| -> Vec<bool> {
        let kind_rank = layout.kind.rank();
        let inner = local % kind_rank;
        let bits = local / kind_rank;
        let mut signs = vec![true; n_circles];
        for (i, &c) in layout.free_circles.iter().enumerate() {
            signs[c] = bits >> i & 1 == 0;
        }
        match layout.kind {
            SummandKind::One => {}
            SummandKind::R => {
                let c = layout.left_circle.or(layout.right_circle).unwrap();
                signs[c] = inner == 0;
            }
            SummandKind::RR => {
                // layout (1⊗1, X⊗1, 1⊗X, X⊗X): bit 0 flips left, bit 1 right
                signs[layout.left_circle.unwrap()] = inner & 1 == 0;
                signs[layout.right_circle.unwrap()] = inner & 2 == 0;
            }
        }
        signs
    };

    let mut diffs: Vec<SparseMat> = (0..cx.degrees.len().saturating_sub(1))
        .map(|h| SparseMat::zero(dims[h + 1], dims[h]))
        .collect();
    for (h, d) in cx.diffs.iter().enumerate() {
        for (&(t, s), f) in d {
            let src_obj = &cx.degrees[h][s];
            let tgt_obj = &cx.degrees[h + 1][t];
            let cy = cycles(src_obj, tgt_obj);
            let src_layout = &layouts[h][s];
            let tgt_layout = &layouts[h + 1][t];
            let src_count = (1usize << src_layout.free_circles.len()) * src_layout.kind.rank();
            let tgt_count = (1usize << tgt_layout.free_circles.len()) * tgt_layout.kind.rank();
            for ls in 0..src_count {
                let sv = signs_of(src_layout, ls, src_obj.circles.len());
                // dotted caps pick the + part of each source circle
                let mut base_mask = 0u64;
                for (i, &plus) in sv.iter().enumerate() {
                    if plus {
                        base_mask |= 1 << cy.of_src_circle[i];
                    }
                }
                for lt in 0..tgt_count {
                    let tv = signs_of(tgt_layout, lt, tgt_obj.circles.len());
                    let mut m = base_mask;
                    for (i, &plus) in tv.iter().enumerate() {
                        if !plus {
                            m |= 1 << cy.of_tgt_circle[i];
                        }
                    }
                    if let Some(c) = f.terms.get(&m) {
                        diffs[h].add_to(tgt_layout.base + lt, src_layout.base + ls, c.clone());
                    }
                }
            }
        }
    }

    let mut out = FreeComplexR::from_summands(ring, min_h, decomp, n_bp >= 1, n_bp >= 2);
    out.diffs = diffs;
    #[cfg(debug_assertions)]
    out.validate();
    out
}

/// One-crossing complex, as its own scan state on two strands.
pub fn crossing_complex(ring: Ring, sign: i32) -> ScanState {
    let mut state = ScanState::new(ring, 2);
    tensor_step(&mut state, if sign >= 0 { 1 } else { -1 });
    state
}

/// Canonical textual dump of the current complex (stable ordering, versioned
/// header).
pub fn dump_state(state: &ScanState, label: &str) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "# {} stage dump v1", crate::ENGINE_VERSION).unwrap();
    writeln!(out, "# stage: {label}").unwrap();
    writeln!(out, "# crossings so far: {}+ {}-", state.n_plus, state.n_minus).unwrap();
    for (h, degree) in state.complex.degrees.iter().enumerate() {
        writeln!(out, "degree {h}: {} objects", degree.len()).unwrap();
        for (i, o) in degree.iter().enumerate() {
            writeln!(
                out,
                "  obj {i}: arcs {:?} circles {} q{{{}}}",
                o.arcs,
                o.circles.len(),
                o.qshift
            )
            .unwrap();
        }
    }
    for (h, d) in state.complex.diffs.iter().enumerate() {
        for (&(t, s), f) in d {
            let terms: Vec<String> = f
                .terms
                .iter()
                .map(|(m, c)| format!("{c}·[dots {m:b}]"))
                .collect();
            writeln!(out, "d[{h}] {s} -> {t}: {}", terms.join(" + ")).unwrap();
        }
    }
    out
}
