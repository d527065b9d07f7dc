//! The dotted cobordism category with local relations: objects are planar
//! tangle smoothings, morphisms are linear combinations of dotted surfaces.
//!
//! Normal form: every surface component is a disk with at most one dot, so a
//! morphism term is a dot assignment on the boundary cycles determined by
//! the source and target matchings (plus their closed circles). Gluing of
//! any kind goes through [`Assembly`], which tracks Euler characteristics of
//! the glued pieces and applies the relations: undotted sphere 0, dotted
//! sphere 1, two dots 0, and neck-cutting for genus and multi-cycle
//! components.

use crate::ring::{Coef, Ring};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type Point = u32;

/// A planar tangle smoothing: a perfect matching of the boundary points plus
/// closed circles. Circles carry a tag byte recording which basepoints they
/// swallowed; arcs likewise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Obj {
    pub arcs: Vec<(Point, Point)>,
    pub arc_tags: Vec<u8>,
    pub circles: Vec<u8>,
    pub qshift: i32,
}

impl Obj {
    pub fn new(mut pairs: Vec<(Point, Point)>, qshift: i32) -> Obj {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        let mut idx: Vec<usize> = (0..pairs.len()).collect();
        idx.sort_by_key(|&i| pairs[i]);
        Obj {
            arcs: idx.iter().map(|&i| pairs[i]).collect(),
            arc_tags: vec![0; pairs.len()],
            circles: Vec::new(),
            qshift,
        }
    }

    pub fn same_shape(&self, other: &Obj) -> bool {
        self.arcs == other.arcs && self.circles.len() == other.circles.len()
    }

    pub fn arc_at(&self, p: Point) -> Option<usize> {
        self.arcs.iter().position(|&(a, b)| a == p || b == p)
    }

    pub fn partner(&self, p: Point) -> Option<Point> {
        self.arcs
            .iter()
            .find(|&&(a, b)| a == p || b == p)
            .map(|&(a, b)| if a == p { b } else { a })
    }

    fn insert_arc(&mut self, a: Point, b: Point, tag: u8) {
        let pair = (a.min(b), a.max(b));
        let pos = self.arcs.partition_point(|&x| x < pair);
        self.arcs.insert(pos, pair);
        self.arc_tags.insert(pos, tag);
    }

    fn remove_arc(&mut self, idx: usize) -> ((Point, Point), u8) {
        let pair = self.arcs.remove(idx);
        let tag = self.arc_tags.remove(idx);
        (pair, tag)
    }

    /// Join the loose ends at x and y through a bridge arc (a tensor cap or
    /// a closure arc). When x and y bound the same arc, it closes into a
    /// circle. Returns the new object and whether a circle formed.
    pub fn bridge(&self, x: Point, y: Point, bridge_tag: u8) -> (Obj, bool) {
        let mut out = self.clone();
        let ax = out.arc_at(x).expect("x on boundary");
        let px = out.partner(x).unwrap();
        if px == y {
            let (_, tag) = out.remove_arc(ax);
            out.circles.push(tag | bridge_tag);
            (out, true)
        } else {
            let (_, tagx) = out.remove_arc(ax);
            let ay = out.arc_at(y).expect("y on boundary");
            let py = out.partner(y).unwrap();
            let (_, tagy) = out.remove_arc(ay);
            out.insert_arc(px, py, tagx | tagy | bridge_tag);
            (out, false)
        }
    }

    pub fn with_cup(&self, a: Point, b: Point) -> Obj {
        let mut out = self.clone();
        out.insert_arc(a, b, 0);
        out
    }

    pub fn drop_circle(&self, c: usize, dq: i32) -> Obj {
        let mut out = self.clone();
        out.circles.remove(c);
        out.qshift += dq;
        out
    }
}

/// Boundary cycles of a morphism between two objects on the same point set:
/// alternating source/target arcs glued along the side lines, plus one cycle
/// per closed circle on either end. Numbering is canonical: arc cycles by
/// least boundary point, then source circles, then target circles.
pub struct Cycles {
    pub count: usize,
    pub of_src_arc: Vec<usize>,
    pub of_tgt_arc: Vec<usize>,
    pub of_src_circle: Vec<usize>,
    pub of_tgt_circle: Vec<usize>,
    pub at_point: BTreeMap<Point, usize>,
}

pub fn cycles(src: &Obj, tgt: &Obj) -> Cycles {
    debug_assert_eq!(
        src.arcs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect::<std::collections::BTreeSet<_>>(),
        tgt.arcs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect::<std::collections::BTreeSet<_>>(),
        "morphism endpoints live on the same boundary"
    );
    let mut of_src_arc = vec![usize::MAX; src.arcs.len()];
    let mut of_tgt_arc = vec![usize::MAX; tgt.arcs.len()];
    let mut at_point: BTreeMap<Point, usize> = BTreeMap::new();
    let mut count = 0;
    let mut points: Vec<Point> = src.arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
    points.sort_unstable();
    for &start in &points {
        if at_point.contains_key(&start) {
            continue;
        }
        let id = count;
        count += 1;
        let mut p = start;
        loop {
            let sa = src.arc_at(p).unwrap();
            of_src_arc[sa] = id;
            at_point.insert(p, id);
            let p2 = src.partner(p).unwrap();
            at_point.insert(p2, id);
            let ta = tgt.arc_at(p2).unwrap();
            of_tgt_arc[ta] = id;
            p = tgt.partner(p2).unwrap();
            if p == start {
                break;
            }
        }
    }
    let of_src_circle: Vec<usize> = (0..src.circles.len()).map(|i| count + i).collect();
    count += src.circles.len();
    let of_tgt_circle: Vec<usize> = (0..tgt.circles.len()).map(|i| count + i).collect();
    count += tgt.circles.len();
    Cycles {
        count,
        of_src_arc,
        of_tgt_arc,
        of_src_circle,
        of_tgt_circle,
        at_point,
    }
}

/// A morphism: finite sum of normalized dotted surfaces between two fixed
/// objects, stored as dot masks over the boundary cycles.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Mor {
    pub terms: BTreeMap<u64, Coef>,
}

impl Mor {
    pub fn zero() -> Mor {
        Mor {
            terms: BTreeMap::new(),
        }
    }

    pub fn single(mask: u64, c: Coef) -> Mor {
        let mut m = Mor::zero();
        m.add_term(mask, c);
        m
    }

    /// The dotless all-disk term; the identity between circle-free objects
    /// of equal matching.
    pub fn identity() -> Mor {
        Mor::single(0, Coef::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mask: u64, c: Coef) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mask).or_insert_with(Coef::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&mut self, other: &Mor) {
        for (&m, c) in &other.terms {
            self.add_term(m, c.clone());
        }
    }

    pub fn scaled(&self, s: &Coef) -> Mor {
        let mut out = Mor::zero();
        for (&m, c) in &self.terms {
            out.add_term(m, c * s);
        }
        out
    }

    pub fn negated(&self) -> Mor {
        self.scaled(&-Coef::one())
    }

    /// The unit coefficient when this is u·identity: a single dotless term
    /// between equal circle-free shapes with equal quantum shift.
    pub fn iso_unit(&self, ring: Ring, src: &Obj, tgt: &Obj) -> Option<Coef> {
        if !src.same_shape(tgt)
            || !src.circles.is_empty()
            || !tgt.circles.is_empty()
            || src.qshift != tgt.qshift
            || self.terms.len() != 1
        {
            return None;
        }
        let (&mask, c) = self.terms.iter().next().unwrap();
        if mask != 0 || !ring.is_unit(c) {
            return None;
        }
        Some(c.clone())
    }
}

/// Surface gluing workspace: pieces carry an Euler characteristic and a dot
/// count; links are interval gluings (each lowers χ by one) or circle
/// gluings (χ unchanged).
#[derive(Default)]
pub struct Assembly {
    chi: Vec<i32>,
    dots: Vec<u32>,
    parent: Vec<usize>,
    interval_links: Vec<(usize, usize)>,
}

impl Assembly {
    pub fn new() -> Assembly {
        Assembly::default()
    }

    pub fn piece(&mut self, chi: i32, dots: u32) -> usize {
        self.chi.push(chi);
        self.dots.push(dots);
        let id = self.parent.len();
        self.parent.push(id);
        id
    }

    fn root(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Glue along an interval (a side line or a middle arc).
    pub fn link(&mut self, a: usize, b: usize) {
        self.interval_links.push((a, b));
        let (ra, rb) = (self.root(a), self.root(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    /// Glue along a circle.
    pub fn merge(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    /// Normalize the glued surface. `cycle_witness[c]` names a piece on the
    /// component that boundary cycle `c` belongs to. Returns the terms
    /// (dot mask, coefficient) scaled by `coeff`; empty when a relation
    /// kills the surface.
    pub fn finish(mut self, cycle_witness: &[usize], coeff: Coef) -> Vec<(u64, Coef)> {
        let n = self.parent.len();
        let mut comp_chi: BTreeMap<usize, i32> = BTreeMap::new();
        let mut comp_dots: BTreeMap<usize, u32> = BTreeMap::new();
        for i in 0..n {
            let r = self.root(i);
            *comp_chi.entry(r).or_insert(0) += self.chi[i];
            *comp_dots.entry(r).or_insert(0) += self.dots[i];
        }
        let links = std::mem::take(&mut self.interval_links);
        for (a, _) in links {
            let r = self.root(a);
            *comp_chi.get_mut(&r).unwrap() -= 1;
        }
        let mut comp_cycles: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (cyc, &w) in cycle_witness.iter().enumerate() {
            let r = self.root(w);
            comp_cycles.entry(r).or_default().push(cyc);
        }
        let mut scalar = coeff;
        let mut comp_choices: Vec<Vec<u64>> = Vec::new();
        for (&r, &chi) in &comp_chi {
            let mut dots = comp_dots[&r];
            let cyl: &[usize] = comp_cycles.get(&r).map(Vec::as_slice).unwrap_or(&[]);
            let b = cyl.len() as i32;
            if b == 0 {
                debug_assert!(chi % 2 == 0, "closed surface has even χ, got {chi}");
                let genus = (2 - chi) / 2;
                let v = match (genus, dots) {
                    (0, 1) => Coef::one(),
                    (1, 0) => Coef::from_integer(2.into()),
                    _ => Coef::zero(),
                };
                if v.is_zero() {
                    return Vec::new();
                }
                scalar *= v;
                continue;
            }
            let two_g = 2 - chi - b;
            debug_assert!(two_g >= 0 && two_g % 2 == 0, "χ={chi}, b={b}");
            let genus = two_g / 2;
            if genus >= 2 || (genus == 1 && dots >= 1) {
                return Vec::new();
            }
            if genus == 1 {
                scalar *= Coef::from_integer(2.into());
                dots = 1;
            }
            if dots >= 2 {
                return Vec::new();
            }
            let full = cyl.iter().fold(0u64, |m, &c| m | (1 << c));
            if dots == 1 {
                comp_choices.push(vec![full]);
            } else {
                comp_choices.push(cyl.iter().map(|&c| full & !(1 << c)).collect());
            }
        }
        let mut out: Vec<(u64, Coef)> = vec![(0, scalar)];
        for choices in comp_choices {
            let mut next = Vec::with_capacity(out.len() * choices.len());
            for (mask, c) in &out {
                for &add in &choices {
                    next.push((mask | add, c.clone()));
                }
            }
            out = next;
        }
        out
    }
}

/// g ∘ f for f: a → b and g: b → c. Bilinear; each pair of normalized terms
/// is glued along b and renormalized.
pub fn compose(g: &Mor, f: &Mor, a: &Obj, b: &Obj, c: &Obj) -> Mor {
    let fc = cycles(a, b);
    let gc = cycles(b, c);
    let oc = cycles(a, c);
    let mut out = Mor::zero();
    for (&fmask, fcoef) in &f.terms {
        for (&gmask, gcoef) in &g.terms {
            let mut asm = Assembly::new();
            let fp: Vec<usize> = (0..fc.count)
                .map(|i| asm.piece(1, ((fmask >> i) & 1) as u32))
                .collect();
            let gp: Vec<usize> = (0..gc.count)
                .map(|i| asm.piece(1, ((gmask >> i) & 1) as u32))
                .collect();
            for i in 0..b.arcs.len() {
                asm.link(fp[fc.of_tgt_arc[i]], gp[gc.of_src_arc[i]]);
            }
            for i in 0..b.circles.len() {
                asm.merge(fp[fc.of_tgt_circle[i]], gp[gc.of_src_circle[i]]);
            }
            let mut witness = vec![usize::MAX; oc.count];
            for (i, &cy) in oc.of_src_arc.iter().enumerate() {
                if witness[cy] == usize::MAX {
                    witness[cy] = fp[fc.of_src_arc[i]];
                }
            }
            for (i, &cy) in oc.of_tgt_arc.iter().enumerate() {
                if witness[cy] == usize::MAX {
                    witness[cy] = gp[gc.of_tgt_arc[i]];
                }
            }
            for (i, &cy) in oc.of_src_circle.iter().enumerate() {
                witness[cy] = fp[fc.of_src_circle[i]];
            }
            for (i, &cy) in oc.of_tgt_circle.iter().enumerate() {
                witness[cy] = gp[gc.of_tgt_circle[i]];
            }
            debug_assert!(witness.iter().all(|&w| w != usize::MAX));
            for (mask, coef) in asm.finish(&witness, fcoef * gcoef) {
                out.add_term(mask, coef);
            }
        }
    }
    out
}

/// Degree of a normalized term: χ − |B|/2 − 2·dots; every component is a
/// disk, so χ is the cycle count.
pub fn term_degree(mask: u64, ncycles: usize, npoints: usize) -> i32 {
    ncycles as i32 - (npoints / 2) as i32 - 2 * mask.count_ones() as i32
}

/// Common degree of all terms, if homogeneous; None for inhomogeneous,
/// Some(None)-like semantics avoided: the zero morphism reports Some(0).
pub fn morphism_degree(m: &Mor, src: &Obj, tgt: &Obj) -> Option<i32> {
    let cy = cycles(src, tgt);
    let npoints = src.arcs.len() * 2;
    let mut deg = None;
    for &mask in m.terms.keys() {
        let d = term_degree(mask, cy.count, npoints);
        match deg {
            None => deg = Some(d),
            Some(prev) if prev != d => return None,
            _ => {}
        }
    }
    Some(deg.unwrap_or(0))
}

/// The four delooping morphisms for circle `c` of `obj`:
/// out⁺ = dotted cap (onto qshift+1), out⁻ = cap (onto qshift−1),
/// in⁺ = cup, in⁻ = dotted cup, satisfying out⁻∘in⁺ = 0 = out⁺∘in⁻ and
/// out⁺∘in⁺ = 1 = out⁻∘in⁻ … see the biorthogonality tests.
pub struct DeloopMaps {
    pub obj_plus: Obj,
    pub obj_minus: Obj,
    pub out_plus: Mor,
    pub out_minus: Mor,
    pub in_plus: Mor,
    pub in_minus: Mor,
}

/// Identity-with-cap/cup builder: identity on arcs and on the other circles
/// (which neck-cut into dotted pairs), cap or cup on circle `c`.
fn circle_end_morphism(obj: &Obj, other: &Obj, c: usize, circle_on_src: bool, dot: bool) -> Mor {
    let (src, tgt) = if circle_on_src {
        (obj, other)
    } else {
        (other, obj)
    };
    let cy = cycles(src, tgt);
    let special = if circle_on_src {
        cy.of_src_circle[c]
    } else {
        cy.of_tgt_circle[c]
    };
    let mut asm = Assembly::new();
    let mut piece_of_cycle: Vec<usize> = vec![usize::MAX; cy.count];
    // arc cycles: one square each
    for i in 0..cy.count {
        if piece_of_cycle[i] == usize::MAX && i < cy.count {
            // assigned below for circles; arcs here
            piece_of_cycle[i] = usize::MAX;
        }
    }
    for &i in cy.of_src_arc.iter().chain(cy.of_tgt_arc.iter()) {
        if piece_of_cycle[i] == usize::MAX {
            piece_of_cycle[i] = asm.piece(1, 0);
        }
    }
    // the capped circle
    piece_of_cycle[special] = asm.piece(1, u32::from(dot));
    // remaining circles pair up src/tgt as cylinders (χ 0)
    for j in 0..obj.circles.len() {
        if j == c {
            continue;
        }
        let other_idx = if j < c { j } else { j - 1 };
        let (sc, tc) = if circle_on_src {
            (cy.of_src_circle[j], cy.of_tgt_circle[other_idx])
        } else {
            (cy.of_src_circle[other_idx], cy.of_tgt_circle[j])
        };
        let p = asm.piece(0, 0);
        piece_of_cycle[sc] = p;
        piece_of_cycle[tc] = p;
    }
    debug_assert!(piece_of_cycle.iter().all(|&p| p != usize::MAX));
    let mut m = Mor::zero();
    for (mask, coef) in asm.finish(&piece_of_cycle, Coef::one()) {
        m.add_term(mask, coef);
    }
    m
}

pub fn deloop_maps(obj: &Obj, c: usize) -> DeloopMaps {
    assert!(c < obj.circles.len(), "no circle to deloop");
    let obj_plus = obj.drop_circle(c, 1);
    let obj_minus = obj.drop_circle(c, -1);
    DeloopMaps {
        out_plus: circle_end_morphism(obj, &obj_plus, c, true, true),
        out_minus: circle_end_morphism(obj, &obj_minus, c, true, false),
        in_plus: circle_end_morphism(obj, &obj_plus, c, false, false),
        in_minus: circle_end_morphism(obj, &obj_minus, c, false, true),
        obj_plus,
        obj_minus,
    }
}
