//! Brute-force cube-of-resolutions oracle: the full 2ⁿ-vertex complex with
//! standard signs, no reduction. Independent of the scanning engine; used to
//! cross-check it including torsion.

use crate::braid::ClosurePlan;
use crate::ring::{Coef, Ring};
use crate::rmod::{FreeComplexR, SparseMat, Summand, SummandKind};
use num_traits::One;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
#[error("diagram has {0} crossings, above the oracle limit {1}")]
pub struct OverLimit(pub usize, pub usize);

pub const DEFAULT_ORACLE_LIMIT: usize = 12;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Circles of one resolution: nodes (level, position) with levels 0..=n
/// stacked bottom to top and the closure identifying top with bottom.
fn resolve(plan: &ClosurePlan, res: &[bool]) -> (Vec<usize>, usize) {
    let strands = plan.word.strands;
    let n = plan.word.letters.len();
    let node = |level: usize, pos: usize| level * strands + pos;
    let mut uf = UnionFind::new((n + 1) * strands);
    for (i, &l) in plan.word.letters.iter().enumerate() {
        let p = l.unsigned_abs() as usize - 1;
        // the 1-resolution is horizontal for a positive crossing, vertical
        // for a negative one
        let horizontal = if l > 0 { res[i] } else { !res[i] };
        for q in 0..strands {
            if q == p || q == p + 1 {
                continue;
            }
            uf.union(node(i, q), node(i + 1, q));
        }
        if horizontal {
            uf.union(node(i, p), node(i, p + 1));
            uf.union(node(i + 1, p), node(i + 1, p + 1));
        } else {
            uf.union(node(i, p), node(i + 1, p));
            uf.union(node(i, p + 1), node(i + 1, p + 1));
        }
    }
    for pos in 0..strands {
        uf.union(node(n, pos), node(0, pos));
    }
    let total = (n + 1) * strands;
    let mut root_to_circle: BTreeMap<usize, usize> = BTreeMap::new();
    let mut of_node = vec![usize::MAX; total];
    for (v, slot) in of_node.iter_mut().enumerate() {
        let r = uf.find(v);
        let next = root_to_circle.len();
        *slot = *root_to_circle.entry(r).or_insert(next);
    }
    (of_node, root_to_circle.len())
}

struct VertexData {
    circle_of_node: Vec<usize>,
    n_circles: usize,
    kind: SummandKind,
    left_circle: Option<usize>,
    right_circle: Option<usize>,
    free_circles: Vec<usize>,
    base: usize,
}

impl VertexData {
    fn gen_count(&self) -> usize {
        (1usize << self.free_circles.len()) * self.kind.rank()
    }

    /// per-circle sign (+ = true) of a local generator index
    fn signs_of(&self, local: usize) -> Vec<bool> {
        let rank = self.kind.rank();
        let inner = local % rank;
        let bits = local / rank;
        let mut signs = vec![true; self.n_circles];
        for (i, &c) in self.free_circles.iter().enumerate() {
            signs[c] = bits >> i & 1 == 0;
        }
        match self.kind {
            SummandKind::One => {}
            SummandKind::R => {
                let c = self.left_circle.or(self.right_circle).unwrap();
                signs[c] = inner == 0;
            }
            SummandKind::RR => {
                signs[self.left_circle.unwrap()] = inner & 1 == 0;
                signs[self.right_circle.unwrap()] = inner & 2 == 0;
            }
        }
        signs
    }

    fn index_of(&self, signs: &[bool]) -> usize {
        let mut bits = 0usize;
        for (i, &c) in self.free_circles.iter().enumerate() {
            if !signs[c] {
                bits |= 1 << i;
            }
        }
        let inner = match self.kind {
            SummandKind::One => 0,
            SummandKind::R => {
                let c = self.left_circle.or(self.right_circle).unwrap();
                usize::from(!signs[c])
            }
            SummandKind::RR => {
                usize::from(!signs[self.left_circle.unwrap()])
                    + 2 * usize::from(!signs[self.right_circle.unwrap()])
            }
        };
        bits * self.kind.rank() + inner
    }
}

/// The full cube of resolutions as a free complex, same output type and
/// grading conventions as the scan-and-close pipeline.
pub fn cube_complex(
    plan: &ClosurePlan,
    ring: Ring,
    limit: usize,
) -> Result<FreeComplexR, OverLimit> {
    let n = plan.word.letters.len();
    if n > limit {
        return Err(OverLimit(n, limit));
    }
    let strands = plan.word.strands;
    let n_plus = plan.word.positive_crossings();
    let n_minus = plan.word.negative_crossings();
    let global_q = n_plus as i32 - 2 * n_minus as i32;
    let min_h = -(n_minus as i32);
    let n_bp = plan.basepoints.len();

    let mut vertices: Vec<VertexData> = Vec::with_capacity(1 << n);
    let mut degree_dims = vec![0usize; n + 1];
    let mut decomp: Vec<Vec<Summand>> = vec![Vec::new(); n + 1];
    for code in 0u32..(1 << n) {
        let res: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        let weight = res.iter().filter(|&&b| b).count();
        let (circle_of_node, n_circles) = resolve(plan, &res);
        let left_circle = plan.basepoints.first().map(|&(pos, _)| circle_of_node[pos]);
        let right_circle = plan.basepoints.get(1).map(|&(pos, _)| circle_of_node[pos]);
        let kind = match (left_circle, right_circle) {
            (Some(a), Some(b)) if a != b => SummandKind::RR,
            (None, None) => SummandKind::One,
            _ => SummandKind::R,
        };
        let free_circles: Vec<usize> = (0..n_circles)
            .filter(|&i| Some(i) != left_circle && Some(i) != right_circle)
            .collect();
        let base = degree_dims[weight];
        for bits in 0..(1u32 << free_circles.len()) {
            let free_q: i32 = (0..free_circles.len())
                .map(|i| if bits >> i & 1 == 0 { 1 } else { -1 })
                .sum();
            let shift = weight as i32 + free_q + global_q;
            decomp[weight].push(Summand::new(kind, shift));
            degree_dims[weight] += kind.rank();
        }
        vertices.push(VertexData {
            circle_of_node,
            n_circles,
            kind,
            left_circle,
            right_circle,
            free_circles,
            base,
        });
    }

    let mut diffs: Vec<SparseMat> = (0..n)
        .map(|h| SparseMat::zero(degree_dims[h + 1], degree_dims[h]))
        .collect();

    for code in 0u32..(1 << n) {
        let res: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        let weight = res.iter().filter(|&&b| b).count();
        let src = &vertices[code as usize];
        for i in 0..n {
            if res[i] {
                continue;
            }
            let tcode = code | (1 << i);
            let tgt = &vertices[tcode as usize];
            let sign = if (0..i).filter(|&j| res[j]).count() % 2 == 0 {
                Coef::one()
            } else {
                -Coef::one()
            };
            let p = plan.word.letters[i].unsigned_abs() as usize - 1;
            // the four corners of the crossing slice locate the circles the
            // flip rewires
            let corners = [
                i * strands + p,
                i * strands + p + 1,
                (i + 1) * strands + p,
                (i + 1) * strands + p + 1,
            ];
            let mut src_aff: Vec<usize> = corners.iter().map(|&n| src.circle_of_node[n]).collect();
            src_aff.sort_unstable();
            src_aff.dedup();
            let mut tgt_aff: Vec<usize> = corners.iter().map(|&n| tgt.circle_of_node[n]).collect();
            tgt_aff.sort_unstable();
            tgt_aff.dedup();
            // unaffected circles carry over by sharing any node
            let mut carry = vec![usize::MAX; src.n_circles];
            for node in 0..src.circle_of_node.len() {
                let c = src.circle_of_node[node];
                if carry[c] == usize::MAX && !src_aff.contains(&c) {
                    carry[c] = tgt.circle_of_node[node];
                }
            }
            for ls in 0..src.gen_count() {
                let sv = src.signs_of(ls);
                let mut base_signs = vec![true; tgt.n_circles];
                for (c, &s) in sv.iter().enumerate() {
                    if !src_aff.contains(&c) {
                        base_signs[carry[c]] = s;
                    }
                }
                let src_idx = src.base + ls;
                if src_aff.len() == 2 {
                    // merge: μ(1⊗1)=1, μ(1⊗X)=μ(X⊗1)=X, μ(X⊗X)=0
                    debug_assert_eq!(tgt_aff.len(), 1);
                    let product_plus = match (sv[src_aff[0]], sv[src_aff[1]]) {
                        (true, true) => Some(true),
                        (true, false) | (false, true) => Some(false),
                        (false, false) => None,
                    };
                    if let Some(sgn) = product_plus {
                        let mut t_signs = base_signs.clone();
                        t_signs[tgt_aff[0]] = sgn;
                        let tgt_idx = tgt.base + tgt.index_of(&t_signs);
                        diffs[weight].add_to(tgt_idx, src_idx, sign.clone());
                    }
                } else {
                    // split: Δ(1) = 1⊗X + X⊗1, Δ(X) = X⊗X
                    debug_assert_eq!(src_aff.len(), 1);
                    debug_assert_eq!(tgt_aff.len(), 2);
                    let outputs: Vec<(bool, bool)> = if sv[src_aff[0]] {
                        vec![(true, false), (false, true)]
                    } else {
                        vec![(false, false)]
                    };
                    for (la, lb) in outputs {
                        let mut t_signs = base_signs.clone();
                        t_signs[tgt_aff[0]] = la;
                        t_signs[tgt_aff[1]] = lb;
                        let tgt_idx = tgt.base + tgt.index_of(&t_signs);
                        diffs[weight].add_to(tgt_idx, src_idx, sign.clone());
                    }
                }
            }
        }
    }
    let mut out = FreeComplexR::from_summands(ring, min_h, decomp, n_bp >= 1, n_bp >= 2);
    out.diffs = diffs;
    #[cfg(debug_assertions)]
    out.validate();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{parse_braid, ClosurePlan};
    use crate::homology::bigraded_homology;

    fn plan(text: &str, strands: usize) -> ClosurePlan {
        ClosurePlan::new(parse_braid(text, strands).unwrap())
    }

    #[test]
    fn unknot_cube() {
        let cx = cube_complex(&plan("1", 2), Ring::Z, 12).unwrap();
        let t = bigraded_homology(&cx);
        assert_eq!(t.group(0, 1).map(|g| g.free), Some(1));
        assert_eq!(t.group(0, -1).map(|g| g.free), Some(1));
        assert_eq!(t.groups.len(), 2);
    }

    #[test]
    fn hopf_cube() {
        let cx = cube_complex(&plan("1 1", 2), Ring::Z, 12).unwrap();
        let t = bigraded_homology(&cx);
        for (h, q) in [(0, 0), (0, 2), (2, 4), (2, 6)] {
            assert_eq!(t.group(h, q).map(|g| g.free), Some(1), "({h},{q}):\n{t}");
        }
        assert_eq!(t.groups.len(), 4);
    }

    #[test]
    fn trefoil_cube_matches_table() {
        let mut p = plan("1 1 1", 2);
        p.add_basepoint(0).unwrap();
        let cx = cube_complex(&p, Ring::Z, 12).unwrap();
        cx.validate();
        let t = bigraded_homology(&cx);
        assert_eq!(
            t.group(3, 7).map(|g| g.torsion.clone()),
            Some(vec![2u32.into()])
        );
        assert_eq!(t.group(0, 1).map(|g| g.free), Some(1));
        assert_eq!(t.groups.len(), 5);
    }

    #[test]
    fn over_limit_refused() {
        let p = plan("1 1 1 1 1", 2);
        assert!(cube_complex(&p, Ring::Z, 4).is_err());
    }
}
