//! Bigraded homology with torsion, graded Euler characteristic, and the
//! torsion-bidegree predictor.

use crate::linalg::{self, Mat};
use crate::ring::{Coef, Ring};
use crate::rmod::FreeComplexR;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Free rank and sorted torsion orders per bidegree (h, q).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyTable {
    pub ring: Ring,
    pub groups: BTreeMap<(i32, i32), Group>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub free: usize,
    /// Elementary divisors ≥ 2 (prime powers over ℤ₍ₚ₎), ascending.
    pub torsion: Vec<BigUint>,
}

impl HomologyTable {
    pub fn group(&self, h: i32, q: i32) -> Option<&Group> {
        self.groups.get(&(h, q))
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Count direct summands of exactly the given order at (h, q). Over ℤ an
    /// elementary divisor d contributes a ℤ/p^k summand when p^k is the exact
    /// p-part of d, so prime-power orders count divisors with that p-part.
    pub fn summand_count(&self, h: i32, q: i32, order: &BigUint) -> usize {
        let Some(g) = self.group(h, q) else { return 0 };
        if let Some((p, k)) = prime_power(order) {
            g.torsion
                .iter()
                .filter(|d| p_part(d, &p) == pow(&p, k))
                .count()
        } else {
            g.torsion.iter().filter(|d| *d == order).count()
        }
    }

    /// JSON in the fixed schema:
    /// {"ring": "...", "groups": [{"h":…, "q":…, "free":…, "torsion":[…]}]}.
    pub fn to_json(&self) -> serde_json::Value {
        let groups: Vec<serde_json::Value> = self
            .groups
            .iter()
            .map(|(&(h, q), g)| {
                serde_json::json!({
                    "h": h,
                    "q": q,
                    "free": g.free,
                    "torsion": g.torsion.iter().map(|t| t.to_string().parse::<serde_json::Value>().unwrap_or(serde_json::Value::String(t.to_string()))).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "ring": self.ring.to_string(),
            "groups": groups,
        })
    }

    /// CSV with one row per (h, q): h,q,free,torsion (torsion orders joined
    /// by `;`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,q,free,torsion\n");
        for (&(h, q), g) in &self.groups {
            let tor: Vec<String> = g.torsion.iter().map(|t| t.to_string()).collect();
            out.push_str(&format!("{h},{q},{},{}\n", g.free, tor.join(";")));
        }
        out
    }
}

impl fmt::Display for HomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ring {}", self.ring)?;
        if self.groups.is_empty() {
            return writeln!(f, "  (zero)");
        }
        for (&(h, q), g) in &self.groups {
            let mut parts = Vec::new();
            if g.free > 0 {
                parts.push(if g.free == 1 {
                    "Z".to_string()
                } else {
                    format!("Z^{}", g.free)
                });
            }
            for t in &g.torsion {
                parts.push(format!("Z/{t}"));
            }
            writeln!(f, "  (h={h:>3}, q={q:>3})  {}", parts.join(" + "))?;
        }
        Ok(())
    }
}

fn prime_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if *n < BigUint::from(2u32) {
        return None;
    }
    let mut m = n.clone();
    let mut p = BigUint::from(2u32);
    while &p * &p <= m {
        if (&m % &p).is_zero() {
            break;
        }
        p += 1u32;
    }
    if &p * &p > m {
        p = m.clone();
    }
    let mut k = 0u32;
    while (&m % &p).is_zero() {
        m /= &p;
        k += 1;
    }
    m.is_one().then_some((p, k))
}

fn p_part(n: &BigUint, p: &BigUint) -> BigUint {
    let mut out = BigUint::one();
    let mut m = n.clone();
    while (&m % p).is_zero() {
        m /= p;
        out *= p;
    }
    out
}

fn pow(p: &BigUint, k: u32) -> BigUint {
    let mut out = BigUint::one();
    for _ in 0..k {
        out *= p;
    }
    out
}

/// Per-q-strand homology of a free complex via Smith normal form. Over ℤ₍ₚ₎
/// the valuation pivoting clears prime-to-p torsion by construction.
pub fn bigraded_homology(cx: &FreeComplexR) -> HomologyTable {
    let ring = cx.ring;
    let mut groups = BTreeMap::new();
    for (i, qs) in cx.gens.iter().enumerate() {
        let h = cx.min_h + i as i32;
        let mut strands: Vec<i32> = qs.clone();
        strands.sort_unstable();
        strands.dedup();
        for q in strands {
            let cur: Vec<usize> = (0..qs.len()).filter(|&g| qs[g] == q).collect();
            if cur.is_empty() {
                continue;
            }
            let up: Vec<usize> = if i + 1 < cx.gens.len() {
                (0..cx.gens[i + 1].len())
                    .filter(|&g| cx.gens[i + 1][g] == q)
                    .collect()
            } else {
                Vec::new()
            };
            let down: Vec<usize> = if i > 0 {
                (0..cx.gens[i - 1].len())
                    .filter(|&g| cx.gens[i - 1][g] == q)
                    .collect()
            } else {
                Vec::new()
            };
            let mut b = Mat::zero(up.len(), cur.len());
            if i < cx.diffs.len() {
                for (rr, &gr) in up.iter().enumerate() {
                    for (cc, &gc) in cur.iter().enumerate() {
                        *b.at_mut(rr, cc) = cx.diffs[i].get(gr, gc);
                    }
                }
            }
            let mut a = Mat::zero(cur.len(), down.len());
            if i > 0 {
                for (rr, &gr) in cur.iter().enumerate() {
                    for (cc, &gc) in down.iter().enumerate() {
                        *a.at_mut(rr, cc) = cx.diffs[i - 1].get(gr, gc);
                    }
                }
            }
            let (free, torsion) = linalg::homology_block(&a, &b, ring);
            if free > 0 || !torsion.is_empty() {
                groups.insert((h, q), Group { free, torsion });
            }
        }
    }
    HomologyTable { ring, groups }
}

/// Graded Euler characteristic Σ (−1)^h · free_rank · q^j as a Laurent
/// polynomial in q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    pub coeffs: BTreeMap<i32, BigInt>,
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in &self.coeffs {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() {
                " - "
            } else if first {
                ""
            } else {
                " + "
            };
            let mag = c.abs();
            let coeff = if mag.is_one() && e != 0 {
                String::new()
            } else {
                mag.to_string()
            };
            let var = match e {
                0 => String::new(),
                1 => "q".to_string(),
                _ => format!("q^{e}"),
            };
            write!(f, "{sign}{coeff}{var}")?;
            first = false;
        }
        Ok(())
    }
}

pub fn euler_characteristic(t: &HomologyTable) -> LaurentPoly {
    let mut coeffs: BTreeMap<i32, BigInt> = BTreeMap::new();
    for (&(h, q), g) in &t.groups {
        if g.free == 0 {
            continue;
        }
        let sign = if h.rem_euclid(2) == 0 { 1 } else { -1 };
        let c = coeffs.entry(q).or_insert_with(BigInt::zero);
        *c += BigInt::from(sign) * BigInt::from(g.free);
        if c.is_zero() {
            coeffs.remove(&q);
        }
    }
    LaurentPoly { coeffs }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PredictError {
    #[error("torsion bidegree formulas are only known for p = 3, got p = {0}")]
    UnsupportedPrime(u32),
    #[error("need 0 ≤ m ≤ l ≤ k, got k={k}, l={l}, m={m}")]
    BadRange { k: u32, l: u32, m: u32 },
}

/// A predicted torsion summand of Kh(L₃ᵏ): at least `min_multiplicity`
/// copies of ℤ/pˡ at the bidegree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionPrediction {
    pub p: u32,
    pub k: u32,
    pub l: u32,
    pub m: u32,
    pub h: i32,
    pub q: i32,
    pub min_multiplicity: BigUint,
}

/// Bidegree (8l+3+m, 11k+12l+7+4m) with multiplicity at least binom(l, m).
pub fn predict_torsion(p: u32, k: u32, l: u32, m: u32) -> Result<TorsionPrediction, PredictError> {
    if p != 3 {
        return Err(PredictError::UnsupportedPrime(p));
    }
    if !(m <= l && l <= k) {
        return Err(PredictError::BadRange { k, l, m });
    }
    Ok(TorsionPrediction {
        p,
        k,
        l,
        m,
        h: (8 * l + 3 + m) as i32,
        q: (11 * k + 12 * l + 7 + 4 * m) as i32,
        min_multiplicity: binomial(l, m),
    })
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut out = BigUint::one();
    for i in 0..k.min(n - k) {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

/// Does the table contain at least `min_multiplicity` summands of exactly
/// `order` at (h, q)?
pub fn assert_summand(
    t: &HomologyTable,
    h: i32,
    q: i32,
    order: &BigUint,
    min_multiplicity: usize,
) -> bool {
    if min_multiplicity == 0 {
        return true;
    }
    t.summand_count(h, q, order) >= min_multiplicity
}

/// Mapping cone of a basepoint action f: Cone^h = C^{h+1}{−2} ⊕ C^h with
/// d(c, x) = (−dc, f c + dx). Its homology is a homotopy invariant of the
/// action.
pub fn mapping_cone_of_action(cx: &FreeComplexR, side: crate::rmod::Side) -> FreeComplexR {
    let acts = cx.action(side).expect("requested action present");
    let len = cx.gens.len();
    let dim = |i: i64| -> usize {
        if i < 0 || i as usize >= len {
            0
        } else {
            cx.gens[i as usize].len()
        }
    };
    let mut gens: Vec<Vec<i32>> = Vec::with_capacity(len + 1);
    for i in 0..=len as i64 {
        let mut v: Vec<i32> = Vec::new();
        if (i as usize) < len {
            v.extend(cx.gens[i as usize].iter().map(|q| q - 2));
        }
        if i >= 1 && dim(i - 1) > 0 {
            v.extend(cx.gens[(i - 1) as usize].iter().copied());
        }
        gens.push(v);
    }
    let mut diffs: Vec<crate::rmod::SparseMat> = (0..len)
        .map(|i| crate::rmod::SparseMat::zero(gens[i + 1].len(), gens[i].len()))
        .collect();
    for i in 0..len {
        let row_split = dim(i as i64 + 1);
        let col_split = dim(i as i64);
        // −d on the shifted copy
        if i + 1 < len {
            for (&(r, c), v) in &cx.diffs[i].entries {
                diffs[i].add_to(r as usize, c as usize, -v.clone());
            }
        }
        // f from the shifted copy into the plain copy
        for (&(r, c), v) in &acts[i].entries {
            diffs[i].add_to(row_split + r as usize, c as usize, v.clone());
        }
        // d on the plain copy
        if i >= 1 {
            for (&(r, c), v) in &cx.diffs[i - 1].entries {
                diffs[i].add_to(row_split + r as usize, col_split + c as usize, v.clone());
            }
        }
    }
    let out = FreeComplexR {
        ring: cx.ring,
        min_h: cx.min_h - 1,
        gens,
        diffs,
        left: None,
        right: None,
        decomp: None,
    };
    #[cfg(debug_assertions)]
    out.validate();
    out
}

/// The integer-matrix Smith normal form with certificate, on plain integer
/// rows: returns (diagonal, U, V) with U·M·V = S.
pub fn smith_normal_form(m: &[Vec<BigInt>]) -> (Vec<BigInt>, Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut mat = Mat::zero(rows, cols);
    for (r, row) in m.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            *mat.at_mut(r, c) = Coef::from_integer(v.clone());
        }
    }
    let snf = linalg::smith(&mat, Ring::Z);
    debug_assert!(linalg::check_certificate(&mat, &snf, Ring::Z));
    let to_int_rows = |m: &Mat| -> Vec<Vec<BigInt>> {
        (0..m.rows)
            .map(|r| (0..m.cols).map(|c| m.at(r, c).to_integer()).collect())
            .collect()
    };
    let diag = (0..rows.min(cols))
        .map(|i| snf.s.at(i, i).to_integer())
        .collect();
    (diag, to_int_rows(&snf.u), to_int_rows(&snf.v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmod::{expand, PresTag, RPresentation};

    fn biguint(n: u32) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn c_n_cohomology_free_rank_two() {
        for n in [-2i64, 0, 3] {
            let cx = expand(&RPresentation::new(PresTag::C(n)), Ring::Z);
            let t = bigraded_homology(&cx);
            let total_free: usize = t.groups.values().map(|g| g.free).sum();
            let total_torsion: usize = t.groups.values().map(|g| g.torsion.len()).sum();
            assert_eq!(total_free, 4, "C({n}) free rank 2 in both degrees");
            assert_eq!(total_torsion, 0, "C({n}) is torsion-free");
        }
    }

    #[test]
    fn d_m_torsion() {
        let cx = expand(&RPresentation::new(PresTag::D(2)), Ring::Z);
        let t = bigraded_homology(&cx);
        // H⁰ = Z at q=-2 (kernel gen X), H¹ = Z at q=2 and Z/2 at q=0
        assert_eq!(t.group(0, -2).unwrap().free, 1);
        assert_eq!(t.group(1, 2).unwrap().free, 1);
        assert_eq!(t.group(1, 0).unwrap().torsion, vec![biguint(2)]);
        assert_eq!(t.summand_count(1, 0, &biguint(2)), 1);
    }

    #[test]
    fn localization_clears_foreign_torsion() {
        let cx = expand(&RPresentation::new(PresTag::D(6)), Ring::Zp(3));
        let t = bigraded_homology(&cx);
        assert_eq!(t.group(1, 0).unwrap().torsion, vec![biguint(3)]);
        let cx2 = expand(&RPresentation::new(PresTag::D(6)), Ring::Zp(5));
        let t2 = bigraded_homology(&cx2);
        assert!(t2.group(1, 0).is_none() || t2.group(1, 0).unwrap().torsion.is_empty());
    }

    #[test]
    fn predictions() {
        let p = predict_torsion(3, 1, 1, 0).unwrap();
        assert_eq!((p.h, p.q), (11, 30));
        let p = predict_torsion(3, 1, 1, 1).unwrap();
        assert_eq!((p.h, p.q), (12, 34));
        let p = predict_torsion(3, 2, 2, 1).unwrap();
        assert_eq!((p.h, p.q), (20, 57));
        assert_eq!(p.min_multiplicity, biguint(2));
        assert_eq!(
            predict_torsion(5, 1, 1, 0),
            Err(PredictError::UnsupportedPrime(5))
        );
        assert_eq!(
            predict_torsion(3, 1, 1, 2),
            Err(PredictError::BadRange { k: 1, l: 1, m: 2 })
        );
    }

    #[test]
    fn summand_counting_p_part() {
        let mut groups = BTreeMap::new();
        groups.insert(
            (3, 7),
            Group {
                free: 0,
                torsion: vec![biguint(2), biguint(6), biguint(12)],
            },
        );
        let t = HomologyTable {
            ring: Ring::Z,
            groups,
        };
        // 2-parts: 2, 2, 4 → two summands Z/2, one Z/4
        assert_eq!(t.summand_count(3, 7, &biguint(2)), 2);
        assert_eq!(t.summand_count(3, 7, &biguint(4)), 1);
        // 3-parts: 1, 3, 3 → two summands Z/3
        assert_eq!(t.summand_count(3, 7, &biguint(3)), 2);
        assert!(assert_summand(&t, 3, 7, &biguint(2), 2));
        assert!(!assert_summand(&t, 3, 7, &biguint(4), 2));
        assert!(assert_summand(&t, 0, 0, &biguint(5), 0));
    }

    #[test]
    fn euler_char_display() {
        let cx = expand(&RPresentation::new(PresTag::Runit), Ring::Z);
        let t = bigraded_homology(&cx);
        let chi = euler_characteristic(&t);
        assert_eq!(chi.to_string(), "q^-2 + 1");
    }

    #[test]
    fn snf_public_interface() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(4)],
            vec![BigInt::from(6), BigInt::from(8)],
        ];
        let (diag, _u, _v) = smith_normal_form(&m);
        assert_eq!(diag, vec![BigInt::from(2), BigInt::from(4)]);
    }
}
