//! Braid words, link expressions, and compilation to closure plans.
//!
//! Links are presented as braid closures. Connected sums compile down to a
//! single flat braid word by strand-shifted concatenation sharing one strand
//! per join, so downstream stages only ever see braid input.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BraidError {
    #[error("strands must be at least 1, got {0}")]
    BadStrands(usize),
    #[error("letter {0} out of range for {1} strands")]
    LetterOutOfRange(i32, usize),
    #[error("zero is not a valid braid letter")]
    ZeroLetter,
    #[error("cannot parse `{0}` as a braid letter")]
    BadToken(String),
    #[error("component {0} does not exist (factor has {1} components)")]
    BadComponent(usize, usize),
    #[error("cannot parse link expression: {0}")]
    BadExpression(String),
    #[error("basepoint strand {0} out of range")]
    BadBasepoint(usize),
    #[error("basepoints must lie on distinct components")]
    BasepointsSameComponent,
}

/// A braid word: letter `i` is the generator σ_|i| with sign(i), acting on
/// strand positions |i| and |i|+1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    pub strands: usize,
    pub letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<i32>) -> Result<Self, BraidError> {
        if strands < 1 {
            return Err(BraidError::BadStrands(strands));
        }
        for &l in &letters {
            if l == 0 {
                return Err(BraidError::ZeroLetter);
            }
            if l.unsigned_abs() as usize >= strands {
                return Err(BraidError::LetterOutOfRange(l, strands));
            }
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn positive_crossings(&self) -> usize {
        self.letters.iter().filter(|&&l| l > 0).count()
    }

    pub fn negative_crossings(&self) -> usize {
        self.letters.len() - self.positive_crossings()
    }

    /// The permutation of strand positions induced by the word, as the map
    /// `perm[bottom position] = top position` (0-indexed).
    pub fn permutation(&self) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.strands).collect();
        for &l in &self.letters {
            let j = l.unsigned_abs() as usize - 1;
            pos.swap(j, j + 1);
        }
        // pos[p] = strand that ends at position p; invert
        let mut perm = vec![0; self.strands];
        for (top, &bottom) in pos.iter().enumerate() {
            perm[bottom] = top;
        }
        perm
    }

    /// Components of the closure: the cycles of the induced permutation,
    /// sorted by least strand position. Positions are 0-indexed.
    pub fn closure_components(&self) -> Vec<Vec<usize>> {
        let perm = self.permutation();
        let mut seen = vec![false; self.strands];
        let mut comps = Vec::new();
        for start in 0..self.strands {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p);
                p = perm[p];
            }
            cycle.sort_unstable();
            comps.push(cycle);
        }
        comps
    }

    /// Index of the closure component containing strand position `p`.
    pub fn component_of(&self, p: usize) -> usize {
        self.closure_components()
            .iter()
            .position(|c| c.contains(&p))
            .expect("position in range")
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", words.join(" "))
    }
}

/// Parse whitespace-separated signed integers into a braid word.
pub fn parse_braid(text: &str, strands: usize) -> Result<BraidWord, BraidError> {
    let mut letters = Vec::new();
    for tok in text.split_whitespace() {
        let l: i32 = tok
            .parse()
            .map_err(|_| BraidError::BadToken(tok.to_string()))?;
        letters.push(l);
    }
    BraidWord::new(strands, letters)
}

/// The torus braid (σ₁⋯σ_{p−1})^q on p strands; closure is T(p,q).
pub fn torus_braid(p: usize, q: usize) -> BraidWord {
    assert!(p >= 2 && q >= 1);
    let mut letters = Vec::with_capacity((p - 1) * q);
    for _ in 0..q {
        for i in 1..p {
            letters.push(i as i32);
        }
    }
    BraidWord::new(p, letters).unwrap()
}

/// The two-component link Lₙ: closure of (σ₁⋯σₙ)^{n+1} σ₁⋯σ_{n−1} on n+1
/// strands. One component is an unknot, the other is T(n, n+1).
pub fn make_ln(n: usize) -> BraidWord {
    assert!(n >= 2);
    let mut letters = Vec::new();
    for _ in 0..n + 1 {
        for i in 1..=n {
            letters.push(i as i32);
        }
    }
    for i in 1..n {
        letters.push(i as i32);
    }
    BraidWord::new(n + 1, letters).unwrap()
}

/// One factor of a link expression.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkExpression {
    pub factors: Vec<BraidWord>,
    /// Per consecutive pair, the (left component id, right component id) to
    /// merge; `None` selects the default convention: the left factor's
    /// component containing its last strand joins the right factor's
    /// component containing its first strand.
    pub joins: Vec<Option<(usize, usize)>>,
}

/// A compiled diagram: a flat braid word plus closure bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosurePlan {
    pub word: BraidWord,
    /// Strand partition of the closure (canonical order: by least strand).
    pub components: Vec<Vec<usize>>,
    /// Up to two closure arcs carrying basepoints: (strand position whose
    /// closure arc is marked, component id).
    pub basepoints: Vec<(usize, usize)>,
}

impl ClosurePlan {
    pub fn new(word: BraidWord) -> Self {
        let components = word.closure_components();
        ClosurePlan {
            word,
            components,
            basepoints: Vec::new(),
        }
    }

    /// Mark the closure arc of strand position `p` (0-indexed) as based.
    pub fn add_basepoint(&mut self, p: usize) -> Result<(), BraidError> {
        if p >= self.word.strands {
            return Err(BraidError::BadBasepoint(p));
        }
        let comp = self.word.component_of(p);
        if self.basepoints.iter().any(|&(_, c)| c == comp) {
            return Err(BraidError::BasepointsSameComponent);
        }
        if self.basepoints.len() >= 2 {
            return Err(BraidError::BadBasepoint(p));
        }
        self.basepoints.push((p, comp));
        Ok(())
    }
}

/// Conjugate so that the closure component at strand position `from` ends up
/// at position `to`. Closure components relabel by the inverse of the
/// conjugating permutation, so the pre-word walks `to` up to `from`.
fn conjugate_to_position(word: &BraidWord, from: usize, to: usize) -> BraidWord {
    if from == to {
        return word.clone();
    }
    let mut pre: Vec<i32> = Vec::new();
    if to < from {
        for j in to..from {
            pre.push((j + 1) as i32);
        }
    } else {
        for j in (from..to).rev() {
            pre.push((j + 1) as i32);
        }
    }
    let mut letters = pre.clone();
    letters.extend_from_slice(&word.letters);
    letters.extend(pre.iter().rev().map(|l| -l));
    BraidWord::new(word.strands, letters).unwrap()
}

/// Position relabeling induced by [`conjugate_to_position`]: old → new.
fn conjugation_tracking(from: usize, to: usize, strands: usize) -> Vec<usize> {
    let mut track: Vec<usize> = (0..strands).collect();
    track[from] = to;
    if to < from {
        for p in to..from {
            track[p] = p + 1;
        }
    } else {
        for p in from + 1..=to {
            track[p] = p - 1;
        }
    }
    track
}

/// Compile a link expression into a single flat braid word.
///
/// Consecutive factors are concatenated with a strand shift of
/// (left strands − 1), so exactly one strand is shared per join and the
/// selected components merge. Factors whose selected component does not
/// already touch the shared strand are conjugated first.
pub fn compile(expr: &LinkExpression) -> Result<ClosurePlan, BraidError> {
    Ok(compile_with_factors(expr)?.0)
}

/// Like [`compile`], also returning the join-normalized factors (each with
/// its incoming join on strand 0 and outgoing join on the last strand), for
/// the factor-wise tensor path.
pub fn compile_with_factors(
    expr: &LinkExpression,
) -> Result<(ClosurePlan, Vec<BraidWord>), BraidError> {
    assert!(!expr.factors.is_empty());
    assert_eq!(expr.joins.len() + 1, expr.factors.len());

    // Normalize each factor so the join components sit on the boundary
    // strands: joined-to-previous on the first strand, joined-to-next on the
    // last strand. Representative strands are chosen in the original factor
    // and tracked through conjugation.
    let mut factors: Vec<BraidWord> = Vec::with_capacity(expr.factors.len());
    for (i, f) in expr.factors.iter().enumerate() {
        let comps = f.closure_components();
        let n = f.strands;
        let in_rep: Option<usize> = if i > 0 {
            Some(match expr.joins[i - 1] {
                Some((_, rc)) => {
                    let comp = comps
                        .get(rc)
                        .ok_or(BraidError::BadComponent(rc, comps.len()))?;
                    comp[0]
                }
                None => 0,
            })
        } else {
            None
        };
        let out_rep: Option<usize> = if i + 1 < expr.factors.len() {
            Some(match expr.joins[i] {
                Some((lc, _)) => {
                    let comp = comps
                        .get(lc)
                        .ok_or(BraidError::BadComponent(lc, comps.len()))?;
                    // if both joins land on this component, use distinct strands
                    match in_rep {
                        Some(r) if comp.contains(&r) && comp.len() > 1 => {
                            *comp.iter().find(|&&s| s != r).unwrap()
                        }
                        _ => *comp.last().unwrap(),
                    }
                }
                None => n - 1,
            })
        } else {
            None
        };

        let mut word = f.clone();
        let mut out_pos = out_rep;
        if let Some(p) = in_rep {
            if p != 0 {
                word = conjugate_to_position(&word, p, 0);
                let track = conjugation_tracking(p, 0, n);
                out_pos = out_pos.map(|q| track[q]);
            }
        }
        if let Some(q) = out_pos {
            if q != n - 1 {
                if q == 0 && in_rep.is_some() {
                    // single shared strand on both sides is only coherent for
                    // a one-strand factor; otherwise reps were chosen distinct
                    debug_assert_eq!(n, 1);
                } else {
                    word = conjugate_to_position(&word, q, n - 1);
                }
            }
        }
        factors.push(word);
    }

    let mut strands = 0usize;
    let mut letters: Vec<i32> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let shift = if i == 0 { 0 } else { strands - 1 } as i32;
        for &l in &f.letters {
            letters.push(if l > 0 { l + shift } else { l - shift });
        }
        strands = if i == 0 {
            f.strands
        } else {
            strands + f.strands - 1
        };
    }
    let word = BraidWord::new(strands, letters)?;
    Ok((ClosurePlan::new(word), factors))
}

/// Parse the expression grammar: factors `T(p,q)`, `L<n>`, `B[s: w]` joined
/// by `#` or `#[i,j]`.
pub fn parse_expression(text: &str) -> Result<LinkExpression, BraidError> {
    let mut factors = Vec::new();
    let mut joins = Vec::new();
    let mut rest = text.trim();
    let mut first = true;
    while !rest.is_empty() {
        if !first {
            let Some(stripped) = rest.strip_prefix('#') else {
                return Err(BraidError::BadExpression(format!(
                    "expected `#` before `{rest}`"
                )));
            };
            rest = stripped.trim_start();
            if let Some(stripped) = rest.strip_prefix('[') {
                let Some(end) = stripped.find(']') else {
                    return Err(BraidError::BadExpression("unclosed `#[`".into()));
                };
                let inner = &stripped[..end];
                let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    return Err(BraidError::BadExpression(format!(
                        "expected `#[i,j]`, got `#[{inner}]`"
                    )));
                }
                let i: usize = parts[0]
                    .parse()
                    .map_err(|_| BraidError::BadExpression(format!("bad join id `{}`", parts[0])))?;
                let j: usize = parts[1]
                    .parse()
                    .map_err(|_| BraidError::BadExpression(format!("bad join id `{}`", parts[1])))?;
                joins.push(Some((i, j)));
                rest = stripped[end + 1..].trim_start();
            } else {
                joins.push(None);
            }
        }
        first = false;
        let (factor, remainder) = parse_factor(rest)?;
        factors.push(factor);
        rest = remainder.trim_start();
    }
    if factors.is_empty() {
        return Err(BraidError::BadExpression("empty expression".into()));
    }
    Ok(LinkExpression { factors, joins })
}

fn parse_factor(text: &str) -> Result<(BraidWord, &str), BraidError> {
    if let Some(rest) = text.strip_prefix("T(") {
        let Some(end) = rest.find(')') else {
            return Err(BraidError::BadExpression("unclosed `T(`".into()));
        };
        let inner = &rest[..end];
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(BraidError::BadExpression(format!("bad torus `T({inner})`")));
        }
        let p: usize = parts[0]
            .parse()
            .map_err(|_| BraidError::BadExpression(format!("bad torus parameter `{}`", parts[0])))?;
        let q: usize = parts[1]
            .parse()
            .map_err(|_| BraidError::BadExpression(format!("bad torus parameter `{}`", parts[1])))?;
        if p < 2 || q < 1 {
            return Err(BraidError::BadExpression(format!(
                "torus parameters out of range in `T({inner})`"
            )));
        }
        Ok((torus_braid(p, q), &rest[end + 1..]))
    } else if let Some(rest) = text.strip_prefix('L') {
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(BraidError::BadExpression(format!("bad factor `{text}`")));
        }
        let n: usize = digits.parse().unwrap();
        if n < 2 {
            return Err(BraidError::BadExpression(format!("L{n} needs n >= 2")));
        }
        Ok((make_ln(n), &rest[digits.len()..]))
    } else if let Some(rest) = text.strip_prefix("B[") {
        let Some(end) = rest.find(']') else {
            return Err(BraidError::BadExpression("unclosed `B[`".into()));
        };
        let inner = &rest[..end];
        let Some((s, w)) = inner.split_once(':') else {
            return Err(BraidError::BadExpression(format!(
                "expected `B[strands: word]`, got `B[{inner}]`"
            )));
        };
        let strands: usize = s
            .trim()
            .parse()
            .map_err(|_| BraidError::BadExpression(format!("bad strand count `{}`", s.trim())))?;
        let word = parse_braid(w, strands)?;
        Ok((word, &rest[end + 1..]))
    } else {
        Err(BraidError::BadExpression(format!(
            "unrecognized factor at `{text}`"
        )))
    }
}
