//! Dyer–Lashof words on the point class for `H_*(C(R^n); F_2)`, `n > 2`,
//! and a check that every monomial outside `(e, ω_1, ..., ω_{m-1})` lies in
//! the unstable range `deg ≥ D(2, m, par)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::algebra::{apply_q, apply_xi, Bidegree, Prime, QResult};
use crate::error::{Error, Result};
use crate::stability::RangeConstant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Q(u32),
    Xi,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Q(s) => write!(f, "Q^{s}"),
            Op::Xi => write!(f, "ξ"),
        }
    }
}

/// Effect of an outermost degenerate `Q^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degenerate {
    /// `s < q`: the operation vanishes.
    Zero,
    /// `s = q`: the operation is squaring.
    Square,
}

/// A word in `Q^s` and `ξ` applied to `e`, stored innermost first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpWord {
    n: u32,
    ops: Vec<Op>,
}

fn step(b: Bidegree, op: Op, n: u32) -> Result<QResult> {
    match op {
        Op::Xi => Ok(QResult::Class {
            bidegree: apply_xi(b, Prime::TWO, n)?,
        }),
        Op::Q(s) => apply_q(s as i64, b, Prime::TWO, n),
    }
}

impl OpWord {
    pub fn e(n: u32) -> Result<OpWord> {
        OpWord::new(vec![], n)
    }

    /// Validates the word. Degenerate `Q^s` (`s ≤ q`) may only be outermost.
    pub fn new(ops: Vec<Op>, n: u32) -> Result<OpWord> {
        if n <= 2 {
            return Err(Error::domain(format!("words need n > 2, got {n}")));
        }
        let mut b = Bidegree::new(0, 1);
        for (i, &op) in ops.iter().enumerate() {
            match step(b, op, n)? {
                QResult::Class { bidegree } => b = bidegree,
                QResult::Zero | QResult::Square if i + 1 == ops.len() => {}
                _ => {
                    return Err(Error::domain(format!(
                        "degenerate {op} at position {i} is not outermost"
                    )))
                }
            }
        }
        Ok(OpWord { n, ops })
    }

    /// `ω_j = Q^{2^{j-1}} ... Q^2 Q^1 e`.
    pub fn omega(j: u32, n: u32) -> Result<OpWord> {
        if j == 0 || j > 31 {
            return Err(Error::domain(format!("ω_j needs 1 ≤ j ≤ 31, got {j}")));
        }
        OpWord::new((0..j).map(|i| Op::Q(1 << i)).collect(), n)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Operations, innermost first.
    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn is_e(&self) -> bool {
        self.ops.is_empty()
    }

    fn inner(&self) -> Option<OpWord> {
        let (_, rest) = self.ops.split_last()?;
        Some(OpWord {
            n: self.n,
            ops: rest.to_vec(),
        })
    }

    fn outer(&self) -> Option<Op> {
        self.ops.last().copied()
    }

    /// Bidegree of the non-degenerate part below the outermost op.
    fn base_bidegree(&self) -> Bidegree {
        let mut b = Bidegree::new(0, 1);
        for &op in &self.ops[..self.ops.len().saturating_sub(1)] {
            if let Ok(QResult::Class { bidegree }) = step(b, op, self.n) {
                b = bidegree;
            }
        }
        b
    }

    pub fn degenerate(&self) -> Option<Degenerate> {
        let op = self.outer()?;
        match step(self.base_bidegree(), op, self.n) {
            Ok(QResult::Zero) => Some(Degenerate::Zero),
            Ok(QResult::Square) => Some(Degenerate::Square),
            _ => None,
        }
    }

    /// Bidegree, or `None` when the outermost op kills the class.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let Some(op) = self.outer() else {
            return Some(Bidegree::new(0, 1));
        };
        let b = self.base_bidegree();
        match step(b, op, self.n).ok()? {
            QResult::Zero => None,
            QResult::Square => Some(Bidegree::new(2 * b.deg, 2 * b.par)),
            QResult::Class { bidegree } => Some(bidegree),
        }
    }

    /// `Some(j)` when this is the word `ω_j`.
    pub fn omega_index(&self) -> Option<u32> {
        let j = self.ops.len() as u32;
        (j > 0 && self.ops.iter().enumerate().all(|(i, &op)| op == Op::Q(1 << i))).then_some(j)
    }
}

impl fmt::Display for OpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in self.ops.iter().rev() {
            write!(f, "{op} ")?;
        }
        write!(f, "e")
    }
}

/// A product of words, with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordMonomial {
    factors: Vec<OpWord>,
}

impl WordMonomial {
    pub fn new(mut factors: Vec<OpWord>) -> Result<WordMonomial> {
        if factors.is_empty() {
            return Err(Error::domain("the empty monomial is excluded"));
        }
        if factors.windows(2).any(|w| w[0].n != w[1].n) {
            return Err(Error::domain("words from different n"));
        }
        factors.sort();
        Ok(WordMonomial { factors })
    }

    pub fn factors(&self) -> &[OpWord] {
        &self.factors
    }

    pub fn bidegree(&self) -> Option<Bidegree> {
        self.factors
            .iter()
            .try_fold(Bidegree::ZERO, |acc, w| Some(acc + w.bidegree()?))
    }
}

impl fmt::Display for WordMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " · ")?;
            }
            write!(f, "({w})")?;
        }
        Ok(())
    }
}

/// Reasons a word or monomial is unstable, or why it drops out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    QDegenerate,
    Ideal,
    /// `ω_j` with `j ≥ m`.
    I,
    /// `ξ ω_j`.
    II,
    /// An operation applied to an unstable word.
    III,
    /// A product of at least two unstable factors.
    IV,
    /// `Q^s ω_j` with `1 ≤ j < m` and `A(j)+1 < s < A(j)+n-1`.
    V,
    /// `ξ e`, or `Q^s e` with `1 < s < n-1`.
    VI,
}

impl Tag {
    pub fn key(self) -> &'static str {
        match self {
            Tag::QDegenerate => "q_degenerate",
            Tag::Ideal => "ideal",
            Tag::I => "i",
            Tag::II => "ii",
            Tag::III => "iii",
            Tag::IV => "iv",
            Tag::V => "v",
            Tag::VI => "vi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordVerdict {
    Zero,
    Reduces(WordMonomial),
    IdealMember,
    Unstable,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub verdict: WordVerdict,
    pub tags: Vec<Tag>,
}

fn a(j: u32) -> u32 {
    (1 << j) - 1
}

fn in_ideal(w: &OpWord, m: u32) -> bool {
    w.is_e() || w.omega_index().is_some_and(|j| j < m)
}

/// Tag for a non-degenerate word outside the ideal, first match wins.
pub fn word_tag(w: &OpWord, m: u32) -> Option<Tag> {
    if w.degenerate().is_some() || in_ideal(w, m) {
        return None;
    }
    if w.omega_index().is_some_and(|j| j >= m) {
        return Some(Tag::I);
    }
    let inner = w.inner()?;
    let op = w.outer()?;
    if op == Op::Xi && inner.omega_index().is_some() {
        return Some(Tag::II);
    }
    if word_tag(&inner, m).is_some() {
        return Some(Tag::III);
    }
    if let (Op::Q(s), Some(j)) = (op, inner.omega_index()) {
        if (1..m).contains(&j) && a(j) + 1 < s && s < a(j) + w.n - 1 {
            return Some(Tag::V);
        }
    }
    if inner.is_e() && (op == Op::Xi || matches!(op, Op::Q(s) if 1 < s && s < w.n - 1)) {
        return Some(Tag::VI);
    }
    None
}

pub fn classify(mon: &WordMonomial, m: u32) -> Classification {
    for (i, w) in mon.factors.iter().enumerate() {
        match w.degenerate() {
            Some(Degenerate::Zero) => {
                return Classification {
                    verdict: WordVerdict::Zero,
                    tags: vec![Tag::QDegenerate],
                }
            }
            Some(Degenerate::Square) => {
                let base = w.inner().unwrap_or_else(|| w.clone());
                let mut factors = mon.factors.clone();
                factors[i] = base.clone();
                factors.push(base);
                factors.sort();
                return Classification {
                    verdict: WordVerdict::Reduces(WordMonomial { factors }),
                    tags: vec![Tag::QDegenerate],
                };
            }
            None => {}
        }
    }
    if mon.factors.iter().any(|w| in_ideal(w, m)) {
        return Classification {
            verdict: WordVerdict::IdealMember,
            tags: vec![Tag::Ideal],
        };
    }
    let tags: Option<Vec<Tag>> = mon.factors.iter().map(|w| word_tag(w, m)).collect();
    match tags {
        Some(mut tags) => {
            if mon.factors.len() >= 2 {
                tags.push(Tag::IV);
            }
            Classification {
                verdict: WordVerdict::Unstable,
                tags,
            }
        }
        None => Classification {
            verdict: WordVerdict::Unclassified,
            tags: vec![],
        },
    }
}

fn unstable_bidegree(b: Bidegree, m: u32) -> bool {
    RangeConstant::new(Prime::TWO, m)
        .map(|rc| rc.is_unstable(b))
        .unwrap_or(false)
}

/// Re-derives a word tag: the structural condition and `deg ≥ D(2, m, par)`.
pub fn replay_word_tag(w: &OpWord, m: u32, tag: Tag) -> bool {
    let Some(b) = w.bidegree() else { return false };
    let structural = match tag {
        Tag::I => w.omega_index().is_some_and(|j| j >= m),
        Tag::II => w.outer() == Some(Op::Xi) && w.inner().is_some_and(|u| u.omega_index().is_some()),
        Tag::III => w
            .inner()
            .and_then(|u| word_tag(&u, m).map(|t| replay_word_tag(&u, m, t)))
            .unwrap_or(false),
        Tag::V => match (w.outer(), w.inner().and_then(|u| u.omega_index())) {
            (Some(Op::Q(s)), Some(j)) => (1..m).contains(&j) && a(j) + 1 < s && s < a(j) + w.n - 1,
            _ => false,
        },
        Tag::VI => {
            w.inner().is_some_and(|u| u.is_e())
                && matches!(w.outer(), Some(Op::Xi) | Some(Op::Q(2..)))
                && !matches!(w.outer(), Some(Op::Q(s)) if s >= w.n - 1)
        }
        _ => false,
    };
    structural && unstable_bidegree(b, m)
}

/// All valid words with particle count ≤ `max_par`: canonical words (each
/// `Q^s` with `q < s < q + n - 1`, or `ξ`) plus one outermost degenerate
/// `Q^s`, `0 ≤ s ≤ q`, on each canonical word.
pub fn enumerate_words(n: u32, max_par: u32) -> Result<(Vec<OpWord>, Vec<OpWord>)> {
    let mut canonical = vec![OpWord::e(n)?];
    let mut frontier = canonical.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            let b = w.bidegree().ok_or_else(|| Error::domain("canonical word vanished"))?;
            if b.par * 2 > max_par {
                continue;
            }
            let choices = (b.deg + 1..b.deg + n - 1).map(Op::Q).chain([Op::Xi]);
            for op in choices {
                let mut ops = w.ops.clone();
                ops.push(op);
                next.push(OpWord { n, ops });
            }
        }
        canonical.extend(next.iter().cloned());
        frontier = next;
    }
    let mut degenerate = Vec::new();
    for w in &canonical {
        let Some(b) = w.bidegree() else { continue };
        if b.par * 2 > max_par {
            continue;
        }
        for s in 0..=b.deg {
            let mut ops = w.ops.clone();
            ops.push(Op::Q(s));
            degenerate.push(OpWord { n, ops });
        }
    }
    canonical.sort();
    degenerate.sort();
    Ok((canonical, degenerate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// `deg ≥ D`.
    AtLeast,
    /// `deg > D`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordViolation {
    pub par: u32,
    pub deg: u32,
    pub d: String,
    pub monomial: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordReport {
    pub n: u32,
    pub m: u32,
    pub par_bound: u32,
    pub strictness: Strictness,
    pub canonical_words: u64,
    pub degenerate_words: u64,
    pub histogram: BTreeMap<&'static str, u64>,
    /// Monomials outside the ideal, by particle count (index 0 unused).
    pub monomials_by_par: Vec<u128>,
    pub monomials: u128,
    pub unclassified: Vec<String>,
    pub replay_failures: Vec<String>,
    pub violations: Vec<WordViolation>,
}

impl WordReport {
    pub fn passed(&self) -> bool {
        self.unclassified.is_empty() && self.replay_failures.is_empty() && self.violations.is_empty()
    }
}

/// Classifies every word up to `par_bound`, then runs an exact
/// unbounded-knapsack over the unstable generator words to find the least
/// degree of a monomial at each particle count and compares it with
/// `D(2, m, par)`.
pub fn verify_word_ranges(n: u32, m: u32, par_bound: u32, strictness: Strictness) -> Result<WordReport> {
    let rc = RangeConstant::new(Prime::TWO, m)?;
    let (canonical, degenerate) = enumerate_words(n, par_bound)?;
    let mut histogram: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut unclassified = Vec::new();
    let mut replay_failures = Vec::new();
    let mut generators = Vec::new();
    for w in canonical.iter().chain(&degenerate) {
        let mon = WordMonomial::new(vec![w.clone()])?;
        let c = classify(&mon, m);
        for t in &c.tags {
            *histogram.entry(t.key()).or_default() += 1;
        }
        match c.verdict {
            WordVerdict::Unstable => {
                if !replay_word_tag(w, m, c.tags[0]) {
                    replay_failures.push(w.to_string());
                }
                generators.push((w.clone(), w.bidegree().ok_or_else(|| Error::domain("unstable word vanished"))?));
            }
            WordVerdict::Unclassified => unclassified.push(w.to_string()),
            WordVerdict::Reduces(r) => {
                let b = r.bidegree();
                if b != w.bidegree() {
                    replay_failures.push(format!("{w} does not reduce to {r}"));
                }
            }
            WordVerdict::Zero => {
                if w.bidegree().is_some() {
                    replay_failures.push(format!("{w} should vanish"));
                }
            }
            WordVerdict::IdealMember => {}
        }
    }

    let bound = par_bound as usize;
    // best[k] = least degree of a nonempty monomial of particle count k.
    let mut best: Vec<Option<(u32, usize, usize)>> = vec![None; bound + 1];
    let mut counts = vec![0u128; bound + 1];
    counts[0] = 1;
    for (_, b) in &generators {
        let wp = b.par as usize;
        for k in wp..=bound {
            counts[k] = counts[k]
                .checked_add(counts[k - wp])
                .ok_or(Error::Overflow("counting monomials"))?;
        }
    }
    for k in 1..=bound {
        for (gi, (_, b)) in generators.iter().enumerate() {
            let wp = b.par as usize;
            if wp > k {
                continue;
            }
            let prev = if wp == k { Some(0) } else { best[k - wp].map(|(d, _, _)| d) };
            if let Some(d) = prev {
                let cand = d + b.deg;
                if best[k].is_none_or(|(bd, _, _)| cand < bd) {
                    best[k] = Some((cand, gi, k - wp));
                }
            }
        }
    }
    let mut violations = Vec::new();
    for k in 1..=bound {
        let Some((deg, _, _)) = best[k] else { continue };
        let d = rc.value(k as i64);
        let deg_r = crate::stability::Rational::from_integer(deg as i128);
        let ok = match strictness {
            Strictness::AtLeast => deg_r >= d,
            Strictness::Above => deg_r > d,
        };
        if !ok {
            let mut factors = Vec::new();
            let mut at = k;
            while at > 0 {
                let Some((_, gi, rest)) = best[at] else { break };
                factors.push(generators[gi].0.clone());
                at = rest;
            }
            violations.push(WordViolation {
                par: k as u32,
                deg,
                d: crate::stability::fmt_rational(&d),
                monomial: WordMonomial::new(factors)?.to_string(),
            });
        }
    }
    let monomials = counts[1..].iter().try_fold(0u128, |acc, c| acc.checked_add(*c)).ok_or(Error::Overflow("counting monomials"))?;
    Ok(WordReport {
        n,
        m,
        par_bound,
        strictness,
        canonical_words: canonical.len() as u64,
        degenerate_words: degenerate.len() as u64,
        histogram,
        monomials_by_par: counts,
        monomials,
        unclassified,
        replay_failures,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_bidegrees() {
        for n in 3..7 {
            for j in 1..6 {
                let w = OpWord::omega(j, n).unwrap();
                assert_eq!(w.bidegree(), Some(Bidegree::new((1 << j) - 1, 1 << j)));
                assert_eq!(w.omega_index(), Some(j));
            }
        }
        assert!(OpWord::omega(2, 2).is_err());
        assert_eq!(OpWord::omega(3, 3).unwrap().to_string(), "Q^4 Q^2 Q^1 e");
    }

    #[test]
    fn degenerate_only_outermost() {
        assert!(OpWord::new(vec![Op::Q(0), Op::Q(1)], 3).is_err());
        let w = OpWord::new(vec![Op::Q(1), Op::Q(1)], 4).unwrap();
        assert_eq!(w.degenerate(), Some(Degenerate::Square));
        assert_eq!(w.bidegree(), Some(Bidegree::new(2, 4)));
        let w = OpWord::new(vec![Op::Q(1), Op::Q(0)], 4).unwrap();
        assert_eq!(w.degenerate(), Some(Degenerate::Zero));
        assert_eq!(w.bidegree(), None);
        assert!(OpWord::new(vec![Op::Q(3)], 3).is_err());
    }

    #[test]
    fn classification_examples() {
        let n = 4;
        let w1 = OpWord::omega(1, n).unwrap();
        let w2 = OpWord::omega(2, n).unwrap();
        let xi_w1 = OpWord::new(vec![Op::Q(1), Op::Xi], n).unwrap();
        let q_e = OpWord::new(vec![Op::Q(2)], n).unwrap();
        let q_w1 = OpWord::new(vec![Op::Q(1), Op::Q(3)], n).unwrap();
        let one = |w: &OpWord| WordMonomial::new(vec![w.clone()]).unwrap();
        assert_eq!(classify(&one(&w1), 2).verdict, WordVerdict::IdealMember);
        assert_eq!(classify(&one(&w2), 2).tags, vec![Tag::I]);
        assert_eq!(classify(&one(&xi_w1), 2).tags, vec![Tag::II]);
        assert_eq!(classify(&one(&q_e), 2).tags, vec![Tag::VI]);
        assert_eq!(classify(&one(&q_w1), 2).tags, vec![Tag::V]);
        let prod = WordMonomial::new(vec![w2.clone(), q_e.clone()]).unwrap();
        assert_eq!(classify(&prod, 2).tags, vec![Tag::I, Tag::VI, Tag::IV]);
        let sq = OpWord::new(vec![Op::Q(1), Op::Q(1)], n).unwrap();
        assert_eq!(
            classify(&one(&sq), 2).verdict,
            WordVerdict::Reduces(WordMonomial::new(vec![w1.clone(), w1]).unwrap())
        );
        assert!(WordMonomial::new(vec![]).is_err());
    }

    #[test]
    fn strict_variant_fails_at_omega_m() {
        let r = verify_word_ranges(3, 2, 16, Strictness::Above).unwrap();
        assert!(!r.passed());
        assert!(r.violations.iter().any(|v| v.par == 4 && v.deg == 3));
        assert!(verify_word_ranges(3, 2, 16, Strictness::AtLeast).unwrap().passed());
    }

    fn monomials(gens: &[(OpWord, Bidegree)], bound: u32) -> Vec<Vec<usize>> {
        fn go(gens: &[(OpWord, Bidegree)], start: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            for i in start..gens.len() {
                if gens[i].1.par <= left {
                    cur.push(i);
                    go(gens, i, left - gens[i].1.par, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(gens, 0, bound, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn dp_matches_explicit_enumeration() {
        for n in [3, 4, 5] {
            for m in [1, 2, 3] {
                let bound = 12;
                let r = verify_word_ranges(n, m, bound, Strictness::AtLeast).unwrap();
                let (canonical, _) = enumerate_words(n, bound).unwrap();
                let gens: Vec<(OpWord, Bidegree)> = canonical
                    .into_iter()
                    .filter(|w| classify(&WordMonomial::new(vec![w.clone()]).unwrap(), m).verdict == WordVerdict::Unstable)
                    .map(|w| {
                        let b = w.bidegree().unwrap();
                        (w, b)
                    })
                    .collect();
                let all = monomials(&gens, bound);
                assert_eq!(all.len() as u128, r.monomials, "n={n} m={m}");
                let rc = RangeConstant::new(Prime::TWO, m).unwrap();
                for mon in &all {
                    let words: Vec<OpWord> = mon.iter().map(|&i| gens[i].0.clone()).collect();
                    let wm = WordMonomial::new(words).unwrap();
                    assert_eq!(classify(&wm, m).verdict, WordVerdict::Unstable);
                    assert!(rc.is_unstable(wm.bidegree().unwrap()), "{wm}");
                }
            }
        }
    }
}
