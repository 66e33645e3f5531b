//! Generator families and monomial arithmetic in the free graded-commutative
//! algebras H_*(Conf(R^n); F_p).
//!
//! Surface case (n = 2):
//! * p = 2: `F_2[e, x_1, x_2, ...]` with `x_j` in bidegree `(2^j - 1, 2^j)`.
//! * p odd: `F_p[e, y_1, ...] ⊗ Λ[z_0, z_1, ...]` with `y_j` in `(2p^j - 2, 2p^j)`
//!   and `z_j` in `(2p^j - 1, 2p^j)`.
//!
//! Higher dimensions (n > 2, p = 2) only expose `e` and the classes
//! `ω_j` in `(2^j - 1, 2^j)`; the full generating set lives in [`crate::words`].

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p > u32::MAX as u64 {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2u64;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        Ok(Prime(p as u32))
    }

    pub const TWO: Prime = Prime(2);

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn is_two(self) -> bool {
        self.0 == 2
    }

    /// Least nonnegative residue of `x` mod p.
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn neg(self, a: u32) -> u32 {
        (self.0 - a % self.0) % self.0
    }

    /// `(-1)^e` as a residue.
    pub fn sign(self, e: u64) -> u32 {
        if e.is_multiple_of(2) {
            1 % self.0
        } else {
            self.0 - 1
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(homological degree, particle count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Bidegree {
    pub deg: u32,
    pub par: u32,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { deg: 0, par: 0 };

    pub fn new(deg: u32, par: u32) -> Self {
        Bidegree { deg, par }
    }

    pub fn checked_add(self, other: Bidegree) -> Option<Bidegree> {
        Some(Bidegree {
            deg: self.deg.checked_add(other.deg)?,
            par: self.par.checked_add(other.par)?,
        })
    }

    pub fn checked_scale(self, k: u32) -> Option<Bidegree> {
        Some(Bidegree {
            deg: self.deg.checked_mul(k)?,
            par: self.par.checked_mul(k)?,
        })
    }

    pub fn checked_sub(self, other: Bidegree) -> Option<Bidegree> {
        Some(Bidegree {
            deg: self.deg.checked_sub(other.deg)?,
            par: self.par.checked_sub(other.par)?,
        })
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, rhs: Bidegree) -> Bidegree {
        self.checked_add(rhs).expect("bidegree overflow")
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.deg, self.par)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Polynomial,
    Exterior,
}

/// Declaration order is the name order used by the canonical generator order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GenName {
    E,
    X,
    Y,
    Z,
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: GenName,
    pub index: u32,
    pub bidegree: Bidegree,
    pub parity: Parity,
}

impl Generator {
    pub fn is_exterior(&self) -> bool {
        self.parity == Parity::Exterior
    }

    pub fn is_odd(&self) -> bool {
        self.bidegree.deg % 2 == 1
    }

    /// Text name as accepted by the CLI: `e`, `x3`, `y1`, `z0`, `w2`.
    pub fn label(&self) -> String {
        match self.name {
            GenName::E => "e".to_string(),
            GenName::X => format!("x{}", self.index),
            GenName::Y => format!("y{}", self.index),
            GenName::Z => format!("z{}", self.index),
            GenName::Omega => format!("w{}", self.index),
        }
    }
}

impl Ord for Generator {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.bidegree.par, self.name, self.index).cmp(&(other.bidegree.par, other.name, other.index))
    }
}

impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SurfaceF2,
    SurfaceOdd,
    HigherDimF2,
}

impl Family {
    pub fn key(self) -> &'static str {
        match self {
            Family::SurfaceF2 => "surface-f2",
            Family::SurfaceOdd => "surface-fp",
            Family::HigherDimF2 => "higher-dim-f2",
        }
    }

    pub fn is_surface(self) -> bool {
        !matches!(self, Family::HigherDimF2)
    }
}

fn pow_checked(base: u64, exp: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn to_u32(x: u64) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::Overflow("computing a generator bidegree"))
}

/// One of the generator families, indexed lazily.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneratorSet {
    family: Family,
    prime: Prime,
    n: u32,
}

impl GeneratorSet {
    /// The plane case: `Surface F_2` for p = 2, `Surface F_p` otherwise.
    pub fn surface(p: Prime) -> Self {
        let family = if p.is_two() {
            Family::SurfaceF2
        } else {
            Family::SurfaceOdd
        };
        GeneratorSet { family, prime: p, n: 2 }
    }

    pub fn higher_dim_f2(n: u32) -> Result<Self> {
        if n <= 2 {
            return Err(Error::domain(format!("higher-dimensional family needs n > 2, got {n}")));
        }
        Ok(GeneratorSet {
            family: Family::HigherDimF2,
            prime: Prime::TWO,
            n,
        })
    }

    /// Picks the family from `(p, n)`.
    pub fn for_params(p: Prime, n: u32) -> Result<Self> {
        match n {
            0 | 1 => Err(Error::domain(format!("ambient dimension must be ≥ 2, got {n}"))),
            2 => Ok(Self::surface(p)),
            _ if p.is_two() => Self::higher_dim_f2(n),
            _ => Err(Error::domain(format!(
                "no generator family for p = {p} odd and n = {n} > 2"
            ))),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn e(&self) -> Generator {
        Generator {
            name: GenName::E,
            index: 0,
            bidegree: Bidegree::new(0, 1),
            parity: Parity::Polynomial,
        }
    }

    /// Looks up a member of this family.
    pub fn generator(&self, name: GenName, index: u32) -> Result<Generator> {
        let p = self.prime.get() as u64;
        let (deg, par) = match (self.family, name) {
            (_, GenName::E) if index == 0 => return Ok(self.e()),
            (Family::SurfaceF2, GenName::X) | (Family::HigherDimF2, GenName::Omega) if index >= 1 => {
                let par = pow_checked(2, index).ok_or(Error::Overflow("computing 2^j"))?;
                (par - 1, par)
            }
            (Family::SurfaceOdd, GenName::Y) if index >= 1 => {
                let par = pow_checked(p, index)
                    .and_then(|v| v.checked_mul(2))
                    .ok_or(Error::Overflow("computing 2p^j"))?;
                (par - 2, par)
            }
            (Family::SurfaceOdd, GenName::Z) => {
                let par = pow_checked(p, index)
                    .and_then(|v| v.checked_mul(2))
                    .ok_or(Error::Overflow("computing 2p^j"))?;
                (par - 1, par)
            }
            _ => {
                return Err(Error::domain(format!(
                    "{name:?}{index} is not a generator of the {} family",
                    self.family.key()
                )))
            }
        };
        let bidegree = Bidegree::new(to_u32(deg)?, to_u32(par)?);
        let parity = if bidegree.deg % 2 == 1 && !self.prime.is_two() {
            Parity::Exterior
        } else {
            Parity::Polynomial
        };
        Ok(Generator {
            name,
            index,
            bidegree,
            parity,
        })
    }

    /// Parses `e`, `x<j>`, `y<j>`, `z<j>`, `w<j>`.
    pub fn parse_generator(&self, label: &str) -> Result<Generator> {
        let label = label.trim();
        if label == "e" {
            return Ok(self.e());
        }
        let mut chars = label.chars();
        let head = chars.next().ok_or_else(|| Error::domain("empty generator name"))?;
        let name = match head {
            'x' => GenName::X,
            'y' => GenName::Y,
            'z' => GenName::Z,
            'w' | 'ω' => GenName::Omega,
            _ => return Err(Error::domain(format!("unknown generator `{label}`"))),
        };
        let index: u32 = chars
            .as_str()
            .parse()
            .map_err(|_| Error::domain(format!("bad generator index in `{label}`")))?;
        self.generator(name, index)
    }

    /// All generators with particle count ≤ `max_par`, in canonical order.
    pub fn generators_up_to(&self, max_par: u32) -> Vec<Generator> {
        let mut out = Vec::new();
        if max_par >= 1 {
            out.push(self.e());
        }
        let names: &[GenName] = match self.family {
            Family::SurfaceF2 => &[GenName::X],
            Family::SurfaceOdd => &[GenName::Y, GenName::Z],
            Family::HigherDimF2 => &[GenName::Omega],
        };
        for &name in names {
            let start = if name == GenName::Z { 0 } else { 1 };
            for j in start.. {
                match self.generator(name, j) {
                    Ok(g) if g.bidegree.par <= max_par => out.push(g),
                    _ => break,
                }
            }
        }
        out.sort();
        out
    }

    /// The stability sequence `w_0 = e`, `w_m = x_m | y_m | ω_m`.
    pub fn stability_class(&self, m: u32) -> Result<Generator> {
        if m == 0 {
            return Ok(self.e());
        }
        let name = match self.family {
            Family::SurfaceF2 => GenName::X,
            Family::SurfaceOdd => GenName::Y,
            Family::HigherDimF2 => GenName::Omega,
        };
        self.generator(name, m)
    }

    pub fn contains(&self, g: &Generator) -> bool {
        self.generator(g.name, g.index).map(|h| h == *g).unwrap_or(false)
    }

    pub fn describe(&self) -> String {
        format!("{} (p={}, n={})", self.family.key(), self.prime, self.n)
    }
}

/// A basis monomial: exponents over a generator set, stored sparsely in
/// canonical generator order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    set: GeneratorSet,
    factors: Vec<(Generator, u32)>,
}

impl Monomial {
    pub fn one(set: GeneratorSet) -> Self {
        Monomial {
            set,
            factors: Vec::new(),
        }
    }

    pub fn generator(set: GeneratorSet, g: Generator) -> Result<Self> {
        Self::from_factors(set, [(g, 1)])
    }

    /// Builds a monomial; repeated generators are merged.
    pub fn from_factors(set: GeneratorSet, factors: impl IntoIterator<Item = (Generator, u32)>) -> Result<Self> {
        let mut map: BTreeMap<Generator, u32> = BTreeMap::new();
        for (g, k) in factors {
            if !set.contains(&g) {
                return Err(Error::domain(format!("{g} is not in {}", set.describe())));
            }
            if k == 0 {
                continue;
            }
            let slot = map.entry(g).or_insert(0);
            *slot = slot.checked_add(k).ok_or(Error::Overflow("merging exponents"))?;
        }
        if let Some((g, _)) = map.iter().find(|(g, &k)| g.is_exterior() && k > 1) {
            return Err(Error::domain(format!("exterior generator {g} with exponent > 1")));
        }
        Ok(Monomial {
            set,
            factors: map.into_iter().collect(),
        })
    }

    pub(crate) fn from_sorted_unchecked(set: GeneratorSet, factors: Vec<(Generator, u32)>) -> Self {
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        Monomial { set, factors }
    }

    pub fn set(&self) -> GeneratorSet {
        self.set
    }

    pub fn factors(&self) -> &[(Generator, u32)] {
        &self.factors
    }

    pub fn exponent(&self, g: &Generator) -> u32 {
        self.factors
            .binary_search_by(|(h, _)| h.cmp(g))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn bidegree(&self) -> Bidegree {
        bidegree_of(self)
    }

    /// Total homological degree mod 2.
    pub fn is_odd(&self) -> bool {
        self.factors
            .iter()
            .map(|(g, k)| g.bidegree.deg as u64 * *k as u64)
            .sum::<u64>()
            % 2
            == 1
    }

    /// Divides out one copy of `g`, if present.
    pub fn without_one(&self, g: &Generator) -> Option<Monomial> {
        let i = self.factors.binary_search_by(|(h, _)| h.cmp(g)).ok()?;
        let mut factors = self.factors.clone();
        if factors[i].1 == 1 {
            factors.remove(i);
        } else {
            factors[i].1 -= 1;
        }
        Some(Monomial { set: self.set, factors })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.set, &self.factors).cmp(&(other.set, &other.factors))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (g, k)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if *k == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{k}")?;
            }
        }
        Ok(())
    }
}

/// Componentwise weighted sum of generator bidegrees.
pub fn bidegree_of(m: &Monomial) -> Bidegree {
    m.factors.iter().fold(Bidegree::ZERO, |acc, (g, k)| {
        acc + g.bidegree.checked_scale(*k).expect("bidegree overflow")
    })
}

/// Linear combination of monomials with nonzero coefficients mod p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    set: GeneratorSet,
    terms: BTreeMap<Monomial, u32>,
}

impl Polynomial {
    pub fn zero(set: GeneratorSet) -> Self {
        Polynomial {
            set,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(m: Monomial, coeff: u32) -> Self {
        let mut p = Polynomial::zero(m.set);
        p.add_term(m, coeff);
        p
    }

    pub fn set(&self) -> GeneratorSet {
        self.set
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn add_term(&mut self, m: Monomial, coeff: u32) {
        let p = self.set.prime();
        let c = coeff % p.get();
        if c == 0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = p.add(*o.get(), c);
                if sum == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        same_set(self.set, other.set)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> Polynomial {
        let mut out = Polynomial::zero(self.set);
        for (m, k) in self.terms() {
            out.add_term(m.clone(), self.set.prime().mul(k, c));
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        same_set(self.set, other.set)?;
        let p = self.set.prime();
        let mut out = Polynomial::zero(self.set);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                for (m, c) in multiply(a, b)?.terms() {
                    out.add_term(m.clone(), p.mul(p.mul(ca, cb), c));
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if *c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}·{m}")?;
            }
        }
        Ok(())
    }
}

fn same_set(a: GeneratorSet, b: GeneratorSet) -> Result<()> {
    if a != b {
        return Err(Error::MixedGeneratorSets(a.describe(), b.describe()));
    }
    Ok(())
}

/// Product of two basis monomials in the free graded-commutative algebra.
///
/// The sign is `(-1)^s` where `s` counts transpositions of odd-degree
/// generator occurrences needed to bring `a·b` into canonical order.
pub fn multiply(a: &Monomial, b: &Monomial) -> Result<Polynomial> {
    same_set(a.set, b.set)?;
    let set = a.set;
    let p = set.prime();
    let mut merged: Vec<(Generator, u32)> = Vec::with_capacity(a.factors.len() + b.factors.len());
    let (mut i, mut j) = (0, 0);
    while i < a.factors.len() || j < b.factors.len() {
        let take_a = j == b.factors.len() || (i < a.factors.len() && a.factors[i].0 <= b.factors[j].0);
        let take_b = i == a.factors.len() || (j < b.factors.len() && b.factors[j].0 <= a.factors[i].0);
        if take_a && take_b {
            let g = a.factors[i].0;
            if g.is_exterior() {
                return Ok(Polynomial::zero(set));
            }
            let k = a.factors[i]
                .1
                .checked_add(b.factors[j].1)
                .ok_or(Error::Overflow("multiplying monomials"))?;
            merged.push((g, k));
            i += 1;
            j += 1;
        } else if take_a {
            merged.push(a.factors[i]);
            i += 1;
        } else {
            merged.push(b.factors[j]);
            j += 1;
        }
    }
    let mut transpositions: u64 = 0;
    if !p.is_two() {
        for (g, kb) in b.factors.iter().filter(|(g, _)| g.is_odd()) {
            let passed: u64 = a
                .factors
                .iter()
                .filter(|(h, _)| h.is_odd() && h > g)
                .map(|(_, ka)| *ka as u64)
                .sum();
            transpositions += passed * *kb as u64;
        }
    }
    Ok(Polynomial::monomial(
        Monomial::from_sorted_unchecked(set, merged),
        p.sign(transpositions),
    ))
}

/// Outcome of applying a Dyer–Lashof operation to a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QResult {
    Zero,
    /// `x^2` for p = 2, `x^p` for odd p; left unexpanded.
    Square,
    Class { bidegree: Bidegree },
}

/// Bidegree of the top operation ξ on a class of bidegree `g`.
pub fn apply_xi(g: Bidegree, p: Prime, n: u32) -> Result<Bidegree> {
    if n < 2 {
        return Err(Error::domain(format!("ambient dimension must be ≥ 2, got {n}")));
    }
    if !p.is_two() && (g.deg as u64 + n as u64 - 1) % 2 == 1 {
        return Err(Error::domain(format!(
            "ξ on degree {} needs q + n - 1 even for odd p (n = {n})",
            g.deg
        )));
    }
    let pu = p.get() as u64;
    let deg = pu * g.deg as u64 + (n as u64 - 1) * (pu - 1);
    let par = pu * g.par as u64;
    Ok(Bidegree::new(
        u32::try_from(deg).map_err(|_| Error::Overflow("applying ξ"))?,
        u32::try_from(par).map_err(|_| Error::Overflow("applying ξ"))?,
    ))
}

/// Classifies `Q^s` on a class of bidegree `g`.
pub fn apply_q(s: i64, g: Bidegree, p: Prime, n: u32) -> Result<QResult> {
    if n < 2 {
        return Err(Error::domain(format!("ambient dimension must be ≥ 2, got {n}")));
    }
    if s < 0 {
        return Ok(QResult::Zero);
    }
    let q = g.deg as i64;
    let window = n as i64 - 1;
    let pu = p.get() as i64;
    // Effective excess: s - q for p = 2, 2s - q for odd p.
    let excess = if p.is_two() { s - q } else { 2 * s - q };
    if excess >= window {
        return Err(Error::domain(format!(
            "Q^{s} is not admissible on degree {q} with n = {n}"
        )));
    }
    match excess.cmp(&0) {
        Ordering::Less => Ok(QResult::Zero),
        Ordering::Equal => Ok(QResult::Square),
        Ordering::Greater => {
            let deg = if p.is_two() { q + s } else { q + 2 * s * (pu - 1) };
            let par = pu * g.par as i64;
            Ok(QResult::Class {
                bidegree: Bidegree::new(
                    u32::try_from(deg).map_err(|_| Error::Overflow("applying Q^s"))?,
                    u32::try_from(par).map_err(|_| Error::Overflow("applying Q^s"))?,
                ),
            })
        }
    }
}
