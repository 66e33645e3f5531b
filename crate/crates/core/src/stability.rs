//! Range constants `D(p, m, k)`, monomial ideals of stability classes, and
//! brute-force verifiers for the stable ranges of `Conf(R^2)`.
//!
//! The homology of the m-th iterated mapping cone of `(t_e, t_{w_1}, ...,
//! t_{w_{m-1}})` is the quotient of the free algebra by `(w_0, ..., w_{m-1})`,
//! and multiplication by a free polynomial generator is injective, so every
//! statement here reduces to counting monomials that avoid an ideal.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{multiply, Bidegree, Generator, GeneratorSet, Monomial, Prime};
use crate::basis::{count_over, enumerate_over};
use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// `D(p, m, k) = (B k - C) / A` with `A = p^m`, `B = p^m - 1` and
/// `C = Σ_{j<m} (p^m - 2p^j)` for odd p, `C = 0` for p = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RangeConstant {
    pub p: Prime,
    pub m: u32,
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl RangeConstant {
    pub fn new(p: Prime, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("D(p, m, k) needs m ≥ 1"));
        }
        let pp = p.get() as i128;
        let a = pp
            .checked_pow(m)
            .ok_or(Error::Overflow("computing p^m"))?;
        let c = if p.is_two() {
            0
        } else {
            (0..m).try_fold(0i128, |acc, j| {
                let term = a.checked_sub(2 * pp.checked_pow(j)?)?;
                acc.checked_add(term)
            })
            .ok_or(Error::Overflow("computing C(p, m)"))?
        };
        Ok(RangeConstant { p, m, a, b: a - 1, c })
    }

    pub fn value(&self, k: i64) -> Rational {
        Rational::new(self.b * k as i128 - self.c, self.a)
    }

    /// Largest integer `i` with `i ≤ D(p,m,k)`.
    pub fn floor(&self, k: i64) -> i64 {
        self.value(k).floor().to_integer() as i64
    }

    /// Largest integer `i` with `i < D(p,m,k)`.
    pub fn strict_floor(&self, k: i64) -> i64 {
        let v = self.value(k);
        if v.is_integer() {
            v.to_integer() as i64 - 1
        } else {
            self.floor(k)
        }
    }

    /// `deg ≥ D(p, m, par)`, compared exactly.
    pub fn is_unstable(&self, b: Bidegree) -> bool {
        Rational::from_integer(b.deg as i128) >= self.value(b.par as i64)
    }
}

pub fn d_constant(p: Prime, m: u32, k: i64) -> Result<Rational> {
    Ok(RangeConstant::new(p, m)?.value(k))
}

/// `b.deg ≥ D(p, m, b.par)`.
pub fn unstable_member(b: Bidegree, p: Prime, m: u32) -> Result<bool> {
    Ok(RangeConstant::new(p, m)?.is_unstable(b))
}

pub(crate) fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A monomial ideal generated by a list of generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealSpec {
    pub gens: Vec<Generator>,
}

impl IdealSpec {
    /// `(w_0, ..., w_{len-1})`.
    pub fn stability_prefix(gs: &GeneratorSet, len: u32) -> Result<Self> {
        Ok(IdealSpec {
            gens: (0..len).map(|j| gs.stability_class(j)).collect::<Result<_>>()?,
        })
    }

    pub fn contains_generator(&self, g: &Generator) -> bool {
        self.gens.contains(g)
    }

    pub fn describe(&self) -> String {
        let names: Vec<String> = self.gens.iter().map(|g| g.label()).collect();
        format!("({})", names.join(", "))
    }
}

/// Divisibility by some listed generator.
pub fn ideal_member(mon: &Monomial, ideal: &IdealSpec) -> bool {
    ideal.gens.iter().any(|g| mon.exponent(g) > 0)
}

fn surface_only(gs: &GeneratorSet) -> Result<()> {
    if !gs.family().is_surface() {
        return Err(Error::domain(format!(
            "range verification needs a surface family, got {}",
            gs.describe()
        )));
    }
    Ok(())
}

/// Generators (particle count ≤ `max_par`) outside `(w_0, ..., w_{m-1})`.
fn quotient_generators(gs: &GeneratorSet, m: u32, max_par: u32) -> Result<Vec<Generator>> {
    let ideal = IdealSpec::stability_prefix(gs, m)?;
    Ok(gs
        .generators_up_to(max_par)
        .into_iter()
        .filter(|g| !ideal.contains_generator(g))
        .collect())
}

/// Dimension of the order-m cone homology (the quotient by `(w_0..w_{m-1})`)
/// in bidegree `(i, k)`.
pub fn cone_dim(gs: &GeneratorSet, m: u32, i: u32, k: u32) -> Result<u64> {
    count_over(&quotient_generators(gs, m, k)?, Bidegree::new(i, k))
}

/// Cokernel of `· w_m` on the order-m cone homology, together with a
/// target monomial outside the image when the cokernel is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cokernel {
    pub target: Bidegree,
    pub target_dim: u64,
    pub image_dim: u64,
    pub injective: bool,
    pub spanning: Option<Monomial>,
}

impl Cokernel {
    pub fn dim(&self) -> u64 {
        self.target_dim - self.image_dim
    }
}

/// Computes the multiplication map `· w_m` monomial by monomial.
pub fn stab_cokernel(gs: &GeneratorSet, m: u32, target: Bidegree) -> Result<Cokernel> {
    let gens = quotient_generators(gs, m, target.par)?;
    let w = gs.stability_class(m)?;
    let targets = enumerate_over(gs, &gens, target);
    let sources = match target.checked_sub(w.bidegree) {
        Some(src) => enumerate_over(gs, &gens, src),
        None => Vec::new(),
    };
    let target_set: BTreeSet<&Monomial> = targets.iter().collect();
    let wm = Monomial::generator(*gs, w)?;
    let mut image = BTreeSet::new();
    let mut injective = true;
    for s in &sources {
        let prod = multiply(s, &wm)?;
        let mut terms = prod.terms();
        match (terms.next(), terms.next()) {
            (Some((m, _)), None) if target_set.contains(m) => {
                if !image.insert(m.clone()) {
                    injective = false;
                }
            }
            _ => injective = false,
        }
    }
    let spanning = targets.iter().find(|t| !image.contains(*t)).cloned();
    Ok(Cokernel {
        target,
        target_dim: targets.len() as u64,
        image_dim: image.len() as u64,
        injective,
        spanning,
    })
}

/// `dim coker(· w_m)` on the order-m cone homology at target `(i, k)`.
pub fn stab_cokernel_dim(gs: &GeneratorSet, m: u32, i: u32, k: u32) -> Result<u64> {
    Ok(stab_cokernel(gs, m, Bidegree::new(i, k))?.dim())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RangeParams {
    pub case: &'static str,
    pub p: u32,
    pub n: u32,
    pub m: u32,
    pub k_max: u32,
    /// Integers checked past `floor(D)`; 0 for the stated range.
    pub slack: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Source particle count.
    pub k: u32,
    /// Source degree (may be negative; only the target must be a real bidegree).
    pub i: i64,
    pub target: Bidegree,
    pub monomial: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub k: u32,
    pub i: i64,
    /// `D(p, m+1, k)` as an exact fraction.
    pub d: String,
    /// `i - D` as an exact fraction.
    pub gap: String,
    /// `i == floor(D) + 1`.
    pub tight: bool,
    pub target: Bidegree,
    pub monomial: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RangeReport {
    pub statement: String,
    pub params: RangeParams,
    pub checked: u64,
    /// Bidegrees with `i == D` exactly (surjection-only in the strict phrasing).
    pub boundary: u64,
    pub violations: Vec<Violation>,
    pub witness: Option<Witness>,
}

impl RangeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct KOutcome {
    checked: u64,
    boundary: u64,
    violations: Vec<Violation>,
}

fn merge(outcomes: Vec<KOutcome>) -> (u64, u64, Vec<Violation>) {
    let mut checked = 0;
    let mut boundary = 0;
    let mut violations = Vec::new();
    for o in outcomes {
        checked += o.checked;
        boundary += o.boundary;
        violations.extend(o.violations);
    }
    violations.sort_by_key(|v| (v.k, v.i));
    (checked, boundary, violations)
}

fn shifted(i: i64, shift: Bidegree, k: u32) -> Option<Bidegree> {
    let deg = u32::try_from(i + shift.deg as i64).ok()?;
    Some(Bidegree::new(deg, k.checked_add(shift.par)?))
}

/// Every basis monomial of bidegree `(i + deg w_{m-1}, k + par w_{m-1})`
/// with `i ≤ D(p, m, k) + slack` lies in `(w_0, ..., w_{m-1})`.
pub fn verify_ideal_coverage_with(gs: &GeneratorSet, m: u32, k_max: u32, slack: i64) -> Result<RangeReport> {
    surface_only(gs)?;
    let rc = RangeConstant::new(gs.prime(), m)?;
    let w = gs.stability_class(m - 1)?;
    let ideal = IdealSpec::stability_prefix(gs, m)?;
    let outcomes = (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<KOutcome> {
            let mut out = KOutcome {
                checked: 0,
                boundary: 0,
                violations: Vec::new(),
            };
            let d = rc.value(k as i64);
            for i in -(w.bidegree.deg as i64)..=rc.floor(k as i64) + slack {
                let Some(target) = shifted(i, w.bidegree, k) else { continue };
                out.checked += 1;
                if d == Rational::from_integer(i as i128) {
                    out.boundary += 1;
                }
                let basis = enumerate_over(gs, &gs.generators_up_to(target.par), target);
                if let Some(bad) = basis.iter().find(|mon| !ideal_member(mon, &ideal)) {
                    out.violations.push(Violation {
                        k,
                        i,
                        target,
                        monomial: bad.to_string(),
                        reason: "monomial outside the ideal",
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let (checked, boundary, violations) = merge(outcomes);
    Ok(RangeReport {
        statement: format!(
            "basis of H_(i+deg w_{}, k+par w_{}) lies in {} for i <= D({},{},k)",
            m - 1,
            m - 1,
            ideal.describe(),
            gs.prime(),
            m
        ),
        params: RangeParams {
            case: gs.family().key(),
            p: gs.prime().get(),
            n: gs.n(),
            m,
            k_max,
            slack,
        },
        checked,
        boundary,
        violations,
        witness: None,
    })
}

pub fn verify_ideal_coverage(gs: &GeneratorSet, m: u32, k_max: u32) -> Result<RangeReport> {
    verify_ideal_coverage_with(gs, m, k_max, 0)
}

/// `· w_m` on the order-m cone homology is an isomorphism onto target
/// bidegrees `(i + deg w_m, k + par w_m)` for integers `i ≤ D(p, m+1, k)`.
pub fn verify_iso_range_with(gs: &GeneratorSet, m: u32, k_max: u32, slack: i64) -> Result<RangeReport> {
    surface_only(gs)?;
    let rc = RangeConstant::new(gs.prime(), m + 1)?;
    let w = gs.stability_class(m)?;
    let outcomes = (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<KOutcome> {
            let mut out = KOutcome {
                checked: 0,
                boundary: 0,
                violations: Vec::new(),
            };
            let d = rc.value(k as i64);
            for i in -(w.bidegree.deg as i64)..=rc.floor(k as i64) + slack {
                let Some(target) = shifted(i, w.bidegree, k) else { continue };
                out.checked += 1;
                if d == Rational::from_integer(i as i128) {
                    out.boundary += 1;
                }
                let coker = stab_cokernel(gs, m, target)?;
                if !coker.injective {
                    out.violations.push(Violation {
                        k,
                        i,
                        target,
                        monomial: String::new(),
                        reason: "multiplication not injective",
                    });
                }
                if coker.dim() != 0 {
                    out.violations.push(Violation {
                        k,
                        i,
                        target,
                        monomial: coker.spanning.map(|s| s.to_string()).unwrap_or_default(),
                        reason: "nonzero cokernel",
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let (checked, boundary, violations) = merge(outcomes);
    Ok(RangeReport {
        statement: format!(
            "t_{} is an isomorphism on the order-{} cone for i <= D({},{},k)",
            w.label(),
            m,
            gs.prime(),
            m + 1
        ),
        params: RangeParams {
            case: gs.family().key(),
            p: gs.prime().get(),
            n: gs.n(),
            m,
            k_max,
            slack,
        },
        checked,
        boundary,
        violations,
        witness: None,
    })
}

pub fn verify_iso_range(gs: &GeneratorSet, m: u32, k_max: u32) -> Result<RangeReport> {
    verify_iso_range_with(gs, m, k_max, 0)
}

/// Lexicographically least `(k, i)` with integer `i > D(p, m+1, k)` at which
/// `· w_m` has a nonzero cokernel, searching `k ≤ k_max`.
pub fn optimality_witness(gs: &GeneratorSet, m: u32, k_max: u32) -> Result<Option<Witness>> {
    surface_only(gs)?;
    let rc = RangeConstant::new(gs.prime(), m + 1)?;
    let w = gs.stability_class(m)?;
    for k in 0..=k_max {
        let target_par = k + w.bidegree.par;
        // Highest degree any monomial can reach at this particle count.
        let cap = gs
            .generators_up_to(target_par)
            .iter()
            .map(|g| (g.bidegree.deg as u64 * target_par as u64).div_ceil(g.bidegree.par as u64))
            .max()
            .unwrap_or(0) as i64;
        let d = rc.value(k as i64);
        let first = rc.floor(k as i64) + 1;
        for i in first.max(-(w.bidegree.deg as i64))..=cap - w.bidegree.deg as i64 {
            let Some(target) = shifted(i, w.bidegree, k) else { continue };
            let coker = stab_cokernel(gs, m, target)?;
            if let Some(span) = coker.spanning {
                return Ok(Some(Witness {
                    k,
                    i,
                    d: fmt_rational(&d),
                    gap: fmt_rational(&(Rational::from_integer(i as i128) - d)),
                    tight: i == first,
                    target,
                    monomial: span.to_string(),
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(p: u64) -> GeneratorSet {
        GeneratorSet::surface(Prime::new(p).unwrap())
    }

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn d_examples() {
        for k in 0..20 {
            assert_eq!(d_constant(p(2), 1, k).unwrap(), Rational::new(k as i128, 2));
            assert_eq!(d_constant(p(3), 2, k).unwrap(), Rational::new(8 * k as i128 - 10, 9));
        }
        assert_eq!(d_constant(p(3), 1, 0).unwrap(), Rational::new(-1, 3));
        assert!(d_constant(p(3), 0, 4).is_err());
    }

    #[test]
    fn d_matches_closed_forms() {
        // p odd, m = 1: ((p-1)k - (p-2)) / p.
        for pr in [3u64, 5, 7] {
            for k in 0..30i64 {
                let expect = Rational::new((pr as i128 - 1) * k as i128 - (pr as i128 - 2), pr as i128);
                assert_eq!(d_constant(p(pr), 1, k).unwrap(), expect);
            }
        }
        // p = 2 has no constant term.
        let rc = RangeConstant::new(p(2), 4).unwrap();
        assert_eq!((rc.a, rc.b, rc.c), (16, 15, 0));
    }

    #[test]
    fn threshold_helpers() {
        let rc = RangeConstant::new(p(2), 1).unwrap();
        assert_eq!(rc.floor(4), 2);
        assert_eq!(rc.strict_floor(4), 1);
        assert_eq!(rc.floor(5), 2);
        assert_eq!(rc.strict_floor(5), 2);
        let rc = RangeConstant::new(p(3), 1).unwrap();
        assert_eq!(rc.floor(0), -1);
    }

    #[test]
    fn ideal_membership_examples() {
        let s3 = surface(3);
        let g = |l: &str| s3.parse_generator(l).unwrap();
        let mon = |f: &[(&str, u32)]| Monomial::from_factors(s3, f.iter().map(|(l, k)| (g(l), *k))).unwrap();
        let e_ideal = IdealSpec::stability_prefix(&s3, 1).unwrap();
        let ey_ideal = IdealSpec::stability_prefix(&s3, 2).unwrap();
        assert!(ideal_member(&mon(&[("e", 1), ("y1", 1)]), &e_ideal));
        assert!(!ideal_member(&mon(&[("z0", 1)]), &e_ideal));
        assert!(ideal_member(&mon(&[("y1", 1), ("z0", 1)]), &ey_ideal));
    }

    #[test]
    fn unstable_examples() {
        assert!(unstable_member(Bidegree::new(1, 2), p(3), 1).unwrap());
        assert!(!unstable_member(Bidegree::new(0, 1), p(3), 1).unwrap());
        assert!(unstable_member(Bidegree::new(1, 2), p(2), 1).unwrap());
    }

    #[test]
    fn cone_examples() {
        assert_eq!(cone_dim(&surface(3), 1, 1, 2).unwrap(), 1);
        for k in 1..10 {
            assert_eq!(cone_dim(&surface(5), 1, 0, k).unwrap(), 0);
            assert_eq!(cone_dim(&surface(2), 1, 0, k).unwrap(), 0);
        }
        assert_eq!(cone_dim(&surface(3), 2, 4, 6).unwrap(), 0);
        assert_eq!(cone_dim(&surface(3), 0, 4, 6).unwrap(), crate::basis::dim(&surface(3), 4, 6).unwrap());
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(stab_cokernel_dim(&surface(3), 0, 1, 2).unwrap(), 1);
        for k in 1..12 {
            assert_eq!(stab_cokernel_dim(&surface(3), 0, 0, k).unwrap(), 0);
        }
        assert_eq!(stab_cokernel_dim(&surface(2), 1, 1, 2).unwrap(), 0);
    }

    #[test]
    fn small_iso_ranges_pass() {
        for pr in [2u64, 3] {
            for m in 0..2 {
                let r = verify_iso_range(&surface(pr), m, 12).unwrap();
                assert!(r.passed(), "{r:?}");
                assert!(r.checked > 0);
            }
        }
    }

    #[test]
    fn widened_range_fails() {
        let r = verify_ideal_coverage_with(&surface(2), 1, 24, 1).unwrap();
        assert!(!r.passed());
        // x_1-type monomials escape the ideal (e) just above the range.
        assert!(r.violations.iter().any(|v| v.monomial.contains("x1")));
    }

    #[test]
    fn witnesses_for_plain_stability() {
        let w = optimality_witness(&surface(3), 0, 10).unwrap().unwrap();
        assert_eq!((w.k, w.target, w.monomial.as_str()), (1, Bidegree::new(1, 2), "z0"));
        assert!(w.tight);
        let w = optimality_witness(&surface(2), 0, 10).unwrap().unwrap();
        assert_eq!((w.k, w.target, w.monomial.as_str()), (1, Bidegree::new(1, 2), "x1"));
    }

    #[test]
    fn higher_dim_family_rejected() {
        let h = GeneratorSet::higher_dim_f2(3).unwrap();
        assert!(verify_iso_range(&h, 0, 4).is_err());
    }
}
