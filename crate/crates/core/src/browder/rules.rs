use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::expr::*;
use crate::error::{Error, Result};

/// Named rewrite rules. Each one replaces a single subexpression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Antisymmetry,
    Jacobi,
    SelfBracketP2,
    SelfBracketEven,
    SelfJacobiOdd,
    Derivation,
    DerivationFold,
    DlVanish,
    BocksteinBracket,
    BetaDeg0,
    ZetaVanish,
    XiBracket,
    ZetaDef,
    ZetaSolve,
    AdUnfold,
    BetaXiCompose,
    Unfold,
    Fold,
    PointBracket,
    BracketLinear,
    LinearNormalize,
}

impl Rule {
    pub const ALL: [Rule; 21] = [
        Rule::Antisymmetry,
        Rule::Jacobi,
        Rule::SelfBracketP2,
        Rule::SelfBracketEven,
        Rule::SelfJacobiOdd,
        Rule::Derivation,
        Rule::DerivationFold,
        Rule::DlVanish,
        Rule::BocksteinBracket,
        Rule::BetaDeg0,
        Rule::ZetaVanish,
        Rule::XiBracket,
        Rule::ZetaDef,
        Rule::ZetaSolve,
        Rule::AdUnfold,
        Rule::BetaXiCompose,
        Rule::Unfold,
        Rule::Fold,
        Rule::PointBracket,
        Rule::BracketLinear,
        Rule::LinearNormalize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Antisymmetry => "antisymmetry",
            Rule::Jacobi => "jacobi",
            Rule::SelfBracketP2 => "self_bracket_p2",
            Rule::SelfBracketEven => "self_bracket_even",
            Rule::SelfJacobiOdd => "self_jacobi_odd",
            Rule::Derivation => "derivation",
            Rule::DerivationFold => "derivation_fold",
            Rule::DlVanish => "dl_vanish",
            Rule::BocksteinBracket => "bockstein_bracket",
            Rule::BetaDeg0 => "beta_deg0",
            Rule::ZetaVanish => "zeta_vanish",
            Rule::XiBracket => "xi_bracket",
            Rule::ZetaDef => "zeta_def",
            Rule::ZetaSolve => "zeta_solve",
            Rule::AdUnfold => "ad_unfold",
            Rule::BetaXiCompose => "beta_xi_compose",
            Rule::Unfold => "unfold",
            Rule::Fold => "fold",
            Rule::PointBracket => "point_bracket",
            Rule::BracketLinear => "bracket_linear",
            Rule::LinearNormalize => "linear_normalize",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Rule> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown rule `{s}`")))
    }
}

/// Applies `rule` to the subexpression of `e` at `path`.
pub fn apply_rule(amb: &Ambient, e: &Expr, rule: Rule, path: &[usize]) -> Result<Expr> {
    let sub = e.at(path)?;
    let new = rewrite(amb, sub, rule).map_err(|err| match err {
        Mismatch(reason) => Error::RuleMismatch {
            rule: rule.name().to_string(),
            path: path.to_vec(),
            reason,
        },
    })?;
    let mut out = e.clone();
    out.replace_at(path, new)?;
    Ok(out)
}

struct Mismatch(String);

impl From<Error> for Mismatch {
    fn from(e: Error) -> Self {
        Mismatch(e.to_string())
    }
}

fn no(reason: &str) -> Mismatch {
    Mismatch(reason.to_string())
}

fn as_bracket(e: &Expr) -> std::result::Result<(&Expr, &Expr), Mismatch> {
    match e {
        Expr::Bracket(x, y) => Ok((x, y)),
        _ => Err(no("not a bracket")),
    }
}

/// Shifted degree `|x| + n - 1`.
fn shifted(amb: &Ambient, x: &Expr) -> Result<u64> {
    Ok(amb.degree(x)? as u64 + (amb.n - 1) as u64)
}

/// Signs `(s1, s2, s3)` of the graded Jacobi identity
/// `s1 [x,[y,z]] + s2 [y,[z,x]] + s3 [z,[x,y]] = 0`.
pub fn jacobi_signs(amb: &Ambient, x: &Expr, y: &Expr, z: &Expr) -> Result<(i64, i64, i64)> {
    let (dx, dy, dz) = (shifted(amb, x)?, shifted(amb, y)?, shifted(amb, z)?);
    Ok((
        Ambient::sign(dx * dz),
        Ambient::sign(dy * dx),
        Ambient::sign(dz * dy),
    ))
}

/// `[x, f_1 f_2 ... f_r]` splits as `y = f_1`, `z = f_2 ... f_r`.
fn split_product(fs: &[Expr]) -> Option<(&Expr, Expr)> {
    match fs {
        [y, z] => Some((y, z.clone())),
        [y, rest @ ..] if rest.len() >= 2 => Some((y, Expr::Product(rest.to_vec()))),
        _ => None,
    }
}

fn derivation_sign(amb: &Ambient, x: &Expr, y: &Expr) -> Result<i64> {
    Ok(Ambient::sign(amb.degree(y)? as u64 * shifted(amb, x)?))
}

fn unfold_class(amb: &Ambient, c: ClassName) -> std::result::Result<Expr, Mismatch> {
    amb.class_bidegree(c)?;
    Ok(match c {
        ClassName::E => return Err(no("e is primitive")),
        ClassName::X(1) => xi(gen(ClassName::E)),
        ClassName::X(j) => xi(gen(ClassName::X(j - 1))),
        ClassName::Z(0) => br(gen(ClassName::E), gen(ClassName::E)),
        ClassName::Z(j) => xi(gen(ClassName::Z(j - 1))),
        ClassName::Y(j) => bxi(gen(ClassName::Z(j - 1))),
        ClassName::W(1) => q(1, gen(ClassName::E)),
        ClassName::W(j) => q(1i64 << (j - 1), gen(ClassName::W(j - 1))),
    })
}

fn fold_expr(amb: &Ambient, e: &Expr) -> std::result::Result<Expr, Mismatch> {
    let candidate = match e {
        Expr::Bracket(x, y) if **x == gen(ClassName::E) && **y == gen(ClassName::E) => ClassName::Z(0),
        Expr::Xi(x) => match **x {
            Expr::Gen(ClassName::E) => ClassName::X(1),
            Expr::Gen(ClassName::X(j)) => ClassName::X(j + 1),
            Expr::Gen(ClassName::Z(j)) => ClassName::Z(j + 1),
            _ => return Err(no("no named class")),
        },
        Expr::BetaXi(x) => match **x {
            Expr::Gen(ClassName::Z(j)) => ClassName::Y(j + 1),
            _ => return Err(no("no named class")),
        },
        Expr::Q(s, x) => match **x {
            Expr::Gen(ClassName::E) if *s == 1 => ClassName::W(1),
            Expr::Gen(ClassName::W(j)) if j < 62 && *s == 1i64 << j => ClassName::W(j + 1),
            _ => return Err(no("no named class")),
        },
        _ => return Err(no("no named class")),
    };
    amb.class_bidegree(candidate)?;
    if unfold_class(amb, candidate)? != *e {
        return Err(no("no named class"));
    }
    Ok(gen(candidate))
}

fn rewrite(amb: &Ambient, e: &Expr, rule: Rule) -> std::result::Result<Expr, Mismatch> {
    let p = amb.p.get();
    match rule {
        Rule::Antisymmetry => {
            let (x, y) = as_bracket(e)?;
            let s = amb.antisymmetry_sign(amb.degree(x)?, amb.degree(y)?);
            Ok(sc(s, br(y.clone(), x.clone())))
        }
        Rule::Jacobi => {
            let (x, yz) = as_bracket(e)?;
            let (y, z) = as_bracket(yz).map_err(|_| no("right operand is not a bracket"))?;
            let (s1, s2, s3) = jacobi_signs(amb, x, y, z)?;
            Ok(Expr::Sum(vec![
                sc(-s1 * s2, br(y.clone(), br(z.clone(), x.clone()))),
                sc(-s1 * s3, br(z.clone(), br(x.clone(), y.clone()))),
            ]))
        }
        Rule::SelfBracketP2 => {
            let (x, y) = as_bracket(e)?;
            if amb.odd() || x != y {
                return Err(no("needs [x,x] with p = 2"));
            }
            Ok(Expr::Zero)
        }
        Rule::SelfBracketEven => {
            let (x, y) = as_bracket(e)?;
            if !amb.odd() || x != y {
                return Err(no("needs [x,x] with odd p"));
            }
            let d = amb.degree(x)?;
            if amb.antisymmetry_sign(d, d) != -1 {
                return Err(no("[x,x] is not forced to vanish by antisymmetry"));
            }
            Ok(Expr::Zero)
        }
        Rule::SelfJacobiOdd => {
            let (x, xx) = as_bracket(e)?;
            let (a, b) = as_bracket(xx).map_err(|_| no("right operand is not a bracket"))?;
            if !amb.odd() || a != x || b != x {
                return Err(no("needs [x,[x,x]] with odd p"));
            }
            Ok(Expr::Zero)
        }
        Rule::Derivation => {
            let (x, yz) = as_bracket(e)?;
            let Expr::Product(fs) = yz else {
                return Err(no("right operand is not a product"));
            };
            let (y, z) = split_product(fs).ok_or_else(|| no("product needs at least two factors"))?;
            let s = derivation_sign(amb, x, y)?;
            let mut first = vec![br(x.clone(), y.clone())];
            first.extend(fs[1..].iter().cloned());
            Ok(Expr::Sum(vec![
                Expr::Product(first),
                sc(s, Expr::Product(vec![y.clone(), br(x.clone(), z)])),
            ]))
        }
        Rule::DerivationFold => {
            let Expr::Sum(ts) = e else { return Err(no("not a sum")) };
            let [Expr::Product(first), Expr::Scalar(c, second)] = ts.as_slice() else {
                return Err(no("not the shape of an expanded derivation"));
            };
            let Some((Expr::Bracket(x, y), rest)) = first.split_first() else {
                return Err(no("first term does not start with a bracket"));
            };
            if rest.is_empty() {
                return Err(no("first term has no second factor"));
            }
            let z = if rest.len() == 1 {
                rest[0].clone()
            } else {
                Expr::Product(rest.to_vec())
            };
            let expect = Expr::Product(vec![(**y).clone(), br((**x).clone(), z)]);
            if **second != expect || amb.reduce(*c) != amb.reduce(derivation_sign(amb, x, y)?) {
                return Err(no("terms do not match a derivation expansion"));
            }
            let mut fs = vec![(**y).clone()];
            fs.extend(rest.iter().cloned());
            Ok(br((**x).clone(), Expr::Product(fs)))
        }
        Rule::DlVanish => match as_bracket(e)? {
            (_, Expr::Q(..)) => Ok(Expr::Zero),
            _ => Err(no("right operand is not a Q^s image")),
        },
        Rule::BocksteinBracket => {
            let Expr::Beta(inner) = e else { return Err(no("not a Bockstein")) };
            let (x, y) = as_bracket(inner)?;
            let s = Ambient::sign((amb.n - 1) as u64 + amb.degree(x)? as u64);
            Ok(Expr::Sum(vec![
                br(beta(x.clone()), y.clone()),
                sc(s, br(x.clone(), beta(y.clone()))),
            ]))
        }
        Rule::BetaDeg0 => {
            let Expr::Beta(x) = e else { return Err(no("not a Bockstein")) };
            if amb.degree(x)? != 0 {
                return Err(no("argument has positive degree"));
            }
            Ok(Expr::Zero)
        }
        Rule::ZetaVanish => match as_bracket(e)? {
            (_, Expr::Zeta(_)) => Ok(Expr::Zero),
            _ => Err(no("right operand is not a ζ image")),
        },
        Rule::XiBracket => match as_bracket(e)? {
            (x, Expr::Xi(y)) => Ok(ad(p, (**y).clone(), x.clone())),
            _ => Err(no("right operand is not a ξ image")),
        },
        Rule::ZetaDef => {
            let Expr::Zeta(y) = e else { return Err(no("not a ζ image")) };
            if !amb.odd() {
                return Err(no("needs odd p"));
            }
            Ok(Expr::Sum(vec![
                bxi((**y).clone()),
                sc(-1, ad(p - 1, (**y).clone(), beta((**y).clone()))),
            ]))
        }
        Rule::ZetaSolve => {
            let Expr::BetaXi(y) = e else { return Err(no("not a βξ image")) };
            Ok(Expr::Sum(vec![
                zeta((**y).clone()),
                ad(p - 1, (**y).clone(), beta((**y).clone())),
            ]))
        }
        Rule::AdUnfold => match e {
            Expr::Ad(0, _, y) => Ok((**y).clone()),
            Expr::Ad(1, x, y) => Ok(br((**x).clone(), (**y).clone())),
            Expr::Ad(i, x, y) => Ok(br((**x).clone(), ad(i - 1, (**x).clone(), (**y).clone()))),
            _ => Err(no("not an ad power")),
        },
        Rule::BetaXiCompose => match e {
            Expr::Beta(inner) => match &**inner {
                Expr::Xi(y) if amb.odd() => Ok(bxi((**y).clone())),
                _ => Err(no("needs β(ξy) with odd p")),
            },
            _ => Err(no("not a Bockstein")),
        },
        Rule::Unfold => match e {
            Expr::Gen(c) => unfold_class(amb, *c),
            _ => Err(no("not a named class")),
        },
        Rule::Fold => fold_expr(amb, e),
        Rule::PointBracket => {
            let (x, y) = as_bracket(e)?;
            let pe = gen(ClassName::E);
            if *x != pe || *y != pe {
                return Err(no("not [e,e]"));
            }
            if amb.odd() && amb.n.is_multiple_of(2) {
                return Err(no("[e,e] survives for odd p and even n"));
            }
            Ok(Expr::Zero)
        }
        Rule::BracketLinear => {
            let (x, y) = as_bracket(e)?;
            let spread = |t: &Expr, left: bool| -> Option<Expr> {
                let other = if left { y } else { x };
                let pair = |u: Expr| if left { br(u, other.clone()) } else { br(other.clone(), u) };
                match t {
                    Expr::Zero => Some(Expr::Zero),
                    Expr::Scalar(c, u) => Some(sc(*c, pair((**u).clone()))),
                    Expr::Sum(us) => Some(Expr::Sum(us.iter().cloned().map(pair).collect())),
                    _ => None,
                }
            };
            spread(x, true)
                .or_else(|| spread(y, false))
                .ok_or_else(|| no("no sum, scalar or zero operand"))
        }
        Rule::LinearNormalize => Ok(normalize(amb, e)?),
    }
}

/// Canonical linear form: sums flattened and sorted, like terms merged with
/// coefficients in `[1, p)`, scalars pulled out of brackets, products and
/// Bocksteins, products flattened and sorted with the Koszul sign, and zeros
/// propagated.
pub fn normalize(amb: &Ambient, e: &Expr) -> Result<Expr> {
    Ok(assemble(lin(amb, e)?))
}

type Lin = BTreeMap<Expr, u32>;

fn push(amb: &Ambient, acc: &mut Lin, c: u32, t: Expr) {
    let entry = acc.entry(t).or_insert(0);
    *entry = amb.p.add(*entry, c);
}

fn assemble(l: Lin) -> Expr {
    let mut terms: Vec<Expr> = l
        .into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(t, c)| if c == 1 { t } else { sc(c as i64, t) })
        .collect();
    match terms.len() {
        0 => Expr::Zero,
        1 => terms.pop().unwrap_or(Expr::Zero),
        _ => Expr::Sum(terms),
    }
}

fn single(t: Expr) -> Lin {
    Lin::from([(t, 1)])
}

fn lin(amb: &Ambient, e: &Expr) -> Result<Lin> {
    let mut out = Lin::new();
    match e {
        Expr::Zero => {}
        Expr::Gen(_) | Expr::Sym { .. } => out = single(e.clone()),
        Expr::Scalar(c, x) => {
            let c = amb.reduce(*c);
            for (t, a) in lin(amb, x)? {
                push(amb, &mut out, amb.p.mul(a, c), t);
            }
        }
        Expr::Sum(xs) => {
            for x in xs {
                for (t, a) in lin(amb, x)? {
                    push(amb, &mut out, a, t);
                }
            }
        }
        Expr::Product(fs) => {
            let mut partial: Vec<(u32, Vec<Expr>)> = vec![(1, Vec::new())];
            for f in fs {
                let lf = lin(amb, f)?;
                let mut next = Vec::new();
                for (c, prefix) in &partial {
                    for (t, a) in &lf {
                        let mut v = prefix.clone();
                        match t {
                            Expr::Product(inner) => v.extend(inner.iter().cloned()),
                            _ => v.push(t.clone()),
                        }
                        next.push((amb.p.mul(*c, *a), v));
                    }
                }
                partial = next;
            }
            for (c, factors) in partial {
                if let Some((sign, sorted)) = sort_factors(amb, factors)? {
                    let term = if sorted.len() == 1 {
                        sorted.into_iter().next().unwrap_or(Expr::Zero)
                    } else {
                        Expr::Product(sorted)
                    };
                    push(amb, &mut out, amb.p.mul(c, amb.reduce(sign)), term);
                }
            }
        }
        Expr::Bracket(x, y) => {
            let ly = lin(amb, y)?;
            for (s, a) in lin(amb, x)? {
                for (t, b) in &ly {
                    push(amb, &mut out, amb.p.mul(a, *b), br(s.clone(), t.clone()));
                }
            }
        }
        Expr::Beta(x) => {
            for (t, a) in lin(amb, x)? {
                push(amb, &mut out, a, beta(t));
            }
        }
        Expr::Ad(i, x, y) => {
            if *i == 0 {
                return lin(amb, y);
            }
            let nx = normalize(amb, x)?;
            if !nx.is_zero() {
                for (t, a) in lin(amb, y)? {
                    push(amb, &mut out, a, ad(*i, nx.clone(), t));
                }
            }
        }
        Expr::Xi(x) | Expr::BetaXi(x) | Expr::Zeta(x) | Expr::Q(_, x) => {
            let nx = normalize(amb, x)?;
            if !nx.is_zero() {
                let rebuilt = match e {
                    Expr::Xi(_) => xi(nx),
                    Expr::BetaXi(_) => bxi(nx),
                    Expr::Zeta(_) => zeta(nx),
                    Expr::Q(s, _) => q(*s, nx),
                    _ => unreachable!("matched above"),
                };
                out = single(rebuilt);
            }
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// Sorts commuting factors, returning the Koszul sign, or `None` when an odd
/// factor repeats at odd p.
fn sort_factors(amb: &Ambient, mut fs: Vec<Expr>) -> Result<Option<(i64, Vec<Expr>)>> {
    let degs: Vec<u32> = fs.iter().map(|f| amb.degree(f)).collect::<Result<_>>()?;
    let mut idx: Vec<usize> = (0..fs.len()).collect();
    let mut sign = 1i64;
    // Insertion sort tracks each adjacent transposition.
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && fs[idx[j - 1]] > fs[idx[j]] {
            if degs[idx[j - 1]] % 2 == 1 && degs[idx[j]] % 2 == 1 {
                sign = -sign;
            }
            idx.swap(j - 1, j);
            j -= 1;
        }
    }
    let sorted: Vec<Expr> = idx.iter().map(|&i| std::mem::replace(&mut fs[i], Expr::Zero)).collect();
    let sorted_degs: Vec<u32> = idx.iter().map(|&i| degs[i]).collect();
    if amb.odd() {
        for w in 0..sorted.len().saturating_sub(1) {
            if sorted[w] == sorted[w + 1] && sorted_degs[w] % 2 == 1 {
                return Ok(None);
            }
        }
    }
    Ok(Some((sign, sorted)))
}
