use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::expr::*;
use super::rules::{apply_rule, jacobi_signs, normalize, Rule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: u32,
    pub p: u32,
    pub samples: usize,
    pub seed: u64,
    pub checked: u64,
    pub failures: Vec<String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn key(e: &Expr) -> (usize, &Expr) {
    (e.size(), e)
}

/// First position where a Lie rewrite applies, preorder.
fn find_rewrite(amb: &Ambient, e: &Expr, path: &mut Vec<usize>) -> Result<Option<(Rule, Vec<usize>)>> {
    if let Expr::Bracket(x, y) = e {
        if x == y {
            if !amb.odd() {
                return Ok(Some((Rule::SelfBracketP2, path.clone())));
            }
            let d = amb.degree(x)?;
            if amb.antisymmetry_sign(d, d) == -1 {
                return Ok(Some((Rule::SelfBracketEven, path.clone())));
            }
        } else if key(y) < key(x) {
            return Ok(Some((Rule::Antisymmetry, path.clone())));
        }
        if let Expr::Bracket(v, w) = &**y {
            if amb.odd() && x == v && x == w {
                return Ok(Some((Rule::SelfJacobiOdd, path.clone())));
            }
            if key(x) > key(v) && key(x) > key(w) {
                return Ok(Some((Rule::Jacobi, path.clone())));
            }
        }
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        let found = find_rewrite(amb, c, path)?;
        path.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Normal form for brackets of atoms: operands ordered by size then
/// syntax, `[u,[v,w]]` rewritten by Jacobi when `u` is strictly the largest,
/// and self-brackets removed where the rules force it.
pub fn lie_normal_form(amb: &Ambient, e: &Expr) -> Result<Expr> {
    let mut cur = normalize(amb, e)?;
    for _ in 0..10_000 {
        match find_rewrite(amb, &cur, &mut Vec::new())? {
            None => return Ok(cur),
            Some((rule, path)) => {
                cur = normalize(amb, &apply_rule(amb, &cur, rule, &path)?)?;
            }
        }
    }
    Err(Error::domain("Lie normal form did not terminate"))
}

fn random_atom(rng: &mut ChaCha8Rng, name: &str) -> Expr {
    if rng.gen_bool(0.15) {
        return gen(ClassName::E);
    }
    sym(name, rng.gen_range(0..6), rng.gen_range(1..5))
}

/// Named classes that exist in the ambient, besides `e`.
fn named_classes(amb: &Ambient) -> Vec<Expr> {
    let candidates = [
        ClassName::X(1),
        ClassName::X(2),
        ClassName::Y(1),
        ClassName::Z(0),
        ClassName::Z(1),
        ClassName::W(1),
        ClassName::W(2),
    ];
    candidates
        .into_iter()
        .filter(|c| amb.class_bidegree(*c).is_ok())
        .map(gen)
        .collect()
}

/// A random well-formed expression of small depth.
fn random_expr(amb: &Ambient, rng: &mut ChaCha8Rng, depth: u32) -> Result<Expr> {
    let named = named_classes(amb);
    for _ in 0..100 {
        let e = if depth == 0 || rng.gen_bool(0.4) {
            match rng.gen_range(0..3) {
                0 => gen(ClassName::E),
                1 if !named.is_empty() => named[rng.gen_range(0..named.len())].clone(),
                _ => sym(["u", "v"][rng.gen_range(0..2)], rng.gen_range(0..5), rng.gen_range(1..4)),
            }
        } else {
            let a = random_expr(amb, rng, depth - 1)?;
            match rng.gen_range(0..5) {
                0 => br(a, random_expr(amb, rng, depth - 1)?),
                1 => Expr::Product(vec![a, random_expr(amb, rng, depth - 1)?]),
                2 => beta(a),
                3 => {
                    let q_deg = amb.degree(&a)? as i64;
                    q(q_deg + rng.gen_range(0..amb.n as i64), a)
                }
                _ => xi(a),
            }
        };
        if matches!(amb.infer(&e), Ok(Some(_))) {
            return Ok(e);
        }
    }
    Ok(gen(ClassName::E))
}

/// Checks the sign conventions of the bracket rules on random samples:
/// antisymmetry applied twice is the identity on random well-formed
/// expressions, `[x,x] = 0` (p = 2) or `[x,[x,x]] = 0` (p odd) normalize to
/// zero, the graded Jacobi sum of every ordering of a triple of atoms
/// vanishes, and the derivation expansion folds back.
pub fn verify_sign_identities(amb: &Ambient, samples: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut fail = |what: String| failures.push(what);
    for _ in 0..samples {
        let mut names = ["a", "b", "c"];
        names.shuffle(&mut rng);
        let mut atoms: Vec<Expr> = names.iter().map(|n| random_atom(&mut rng, n)).collect();
        // Jacobi triples need distinct atoms; at most one may be e.
        let mut seen_e = false;
        for (a, n) in atoms.iter_mut().zip(names) {
            if *a == gen(ClassName::E) {
                if seen_e {
                    *a = sym(n, 0, 1);
                }
                seen_e = true;
            }
        }
        let (x, y, z) = (&atoms[0], &atoms[1], &atoms[2]);

        let w = random_expr(amb, &mut rng, 2)?;
        let v = random_expr(amb, &mut rng, 2)?;
        let pair = if rng.gen_bool(0.2) { br(w.clone(), w.clone()) } else { br(w.clone(), v) };
        let twice = apply_rule(amb, &apply_rule(amb, &pair, Rule::Antisymmetry, &[])?, Rule::Antisymmetry, &[0])?;
        checked += 1;
        if normalize(amb, &twice)? != normalize(amb, &pair)? {
            fail(format!("double antisymmetry: {pair}"));
        }

        let special = if amb.odd() {
            br(w.clone(), br(w.clone(), w.clone()))
        } else {
            br(w.clone(), w.clone())
        };
        checked += 1;
        if !lie_normal_form(amb, &special)?.is_zero() {
            fail(format!("self bracket: {special}"));
        }

        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let [a, b, c] = perm.map(|i| atoms[i].clone());
            let (s1, s2, s3) = jacobi_signs(amb, &a, &b, &c)?;
            let sum = Expr::Sum(vec![
                sc(s1, br(a.clone(), br(b.clone(), c.clone()))),
                sc(s2, br(b.clone(), br(c.clone(), a.clone()))),
                sc(s3, br(c.clone(), br(a.clone(), b.clone()))),
            ]);
            checked += 1;
            let nf = lie_normal_form(amb, &sum)?;
            if !nf.is_zero() {
                fail(format!("jacobi: {sum} -> {nf}"));
            }
        }

        let prod = if rng.gen_bool(0.5) {
            Expr::Product(vec![y.clone(), z.clone()])
        } else {
            Expr::Product(vec![y.clone(), z.clone(), x.clone()])
        };
        let der = br(x.clone(), prod);
        let expanded = apply_rule(amb, &der, Rule::Derivation, &[])?;
        checked += 1;
        match apply_rule(amb, &expanded, Rule::DerivationFold, &[]) {
            Ok(back) if back == der => {}
            _ => fail(format!("derivation fold: {der}")),
        }
    }
    Ok(IdentityReport {
        n: amb.n,
        p: amb.p.get(),
        samples,
        seed,
        checked,
        failures,
    })
}
