use serde::Serialize;
use serde_json::json;

use super::expr::*;
use super::parse::parse_expr;
use super::rules::{apply_rule, Rule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Vanishes,
    NormalForm(Expr),
    Unknown,
}

impl Verdict {
    pub fn key(&self) -> &'static str {
        match self {
            Verdict::Vanishes => "vanishes",
            Verdict::NormalForm(_) => "normal_form",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    pub path: Vec<usize>,
    /// The whole expression after the rewrite.
    #[serde(serialize_with = "ser_expr")]
    pub expr: Expr,
}

fn ser_expr<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(e)
}

/// A replayable derivation: every step names a rule and a position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTrace {
    pub n: u32,
    pub p: u32,
    pub initial: Expr,
    pub steps: Vec<Step>,
    pub verdict: Verdict,
}

impl ProofTrace {
    pub fn final_expr(&self) -> &Expr {
        self.steps.last().map(|s| &s.expr).unwrap_or(&self.initial)
    }

    /// One JSON object per line: `initial`, then each `step`, then `verdict`.
    pub fn to_jsonl(&self) -> String {
        let mut lines = vec![json!({
            "kind": "initial",
            "n": self.n,
            "p": self.p,
            "expr": self.initial.to_string(),
        })];
        for s in &self.steps {
            lines.push(json!({
                "kind": "step",
                "rule": s.rule.name(),
                "path": s.path,
                "expr": s.expr.to_string(),
            }));
        }
        let mut v = json!({ "kind": "verdict", "verdict": self.verdict.key() });
        if let Verdict::NormalForm(e) = &self.verdict {
            v["expr"] = json!(e.to_string());
        }
        lines.push(v);
        lines.iter().map(|l| l.to_string() + "\n").collect()
    }

    pub fn from_jsonl(text: &str) -> Result<ProofTrace> {
        let bad = |msg: &str| Error::Parse {
            pos: 0,
            msg: format!("trace: {msg}"),
        };
        let mut header = None;
        let mut steps = Vec::new();
        let mut verdict = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let v: serde_json::Value = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
            let expr = |v: &serde_json::Value| -> Result<Expr> {
                parse_expr(v["expr"].as_str().ok_or_else(|| bad("missing expr"))?)
            };
            match v["kind"].as_str() {
                Some("initial") => {
                    let num = |k: &str| v[k].as_u64().map(|x| x as u32).ok_or_else(|| bad("missing n or p"));
                    header = Some((num("n")?, num("p")?, expr(&v)?));
                }
                Some("step") => {
                    let rule: Rule = v["rule"].as_str().ok_or_else(|| bad("missing rule"))?.parse()?;
                    let path = v["path"]
                        .as_array()
                        .ok_or_else(|| bad("missing path"))?
                        .iter()
                        .map(|x| x.as_u64().map(|i| i as usize).ok_or_else(|| bad("bad path")))
                        .collect::<Result<_>>()?;
                    steps.push(Step {
                        rule,
                        path,
                        expr: expr(&v)?,
                    });
                }
                Some("verdict") => {
                    verdict = Some(match v["verdict"].as_str() {
                        Some("vanishes") => Verdict::Vanishes,
                        Some("normal_form") => Verdict::NormalForm(expr(&v)?),
                        Some("unknown") => Verdict::Unknown,
                        _ => return Err(bad("bad verdict")),
                    });
                }
                _ => return Err(bad("unknown line kind")),
            }
        }
        let (n, p, initial) = header.ok_or_else(|| bad("no initial line"))?;
        Ok(ProofTrace {
            n,
            p,
            initial,
            steps,
            verdict: verdict.ok_or_else(|| bad("no verdict line"))?,
        })
    }

    /// Re-applies every step and checks the verdict against the final expression.
    pub fn replay(&self, amb: &Ambient) -> Result<()> {
        let mut cur = self.initial.clone();
        for (i, s) in self.steps.iter().enumerate() {
            let next = apply_rule(amb, &cur, s.rule, &s.path)?;
            if next != s.expr {
                return Err(Error::domain(format!("step {i} ({}) does not reproduce its expression", s.rule)));
            }
            cur = next;
        }
        let ok = match &self.verdict {
            Verdict::Vanishes => cur.is_zero(),
            Verdict::NormalForm(e) => cur == *e,
            Verdict::Unknown => true,
        };
        if !ok {
            return Err(Error::domain("verdict disagrees with the final expression"));
        }
        Ok(())
    }
}

struct Prover<'a> {
    amb: &'a Ambient,
    cur: Expr,
    steps: Vec<Step>,
}

impl Prover<'_> {
    fn apply(&mut self, rule: Rule, path: &[usize]) -> Result<()> {
        self.cur = apply_rule(self.amb, &self.cur, rule, path)?;
        self.steps.push(Step {
            rule,
            path: path.to_vec(),
            expr: self.cur.clone(),
        });
        Ok(())
    }

    fn at(&self, path: &[usize]) -> Result<Expr> {
        Ok(self.cur.at(path)?.clone())
    }

    fn snapshot(&self) -> (Expr, usize) {
        (self.cur.clone(), self.steps.len())
    }

    fn restore(&mut self, snap: (Expr, usize)) {
        self.cur = snap.0;
        self.steps.truncate(snap.1);
    }

    /// Normalizes at `path` and reports whether it became zero.
    fn close(&mut self, path: &[usize]) -> Result<bool> {
        self.apply(Rule::LinearNormalize, path)?;
        Ok(self.cur.at(path)?.is_zero())
    }

    /// Tries to rewrite `[e, T]` at `path` to zero. On failure the
    /// expression may be partially rewritten; callers restore a snapshot.
    fn vanish(&mut self, path: &[usize]) -> Result<bool> {
        let Expr::Bracket(left, t) = self.at(path)? else {
            return Ok(false);
        };
        if *left != gen(ClassName::E) {
            return Ok(false);
        }
        let amb = *self.amb;
        let sub = |tail: &[usize]| [path, tail].concat();
        match *t {
            Expr::Zero => self.close(path),
            Expr::Q(..) => {
                self.apply(Rule::DlVanish, path)?;
                Ok(true)
            }
            Expr::Zeta(_) => {
                self.apply(Rule::ZetaVanish, path)?;
                Ok(true)
            }
            Expr::Gen(ClassName::E) => {
                if amb.odd() && amb.n.is_multiple_of(2) {
                    return Ok(false);
                }
                self.apply(Rule::PointBracket, path)?;
                Ok(true)
            }
            Expr::Gen(_) => {
                self.apply(Rule::Unfold, &sub(&[1]))?;
                self.vanish(path)
            }
            Expr::Bracket(ref a, ref b) if **a == gen(ClassName::E) && **b == gen(ClassName::E) => {
                if !amb.odd() {
                    self.apply(Rule::SelfBracketP2, &sub(&[1]))?;
                } else if amb.n % 2 == 1 {
                    self.apply(Rule::PointBracket, &sub(&[1]))?;
                } else {
                    self.apply(Rule::SelfJacobiOdd, path)?;
                    return Ok(true);
                }
                self.close(path)
            }
            Expr::Xi(_) => {
                // [e, ξu] = ad^p(u)(e) = [u, [u, ..., [u, e]]].
                self.apply(Rule::XiBracket, path)?;
                let mut inner = path.to_vec();
                while matches!(self.cur.at(&inner)?, Expr::Ad(..)) {
                    self.apply(Rule::AdUnfold, &inner)?;
                    if matches!(self.cur.at(&inner)?, Expr::Bracket(_, y) if matches!(**y, Expr::Ad(..))) {
                        inner.push(1);
                    }
                }
                self.apply(Rule::Antisymmetry, &inner)?;
                inner.push(0);
                if !self.vanish(&inner)? {
                    return Ok(false);
                }
                self.close(path)
            }
            Expr::BetaXi(_) => {
                self.apply(Rule::ZetaSolve, &sub(&[1]))?;
                self.apply(Rule::BracketLinear, path)?;
                self.apply(Rule::ZetaVanish, &sub(&[0]))?;
                if !self.vanish(&sub(&[1]))? {
                    return Ok(false);
                }
                self.close(path)
            }
            Expr::Ad(..) => {
                self.apply(Rule::AdUnfold, &sub(&[1]))?;
                if matches!(self.cur.at(path)?, Expr::Bracket(_, y) if !matches!(**y, Expr::Bracket(..))) {
                    return self.vanish(path);
                }
                self.jacobi_split(path)
            }
            Expr::Beta(ref u) => match **u {
                _ if amb.degree(u)? == 0 => {
                    self.apply(Rule::BetaDeg0, &sub(&[1]))?;
                    self.close(path)
                }
                Expr::Gen(ClassName::Z(0)) => {
                    self.apply(Rule::Unfold, &sub(&[1, 0]))?;
                    self.apply(Rule::BocksteinBracket, &sub(&[1]))?;
                    self.apply(Rule::BetaDeg0, &sub(&[1, 0, 0]))?;
                    self.apply(Rule::BetaDeg0, &sub(&[1, 1, 0, 1]))?;
                    self.close(path)
                }
                Expr::Gen(ClassName::Z(_)) => {
                    self.apply(Rule::Unfold, &sub(&[1, 0]))?;
                    self.apply(Rule::BetaXiCompose, &sub(&[1]))?;
                    self.vanish(path)
                }
                _ => Ok(false),
            },
            Expr::Bracket(..) => self.jacobi_split(path),
            Expr::Product(ref fs) if fs.len() >= 2 => {
                let mut brackets = Vec::new();
                self.expand(path, &mut brackets)?;
                for b in brackets {
                    let snap = self.snapshot();
                    if !self.vanish(&b)? {
                        self.restore(snap);
                    }
                }
                self.close(path)
            }
            _ => Ok(false),
        }
    }

    /// `[e,[a,b]]` via Jacobi into `[a,[b,e]]` and `[b,[e,a]]`, then both
    /// inner brackets with `e` are killed.
    fn jacobi_split(&mut self, path: &[usize]) -> Result<bool> {
        let sub = |tail: &[usize]| [path, tail].concat();
        self.apply(Rule::Jacobi, path)?;
        self.apply(Rule::Antisymmetry, &sub(&[0, 0, 1]))?;
        if !self.vanish(&sub(&[0, 0, 1, 0]))? {
            return Ok(false);
        }
        if !self.vanish(&sub(&[1, 0, 1]))? {
            return Ok(false);
        }
        self.close(path)
    }

    /// Expands `[e, f_1 ... f_r]` by the derivation rule, collecting the
    /// paths of the resulting brackets `[e, f_i]`.
    fn expand(&mut self, path: &[usize], out: &mut Vec<Vec<usize>>) -> Result<()> {
        self.apply(Rule::Derivation, path)?;
        out.push([path, &[0, 0]].concat());
        let rest = [path, &[1, 0, 1]].concat();
        if matches!(self.cur.at(&rest)?, Expr::Bracket(_, z) if matches!(**z, Expr::Product(_))) {
            self.expand(&rest, out)
        } else {
            out.push(rest);
            Ok(())
        }
    }
}

/// Attempts to show `[z, e] = 0`, where `e` is the point class.
pub fn check_point_bracket(amb: &Ambient, z: &Expr) -> Result<ProofTrace> {
    amb.infer(z)?;
    let e = gen(ClassName::E);
    let initial = br(z.clone(), e.clone());
    let mut pr = Prover {
        amb,
        cur: initial.clone(),
        steps: Vec::new(),
    };
    let point_dies = !amb.odd() || amb.n % 2 == 1;
    let verdict = if *z == e && point_dies {
        pr.apply(Rule::PointBracket, &[])?;
        Verdict::Vanishes
    } else if *z == e {
        if amb.n == 2 {
            pr.apply(Rule::Fold, &[])?;
        }
        Verdict::NormalForm(pr.cur.clone())
    } else {
        pr.apply(Rule::Antisymmetry, &[])?;
        if pr.vanish(&[0])? && pr.close(&[])? {
            Verdict::Vanishes
        } else {
            pr.restore((initial.clone(), 0));
            Verdict::Unknown
        }
    };
    Ok(ProofTrace {
        n: amb.n,
        p: amb.p.get(),
        initial,
        steps: pr.steps,
        verdict,
    })
}

/// The class named by `label`: a generator (`e`, `x2`, `z0`, ...) or a
/// point power `e^k`.
pub fn class_expr(label: &str) -> Result<Expr> {
    if let Some(k) = label.strip_prefix("e^") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::domain(format!("bad exponent in `{label}`")))?;
        if k == 0 {
            return Err(Error::domain("e^0 is the unit"));
        }
        return Ok(if k == 1 {
            gen(ClassName::E)
        } else {
            Expr::Product(vec![gen(ClassName::E); k])
        });
    }
    ClassName::parse(label)
        .map(gen)
        .ok_or_else(|| Error::domain(format!("unknown class `{label}`")))
}
