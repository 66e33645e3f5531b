//! Trace checker that shares nothing with the proof search: it reads the
//! JSON lines directly and re-applies each named rule.

use confstab::browder::{apply_rule, parse_expr, Ambient, Expr, Rule};
use confstab::Prime;

pub struct Checked {
    pub verdict: String,
    pub rules: Vec<Rule>,
}

pub fn check_trace(jsonl: &str) -> Result<Checked, String> {
    let lines: Vec<serde_json::Value> = jsonl
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let (first, rest) = lines.split_first().ok_or("empty trace")?;
    let (last, steps) = rest.split_last().ok_or("no verdict line")?;
    if first["kind"] != "initial" || last["kind"] != "verdict" {
        return Err("trace must start with initial and end with verdict".into());
    }
    let n = first["n"].as_u64().ok_or("missing n")? as u32;
    let p = Prime::new(first["p"].as_u64().ok_or("missing p")?).map_err(|e| e.to_string())?;
    let amb = Ambient::new(n, p).map_err(|e| e.to_string())?;
    let text = |v: &serde_json::Value| -> Result<Expr, String> {
        parse_expr(v["expr"].as_str().ok_or("missing expr")?).map_err(|e| e.to_string())
    };
    let mut cur = text(first)?;
    let start = amb.infer(&cur).map_err(|e| e.to_string())?;
    let mut rules = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        if s["kind"] != "step" {
            return Err(format!("line {} is not a step", i + 1));
        }
        let rule: Rule = s["rule"].as_str().ok_or("missing rule")?.parse().map_err(|e: confstab::Error| e.to_string())?;
        let path: Vec<usize> = s["path"]
            .as_array()
            .ok_or("missing path")?
            .iter()
            .map(|x| x.as_u64().map(|i| i as usize).ok_or("bad path"))
            .collect::<Result<_, _>>()?;
        let next = apply_rule(&amb, &cur, rule, &path).map_err(|e| format!("step {i}: {e}"))?;
        if next != text(s)? {
            return Err(format!("step {i} ({rule}) does not reproduce the recorded expression"));
        }
        let b = amb.infer(&next).map_err(|e| format!("step {i}: {e}"))?;
        if b.is_some() && b != start {
            return Err(format!("step {i} ({rule}) changes the bidegree"));
        }
        rules.push(rule);
        cur = next;
    }
    let verdict = last["verdict"].as_str().ok_or("missing verdict")?.to_string();
    match verdict.as_str() {
        "vanishes" if cur != Expr::Zero => return Err("vanishes but final expression is not zero".into()),
        "normal_form" if text(last)? != cur => return Err("normal form differs from final expression".into()),
        "vanishes" | "normal_form" | "unknown" => {}
        other => return Err(format!("unknown verdict {other}")),
    }
    Ok(Checked {
        verdict,
        rules,
    })
}
