//! Command-line front end. `run` is the whole program minus process exit.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebra::{GeneratorSet, Prime};
use crate::basis::{dim_table, grid_csv, grid_markdown, poincare_table, DimTable};
use crate::browder::{check_point_bracket, class_expr, parse_expr, Ambient, Verdict};
use crate::error::{Error, Result};
use crate::stability::{cone_dim, optimality_witness, verify_ideal_coverage_with, verify_iso_range_with, RangeReport};
use crate::words::{verify_word_ranges, Strictness, WordReport};

#[derive(Debug, Parser)]
#[command(name = "confstab", version, about = "Homology of unordered configuration spaces of R^n with F_p coefficients")]
struct Cli {
    /// Size of the rayon thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Statement {
    Iso,
    Ideal,
}

#[derive(Debug, Args)]
struct Grid {
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 10)]
    max_deg: u32,
    #[arg(long, default_value_t = 20)]
    max_par: u32,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Dimensions of H_i(C_k) by basis enumeration.
    DimTable(Grid),
    /// Coefficients of the bivariate Poincaré series.
    Poincare(Grid),
    /// Dimensions of the order-m cone homology.
    ConeDim {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Brute-force check of a stable range.
    VerifyRange {
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Ambient dimension; only the plane is supported.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long, default_value_t = 24)]
        k_max: u32,
        #[arg(long, value_enum, default_value_t = Statement::Iso)]
        statement: Statement,
        /// Extra integers checked past floor(D).
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        slack: i64,
    },
    /// Least bidegree just outside the range where stabilization fails.
    Optimality {
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Ambient dimension; only the plane is supported.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long, default_value_t = 24)]
        k_max: u32,
    },
    /// Certificate that [z, e] vanishes, as JSON lines.
    BracketCheck {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// A named class (`e`, `x2`, `z0`, `w1`, `e^3`, ...).
        #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
        class: Option<String>,
        /// An expression in the text grammar.
        #[arg(long)]
        expr: Option<String>,
    },
    /// Unstable-range check for Dyer–Lashof words on e (p = 2, n > 2).
    WordsVerify {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 64)]
        max_par: u32,
        /// Require deg > D instead of deg ≥ D.
        #[arg(long)]
        strict: bool,
    },
}

struct Output {
    text: String,
    code: i32,
}

fn ok(text: String) -> Output {
    Output { text, code: 0 }
}

/// Dimension tables exist only for the plane.
fn grid_set(g: &Grid) -> Result<GeneratorSet> {
    if g.n != 2 {
        return Err(Error::domain(format!("dimension tables need n = 2, got {}", g.n)));
    }
    Ok(GeneratorSet::surface(Prime::new(g.p)?))
}

fn table_out(t: &DimTable, f: Format) -> Result<String> {
    Ok(match f {
        Format::Csv => t.to_csv(),
        Format::Json => serde_json::to_string_pretty(&t.to_json()).map_err(json_err)? + "\n",
        Format::Md => t.to_markdown(),
    })
}

fn json_err(e: serde_json::Error) -> Error {
    Error::domain(e.to_string())
}

fn range_out(r: &RangeReport, f: Format) -> Result<Output> {
    let code = if r.passed() { 0 } else { 2 };
    let text = match f {
        Format::Json => serde_json::to_string_pretty(r).map_err(json_err)? + "\n",
        Format::Csv => {
            let mut s = String::from("k,i,target_deg,target_par,monomial,reason\n");
            for v in &r.violations {
                s += &format!("{},{},{},{},{},{}\n", v.k, v.i, v.target.deg, v.target.par, v.monomial, v.reason);
            }
            s
        }
        Format::Md => {
            let mut s = format!(
                "**{}**\n\n| case | p | m | k_max | checked | boundary | violations |\n|---|---|---|---|---|---|---|\n| {} | {} | {} | {} | {} | {} | {} |\n",
                r.statement,
                r.params.case,
                r.params.p,
                r.params.m,
                r.params.k_max,
                r.checked,
                r.boundary,
                r.violations.len()
            );
            if let Some(w) = &r.witness {
                s += &format!(
                    "\nwitness: `{}` at source (i,k) = ({},{}), D = {}, gap = {}, tight = {}\n",
                    w.monomial, w.i, w.k, w.d, w.gap, w.tight
                );
            }
            s
        }
    };
    Ok(Output { text, code })
}

fn words_out(r: &WordReport, f: Format) -> Result<Output> {
    let code = if r.passed() { 0 } else { 2 };
    let text = match f {
        Format::Json => serde_json::to_string_pretty(r).map_err(json_err)? + "\n",
        Format::Csv => {
            let mut s = String::from("par,monomials\n");
            for (k, c) in r.monomials_by_par.iter().enumerate().skip(1) {
                s += &format!("{k},{c}\n");
            }
            s
        }
        Format::Md => {
            let mut s = format!(
                "| n | m | par bound | words | degenerate | monomials | violations |\n|---|---|---|---|---|---|---|\n| {} | {} | {} | {} | {} | {} | {} |\n\n| tag | count |\n|---|---|\n",
                r.n,
                r.m,
                r.par_bound,
                r.canonical_words,
                r.degenerate_words,
                r.monomials,
                r.violations.len()
            );
            for (t, c) in &r.histogram {
                s += &format!("| {t} | {c} |\n");
            }
            s
        }
    };
    Ok(Output { text, code })
}

fn execute(cli: &Cli) -> Result<Output> {
    let f = cli.format;
    match &cli.cmd {
        Cmd::DimTable(g) => Ok(ok(table_out(&dim_table(&grid_set(g)?, g.max_deg, g.max_par)?, f)?)),
        Cmd::Poincare(g) => Ok(ok(table_out(&poincare_table(&grid_set(g)?, g.max_deg, g.max_par)?, f)?)),
        Cmd::ConeDim { grid, m } => {
            let gs = grid_set(grid)?;
            let rows = (0..=grid.max_deg)
                .map(|i| (0..=grid.max_par).map(|k| cone_dim(&gs, *m, i, k)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(ok(match f {
                Format::Csv => grid_csv(&rows, grid.max_par),
                Format::Md => grid_markdown(&rows, grid.max_par),
                Format::Json => {
                    let v = serde_json::json!({
                        "case": gs.family().key(),
                        "p": gs.prime().get(),
                        "m": m,
                        "dims": rows,
                    });
                    serde_json::to_string_pretty(&v).map_err(json_err)? + "\n"
                }
            }))
        }
        Cmd::VerifyRange {
            p,
            n,
            m,
            k_max,
            statement,
            slack,
        } => {
            let gs = GeneratorSet::for_params(Prime::new(*p)?, *n)?;
            let report = match statement {
                Statement::Ideal => verify_ideal_coverage_with(&gs, *m, *k_max, *slack)?,
                Statement::Iso => {
                    let mut r = verify_iso_range_with(&gs, *m, *k_max, *slack)?;
                    r.witness = optimality_witness(&gs, *m, *k_max)?;
                    r
                }
            };
            range_out(&report, f)
        }
        Cmd::Optimality { p, n, m, k_max } => {
            let gs = GeneratorSet::for_params(Prime::new(*p)?, *n)?;
            let w = optimality_witness(&gs, *m, *k_max)?;
            let text = serde_json::to_string_pretty(&serde_json::json!({
                "p": p,
                "m": m,
                "k_max": k_max,
                "witness": w,
            }))
            .map_err(json_err)?
                + "\n";
            Ok(Output {
                text,
                code: if w.is_some() { 0 } else { 2 },
            })
        }
        Cmd::BracketCheck { p, n, class, expr } => {
            let amb = Ambient::new(*n, Prime::new(*p)?)?;
            let z = match (class, expr) {
                (Some(c), _) => class_expr(c)?,
                (None, Some(e)) => parse_expr(e)?,
                (None, None) => return Err(Error::domain("need --class or --expr")),
            };
            let trace = check_point_bracket(&amb, &z)?;
            Ok(Output {
                text: trace.to_jsonl(),
                code: if trace.verdict == Verdict::Vanishes { 0 } else { 2 },
            })
        }
        Cmd::WordsVerify { n, m, max_par, strict } => {
            let s = if *strict { Strictness::Above } else { Strictness::AtLeast };
            words_out(&verify_word_ranges(*n, *m, *max_par, s)?, f)
        }
    }
}

/// Runs the program on `args` (including the binary name) and returns the
/// exit code: 0 on success, 2 when a check finds a violation, 1 on usage or
/// input errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::domain(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match result {
        Ok(o) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &o.text),
                None => out.write_all(o.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return 1;
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("confstab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_and_usage() {
        assert_eq!(call(&["--help"]).0, 0);
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["dim-table", "--p", "4"]).0, 1);
        assert_eq!(call(&["bracket-check", "--p", "3"]).0, 1);
    }

    #[test]
    fn dim_table_csv() {
        let (code, out, _) = call(&["dim-table", "--p", "3", "--max-deg", "1", "--max-par", "2", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "i\\k,0,1,2\n0,1,1,1\n1,0,0,1\n");
    }

    #[test]
    fn bracket_check_exit_codes() {
        let (code, out, _) = call(&["bracket-check", "--p", "3", "--class", "y1"]);
        assert_eq!(code, 0);
        assert!(out.lines().last().unwrap().contains("vanishes"));
        let (code, out, _) = call(&["bracket-check", "--p", "3", "--class", "e"]);
        assert_eq!(code, 2);
        assert!(out.contains("gen(z0)"));
        assert_eq!(call(&["bracket-check", "--p", "3", "--expr", "br(gen(e)"]).0, 1);
    }

    #[test]
    fn verify_range_codes() {
        assert_eq!(call(&["verify-range", "--p", "3", "--n", "2", "--m", "1", "--k-max", "40"]).0, 0);
        assert_eq!(call(&["verify-range", "--p", "2", "--n", "3", "--m", "1"]).0, 1);
        let (code, out, _) = call(&["verify-range", "--p", "2", "--m", "0", "--k-max", "10"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["witness"]["monomial"], "x1");
        let (code, _, _) = call(&["verify-range", "--p", "2", "--m", "1", "--k-max", "10", "--statement", "ideal", "--slack", "1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn words_verify_strict_fails() {
        assert_eq!(call(&["words-verify", "--n", "3", "--m", "1", "--max-par", "8"]).0, 0);
        assert_eq!(call(&["words-verify", "--n", "3", "--m", "1", "--max-par", "8", "--strict"]).0, 2);
    }
}
