use super::expr::{ClassName, Expr};
use crate::error::{Error, Result};

/// Parses the text form produced by `Expr`'s `Display`.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_alphanumeric() || c == '_') || (i == 0 && !c.is_ascii_alphabetic()))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected identifier"));
        }
        self.pos += len;
        Ok(&self.src[start..start + len])
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let sign = usize::from(rest.starts_with('-'));
        let digits = rest[sign..].bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.err("expected integer"));
        }
        self.pos += sign + digits;
        self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::Parse {
                pos: start,
                msg: "integer out of range".into(),
            })
    }

    fn uint(&mut self) -> Result<u32> {
        let at = self.pos;
        let v = self.int()?;
        u32::try_from(v).map_err(|_| Error::Parse {
            pos: at,
            msg: "expected a non-negative integer".into(),
        })
    }

    fn boxed(&mut self) -> Result<Box<Expr>> {
        Ok(Box::new(self.expr()?))
    }

    fn list(&mut self) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        if self.peek() == Some(')') {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.peek() == Some(',') {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let at = self.pos;
        let head = self.ident()?.to_string();
        if head == "zero" {
            return Ok(Expr::Zero);
        }
        self.expect('(')?;
        let e = match head.as_str() {
            "gen" => {
                let name = self.ident()?.to_string();
                Expr::Gen(ClassName::parse(&name).ok_or_else(|| self.err(format!("unknown class `{name}`")))?)
            }
            "sym" => {
                let name = self.ident()?.to_string();
                self.expect(',')?;
                let deg = self.uint()?;
                self.expect(',')?;
                let par = self.uint()?;
                Expr::Sym { name, deg, par }
            }
            "sc" => {
                let c = self.int()?;
                self.expect(',')?;
                Expr::Scalar(c, self.boxed()?)
            }
            "sum" => Expr::Sum(self.list()?),
            "mul" => Expr::Product(self.list()?),
            "br" => {
                let x = self.boxed()?;
                self.expect(',')?;
                Expr::Bracket(x, self.boxed()?)
            }
            "xi" => Expr::Xi(self.boxed()?),
            "beta" => Expr::Beta(self.boxed()?),
            "bxi" => Expr::BetaXi(self.boxed()?),
            "zeta" => Expr::Zeta(self.boxed()?),
            "q" => {
                let s = self.int()?;
                self.expect(',')?;
                Expr::Q(s, self.boxed()?)
            }
            "ad" => {
                let i = self.uint()?;
                self.expect(',')?;
                let x = self.boxed()?;
                self.expect(',')?;
                Expr::Ad(i, x, self.boxed()?)
            }
            _ => {
                return Err(Error::Parse {
                    pos: at,
                    msg: format!("unknown constructor `{head}`"),
                })
            }
        };
        self.expect(')')?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::super::expr::*;
    use super::*;

    #[test]
    fn round_trip_examples() {
        let e = sum_of(vec![
            sc(-1, br(gen(ClassName::E), gen(ClassName::Z(0)))),
            ad(2, sym("u_1", 3, 2), beta(q(4, Expr::Zero))),
            Expr::Product(vec![]),
        ]);
        let text = e.to_string();
        assert_eq!(parse_expr(&text).unwrap(), e);
        assert_eq!(
            parse_expr(" br( gen(e) , gen(x2) ) ").unwrap(),
            br(gen(ClassName::E), gen(ClassName::X(2)))
        );
    }

    fn sum_of(xs: Vec<Expr>) -> Expr {
        Expr::Sum(xs)
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_expr("gen(q1)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("br(gen(e))"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("gen(e) x"), Err(Error::Parse { pos: 7, .. })));
        assert!(parse_expr("sym(a,-1,2)").is_err());
        assert!(parse_expr("").is_err());
    }
}
