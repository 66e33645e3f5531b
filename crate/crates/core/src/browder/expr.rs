use std::fmt;

use crate::algebra::{apply_q, apply_xi, Bidegree, Prime, QResult};
use crate::error::{Error, Result};

/// Named classes of the small-degree algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassName {
    E,
    X(u32),
    Y(u32),
    Z(u32),
    W(u32),
}

impl ClassName {
    pub fn parse(s: &str) -> Option<ClassName> {
        if s == "e" {
            return Some(ClassName::E);
        }
        let (head, idx) = s.split_at(1);
        if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let j: u32 = idx.parse().ok()?;
        match head {
            "x" => Some(ClassName::X(j)),
            "y" => Some(ClassName::Y(j)),
            "z" => Some(ClassName::Z(j)),
            "w" => Some(ClassName::W(j)),
            _ => None,
        }
    }
}

impl fmt::Display for ClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassName::E => write!(f, "e"),
            ClassName::X(j) => write!(f, "x{j}"),
            ClassName::Y(j) => write!(f, "y{j}"),
            ClassName::Z(j) => write!(f, "z{j}"),
            ClassName::W(j) => write!(f, "w{j}"),
        }
    }
}

/// Syntax tree of an expression in the homology operations.
///
/// Children are addressed by index: the argument of a unary node is child 0,
/// bracket and `ad` operands are children 0 and 1, and sum/product terms are
/// numbered in order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Zero,
    Gen(ClassName),
    Sym { name: String, deg: u32, par: u32 },
    Scalar(i64, Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Bracket(Box<Expr>, Box<Expr>),
    Xi(Box<Expr>),
    Beta(Box<Expr>),
    BetaXi(Box<Expr>),
    Zeta(Box<Expr>),
    Q(i64, Box<Expr>),
    Ad(u32, Box<Expr>, Box<Expr>),
}

pub fn gen(c: ClassName) -> Expr {
    Expr::Gen(c)
}

pub fn sym(name: &str, deg: u32, par: u32) -> Expr {
    Expr::Sym {
        name: name.to_string(),
        deg,
        par,
    }
}

pub fn sc(c: i64, x: Expr) -> Expr {
    Expr::Scalar(c, Box::new(x))
}

pub fn br(x: Expr, y: Expr) -> Expr {
    Expr::Bracket(Box::new(x), Box::new(y))
}

pub fn xi(x: Expr) -> Expr {
    Expr::Xi(Box::new(x))
}

pub fn beta(x: Expr) -> Expr {
    Expr::Beta(Box::new(x))
}

pub fn bxi(x: Expr) -> Expr {
    Expr::BetaXi(Box::new(x))
}

pub fn zeta(x: Expr) -> Expr {
    Expr::Zeta(Box::new(x))
}

pub fn q(s: i64, x: Expr) -> Expr {
    Expr::Q(s, Box::new(x))
}

pub fn ad(i: u32, x: Expr, y: Expr) -> Expr {
    Expr::Ad(i, Box::new(x), Box::new(y))
}

impl Expr {
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Zero | Expr::Gen(_) | Expr::Sym { .. } => vec![],
            Expr::Scalar(_, x) | Expr::Xi(x) | Expr::Beta(x) | Expr::BetaXi(x) | Expr::Zeta(x) | Expr::Q(_, x) => {
                vec![x]
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().collect(),
            Expr::Bracket(x, y) | Expr::Ad(_, x, y) => vec![x, y],
        }
    }

    fn child_mut(&mut self, i: usize) -> Option<&mut Expr> {
        match self {
            Expr::Zero | Expr::Gen(_) | Expr::Sym { .. } => None,
            Expr::Scalar(_, x) | Expr::Xi(x) | Expr::Beta(x) | Expr::BetaXi(x) | Expr::Zeta(x) | Expr::Q(_, x) => {
                (i == 0).then_some(&mut **x)
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.get_mut(i),
            Expr::Bracket(x, y) | Expr::Ad(_, x, y) => match i {
                0 => Some(&mut **x),
                1 => Some(&mut **y),
                _ => None,
            },
        }
    }

    pub fn at(&self, path: &[usize]) -> Result<&Expr> {
        let mut cur = self;
        for &i in path {
            cur = *cur
                .children()
                .get(i)
                .ok_or_else(|| Error::BadPosition(path.to_vec()))?;
        }
        Ok(cur)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Result<&mut Expr> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i).ok_or_else(|| Error::BadPosition(path.to_vec()))?;
        }
        Ok(cur)
    }

    /// Replaces the subexpression at `path`.
    pub fn replace_at(&mut self, path: &[usize], new: Expr) -> Result<()> {
        *self.at_mut(path)? = new;
        Ok(())
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Zero)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, xs: &[Expr]) -> fmt::Result {
    write!(f, "{head}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Zero => write!(f, "zero"),
            Expr::Gen(c) => write!(f, "gen({c})"),
            Expr::Sym { name, deg, par } => write!(f, "sym({name},{deg},{par})"),
            Expr::Scalar(c, x) => write!(f, "sc({c},{x})"),
            Expr::Sum(xs) => write_list(f, "sum", xs),
            Expr::Product(xs) => write_list(f, "mul", xs),
            Expr::Bracket(x, y) => write!(f, "br({x},{y})"),
            Expr::Xi(x) => write!(f, "xi({x})"),
            Expr::Beta(x) => write!(f, "beta({x})"),
            Expr::BetaXi(x) => write!(f, "bxi({x})"),
            Expr::Zeta(x) => write!(f, "zeta({x})"),
            Expr::Q(s, x) => write!(f, "q({s},{x})"),
            Expr::Ad(i, x, y) => write!(f, "ad({i},{x},{y})"),
        }
    }
}

/// The ambient homology `H_*(C_k(R^n); F_p)` in which expressions live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ambient {
    pub n: u32,
    pub p: Prime,
}

impl Ambient {
    pub fn new(n: u32, p: Prime) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("need n ≥ 2, got {n}")));
        }
        Ok(Ambient { n, p })
    }

    pub fn odd(&self) -> bool {
        !self.p.is_two()
    }

    /// Bidegree of a named class, if it exists in this ambient.
    pub fn class_bidegree(&self, c: ClassName) -> Result<Bidegree> {
        let p = self.p.get();
        let pw = |j: u32| p.checked_pow(j).ok_or(Error::Overflow("class bidegree"));
        let surface = |what: &str| -> Result<()> {
            if self.n != 2 {
                return Err(Error::domain(format!("{what} needs n = 2")));
            }
            Ok(())
        };
        match c {
            ClassName::E => Ok(Bidegree::new(0, 1)),
            ClassName::X(j) => {
                surface("x_j")?;
                if self.odd() || j == 0 {
                    return Err(Error::domain("x_j needs p = 2 and j ≥ 1"));
                }
                let a = pw(j)?;
                Ok(Bidegree::new(a - 1, a))
            }
            ClassName::Y(j) => {
                surface("y_j")?;
                if !self.odd() || j == 0 {
                    return Err(Error::domain("y_j needs odd p and j ≥ 1"));
                }
                let a = pw(j)?;
                Ok(Bidegree::new(2 * a - 2, 2 * a))
            }
            ClassName::Z(j) => {
                surface("z_j")?;
                if !self.odd() {
                    return Err(Error::domain("z_j needs odd p"));
                }
                let a = pw(j)?;
                Ok(Bidegree::new(2 * a - 1, 2 * a))
            }
            ClassName::W(j) => {
                if self.odd() || self.n <= 2 || j == 0 {
                    return Err(Error::domain("w_j needs p = 2, n > 2 and j ≥ 1"));
                }
                let a = pw(j)?;
                Ok(Bidegree::new(a - 1, a))
            }
        }
    }

    /// Validates `e` and returns its bidegree, or `None` when the expression
    /// is a zero class for degree reasons.
    pub fn infer(&self, e: &Expr) -> Result<Option<Bidegree>> {
        let shift = self.n - 1;
        Ok(match e {
            Expr::Zero => None,
            Expr::Gen(c) => Some(self.class_bidegree(*c)?),
            Expr::Sym { deg, par, .. } => Some(Bidegree::new(*deg, *par)),
            Expr::Scalar(_, x) => self.infer(x)?,
            Expr::Sum(xs) => {
                let mut common = None;
                for x in xs {
                    if let Some(b) = self.infer(x)? {
                        match common {
                            None => common = Some(b),
                            Some(c) if c != b => {
                                return Err(Error::domain(format!("inhomogeneous sum: {c} and {b}")))
                            }
                            _ => {}
                        }
                    }
                }
                common
            }
            Expr::Product(xs) => {
                let mut acc = Some(Bidegree::ZERO);
                for x in xs {
                    let b = self.infer(x)?;
                    acc = match (acc, b) {
                        (Some(a), Some(b)) => Some(a.checked_add(b).ok_or(Error::Overflow("product bidegree"))?),
                        _ => None,
                    };
                }
                acc
            }
            Expr::Bracket(x, y) => match (self.infer(x)?, self.infer(y)?) {
                (Some(a), Some(b)) => Some(Bidegree::new(a.deg + b.deg + shift, a.par + b.par)),
                _ => None,
            },
            Expr::Xi(x) => match self.infer(x)? {
                Some(b) => Some(apply_xi(b, self.p, self.n)?),
                None => None,
            },
            Expr::Beta(x) => match self.infer(x)? {
                Some(b) if b.deg > 0 => Some(Bidegree::new(b.deg - 1, b.par)),
                _ => None,
            },
            Expr::BetaXi(x) | Expr::Zeta(x) => {
                if !self.odd() {
                    return Err(Error::domain("βξ and ζ need odd p"));
                }
                match self.infer(x)? {
                    Some(b) => {
                        let t = apply_xi(b, self.p, self.n)?;
                        Some(Bidegree::new(t.deg - 1, t.par))
                    }
                    None => None,
                }
            }
            Expr::Q(s, x) => match self.infer(x)? {
                Some(b) => match apply_q(*s, b, self.p, self.n)? {
                    QResult::Zero => None,
                    QResult::Square => Some(
                        b.checked_scale(self.p.get())
                            .ok_or(Error::Overflow("Q bidegree"))?,
                    ),
                    QResult::Class { bidegree } => Some(bidegree),
                },
                None => None,
            },
            Expr::Ad(i, x, y) => {
                let bx = self.infer(x)?;
                let by = self.infer(y)?;
                match (i, bx, by) {
                    (_, _, None) => None,
                    (0, _, Some(b)) => Some(b),
                    (_, None, _) => None,
                    (i, Some(a), Some(b)) => Some(Bidegree::new(
                        b.deg + i * (a.deg + shift),
                        b.par + i * a.par,
                    )),
                }
            }
        })
    }

    /// Homological degree, with zero classes read as degree 0.
    pub fn degree(&self, e: &Expr) -> Result<u32> {
        Ok(self.infer(e)?.map(|b| b.deg).unwrap_or(0))
    }

    /// `(-1)^e` as an integer.
    pub fn sign(e: u64) -> i64 {
        if e.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// The sign in `[x,y] = ±[y,x]`.
    pub fn antisymmetry_sign(&self, dx: u32, dy: u32) -> i64 {
        let (dx, dy, s) = (dx as u64, dy as u64, (self.n - 1) as u64);
        Self::sign(1 + dx * dy + s * (dx + dy + 1))
    }

    pub fn reduce(&self, c: i64) -> u32 {
        self.p.reduce(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(n: u32, p: u64) -> Ambient {
        Ambient::new(n, Prime::new(p).unwrap()).unwrap()
    }

    #[test]
    fn bracket_bidegree() {
        let a = amb(2, 3);
        let e = gen(ClassName::E);
        assert_eq!(a.infer(&br(e.clone(), e.clone())).unwrap(), Some(Bidegree::new(1, 2)));
        assert_eq!(a.infer(&gen(ClassName::Z(0))).unwrap(), Some(Bidegree::new(1, 2)));
        let a5 = amb(5, 2);
        assert_eq!(a5.infer(&br(sym("u", 2, 3), sym("v", 1, 1))).unwrap(), Some(Bidegree::new(7, 4)));
    }

    #[test]
    fn degree_zero_bockstein_is_zero() {
        let a = amb(2, 3);
        assert_eq!(a.infer(&beta(gen(ClassName::E))).unwrap(), None);
        assert_eq!(a.infer(&beta(gen(ClassName::Z(0)))).unwrap(), Some(Bidegree::new(0, 2)));
    }

    #[test]
    fn char_two_rejects_odd_primary_ops() {
        let a = amb(2, 2);
        assert!(a.infer(&zeta(gen(ClassName::E))).is_err());
        assert!(a.infer(&bxi(gen(ClassName::E))).is_err());
        assert!(a.infer(&gen(ClassName::Z(0))).is_err());
        assert!(a.infer(&gen(ClassName::W(1))).is_err());
        assert!(amb(3, 2).infer(&gen(ClassName::W(1))).is_ok());
    }

    #[test]
    fn ad_bidegree() {
        let a = amb(2, 3);
        let z0 = gen(ClassName::Z(0));
        let e = ad(2, z0.clone(), beta(z0.clone()));
        // ad^2(z0)(βz0): (0 + 2*(1+1), 2 + 2*2).
        assert_eq!(a.infer(&e).unwrap(), Some(Bidegree::new(4, 6)));
        assert_eq!(a.infer(&e).unwrap(), a.infer(&gen(ClassName::Y(1))).unwrap());
    }

    #[test]
    fn xi_of_generators() {
        let a = amb(2, 3);
        let z1 = a.infer(&xi(gen(ClassName::Z(0)))).unwrap();
        assert_eq!(z1, Some(a.class_bidegree(ClassName::Z(1)).unwrap()));
        assert!(a.infer(&xi(gen(ClassName::E))).is_err());
        let b = amb(2, 2);
        assert_eq!(b.infer(&xi(gen(ClassName::E))).unwrap(), Some(Bidegree::new(1, 2)));
    }

    #[test]
    fn paths() {
        let e = br(gen(ClassName::E), sum_of(vec![gen(ClassName::E), zeta(sym("a", 1, 1))]));
        assert_eq!(e.at(&[1, 1, 0]).unwrap(), &sym("a", 1, 1));
        assert!(e.at(&[2]).is_err());
    }

    fn sum_of(xs: Vec<Expr>) -> Expr {
        Expr::Sum(xs)
    }
}
