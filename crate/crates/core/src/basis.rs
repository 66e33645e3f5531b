//! Monomial bases per bidegree, computed by direct enumeration and, as an
//! independent route, by expanding the bivariate Poincaré series product.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Bidegree, Generator, GeneratorSet, Monomial};
use crate::error::{Error, Result};

/// Depth-first search over exponent vectors. `e` (the only degree-0
/// generator) absorbs whatever particle count is left at the leaves.
struct Search<'a> {
    with_e: Option<Generator>,
    rest: Vec<&'a Generator>,
}

/// Receives the positive-degree factors and the exponent of `e`.
type Visit<'v> = dyn FnMut(&[(Generator, u32)], u32) + 'v;

impl<'a> Search<'a> {
    fn new(gens: &'a [Generator], target: Bidegree) -> Self {
        let with_e = gens.iter().find(|g| g.bidegree.deg == 0).copied();
        let rest = gens
            .iter()
            .filter(|g| g.bidegree.deg > 0 && g.bidegree.deg <= target.deg && g.bidegree.par <= target.par)
            .collect();
        Search { with_e, rest }
    }

    fn walk(&self, idx: usize, deg: u32, par: u32, chosen: &mut Vec<(Generator, u32)>, visit: &mut Visit<'_>) {
        if idx == self.rest.len() {
            if deg != 0 {
                return;
            }
            match self.with_e {
                Some(_) => visit(chosen, par),
                None if par == 0 => visit(chosen, 0),
                None => {}
            }
            return;
        }
        let g = self.rest[idx];
        let b = g.bidegree;
        let cap = if g.is_exterior() { 1 } else { u32::MAX };
        self.walk(idx + 1, deg, par, chosen, visit);
        let (mut d, mut k, mut exp) = (deg, par, 0u32);
        while exp < cap && d >= b.deg && k >= b.par {
            d -= b.deg;
            k -= b.par;
            exp += 1;
            chosen.push((*g, exp));
            self.walk(idx + 1, d, k, chosen, visit);
            chosen.pop();
        }
    }
}

/// Monomials in `gens` (a subset of `gs`) of exact bidegree `b`, sorted.
pub fn enumerate_over(gs: &GeneratorSet, gens: &[Generator], b: Bidegree) -> Vec<Monomial> {
    let search = Search::new(gens, b);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    search.walk(0, b.deg, b.par, &mut chosen, &mut |factors, e_exp| {
        let mut fs: Vec<(Generator, u32)> = Vec::with_capacity(factors.len() + 1);
        if e_exp > 0 {
            fs.push((search.with_e.expect("e present"), e_exp));
        }
        fs.extend_from_slice(factors);
        fs.sort_by_key(|a| a.0);
        out.push(Monomial::from_sorted_unchecked(*gs, fs));
    });
    out.sort();
    out
}

/// Number of monomials in `gens` of bidegree `b`, without materializing them.
pub fn count_over(gens: &[Generator], b: Bidegree) -> Result<u64> {
    let search = Search::new(gens, b);
    let mut count: u64 = 0;
    let mut overflow = false;
    let mut chosen = Vec::new();
    search.walk(0, b.deg, b.par, &mut chosen, &mut |_, _| match count.checked_add(1) {
        Some(c) => count = c,
        None => overflow = true,
    });
    if overflow {
        return Err(Error::Overflow("counting monomials"));
    }
    Ok(count)
}

/// Exactly the monomials of bidegree `b`, once each, in canonical order.
pub fn enumerate_basis(gs: &GeneratorSet, b: Bidegree) -> Vec<Monomial> {
    enumerate_over(gs, &gs.generators_up_to(b.par), b)
}

/// `dim H_i(Conf_k(R^n); F_p)` by enumeration.
pub fn dim(gs: &GeneratorSet, i: u32, k: u32) -> Result<u64> {
    count_over(&gs.generators_up_to(k), Bidegree::new(i, k))
}

/// Truncated bivariate power series in `t` (degree) and `s` (particles).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series2 {
    max_deg: u32,
    max_par: u32,
    coeffs: Vec<u64>,
}

impl Series2 {
    pub fn one(max_deg: u32, max_par: u32) -> Self {
        let mut coeffs = vec![0; (max_deg as usize + 1) * (max_par as usize + 1)];
        coeffs[0] = 1;
        Series2 {
            max_deg,
            max_par,
            coeffs,
        }
    }

    fn idx(&self, i: u32, k: u32) -> usize {
        i as usize * (self.max_par as usize + 1) + k as usize
    }

    pub fn bounds(&self) -> (u32, u32) {
        (self.max_deg, self.max_par)
    }

    /// Coefficient of `t^i s^k`; `None` outside the truncation.
    pub fn get(&self, i: u32, k: u32) -> Option<u64> {
        (i <= self.max_deg && k <= self.max_par).then(|| self.coeffs[self.idx(i, k)])
    }

    /// Multiplies by `1 / (1 - t^d s^c)`.
    pub fn mul_geometric(&mut self, b: Bidegree) -> Result<()> {
        if b == Bidegree::ZERO {
            return Err(Error::domain("geometric factor of bidegree (0,0) diverges"));
        }
        if b.deg > self.max_deg || b.par > self.max_par {
            return Ok(());
        }
        for i in b.deg..=self.max_deg {
            for k in b.par..=self.max_par {
                let src = self.coeffs[self.idx(i - b.deg, k - b.par)];
                let dst = self.idx(i, k);
                self.coeffs[dst] = self.coeffs[dst]
                    .checked_add(src)
                    .ok_or(Error::Overflow("expanding a Poincaré series"))?;
            }
        }
        Ok(())
    }

    /// Multiplies by `1 + t^d s^c`.
    pub fn mul_binomial(&mut self, b: Bidegree) -> Result<()> {
        if b.deg > self.max_deg || b.par > self.max_par {
            return Ok(());
        }
        for i in (b.deg..=self.max_deg).rev() {
            for k in (b.par..=self.max_par).rev() {
                let src = self.coeffs[self.idx(i - b.deg, k - b.par)];
                let dst = self.idx(i, k);
                self.coeffs[dst] = self.coeffs[dst]
                    .checked_add(src)
                    .ok_or(Error::Overflow("expanding a Poincaré series"))?;
            }
        }
        Ok(())
    }

    /// Nonzero coefficients as `((deg, par), coeff)`, row-major.
    pub fn nonzero(&self) -> Vec<(Bidegree, u64)> {
        let mut out = Vec::new();
        for i in 0..=self.max_deg {
            for k in 0..=self.max_par {
                let c = self.coeffs[self.idx(i, k)];
                if c != 0 {
                    out.push((Bidegree::new(i, k), c));
                }
            }
        }
        out
    }
}

/// Product formula over the generators of `gs` with particle count ≤ `max_par`.
pub fn poincare(gs: &GeneratorSet, max_deg: u32, max_par: u32) -> Result<Series2> {
    poincare_over(&gs.generators_up_to(max_par), max_deg, max_par)
}

pub fn poincare_over(gens: &[Generator], max_deg: u32, max_par: u32) -> Result<Series2> {
    let mut series = Series2::one(max_deg, max_par);
    for g in gens {
        if g.is_exterior() {
            series.mul_binomial(g.bidegree)?;
        } else {
            series.mul_geometric(g.bidegree)?;
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimTable {
    #[serde(skip)]
    set: GeneratorSet,
    max_deg: u32,
    max_par: u32,
    /// `dims[i][k]`.
    dims: Vec<Vec<u64>>,
}

impl DimTable {
    pub fn from_grid(set: GeneratorSet, dims: Vec<Vec<u64>>) -> Self {
        let max_deg = dims.len().saturating_sub(1) as u32;
        let max_par = dims.first().map_or(0, |r| r.len().saturating_sub(1)) as u32;
        DimTable {
            set,
            max_deg,
            max_par,
            dims,
        }
    }

    pub fn set(&self) -> GeneratorSet {
        self.set
    }

    pub fn bounds(&self) -> (u32, u32) {
        (self.max_deg, self.max_par)
    }

    pub fn get(&self, i: u32, k: u32) -> Option<u64> {
        self.dims.get(i as usize)?.get(k as usize).copied()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.dims
    }

    /// Header `i\k,0,1,...`, then one row per degree.
    pub fn to_csv(&self) -> String {
        grid_csv(&self.dims, self.max_par)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "case": self.set.family().key(),
            "p": self.set.prime().get(),
            "dims": self.dims,
        })
    }

    pub fn to_markdown(&self) -> String {
        grid_markdown(&self.dims, self.max_par)
    }
}

pub(crate) fn grid_csv(rows: &[Vec<u64>], max_par: u32) -> String {
    let mut out = String::from("i\\k");
    for k in 0..=max_par {
        out.push_str(&format!(",{k}"));
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn grid_markdown(rows: &[Vec<u64>], max_par: u32) -> String {
    let mut out = String::from("| i\\k |");
    for k in 0..=max_par {
        out.push_str(&format!(" {k} |"));
    }
    out.push_str("\n|---|");
    for _ in 0..=max_par {
        out.push_str("---|");
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&format!("| {i} |"));
        for v in row {
            out.push_str(&format!(" {v} |"));
        }
        out.push('\n');
    }
    out
}

/// Grid of `dim` over `0 ≤ i ≤ max_deg`, `0 ≤ k ≤ max_par`, by enumeration.
pub fn dim_table(gs: &GeneratorSet, max_deg: u32, max_par: u32) -> Result<DimTable> {
    let gens = gs.generators_up_to(max_par);
    let dims = (0..=max_deg)
        .into_par_iter()
        .map(|i| {
            (0..=max_par)
                .map(|k| {
                    let usable: Vec<Generator> = gens.iter().filter(|g| g.bidegree.par <= k).copied().collect();
                    count_over(&usable, Bidegree::new(i, k))
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DimTable::from_grid(*gs, dims))
}

/// Grid of Poincaré coefficients over the same range, for comparison.
pub fn poincare_table(gs: &GeneratorSet, max_deg: u32, max_par: u32) -> Result<DimTable> {
    let series = poincare(gs, max_deg, max_par)?;
    let dims = (0..=max_deg)
        .map(|i| (0..=max_par).map(|k| series.get(i, k).expect("in bounds")).collect())
        .collect();
    Ok(DimTable::from_grid(*gs, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Prime;

    fn surface(p: u64) -> GeneratorSet {
        GeneratorSet::surface(Prime::new(p).unwrap())
    }

    fn labels(ms: &[Monomial]) -> Vec<String> {
        ms.iter().map(|m| m.to_string()).collect()
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(labels(&enumerate_basis(&surface(3), Bidegree::new(0, 4))), ["e^4"]);
        assert_eq!(labels(&enumerate_basis(&surface(3), Bidegree::new(1, 2))), ["z0"]);
        assert_eq!(labels(&enumerate_basis(&surface(2), Bidegree::new(2, 4))), ["x1^2"]);
    }

    #[test]
    fn dim_examples() {
        assert_eq!(dim(&surface(3), 0, 7).unwrap(), 1);
        assert_eq!(dim(&surface(3), 2, 4).unwrap(), 0);
        assert_eq!(dim(&surface(2), 1, 2).unwrap(), 1);
    }

    #[test]
    fn poincare_small_f2() {
        let s = poincare(&surface(2), 1, 2).unwrap();
        let nz: Vec<_> = s.nonzero().into_iter().map(|(b, c)| ((b.deg, b.par), c)).collect();
        assert_eq!(nz, vec![((0, 0), 1), ((0, 1), 1), ((0, 2), 1), ((1, 2), 1)]);
        assert_eq!(poincare(&surface(3), 3, 3).unwrap().get(1, 2), Some(1));
        assert_eq!(poincare(&surface(5), 3, 3).unwrap().get(0, 0), Some(1));
    }

    #[test]
    fn table_examples() {
        let t = dim_table(&surface(3), 1, 1).unwrap();
        assert_eq!(t.rows(), &[vec![1, 1], vec![0, 0]]);
        assert_eq!(dim_table(&surface(2), 5, 3).unwrap().get(1, 2), Some(1));
        assert_eq!(dim_table(&surface(5), 5, 3).unwrap().get(5, 0), Some(0));
    }

    #[test]
    fn csv_header_and_json_shape() {
        let t = dim_table(&surface(2), 1, 2).unwrap();
        assert_eq!(t.to_csv(), "i\\k,0,1,2\n0,1,1,1\n1,0,0,1\n");
        let j = t.to_json();
        assert_eq!(j["case"], "surface-f2");
        assert_eq!(j["p"], 2);
        assert_eq!(j["dims"][1][2], 1);
    }

    #[test]
    fn overflow_is_reported() {
        let mut s = Series2::one(0, 200);
        let e = Bidegree::new(0, 1);
        // (1 - s)^{-m} has coefficient C(k+m-1, m-1); enough factors overflow u64.
        let res = (0..200).try_for_each(|_| s.mul_geometric(e));
        assert_eq!(res, Err(Error::Overflow("expanding a Poincaré series")));
    }
}
