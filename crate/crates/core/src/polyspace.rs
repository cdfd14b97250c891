//! Height-graded monomial bases for truncated polynomial modules.
//!
//! Variables carry a root-height weight (sl3: `x, z -> 1`, `y -> 2`) so that
//! every generator is homogeneous. A variable may be Laurent-padded: its
//! exponent can go down to a floor, provided a partner variable compensates
//! (`exp[z] + exp[y] >= 0` makes the padded space `C[x, y/z, z]`, which is
//! closed under the `exp((y/z) d_x)` flows used by the R-operators).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactnum::Rat;

/// Upper bound on basis size; overridable with `RFACTOR_SIZE_LIMIT`.
pub const DEFAULT_SIZE_LIMIT: usize = 250_000;

pub fn size_limit() -> usize {
    std::env::var("RFACTOR_SIZE_LIMIT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SIZE_LIMIT)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSpec {
    pub name: String,
    pub height_weight: u32,
    pub laurent_floor: i32,
    /// Variable whose exponent must compensate negative powers of this one.
    pub pole_partner: Option<String>,
}

impl VarSpec {
    pub fn new(name: impl Into<String>, height_weight: u32) -> Self {
        assert!(height_weight > 0, "height weights are positive");
        VarSpec {
            name: name.into(),
            height_weight,
            laurent_floor: 0,
            pole_partner: None,
        }
    }

    /// Allow negative powers down to `floor`, compensated by `partner`.
    pub fn with_laurent(mut self, floor: i32, partner: impl Into<String>) -> Self {
        assert!(floor <= 0);
        self.laurent_floor = floor;
        self.pole_partner = Some(partner.into());
        self
    }

    pub fn is_laurent(&self) -> bool {
        self.laurent_floor < 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<i32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exps(&self) -> &[i32] {
        &self.0
    }

    pub fn degree(&self) -> i32 {
        self.0.iter().sum()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn display<'a>(&'a self, vars: &'a [VarSpec]) -> MonomialDisplay<'a> {
        MonomialDisplay { mono: self, vars }
    }
}

pub struct MonomialDisplay<'a> {
    mono: &'a Monomial,
    vars: &'a [VarSpec],
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, v) in self.mono.0.iter().zip(self.vars) {
            if *e == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}^{}", v.name, e)?;
            first = false;
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

pub fn height(m: &Monomial, vars: &[VarSpec]) -> i32 {
    m.0.iter().zip(vars).map(|(e, v)| e * v.height_weight as i32).sum()
}

/// Sparse Laurent polynomial with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Poly::term(Monomial::one(nvars), c)
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, &c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Monomial::one(nvars);
        m.0[i] = 1;
        Poly::term(m, Rat::one())
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

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in other.iter() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in self.iter() {
            for (m2, c2) in other.iter() {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32, nvars: usize) -> Poly {
        let mut acc = Poly::constant(nvars, Rat::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Heights of all terms, or `None` for the zero polynomial.
    pub fn height_range(&self, vars: &[VarSpec]) -> Option<(i32, i32)> {
        let mut it = self.terms.keys().map(|m| height(m, vars));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), h| (lo.min(h), hi.max(h))))
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(Monomial::is_polynomial)
    }

    pub fn display<'a>(&'a self, vars: &'a [VarSpec]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    vars: &'a [VarSpec],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*{}", m.display(self.vars))?;
        }
        Ok(())
    }
}

/// Enumerated basis of a truncated (possibly Laurent-padded) module.
#[derive(Debug, PartialEq, Eq)]
pub struct GradedBasis {
    vars: Vec<VarSpec>,
    height_cap: i32,
    monomials: Vec<Monomial>,
    heights: Vec<i32>,
    index: HashMap<Monomial, usize>,
}

impl GradedBasis {
    fn from_parts(vars: Vec<VarSpec>, height_cap: i32, monomials: Vec<Monomial>) -> Result<Self> {
        let limit = size_limit();
        if monomials.len() > limit {
            return Err(Error::CapTooLarge {
                size: monomials.len(),
                limit,
            });
        }
        let heights = monomials.iter().map(|m| height(m, &vars)).collect();
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(GradedBasis {
            vars,
            height_cap,
            monomials,
            heights,
            index,
        })
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Every valid monomial of height at most this is present.
    pub fn height_cap(&self) -> i32 {
        self.height_cap
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &Monomial {
        &self.monomials[i]
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn height_of(&self, i: usize) -> i32 {
        self.heights[i]
    }

    pub fn index(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn height(&self, m: &Monomial) -> i32 {
        height(m, &self.vars)
    }

    /// Floors and pole partners hold (the height cap is not checked).
    pub fn admissible(&self, m: &Monomial) -> bool {
        admissible(m, &self.vars)
    }

    pub fn has_laurent(&self) -> bool {
        self.vars.iter().any(VarSpec::is_laurent)
    }

    pub fn show(&self, m: &Monomial) -> String {
        m.display(&self.vars).to_string()
    }

    pub fn show_index(&self, i: usize) -> String {
        self.show(&self.monomials[i])
    }

    /// Debug dump, one `index height monomial` line per basis element.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.monomials.iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", i, self.heights[i], self.show(m)));
        }
        out
    }

    /// Polynomial monomials of this basis, order preserved, floors dropped.
    pub fn polynomial_part(&self) -> Result<Arc<GradedBasis>> {
        let vars = self
            .vars
            .iter()
            .map(|v| VarSpec::new(v.name.clone(), v.height_weight))
            .collect();
        let monos = self.monomials.iter().filter(|m| m.is_polynomial()).cloned().collect();
        Ok(Arc::new(GradedBasis::from_parts(vars, self.height_cap, monos)?))
    }

    /// Same monomial set with variables renamed (e.g. moving a site to `z3`).
    pub fn renamed(&self, names: &[&str]) -> Result<Arc<GradedBasis>> {
        if names.len() != self.vars.len() {
            return Err(Error::BasisMismatch("rename arity".into()));
        }
        let map: HashMap<&str, &str> = self
            .vars
            .iter()
            .zip(names)
            .map(|(v, n)| (v.name.as_str(), *n))
            .collect();
        let vars = self
            .vars
            .iter()
            .zip(names)
            .map(|(v, n)| VarSpec {
                name: n.to_string(),
                height_weight: v.height_weight,
                laurent_floor: v.laurent_floor,
                pole_partner: v.pole_partner.as_ref().map(|p| map[p.as_str()].to_string()),
            })
            .collect();
        Ok(Arc::new(GradedBasis::from_parts(
            vars,
            self.height_cap,
            self.monomials.clone(),
        )?))
    }
}

fn admissible(m: &Monomial, vars: &[VarSpec]) -> bool {
    for (i, v) in vars.iter().enumerate() {
        let e = m.0[i];
        if e < v.laurent_floor {
            return false;
        }
        if e < 0 {
            let Some(p) = &v.pole_partner else {
                return false;
            };
            let Some(j) = vars.iter().position(|w| &w.name == p) else {
                return false;
            };
            if e + m.0[j] < 0 {
                return false;
            }
        }
    }
    true
}

/// All admissible monomials of height `<= height_cap`, ordered by height,
/// then by descending polynomial degree, then descending lexicographic.
pub fn enumerate_basis(vars: Vec<VarSpec>, height_cap: u32) -> Result<Arc<GradedBasis>> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::NameCollision(v.name.clone()));
        }
        if let Some(p) = &v.pole_partner {
            if !vars.iter().any(|w| &w.name == p) {
                return Err(Error::UnknownVariable(p.clone()));
            }
        }
    }
    let cap = height_cap as i32;
    let n = vars.len();
    // min_rest[i]: lowest height the variables i.. can contribute
    let mut min_rest = vec![0i32; n + 1];
    for i in (0..n).rev() {
        min_rest[i] = min_rest[i + 1] + vars[i].laurent_floor * vars[i].height_weight as i32;
    }
    let limit = size_limit();
    let mut out = Vec::new();
    let mut cur = vec![0i32; n];
    fn rec(
        i: usize,
        budget: i32,
        vars: &[VarSpec],
        min_rest: &[i32],
        cur: &mut Vec<i32>,
        out: &mut Vec<Monomial>,
        limit: usize,
    ) -> Result<()> {
        if i == vars.len() {
            let m = Monomial(cur.clone());
            if admissible(&m, vars) {
                out.push(m);
                if out.len() > limit {
                    return Err(Error::CapTooLarge { size: out.len(), limit });
                }
            }
            return Ok(());
        }
        let w = vars[i].height_weight as i32;
        let hi = (budget - min_rest[i + 1]).div_euclid(w);
        for e in vars[i].laurent_floor..=hi {
            cur[i] = e;
            rec(i + 1, budget - e * w, vars, min_rest, cur, out, limit)?;
        }
        cur[i] = 0;
        Ok(())
    }
    rec(0, cap, &vars, &min_rest, &mut cur, &mut out, limit)?;
    out.sort_by(|a, b| {
        let (ha, hb) = (height(a, &vars), height(b, &vars));
        ha.cmp(&hb).then(b.degree().cmp(&a.degree())).then(b.cmp(a))
    });
    GradedBasis::from_parts(vars, cap, out).map(Arc::new)
}

/// Basis of all monomials up to the top height of `basis`, over the same
/// variables. With `laurent = Some((den, partner))` the result is padded
/// with negative powers of `den` down to minus that height.
pub fn covering_basis(basis: &GradedBasis, laurent: Option<(&str, &str)>) -> Result<Arc<GradedBasis>> {
    let top = (0..basis.len()).map(|i| basis.height_of(i)).max().unwrap_or(0);
    let mut vars: Vec<VarSpec> = basis
        .vars()
        .iter()
        .map(|v| VarSpec::new(v.name.clone(), v.height_weight))
        .collect();
    if let Some((den, partner)) = laurent {
        let i = basis.var_index(den)?;
        basis.var_index(partner)?;
        vars[i] = vars[i].clone().with_laurent(-top, partner);
    }
    enumerate_basis(vars, top as u32)
}

/// Product basis; `index(m1 ⊗ m2) = index(m1) * |b2| + index(m2)`.
pub fn tensor_basis(b1: &GradedBasis, b2: &GradedBasis) -> Result<Arc<GradedBasis>> {
    for v in &b2.vars {
        if b1.vars.iter().any(|w| w.name == v.name) {
            return Err(Error::NameCollision(v.name.clone()));
        }
    }
    let mut vars = b1.vars.clone();
    vars.extend(b2.vars.iter().cloned());
    let mut monos = Vec::with_capacity(b1.len() * b2.len());
    for m1 in &b1.monomials {
        for m2 in &b2.monomials {
            let mut e = m1.0.clone();
            e.extend_from_slice(&m2.0);
            monos.push(Monomial(e));
        }
    }
    GradedBasis::from_parts(vars, b1.height_cap.min(b2.height_cap), monos).map(Arc::new)
}

/// Parse a monomial such as `"x^2*y"` or `"1"` against a variable list.
pub fn parse_monomial(s: &str, vars: &[VarSpec]) -> Result<Monomial> {
    let mut m = Monomial::one(vars.len());
    let s = s.trim();
    if s == "1" || s.is_empty() {
        return Ok(m);
    }
    for factor in s.split('*') {
        let factor = factor.trim();
        let (name, e) = match factor.split_once('^') {
            Some((n, e)) => (
                n.trim(),
                e.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::UnknownVariable(factor.to_string()))?,
            ),
            None => (factor, 1),
        };
        let i = vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        m.0[i] += e;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl2(name: &str) -> Vec<VarSpec> {
        vec![VarSpec::new(name, 1)]
    }

    fn sl3(tag: &str) -> Vec<VarSpec> {
        vec![
            VarSpec::new(format!("x{tag}"), 1),
            VarSpec::new(format!("y{tag}"), 2),
            VarSpec::new(format!("z{tag}"), 1),
        ]
    }

    /// Brute force: scan a box of exponents, keep admissible ones under the cap.
    fn brute_count(vars: &[VarSpec], cap: i32, bound: i32) -> usize {
        let n = vars.len();
        let mut count = 0;
        let mut e = vec![0i32; n];
        let lo: Vec<i32> = vars.iter().map(|v| v.laurent_floor).collect();
        e.clone_from(&lo);
        loop {
            let m = Monomial(e.clone());
            if admissible(&m, vars) && height(&m, vars) <= cap {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return count;
                }
                e[i] += 1;
                if e[i] <= bound {
                    break;
                }
                e[i] = lo[i];
                i += 1;
            }
        }
    }

    #[test]
    fn sl2_single_site() {
        let b = enumerate_basis(sl2("z"), 3).unwrap();
        assert_eq!(b.len(), 4);
        let shown: Vec<String> = (0..4).map(|i| b.show_index(i)).collect();
        assert_eq!(shown, ["1", "z^1", "z^2", "z^3"]);
    }

    #[test]
    fn sl3_single_site_order() {
        let b = enumerate_basis(sl3(""), 2).unwrap();
        assert_eq!(b.len(), 7);
        assert_eq!(b.len(), brute_count(b.vars(), 2, 4));
        let shown: Vec<String> = (0..7).map(|i| b.show_index(i)).collect();
        assert_eq!(shown, ["1", "x^1", "z^1", "x^2", "x^1 z^1", "z^2", "y^1"]);
    }

    #[test]
    fn laurent_padding_matches_brute_force() {
        let mut vars = sl3("");
        vars[2] = vars[2].clone().with_laurent(-2, "y");
        let b = enumerate_basis(vars.clone(), 2).unwrap();
        assert_eq!(b.len(), brute_count(&vars, 2, 6));
        assert!(b.index(&parse_monomial("y*z^-1", &vars).unwrap()).is_some());
        assert!(b.index(&parse_monomial("x*z^-1", &vars).unwrap()).is_none());
        // padding keeps the polynomial monomials, in the same relative order
        let poly = enumerate_basis(sl3(""), 2).unwrap();
        let padded_poly = b.polynomial_part().unwrap();
        assert_eq!(poly.monomials(), padded_poly.monomials());
    }

    #[test]
    fn tensor_products() {
        let b1 = enumerate_basis(sl2("z1"), 1).unwrap();
        let b2 = enumerate_basis(sl2("z2"), 1).unwrap();
        let t = tensor_basis(&b1, &b2).unwrap();
        assert_eq!(t.len(), 4);
        let shown: Vec<String> = (0..4).map(|i| t.show_index(i)).collect();
        assert_eq!(shown, ["1", "z2^1", "z1^1", "z1^1 z2^1"]);
        let s1 = enumerate_basis(sl3("1"), 2).unwrap();
        let s2 = enumerate_basis(sl3("2"), 2).unwrap();
        assert_eq!(tensor_basis(&s1, &s2).unwrap().len(), 49);
        assert!(matches!(tensor_basis(&b1, &b1), Err(Error::NameCollision(_))));
    }

    #[test]
    fn heights() {
        let v = sl3("");
        assert_eq!(height(&parse_monomial("y", &v).unwrap(), &v), 2);
        assert_eq!(height(&parse_monomial("x*y*z^-1", &v).unwrap(), &v), 2);
        let z = sl2("z");
        assert_eq!(height(&parse_monomial("z^3", &z).unwrap(), &z), 3);
    }

    #[test]
    fn index_round_trip_and_dump() {
        let b = enumerate_basis(sl3(""), 4).unwrap();
        for i in 0..b.len() {
            assert_eq!(b.index(b.monomial(i)), Some(i));
        }
        let dump = b.dump();
        assert!(dump.lines().any(|l| l == "4 2 x^1 z^1"));
    }

    #[test]
    fn size_limit_enforced() {
        let vars: Vec<VarSpec> = (0..6).map(|i| VarSpec::new(format!("v{i}"), 1)).collect();
        let err = enumerate_basis(vars, 60).unwrap_err();
        assert!(matches!(err, Error::CapTooLarge { .. }));
    }
}
