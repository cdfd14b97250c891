//! Exact sparse operators between graded bases.
//!
//! Columns are keyed by domain index. A column is `None` when its true image
//! is not representable on the truncated codomain (it would leave the height
//! cap, or a substitution would need a negative power that the basis cannot
//! hold). Undefined columns propagate through every algebraic operation, so
//! a defined column is always exact; residual checks refuse to certify a
//! window that contains an undefined column.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{binomial, gamma_ratio, Rat};
use crate::polyspace::{height, parse_monomial, GradedBasis, Monomial, Poly};

pub mod dense;
pub mod solve;

/// Sparse vector, sorted by index, no stored zeros.
pub type SparseVec = Vec<(u32, Rat)>;
pub type Column = Option<SparseVec>;

#[derive(Debug, Clone)]
pub struct SparseOp {
    domain: Arc<GradedBasis>,
    codomain: Arc<GradedBasis>,
    cols: Vec<Column>,
    height_shift: i32,
}

pub fn same_basis(a: &Arc<GradedBasis>, b: &Arc<GradedBasis>) -> bool {
    Arc::ptr_eq(a, b) || (a.vars() == b.vars() && a.monomials() == b.monomials())
}

fn check_same(a: &Arc<GradedBasis>, b: &Arc<GradedBasis>, what: &str) -> Result<()> {
    if same_basis(a, b) {
        Ok(())
    } else {
        Err(Error::BasisMismatch(what.to_string()))
    }
}

fn accumulate(acc: &mut BTreeMap<u32, Rat>, i: u32, c: Rat) {
    if c.is_zero() {
        return;
    }
    match acc.entry(i) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += &c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn finish(acc: BTreeMap<u32, Rat>) -> SparseVec {
    acc.into_iter().collect()
}

/// Linear combination of sparse vectors.
pub fn combine<'a>(parts: impl IntoIterator<Item = (&'a Rat, &'a SparseVec)>) -> SparseVec {
    let mut acc = BTreeMap::new();
    for (s, v) in parts {
        for (i, c) in v {
            accumulate(&mut acc, *i, s * c);
        }
    }
    finish(acc)
}

/// First coordinate where two sparse vectors differ.
fn first_difference(a: &SparseVec, b: &SparseVec) -> Option<u32> {
    let diff = combine([(&Rat::one(), a), (&Rat::from_int(-1), b)]);
    diff.first().map(|(i, _)| *i)
}

impl SparseOp {
    pub fn from_columns(
        domain: Arc<GradedBasis>,
        codomain: Arc<GradedBasis>,
        cols: Vec<Column>,
        height_shift: i32,
    ) -> Result<Self> {
        if cols.len() != domain.len() {
            return Err(Error::BasisMismatch(format!(
                "{} columns for a domain of size {}",
                cols.len(),
                domain.len()
            )));
        }
        Ok(SparseOp {
            domain,
            codomain,
            cols,
            height_shift,
        })
    }

    pub fn identity(basis: &Arc<GradedBasis>) -> Self {
        let cols = (0..basis.len()).map(|j| Some(vec![(j as u32, Rat::one())])).collect();
        SparseOp {
            domain: basis.clone(),
            codomain: basis.clone(),
            cols,
            height_shift: 0,
        }
    }

    pub fn scalar(basis: &Arc<GradedBasis>, c: &Rat) -> Self {
        SparseOp::identity(basis).scale(c)
    }

    pub fn zero(domain: &Arc<GradedBasis>, codomain: &Arc<GradedBasis>) -> Self {
        SparseOp {
            domain: domain.clone(),
            codomain: codomain.clone(),
            cols: vec![Some(Vec::new()); domain.len()],
            height_shift: 0,
        }
    }

    /// Diagonal operator with the given entries.
    pub fn diagonal(basis: &Arc<GradedBasis>, diag: Vec<Rat>) -> Result<Self> {
        if diag.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: diag.len(),
            });
        }
        let cols = diag
            .into_iter()
            .enumerate()
            .map(|(j, c)| Some(if c.is_zero() { Vec::new() } else { vec![(j as u32, c)] }))
            .collect();
        Ok(SparseOp {
            domain: basis.clone(),
            codomain: basis.clone(),
            cols,
            height_shift: 0,
        })
    }

    pub fn domain(&self) -> &Arc<GradedBasis> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<GradedBasis> {
        &self.codomain
    }

    pub fn height_shift(&self) -> i32 {
        self.height_shift
    }

    pub fn column(&self, j: usize) -> Option<&SparseVec> {
        self.cols[j].as_ref()
    }

    pub fn columns(&self) -> &[Column] {
        &self.cols
    }

    pub fn is_defined(&self, j: usize) -> bool {
        self.cols[j].is_some()
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<Rat> {
        let col = self.cols[j].as_ref()?;
        Some(match col.binary_search_by_key(&(i as u32), |(r, _)| *r) {
            Ok(p) => col[p].1.clone(),
            Err(_) => Rat::zero(),
        })
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().flatten().map(Vec::len).sum()
    }

    /// Largest height `h` such that every domain column of height `<= h` is
    /// exact; `-1` if even the constant column is undefined.
    pub fn certified_height(&self) -> i32 {
        let first_bad = (0..self.domain.len())
            .filter(|&j| self.cols[j].is_none())
            .map(|j| self.domain.height_of(j))
            .min();
        let top = (0..self.domain.len())
            .map(|j| self.domain.height_of(j))
            .max()
            .unwrap_or(0);
        match first_bad {
            Some(h) => h - 1,
            None => top,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|col| {
                col.as_ref().map(|v| {
                    if c.is_zero() {
                        Vec::new()
                    } else {
                        v.iter().map(|(i, a)| (*i, a * c)).collect()
                    }
                })
            })
            .collect();
        SparseOp { cols, ..self.clone() }
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rat::from_int(-1))
    }

    pub fn add(&self, other: &SparseOp) -> Result<Self> {
        self.lin_comb(&Rat::one(), other, &Rat::one())
    }

    pub fn sub(&self, other: &SparseOp) -> Result<Self> {
        self.lin_comb(&Rat::one(), other, &Rat::from_int(-1))
    }

    /// `s * self + t * other`.
    pub fn lin_comb(&self, s: &Rat, other: &SparseOp, t: &Rat) -> Result<Self> {
        check_same(&self.domain, &other.domain, "add: domains differ")?;
        check_same(&self.codomain, &other.codomain, "add: codomains differ")?;
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(combine([(s, a), (t, b)])),
                _ => None,
            })
            .collect();
        Ok(SparseOp {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            cols,
            height_shift: self.height_shift.max(other.height_shift),
        })
    }

    /// Apply to a sparse vector; `None` if it touches an undefined column.
    pub fn apply(&self, v: &SparseVec) -> Option<SparseVec> {
        let mut acc = BTreeMap::new();
        for (j, c) in v {
            for (i, a) in self.cols[*j as usize].as_ref()? {
                accumulate(&mut acc, *i, a * c);
            }
        }
        Some(finish(acc))
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SparseOp) -> Result<Self> {
        check_same(&self.domain, &other.codomain, "compose: inner codomain")?;
        let cols = other
            .cols
            .par_iter()
            .map(|col| col.as_ref().and_then(|v| self.apply(v)))
            .collect();
        Ok(SparseOp {
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            cols,
            height_shift: self.height_shift + other.height_shift,
        })
    }

    pub fn commutator(&self, other: &SparseOp) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Text dump, one `row col p/q` triple per nonzero entry.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (j, col) in self.cols.iter().enumerate() {
            if let Some(col) = col {
                for (i, c) in col {
                    let _ = writeln!(out, "{i} {j} {c}");
                }
            }
        }
        out
    }

    /// Image of the basis vector `j` as a polynomial.
    pub fn image_poly(&self, j: usize) -> Option<Poly> {
        let col = self.cols[j].as_ref()?;
        let mut p = Poly::zero();
        for (i, c) in col {
            p.add_term(self.codomain.monomial(*i as usize).clone(), c);
        }
        Some(p)
    }
}

/// Tabulate `action` column by column.
///
/// Image terms above `h + declared_shift` raise `ShiftViolation`; terms that
/// break a Laurent floor or pole partner raise `FloorViolation`; admissible
/// terms missing from the codomain (truncation) make the column undefined.
pub fn op_from_action<F>(
    domain: &Arc<GradedBasis>,
    codomain: &Arc<GradedBasis>,
    declared_shift: i32,
    action: F,
) -> Result<SparseOp>
where
    F: Fn(&Monomial) -> Poly + Sync,
{
    op_from_partial_action(domain, codomain, declared_shift, |m| Some(action(m)))
}

/// Like [`op_from_action`], but the action may itself declare a column
/// undefined by returning `None`.
pub fn op_from_partial_action<F>(
    domain: &Arc<GradedBasis>,
    codomain: &Arc<GradedBasis>,
    declared_shift: i32,
    action: F,
) -> Result<SparseOp>
where
    F: Fn(&Monomial) -> Option<Poly> + Sync,
{
    let cols: Result<Vec<Column>> = (0..domain.len())
        .into_par_iter()
        .map(|j| {
            let m = domain.monomial(j);
            let h = domain.height_of(j);
            let Some(img) = action(m) else {
                return Ok(None);
            };
            let mut col = Vec::with_capacity(img.len());
            let mut defined = true;
            for (t, c) in img.iter() {
                let ht = height(t, codomain.vars());
                if ht > h + declared_shift {
                    return Err(Error::ShiftViolation {
                        monomial: domain.show(m),
                        declared: declared_shift,
                        found: ht - h,
                    });
                }
                match codomain.index(t) {
                    Some(i) => col.push((i as u32, c.clone())),
                    None if !codomain.admissible(t) => {
                        return Err(Error::FloorViolation {
                            monomial: domain.show(m),
                            term: codomain.show(t),
                        })
                    }
                    None => defined = false,
                }
            }
            if !defined {
                return Ok(None);
            }
            col.sort_by_key(|(i, _)| *i);
            Ok(Some(col))
        })
        .collect();
    Ok(SparseOp {
        domain: domain.clone(),
        codomain: codomain.clone(),
        cols: cols?,
        height_shift: declared_shift,
    })
}

/// One term `coef * mult * d_var` of a first-order differential operator.
#[derive(Debug, Clone)]
struct DiffTerm {
    coef: Rat,
    mult: String,
    deriv: Option<String>,
}

/// First-order differential operator with polynomial coefficients, written
/// against variable names and resolved when tabulated.
#[derive(Debug, Clone, Default)]
pub struct DiffExpr {
    terms: Vec<DiffTerm>,
}

impl DiffExpr {
    pub fn new() -> Self {
        DiffExpr::default()
    }

    /// Add `coef * mult * d/d(deriv)`; `mult` like `"x^2*y"` or `"1"`.
    pub fn term(mut self, coef: impl Into<Rat>, mult: &str, deriv: Option<&str>) -> Self {
        let coef = coef.into();
        if !coef.is_zero() {
            self.terms.push(DiffTerm {
                coef,
                mult: mult.to_string(),
                deriv: deriv.map(str::to_string),
            });
        }
        self
    }

    /// Add `coef * mult` (a multiplication operator).
    pub fn mul(self, coef: impl Into<Rat>, mult: &str) -> Self {
        self.term(coef, mult, None)
    }

    /// Add `coef * mult * d/d(var)`.
    pub fn d(self, coef: impl Into<Rat>, mult: &str, var: &str) -> Self {
        self.term(coef, mult, Some(var))
    }

    pub fn tabulate(&self, basis: &Arc<GradedBasis>, declared_shift: i32) -> Result<SparseOp> {
        let vars = basis.vars();
        let resolved: Vec<(Rat, Monomial, Option<usize>)> = self
            .terms
            .iter()
            .map(|t| {
                let mult = parse_monomial(&t.mult, vars)?;
                let deriv = match &t.deriv {
                    Some(v) => Some(basis.var_index(v)?),
                    None => None,
                };
                Ok((t.coef.clone(), mult, deriv))
            })
            .collect::<Result<_>>()?;
        op_from_action(basis, basis, declared_shift, |m| {
            let mut img = Poly::zero();
            for (c, mult, deriv) in &resolved {
                let mut e = m.clone();
                let mut c = c.clone();
                if let Some(v) = deriv {
                    if e.0[*v] == 0 {
                        continue;
                    }
                    c *= &Rat::from_int(e.0[*v] as i64);
                    e.0[*v] -= 1;
                }
                img.add_term(e.mul(mult), &c);
            }
            img
        })
    }
}

/// Split a target monomial into the part over `inner` variables and the
/// positions of those variables in the target.
fn var_map(inner: &GradedBasis, outer: &GradedBasis) -> Result<Vec<usize>> {
    inner.vars().iter().map(|v| outer.var_index(&v.name)).collect()
}

/// Extend an operator on some of the variables to a larger basis, acting as
/// the identity on the remaining variables (`op ⊗ id` or `id ⊗ op`).
pub fn site_embed(op: &SparseOp, target: &Arc<GradedBasis>) -> Result<SparseOp> {
    check_same(op.domain(), op.codomain(), "embedding needs an endomorphism")?;
    let inner = op.domain().clone();
    let pos = var_map(&inner, target)?;
    let cols = (0..target.len())
        .into_par_iter()
        .map(|j| {
            let m = target.monomial(j);
            let inner_m = Monomial(pos.iter().map(|&p| m.0[p]).collect());
            let mut rest = m.clone();
            for &p in &pos {
                rest.0[p] = 0;
            }
            let k = inner.index(&inner_m)?;
            let col = op.column(k)?;
            let mut out = Vec::with_capacity(col.len());
            for (i, c) in col {
                let mut t = rest.clone();
                for (q, &p) in pos.iter().enumerate() {
                    t.0[p] = inner.monomial(*i as usize).0[q];
                }
                out.push((target.index(&t)? as u32, c.clone()));
            }
            out.sort_by_key(|(i, _)| *i);
            Some(out)
        })
        .collect();
    SparseOp::from_columns(target.clone(), target.clone(), cols, op.height_shift())
}

/// Re-express an operator on another basis over the same variables: each
/// target column is copied from the source when both it and its image exist.
pub fn transfer(op: &SparseOp, target: &Arc<GradedBasis>) -> Result<SparseOp> {
    check_same(op.domain(), op.codomain(), "transfer needs an endomorphism")?;
    if op.domain().vars() != target.vars() {
        return Err(Error::BasisMismatch("transfer: variable lists differ".into()));
    }
    let src = op.domain().clone();
    let cols = (0..target.len())
        .into_par_iter()
        .map(|j| {
            let k = src.index(target.monomial(j))?;
            let col = op.column(k)?;
            let mut out = Vec::with_capacity(col.len());
            for (i, c) in col {
                out.push((target.index(src.monomial(*i as usize))? as u32, c.clone()));
            }
            out.sort_by_key(|(i, _)| *i);
            Some(out)
        })
        .collect();
    SparseOp::from_columns(target.clone(), target.clone(), cols, op.height_shift())
}

/// Offending column of a nonzero residual.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Witness {
    pub monomial: String,
    pub image: String,
}

/// Outcome of a zero test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroCheck {
    /// `None` when the operator vanishes on every checked column.
    pub witness: Option<Witness>,
    /// Number of (defined) columns inspected.
    pub columns_checked: usize,
}

impl ZeroCheck {
    pub fn is_zero(&self) -> bool {
        self.witness.is_none()
    }
}

/// Zero test on a window.
///
/// Every column of domain height `<= window` must be defined (otherwise
/// `Uncertified`). Defined columns above the window are exact as well and
/// are inspected too.
pub fn is_zero(op: &SparseOp, window: i32) -> Result<ZeroCheck> {
    let dom = op.domain();
    let mut checked = 0;
    let mut witness = None;
    for j in 0..dom.len() {
        match op.column(j) {
            None if dom.height_of(j) <= window => {
                return Err(Error::Uncertified {
                    monomial: dom.show_index(j),
                })
            }
            None => {}
            Some(col) => {
                checked += 1;
                if witness.is_none() && !col.is_empty() {
                    witness = Some(Witness {
                        monomial: dom.show_index(j),
                        image: op
                            .image_poly(j)
                            .map(|p| p.display(op.codomain().vars()).to_string())
                            .unwrap_or_default(),
                    });
                }
            }
        }
    }
    Ok(ZeroCheck {
        witness,
        columns_checked: checked,
    })
}

/// Zero test of `a - b`.
pub fn equal_on(a: &SparseOp, b: &SparseOp, window: i32) -> Result<ZeroCheck> {
    is_zero(&a.sub(b)?, window)
}

/// Diagonal entries of an operator that must be diagonal.
pub fn diagonal_of(op: &SparseOp) -> Result<Vec<Rat>> {
    check_same(op.domain(), op.codomain(), "charge must be an endomorphism")?;
    (0..op.domain().len())
        .map(|j| {
            let col = op.column(j).ok_or_else(|| Error::Uncertified {
                monomial: op.domain().show_index(j),
            })?;
            match col.as_slice() {
                [] => Ok(Rat::zero()),
                [(i, c)] if *i as usize == j => Ok(c.clone()),
                _ => Err(Error::NotBlockDiagonal(format!(
                    "charge operator is not diagonal at {}",
                    op.domain().show_index(j)
                ))),
            }
        })
        .collect()
}

/// Joint eigenspace of a family of diagonal charges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightBlock {
    pub charge: Vec<Rat>,
    pub indices: Vec<usize>,
}

/// Group basis indices by joint charge.
pub fn charge_blocks(charges: &[SparseOp]) -> Result<Vec<WeightBlock>> {
    let Some(first) = charges.first() else {
        return Err(Error::Config("no charges given".into()));
    };
    let n = first.domain().len();
    let diags = charges.iter().map(diagonal_of).collect::<Result<Vec<_>>>()?;
    let mut groups: BTreeMap<Vec<Rat>, Vec<usize>> = BTreeMap::new();
    for j in 0..n {
        let key = diags.iter().map(|d| d[j].clone()).collect();
        groups.entry(key).or_default().push(j);
    }
    Ok(groups
        .into_iter()
        .map(|(charge, indices)| WeightBlock { charge, indices })
        .collect())
}

/// Split an operator into dense blocks on the joint charge eigenspaces.
///
/// Fails with `NotBlockDiagonal` if some entry connects different charges.
pub fn weight_block_decompose(op: &SparseOp, charges: &[SparseOp]) -> Result<Vec<(WeightBlock, Vec<Vec<Rat>>)>> {
    let blocks = charge_blocks(charges)?;
    let mut which = vec![0usize; op.domain().len()];
    let mut local = vec![0usize; op.domain().len()];
    for (b, blk) in blocks.iter().enumerate() {
        for (p, &j) in blk.indices.iter().enumerate() {
            which[j] = b;
            local[j] = p;
        }
    }
    let mut out: Vec<(WeightBlock, Vec<Vec<Rat>>)> = blocks
        .iter()
        .map(|b| {
            let k = b.indices.len();
            (b.clone(), vec![vec![Rat::zero(); k]; k])
        })
        .collect();
    for j in 0..op.domain().len() {
        let col = op.column(j).ok_or_else(|| Error::Uncertified {
            monomial: op.domain().show_index(j),
        })?;
        for (i, c) in col {
            let i = *i as usize;
            if which[i] != which[j] {
                return Err(Error::NotBlockDiagonal(format!(
                    "{} -> {}",
                    op.domain().show_index(j),
                    op.codomain().show_index(i)
                )));
            }
            out[which[j]].1[local[i]][local[j]] = c.clone();
        }
    }
    Ok(out)
}

/// A replacement rule `var -> poly` for substitution operators.
pub type SubstRule = (String, Poly);

fn resolve_rules(rules: &[SubstRule], basis: &GradedBasis) -> Result<Vec<Option<Poly>>> {
    let mut table = vec![None; basis.nvars()];
    for (name, p) in rules {
        table[basis.var_index(name)?] = Some(p.clone());
    }
    Ok(table)
}

fn substitute(m: &Monomial, table: &[Option<Poly>]) -> Option<Poly> {
    let n = m.0.len();
    let mut keep = m.clone();
    let mut acc = Poly::constant(n, Rat::one());
    for (i, rule) in table.iter().enumerate() {
        let Some(rule) = rule else { continue };
        let e = m.0[i];
        if e == 0 {
            continue;
        }
        if e < 0 {
            // the inverse of a polynomial is not polynomial
            return None;
        }
        keep.0[i] = 0;
        acc = acc.mul(&rule.pow(e as u32, n));
    }
    Some(acc.mul(&Poly::term(keep, Rat::one())))
}

fn partial_subst(basis: &Arc<GradedBasis>, table: Vec<Option<Poly>>) -> Result<SparseOp> {
    let cols = (0..basis.len())
        .into_par_iter()
        .map(|j| {
            let img = substitute(basis.monomial(j), &table)?;
            let mut col = Vec::with_capacity(img.len());
            for (t, c) in img.iter() {
                col.push((basis.index(t)? as u32, c.clone()));
            }
            col.sort_by_key(|(i, _)| *i);
            Some(col)
        })
        .collect();
    SparseOp::from_columns(basis.clone(), basis.clone(), cols, 0)
}

/// Algebra endomorphism `Φ(vars) -> Φ(rules(vars))` for height-homogeneous
/// rules. Columns whose image is not representable (negative powers of a
/// substituted variable, or terms outside the basis) are undefined.
pub fn subst_op(rules: &[SubstRule], basis: &Arc<GradedBasis>) -> Result<SparseOp> {
    let table = resolve_rules(rules, basis)?;
    for (i, rule) in table.iter().enumerate() {
        let Some(rule) = rule else { continue };
        let w = basis.vars()[i].height_weight as i32;
        if rule.iter().any(|(t, _)| basis.height(t) != w) {
            return Err(Error::NotHomogeneous {
                var: basis.vars()[i].name.clone(),
            });
        }
    }
    partial_subst(basis, table)
}

/// Substitution whose rules may lower height (translations such as
/// `x -> x + a`); the operator does not raise height.
pub fn flow_op(rules: &[SubstRule], basis: &Arc<GradedBasis>) -> Result<SparseOp> {
    let table = resolve_rules(rules, basis)?;
    for (i, rule) in table.iter().enumerate() {
        let Some(rule) = rule else { continue };
        let w = basis.vars()[i].height_weight as i32;
        if rule.iter().any(|(t, _)| basis.height(t) > w) {
            return Err(Error::NotHomogeneous {
                var: basis.vars()[i].name.clone(),
            });
        }
    }
    partial_subst(basis, table)
}

/// Parse a substitution rule written as a sum of `coef*monomial` terms,
/// e.g. `("y1", "y1 + y2 - x1*z2")`.
pub fn rule(basis: &GradedBasis, var: &str, terms: &[(i64, &str)]) -> Result<SubstRule> {
    let mut p = Poly::zero();
    for (c, m) in terms {
        p.add_term(parse_monomial(m, basis.vars())?, &Rat::from_int(*c));
    }
    Ok((var.to_string(), p))
}

/// `exp(λ op)` for a strictly height-lowering operator (nilpotent on any
/// truncation), summed term by term.
pub fn exp_series(op: &SparseOp, lambda: &Rat) -> Result<SparseOp> {
    check_same(op.domain(), op.codomain(), "exp needs an endomorphism")?;
    let basis = op.domain().clone();
    let mut total = SparseOp::identity(&basis);
    let mut power = SparseOp::identity(&basis);
    let mut coef = Rat::one();
    for k in 1..=basis.len() + 1 {
        power = op.compose(&power)?;
        if power.columns().iter().all(|c| matches!(c, Some(v) if v.is_empty())) {
            total.height_shift = 0;
            return Ok(total);
        }
        coef = &coef * lambda * Rat::new(1, k as i64);
        total = total.lin_comb(&Rat::one(), &power, &coef)?;
    }
    Err(Error::NotFiniteDimensional(
        "exponential series does not terminate on this basis".into(),
    ))
}

/// Perturbation of one eigenvalue of a diagonal factor, used to show that
/// the checks are sensitive to every tested coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenShift {
    pub exponent: i64,
}

/// Normalized Gamma ratio `Γ(X + a)Γ(b) / (Γ(X + b)Γ(a))` with `X` the Euler
/// operator of `var`: diagonal with eigenvalue `gamma_ratio(a, b, k)` on
/// monomials of `var`-exponent `k`. Negative `k` is allowed on padded bases;
/// a pole there leaves the column undefined, a pole at `k >= 0` is an error.
pub fn euler_diag(
    var: &str,
    a: &Rat,
    b: &Rat,
    basis: &Arc<GradedBasis>,
    shift: Option<EigenShift>,
) -> Result<SparseOp> {
    let v = basis.var_index(var)?;
    let mut cache: BTreeMap<i32, Option<Rat>> = BTreeMap::new();
    let mut cols = Vec::with_capacity(basis.len());
    for (j, m) in basis.monomials().iter().enumerate() {
        let k = m.0[v];
        let val = match cache.get(&k) {
            Some(x) => x.clone(),
            None => {
                let x = match gamma_ratio(a, b, k as i64) {
                    Ok(mut x) => {
                        if shift.is_some_and(|s| s.exponent == k as i64) {
                            x += &Rat::one();
                        }
                        Some(x)
                    }
                    Err(Error::PoleAtParameter { .. }) if k < 0 => None,
                    Err(e) => return Err(e),
                };
                cache.insert(k, x.clone());
                x
            }
        };
        cols.push(val.map(|c| if c.is_zero() { Vec::new() } else { vec![(j as u32, c)] }));
    }
    SparseOp::from_columns(basis.clone(), basis.clone(), cols, 0)
}

/// `exp(sign * (num/den) d_target)` as a finite binomial sum; needs a basis
/// padded with negative powers of `den` (partnered by `num`).
pub fn laurent_conj(sign: i64, num: &str, den: &str, target: &str, basis: &Arc<GradedBasis>) -> Result<SparseOp> {
    let (pn, pd, pt) = (basis.var_index(num)?, basis.var_index(den)?, basis.var_index(target)?);
    op_from_action(basis, basis, 0, |m| {
        let e = m.0[pt];
        let mut img = Poly::zero();
        if e < 0 {
            // never needed: targets are polynomial variables
            return img;
        }
        let mut s = Rat::one();
        for j in 0..=e {
            let mut t = m.clone();
            t.0[pt] -= j;
            t.0[pn] += j;
            t.0[pd] -= j;
            img.add_term(t, &(&s * binomial(e as u32, j as u32)));
            s *= &Rat::from_int(sign);
        }
        img
    })
}

/// `d x d` block matrix of operators with its spectral parameters.
#[derive(Debug, Clone)]
pub struct LaxOp {
    size: usize,
    blocks: Vec<SparseOp>,
    params: Vec<Rat>,
}

impl LaxOp {
    pub fn new(size: usize, blocks: Vec<SparseOp>, params: Vec<Rat>) -> Result<Self> {
        if blocks.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: blocks.len(),
            });
        }
        for b in &blocks[1..] {
            check_same(b.domain(), blocks[0].domain(), "Lax blocks share one basis")?;
            check_same(b.codomain(), blocks[0].codomain(), "Lax blocks share one basis")?;
        }
        Ok(LaxOp { size, blocks, params })
    }

    pub fn identity(size: usize, basis: &Arc<GradedBasis>) -> Self {
        let blocks = (0..size * size)
            .map(|k| {
                if k / size == k % size {
                    SparseOp::identity(basis)
                } else {
                    SparseOp::zero(basis, basis)
                }
            })
            .collect();
        LaxOp {
            size,
            blocks,
            params: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn params(&self) -> &[Rat] {
        &self.params
    }

    pub fn block(&self, i: usize, j: usize) -> &SparseOp {
        &self.blocks[i * self.size + j]
    }

    pub fn blocks(&self) -> &[SparseOp] {
        &self.blocks
    }

    fn map(&self, f: impl Fn(&SparseOp) -> Result<SparseOp>) -> Result<LaxOp> {
        Ok(LaxOp {
            size: self.size,
            blocks: self.blocks.iter().map(f).collect::<Result<_>>()?,
            params: self.params.clone(),
        })
    }

    /// Block-matrix product `self * other`, entries composed as operators.
    pub fn mul(&self, other: &LaxOp) -> Result<LaxOp> {
        if self.size != other.size {
            return Err(Error::BasisMismatch("Lax sizes differ".into()));
        }
        let d = self.size;
        let blocks = (0..d * d)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / d, k % d);
                let mut acc = self.block(i, 0).compose(other.block(0, j))?;
                for l in 1..d {
                    acc = acc.add(&self.block(i, l).compose(other.block(l, j))?)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LaxOp {
            size: d,
            blocks,
            params: Vec::new(),
        })
    }

    pub fn add(&self, other: &LaxOp) -> Result<LaxOp> {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(LaxOp {
            size: self.size,
            blocks,
            params: Vec::new(),
        })
    }

    pub fn sub(&self, other: &LaxOp) -> Result<LaxOp> {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(LaxOp {
            size: self.size,
            blocks,
            params: Vec::new(),
        })
    }

    /// `op ∘ L` entrywise.
    pub fn left_compose(&self, op: &SparseOp) -> Result<LaxOp> {
        self.map(|b| op.compose(b))
    }

    /// `L ∘ op` entrywise.
    pub fn right_compose(&self, op: &SparseOp) -> Result<LaxOp> {
        self.map(|b| b.compose(op))
    }

    pub fn embed(&self, target: &Arc<GradedBasis>) -> Result<LaxOp> {
        self.map(|b| site_embed(b, target))
    }

    /// Zero test of every block; the first failing block wins.
    pub fn is_zero(&self, window: i32) -> Result<ZeroCheck> {
        let mut checked = 0;
        for (k, b) in self.blocks.iter().enumerate() {
            let z = is_zero(b, window)?;
            checked += z.columns_checked;
            if let Some(w) = z.witness {
                return Ok(ZeroCheck {
                    witness: Some(Witness {
                        monomial: format!("L[{},{}] {}", k / self.size + 1, k % self.size + 1, w.monomial),
                        image: w.image,
                    }),
                    columns_checked: checked,
                });
            }
        }
        Ok(ZeroCheck {
            witness: None,
            columns_checked: checked,
        })
    }
}

/// Compare two vectors; returns the first differing index.
pub fn vec_difference(a: &SparseVec, b: &SparseVec) -> Option<u32> {
    first_difference(a, b)
}

/// Apply `factors` in order (first element first) to every monomial of
/// `domain`, which must be a sub-basis of the factors' common basis.
/// The result lives on `domain`; columns whose intermediate images hit an
/// undefined column are undefined, and images leaving `domain` are reported
/// through `leak`.
pub fn chain_on<L>(domain: &Arc<GradedBasis>, factors: &[SparseOp], leak: L) -> Result<SparseOp>
where
    L: Fn(String, String) -> Error + Sync,
{
    let Some(first) = factors.first() else {
        return Ok(SparseOp::identity(domain));
    };
    let work = first.domain().clone();
    for f in factors {
        check_same(f.domain(), &work, "chain factors share one basis")?;
        check_same(f.codomain(), &work, "chain factors share one basis")?;
    }
    let shift = factors.iter().map(SparseOp::height_shift).sum();
    let cols = (0..domain.len())
        .into_par_iter()
        .map(|j| {
            let m = domain.monomial(j);
            let Some(k) = work.index(m) else {
                return Ok(None);
            };
            let mut v: SparseVec = vec![(k as u32, Rat::one())];
            for f in factors {
                match f.apply(&v) {
                    Some(w) => v = w,
                    None => return Ok(None),
                }
            }
            let mut out = Vec::with_capacity(v.len());
            for (i, c) in v {
                let t = work.monomial(i as usize);
                match domain.index(t) {
                    Some(p) => out.push((p as u32, c)),
                    None => return Err(leak(domain.show(m), work.show(t))),
                }
            }
            out.sort_by_key(|(i, _)| *i);
            Ok(Some(out))
        })
        .collect::<Result<Vec<_>>>()?;
    SparseOp::from_columns(domain.clone(), domain.clone(), cols, shift)
}

/// Operator permuting variables: the monomial with exponents `e` goes to the
/// one with exponents `e[perm[i]]` at position `i`.
pub fn permute_vars(basis: &Arc<GradedBasis>, perm: &[usize]) -> Result<SparseOp> {
    if perm.len() != basis.nvars() {
        return Err(Error::BasisMismatch("permutation arity".into()));
    }
    for (i, &p) in perm.iter().enumerate() {
        if basis.vars()[i].height_weight != basis.vars()[p].height_weight {
            return Err(Error::NotHomogeneous {
                var: basis.vars()[i].name.clone(),
            });
        }
    }
    op_from_action(basis, basis, 0, |m| {
        Poly::term(Monomial(perm.iter().map(|&p| m.0[p]).collect()), Rat::one())
    })
}
