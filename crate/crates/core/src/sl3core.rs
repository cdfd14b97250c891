//! sl(3): generators on `C[x,y,z]`, Casimirs, fundamental representations,
//! finite-dimensional subspaces, the Lax operator with its factorization and
//! invariance, the three elementary R-operators and the factorized Ř.
//!
//! Heights: `x, z -> 1`, `y -> 2`. Every generator `T_ab` shifts height by
//! `h(b) - h(a)` with `h = (0, 1, 2)`, and so does the Lax entry `(i, j)`
//! by `h(i) - h(j)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Rat;
use crate::linop::dense::DenseMatrix;
use crate::linop::{
    chain_on, equal_on, euler_diag, exp_series, flow_op, laurent_conj, permute_vars, rule, subst_op, transfer,
    DiffExpr, EigenShift, LaxOp, SparseOp, SparseVec, SubstRule, ZeroCheck,
};
use crate::polyspace::{covering_basis, enumerate_basis, tensor_basis, GradedBasis, Monomial, Poly, VarSpec};
use crate::verify::lwv_normalize;

/// Weights `(m, n)` and spectral parameter `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl3Params {
    pub m: Rat,
    pub n: Rat,
    pub u: Rat,
}

impl Sl3Params {
    pub fn new(m: Rat, n: Rat, u: Rat) -> Self {
        Sl3Params { m, n, u }
    }

    /// `u1 = u - 2 - (m+2n)/3`.
    pub fn u1(&self) -> Rat {
        &self.u - Rat::from_int(2) - (&self.m + &self.n * Rat::from_int(2)) * Rat::new(1, 3)
    }

    /// `u2 = u - 1 + (n-m)/3`.
    pub fn u2(&self) -> Rat {
        &self.u - Rat::one() + (&self.n - &self.m) * Rat::new(1, 3)
    }

    /// `u3 = u + (n+2m)/3`.
    pub fn u3(&self) -> Rat {
        &self.u + (&self.n + &self.m * Rat::from_int(2)) * Rat::new(1, 3)
    }

    pub fn us(&self) -> [Rat; 3] {
        [self.u1(), self.u2(), self.u3()]
    }

    /// Inverse of the parametrization: `m = u3-u2-1`, `n = u2-u1-1`.
    pub fn from_us(us: &[Rat; 3]) -> Self {
        let [u1, u2, u3] = us;
        let m = u3 - u2 - Rat::one();
        let n = u2 - u1 - Rat::one();
        let u = (u1 + u2 + u3 + Rat::from_int(3)) * Rat::new(1, 3);
        Sl3Params { m, n, u }
    }
}

pub fn site_vars(tag: &str) -> Vec<VarSpec> {
    vec![
        VarSpec::new(format!("x{tag}"), 1),
        VarSpec::new(format!("y{tag}"), 2),
        VarSpec::new(format!("z{tag}"), 1),
    ]
}

pub fn site_basis(tag: &str, cap: u32) -> Result<Arc<GradedBasis>> {
    enumerate_basis(site_vars(tag), cap)
}

/// `C[x1,y1,z1] ⊗ C[x2,y2,z2]`, each site truncated at height `cap`.
pub fn pair_basis(cap: u32) -> Result<Arc<GradedBasis>> {
    let (a, b) = (site_basis("1", cap)?, site_basis("2", cap)?);
    tensor_basis(&a, &b)
}

/// Generators as differential operators in the variables `x{tag}, y{tag}, z{tag}`.
#[derive(Debug, Clone)]
pub struct Sl3Generators {
    /// Off-diagonal `T_ab`, indexed `[a-1][b-1]`; diagonal slots hold
    /// `T_11 = (2H1+H2)/3`, `T_22 = (H2-H1)/3`, `T_33 = -(H1+2H2)/3`.
    t: Vec<Vec<SparseOp>>,
    pub h1: SparseOp,
    pub h2: SparseOp,
}

impl Sl3Generators {
    /// `T_ab` with one-based indices.
    pub fn t(&self, a: usize, b: usize) -> &SparseOp {
        &self.t[a - 1][b - 1]
    }

    /// The eight generators with their names, in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, &SparseOp)> {
        vec![
            ("T12", self.t(1, 2)),
            ("T13", self.t(1, 3)),
            ("T23", self.t(2, 3)),
            ("T21", self.t(2, 1)),
            ("T31", self.t(3, 1)),
            ("T32", self.t(3, 2)),
            ("H1", &self.h1),
            ("H2", &self.h2),
        ]
    }

    /// Generator-wise sum of two families on the same basis.
    pub fn plus(&self, other: &Sl3Generators) -> Result<Sl3Generators> {
        let mut t = Vec::with_capacity(3);
        for a in 0..3 {
            let mut row = Vec::with_capacity(3);
            for b in 0..3 {
                row.push(self.t[a][b].add(&other.t[a][b])?);
            }
            t.push(row);
        }
        Ok(Sl3Generators {
            t,
            h1: self.h1.add(&other.h1)?,
            h2: self.h2.add(&other.h2)?,
        })
    }

    /// The operator `Σ_ab c[a][b] T_ab`.
    pub fn combination(&self, c: &DenseMatrix) -> Result<SparseOp> {
        let basis = self.h1.domain().clone();
        let mut acc = SparseOp::zero(&basis, &basis);
        for a in 0..3 {
            for b in 0..3 {
                let k = c.get(a, b);
                if !k.is_zero() {
                    acc = acc.lin_comb(&Rat::one(), &self.t[a][b], k)?;
                }
            }
        }
        Ok(acc)
    }
}

/// Coefficient matrix of each named generator in the `E_ab` basis.
pub fn generator_matrix(name: &str) -> DenseMatrix {
    let e = |a: usize, b: usize| DenseMatrix::unit(3, a - 1, b - 1);
    match name {
        "H1" => e(1, 1).sub(&e(2, 2)).expect("3x3"),
        "H2" => e(2, 2).sub(&e(3, 3)).expect("3x3"),
        _ => {
            let b = name.as_bytes();
            e((b[1] - b'0') as usize, (b[2] - b'0') as usize)
        }
    }
}

pub fn sl3_generators(m: &Rat, n: &Rat, basis: &Arc<GradedBasis>, tag: &str) -> Result<Sl3Generators> {
    let (x, y, z) = (format!("x{tag}"), format!("y{tag}"), format!("z{tag}"));
    let p = |a: &str, b: &str| format!("{a}*{b}");
    let sq = |a: &str| format!("{a}^2");
    let t21 = DiffExpr::new().d(1, "1", &x).tabulate(basis, -1)?;
    let t31 = DiffExpr::new().d(1, "1", &y).tabulate(basis, -2)?;
    let t32 = DiffExpr::new().d(1, "1", &z).d(-1, &x, &y).tabulate(basis, -1)?;
    let t12 = DiffExpr::new()
        .d(-1, &sq(&x), &x)
        .d(-1, &p(&x, &y), &y)
        .d(1, &p(&x, &z), &z)
        .d(1, &y, &z)
        .mul(n.clone(), &x)
        .tabulate(basis, 1)?;
    let t23 = DiffExpr::new()
        .d(-1, &sq(&z), &z)
        .d(-1, &y, &x)
        .mul(m.clone(), &z)
        .tabulate(basis, 1)?;
    let t13 = DiffExpr::new()
        .d(-1, &sq(&y), &y)
        .d(-1, &p(&x, &y), &x)
        .d(-1, &p(&y, &z), &z)
        .d(-1, &format!("{x}*{z}^2"), &z)
        .mul(m + n, &y)
        .mul(m.clone(), &p(&x, &z))
        .tabulate(basis, 2)?;
    let h1 = DiffExpr::new()
        .d(2, &x, &x)
        .d(1, &y, &y)
        .d(-1, &z, &z)
        .mul(-n, "1")
        .tabulate(basis, 0)?;
    let h2 = DiffExpr::new()
        .d(2, &z, &z)
        .d(1, &y, &y)
        .d(-1, &x, &x)
        .mul(-m, "1")
        .tabulate(basis, 0)?;
    let third = Rat::new(1, 3);
    let diag = |a: i64, b: i64| h1.lin_comb(&(Rat::from_int(a) * &third), &h2, &(Rat::from_int(b) * &third));
    let t = vec![
        vec![diag(2, 1)?, t12, t13],
        vec![t21, diag(-1, 1)?, t23],
        vec![t31, t32, diag(-1, -2)?],
    ];
    Ok(Sl3Generators { t, h1, h2 })
}

/// Structure-constant prediction for `[X, Y]` in the `E_ab` basis.
pub fn bracket_matrix(x: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
    x.commutator(y).expect("3x3")
}

/// Checks all 28 brackets of the eight generators against the structure
/// constants `[T_ab, T_cd] = δ_cb T_ad - δ_ad T_cb`.
pub fn commutator_checks(g: &Sl3Generators, window: i32) -> Result<Vec<(String, ZeroCheck)>> {
    let named = g.named();
    let mut out = Vec::new();
    for i in 0..named.len() {
        for j in i + 1..named.len() {
            let (na, a) = named[i];
            let (nb, b) = named[j];
            let want = g.combination(&bracket_matrix(&generator_matrix(na), &generator_matrix(nb)))?;
            out.push((format!("[{na},{nb}]"), equal_on(&a.commutator(b)?, &want, window)?));
        }
    }
    Ok(out)
}

/// `C₂ = Σ T_ab T_ba` and `C₃ = Σ T_ab T_bc T_ca`.
pub fn sl3_casimirs(g: &Sl3Generators) -> Result<(SparseOp, SparseOp)> {
    let basis = g.h1.domain().clone();
    let mut c2 = SparseOp::zero(&basis, &basis);
    let mut c3 = SparseOp::zero(&basis, &basis);
    for a in 1..=3 {
        for b in 1..=3 {
            let ab = g.t(a, b);
            c2 = c2.add(&ab.compose(g.t(b, a))?)?;
            for c in 1..=3 {
                c3 = c3.add(&ab.compose(&g.t(b, c).compose(g.t(c, a))?)?)?;
            }
        }
    }
    Ok((c2, c3))
}

/// Scalar by which `op` acts on the window, or `None` if it is not scalar
/// there (or the window is not certified).
pub fn scalar_on_window(op: &SparseOp, window: i32) -> Result<Option<Rat>> {
    let basis = op.domain();
    let one = basis
        .index(&Monomial::one(basis.nvars()))
        .ok_or_else(|| Error::BasisMismatch("no constant monomial".into()))?;
    let c = op
        .entry(one, one)
        .ok_or_else(|| Error::Uncertified { monomial: "1".into() })?;
    let z = equal_on(op, &SparseOp::scalar(basis, &c), window)?;
    Ok(z.is_zero().then_some(c))
}

/// One of the two three-dimensional representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fundamental {
    /// `(1,0)`: `t_ab = E_ab`, `h1 = diag(1,-1,0)`, `h2 = diag(0,1,-1)`.
    First,
    /// `(0,1)`: `t_ab -> -t_ba`, `h -> -h`.
    Second,
}

/// The eight matrices of a fundamental representation, in the order of
/// [`Sl3Generators::named`].
pub fn sl3_fundamental(which: Fundamental) -> Vec<(&'static str, DenseMatrix)> {
    let names = ["T12", "T13", "T23", "T21", "T31", "T32", "H1", "H2"];
    names
        .iter()
        .map(|&n| {
            let m = generator_matrix(n);
            let m = match which {
                Fundamental::First => m,
                Fundamental::Second => m.transpose().scale(&Rat::from_int(-1)),
            };
            (n, m)
        })
        .collect()
}

/// Brackets of a fundamental representation compared with the structure
/// constants; returns the first failing pair.
pub fn fundamental_closure(which: Fundamental) -> Option<String> {
    let mats = sl3_fundamental(which);
    let lookup = |c: &DenseMatrix| -> DenseMatrix {
        // Σ c_ab t_ab with the representation's own t_ab
        let mut acc = DenseMatrix::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                let k = c.get(a, b);
                if k.is_zero() {
                    continue;
                }
                let t = match which {
                    Fundamental::First => DenseMatrix::unit(3, a, b),
                    Fundamental::Second => DenseMatrix::unit(3, b, a).scale(&Rat::from_int(-1)),
                };
                acc = acc.add(&t.scale(k)).expect("3x3");
            }
        }
        acc
    };
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let (na, a) = &mats[i];
            let (nb, b) = &mats[j];
            let want = lookup(&bracket_matrix(&generator_matrix(na), &generator_matrix(nb)));
            if a.commutator(b).expect("3x3") != want {
                return Some(format!("[{na},{nb}]"));
            }
        }
    }
    None
}

/// Result of the finite-dimensional subspace construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FindimReport {
    pub dim: usize,
    pub expected: usize,
    /// Every generator maps the span into itself.
    pub invariant: bool,
    /// For `N = 0` (resp. `M = 0`) the span lies in `C[y+xz, z]` (resp. `C[x, y]`).
    pub reduced_variables: Option<bool>,
}

/// Incremental row-reduced span of dense vectors.
struct Span {
    rows: Vec<(usize, Vec<Rat>)>,
}

impl Span {
    fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        let mut v = v.to_vec();
        for (p, r) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (a, b) in v.iter_mut().zip(r) {
                    *a -= &(&f * b);
                }
            }
        }
        v
    }

    /// Adds `v` unless it is already in the span.
    fn insert(&mut self, v: &[Rat]) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = v[p].recip().expect("nonzero pivot");
        for c in v.iter_mut() {
            *c *= &inv;
        }
        for (_, r) in self.rows.iter_mut() {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (a, b) in r.iter_mut().zip(&v) {
                    *a -= &(&f * b);
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

fn to_dense(v: &SparseVec, n: usize) -> Vec<Rat> {
    let mut d = vec![Rat::zero(); n];
    for (i, c) in v {
        d[*i as usize] = c.clone();
    }
    d
}

fn to_sparse(d: &[Rat]) -> SparseVec {
    d.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as u32, c.clone()))
        .collect()
}

/// Span the raising orbit of `1` at weights `m = M`, `n = N`, and check its
/// dimension `(M+1)(N+1)(M+N+2)/2` and invariance.
pub fn sl3_findim_check(big_m: u32, big_n: u32) -> Result<FindimReport> {
    let cap = 2 * (big_m + big_n) + 2;
    let basis = site_basis("", cap)?;
    let g = sl3_generators(&Rat::from_int(big_m as i64), &Rat::from_int(big_n as i64), &basis, "")?;
    let n = basis.len();
    let raising = [g.t(1, 2), g.t(2, 3), g.t(1, 3)];
    let mut span = Span { rows: Vec::new() };
    let mut queue: Vec<SparseVec> = vec![vec![(0, Rat::one())]];
    span.insert(&to_dense(&queue[0], n));
    while let Some(v) = queue.pop() {
        for op in raising {
            let w = op
                .apply(&v)
                .ok_or_else(|| Error::NotFiniteDimensional("raising orbit leaves the truncation".into()))?;
            if span.insert(&to_dense(&w, n)) {
                queue.push(w);
            }
        }
    }
    let dim = span.rows.len();
    let expected = ((big_m + 1) * (big_n + 1) * (big_m + big_n + 2) / 2) as usize;
    let mut invariant = true;
    for (_, op) in g.named() {
        for (_, r) in &span.rows {
            let Some(w) = op.apply(&to_sparse(r)) else {
                invariant = false;
                continue;
            };
            if span.reduce(&to_dense(&w, n)).iter().any(|c| !c.is_zero()) {
                invariant = false;
            }
        }
    }
    let reduced_variables = if big_n == 0 || big_m == 0 {
        let test = if big_n == 0 {
            DiffExpr::new().d(1, "1", "x").d(-1, "z", "y")
        } else {
            DiffExpr::new().d(1, "1", "z")
        }
        .tabulate(&basis, -1)?;
        Some(
            span.rows
                .iter()
                .all(|(_, r)| test.apply(&to_sparse(r)).is_some_and(|w| w.is_empty())),
        )
    } else {
        None
    };
    Ok(FindimReport {
        dim,
        expected,
        invariant,
        reduced_variables,
    })
}

/// `exp(λ op) v`, summed until the terms vanish.
fn exp_apply(op: &SparseOp, lambda: &Rat, v: &SparseVec) -> Result<SparseVec> {
    let mut total: Vec<(u32, Rat)> = v.clone();
    let mut term = v.clone();
    let mut coef = Rat::one();
    for k in 1..=op.domain().len() + 1 {
        term = op
            .apply(&term)
            .ok_or_else(|| Error::NotFiniteDimensional("series leaves the truncation".into()))?;
        if term.is_empty() {
            return Ok(total);
        }
        coef = coef * lambda * Rat::new(1, k as i64);
        total = crate::linop::combine([(&Rat::one(), &total), (&coef, &term)]);
    }
    Err(Error::NotFiniteDimensional(
        "exponential series does not terminate".into(),
    ))
}

/// `e^{μT12} e^{νT23} e^{λT13}·1` against
/// `[1+μx+λy]^N [1+νz+(λ+μν)(y+xz)]^M`; returns the first differing monomial.
pub fn generating_function_check(big_m: u32, big_n: u32, mu: &Rat, nu: &Rat, lambda: &Rat) -> Result<Option<String>> {
    let cap = 2 * (big_m + big_n) + 2;
    let basis = site_basis("", cap)?;
    let g = sl3_generators(&Rat::from_int(big_m as i64), &Rat::from_int(big_n as i64), &basis, "")?;
    let one: SparseVec = vec![(0, Rat::one())];
    let v = exp_apply(g.t(1, 3), lambda, &one)?;
    let v = exp_apply(g.t(2, 3), nu, &v)?;
    let v = exp_apply(g.t(1, 2), mu, &v)?;
    let mono = |s: &str| crate::polyspace::parse_monomial(s, basis.vars()).expect("site variable");
    let mut first = Poly::constant(3, Rat::one());
    first.add_term(mono("x"), mu);
    first.add_term(mono("y"), lambda);
    let mut second = Poly::constant(3, Rat::one());
    second.add_term(mono("z"), nu);
    let lm = lambda + &(mu * nu);
    second.add_term(mono("y"), &lm);
    second.add_term(mono("x*z"), &lm);
    let want = first.pow(big_n, 3).mul(&second.pow(big_m, 3));
    let mut got = Poly::zero();
    for (i, c) in &v {
        got.add_term(basis.monomial(*i as usize).clone(), c);
    }
    let diff = got.add(&want.scale(&Rat::from_int(-1)));
    let first = diff.iter().next().map(|(m, _)| basis.show(m));
    Ok(first)
}

fn translation(basis: &Arc<GradedBasis>, rules: &[(&str, &[(Rat, &str)])]) -> Result<SparseOp> {
    let rules: Vec<SubstRule> = rules
        .iter()
        .map(|(var, terms)| {
            let mut p = Poly::zero();
            for (c, m) in terms.iter() {
                p.add_term(crate::polyspace::parse_monomial(m, basis.vars())?, c);
            }
            Ok((var.to_string(), p))
        })
        .collect::<Result<_>>()?;
    flow_op(&rules, basis)
}

/// `e^{λT21}`, `e^{λT31}`, `e^{λT32}` as series against
/// `Φ(x+λ,y,z)`, `Φ(x,y+λ,z)`, `Φ(x,y-λx,z+λ)`.
pub fn sl3_global_checks(m: &Rat, n: &Rat, lambda: &Rat, basis: &Arc<GradedBasis>) -> Result<Vec<(String, ZeroCheck)>> {
    let g = sl3_generators(m, n, basis, "")?;
    let one = Rat::one();
    let cases: [(&str, &SparseOp, SparseOp); 3] = [
        (
            "T21",
            g.t(2, 1),
            translation(basis, &[("x", &[(one.clone(), "x"), (lambda.clone(), "1")])])?,
        ),
        (
            "T31",
            g.t(3, 1),
            translation(basis, &[("y", &[(one.clone(), "y"), (lambda.clone(), "1")])])?,
        ),
        (
            "T32",
            g.t(3, 2),
            translation(
                basis,
                &[
                    ("y", &[(one.clone(), "y"), (-lambda, "x")]),
                    ("z", &[(one.clone(), "z"), (lambda.clone(), "1")]),
                ],
            )?,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, op, flow)| {
            Ok((
                name.to_string(),
                equal_on(&exp_series(op, lambda)?, &flow, basis.height_cap())?,
            ))
        })
        .collect()
}

/// The Lax operator with the printed entries.
pub fn sl3_lax(us: &[Rat; 3], basis: &Arc<GradedBasis>, tag: &str) -> Result<LaxOp> {
    let [u1, u2, u3] = us;
    let (x, y, z) = (format!("x{tag}"), format!("y{tag}"), format!("z{tag}"));
    let xz = format!("{x}*{z}");
    let m = u3 - u2 - Rat::one();
    let n = u2 - u1 - Rat::one();
    let blocks = vec![
        DiffExpr::new()
            .d(1, &x, &x)
            .d(1, &y, &y)
            .mul(u1 + Rat::from_int(2), "1")
            .tabulate(basis, 0)?,
        DiffExpr::new().d(1, "1", &x).tabulate(basis, -1)?,
        DiffExpr::new().d(1, "1", &y).tabulate(basis, -2)?,
        DiffExpr::new()
            .d(-1, &format!("{x}^2"), &x)
            .d(-1, &format!("{x}*{y}"), &y)
            .d(1, &xz, &z)
            .d(1, &y, &z)
            .mul(n.clone(), &x)
            .tabulate(basis, 1)?,
        DiffExpr::new()
            .d(-1, &x, &x)
            .d(1, &z, &z)
            .mul(u2 + Rat::one(), "1")
            .tabulate(basis, 0)?,
        DiffExpr::new().d(1, "1", &z).d(-1, &x, &y).tabulate(basis, -1)?,
        DiffExpr::new()
            .d(-1, &format!("{x}*{y}"), &x)
            .d(-1, &format!("{y}^2"), &y)
            .d(-1, &format!("{x}*{z}^2"), &z)
            .d(-1, &format!("{y}*{z}"), &z)
            .mul(m.clone(), &xz)
            .mul(u3 - u1 - Rat::from_int(2), &y)
            .tabulate(basis, 2)?,
        DiffExpr::new()
            .d(-1, &y, &x)
            .d(-1, &format!("{z}^2"), &z)
            .mul(m, &z)
            .tabulate(basis, 1)?,
        DiffExpr::new()
            .d(-1, &y, &y)
            .d(-1, &z, &z)
            .mul(u3.clone(), "1")
            .tabulate(basis, 0)?,
    ];
    LaxOp::new(3, blocks, us.to_vec())
}

/// `u + Σ_ab t_ab ⊗ T_ba` with the fundamental `(1,0)` matrices: entry
/// `(i, j)` is `T_ji`, diagonal entries `T_ii + u`.
pub fn sl3_lax_casimir_form(p: &Sl3Params, basis: &Arc<GradedBasis>, tag: &str) -> Result<LaxOp> {
    let g = sl3_generators(&p.m, &p.n, basis, tag)?;
    let mut blocks = Vec::with_capacity(9);
    for i in 1..=3 {
        for j in 1..=3 {
            let mut b = g.t(j, i).clone();
            if i == j {
                b = b.add(&SparseOp::scalar(basis, &p.u))?;
            }
            blocks.push(b);
        }
    }
    LaxOp::new(3, blocks, p.us().to_vec())
}

/// The additive constant between the printed and the Casimir-form Lax
/// operators, read off the `(1,1)` entry on `1`, and whether the difference
/// is exactly that constant times the identity.
pub fn lax_casimir_offset(p: &Sl3Params, basis: &Arc<GradedBasis>, tag: &str) -> Result<(Rat, ZeroCheck)> {
    let printed = sl3_lax(&p.us(), basis, tag)?;
    let casimir = sl3_lax_casimir_form(p, basis, tag)?;
    let diff = printed.sub(&casimir)?;
    let one = basis
        .index(&Monomial::one(basis.nvars()))
        .ok_or_else(|| Error::BasisMismatch("no constant monomial".into()))?;
    let c = diff.block(0, 0).entry(one, one).unwrap_or_else(Rat::zero);
    let shifted = diff.sub(&scalar_lax(&DenseMatrix::identity(3).scale(&c), basis)?)?;
    Ok((c, shifted.is_zero(basis.height_cap() - 2)?))
}

/// A constant 3x3 matrix as a Lax-shaped operator matrix.
fn scalar_lax(m: &DenseMatrix, basis: &Arc<GradedBasis>) -> Result<LaxOp> {
    let blocks = (0..9).map(|k| SparseOp::scalar(basis, m.get(k / 3, k % 3))).collect();
    LaxOp::new(3, blocks, vec![])
}

/// Lower-upper-lower factorized form of the Lax operator.
pub fn sl3_lax_factored(us: &[Rat; 3], basis: &Arc<GradedBasis>, tag: &str) -> Result<LaxOp> {
    let [u1, u2, u3] = us;
    let (x, y, z) = (format!("x{tag}"), format!("y{tag}"), format!("z{tag}"));
    let id = SparseOp::identity(basis);
    let zero = SparseOp::zero(basis, basis);
    let mul = |c: i64, m: &str, shift: i32| DiffExpr::new().mul(c, m).tabulate(basis, shift);
    let left = LaxOp::new(
        3,
        vec![
            id.clone(),
            zero.clone(),
            zero.clone(),
            mul(-1, &x, 1)?,
            id.clone(),
            zero.clone(),
            mul(-1, &y, 2)?,
            mul(-1, &z, 1)?,
            id.clone(),
        ],
        vec![],
    )?;
    let upper = LaxOp::new(
        3,
        vec![
            SparseOp::scalar(basis, u1),
            DiffExpr::new().d(1, "1", &x).d(-1, &z, &y).tabulate(basis, -1)?,
            DiffExpr::new().d(1, "1", &y).tabulate(basis, -2)?,
            zero.clone(),
            SparseOp::scalar(basis, u2),
            DiffExpr::new().d(1, "1", &z).tabulate(basis, -1)?,
            zero.clone(),
            zero.clone(),
            SparseOp::scalar(basis, u3),
        ],
        vec![],
    )?;
    let right = LaxOp::new(
        3,
        vec![
            id.clone(),
            zero.clone(),
            zero.clone(),
            mul(1, &x, 1)?,
            id.clone(),
            zero.clone(),
            DiffExpr::new()
                .mul(1, &y)
                .mul(1, &format!("{x}*{z}"))
                .tabulate(basis, 2)?,
            mul(1, &z, 1)?,
            id,
        ],
        vec![],
    )?;
    left.mul(&upper)?.mul(&right)
}

fn scalar_matrix_mul(m: &DenseMatrix, l: &LaxOp, left: bool) -> Result<LaxOp> {
    let basis = l.block(0, 0).domain().clone();
    let mut blocks = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = SparseOp::zero(&basis, &basis);
            for t in 0..3 {
                let (c, b) = if left {
                    (m.get(i, t), l.block(t, j))
                } else {
                    (m.get(t, j), l.block(i, t))
                };
                if !c.is_zero() {
                    acc = acc.lin_comb(&Rat::one(), b, c)?;
                }
            }
            blocks.push(acc);
        }
    }
    LaxOp::new(3, blocks, l.params().to_vec())
}

/// `M⁻¹ L M = S⁻¹ L S` with `S = e^{c(∂z - x∂y)} e^{b∂y} e^{a∂x}` and
/// `M = [[1,0,0],[-a,1,0],[-b,-c,1]]`.
pub fn sl3_invariance_check(us: &[Rat; 3], abc: [&Rat; 3], basis: &Arc<GradedBasis>) -> Result<ZeroCheck> {
    let [a, b, c] = abc;
    let l = sl3_lax(us, basis, "")?;
    let (o, z) = (Rat::one(), Rat::zero());
    let m = DenseMatrix::from_fn(3, 3, |i, j| match (i, j) {
        (0, 0) | (1, 1) | (2, 2) => o.clone(),
        (1, 0) => -a,
        (2, 0) => -b,
        (2, 1) => -c,
        _ => z.clone(),
    });
    let m_inv = DenseMatrix::from_fn(3, 3, |i, j| match (i, j) {
        (0, 0) | (1, 1) | (2, 2) => o.clone(),
        (1, 0) => a.clone(),
        (2, 0) => a * c + b,
        (2, 1) => c.clone(),
        _ => z.clone(),
    });
    debug_assert_eq!(m.mul(&m_inv).ok(), Some(DenseMatrix::identity(3)));
    let lhs = scalar_matrix_mul(&m, &scalar_matrix_mul(&m_inv, &l, true)?, false)?;
    let fa = |s: &Rat| translation(basis, &[("x", &[(o.clone(), "x"), (s.clone(), "1")])]);
    let fb = |s: &Rat| translation(basis, &[("y", &[(o.clone(), "y"), (s.clone(), "1")])]);
    let fc = |s: &Rat| {
        translation(
            basis,
            &[
                ("y", &[(o.clone(), "y"), (-s, "x")]),
                ("z", &[(o.clone(), "z"), (s.clone(), "1")]),
            ],
        )
    };
    // S = F_c ∘ F_b ∘ F_a, S⁻¹ = F_{-a} ∘ F_{-b} ∘ F_{-c}
    let s = fc(c)?.compose(&fb(b)?)?.compose(&fa(a)?)?;
    let s_inv = fa(&-a)?.compose(&fb(&-b)?)?.compose(&fc(&-c)?)?;
    let rhs = l.right_compose(&s)?.left_compose(&s_inv)?;
    lhs.sub(&rhs)?.is_zero(basis.height_cap() - 2)
}

/// Elementary operator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sl3Op {
    R1,
    R2,
    R3,
}

/// Diagonal factor inside an elementary operator, named after its position
/// in `S⁻¹ · a · e · b · e · c · S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sl3Factor {
    A,
    B,
    C,
}

pub type Sl3Mutation = (Sl3Op, Sl3Factor, EigenShift);

fn pick(m: Option<Sl3Mutation>, op: Sl3Op, f: Sl3Factor) -> Option<EigenShift> {
    m.and_then(|(o, g, s)| (o == op && g == f).then_some(s))
}

/// Numerator/denominator pairs of the diagonal factors of one elementary
/// operator; the flag marks factors that also see negative exponents.
pub fn factor_pairs(op: Sl3Op, args: &[Rat]) -> Vec<(Sl3Factor, Rat, Rat, bool)> {
    let one = Rat::one();
    match op {
        // R1(u1; v1, v2, v3)
        Sl3Op::R1 => {
            let (u1, v1, v2, v3) = (&args[0], &args[1], &args[2], &args[3]);
            vec![
                (Sl3Factor::A, u1 - v2 + &one, one.clone(), true),
                (Sl3Factor::B, u1 - v3 + &one, v1 - v3 + &one, false),
                (Sl3Factor::C, one.clone(), v1 - v2 + &one, false),
            ]
        }
        // R2(u1, u2; v2, v3)
        Sl3Op::R2 => {
            let (u1, u2, v2, v3) = (&args[0], &args[1], &args[2], &args[3]);
            vec![
                (Sl3Factor::A, u2 - v3 + &one, one.clone(), true),
                (Sl3Factor::B, u1 - v2 + &one, u1 - u2 + &one, false),
                (Sl3Factor::C, one.clone(), v2 - v3 + &one, false),
            ]
        }
        // R3(u1, u2, u3; v3)
        Sl3Op::R3 => {
            let (u1, u2, u3, v3) = (&args[0], &args[1], &args[2], &args[3]);
            vec![
                (Sl3Factor::A, u2 - v3 + &one, one.clone(), true),
                (Sl3Factor::B, u1 - v3 + &one, u1 - u3 + &one, false),
                (Sl3Factor::C, one.clone(), u2 - u3 + &one, false),
            ]
        }
    }
}

/// Substitution `var -> sum of coef * monomial`.
type Rule = (&'static str, &'static [(i64, &'static str)]);
type Terms = &'static [(i64, &'static str)];

/// Variable layout of one elementary operator: conjugator rules in
/// application order (`C`, `B`, `A` for `S`; reversed inverses for `S⁻¹`),
/// optional frame change, Laurent variable with its partner, flow target
/// and flow sign before `b`.
struct Layout {
    conj: [Rule; 3],
    conj_inv: [Rule; 3],
    frame: Option<(&'static str, Terms, Terms)>,
    ac_var: &'static str,
    b_var: &'static str,
    den: &'static str,
    num: &'static str,
    target: &'static str,
    /// Sign of the flow applied right after `c`.
    first_flow: i64,
}

fn layout(op: Sl3Op) -> Layout {
    match op {
        Sl3Op::R1 => Layout {
            conj: [
                ("x2", &[(1, "x2"), (1, "x1")]),
                ("z2", &[(1, "z2"), (1, "z1")]),
                ("y2", &[(1, "y2"), (1, "y1"), (-1, "z1*x2")]),
            ],
            conj_inv: [
                ("y2", &[(1, "y2"), (-1, "y1"), (1, "z1*x2")]),
                ("z2", &[(1, "z2"), (-1, "z1")]),
                ("x2", &[(1, "x2"), (-1, "x1")]),
            ],
            frame: Some(("y2", &[(1, "y2"), (-1, "x2*z2")], &[(1, "y2"), (1, "x2*z2")])),
            ac_var: "x2",
            b_var: "y2",
            den: "x2",
            num: "y2",
            target: "z2",
            first_flow: 1,
        },
        Sl3Op::R2 => Layout {
            conj: [
                ("x1", &[(1, "x1"), (1, "x2")]),
                ("z2", &[(1, "z2"), (1, "z1")]),
                ("y1", &[(1, "y1"), (1, "y2"), (-1, "x1*z1")]),
            ],
            conj_inv: [
                ("y1", &[(1, "y1"), (-1, "y2"), (1, "x1*z1")]),
                ("z2", &[(1, "z2"), (-1, "z1")]),
                ("x1", &[(1, "x1"), (-1, "x2")]),
            ],
            frame: None,
            ac_var: "z2",
            b_var: "x1",
            den: "z2",
            num: "y1",
            target: "x1",
            first_flow: -1,
        },
        Sl3Op::R3 => Layout {
            conj: [
                ("x1", &[(1, "x1"), (1, "x2")]),
                ("z1", &[(1, "z1"), (1, "z2")]),
                ("y1", &[(1, "y1"), (1, "y2"), (-1, "x1*z2")]),
            ],
            conj_inv: [
                ("y1", &[(1, "y1"), (-1, "y2"), (1, "x1*z2")]),
                ("z1", &[(1, "z1"), (-1, "z2")]),
                ("x1", &[(1, "x1"), (-1, "x2")]),
            ],
            frame: None,
            ac_var: "z1",
            b_var: "y1",
            den: "z1",
            num: "y1",
            target: "x1",
            first_flow: -1,
        },
    }
}

/// Build one elementary operator on the pair basis.
///
/// `args` are `(u1; v1,v2,v3)`, `(u1,u2; v2,v3)` or `(u1,u2,u3; v3)`. The
/// chain is evaluated on a Laurent-padded covering basis and the result is
/// required to be polynomial (`LaurentLeak` otherwise).
pub fn sl3_rop(op: Sl3Op, args: &[Rat; 4], pair: &Arc<GradedBasis>, mutation: Option<Sl3Mutation>) -> Result<SparseOp> {
    let lay = layout(op);
    let work = covering_basis(pair, Some((lay.den, lay.num)))?;
    let poly = covering_basis(pair, None)?;
    let mk = |r: &(&str, &[(i64, &str)])| -> Result<SparseOp> { subst_op(&[rule(&work, r.0, r.1)?], &work) };
    let mut chain = Vec::with_capacity(13);
    for r in lay.conj.iter() {
        chain.push(mk(r)?);
    }
    if let Some((v, fwd, _)) = lay.frame {
        chain.push(mk(&(v, fwd))?);
    }
    let pairs = factor_pairs(op, args);
    let diag = |f: Sl3Factor, var: &str| -> Result<SparseOp> {
        let (_, a, b, _) = pairs.iter().find(|p| p.0 == f).expect("factor present");
        euler_diag(var, a, b, &work, pick(mutation, op, f))
    };
    chain.push(diag(Sl3Factor::C, lay.ac_var)?);
    chain.push(laurent_conj(lay.first_flow, lay.num, lay.den, lay.target, &work)?);
    chain.push(diag(Sl3Factor::B, lay.b_var)?);
    chain.push(laurent_conj(-lay.first_flow, lay.num, lay.den, lay.target, &work)?);
    chain.push(diag(Sl3Factor::A, lay.ac_var)?);
    if let Some((v, _, back)) = lay.frame {
        chain.push(mk(&(v, back))?);
    }
    for r in lay.conj_inv.iter() {
        chain.push(mk(r)?);
    }
    let r = chain_on(&poly, &chain, |m, t| Error::LaurentLeak(format!("{m} -> {t}")))?;
    transfer(&r, pair)
}

/// `R₁(u1; v1,v2,v3)`.
pub fn sl3_r1(u1: &Rat, v: [&Rat; 3], pair: &Arc<GradedBasis>, mutation: Option<Sl3Mutation>) -> Result<SparseOp> {
    sl3_rop(
        Sl3Op::R1,
        &[u1.clone(), v[0].clone(), v[1].clone(), v[2].clone()],
        pair,
        mutation,
    )
}

/// `R₂(u1,u2; v2,v3)`.
pub fn sl3_r2(u: [&Rat; 2], v: [&Rat; 2], pair: &Arc<GradedBasis>, mutation: Option<Sl3Mutation>) -> Result<SparseOp> {
    sl3_rop(
        Sl3Op::R2,
        &[u[0].clone(), u[1].clone(), v[0].clone(), v[1].clone()],
        pair,
        mutation,
    )
}

/// `R₃(u1,u2,u3; v3)`.
pub fn sl3_r3(u: [&Rat; 3], v3: &Rat, pair: &Arc<GradedBasis>, mutation: Option<Sl3Mutation>) -> Result<SparseOp> {
    sl3_rop(
        Sl3Op::R3,
        &[u[0].clone(), u[1].clone(), u[2].clone(), v3.clone()],
        pair,
        mutation,
    )
}

/// Arguments of the three factors of Ř, in application order.
pub fn rhat_factors(p1: &Sl3Params, p2: &Sl3Params, order: crate::sl2core::RhatOrder) -> [(Sl3Op, [Rat; 4]); 3] {
    let [u1, u2, u3] = p1.us();
    let [v1, v2, v3] = p2.us();
    match order {
        crate::sl2core::RhatOrder::First => [
            (Sl3Op::R3, [u1.clone(), u2.clone(), u3.clone(), v3]),
            (Sl3Op::R2, [u1.clone(), u2.clone(), v2, u3.clone()]),
            (Sl3Op::R1, [u1, v1, u2, u3]),
        ],
        crate::sl2core::RhatOrder::Second => [
            (Sl3Op::R1, [u1, v1.clone(), v2.clone(), v3.clone()]),
            (Sl3Op::R2, [v1.clone(), u2, v2.clone(), v3.clone()]),
            (Sl3Op::R3, [v1, v2, u3, v3]),
        ],
    }
}

/// Ř as a product of the three elementary operators (unnormalized; every
/// factor fixes `1 ⊗ 1`).
pub fn sl3_rhat(
    p1: &Sl3Params,
    p2: &Sl3Params,
    pair: &Arc<GradedBasis>,
    order: crate::sl2core::RhatOrder,
    mutation: Option<Sl3Mutation>,
) -> Result<SparseOp> {
    let mut acc: Option<SparseOp> = None;
    for (op, args) in rhat_factors(p1, p2, order) {
        let f = sl3_rop(op, &args, pair, mutation)?;
        acc = Some(match acc {
            None => f,
            Some(prev) => f.compose(&prev)?,
        });
    }
    Ok(acc.expect("three factors"))
}

/// Both orderings, lowest-weight normalized, compared.
pub fn sl3_orders_agree(
    p1: &Sl3Params,
    p2: &Sl3Params,
    pair: &Arc<GradedBasis>,
    mutation: Option<Sl3Mutation>,
) -> Result<ZeroCheck> {
    use crate::sl2core::RhatOrder;
    let (a, _) = lwv_normalize(&sl3_rhat(p1, p2, pair, RhatOrder::First, mutation)?)?;
    let (b, _) = lwv_normalize(&sl3_rhat(p1, p2, pair, RhatOrder::Second, mutation)?)?;
    equal_on(&a, &b, pair.height_cap())
}

/// The site flip `(x1,y1,z1) <-> (x2,y2,z2)`.
pub fn swap_sites(pair: &Arc<GradedBasis>) -> Result<SparseOp> {
    permute_vars(pair, &[3, 4, 5, 0, 1, 2])
}

/// `P₁₂ ∘ Ř` (first ordering).
pub fn sl3_rmatrix(
    p1: &Sl3Params,
    p2: &Sl3Params,
    pair: &Arc<GradedBasis>,
    mutation: Option<Sl3Mutation>,
) -> Result<SparseOp> {
    swap_sites(pair)?.compose(&sl3_rhat(p1, p2, pair, crate::sl2core::RhatOrder::First, mutation)?)
}

/// The single-site operator `a[z∂z] e^{(y/z)∂x} b[y∂y] e^{-(y/z)∂x} c[z∂z]`
/// that the third elementary operator reduces to after conjugation.
pub fn reduced_r3(
    us: &[Rat; 3],
    v3: &Rat,
    basis: &Arc<GradedBasis>,
    mutation: Option<Sl3Mutation>,
) -> Result<SparseOp> {
    let [u1, u2, u3] = us;
    let shift = |f: Sl3Factor| match mutation {
        Some((Sl3Op::R3, g, s)) if g == f => Some(s),
        _ => None,
    };
    let work = covering_basis(basis, Some(("z", "y")))?;
    let poly = covering_basis(basis, None)?;
    let one = Rat::one();
    let chain = vec![
        euler_diag("z", &one, &(u2 - u3 + &one), &work, shift(Sl3Factor::C))?,
        laurent_conj(-1, "y", "z", "x", &work)?,
        euler_diag("y", &(u1 - v3 + &one), &(u1 - u3 + &one), &work, shift(Sl3Factor::B))?,
        laurent_conj(1, "y", "z", "x", &work)?,
        euler_diag("z", &(u2 - v3 + &one), &one, &work, shift(Sl3Factor::A))?,
    ];
    let r = chain_on(&poly, &chain, |m, t| Error::LaurentLeak(format!("{m} -> {t}")))?;
    transfer(&r, basis)
}

/// Spectral parameters exchanged by one elementary operator: `R1` swaps
/// `u1 <-> v1`, `R2` swaps `u2 <-> v2`, `R3` swaps `u3 <-> v3`.
pub fn exchanged(op: Sl3Op, us: &[Rat; 3], vs: &[Rat; 3]) -> ([Rat; 3], [Rat; 3]) {
    let k = match op {
        Sl3Op::R1 => 0,
        Sl3Op::R2 => 1,
        Sl3Op::R3 => 2,
    };
    let (mut a, mut b) = (us.clone(), vs.clone());
    std::mem::swap(&mut a[k], &mut b[k]);
    (a, b)
}

/// Arguments of an elementary operator read off the full parameter triples.
pub fn elementary_args(op: Sl3Op, us: &[Rat; 3], vs: &[Rat; 3]) -> [Rat; 4] {
    let [u1, u2, u3] = us.clone();
    let [v1, v2, v3] = vs.clone();
    match op {
        Sl3Op::R1 => [u1, v1, v2, v3],
        Sl3Op::R2 => [u1, u2, v2, v3],
        Sl3Op::R3 => [u1, u2, u3, v3],
    }
}

/// `L1(u) L2(v)` on the pair basis.
pub fn lax_pair_product(us: &[Rat; 3], vs: &[Rat; 3], pair: &Arc<GradedBasis>) -> Result<LaxOp> {
    sl3_lax(us, pair, "1")?.mul(&sl3_lax(vs, pair, "2")?)
}

/// Residual of `R L1(u)L2(v) = L1(u')L2(v') R` for one elementary operator,
/// with `(u', v')` the exchanged parameters.
pub fn elementary_residual(
    op: Sl3Op,
    us: &[Rat; 3],
    vs: &[Rat; 3],
    pair: &Arc<GradedBasis>,
    mutation: Option<Sl3Mutation>,
) -> Result<ZeroCheck> {
    let r = sl3_rop(op, &elementary_args(op, us, vs), pair, mutation)?;
    let (a, b) = exchanged(op, us, vs);
    let lhs = lax_pair_product(us, vs, pair)?.left_compose(&r)?;
    let rhs = lax_pair_product(&a, &b, pair)?.right_compose(&r)?;
    lhs.sub(&rhs)?.is_zero(pair.height_cap() - 2)
}

/// Residual of `Ř L1(u)L2(v) = L1(v)L2(u) Ř`.
pub fn rhat_residual(
    p1: &Sl3Params,
    p2: &Sl3Params,
    pair: &Arc<GradedBasis>,
    order: crate::sl2core::RhatOrder,
    mutation: Option<Sl3Mutation>,
) -> Result<ZeroCheck> {
    let rh = sl3_rhat(p1, p2, pair, order, mutation)?;
    let (us, vs) = (p1.us(), p2.us());
    let lhs = lax_pair_product(&us, &vs, pair)?.left_compose(&rh)?;
    let rhs = lax_pair_product(&vs, &us, pair)?.right_compose(&rh)?;
    lhs.sub(&rhs)?.is_zero(pair.height_cap() - 2)
}

/// Residual of `R L1(u)L2(v) = L2(v)L1(u) R` with `R = P₁₂ Ř`.
pub fn rmatrix_residual(
    p1: &Sl3Params,
    p2: &Sl3Params,
    pair: &Arc<GradedBasis>,
    mutation: Option<Sl3Mutation>,
) -> Result<ZeroCheck> {
    let r = sl3_rmatrix(p1, p2, pair, mutation)?;
    let (us, vs) = (p1.us(), p2.us());
    let (l1, l2) = (sl3_lax(&us, pair, "1")?, sl3_lax(&vs, pair, "2")?);
    let lhs = l1.mul(&l2)?.left_compose(&r)?;
    let rhs = l2.mul(&l1)?.right_compose(&r)?;
    lhs.sub(&rhs)?.is_zero(pair.height_cap() - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::is_zero;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parametrization_round_trip() {
        let p = Sl3Params::new(r("1"), r("0"), r("1"));
        assert_eq!(p.us(), [r("-4/3"), r("-1/3"), r("5/3")]);
        assert_eq!(Sl3Params::from_us(&p.us()), p);
        let q = Sl3Params::new(r("2/7"), r("-5/3"), r("3/11"));
        let [a, b, c] = q.us();
        assert_eq!(a + b + c, &q.u * Rat::from_int(3) - Rat::from_int(3));
    }

    #[test]
    fn generator_actions() {
        let b = site_basis("", 4).unwrap();
        let g = sl3_generators(&r("2"), &r("1/3"), &b, "").unwrap();
        let at = |m: &str| {
            b.index(&crate::polyspace::parse_monomial(m, b.vars()).unwrap())
                .unwrap()
        };
        assert_eq!(g.t(2, 1).entry(at("1"), at("x")), Some(r("1")));
        assert_eq!(
            g.t(2, 3).image_poly(at("1")).unwrap().display(b.vars()).to_string(),
            "(2)*z^1"
        );
        assert_eq!(g.h1.entry(0, 0), Some(r("-1/3")));
        assert_eq!(g.h2.entry(0, 0), Some(r("-2")));
        for (a, c) in [(2, 1), (3, 1), (3, 2)] {
            assert!(g.t(a, c).column(0).unwrap().is_empty());
        }
    }

    #[test]
    fn all_brackets_close() {
        let b = site_basis("", 4).unwrap();
        let g = sl3_generators(&r("3/5"), &r("-2/7"), &b, "").unwrap();
        let checks = commutator_checks(&g, 1).unwrap();
        assert_eq!(checks.len(), 28);
        for (name, z) in checks {
            assert!(z.is_zero(), "{name}: {:?}", z.witness);
        }
        assert_eq!(fundamental_closure(Fundamental::First), None);
        assert_eq!(fundamental_closure(Fundamental::Second), None);
    }

    #[test]
    fn casimirs_are_scalar() {
        let b = site_basis("", 4).unwrap();
        let g = sl3_generators(&r("1"), &r("0"), &b, "").unwrap();
        let (c2, c3) = sl3_casimirs(&g).unwrap();
        assert!(scalar_on_window(&c2, 1).unwrap().is_some());
        assert!(scalar_on_window(&c3, 1).unwrap().is_some());
        assert!(is_zero(&c2.commutator(g.t(1, 2)).unwrap(), 1).unwrap().is_zero());
    }

    #[test]
    fn finite_dimensional_subspaces() {
        for ((m, n), d) in [((1, 0), 3), ((0, 1), 3), ((1, 1), 8), ((2, 0), 6)] {
            let rep = sl3_findim_check(m, n).unwrap();
            assert_eq!(rep.dim, d);
            assert_eq!(rep.expected, d);
            assert!(rep.invariant);
            assert_ne!(rep.reduced_variables, Some(false));
        }
        assert_eq!(
            generating_function_check(1, 0, &r("2/3"), &r("-1/5"), &r("3")).unwrap(),
            None
        );
        assert_eq!(
            generating_function_check(1, 2, &r("2/3"), &r("-1/5"), &r("3")).unwrap(),
            None
        );
    }

    #[test]
    fn lax_forms_agree() {
        let b = site_basis("", 4).unwrap();
        let p = Sl3Params::new(r("1/2"), r("1/3"), r("2/7"));
        let l = sl3_lax(&p.us(), &b, "").unwrap();
        assert_eq!(l.block(0, 0).entry(0, 0), Some(p.u1() + Rat::from_int(2)));
        let (c, z) = lax_casimir_offset(&p, &b, "").unwrap();
        assert_eq!(c, Rat::zero());
        assert!(z.is_zero());
        let f = sl3_lax_factored(&p.us(), &b, "").unwrap();
        assert!(l.sub(&f).unwrap().is_zero(2).unwrap().is_zero());
        let zero = Rat::zero();
        for abc in [
            [&zero, &zero, &zero],
            [&r("1"), &zero, &zero],
            [&r("2/3"), &r("-1/4"), &r("5/2")],
        ] {
            assert!(sl3_invariance_check(&p.us(), abc, &b).unwrap().is_zero());
        }
    }

    #[test]
    fn elementary_relations_hold() {
        let pair = pair_basis(3).unwrap();
        let us = [r("1/3"), r("-2/5"), r("3/7")];
        let vs = [r("2/9"), r("5/4"), r("-1/6")];
        for op in [Sl3Op::R3, Sl3Op::R2, Sl3Op::R1] {
            let z = elementary_residual(op, &us, &vs, &pair, None).unwrap();
            assert!(z.is_zero(), "{op:?}: {:?}", z.witness);
        }
    }

    #[test]
    fn rhat_relations_hold() {
        use crate::sl2core::RhatOrder;
        let pair = pair_basis(3).unwrap();
        let p1 = Sl3Params::new(r("1/3"), r("-2/5"), r("3/7"));
        let p2 = Sl3Params::new(r("2/9"), r("5/4"), r("-1/6"));
        for order in [RhatOrder::First, RhatOrder::Second] {
            let z = rhat_residual(&p1, &p2, &pair, order, None).unwrap();
            assert!(z.is_zero(), "{order:?}: {:?}", z.witness);
        }
        let z = sl3_orders_agree(&p1, &p2, &pair, None).unwrap();
        assert!(z.is_zero(), "{:?}", z.witness);
        assert!(rmatrix_residual(&p1, &p2, &pair, None).unwrap().is_zero());
    }
}
