//! sl(2): generators on `C[z]`, the Lax operator and its factorization, the
//! two elementary R-operators, the factorized Ř and R-matrix, Yang's
//! R-matrix and the spectral check.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{pochhammer_ratio, Rat};
use crate::linop::dense::{embed_pair, permutation, DenseMatrix};
use crate::linop::solve::sparse_nullspace;
use crate::linop::{
    chain_on, equal_on, euler_diag, exp_series, flow_op, is_zero, permute_vars, rule, site_embed, subst_op, transfer,
    DiffExpr, EigenShift, LaxOp, SparseOp, SparseVec, ZeroCheck,
};
use crate::polyspace::{covering_basis, enumerate_basis, tensor_basis, GradedBasis, Poly, VarSpec};
use crate::verify::lwv_normalize;

/// Spin and spectral parameter of one site; `u1 = u + ℓ`, `u2 = u - ℓ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2Params {
    pub ell: Rat,
    pub u: Rat,
}

impl Sl2Params {
    pub fn new(ell: Rat, u: Rat) -> Self {
        Sl2Params { ell, u }
    }

    pub fn from_u12(u1: &Rat, u2: &Rat) -> Self {
        let half = Rat::new(1, 2);
        Sl2Params {
            ell: (u1 - u2) * &half,
            u: (u1 + u2) * &half,
        }
    }

    pub fn u1(&self) -> Rat {
        &self.u + &self.ell
    }

    pub fn u2(&self) -> Rat {
        &self.u - &self.ell
    }
}

pub fn site_basis(var: &str, cap: u32) -> Result<Arc<GradedBasis>> {
    enumerate_basis(vec![VarSpec::new(var, 1)], cap)
}

/// `C[z1] ⊗ C[z2]`, each site truncated at `cap`.
pub fn pair_basis(cap: u32) -> Result<Arc<GradedBasis>> {
    let (a, b) = (site_basis("z1", cap)?, site_basis("z2", cap)?);
    tensor_basis(&a, &b)
}

#[derive(Debug, Clone)]
pub struct Sl2Generators {
    pub s: SparseOp,
    pub s_plus: SparseOp,
    pub s_minus: SparseOp,
}

/// `S = z∂ + ℓ`, `S₋ = -∂`, `S₊ = z²∂ + 2ℓz` in the variable `var`.
pub fn sl2_generators(ell: &Rat, basis: &Arc<GradedBasis>, var: &str) -> Result<Sl2Generators> {
    let two_ell = ell * Rat::from_int(2);
    Ok(Sl2Generators {
        s: DiffExpr::new()
            .d(1, var, var)
            .mul(ell.clone(), "1")
            .tabulate(basis, 0)?,
        s_minus: DiffExpr::new().d(-1, "1", var).tabulate(basis, -1)?,
        s_plus: DiffExpr::new()
            .d(1, &format!("{var}^2"), var)
            .mul(two_ell, var)
            .tabulate(basis, 1)?,
    })
}

/// `C₂ = S² - S + S₊S₋`.
pub fn sl2_casimir(g: &Sl2Generators) -> Result<SparseOp> {
    g.s.compose(&g.s)?.sub(&g.s)?.add(&g.s_plus.compose(&g.s_minus)?)
}

/// `exp(λS₋)` summed as a series against the translation `z -> z - λ`.
pub fn global_lowering_check(ell: &Rat, lambda: &Rat, basis: &Arc<GradedBasis>, var: &str) -> Result<ZeroCheck> {
    let g = sl2_generators(ell, basis, var)?;
    let series = exp_series(&g.s_minus, lambda)?;
    let mut p = Poly::var(basis.nvars(), basis.var_index(var)?);
    p.add_term(crate::polyspace::Monomial::one(basis.nvars()), &(-lambda));
    let flow = flow_op(&[(var.to_string(), p)], basis)?;
    equal_on(&series, &flow, basis.height_cap())
}

/// On the finite-dimensional subspace of `V_ℓ` with `ℓ = -n/2`, checks
/// `exp(λS₊)·1 = (1 - λz)^n` coefficient by coefficient.
pub fn global_raising_check(ell: &Rat, lambda: &Rat) -> Result<Option<(usize, Rat, Rat)>> {
    let two_ell = ell * Rat::from_int(-2);
    let n = match two_ell.to_i64() {
        Some(n) if n >= 0 => n as usize,
        _ => {
            return Err(Error::NotFiniteDimensional(format!(
                "spin {ell} is not of the form -n/2"
            )))
        }
    };
    let basis = site_basis("z", n as u32 + 1)?;
    let g = sl2_generators(ell, &basis, "z")?;
    let mut term: SparseVec = vec![(0, Rat::one())];
    let mut total = vec![Rat::zero(); basis.len()];
    let mut coef = Rat::one();
    for k in 0..=n + 1 {
        for (i, c) in &term {
            total[*i as usize] += &(c * &coef);
        }
        term = g
            .s_plus
            .apply(&term)
            .ok_or_else(|| Error::NotFiniteDimensional("raising leaves the truncation".into()))?;
        coef = coef * lambda * Rat::new(1, k as i64 + 1);
    }
    if !term.is_empty() {
        return Err(Error::NotFiniteDimensional(
            "raising orbit of 1 does not terminate".into(),
        ));
    }
    let base = Poly::constant(1, Rat::one()).add(&Poly::term(crate::polyspace::Monomial(vec![1]), -lambda));
    let expect = base.pow(n as u32, 1);
    for (i, got) in total.iter().enumerate() {
        let want = expect.coeff(basis.monomial(i));
        if *got != want {
            return Ok(Some((i, got.clone(), want)));
        }
    }
    Ok(None)
}

/// `L(u1,u2) = [[u1 + z∂, -∂], [z²∂ + (u1-u2)z, u2 - z∂]]`.
pub fn sl2_lax(u1: &Rat, u2: &Rat, basis: &Arc<GradedBasis>, var: &str) -> Result<LaxOp> {
    let z2 = format!("{var}^2");
    let blocks = vec![
        DiffExpr::new().mul(u1.clone(), "1").d(1, var, var).tabulate(basis, 0)?,
        DiffExpr::new().d(-1, "1", var).tabulate(basis, -1)?,
        DiffExpr::new().d(1, &z2, var).mul(u1 - u2, var).tabulate(basis, 1)?,
        DiffExpr::new()
            .mul(u2.clone(), "1")
            .d(-1, var, var)
            .tabulate(basis, 0)?,
    ];
    LaxOp::new(2, blocks, vec![u1.clone(), u2.clone()])
}

fn lower(basis: &Arc<GradedBasis>, var: &str, sign: i64) -> Result<LaxOp> {
    let id = SparseOp::identity(basis);
    let z = DiffExpr::new().mul(sign, var).tabulate(basis, 1)?;
    LaxOp::new(2, vec![id.clone(), SparseOp::zero(basis, basis), z, id], vec![])
}

/// `[[1,0],[z,1]] · [[u1-1, -∂],[0, u2]] · [[1,0],[-z,1]]`.
pub fn sl2_lax_factored(u1: &Rat, u2: &Rat, basis: &Arc<GradedBasis>, var: &str) -> Result<LaxOp> {
    let mid = LaxOp::new(
        2,
        vec![
            SparseOp::scalar(basis, &(u1 - Rat::one())),
            DiffExpr::new().d(-1, "1", var).tabulate(basis, -1)?,
            SparseOp::zero(basis, basis),
            SparseOp::scalar(basis, u2),
        ],
        vec![],
    )?;
    lower(basis, var, 1)?.mul(&mid)?.mul(&lower(basis, var, -1)?)
}

/// Scalar 2x2 matrix `m` times a Lax operator, or the reverse.
fn scalar_mul(m: &[[Rat; 2]; 2], l: &LaxOp, left: bool) -> Result<LaxOp> {
    let basis = l.block(0, 0).domain().clone();
    let blocks = (0..4)
        .map(|k| {
            let (i, j) = (k / 2, k % 2);
            let mut acc = SparseOp::zero(&basis, &basis);
            for (t, row) in m.iter().enumerate() {
                let (c, b) = if left {
                    (&m[i][t], l.block(t, j))
                } else {
                    (&row[j], l.block(i, t))
                };
                acc = acc.lin_comb(&Rat::one(), b, c)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    LaxOp::new(2, blocks, l.params().to_vec())
}

/// `[[1,0],[-λ,1]] L [[1,0],[λ,1]] = e^{-λ∂} L e^{λ∂}`, tested blockwise.
pub fn sl2_invariance_check(
    u1: &Rat,
    u2: &Rat,
    lambda: &Rat,
    basis: &Arc<GradedBasis>,
    var: &str,
) -> Result<ZeroCheck> {
    let l = sl2_lax(u1, u2, basis, var)?;
    let o = Rat::one();
    let z = Rat::zero();
    let lhs = scalar_mul(&[[o.clone(), z.clone()], [-lambda, o.clone()]], &l, true)?;
    let lhs = scalar_mul(&[[o.clone(), z], [lambda.clone(), o]], &lhs, false)?;
    let shift = |s: &Rat| -> Result<SparseOp> {
        let mut p = Poly::var(basis.nvars(), basis.var_index(var)?);
        p.add_term(crate::polyspace::Monomial::one(basis.nvars()), s);
        flow_op(&[(var.to_string(), p)], basis)
    };
    let rhs = l.right_compose(&shift(lambda)?)?.left_compose(&shift(&-lambda)?)?;
    lhs.sub(&rhs)?.is_zero(basis.height_cap() - 1)
}

/// Which elementary operator a perturbation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sl2Factor {
    R1,
    R2,
}

pub type Sl2Mutation = (Sl2Factor, EigenShift);

fn site_vars(pair: &GradedBasis) -> Result<(String, String)> {
    match pair.vars() {
        [a, b] => Ok((a.name.clone(), b.name.clone())),
        _ => Err(Error::BasisMismatch("sl2 pair basis has two variables".into())),
    }
}

/// `T⁻¹ ∘ D ∘ T` with `T: target -> target + other` and `D` the normalized
/// Gamma ratio in the exponent of `target`.
fn conjugated_ratio(
    pair: &Arc<GradedBasis>,
    target: &str,
    other: &str,
    a: &Rat,
    b: &Rat,
    shift: Option<EigenShift>,
) -> Result<SparseOp> {
    let work = covering_basis(pair, None)?;
    let t = subst_op(&[rule(&work, target, &[(1, target), (1, other)])?], &work)?;
    let t_inv = subst_op(&[rule(&work, target, &[(1, target), (-1, other)])?], &work)?;
    let d = euler_diag(target, a, b, &work, shift)?;
    let op = chain_on(&work, &[t, d, t_inv], |m, t| Error::LaurentLeak(format!("{m} -> {t}")))?;
    transfer(&op, pair)
}

/// `R₁(u1|v1,v2)`: normalized `Γ(z₂₁∂₂ + u1 - v2) / Γ(z₂₁∂₂ + v1 - v2)`.
pub fn sl2_r1(u1: &Rat, v1: &Rat, v2: &Rat, pair: &Arc<GradedBasis>, shift: Option<EigenShift>) -> Result<SparseOp> {
    let (z1, z2) = site_vars(pair)?;
    conjugated_ratio(pair, &z2, &z1, &(u1 - v2), &(v1 - v2), shift)
}

/// `R₂(u1,u2|v2)`: normalized `Γ(z₁₂∂₁ + u1 - v2) / Γ(z₁₂∂₁ + u1 - u2)`.
pub fn sl2_r2(u1: &Rat, u2: &Rat, v2: &Rat, pair: &Arc<GradedBasis>, shift: Option<EigenShift>) -> Result<SparseOp> {
    let (z1, z2) = site_vars(pair)?;
    conjugated_ratio(pair, &z1, &z2, &(u1 - v2), &(u1 - u2), shift)
}

fn pick(m: Option<Sl2Mutation>, f: Sl2Factor) -> Option<EigenShift> {
    m.and_then(|(g, s)| (g == f).then_some(s))
}

/// Order of the two elementary factors in Ř.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhatOrder {
    /// `R₁(u1|v1,u2) ∘ R₂(u1,u2|v2)`
    First,
    /// `R₂(v1,u2|v2) ∘ R₁(u1|v1,v2)`
    Second,
}

/// Ř for sites with parameters `p1` (variable `z1`) and `p2` (`z2`),
/// unnormalized: every factor already fixes `1 ⊗ 1`.
pub fn sl2_rhat(
    p1: &Sl2Params,
    p2: &Sl2Params,
    pair: &Arc<GradedBasis>,
    order: RhatOrder,
    mutation: Option<Sl2Mutation>,
) -> Result<SparseOp> {
    let (u1, u2, v1, v2) = (p1.u1(), p1.u2(), p2.u1(), p2.u2());
    let s1 = pick(mutation, Sl2Factor::R1);
    let s2 = pick(mutation, Sl2Factor::R2);
    match order {
        RhatOrder::First => {
            let r2 = sl2_r2(&u1, &u2, &v2, pair, s2)?;
            let r1 = sl2_r1(&u1, &v1, &u2, pair, s1)?;
            r1.compose(&r2)
        }
        RhatOrder::Second => {
            let r1 = sl2_r1(&u1, &v1, &v2, pair, s1)?;
            let r2 = sl2_r2(&v1, &u2, &v2, pair, s2)?;
            r2.compose(&r1)
        }
    }
}

/// Compare the two factorization orders after lowest-weight normalization.
pub fn sl2_orders_agree(
    p1: &Sl2Params,
    p2: &Sl2Params,
    pair: &Arc<GradedBasis>,
    mutation: Option<Sl2Mutation>,
) -> Result<ZeroCheck> {
    let (a, _) = lwv_normalize(&sl2_rhat(p1, p2, pair, RhatOrder::First, mutation)?)?;
    let (b, _) = lwv_normalize(&sl2_rhat(p1, p2, pair, RhatOrder::Second, mutation)?)?;
    equal_on(&a, &b, pair.height_cap())
}

/// The flip `z1 <-> z2`.
pub fn swap_sites(pair: &Arc<GradedBasis>) -> Result<SparseOp> {
    permute_vars(pair, &[1, 0])
}

/// `R = P₁₂ ∘ Ř` (first order).
pub fn sl2_rmatrix(
    p1: &Sl2Params,
    p2: &Sl2Params,
    pair: &Arc<GradedBasis>,
    mutation: Option<Sl2Mutation>,
) -> Result<SparseOp> {
    swap_sites(pair)?.compose(&sl2_rhat(p1, p2, pair, RhatOrder::First, mutation)?)
}

/// The closed Gamma-ratio product for the R-matrix at spins `ℓ1, ℓ2` and
/// spectral difference `u`, written directly in terms of `ℓ` and `u`:
/// `P₁₂ Γ(z₂₁∂₂+2ℓ1)/Γ(z₂₁∂₂+ℓ1+ℓ2-u) · Γ(z₁₂∂₁+ℓ1+ℓ2+u)/Γ(z₁₂∂₁+2ℓ1)`.
pub fn sl2_rmatrix_closed_form(ell1: &Rat, ell2: &Rat, u: &Rat, pair: &Arc<GradedBasis>) -> Result<SparseOp> {
    let (z1, z2) = site_vars(pair)?;
    let two1 = ell1 * Rat::from_int(2);
    let s = ell1 + ell2;
    let left = conjugated_ratio(pair, &z2, &z1, &two1, &(&s - u), None)?;
    let right = conjugated_ratio(pair, &z1, &z2, &(&s + u), &two1, None)?;
    swap_sites(pair)?.compose(&left.compose(&right)?)
}

/// `[S, S₊] = S₊`, `[S, S₋] = -S₋`, `[S₊, S₋] = 2S`.
pub fn sl2_commutator_checks(g: &Sl2Generators, window: i32) -> Result<Vec<(String, ZeroCheck)>> {
    let two = Rat::from_int(2);
    Ok(vec![
        (
            "[S,S+]".into(),
            equal_on(&g.s.commutator(&g.s_plus)?, &g.s_plus, window)?,
        ),
        (
            "[S,S-]".into(),
            equal_on(&g.s.commutator(&g.s_minus)?, &g.s_minus.neg(), window)?,
        ),
        (
            "[S+,S-]".into(),
            equal_on(&g.s_plus.commutator(&g.s_minus)?, &g.s.scale(&two), window)?,
        ),
    ])
}

/// `L1(u) L2(v)` on the pair basis, `u = (u1, u2)` on the first site.
pub fn sl2_lax_pair_product(us: &[Rat; 2], vs: &[Rat; 2], pair: &Arc<GradedBasis>) -> Result<LaxOp> {
    let (z1, z2) = site_vars(pair)?;
    sl2_lax(&us[0], &us[1], pair, &z1)?.mul(&sl2_lax(&vs[0], &vs[1], pair, &z2)?)
}

/// Parameters after one elementary operator: `R1` swaps `u1 <-> v1`, `R2`
/// swaps `u2 <-> v2`.
pub fn sl2_exchanged(f: Sl2Factor, us: &[Rat; 2], vs: &[Rat; 2]) -> ([Rat; 2], [Rat; 2]) {
    let k = match f {
        Sl2Factor::R1 => 0,
        Sl2Factor::R2 => 1,
    };
    let (mut a, mut b) = (us.clone(), vs.clone());
    std::mem::swap(&mut a[k], &mut b[k]);
    (a, b)
}

/// `R1(u1|v1,v2)` or `R2(u1,u2|v2)` read off the full parameter pairs.
pub fn sl2_elementary(
    f: Sl2Factor,
    us: &[Rat; 2],
    vs: &[Rat; 2],
    pair: &Arc<GradedBasis>,
    shift: Option<EigenShift>,
) -> Result<SparseOp> {
    match f {
        Sl2Factor::R1 => sl2_r1(&us[0], &vs[0], &vs[1], pair, shift),
        Sl2Factor::R2 => sl2_r2(&us[0], &us[1], &vs[1], pair, shift),
    }
}

/// Residual of `R L1(u)L2(v) = L1(u')L2(v') R` for one elementary operator.
pub fn sl2_elementary_residual(
    f: Sl2Factor,
    us: &[Rat; 2],
    vs: &[Rat; 2],
    pair: &Arc<GradedBasis>,
    shift: Option<EigenShift>,
) -> Result<ZeroCheck> {
    let r = sl2_elementary(f, us, vs, pair, shift)?;
    let (a, b) = sl2_exchanged(f, us, vs);
    let lhs = sl2_lax_pair_product(us, vs, pair)?.left_compose(&r)?;
    let rhs = sl2_lax_pair_product(&a, &b, pair)?.right_compose(&r)?;
    lhs.sub(&rhs)?.is_zero(pair.height_cap() - 2)
}

/// Residual of `Ř L1(u)L2(v) = L1(v)L2(u) Ř`.
pub fn sl2_rhat_residual(
    p1: &Sl2Params,
    p2: &Sl2Params,
    pair: &Arc<GradedBasis>,
    order: RhatOrder,
    mutation: Option<Sl2Mutation>,
) -> Result<ZeroCheck> {
    let rh = sl2_rhat(p1, p2, pair, order, mutation)?;
    let us = [p1.u1(), p1.u2()];
    let vs = [p2.u1(), p2.u2()];
    let lhs = sl2_lax_pair_product(&us, &vs, pair)?.left_compose(&rh)?;
    let rhs = sl2_lax_pair_product(&vs, &us, pair)?.right_compose(&rh)?;
    lhs.sub(&rhs)?.is_zero(pair.height_cap() - 2)
}

/// Spectral eigenvalues of `R = P₁₂ Ř` on the lowest-weight vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralReport {
    /// `ρ_n` for `n = 0..=nmax+1`, normalized by `ρ_0 = 1`.
    pub rhos: Vec<Rat>,
    /// First `n` where `ρ_{n+1}/ρ_n` differs from the recurrence.
    pub mismatch: Option<(usize, Rat, Rat)>,
}

/// `-(u+ℓ1+ℓ2+n) / (-u+ℓ1+ℓ2+n)`.
pub fn spectral_ratio(ell1: &Rat, ell2: &Rat, u: &Rat, n: usize) -> Result<Rat> {
    let s = ell1 + ell2 + Rat::from_int(n as i64);
    (-(u + &s)).checked_div(&(&s - u))
}

/// Lowest-weight vector of total degree `n`: kernel of the total `S₋`.
pub fn lowest_weight_vector(pair: &Arc<GradedBasis>, n: usize) -> Result<SparseVec> {
    let (z1, z2) = site_vars(pair)?;
    let lower = DiffExpr::new().d(-1, "1", &z1).d(-1, "1", &z2).tabulate(pair, -1)?;
    let cols: Vec<usize> = (0..pair.len())
        .filter(|&j| pair.monomial(j).degree() == n as i32)
        .collect();
    let mut rows: std::collections::BTreeMap<u32, Vec<(usize, Rat)>> = Default::default();
    for (local, &j) in cols.iter().enumerate() {
        let col = lower.column(j).ok_or_else(|| Error::Uncertified {
            monomial: pair.show_index(j),
        })?;
        for (i, c) in col {
            rows.entry(*i).or_default().push((local, c.clone()));
        }
    }
    let rows: Vec<_> = rows.into_values().collect();
    let ns = sparse_nullspace(cols.len(), &rows);
    if ns.len() != 1 {
        return Err(Error::DegenerateDecomposition {
            level: n,
            dim: ns.len(),
        });
    }
    let mut v: SparseVec = ns[0].iter().map(|(l, c)| (cols[*l] as u32, c.clone())).collect();
    v.sort_by_key(|(i, _)| *i);
    Ok(v)
}

/// Eigenvalue of `op` on `v`, or an error naming the offending component.
pub fn eigenvalue_on(op: &SparseOp, v: &SparseVec) -> Result<Rat> {
    let w = op.apply(v).ok_or_else(|| Error::Uncertified {
        monomial: op.domain().show_index(v[0].0 as usize),
    })?;
    let (i0, c0) = &v[0];
    let lambda = w
        .iter()
        .find(|(i, _)| i == i0)
        .map(|(_, c)| c.checked_div(c0))
        .transpose()?
        .unwrap_or_else(Rat::zero);
    let scaled: SparseVec = v.iter().map(|(i, c)| (*i, c * &lambda)).collect();
    if let Some(i) = crate::linop::vec_difference(&w, &scaled) {
        return Err(Error::NotLowestWeightStable(op.domain().show_index(i as usize)));
    }
    Ok(lambda)
}

/// Build `R = P₁₂ Ř` at spins `ℓ1, ℓ2`, spectral difference `u`, and test
/// the recurrence `ρ_{n+1}/ρ_n = -(u+ℓ1+ℓ2+n)/(-u+ℓ1+ℓ2+n)` for `n <= nmax`.
pub fn sl2_spectral_check(
    ell1: &Rat,
    ell2: &Rat,
    u: &Rat,
    nmax: usize,
    pair: &Arc<GradedBasis>,
) -> Result<SpectralReport> {
    let p1 = Sl2Params::new(ell1.clone(), u.clone());
    let p2 = Sl2Params::new(ell2.clone(), Rat::zero());
    let r = sl2_rmatrix(&p1, &p2, pair, None)?;
    let mut rhos = Vec::new();
    for n in 0..=nmax + 1 {
        rhos.push(eigenvalue_on(&r, &lowest_weight_vector(pair, n)?)?);
    }
    let r0 = rhos[0].clone();
    let rhos: Vec<Rat> = rhos.iter().map(|x| x.checked_div(&r0)).collect::<Result<_>>()?;
    let mut mismatch = None;
    for n in 0..=nmax {
        let got = rhos[n + 1].checked_div(&rhos[n])?;
        let want = spectral_ratio(ell1, ell2, u, n)?;
        if got != want {
            mismatch = Some((n, got, want));
            break;
        }
    }
    Ok(SpectralReport { rhos, mismatch })
}

/// Closed form of `ρ_n` from the recurrence: `(-1)^n (u+s)_n / (-u+s)_n`.
pub fn spectral_closed_form(ell1: &Rat, ell2: &Rat, u: &Rat, n: u32) -> Result<Rat> {
    let s = ell1 + ell2;
    let sign = if n.is_multiple_of(2) {
        Rat::one()
    } else {
        Rat::from_int(-1)
    };
    Ok(sign * pochhammer_ratio(&(u + &s), &(&s - u), n)?)
}

/// Yang's R-matrix `u·Id + P` on `C^d ⊗ C^d`.
pub fn yang_r(u: &Rat, d: usize) -> DenseMatrix {
    DenseMatrix::identity(d * d)
        .scale(u)
        .add(&permutation(d))
        .expect("same shape")
}

/// `R₁₂(u-v) R₁₃(u) R₂₃(v) - R₂₃(v) R₁₃(u) R₁₂(u-v)` on `(C^d)^{⊗3}`.
pub fn yang_ybe_residual(u: &Rat, v: &Rat, d: usize) -> Result<DenseMatrix> {
    let r12 = embed_pair(&yang_r(&(u - v), d), d, (1, 2))?;
    let r13 = embed_pair(&yang_r(u, d), d, (1, 3))?;
    let r23 = embed_pair(&yang_r(v, d), d, (2, 3))?;
    let lhs = r12.mul(&r13)?.mul(&r23)?;
    let rhs = r23.mul(&r13)?.mul(&r12)?;
    lhs.sub(&rhs)
}

/// Yang-Baxter equation for the factorized R-matrices on three sl(2) sites
/// with spins `ells` and per-site caps `caps`.
pub fn sl2_ybe_check(ells: [&Rat; 3], u: &Rat, v: &Rat, caps: [u32; 3]) -> Result<ZeroCheck> {
    let names = ["z1", "z2", "z3"];
    let sites: Vec<Arc<GradedBasis>> = (0..3).map(|i| site_basis(names[i], caps[i])).collect::<Result<_>>()?;
    let front = tensor_basis(&sites[0], &sites[1])?;
    let triple = tensor_basis(&front, &sites[2])?;
    let r = |i: usize, j: usize, w: &Rat| -> Result<SparseOp> {
        let pair = tensor_basis(&sites[i], &sites[j])?;
        let p1 = Sl2Params::new(ells[i].clone(), w.clone());
        let p2 = Sl2Params::new(ells[j].clone(), Rat::zero());
        site_embed(&sl2_rmatrix(&p1, &p2, &pair, None)?, &triple)
    };
    let r12 = r(0, 1, &(u - v))?;
    let r13 = r(0, 2, u)?;
    let r23 = r(1, 2, v)?;
    let lhs = r12.compose(&r13)?.compose(&r23)?;
    let rhs = r23.compose(&r13)?.compose(&r12)?;
    let window = *caps.iter().min().expect("three caps") as i32;
    is_zero(&lhs.sub(&rhs)?, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn at(basis: &GradedBasis, m: &str) -> usize {
        basis
            .index(&crate::polyspace::parse_monomial(m, basis.vars()).unwrap())
            .unwrap()
    }

    #[test]
    fn generator_actions() {
        let b = site_basis("z", 6).unwrap();
        let g = sl2_generators(&r("1/2"), &b, "z").unwrap();
        assert_eq!(g.s.entry(2, 2), Some(r("5/2")));
        let g1 = sl2_generators(&r("1"), &b, "z").unwrap();
        let one: SparseVec = vec![(0, Rat::one())];
        let twice = g1.s_plus.apply(&g1.s_plus.apply(&one).unwrap()).unwrap();
        assert_eq!(twice, vec![(2, r("6"))]);
        assert!(g.s_minus.apply(&one).unwrap().is_empty());
    }

    #[test]
    fn casimir_values() {
        let b = site_basis("z", 6).unwrap();
        for (ell, c) in [("2", "2"), ("1/2", "-1/4")] {
            let g = sl2_generators(&r(ell), &b, "z").unwrap();
            let c2 = sl2_casimir(&g).unwrap();
            let expect = SparseOp::scalar(&b, &r(c));
            assert!(equal_on(&c2, &expect, 5).unwrap().is_zero());
        }
    }

    #[test]
    fn lax_entries_and_factorization() {
        let b = site_basis("z", 6).unwrap();
        let (u1, u2) = (r("11/15"), r("1/15"));
        let l = sl2_lax(&u1, &u2, &b, "z").unwrap();
        assert_eq!(l.block(0, 0).entry(0, 0), Some(u1.clone()));
        let f = sl2_lax_factored(&u1, &u2, &b, "z").unwrap();
        assert!(l.sub(&f).unwrap().is_zero(5).unwrap().is_zero());
        assert!(sl2_invariance_check(&u1, &u2, &r("3/7"), &b, "z").unwrap().is_zero());
    }

    #[test]
    fn elementary_operators_on_low_vectors() {
        let pair = pair_basis(4).unwrap();
        let (u1, v1, v2) = (r("2/3"), r("1/5"), r("-3/7"));
        let r1 = sl2_r1(&u1, &v1, &v2, &pair, None).unwrap();
        let one = at(&pair, "1");
        assert_eq!(r1.column(one).unwrap(), &vec![(one as u32, Rat::one())]);
        // (z2 - z1) is scaled by (u1-v2)/(v1-v2)
        let v: SparseVec = {
            let mut v = vec![(at(&pair, "z2") as u32, r("1")), (at(&pair, "z1") as u32, r("-1"))];
            v.sort_by_key(|(i, _)| *i);
            v
        };
        let lam = eigenvalue_on(&r1, &v).unwrap();
        assert_eq!(lam, (&u1 - &v2).checked_div(&(&v1 - &v2)).unwrap());
        let u2 = r("5/9");
        let r2 = sl2_r2(&u1, &u2, &v2, &pair, None).unwrap();
        let w: SparseVec = v.iter().map(|(i, c)| (*i, -c)).collect();
        assert_eq!(
            eigenvalue_on(&r2, &w).unwrap(),
            (&u1 - &v2).checked_div(&(&u1 - &u2)).unwrap()
        );
    }

    #[test]
    fn orders_agree_and_spectrum() {
        let pair = pair_basis(8).unwrap();
        let p1 = Sl2Params::new(r("1/3"), r("1/5"));
        let p2 = Sl2Params::new(r("2/7"), r("0"));
        assert!(sl2_orders_agree(&p1, &p2, &pair, None).unwrap().is_zero());
        let rep = sl2_spectral_check(&r("1"), &r("1"), &r("1/2"), 6, &pair).unwrap();
        assert_eq!(rep.mismatch, None);
        assert_eq!(rep.rhos[1], r("-5/3"));
        for n in 0..=7 {
            assert_eq!(
                rep.rhos[n],
                spectral_closed_form(&r("1"), &r("1"), &r("1/2"), n as u32).unwrap()
            );
        }
    }

    #[test]
    fn yang_baxter_fundamental() {
        let r0 = yang_r(&Rat::zero(), 2);
        assert_eq!(r0, permutation(2));
        for d in [2, 3] {
            assert!(yang_ybe_residual(&r("2/3"), &r("-5/4"), d).unwrap().is_zero());
        }
    }

    #[test]
    fn elementary_relations_and_brackets() {
        let pair = pair_basis(6).unwrap();
        let us = [r("2/3"), r("-1/5")];
        let vs = [r("3/7"), r("5/2")];
        for f in [Sl2Factor::R1, Sl2Factor::R2] {
            let z = sl2_elementary_residual(f, &us, &vs, &pair, None).unwrap();
            assert!(z.is_zero(), "{f:?}: {:?}", z.witness);
            let bad = sl2_elementary_residual(f, &us, &vs, &pair, Some(EigenShift { exponent: 1 })).unwrap();
            assert!(!bad.is_zero());
        }
        let (p1, p2) = (Sl2Params::from_u12(&us[0], &us[1]), Sl2Params::from_u12(&vs[0], &vs[1]));
        for order in [RhatOrder::First, RhatOrder::Second] {
            assert!(sl2_rhat_residual(&p1, &p2, &pair, order, None).unwrap().is_zero());
        }
        let b = site_basis("z", 5).unwrap();
        let g = sl2_generators(&r("2/9"), &b, "z").unwrap();
        for (name, z) in sl2_commutator_checks(&g, 3).unwrap() {
            assert!(z.is_zero(), "{name}");
        }
    }
}
