//! Check catalogs, seeded parameter sampling and the suite runner.
//!
//! Every check draws its own parameter points from a ChaCha8 stream keyed
//! by the check's position in its catalog, so adding or filtering checks
//! never changes the points another check sees. Results are sorted by name
//! and parameters before serialization.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Rat;
use crate::linop::{equal_on, EigenShift, SparseOp, Witness, ZeroCheck};
use crate::sl2core::{self, RhatOrder, Sl2Factor, Sl2Mutation, Sl2Params};
use crate::sl3core::{self, Sl3Factor, Sl3Mutation, Sl3Op, Sl3Params};
use crate::verify::oracle::{self, Constraint};
use crate::verify::{degeneracy_guard, lwv_normalize, spectral_guard, CheckResult, Status};

/// Largest numerator magnitude and denominator of sampled rationals.
pub const POOL_NUMERATOR: i64 = 40;
pub const POOL_DENOMINATOR: i64 = 12;
const MAX_DRAWS: usize = 1000;
/// Highest lowest-weight level compared in the spectral check.
pub const SPECTRAL_LEVELS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sl2,
    Sl3,
    Oracle,
    Ybe,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Sl2, Suite::Sl3, Suite::Oracle, Suite::Ybe];

    pub fn default_cap(self) -> u32 {
        match self {
            Suite::Sl2 => 8,
            Suite::Sl3 => 3,
            Suite::Oracle => 4,
            Suite::Ybe => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sl2 => "sl2",
            Suite::Sl3 => "sl3",
            Suite::Oracle => "oracle",
            Suite::Ybe => "ybe",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// A single perturbed eigenvalue of one diagonal factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Sl2(Sl2Mutation),
    Sl3(Sl3Mutation),
}

impl Mutation {
    fn sl2(self) -> Option<Sl2Mutation> {
        match self {
            Mutation::Sl2(m) => Some(m),
            Mutation::Sl3(_) => None,
        }
    }

    fn sl3(self) -> Option<Sl3Mutation> {
        match self {
            Mutation::Sl3(m) => Some(m),
            Mutation::Sl2(_) => None,
        }
    }
}

/// `r1:K`, `r2:K` (sl2) or `r1:a:K` ... `r3:c:K` (sl3), `K` the exponent.
impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad mutation {s:?}, expected r1:K or r3:b:K"));
        let parts: Vec<&str> = s.split(':').collect();
        let exponent: i64 = parts.last().and_then(|k| k.parse().ok()).ok_or_else(bad)?;
        let shift = EigenShift { exponent };
        match parts.as_slice() {
            [op, _] => {
                let f = match *op {
                    "r1" => Sl2Factor::R1,
                    "r2" => Sl2Factor::R2,
                    _ => return Err(bad()),
                };
                Ok(Mutation::Sl2((f, shift)))
            }
            [op, factor, _] => {
                let op = match *op {
                    "r1" => Sl3Op::R1,
                    "r2" => Sl3Op::R2,
                    "r3" => Sl3Op::R3,
                    _ => return Err(bad()),
                };
                let factor = match *factor {
                    "a" => Sl3Factor::A,
                    "b" => Sl3Factor::B,
                    "c" => Sl3Factor::C,
                    _ => return Err(bad()),
                };
                Ok(Mutation::Sl3((op, factor, shift)))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::Sl2((op, s)) => write!(f, "{}:{}", format!("{op:?}").to_lowercase(), s.exponent),
            Mutation::Sl3((op, fac, s)) => write!(
                f,
                "{}:{}:{}",
                format!("{op:?}").to_lowercase(),
                format!("{fac:?}").to_lowercase(),
                s.exponent
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: Suite,
    /// Check names; empty selects the default catalog.
    pub checks: Vec<String>,
    pub cap: u32,
    pub trials: usize,
    pub seed: u64,
    /// Explicit parameter point; bypasses sampling but not the guards.
    pub params: Option<Vec<Rat>>,
    pub mutation: Option<Mutation>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        SuiteConfig {
            suite,
            checks: Vec::new(),
            cap: suite.default_cap(),
            trials: 20,
            seed: 0,
            params: None,
            mutation: None,
            jobs: None,
        }
    }
}

/// A sampled point turned down by a guard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub check: String,
    pub params: Vec<Rat>,
    pub reason: String,
}

/// Parameter points drawn for one check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSample {
    pub seed: u64,
    pub draws: Vec<Vec<Rat>>,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub cap: u32,
    pub checks: Vec<CheckResult>,
    #[serde(default)]
    pub rejections: Vec<Rejection>,
    pub all_passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Concatenate reports of several suites.
    pub fn merge(name: &str, seed: u64, parts: Vec<Report>) -> Report {
        let cap = parts.iter().map(|r| r.cap).max().unwrap_or(0);
        let mut checks = Vec::new();
        let mut rejections = Vec::new();
        for p in parts {
            checks.extend(p.checks);
            rejections.extend(p.rejections);
        }
        sort_results(&mut checks);
        let all_passed = checks.iter().all(CheckResult::passed);
        Report {
            suite: name.into(),
            seed,
            cap,
            checks,
            rejections,
            all_passed,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

fn params_key(p: &[Rat]) -> String {
    p.iter().map(Rat::to_string).collect::<Vec<_>>().join(",")
}

fn sort_results(v: &mut [CheckResult]) {
    v.sort_by(|a, b| (&a.name, params_key(&a.params)).cmp(&(&b.name, params_key(&b.params))));
}

struct Ctx {
    cap: u32,
    mutation: Option<Mutation>,
}

type Guard = fn(&[Rat], &Ctx) -> std::result::Result<(), String>;
type Run = fn(&[Rat], &Ctx, &mut CheckResult) -> Result<()>;

struct CheckDef {
    name: &'static str,
    arity: usize,
    default: bool,
    guard: Guard,
    run: Run,
}

/// Names of the checks in a suite, defaults first flagged.
pub fn catalog_names(suite: Suite) -> Vec<(&'static str, bool)> {
    catalog(suite).iter().map(|c| (c.name, c.default)).collect()
}

fn no_guard(_: &[Rat], _: &Ctx) -> std::result::Result<(), String> {
    Ok(())
}

fn zero_into(res: &mut CheckResult, z: &ZeroCheck) {
    if let Some(w) = &z.witness {
        res.status = Status::Fail;
        res.witness = Some(w.clone());
    }
}

/// Record the first failing named sub-check.
fn named_into(res: &mut CheckResult, checks: &[(String, ZeroCheck)]) {
    if let Some((name, z)) = checks.iter().find(|(_, z)| !z.is_zero()) {
        let w = z.witness.clone().expect("nonzero");
        res.status = Status::Fail;
        res.witness = Some(Witness {
            monomial: format!("{name} {}", w.monomial),
            image: w.image,
        });
    }
}

fn mismatch_into(res: &mut CheckResult, at: String, image: String) {
    res.status = Status::Fail;
    res.witness = Some(Witness { monomial: at, image });
}

// ---- sl2 ----

fn sl2_points(p: &[Rat]) -> (Sl2Params, Sl2Params, [Rat; 2], [Rat; 2]) {
    let p1 = Sl2Params::new(p[0].clone(), p[2].clone());
    let p2 = Sl2Params::new(p[1].clone(), p[3].clone());
    let us = [p1.u1(), p1.u2()];
    let vs = [p2.u1(), p2.u2()];
    (p1, p2, us, vs)
}

/// Numerator/denominator pairs of the elementary factors of one ordering.
fn sl2_order_pairs(us: &[Rat; 2], vs: &[Rat; 2], order: RhatOrder) -> Vec<(Rat, Rat)> {
    let [u1, u2] = us;
    let [v1, v2] = vs;
    match order {
        // R1(u1|v1,u2), R2(u1,u2|v2)
        RhatOrder::First => vec![(u1 - u2, v1 - u2), (u1 - v2, u1 - u2)],
        // R1(u1|v1,v2), R2(v1,u2|v2)
        RhatOrder::Second => vec![(u1 - v2, v1 - v2), (v1 - v2, v1 - u2)],
    }
}

/// Pairs of both orderings; `R1(u1|v1,v2)` and `R2(u1,u2|v2)` are also the
/// elementary operators of the single-factor checks.
fn sl2_pairs(us: &[Rat; 2], vs: &[Rat; 2]) -> Vec<(Rat, Rat)> {
    let mut out = sl2_order_pairs(us, vs, RhatOrder::First);
    out.extend(sl2_order_pairs(us, vs, RhatOrder::Second));
    out
}

fn sl2_guard(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    let (_, _, us, vs) = sl2_points(p);
    degeneracy_guard(&sl2_pairs(&us, &vs), 2 * ctx.cap)
}

fn sl2_spectral_guard(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    let (ell1, ell2, u) = (&p[0], &p[1], &p[2]);
    spectral_guard(ell1, ell2, u, SPECTRAL_LEVELS)?;
    let two1 = ell1 * Rat::from_int(2);
    let s = ell1 + ell2;
    degeneracy_guard(&[(two1.clone(), &s - u), (&s + u, two1)], 2 * ctx.cap)?;
    let ext = [p[0].clone(), p[1].clone(), p[2].clone(), Rat::zero()];
    sl2_guard(&ext, ctx)
}

fn sl2_commutators(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let b = sl2core::site_basis("z", ctx.cap)?;
    res.window = ctx.cap as i32 - 1;
    let g = sl2core::sl2_generators(&p[0], &b, "z")?;
    named_into(res, &sl2core::sl2_commutator_checks(&g, res.window)?);
    Ok(())
}

fn sl2_casimir(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let b = sl2core::site_basis("z", ctx.cap)?;
    res.window = ctx.cap as i32 - 1;
    let c = sl2core::sl2_casimir(&sl2core::sl2_generators(&p[0], &b, "z")?)?;
    let want = &p[0] * &(&p[0] - Rat::one());
    zero_into(res, &equal_on(&c, &SparseOp::scalar(&b, &want), res.window)?);
    res.normalization_scalar = Some(want);
    Ok(())
}

fn sl2_lax_factor(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let b = sl2core::site_basis("z", ctx.cap)?;
    res.window = ctx.cap as i32 - 1;
    let q = Sl2Params::new(p[0].clone(), p[1].clone());
    let l = sl2core::sl2_lax(&q.u1(), &q.u2(), &b, "z")?;
    let f = sl2core::sl2_lax_factored(&q.u1(), &q.u2(), &b, "z")?;
    zero_into(res, &l.sub(&f)?.is_zero(res.window)?);
    Ok(())
}

fn sl2_lax_invariance(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let b = sl2core::site_basis("z", ctx.cap)?;
    res.window = ctx.cap as i32 - 1;
    let q = Sl2Params::new(p[0].clone(), p[1].clone());
    zero_into(res, &sl2core::sl2_invariance_check(&q.u1(), &q.u2(), &p[2], &b, "z")?);
    Ok(())
}

fn sl2_global_lowering(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let b = sl2core::site_basis("z", ctx.cap)?;
    res.window = ctx.cap as i32;
    zero_into(res, &sl2core::global_lowering_check(&p[0], &p[1], &b, "z")?);
    Ok(())
}

/// `exp(λS₊)·1 = (1 - λz)^n` on the spins `ℓ = -n/2`, `n = 0..=6`.
fn sl2_global_raising(p: &[Rat], _: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = 0;
    for n in 0..=6 {
        if let Some((k, got, want)) = sl2core::global_raising_check(&Rat::new(-n, 2), &p[0])? {
            mismatch_into(res, format!("n={n} z^{k}"), format!("series {got}, binomial {want}"));
            break;
        }
    }
    Ok(())
}

fn sl2_elementary(f: Sl2Factor, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl2core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 2;
    let (_, _, us, vs) = sl2_points(p);
    let shift = ctx
        .mutation
        .and_then(Mutation::sl2)
        .and_then(|(g, s)| (g == f).then_some(s));
    zero_into(res, &sl2core::sl2_elementary_residual(f, &us, &vs, &pair, shift)?);
    Ok(())
}

fn sl2_f1(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl2_elementary(Sl2Factor::R1, p, ctx, res)
}

fn sl2_f2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl2_elementary(Sl2Factor::R2, p, ctx, res)
}

fn sl2_orders(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl2core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32;
    let (p1, p2, _, _) = sl2_points(p);
    let m = ctx.mutation.and_then(Mutation::sl2);
    zero_into(res, &sl2core::sl2_orders_agree(&p1, &p2, &pair, m)?);
    let (_, c) = lwv_normalize(&sl2core::sl2_rhat(&p1, &p2, &pair, RhatOrder::First, m)?)?;
    res.normalization_scalar = Some(c);
    Ok(())
}

fn sl2_rll(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl2core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 2;
    let (p1, p2, _, _) = sl2_points(p);
    let m = ctx.mutation.and_then(Mutation::sl2);
    let checks = [RhatOrder::First, RhatOrder::Second]
        .into_iter()
        .map(|o| Ok((format!("{o:?}"), sl2core::sl2_rhat_residual(&p1, &p2, &pair, o, m)?)))
        .collect::<Result<Vec<_>>>()?;
    named_into(res, &checks);
    Ok(())
}

/// Closed form against every relation of its first-order system.
fn constraint_checks(x: &SparseOp, cons: &[Constraint], window: i32) -> Result<Vec<(String, ZeroCheck)>> {
    cons.iter()
        .map(|c| Ok((c.name.clone(), equal_on(&x.compose(&c.a)?, &c.b.compose(x)?, window)?)))
        .collect()
}

fn sl2_side(f: Sl2Factor, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl2core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 1;
    let (_, _, us, vs) = sl2_points(p);
    let shift = ctx
        .mutation
        .and_then(Mutation::sl2)
        .and_then(|(g, s)| (g == f).then_some(s));
    let x = sl2core::sl2_elementary(f, &us, &vs, &pair, shift)?;
    let cons = oracle::sl2_first_order_constraints(f, &us, &vs, &pair)?;
    named_into(res, &constraint_checks(&x, &cons, res.window)?);
    Ok(())
}

fn sl2_side_r1(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl2_side(Sl2Factor::R1, p, ctx, res)
}

fn sl2_side_r2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl2_side(Sl2Factor::R2, p, ctx, res)
}

fn sl2_spectral(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl2core::pair_basis(ctx.cap.max(SPECTRAL_LEVELS + 1))?;
    res.window = SPECTRAL_LEVELS as i32 + 1;
    let rep = sl2core::sl2_spectral_check(&p[0], &p[1], &p[2], SPECTRAL_LEVELS as usize, &pair)?;
    if let Some((n, got, want)) = rep.mismatch {
        mismatch_into(res, format!("n={n}"), format!("ratio {got}, recurrence {want}"));
    }
    res.normalization_scalar = rep.rhos.get(1).cloned();
    Ok(())
}

fn ybe_fundamental(p: &[Rat], _: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = 0;
    for d in [2, 3] {
        let m = sl2core::yang_ybe_residual(&p[0], &p[1], d)?;
        if let Some((i, j, c)) = m.first_nonzero() {
            mismatch_into(res, format!("d={d} ({i},{j})"), c.to_string());
            break;
        }
    }
    Ok(())
}

// ---- sl3 ----

/// Pair checks take `(m1, n1, u, m2, n2, v)`.
fn sl3_points(p: &[Rat]) -> (Sl3Params, Sl3Params) {
    (
        Sl3Params::new(p[0].clone(), p[1].clone(), p[2].clone()),
        Sl3Params::new(p[3].clone(), p[4].clone(), p[5].clone()),
    )
}

/// Which elementary operators a check builds.
#[derive(Clone, Copy)]
enum Built {
    One(Sl3Op),
    Orders(&'static [RhatOrder]),
}

fn sl3_pairs(p1: &Sl3Params, p2: &Sl3Params, built: Built, top: u32) -> Vec<(Rat, Rat)> {
    let (us, vs) = (p1.us(), p2.us());
    let ops: Vec<(Sl3Op, [Rat; 4])> = match built {
        Built::One(op) => vec![(op, sl3core::elementary_args(op, &us, &vs))],
        Built::Orders(orders) => orders.iter().flat_map(|o| sl3core::rhat_factors(p1, p2, *o)).collect(),
    };
    let w = Rat::from_int(top as i64);
    let mut out = Vec::new();
    for (op, args) in ops {
        for (_, a, b, laurent) in sl3core::factor_pairs(op, &args) {
            if laurent {
                // negative exponents divide by (a-1)...(a-|k|)
                out.push((b.clone(), &a - &w));
            }
            out.push((a, b));
        }
    }
    out
}

fn sl3_guard_with(p: &[Rat], built: Built, top: u32) -> std::result::Result<(), String> {
    let (p1, p2) = sl3_points(p);
    degeneracy_guard(&sl3_pairs(&p1, &p2, built, top), top)
}

const BOTH: &[RhatOrder] = &[RhatOrder::First, RhatOrder::Second];

fn guard_r1(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R1), 2 * ctx.cap)
}

fn guard_r2(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R2), 2 * ctx.cap)
}

fn guard_r3(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R3), 2 * ctx.cap)
}

fn guard_orders(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::Orders(BOTH), 2 * ctx.cap)
}

fn guard_rmatrix(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::Orders(&[RhatOrder::First]), 2 * ctx.cap)
}

/// Structure checks run on a single site one step above the pair cap.
fn structure_cap(ctx: &Ctx) -> u32 {
    ctx.cap + 1
}

fn sl3_commutators(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let cap = structure_cap(ctx);
    let b = sl3core::site_basis("", cap)?;
    res.cap = cap;
    res.window = cap as i32 - 3;
    let g = sl3core::sl3_generators(&p[0], &p[1], &b, "")?;
    named_into(res, &sl3core::commutator_checks(&g, res.window)?);
    Ok(())
}

fn sl3_casimir(which: usize, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let cap = structure_cap(ctx);
    res.cap = cap;
    res.window = cap as i32 - 2;
    let mut scalars = Vec::new();
    for c in [cap, cap + 1] {
        let b = sl3core::site_basis("", c)?;
        let g = sl3core::sl3_generators(&p[0], &p[1], &b, "")?;
        let (c2, c3) = sl3core::sl3_casimirs(&g)?;
        let op = if which == 2 { c2 } else { c3 };
        match sl3core::scalar_on_window(&op, c as i32 - 2)? {
            Some(s) => scalars.push(s),
            None => {
                let one = op.entry(0, 0).unwrap_or_else(Rat::zero);
                let z = equal_on(&op, &SparseOp::scalar(&b, &one), c as i32 - 2)?;
                zero_into(res, &z);
                return Ok(());
            }
        }
    }
    if scalars[0] != scalars[1] {
        mismatch_into(
            res,
            format!("cap {} vs {}", cap, cap + 1),
            format!("{} vs {}", scalars[0], scalars[1]),
        );
    }
    res.normalization_scalar = Some(scalars[0].clone());
    Ok(())
}

fn sl3_c2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_casimir(2, p, ctx, res)
}

fn sl3_c3(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_casimir(3, p, ctx, res)
}

/// `(M, N)` weights probed by the finite-dimensional checks.
pub const FINDIM_WEIGHTS: [(u32, u32); 6] = [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1)];

fn sl3_findim(_: &[Rat], _: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = 0;
    for (m, n) in FINDIM_WEIGHTS {
        let rep = sl3core::sl3_findim_check(m, n)?;
        if rep.dim != rep.expected || !rep.invariant || rep.reduced_variables == Some(false) {
            mismatch_into(res, format!("(M,N)=({m},{n})"), format!("{rep:?}"));
            break;
        }
    }
    Ok(())
}

fn sl3_generating(p: &[Rat], _: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = 0;
    for (m, n) in FINDIM_WEIGHTS {
        if let Some(at) = sl3core::generating_function_check(m, n, &p[0], &p[1], &p[2])? {
            mismatch_into(res, format!("(M,N)=({m},{n})"), at);
            break;
        }
    }
    Ok(())
}

fn sl3_fundamental(_: &[Rat], _: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = 0;
    for which in [sl3core::Fundamental::First, sl3core::Fundamental::Second] {
        if let Some(at) = sl3core::fundamental_closure(which) {
            mismatch_into(res, format!("{which:?}"), at);
            break;
        }
    }
    Ok(())
}

fn sl3_lax_factor(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let cap = structure_cap(ctx);
    let b = sl3core::site_basis("", cap)?;
    res.cap = cap;
    res.window = cap as i32 - 2;
    let q = Sl3Params::new(p[0].clone(), p[1].clone(), p[2].clone());
    let l = sl3core::sl3_lax(&q.us(), &b, "")?;
    let f = sl3core::sl3_lax_factored(&q.us(), &b, "")?;
    let (offset, z) = sl3core::lax_casimir_offset(&q, &b, "")?;
    named_into(
        res,
        &[
            ("factored".to_string(), l.sub(&f)?.is_zero(res.window)?),
            ("casimir-form".to_string(), z),
        ],
    );
    if res.status == Status::Pass && !offset.is_zero() {
        mismatch_into(res, "casimir-form offset".into(), offset.to_string());
    }
    res.normalization_scalar = Some(offset);
    Ok(())
}

fn sl3_invariance(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let cap = structure_cap(ctx);
    let b = sl3core::site_basis("", cap)?;
    res.cap = cap;
    res.window = cap as i32 - 2;
    let q = Sl3Params::new(p[0].clone(), p[1].clone(), p[2].clone());
    zero_into(res, &sl3core::sl3_invariance_check(&q.us(), [&p[3], &p[4], &p[5]], &b)?);
    Ok(())
}

fn sl3_global_lowering(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let cap = structure_cap(ctx);
    let b = sl3core::site_basis("", cap)?;
    res.cap = cap;
    res.window = cap as i32;
    named_into(res, &sl3core::sl3_global_checks(&p[0], &p[1], &p[2], &b)?);
    Ok(())
}

fn sl3_elementary(op: Sl3Op, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl3core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 2;
    let (p1, p2) = sl3_points(p);
    let m = ctx.mutation.and_then(Mutation::sl3);
    zero_into(res, &sl3core::elementary_residual(op, &p1.us(), &p2.us(), &pair, m)?);
    Ok(())
}

fn sl3_3f1(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_elementary(Sl3Op::R1, p, ctx, res)
}

fn sl3_3f2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_elementary(Sl3Op::R2, p, ctx, res)
}

fn sl3_3f3(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_elementary(Sl3Op::R3, p, ctx, res)
}

fn sl3_orders(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl3core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32;
    let (p1, p2) = sl3_points(p);
    let m = ctx.mutation.and_then(Mutation::sl3);
    zero_into(res, &sl3core::sl3_orders_agree(&p1, &p2, &pair, m)?);
    Ok(())
}

fn sl3_def3(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl3core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 2;
    let (p1, p2) = sl3_points(p);
    let m = ctx.mutation.and_then(Mutation::sl3);
    zero_into(res, &sl3core::rmatrix_residual(&p1, &p2, &pair, m)?);
    Ok(())
}

fn sl3_rll(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl3core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 2;
    let (p1, p2) = sl3_points(p);
    let m = ctx.mutation.and_then(Mutation::sl3);
    let checks = [RhatOrder::First, RhatOrder::Second]
        .into_iter()
        .map(|o| Ok((format!("{o:?}"), sl3core::rhat_residual(&p1, &p2, &pair, o, m)?)))
        .collect::<Result<Vec<_>>>()?;
    named_into(res, &checks);
    Ok(())
}

fn sl3_side(op: Sl3Op, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl3core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32 - 2;
    let (p1, p2) = sl3_points(p);
    let (us, vs) = (p1.us(), p2.us());
    let m = ctx.mutation.and_then(Mutation::sl3);
    let x = sl3core::sl3_rop(op, &sl3core::elementary_args(op, &us, &vs), &pair, m)?;
    let cons = oracle::sl3_first_order_constraints(op, &us, &vs, &pair)?;
    named_into(res, &constraint_checks(&x, &cons, res.window)?);
    Ok(())
}

fn sl3_side_r1(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_side(Sl3Op::R1, p, ctx, res)
}

fn sl3_side_r2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_side(Sl3Op::R2, p, ctx, res)
}

fn sl3_side_r3(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_side(Sl3Op::R3, p, ctx, res)
}

/// Builds every elementary operator used by the suite; any negative power
/// surviving a chain raises `LaurentLeak`, reported as a failure.
fn sl3_laurent_free(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let pair = sl3core::pair_basis(ctx.cap)?;
    res.window = ctx.cap as i32;
    let (p1, p2) = sl3_points(p);
    for order in [RhatOrder::First, RhatOrder::Second] {
        for (op, args) in sl3core::rhat_factors(&p1, &p2, order) {
            match sl3core::sl3_rop(op, &args, &pair, None) {
                Err(Error::LaurentLeak(at)) => {
                    mismatch_into(res, format!("{op:?}"), at);
                    return Ok(());
                }
                Err(e) => return Err(e),
                Ok(_) => {}
            }
        }
    }
    Ok(())
}

// ---- oracle ----

fn oracle_compare(x: &SparseOp, closed: &SparseOp, window: i32, res: &mut CheckResult) -> Result<()> {
    let (x, c) = lwv_normalize(x)?;
    let (closed, _) = lwv_normalize(closed)?;
    zero_into(res, &equal_on(&x, &closed, window)?);
    res.normalization_scalar = Some(c);
    Ok(())
}

fn sl2_oracle_guard(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    let (_, _, us, vs) = sl2_points(p);
    degeneracy_guard(&sl2_pairs(&us, &vs), 2 * ctx.cap)
}

fn sl2_oracle(f: Sl2Factor, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let h = 2 * ctx.cap;
    let b = oracle::sl2_oracle_basis(h)?;
    res.cap = h;
    res.window = h as i32;
    let (_, _, us, vs) = sl2_points(p);
    let cons = oracle::sl2_first_order_constraints(f, &us, &vs, &b)?;
    let (x, _) = oracle::unique_solution(&cons, &oracle::sl2_charges(&b)?, res.window)?;
    let shift = ctx
        .mutation
        .and_then(Mutation::sl2)
        .and_then(|(g, s)| (g == f).then_some(s));
    let closed = sl2core::sl2_elementary(f, &us, &vs, &b, shift)?;
    oracle_compare(&x, &closed, res.window, res)
}

fn oracle_sl2_r1(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl2_oracle(Sl2Factor::R1, p, ctx, res)
}

fn oracle_sl2_r2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl2_oracle(Sl2Factor::R2, p, ctx, res)
}

fn oracle_guard_r1(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R1), ctx.cap)
}

fn oracle_guard_r2(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R2), ctx.cap)
}

fn oracle_guard_r3(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R3), ctx.cap)
}

fn sl3_oracle(op: Sl3Op, p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let b = oracle::sl3_oracle_basis(ctx.cap)?;
    res.window = ctx.cap as i32;
    let (p1, p2) = sl3_points(p);
    let (us, vs) = (p1.us(), p2.us());
    let cons = oracle::sl3_first_order_constraints(op, &us, &vs, &b)?;
    let (x, _) = oracle::unique_solution(&cons, &oracle::sl3_charges(&b)?, res.window)?;
    let m = ctx.mutation.and_then(Mutation::sl3);
    let closed = sl3core::sl3_rop(op, &sl3core::elementary_args(op, &us, &vs), &b, m)?;
    oracle_compare(&x, &closed, res.window, res)
}

fn oracle_sl3_r1(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_oracle(Sl3Op::R1, p, ctx, res)
}

fn oracle_sl3_r2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_oracle(Sl3Op::R2, p, ctx, res)
}

fn oracle_sl3_r3(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    sl3_oracle(Sl3Op::R3, p, ctx, res)
}

fn reduced_guard(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    sl3_guard_with(p, Built::One(Sl3Op::R3), 2 * ctx.cap)
}

/// The single-site reduction of the third operator; mutations of its
/// factors apply here as well.
fn oracle_reduced(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    let h = 2 * ctx.cap;
    let b = sl3core::site_basis("", h)?;
    res.cap = h;
    res.window = h as i32;
    let (p1, p2) = sl3_points(p);
    let (us, v3) = (p1.us(), p2.u3());
    let cons = oracle::reduced_r3_constraints(&us, &v3, &b)?;
    let (x, _) = oracle::unique_solution(&cons, &oracle::reduced_charges(&b)?, res.window)?;
    let closed = sl3core::reduced_r3(&us, &v3, &b, ctx.mutation.and_then(Mutation::sl3))?;
    oracle_compare(&x, &closed, res.window, res)
}

// ---- ybe ----

/// The triple products build `R_ij` from the first ordering only.
fn ybe_sl2_guard(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    let ells = [&p[0], &p[1], &p[2]];
    let (u, v) = (&p[3], &p[4]);
    let sites = [(0, 1, u - v), (0, 2, u.clone()), (1, 2, v.clone())];
    for (i, j, w) in sites {
        let (_, _, us, vs) = sl2_points(&[ells[i].clone(), ells[j].clone(), w, Rat::zero()]);
        degeneracy_guard(&sl2_order_pairs(&us, &vs, RhatOrder::First), 2 * ctx.cap)?;
    }
    Ok(())
}

fn ybe_sl2(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = ctx.cap as i32;
    zero_into(
        res,
        &sl2core::sl2_ybe_check([&p[0], &p[1], &p[2]], &p[3], &p[4], [ctx.cap; 3])?,
    );
    Ok(())
}

fn ybe_rll_guard(p: &[Rat], ctx: &Ctx) -> std::result::Result<(), String> {
    let half = Rat::new(-1, 2);
    ybe_sl2_guard(&[p[0].clone(), p[1].clone(), half, p[2].clone(), p[3].clone()], ctx)
}

/// Third site the two-dimensional representation (`ℓ = -1/2`, cap 1).
fn ybe_sl2_rll(p: &[Rat], ctx: &Ctx, res: &mut CheckResult) -> Result<()> {
    res.window = 1;
    let half = Rat::new(-1, 2);
    zero_into(
        res,
        &sl2core::sl2_ybe_check([&p[0], &p[1], &half], &p[2], &p[3], [ctx.cap, ctx.cap, 1])?,
    );
    Ok(())
}

fn catalog(suite: Suite) -> Vec<CheckDef> {
    let d = |name, arity, default, guard: Guard, run: Run| CheckDef {
        name,
        arity,
        default,
        guard,
        run,
    };
    match suite {
        Suite::Sl2 => vec![
            d("commutators", 1, true, no_guard, sl2_commutators),
            d("casimir", 1, true, no_guard, sl2_casimir),
            d("lax-factor", 2, true, no_guard, sl2_lax_factor),
            d("F1", 4, true, sl2_guard, sl2_f1),
            d("F2", 4, true, sl2_guard, sl2_f2),
            d("rfact-orders", 4, true, sl2_guard, sl2_orders),
            d("spectral", 3, true, sl2_spectral_guard, sl2_spectral),
            d("ybe-fundamental", 2, true, no_guard, ybe_fundamental),
            d("lax-invariance", 3, false, no_guard, sl2_lax_invariance),
            d("global-lowering", 2, false, no_guard, sl2_global_lowering),
            d("global-raising", 1, false, no_guard, sl2_global_raising),
            d("rll", 4, false, sl2_guard, sl2_rll),
            d("side-F1", 4, false, sl2_guard, sl2_side_r1),
            d("side-F2", 4, false, sl2_guard, sl2_side_r2),
        ],
        Suite::Sl3 => vec![
            d("commutators", 2, true, no_guard, sl3_commutators),
            d("casimir-c2", 2, true, no_guard, sl3_c2),
            d("casimir-c3", 2, true, no_guard, sl3_c3),
            d("findim", 0, true, no_guard, sl3_findim),
            d("lax-factor3", 3, true, no_guard, sl3_lax_factor),
            d("sl3-invariance", 6, true, no_guard, sl3_invariance),
            d("3F1", 6, true, guard_r1, sl3_3f1),
            d("3F2", 6, true, guard_r2, sl3_3f2),
            d("3F3", 6, true, guard_r3, sl3_3f3),
            d("rfact3-orders", 6, true, guard_orders, sl3_orders),
            d("def3", 6, true, guard_rmatrix, sl3_def3),
            d("rll3", 6, false, guard_orders, sl3_rll),
            d("side-r1", 6, false, guard_r1, sl3_side_r1),
            d("side-r2", 6, false, guard_r2, sl3_side_r2),
            d("side-r3", 6, false, guard_r3, sl3_side_r3),
            d("laurent-free", 6, false, guard_orders, sl3_laurent_free),
            d("fundamental", 0, false, no_guard, sl3_fundamental),
            d("generating-function", 3, false, no_guard, sl3_generating),
            d("global-lowering3", 3, false, no_guard, sl3_global_lowering),
        ],
        Suite::Oracle => vec![
            d("oracle-sl2-r1", 4, true, sl2_oracle_guard, oracle_sl2_r1),
            d("oracle-sl2-r2", 4, true, sl2_oracle_guard, oracle_sl2_r2),
            d("oracle-sl3-r1", 6, true, oracle_guard_r1, oracle_sl3_r1),
            d("oracle-sl3-r2", 6, true, oracle_guard_r2, oracle_sl3_r2),
            d("oracle-sl3-r3", 6, true, oracle_guard_r3, oracle_sl3_r3),
            d("oracle-sl3-r3-reduced", 6, true, reduced_guard, oracle_reduced),
        ],
        Suite::Ybe => vec![
            d("ybe-fundamental", 2, true, no_guard, ybe_fundamental),
            d("ybe-sl2", 5, true, ybe_sl2_guard, ybe_sl2),
            d("ybe-sl2-rll", 4, true, ybe_rll_guard, ybe_sl2_rll),
        ],
    }
}

/// One draw from the parameter pool.
pub fn draw_rational(rng: &mut ChaCha8Rng) -> Rat {
    let p = rng.gen_range(-POOL_NUMERATOR..=POOL_NUMERATOR);
    let q = rng.gen_range(1..=POOL_DENOMINATOR);
    Rat::new(p, q)
}

fn sample(def: &CheckDef, stream: u64, cfg: &SuiteConfig, ctx: &Ctx) -> ParamSample {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut out = ParamSample {
        seed: cfg.seed,
        draws: Vec::new(),
        rejected: Vec::new(),
    };
    for _ in 0..MAX_DRAWS {
        if out.draws.len() == cfg.trials {
            break;
        }
        let p: Vec<Rat> = (0..def.arity).map(|_| draw_rational(&mut rng)).collect();
        match (def.guard)(&p, ctx) {
            Ok(()) => out.draws.push(p),
            Err(reason) => out.rejected.push(Rejection {
                check: def.name.into(),
                params: p,
                reason,
            }),
        }
    }
    out
}

fn run_one(def: &CheckDef, params: Vec<Rat>, ctx: &Ctx) -> CheckResult {
    let mut res = CheckResult::new(def.name, params, ctx.cap, ctx.cap as i32);
    if let Err(reason) = (def.guard)(&res.params, ctx) {
        return res.skipped(reason);
    }
    let p = res.params.clone();
    match (def.run)(&p, ctx, &mut res) {
        Ok(()) => res,
        Err(e) => res.from_error(&e),
    }
}

/// Build the largest basis the suite will touch, so an oversized cap fails
/// up front with `CapTooLarge` instead of inside every check.
pub fn preflight(cfg: &SuiteConfig) -> Result<()> {
    match cfg.suite {
        Suite::Sl2 => sl2core::pair_basis(cfg.cap.max(SPECTRAL_LEVELS + 1)).map(drop),
        Suite::Sl3 => {
            sl3core::pair_basis(cfg.cap)?;
            sl3core::site_basis("", cfg.cap + 2).map(drop)
        }
        Suite::Oracle => {
            oracle::sl2_oracle_basis(2 * cfg.cap)?;
            oracle::sl3_oracle_basis(cfg.cap).map(drop)
        }
        Suite::Ybe => {
            let site = sl2core::site_basis("z", cfg.cap)?;
            crate::polyspace::tensor_basis(&*sl2core::pair_basis(cfg.cap)?, &site).map(drop)
        }
    }
}

/// Apply the guard of one named check, as the runner would.
pub fn check_guard(suite: Suite, name: &str, cap: u32, params: &[Rat]) -> Result<std::result::Result<(), String>> {
    let def = catalog(suite)
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::Config(format!("unknown check {name:?} in suite {}", suite.name())))?;
    if params.len() != def.arity {
        return Err(Error::Config(format!("check {name} takes {} parameters", def.arity)));
    }
    let ctx = Ctx { cap, mutation: None };
    Ok((def.guard)(params, &ctx))
}

/// Run the configured checks and assemble the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    let ctx = Ctx {
        cap: cfg.cap,
        mutation: cfg.mutation,
    };
    let defs = catalog(cfg.suite);
    for name in &cfg.checks {
        if !defs.iter().any(|d| d.name == name) {
            return Err(Error::Config(format!(
                "unknown check {name:?} in suite {}",
                cfg.suite.name()
            )));
        }
    }
    let mut jobs: Vec<(usize, Vec<Rat>)> = Vec::new();
    let mut rejections = Vec::new();
    for (i, def) in defs.iter().enumerate() {
        let selected = if cfg.checks.is_empty() {
            def.default
        } else {
            cfg.checks.iter().any(|c| c == def.name)
        };
        if !selected {
            continue;
        }
        if def.arity == 0 {
            jobs.push((i, Vec::new()));
            continue;
        }
        match &cfg.params {
            Some(p) if p.len() == def.arity => jobs.push((i, p.clone())),
            Some(p) => {
                return Err(Error::Config(format!(
                    "check {} takes {} parameters, {} given",
                    def.name,
                    def.arity,
                    p.len()
                )))
            }
            None => {
                let s = sample(def, i as u64 + 1, cfg, &ctx);
                jobs.extend(s.draws.into_iter().map(|p| (i, p)));
                rejections.extend(s.rejected);
            }
        }
    }
    let work = || -> Vec<CheckResult> {
        jobs.par_iter()
            .map(|(i, p)| run_one(&defs[*i], p.clone(), &ctx))
            .collect()
    };
    let mut checks = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    sort_results(&mut checks);
    let all_passed = checks.iter().all(CheckResult::passed);
    Ok(Report {
        suite: cfg.suite.name().into(),
        seed: cfg.seed,
        cap: cfg.cap,
        checks,
        rejections,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutation_syntax_round_trips() {
        for s in ["r1:3", "r2:0", "r3:b:1", "r1:a:-2"] {
            assert_eq!(s.parse::<Mutation>().unwrap().to_string(), s);
        }
        assert!("r4:1".parse::<Mutation>().is_err());
        assert!("r1:d:1".parse::<Mutation>().is_err());
        assert!("r1".parse::<Mutation>().is_err());
    }

    #[test]
    fn sampling_is_reproducible_and_in_pool() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = draw_rational(&mut a);
            assert_eq!(x, draw_rational(&mut b));
            assert!(x.denom() <= &num_bigint::BigInt::from(POOL_DENOMINATOR));
        }
    }

    #[test]
    fn empty_selection_gives_empty_report() {
        let mut cfg = SuiteConfig::new(Suite::Sl2);
        cfg.trials = 0;
        cfg.checks = vec!["F1".into()];
        let rep = run_suite(&cfg).unwrap();
        assert!(rep.checks.is_empty());
        assert!(rep.all_passed);
    }

    #[test]
    fn guard_rejection_is_a_skip() {
        let mut cfg = SuiteConfig::new(Suite::Sl2);
        cfg.checks = vec!["F1".into()];
        // v1 - v2 = 2 l2 = -1 makes (b)_k vanish
        cfg.params = Some(vec![Rat::new(1, 3), Rat::new(-1, 2), Rat::new(1, 5), Rat::zero()]);
        let rep = run_suite(&cfg).unwrap();
        assert_eq!(rep.checks[0].status, Status::Skipped);
        assert!(rep.checks[0].reason.as_deref().unwrap().contains("vanishes"));
        assert!(rep.all_passed);
    }
}
