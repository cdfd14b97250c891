//! Independent oracles, residual checks, degeneracy guards and reports.

pub mod oracle;
pub mod suite;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Rat;
use crate::linop::{is_zero, LaxOp, SparseOp, Witness, ZeroCheck};
use crate::polyspace::Monomial;

/// Rescale `op` so that it fixes the constant monomial; returns the scalar
/// it was divided by.
pub fn lwv_normalize(op: &SparseOp) -> Result<(SparseOp, Rat)> {
    let dom = op.domain();
    let one = dom
        .index(&Monomial::one(dom.nvars()))
        .ok_or_else(|| Error::BasisMismatch("basis lacks the constant monomial".into()))?;
    let col = op
        .column(one)
        .ok_or_else(|| Error::Uncertified { monomial: "1".into() })?;
    let c = match col.as_slice() {
        [(i, c)] if *i as usize == one && !c.is_zero() => c.clone(),
        _ => {
            let image = op
                .image_poly(one)
                .map(|p| p.display(op.codomain().vars()).to_string())
                .unwrap_or_default();
            return Err(Error::NotLowestWeightStable(image));
        }
    };
    Ok((op.scale(&c.recip()?), c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one check at one parameter point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub params: Vec<Rat>,
    pub cap: u32,
    pub window: i32,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(rename = "scalar", default, skip_serializing_if = "Option::is_none")]
    pub normalization_scalar: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, params: Vec<Rat>, cap: u32, window: i32) -> Self {
        CheckResult {
            name: name.into(),
            params,
            cap,
            window,
            status: Status::Pass,
            witness: None,
            normalization_scalar: None,
            reason: None,
        }
    }

    /// Pass or fail according to a zero test.
    pub fn with_zero(mut self, z: &ZeroCheck) -> Self {
        if let Some(w) = &z.witness {
            self.status = Status::Fail;
            self.witness = Some(w.clone());
        }
        self
    }

    pub fn with_scalar(mut self, c: Rat) -> Self {
        self.normalization_scalar = Some(c);
        self
    }

    pub fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.reason = Some(reason.into());
        self
    }

    pub fn failed(mut self, witness: Witness, reason: Option<String>) -> Self {
        self.status = Status::Fail;
        self.witness = Some(witness);
        self.reason = reason;
        self
    }

    /// Map a construction error: parameter degeneracies become skips, any
    /// other error is a failure carrying the error text.
    pub fn from_error(self, e: &Error) -> Self {
        match e {
            Error::PoleAtParameter { .. }
            | Error::DivisionByZero
            | Error::MultiDimensional(_)
            | Error::DegenerateDecomposition { .. } => self.skipped(e.to_string()),
            _ => self.failed(
                Witness {
                    monomial: "-".into(),
                    image: e.to_string(),
                },
                Some("error".into()),
            ),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Reject parameter points where some `(b)_k` with `k <= cap` vanishes.
pub fn degeneracy_guard(pairs: &[(Rat, Rat)], cap: u32) -> std::result::Result<(), String> {
    for (a, b) in pairs {
        if b.is_integer() && (b.is_zero() || b.is_negative()) {
            // (b)_k = 0 once k > -b
            if -b.to_i64().unwrap_or(i64::MIN) < cap as i64 {
                return Err(format!("({b})_{cap} vanishes in the ratio ({a})_k/({b})_k"));
            }
        }
    }
    Ok(())
}

/// Reject points where a spectral denominator `-u+ℓ1+ℓ2+n`, `n <= nmax`,
/// vanishes.
pub fn spectral_guard(ell1: &Rat, ell2: &Rat, u: &Rat, nmax: u32) -> std::result::Result<(), String> {
    let base = ell1 + ell2 - u;
    for n in 0..=nmax {
        if (&base + Rat::from_int(n as i64)).is_zero() {
            return Err(format!("spectral denominator -u+l1+l2+{n} vanishes"));
        }
    }
    Ok(())
}

/// `R (L1 L2) - (L1' L2') R`, blockwise, tested on the window.
pub fn residual_rll(r: &SparseOp, l1: &LaxOp, l2: &LaxOp, l1p: &LaxOp, l2p: &LaxOp, window: i32) -> Result<ZeroCheck> {
    let lhs = l1.mul(l2)?.left_compose(r)?;
    let rhs = l1p.mul(l2p)?.right_compose(r)?;
    lhs.sub(&rhs)?.is_zero(window)
}

/// `R12 R13 R23 - R23 R13 R12` on a common triple basis.
pub fn residual_ybe(r12: &SparseOp, r13: &SparseOp, r23: &SparseOp, window: i32) -> Result<ZeroCheck> {
    let lhs = r12.compose(r13)?.compose(r23)?;
    let rhs = r23.compose(r13)?.compose(r12)?;
    is_zero(&lhs.sub(&rhs)?, window)
}
