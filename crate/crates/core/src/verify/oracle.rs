//! Intertwiner oracle: an independent linear solve for the operators defined
//! by first-order commutation systems `X A_i = B_i X`.
//!
//! `X` is taken block-diagonal in the joint eigenspaces of the charges. The
//! equation attached to a column `j` of a constraint is used only when every
//! column of `A` and `B` it touches is defined, so truncation never creates
//! spurious equations. Unknowns near the top of the basis stay loosely
//! constrained; the solution space is therefore projected onto the columns
//! of height at most `window` before its dimension is read off.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactnum::Rat;
use crate::linop::solve::Echelon;
use crate::linop::{charge_blocks, DiffExpr, SparseOp, SparseVec};
use crate::polyspace::{enumerate_basis, GradedBasis, VarSpec};
use crate::sl2core::{sl2_exchanged, sl2_lax, Sl2Factor};
use crate::sl3core::{self, exchanged, sl3_lax, Sl3Op};

/// One relation `X a = b X`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub a: SparseOp,
    pub b: SparseOp,
}

impl Constraint {
    pub fn new(name: impl Into<String>, a: SparseOp, b: SparseOp) -> Self {
        Constraint {
            name: name.into(),
            a,
            b,
        }
    }

    /// `X c = c X`.
    pub fn commuting(name: impl Into<String>, c: SparseOp) -> Self {
        Constraint::new(name, c.clone(), c)
    }
}

/// Sizes of the solved system, for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleStats {
    pub unknowns: usize,
    pub rank: usize,
    pub free: usize,
}

struct Layout {
    which: Vec<usize>,
    local: Vec<usize>,
    offset: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Layout {
    fn var(&self, i: usize, k: usize) -> Option<usize> {
        let b = self.which[k];
        (self.which[i] == b).then(|| self.offset[b] + self.local[i] * self.blocks[b].len() + self.local[k])
    }

    fn entry(&self, v: usize) -> (usize, usize) {
        let b = match self.offset.binary_search(&v) {
            Ok(b) => b,
            Err(b) => b - 1,
        };
        let n = self.blocks[b].len();
        let r = v - self.offset[b];
        (self.blocks[b][r / n], self.blocks[b][r % n])
    }
}

/// Solve the system and return a basis of its solutions projected onto the
/// columns of height `<= window`, each as an operator whose other columns
/// are undefined.
pub fn intertwiner_oracle(
    constraints: &[Constraint],
    charges: &[SparseOp],
    window: i32,
) -> Result<(Vec<SparseOp>, OracleStats)> {
    let Some(first) = constraints.first() else {
        return Err(Error::Config("oracle needs at least one constraint".into()));
    };
    let basis = first.a.domain().clone();
    let n = basis.len();
    let blocks: Vec<Vec<usize>> = charge_blocks(charges)?.into_iter().map(|b| b.indices).collect();
    let mut which = vec![0; n];
    let mut local = vec![0; n];
    let mut offset = Vec::with_capacity(blocks.len());
    let mut total = 0;
    for (b, idx) in blocks.iter().enumerate() {
        offset.push(total);
        total += idx.len() * idx.len();
        for (p, &j) in idx.iter().enumerate() {
            which[j] = b;
            local[j] = p;
        }
    }
    let lay = Layout {
        which,
        local,
        offset,
        blocks,
    };
    let mut ech = Echelon::new(total);
    for c in constraints {
        for j in 0..n {
            let Some(acol) = c.a.column(j) else { continue };
            let blk = &lay.blocks[lay.which[j]];
            let bcols: Option<Vec<&SparseVec>> = blk.iter().map(|&l| c.b.column(l)).collect();
            let Some(bcols) = bcols else { continue };
            // row i: Σ_k A_kj X_ik - Σ_l B_il X_lj
            let mut rows: std::collections::BTreeMap<usize, Vec<(usize, Rat)>> = Default::default();
            for (k, a) in acol {
                let k = *k as usize;
                for &i in &lay.blocks[lay.which[k]] {
                    rows.entry(i)
                        .or_default()
                        .push((lay.var(i, k).expect("same block"), a.clone()));
                }
            }
            for (&l, bcol) in blk.iter().zip(bcols) {
                let v = lay.var(l, j).expect("same block");
                for (i, b) in bcol {
                    rows.entry(*i as usize).or_default().push((v, -b));
                }
            }
            for (_, mut row) in rows {
                row.sort_by_key(|(v, _)| *v);
                let mut merged: Vec<(usize, Rat)> = Vec::with_capacity(row.len());
                for (v, c) in row {
                    match merged.last_mut() {
                        Some((w, d)) if *w == v => *d += &c,
                        _ => merged.push((v, c)),
                    }
                }
                merged.retain(|(_, c)| !c.is_zero());
                if !merged.is_empty() {
                    ech.push(&merged);
                }
            }
        }
    }
    let stats = OracleStats {
        unknowns: total,
        rank: ech.rank(),
        free: total - ech.rank(),
    };
    let in_window = |v: usize| basis.height_of(lay.entry(v).1) <= window;
    // project the nullspace and reduce it to an independent set
    let mut proj = Echelon::new(total);
    let mut kept: Vec<Vec<(usize, Rat)>> = Vec::new();
    for v in ech.nullspace() {
        let p: Vec<(usize, Rat)> = v.into_iter().filter(|(i, _)| in_window(*i)).collect();
        if !p.is_empty() && proj.push(&p) {
            kept.push(p);
        }
    }
    let ops = kept
        .into_iter()
        .map(|p| {
            let mut cols: Vec<Option<SparseVec>> =
                (0..n).map(|k| (basis.height_of(k) <= window).then(Vec::new)).collect();
            for (v, c) in p {
                let (i, k) = lay.entry(v);
                cols[k].as_mut().expect("window column").push((i as u32, c));
            }
            for c in cols.iter_mut().flatten() {
                c.sort_by_key(|(i, _)| *i);
            }
            SparseOp::from_columns(basis.clone(), basis.clone(), cols, 0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ops, stats))
}

/// The unique (up to scale) solution, or `EmptyNullspace` /
/// `MultiDimensional`.
pub fn unique_solution(
    constraints: &[Constraint],
    charges: &[SparseOp],
    window: i32,
) -> Result<(SparseOp, OracleStats)> {
    let (mut sols, stats) = intertwiner_oracle(constraints, charges, window)?;
    match sols.len() {
        0 => Err(Error::EmptyNullspace),
        1 => Ok((sols.pop().expect("one solution"), stats)),
        d => Err(Error::MultiDimensional(d)),
    }
}

/// `C[z1, z2]` up to total degree `height`.
pub fn sl2_oracle_basis(height: u32) -> Result<Arc<GradedBasis>> {
    enumerate_basis(vec![VarSpec::new("z1", 1), VarSpec::new("z2", 1)], height)
}

/// `C[x1,y1,z1,x2,y2,z2]` up to total height `height`.
pub fn sl3_oracle_basis(height: u32) -> Result<Arc<GradedBasis>> {
    let mut vars = sl3core::site_vars("1");
    vars.extend(sl3core::site_vars("2"));
    enumerate_basis(vars, height)
}

/// Total Euler charge `z1∂1 + z2∂2`.
pub fn sl2_charges(basis: &Arc<GradedBasis>) -> Result<Vec<SparseOp>> {
    Ok(vec![DiffExpr::new()
        .d(1, "z1", "z1")
        .d(1, "z2", "z2")
        .tabulate(basis, 0)?])
}

/// Total Euler parts of `H1` and `H2` over both sites.
pub fn sl3_charges(basis: &Arc<GradedBasis>) -> Result<Vec<SparseOp>> {
    let mut e1 = DiffExpr::new();
    let mut e2 = DiffExpr::new();
    for t in ["1", "2"] {
        let (x, y, z) = (format!("x{t}"), format!("y{t}"), format!("z{t}"));
        e1 = e1.d(2, &x, &x).d(1, &y, &y).d(-1, &z, &z);
        e2 = e2.d(2, &z, &z).d(1, &y, &y).d(-1, &x, &x);
    }
    Ok(vec![e1.tabulate(basis, 0)?, e2.tabulate(basis, 0)?])
}

fn lax_sum_constraints(prefix: &str, sum: crate::linop::LaxOp, exch: crate::linop::LaxOp) -> Vec<Constraint> {
    let d = sum.size();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(Constraint::new(
                format!("{prefix}[{},{}]", i + 1, j + 1),
                sum.block(i, j).clone(),
                exch.block(i, j).clone(),
            ));
        }
    }
    out
}

/// The first-order system of one sl(2) elementary operator: the summed Lax
/// relation and commutation with the untouched site coordinate.
pub fn sl2_first_order_constraints(
    f: Sl2Factor,
    us: &[Rat; 2],
    vs: &[Rat; 2],
    basis: &Arc<GradedBasis>,
) -> Result<Vec<Constraint>> {
    let (a, b) = sl2_exchanged(f, us, vs);
    let sum = sl2_lax(&us[0], &us[1], basis, "z1")?.add(&sl2_lax(&vs[0], &vs[1], basis, "z2")?)?;
    let exch = sl2_lax(&a[0], &a[1], basis, "z1")?.add(&sl2_lax(&b[0], &b[1], basis, "z2")?)?;
    let mut out = lax_sum_constraints("L", sum, exch);
    let fixed = match f {
        Sl2Factor::R1 => "z1",
        Sl2Factor::R2 => "z2",
    };
    out.push(Constraint::commuting(
        fixed,
        DiffExpr::new().mul(1, fixed).tabulate(basis, 1)?,
    ));
    Ok(out)
}

/// The first-order system of one sl(3) elementary operator: the summed Lax
/// relation and its side relations.
pub fn sl3_first_order_constraints(
    op: Sl3Op,
    us: &[Rat; 3],
    vs: &[Rat; 3],
    basis: &Arc<GradedBasis>,
) -> Result<Vec<Constraint>> {
    let (a, b) = exchanged(op, us, vs);
    let sum = sl3_lax(us, basis, "1")?.add(&sl3_lax(vs, basis, "2")?)?;
    let exch = sl3_lax(&a, basis, "1")?.add(&sl3_lax(&b, basis, "2")?)?;
    let mut out = lax_sum_constraints("L", sum, exch);
    let mul = |m: &str, h: i32| -> Result<Constraint> {
        Ok(Constraint::commuting(m, DiffExpr::new().mul(1, m).tabulate(basis, h)?))
    };
    match op {
        Sl3Op::R1 => {
            out.push(mul("x1", 1)?);
            out.push(mul("y1", 2)?);
            out.push(mul("z1", 1)?);
            out.push(Constraint::commuting(
                "d_z2-(x2-x1)d_y2",
                DiffExpr::new()
                    .d(1, "1", "z2")
                    .d(-1, "x2", "y2")
                    .d(1, "x1", "y2")
                    .tabulate(basis, -1)?,
            ));
        }
        Sl3Op::R2 => {
            out.push(Constraint::commuting(
                "y1+x1*z1",
                DiffExpr::new().mul(1, "y1").mul(1, "x1*z1").tabulate(basis, 2)?,
            ));
            out.push(mul("z1", 1)?);
            out.push(mul("x2", 1)?);
            out.push(mul("y2", 2)?);
        }
        Sl3Op::R3 => {
            out.push(mul("x2", 1)?);
            out.push(mul("y2", 2)?);
            out.push(mul("z2", 1)?);
            out.push(Constraint::commuting(
                "d_x1-z2*d_y1",
                DiffExpr::new().d(1, "1", "x1").d(-1, "z2", "y1").tabulate(basis, -1)?,
            ));
        }
    }
    Ok(out)
}

/// The reduced single-site system for the third elementary operator, on
/// `C[x, y, z]`.
pub fn reduced_r3_constraints(us: &[Rat; 3], v3: &Rat, basis: &Arc<GradedBasis>) -> Result<Vec<Constraint>> {
    let [u1, u2, u3] = us;
    let one = Rat::one();
    let a = |w: &Rat| {
        DiffExpr::new()
            .d(1, "y", "x")
            .d(1, "z^2", "z")
            .mul(u2 - w + &one, "z")
            .tabulate(basis, 1)
    };
    let b = |w: &Rat| {
        DiffExpr::new()
            .d(1, "x*y", "x")
            .d(1, "x*z^2", "z")
            .mul(u2 - w + &one, "x*z")
            .d(1, "y^2", "y")
            .d(1, "y*z", "z")
            .mul(u1 - w + Rat::from_int(2), "y")
            .tabulate(basis, 2)
    };
    Ok(vec![
        Constraint::commuting(
            "x*d_x+y*d_y",
            DiffExpr::new().d(1, "x", "x").d(1, "y", "y").tabulate(basis, 0)?,
        ),
        Constraint::commuting("d_x", DiffExpr::new().d(1, "1", "x").tabulate(basis, -1)?),
        Constraint::commuting(
            "-x*d_x+z*d_z",
            DiffExpr::new().d(-1, "x", "x").d(1, "z", "z").tabulate(basis, 0)?,
        ),
        Constraint::commuting(
            "raising",
            DiffExpr::new()
                .d(1, "x^2", "x")
                .d(1, "x*y", "y")
                .d(-1, "x*z", "z")
                .d(-1, "y", "z")
                .mul(u1 - u2 + &one, "x")
                .tabulate(basis, 1)?,
        ),
        Constraint::new("shifted-z", a(u3)?, a(v3)?),
        Constraint::new("shifted-y", b(u3)?, b(v3)?),
    ])
}

/// Charges of the reduced system: the Euler parts `x∂x+y∂y` and `z∂z-x∂x`.
pub fn reduced_charges(basis: &Arc<GradedBasis>) -> Result<Vec<SparseOp>> {
    Ok(vec![
        DiffExpr::new().d(1, "x", "x").d(1, "y", "y").tabulate(basis, 0)?,
        DiffExpr::new().d(-1, "x", "x").d(1, "z", "z").tabulate(basis, 0)?,
    ])
}
