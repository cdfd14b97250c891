//! Sparse fraction-free elimination for exact nullspaces.
//!
//! Rows are kept as primitive integer vectors (content divided out after
//! every combination) in reduced row echelon form, built incrementally so
//! that redundant equations cost only one reduction each.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::Rat;

type IntRow = Vec<(usize, BigInt)>;

/// Clear denominators and divide out the content; the first entry is made
/// positive.
fn primitive_from_rats(row: &[(usize, Rat)]) -> IntRow {
    let mut lcm = BigInt::one();
    for (_, c) in row {
        lcm = lcm.lcm(c.denom());
    }
    let mut out: IntRow = row
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (*i, c.numer() * (&lcm / c.denom())))
        .collect();
    out.sort_by_key(|(i, _)| *i);
    make_primitive(&mut out);
    out
}

fn make_primitive(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, c) in row.iter() {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    if row.first().is_some_and(|(_, c)| c.is_negative()) {
        g = -g;
    }
    if !g.is_zero() && !g.is_one() {
        for (_, c) in row.iter_mut() {
            *c = &*c / &g;
        }
    }
}

fn coeff(row: &IntRow, col: usize) -> Option<&BigInt> {
    row.binary_search_by_key(&col, |(i, _)| *i).ok().map(|p| &row[p].1)
}

/// `a * x - b * y`, made primitive.
fn combine(a: &BigInt, x: &IntRow, b: &BigInt, y: &IntRow) -> IntRow {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut p, mut q) = (0, 0);
    while p < x.len() || q < y.len() {
        let take_x = q == y.len() || (p < x.len() && x[p].0 < y[q].0);
        let take_y = p == x.len() || (q < y.len() && y[q].0 < x[p].0);
        if take_x {
            out.push((x[p].0, a * &x[p].1));
            p += 1;
        } else if take_y {
            out.push((y[q].0, -(b * &y[q].1)));
            q += 1;
        } else {
            let v = a * &x[p].1 - b * &y[q].1;
            if !v.is_zero() {
                out.push((x[p].0, v));
            }
            p += 1;
            q += 1;
        }
    }
    make_primitive(&mut out);
    out
}

/// Incrementally maintained reduced row echelon form.
#[derive(Debug, Default)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<Option<IntRow>>,
    pivot_row: HashMap<usize, usize>,
    /// For every column, the pivot rows in which it occurs.
    occurs: HashMap<usize, BTreeSet<usize>>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            ..Default::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.pivot_row.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn index_row(&mut self, r: usize) {
        if let Some(row) = &self.rows[r] {
            for (c, _) in row {
                self.occurs.entry(*c).or_default().insert(r);
            }
        }
    }

    fn unindex_row(&mut self, r: usize) {
        if let Some(row) = &self.rows[r] {
            for (c, _) in row {
                if let Some(s) = self.occurs.get_mut(c) {
                    s.remove(&r);
                }
            }
        }
    }

    /// Add an equation `Σ c_i x_i = 0`. Returns whether the rank grew.
    pub fn push(&mut self, row: &[(usize, Rat)]) -> bool {
        let mut r = primitive_from_rats(row);
        // reduce against existing pivots (they are mutually reduced)
        let hits: Vec<usize> = r
            .iter()
            .filter_map(|(c, _)| self.pivot_row.get(c).map(|_| *c))
            .collect();
        for c in hits {
            let Some(a) = coeff(&r, c).cloned() else {
                continue;
            };
            let pr = self.rows[self.pivot_row[&c]].as_ref().expect("pivot row");
            let b = coeff(pr, c).expect("pivot entry").clone();
            r = combine(&b, &r, &a, pr);
        }
        if r.is_empty() {
            return false;
        }
        // pivot on the column that occurs least in the other rows
        let p = r
            .iter()
            .map(|(c, _)| *c)
            .min_by_key(|c| (self.occurs.get(c).map_or(0, BTreeSet::len), *c))
            .expect("nonempty row");
        let id = self.rows.len();
        let pv = coeff(&r, p).expect("pivot entry").clone();
        let users: Vec<usize> = self
            .occurs
            .get(&p)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for u in users {
            self.unindex_row(u);
            let old = self.rows[u].take().expect("indexed row");
            let a = coeff(&old, p).expect("indexed entry").clone();
            self.rows[u] = Some(combine(&pv, &old, &a, &r));
            self.index_row(u);
        }
        self.rows.push(Some(r));
        self.pivot_row.insert(p, id);
        self.index_row(id);
        true
    }

    /// Basis of the solution space, one sparse vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<(usize, Rat)>> {
        let mut out = Vec::new();
        for f in 0..self.ncols {
            if self.pivot_row.contains_key(&f) {
                continue;
            }
            let mut v = vec![(f, Rat::one())];
            if let Some(rows) = self.occurs.get(&f) {
                for &r in rows {
                    let row = self.rows[r].as_ref().expect("indexed row");
                    let cf = coeff(row, f).expect("indexed entry");
                    let (p, cp) = row
                        .iter()
                        .find(|(c, _)| self.pivot_row.get(c) == Some(&r))
                        .expect("row has a pivot");
                    let val = Rat::from_big(-cf.clone(), cp.clone()).expect("pivot nonzero");
                    v.push((*p, val));
                }
            }
            v.sort_by_key(|(i, _)| *i);
            out.push(v);
        }
        out
    }
}

/// Nullspace of a sparse system given as rows of `(column, coefficient)`.
pub fn sparse_nullspace(ncols: usize, rows: &[Vec<(usize, Rat)>]) -> Vec<Vec<(usize, Rat)>> {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.push(r);
    }
    e.nullspace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(rows: &[Vec<(usize, Rat)>], v: &[(usize, Rat)]) -> Vec<Rat> {
        let mut dense = HashMap::new();
        for (i, c) in v {
            dense.insert(*i, c.clone());
        }
        rows.iter()
            .map(|r| r.iter().map(|(i, c)| dense.get(i).map_or(Rat::zero(), |x| x * c)).sum())
            .collect()
    }

    #[test]
    fn simple_kernel() {
        // x0 + x1 = 0, x1 - 2 x2 = 0  -> kernel spanned by (-2, 2, 1)
        let rows = vec![
            vec![(0, Rat::one()), (1, Rat::one())],
            vec![(1, Rat::one()), (2, Rat::from_int(-2))],
        ];
        let ns = sparse_nullspace(3, &rows);
        assert_eq!(ns.len(), 1);
        assert!(apply(&rows, &ns[0]).iter().all(Rat::is_zero));
    }

    #[test]
    fn redundant_rows_do_not_grow_rank() {
        let mut e = Echelon::new(2);
        assert!(e.push(&[(0, Rat::new(1, 2)), (1, Rat::new(1, 3))]));
        assert!(!e.push(&[(0, Rat::from_int(3)), (1, Rat::from_int(2))]));
        assert_eq!(e.rank(), 1);
    }

    proptest! {
        #[test]
        fn kernel_vectors_solve_the_system(
            entries in proptest::collection::vec((0usize..6, 0usize..8, -5i64..=5, 1i64..=4), 1..30)
        ) {
            let mut rows = vec![Vec::new(); 6];
            for (r, c, p, q) in entries {
                if p != 0 && !rows[r].iter().any(|(i, _): &(usize, Rat)| *i == c) {
                    rows[r].push((c, Rat::new(p, q)));
                }
            }
            let ns = sparse_nullspace(8, &rows);
            for v in &ns {
                prop_assert!(apply(&rows, v).iter().all(Rat::is_zero));
            }
            // rank-nullity against dense elimination
            let m = crate::linop::dense::DenseMatrix::from_fn(6, 8, |i, j| {
                rows[i].iter().find(|(c, _)| *c == j).map_or(Rat::zero(), |(_, v)| v.clone())
            });
            prop_assert_eq!(ns.len(), 8 - m.rank());
        }
    }
}
