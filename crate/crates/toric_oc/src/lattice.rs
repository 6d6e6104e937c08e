//! Integer lattice algebra: Smith normal form, kernels, finite quotients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{qb, solve, Q};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors, all of length `dim`.
    pub fn from_columns(cols: &[Vec<i64>], dim: usize) -> Self {
        let mut m = Self::zeros(dim, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), dim, "column of wrong length");
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.get(i, k) * &v[k]).sum())
            .collect()
    }

    pub fn to_rational_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| qb(self.get(i, j))).collect()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    // row a += k * row b
    fn add_row(&mut self, a: usize, b: usize, k: &BigInt) {
        for j in 0..self.cols {
            let t = self.get(b, j) * k;
            self.data[a * self.cols + j] += t;
        }
    }

    // col a += k * col b
    fn add_col(&mut self, a: usize, b: usize, k: &BigInt) {
        for i in 0..self.rows {
            let t = self.get(i, b) * k;
            self.data[i * self.cols + a] += t;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let x = -self.get(a, j).clone();
            self.set(a, j, x);
        }
    }
}

#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`, tracked alongside the row operations.
    pub u_inv: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

struct Work {
    m: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        self.m.swap_cols(a, b);
        self.v.swap_cols(a, b);
    }
    fn add_row(&mut self, a: usize, b: usize, k: &BigInt) {
        self.m.add_row(a, b, k);
        self.u.add_row(a, b, k);
        let neg = -k;
        self.u_inv.add_col(b, a, &neg);
    }
    fn add_col(&mut self, a: usize, b: usize, k: &BigInt) {
        self.m.add_col(a, b, k);
        self.v.add_col(a, b, k);
    }
    fn negate_row(&mut self, a: usize) {
        self.m.negate_row(a);
        self.u.negate_row(a);
        for i in 0..self.u_inv.rows {
            let x = -self.u_inv.get(i, a).clone();
            self.u_inv.set(i, a, x);
        }
    }
}

/// Smith normal form with smallest-|pivot| selection; ties broken by
/// (row, col) order.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (r, c) = (a.rows, a.cols);
    let mut w = Work { m: a.clone(), u: IntMatrix::identity(r), u_inv: IntMatrix::identity(r), v: IntMatrix::identity(c) };
    for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = w.m.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| x.abs() < w.m.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            let p = w.m.get(t, t).clone();
            let mut dirty = false;
            for i in t + 1..r {
                let x = w.m.get(i, t).clone();
                if x.is_zero() {
                    continue;
                }
                let qd = x.div_floor(&p);
                w.add_row(i, t, &-qd);
                dirty |= !w.m.get(i, t).is_zero();
            }
            for j in t + 1..c {
                let x = w.m.get(t, j).clone();
                if x.is_zero() {
                    continue;
                }
                let qd = x.div_floor(&p);
                w.add_col(j, t, &-qd);
                dirty |= !w.m.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            // divisibility: fold an offending row into the pivot row
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !w.m.get(i, j).is_multiple_of(&p)));
            match bad {
                Some(i) => w.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if w.m.get(t, t).is_negative() {
            w.negate_row(t);
        }
    }
    SmithDecomposition { u: w.u, d: w.m, v: w.v, u_inv: w.u_inv }
}

/// Saturated basis of the integer kernel, as columns.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(a);
    let rank = s.rank();
    let mut out = IntMatrix::zeros(a.cols, a.cols - rank);
    for (k, j) in (rank..a.cols).enumerate() {
        for i in 0..a.cols {
            out.set(i, k, s.v.get(i, j).clone());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    /// Invariant factors, each > 1; empty for the trivial group.
    pub cyclic_orders: Vec<BigInt>,
}

impl FiniteAbelianGroup {
    pub fn order(&self) -> BigInt {
        self.cyclic_orders.iter().product()
    }

    pub fn order_u64(&self) -> u64 {
        self.order().to_u64().expect("group order overflow")
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic_orders.len() <= 1
    }

    pub fn reduce(&self, el: &[BigInt]) -> Vec<BigInt> {
        el.iter().zip(&self.cyclic_orders).map(|(x, n)| x.mod_floor(n)).collect()
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&s)
    }

    pub fn neg(&self, a: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().map(|x| -x).collect();
        self.reduce(&s)
    }

    /// All elements in lexicographic residue order.
    pub fn elements(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![]];
        for n in &self.cyclic_orders {
            let n = n.to_u64().expect("order overflow");
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..n).map(move |k| {
                        let mut e2 = e.clone();
                        e2.push(BigInt::from(k));
                        e2
                    })
                })
                .collect();
        }
        out
    }
}

/// (saturation of colspan ∩ Z^r) / colspan for independent columns.
pub fn quotient_group(sub: &IntMatrix, ambient_rank: usize) -> Result<FiniteAbelianGroup> {
    assert_eq!(sub.rows, ambient_rank);
    let s = smith_normal_form(sub);
    if s.rank() < sub.cols {
        return Err(Error::NonFiniteQuotient);
    }
    let cyclic_orders = s.diagonal().into_iter().filter(|d| !d.is_one()).collect();
    Ok(FiniteAbelianGroup { cyclic_orders })
}

/// Lattice points of the saturated span of the columns of `sub`, one per
/// class of the quotient, paired with their rational coordinates in the
/// columns. Used for Box enumeration.
pub fn quotient_representatives(sub: &IntMatrix) -> Result<Vec<(Vec<BigInt>, Vec<Q>)>> {
    let s = smith_normal_form(sub);
    if s.rank() < sub.cols {
        return Err(Error::NonFiniteQuotient);
    }
    let diag = s.diagonal();
    let group = FiniteAbelianGroup { cyclic_orders: diag.clone() };
    let rows = sub.to_rational_rows();
    let mut out = vec![];
    for y in group.elements() {
        let mut full = vec![BigInt::zero(); sub.rows];
        for (i, yi) in y.into_iter().enumerate() {
            full[i] = yi;
        }
        let p = s.u_inv.mul_vec(&full);
        let rhs: Vec<Q> = p.iter().map(qb).collect();
        let c = solve(&rows, &rhs).expect("saturation point outside span");
        out.push((p, c));
    }
    Ok(out)
}
