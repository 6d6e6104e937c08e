//! Small helpers over exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qb(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

pub fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// Fractional part in [0,1).
pub fn fract(x: &Q) -> Q {
    x - qb(&floor(x))
}

pub fn is_int(x: &Q) -> bool {
    x.is_integer()
}

pub fn to_i64(x: &Q) -> i64 {
    assert!(x.is_integer(), "expected an integer, got {x}");
    x.to_integer().to_i64().expect("integer out of i64 range")
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn lcm_all<'a>(it: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |a, b| a.lcm(b))
}

/// Canonical text form "p/q" (or "p" when integral).
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m).len()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn row_reduce(m: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let nrows = m.len();
    if nrows == 0 {
        return vec![];
    }
    let ncols = m[0].len();
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..nrows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solve `a x = b` (a given by rows). Returns the solution with free
/// variables set to zero, or None when inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let ncols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = row_reduce(&mut m);
    if piv.contains(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = m[r][ncols].clone();
    }
    Some(x)
}

pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c].clone();
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[c][c];
                for j in c..n {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    d
}

pub fn to_q_rows(rows: &[Vec<i64>]) -> Vec<Vec<Q>> {
    rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fract_of_negative() {
        assert_eq!(fract(&q(-1, 3)), q(2, 3));
        assert_eq!(floor(&q(-1, 3)), BigInt::from(-1));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(0, 0), BigInt::from(1));
    }

    #[test]
    fn solve_det() {
        let a = to_q_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(det(&a), qi(1));
        assert_eq!(solve(&a, &[qi(3), qi(2)]).unwrap(), vec![qi(1), qi(1)]);
    }
}
