//! Sparse polynomials over Q in the five equivariant/formal parameters.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{fmt_q, Q};

pub const NVARS: usize = 5;
pub const U1: usize = 0;
pub const U2: usize = 1;
pub const U4: usize = 2;
pub const Z: usize = 3;
pub const T: usize = 4;
pub const VAR_NAMES: [&str; NVARS] = ["u1", "u2", "u4", "z", "t"];

pub type Mono = [u32; NVARS];

/// Polynomial as a map from exponent vectors to nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    pub terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert([0; NVARS], c);
        }
        p
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn var(v: usize) -> Self {
        let mut m = [0; NVARS];
        m[v] = 1;
        let mut p = Poly::zero();
        p.terms.insert(m, Q::one());
        p
    }

    /// Linear polynomial Σ c_v x_v + c_const.
    pub fn linear(coeffs: &[Q; NVARS], konst: &Q) -> Self {
        let mut p = Self::constant(konst.clone());
        for (v, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut m = [0; NVARS];
                m[v] = 1;
                p.terms.insert(m, c.clone());
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&[0; NVARS]).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = *m1;
                for v in 0..NVARS {
                    m[v] += m2[v];
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m[v]).max().unwrap_or(0)
    }

    /// Coefficients of powers of x_v, as polynomials free of x_v.
    pub fn coefficients_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let mut m2 = *m;
            let k = m2[v] as usize;
            m2[v] = 0;
            out[k].add_term(m2, c.clone());
        }
        out
    }

    /// Substitute each variable by a polynomial.
    pub fn substitute(&self, images: &[Poly; NVARS]) -> Poly {
        let mut cache: Vec<Vec<Poly>> = (0..NVARS).map(|v| vec![Poly::one(), images[v].clone()]).collect();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for v in 0..NVARS {
                let e = m[v] as usize;
                while cache[v].len() <= e {
                    let next = cache[v].last().unwrap().mul(&images[v]);
                    cache[v].push(next);
                }
                if e > 0 {
                    term = term.mul(&cache[v][e]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Largest power of x_v dividing the polynomial.
    pub fn valuation_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m[v]).min().unwrap_or(0)
    }

    pub fn is_homogeneous_linear_free_of(&self, v: usize) -> bool {
        self.terms.keys().all(|m| m[v] == 0)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> = (0..NVARS)
                .filter(|&v| m[v] > 0)
                .map(|v| if m[v] == 1 { VAR_NAMES[v].to_string() } else { format!("{}^{}", VAR_NAMES[v], m[v]) })
                .collect();
            let cs = fmt_q(c);
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{cs}")?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "({cs})*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
