//! Truncated multivariate series with fractional exponents, and lattice
//! point enumeration in extended Mori cones.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{fmt_q, fract, qb, qi, Q};
use crate::eqalg::{fmt_eq, EqRational};
use crate::error::{Error, Result};
use crate::stackyfan::{Cone, ExtendedStackyFan, SectorLabel};

/// Coefficient ring of a series.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &Q) -> Self;
    fn render(&self) -> String;
}

impl Coeff for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &Q) -> Self {
        self * c
    }
    fn render(&self) -> String {
        fmt_q(self)
    }
}

impl Coeff for EqRational {
    fn zero() -> Self {
        EqRational::zero()
    }
    fn one() -> Self {
        EqRational::one()
    }
    fn is_zero(&self) -> bool {
        EqRational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        EqRational::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        EqRational::mul(self, o)
    }
    fn scale(&self, c: &Q) -> Self {
        EqRational::scale(self, c)
    }
    fn render(&self) -> String {
        fmt_eq(self)
    }
}

/// Shape shared by series that may be combined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesShape {
    pub vars: Vec<String>,
    /// Exponents of variable i are multiples of 1/denom[i].
    pub denom: Vec<i64>,
    /// Positive weight of each variable.
    pub grading: Vec<Q>,
    pub bound: Q,
}

impl SeriesShape {
    pub fn new(vars: &[&str], denom: i64, bound: i64) -> Self {
        SeriesShape {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            denom: vec![denom; vars.len()],
            grading: vec![qi(1); vars.len()],
            bound: qi(bound),
        }
    }

    fn scaled(&self, exps: &[Q]) -> Vec<i64> {
        exps.iter()
            .zip(&self.denom)
            .map(|(e, d)| {
                let s = e * qi(*d);
                assert!(s.is_integer(), "exponent {e} not a multiple of 1/{d}");
                s.to_integer().to_i64().unwrap()
            })
            .collect()
    }

    /// Whether a monomial with these exponents survives truncation.
    pub fn degree_ok(&self, exps: &[Q]) -> bool {
        exps.iter().zip(&self.grading).map(|(e, g)| e * g).sum::<Q>() <= self.bound
    }

    fn degree_scaled(&self, k: &[i64]) -> Q {
        k.iter().zip(&self.denom).zip(&self.grading).map(|((x, d), g)| Q::new(BigInt::from(*x), BigInt::from(*d)) * g).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<C: Coeff> {
    pub shape: SeriesShape,
    pub terms: BTreeMap<Vec<i64>, C>,
}

impl<C: Coeff> TruncatedSeries<C> {
    pub fn zero(shape: &SeriesShape) -> Self {
        TruncatedSeries { shape: shape.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(shape: &SeriesShape, c: C) -> Self {
        let mut s = Self::zero(shape);
        s.add_term(&vec![qi(0); shape.vars.len()], c);
        s
    }

    pub fn one(shape: &SeriesShape) -> Self {
        Self::constant(shape, C::one())
    }

    pub fn monomial(shape: &SeriesShape, exps: &[Q], c: C) -> Self {
        let mut s = Self::zero(shape);
        s.add_term(exps, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self, key: &[i64]) -> Vec<Q> {
        key.iter().zip(&self.shape.denom).map(|(x, d)| Q::new(BigInt::from(*x), BigInt::from(*d))).collect()
    }

    pub fn degree(&self, exps: &[Q]) -> Q {
        exps.iter().zip(&self.shape.grading).map(|(e, g)| e * g).sum()
    }

    /// Add c·x^exps unless it lies above the bound.
    pub fn add_term(&mut self, exps: &[Q], c: C) {
        let k = self.shape.scaled(exps);
        self.add_scaled(k, c);
    }

    fn add_scaled(&mut self, k: Vec<i64>, c: C) {
        if c.is_zero() || self.shape.degree_scaled(&k) > self.shape.bound {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn coefficient(&self, exps: &[Q]) -> C {
        self.terms.get(&self.shape.scaled(exps)).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.terms.get(&vec![0; self.shape.vars.len()]).cloned().unwrap_or_else(C::zero)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.shape != o.shape {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape.vars, o.shape.vars)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_scaled(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(&self.shape);
        for (k, x) in &self.terms {
            out.add_scaled(k.clone(), x.scale(c));
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&qi(-1)))
    }

    pub fn mul_coeff(&self, c: &C) -> Self {
        let mut out = Self::zero(&self.shape);
        for (k, x) in &self.terms {
            out.add_scaled(k.clone(), x.mul(c));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = Self::zero(&self.shape);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let k: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                out.add_scaled(k, c1.mul(c2));
            }
        }
        Ok(out)
    }

    fn min_positive_degree(&self) -> Option<Q> {
        self.terms.keys().map(|k| self.shape.degree_scaled(k)).filter(|d| d.is_positive()).min()
    }

    /// exp of a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::ShapeMismatch("exp needs zero constant term".into()));
        }
        let mut out = Self::one(&self.shape);
        let Some(step) = self.min_positive_degree() else { return Ok(out) };
        let mut pw = Self::one(&self.shape);
        let mut n = 1i64;
        loop {
            pw = pw.mul(self)?.scale(&Q::new(BigInt::one(), BigInt::from(n)));
            if pw.is_zero() || qi(n) * &step > self.shape.bound {
                break;
            }
            out = out.add(&pw)?;
            n += 1;
        }
        Ok(out)
    }

    /// log of a series with constant term one.
    pub fn log(&self) -> Result<Self> {
        if self.constant_term() != C::one() {
            return Err(Error::ShapeMismatch("log needs unit constant term".into()));
        }
        let u = self.sub(&Self::one(&self.shape))?;
        let mut out = Self::zero(&self.shape);
        let Some(step) = u.min_positive_degree() else { return Ok(out) };
        let mut pw = Self::one(&self.shape);
        let mut n = 1i64;
        loop {
            pw = pw.mul(&u)?;
            if pw.is_zero() || qi(n) * &step > self.shape.bound {
                break;
            }
            let sign = if n % 2 == 1 { qi(1) } else { qi(-1) };
            out = out.add(&pw.scale(&(sign / qi(n))))?;
            n += 1;
        }
        Ok(out)
    }

    /// Sorted "exponent-tuple : coefficient" records.
    pub fn records(&self) -> Vec<String> {
        self.terms
            .iter()
            .map(|(k, c)| format!("({}) : {}", self.exponents(k).iter().map(fmt_q).join(","), c.render()))
            .collect()
    }

    /// First differing monomial, if any.
    pub fn first_mismatch(&self, o: &Self) -> Option<(Vec<Q>, C, C)> {
        let keys: std::collections::BTreeSet<&Vec<i64>> = self.terms.keys().chain(o.terms.keys()).collect();
        for k in keys {
            let a = self.terms.get(k).cloned().unwrap_or_else(C::zero);
            let b = o.terms.get(k).cloned().unwrap_or_else(C::zero);
            if a != b {
                return Some((self.exponents(k), a, b));
            }
        }
        None
    }
}

/// Outcome of a verification: one record per compared key.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub records: Vec<String>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report { title: title.to_string(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn record(&mut self, line: String) {
        self.records.push(line);
    }

    pub fn fail(&mut self, line: String) {
        self.failures.push(line);
    }

    pub fn merge(&mut self, other: Report) {
        let prefix = if other.title.is_empty() { String::new() } else { format!("{} ", other.title) };
        self.records.extend(other.records.into_iter().map(|r| format!("{prefix}{r}")));
        self.failures.extend(other.failures.into_iter().map(|r| format!("{prefix}{r}")));
    }

    /// Records followed by failures, then a summary line.
    pub fn lines(&self) -> Vec<String> {
        let mut out = self.records.clone();
        out.extend(self.failures.iter().map(|f| format!("MISMATCH {f}")));
        out.push(format!("{} : {}", self.title, if self.passed() { "pass" } else { "FAIL" }));
        out
    }
}

/// Coefficientwise comparison; every monomial present on either side is
/// recorded as "(exps) : lhs = rhs".
pub fn compare_series<C: Coeff>(title: &str, lhs: &TruncatedSeries<C>, rhs: &TruncatedSeries<C>) -> Report {
    let mut rep = Report::new(title);
    if lhs.shape != rhs.shape {
        rep.fail("shape mismatch".into());
        return rep;
    }
    let keys: std::collections::BTreeSet<&Vec<i64>> = lhs.terms.keys().chain(rhs.terms.keys()).collect();
    for k in keys {
        let a = lhs.terms.get(k).cloned().unwrap_or_else(C::zero);
        let b = rhs.terms.get(k).cloned().unwrap_or_else(C::zero);
        let exps = lhs.exponents(k).iter().map(fmt_q).join(",");
        let line = format!("({exps}) : {} = {}", a.render(), b.render());
        if a == b {
            rep.record(line);
        } else {
            rep.fail(line);
        }
    }
    rep
}

/// A lattice point of an extended σ-Mori cone.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MoriPoint {
    pub cone: Cone,
    /// (i, ⟨D_i,β⟩) for i outside the cone.
    pub outside: Vec<(usize, i64)>,
    /// ⟨D_i,β⟩ for every vector.
    pub pairing: Vec<Q>,
    pub sector: SectorLabel,
}

/// Class with prescribed integer pairings n_i on the vectors outside σ.
pub fn class_from_outside(fan: &ExtendedStackyFan, sigma: &Cone, outside: &[(usize, i64)]) -> Vec<Q> {
    let n = fan.num_vectors();
    let mut rhs = vec![qi(0); fan.rank];
    for &(i, k) in outside {
        for r in 0..fan.rank {
            rhs[r] -= qi(k) * qi(fan.vectors[i][r]);
        }
    }
    let c = crate::arith::solve(&fan.cone_rows_q(sigma), &rhs).expect("cone not full-dimensional");
    let mut out = vec![qi(0); n];
    for (p, &i) in sigma.0.iter().enumerate() {
        out[i] = c[p].clone();
    }
    for &(i, k) in outside {
        out[i] = qi(k);
    }
    out
}

/// v(β) = Σ ⟨-⟨D_i,β⟩⟩ b_i over the rays of σ.
pub fn sector_of_class(fan: &ExtendedStackyFan, sigma: &Cone, pairing: &[Q]) -> SectorLabel {
    fan.label_from_coeffs(sigma, sigma.0.iter().map(|&i| fract(&-pairing[i].clone())).collect())
}

/// All β ∈ K_eff,σ with grading(β) ≤ bound; the grading is a
/// coefficient vector over the D_i.
pub fn enumerate_keff(fan: &ExtendedStackyFan, sigma: &Cone, grading: &[Q], bound: &Q) -> Result<Vec<MoriPoint>> {
    let outside: Vec<usize> = (0..fan.num_vectors()).filter(|i| !sigma.contains(*i)).collect();
    let pair = |p: &[Q]| -> Q { p.iter().zip(grading).map(|(a, b)| a * b).sum() };
    let steps: Vec<Q> = outside.iter().map(|&i| pair(&class_from_outside(fan, sigma, &[(i, 1)]))).collect();
    if steps.iter().any(|s| !s.is_positive()) {
        return Err(Error::GradingNotPositive);
    }
    let mut out = vec![];
    let mut cur = vec![0i64; outside.len()];
    fn rec(
        pos: usize,
        budget: Q,
        steps: &[Q],
        cur: &mut Vec<i64>,
        emit: &mut dyn FnMut(&[i64]),
    ) {
        if pos == steps.len() {
            emit(cur);
            return;
        }
        let mut k = 0i64;
        let mut left = budget.clone();
        while !left.is_negative() {
            cur[pos] = k;
            rec(pos + 1, left.clone(), steps, cur, emit);
            k += 1;
            left -= &steps[pos];
        }
        cur[pos] = 0;
    }
    rec(0, bound.clone(), &steps, &mut cur, &mut |n: &[i64]| {
        let tuple: Vec<(usize, i64)> = outside.iter().copied().zip(n.iter().copied()).collect();
        let pairing = class_from_outside(fan, sigma, &tuple);
        let sector = sector_of_class(fan, sigma, &pairing);
        out.push(MoriPoint { cone: sigma.clone(), outside: tuple, pairing, sector });
    });
    out.sort();
    Ok(out)
}

/// lcm of the stabilizer orders of the maximal cones.
pub fn exponent_denominator(fan: &ExtendedStackyFan) -> i64 {
    fan.maximal_cones
        .iter()
        .map(|c| BigInt::from(fan.stabilizer_order(c)))
        .fold(BigInt::one(), |a, b| num_integer::Integer::lcm(&a, &b))
        .to_i64()
        .unwrap()
}

pub fn qvec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| qi(x)).collect()
}

pub fn q_of(x: &BigInt) -> Q {
    qb(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    fn shape1(bound: i64) -> SeriesShape {
        SeriesShape::new(&["q"], 1, bound)
    }

    #[test]
    fn exp_log_inverse() {
        let sh = shape1(6);
        let mut s = TruncatedSeries::<Q>::one(&sh);
        s.add_term(&[qi(1)], qi(1));
        assert_eq!(s.log().unwrap().exp().unwrap(), s);
        assert_eq!(TruncatedSeries::<Q>::zero(&sh).exp().unwrap(), TruncatedSeries::one(&sh));
    }

    #[test]
    fn truncated_product() {
        let sh = shape1(2);
        let mut a = TruncatedSeries::<Q>::zero(&sh);
        let mut b = TruncatedSeries::<Q>::zero(&sh);
        for k in 1..=3 {
            a.add_term(&[qi(k)], qi(2));
            b.add_term(&[qi(k)], qi(3));
        }
        let p = a.mul(&b).unwrap();
        assert_eq!(p.records(), vec!["(2) : 6".to_string()]);
    }

    #[test]
    fn fractional_exponents() {
        let sh = SeriesShape::new(&["q"], 3, 2);
        let mut a = TruncatedSeries::<Q>::zero(&sh);
        a.add_term(&[q(1, 3)], qi(1));
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.coefficient(&[q(2, 3)]), qi(1));
    }

    #[test]
    fn keff_kp2() {
        let fan = ExtendedStackyFan::new(
            3,
            vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1], vec![1, 0, 1]],
            vec![],
            vec![vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]],
        );
        let grading = vec![qi(1), qi(0), qi(0), qi(0)];
        let pts = enumerate_keff(&fan, &Cone(vec![0, 1, 3]), &grading, &qi(3)).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[2].pairing, qvec(&[2, 2, 2, -6]));
        let bad = vec![qi(0), qi(0), qi(0), qi(1)];
        assert_eq!(enumerate_keff(&fan, &Cone(vec![0, 1, 3]), &bad, &qi(3)).unwrap_err(), Error::GradingNotPositive);
    }
}
