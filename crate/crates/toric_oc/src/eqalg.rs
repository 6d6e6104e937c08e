//! Exact equivariant algebra: rational functions whose denominators are
//! products of linear forms, restriction maps, cohomology classes on the
//! inertia stack and the localized orbifold Poincare pairing.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{binomial, fmt_q, qb, qi, Q};
use crate::error::{Error, Result};
use crate::poly::{Poly, NVARS, T, U1, U2, U4, VAR_NAMES, Z};
use crate::stackyfan::{Cone, ExtendedStackyFan, SectorLabel};

/// Linear form Σ c_v x_v + c, scaled so its first nonzero coefficient is 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinForm {
    pub coeffs: [Q; NVARS],
    pub konst: Q,
}

impl LinForm {
    /// Normalize; returns the form and the scalar removed from it, or
    /// None if the form is constant.
    fn normalized(coeffs: [Q; NVARS], konst: Q) -> Option<(LinForm, Q)> {
        let lead = coeffs.iter().find(|c| !c.is_zero())?.clone();
        let coeffs = coeffs.map(|c| c / &lead);
        let konst = konst / &lead;
        Some((LinForm { coeffs, konst }, lead))
    }

    fn from_poly(p: &Poly) -> std::result::Result<(Option<LinForm>, Q), ()> {
        let mut coeffs: [Q; NVARS] = std::array::from_fn(|_| Q::zero());
        let mut konst = Q::zero();
        for (m, c) in &p.terms {
            let deg: u32 = m.iter().sum();
            match deg {
                0 => konst = c.clone(),
                1 => coeffs[m.iter().position(|&e| e == 1).unwrap()] = c.clone(),
                _ => return Err(()),
            }
        }
        match Self::normalized(coeffs, konst.clone()) {
            Some((lf, s)) => Ok((Some(lf), s)),
            None => Ok((None, konst)),
        }
    }

    pub fn to_poly(&self) -> Poly {
        Poly::linear(&self.coeffs, &self.konst)
    }

    fn lead_var(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap()
    }

    fn is_var(&self, v: usize) -> bool {
        self.konst.is_zero() && (0..NVARS).all(|w| if w == v { self.coeffs[w].is_one() } else { self.coeffs[w].is_zero() })
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

/// Divide `p` by the linear form, if it divides exactly.
fn divide_linear(p: &Poly, lf: &LinForm) -> Option<Poly> {
    let v = lf.lead_var();
    // L = x_v - a with a free of x_v
    let mut a_coeffs = lf.coeffs.clone().map(|c| -c);
    a_coeffs[v] = Q::zero();
    let a = Poly::linear(&a_coeffs, &-lf.konst.clone());
    let c = p.coefficients_in(v);
    let n = c.len() - 1;
    if n == 0 {
        return if p.is_zero() { Some(Poly::zero()) } else { None };
    }
    let mut b = vec![Poly::zero(); n];
    b[n - 1] = c[n].clone();
    for k in (1..n).rev() {
        b[k - 1] = c[k].add(&a.mul(&b[k]));
    }
    let rem = c[0].add(&a.mul(&b[0]));
    if !rem.is_zero() {
        return None;
    }
    let xv = Poly::var(v);
    let mut q = Poly::zero();
    let mut pw = Poly::one();
    for bk in &b {
        q = q.add(&bk.mul(&pw));
        pw = pw.mul(&xv);
    }
    Some(q)
}

/// Rational function num / Π L^e in (u1, u2, u4, z, t).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct EqRational {
    pub num: Poly,
    pub den: BTreeMap<LinForm, u32>,
}

impl EqRational {
    pub fn zero() -> Self {
        EqRational::default()
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn from_q(c: Q) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_q(qi(n))
    }

    pub fn from_poly(num: Poly) -> Self {
        EqRational { num, den: BTreeMap::new() }
    }

    pub fn var(v: usize) -> Self {
        Self::from_poly(Poly::var(v))
    }

    /// Linear combination Σ c_v x_v.
    pub fn linear(coeffs: &[Q; NVARS]) -> Self {
        Self::from_poly(Poly::linear(coeffs, &Q::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else if self.num.is_zero() {
            Some(Q::zero())
        } else {
            None
        }
    }

    fn reduce(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let keys: Vec<LinForm> = self.den.keys().cloned().collect();
        for lf in keys {
            while let Some(e) = self.den.get(&lf).copied() {
                match divide_linear(&self.num, &lf) {
                    Some(q) => {
                        self.num = q;
                        if e == 1 {
                            self.den.remove(&lf);
                        } else {
                            self.den.insert(lf.clone(), e - 1);
                        }
                    }
                    None => break,
                }
            }
        }
        self
    }

    pub fn mul(&self, other: &EqRational) -> EqRational {
        if self.is_zero() || other.is_zero() {
            return EqRational::zero();
        }
        let mut den = self.den.clone();
        for (lf, e) in &other.den {
            *den.entry(lf.clone()).or_insert(0) += e;
        }
        EqRational { num: self.num.mul(&other.num), den }.reduce()
    }

    pub fn scale(&self, c: &Q) -> EqRational {
        if c.is_zero() {
            return EqRational::zero();
        }
        EqRational { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn neg(&self) -> EqRational {
        self.scale(&-Q::one())
    }

    pub fn add(&self, other: &EqRational) -> EqRational {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (lf, e) in &other.den {
            let x = den.entry(lf.clone()).or_insert(0);
            *x = (*x).max(*e);
        }
        let lift = |r: &EqRational| -> Poly {
            let mut p = r.num.clone();
            for (lf, e) in &den {
                let have = r.den.get(lf).copied().unwrap_or(0);
                if *e > have {
                    p = p.mul(&lf.to_poly().pow(e - have));
                }
            }
            p
        };
        let num = lift(self).add(&lift(other));
        EqRational { num, den }.reduce()
    }

    pub fn sub(&self, other: &EqRational) -> EqRational {
        self.add(&other.neg())
    }

    /// Reciprocal; the numerator must be constant or linear.
    pub fn recip(&self) -> EqRational {
        let (lf, scalar) = LinForm::from_poly(&self.num).expect("cannot invert a nonlinear numerator");
        assert!(!scalar.is_zero(), "division by zero");
        let mut num = Poly::constant(scalar.recip());
        for (l, e) in &self.den {
            num = num.mul(&l.to_poly().pow(*e));
        }
        let mut den = BTreeMap::new();
        if let Some(lf) = lf {
            den.insert(lf, 1);
        }
        EqRational { num, den }.reduce()
    }

    pub fn div(&self, other: &EqRational) -> EqRational {
        self.mul(&other.recip())
    }

    pub fn pow(&self, e: i64) -> EqRational {
        let base = if e < 0 { self.recip() } else { self.clone() };
        (0..e.unsigned_abs()).fold(EqRational::one(), |acc, _| acc.mul(&base))
    }

    /// Substitute each variable by a linear polynomial.
    pub fn substitute(&self, images: &[Poly; NVARS]) -> Result<EqRational> {
        let mut num = self.num.substitute(images);
        let mut den = BTreeMap::new();
        for (lf, e) in &self.den {
            let img = lf.to_poly().substitute(images);
            let (nl, scalar) = LinForm::from_poly(&img).expect("nonlinear substitution");
            match nl {
                None if scalar.is_zero() => return Err(Error::PoleAtRestriction(lf.to_string())),
                None => num = num.scale(&scalar.recip().pow(*e as i32)),
                Some(nl) => {
                    num = num.scale(&scalar.recip().pow(*e as i32));
                    *den.entry(nl).or_insert(0) += e;
                }
            }
        }
        Ok(EqRational { num, den }.reduce())
    }

    pub fn restrict(&self, sub: Restriction) -> Result<EqRational> {
        let mut images: [Poly; NVARS] = std::array::from_fn(Poly::var);
        match sub {
            Restriction::U4Zero => images[U4] = Poly::zero(),
            Restriction::U2ToFU1(f) => images[U2] = Poly::var(U1).scale(&qi(f)),
            Restriction::U2ToFU1PlusT(f) => images[U2] = Poly::var(U1).scale(&qi(f)).add(&Poly::var(T)),
            Restriction::TZero => images[T] = Poly::zero(),
            Restriction::ZZero => images[Z] = Poly::zero(),
        }
        self.substitute(&images)
    }

    /// Full closed-invariant restriction: u4 = 0, u2 = f u1 + t, t -> 0.
    pub fn restrict_brane(&self, f: i64) -> Result<EqRational> {
        self.restrict(Restriction::U4Zero)?.restrict(Restriction::U2ToFU1PlusT(f))?.restrict(Restriction::TZero)
    }

    /// Multiplicity of x_v as a factor (negative for poles).
    pub fn valuation_in(&self, v: usize) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        let pole = self.den.iter().filter(|(lf, _)| lf.is_var(v)).map(|(_, e)| *e as i64).sum::<i64>();
        self.num.valuation_in(v) as i64 - pole
    }

    /// Coefficient of z^n in the expansion at z = ∞.
    pub fn z_coeff(&self, n: i64) -> EqRational {
        let mut zfree: BTreeMap<LinForm, u32> = BTreeMap::new();
        let mut zfac: Vec<(Q, Poly, u32)> = vec![]; // (a, b, e) for (a z + b)^e
        let mut total_e: i64 = 0;
        for (lf, e) in &self.den {
            if lf.coeffs[Z].is_zero() {
                zfree.insert(lf.clone(), *e);
            } else {
                let a = lf.coeffs[Z].clone();
                let mut c = lf.coeffs.clone();
                c[Z] = Q::zero();
                zfac.push((a, Poly::linear(&c, &lf.konst), *e));
                total_e += *e as i64;
            }
        }
        let numc = self.num.coefficients_in(Z);
        let max_k = numc.len() as i64 - 1;
        // need S_j for j = -n - E + k, k = 0..=max_k
        let order = -n - total_e + max_k;
        if order < 0 {
            return EqRational::zero();
        }
        let order = order as usize;
        // S(y) = Π (1 + (b/a) y)^{-e}
        let mut s = vec![Poly::zero(); order + 1];
        s[0] = Poly::one();
        let mut scale = Q::one();
        for (a, b, e) in &zfac {
            scale /= a.pow(*e as i32);
            let c = b.scale(&a.recip());
            let mut factor = vec![Poly::zero(); order + 1];
            let mut cpow = Poly::one();
            for (j, slot) in factor.iter_mut().enumerate() {
                let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
                let coef = sign * qb(&binomial(*e as i64 + j as i64 - 1, j as i64));
                *slot = cpow.scale(&coef);
                cpow = cpow.mul(&c);
            }
            let mut next = vec![Poly::zero(); order + 1];
            for i in 0..=order {
                if s[i].is_zero() {
                    continue;
                }
                for j in 0..=order - i {
                    next[i + j] = next[i + j].add(&s[i].mul(&factor[j]));
                }
            }
            s = next;
        }
        let mut num = Poly::zero();
        for (k, nk) in numc.iter().enumerate() {
            let j = -n - total_e + k as i64;
            if j >= 0 && (j as usize) <= order {
                num = num.add(&nk.mul(&s[j as usize]));
            }
        }
        EqRational { num: num.scale(&scale), den: zfree }.reduce()
    }

    /// Total degree (numerator minus denominator) if homogeneous.
    pub fn degree(&self) -> Option<i64> {
        let degs: Vec<u32> = self.num.terms.keys().map(|m| m.iter().sum()).unique().collect();
        if degs.len() != 1 {
            return if self.is_zero() { Some(0) } else { None };
        }
        if self.den.keys().any(|l| !l.konst.is_zero()) {
            return None;
        }
        Some(degs[0] as i64 - self.den.values().map(|e| *e as i64).sum::<i64>())
    }
}

impl fmt::Display for EqRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let d = self
            .den
            .iter()
            .map(|(l, e)| if *e == 1 { format!("({l})") } else { format!("({l})^{e}") })
            .join("*");
        write!(f, "({})/({})", self.num, d)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Restriction {
    U4Zero,
    U2ToFU1(i64),
    U2ToFU1PlusT(i64),
    TZero,
    ZZero,
}

/// Convert a character in the u-basis of a rank 3 or 4 fan into a
/// T'-weight (u3 dropped).
pub fn weight_from_character(chi: &[Q]) -> EqRational {
    let mut c: [Q; NVARS] = std::array::from_fn(|_| Q::zero());
    c[U1] = chi[0].clone();
    c[U2] = chi[1].clone();
    if chi.len() > 3 {
        c[U4] = chi[3].clone();
    }
    EqRational::linear(&c)
}

pub fn u1() -> EqRational {
    EqRational::var(U1)
}
pub fn u2() -> EqRational {
    EqRational::var(U2)
}
pub fn u4() -> EqRational {
    EqRational::var(U4)
}
pub fn zvar() -> EqRational {
    EqRational::var(Z)
}

pub fn var_name(v: usize) -> &'static str {
    VAR_NAMES[v]
}

/// T'-weight of the flag (τ,σ).
pub fn tangent_weight(fan: &ExtendedStackyFan, tau: &Cone, sigma: &Cone) -> EqRational {
    weight_from_character(&fan.tangent_weight(tau, sigma))
}

/// One monomial of a class: coefficient · Π D_i · 1_sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTerm {
    pub sector: Vec<BigInt>,
    pub coeff: EqRational,
    pub divisors: Vec<usize>,
}

/// Equivariant Chen-Ruan class as a finite sum of divisor monomials in
/// twisted sectors; sectors are keyed by their Box lattice point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CohClass {
    pub terms: Vec<ClassTerm>,
}

impl CohClass {
    pub fn zero() -> Self {
        CohClass::default()
    }

    pub fn term(sector: Vec<BigInt>, coeff: EqRational, divisors: Vec<usize>) -> Self {
        CohClass { terms: vec![ClassTerm { sector, coeff, divisors }] }
    }

    pub fn unit(rank: usize) -> Self {
        Self::term(vec![BigInt::zero(); rank], EqRational::one(), vec![])
    }

    pub fn add(mut self, other: CohClass) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(&self, c: &EqRational) -> Self {
        CohClass {
            terms: self
                .terms
                .iter()
                .map(|t| ClassTerm { sector: t.sector.clone(), coeff: t.coeff.mul(c), divisors: t.divisors.clone() })
                .collect(),
        }
    }
}

/// Restriction of 𝒟_i to the fixed point of σ: the weight of the facet
/// omitting i, or 0 when i ∉ σ.
pub fn divisor_restrict(fan: &ExtendedStackyFan, i: usize, sigma: &Cone) -> EqRational {
    if sigma.contains(i) {
        tangent_weight(fan, &sigma.without(i), sigma)
    } else {
        EqRational::zero()
    }
}

pub fn class_restrict(fan: &ExtendedStackyFan, a: &CohClass, sigma: &Cone, j: &SectorLabel) -> EqRational {
    let mut acc = EqRational::zero();
    for t in &a.terms {
        if t.sector != j.point {
            continue;
        }
        let mut v = t.coeff.clone();
        for &i in &t.divisors {
            v = v.mul(&divisor_restrict(fan, i, sigma));
        }
        acc = acc.add(&v);
    }
    acc
}

/// Euler class of the j-fixed part of the tangent space at σ.
pub fn fixed_euler(fan: &ExtendedStackyFan, sigma: &Cone, j: &SectorLabel) -> EqRational {
    fixed_euler_factors(fan, sigma, j).iter().fold(EqRational::one(), |e, w| e.mul(w))
}

/// The linear factors of [`fixed_euler`].
pub fn fixed_euler_factors(fan: &ExtendedStackyFan, sigma: &Cone, j: &SectorLabel) -> Vec<EqRational> {
    sigma.0.iter().filter(|&&i| j.coeff_of(i).is_zero()).map(|&i| divisor_restrict(fan, i, sigma)).collect()
}

/// Localized orbifold Poincare pairing.
pub fn inertia_pairing(fan: &ExtendedStackyFan, a: &CohClass, b: &CohClass) -> Result<EqRational> {
    let mut total = EqRational::zero();
    for sigma in &fan.maximal_cones {
        let g = fan.stabilizer_order(sigma);
        for j in fan.box_elements(sigma) {
            let ja = class_restrict(fan, a, sigma, &j);
            if ja.is_zero() {
                continue;
            }
            let jb = class_restrict(fan, b, sigma, &fan.inv(&j));
            if jb.is_zero() {
                continue;
            }
            let mut v = ja.mul(&jb);
            for w in fixed_euler_factors(fan, sigma, &j) {
                if w.is_zero() {
                    return Err(Error::NonConvergentPairing(format!("cone {} sector {}", sigma, j)));
                }
                v = v.div(&w);
            }
            total = total.add(&v.scale(&Q::new(BigInt::one(), BigInt::from(g))));
        }
    }
    Ok(total)
}

pub fn fmt_eq(x: &EqRational) -> String {
    match x.as_constant() {
        Some(c) => fmt_q(&c),
        None => x.to_string(),
    }
}

pub fn is_negative_constant(x: &EqRational) -> bool {
    x.as_constant().map(|c| c.is_negative()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    fn lin(a: i64, b: i64, c: i64) -> EqRational {
        let mut k: [Q; NVARS] = std::array::from_fn(|_| Q::zero());
        k[U1] = qi(a);
        k[U2] = qi(b);
        k[U4] = qi(c);
        EqRational::linear(&k)
    }

    #[test]
    fn cancel_and_canonical() {
        let x = lin(1, 1, 0);
        let y = lin(2, 0, 1);
        let r = x.mul(&y).div(&y);
        assert_eq!(r, x);
        let s = x.recip().add(&x.recip());
        assert_eq!(s, x.recip().scale(&qi(2)));
        let a = x.recip().sub(&y.recip());
        let b = y.sub(&x).div(&x).div(&y);
        assert_eq!(a, b);
    }

    #[test]
    fn restriction_examples() {
        // (u2 - f u1)/(m^2 u1) at u2 = f u1
        let f = 3;
        let e = lin(-f, 1, 0).div(&lin(4, 0, 0));
        assert!(e.restrict(Restriction::U2ToFU1(f)).unwrap().is_zero());
        let e = u4().div(&lin(1, 0, 1));
        assert!(e.restrict(Restriction::U4Zero).unwrap().is_zero());
        let e = u4().recip();
        assert!(matches!(e.restrict(Restriction::U4Zero), Err(Error::PoleAtRestriction(_))));
    }

    #[test]
    fn t_limit_cancels_first() {
        // (u2 - u1)/(u2 - u1) -> 1 even though the factor vanishes at u2 = u1
        let e = lin(-1, 1, 0).mul(&u1()).div(&lin(-1, 1, 0));
        assert_eq!(e.restrict_brane(1).unwrap(), u1());
    }

    #[test]
    fn z_expansion() {
        // 1/(z(z - u1)) = z^-2 (1 + u1/z + ...)
        let zz = zvar();
        let e = zz.recip().mul(&zz.sub(&u1()).recip());
        assert_eq!(e.z_coeff(-2), EqRational::one());
        assert_eq!(e.z_coeff(-3), u1());
        assert_eq!(e.z_coeff(-1), EqRational::zero());
        // (z + u1)^2 / z -> z + 2 u1 + u1^2/z
        let p = zz.add(&u1());
        let e = p.mul(&p).div(&zz);
        assert_eq!(e.z_coeff(-1), u1().mul(&u1()));
        assert_eq!(e.z_coeff(0), u1().scale(&qi(2)));
        let _ = q(1, 2);
    }

    #[test]
    fn valuation() {
        let e = u4().mul(&u4()).div(&lin(1, 0, 1)).div(&u4());
        assert_eq!(e.valuation_in(U4), 1);
    }
}
