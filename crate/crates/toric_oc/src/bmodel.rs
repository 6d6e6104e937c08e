//! B-model side: charge lattices, nef cones, the A-series and mirror maps,
//! the disk function W and the [z^-2] pairing of the I-function.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{ceil, factorial, floor, fract, is_int, qb, qi, rank, row_reduce, solve, Q};
use crate::eqalg::{class_restrict, divisor_restrict, fixed_euler_factors, u1, u2, u4, zvar, CohClass, EqRational};
use crate::error::{Error, Result};
use crate::lattice::{kernel_basis, IntMatrix};
use crate::maybe_parallel::IntoMaybeParallelRefIterator;
use crate::occonstruct::{CohomologyBases, DualGeometry};
use crate::seriesengine::{class_from_outside, enumerate_keff, exponent_denominator, MoriPoint, SeriesShape, TruncatedSeries};
use crate::stackyfan::{Cone, ExtendedStackyFan, SectorLabel};

#[cfg(feature = "parallel")]
use rayon::iter::ParallelIterator;

/// The lattice 𝕃 of relations among the fan vectors, with an integral
/// basis given by pairing vectors (⟨D_i, l⟩)_i.
#[derive(Clone, Debug)]
pub struct ChargeLattice {
    pub basis: Vec<Vec<Q>>,
    n: usize,
}

impl ChargeLattice {
    pub fn new(fan: &ExtendedStackyFan) -> Self {
        let n = fan.num_vectors();
        let a = IntMatrix::from_columns(&fan.vectors, fan.rank);
        let k = kernel_basis(&a);
        let basis = (0..k.cols).map(|j| k.column(j).iter().map(qb).collect()).collect();
        ChargeLattice { basis, n }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn num_vectors(&self) -> usize {
        self.n
    }

    /// ⟨Σ c_i D_i, β⟩.
    pub fn pair(&self, coeffs: &[Q], beta: &[Q]) -> Q {
        coeffs.iter().zip(beta).map(|(c, b)| c * b).sum()
    }

    /// Values of Σ c_i D_i on the basis.
    pub fn functional(&self, coeffs: &[Q]) -> Vec<Q> {
        self.basis.iter().map(|l| self.pair(coeffs, l)).collect()
    }

    /// Coordinates of a pairing vector in the basis.
    pub fn coordinates(&self, beta: &[Q]) -> Vec<Q> {
        let rows: Vec<Vec<Q>> = (0..self.n).map(|i| self.basis.iter().map(|l| l[i].clone()).collect()).collect();
        solve(&rows, beta).expect("not a relation")
    }
}

/// Generator β^{σ,i} of K_eff,σ: pairing 1 with D_i, 0 with the other
/// vectors outside σ.
pub fn keff_generator(fan: &ExtendedStackyFan, sigma: &Cone, i: usize) -> Vec<Q> {
    class_from_outside(fan, sigma, &[(i, 1)])
}

/// A vector spanning the kernel of `rows` (k columns), when it is a line.
fn null_line(rows: &[Vec<Q>], k: usize) -> Option<Vec<Q>> {
    let mut m = rows.to_vec();
    let piv = row_reduce(&mut m);
    if piv.len() + 1 != k {
        return None;
    }
    let free = (0..k).find(|c| !piv.contains(c))?;
    let mut y = vec![Q::zero(); k];
    y[free] = Q::one();
    for (r, &c) in piv.iter().enumerate() {
        y[c] = -m[r][free].clone();
    }
    Some(y)
}

fn primitive(v: &[Q]) -> Vec<Q> {
    let l = v.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * qb(&l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    ints.iter().map(|x| qb(&(x / &g))).collect()
}

fn base_cone(fan: &ExtendedStackyFan) -> Cone {
    let s0 = Cone((0..fan.rank).collect());
    if fan.maximal_cones.contains(&s0) {
        s0
    } else {
        fan.maximal_cones[0].clone()
    }
}

/// Primitive ray generators of the extended nef cone, as coefficient
/// vectors over the D_i supported off the base cone.
pub fn extended_nef(fan: &ExtendedStackyFan) -> Result<Vec<Vec<Q>>> {
    let lat = ChargeLattice::new(fan);
    let k = lat.rank();
    if k == 0 {
        return Ok(vec![]);
    }
    let mut ineq: Vec<Vec<Q>> = vec![];
    for s in &fan.maximal_cones {
        for i in (0..fan.num_vectors()).filter(|i| !s.contains(*i)) {
            let c = lat.coordinates(&keff_generator(fan, s, i));
            if !ineq.contains(&c) {
                ineq.push(c);
            }
        }
    }
    let mut rays: Vec<Vec<Q>> = vec![];
    for subset in (0..ineq.len()).combinations(k - 1) {
        let rows: Vec<Vec<Q>> = subset.iter().map(|&r| ineq[r].clone()).collect();
        let Some(y) = null_line(&rows, k) else { continue };
        for cand in [y.clone(), y.iter().map(|x| -x).collect()] {
            let ok = ineq.iter().all(|g| !lat.pair(g, &cand).is_negative());
            if ok {
                let p = primitive(&cand);
                if !rays.contains(&p) {
                    rays.push(p);
                }
            }
        }
    }
    if rays.len() != k || rank(&rays) != k {
        return Err(Error::NefNotSimplicial);
    }
    let base = base_cone(fan);
    let outside: Vec<usize> = (0..fan.num_vectors()).filter(|i| !base.contains(*i)).collect();
    let mut out: Vec<Vec<Q>> = rays
        .iter()
        .map(|y| {
            let rows: Vec<Vec<Q>> = lat.basis.iter().map(|l| outside.iter().map(|&i| l[i].clone()).collect()).collect();
            let a = solve(&rows, y).expect("outside divisors span the dual");
            let mut d = vec![Q::zero(); fan.num_vectors()];
            for (c, &i) in a.into_iter().zip(&outside) {
                d[i] = c;
            }
            d
        })
        .collect();
    out.sort();
    Ok(out)
}

/// K_eff of the whole fan within the grading bound, one point per class.
pub fn keff_union(fan: &ExtendedStackyFan, grading: &[Q], bound: &Q) -> Result<Vec<MoriPoint>> {
    let mut seen: BTreeMap<Vec<Q>, MoriPoint> = BTreeMap::new();
    for s in &fan.maximal_cones {
        for p in enumerate_keff(fan, s, grading, bound)? {
            seen.entry(p.pairing.clone()).or_insert(p);
        }
    }
    Ok(seen.into_values().collect())
}

fn sum_vectors(vs: &[Vec<Q>], n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for v in vs {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out
}

/// ⟨H_a, β⟩ for every a, padded with zeros to `len`.
fn exponents(h: &[Vec<Q>], beta: &[Q], len: usize) -> Vec<Q> {
    let mut e: Vec<Q> = h.iter().map(|ha| ha.iter().zip(beta).map(|(a, b)| a * b).sum()).collect();
    e.resize(len, Q::zero());
    e
}

/// Series shape in (q_1, …, q_k, x) suited to both geometries of a dual.
pub fn series_shape(dual: &DualGeometry, bases: &CohomologyBases, bound: i64) -> SeriesShape {
    let k = bases.h.len();
    let mut vars: Vec<String> = (1..=k).map(|a| format!("q{a}")).collect();
    vars.push("x".into());
    let mut den = BigInt::from(exponent_denominator(&dual.fan));
    for v in bases.h_tilde.iter().flatten() {
        den = den.lcm(v.denom());
    }
    let den = den.to_i64().expect("denominator overflow");
    SeriesShape { vars, denom: vec![den; k + 1], grading: vec![Q::one(); k + 1], bound: qi(bound) }
}

/// The x → 0 value of the I-function ratio factor of a vector with
/// pairing k; None when it vanishes (k a negative integer).
pub fn scalar_ratio(k: &Q) -> Option<Q> {
    let c = ceil(k).to_i64().unwrap();
    if c >= 0 {
        let mut p = Q::one();
        for m in 0..c {
            p *= k - qi(m);
        }
        Some(p.recip())
    } else if k.is_integer() {
        None
    } else {
        let mut p = Q::one();
        for m in c..0 {
            p *= k - qi(m);
        }
        Some(p)
    }
}

/// The I-function ratio factor with divisor restriction `dres`, as a
/// rational function of z.
pub fn ratio_factor(dres: &EqRational, k: &Q) -> EqRational {
    let c = ceil(k).to_i64().unwrap();
    let z = zvar();
    // (dres/z + k - m) = (dres + (k-m) z)/z
    let factor = |m: i64| dres.add(&z.scale(&(k - qi(m)))).div(&z);
    if c >= 0 {
        (0..c).fold(EqRational::one(), |acc, m| acc.div(&factor(m)))
    } else {
        (c..0).fold(EqRational::one(), |acc, m| acc.mul(&factor(m)))
    }
}

fn as_usize(k: &Q) -> u64 {
    k.to_integer().to_u64().expect("expected a nonnegative integer")
}

/// Coefficient of q^β in A_i, or None when β ∉ Ω_i.
fn a_coefficient(fan: &ExtendedStackyFan, i: usize, p: &MoriPoint) -> Option<Q> {
    let beta = &p.pairing;
    if beta.iter().all(|x| x.is_zero()) {
        return None;
    }
    if !fan.is_extra[i] {
        if !p.sector.point.iter().all(|x| x.is_zero()) {
            return None;
        }
        let ki = &beta[i];
        if !ki.is_negative() {
            return None;
        }
        let mut den = BigInt::one();
        for (j, kj) in beta.iter().enumerate() {
            if j == i {
                continue;
            }
            if kj.is_negative() {
                return None;
            }
            den *= factorial(as_usize(kj));
        }
        let n = as_usize(&-ki.clone());
        let sign = if (n - 1) % 2 == 0 { Q::one() } else { -Q::one() };
        Some(sign * qb(&factorial(n - 1)) / qb(&den))
    } else {
        let target: Vec<BigInt> = fan.vectors[i].iter().map(|&x| BigInt::from(x)).collect();
        if p.sector.point != target {
            return None;
        }
        // product over every vector, not only the extras
        let mut acc = Q::one();
        for kj in beta {
            acc *= scalar_ratio(kj)?;
        }
        Some(acc)
    }
}

/// A_i of the given fan in the variables ⟨H_a, β⟩.
pub fn a_series(fan: &ExtendedStackyFan, h: &[Vec<Q>], i: usize, shape: &SeriesShape) -> Result<TruncatedSeries<Q>> {
    let grading = sum_vectors(h, fan.num_vectors());
    let pts = keff_union(fan, &grading, &shape.bound)?;
    Ok(a_series_from(fan, h, i, shape, &pts))
}

fn a_series_from(fan: &ExtendedStackyFan, h: &[Vec<Q>], i: usize, shape: &SeriesShape, pts: &[MoriPoint]) -> TruncatedSeries<Q> {
    let mut s = TruncatedSeries::zero(shape);
    for p in pts {
        if let Some(c) = a_coefficient(fan, i, p) {
            s.add_term(&exponents(h, &p.pairing, shape.vars.len()), c);
        }
    }
    s
}

/// Index of the extra vector when H_a is that vector's divisor.
fn extra_type(fan: &ExtendedStackyFan, ha: &[Q]) -> Option<usize> {
    let nz: Vec<usize> = (0..ha.len()).filter(|&i| !ha[i].is_zero()).collect();
    match nz.as_slice() {
        [i] if fan.is_extra[*i] && ha[*i].is_one() => Some(*i),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct MirrorMapData {
    pub shape: SeriesShape,
    pub a: Vec<TruncatedSeries<Q>>,
    pub a_tilde: Vec<TruncatedSeries<Q>>,
    /// S_a = Σ_{i ≤ R'} m_i^(a) A_i.
    pub s: Vec<TruncatedSeries<Q>>,
    /// S̃_a over the vectors {1..R', R+1, R+2}, including a = R-2.
    pub s_tilde: Vec<TruncatedSeries<Q>>,
    /// τ_a minus log q_a (when has_log), else τ_a.
    pub tau: Vec<TruncatedSeries<Q>>,
    pub tau_has_log: Vec<bool>,
    pub tau_tilde: Vec<TruncatedSeries<Q>>,
    pub tau_tilde_has_log: Vec<bool>,
    /// log X − log x.
    pub log_x: TruncatedSeries<Q>,
    /// τ̃0 = λ̃2 Ã2 + λ̃3 Ã3.
    pub tau0_tilde: TruncatedSeries<EqRational>,
}

fn combination(
    terms: impl Iterator<Item = (Q, usize)>,
    series: &[TruncatedSeries<Q>],
    shape: &SeriesShape,
) -> Result<TruncatedSeries<Q>> {
    let mut out = TruncatedSeries::zero(shape);
    for (c, i) in terms {
        if !c.is_zero() {
            out = out.add(&series[i].scale(&c))?;
        }
    }
    Ok(out)
}

pub fn mirror_maps(dual: &DualGeometry, bases: &CohomologyBases, bound: i64) -> Result<MirrorMapData> {
    let shape = series_shape(dual, bases, bound);
    let xfan = &dual.brane.fan;
    let tfan = &dual.fan;
    let big_r = dual.big_r;
    let grading = sum_vectors(&bases.h, xfan.num_vectors());
    let pts = keff_union(xfan, &grading, &shape.bound)?;
    let a: Vec<_> = (0..big_r).map(|i| a_series_from(xfan, &bases.h, i, &shape, &pts)).collect();
    let tgrading = sum_vectors(&bases.h_tilde, tfan.num_vectors());
    let tpts = keff_union(tfan, &tgrading, &shape.bound)?;
    let a_tilde: Vec<_> = (0..big_r + 2).map(|i| a_series_from(tfan, &bases.h_tilde, i, &shape, &tpts)).collect();

    let divisor_idx: Vec<usize> = (0..big_r).filter(|&i| !xfan.is_extra[i]).collect();
    let k = bases.h.len();
    let mut s = vec![];
    let mut tau = vec![];
    let mut tau_has_log = vec![];
    for ai in 0..k {
        let sa = combination(divisor_idx.iter().map(|&i| (bases.m[i][ai].clone(), i)), &a, &shape)?;
        match extra_type(xfan, &bases.h[ai]) {
            Some(i) => {
                tau.push(a[i].clone());
                tau_has_log.push(false);
            }
            None => {
                tau.push(sa.clone());
                tau_has_log.push(true);
            }
        }
        s.push(sa);
    }
    let mut tidx = divisor_idx.clone();
    tidx.extend([dual.rp1(), dual.rp2()]);
    let mut s_tilde = vec![];
    let mut tau_tilde = vec![];
    let mut tau_tilde_has_log = vec![];
    let (w0, w2, w3) = dual.brane.w();
    for ai in 0..=k {
        let sa = combination(tidx.iter().map(|&i| (bases.m_tilde[i][ai].clone(), i)), &a_tilde, &shape)?;
        if ai == k {
            let t = combination([(w0.clone(), 0), (w2.clone(), 1), (w3.clone(), 2)].into_iter(), &a_tilde, &shape)?;
            tau_tilde.push(t);
            tau_tilde_has_log.push(true);
        } else {
            match extra_type(tfan, &bases.h_tilde[ai]) {
                Some(i) => {
                    tau_tilde.push(a_tilde[i].clone());
                    tau_tilde_has_log.push(false);
                }
                None => {
                    tau_tilde.push(sa.clone());
                    tau_tilde_has_log.push(true);
                }
            }
        }
        s_tilde.push(sa);
    }
    let log_x = combination([(w0, 0), (w2, 1), (w3, 2)].into_iter(), &a, &shape)?;
    let mut tau0_tilde = TruncatedSeries::zero(&shape);
    for i in [1, 2] {
        let lam = &bases.lambda_tilde[i];
        for (key, c) in &a_tilde[i].terms {
            tau0_tilde.add_term(&a_tilde[i].exponents(key), lam.scale(c));
        }
    }
    Ok(MirrorMapData { shape, a, a_tilde, s, s_tilde, tau, tau_has_log, tau_tilde, tau_tilde_has_log, log_x, tau0_tilde })
}

impl MirrorMapData {
    /// Sorted records "name (exponents) : coefficient".
    pub fn records(&self) -> Vec<String> {
        let mut out = vec![];
        let mut emit = |name: String, s: &TruncatedSeries<Q>, log: bool| {
            if log {
                out.push(format!("{name} log : 1"));
            }
            for r in s.records() {
                out.push(format!("{name} {r}"));
            }
        };
        for (a, (t, l)) in self.tau.iter().zip(&self.tau_has_log).enumerate() {
            emit(format!("tau{}", a + 1), t, *l);
        }
        for (a, (t, l)) in self.tau_tilde.iter().zip(&self.tau_tilde_has_log).enumerate() {
            emit(format!("tau~{}", a + 1), t, *l);
        }
        emit("logX".into(), &self.log_x, true);
        out
    }
}

/// The distinguished insertion γ̃_λ on the dual.
pub fn gamma_lambda(dual: &DualGeometry, lambda: &SectorLabel) -> CohClass {
    let brane = &dual.brane;
    let rp1 = dual.rp1();
    if lambda.is_zero() {
        let mm = qi(brane.m);
        let den = u1().scale(&(qi(brane.f) / &mm)).sub(&u2().scale(&mm.recip())).sub(&u4());
        CohClass::term(vec![BigInt::zero(); 4], den.recip(), vec![1, 2, rp1])
    } else {
        // λ^{-1} as a Box element of σ̃0 = {2, 3, R+1, R+2}
        let c2 = fract(&-lambda.coeff_of(1));
        let c3 = fract(&-lambda.coeff_of(2));
        let inv = dual.fan.label_from_coeffs(&dual.sigma0_tilde, vec![c2, c3, Q::zero(), Q::zero()]);
        CohClass::term(inv.point, EqRational::one(), vec![rp1])
    }
}

/// W_λ(q, x) of the brane.
pub fn w_disk(dual: &DualGeometry, bases: &CohomologyBases, lambda: &SectorLabel, bound: i64) -> Result<TruncatedSeries<Q>> {
    let shape = series_shape(dual, bases, bound);
    let brane = &dual.brane;
    let xfan = &brane.fan;
    let (w0, w2, w3) = brane.w();
    let grading = sum_vectors(&bases.h, xfan.num_vectors());
    let pts = enumerate_keff(xfan, &brane.sigma0, &grading, &(qi(bound) - Q::one()))?;
    let k = bases.h.len();
    let mut out = TruncatedSeries::zero(&shape);
    for p in &pts {
        let beta = &p.pairing;
        let mut exps = exponents(&bases.h, beta, k + 1);
        let base_deg: Q = exps.iter().sum();
        let mut d = 1i64;
        while base_deg.clone() + qi(d) <= shape.bound {
            let dd = qi(d);
            let n1 = &beta[0] + &dd * &w0;
            if is_int(&n1) && !n1.is_negative() && brane.h(d, lambda).coeffs == p.sector.coeffs {
                let a = &beta[2] + &dd * &w3;
                let b = &beta[1] + &dd * &w2;
                let c = -(&a + &b);
                if !c.is_integer() {
                    return Err(Error::NonIntegerOffset);
                }
                let c = c.to_integer().to_i64().unwrap();
                let ratio = if c >= 1 {
                    (1..c).fold(Q::one(), |acc, j| acc * (&b + qi(j)))
                } else {
                    let mut den = Q::one();
                    for j in 0..=-c {
                        den *= &b - qi(j);
                    }
                    if den.is_zero() {
                        return Err(Error::NonIntegerOffset);
                    }
                    den.recip()
                };
                let mut den = qi(brane.m) * &dd * qb(&factorial(as_usize(&n1)));
                for kj in &beta[3..] {
                    den *= qb(&factorial(as_usize(kj)));
                }
                let e = floor(&a) + BigInt::from(d);
                let sign = if e.is_even() { Q::one() } else { -Q::one() };
                exps[k] = dd.clone();
                out.add_term(&exps, sign * ratio / den);
            }
            d += 1;
        }
    }
    Ok(out)
}

/// Coefficients of the point `p` over the cone when it lies in its Box.
fn box_label(fan: &ExtendedStackyFan, sigma: &Cone, p: &[Q]) -> Option<SectorLabel> {
    let c = solve(&fan.cone_rows_q(sigma), p)?;
    if c.iter().all(|x| !x.is_negative() && x < &Q::one()) {
        Some(fan.label_from_coeffs(sigma, c))
    } else {
        None
    }
}

/// [z^{-2}] of (I_β̃, γ̃_λ) for one class, before the weight restriction.
fn i_term_pairing(dual: &DualGeometry, gamma: &CohClass, p: &MoriPoint) -> Result<EqRational> {
    let fan = &dual.fan;
    let beta = &p.pairing;
    let point: Vec<Q> = (0..fan.rank)
        .map(|r| beta.iter().enumerate().map(|(i, b)| qb(&ceil(b)) * qi(fan.vectors[i][r])).sum())
        .collect();
    let mut total = EqRational::zero();
    for sigma in &fan.maximal_cones {
        let Some(j) = box_label(fan, sigma, &point) else { continue };
        let g = class_restrict(fan, gamma, sigma, &fan.inv(&j));
        if g.is_zero() {
            continue;
        }
        let mut v = g;
        for (i, k) in beta.iter().enumerate() {
            v = v.mul(&ratio_factor(&divisor_restrict(fan, i, sigma), k));
            if v.is_zero() {
                break;
            }
        }
        if v.is_zero() {
            continue;
        }
        let age = j.age.to_integer().to_i64().expect("integral age");
        v = v.mul(&zvar().pow(-age));
        for w in fixed_euler_factors(fan, sigma, &j) {
            if w.is_zero() {
                return Err(Error::NonConvergentPairing(format!("cone {sigma}")));
            }
            v = v.div(&w);
        }
        total = total.add(&v.scale(&Q::new(BigInt::one(), BigInt::from(fan.stabilizer_order(sigma)))));
    }
    Ok(total.z_coeff(-2))
}

/// [z^{-2}](I, γ̃_λ) restricted to u4 = 0, u2 = f u1, as a series in
/// (q̃_1, …, q̃_{R-2}).
pub fn i_function_z2_pairing(
    dual: &DualGeometry,
    bases: &CohomologyBases,
    lambda: &SectorLabel,
    bound: i64,
) -> Result<TruncatedSeries<Q>> {
    let shape = series_shape(dual, bases, bound);
    let fan = &dual.fan;
    let gamma = gamma_lambda(dual, lambda);
    let grading = sum_vectors(&bases.h_tilde, fan.num_vectors());
    let pts = keff_union(fan, &grading, &shape.bound)?;
    let f = dual.brane.f;
    let terms: Vec<Result<(Vec<Q>, Q)>> = pts
        .maybe_par_iter()
        .map(|p| {
            let v = i_term_pairing(dual, &gamma, p)?.restrict_brane(f)?;
            let c = v.as_constant().ok_or_else(|| Error::PoleAtRestriction(format!("non-constant value {v}")))?;
            Ok((exponents(&bases.h_tilde, &p.pairing, shape.vars.len()), c))
        })
        .collect();
    let mut out = TruncatedSeries::zero(&shape);
    for t in terms {
        let (e, c) = t?;
        out.add_term(&e, c);
    }
    Ok(out)
}

/// Compare W_λ with the I-function pairing.
pub fn verify_ipairing(
    dual: &DualGeometry,
    bases: &CohomologyBases,
    lambda: &SectorLabel,
    bound: i64,
) -> Result<crate::seriesengine::Report> {
    let w = w_disk(dual, bases, lambda, bound)?;
    let i = i_function_z2_pairing(dual, bases, lambda, bound)?;
    Ok(crate::seriesengine::compare_series(&format!("ipairing lambda={}", dual.brane.lambda_bar(lambda)), &w, &i))
}

/// Checks τ̃_a = τ_a and τ̃_{R-2} = log X, and that the general S̃_{R-2}
/// agrees with the w-combination.
pub fn verify_mirror_map_corr(data: &MirrorMapData) -> crate::seriesengine::Report {
    let mut rep = crate::seriesengine::Report::new("mirrormap");
    let k = data.tau.len();
    for a in 0..k {
        rep.merge(crate::seriesengine::compare_series(&format!("tau{}", a + 1), &data.tau[a], &data.tau_tilde[a]));
        if data.tau_has_log[a] != data.tau_tilde_has_log[a] {
            rep.fail(format!("tau{} log term differs", a + 1));
        }
    }
    rep.merge(crate::seriesengine::compare_series("logX", &data.log_x, &data.tau_tilde[k]));
    rep.merge(crate::seriesengine::compare_series("S~last", &data.s_tilde[k], &data.tau_tilde[k]));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::occonstruct::{analyze_brane, construct_dual, second_cohomology_bases};

    fn c3(f: i64) -> DualGeometry {
        let fan = ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![], vec![vec![0, 1, 2]]);
        construct_dual(&analyze_brane(&fan, (1, 2), f).unwrap()).unwrap()
    }

    fn kp2(f: i64) -> DualGeometry {
        let fan = ExtendedStackyFan::new(
            3,
            vec![vec![1, 0, 1], vec![0, 1, 1], vec![-1, -1, 1], vec![0, 0, 1]],
            vec![],
            vec![vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]],
        );
        construct_dual(&analyze_brane(&fan, (0, 1), f).unwrap()).unwrap()
    }

    #[test]
    fn nef_kp2() {
        let d = kp2(0);
        let rays = extended_nef(&d.brane.fan).unwrap();
        assert_eq!(rays, vec![vec![qi(0), qi(0), qi(0), qi(1)]]);
        assert!(extended_nef(&c3(0).brane.fan).unwrap().is_empty());
    }

    #[test]
    fn scalar_ratios() {
        assert_eq!(scalar_ratio(&qi(2)), Some(q(1, 2)));
        assert_eq!(scalar_ratio(&qi(-1)), None);
        assert_eq!(scalar_ratio(&q(-1, 2)), Some(qi(1)));
        assert_eq!(scalar_ratio(&q(-3, 2)), Some(q(-1, 2)));
        assert_eq!(scalar_ratio(&q(1, 2)), Some(qi(2)));
    }

    #[test]
    fn w_c3_closed_form() {
        for f in 0..3 {
            let d = c3(f);
            let b = second_cohomology_bases(&d, None).unwrap();
            let lam = d.brane.lambdas()[0].clone();
            let w = w_disk(&d, &b, &lam, 6).unwrap();
            for n in 1..=6i64 {
                let sign = if (n * f) % 2 == 0 { 1 } else { -1 };
                let want = qi(sign) * qb(&crate::arith::binomial(n * (f + 1) - 1, n - 1)) / qi(n * n);
                assert_eq!(w.coefficient(&[qi(n)]), want, "f={f} d={n}");
            }
        }
    }

    #[test]
    fn kp2_mirror_map() {
        let d = kp2(0);
        let b = second_cohomology_bases(&d, None).unwrap();
        let mm = mirror_maps(&d, &b, 3).unwrap();
        let t = &mm.tau[0];
        assert_eq!(t.coefficient(&[qi(1), qi(0)]), qi(-6));
        assert_eq!(t.coefficient(&[qi(2), qi(0)]), qi(45));
        assert_eq!(t.coefficient(&[qi(3), qi(0)]), qi(-560));
        assert!(verify_mirror_map_corr(&mm).passed());
    }

    #[test]
    fn ipairing_c3() {
        let d = c3(1);
        let b = second_cohomology_bases(&d, None).unwrap();
        let lam = d.brane.lambdas()[0].clone();
        let rep = verify_ipairing(&d, &b, &lam, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep.lines());
    }

    fn orbifold(name: &str, f: i64) -> DualGeometry {
        let fan = match name {
            "c3z3" => ExtendedStackyFan::new(3, vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![vec![1, 0, 1]], vec![vec![0, 1, 2]]),
            _ => ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 2, 1], vec![0, 0, 1]], vec![vec![0, 1, 1]], vec![vec![0, 1, 2]]),
        };
        construct_dual(&analyze_brane(&fan, (1, 2), f).unwrap()).unwrap()
    }

    #[test]
    fn ipairing_orbifolds() {
        for (name, f) in [("c3z3", 0), ("a1", 0), ("a1", 1)] {
            let d = orbifold(name, f);
            let b = second_cohomology_bases(&d, None).unwrap();
            for lam in d.brane.lambdas() {
                let rep = verify_ipairing(&d, &b, &lam, 3).unwrap();
                assert!(rep.passed(), "{name} f={f}: {:#?}", rep.lines());
            }
            let mm = mirror_maps(&d, &b, 3).unwrap();
            let rep = verify_mirror_map_corr(&mm);
            assert!(rep.passed(), "{name}: {:#?}", rep.lines());
        }
    }
}
