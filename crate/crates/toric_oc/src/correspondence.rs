//! Invariant tables, generating functions, and the end-to-end checks
//! relating disk invariants of the 3-orbifold to closed invariants of its
//! dual 4-orbifold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_traits::Zero;

use crate::arith::{fmt_q, is_int, qi, Q};
use crate::bmodel::{i_function_z2_pairing, mirror_maps, series_shape, MirrorMapData};
use crate::eqalg::CohClass;
use crate::error::{Error, Result};
use crate::localization::{closed_invariant, disk_invariant, dual_class, invariant_lines};
use crate::maybe_parallel::IntoMaybeParallelRefIterator;
use crate::occonstruct::{equivariant_lift, equivariant_lift_tilde, BraneData, CohomologyBases, DualGeometry};
use crate::seriesengine::{compare_series, Report, SeriesShape, TruncatedSeries};
use crate::stackyfan::ExtendedStackyFan;
#[cfg(feature = "parallel")]
use rayon::iter::ParallelIterator;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvariantKey {
    /// Pairing vector of β (disk side) or β̃ (closed side).
    pub beta: Vec<Q>,
    pub d: i64,
    /// λ̄ ∈ {0..𝔪-1}.
    pub lambda: i64,
    /// Indices a of the inserted divisor classes H_a, sorted.
    pub insertions: Vec<usize>,
}

impl fmt::Display for InvariantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "beta=({}) d={} lambda={} ins=[{}]",
            self.beta.iter().map(fmt_q).join(","),
            self.d,
            self.lambda,
            self.insertions.iter().map(|a| a + 1).join(",")
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantTable {
    pub rows: BTreeMap<InvariantKey, Q>,
}

impl InvariantTable {
    pub fn insert(&mut self, key: InvariantKey, value: Q) {
        self.rows.insert(key, value);
    }

    pub fn get(&self, key: &InvariantKey) -> Option<&Q> {
        self.rows.get(key)
    }

    pub fn records(&self) -> Vec<String> {
        self.rows.iter().map(|(k, v)| format!("{k} : {}", fmt_q(v))).collect()
    }
}

fn pair(coeffs: &[Q], class: &[Q]) -> Q {
    coeffs.iter().zip(class).map(|(a, b)| a * b).sum()
}

/// Effective curve classes Σ n_e [l_e] over the proper invariant lines,
/// with grading at most `bound`; the zero class is included.
pub fn effective_classes(fan: &ExtendedStackyFan, grading: &[Q], bound: i64) -> Result<Vec<Vec<Q>>> {
    let lines = invariant_lines(fan);
    let degs: Vec<Q> = lines.iter().map(|l| pair(grading, &l.class)).collect();
    if degs.iter().any(|g| *g <= Q::zero()) {
        return Err(Error::GradingNotPositive);
    }
    let bound = qi(bound);
    let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut frontier = vec![(vec![Q::zero(); fan.num_vectors()], Q::zero())];
    seen.insert(frontier[0].0.clone());
    while let Some((cls, g)) = frontier.pop() {
        for (l, dg) in lines.iter().zip(&degs) {
            let g2 = &g + dg;
            if g2 > bound {
                continue;
            }
            let next: Vec<Q> = cls.iter().zip(&l.class).map(|(a, b)| a + b).collect();
            if seen.insert(next.clone()) {
                frontier.push((next, g2));
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn sum_rows(rows: &[Vec<Q>], len: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); len];
    for r in rows {
        for (o, x) in out.iter_mut().zip(r) {
            *o += x;
        }
    }
    out
}

/// Divisor-equation grading Σ_a H_a on the 3-orbifold.
pub fn disk_grading(brane: &BraneData, bases: &CohomologyBases) -> Vec<Q> {
    sum_rows(&bases.h, brane.fan.num_vectors())
}

fn nonzero_coeffs(v: &[Q]) -> Vec<(usize, Q)> {
    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect()
}

/// Equivariant lift of H_a on the 3-orbifold.
pub fn disk_insertion(brane: &BraneData, bases: &CohomologyBases, a: usize) -> CohClass {
    let nr = brane.fan.num_fan_rays();
    let coeffs: Vec<(usize, Q)> = nonzero_coeffs(&bases.h[a]).into_iter().filter(|(i, _)| *i < nr).collect();
    equivariant_lift(brane, &coeffs)
}

/// Equivariant lift of H̃_a on the dual.
pub fn closed_insertion(dual: &DualGeometry, bases: &CohomologyBases, a: usize) -> CohClass {
    equivariant_lift_tilde(dual, &nonzero_coeffs(&bases.h_tilde[a])).0
}

/// Disk-side keys: every effective β up to `beta_bound`, 1 ≤ d ≤ dmax,
/// every λ, and every insertion multiset of size ≤ max_insertions.
pub fn disk_keys(
    brane: &BraneData,
    bases: &CohomologyBases,
    dmax: i64,
    beta_bound: i64,
    max_insertions: usize,
) -> Result<Vec<InvariantKey>> {
    disk_keys_graded(brane, bases, &disk_grading(brane, bases), dmax, beta_bound, max_insertions)
}

/// As `disk_keys`, with β graded by an arbitrary positive divisor.
pub fn disk_keys_graded(
    brane: &BraneData,
    bases: &CohomologyBases,
    grading: &[Q],
    dmax: i64,
    beta_bound: i64,
    max_insertions: usize,
) -> Result<Vec<InvariantKey>> {
    let betas = effective_classes(&brane.fan, grading, beta_bound)?;
    let k = bases.h.len();
    let mut ins: Vec<Vec<usize>> = vec![];
    for n in 0..=max_insertions {
        ins.extend((0..k).combinations_with_replacement(n));
    }
    let mut keys = vec![];
    for beta in &betas {
        for d in 1..=dmax {
            for lambda in 0..brane.m {
                for i in &ins {
                    keys.push(InvariantKey { beta: beta.clone(), d, lambda, insertions: i.clone() });
                }
            }
        }
    }
    Ok(keys)
}

/// Key of the matching closed invariant: β̃ = ι_*(β + d[B]).
pub fn closed_key(dual: &DualGeometry, key: &InvariantKey) -> InvariantKey {
    InvariantKey { beta: dual_class(dual, &key.beta, key.d), ..key.clone() }
}

fn collect(keys: &[InvariantKey], vals: Vec<Result<Q>>) -> Result<InvariantTable> {
    let mut t = InvariantTable::default();
    for (k, v) in keys.iter().zip(vals) {
        t.insert(k.clone(), v?);
    }
    Ok(t)
}

pub fn disk_table(
    brane: &BraneData,
    bases: &CohomologyBases,
    keys: &[InvariantKey],
    parallel: bool,
) -> Result<InvariantTable> {
    let eval = |k: &InvariantKey| {
        let ins: Vec<CohClass> = k.insertions.iter().map(|&a| disk_insertion(brane, bases, a)).collect();
        disk_invariant(brane, &k.beta, k.d, &brane.lambda_from_bar(k.lambda), &ins, false)
    };
    let vals: Vec<Result<Q>> =
        if parallel { keys.maybe_par_iter().map(eval).collect() } else { keys.iter().map(eval).collect() };
    collect(keys, vals)
}

/// Closed invariants ⟨H̃.., γ̃_λ⟩ at the given β̃ keys.
pub fn closed_table(
    dual: &DualGeometry,
    bases: &CohomologyBases,
    keys: &[InvariantKey],
    parallel: bool,
) -> Result<InvariantTable> {
    let eval = |k: &InvariantKey| {
        let ins: Vec<CohClass> = k.insertions.iter().map(|&a| closed_insertion(dual, bases, a)).collect();
        closed_invariant(dual, &k.beta, &ins, &dual.brane.lambda_from_bar(k.lambda), false)
    };
    let vals: Vec<Result<Q>> =
        if parallel { keys.maybe_par_iter().map(eval).collect() } else { keys.iter().map(eval).collect() };
    collect(keys, vals)
}

/// Compare a disk table against a closed table keyed by β̃.
pub fn compare_tables(title: &str, dual: &DualGeometry, disk: &InvariantTable, closed: &InvariantTable) -> Report {
    let mut rep = Report::new(title);
    for (k, lhs) in &disk.rows {
        let ck = closed_key(dual, k);
        match closed.get(&ck) {
            None => rep.fail(format!("{k} : missing closed value")),
            Some(rhs) if rhs == lhs => rep.record(format!("{k} : {} = {}", fmt_q(lhs), fmt_q(rhs))),
            Some(rhs) => rep.fail(format!("{k} : {} != {}", fmt_q(lhs), fmt_q(rhs))),
        }
    }
    rep
}

/// Disk = closed for every (β, d, λ) in range, without insertions.
pub fn verify_numerical(
    dual: &DualGeometry,
    bases: &CohomologyBases,
    dmax: i64,
    beta_bound: i64,
    parallel: bool,
) -> Result<Report> {
    let keys = disk_keys(&dual.brane, bases, dmax, beta_bound, 0)?;
    let disk = disk_table(&dual.brane, bases, &keys, parallel)?;
    let ckeys: Vec<InvariantKey> = keys.iter().map(|k| closed_key(dual, k)).collect();
    let closed = closed_table(dual, bases, &ckeys, parallel)?;
    Ok(compare_tables("numerical", dual, &disk, &closed))
}

/// Exponent vector (⟨H_a,β⟩.., d) of the q, x monomial carrying a disk key.
pub fn disk_exponents(bases: &CohomologyBases, key: &InvariantKey) -> Vec<Q> {
    let mut e: Vec<Q> = bases.h.iter().map(|h| pair(h, &key.beta)).collect();
    e.push(qi(key.d));
    e
}

/// Exponent vector (⟨H̃_a,β̃⟩..) of a closed key.
pub fn closed_exponents(bases: &CohomologyBases, key: &InvariantKey) -> Vec<Q> {
    bases.h_tilde.iter().map(|h| pair(h, &key.beta)).collect()
}

/// F_λ with τ₂ restricted to the span of the H_a: Σ N_{β,d} Q^β X^d,
/// from the insertion-free rows of λ.
pub fn disk_series(shape: &SeriesShape, bases: &CohomologyBases, table: &InvariantTable, lambda: i64) -> TruncatedSeries<Q> {
    let mut out = TruncatedSeries::zero(shape);
    for (k, v) in &table.rows {
        if k.lambda == lambda && k.insertions.is_empty() {
            out.add_term(&disk_exponents(bases, k), v.clone());
        }
    }
    out
}

/// ⟪γ̃_λ⟫ as a series in (Q̃_1.., Q̃_{R-2} = X).
pub fn closed_series(shape: &SeriesShape, bases: &CohomologyBases, table: &InvariantTable, lambda: i64) -> TruncatedSeries<Q> {
    let mut out = TruncatedSeries::zero(shape);
    for (k, v) in &table.rows {
        if k.lambda == lambda && k.insertions.is_empty() {
            out.add_term(&closed_exponents(bases, k), v.clone());
        }
    }
    out
}

fn in_image(dual: &DualGeometry, cls: &[Q]) -> bool {
    let (a, b) = (&cls[dual.rp1()], &cls[dual.rp2()]);
    (a + b).is_zero() && is_int(a)
}

/// Generating-function form: F_λ = ⟪γ̃_λ⟫ under Q̃_a = Q_a, Q̃_{R-2} = X,
/// plus the divisor-equation ladder for H_a insertions and the vanishing
/// of classes outside ι_*(H₂(X,L)).
pub fn verify_gencorr(
    dual: &DualGeometry,
    bases: &CohomologyBases,
    lambda: i64,
    bound: i64,
    max_insertions: usize,
    parallel: bool,
) -> Result<Report> {
    let brane = &dual.brane;
    let shape = series_shape(dual, bases, bound);
    let k = bases.h.len();
    let all = disk_keys(brane, bases, bound, bound, max_insertions)?;
    let keys: Vec<InvariantKey> = all
        .into_iter()
        .filter(|key| key.lambda == lambda && shape.degree_ok(&disk_exponents(bases, key)))
        .collect();
    let disk = disk_table(brane, bases, &keys, parallel)?;
    let ckeys: Vec<InvariantKey> = keys.iter().map(|key| closed_key(dual, key)).collect();
    let closed = closed_table(dual, bases, &ckeys, parallel)?;

    let mut rep = Report::new(&format!("gencorr lambda={lambda}"));
    for key in &keys {
        let ck = closed_key(dual, key);
        let dpair = pair(&bases.h_tilde[k], &ck.beta);
        if dpair != qi(key.d) {
            rep.fail(format!("{key} : <D~,beta~> = {} != {}", fmt_q(&dpair), key.d));
        }
        if key.insertions.is_empty() {
            continue;
        }
        // ⟨H_a..⟩_{β,d} = Π⟨H_a,β⟩ N_{β,d}, and likewise on the dual
        let base = InvariantKey { insertions: vec![], ..key.clone() };
        let n0 = &disk.rows[&base];
        let lhs_pred: Q = key.insertions.iter().map(|&a| pair(&bases.h[a], &key.beta)).product::<Q>() * n0;
        let cbase = closed_key(dual, &base);
        let rhs_pred: Q =
            key.insertions.iter().map(|&a| pair(&bases.h_tilde[a], &cbase.beta)).product::<Q>() * &closed.rows[&cbase];
        let (lhs, rhs) = (&disk.rows[key], &closed.rows[&ck]);
        if *lhs == lhs_pred && *rhs == rhs_pred && lhs == rhs {
            rep.record(format!("ladder {key} : {} = {}", fmt_q(lhs), fmt_q(rhs)));
        } else {
            rep.fail(format!(
                "ladder {key} : disk {} (divisor eq {}) closed {} (divisor eq {})",
                fmt_q(lhs),
                fmt_q(&lhs_pred),
                fmt_q(rhs),
                fmt_q(&rhs_pred)
            ));
        }
    }
    rep.merge(compare_series("series", &disk_series(&shape, bases, &disk, lambda), &closed_series(&shape, bases, &closed, lambda)));

    // classes of the dual not of the form ι_*(β + d[B])
    let grading = sum_rows(&bases.h_tilde, dual.fan.num_vectors());
    let others: Vec<Vec<Q>> = effective_classes(&dual.fan, &grading, bound)?
        .into_iter()
        .filter(|c| c.iter().any(|x| !x.is_zero()) && !in_image(dual, c))
        .collect();
    let lam = brane.lambda_from_bar(lambda);
    for cls in others {
        let key = InvariantKey { beta: cls.clone(), d: 0, lambda, insertions: vec![] };
        match closed_invariant(dual, &cls, &[], &lam, parallel) {
            Ok(v) if v.is_zero() => rep.record(format!("other {key} : 0")),
            Ok(v) => rep.fail(format!("other {key} : {} != 0", fmt_q(&v))),
            Err(Error::UnsupportedVertex) => rep.record(format!("other {key} : skipped (unsupported vertex)")),
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// F_λ(τ(q), X(q,x)) = Σ N_{β,d} Π_a (q_a e^{S_a})^{⟨H_a,β⟩} (x e^{log X - log x})^d.
pub fn mirror_substituted(
    data: &MirrorMapData,
    bases: &CohomologyBases,
    table: &InvariantTable,
    lambda: i64,
) -> Result<TruncatedSeries<Q>> {
    let shape = &data.shape;
    let k = bases.h.len();
    let mut out = TruncatedSeries::zero(shape);
    for (key, v) in &table.rows {
        if key.lambda != lambda || !key.insertions.is_empty() || v.is_zero() {
            continue;
        }
        let exps = disk_exponents(bases, key);
        let mut shift = TruncatedSeries::zero(shape);
        for a in 0..k {
            if !exps[a].is_zero() {
                shift = shift.add(&data.tau[a].scale(&exps[a]))?;
            }
        }
        shift = shift.add(&data.log_x.scale(&exps[k]))?;
        let term = TruncatedSeries::monomial(shape, &exps, v.clone()).mul(&shift.exp()?)?;
        out = out.add(&term)?;
    }
    Ok(out)
}

fn q_degree_at_most(s: &TruncatedSeries<Q>, k: usize, max: i64) -> TruncatedSeries<Q> {
    let mut out = TruncatedSeries::zero(&s.shape);
    for (key, c) in &s.terms {
        let e = s.exponents(key);
        if e[..k].iter().sum::<Q>() <= qi(max) {
            out.add_term(&e, c.clone());
        }
    }
    out
}

/// F_λ after the mirror substitution against the restricted [z^{-2}]
/// I-pairing. Disk invariants are taken for β of grading ≤ beta_bound,
/// and both sides are compared in q-degree ≤ beta_bound only.
pub fn verify_jpairing(
    dual: &DualGeometry,
    bases: &CohomologyBases,
    lambda: i64,
    bound: i64,
    beta_bound: i64,
    parallel: bool,
) -> Result<Report> {
    let brane = &dual.brane;
    if !brane.fan.extras().is_empty() {
        return Err(Error::InvalidFan("J-pairing check needs a fan without extra vectors".into()));
    }
    let data = mirror_maps(dual, bases, bound)?;
    if data.tau_has_log.iter().any(|h| !h) {
        return Err(Error::InvalidFan("mirror map without log q term".into()));
    }
    let k = bases.h.len();
    let keys: Vec<InvariantKey> = disk_keys(brane, bases, bound, beta_bound, 0)?
        .into_iter()
        .filter(|key| key.lambda == lambda && data.shape.degree_ok(&disk_exponents(bases, key)))
        .collect();
    let disk = disk_table(brane, bases, &keys, parallel)?;
    let lhs = q_degree_at_most(&mirror_substituted(&data, bases, &disk, lambda)?, k, beta_bound);
    let rhs = q_degree_at_most(&i_function_z2_pairing(dual, bases, &brane.lambda_from_bar(lambda), bound)?, k, beta_bound);
    Ok(compare_series(&format!("jpairing lambda={lambda}"), &lhs, &rhs))
}
