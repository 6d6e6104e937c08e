//! The dual 4-orbifold of a framed outer brane.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{fract, q, qi, solve, Q};
use crate::bmodel::{extended_nef, keff_generator, ChargeLattice};
use crate::eqalg::{divisor_restrict, tangent_weight, CohClass, EqRational};
use crate::error::{Error, Result};
use crate::stackyfan::{Cone, ExtendedStackyFan, SectorLabel};

#[derive(Clone, Debug)]
pub struct BraneData {
    /// The fan in brane coordinates and brane order: σ0 = {1,2,3}, τ0 = {2,3}.
    pub fan: ExtendedStackyFan,
    /// perm[new] = original index.
    pub perm: Vec<usize>,
    /// Lattice automorphism taking original coordinates to brane coordinates.
    pub basis: [[i64; 3]; 3],
    pub tau0: Cone,
    pub sigma0: Cone,
    pub f: i64,
    pub m: i64,
    pub r: i64,
    pub s: i64,
    /// (m_i, n_i) for every vector, in brane order.
    pub coords: Vec<(i64, i64)>,
}

fn det3(a: &[i64], b: &[i64], c: &[i64]) -> i64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn mat_mul(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn apply(m: &[[i64; 3]; 3], v: &[i64]) -> Vec<i64> {
    (0..3).map(|i| (0..3).map(|k| m[i][k] * v[k]).sum()).collect()
}

/// Put the fan in the normal form adapted to the brane on τ0 (0-based
/// original indices) with framing f.
pub fn analyze_brane(fan: &ExtendedStackyFan, tau0: (usize, usize), f: i64) -> Result<BraneData> {
    assert_eq!(fan.rank, 3, "brane analysis needs a rank 3 fan");
    assert_eq!(fan.height_index, 2);
    let tau = Cone::new(vec![tau0.0, tau0.1]);
    if tau.dim() != 2 || !fan.is_face(&tau) {
        return Err(Error::NotACone(tau.to_string()));
    }
    let owners = fan.containing_maximal(&tau);
    if owners.len() != 1 {
        return Err(Error::InnerBrane);
    }
    let a = ExtendedStackyFan::omitted_ray(&tau, owners[0]);
    let (mut p, mut qq) = (tau0.0, tau0.1);
    if det3(&fan.vectors[a], &fan.vectors[p], &fan.vectors[qq]) < 0 {
        std::mem::swap(&mut p, &mut qq);
    }
    let mut perm = vec![a, p, qq];
    perm.extend(fan.fan_rays().into_iter().filter(|i| ![a, p, qq].contains(i)));
    perm.extend(fan.extras());

    let b1 = &fan.vectors[a];
    let b2 = &fan.vectors[p];
    let b3 = &fan.vectors[qq];
    let translate = [[1, 0, -b3[0]], [0, 1, -b3[1]], [0, 0, 1]];
    let (dx, dy) = (b2[0] - b3[0], b2[1] - b3[1]);
    let g = dx.gcd(&dy);
    let (gx, gy) = (dx / g, dy / g);
    let e = gx.extended_gcd(&gy);
    // [[gy, -gx], [x, y]] sends (gx, gy) to (0, 1)
    let rot = [[gy, -gx, 0], [e.x, e.y, 0], [0, 0, 1]];
    let mut basis = mat_mul(&rot, &translate);
    let p1 = apply(&basis, b1);
    let (x1, y1) = (p1[0], p1[1]);
    assert!(x1 > 0, "orientation fix failed");
    let s = (-y1).mod_floor(&x1);
    let k = (-s - y1) / x1;
    let shear = [[1, 0, 0], [k, 1, 0], [0, 0, 1]];
    basis = mat_mul(&shear, &basis);

    let vectors: Vec<Vec<i64>> = perm.iter().map(|&i| apply(&basis, &fan.vectors[i])).collect();
    let is_extra: Vec<bool> = perm.iter().map(|&i| fan.is_extra[i]).collect();
    let inv: Vec<usize> = {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        inv
    };
    let maximal_cones = fan.maximal_cones.iter().map(|c| Cone::new(c.0.iter().map(|&i| inv[i]).collect())).collect();
    let bfan = ExtendedStackyFan { rank: 3, vectors, is_extra, maximal_cones, height_index: 2 };
    let r = bfan.vectors[0][0];
    let m = g.abs();
    debug_assert_eq!(bfan.vectors[1], vec![0, m, 1]);
    debug_assert_eq!(bfan.vectors[2], vec![0, 0, 1]);
    let coords: Vec<(i64, i64)> = bfan.vectors.iter().map(|v| (v[0], v[1])).collect();
    if let Some(i) = coords.iter().position(|c| c.0 < 0) {
        return Err(Error::InvalidFan(format!("vector {} has m < 0 in brane coordinates; not an outer brane", perm[i] + 1)));
    }
    Ok(BraneData { fan: bfan, perm, basis, tau0: Cone(vec![1, 2]), sigma0: Cone(vec![0, 1, 2]), f, m, r, s, coords })
}

impl BraneData {
    /// w0, w2, w3 in units of u1 on the locus u2 = f u1.
    pub fn w(&self) -> (Q, Q, Q) {
        let w0 = q(1, self.r);
        let w2 = Q::new(BigInt::from(self.s + self.r * self.f), BigInt::from(self.r * self.m));
        let w3 = -&w0 - &w2;
        (w0, w2, w3)
    }

    /// Elements of G_τ0 as labels of σ0, sorted by λ̄.
    pub fn lambdas(&self) -> Vec<SectorLabel> {
        let mut out: Vec<SectorLabel> =
            self.fan.box_elements(&self.tau0).iter().map(|l| self.fan.lift_label(l, &self.sigma0)).collect();
        out.sort_by_key(|l| self.lambda_bar(l));
        out
    }

    /// λ̄ with c3(λ) = λ̄/𝔪.
    pub fn lambda_bar(&self, lambda: &SectorLabel) -> i64 {
        let c3 = lambda.coeff_of(2) * qi(self.m);
        assert!(c3.is_integer());
        crate::arith::to_i64(&c3)
    }

    pub fn lambda_from_bar(&self, bar: i64) -> SectorLabel {
        self.lambdas().into_iter().find(|l| self.lambda_bar(l) == bar.rem_euclid(self.m)).expect("no such λ")
    }

    /// h(d,λ) ∈ G_σ0.
    pub fn h(&self, d: i64, lambda: &SectorLabel) -> SectorLabel {
        let (w0, w2, w3) = self.w();
        let lb = q(self.lambda_bar(lambda), self.m);
        let dd = qi(d);
        let coeffs = vec![fract(&(&dd * &w0)), fract(&(&dd * &w2 - &lb)), fract(&(&dd * &w3 + &lb))];
        self.fan.label_from_coeffs(&self.sigma0, coeffs)
    }
}

/// The constructed 4-orbifold together with its brane data.
#[derive(Clone, Debug)]
pub struct DualGeometry {
    pub brane: BraneData,
    pub fan: ExtendedStackyFan,
    /// Number of vectors of the 3-orbifold (R).
    pub big_r: usize,
    pub sigma0_tilde: Cone,
    pub l0: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeMaps {
    pub sigma: Cone,
    pub delta0: Cone,
    pub delta2: Cone,
    pub delta3: Cone,
    pub delta4: Cone,
}

pub fn construct_dual(brane: &BraneData) -> Result<DualGeometry> {
    let fan = &brane.fan;
    let big_r = fan.num_vectors();
    let mut vectors: Vec<Vec<i64>> = brane.coords.iter().map(|&(m, n)| vec![m, n, 1, 0]).collect();
    vectors.push(vec![-1, -brane.f, 1, 1]);
    vectors.push(vec![0, 0, 1, 1]);
    let mut is_extra = fan.is_extra.clone();
    is_extra.extend([false, false]);
    let rp1 = big_r;
    let rp2 = big_r + 1;
    let mut cones: Vec<Cone> = fan.maximal_cones.iter().map(|c| c.with(rp2)).collect();
    let p0 = (-1i64, -brane.f);
    for (i, j) in boundary_edges(fan) {
        let third = fan
            .maximal_cones
            .iter()
            .find(|c| c.contains(i) && c.contains(j))
            .map(|c| ExtendedStackyFan::omitted_ray(&Cone(vec![i, j]), c))
            .unwrap();
        let (pi, pj, pk) = (brane.coords[i], brane.coords[j], brane.coords[third]);
        // outward normal of the edge
        let mut nu = (pj.1 - pi.1, pi.0 - pj.0);
        let at = |p: (i64, i64)| nu.0 * p.0 + nu.1 * p.1;
        if at(pk) > at(pi) {
            nu = (-nu.0, -nu.1);
        }
        let at = |p: (i64, i64)| nu.0 * p.0 + nu.1 * p.1;
        // the top of the Cayley polytope is the segment from b3 = (0,0) to
        // p0, so the edge gets a simplex iff p0 lies beyond b3 along ν
        if at(p0) > at((0, 0)) {
            cones.push(Cone::new(vec![i, j, rp1, rp2]));
        }
    }
    let sigma0_tilde = Cone(vec![1, 2, rp1, rp2]);
    assert!(cones.contains(&sigma0_tilde), "the simplex over τ0 must be visible");
    let tfan = ExtendedStackyFan { rank: 4, vectors, is_extra, maximal_cones: cones, height_index: 2 };
    let (w0, w2, w3) = brane.w();
    let mut l0 = vec![Q::zero(); big_r + 2];
    l0[0] = w0;
    l0[1] = w2;
    l0[2] = w3;
    l0[rp1] = Q::one();
    l0[rp2] = -Q::one();
    Ok(DualGeometry { brane: brane.clone(), fan: tfan, big_r, sigma0_tilde, l0 })
}

/// Edges of the triangulation lying in exactly one triangle.
pub fn boundary_edges(fan: &ExtendedStackyFan) -> Vec<(usize, usize)> {
    fan.cones_of_dim(2)
        .into_iter()
        .filter(|e| fan.containing_maximal(e).len() == 1)
        .map(|e| (e.0[0], e.0[1]))
        .collect()
}

impl DualGeometry {
    pub fn rp1(&self) -> usize {
        self.big_r
    }

    pub fn rp2(&self) -> usize {
        self.big_r + 1
    }

    pub fn iota(&self, c: &Cone) -> Cone {
        c.with(self.rp2())
    }

    pub fn is_iota_image(&self, c: &Cone) -> bool {
        c.contains(self.rp2()) && !c.contains(self.rp1())
    }

    /// ι^{-1} for cones in the image.
    pub fn iota_inv(&self, c: &Cone) -> Cone {
        c.without(self.rp2())
    }

    /// (i2, i3) of a maximal cone outside ι(Σ(3)), ordered so that the
    /// stabilizer formula f(m_{i3}-m_{i2}) + (n_{i2}-n_{i3}) is positive.
    pub fn i2_i3(&self, sigma: &Cone) -> (usize, usize) {
        let rest: Vec<usize> = sigma.0.iter().copied().filter(|&i| i < self.big_r).collect();
        assert_eq!(rest.len(), 2);
        let (a, b) = (rest[0], rest[1]);
        if self.stabilizer_formula(a, b) > 0 {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn stabilizer_formula(&self, i2: usize, i3: usize) -> i64 {
        let c = &self.brane.coords;
        self.brane.f * (c[i3].0 - c[i2].0) + (c[i2].1 - c[i3].1)
    }

    pub fn cone_maps(&self) -> Vec<ConeMaps> {
        self.fan
            .maximal_cones
            .iter()
            .filter(|s| s.contains(self.rp1()))
            .map(|s| {
                let (i2, i3) = self.i2_i3(s);
                ConeMaps {
                    sigma: s.clone(),
                    delta0: Cone::new(vec![i2, i3]),
                    delta2: s.without(i2),
                    delta3: s.without(i3),
                    delta4: s.without(self.rp2()),
                }
            })
            .collect()
    }

    /// Tangent weight of a flag of the dual fan.
    pub fn weight(&self, tau: &Cone, sigma: &Cone) -> EqRational {
        tangent_weight(&self.fan, tau, sigma)
    }

    pub fn charge_lattice(&self) -> ChargeLattice {
        ChargeLattice::new(&self.fan)
    }
}

/// H-bases and their expansion coefficients for both geometries.
#[derive(Clone, Debug)]
pub struct CohomologyBases {
    /// H_a as coefficient vectors over D_1..D_R.
    pub h: Vec<Vec<Q>>,
    /// H̃_a over D̃_1..D̃_{R+2}; the last one is D̃_{R+1}.
    pub h_tilde: Vec<Vec<Q>>,
    /// m[i][a] with D_i = Σ_a m_i^(a) H_a in 𝕃^∨ ⊗ Q.
    pub m: Vec<Vec<Q>>,
    pub m_tilde: Vec<Vec<Q>>,
    /// Restrictions of D̃_i to σ̃0.
    pub lambda_tilde: Vec<EqRational>,
}

/// Solve D_i = Σ_a m_i^(a) H_a in 𝕃^∨ ⊗ Q.
fn expansion(lat: &ChargeLattice, h: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let k = lat.rank();
    // rows: equations over the lattice basis, unknowns: m^(a)
    (0..lat.num_vectors())
        .map(|i| {
            let rows: Vec<Vec<Q>> = (0..k).map(|b| h.iter().map(|ha| lat.pair(ha, &lat.basis[b])).collect()).collect();
            let rhs: Vec<Q> = (0..k).map(|b| lat.basis[b][i].clone()).collect();
            solve(&rows, &rhs).expect("H basis does not span")
        })
        .collect()
}

pub fn second_cohomology_bases(dual: &DualGeometry, h_override: Option<&[Vec<i64>]>) -> Result<CohomologyBases> {
    let xfan = &dual.brane.fan;
    let lat = ChargeLattice::new(xfan);
    let k = lat.rank();
    let h: Vec<Vec<Q>> = match h_override {
        Some(rows) => rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect(),
        None => {
            let rays = extended_nef(xfan)?;
            let extras = xfan.extras();
            let mut chosen: Vec<Vec<Q>> = vec![];
            let mut rest: Vec<Vec<Q>> = rays.clone();
            let mut extra_h = vec![];
            for &i in &extras {
                let mut di = vec![Q::zero(); xfan.num_vectors()];
                di[i] = Q::one();
                let dir = lat.functional(&di);
                let pos = rest.iter().position(|r| same_ray(&lat.functional(r), &dir)).ok_or(Error::NefBasis)?;
                rest.remove(pos);
                extra_h.push(di);
            }
            chosen.extend(rest);
            chosen.extend(extra_h);
            chosen
        }
    };
    if h.len() != k {
        return Err(Error::NefBasis);
    }
    for ha in &h {
        if ha.len() != xfan.num_vectors() {
            return Err(Error::NefBasis);
        }
    }
    let m = expansion(&lat, &h);
    let tfan = &dual.fan;
    let tlat = ChargeLattice::new(tfan);
    let mut h_tilde: Vec<Vec<Q>> = h
        .iter()
        .map(|ha| {
            let mut v = ha.clone();
            v.extend([Q::zero(), Q::zero()]);
            v
        })
        .collect();
    let mut last = vec![Q::zero(); tfan.num_vectors()];
    last[dual.rp1()] = Q::one();
    h_tilde.push(last);
    // nefness of the lifted basis
    for s in &tfan.maximal_cones {
        for i in (0..tfan.num_vectors()).filter(|i| !s.contains(*i)) {
            let g = keff_generator(tfan, s, i);
            for ht in &h_tilde {
                if tlat.pair(ht, &g).is_negative() {
                    return Err(Error::NefBasis);
                }
            }
        }
    }
    let m_tilde = expansion(&tlat, &h_tilde);
    let lambda_tilde = (0..tfan.num_vectors()).map(|i| divisor_restrict(tfan, i, &dual.sigma0_tilde)).collect();
    Ok(CohomologyBases { h, h_tilde, m, m_tilde, lambda_tilde })
}

fn same_ray(a: &[Q], b: &[Q]) -> bool {
    let Some(i) = a.iter().position(|x| !x.is_zero()) else { return false };
    if b[i].is_zero() || (&a[i] * &b[i]).is_negative() {
        return false;
    }
    let t = &b[i] / &a[i];
    a.iter().zip(b).all(|(x, y)| x * &t == *y)
}

/// Lift of Σ c_i D_i (fan rays only) on the 3-orbifold: the T'-class
/// shifted by a character so that it restricts to 0 at σ0.
pub fn equivariant_lift(brane: &BraneData, coeffs: &[(usize, Q)]) -> CohClass {
    let fan = &brane.fan;
    let shift = coeffs
        .iter()
        .fold(EqRational::zero(), |acc, (i, c)| acc.add(&divisor_restrict(fan, *i, &brane.sigma0).scale(c)));
    let zero = vec![BigInt::zero(); 3];
    let mut cls = CohClass::zero();
    for (i, c) in coeffs {
        cls = cls.add(CohClass::term(zero.clone(), EqRational::from_q(c.clone()), vec![*i]));
    }
    if !shift.is_zero() {
        cls = cls.add(CohClass::term(zero, shift.neg(), vec![]));
    }
    cls
}

/// Lift on the dual geometry; vanishes at ι(σ0), and the flag reports
/// whether it also vanishes at σ̃0.
pub fn equivariant_lift_tilde(dual: &DualGeometry, coeffs: &[(usize, Q)]) -> (CohClass, bool) {
    let fan = &dual.fan;
    let is0 = dual.iota(&dual.brane.sigma0);
    let at = |s: &Cone| {
        coeffs.iter().fold(EqRational::zero(), |acc, (i, c)| acc.add(&divisor_restrict(fan, *i, s).scale(c)))
    };
    let shift = at(&is0);
    let ok = at(&dual.sigma0_tilde) == shift;
    let zero = vec![BigInt::zero(); 4];
    let mut cls = CohClass::zero();
    for (i, c) in coeffs {
        cls = cls.add(CohClass::term(zero.clone(), EqRational::from_q(c.clone()), vec![*i]));
    }
    if !shift.is_zero() {
        cls = cls.add(CohClass::term(zero, shift.neg(), vec![]));
    }
    (cls, ok)
}

/// Σ_i D̃_i as a pairing vector on every charge vector; zero on a
/// Calabi-Yau geometry.
pub fn calabi_yau_defect(fan: &ExtendedStackyFan) -> Vec<Q> {
    let lat = ChargeLattice::new(fan);
    lat.basis.iter().map(|l| l.iter().sum()).collect()
}

pub fn describe_cones(cones: &[Cone]) -> String {
    cones.iter().map(|c| c.to_string()).join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> ExtendedStackyFan {
        ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![], vec![vec![0, 1, 2]])
    }

    fn c3z3() -> ExtendedStackyFan {
        ExtendedStackyFan::new(3, vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![vec![1, 0, 1]], vec![vec![0, 1, 2]])
    }

    fn a1() -> ExtendedStackyFan {
        ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 2, 1], vec![0, 0, 1]], vec![vec![0, 1, 1]], vec![vec![0, 1, 2]])
    }

    fn kp2() -> ExtendedStackyFan {
        ExtendedStackyFan::new(
            3,
            vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1], vec![1, 0, 1]],
            vec![],
            vec![vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]],
        )
    }

    #[test]
    fn brane_normal_forms() {
        let b = analyze_brane(&c3(), (1, 2), 1).unwrap();
        assert_eq!((b.m, b.r, b.s), (1, 1, 0));
        assert_eq!(b.coords, vec![(1, 0), (0, 1), (0, 0)]);
        let b = analyze_brane(&c3z3(), (1, 2), 0).unwrap();
        assert_eq!((b.m, b.r, b.s), (1, 3, 1));
        let b = analyze_brane(&a1(), (1, 2), 0).unwrap();
        assert_eq!((b.m, b.r, b.s), (2, 1, 0));
        let b = analyze_brane(&kp2(), (1, 2), 0).unwrap();
        assert_eq!((b.m, b.r, b.s), (1, 1, 0));
        assert_eq!(b.perm, vec![3, 1, 2, 0]);
    }

    #[test]
    fn inner_brane_rejected() {
        assert_eq!(analyze_brane(&kp2(), (1, 3), 0).unwrap_err(), Error::InnerBrane);
    }

    #[test]
    fn dual_c3() {
        let d = construct_dual(&analyze_brane(&c3(), (1, 2), 1).unwrap()).unwrap();
        assert_eq!(d.fan.vectors[3], vec![-1, -1, 1, 1]);
        let mut cones = d.fan.maximal_cones.clone();
        cones.sort();
        assert_eq!(cones, vec![Cone(vec![0, 1, 2, 4]), Cone(vec![0, 2, 3, 4]), Cone(vec![1, 2, 3, 4])]);
        let d0 = construct_dual(&analyze_brane(&c3(), (1, 2), 0).unwrap()).unwrap();
        assert_eq!(d0.fan.maximal_cones.len(), 2);
        assert_eq!(d0.fan.compact_walls(), vec![Cone(vec![1, 2, 4])]);
    }

    #[test]
    fn cone_maps_c3() {
        let d = construct_dual(&analyze_brane(&c3(), (1, 2), 1).unwrap()).unwrap();
        let maps = d.cone_maps();
        let m0 = maps.iter().find(|m| m.sigma == d.sigma0_tilde).unwrap();
        assert_eq!(m0.delta2, Cone(vec![2, 3, 4]));
        assert_eq!(m0.delta3, Cone(vec![1, 3, 4]));
        assert_eq!(m0.delta4, Cone(vec![1, 2, 3]));
        assert_eq!(m0.delta0, Cone(vec![1, 2]));
        let other = maps.iter().find(|m| m.sigma == Cone(vec![0, 2, 3, 4])).unwrap();
        assert_eq!(other.delta0, Cone(vec![0, 2]));
        for cm in &maps {
            let (i2, i3) = d.i2_i3(&cm.sigma);
            assert_eq!(d.stabilizer_formula(i2, i3) as u64, d.fan.stabilizer_order(&cm.sigma));
        }
    }

    #[test]
    fn kp2_bases() {
        let b = analyze_brane(&kp2(), (1, 2), 0).unwrap();
        let d = construct_dual(&b).unwrap();
        let cb = second_cohomology_bases(&d, None).unwrap();
        assert_eq!(cb.h, vec![vec![qi(0), qi(0), qi(0), qi(1)]]);
        let m: Vec<Q> = cb.m.iter().map(|r| r[0].clone()).collect();
        assert_eq!(m, vec![qi(-3), qi(1), qi(1), qi(1)]);
        let rp1: Vec<Q> = cb.m_tilde[4].clone();
        let rp2: Vec<Q> = cb.m_tilde[5].clone();
        assert_eq!(rp1, vec![qi(0), qi(1)]);
        assert_eq!(rp2, vec![qi(0), qi(-1)]);
    }

    #[test]
    fn c3_bases() {
        let d = construct_dual(&analyze_brane(&c3(), (1, 2), 1).unwrap()).unwrap();
        let cb = second_cohomology_bases(&d, None).unwrap();
        assert!(cb.h.is_empty());
        assert_eq!(cb.h_tilde.len(), 1);
        assert_eq!(cb.m_tilde[3], vec![qi(1)]);
        assert_eq!(cb.m_tilde[4], vec![qi(-1)]);
    }
}
