//! Extended stacky fans: cones, stabilizers, Box elements, flags, validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{det, fract, qb, qi, row_reduce, solve, Q};
use crate::error::{Error, Result};
use crate::lattice::{quotient_group, quotient_representatives, FiniteAbelianGroup, IntMatrix};

/// A cone given by its sorted 0-based ray indices. Displayed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cone(pub Vec<usize>);

impl Cone {
    pub fn new(mut rays: Vec<usize>) -> Self {
        rays.sort_unstable();
        rays.dedup();
        Cone(rays)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &Cone) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn without(&self, i: usize) -> Cone {
        Cone(self.0.iter().copied().filter(|&j| j != i).collect())
    }

    pub fn with(&self, i: usize) -> Cone {
        let mut v = self.0.clone();
        v.push(i);
        Cone::new(v)
    }

    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(|i| i + 1).join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedStackyFan {
    pub rank: usize,
    /// All vectors b_1..b_R, fan rays and extras together.
    pub vectors: Vec<Vec<i64>>,
    /// `true` for extra lattice points that are not rays of the fan.
    pub is_extra: Vec<bool>,
    pub maximal_cones: Vec<Cone>,
    /// Coordinate holding the Calabi-Yau height.
    pub height_index: usize,
}

/// Sector of a cone: a Box element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorLabel {
    pub cone: Cone,
    /// Fractional coordinates in [0,1) along `cone.0`.
    pub coeffs: Vec<Q>,
    pub point: Vec<BigInt>,
    pub age: Q,
}

impl SectorLabel {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff_of(&self, ray: usize) -> Q {
        self.cone.position(ray).map(|p| self.coeffs[p].clone()).unwrap_or_else(Q::zero)
    }

    /// Order of the element in its stabilizer group.
    pub fn order(&self) -> u64 {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
            .to_u64()
            .expect("order overflow")
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.point.iter().join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagData {
    /// |G_τ|
    pub m: u64,
    /// |G_σ| / |G_τ|
    pub r: u64,
    /// Order of the image of the flag character.
    pub chi_image_order: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub simplices: usize,
    pub hull_vertices: Vec<usize>,
    pub hull_volume: Q,
    pub simplex_volume: Q,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ValidateOptions {
    pub complete_extras: bool,
}

fn invalid(msg: String) -> Error {
    Error::InvalidFan(msg)
}

impl ExtendedStackyFan {
    pub fn new(rank: usize, rays: Vec<Vec<i64>>, extras: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Self {
        let n_rays = rays.len();
        let mut vectors = rays;
        let mut is_extra = vec![false; n_rays];
        is_extra.extend(std::iter::repeat(true).take(extras.len()));
        vectors.extend(extras);
        ExtendedStackyFan {
            rank,
            vectors,
            is_extra,
            maximal_cones: cones.into_iter().map(Cone::new).collect(),
            height_index: rank.saturating_sub(1),
        }
    }

    pub fn num_vectors(&self) -> usize {
        self.vectors.len()
    }

    pub fn fan_rays(&self) -> Vec<usize> {
        (0..self.vectors.len()).filter(|&i| !self.is_extra[i]).collect()
    }

    pub fn num_fan_rays(&self) -> usize {
        self.is_extra.iter().filter(|e| !**e).count()
    }

    pub fn extras(&self) -> Vec<usize> {
        (0..self.vectors.len()).filter(|&i| self.is_extra[i]).collect()
    }

    pub fn vector_q(&self, i: usize) -> Vec<Q> {
        self.vectors[i].iter().map(|&x| qi(x)).collect()
    }

    pub fn cone_matrix(&self, cone: &Cone) -> IntMatrix {
        let cols: Vec<Vec<i64>> = cone.0.iter().map(|&i| self.vectors[i].clone()).collect();
        IntMatrix::from_columns(&cols, self.rank)
    }

    /// Rows of the rank x |cone| matrix with the cone's rays as columns.
    pub fn cone_rows_q(&self, cone: &Cone) -> Vec<Vec<Q>> {
        (0..self.rank).map(|r| cone.0.iter().map(|&i| qi(self.vectors[i][r])).collect()).collect()
    }

    pub fn cones_of_dim(&self, k: usize) -> Vec<Cone> {
        let set: BTreeSet<Cone> = self
            .maximal_cones
            .iter()
            .flat_map(|c| c.0.iter().copied().combinations(k).map(Cone))
            .collect();
        set.into_iter().collect()
    }

    pub fn is_face(&self, cone: &Cone) -> bool {
        self.maximal_cones.iter().any(|m| cone.is_subset(m))
    }

    pub fn containing_maximal(&self, cone: &Cone) -> Vec<&Cone> {
        self.maximal_cones.iter().filter(|m| cone.is_subset(m)).collect()
    }

    /// Walls contained in exactly two maximal cones.
    pub fn compact_walls(&self) -> Vec<Cone> {
        self.cones_of_dim(self.rank - 1).into_iter().filter(|t| self.containing_maximal(t).len() == 2).collect()
    }

    pub fn stabilizer(&self, cone: &Cone) -> FiniteAbelianGroup {
        quotient_group(&self.cone_matrix(cone), self.rank).expect("cone is not simplicial")
    }

    pub fn stabilizer_order(&self, cone: &Cone) -> u64 {
        self.stabilizer(cone).order_u64()
    }

    /// Box(σ), sorted by (age, coefficients); the zero label comes first.
    pub fn box_elements(&self, cone: &Cone) -> Vec<SectorLabel> {
        let reps = quotient_representatives(&self.cone_matrix(cone)).expect("cone is not simplicial");
        let mut out: Vec<SectorLabel> = reps.into_iter().map(|(_, c)| self.label_from_coeffs(cone, c)).collect();
        out.sort_by(|a, b| (&a.age, &a.coeffs).cmp(&(&b.age, &b.coeffs)));
        out
    }

    pub fn label_from_coeffs(&self, cone: &Cone, coeffs: Vec<Q>) -> SectorLabel {
        let coeffs: Vec<Q> = coeffs.iter().map(fract).collect();
        let mut pt = vec![Q::zero(); self.rank];
        for (c, &i) in coeffs.iter().zip(&cone.0) {
            for (r, x) in pt.iter_mut().enumerate() {
                *x += c * qi(self.vectors[i][r]);
            }
        }
        let point = pt
            .iter()
            .map(|x| {
                assert!(x.is_integer(), "box point not integral");
                x.to_integer()
            })
            .collect();
        let age = coeffs.iter().sum();
        SectorLabel { cone: cone.clone(), coeffs, point, age }
    }

    /// The Box element of `cone` congruent to the lattice point `p`.
    pub fn sector_of_point(&self, cone: &Cone, p: &[Q]) -> SectorLabel {
        let c = solve(&self.cone_rows_q(cone), p).expect("point outside the span of the cone");
        self.label_from_coeffs(cone, c)
    }

    pub fn zero_label(&self, cone: &Cone) -> SectorLabel {
        self.label_from_coeffs(cone, vec![Q::zero(); cone.dim()])
    }

    pub fn mul(&self, a: &SectorLabel, b: &SectorLabel) -> SectorLabel {
        assert_eq!(a.cone, b.cone);
        self.label_from_coeffs(&a.cone, a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect())
    }

    pub fn inv(&self, a: &SectorLabel) -> SectorLabel {
        self.label_from_coeffs(&a.cone, a.coeffs.iter().map(|x| -x).collect())
    }

    /// Re-express a label of a face as a label of a larger cone.
    pub fn lift_label(&self, a: &SectorLabel, cone: &Cone) -> SectorLabel {
        let coeffs = cone.0.iter().map(|&i| a.coeff_of(i)).collect();
        self.label_from_coeffs(cone, coeffs)
    }

    /// Restrict a label of σ to the face τ, if it lies in G_τ.
    pub fn restrict_label(&self, a: &SectorLabel, face: &Cone) -> Option<SectorLabel> {
        let ok = a.cone.0.iter().zip(&a.coeffs).all(|(i, c)| face.contains(*i) || c.is_zero());
        ok.then(|| self.label_from_coeffs(face, face.0.iter().map(|&i| a.coeff_of(i)).collect()))
    }

    pub fn flag_data(&self, tau: &Cone, sigma: &Cone) -> FlagData {
        assert!(tau.is_subset(sigma) && tau.dim() + 1 == sigma.dim());
        let m = self.stabilizer_order(tau);
        let gs = self.stabilizer_order(sigma);
        let omitted = sigma.0.iter().copied().find(|i| !tau.contains(*i)).unwrap();
        let chi_image_order = self
            .box_elements(sigma)
            .iter()
            .fold(BigInt::one(), |acc, k| acc.lcm(k.coeff_of(omitted).denom()))
            .to_u64()
            .unwrap();
        FlagData { m, r: gs / m, chi_image_order }
    }

    /// The ray of σ not in τ.
    pub fn omitted_ray(tau: &Cone, sigma: &Cone) -> usize {
        sigma.0.iter().copied().find(|i| !tau.contains(*i)).expect("tau is not a facet")
    }

    /// Character w with ⟨w,b_j⟩ = δ_{jk} on the rays of σ, k the ray omitted by τ.
    pub fn tangent_weight(&self, tau: &Cone, sigma: &Cone) -> Vec<Q> {
        let k = Self::omitted_ray(tau, sigma);
        let rows: Vec<Vec<Q>> = sigma.0.iter().map(|&j| self.vector_q(j)).collect();
        let rhs: Vec<Q> = sigma.0.iter().map(|&j| if j == k { Q::one() } else { Q::zero() }).collect();
        solve(&rows, &rhs).expect("cone is not full-dimensional")
    }

    fn cross_section(&self, i: usize) -> Vec<Q> {
        self.vectors[i].iter().enumerate().filter(|(r, _)| *r != self.height_index).map(|(_, &x)| qi(x)).collect()
    }

    pub fn validate(&self, opts: ValidateOptions) -> Result<ValidationReport> {
        let n = self.vectors.len();
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != self.rank {
                return Err(invalid(format!("vector {} has dimension {}, expected {}", i + 1, v.len(), self.rank)));
            }
        }
        for c in &self.maximal_cones {
            if let Some(&i) = c.0.iter().find(|&&i| i >= n || self.is_extra[i]) {
                return Err(invalid(format!("cone {} uses index {} which is not a fan ray", c, i + 1)));
            }
            if c.dim() != self.rank {
                return Err(invalid(format!("cone {} is not maximal-dimensional", c)));
            }
            let mut rows = self.cone_rows_q(c);
            if row_reduce(&mut rows).len() < c.dim() {
                return Err(invalid(format!("cone {} is not simplicial", c)));
            }
        }
        for i in 0..n {
            if self.vectors[i][self.height_index] != 1 {
                return Err(invalid(format!("Calabi-Yau height check fails at vector {}", i + 1)));
            }
        }
        let rays = self.fan_rays();
        for (&a, &b) in rays.iter().tuple_combinations() {
            if self.vectors[a] == self.vectors[b] {
                return Err(invalid(format!("rays {} and {} are proportional", a + 1, b + 1)));
            }
        }
        for &r in &rays {
            if !self.maximal_cones.iter().any(|c| c.contains(r)) {
                return Err(invalid(format!("ray {} lies in no maximal cone", r + 1)));
            }
        }
        let pts: Vec<Vec<Q>> = (0..n).map(|i| self.cross_section(i)).collect();
        let ray_pts: Vec<Vec<Q>> = rays.iter().map(|&i| pts[i].clone()).collect();
        let k = self.rank - 1;
        // codimension-one faces of the triangulation
        let mut faces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.maximal_cones.iter().enumerate() {
            for f in c.0.iter().copied().combinations(k) {
                faces.entry(f).or_default().push(ci);
            }
        }
        for (f, owners) in &faces {
            let fpts: Vec<Vec<Q>> = f.iter().map(|&i| pts[i].clone()).collect();
            let (normal, h) = hyperplane(&fpts);
            let side = |p: &Vec<Q>| -> Q { dot(&normal, p) - &h };
            let fc = Cone(f.clone());
            match owners.len() {
                1 => {
                    let mut signs = ray_pts.iter().map(|p| side(p)).filter(|s| !s.is_zero());
                    if let Some(first) = signs.next() {
                        if signs.any(|s| s.is_positive() != first.is_positive()) {
                            return Err(invalid(format!("face {} lies in one cone but is interior to the support", fc)));
                        }
                    }
                }
                2 => {
                    let opp: Vec<Q> = owners
                        .iter()
                        .map(|&ci| {
                            let v = Self::omitted_ray(&fc, &self.maximal_cones[ci]);
                            side(&pts[v])
                        })
                        .collect();
                    if (&opp[0] * &opp[1]).is_positive() || opp.iter().any(|s| s.is_zero()) {
                        return Err(invalid(format!(
                            "cones {} and {} overlap across face {}",
                            self.maximal_cones[owners[0]], self.maximal_cones[owners[1]], fc
                        )));
                    }
                }
                _ => {
                    let names = owners.iter().map(|&ci| self.maximal_cones[ci].to_string()).join(", ");
                    return Err(invalid(format!("face {} is shared by more than two cones: {}", fc, names)));
                }
            }
        }
        let simplex_volume: Q = self
            .maximal_cones
            .iter()
            .map(|c| simplex_volume(&c.0.iter().map(|&i| pts[i].clone()).collect::<Vec<_>>()))
            .sum();
        let hull_volume = hull_volume(&ray_pts);
        if simplex_volume != hull_volume {
            return Err(invalid(format!(
                "cones cover volume {} of the hull volume {}; the fan is not semi-projective",
                simplex_volume, hull_volume
            )));
        }
        let facets = hull_facets(&ray_pts);
        let inside = |p: &Vec<Q>| facets.iter().all(|(nv, h)| dot(nv, p) <= *h);
        for i in self.extras() {
            if !inside(&pts[i]) {
                return Err(invalid(format!("extra vector {} lies outside the support polytope", i + 1)));
            }
        }
        if opts.complete_extras {
            let listed: BTreeSet<Vec<Q>> = pts.iter().cloned().collect();
            for p in lattice_points_in(&ray_pts, &facets) {
                if !listed.contains(&p) {
                    let shown = p.iter().map(|x| x.to_string()).join(",");
                    return Err(invalid(format!("lattice point ({}) of the support polytope is not listed", shown)));
                }
            }
        }
        let hull_vertices = rays
            .iter()
            .copied()
            .filter(|&i| {
                let others: Vec<Vec<Q>> = rays.iter().filter(|&&j| j != i).map(|&j| pts[j].clone()).collect();
                others.is_empty() || !point_in_hull(&pts[i], &others)
            })
            .collect();
        Ok(ValidationReport { simplices: self.maximal_cones.len(), hull_vertices, hull_volume, simplex_volume })
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hyperplane ⟨n,x⟩ = h through k affinely independent points in Q^k.
fn hyperplane(pts: &[Vec<Q>]) -> (Vec<Q>, Q) {
    let k = pts[0].len();
    // rows: (p, -1) · (n, h) = 0
    let mut rows: Vec<Vec<Q>> = pts
        .iter()
        .map(|p| {
            let mut r = p.clone();
            r.push(-Q::one());
            r
        })
        .collect();
    let piv = row_reduce(&mut rows);
    let free = (0..=k).find(|c| !piv.contains(c)).expect("degenerate face");
    let mut sol = vec![Q::zero(); k + 1];
    sol[free] = Q::one();
    for (r, &c) in piv.iter().enumerate() {
        sol[c] = -rows[r][free].clone();
    }
    let h = sol.pop().unwrap();
    (sol, h)
}

fn simplex_volume(pts: &[Vec<Q>]) -> Q {
    let k = pts.len() - 1;
    let m: Vec<Vec<Q>> = pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect()).collect();
    det(&m).abs() / qb(&crate::arith::factorial(k as u64))
}

fn affine_dim(pts: &[Vec<Q>]) -> usize {
    if pts.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<Q>> = pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect()).collect();
    row_reduce(&mut m).len()
}

/// Facets of the convex hull of full-dimensional points, as (normal, h)
/// with ⟨normal,x⟩ ≤ h on the hull; normals scaled to first nonzero ±1.
fn hull_facets(pts: &[Vec<Q>]) -> Vec<(Vec<Q>, Q)> {
    let k = pts[0].len();
    let mut out: Vec<(Vec<Q>, Q)> = vec![];
    for sub in (0..pts.len()).combinations(k) {
        let sp: Vec<Vec<Q>> = sub.iter().map(|&i| pts[i].clone()).collect();
        if affine_dim(&sp) + 1 < k {
            continue;
        }
        let (mut nv, mut h) = hyperplane(&sp);
        let vals: Vec<Q> = pts.iter().map(|p| dot(&nv, p) - &h).collect();
        let pos = vals.iter().any(|v| v.is_positive());
        let neg = vals.iter().any(|v| v.is_negative());
        if pos && neg {
            continue;
        }
        if pos {
            nv.iter_mut().for_each(|x| *x = -x.clone());
            h = -h;
        }
        let lead = nv.iter().find(|x| !x.is_zero()).unwrap().abs();
        nv.iter_mut().for_each(|x| *x = &*x / &lead);
        h /= lead;
        if !out.iter().any(|(a, b)| *a == nv && *b == h) {
            out.push((nv, h));
        }
    }
    out
}

/// Volume of the convex hull of points in Q^k (zero if not full-dimensional).
pub fn hull_volume(pts: &[Vec<Q>]) -> Q {
    if pts.is_empty() {
        return Q::zero();
    }
    let k = pts[0].len();
    if k == 0 || affine_dim(pts) < k {
        return Q::zero();
    }
    if k == 1 {
        let lo = pts.iter().map(|p| &p[0]).min().unwrap();
        let hi = pts.iter().map(|p| &p[0]).max().unwrap();
        return hi - lo;
    }
    let centre: Vec<Q> = (0..k).map(|c| pts.iter().map(|p| &p[c]).sum::<Q>() / qi(pts.len() as i64)).collect();
    let mut total = Q::zero();
    for (nv, h) in hull_facets(pts) {
        let on: Vec<&Vec<Q>> = pts.iter().filter(|p| dot(&nv, p) == h).collect();
        let drop = nv.iter().position(|x| !x.is_zero()).unwrap();
        let proj: Vec<Vec<Q>> =
            on.iter().map(|p| p.iter().enumerate().filter(|(c, _)| *c != drop).map(|(_, x)| x.clone()).collect()).collect();
        let area = hull_volume(&proj);
        let height = &h - dot(&nv, &centre);
        total += height * area / (qi(k as i64) * nv[drop].abs());
    }
    total
}

fn point_in_hull(p: &[Q], pts: &[Vec<Q>]) -> bool {
    if affine_dim(pts) < p.len() {
        return false;
    }
    hull_facets(pts).iter().all(|(nv, h)| dot(nv, p) <= *h)
}

fn lattice_points_in(pts: &[Vec<Q>], facets: &[(Vec<Q>, Q)]) -> Vec<Vec<Q>> {
    let k = pts[0].len();
    let lo: Vec<i64> = (0..k).map(|c| pts.iter().map(|p| p[c].floor().to_integer()).min().unwrap().to_i64().unwrap()).collect();
    let hi: Vec<i64> = (0..k).map(|c| pts.iter().map(|p| p[c].ceil().to_integer()).max().unwrap().to_i64().unwrap()).collect();
    (0..k)
        .map(|c| lo[c]..=hi[c])
        .multi_cartesian_product()
        .map(|v| v.into_iter().map(qi).collect::<Vec<Q>>())
        .filter(|p| facets.iter().all(|(nv, h)| dot(nv, p) <= *h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    pub fn c3() -> ExtendedStackyFan {
        ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![], vec![vec![0, 1, 2]])
    }

    fn kp2() -> ExtendedStackyFan {
        ExtendedStackyFan::new(
            3,
            vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1], vec![1, 0, 1]],
            vec![],
            vec![vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]],
        )
    }

    fn c3z3() -> ExtendedStackyFan {
        ExtendedStackyFan::new(3, vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![vec![1, 0, 1]], vec![vec![0, 1, 2]])
    }

    fn a1() -> ExtendedStackyFan {
        ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 2, 1], vec![0, 0, 1]], vec![vec![0, 1, 1]], vec![vec![0, 1, 2]])
    }

    #[test]
    fn validate_examples() {
        assert!(c3().validate(ValidateOptions { complete_extras: true }).is_ok());
        let rep = kp2().validate(ValidateOptions { complete_extras: true }).unwrap();
        assert_eq!(rep.hull_vertices, vec![0, 1, 2]);
        assert_eq!(rep.hull_volume, q(3, 2));
        assert!(c3z3().validate(ValidateOptions { complete_extras: true }).is_ok());
        assert!(a1().validate(ValidateOptions { complete_extras: true }).is_ok());
    }

    #[test]
    fn height_check_fails() {
        let f = ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 2]], vec![], vec![vec![0, 1, 2]]);
        let e = f.validate(ValidateOptions::default()).unwrap_err();
        assert!(e.to_string().contains("height"), "{e}");
    }

    #[test]
    fn missing_cone_not_semiprojective() {
        let mut f = kp2();
        f.maximal_cones.pop();
        assert!(f.validate(ValidateOptions::default()).is_err());
    }

    #[test]
    fn incomplete_extras_flagged() {
        let f = ExtendedStackyFan::new(3, vec![vec![3, -1, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![], vec![vec![0, 1, 2]]);
        assert!(f.validate(ValidateOptions::default()).is_ok());
        assert!(f.validate(ValidateOptions { complete_extras: true }).is_err());
    }

    #[test]
    fn stabilizers_and_boxes() {
        let s0 = Cone(vec![0, 1, 2]);
        assert_eq!(c3z3().stabilizer_order(&s0), 3);
        assert_eq!(c3().stabilizer_order(&Cone(vec![1, 2])), 1);
        assert_eq!(a1().stabilizer_order(&s0), 2);
        let pts: Vec<Vec<i64>> = c3z3().box_elements(&s0).iter().map(|l| l.point.iter().map(|x| x.to_i64().unwrap()).collect()).collect();
        assert_eq!(pts, vec![vec![0, 0, 0], vec![1, 0, 1], vec![2, 0, 2]]);
        let b = a1().box_elements(&Cone(vec![1, 2]));
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].point, vec![BigInt::from(0), BigInt::from(1), BigInt::from(1)]);
        assert_eq!(b[1].age, qi(1));
    }

    #[test]
    fn flag_data_examples() {
        let s0 = Cone(vec![0, 1, 2]);
        let t0 = Cone(vec![1, 2]);
        let fd = c3z3().flag_data(&t0, &s0);
        assert_eq!((fd.m, fd.r, fd.chi_image_order), (1, 3, 3));
        let fd = a1().flag_data(&t0, &s0);
        assert_eq!((fd.m, fd.r), (2, 1));
        let fd = c3().flag_data(&t0, &s0);
        assert_eq!((fd.m, fd.r), (1, 1));
    }

    #[test]
    fn compact_walls_examples() {
        assert!(c3().compact_walls().is_empty());
        let w = kp2().compact_walls();
        assert_eq!(w, vec![Cone(vec![0, 3]), Cone(vec![1, 3]), Cone(vec![2, 3])]);
    }

    #[test]
    fn hull_square() {
        let pts = vec![vec![qi(0), qi(0)], vec![qi(2), qi(0)], vec![qi(0), qi(2)], vec![qi(2), qi(2)], vec![qi(1), qi(1)]];
        assert_eq!(hull_volume(&pts), qi(4));
        let cube: Vec<Vec<Q>> = (0..8).map(|m| (0..3).map(|b| qi((m >> b) & 1)).collect()).collect();
        assert_eq!(hull_volume(&cube), qi(1));
    }
}
