//! Torus localization on the A-model side: decorated graphs, Hurwitz-Hodge
//! descendant integrals, edge/flag/vertex factors and the graph sums for
//! disk and closed invariants.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorial, floor, fract, qb, qi, solve, Q};
use crate::bmodel::{extended_nef, gamma_lambda};
use crate::eqalg::{class_restrict, tangent_weight, u1, CohClass, EqRational};
use crate::error::{Error, Result};
use crate::maybe_parallel::IntoMaybeParallelRefIterator;
use crate::occonstruct::{BraneData, DualGeometry};
use crate::stackyfan::{Cone, ExtendedStackyFan, SectorLabel};

#[cfg(feature = "parallel")]
use rayon::iter::ParallelIterator;

/// A proper torus-invariant line l_τ with its two fixed points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantLine {
    pub wall: Cone,
    /// σA < σB.
    pub cones: [Cone; 2],
    pub omitted: [usize; 2],
    /// 𝔯(τ,σA), 𝔯(τ,σB).
    pub orders: [u64; 2],
    /// Pairing vector of the coarse class [l_τ].
    pub class: Vec<Q>,
}

pub fn invariant_lines(fan: &ExtendedStackyFan) -> Vec<InvariantLine> {
    fan.compact_walls()
        .into_iter()
        .map(|wall| {
            let mut cones: Vec<Cone> = fan.containing_maximal(&wall).into_iter().cloned().collect();
            cones.sort();
            let cones = [cones[0].clone(), cones[1].clone()];
            let omitted = [0, 1].map(|s| ExtendedStackyFan::omitted_ray(&wall, &cones[s]));
            let orders = [0, 1].map(|s| fan.flag_data(&wall, &cones[s]).r);
            // Σ_τ c_i b_i = -(b_a/𝔯A + b_b/𝔯B)
            let rhs: Vec<Q> = (0..fan.rank)
                .map(|r| {
                    -(qi(fan.vectors[omitted[0]][r]) / qi(orders[0] as i64)
                        + qi(fan.vectors[omitted[1]][r]) / qi(orders[1] as i64))
                })
                .collect();
            let c = solve(&fan.cone_rows_q(&wall), &rhs).expect("wall relation");
            let mut class = vec![Q::zero(); fan.num_vectors()];
            for (p, &i) in wall.0.iter().enumerate() {
                class[i] = c[p].clone();
            }
            class[omitted[0]] = Q::new(BigInt::one(), BigInt::from(orders[0]));
            class[omitted[1]] = Q::new(BigInt::one(), BigInt::from(orders[1]));
            InvariantLine { wall, cones, omitted, orders, class }
        })
        .collect()
}

/// Where a marking may sit, and its descendant pole.
#[derive(Clone, Debug)]
pub struct MarkingSpec {
    /// (cone, twist, restricted insertion) for every admissible placement.
    pub options: Vec<(Cone, SectorLabel, EqRational)>,
    /// w in 1/(w - ψ̄) at this marking.
    pub pole: Option<EqRational>,
}

impl MarkingSpec {
    /// Placements of an insertion class at every fixed sector where it
    /// restricts nontrivially.
    pub fn from_class(fan: &ExtendedStackyFan, class: &CohClass) -> Self {
        let mut options = vec![];
        for sigma in &fan.maximal_cones {
            for j in fan.box_elements(sigma) {
                let v = class_restrict(fan, class, sigma, &j);
                if !v.is_zero() {
                    options.push((sigma.clone(), j, v));
                }
            }
        }
        MarkingSpec { options, pole: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GraphEdge {
    /// Index into the line list.
    pub line: usize,
    pub degree: i64,
    /// Vertices at σA and σB.
    pub ends: [usize; 2],
    /// k_(e,v) at both ends.
    pub twists: [SectorLabel; 2],
}

#[derive(Clone, Debug)]
pub struct DecoratedGraph {
    pub vertices: Vec<Cone>,
    pub edges: Vec<GraphEdge>,
    /// (vertex, option index) per marking.
    pub markings: Vec<(usize, usize)>,
    pub aut: u64,
}

impl DecoratedGraph {
    fn flags_at(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().enumerate().flat_map(move |(e, ed)| (0..2).filter(move |&s| ed.ends[s] == v).map(move |s| (e, s)))
    }

    fn canonical_from(&self, v: usize, parent: Option<usize>) -> String {
        let mut marks: Vec<String> =
            self.markings.iter().enumerate().filter(|(_, m)| m.0 == v).map(|(i, m)| format!("{i}:{}", m.1)).collect();
        marks.sort();
        let mut kids: Vec<String> = self
            .flags_at(v)
            .filter(|(e, _)| Some(*e) != parent)
            .map(|(e, s)| {
                let ed = &self.edges[e];
                format!(
                    "{},{},{:?},{:?}>{}",
                    ed.line,
                    ed.degree,
                    ed.twists[s].coeffs,
                    ed.twists[1 - s].coeffs,
                    self.canonical_from(ed.ends[1 - s], Some(e))
                )
            })
            .collect();
        kids.sort();
        format!("[{};{};{}]", self.vertices[v], marks.join(" "), kids.join(" "))
    }

    /// Canonical string, rooted at the last marking's vertex when there
    /// is one.
    pub fn canonical(&self) -> String {
        match self.markings.last() {
            Some(&(v, _)) => self.canonical_from(v, None),
            None => (0..self.vertices.len()).map(|v| self.canonical_from(v, None)).min().unwrap_or_default(),
        }
    }

    pub fn total_class(&self, lines: &[InvariantLine], n: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); n];
        for e in &self.edges {
            for (o, c) in out.iter_mut().zip(&lines[e.line].class) {
                *o += qi(e.degree) * c;
            }
        }
        out
    }
}

/// A functional positive on every invariant line: the sum of the
/// extended nef generators.
fn line_grading(fan: &ExtendedStackyFan, lines: &[InvariantLine]) -> Result<Vec<Q>> {
    if lines.is_empty() {
        return Ok(vec![]);
    }
    let nef = extended_nef(fan)?;
    let mut phi = vec![Q::zero(); fan.num_vectors()];
    for r in &nef {
        for (p, x) in phi.iter_mut().zip(r) {
            *p += x;
        }
    }
    if lines.iter().any(|l| !dot(&phi, &l.class).is_positive()) {
        return Err(Error::GradingNotPositive);
    }
    Ok(phi)
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multisets of (line, degree) with total class β.
fn edge_multisets(lines: &[InvariantLine], phi: &[Q], beta: &[Q]) -> Vec<Vec<(usize, i64)>> {
    let target = dot(phi, beta);
    let steps: Vec<Q> = lines.iter().map(|l| dot(phi, &l.class)).collect();
    let mut out = vec![];
    fn rec(
        start: (usize, i64),
        left: &Q,
        steps: &[Q],
        cur: &mut Vec<(usize, i64)>,
        out: &mut Vec<Vec<(usize, i64)>>,
    ) {
        if left.is_zero() {
            out.push(cur.clone());
            return;
        }
        for l in start.0..steps.len() {
            let mut d = if l == start.0 { start.1 } else { 1 };
            loop {
                let rest = left - qi(d) * &steps[l];
                if rest.is_negative() {
                    break;
                }
                cur.push((l, d));
                rec((l, d), &rest, steps, cur, out);
                cur.pop();
                d += 1;
            }
        }
    }
    if target.is_positive() {
        rec((0, 1), &target, &steps, &mut vec![], &mut out);
    }
    let n = beta.len();
    out.retain(|ms| {
        let mut tot = vec![Q::zero(); n];
        for &(l, d) in ms {
            for (t, c) in tot.iter_mut().zip(&lines[l].class) {
                *t += qi(d) * c;
            }
        }
        tot == beta
    });
    out
}

/// All set partitions of `items`.
fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![vec![]];
    };
    let mut out = vec![];
    for p in set_partitions(rest) {
        for b in 0..p.len() {
            let mut q = p.clone();
            q[b].insert(0, first);
            out.push(q);
        }
        let mut q = p;
        q.insert(0, vec![first]);
        out.push(q);
    }
    out
}

fn is_tree(nv: usize, edges: &[[usize; 2]]) -> bool {
    if edges.len() + 1 != nv {
        return false;
    }
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for e in edges {
        let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Twists (kA, kB) of a degree-d cover of the line.
pub fn edge_twists(fan: &ExtendedStackyFan, line: &InvariantLine, d: i64) -> Vec<[SectorLabel; 2]> {
    let [sa, sb] = &line.cones;
    let a = line.omitted[0];
    let da = Q::new(BigInt::from(d), BigInt::from(line.orders[0]));
    let ca = fract(&da);
    let shift = &da - &ca;
    fan.box_elements(sa)
        .into_iter()
        .filter(|k| k.coeff_of(a) == ca)
        .map(|ka| {
            let v: Vec<Q> =
                (0..fan.rank).map(|r| -(qb(&ka.point[r]) + &shift * qi(fan.vectors[a][r]))).collect();
            let kb = fan.sector_of_point(sb, &v);
            [ka, kb]
        })
        .collect()
}

fn vertex_balanced(twists: &[SectorLabel]) -> bool {
    let n = twists[0].coeffs.len();
    (0..n).all(|c| fract(&twists.iter().map(|t| t.coeffs[c].clone()).sum::<Q>()).is_zero())
}

/// Twists k⃗_v at a vertex: k_(e,v)^{-1} for flags, k_i for markings.
fn vertex_twists(fan: &ExtendedStackyFan, g: &DecoratedGraph, markings: &[MarkingSpec], v: usize) -> Vec<SectorLabel> {
    let mut out: Vec<SectorLabel> = g.flags_at(v).map(|(e, s)| fan.inv(&g.edges[e].twists[s])).collect();
    for (i, &(mv, o)) in g.markings.iter().enumerate() {
        if mv == v {
            out.push(markings[i].options[o].1.clone());
        }
    }
    out
}

/// Decorated graphs of degree β with the given markings, one per
/// isomorphism class, with |Aut| filled in.
pub fn enumerate_graphs(
    fan: &ExtendedStackyFan,
    lines: &[InvariantLine],
    beta: &[Q],
    markings: &[MarkingSpec],
) -> Result<Vec<DecoratedGraph>> {
    let mut shapes: Vec<(Vec<Cone>, Vec<(usize, i64, [usize; 2])>, u64)> = vec![];
    if beta.iter().all(|x| x.is_zero()) {
        for s in &fan.maximal_cones {
            shapes.push((vec![s.clone()], vec![], 1));
        }
    } else {
        let phi = line_grading(fan, lines)?;
        for ms in edge_multisets(lines, &phi, beta) {
            let mut sym = 1u64;
            let mut run = 1u64;
            for w in ms.windows(2) {
                run = if w[0] == w[1] { run + 1 } else { 1 };
                sym *= run;
            }
            // endpoints 2e (σA side) and 2e+1 (σB side), grouped by cone
            let mut groups: BTreeMap<Cone, Vec<usize>> = BTreeMap::new();
            for (e, &(l, _)) in ms.iter().enumerate() {
                groups.entry(lines[l].cones[0].clone()).or_default().push(2 * e);
                groups.entry(lines[l].cones[1].clone()).or_default().push(2 * e + 1);
            }
            let per_group: Vec<(Cone, Vec<Vec<Vec<usize>>>)> =
                groups.into_iter().map(|(c, items)| (c, set_partitions(&items))).collect();
            let mut choice = vec![0usize; per_group.len()];
            'outer: loop {
                let mut vertices = vec![];
                let mut owner = vec![0usize; 2 * ms.len()];
                for (gi, (c, parts)) in per_group.iter().enumerate() {
                    for block in &parts[choice[gi]] {
                        for &p in block {
                            owner[p] = vertices.len();
                        }
                        vertices.push(c.clone());
                    }
                }
                let ends: Vec<[usize; 2]> = (0..ms.len()).map(|e| [owner[2 * e], owner[2 * e + 1]]).collect();
                if is_tree(vertices.len(), &ends) {
                    let edges = ms.iter().zip(&ends).map(|(&(l, d), &en)| (l, d, en)).collect();
                    shapes.push((vertices, edges, sym));
                }
                for gi in 0..choice.len() {
                    choice[gi] += 1;
                    if choice[gi] < per_group[gi].1.len() {
                        continue 'outer;
                    }
                    choice[gi] = 0;
                }
                break;
            }
        }
    }

    let mut classes: BTreeMap<String, (DecoratedGraph, u64, u64)> = BTreeMap::new();
    let mut twist_cache: BTreeMap<(usize, i64), Vec<[SectorLabel; 2]>> = BTreeMap::new();
    for (vertices, edges, sym) in shapes {
        let placements: Vec<Vec<(usize, usize)>> = markings
            .iter()
            .map(|m| {
                let mut opts = vec![];
                for (v, c) in vertices.iter().enumerate() {
                    for (o, opt) in m.options.iter().enumerate() {
                        if &opt.0 == c {
                            opts.push((v, o));
                        }
                    }
                }
                opts
            })
            .collect();
        let twist_opts: Vec<Vec<[SectorLabel; 2]>> = edges
            .iter()
            .map(|&(l, d, _)| twist_cache.entry((l, d)).or_insert_with(|| edge_twists(fan, &lines[l], d)).clone())
            .collect();
        if placements.iter().any(|p| p.is_empty()) || twist_opts.iter().any(|t| t.is_empty()) {
            continue;
        }
        let dims: Vec<usize> = placements.iter().map(|p| p.len()).chain(twist_opts.iter().map(|t| t.len())).collect();
        let mut idx = vec![0usize; dims.len()];
        let nm = markings.len();
        loop {
            let g = DecoratedGraph {
                vertices: vertices.clone(),
                edges: edges
                    .iter()
                    .enumerate()
                    .map(|(e, &(l, d, ends))| GraphEdge { line: l, degree: d, ends, twists: twist_opts[e][idx[nm + e]].clone() })
                    .collect(),
                markings: (0..nm).map(|i| placements[i][idx[i]]).collect(),
                aut: 1,
            };
            let special_ok = (0..g.vertices.len()).all(|v| {
                let tw = vertex_twists(fan, &g, markings, v);
                !tw.is_empty() && vertex_balanced(&tw)
            });
            if special_ok {
                let key = g.canonical();
                classes.entry(key).or_insert((g, sym, 0)).2 += 1;
            }
            let mut k = 0;
            while k < dims.len() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == dims.len() {
                break;
            }
        }
    }
    Ok(classes
        .into_values()
        .map(|(mut g, sym, count)| {
            assert_eq!(sym % count, 0, "orbit size must divide the edge symmetry");
            g.aut = sym / count;
            g
        })
        .collect())
}

/// ∫ Π_{i∈S} 1/(W_i - ψ̄_i) over the n-pointed moduli of twisted curves to
/// BG, with the unstable conventions for n = 1, 2.
pub fn descendant_integral(group_order: u64, poles: &[EqRational], n: usize) -> EqRational {
    let inv_g = EqRational::from_q(Q::new(BigInt::one(), BigInt::from(group_order)));
    match (n, poles.len()) {
        (1, 1) => poles[0].mul(&inv_g),
        (2, 1) => inv_g,
        (2, 2) => inv_g.div(&poles[0].add(&poles[1])),
        (n, 0) if n == 3 => inv_g,
        (n, k) if n >= 3 && k > 0 => {
            let mut v = inv_g;
            let mut s = EqRational::zero();
            for w in poles {
                v = v.div(w);
                s = s.add(&w.recip());
            }
            v.mul(&s.pow((n - 3) as i64))
        }
        _ => EqRational::zero(),
    }
}

/// (n-3)!/(|G| Π a_i!) when Σ a_i = n - 3, else 0.
pub fn descendant_monomial(group_order: u64, exps: &[u64]) -> Q {
    let n = exps.len() as u64;
    if n < 3 || exps.iter().sum::<u64>() != n - 3 {
        return Q::zero();
    }
    let den: BigInt = exps.iter().map(|&a| factorial(a)).product::<BigInt>() * BigInt::from(group_order);
    Q::new(factorial(n - 3), den)
}

/// Rank of 𝔼_ρ for the character of Z/N sending 1 to e^{2πi a/N}, on a
/// genus zero curve with twists k⃗.
pub fn hodge_rank(order: i64, twists: &[i64], a: i64) -> Q {
    let cs: Vec<Q> = twists.iter().map(|&k| fract(&Q::new(BigInt::from(a * k), BigInt::from(order)))).collect();
    if cs.iter().all(|c| c.is_zero()) {
        return Q::zero();
    }
    cs.iter().sum::<Q>() - Q::one()
}

/// Rank bookkeeping of Mumford's relation
/// Λ_ρ(w) Λ_ρ∨(-w) = (-1)^{rk 𝔼_ρ∨} w^{rk 𝔼_ρ + rk 𝔼_ρ∨}.
pub fn mumford_check(order: i64, twists: &[i64], a: i64) -> bool {
    let balanced = twists.iter().sum::<i64>().rem_euclid(order) == 0;
    if !balanced {
        return false;
    }
    let r = hodge_rank(order, twists, a);
    let rv = hodge_rank(order, twists, -a);
    let ok_int = r.is_integer() && rv.is_integer() && !r.is_negative() && !rv.is_negative();
    let nontrivial = twists.iter().filter(|&&k| (a * k).rem_euclid(order) != 0).count() as i64;
    let expect = if nontrivial == 0 { Q::zero() } else { qi(nontrivial - 2) };
    // both Λ-products are 1 in rank 0, matching w^0
    ok_int && r.clone() + rv.clone() == expect
}

/// 𝐡(e,v): Euler class of the k-fixed tangent space at σ.
pub fn flag_factor(fan: &ExtendedStackyFan, sigma: &Cone, k: &SectorLabel) -> EqRational {
    let mut out = EqRational::one();
    for &i in &sigma.0 {
        if k.coeff_of(i).is_zero() {
            out = out.mul(&tangent_weight(fan, &sigma.without(i), sigma));
        }
    }
    out
}

/// 𝐡(e) for a degree-d cover of the line whose twist at σA is kA.
pub fn edge_factor(fan: &ExtendedStackyFan, line: &InvariantLine, d: i64, ka: &SectorLabel) -> Result<EqRational> {
    let [sa, sb] = &line.cones;
    let tau = &line.wall;
    let big_w = tangent_weight(fan, tau, sa).scale(&qi(line.orders[0] as i64));
    let dq = qi(d);
    let step = big_w.scale(&dq.recip());
    let mut out = EqRational::one();
    let lo = -floor(&Q::new(BigInt::from(d), BigInt::from(line.orders[1]))).to_i64().unwrap();
    let hi = floor(&Q::new(BigInt::from(d), BigInt::from(line.orders[0]))).to_i64().unwrap();
    for t in lo..=hi {
        if t != 0 {
            out = out.div(&step.scale(&qi(t)));
        }
    }
    for &i in &tau.0 {
        let alpha = tangent_weight(fan, &sa.without(i), sa);
        let alpha_b = tangent_weight(fan, &sb.without(i), sb);
        let ratio = alpha.sub(&alpha_b).div(&big_w);
        let deg = ratio.as_constant().ok_or_else(|| Error::InvalidFan(format!("normal degree along {tau} is not constant")))?
            * &dq;
        let eps = ka.coeff_of(i);
        if !deg.is_negative() {
            let top = floor(&(&deg - &eps)).to_i64().unwrap();
            for a in 0..=top {
                let wt = alpha.sub(&step.scale(&(qi(a) + &eps)));
                if !wt.is_zero() {
                    out = out.div(&wt);
                }
            }
        } else {
            let top = floor(&(&eps - &deg - Q::one())).to_i64().unwrap();
            for a in 1..=top {
                let wt = alpha.add(&step.scale(&(qi(a) - &eps)));
                if !wt.is_zero() {
                    out = out.mul(&wt);
                }
            }
        }
    }
    Ok(out)
}

/// 𝐡(v) for a genus zero vertex with twists k⃗_v; only configurations in
/// which every nontrivial Hurwitz-Hodge bundle has rank 0 are supported.
pub fn vertex_factor(fan: &ExtendedStackyFan, sigma: &Cone, twists: &[SectorLabel]) -> Result<EqRational> {
    let mut out = EqRational::one();
    for &i in &sigma.0 {
        let cs: Vec<Q> = twists.iter().map(|t| t.coeff_of(i)).collect();
        if cs.iter().all(|c| c.is_zero()) {
            let w = tangent_weight(fan, &sigma.without(i), sigma);
            if w.is_zero() {
                return Err(Error::PoleAtRestriction(format!("zero tangent weight at {sigma}")));
            }
            out = out.div(&w);
        } else if cs.iter().sum::<Q>() - Q::one() != Q::zero() {
            return Err(Error::UnsupportedVertex);
        }
    }
    Ok(out)
}

/// C_Γ: the full localization contribution of one graph.
pub fn graph_contribution(
    fan: &ExtendedStackyFan,
    lines: &[InvariantLine],
    g: &DecoratedGraph,
    markings: &[MarkingSpec],
) -> Result<EqRational> {
    let mut coeff = Q::new(BigInt::one(), BigInt::from(g.aut));
    let mut val = EqRational::one();
    for e in &g.edges {
        let line = &lines[e.line];
        let ge = fan.stabilizer_order(&line.wall);
        coeff /= qi(e.degree) * qi(ge as i64);
        val = val.mul(&edge_factor(fan, line, e.degree, &e.twists[0])?);
    }
    for (v, sigma) in g.vertices.iter().enumerate() {
        let gv = fan.stabilizer_order(sigma);
        let mut poles = vec![];
        for (e, s) in g.flags_at(v) {
            let ed = &g.edges[e];
            let line = &lines[ed.line];
            let k = &ed.twists[s];
            // |G_v|/r from c_Γ times r from 1/(w - ψ̄/r) = r/(r w - ψ̄)
            coeff *= qi(gv as i64);
            val = val.mul(&flag_factor(fan, sigma, k));
            poles.push(tangent_weight(fan, &line.wall, sigma).scale(&(qi(line.orders[s] as i64) / qi(ed.degree))));
        }
        let mut n = poles.len();
        for (i, &(mv, o)) in g.markings.iter().enumerate() {
            if mv == v {
                n += 1;
                val = val.mul(&markings[i].options[o].2);
                if let Some(p) = &markings[i].pole {
                    poles.push(p.clone());
                }
            }
        }
        let twists = vertex_twists(fan, g, markings, v);
        val = val.mul(&vertex_factor(fan, sigma, &twists)?);
        val = val.mul(&descendant_integral(gv, &poles, n));
        if val.is_zero() {
            return Ok(val);
        }
    }
    Ok(val.scale(&coeff))
}

/// Σ_Γ C_Γ, evaluated graph by graph and reduced in a fixed order.
pub fn graph_sum(
    fan: &ExtendedStackyFan,
    lines: &[InvariantLine],
    graphs: &[DecoratedGraph],
    markings: &[MarkingSpec],
    parallel: bool,
) -> Result<EqRational> {
    let parts: Vec<Result<EqRational>> = if parallel {
        graphs.maybe_par_iter().map(|g| graph_contribution(fan, lines, g, markings)).collect()
    } else {
        graphs.iter().map(|g| graph_contribution(fan, lines, g, markings)).collect()
    };
    parts.into_iter().try_fold(EqRational::zero(), |acc, p| Ok(acc.add(&p?)))
}

/// D_{d,λ}.
pub fn disk_factor(brane: &BraneData, d: i64, lambda: &SectorLabel) -> EqRational {
    let fan = &brane.fan;
    let (w0, _, w3) = brane.w();
    let h = brane.h(d, lambda);
    let eps2 = h.coeffs[1].clone();
    let eps3 = h.coeffs[2].clone();
    let dq = qi(d);
    let age = h.age.to_integer().to_i64().expect("integral age");
    let fl0 = floor(&(&dq * &w0)).to_i64().unwrap();
    let e = floor(&(&dq * &w3 - &eps3)).to_i64().unwrap() + d;
    let sign = if e.rem_euclid(2) == 0 { Q::one() } else { -Q::one() };
    let u1d = u1().scale(&dq.recip());
    let bw2 = tangent_weight(fan, &brane.sigma0.without(1), &brane.sigma0);
    let mut out = u1d.pow(age - 1).scale(&(sign / (qi(brane.m) * &dq * qb(&factorial(fl0 as u64)))));
    let x = bw2.scale(&dq).div(&u1());
    for a in 1..=(fl0 + age - 1) {
        out = out.mul(&x.add(&EqRational::from_q(qi(a) - &eps2)));
    }
    out
}

/// ι*_{σ0}(φ_{σ0,h^{-1}}).
pub fn point_class_restriction(brane: &BraneData, h: &SectorLabel) -> EqRational {
    flag_factor(&brane.fan, &brane.sigma0, &brane.fan.inv(h))
}

/// The disk invariant ⟨γ_1..γ_n⟩ of class β + d[B] and winding (d,λ).
pub fn disk_invariant(
    brane: &BraneData,
    beta: &[Q],
    d: i64,
    lambda: &SectorLabel,
    insertions: &[CohClass],
    parallel: bool,
) -> Result<Q> {
    let fan = &brane.fan;
    let lines = invariant_lines(fan);
    let h = brane.h(d, lambda);
    let hinv = fan.inv(&h);
    let mut markings: Vec<MarkingSpec> = insertions.iter().map(|c| MarkingSpec::from_class(fan, c)).collect();
    markings.push(MarkingSpec {
        options: vec![(brane.sigma0.clone(), hinv, point_class_restriction(brane, &h))],
        pole: Some(u1().scale(&qi(d).recip())),
    });
    let graphs = enumerate_graphs(fan, &lines, beta, &markings)?;
    let sum = graph_sum(fan, &lines, &graphs, &markings, parallel)?;
    let total = disk_factor(brane, d, lambda).mul(&sum).scale(&qi(brane.r * brane.m));
    let v = total
        .restrict(crate::eqalg::Restriction::U2ToFU1PlusT(brane.f))?
        .restrict(crate::eqalg::Restriction::TZero)?;
    v.as_constant().ok_or_else(|| Error::PoleAtRestriction(format!("non-constant disk invariant {v}")))
}

/// β̃ = ι_*(β) + d[l_ι(τ0)] as a pairing vector on the dual.
pub fn dual_class(dual: &DualGeometry, beta: &[Q], d: i64) -> Vec<Q> {
    let mut out: Vec<Q> = dual.l0.iter().map(|x| x * qi(d)).collect();
    for (o, b) in out.iter_mut().zip(beta) {
        *o += b;
    }
    out
}

/// Marking data of the closed invariant: the insertions, then γ̃_λ.
pub fn closed_markings(dual: &DualGeometry, insertions: &[CohClass], lambda: &SectorLabel) -> Vec<MarkingSpec> {
    let fan = &dual.fan;
    let mut markings: Vec<MarkingSpec> = insertions.iter().map(|c| MarkingSpec::from_class(fan, c)).collect();
    let mut last = MarkingSpec::from_class(fan, &gamma_lambda(dual, lambda));
    // only placements at σ̃0 contribute
    last.options.retain(|o| o.0 == dual.sigma0_tilde);
    markings.push(last);
    markings
}

/// The closed invariant ⟨γ_1..γ_n, γ̃_λ⟩ of the dual in class β̃.
pub fn closed_invariant(
    dual: &DualGeometry,
    beta_tilde: &[Q],
    insertions: &[CohClass],
    lambda: &SectorLabel,
    parallel: bool,
) -> Result<Q> {
    let fan = &dual.fan;
    let lines = invariant_lines(fan);
    let markings = closed_markings(dual, insertions, lambda);
    let graphs = enumerate_graphs(fan, &lines, beta_tilde, &markings)?;
    let sum = graph_sum(fan, &lines, &graphs, &markings, parallel)?;
    let v = sum.restrict_brane(dual.brane.f)?;
    v.as_constant().ok_or_else(|| Error::PoleAtRestriction(format!("non-constant closed invariant {v}")))
}

/// Predicted power of u4 in C̃_Γ: |E2| - c0 + |E1| - |V1'|.
pub fn u4_ledger(dual: &DualGeometry, lines: &[InvariantLine], g: &DecoratedGraph) -> i64 {
    let rp1 = dual.rp1();
    let in_v0: Vec<bool> = g.vertices.iter().map(|c| !c.contains(rp1)).collect();
    let xwalls = dual.brane.fan.compact_walls();
    let mut e0 = vec![];
    let (mut n_e1, mut n_e2) = (0i64, 0i64);
    for ed in &g.edges {
        let w = &lines[ed.line].wall;
        if w.contains(rp1) {
            n_e1 += 1;
        } else if xwalls.contains(&dual.iota_inv(w)) {
            e0.push(ed.ends);
        } else {
            n_e2 += 1;
        }
    }
    // components of Γ0 = |V0| - |E0| (a forest)
    let c0 = in_v0.iter().filter(|x| **x).count() as i64 - e0.len() as i64;
    let maps = dual.cone_maps();
    let mut v1p = 0i64;
    for (v, sigma) in g.vertices.iter().enumerate() {
        if in_v0[v] || g.markings.iter().any(|m| m.0 == v) {
            continue;
        }
        let flags: Vec<&Cone> = g.flags_at(v).map(|(e, _)| &lines[g.edges[e].line].wall).collect();
        if flags.len() != 2 {
            continue;
        }
        let cm = maps.iter().find(|m| &m.sigma == sigma).expect("cone maps");
        if (flags[0] == &cm.delta2 && flags[1] == &cm.delta3) || (flags[0] == &cm.delta3 && flags[1] == &cm.delta2) {
            v1p += 1;
        }
    }
    n_e2 - c0 + n_e1 - v1p
}
