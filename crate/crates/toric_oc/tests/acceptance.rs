//! End-to-end acceptance suite. Prints one line per criterion and fails
//! if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use common::{fixture_path, geometry, FIXTURES};
use toric_oc::arith::{q, qi, Q};
use toric_oc::bmodel::{gamma_lambda, mirror_maps, verify_ipairing, verify_mirror_map_corr, w_disk};
use toric_oc::cli::{run_command, Command as Cmd};
use toric_oc::correspondence::verify_numerical;
use toric_oc::eqalg::{class_restrict, inertia_pairing, tangent_weight, u1, u2, CohClass, EqRational, Restriction};
use toric_oc::localization::{
    closed_markings, descendant_integral, descendant_monomial, dual_class, enumerate_graphs, graph_contribution,
    invariant_lines, mumford_check, u4_ledger,
};
use toric_oc::occonstruct::calabi_yau_defect;
use toric_oc::poly::U4;
use toric_oc::stackyfan::{Cone, ValidateOptions};
use toric_oc::Error;

struct Outcome {
    ok: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, notes: vec![] }
    }

    fn check(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(what.into());
        }
    }

    fn within(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check(t < limit, format!("runtime {:?} over {:?}", t, limit));
    }
}

fn ratio(num: i64, den: i64) -> EqRational {
    EqRational::from_q(q(num, den))
}

fn u4zero(x: &EqRational) -> EqRational {
    x.restrict(Restriction::U4Zero).unwrap()
}

fn construction() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let g = geometry("c3_f1");
    let rays = vec![vec![1, 0, 1, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 0], vec![-1, -1, 1, 1], vec![0, 0, 1, 1]];
    o.check(g.dual.fan.vectors == rays, "C3 f=1 rays");
    let mut cones = g.dual.fan.maximal_cones.clone();
    cones.sort();
    let want = vec![Cone(vec![0, 1, 2, 4]), Cone(vec![0, 2, 3, 4]), Cone(vec![1, 2, 3, 4])];
    o.check(cones == want, "C3 f=1 cones");
    let charge: Vec<i64> = vec![1, 1, -2, 1, -1];
    let sum: Vec<i64> = (0..4).map(|c| (0..5).map(|i| charge[i] * rays[i][c]).sum()).collect();
    o.check(sum.iter().all(|&x| x == 0), "charge vector relation");
    let out = run_command(&g, &Cmd::Construct, false).unwrap();
    o.check(out.lines.iter().filter(|l| l.starts_with("dual ray")).count() == 5, "construct prints 5 rays");
    o.check(out.lines.iter().filter(|l| l.starts_with("dual cone")).count() == 3, "construct prints 3 cones");
    o.check(geometry("c3_f0").dual.fan.maximal_cones.len() == 2, "C3 f=0 has two maximal cones");
    o.within(t, Duration::from_secs(1));
    o
}

fn validation() -> Outcome {
    let mut o = Outcome::new();
    for name in ["c3_f0", "c3_f1", "c3_f2", "kp2", "a1", "c3z3"] {
        let t = Instant::now();
        let g = geometry(name);
        o.check(calabi_yau_defect(&g.dual.fan).iter().all(|x| x.is_zero()), format!("{name}: Calabi-Yau"));
        o.check(g.dual.fan.validate(ValidateOptions::default()).is_ok(), format!("{name}: semi-projective"));
        o.within(t, Duration::from_secs(1));
    }
    o
}

fn weights() -> Outcome {
    let mut o = Outcome::new();
    for (name, mrs) in [("c3_f0", (1, 1, 0)), ("c3z3", (1, 3, 1)), ("a1", (2, 1, 0))] {
        let g = geometry(name);
        let b = &g.brane;
        o.check((b.m, b.r, b.s) == mrs, format!("{name}: (m,r,s)"));
        let (m, r, s) = mrs;
        let s0 = &b.sigma0;
        let w0 = tangent_weight(&b.fan, &s0.without(0), s0);
        let w2 = tangent_weight(&b.fan, &s0.without(1), s0);
        let w3 = tangent_weight(&b.fan, &s0.without(2), s0);
        o.check(w0 == u1().mul(&ratio(1, r)), format!("{name}: w0"));
        o.check(w2 == u1().mul(&ratio(s, r * m)).add(&u2().mul(&ratio(1, m))), format!("{name}: w2"));
        o.check(w3 == u1().mul(&ratio(-(m + s), r * m)).sub(&u2().mul(&ratio(1, m))), format!("{name}: w3"));
    }
    for name in FIXTURES {
        let g = geometry(name);
        let x = &g.brane.fan;
        for sigma in &x.maximal_cones {
            for &i in &sigma.0 {
                let tau = sigma.without(i);
                let lhs = u4zero(&g.dual.weight(&g.dual.iota(&tau), &g.dual.iota(sigma)));
                o.check(lhs == tangent_weight(x, &tau, sigma), format!("{name}: iota weight {tau} {sigma}"));
            }
        }
    }
    o
}

fn binom(n: i64, k: i64) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

fn disk_function() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    for f in 0..=2i64 {
        let g = geometry(&format!("c3_f{f}"));
        let lam = g.brane.lambda_from_bar(0);
        let w = w_disk(&g.dual, &g.bases, &lam, 6).unwrap();
        for d in 1..=6i64 {
            let sign = if (d * f) % 2 == 0 { 1 } else { -1 };
            let want = Q::new(BigInt::from(sign) * binom(d * (f + 1) - 1, d - 1), BigInt::from(d * d));
            o.check(w.coefficient(&[qi(d)]) == want, format!("f={f} d={d}"));
        }
    }
    o.within(t, Duration::from_secs(1));
    o
}

fn ipairing() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let runs = [("c3_f0", 4), ("c3_f1", 4), ("c3_f2", 4), ("c3z3", 3), ("a1", 3)];
    for (name, bound) in runs {
        let g = geometry(name);
        for lam in g.brane.lambdas() {
            let rep = verify_ipairing(&g.dual, &g.bases, &lam, bound).unwrap();
            o.check(rep.passed() && !rep.records.is_empty(), format!("{name}: {:?}", rep.failures));
        }
    }
    o.within(t, Duration::from_secs(60));
    o
}

fn numerical() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    for (f, want) in [(0, ["1 = 1", "1/4 = 1/4"]), (1, ["-1 = -1", "3/4 = 3/4"])] {
        let g = geometry(&format!("c3_f{f}"));
        let rep = verify_numerical(&g.dual, &g.bases, 2, 0, true).unwrap();
        o.check(rep.passed(), format!("f={f}: {:?}", rep.failures));
        for (rec, w) in rep.records.iter().zip(want) {
            o.check(rec.ends_with(w), format!("f={f}: {rec}"));
        }
        o.check(rep.records.len() == 2, format!("f={f}: record count"));
    }
    o.within(t, Duration::from_secs(300));
    o
}

fn mirror() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let g = geometry("kp2");
    let mm = mirror_maps(&g.dual, &g.bases, 4).unwrap();
    o.check(mm.tau_has_log[0], "K_P2 log q term");
    for (k, c) in [(1, -6), (2, 45), (3, -560)] {
        o.check(mm.tau[0].coefficient(&[qi(k), qi(0)]) == qi(c), format!("K_P2 tau1 q^{k}"));
    }
    for name in ["c3_f0", "c3_f1", "kp2"] {
        let g = geometry(name);
        let rep = verify_mirror_map_corr(&mirror_maps(&g.dual, &g.bases, 4).unwrap());
        o.check(rep.passed(), format!("{name}: {:?}", rep.failures));
    }
    o.within(t, Duration::from_secs(10));
    o
}

fn pairings() -> Outcome {
    let mut o = Outcome::new();
    for name in ["c3_f0", "c3_f1", "a1"] {
        let g = geometry(name);
        let d = &g.dual;
        let (m, f) = (g.brane.m, g.brane.f);
        let s0 = &d.sigma0_tilde;
        // (u2 - f u1)/(m^2 u1)
        let anchor = u2().sub(&u1().mul(&EqRational::from_int(f))).div(&u1().mul(&EqRational::from_int(m * m)));
        for lam in g.brane.lambdas() {
            let gamma = gamma_lambda(d, &lam);
            let sector = d.fan.box_elements(s0).into_iter().find(|j| j.point == gamma.terms[0].sector).unwrap();
            let restricted = u4zero(&class_restrict(&d.fan, &gamma, s0, &sector));
            let want = if lam.is_zero() {
                u1().neg().mul(&u2().sub(&u1().mul(&EqRational::from_int(f)))).mul(&ratio(1, m))
            } else {
                u1().neg()
            };
            o.check(restricted == want, format!("{name}: restriction of gamma at lambda {lam}"));
            let v = d.fan.inv(&sector);
            for (i, i2) in [(1, 1), (1, 2), (2, 2)] {
                let divs = if lam.is_zero() { vec![i, i2] } else { vec![i] };
                let a = CohClass::term(v.point.clone(), EqRational::one(), divs);
                let p = u4zero(&inertia_pairing(&d.fan, &a, &gamma).unwrap());
                o.check(p == anchor || p == anchor.neg(), format!("{name}: pairing ({i},{i2}) lambda {lam} = {p}"));
            }
        }
    }
    o
}

fn balanced_tuples(order: i64, n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t: Vec<i64>| (0..order).map(move |k| [t.clone(), vec![k]].concat())).collect();
    }
    out.retain(|t| t.iter().sum::<i64>() % order == 0);
    out
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    (0..=total)
        .flat_map(|a| compositions(total - a, parts - 1).into_iter().map(move |rest| [vec![a], rest].concat()))
        .collect()
}

fn properties() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    // (a) closed descendant formula against the ψ-monomial expansion
    for order in [2i64, 3] {
        for n in 3..=6usize {
            for tuple in balanced_tuples(order, n) {
                let poles: Vec<Q> = tuple.iter().enumerate().map(|(i, k)| qi(2 + i as i64 + 3 * k)).collect();
                let eq: Vec<EqRational> = poles.iter().map(|p| EqRational::from_q(p.clone())).collect();
                let closed = descendant_integral(order as u64, &eq, n).as_constant().unwrap();
                let mut expanded = Q::zero();
                for a in compositions(n as u64 - 3, n) {
                    let mut term = descendant_monomial(order as u64, &a);
                    for (p, &ai) in poles.iter().zip(&a) {
                        term /= p.pow(ai as i32 + 1);
                    }
                    expanded += term;
                }
                o.check(closed == expanded, format!("descendant Z/{order} {tuple:?}"));
            }
        }
    }
    // (b) unstable conventions
    let w = |x: i64| EqRational::from_int(x);
    o.check(descendant_integral(2, &[w(3)], 1) == ratio(3, 2), "unstable (1,1)");
    o.check(descendant_integral(3, &[w(5)], 2) == ratio(1, 3), "unstable (2,1)");
    o.check(descendant_integral(2, &[w(1), w(3)], 2) == ratio(1, 8), "unstable (2,2)");
    o.check(descendant_integral(1, &[], 3) == ratio(1, 1), "three-point");
    // (c) u4 ledger on every graph at d <= 2
    for name in ["c3_f0", "c3_f1", "c3_f2", "kp2"] {
        let g = geometry(name);
        let d = &g.dual;
        let lines = invariant_lines(&d.fan);
        for lam in g.brane.lambdas() {
            let markings = closed_markings(d, &[], &lam);
            for deg in 1..=2 {
                let bt = dual_class(d, &vec![qi(0); g.brane.fan.num_vectors()], deg);
                for graph in enumerate_graphs(&d.fan, &lines, &bt, &markings).unwrap() {
                    let led = u4_ledger(d, &lines, &graph);
                    o.check(led >= 0, format!("{name}: negative ledger {}", graph.canonical()));
                    match graph_contribution(&d.fan, &lines, &graph, &markings) {
                        Ok(c) => {
                            o.check(c.valuation_in(U4) == led, format!("{name}: valuation {}", graph.canonical()));
                            if led > 0 {
                                o.check(u4zero(&c).is_zero(), format!("{name}: no vanishing {}", graph.canonical()));
                            }
                        }
                        Err(Error::UnsupportedVertex) => {}
                        Err(e) => o.check(false, format!("{name}: {e}")),
                    }
                }
            }
        }
    }
    // (d) Mumford rank bookkeeping
    for n in 1..=6 {
        for tuple in balanced_tuples(2, n) {
            o.check(mumford_check(2, &tuple, 1), format!("Mumford {tuple:?}"));
        }
    }
    o.within(t, Duration::from_secs(60));
    o
}

fn cli_outputs() -> Vec<u8> {
    let bin = env!("CARGO_BIN_EXE_toric-oc");
    let runs: [(&str, &[&str]); 7] = [
        ("c3_f1", &["construct"]),
        ("a1", &["box"]),
        ("c3z3", &["weights"]),
        ("c3_f1", &["disk", "--dmax", "3"]),
        ("c3_f0", &["verify", "ipairing", "--bound", "4"]),
        ("c3_f1", &["verify", "numerical", "--bound", "2"]),
        ("kp2", &["verify", "jpairing", "--bound", "3", "--beta-bound", "1"]),
    ];
    let mut all = vec![];
    for (fx, args) in runs {
        let out = Command::new(bin).arg(fixture_path(fx)).args(args).output().unwrap();
        all.extend(format!("{fx} {args:?} exit={:?}\n", out.status.code()).into_bytes());
        all.extend(out.stdout);
    }
    all
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let first = cli_outputs();
    o.check(first == cli_outputs(), "CLI output differs between runs");
    let text = String::from_utf8(first).unwrap();
    o.check(!text.contains("exit=Some(1)") && !text.contains("exit=Some(2)"), "a CLI run failed");
    let g = geometry("c3_f1");
    let seq = verify_numerical(&g.dual, &g.bases, 2, 0, false).unwrap();
    let par = verify_numerical(&g.dual, &g.bases, 2, 0, true).unwrap();
    o.check(seq == par, "parallel and sequential reports differ");
    o
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("construction fidelity", construction),
        ("fan validation", validation),
        ("flag weights", weights),
        ("B-model disk function", disk_function),
        ("I-pairing", ipairing),
        ("numerical correspondence", numerical),
        ("mirror maps", mirror),
        ("pairing anchors", pairings),
        ("property suites", properties),
        ("determinism", determinism),
    ];
    let mut failed = vec![];
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2} {:<26} {}", i + 1, name, if o.ok { "PASS" } else { "FAIL" });
        for n in &o.notes {
            println!("    {n}");
        }
        if !o.ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
