mod common;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use common::{geometry, FIXTURES};
use toric_oc::arith::{qi, Q};
use toric_oc::cli::parse_spec_str;
use toric_oc::correspondence::{verify_gencorr, verify_numerical};
use toric_oc::eqalg::{inertia_pairing, tangent_weight, u4, CohClass, EqRational, Restriction};
use toric_oc::lattice::{kernel_basis, smith_normal_form, IntMatrix};
use toric_oc::localization::{descendant_integral, descendant_monomial, disk_invariant, hodge_rank, mumford_check};
use toric_oc::occonstruct::{analyze_brane, calabi_yau_defect, construct_dual, second_cohomology_bases, DualGeometry};
use toric_oc::seriesengine::{SeriesShape, TruncatedSeries};
use toric_oc::stackyfan::{ExtendedStackyFan, ValidateOptions};

fn c3() -> ExtendedStackyFan {
    ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 1]], vec![], vec![vec![0, 1, 2]])
}

fn a1() -> ExtendedStackyFan {
    ExtendedStackyFan::new(3, vec![vec![1, 0, 1], vec![0, 2, 1], vec![0, 0, 1]], vec![vec![0, 1, 1]], vec![vec![0, 1, 2]])
}

fn dual_of(fan: &ExtendedStackyFan, f: i64) -> DualGeometry {
    construct_dual(&analyze_brane(fan, (1, 2), f).unwrap()).unwrap()
}

fn dvd(a: &BigInt, b: &BigInt) -> bool {
    if a.is_zero() {
        b.is_zero()
    } else {
        (b % a).is_zero()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn smith_form_is_a_decomposition(rows in 1usize..4, cols in 1usize..5, seed in proptest::collection::vec(-6i64..7, 16)) {
        let data: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * cols + j]).collect()).collect();
        let a = IntMatrix::from_rows(&data);
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        let diag = s.diagonal();
        for w in diag.windows(2) {
            prop_assert!(dvd(&w[0], &w[1]));
        }
        for i in 0..s.d.rows {
            for j in 0..s.d.cols {
                if i != j {
                    prop_assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        let k = kernel_basis(&a);
        prop_assert_eq!(k.cols + s.rank(), cols);
        prop_assert!(a.mul(&k).to_rational_rows().iter().flatten().all(|x| x.is_zero()));
    }

    #[test]
    fn dual_geometry_invariants(f in -6i64..7, orbifold in any::<bool>()) {
        let fan = if orbifold { a1() } else { c3() };
        let dual = dual_of(&fan, f);
        prop_assert!(calabi_yau_defect(&dual.fan).iter().all(|x| x.is_zero()));
        prop_assert!(dual.fan.maximal_cones.contains(&dual.sigma0_tilde));
        prop_assert!(dual.fan.validate(ValidateOptions::default()).is_ok());
        let (w0, w2, w3) = dual.brane.w();
        prop_assert!((w0 + w2 + w3).is_zero());
        // l0 is a relation among the vectors of the dual
        for c in 0..4 {
            let s: Q = dual.l0.iter().zip(&dual.fan.vectors).map(|(l, v)| l * qi(v[c])).sum();
            prop_assert!(s.is_zero());
        }
        let rp1 = dual.rp1();
        for sigma in dual.fan.maximal_cones.iter().filter(|c| c.contains(rp1)) {
            let (i2, i3) = dual.i2_i3(sigma);
            prop_assert_eq!(dual.fan.stabilizer_order(sigma) as i64, dual.stabilizer_formula(i2, i3));
        }
        let x = &dual.brane.fan;
        for sigma in &x.maximal_cones {
            prop_assert_eq!(dual.weight(sigma, &dual.iota(sigma)), u4());
            for &i in &sigma.0 {
                let tau = sigma.without(i);
                let lifted = dual.weight(&dual.iota(&tau), &dual.iota(sigma)).restrict(Restriction::U4Zero).unwrap();
                prop_assert_eq!(lifted, tangent_weight(x, &tau, sigma));
            }
        }
    }

    #[test]
    fn box_involution_and_orders(f in -2i64..4, orbifold in any::<bool>()) {
        let fan = if orbifold { a1() } else { c3() };
        let dual = dual_of(&fan, f);
        for sigma in &dual.fan.maximal_cones {
            let bx = dual.fan.box_elements(sigma);
            prop_assert_eq!(bx.len() as u64, dual.fan.stabilizer_order(sigma));
            prop_assert!(bx[0].is_zero() && bx[0].age.is_zero());
            for j in &bx {
                let inv = dual.fan.inv(j);
                let sum: Vec<BigInt> = j.point.iter().zip(&inv.point).map(|(a, b)| a + b).collect();
                let mut want = vec![BigInt::zero(); 4];
                for (p, &i) in sigma.0.iter().enumerate() {
                    if !j.coeffs[p].is_zero() {
                        for (w, x) in want.iter_mut().zip(&dual.fan.vectors[i]) {
                            *w += BigInt::from(*x);
                        }
                    }
                }
                prop_assert_eq!(sum, want);
                for &i in &sigma.0 {
                    let tau = sigma.without(i);
                    prop_assert_eq!(dual.fan.stabilizer_order(sigma) % dual.fan.stabilizer_order(&tau), 0);
                }
            }
        }
    }

    #[test]
    fn pairing_symmetry(f in -1i64..3, i in 0usize..6, k in 0usize..6, si in 0usize..4, sk in 0usize..4) {
        let dual = dual_of(&a1(), f);
        let fan = &dual.fan;
        let sectors: Vec<Vec<BigInt>> = fan.maximal_cones.iter().flat_map(|c| fan.box_elements(c)).map(|j| j.point).collect();
        let pick = |s: usize| sectors[s % sectors.len()].clone();
        let n = fan.num_vectors();
        let a = CohClass::term(pick(si), EqRational::one(), vec![i % n, (i + 2) % n]);
        let b = CohClass::term(pick(sk), EqRational::one(), vec![k % n]);
        let ab = inertia_pairing(fan, &a, &b);
        let ba = inertia_pairing(fan, &b, &a);
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn series_ring_laws(xs in proptest::collection::vec((0i64..4, 0i64..4, -5i64..6), 1..6),
                        ys in proptest::collection::vec((0i64..4, 0i64..4, -5i64..6), 1..6),
                        zs in proptest::collection::vec((0i64..4, 0i64..4, -5i64..6), 1..6)) {
        let shape = SeriesShape::new(&["q", "x"], 2, 4);
        let build = |v: &[(i64, i64, i64)]| {
            let mut s = TruncatedSeries::<Q>::zero(&shape);
            for (a, b, c) in v {
                let e = [Q::new(BigInt::from(*a), BigInt::from(2)), qi(*b)];
                if shape.degree_ok(&e) {
                    s.add_term(&e, qi(*c));
                }
            }
            s
        };
        let (x, y, z) = (build(&xs), build(&ys), build(&zs));
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
    }

    #[test]
    fn descendant_formula_matches_monomials(order in 2u64..4, poles in proptest::collection::vec(1i64..9, 3..7), signs in proptest::collection::vec(any::<bool>(), 7), with_poles in 0usize..7) {
        let n = poles.len();
        let k = with_poles.min(n);
        let ws: Vec<Q> = poles.iter().zip(&signs).map(|(p, s)| if *s { qi(*p) } else { qi(-*p) }).take(k).collect();
        let eq: Vec<EqRational> = ws.iter().cloned().map(EqRational::from_q).collect();
        let closed = descendant_integral(order, &eq, n).as_constant().unwrap();
        // Σ over ψ-exponents supported on the markings with poles
        let mut expanded = Q::zero();
        let mut stack = vec![(0usize, vec![])];
        while let Some((pos, acc)) = stack.pop() {
            let used: u64 = acc.iter().sum();
            if pos == k {
                let mut exps: Vec<u64> = acc.clone();
                exps.resize(n, 0);
                let mut term = descendant_monomial(order, &exps);
                for (w, a) in ws.iter().zip(&acc) {
                    term /= w.pow(*a as i32 + 1);
                }
                expanded += term;
                continue;
            }
            for a in 0..=(n as u64 - 3).saturating_sub(used) {
                let mut next = acc.clone();
                next.push(a);
                stack.push((pos + 1, next));
            }
        }
        prop_assert_eq!(closed, expanded);
    }

    #[test]
    fn mumford_bookkeeping(twists in proptest::collection::vec(0i64..2, 1..8)) {
        let balanced = twists.iter().sum::<i64>() % 2 == 0;
        prop_assert_eq!(mumford_check(2, &twists, 1), balanced);
        if balanced {
            let nontrivial = twists.iter().filter(|&&k| k == 1).count() as i64;
            let r = hodge_rank(2, &twists, 1);
            prop_assert!(!r.is_negative());
            if nontrivial > 0 {
                prop_assert_eq!(r, Q::new(BigInt::from(nontrivial - 2), BigInt::from(2)));
            }
        }
    }

    #[test]
    fn wrong_ray_dimension_reports_its_line(row in 0usize..3, extra_blank in 0usize..3) {
        let rays = ["[1,0,1]", "[0,1,1]", "[0,0,1]"];
        let bad: Vec<String> = rays.iter().enumerate().map(|(i, r)| if i == row { "[1,1]".to_string() } else { r.to_string() }).collect();
        let text = format!(
            "# fan\n{}lattice_rank = 3\nrays = [{}]\ncones = [[1,2,3]]\n[brane]\ntau0 = [2,3]\nframing = 0\n",
            "\n".repeat(extra_blank),
            bad.join(",")
        );
        match parse_spec_str(&text) {
            Err(toric_oc::Error::Parse { line, .. }) => prop_assert_eq!(line, 3 + extra_blank),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn disk_invariants_are_numbers(f in -4i64..6) {
        let b = analyze_brane(&c3(), (1, 2), f).unwrap();
        let lam = b.lambdas()[0].clone();
        prop_assert!(disk_invariant(&b, &vec![qi(0); 3], 1, &lam, &[], false).is_ok());
    }

    #[test]
    fn gencorr_follows_numerical(f in -2i64..4) {
        let dual = dual_of(&c3(), f);
        let bases = second_cohomology_bases(&dual, None).unwrap();
        if let Ok(rep) = verify_numerical(&dual, &bases, 1, 0, false) {
            if rep.passed() {
                let gen = verify_gencorr(&dual, &bases, 0, 1, 0, false).unwrap();
                prop_assert!(gen.passed(), "{:?}", gen.lines());
            }
        }
    }
}

#[test]
fn fixtures_parse_and_box_orders_match() {
    for name in FIXTURES {
        let g = geometry(name);
        for sigma in &g.fan.maximal_cones {
            let n = g.fan.box_elements(sigma).len() as u64;
            assert_eq!(n, g.fan.stabilizer_order(sigma), "{name}");
        }
    }
}
