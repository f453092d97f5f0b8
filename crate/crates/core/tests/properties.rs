mod common;

use common::*;
use frobdyn::field::basis::relation_lattice;
use frobdyn::field::{coprime_basis, parse_rational_function, to_exponents, ExpPoint, GfCtx};
use frobdyn::fsets::{fset_member, FSet};
use frobdyn::lattice::int_mul;
use frobdyn::matrix::QMat;
use frobdyn::reduction::{build_normal_form, verify_almost_commutative, SelfMap, TorusMap};
use frobdyn::scalar::{rat, ratio, Int, Rat};
use frobdyn::skew::jordan_form_central;
use frobdyn::system::SystemDescription;
use frobdyn::trichotomy::{simulate_orbit, TorsionRule};
use proptest::prelude::*;
use rand::Rng;

fn point_strategy(n: usize, s: usize) -> impl Strategy<Value = ExpPoint> {
    (
        prop::collection::vec(prop::collection::vec((-20i64..=20, 1i64..=6), s), n),
        prop::collection::vec((0i64..12, 1i64..=12), n),
    )
        .prop_map(|(e, t)| {
            let exps = e.into_iter().map(|row| row.into_iter().map(|(a, b)| ratio(a, b)).collect()).collect();
            let tors = t.into_iter().map(|(a, b)| frobdyn::scalar::frac(&ratio(a, b))).collect();
            ExpPoint::new(exps, tors)
        })
}

fn int_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<Int>>> {
    prop::collection::vec(prop::collection::vec((-4i64..=4).prop_map(Int::from), n), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_point_group_laws(x in point_strategy(3, 2), y in point_strategy(3, 2), z in point_strategy(3, 2), a in -6i64..6, b in -6i64..6) {
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert!(x.mul(&x.inv()).is_identity());
        prop_assert_eq!(x.pow(&int(a + b)), x.pow(&int(a)).mul(&x.pow(&int(b))));
        prop_assert_eq!(x.mul(&y).pow(&int(a)), x.pow(&int(a)).mul(&y.pow(&int(a))));
    }

    #[test]
    fn integer_action_composes(x in point_strategy(3, 2), a in int_matrix(3), b in int_matrix(3)) {
        // (x^A)^B = x^{BA} under (x^Q)_i = Π x_j^{Q_ij}
        prop_assert_eq!(x.act(&a).act(&b), x.act(&int_mul(&b, &a, 3, 3)));
        prop_assert_eq!(x.mul(&x).act(&a), x.act(&a).mul(&x.act(&a)));
    }

    #[test]
    fn exponent_roundtrip(e in prop::collection::vec(-4i64..=4, 3), c in 1i64..3) {
        let ctx = GfCtx::new(3, 1).unwrap();
        let names = vec!["t".to_string()];
        let gens: Vec<_> = ["t", "t+1", "t^2+1"]
            .iter()
            .map(|s| parse_rational_function(s, &ctx, &names).unwrap())
            .collect();
        let basis = coprime_basis(&gens).unwrap();
        let mut x = parse_rational_function(&c.to_string(), &ctx, &names).unwrap();
        for (g, &k) in gens.iter().zip(&e) {
            x = x.mul(&g.pow(k).unwrap());
        }
        let (exps, tors) = to_exponents(&x, &basis).unwrap();
        prop_assert_eq!(basis.reconstruct(&exps, &tors).unwrap(), x);
    }

    #[test]
    fn relation_lattice_vectors_are_relations(
        exps in prop::collection::vec(prop::collection::vec(-5i64..=5, 2), 1..=4),
        tors in prop::collection::vec(0i64..8, 4),
    ) {
        let n = int(8);
        let e: Vec<Vec<Int>> = exps.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let t: Vec<Int> = tors[..e.len()].iter().map(|&x| int(x)).collect();
        for v in relation_lattice(&e, &t, &n) {
            for j in 0..2 {
                let s: Int = v.iter().zip(&e).map(|(a, row)| a * &row[j]).sum();
                prop_assert_eq!(s, int(0));
            }
            let s: Int = v.iter().zip(&t).map(|(a, b)| a * b).sum();
            prop_assert_eq!(s % &n, int(0));
        }
    }

    #[test]
    fn jordan_conjugates_back(seed in any::<u64>(), n in 1usize..=5, lambda in -4i64..=4) {
        let mut r = rng(seed);
        let sizes = random_partition(n, &mut r);
        let (p, p_inv) = random_int_unimodular(n, &mut r);
        let a = p.mul(&jordan_matrix(&rat(lambda), &sizes)).mul(&p_inv);
        let j = jordan_form_central(&a).unwrap();
        let mut want = sizes.clone();
        want.sort_unstable_by(|x, y| y.cmp(x));
        prop_assert_eq!(&j.blocks, &want);
        prop_assert_eq!(j.p_inv.mul(&j.p), QMat::identity(n, &rat(0)));
        prop_assert_eq!(j.p_inv.mul(&a).mul(&j.p), j.jordan_matrix());
    }

    #[test]
    fn normal_form_identity_on_frobenius_spectra(seed in any::<u64>(), n in 1usize..=3, p in prop::sample::select(vec![2u64, 3])) {
        let mut r = rng(seed);
        let q = p as i64;
        let blocks: Vec<QMat> = random_partition(n, &mut r)
            .into_iter()
            .map(|s| jordan_matrix(&rat([1, q, q * q][r.gen_range(0..3)]), &[s]))
            .collect();
        let (u, u_inv) = random_int_unimodular(n, &mut r);
        let a = u.mul(&QMat::block_diag(&blocks, &rat(0))).mul(&u_inv);
        let beta = random_point(n, 2, &mut r);
        let map = SelfMap { p, q: int(q), m_bound: 8, torus: Some(TorusMap { matrix: a, beta }), factors: vec![] };
        let nf = build_normal_form(&map).unwrap();
        let t = nf.torus.as_ref().unwrap();
        prop_assert!(t.matrix.matrix_identity_holds());
        let samples: Vec<ExpPoint> = (0..3).map(|_| random_point(n, 2, &mut r)).collect();
        let rep = verify_almost_commutative(&nf, &map, &samples, 4).unwrap();
        prop_assert!(rep.passed());
    }

    #[test]
    fn fset_certificate_reproduces_point(
        gamma in point_strategy(1, 2),
        alpha in prop::collection::vec(-3i64..=3, 2),
        h in prop::collection::vec(-3i64..=3, 2),
        n in 0u64..4,
        c in -3i64..=3,
    ) {
        let alpha = ExpPoint::new(vec![alpha.iter().map(|&x| rat(x)).collect()], vec![rat(0)]);
        let h = ExpPoint::new(vec![h.iter().map(|&x| rat(x)).collect()], vec![rat(0)]);
        let set = FSet::new(gamma, vec![alpha], vec![1], vec![h], int(2), false).unwrap();
        let x = set.point(&[n], &[int(c)]);
        let m = fset_member(&x, &set).unwrap();
        let cert = m.certificate.expect("constructed member is found");
        prop_assert!(set.point(&cert.ns, &cert.h_coeffs).mul(&x.inv()).killed_by(&set.ell));
    }
}

const ORBIT_SYSTEM: &str = r#"{"p": 3, "d": 1, "group": [{"type": "torus", "rank": 2}],
    "map": {"blocks": [[["1", "1"], ["0", "3"]]], "translation": ["t", "t+1"]}}"#;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn orbits_are_deterministic_and_follow_the_map(a in -3i64..=3, b in -3i64..=3, steps in 1usize..12) {
        let sys = SystemDescription::from_json(ORBIT_SYSTEM).unwrap().build(None).unwrap();
        let s = sys.basis.len();
        let mut e = vec![vec![rat(0); s]; 2];
        e[0][0] = rat(a);
        e[1][s - 1] = rat(b);
        let x0 = ExpPoint::new(e, vec![rat(0), Rat::new(int(1), int(2))]);
        let o1 = simulate_orbit(&sys, &x0, steps, TorsionRule::Deterministic).unwrap();
        let o2 = simulate_orbit(&sys, &x0, steps, TorsionRule::Deterministic).unwrap();
        prop_assert_eq!(&o1.points, &o2.points);
        let map = sys.map.torus.as_ref().unwrap();
        for w in o1.points.windows(2) {
            prop_assert_eq!(&map.step(&w[0], 3).unwrap(), &w[1]);
        }
    }
}
