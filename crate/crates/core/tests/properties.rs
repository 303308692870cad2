use metallic_lightlike::ambient::{check_metallic_compat, MetallicStructure, SemiEuclideanSpace};
use metallic_lightlike::harness::manifest::{HypersurfaceSpec, Num};
use metallic_lightlike::harness::{generate_random_instance, run, Mode, RunOptions};
use metallic_lightlike::metallic::Status;
use metallic_lightlike::scalar::{metallic_disc, metallic_sigma, rat, Dual, QuadNum, Scalar};
use proptest::prelude::*;

const DISC: u64 = 13;

fn quad() -> impl Strategy<Value = QuadNum> {
    (-20i64..=20, 1i64..=12, -20i64..=20, 1i64..=12)
        .prop_map(|(a, da, b, db)| QuadNum::new(rat(a, da), rat(b, db), DISC).unwrap())
}

fn signature() -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY, 3..=6).prop_filter_map("indefinite", |v| {
        let s: Vec<i8> = v.into_iter().map(|b| if b { 1 } else { -1 }).collect();
        (s.contains(&1) && s.contains(&-1)).then_some(s)
    })
}

proptest! {
    #[test]
    fn quad_field_axioms(x in quad(), y in quad(), z in quad()) {
        prop_assert_eq!(x.clone() + y.clone(), y.clone() + x.clone());
        prop_assert_eq!(x.clone() * y.clone(), y.clone() * x.clone());
        prop_assert_eq!((x.clone() * y.clone()) * z.clone(), x.clone() * (y.clone() * z.clone()));
        prop_assert_eq!(
            x.clone() * (y.clone() + z.clone()),
            x.clone() * y.clone() + x.clone() * z.clone()
        );
        prop_assert_eq!(x.clone() - x.clone(), QuadNum::zero());
        if !x.is_zero() {
            prop_assert_eq!(x.clone() / x.clone(), QuadNum::one());
            prop_assert_eq!((y.clone() / x.clone()) * x.clone(), y);
        }
    }

    #[test]
    fn norm_is_multiplicative(x in quad(), y in quad()) {
        prop_assert_eq!((x.clone() * y.clone()).norm(), x.norm() * y.norm());
        prop_assert_eq!(x.clone() * x.conj(), QuadNum::rational(x.norm()));
    }

    #[test]
    fn signum_agrees_with_float(x in quad()) {
        let f = x.to_f64();
        let expected = if x.is_zero() { 0 } else if f > 0.0 { 1 } else { -1 };
        prop_assert_eq!(x.signum(), expected);
    }

    #[test]
    fn sigma_is_the_positive_root(p in 1i64..=20, q in 1i64..=20) {
        let s = metallic_sigma(p, q).unwrap();
        let pp = QuadNum::from_int(p);
        let qq = QuadNum::from_int(q);
        prop_assert!((s.clone() * s.clone() - pp.clone() * s.clone() - qq.clone()).is_zero());
        prop_assert!(s.signum() > 0);
        // the other root p − σ is negative since q > 0
        prop_assert!((pp - s.clone()).signum() < 0);
        prop_assert_eq!(s.disc(), metallic_disc(p, q));
    }

    #[test]
    fn dual_matches_central_difference(
        c in prop::collection::vec(-3.0f64..3.0, 4),
        x0 in -1.0f64..1.0,
        y0 in -1.0f64..1.0,
    ) {
        // f(x, y) = c0 x²y + c1 y³ + c2 x/(2 + y²) + c3 x y
        let f = |x: Dual<f64>, y: Dual<f64>| {
            let k = |v: f64| Dual::constant(v);
            k(c[0]) * x.clone() * x.clone() * y.clone()
                + k(c[1]) * y.clone() * y.clone() * y.clone()
                + k(c[2]) * x.clone() / (k(2.0) + y.clone() * y.clone())
                + k(c[3]) * x * y
        };
        let v = f(Dual::variable(x0, 0, 2), Dual::variable(y0, 1, 2));
        let h = 1e-5;
        let at = |x: f64, y: f64| f(Dual::constant(x), Dual::constant(y)).value;
        let fx = (at(x0 + h, y0) - at(x0 - h, y0)) / (2.0 * h);
        let fy = (at(x0, y0 + h) - at(x0, y0 - h)) / (2.0 * h);
        prop_assert!((v.partial(0) - fx).abs() < 1e-6);
        prop_assert!((v.partial(1) - fy).abs() < 1e-6);
    }

    #[test]
    fn diagonal_structures_are_compatible(
        sig in signature(),
        picks in prop::collection::vec(prop::bool::ANY, 6),
        p in 1i64..=5,
        q in 1i64..=5,
    ) {
        let s = metallic_sigma(p, q).unwrap();
        let other = QuadNum::from_int(p) - s.clone();
        let entries: Vec<QuadNum> = sig
            .iter()
            .zip(&picks)
            .map(|(_, &b)| if b { s.clone() } else { other.clone() })
            .collect();
        let j = MetallicStructure::diagonal(p, q, &entries).unwrap();
        let space = SemiEuclideanSpace::new(sig).unwrap();
        let r = check_metallic_compat(&space, p, q, j.matrix(), 8, 1).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_hyperplanes_are_lightlike_and_verify(
        sig in signature(),
        p in 1i64..=4,
        q in 1i64..=4,
        seed in 0u64..10_000,
    ) {
        let m = generate_random_instance(p, q, sig.len(), &sig, seed).unwrap();
        let report = run(&m, &RunOptions { samples: Some(1), ..RunOptions::default() });
        prop_assert_eq!(report.exit_code, 0, "{}", report.to_json());
        prop_assert!(report
            .identities
            .iter()
            .all(|i| i.pass || i.status == Status::NotApplicable));
        let fr = report.frame_residuals.as_ref().unwrap();
        prop_assert_eq!(fr.exact_zero, Some(true));
    }

    #[test]
    fn classification_is_invariant_under_rescaling(
        sig in signature(),
        seed in 0u64..10_000,
        num in prop_oneof![-7i64..=-1, 1i64..=7],
        den in 1i64..=5,
    ) {
        let m = generate_random_instance(2, 1, sig.len(), &sig, seed).unwrap();
        let lambda = QuadNum::rational(rat(num, den));
        let mut scaled = m.clone();
        if let Some(HypersurfaceSpec::Affine { c, offset }) = &mut scaled.hypersurface {
            let s = |x: &Num| Num::exact(&(x.to_quad(2, 1).unwrap() * lambda.clone()));
            *c = c.iter().map(s).collect();
            *offset = s(offset);
        }
        let opts = RunOptions { mode: Mode::Classify, ..RunOptions::default() };
        let a = run(&m, &opts);
        let b = run(&scaled, &opts);
        let kind = |r: &metallic_lightlike::harness::RunReport| {
            r.classification.as_ref().map(|c| c.kind)
        };
        prop_assert!(kind(&a).is_some());
        prop_assert_eq!(kind(&a), kind(&b));
    }
}
