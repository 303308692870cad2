use metallic_lightlike::harness::manifest::{HypersurfaceSpec, Num, StructureSpec};
use metallic_lightlike::harness::{
    check_expectation, fixture, fixtures, generate_random_instance, run, Manifest, Mode, Outcome,
    RunOptions, Selection,
};
use metallic_lightlike::metallic::Kind;

fn corrected() -> Manifest {
    fixture("ex-2-corrected").expect("fixture exists")
}

fn error_kind(m: &Manifest, opts: &RunOptions) -> (Option<String>, i32) {
    let r = run(m, opts);
    (r.error.map(|e| e.kind), r.exit_code)
}

#[test]
fn fixtures_meet_their_expectations() {
    for m in fixtures() {
        let mode = if m.hypersurface.is_none() {
            Mode::Check
        } else {
            Mode::Verify
        };
        let r = run(&m, &RunOptions { mode, ..RunOptions::default() });
        if let Err(why) = check_expectation(&m, &r) {
            panic!("{}: {why}", m.name.unwrap_or_default());
        }
    }
}

#[test]
fn manifests_round_trip_through_json() {
    for m in fixtures() {
        let back = Manifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}

#[test]
fn random_seeds_give_lightlike_hyperplanes() {
    let sigs: [&[i8]; 3] = [&[-1, 1, 1], &[-1, -1, 1, 1], &[1, -1, 1, -1, 1]];
    for seed in 0..60 {
        let sig = sigs[seed as usize % sigs.len()];
        let m = generate_random_instance(1 + (seed % 3) as i64, 1 + (seed % 2) as i64, sig.len(), sig, seed)
            .unwrap();
        let r = run(
            &m,
            &RunOptions {
                mode: Mode::Classify,
                ..RunOptions::default()
            },
        );
        assert!(r.error.is_none(), "seed {seed}: {:?}", r.error);
        assert_eq!(r.exit_code, 0);
    }
}

#[test]
fn empty_selection_still_classifies() {
    let r = run(
        &corrected(),
        &RunOptions {
            identities: Some(Selection::Keyword("none".into())),
            ..RunOptions::default()
        },
    );
    assert!(r.identities.is_empty());
    assert_eq!(r.classification.map(|c| c.kind), Some(Kind::Invariant));
    assert_eq!(r.exit_code, 0);
}

#[test]
fn explicit_selection_limits_the_report() {
    let r = run(
        &corrected(),
        &RunOptions {
            identities: Some(Selection::List(vec!["EQ31".into(), "EQ14".into(), "EQ31".into()])),
            ..RunOptions::default()
        },
    );
    let ids: Vec<&str> = r.identities.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["EQ31", "EQ14"]);
}

#[test]
fn unknown_identity_is_a_schema_error() {
    let opts = RunOptions {
        identities: Some(Selection::List(vec!["EQ999".into()])),
        ..RunOptions::default()
    };
    assert_eq!(error_kind(&corrected(), &opts), (Some("Schema".into()), 4));
}

#[test]
fn bad_signature_length_is_a_schema_error() {
    let mut m = corrected();
    m.ambient.signature.pop();
    assert_eq!(error_kind(&m, &RunOptions::default()).1, 4);
}

#[test]
fn zero_samples_is_a_schema_error() {
    let mut m = corrected();
    m.samples = 0;
    assert_eq!(error_kind(&m, &RunOptions::default()).1, 4);
}

#[test]
fn malformed_json_is_rejected() {
    assert!(Manifest::from_json("{\"ambient\": 3}").is_err());
    let mut v: serde_json::Value = serde_json::from_str(&corrected().to_json()).unwrap();
    v["unexpected"] = serde_json::json!(1);
    assert!(Manifest::from_json(&v.to_string()).is_err());
}

#[test]
fn non_metallic_tensor_is_rejected() {
    let mut m = corrected();
    m.metallic.j = StructureSpec::Diagonal {
        entries: vec![Num::Int(1); 5],
    };
    let (kind, code) = error_kind(&m, &RunOptions::default());
    assert!(kind.is_some());
    assert_ne!(code, 0);
}

#[test]
fn spacelike_hyperplane_is_not_lightlike() {
    let mut m = corrected();
    m.claims.clear();
    m.expect = None;
    m.hypersurface = Some(HypersurfaceSpec::Affine {
        c: vec![Num::Int(0), Num::Int(1), Num::Int(0), Num::Int(0), Num::Int(0)],
        offset: Num::Int(0),
    });
    m.screen_mode = None;
    let r = run(&m, &RunOptions::default());
    assert_eq!(r.error.map(|e| e.kind).as_deref(), Some("NotLightlike"));
    assert_eq!(r.exit_code, 3);
    assert_eq!(r.outcome, Outcome::Fail);
}

#[test]
fn tolerance_precedence() {
    let mut m = corrected();
    let base = RunOptions {
        default_tolerance: 1e-3,
        identities: Some(Selection::Keyword("none".into())),
        ..RunOptions::default()
    };
    assert_eq!(run(&m, &base).tolerance, 1e-3);
    m.tolerance = Some(1e-5);
    assert_eq!(run(&m, &base).tolerance, 1e-5);
    let opts = RunOptions {
        tolerance: Some(1e-7),
        ..base
    };
    assert_eq!(run(&m, &opts).tolerance, 1e-7);
}

#[test]
fn check_mode_skips_the_hypersurface() {
    let r = run(
        &corrected(),
        &RunOptions {
            mode: Mode::Check,
            ..RunOptions::default()
        },
    );
    assert!(r.structure.map(|s| s.passed()).unwrap_or(false));
    assert!(r.classification.is_none());
    assert!(r.identities.is_empty());
}
