//! Acceptance criteria 1–8, one PASS/FAIL line each.
//!
//! Criteria recorded in `EXPECTED_FAIL` are known not to hold for the
//! stated instance; they still run in full and print FAIL, and the binary
//! fails if one of them starts to pass so the record can be revisited.

use std::time::{Duration, Instant};

use metallic_lightlike::ambient::check_metallic_compat;
use metallic_lightlike::harness::manifest::{DiffSpec, HypersurfaceSpec};
use metallic_lightlike::harness::{
    check_expectation, curved_instance, fixture, fixtures, generate_random_instance, run, Family,
    Manifest, Mode, Outcome, RunOptions, RunReport, Selection,
};
use metallic_lightlike::hypersurface::{radical, Hypersurface};
use metallic_lightlike::induced::Jet;
use metallic_lightlike::metallic::{registry, Kind, Status};
use metallic_lightlike::scalar::{metallic_sigma, rat, QuadNum};
use metallic_lightlike::MlhError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPECTED_FAIL: &[u32] = &[3];

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let t = Instant::now();
    let mut v = f();
    let el = t.elapsed();
    match budget {
        Some(b) => {
            v.detail = format!("{} [{:.2}s, budget {}s]", v.detail, el.as_secs_f64(), b.as_secs());
            if el > b {
                v.ok = false;
                v.detail.push_str(" over budget");
            }
        }
        None => v.detail = format!("{} [{:.2}s]", v.detail, el.as_secs_f64()),
    }
    v
}

fn ids(pred: impl Fn(&str) -> bool) -> Vec<String> {
    registry()
        .iter()
        .map(|s| s.id.to_string())
        .filter(|id| pred(id))
        .collect()
}

fn lemma_ids(id: &str) -> bool {
    matches!(
        id,
        "EQ14" | "EQ15" | "EQ16" | "EQ17" | "EQ18" | "EQ19"
    ) || (id.starts_with("EQ3") && id.len() == 4)
}

fn ssi_ids(id: &str) -> bool {
    if let Some(rest) = id.strip_prefix("EQ4.") {
        let n: u32 = rest.parse().unwrap_or(0);
        (22..=30).contains(&n) || n == 40
    } else {
        false
    }
}

fn worst(report: &RunReport) -> f64 {
    report
        .identities
        .iter()
        .map(|r| r.max_residual)
        .fold(0.0, f64::max)
}

fn all_pass(report: &RunReport) -> bool {
    report.error.is_none() && report.identities.iter().all(|r| r.status == Status::Pass)
}

fn criterion_1() -> Verdict {
    let mut bad = Vec::new();
    for p in 1..=20 {
        for q in 1..=20 {
            let s = metallic_sigma(p, q).expect("positive parameters");
            let r = s.clone() * s.clone()
                - QuadNum::from_int(p) * s.clone()
                - QuadNum::from_int(q);
            if !r.is_zero() {
                bad.push((p, q));
            }
        }
    }
    let golden = metallic_sigma(1, 1).unwrap();
    // 2σ − 1 = √5 and σ − 1 = √2, checked as positive square roots
    let t = QuadNum::from_int(2) * golden.clone() - QuadNum::from_int(1);
    let golden_ok = t.signum() > 0
        && (t.clone() * t - QuadNum::from_int(5)).is_zero()
        && (golden.to_f64() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15;
    let silver = metallic_sigma(2, 1).unwrap();
    let t = silver.clone() - QuadNum::from_int(1);
    let silver_ok = t.signum() > 0
        && (t.clone() * t - QuadNum::from_int(2)).is_zero()
        && (silver.to_f64() - (1.0 + 2f64.sqrt())).abs() < 1e-15;
    verdict(
        bad.is_empty() && golden_ok && silver_ok,
        format!(
            "400 pairs, {} nonzero residuals; golden (1+√5)/2 {}, silver 1+√2 {}",
            bad.len(),
            golden_ok,
            silver_ok
        ),
    )
}

fn criterion_2() -> Verdict {
    let m = fixture("ex-1-structure").expect("fixture");
    let parsed = m.parse().expect("schema");
    let rep = check_metallic_compat(&parsed.space, 1, 1, &parsed.j_matrix, 200, 2024).unwrap();
    let run_rep = run(&m, &RunOptions::mode(Mode::Check));
    verdict(
        rep.passed() && rep.eq5_samples == 200 && run_rep.exit_code == 0,
        format!(
            "eq3={} eq4={} eq5={}, {} of {} exact pairs fail",
            rep.eq3, rep.eq4, rep.eq5, rep.eq5_sample_failures, rep.eq5_samples
        ),
    )
}

fn criterion_3() -> Verdict {
    let m = fixture("ssi-example-1").expect("fixture");
    let r = run(&m, &RunOptions::default());
    let failed_tags: Vec<&str> = r.discrepancies.iter().map(|d| d.tag.as_str()).collect();
    let frame_ok = ["ssi-1-radical", "ssi-1-transversal", "ssi-1-omega1", "ssi-1-omega2"]
        .iter()
        .all(|t| !failed_tags.contains(t));
    let exact = r
        .frame_residuals
        .as_ref()
        .and_then(|f| f.exact_zero)
        .unwrap_or(false);
    let kind = r.classification.as_ref().map(|c| c.kind);
    let adapted = run(&fixture("ssi-example-1-adapted").unwrap(), &RunOptions::default());
    let adapted_kind = adapted.classification.as_ref().map(|c| c.kind);
    verdict(
        frame_ok && exact && kind == Some(Kind::ScreenSemiInvariant) && all_pass(&r),
        format!(
            "E, N, Ω₁=J̃E, Ω₂=J̃N reproduced: {frame_ok}, exact zero residuals: {exact}; \
             classification {kind:?} (expected ScreenSemiInvariant; g(J̃N,E) = σ ≠ 0). \
             With the adapted transversal: {adapted_kind:?}, exit {}",
            adapted.exit_code
        ),
    )
}

fn criterion_4() -> Verdict {
    let ex2 = run(&fixture("ex-2-hyperplane").unwrap(), &RunOptions::default());
    let not_lightlike = ex2
        .error
        .as_ref()
        .is_some_and(|e| e.kind == "NotLightlike" && e.message.contains("nullity 0"));
    let ex2_doc = ex2.outcome == Outcome::DocumentedDiscrepancy
        && ex2.discrepancies.iter().all(|d| d.documented)
        && !ex2.discrepancies.is_empty();
    let ssi2 = run(&fixture("ssi-example-2").unwrap(), &RunOptions::default());
    let mismatch = ssi2
        .discrepancies
        .iter()
        .any(|d| d.tag == "ssi-2-kind" && d.documented);
    let ssi2_doc = ssi2.outcome == Outcome::DocumentedDiscrepancy;
    let expectations = check_expectation(&fixture("ex-2-hyperplane").unwrap(), &ex2).is_ok()
        && check_expectation(&fixture("ssi-example-2").unwrap(), &ssi2).is_ok();
    verdict(
        not_lightlike && ex2_doc && mismatch && ssi2_doc && expectations,
        format!(
            "ex-2-hyperplane NotLightlike(nullity 0): {not_lightlike}, documented: {ex2_doc}; \
             ssi-example-2 classification mismatch: {mismatch} ({:?}), documented: {ssi2_doc}",
            ssi2.classification.as_ref().map(|c| c.kind)
        ),
    )
}

fn lemma_run(m: &Manifest, sel: Vec<String>, fd: Option<f64>, tol: f64) -> RunReport {
    let mut m = m.clone();
    m.differentiation = fd.map(DiffSpec::FiniteDifference);
    m.samples = 100;
    run(
        &m,
        &RunOptions {
            identities: Some(Selection::List(sel)),
            tolerance: Some(tol),
            ..RunOptions::default()
        },
    )
}

fn criterion_5() -> Verdict {
    let cone = fixture("light-cone").unwrap();
    let curved = fixture("ssi-curved-5").unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, m, sel) in [
        ("light cone ℝ⁴₁", &cone, ids(lemma_ids)),
        ("curved ℝ⁵₂", &curved, ids(|i| lemma_ids(i) || ssi_ids(i))),
    ] {
        for (fd, tol) in [(None, 1e-8), (Some(1e-5), 1e-5)] {
            let r = lemma_run(m, sel.clone(), fd, tol);
            let pass = all_pass(&r) && r.samples >= 100 && r.skipped_points == 0;
            ok &= pass;
            lines.push(format!(
                "{label} {}: {} ids, worst {:.1e} {}",
                if fd.is_some() { "finite differences" } else { "dual numbers" },
                sel.len(),
                worst(&r),
                if pass { "ok" } else { "FAILED" }
            ));
        }
    }
    verdict(ok, lines.join("; "))
}

fn criterion_6() -> Verdict {
    let mut instances: Vec<Manifest> = (0..12)
        .map(|s| curved_instance(Family::Graph, 100 + s))
        .collect();
    instances.extend((0..12).map(|s| curved_instance(Family::ConeCopy, 200 + s)));
    let sel = vec!["EQ4.41".to_string(), "EQ4.42".to_string()];
    let mut agree = 0;
    let mut seen = [[false; 2]; 2];
    let mut problems = Vec::new();
    for m in &instances {
        let r = run(
            m,
            &RunOptions {
                identities: Some(Selection::List(sel.clone())),
                tolerance: Some(1e-7),
                samples: Some(6),
                ..RunOptions::default()
            },
        );
        let mut both = r.error.is_none();
        for (k, (closed, cond)) in [("mu0_closed", "conditions_hold"), ("d_closed", "condition_holds")]
            .iter()
            .enumerate()
        {
            let rep = r.identities.iter().find(|x| x.id == sel[k]);
            let Some(rep) = rep else {
                both = false;
                continue;
            };
            let a = rep.sides.get(*closed).copied();
            let b = rep.sides.get(*cond).copied();
            match (a, b) {
                (Some(a), Some(b)) if a == b && rep.status == Status::Pass => {
                    seen[k][a as usize] = true;
                }
                _ => {
                    both = false;
                    problems.push(format!("{:?} {}", m.name, rep.id));
                }
            }
        }
        if both {
            agree += 1;
        }
    }
    let both_directions = seen.iter().all(|s| s[0] && s[1]);
    verdict(
        agree == instances.len() && instances.len() >= 20 && both_directions,
        format!(
            "{agree}/{} instances agree for μ₀ and D̊; closed and non-closed cases both seen: {both_directions}{}",
            instances.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; disagreements: {}", problems.join(", "))
            }
        ),
    )
}

/// Determinant by cofactor expansion along the first row.
fn laplace_det(m: &[Vec<QuadNum>]) -> QuadNum {
    let n = m.len();
    if n == 0 {
        return QuadNum::from_int(1);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = QuadNum::from_int(0);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<QuadNum>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].clone() * laplace_det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Null vector of a corank-one matrix from a nonzero column of its adjugate.
fn adjugate_null_vector(g: &[Vec<QuadNum>]) -> Option<Vec<QuadNum>> {
    let n = g.len();
    for col in 0..n {
        // column `col` of adj(G) is the cofactor vector of row `col`
        let v: Vec<QuadNum> = (0..n)
            .map(|i| {
                let minor: Vec<Vec<QuadNum>> = (0..n)
                    .filter(|&r| r != col)
                    .map(|r| {
                        (0..n)
                            .filter(|&c| c != i)
                            .map(|c| g[r][c].clone())
                            .collect()
                    })
                    .collect();
                let d = laplace_det(&minor);
                if (i + col) % 2 == 0 {
                    d
                } else {
                    -d
                }
            })
            .collect();
        if v.iter().any(|x| !x.is_zero()) {
            return Some(v);
        }
    }
    None
}

fn proportional(a: &[QuadNum], b: &[QuadNum]) -> bool {
    for i in 0..a.len() {
        for j in 0..a.len() {
            if !(a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone()).is_zero() {
                return false;
            }
        }
    }
    a.iter().any(|x| !x.is_zero()) && b.iter().any(|x| !x.is_zero())
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agree = 0;
    let total = 500;
    for seed in 0..total {
        let dim = rng.gen_range(3..=6);
        let mut sig: Vec<i8> = (0..dim).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        sig[0] = -1;
        sig[dim - 1] = 1;
        let (p, q) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let m = generate_random_instance(p, q, dim, &sig, seed).unwrap();
        let parsed = m.parse().unwrap();
        let Some(h @ Hypersurface::Affine(_)) = parsed.hypersurface.as_ref() else {
            continue;
        };
        let u: Vec<QuadNum> = (0..dim - 1)
            .map(|_| QuadNum::rational(rat(rng.gen_range(-16..=16), rng.gen_range(1..=16))))
            .collect();
        let tf = h.tangent_frame(&u).unwrap();
        let Ok(e) = radical(&parsed.space, &tf) else {
            continue;
        };
        let gram: Vec<Vec<QuadNum>> = tf
            .vectors
            .iter()
            .map(|a| tf.vectors.iter().map(|b| parsed.space.g(a, b)).collect())
            .collect();
        let Some(coeffs) = adjugate_null_vector(&gram) else {
            continue;
        };
        let mut oracle = vec![QuadNum::from_int(0); dim];
        for (c, v) in coeffs.iter().zip(&tf.vectors) {
            for k in 0..dim {
                oracle[k] = oracle[k].clone() + c.clone() * v[k].clone();
            }
        }
        if proportional(&e, &oracle) {
            agree += 1;
        }
    }

    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for name in ["light-cone", "light-cone-scalar", "ssi-curved-5", "ssi-curved-7", "ssi-cone-copy"] {
        let m = fixture(name).unwrap();
        let parsed = m.parse().unwrap();
        let j = m.structure(&parsed).unwrap();
        let h = parsed.hypersurface.as_ref().unwrap();
        let HypersurfaceSpec::Chart { domain, .. } = m.hypersurface.as_ref().unwrap() else {
            unreachable!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u: Vec<f64> = domain.iter().map(|[a, b]| rng.gen_range(*a..*b)).collect();
            let jet = Jet::<f64>::automatic(&parsed.space, h, &u, &parsed.mode, Some(&j), None)
                .unwrap();
            for dir in jet.tangent() {
                let ex = jet.expansion(dir).unwrap();
                let (an, tau) = jet.weingarten_n(dir).unwrap();
                let ae = jet.weingarten_e(dir).unwrap();
                let mut d = (ex.tau - tau).abs().max((ex.e_tau - tau).abs());
                d = d.max(ex.b_of_e.abs());
                for k in 0..an.len() {
                    d = d.max((ex.a_n[k] - an[k]).abs()).max((ex.a_e_star[k] - ae[k]).abs());
                }
                for v in &jet.frame.tangent {
                    let b1 = jet.second_form_b(dir, v).unwrap();
                    let b2 = jet.expansion_b(dir, v).unwrap();
                    d = d.max((b1 - b2).abs());
                }
                for w in &jet.frame.screen {
                    let c1 = jet.screen_form_c(dir, w).unwrap();
                    let c2 = jet.expansion_c(dir, w).unwrap();
                    d = d.max((c1 - c2).abs());
                }
                worst = worst.max(d);
                evaluated += 1;
            }
        }
    }
    verdict(
        agree == total && worst <= 1e-8,
        format!(
            "radical vs adjugate oracle: {agree}/{total} exact instances agree; \
             B/C/A_N/A*_E/τ inner-product vs expansion: worst {worst:.1e} over {evaluated} directions"
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut same = 0;
    let mut codes = 0;
    let all = fixtures();
    for m in &all {
        let mode = if m.hypersurface.is_none() {
            Mode::Check
        } else {
            Mode::Verify
        };
        let a = run(m, &RunOptions::mode(mode));
        let b = run(m, &RunOptions::mode(mode));
        let c = run(
            m,
            &RunOptions {
                sequential: true,
                ..RunOptions::mode(mode)
            },
        );
        if a.to_json() == b.to_json() && a.to_json() == c.to_json() {
            same += 1;
        }
        if check_expectation(m, &a).is_ok() {
            codes += 1;
        }
    }
    let r1 = generate_random_instance(1, 2, 5, &[-1, 1, -1, 1, 1], 42).unwrap();
    let r2 = generate_random_instance(1, 2, 5, &[-1, 1, -1, 1, 1], 42).unwrap();
    let rand_same = r1.to_json() == r2.to_json()
        && run(&r1, &RunOptions::default()).to_json() == run(&r2, &RunOptions::default()).to_json();
    let schema = Manifest::from_json("{\"ambient\": 3}").err();
    let schema_ok = matches!(schema, Some(ref e @ MlhError::Schema(_)) if e.exit_code() == 4);
    verdict(
        same == all.len() && codes == all.len() && rand_same && schema_ok,
        format!(
            "{same}/{} fixtures byte-identical across repeated and sequential runs; \
             {codes}/{} match their expected outcome and exit code; random manifests reproducible: {rand_same}; \
             schema error exit 4: {schema_ok}",
            all.len(),
            all.len()
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags; a filter that excludes this target
    // (e.g. `cargo test foo`) should not run the suite.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }
    let s = |n| Some(Duration::from_secs(n));
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict>)> = vec![
        (1, "metallic number exactness", Box::new(move || timed(s(1), criterion_1))),
        (2, "ex-1 structure", Box::new(move || timed(s(1), criterion_2))),
        (3, "screen semi-invariant example 1", Box::new(move || timed(s(1), criterion_3))),
        (4, "discrepancy detection", Box::new(move || timed(s(1), criterion_4))),
        (5, "lemma suites on curved charts", Box::new(move || timed(s(30), criterion_5))),
        (6, "integrability equivalences", Box::new(move || timed(s(60), criterion_6))),
        (7, "oracle equivalence", Box::new(move || timed(None, criterion_7))),
        (8, "determinism and exit codes", Box::new(move || timed(None, criterion_8))),
    ];
    let mut unexpected = Vec::new();
    for (n, title, f) in &criteria {
        let v = f();
        println!(
            "criterion {n} ({title}): {} - {}",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
        let expected_fail = EXPECTED_FAIL.contains(n);
        if v.ok == expected_fail {
            unexpected.push(*n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as recorded (expected failures: {EXPECTED_FAIL:?})");
    } else {
        println!("acceptance: criteria {unexpected:?} differ from the record");
        std::process::exit(1);
    }
}
