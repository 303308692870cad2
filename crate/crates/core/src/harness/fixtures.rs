//! The worked examples as manifests, each annotated with its expected
//! outcome, plus constructed instances for the curved suites.

use serde_json::json;

use super::manifest::{Expectation, Manifest, Outcome};
use super::random::{cone_copy_instance, graph_instance};
use super::run::RunReport;

fn manifest(v: serde_json::Value) -> Manifest {
    serde_json::from_value(v).expect("fixture manifests are schema-valid")
}

fn sig(s: &str) -> Vec<&'static str> {
    s.split(',')
        .map(|t| match t.trim() {
            "s" => "sigma",
            "ps" => "p-sigma",
            other => panic!("unknown entry {other}"),
        })
        .collect()
}

fn ex_1_structure() -> Manifest {
    manifest(json!({
        "name": "ex-1-structure",
        "description": "diag(p-σ, σ, p-σ, σ, p-σ, σ, σ) on ℝ⁷₃",
        "ambient": {"dim": 7, "signature": [-1, 1, -1, 1, -1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig("ps,s,ps,s,ps,s,s")}},
        "seed": 1,
        "expect": {"outcome": "pass", "exit_code": 0}
    }))
}

fn ex_2_hyperplane() -> Manifest {
    manifest(json!({
        "name": "ex-2-hyperplane",
        "description": "x₁ = σx₅ in ℝ⁵₂ with J̃ = σI, stated to be lightlike and invariant",
        "ambient": {"dim": 5, "signature": [-1, 1, -1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig("s,s,s,s,s")}},
        "hypersurface": {"type": "affine", "c": [1, 0, 0, 0, "-sigma"], "offset": 0},
        "identities": "all",
        "samples": 2,
        "seed": 2,
        "claims": [
            {"tag": "ex-2-lightlike", "equation": "x1 = sigma*x5",
             "paper_claim": "lightlike hypersurface with E = σ∂₂ + σ∂₃",
             "check": {"type": "lightlike"}, "documented": true}
        ],
        "expect": {"outcome": "documented_discrepancy", "exit_code": 3, "error": "NotLightlike",
                   "note": "the normal covector has g⁻¹(c, c) = σ² − 1 ≠ 0"}
    }))
}

fn ex_2_corrected() -> Manifest {
    manifest(json!({
        "name": "ex-2-corrected",
        "description": "x₂ = x₃ in ℝ⁵₂ with J̃ = σI: the hyperplane whose radical is the stated E",
        "ambient": {"dim": 5, "signature": [-1, 1, -1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig("s,s,s,s,s")}},
        "hypersurface": {"type": "affine", "c": [0, 1, -1, 0, 0], "offset": 0},
        "screen_mode": {"transversal": [0, 1, -1, 0, 0]},
        "identities": "all",
        "samples": 2,
        "seed": 3,
        "claims": [
            {"tag": "ex-2-radical", "equation": "Rad", "paper_claim": "E = σ∂₂ + σ∂₃",
             "check": {"type": "radical", "vector": [0, "sigma", "sigma", 0, 0]}},
            {"tag": "ex-2-transversal", "equation": "ltr", "paper_claim": "N = (σ∂₂ − σ∂₃)/(2σ²)",
             "check": {"type": "transversal", "vector": [0, "sigma", "-sigma", 0, 0]}},
            {"tag": "ex-2-invariant", "equation": "J̃E = σE, J̃N = σN",
             "paper_claim": "invariant lightlike hypersurface",
             "check": {"type": "kind", "kind": "Invariant"}}
        ],
        "expect": {"outcome": "pass", "exit_code": 0, "kind": "Invariant"}
    }))
}

const SSI1_N: [&str; 5] = ["-sigma/2", "sigma/2", "-1/2", "0", "1/2"];

fn ssi1_claims(with_kind: bool) -> serde_json::Value {
    let mut claims = vec![
        json!({"tag": "ssi-1-radical", "equation": "Rad", "paper_claim": "E = σΦ₁ − σΦ₂ + Φ₃",
               "check": {"type": "radical", "vector": ["sigma", "-sigma", 1, 0, 1]}}),
        json!({"tag": "ssi-1-omega1", "equation": "Ω₁ = J̃E", "paper_claim": "J̃E = −q∂₁ + q∂₂ + σ∂₃ + σ∂₅",
               "check": {"type": "j_radical", "vector": ["-q", "q", "sigma", 0, "sigma"]}}),
    ];
    if with_kind {
        claims.push(json!({"tag": "ssi-1-transversal", "equation": "ltr",
            "paper_claim": "N = ½(−σ∂₁ + σ∂₂ − ∂₃ + ∂₅)",
            "check": {"type": "transversal", "vector": SSI1_N}}));
        claims.push(json!({"tag": "ssi-1-omega2", "equation": "Ω₂ = J̃N",
            "paper_claim": "J̃N = ½(−σ(p−σ)∂₁ + σ(p−σ)∂₂ − σ∂₃ + σ∂₅)",
            "check": {"type": "j_transversal",
                      "vector": ["-sigma*(p-sigma)/2", "sigma*(p-sigma)/2", "-sigma/2", 0, "sigma/2"]}}));
        claims.push(json!({"tag": "ssi-1-kind", "equation": "S(TM) = span{Ω₁, Ω₂, Ω₃}",
            "paper_claim": "screen semi-invariant", "documented": true,
            "check": {"type": "kind", "kind": "ScreenSemiInvariant"}}));
    } else {
        claims.push(json!({"tag": "ssi-1-kind", "equation": "S(TM)",
            "paper_claim": "screen semi-invariant",
            "check": {"type": "kind", "kind": "ScreenSemiInvariant"}}));
    }
    serde_json::Value::Array(claims)
}

fn ssi_example_1() -> Manifest {
    manifest(json!({
        "name": "ssi-example-1",
        "description": "x₅ = σx₁ + σx₂ + x₃ in ℝ⁵₂, J̃ = diag(p−σ, p−σ, σ, σ, σ), stated transversal",
        "ambient": {"dim": 5, "signature": [-1, 1, -1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig("ps,ps,s,s,s")}},
        "hypersurface": {"type": "affine", "c": ["-sigma", "-sigma", -1, 0, 1], "offset": 0},
        "screen_mode": {"transversal": SSI1_N},
        "identities": "all",
        "samples": 2,
        "seed": 4,
        "claims": ssi1_claims(true),
        "expect": {"outcome": "documented_discrepancy", "exit_code": 3, "kind": "Generic",
                   "note": "E, N, Ω₁ = J̃E and Ω₂ = J̃N reproduce, but g(J̃N, E) = σ ≠ 0, so Ω₂ is not tangent"}
    }))
}

fn ssi_example_1_adapted() -> Manifest {
    manifest(json!({
        "name": "ssi-example-1-adapted",
        "description": "the same hyperplane with the eigenspace-adapted transversal",
        "ambient": {"dim": 5, "signature": [-1, 1, -1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig("ps,ps,s,s,s")}},
        "hypersurface": {"type": "affine", "c": ["-sigma", "-sigma", -1, 0, 1], "offset": 0},
        "screen_mode": "metallic_adapted",
        "identities": "all",
        "samples": 2,
        "seed": 5,
        "claims": ssi1_claims(false),
        "expect": {"outcome": "pass", "exit_code": 0, "kind": "ScreenSemiInvariant"}
    }))
}

fn ssi_example_2() -> Manifest {
    manifest(json!({
        "name": "ssi-example-2",
        "description": "x₅ = σx₃ + σx₄ + x₁ in ℝ⁵₂ with J̃ = σI, stated transversal",
        "ambient": {"dim": 5, "signature": [-1, 1, -1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig("s,s,s,s,s")}},
        "hypersurface": {"type": "affine", "c": [-1, 0, "-sigma", "-sigma", 1], "offset": 0},
        "screen_mode": {"transversal": ["-1/2", 0, "-1/2", "1/2", "1/2"]},
        "identities": "all",
        "samples": 2,
        "seed": 6,
        "claims": [
            {"tag": "ssi-2-radical", "equation": "Rad", "paper_claim": "E = σΦ₃ − σΦ₄ + Φ₁",
             "check": {"type": "radical", "vector": [1, 0, "sigma", "-sigma", 1]}},
            {"tag": "ssi-2-transversal", "equation": "ltr", "paper_claim": "N = ½(−∂₁ − ∂₃ + ∂₄ + ∂₅)",
             "check": {"type": "transversal", "vector": ["-1/2", 0, "-1/2", "1/2", "1/2"]}},
            {"tag": "ssi-2-omega1", "equation": "Ω₁ = J̃N", "paper_claim": "J̃N = ½σ(−∂₁ − ∂₃ + ∂₄ + ∂₅)",
             "check": {"type": "j_transversal", "vector": ["-sigma", 0, "-sigma", "sigma", "sigma"]}},
            {"tag": "ssi-2-omega2", "equation": "Ω₂ = J̃E", "documented": true,
             "paper_claim": "J̃E = σ∂₁ + σ²∂₂ − σ²∂₄ + σ∂₅",
             "check": {"type": "j_radical", "vector": ["sigma", "sigma^2", 0, "-sigma^2", "sigma"]}},
            {"tag": "ssi-2-kind", "equation": "S(TM) = span{Ω₁, Ω₂, Ω₃}", "documented": true,
             "paper_claim": "screen semi-invariant",
             "check": {"type": "kind", "kind": "ScreenSemiInvariant"}}
        ],
        "expect": {"outcome": "documented_discrepancy", "exit_code": 3, "kind": "Invariant",
                   "note": "J̃ = σI preserves every line, so the hypersurface is invariant"}
    }))
}

fn light_cone(name: &str, entries: &str, kind: &str, seed: u64) -> Manifest {
    manifest(json!({
        "name": name,
        "description": "light cone of ℝ⁴₁ through a rational parametrization",
        "ambient": {"dim": 4, "signature": [-1, 1, 1, 1]},
        "metallic": {"p": 1, "q": 1, "J": {"type": "diagonal", "entries": sig(entries)}},
        "hypersurface": {"type": "chart",
            "components": ["u1*(1 + u2^2 + u3^2)", "2*u1*u2", "2*u1*u3", "u1*(1 - u2^2 - u3^2)"],
            "domain": [[0.5, 1.5], [-1.0, 1.0], [-1.0, 1.0]]},
        "identities": "all",
        "samples": 16,
        "seed": seed,
        "expect": {"outcome": "pass", "exit_code": 0, "kind": kind}
    }))
}

fn ssi_curved_5() -> Manifest {
    manifest(json!({
        "name": "ssi-curved-5",
        "description": "x₁ + x₂ = F(x₃ + x₄) in ℝ⁵₂ with the structure of the first example",
        "ambient": {"dim": 5, "signature": [-1, 1, -1, 1, 1]},
        "metallic": {"p": 2, "q": 1, "J": {"type": "diagonal", "entries": sig("ps,ps,s,s,s")}},
        "hypersurface": {"type": "chart",
            "components": ["u4", "0.8*(u1+u2) + 0.3*(u1+u2)^2 - 0.2*(u1+u2)^3 - u4", "u1", "u2", "u3"],
            "domain": [[-0.3, 0.3], [-0.3, 0.3], [-0.3, 0.3], [-0.3, 0.3]]},
        "screen_mode": "metallic_adapted",
        "identities": "all",
        "samples": 16,
        "seed": 8,
        "expect": {"outcome": "pass", "exit_code": 0, "kind": "ScreenSemiInvariant"}
    }))
}

fn with_expectation(mut m: Manifest, name: &str, kind: &str) -> Manifest {
    m.name = Some(name.into());
    m.samples = 16;
    m.expect = Some(Expectation {
        outcome: Outcome::Pass,
        exit_code: 0,
        error: None,
        kind: Some(serde_json::from_value(json!(kind)).expect("kind")),
        note: None,
    });
    m
}

/// All fixtures in a fixed order.
pub fn fixtures() -> Vec<Manifest> {
    let graph = graph_instance(
        10,
        (1, 1),
        "0.7*(u1+u2) + 0.3*(u1+u2)^2 - 0.2*(u3+u4) + 0.25*(u1+u2)*(u3+u4)",
    );
    let cone = cone_copy_instance(
        11,
        (1, 1),
        1,
        ["0".into(), "0".into(), "0".into(), "0".into()],
    );
    vec![
        ex_1_structure(),
        ex_2_hyperplane(),
        ex_2_corrected(),
        ssi_example_1(),
        ssi_example_1_adapted(),
        ssi_example_2(),
        light_cone("light-cone", "s,s,s,ps", "Generic", 7),
        light_cone("light-cone-scalar", "s,s,s,s", "Invariant", 9),
        ssi_curved_5(),
        with_expectation(graph, "ssi-curved-7", "ScreenSemiInvariant"),
        with_expectation(cone, "ssi-cone-copy", "ScreenSemiInvariant"),
    ]
}

pub fn fixture(name: &str) -> Option<Manifest> {
    fixtures()
        .into_iter()
        .find(|m| m.name.as_deref() == Some(name))
}

/// Compares a run against the fixture's expected outcome; `Err` lists the
/// mismatches.
pub fn check_expectation(m: &Manifest, report: &RunReport) -> Result<(), String> {
    let Some(exp) = &m.expect else {
        return Ok(());
    };
    let mut problems = Vec::new();
    if report.outcome != exp.outcome {
        problems.push(format!("outcome {:?}, expected {:?}", report.outcome, exp.outcome));
    }
    if report.exit_code != exp.exit_code {
        problems.push(format!("exit code {}, expected {}", report.exit_code, exp.exit_code));
    }
    let err = report.error.as_ref().map(|e| e.kind.as_str());
    if err != exp.error.as_deref() {
        problems.push(format!("error {err:?}, expected {:?}", exp.error));
    }
    if let Some(k) = exp.kind {
        let got = report.classification.as_ref().map(|c| c.kind);
        if got != Some(k) {
            problems.push(format!("kind {got:?}, expected {k:?}"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.join("; "))
    }
}
