//! The pipeline behind `check`, `classify` and `verify`:
//! structure checks → frame → induced objects → metallic data → registry.

use std::any::Any;
use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::exec;
use super::manifest::{
    BackendSpec, Claim, ClaimCheck, DiffSpec, Manifest, Num, Outcome, Parsed, Selection,
};
use crate::ambient::{check_metallic_compat, CompatReport, MetallicStructure};
use crate::error::{MlhError, Result};
use crate::hypersurface::{FrameCheck, FrameChoices, Hypersurface, LightlikeFrame, ScreenMode};
use crate::induced::{value, Jet};
use crate::linalg::{self, Mat, RANK_REL_TOL};
use crate::metallic::{
    evaluate_sample, finalize, registry, Backend, IdentityReport, IdentitySpec, Kind,
    MetallicJet, Partial, Status,
};
use crate::scalar::{rat, Dual, QuadNum, Scalar, DEFAULT_TOL};

/// Number of random vector pairs in the structure checks.
pub const STRUCTURE_SAMPLES: usize = 200;

/// Size of the per-sample pool of non-constant field coefficients.
const COEFF_POOL: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Check,
    Classify,
    Verify,
}

/// Command-line overrides and defaults applied on top of a manifest.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub mode: Mode,
    pub identities: Option<Selection>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    /// Used when neither the options nor the manifest give a tolerance.
    pub default_tolerance: f64,
    pub seed: Option<u64>,
    pub timing: bool,
    pub dump: bool,
    /// Evaluate samples on the calling thread even when built with rayon.
    pub sequential: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: Mode::Verify,
            identities: None,
            samples: None,
            tolerance: None,
            default_tolerance: DEFAULT_TOL,
            seed: None,
            timing: false,
            dump: false,
            sequential: false,
        }
    }
}

impl RunOptions {
    pub fn mode(mode: Mode) -> Self {
        RunOptions {
            mode,
            ..Default::default()
        }
    }
}

/// A number in a report: exact when the run was exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WireNum {
    Exact(Num),
    Float(f64),
}

fn wire<T: Scalar>(x: &T) -> WireNum {
    match (x as &dyn Any).downcast_ref::<QuadNum>() {
        Some(q) => WireNum::Exact(Num::exact(q)),
        None => WireNum::Float(x.to_f64()),
    }
}

fn wire_vec<T: Scalar>(v: &[T]) -> Vec<WireNum> {
    v.iter().map(wire).collect()
}

fn show<T: Scalar>(x: &T) -> String {
    match (x as &dyn Any).downcast_ref::<QuadNum>() {
        Some(q) => q.to_string(),
        None => format!("{}", x.to_f64()),
    }
}

fn show_vec<T: Scalar>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(show).collect();
    format!("({})", parts.join(", "))
}

/// Frame data at the first sample.
#[derive(Clone, Debug, Serialize)]
pub struct FrameSummary {
    pub chart_point: Vec<WireNum>,
    pub point: Vec<WireNum>,
    #[serde(rename = "E")]
    pub e: Vec<WireNum>,
    #[serde(rename = "N")]
    pub n: Vec<WireNum>,
    pub screen: Vec<Vec<WireNum>>,
    /// `J̃E`
    pub j_e: Vec<WireNum>,
    /// `J̃N`
    pub j_n: Vec<WireNum>,
    pub choices: FrameChoices,
}

/// Worst frame residuals over all samples.
#[derive(Clone, Debug, Serialize)]
pub struct FrameResiduals {
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_zero: Option<bool>,
    /// `J̃X = φX + u(X)N`, `J̃N = ξ + v(E)N`
    pub reconstruction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub kind: Kind,
    /// All samples agree on the kind.
    pub uniform: bool,
    pub kind_counts: BTreeMap<String, usize>,
    pub totally_geodesic: bool,
    pub totally_umbilical: bool,
    pub screen_totally_umbilical: bool,
    pub screen_conformal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_geodesic: Option<bool>,
}

/// `B`, `C` and `τ` on the coordinate fields at the first sample.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryDump {
    /// `B(∂ᵢ, ∂ⱼ)`
    pub b: Vec<Vec<WireNum>>,
    /// `C(∂ᵢ, Wₐ)`
    pub c: Vec<Vec<WireNum>>,
    /// `τ(∂ᵢ)`
    pub tau: Vec<WireNum>,
}

/// A worked-example statement that the computation does not reproduce.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub tag: String,
    pub equation: String,
    pub paper_claim: String,
    pub computed: String,
    pub documented: bool,
    pub fatal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<&MlhError> for ErrorRecord {
    fn from(e: &MlhError) -> Self {
        ErrorRecord {
            kind: e.kind().to_string(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: Mode,
    pub backend: Backend,
    pub differentiation: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<CompatReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_residuals: Option<FrameResiduals>,
    pub identities: Vec<IdentityReport>,
    pub discrepancies: Vec<Discrepancy>,
    pub skipped_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryDump>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub outcome: Outcome,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    fn empty(mode: Mode) -> Self {
        RunReport {
            name: None,
            mode,
            backend: Backend::Exact,
            differentiation: "automatic".into(),
            seed: 0,
            samples: 0,
            tolerance: DEFAULT_TOL,
            structure: None,
            classification: None,
            frame: None,
            frame_residuals: None,
            identities: Vec::new(),
            discrepancies: Vec::new(),
            skipped_points: 0,
            geometry: None,
            error: None,
            outcome: Outcome::Fail,
            exit_code: 0,
            timing_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Short human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self.name.as_deref().unwrap_or("<unnamed>");
        out.push_str(&format!(
            "{name}: {:?} mode, {:?} backend, {} samples, tol {}\n",
            self.mode, self.backend, self.samples, self.tolerance
        ));
        if let Some(s) = &self.structure {
            out.push_str(&format!(
                "structure: eq3={} eq4={} eq5={} ({} / {} sample failures)\n",
                s.eq3, s.eq4, s.eq5, s.eq5_sample_failures, s.eq5_samples
            ));
        }
        if let Some(c) = &self.classification {
            out.push_str(&format!(
                "classification: {:?}{} totally_geodesic={} totally_umbilical={} screen_conformal={}",
                c.kind,
                if c.uniform { "" } else { " (mixed)" },
                c.totally_geodesic,
                c.totally_umbilical,
                c.screen_conformal
            ));
            if let Some(m) = c.mixed_geodesic {
                out.push_str(&format!(" mixed_geodesic={m}"));
            }
            out.push('\n');
        }
        for r in &self.identities {
            out.push_str(&format!(
                "  {:<22} {:<20} max residual {:.3e}\n",
                r.id,
                format!("{:?}", r.status),
                r.max_residual
            ));
        }
        for d in &self.discrepancies {
            out.push_str(&format!(
                "discrepancy [{}] {}: claimed {}; computed {}{}\n",
                d.tag,
                d.equation,
                d.paper_claim,
                d.computed,
                if d.documented { " (documented)" } else { "" }
            ));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error [{}]: {}\n", e.kind, e.message));
        }
        out.push_str(&format!(
            "outcome: {:?}, exit code {}\n",
            self.outcome, self.exit_code
        ));
        out
    }
}

/// Chart parameters of one sample.
#[derive(Clone, Debug)]
enum Point {
    Exact(Vec<QuadNum>),
    Float(Vec<f64>),
}

struct SampleOut {
    kind: Kind,
    parts: BTreeMap<&'static str, Partial>,
    check: FrameCheck,
    reconstruction: f64,
    summary: FrameSummary,
    claims: Vec<(usize, bool, String)>,
    geometry: Option<GeometryDump>,
}

struct Setup<'a> {
    parsed: &'a Parsed,
    h: &'a Hypersurface,
    j: &'a MetallicStructure,
    selected: &'a [&'static IdentitySpec],
    claims: &'a [Claim],
    tol: f64,
    seed: u64,
    diff: Option<f64>,
    dump: bool,
}

/// Identities picked by a selection; the flag marks an explicit list.
pub fn resolve_selection(sel: Option<&Selection>) -> Result<(Vec<&'static IdentitySpec>, bool)> {
    match sel {
        None => Ok((registry().iter().collect(), false)),
        Some(Selection::Keyword(k)) if k == "all" => Ok((registry().iter().collect(), false)),
        Some(Selection::Keyword(k)) if k == "none" => Ok((Vec::new(), false)),
        Some(Selection::Keyword(k)) => Err(MlhError::Schema(format!(
            "identity selection {k:?}: expected \"all\", \"none\" or a list"
        ))),
        Some(Selection::List(ids)) => {
            let mut out: Vec<&'static IdentitySpec> = Vec::new();
            for id in ids {
                let spec = registry()
                    .iter()
                    .find(|s| s.id == id.as_str())
                    .ok_or_else(|| MlhError::Schema(format!("unknown identity {id:?}")))?;
                if !out.iter().any(|s| s.id == spec.id) {
                    out.push(spec);
                }
            }
            Ok((out, true))
        }
    }
}

fn sample_points(m: &Manifest, parsed: &Parsed, h: &Hypersurface, n: usize, seed: u64) -> Result<Vec<Point>> {
    let (p, q) = (m.p(), m.q());
    let exact = parsed.backend == BackendSpec::Exact;
    if let Some(points) = &m.points {
        return points
            .iter()
            .map(|pt| match h {
                Hypersurface::Affine(a) => {
                    if pt.len() != a.ambient_dim() {
                        return Err(MlhError::Schema(format!(
                            "affine sample points have {} coordinates",
                            a.ambient_dim()
                        )));
                    }
                    let x = pt.iter().map(|v| v.to_quad(p, q)).collect::<Result<Vec<_>>>()?;
                    let u = a.chart_point(&x)?;
                    Ok(if exact {
                        Point::Exact(u)
                    } else {
                        Point::Float(u.iter().map(QuadNum::to_f64).collect())
                    })
                }
                Hypersurface::Chart(_) => {
                    if pt.len() != h.chart_dim() {
                        return Err(MlhError::Schema(format!(
                            "chart sample points have {} parameters",
                            h.chart_dim()
                        )));
                    }
                    Ok(Point::Float(
                        pt.iter().map(|v| v.to_f64(p, q)).collect::<Result<Vec<_>>>()?,
                    ))
                }
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = h.chart_dim();
    Ok((0..n)
        .map(|_| match h {
            Hypersurface::Affine(_) => {
                let u: Vec<QuadNum> = (0..d)
                    .map(|_| QuadNum::rational(rat(rng.gen_range(-16..=16), rng.gen_range(1..=16))))
                    .collect();
                if exact {
                    Point::Exact(u)
                } else {
                    Point::Float(u.iter().map(QuadNum::to_f64).collect())
                }
            }
            Hypersurface::Chart(c) => Point::Float(
                c.domain()
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..hi))
                    .collect(),
            ),
        })
        .collect())
}

fn coefficient_pool<T: Scalar>(seed: u64, index: usize, dim: usize) -> Vec<Dual<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    (0..COEFF_POOL)
        .map(|_| {
            if T::is_exact() {
                // small integers keep exact arithmetic cheap
                let v = T::from_i64(rng.gen_range(1..=4));
                let d = (0..dim).map(|_| T::from_i64(rng.gen_range(-2..=2))).collect();
                Dual::new(v, d)
            } else {
                let v = T::from_f64(rng.gen_range(0.25..2.0));
                let d = (0..dim).map(|_| T::from_f64(rng.gen_range(-1.0..1.0))).collect();
                Dual::new(v, d)
            }
        })
        .collect()
}

fn proportional<T: Scalar>(a: &[T], b: &[T]) -> bool {
    if b.iter().all(|x| x.is_negligible(1.0, RANK_REL_TOL)) {
        return false;
    }
    let m = Mat::from_cols(&[a.to_vec(), b.to_vec()]).expect("equal lengths");
    linalg::rank(&m, RANK_REL_TOL) <= 1
}

fn check_claim<T: Scalar>(
    claim: &Claim,
    mj: &MetallicJet<'_, T>,
    kind: Kind,
    p: i64,
    q: i64,
) -> Result<(bool, String)> {
    let jet = mj.jet;
    let against = |v: &[Num], actual: &[T], label: &str| -> Result<(bool, String)> {
        let v = v.iter().map(|x| x.to_quad(p, q)).collect::<Result<Vec<_>>>()?;
        if v.len() != actual.len() {
            return Err(MlhError::Schema(format!(
                "claim {}: vector has {} entries",
                claim.tag,
                v.len()
            )));
        }
        let v: Vec<T> = v.iter().map(T::from_quad).collect();
        Ok((proportional(actual, &v), format!("{label} = {}", show_vec(actual))))
    };
    match &claim.check {
        ClaimCheck::Lightlike => Ok((true, "lightlike with a rank one radical".into())),
        ClaimCheck::Kind { kind: k } => Ok((
            *k == kind,
            format!(
                "{kind:?}; g(J̃E, N) = {}, g(J̃N, E) = {}",
                show(&mj.g(mj.psi0(), jet.n())),
                show(&mj.g(mj.zeta0(), jet.e()))
            ),
        )),
        ClaimCheck::Radical { vector } => against(vector, jet.e(), "E"),
        ClaimCheck::Transversal { vector } => against(vector, jet.n(), "N"),
        ClaimCheck::JRadical { vector } => against(vector, mj.psi0(), "J̃E"),
        ClaimCheck::JTransversal { vector } => against(vector, mj.zeta0(), "J̃N"),
    }
}

fn geometry<T: Scalar>(jet: &Jet<T>) -> Result<GeometryDump> {
    let dirs = jet.tangent().to_vec();
    let b = dirs
        .iter()
        .map(|u| {
            jet.frame
                .tangent
                .iter()
                .map(|v| jet.second_form_b(u, v).map(|x| wire(&x)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let c = dirs
        .iter()
        .map(|u| {
            jet.frame
                .screen
                .iter()
                .map(|w| jet.screen_form_c(u, w).map(|x| wire(&x)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let tau = dirs
        .iter()
        .map(|u| jet.tau(u).map(|x| wire(&x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeometryDump { b, c, tau })
}

fn process<T: Scalar>(setup: &Setup<'_>, jet: &Jet<T>, index: usize) -> Result<SampleOut> {
    let mj = MetallicJet::new(jet, setup.j);
    let kind = mj.kind();
    let coeffs = coefficient_pool::<T>(setup.seed, index, jet.chart_dim());
    let parts = evaluate_sample(&mj, setup.selected, &coeffs, setup.tol)?;
    let frame = LightlikeFrame {
        tangent: jet.tangent().to_vec(),
        e: jet.e().to_vec(),
        n: jet.n().to_vec(),
        screen: jet.screen().to_vec(),
        e_coeffs: value(&jet.frame.e_coeffs),
    };
    let check = frame.check(&jet.space);
    let summary = FrameSummary {
        chart_point: wire_vec(&jet.u),
        point: wire_vec(&setup.h.position(&jet.u)),
        e: wire_vec(jet.e()),
        n: wire_vec(jet.n()),
        screen: jet.screen().iter().map(|w| wire_vec(w)).collect(),
        j_e: wire_vec(mj.psi0()),
        j_n: wire_vec(mj.zeta0()),
        choices: jet.choices.clone(),
    };
    let (p, q) = (setup.j.p(), setup.j.q());
    let mut claims = Vec::new();
    for (i, c) in setup.claims.iter().enumerate() {
        let (ok, computed) = check_claim(c, &mj, kind, p, q)?;
        claims.push((i, ok, computed));
    }
    let geometry = if setup.dump {
        Some(geometry(jet)?)
    } else {
        None
    };
    Ok(SampleOut {
        kind,
        parts,
        check,
        reconstruction: mj.reconstruction_residual().0,
        summary,
        claims,
        geometry,
    })
}

fn run_sample(setup: &Setup<'_>, point: &Point, index: usize) -> Result<SampleOut> {
    let space = &setup.parsed.space;
    let mode: &ScreenMode = &setup.parsed.mode;
    let j = Some(setup.j);
    match point {
        Point::Exact(u) => {
            let jet = Jet::<QuadNum>::automatic(space, setup.h, u, mode, j, None)?;
            process(setup, &jet, index)
        }
        Point::Float(u) => {
            let jet = match setup.diff {
                Some(step) => Jet::finite_difference(space, setup.h, u, step, mode, j, None)?,
                None => Jet::<f64>::automatic(space, setup.h, u, mode, j, None)?,
            };
            process(setup, &jet, index)
        }
    }
}

fn claim_discrepancy(c: &Claim, computed: String) -> Discrepancy {
    Discrepancy {
        tag: c.tag.clone(),
        equation: c.equation.clone(),
        paper_claim: c.paper_claim.clone(),
        computed,
        documented: c.documented,
        fatal: c.fatal,
    }
}

/// Runs a manifest. Failures are reported in the returned report (with an
/// error record and exit code), never as a Rust error.
pub fn run(m: &Manifest, opts: &RunOptions) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::empty(opts.mode);
    report.name = m.name.clone();
    if let Err(e) = pipeline(m, opts, &mut report) {
        if matches!(e, MlhError::NotLightlike { .. }) {
            for c in &m.claims {
                if c.check == ClaimCheck::Lightlike {
                    report
                        .discrepancies
                        .push(claim_discrepancy(c, e.to_string()));
                }
            }
        }
        report.error = Some(ErrorRecord::from(&e));
    }
    finish(&mut report);
    if opts.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

fn finish(report: &mut RunReport) {
    let fatal = report.discrepancies.iter().any(|d| d.fatal);
    let precondition = report
        .identities
        .iter()
        .any(|r| r.status == Status::PreconditionFailed);
    let failed = report.identities.iter().any(|r| r.status == Status::Fail);
    report.exit_code = match &report.error {
        Some(e) => e.exit_code,
        None if fatal || precondition => 3,
        None if failed => 2,
        None => 0,
    };
    report.outcome = if !report.discrepancies.is_empty() {
        if report.discrepancies.iter().all(|d| d.documented) {
            Outcome::DocumentedDiscrepancy
        } else {
            Outcome::Fail
        }
    } else if report.exit_code == 0 {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
}

fn pipeline(m: &Manifest, opts: &RunOptions, report: &mut RunReport) -> Result<()> {
    let parsed = m.parse()?;
    let seed = opts.seed.unwrap_or(m.seed);
    let tol = opts
        .tolerance
        .or(m.tolerance)
        .unwrap_or(opts.default_tolerance);
    if !(tol >= 0.0) {
        return Err(MlhError::Schema("tolerance must be non-negative".into()));
    }
    let samples = opts.samples.unwrap_or(m.samples);
    if samples == 0 {
        return Err(MlhError::Schema("samples must be positive".into()));
    }
    let diff = match m.differentiation {
        Some(DiffSpec::FiniteDifference(h)) if h > 0.0 => Some(h),
        Some(DiffSpec::FiniteDifference(h)) => {
            return Err(MlhError::Schema(format!("finite difference step {h}")))
        }
        _ => None,
    };
    report.seed = seed;
    report.tolerance = tol;
    report.backend = match parsed.backend {
        BackendSpec::Exact => Backend::Exact,
        BackendSpec::Float => Backend::Float,
    };
    report.differentiation = match diff {
        Some(h) => format!("finite_difference({h})"),
        None => "automatic".into(),
    };
    let selection = if opts.mode == Mode::Classify {
        Some(Selection::Keyword("none".into()))
    } else {
        opts.identities.clone().or_else(|| m.identities.clone())
    };
    let (selected, explicit) = resolve_selection(selection.as_ref())?;

    let compat = check_metallic_compat(
        &parsed.space,
        m.p(),
        m.q(),
        &parsed.j_matrix,
        STRUCTURE_SAMPLES,
        seed,
    )?;
    let passed = compat.passed();
    let summary = format!(
        "eq3={} eq4={} eq5={}, {} of {} random pairs fail",
        compat.eq3, compat.eq4, compat.eq5, compat.eq5_sample_failures, compat.eq5_samples
    );
    report.structure = Some(compat);
    if !passed {
        return Err(MlhError::Precondition(format!(
            "J is not a compatible metallic structure: {summary}"
        )));
    }
    let j = m.structure(&parsed)?;
    if opts.mode == Mode::Check {
        report.samples = 0;
        return Ok(());
    }
    let h = parsed
        .hypersurface
        .as_ref()
        .ok_or_else(|| MlhError::Schema("classify and verify need a hypersurface".into()))?;
    let points = sample_points(m, &parsed, h, samples, seed)?;
    report.samples = points.len();
    let setup = Setup {
        parsed: &parsed,
        h,
        j: &j,
        selected: &selected,
        claims: &m.claims,
        tol,
        seed,
        diff,
        dump: opts.dump,
    };
    let work = |i: usize| run_sample(&setup, &points[i], i);
    let results = if opts.sequential {
        exec::map_indexed_sequential(points.len(), work)
    } else {
        exec::map_indexed(points.len(), work)
    };

    let mut outs = Vec::new();
    for r in results {
        match r {
            Ok(o) => outs.push(o),
            Err(MlhError::DegenerateChart(_)) if !h.is_affine() => report.skipped_points += 1,
            Err(e) => return Err(e),
        }
    }
    if outs.is_empty() {
        return Err(MlhError::DegenerateChart(
            "every sample point is singular".into(),
        ));
    }

    // Frame summary, claims and dump describe the first regular sample.
    let lead = &outs[0];
    report.frame = Some(lead.summary.clone());
    report.geometry = lead.geometry.clone();
    for (i, ok, computed) in &lead.claims {
        if !ok {
            report
                .discrepancies
                .push(claim_discrepancy(&m.claims[*i], computed.clone()));
        }
    }

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut merged: BTreeMap<&'static str, Partial> = BTreeMap::new();
    let mut frame_max: f64 = 0.0;
    let mut frame_exact = true;
    let mut recon: f64 = 0.0;
    for o in &outs {
        *counts.entry(format!("{:?}", o.kind)).or_default() += 1;
        for (k, part) in &o.parts {
            merged.entry(k).or_default().merge(part);
        }
        frame_max = frame_max.max(o.check.max());
        frame_exact &= o.check.exact_zero;
        recon = recon.max(o.reconstruction);
    }
    report.frame_residuals = Some(FrameResiduals {
        max_residual: frame_max,
        exact_zero: (report.backend == Backend::Exact).then_some(frame_exact),
        reconstruction: recon,
    });
    let uniform = counts.len() == 1;
    let kind = if uniform { outs[0].kind } else { Kind::Generic };
    let flags = merged.remove("FLAGS").unwrap_or_default();
    let side = |k: &str| flags.sides.get(k).copied().unwrap_or(false);
    let conformal_factor = flags.values.get("conformal_factor").and_then(|f| {
        if f.is_empty() {
            return None;
        }
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some([lo, hi])
    });
    report.classification = Some(ClassificationReport {
        kind,
        uniform,
        kind_counts: counts,
        totally_geodesic: side("totally_geodesic"),
        totally_umbilical: side("totally_umbilical"),
        screen_totally_umbilical: side("screen_totally_umbilical"),
        screen_conformal: side("screen_conformal"),
        conformal_factor,
        mixed_geodesic: flags.sides.get("mixed_geodesic").copied(),
    });
    report.identities = selected
        .iter()
        .map(|s| {
            let part = merged.get(s.id).cloned().unwrap_or_default();
            finalize(s, &part, report.backend, tol, explicit)
        })
        .collect();
    Ok(())
}
