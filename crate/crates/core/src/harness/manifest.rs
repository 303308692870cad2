//! JSON manifest schema and its conversion into geometric objects.

use serde::{Deserialize, Serialize};

use crate::ambient::{
    metallic_from_product, Branch, MetallicStructure, ProductStructure, SemiEuclideanSpace,
};
use crate::error::{MlhError, Result};
use crate::hypersurface::{AffineHypersurface, ChartHypersurface, Hypersurface, ScreenMode};
use crate::linalg::Mat;
use crate::metallic::Kind;
use crate::poly::Polynomial;
use crate::scalar::{metallic_disc, QuadNum, QuadRepr, Rational};

/// A number in a manifest: an integer, a decimal, an expression in
/// `sigma`, `p`, `q` (e.g. `"p-sigma"`, `"1/2"`), or an exact pair object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Expr(String),
    Quad(QuadRepr),
}

impl Num {
    pub fn to_quad(&self, p: i64, q: i64) -> Result<QuadNum> {
        match self {
            Num::Int(v) => Ok(QuadNum::from_int(*v)),
            Num::Float(x) => Rational::from_float(*x)
                .map(QuadNum::rational)
                .ok_or_else(|| MlhError::Schema(format!("non-finite number {x}"))),
            Num::Expr(s) => Polynomial::parse(s, 0, p, q)?
                .as_constant()
                .ok_or_else(|| MlhError::Schema(format!("{s:?} is not a constant"))),
            Num::Quad(r) => r.clone().into_quad(metallic_disc(p, q)),
        }
    }

    pub fn to_f64(&self, p: i64, q: i64) -> Result<f64> {
        match self {
            Num::Float(x) => Ok(*x),
            other => Ok(other.to_quad(p, q)?.to_f64()),
        }
    }

    pub fn exact(x: &QuadNum) -> Num {
        if x.is_rational() && x.a().is_integer() {
            if let Ok(v) = i64::try_from(x.a().to_integer()) {
                return Num::Int(v);
            }
        }
        Num::Quad(QuadRepr::from(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub dim: usize,
    pub signature: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureSpec {
    Diagonal {
        entries: Vec<Num>,
    },
    FromProduct {
        #[serde(rename = "F")]
        f: Vec<Vec<Num>>,
        #[serde(default = "plus")]
        branch: String,
    },
    Matrix {
        rows: Vec<Vec<Num>>,
    },
}

fn plus() -> String {
    "+".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetallicSpec {
    pub p: i64,
    pub q: i64,
    #[serde(rename = "J")]
    pub j: StructureSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HypersurfaceSpec {
    Affine {
        c: Vec<Num>,
        #[serde(default = "zero")]
        offset: Num,
    },
    Chart {
        components: Vec<String>,
        domain: Vec<[f64; 2]>,
    },
}

fn zero() -> Num {
    Num::Int(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenModeSpec {
    Canonical,
    MetallicAdapted,
    Transversal(Vec<Num>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    /// `"all"` or `"none"`.
    Keyword(String),
    List(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendSpec {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffSpec {
    Automatic,
    FiniteDifference(f64),
}

/// A published statement the run re-verifies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub tag: String,
    pub equation: String,
    pub paper_claim: String,
    pub check: ClaimCheck,
    /// Disagreement is a known, documented discrepancy.
    #[serde(default)]
    pub documented: bool,
    /// Disagreement makes the run fail.
    #[serde(default = "yes")]
    pub fatal: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimCheck {
    /// The hypersurface is lightlike.
    Lightlike,
    Kind { kind: Kind },
    /// `E` is proportional to this vector.
    Radical { vector: Vec<Num> },
    /// `N` is proportional to this vector.
    Transversal { vector: Vec<Num> },
    /// `J̃E` is proportional to this vector.
    JRadical { vector: Vec<Num> },
    /// `J̃N` is proportional to this vector.
    JTransversal { vector: Vec<Num> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    DocumentedDiscrepancy,
    Fail,
}

/// Expected result of a fixture run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub outcome: Outcome,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn default_samples() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub ambient: AmbientSpec,
    pub metallic: MetallicSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypersurface: Option<HypersurfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screen_override: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screen_mode: Option<ScreenModeSpec>,
    /// Ambient points for affine hypersurfaces, chart parameters for charts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<Selection>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Absolute tolerance for float residuals; the caller's default applies
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub differentiation: Option<DiffSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<Claim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

/// Geometric objects built from a manifest.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub space: SemiEuclideanSpace,
    /// The tensor as written; the structure checks run on it.
    pub j_matrix: Mat<QuadNum>,
    pub hypersurface: Option<Hypersurface>,
    pub mode: ScreenMode,
    pub backend: BackendSpec,
}

fn quad_vec(v: &[Num], p: i64, q: i64) -> Result<Vec<QuadNum>> {
    v.iter().map(|x| x.to_quad(p, q)).collect()
}

fn quad_rows(rows: &[Vec<Num>], p: i64, q: i64) -> Result<Mat<QuadNum>> {
    Mat::from_rows(
        rows.iter()
            .map(|r| quad_vec(r, p, q))
            .collect::<Result<Vec<_>>>()?,
    )
    .map_err(|e| MlhError::Schema(e.to_string()))
}

impl Manifest {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| MlhError::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn p(&self) -> i64 {
        self.metallic.p
    }

    pub fn q(&self) -> i64 {
        self.metallic.q
    }

    /// Validates the manifest and builds the geometric objects. Failures of
    /// the structure itself (as opposed to its encoding) are reported by the
    /// structure checks, not here.
    pub fn parse(&self) -> Result<Parsed> {
        let (p, q) = (self.p(), self.q());
        if p < 1 || q < 1 {
            return Err(MlhError::Schema("metallic p and q must be positive".into()));
        }
        if self.ambient.signature.len() != self.ambient.dim {
            return Err(MlhError::Schema(format!(
                "signature has {} entries, dim is {}",
                self.ambient.signature.len(),
                self.ambient.dim
            )));
        }
        let space = SemiEuclideanSpace::new(self.ambient.signature.clone())
            .map_err(|e| MlhError::Schema(e.to_string()))?;
        let n = self.ambient.dim;
        let j_matrix = match &self.metallic.j {
            StructureSpec::Diagonal { entries } => Mat::from_diag(&quad_vec(entries, p, q)?),
            StructureSpec::Matrix { rows } => quad_rows(rows, p, q)?,
            StructureSpec::FromProduct { f, branch } => {
                let branch = match branch.as_str() {
                    "+" => Branch::Plus,
                    "-" => Branch::Minus,
                    other => return Err(MlhError::Schema(format!("branch {other:?}"))),
                };
                let fp = ProductStructure::new(quad_rows(f, p, q)?)?;
                metallic_from_product(&fp, p, q, branch)?.matrix().clone()
            }
        };
        if j_matrix.rows() != n || j_matrix.cols() != n {
            return Err(MlhError::Schema(format!("J must be {n}×{n}")));
        }
        let hypersurface = match &self.hypersurface {
            None => None,
            Some(HypersurfaceSpec::Affine { c, offset }) => {
                if c.len() != n {
                    return Err(MlhError::Schema(format!("covector must have {n} entries")));
                }
                Some(Hypersurface::Affine(
                    AffineHypersurface::new(quad_vec(c, p, q)?, offset.to_quad(p, q)?)
                        .map_err(|e| MlhError::Schema(e.to_string()))?,
                ))
            }
            Some(HypersurfaceSpec::Chart { components, domain }) => {
                if components.len() != n {
                    return Err(MlhError::Schema(format!("chart must have {n} components")));
                }
                if domain.len() + 1 != n {
                    return Err(MlhError::Schema(format!(
                        "chart domain must have {} intervals",
                        n - 1
                    )));
                }
                if domain.iter().any(|[lo, hi]| !(lo < hi)) {
                    return Err(MlhError::Schema("empty chart domain interval".into()));
                }
                let dom = domain.iter().map(|[a, b]| (*a, *b)).collect();
                Some(Hypersurface::Chart(ChartHypersurface::parse(
                    components, dom, p, q,
                )?))
            }
        };
        let mode = match (&self.screen_override, &self.screen_mode) {
            (Some(_), Some(_)) => {
                return Err(MlhError::Schema(
                    "screen_override and screen_mode are exclusive".into(),
                ))
            }
            (Some(basis), None) => ScreenMode::Basis(
                basis
                    .iter()
                    .map(|w| quad_vec(w, p, q))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (None, Some(ScreenModeSpec::Transversal(v))) => {
                ScreenMode::Transversal(quad_vec(v, p, q)?)
            }
            (None, Some(ScreenModeSpec::MetallicAdapted)) => ScreenMode::MetallicAdapted,
            (None, Some(ScreenModeSpec::Canonical)) | (None, None) => ScreenMode::Canonical,
        };
        let is_chart = matches!(hypersurface, Some(Hypersurface::Chart(_)));
        let backend = match self.backend {
            Some(BackendSpec::Exact) if is_chart => {
                return Err(MlhError::Schema(
                    "exact backend needs an affine hypersurface".into(),
                ))
            }
            Some(b) => b,
            None if is_chart => BackendSpec::Float,
            None => BackendSpec::Exact,
        };
        if matches!(self.differentiation, Some(DiffSpec::FiniteDifference(_)))
            && backend == BackendSpec::Exact
        {
            return Err(MlhError::Schema(
                "finite differences need the float backend".into(),
            ));
        }
        if self.samples == 0 {
            return Err(MlhError::Schema("samples must be positive".into()));
        }
        if self.tolerance.is_some_and(|t| !(t >= 0.0)) {
            return Err(MlhError::Schema("tolerance must be non-negative".into()));
        }
        Ok(Parsed {
            space,
            j_matrix,
            hypersurface,
            mode,
            backend,
        })
    }

    /// Builds the validated structure (`J² = pJ + qI`).
    pub fn structure(&self, parsed: &Parsed) -> Result<MetallicStructure> {
        MetallicStructure::new(self.p(), self.q(), parsed.j_matrix.clone())
    }
}
