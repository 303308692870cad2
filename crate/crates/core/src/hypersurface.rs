//! Hypersurfaces and their lightlike frames.
//!
//! Every construction here is generic over [`Scalar`], so the same code runs
//! on exact quadratic-field data, on floats, and on dual numbers seeded with
//! chart coordinates (which yields the frame fields together with their first
//! derivatives along the chart).
//!
//! The frame at a point is built in three steps: the radical generator `E`
//! from the nullspace of the tangent Gram matrix, a screen complementing `E`
//! inside the tangent space, and the null transversal `N` paired with `E`.
//! The discrete decisions taken along the way (free column, normalisation
//! coordinate, reference vectors) are recorded in [`FrameChoices`] so that the
//! same smooth local section can be re-evaluated at nearby points.

use serde::Serialize;

use crate::ambient::{MetallicStructure, SemiEuclideanSpace};
use crate::error::{MlhError, Result};
use crate::linalg::{self, Mat, RANK_REL_TOL};
use crate::poly::Polynomial;
use crate::scalar::{vec_ops as vo, QuadNum, Scalar};

/// `{x : c·x = offset}` with exact data.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHypersurface {
    c: Vec<QuadNum>,
    offset: QuadNum,
    pivot: usize,
}

impl AffineHypersurface {
    pub fn new(c: Vec<QuadNum>, offset: QuadNum) -> Result<Self> {
        let pivot = c
            .iter()
            .rposition(|x| !x.is_zero())
            .ok_or_else(|| MlhError::Domain("hyperplane covector must be nonzero".into()))?;
        Ok(AffineHypersurface { c, offset, pivot })
    }

    pub fn covector(&self) -> &[QuadNum] {
        &self.c
    }

    pub fn offset(&self) -> &QuadNum {
        &self.offset
    }

    pub fn ambient_dim(&self) -> usize {
        self.c.len()
    }

    /// Index of the coordinate solved for (last nonzero entry of `c`).
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// `Φᵢ = eᵢ − (cᵢ/c_k) e_k` for every `i ≠ k`.
    pub fn basis(&self) -> Vec<Vec<QuadNum>> {
        let k = self.pivot;
        let ck = self.c[k].clone();
        (0..self.c.len())
            .filter(|&i| i != k)
            .map(|i| {
                let mut v = vec![QuadNum::from_int(0); self.c.len()];
                v[i] = QuadNum::from_int(1);
                v[k] = -(self.c[i].clone() / ck.clone());
                v
            })
            .collect()
    }

    pub fn origin(&self) -> Vec<QuadNum> {
        let mut v = vec![QuadNum::from_int(0); self.c.len()];
        v[self.pivot] = self.offset.clone() / self.c[self.pivot].clone();
        v
    }

    pub fn contains(&self, x: &[QuadNum]) -> bool {
        x.len() == self.c.len() && dot(&self.c, x) == self.offset
    }

    /// Chart parameters of an ambient point (its coordinates other than the
    /// pivot one).
    pub fn chart_point(&self, x: &[QuadNum]) -> Result<Vec<QuadNum>> {
        if !self.contains(x) {
            return Err(MlhError::Domain("point does not lie on the hypersurface".into()));
        }
        Ok(x.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.pivot)
            .map(|(_, v)| v.clone())
            .collect())
    }

    /// Closed-form lightlike test: the metric dual of `c` is null.
    pub fn normal_is_null(&self, space: &SemiEuclideanSpace) -> bool {
        let dual = space.flat(&self.c);
        space.g(&dual, &dual).is_zero()
    }

    /// Tangent frame at an ambient point.
    pub fn tangent_frame_at(&self, x: &[QuadNum]) -> Result<TangentFrame<QuadNum>> {
        if !self.contains(x) {
            return Err(MlhError::Domain("point does not lie on the hypersurface".into()));
        }
        Ok(TangentFrame {
            point: x.to_vec(),
            vectors: self.basis(),
        })
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Polynomial parametrisation `u ↦ x(u)` over a coordinate box.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartHypersurface {
    components: Vec<Polynomial>,
    /// `jacobian[i][a] = ∂xᵃ/∂uⁱ`
    jacobian: Vec<Vec<Polynomial>>,
    domain: Vec<(f64, f64)>,
}

impl ChartHypersurface {
    pub fn new(components: Vec<Polynomial>, domain: Vec<(f64, f64)>) -> Result<Self> {
        let n = domain.len();
        if components.is_empty() || n + 1 != components.len() {
            return Err(MlhError::Schema(format!(
                "a chart into dimension {} needs {} parameters, got a domain of {}",
                components.len(),
                components.len().saturating_sub(1),
                n
            )));
        }
        if components.iter().any(|c| c.nvars() != n) {
            return Err(MlhError::Schema("chart components disagree on arity".into()));
        }
        if domain.iter().any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(MlhError::Schema("chart domain needs finite lo < hi".into()));
        }
        let jacobian = (0..n)
            .map(|i| components.iter().map(|c| c.derivative(i)).collect())
            .collect();
        Ok(ChartHypersurface {
            components,
            jacobian,
            domain,
        })
    }

    pub fn parse(sources: &[String], domain: Vec<(f64, f64)>, p: i64, q: i64) -> Result<Self> {
        let n = domain.len();
        let comps = sources
            .iter()
            .map(|s| Polynomial::parse(s, n, p, q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, domain)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Hypersurface {
    Affine(AffineHypersurface),
    Chart(ChartHypersurface),
}

impl Hypersurface {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Hypersurface::Affine(a) => a.ambient_dim(),
            Hypersurface::Chart(c) => c.components.len(),
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Hypersurface::Affine(_))
    }

    pub fn position<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        match self {
            Hypersurface::Affine(a) => {
                let mut x: Vec<S> = a.origin().iter().map(S::from_quad).collect();
                for (ui, phi) in u.iter().zip(a.basis()) {
                    let phi: Vec<S> = phi.iter().map(S::from_quad).collect();
                    x = vo::axpy(&x, ui, &phi);
                }
                x
            }
            Hypersurface::Chart(c) => c.components.iter().map(|p| p.eval(u)).collect(),
        }
    }

    /// Coordinate tangent vectors `∂x/∂uⁱ` at `u`.
    pub fn tangent_vectors<S: Scalar>(&self, u: &[S]) -> Vec<Vec<S>> {
        match self {
            Hypersurface::Affine(a) => a
                .basis()
                .iter()
                .map(|v| v.iter().map(S::from_quad).collect())
                .collect(),
            Hypersurface::Chart(c) => c
                .jacobian
                .iter()
                .map(|row| row.iter().map(|p| p.eval(u)).collect())
                .collect(),
        }
    }

    /// Tangent frame at chart parameters `u`, with a rank check.
    pub fn tangent_frame<S: Scalar>(&self, u: &[S]) -> Result<TangentFrame<S>> {
        if u.len() != self.chart_dim() {
            return Err(MlhError::Domain(format!(
                "expected {} chart parameters, got {}",
                self.chart_dim(),
                u.len()
            )));
        }
        let vectors = self.tangent_vectors(u);
        let r = linalg::rank(&Mat::from_cols(&vectors)?, RANK_REL_TOL);
        if r < vectors.len() {
            return Err(MlhError::DegenerateChart(format!(
                "Jacobian has rank {r} < {}",
                vectors.len()
            )));
        }
        Ok(TangentFrame {
            point: self.position(u),
            vectors,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentFrame<S> {
    pub point: Vec<S>,
    pub vectors: Vec<Vec<S>>,
}

/// Radical generator together with its expansion in the tangent frame.
#[derive(Clone, Debug)]
pub struct Radical<S> {
    pub e: Vec<S>,
    pub coeffs: Vec<S>,
    /// Frame index whose coefficient was fixed to one before normalising.
    pub free: usize,
    /// Ambient coordinate of `E` normalised to one.
    pub norm_index: usize,
}

fn first_significant<S: Scalar>(v: &[S]) -> Option<usize> {
    let scale = vo::max_abs(v);
    v.iter().position(|x| !x.is_negligible(scale, RANK_REL_TOL))
}

/// Nullspace of the tangent Gram matrix. With `forced` set, the free column
/// and the normalisation coordinate are taken from it instead of being
/// chosen afresh.
pub fn radical_with<S: Scalar>(
    space: &SemiEuclideanSpace,
    frame: &TangentFrame<S>,
    forced: Option<(usize, usize)>,
) -> Result<Radical<S>> {
    let n = frame.vectors.len();
    let gram = space.gram(&frame.vectors);
    let free_cols = linalg::free_columns(&gram, RANK_REL_TOL);
    match free_cols.len() {
        0 => return Err(MlhError::NotLightlike { nullity: 0 }),
        1 => {}
        k => return Err(MlhError::NotHypersurfaceRank { nullity: k }),
    }
    let free = forced.map(|f| f.0).unwrap_or(free_cols[0]);
    let others: Vec<usize> = (0..n).filter(|&i| i != free).collect();
    let cols: Vec<Vec<S>> = others.iter().map(|&i| gram.col(i)).collect();
    let rhs = vo::neg(&gram.col(free));
    let sol = linalg::solve_in_span(&cols, &rhs, RANK_REL_TOL)?;
    let mut coeffs = vec![S::zero(); n];
    coeffs[free] = S::one();
    for (k, &i) in others.iter().enumerate() {
        coeffs[i] = sol[k].clone();
    }
    let raw = vo::combo(&coeffs, &frame.vectors, frame.point.len());
    let norm_index = match forced {
        Some((_, m)) => m,
        None => first_significant(&raw)
            .ok_or_else(|| MlhError::InvariantViolation("radical generator vanished".into()))?,
    };
    let inv = S::one() / raw[norm_index].clone();
    Ok(Radical {
        e: vo::scale(&inv, &raw),
        coeffs: vo::scale(&inv, &coeffs),
        free,
        norm_index,
    })
}

/// Radical generator `E`, normalised so its first nonzero coordinate is 1.
pub fn radical<S: Scalar>(space: &SemiEuclideanSpace, frame: &TangentFrame<S>) -> Result<Vec<S>> {
    Ok(radical_with(space, frame, None)?.e)
}

/// The frame vectors other than the radical's free index. Any complement of
/// the radical inside the tangent space is non-degenerate, which is asserted.
pub fn canonical_screen<S: Scalar>(
    space: &SemiEuclideanSpace,
    frame: &TangentFrame<S>,
    radical: &Radical<S>,
) -> Result<Vec<Vec<S>>> {
    let screen: Vec<Vec<S>> = frame
        .vectors
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != radical.free)
        .map(|(_, v)| v.clone())
        .collect();
    check_screen(space, &radical.e, &screen)?;
    Ok(screen)
}

/// Screen must be orthogonal to `E`, independent of it, and non-degenerate.
pub fn check_screen<S: Scalar>(space: &SemiEuclideanSpace, e: &[S], screen: &[Vec<S>]) -> Result<()> {
    for (a, w) in screen.iter().enumerate() {
        let scale = vo::max_abs(w) * vo::max_abs(e);
        if !space.g(w, e).is_negligible(scale, RANK_REL_TOL) {
            return Err(MlhError::ScreenConstruction(format!(
                "screen vector {a} is not orthogonal to the radical"
            )));
        }
    }
    let mut with_e = screen.to_vec();
    with_e.push(e.to_vec());
    if !with_e.is_empty() && linalg::rank(&Mat::from_cols(&with_e)?, RANK_REL_TOL) < with_e.len() {
        return Err(MlhError::ScreenConstruction(
            "screen vectors and radical are dependent".into(),
        ));
    }
    let gram = space.gram(screen);
    if linalg::rank(&gram, RANK_REL_TOL) < screen.len() {
        return Err(MlhError::ScreenConstruction("screen Gram matrix is degenerate".into()));
    }
    Ok(())
}

/// `(1/c)(V − g(V,V)/(2c) E)` with `c = g(V,E)`: null and paired to `E`.
pub fn null_partner<S: Scalar>(space: &SemiEuclideanSpace, e: &[S], v: &[S]) -> Result<Vec<S>> {
    let c = space.g(v, e);
    if c.is_negligible(vo::max_abs(v) * vo::max_abs(e), RANK_REL_TOL) {
        return Err(MlhError::ScreenConstruction(
            "reference vector is orthogonal to the radical".into(),
        ));
    }
    let two = S::from_i64(2);
    let k = space.g(v, v) / (two * c.clone());
    let inner = vo::axpy(v, &(-k), e);
    Ok(vo::scale(&(S::one() / c), &inner))
}

fn unit<S: Scalar>(dim: usize, j: usize) -> Vec<S> {
    let mut v = vec![S::zero(); dim];
    v[j] = S::one();
    v
}

/// Coordinate directions ordered by `|g(eⱼ, E)|`, largest first, ties by index.
fn reference_order<S: Scalar>(space: &SemiEuclideanSpace, e: &[S]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..e.len()).collect();
    let mag: Vec<f64> = e.iter().map(|x| x.magnitude()).collect();
    idx.sort_by(|&a, &b| {
        mag[b]
            .partial_cmp(&mag[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let scale = vo::max_abs(e);
    idx.retain(|&j| !space.g(&unit::<S>(e.len(), j), e).is_negligible(scale, RANK_REL_TOL));
    idx
}

/// Transversal from coordinate reference `e_j` after removing its screen
/// components.
fn transversal_from<S: Scalar>(
    space: &SemiEuclideanSpace,
    e: &[S],
    screen: &[Vec<S>],
    j: usize,
) -> Result<Vec<S>> {
    let v = unit::<S>(e.len(), j);
    let gram = space.gram(screen);
    let rhs: Vec<S> = screen.iter().map(|w| space.g(&v, w)).collect();
    let coeffs = if screen.is_empty() {
        Vec::new()
    } else {
        linalg::solve(&gram, &rhs, RANK_REL_TOL)?
    };
    let mut v2 = v;
    for (a, w) in coeffs.iter().zip(screen) {
        v2 = vo::axpy(&v2, &(-a.clone()), w);
    }
    null_partner(space, e, &v2)
}

/// The unique null `N` with `g(N,E) = 1` orthogonal to the screen. A second
/// reference direction is used to confirm uniqueness.
pub fn transversal<S: Scalar>(
    space: &SemiEuclideanSpace,
    e: &[S],
    screen: &[Vec<S>],
) -> Result<Vec<S>> {
    Ok(transversal_with(space, e, screen, None)?.0)
}

pub fn transversal_with<S: Scalar>(
    space: &SemiEuclideanSpace,
    e: &[S],
    screen: &[Vec<S>],
    forced: Option<usize>,
) -> Result<(Vec<S>, usize)> {
    let order = reference_order(space, e);
    let j = match forced {
        Some(j) => j,
        None => *order.first().ok_or_else(|| {
            MlhError::InvariantViolation("radical is orthogonal to every coordinate".into())
        })?,
    };
    let n = transversal_from(space, e, screen, j)?;
    if forced.is_none() {
        if let Some(&j2) = order.get(1) {
            let n2 = transversal_from(space, e, screen, j2)?;
            let diff = vo::sub(&n, &n2);
            let scale = vo::max_abs(&n).max(1.0);
            if diff.iter().any(|d| !d.is_negligible(scale, 1e-8)) {
                return Err(MlhError::InvariantViolation(
                    "transversal depends on the reference vector".into(),
                ));
            }
        }
    }
    Ok((n, j))
}

/// How the screen (equivalently the transversal) is chosen.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenMode {
    /// Frame vectors other than the radical's free index.
    Canonical,
    /// Explicit constant basis, validated.
    Basis(#[serde(skip)] Vec<Vec<QuadNum>>),
    /// Transversal built from this constant reference vector.
    Transversal(#[serde(skip)] Vec<QuadNum>),
    /// Transversal adapted to the eigenspaces of the metallic structure.
    MetallicAdapted,
}

/// Discrete decisions behind a frame, replayable at nearby points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameChoices {
    pub free: usize,
    pub norm_index: usize,
    pub references: Vec<usize>,
}

/// `E`, `N` and the screen at one point, plus the tangent frame they came from.
#[derive(Clone, Debug)]
pub struct LightlikeFrame<S> {
    pub tangent: Vec<Vec<S>>,
    pub e: Vec<S>,
    pub n: Vec<S>,
    pub screen: Vec<Vec<S>>,
    /// Expansion of `E` in the tangent frame.
    pub e_coeffs: Vec<S>,
}

/// Residuals of the defining conditions of a lightlike frame.
#[derive(Clone, Debug, Serialize)]
pub struct FrameCheck {
    pub e_null: f64,
    pub e_normal: f64,
    pub n_null: f64,
    pub n_pairing: f64,
    pub n_screen: f64,
    pub exact_zero: bool,
}

impl FrameCheck {
    pub fn max(&self) -> f64 {
        [self.e_null, self.e_normal, self.n_null, self.n_pairing, self.n_screen]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl<S: Scalar> LightlikeFrame<S> {
    pub fn chart_dim(&self) -> usize {
        self.tangent.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.e.len()
    }

    pub fn check(&self, space: &SemiEuclideanSpace) -> FrameCheck {
        let mut exact = true;
        let mut take = |x: S| {
            exact &= x.is_zero();
            x.magnitude()
        };
        let e_null = take(space.g(&self.e, &self.e));
        let mut e_normal: f64 = 0.0;
        for phi in &self.tangent {
            e_normal = e_normal.max(take(space.g(phi, &self.e)));
        }
        let n_null = take(space.g(&self.n, &self.n));
        let n_pairing = take(space.g(&self.n, &self.e) - S::one());
        let mut n_screen: f64 = 0.0;
        for w in &self.screen {
            n_screen = n_screen.max(take(space.g(&self.n, w)));
        }
        FrameCheck {
            e_null,
            e_normal,
            n_null,
            n_pairing,
            n_screen,
            exact_zero: exact,
        }
    }

    /// `{E} ∪ W` spans the tangent space and `{E, N} ∪ W` the ambient space.
    pub fn completeness(&self) -> Result<(bool, bool)> {
        let mut tan = vec![self.e.clone()];
        tan.extend(self.screen.iter().cloned());
        let tan_rank = linalg::rank(&Mat::from_cols(&tan)?, RANK_REL_TOL);
        let mut amb = tan;
        amb.push(self.n.clone());
        let det = linalg::det(&Mat::from_cols(&amb)?)?;
        let scale = amb.iter().map(|v| vo::max_abs(v)).fold(1.0, |a, b| a * b.max(1e-300));
        Ok((
            tan_rank == self.tangent.len(),
            !det.is_negligible(scale, RANK_REL_TOL),
        ))
    }
}

/// Null transversal built inside the eigenspaces of `J`.
///
/// If `E` is an eigenvector the transversal is taken in the same eigenspace.
/// Otherwise `E = E⁺ + E⁻` with both parts null, and `N = N⁺ + N⁻` with
/// `N^±` null in the matching eigenspace, `g(N⁺,E⁺) = (σ−p)/(2σ−p)` and
/// `g(N⁻,E⁻) = σ/(2σ−p)`; then `JE` and `JN` are both orthogonal to `E` and
/// `N`.
pub fn adapted_transversal<S: Scalar>(
    space: &SemiEuclideanSpace,
    j: &MetallicStructure,
    e: &[S],
    forced: Option<&[usize]>,
) -> Result<(Vec<S>, Vec<usize>)> {
    let dim = e.len();
    let sigma = j.sigma();
    let p = QuadNum::from_int(j.p());
    let width = QuadNum::from_int(2) * sigma.clone() - p.clone();
    // P⁺ = (J − (p−σ)I)/(2σ−p) projects onto the σ-eigenspace
    let jm: Mat<S> = j.matrix_in();
    let shift = S::from_quad(&(p.clone() - sigma.clone()));
    let inv_w = S::from_quad(&width.recip()?);
    let pplus = jm.sub(&Mat::identity(dim).scale(&shift)).scale(&inv_w);
    let pminus = Mat::identity(dim).sub(&pplus);
    let e_plus = pplus.mul_vec(e);
    let e_minus = pminus.mul_vec(e);
    let scale = vo::max_abs(e);
    let small = |v: &[S]| v.iter().all(|x| x.is_negligible(scale, RANK_REL_TOL));

    let build = |proj: &Mat<S>, part: &[S], weight: S, slot: usize| -> Result<(Vec<S>, usize)> {
        let candidates: Vec<usize> = {
            let mut idx: Vec<(usize, f64)> = (0..dim)
                .map(|k| {
                    let r = proj.col(k);
                    (k, space.g(&r, part).magnitude())
                })
                .collect();
            idx.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            idx.into_iter().map(|(k, _)| k).collect()
        };
        let k = match forced {
            Some(f) => *f.get(slot).ok_or_else(|| {
                MlhError::InvariantViolation("missing adapted reference choice".into())
            })?,
            None => candidates[0],
        };
        let r = proj.col(k);
        let n1 = null_partner(space, part, &r)?;
        Ok((vo::scale(&weight, &n1), k))
    };

    if small(&e_minus) || small(&e_plus) {
        let proj = if small(&e_minus) { &pplus } else { &pminus };
        let (n, k) = build(proj, e, S::one(), 0)?;
        return Ok((n, vec![k]));
    }
    let norm_plus = space.g(&e_plus, &e_plus);
    if !norm_plus.is_negligible(scale * scale, RANK_REL_TOL) {
        return Err(MlhError::ScreenConstruction(
            "radical components in the eigenspaces are not null".into(),
        ));
    }
    let a = S::from_quad(&((sigma.clone() - p) / width.clone()));
    let b = S::from_quad(&(sigma / width));
    let (n_plus, k1) = build(&pplus, &e_plus, a, 0)?;
    let (n_minus, k2) = build(&pminus, &e_minus, b, 1)?;
    Ok((vo::add(&n_plus, &n_minus), vec![k1, k2]))
}

/// Full lightlike frame at chart parameters `u`.
pub fn build_frame<S: Scalar>(
    space: &SemiEuclideanSpace,
    h: &Hypersurface,
    u: &[S],
    mode: &ScreenMode,
    j: Option<&MetallicStructure>,
    choices: Option<&FrameChoices>,
) -> Result<(LightlikeFrame<S>, FrameChoices)> {
    if h.ambient_dim() != space.dim() {
        return Err(MlhError::Domain(format!(
            "hypersurface lives in dimension {}, ambient space has {}",
            h.ambient_dim(),
            space.dim()
        )));
    }
    let tf = h.tangent_frame(u)?;
    let rad = radical_with(space, &tf, choices.map(|c| (c.free, c.norm_index)))?;
    let forced_refs = choices.map(|c| c.references.as_slice());
    let others = |n: &[S]| -> Vec<Vec<S>> {
        tf.vectors
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != rad.free)
            .map(|(_, phi)| vo::axpy(phi, &(-space.g(phi, n)), &rad.e))
            .collect()
    };
    let (screen, n, references) = match mode {
        ScreenMode::Canonical => {
            let screen = canonical_screen(space, &tf, &rad)?;
            let (n, r) = transversal_with(space, &rad.e, &screen, forced_refs.map(|f| f[0]))?;
            (screen, n, vec![r])
        }
        ScreenMode::Basis(basis) => {
            if basis.len() + 1 != tf.vectors.len() {
                return Err(MlhError::ScreenConstruction(format!(
                    "screen override has {} vectors, expected {}",
                    basis.len(),
                    tf.vectors.len() - 1
                )));
            }
            if basis.iter().any(|w| w.len() != space.dim()) {
                return Err(MlhError::ScreenConstruction(
                    "screen override vector has the wrong length".into(),
                ));
            }
            let screen: Vec<Vec<S>> = basis
                .iter()
                .map(|w| w.iter().map(S::from_quad).collect())
                .collect();
            check_screen(space, &rad.e, &screen)?;
            let (n, r) = transversal_with(space, &rad.e, &screen, forced_refs.map(|f| f[0]))?;
            (screen, n, vec![r])
        }
        ScreenMode::Transversal(v) => {
            if v.len() != space.dim() {
                return Err(MlhError::ScreenConstruction(
                    "transversal reference has the wrong length".into(),
                ));
            }
            let v: Vec<S> = v.iter().map(S::from_quad).collect();
            let n = null_partner(space, &rad.e, &v)?;
            let screen = others(&n);
            check_screen(space, &rad.e, &screen)?;
            (screen, n, Vec::new())
        }
        ScreenMode::MetallicAdapted => {
            let j = j.ok_or_else(|| {
                MlhError::ScreenConstruction("adapted screen needs a metallic structure".into())
            })?;
            let (n, refs) = adapted_transversal(space, j, &rad.e, forced_refs)?;
            let screen = others(&n);
            check_screen(space, &rad.e, &screen)?;
            (screen, n, refs)
        }
    };
    let choices = FrameChoices {
        free: rad.free,
        norm_index: rad.norm_index,
        references,
    };
    Ok((
        LightlikeFrame {
            tangent: tf.vectors,
            e: rad.e,
            n,
            screen,
            e_coeffs: rad.coeffs,
        },
        choices,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{metallic_sigma, rat};

    fn qi(v: i64) -> QuadNum {
        QuadNum::from_int(v)
    }

    fn ssi_one() -> (SemiEuclideanSpace, AffineHypersurface, QuadNum) {
        let s = metallic_sigma(1, 1).unwrap();
        let space = SemiEuclideanSpace::new(vec![-1, 1, -1, 1, 1]).unwrap();
        // x5 = σx1 + σx2 + x3
        let h = AffineHypersurface::new(
            vec![s.clone(), s.clone(), qi(1), qi(0), qi(-1)],
            qi(0),
        )
        .unwrap();
        (space, h, s)
    }

    #[test]
    fn affine_basis_matches_the_worked_example() {
        let (_, h, s) = ssi_one();
        let b = h.basis();
        assert_eq!(b[0], vec![qi(1), qi(0), qi(0), qi(0), s.clone()]);
        assert_eq!(b[1], vec![qi(0), qi(1), qi(0), qi(0), s.clone()]);
        assert_eq!(b[2], vec![qi(0), qi(0), qi(1), qi(0), qi(1)]);
        assert_eq!(b[3], vec![qi(0), qi(0), qi(0), qi(1), qi(0)]);
        let plane = AffineHypersurface::new(vec![qi(1), qi(0), qi(0)], qi(0)).unwrap();
        assert_eq!(
            plane.basis(),
            vec![vec![qi(0), qi(1), qi(0)], vec![qi(0), qi(0), qi(1)]]
        );
    }

    #[test]
    fn radical_is_projectively_the_stated_generator() {
        let (space, h, s) = ssi_one();
        let hs = Hypersurface::Affine(h);
        let tf = hs.tangent_frame(&vec![qi(0); 4]).unwrap();
        let e = radical(&space, &tf).unwrap();
        // σ∂1 − σ∂2 + ∂3 + ∂5 normalised by its first coordinate
        let expect = vec![s.clone(), -s.clone(), qi(1), qi(0), qi(1)];
        let inv = s.recip().unwrap();
        let expect: Vec<QuadNum> = expect.iter().map(|x| x.clone() * inv.clone()).collect();
        assert_eq!(e, expect);
    }

    #[test]
    fn non_null_normal_is_rejected() {
        let s = metallic_sigma(1, 1).unwrap();
        let space = SemiEuclideanSpace::new(vec![-1, 1, -1, 1, 1]).unwrap();
        let h = AffineHypersurface::new(vec![qi(1), qi(0), qi(0), qi(0), -s], qi(0)).unwrap();
        assert!(!h.normal_is_null(&space));
        let tf = Hypersurface::Affine(h).tangent_frame(&vec![qi(0); 4]).unwrap();
        assert!(matches!(
            radical(&space, &tf),
            Err(MlhError::NotLightlike { nullity: 0 })
        ));
    }

    #[test]
    fn minkowski_plane_frame() {
        let space = SemiEuclideanSpace::new(vec![-1, 1]).unwrap();
        let h = Hypersurface::Affine(AffineHypersurface::new(vec![qi(1), qi(-1)], qi(0)).unwrap());
        let (f, _) = build_frame(&space, &h, &[qi(0)], &ScreenMode::Canonical, None, None).unwrap();
        assert_eq!(f.e, vec![qi(1), qi(1)]);
        assert!(f.screen.is_empty());
        assert_eq!(f.n, vec![QuadNum::rational(rat(-1, 2)), QuadNum::rational(rat(1, 2))]);
        assert!(f.check(&space).exact_zero);
    }

    #[test]
    fn transversal_override_reproduces_given_null_vector() {
        let (space, h, s) = ssi_one();
        let half = QuadNum::rational(rat(1, 2));
        let n_stated = vec![
            -(s.clone() * half.clone()),
            s.clone() * half.clone(),
            -half.clone(),
            qi(0),
            half.clone(),
        ];
        let hs = Hypersurface::Affine(h);
        let (f, _) = build_frame(
            &space,
            &hs,
            &vec![qi(0); 4],
            &ScreenMode::Transversal(n_stated.clone()),
            None,
            None,
        )
        .unwrap();
        // E is scaled by 1/σ relative to the stated one, so N picks up σ
        let scaled: Vec<QuadNum> = n_stated.iter().map(|x| x.clone() * s.clone()).collect();
        assert_eq!(f.n, scaled);
        assert!(f.check(&space).exact_zero);
        assert_eq!(f.completeness().unwrap(), (true, true));
    }

    #[test]
    fn invalid_override_is_a_screen_error() {
        let (space, h, _) = ssi_one();
        let hs = Hypersurface::Affine(h);
        let bad = vec![
            vec![qi(1), qi(0), qi(0), qi(0), qi(0)],
            vec![qi(0), qi(0), qi(0), qi(1), qi(0)],
            vec![qi(0), qi(0), qi(1), qi(0), qi(1)],
        ];
        let r = build_frame(&space, &hs, &vec![qi(0); 4], &ScreenMode::Basis(bad), None, None);
        assert!(matches!(r, Err(MlhError::ScreenConstruction(_))));
    }

    #[test]
    fn float_frame_on_light_cone_chart() {
        let space = SemiEuclideanSpace::new(vec![-1, 1, 1, 1]).unwrap();
        let comps = [
            "u1*(1 + u2^2 + u3^2)",
            "2*u1*u2",
            "2*u1*u3",
            "u1*(1 - u2^2 - u3^2)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>();
        let chart =
            ChartHypersurface::parse(&comps, vec![(0.5, 1.5), (-0.5, 0.5), (-0.5, 0.5)], 1, 1)
                .unwrap();
        let h = Hypersurface::Chart(chart);
        let (f, c) =
            build_frame(&space, &h, &[1.1, 0.2, -0.3], &ScreenMode::Canonical, None, None).unwrap();
        assert!(f.check(&space).max() < 1e-12);
        // replaying the same choices at a nearby point keeps the section smooth
        let (g, c2) =
            build_frame(&space, &h, &[1.1, 0.2, -0.3 + 1e-6], &ScreenMode::Canonical, None, Some(&c))
                .unwrap();
        assert_eq!(c, c2);
        assert!(vo::max_abs(&vo::sub(&f.e, &g.e)) < 1e-5);
    }
}
