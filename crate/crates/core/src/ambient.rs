//! Flat semi-Euclidean ambient spaces and constant metallic structures.
//!
//! The ambient connection is the flat one and the metallic tensor is
//! constant, so the structure is parallel everywhere without any pointwise
//! check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{MlhError, Result};
use crate::linalg::{nullspace, Mat, RANK_REL_TOL};
use crate::scalar::{metallic_disc, metallic_sigma, rat, QuadNum, Scalar};

/// ℝⁿ⁺¹ with a diagonal metric of the given signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiEuclideanSpace {
    signature: Vec<i8>,
}

impl SemiEuclideanSpace {
    pub fn new(signature: Vec<i8>) -> Result<Self> {
        if signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(MlhError::Domain("signature entries must be +1 or -1".into()));
        }
        let index = signature.iter().filter(|&&s| s == -1).count();
        if index == 0 || index == signature.len() {
            return Err(MlhError::Domain(format!(
                "index {index} must satisfy 0 < index < {}",
                signature.len()
            )));
        }
        Ok(SemiEuclideanSpace { signature })
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    pub fn index(&self) -> usize {
        self.signature.iter().filter(|&&s| s == -1).count()
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    /// Unchecked pairing `Σ εᵢ uᵢ vᵢ`.
    pub fn g<S: Scalar>(&self, u: &[S], v: &[S]) -> S {
        let mut acc = S::zero();
        for ((e, a), b) in self.signature.iter().zip(u).zip(v) {
            let t = a.clone() * b.clone();
            acc = if *e < 0 { acc - t } else { acc + t };
        }
        acc
    }

    /// Metric dual (index lowering); the same map raises indices.
    pub fn flat<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        v.iter()
            .zip(&self.signature)
            .map(|(x, &e)| if e < 0 { -x.clone() } else { x.clone() })
            .collect()
    }

    pub fn metric_matrix<S: Scalar>(&self) -> Mat<S> {
        Mat::from_diag(
            &self
                .signature
                .iter()
                .map(|&e| S::from_i64(e as i64))
                .collect::<Vec<_>>(),
        )
    }

    pub fn gram<S: Scalar>(&self, vectors: &[Vec<S>]) -> Mat<S> {
        let n = vectors.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.g(&vectors[i], &vectors[j]);
                m[(j, i)] = v.clone();
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Checked metric evaluation.
pub fn metric_eval<S: Scalar>(space: &SemiEuclideanSpace, u: &[S], v: &[S]) -> Result<S> {
    if u.len() != space.dim() || v.len() != space.dim() {
        return Err(MlhError::Domain(format!(
            "vectors of length {} and {} in a space of dimension {}",
            u.len(),
            v.len(),
            space.dim()
        )));
    }
    Ok(space.g(u, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    fn sign(self) -> i64 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

/// Constant (1,1)-tensor with `J² = pJ + qI`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetallicStructure {
    p: i64,
    q: i64,
    j: Mat<QuadNum>,
}

impl MetallicStructure {
    pub fn new(p: i64, q: i64, j: Mat<QuadNum>) -> Result<Self> {
        metallic_sigma(p, q)?;
        if j.rows() != j.cols() {
            return Err(MlhError::Domain("metallic tensor must be square".into()));
        }
        let s = MetallicStructure { p, q, j };
        if !s.polynomial_residual().all_within(0.0) {
            return Err(MlhError::InvariantViolation(
                "J² − pJ − qI does not vanish".into(),
            ));
        }
        Ok(s)
    }

    /// `diag(entries)`; each entry is typically σ or p − σ.
    pub fn diagonal(p: i64, q: i64, entries: &[QuadNum]) -> Result<Self> {
        Self::new(p, q, Mat::from_diag(entries))
    }

    /// `σ·I` in dimension `dim`.
    pub fn scalar(p: i64, q: i64, dim: usize) -> Result<Self> {
        let s = metallic_sigma(p, q)?;
        Self::diagonal(p, q, &vec![s; dim])
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn sigma(&self) -> QuadNum {
        metallic_sigma(self.p, self.q).expect("validated parameters")
    }

    pub fn disc(&self) -> u64 {
        metallic_disc(self.p, self.q)
    }

    pub fn dim(&self) -> usize {
        self.j.rows()
    }

    pub fn matrix(&self) -> &Mat<QuadNum> {
        &self.j
    }

    pub fn matrix_in<S: Scalar>(&self) -> Mat<S> {
        self.j.map(S::from_quad)
    }

    pub fn apply<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        self.matrix_in::<S>().mul_vec(v)
    }

    /// `J² − pJ − qI`, exactly.
    pub fn polynomial_residual(&self) -> Mat<QuadNum> {
        let n = self.dim();
        let j2 = self.j.mul(&self.j).expect("square");
        j2.sub(&self.j.scale(&QuadNum::from_int(self.p)))
            .sub(&Mat::identity(n).scale(&QuadNum::from_int(self.q)))
    }

    /// Bases of the σ and (p − σ) eigenspaces.
    pub fn eigenspaces(&self) -> (Vec<Vec<QuadNum>>, Vec<Vec<QuadNum>>) {
        let n = self.dim();
        let s = self.sigma();
        let sbar = QuadNum::from_int(self.p) - s.clone();
        let shift = |lam: &QuadNum| self.j.sub(&Mat::identity(n).scale(lam));
        (
            nullspace(&shift(&s), RANK_REL_TOL),
            nullspace(&shift(&sbar), RANK_REL_TOL),
        )
    }
}

/// Constant involution `F² = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductStructure {
    f: Mat<QuadNum>,
}

impl ProductStructure {
    pub fn new(f: Mat<QuadNum>) -> Result<Self> {
        if f.rows() != f.cols() {
            return Err(MlhError::Domain("product structure must be square".into()));
        }
        let sq = f.mul(&f)?;
        if sq != Mat::identity(f.rows()) {
            return Err(MlhError::InvariantViolation("F² ≠ I".into()));
        }
        Ok(ProductStructure { f })
    }

    pub fn diagonal(signs: &[i64]) -> Result<Self> {
        Self::new(Mat::from_diag(
            &signs.iter().map(|&s| QuadNum::from_int(s)).collect::<Vec<_>>(),
        ))
    }

    pub fn matrix(&self) -> &Mat<QuadNum> {
        &self.f
    }
}

/// `J = (p/2)I ± ((2σ−p)/2)F`.
pub fn metallic_from_product(
    f: &ProductStructure,
    p: i64,
    q: i64,
    branch: Branch,
) -> Result<MetallicStructure> {
    let n = f.f.rows();
    let s = metallic_sigma(p, q)?;
    let half_p = QuadNum::rational(rat(p, 2));
    let coeff = (QuadNum::from_int(2) * s - QuadNum::from_int(p))
        * QuadNum::rational(rat(branch.sign(), 2));
    let j = Mat::identity(n).scale(&half_p).add(&f.f.scale(&coeff));
    MetallicStructure::new(p, q, j)
}

/// `F = ±((2/(2σ−p))J − (p/(2σ−p))I)`.
pub fn product_from_metallic(j: &MetallicStructure, branch: Branch) -> Result<ProductStructure> {
    let n = j.dim();
    let w = QuadNum::from_int(2) * j.sigma() - QuadNum::from_int(j.p);
    let sign = QuadNum::from_int(branch.sign());
    let a = sign.clone() * QuadNum::from_int(2) / w.clone();
    let b = sign * QuadNum::from_int(j.p) / w;
    let f = j.j.scale(&a).sub(&Mat::identity(n).scale(&b));
    ProductStructure::new(f)
}

/// Outcome of the structure checks on a space.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CompatReport {
    /// `J² = pJ + qI`
    pub eq3: bool,
    /// `g(U, JV) = g(JU, V)`, i.e. `GJ` symmetric
    pub eq4: bool,
    /// `g(JU, JV) = p g(U, JV) + q g(U, V)` as a matrix identity
    pub eq5: bool,
    /// the same identity on random exact vector pairs
    pub eq5_samples: usize,
    pub eq5_sample_failures: usize,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.eq3 && self.eq4 && self.eq5 && self.eq5_sample_failures == 0
    }
}

fn random_exact_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<QuadNum> {
    (0..dim)
        .map(|_| QuadNum::rational(rat(rng.gen_range(-16..=16), rng.gen_range(1..=16))))
        .collect()
}

/// Checks the compatibility equations for an arbitrary exact matrix (not
/// necessarily a validated structure) on `space`.
pub fn check_metallic_compat(
    space: &SemiEuclideanSpace,
    p: i64,
    q: i64,
    j: &Mat<QuadNum>,
    samples: usize,
    seed: u64,
) -> Result<CompatReport> {
    if j.rows() != space.dim() || j.cols() != space.dim() {
        return Err(MlhError::Domain("tensor and space dimensions differ".into()));
    }
    let pq = QuadNum::from_int(p);
    let qq = QuadNum::from_int(q);
    let n = space.dim();
    let eq3 = {
        let j2 = j.mul(j)?;
        j2.sub(&j.scale(&pq))
            .sub(&Mat::identity(n).scale(&qq))
            .all_within(0.0)
    };
    let g = space.metric_matrix::<QuadNum>();
    let gj = g.mul(j)?;
    let eq4 = gj.is_symmetric_within(0.0);
    let eq5 = {
        let lhs = j.transpose().mul(&gj)?;
        let rhs = gj.scale(&pq).add(&g.scale(&qq));
        lhs.sub(&rhs).all_within(0.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..samples {
        let u = random_exact_vector(&mut rng, n);
        let v = random_exact_vector(&mut rng, n);
        let ju = j.mul_vec(&u);
        let jv = j.mul_vec(&v);
        let r = space.g(&ju, &jv) - pq.clone() * space.g(&u, &jv) - qq.clone() * space.g(&u, &v);
        if !r.is_zero() {
            failures += 1;
        }
    }
    Ok(CompatReport {
        eq3,
        eq4,
        eq5,
        eq5_samples: samples,
        eq5_sample_failures: failures,
    })
}
