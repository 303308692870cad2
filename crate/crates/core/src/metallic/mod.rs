//! Induced metallic apparatus on a lightlike hypersurface.
//!
//! For tangent `X`: `J̃X = φX + u(X)N` with `u(X) = g(X, J̃E)`, and
//! `J̃N = ξ + v(E)N` with `v(E) = g(J̃N, E)`. The fields `ψ = J̃E` and
//! `ζ = J̃N` drive the screen semi-invariant decomposition
//! `S = μ₀ ⊥ span{ψ, ζ}`.

mod identities;

pub use identities::{
    evaluate_sample, finalize, fit_factor, registry, test_fields, Backend, IdentityReport, IdentitySpec,
    Partial, Requirement, Status, VariantReport,
};

use serde::{Deserialize, Serialize};

use crate::ambient::{MetallicStructure, SemiEuclideanSpace};
use crate::error::{MlhError, Result};
use crate::induced::{value, Field, Jet};
use crate::linalg::{self, Mat, RANK_REL_TOL};
use crate::scalar::{vec_ops as vo, Dual, Scalar};

/// Position of `J̃` relative to the radical and transversal lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Invariant,
    ScreenSemiInvariant,
    Generic,
}

fn in_line<T: Scalar>(line: &[T], x: &[T]) -> bool {
    let m = Mat::from_cols(&[line.to_vec(), x.to_vec()]).expect("equal lengths");
    linalg::rank(&m, RANK_REL_TOL) <= 1
}

fn in_span<T: Scalar>(basis: &[Vec<T>], x: &[T]) -> bool {
    if basis.is_empty() {
        return x.iter().all(|v| v.is_negligible(1.0, RANK_REL_TOL));
    }
    linalg::solve_in_span(basis, x, RANK_REL_TOL).is_ok()
}

/// Classification from frame vectors at one point.
pub fn classify_vectors<T: Scalar>(
    j: &MetallicStructure,
    e: &[T],
    n: &[T],
    screen: &[Vec<T>],
) -> Kind {
    let je = j.apply(e);
    let jn = j.apply(n);
    if in_line(e, &je) && in_line(n, &jn) {
        Kind::Invariant
    } else if !screen.is_empty() && in_span(screen, &je) && in_span(screen, &jn) {
        Kind::ScreenSemiInvariant
    } else {
        Kind::Generic
    }
}

pub fn classify<T: Scalar>(jet: &Jet<T>, j: &MetallicStructure) -> Kind {
    classify_vectors(j, jet.e(), jet.n(), jet.screen())
}

/// `J̃` together with a jet: the induced operators and their fields.
#[derive(Clone, Debug)]
pub struct MetallicJet<'a, T: Scalar> {
    pub jet: &'a Jet<T>,
    pub j: &'a MetallicStructure,
    jm: Mat<T>,
    jm_dual: Mat<Dual<T>>,
    pub p: T,
    pub q: T,
    /// `ψ = J̃E`
    pub psi: Field<T>,
    /// `ζ = J̃N`
    pub zeta: Field<T>,
    /// `v(E) = g(J̃N, E)`
    pub v_e: Dual<T>,
    /// `ξ = J̃N − v(E)N`
    pub xi: Field<T>,
    psi0: Vec<T>,
    zeta0: Vec<T>,
    xi0: Vec<T>,
}

impl<'a, T: Scalar> MetallicJet<'a, T> {
    pub fn new(jet: &'a Jet<T>, j: &'a MetallicStructure) -> Self {
        let jm: Mat<T> = j.matrix_in();
        let jm_dual: Mat<Dual<T>> = j.matrix_in();
        let psi = jm_dual.mul_vec(&jet.frame.e);
        let zeta = jm_dual.mul_vec(&jet.frame.n);
        let v_e = jet.space.g(&zeta, &jet.frame.e);
        let xi = vo::axpy(&zeta, &(-v_e.clone()), &jet.frame.n);
        MetallicJet {
            psi0: value(&psi),
            zeta0: value(&zeta),
            xi0: value(&xi),
            jet,
            j,
            jm,
            jm_dual,
            p: T::from_i64(j.p()),
            q: T::from_i64(j.q()),
            psi,
            zeta,
            v_e,
            xi,
        }
    }

    pub fn space(&self) -> &SemiEuclideanSpace {
        &self.jet.space
    }

    pub fn g(&self, a: &[T], b: &[T]) -> T {
        self.jet.g(a, b)
    }

    pub fn psi0(&self) -> &[T] {
        &self.psi0
    }

    pub fn zeta0(&self) -> &[T] {
        &self.zeta0
    }

    pub fn xi0(&self) -> &[T] {
        &self.xi0
    }

    pub fn v_e0(&self) -> T {
        self.v_e.value.clone()
    }

    pub fn jx(&self, x: &[T]) -> Vec<T> {
        self.jm.mul_vec(x)
    }

    pub fn j_field(&self, f: &[Dual<T>]) -> Field<T> {
        self.jm_dual.mul_vec(f)
    }

    /// `u(X) = g(X, J̃E)`
    pub fn u(&self, x: &[T]) -> T {
        self.g(x, &self.psi0)
    }

    pub fn u_field(&self, f: &[Dual<T>]) -> Dual<T> {
        self.jet.space.g(f, &self.psi)
    }

    /// `φX = J̃X − u(X)N`
    pub fn phi(&self, x: &[T]) -> Vec<T> {
        vo::axpy(&self.jx(x), &(-self.u(x)), self.jet.n())
    }

    pub fn phi_field(&self, f: &[Dual<T>]) -> Field<T> {
        let uf = self.u_field(f);
        vo::axpy(&self.j_field(f), &(-uf), &self.jet.frame.n)
    }

    /// Residuals of `J̃X − φX − u(X)N` over the tangent frame and of
    /// `J̃N − ξ − v(E)N`, as a maximum magnitude and an exact-zero flag.
    pub fn reconstruction_residual(&self) -> (f64, bool) {
        let mut worst: f64 = 0.0;
        let mut exact = true;
        let n = self.jet.n();
        for x in self.jet.tangent() {
            let r = vo::sub(
                &vo::sub(&self.jx(x), &self.phi(x)),
                &vo::scale(&self.u(x), n),
            );
            worst = worst.max(vo::max_abs(&r));
            exact &= r.iter().all(|v| v.is_zero());
        }
        let r = vo::sub(
            &vo::sub(&self.zeta0, &self.xi0),
            &vo::scale(&self.v_e0(), n),
        );
        worst = worst.max(vo::max_abs(&r));
        exact &= r.iter().all(|v| v.is_zero());
        (worst, exact)
    }

    pub fn kind(&self) -> Kind {
        classify(self.jet, self.j)
    }
}

/// Pointwise summary of the induced metallic data in the tangent frame.
#[derive(Clone, Debug)]
pub struct InducedMetallicData<T> {
    /// Column `i` holds the chart components of `φΦᵢ`.
    pub phi: Mat<T>,
    /// `u(Φᵢ)`
    pub u: Vec<T>,
    pub v_of_e: T,
    pub xi: Vec<T>,
    pub zeta: Vec<T>,
    pub psi: Vec<T>,
}

pub fn induce_metallic<T: Scalar>(mj: &MetallicJet<'_, T>) -> Result<InducedMetallicData<T>> {
    let cols = mj
        .jet
        .tangent()
        .iter()
        .map(|x| mj.jet.chart_components(&mj.phi(x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedMetallicData {
        phi: Mat::from_cols(&cols)?,
        u: mj.jet.tangent().iter().map(|x| mj.u(x)).collect(),
        v_of_e: mj.v_e0(),
        xi: mj.xi0().to_vec(),
        zeta: mj.zeta0().to_vec(),
        psi: mj.psi0().to_vec(),
    })
}

/// `D̊ = Rad ⊥ J̃(Rad) ⊥ μ₀` and `D̊′ = J̃(ltr)` as field bases.
#[derive(Clone, Debug)]
pub struct DistributionSplit<T: Scalar> {
    pub mu0: Vec<Field<T>>,
    pub d_basis: Vec<Field<T>>,
    pub dprime_basis: Vec<Field<T>>,
}

/// Projects `X` onto `μ₀` along `ψ` and `ζ` (assumes `g(ψ,ζ) = q`).
pub fn mu0_projection<T: Scalar>(mj: &MetallicJet<'_, T>, x: &[Dual<T>]) -> Field<T> {
    let sp = mj.space();
    let q = Dual::constant(mj.q.clone());
    let a = sp.g(x, &mj.zeta) / q.clone();
    let b = sp.g(x, &mj.psi) / q;
    let y = vo::axpy(x, &(-a), &mj.psi);
    vo::axpy(&y, &(-b), &mj.zeta)
}

pub fn distribution_split<T: Scalar>(mj: &MetallicJet<'_, T>) -> Result<DistributionSplit<T>> {
    if mj.kind() != Kind::ScreenSemiInvariant {
        return Err(MlhError::Precondition(
            "distribution split needs a screen semi-invariant frame".into(),
        ));
    }
    let n = mj.jet.chart_dim();
    let mut mu0: Vec<Field<T>> = Vec::new();
    let mut kept: Vec<Vec<T>> = Vec::new();
    for w in &mj.jet.frame.screen {
        let m = mu0_projection(mj, w);
        let mv = value(&m);
        let scale = vo::max_abs(&value(w)).max(1.0);
        if mv.iter().all(|x| x.is_negligible(scale, RANK_REL_TOL)) {
            continue;
        }
        let mut trial = kept.clone();
        trial.push(mv.clone());
        if linalg::rank(&Mat::from_cols(&trial)?, RANK_REL_TOL) == trial.len() {
            kept.push(mv);
            mu0.push(m);
        }
    }
    let expected = n.saturating_sub(3);
    if mu0.len() != expected {
        return Err(MlhError::InvariantViolation(format!(
            "μ₀ has dimension {}, expected {expected}",
            mu0.len()
        )));
    }
    let mut d_basis = vec![mj.jet.frame.e.clone(), mj.psi.clone()];
    d_basis.extend(mu0.iter().cloned());
    Ok(DistributionSplit {
        mu0,
        d_basis,
        dprime_basis: vec![mj.zeta.clone()],
    })
}

/// `μ₀` connection coefficients computed two ways.
#[derive(Clone, Debug)]
pub struct Alphas<T> {
    /// `(C(U,J̃V), B(U,J̃V), C(U,V))`
    pub formula: [T; 3],
    /// `(g(∇_U V, J̃N), g(∇_U V, J̃E), g(∇_U V, N))`
    pub projection: [T; 3],
}

fn check_mu0<T: Scalar>(mj: &MetallicJet<'_, T>, x: &[T]) -> Result<()> {
    let scale = vo::max_abs(x).max(1.0);
    let tests = [
        mj.g(x, mj.psi0()),
        mj.g(x, mj.zeta0()),
        mj.g(x, mj.jet.n()),
        mj.g(x, mj.jet.e()),
    ];
    if tests.iter().any(|t| !t.is_negligible(scale, 1e-8)) {
        return Err(MlhError::Domain("vector is not in μ₀".into()));
    }
    Ok(())
}

/// Coefficients of `∇_U V` along `J̃E/q`, `J̃N/q` and `E` for `U, V` in `μ₀`.
pub fn mu0_alphas<T: Scalar>(
    mj: &MetallicJet<'_, T>,
    u: &[T],
    v: &[Dual<T>],
) -> Result<Alphas<T>> {
    check_mu0(mj, u)?;
    check_mu0(mj, &value(v))?;
    let jet = mj.jet;
    let jv = mj.j_field(v);
    let nab = jet.nabla(u, v)?;
    Ok(Alphas {
        formula: [
            jet.screen_form_c(u, &jv)?,
            jet.second_form_b(u, &jv)?,
            jet.screen_form_c(u, v)?,
        ],
        projection: [
            mj.g(&nab, mj.zeta0()),
            mj.g(&nab, mj.psi0()),
            mj.g(&nab, jet.n()),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{AffineHypersurface, ChartHypersurface, Hypersurface, ScreenMode};
    use crate::scalar::{metallic_sigma, QuadNum};

    fn q(v: i64) -> QuadNum {
        QuadNum::from_int(v)
    }

    fn ssi_example() -> (SemiEuclideanSpace, Hypersurface, MetallicStructure) {
        let s = metallic_sigma(1, 1).unwrap();
        let ps = q(1) - s.clone();
        let space = SemiEuclideanSpace::new(vec![-1, 1, -1, 1, 1]).unwrap();
        let h = AffineHypersurface::new(vec![s.clone(), s.clone(), q(1), q(0), q(-1)], q(0)).unwrap();
        let j = MetallicStructure::diagonal(1, 1, &[ps.clone(), ps, s.clone(), s.clone(), s]).unwrap();
        (space, Hypersurface::Affine(h), j)
    }

    #[test]
    fn adapted_frame_is_screen_semi_invariant() {
        let (space, h, j) = ssi_example();
        let jet = Jet::automatic(&space, &h, &vec![q(0); 4], &ScreenMode::MetallicAdapted, Some(&j), None)
            .unwrap();
        let mj = MetallicJet::new(&jet, &j);
        assert_eq!(mj.kind(), Kind::ScreenSemiInvariant);
        assert!(mj.v_e0().is_zero());
        assert_eq!(mj.u(mj.zeta0()), q(1));
        assert!(mj.g(mj.psi0(), mj.zeta0()) == q(1));
        let (_, exact) = mj.reconstruction_residual();
        assert!(exact);
        let split = distribution_split(&mj).unwrap();
        assert_eq!(split.mu0.len(), 1);
    }

    #[test]
    fn canonical_frame_of_the_same_plane_is_generic() {
        let (space, h, j) = ssi_example();
        let jet = Jet::automatic(&space, &h, &vec![q(0); 4], &ScreenMode::Canonical, Some(&j), None)
            .unwrap();
        assert_eq!(classify(&jet, &j), Kind::Generic);
    }

    #[test]
    fn scalar_structure_is_invariant_with_phi_metallic() {
        let space = SemiEuclideanSpace::new(vec![-1, 1, -1, 1, 1]).unwrap();
        let h = Hypersurface::Affine(
            AffineHypersurface::new(vec![q(0), q(1), q(-1), q(0), q(0)], q(0)).unwrap(),
        );
        let j = MetallicStructure::scalar(2, 1, 5).unwrap();
        let jet = Jet::automatic(&space, &h, &vec![q(0); 4], &ScreenMode::Canonical, Some(&j), None)
            .unwrap();
        let mj = MetallicJet::new(&jet, &j);
        assert_eq!(mj.kind(), Kind::Invariant);
        let data = induce_metallic(&mj).unwrap();
        assert!(data.u.iter().all(|x| x.is_zero()));
        let phi2 = data.phi.mul(&data.phi).unwrap();
        let rhs = data
            .phi
            .scale(&q(2))
            .add(&Mat::identity(4).scale(&q(1)));
        assert_eq!(phi2, rhs);
    }

    #[test]
    fn curved_alphas_agree_between_paths() {
        // x1 + x2 = F(x3 + x4, x5 + x6) in signature (−,+,−,+,−,+,+)
        let space = SemiEuclideanSpace::new(vec![-1, 1, -1, 1, -1, 1, 1]).unwrap();
        let f = "(0.7*(u1+u2) + 0.3*(u1+u2)^2 - 0.2*(u3+u4) + 0.25*(u1+u2)*(u3+u4))";
        let comps: Vec<String> = vec![
            "u6".into(),
            format!("{f} - u6"),
            "u1".into(),
            "u2".into(),
            "u3".into(),
            "u4".into(),
            "u5".into(),
        ];
        let chart = ChartHypersurface::parse(&comps, vec![(-0.3, 0.3); 6], 1, 1).unwrap();
        let h = Hypersurface::Chart(chart);
        let s = metallic_sigma(1, 1).unwrap();
        let ps = q(1) - s.clone();
        let mut entries = vec![ps.clone(), ps];
        entries.extend(std::iter::repeat(s).take(5));
        let j = MetallicStructure::diagonal(1, 1, &entries).unwrap();
        let u = [0.1, -0.05, 0.2, 0.03, -0.1, 0.07];
        let jet = Jet::automatic(&space, &h, &u, &ScreenMode::MetallicAdapted, Some(&j), None).unwrap();
        let mj = MetallicJet::new(&jet, &j);
        assert_eq!(mj.kind(), Kind::ScreenSemiInvariant);
        let split = distribution_split(&mj).unwrap();
        assert_eq!(split.mu0.len(), 3);
        let mut seen_nonzero = false;
        for a in &split.mu0 {
            for b in &split.mu0 {
                let al = mu0_alphas(&mj, &value(a), b).unwrap();
                for k in 0..3 {
                    assert!((al.formula[k] - al.projection[k]).abs() < 1e-10);
                    seen_nonzero |= al.formula[k].abs() > 1e-4;
                }
            }
        }
        assert!(seen_nonzero);
    }
}
