//! Gauss–Weingarten calculus on a lightlike hypersurface.
//!
//! A [`Jet`] holds the lightlike frame at one chart point as dual numbers, so
//! every frame field carries its first derivatives along the chart. Vector
//! fields are ambient-valued dual vectors ([`Field`]); the flat ambient
//! connection is the directional derivative of their components.
//!
//! With the frame `(E, N, W)` at hand:
//!
//! ```text
//! B(U,V)  = g(∇̃_U V, E)          ∇_U V   = ∇̃_U V − B(U,V) N
//! τ(U)    = g(∇̃_U N, E)          A_N U   = −∇̃_U N + τ(U) N
//! C(U,X)  = g(∇̃_U X, N)          A*_E U  = −∇̃_U E − τ(U) E
//! θ(X)    = g(N, X)
//! ```
//!
//! The same quantities are also available through expansion in the ambient
//! basis `{W, E, N}`, which the tests use as an independent path.

use crate::ambient::{MetallicStructure, SemiEuclideanSpace};
use crate::error::{MlhError, Result};
use crate::hypersurface::{build_frame, FrameChoices, Hypersurface, LightlikeFrame, ScreenMode};
use crate::linalg::{self, Mat, RANK_REL_TOL};
use crate::scalar::{vec_ops as vo, Dual, Scalar};

/// Ambient-valued vector field known to first order at a point.
pub type Field<T> = Vec<Dual<T>>;

/// Constant field with the given value.
pub fn constant_field<T: Scalar>(v: &[T]) -> Field<T> {
    v.iter().cloned().map(Dual::constant).collect()
}

pub fn value<T: Scalar>(f: &[Dual<T>]) -> Vec<T> {
    f.iter().map(|x| x.value.clone()).collect()
}

/// Lightlike frame at one chart point with first derivatives.
#[derive(Clone, Debug)]
pub struct Jet<T: Scalar> {
    pub space: SemiEuclideanSpace,
    pub u: Vec<T>,
    pub frame: LightlikeFrame<Dual<T>>,
    pub choices: FrameChoices,
    tangent: Vec<Vec<T>>,
    e: Vec<T>,
    n: Vec<T>,
    screen: Vec<Vec<T>>,
}

/// How the derivatives in a jet were obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Differentiation {
    /// Forward-mode dual numbers.
    Automatic,
    /// Central differences with the given step.
    FiniteDifference(f64),
}

impl<T: Scalar> Jet<T> {
    fn from_frame(
        space: &SemiEuclideanSpace,
        u: Vec<T>,
        frame: LightlikeFrame<Dual<T>>,
        choices: FrameChoices,
    ) -> Self {
        Jet {
            space: space.clone(),
            tangent: frame.tangent.iter().map(|v| value(v)).collect(),
            e: value(&frame.e),
            n: value(&frame.n),
            screen: frame.screen.iter().map(|v| value(v)).collect(),
            u,
            frame,
            choices,
        }
    }

    /// Frame at `u` with derivatives from dual numbers.
    pub fn automatic(
        space: &SemiEuclideanSpace,
        h: &Hypersurface,
        u: &[T],
        mode: &ScreenMode,
        j: Option<&MetallicStructure>,
        choices: Option<&FrameChoices>,
    ) -> Result<Self> {
        let n = u.len();
        let seeded: Vec<Dual<T>> = u
            .iter()
            .enumerate()
            .map(|(i, x)| Dual::variable(x.clone(), i, n))
            .collect();
        let (frame, choices) = build_frame(space, h, &seeded, mode, j, choices)?;
        Ok(Self::from_frame(space, u.to_vec(), frame, choices))
    }

    pub fn chart_dim(&self) -> usize {
        self.tangent.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.e.len()
    }

    pub fn g(&self, a: &[T], b: &[T]) -> T {
        self.space.g(a, b)
    }

    pub fn tangent(&self) -> &[Vec<T>] {
        &self.tangent
    }

    pub fn e(&self) -> &[T] {
        &self.e
    }

    pub fn n(&self) -> &[T] {
        &self.n
    }

    pub fn screen(&self) -> &[Vec<T>] {
        &self.screen
    }

    /// Chart components of a tangent vector.
    pub fn chart_components(&self, x: &[T]) -> Result<Vec<T>> {
        linalg::solve_in_span(&self.tangent, x, RANK_REL_TOL)
            .map_err(|_| MlhError::Domain("vector is not tangent to the hypersurface".into()))
    }

    /// Chart components of a tangent field, with their derivatives.
    pub fn chart_components_field(&self, x: &[Dual<T>]) -> Result<Vec<Dual<T>>> {
        linalg::solve_in_span(&self.frame.tangent, x, RANK_REL_TOL)
            .map_err(|_| MlhError::Domain("field is not tangent to the hypersurface".into()))
    }

    /// `U(f)` for a tangent vector `U` and a scalar function `f`.
    pub fn directional(&self, u: &[T], f: &Dual<T>) -> Result<T> {
        let dir = self.chart_components(u)?;
        Ok(f.directional(&dir))
    }

    /// Flat ambient derivative `∇̃_U V`.
    pub fn ambient_derivative(&self, u: &[T], v: &[Dual<T>]) -> Result<Vec<T>> {
        let dir = self.chart_components(u)?;
        Ok(v.iter().map(|x| x.directional(&dir)).collect())
    }

    /// `W = T + βN` with `T` tangent and `β = g(W,E)`.
    pub fn gauss_split(&self, w: &[T]) -> (Vec<T>, T) {
        let beta = self.g(w, &self.e);
        (vo::axpy(w, &(-beta.clone()), &self.n), beta)
    }

    /// `T = P(T) + κE` with `P(T)` in the screen and `κ = g(T,N)`.
    pub fn screen_split(&self, t: &[T]) -> (Vec<T>, T) {
        let k = self.g(t, &self.n);
        (vo::axpy(t, &(-k.clone()), &self.e), k)
    }

    pub fn theta(&self, x: &[T]) -> T {
        self.g(&self.n, x)
    }

    pub fn second_form_b(&self, u: &[T], v: &[Dual<T>]) -> Result<T> {
        Ok(self.g(&self.ambient_derivative(u, v)?, &self.e))
    }

    /// Induced connection `∇_U V`, the tangent part of `∇̃_U V`.
    pub fn nabla(&self, u: &[T], v: &[Dual<T>]) -> Result<Vec<T>> {
        let d = self.ambient_derivative(u, v)?;
        Ok(self.gauss_split(&d).0)
    }

    pub fn tau(&self, u: &[T]) -> Result<T> {
        Ok(self.g(&self.ambient_derivative(u, &self.frame.n)?, &self.e))
    }

    /// `(A_N U, τ(U))`.
    pub fn weingarten_n(&self, u: &[T]) -> Result<(Vec<T>, T)> {
        let d = self.ambient_derivative(u, &self.frame.n)?;
        let tau = self.g(&d, &self.e);
        Ok((vo::axpy(&vo::neg(&d), &tau, &self.n), tau))
    }

    /// `A*_E U`.
    pub fn weingarten_e(&self, u: &[T]) -> Result<Vec<T>> {
        let tau = self.tau(u)?;
        let d = self.ambient_derivative(u, &self.frame.e)?;
        Ok(vo::axpy(&vo::neg(&d), &(-tau), &self.e))
    }

    /// `C(U, X) = g(∇̃_U X, N)` for a screen-valued field `X`.
    pub fn screen_form_c(&self, u: &[T], x: &[Dual<T>]) -> Result<T> {
        Ok(self.g(&self.ambient_derivative(u, x)?, &self.n))
    }

    /// `U(g(V,Z)) − g(∇_U V, Z) − g(V, ∇_U Z) − B(U,Z)θ(V) − B(U,V)θ(Z)`.
    pub fn induced_metric_nonparallel(
        &self,
        u: &[T],
        v: &[Dual<T>],
        z: &[Dual<T>],
    ) -> Result<T> {
        let gvz = self.space.g(v, z);
        let (vv, zv) = (value(v), value(z));
        let lhs = self.directional(u, &gvz)?;
        let t1 = self.g(&self.nabla(u, v)?, &zv);
        let t2 = self.g(&vv, &self.nabla(u, z)?);
        let t3 = self.second_form_b(u, z)? * self.theta(&vv);
        let t4 = self.second_form_b(u, v)? * self.theta(&zv);
        Ok(lhs - t1 - t2 - t3 - t4)
    }

    /// Lie bracket of two tangent fields from their chart components.
    pub fn lie_bracket(&self, u: &[Dual<T>], v: &[Dual<T>]) -> Result<Vec<T>> {
        let cu = self.chart_components_field(u)?;
        let cv = self.chart_components_field(v)?;
        let cu0 = value(&cu);
        let cv0 = value(&cv);
        let comps: Vec<T> = (0..self.chart_dim())
            .map(|k| cv[k].directional(&cu0) - cu[k].directional(&cv0))
            .collect();
        Ok(vo::combo(&comps, &self.tangent, self.ambient_dim()))
    }

    /// `∇̃_U V − ∇̃_V U`, equal to the bracket for a torsion-free connection.
    pub fn torsion_free_bracket(&self, u: &[Dual<T>], v: &[Dual<T>]) -> Result<Vec<T>> {
        let a = self.ambient_derivative(&value(u), v)?;
        let b = self.ambient_derivative(&value(v), u)?;
        Ok(vo::sub(&a, &b))
    }

    /// Coefficients of `w` in the ambient basis `(W₁, …, W_{n−1}, E, N)`.
    pub fn expand(&self, w: &[T]) -> Result<Vec<T>> {
        let mut basis = self.screen.clone();
        basis.push(self.e.clone());
        basis.push(self.n.clone());
        linalg::solve(&Mat::from_cols(&basis)?, w, RANK_REL_TOL)
    }

    /// Reassemble the screen part of an expansion.
    fn screen_part(&self, coeffs: &[T]) -> Vec<T> {
        vo::combo(&coeffs[..self.screen.len()], &self.screen, self.ambient_dim())
    }

    /// Gauss–Weingarten data recovered purely by basis expansion.
    pub fn expansion(&self, u: &[T]) -> Result<ExpansionForms<T>> {
        let m = self.screen.len();
        let dn = self.expand(&self.ambient_derivative(u, &self.frame.n)?)?;
        let de = self.expand(&self.ambient_derivative(u, &self.frame.e)?)?;
        let tau = dn[m + 1].clone();
        // ∇̃_U N = −A_N U + τN ; A_N U is tangent, so its parts are W and E
        let mut a_n = vo::neg(&self.screen_part(&dn));
        a_n = vo::axpy(&a_n, &(-dn[m].clone()), &self.e);
        // ∇̃_U E = −A*_E U − τE (+ B(U,E)N, which vanishes)
        let a_e = vo::neg(&self.screen_part(&de));
        Ok(ExpansionForms {
            tau,
            a_n,
            a_e_star: a_e,
            e_tau: -de[m].clone(),
            b_of_e: de[m + 1].clone(),
        })
    }

    /// `B(U,V)` as the `N`-coefficient of `∇̃_U V`.
    pub fn expansion_b(&self, u: &[T], v: &[Dual<T>]) -> Result<T> {
        let c = self.expand(&self.ambient_derivative(u, v)?)?;
        Ok(c[self.screen.len() + 1].clone())
    }

    /// `C(U,X)` as the `E`-coefficient of `∇_U X`.
    pub fn expansion_c(&self, u: &[T], x: &[Dual<T>]) -> Result<T> {
        let c = self.expand(&self.ambient_derivative(u, x)?)?;
        Ok(c[self.screen.len()].clone())
    }
}

/// Forms obtained from basis expansion; `e_tau` should equal `tau` and
/// `b_of_e` should vanish.
#[derive(Clone, Debug)]
pub struct ExpansionForms<T> {
    pub tau: T,
    pub a_n: Vec<T>,
    pub a_e_star: Vec<T>,
    pub e_tau: T,
    pub b_of_e: T,
}

impl Jet<f64> {
    /// Frame at `u` with derivatives from central differences; the discrete
    /// frame choices are pinned to those at `u`.
    pub fn finite_difference(
        space: &SemiEuclideanSpace,
        h: &Hypersurface,
        u: &[f64],
        step: f64,
        mode: &ScreenMode,
        j: Option<&MetallicStructure>,
        choices: Option<&FrameChoices>,
    ) -> Result<Self> {
        let (center, choices) = build_frame(space, h, u, mode, j, choices)?;
        let n = u.len();
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        for i in 0..n {
            let mut up = u.to_vec();
            up[i] += step;
            let mut um = u.to_vec();
            um[i] -= step;
            plus.push(build_frame(space, h, &up, mode, j, Some(&choices))?.0);
            minus.push(build_frame(space, h, &um, mode, j, Some(&choices))?.0);
        }
        let assemble = |get: &dyn Fn(&LightlikeFrame<f64>) -> Vec<f64>| -> Vec<Dual<f64>> {
            let c = get(&center);
            (0..c.len())
                .map(|a| {
                    let partials = (0..n)
                        .map(|i| (get(&plus[i])[a] - get(&minus[i])[a]) / (2.0 * step))
                        .collect();
                    Dual::new(c[a], partials)
                })
                .collect()
        };
        let frame = LightlikeFrame {
            tangent: (0..n)
                .map(|k| assemble(&|f: &LightlikeFrame<f64>| f.tangent[k].clone()))
                .collect(),
            e: assemble(&|f| f.e.clone()),
            n: assemble(&|f| f.n.clone()),
            screen: (0..center.screen.len())
                .map(|k| assemble(&|f: &LightlikeFrame<f64>| f.screen[k].clone()))
                .collect(),
            e_coeffs: assemble(&|f| f.e_coeffs.clone()),
        };
        Ok(Self::from_frame(space, u.to_vec(), frame, choices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{AffineHypersurface, ChartHypersurface};
    use crate::scalar::QuadNum;

    fn cone() -> (SemiEuclideanSpace, Hypersurface) {
        let space = SemiEuclideanSpace::new(vec![-1, 1, 1, 1]).unwrap();
        let comps: Vec<String> = [
            "u1*(1 + u2^2 + u3^2)",
            "2*u1*u2",
            "2*u1*u3",
            "u1*(1 - u2^2 - u3^2)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let chart =
            ChartHypersurface::parse(&comps, vec![(0.5, 1.5), (-0.5, 0.5), (-0.5, 0.5)], 1, 1)
                .unwrap();
        (space, Hypersurface::Chart(chart))
    }

    #[test]
    fn position_field_differentiates_to_the_direction() {
        let (space, h) = cone();
        let u = [1.2, 0.1, -0.2];
        let jet = Jet::automatic(&space, &h, &u, &ScreenMode::Canonical, None, None).unwrap();
        let seeded: Vec<Dual<f64>> = u
            .iter()
            .enumerate()
            .map(|(i, x)| Dual::variable(*x, i, 3))
            .collect();
        let pos = h.position(&seeded);
        for phi in jet.tangent() {
            let d = jet.ambient_derivative(phi, &pos).unwrap();
            assert!(vo::max_abs(&vo::sub(&d, phi)) < 1e-12);
        }
    }

    #[test]
    fn weingarten_relations_on_the_cone() {
        let (space, h) = cone();
        let jet =
            Jet::automatic(&space, &h, &[0.9, -0.3, 0.25], &ScreenMode::Canonical, None, None)
                .unwrap();
        let e = jet.e().to_vec();
        // B(U,E) = 0 and A*_E E = 0
        for phi in jet.tangent() {
            assert!(jet.second_form_b(phi, &jet.frame.e).unwrap().abs() < 1e-12);
            let (an, _) = jet.weingarten_n(phi).unwrap();
            assert!(jet.g(&an, jet.n()).abs() < 1e-12);
            let ae = jet.weingarten_e(phi).unwrap();
            assert!(jet.g(&ae, jet.n()).abs() < 1e-12);
        }
        assert!(vo::max_abs(&jet.weingarten_e(&e).unwrap()) < 1e-12);
        // the cone is not totally geodesic
        let w = jet.frame.screen[0].clone();
        let b = jet.second_form_b(&value(&w), &w).unwrap();
        assert!(b.abs() > 1e-3);
    }

    #[test]
    fn affine_data_is_flat_exactly() {
        let space = SemiEuclideanSpace::new(vec![-1, 1, 1]).unwrap();
        let q = QuadNum::from_int;
        let h = Hypersurface::Affine(AffineHypersurface::new(vec![q(1), q(1), q(0)], q(0)).unwrap());
        let jet = Jet::automatic(&space, &h, &[q(0), q(3)], &ScreenMode::Canonical, None, None)
            .unwrap();
        for phi in jet.tangent() {
            assert!(jet.tau(phi).unwrap().is_zero());
            assert!(jet.weingarten_e(phi).unwrap().iter().all(|x| x.is_zero()));
        }
        let (t, beta) = jet.gauss_split(jet.n());
        assert!(t.iter().all(|x| x.is_zero()));
        assert_eq!(beta, q(1));
    }

    #[test]
    fn finite_difference_jet_tracks_automatic_jet() {
        let (space, h) = cone();
        let u = [1.0, 0.2, 0.1];
        let ad = Jet::automatic(&space, &h, &u, &ScreenMode::Canonical, None, None).unwrap();
        let fd = Jet::finite_difference(
            &space,
            &h,
            &u,
            1e-5,
            &ScreenMode::Canonical,
            None,
            Some(&ad.choices),
        )
        .unwrap();
        for phi in ad.tangent() {
            let (a1, t1) = ad.weingarten_n(phi).unwrap();
            let (a2, t2) = fd.weingarten_n(phi).unwrap();
            assert!((t1 - t2).abs() < 1e-7);
            assert!(vo::max_abs(&vo::sub(&a1, &a2)) < 1e-7);
        }
    }
}
