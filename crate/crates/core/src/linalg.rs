//! Dense linear algebra over any [`Scalar`].
//!
//! Elimination uses partial pivoting by magnitude. A pivot is rejected when
//! it is negligible relative to the largest entry of the input: exactly zero
//! for exact backends, below `rel · max|aᵢⱼ|` for floats.

use crate::error::{MlhError, Result};
use crate::scalar::{vec_ops, Scalar};

/// Relative threshold for float rank decisions.
pub const RANK_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_diag(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MlhError::Domain("ragged matrix rows".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<S>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return Err(MlhError::Domain("ragged matrix columns".into()));
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat<S>) -> Result<Mat<S>> {
        if self.cols != other.rows {
            return Err(MlhError::Domain(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = S::zero();
                for k in 0..self.cols {
                    acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (j, x) in v.iter().enumerate().take(self.cols) {
                    acc = acc + self[(i, j)].clone() * x.clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat<S>) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: vec_ops::add(&self.data, &other.data),
        }
    }

    pub fn sub(&self, other: &Mat<S>) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: vec_ops::sub(&self.data, &other.data),
        }
    }

    pub fn scale(&self, s: &S) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: vec_ops::scale(s, &self.data),
        }
    }

    pub fn max_abs(&self) -> f64 {
        vec_ops::max_abs(&self.data)
    }

    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..i).all(|j| (self[(i, j)].clone() - self[(j, i)].clone()).within(tol))
            })
    }

    pub fn all_within(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.within(tol))
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form and the pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon<S> {
    pub reduced: Mat<S>,
    pub pivots: Vec<usize>,
}

pub fn rref<S: Scalar>(m: &Mat<S>, rel: f64) -> Echelon<S> {
    let scale = m.max_abs();
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let best = (r..a.rows)
            .max_by(|&i, &k| {
                a[(i, c)]
                    .magnitude()
                    .partial_cmp(&a[(k, c)].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // prefer the earliest row among equals
                    .then(k.cmp(&i))
            })
            .expect("non-empty range");
        if a[(best, c)].is_negligible(scale, rel) {
            continue;
        }
        if best != r {
            for j in 0..a.cols {
                a.data.swap(best * a.cols + j, r * a.cols + j);
            }
        }
        let inv = S::one() / a[(r, c)].clone();
        for j in 0..a.cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..a.rows {
            if i == r || a[(i, c)].is_zero() && S::is_exact() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..a.cols {
                a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
            }
        }
        pivots.push(c);
        r += 1;
    }
    Echelon { reduced: a, pivots }
}

pub fn rank<S: Scalar>(m: &Mat<S>, rel: f64) -> usize {
    rref(m, rel).pivots.len()
}

/// Basis of the right nullspace; each vector has a 1 in its free column.
pub fn nullspace<S: Scalar>(m: &Mat<S>, rel: f64) -> Vec<Vec<S>> {
    let ech = rref(m, rel);
    let free: Vec<usize> = (0..m.cols).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); m.cols];
            v[f] = S::one();
            for (r, &pc) in ech.pivots.iter().enumerate() {
                v[pc] = -ech.reduced[(r, f)].clone();
            }
            v
        })
        .collect()
}

/// Free columns of the nullspace returned by [`nullspace`], in order.
pub fn free_columns<S: Scalar>(m: &Mat<S>, rel: f64) -> Vec<usize> {
    let ech = rref(m, rel);
    (0..m.cols).filter(|c| !ech.pivots.contains(c)).collect()
}

/// Solves a square system; errors on singular input.
pub fn solve<S: Scalar>(m: &Mat<S>, b: &[S], rel: f64) -> Result<Vec<S>> {
    if m.rows != m.cols || b.len() != m.rows {
        return Err(MlhError::Domain("solve needs a square system".into()));
    }
    let coeffs = solve_in_span(&m.to_cols(), b, rel)?;
    if rank(m, rel) < m.cols {
        return Err(MlhError::Arithmetic("singular system".into()));
    }
    Ok(coeffs)
}

impl<S: Scalar> Mat<S> {
    pub fn to_cols(&self) -> Vec<Vec<S>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }
}

/// Coefficients `c` with `Σ cⱼ vⱼ = target`, the vectors assumed
/// independent. Errors when `target` is not in their span.
pub fn solve_in_span<S: Scalar>(vectors: &[Vec<S>], target: &[S], rel: f64) -> Result<Vec<S>> {
    let k = vectors.len();
    let mut cols = vectors.to_vec();
    cols.push(target.to_vec());
    let aug = Mat::from_cols(&cols)?;
    let ech = rref(&aug, rel);
    if ech.pivots.contains(&k) {
        return Err(MlhError::Domain("vector is not in the span".into()));
    }
    let mut c = vec![S::zero(); k];
    for (r, &pc) in ech.pivots.iter().enumerate() {
        c[pc] = ech.reduced[(r, k)].clone();
    }
    Ok(c)
}

/// Determinant by elimination.
pub fn det<S: Scalar>(m: &Mat<S>) -> Result<S> {
    if m.rows != m.cols {
        return Err(MlhError::Domain("determinant of a non-square matrix".into()));
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut d = S::one();
    for c in 0..n {
        let best = (c..n).max_by(|&i, &k| {
            a[(i, c)]
                .magnitude()
                .partial_cmp(&a[(k, c)].magnitude())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(k.cmp(&i))
        });
        let Some(best) = best else { break };
        if a[(best, c)].is_zero() {
            return Ok(S::zero());
        }
        if best != c {
            for j in 0..n {
                a.data.swap(best * n + j, c * n + j);
            }
            d = -d;
        }
        let piv = a[(c, c)].clone();
        d = d * piv.clone();
        for i in c + 1..n {
            let f = a[(i, c)].clone() / piv.clone();
            for j in c..n {
                a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(c, j)].clone();
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, QuadNum};

    fn qm(rows: &[&[i64]]) -> Mat<QuadNum> {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| QuadNum::from_int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_nullspace_of_rank_deficient_matrix() {
        let m = qm(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let ns = nullspace(&m, RANK_REL_TOL);
        assert_eq!(ns.len(), 1);
        let prod = m.mul_vec(&ns[0]);
        assert!(prod.iter().all(|x| x.is_zero()));
        assert_eq!(rank(&m, RANK_REL_TOL), 2);
    }

    #[test]
    fn float_rank_uses_relative_threshold() {
        let m = Mat::from_rows(vec![vec![1e6, 2e6], vec![1.0, 2.0 + 1e-12]]).unwrap();
        assert_eq!(rank(&m, RANK_REL_TOL), 1);
    }

    #[test]
    fn solve_and_det() {
        let m = qm(&[&[2, 1], &[1, 3]]);
        let x = solve(&m, &[QuadNum::from_int(3), QuadNum::from_int(5)], RANK_REL_TOL).unwrap();
        assert_eq!(x, vec![QuadNum::rational(rat(4, 5)), QuadNum::rational(rat(7, 5))]);
        assert_eq!(det(&m).unwrap(), QuadNum::from_int(5));
        let sing = qm(&[&[1, 2], &[2, 4]]);
        assert!(solve(&sing, &[QuadNum::from_int(1), QuadNum::from_int(0)], RANK_REL_TOL).is_err());
    }

    #[test]
    fn span_membership() {
        let v = vec![
            vec![QuadNum::from_int(1), QuadNum::from_int(0), QuadNum::from_int(1)],
            vec![QuadNum::from_int(0), QuadNum::from_int(1), QuadNum::from_int(1)],
        ];
        let t = vec![QuadNum::from_int(2), QuadNum::from_int(3), QuadNum::from_int(5)];
        let c = solve_in_span(&v, &t, RANK_REL_TOL).unwrap();
        assert_eq!(c, vec![QuadNum::from_int(2), QuadNum::from_int(3)]);
        let bad = vec![QuadNum::from_int(2), QuadNum::from_int(3), QuadNum::from_int(4)];
        assert!(solve_in_span(&v, &bad, RANK_REL_TOL).is_err());
    }
}
