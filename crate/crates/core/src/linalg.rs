//! Dense complex vectors and matrices.
//!
//! Everything here is double precision and column-major. The inner product
//! is conjugate-linear in its first argument: `inner(u, v) = Σ conj(u_i) v_i`,
//! so the component of `v` along a unit vector `w` is `inner(w, v)`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Relative norm a projected candidate must keep to count as a new direction.
pub const DEGENERATE_TOL: f64 = 1e-8;
/// Pivot floor (relative to the Frobenius norm) below which LU gives up.
pub const SINGULAR_TOL: f64 = 1e-14;
/// Fresh random draws attempted before the complement is declared exhausted.
pub const COMPLEMENT_RETRIES: usize = 8;

/// A dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector(vec![ZERO; n])
    }

    /// The `i`-th canonical basis vector of dimension `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = ONE;
        v
    }

    pub fn from_vec(entries: Vec<C64>) -> Self {
        CVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, alpha: C64) -> CVector {
        CVector(self.0.iter().map(|&z| alpha * z).collect())
    }

    pub fn scale_real(&self, alpha: f64) -> CVector {
        CVector(self.0.iter().map(|&z| z * alpha).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: C64, x: &CVector) {
        assert_eq!(self.len(), x.len(), "axpy dimension mismatch");
        for (s, &xi) in self.0.iter_mut().zip(x.0.iter()) {
            *s += alpha * xi;
        }
    }

    pub fn add(&self, other: &CVector) -> CVector {
        assert_eq!(self.len(), other.len(), "add dimension mismatch");
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        assert_eq!(self.len(), other.len(), "sub dimension mismatch");
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Unit vector in the direction of `self`. Panics on the zero vector.
    pub fn normalized(&self) -> CVector {
        let nrm = self.norm2();
        assert!(nrm > 0.0, "cannot normalize the zero vector");
        self.scale_real(1.0 / nrm)
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

/// Euclidean norm, scaled to avoid overflow and underflow.
pub fn norm2(v: &[C64]) -> f64 {
    let scale = v
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

/// `Σ conj(u_i) v_i`
pub fn inner(u: &CVector, v: &CVector) -> Result<C64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "inner product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(dot_conj(&u.0, &v.0))
}

pub(crate) fn dot_conj(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// A dense complex matrix, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Stacks equally sized vectors as columns.
    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, CVector::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} among columns of length {rows}",
                bad.len()
            )));
        }
        let data = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Ok(CMatrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_col_major(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector(self.col(j).to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Plain (non-conjugating) transpose.
    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![ZERO; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (yi, &aij) in y.iter_mut().zip(self.col(j)) {
                *yi += aij * xj;
            }
        }
        Ok(CVector(y))
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} minus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

pub fn matmul(left: &CMatrix, right: &CMatrix) -> Result<CMatrix> {
    if left.cols != right.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            left.rows, left.cols, right.rows, right.cols
        )));
    }
    let mut out = CMatrix::zeros(left.rows, right.cols);
    for j in 0..right.cols {
        for k in 0..left.cols {
            let b = right[(k, j)];
            if b == ZERO {
                continue;
            }
            let a_col = &left.data[k * left.rows..(k + 1) * left.rows];
            for (o, &a) in out.col_mut(j).iter_mut().zip(a_col) {
                *o += a * b;
            }
        }
    }
    Ok(out)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.frobenius()
}

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: CMatrix,
    perm: Vec<usize>,
    min_pivot: f64,
}

impl LuFactors {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a non-square {}x{} matrix",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let floor = SINGULAR_TOL * m.frobenius();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pivot_abs) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs <= floor || pivot_abs == 0.0 {
                return Err(Error::NumericallySingular {
                    pivot: pivot_abs,
                    column: k,
                });
            }
            min_pivot = min_pivot.min(pivot_abs);
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == ZERO {
                    continue;
                }
                for i in k + 1..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(LuFactors {
            lu,
            perm,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Smallest pivot magnitude met during elimination.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve_vec(&self, b: &CVector) -> Result<CVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for order {n}",
                b.len()
            )));
        }
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_in_place(&mut x);
        Ok(CVector(x))
    }

    pub fn solve_mat(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.dim();
        if b.rows != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side with {} rows for order {n}",
                b.rows
            )));
        }
        let mut out = CMatrix::zeros(n, b.cols);
        for j in 0..b.cols {
            let col = b.col(j);
            let mut x: Vec<C64> = self.perm.iter().map(|&p| col[p]).collect();
            self.solve_in_place(&mut x);
            out.col_mut(j).copy_from_slice(&x);
        }
        Ok(out)
    }

    fn solve_in_place(&self, x: &mut [C64]) {
        let n = self.dim();
        for j in 0..n {
            let xj = x[j];
            if xj != ZERO {
                let col = self.lu.col(j);
                for (xi, &l) in x[j + 1..].iter_mut().zip(&col[j + 1..]) {
                    *xi -= l * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = self.lu.col(j);
            x[j] /= col[j];
            let xj = x[j];
            if xj != ZERO {
                for (xi, &u) in x[..j].iter_mut().zip(&col[..j]) {
                    *xi -= u * xj;
                }
            }
        }
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve_mat(&CMatrix::identity(self.dim()))
            .expect("identity has matching dimension")
    }
}

/// Solves `M X = B` by LU with partial pivoting.
pub fn lu_solve(m: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    LuFactors::new(m)?.solve_mat(b)
}

/// Solves `M x = b` by LU with partial pivoting.
pub fn lu_solve_vec(m: &CMatrix, b: &CVector) -> Result<CVector> {
    LuFactors::new(m)?.solve_vec(b)
}

/// Projects `candidate` onto the orthogonal complement of `basis` with two
/// passes of modified Gram-Schmidt and normalizes the result.
///
/// `basis` must already be orthonormal.
pub fn mgs_project_orthonormal(candidate: &CVector, basis: &[CVector]) -> Result<CVector> {
    let n = candidate.len();
    if let Some(b) = basis.iter().find(|b| b.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "basis vector of length {} for candidate of length {n}",
            b.len()
        )));
    }
    let start = candidate.norm2();
    let mut v = candidate.clone();
    for _pass in 0..2 {
        for q in basis {
            let c = dot_conj(q.as_slice(), v.as_slice());
            v.axpy(-c, q);
        }
    }
    let nrm = v.norm2();
    if nrm.is_nan() || nrm <= DEGENERATE_TOL * start || nrm == 0.0 {
        return Err(Error::DegenerateCandidate(nrm));
    }
    Ok(v.scale_real(1.0 / nrm))
}

/// Complex vector with independent standard normal real and imaginary parts.
pub fn random_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector(
        (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
}

/// Draws a random unit vector orthogonal to the orthonormal `basis`.
pub fn random_unit_in_complement<R: Rng + ?Sized>(
    dim: usize,
    basis: &[CVector],
    rng: &mut R,
) -> Result<CVector> {
    if basis.len() >= dim {
        return Err(Error::ComplementExhausted {
            basis: basis.len(),
            dim,
        });
    }
    for _ in 0..COMPLEMENT_RETRIES {
        let candidate = random_gaussian(dim, rng);
        match mgs_project_orthonormal(&candidate, basis) {
            Ok(v) => return Ok(v),
            Err(Error::DegenerateCandidate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ComplementExhausted {
        basis: basis.len(),
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let e1 = CVector::unit(2, 0);
        assert_eq!(inner(&e1, &e1).unwrap(), ONE);
        let ie1 = e1.scaled(c(0.0, 1.0));
        assert_eq!(inner(&ie1, &e1).unwrap(), c(0.0, -1.0));
        assert_eq!(inner(&e1, &ie1).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn inner_rejects_mismatched_lengths() {
        let r = inner(&CVector::zeros(2), &CVector::zeros(3));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn frobenius_of_identity() {
        assert!((frobenius(&CMatrix::identity(3)) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matmul_shapes_and_values() {
        let a = CMatrix::from_fn(2, 3, |i, j| c((i + 2 * j) as f64, 1.0));
        let b = CMatrix::from_fn(3, 1, |i, _| c(1.0, i as f64));
        let p = matmul(&a, &b).unwrap();
        assert_eq!((p.rows(), p.cols()), (2, 1));
        for i in 0..2 {
            let expect: C64 = (0..3).map(|k| a[(i, k)] * b[(k, 0)]).sum();
            assert!((p[(i, 0)] - expect).norm() < 1e-14);
        }
        assert!(matmul(&a, &a).is_err());
    }

    #[test]
    fn lu_identity_and_diagonal() {
        let b = CVector::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5)]);
        assert_eq!(lu_solve_vec(&CMatrix::identity(2), &b).unwrap(), b);

        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = c(2.0, 0.0);
        d[(1, 1)] = c(4.0, 0.0);
        let rhs = CVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)]);
        let x = lu_solve_vec(&d, &rhs).unwrap();
        assert!((x[0] - ONE).norm() < 1e-15 && (x[1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn lu_detects_duplicated_column() {
        let m = CMatrix::from_fn(3, 3, |i, j| {
            let j = if j == 2 { 0 } else { j };
            c((i * 3 + j) as f64 + 1.0, (i as f64) - (j as f64))
        });
        assert!(matches!(
            LuFactors::new(&m),
            Err(Error::NumericallySingular { .. })
        ));
    }

    #[test]
    fn mgs_examples() {
        let e1 = CVector::unit(3, 0);
        let e2 = CVector::unit(3, 1);
        assert_eq!(
            mgs_project_orthonormal(&e2, std::slice::from_ref(&e1)).unwrap(),
            e2
        );
        let sum = e1.add(&e2);
        let out = mgs_project_orthonormal(&sum, std::slice::from_ref(&e1)).unwrap();
        assert!(out.sub(&e2).norm2() < 1e-15);
        assert!(matches!(
            mgs_project_orthonormal(&e1, std::slice::from_ref(&e1)),
            Err(Error::DegenerateCandidate(_))
        ));
    }

    #[test]
    fn random_unit_is_deterministic() {
        let a = random_unit_in_complement(3, &[], &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = random_unit_in_complement(3, &[], &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert!((a.norm2() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_unit_finds_last_direction() {
        // Complement of {e_1, e_2, e_4} in C^4 is span{e_3}.
        let basis = [
            CVector::unit(4, 0),
            CVector::unit(4, 1),
            CVector::unit(4, 3),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_unit_in_complement(4, &basis, &mut rng).unwrap();
        for b in &basis {
            assert!(inner(b, &v).unwrap().norm() <= 1e-12);
        }
        assert!((v[2].norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn random_unit_exhausted() {
        let basis: Vec<_> = (0..3).map(|i| CVector::unit(3, i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            random_unit_in_complement(3, &basis, &mut rng),
            Err(Error::ComplementExhausted { .. })
        ));
    }

    #[test]
    fn norm_is_scale_safe() {
        let v = CVector::from_vec(vec![c(3e200, 0.0), c(0.0, 4e200)]);
        assert!((v.norm2() / 5e200 - 1.0).abs() < 1e-15);
        let w = CVector::from_vec(vec![c(3e-200, 0.0), c(0.0, 4e-200)]);
        assert!((w.norm2() / 5e-200 - 1.0).abs() < 1e-15);
    }
}
