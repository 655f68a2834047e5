//! Small dense symmetric matrix routines.
//!
//! State dimensions in tracking are tiny (D <= 6 in practice), so a cyclic
//! Jacobi sweep is both accurate and fast enough; it also keeps the crate
//! generic over the scalar type without pulling in a LAPACK binding.

use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds from nested rows; returns `None` if the rows are not square.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(Self { dim, data: rows.iter().flatten().copied().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim.max(1)).take(self.dim).map(<[T]>::to_vec).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `(A + A^T) / 2`. Idempotent bit for bit.
    pub fn symmetrized(&self) -> Self {
        let mut s = Self::zeros(self.dim);
        let half = T::lit(0.5);
        for i in 0..self.dim {
            for j in 0..self.dim {
                s[(i, j)] = (self[(i, j)] + self[(j, i)]) * half;
            }
        }
        s
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn scale(&self, k: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&a| a * k).collect() }
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigendecomposition `A = V diag(values) V^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Eigenvectors stored as columns, ordered like `values`.
    pub vectors: SquareMatrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    /// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
    /// Only the upper triangle of `a` is read after symmetrization.
    pub fn new(a: &SquareMatrix<T>) -> Self {
        let n = a.dim();
        let mut m = a.symmetrized();
        let mut v = SquareMatrix::identity(n);
        let scale = m.max_abs();
        if n > 1 && scale > T::zero() {
            let tiny = T::epsilon() * T::epsilon() * scale * scale;
            for _sweep in 0..64 {
                let mut off = T::zero();
                for p in 0..n {
                    for q in (p + 1)..n {
                        off = off + m[(p, q)] * m[(p, q)];
                    }
                }
                if off <= tiny {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        let apq = m[(p, q)];
                        if apq == T::zero() {
                            continue;
                        }
                        let app = m[(p, p)];
                        let aqq = m[(q, q)];
                        let theta = (aqq - app) / (T::lit(2.0) * apq);
                        let t = theta.signum()
                            / (theta.abs() + (theta * theta + T::one()).sqrt());
                        let t = if theta == T::zero() { T::one() } else { t };
                        let c = T::one() / (t * t + T::one()).sqrt();
                        let s = t * c;
                        for k in 0..n {
                            let mkp = m[(k, p)];
                            let mkq = m[(k, q)];
                            m[(k, p)] = c * mkp - s * mkq;
                            m[(k, q)] = s * mkp + c * mkq;
                        }
                        for k in 0..n {
                            let mpk = m[(p, k)];
                            let mqk = m[(q, k)];
                            m[(p, k)] = c * mpk - s * mqk;
                            m[(q, k)] = s * mpk + c * mqk;
                        }
                        m[(p, q)] = T::zero();
                        m[(q, p)] = T::zero();
                        for k in 0..n {
                            let vkp = v[(k, p)];
                            let vkq = v[(k, q)];
                            v[(k, p)] = c * vkp - s * vkq;
                            v[(k, q)] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| m[(i, i)]).collect();
        let mut vectors = SquareMatrix::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            for k in 0..n {
                vectors[(k, dst)] = v[(k, src)];
            }
        }
        Self { values, vectors }
    }

    pub fn min_value(&self) -> Option<T> {
        self.values.first().copied()
    }

    /// `V diag(f(lambda)) V^T`, symmetrized.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> SquareMatrix<T> {
        let n = self.vectors.dim();
        let mut out = SquareMatrix::zeros(n);
        for k in 0..n {
            let fk = f(self.values[k]);
            if fk == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * self.vectors[(j, k)];
                }
            }
        }
        out.symmetrized()
    }
}

/// Principal square root of a symmetric positive semi-definite matrix.
/// Eigenvalues below zero are clamped; callers check definiteness first.
pub fn psd_sqrt<T: Scalar>(a: &SquareMatrix<T>) -> SquareMatrix<T> {
    SymmetricEigen::new(a).reconstruct_with(|l| l.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &SquareMatrix<f64>, b: &SquareMatrix<f64>, tol: f64) -> bool {
        a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let a = SquareMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let e = SymmetricEigen::new(&a);
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_reconstructs_dense_matrix() {
        let a = SquareMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, -0.2],
            vec![0.5, -0.2, 2.0],
        ])
        .unwrap();
        let e = SymmetricEigen::new(&a);
        assert!(close(&e.reconstruct_with(|l| l), &a, 1e-13));
        // V^T V = I
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert!(close(&vtv, &SquareMatrix::identity(3), 1e-13));
    }

    #[test]
    fn sqrt_squares_back() {
        let a = SquareMatrix::from_rows(&[vec![2.0, 0.7], vec![0.7, 1.0]]).unwrap();
        let s = psd_sqrt(&a);
        assert!(close(&s.matmul(&s), &a, 1e-13));
    }

    #[test]
    fn sqrt_of_singular_matrix() {
        // rank one: [1 1; 1 1] = 2 * u u^T with u = (1,1)/sqrt(2); sqrt = sqrt(2) u u^T
        let a = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = psd_sqrt(&a);
        let h = 2f64.sqrt() / 2.0;
        assert!(close(&s, &SquareMatrix::from_rows(&[vec![h, h], vec![h, h]]).unwrap(), 1e-12));
    }

    #[test]
    fn works_in_single_precision() {
        let a = SquareMatrix::from_rows(&[vec![2.0f32, 0.5], vec![0.5, 1.0]]).unwrap();
        let s = psd_sqrt(&a);
        let back = s.matmul(&s);
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-5);
        }
    }
}
