//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Gram–Schmidt with respect to the inner product `gram` (identity when `None`).
///
/// Vectors whose residual norm falls below `tol` are dropped. Returns the
/// orthonormal vectors in input order.
pub fn gram_schmidt(vectors: &[Vector], gram: Option<&Matrix>, tol: f64) -> Vec<Vector> {
    let inner = |x: &Vector, y: &Vector| match gram {
        Some(g) => x.dot(&(g * y)),
        None => x.dot(y),
    };
    let mut out: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two passes keep the result orthogonal to machine precision
        for _ in 0..2 {
            for q in &out {
                let c = inner(q, &w);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = inner(&w, &w).max(0.0).sqrt();
        if norm > tol {
            out.push(w / norm);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span` inside `ambient`.
///
/// Both inputs must already be orthonormal for the identity inner product.
pub fn complement_in(ambient: &[Vector], span: &[Vector], tol: f64) -> Vec<Vector> {
    let mut seed: Vec<Vector> = span.to_vec();
    let k = seed.len();
    seed.extend(ambient.iter().cloned());
    let all = gram_schmidt(&seed, None, tol);
    all.into_iter().skip(k).collect()
}

/// Stack column vectors into a matrix (zero columns gives `rows x 0`).
pub fn columns(rows: usize, cols: &[Vector]) -> Matrix {
    let mut m = Matrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Spectral norm via the symmetric eigenvalues of `m^T m`.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let mtm = m.transpose() * m;
    let eig = mtm.symmetric_eigenvalues();
    eig.iter().fold(0.0_f64, |a, x| a.max(*x)).max(0.0).sqrt()
}

/// Symmetric part `(m + m^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let v = vec![
            Vector::from_vec(vec![1.0, 1.0, 0.0]),
            Vector::from_vec(vec![2.0, 2.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0, 0.0]),
        ];
        let q = gram_schmidt(&v, None, 1e-12);
        assert_eq!(q.len(), 2);
        assert!(q[0].dot(&q[1]).abs() < 1e-15);
    }

    #[test]
    fn complement_has_expected_dimension() {
        let amb: Vec<Vector> = (0..4).map(|i| unit(4, i)).collect();
        let span = vec![Vector::from_vec(vec![0.6, 0.8, 0.0, 0.0])];
        let c = complement_in(&amb, &span, 1e-12);
        assert_eq!(c.len(), 3);
        for v in &c {
            assert!(v.dot(&span[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn operator_norm_of_rotation_is_one() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((operator_norm(&m) - 1.0).abs() < 1e-14);
    }
}
