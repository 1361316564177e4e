//! Matrix Lie algebras given by an explicit basis.
//!
//! Every element is stored as its coordinate vector in the model basis. The
//! bracket is the matrix commutator, pulled back through a precomputed
//! least-squares solver onto that basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::models::ModelId;

/// Tolerance for purely algebraic identities.
pub const TAU_ALG: f64 = 1e-10;

/// A real semisimple Lie algebra realized by real matrices.
#[derive(Debug, Clone)]
pub struct LieModel {
    id: ModelId,
    basis: Vec<Matrix>,
    solver: Matrix,
    structure: Vec<f64>,
    killing: Matrix,
    theta: Matrix,
    a_seed: Vec<Vector>,
    trace_scale: f64,
}

impl LieModel {
    /// Build a model from a basis of matrices, seed matrices spanning a
    /// maximal abelian subspace of `p`, and the constant `c` such that the
    /// Killing form equals `c * trace(X Y)` in this realization.
    ///
    /// The Cartan involution is `X -> -X^T`, which covers every shipped model
    /// (for complex realizations the real embedding turns `-X^*` into `-X^T`).
    pub fn from_matrices(id: ModelId, basis: Vec<Matrix>, a_seed: Vec<Matrix>, trace_scale: f64) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::Model("empty basis".into()));
        }
        let n = basis[0].nrows();
        let mut flat = Matrix::zeros(n * n, d);
        for (j, b) in basis.iter().enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::Model("basis matrices must share a square shape".into()));
            }
            flat.set_column(j, &Vector::from_iterator(n * n, b.iter().copied()));
        }
        let gram = flat.transpose() * &flat;
        let gram_inv =
            gram.try_inverse().ok_or_else(|| Error::Model("basis matrices are linearly dependent".into()))?;
        let solver = gram_inv * flat.transpose();

        let mut model = LieModel {
            id,
            basis,
            solver,
            structure: vec![0.0; d * d * d],
            killing: Matrix::zeros(d, d),
            theta: Matrix::zeros(d, d),
            a_seed: Vec::new(),
            trace_scale,
        };

        for i in 0..d {
            for j in 0..d {
                let c = &model.basis[i] * &model.basis[j] - &model.basis[j] * &model.basis[i];
                let coords = model.coords_of(&c)?;
                for k in 0..d {
                    model.structure[(i * d + j) * d + k] = coords[k];
                }
            }
        }
        for i in 0..d {
            let t = -model.basis[i].transpose();
            let coords = model.coords_of(&t)?;
            model.theta.set_column(i, &coords);
        }
        let ads: Vec<Matrix> = (0..d).map(|i| model.ad_basis(i)).collect();
        for i in 0..d {
            for j in 0..=i {
                let b = (&ads[i] * &ads[j]).trace();
                model.killing[(i, j)] = b;
                model.killing[(j, i)] = b;
            }
        }
        model.a_seed = a_seed.iter().map(|m| model.coords_of(m)).collect::<Result<Vec<_>>>()?;
        Ok(model)
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn killing(&self) -> &Matrix {
        &self.killing
    }

    pub fn theta(&self) -> &Matrix {
        &self.theta
    }

    pub fn a_seed(&self) -> &[Vector] {
        &self.a_seed
    }

    pub fn trace_scale(&self) -> f64 {
        self.trace_scale
    }

    /// Coordinates of a matrix in the model basis; fails if it is not in the span.
    pub fn coords_of(&self, m: &Matrix) -> Result<Vector> {
        let n = self.basis[0].nrows();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
        }
        let flat = Vector::from_iterator(n * n, m.iter().copied());
        let coords = &self.solver * &flat;
        let back = self.matrix_of(&coords);
        let resid = (&back - m).amax();
        let scale = m.amax().max(1.0);
        if resid > 1e-9 * scale {
            return Err(Error::Model(format!("matrix is not in the span of the basis (residual {resid:.3e})")));
        }
        Ok(coords)
    }

    pub fn matrix_of(&self, x: &Vector) -> Matrix {
        let n = self.basis[0].nrows();
        let mut m = DMatrix::zeros(n, n);
        for (c, b) in x.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    /// Structure constant `c^k_{ij}` with `[e_i, e_j] = sum_k c^k_{ij} e_k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `[X, Y]` by contraction with the structure constants.
    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let d = self.dim();
        let mut out = Vector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += xy * self.structure[base + k];
                }
            }
        }
        Ok(out)
    }

    fn ad_basis(&self, i: usize) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                m[(k, j)] = self.structure[(i * d + j) * d + k];
            }
        }
        m
    }

    /// Matrix of `ad(X)` acting on coordinate vectors.
    pub fn ad(&self, x: &Vector) -> Result<Matrix> {
        self.check_dim(x)?;
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            if x[i] != 0.0 {
                m += self.ad_basis(i) * x[i];
            }
        }
        Ok(m)
    }

    pub fn killing_form(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.killing * y))
    }

    pub fn apply_theta(&self, x: &Vector) -> Vector {
        &self.theta * x
    }

    /// Positive definite form `B_theta(X, Y) = -B(X, theta Y)`.
    pub fn b_theta(&self) -> Matrix {
        let m = -(&self.killing * &self.theta);
        crate::linalg::symmetrize(&m)
    }

    /// Largest violation of the Jacobi identity over all basis triples.
    pub fn jacobi_deviation(&self) -> f64 {
        let d = self.dim();
        let e: Vec<Vector> = (0..d).map(|i| crate::linalg::unit(d, i)).collect();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let ij = self.bracket(&e[i], &e[j]).expect("basis");
                for k in (j + 1)..d {
                    let jk = self.bracket(&e[j], &e[k]).expect("basis");
                    let ki = self.bracket(&e[k], &e[i]).expect("basis");
                    let s = self.bracket(&ij, &e[k]).expect("basis")
                        + self.bracket(&jk, &e[i]).expect("basis")
                        + self.bracket(&ki, &e[j]).expect("basis");
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// Deviation between the Killing form and `c * trace(XY)` of the realization.
    pub fn trace_form_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let t = self.trace_scale * (&self.basis[i] * &self.basis[j]).trace();
                worst = worst.max((t - self.killing[(i, j)]).abs());
            }
        }
        worst
    }

    /// Deviation of `theta` from being an involutive automorphism.
    pub fn theta_deviation(&self) -> f64 {
        let d = self.dim();
        let sq = &self.theta * &self.theta - Matrix::identity(d, d);
        let mut worst = sq.amax();
        let e: Vec<Vector> = (0..d).map(|i| crate::linalg::unit(d, i)).collect();
        for i in 0..d {
            for j in 0..d {
                let lhs = self.apply_theta(&self.bracket(&e[i], &e[j]).expect("basis"));
                let rhs = self.bracket(&self.apply_theta(&e[i]), &self.apply_theta(&e[j])).expect("basis");
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    /// Orthonormal bases of `k = Fix(theta)` and `p = Fix(-theta)` for `B_theta`.
    pub fn cartan_split(&self) -> (Vec<Vector>, Vec<Vector>) {
        let d = self.dim();
        let bt = self.b_theta();
        let plus = (Matrix::identity(d, d) + &self.theta) * 0.5;
        let minus = (Matrix::identity(d, d) - &self.theta) * 0.5;
        let cols = |p: &Matrix| -> Vec<Vector> { (0..d).map(|j| p.column(j).into_owned()).collect() };
        let k = crate::linalg::gram_schmidt(&cols(&plus), Some(&bt), 1e-9);
        let p = crate::linalg::gram_schmidt(&cols(&minus), Some(&bt), 1e-9);
        (k, p)
    }

    /// Smallest eigenvalue of `-B` on `k` and of `B` on `p`; both must be positive.
    pub fn killing_signature(&self) -> (f64, f64) {
        let (k, p) = self.cartan_split();
        let restrict = |vs: &[Vector], sign: f64| -> f64 {
            if vs.is_empty() {
                return f64::INFINITY;
            }
            let m = Matrix::from_fn(vs.len(), vs.len(), |i, j| sign * self.killing_form(&vs[i], &vs[j]));
            m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, x| a.min(*x))
        };
        (restrict(&k, -1.0), restrict(&p, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_oracle::models::build_model;

    #[test]
    fn sl2_bracket_of_h_and_e_is_two_e() {
        let m = build_model(ModelId::Sl2R).unwrap();
        let h = m.coords_of(&Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        let e = m.coords_of(&Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        let he = m.bracket(&h, &e).unwrap();
        assert!((he - &e * 2.0).amax() < 1e-14);
    }

    #[test]
    fn bracket_is_antisymmetric_and_self_bracket_vanishes() {
        let m = build_model(ModelId::Su21).unwrap();
        let d = m.dim();
        let x = Vector::from_fn(d, |i, _| (i as f64 * 0.37).sin());
        let y = Vector::from_fn(d, |i, _| (i as f64 * 1.3).cos());
        assert!(m.bracket(&x, &x).unwrap().amax() < 1e-13);
        let s = m.bracket(&x, &y).unwrap() + m.bracket(&y, &x).unwrap();
        assert!(s.amax() < 1e-13);
    }

    #[test]
    fn bracket_rejects_wrong_dimension() {
        let m = build_model(ModelId::Sl2R).unwrap();
        let err = m.bracket(&Vector::zeros(3), &Vector::zeros(4)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn coords_of_rejects_matrices_outside_the_algebra() {
        let m = build_model(ModelId::Sl2R).unwrap();
        // the identity is not traceless
        assert!(m.coords_of(&Matrix::identity(2, 2)).is_err());
    }
}
