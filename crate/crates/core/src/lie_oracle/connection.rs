//! Levi-Civita connection and curvature of the left-invariant metric on `AN`.
//!
//! Two independent routes are provided. [`Connection::milnor`] uses the
//! metric adjoint of `ad`, computed from the Gram matrix. [`Connection::table`]
//! uses the root-space case table, built from brackets and `theta` only.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::root_data::RootRelation;

use super::decomposition::{AdaptedModel, Slot};

/// `ad(X)^*` from the Gram matrix `G`: `G^{-1} ad(X)^T G`.
pub fn metric_adjoint(m: &AdaptedModel, x: &Vector) -> Result<Matrix> {
    let g = m.metric().inner;
    let g_inv = g.clone().try_inverse().ok_or_else(|| Error::Model("metric Gram matrix is singular".into()))?;
    Ok(g_inv * m.ad(x)?.transpose() * g)
}

/// The root space containing `x`, if `x` lies in `a` (returns `None`) or a single `g_lambda`.
fn support(m: &AdaptedModel, x: &Vector) -> Result<Option<usize>> {
    let tol = 1e-12 * x.amax().max(1.0);
    let in_a = (m.rank()..m.dim()).all(|i| x[i].abs() <= tol);
    if in_a {
        return Ok(None);
    }
    for (ri, rs) in m.roots().iter().enumerate() {
        let outside = (0..m.dim()).filter(|i| !rs.range().contains(i)).all(|i| x[i].abs() <= tol);
        if outside {
            return Ok(Some(ri));
        }
    }
    Err(Error::UnsupportedArgument("ad_star table covers elements of a or of a single root space".into()))
}

/// `ad(X)^*` from the root-space case table.
pub fn ad_star(m: &AdaptedModel, x: &Vector) -> Result<Matrix> {
    let n = m.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let lam = match support(m, x)? {
        None => return m.ad(x),
        Some(l) => l,
    };
    let datum = m.datum();
    let theta_x = m.theta_model(x);
    let mut out = Matrix::zeros(n, n);
    for j in m.rank()..n {
        let Slot::Root { root: mu, .. } = m.slot(j) else { unreachable!() };
        let col = match datum.relation(lam, mu) {
            RootRelation::Equal => m.root_vector(lam) * (-x[j]),
            RootRelation::MuMinusLambda(_) => -m.bracket_into_an(&theta_x, &m.to_model(&linalg::unit(n, j)))?,
            RootRelation::LambdaMinusMu(_) | RootRelation::Unrelated => continue,
        };
        out.set_column(j, &col);
    }
    Ok(out)
}

/// Christoffel cache: `gamma[i][j] = nabla_{e_i} e_j` in the adapted basis.
#[derive(Debug, Clone)]
pub struct Connection {
    n: usize,
    gamma: Vec<Vector>,
}

impl Connection {
    /// Milnor's formula `nabla_X Y = 1/2 ([X,Y] - ad(X)^* Y - ad(Y)^* X)`.
    pub fn milnor(m: &AdaptedModel) -> Result<Self> {
        let n = m.dim();
        let stars: Vec<Matrix> = (0..n).map(|i| metric_adjoint(m, &linalg::unit(n, i))).collect::<Result<_>>()?;
        let mut gamma = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let ei = linalg::unit(n, i);
                let ej = linalg::unit(n, j);
                let v = (m.bracket(&ei, &ej)? - &stars[i] * &ej - &stars[j] * &ei) * 0.5;
                gamma.push(v);
            }
        }
        Ok(Connection { n, gamma })
    }

    /// The root-space case table for `nabla`.
    pub fn table(m: &AdaptedModel) -> Result<Self> {
        let n = m.dim();
        let r = m.rank();
        let datum = m.datum();
        let mut gamma = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = match (m.slot(i), m.slot(j)) {
                    (Slot::A(_), _) => Vector::zeros(n),
                    (Slot::Root { root: lam, .. }, Slot::A(a)) => linalg::unit(n, i) * (-m.roots()[lam].root[a]),
                    (Slot::Root { root: lam, .. }, Slot::Root { root: mu, .. }) => {
                        let ei = linalg::unit(n, i);
                        let ej = linalg::unit(n, j);
                        let half = m.bracket(&ei, &ej)? * 0.5;
                        let model = m.model();
                        match datum.relation(lam, mu) {
                            RootRelation::LambdaMinusMu(_) => {
                                let inner = model.bracket(&m.to_model(&ej), &m.theta_model(&ei))?;
                                half + m.from_model(&model.apply_theta(&inner))? * 0.5
                            }
                            RootRelation::Equal => {
                                let ip = if i == j { 1.0 } else { 0.0 };
                                half + m.root_vector(lam) * ip
                            }
                            RootRelation::MuMinusLambda(_) => {
                                let inner = model.bracket(&m.to_model(&ei), &m.theta_model(&ej))?;
                                half + m.from_model(&model.apply_theta(&inner))? * 0.5
                            }
                            RootRelation::Unrelated => half,
                        }
                    }
                };
                debug_assert!(r <= n);
                gamma.push(v);
            }
        }
        Ok(Connection { n, gamma })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn basis_value(&self, i: usize, j: usize) -> &Vector {
        &self.gamma[i * self.n + j]
    }

    /// `nabla_X Y` for left-invariant fields.
    pub fn covariant(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.n);
        for i in 0..self.n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.n {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out.axpy(c, &self.gamma[i * self.n + j], 1.0);
                }
            }
        }
        out
    }

    /// Matrix of `Y -> nabla_X Y`.
    pub fn nabla_x(&self, x: &Vector) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for j in 0..self.n {
            m.set_column(j, &self.covariant(x, &linalg::unit(self.n, j)));
        }
        m
    }

    /// `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`.
    pub fn curvature(&self, m: &AdaptedModel, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
        let xy = m.bracket(x, y)?;
        Ok(self.covariant(x, &self.covariant(y, z)) - self.covariant(y, &self.covariant(x, z)) - self.covariant(&xy, z))
    }

    /// Matrix of the normal Jacobi operator `X -> R(X, v) v`.
    pub fn jacobi_operator(&self, m: &AdaptedModel, v: &Vector) -> Result<Matrix> {
        let n = self.n;
        let mut out = Matrix::zeros(n, n);
        for j in 0..n {
            out.set_column(j, &self.curvature(m, &linalg::unit(n, j), v, v)?);
        }
        Ok(out)
    }
}

/// `nabla_X Y` by Milnor's formula, without a cache.
pub fn levi_civita(m: &AdaptedModel, x: &Vector, y: &Vector) -> Result<Vector> {
    let xy = m.bracket(x, y)?;
    Ok((xy - metric_adjoint(m, x)? * y - metric_adjoint(m, y)? * x) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_oracle::decomposition::root_space_decomposition;
    use crate::lie_oracle::models::{build_model, ModelId};

    fn adapted(id: ModelId) -> AdaptedModel {
        root_space_decomposition(build_model(id).unwrap()).unwrap()
    }

    #[test]
    fn ad_star_of_a_is_ad() {
        let m = adapted(ModelId::Su21);
        let h = linalg::unit(m.dim(), 0);
        assert!((ad_star(&m, &h).unwrap() - m.ad(&h).unwrap()).amax() < 1e-14);
    }

    #[test]
    fn ad_star_same_root_gives_minus_h() {
        let m = adapted(ModelId::Sl3R);
        let i = m.roots()[0].offset;
        let x = linalg::unit(m.dim(), i);
        let got = ad_star(&m, &x).unwrap() * &x;
        assert!((got + m.root_vector(0)).amax() < 1e-12);
    }

    #[test]
    fn ad_star_rejects_mixed_support() {
        let m = adapted(ModelId::Sl3R);
        let x = linalg::unit(m.dim(), m.roots()[0].offset) + linalg::unit(m.dim(), m.roots()[1].offset);
        assert!(matches!(ad_star(&m, &x), Err(Error::UnsupportedArgument(_))));
    }

    #[test]
    fn table_matches_milnor() {
        for id in ModelId::ALL {
            let m = adapted(id);
            let a = Connection::milnor(&m).unwrap();
            let b = Connection::table(&m).unwrap();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let d = (a.basis_value(i, j) - b.basis_value(i, j)).amax();
                    assert!(d < 1e-10, "{id} {i} {j} {d}");
                }
            }
        }
    }

    #[test]
    fn unit_root_vector_self_derivative_is_h() {
        let m = adapted(ModelId::Su21);
        let c = Connection::milnor(&m).unwrap();
        let x = linalg::unit(m.dim(), m.roots()[0].offset);
        assert!((c.covariant(&x, &x) - m.root_vector(0)).amax() < 1e-12);
    }
}
