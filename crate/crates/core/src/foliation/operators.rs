//! Shape operator `A_v` and normal Jacobi operator `R(v) = R(., v) v` of the
//! orbit through `e`, in closed form and from the connection of a matrix model.

use crate::error::{Error, Result};
use crate::lie_oracle::Connection;
use crate::linalg::{self, Matrix, Vector};

use super::blocks::{Block, BlockKind, BlockOperator, BlockStatus};
use super::geometry::{hyper, BlockSpec, Geometry};
use super::{FoliationConfig, Normal};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Shape,
    Jacobi,
}

fn pairs(m2: usize, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(2 * m2, 2 * m2);
    for p in 0..m2 {
        out.view_mut((2 * p, 2 * p), (2, 2)).copy_from(b);
    }
    out
}

/// Shape operator on one `(X, [theta xi, X] / c)` pair: `L [[-2 th, -1/ch], [-1/ch, -th]]`.
fn doubled_shape(l: f64, t: f64) -> Matrix {
    let (th, ch) = hyper(l, t);
    Matrix::from_row_slice(2, 2, &[-2.0 * l * th, -l / ch, -l / ch, -l * th])
}

/// Normal Jacobi operator on one pair.
fn doubled_jacobi(l: f64, t: f64) -> Matrix {
    let (th, ch) = hyper(l, t);
    let l2 = l * l;
    let off = -3.0 * l2 * th / ch;
    Matrix::from_row_slice(2, 2, &[-l2 * (1.0 + 3.0 * th * th), off, off, -l2 * (4.0 - 3.0 * th * th)])
}

/// `[A, R]` on one pair: `X -> -3 L^3 / ch^3 Y`, `Y -> 3 L^3 / ch^3 X`.
pub fn corrected_doubled_commutator(l: f64, t: f64) -> Matrix {
    let (_, ch) = hyper(l, t);
    let k = 3.0 * l.powi(3) / ch.powi(3);
    Matrix::from_row_slice(2, 2, &[0.0, k, -k, 0.0])
}

/// The doubled-block shape operator exactly as printed, in the pair basis with `c = ||[theta xi, X]||`.
pub fn published_doubled_shape(l: f64, t: f64, c: f64) -> Matrix {
    let (th, ch) = hyper(l, t);
    Matrix::from_row_slice(2, 2, &[-2.0 * l * th, -l * l / (c * ch), -c / (2.0 * ch), -l * th])
}

/// The doubled-block normal Jacobi operator exactly as printed.
pub fn published_doubled_jacobi(l: f64, t: f64, c: f64) -> Matrix {
    let (th, ch) = hyper(l, t);
    Matrix::from_row_slice(
        2,
        2,
        &[
            -l * l * (1.0 + 3.0 * th * th),
            -6.0 * l * th / (c * ch),
            -3.0 * l * th * c / (2.0 * ch),
            std::f64::consts::SQRT_2 * l / 4.0 * (1.0 - 3.0 * th * th),
        ],
    )
}

/// The printed kernel-block eigenvalue `(L^2 / 2)(1 - 3 th^2)`.
pub fn published_kernel_jacobi(l: f64, t: f64) -> f64 {
    let (th, _) = hyper(l, t);
    l * l / 2.0 * (1.0 - 3.0 * th * th)
}

/// The printed commutator on one pair, with `cosh(sqrt2 t)` as written.
pub fn published_doubled_commutator(t: f64, c: f64) -> Matrix {
    let ch3 = (std::f64::consts::SQRT_2 * t).cosh().powi(3);
    Matrix::from_row_slice(2, 2, &[0.0, -6.0 / (c * ch3), -3.0 * c / (2.0 * ch3), 0.0])
}

/// Unit normal in adapted coordinates (model-backed only).
pub(crate) fn normal_vector(cfg: &FoliationConfig, geo: &Geometry, normal: &Normal) -> Result<Vector> {
    cfg.check_normal(normal)?;
    let m = cfg.model().ok_or_else(|| Error::Config("this operation needs a matrix model".into()))?;
    Ok(match normal {
        Normal::Flat(v) => m.a_vector(v),
        Normal::Root(i) => geo.normals[cfg.m0() + i].clone(),
    })
}

fn nabla_matrix(conn: &Connection, v: &Vector) -> Matrix {
    let n = conn.dim();
    let mut out = Matrix::zeros(n, n);
    for j in 0..n {
        out.set_column(j, &conn.covariant(&linalg::unit(n, j), v));
    }
    out
}

fn full_shape(cfg: &FoliationConfig, geo: &Geometry, conn: &Connection, normal: &Normal) -> Result<Matrix> {
    let v = normal_vector(cfg, geo, normal)?;
    let p = geo.tangent_projector();
    Ok(-(&p * nabla_matrix(conn, &v) * &p))
}

fn full_jacobi(cfg: &FoliationConfig, geo: &Geometry, conn: &Connection, normal: &Normal) -> Result<Matrix> {
    let v = normal_vector(cfg, geo, normal)?;
    conn.jacobi_operator(cfg.model().expect("checked"), &v)
}

/// `A_v X = -pr_s(nabla_X v)` from the metric-adjoint connection, as a dense matrix.
pub fn oracle_shape_operator(cfg: &FoliationConfig, normal: &Normal) -> Result<Matrix> {
    let geo = Geometry::build(cfg)?;
    let conn = Connection::milnor(cfg.model().ok_or_else(|| Error::Config("needs a matrix model".into()))?)?;
    full_shape(cfg, &geo, &conn, normal)
}

/// `R(X, v) v` from the metric-adjoint connection, as a dense matrix.
pub fn oracle_normal_jacobi(cfg: &FoliationConfig, normal: &Normal) -> Result<Matrix> {
    let geo = Geometry::build(cfg)?;
    let conn = Connection::milnor(cfg.model().ok_or_else(|| Error::Config("needs a matrix model".into()))?)?;
    full_jacobi(cfg, &geo, &conn, normal)
}

/// Shape operator from the root-space connection table.
pub fn table_shape_operator(cfg: &FoliationConfig, normal: &Normal) -> Result<Matrix> {
    let geo = Geometry::build(cfg)?;
    let conn = Connection::table(cfg.model().ok_or_else(|| Error::Config("needs a matrix model".into()))?)?;
    full_shape(cfg, &geo, &conn, normal)
}

/// Normal Jacobi operator from the root-space connection table.
pub fn table_normal_jacobi(cfg: &FoliationConfig, normal: &Normal) -> Result<Matrix> {
    let geo = Geometry::build(cfg)?;
    let conn = Connection::table(cfg.model().ok_or_else(|| Error::Config("needs a matrix model".into()))?)?;
    full_jacobi(cfg, &geo, &conn, normal)
}

fn restrict(full: &Matrix, spec: &BlockSpec, dim: usize) -> Matrix {
    let u = linalg::columns(dim, &spec.basis);
    u.transpose() * full * u
}

fn build(cfg: &FoliationConfig, normal: &Normal, op: Op) -> Result<BlockOperator> {
    cfg.check_normal(normal)?;
    let geo = Geometry::build(cfg)?;
    let datum = cfg.datum();

    // table-route operator for the remainder block along xi^i_t
    let table_full = match (normal, cfg.model()) {
        (Normal::Root(_), Some(m)) if geo.block(BlockKind::Remainder).is_some_and(|b| b.dim > 0) => {
            let conn = Connection::table(m)?;
            Some(match op {
                Op::Shape => full_shape(cfg, &geo, &conn, normal)?,
                Op::Jacobi => full_jacobi(cfg, &geo, &conn, normal)?,
            })
        }
        _ => None,
    };

    let mut blocks = Vec::new();
    for spec in &geo.blocks {
        let dim = spec.dim;
        let zero = || Matrix::zeros(dim, dim);
        let (status, matrix) = match (spec.kind, normal) {
            (BlockKind::Normal, _) if op == Op::Shape => (BlockStatus::NotApplicable, zero()),
            (BlockKind::Normal, _) | (BlockKind::Flat, _) => (BlockStatus::ClosedForm, zero()),
            (BlockKind::Remainder, Normal::Flat(v)) => {
                let diag: Vec<f64> = spec
                    .roots
                    .iter()
                    .map(|&r| {
                        let mu = datum.eval(r, v);
                        if op == Op::Shape {
                            mu
                        } else {
                            -mu * mu
                        }
                    })
                    .collect();
                (BlockStatus::ClosedForm, Matrix::from_diagonal(&Vector::from_vec(diag)))
            }
            (BlockKind::Remainder, Normal::Root(i)) => match &table_full {
                Some(full) => (BlockStatus::TableRoute, restrict(full, spec, geo.dim)),
                None if dim == 0 => (BlockStatus::ClosedForm, zero()),
                None => {
                    if op == Op::Shape {
                        // <A X, X> = <v, nabla_X X> = <v, H_mu> for unit X in g_mu
                        let lam = cfg.set().indices[*i];
                        let l = datum.norm(lam);
                        let (th, _) = hyper(l, cfg.offsets()[*i]);
                        let diag: Vec<f64> = spec.roots.iter().map(|&r| -th / l * datum.inner(r, lam)).collect();
                        (BlockStatus::DiagonalOnly, Matrix::from_diagonal(&Vector::from_vec(diag)))
                    } else {
                        (BlockStatus::Unresolved, Matrix::zeros(0, 0))
                    }
                }
            },
            (_, Normal::Flat(_)) => (BlockStatus::ClosedForm, zero()),
            (BlockKind::Kernel(j), Normal::Root(i)) | (BlockKind::Slant(j), Normal::Root(i)) if j != *i => {
                (BlockStatus::ClosedForm, zero())
            }
            (BlockKind::Doubled(j), Normal::Root(i)) if j != *i => (BlockStatus::ClosedForm, zero()),
            (BlockKind::Kernel(_), Normal::Root(i)) | (BlockKind::Slant(_), Normal::Root(i)) => {
                let l = cfg.norm(*i);
                let (th, _) = hyper(l, cfg.offsets()[*i]);
                let s = if op == Op::Shape { -l * th } else { -l * l };
                (BlockStatus::ClosedForm, Matrix::identity(dim, dim) * s)
            }
            (BlockKind::Doubled(_), Normal::Root(i)) => {
                let l = cfg.norm(*i);
                let t = cfg.offsets()[*i];
                let b = if op == Op::Shape { doubled_shape(l, t) } else { doubled_jacobi(l, t) };
                (BlockStatus::ClosedForm, pairs(dim / 2, &b))
            }
        };
        blocks.push(Block { kind: spec.kind, dim, status, matrix, basis: spec.basis.clone() });
    }
    let name = format!("{}({})", if op == Op::Shape { "A" } else { "R" }, cfg.normal_label(normal));
    Ok(BlockOperator { name, blocks, dim: geo.dim, verified: cfg.is_verified() })
}

/// Closed-form shape operator along a unit normal, block by block.
pub fn shape_operator(cfg: &FoliationConfig, normal: &Normal) -> Result<BlockOperator> {
    build(cfg, normal, Op::Shape)
}

/// Closed-form normal Jacobi operator `R(., v) v`, block by block.
pub fn normal_jacobi(cfg: &FoliationConfig, normal: &Normal) -> Result<BlockOperator> {
    build(cfg, normal, Op::Jacobi)
}
