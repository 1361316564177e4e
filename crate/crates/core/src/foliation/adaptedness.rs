//! Curvature-adaptedness of the orbit through `e`: `[A_v, R(v)] = 0` and
//! `R(v) s ⊆ s` for every normal generator `v`.

use serde::Serialize;

use crate::error::Result;
use crate::lie_oracle::TAU_ALG;
use crate::linalg::{self, Matrix};

use super::blocks::{rows, BlockKind, BlockStatus};
use super::geometry::Geometry;
use super::operators::{
    corrected_doubled_commutator, normal_jacobi, oracle_normal_jacobi, oracle_shape_operator,
    published_doubled_commutator, shape_operator,
};
use super::{FoliationConfig, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Adapted,
    NotAdapted,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockCommutator {
    pub label: String,
    /// Largest entry of `[A, R]` restricted to the block.
    pub max_abs: f64,
    /// `false` when an operator block is not determined (datum-only configs).
    pub resolved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalAdaptedness {
    pub label: String,
    pub blocks: Vec<BlockCommutator>,
    /// Largest entry of `[A, R]` on the tangent space.
    pub commutator: f64,
    /// Largest entry of the normal part of `R(v)` applied to tangent vectors.
    pub tangent_leak: f64,
    pub adapted: bool,
}

/// The coupled block on one pair `(X, [theta xi, X] / c)`.
#[derive(Debug, Clone, Serialize)]
pub struct DoubledCommutator {
    pub root_position: usize,
    pub offset: f64,
    pub root_norm: f64,
    pub bracket_norm: f64,
    /// Closed form returned by this library (columns are images).
    pub closed: Vec<Vec<f64>>,
    /// The printed coefficients, transcribed in the same basis.
    pub published: Vec<Vec<f64>>,
    /// Oracle matrix on the first pair, when model-backed.
    pub measured: Option<Vec<Vec<f64>>>,
    pub closed_norm: f64,
    pub published_norm: f64,
    pub measured_norm: Option<f64>,
    pub closed_vs_measured: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptednessReport {
    pub verdict: Verdict,
    /// Computed from a matrix model rather than root data alone.
    pub verified: bool,
    pub tolerance: f64,
    pub normals: Vec<NormalAdaptedness>,
    pub doubled: Vec<DoubledCommutator>,
}

fn comm(a: &Matrix, r: &Matrix) -> Matrix {
    a * r - r * a
}

/// Commutators of shape and normal Jacobi operators over all normal generators.
///
/// Model-backed configs use the connection of the matrix model; datum-only
/// configs use the block closed forms and mark undetermined blocks.
pub fn adaptedness(cfg: &FoliationConfig) -> Result<AdaptednessReport> {
    let geo = Geometry::build(cfg)?;
    let tol = TAU_ALG;
    let mut normals = Vec::new();
    let mut measured_pairs: Vec<Option<Matrix>> = vec![None; cfg.k()];

    for normal in cfg.normal_generators() {
        let label = cfg.normal_label(&normal);
        let mut blocks = Vec::new();
        let (commutator, leak) = if cfg.model().is_some() {
            let a = oracle_shape_operator(cfg, &normal)?;
            let r = oracle_normal_jacobi(cfg, &normal)?;
            let p = geo.tangent_projector();
            let c = comm(&a, &(&p * &r * &p));
            for spec in geo.blocks.iter().filter(|b| b.dim > 0 && b.kind != BlockKind::Normal) {
                let u = linalg::columns(geo.dim, &spec.basis);
                let cb = u.transpose() * &c * &u;
                if let (BlockKind::Doubled(i), Normal::Root(j)) = (spec.kind, &normal) {
                    if i == *j {
                        measured_pairs[i] = Some(cb.view((0, 0), (2, 2)).into_owned());
                    }
                }
                blocks.push(BlockCommutator { label: spec.kind.label(), max_abs: cb.amax(), resolved: true });
            }
            (c.amax(), (geo.normal_projector() * &r * &p).amax())
        } else {
            let a = shape_operator(cfg, &normal)?;
            let r = normal_jacobi(cfg, &normal)?;
            let mut worst = 0.0_f64;
            for (ba, br) in a.blocks.iter().zip(&r.blocks) {
                if ba.dim == 0 || ba.kind == BlockKind::Normal {
                    continue;
                }
                let resolved = ![ba.status, br.status]
                    .iter()
                    .any(|s| matches!(s, BlockStatus::Unresolved | BlockStatus::DiagonalOnly));
                let max_abs = if resolved { comm(&ba.matrix, &br.matrix).amax() } else { 0.0 };
                worst = worst.max(max_abs);
                blocks.push(BlockCommutator { label: ba.kind.label(), max_abs, resolved });
            }
            // the closed forms are block diagonal, so R(v) keeps s invariant
            (worst, 0.0)
        };
        normals.push(NormalAdaptedness {
            label,
            blocks,
            commutator,
            tangent_leak: leak,
            adapted: commutator <= tol && leak <= tol,
        });
    }

    let mut doubled = Vec::new();
    for (i, pair) in measured_pairs.iter_mut().enumerate() {
        let Some(c) = geo.bracket_norms[i] else { continue };
        let l = cfg.norm(i);
        let t = cfg.offsets()[i];
        let closed = corrected_doubled_commutator(l, t);
        let published = published_doubled_commutator(t, c);
        let measured = pair.take();
        doubled.push(DoubledCommutator {
            root_position: i,
            offset: t,
            root_norm: l,
            bracket_norm: c,
            closed: rows(&closed),
            published: rows(&published),
            closed_norm: linalg::operator_norm(&closed),
            published_norm: linalg::operator_norm(&published),
            measured_norm: measured.as_ref().map(linalg::operator_norm),
            closed_vs_measured: measured.as_ref().map(|m| (m - &closed).amax()),
            measured: measured.as_ref().map(rows),
        });
    }

    let verdict = if normals.iter().all(|n| n.adapted) { Verdict::Adapted } else { Verdict::NotAdapted };
    Ok(AdaptednessReport { verdict, verified: cfg.is_verified(), tolerance: tol, normals, doubled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_oracle::ModelId;

    #[test]
    fn su21_with_doubled_root_is_not_adapted() {
        let c = FoliationConfig::for_model(ModelId::Su21, 1, 0, vec![0.0]).unwrap();
        let rep = adaptedness(&c).unwrap();
        assert_eq!(rep.verdict, Verdict::NotAdapted);
        let d = &rep.doubled[0];
        assert!(d.closed_vs_measured.unwrap() < 1e-10);
    }

    #[test]
    fn sl3_is_adapted() {
        let c = FoliationConfig::for_model(ModelId::Sl3R, 1, 1, vec![0.8]).unwrap();
        assert_eq!(adaptedness(&c).unwrap().verdict, Verdict::Adapted);
    }

    #[test]
    fn k0_is_adapted() {
        let c = FoliationConfig::for_model(ModelId::Su31, 0, 1, vec![]).unwrap();
        assert_eq!(adaptedness(&c).unwrap().verdict, Verdict::Adapted);
    }

    #[test]
    fn datum_only_su21_is_not_adapted() {
        let m = FoliationConfig::for_model(ModelId::Su21, 1, 0, vec![0.3]).unwrap();
        let c = FoliationConfig::new(m.datum().clone(), m.set().clone(), vec![], vec![], vec![0.3]).unwrap();
        let rep = adaptedness(&c).unwrap();
        assert_eq!(rep.verdict, Verdict::NotAdapted);
        assert!(!rep.verified);
    }
}
