//! Anticommutation of `A_{xi^i_t}` with `Ad(k_i)` on the root spaces away from
//! `lambda_i, 2 lambda_i`, where `k_i = exp(s (xi^i + theta xi^i))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

use super::operators::shape_operator;
use super::{FoliationConfig, Normal};

#[derive(Debug, Clone, Serialize)]
pub struct RotationCheck {
    pub root_position: usize,
    pub subspace_dim: usize,
    /// Angle `pi / (2 ||lambda_i||)` at which the check is run.
    pub angle: f64,
    /// Largest entry of `Ad(k) A + A Ad(k)` on the subspace.
    pub deviation: f64,
    /// How far `Ad(k)` moves the subspace out of `a + n`.
    pub image_residual: f64,
    /// The printed angle `pi / (sqrt2 ||lambda_i||)` and its deviation.
    pub published_angle: f64,
    pub published_deviation: f64,
}

fn anticommutator(cfg: &FoliationConfig, i: usize, a: &Matrix, p: &Matrix, s: f64) -> Result<(f64, f64)> {
    let m = cfg.model().expect("checked by caller");
    let n = m.dim();
    let ri = cfg.set().indices[i];
    let xi = m.to_model(&linalg::unit(n, m.roots()[ri].offset + cfg.xi_index()[i]));
    let k = &xi + m.model().apply_theta(&xi);
    let adk = (m.model().ad(&k)? * s).exp();
    let image = &adk * m.embed() * p;
    let residual = (m.embed() * m.left_inverse() * &image - &image).amax();
    // Ad(k) on a + n in adapted coordinates
    let r = m.left_inverse() * adk * m.embed();
    let w = p.transpose() * (&r * a + a * &r) * p;
    Ok((w.amax(), residual))
}

/// Runs the check for chosen root `i`; needs a matrix model.
pub fn rotation_check(cfg: &FoliationConfig, i: usize) -> Result<RotationCheck> {
    let m = cfg.model().ok_or_else(|| Error::Config("the rotation check needs a matrix model".into()))?;
    if i >= cfg.k() {
        return Err(Error::Domain(format!("no chosen root at position {}", i + 1)));
    }
    let n = m.dim();
    let ri = cfg.set().indices[i];
    let skip = [Some(ri), cfg.datum().double_of(ri)];
    let cols: Vec<Vector> = (0..m.roots().len())
        .filter(|r| !skip.contains(&Some(*r)))
        .flat_map(|r| m.roots()[r].range())
        .map(|j| linalg::unit(n, j))
        .collect();
    let p = linalg::columns(n, &cols);
    let a = shape_operator(cfg, &Normal::Root(i))?
        .to_full()
        .ok_or_else(|| Error::Model("shape operator has no block bases".into()))?;
    let l = cfg.norm(i);
    let angle = std::f64::consts::PI / (2.0 * l);
    let published_angle = std::f64::consts::PI / (std::f64::consts::SQRT_2 * l);
    let (deviation, image_residual) = anticommutator(cfg, i, &a, &p, angle)?;
    let (published_deviation, _) = anticommutator(cfg, i, &a, &p, published_angle)?;
    Ok(RotationCheck {
        root_position: i,
        subspace_dim: cols.len(),
        angle,
        deviation,
        image_residual,
        published_angle,
        published_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_oracle::ModelId;

    #[test]
    fn sl3_anticommutes_at_quarter_turn() {
        for t in [0.0, 0.7, -1.2] {
            let c = FoliationConfig::for_model(ModelId::Sl3R, 1, 0, vec![t]).unwrap();
            let r = rotation_check(&c, 0).unwrap();
            assert_eq!(r.subspace_dim, 2);
            assert!(r.image_residual < 1e-10, "{r:?}");
            assert!(r.deviation < 1e-8, "{r:?}");
        }
    }
}
