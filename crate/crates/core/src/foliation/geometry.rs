//! Tangent and normal block decomposition of `a + n` at `e`.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

use super::blocks::BlockKind;
use super::FoliationConfig;

/// One block of the decomposition.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub dim: usize,
    /// Orthonormal basis in adapted coordinates; empty without a model.
    pub basis: Vec<Vector>,
    /// For the remainder block: the root index of each basis direction.
    pub roots: Vec<usize>,
}

/// The block layout of a configuration at its base point.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub blocks: Vec<BlockSpec>,
    /// Per chosen root, `||[theta xi^i, X]||` for unit `X` in `g_{2 lambda_i}` (absent if not doubled).
    pub bracket_norms: Vec<Option<f64>>,
    /// Unit normals in adapted coordinates (`b` basis then `xi^i_{t_i}`); empty without a model.
    pub normals: Vec<Vector>,
    /// Ambient dimension `dim(a + n)`.
    pub dim: usize,
}

pub(crate) fn hyper(l: f64, t: f64) -> (f64, f64) {
    ((l * t).tanh(), (l * t).cosh())
}

impl Geometry {
    pub fn build(cfg: &FoliationConfig) -> Result<Geometry> {
        match cfg.model() {
            Some(_) => Geometry::from_model(cfg),
            None => Ok(Geometry::from_datum(cfg)),
        }
    }

    fn remainder_roots(cfg: &FoliationConfig) -> Vec<usize> {
        let d = cfg.datum();
        let mut excluded: Vec<usize> = cfg.set().indices.clone();
        excluded.extend(cfg.set().indices.iter().filter_map(|&i| d.double_of(i)));
        (0..d.len()).filter(|r| !excluded.contains(r)).collect()
    }

    fn from_datum(cfg: &FoliationConfig) -> Geometry {
        let d = cfg.datum();
        let k = cfg.k();
        let mut blocks =
            vec![BlockSpec { kind: BlockKind::Flat, dim: d.rank - cfg.m0() - k, basis: Vec::new(), roots: Vec::new() }];
        let mut norms = Vec::new();
        for (pos, &ri) in cfg.set().indices.iter().enumerate() {
            let (m, m2) = (d.mult[ri], d.double_mult[ri]);
            blocks.push(BlockSpec {
                kind: BlockKind::Kernel(pos),
                dim: m.saturating_sub(1 + m2),
                basis: vec![],
                roots: vec![],
            });
            blocks.push(BlockSpec { kind: BlockKind::Doubled(pos), dim: 2 * m2, basis: vec![], roots: vec![] });
            blocks.push(BlockSpec { kind: BlockKind::Slant(pos), dim: 1, basis: vec![], roots: vec![] });
            // measured relation in every shipped model: ||[theta xi, X]|| = 2 ||lambda||
            norms.push(if m2 > 0 { Some(2.0 * d.norm(ri)) } else { None });
        }
        let mut roots = Vec::new();
        for r in Geometry::remainder_roots(cfg) {
            roots.extend(std::iter::repeat_n(r, d.mult[r]));
        }
        blocks.push(BlockSpec { kind: BlockKind::Remainder, dim: roots.len(), basis: vec![], roots });
        blocks.push(BlockSpec { kind: BlockKind::Normal, dim: cfg.m0() + k, basis: vec![], roots: vec![] });
        let dim = d.rank + d.mult.iter().sum::<usize>();
        Geometry { blocks, bracket_norms: norms, normals: Vec::new(), dim }
    }

    fn from_model(cfg: &FoliationConfig) -> Result<Geometry> {
        let m = cfg.model().expect("model-backed");
        let n = m.dim();
        let r = m.rank();
        let d = cfg.datum();

        let b_vecs: Vec<Vector> = cfg.b_basis().iter().map(|e| m.a_vector(e)).collect();
        let h_hat: Vec<Vector> = cfg.set().indices.iter().map(|&ri| m.root_vector(ri).normalize()).collect();
        let mut span = b_vecs.clone();
        span.extend(h_hat.iter().cloned());
        let span = linalg::gram_schmidt(&span, None, 1e-12);
        let ambient: Vec<Vector> = (0..r).map(|i| linalg::unit(n, i)).collect();
        let flat = linalg::complement_in(&ambient, &span, 1e-9);
        let mut blocks = vec![BlockSpec { kind: BlockKind::Flat, dim: flat.len(), basis: flat, roots: vec![] }];

        let mut normals = b_vecs.clone();
        let mut norms = Vec::new();
        for (pos, &ri) in cfg.set().indices.iter().enumerate() {
            let rs = &m.roots()[ri];
            let xi = linalg::unit(n, rs.offset + cfg.xi_index()[pos]);
            let l = d.norm(ri);
            let (th, ch) = hyper(l, cfg.offsets()[pos]);

            let g: Vec<Vector> = rs.range().map(|j| linalg::unit(n, j)).collect();
            let images = linalg::columns(n, &g.iter().map(|u| m.bracket(&xi, u)).collect::<Result<Vec<_>>>()?);
            let svd = images.clone().svd(false, true);
            let v_t = svd.v_t.ok_or_else(|| Error::Model("SVD failed".into()))?;
            if v_t.nrows() < g.len() {
                return Err(Error::Model("incomplete SVD of ad(xi) on the root space".into()));
            }
            let sv = &svd.singular_values;
            let mut kernel = Vec::new();
            for row in 0..v_t.nrows() {
                let s = if row < sv.len() { sv[row] } else { 0.0 };
                if s < 1e-9 {
                    let coeffs = v_t.row(row).transpose();
                    let mut v = Vector::zeros(n);
                    for (c, u) in coeffs.iter().zip(&g) {
                        v.axpy(*c, u, 1.0);
                    }
                    kernel.push(v);
                }
            }
            let kernel = linalg::complement_in(&kernel, std::slice::from_ref(&xi), 1e-9);
            let m2 = d.double_mult[ri];
            if kernel.len() + 1 + m2 != rs.mult {
                return Err(Error::Decomposition(format!(
                    "Ker(ad xi) has dimension {} in a root space of dimension {} with doubled multiplicity {m2}",
                    kernel.len() + 1,
                    rs.mult
                )));
            }
            blocks.push(BlockSpec { kind: BlockKind::Kernel(pos), dim: kernel.len(), basis: kernel, roots: vec![] });

            let mut doubled = Vec::new();
            let mut c_norm = None;
            if let Some(di) = d.double_of(ri) {
                let theta_xi = m.theta_model(&xi);
                let xs: Vec<Vector> = m.roots()[di].range().map(|j| linalg::unit(n, j)).collect();
                let ys: Vec<Vector> =
                    xs.iter().map(|x| m.bracket_into_an(&theta_xi, &model_vec(m, x))).collect::<Result<_>>()?;
                c_norm = Some(ys[0].norm());
                let ys = linalg::gram_schmidt(&ys, None, 1e-9);
                for (x, y) in xs.into_iter().zip(ys) {
                    doubled.push(x);
                    doubled.push(y);
                }
            }
            norms.push(c_norm);
            blocks.push(BlockSpec { kind: BlockKind::Doubled(pos), dim: doubled.len(), basis: doubled, roots: vec![] });

            let h = &h_hat[pos];
            let tau = &xi * th + h / ch;
            blocks.push(BlockSpec { kind: BlockKind::Slant(pos), dim: 1, basis: vec![tau], roots: vec![] });
            normals.push(&xi / ch - h * th);
        }

        let mut rem = Vec::new();
        let mut rem_roots = Vec::new();
        for ri in Geometry::remainder_roots(cfg) {
            for j in m.roots()[ri].range() {
                rem.push(linalg::unit(n, j));
                rem_roots.push(ri);
            }
        }
        blocks.push(BlockSpec { kind: BlockKind::Remainder, dim: rem.len(), basis: rem, roots: rem_roots });
        blocks.push(BlockSpec { kind: BlockKind::Normal, dim: normals.len(), basis: normals.clone(), roots: vec![] });

        let total: usize = blocks.iter().map(|b| b.dim).sum();
        if total != n {
            return Err(Error::Decomposition(format!("blocks cover dimension {total} of {n}")));
        }
        let geo = Geometry { blocks, bracket_norms: norms, normals, dim: n };
        let dev = geo.orthonormality_deviation();
        if dev > 1e-9 {
            return Err(Error::Decomposition(format!("block bases are not orthonormal ({dev:.3e})")));
        }
        Ok(geo)
    }

    /// All block bases side by side; `n x n` when model-backed.
    pub fn frame(&self) -> Matrix {
        let cols: Vec<Vector> = self.blocks.iter().flat_map(|b| b.basis.iter().cloned()).collect();
        linalg::columns(self.dim, &cols)
    }

    pub fn orthonormality_deviation(&self) -> f64 {
        let f = self.frame();
        (f.transpose() * &f - Matrix::identity(f.ncols(), f.ncols())).amax()
    }

    pub fn block(&self, kind: BlockKind) -> Option<&BlockSpec> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    /// Orthogonal projector onto the tangent space `s`.
    pub fn tangent_projector(&self) -> Matrix {
        let mut p = Matrix::identity(self.dim, self.dim);
        for v in &self.normals {
            p -= v * v.transpose();
        }
        p
    }

    pub fn normal_projector(&self) -> Matrix {
        Matrix::identity(self.dim, self.dim) - self.tangent_projector()
    }
}

fn model_vec(m: &crate::lie_oracle::AdaptedModel, x: &Vector) -> Vector {
    m.to_model(x)
}
