use serde::Serialize;

use crate::linalg::{Matrix, Vector};

/// Subspaces of the block decomposition of `a + n` at `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// `a` minus `b` and the chosen `H_lambda`.
    Flat,
    /// `Ker(ad xi^i | g_lambda_i)` minus `R xi^i`.
    Kernel(usize),
    /// `g_{2 lambda_i}` together with `[theta xi^i, g_{2 lambda_i}]`, in interleaved pairs.
    Doubled(usize),
    /// The tangent direction of `R xi^i + R H_lambda_i`.
    Slant(usize),
    /// Root spaces `g_mu` with `mu` outside every `lambda_i, 2 lambda_i`.
    Remainder,
    /// The normal space `b + sum l_i`.
    Normal,
}

impl BlockKind {
    pub fn label(&self) -> String {
        match self {
            BlockKind::Flat => "a_perp".into(),
            BlockKind::Kernel(i) => format!("kernel[{}]", i + 1),
            BlockKind::Doubled(i) => format!("doubled[{}]", i + 1),
            BlockKind::Slant(i) => format!("slant[{}]", i + 1),
            BlockKind::Remainder => "other_roots".into(),
            BlockKind::Normal => "normal".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStatus {
    ClosedForm,
    /// Computed from the root-space connection table of a matrix model.
    TableRoute,
    /// Only the diagonal is determined by the root datum.
    DiagonalOnly,
    /// Not determined by the root datum alone.
    Unresolved,
    /// The operator is not defined on this block.
    NotApplicable,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub kind: BlockKind,
    pub dim: usize,
    pub status: BlockStatus,
    pub matrix: Matrix,
    pub basis: Vec<Vector>,
}

/// A linear operator on `a + n` stored block by block.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub name: String,
    pub blocks: Vec<Block>,
    pub dim: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockExport {
    pub label: String,
    pub dim: usize,
    pub status: BlockStatus,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockOperatorExport {
    pub name: String,
    pub verified: bool,
    pub blocks: Vec<BlockExport>,
}

/// Row-major nested arrays of a matrix.
pub fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl BlockOperator {
    pub fn block(&self, kind: BlockKind) -> Option<&Block> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    /// Dense matrix in the adapted basis; `None` without block bases.
    pub fn to_full(&self) -> Option<Matrix> {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            if b.matrix.nrows() == 0 {
                continue;
            }
            if b.basis.len() != b.matrix.nrows() {
                return None;
            }
            let u = crate::linalg::columns(self.dim, &b.basis);
            m += &u * &b.matrix * u.transpose();
        }
        Some(m)
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().filter(|b| b.matrix.is_square()).map(|b| b.matrix.trace()).sum()
    }

    /// Whether every block matrix is symmetric to `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| !b.matrix.is_square() || (&b.matrix - b.matrix.transpose()).amax() <= tol)
    }

    pub fn export(&self) -> BlockOperatorExport {
        BlockOperatorExport {
            name: self.name.clone(),
            verified: self.verified,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockExport { label: b.kind.label(), dim: b.dim, status: b.status, matrix: rows(&b.matrix) })
                .collect(),
        }
    }
}
