//! Foliations `F_{b, l_1, ..., l_k}` on `AN`: configuration, the tangent/normal
//! block decomposition of `a + n` at `e`, and the operators built on it.

mod adaptedness;
mod blocks;
mod geometry;
mod operators;
mod rotation;
mod section;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_oracle::{adapted, AdaptedModel, ModelId};
use crate::linalg::{self, Vector};
use crate::root_data::{
    self, mean_curvature_coefficients, validate_orthogonal_set, CoefficientRecord, RootDatum, SimpleOrthogonalSet,
};

pub use adaptedness::{adaptedness, AdaptednessReport, BlockCommutator, DoubledCommutator, NormalAdaptedness, Verdict};
pub use blocks::{rows as blocks_rows, Block, BlockExport, BlockKind, BlockOperator, BlockOperatorExport, BlockStatus};
pub use geometry::{BlockSpec, Geometry};
pub use operators::{
    corrected_doubled_commutator, normal_jacobi, oracle_normal_jacobi, oracle_shape_operator,
    published_doubled_commutator, published_doubled_jacobi, published_doubled_shape, published_kernel_jacobi,
    shape_operator, table_normal_jacobi, table_shape_operator,
};
pub use rotation::{rotation_check, RotationCheck};
pub use section::{leaf_mean_curvature, section_chart, MeanCurvature, SectionChart, TraceCheck, TransportCheck};

/// Which unit normal of the orbit through `e` an operator is taken along.
#[derive(Debug, Clone, PartialEq)]
pub enum Normal {
    /// `xi_0` in `b`, given in orthonormal `a` coordinates.
    Flat(Vec<f64>),
    /// `xi^i_{t_i}` for the chosen root with position `i` (zero based).
    Root(usize),
}

/// Data `(b, lambda_1..lambda_k, xi^1..xi^k, t_1..t_k)` of a leaf through a section point.
#[derive(Debug, Clone)]
pub struct FoliationConfig {
    datum: RootDatum,
    set: SimpleOrthogonalSet,
    b_basis: Vec<Vec<f64>>,
    xi_index: Vec<usize>,
    offsets: Vec<f64>,
    model: Option<Arc<AdaptedModel>>,
}

/// JSON form of a configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub root_datum: Option<RootDatum>,
    #[serde(default)]
    pub b_basis: Vec<Vec<f64>>,
    #[serde(default)]
    pub chosen_roots: Vec<usize>,
    #[serde(default)]
    pub xi_index: Vec<usize>,
    #[serde(default)]
    pub offsets: Vec<f64>,
}

impl FoliationConfig {
    /// A configuration driven by root data alone; results are labeled unverified.
    pub fn new(
        datum: RootDatum,
        set: SimpleOrthogonalSet,
        b_basis: Vec<Vec<f64>>,
        xi_index: Vec<usize>,
        offsets: Vec<f64>,
    ) -> Result<Self> {
        let xi_index = if xi_index.is_empty() { vec![0; set.len()] } else { xi_index };
        let cfg = FoliationConfig { datum, set, b_basis, xi_index, offsets, model: None };
        cfg.validate()?;
        Ok(cfg)
    }

    /// A configuration backed by a matrix model, whose root datum it uses.
    pub fn model_backed(
        model: Arc<AdaptedModel>,
        set: SimpleOrthogonalSet,
        b_basis: Vec<Vec<f64>>,
        xi_index: Vec<usize>,
        offsets: Vec<f64>,
    ) -> Result<Self> {
        let mut cfg = FoliationConfig::new(model.datum().clone(), set, b_basis, xi_index, offsets)?;
        cfg.model = Some(model);
        Ok(cfg)
    }

    /// The first `k` orthogonal simple roots, and `b` spanned by the first
    /// `b_dim` vectors of the orthogonal complement of their `H_lambda`.
    pub fn canonical(
        datum: RootDatum,
        model: Option<Arc<AdaptedModel>>,
        k: usize,
        b_dim: usize,
        offsets: Vec<f64>,
        xi_index: Vec<usize>,
    ) -> Result<Self> {
        let set = SimpleOrthogonalSet::first_orthogonal(&datum, k)?;
        let b_basis = canonical_b(&datum, &set, b_dim)?;
        match model {
            Some(m) => FoliationConfig::model_backed(m, set, b_basis, xi_index, offsets),
            None => FoliationConfig::new(datum, set, b_basis, xi_index, offsets),
        }
    }

    pub fn for_model(id: ModelId, k: usize, b_dim: usize, offsets: Vec<f64>) -> Result<Self> {
        let m = adapted(id)?;
        FoliationConfig::canonical(m.datum().clone(), Some(m), k, b_dim, offsets, Vec::new())
    }

    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let set = SimpleOrthogonalSet::new(file.chosen_roots);
        match file.model {
            Some(id) => {
                let m = adapted(id.parse()?)?;
                if let Some(d) = &file.root_datum {
                    let same = d.rank == m.datum().rank
                        && d.mult == m.datum().mult
                        && d.double_mult == m.datum().double_mult
                        && d.roots.len() == m.datum().roots.len()
                        && d.roots
                            .iter()
                            .zip(&m.datum().roots)
                            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= root_data::TAU_ROOT));
                    if !same {
                        return Err(Error::Config("root_datum does not match the model's decomposition".into()));
                    }
                }
                FoliationConfig::model_backed(m, set, file.b_basis, file.xi_index, file.offsets)
            }
            None => {
                let d =
                    file.root_datum.ok_or_else(|| Error::Config("either model or root_datum is required".into()))?;
                FoliationConfig::new(d, set, file.b_basis, file.xi_index, file.offsets)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(s)?;
        FoliationConfig::from_file(file)
    }

    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            model: self.model.as_ref().map(|m| m.model().id().to_string()),
            root_datum: Some(self.datum.clone()),
            b_basis: self.b_basis.clone(),
            chosen_roots: self.set.indices.clone(),
            xi_index: self.xi_index.clone(),
            offsets: self.offsets.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let rep = validate_orthogonal_set(&self.datum, &self.set);
        if !rep.valid {
            return Err(Error::Config(format!(
                "chosen roots are not a simple orthogonal set: out of range {:?}, duplicates {:?}, not simple {:?}, not orthogonal {:?}",
                rep.out_of_range, rep.duplicates, rep.non_simple, rep.non_orthogonal
            )));
        }
        root_data::check_b_basis(&self.datum, &self.set, &self.b_basis)?;
        if self.set.is_empty() && self.b_basis.is_empty() {
            return Err(Error::Config("k = 0 needs a nonzero b (otherwise there is a single leaf)".into()));
        }
        if self.xi_index.len() != self.set.len() {
            return Err(Error::Config(format!(
                "xi_index has {} entries for k = {}",
                self.xi_index.len(),
                self.set.len()
            )));
        }
        for (pos, (&ri, &xi)) in self.set.indices.iter().zip(&self.xi_index).enumerate() {
            if xi >= self.datum.mult[ri] {
                return Err(Error::Config(format!(
                    "xi_index[{pos}] = {xi} but the root space has dimension {}",
                    self.datum.mult[ri]
                )));
            }
        }
        if self.offsets.len() != self.set.len() {
            return Err(Error::Config(format!(
                "offsets has {} entries for k = {}",
                self.offsets.len(),
                self.set.len()
            )));
        }
        if self.offsets.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("offsets must be finite".into()));
        }
        Ok(())
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn set(&self) -> &SimpleOrthogonalSet {
        &self.set
    }

    pub fn b_basis(&self) -> &[Vec<f64>] {
        &self.b_basis
    }

    pub fn xi_index(&self) -> &[usize] {
        &self.xi_index
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn model(&self) -> Option<&Arc<AdaptedModel>> {
        self.model.as_ref()
    }

    pub fn k(&self) -> usize {
        self.set.len()
    }

    pub fn m0(&self) -> usize {
        self.b_basis.len()
    }

    /// Results are verified only when a matrix model backs the data.
    pub fn is_verified(&self) -> bool {
        self.model.is_some()
    }

    /// `||lambda_i||` for the chosen root at position `i`.
    pub fn norm(&self, i: usize) -> f64 {
        self.datum.norm(self.set.indices[i])
    }

    pub fn with_offsets(&self, offsets: Vec<f64>) -> Result<Self> {
        let mut c = self.clone();
        c.offsets = offsets;
        c.validate()?;
        Ok(c)
    }

    pub fn coefficients(&self) -> Result<CoefficientRecord> {
        mean_curvature_coefficients(&self.datum, &self.set, &self.b_basis)
    }

    /// Resolve a normal selector to `a`-coordinates of `xi_0` or a root position.
    pub(crate) fn check_normal(&self, normal: &Normal) -> Result<()> {
        match normal {
            Normal::Root(i) if *i < self.k() => Ok(()),
            Normal::Root(i) => Err(Error::Domain(format!("xi^{} does not exist for k = {}", i + 1, self.k()))),
            Normal::Flat(v) => {
                if v.len() != self.datum.rank {
                    return Err(Error::Domain(format!(
                        "xi_0 has {} coordinates, rank is {}",
                        v.len(),
                        self.datum.rank
                    )));
                }
                let x = Vector::from_column_slice(v);
                let mut resid = x.clone();
                for e in &self.b_basis {
                    let e = Vector::from_column_slice(e);
                    resid -= &e * e.dot(&x);
                }
                if resid.amax() > 1e-9 * x.amax().max(1.0) {
                    return Err(Error::Domain("xi_0 is not in b".into()));
                }
                Ok(())
            }
        }
    }

    /// Every unit normal generator: the `b` basis followed by `xi^i_{t_i}`.
    pub fn normal_generators(&self) -> Vec<Normal> {
        let mut out: Vec<Normal> = self.b_basis.iter().map(|e| Normal::Flat(e.clone())).collect();
        out.extend((0..self.k()).map(Normal::Root));
        out
    }

    pub fn normal_label(&self, normal: &Normal) -> String {
        match normal {
            Normal::Root(i) => format!("xi_t[{}]", i + 1),
            Normal::Flat(v) => match self.b_basis.iter().position(|e| e == v) {
                Some(p) => format!("xi_0[{}]", p + 1),
                None => "xi_0".into(),
            },
        }
    }
}

/// First `b_dim` vectors of the orthonormal complement of the chosen `H_lambda` in `a`.
pub fn canonical_b(datum: &RootDatum, set: &SimpleOrthogonalSet, b_dim: usize) -> Result<Vec<Vec<f64>>> {
    let r = datum.rank;
    let hs: Vec<Vector> = set.indices.iter().map(|&i| Vector::from_column_slice(&datum.roots[i]).normalize()).collect();
    let span = linalg::gram_schmidt(&hs, None, 1e-12);
    let ambient: Vec<Vector> = (0..r).map(|i| linalg::unit(r, i)).collect();
    let comp = linalg::complement_in(&ambient, &span, 1e-9);
    if b_dim > comp.len() {
        return Err(Error::Config(format!(
            "b can have dimension at most {} for rank {r} and k = {}",
            comp.len(),
            set.len()
        )));
    }
    Ok(comp
        .into_iter()
        .take(b_dim)
        .map(|v| v.iter().map(|x| if x.abs() < 1e-15 { 0.0 } else { *x }).collect())
        .collect())
}
