//! Restricted root space decomposition and the adapted basis of `a + n`.

use std::cmp::Ordering;

use nalgebra::{Cholesky, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::root_data::{Provenance, RootDatum};

use super::model::{LieModel, TAU_ALG};

/// Tolerance for grouping ad-eigenvalues into roots.
pub const TAU_EIG: f64 = 1e-8;

/// One positive root with its slice of the adapted basis.
#[derive(Debug, Clone)]
pub struct RootSpace {
    /// `H_lambda` in orthonormal `a` coordinates, i.e. `(lambda(e_1), ..., lambda(e_r))`.
    pub root: Vector,
    pub offset: usize,
    pub mult: usize,
}

impl RootSpace {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.mult
    }
}

/// Where an adapted basis vector lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    A(usize),
    Root { root: usize, index: usize },
}

/// Metric `<X, Y> = B(pr_p X, pr_p Y)` on `a + n` in adapted coordinates.
#[derive(Debug, Clone)]
pub struct MetricAN {
    /// Gram matrix of the adapted basis (identity up to rounding).
    pub inner: Matrix,
    /// Columns are `pr_p` of the adapted basis vectors, in model coordinates.
    pub projection_p: Matrix,
}

/// A matrix model together with its Iwasawa data and an orthonormal adapted basis.
#[derive(Debug, Clone)]
pub struct AdaptedModel {
    model: LieModel,
    a_basis: Vec<Vector>,
    k_basis: Vec<Vector>,
    roots: Vec<RootSpace>,
    embed: Matrix,
    left_inv: Matrix,
    metric_model: Matrix,
    structure: Vec<f64>,
    datum: RootDatum,
}

fn lex_cmp(a: &Vector, b: &Vector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > TAU_EIG {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

fn lex_sign(a: &Vector) -> i32 {
    for x in a.iter() {
        if x.abs() > TAU_EIG {
            return if *x > 0.0 { 1 } else { -1 };
        }
    }
    0
}

struct Cluster {
    q: Matrix,
    values: Vec<f64>,
}

fn split_cluster(c: &Cluster, s: &Matrix) -> Result<Vec<Cluster>> {
    let m = linalg::symmetrize(&(c.q.transpose() * s * &c.q));
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(Ordering::Equal));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 {
            let gap = eig.eigenvalues[idx] - eig.eigenvalues[order[pos - 1]];
            if gap > TAU_EIG && gap <= 1e3 * TAU_EIG {
                return Err(Error::Decomposition(format!(
                    "eigenvalue gap {gap:.3e} is too close to the clustering tolerance"
                )));
            }
            if gap > TAU_EIG {
                groups.push(Vec::new());
            }
        }
        if groups.is_empty() {
            groups.push(Vec::new());
        }
        groups.last_mut().expect("nonempty").push(idx);
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let u = Matrix::from_fn(eig.eigenvectors.nrows(), g.len(), |r, k| eig.eigenvectors[(r, g[k])]);
            let mean = g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64;
            let mut values = c.values.clone();
            values.push(mean);
            Cluster { q: &c.q * u, values }
        })
        .collect())
}

/// Diagonalize `{ad(a)}` simultaneously and build the adapted basis.
pub fn root_space_decomposition(model: LieModel) -> Result<AdaptedModel> {
    let d = model.dim();
    let b = model.killing().clone();
    let bt = model.b_theta();

    for s in model.a_seed() {
        let dev = (model.apply_theta(s) + s).amax();
        if dev > TAU_ALG * s.amax().max(1.0) {
            return Err(Error::Model("candidate a is not contained in p".into()));
        }
    }
    let a_basis = linalg::gram_schmidt(model.a_seed(), Some(&b), 1e-9);
    if a_basis.len() != model.a_seed().len() || a_basis.is_empty() {
        return Err(Error::Model("candidate a seeds are linearly dependent".into()));
    }
    for i in 0..a_basis.len() {
        for j in (i + 1)..a_basis.len() {
            if model.bracket(&a_basis[i], &a_basis[j])?.amax() > TAU_ALG {
                return Err(Error::Model("candidate a is not abelian".into()));
            }
        }
    }
    let r = a_basis.len();

    let chol = Cholesky::new(bt.clone()).ok_or_else(|| Error::Model("B_theta is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Model("singular Cholesky factor".into()))?;
    let l_inv_t = l_inv.transpose();

    let mut clusters = vec![Cluster { q: Matrix::identity(d, d), values: Vec::new() }];
    for a in &a_basis {
        let s = linalg::symmetrize(&(l.transpose() * model.ad(a)? * &l_inv_t));
        let mut next = Vec::new();
        for c in &clusters {
            next.extend(split_cluster(c, &s)?);
        }
        clusters = next;
    }

    let theta = model.theta().clone();
    let p_proj = (Matrix::identity(d, d) - &theta) * 0.5;
    let metric_model = p_proj.transpose() * &b * &p_proj;

    let mut positive: Vec<(Vector, Matrix)> = Vec::new();
    let mut negative: Vec<(Vector, usize)> = Vec::new();
    let mut zero_dim_p = 0usize;
    for c in &clusters {
        let root = Vector::from_vec(c.values.clone());
        let v = &l_inv_t * &c.q;
        match lex_sign(&root) {
            1 => positive.push((root, v)),
            -1 => negative.push((root, v.ncols())),
            _ => {
                let in_p = &p_proj * &v;
                let sv = in_p.singular_values();
                zero_dim_p += sv.iter().filter(|x| **x > 1e-8).count();
            }
        }
    }
    if zero_dim_p != r {
        return Err(Error::Model(format!(
            "candidate a is not maximal abelian in p (centralizer in p has dimension {zero_dim_p}, rank {r})"
        )));
    }
    for (root, v) in &positive {
        let neg = -root;
        let found = negative.iter().find(|(n, _)| lex_cmp(n, &neg) == Ordering::Equal);
        match found {
            Some((_, m)) if *m == v.ncols() => {}
            _ => return Err(Error::Decomposition("root system is not symmetric under negation".into())),
        }
    }
    positive.sort_by(|x, y| lex_cmp(&x.0, &y.0));

    let mut cols: Vec<Vector> = a_basis.clone();
    let mut roots = Vec::new();
    for (root, v) in &positive {
        let proj = v * v.transpose() * &bt;
        let candidates: Vec<Vector> = (0..d).map(|j| proj.column(j).into_owned()).collect();
        let q = linalg::gram_schmidt(&candidates, Some(&metric_model), 1e-8);
        let m = v.ncols();
        if q.len() < m {
            return Err(Error::Decomposition("could not span a root space from the model basis".into()));
        }
        roots.push(RootSpace { root: root.clone(), offset: cols.len(), mult: m });
        cols.extend(q.into_iter().take(m));
    }
    let n = cols.len();
    let embed = linalg::columns(d, &cols);
    let left_inv = (embed.transpose() * &embed)
        .try_inverse()
        .ok_or_else(|| Error::Decomposition("adapted basis is degenerate".into()))?
        * embed.transpose();

    let (k_basis, _) = model.cartan_split();

    let mut out = AdaptedModel {
        model,
        a_basis,
        k_basis,
        roots,
        embed,
        left_inv,
        metric_model,
        structure: vec![0.0; n * n * n],
        datum: RootDatum::empty(r),
    };
    for i in 0..n {
        for j in 0..n {
            let c = out.model.bracket(&out.embed.column(i).into_owned(), &out.embed.column(j).into_owned())?;
            let coords = out.from_model(&c)?;
            for k in 0..n {
                out.structure[(i * n + j) * n + k] = coords[k];
            }
        }
    }
    let root_vecs: Vec<Vec<f64>> = out.roots.iter().map(|s| s.root.iter().copied().collect()).collect();
    let mult: Vec<usize> = out.roots.iter().map(|s| s.mult).collect();
    let double_mult: Vec<usize> = out
        .roots
        .iter()
        .map(|s| {
            let twice = &s.root * 2.0;
            out.roots.iter().find(|o| lex_cmp(&o.root, &twice) == Ordering::Equal).map_or(0, |o| o.mult)
        })
        .collect();
    out.datum = RootDatum::new(r, root_vecs, mult, double_mult)?.with_provenance(Provenance::Model(out.model.id()));
    Ok(out)
}

impl AdaptedModel {
    pub fn model(&self) -> &LieModel {
        &self.model
    }

    pub fn rank(&self) -> usize {
        self.a_basis.len()
    }

    /// Dimension of `a + n`.
    pub fn dim(&self) -> usize {
        self.embed.ncols()
    }

    pub fn roots(&self) -> &[RootSpace] {
        &self.roots
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn a_basis(&self) -> &[Vector] {
        &self.a_basis
    }

    pub fn k_basis(&self) -> &[Vector] {
        &self.k_basis
    }

    /// Columns are the adapted basis vectors in model coordinates.
    pub fn embed(&self) -> &Matrix {
        &self.embed
    }

    /// Left inverse of `embed` (projects model coordinates onto `a + n`).
    pub fn left_inverse(&self) -> &Matrix {
        &self.left_inv
    }

    pub fn slot(&self, i: usize) -> Slot {
        if i < self.rank() {
            return Slot::A(i);
        }
        for (ri, rs) in self.roots.iter().enumerate() {
            if rs.range().contains(&i) {
                return Slot::Root { root: ri, index: i - rs.offset };
            }
        }
        panic!("index {i} out of range for a + n of dimension {}", self.dim())
    }

    pub fn to_model(&self, x: &Vector) -> Vector {
        &self.embed * x
    }

    /// Adapted coordinates of a model vector that must lie in `a + n`.
    pub fn from_model(&self, v: &Vector) -> Result<Vector> {
        let c = &self.left_inv * v;
        let resid = (&self.embed * &c - v).amax();
        if resid > 1e-9 * v.amax().max(1.0) {
            return Err(Error::UnsupportedArgument(format!(
                "vector has a component outside a + n (residual {resid:.3e})"
            )));
        }
        Ok(c)
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `[X, Y]` for `X, Y` in adapted coordinates.
    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check(x)?;
        self.check(y)?;
        let n = self.dim();
        let mut out = Vector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += xy * self.structure[base + k];
                }
            }
        }
        Ok(out)
    }

    pub fn ad(&self, x: &Vector) -> Result<Matrix> {
        self.check(x)?;
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for j in 0..n {
            m.set_column(j, &self.bracket(x, &linalg::unit(n, j))?);
        }
        Ok(m)
    }

    /// `theta X` in model coordinates (it leaves `a + n`).
    pub fn theta_model(&self, x: &Vector) -> Vector {
        self.model.apply_theta(&self.to_model(x))
    }

    /// `[U, V]` for model-coordinate vectors, mapped back into `a + n`.
    pub fn bracket_into_an(&self, u: &Vector, v: &Vector) -> Result<Vector> {
        self.from_model(&self.model.bracket(u, v)?)
    }

    pub fn metric(&self) -> MetricAN {
        let d = self.model.dim();
        let p = (Matrix::identity(d, d) - self.model.theta()) * 0.5;
        MetricAN { inner: self.embed.transpose() * &self.metric_model * &self.embed, projection_p: p * &self.embed }
    }

    /// `H_lambda` of root `ri` in adapted coordinates.
    pub fn root_vector(&self, ri: usize) -> Vector {
        let mut h = Vector::zeros(self.dim());
        for (i, x) in self.roots[ri].root.iter().enumerate() {
            h[i] = *x;
        }
        h
    }

    /// Embed an `a`-coordinate vector (length `rank`) into `a + n`.
    pub fn a_vector(&self, coords: &[f64]) -> Vector {
        let mut h = Vector::zeros(self.dim());
        for (i, x) in coords.iter().enumerate() {
            h[i] = *x;
        }
        h
    }

    /// Largest deviation of `[a, X] = lambda(a) X` over the adapted basis.
    pub fn root_eigen_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for (i, _) in self.a_basis.iter().enumerate() {
            let a = linalg::unit(n, i);
            for rs in &self.roots {
                for j in rs.range() {
                    let x = linalg::unit(n, j);
                    let lhs = self.bracket(&a, &x).expect("dims");
                    worst = worst.max((lhs - &x * rs.root[i]).amax());
                }
            }
        }
        worst
    }

    /// Smallest singular value of `[k | a + n]`; positive iff the Iwasawa sum is direct and full.
    pub fn iwasawa_gap(&self) -> f64 {
        let d = self.model.dim();
        if self.k_basis.len() + self.dim() != d {
            return 0.0;
        }
        let mut cols = self.k_basis.clone();
        cols.extend((0..self.dim()).map(|j| self.embed.column(j).into_owned()));
        let m = linalg::columns(d, &cols);
        m.singular_values().iter().fold(f64::INFINITY, |a, x| a.min(*x))
    }

    /// Named invariant deviations of the model and its decomposition.
    pub fn invariants(&self) -> Vec<(&'static str, f64)> {
        let (ks, ps) = self.model.killing_signature();
        let metric = self.metric();
        let n = self.dim();
        let mut abelian = 0.0_f64;
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                abelian = abelian.max(self.bracket(&linalg::unit(n, i), &linalg::unit(n, j)).expect("dims").amax());
            }
        }
        vec![
            ("jacobi", self.model.jacobi_deviation()),
            ("killing_trace_form", self.model.trace_form_deviation()),
            ("theta_involution", self.model.theta_deviation()),
            ("killing_negative_on_k", if ks > 0.0 { 0.0 } else { -ks + 1.0 }),
            ("killing_positive_on_p", if ps > 0.0 { 0.0 } else { -ps + 1.0 }),
            ("iwasawa_direct_sum", if self.iwasawa_gap() > 1e-8 { 0.0 } else { 1.0 }),
            ("a_abelian", abelian),
            ("root_eigen", self.root_eigen_deviation()),
            ("metric_orthonormal", (metric.inner - Matrix::identity(n, n)).amax()),
        ]
    }

    pub fn export(&self) -> AdaptedExport {
        let n = self.model.basis()[0].nrows();
        let to_rows = |m: &Matrix| -> Vec<Vec<f64>> { (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect() };
        let labels = (0..self.dim())
            .map(|i| match self.slot(i) {
                Slot::A(k) => format!("a[{}]", k + 1),
                Slot::Root { root, index } => format!("g[{}][{}]", root + 1, index + 1),
            })
            .collect();
        AdaptedExport {
            model: self.model.id().to_string(),
            dimension: self.model.dim(),
            rank: self.rank(),
            labels,
            basis: (0..self.dim())
                .map(|j| to_rows(&self.model.matrix_of(&self.embed.column(j).into_owned())))
                .collect(),
            k_basis: self.k_basis.iter().map(|v| to_rows(&self.model.matrix_of(v))).collect(),
            root_datum: self.datum.clone(),
        }
    }
}

/// JSON form of the adapted basis: matrices are row-major nested arrays.
#[derive(Debug, Clone, Serialize)]
pub struct AdaptedExport {
    pub model: String,
    pub dimension: usize,
    pub rank: usize,
    pub labels: Vec<String>,
    pub basis: Vec<Vec<Vec<f64>>>,
    pub k_basis: Vec<Vec<Vec<f64>>>,
    pub root_datum: RootDatum,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_oracle::models::{build_model, ModelId};

    fn adapted(id: ModelId) -> AdaptedModel {
        root_space_decomposition(build_model(id).unwrap()).unwrap()
    }

    #[test]
    fn sl3_has_three_simple_multiplicity_roots() {
        let m = adapted(ModelId::Sl3R);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.roots().len(), 3);
        assert!(m.roots().iter().all(|r| r.mult == 1));
        assert!(m.datum().double_mult.iter().all(|x| *x == 0));
    }

    #[test]
    fn su21_is_non_reduced() {
        let m = adapted(ModelId::Su21);
        let mults: Vec<usize> = m.roots().iter().map(|r| r.mult).collect();
        assert_eq!(mults, vec![2, 1]);
        assert!((m.roots()[1].root[0] - 2.0 * m.roots()[0].root[0]).abs() < 1e-12);
        assert_eq!(m.datum().double_mult, vec![1, 0]);
    }

    #[test]
    fn su31_multiplicities() {
        let m = adapted(ModelId::Su31);
        let mults: Vec<usize> = m.roots().iter().map(|r| r.mult).collect();
        assert_eq!(mults, vec![4, 1]);
    }

    #[test]
    fn invariants_hold_for_all_models() {
        for id in ModelId::ALL {
            let m = adapted(id);
            for (name, dev) in m.invariants() {
                assert!(dev < 1e-10, "{id} {name} {dev}");
            }
        }
    }

    #[test]
    fn non_abelian_seed_is_rejected() {
        let base = build_model(ModelId::Sl3R).unwrap();
        let e = |i: usize, j: usize| {
            let mut m = Matrix::zeros(3, 3);
            m[(i, j)] = 1.0;
            m
        };
        // two symmetric matrices in p that do not commute
        let seeds = vec![&e(0, 1) + &e(1, 0), &e(1, 2) + &e(2, 1)];
        let m = LieModel::from_matrices(ModelId::Sl3R, base.basis().to_vec(), seeds, 6.0).unwrap();
        assert!(matches!(root_space_decomposition(m), Err(Error::Model(_))));
    }

    #[test]
    fn non_maximal_seed_is_rejected() {
        let base = build_model(ModelId::Sl3R).unwrap();
        let seeds = vec![Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0, -1.0]))];
        let m = LieModel::from_matrices(ModelId::Sl3R, base.basis().to_vec(), seeds, 6.0).unwrap();
        assert!(matches!(root_space_decomposition(m), Err(Error::Model(_))));
    }
}
