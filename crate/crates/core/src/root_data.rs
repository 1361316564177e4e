//! Abstract restricted root data, independent of any matrix model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_oracle::ModelId;

/// Tolerance for equality of root vectors.
pub const TAU_ROOT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Provenance {
    Model(ModelId),
    /// Hand-written or hypothetical data; results derived from it are unverified.
    #[default]
    Synthetic,
}

/// Positive roots as vectors `H_lambda` in orthonormal `a` coordinates.
///
/// `roots` lists every positive root, including doubled ones, and
/// `double_mult[i]` is the multiplicity of `2 roots[i]` (zero when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDatum")]
pub struct RootDatum {
    pub rank: usize,
    pub roots: Vec<Vec<f64>>,
    pub mult: Vec<usize>,
    pub double_mult: Vec<usize>,
    #[serde(skip)]
    provenance: Provenance,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    rank: usize,
    roots: Vec<Vec<f64>>,
    mult: Vec<usize>,
    double_mult: Vec<usize>,
}

impl TryFrom<RawDatum> for RootDatum {
    type Error = Error;

    fn try_from(raw: RawDatum) -> Result<Self> {
        RootDatum::new(raw.rank, raw.roots, raw.mult, raw.double_mult)
    }
}

/// How two positive roots `lambda`, `mu` are related.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootRelation {
    /// `lambda - mu` is a positive root (its index).
    LambdaMinusMu(usize),
    Equal,
    /// `mu - lambda` is a positive root (its index).
    MuMinusLambda(usize),
    Unrelated,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TAU_ROOT)
}

impl RootDatum {
    pub(crate) fn empty(rank: usize) -> Self {
        RootDatum {
            rank,
            roots: Vec::new(),
            mult: Vec::new(),
            double_mult: Vec::new(),
            provenance: Provenance::Synthetic,
        }
    }

    pub fn new(rank: usize, roots: Vec<Vec<f64>>, mult: Vec<usize>, double_mult: Vec<usize>) -> Result<Self> {
        let bad = |s: String| Err(Error::Config(format!("root datum: {s}")));
        if rank == 0 {
            return bad("rank must be positive".into());
        }
        if roots.is_empty() {
            return bad("at least one positive root is required".into());
        }
        if mult.len() != roots.len() || double_mult.len() != roots.len() {
            return bad(format!(
                "roots, mult and double_mult must have equal length ({}, {}, {})",
                roots.len(),
                mult.len(),
                double_mult.len()
            ));
        }
        for (i, r) in roots.iter().enumerate() {
            if r.len() != rank {
                return bad(format!("root {i} has {} coordinates, rank is {rank}", r.len()));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return bad(format!("root {i} is not finite"));
            }
            if dot(r, r).sqrt() <= TAU_ROOT {
                return bad(format!("root {i} is zero"));
            }
            if mult[i] == 0 {
                return bad(format!("root {i} has multiplicity 0"));
            }
        }
        for i in 0..roots.len() {
            for j in 0..roots.len() {
                if i == j {
                    continue;
                }
                if close(&roots[i], &roots[j]) {
                    return bad(format!("roots {i} and {j} coincide"));
                }
                // negative multiple check via parallel vectors with opposite direction
                let (ri, rj) = (&roots[i], &roots[j]);
                let c = dot(ri, rj);
                let parallel = (c * c - dot(ri, ri) * dot(rj, rj)).abs() <= TAU_ROOT * dot(ri, ri) * dot(rj, rj);
                if parallel && c < 0.0 {
                    return bad(format!("root {j} is a negative multiple of root {i}"));
                }
            }
            let twice: Vec<f64> = roots[i].iter().map(|x| 2.0 * x).collect();
            let found = roots.iter().position(|r| close(r, &twice));
            match found {
                Some(j) if double_mult[i] != mult[j] => {
                    return bad(format!(
                        "double_mult[{i}] = {} but 2 roots[{i}] = roots[{j}] has multiplicity {}",
                        double_mult[i], mult[j]
                    ))
                }
                None if double_mult[i] != 0 => {
                    return bad(format!("double_mult[{i}] = {} but 2 roots[{i}] is not listed", double_mult[i]))
                }
                _ => {}
            }
        }
        Ok(RootDatum { rank, roots, mult, double_mult, provenance: Provenance::Synthetic })
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_verified(&self) -> bool {
        matches!(self.provenance, Provenance::Model(_))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn norm(&self, i: usize) -> f64 {
        dot(&self.roots[i], &self.roots[i]).sqrt()
    }

    pub fn inner(&self, i: usize, j: usize) -> f64 {
        dot(&self.roots[i], &self.roots[j])
    }

    /// `lambda(v)` for `v` in orthonormal `a` coordinates.
    pub fn eval(&self, i: usize, v: &[f64]) -> f64 {
        dot(&self.roots[i], v)
    }

    pub fn find(&self, v: &[f64]) -> Option<usize> {
        self.roots.iter().position(|r| close(r, v))
    }

    pub fn is_doubled(&self, i: usize) -> bool {
        self.double_mult[i] > 0
    }

    /// Index of `2 roots[i]` when it is a root.
    pub fn double_of(&self, i: usize) -> Option<usize> {
        let twice: Vec<f64> = self.roots[i].iter().map(|x| 2.0 * x).collect();
        self.find(&twice)
    }

    pub fn relation(&self, lambda: usize, mu: usize) -> RootRelation {
        if lambda == mu {
            return RootRelation::Equal;
        }
        let diff: Vec<f64> = self.roots[lambda].iter().zip(&self.roots[mu]).map(|(a, b)| a - b).collect();
        if let Some(k) = self.find(&diff) {
            return RootRelation::LambdaMinusMu(k);
        }
        let neg: Vec<f64> = diff.iter().map(|x| -x).collect();
        if let Some(k) = self.find(&neg) {
            return RootRelation::MuMinusLambda(k);
        }
        RootRelation::Unrelated
    }

    /// A positive root is simple iff it is not the sum of two positive roots.
    pub fn is_simple(&self, i: usize) -> bool {
        for a in 0..self.len() {
            for b in a..self.len() {
                let s: Vec<f64> = self.roots[a].iter().zip(&self.roots[b]).map(|(x, y)| x + y).collect();
                if close(&s, &self.roots[i]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn simple_roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_simple(i)).collect()
    }
}

/// Indices of chosen roots `lambda_1, ..., lambda_k` in a datum.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimpleOrthogonalSet {
    pub indices: Vec<usize>,
}

impl SimpleOrthogonalSet {
    pub fn new(indices: Vec<usize>) -> Self {
        SimpleOrthogonalSet { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The first `k` simple roots, taken greedily in root order, that are mutually orthogonal.
    pub fn first_orthogonal(datum: &RootDatum, k: usize) -> Result<Self> {
        let mut chosen: Vec<usize> = Vec::new();
        for i in datum.simple_roots() {
            if chosen.len() == k {
                break;
            }
            if chosen.iter().all(|&j| datum.inner(i, j).abs() <= TAU_ROOT) {
                chosen.push(i);
            }
        }
        if chosen.len() < k {
            return Err(Error::Config(format!(
                "the datum has at most {} mutually orthogonal simple roots, k = {k} requested",
                chosen.len()
            )));
        }
        Ok(SimpleOrthogonalSet { indices: chosen })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub out_of_range: Vec<usize>,
    pub duplicates: Vec<usize>,
    pub non_simple: Vec<usize>,
    /// `(i, j, <H_i, H_j>)` for chosen pairs that are not orthogonal.
    pub non_orthogonal: Vec<(usize, usize, f64)>,
    /// Per chosen root, whether `2 lambda_i` is a root.
    pub doubled: Vec<bool>,
}

pub fn validate_orthogonal_set(datum: &RootDatum, set: &SimpleOrthogonalSet) -> ValidationReport {
    let mut rep = ValidationReport {
        valid: true,
        out_of_range: Vec::new(),
        duplicates: Vec::new(),
        non_simple: Vec::new(),
        non_orthogonal: Vec::new(),
        doubled: Vec::new(),
    };
    let mut seen = Vec::new();
    for &i in &set.indices {
        if i >= datum.len() {
            rep.out_of_range.push(i);
            continue;
        }
        if seen.contains(&i) {
            rep.duplicates.push(i);
        }
        seen.push(i);
        if !datum.is_simple(i) {
            rep.non_simple.push(i);
        }
        rep.doubled.push(datum.is_doubled(i));
    }
    let ok: Vec<usize> = set.indices.iter().copied().filter(|&i| i < datum.len()).collect();
    for a in 0..ok.len() {
        for b in (a + 1)..ok.len() {
            let ip = datum.inner(ok[a], ok[b]);
            if ok[a] != ok[b] && ip.abs() > TAU_ROOT {
                rep.non_orthogonal.push((ok[a], ok[b], ip));
            }
        }
    }
    rep.valid = rep.out_of_range.is_empty()
        && rep.duplicates.is_empty()
        && rep.non_simple.is_empty()
        && rep.non_orthogonal.is_empty();
    rep
}

/// One decay slot of the section flow: `||lambda_j||`, `m_lambda_j`, `m_2lambda_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySlot {
    pub norm: f64,
    pub mult: usize,
    pub double_mult: usize,
}

impl DecaySlot {
    pub fn weight(&self) -> f64 {
        (self.mult + 2 * self.double_mult) as f64
    }

    /// `||lambda||^2 (m_lambda + 2 m_2lambda)`.
    pub fn decay_rate(&self) -> f64 {
        self.norm * self.norm * self.weight()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    /// `sum_lambda m_lambda <H_lambda, e0_i>` per basis vector of `b`.
    pub drift: Vec<f64>,
    pub slots: Vec<DecaySlot>,
}

impl CoefficientRecord {
    pub fn dim(&self) -> usize {
        self.drift.len() + self.slots.len()
    }

    pub fn m0(&self) -> usize {
        self.drift.len()
    }

    pub fn decay_rates(&self) -> Vec<f64> {
        self.slots.iter().map(DecaySlot::decay_rate).collect()
    }
}

/// Check that `b_basis` is orthonormal in `a` and orthogonal to every chosen `H_lambda_i`.
pub fn check_b_basis(datum: &RootDatum, set: &SimpleOrthogonalSet, b_basis: &[Vec<f64>]) -> Result<()> {
    for (i, e) in b_basis.iter().enumerate() {
        if e.len() != datum.rank {
            return Err(Error::Config(format!("b_basis[{i}] has {} coordinates, rank is {}", e.len(), datum.rank)));
        }
        for (j, f) in b_basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot(e, f) - target).abs() > 1e-9 {
                return Err(Error::Config("b_basis is not orthonormal".into()));
            }
        }
        for &l in &set.indices {
            if l < datum.len() && datum.eval(l, e).abs() > 1e-9 {
                return Err(Error::Config(format!("b_basis[{i}] is not orthogonal to H of root {l}")));
            }
        }
    }
    if b_basis.len() + set.len() > datum.rank {
        return Err(Error::Config("dim b + k exceeds the rank".into()));
    }
    Ok(())
}

pub fn mean_curvature_coefficients(
    datum: &RootDatum,
    set: &SimpleOrthogonalSet,
    b_basis: &[Vec<f64>],
) -> Result<CoefficientRecord> {
    check_b_basis(datum, set, b_basis)?;
    let drift =
        b_basis.iter().map(|e| (0..datum.len()).map(|l| datum.mult[l] as f64 * datum.eval(l, e)).sum()).collect();
    let slots = set
        .indices
        .iter()
        .map(|&i| {
            if i >= datum.len() {
                return Err(Error::Config(format!("root index {i} out of range")));
            }
            Ok(DecaySlot { norm: datum.norm(i), mult: datum.mult[i], double_mult: datum.double_mult[i] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientRecord { drift, slots })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> RootDatum {
        let s = 3f64.sqrt();
        RootDatum::new(2, vec![vec![0.5, -s / 2.0], vec![0.5, s / 2.0], vec![1.0, 0.0]], vec![1, 1, 1], vec![0, 0, 0])
            .unwrap()
    }

    fn bc1() -> RootDatum {
        RootDatum::new(1, vec![vec![0.3], vec![0.6]], vec![2, 1], vec![1, 0]).unwrap()
    }

    #[test]
    fn simple_roots_of_a2() {
        assert_eq!(a2().simple_roots(), vec![0, 1]);
    }

    #[test]
    fn singleton_is_valid_adjacent_pair_is_not() {
        let d = a2();
        assert!(validate_orthogonal_set(&d, &SimpleOrthogonalSet::new(vec![0])).valid);
        let rep = validate_orthogonal_set(&d, &SimpleOrthogonalSet::new(vec![0, 1]));
        assert!(!rep.valid);
        assert_eq!(rep.non_orthogonal.len(), 1);
        let rep = validate_orthogonal_set(&d, &SimpleOrthogonalSet::new(vec![2]));
        assert_eq!(rep.non_simple, vec![2]);
    }

    #[test]
    fn doubling_flag_is_reported() {
        let rep = validate_orthogonal_set(&bc1(), &SimpleOrthogonalSet::new(vec![0]));
        assert!(rep.valid);
        assert_eq!(rep.doubled, vec![true]);
    }

    #[test]
    fn inconsistent_double_mult_is_rejected() {
        assert!(RootDatum::new(1, vec![vec![0.3], vec![0.6]], vec![2, 1], vec![0, 0]).is_err());
        assert!(RootDatum::new(1, vec![vec![0.3]], vec![2], vec![1]).is_err());
        assert!(RootDatum::new(1, vec![vec![0.3], vec![-0.6]], vec![1, 1], vec![0, 0]).is_err());
    }

    #[test]
    fn json_round_trip_uses_fixed_field_names() {
        let d = bc1();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"double_mult\""));
        let back = RootDatum::from_json(&s).unwrap();
        assert_eq!(back, d);
        assert!(!back.is_verified());
    }

    #[test]
    fn coefficients_for_empty_b() {
        let rec = mean_curvature_coefficients(&bc1(), &SimpleOrthogonalSet::new(vec![0]), &[]).unwrap();
        assert!(rec.drift.is_empty());
        assert!((rec.slots[0].decay_rate() - 0.09 * 4.0).abs() < 1e-15);
    }

    #[test]
    fn b_basis_must_be_orthogonal_to_chosen_roots() {
        let d = a2();
        let err = mean_curvature_coefficients(&d, &SimpleOrthogonalSet::new(vec![2]), &[vec![1.0, 0.0]]);
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
