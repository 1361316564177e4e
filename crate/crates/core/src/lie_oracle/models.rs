//! The shipped matrix models: `sl(n, R)` for n = 2, 3 and `su(n, 1)` for n = 2, 3.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::model::LieModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    #[serde(rename = "sl2r")]
    Sl2R,
    #[serde(rename = "sl3r")]
    Sl3R,
    #[serde(rename = "su21")]
    Su21,
    #[serde(rename = "su31")]
    Su31,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [ModelId::Sl2R, ModelId::Sl3R, ModelId::Su21, ModelId::Su31];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Sl2R => "sl2r",
            ModelId::Sl3R => "sl3r",
            ModelId::Su21 => "su21",
            ModelId::Su31 => "su31",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sl2r" => Ok(ModelId::Sl2R),
            "sl3r" => Ok(ModelId::Sl3R),
            "su21" => Ok(ModelId::Su21),
            "su31" => Ok(ModelId::Su31),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

fn elementary(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Real 2n x 2n matrix of the complex matrix `re + i im`.
fn realify(re: &Matrix, im: &Matrix) -> Matrix {
    let n = re.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(re);
    m.view_mut((0, n), (n, n)).copy_from(&(-im));
    m.view_mut((n, 0), (n, n)).copy_from(im);
    m.view_mut((n, n), (n, n)).copy_from(re);
    m
}

fn sl_n(n: usize) -> (Vec<Matrix>, Vec<Matrix>) {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                basis.push(elementary(n, i, j));
            }
        }
    }
    for k in 0..n - 1 {
        basis.push(elementary(n, k, k) - elementary(n, k + 1, k + 1));
    }
    // seeds chosen so that the lexicographic order makes n upper triangular
    let a = match n {
        2 => vec![elementary(2, 0, 0) - elementary(2, 1, 1)],
        3 => vec![
            elementary(3, 0, 0) - elementary(3, 2, 2),
            elementary(3, 0, 0) - elementary(3, 1, 1) * 2.0 + elementary(3, 2, 2),
        ],
        _ => unreachable!("only sl(2) and sl(3) are shipped"),
    };
    (basis, a)
}

/// `su(p, 1)` for the form `diag(1, ..., 1, -1)`, realified.
fn su_p1(p: usize) -> (Vec<Matrix>, Vec<Matrix>) {
    let n = p + 1;
    let zero = DMatrix::<f64>::zeros(n, n);
    let mut basis = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let e = elementary(n, i, j);
            let f = elementary(n, j, i);
            if j < p {
                basis.push(realify(&(&e - &f), &zero));
                basis.push(realify(&zero, &(&e + &f)));
            } else {
                basis.push(realify(&(&e + &f), &zero));
                basis.push(realify(&zero, &(&e - &f)));
            }
        }
    }
    for k in 0..n - 1 {
        basis.push(realify(&zero, &(elementary(n, k, k) - elementary(n, k + 1, k + 1))));
    }
    let a = vec![realify(&(elementary(n, 0, n - 1) + elementary(n, n - 1, 0)), &zero)];
    (basis, a)
}

/// Build the matrix model for an identifier.
pub fn build_model(id: ModelId) -> Result<LieModel> {
    let (basis, a, scale) = match id {
        ModelId::Sl2R => {
            let (b, a) = sl_n(2);
            (b, a, 4.0)
        }
        ModelId::Sl3R => {
            let (b, a) = sl_n(3);
            (b, a, 6.0)
        }
        // B = 2(p+1) Re tr over C, and the real trace doubles Re tr
        ModelId::Su21 => {
            let (b, a) = su_p1(2);
            (b, a, 3.0)
        }
        ModelId::Su31 => {
            let (b, a) = su_p1(3);
            (b, a, 4.0)
        }
    };
    LieModel::from_matrices(id, basis, a, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_the_classical_formulas() {
        let dims: Vec<usize> = ModelId::ALL.iter().map(|id| build_model(*id).unwrap().dim()).collect();
        assert_eq!(dims, vec![3, 8, 8, 15]);
    }

    #[test]
    fn ids_round_trip_and_reject_unknown() {
        for id in ModelId::ALL {
            assert_eq!(id.as_str().parse::<ModelId>().unwrap(), id);
        }
        assert!(matches!("so31".parse::<ModelId>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn structural_identities_hold() {
        for id in ModelId::ALL {
            let m = build_model(id).unwrap();
            assert!(m.jacobi_deviation() < 1e-10, "{id} jacobi");
            assert!(m.trace_form_deviation() < 1e-10, "{id} trace form");
            assert!(m.theta_deviation() < 1e-10, "{id} theta");
            let (k, p) = m.killing_signature();
            assert!(k > 0.0 && p > 0.0, "{id} signature");
        }
    }
}
