//! Mean curvature flow of the leaves, reduced to an ODE on the flat section.
//!
//! In the chart `u = (u_1, ..., u_{m0}, u_{m0+1}, ..., u_{m0+k})` the flow is
//! `u' = Z(u)` with a constant drift on the `b` slots and
//! `Z_{m0+j} = -L_j (m_j + 2 m2_j) tanh(L_j u_{m0+j})` on the decay slots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::foliation::FoliationConfig;
use crate::root_data::CoefficientRecord;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 10.0;
/// A decay slot counts as converged below this magnitude.
pub const CONVERGED: f64 = 1e-10;

fn check_dim(coeffs: &CoefficientRecord, u: &[f64]) -> Result<()> {
    if u.len() != coeffs.dim() {
        return Err(Error::DimensionMismatch { expected: coeffs.dim(), got: u.len() });
    }
    Ok(())
}

/// `Z(u)`.
pub fn vector_field(coeffs: &CoefficientRecord, u: &[f64]) -> Result<Vec<f64>> {
    check_dim(coeffs, u)?;
    let m0 = coeffs.m0();
    let mut z = coeffs.drift.clone();
    for (j, s) in coeffs.slots.iter().enumerate() {
        z.push(-s.norm * s.weight() * (s.norm * u[m0 + j]).tanh());
    }
    Ok(z)
}

/// `asinh` with a series near zero (no cancellation) and odd symmetry.
pub fn asinh(x: f64) -> f64 {
    let a = x.abs();
    let r = if a < 1e-4 {
        let a2 = a * a;
        a * (1.0 - a2 / 6.0 + 3.0 * a2 * a2 / 40.0)
    } else {
        (a + (a * a + 1.0).sqrt()).ln()
    };
    r.copysign(x)
}

/// `asinh(exp(-rate t) sinh(y))`, evaluated through log magnitudes when `|y|` is large.
pub fn damped_asinh(y: f64, rate: f64, t: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if y.abs() <= 30.0 {
        return asinh((-rate * t).exp() * y.sinh());
    }
    // log|sinh y| = |y| - ln 2 + ln(1 - e^{-2|y|})
    let log_x = -rate * t + y.abs() - std::f64::consts::LN_2 + (-(-2.0 * y.abs()).exp()).ln_1p();
    let mag = if log_x > 20.0 {
        // asinh(x) = ln(2x) + 1/(4x^2) + O(x^-4)
        log_x + std::f64::consts::LN_2 + 0.25 * (-2.0 * log_x).exp()
    } else {
        asinh(log_x.exp())
    };
    mag.copysign(y)
}

/// Exact solution `c(t)` from `c(0) = u0`.
pub fn closed_form(coeffs: &CoefficientRecord, u0: &[f64], t: f64) -> Result<Vec<f64>> {
    check_dim(coeffs, u0)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("flow time must be non-negative, got {t}")));
    }
    let m0 = coeffs.m0();
    let mut c: Vec<f64> = coeffs.drift.iter().zip(u0).map(|(d, a)| a + t * d).collect();
    for (j, s) in coeffs.slots.iter().enumerate() {
        c.push(damped_asinh(s.norm * u0[m0 + j], s.decay_rate(), t) / s.norm);
    }
    Ok(c)
}

/// Distance between the flow from the leaf with offsets `t_j` and the flow
/// from the leaf through `Exp(b)`, at time `t`.
pub fn leaf_distance(coeffs: &CoefficientRecord, offsets: &[f64], t: f64) -> Result<f64> {
    if offsets.len() != coeffs.slots.len() {
        return Err(Error::DimensionMismatch { expected: coeffs.slots.len(), got: offsets.len() });
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("flow time must be non-negative, got {t}")));
    }
    Ok(coeffs
        .slots
        .iter()
        .zip(offsets)
        .map(|(s, &tj)| {
            let c = damped_asinh(s.norm * tj, s.decay_rate(), t) / s.norm;
            c * c
        })
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub coords: Vec<f64>,
    /// `||Z||` at the sample.
    pub speed: f64,
    /// Norm of the decay slots: distance to the reference flow through `Exp(b)`.
    pub dist_to_ref: f64,
    /// `||numeric - closed form||`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrajectory {
    pub m0: usize,
    pub step: f64,
    pub samples: Vec<FlowSample>,
}

impl FlowTrajectory {
    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("a trajectory has at least one sample")
    }

    /// CSV with header `t,u_1,...,speed,dist_to_ref,residual`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let dim = self.samples.first().map_or(0, |s| s.coords.len());
        let mut out = String::from("t");
        for i in 1..=dim {
            out.push_str(&format!(",u_{i}"));
        }
        out.push_str(",speed,dist_to_ref,residual\n");
        for s in &self.samples {
            let mut row = vec![fmt(s.t)];
            row.extend(s.coords.iter().map(|x| fmt(*x)));
            row.extend([fmt(s.speed), fmt(s.dist_to_ref), fmt(s.residual)]);
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// `d/dt log|c_{m0+j}|` from samples around `t`, by a centered difference over `window`.
    pub fn log_decay_rate(&self, j: usize, t: f64, window: f64) -> Option<f64> {
        let at = |time: f64| {
            self.samples
                .iter()
                .min_by(|a, b| (a.t - time).abs().total_cmp(&(b.t - time).abs()))
                .filter(|s| (s.t - time).abs() < 1e-9 + self.step)
        };
        let (lo, hi) = (at(t - window)?, at(t + window)?);
        let (a, b) = (lo.coords[self.m0 + j].abs(), hi.coords[self.m0 + j].abs());
        if a == 0.0 || b == 0.0 || hi.t <= lo.t {
            return None;
        }
        Some((b.ln() - a.ln()) / (hi.t - lo.t))
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + h * y).collect()
}

fn sample(coeffs: &CoefficientRecord, u0: &[f64], t: f64, u: &[f64]) -> Result<FlowSample> {
    let exact = closed_form(coeffs, u0, t)?;
    let residual = norm(&u.iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(FlowSample {
        t,
        coords: u.to_vec(),
        speed: norm(&vector_field(coeffs, u)?),
        dist_to_ref: norm(&u[coeffs.m0()..]),
        residual,
    })
}

/// Classical RK4 from `u0` to `horizon`, recording every `record_every` steps and the endpoint.
pub fn integrate(
    coeffs: &CoefficientRecord,
    u0: &[f64],
    horizon: f64,
    step: f64,
    record_every: usize,
) -> Result<FlowTrajectory> {
    check_dim(coeffs, u0)?;
    if !(horizon > 0.0) || !horizon.is_finite() || !(step > 0.0) {
        return Err(Error::Config("horizon and step must be positive and finite".into()));
    }
    if u0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("initial coordinates must be finite".into()));
    }
    let steps = (horizon / step).round().max(1.0) as usize;
    let h = horizon / steps as f64;
    let every = record_every.max(1);
    let mut u = u0.to_vec();
    let mut samples = vec![sample(coeffs, u0, 0.0, &u)?];
    for n in 1..=steps {
        let k1 = vector_field(coeffs, &u)?;
        let k2 = vector_field(coeffs, &axpy(&u, h / 2.0, &k1))?;
        let k3 = vector_field(coeffs, &axpy(&u, h / 2.0, &k2))?;
        let k4 = vector_field(coeffs, &axpy(&u, h, &k3))?;
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = h * n as f64;
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Integration {
                time: t,
                reason: "non-finite state".into(),
                last_valid: samples.last().map(|s| s.coords.clone()).unwrap_or_default(),
            });
        }
        if n % every == 0 || n == steps {
            samples.push(sample(coeffs, u0, t, &u)?);
        }
    }
    Ok(FlowTrajectory { m0: coeffs.m0(), step: h, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `b != 0` and every offset zero: the leaves move by a fixed translation.
    SelfSimilar,
    /// `b != 0` and some offset nonzero: approaches the self-similar flow through `Exp(b)`.
    AsymptotesReference,
    /// `b = 0`: converges to the unique minimal leaf.
    ConvergesToMinimal,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowVerdict {
    pub exists_for_all_time: bool,
    pub regime: Regime,
    /// `||lambda_j||^2 (m_j + 2 m2_j)` per decay slot.
    pub decay_exponents: Vec<f64>,
    pub drift: Vec<f64>,
    /// Root data came from a matrix model.
    pub verified: bool,
}

pub fn classify(cfg: &FoliationConfig) -> Result<FlowVerdict> {
    let coeffs = cfg.coefficients()?;
    let regime = if cfg.m0() == 0 {
        Regime::ConvergesToMinimal
    } else if cfg.offsets().iter().all(|t| *t == 0.0) {
        Regime::SelfSimilar
    } else {
        Regime::AsymptotesReference
    };
    Ok(FlowVerdict {
        exists_for_all_time: true,
        regime,
        decay_exponents: coeffs.decay_rates(),
        drift: coeffs.drift.clone(),
        verified: cfg.is_verified(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalLeaf {
    pub coords: Vec<f64>,
    /// `||Z||` at the returned point.
    pub speed: f64,
}

/// The zero of `Z`, if any. With `b = 0` it is the origin and unique, since each
/// decay slot is a strictly decreasing function of its own coordinate.
pub fn find_minimal_leaf(coeffs: &CoefficientRecord) -> Option<MinimalLeaf> {
    if coeffs.drift.iter().any(|d| *d != 0.0) {
        return None;
    }
    if coeffs.slots.iter().any(|s| !(s.decay_rate() > 0.0)) {
        return None;
    }
    let coords = vec![0.0; coeffs.dim()];
    let speed = norm(&vector_field(coeffs, &coords).ok()?);
    Some(MinimalLeaf { coords, speed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::DecaySlot;

    fn su21_like() -> CoefficientRecord {
        let l = 1.0 / (2.0 * 3f64.sqrt());
        CoefficientRecord { drift: vec![], slots: vec![DecaySlot { norm: l, mult: 2, double_mult: 1 }] }
    }

    #[test]
    fn asinh_matches_std() {
        for x in [-1e3, -2.0, -1e-5, 0.0, 3e-5, 0.4, 7.0, 1e8] {
            assert!((asinh(x) - f64::asinh(x)).abs() <= 1e-15 * x.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn large_offsets_stay_finite() {
        let c = su21_like();
        let v = closed_form(&c, &[4000.0], 1.0).unwrap()[0];
        assert!(v.is_finite() && v > 0.0 && v < 4000.0);
        // asinh(e^{-r t} sinh y) ~ y - r t for large y
        let s = &c.slots[0];
        let y = s.norm * 4000.0;
        assert!((v * s.norm - (y - s.decay_rate())).abs() < 1e-9);
    }

    #[test]
    fn closed_form_solves_the_ode() {
        let c = su21_like();
        for t in [0.1, 1.0, 5.0] {
            let h = 1e-6;
            let d =
                (closed_form(&c, &[1.3], t + h).unwrap()[0] - closed_form(&c, &[1.3], t - h).unwrap()[0]) / (2.0 * h);
            let z = vector_field(&c, &closed_form(&c, &[1.3], t).unwrap()).unwrap()[0];
            assert!((d - z).abs() < 1e-6);
        }
    }

    #[test]
    fn rk4_matches_closed_form() {
        let tr = integrate(&su21_like(), &[-1.7], 20.0, 1e-3, 100).unwrap();
        assert!(tr.max_residual() < 1e-8 * 2.7);
    }

    #[test]
    fn csv_header() {
        let tr = integrate(&su21_like(), &[1.0], 0.01, 1e-3, 5).unwrap();
        assert!(tr.to_csv().starts_with("t,u_1,speed,dist_to_ref,residual\n"));
    }
}
