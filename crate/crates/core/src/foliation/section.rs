//! The flat section through `e`, its chart `phi = (u_1, ..., u_{m0+k})`, the
//! parallel frame along it, and the mean curvature vector of the leaf.

use serde::Serialize;

use crate::error::Result;
use crate::lie_oracle::geodesic::{integrate, DEFAULT_STEP};
use crate::lie_oracle::{geodesic::root_geodesic_velocity, Connection};
use crate::linalg::{self, Matrix, Vector};

use super::operators::{oracle_shape_operator, shape_operator};
use super::FoliationConfig;

/// Parallel transport of the section frame along one geodesic of the section.
#[derive(Debug, Clone, Serialize)]
pub struct TransportCheck {
    /// Frame field generating the geodesic.
    pub direction: String,
    pub s_range: [f64; 2],
    /// Largest component of a transported frame vector outside the section's tangent space.
    pub tangent_deviation: f64,
    /// Largest drift of the Gram matrix of the transported frame.
    pub gram_drift: f64,
    /// Largest deviation of the velocity from its closed form.
    pub velocity_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionChart {
    /// `phi` at the base point `x_{0, t_1..t_k}`: zeros for `b`, then the offsets.
    pub coords: Vec<f64>,
    /// Frame labels: `E0[i]` along `b`, then `E[j]`.
    pub frame: Vec<String>,
    /// Frame vectors at `e` in adapted coordinates (model-backed only).
    pub frame_at_origin: Vec<Vec<f64>>,
    /// Deviation of the frame at `e` from orthonormality.
    pub orthonormality: f64,
    pub transport: Vec<TransportCheck>,
    pub verified: bool,
}

/// Trace of a shape operator checked against the mean curvature component.
#[derive(Debug, Clone, Serialize)]
pub struct TraceCheck {
    pub normal: String,
    pub expected: f64,
    pub closed_form_trace: f64,
    pub oracle_trace: Option<f64>,
    pub deviation: f64,
}

/// Mean curvature vector of the leaf through `x_{0, t}` in frame coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct MeanCurvature {
    /// Components on `E0[i]`.
    pub drift: Vec<f64>,
    /// Components on `E[j]`: `-||lambda_j|| tanh(||lambda_j|| t_j)(m + 2 m2)`.
    pub slots: Vec<f64>,
    pub traces: Vec<TraceCheck>,
    pub verified: bool,
}

impl MeanCurvature {
    pub fn vector(&self) -> Vec<f64> {
        self.drift.iter().chain(&self.slots).copied().collect()
    }
}

/// Half-length of the transported segment on each side of `e`.
pub const TRANSPORT_RANGE: f64 = 2.0;

/// Chart and frame of the section; when model-backed, transports the frame
/// `E0[i] = e0_i`, `E[j] = xi^j` along each geodesic `s -> Exp(s xi^j)` and
/// `s -> Exp(s e0_i)` and checks it stays tangent to the section and orthonormal.
pub fn section_chart(cfg: &FoliationConfig) -> Result<SectionChart> {
    let m0 = cfg.m0();
    let k = cfg.k();
    let mut coords = vec![0.0; m0];
    coords.extend_from_slice(cfg.offsets());
    let mut frame: Vec<String> = (1..=m0).map(|i| format!("E0[{i}]")).collect();
    frame.extend((1..=k).map(|j| format!("E[{j}]")));

    let Some(m) = cfg.model() else {
        return Ok(SectionChart {
            coords,
            frame,
            frame_at_origin: Vec::new(),
            orthonormality: 0.0,
            transport: Vec::new(),
            verified: false,
        });
    };
    let n = m.dim();
    let b: Vec<Vector> = cfg.b_basis().iter().map(|e| m.a_vector(e)).collect();
    let xis: Vec<Vector> = cfg
        .set()
        .indices
        .iter()
        .zip(cfg.xi_index())
        .map(|(&ri, &x)| linalg::unit(n, m.roots()[ri].offset + x))
        .collect();
    let fields: Vec<Vector> = b.iter().chain(&xis).cloned().collect();
    let f = linalg::columns(n, &fields);
    let orthonormality = (f.transpose() * &f - Matrix::identity(fields.len(), fields.len())).amax();

    let conn = Connection::milnor(m)?;
    let mut transport = Vec::new();
    for (dir, v) in fields.iter().enumerate() {
        let root = if dir >= m0 { Some(cfg.set().indices[dir - m0]) } else { None };
        let mut tangent_deviation = 0.0_f64;
        let mut gram_drift = 0.0_f64;
        let mut velocity_deviation = 0.0_f64;
        for s_end in [TRANSPORT_RANGE, -TRANSPORT_RANGE] {
            for sample in integrate(m, &conn, v, &fields, s_end, DEFAULT_STEP, 100)? {
                // tangent space of the section along the geodesic: the other frame fields and the velocity
                let mut span: Vec<Vector> =
                    fields.iter().enumerate().filter(|(i, _)| *i != dir).map(|(_, x)| x.clone()).collect();
                span.push(sample.velocity.clone());
                let span = linalg::gram_schmidt(&span, None, 1e-12);
                let p = linalg::columns(n, &span);
                let proj = &p * p.transpose();
                for x in &sample.transported {
                    tangent_deviation = tangent_deviation.max((x - &proj * x).amax());
                }
                let t = linalg::columns(n, &sample.transported);
                let g = t.transpose() * &t - Matrix::identity(fields.len(), fields.len());
                gram_drift = gram_drift.max(g.amax());
                let expected = match root {
                    Some(ri) => root_geodesic_velocity(m, ri, v, sample.s),
                    None => v.clone(),
                };
                velocity_deviation = velocity_deviation.max((&sample.velocity - expected).amax());
            }
        }
        transport.push(TransportCheck {
            direction: frame[dir].clone(),
            s_range: [-TRANSPORT_RANGE, TRANSPORT_RANGE],
            tangent_deviation,
            gram_drift,
            velocity_deviation,
        });
    }

    Ok(SectionChart {
        coords,
        frame,
        frame_at_origin: fields.iter().map(|v| v.iter().copied().collect()).collect(),
        orthonormality,
        transport,
        verified: true,
    })
}

/// Mean curvature vector `H = sum_v tr(A_v) v` over the normal generators, in
/// frame coordinates, with each component checked against a trace.
pub fn leaf_mean_curvature(cfg: &FoliationConfig) -> Result<MeanCurvature> {
    let coeffs = cfg.coefficients()?;
    let drift = coeffs.drift.clone();
    let slots: Vec<f64> =
        coeffs.slots.iter().zip(cfg.offsets()).map(|(s, &t)| -s.norm * (s.norm * t).tanh() * s.weight()).collect();
    let expected: Vec<f64> = drift.iter().chain(&slots).copied().collect();
    let mut traces = Vec::new();
    for (normal, want) in cfg.normal_generators().into_iter().zip(expected) {
        let closed = shape_operator(cfg, &normal)?.trace();
        let oracle = match cfg.model() {
            Some(_) => Some(oracle_shape_operator(cfg, &normal)?.trace()),
            None => None,
        };
        let deviation = (closed - want).abs().max(oracle.map_or(0.0, |o| (o - want).abs()));
        traces.push(TraceCheck {
            normal: cfg.normal_label(&normal),
            expected: want,
            closed_form_trace: closed,
            oracle_trace: oracle,
            deviation,
        });
    }
    Ok(MeanCurvature { drift, slots, traces, verified: cfg.is_verified() })
}
