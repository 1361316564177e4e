//! Geodesics and parallel transport in the left trivialization.
//!
//! A geodesic `gamma` with `gamma' = (L_gamma)_* w` satisfies `w' = -nabla_w w`,
//! and a parallel field `(L_gamma)_* v` satisfies `v' = -nabla_w v`.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::connection::Connection;
use super::decomposition::AdaptedModel;

/// Default fixed step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct GeodesicSample {
    pub s: f64,
    /// Velocity in the left trivialization (adapted coordinates).
    pub velocity: Vector,
    /// Group element as a matrix of the realization.
    pub point: Matrix,
    /// Parallel fields along the curve, in the left trivialization.
    pub transported: Vec<Vector>,
}

fn check_finite(s: f64, w: &Vector, vs: &[Vector]) -> Result<()> {
    if w.iter().chain(vs.iter().flat_map(|v| v.iter())).all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration { time: s, reason: "non-finite geodesic state".into(), last_valid: Vec::new() })
    }
}

/// Integrate the geodesic with `w(0) = v` up to `s_end` (which may be negative),
/// transporting `fields` along it. Returns samples every `record_every` steps.
pub fn integrate(
    m: &AdaptedModel,
    conn: &Connection,
    v: &Vector,
    fields: &[Vector],
    s_end: f64,
    step: f64,
    record_every: usize,
) -> Result<Vec<GeodesicSample>> {
    let n = m.dim();
    if v.len() != n || fields.iter().any(|f| f.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if !(step > 0.0) || !s_end.is_finite() {
        return Err(Error::Config("geodesic step must be positive and the endpoint finite".into()));
    }
    let steps = (s_end.abs() / step).round().max(1.0) as usize;
    let h = s_end / steps as f64;
    let every = record_every.max(1);
    let size = m.model().basis()[0].nrows();

    let mut w = v.clone();
    let mut g = Matrix::identity(size, size);
    let mut vs: Vec<Vector> = fields.to_vec();
    let mat = |x: &Vector| m.model().matrix_of(&m.to_model(x));
    let sample = |k: usize, w: &Vector, g: &Matrix, vs: &[Vector]| GeodesicSample {
        s: h * k as f64,
        velocity: w.clone(),
        point: g.clone(),
        transported: vs.to_vec(),
    };
    let mut out = vec![sample(0, &w, &g, &vs)];

    for k in 1..=steps {
        // classical RK4 on (w, g, v_1, ..., v_p); the right-hand sides only depend on w
        let f = |w: &Vector| -conn.covariant(w, w);
        let w1 = w.clone();
        let k1 = f(&w1);
        let w2 = &w + &k1 * (h / 2.0);
        let k2 = f(&w2);
        let w3 = &w + &k2 * (h / 2.0);
        let k3 = f(&w3);
        let w4 = &w + &k3 * h;
        let k4 = f(&w4);

        let g1 = &g * mat(&w1);
        let g2 = (&g + &g1 * (h / 2.0)) * mat(&w2);
        let g3 = (&g + &g2 * (h / 2.0)) * mat(&w3);
        let g4 = (&g + &g3 * h) * mat(&w4);
        g += (g1 + g2 * 2.0 + g3 * 2.0 + g4) * (h / 6.0);

        for p in vs.iter_mut() {
            let a1 = -conn.covariant(&w1, p);
            let a2 = -conn.covariant(&w2, &(&*p + &a1 * (h / 2.0)));
            let a3 = -conn.covariant(&w3, &(&*p + &a2 * (h / 2.0)));
            let a4 = -conn.covariant(&w4, &(&*p + &a3 * h));
            *p += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        }
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        if let Err(Error::Integration { time, reason, .. }) = check_finite(h * k as f64, &w, &vs) {
            let last = out.last().map(|s| s.velocity.iter().copied().collect()).unwrap_or_default();
            return Err(Error::Integration { time, reason, last_valid: last });
        }
        if k % every == 0 || k == steps {
            out.push(sample(k, &w, &g, &vs));
        }
    }
    Ok(out)
}

/// Velocity `w(s)` of the geodesic with `w(0) = v`.
pub fn geodesic(m: &AdaptedModel, conn: &Connection, v: &Vector, s: f64, step: f64) -> Result<Vector> {
    if s == 0.0 {
        return Ok(v.clone());
    }
    let samples = integrate(m, conn, v, &[], s, step, usize::MAX)?;
    Ok(samples.last().expect("at least one sample").velocity.clone())
}

/// The velocity predicted for a unit `xi` in `g_lambda`:
/// `xi / cosh(L s) - tanh(L s) / L * H_lambda` with `L = ||lambda||`.
pub fn root_geodesic_velocity(m: &AdaptedModel, root: usize, xi: &Vector, s: f64) -> Vector {
    let h = m.root_vector(root);
    let l = h.norm();
    xi / (l * s).cosh() - h * ((l * s).tanh() / l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_oracle::decomposition::root_space_decomposition;
    use crate::lie_oracle::models::{build_model, ModelId};
    use crate::linalg::unit;

    #[test]
    fn flat_direction_is_constant() {
        let m = root_space_decomposition(build_model(ModelId::Sl3R).unwrap()).unwrap();
        let c = Connection::milnor(&m).unwrap();
        let v = unit(m.dim(), 1);
        let w = geodesic(&m, &c, &v, 2.0, 1e-3).unwrap();
        assert!((w - v).amax() < 1e-14);
    }

    #[test]
    fn su21_root_geodesic_matches_closed_form_at_one() {
        let m = root_space_decomposition(build_model(ModelId::Su21).unwrap()).unwrap();
        let c = Connection::milnor(&m).unwrap();
        let xi = unit(m.dim(), m.roots()[0].offset);
        let w = geodesic(&m, &c, &xi, 1.0, 1e-3).unwrap();
        assert!((w - root_geodesic_velocity(&m, 0, &xi, 1.0)).amax() < 1e-8);
    }

    #[test]
    fn velocity_keeps_unit_length() {
        let m = root_space_decomposition(build_model(ModelId::Su31).unwrap()).unwrap();
        let c = Connection::milnor(&m).unwrap();
        let v = (unit(m.dim(), 1) + unit(m.dim(), 5) + unit(m.dim(), 0)).normalize();
        let samples = integrate(&m, &c, &v, &[], -3.0, 1e-3, 500).unwrap();
        for s in samples {
            assert!((s.velocity.norm() - 1.0).abs() < 1e-10);
        }
    }
}
