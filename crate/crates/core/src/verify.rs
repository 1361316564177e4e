//! Closed forms against the matrix-model oracle, collected into one report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow;
use crate::foliation::{
    adaptedness, leaf_mean_curvature, normal_jacobi, oracle_normal_jacobi, oracle_shape_operator,
    published_doubled_jacobi, published_doubled_shape, published_kernel_jacobi, rotation_check, section_chart,
    shape_operator, BlockKind, FoliationConfig, Geometry, Normal, Verdict,
};
use crate::lie_oracle::geodesic::{integrate, root_geodesic_velocity, DEFAULT_STEP};
use crate::lie_oracle::{ad_star, metric_adjoint, AdaptedModel, Connection, TAU_ALG};
use crate::linalg::{self, Matrix, Vector};

pub const TAU_ODE: f64 = 1e-8;
/// Offsets swept by the operator checks.
pub const OFFSET_SWEEP: [f64; 6] = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A printed closed form that disagrees with the oracle, with both recorded.
#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub id: String,
    pub printed: Vec<Vec<f64>>,
    pub measured: Vec<Vec<f64>>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub model: String,
    pub k: usize,
    pub b_dim: usize,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub discrepancies: Vec<Discrepancy>,
    pub measurements: BTreeMap<String, f64>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect()
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, id: impl Into<String>, dev: f64, tol: f64) {
        self.0.push(Check { id: id.into(), max_deviation: dev, tolerance: tol, pass: dev <= tol });
    }
}

/// Table `ad*` against the metric adjoint on every basis vector.
pub fn ad_star_deviation(m: &AdaptedModel) -> Result<f64> {
    let n = m.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let e = linalg::unit(n, i);
        worst = worst.max((ad_star(m, &e)? - metric_adjoint(m, &e)?).amax());
    }
    Ok(worst)
}

/// `max |<ad(X)Y, Z> - <Y, ad*(X)Z>|` over basis triples.
pub fn adjointness_deviation(m: &AdaptedModel) -> Result<f64> {
    let n = m.dim();
    let g = m.metric().inner;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let e = linalg::unit(n, i);
        let lhs = m.ad(&e)?.transpose() * &g;
        let rhs = &g * ad_star(m, &e)?;
        worst = worst.max((lhs - rhs).amax());
    }
    Ok(worst)
}

/// Root-space connection table against the Milnor formula on all basis pairs.
pub fn connection_table_deviation(m: &AdaptedModel) -> Result<f64> {
    let a = Connection::milnor(m)?;
    let b = Connection::table(m)?;
    let n = m.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a.basis_value(i, j) - b.basis_value(i, j)).amax());
        }
    }
    Ok(worst)
}

/// Torsion and metric compatibility on basis pairs and triples.
pub fn connection_axioms(m: &AdaptedModel, c: &Connection) -> Result<(f64, f64)> {
    let n = m.dim();
    let g = m.metric().inner;
    let mut torsion = 0.0_f64;
    let mut compat = 0.0_f64;
    for i in 0..n {
        let nx = c.nabla_x(&linalg::unit(n, i));
        // <nabla_X Y, Z> + <Y, nabla_X Z> = 0 for all basis Y, Z
        compat = compat.max((nx.transpose() * &g + &g * &nx).amax());
        for j in 0..n {
            let t = c.basis_value(i, j) - c.basis_value(j, i) - m.bracket(&linalg::unit(n, i), &linalg::unit(n, j))?;
            torsion = torsion.max(t.amax());
        }
    }
    Ok((torsion, compat))
}

/// Pair symmetry and first Bianchi over basis quadruples (strided when `n` is
/// large), and the largest sectional curvature over basis pairs and their
/// normalized sums and differences.
pub fn curvature_checks(m: &AdaptedModel, c: &Connection) -> Result<(f64, f64, f64)> {
    let n = m.dim();
    let e = |i: usize| linalg::unit(n, i);
    let stride = if n > 8 { 2 } else { 1 };
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut sym = 0.0_f64;
    let mut bianchi = 0.0_f64;
    for &i in &idx {
        for &j in &idx {
            for &k in &idx {
                let rijk = c.curvature(m, &e(i), &e(j), &e(k))?;
                let cyc = &rijk + c.curvature(m, &e(j), &e(k), &e(i))? + c.curvature(m, &e(k), &e(i), &e(j))?;
                bianchi = bianchi.max(cyc.amax());
                for &l in &idx {
                    let b = c.curvature(m, &e(k), &e(l), &e(i))?.dot(&e(j));
                    sym = sym.max((rijk[l] - b).abs());
                }
            }
        }
    }
    let mut sectional = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            for (x, y) in
                [(e(i), e(j)), ((e(i) + e(j)) / 2f64.sqrt(), e(j)), ((e(i) - e(j)) / 2f64.sqrt(), e((j + 1) % n))]
            {
                let on = linalg::gram_schmidt(&[x, y], None, 1e-9);
                if on.len() == 2 {
                    sectional = sectional.max(c.curvature(m, &on[0], &on[1], &on[1])?.dot(&on[0]));
                }
            }
        }
    }
    Ok((sym, bianchi, sectional))
}

/// Sup over `s` in `[-range, range]` of the RK4 velocity against the closed form, for unit `xi` in root `ri`.
pub fn geodesic_deviation(
    m: &AdaptedModel,
    c: &Connection,
    ri: usize,
    xi: &Vector,
    range: f64,
    step: f64,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s_end in [range, -range] {
        for s in integrate(m, c, xi, &[], s_end, step, 10)? {
            worst = worst.max((s.velocity - root_geodesic_velocity(m, ri, xi, s.s)).amax());
        }
    }
    Ok(worst)
}

/// Max entry difference of closed-form and oracle operators over all normal
/// generators and the offset sweep of the first chosen root.
pub fn operator_deviations(cfg: &FoliationConfig, sweep: &[f64]) -> Result<(f64, f64)> {
    let mut a_dev = 0.0_f64;
    let mut r_dev = 0.0_f64;
    let configs: Vec<FoliationConfig> = if cfg.k() == 0 {
        vec![cfg.clone()]
    } else {
        sweep
            .iter()
            .map(|&t| {
                let mut o = cfg.offsets().to_vec();
                o[0] = t;
                cfg.with_offsets(o)
            })
            .collect::<Result<_>>()?
    };
    for c in &configs {
        for n in c.normal_generators() {
            let a = shape_operator(c, &n)?.to_full().ok_or_else(|| Error::Model("no block bases".into()))?;
            let r = normal_jacobi(c, &n)?.to_full().ok_or_else(|| Error::Model("no block bases".into()))?;
            a_dev = a_dev.max((a - oracle_shape_operator(c, &n)?).amax());
            r_dev = r_dev.max((r - oracle_normal_jacobi(c, &n)?).amax());
        }
    }
    Ok((a_dev, r_dev))
}

fn block_of(full: &Matrix, basis: &[Vector], dim: usize) -> Matrix {
    let u = linalg::columns(dim, basis);
    u.transpose() * full * u
}

/// Run every suite on a model-backed configuration.
pub fn run_suite(cfg: &FoliationConfig) -> Result<SuiteReport> {
    let m = cfg.model().ok_or_else(|| Error::Config("verify needs a model-backed configuration".into()))?.clone();
    let n = m.dim();
    let mut checks = Checks::default();
    let mut measurements = BTreeMap::new();
    let mut discrepancies = Vec::new();

    for (name, dev) in m.invariants() {
        checks.push(format!("algebra.{name}"), dev, TAU_ALG);
    }
    checks.push("ad_star.table", ad_star_deviation(&m)?, TAU_ALG);
    checks.push("ad_star.adjoint", adjointness_deviation(&m)?, TAU_ALG);
    checks.push("connection.table", connection_table_deviation(&m)?, TAU_ALG);
    let conn = Connection::milnor(&m)?;
    let (torsion, compat) = connection_axioms(&m, &conn)?;
    checks.push("connection.torsion_free", torsion, TAU_ALG);
    checks.push("connection.metric", compat, TAU_ALG);
    let (sym, bianchi, sectional) = curvature_checks(&m, &conn)?;
    checks.push("curvature.pair_symmetry", sym, TAU_ALG);
    checks.push("curvature.bianchi", bianchi, TAU_ALG);
    checks.push("curvature.nonpositive", sectional.max(0.0), TAU_ALG);

    for (ri, rs) in m.roots().iter().enumerate() {
        measurements.insert(format!("root_norm[{}]", ri + 1), cfg.datum().norm(ri));
        let xi = linalg::unit(n, rs.offset);
        checks.push(
            format!("geodesic.root[{}]", ri + 1),
            geodesic_deviation(&m, &conn, ri, &xi, 5.0, DEFAULT_STEP)?,
            TAU_ODE,
        );
    }
    let flat = linalg::unit(n, 0);
    let w = integrate(&m, &conn, &flat, &[], 5.0, DEFAULT_STEP, 1000)?;
    checks.push("geodesic.flat", w.iter().map(|s| (&s.velocity - &flat).amax()).fold(0.0, f64::max), TAU_ODE);

    let (a_dev, r_dev) = operator_deviations(cfg, &OFFSET_SWEEP)?;
    checks.push("shape_operator.oracle", a_dev, TAU_ODE);
    checks.push("normal_jacobi.oracle", r_dev, TAU_ODE);

    let rep = adaptedness(cfg)?;
    let doubled = cfg.set().indices.iter().any(|&i| cfg.datum().is_doubled(i));
    let expected = if doubled { Verdict::NotAdapted } else { Verdict::Adapted };
    checks.push("adaptedness.dichotomy", if rep.verdict == expected { 0.0 } else { 1.0 }, 0.0);
    for d in &rep.doubled {
        checks.push(
            format!("commutator.doubled[{}]", d.root_position + 1),
            d.closed_vs_measured.unwrap_or(f64::INFINITY),
            TAU_ALG,
        );
        measurements.insert(format!("bracket_norm[{}]", d.root_position + 1), d.bracket_norm);
        measurements
            .insert(format!("bracket_norm_over_root_norm[{}]", d.root_position + 1), d.bracket_norm / d.root_norm);
        if let Some(mm) = &d.measured {
            let dev =
                d.published.iter().flatten().zip(mm.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            discrepancies.push(Discrepancy {
                id: format!("commutator.doubled[{}]", d.root_position + 1),
                printed: d.published.clone(),
                measured: mm.clone(),
                max_deviation: dev,
            });
        }
    }
    if !doubled {
        let worst = rep.normals.iter().map(|n| n.commutator.max(n.tangent_leak)).fold(0.0, f64::max);
        checks.push("commutator.all_zero", worst, TAU_ALG);
    }

    let h = leaf_mean_curvature(cfg)?;
    checks.push("mean_curvature.trace", h.traces.iter().map(|t| t.deviation).fold(0.0, f64::max), TAU_ALG);

    let chart = section_chart(cfg)?;
    let transport = chart
        .transport
        .iter()
        .map(|t| t.tangent_deviation.max(t.gram_drift).max(t.velocity_deviation))
        .fold(chart.orthonormality, f64::max);
    checks.push("section.parallel_frame", transport, TAU_ODE);

    // printed closed forms against the oracle matrices, per chosen root
    let geo = Geometry::build(cfg)?;
    for i in 0..cfg.k() {
        let (l, t) = (cfg.norm(i), cfg.offsets()[i]);
        let normal = Normal::Root(i);
        if let (Some(c), Some(spec)) = (geo.bracket_norms[i], geo.block(BlockKind::Doubled(i))) {
            let pair = &spec.basis[..2];
            let a = block_of(&oracle_shape_operator(cfg, &normal)?, pair, n);
            let r = block_of(&oracle_normal_jacobi(cfg, &normal)?, pair, n);
            for (id, printed, measured) in [
                ("shape_operator.doubled", published_doubled_shape(l, t, c), a),
                ("normal_jacobi.doubled", published_doubled_jacobi(l, t, c), r),
            ] {
                discrepancies.push(Discrepancy {
                    id: format!("{id}[{}]", i + 1),
                    max_deviation: (&printed - &measured).amax(),
                    printed: crate::foliation::blocks_rows(&printed),
                    measured: crate::foliation::blocks_rows(&measured),
                });
            }
        }
        if let Some(spec) = geo.block(BlockKind::Kernel(i)).filter(|s| s.dim > 0) {
            let r = block_of(&oracle_normal_jacobi(cfg, &normal)?, &spec.basis, n);
            let printed = Matrix::identity(spec.dim, spec.dim) * published_kernel_jacobi(l, t);
            discrepancies.push(Discrepancy {
                id: format!("normal_jacobi.kernel[{}]", i + 1),
                max_deviation: (&printed - &r).amax(),
                printed: crate::foliation::blocks_rows(&printed),
                measured: crate::foliation::blocks_rows(&r),
            });
        }
        if geo.block(BlockKind::Remainder).is_some_and(|b| b.dim > 0) {
            let rot = rotation_check(cfg, i)?;
            checks.push(format!("rotation.anticommute[{}]", i + 1), rot.deviation.max(rot.image_residual), TAU_ODE);
            measurements.insert(format!("rotation.printed_angle_deviation[{}]", i + 1), rot.published_deviation);
        }
    }

    // flow from the configured offsets
    let coeffs = cfg.coefficients()?;
    let mut u0 = vec![0.0; cfg.m0()];
    u0.extend_from_slice(cfg.offsets());
    let scale = 1.0 + u0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tr = flow::integrate(&coeffs, &u0, 20.0, flow::DEFAULT_STEP, 100)?;
    checks.push("flow.residual", tr.max_residual(), 1e-8 * scale);
    let mut dist = 0.0_f64;
    for s in &tr.samples {
        dist = dist.max((s.dist_to_ref - flow::leaf_distance(&coeffs, cfg.offsets(), s.t)?).abs());
    }
    checks.push("flow.leaf_distance", dist, 1e-8 * scale);
    for (j, rate) in coeffs.decay_rates().iter().enumerate() {
        measurements.insert(format!("decay_rate[{}]", j + 1), *rate);
    }

    let checks = checks.0;
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        model: m.model().id().to_string(),
        k: cfg.k(),
        b_dim: cfg.m0(),
        verdict: rep.verdict,
        checks,
        discrepancies,
        measurements,
        pass,
    })
}
