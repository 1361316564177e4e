//! Acceptance suite: one pass/fail line per criterion.
//!
//! Reference values are computed here from the matrix model directly (metric
//! adjoint from the Gram matrix, Milnor connection, curvature from the
//! connection) rather than through the library's closed-form code paths.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use isoflow::flow::{self, Regime};
use isoflow::foliation::{adaptedness, canonical_b, normal_jacobi, shape_operator, FoliationConfig, Normal, Verdict};
use isoflow::lie_oracle::geodesic::integrate;
use isoflow::lie_oracle::{ad_star, adapted, AdaptedModel, Connection, ModelId};
use isoflow::linalg::{unit, Matrix, Vector};
use isoflow::root_data::{CoefficientRecord, SimpleOrthogonalSet};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

/// `G^{-1} ad(X)^T G` from the Gram matrix of the metric.
fn adjoint(m: &AdaptedModel, x: &Vector) -> Res<Matrix> {
    let g = m.metric().inner;
    let gi = g.clone().try_inverse().ok_or("singular Gram matrix")?;
    Ok(gi * m.ad(x)?.transpose() * g)
}

/// Milnor's formula straight from `ad` and the Gram matrix.
fn nabla(m: &AdaptedModel, x: &Vector, y: &Vector) -> Res<Vector> {
    Ok((m.bracket(x, y)? - adjoint(m, x)? * y - adjoint(m, y)? * x) * 0.5)
}

fn curvature(m: &AdaptedModel, x: &Vector, y: &Vector, z: &Vector) -> Res<Vector> {
    let a = nabla(m, x, &nabla(m, y, z)?)?;
    let b = nabla(m, y, &nabla(m, x, z)?)?;
    let c = nabla(m, &m.bracket(x, y)?, z)?;
    Ok(a - b - c)
}

/// Unit normal `xi / ch - th H / L` and tangent projector of the leaf through `e`.
fn frame(cfg: &FoliationConfig, m: &AdaptedModel) -> (Vector, Matrix) {
    let n = m.dim();
    let ri = cfg.set().indices[0];
    let xi = unit(n, m.roots()[ri].offset + cfg.xi_index()[0]);
    let h = m.root_vector(ri);
    let l = h.norm();
    let t = cfg.offsets()[0];
    let nu = &xi / (l * t).cosh() - &h * ((l * t).tanh() / l);
    let mut p = Matrix::identity(n, n) - &nu * nu.transpose();
    for e in cfg.b_basis() {
        let v = m.a_vector(e);
        p -= &v * v.transpose();
    }
    (nu, p)
}

fn criterion_1() -> Res<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for id in [ModelId::Sl3R, ModelId::Su21] {
        let m = adapted(id)?;
        let n = m.dim();
        for i in m.rank()..n {
            let x = unit(n, i);
            let table = ad_star(&m, &x)?;
            let direct = adjoint(&m, &x)?;
            for j in m.rank()..n {
                worst = worst.max((table.column(j) - direct.column(j)).amax());
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(ok(
        worst < 1e-10 && elapsed < Duration::from_secs(1),
        format!("max deviation {worst:.2e} (tol 1e-10), {:.0} ms (limit 1000 ms)", elapsed.as_secs_f64() * 1e3),
    ))
}

fn criterion_2() -> Res<Outcome> {
    let mut worst = 0.0_f64;
    for id in [ModelId::Sl3R, ModelId::Su21] {
        let m = adapted(id)?;
        let table = Connection::table(&m)?;
        let n = m.dim();
        for i in 0..n {
            for j in 0..n {
                let want = nabla(&m, &unit(n, i), &unit(n, j))?;
                worst = worst.max((table.basis_value(i, j) - want).amax());
            }
        }
    }
    Ok(ok(worst < 1e-10, format!("max deviation {worst:.2e} (tol 1e-10)")))
}

fn criterion_3() -> Res<Outcome> {
    let mut worst = 0.0_f64;
    for id in [ModelId::Su21, ModelId::Sl3R] {
        let m = adapted(id)?;
        let conn = Connection::milnor(&m)?;
        let n = m.dim();
        for (ri, rs) in m.roots().iter().enumerate() {
            let xi = unit(n, rs.offset);
            let h = m.root_vector(ri);
            let l = h.norm();
            for s_end in [5.0, -5.0] {
                for s in integrate(&m, &conn, &xi, &[], s_end, 1e-3, 1)? {
                    let want = &xi / (l * s.s).cosh() - &h * ((l * s.s).tanh() / l);
                    worst = worst.max((s.velocity - want).amax());
                }
            }
        }
    }
    Ok(ok(worst < 1e-7, format!("sup deviation {worst:.2e} over s in [-5, 5] (tol 1e-7)")))
}

const SWEEP: [f64; 6] = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0];

fn criterion_4() -> Res<Outcome> {
    let mut worst = 0.0_f64;
    for id in [ModelId::Su21, ModelId::Sl3R] {
        for t in SWEEP {
            let cfg = FoliationConfig::for_model(id, 1, 0, vec![t])?;
            let m = cfg.model().ok_or("model")?.clone();
            let n = m.dim();
            let (nu, p) = frame(&cfg, &m);
            let mut dn = Matrix::zeros(n, n);
            for j in 0..n {
                dn.set_column(j, &nabla(&m, &unit(n, j), &nu)?);
            }
            let oracle = -(&p * dn * &p);
            let closed = shape_operator(&cfg, &Normal::Root(0))?.to_full().ok_or("no bases")?;
            worst = worst.max((closed - oracle).amax());
        }
    }
    Ok(ok(worst < 1e-8, format!("max deviation {worst:.2e} over su21, sl3r and 6 offsets (tol 1e-8)")))
}

fn criterion_5() -> Res<Outcome> {
    let mut worst = 0.0_f64;
    let mut printed = 0.0_f64;
    for id in [ModelId::Su21, ModelId::Sl3R] {
        for t in SWEEP {
            let cfg = FoliationConfig::for_model(id, 1, 0, vec![t])?;
            let m = cfg.model().ok_or("model")?.clone();
            let n = m.dim();
            let (nu, _) = frame(&cfg, &m);
            let mut oracle = Matrix::zeros(n, n);
            for j in 0..n {
                oracle.set_column(j, &curvature(&m, &unit(n, j), &nu, &nu)?);
            }
            let op = normal_jacobi(&cfg, &Normal::Root(0))?;
            worst = worst.max((op.to_full().ok_or("no bases")? - &oracle).amax());
            if id == ModelId::Su21 {
                let l = cfg.norm(0);
                let c = 2.0 * l;
                let pub_m = isoflow::foliation::published_doubled_jacobi(l, t, c);
                let blk = op.block(isoflow::foliation::BlockKind::Doubled(0)).ok_or("block")?;
                let u = isoflow::linalg::columns(n, &blk.basis);
                printed = printed.max((pub_m - u.transpose() * &oracle * u).amax());
            }
        }
    }
    Ok(ok(
        worst < 1e-8,
        format!(
            "max deviation {worst:.2e} (tol 1e-8); printed doubled block differs from the oracle by {printed:.3} (reported, oracle matrix used)"
        ),
    ))
}

/// Every valid configuration shape of the shipped models.
fn shipped_shapes() -> Vec<(ModelId, usize, usize)> {
    vec![
        (ModelId::Sl2R, 1, 0),
        (ModelId::Sl2R, 0, 1),
        (ModelId::Sl3R, 1, 0),
        (ModelId::Sl3R, 1, 1),
        (ModelId::Sl3R, 0, 1),
        (ModelId::Sl3R, 0, 2),
        (ModelId::Su21, 1, 0),
        (ModelId::Su21, 0, 1),
        (ModelId::Su31, 1, 0),
        (ModelId::Su31, 0, 1),
    ]
}

fn criterion_6() -> Res<Outcome> {
    let start = Instant::now();
    let mut count = 0;
    let mut wrong = Vec::new();
    for (id, k, b) in shipped_shapes() {
        let m = adapted(id)?;
        let datum = m.datum().clone();
        // every simple root may be the chosen one
        let sets: Vec<SimpleOrthogonalSet> = if k == 0 {
            vec![SimpleOrthogonalSet::new(vec![])]
        } else {
            datum.simple_roots().into_iter().map(|r| SimpleOrthogonalSet::new(vec![r])).collect()
        };
        for set in sets {
            let b_basis = canonical_b(&datum, &set, b)?;
            let xi_choices = if k == 0 { 1 } else { datum.mult[set.indices[0]] };
            let doubled = set.indices.iter().any(|&r| datum.is_doubled(r));
            for xi in 0..xi_choices {
                let offsets: &[f64] = if k == 0 { &[0.0] } else { &[-1.0, 0.0, 0.7] };
                for &t in offsets {
                    let xi_index = if k == 0 { vec![] } else { vec![xi] };
                    let cfg =
                        FoliationConfig::model_backed(m.clone(), set.clone(), b_basis.clone(), xi_index, vec![t; k])?;
                    let expected = if matches!(id, ModelId::Su21 | ModelId::Su31) && k > 0 {
                        Verdict::NotAdapted
                    } else {
                        Verdict::Adapted
                    };
                    // the shipped rank-one unitary models are exactly the ones with a doubled root
                    assert_eq!(doubled, expected == Verdict::NotAdapted);
                    count += 1;
                    if adaptedness(&cfg)?.verdict != expected {
                        wrong.push(format!("{id} roots={:?} b={b} xi={xi} t={t}", set.indices));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(ok(
        wrong.is_empty() && elapsed < Duration::from_secs(5),
        format!(
            "{count} configs, {} misclassified {:?}, {:.2} s (limit 5 s)",
            wrong.len(),
            wrong,
            elapsed.as_secs_f64()
        ),
    ))
}

fn flow_configs() -> Res<Vec<(ModelId, FoliationConfig)>> {
    Ok(vec![
        (ModelId::Sl2R, FoliationConfig::for_model(ModelId::Sl2R, 1, 0, vec![0.0])?),
        (ModelId::Sl3R, FoliationConfig::for_model(ModelId::Sl3R, 1, 1, vec![0.0])?),
        (ModelId::Su21, FoliationConfig::for_model(ModelId::Su21, 1, 0, vec![0.0])?),
        (ModelId::Su31, FoliationConfig::for_model(ModelId::Su31, 1, 0, vec![0.0])?),
    ])
}

/// `(1/L) asinh(exp(-kappa t) sinh(L t0))` by direct evaluation.
fn decay_slot(l: f64, kappa: f64, t0: f64, t: f64) -> f64 {
    ((-kappa * t).exp() * (l * t0).sinh()).asinh() / l
}

fn criterion_7() -> Res<Outcome> {
    let mut worst_ratio = 0.0_f64;
    let mut runs = 0;
    for (_, cfg) in flow_configs()? {
        let coeffs = cfg.coefficients()?;
        let grid: Vec<f64> = (0..5).map(|i| -2.0 + i as f64).collect();
        let inits: Vec<Vec<f64>> = if coeffs.dim() == 1 {
            (0..25).map(|i| vec![-3.0 + 0.25 * i as f64]).collect()
        } else {
            grid.iter().flat_map(|&a| grid.iter().map(move |&b| vec![a, b])).collect()
        };
        for u0 in inits {
            let tr = flow::integrate(&coeffs, &u0, 20.0, 1e-3, 50)?;
            let scale = 1.0 + u0.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut worst = 0.0_f64;
            for s in &tr.samples {
                let mut d2 = 0.0;
                for (i, d) in coeffs.drift.iter().enumerate() {
                    d2 += (s.coords[i] - (u0[i] + s.t * d)).powi(2);
                }
                for (j, slot) in coeffs.slots.iter().enumerate() {
                    let i = coeffs.m0() + j;
                    d2 += (s.coords[i] - decay_slot(slot.norm, slot.decay_rate(), u0[i], s.t)).powi(2);
                }
                worst = worst.max(d2.sqrt());
            }
            worst_ratio = worst_ratio.max(worst / (1e-8 * scale));
            runs += 1;
        }
    }
    Ok(ok(
        worst_ratio < 1.0,
        format!("{runs} trajectories to t = 20, worst residual at {worst_ratio:.2e} of 1e-8 (1 + |u0|)"),
    ))
}

fn criterion_8() -> Res<Outcome> {
    let mut notes = Vec::new();
    let mut pass = true;
    let cases = [
        (ModelId::Sl3R, 1, 1, vec![0.0], Regime::SelfSimilar),
        (ModelId::Sl3R, 1, 1, vec![1.0], Regime::AsymptotesReference),
        (ModelId::Sl3R, 0, 1, vec![], Regime::SelfSimilar),
        (ModelId::Sl3R, 0, 2, vec![], Regime::SelfSimilar),
        (ModelId::Su21, 0, 1, vec![], Regime::SelfSimilar),
        (ModelId::Su31, 0, 1, vec![], Regime::SelfSimilar),
        (ModelId::Sl2R, 0, 1, vec![], Regime::SelfSimilar),
        (ModelId::Su21, 1, 0, vec![1.0], Regime::ConvergesToMinimal),
        (ModelId::Su21, 1, 0, vec![0.0], Regime::ConvergesToMinimal),
        (ModelId::Sl3R, 1, 0, vec![-0.4], Regime::ConvergesToMinimal),
    ];
    for (id, k, b, t, want) in cases {
        let got = flow::classify(&FoliationConfig::for_model(id, k, b, t.clone())?)?.regime;
        if got != want {
            pass = false;
            notes.push(format!("{id} k={k} b={b} t={t:?}: {got:?}"));
        }
    }

    // su21, t1 = 1: dist_to_ref against the distance formula at t = 10
    let cfg = FoliationConfig::for_model(ModelId::Su21, 1, 0, vec![1.0])?;
    let coeffs = cfg.coefficients()?;
    let tr = flow::integrate(&coeffs, &[1.0], 10.0, 1e-3, 100)?;
    let s = &coeffs.slots[0];
    let formula = decay_slot(s.norm, s.decay_rate(), 1.0, 10.0).abs();
    let at10 = tr.last();
    let dev = (at10.dist_to_ref - formula).abs();
    pass &= dev < 1e-10;
    let monotone = tr.samples.windows(2).all(|w| w[1].dist_to_ref < w[0].dist_to_ref);
    let positive = at10.dist_to_ref / tr.samples[0].dist_to_ref > 1e-15;
    pass &= monotone && positive;

    // the same in sl3r with b != 0, where the reference flow is a genuine leaf flow
    let cfg = FoliationConfig::for_model(ModelId::Sl3R, 1, 1, vec![1.0])?;
    let coeffs = cfg.coefficients()?;
    let tr = flow::integrate(&coeffs, &[0.0, 1.0], 10.0, 1e-3, 100)?;
    let s3 = &coeffs.slots[0];
    let dev3 = (tr.last().dist_to_ref - decay_slot(s3.norm, s3.decay_rate(), 1.0, 10.0).abs()).abs();
    pass &= dev3 < 1e-10 && tr.samples.windows(2).all(|w| w[1].dist_to_ref < w[0].dist_to_ref);

    Ok(ok(
        pass,
        format!(
            "regimes {}; su21 dist_to_ref(10) = {:.6e}, |numeric - formula| = {dev:.2e}, sl3r {dev3:.2e} (tol 1e-10); monotone {monotone}",
            if notes.is_empty() { "all correct".to_string() } else { notes.join("; ") },
            at10.dist_to_ref
        ),
    ))
}

fn criterion_9() -> Res<Outcome> {
    let mut rng = StdRng::seed_from_u64(7);
    let mut pass = true;
    let mut lines = Vec::new();
    for (id, k) in [(ModelId::Sl2R, 1), (ModelId::Sl3R, 1), (ModelId::Su21, 1), (ModelId::Su31, 1)] {
        let cfg = FoliationConfig::for_model(id, k, 0, vec![0.0; k])?;
        let coeffs: CoefficientRecord = cfg.coefficients()?;
        let rates = coeffs.decay_rates();
        let kappa_min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let horizon = 30.0 / kappa_min;
        let mut worst_end = 0.0_f64;
        let mut worst_rate = 0.0_f64;
        for _ in 0..10 {
            let u0: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..=2.0)).collect();
            let tr = flow::integrate(&coeffs, &u0, horizon, 1e-3, 100)?;
            worst_end = worst_end.max(tr.last().coords.iter().map(|c| c.abs()).fold(0.0, f64::max));
            for (j, rate) in rates.iter().enumerate() {
                if u0[j].abs() < 1e-3 {
                    continue;
                }
                let measured = -tr.log_decay_rate(j, 10.0, 0.5).ok_or("no samples near t = 10")?;
                worst_rate = worst_rate.max((measured - rate).abs() / rate);
            }
        }
        pass &= worst_end < 1e-10 && worst_rate < 0.05;
        lines.push(format!(
            "{id}: horizon {horizon:.0}, max |c| {worst_end:.1e}, rate error {:.2}%",
            100.0 * worst_rate
        ));
    }
    Ok(ok(pass, lines.join("; ")))
}

fn criterion_10() -> Res<Outcome> {
    let mut pass = true;
    let mut count = 0;
    for (id, k, b) in shipped_shapes() {
        for t in [0.0, 1.3] {
            let cfg = FoliationConfig::for_model(id, k, b, vec![t; k])?;
            let coeffs = cfg.coefficients()?;
            let found = flow::find_minimal_leaf(&coeffs);
            count += 1;
            if b == 0 {
                let Some(leaf) = found else {
                    pass = false;
                    continue;
                };
                let z = flow::vector_field(&coeffs, &leaf.coords)?;
                let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
                pass &= leaf.coords.iter().all(|x| *x == 0.0) && zn < 1e-10;
            } else {
                pass &= found.is_none();
            }
        }
    }
    Ok(ok(pass, format!("{count} configs: origin with |Z| < 1e-10 exactly when b = 0, none otherwise")))
}

type Criterion = (&'static str, fn() -> Res<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ad* table vs metric adjoint", criterion_1),
        ("connection table vs Milnor formula", criterion_2),
        ("geodesic velocity closed form", criterion_3),
        ("shape operator vs oracle", criterion_4),
        ("normal Jacobi operator vs oracle", criterion_5),
        ("adaptedness dichotomy", criterion_6),
        ("flow RK4 vs closed form", criterion_7),
        ("flow regimes and leaf distance", criterion_8),
        ("convergence to the minimal leaf", criterion_9),
        ("minimal leaf criterion", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = f().unwrap_or_else(|e| ok(false, format!("error: {e}")));
        if !out.pass {
            failed += 1;
        }
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
