//! One function per subcommand. Each returns whether its scientific checks
//! passed; data-only commands always pass.

use std::f64::consts::PI;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use horseshoe_core::chaos::{self, calibrated_threshold, fli_map, zone_structure, NodeFlag};
use horseshoe_core::covering::{check_horseshoe, hset_at_fixed_point, HSet, HorseshoeReport, RESOLUTION};
use horseshoe_core::fixed_points::{dedup, newton_fixed_point, survey, Backward, FixedPoint, Stability, SurveySettings};
use horseshoe_core::integrator::{flow_dense, forward_backward_error, max_energy_drift};
use horseshoe_core::manifolds::{find_heteroclinic, grow_manifold, ManifoldKind, ManifoldPiece};
use horseshoe_core::model::FGrid;
use horseshoe_core::poincare::{Section, Seed};
use horseshoe_core::SecularState;

use crate::config::RunConfig;
use crate::output::{finite_or_null, num, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

fn seed(z: [f64; 2]) -> Seed {
    Seed::new(z[0], z[1])
}

fn fixed_point_json(fp: &FixedPoint) -> serde_json::Value {
    let [(l1, i1), (l2, i2)] = fp.linearization.eigenvalues;
    json!({
        "g": fp.point[0],
        "G": fp.point[1],
        "class": fp.stability().as_str(),
        "lambda1": [l1, i1],
        "lambda2": [l2, i2],
        "residual": fp.residual,
        "iterations": fp.iterations,
    })
}

pub fn portrait(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let section = cfg.section()?;
    let mesh = cfg.portrait.mesh.mesh(cfg.model.lambda)?;
    let n = cfg.portrait.iterates;
    let seeds: Vec<Seed> = mesh.nodes().collect();
    let orbits: Vec<_> = seeds.par_iter().map(|z| section.iterate(z, n)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (id, (orbit, err)) in orbits.iter().enumerate() {
        for (k, z) in orbit.iter().enumerate() {
            rows.push(vec![id.to_string(), k.to_string(), num(z.pericentre), num(z.ang_momentum)]);
        }
        if let Some(e) = err {
            failures.push(json!({ "seed_id": id, "g": seeds[id].pericentre, "G": seeds[id].ang_momentum, "error": e.to_string() }));
        }
    }
    out.csv("portrait.csv", &["seed_id", "iterate_index", "g", "G"], rows)?;
    out.json(
        "portrait_summary.json",
        &json!({
            "seeds": seeds.len(),
            "iterates": n,
            "points": orbits.iter().map(|o| o.0.len()).sum::<usize>(),
            "delta": section.settings().delta,
            "failures": failures,
        }),
    )?;
    Ok(Outcome::Pass)
}

pub fn admissible(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let base = cfg.section()?;
    let h = base.h_star() + cfg.admissible.energy_offset;
    let section = base.with_energy(h);
    let mesh = cfg.admissible.mesh.mesh(cfg.model.lambda)?;
    let flags = section.admissible_region(&mesh);
    let rows = mesh
        .nodes()
        .zip(&flags)
        .map(|(z, &ok)| vec![num(z.pericentre), num(z.ang_momentum), u8::from(ok).to_string()]);
    out.csv("admissibility.csv", &["g", "G", "flag"], rows)?;
    let holes = mesh.components(&flags, false);
    let admissible = flags.iter().filter(|&&f| f).count();
    out.json(
        "admissible_summary.json",
        &json!({
            "energy": h,
            "nodes": flags.len(),
            "admissible": admissible,
            "inadmissible": flags.len() - admissible,
            "inadmissible_components": holes.iter().map(|c| c.len()).collect::<Vec<_>>(),
            "connected_inadmissible_zone": holes.len() == 1,
        }),
    )?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct Calibration {
    g: f64,
    #[serde(rename = "G")]
    big_g: f64,
    fli: f64,
    fli_half: f64,
    /// (FLI(t)/t) / (FLI(t/2)/(t/2)); near 1 for a chaotic orbit.
    rate_ratio: serde_json::Value,
    chi: f64,
    tau_l: serde_json::Value,
    mle_horizon_reached: f64,
    t_reached: f64,
    truncated: bool,
}

pub fn fli(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let section = cfg.section()?;
    let unit = cfg.model_time(1.0);
    let settings = cfg.chaos_settings(&section, cfg.fli.horizon);
    let mle_settings = cfg.chaos_settings(&section, cfg.fli.mle_horizon);
    let steps = (settings.t_final / settings.delta).ceil() as usize;
    let stride = (steps / cfg.fli.curve_samples.max(1)).max(1);

    let calib: Vec<_> = cfg
        .fli
        .calibration
        .par_iter()
        .map(|&z| -> Result<_> {
            let s = seed(z);
            let mut with_curve = settings;
            with_curve.curve_stride = stride;
            let rec = chaos::fli(&section, &s, &with_curve)?;
            let mle = chaos::mle_longest(&section, &s, &mle_settings, cfg.fli.mle_levels).ok();
            Ok((rec, mle))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary_calib = Vec::new();
    for (k, (rec, mle)) in calib.iter().enumerate() {
        let rows = rec.curve.iter().map(|&(t, f)| vec![num(t / unit), num(f)]);
        out.csv(&format!("calibration_{k}.csv"), &["t", "fli"], rows)?;
        let half = rec
            .curve
            .iter()
            .take_while(|c| c.0 <= 0.5 * settings.t_final * (1.0 + 1e-12))
            .last()
            .map_or(f64::NAN, |c| c.1);
        summary_calib.push(Calibration {
            g: rec.seed.pericentre,
            big_g: rec.seed.ang_momentum,
            fli: rec.fli,
            fli_half: half,
            rate_ratio: finite_or_null(0.5 * rec.fli / half),
            chi: mle.as_ref().map_or(f64::NAN, |m| m.chi * unit),
            tau_l: finite_or_null(mle.as_ref().map_or(f64::NAN, |m| m.tau_l / unit)),
            mle_horizon_reached: mle.as_ref().and_then(|m| m.series.last()).map_or(0.0, |s| s.0 / unit),
            t_reached: rec.t_reached / unit,
            truncated: rec.truncated(settings.t_final),
        });
    }
    let refs: Vec<f64> = summary_calib.iter().map(|c| c.fli).collect();
    let threshold = calibrated_threshold(&refs).unwrap_or(f64::NAN);

    let mesh = cfg.fli.mesh.mesh(cfg.model.lambda)?;
    let nodes = fli_map(&section, &mesh, &settings);
    let rows = nodes.iter().map(|n| {
        vec![
            num(n.seed.pericentre),
            num(n.seed.ang_momentum),
            num(n.fli),
            n.flag.as_str().to_string(),
        ]
    });
    out.csv("fli_map.csv", &["g", "G", "fli", "flag"], rows)?;
    let zones = threshold.is_finite().then(|| zone_structure(&nodes, &mesh, threshold));
    let count = |f: NodeFlag| nodes.iter().filter(|n| n.flag == f).count();
    out.json(
        "fli_summary.json",
        &json!({
            "time_unit": cfg.fli.time_unit,
            "model_time_per_unit": unit,
            "horizon": cfg.fli.horizon,
            "mle_horizon": cfg.fli.mle_horizon,
            "delta": settings.delta,
            "calibration": summary_calib,
            "threshold": finite_or_null(threshold),
            "nodes": { "ok": count(NodeFlag::Ok), "inadmissible": count(NodeFlag::Inadmissible), "truncated": count(NodeFlag::Truncated) },
            "zones": zones,
        }),
    )?;
    Ok(Outcome::Pass)
}

pub fn fixed_points(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let section = cfg.section()?;
    let fc = &cfg.fixed_points;
    let settings = SurveySettings {
        newton: fc.newton(),
        dedup_radius: fc.dedup_radius,
        max_initial_residual: None,
    };
    let mut found = if fc.guesses_only {
        Vec::new()
    } else {
        survey(&section, &fc.mesh.mesh(cfg.model.lambda)?, &settings)
    };
    let polished: Vec<_> = fc
        .guesses
        .par_iter()
        .map(|&z| newton_fixed_point(&section, z, &settings.newton))
        .collect();
    let mut guesses = Vec::new();
    for (z, r) in fc.guesses.iter().zip(polished) {
        match r {
            Ok(fp) => {
                guesses.push(json!({ "guess": z, "converged": fixed_point_json(&fp) }));
                found.push(fp);
            }
            Err(e) => guesses.push(json!({ "guess": z, "error": e.to_string() })),
        }
    }
    let mut found = dedup(&section, found, fc.dedup_radius);
    found.sort_by(|a, b| a.point[1].total_cmp(&b.point[1]).then(a.point[0].total_cmp(&b.point[0])));
    let rows = found.iter().map(|fp| {
        let [(l1, i1), (l2, i2)] = fp.linearization.eigenvalues;
        vec![
            num(fp.point[0]),
            num(fp.point[1]),
            fp.stability().as_str().to_string(),
            num(l1),
            num(i1),
            num(l2),
            num(i2),
            num(fp.residual),
        ]
    });
    out.csv(
        "fixed_points.csv",
        &["g", "G", "class", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "residual"],
        rows,
    )?;
    let count = |s: Stability| found.iter().filter(|f| f.stability() == s).count();
    out.json(
        "fixed_points_summary.json",
        &json!({
            "found": found.len(),
            "hyperbolic": count(Stability::Hyperbolic),
            "elliptic": count(Stability::Elliptic),
            "marginal": count(Stability::Marginal),
            "guesses": guesses,
        }),
    )?;
    Ok(Outcome::Pass)
}

pub fn manifolds(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let section = cfg.section()?;
    let mc = &cfg.manifolds;
    let settings = mc.settings();
    let newton = cfg.fixed_points.newton();
    let points: Vec<FixedPoint> = mc
        .points
        .iter()
        .map(|&z| newton_fixed_point(&section, z, &newton).with_context(|| format!("fixed point near {z:?}")))
        .collect::<Result<_>>()?;
    // (point index, kind, branch) for every piece, grown in parallel.
    let jobs: Vec<(usize, ManifoldKind, i8)> = (0..points.len())
        .flat_map(|i| {
            [ManifoldKind::Unstable, ManifoldKind::Stable]
                .into_iter()
                .flat_map(move |k| [1i8, -1].into_iter().map(move |b| (i, k, b)))
        })
        .collect();
    let pieces: Vec<Result<ManifoldPiece>> = jobs
        .par_iter()
        .map(|&(i, k, b)| Ok(grow_manifold(&section, &points[i], k, b, &settings)?))
        .collect();
    let mut summary = Vec::new();
    let mut grown: Vec<(usize, ManifoldKind, i8, ManifoldPiece)> = Vec::new();
    for (&(i, k, b), piece) in jobs.iter().zip(pieces) {
        match piece {
            Ok(p) => {
                let name = format!("manifold_p{i}_{}_{}.csv", k.as_str(), if b > 0 { "plus" } else { "minus" });
                let rows = p.points().map(|(z, d)| vec![num(z[0]), num(z[1]), d.to_string()]);
                out.csv(&name, &["g", "G", "depth"], rows)?;
                summary.push(json!({
                    "file": name, "point": i, "kind": k.as_str(), "branch": b,
                    "depth": p.depth(), "points": p.point_count(), "multiplier": p.multiplier,
                    "truncated": p.truncated,
                }));
                grown.push((i, k, b, p));
            }
            Err(e) => summary.push(json!({ "point": i, "kind": k.as_str(), "branch": b, "error": e.to_string() })),
        }
    }
    let backward = Backward(&section);
    let mut hetero_rows = Vec::new();
    let mut hetero = Vec::new();
    for &[a, b] in &mc.heteroclinic {
        let mut found: Vec<[f64; 2]> = Vec::new();
        for (_, _, _, u) in grown.iter().filter(|g| g.0 == a && g.1 == ManifoldKind::Unstable) {
            for (_, _, _, s) in grown.iter().filter(|g| g.0 == b && g.1 == ManifoldKind::Stable) {
                found.extend(find_heteroclinic(&section, &backward, u, s, mc.intersection_tol));
            }
        }
        found.sort_by(|x, y| x[1].total_cmp(&y[1]).then(x[0].total_cmp(&y[0])));
        found.dedup_by(|x, y| Seed::new(x[0], x[1]).distance(&Seed::new(y[0], y[1])) < 10.0 * mc.intersection_tol);
        for p in &found {
            hetero_rows.push(vec![num(p[0]), num(p[1]), a.to_string(), b.to_string()]);
        }
        hetero.push(json!({ "unstable_of": a, "stable_of": b, "count": found.len() }));
    }
    out.csv("heteroclinic.csv", &["g", "G", "unstable_of", "stable_of"], hetero_rows)?;
    out.json(
        "manifolds_summary.json",
        &json!({
            "fixed_points": points.iter().map(fixed_point_json).collect::<Vec<_>>(),
            "pieces": summary,
            "heteroclinic": hetero,
        }),
    )?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct HorseshoeRun {
    edge_samples: usize,
    grid: usize,
    report: HorseshoeReport,
}

pub fn horseshoe(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let section = cfg.section()?;
    let hc = &cfg.horseshoe;
    let newton = cfg.fixed_points.newton();
    let q1 = newton_fixed_point(&section, hc.q1, &newton).context("fixed point q1")?;
    let q2 = newton_fixed_point(&section, hc.q2, &newton).context("fixed point q2")?;
    let n1: HSet = hset_at_fixed_point(&section, &q1, hc.a1, hc.b1)?;
    let n2: HSet = hset_at_fixed_point(&section, &q2, hc.a2, hc.b2)?;
    let base = hc.settings();
    let mut runs = vec![HorseshoeRun {
        edge_samples: base.edge_samples,
        grid: base.grid,
        report: check_horseshoe(&section, &n1, &n2, &base)?,
    }];
    if hc.refine {
        let fine = base.refined();
        runs.push(HorseshoeRun {
            edge_samples: fine.edge_samples,
            grid: fine.grid,
            report: check_horseshoe(&section, &n1, &n2, &fine)?,
        });
    }
    let pass = runs.iter().all(|r| r.report.holds && r.report.min_margin > RESOLUTION);
    let offset = |fp: &FixedPoint, g: [f64; 2]| Seed::new(fp.point[0], fp.point[1]).distance(&seed(g));
    out.json(
        "horseshoe.json",
        &json!({
            "result": if pass { "PASS" } else { "FAIL" },
            "resolution": RESOLUTION,
            "q1": fixed_point_json(&q1),
            "q2": fixed_point_json(&q2),
            "q1_distance_from_guess": offset(&q1, hc.q1),
            "q2_distance_from_guess": offset(&q2, hc.q2),
            "n1": n1,
            "n2": n2,
            "runs": runs,
        }),
    )?;
    for r in &runs {
        println!(
            "horseshoe {}x{} edges/grid: {:?}, min margin {:.3e}",
            r.edge_samples, r.grid, r.report.verdict, r.report.min_margin
        );
        for (name, rel) in &r.report.relations {
            println!("  {name}: {:?} (margin {:.3e})", rel.verdict, rel.margins.min());
        }
    }
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(Outcome::from_bool(pass))
}

pub fn flow_check(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let fc = &cfg.flow_check;
    let model = cfg.model()?;
    let reference = Section::build_with_steps(model.clone(), cfg.integrator.steps_per_period)?;
    let period = reference.settings().delta * cfg.integrator.steps_per_period;
    let delta = period / fc.steps_per_period;
    let tau = fc.revolutions * period;
    let results: Vec<_> = fc
        .seeds
        .par_iter()
        .map(|s| {
            let x0 = reference.lift_state(&seed(s.seed))?.to_array();
            let stride = if fc.dump_stride == 0 { usize::MAX } else { fc.dump_stride };
            let traj = flow_dense(&model, &x0, tau, delta, stride);
            let drift = traj.as_ref().map_err(|e| e.clone()).and_then(|t| max_energy_drift(&model, t));
            let delta_fb = forward_backward_error(&model, &x0, tau, delta);
            anyhow::Ok((traj, drift, delta_fb))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Vec::new();
    let mut all = true;
    for (k, (s, (traj, drift, fb))) in fc.seeds.iter().zip(results).enumerate() {
        if fc.dump_stride > 0 {
            if let Ok(t) = &traj {
                let rows = t.times.iter().zip(&t.states).map(|(t, x)| {
                    let h = model.hamiltonian(&SecularState::from_array(*x)).unwrap_or(f64::NAN);
                    vec![num(*t), num(x[0]), num(x[1]), num(x[2]), num(x[3]), num(h)]
                });
                out.csv(&format!("trajectory_{k}.csv"), &["t", "G", "R", "g", "r", "H"], rows)?;
            }
        }
        let energy_ok = matches!(drift, Ok(d) if d <= s.energy_tol);
        let fb_ok = matches!(fb, Ok(d) if d <= s.reversibility_tol);
        let line = |name: &str, v: &Result<f64, horseshoe_core::Error>, tol: f64, ok: bool| {
            match v {
                Ok(d) => println!("{:4} {}/{name}: {d:.3e} (tol {tol:.0e})", if ok { "PASS" } else { "FAIL" }, s.label),
                Err(e) => println!("FAIL {}/{name}: {e}", s.label),
            }
        };
        line("energy_drift", &drift, s.energy_tol, energy_ok);
        line("forward_backward", &fb, s.reversibility_tol, fb_ok);
        all &= energy_ok && fb_ok;
        let val = |v: &Result<f64, horseshoe_core::Error>| match v {
            Ok(d) => json!(d),
            Err(e) => json!({ "error": e.to_string() }),
        };
        report.push(json!({
            "label": s.label,
            "g": s.seed[0],
            "G": s.seed[1],
            "energy_drift": val(&drift),
            "energy_tol": s.energy_tol,
            "energy": if energy_ok { "PASS" } else { "FAIL" },
            "forward_backward": val(&fb),
            "reversibility_tol": s.reversibility_tol,
            "reversibility": if fb_ok { "PASS" } else { "FAIL" },
        }));
    }
    out.json(
        "flow_check.json",
        &json!({
            "result": if all { "PASS" } else { "FAIL" },
            "period": period,
            "delta": delta,
            "tau": tau,
            "seeds": report,
        }),
    )?;
    Ok(Outcome::from_bool(all))
}

pub fn secular_portrait(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let model = cfg.model()?;
    let sp = &cfg.secular_portrait;
    let grid = FGrid::sample(&model, sp.n_g, sp.n_big_g)?;
    let mut rows = Vec::with_capacity(grid.values.len());
    for j in 0..grid.n_mom {
        for i in 0..grid.n_peri {
            let [g, big] = grid.node(i, j);
            rows.push(vec![num(g), num(big), num(big / grid.lambda), num(grid.at(i, j))]);
        }
    }
    out.csv("secular_f.csv", &["g", "G", "G_over_Lambda", "F"], rows)?;
    let topo = grid.topology();
    out.json(
        "secular_summary.json",
        &json!({
            "n_g": sp.n_g,
            "n_G": sp.n_big_g,
            "r0": model.params().circular_radius(),
            "islands": topo.islands,
            "rotational_levels": topo.rotational_levels,
            "islands_and_bands": topo.mixed(),
        }),
    )?;
    Ok(Outcome::Pass)
}

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.measured <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    let mut a = m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Model-level self checks. Random states are drawn in the interior of the
/// admissible domain from the configured RNG seed.
pub fn validate(cfg: &RunConfig, out: &mut Output) -> Result<Outcome> {
    use horseshoe_core::integrator::fundamental_matrix;
    use horseshoe_core::model::{u_exact, u_pm_direct, u_pm_identity, u_truncated};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let vc = &cfg.validate;
    let p = cfg.parameters();
    let model = cfg.model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // ε = β a / r stays below 0.3.
    let r_min = p.epsilon(1.0) / 0.3;
    let r_max = 2.0 * p.datum.distance.max(r_min);
    let states: Vec<SecularState> = (0..vc.random_points)
        .map(|_| {
            SecularState::new(
                rng.gen_range(-(p.lambda - 0.05)..(p.lambda - 0.05)),
                rng.gen_range(-0.01..0.01),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(r_min..r_max),
            )
        })
        .collect();

    let mut direct = 0.0f64;
    let mut field = 0.0f64;
    let mut trace = 0.0f64;
    for s in &states {
        let (dp, dm) = u_pm_direct(&p, s.ang_momentum, s.pericentre, s.distance)?;
        let (ip, im) = u_pm_identity(&p, s.ang_momentum, s.pericentre, s.distance)?;
        direct = direct.max(rel(ip, dp)).max(rel(im, dm));

        let x = s.to_array();
        let with = |i: usize, v: f64| {
            let mut a = x;
            a[i] = v;
            model.hamiltonian(&SecularState::from_array(a)).unwrap_or(f64::NAN)
        };
        let dh = |i: usize| d5(|v| with(i, v), x[i], 1e-3 * x[i].abs().max(1.0));
        let fd = [-dh(2), -dh(3), dh(0), dh(1)];
        let vf = model.vector_field(s)?;
        for i in 0..4 {
            field = field.max(rel(vf[i], fd[i]));
        }
        let jac = model.vf_jacobian(s)?;
        let norm = jac.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        trace = trace.max((jac[0][0] + jac[1][1] + jac[2][2] + jac[3][3]).abs() / norm);
    }

    let d = p.datum;
    let truncation = rel(u_truncated(&p, d.ang_momentum, d.pericentre, d.distance)?, u_exact(&p, d.ang_momentum, d.pericentre, d.distance)?);

    let reference = Section::build_with_steps(model.clone(), cfg.integrator.steps_per_period)?;
    let period = reference.settings().delta * cfg.integrator.steps_per_period;
    let delta = period / vc.steps_per_period;
    let x0 = d.to_array();
    let (_, fm) = fundamental_matrix(&model, &x0, period, delta)?;
    let liouville = (det4(fm) - 1.0).abs();
    let tau = vc.revolutions * period;
    let traj = flow_dense(&model, &x0, tau, delta, 100)?;
    let drift = max_energy_drift(&model, &traj)?;
    let reversal = forward_backward_error(&model, &x0, tau, delta)?;

    let checks = [
        Check { name: "direct_vs_identity", measured: direct, tolerance: 1e-12 },
        Check { name: "truncation_at_datum", measured: truncation, tolerance: 1e-7 },
        Check { name: "vector_field_vs_fd", measured: field, tolerance: 1e-8 },
        Check { name: "jacobian_trace", measured: trace, tolerance: 1e-10 },
        Check { name: "variational_det", measured: liouville, tolerance: 1e-8 },
        Check { name: "energy_drift_datum", measured: drift, tolerance: 1e-12 },
        Check { name: "forward_backward_datum", measured: reversal, tolerance: 1e-12 },
    ];
    println!("{:<26} {:>12} {:>10}  result", "check", "measured", "tolerance");
    for c in &checks {
        println!(
            "{:<26} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.measured,
            c.tolerance,
            if c.pass() { "PASS" } else { "FAIL" }
        );
    }
    let all = checks.iter().all(Check::pass);
    out.json(
        "validate.json",
        &json!({
            "result": if all { "PASS" } else { "FAIL" },
            "random_points": vc.random_points,
            "revolutions": vc.revolutions,
            "delta": delta,
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "measured": finite_or_null(c.measured),
                "tolerance": c.tolerance,
                "result": if c.pass() { "PASS" } else { "FAIL" },
            })).collect::<Vec<_>>(),
        }),
    )?;
    Ok(Outcome::from_bool(all))
}
