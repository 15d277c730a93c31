//! Fast Lyapunov indicators, maximal Lyapunov exponent and stability maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{norm, variational_flow_with};
use crate::model::VectorField;
use crate::poincare::{LiftOutcome, Mesh, Section, Seed};

/// Horizon and sampling of a chaos-indicator run. Times are in integration
/// units of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosSettings {
    pub t_final: f64,
    /// RK4 step.
    pub delta: f64,
    /// Record a curve sample every this many steps (0: no curve).
    pub curve_stride: usize,
    /// MLE renormalisation period, in steps.
    pub renorm_steps: usize,
}

impl ChaosSettings {
    pub fn new(t_final: f64, delta: f64) -> Self {
        Self {
            t_final,
            delta,
            curve_stride: 0,
            renorm_steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FliRecord {
    pub seed: Seed,
    pub fli: f64,
    /// (t, FLI(t)) samples when requested.
    pub curve: Vec<(f64, f64)>,
    pub chi: Option<f64>,
    /// Lyapunov time 1/χ; +∞ when χ is indistinguishable from zero.
    pub tau_l: Option<f64>,
    /// Time reached; less than the horizon when the orbit failed early.
    pub t_reached: f64,
}

impl FliRecord {
    pub fn truncated(&self, t_final: f64) -> bool {
        self.t_reached < t_final * (1.0 - 1e-12)
    }
}

fn basis() -> [[f64; 4]; 4] {
    let mut b = [[0.0; 4]; 4];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    b
}

/// FLI of an arbitrary phase-space point: sup over time of log‖w‖ for each
/// canonical basis vector, averaged over the four. No renormalisation.
pub fn fli_from_state<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64; 4],
    settings: &ChaosSettings,
) -> (f64, Vec<(f64, f64)>, f64, Option<Error>) {
    let mut sup = [0.0f64; 4];
    let mut curve = Vec::new();
    if settings.curve_stride > 0 {
        curve.push((0.0, 0.0));
    }
    let mut step = 0usize;
    let mut t_reached = 0.0;
    let res = variational_flow_with(field, x0, basis(), settings.t_final, settings.delta, |t, _, ws| {
        for (s, w) in sup.iter_mut().zip(ws.iter()) {
            *s = s.max(norm(w).ln());
        }
        step += 1;
        t_reached = t;
        if settings.curve_stride > 0 && step % settings.curve_stride == 0 {
            curve.push((t, 0.25 * sup.iter().sum::<f64>()));
        }
    });
    let fli = 0.25 * sup.iter().sum::<f64>();
    if settings.curve_stride > 0 && curve.last().map(|c| c.0) != Some(t_reached) {
        curve.push((t_reached, fli));
    }
    (fli, curve, t_reached, res.err())
}

/// FLI of a section seed.
pub fn fli(section: &Section, seed: &Seed, settings: &ChaosSettings) -> Result<FliRecord> {
    if !(settings.t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("t_final must be positive, got {}", settings.t_final)));
    }
    let x0 = section.lift_state(seed)?.to_array();
    let (value, curve, t_reached, _) = fli_from_state(section.model(), &x0, settings);
    Ok(FliRecord {
        seed: *seed,
        fli: value,
        curve,
        chi: None,
        tau_l: None,
        t_reached,
    })
}

/// Finite-time maximal Lyapunov exponent with renormalisation, sampled at
/// t/2 and t. Returns (χ(t), χ(t/2)).
pub fn mle_from_state<F: VectorField + ?Sized>(field: &F, x0: &[f64; 4], settings: &ChaosSettings) -> Result<(f64, f64)> {
    let w0 = [0.5, 0.5, 0.5, 0.5];
    let renorm = settings.renorm_steps.max(1);
    let half = 0.5 * settings.t_final;
    let mut log_sum = 0.0;
    let mut step = 0usize;
    let mut at_half: Option<f64> = None;
    let (_, [w]) = variational_flow_with(field, x0, [w0], settings.t_final, settings.delta, |t, _, ws| {
        step += 1;
        if step % renorm == 0 {
            let n = norm(&ws[0]);
            log_sum += n.ln();
            for c in ws[0].iter_mut() {
                *c /= n;
            }
        }
        if at_half.is_none() && t >= half {
            at_half = Some((log_sum + norm(&ws[0]).ln()) / t);
        }
    })?;
    let chi = (log_sum + norm(&w).ln()) / settings.t_final;
    Ok((chi, at_half.unwrap_or(chi)))
}

/// χ and τ_L = 1/χ. When χ(t) has fallen below 70% of χ(t/2), the estimate
/// is decaying like log t / t (a regular orbit), and τ_L is +∞.
pub fn mle(section: &Section, seed: &Seed, settings: &ChaosSettings) -> Result<(f64, f64)> {
    let x0 = section.lift_state(seed)?.to_array();
    let (chi, chi_half) = mle_from_state(section.model(), &x0, settings)?;
    Ok((chi, lyapunov_time(chi, chi_half)))
}

pub fn lyapunov_time(chi: f64, chi_half: f64) -> f64 {
    if chi <= 0.0 || chi < 0.7 * chi_half {
        f64::INFINITY
    } else {
        1.0 / chi
    }
}

/// Lyapunov-time estimate at the longest horizon an orbit supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    /// (t, χ(t)) at t_final/2^k, ascending, up to the last horizon reached.
    pub series: Vec<(f64, f64)>,
    pub chi: f64,
    pub tau_l: f64,
    /// Set when the orbit failed before t_final.
    pub stopped: Option<String>,
}

/// χ(t) at the doubling horizons t_final/2^(levels−1), …, t_final/2,
/// t_final, in one run. A chaotic orbit may leave the domain before
/// t_final; the horizons reached until then are kept.
pub fn mle_series_from_state<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64; 4],
    settings: &ChaosSettings,
    levels: usize,
) -> (Vec<(f64, f64)>, Option<Error>) {
    let w0 = [0.5, 0.5, 0.5, 0.5];
    let renorm = settings.renorm_steps.max(1);
    let mut marks: Vec<f64> = (0..levels.max(1)).rev().map(|k| settings.t_final / (1u64 << k) as f64).collect();
    marks.reverse();
    let mut log_sum = 0.0;
    let mut step = 0usize;
    let mut series = Vec::new();
    let res = variational_flow_with(field, x0, [w0], settings.t_final, settings.delta, |t, _, ws| {
        step += 1;
        if step % renorm == 0 {
            let n = norm(&ws[0]);
            log_sum += n.ln();
            for c in ws[0].iter_mut() {
                *c /= n;
            }
        }
        if let Some(&m) = marks.last() {
            if t >= m * (1.0 - 1e-12) {
                marks.pop();
                series.push((t, (log_sum + norm(&ws[0]).ln()) / t));
            }
        }
    });
    (series, res.err())
}

/// MLE over doubling horizons; χ and τ_L come from the longest horizon
/// reached, with the sentinel test against the one before it.
pub fn mle_longest(section: &Section, seed: &Seed, settings: &ChaosSettings, levels: usize) -> Result<MleEstimate> {
    let x0 = section.lift_state(seed)?.to_array();
    let (series, err) = mle_series_from_state(section.model(), &x0, settings, levels);
    let (chi, tau_l) = match series.as_slice() {
        [] => return Err(err.unwrap_or_else(|| Error::InvalidParameter("no MLE horizon reached".into()))),
        [only] => (only.1, lyapunov_time(only.1, only.1)),
        [.., prev, last] => (last.1, lyapunov_time(last.1, prev.1)),
    };
    Ok(MleEstimate {
        series,
        chi,
        tau_l,
        stopped: err.map(|e| e.to_string()),
    })
}

/// FLI and MLE of one seed.
pub fn calibrate(section: &Section, seed: &Seed, settings: &ChaosSettings) -> Result<FliRecord> {
    let mut rec = fli(section, seed, settings)?;
    let (chi, tau) = mle(section, seed, settings)?;
    rec.chi = Some(chi);
    rec.tau_l = Some(tau);
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFlag {
    Ok,
    Inadmissible,
    /// The orbit failed before the horizon; the value covers the time reached.
    Truncated,
}

impl NodeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeFlag::Ok => "ok",
            NodeFlag::Inadmissible => "inadmissible",
            NodeFlag::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapNode {
    pub seed: Seed,
    /// NaN for inadmissible nodes.
    pub fli: f64,
    pub flag: NodeFlag,
}

/// FLI over a mesh, row-major in G.
pub fn fli_map(section: &Section, mesh: &Mesh, settings: &ChaosSettings) -> Vec<MapNode> {
    let settings = ChaosSettings {
        curve_stride: 0,
        ..*settings
    };
    let seeds: Vec<Seed> = mesh.nodes().collect();
    seeds
        .par_iter()
        .map(|seed| match section.lift(seed) {
            LiftOutcome::Inadmissible(_) => MapNode {
                seed: *seed,
                fli: f64::NAN,
                flag: NodeFlag::Inadmissible,
            },
            LiftOutcome::Admissible(state) => {
                let (value, _, t, err) = fli_from_state(section.model(), &state.to_array(), &settings);
                let flag = if err.is_some() || t < settings.t_final * (1.0 - 1e-12) {
                    NodeFlag::Truncated
                } else {
                    NodeFlag::Ok
                };
                MapNode {
                    seed: *seed,
                    fli: value,
                    flag,
                }
            }
        })
        .collect()
}

/// Chaotic/regular threshold: midpoint between a stable and a chaotic
/// reference value.
pub fn chaos_threshold(stable: f64, chaotic: f64) -> f64 {
    0.5 * (stable + chaotic)
}

/// Threshold from a calibration list whose first entry is the stable
/// reference and the rest are chaotic. The weakest chaotic reference is used,
/// so that every chaotic reference classifies as chaotic.
pub fn calibrated_threshold(refs: &[f64]) -> Option<f64> {
    let (&stable, chaotic) = refs.split_first()?;
    let weakest = chaotic.iter().copied().fold(f64::INFINITY, f64::min);
    weakest.is_finite().then(|| chaos_threshold(stable, weakest))
}

/// Latitudinal structure of a stability map: a regular band spanning every
/// angle, a mostly chaotic zone above it and a mixed zone below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub threshold: f64,
    /// Chaotic fraction of each G row, bottom to top.
    pub row_chaotic_fraction: Vec<f64>,
    /// G extent of the widest run of fully regular rows that leaves at least
    /// one row above and below it.
    pub band: Option<(f64, f64)>,
    pub upper_chaotic_fraction: f64,
    pub lower_regular_nodes: usize,
    pub lower_chaotic_nodes: usize,
    pub three_zones: bool,
}

/// Classifies the nodes of `fli_map(mesh)` at `threshold`. Truncated nodes
/// count as chaotic; inadmissible nodes are ignored.
pub fn zone_structure(nodes: &[MapNode], mesh: &Mesh, threshold: f64) -> ZoneReport {
    let (ni, nj) = (mesh.n_peri, mesh.n_mom);
    let chaotic = |n: &MapNode| n.flag == NodeFlag::Truncated || n.fli > threshold;
    let mut frac = Vec::with_capacity(nj);
    for j in 0..nj {
        let row: Vec<&MapNode> = nodes[j * ni..(j + 1) * ni]
            .iter()
            .filter(|n| n.flag != NodeFlag::Inadmissible)
            .collect();
        let c = row.iter().filter(|n| chaotic(n)).count();
        frac.push(if row.is_empty() { f64::NAN } else { c as f64 / row.len() as f64 });
    }
    let mut best: Option<(usize, usize)> = None;
    let mut j = 1;
    while j + 1 < nj {
        if frac[j] == 0.0 {
            let start = j;
            while j + 1 < nj && frac[j] == 0.0 {
                j += 1;
            }
            // Run [start, j) with rows on both sides.
            if j < nj && best.map_or(true, |(a, b)| j - start > b - a) {
                best = Some((start, j));
            }
        } else {
            j += 1;
        }
    }
    let mut report = ZoneReport {
        threshold,
        row_chaotic_fraction: frac.clone(),
        band: None,
        upper_chaotic_fraction: 0.0,
        lower_regular_nodes: 0,
        lower_chaotic_nodes: 0,
        three_zones: false,
    };
    if let Some((a, b)) = best {
        report.band = Some((mesh.node(0, a).ang_momentum, mesh.node(0, b - 1).ang_momentum));
        let above: Vec<f64> = frac[b..].iter().copied().filter(|f| f.is_finite()).collect();
        report.upper_chaotic_fraction = above.iter().sum::<f64>() / above.len().max(1) as f64;
        for n in nodes[..a * ni].iter().filter(|n| n.flag != NodeFlag::Inadmissible) {
            if chaotic(n) {
                report.lower_chaotic_nodes += 1;
            } else {
                report.lower_regular_nodes += 1;
            }
        }
        report.three_zones =
            report.upper_chaotic_fraction >= 0.5 && report.lower_regular_nodes > 0 && report.lower_chaotic_nodes > 0;
    }
    report
}
