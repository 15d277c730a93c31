//! Run configuration. Every table and key is optional; missing values take
//! the reference defaults. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use horseshoe_core::chaos::ChaosSettings;
use horseshoe_core::covering::CoveringSettings;
use horseshoe_core::fixed_points::{NewtonSettings, SurveySettings};
use horseshoe_core::manifolds::ManifoldSettings;
use horseshoe_core::model::PotentialBackend;
use horseshoe_core::poincare::{Mesh, ReturnSettings, Section, DEFAULT_STEPS_PER_PERIOD};
use horseshoe_core::{Parameters, SecularModel, SecularState};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Output directory; `--out` overrides it.
    pub out: Option<PathBuf>,
    /// Worker threads (0: all cores); `--workers` overrides it.
    pub workers: Option<usize>,
    /// Seed for randomly sampled checks.
    pub seed: u64,
    pub model: ModelConfig,
    pub integrator: IntegratorConfig,
    pub poincare: PoincareConfig,
    pub portrait: PortraitConfig,
    pub admissible: AdmissibleConfig,
    pub fli: FliConfig,
    pub fixed_points: FixedPointsConfig,
    pub manifolds: ManifoldsConfig,
    pub horseshoe: HorseshoeConfig,
    pub flow_check: FlowCheckConfig,
    pub secular_portrait: SecularPortraitConfig,
    pub validate: ValidateConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub m0: f64,
    pub beta: f64,
    pub total_ang_momentum: f64,
    pub lambda: f64,
    pub k_max: usize,
    pub quad_nodes: usize,
    pub backend: PotentialBackend,
    pub datum: DatumConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = Parameters::default();
        Self {
            m0: p.m0,
            beta: p.beta,
            total_ang_momentum: p.total_ang_momentum,
            lambda: p.lambda,
            k_max: p.k_max,
            quad_nodes: p.quad_nodes,
            backend: p.backend,
            datum: DatumConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatumConfig {
    #[serde(rename = "G")]
    pub big_g: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub g: f64,
    pub r: f64,
}

impl Default for DatumConfig {
    fn default() -> Self {
        let d = Parameters::default().datum;
        Self {
            big_g: d.ang_momentum,
            big_r: d.radial_momentum,
            g: d.pericentre,
            r: d.distance,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// δ = T_r / steps_per_period, T_r the measured return time of the datum.
    pub steps_per_period: f64,
    /// Give up on a return after this many periods.
    pub t_max_periods: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            t_max_periods: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Sign of the datum's radial momentum.
    Datum,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareConfig {
    pub eps_sigma: f64,
    pub branch: Branch,
    /// Minimum flight time, in periods, before a crossing counts.
    pub t_min_periods: f64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self {
            eps_sigma: 1e-10,
            branch: Branch::Datum,
            t_min_periods: 0.01,
        }
    }
}

/// A rectangle of the section. Bounds default to the full chart.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub n_g: usize,
    #[serde(rename = "n_G")]
    pub n_big_g: usize,
    #[serde(default)]
    pub g_range: Option<[f64; 2]>,
    #[serde(default, rename = "G_range")]
    pub big_g_range: Option<[f64; 2]>,
}

impl MeshConfig {
    pub const fn square(n: usize) -> Self {
        Self {
            n_g: n,
            n_big_g: n,
            g_range: None,
            big_g_range: None,
        }
    }

    pub fn mesh(&self, lambda: f64) -> Result<Mesh> {
        ensure!(self.n_g > 0 && self.n_big_g > 0, "mesh sizes must be positive");
        let mut m = Mesh::full(lambda, self.n_g, self.n_big_g);
        if let Some([lo, hi]) = self.g_range {
            ensure!((0.0..=PI).contains(&lo) && lo <= hi && hi <= PI, "g_range must lie in [0, pi]");
            m.peri_min = lo;
            m.peri_max = hi;
        }
        if let Some([lo, hi]) = self.big_g_range {
            ensure!(lo <= hi && lo.abs() <= lambda && hi.abs() <= lambda, "G_range must lie in [-Lambda, Lambda]");
            m.mom_min = lo;
            m.mom_max = hi;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortraitConfig {
    pub mesh: MeshConfig,
    /// Returns per seed.
    pub iterates: usize,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig::square(12),
            iterates: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmissibleConfig {
    pub mesh: MeshConfig,
    /// Shift of the energy level relative to the datum's.
    pub energy_offset: f64,
}

impl Default for AdmissibleConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig::square(200),
            energy_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Secular time; multiplied by σ(β) before integrating.
    Secular,
    /// Raw integration time of the model.
    Model,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FliConfig {
    pub mesh: MeshConfig,
    pub horizon: f64,
    pub time_unit: TimeUnit,
    /// Longest horizon of the Lyapunov-exponent runs for the calibration
    /// seeds. χ is sampled at mle_horizon / 2^k for k < mle_levels and taken
    /// at the longest horizon the orbit reaches.
    pub mle_horizon: f64,
    pub mle_levels: usize,
    /// Reference seeds (g, G): the stable one first, then the chaotic ones.
    /// The map threshold sits midway between the stable FLI and the weakest
    /// chaotic FLI.
    pub calibration: Vec<[f64; 2]>,
    /// Points per calibration curve.
    pub curve_samples: usize,
    pub renorm_steps: usize,
}

impl Default for FliConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig::square(40),
            horizon: 5000.0,
            time_unit: TimeUnit::Secular,
            mle_horizon: 160000.0,
            mle_levels: 6,
            calibration: vec![[PI, -2.0], [1.6, -2.0], [PI, 2.0]],
            curve_samples: 500,
            renorm_steps: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointsConfig {
    pub mesh: MeshConfig,
    /// Extra Newton guesses (g, G), run in addition to the mesh.
    pub guesses: Vec<[f64; 2]>,
    /// Skip the mesh and use only the guesses.
    pub guesses_only: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub dedup_radius: f64,
}

impl Default for FixedPointsConfig {
    fn default() -> Self {
        let n = NewtonSettings::default();
        Self {
            mesh: MeshConfig::square(60),
            guesses: Vec::new(),
            guesses_only: false,
            tol: n.tol,
            max_iter: SurveySettings::default().newton.max_iter,
            fd_step: n.fd_step,
            dedup_radius: SurveySettings::default().dedup_radius,
        }
    }
}

impl FixedPointsConfig {
    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            ..NewtonSettings::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldsConfig {
    /// Newton guesses for the fixed points whose manifolds are grown.
    pub points: Vec<[f64; 2]>,
    pub depth: usize,
    pub s0: f64,
    pub initial_points: usize,
    pub max_spacing: f64,
    pub max_points: usize,
    /// Pairs (i, j): intersect the unstable manifold of point i with the
    /// stable manifold of point j.
    pub heteroclinic: Vec<[usize; 2]>,
    pub intersection_tol: f64,
}

impl Default for ManifoldsConfig {
    fn default() -> Self {
        let m = ManifoldSettings::default();
        Self {
            points: vec![[0.203945459, 2.06302430], [0.278077917, 2.21418596]],
            depth: m.depth,
            s0: m.s0,
            initial_points: m.initial_points,
            max_spacing: m.max_spacing,
            max_points: m.max_points,
            heteroclinic: vec![[0, 1]],
            intersection_tol: 1e-9,
        }
    }
}

impl ManifoldsConfig {
    pub fn settings(&self) -> ManifoldSettings {
        ManifoldSettings {
            s0: self.s0,
            initial_points: self.initial_points,
            depth: self.depth,
            max_spacing: self.max_spacing,
            max_points: self.max_points,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HorseshoeConfig {
    /// Newton guesses for the two saddles.
    pub q1: [f64; 2],
    pub q2: [f64; 2],
    /// Extents along the stable (A) and unstable (B) eigenvectors.
    pub a1: [f64; 2],
    pub b1: [f64; 2],
    pub a2: [f64; 2],
    pub b2: [f64; 2],
    pub edge_samples: usize,
    pub grid: usize,
    pub fibers: usize,
    /// Repeat at twice the sampling density and require the same verdict.
    pub refine: bool,
}

impl Default for HorseshoeConfig {
    fn default() -> Self {
        let c = CoveringSettings::default();
        Self {
            q1: [0.203945459, 2.06302430],
            q2: [0.278077917, 2.21418596],
            a1: [-0.02, 0.08],
            b1: [-0.025, 0.01],
            a2: [-0.075, 0.025],
            b2: [-0.02, 0.01],
            edge_samples: c.edge_samples,
            grid: c.grid,
            fibers: c.fibers,
            refine: true,
        }
    }
}

impl HorseshoeConfig {
    pub fn settings(&self) -> CoveringSettings {
        CoveringSettings {
            edge_samples: self.edge_samples,
            grid: self.grid,
            fibers: self.fibers,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSeed {
    pub label: String,
    /// (g, G).
    pub seed: [f64; 2],
    pub energy_tol: f64,
    pub reversibility_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowCheckConfig {
    pub seeds: Vec<FlowSeed>,
    /// Horizon in radial periods.
    pub revolutions: f64,
    /// δ = T_r / steps_per_period for this check.
    pub steps_per_period: f64,
    /// Keep every n-th step in the trajectory dumps (0: no dump).
    pub dump_stride: usize,
}

impl Default for FlowCheckConfig {
    fn default() -> Self {
        Self {
            seeds: vec![
                FlowSeed {
                    label: "regular".into(),
                    seed: [PI, -2.0],
                    energy_tol: 1e-12,
                    reversibility_tol: 1e-12,
                },
                FlowSeed {
                    label: "chaotic".into(),
                    seed: [PI, 2.0],
                    energy_tol: 1e-10,
                    reversibility_tol: 1e-8,
                },
            ],
            revolutions: 100.0,
            steps_per_period: 32000.0,
            dump_stride: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SecularPortraitConfig {
    pub n_g: usize,
    #[serde(rename = "n_G")]
    pub n_big_g: usize,
}

impl Default for SecularPortraitConfig {
    fn default() -> Self {
        Self { n_g: 200, n_big_g: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    pub random_points: usize,
    /// Radial periods for the energy and reversibility checks.
    pub revolutions: f64,
    pub steps_per_period: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            random_points: 100,
            revolutions: 10.0,
            steps_per_period: 16000.0,
        }
    }
}

/// A parsed configuration together with the hash of its source text.
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
}

pub fn load(path: &std::path::Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Loaded> {
    let config: RunConfig = toml::from_str(text).context("parsing configuration")?;
    config.check()?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(Loaded { config, hash })
}

impl RunConfig {
    pub fn parameters(&self) -> Parameters {
        let m = &self.model;
        Parameters {
            m0: m.m0,
            beta: m.beta,
            total_ang_momentum: m.total_ang_momentum,
            lambda: m.lambda,
            k_max: m.k_max,
            quad_nodes: m.quad_nodes,
            backend: m.backend,
            datum: SecularState::new(m.datum.big_g, m.datum.big_r, m.datum.g, m.datum.r),
        }
    }

    /// Validates everything that can be checked without integrating.
    pub fn check(&self) -> Result<()> {
        self.parameters().validate()?;
        let i = &self.integrator;
        ensure!(i.steps_per_period >= 10.0, "integrator.steps_per_period must be at least 10");
        ensure!(i.t_max_periods > 1.0, "integrator.t_max_periods must exceed 1");
        let p = &self.poincare;
        ensure!(p.eps_sigma > 0.0, "poincare.eps_sigma must be positive");
        ensure!(
            p.t_min_periods > 0.0 && p.t_min_periods < 1.0,
            "poincare.t_min_periods must lie in (0, 1)"
        );
        let lambda = self.model.lambda;
        for (name, mesh) in [
            ("portrait", &self.portrait.mesh),
            ("admissible", &self.admissible.mesh),
            ("fli", &self.fli.mesh),
            ("fixed_points", &self.fixed_points.mesh),
        ] {
            mesh.mesh(lambda).with_context(|| format!("{name}.mesh"))?;
        }
        let f = &self.fli;
        ensure!(f.horizon > 0.0 && f.mle_horizon > 0.0, "fli horizons must be positive");
        ensure!(f.renorm_steps > 0, "fli.renorm_steps must be positive");
        ensure!(f.mle_levels > 0 && f.mle_levels <= 32, "fli.mle_levels must lie in 1..=32");
        let h = &self.horseshoe;
        for (name, iv) in [("a1", h.a1), ("b1", h.b1), ("a2", h.a2), ("b2", h.b2)] {
            if !(iv[0] < iv[1]) {
                bail!("horseshoe.{name} must be an increasing interval");
            }
        }
        ensure!(h.edge_samples >= 2 && h.grid >= 2, "horseshoe sampling must be at least 2");
        let m = &self.manifolds;
        ensure!(m.s0 > 0.0 && m.max_spacing > 0.0, "manifold scales must be positive");
        ensure!(m.initial_points >= 2, "manifolds.initial_points must be at least 2");
        for [a, b] in &m.heteroclinic {
            ensure!(
                *a < m.points.len() && *b < m.points.len(),
                "manifolds.heteroclinic refers to a missing point"
            );
        }
        let fc = &self.flow_check;
        ensure!(fc.revolutions > 0.0, "flow_check.revolutions must be positive");
        ensure!(fc.steps_per_period >= 10.0, "flow_check.steps_per_period must be at least 10");
        ensure!(
            self.secular_portrait.n_g >= 3 && self.secular_portrait.n_big_g >= 3,
            "secular_portrait needs at least 3x3 nodes"
        );
        Ok(())
    }

    pub fn model(&self) -> Result<SecularModel> {
        Ok(SecularModel::new(self.parameters())?)
    }

    /// The section with the configured step, tolerances and branch.
    pub fn section(&self) -> Result<Section> {
        let base = Section::build_with_steps(self.model()?, self.integrator.steps_per_period)?;
        let period = base.settings().delta * self.integrator.steps_per_period;
        let settings = ReturnSettings {
            delta: base.settings().delta,
            eps_sigma: self.poincare.eps_sigma,
            t_min: self.poincare.t_min_periods * period,
            t_max: self.integrator.t_max_periods * period,
        };
        let branch = match self.poincare.branch {
            Branch::Datum => None,
            Branch::Positive => Some(1.0),
            Branch::Negative => Some(-1.0),
        };
        Ok(Section::with_settings(self.model()?, settings, branch)?)
    }

    /// Converts a configured time to model time.
    pub fn model_time(&self, t: f64) -> f64 {
        match self.fli.time_unit {
            TimeUnit::Secular => t * self.parameters().time_scale(),
            TimeUnit::Model => t,
        }
    }

    pub fn chaos_settings(&self, section: &Section, horizon: f64) -> ChaosSettings {
        let t_final = self.model_time(horizon);
        let delta = section.settings().delta.min(t_final / 100.0);
        let mut s = ChaosSettings::new(t_final, delta);
        s.renorm_steps = self.fli.renorm_steps;
        s
    }
}
