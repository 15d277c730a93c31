//! h-sets and sampled verification of covering relations and of the
//! two-set topological horseshoe.
//!
//! Condition (1) of the covering definition is read with the horizontal
//! fiber in the source set and the strip in the target set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_points::{FixedPoint, PlaneMap};

/// Margins below this (in chart units) make a verdict inconclusive.
pub const RESOLUTION: f64 = 1e-3;

/// Parallelogram N = q + A·v_s + B·v_u with its chart onto [−1, 1]².
/// The first chart coordinate u follows the exit direction v_u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HSet {
    pub centre: [f64; 2],
    pub v_s: [f64; 2],
    pub v_u: [f64; 2],
    /// Coefficient range along v_s.
    pub a: [f64; 2],
    /// Coefficient range along v_u.
    pub b: [f64; 2],
    /// Period of the first plane coordinate, if it is an angle.
    pub angle_period: Option<f64>,
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

pub fn make_hset(centre: [f64; 2], v_s: [f64; 2], v_u: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Result<HSet> {
    if !(a[1] > a[0]) || !(b[1] > b[0]) {
        return Err(Error::DegenerateHSet(format!("empty interval {a:?} or {b:?}")));
    }
    let (ns, nu) = (v_s[0].hypot(v_s[1]), v_u[0].hypot(v_u[1]));
    if !(ns > 0.0 && nu > 0.0) {
        return Err(Error::DegenerateHSet("zero direction vector".into()));
    }
    let (v_s, v_u) = (unit(v_s), unit(v_u));
    if (v_s[0] * v_u[1] - v_s[1] * v_u[0]).abs() <= 1e-6 {
        return Err(Error::DegenerateHSet("directions are (nearly) parallel".into()));
    }
    Ok(HSet {
        centre,
        v_s,
        v_u,
        a,
        b,
        angle_period: None,
    })
}

/// h-set on q with the stable/unstable directions of a hyperbolic fixed point.
pub fn hset_at_fixed_point<M: PlaneMap + ?Sized>(map: &M, fp: &FixedPoint, a: [f64; 2], b: [f64; 2]) -> Result<HSet> {
    let (vu, vs) = fp.linearization.directions.ok_or(Error::NotHyperbolic)?;
    let mut h = make_hset(fp.point, vs, vu, a, b)?;
    h.angle_period = map.angle_period();
    Ok(h)
}

impl HSet {
    pub fn with_angle_period(mut self, period: Option<f64>) -> Self {
        self.angle_period = period;
        self
    }

    /// (a, b) with point = q + a·v_s + b·v_u.
    fn coefficients(&self, p: [f64; 2]) -> [f64; 2] {
        let mut d = [p[0] - self.centre[0], p[1] - self.centre[1]];
        if let Some(per) = self.angle_period {
            d[0] -= per * (d[0] / per).round();
        }
        let det = self.v_s[0] * self.v_u[1] - self.v_s[1] * self.v_u[0];
        [
            (d[0] * self.v_u[1] - d[1] * self.v_u[0]) / det,
            (self.v_s[0] * d[1] - self.v_s[1] * d[0]) / det,
        ]
    }

    /// Chart c_N: (u, s) with u along v_u, both in [−1, 1] on N.
    pub fn coords(&self, p: [f64; 2]) -> [f64; 2] {
        let [ca, cb] = self.coefficients(p);
        [
            (2.0 * cb - (self.b[0] + self.b[1])) / (self.b[1] - self.b[0]),
            (2.0 * ca - (self.a[0] + self.a[1])) / (self.a[1] - self.a[0]),
        ]
    }

    /// c_N⁻¹.
    pub fn point(&self, uv: [f64; 2]) -> [f64; 2] {
        let cb = 0.5 * (self.b[0] + self.b[1]) + 0.5 * uv[0] * (self.b[1] - self.b[0]);
        let ca = 0.5 * (self.a[0] + self.a[1]) + 0.5 * uv[1] * (self.a[1] - self.a[0]);
        [
            self.centre[0] + ca * self.v_s[0] + cb * self.v_u[0],
            self.centre[1] + ca * self.v_s[1] + cb * self.v_u[1],
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [u, s] = self.coords(p);
        u.abs() <= 1.0 && s.abs() <= 1.0
    }

    /// Corners in chart order (−1,−1), (1,−1), (1,1), (−1,1), closed.
    pub fn outline(&self) -> Vec<[f64; 2]> {
        [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]
            .iter()
            .map(|&c| self.point(c))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringSettings {
    /// Samples per edge and per fiber.
    pub edge_samples: usize,
    /// Interior grid is grid × grid.
    pub grid: usize,
    /// Extra horizontal fibers scanned when the middle one fails.
    pub fibers: usize,
}

impl Default for CoveringSettings {
    fn default() -> Self {
        Self {
            edge_samples: 64,
            grid: 64,
            fibers: 16,
        }
    }
}

impl CoveringSettings {
    pub fn refined(&self) -> Self {
        Self {
            edge_samples: 2 * self.edge_samples,
            grid: 2 * self.grid,
            fibers: self.fibers,
        }
    }
}

fn linspace(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
}

/// Images of the sample points of a source h-set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledImage {
    pub source: HSet,
    pub settings: CoveringSettings,
    /// Images of the interior grid (row-major in s).
    pub interior: Vec<[f64; 2]>,
    /// Images of the left (u = −1) and right (u = 1) exit edges, ordered in s.
    pub left: Vec<[f64; 2]>,
    pub right: Vec<[f64; 2]>,
    /// Images of the entry edges s = −1 and s = 1, ordered in u.
    pub bottom: Vec<[f64; 2]>,
    pub top: Vec<[f64; 2]>,
    /// Images of the horizontal fibers: the middle one first, then `fibers` more.
    pub fiber_levels: Vec<f64>,
    pub fiber_images: Vec<Vec<[f64; 2]>>,
}

fn map_all<M: PlaneMap + ?Sized>(map: &M, h: &HSet, chart: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    chart
        .par_iter()
        .map(|&c| {
            let x = h.point(c);
            map.apply(x).map_err(|e| match e {
                Error::Inadmissible { .. } => e,
                other => Error::Inadmissible {
                    g: x[0],
                    big_g: x[1],
                    reason: format!("sample at chart ({:.4}, {:.4}): {other}", c[0], c[1]),
                },
            })
        })
        .collect()
}

/// Maps every sample of `source` once.
pub fn sample_images<M: PlaneMap + ?Sized>(map: &M, source: &HSet, settings: &CoveringSettings) -> Result<SampledImage> {
    let grid = linspace(settings.grid);
    let edge = linspace(settings.edge_samples);
    let interior: Vec<[f64; 2]> = grid.iter().flat_map(|&s| grid.iter().map(move |&u| [u, s])).collect();
    let side = |u: f64| edge.iter().map(|&s| [u, s]).collect::<Vec<_>>();
    let across = |s: f64| edge.iter().map(|&u| [u, s]).collect::<Vec<_>>();
    let mut fiber_levels = vec![0.0];
    let k = settings.fibers;
    fiber_levels.extend((1..=k).map(|i| -1.0 + 2.0 * i as f64 / (k + 1) as f64));
    let fiber_images = fiber_levels
        .iter()
        .enumerate()
        .map(|(i, &s)| if i == 0 { map_all(map, source, &across(s)) } else { Ok(Vec::new()) })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledImage {
        source: *source,
        settings: *settings,
        interior: map_all(map, source, &interior)?,
        left: map_all(map, source, &side(-1.0))?,
        right: map_all(map, source, &side(1.0))?,
        bottom: map_all(map, source, &across(-1.0))?,
        top: map_all(map, source, &across(1.0))?,
        fiber_levels,
        fiber_images,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    fn from_margin(m: f64) -> Self {
        if m > RESOLUTION {
            Verdict::Holds
        } else if m < -RESOLUTION {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    }

    fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Holds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// 1 − max |s| over the image of the interior grid and edges.
    pub strip: f64,
    /// Exit clearance of the edge sent to u < −1.
    pub left_exit: f64,
    /// Exit clearance of the edge sent to u > 1.
    pub right_exit: f64,
    /// Best strip clearance among the scanned horizontal fibers.
    pub fiber: f64,
}

impl Margins {
    pub fn min(&self) -> f64 {
        self.strip.min(self.left_exit).min(self.right_exit).min(self.fiber)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub strip: usize,
    pub left_exit: usize,
    pub right_exit: usize,
    pub fiber: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub holds: bool,
    pub verdict: Verdict,
    pub margins: Margins,
    pub samples: SampleCounts,
    /// True when the source's u = −1 edge goes to u > 1 of the target.
    pub swapped: bool,
    /// Chart level s of the fiber that satisfied condition (1).
    pub fiber_level: f64,
    /// Mapped source edges (left, right, bottom, top) in plane coordinates.
    pub mapped_edges: [Vec<[f64; 2]>; 4],
    pub target_outline: Vec<[f64; 2]>,
}

fn strip_clearance(target: &HSet, pts: &[[f64; 2]]) -> f64 {
    pts.iter().map(|&p| 1.0 - target.coords(p)[1].abs()).fold(f64::INFINITY, f64::min)
}

/// Evaluates the covering relation source ⇒ target from precomputed images.
/// `refill` maps extra fibers on demand.
fn evaluate(images: &SampledImage, target: &HSet, mut refill: impl FnMut(f64) -> Result<Vec<[f64; 2]>>) -> Result<CoveringReport> {
    let u_of = |p: &[f64; 2]| target.coords(*p)[0];
    let mut strip = strip_clearance(target, &images.interior);
    for e in [&images.left, &images.right, &images.bottom, &images.top] {
        strip = strip.min(strip_clearance(target, e));
    }
    // Orientation by majority vote of the left edge.
    let left_neg = images.left.iter().filter(|p| u_of(p) < 0.0).count();
    let swapped = 2 * left_neg < images.left.len();
    let (to_neg, to_pos) = if swapped {
        (&images.right, &images.left)
    } else {
        (&images.left, &images.right)
    };
    let left_exit = to_neg.iter().map(|p| -1.0 - u_of(p)).fold(f64::INFINITY, f64::min);
    let right_exit = to_pos.iter().map(|p| u_of(p) - 1.0).fold(f64::INFINITY, f64::min);

    let mut fiber = strip_clearance(target, &images.fiber_images[0]);
    let mut fiber_level = images.fiber_levels[0];
    let mut fiber_count = images.fiber_images[0].len();
    if fiber <= RESOLUTION {
        for &s in &images.fiber_levels[1..] {
            let pts = refill(s)?;
            fiber_count += pts.len();
            let c = strip_clearance(target, &pts);
            if c > fiber {
                fiber = c;
                fiber_level = s;
            }
            if fiber > RESOLUTION {
                break;
            }
        }
    }
    let margins = Margins {
        strip,
        left_exit,
        right_exit,
        fiber,
    };
    let verdict = [strip, left_exit, right_exit, fiber]
        .iter()
        .map(|&m| Verdict::from_margin(m))
        .fold(Verdict::Holds, Verdict::combine);
    Ok(CoveringReport {
        holds: verdict == Verdict::Holds,
        verdict,
        margins,
        samples: SampleCounts {
            strip: images.interior.len() + images.left.len() + images.right.len() + images.bottom.len() + images.top.len(),
            left_exit: to_neg.len(),
            right_exit: to_pos.len(),
            fiber: fiber_count,
        },
        swapped,
        fiber_level,
        mapped_edges: [
            images.left.clone(),
            images.right.clone(),
            images.bottom.clone(),
            images.top.clone(),
        ],
        target_outline: target.outline(),
    })
}

/// Checks source ⇒ target by sampling.
pub fn check_covering<M: PlaneMap + ?Sized>(map: &M, source: &HSet, target: &HSet, settings: &CoveringSettings) -> Result<CoveringReport> {
    let images = sample_images(map, source, settings)?;
    covering_from_images(map, &images, target)
}

/// As [`check_covering`] with the source images already computed.
pub fn covering_from_images<M: PlaneMap + ?Sized>(map: &M, images: &SampledImage, target: &HSet) -> Result<CoveringReport> {
    let edge = linspace(images.settings.edge_samples);
    evaluate(images, target, |s| {
        let chart: Vec<[f64; 2]> = edge.iter().map(|&u| [u, s]).collect();
        map_all(map, &images.source, &chart)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeReport {
    pub holds: bool,
    pub verdict: Verdict,
    /// Relations N1⇒N1, N1⇒N2, N2⇒N1, N2⇒N2 in that order.
    pub relations: Vec<(String, CoveringReport)>,
    pub min_margin: f64,
}

/// The four relations between two h-sets.
pub fn check_horseshoe<M: PlaneMap + ?Sized>(map: &M, n1: &HSet, n2: &HSet, settings: &CoveringSettings) -> Result<HorseshoeReport> {
    let im1 = sample_images(map, n1, settings)?;
    let im2 = sample_images(map, n2, settings)?;
    let mut relations = Vec::with_capacity(4);
    for (name, images, target) in [
        ("N1=>N1", &im1, n1),
        ("N1=>N2", &im1, n2),
        ("N2=>N1", &im2, n1),
        ("N2=>N2", &im2, n2),
    ] {
        relations.push((name.to_string(), covering_from_images(map, images, target)?));
    }
    let verdict = relations.iter().map(|r| r.1.verdict).fold(Verdict::Holds, Verdict::combine);
    let min_margin = relations.iter().map(|r| r.1.margins.min()).fold(f64::INFINITY, f64::min);
    Ok(HorseshoeReport {
        holds: verdict == Verdict::Holds,
        verdict,
        relations,
        min_margin,
    })
}
