//! Stable and unstable manifolds of hyperbolic fixed points and their
//! heteroclinic intersections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_points::{Backward, FixedPoint, PlaneMap, Stability};
use crate::poincare::Section;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Stable,
    Unstable,
}

impl ManifoldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ManifoldKind::Stable => "stable",
            ManifoldKind::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSettings {
    /// Inner end of the fundamental domain, measured from the fixed point.
    pub s0: f64,
    /// Points on the fundamental domain.
    pub initial_points: usize,
    pub depth: usize,
    pub max_spacing: f64,
    pub max_points: usize,
}

impl Default for ManifoldSettings {
    fn default() -> Self {
        Self {
            s0: 1e-5,
            initial_points: 16,
            depth: 3,
            max_spacing: 5e-3,
            max_points: 20_000,
        }
    }
}

/// One image P^d(I) of the fundamental domain. The angle coordinate is kept
/// continuous along the level (not folded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub depth: usize,
    pub points: Vec<[f64; 2]>,
    /// Fundamental-domain parameter s of each point: points[i] ≈ P^d(q + s v).
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPiece {
    pub owner: [f64; 2],
    pub kind: ManifoldKind,
    /// Side of the eigenvector the fundamental domain starts on (±1).
    pub branch: i8,
    /// Unit eigenvector, oriented by `branch`.
    pub direction: [f64; 2],
    /// Multiplier of the map that grows the piece (|λ| > 1).
    pub multiplier: f64,
    pub levels: Vec<Level>,
    /// Why growth stopped early, if it did.
    pub truncated: Option<String>,
}

impl ManifoldPiece {
    pub fn depth(&self) -> usize {
        self.levels.last().map_or(0, |l| l.depth)
    }

    pub fn point_count(&self) -> usize {
        self.levels.iter().map(|l| l.points.len()).sum()
    }

    /// All points with their depth, level by level.
    pub fn points(&self) -> impl Iterator<Item = ([f64; 2], usize)> + '_ {
        self.levels.iter().flat_map(|l| l.points.iter().map(move |p| (*p, l.depth)))
    }

    /// q + s·v.
    pub fn seed_point(&self, s: f64) -> [f64; 2] {
        [self.owner[0] + s * self.direction[0], self.owner[1] + s * self.direction[1]]
    }

    /// P^d(q + s v) by direct iteration.
    pub fn evaluate<M: PlaneMap + ?Sized>(&self, map: &M, depth: usize, s: f64) -> Result<[f64; 2]> {
        let mut z = self.seed_point(s);
        for _ in 0..depth {
            z = map.apply(z)?;
        }
        Ok(z)
    }
}

fn unwrap_near<M: PlaneMap + ?Sized>(map: &M, z: [f64; 2], reference: [f64; 2]) -> [f64; 2] {
    let d = map.diff(z, reference);
    [reference[0] + d[0], z[1]]
}

/// Grows one branch of an invariant manifold of the fixed point `owner` of
/// `map`, along `direction` where `map` expands by `multiplier` (|λ| > 1).
pub fn grow_branch<M: PlaneMap + ?Sized>(
    map: &M,
    owner: [f64; 2],
    direction: [f64; 2],
    multiplier: f64,
    kind: ManifoldKind,
    branch: i8,
    settings: &ManifoldSettings,
) -> Result<ManifoldPiece> {
    if !(multiplier.abs() > 1.0) {
        return Err(Error::NotHyperbolic);
    }
    let sign = if branch < 0 { -1.0 } else { 1.0 };
    let len = direction[0].hypot(direction[1]);
    let v = [sign * direction[0] / len, sign * direction[1] / len];
    // With a negative multiplier the branch flips side on each iterate,
    // so the domain spans two iterates.
    let outer = if multiplier > 0.0 { multiplier } else { multiplier * multiplier };
    let n0 = settings.initial_points.max(2);
    let mut piece = ManifoldPiece {
        owner,
        kind,
        branch: sign as i8,
        direction: v,
        multiplier,
        levels: Vec::new(),
        truncated: None,
    };
    let params: Vec<f64> = (0..n0)
        .map(|i| settings.s0 * outer.powf(i as f64 / (n0 - 1) as f64))
        .collect();
    let points = params.iter().map(|&s| piece.seed_point(s)).collect();
    piece.levels.push(Level {
        depth: 0,
        points,
        params,
    });
    let mut total = n0;

    for depth in 1..=settings.depth {
        let prev = piece.levels.last().unwrap();
        match next_level(map, prev, settings, total) {
            Ok(level) => {
                total += level.points.len();
                piece.levels.push(level);
            }
            Err(reason) => {
                piece.truncated = Some(format!("depth {depth}: {reason}"));
                break;
            }
        }
    }
    Ok(piece)
}

fn next_level<M: PlaneMap + ?Sized>(map: &M, prev: &Level, settings: &ManifoldSettings, used: usize) -> std::result::Result<Level, String> {
    let image = |z: [f64; 2]| map.apply(z).map_err(|e| e.to_string());
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(2 * prev.points.len());
    let mut params = Vec::with_capacity(points.capacity());
    let first = image(prev.points[0])?;
    points.push(first);
    params.push(prev.params[0]);
    for i in 0..prev.points.len() - 1 {
        // Stack of preimage intervals still to be resolved, leftmost on top.
        let end = image(prev.points[i + 1])?;
        let mut stack = vec![(prev.points[i + 1], prev.params[i + 1], end)];
        let mut left = (prev.points[i], prev.params[i]);
        while let Some((zr, sr, img_r)) = stack.pop() {
            let img_r = unwrap_near(map, img_r, *points.last().unwrap());
            let gap = map.diff(img_r, *points.last().unwrap());
            let pre_gap = map.diff(zr, left.0);
            let tiny = pre_gap[0].hypot(pre_gap[1]) < 1e-13;
            if gap[0].hypot(gap[1]) > settings.max_spacing && !tiny {
                let mid = [left.0[0] + 0.5 * pre_gap[0], left.0[1] + 0.5 * pre_gap[1]];
                let s_mid = 0.5 * (left.1 + sr);
                let img_mid = image(mid)?;
                stack.push((zr, sr, img_r));
                stack.push((mid, s_mid, img_mid));
            } else {
                points.push(img_r);
                params.push(sr);
                left = (zr, sr);
            }
            if used + points.len() > settings.max_points {
                return Err(format!("point budget of {} exhausted", settings.max_points));
            }
        }
    }
    Ok(Level {
        depth: prev.depth + 1,
        points,
        params,
    })
}

/// Grows a manifold branch of a hyperbolic fixed point of the return map:
/// unstable pieces under P, stable pieces under the backward return map.
pub fn grow_manifold(
    section: &Section,
    fp: &FixedPoint,
    kind: ManifoldKind,
    branch: i8,
    settings: &ManifoldSettings,
) -> Result<ManifoldPiece> {
    if fp.stability() != Stability::Hyperbolic {
        return Err(Error::NotHyperbolic);
    }
    let (vu, vs) = fp.linearization.directions.ok_or(Error::NotHyperbolic)?;
    let [(lu, _), (ls, _)] = fp.linearization.eigenvalues;
    match kind {
        ManifoldKind::Unstable => grow_branch(section, fp.point, vu, lu, kind, branch, settings),
        ManifoldKind::Stable => grow_branch(&Backward(section), fp.point, vs, 1.0 / ls, kind, branch, settings),
    }
}

/// A crossing between two polylines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub point: [f64; 2],
    /// (level index, segment index, fraction) on each polyline.
    pub on_a: (usize, usize, f64),
    pub on_b: (usize, usize, f64),
}

/// Intersection of segments p0p1 and q0q1 as fractions (t, u), if any.
pub fn segment_intersection(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> Option<(f64, f64)> {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let w = [q0[0] - p0[0], q0[1] - p0[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / denom;
    let u = (w[0] * r[1] - w[1] * r[0]) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some((t, u))
}

fn shift_angle(z: [f64; 2], by: f64) -> [f64; 2] {
    [z[0] + by, z[1]]
}

/// Linear polyline intersections between every level of `a` and `b`.
/// With an angle period, segments are compared after shifting by whole
/// periods.
pub fn polyline_intersections(a: &ManifoldPiece, b: &ManifoldPiece, period: Option<f64>) -> Vec<Crossing> {
    let mut out = Vec::new();
    for (ia, la) in a.levels.iter().enumerate() {
        for (ib, lb) in b.levels.iter().enumerate() {
            for (i, pa) in la.points.windows(2).enumerate() {
                let (amin, amax) = (pa[0][1].min(pa[1][1]), pa[0][1].max(pa[1][1]));
                for (j, pb) in lb.points.windows(2).enumerate() {
                    if pb[0][1].max(pb[1][1]) < amin || pb[0][1].min(pb[1][1]) > amax {
                        continue;
                    }
                    let shift = match period {
                        Some(p) => p * ((pa[0][0] - pb[0][0]) / p).round(),
                        None => 0.0,
                    };
                    let q0 = shift_angle(pb[0], shift);
                    let q1 = shift_angle(pb[1], shift);
                    if let Some((t, u)) = segment_intersection(pa[0], pa[1], q0, q1) {
                        let point = [pa[0][0] + t * (pa[1][0] - pa[0][0]), pa[0][1] + t * (pa[1][1] - pa[0][1])];
                        out.push(Crossing {
                            point,
                            on_a: (ia, i, t),
                            on_b: (ib, j, u),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Side of the line through (l0, l1) on which z lies.
fn side(l0: [f64; 2], l1: [f64; 2], z: [f64; 2]) -> f64 {
    (l1[0] - l0[0]) * (z[1] - l0[1]) - (l1[1] - l0[1]) * (z[0] - l0[0])
}

/// Bisection in the fundamental-domain parameter of `piece` at `depth` for
/// the point on the line (l0, l1). Returns the narrowed bracket and its end
/// points.
fn bisect_on_line<M: PlaneMap + ?Sized>(
    map: &M,
    piece: &ManifoldPiece,
    depth: usize,
    bracket: (f64, f64),
    line: ([f64; 2], [f64; 2]),
    tol: f64,
) -> Result<((f64, f64), ([f64; 2], [f64; 2]))> {
    let (mut s_lo, mut s_hi) = bracket;
    let align = |z: [f64; 2]| unwrap_near(map, z, line.0);
    let mut z_lo = align(piece.evaluate(map, depth, s_lo)?);
    let mut z_hi = align(piece.evaluate(map, depth, s_hi)?);
    let f_lo = side(line.0, line.1, z_lo);
    if f_lo * side(line.0, line.1, z_hi) > 0.0 {
        return Err(Error::Domain("manifold arc does not cross the line".into()));
    }
    for _ in 0..80 {
        let gap = map.diff(z_hi, z_lo);
        if gap[0].hypot(gap[1]) < tol {
            break;
        }
        let s_mid = 0.5 * (s_lo + s_hi);
        let z_mid = align(piece.evaluate(map, depth, s_mid)?);
        if side(line.0, line.1, z_mid) * f_lo > 0.0 {
            s_lo = s_mid;
            z_lo = z_mid;
        } else {
            s_hi = s_mid;
            z_hi = z_mid;
        }
    }
    Ok(((s_lo, s_hi), (z_lo, z_hi)))
}

/// Heteroclinic (or homoclinic) points between an unstable piece `a` and a
/// stable piece `b`: polyline intersections, each refined by alternating
/// bisection along both parameterisations, then deduplicated at `tol`.
pub fn find_heteroclinic<F: PlaneMap + ?Sized, B: PlaneMap + ?Sized>(
    forward: &F,
    backward: &B,
    a: &ManifoldPiece,
    b: &ManifoldPiece,
    tol: f64,
) -> Vec<[f64; 2]> {
    let crossings = polyline_intersections(a, b, forward.angle_period());
    let mut found: Vec<[f64; 2]> = Vec::new();
    for c in crossings {
        let point = refine_crossing(forward, backward, a, b, &c, tol).unwrap_or(c.point);
        let point = forward.normalize(point);
        if found.iter().all(|p| {
            let d = forward.diff(*p, point);
            d[0].hypot(d[1]) >= tol.max(1e-9) * 10.0
        }) {
            found.push(point);
        }
    }
    found.sort_by(|p, q| p[1].total_cmp(&q[1]).then(p[0].total_cmp(&q[0])));
    found
}

fn refine_crossing<F: PlaneMap + ?Sized, B: PlaneMap + ?Sized>(
    forward: &F,
    backward: &B,
    a: &ManifoldPiece,
    b: &ManifoldPiece,
    c: &Crossing,
    tol: f64,
) -> Result<[f64; 2]> {
    let la = &a.levels[c.on_a.0];
    let lb = &b.levels[c.on_b.0];
    let (ia, ib) = (c.on_a.1, c.on_b.1);
    let mut seg_a = (la.points[ia], la.points[ia + 1]);
    let mut seg_b = (lb.points[ib], lb.points[ib + 1]);
    let br_a = (la.params[ia], la.params[ia + 1]);
    let br_b = (lb.params[ib], lb.params[ib + 1]);
    let mut br_a = br_a;
    let mut br_b = br_b;
    let bisect = |piece: &ManifoldPiece, depth, bracket, line| match piece.kind {
        ManifoldKind::Unstable => bisect_on_line(forward, piece, depth, bracket, line, tol),
        ManifoldKind::Stable => bisect_on_line(backward, piece, depth, bracket, line, tol),
    };
    for _ in 0..3 {
        (br_a, seg_a) = bisect(a, la.depth, br_a, seg_b)?;
        (br_b, seg_b) = bisect(b, lb.depth, br_b, seg_a)?;
    }
    let shifted_b = (unwrap_near(forward, seg_b.0, seg_a.0), unwrap_near(forward, seg_b.1, seg_a.0));
    let r = [seg_a.1[0] - seg_a.0[0], seg_a.1[1] - seg_a.0[1]];
    let s = [shifted_b.1[0] - shifted_b.0[0], shifted_b.1[1] - shifted_b.0[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return Ok([0.5 * (seg_a.0[0] + seg_a.1[0]), 0.5 * (seg_a.0[1] + seg_a.1[1])]);
    }
    let w = [shifted_b.0[0] - seg_a.0[0], shifted_b.0[1] - seg_a.0[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / denom;
    Ok([seg_a.0[0] + t * r[0], seg_a.0[1] + t * r[1]])
}
