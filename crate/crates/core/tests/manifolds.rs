use horseshoe_core::fixed_points::{newton_fixed_point, NewtonSettings, PlaneMap};
use horseshoe_core::manifolds::*;
use horseshoe_core::Result;

/// Affine saddle at `c` with multipliers (a, b) on the axes.
struct Affine {
    c: [f64; 2],
    a: f64,
    b: f64,
}

impl PlaneMap for Affine {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        Ok([self.c[0] + self.a * (z[0] - self.c[0]), self.c[1] + self.b * (z[1] - self.c[1])])
    }
}

struct Henon(f64);

impl PlaneMap for Henon {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        Ok([1.0 - self.0 * z[0] * z[0] + z[1], -z[0]])
    }
}

fn distance_to_polyline(z: [f64; 2], line: &[[f64; 2]]) -> f64 {
    line.windows(2)
        .map(|w| {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((z[0] - w[0][0]) * d[0] + (z[1] - w[0][1]) * d[1]) / len2).clamp(0.0, 1.0)
            };
            (z[0] - w[0][0] - t * d[0]).hypot(z[1] - w[0][1] - t * d[1])
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn depth_zero_is_the_fundamental_segment() {
    let map = Affine { c: [0.0, 0.0], a: 3.0, b: 1.0 / 3.0 };
    let settings = ManifoldSettings {
        depth: 0,
        ..ManifoldSettings::default()
    };
    let piece = grow_branch(&map, [0.0, 0.0], [1.0, 0.0], 3.0, ManifoldKind::Unstable, 1, &settings).unwrap();
    let pts = &piece.levels[0].points;
    let len = pts.last().unwrap()[0] - pts[0][0];
    assert!((len - 2.0 * 1e-5).abs() < 1e-18);
}

#[test]
fn negative_multiplier_alternates_sides() {
    let map = Affine { c: [0.0, 0.0], a: -2.0, b: -0.5 };
    let settings = ManifoldSettings {
        depth: 3,
        ..ManifoldSettings::default()
    };
    let piece = grow_branch(&map, [0.0, 0.0], [1.0, 0.0], -2.0, ManifoldKind::Unstable, 1, &settings).unwrap();
    let signs: Vec<f64> = piece.levels.iter().map(|l| l.points[0][0].signum()).collect();
    assert_eq!(signs, vec![1.0, -1.0, 1.0, -1.0]);
    // Levels 0 and 2 tile the positive side without a gap.
    let l0 = &piece.levels[0].points;
    let l2 = &piece.levels[2].points;
    assert!((l0.last().unwrap()[0] - l2[0][0]).abs() < 1e-15);
}

#[test]
fn henon_unstable_manifold_is_invariant() {
    let map = Henon(1.4);
    let a: f64 = 1.4;
    let x = (-1.0 - (1.0 + a).sqrt()) / a;
    let fp = newton_fixed_point(&map, [x, -x], &NewtonSettings::default()).unwrap();
    let (vu, _) = fp.linearization.directions.unwrap();
    let lu = fp.linearization.eigenvalues[0].0;
    let settings = ManifoldSettings {
        depth: 8,
        max_spacing: 1e-2,
        ..ManifoldSettings::default()
    };
    let piece = grow_branch(&map, fp.point, vu, lu, ManifoldKind::Unstable, 1, &settings).unwrap();
    assert!(piece.truncated.is_none());
    // Tangency of the first segment.
    let l0 = &piece.levels[0].points;
    let d = [l0[1][0] - l0[0][0], l0[1][1] - l0[0][1]];
    let cos = (d[0] * vu[0] + d[1] * vu[1]).abs() / d[0].hypot(d[1]);
    assert!(cos > (1.0f64.to_radians()).cos());
    for w in piece.levels.windows(2) {
        for p in &w[0].points {
            let img = map.apply(*p).unwrap();
            assert!(distance_to_polyline(img, &w[1].points) < 1e-6);
        }
        for s in w[1].points.windows(2) {
            assert!((s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1]) <= 1e-2 + 1e-12);
        }
    }
}

#[test]
fn crossing_segments() {
    let (t, u) = segment_intersection([0.0, 0.0], [2.0, 2.0], [0.0, 2.0], [2.0, 0.0]).unwrap();
    assert!((t - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
    assert!(segment_intersection([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]).is_none());
    assert!(segment_intersection([0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [3.0, -1.0]).is_none());
}

#[test]
fn parallel_pieces_do_not_intersect() {
    let map = Affine { c: [0.0, 0.0], a: 2.0, b: 0.5 };
    let other = Affine { c: [0.0, 1.0], a: 2.0, b: 0.5 };
    let s = ManifoldSettings {
        depth: 5,
        ..ManifoldSettings::default()
    };
    let a = grow_branch(&map, [0.0, 0.0], [1.0, 0.0], 2.0, ManifoldKind::Unstable, 1, &s).unwrap();
    let b = grow_branch(&other, [0.0, 1.0], [1.0, 0.0], 2.0, ManifoldKind::Stable, 1, &s).unwrap();
    assert!(find_heteroclinic(&map, &other, &a, &b, 1e-12).is_empty());
}

#[test]
fn transverse_pieces_meet_at_the_analytic_point() {
    // Unstable branch: the positive x-axis out of the origin. Stable branch
    // of the saddle at (0.3, −1): the vertical line x = 0.3, grown under
    // the inverse map.
    let forward = Affine { c: [0.0, 0.0], a: 2.0, b: 0.5 };
    let backward = Affine { c: [0.3, -1.0], a: 0.5, b: 2.0 };
    let s = ManifoldSettings {
        s0: 1e-3,
        depth: 10,
        max_spacing: 0.05,
        ..ManifoldSettings::default()
    };
    let a = grow_branch(&forward, [0.0, 0.0], [1.0, 0.0], 2.0, ManifoldKind::Unstable, 1, &s).unwrap();
    let b = grow_branch(&backward, [0.3, -1.0], [0.0, 1.0], 2.0, ManifoldKind::Stable, 1, &s).unwrap();
    let hits = find_heteroclinic(&forward, &backward, &a, &b, 1e-13);
    assert_eq!(hits.len(), 1, "{hits:?}");
    assert!((hits[0][0] - 0.3).abs() < 1e-12 && hits[0][1].abs() < 1e-12, "{hits:?}");
}
