//! Alignment, thickness and continuity reports over finished toolpaths.

use serde::Serialize;

use crate::layerfield::{closest_on_segment, measure_layer_thickness, CurvedLayer};
use crate::locate::TetLocator;
use crate::mesh::{Point, TetMesh};
use crate::psl::PslWeights;
use crate::stress::PrincipalStress;
use crate::surfpath::Toolpath;
use crate::{Error, Result};

pub const HISTOGRAM_BIN_DEG: f64 = 2.0;
pub const ALIGNED_DEG: f64 = 10.0;
pub const SHARP_TURN_DEG: f64 = 30.0;
/// A path visits a contour when it passes within this many edge lengths.
pub const VISIT_EDGE_LENGTHS: f64 = 2.0;

/// Summary of a set of angles in [0, 90] degrees.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AngleStats {
    pub count: usize,
    pub mean_deg: f64,
    /// Each sample weighted by its segment length.
    pub length_weighted_mean_deg: f64,
    pub median_deg: f64,
    pub fraction_within_10_deg: f64,
    pub length_fraction_within_10_deg: f64,
    /// Fraction of samples per 2 degree bin starting at 0.
    pub histogram: Vec<f64>,
}

impl AngleStats {
    pub fn from_samples(samples: &[(f64, f64)]) -> Self {
        let bins = (90.0 / HISTOGRAM_BIN_DEG) as usize;
        let mut histogram = vec![0.0; bins];
        if samples.is_empty() {
            return AngleStats {
                histogram,
                ..Default::default()
            };
        }
        let n = samples.len() as f64;
        let total_len: f64 = samples.iter().map(|s| s.1).sum();
        let mut sorted: Vec<f64> = samples.iter().map(|s| s.0).collect();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        let mut counts = vec![0usize; bins];
        for &(a, _) in samples {
            counts[((a / HISTOGRAM_BIN_DEG) as usize).min(bins - 1)] += 1;
        }
        for (h, c) in histogram.iter_mut().zip(counts) {
            *h = c as f64 / n;
        }
        let by_len = |f: &dyn Fn(f64) -> f64| {
            if total_len > 0.0 {
                samples.iter().map(|&(a, l)| f(a) * l).sum::<f64>() / total_len
            } else {
                0.0
            }
        };
        let aligned = |a: f64| if a <= ALIGNED_DEG { 1.0 } else { 0.0 };
        AngleStats {
            count: samples.len(),
            mean_deg: samples.iter().map(|s| s.0).sum::<f64>() / n,
            length_weighted_mean_deg: by_len(&|a| a),
            median_deg: median,
            fraction_within_10_deg: samples.iter().map(|s| aligned(s.0)).sum::<f64>() / n,
            length_fraction_within_10_deg: by_len(&aligned),
            histogram,
        }
    }

    /// `bin_start_deg,fraction` rows.
    pub fn histogram_csv_string(&self) -> String {
        let mut out = String::from("bin_start_deg,fraction\n");
        for (i, f) in self.histogram.iter().enumerate() {
            out.push_str(&format!("{:.1},{:.6}\n", i as f64 * HISTOGRAM_BIN_DEG, f));
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AlignmentReport {
    /// Segments inside elements crossed by a selected stress line.
    pub critical: AngleStats,
    /// Segments elsewhere in the solid.
    pub other: AngleStats,
    /// Segments whose midpoint lies in no element.
    pub outside: usize,
}

/// Angle between a line and an undirected axis, folded into [0, 90].
pub fn folded_angle_deg(tangent: &Point, axis: &Point) -> f64 {
    let (t, a) = (tangent.norm(), axis.norm());
    if t == 0.0 || a == 0.0 {
        return 90.0;
    }
    (tangent.dot(axis).abs() / (t * a)).min(1.0).acos().to_degrees()
}

fn segments(t: &Toolpath) -> impl Iterator<Item = (Point, Point)> + '_ {
    let w = &t.waypoints;
    let wrap = (t.closed && w.len() > 2).then(|| (w[w.len() - 1].position, w[0].position));
    w.windows(2).map(|p| (p[0].position, p[1].position)).chain(wrap)
}

/// Angle between each toolpath segment and the maximal principal direction of
/// the element holding its midpoint.
pub fn alignment_stats(
    toolpaths: &[Toolpath],
    principal: &[PrincipalStress],
    weights: &PslWeights,
    mesh: &TetMesh,
) -> Result<AlignmentReport> {
    let locator = TetLocator::new(mesh);
    alignment_with(toolpaths, principal, weights, mesh, |p| locator.locate(p))
}

pub(crate) fn alignment_with(
    toolpaths: &[Toolpath],
    principal: &[PrincipalStress],
    weights: &PslWeights,
    mesh: &TetMesh,
    locate: impl Fn(&Point) -> Option<usize> + Sync,
) -> Result<AlignmentReport> {
    if principal.len() != mesh.tet_count() || weights.n_psl.len() != mesh.tet_count() {
        return Err(Error::Invalid("stress and weights must have one entry per element".into()));
    }
    let segs: Vec<(Point, Point)> = toolpaths.iter().flat_map(segments).filter(|(a, b)| a != b).collect();
    let located = crate::par::map_range(segs.len(), |i| {
        let (a, b) = segs[i];
        locate(&((a + b) * 0.5)).map(|e| (e, folded_angle_deg(&(b - a), &principal[e].max_direction()), (b - a).norm()))
    });
    let (mut critical, mut other, mut outside) = (Vec::new(), Vec::new(), 0);
    for s in located {
        match s {
            Some((e, angle, len)) if weights.n_psl[e] > 0 => critical.push((angle, len)),
            Some((_, angle, len)) => other.push((angle, len)),
            None => outside += 1,
        }
    }
    if outside > 0 {
        log::warn!("{outside} toolpath segments lie outside the mesh");
    }
    Ok(AlignmentReport {
        critical: AngleStats::from_samples(&critical),
        other: AngleStats::from_samples(&other),
        outside,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ThicknessReport {
    /// Per waypoint on every layer after the first.
    #[serde(skip)]
    pub samples: Vec<f64>,
    pub count: usize,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    pub band: [f64; 2],
    pub fraction_in_band: f64,
    /// Fraction within [0.5, 1.5] times the median.
    pub fraction_near_median: f64,
    /// Waypoints with no previous layer to measure against.
    pub unmeasured: usize,
}

/// Distance from each waypoint to the layer below its own.
pub fn thickness_stats(layers: &[CurvedLayer], toolpaths: &[Toolpath], band: [f64; 2]) -> ThicknessReport {
    let mut samples = Vec::new();
    let mut unmeasured = 0;
    let mut layer_order: Vec<&CurvedLayer> = layers.iter().collect();
    layer_order.sort_by_key(|l| l.layer_index);
    for pair in layer_order.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let points: Vec<Point> = toolpaths
            .iter()
            .filter(|t| t.layer_index == cur.layer_index)
            .flat_map(|t| t.waypoints.iter().map(|w| w.position))
            .collect();
        for d in measure_layer_thickness(prev, &points) {
            match d {
                Some(d) => samples.push(d),
                None => unmeasured += 1,
            }
        }
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = (n > 0).then(|| {
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    });
    let fraction = |lo: f64, hi: f64| {
        let inside = samples.iter().filter(|&&d| d >= lo && d <= hi).count();
        if n > 0 { inside as f64 / n as f64 } else { 0.0 }
    };
    let near = median.map_or(0.0, |m| fraction(0.5 * m, 1.5 * m));
    ThicknessReport {
        count: n,
        min: sorted.first().copied(),
        median,
        max: sorted.last().copied(),
        band,
        fraction_in_band: fraction(band[0], band[1]),
        fraction_near_median: near,
        samples,
        unmeasured,
    }
}

/// Critical contours of one layer as point loops.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LayerContours {
    pub layer_index: usize,
    pub contours: Vec<Vec<Point>>,
    /// Mean edge length of the layer.
    pub edge_length: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LayerContinuity {
    pub layer_index: usize,
    pub components: usize,
    pub contours: usize,
    pub all_contours_visited: bool,
    pub turns: usize,
    pub sharp_turns: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub layers: Vec<LayerContinuity>,
}

impl ContinuityReport {
    pub fn turns(&self) -> usize {
        self.layers.iter().map(|l| l.turns).sum()
    }

    pub fn sharp_turns(&self) -> usize {
        self.layers.iter().map(|l| l.sharp_turns).sum()
    }

    /// Share of turning angles below the sharp-turn threshold.
    pub fn smooth_fraction(&self) -> f64 {
        match self.turns() {
            0 => 1.0,
            n => 1.0 - self.sharp_turns() as f64 / n as f64,
        }
    }
}

/// Turning angles (degrees) at interior waypoints, and at every waypoint of a
/// closed path.
pub fn turning_angles(t: &Toolpath) -> Vec<f64> {
    let p: Vec<Point> = t.waypoints.iter().map(|w| w.position).collect();
    let n = p.len();
    if n < 3 {
        return Vec::new();
    }
    let at = |i: usize| {
        let (a, b, c) = (p[(i + n - 1) % n], p[i], p[(i + 1) % n]);
        let (u, v) = (b - a, c - b);
        if u.norm() == 0.0 || v.norm() == 0.0 {
            0.0
        } else {
            (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos().to_degrees()
        }
    };
    if t.closed {
        (0..n).map(at).collect()
    } else {
        (1..n - 1).map(at).collect()
    }
}

fn passes_near(t: &Toolpath, contour: &[Point], radius: f64) -> bool {
    let mut segs: Vec<(Point, Point)> = segments(t).collect();
    if let [w] = &t.waypoints[..] {
        segs.push((w.position, w.position));
    }
    contour
        .iter()
        .any(|q| segs.iter().any(|(a, b)| (closest_on_segment(q, a, b) - q).norm() <= radius))
}

pub fn continuity_report(toolpaths: &[Toolpath], layers: &[LayerContours]) -> ContinuityReport {
    let report = |l: &LayerContours| {
        let paths: Vec<&Toolpath> = toolpaths.iter().filter(|t| t.layer_index == l.layer_index).collect();
        let radius = VISIT_EDGE_LENGTHS * l.edge_length;
        let visited = l.contours.is_empty()
            || paths
                .iter()
                .any(|t| l.contours.iter().all(|h| passes_near(t, h, radius)));
        let angles: Vec<f64> = paths.iter().flat_map(|t| turning_angles(t)).collect();
        LayerContinuity {
            layer_index: l.layer_index,
            components: paths.len(),
            contours: l.contours.len(),
            all_contours_visited: visited,
            turns: angles.len(),
            sharp_turns: angles.iter().filter(|&&a| a >= SHARP_TURN_DEG).count(),
        }
    };
    ContinuityReport {
        layers: crate::par::map_range(layers.len(), |i| report(&layers[i])),
    }
}
