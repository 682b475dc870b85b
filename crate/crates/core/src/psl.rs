//! Principal stress lines: streamlines of the maximal principal direction,
//! marched element by element through the tet mesh.
//!
//! Every element seeds one line. A line advances from face to face: inside
//! each element it is a straight segment along that element's direction, with
//! the sign picked so the segment points into the element. Lines that join the
//! fixture region to the load region are kept and counted per element; the
//! count weights the stress-following term of the layer field.

use std::fmt::Write as _;

use crate::mesh::{Point, TetMesh};
use crate::stress::PrincipalStress;
use crate::{Error, Result};

/// Default trace budget in average edge lengths.
pub const DEFAULT_LENGTH_FACTOR: f64 = 100.0;
/// Principal magnitudes below this (MPa) have no usable direction.
pub const ZERO_STRESS: f64 = 1e-9;
const MIN_STEP: f64 = 1e-9;
const NEAR_EDGE: f64 = 1e-9;
const NUDGE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    Boundary,
    MaxLength,
    ZeroDirection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalStressLine {
    pub points: Vec<Point>,
    /// Elements in traversal order; the source appears once.
    pub crossed_elements: Vec<usize>,
    pub source_element: usize,
    pub terminated_by: Termination,
}

impl PrincipalStressLine {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Number of selected lines crossing each element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PslWeights {
    pub n_psl: Vec<u32>,
}

impl PslWeights {
    pub fn critical_count(&self) -> usize {
        self.n_psl.iter().filter(|&&n| n > 0).count()
    }
}

pub fn default_max_length(mesh: &TetMesh) -> f64 {
    DEFAULT_LENGTH_FACTOR * mesh.average_edge_length()
}

struct HalfTrace {
    points: Vec<Point>,
    tets: Vec<usize>,
    length: f64,
    end: Termination,
}

fn barycentric(mesh: &TetMesh, e: usize, grads: &[Point; 4], p: &Point) -> [f64; 4] {
    let x0 = mesh.vertices()[mesh.tets()[e][0]];
    let mut lam = [0.0; 4];
    for k in 0..4 {
        lam[k] = grads[k].dot(&(p - x0)) + if k == 0 { 1.0 } else { 0.0 };
    }
    lam
}

/// Exit parameter and local face of the ray `p + t d` leaving tet `e`.
fn ray_exit(lam: &[f64; 4], grads: &[Point; 4], d: &Point, entry: Option<usize>) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for k in 0..4 {
        if Some(k) == entry {
            continue;
        }
        let rate = grads[k].dot(d);
        if rate >= -1e-14 * grads[k].norm() {
            continue;
        }
        let t = lam[k].max(0.0) / -rate;
        if best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, k));
        }
    }
    best
}

fn march(
    mesh: &TetMesh,
    principal: &[PrincipalStress],
    start_tet: usize,
    start: Point,
    dir: Point,
    budget: f64,
) -> HalfTrace {
    let nudge = NUDGE * mesh.average_edge_length();
    let max_steps = 1000 + 100 * (budget / mesh.average_edge_length()).ceil() as usize;
    let mut out = HalfTrace {
        points: Vec::new(),
        tets: Vec::new(),
        length: 0.0,
        end: Termination::Boundary,
    };
    let (mut e, mut p, mut d, mut entry) = (start_tet, start, dir, None);
    for _ in 0..max_steps {
        let Ok(grads) = mesh.basis_gradients(e) else {
            out.end = Termination::ZeroDirection;
            return out;
        };
        let lam = barycentric(mesh, e, &grads, &p);
        let Some(mut exit) = ray_exit(&lam, &grads, &d, entry) else {
            out.end = Termination::ZeroDirection;
            return out;
        };
        // Exit through (or next to) an edge or vertex: nudge the origin toward
        // the centroid and re-intersect.
        let near_edge = |p: Point, (t, k): (f64, usize)| {
            let lq = barycentric(mesh, e, &grads, &(p + d * t));
            (0..4).any(|j| j != k && lq[j] / grads[j].norm() < NEAR_EDGE)
        };
        if near_edge(p, exit) {
            let c = mesh.centroid(e);
            let shifted = p + (c - p).normalize() * nudge;
            let lam_s = barycentric(mesh, e, &grads, &shifted);
            if let Some(ex) = ray_exit(&lam_s, &grads, &d, entry) {
                if let Some(last) = out.points.last_mut() {
                    *last = shifted;
                }
                p = shifted;
                exit = ex;
            }
        }
        let (t, k) = exit;
        if t <= MIN_STEP {
            out.end = Termination::ZeroDirection;
            return out;
        }
        if out.length + t >= budget {
            let remaining = budget - out.length;
            out.points.push(p + d * remaining);
            out.length = budget;
            out.end = Termination::MaxLength;
            return out;
        }
        let q = p + d * t;
        out.points.push(q);
        out.length += t;
        let Some(next) = mesh.neighbor(e, k) else {
            out.end = Termination::Boundary;
            return out;
        };
        let ps = &principal[next];
        if ps.max_value().abs() < ZERO_STRESS {
            out.end = Termination::ZeroDirection;
            return out;
        }
        let next_entry = (0..4).find(|&j| mesh.neighbor(next, j) == Some(e)).expect("symmetric adjacency");
        let d1 = ps.max_direction();
        let toward = (mesh.centroid(next) - q).dot(&d1);
        let mut cand = if toward >= 0.0 { d1 } else { -d1 };
        let Ok(next_grads) = mesh.basis_gradients(next) else {
            out.end = Termination::ZeroDirection;
            return out;
        };
        let g_in = next_grads[next_entry];
        if g_in.dot(&cand) <= 0.0 {
            cand = -cand;
        }
        if g_in.dot(&cand) <= 1e-12 * g_in.norm() {
            out.end = Termination::ZeroDirection;
            return out;
        }
        out.tets.push(next);
        e = next;
        p = q;
        d = cand;
        entry = Some(next_entry);
    }
    out.end = Termination::MaxLength;
    out
}

/// Traces the line through the centroid of `e0`, both ways along its
/// direction, within a total length budget `l_max`.
pub fn trace_psl(mesh: &TetMesh, principal: &[PrincipalStress], e0: usize, l_max: f64) -> PrincipalStressLine {
    let c = mesh.centroid(e0);
    let ps = &principal[e0];
    if ps.max_value().abs() < ZERO_STRESS || !(l_max > 0.0) {
        return PrincipalStressLine {
            points: vec![c],
            crossed_elements: vec![e0],
            source_element: e0,
            terminated_by: Termination::ZeroDirection,
        };
    }
    let d = ps.max_direction();
    let fwd = march(mesh, principal, e0, c, d, l_max);
    let bwd = if fwd.end == Termination::MaxLength {
        HalfTrace {
            points: Vec::new(),
            tets: Vec::new(),
            length: 0.0,
            end: Termination::MaxLength,
        }
    } else {
        march(mesh, principal, e0, c, -d, l_max - fwd.length)
    };
    let mut points: Vec<Point> = bwd.points.iter().rev().copied().collect();
    points.push(c);
    points.extend(fwd.points.iter().copied());
    let mut crossed: Vec<usize> = bwd.tets.iter().rev().copied().collect();
    crossed.push(e0);
    crossed.extend(fwd.tets.iter().copied());
    let ends = [fwd.end, bwd.end];
    let terminated_by = if ends.contains(&Termination::MaxLength) {
        Termination::MaxLength
    } else if ends.contains(&Termination::ZeroDirection) {
        Termination::ZeroDirection
    } else {
        Termination::Boundary
    };
    PrincipalStressLine {
        points,
        crossed_elements: crossed,
        source_element: e0,
        terminated_by,
    }
}

/// One line per element, in element order.
pub fn trace_all(mesh: &TetMesh, principal: &[PrincipalStress], l_max: f64) -> Vec<PrincipalStressLine> {
    crate::par::map_range(mesh.tet_count(), |e| trace_psl(mesh, principal, e, l_max))
}

fn region_flags(mesh: &TetMesh, labels: &std::collections::BTreeSet<usize>) -> Vec<bool> {
    mesh.tets()
        .iter()
        .map(|t| t.iter().any(|v| labels.contains(v)))
        .collect()
}

/// Keeps the lines that cross both a fixture-region and a load-region element
/// (an element is in a region when any of its vertices carries the label).
pub fn select_psls<'a>(psls: &'a [PrincipalStressLine], mesh: &TetMesh) -> Result<Vec<&'a PrincipalStressLine>> {
    let labels = mesh.labels();
    if labels.fixture.is_empty() || labels.load.is_empty() {
        return Err(Error::Invalid(
            "PSL selection needs non-empty fixture and load label sets".into(),
        ));
    }
    let fixture = region_flags(mesh, &labels.fixture);
    let load = region_flags(mesh, &labels.load);
    Ok(psls
        .iter()
        .filter(|l| {
            l.crossed_elements.iter().any(|&e| fixture[e]) && l.crossed_elements.iter().any(|&e| load[e])
        })
        .collect())
}

pub fn count_psl_weights(mesh: &TetMesh, selected: &[&PrincipalStressLine]) -> PslWeights {
    let mut n_psl = vec![0u32; mesh.tet_count()];
    let mut seen = Vec::new();
    for line in selected {
        seen.clear();
        seen.extend_from_slice(&line.crossed_elements);
        seen.sort_unstable();
        seen.dedup();
        for &e in &seen {
            n_psl[e] += 1;
        }
    }
    PslWeights { n_psl }
}

/// `e0;x0,y0,z0;x1,y1,z1;...`, one line per polyline.
pub fn psl_dump_string(psls: &[&PrincipalStressLine]) -> String {
    let mut out = String::new();
    for l in psls {
        write!(out, "{}", l.source_element).unwrap();
        for p in &l.points {
            write!(out, ";{:.6},{:.6},{:.6}", p.x, p.y, p.z).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn weights_csv_string(w: &PslWeights) -> String {
    let mut out = String::from("elem,n_psl\n");
    for (e, n) in w.n_psl.iter().enumerate() {
        writeln!(out, "{e},{n}").unwrap();
    }
    out
}

pub fn parse_weights_csv(path: &std::path::Path, text: &str, tet_count: usize) -> Result<PslWeights> {
    let mut n_psl = vec![None; tet_count];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (e, n) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `elem,n_psl`"))?;
        let e: usize = e.trim().parse().map_err(|_| Error::parse(path, i + 1, "bad element id"))?;
        let n: u32 = n.trim().parse().map_err(|_| Error::parse(path, i + 1, "bad count"))?;
        *n_psl
            .get_mut(e)
            .ok_or_else(|| Error::parse(path, i + 1, "element id out of range"))? = Some(n);
    }
    let n_psl = n_psl
        .into_iter()
        .enumerate()
        .map(|(e, n)| n.ok_or_else(|| Error::parse(path, 0, format!("missing element {e}"))))
        .collect::<Result<_>>()?;
    Ok(PslWeights { n_psl })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::stress::{decompose_all, StressTensor};

    fn uniform(mesh: &TetMesh, d: Point) -> Vec<PrincipalStress> {
        decompose_all(&vec![StressTensor::uniaxial(&d, 3.0); mesh.tet_count()])
    }

    fn max_line_deviation(points: &[Point]) -> f64 {
        let (a, b) = (points[0], *points.last().unwrap());
        let dir = (b - a).normalize();
        points.iter().map(|p| (p - a).cross(&dir).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn uniform_field_gives_straight_lines() {
        let mesh = models::bar(20.0, 4.0, 4.0, [10, 2, 2]);
        let principal = uniform(&mesh, Point::x());
        for e in 0..mesh.tet_count() {
            let l = trace_psl(&mesh, &principal, e, default_max_length(&mesh));
            assert_eq!(l.terminated_by, Termination::Boundary);
            assert!(max_line_deviation(&l.points) <= 1e-6);
            assert!((l.points[0].x - 0.0).abs() < 1e-6 && (l.points.last().unwrap().x - 20.0).abs() < 1e-6);
            assert!((l.length() - 20.0).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_stress_source() {
        let mesh = models::unit_cube_five_tets();
        let principal = decompose_all(&vec![StressTensor::default(); 5]);
        let l = trace_psl(&mesh, &principal, 2, 10.0);
        assert_eq!(l.terminated_by, Termination::ZeroDirection);
        assert_eq!(l.points.len(), 1);
    }

    #[test]
    fn closed_orbits_stop_at_max_length() {
        // Square tube around the z axis with a tangential field: lines circle forever.
        let mesh = models::box_mesh_filtered([12, 12, 2], Point::new(-6.0, -6.0, 0.0), Point::new(6.0, 6.0, 2.0), |c| {
            let r = c.x.hypot(c.y);
            r > 2.5 && r < 5.5
        });
        let tensors: Vec<_> = (0..mesh.tet_count())
            .map(|e| {
                let c = mesh.centroid(e);
                StressTensor::uniaxial(&Point::new(-c.y, c.x, 0.0), 2.0)
            })
            .collect();
        let principal = decompose_all(&tensors);
        let l_max = default_max_length(&mesh);
        let source = (0..mesh.tet_count())
            .find(|&e| {
                let c = mesh.centroid(e);
                (c.x.hypot(c.y) - 4.0).abs() < 0.3 && (c.z - 1.0).abs() < 0.4
            })
            .unwrap();
        let l = trace_psl(&mesh, &principal, source, l_max);
        assert_eq!(l.terminated_by, Termination::MaxLength);
        assert!(l.length() <= l_max + 1e-9);
        assert!(l.length() >= l_max - 1e-9);
    }

    #[test]
    fn steps_always_advance() {
        let mesh = models::box_mesh([4, 4, 4], Point::zeros(), Point::new(4.0, 4.0, 4.0));
        let tensors: Vec<_> = (0..mesh.tet_count())
            .map(|e| {
                let c = mesh.centroid(e);
                StressTensor::new(c.x, c.y - 1.0, 0.5 * c.z, 0.3 * c.x * c.y, 0.1, -0.2 * c.z)
            })
            .collect();
        let principal = decompose_all(&tensors);
        for l in trace_all(&mesh, &principal, default_max_length(&mesh)) {
            for w in l.points.windows(2) {
                assert!((w[1] - w[0]).norm() > MIN_STEP * 0.999);
            }
            assert!(l.points.len() >= l.crossed_elements.len());
            assert!(l.points.len() <= l.crossed_elements.len() + 2);
        }
    }

    #[test]
    fn selection_and_counts() {
        let mesh = models::bar(20.0, 4.0, 4.0, [10, 2, 2]);
        let principal = uniform(&mesh, Point::x());
        let lines = trace_all(&mesh, &principal, default_max_length(&mesh));
        let selected = select_psls(&lines, &mesh).unwrap();
        assert_eq!(selected.len(), lines.len());

        let sideways = uniform(&mesh, Point::y());
        let lines_y = trace_all(&mesh, &sideways, default_max_length(&mesh));
        let interior: Vec<_> = lines_y
            .iter()
            .filter(|l| {
                let c = mesh.centroid(l.source_element);
                c.x > 4.0 && c.x < 16.0
            })
            .cloned()
            .collect();
        assert!(select_psls(&interior, &mesh).unwrap().is_empty());
        assert!(select_psls(&[], &mesh).unwrap().is_empty());
    }

    #[test]
    fn weights_count_each_line_once() {
        let mesh = models::unit_cube_five_tets();
        let line = PrincipalStressLine {
            points: vec![],
            crossed_elements: vec![3, 1, 4, 1],
            source_element: 3,
            terminated_by: Termination::Boundary,
        };
        let w = count_psl_weights(&mesh, &[&line]);
        assert_eq!(w.n_psl, vec![0, 1, 0, 1, 1]);
        let w2 = count_psl_weights(&mesh, &[&line, &line]);
        assert_eq!(w2.n_psl, vec![0, 2, 0, 2, 2]);
    }

    #[test]
    fn empty_labels_error() {
        let mesh = models::unit_cube_five_tets();
        assert!(select_psls(&[], &mesh).is_err());
    }
}
