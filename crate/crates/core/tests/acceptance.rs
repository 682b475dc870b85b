//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits non-zero when any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use fiberslice::layerfield::{
    extract_isosurfaces, solve_guidance_detailed, CurvedLayer, LayerFieldProblem, LayerWeights,
};
use fiberslice::locate::locate_brute_force;
use fiberslice::mesh::{Point, TetMesh, TriMesh, VertexField};
use fiberslice::metrics::{
    alignment_stats, continuity_report, folded_angle_deg, thickness_stats, AngleStats, LayerContours,
};
use fiberslice::models::{self, TwistBar};
use fiberslice::pipeline::{self, Model, PipelineConfig, Stage};
use fiberslice::psl::{count_psl_weights, default_max_length, select_psls, trace_all, PslWeights};
use fiberslice::stress::{
    decompose_all, load_stress_field, solve_linear_elasticity, BoundaryCondition, Material, StressTensor,
};
use fiberslice::surfpath::{
    extract_isocurves, geodesic_field, isocurve_segments, plan_layer, region_center, PathParams, Selector, Toolpath,
};

type Outcome = Result<String, String>;

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn twist_bar_run(dir: &Path, threads: usize) -> PipelineConfig {
    let path = pipeline::generate(Model::TwistBar, dir, None).unwrap();
    let mut cfg = PipelineConfig::load(&path).unwrap();
    cfg.run.parallelism = threads;
    cfg
}

fn layers_from_artifacts(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Vec<CurvedLayer> {
    let text = std::fs::read_to_string(out.join(pipeline::GUIDANCE_FILE)).unwrap();
    let g = pipeline::parse_guidance_csv(Path::new("guidance"), &text, mesh.vertex_count()).unwrap();
    extract_isosurfaces(mesh, &g, cfg.layers.count).unwrap()
}

fn alignment_quality() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = twist_bar_run(dir.path(), 1);
    let out = cfg.run.output.clone();
    let start = Instant::now();
    pipeline::run(&cfg, &out).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let mesh = pipeline::load_mesh(&cfg).unwrap();
    let principal = decompose_all(&load_stress_field(out.join(pipeline::STRESS_FILE), mesh.tet_count()).unwrap());
    let weights = read_weights(&out, &mesh);
    let paths = pipeline::load_waypoints(out.join(pipeline::WAYPOINTS_FILE)).unwrap();
    let report = alignment_stats(&paths, &principal, &weights, &mesh).unwrap();
    let c = &report.critical;
    check(mesh.tet_count() >= 8000, format!("only {} tets", mesh.tet_count()))?;
    check(c.count > 0, "no critical samples")?;
    check(c.mean_deg <= 10.0, format!("mean {:.2} deg", c.mean_deg))?;
    check(c.fraction_within_10_deg >= 0.9, format!("{:.3} within 10 deg", c.fraction_within_10_deg))?;
    check(secs <= 60.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} tets, mean {:.2} deg, {:.1}% within 10 deg, {secs:.1} s",
        mesh.tet_count(),
        c.mean_deg,
        100.0 * c.fraction_within_10_deg
    ))
}

fn read_weights(out: &Path, mesh: &TetMesh) -> PslWeights {
    let path = out.join(pipeline::WEIGHTS_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    fiberslice::psl::parse_weights_csv(&path, &text, mesh.tet_count()).unwrap()
}

fn plane_deviation(points: &[Point]) -> f64 {
    let n = points.len() as f64;
    let c = points.iter().sum::<Point>() / n;
    let mut cov = nalgebra::Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let normal = eig.eigenvectors.column(k).into_owned();
    points.iter().map(|p| (p - c).dot(&normal).abs()).fold(0.0, f64::max)
}

fn uniform_field_exactness() -> Outcome {
    let (length, side, force) = (40.0, 8.0, 320.0);
    let mesh = models::bar(length, side, side, [20, 4, 4]);
    let loaded: Vec<usize> = mesh
        .boundary_faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.vertices.iter().all(|&v| (mesh.vertices()[v].x - length).abs() < 1e-9))
        .map(|(i, _)| i)
        .collect();
    let sigma = force / (side * side);
    let bc = BoundaryCondition {
        fixed_vertices: mesh.labels().fixture.clone(),
        loaded_faces: loaded,
        traction: Point::new(sigma, 0.0, 0.0),
        material: Material::default(),
    };
    let fea = solve_linear_elasticity(&mesh, &bc).map_err(|e| e.to_string())?;
    let mut worst_fea: f64 = 0.0;
    for (e, s) in fea.iter().enumerate() {
        let c = mesh.centroid(e);
        if c.x > length * 0.3 && c.x < length * 0.7 {
            worst_fea = worst_fea.max((s.xx - sigma).abs() / sigma);
        }
    }
    check(worst_fea <= 0.05, format!("(a) FEA error {:.2}%", 100.0 * worst_fea))?;

    let principal = decompose_all(&vec![StressTensor::uniaxial(&Point::x(), sigma); mesh.tet_count()]);
    let lines = trace_all(&mesh, &principal, default_max_length(&mesh));
    let mut worst_line: f64 = 0.0;
    for l in &lines {
        let (a, b) = (l.points[0], *l.points.last().unwrap());
        let dir = (b - a).normalize();
        for p in &l.points {
            worst_line = worst_line.max((p - a).cross(&dir).norm());
        }
    }
    check(worst_line <= 1e-6, format!("(b) PSL deviation {worst_line:e}"))?;

    let selected = select_psls(&lines, &mesh).unwrap();
    let weights = count_psl_weights(&mesh, &selected);
    let problem = LayerFieldProblem::new(&mesh, Point::z(), LayerWeights::default(), 0).unwrap();
    let sol = solve_guidance_detailed(&mesh, &principal, &weights, &problem).map_err(|e| e.to_string())?;
    let mut worst_grad: f64 = 0.0;
    for e in (0..mesh.tet_count()).filter(|&e| weights.n_psl[e] > 0) {
        let g = mesh.tet_gradient(&sol.field, e).unwrap();
        worst_grad = worst_grad.max(g.dot(&Point::x()).abs() / g.norm());
    }
    check(worst_grad <= 1e-4, format!("(c) gradient ratio {worst_grad:e}"))?;

    let layers = extract_isosurfaces(&mesh, &sol.field, 10).unwrap();
    let worst_plane = layers
        .iter()
        .map(|l| plane_deviation(l.surface.vertices()))
        .fold(0.0, f64::max);
    check(worst_plane <= 1e-6, format!("(d) layer deviation {worst_plane:e}"))?;
    Ok(format!(
        "FEA {:.3}%, PSL {worst_line:.1e} mm, grad {worst_grad:.1e}, planes {worst_plane:.1e} mm",
        100.0 * worst_fea
    ))
}

fn marching_exactness() -> Outcome {
    let mesh = models::unit_cube_five_tets();
    let g = VertexField::from_fn(mesh.vertices(), |p| p.z);
    let layers = extract_isosurfaces(&mesh, &g, 4).unwrap();
    check(layers.len() == 4, format!("{} layers", layers.len()))?;
    for (layer, z) in layers.iter().zip([0.125, 0.375, 0.625, 0.875]) {
        let dev = layer.surface.vertices().iter().map(|p| (p.z - z).abs()).fold(0.0, f64::max);
        check(dev <= 1e-9, format!("layer at {z}: deviation {dev:e}"))?;
        let area = layer.surface.total_area();
        check((area - 1.0).abs() <= 1e-9, format!("layer at {z}: area {area}"))?;
    }
    let square = models::grid_square(8, 1.0);
    let p = VertexField::from_fn(square.vertices(), |q| q.x);
    let mut paths = extract_isocurves(&square, &p, 4).unwrap();
    paths.sort_by(|a, b| a.waypoints[0].position.x.total_cmp(&b.waypoints[0].position.x));
    check(paths.len() == 4, format!("{} iso-curves", paths.len()))?;
    for (t, x) in paths.iter().zip([0.125, 0.375, 0.625, 0.875]) {
        let dev = t.waypoints.iter().map(|w| (w.position.x - x).abs()).fold(0.0, f64::max);
        check(dev <= 1e-9, format!("path at {x}: deviation {dev:e}"))?;
        check((t.length() - 1.0).abs() <= 1e-9, format!("path at {x}: length {}", t.length()))?;
    }
    Ok("4 planes and 4 straight unit paths at the quarter stations".into())
}

fn boundary_components(mesh: &TriMesh) -> usize {
    let mut count = std::collections::BTreeMap::new();
    for f in mesh.faces() {
        for k in 0..3 {
            *count.entry(edge_key(f[k], f[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let boundary: Vec<[usize; 2]> = count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
    let verts: BTreeSet<usize> = boundary.iter().flatten().copied().collect();
    let mut parent: std::collections::BTreeMap<usize, usize> = verts.iter().map(|&v| (v, v)).collect();
    fn root(p: &mut std::collections::BTreeMap<usize, usize>, mut v: usize) -> usize {
        while p[&v] != v {
            v = p[&v];
        }
        v
    }
    for [a, b] in boundary {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        parent.insert(ra, rb);
    }
    verts.iter().map(|&v| root(&mut parent, v)).collect::<BTreeSet<_>>().len()
}

fn euler(mesh: &TriMesh) -> i64 {
    let mut edges = BTreeSet::new();
    for f in mesh.faces() {
        for k in 0..3 {
            edges.insert(edge_key(f[k], f[(k + 1) % 3]));
        }
    }
    let used: BTreeSet<usize> = mesh.faces().iter().flatten().copied().collect();
    used.len() as i64 - edges.len() as i64 + mesh.face_count() as i64
}

fn topology_surgery() -> Outcome {
    let plate = models::holed_strip(&[true, false, true], 10.0, 2.5, 8);
    let n = plate.face_count();
    let layer = CurvedLayer {
        surface: plate.clone().with_source_tets(vec![0; n]).unwrap(),
        iso_value: 0.5,
        layer_index: 0,
    };
    let hole = |x: f64| Selector::Sphere {
        center: [x, 5.0, 0.0],
        radius: 3.0,
    };
    let params = PathParams {
        selectors: vec![hole(5.0), hole(25.0)],
        ..PathParams::default()
    };
    let principal = decompose_all(&[StressTensor::uniaxial(&Point::x(), 1.0)]);
    let plan = plan_layer(&layer, &principal, &params).map_err(|e| e.to_string())?;
    let before = (boundary_components(&plate), euler(&plate));
    let cut = &plan.surface.surface;
    let after = (boundary_components(cut), euler(cut));
    check(before == (3, -1), format!("before cut {before:?}"))?;
    check(after == (1, 1), format!("after cut {after:?}"))?;

    let contours = LayerContours {
        layer_index: 0,
        contours: plan
            .contours
            .contours
            .iter()
            .map(|h| h.iter().map(|&v| plate.vertices()[v]).collect())
            .collect(),
        edge_length: plate.average_edge_length(),
    };
    let report = continuity_report(&plan.toolpaths, &[contours]);
    check(report.layers[0].all_contours_visited, "no toolpath visits both holes")?;

    let mut junctions = 0;
    for t in &plan.toolpaths {
        let segs = isocurve_segments(cut, &plan.field.values, t.iso_value).unwrap();
        let mut degree = std::collections::BTreeMap::new();
        for [a, b] in segs {
            *degree.entry(a).or_insert(0) += 1;
            *degree.entry(b).or_insert(0) += 1;
        }
        junctions += degree.values().filter(|&&d| d > 2).count();
    }
    check(junctions == 0, format!("{junctions} junction vertices"))?;
    Ok(format!(
        "boundaries {} -> {}, euler {} -> {}, both holes visited, {} paths without junctions",
        before.0,
        after.0,
        before.1,
        after.1,
        plan.toolpaths.len()
    ))
}

fn weight_monotonicity() -> Outcome {
    let bar = TwistBar {
        cells: [12, 4, 4],
        ..TwistBar::default()
    };
    let mut mesh = bar.mesh();
    let principal = decompose_all(&bar.stress_field(&mesh));
    let mut labels = mesh.labels().clone();
    labels.roi = vec![labels.fixture.clone(), labels.load.clone()];
    mesh.set_labels(labels).unwrap();
    let lines = trace_all(&mesh, &principal, default_max_length(&mesh));
    let weights = count_psl_weights(&mesh, &select_psls(&lines, &mesh).unwrap());
    let energies = |w: LayerWeights| {
        let p = LayerFieldProblem::new(&mesh, Point::z(), w, 0).unwrap();
        solve_guidance_detailed(&mesh, &principal, &weights, &p).unwrap().energies
    };
    let w = |sf, cg, cp| LayerWeights { sf, cg, cp };
    let sf: Vec<f64> = [10.0, 1.0, 0.1].iter().map(|&s| energies(w(s, 0.5, 0.1)).sf).collect();
    let cg: Vec<f64> = [5.0, 0.5, 0.05].iter().map(|&s| energies(w(1.0, s, 0.1)).cg).collect();
    let cp: Vec<f64> = [1.0, 0.1, 0.01].iter().map(|&s| energies(w(1.0, 0.5, s)).cp).collect();
    for (name, r) in [("sf", &sf), ("cg", &cg), ("cp", &cp)] {
        check(
            r[0] <= r[1] * (1.0 + 1e-9) && r[1] <= r[2] * (1.0 + 1e-9),
            format!("E_{name} not monotone: {r:?}"),
        )?;
    }
    Ok(format!(
        "E_sf {:.3e} <= {:.3e} <= {:.3e}; E_cg and E_cp likewise",
        sf[0], sf[1], sf[2]
    ))
}

fn nearest(mesh: &TriMesh, p: Point) -> usize {
    (0..mesh.vertex_count())
        .min_by(|&a, &b| (mesh.vertices()[a] - p).norm().total_cmp(&(mesh.vertices()[b] - p).norm()))
        .unwrap()
}

fn geodesic_accuracy() -> Outcome {
    let square = models::grid_square(30, 1.0);
    let d = geodesic_field(&square, &[nearest(&square, Point::zeros())]);
    let diag = d[nearest(&square, Point::new(1.0, 1.0, 0.0))];
    let exact = 2f64.sqrt();
    check((diag - exact).abs() <= 0.05 * exact, format!("diagonal {diag}"))?;
    let r = 2.0;
    let cyl = models::cylinder(r, 4.0, 48, 12);
    let a = nearest(&cyl, Point::new(r, 0.0, 0.0));
    let b = nearest(&cyl, Point::new(-r, 0.0, 0.0));
    let rim = geodesic_field(&cyl, &[a])[b];
    let half = std::f64::consts::PI * r;
    check((rim - half).abs() <= 0.05 * half, format!("rim {rim} vs {half}"))?;
    Ok(format!(
        "diagonal error {:.2}%, rim error {:.2}%",
        100.0 * (diag - exact).abs() / exact,
        100.0 * (rim - half).abs() / half
    ))
}

fn thickness_proxy() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = twist_bar_run(dir.path(), 0);
    let out = cfg.run.output.clone();
    for stage in [Stage::Stress, Stage::Psl, Stage::Slice, Stage::Paths] {
        pipeline::run_stage(&cfg, &out, stage).map_err(|e| e.to_string())?;
    }
    let mesh = pipeline::load_mesh(&cfg).unwrap();
    let layers = layers_from_artifacts(&cfg, &out, &mesh);
    let paths = pipeline::load_waypoints(out.join(pipeline::WAYPOINTS_FILE)).unwrap();
    let r = thickness_stats(&layers, &paths, cfg.metrics.thickness_band);
    let median = r.median.ok_or("no thickness samples")?;
    let near = r.samples.iter().filter(|&&t| t >= 0.5 * median && t <= 1.5 * median).count() as f64
        / r.samples.len() as f64;
    check(near >= 0.9, format!("{:.1}% within [0.5, 1.5] x median", 100.0 * near))?;
    Ok(format!(
        "{} samples, median {median:.3} mm, {:.1}% within [0.5, 1.5] x median",
        r.count,
        100.0 * near
    ))
}

fn oracle_equivalences() -> Outcome {
    let bar = TwistBar::with_tet_count(4000);
    let mesh = bar.mesh();
    check(mesh.tet_count() <= 5000, format!("{} tets", mesh.tet_count()))?;
    let principal = decompose_all(&bar.stress_field(&mesh));
    let lines = trace_all(&mesh, &principal, default_max_length(&mesh));
    let selected = select_psls(&lines, &mesh).unwrap();
    let weights = count_psl_weights(&mesh, &selected);
    let recount: Vec<u32> = (0..mesh.tet_count())
        .map(|e| selected.iter().filter(|l| l.crossed_elements.contains(&e)).count() as u32)
        .collect();
    check(weights.n_psl == recount, "N_PSL differs from the recount")?;

    let problem = LayerFieldProblem::new(&mesh, Point::z(), LayerWeights::default(), 0).unwrap();
    let g = solve_guidance_detailed(&mesh, &principal, &weights, &problem).unwrap().field;
    let layers = extract_isosurfaces(&mesh, &g, 8).unwrap();
    let params = PathParams::default();
    let mut paths: Vec<Toolpath> = Vec::new();
    for l in layers.iter().filter(|l| l.surface.face_count() > 0) {
        paths.extend(plan_layer(l, &principal, &params).unwrap().toolpaths);
    }
    let fast = alignment_stats(&paths, &principal, &weights, &mesh).unwrap();
    let (mut critical, mut other, mut outside) = (Vec::new(), Vec::new(), 0);
    for t in &paths {
        let w = &t.waypoints;
        let mut segs: Vec<(Point, Point)> = w.windows(2).map(|p| (p[0].position, p[1].position)).collect();
        if t.closed && w.len() > 2 {
            segs.push((w[w.len() - 1].position, w[0].position));
        }
        for (a, b) in segs.into_iter().filter(|(a, b)| a != b) {
            match locate_brute_force(&mesh, &((a + b) * 0.5)) {
                Some(e) => {
                    let sample = (folded_angle_deg(&(b - a), &principal[e].max_direction()), (b - a).norm());
                    if weights.n_psl[e] > 0 {
                        critical.push(sample);
                    } else {
                        other.push(sample);
                    }
                }
                None => outside += 1,
            }
        }
    }
    check(fast.critical == AngleStats::from_samples(&critical), "critical alignment differs")?;
    check(fast.other == AngleStats::from_samples(&other), "non-critical alignment differs")?;
    check(fast.outside == outside, "outside counts differ")?;

    let mut regions_checked = 0;
    for l in layers.iter().filter(|l| l.surface.face_count() > 0) {
        let s = &l.surface;
        let region: Vec<usize> = (0..s.vertex_count()).filter(|&v| s.vertices()[v].x < bar.length * 0.4).collect();
        if region.is_empty() {
            continue;
        }
        let members: BTreeSet<usize> = region.iter().copied().collect();
        let (mut area, mut moment) = (0.0, Point::zeros());
        for tri in s.faces() {
            if tri.iter().all(|v| members.contains(v)) {
                let [a, b, c] = tri.map(|v| s.vertices()[v]);
                let w = 0.5 * (b - a).cross(&(c - a)).norm();
                area += w;
                moment += (a + b + c) / 3.0 * w;
            }
        }
        let centroid = moment / area;
        let expected = *members
            .iter()
            .min_by(|&&a, &&b| {
                (s.vertices()[a] - centroid)
                    .norm_squared()
                    .total_cmp(&(s.vertices()[b] - centroid).norm_squared())
                    .then(a.cmp(&b))
            })
            .unwrap();
        let got = region_center(s, &region).unwrap();
        check(got == expected, format!("layer {} center {got} vs {expected}", l.layer_index))?;
        regions_checked += 1;
    }
    Ok(format!(
        "{} tets: N_PSL recount, {} alignment samples, {regions_checked} region centers all match",
        mesh.tet_count(),
        critical.len() + other.len()
    ))
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = pipeline::generate(Model::BoltedBar, dir.path(), None).unwrap();
    let base = PipelineConfig::load(&path).unwrap();
    let mut trees = Vec::new();
    for (i, threads) in [1, 1, 8, 8].into_iter().enumerate() {
        let mut cfg = base.clone();
        cfg.run.parallelism = threads;
        let out = dir.path().join(format!("out{i}"));
        pipeline::run(&cfg, &out).map_err(|e| e.to_string())?;
        trees.push(tree_bytes(&out));
    }
    let files = trees[0].len();
    check(files > 10, format!("only {files} artifacts"))?;
    for (i, t) in trees.iter().enumerate().skip(1) {
        check(t == &trees[0], format!("run {i} differs from run 0"))?;
    }
    Ok(format!("{files} artifacts byte-identical over 2 runs each at 1 and 8 threads"))
}

fn scale_sanity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = pipeline::generate(Model::TwistBar, dir.path(), Some(100_000)).unwrap();
    let cfg = PipelineConfig::load(&path).unwrap();
    let out = cfg.run.output.clone();
    let tets = pipeline::load_mesh(&cfg).unwrap().tet_count();
    check(tets >= 95_000, format!("only {tets} tets"))?;
    let start = Instant::now();
    for stage in [Stage::Stress, Stage::Psl, Stage::Slice, Stage::Paths] {
        pipeline::run_stage(&cfg, &out, stage).map_err(|e| e.to_string())?;
    }
    let took = start.elapsed();
    check(took <= Duration::from_secs(30 * 60), format!("took {:.0} s", took.as_secs_f64()))?;
    Ok(format!("{tets} tets through field solve, slicing and toolpaths in {:.1} s", took.as_secs_f64()))
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("alignment quality", alignment_quality),
        ("uniform-field exactness", uniform_field_exactness),
        ("marching extraction exactness", marching_exactness),
        ("topology surgery", topology_surgery),
        ("weight-study monotonicity", weight_monotonicity),
        ("geodesic accuracy", geodesic_accuracy),
        ("thickness proxy", thickness_proxy),
        ("oracle equivalences", oracle_equivalences),
        ("determinism", determinism),
        ("scale sanity", scale_sanity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
