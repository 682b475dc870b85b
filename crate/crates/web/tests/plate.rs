use fiberslice::surfpath::ToolpathWeights;
use fiberslice_web::{parse_pattern, plan_plate, plate_geodesic, plate_offsets, unpack, CELL};

#[test]
fn patterns_parse_bottom_row_first() {
    assert_eq!(parse_pattern("10/01").unwrap(), vec![vec![true, false], vec![false, true]]);
    for bad in ["", "1x", "10/1", &"1".repeat(65)] {
        assert!(parse_pattern(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn two_hole_plate_gets_one_visiting_path() {
    let plot = plan_plate("101", 0.0, ToolpathWeights::default(), 0.6, false).unwrap();
    assert!(plot.path_count() > 5);
    assert!(plot.cut_count() >= 3);
    assert!(plot.summary_text().contains("one path visits every hole"), "{}", plot.summary_text());
    assert!(plot.values_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    let paths = unpack(&plot.paths());
    assert_eq!(paths.len(), plot.path_count());
    for p in &paths {
        for [x, y] in p {
            assert!((-1e-9..=3.0 * CELL + 1e-9).contains(x) && (-1e-9..=CELL + 1e-9).contains(y));
        }
    }
}

#[test]
fn geodesic_grows_away_from_the_source() {
    let plot = plate_geodesic("0", 0.0, 0.0).unwrap();
    let v = plot.vertices();
    let values = plot.values_slice();
    let corner = (0..values.len())
        .max_by(|&a, &b| (v[2 * a] + v[2 * a + 1]).total_cmp(&(v[2 * b] + v[2 * b + 1])))
        .unwrap();
    assert_eq!(values[corner], 1.0);
    let source = (0..values.len()).find(|&i| v[2 * i] == 0.0 && v[2 * i + 1] == 0.0).unwrap();
    assert_eq!(values[source], 0.0);
}

#[test]
fn offsets_are_closed_loops() {
    let plot = plate_offsets("1", 0.5).unwrap();
    let paths = unpack(&plot.paths());
    assert!(!paths.is_empty());
    for p in paths {
        assert_eq!(p.first(), p.last());
    }
    assert!(plate_offsets("1", 0.0).is_err());
}
