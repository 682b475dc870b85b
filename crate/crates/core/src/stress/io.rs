//! Stress CSV: `elem,sxx,syy,szz,sxy,syz,szx`, one row per element.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::StressTensor;
use crate::{Error, Result};

pub const HEADER: &str = "elem,sxx,syy,szz,sxy,syz,szx";

/// Shortest round-trip formatting, so a write/read cycle is bit exact.
pub fn stress_csv_string(tensors: &[StressTensor]) -> String {
    let mut out = String::with_capacity(tensors.len() * 64);
    out.push_str(HEADER);
    out.push('\n');
    for (e, t) in tensors.iter().enumerate() {
        write!(out, "{e}").unwrap();
        for c in t.components() {
            write!(out, ",{c:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_stress_field(tensors: &[StressTensor], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, stress_csv_string(tensors)).map_err(|e| Error::io(path, e))
}

pub fn load_stress_field(path: impl AsRef<Path>, tet_count: usize) -> Result<Vec<StressTensor>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_stress_csv(path, &text, tet_count)
}

/// Parses rows in any order; every element id in `0..tet_count` must appear
/// exactly once.
pub fn parse_stress_csv(path: &Path, text: &str, tet_count: usize) -> Result<Vec<StressTensor>> {
    let mut slots: Vec<Option<StressTensor>> = vec![None; tet_count];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("elem")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::parse(path, i + 1, format!("expected 7 fields, found {}", fields.len())));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad element id `{}`", fields[0])))?;
        let mut c = [0.0; 6];
        for k in 0..6 {
            c[k] = fields[k + 1]
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("non-numeric field `{}`", fields[k + 1])))?;
        }
        let t = StressTensor::new(c[0], c[1], c[2], c[3], c[4], c[5]);
        if !t.is_finite() {
            return Err(Error::parse(path, i + 1, "non-finite stress component"));
        }
        let slot = slots
            .get_mut(id)
            .ok_or_else(|| Error::StressField(format!("element id {id} out of range ({tet_count} tets)")))?;
        if slot.is_some() {
            return Err(Error::StressField(format!("duplicate element id {id}")));
        }
        *slot = Some(t);
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(e, s)| s.ok_or_else(|| Error::StressField(format!("missing element id {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, n: usize) -> Result<Vec<StressTensor>> {
        parse_stress_csv(Path::new("mem.csv"), text, n)
    }

    #[test]
    fn uniform_uniaxial_rows() {
        let mut text = String::from("elem,sxx,syy,szz,sxy,syz,szx\n");
        for e in 0..5 {
            text.push_str(&format!("{e}, 5,0,0,0,0,0\n"));
        }
        let t = parse(&text, 5).unwrap();
        assert!(t.iter().all(|s| *s == StressTensor::new(5.0, 0.0, 0.0, 0.0, 0.0, 0.0)));
    }

    #[test]
    fn missing_row() {
        let text = "elem,sxx,syy,szz,sxy,syz,szx\n0,1,0,0,0,0,0\n1,1,0,0,0,0,0\n";
        assert!(matches!(parse(text, 3), Err(Error::StressField(m)) if m.contains("missing element id 2")));
    }

    #[test]
    fn duplicate_row() {
        let text = "elem,sxx,syy,szz,sxy,syz,szx\n0,1,0,0,0,0,0\n0,1,0,0,0,0,0\n";
        assert!(matches!(parse(text, 2), Err(Error::StressField(m)) if m.contains("duplicate")));
    }

    #[test]
    fn non_numeric() {
        let text = "elem,sxx,syy,szz,sxy,syz,szx\n0,1,abc,0,0,0,0\n";
        assert!(matches!(parse(text, 1), Err(Error::Parse { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(c in prop::collection::vec(prop::array::uniform6(-1e6..1e6f64), 1..20)) {
            let tensors: Vec<_> = c.iter().map(|c| StressTensor::new(c[0], c[1], c[2], c[3], c[4], c[5])).collect();
            let back = parse(&stress_csv_string(&tensors), tensors.len()).unwrap();
            prop_assert_eq!(back, tensors);
        }
    }
}
