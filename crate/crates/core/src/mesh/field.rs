use crate::{Error, Result};

/// One finite scalar per mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexField {
    values: Vec<f64>,
}

impl VertexField {
    pub fn new(values: Vec<f64>, vertex_count: usize) -> Result<Self> {
        if values.len() != vertex_count {
            return Err(Error::Invalid(format!(
                "field has {} values for {} vertices",
                values.len(),
                vertex_count
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("field value at vertex {i} is not finite")));
        }
        Ok(VertexField { values })
    }

    /// Samples `f` at every point.
    pub fn from_fn(points: &[super::Point], f: impl Fn(&super::Point) -> f64) -> Self {
        VertexField {
            values: points.iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Affinely maps the values onto [0, 1].
    ///
    /// Values are snapped to a 2^-36 grid afterwards so that fields differing
    /// only by a constant offset normalize to identical bits.
    pub fn normalized(&self) -> Result<Self> {
        let (lo, hi) = self.range();
        let span = hi - lo;
        if !(span > 0.0) {
            return Err(Error::Invalid("cannot normalize a constant field".into()));
        }
        const GRID: f64 = (1u64 << 36) as f64;
        let values = self
            .values
            .iter()
            .map(|&v| (((v - lo) / span) * GRID).round() / GRID)
            .collect();
        Ok(VertexField { values })
    }
}

impl std::ops::Index<usize> for VertexField {
    type Output = f64;
    fn index(&self, v: usize) -> &f64 {
        &self.values[v]
    }
}
