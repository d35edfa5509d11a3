//! Parameter sweeps over a rectangular grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// One named axis: `count` points from `min` to `max`, both endpoints
/// included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn linear(name: &str, min: f64, max: f64, count: usize) -> Self {
        Self { name: name.to_string(), min, max, count, scale: Scale::Linear }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidParameter(format!("axis {} has non-finite bounds", self.name)));
        }
        if self.scale == Scale::Log && !(self.min > 0.0 && self.max > 0.0) {
            return Err(Error::InvalidParameter(format!("log axis {} needs positive bounds", self.name)));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = self.count - 1;
        Ok((0..=n)
            .map(|k| {
                if k == 0 {
                    self.min
                } else if k == n {
                    self.max
                } else {
                    let f = k as f64 / n as f64;
                    match self.scale {
                        Scale::Linear => self.min + (self.max - self.min) * f,
                        Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                    }
                }
            })
            .collect())
    }
}

/// Cartesian product of axes; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<SweepAxis>,
}

impl Grid {
    pub fn new(axes: Vec<SweepAxis>) -> Self {
        Self { axes }
    }

    pub fn cells(&self) -> Result<Vec<Vec<f64>>> {
        if self.axes.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let values: Vec<Vec<f64>> = self.axes.iter().map(SweepAxis::values).collect::<Result<_>>()?;
        let mut cells = vec![Vec::new()];
        for vals in &values {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    /// NaN-filled when the cell failed.
    pub observables: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis_names: Vec<String>,
    pub observable_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(i) = self.axis_names.iter().position(|n| n == name) {
            return Some(self.rows.iter().map(|r| r.params[i]).collect());
        }
        let i = self.observable_names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r.observables[i]).collect())
    }
}

/// Runs `driver` on every grid cell. Failed cells keep their row with the
/// error message; rows come back in grid order.
pub fn sweep<F>(grid: &Grid, observables: &[&str], exec: Exec, driver: F) -> Result<SweepTable>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync + Send,
{
    let cells = grid.cells()?;
    let width = observables.len();
    let rows = exec::map(exec, &cells, |cell| match driver(cell) {
        Ok(obs) if obs.len() == width => SweepRow { params: cell.clone(), observables: obs, error: None },
        Ok(obs) => SweepRow {
            params: cell.clone(),
            observables: vec![f64::NAN; width],
            error: Some(format!("driver returned {} observables, expected {width}", obs.len())),
        },
        Err(e) => SweepRow { params: cell.clone(), observables: vec![f64::NAN; width], error: Some(e.to_string()) },
    });
    Ok(SweepTable {
        axis_names: grid.axes.iter().map(|a| a.name.clone()).collect(),
        observable_names: observables.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}
