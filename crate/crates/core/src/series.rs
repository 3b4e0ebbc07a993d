//! Recorded time (or inverse-temperature) series of observable estimates and
//! their CSV/JSON encodings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::ensemble::{ObservableEstimate, C64};

/// Whether a column carries a real or a complex observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Real,
    Complex,
}

/// Independent variable of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Real time `t`.
    Time,
    /// Inverse temperature `τ`; rows also report `T = 1/τ`.
    InverseTemperature,
}

/// One named estimate produced by a recorder.
#[derive(Clone, Debug)]
pub struct Observation {
    pub name: String,
    pub kind: ColumnKind,
    pub estimate: ObservableEstimate,
}

impl Observation {
    pub fn real(name: impl Into<String>, estimate: ObservableEstimate) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Real,
            estimate,
        }
    }

    pub fn complex(name: impl Into<String>, estimate: ObservableEstimate) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Complex,
            estimate,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub n_alive: usize,
    pub values: Vec<ObservableEstimate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentSeries {
    pub axis: Axis,
    pub columns: Vec<(String, ColumnKind)>,
    pub rows: Vec<SeriesRow>,
}

impl MomentSeries {
    pub fn new(axis: Axis) -> Self {
        Self {
            axis,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; the first row fixes the column layout.
    ///
    /// # Panics
    /// If a later row's columns differ from the first row's.
    pub fn push(&mut self, time: f64, n_alive: usize, observations: Vec<Observation>) {
        let layout: Vec<(String, ColumnKind)> = observations
            .iter()
            .map(|o| (o.name.clone(), o.kind))
            .collect();
        if self.rows.is_empty() && self.columns.is_empty() {
            self.columns = layout;
        } else {
            assert_eq!(self.columns, layout, "series column layout changed");
        }
        self.rows.push(SeriesRow {
            time,
            n_alive,
            values: observations.into_iter().map(|o| o.estimate).collect(),
        });
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }

    /// All estimates of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<ObservableEstimate>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    fn axis_header(&self) -> &'static str {
        match self.axis {
            Axis::Time => "t",
            Axis::InverseTemperature => "tau,temperature",
        }
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from(self.axis_header());
        h.push_str(",n_alive");
        for (name, kind) in &self.columns {
            match kind {
                ColumnKind::Real => {
                    let _ = write!(h, ",{name},{name}_err");
                }
                ColumnKind::Complex => {
                    let _ = write!(h, ",{name}_re,{name}_re_err,{name}_im,{name}_im_err");
                }
            }
        }
        h
    }

    /// CSV table, one row per record, every value paired with its error.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", Num(row.time));
            if self.axis == Axis::InverseTemperature {
                let _ = write!(out, ",{}", Num(1.0 / row.time));
            }
            let _ = write!(out, ",{}", row.n_alive);
            for ((_, kind), v) in self.columns.iter().zip(&row.values) {
                match kind {
                    ColumnKind::Real => {
                        let _ = write!(out, ",{},{}", Num(v.mean.re), Num(v.std_error_re));
                    }
                    ColumnKind::Complex => {
                        let _ = write!(
                            out,
                            ",{},{},{},{}",
                            Num(v.mean.re),
                            Num(v.std_error_re),
                            Num(v.mean.im),
                            Num(v.std_error_im)
                        );
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                obj.insert("time".into(), json_f64(row.time));
                obj.insert("n_alive".into(), json!(row.n_alive));
                for ((name, kind), v) in self.columns.iter().zip(&row.values) {
                    let entry = match kind {
                        ColumnKind::Real => json!({
                            "mean": json_f64(v.mean.re),
                            "err": json_f64(v.std_error_re),
                        }),
                        ColumnKind::Complex => json!({
                            "re": json_f64(v.mean.re),
                            "re_err": json_f64(v.std_error_re),
                            "im": json_f64(v.mean.im),
                            "im_err": json_f64(v.std_error_im),
                        }),
                    };
                    obj.insert(name.clone(), entry);
                }
                Value::Object(obj)
            })
            .collect();
        json!({
            "axis": self.axis,
            "columns": self.columns.iter().map(|(n, k)| json!({"name": n, "kind": k})).collect::<Vec<_>>(),
            "rows": rows,
        })
    }
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

/// JSON has no infinities or NaN; they are written as strings.
fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

/// Convenience: exact (zero-error) real observation.
pub fn exact_real(name: impl Into<String>, value: f64) -> Observation {
    Observation::real(name, ObservableEstimate::exact(C64::new(value, 0.0)))
}

/// Convenience: exact (zero-error) complex observation.
pub fn exact_complex(name: impl Into<String>, value: C64) -> Observation {
    Observation::complex(name, ObservableEstimate::exact(value))
}
