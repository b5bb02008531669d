//! Report rows and their CSV / JSON renderings.

use serde::Serialize;

use crate::config::Format;

/// Version of the JSON document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Fixed CSV header.
pub const CSV_HEADER: &str = "experiment,r,N,l,function,metric,value,check";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Count(u64),
    /// Not applicable, e.g. a ratio with a vanishing denominator.
    Missing,
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Self::Real(v) if v.is_finite() => format!("{v:.16e}"),
            Self::Real(v) => format!("{v}"),
            Self::Count(c) => c.to_string(),
            Self::Missing => "NA".to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Self::Real(v) => Some(v),
            Self::Count(c) => Some(c as f64),
            Self::Missing => None,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Missing, Self::Real)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub r: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub function: String,
    pub metric: String,
    pub value: Value,
    /// Outcome of the tolerance check attached to this metric, if any.
    pub check: Option<bool>,
}

impl ReportRow {
    pub fn new(experiment: &str, metric: impl Into<String>, value: impl Into<Value>) -> Self {
        Self {
            experiment: experiment.to_string(),
            r: None,
            n: None,
            l: None,
            function: String::new(),
            metric: metric.into(),
            value: value.into(),
            check: None,
        }
    }

    pub fn r(mut self, r: usize) -> Self {
        self.r = Some(r);
        self
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn l(mut self, l: usize) -> Self {
        self.l = Some(l);
        self
    }

    pub fn function(mut self, label: &str) -> Self {
        self.function = label.to_string();
        self
    }

    pub fn check(mut self, pass: bool) -> Self {
        self.check = Some(pass);
        self
    }

    fn csv(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let check = match self.check {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "",
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.experiment,
            opt(self.r),
            opt(self.n),
            opt(self.l),
            self.function,
            self.metric,
            self.value.csv(),
            check
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    /// Stable sort by `(experiment, r, N, l, function)`; metrics keep their
    /// emission order within a group.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.experiment, a.r, a.n, a.l, &a.function).cmp(&(&b.experiment, b.r, b.n, b.l, &b.function))
        });
    }

    /// `true` when no row failed its check.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.check != Some(false))
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.check == Some(false))
    }

    /// CSV with a fixed header; the seed is carried by a leading `meta` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 2));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let meta = ReportRow {
            value: Value::Count(self.seed),
            ..ReportRow::new("meta", "seed", Value::Missing)
        };
        out.push_str(&meta.csv());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}
