//! Report rows, CSV emission and the JSON summary.

use std::io::Write;

use serde::{Deserialize, Serialize};

/// Column order of every CSV this crate writes.
pub const HEADER: [&str; 20] = [
    "case",
    "model",
    "bc",
    "mode",
    "mu",
    "length",
    "aspect",
    "position",
    "severity",
    "mesh",
    "degree",
    "omega",
    "ratio",
    "quantity",
    "reference",
    "source",
    "class",
    "tolerance",
    "deviation",
    "pass",
];

/// How a reference column is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceClass {
    /// Closed-form or transcendental reference; tolerance is absolute.
    Analytical,
    /// Another discretization's output; tolerance is relative.
    Numerical,
}

impl ToleranceClass {
    fn label(self) -> &'static str {
        match self {
            ToleranceClass::Analytical => "analytical",
            ToleranceClass::Numerical => "numerical",
        }
    }
}

/// Which computed value `reference` is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    #[default]
    Omega,
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub reference: f64,
    pub source: String,
    /// `None` for rows that report a deviation without judging it.
    pub tolerance: Option<(ToleranceClass, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: String,
    pub model: String,
    pub bc: String,
    pub mode: usize,
    pub mu: f64,
    pub length: f64,
    pub aspect: Option<f64>,
    pub position: Option<f64>,
    pub severity: Option<f64>,
    pub mesh: String,
    pub degree: Option<usize>,
    pub omega: f64,
    pub ratio: Option<f64>,
    pub quantity: Quantity,
    pub check: Option<Check>,
}

impl ReportRow {
    pub fn compared(&self) -> f64 {
        match self.quantity {
            Quantity::Omega => self.omega,
            Quantity::Ratio => self.ratio.unwrap_or(f64::NAN),
        }
    }

    /// `|computed - reference| / reference`.
    pub fn deviation(&self) -> Option<f64> {
        self.check.as_ref().map(|c| (self.compared() - c.reference).abs() / c.reference.abs())
    }

    pub fn pass(&self) -> Option<bool> {
        let c = self.check.as_ref()?;
        let (class, tol) = c.tolerance?;
        let diff = (self.compared() - c.reference).abs();
        Some(match class {
            ToleranceClass::Analytical => diff <= tol,
            ToleranceClass::Numerical => diff <= tol * c.reference.abs(),
        })
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_default();
        let c = self.check.as_ref();
        vec![
            self.case.clone(),
            self.model.clone(),
            self.bc.clone(),
            self.mode.to_string(),
            fmt6(self.mu),
            fmt6(self.length),
            opt(self.aspect),
            opt(self.position),
            opt(self.severity),
            self.mesh.clone(),
            self.degree.map(|d| d.to_string()).unwrap_or_default(),
            fmt6(self.omega),
            opt(self.ratio),
            match (c, self.quantity) {
                (None, _) => String::new(),
                (_, Quantity::Omega) => "omega".into(),
                (_, Quantity::Ratio) => "ratio".into(),
            },
            opt(c.map(|c| c.reference)),
            c.map(|c| c.source.clone()).unwrap_or_default(),
            c.and_then(|c| c.tolerance).map(|t| t.0.label().to_owned()).unwrap_or_default(),
            opt(c.and_then(|c| c.tolerance).map(|t| t.1)),
            opt(self.deviation()),
            self.pass().map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

/// Six significant digits, `%g`-like but without trimming zeros, so a column
/// keeps one width per magnitude.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Decide the exponent after rounding: 9.999996 prints as 10.0000.
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..6).contains(&exp) {
        format!("{x:.*}", (5 - exp) as usize)
    } else {
        sci
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ReportRow]) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<u8>,
    pub rows: usize,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
    pub flags: Vec<String>,
}

impl Summary {
    pub fn new(command: &str, table: Option<u8>, rows: &[ReportRow], mut criteria: Vec<Criterion>, flags: Vec<String>) -> Self {
        for r in rows {
            if let (Some(pass), Some(c)) = (r.pass(), &r.check) {
                let (class, tol) = c.tolerance.expect("pass implies a tolerance");
                criteria.push(Criterion {
                    name: format!("{} mode {} vs {}", r.case, r.mode, c.source),
                    pass,
                    detail: format!(
                        "{} vs {} ({}, tol {})",
                        fmt6(r.compared()),
                        fmt6(c.reference),
                        class.label(),
                        fmt6(tol)
                    ),
                });
            }
        }
        Self {
            command: command.into(),
            table,
            rows: rows.len(),
            pass: criteria.iter().all(|c| c.pass),
            criteria,
            flags,
        }
    }
}
