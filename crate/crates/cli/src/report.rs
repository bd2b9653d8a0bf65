//! Report rows and their CSV/JSON renderings.
//!
//! Where a value sits records how it was obtained: `formula` holds closed
//! forms, `dense` exact matrix evaluations, `sampled` Monte Carlo estimates
//! with their standard error in `sigma`. Absent values are empty CSV fields
//! and JSON nulls, never zero.

use std::io::Write;

use serde_json::{Map, Value};

pub const COLUMNS: [&str; 9] = ["task", "d", "N", "epsilon", "formula", "dense", "sampled", "sigma", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Monte Carlo estimate outside three standard errors of the formula.
    Flag,
    /// Bound is trivially true at this point.
    Vacuous,
    /// Degenerate parameters (`N = 0` or `d = 1`); formula only.
    Degenerate,
    /// A check exists but the dense evaluation did not fit the budget.
    Unchecked,
    /// The check does not apply at these parameters.
    NotApplicable,
    /// Informational row.
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Flag => "flag",
            Verdict::Vacuous => "vacuous",
            Verdict::Degenerate => "degenerate",
            Verdict::Unchecked => "unchecked",
            Verdict::NotApplicable => "n/a",
            Verdict::Info => "",
        }
    }

    pub fn from_check(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Combines two verdicts, keeping the more serious one.
    pub fn and(self, other: Verdict) -> Verdict {
        fn rank(v: Verdict) -> u8 {
            match v {
                Verdict::Fail => 5,
                Verdict::Flag => 4,
                Verdict::Unchecked => 3,
                Verdict::Pass => 2,
                _ => 1,
            }
        }
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub task: String,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub formula: Option<f64>,
    pub dense: Option<f64>,
    pub sampled: Option<f64>,
    pub sigma: Option<f64>,
    pub verdict: Verdict,
}

impl Row {
    pub fn new(task: impl Into<String>) -> Self {
        Row {
            task: task.into(),
            d: None,
            n: None,
            epsilon: None,
            formula: None,
            dense: None,
            sampled: None,
            sigma: None,
            verdict: Verdict::Info,
        }
    }

    pub fn d(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn eps(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn formula(mut self, v: f64) -> Self {
        self.formula = Some(v);
        self
    }

    pub fn dense(mut self, v: Option<f64>) -> Self {
        self.dense = v;
        self
    }

    pub fn sampled(mut self, v: f64, sigma: f64) -> Self {
        self.sampled = Some(v);
        self.sigma = Some(sigma);
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    /// Short identifier used in failure messages.
    pub fn id(&self) -> String {
        let mut s = self.task.clone();
        if let Some(d) = self.d {
            s.push_str(&format!(" d={d}"));
        }
        if let Some(n) = self.n {
            s.push_str(&format!(" N={n}"));
        }
        if let Some(e) = self.epsilon {
            s.push_str(&format!(" eps={}", fmt_num(e)));
        }
        s
    }

    fn fields(&self) -> [Option<String>; 9] {
        [
            Some(self.task.clone()),
            self.d.map(|v| v.to_string()),
            self.n.map(|v| v.to_string()),
            self.epsilon.map(fmt_num),
            self.formula.map(fmt_num),
            self.dense.map(fmt_num),
            self.sampled.map(fmt_num),
            self.sigma.map(fmt_num),
            Some(self.verdict.as_str().to_string()),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(rows: Vec<Row>) -> Self {
        Report { rows }
    }

    pub fn failures(&self) -> Vec<String> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail).map(Row::id).collect()
    }

    pub fn flagged(&self) -> Vec<String> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Flag).map(Row::id).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.fields().iter().map(|f| f.as_deref().unwrap_or("")))?;
        }
        w.flush()
    }

    pub fn to_json_value(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (key, field) in COLUMNS.iter().zip(row.fields()) {
                    obj.insert((*key).to_string(), field.map_or(Value::Null, Value::String));
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json_value())?;
        out.write_all(b"\n")
    }
}

/// Decimal text with 12 significant digits, trailing zeros removed;
/// scientific notation outside `1e-6 ..= 1e15`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-6..=15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
