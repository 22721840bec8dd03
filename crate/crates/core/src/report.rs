//! Gaps against known bounds, multi-run statistics and the tab-separated
//! run report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::amount::{format_scaled, pow10, Decimal};
use crate::error::{Error, Result};

/// A known bound for one instance, from a `name LB [UB] [opt]` sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRecord {
    pub instance: String,
    pub lb: Decimal,
    /// `lb` is the proven optimum.
    pub optimal: bool,
    pub ub: Option<Decimal>,
}

/// A percentage held exactly as `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percent {
    pub num: i128,
    pub den: i128,
}

impl Percent {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Rounded half away from zero to `decimals` places.
    pub fn rounded(self, decimals: u32) -> String {
        format_scaled(round_div(self.num * pow10(decimals), self.den), decimals)
    }
}

/// `num / den` rounded half away from zero.
fn round_div(num: i128, den: i128) -> i128 {
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = (num.abs() * 2 + den) / (den * 2);
    if num < 0 {
        -q
    } else {
        q
    }
}

/// Brings two decimals to a common number of places.
fn align(a: Decimal, b: Decimal) -> (i128, i128) {
    let d = a.decimals.max(b.decimals);
    (a.mantissa * pow10(d - a.decimals), b.mantissa * pow10(d - b.decimals))
}

/// `(objective − bound) / bound · 100`, against the optimum when the record
/// is flagged optimal and against the lower bound otherwise (the same
/// number; the flag only changes what it means).
pub fn compute_gap(objective: Decimal, bound: &BoundRecord) -> Result<Percent> {
    let (o, b) = align(objective, bound.lb);
    if b <= 0 {
        return Err(Error::Config(format!("bound for {} is not positive", bound.instance)));
    }
    Ok(Percent { num: (o - b) * 100, den: b })
}

/// `(previous − new) / previous · 100`.
pub fn compute_improvement(new: Decimal, previous: Decimal) -> Result<Percent> {
    let (n, p) = align(new, previous);
    if p <= 0 {
        return Err(Error::Config("previous objective is not positive".into()));
    }
    Ok(Percent { num: (p - n) * 100, den: p })
}

/// Summary of the objectives of repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatistics {
    pub min: Decimal,
    pub max: Decimal,
    /// Sum of the objectives at `decimals` places.
    pub sum: i128,
    pub count: usize,
    pub decimals: u32,
    /// Sample standard deviation over the mean, in percent; zero for a
    /// single run.
    pub stdev: f64,
}

impl RunStatistics {
    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64 / pow10(self.decimals) as f64
    }

    /// The mean as a rational against `bound`.
    pub fn mean_gap(&self, bound: &BoundRecord) -> Result<Percent> {
        let total = Decimal { mantissa: self.sum, decimals: self.decimals };
        let (s, b) = align(total, bound.lb);
        if b <= 0 {
            return Err(Error::Config(format!("bound for {} is not positive", bound.instance)));
        }
        let n = self.count as i128;
        Ok(Percent { num: (s - b * n) * 100, den: b * n })
    }

    /// The mean rendered with `decimals` places, rounded half away from zero.
    pub fn mean_text(&self, decimals: u32) -> String {
        let den = self.count as i128 * pow10(self.decimals);
        format_scaled(round_div(self.sum * pow10(decimals), den), decimals)
    }
}

pub fn stats(objectives: &[Decimal]) -> Result<RunStatistics> {
    if objectives.is_empty() {
        return Err(Error::Config("no objectives to summarize".into()));
    }
    let decimals = objectives.iter().map(|d| d.decimals).max().unwrap_or(0);
    let values: Vec<i128> = objectives
        .iter()
        .map(|d| d.mantissa * pow10(decimals - d.decimals))
        .collect();
    let sum: i128 = values.iter().sum();
    let n = values.len();
    let stdev = if n < 2 {
        0.0
    } else {
        let mean = sum as f64 / n as f64;
        let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if mean == 0.0 {
            0.0
        } else {
            var.sqrt() / mean.abs() * 100.0
        }
    };
    let at = |v: i128| Decimal { mantissa: v, decimals };
    Ok(RunStatistics {
        min: at(*values.iter().min().expect("nonempty")),
        max: at(*values.iter().max().expect("nonempty")),
        sum,
        count: n,
        decimals,
        stdev,
    })
}

/// Reads a bound sidecar: `name LB [UB] [opt]` per line, `#` comments.
pub fn read_bounds(path: &Path) -> Result<Vec<BoundRecord>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let bad = |w: &str| Error::parse(path, line, format!("bad number `{w}`"));
        if words.len() < 2 {
            return Err(Error::parse(path, line, "expected `name LB [UB] [opt]`"));
        }
        let lb = Decimal::parse(words[1]).ok_or_else(|| bad(words[1]))?;
        let mut ub = None;
        let mut optimal = false;
        for w in &words[2..] {
            if *w == "opt" {
                optimal = true;
            } else if ub.is_none() && !optimal {
                ub = Some(Decimal::parse(w).ok_or_else(|| bad(w))?);
            } else {
                return Err(Error::parse(path, line, format!("unexpected `{w}`")));
            }
        }
        if let Some(u) = ub {
            let (l, u) = align(lb, u);
            if l > u {
                return Err(Error::parse(path, line, "LB exceeds UB"));
            }
        }
        out.push(BoundRecord { instance: words[0].to_string(), lb, optimal, ub });
    }
    Ok(out)
}

/// One row of the run report.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub instance: String,
    pub problem: String,
    pub solver: String,
    pub seeds: Vec<u64>,
    pub objectives: Vec<Decimal>,
    pub times: Vec<f64>,
    pub feasible: Vec<bool>,
    pub bound: Option<BoundRecord>,
}

pub const REPORT_HEADER: &str =
    "Instance\tProblem\tSolver\tRuns\tObjmin\tObjavg\tObjmax\tGap\tGapavg\tStdev\tTime\tFeasible";

impl RunReport {
    /// The report row; gaps are empty without a bound.
    pub fn row(&self) -> Result<String> {
        let st = stats(&self.objectives)?;
        let gap = match &self.bound {
            Some(b) => compute_gap(st.min, b)?.rounded(2),
            None => String::new(),
        };
        let gapavg = match &self.bound {
            Some(b) => st.mean_gap(b)?.rounded(2),
            None => String::new(),
        };
        let time = self.times.iter().sum::<f64>() / self.times.len().max(1) as f64;
        let fmt = |d: Decimal| format_scaled(d.mantissa, d.decimals);
        Ok(format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{}/{}",
            self.instance,
            self.problem,
            self.solver,
            self.objectives.len(),
            fmt(st.min),
            st.mean_text(st.decimals.max(2)),
            fmt(st.max),
            gap,
            gapavg,
            st.stdev,
            time,
            self.feasible.iter().filter(|&&f| f).count(),
            self.feasible.len()
        ))
    }

    /// Metadata comments, header and row.
    pub fn to_tsv(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "# stdev: sample (n-1) standard deviation over the mean, percent");
        let _ = writeln!(s, "# gap: Objmin vs bound; gapavg: Objavg vs bound");
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "# seeds: {}", seeds.join(" "));
        let objs: Vec<String> = self
            .objectives
            .iter()
            .map(|d| format_scaled(d.mantissa, d.decimals))
            .collect();
        let _ = writeln!(s, "# objectives: {}", objs.join(" "));
        s.push_str(REPORT_HEADER);
        s.push('\n');
        s.push_str(&self.row()?);
        s.push('\n');
        Ok(s)
    }
}
