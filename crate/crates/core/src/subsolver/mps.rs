//! Free-format MPS models of the full problem and of restricted
//! subproblems.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::subproblem::RestrictedSubproblem;
use crate::amount::format_scaled;
use crate::error::Result;
use crate::model::{AdjacencyGraph, Cardinality, Instance, Penalty, ProblemSpec};

#[derive(Clone, Copy)]
enum Sense {
    Eq,
    Le,
    Ge,
}

enum Card {
    Exact(usize),
    Range(usize, usize),
}

#[derive(Default)]
struct Column {
    name: String,
    entries: Vec<(String, String)>,
}

#[derive(Default)]
struct Model {
    rows: Vec<(Sense, String)>,
    binaries: Vec<Column>,
    continuous: Vec<Column>,
    rhs: Vec<(String, String)>,
    fixed: Vec<String>,
}

impl Model {
    fn row(&mut self, sense: Sense, name: String) {
        self.rows.push((sense, name));
    }

    fn write(&self, name: &str, out: &mut impl Write) -> std::io::Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "NAME {name}");
        s.push_str("ROWS\n N COST\n");
        for (sense, row) in &self.rows {
            let c = match sense {
                Sense::Eq => 'E',
                Sense::Le => 'L',
                Sense::Ge => 'G',
            };
            let _ = writeln!(s, " {c} {row}");
        }
        s.push_str("COLUMNS\n");
        s.push_str("    MARKER 'MARKER' 'INTORG'\n");
        for col in &self.binaries {
            for (row, value) in &col.entries {
                let _ = writeln!(s, "    {} {row} {value}", col.name);
            }
        }
        s.push_str("    MARKER 'MARKER' 'INTEND'\n");
        for col in &self.continuous {
            for (row, value) in &col.entries {
                let _ = writeln!(s, "    {} {row} {value}", col.name);
            }
        }
        s.push_str("RHS\n");
        for (row, value) in &self.rhs {
            let _ = writeln!(s, "    RHS {row} {value}");
        }
        s.push_str("BOUNDS\n");
        for col in &self.binaries {
            if self.fixed.contains(&col.name) {
                let _ = writeln!(s, " FX BND {} 1", col.name);
            } else {
                let _ = writeln!(s, " BV BND {}", col.name);
            }
        }
        s.push_str("ENDATA\n");
        out.write_all(s.as_bytes())
    }
}

/// Builds the model over a subproblem. `scale` renders amounts as decimals
/// (full model) instead of raw scaled integers; `extras` adds the rows that
/// tie open facilities to served units (subproblems only).
fn build(sub: &RestrictedSubproblem, scale: Option<u32>, card: Option<Card>, extras: bool) -> Model {
    let amount = |v: i64| match scale {
        Some(s) => format_scaled(v as i128, s),
        None => v.to_string(),
    };
    let m = sub.facilities.len();
    let n = sub.customers.len();
    let unit = |k: usize| sub.customers[k];
    let fac = |r: usize| sub.facilities[r].candidate;
    let mut model = Model::default();

    for k in 0..n {
        model.row(Sense::Eq, format!("ASGN_{}", unit(k)));
        model.rhs.push((format!("ASGN_{}", unit(k)), "1".into()));
    }
    for r in 0..m {
        model.row(Sense::Le, format!("CAP_{}", fac(r)));
    }
    match card {
        Some(Card::Exact(k)) => {
            model.row(Sense::Eq, "CARD".into());
            model.rhs.push(("CARD".into(), k.to_string()));
        }
        Some(Card::Range(lo, hi)) => {
            model.row(Sense::Ge, "CARD_MIN".into());
            model.row(Sense::Le, "CARD_MAX".into());
            model.rhs.push(("CARD_MIN".into(), lo.to_string()));
            model.rhs.push(("CARD_MAX".into(), hi.to_string()));
        }
        None => {}
    }
    let card_rows: &[&str] = match card {
        Some(Card::Exact(_)) => &["CARD"],
        Some(Card::Range(..)) => &["CARD_MIN", "CARD_MAX"],
        None => &[],
    };

    if let Some(cont) = &sub.contiguity {
        for r in 0..m {
            for k in 0..n {
                for &l in &cont.neighbors[k] {
                    model.row(Sense::Le, format!("F6_{}_{}_{}", fac(r), unit(k), unit(l)));
                }
            }
            for k in 0..n {
                for &l in &cont.neighbors[k] {
                    model.row(Sense::Le, format!("F7_{}_{}_{}", fac(r), unit(k), unit(l)));
                }
            }
            for k in 0..n {
                if sub.facilities[r].home != Some(k) {
                    model.row(Sense::Ge, format!("F8_{}_{}", fac(r), unit(k)));
                }
            }
        }
    }
    if extras {
        for (r, f) in sub.facilities.iter().enumerate() {
            if f.home.is_some() {
                model.row(Sense::Eq, format!("SELF_{}", fac(r)));
            }
            if !f.was_open {
                model.row(Sense::Ge, format!("NONEMPTY_{}", fac(r)));
            }
        }
    }

    let flow_cap = n.saturating_sub(1).to_string();
    for f in &sub.facilities {
        let mut y = Column { name: format!("y{}", f.candidate), ..Default::default() };
        if f.fixed_cost != 0 {
            y.entries.push(("COST".into(), amount(f.fixed_cost)));
        }
        y.entries.push((format!("CAP_{}", f.candidate), format!("-{}", amount(f.capacity))));
        for row in card_rows {
            y.entries.push(((*row).into(), "1".into()));
        }
        if extras {
            if f.home.is_some() {
                y.entries.push((format!("SELF_{}", f.candidate), "-1".into()));
            }
            if !f.was_open {
                y.entries.push((format!("NONEMPTY_{}", f.candidate), "-1".into()));
            }
        }
        if f.was_open {
            model.fixed.push(y.name.clone());
        }
        model.binaries.push(y);
    }
    for (r, f) in sub.facilities.iter().enumerate() {
        for k in 0..n {
            let mut x = Column { name: format!("x{}_{}", f.candidate, unit(k)), ..Default::default() };
            let c = sub.cost(r, k);
            if c != 0 {
                x.entries.push(("COST".into(), amount(c)));
            }
            x.entries.push((format!("ASGN_{}", unit(k)), "1".into()));
            x.entries.push((format!("CAP_{}", f.candidate), amount(sub.demands[k])));
            if let Some(cont) = &sub.contiguity {
                for &l in &cont.neighbors[k] {
                    x.entries.push((format!("F6_{}_{}_{}", f.candidate, unit(k), unit(l)), format!("-{flow_cap}")));
                }
                // x_ik caps the flow on every arc (j, k) entering k.
                for &l in &cont.neighbors[k] {
                    x.entries.push((format!("F7_{}_{}_{}", f.candidate, unit(l), unit(k)), format!("-{flow_cap}")));
                }
                if f.home != Some(k) {
                    x.entries.push((format!("F8_{}_{}", f.candidate, unit(k)), "-1".into()));
                }
            }
            if extras {
                if f.home == Some(k) {
                    x.entries.push((format!("SELF_{}", f.candidate), "1".into()));
                }
                if !f.was_open {
                    x.entries.push((format!("NONEMPTY_{}", f.candidate), "1".into()));
                }
            }
            model.binaries.push(x);
        }
    }
    if let Some(cont) = &sub.contiguity {
        for f in &sub.facilities {
            for k in 0..n {
                for &l in &cont.neighbors[k] {
                    let (i, j, kk) = (f.candidate, unit(k), unit(l));
                    let mut col = Column { name: format!("f{i}_{j}_{kk}"), ..Default::default() };
                    col.entries.push((format!("F6_{i}_{j}_{kk}"), "1".into()));
                    col.entries.push((format!("F7_{i}_{j}_{kk}"), "1".into()));
                    if f.home != Some(k) {
                        col.entries.push((format!("F8_{i}_{j}"), "1".into()));
                    }
                    if f.home != Some(l) {
                        col.entries.push((format!("F8_{i}_{kk}"), "-1".into()));
                    }
                    model.continuous.push(col);
                }
            }
        }
    }
    if sub.soft_capacity {
        for f in &sub.facilities {
            let mut h = Column { name: format!("H{}", f.candidate), ..Default::default() };
            h.entries.push(("COST".into(), amount(sub.penalty.alpha)));
            h.entries.push((format!("CAP_{}", f.candidate), "-1".into()));
            model.continuous.push(h);
        }
    }
    model
}

/// Writes the full model of `instance` under `spec`: assignment, capacity
/// and facility-count rows, plus the flow rows for contiguity variants.
pub fn write_mps(
    instance: &Instance,
    spec: &ProblemSpec,
    graph: Option<&AdjacencyGraph>,
    out: &mut impl Write,
) -> Result<()> {
    let sub = RestrictedSubproblem::full(instance, spec, graph, Penalty { alpha: 1 })?;
    let card = spec.cardinality.map(|c| match c {
        Cardinality::Exact(k) => Card::Exact(k),
        Cardinality::Range { min, max } => Card::Range(min, max),
    });
    build(&sub, Some(instance.scale()), card, false).write(spec.variant.name(), out)?;
    Ok(())
}

pub fn emit_mps(instance: &Instance, spec: &ProblemSpec, graph: Option<&AdjacencyGraph>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_mps(instance, spec, graph, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Writes a restricted subproblem. Amounts stay in scaled integer units,
/// `was_open` facilities are fixed open, opened facilities must serve at
/// least one unit, and homes are served by their own facility.
pub fn write_subproblem_mps(sub: &RestrictedSubproblem, out: &mut impl Write) -> Result<()> {
    let card = sub.cardinality.map(|(lo, hi)| if lo == hi { Card::Exact(lo) } else { Card::Range(lo, hi) });
    build(sub, None, card, true).write("SUBPROBLEM", out)?;
    Ok(())
}
