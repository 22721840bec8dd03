//! The line-oriented canonical instance format.
//!
//! ```text
//! SSCFLP-GEO 1            # or SSCFLP-RAW 1 (units carry no coordinates)
//! UNITS 3
//! 0 0.0 0.0 2             # id x y demand   (RAW: id demand)
//! 1 1.0 0.0 1
//! 2 2.0 0.0 4
//! CANDIDATES 2
//! 0 10 80                 # unit capacity fixed_cost; `-` for no unit
//! 2 10 75
//! EDGES 2                 # optional
//! 0 1
//! 1 2
//! COSTS euclidean_demand  # or `COSTS explicit` followed by one row per candidate
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Cursor, DecimalPool};
use crate::amount::{format_scaled, round_to_scale, Decimal};
use crate::error::{Error, Result};
use crate::model::{AdjacencyGraph, Candidate, Instance, Point};

/// Decimals used for costs derived from coordinates when the file itself
/// carries fewer.
const EUCLIDEAN_MIN_SCALE: u32 = 2;

pub fn load_canonical(path: &Path) -> Result<(Instance, Option<AdjacencyGraph>)> {
    let text = fs::read_to_string(path)?;
    parse_canonical(&text, path)
}

/// Parses canonical text; `path` is used only in error messages.
pub fn parse_canonical(text: &str, path: &Path) -> Result<(Instance, Option<AdjacencyGraph>)> {
    let mut cur = Cursor::new(path, text);
    let tag = cur.next("format header")?;
    let geo = match tag.text {
        "SSCFLP-GEO" => true,
        "SSCFLP-RAW" => false,
        other => return Err(Error::parse(path, tag.line, format!("unknown header `{other}`"))),
    };
    let version = cur.next("format version")?;
    if version.text != "1" {
        return Err(Error::parse(
            path,
            version.line,
            format!("unsupported version `{}`", version.text),
        ));
    }

    expect_keyword(&mut cur, "UNITS")?;
    let n = cur.usize("unit count")?;
    let mut pool = DecimalPool::default();
    let mut demands: Vec<Option<Decimal>> = vec![None; n];
    let mut coords = vec![Point { x: 0.0, y: 0.0 }; if geo { n } else { 0 }];
    for _ in 0..n {
        let id_tok = cur.next("unit id")?;
        let id: usize = id_tok
            .text
            .parse()
            .ok()
            .filter(|&id| id < n)
            .ok_or_else(|| Error::parse(path, id_tok.line, format!("bad unit id `{}`", id_tok.text)))?;
        if geo {
            coords[id] = Point {
                x: coordinate(&mut cur)?,
                y: coordinate(&mut cur)?,
            };
        }
        let d = pool.see(cur.decimal("demand")?);
        if demands[id].replace(d).is_some() {
            return Err(Error::parse(path, id_tok.line, format!("unit {id} listed twice")));
        }
    }
    let demands: Vec<Decimal> = demands.into_iter().map(|d| d.expect("all ids seen")).collect();

    expect_keyword(&mut cur, "CANDIDATES")?;
    let m = cur.usize("candidate count")?;
    let mut raw_candidates = Vec::with_capacity(m);
    for _ in 0..m {
        let site_tok = cur.next("candidate unit")?;
        let site = match site_tok.text {
            "-" => None,
            t => Some(t.parse::<usize>().ok().filter(|&s| s < n).ok_or_else(|| {
                Error::parse(path, site_tok.line, format!("bad candidate unit `{t}`"))
            })?),
        };
        let s = pool.see(cur.decimal("capacity")?);
        let f = pool.see(cur.decimal("fixed cost")?);
        raw_candidates.push((site, s, f));
    }

    let mut section = cur.next("EDGES or COSTS")?;
    let mut graph = None;
    if section.text == "EDGES" {
        let e = cur.usize("edge count")?;
        let mut edges = Vec::with_capacity(e);
        for _ in 0..e {
            let line = cur.tokens.get(cur.pos).map_or(0, |t| t.line);
            let a = cur.usize("edge endpoint")?;
            let b = cur.usize("edge endpoint")?;
            if a >= b || b >= n {
                return Err(Error::parse(path, line, format!("edge `{a} {b}` must satisfy a < b < {n}")));
            }
            edges.push((a, b));
        }
        graph = Some(AdjacencyGraph::from_edges(n, &edges)?);
        section = cur.next("COSTS")?;
    }
    if section.text != "COSTS" {
        return Err(Error::parse(path, section.line, format!("expected COSTS, found `{}`", section.text)));
    }
    let mode = cur.next("cost mode")?;
    let costs = match mode.text {
        "explicit" => {
            let mut raw = Vec::with_capacity(m * n);
            for _ in 0..m * n {
                raw.push(pool.see(cur.decimal("cost")?));
            }
            cur.finish()?;
            pool.scaled_all(&raw, "cost")?
        }
        "euclidean_demand" => {
            cur.finish()?;
            if !geo {
                return Err(Error::parse(path, mode.line, "euclidean costs need SSCFLP-GEO coordinates"));
            }
            pool.scale = pool.scale.max(EUCLIDEAN_MIN_SCALE);
            let mut out = Vec::with_capacity(m * n);
            for (i, &(site, _, _)) in raw_candidates.iter().enumerate() {
                let site = site.ok_or_else(|| {
                    Error::Structure(format!("candidate {i} has no unit for euclidean costs"))
                })?;
                for (j, d) in demands.iter().enumerate() {
                    let dist = coords[site].distance(coords[j]);
                    out.push(round_to_scale(dist * decimal_f64(*d), pool.scale));
                }
            }
            out
        }
        other => return Err(Error::parse(path, mode.line, format!("unknown cost mode `{other}`"))),
    };

    let demands = pool.scaled_all(&demands, "demand")?;
    let candidates = raw_candidates
        .iter()
        .map(|&(site, s, f)| {
            Ok(Candidate {
                site,
                capacity: pool.scaled(s, "capacity")?,
                fixed_cost: pool.scaled(f, "fixed cost")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(pool.scale, demands, candidates, costs, geo.then_some(coords))?;
    Ok((instance, graph))
}

fn expect_keyword(cur: &mut Cursor<'_>, word: &str) -> Result<()> {
    let tok = cur.next(word)?;
    if tok.text != word {
        return Err(Error::parse(cur.path, tok.line, format!("expected {word}, found `{}`", tok.text)));
    }
    Ok(())
}

fn coordinate(cur: &mut Cursor<'_>) -> Result<f64> {
    let tok = cur.next("coordinate")?;
    tok.text
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(cur.path, tok.line, format!("bad coordinate `{}`", tok.text)))
}

fn decimal_f64(d: Decimal) -> f64 {
    d.mantissa as f64 / 10f64.powi(d.decimals as i32)
}

/// Writes the instance with explicit costs. Loading the result reproduces
/// the instance and graph exactly.
pub fn write_canonical(instance: &Instance, graph: Option<&AdjacencyGraph>, out: &mut impl Write) -> Result<()> {
    let scale = instance.scale();
    let amount = |v: i64| format_scaled(v as i128, scale);
    let mut s = String::new();
    let coords = instance.coords();
    s.push_str(if coords.is_some() { "SSCFLP-GEO 1\n" } else { "SSCFLP-RAW 1\n" });
    let _ = writeln!(s, "UNITS {}", instance.n());
    for j in 0..instance.n() {
        match coords {
            Some(c) => {
                let _ = writeln!(s, "{j} {} {} {}", c[j].x, c[j].y, amount(instance.demand(j)));
            }
            None => {
                let _ = writeln!(s, "{j} {}", amount(instance.demand(j)));
            }
        }
    }
    let _ = writeln!(s, "CANDIDATES {}", instance.m());
    for c in instance.candidates() {
        let site = c.site.map_or_else(|| "-".to_string(), |u| u.to_string());
        let _ = writeln!(s, "{site} {} {}", amount(c.capacity), amount(c.fixed_cost));
    }
    if let Some(g) = graph {
        let edges = g.edges();
        let _ = writeln!(s, "EDGES {}", edges.len());
        for (a, b) in edges {
            let _ = writeln!(s, "{a} {b}");
        }
    }
    s.push_str("COSTS explicit\n");
    for i in 0..instance.m() {
        let row: Vec<String> = instance.cost_row(i).iter().map(|&c| amount(c)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn save_canonical(instance: &Instance, graph: Option<&AdjacencyGraph>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_canonical(instance, graph, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
