//! Plain-text formats: edge lists, measure files, point files and
//! coordinate CSV.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::generators::PointCloud;
use crate::graph::Graph;
use crate::measure::VertexMeasure;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers and the
/// text before any `#`.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

/// Parses `u v` lines (0-indexed, `#` starts a comment). The vertex count
/// is `n` if given, else one more than the largest index.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    for (line, body) in content_lines(text) {
        let mut fields = body.split_whitespace();
        let mut vertex = || -> Result<usize> {
            let field = fields.next().ok_or_else(|| parse_err(line, "expected two vertex indices"))?;
            field
                .parse()
                .map_err(|_| parse_err(line, format!("'{field}' is not a vertex index")))
        };
        let (u, v) = (vertex()?, vertex()?);
        if fields.next().is_some() {
            return Err(parse_err(line, "trailing fields after edge"));
        }
        edges.push((u, v));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Graph::from_edges(n, &edges)
}

pub fn write_edge_list(g: &Graph, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "# {} vertices, {} edges", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25` or `1e-3`
/// into an exact rational. Returns `None` for anything else.
pub fn parse_exact_weight(field: &str) -> Option<BigRational> {
    if let Some((p, q)) = field.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    let (mantissa, exponent) = match field.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (field, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    let unsigned = int_part.strip_prefix(['+', '-']).unwrap_or(int_part);
    if !digits_ok(unsigned) || !digits_ok(frac_part) || (unsigned.is_empty() && frac_part.is_empty()) {
        return None;
    }
    let numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = BigRational::from_integer(numer);
    Some(if scale >= 0 {
        r * BigRational::from_integer(num_traits::pow(ten, scale as usize))
    } else {
        r / BigRational::from_integer(num_traits::pow(ten, (-scale) as usize))
    })
}

/// Parses `vertex weight` lines for a graph on `n` vertices; unlisted
/// vertices get weight 0.
///
/// Weights are read exactly. When they sum to exactly 1 the measure keeps
/// its rational weights; otherwise the floating-point sum must be within
/// the mass tolerance of 1.
pub fn parse_measure(text: &str, n: usize) -> Result<VertexMeasure> {
    let mut exact = vec![BigRational::zero(); n];
    let mut seen = vec![false; n];
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [vertex, weight] = fields[..] else {
            return Err(parse_err(line, "expected 'vertex weight'"));
        };
        let v: usize = vertex
            .parse()
            .map_err(|_| parse_err(line, format!("'{vertex}' is not a vertex index")))?;
        if v >= n {
            return Err(Error::BadVertex { vertex: v, n });
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(parse_err(line, format!("vertex {v} listed twice")));
        }
        exact[v] = parse_exact_weight(weight).ok_or_else(|| parse_err(line, format!("'{weight}' is not a weight")))?;
    }
    let total: BigRational = exact.iter().sum();
    if total.is_one() {
        VertexMeasure::from_rationals(exact)
    } else {
        VertexMeasure::from_weights(exact.iter().map(crate::exact::rational_to_f64).collect())
    }
}

/// Writes the support of `mu` as `vertex weight` lines, exact where
/// available.
pub fn write_measure(mu: &VertexMeasure) -> String {
    let mut out = String::new();
    for v in mu.support() {
        let w = match mu.exact_weights() {
            Some(exact) => crate::exact::format_rational(&exact[v]),
            None => format!("{}", mu.weight(v)),
        };
        let _ = writeln!(out, "{v} {w}");
    }
    out
}

/// Parses one point per line: whitespace-separated coordinates, then
/// optionally `|` and metadata values. A `# metadata: name ...` comment
/// names the metadata columns; otherwise they are `m0, m1, ...`.
pub fn parse_points(text: &str) -> Result<PointCloud> {
    let mut names: Option<Vec<String>> = None;
    let mut coords = Vec::new();
    let mut metadata = Vec::new();
    let mut shape: Option<(usize, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(rest) = raw.trim().strip_prefix('#') {
            if let Some(list) = rest.trim().strip_prefix("metadata:") {
                names = Some(list.split_whitespace().map(String::from).collect());
            }
            continue;
        }
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (point, meta) = body.split_once('|').unwrap_or((body, ""));
        let parse_all = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| parse_err(line, format!("'{f}' is not a finite number")))
                })
                .collect()
        };
        let p = parse_all(point)?;
        let m = parse_all(meta)?;
        match shape {
            None if p.is_empty() => return Err(parse_err(line, "point has no coordinates")),
            None => shape = Some((p.len(), m.len())),
            Some(s) if s != (p.len(), m.len()) => {
                return Err(parse_err(
                    line,
                    format!("expected {} coordinates and {} metadata values", s.0, s.1),
                ))
            }
            Some(_) => {}
        }
        coords.extend(p);
        metadata.extend(m);
    }
    let (dim, k) = shape.ok_or_else(|| parse_err(0, "no points"))?;
    let names = names.unwrap_or_else(|| (0..k).map(|j| format!("m{j}")).collect());
    if names.len() != k {
        return Err(parse_err(0, format!("{} metadata names for {k} columns", names.len())));
    }
    let mut cloud = PointCloud::new(dim, coords)?;
    cloud.metadata_names = names;
    cloud.metadata = metadata;
    Ok(cloud)
}

pub fn write_points(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let k = cloud.metadata_names.len();
    if k > 0 {
        let _ = writeln!(out, "# metadata: {}", cloud.metadata_names.join(" "));
    }
    for i in 0..cloud.len() {
        let p: Vec<String> = cloud.point(i).iter().map(|x| x.to_string()).collect();
        out.push_str(&p.join(" "));
        if k > 0 {
            let m: Vec<String> = cloud.metadata[i * k..(i + 1) * k].iter().map(|x| x.to_string()).collect();
            let _ = write!(out, " | {}", m.join(" "));
        }
        out.push('\n');
    }
    out
}

/// CSV with a `vertex` column followed by one column per label; `rows[v]`
/// holds the coordinates of vertex `v`.
pub fn write_coordinates_csv(labels: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("vertex");
    for l in labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (v, row) in rows.iter().enumerate() {
        let _ = write!(out, "{v}");
        for x in row {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}
