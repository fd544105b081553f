//! Text formats: edge lists, measures, metrics, chain maps and CSV reports.
//!
//! Every float is written with 17 significant digits so that repeated runs
//! produce byte-identical output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::criteria::GcReport;
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, Graph, Vertex};
use crate::heat::{CompletenessReport, InequalityReport};
use crate::metric::{EdgeLengthMetric, GlReport, IntegralReport};
use crate::refinement::RefinementResult;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Non-comment, non-blank lines with their 1-based numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} `{tok}`") })
}

fn arity(fields: &[&str], n: usize, line: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::Parse { line, msg: format!("expected {n} fields, found {}", fields.len()) });
    }
    Ok(())
}

/// Lines `x y value`, one per unordered pair.
fn parse_pairs(text: &str, what: &str) -> Result<Vec<(Vertex, Vertex, f64)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, f) in records(text) {
        arity(&f, 3, line)?;
        let x = Vertex(field(f[0], line, "vertex")?);
        let y = Vertex(field(f[1], line, "vertex")?);
        let v: f64 = field(f[2], line, what)?;
        if x == y {
            return Err(Error::Parse { line, msg: format!("loop at vertex {x}") });
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Parse { line, msg: format!("{what} must be positive and finite") });
        }
        if !seen.insert((x.min(y), x.max(y))) {
            return Err(Error::Parse { line, msg: format!("duplicate edge ({x}, {y})") });
        }
        out.push((x, y, v));
    }
    Ok(out)
}

pub fn parse_edges(text: &str) -> Result<Vec<(Vertex, Vertex, f64)>> {
    parse_pairs(text, "weight")
}

pub fn parse_measure(text: &str) -> Result<BTreeMap<Vertex, f64>> {
    let mut out = BTreeMap::new();
    for (line, f) in records(text) {
        arity(&f, 2, line)?;
        let x = Vertex(field(f[0], line, "vertex")?);
        let m: f64 = field(f[1], line, "measure")?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Parse { line, msg: "measure must be positive and finite".into() });
        }
        if out.insert(x, m).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate vertex {x}") });
        }
    }
    Ok(out)
}

/// Builds a graph from an edge list and an optional measure file; vertices
/// missing from the measure file get `m = 1`.
pub fn read_graph(edges: &str, measure: Option<&str>, degree_bound: usize) -> Result<FiniteGraph> {
    let edges = parse_edges(edges)?;
    let measure = measure.map(parse_measure).transpose()?.unwrap_or_default();
    let mut g = FiniteGraph::new().with_degree_bound(degree_bound);
    for (&x, &m) in &measure {
        g.add_vertex(x, m);
    }
    for &(x, y, _) in &edges {
        for v in [x, y] {
            if !measure.contains_key(&v) {
                g.add_vertex(v, 1.0);
            }
        }
    }
    for (x, y, w) in edges {
        g.add_edge(x, y, w)?;
    }
    for x in g.vertices().unwrap_or_default() {
        g.neighbors(x)?;
    }
    Ok(g)
}

/// Lines `x y len`; the edge set must match `g` exactly.
pub fn parse_metric(text: &str, g: &FiniteGraph, root: Vertex) -> Result<EdgeLengthMetric> {
    let lengths = parse_pairs(text, "length")?;
    let edges: BTreeSet<(Vertex, Vertex)> = g.edges().into_iter().map(|(x, y, _)| (x, y)).collect();
    let listed: BTreeSet<(Vertex, Vertex)> = lengths.iter().map(|&(x, y, _)| (x.min(y), x.max(y))).collect();
    if let Some(&(x, y)) = listed.difference(&edges).next() {
        return Err(Error::InvalidArgument(format!("metric lists ({x}, {y}), which is not an edge")));
    }
    if let Some(&(x, y)) = edges.difference(&listed).next() {
        return Err(Error::MissingLength(x, y));
    }
    Ok(EdgeLengthMetric::from_table(root, lengths.into_iter().map(|(x, y, l)| ((x, y), l))))
}

/// Edge lengths `min(sqrt(m(x)/Deg(x)), sqrt(m(y)/Deg(y)))`, which are
/// intrinsic for every graph.
pub fn default_metric(g: &FiniteGraph, root: Vertex) -> Result<EdgeLengthMetric> {
    let mut lengths = Vec::new();
    for (x, y, _) in g.edges() {
        let lx = (g.measure(x) / g.degree(x)?).sqrt();
        let ly = (g.measure(y) / g.degree(y)?).sqrt();
        lengths.push(((x, y), lx.min(ly)));
    }
    Ok(EdgeLengthMetric::from_table(root, lengths))
}

pub fn write_edges(g: &FiniteGraph) -> String {
    let mut s = String::from("# x y weight\n");
    for (x, y, w) in g.edges() {
        let _ = writeln!(s, "{x} {y} {}", fmt_f64(w));
    }
    s
}

pub fn write_measure(g: &FiniteGraph) -> String {
    let mut s = String::from("# x measure\n");
    for x in g.vertices().unwrap_or_default() {
        let _ = writeln!(s, "{x} {}", fmt_f64(g.measure(x)));
    }
    s
}

pub fn write_metric(g: &FiniteGraph, d: &EdgeLengthMetric) -> Result<String> {
    let mut s = String::from("# x y length\n");
    for (x, y, _) in g.edges() {
        let _ = writeln!(s, "{x} {y} {}", fmt_f64(d.length(x, y)?));
    }
    Ok(s)
}

/// Lines `edge_id x y n v1 ... vn`.
pub fn write_chain_map(res: &RefinementResult) -> String {
    let mut s = String::from("# edge_id x y n v1 ... vn\n");
    for c in &res.chains {
        let _ = write!(s, "{} {} {} {}", c.edge_id, c.x, c.y, c.n());
        for v in &c.inserted {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}

pub fn probe_csv(rep: &CompletenessReport) -> String {
    let mut s = String::from("R,t,deficit,monotone_ok\n");
    for r in &rep.rows {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(r.radius), fmt_f64(r.time), fmt_f64(r.deficit), r.monotone_ok);
    }
    s
}

pub fn inequality_csv(reports: &[InequalityReport]) -> String {
    let mut s = String::from("check,lhs,rhs,slack,preconditions_ok\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.check,
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.slack),
            r.preconditions_ok
        );
    }
    s
}

pub fn gl_csv(rep: &GlReport) -> String {
    let mut s = String::from("r,volume,s_r,gl_ratio\n");
    for row in &rep.rows {
        let vol = row.volume.map_or_else(|| "nan".to_string(), fmt_f64);
        let _ = writeln!(s, "{},{vol},{},{}", fmt_f64(row.r), fmt_f64(row.s_r), fmt_f64(row.ratio));
    }
    s
}

pub fn gc_csv(rep: &GcReport) -> String {
    let mut s = String::from("r,lhs_integral,e_f_r,pass\n");
    for row in &rep.rows {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(row.r), fmt_f64(row.lhs_integral), fmt_f64(row.e_f_r), row.pass);
    }
    s
}

pub fn integral_csv(rep: &IntegralReport) -> String {
    let mut s = String::from("R,partial_integral,diagnostic\n");
    for &(r, v) in &rep.checkpoints {
        let _ = writeln!(s, "{},{},{}", fmt_f64(r), fmt_f64(v), rep.diagnostic);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::check_intrinsic;

    #[test]
    fn round_trip() {
        let text = "# a triangle\n0 1 2.5\n1 2 1\n\n2 0 0.5\n";
        let g = read_graph(text, Some("0 2\n1 3\n2 1\n3 4\n"), 16).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.measure(Vertex(3)), 4.0);
        let again = read_graph(&write_edges(&g), Some(&write_measure(&g)), 16).unwrap();
        assert_eq!(again.edges(), g.edges());
        assert_eq!(write_measure(&again), write_measure(&g));
    }

    #[test]
    fn duplicate_edge_is_rejected() {
        let err = parse_edges("0 1 1\n# again\n1 0 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_edges("0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edges("0 x 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edges("0 1 -1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_measure("0 1\n0 2\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn metric_must_cover_edges() {
        let g = read_graph("0 1 1\n1 2 1\n", None, 16).unwrap();
        assert!(parse_metric("0 1 0.5\n1 2 0.5\n", &g, Vertex(0)).is_ok());
        assert_eq!(parse_metric("0 1 0.5\n", &g, Vertex(0)).unwrap_err(), Error::MissingLength(Vertex(1), Vertex(2)));
        assert!(parse_metric("0 1 0.5\n1 2 0.5\n0 2 1\n", &g, Vertex(0)).is_err());
    }

    #[test]
    fn degree_bound_is_enforced() {
        let text: String = (1..=5).map(|i| format!("0 {i} 1\n")).collect();
        assert!(matches!(read_graph(&text, None, 4), Err(Error::LocallyInfinite { .. })));
    }

    #[test]
    fn default_metric_is_intrinsic() {
        let g = read_graph("0 1 3\n1 2 0.2\n0 2 7\n2 3 1\n", Some("0 0.5\n1 2\n2 1\n3 1\n"), 16).unwrap();
        let d = default_metric(&g, Vertex(0)).unwrap();
        let rep = check_intrinsic(&g, &d, &g.vertices().unwrap()).unwrap();
        assert!(rep.intrinsic);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
    }
}
