//! Line-oriented text format for energy-model instances.
//!
//! ```text
//! mrf 1
//! nodes 3
//! labels 4
//! prior tq 2
//! grid 3 1          (optional)
//! unary
//! 0 0.0 1.0 2.0 3.0
//! 1 5.0 0.0 1.0 2.0
//! 2 0.0 0.0 0.0 0.0
//! edges
//! 0 1 1.0
//! 1 2 0.5
//! ```
//!
//! The header carries the format version; unary lines are node-major and
//! prefixed with the node index; edge lines are `i j weight` in canonical
//! order.

use std::io::{BufRead, Write};

use crate::energy::{EnergyModel, GraphTopology, GridInfo, LabelSpace, UnaryTable};
use crate::error::{Error, Result};
use crate::priors::{Prior, PriorKind};

pub const FORMAT_VERSION: u32 = 1;

pub fn write_instance<W: Write>(model: &EnergyModel, w: &mut W) -> Result<()> {
    writeln!(w, "mrf {FORMAT_VERSION}")?;
    writeln!(w, "nodes {}", model.node_count())?;
    writeln!(w, "labels {}", model.label_count())?;
    writeln!(w, "prior {} {}", model.prior().kind().name(), model.prior().trunc())?;
    if let Some(g) = model.topology().grid() {
        writeln!(w, "grid {} {}", g.width, g.height)?;
    }
    writeln!(w, "unary")?;
    for i in 0..model.node_count() {
        write!(w, "{i}")?;
        for &c in model.unary().row(i) {
            write!(w, " {c}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "edges")?;
    for (e, &(i, j)) in model.topology().edges().iter().enumerate() {
        writeln!(w, "{i} {j} {}", model.edge_weights()[e])?;
    }
    Ok(())
}

pub fn read_instance<R: BufRead>(r: R) -> Result<EnergyModel> {
    enum Section {
        Header,
        Unary,
        Edges,
    }
    let mut section = Section::Header;
    let mut nodes = None;
    let mut labels = None;
    let mut prior: Option<(PriorKind, usize)> = None;
    let mut grid: Option<GridInfo> = None;
    let mut unary: Vec<f64> = Vec::new();
    let mut unary_rows = 0usize;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut version_seen = false;

    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: ln + 1, msg };
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        match section {
            Section::Header => match head {
                "mrf" => {
                    let v: u32 = parts
                        .next()
                        .ok_or_else(|| err("missing version".into()))?
                        .parse()
                        .map_err(|_| err("bad version".into()))?;
                    if v != FORMAT_VERSION {
                        return Err(err(format!("unsupported format version {v}")));
                    }
                    version_seen = true;
                }
                "nodes" => {
                    nodes = Some(parse_field(parts.next(), ln, "node count")?);
                }
                "labels" => {
                    labels = Some(parse_field(parts.next(), ln, "label count")?);
                }
                "prior" => {
                    let name = parts.next().ok_or_else(|| err("missing prior name".into()))?;
                    let kind = PriorKind::parse(name)
                        .ok_or_else(|| err(format!("unknown prior '{name}'")))?;
                    let t: usize = parse_field(parts.next(), ln, "truncation")?;
                    prior = Some((kind, t));
                }
                "grid" => {
                    let width = parse_field(parts.next(), ln, "grid width")?;
                    let height = parse_field(parts.next(), ln, "grid height")?;
                    grid = Some(GridInfo { width, height });
                }
                "unary" => {
                    if !version_seen || nodes.is_none() || labels.is_none() || prior.is_none() {
                        return Err(err("unary section before a complete header".into()));
                    }
                    section = Section::Unary;
                }
                other => return Err(err(format!("unexpected header line '{other}'"))),
            },
            Section::Unary => {
                if head == "edges" {
                    if unary_rows != nodes.unwrap() {
                        return Err(err(format!(
                            "expected {} unary rows, found {unary_rows}",
                            nodes.unwrap()
                        )));
                    }
                    section = Section::Edges;
                    continue;
                }
                let idx: usize =
                    head.parse().map_err(|_| err(format!("bad node index '{head}'")))?;
                if idx != unary_rows {
                    return Err(err(format!("unary rows out of order at node {idx}")));
                }
                let l = labels.unwrap();
                let mut count = 0;
                for tok in parts {
                    let v: f64 =
                        tok.parse().map_err(|_| err(format!("bad unary cost '{tok}'")))?;
                    unary.push(v);
                    count += 1;
                }
                if count != l {
                    return Err(err(format!("expected {l} costs, found {count}")));
                }
                unary_rows += 1;
            }
            Section::Edges => {
                let i: usize = head.parse().map_err(|_| err("bad edge endpoint".into()))?;
                let j: usize = parse_field(parts.next(), ln, "edge endpoint")?;
                let w: f64 = parse_field(parts.next(), ln, "edge weight")?;
                edges.push((i, j));
                weights.push(w);
            }
        }
    }

    let nodes = nodes.ok_or(Error::Parse { line: 0, msg: "missing node count".into() })?;
    let labels = labels.ok_or(Error::Parse { line: 0, msg: "missing label count".into() })?;
    let (kind, t) = prior.ok_or(Error::Parse { line: 0, msg: "missing prior".into() })?;
    if unary_rows != nodes {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {nodes} unary rows, found {unary_rows}"),
        });
    }
    let topo = GraphTopology::new(nodes, edges, grid)?;
    // The canonical sort must not have reordered anything: instance files
    // carry edges in canonical order so weights stay aligned.
    EnergyModel::new(
        topo,
        LabelSpace::new(labels)?,
        UnaryTable::new(unary, nodes, labels)?,
        Prior::make(kind, t, labels)?,
        weights,
    )
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, ln: usize, what: &str) -> Result<T> {
    tok.ok_or(Error::Parse { line: ln + 1, msg: format!("missing {what}") })?
        .parse()
        .map_err(|_| Error::Parse { line: ln + 1, msg: format!("bad {what}") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{Labeling, PriorMode};
    use crate::synth;

    #[test]
    fn roundtrip_preserves_energies() {
        let m = synth::grid_model(3, 2, 4, PriorKind::Cauchy, 2, 1.0, 5).unwrap();
        let mut buf = Vec::new();
        write_instance(&m, &mut buf).unwrap();
        let back = read_instance(&buf[..]).unwrap();
        assert_eq!(back.node_count(), m.node_count());
        assert_eq!(back.label_count(), m.label_count());
        for seed in 0..5u64 {
            let x = Labeling::new(
                (0..m.node_count()).map(|i| ((seed as usize + i * 7) % 4)).collect(),
            );
            assert_eq!(
                m.energy(&x, PriorMode::G).unwrap(),
                back.energy(&x, PriorMode::G).unwrap()
            );
        }
    }

    #[test]
    fn rejects_wrong_version() {
        let text = "mrf 99\nnodes 1\nlabels 2\nprior tq 1\nunary\n0 0 0\nedges\n";
        assert!(read_instance(text.as_bytes()).is_err());
    }

    #[test]
    fn rejects_truncated_unary_row() {
        let text = "mrf 1\nnodes 1\nlabels 3\nprior tq 1\nunary\n0 0 0\nedges\n";
        assert!(read_instance(text.as_bytes()).is_err());
    }
}
