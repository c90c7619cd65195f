//! Text formats: graphs, factor certificates, transversal certificates,
//! family manifests, and JSON pipeline instances.
//!
//! All formats are line based, `#` starts a comment, blank lines are ignored,
//! and vertex ids are the global 0-based ids. Writers are byte-stable: the
//! same value always produces the same text.
//!
//! ```text
//! # graph                # factor certificate    # transversal certificate
//! 3 2                    0 2 4                   0 2 4
//! 0 2                    1 3 5                   1 3 5
//! 0 4                                            edge 0 2 -> 0
//! ...                                            ...
//!
//! # family manifest (graph paths relative to the manifest)
//! family 3 2 6
//! block 0 1 0
//! block 0 2 2
//! block 1 2 4
//! graph 0 g0.txt
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::clique::Clique;
use crate::error::{Error, Result};
use crate::graph::{binom2, PartiteGraph, Vertex};
use crate::pipeline::PartitionedInstance;
use crate::transversal::{GraphFamily, TransversalFactor};

/// Size limits applied before any allocation proportional to the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseLimits {
    pub max_vertices: usize,
    pub max_family_graphs: usize,
}

impl Default for ParseLimits {
    fn default() -> Self {
        ParseLimits {
            max_vertices: 20_000,
            max_family_graphs: 100_000,
        }
    }
}

/// Non-comment lines as `(1-based line number, tokens)`.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found {token:?}")))
}

fn expect_len(line: usize, tokens: &[&str], len: usize, shape: &str) -> Result<()> {
    if tokens.len() != len {
        return Err(Error::parse(
            line,
            format!("expected `{shape}`, found {} tokens", tokens.len()),
        ));
    }
    Ok(())
}

pub fn parse_graph(text: &str, limits: &ParseLimits) -> Result<PartiteGraph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "missing `r n` header"))?;
    expect_len(hline, &header, 2, "r n")?;
    let r: usize = number(hline, header[0], "part count")?;
    let n: usize = number(hline, header[1], "part size")?;
    if r.checked_mul(n).is_none_or(|c| c > limits.max_vertices) {
        return Err(Error::parse(
            hline,
            format!(
                "graph exceeds the limit of {} vertices",
                limits.max_vertices
            ),
        ));
    }
    let mut g = PartiteGraph::empty(r, n).map_err(|e| Error::parse(hline, e.to_string()))?;
    for (line, tokens) in lines {
        expect_len(line, &tokens, 2, "u v")?;
        let u: Vertex = number(line, tokens[0], "vertex id")?;
        let v: Vertex = number(line, tokens[1], "vertex id")?;
        add_edge(&mut g, u, v).map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(g)
}

fn add_edge(g: &mut PartiteGraph, u: Vertex, v: Vertex) -> Result<()> {
    let count = g.vertex_count();
    for w in [u, v] {
        if w as usize >= count {
            return Err(Error::VertexOutOfRange { vertex: w, count });
        }
    }
    if g.part_of(u) == g.part_of(v) {
        return Err(Error::IntraPartEdge {
            u,
            v,
            part: g.part_of(u),
        });
    }
    g.insert(u, v);
    Ok(())
}

pub fn write_graph(g: &PartiteGraph) -> String {
    let mut out = format!("{} {}\n", g.r(), g.n());
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").expect("writing to a String");
    }
    out
}

/// Parses a factor certificate: one clique per line. Cliques are returned as
/// written; validity is the verifier's job.
pub fn parse_cliques(text: &str) -> Result<Vec<Vec<Vertex>>> {
    content_lines(text)
        .map(|(line, tokens)| {
            tokens
                .iter()
                .map(|t| number(line, t, "vertex id"))
                .collect()
        })
        .collect()
}

pub fn write_cliques<'a>(cliques: impl IntoIterator<Item = &'a Clique>) -> String {
    let mut out = String::new();
    for c in cliques {
        out.push_str(&join(c.vertices()));
        out.push('\n');
    }
    out
}

fn join(vs: &[Vertex]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Factor lines plus `edge u v -> index` assignments, unvalidated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransversalCertificate {
    pub cliques: Vec<Vec<Vertex>>,
    pub assignment: Vec<((Vertex, Vertex), usize)>,
}

pub fn parse_transversal_certificate(text: &str) -> Result<TransversalCertificate> {
    let mut cert = TransversalCertificate::default();
    for (line, tokens) in content_lines(text) {
        if tokens[0] == "edge" {
            expect_len(line, &tokens, 5, "edge u v -> index")?;
            if tokens[3] != "->" {
                return Err(Error::parse(
                    line,
                    format!("expected `->`, found {:?}", tokens[3]),
                ));
            }
            let u: Vertex = number(line, tokens[1], "vertex id")?;
            let v: Vertex = number(line, tokens[2], "vertex id")?;
            let idx: usize = number(line, tokens[4], "graph index")?;
            cert.assignment.push(((u.min(v), u.max(v)), idx));
        } else {
            let clique = tokens
                .iter()
                .map(|t| number(line, t, "vertex id"))
                .collect::<Result<Vec<Vertex>>>()?;
            cert.cliques.push(clique);
        }
    }
    Ok(cert)
}

pub fn write_transversal_certificate(tf: &TransversalFactor) -> String {
    let mut out = write_cliques(tf.factor.cliques());
    for &((u, v), idx) in &tf.assignment {
        writeln!(out, "edge {u} {v} -> {idx}").expect("writing to a String");
    }
    out
}

impl From<&TransversalFactor> for TransversalCertificate {
    fn from(tf: &TransversalFactor) -> Self {
        TransversalCertificate {
            cliques: tf
                .factor
                .cliques()
                .iter()
                .map(|c| c.vertices().to_vec())
                .collect(),
            assignment: tf.assignment.clone(),
        }
    }
}

/// A parsed family manifest. Block offsets are validated against the
/// lexicographic layout and every graph index appears exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyManifest {
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub blocks: Vec<(usize, usize, usize)>,
    /// Graph file per index, in index order.
    pub graphs: Vec<String>,
}

pub fn parse_family_manifest(text: &str, limits: &ParseLimits) -> Result<FamilyManifest> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "missing `family r n m` header"))?;
    expect_len(hline, &header, 4, "family r n m")?;
    if header[0] != "family" {
        return Err(Error::parse(
            hline,
            format!("expected `family`, found {:?}", header[0]),
        ));
    }
    let r: usize = number(hline, header[1], "part count")?;
    let n: usize = number(hline, header[2], "part size")?;
    let m: usize = number(hline, header[3], "graph count")?;
    if r < 2 {
        return Err(Error::parse(hline, "part count must be at least 2"));
    }
    if r.checked_mul(n).is_none_or(|c| c > limits.max_vertices) {
        return Err(Error::parse(hline, "family exceeds the vertex limit"));
    }
    if m != n * binom2(r) {
        return Err(Error::parse(
            hline,
            format!("m must equal n·binom(r,2) = {}", n * binom2(r)),
        ));
    }
    if m > limits.max_family_graphs {
        return Err(Error::parse(hline, "family exceeds the graph-count limit"));
    }
    let expected_blocks: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
        .collect();
    let mut blocks = Vec::new();
    let mut graphs: Vec<Option<String>> = vec![None; m];
    for (line, tokens) in lines {
        match tokens[0] {
            "block" => {
                expect_len(line, &tokens, 4, "block i j offset")?;
                let i: usize = number(line, tokens[1], "part index")?;
                let j: usize = number(line, tokens[2], "part index")?;
                let offset: usize = number(line, tokens[3], "offset")?;
                let k = blocks.len();
                if expected_blocks.get(k) != Some(&(i, j)) {
                    return Err(Error::parse(
                        line,
                        format!("block ({i}, {j}) out of lexicographic order"),
                    ));
                }
                if offset != k * n {
                    return Err(Error::parse(
                        line,
                        format!("block ({i}, {j}) must start at {}", k * n),
                    ));
                }
                blocks.push((i, j, offset));
            }
            "graph" => {
                expect_len(line, &tokens, 3, "graph index path")?;
                let idx: usize = number(line, tokens[1], "graph index")?;
                let slot = graphs.get_mut(idx).ok_or_else(|| {
                    Error::parse(line, format!("graph index {idx} outside 0..{m}"))
                })?;
                if slot.is_some() {
                    return Err(Error::parse(
                        line,
                        format!("graph index {idx} listed twice"),
                    ));
                }
                *slot = Some(tokens[2].to_string());
            }
            other => return Err(Error::parse(line, format!("unknown directive {other:?}"))),
        }
    }
    if blocks.len() != expected_blocks.len() {
        return Err(Error::parse(
            0,
            format!("expected {} block lines", expected_blocks.len()),
        ));
    }
    let graphs = graphs
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.ok_or_else(|| Error::parse(0, format!("graph index {i} missing"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyManifest {
        r,
        n,
        m,
        blocks,
        graphs,
    })
}

pub fn write_family_manifest(manifest: &FamilyManifest) -> String {
    let mut out = format!("family {} {} {}\n", manifest.r, manifest.n, manifest.m);
    for &(i, j, offset) in &manifest.blocks {
        writeln!(out, "block {i} {j} {offset}").expect("writing to a String");
    }
    for (idx, path) in manifest.graphs.iter().enumerate() {
        writeln!(out, "graph {idx} {path}").expect("writing to a String");
    }
    out
}

/// Reads a manifest and its graph files (paths relative to the manifest).
pub fn load_family(manifest_path: &Path, limits: &ParseLimits) -> Result<GraphFamily> {
    let text = std::fs::read_to_string(manifest_path)?;
    let manifest = parse_family_manifest(&text, limits)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut graphs = Vec::with_capacity(manifest.m);
    for path in &manifest.graphs {
        let g = parse_graph(&std::fs::read_to_string(dir.join(path))?, limits)?;
        graphs.push(g);
    }
    GraphFamily::new(manifest.r, manifest.n, graphs)
}

/// Writes `family.txt` and `g<idx>.txt` files into `dir`.
pub fn save_family(family: &GraphFamily, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let manifest = FamilyManifest {
        r: family.r(),
        n: family.n(),
        m: family.len(),
        blocks: family.blocks().to_vec(),
        graphs: (0..family.len()).map(|i| format!("g{i}.txt")).collect(),
    };
    for (i, g) in family.graphs().iter().enumerate() {
        std::fs::write(dir.join(&manifest.graphs[i]), write_graph(g))?;
    }
    std::fs::write(dir.join("family.txt"), write_family_manifest(&manifest))?;
    Ok(())
}

/// Parses and validates a JSON pipeline instance.
pub fn parse_instance_json(text: &str) -> Result<PartitionedInstance> {
    let inst: PartitionedInstance =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    inst.validate()?;
    Ok(inst)
}

pub fn write_instance_json(inst: &PartitionedInstance) -> String {
    let mut out = serde_json::to_string_pretty(inst).expect("instance serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = PartiteGraph::complete(3, 2)
            .unwrap()
            .filter_edges(|u, v| (u, v) != (0, 3));
        let text = write_graph(&g);
        assert!(text.starts_with("3 2\n0 2\n0 4\n0 5\n1 2\n"));
        assert_eq!(parse_graph(&text, &ParseLimits::default()).unwrap(), g);
    }

    #[test]
    fn graph_errors_name_the_line() {
        let lim = ParseLimits::default();
        assert!(matches!(
            parse_graph("", &lim),
            Err(Error::Parse { line: 0, .. })
        ));
        assert!(matches!(
            parse_graph("3 2\n0 1\n", &lim),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("3 2\n# c\n0 9\n", &lim),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_graph("3 2\n0 x\n", &lim),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("99999 99999\n", &lim),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_graph("3 2 # header\n\n0 2 # edge\n", &lim).is_ok());
    }

    #[test]
    fn cliques_round_trip() {
        let g = PartiteGraph::complete(3, 2).unwrap();
        let cs = [
            Clique::new(&g, vec![0, 2, 4]).unwrap(),
            Clique::new(&g, vec![1, 3, 5]).unwrap(),
        ];
        let text = write_cliques(&cs);
        assert_eq!(text, "0 2 4\n1 3 5\n");
        assert_eq!(
            parse_cliques(&text).unwrap(),
            vec![vec![0, 2, 4], vec![1, 3, 5]]
        );
        assert!(parse_cliques("0 2 -4\n").is_err());
    }

    #[test]
    fn transversal_certificate_parse() {
        let cert = parse_transversal_certificate("0 1 2\nedge 1 0 -> 0\nedge 0 2 -> 1\n").unwrap();
        assert_eq!(cert.cliques, vec![vec![0, 1, 2]]);
        assert_eq!(cert.assignment, vec![((0, 1), 0), ((0, 2), 1)]);
        assert!(parse_transversal_certificate("edge 0 1 => 0\n").is_err());
        assert!(parse_transversal_certificate("edge 0 1 ->\n").is_err());
    }

    #[test]
    fn manifest_round_trip_and_validation() {
        let lim = ParseLimits::default();
        let text = "family 3 1 3\nblock 0 1 0\nblock 0 2 1\nblock 1 2 2\ngraph 0 a\ngraph 1 b\ngraph 2 c\n";
        let m = parse_family_manifest(text, &lim).unwrap();
        assert_eq!(write_family_manifest(&m), text);
        assert!(parse_family_manifest(&text.replace("block 0 2 1", "block 0 2 2"), &lim).is_err());
        assert!(parse_family_manifest(&text.replace("graph 2 c", "graph 1 c"), &lim).is_err());
        assert!(
            parse_family_manifest(&text.replace("family 3 1 3", "family 3 1 4"), &lim).is_err()
        );
        assert!(parse_family_manifest(&text.replace("block 1 2 2\n", ""), &lim).is_err());
    }
}
