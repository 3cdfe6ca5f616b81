//! Plain-text edge lists: one `pre post` pair per line, `#` starts a comment.
//!
//! The dumper writes a `# vertices N` directive so that isolated trailing
//! vertices survive a round trip. Without the directive the vertex count is
//! `max id + 1`.

use std::io::{BufRead, Write};

use super::DirectedGraph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &DirectedGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# vertices {}", g.n_vertices())?;
    for &(pre, post) in g.edges() {
        writeln!(w, "{pre} {post}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<DirectedGraph> {
    let mut declared: Option<u32> = None;
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            reason: e.to_string(),
        })?;
        let (body, comment) = match line.find('#') {
            Some(pos) => (&line[..pos], Some(&line[pos + 1..])),
            None => (line.as_str(), None),
        };
        if let Some(c) = comment {
            let mut words = c.split_whitespace();
            if words.next() == Some("vertices") {
                let n = words.next().and_then(|w| w.parse().ok()).ok_or(Error::Parse {
                    line: lineno,
                    reason: "malformed `vertices` directive".into(),
                })?;
                declared = Some(n);
            }
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [pre, post] => {
                let parse = |s: &str| {
                    s.parse::<u32>().map_err(|_| Error::Parse {
                        line: lineno,
                        reason: format!("`{s}` is not a vertex id"),
                    })
                };
                edges.push((parse(pre)?, parse(post)?));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    reason: "expected `pre post`".into(),
                })
            }
        }
    }
    let n = declared.unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(a, b)| a.max(b) + 1)
            .max()
            .unwrap_or(0)
    });
    DirectedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a toy graph\n0 1 # first\n\n1 2\n";
        let g = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_edge_list("0 x\n".as_bytes()).is_err());
        assert!(read_edge_list("0 1 2\n".as_bytes()).is_err());
        assert!(read_edge_list("# vertices 2\n0 3\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(n in 1u32..50, raw in prop::collection::vec((0u32..50, 0u32..50), 0..200)) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = DirectedGraph::new(n, edges).unwrap();
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).unwrap();
            let back = read_edge_list(buf.as_slice()).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
