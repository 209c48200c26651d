//! DMESH: a line-oriented text format.
//!
//! ```text
//! DIM <d>
//! VERTICES <n>
//! <x> [<y> [<z>]]        n lines
//! SIMPLICES <t>
//! <i0> ... <id>          t lines, 0-based
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::SimplicialMesh;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next non-empty line with comments stripped, tokenized.
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            self.last = i + 1;
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next_tokens().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn header(&mut self, keyword: &str) -> Result<(usize, usize)> {
        let (line, tokens) = self.expect(keyword)?;
        if tokens.len() != 2 || tokens[0] != keyword {
            return Err(Error::Parse { line, message: format!("expected `{keyword} <count>`") });
        }
        let value = tokens[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid {keyword} value `{}`", tokens[1]),
        })?;
        Ok((line, value))
    }
}

/// Parses DMESH text into a validated mesh.
pub fn load_mesh<T: Real>(text: &str) -> Result<SimplicialMesh<T>> {
    let mut lines = Lines::new(text);
    let (line, dim) = lines.header("DIM")?;
    if !(1..=3).contains(&dim) {
        return Err(Error::Parse { line, message: format!("DIM must be 1, 2 or 3, got {dim}") });
    }
    let (_, n) = lines.header("VERTICES")?;
    let mut vertices = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let (line, tokens) = lines.expect("a vertex")?;
        if tokens.len() != dim {
            return Err(Error::Parse {
                line,
                message: format!("expected {dim} coordinates, found {}", tokens.len()),
            });
        }
        for tok in tokens {
            let x: T = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid coordinate `{tok}`"),
            })?;
            vertices.push(x);
        }
    }
    let (_, t) = lines.header("SIMPLICES")?;
    let mut simplices = Vec::with_capacity(t * (dim + 1));
    for _ in 0..t {
        let (line, tokens) = lines.expect("a simplex")?;
        if tokens.len() != dim + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} indices, found {}", dim + 1, tokens.len()),
            });
        }
        for tok in tokens {
            let i: usize = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid vertex index `{tok}`"),
            })?;
            simplices.push(i);
        }
    }
    if let Some((line, _)) = lines.next_tokens() {
        return Err(Error::Parse { line, message: "trailing content after simplices".into() });
    }
    SimplicialMesh::new(dim, vertices, simplices)
}

/// Writes a mesh as DMESH with 17 significant digits per coordinate, so
/// loading the output reproduces the coordinates bit for bit.
pub fn save_mesh<T: Real>(mesh: &SimplicialMesh<T>) -> String {
    let d = mesh.dim();
    let mut out = String::new();
    let _ = writeln!(out, "DIM {d}");
    let _ = writeln!(out, "VERTICES {}", mesh.num_vertices());
    for v in 0..mesh.num_vertices() {
        let line: Vec<String> = mesh.vertex(v).iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "SIMPLICES {}", mesh.num_simplices());
    for s in mesh.simplices() {
        let line: Vec<String> = s.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_annulus;

    #[test]
    fn minimal_segment() {
        let m: SimplicialMesh<f64> =
            load_mesh("DIM 1\nVERTICES 2\n0\n1\nSIMPLICES 1\n0 1\n").unwrap();
        assert_eq!((m.num_vertices(), m.num_simplices()), (2, 1));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a segment\nDIM 1\n\nVERTICES 2 # two\n0\n1\nSIMPLICES 1\n0 1\n";
        let m: SimplicialMesh<f64> = load_mesh(text).unwrap();
        assert_eq!(m.num_vertices(), 2);
    }

    #[test]
    fn index_out_of_range() {
        let text = "DIM 2\nVERTICES 3\n0 0\n1 0\n0 1\nSIMPLICES 1\n0 1 5\n";
        match load_mesh::<f64>(text) {
            Err(Error::IndexOutOfRange { simplex: 0, vertex: 5, count: 3 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "DIM 2\nVERTICES 3\n0 0\n1 zero\n0 1\nSIMPLICES 1\n0 1 2\n";
        match load_mesh::<f64>(text) {
            Err(Error::Parse { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match load_mesh::<f64>("DIM 2\nVERTICES 3\n0 0\n") {
            Err(Error::Parse { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_simplex_named() {
        let text = "DIM 2\nVERTICES 4\n0 0\n1 0\n0 1\n2 0\nSIMPLICES 2\n0 1 2\n0 1 3\n";
        match load_mesh::<f64>(text) {
            Err(Error::DegenerateSimplex { simplex: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_annulus() {
        let m = generate_annulus(1.0, 2.0, 3, 17, 0.1).unwrap();
        let text = save_mesh(&m);
        let back: SimplicialMesh<f64> = load_mesh(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_mesh(&back), text);
    }
}
