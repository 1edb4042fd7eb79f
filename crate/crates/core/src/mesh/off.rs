//! ASCII OFF input/output. Coordinates of dimension other than 3 use the
//! `nOFF` header followed by a dimension line. Faces with 3 indices are
//! triangles, faces with 4 indices are tetrahedra.

use std::fmt::Write as _;
use std::path::Path;

use super::SimplicialManifold;
use crate::error::{HodgeError, Result};

struct Tokens<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    current: Vec<&'a str>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens { lines: text.lines().enumerate().peekable(), current: Vec::new(), line: 0 }
    }

    /// Next non-empty line (comments stripped) as whitespace tokens.
    fn next_line(&mut self) -> Result<Vec<&'a str>> {
        for (no, raw) in self.lines.by_ref() {
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            if !toks.is_empty() {
                self.line = no + 1;
                self.current = toks.clone();
                return Ok(toks);
            }
        }
        Err(self.error("unexpected end of file"))
    }

    fn error(&self, message: impl Into<String>) -> HodgeError {
        HodgeError::Parse { line: self.line, message: message.into() }
    }

    fn number<T: std::str::FromStr>(&self, tok: &str) -> Result<T> {
        tok.parse().map_err(|_| self.error(format!("invalid number '{tok}'")))
    }
}

/// Parses OFF text into a validated, diameter-normalized manifold.
pub fn parse_off(text: &str) -> Result<SimplicialManifold> {
    let mut t = Tokens::new(text);
    let header = t.next_line()?;
    let mut rest: Vec<&str> = header[1..].to_vec();
    let ambient = match header[0] {
        "OFF" => 3,
        "nOFF" => {
            if rest.is_empty() {
                rest = t.next_line()?;
            }
            let d = t.number::<usize>(rest[0])?;
            rest.remove(0);
            d
        }
        other => return Err(t.error(format!("expected OFF header, found '{other}'"))),
    };
    if ambient == 0 {
        return Err(t.error("zero coordinate dimension"));
    }
    let counts = if rest.is_empty() { t.next_line()? } else { rest };
    if counts.len() < 2 {
        return Err(t.error("expected vertex and face counts"));
    }
    let nv: usize = t.number(counts[0])?;
    let nf: usize = t.number(counts[1])?;
    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let toks = t.next_line()?;
        if toks.len() < ambient {
            return Err(t.error(format!("expected {ambient} coordinates")));
        }
        let c: Vec<f64> = toks[..ambient].iter().map(|s| t.number(s)).collect::<Result<_>>()?;
        if c.iter().any(|x| !x.is_finite()) {
            return Err(t.error("non-finite coordinate"));
        }
        coords.push(c);
    }
    let mut tops = Vec::with_capacity(nf);
    for _ in 0..nf {
        let toks = t.next_line()?;
        let k: usize = t.number(toks[0])?;
        if !(k == 3 || k == 4) {
            return Err(t.error(format!("faces must have 3 or 4 vertices, found {k}")));
        }
        if toks.len() < k + 1 {
            return Err(t.error("truncated face"));
        }
        let face: Vec<usize> = toks[1..=k].iter().map(|s| t.number(s)).collect::<Result<_>>()?;
        if let Some(&v) = face.iter().find(|&&v| v >= nv) {
            return Err(t.error(format!("face references missing vertex {v} ({nv} vertices)")));
        }
        tops.push(face);
    }
    if tops.is_empty() {
        return Err(t.error("no faces"));
    }
    if tops.iter().any(|f| f.len() != tops[0].len()) {
        return Err(t.error("mixed triangles and tetrahedra"));
    }
    SimplicialManifold::from_top_simplices(coords, tops)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SimplicialManifold> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HodgeError::Io { path: path.display().to_string(), source })?;
    parse_off(&text)
}

/// OFF text with top simplices listed in the manifold orientation.
pub fn write_off(m: &SimplicialManifold) -> String {
    let n = m.dim();
    let mut out = String::new();
    if m.ambient_dim() == 3 {
        out.push_str("OFF\n");
    } else {
        let _ = writeln!(out, "nOFF\n{}", m.ambient_dim());
    }
    let _ = writeln!(out, "{} {} 0", m.num_vertices(), m.count(n));
    for v in 0..m.num_vertices() {
        let line: Vec<String> = m.coord(v).iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    for t in 0..m.count(n) {
        let mut s = m.simplex(n, t).to_vec();
        if m.top_orientation(t) < 0 {
            s.swap(0, 1);
        }
        let idx: Vec<String> = s.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{} {}", n + 1, idx.join(" "));
    }
    out
}

pub fn save_mesh(m: &SimplicialManifold, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_off(m)).map_err(|source| HodgeError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "OFF\n# boundary of a tetrahedron\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn parses_tetrahedron_boundary() {
        let m = parse_off(TETRA).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.count(2), 4);
        assert_eq!(m.boundary_composition_defect(), 0);
    }

    #[test]
    fn missing_vertex_is_a_parse_error() {
        let bad = TETRA.replace("3 1 3 2", "3 1 3 7");
        assert!(matches!(parse_off(&bad), Err(HodgeError::Parse { .. })));
    }

    #[test]
    fn garbage_header_is_rejected() {
        assert!(matches!(parse_off("PLY\n"), Err(HodgeError::Parse { line: 1, .. })));
    }

    #[test]
    fn written_text_parses_back() {
        let m = parse_off(TETRA).unwrap();
        let again = parse_off(&write_off(&m)).unwrap();
        assert_eq!(again.counts(), m.counts());
        for t in 0..4 {
            assert_eq!(again.simplex(2, t), m.simplex(2, t));
            assert_eq!(again.top_orientation(t), m.top_orientation(t));
        }
    }
}
