//! Plain-text surface format.
//!
//! ```text
//! # comment lines and blank lines are ignored
//! surface <n_vertices> <n_triangles> <n_edges>
//! v <index> <label>
//! t <i> <j> <k>
//! e <i> <j> <length>
//! ```
//!
//! Records appear in index order for vertices, in stored order for
//! triangles, and in lexicographic `(i < j)` order for edges. Lengths are
//! printed in shortest round-trip form, so reading a written surface
//! reproduces it bit for bit.

use super::{SurfaceError, TriSurface};
use std::collections::BTreeMap;
use std::fmt::Write;

pub fn write_surface(s: &TriSurface) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "surface {} {} {}",
        s.n_vertices(),
        s.triangles().len(),
        s.lengths().len()
    )
    .unwrap();
    for (i, l) in s.labels().iter().enumerate() {
        writeln!(out, "v {i} {l}").unwrap();
    }
    for t in s.triangles() {
        writeln!(out, "t {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    for (&(a, b), &l) in s.lengths() {
        writeln!(out, "e {a} {b} {l:?}").unwrap();
    }
    out
}

pub fn parse_surface(text: &str) -> Result<TriSurface, SurfaceError> {
    let mut header: Option<[usize; 3]> = None;
    let mut labels = Vec::new();
    let mut tris = Vec::new();
    let mut lengths = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |msg: &str| SurfaceError::Parse {
            line,
            msg: msg.to_string(),
        };
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        let idx = |k: usize| -> Result<usize, SurfaceError> {
            tok.get(k)
                .ok_or_else(|| err("missing field"))?
                .parse()
                .map_err(|_| err("expected a non-negative integer"))
        };
        match tok[0] {
            "surface" if tok.len() == 4 => {
                if header.is_some() {
                    return Err(err("duplicate header"));
                }
                header = Some([idx(1)?, idx(2)?, idx(3)?]);
            }
            _ if header.is_none() => return Err(err("expected `surface` header")),
            "v" if tok.len() == 3 => {
                if idx(1)? != labels.len() {
                    return Err(err("vertex records must be numbered consecutively"));
                }
                labels.push(tok[2].to_string());
            }
            "t" if tok.len() == 4 => tris.push([idx(1)?, idx(2)?, idx(3)?]),
            "e" if tok.len() == 4 => {
                let (a, b) = (idx(1)?, idx(2)?);
                if a >= b {
                    return Err(err("edge records need i < j"));
                }
                let l: f64 = tok[3].parse().map_err(|_| err("bad length"))?;
                if lengths.insert((a, b), l).is_some() {
                    return Err(err("duplicate edge record"));
                }
            }
            _ => return Err(err("unrecognised record")),
        }
    }
    let [nv, nt, ne] = header.ok_or(SurfaceError::Parse {
        line: 0,
        msg: "empty input".into(),
    })?;
    if (labels.len(), tris.len(), lengths.len()) != (nv, nt, ne) {
        return Err(SurfaceError::Parse {
            line: 0,
            msg: format!(
                "header announces {nv}/{nt}/{ne} records, found {}/{}/{}",
                labels.len(),
                tris.len(),
                lengths.len()
            ),
        });
    }
    TriSurface::new(labels, tris, lengths)
}
