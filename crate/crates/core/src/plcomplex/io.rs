//! Plain-text complex format.
//!
//! ```text
//! complex4 <n_vertices> <n_simplices> <n_gluings>
//! tol_angle <absolute tolerance on cone angles>
//! tol_length <relative tolerance on glued edge lengths>
//! v <index> <label>
//! s <index> <v0> <v1> <v2> <v3> <v4> <l01> <l02> <l03> <l04> <l12> <l13> <l14> <l23> <l24> <l34>
//! g <simplex> <facet> <partner> <partner facet>
//! ```
//!
//! A facet is named by the local index (0–4) of the vertex it omits. Every
//! gluing is listed once, from the lower-numbered simplex. Gluings are
//! implied by shared vertex ids; the reader checks that the listed records
//! agree with them and then validates the complex. Numbers are printed in
//! shortest round-trip form.

use super::{ComplexError, ComplexTolerances, MetricComplex4, Simplex};
use std::fmt::Write;

pub fn write_complex(m: &MetricComplex4) -> String {
    let gluings = gluing_records(m);
    let mut out = String::new();
    writeln!(
        out,
        "complex4 {} {} {}",
        m.n_vertices(),
        m.n_simplices(),
        gluings.len()
    )
    .unwrap();
    writeln!(out, "tol_angle {:?}", m.tolerances.angle).unwrap();
    writeln!(out, "tol_length {:?}", m.tolerances.length).unwrap();
    for (i, l) in m.labels().iter().enumerate() {
        writeln!(out, "v {i} {l}").unwrap();
    }
    for (i, s) in m.simplices().iter().enumerate() {
        write!(out, "s {i}").unwrap();
        for v in s.vertices {
            write!(out, " {v}").unwrap();
        }
        for l in s.lengths {
            write!(out, " {l:?}").unwrap();
        }
        out.push('\n');
    }
    for [a, fa, b, fb] in gluings {
        writeln!(out, "g {a} {fa} {b} {fb}").unwrap();
    }
    out
}

fn gluing_records(m: &MetricComplex4) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for s in 0..m.n_simplices() {
        for k in 0..5 {
            if let Some(g) = m.neighbor(s, k) {
                if s < g.simplex {
                    out.push([s, k, g.simplex, g.facet]);
                }
            }
        }
    }
    out
}

/// Parses and validates a complex; invalid complexes are rejected with
/// the full validation report.
pub fn parse_complex(text: &str) -> Result<MetricComplex4, ComplexError> {
    let m = parse_unvalidated(text)?;
    let report = m.validate();
    if report.is_valid() {
        Ok(m)
    } else {
        Err(ComplexError::Invalid(report))
    }
}

fn parse_unvalidated(text: &str) -> Result<MetricComplex4, ComplexError> {
    let mut header: Option<[usize; 3]> = None;
    let mut tol = ComplexTolerances::default();
    let mut labels = Vec::new();
    let mut simplices = Vec::new();
    let mut gluings = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |msg: &str| ComplexError::Parse {
            line,
            msg: msg.to_string(),
        };
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        let int = |k: usize| -> Result<usize, ComplexError> {
            tok[k].parse().map_err(|_| err("expected a non-negative integer"))
        };
        let real = |k: usize| -> Result<f64, ComplexError> {
            let x: f64 = tok[k].parse().map_err(|_| err("expected a number"))?;
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(err("expected a positive finite number"))
            }
        };
        match (tok[0], tok.len()) {
            ("complex4", 4) => {
                if header.is_some() {
                    return Err(err("duplicate header"));
                }
                header = Some([int(1)?, int(2)?, int(3)?]);
            }
            _ if header.is_none() => return Err(err("expected `complex4` header")),
            ("tol_angle", 2) => tol.angle = real(1)?,
            ("tol_length", 2) => tol.length = real(1)?,
            ("v", 3) => {
                if int(1)? != labels.len() {
                    return Err(err("vertex records must be numbered consecutively"));
                }
                labels.push(tok[2].to_string());
            }
            ("s", 17) => {
                if int(1)? != simplices.len() {
                    return Err(err("simplex records must be numbered consecutively"));
                }
                let mut vertices = [0; 5];
                for (k, v) in vertices.iter_mut().enumerate() {
                    *v = int(2 + k)?;
                }
                let mut lengths = [0.0; 10];
                for (k, l) in lengths.iter_mut().enumerate() {
                    *l = real(7 + k)?;
                }
                simplices.push(Simplex { vertices, lengths });
            }
            ("g", 5) => {
                let rec = [int(1)?, int(2)?, int(3)?, int(4)?];
                if rec[1] > 4 || rec[3] > 4 {
                    return Err(err("facet index must be 0-4"));
                }
                gluings.push((line, rec));
            }
            _ => return Err(err("unrecognised record")),
        }
    }
    let [nv, ns, ng] = header.ok_or(ComplexError::Parse {
        line: 0,
        msg: "empty input".into(),
    })?;
    if (labels.len(), simplices.len(), gluings.len()) != (nv, ns, ng) {
        return Err(ComplexError::Parse {
            line: 0,
            msg: format!(
                "header announces {nv}/{ns}/{ng} records, found {}/{}/{}",
                labels.len(),
                simplices.len(),
                gluings.len()
            ),
        });
    }
    let m = MetricComplex4::new(labels, simplices)?.with_tolerances(tol);
    let derived = gluing_records(&m);
    for (line, rec) in &gluings {
        if !derived.contains(rec) {
            return Err(ComplexError::Parse {
                line: *line,
                msg: "gluing record does not match the shared vertices".into(),
            });
        }
    }
    if gluings.len() != derived.len() {
        return Err(ComplexError::Parse {
            line: 0,
            msg: format!(
                "{} gluing records listed, {} implied by shared tetrahedra",
                gluings.len(),
                derived.len()
            ),
        });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plcomplex::product_complex;
    use crate::surface2::builtin_surface;

    fn tt() -> MetricComplex4 {
        let t = builtin_surface("tetra").unwrap();
        let b = builtin_surface("box(1,1,2)").unwrap();
        product_complex(&t, &b).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = tt();
        let text = write_complex(&m);
        let back = parse_complex(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(write_complex(&back), text);
        assert_eq!(text.lines().filter(|l| l.starts_with("g ")).count(), 5 * m.n_simplices() / 2);
    }

    #[test]
    fn tolerances_round_trip() {
        let m = tt().with_tolerances(ComplexTolerances {
            angle: 3e-8,
            length: 1e-10,
        });
        let back = parse_complex(&write_complex(&m)).unwrap();
        assert_eq!(back.tolerances, m.tolerances);
    }

    #[test]
    fn wrong_gluing_record_is_rejected() {
        let text = write_complex(&tt());
        let first_g = text.lines().find(|l| l.starts_with("g ")).unwrap().to_string();
        let mut f: Vec<usize> = first_g[2..].split(' ').map(|x| x.parse().unwrap()).collect();
        f[3] = (f[3] + 1) % 5;
        let bad = text.replacen(
            &first_g,
            &format!("g {} {} {} {}", f[0], f[1], f[2], f[3]),
            1,
        );
        assert!(matches!(parse_complex(&bad), Err(ComplexError::Parse { .. })));
    }

    #[test]
    fn boundary_face_is_rejected_by_reader() {
        let m = tt();
        let mut simplices = m.simplices().to_vec();
        simplices.pop();
        let open = MetricComplex4::new(m.labels().to_vec(), simplices).unwrap();
        let text = write_complex(&open);
        match parse_complex(&text) {
            Err(ComplexError::Invalid(r)) => assert!(!r.is_valid()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
