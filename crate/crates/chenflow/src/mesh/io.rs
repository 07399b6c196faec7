//! Mesh file I/O.
//!
//! Plain OBJ subset for `N = 3`: `v x y z`, `f i j k` (1-based) and `#`
//! comments, triangles only. For `N ≠ 3` an extended ASCII format is used:
//! a header line `ndim N` followed by `v c1 … cN` and `f i j k` records.
//! Floats are printed with 17 significant digits so a round trip reproduces
//! positions exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::MeshError;
use crate::mesh::ImmersedMesh;

/// Read a mesh from `path`, auto-detecting the extended `ndim` header.
pub fn load_obj<P: AsRef<Path>>(path: P) -> Result<ImmersedMesh, MeshError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut dim: Option<usize> = None;
    let mut positions: Vec<f64> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = match line.split('#').next() {
            Some(c) => c.trim(),
            None => "",
        };
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let tag = tokens.next().unwrap();
        match tag {
            "ndim" => {
                let n: usize = parse_token(tokens.next(), lineno, "ndim value")?;
                if n < 3 {
                    return Err(MeshError::ParseError {
                        line: lineno,
                        message: format!("ndim must be at least 3, got {n}"),
                    });
                }
                if !positions.is_empty() {
                    return Err(MeshError::ParseError {
                        line: lineno,
                        message: "ndim header must precede vertex records".into(),
                    });
                }
                dim = Some(n);
            }
            "v" => {
                let coords: Result<Vec<f64>, MeshError> = tokens
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| MeshError::ParseError {
                            line: lineno,
                            message: format!("bad coordinate `{t}`"),
                        })
                    })
                    .collect();
                let coords = coords?;
                match dim {
                    Some(n) if coords.len() != n => {
                        return Err(MeshError::ParseError {
                            line: lineno,
                            message: format!("expected {n} coordinates, got {}", coords.len()),
                        });
                    }
                    None if coords.len() != 3 => {
                        return Err(MeshError::UnsupportedDimension {
                            line: lineno,
                            found: coords.len(),
                        });
                    }
                    _ => {}
                }
                positions.extend_from_slice(&coords);
            }
            "f" => {
                let idx: Result<Vec<usize>, MeshError> = tokens
                    .map(|t| {
                        t.parse::<usize>()
                            .ok()
                            .filter(|&i| i >= 1)
                            .ok_or_else(|| MeshError::ParseError {
                                line: lineno,
                                message: format!("bad face index `{t}` (1-based integers only)"),
                            })
                    })
                    .collect();
                let idx = idx?;
                if idx.len() != 3 {
                    return Err(MeshError::ParseError {
                        line: lineno,
                        message: format!("faces must be triangles, got {} indices", idx.len()),
                    });
                }
                faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            other => {
                return Err(MeshError::ParseError {
                    line: lineno,
                    message: format!("unsupported record `{other}`"),
                });
            }
        }
    }
    ImmersedMesh::new(dim.unwrap_or(3), positions, faces)
}

/// Write a mesh to `path`; plain OBJ for `N = 3`, the extended format
/// otherwise.
pub fn save_obj<P: AsRef<Path>>(mesh: &ImmersedMesh, path: P) -> Result<(), MeshError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let dim = mesh.ambient_dim();
    if dim != 3 {
        writeln!(w, "ndim {dim}")?;
    }
    for p in mesh.positions().chunks_exact(dim) {
        write!(w, "v")?;
        for &c in p {
            write!(w, " {c:.16e}")?;
        }
        writeln!(w)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_token<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, MeshError> {
    token
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| MeshError::ParseError {
            line,
            message: format!("missing or invalid {what}"),
        })
}
