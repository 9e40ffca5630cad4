//! ASCII OFF reader and writer.
//!
//! ```text
//! OFF
//! V F 0
//! x y z        (V lines)
//! 3 i j k      (F lines, 0-based)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::TriangulatedSurface;
use crate::error::{Error, Result};
use crate::Point3;

impl TriangulatedSurface {
    pub fn load_off(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_off(BufReader::new(file))
    }

    pub fn save_off(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_off(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_off(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| match l {
                Ok(s) => {
                    let t = s.trim();
                    !t.is_empty() && !t.starts_with('#')
                }
                Err(_) => true,
            });
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(s))) => Ok((n, s)),
                Some((n, Err(e))) => Err(Error::Parse {
                    line: n,
                    message: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };

        let (n, header) = next_line("OFF header")?;
        if header.trim() != "OFF" {
            return Err(Error::Parse {
                line: n,
                message: format!("expected \"OFF\", found {:?}", header.trim()),
            });
        }
        let (n, counts) = next_line("vertex and face counts")?;
        let counts = parse_fields::<usize>(n, &counts)?;
        if counts.len() < 2 {
            return Err(Error::Parse {
                line: n,
                message: "expected \"V F 0\"".into(),
            });
        }
        let (nv, nf) = (counts[0], counts[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, l) = next_line("vertex")?;
            let xyz = parse_fields::<f64>(n, &l)?;
            if xyz.len() != 3 {
                return Err(Error::Parse {
                    line: n,
                    message: format!("vertex needs 3 coordinates, found {}", xyz.len()),
                });
            }
            vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (n, l) = next_line("face")?;
            let f = parse_fields::<usize>(n, &l)?;
            if f.len() != 4 || f[0] != 3 {
                return Err(Error::Parse {
                    line: n,
                    message: "only triangular faces \"3 i j k\" are supported".into(),
                });
            }
            triangles.push([f[1], f[2], f[3]]);
        }
        Self::from_parts(vertices, triangles)
    }

    /// Writes the surface; floats use the shortest representation that
    /// parses back to the same bits.
    pub fn write_off(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|e| Error::Parse {
                line,
                message: format!("{tok:?}: {e}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::MeshError;

    const OCTAHEDRON: &str = "OFF\n6 8 0\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
        3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

    #[test]
    fn reads_octahedron() {
        let s = TriangulatedSurface::read_off(OCTAHEDRON.as_bytes()).unwrap();
        assert_eq!(s.vertices().len(), 6);
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn edge_used_three_times() {
        let bad = OCTAHEDRON.replace("8 0\n", "9 0\n") + "3 0 2 5\n";
        let err = TriangulatedSurface::read_off(bad.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Mesh(MeshError::NotWatertight(_, _, 3))), "{err}");
    }

    #[test]
    fn inward_file_is_flipped() {
        let inward = OCTAHEDRON
            .lines()
            .map(|l| {
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() == 4 && f[0] == "3" {
                    format!("3 {} {} {}", f[2], f[1], f[3])
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let s = TriangulatedSurface::read_off(inward.as_bytes()).unwrap();
        assert!(s.signed_volume() > 0.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(TriangulatedSurface::read_off("PLY\n".as_bytes()).is_err());
        assert!(TriangulatedSurface::read_off("OFF\n2 1 0\n0 0 0\n".as_bytes()).is_err());
        assert!(TriangulatedSurface::read_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n".as_bytes()).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = TriangulatedSurface::load_off("/nonexistent/mesh.off").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
