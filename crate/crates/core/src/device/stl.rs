//! Triangle soup with watertightness checking and binary STL output.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One triangle, vertices in meters, counter-clockwise seen from outside.
pub type Triangle = [[f64; 3]; 3];

#[derive(Debug, Clone, Default)]
pub struct TriMesh {
    pub triangles: Vec<Triangle>,
}

/// Vertex key on a 1 nm lattice; all construction paths share exact
/// coordinates, so quantization only guards against -0.0 vs 0.0.
fn key(v: &[f64; 3]) -> (i64, i64, i64) {
    let q = |x: f64| (x * 1e9).round() as i64;
    (q(v[0]), q(v[1]), q(v[2]))
}

impl TriMesh {
    pub fn push(&mut self, a: [f64; 3], b: [f64; 3], c: [f64; 3]) {
        self.triangles.push([a, b, c]);
    }

    /// Quad split into two triangles; vertices in boundary order.
    pub fn push_quad(&mut self, a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) {
        self.push(a, b, c);
        self.push(a, c, d);
    }

    /// Signed volume via the divergence theorem; positive for outward-wound
    /// closed surfaces.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t;
                (a[0] * (b[1] * c[2] - b[2] * c[1])
                    + a[1] * (b[2] * c[0] - b[0] * c[2])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            })
            .sum()
    }

    /// Every undirected edge must be shared by exactly two triangles, and the
    /// two uses must run in opposite directions (consistent orientation).
    pub fn check_watertight(&self) -> Result<()> {
        use std::collections::HashMap;
        let mut directed: HashMap<((i64, i64, i64), (i64, i64, i64)), usize> = HashMap::new();
        for t in &self.triangles {
            let ks = [key(&t[0]), key(&t[1]), key(&t[2])];
            if ks[0] == ks[1] || ks[1] == ks[2] || ks[0] == ks[2] {
                return Err(Error::Geometry("degenerate triangle".into()));
            }
            for i in 0..3 {
                *directed.entry((ks[i], ks[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 {
                return Err(Error::Geometry(format!(
                    "directed edge {a:?}->{b:?} used {count} times"
                )));
            }
            if directed.get(&(b, a)) != Some(&1) {
                return Err(Error::Geometry(format!(
                    "edge {a:?}-{b:?} lacks an opposite-direction partner"
                )));
            }
        }
        Ok(())
    }

    /// Binary STL: 80-byte header, little-endian u32 count, 50-byte records.
    /// Coordinates are emitted in millimeters.
    pub fn write_binary_stl<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = [0u8; 80];
        let tag = b"parametric acoustic enclosure export";
        header[..tag.len()].copy_from_slice(tag);
        w.write_all(&header)?;
        w.write_all(&(self.triangles.len() as u32).to_le_bytes())?;
        for t in &self.triangles {
            let [a, b, c] = t;
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let n = if len > 0.0 {
                [n[0] / len, n[1] / len, n[2] / len]
            } else {
                [0.0, 0.0, 0.0]
            };
            for x in n {
                w.write_all(&(x as f32).to_le_bytes())?;
            }
            for vtx in t {
                for x in vtx {
                    w.write_all(&((x * 1e3) as f32).to_le_bytes())?;
                }
            }
            w.write_all(&0u16.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn write_stl_file(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        self.write_binary_stl(&mut file)
    }
}
