//! Parametric solid construction of the enclosure: outer shell with recess
//! and voice channels, resonator cavities, and the folded amplifier channel,
//! exported as a watertight binary STL plus a JSON volume sidecar.
//!
//! Construction strategy: the outer shell's faces are triangulated on shared
//! global cut lines so openings (recess, channels) match edge-for-edge; the
//! resonator cavities and the serpentine amplifier channel are sealed
//! interior voids with inverted orientation. Every surface is emitted with
//! outward-from-solid winding, so the signed mesh volume equals the solid
//! volume directly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amplifier::CoiledUnit;
use crate::coupling::ArrayConfig;
use crate::device::{EnclosureKind, EnclosurePreset};
use crate::error::{Error, Result};

use super::stl::TriMesh;

/// Minimum material around interior voids, m.
const SHELL: f64 = 0.5e-3;
/// Depth of the device recess, m.
const RECESS_DEPTH: f64 = 3.0e-3;
/// Radius of the speaker's circular microphone recess, m.
const SPEAKER_RECESS_RADIUS: f64 = 6.0e-3;
/// Segments used to approximate circles.
const CIRCLE_SEGMENTS: usize = 64;

/// Volume accounting written next to the STL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    /// Solid volume of the exported mesh, mm^3 (divergence theorem).
    pub volume_mm3: f64,
    /// Closed-form solid volume of the same construction, mm^3.
    pub analytic_volume_mm3: f64,
    /// Air volume per resonator unit (cavity + neck), mm^3.
    pub cavity_volumes_mm3: Vec<f64>,
    pub preset: String,
}

/// Axis-aligned box; `invert` flips the winding for interior voids.
pub(crate) fn add_box(mesh: &mut TriMesh, min: [f64; 3], max: [f64; 3], invert: bool) {
    let [x0, y0, z0] = min;
    let [x1, y1, z1] = max;
    let mut quad = |a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]| {
        if invert {
            mesh.push_quad(d, c, b, a);
        } else {
            mesh.push_quad(a, b, c, d);
        }
    };
    // -z, +z
    quad([x0, y0, z0], [x0, y1, z0], [x1, y1, z0], [x1, y0, z0]);
    quad([x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]);
    // -y, +y
    quad([x0, y0, z0], [x1, y0, z0], [x1, y0, z1], [x0, y0, z1]);
    quad([x0, y1, z0], [x0, y1, z1], [x1, y1, z1], [x1, y1, z0]);
    // -x, +x
    quad([x0, y0, z0], [x0, y0, z1], [x0, y1, z1], [x0, y1, z0]);
    quad([x1, y0, z0], [x1, y1, z0], [x1, y1, z1], [x1, y0, z1]);
}

/// Sealed void of a resonator unit: cavity cylinder with a coaxial neck
/// cylinder stacked on top, one closed surface of revolution. Inverted
/// winding (interior void).
fn add_unit_void(mesh: &mut TriMesh, center_x: f64, center_y: f64, z0: f64, cavity_r: f64, cavity_h: f64, neck_r: f64, neck_h: f64) {
    let n = CIRCLE_SEGMENTS;
    let ring = |r: f64, z: f64| -> Vec<[f64; 3]> {
        (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [center_x + r * a.cos(), center_y + r * a.sin(), z]
            })
            .collect()
    };
    let z_cavity_top = z0 + cavity_h;
    let z_neck_top = z_cavity_top + neck_h;
    let bottom = ring(cavity_r, z0);
    let cavity_top = ring(cavity_r, z_cavity_top);
    let neck_bottom = ring(neck_r, z_cavity_top);
    let neck_top = ring(neck_r, z_neck_top);
    let center_bottom = [center_x, center_y, z0];
    let center_top = [center_x, center_y, z_neck_top];

    // Inverted (void) orientation: normals point into the void, i.e. the
    // enclosed signed volume is negative.
    for i in 0..n {
        let j = (i + 1) % n;
        // bottom disk (void above; outward-from-solid is +z; inverted winding
        // encloses negative volume): fan wound so the face normal is +z.
        mesh.push(center_bottom, bottom[i], bottom[j]);
        // cavity wall
        mesh.push_quad(bottom[i], cavity_top[i], cavity_top[j], bottom[j]);
        // annulus between cavity top and neck bottom (normal -z: solid above
        // outside the neck radius... solid is above the annulus? No: the
        // annulus closes the cavity from above; solid sits above it, void
        // below, so outward-from-solid is -z.)
        mesh.push_quad(cavity_top[i], neck_bottom[i], neck_bottom[j], cavity_top[j]);
        // neck wall
        mesh.push_quad(neck_bottom[i], neck_top[i], neck_top[j], neck_bottom[j]);
        // top disk (solid above, outward -z)
        mesh.push(center_top, neck_top[j], neck_top[i]);
    }
}

/// A rectilinear region in a plane: union of axis-aligned rectangles,
/// `(u0, u1, v0, v1)` each.
#[derive(Debug, Clone, Default)]
struct RectRegion {
    rects: Vec<(f64, f64, f64, f64)>,
}

impl RectRegion {
    fn push(&mut self, u0: f64, u1: f64, v0: f64, v1: f64) {
        self.rects.push((u0, u1, v0, v1));
    }

    fn cuts(&self) -> (Vec<f64>, Vec<f64>) {
        let mut us = Vec::new();
        let mut vs = Vec::new();
        for &(u0, u1, v0, v1) in &self.rects {
            us.push(u0);
            us.push(u1);
            vs.push(v0);
            vs.push(v1);
        }
        dedup_sorted(&mut us);
        dedup_sorted(&mut vs);
        (us, vs)
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        self.rects
            .iter()
            .any(|&(u0, u1, v0, v1)| u > u0 && u < u1 && v > v0 && v < v1)
    }

    fn area(&self) -> f64 {
        // Exact union area over the cut grid.
        let (us, vs) = self.cuts();
        let mut area = 0.0;
        for iu in 0..us.len().saturating_sub(1) {
            for iv in 0..vs.len().saturating_sub(1) {
                let cu = (us[iu] + us[iu + 1]) / 2.0;
                let cv = (vs[iv] + vs[iv + 1]) / 2.0;
                if self.contains(cu, cv) {
                    area += (us[iu + 1] - us[iu]) * (vs[iv + 1] - vs[iv]);
                }
            }
        }
        area
    }
}

fn dedup_sorted(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
}

/// Extrude a rectilinear region along z into a sealed interior void.
/// Walls are emitted cell-edge by cell-edge so shared edges match exactly.
fn add_extruded_void(mesh: &mut TriMesh, region: &RectRegion, z0: f64, z1: f64) {
    let (us, vs) = region.cuts();
    let nu = us.len() - 1;
    let nv = vs.len() - 1;
    let inside = |iu: isize, iv: isize| -> bool {
        if iu < 0 || iv < 0 || iu as usize >= nu || iv as usize >= nv {
            return false;
        }
        let cu = (us[iu as usize] + us[iu as usize + 1]) / 2.0;
        let cv = (vs[iv as usize] + vs[iv as usize + 1]) / 2.0;
        region.contains(cu, cv)
    };
    for iu in 0..nu {
        for iv in 0..nv {
            if !inside(iu as isize, iv as isize) {
                continue;
            }
            let (u0, u1) = (us[iu], us[iu + 1]);
            let (v0, v1) = (vs[iv], vs[iv + 1]);
            // Void orientation: bottom face normal +z (into void), top -z.
            mesh.push_quad([u0, v0, z0], [u1, v0, z0], [u1, v1, z0], [u0, v1, z0]);
            mesh.push_quad([u0, v0, z1], [u0, v1, z1], [u1, v1, z1], [u1, v0, z1]);
            // Walls where the neighbor cell is outside the region; normals
            // point into the void (away from the solid).
            if !inside(iu as isize - 1, iv as isize) {
                mesh.push_quad([u0, v0, z0], [u0, v1, z0], [u0, v1, z1], [u0, v0, z1]);
            }
            if !inside(iu as isize + 1, iv as isize) {
                mesh.push_quad([u1, v0, z0], [u1, v0, z1], [u1, v1, z1], [u1, v1, z0]);
            }
            if !inside(iu as isize, iv as isize - 1) {
                mesh.push_quad([u0, v0, z0], [u0, v0, z1], [u1, v0, z1], [u1, v0, z0]);
            }
            if !inside(iu as isize, iv as isize + 1) {
                mesh.push_quad([u0, v1, z0], [u1, v1, z0], [u1, v1, z1], [u0, v1, z1]);
            }
        }
    }
}

/// Which global axis a face is normal to.
#[derive(Clone, Copy)]
enum Plane {
    X(f64),
    Y(f64),
    Z(f64),
}

/// Rectangular face with rectangular holes, triangulated on the supplied cut
/// lines. `positive` selects the normal direction along the plane axis.
#[allow(clippy::too_many_arguments)]
fn add_face(
    mesh: &mut TriMesh,
    plane: Plane,
    u_cuts: &[f64],
    v_cuts: &[f64],
    u_range: (f64, f64),
    v_range: (f64, f64),
    holes: &[(f64, f64, f64, f64)],
    positive: bool,
) {
    let in_range = |cuts: &[f64], lo: f64, hi: f64| -> Vec<f64> {
        let mut out: Vec<f64> = cuts
            .iter()
            .copied()
            .filter(|&c| c > lo + 1e-12 && c < hi - 1e-12)
            .collect();
        out.insert(0, lo);
        out.push(hi);
        out
    };
    let us = in_range(u_cuts, u_range.0, u_range.1);
    let vs = in_range(v_cuts, v_range.0, v_range.1);
    for iu in 0..us.len() - 1 {
        for iv in 0..vs.len() - 1 {
            let cu = (us[iu] + us[iu + 1]) / 2.0;
            let cv = (vs[iv] + vs[iv + 1]) / 2.0;
            if holes
                .iter()
                .any(|&(u0, u1, v0, v1)| cu > u0 && cu < u1 && cv > v0 && cv < v1)
            {
                continue;
            }
            let (u0, u1) = (us[iu], us[iu + 1]);
            let (v0, v1) = (vs[iv], vs[iv + 1]);
            let point = |u: f64, v: f64| -> [f64; 3] {
                match plane {
                    Plane::X(x) => [x, u, v],
                    Plane::Y(y) => [u, y, v],
                    Plane::Z(z) => [u, v, z],
                }
            };
            // Winding so the normal points along +axis for `positive`. For
            // Z: (u,v) = (x,y), CCW in xy gives +z. For X: (u,v) = (y,z),
            // CCW gives +x. For Y: (u,v) = (x,z), CCW gives -y, so flip.
            let flip = match plane {
                Plane::Y(_) => positive,
                _ => !positive,
            };
            let (a, b, c, d) = (
                point(u0, v0),
                point(u1, v0),
                point(u1, v1),
                point(u0, v1),
            );
            if flip {
                mesh.push_quad(d, c, b, a);
            } else {
                mesh.push_quad(a, b, c, d);
            }
        }
    }
}

struct UnitPlacement {
    x: f64,
    y: f64,
    cavity_r: f64,
    cavity_h: f64,
    neck_r: f64,
}

/// Serpentine layout: `n_runs` straight runs of length `a` joined by risers,
/// with exact centerline length `n a' ...`; see [`serpentine_region`].
struct Serpentine {
    region: RectRegion,
    z0: f64,
    z1: f64,
}

/// Build the folded-channel region with centerline length exactly
/// `l_coiled`: runs along u of length `a`, risers of height one channel
/// width joining consecutive runs at alternating ends, where
/// `l_coiled = n (a - g) + (n - 1) 2 g`.
fn serpentine_region(
    l_coiled: f64,
    g: f64,
    u0: f64,
    v0: f64,
    u_budget: f64,
) -> Result<(RectRegion, f64, f64)> {
    let mut chosen = None;
    for n in 2..=10usize {
        let a = (l_coiled - (n as f64 - 1.0) * 2.0 * g) / n as f64 + g;
        if a < 3.0 * g {
            break;
        }
        if a <= u_budget {
            chosen = Some((n, a));
            break;
        }
    }
    let (n, a) = chosen.ok_or_else(|| {
        Error::Geometry(format!(
            "cannot fold a {:.1} mm channel into a {:.1} mm budget",
            l_coiled * 1e3,
            u_budget * 1e3
        ))
    })?;
    let mut region = RectRegion::default();
    for i in 0..n {
        let vi = v0 + 2.0 * g * i as f64;
        region.push(u0, u0 + a, vi, vi + g);
        if i + 1 < n {
            // Riser at the right end for even rows, left for odd.
            let (ru0, ru1) = if i % 2 == 0 {
                (u0 + a - g, u0 + a)
            } else {
                (u0, u0 + g)
            };
            region.push(ru0, ru1, vi + g, vi + 2.0 * g);
        }
    }
    let v_span = 2.0 * g * (n as f64 - 1.0) + g;
    Ok((region, a, v_span))
}

struct Layout {
    units: Vec<UnitPlacement>,
    unit_z0: f64,
    serpentine: Serpentine,
}

fn plan_layout(preset: &EnclosurePreset, cfg: &ArrayConfig, coiled: &CoiledUnit) -> Result<Layout> {
    let (l, w, h) = (preset.length, preset.width, preset.height);
    let spacing = cfg.spacing;
    let n = cfg.units.len();

    let check_bounds = |name: &str, lo: f64, hi: f64, max: f64| -> Result<()> {
        if lo < SHELL - 1e-12 || hi > max - SHELL + 1e-12 {
            return Err(Error::Geometry(format!(
                "{name} spans [{:.2}, {:.2}] mm outside the printable interior of {:.2} mm",
                lo * 1e3,
                hi * 1e3,
                max * 1e3
            )));
        }
        Ok(())
    };

    match preset.kind {
        EnclosureKind::Mobile => {
            // Units in a straight row along x at mid-width, below the recess.
            let unit_z0 = 2.0e-3;
            let y_c = w / 2.0;
            let max_r = cfg.units.iter().map(|u| u.cavity_radius).fold(0.0, f64::max);
            let pitch = 2.0 * max_r + spacing;
            let x_mid = l / 2.0;
            let units: Vec<UnitPlacement> = cfg
                .units
                .iter()
                .enumerate()
                .map(|(i, u)| UnitPlacement {
                    x: x_mid + (i as f64 - (n as f64 - 1.0) / 2.0) * pitch,
                    y: y_c,
                    cavity_r: u.cavity_radius,
                    cavity_h: u.h,
                    neck_r: u.r,
                })
                .collect();
            let recess_floor = h - RECESS_DEPTH;
            for (u, p) in cfg.units.iter().zip(&units) {
                check_bounds("cavity", p.x - p.cavity_r, p.x + p.cavity_r, l)?;
                check_bounds("cavity", p.y - p.cavity_r, p.y + p.cavity_r, w)?;
                let top = unit_z0 + u.h + crate::resonator::NECK_LENGTH;
                if top > recess_floor - SHELL {
                    return Err(Error::Geometry(format!(
                        "unit of depth {:.2} mm does not fit under the recess",
                        u.h * 1e3
                    )));
                }
            }
            // Serpentine in the front strip, same depth band as the cavities.
            let g = coiled.g;
            let (region, a, _v_span) =
                serpentine_region(coiled.l_coiled, g, 1.5e-3, 1.5e-3, 0.35 * l)?;
            let serp_v_max = region
                .rects
                .iter()
                .map(|r| r.3)
                .fold(f64::MIN, f64::max);
            let cavity_y_min = y_c - max_r;
            if serp_v_max + SHELL > cavity_y_min {
                return Err(Error::Geometry(
                    "folded channel collides with the cavity row".into(),
                ));
            }
            check_bounds("folded channel", 1.5e-3, 1.5e-3 + a, l)?;
            let z1 = unit_z0 + coiled.d;
            if z1 > h - RECESS_DEPTH - SHELL {
                return Err(Error::Geometry("folded channel too tall for the shell".into()));
            }
            Ok(Layout {
                units,
                unit_z0,
                serpentine: Serpentine {
                    region,
                    z0: unit_z0,
                    z1,
                },
            })
        }
        EnclosureKind::Speaker => {
            // Zigzag rows: odd-index units pushed toward mid-width so three
            // cavities fit the short axis; serpentine strip along the back.
            let unit_z0 = RECESS_DEPTH + SHELL;
            let g = coiled.g;
            let (region, a, v_span) =
                serpentine_region(coiled.l_coiled, g, 1.5e-3, 0.0, 0.55 * l)?;
            let max_r = cfg.units.iter().map(|u| u.cavity_radius).fold(0.0, f64::max);
            let serp_v0 = w - SHELL - v_span;
            let region = {
                let mut shifted = RectRegion::default();
                for &(u0, u1, v0, v1) in &region.rects {
                    shifted.push(u0, u1, v0 + serp_v0, v1 + serp_v0);
                }
                shifted
            };
            let y_lo = SHELL + 1.0e-3 + max_r;
            let y_hi = serp_v0 - SHELL - max_r;
            if y_hi < y_lo {
                return Err(Error::Geometry("no room for a zigzag cavity row".into()));
            }
            // Pitch from the tighter of: adjacent diagonal distance, or the
            // skip-one same-row distance.
            let dy = y_hi - y_lo;
            let mut pitch = 0.0f64;
            for i in 0..n.saturating_sub(1) {
                let need = cfg.units[i].cavity_radius + cfg.units[i + 1].cavity_radius + spacing;
                let p = (need * need - dy * dy).max(0.0).sqrt();
                pitch = pitch.max(p);
            }
            for i in 0..n.saturating_sub(2) {
                let need = cfg.units[i].cavity_radius + cfg.units[i + 2].cavity_radius + spacing;
                pitch = pitch.max(need / 2.0);
            }
            let x_mid = l / 2.0;
            let units: Vec<UnitPlacement> = cfg
                .units
                .iter()
                .enumerate()
                .map(|(i, u)| UnitPlacement {
                    x: x_mid + (i as f64 - (n as f64 - 1.0) / 2.0) * pitch,
                    y: if i % 2 == 0 { y_lo } else { y_hi },
                    cavity_r: u.cavity_radius,
                    cavity_h: u.h,
                    neck_r: u.r,
                })
                .collect();
            for (u, p) in cfg.units.iter().zip(&units) {
                check_bounds("cavity", p.x - p.cavity_r, p.x + p.cavity_r, l)?;
                check_bounds("cavity", p.y - p.cavity_r, p.y + p.cavity_r, w)?;
                let top = unit_z0 + u.h + crate::resonator::NECK_LENGTH;
                if top > h - SHELL {
                    return Err(Error::Geometry(format!(
                        "unit of depth {:.2} mm does not fit the speaker shell",
                        u.h * 1e3
                    )));
                }
            }
            check_bounds("folded channel", 1.5e-3, 1.5e-3 + a, l)?;
            let z1 = unit_z0 + coiled.d;
            if z1 > h - SHELL {
                return Err(Error::Geometry("folded channel too tall for the shell".into()));
            }
            Ok(Layout {
                units,
                unit_z0,
                serpentine: Serpentine {
                    region,
                    z0: unit_z0,
                    z1,
                },
            })
        }
    }
}

/// Build the device mesh and its volume accounting.
pub fn build_device_mesh(
    preset: &EnclosurePreset,
    cfg: &ArrayConfig,
    coiled: &CoiledUnit,
) -> Result<(TriMesh, GeometryReport)> {
    preset.validate()?;
    coiled.validate()?;
    let layout = plan_layout(preset, cfg, coiled)?;
    let (l, w, h) = (preset.length, preset.width, preset.height);
    let wall = preset.wall;
    let mut mesh = TriMesh::default();
    let mut analytic = l * w * h;

    match preset.kind {
        EnclosureKind::Mobile => {
            let zf = h - RECESS_DEPTH;
            let (cx0, cx1) = (l / 2.0 - preset.channel_width / 2.0, l / 2.0 + preset.channel_width / 2.0);
            let cz0 = zf + (RECESS_DEPTH - preset.channel_height) / 2.0;
            let cz1 = cz0 + preset.channel_height;
            let (rx0, rx1, ry0, ry1) = (wall, l - wall, wall, w - wall);

            // Global cut lines shared by all shell faces.
            let xs = vec![rx0, cx0, cx1, rx1];
            let ys = vec![ry0, ry1];
            let zs = vec![zf, cz0, cz1];

            // Outer faces.
            add_face(&mut mesh, Plane::Z(0.0), &xs, &ys, (0.0, l), (0.0, w), &[], false);
            add_face(&mut mesh, Plane::Z(h), &xs, &ys, (0.0, l), (0.0, w), &[(rx0, rx1, ry0, ry1)], true);
            add_face(&mut mesh, Plane::X(0.0), &ys, &zs, (0.0, w), (0.0, h), &[], false);
            add_face(&mut mesh, Plane::X(l), &ys, &zs, (0.0, w), (0.0, h), &[], true);
            let ch_hole = [(cx0, cx1, cz0, cz1)];
            add_face(&mut mesh, Plane::Y(0.0), &xs, &zs, (0.0, l), (0.0, h), &ch_hole, false);
            add_face(&mut mesh, Plane::Y(w), &xs, &zs, (0.0, l), (0.0, h), &ch_hole, true);

            // Recess pocket: floor and four walls; the y-walls carry the
            // channel openings.
            add_face(&mut mesh, Plane::Z(zf), &xs, &ys, (rx0, rx1), (ry0, ry1), &[], true);
            add_face(&mut mesh, Plane::Y(ry0), &xs, &zs, (rx0, rx1), (zf, h), &ch_hole, true);
            add_face(&mut mesh, Plane::Y(ry1), &xs, &zs, (rx0, rx1), (zf, h), &ch_hole, false);
            add_face(&mut mesh, Plane::X(rx0), &ys, &zs, (ry0, ry1), (zf, h), &[], true);
            add_face(&mut mesh, Plane::X(rx1), &ys, &zs, (ry0, ry1), (zf, h), &[], false);

            // Channel tubes: front (y in [0, wall]) and back (y in [w - wall, w]).
            for (ty0, ty1) in [(0.0, ry0), (ry1, w)] {
                // bottom (+z into tube), top (-z), x walls.
                mesh.push_quad([cx0, ty0, cz0], [cx1, ty0, cz0], [cx1, ty1, cz0], [cx0, ty1, cz0]);
                mesh.push_quad([cx0, ty0, cz1], [cx0, ty1, cz1], [cx1, ty1, cz1], [cx1, ty0, cz1]);
                mesh.push_quad([cx0, ty0, cz0], [cx0, ty1, cz0], [cx0, ty1, cz1], [cx0, ty0, cz1]);
                mesh.push_quad([cx1, ty0, cz0], [cx1, ty0, cz1], [cx1, ty1, cz1], [cx1, ty1, cz0]);
            }

            analytic -= (rx1 - rx0) * (ry1 - ry0) * RECESS_DEPTH;
            analytic -= 2.0 * preset.channel_width * preset.channel_height * wall;
        }
        EnclosureKind::Speaker => {
            // Square microphone recess opening downward, sized to clear the
            // nominal microphone circle.
            let half = SPEAKER_RECESS_RADIUS + 2.0e-3;
            let (cx, cy) = (l / 2.0, w / 2.0);
            let (rx0, rx1, ry0, ry1) = (cx - half, cx + half, cy - half, cy + half);
            let xs = vec![rx0, rx1];
            let ys = vec![ry0, ry1];
            let zs = vec![RECESS_DEPTH];

            add_face(&mut mesh, Plane::Z(0.0), &xs, &ys, (0.0, l), (0.0, w), &[(rx0, rx1, ry0, ry1)], false);
            add_face(&mut mesh, Plane::Z(h), &xs, &ys, (0.0, l), (0.0, w), &[], true);
            add_face(&mut mesh, Plane::X(0.0), &ys, &zs, (0.0, w), (0.0, h), &[], false);
            add_face(&mut mesh, Plane::X(l), &ys, &zs, (0.0, w), (0.0, h), &[], true);
            add_face(&mut mesh, Plane::Y(0.0), &xs, &zs, (0.0, l), (0.0, h), &[], false);
            add_face(&mut mesh, Plane::Y(w), &xs, &zs, (0.0, l), (0.0, h), &[], true);

            // Recess ceiling (solid above, outward -z) and four walls.
            add_face(&mut mesh, Plane::Z(RECESS_DEPTH), &xs, &ys, (rx0, rx1), (ry0, ry1), &[], false);
            add_face(&mut mesh, Plane::Y(ry0), &xs, &zs, (rx0, rx1), (0.0, RECESS_DEPTH), &[], true);
            add_face(&mut mesh, Plane::Y(ry1), &xs, &zs, (rx0, rx1), (0.0, RECESS_DEPTH), &[], false);
            add_face(&mut mesh, Plane::X(rx0), &ys, &zs, (ry0, ry1), (0.0, RECESS_DEPTH), &[], true);
            add_face(&mut mesh, Plane::X(rx1), &ys, &zs, (ry0, ry1), (0.0, RECESS_DEPTH), &[], false);

            analytic -= (rx1 - rx0) * (ry1 - ry0) * RECESS_DEPTH;
        }
    }

    // Resonator voids.
    let mut cavity_volumes = Vec::new();
    for p in &layout.units {
        add_unit_void(
            &mut mesh,
            p.x,
            p.y,
            layout.unit_z0,
            p.cavity_r,
            p.cavity_h,
            p.neck_r,
            crate::resonator::NECK_LENGTH,
        );
        let nseg = CIRCLE_SEGMENTS as f64;
        let poly = |radius: f64| 0.5 * nseg * radius * radius * (2.0 * std::f64::consts::PI / nseg).sin();
        analytic -= poly(p.cavity_r) * p.cavity_h + poly(p.neck_r) * crate::resonator::NECK_LENGTH;
        // Reported air volumes use the exact circular sections.
        cavity_volumes.push(
            (std::f64::consts::PI * p.cavity_r * p.cavity_r * p.cavity_h
                + std::f64::consts::PI * p.neck_r * p.neck_r * crate::resonator::NECK_LENGTH)
                * 1e9,
        );
    }

    // Folded amplifier channel.
    add_extruded_void(
        &mut mesh,
        &layout.serpentine.region,
        layout.serpentine.z0,
        layout.serpentine.z1,
    );
    analytic -=
        layout.serpentine.region.area() * (layout.serpentine.z1 - layout.serpentine.z0);

    mesh.check_watertight()?;
    let volume = mesh.signed_volume();
    if volume <= 0.0 {
        return Err(Error::Geometry("mesh volume is non-positive".into()));
    }
    let report = GeometryReport {
        volume_mm3: volume * 1e9,
        analytic_volume_mm3: analytic * 1e9,
        cavity_volumes_mm3: cavity_volumes,
        preset: match preset.kind {
            EnclosureKind::Mobile => "mobile".into(),
            EnclosureKind::Speaker => "speaker".into(),
        },
    };
    Ok((mesh, report))
}

/// Export the device as binary STL plus a JSON sidecar with the volume
/// accounting. The sidecar takes the STL path with a `.json` extension.
pub fn export_geometry(
    preset: &EnclosurePreset,
    cfg: &ArrayConfig,
    coiled: &CoiledUnit,
    path: &Path,
) -> Result<GeometryReport> {
    let (mesh, report) = build_device_mesh(preset, cfg, coiled)?;
    mesh.write_stl_file(path)?;
    let sidecar = path.with_extension("json");
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Input(e.to_string()))?;
    std::fs::write(sidecar, json)?;
    Ok(report)
}
