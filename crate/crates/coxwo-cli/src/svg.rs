//! Projective picture: normalized roots, the isotropic conic and orbit points drawn in the
//! simplex spanned by the simple roots. Rank 4 is drawn through a fixed linear projection
//! of the tetrahedron and skips the isotropic quadric.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use coxwo::imagcone::{build_k, form_f64, gram_f64, k_vertices, orbit_sample};
use coxwo::weakorder::inversion_set;
use coxwo::{CoxeterSystem, RootStore, Vector};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::commands::parse_set;
use crate::{input, CliError, Config, Output};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 580.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 4] = ["#e6550d", "#3182bd", "#31a354", "#756bb1"];

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureSpec {
    pub depth: Option<usize>,
    pub orbit_depth: Option<usize>,
    pub labels: bool,
    pub highlight: Vec<Highlight>,
}

/// Either a word (its inversion set is shaded) or a root set literal.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Highlight {
    pub word: Option<String>,
    pub set: Option<Value>,
    pub fill: Option<String>,
}

struct Canvas {
    corners: Vec<(f64, f64)>,
}

impl Canvas {
    fn new(rank: usize) -> Self {
        let w = WIDTH - 2.0 * MARGIN;
        let h = w * 3f64.sqrt() / 2.0;
        let top = (HEIGHT - h) / 2.0;
        let corners = match rank {
            2 => vec![(MARGIN, HEIGHT / 2.0), (WIDTH - MARGIN, HEIGHT / 2.0)],
            3 => vec![(MARGIN, top + h), (WIDTH - MARGIN, top + h), (WIDTH / 2.0, top)],
            // Rank 4: the tetrahedron seen from slightly above its base, i.e. the columns of
            // the projection matrix are the four corner positions below.
            _ => vec![
                (MARGIN, top + h),
                (WIDTH - MARGIN, top + h),
                (WIDTH / 2.0, top),
                (WIDTH * 0.58, top + 0.62 * h),
            ],
        };
        Canvas { corners }
    }

    /// Barycentric coordinates (summing to one) to pixels.
    fn place(&self, bary: &[f64]) -> (f64, f64) {
        let mut p = (0.0, 0.0);
        for (c, &t) in self.corners.iter().zip(bary) {
            p.0 += c.0 * t;
            p.1 += c.1 * t;
        }
        p
    }
}

fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in [pts.clone(), pts.iter().rev().copied().collect()] {
        let start = hull.len();
        for p in pass {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Points of the isotropic conic inside the simplex, one polyline per visible arc, found by
/// casting rays from an interior point of the imaginary domain.
fn conic_arcs(g: &[Vec<f64>], center: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let c = form_f64(g, center, center);
    let mut arcs: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut current: Vec<Vec<f64>> = Vec::new();
    let steps = 360;
    for k in 0..=steps {
        let theta = std::f64::consts::TAU * k as f64 / steps as f64;
        // Direction in the plane `sum = 0`, from an orthonormal basis of that plane.
        let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
        let e2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
        let d: Vec<f64> = (0..3).map(|i| theta.cos() * e1[i] + theta.sin() * e2[i]).collect();
        let a = form_f64(g, &d, &d);
        let b = form_f64(g, center, &d);
        let disc = b * b - a * c;
        let hit = (disc >= 0.0 && a.abs() > 1e-12)
            .then(|| [(-b + disc.sqrt()) / a, (-b - disc.sqrt()) / a])
            .and_then(|ts| ts.into_iter().filter(|t| *t > 0.0).reduce(f64::min))
            .map(|t| center.iter().zip(&d).map(|(p, q)| p + t * q).collect::<Vec<f64>>())
            .filter(|x| x.iter().all(|&v| v >= -1e-9));
        match hit {
            Some(x) => current.push(x),
            None if !current.is_empty() => arcs.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        arcs.push(current);
    }
    arcs
}

fn fmt_pt(out: &mut String, (x, y): (f64, f64)) {
    let _ = write!(out, "{x:.2},{y:.2} ");
}

pub fn render(sys: &CoxeterSystem, spec: &FigureSpec, config: &Config) -> Result<String, CliError> {
    let rank = sys.rank();
    if !(2..=4).contains(&rank) {
        return Err(input(format!("plot needs rank 2, 3 or 4, got {rank}")));
    }
    let depth = spec.depth.unwrap_or(config.depth.min(8));
    let orbit_depth = spec.orbit_depth.unwrap_or(config.orbit_depth.min(4));
    let canvas = Canvas::new(rank);
    let g = gram_f64(sys);
    let store = RootStore::with_depth(sys.clone(), depth);
    let k = build_k(sys);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    for (i, &a) in canvas.corners.iter().enumerate() {
        for &b in &canvas.corners[i + 1..] {
            let dash = if rank == 4 && (a == canvas.corners[3] || b == canvas.corners[3]) { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#444" stroke-width="1"{dash}/>"##,
                a.0, a.1, b.0, b.1
            );
        }
    }
    if k.point.is_some() {
        let hull = convex_hull(k_vertices(sys).iter().map(|v| canvas.place(&v.normalized_f64())).collect());
        let mut pts = String::new();
        for p in hull {
            fmt_pt(&mut pts, p);
        }
        let _ = writeln!(svg, r##"<polygon points="{}" fill="#2a9d8f" fill-opacity="0.15" stroke="none"/>"##, pts.trim_end());
    }

    for (i, h) in spec.highlight.iter().enumerate() {
        let set: Vec<Vector> = match (&h.word, &h.set) {
            (Some(w), None) => inversion_set(sys, &sys.parse_word(w)?)?.into_iter().collect(),
            (None, Some(s)) => parse_set(sys, &s.to_string())?.into_iter().collect(),
            _ => return Err(input("each highlight needs exactly one of `word` or `set`")),
        };
        let fill = h.fill.clone().unwrap_or_else(|| PALETTE[i % PALETTE.len()].to_string());
        let hull = convex_hull(set.iter().map(|v| canvas.place(&v.normalized_f64())).collect());
        let mut pts = String::new();
        for p in hull {
            fmt_pt(&mut pts, p);
        }
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="{fill}" fill-opacity="0.3" stroke="{fill}" stroke-width="1.5"/>"##,
            pts.trim_end()
        );
    }

    if let (3, Some(z)) = (rank, &k.point) {
        let center = z.normalized_f64();
        if k.singleton || form_f64(&g, &center, &center).abs() < 1e-12 {
            let (x, y) = canvas.place(&center);
            let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="#c00"/>"##);
        } else {
            for arc in conic_arcs(&g, &center) {
                let mut pts = String::new();
                for x in &arc {
                    fmt_pt(&mut pts, canvas.place(x));
                }
                let _ = writeln!(svg, r##"<polyline points="{}" fill="none" stroke="#c00" stroke-width="1.2"/>"##, pts.trim_end());
            }
        }
    }

    for r in store.up_to(depth) {
        let (x, y) = canvas.place(&r.vec.normalized_f64());
        let radius = (4.0 / (1.0 + r.depth as f64).sqrt()).max(1.0);
        let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="{radius:.2}" fill="#222"/>"##);
        if spec.labels && r.depth == 0 {
            let _ = writeln!(
                svg,
                r##"<text x="{:.2}" y="{:.2}" font-size="14" font-family="sans-serif">{}</text>"##,
                x + 6.0,
                y - 6.0,
                sys.format_word(&[(0..rank).find(|&s| r.vec == sys.simple_root(s)).unwrap_or(0)])
            );
        }
    }

    if k.point.is_some() && orbit_depth > 0 {
        let orbit = orbit_sample(sys, &k, orbit_depth)?;
        let placed: HashMap<&[usize], (f64, f64)> =
            orbit.iter().map(|p| (p.word.as_slice(), canvas.place(&p.point.normalized_f64()))).collect();
        for p in &orbit {
            let (x, y) = placed[p.word.as_slice()];
            if let Some(&(px, py)) = p.word.get(1..).and_then(|rest| placed.get(rest)) {
                let _ = writeln!(
                    svg,
                    r##"<line x1="{px:.2}" y1="{py:.2}" x2="{x:.2}" y2="{y:.2}" stroke="#2a9d8f" stroke-width="0.6" stroke-opacity="0.6"/>"##
                );
            }
            let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="#2a9d8f"/>"##);
            if spec.labels && p.word.len() <= 2 {
                let label = if p.word.is_empty() { "z".to_string() } else { sys.format_word(&p.word) };
                let _ = writeln!(
                    svg,
                    r##"<text x="{:.2}" y="{:.2}" font-size="10" font-family="sans-serif" fill="#2a9d8f">{label}</text>"##,
                    x + 4.0,
                    y + 12.0
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn plot(sys: &CoxeterSystem, out: &Path, spec: Option<&Path>, config: &Config) -> Result<Output, CliError> {
    let figure: FigureSpec = match spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", p.display())))?
        }
        None => FigureSpec::default(),
    };
    let svg = render(sys, &figure, config)?;
    std::fs::write(out, &svg).map_err(|e| input(format!("{}: {e}", out.display())))?;
    Ok(Output::new(
        json!({"svg": out.display().to_string(), "bytes": svg.len()}),
        format!("wrote {}", out.display()),
    ))
}
