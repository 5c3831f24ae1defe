//! Planar domains and their uniform cell-centre quadrature grids.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integral::KernelWeights;

/// Bounded, simply connected model domains with exact boundary parametrisations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

/// A domain together with the lattice resolution, e.g.
/// `{"kind":"disk","center":[0,0],"radius":1.0,"n":64}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub domain: Domain,
    pub n: usize,
}

impl DomainSpec {
    pub fn new(domain: Domain, n: usize) -> Self {
        Self { domain, n }
    }
}

/// One boundary quadrature sample. `param` is the angle for disks and the
/// counter-clockwise arc length from `(x0, y0)` for rectangles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub point: Complex64,
    pub tangent: Complex64,
    pub weight: f64,
    pub param: f64,
}

impl Domain {
    pub fn unit_disk() -> Self {
        Self::disk(0.0, 0.0, 1.0)
    }

    pub fn disk(cx: f64, cy: f64, radius: f64) -> Self {
        Self::Disk { center: [cx, cy], radius }
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self::Rectangle { x0, x1, y0, y1 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Disk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())) {
                    return Err(Error::DegenerateDomain(format!("disk radius {radius}")));
                }
            }
            Domain::Rectangle { x0, x1, y0, y1 } => {
                let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0;
                if !ok {
                    return Err(Error::DegenerateDomain(format!(
                        "rectangle [{x0}, {x1}] x [{y0}, {y1}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Domain::Disk { center, .. } => Complex64::new(center[0], center[1]),
            Domain::Rectangle { x0, x1, y0, y1 } => Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => radius - (z - self.center()).norm(),
            Domain::Rectangle { x0, x1, y0, y1 } => {
                (z.re - x0).min(x1 - z.re).min(z.im - y0).min(y1 - z.im)
            }
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.distance_to_boundary(z) > 0.0
    }

    /// Both model domains are convex, so they are star-shaped with respect
    /// to the origin exactly when the origin is interior.
    pub fn star_shaped_at_origin(&self) -> bool {
        self.contains(Complex64::new(0.0, 0.0))
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => PI * radius * radius,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0).hypot(y1 - y0),
        }
    }

    /// Side of the square lattice that covers the domain.
    pub fn extent(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0).max(y1 - y0),
        }
    }

    /// Period of the boundary parameter.
    pub fn param_period(&self) -> f64 {
        match *self {
            Domain::Disk { .. } => 2.0 * PI,
            Domain::Rectangle { x0, x1, y0, y1 } => 2.0 * ((x1 - x0) + (y1 - y0)),
        }
    }

    /// Boundary point and unit tangent at parameter `s`.
    pub fn boundary_at(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Domain::Disk { radius, .. } => {
                let e = Complex64::from_polar(1.0, s);
                (self.center() + e * radius, Complex64::i() * e)
            }
            Domain::Rectangle { x0, x1, y0, y1 } => {
                let (w, h) = (x1 - x0, y1 - y0);
                let s = s.rem_euclid(2.0 * (w + h));
                if s < w {
                    (Complex64::new(x0 + s, y0), Complex64::new(1.0, 0.0))
                } else if s < w + h {
                    (Complex64::new(x1, y0 + (s - w)), Complex64::new(0.0, 1.0))
                } else if s < 2.0 * w + h {
                    (Complex64::new(x1 - (s - w - h), y1), Complex64::new(-1.0, 0.0))
                } else {
                    (Complex64::new(x0, y1 - (s - 2.0 * w - h)), Complex64::new(0.0, -1.0))
                }
            }
        }
    }

    /// Boundary parameter of the boundary point closest to `z`.
    pub fn param_of(&self, z: Complex64) -> f64 {
        match *self {
            Domain::Disk { .. } => (z - self.center()).arg().rem_euclid(2.0 * PI),
            Domain::Rectangle { x0, x1, y0, y1 } => {
                let (w, h) = (x1 - x0, y1 - y0);
                let x = z.re.clamp(x0, x1);
                let y = z.im.clamp(y0, y1);
                let sides = [
                    ((z.im - y0).abs(), x - x0),
                    ((x1 - z.re).abs(), w + (y - y0)),
                    ((y1 - z.im).abs(), w + h + (x1 - x)),
                    ((z.re - x0).abs(), 2.0 * w + h + (y1 - y)),
                ];
                sides
                    .iter()
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|s| s.1)
                    .unwrap_or(0.0)
            }
        }
    }

    /// Distance from interior point `p` to the boundary along unit direction `dir`.
    pub fn ray_exit(&self, p: Complex64, dir: Complex64) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => {
                let q = p - self.center();
                let b = q.re * dir.re + q.im * dir.im;
                let c = q.norm_sqr() - radius * radius;
                -b + (b * b - c).max(0.0).sqrt()
            }
            Domain::Rectangle { x0, x1, y0, y1 } => {
                let mut t = f64::INFINITY;
                if dir.re > 0.0 {
                    t = t.min((x1 - p.re) / dir.re);
                } else if dir.re < 0.0 {
                    t = t.min((x0 - p.re) / dir.re);
                }
                if dir.im > 0.0 {
                    t = t.min((y1 - p.im) / dir.im);
                } else if dir.im < 0.0 {
                    t = t.min((y0 - p.im) / dir.im);
                }
                t.max(0.0)
            }
        }
    }

    /// `count` counter-clockwise samples with equal arc weights. Rectangles use
    /// cell midpoints along the perimeter, so no sample sits on a corner.
    pub fn boundary_samples(&self, count: usize) -> Vec<BoundaryPoint> {
        let period = self.param_period();
        let arc = match *self {
            Domain::Disk { radius, .. } => 2.0 * PI * radius,
            Domain::Rectangle { .. } => period,
        };
        let offset = match self {
            Domain::Disk { .. } => 0.0,
            Domain::Rectangle { .. } => 0.5,
        };
        (0..count)
            .map(|k| {
                let param = (k as f64 + offset) * period / count as f64;
                let (point, tangent) = self.boundary_at(param);
                BoundaryPoint {
                    point,
                    tangent,
                    weight: arc / count as f64,
                    param,
                }
            })
            .collect()
    }
}

const NONE: u32 = u32::MAX;

/// Neighbour slots in [`Grid::neighbors`].
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

/// Uniform cell-centre grid over a domain.
///
/// The covering square of side `L = extent` is split into `n × n` cells of
/// side `h = L/n`; a cell contributes a node when its centre lies inside the
/// domain.
#[derive(Debug)]
pub struct Grid {
    spec: DomainSpec,
    h: f64,
    corner: Complex64,
    nodes: Vec<Complex64>,
    lattice: Vec<[u32; 2]>,
    index: Vec<u32>,
    neighbors: Vec<[u32; 4]>,
    distance: Vec<f64>,
    stencil: Vec<bool>,
    safe: Vec<bool>,
    boundary: Vec<BoundaryPoint>,
    kernel: OnceLock<KernelWeights>,
}

impl Grid {
    pub fn build(domain: Domain, n: usize) -> Result<Self> {
        Self::from_spec(DomainSpec::new(domain, n))
    }

    pub fn from_spec(spec: DomainSpec) -> Result<Self> {
        spec.domain.validate()?;
        let n = spec.n;
        if n < 8 {
            return Err(Error::InvalidArgument(format!("grid resolution n = {n} is below 8")));
        }
        let domain = &spec.domain;
        let extent = domain.extent();
        let h = extent / n as f64;
        let corner = domain.center() - Complex64::new(0.5 * extent, 0.5 * extent);

        let mut nodes = Vec::new();
        let mut lattice = Vec::new();
        let mut index = vec![NONE; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let z = corner + Complex64::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
                if domain.contains(z) {
                    index[iy * n + ix] = nodes.len() as u32;
                    nodes.push(z);
                    lattice.push([ix as u32, iy as u32]);
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::DegenerateDomain(format!("no cell centre inside at n = {n}")));
        }

        let at = |ix: i64, iy: i64| -> u32 {
            if ix < 0 || iy < 0 || ix >= n as i64 || iy >= n as i64 {
                NONE
            } else {
                index[iy as usize * n + ix as usize]
            }
        };
        let neighbors: Vec<[u32; 4]> = lattice
            .iter()
            .map(|&[ix, iy]| {
                let (ix, iy) = (ix as i64, iy as i64);
                [at(ix + 1, iy), at(ix - 1, iy), at(ix, iy + 1), at(ix, iy - 1)]
            })
            .collect();
        let distance: Vec<f64> = nodes.iter().map(|&z| domain.distance_to_boundary(z)).collect();
        let stencil: Vec<bool> = neighbors.iter().map(|nb| nb.iter().all(|&k| k != NONE)).collect();
        let safe = stencil
            .iter()
            .zip(&distance)
            .map(|(&s, &d)| s && d >= 2.0 * h)
            .collect();
        let boundary = domain.boundary_samples((8 * n).max(256));

        Ok(Self {
            spec,
            h,
            corner,
            nodes,
            lattice,
            index,
            neighbors,
            distance,
            stencil,
            safe,
            boundary,
            kernel: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn domain(&self) -> &Domain {
        &self.spec.domain
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> Complex64 {
        self.nodes[k]
    }

    /// Lattice coordinates `[ix, iy]` of every node.
    pub fn lattice(&self) -> &[[u32; 2]] {
        &self.lattice
    }

    /// Lower-left corner of the covering square.
    pub fn corner(&self) -> Complex64 {
        self.corner
    }

    pub fn node_at(&self, ix: i64, iy: i64) -> Option<usize> {
        let n = self.spec.n as i64;
        if ix < 0 || iy < 0 || ix >= n || iy >= n {
            return None;
        }
        let k = self.index[(iy * n + ix) as usize];
        (k != NONE).then_some(k as usize)
    }

    /// Neighbour of node `k` in direction `dir` (one of [`EAST`], [`WEST`], [`NORTH`], [`SOUTH`]).
    pub fn neighbor(&self, k: usize, dir: usize) -> Option<usize> {
        let m = self.neighbors[k][dir];
        (m != NONE).then_some(m as usize)
    }

    pub fn distance_to_boundary(&self, k: usize) -> f64 {
        self.distance[k]
    }

    /// Node has all four lattice neighbours.
    pub fn is_stencil_interior(&self, k: usize) -> bool {
        self.stencil[k]
    }

    /// Node has a full stencil and lies at least `2h` from the boundary.
    /// All pass/fail statistics are taken over these nodes.
    pub fn is_safe_interior(&self, k: usize) -> bool {
        self.safe[k]
    }

    pub fn safe_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.safe[k])
    }

    pub fn boundary(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    /// Structural identity: same domain and resolution.
    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || self.spec == other.spec
    }

    pub(crate) fn kernel_weights(&self) -> &KernelWeights {
        self.kernel.get_or_init(|| KernelWeights::new(self))
    }

    /// Index of the node whose cell contains `p`.
    pub fn locate(&self, p: Complex64) -> Result<usize> {
        let q = (p - self.corner) / self.h;
        let n = self.spec.n as i64;
        let clamp = |v: f64| -> i64 {
            let i = v.floor() as i64;
            // A point on the outer edge of the last cell belongs to that cell.
            if i == n && v == n as f64 {
                n - 1
            } else {
                i
            }
        };
        if !(q.re.is_finite() && q.im.is_finite()) {
            return Err(Error::NodeNotOnGrid(p));
        }
        self.node_at(clamp(q.re), clamp(q.im)).ok_or(Error::NodeNotOnGrid(p))
    }

    /// Nearest node to `p` by Euclidean distance.
    pub fn nearest_node(&self, p: Complex64) -> usize {
        if let Ok(k) = self.locate(p) {
            return k;
        }
        let q = (p - self.corner) / self.h - Complex64::new(0.5, 0.5);
        let (cx, cy) = (q.re.round() as i64, q.im.round() as i64);
        for radius in 1..=(2 * self.spec.n as i64) {
            let mut best: Option<(f64, usize)> = None;
            for iy in cy - radius..=cy + radius {
                for ix in cx - radius..=cx + radius {
                    if let Some(k) = self.node_at(ix, iy) {
                        let d = (self.nodes[k] - p).norm();
                        if best.map_or(true, |(bd, _)| d < bd) {
                            best = Some((d, k));
                        }
                    }
                }
            }
            if let Some((_, k)) = best {
                return k;
            }
        }
        0
    }

    /// Interpolates node values at an arbitrary point: bilinear when the four
    /// surrounding nodes exist, affine through three of them when one is
    /// missing, and the nearest node otherwise.
    pub fn interpolate(&self, values: &[Complex64], p: Complex64) -> Complex64 {
        let q = (p - self.corner) / self.h - Complex64::new(0.5, 0.5);
        let (fx, fy) = (q.re.floor(), q.im.floor());
        let (tx, ty) = (q.re - fx, q.im - fy);
        let (ix, iy) = (fx as i64, fy as i64);
        let corners = [
            (0.0, 0.0, self.node_at(ix, iy)),
            (1.0, 0.0, self.node_at(ix + 1, iy)),
            (0.0, 1.0, self.node_at(ix, iy + 1)),
            (1.0, 1.0, self.node_at(ix + 1, iy + 1)),
        ];
        let present = corners.iter().filter(|c| c.2.is_some()).count();
        match present {
            4 => {
                let v = |i: usize| values[corners[i].2.unwrap()];
                v(0) * ((1.0 - tx) * (1.0 - ty))
                    + v(1) * (tx * (1.0 - ty))
                    + v(2) * ((1.0 - tx) * ty)
                    + v(3) * (tx * ty)
            }
            3 => {
                // Affine through the three available corners; they always form a
                // right triangle with legs along the lattice axes.
                let pts: Vec<(f64, f64, Complex64)> = corners
                    .iter()
                    .filter_map(|&(x, y, k)| k.map(|k| (x, y, values[k])))
                    .collect();
                let (x0, y0, v0) = pts[0];
                let (x1, y1, v1) = pts[1];
                let (x2, y2, v2) = pts[2];
                let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
                let a = ((tx - x0) * (y2 - y0) - (x2 - x0) * (ty - y0)) / det;
                let b = ((x1 - x0) * (ty - y0) - (tx - x0) * (y1 - y0)) / det;
                v0 + (v1 - v0) * a + (v2 - v0) * b
            }
            _ => values[self.nearest_node(p)],
        }
    }
}
