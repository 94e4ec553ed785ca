//! Planar power diagrams, clipping to a disk, and the order-k hyperbolic
//! Voronoi pipeline built on top of them.
//!
//! Every cell is computed independently as the intersection of the
//! half-planes `{h_i <= h_j}` against a square cap, so cells can be built on
//! separate workers. The disk clip then turns each convex polygon into a
//! cyclic list of segments and counterclockwise arcs.

use std::f64::consts::{PI, TAU};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{subset_to_ball, AffineBisector, SubsetGenerator, WeightedSite};
use crate::model::{norm_sq, sub, KleinPoint};
use crate::par::{map_collect, Execution};

/// Half-width of the square that stands in for the unbounded plane.
pub const CAP_RADIUS: f64 = 4.0;
/// Polygons below this area are treated as empty.
pub const EMPTY_AREA: f64 = 1e-18;
/// Coefficient tolerance under which two balls define the same power function.
pub const TIE_TOL: f64 = 1e-12;
/// Relative discriminant threshold for a segment to cross the clip circle.
pub const TANGENT_TOL: f64 = 1e-12;
/// Upper bound on the number of subset generators for order k > 1.
pub const MAX_SUBSETS: u64 = 100_000;

const VERTEX_MERGE: f64 = 1e-13;
const ARC_GAP: f64 = 1e-12;

type Point = [f64; 2];

/// Oriented line bounding the half-plane `{x : <normal, x> <= offset}`,
/// with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    pub fn from_bisector(b: &AffineBisector) -> Self {
        let n = b.normal();
        let len = norm_sq(n).sqrt();
        Self {
            normal: [n[0] / len, n[1] / len],
            offset: b.offset() / len,
        }
    }

    /// Signed distance to the boundary line, positive inside.
    #[inline]
    pub fn slack(&self, x: &Point) -> f64 {
        self.offset - self.normal[0] * x[0] - self.normal[1] * x[1]
    }

    pub fn as_bisector(&self) -> AffineBisector {
        AffineBisector::new(self.normal, self.offset).expect("unit normal")
    }
}

/// The half-plane where ball `a` has smaller power than ball `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadicalHalfplane {
    /// `{x : <u,x> <= b}`; the normal points away from `a`'s cell.
    Bounded(AffineBisector),
    /// Same centers and `w_a >= w_b`: `a` never loses.
    Everything,
    /// Same centers and `w_a < w_b`: `a` never wins.
    Nothing,
}

pub fn radical_halfplane(a: &WeightedSite, b: &WeightedSite) -> RadicalHalfplane {
    let same_center = (0..2).all(|i| (a.center[i] - b.center[i]).abs() <= TIE_TOL);
    if same_center {
        return if a.weight >= b.weight {
            RadicalHalfplane::Everything
        } else {
            RadicalHalfplane::Nothing
        };
    }
    let pa = a.power_plane();
    let pb = b.power_plane();
    let normal = sub(&pa.slope, &pb.slope);
    match AffineBisector::new(normal, pb.intercept - pa.intercept) {
        Ok(h) => RadicalHalfplane::Bounded(h),
        // unreachable unless the centers differ only below f64 resolution of the slope
        Err(_) if a.weight >= b.weight => RadicalHalfplane::Everything,
        Err(_) => RadicalHalfplane::Nothing,
    }
}

/// What an edge of a power cell lies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeSupport {
    /// The artificial square that caps unbounded cells.
    Cap,
    /// The radical axis shared with another ball.
    Radical { neighbor: usize, line: HalfPlane },
}

/// One convex cell of a power diagram. Edge `i` runs from `vertices[i]` to
/// `vertices[i + 1]` (cyclically), counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCell {
    pub ball: usize,
    pub vertices: Vec<Point>,
    pub edges: Vec<EdgeSupport>,
}

impl PowerCell {
    /// Unbounded cells reach the cap, i.e. they carry ray edges.
    pub fn is_unbounded(&self) -> bool {
        self.edges.iter().any(|e| matches!(e, EdgeSupport::Cap))
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerDiagram {
    /// Generator of each input ball; cells refer to balls by index.
    pub generators: Vec<SubsetGenerator>,
    /// Non-empty cells, ordered by ball index.
    pub cells: Vec<PowerCell>,
}

fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

struct Polygon {
    vertices: Vec<Point>,
    edges: Vec<EdgeSupport>,
}

impl Polygon {
    fn cap() -> Self {
        let r = CAP_RADIUS;
        Self {
            vertices: vec![[-r, -r], [r, -r], [r, r], [-r, r]],
            edges: vec![EdgeSupport::Cap; 4],
        }
    }

    fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3 || polygon_area(&self.vertices) < EMPTY_AREA
    }

    /// Keeps the part with non-negative slack. Returns false when nothing is left.
    fn clip(&mut self, hp: &HalfPlane, support: EdgeSupport) -> bool {
        let slacks: Vec<f64> = self.vertices.iter().map(|v| hp.slack(v)).collect();
        if slacks.iter().all(|&s| s >= 0.0) {
            return true;
        }
        if slacks.iter().all(|&s| s < 0.0) {
            self.vertices.clear();
            self.edges.clear();
            return false;
        }
        let n = self.vertices.len();
        let mut vertices = Vec::with_capacity(n + 1);
        let mut edges = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (p, q) = (self.vertices[i], self.vertices[j]);
            let (sp, sq) = (slacks[i], slacks[j]);
            if sp >= 0.0 {
                vertices.push(p);
                edges.push(self.edges[i]);
                if sq < 0.0 {
                    vertices.push(lerp(p, q, sp / (sp - sq)));
                    edges.push(support);
                }
            } else if sq >= 0.0 {
                vertices.push(lerp(p, q, sp / (sp - sq)));
                edges.push(self.edges[i]);
            }
        }
        self.vertices = vertices;
        self.edges = edges;
        self.merge_close_vertices();
        !self.is_degenerate()
    }

    /// Drops zero-length edges; the later vertex keeps its outgoing edge.
    fn merge_close_vertices(&mut self) {
        let mut i = 0;
        while self.vertices.len() > 1 && i < self.vertices.len() {
            let j = (i + 1) % self.vertices.len();
            if dist(&self.vertices[i], &self.vertices[j]) < VERTEX_MERGE {
                self.vertices.remove(i);
                self.edges.remove(i);
            } else {
                i += 1;
            }
        }
    }
}

#[inline]
fn lerp(p: Point, q: Point, t: f64) -> Point {
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

#[inline]
fn dist(a: &Point, b: &Point) -> f64 {
    norm_sq(&sub(a, b)).sqrt()
}

fn same_power_function(a: &WeightedSite, b: &WeightedSite) -> bool {
    (0..2).all(|i| (a.center[i] - b.center[i]).abs() <= TIE_TOL) && (a.weight - b.weight).abs() <= TIE_TOL
}

fn build_cell(i: usize, balls: &[WeightedSite]) -> Option<PowerCell> {
    let me = &balls[i];
    let mut others: Vec<usize> = (0..balls.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| {
        let da = norm_sq(&sub(&balls[a].center, &me.center));
        let db = norm_sq(&sub(&balls[b].center, &me.center));
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let mut poly = Polygon::cap();
    for j in others {
        if same_power_function(me, &balls[j]) {
            // the lexicographically smallest generator keeps the shared cell
            if j < i {
                return None;
            }
            continue;
        }
        match radical_halfplane(me, &balls[j]) {
            RadicalHalfplane::Everything => {}
            RadicalHalfplane::Nothing => return None,
            RadicalHalfplane::Bounded(b) => {
                let line = HalfPlane::from_bisector(&b);
                if !poly.clip(&line, EdgeSupport::Radical { neighbor: j, line }) {
                    return None;
                }
            }
        }
    }
    Some(PowerCell {
        ball: i,
        vertices: poly.vertices,
        edges: poly.edges,
    })
}

/// Power diagram of arbitrary balls; ball `i` gets the generator `{i}`.
pub fn build_power_diagram(balls: &[WeightedSite]) -> PowerDiagram {
    let generators = (0..balls.len()).map(SubsetGenerator::singleton).collect();
    build_power_diagram_with(balls, generators, Execution::default())
}

/// Builds every cell independently; the result is ordered by ball index
/// regardless of `exec`.
pub fn build_power_diagram_with(
    balls: &[WeightedSite],
    generators: Vec<SubsetGenerator>,
    exec: Execution,
) -> PowerDiagram {
    assert_eq!(balls.len(), generators.len(), "one generator per ball");
    let ids: Vec<usize> = (0..balls.len()).collect();
    let cells = map_collect(&ids, exec, |&i| build_cell(i, balls))
        .into_iter()
        .flatten()
        .collect();
    PowerDiagram { generators, cells }
}

/// Ball of the Euclidean paraboloid lifting: its power function is the
/// squared Euclidean distance to `p`.
pub fn paraboloid_ball(p: Point) -> WeightedSite {
    WeightedSite { center: p, weight: 0.0 }
}

/// One boundary piece of a clipped cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Edge {
    Segment {
        from: Point,
        to: Point,
        /// Supporting line, oriented with the cell on the non-negative side.
        line: HalfPlane,
        /// Generator of the cell across this edge.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        neighbor: Option<SubsetGenerator>,
    },
    /// Counterclockwise arc of the clip circle centered at the origin,
    /// `start < end <= start + 2pi`.
    Arc { radius: f64, start: f64, end: f64 },
}

impl Edge {
    pub fn start_point(&self) -> Point {
        match *self {
            Edge::Segment { from, .. } => from,
            Edge::Arc { radius, start, .. } => [radius * start.cos(), radius * start.sin()],
        }
    }

    pub fn end_point(&self) -> Point {
        match *self {
            Edge::Segment { to, .. } => to,
            Edge::Arc { radius, end, .. } => [radius * end.cos(), radius * end.sin()],
        }
    }

    /// Contribution to the enclosed area, `1/2 * integral of (x dy - y dx)`.
    fn signed_area(&self) -> f64 {
        match *self {
            Edge::Segment { from, to, .. } => 0.5 * (from[0] * to[1] - to[0] * from[1]),
            Edge::Arc { radius, start, end } => 0.5 * radius * radius * (end - start),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCell {
    pub generator: SubsetGenerator,
    pub edges: Vec<Edge>,
}

impl ConvexCell {
    pub fn area(&self) -> f64 {
        self.edges.iter().map(Edge::signed_area).sum()
    }

    pub fn has_arc(&self) -> bool {
        self.edges.iter().any(|e| matches!(e, Edge::Arc { .. }))
    }

    /// Largest `r` such that `x` lies at least `r` inside every boundary
    /// constraint of the cell; negative outside.
    pub fn slack(&self, x: &Point) -> f64 {
        let mut best = f64::INFINITY;
        for e in &self.edges {
            match e {
                Edge::Segment { line, .. } => best = best.min(line.slack(x)),
                Edge::Arc { radius, .. } => best = best.min(radius - norm_sq(x).sqrt()),
            }
        }
        best
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.slack(x) >= -tol
    }
}

/// Cells of an order-k diagram restricted to the disk of radius `clip_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClippedDiagram {
    pub sites: Vec<KleinPoint>,
    pub order: usize,
    pub clip_radius: f64,
    pub cells: Vec<ConvexCell>,
}

impl ClippedDiagram {
    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(ConvexCell::area).sum()
    }

    /// Index of the cell containing `x` most deeply.
    pub fn locate_cell(&self, x: &Point) -> Result<usize> {
        if norm_sq(x) >= self.clip_radius * self.clip_radius {
            return Err(Error::OutsideClipDisk {
                x: x[0],
                y: x[1],
                radius: self.clip_radius,
            });
        }
        let (idx, slack) = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.slack(x)))
            .fold((usize::MAX, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if idx == usize::MAX || slack < -1e-9 {
            return Err(Error::Uncovered { x: x[0], y: x[1] });
        }
        Ok(idx)
    }
}

/// Generator of the cell containing `x`. Points on an edge may be reported
/// in either incident cell.
pub fn locate<'a>(x: &KleinPoint, diagram: &'a ClippedDiagram) -> Result<&'a SubsetGenerator> {
    let i = diagram.locate_cell(x.coords())?;
    Ok(&diagram.cells[i].generator)
}

struct Piece {
    from: Point,
    to: Point,
    support: EdgeSupport,
}

fn snap_to_circle(p: Point, radius: f64) -> Point {
    let s = radius / norm_sq(&p).sqrt();
    [p[0] * s, p[1] * s]
}

fn clip_polygon_to_disk(vertices: &[Point], supports: &[EdgeSupport], radius: f64) -> Option<Vec<(Edge, EdgeSupport)>> {
    let n = vertices.len();
    let r2 = radius * radius;
    let mut pieces = Vec::with_capacity(n);
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let d = sub(&q, &p);
        let a = norm_sq(&d);
        if a == 0.0 {
            continue;
        }
        let half_b = p[0] * d[0] + p[1] * d[1];
        let c = norm_sq(&p) - r2;
        let disc = half_b * half_b - a * c;
        if disc <= TANGENT_TOL * a * r2 {
            continue;
        }
        let root = disc.sqrt();
        let t0 = (-half_b - root) / a;
        let t1 = (-half_b + root) / a;
        let lo = t0.max(0.0);
        let hi = t1.min(1.0);
        if (hi - lo) * a.sqrt() <= VERTEX_MERGE {
            continue;
        }
        let from = if t0 > 0.0 { snap_to_circle(lerp(p, q, t0), radius) } else { p };
        let to = if t1 < 1.0 { snap_to_circle(lerp(p, q, t1), radius) } else { q };
        pieces.push(Piece {
            from,
            to,
            support: supports[i],
        });
    }

    if pieces.is_empty() {
        let origin_inside = vertices.iter().enumerate().all(|(i, p)| {
            let q = vertices[(i + 1) % n];
            // origin left of p -> q
            (q[0] - p[0]) * (-p[1]) - (q[1] - p[1]) * (-p[0]) >= 0.0
        });
        return origin_inside.then(|| {
            vec![(
                Edge::Arc {
                    radius,
                    start: 0.0,
                    end: TAU,
                },
                EdgeSupport::Cap,
            )]
        });
    }

    let m = pieces.len();
    let mut edges = Vec::with_capacity(2 * m);
    for i in 0..m {
        let cur = &pieces[i];
        let next = &pieces[(i + 1) % m];
        let line = match cur.support {
            EdgeSupport::Radical { line, .. } => line,
            EdgeSupport::Cap => cap_line(&cur.from, &cur.to),
        };
        edges.push((
            Edge::Segment {
                from: cur.from,
                to: cur.to,
                line,
                neighbor: None,
            },
            cur.support,
        ));
        if dist(&cur.to, &next.from) > ARC_GAP {
            let start = cur.to[1].atan2(cur.to[0]);
            let mut end = next.from[1].atan2(next.from[0]);
            while end <= start {
                end += TAU;
            }
            debug_assert!(end - start <= TAU + 1e-12 && start >= -PI - 1e-12);
            edges.push((Edge::Arc { radius, start, end }, EdgeSupport::Cap));
        }
    }
    Some(edges)
}

fn cap_line(from: &Point, to: &Point) -> HalfPlane {
    // interior is to the left of a counterclockwise edge
    let d = sub(to, from);
    let len = norm_sq(&d).sqrt();
    let normal = [d[1] / len, -d[0] / len];
    HalfPlane {
        normal,
        offset: normal[0] * from[0] + normal[1] * from[1],
    }
}

/// Intersects every power cell with the closed disk of radius `l`; cells
/// that miss the disk are dropped.
pub fn clip_to_disk(diagram: &PowerDiagram, l: f64) -> Result<Vec<ConvexCell>> {
    clip_to_disk_with(diagram, l, Execution::default())
}

pub fn clip_to_disk_with(diagram: &PowerDiagram, l: f64, exec: Execution) -> Result<Vec<ConvexCell>> {
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::InvalidClipRadius(l));
    }
    let clipped = map_collect(&diagram.cells, exec, |cell| {
        let edges = clip_polygon_to_disk(&cell.vertices, &cell.edges, l)?;
        let edges = edges
            .into_iter()
            .map(|(mut e, support)| {
                if let (Edge::Segment { neighbor, .. }, EdgeSupport::Radical { neighbor: j, .. }) = (&mut e, support) {
                    *neighbor = Some(diagram.generators[j].clone());
                }
                e
            })
            .collect();
        let cell = ConvexCell {
            generator: diagram.generators[cell.ball].clone(),
            edges,
        };
        (cell.area() > EMPTY_AREA).then_some(cell)
    });
    Ok(clipped.into_iter().flatten().collect())
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Rejects empty input and coinciding sites.
pub fn validate_sites(sites: &[KleinPoint]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::NoSites);
    }
    for (i, j) in (0..sites.len()).tuple_combinations() {
        let (a, b) = (sites[i].coords(), sites[j].coords());
        if (a[0] - b[0]).abs() <= TIE_TOL && (a[1] - b[1]).abs() <= TIE_TOL {
            return Err(Error::DuplicateSite { first: i, second: j });
        }
    }
    Ok(())
}

/// Order-`k` hyperbolic Voronoi diagram of Klein-model sites, clipped to the
/// disk of radius `l`.
pub fn build_hvd(sites: &[KleinPoint], k: usize, l: f64) -> Result<ClippedDiagram> {
    build_hvd_with(sites, k, l, Execution::default())
}

pub fn build_hvd_with(sites: &[KleinPoint], k: usize, l: f64, exec: Execution) -> Result<ClippedDiagram> {
    validate_sites(sites)?;
    let n = sites.len();
    if k == 0 || k > n {
        return Err(Error::InvalidOrder { k, n });
    }
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::InvalidClipRadius(l));
    }
    if k > 1 && binomial(n, k) > MAX_SUBSETS {
        return Err(Error::TooManySubsets {
            n,
            k,
            limit: MAX_SUBSETS,
        });
    }
    let generators: Vec<SubsetGenerator> = (0..n)
        .combinations(k)
        .map(|idx| SubsetGenerator::new(idx, n))
        .collect::<Result<_>>()?;
    let balls = generators
        .iter()
        .map(|g| subset_to_ball(g, sites))
        .collect::<Result<Vec<_>>>()?;
    let diagram = build_power_diagram_with(&balls, generators, exec);
    let cells = clip_to_disk_with(&diagram, l, exec)?;
    Ok(ClippedDiagram {
        sites: sites.to_vec(),
        order: k,
        clip_radius: l,
        cells,
    })
}
