//! Conforming triangle meshes.
//!
//! Triangles are stored counterclockwise. Local edge `j` of a triangle is the
//! edge opposite its local vertex `j`, i.e. the segment from vertex `j+1` to
//! vertex `j+2` (indices mod 3). Global edges are stored as `[a, b]` with
//! `a < b`; their normal is the counterclockwise rotation of the unit tangent
//! from `a` to `b`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Built-in computational domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `(0,1)²`
    UnitSquare,
    /// `(-1,1)² \ [0,1)×(-1,0]`
    LShape,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::UnitSquare => "unit_square",
            Domain::LShape => "l_shape",
        }
    }

    pub fn area(self) -> f64 {
        match self {
            Domain::UnitSquare => 1.0,
            Domain::LShape => 3.0,
        }
    }

    pub fn mesh(self) -> Mesh {
        match self {
            Domain::UnitSquare => Mesh::new(
                vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                vec![[0, 1, 2], [0, 2, 3]],
            ),
            Domain::LShape => Mesh::new(
                vec![
                    [-1.0, -1.0],
                    [0.0, -1.0],
                    [-1.0, 0.0],
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [-1.0, 1.0],
                    [0.0, 1.0],
                    [1.0, 1.0],
                ],
                vec![
                    [0, 1, 3],
                    [0, 3, 2],
                    [2, 3, 5],
                    [3, 6, 5],
                    [3, 4, 7],
                    [3, 7, 6],
                ],
            ),
        }
        .expect("built-in meshes are valid")
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unit_square" | "square" => Ok(Domain::UnitSquare),
            "l_shape" | "lshape" => Ok(Domain::LShape),
            other => Err(Error::Config(format!(
                "unknown domain '{other}' (expected unit_square or l_shape)"
            ))),
        }
    }
}

/// Mesh of a named built-in domain.
pub fn builtin_domain(name: &str) -> Result<Mesh> {
    Ok(name.parse::<Domain>()?.mesh())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_triangles: Vec<(usize, Option<usize>)>,
    triangle_edges: Vec<[usize; 3]>,
    boundary_edge: Vec<bool>,
    boundary_vertex: Vec<bool>,
    refinement_edge: Vec<u8>,
}

impl Mesh {
    /// Builds a mesh, choosing the longest edge of every triangle as its
    /// refinement edge.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        check_vertices(&vertices)?;
        check_triangles(&vertices, &triangles)?;
        let refinement_edge = triangles
            .iter()
            .map(|t| longest_local_edge(&vertices, t))
            .collect();
        Self::build(vertices, triangles, refinement_edge)
    }

    pub fn with_refinement_edges(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
    ) -> Result<Self> {
        check_vertices(&vertices)?;
        check_triangles(&vertices, &triangles)?;
        if refinement_edge.len() != triangles.len() || refinement_edge.iter().any(|&r| r > 2) {
            return Err(Error::Mesh("invalid refinement edge table".into()));
        }
        Self::build(vertices, triangles, refinement_edge)
    }

    fn build(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
    ) -> Result<Self> {
        let mut lookup: HashMap<(usize, usize), usize> =
            HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<(usize, Option<usize>)> = Vec::new();
        // direction in which the first owner traverses the edge
        let mut first_dir: Vec<bool> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());

        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for (j, slot) in te.iter_mut().enumerate() {
                let a = tri[(j + 1) % 3];
                let b = tri[(j + 2) % 3];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let e = edges.len();
                        lookup.insert(key, e);
                        edges.push([key.0, key.1]);
                        edge_triangles.push((t, None));
                        first_dir.push(a < b);
                        *slot = e;
                    }
                    Some(&e) => {
                        if edge_triangles[e].1.is_some() {
                            return Err(Error::Mesh(format!(
                                "edge ({}, {}) is shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        if first_dir[e] == (a < b) {
                            return Err(Error::Mesh(format!(
                                "triangles {} and {t} overlap across edge ({}, {})",
                                edge_triangles[e].0, key.0, key.1
                            )));
                        }
                        edge_triangles[e].1 = Some(t);
                        *slot = e;
                    }
                }
            }
            triangle_edges.push(te);
        }

        let boundary_edge: Vec<bool> = edge_triangles.iter().map(|(_, o)| o.is_none()).collect();
        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if boundary_edge[e] {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }

        let mesh = Mesh {
            vertices,
            triangles,
            edges,
            edge_triangles,
            triangle_edges,
            boundary_edge,
            boundary_vertex,
            refinement_edge,
        };
        mesh.check_hanging_nodes()?;
        Ok(mesh)
    }

    /// A hanging node shows up as a vertex lying strictly inside an edge that
    /// has only one owning triangle.
    fn check_hanging_nodes(&self) -> Result<()> {
        let mut bverts: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| self.boundary_vertex[v])
            .collect();
        bverts.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        let xs: Vec<f64> = bverts.iter().map(|&v| self.vertices[v][0]).collect();
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if !self.boundary_edge[e] {
                continue;
            }
            let pa = self.vertices[a];
            let pb = self.vertices[b];
            let len = dist(pa, pb);
            let tol = 1e-10 * len;
            let (xlo, xhi) = (pa[0].min(pb[0]) - tol, pa[0].max(pb[0]) + tol);
            let start = xs.partition_point(|&x| x < xlo);
            for k in start..xs.len() {
                if xs[k] > xhi {
                    break;
                }
                let v = bverts[k];
                if v == a || v == b {
                    continue;
                }
                let p = self.vertices[v];
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let w = [p[0] - pa[0], p[1] - pa[1]];
                let s = (w[0] * d[0] + w[1] * d[1]) / (len * len);
                let cross = (d[0] * w[1] - d[1] * w[0]).abs() / len;
                if s > 0.0 && s < 1.0 && cross <= tol {
                    return Err(Error::Mesh(format!(
                        "hanging node: vertex {v} lies on edge ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge indices of the three local edges of `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Owning triangles of edge `e`; the second is absent on the boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_triangles[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.boundary_edge.iter().filter(|&&b| b).count()
    }

    pub fn refinement_edge(&self, t: usize) -> usize {
        self.refinement_edge[t] as usize
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_points(t);
        signed_area(p0, p1, p2)
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [p0, p1, p2] = self.triangle_points(t);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    /// Diameter of triangle `t`, i.e. its longest edge.
    pub fn diameter(&self, t: usize) -> f64 {
        self.triangle_edges[t]
            .iter()
            .map(|&e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Longest edge in the mesh.
    pub fn h_max(&self) -> f64 {
        (0..self.n_edges())
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        midpoint(self.vertices[a], self.vertices[b])
    }

    /// Unit normal of edge `e` in its global orientation.
    pub fn edge_normal(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let len = dist(pa, pb);
        [-(pb[1] - pa[1]) / len, (pb[0] - pa[0]) / len]
    }

    /// +1 when the global normal of local edge `j` points out of `t`.
    pub fn edge_sign(&self, t: usize, j: usize) -> f64 {
        let tri = self.triangles[t];
        // the outward normal of a counterclockwise triangle is the clockwise
        // rotation of the tangent from local vertex j+1 to j+2
        if tri[(j + 1) % 3] < tri[(j + 2) % 3] {
            -1.0
        } else {
            1.0
        }
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| {
                let p = self.triangle_points(t);
                (0..3)
                    .map(|i| angle_at(p[i], p[(i + 1) % 3], p[(i + 2) % 3]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Re-runs the structural checks; every constructor already enforces them.
    pub fn check_conformity(&self) -> Result<()> {
        Mesh::with_refinement_edges(
            self.vertices.clone(),
            self.triangles.clone(),
            self.refinement_edge.clone(),
        )
        .map(|_| ())
    }
}

fn check_vertices(vertices: &[Point]) -> Result<()> {
    if let Some(v) = vertices
        .iter()
        .position(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(Error::Mesh(format!(
            "vertex {v} has non-finite coordinates"
        )));
    }
    Ok(())
}

fn check_triangles(vertices: &[Point], triangles: &[[usize; 3]]) -> Result<()> {
    if triangles.is_empty() {
        return Err(Error::Mesh("mesh has no triangles".into()));
    }
    let mut used = vec![false; vertices.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if v >= vertices.len() {
                return Err(Error::Mesh(format!(
                    "triangle {t} references vertex {v}, but there are only {} vertices",
                    vertices.len()
                )));
            }
            used[v] = true;
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(Error::Mesh(format!("triangle {t} repeats a vertex")));
        }
        let (p0, p1, p2) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        let area = signed_area(p0, p1, p2);
        let scale = dist(p0, p1).max(dist(p1, p2)).max(dist(p0, p2));
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::Mesh(format!("triangle {t} has zero area")));
        }
        if area < 0.0 {
            return Err(Error::Mesh(format!("triangle {t} is clockwise")));
        }
    }
    if let Some(v) = used.iter().position(|&u| !u) {
        return Err(Error::Mesh(format!(
            "vertex {v} is not used by any triangle"
        )));
    }
    Ok(())
}

fn longest_local_edge(vertices: &[Point], tri: &[usize; 3]) -> u8 {
    let mut best = 0;
    let mut best_len = -1.0;
    for j in 0..3 {
        let len = dist(vertices[tri[(j + 1) % 3]], vertices[tri[(j + 2) % 3]]);
        // ties go to the lower local index
        if len > best_len * (1.0 + 1e-12) {
            best = j as u8;
            best_len = len;
        }
    }
    best
}

pub(crate) fn signed_area(p0: Point, p1: Point, p2: Point) -> f64 {
    0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn angle_at(p: Point, q: Point, r: Point) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1]];
    let v = [r[0] - p[0], r[1] - p[1]];
    let c = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
    c.clamp(-1.0, 1.0).acos()
}

/// Red refinement: every triangle is split into four similar children through
/// its edge midpoints. Children keep the parent's refinement edge position.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.extend((0..mesh.n_edges()).map(|e| mesh.edge_midpoint(e)));

    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut refinement_edge = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, &[v0, v1, v2]) in mesh.triangles.iter().enumerate() {
        let [e0, e1, e2] = mesh.triangle_edges[t];
        let (m12, m02, m01) = (nv + e0, nv + e1, nv + e2);
        triangles.push([v0, m01, m02]);
        triangles.push([m01, v1, m12]);
        triangles.push([m02, m12, v2]);
        triangles.push([m12, m02, m01]);
        refinement_edge.extend([mesh.refinement_edge[t]; 4]);
    }
    Mesh::with_refinement_edges(vertices, triangles, refinement_edge)
        .expect("red refinement preserves conformity")
}

/// Triangles selected for refinement.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkedSet {
    indices: Vec<usize>,
}

impl MarkedSet {
    pub fn new(mut indices: Vec<usize>, n_triangles: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_triangles) {
            return Err(Error::Argument(format!(
                "marked triangle {bad} out of range ({n_triangles} triangles)"
            )));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("marked triangles must be distinct".into()));
        }
        Ok(MarkedSet { indices })
    }

    pub fn empty() -> Self {
        MarkedSet::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.indices.binary_search(&t).is_ok()
    }
}

/// Dörfler marking on squared indicators: the shortest prefix of triangles,
/// sorted by decreasing indicator (ties by index), whose squared sum reaches
/// `theta` times the total.
pub fn mark_dorfler(indicators: &[f64], theta: f64) -> Result<MarkedSet> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Argument(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    if let Some(i) = indicators
        .iter()
        .position(|&v| !(v >= 0.0) || !v.is_finite())
    {
        return Err(Error::Argument(format!(
            "indicator {i} is negative or not finite ({})",
            indicators[i]
        )));
    }
    let total: f64 = indicators.iter().map(|v| v * v).sum();
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));

    let target = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &t in &order {
        if acc >= target {
            break;
        }
        acc += indicators[t] * indicators[t];
        marked.push(t);
    }
    MarkedSet::new(marked, indicators.len())
}

/// Newest-vertex bisection with closure. All three edges of a marked
/// triangle are bisected, so it splits into four children; further
/// bisections remove all hanging nodes.
pub fn refine_adaptive(mesh: &Mesh, marked: &MarkedSet) -> Mesh {
    if marked.is_empty() {
        return mesh.clone();
    }
    let ne = mesh.n_edges();
    let mut edge_marked = vec![false; ne];
    let mut queue = VecDeque::new();
    for &t in marked.indices() {
        for e in mesh.triangle_edges[t] {
            if !edge_marked[e] {
                edge_marked[e] = true;
                queue.push_back(e);
            }
        }
    }
    // closure: a triangle with any marked edge must also bisect its refinement edge
    while let Some(e) = queue.pop_front() {
        let (t0, t1) = mesh.edge_triangles[e];
        for t in std::iter::once(t0).chain(t1) {
            let re = mesh.triangle_edges[t][mesh.refinement_edge(t)];
            if !edge_marked[re] {
                edge_marked[re] = true;
                queue.push_back(re);
            }
        }
    }

    let mut vertices = mesh.vertices.clone();
    let mut mid = vec![usize::MAX; ne];
    for e in 0..ne {
        if edge_marked[e] {
            mid[e] = vertices.len();
            vertices.push(mesh.edge_midpoint(e));
        }
    }
    let lookup: HashMap<(usize, usize), usize> = mesh
        .edges
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| ((a, b), e))
        .collect();
    let marked_mid = |a: usize, b: usize| -> Option<usize> {
        lookup
            .get(&(a.min(b), a.max(b)))
            .filter(|&&e| edge_marked[e])
            .map(|&e| mid[e])
    };

    let mut triangles = Vec::with_capacity(mesh.n_triangles() + 3 * marked.len());
    let mut refinement_edge = Vec::with_capacity(triangles.capacity());
    let mut stack = Vec::new();
    for (t, &tri) in mesh.triangles.iter().enumerate() {
        stack.push((tri, mesh.refinement_edge(t)));
        while let Some((w, r)) = stack.pop() {
            let (a, b) = (w[(r + 1) % 3], w[(r + 2) % 3]);
            match marked_mid(a, b) {
                Some(m) => {
                    let apex = w[r];
                    // children refine along the parent's remaining edges
                    stack.push(([apex, m, b], 1));
                    stack.push(([apex, a, m], 2));
                }
                None => {
                    triangles.push(w);
                    refinement_edge.push(r as u8);
                }
            }
        }
    }
    Mesh::with_refinement_edges(vertices, triangles, refinement_edge)
        .expect("newest-vertex bisection preserves conformity")
}

/// Text form: `mesh 2d v=<nv> t=<nt>`, then `x y` per vertex, then `i j k`
/// per triangle (0-based, counterclockwise).
pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "mesh 2d v={} t={}",
        mesh.n_vertices(),
        mesh.n_triangles()
    );
    for p in &mesh.vertices {
        let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn parse_mesh(text: &str, origin: &Path) -> Result<Mesh> {
    let perr = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("mesh") || parts.next() != Some("2d") {
        return Err(perr(
            hline,
            format!("expected header 'mesh 2d v=<nv> t=<nt>', got '{header}'"),
        ));
    }
    let mut count = |key: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|p| p.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| perr(hline, format!("malformed '{key}<count>' in header")))
    };
    let nv = count("v=")?;
    let nt = count("t=")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, "unexpected end of vertex list".into()))?;
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| perr(ln, format!("bad coordinate: {e}")))?;
        if vals.len() != 2 {
            return Err(perr(
                ln,
                format!("expected 2 coordinates, got {}", vals.len()),
            ));
        }
        vertices.push([vals[0], vals[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, "unexpected end of triangle list".into()))?;
        let vals: Vec<usize> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| perr(ln, format!("bad vertex index: {e}")))?;
        if vals.len() != 3 {
            return Err(perr(
                ln,
                format!("expected 3 vertex indices, got {}", vals.len()),
            ));
        }
        triangles.push([vals[0], vals[1], vals[2]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing data after triangle list".into()));
    }
    Mesh::new(vertices, triangles)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, path)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_mesh(mesh)).map_err(|e| Error::io(path, e))
}
