//! Conforming triangulations of polygonal domains.
//!
//! Triangles are stored counterclockwise with 0-based vertex indices. Local
//! edge `l` of a triangle is the edge opposite its local vertex `l`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::bernstein::barycentric;
use crate::{Error, Point, Result};

/// Absolute tolerance on barycentric coordinates accepted by [`Triangulation::locate_point`].
pub const TOL_LOC: f64 = 1e-12;

/// An edge shared by two triangles. `left` is always the smaller triangle index.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorEdge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: usize,
    pub left_local: usize,
    pub right_local: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    pub local: usize,
}

#[derive(Debug)]
pub struct Triangulation {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    interior_edges: Vec<InteriorEdge>,
    boundary_edges: Vec<BoundaryEdge>,
    h: f64,
    shape_constant: f64,
    locator: OnceLock<Locator>,
}

impl Clone for Triangulation {
    fn clone(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            interior_edges: self.interior_edges.clone(),
            boundary_edges: self.boundary_edges.clone(),
            h: self.h,
            shape_constant: self.shape_constant,
            locator: OnceLock::new(),
        }
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Triangulation {
    /// Validates the raw vertex/triangle lists and builds edge adjacency.
    ///
    /// Clockwise triangles are reordered to counterclockwise.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        let mut tris = Vec::with_capacity(triangles.len());
        let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
        for (t, &tri) in triangles.iter().enumerate() {
            for &v in &tri {
                if v >= nv {
                    return Err(Error::IndexOutOfRange { triangle: t, index: v, count: nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::RepeatedVertex { triangle: t });
            }
            let mut key = tri;
            key.sort_unstable();
            if let Some(&other) = seen.get(&key) {
                return Err(Error::DuplicateTriangle { triangle: t, other });
            }
            seen.insert(key, t);

            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = signed_area(a, b, c);
            let longest = dist(a, b).max(dist(b, c)).max(dist(c, a));
            if area.abs() <= 1e-14 * longest * longest || !area.is_finite() {
                return Err(Error::ZeroArea { triangle: t });
            }
            tris.push(if area > 0.0 { tri } else { [tri[0], tri[2], tri[1]] });
        }

        // Directed edges: each undirected edge may appear at most once per direction.
        let mut edge_map: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut owners: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for l in 0..3 {
                let a = tri[(l + 1) % 3];
                let b = tri[(l + 2) % 3];
                if edge_map.insert((a, b), (t, l)).is_some() {
                    return Err(Error::NonManifoldEdge(a.min(b), a.max(b)));
                }
                let key = (a.min(b), a.max(b));
                let entry = owners.entry(key).or_default();
                if entry.is_empty() {
                    order.push(key);
                }
                entry.push((t, l));
            }
        }

        let mut interior_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        for key in order {
            let own = &owners[&key];
            match own.as_slice() {
                [(t, l)] => boundary_edges.push(BoundaryEdge { vertices: [key.0, key.1], triangle: *t, local: *l }),
                [(t1, l1), (t2, l2)] => {
                    let ((left, left_local), (right, right_local)) =
                        if t1 < t2 { ((*t1, *l1), (*t2, *l2)) } else { ((*t2, *l2), (*t1, *l1)) };
                    interior_edges.push(InteriorEdge {
                        vertices: [key.0, key.1],
                        left,
                        right,
                        left_local,
                        right_local,
                    });
                }
                _ => return Err(Error::NonManifoldEdge(key.0, key.1)),
            }
        }

        // A vertex lying strictly inside a boundary edge means a neighbour was
        // refined without this triangle.
        for be in &boundary_edges {
            let a = vertices[be.vertices[0]];
            let b = vertices[be.vertices[1]];
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            for (v, &p) in vertices.iter().enumerate() {
                if v == be.vertices[0] || v == be.vertices[1] {
                    continue;
                }
                let s = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
                if s <= 1e-12 || s >= 1.0 - 1e-12 {
                    continue;
                }
                let cross = (p[0] - a[0]) * (b[1] - a[1]) - (p[1] - a[1]) * (b[0] - a[0]);
                if cross.abs() <= 1e-12 * len2 {
                    return Err(Error::HangingVertex { vertex: v, triangle: be.triangle });
                }
            }
        }

        let mut h: f64 = 0.0;
        let mut shape_constant: f64 = 0.0;
        for tri in &tris {
            let [a, b, c] = tri.map(|v| vertices[v]);
            let (e0, e1, e2) = (dist(b, c), dist(c, a), dist(a, b));
            let longest = e0.max(e1).max(e2);
            let inradius = 2.0 * signed_area(a, b, c) / (e0 + e1 + e2);
            h = h.max(longest);
            shape_constant = shape_constant.max(longest / inradius);
        }

        Ok(Self {
            vertices,
            triangles: tris,
            interior_edges,
            boundary_edges,
            h,
            shape_constant,
            locator: OnceLock::new(),
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn interior_edges(&self) -> &[InteriorEdge] {
        &self.interior_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Longest edge length over the mesh.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// max over triangles of (longest edge) / (inradius).
    pub fn shape_constant(&self) -> f64 {
        self.shape_constant
    }

    /// Vertex coordinates of triangle `t` in stored (counterclockwise) order.
    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in &self.vertices {
            bb[0] = bb[0].min(p[0]);
            bb[1] = bb[1].max(p[0]);
            bb[2] = bb[2].min(p[1]);
            bb[3] = bb[3].max(p[1]);
        }
        bb
    }

    /// Returns the smallest-index triangle containing `p` (barycentric
    /// coordinates all `>= -TOL_LOC`) with its barycentric coordinates.
    pub fn locate_point(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let locator = self.locator.get_or_init(|| Locator::build(self));
        locator.candidates(p).iter().find_map(|&t| self.test_triangle(t, p))
    }

    /// Reference point location: scans every triangle in index order.
    pub fn locate_point_brute_force(&self, p: Point) -> Option<(usize, [f64; 3])> {
        (0..self.num_triangles()).find_map(|t| self.test_triangle(t, p))
    }

    fn test_triangle(&self, t: usize, p: Point) -> Option<(usize, [f64; 3])> {
        let b = barycentric(&self.triangle_points(t), p).ok()?;
        b.iter().all(|&x| x >= -TOL_LOC).then_some((t, b))
    }

    /// Splits every triangle into four similar children through its edge midpoints.
    pub fn uniform_refine(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.num_triangles());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Self::new(vertices, triangles)
    }

    /// Same mesh with triangles listed in `perm` order (`perm[new] = old`).
    pub fn permute_triangles(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_triangles() {
            return Err(Error::DimensionMismatch { expected: self.num_triangles(), got: perm.len() });
        }
        Self::new(self.vertices.clone(), perm.iter().map(|&t| self.triangles[t]).collect())
    }

    /// Parses the ASCII mesh format (`nv nt base`, then vertices, then triangles).
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
            let content = line.split('#').next().unwrap_or("");
            content.split_whitespace().map(move |tok| (i + 1, tok))
        });
        let mut last_line = 1;
        let mut next = |what: &str| -> Result<(usize, &str)> {
            match tokens.next() {
                Some((line, tok)) => {
                    last_line = line;
                    Ok((line, tok))
                }
                None => Err(Error::Parse { line: last_line, msg: format!("unexpected end of file, expected {what}") }),
            }
        };
        fn int(line: usize, tok: &str) -> Result<usize> {
            tok.parse().map_err(|_| Error::Parse { line, msg: format!("expected a non-negative integer, got '{tok}'") })
        }
        fn real(line: usize, tok: &str) -> Result<f64> {
            tok.parse().map_err(|_| Error::Parse { line, msg: format!("expected a real number, got '{tok}'") })
        }

        let (l, tok) = next("vertex count")?;
        let nv = int(l, tok)?;
        let (l, tok) = next("triangle count")?;
        let nt = int(l, tok)?;
        let (l, tok) = next("index base")?;
        let base = int(l, tok)?;
        if base > 1 {
            return Err(Error::Parse { line: l, msg: format!("index base must be 0 or 1, got {base}") });
        }
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, tok) = next("x coordinate")?;
            let x = real(l, tok)?;
            let (l, tok) = next("y coordinate")?;
            let y = real(l, tok)?;
            vertices.push([x, y]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for t in 0..nt {
            let mut tri = [0usize; 3];
            for v in tri.iter_mut() {
                let (l, tok) = next("vertex index")?;
                let idx = int(l, tok)?;
                if idx < base {
                    return Err(Error::IndexOutOfRange { triangle: t, index: idx, count: nv });
                }
                *v = idx - base;
            }
            triangles.push(tri);
        }
        if let Some((line, tok)) = tokens.next() {
            return Err(Error::Parse { line, msg: format!("trailing content '{tok}'") });
        }
        Self::new(vertices, triangles)
    }

    /// Writes the mesh in the ASCII format with base 0.
    pub fn to_mesh_string(&self) -> String {
        let mut s = format!("{} {} 0\n", self.num_vertices(), self.num_triangles());
        for p in &self.vertices {
            s.push_str(&format!("{:.17e} {:.17e}\n", p[0], p[1]));
        }
        for t in &self.triangles {
            s.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        s
    }
}

/// Reads and validates a mesh file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Triangulation> {
    Triangulation::parse(&std::fs::read_to_string(path)?)
}

/// `n x n` grid on the unit square, each cell split along its (0,0)-(1,1) diagonal.
pub fn generate_square_mesh(n: usize) -> Result<Triangulation> {
    generate_rect_mesh(n, [0.0, 1.0], [0.0, 1.0])
}

/// `n x n` grid on `[x0, x1] x [y0, y1]` split like [`generate_square_mesh`].
pub fn generate_rect_mesh(n: usize, xr: [f64; 2], yr: [f64; 2]) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    let coord = |r: [f64; 2], i: usize| {
        if i == n {
            r[1]
        } else {
            r[0] + (r[1] - r[0]) * i as f64 / n as f64
        }
    };
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(xr, i), coord(yr, j)]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Triangulation::new(vertices, triangles)
}

/// Uniform bucket grid over the bounding box; each cell lists, in increasing
/// order, every triangle whose (slightly inflated) bounding box touches it.
#[derive(Debug)]
struct Locator {
    bbox: [f64; 4],
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl Locator {
    fn build(mesh: &Triangulation) -> Self {
        let nt = mesh.num_triangles().max(1);
        let side = ((nt as f64).sqrt().ceil() as usize).clamp(1, 512);
        let mut bbox = mesh.bounding_box();
        let pad = 1e-9 * (bbox[1] - bbox[0]).max(bbox[3] - bbox[2]).max(f64::MIN_POSITIVE);
        bbox = [bbox[0] - pad, bbox[1] + pad, bbox[2] - pad, bbox[3] + pad];
        let (nx, ny) = (side, side);
        let mut cells = vec![Vec::new(); nx * ny];
        let dx = (bbox[1] - bbox[0]) / nx as f64;
        let dy = (bbox[3] - bbox[2]) / ny as f64;
        for t in 0..mesh.num_triangles() {
            let pts = mesh.triangle_points(t);
            let xmin = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - pad;
            let xmax = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + pad;
            let ymin = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min) - pad;
            let ymax = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max) + pad;
            let cx = |x: f64| (((x - bbox[0]) / dx).floor().max(0.0) as usize).min(nx - 1);
            let cy = |y: f64| (((y - bbox[2]) / dy).floor().max(0.0) as usize).min(ny - 1);
            for j in cy(ymin)..=cy(ymax) {
                for i in cx(xmin)..=cx(xmax) {
                    cells[j * nx + i].push(t);
                }
            }
        }
        Self { bbox, nx, ny, cells }
    }

    fn candidates(&self, p: Point) -> &[usize] {
        let [x0, x1, y0, y1] = self.bbox;
        if !(p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1) {
            return &[];
        }
        let i = (((p[0] - x0) / (x1 - x0) * self.nx as f64) as usize).min(self.nx - 1);
        let j = (((p[1] - y0) / (y1 - y0) * self.ny as f64) as usize).min(self.ny - 1);
        &self.cells[j * self.nx + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Triangulation {
        generate_square_mesh(1).unwrap()
    }

    #[test]
    fn single_triangle_has_three_boundary_edges() {
        let m = Triangulation::parse("3 1 0\n0 0\n1 0\n0 1\n0 1 2\n").unwrap();
        assert_eq!(m.interior_edges().len(), 0);
        assert_eq!(m.boundary_edges().len(), 3);
    }

    #[test]
    fn two_triangle_square() {
        let m = Triangulation::parse("# square\n4 2 1\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 4 # second\n").unwrap();
        assert_eq!(m.interior_edges().len(), 1);
        assert_eq!(m.boundary_edges().len(), 4);
        assert!((m.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_out_of_range_is_reported() {
        let err = Triangulation::parse("3 1 0\n0 0\n1 0\n0 1\n0 1 3\n").unwrap_err();
        assert!(err.to_string().contains("index out of range"), "{err}");
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Triangulation::parse("3 1 0\n0 0\n0 1\n1 0\n0 1 2\n").unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(matches!(Triangulation::parse("3 1 0\n0 0\n1 0\n2 0\n0 1 2\n"), Err(Error::ZeroArea { triangle: 0 })));
        assert!(matches!(
            Triangulation::parse("3 2 0\n0 0\n1 0\n0 1\n0 1 2\n2 0 1\n"),
            Err(Error::DuplicateTriangle { triangle: 1, other: 0 })
        ));
        // Left half of the square refined, right half not.
        let hanging = "5 3 0\n0 0\n1 0\n1 1\n0 1\n0.5 0.5\n0 1 4\n1 2 4\n0 2 3\n";
        assert!(matches!(Triangulation::parse(hanging), Err(Error::HangingVertex { vertex: 4, .. })));
        assert!(matches!(Triangulation::parse(""), Err(Error::Parse { .. })));
        assert!(matches!(Triangulation::parse("3 1 0\n0 0\n1 x\n0 1\n0 1 2\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn refine_counts() {
        let m = unit_square();
        let r1 = m.uniform_refine().unwrap();
        assert_eq!((r1.num_triangles(), r1.num_vertices()), (8, 9));
        assert!((r1.h() - m.h() / 2.0).abs() < 1e-15);
        let r2 = r1.uniform_refine().unwrap();
        assert_eq!((r2.num_triangles(), r2.num_vertices()), (32, 25));
        assert!((r2.shape_constant() - m.shape_constant()).abs() < 1e-9);
    }

    #[test]
    fn square_mesh_counts() {
        for (n, nt, nv) in [(1, 2, 4), (2, 8, 9), (4, 32, 25)] {
            let m = generate_square_mesh(n).unwrap();
            assert_eq!((m.num_triangles(), m.num_vertices()), (nt, nv));
            assert!((m.h() - 2f64.sqrt() / n as f64).abs() < 1e-15);
            assert!((m.area() - 1.0).abs() < 1e-12);
        }
        // Right isosceles triangle: longest edge / inradius = 2 + 2 sqrt(2).
        let m = generate_square_mesh(4).unwrap();
        assert!((m.shape_constant() - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn locate_centroid_outside_and_tie_break() {
        let m = generate_square_mesh(2).unwrap();
        let [a, b, c] = m.triangle_points(0);
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        let (t, bary) = m.locate_point(centroid).unwrap();
        assert_eq!(t, 0);
        for x in bary {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(m.locate_point([10.0, 10.0]).is_none());
        // Midpoints of shared edges resolve to the smaller triangle index.
        for e in m.interior_edges() {
            let [p, q] = [m.vertices()[e.vertices[0]], m.vertices()[e.vertices[1]]];
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            assert_eq!(m.locate_point(mid).unwrap().0, e.left);
        }
    }
}
