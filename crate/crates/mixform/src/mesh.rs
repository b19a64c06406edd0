//! Simplicial meshes with labeled boundary and interface facets.
//!
//! Cells are positively oriented simplices (triangles in 2d, tetrahedra in
//! 3d). Facet labels follow one convention everywhere: 0 is Dirichlet,
//! positive tags are Neumann/Robin surface pieces, negative tags mark
//! interior interfaces (material jumps, gluing plates). Structured
//! generators produce conforming meshes by construction; `validate` checks
//! the invariants anyway so that meshes read from files get the same
//! guarantees.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Labeled (d−1)-face, stored with sorted vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub verts: Vec<usize>,
    pub label: i32,
}

/// Conforming simplicial mesh.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    /// Vertex coordinates, `dim`-strided.
    pub vertices: Vec<f64>,
    /// Cell connectivity, `(dim+1)`-strided, positively oriented.
    pub cells: Vec<usize>,
    /// Labeled boundary and interface facets.
    pub facets: Vec<Facet>,
}

/// How structured quads are split into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalRule {
    /// Diagonal direction alternates with the parity of i+j. With even
    /// subdivision counts this pattern is invariant under the coordinate
    /// reflections of the grid, which the mirror-extension operators need.
    Alternating,
    /// All diagonals in the same direction.
    Fixed,
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (self.dim + 1)..(c + 1) * (self.dim + 1)]
    }

    /// Signed volume of cell c (positive for correct orientation).
    pub fn cell_signed_volume(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let p0 = self.vertex(cell[0]);
        match self.dim {
            2 => {
                let p1 = self.vertex(cell[1]);
                let p2 = self.vertex(cell[2]);
                let (a, b) = (sub2(p1, p0), sub2(p2, p0));
                0.5 * (a[0] * b[1] - a[1] * b[0])
            }
            3 => {
                let p1 = self.vertex(cell[1]);
                let p2 = self.vertex(cell[2]);
                let p3 = self.vertex(cell[3]);
                let a = sub3(p1, p0);
                let b = sub3(p2, p0);
                let c = sub3(p3, p0);
                (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            }
            _ => unreachable!("meshes are 2d or 3d"),
        }
    }

    pub fn cell_barycenter(&self, c: usize) -> Vec<f64> {
        let cell = self.cell(c);
        let mut b = vec![0.0; self.dim];
        for &v in cell {
            for (k, x) in self.vertex(v).iter().enumerate() {
                b[k] += x;
            }
        }
        for x in &mut b {
            *x /= (self.dim + 1) as f64;
        }
        b
    }

    /// Measure of a labeled facet ((d−1)-volume).
    pub fn facet_measure(&self, f: &Facet) -> f64 {
        match self.dim {
            2 => {
                let a = self.vertex(f.verts[0]);
                let b = self.vertex(f.verts[1]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            }
            3 => {
                let a = self.vertex(f.verts[0]);
                let b = self.vertex(f.verts[1]);
                let c = self.vertex(f.verts[2]);
                let u = sub3(b, a);
                let v = sub3(c, a);
                let n = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
            }
            _ => unreachable!(),
        }
    }

    /// Longest edge over all cells.
    pub fn mesh_size(&self) -> f64 {
        let mut h = 0.0_f64;
        for c in 0..self.n_cells() {
            let cell = self.cell(c);
            for i in 0..cell.len() {
                for j in (i + 1)..cell.len() {
                    let a = self.vertex(cell[i]);
                    let b = self.vertex(cell[j]);
                    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                    h = h.max(d2.sqrt());
                }
            }
        }
        h
    }

    /// Map from sorted face vertex tuples to the number of adjacent cells.
    fn face_counts(&self) -> HashMap<Vec<usize>, usize> {
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let nv_cell = self.dim + 1;
        for c in 0..self.n_cells() {
            let cell = self.cell(c);
            for skip in 0..nv_cell {
                let mut face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, v)| *v)
                    .collect();
                face.sort_unstable();
                *counts.entry(face).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Structural invariants: positive cell volumes, conforming faces
    /// (every face bounds one or two cells), labeled facets that exist in
    /// the mesh, every boundary face labeled, boundary labels nonnegative,
    /// interface labels only on interior faces.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::DimensionMismatch {
                detail: format!("unsupported mesh dimension {}", self.dim),
            });
        }
        let nv = self.n_vertices();
        for (k, &v) in self.cells.iter().enumerate() {
            if v >= nv {
                return Err(Error::ConfigError {
                    detail: format!("cell entry {} references missing vertex {}", k, v),
                });
            }
        }
        for c in 0..self.n_cells() {
            let vol = self.cell_signed_volume(c);
            if vol <= 0.0 {
                return Err(Error::ConfigError {
                    detail: format!("cell {} has nonpositive volume {}", c, vol),
                });
            }
        }
        let counts = self.face_counts();
        for (face, n) in &counts {
            if *n > 2 {
                return Err(Error::ConfigError {
                    detail: format!("face {:?} bounds {} cells", face, n),
                });
            }
        }
        let mut labeled: HashMap<Vec<usize>, i32> = HashMap::new();
        for f in &self.facets {
            let mut key = f.verts.clone();
            key.sort_unstable();
            match counts.get(&key) {
                None => {
                    return Err(Error::LabelError {
                        detail: format!("facet {:?} is not a face of any cell", f.verts),
                    })
                }
                Some(1) => {
                    if f.label < 0 {
                        return Err(Error::LabelError {
                            detail: format!(
                                "boundary facet {:?} carries interface label {}",
                                f.verts, f.label
                            ),
                        });
                    }
                }
                Some(_) => {
                    if f.label >= 0 {
                        return Err(Error::LabelError {
                            detail: format!(
                                "interior facet {:?} carries boundary label {}",
                                f.verts, f.label
                            ),
                        });
                    }
                }
            }
            if labeled.insert(key, f.label).is_some() {
                return Err(Error::LabelError {
                    detail: format!("facet {:?} is labeled twice", f.verts),
                });
            }
        }
        for (face, n) in &counts {
            if *n == 1 && !labeled.contains_key(face) {
                return Err(Error::LabelError {
                    detail: format!("boundary face {:?} is unlabeled", face),
                });
            }
        }
        Ok(())
    }

    /// Serialize in the plain ASCII interchange format:
    /// a header line `d nv nc nf`, nv coordinate lines, nc connectivity
    /// lines, nf facet lines `v1 ... vd label`.
    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.dim,
            self.n_vertices(),
            self.n_cells(),
            self.facets.len()
        );
        for i in 0..self.n_vertices() {
            let v = self.vertex(i);
            let line: Vec<String> = v.iter().map(|x| format!("{:?}", x)).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        for c in 0..self.n_cells() {
            let line: Vec<String> = self.cell(c).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        for f in &self.facets {
            let line: Vec<String> = f.verts.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{} {}", line.join(" "), f.label);
        }
        s
    }

    pub fn from_ascii(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::ConfigError {
            detail: "empty mesh file".into(),
        })?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::ConfigError {
                detail: format!("bad mesh header '{}': {}", header, e),
            })?;
        if head.len() != 4 {
            return Err(Error::ConfigError {
                detail: format!("mesh header needs 4 fields, got '{}'", header),
            });
        }
        let (dim, nv, nc, nf) = (head[0], head[1], head[2], head[3]);
        let mut vertices = Vec::with_capacity(nv * dim);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| Error::ConfigError {
                detail: "mesh file truncated in vertex block".into(),
            })?;
            let coords: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::ConfigError {
                    detail: format!("bad vertex line '{}': {}", line, e),
                })?;
            if coords.len() != dim {
                return Err(Error::ConfigError {
                    detail: format!("vertex line '{}' has wrong arity", line),
                });
            }
            vertices.extend(coords);
        }
        let mut cells = Vec::with_capacity(nc * (dim + 1));
        for _ in 0..nc {
            let line = lines.next().ok_or_else(|| Error::ConfigError {
                detail: "mesh file truncated in cell block".into(),
            })?;
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::ConfigError {
                    detail: format!("bad cell line '{}': {}", line, e),
                })?;
            if ids.len() != dim + 1 {
                return Err(Error::ConfigError {
                    detail: format!("cell line '{}' has wrong arity", line),
                });
            }
            cells.extend(ids);
        }
        let mut facets = Vec::with_capacity(nf);
        for _ in 0..nf {
            let line = lines.next().ok_or_else(|| Error::ConfigError {
                detail: "mesh file truncated in facet block".into(),
            })?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(Error::ConfigError {
                    detail: format!("facet line '{}' has wrong arity", line),
                });
            }
            let verts: Vec<usize> = toks[..dim]
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::ConfigError {
                    detail: format!("bad facet line '{}': {}", line, e),
                })?;
            let label: i32 = toks[dim].parse().map_err(|e| Error::ConfigError {
                detail: format!("bad facet label in '{}': {}", line, e),
            })?;
            facets.push(Facet { verts, label });
        }
        let mesh = Mesh { dim, vertices, cells, facets };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ascii())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Mesh> {
        let text = std::fs::read_to_string(path)?;
        Mesh::from_ascii(&text)
    }

    /// Pair every vertex with its mirror image under reflection of
    /// coordinate `axis` about `center`. Fails with ASYMMETRIC_MESH when
    /// any vertex has no partner within 1e−9.
    pub fn mirror_pairing(&self, axis: usize, center: f64) -> Result<Vec<usize>> {
        let key = |p: &[f64]| -> Vec<i64> {
            p.iter()
                .map(|x| (x / 1e-9).round() as i64)
                .collect()
        };
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        for i in 0..self.n_vertices() {
            index.insert(key(self.vertex(i)), i);
        }
        let mut pairing = vec![usize::MAX; self.n_vertices()];
        for i in 0..self.n_vertices() {
            let mut q = self.vertex(i).to_vec();
            q[axis] = 2.0 * center - q[axis];
            match index.get(&key(&q)) {
                Some(&j) => pairing[i] = j,
                None => {
                    return Err(Error::AsymmetricMesh {
                        detail: format!(
                            "vertex {} at {:?} has no mirror partner",
                            i,
                            self.vertex(i)
                        ),
                    })
                }
            }
        }
        Ok(pairing)
    }
}

/// Uniform-grid accelerated point location with barycentric coordinates.
pub struct CellLocator<'a> {
    mesh: &'a Mesh,
    lo: Vec<f64>,
    inv_h: Vec<f64>,
    bins: Vec<usize>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> CellLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> CellLocator<'a> {
        let d = mesh.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for i in 0..mesh.n_vertices() {
            for (k, x) in mesh.vertex(i).iter().enumerate() {
                lo[k] = lo[k].min(*x);
                hi[k] = hi[k].max(*x);
            }
        }
        let n_bins = ((mesh.n_cells() as f64).powf(1.0 / d as f64).ceil() as usize).max(1);
        let bins = vec![n_bins; d];
        let inv_h: Vec<f64> = (0..d)
            .map(|k| {
                let w = (hi[k] - lo[k]).max(1e-300);
                n_bins as f64 / w
            })
            .collect();
        let mut locator = CellLocator { mesh, lo, inv_h, bins, buckets: HashMap::new() };
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            let mut cl = vec![f64::INFINITY; d];
            let mut ch = vec![f64::NEG_INFINITY; d];
            for &v in cell {
                for (k, x) in mesh.vertex(v).iter().enumerate() {
                    cl[k] = cl[k].min(*x);
                    ch[k] = ch[k].max(*x);
                }
            }
            let bl = locator.bin_of(&cl);
            let bh = locator.bin_of(&ch);
            let mut idx = bl.clone();
            loop {
                locator.buckets.entry(idx.clone()).or_default().push(c);
                // Advance the multi-index bl..=bh.
                let mut k = 0;
                loop {
                    if k == d {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] <= bh[k] {
                        break;
                    }
                    idx[k] = bl[k];
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        locator
    }

    fn bin_of(&self, p: &[f64]) -> Vec<i64> {
        (0..p.len())
            .map(|k| {
                let t = ((p[k] - self.lo[k]) * self.inv_h[k]).floor() as i64;
                t.clamp(0, self.bins[k] as i64 - 1)
            })
            .collect()
    }

    /// Find a cell containing p (within barycentric slack `tol`), together
    /// with its barycentric coordinates.
    pub fn locate(&self, p: &[f64], tol: f64) -> Option<(usize, Vec<f64>)> {
        let bin = self.bin_of(p);
        let cells = self.buckets.get(&bin)?;
        for &c in cells {
            if let Some(b) = self.barycentric(c, p, tol) {
                return Some((c, b));
            }
        }
        None
    }

    /// Barycentric coordinates of p in cell c, or None if outside.
    pub fn barycentric(&self, c: usize, p: &[f64], tol: f64) -> Option<Vec<f64>> {
        let m = self.mesh;
        let cell = m.cell(c);
        let d = m.dim;
        let p0 = m.vertex(cell[0]);
        // Solve the d×d system [p1−p0 … pd−p0] λ = p − p0.
        let mut mat = vec![0.0; d * d];
        for j in 0..d {
            let pj = m.vertex(cell[j + 1]);
            for i in 0..d {
                mat[i * d + j] = pj[i] - p0[i];
            }
        }
        let rhs: Vec<f64> = (0..d).map(|i| p[i] - p0[i]).collect();
        let lam = solve_small(&mat, &rhs, d)?;
        let l0 = 1.0 - lam.iter().sum::<f64>();
        let mut bary = Vec::with_capacity(d + 1);
        bary.push(l0);
        bary.extend(lam);
        if bary.iter().all(|l| *l >= -tol) {
            Some(bary)
        } else {
            None
        }
    }
}

fn solve_small(mat: &[f64], rhs: &[f64], d: usize) -> Option<Vec<f64>> {
    match d {
        2 => {
            let det = mat[0] * mat[3] - mat[1] * mat[2];
            if det == 0.0 {
                return None;
            }
            Some(vec![
                (rhs[0] * mat[3] - rhs[1] * mat[1]) / det,
                (mat[0] * rhs[1] - mat[2] * rhs[0]) / det,
            ])
        }
        3 => {
            let a = mat;
            let det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6]);
            if det == 0.0 {
                return None;
            }
            let inv = [
                (a[4] * a[8] - a[5] * a[7]) / det,
                (a[2] * a[7] - a[1] * a[8]) / det,
                (a[1] * a[5] - a[2] * a[4]) / det,
                (a[5] * a[6] - a[3] * a[8]) / det,
                (a[0] * a[8] - a[2] * a[6]) / det,
                (a[2] * a[3] - a[0] * a[5]) / det,
                (a[3] * a[7] - a[4] * a[6]) / det,
                (a[1] * a[6] - a[0] * a[7]) / det,
                (a[0] * a[4] - a[1] * a[3]) / det,
            ];
            Some(vec![
                inv[0] * rhs[0] + inv[1] * rhs[1] + inv[2] * rhs[2],
                inv[3] * rhs[0] + inv[4] * rhs[1] + inv[5] * rhs[2],
                inv[6] * rhs[0] + inv[7] * rhs[1] + inv[8] * rhs[2],
            ])
        }
        _ => None,
    }
}

/// Match every vertex of `sub` to the vertex of `sup` at the same
/// coordinates (within 1e−9). Fails with INCOMPATIBLE_MESHES when a vertex
/// has no match; used to embed a half-domain mesh into its mirror
/// extension.
pub fn vertex_injection(sub: &Mesh, sup: &Mesh) -> Result<Vec<usize>> {
    if sub.dim != sup.dim {
        return Err(Error::DimensionMismatch {
            detail: format!("meshes have dimensions {} and {}", sub.dim, sup.dim),
        });
    }
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / 1e-9).round() as i64).collect() };
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    for i in 0..sup.n_vertices() {
        index.insert(key(sup.vertex(i)), i);
    }
    let mut out = Vec::with_capacity(sub.n_vertices());
    for i in 0..sub.n_vertices() {
        match index.get(&key(sub.vertex(i))) {
            Some(&j) => out.push(j),
            None => {
                return Err(Error::IncompatibleMeshes {
                    detail: format!(
                        "vertex {} at {:?} of the sub-mesh is absent from the super-mesh",
                        i,
                        sub.vertex(i)
                    ),
                })
            }
        }
    }
    Ok(out)
}

fn sub2(a: &[f64], b: &[f64]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Extract all unlabeled boundary faces and label them through `labeler`
/// applied to the face barycenter. Faces the labeler maps to a negative
/// value are rejected (boundary faces cannot be interfaces).
pub fn label_boundary(mesh: &mut Mesh, labeler: &dyn Fn(&[f64]) -> i32) -> Result<()> {
    let counts = mesh.face_counts();
    let mut have: Vec<Vec<usize>> = mesh
        .facets
        .iter()
        .map(|f| {
            let mut v = f.verts.clone();
            v.sort_unstable();
            v
        })
        .collect();
    have.sort();
    for (face, n) in counts {
        if n != 1 || have.binary_search(&face).is_ok() {
            continue;
        }
        let mut b = vec![0.0; mesh.dim];
        for &v in &face {
            for (k, x) in mesh.vertex(v).iter().enumerate() {
                b[k] += x;
            }
        }
        for x in &mut b {
            *x /= face.len() as f64;
        }
        let label = labeler(&b);
        if label < 0 {
            return Err(Error::LabelError {
                detail: format!("labeler assigned interface label {} to boundary face", label),
            });
        }
        mesh.facets.push(Facet { verts: face, label });
    }
    // Deterministic facet order regardless of hash-map iteration.
    mesh.facets.sort_by(|a, b| {
        let mut ka = a.verts.clone();
        let mut kb = b.verts.clone();
        ka.sort_unstable();
        kb.sort_unstable();
        ka.cmp(&kb)
    });
    Ok(())
}

/// Label every interior face whose barycenter satisfies `on_surface` with
/// the (negative) interface tag.
pub fn label_interface(
    mesh: &mut Mesh,
    tag: i32,
    on_surface: &dyn Fn(&[f64]) -> bool,
) -> Result<()> {
    if tag >= 0 {
        return Err(Error::LabelError {
            detail: format!("interface tag must be negative, got {}", tag),
        });
    }
    let counts = mesh.face_counts();
    for (face, n) in counts {
        if n != 2 {
            continue;
        }
        let mut b = vec![0.0; mesh.dim];
        for &v in &face {
            for (k, x) in mesh.vertex(v).iter().enumerate() {
                b[k] += x;
            }
        }
        for x in &mut b {
            *x /= face.len() as f64;
        }
        if on_surface(&b) {
            mesh.facets.push(Facet { verts: face, label: tag });
        }
    }
    mesh.facets.sort_by(|a, b| {
        let mut ka = a.verts.clone();
        let mut kb = b.verts.clone();
        ka.sort_unstable();
        kb.sort_unstable();
        ka.cmp(&kb)
    });
    Ok(())
}

/// Structured triangulation of the rectangle lo..hi with nx × ny quads.
/// Boundary facets are left for `label_boundary`.
pub fn structured_rect(
    nx: usize,
    ny: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    rule: DiagonalRule,
) -> Mesh {
    assert!(nx >= 1 && ny >= 1);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * 2);
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64);
            vertices.push(lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny * 6);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10) = (vid(i, j), vid(i + 1, j));
            let (v01, v11) = (vid(i, j + 1), vid(i + 1, j + 1));
            let first_diag = match rule {
                DiagonalRule::Alternating => (i + j) % 2 == 0,
                DiagonalRule::Fixed => true,
            };
            if first_diag {
                // Diagonal v00–v11.
                cells.extend([v00, v10, v11]);
                cells.extend([v00, v11, v01]);
            } else {
                // Diagonal v10–v01.
                cells.extend([v00, v10, v01]);
                cells.extend([v10, v11, v01]);
            }
        }
    }
    Mesh { dim: 2, vertices, cells, facets: Vec::new() }
}

/// Kuhn subdivision of one voxel into six tetrahedra, conforming across
/// neighbors. `v` maps lattice corners (0/1 offsets) to vertex ids.
fn kuhn_tets(cells: &mut Vec<usize>, v: &dyn Fn(usize, usize, usize) -> usize) {
    // Each permutation of the axes yields the path tetrahedron
    // 0 -> e_{s0} -> e_{s0}+e_{s1} -> (1,1,1); odd permutations need a
    // vertex swap for positive orientation.
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], true),
        ([0, 2, 1], false),
        ([1, 0, 2], false),
        ([1, 2, 0], true),
        ([2, 0, 1], true),
        ([2, 1, 0], false),
    ];
    for (perm, even) in PERMS {
        let mut ofs = [0usize; 3];
        let a = v(0, 0, 0);
        ofs[perm[0]] = 1;
        let b = v(ofs[0], ofs[1], ofs[2]);
        ofs[perm[1]] = 1;
        let c = v(ofs[0], ofs[1], ofs[2]);
        let d = v(1, 1, 1);
        if even {
            cells.extend([a, b, c, d]);
        } else {
            cells.extend([a, c, b, d]);
        }
    }
}

/// Tetrahedral mesh of the set of unit-lattice voxels (scaled by `h`,
/// offset by `origin`) accepted by `keep` on integer voxel coordinates.
/// Conforming wherever voxels share faces.
pub fn voxel_mesh(
    ranges: [(i64, i64); 3],
    h: f64,
    keep: &dyn Fn(i64, i64, i64) -> bool,
) -> Mesh {
    let mut vid: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut get = |vertices: &mut Vec<f64>, x: i64, y: i64, z: i64| -> usize {
        *vid.entry((x, y, z)).or_insert_with(|| {
            let id = vertices.len() / 3;
            vertices.push(x as f64 * h);
            vertices.push(y as f64 * h);
            vertices.push(z as f64 * h);
            id
        })
    };
    for z in ranges[2].0..ranges[2].1 {
        for y in ranges[1].0..ranges[1].1 {
            for x in ranges[0].0..ranges[0].1 {
                if !keep(x, y, z) {
                    continue;
                }
                let mut ids = [[[0usize; 2]; 2]; 2];
                for (dz, plane) in ids.iter_mut().enumerate() {
                    for (dy, row) in plane.iter_mut().enumerate() {
                        for (dx, slot) in row.iter_mut().enumerate() {
                            *slot =
                                get(&mut vertices, x + dx as i64, y + dy as i64, z + dz as i64);
                        }
                    }
                }
                kuhn_tets(&mut cells, &|dx, dy, dz| ids[dz][dy][dx]);
            }
        }
    }
    Mesh { dim: 3, vertices, cells, facets: Vec::new() }
}

/// Prism mesh of triangle {x ≥ 0, y ≥ 0, x + y ≤ 1} × [0, 1] with k
/// subdivisions per triangle edge and nz layers. Prisms are split into
/// three tetrahedra by the global-index ordering rule, which makes the
/// splits conforming across neighboring prisms.
pub fn prism_mesh(k: usize, nz: usize) -> Mesh {
    assert!(k >= 1 && nz >= 1);
    // Triangle vertices (i, j) with i + j ≤ k, layered in z.
    let mut tri_id = HashMap::new();
    let mut tri_coords = Vec::new();
    for j in 0..=k {
        for i in 0..=(k - j) {
            tri_id.insert((i, j), tri_coords.len());
            tri_coords.push((i as f64 / k as f64, j as f64 / k as f64));
        }
    }
    let per_layer = tri_coords.len();
    let mut vertices = Vec::with_capacity(per_layer * (nz + 1) * 3);
    for l in 0..=nz {
        let z = l as f64 / nz as f64;
        for &(x, y) in &tri_coords {
            vertices.extend([x, y, z]);
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for j in 0..k {
        for i in 0..(k - j) {
            tris.push([tri_id[&(i, j)], tri_id[&(i + 1, j)], tri_id[&(i, j + 1)]]);
            if i + j < k - 1 {
                tris.push([
                    tri_id[&(i + 1, j)],
                    tri_id[&(i + 1, j + 1)],
                    tri_id[&(i, j + 1)],
                ]);
            }
        }
    }
    let mut cells = Vec::new();
    for l in 0..nz {
        let (b, t) = (l * per_layer, (l + 1) * per_layer);
        for tri in &tris {
            // Sort columns by global (per-layer) index: a < b < c.
            let mut s = *tri;
            s.sort_unstable();
            let tets = [
                [b + s[0], b + s[1], b + s[2], t + s[0]],
                [t + s[0], b + s[1], b + s[2], t + s[1]],
                [t + s[0], t + s[1], b + s[2], t + s[2]],
            ];
            for tet in tets {
                cells.extend(orient_tet(&vertices, tet));
            }
        }
    }
    Mesh { dim: 3, vertices, cells, facets: Vec::new() }
}

fn orient_tet(vertices: &[f64], tet: [usize; 4]) -> [usize; 4] {
    let p = |i: usize| &vertices[3 * tet[i]..3 * tet[i] + 3];
    let a = sub3(p(1), p(0));
    let b = sub3(p(2), p(0));
    let c = sub3(p(3), p(0));
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    if det >= 0.0 {
        tet
    } else {
        [tet[0], tet[2], tet[1], tet[3]]
    }
}
