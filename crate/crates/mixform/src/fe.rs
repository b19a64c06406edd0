//! Piecewise linear finite elements on simplicial meshes.
//!
//! Everything downstream (spectral calculus, quasilinear iterations, time
//! stepping) reduces to the matrices assembled here: the stiffness form
//! ∫ μ∇u·∇v, the mass form ∫ uv (consistent or lumped), the boundary mass
//! ∫_Γ κ uv over positively labeled facets, and load vectors. Homogeneous
//! Dirichlet conditions are imposed by elimination: vertices touching a
//! label-0 facet are pinned to zero and dropped from the unknown vector.
//!
//! Gradients of the barycentric basis are computed per cell from the exact
//! inverse of the edge matrix, so element matrices on dyadic meshes carry
//! no avoidable rounding. The scaled assembly path exists so that a
//! state-dependent multiplier of 1 reproduces the plain stiffness matrix
//! bit for bit — several consistency checks rely on that.

use nalgebra::DMatrix;

use crate::coeff::{BoundCoefficient, SurfaceCoefficient};
use crate::linalg::Csr;
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Map from mesh vertices to unknowns after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_full: usize,
    pub full_to_dof: Vec<Option<usize>>,
    pub dof_to_full: Vec<usize>,
}

impl DofMap {
    /// Pin every vertex lying on a facet with label 0.
    pub fn from_dirichlet_labels(mesh: &Mesh) -> DofMap {
        let mut pinned = vec![false; mesh.n_vertices()];
        for f in &mesh.facets {
            if f.label == 0 {
                for &v in &f.verts {
                    pinned[v] = true;
                }
            }
        }
        DofMap::from_pinned(&pinned)
    }

    /// No constraints: every vertex is an unknown.
    pub fn all_free(n: usize) -> DofMap {
        DofMap::from_pinned(&vec![false; n])
    }

    fn from_pinned(pinned: &[bool]) -> DofMap {
        let mut full_to_dof = vec![None; pinned.len()];
        let mut dof_to_full = Vec::new();
        for (v, &p) in pinned.iter().enumerate() {
            if !p {
                full_to_dof[v] = Some(dof_to_full.len());
                dof_to_full.push(v);
            }
        }
        DofMap {
            n_full: pinned.len(),
            full_to_dof,
            dof_to_full,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_to_full.len()
    }

    /// Keep only unknown entries.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dof_to_full.iter().map(|&v| full[v]).collect()
    }

    /// Scatter unknowns back to vertex numbering, zero on pinned vertices.
    pub fn prolong(&self, dofs: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full];
        for (d, &v) in self.dof_to_full.iter().enumerate() {
            full[v] = dofs[d];
        }
        full
    }
}

/// Gradients of the d+1 barycentric basis functions on cell `c`, as rows
/// of a (d+1)×d matrix, together with the cell volume.
pub fn cell_gradients(mesh: &Mesh, c: usize) -> (DMatrix<f64>, f64) {
    let d = mesh.dim;
    let cell = mesh.cell(c);
    let v0 = mesh.vertex(cell[0]);
    // Edge matrix columns v_i - v_0.
    let mut e = DMatrix::zeros(d, d);
    for i in 0..d {
        let vi = mesh.vertex(cell[i + 1]);
        for k in 0..d {
            e[(k, i)] = vi[k] - v0[k];
        }
    }
    let vol = mesh.cell_signed_volume(c);
    // Rows 1..d of the gradient matrix are E^{-T}; row 0 balances to zero sum.
    let einv = e
        .try_inverse()
        .expect("validated meshes have nondegenerate cells");
    let mut grads = DMatrix::zeros(d + 1, d);
    for i in 0..d {
        for k in 0..d {
            grads[(i + 1, k)] = einv[(i, k)];
        }
    }
    for k in 0..d {
        let mut s = 0.0;
        for i in 1..=d {
            s += grads[(i, k)];
        }
        grads[(0, k)] = -s;
    }
    (grads, vol)
}

/// Element stiffness for one cell: K_ij = vol · ∇λ_i · μ ∇λ_j.
pub fn element_stiffness(grads: &DMatrix<f64>, vol: f64, mu: &DMatrix<f64>) -> DMatrix<f64> {
    let flux = grads * mu; // (d+1)×d
    let mut k = &flux * grads.transpose();
    k *= vol;
    k
}

/// Element mass on a simplex of dimension `d` and measure `vol`:
/// M_ij = vol (1+δ_ij)/((d+1)(d+2)).
pub fn element_mass(d: usize, vol: f64) -> DMatrix<f64> {
    let denom = ((d + 1) * (d + 2)) as f64;
    DMatrix::from_fn(d + 1, d + 1, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        vol * (1.0 + delta) / denom
    })
}

/// Stiffness matrix with a per-cell scalar multiplier. The multiplier 1.0
/// reproduces the unscaled assembly exactly (bitwise), because IEEE
/// multiplication by one is the identity.
pub fn assemble_scaled_stiffness(
    mesh: &Mesh,
    coeff: &BoundCoefficient,
    map: &DofMap,
    scale: &[f64],
) -> Result<Csr> {
    if coeff.per_cell.len() != mesh.n_cells() || scale.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "coefficient for {} cells, scales for {}, mesh has {}",
                coeff.per_cell.len(),
                scale.len(),
                mesh.n_cells()
            ),
        });
    }
    let d = mesh.dim;
    let mut triplets = Vec::with_capacity(mesh.n_cells() * (d + 1) * (d + 1));
    for c in 0..mesh.n_cells() {
        let (grads, vol) = cell_gradients(mesh, c);
        let k = element_stiffness(&grads, vol, &coeff.per_cell[c]);
        let cell = mesh.cell(c);
        for i in 0..=d {
            let Some(ri) = map.full_to_dof[cell[i]] else { continue };
            for j in 0..=d {
                let Some(rj) = map.full_to_dof[cell[j]] else { continue };
                triplets.push((ri, rj, scale[c] * k[(i, j)]));
            }
        }
    }
    Ok(Csr::from_triplets(map.n_dofs(), map.n_dofs(), &mut triplets))
}

/// Stiffness matrix ∫ μ∇u·∇v with Dirichlet elimination.
pub fn assemble_stiffness(mesh: &Mesh, coeff: &BoundCoefficient, map: &DofMap) -> Result<Csr> {
    assemble_scaled_stiffness(mesh, coeff, map, &vec![1.0; mesh.n_cells()])
}

/// Consistent mass matrix ∫ uv.
pub fn assemble_mass(mesh: &Mesh, map: &DofMap) -> Csr {
    let d = mesh.dim;
    let mut triplets = Vec::with_capacity(mesh.n_cells() * (d + 1) * (d + 1));
    for c in 0..mesh.n_cells() {
        let vol = mesh.cell_signed_volume(c);
        let m = element_mass(d, vol);
        let cell = mesh.cell(c);
        for i in 0..=d {
            let Some(ri) = map.full_to_dof[cell[i]] else { continue };
            for j in 0..=d {
                let Some(rj) = map.full_to_dof[cell[j]] else { continue };
                triplets.push((ri, rj, m[(i, j)]));
            }
        }
    }
    Csr::from_triplets(map.n_dofs(), map.n_dofs(), &mut triplets)
}

/// Diagonal of the lumped mass matrix: vol/(d+1) per cell vertex.
pub fn lumped_mass_diagonal(mesh: &Mesh, map: &DofMap) -> Vec<f64> {
    let d = mesh.dim;
    let mut diag = vec![0.0; map.n_dofs()];
    for c in 0..mesh.n_cells() {
        let share = mesh.cell_signed_volume(c) / (d + 1) as f64;
        for &v in mesh.cell(c) {
            if let Some(r) = map.full_to_dof[v] {
                diag[r] += share;
            }
        }
    }
    diag
}

/// Boundary mass ∫_Γ κ uv over facets with positive labels, κ from the
/// surface coefficient (absent tags contribute zero).
pub fn assemble_boundary_mass(mesh: &Mesh, surface: &SurfaceCoefficient, map: &DofMap) -> Csr {
    let df = mesh.dim - 1; // facet dimension
    let denom = ((df + 1) * (df + 2)) as f64;
    let mut triplets = Vec::new();
    for f in &mesh.facets {
        if f.label <= 0 {
            continue;
        }
        let kappa = surface.kappa(f.label);
        if kappa == 0.0 {
            continue;
        }
        let measure = mesh.facet_measure(f);
        for (i, &vi) in f.verts.iter().enumerate() {
            let Some(ri) = map.full_to_dof[vi] else { continue };
            for (j, &vj) in f.verts.iter().enumerate() {
                let Some(rj) = map.full_to_dof[vj] else { continue };
                let delta = if i == j { 1.0 } else { 0.0 };
                triplets.push((ri, rj, kappa * measure * (1.0 + delta) / denom));
            }
        }
    }
    Csr::from_triplets(map.n_dofs(), map.n_dofs(), &mut triplets)
}

/// Vertex interpolation of a function.
pub fn interpolate(mesh: &Mesh, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..mesh.n_vertices()).map(|v| f(mesh.vertex(v))).collect()
}

/// Load vector ∫ f v for vertex-interpolated f: the consistent mass matrix
/// applied to the interpolant (exact when f is itself piecewise linear).
pub fn assemble_load(mesh: &Mesh, map: &DofMap, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let full = interpolate(mesh, f);
    let m = assemble_mass(mesh, &DofMap::all_free(mesh.n_vertices()));
    let mf = m.matvec(&full);
    map.restrict(&mf)
}

/// Quadrature nodes and weights on one cell, exact for quadratic
/// integrands: edge midpoints in 2D, the symmetric 4-point rule in 3D.
pub fn cell_quadrature(mesh: &Mesh, c: usize) -> Vec<(Vec<f64>, f64)> {
    let d = mesh.dim;
    let vol = mesh.cell_signed_volume(c);
    let cell = mesh.cell(c);
    let vert = |i: usize| mesh.vertex(cell[i]);
    let combine = |bary: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; d];
        for (i, &b) in bary.iter().enumerate() {
            for k in 0..d {
                p[k] += b * vert(i)[k];
            }
        }
        p
    };
    match d {
        2 => {
            // Midpoints of the three edges, weight vol/3 each.
            let mids = [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]];
            mids.iter().map(|b| (combine(b), vol / 3.0)).collect()
        }
        3 => {
            // Degree-2 rule: barycentric (a,b,b,b) and permutations with
            // a = (5+3√5)/20, b = (5-√5)/20, weight vol/4.
            let a = (5.0 + 3.0 * 5.0_f64.sqrt()) / 20.0;
            let b = (5.0 - 5.0_f64.sqrt()) / 20.0;
            (0..4)
                .map(|k| {
                    let mut bary = [b; 4];
                    bary[k] = a;
                    (combine(&bary), vol / 4.0)
                })
                .collect()
        }
        _ => unreachable!("meshes are 2- or 3-dimensional"),
    }
}

/// L² error of a vertex-value field against an exact function, by the
/// quadratic quadrature rule.
pub fn l2_error(mesh: &Mesh, values: &[f64], exact: impl Fn(&[f64]) -> f64) -> f64 {
    let d = mesh.dim;
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        for (p, w) in cell_quadrature(mesh, c) {
            // Barycentric interpolation of the vertex values at p.
            let bary = barycentric_in_cell(mesh, c, &p);
            let mut uh = 0.0;
            for i in 0..=d {
                uh += bary[i] * values[cell[i]];
            }
            let e = uh - exact(&p);
            total += w * e * e;
        }
    }
    total.sqrt()
}

/// H¹ seminorm error of a vertex-value field against an exact gradient.
pub fn h1_seminorm_error(
    mesh: &Mesh,
    values: &[f64],
    grad_exact: impl Fn(&[f64]) -> Vec<f64>,
) -> f64 {
    let d = mesh.dim;
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let (grads, _) = cell_gradients(mesh, c);
        let cell = mesh.cell(c);
        // Constant gradient of the P1 field on this cell.
        let mut gh = vec![0.0; d];
        for i in 0..=d {
            for k in 0..d {
                gh[k] += values[cell[i]] * grads[(i, k)];
            }
        }
        for (p, w) in cell_quadrature(mesh, c) {
            let ge = grad_exact(&p);
            let mut s = 0.0;
            for k in 0..d {
                let e = gh[k] - ge[k];
                s += e * e;
            }
            total += w * s;
        }
    }
    total.sqrt()
}

/// Barycentric coordinates of `p` in cell `c` (no containment check).
pub fn barycentric_in_cell(mesh: &Mesh, c: usize, p: &[f64]) -> Vec<f64> {
    let d = mesh.dim;
    let (grads, _) = cell_gradients(mesh, c);
    let cell = mesh.cell(c);
    let v0 = mesh.vertex(cell[0]);
    // λ_i(p) = λ_i(v0) + ∇λ_i · (p - v0); λ_i(v0) = δ_{i0}.
    let mut bary = vec![0.0; d + 1];
    for i in 0..=d {
        let mut s = if i == 0 { 1.0 } else { 0.0 };
        for k in 0..d {
            s += grads[(i, k)] * (p[k] - v0[k]);
        }
        bary[i] = s;
    }
    bary
}

/// Evaluate a vertex-value field at an arbitrary point via a locator hit.
pub fn eval_p1(mesh: &Mesh, values: &[f64], cell: usize, bary: &[f64]) -> f64 {
    mesh.cell(cell)
        .iter()
        .zip(bary)
        .map(|(&v, &b)| b * values[v])
        .sum()
}
