//! Named example configurations: domain mesh, boundary labels, coefficients.
//!
//! Each preset produces, at a requested refinement level, a conforming
//! simplicial mesh with a complete boundary labeling (0 = homogeneous
//! Dirichlet, positive tags = natural/flux boundary), optional interface
//! facets (negative tags), and a default coefficient field. Levels halve
//! the mesh size each step.

use nalgebra::DMatrix;

use crate::coeff::{CoefficientField, CoefficientRegion, SurfaceCoefficient};
use crate::geometry::halfspace::{HalfSpace, Polyhedron};
use crate::mesh::{
    label_boundary, label_interface, prism_mesh, structured_rect, voxel_mesh, DiagonalRule, Mesh,
};
use crate::{Error, Result};

/// Geometric tolerance for classifying facet barycenters against the
/// axis-aligned planes that carry the labels. Mesh planes are exact
/// dyadic coordinates here, so any tolerance well below the mesh size
/// works; 1e-9 leaves room for barycenter rounding.
const LABEL_TOL: f64 = 1e-9;

/// The named configurations understood by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    /// Two long open beams crossing through a shared square plate at z = 0;
    /// flux boundary everywhere except the four far beam ends.
    CrossingBeams,
    /// Lower half square (-1,1)x(-1,0) with flux boundary on the whole top
    /// edge y = 0 and Dirichlet on the rest.
    HalfCubeNeumannPlate,
    /// Lower half square with flux boundary only on the left half of the
    /// top edge (x < 0, y = 0); Dirichlet elsewhere, so the boundary
    /// condition changes type at the origin.
    HalfCubeHalfPlate,
    /// Unit square (0,1)^2 with Dirichlet on the bottom edge y = 0 and flux
    /// boundary on the other three edges.
    UnitSquareMixed,
    /// Unit triangle times (0,1) with a material interface at z = 1/2,
    /// flux boundary on the side face x = 0, Dirichlet on the rest.
    LayeredPrism,
}

/// Spec names accepted on the command line and in config files.
pub const PRESET_NAMES: [(&str, PresetKind); 5] = [
    ("CROSSING_BEAMS", PresetKind::CrossingBeams),
    ("HALF_CUBE_NEUMANN_PLATE", PresetKind::HalfCubeNeumannPlate),
    ("HALF_CUBE_HALF_PLATE", PresetKind::HalfCubeHalfPlate),
    ("UNIT_SQUARE_MIXED", PresetKind::UnitSquareMixed),
    ("LAYERED_PRISM", PresetKind::LayeredPrism),
];

pub fn preset_by_name(name: &str) -> Result<PresetKind> {
    PRESET_NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, k)| *k)
        .ok_or_else(|| Error::ConfigError {
            detail: format!(
                "unknown preset '{}'; valid names: {}",
                name,
                PRESET_NAMES.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ),
        })
}

/// A constructed preset: mesh with labels plus default coefficients.
#[derive(Debug, Clone)]
pub struct PresetInstance {
    pub name: &'static str,
    pub kind: PresetKind,
    pub level: usize,
    pub mesh: Mesh,
    pub coeff: CoefficientField,
    pub surface: SurfaceCoefficient,
}

/// Build a preset at refinement `level` (mesh size halves per level).
pub fn build_preset(kind: PresetKind, level: usize) -> Result<PresetInstance> {
    if level > 8 {
        return Err(Error::ConfigError {
            detail: format!("refinement level {} exceeds the supported maximum 8", level),
        });
    }
    let (name, mesh, coeff) = match kind {
        PresetKind::CrossingBeams => {
            let mesh = crossing_beams_mesh(level)?;
            ("CROSSING_BEAMS", mesh, CoefficientField::scalar(3, 1.0)?)
        }
        PresetKind::HalfCubeNeumannPlate => {
            let mesh = half_cube_mesh(level, HalfCubeTop::AllFlux)?;
            ("HALF_CUBE_NEUMANN_PLATE", mesh, CoefficientField::scalar(2, 1.0)?)
        }
        PresetKind::HalfCubeHalfPlate => {
            let mesh = half_cube_mesh(level, HalfCubeTop::LeftFlux)?;
            ("HALF_CUBE_HALF_PLATE", mesh, CoefficientField::scalar(2, 1.0)?)
        }
        PresetKind::UnitSquareMixed => {
            let mesh = unit_square_mixed_mesh(level)?;
            ("UNIT_SQUARE_MIXED", mesh, CoefficientField::scalar(2, 1.0)?)
        }
        PresetKind::LayeredPrism => {
            let mesh = layered_prism_mesh(level)?;
            ("LAYERED_PRISM", mesh, layered_prism_coefficient()?)
        }
    };
    mesh.validate()?;
    Ok(PresetInstance {
        name,
        kind,
        level,
        mesh,
        coeff,
        surface: SurfaceCoefficient::none(),
    })
}

/// Mesh of the crossing beams at size h = 1/2^level (level 0: h = 1).
/// The two beams share the voxel lattice, so they glue conformingly
/// across the plate (-1,1)^2 x {0}.
pub fn crossing_beams_mesh(level: usize) -> Result<Mesh> {
    let s = 1i64 << level; // voxels per unit length; h = 1/s
    let h = 1.0 / s as f64;
    // Voxel (x, y, z) spans [x h, (x+1) h] x ... on the integer lattice.
    let in_beam1 = move |x: i64, y: i64, z: i64| {
        x >= -10 * s && x < 10 * s && y >= -s && y < s && z >= -2 * s && z < 0
    };
    let in_beam2 = move |x: i64, y: i64, z: i64| {
        x >= -s && x < s && y >= -10 * s && y < 10 * s && z >= 0 && z < 2 * s
    };
    let mut mesh = voxel_mesh(
        [(-10 * s, 10 * s), (-10 * s, 10 * s), (-2 * s, 2 * s)],
        h,
        &|x, y, z| in_beam1(x, y, z) || in_beam2(x, y, z),
    );
    label_boundary(&mut mesh, &|b| {
        if b[0].abs() > 10.0 - LABEL_TOL || b[1].abs() > 10.0 - LABEL_TOL {
            0 // far beam ends: Dirichlet
        } else {
            1 // all side walls: flux boundary
        }
    })?;
    // Mark the shared plate as an interface for inspection; it carries no
    // boundary condition (both sides are interior).
    label_interface(&mut mesh, -1, &|b| {
        b[2].abs() < LABEL_TOL && b[0].abs() < 1.0 && b[1].abs() < 1.0
    })?;
    Ok(mesh)
}

/// Two-phase scalar coefficient on the crossing beams: `mu1` on the lower
/// beam {z < 0}, `mu2` on the upper beam and plate.
pub fn beams_two_phase(mu1: f64, mu2: f64) -> Result<CoefficientField> {
    CoefficientField::new(
        3,
        vec![
            CoefficientRegion {
                region: Polyhedron::new(vec![HalfSpace::new(&[0.0, 0.0, 1.0], 0.0)]),
                tensor: DMatrix::identity(3, 3) * mu1,
            },
            CoefficientRegion {
                region: Polyhedron::all(3),
                tensor: DMatrix::identity(3, 3) * mu2,
            },
        ],
    )
}

/// How the top edge y = 0 of the half square is labeled.
#[derive(Debug, Clone, Copy)]
enum HalfCubeTop {
    AllFlux,
    LeftFlux,
}

/// Mesh of (-1,1)x(-1,0) at h = 1/4 / 2^level, alternating diagonals so
/// the mesh is symmetric under x -> -x and extends symmetrically across
/// y = 0. Cell counts are even in both directions, so the origin is a
/// mesh vertex and the top-edge labels split cleanly at x = 0.
fn half_cube_mesh(level: usize, top: HalfCubeTop) -> Result<Mesh> {
    let ny = 4 << level;
    let nx = 2 * ny;
    let mut mesh = structured_rect(nx, ny, [-1.0, -1.0], [1.0, 0.0], DiagonalRule::Alternating);
    label_boundary(&mut mesh, &|b| {
        if b[1] > -LABEL_TOL {
            match top {
                HalfCubeTop::AllFlux => 1,
                HalfCubeTop::LeftFlux => {
                    if b[0] < 0.0 {
                        1
                    } else {
                        0
                    }
                }
            }
        } else {
            0
        }
    })?;
    Ok(mesh)
}

/// Mesh of (0,1)^2 at h = 1/4 / 2^level with Dirichlet on y = 0 only.
fn unit_square_mixed_mesh(level: usize) -> Result<Mesh> {
    let n = 4 << level;
    let mut mesh = structured_rect(n, n, [0.0, 0.0], [1.0, 1.0], DiagonalRule::Alternating);
    label_boundary(&mut mesh, &|b| if b[1] < LABEL_TOL { 0 } else { 1 })?;
    Ok(mesh)
}

/// Mesh of the unit triangle times (0,1) with the interface plane z = 1/2
/// resolved (even number of layers).
fn layered_prism_mesh(level: usize) -> Result<Mesh> {
    let k = 2 << level;
    let nz = 2 << level;
    let mut mesh = prism_mesh(k, nz);
    label_boundary(&mut mesh, &|b| {
        if b[2] < LABEL_TOL || b[2] > 1.0 - LABEL_TOL {
            0 // bottom and top
        } else if b[0] < LABEL_TOL {
            1 // vertical side face over the triangle edge x = 0
        } else {
            0 // the other two side faces
        }
    })?;
    label_interface(&mut mesh, -1, &|b| (b[2] - 0.5).abs() < LABEL_TOL)?;
    Ok(mesh)
}

/// Scalar 1 below the interface z = 1/2, scalar 2 above.
fn layered_prism_coefficient() -> Result<CoefficientField> {
    CoefficientField::new(
        3,
        vec![
            CoefficientRegion {
                region: Polyhedron::new(vec![HalfSpace::new(&[0.0, 0.0, 1.0], 0.5)]),
                tensor: DMatrix::identity(3, 3),
            },
            CoefficientRegion {
                region: Polyhedron::all(3),
                tensor: DMatrix::identity(3, 3) * 2.0,
            },
        ],
    )
}
