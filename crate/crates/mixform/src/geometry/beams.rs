//! The crossing-beams domain and its singular-corner charts.
//!
//! Two open beams cross at right angles, one running along x below the
//! plane {z = 0} and one along y above it, glued through the open square
//! plate where they overlap:
//!
//! B = ]−10,10[ × ]−1,1[ × ]−2,0[  ∪  ]−1,1[ × ]−10,10[ × ]0,2[
//!      ∪  ]−1,1[ × ]−1,1[ × {0}.
//!
//! The domain is a topological ball but not a Lipschitz graph domain: at
//! the four plate corners (±1, ±1, 0) the boundary is genuinely singular.
//! Each corner still admits a volume-preserving piecewise-affine chart onto
//! a scaled lower half-cube, built from three elementary unfolding steps
//! (a tent fold flattening the two beams into {z < 0}, a sector
//! straightening making the image convex, and a final wedge unfold).

use super::atlas::{Atlas, AtlasEntry};
use super::chart::{AffineMap, Chart, Piece};
use super::halfspace::{HalfSpace, Polyhedron};
use super::model::{ModelSet, ModelSetKind};
use crate::{Error, Result};

/// The four singular plate corners.
pub const SINGULAR_CORNERS: [[f64; 3]; 4] = [
    [1.0, -1.0, 0.0],
    [1.0, 1.0, 0.0],
    [-1.0, -1.0, 0.0],
    [-1.0, 1.0, 0.0],
];

/// Half-side of the sampling patch around each corner.
pub const CORNER_PATCH_HALF_SIDE: f64 = 0.5;

/// Scale of the half-cube model the corner charts map into.
pub const CORNER_MODEL_SCALE: f64 = 4.0;

/// Exact open-set membership in the crossing-beams domain. The plate is
/// the measure-zero glue {z = 0}, tested with an exact comparison.
pub fn beams_membership(p: &[f64]) -> bool {
    let (x, y, z) = (p[0], p[1], p[2]);
    let beam_x = x > -10.0 && x < 10.0 && y > -1.0 && y < 1.0 && z > -2.0 && z < 0.0;
    let beam_y = x > -1.0 && x < 1.0 && y > -10.0 && y < 10.0 && z > 0.0 && z < 2.0;
    let plate = x > -1.0 && x < 1.0 && y > -1.0 && y < 1.0 && z == 0.0;
    beam_x || beam_y || plate
}

fn wedge(normal: [f64; 3], offset: f64) -> Polyhedron {
    Polyhedron::new(vec![HalfSpace::new(&normal, offset)])
}

/// Tent fold: leaves y alone, and in the (x, z) plane applies the quarter
/// turn (x, z) ↦ (−z, x) on {z ≥ x} and the shear (x, z) ↦ (x − 2z, z) on
/// {z ≤ x}. Both pieces have det 1 and agree on the seam z = x. Near the
/// origin it folds the two beam directions of the (shifted) domain into
/// the lower half-space {z < 0}.
pub fn tent_fold() -> Chart {
    Chart::new(
        3,
        vec![
            Piece::new(
                wedge([1.0, 0.0, -1.0], 0.0),
                AffineMap::from_rows(
                    3,
                    &[0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0],
                    &[0.0, 0.0, 0.0],
                ),
            ),
            Piece::new(
                wedge([-1.0, 0.0, 1.0], 0.0),
                AffineMap::from_rows(
                    3,
                    &[1.0, 0.0, -2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    &[0.0, 0.0, 0.0],
                ),
            ),
        ],
    )
}

/// Sector straightening: applies (x, y, z) ↦ (2x + y, −x, z) on the sector
/// {x + y ≤ 0} and the identity on {x + y ≥ 0}; both pieces fix the seam
/// y = −x pointwise and have det 1. After the tent fold this turns the
/// folded two-box image into a single convex box in {y > 0, z < 0}.
pub fn sector_straighten() -> Chart {
    Chart::new(
        3,
        vec![
            Piece::new(
                wedge([1.0, 1.0, 0.0], 0.0),
                AffineMap::from_rows(
                    3,
                    &[2.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                    &[0.0, 0.0, 0.0],
                ),
            ),
            Piece::new(wedge([-1.0, -1.0, 0.0], 0.0), AffineMap::identity(3)),
        ],
    )
}

/// Final unfold of the wedge {y > 0, z < 0} onto the half-space {z < 0}:
/// (x, y, z) ↦ (x, z, −y) on {y + z ≤ 0} and (x, y, z) ↦ (x, y + 2z, z) on
/// {y + z ≥ 0}, det 1 on both pieces, agreeing on y = −z. The two wedge
/// faces {y = 0} and {z = 0} both land on the plane {z = 0}.
pub fn corner_unfold() -> Chart {
    Chart::new(
        3,
        vec![
            Piece::new(
                wedge([0.0, 1.0, 1.0], 0.0),
                AffineMap::from_rows(
                    3,
                    &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0],
                    &[0.0, 0.0, 0.0],
                ),
            ),
            Piece::new(
                wedge([0.0, -1.0, -1.0], 0.0),
                AffineMap::from_rows(
                    3,
                    &[1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 1.0],
                    &[0.0, 0.0, 0.0],
                ),
            ),
        ],
    )
}

/// Chart for one singular corner: reflect the corner onto the reference
/// corner (1, −1, 0), translate it to the origin, then unfold with the
/// three elementary steps. The result maps patch points of the domain into
/// the open half-cube of scale [`CORNER_MODEL_SCALE`], with |det| = 1 on
/// every piece, and sends the corner itself to the origin.
pub fn crossing_beams_corner_chart(corner: &[f64]) -> Result<AtlasEntry> {
    let is_corner = SINGULAR_CORNERS
        .iter()
        .any(|c| c[0] == corner[0] && c[1] == corner[1] && c[2] == corner[2])
        && corner.len() == 3;
    if !is_corner {
        return Err(Error::NotSingularCorner { point: corner.to_vec() });
    }
    let (cx, cy) = (corner[0], corner[1]);
    // diag(cx, −cy, 1) maps the corner to (1, −1, 0) and fixes the domain.
    let reflect = Chart::global(AffineMap::from_rows(
        3,
        &[cx, 0.0, 0.0, 0.0, -cy, 0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0],
    ));
    let shift = Chart::global(AffineMap::shift(&[-1.0, 1.0, 0.0]));
    let chain = [shift, tent_fold(), sector_straighten(), corner_unfold()];
    let mut chart = reflect;
    for next in chain {
        chart = Chart::compose(&chart, &next)?;
    }
    let h = CORNER_PATCH_HALF_SIDE;
    Ok(AtlasEntry {
        id: format!(
            "corner_{}{}",
            if cx > 0.0 { "p" } else { "m" },
            if cy > 0.0 { "p" } else { "m" }
        ),
        patch_lo: vec![corner[0] - h, corner[1] - h, corner[2] - h],
        patch_hi: vec![corner[0] + h, corner[1] + h, corner[2] + h],
        chart,
        target: ModelSet::new(ModelSetKind::HalfCube, 3, CORNER_MODEL_SCALE)?,
        expected_abs_det: 1.0,
    })
}

/// Atlas holding the four singular-corner charts.
pub fn crossing_beams_atlas() -> Result<Atlas> {
    let entries = SINGULAR_CORNERS
        .iter()
        .map(|c| crossing_beams_corner_chart(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(Atlas { domain: "crossing_beams".into(), entries })
}
