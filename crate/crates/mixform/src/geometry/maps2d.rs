//! The explicit planar maps used to unfold the mixed model configuration.
//!
//! The composite built here takes K₋ ∪ Σ₀ (half-cube with half plate, the
//! configuration where the boundary condition changes) onto K₋ ∪ Σ (full
//! plate), in three volume-preserving piecewise-affine stages:
//!
//! 1. `rho1` folds the plane toward the lower half along the diagonals,
//!    with |det| = 1/2 on each of its eight sectors;
//! 2. `rho2` shears the two half-planes x ≤ 0 and x ≥ 0 upward, det = 2;
//! 3. `rho43` is the product of the clockwise π/4 rotation and the
//!    diagonal rescale diag(√2, 1/√2) with a −1/2 vertical shift. The two
//!    irrational factors cancel, so the fused map has the exact rational
//!    matrix [[1, 1], [−1/2, 1/2]] and det 1.
//!
//! Every piece determinant of the composite is therefore (1/2)·2·1 = 1
//! exactly in floating point.

use nalgebra::{DMatrix, DVector};

use super::chart::{AffineMap, Chart, Piece};
use super::halfspace::{HalfSpace, Polyhedron};

fn region(rows: &[(&[f64], f64)]) -> Polyhedron {
    Polyhedron::new(
        rows.iter()
            .map(|(n, c)| HalfSpace::new(n, *c))
            .collect(),
    )
}

fn piece(rows: &[(&[f64], f64)], matrix: &[f64]) -> Piece {
    Piece::new(region(rows), AffineMap::from_rows(2, matrix, &[0.0, 0.0]))
}

/// Eightfold diagonal fold. On the lower half-plane it compresses each of
/// the four sectors cut by the diagonals y = ±x into half its width; the
/// upper half-plane is the mirror image under y ↦ −y. Fixes the x-axis
/// pointwise; |det| = 1/2 on every sector.
pub fn rho1() -> Chart {
    Chart::new(
        2,
        vec![
            // Lower half, left of the diagonal y = x: (x − y/2, y/2).
            piece(
                &[(&[0.0, 1.0], 0.0), (&[1.0, 0.0], 0.0), (&[1.0, -1.0], 0.0)],
                &[1.0, -0.5, 0.0, 0.5],
            ),
            // Below the diagonal y = x, x ≤ 0: (x/2, −x/2 + y).
            piece(
                &[(&[1.0, 0.0], 0.0), (&[-1.0, 1.0], 0.0)],
                &[0.5, 0.0, -0.5, 1.0],
            ),
            // Below the anti-diagonal y = −x, x ≥ 0: (x/2, x/2 + y).
            piece(
                &[(&[-1.0, 0.0], 0.0), (&[1.0, 1.0], 0.0)],
                &[0.5, 0.0, 0.5, 1.0],
            ),
            // Lower half, right of y = −x: (x + y/2, y/2).
            piece(
                &[(&[-1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0), (&[-1.0, -1.0], 0.0)],
                &[1.0, 0.5, 0.0, 0.5],
            ),
            // Mirror images for the upper half-plane.
            piece(
                &[(&[0.0, -1.0], 0.0), (&[1.0, 0.0], 0.0), (&[1.0, 1.0], 0.0)],
                &[1.0, 0.5, 0.0, 0.5],
            ),
            piece(
                &[(&[1.0, 0.0], 0.0), (&[-1.0, -1.0], 0.0)],
                &[0.5, 0.0, 0.5, 1.0],
            ),
            piece(
                &[(&[-1.0, 0.0], 0.0), (&[1.0, -1.0], 0.0)],
                &[0.5, 0.0, -0.5, 1.0],
            ),
            piece(
                &[(&[-1.0, 0.0], 0.0), (&[0.0, -1.0], 0.0), (&[-1.0, 1.0], 0.0)],
                &[1.0, -0.5, 0.0, 0.5],
            ),
        ],
    )
}

/// Two-piece upward shear: (x, x + 2y + 1) for x ≤ 0 and (x, −x + 2y + 1)
/// for x ≥ 0, continuous across x = 0 with det = 2 on both pieces.
pub fn rho2() -> Chart {
    Chart::new(
        2,
        vec![
            Piece::new(
                region(&[(&[1.0, 0.0], 0.0)]),
                AffineMap::from_rows(2, &[1.0, 0.0, 1.0, 2.0], &[0.0, 1.0]),
            ),
            Piece::new(
                region(&[(&[-1.0, 0.0], 0.0)]),
                AffineMap::from_rows(2, &[1.0, 0.0, -1.0, 2.0], &[0.0, 1.0]),
            ),
        ],
    )
}

/// Clockwise rotation by π/4: (x, y) ↦ ((x + y)/√2, (y − x)/√2).
pub fn rho3_rotation() -> AffineMap {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    AffineMap::new(
        DMatrix::from_row_slice(2, 2, &[s, s, -s, s]),
        DVector::zeros(2),
    )
}

/// Diagonal rescale diag(√2, 1/√2) followed by the shift (0, −1/2).
pub fn rho4_rescale() -> AffineMap {
    let r = std::f64::consts::SQRT_2;
    AffineMap::new(
        DMatrix::from_row_slice(2, 2, &[r, 0.0, 0.0, 1.0 / r]),
        DVector::from_row_slice(&[0.0, -0.5]),
    )
}

/// The fused product of `rho4_rescale` and `rho3_rotation`: the irrational
/// factors cancel to the exact rational map
/// (x, y) ↦ (x + y, (y − x)/2 − 1/2), det 1.
pub fn rho43() -> Chart {
    Chart::global(AffineMap::from_rows(
        2,
        &[1.0, 1.0, -0.5, 0.5],
        &[0.0, -0.5],
    ))
}

/// The full unfolding composite rho43 ∘ rho2 ∘ rho1. It maps the closure of
/// K₋ ∪ Σ₀ onto the closure of K₋ ∪ Σ for the unit scale, sending the half
/// plate Σ₀ = (−1, 0) × {0} onto the full plate Σ = (−1, 1) × {0}; every
/// piece has det exactly 1.
pub fn half_plate_unfolding() -> Chart {
    let a = Chart::compose(&rho1(), &rho2()).expect("rho2 is globally defined");
    Chart::compose(&a, &rho43()).expect("rho43 is globally defined")
}

/// Unfolds the open quadrant {x > 0, y > 0} onto the half-plane {y > 0}:
/// the quarter-turn (x, y) ↦ (−y, x) above the diagonal and the shear
/// (x, y) ↦ (x − 2y, y) below it, both with det 1, agreeing on y = x.
pub fn wedge_unfold_2d() -> Chart {
    Chart::new(
        2,
        vec![
            piece(&[(&[1.0, -1.0], 0.0)], &[0.0, -1.0, 1.0, 0.0]),
            piece(&[(&[-1.0, 1.0], 0.0)], &[1.0, -2.0, 0.0, 1.0]),
        ],
    )
}
