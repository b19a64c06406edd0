//! The three model configurations a regular boundary point is charted onto.
//!
//! With K = (−α,α)^d the open cube, K₋ = K ∩ {x_d < 0} the lower half-cube,
//! Σ = K ∩ {x_d = 0} the equatorial plate, and Σ₀ = Σ ∩ {x_{d−1} < 0} its
//! left half, the model sets are K₋ (pure Dirichlet near the point),
//! K₋ ∪ Σ (pure Neumann), and K₋ ∪ Σ₀ (the mixed configuration where the
//! boundary condition changes across the edge of Σ₀).

use crate::{Error, Result};

/// Which of the three half-cube configurations a chart targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSetKind {
    /// K₋: the open lower half-cube.
    HalfCube,
    /// K₋ ∪ Σ: lower half-cube with its full top plate.
    HalfCubePlate,
    /// K₋ ∪ Σ₀: lower half-cube with the left half of the top plate.
    HalfCubeHalfPlate,
}

/// A scaled model configuration α·(K₋ ∪ ...) in dimension d ≥ 2.
#[derive(Debug, Clone, Copy)]
pub struct ModelSet {
    pub kind: ModelSetKind,
    pub dim: usize,
    pub scale: f64,
}

impl ModelSet {
    pub fn new(kind: ModelSetKind, dim: usize, scale: f64) -> Result<Self> {
        if scale <= 0.0 {
            return Err(Error::NonpositiveScale { scale });
        }
        assert!(dim >= 2);
        Ok(Self { kind, dim, scale })
    }

    /// Largest constraint excess of p relative to the model set; 0 means p
    /// lies in the set (up to the plate-thickness reading of Σ below).
    ///
    /// Box coordinates must satisfy |p_k| < α strictly; the vertical
    /// coordinate must satisfy p_d < 0, except that points with p_d = 0 are
    /// admitted on Σ (plate kinds) or on Σ₀ (half-plate kind). For a point
    /// with p_d = 0 on the excluded plate half, the excess is its distance
    /// p_{d−1} from the admitted half.
    pub fn violation(&self, p: &[f64]) -> f64 {
        assert_eq!(p.len(), self.dim);
        let a = self.scale;
        let d = self.dim;
        let mut v = 0.0_f64;
        for &x in &p[..d - 1] {
            v = v.max(x.abs() - a);
        }
        v = v.max(-a - p[d - 1]);
        let vertical = match self.kind {
            // p_d ≤ 0, with p_d = 0 only admitted for the plate kinds.
            ModelSetKind::HalfCube => p[d - 1],
            ModelSetKind::HalfCubePlate => p[d - 1].max(0.0),
            ModelSetKind::HalfCubeHalfPlate => {
                if p[d - 1] < 0.0 {
                    0.0
                } else if p[d - 1] == 0.0 {
                    // On the plate: only the half p_{d−1} < 0 belongs.
                    p[d - 2].max(0.0)
                } else {
                    p[d - 1]
                }
            }
        };
        v.max(vertical)
    }

    /// Membership with tolerance on the constraint excess.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.violation(p) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_must_be_positive() {
        let err = ModelSet::new(ModelSetKind::HalfCube, 2, 0.0).unwrap_err();
        assert_eq!(err.code(), "NONPOSITIVE_SCALE");
    }

    #[test]
    fn half_cube_membership() {
        let m = ModelSet::new(ModelSetKind::HalfCube, 2, 1.0).unwrap();
        assert!(m.contains(&[0.5, -0.5], 0.0));
        // p_d = 0 sits on the boundary of K₋: zero excess distance.
        assert_eq!(m.violation(&[0.5, 0.0]), 0.0);
        assert_eq!(m.violation(&[0.5, 0.25]), 0.25);
        assert_eq!(m.violation(&[1.5, -0.5]), 0.5);
    }

    #[test]
    fn plate_and_half_plate_membership() {
        let full = ModelSet::new(ModelSetKind::HalfCubePlate, 2, 1.0).unwrap();
        assert_eq!(full.violation(&[0.5, 0.0]), 0.0);
        assert_eq!(full.violation(&[-0.5, 0.0]), 0.0);

        let half = ModelSet::new(ModelSetKind::HalfCubeHalfPlate, 2, 1.0).unwrap();
        assert_eq!(half.violation(&[-0.5, 0.0]), 0.0);
        // Right half of the plate is excluded; distance is the x-overhang.
        assert_eq!(half.violation(&[0.5, 0.0]), 0.5);
        assert_eq!(half.violation(&[0.5, -0.25]), 0.0);
    }

    #[test]
    fn three_dimensional_half_plate() {
        let half = ModelSet::new(ModelSetKind::HalfCubeHalfPlate, 3, 2.0).unwrap();
        assert_eq!(half.violation(&[1.0, -1.0, 0.0]), 0.0);
        assert_eq!(half.violation(&[1.0, 1.0, 0.0]), 1.0);
        assert_eq!(half.violation(&[1.0, 1.0, -0.5]), 0.0);
        assert_eq!(half.violation(&[3.0, -1.0, -0.5]), 1.0);
    }
}
