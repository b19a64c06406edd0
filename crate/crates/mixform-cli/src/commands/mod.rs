//! The five run modes. Each reads its validated config, writes deterministic
//! reports plus a manifest into the output directory, and returns whether
//! every check row passed.

pub mod convergence;
pub mod elliptic;
pub mod geometry;
pub mod parabolic;
pub mod spectral;

use mixform::mesh::Mesh;
use mixform::{Error, Result};

/// Axis-aligned bounding box of the mesh vertices.
pub fn mesh_bbox(mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
    let d = mesh.dim;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..mesh.n_vertices() {
        let v = mesh.vertex(i);
        for k in 0..d {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

/// Deterministic Gaussian bump: centered in the bounding box, width one
/// eighth of the box diagonal.
pub fn bump_params(mesh: &Mesh) -> (Vec<f64>, f64) {
    let (lo, hi) = mesh_bbox(mesh);
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let diag: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    (center, diag / 8.0)
}

/// Named scalar profiles shared by loads, sources, and initial states.
pub fn named_field(name: &str, mesh: &Mesh) -> Result<Box<dyn Fn(&[f64]) -> f64>> {
    use std::f64::consts::PI;
    match name {
        "ZERO" => Ok(Box::new(|_: &[f64]| 0.0)),
        "ONE" => Ok(Box::new(|_: &[f64]| 1.0)),
        "SINE" => {
            // One half wave per bounding-box extent, zero on the box faces.
            let d = mesh.dim;
            let (lo, hi) = mesh_bbox(mesh);
            Ok(Box::new(move |p: &[f64]| {
                (0..d)
                    .map(|k| (PI * (p[k] - lo[k]) / (hi[k] - lo[k])).sin())
                    .product()
            }))
        }
        "BUMP" => {
            let (center, width) = bump_params(mesh);
            Ok(Box::new(move |p: &[f64]| {
                let r2: f64 = p
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (-r2 / (2.0 * width * width)).exp()
            }))
        }
        other => Err(Error::ConfigError {
            detail: format!(
                "unknown field profile '{}'; valid: ZERO, ONE, SINE, BUMP",
                other
            ),
        }),
    }
}
