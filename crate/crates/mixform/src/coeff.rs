//! Piecewise-constant symmetric coefficient tensors.
//!
//! A coefficient field is an ordered list of polyhedral regions, each
//! carrying one real symmetric positive definite d×d tensor; a cell of a
//! mesh takes the tensor of the first region containing its barycenter.
//! Only real symmetric data is admitted: the operator calculus downstream
//! (self-adjointness, spectral bounds, heat-kernel positivity) depends on
//! it, and every entry point enforces it rather than trusting callers.
//!
//! The transformation behavior under a piecewise-affine chart y = Ax + b is
//! the divergence-form pushforward μ ↦ A μ Aᵀ / |det A|, which is exactly
//! what makes ∫ μ∇u·∇v invariant: the two Jacobians of the gradients and
//! the volume element combine to this formula. Mirror extension across a
//! coordinate plane uses the sign-flipped tensor, so that the extended
//! operator commutes with the reflection.

use nalgebra::DMatrix;

use crate::geometry::halfspace::Polyhedron;
use crate::mesh::{CellLocator, Mesh};
use crate::{Error, Result};

/// Symmetry / positivity tolerance for admitting a tensor.
pub const TENSOR_TOL: f64 = 1e-12;

/// One region with one tensor.
#[derive(Debug, Clone)]
pub struct CoefficientRegion {
    pub region: Polyhedron,
    pub tensor: DMatrix<f64>,
}

/// Ordered piecewise-constant tensor field (first matching region wins).
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub dim: usize,
    pub regions: Vec<CoefficientRegion>,
}

/// Check that a tensor is real symmetric with all eigenvalues positive.
pub fn check_tensor(t: &DMatrix<f64>) -> Result<()> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch {
            detail: format!("tensor is {}x{}", t.nrows(), t.ncols()),
        });
    }
    for i in 0..t.nrows() {
        for j in 0..i {
            if (t[(i, j)] - t[(j, i)]).abs() > TENSOR_TOL {
                return Err(Error::DegenerateCoefficient {
                    detail: format!(
                        "tensor is not symmetric: entry ({}, {}) = {} vs {}",
                        i,
                        j,
                        t[(i, j)],
                        t[(j, i)]
                    ),
                });
            }
        }
    }
    let eig = t.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if !(min > TENSOR_TOL) {
        return Err(Error::DegenerateCoefficient {
            detail: format!("smallest tensor eigenvalue {} is not positive", min),
        });
    }
    Ok(())
}

impl CoefficientField {
    pub fn new(dim: usize, regions: Vec<CoefficientRegion>) -> Result<CoefficientField> {
        for r in &regions {
            if r.tensor.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "tensor dimension {} does not match field dimension {}",
                        r.tensor.nrows(),
                        dim
                    ),
                });
            }
            check_tensor(&r.tensor)?;
        }
        Ok(CoefficientField { dim, regions })
    }

    /// Spatially constant field.
    pub fn constant(tensor: DMatrix<f64>) -> Result<CoefficientField> {
        let dim = tensor.nrows();
        CoefficientField::new(
            dim,
            vec![CoefficientRegion { region: Polyhedron::all(dim), tensor }],
        )
    }

    /// Scalar multiple of the identity.
    pub fn scalar(dim: usize, value: f64) -> Result<CoefficientField> {
        CoefficientField::constant(DMatrix::identity(dim, dim) * value)
    }

    /// Tensor at a point, by first matching region.
    pub fn at(&self, p: &[f64]) -> Result<&DMatrix<f64>> {
        self.regions
            .iter()
            .find(|r| r.region.contains(p, 1e-12))
            .map(|r| &r.tensor)
            .ok_or_else(|| Error::CoefficientGap {
                detail: format!("no region covers the point {:?}", p),
            })
    }

    /// Assign a tensor to every cell of the mesh through its barycenter.
    pub fn bind(&self, mesh: &Mesh) -> Result<BoundCoefficient> {
        if mesh.dim != self.dim {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "field dimension {} vs mesh dimension {}",
                    self.dim, mesh.dim
                ),
            });
        }
        let mut per_cell = Vec::with_capacity(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let b = mesh.cell_barycenter(c);
            let t = self.at(&b).map_err(|_| Error::CoefficientGap {
                detail: format!("no region covers cell {} with barycenter {:?}", c, b),
            })?;
            per_cell.push(t.clone());
        }
        Ok(BoundCoefficient { dim: self.dim, per_cell })
    }
}

/// Per-cell tensors bound to a specific mesh.
#[derive(Debug, Clone)]
pub struct BoundCoefficient {
    pub dim: usize,
    pub per_cell: Vec<DMatrix<f64>>,
}

impl BoundCoefficient {
    pub fn constant(mesh: &Mesh, tensor: DMatrix<f64>) -> Result<BoundCoefficient> {
        check_tensor(&tensor)?;
        Ok(BoundCoefficient {
            dim: mesh.dim,
            per_cell: vec![tensor; mesh.n_cells()],
        })
    }
}

/// Divergence-form pushforward of one tensor under the affine map with
/// matrix `a`: A μ Aᵀ / |det A|.
pub fn pushforward_tensor(a: &DMatrix<f64>, mu: &DMatrix<f64>) -> DMatrix<f64> {
    let det = a.determinant().abs();
    a * mu * a.transpose() / det
}

/// Mirror a tensor across the coordinate plane of `axis`: entries with
/// exactly one index equal to `axis` flip sign. This is the congruence
/// with the reflection matrix, so the spectrum is unchanged.
pub fn reflect_tensor(mu: &DMatrix<f64>, axis: usize) -> DMatrix<f64> {
    let mut out = mu.clone();
    let d = mu.nrows();
    for i in 0..d {
        for j in 0..d {
            if (i == axis) != (j == axis) {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    out
}

/// Extend per-cell tensors from a half-domain mesh to its mirror extension:
/// cells of `full` on the kept side copy the tensor of the half-mesh cell
/// at the same barycenter, mirrored cells take the reflected tensor of the
/// mirrored barycenter. `axis`/`center` define the mirror plane; `below`
/// tells which side the half-mesh occupies.
pub fn extend_even(
    half: &BoundCoefficient,
    half_mesh: &Mesh,
    full_mesh: &Mesh,
    axis: usize,
    center: f64,
) -> Result<BoundCoefficient> {
    let locator = CellLocator::new(half_mesh);
    let mut per_cell = Vec::with_capacity(full_mesh.n_cells());
    for c in 0..full_mesh.n_cells() {
        let mut b = full_mesh.cell_barycenter(c);
        let mirrored = b[axis] > center;
        if mirrored {
            b[axis] = 2.0 * center - b[axis];
        }
        let (hc, _) = locator.locate(&b, 1e-9).ok_or_else(|| Error::IncompatibleMeshes {
            detail: format!("no half-mesh cell under barycenter {:?}", b),
        })?;
        let t = &half.per_cell[hc];
        per_cell.push(if mirrored { reflect_tensor(t, axis) } else { t.clone() });
    }
    Ok(BoundCoefficient { dim: full_mesh.dim, per_cell })
}

/// Robin/Neumann surface coefficients per positive boundary tag.
#[derive(Debug, Clone, Default)]
pub struct SurfaceCoefficient {
    pub per_tag: std::collections::BTreeMap<i32, f64>,
}

impl SurfaceCoefficient {
    pub fn none() -> SurfaceCoefficient {
        SurfaceCoefficient::default()
    }

    pub fn uniform(tag: i32, kappa: f64) -> Result<SurfaceCoefficient> {
        let mut s = SurfaceCoefficient::default();
        s.set(tag, kappa)?;
        Ok(s)
    }

    pub fn set(&mut self, tag: i32, kappa: f64) -> Result<()> {
        if tag <= 0 {
            return Err(Error::LabelError {
                detail: format!("surface coefficients attach to positive tags, got {}", tag),
            });
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::DegenerateCoefficient {
                detail: format!("surface coefficient must be finite and >= 0, got {}", kappa),
            });
        }
        self.per_tag.insert(tag, kappa);
        Ok(())
    }

    pub fn kappa(&self, tag: i32) -> f64 {
        *self.per_tag.get(&tag).unwrap_or(&0.0)
    }
}

/// Serialize a coefficient field in the key-value format. Floats use the
/// shortest round-trip representation, so read-back is bit-identical.
pub fn field_to_keyvalue(field: &CoefficientField) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "schema = coefficient-v1");
    let _ = writeln!(s, "dim = {}", field.dim);
    let _ = writeln!(s, "regions = {}", field.regions.len());
    for (k, r) in field.regions.iter().enumerate() {
        let _ = writeln!(s, "region.{}.halves = {}", k, r.region.halves.len());
        for (h, half) in r.region.halves.iter().enumerate() {
            let row: Vec<String> = half
                .normal
                .iter()
                .chain(std::iter::once(&half.offset))
                .map(|x| format!("{:?}", x))
                .collect();
            let _ = writeln!(s, "region.{}.half.{} = {}", k, h, row.join(" "));
        }
        // Record the tensor row-major for readability.
        let mut rm = Vec::with_capacity(field.dim * field.dim);
        for i in 0..field.dim {
            for j in 0..field.dim {
                rm.push(format!("{:?}", r.tensor[(i, j)]));
            }
        }
        let _ = writeln!(s, "region.{}.tensor = {}", k, rm.join(" "));
    }
    s
}

/// Parse the key-value coefficient format written by `field_to_keyvalue`.
pub fn field_from_keyvalue(text: &str) -> Result<CoefficientField> {
    let mut map = std::collections::HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::ConfigError {
            detail: format!("coefficient line without '=': '{}'", line),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    let schema = map.get("schema").cloned().unwrap_or_default();
    if schema != "coefficient-v1" {
        return Err(Error::ConfigError {
            detail: format!("unsupported coefficient schema '{}'", schema),
        });
    }
    let dim: usize = parse_field(&map, "dim")?;
    let n_regions: usize = parse_field(&map, "regions")?;
    let mut regions = Vec::with_capacity(n_regions);
    for k in 0..n_regions {
        let n_halves: usize = parse_field(&map, &format!("region.{}.halves", k))?;
        let mut halves = Vec::with_capacity(n_halves);
        for h in 0..n_halves {
            let raw = map
                .get(&format!("region.{}.half.{}", k, h))
                .ok_or_else(|| Error::ConfigError {
                    detail: format!("missing region.{}.half.{}", k, h),
                })?;
            let vals = parse_floats(raw)?;
            if vals.len() != dim + 1 {
                return Err(Error::ConfigError {
                    detail: format!("half-space line needs {} numbers", dim + 1),
                });
            }
            halves.push(crate::geometry::halfspace::HalfSpace::new(
                &vals[..dim],
                vals[dim],
            ));
        }
        let raw = map
            .get(&format!("region.{}.tensor", k))
            .ok_or_else(|| Error::ConfigError {
                detail: format!("missing region.{}.tensor", k),
            })?;
        let vals = parse_floats(raw)?;
        if vals.len() != dim * dim {
            return Err(Error::ConfigError {
                detail: format!("tensor needs {} entries, got {}", dim * dim, vals.len()),
            });
        }
        regions.push(CoefficientRegion {
            region: Polyhedron::new(halves),
            tensor: DMatrix::from_row_slice(dim, dim, &vals),
        });
    }
    CoefficientField::new(dim, regions)
}

fn parse_field<T: std::str::FromStr>(
    map: &std::collections::HashMap<String, String>,
    key: &str,
) -> Result<T> {
    map.get(key)
        .ok_or_else(|| Error::ConfigError {
            detail: format!("missing key '{}'", key),
        })?
        .parse::<T>()
        .map_err(|_| Error::ConfigError {
            detail: format!("unparsable value for '{}'", key),
        })
}

fn parse_floats(raw: &str) -> Result<Vec<f64>> {
    raw.split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::ConfigError {
                detail: format!("bad float '{}'", t),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::halfspace::HalfSpace;
    use crate::mesh::{structured_rect, DiagonalRule};

    #[test]
    fn tensors_must_be_symmetric_positive() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert_eq!(check_tensor(&bad).unwrap_err().code(), "DEGENERATE_COEFFICIENT");
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(check_tensor(&indef).unwrap_err().code(), "DEGENERATE_COEFFICIENT");
        let good = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        check_tensor(&good).unwrap();
    }

    #[test]
    fn binding_assigns_first_matching_region() {
        // Left half gets tensor 1·I, right half 5·I, with the left region
        // listed first and overlapping the seam.
        let left = CoefficientRegion {
            region: Polyhedron::new(vec![HalfSpace::new(&[1.0, 0.0], 0.5)]),
            tensor: DMatrix::identity(2, 2),
        };
        let right = CoefficientRegion {
            region: Polyhedron::all(2),
            tensor: DMatrix::identity(2, 2) * 5.0,
        };
        let field = CoefficientField::new(2, vec![left, right]).unwrap();
        let mesh = structured_rect(4, 2, [0.0, 0.0], [1.0, 1.0], DiagonalRule::Fixed);
        let bound = field.bind(&mesh).unwrap();
        for c in 0..mesh.n_cells() {
            let b = mesh.cell_barycenter(c);
            let expect = if b[0] <= 0.5 { 1.0 } else { 5.0 };
            assert_eq!(bound.per_cell[c][(0, 0)], expect);
        }
    }

    #[test]
    fn gap_is_detected() {
        let field = CoefficientField::new(
            2,
            vec![CoefficientRegion {
                region: Polyhedron::new(vec![HalfSpace::new(&[1.0, 0.0], 0.0)]),
                tensor: DMatrix::identity(2, 2),
            }],
        )
        .unwrap();
        let mesh = structured_rect(2, 2, [0.0, 0.0], [1.0, 1.0], DiagonalRule::Fixed);
        assert_eq!(field.bind(&mesh).unwrap_err().code(), "COEFFICIENT_GAP");
    }

    #[test]
    fn pushforward_of_identity_under_diagonal_stretch() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let mu = DMatrix::identity(2, 2);
        let push = pushforward_tensor(&a, &mu);
        assert_eq!(push[(0, 0)], 4.0);
        assert_eq!(push[(1, 1)], 0.25);
        assert_eq!(push[(0, 1)], 0.0);
    }

    #[test]
    fn pushforward_is_functorial() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -0.5, 0.5]);
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
        let mu = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let two_step = pushforward_tensor(&b, &pushforward_tensor(&a, &mu));
        let one_step = pushforward_tensor(&(&b * &a), &mu);
        for (x, y) in two_step.iter().zip(one_step.iter()) {
            assert!((x - y).abs() <= 1e-14);
        }
    }

    #[test]
    fn reflection_flips_off_diagonal_and_keeps_spectrum() {
        let mu = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let r = reflect_tensor(&mu, 1);
        assert_eq!(r[(0, 0)], 2.0);
        assert_eq!(r[(0, 1)], -1.0);
        assert_eq!(r[(1, 0)], -1.0);
        assert_eq!(r[(1, 1)], 3.0);
        // Both have eigenvalues (5 ± √5)/2.
        let e1 = mu.clone().symmetric_eigen().eigenvalues;
        let e2 = r.clone().symmetric_eigen().eigenvalues;
        let mut v1: Vec<f64> = e1.iter().copied().collect();
        let mut v2: Vec<f64> = e2.iter().copied().collect();
        v1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [(5.0 - 5.0_f64.sqrt()) / 2.0, (5.0 + 5.0_f64.sqrt()) / 2.0];
        for (v, e) in v1.iter().chain(v2.iter()).zip(expect.iter().cycle()) {
            assert!((v - e).abs() <= 1e-12);
        }
        // Involution: reflecting twice restores the tensor.
        assert_eq!(reflect_tensor(&r, 1), mu);
    }

    #[test]
    fn keyvalue_roundtrip_is_bit_identical() {
        let field = CoefficientField::new(
            2,
            vec![
                CoefficientRegion {
                    region: Polyhedron::new(vec![HalfSpace::new(&[1.0, 0.0], 1.0 / 3.0)]),
                    tensor: DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.1, 0.3]),
                },
                CoefficientRegion {
                    region: Polyhedron::all(2),
                    tensor: DMatrix::identity(2, 2) * std::f64::consts::PI,
                },
            ],
        )
        .unwrap();
        let text = field_to_keyvalue(&field);
        let back = field_from_keyvalue(&text).unwrap();
        assert_eq!(back.dim, field.dim);
        assert_eq!(back.regions.len(), 2);
        for (r1, r2) in field.regions.iter().zip(&back.regions) {
            assert_eq!(r1.tensor, r2.tensor);
            for (h1, h2) in r1.region.halves.iter().zip(&r2.region.halves) {
                assert_eq!(h1.normal, h2.normal);
                assert!(h1.offset == h2.offset);
            }
        }
        // And the re-serialization is byte-identical.
        assert_eq!(field_to_keyvalue(&back), text);
    }

    #[test]
    fn rejects_malformed_keyvalue() {
        assert!(field_from_keyvalue("schema = other\n").is_err());
        assert!(field_from_keyvalue("schema = coefficient-v1\ndim = 2\n").is_err());
        let missing_tensor =
            "schema = coefficient-v1\ndim = 2\nregions = 1\nregion.0.halves = 0\n";
        assert!(field_from_keyvalue(missing_tensor).is_err());
    }
}
