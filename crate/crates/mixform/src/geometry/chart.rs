//! Piecewise-affine charts: evaluation, inversion, composition, validation.
//!
//! A chart is a finite family of (closed polyhedral region, affine map)
//! pieces that agree on shared faces, so the glued map is continuous and
//! piecewise-affine. All concrete charts in this crate have dyadic-rational
//! matrices, which keeps determinants, inverses (computed by adjugate for
//! dimension ≤ 3), and compositions exact in floating point.

use nalgebra::{DMatrix, DVector};

use super::halfspace::{HalfSpace, Polyhedron};
use crate::sampling::halton_box;
use crate::{Error, Result};

/// Points on a closed piece boundary match within this slack during
/// evaluation; ties go to the first matching piece.
pub const EVAL_TOL: f64 = 1e-12;

/// Affine map x ↦ A x + b.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Self {
        assert_eq!(matrix.nrows(), offset.len());
        Self { matrix, offset }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim), DVector::zeros(dim))
    }

    /// Pure translation.
    pub fn shift(offset: &[f64]) -> Self {
        let d = offset.len();
        Self::new(DMatrix::identity(d, d), DVector::from_row_slice(offset))
    }

    /// From row-major matrix entries and an offset.
    pub fn from_rows(dim: usize, rows: &[f64], offset: &[f64]) -> Self {
        Self::new(
            DMatrix::from_row_slice(dim, dim, rows),
            DVector::from_row_slice(offset),
        )
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let x = DVector::from_row_slice(p);
        (&self.matrix * x + &self.offset).iter().copied().collect()
    }

    /// Determinant by direct cofactor expansion (exact for dyadic data).
    pub fn det(&self) -> f64 {
        det_small(&self.matrix)
    }

    /// Inverse map y ↦ A⁻¹(y − b), by adjugate for dimension ≤ 3.
    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = invert_small(&self.matrix).ok_or_else(|| Error::Singular {
            detail: "affine piece matrix is singular".into(),
        })?;
        let offset = -(&inv * &self.offset);
        Ok(AffineMap::new(inv, offset))
    }

    /// self ∘ other: first `other`, then `self`.
    pub fn after(&self, other: &AffineMap) -> AffineMap {
        AffineMap::new(
            &self.matrix * &other.matrix,
            &self.matrix * &other.offset + &self.offset,
        )
    }

    /// Operator 2-norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .fold(0.0_f64, |a, s| a.max(*s))
    }
}

fn det_small(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.determinant(),
    }
}

fn invert_small(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d = det_small(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    match m.nrows() {
        1 => Some(DMatrix::from_row_slice(1, 1, &[1.0 / d])),
        2 => Some(DMatrix::from_row_slice(
            2,
            2,
            &[
                m[(1, 1)] / d,
                -m[(0, 1)] / d,
                -m[(1, 0)] / d,
                m[(0, 0)] / d,
            ],
        )),
        3 => {
            // Adjugate transpose over determinant.
            let c = |i: usize, j: usize| -> f64 {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                m[(i1, j1)] * m[(i2, j2)] - m[(i1, j2)] * m[(i2, j1)]
            };
            let mut out = DMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    out[(i, j)] = c(j, i) / d;
                }
            }
            Some(out)
        }
        _ => m.clone().try_inverse(),
    }
}

/// One affine piece of a chart.
#[derive(Debug, Clone)]
pub struct Piece {
    pub region: Polyhedron,
    pub map: AffineMap,
}

impl Piece {
    pub fn new(region: Polyhedron, map: AffineMap) -> Self {
        Self { region, map }
    }
}

/// Continuous piecewise-affine chart on the union of its piece regions.
#[derive(Debug, Clone)]
pub struct Chart {
    pub dim: usize,
    pub pieces: Vec<Piece>,
}

impl Chart {
    pub fn new(dim: usize, pieces: Vec<Piece>) -> Self {
        assert!(!pieces.is_empty());
        for p in &pieces {
            assert_eq!(p.map.dim(), dim);
            for h in &p.region.halves {
                assert_eq!(h.normal.len(), dim);
            }
        }
        Self { dim, pieces }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, vec![Piece::new(Polyhedron::all(dim), AffineMap::identity(dim))])
    }

    /// Single affine piece defined everywhere.
    pub fn global(map: AffineMap) -> Self {
        let dim = map.dim();
        Self::new(dim, vec![Piece::new(Polyhedron::all(dim), map)])
    }

    /// Index of the first piece containing p, if any.
    pub fn piece_index(&self, p: &[f64]) -> Option<usize> {
        self.pieces.iter().position(|pc| pc.region.contains(p, EVAL_TOL))
    }

    /// Evaluate the chart; ties on shared faces resolve to the first piece,
    /// which is harmless because adjacent pieces agree there.
    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                detail: format!("point has {} coords, chart dimension is {}", p.len(), self.dim),
            });
        }
        match self.piece_index(p) {
            Some(i) => Ok(self.pieces[i].map.apply(p)),
            None => Err(Error::OutOfRegion { point: p.to_vec() }),
        }
    }

    /// Determinant of the piece active at p.
    pub fn det_at(&self, p: &[f64]) -> Result<f64> {
        match self.piece_index(p) {
            Some(i) => Ok(self.pieces[i].map.det()),
            None => Err(Error::OutOfRegion { point: p.to_vec() }),
        }
    }

    /// Inverse chart: regions are forward images, maps are piece inverses.
    pub fn inverse(&self) -> Result<Chart> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for pc in &self.pieces {
            let inv = pc.map.inverse()?;
            pieces.push(Piece::new(map_region(&pc.region, &pc.map)?, inv));
        }
        Ok(Chart::new(self.dim, pieces))
    }

    /// Composite `second ∘ first`, with pieces refined along pullback
    /// regions. Pieces whose refined region has empty interior are dropped.
    ///
    /// Fails with REGION_MISMATCH when sampled points of `first`'s region
    /// map outside `second`'s region (checked on a bounded sample window).
    pub fn compose(first: &Chart, second: &Chart) -> Result<Chart> {
        if first.dim != second.dim {
            return Err(Error::DimensionMismatch {
                detail: "composed charts must share a dimension".into(),
            });
        }
        let dim = first.dim;
        let mut pieces = Vec::new();
        for pf in &first.pieces {
            for ps in &second.pieces {
                let region = pf.region.intersect(&pullback_region(&ps.region, &pf.map));
                if region.has_interior(dim) {
                    pieces.push(Piece::new(region, ps.map.after(&pf.map)));
                }
            }
        }
        if pieces.is_empty() {
            return Err(Error::RegionMismatch {
                detail: "no composite piece has interior".into(),
            });
        }
        // Coverage probe: the image of first must land in second's region.
        let lo = vec![-16.0; dim];
        let hi = vec![16.0; dim];
        for p in &halton_box(&lo, &hi, 256, 0) {
            if first.piece_index(p).is_some() {
                let img = first.eval(p)?;
                if second.piece_index(&img).is_none() {
                    return Err(Error::RegionMismatch {
                        detail: format!(
                            "image point {:?} of {:?} escapes the second chart's region",
                            img, p
                        ),
                    });
                }
            }
        }
        Ok(Chart::new(dim, pieces))
    }

    /// Cylinder lift to `dim` coordinates: the chart acts on the final two
    /// coordinates and leaves the leading ones untouched.
    pub fn lift_last_two(&self, dim: usize) -> Chart {
        assert_eq!(self.dim, 2);
        assert!(dim >= 2);
        let lead = dim - 2;
        let pieces = self
            .pieces
            .iter()
            .map(|pc| {
                let halves = pc
                    .region
                    .halves
                    .iter()
                    .map(|h| {
                        let mut n = vec![0.0; dim];
                        n[lead] = h.normal[0];
                        n[lead + 1] = h.normal[1];
                        HalfSpace::new(&n, h.offset)
                    })
                    .collect();
                let mut matrix = DMatrix::identity(dim, dim);
                let mut offset = DVector::zeros(dim);
                for i in 0..2 {
                    for j in 0..2 {
                        matrix[(lead + i, lead + j)] = pc.map.matrix[(i, j)];
                    }
                    offset[lead + i] = pc.map.offset[i];
                }
                Piece::new(Polyhedron::new(halves), AffineMap::new(matrix, offset))
            })
            .collect();
        Chart::new(dim, pieces)
    }

    /// (forward, inverse) Lipschitz constants: the largest piece operator
    /// norms of the map and of its inverse.
    pub fn lipschitz_bounds(&self) -> Result<(f64, f64)> {
        let mut fwd = 0.0_f64;
        let mut bwd = 0.0_f64;
        for pc in &self.pieces {
            fwd = fwd.max(pc.map.operator_norm());
            bwd = bwd.max(pc.map.inverse()?.operator_norm());
        }
        Ok((fwd, bwd))
    }
}

/// Forward image of a region: n·x ≤ c becomes (A⁻ᵀn)·y ≤ c + (A⁻ᵀn)·b.
fn map_region(region: &Polyhedron, map: &AffineMap) -> Result<Polyhedron> {
    let inv = invert_small(&map.matrix).ok_or_else(|| Error::Singular {
        detail: "cannot push a region through a singular map".into(),
    })?;
    let inv_t = inv.transpose();
    let halves = region
        .halves
        .iter()
        .map(|h| {
            let n = DVector::from_row_slice(&h.normal);
            let m = &inv_t * n;
            let offset = h.offset + m.dot(&map.offset);
            HalfSpace::new(m.as_slice(), offset)
        })
        .collect();
    Ok(Polyhedron::new(halves))
}

/// Pullback of a region under an affine map: n·(Ax+b) ≤ c.
fn pullback_region(region: &Polyhedron, map: &AffineMap) -> Polyhedron {
    let at = map.matrix.transpose();
    let halves = region
        .halves
        .iter()
        .map(|h| {
            let n = DVector::from_row_slice(&h.normal);
            let m = &at * &n;
            let offset = h.offset - n.dot(&map.offset);
            HalfSpace::new(m.as_slice(), offset)
        })
        .collect();
    Polyhedron::new(halves)
}

/// Summary of a chart validation sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChartReport {
    /// max over sampled points of | |det| − expected |.
    pub max_det_deviation: f64,
    /// max over sampled points of |φ⁻¹(φ(p)) − p|∞.
    pub max_inverse_residual: f64,
    /// max over sampled shared-face points of |φᵢ(p) − φⱼ(p)|∞.
    pub max_continuity_deviation: f64,
    /// Number of sampled points that hit the chart region.
    pub points_checked: usize,
}

/// Validate determinant modulus, inverse residual, and face continuity of a
/// chart by a deterministic Halton sweep over the box lo..hi.
pub fn validate_chart(
    chart: &Chart,
    expected_abs_det: f64,
    lo: &[f64],
    hi: &[f64],
    samples: usize,
) -> Result<ChartReport> {
    let inv = chart.inverse()?;
    let mut rep = ChartReport::default();
    for p in halton_box(lo, hi, samples, 0) {
        if chart.piece_index(&p).is_none() {
            continue;
        }
        rep.points_checked += 1;
        let det = chart.det_at(&p)?;
        rep.max_det_deviation = rep.max_det_deviation.max((det.abs() - expected_abs_det).abs());
        let img = chart.eval(&p)?;
        let back = inv.eval(&img)?;
        let res = back
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        rep.max_inverse_residual = rep.max_inverse_residual.max(res);
    }
    rep.max_continuity_deviation = continuity_deviation(chart, lo, hi, samples.max(64));
    Ok(rep)
}

/// Sample shared faces of adjacent piece pairs. Pieces in this crate are
/// always separated by full hyperplanes (one region carries n·x ≤ c, the
/// neighbor carries the flipped constraint), so shared faces are found by
/// matching complementary half-spaces and projecting sample points onto
/// the common hyperplane.
fn continuity_deviation(chart: &Chart, lo: &[f64], hi: &[f64], samples: usize) -> f64 {
    let mut worst = 0.0_f64;
    let pts = halton_box(lo, hi, samples, 1000);
    for i in 0..chart.pieces.len() {
        for j in (i + 1)..chart.pieces.len() {
            let (pi, pj) = (&chart.pieces[i], &chart.pieces[j]);
            for h in &pi.region.halves {
                let flipped = h.flipped();
                let shares = pj.region.halves.iter().any(|g| close_half(g, &flipped));
                if !shares {
                    continue;
                }
                let n2: f64 = h.normal.iter().map(|v| v * v).sum();
                if n2 == 0.0 {
                    continue;
                }
                for p in &pts {
                    // Orthogonal projection onto the hyperplane n·x = c.
                    let s = (h.normal.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
                        - h.offset)
                        / n2;
                    let q: Vec<f64> = p
                        .iter()
                        .zip(&h.normal)
                        .map(|(v, nv)| v - s * nv)
                        .collect();
                    if pi.region.contains(&q, 1e-9) && pj.region.contains(&q, 1e-9) {
                        let a = pi.map.apply(&q);
                        let b = pj.map.apply(&q);
                        let dev = a
                            .iter()
                            .zip(&b)
                            .map(|(x, y)| (x - y).abs())
                            .fold(0.0_f64, f64::max);
                        worst = worst.max(dev);
                    }
                }
            }
        }
    }
    worst
}

fn close_half(a: &HalfSpace, b: &HalfSpace) -> bool {
    let ma = a.normal.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mb = b.normal.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if ma == 0.0 || mb == 0.0 {
        return false;
    }
    a.normal
        .iter()
        .zip(&b.normal)
        .all(|(x, y)| (x / ma - y / mb).abs() <= 1e-12)
        && (a.offset / ma - b.offset / mb).abs() <= 1e-12
}
