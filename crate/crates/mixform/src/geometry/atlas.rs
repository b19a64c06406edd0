//! Atlases: boundary patches with charts onto model configurations.
//!
//! An atlas entry pairs a sampling window around a boundary point with a
//! piecewise-affine chart and the model set its image must land in. The
//! validation sweep checks, per entry: determinant modulus, inverse
//! round-trip, continuity across piece faces, membership of mapped domain
//! points in the target model set, and empirical bi-Lipschitz ratios
//! against the chart's own piece-norm bounds.

use super::chart::{validate_chart, Chart};
use super::model::ModelSet;
use crate::sampling::halton_box;
use crate::Result;

/// Tolerance for the exactness checks (determinant, inverse, continuity,
/// membership). The chart data is dyadic-rational, so genuine passes sit at
/// zero or within a few ulps.
pub const ATLAS_TOL: f64 = 1e-12;

/// One chart of an atlas.
#[derive(Debug, Clone)]
pub struct AtlasEntry {
    pub id: String,
    /// Axis-aligned sampling window around the boundary point.
    pub patch_lo: Vec<f64>,
    pub patch_hi: Vec<f64>,
    pub chart: Chart,
    pub target: ModelSet,
    /// |det| every piece must have (volume preservation up to scale).
    pub expected_abs_det: f64,
}

/// A named collection of atlas entries covering the singular boundary.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub domain: String,
    pub entries: Vec<AtlasEntry>,
}

/// One row of an atlas validation report.
#[derive(Debug, Clone)]
pub struct ChartCheckRow {
    pub chart_id: String,
    pub check: String,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Run the full validation sweep over every entry.
///
/// `membership` decides whether a sampled patch point belongs to the domain
/// (charts are only required to behave on domain points).
pub fn validate_atlas(
    atlas: &Atlas,
    membership: &dyn Fn(&[f64]) -> bool,
    samples: usize,
) -> Result<Vec<ChartCheckRow>> {
    let mut rows = Vec::new();
    for e in &atlas.entries {
        let rep = validate_chart(
            &e.chart,
            e.expected_abs_det,
            &e.patch_lo,
            &e.patch_hi,
            samples,
        )?;
        rows.push(ChartCheckRow {
            chart_id: e.id.clone(),
            check: "det_modulus".into(),
            max_deviation: rep.max_det_deviation,
            pass: rep.max_det_deviation <= ATLAS_TOL,
        });
        rows.push(ChartCheckRow {
            chart_id: e.id.clone(),
            check: "inverse_roundtrip".into(),
            max_deviation: rep.max_inverse_residual,
            pass: rep.max_inverse_residual <= ATLAS_TOL,
        });
        rows.push(ChartCheckRow {
            chart_id: e.id.clone(),
            check: "face_continuity".into(),
            max_deviation: rep.max_continuity_deviation,
            pass: rep.max_continuity_deviation <= ATLAS_TOL,
        });

        // Membership: domain points of the patch must map into the target.
        let mut worst = 0.0_f64;
        let mut violations = 0usize;
        let mut mapped = 0usize;
        let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for p in halton_box(&e.patch_lo, &e.patch_hi, samples, 0) {
            if !membership(&p) {
                continue;
            }
            let img = e.chart.eval(&p)?;
            let v = e.target.violation(&img);
            worst = worst.max(v);
            if v > ATLAS_TOL {
                violations += 1;
            }
            mapped += 1;
            if pairs.len() < 512 {
                pairs.push((p, img));
            }
        }
        rows.push(ChartCheckRow {
            chart_id: e.id.clone(),
            check: "target_membership".into(),
            max_deviation: worst,
            pass: violations == 0 && mapped > 0,
        });

        // Empirical stretch ratios must respect the piece-norm bounds.
        let (fwd, bwd) = e.chart.lipschitz_bounds()?;
        let mut ratio_hi = 0.0_f64;
        let mut ratio_lo = f64::INFINITY;
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len().min(i + 16) {
                let dp = dist(&pairs[i].0, &pairs[j].0);
                let di = dist(&pairs[i].1, &pairs[j].1);
                if dp > 1e-9 {
                    ratio_hi = ratio_hi.max(di / dp);
                    ratio_lo = ratio_lo.min(di / dp);
                }
            }
        }
        let bilip_ok = ratio_hi <= fwd * (1.0 + 1e-9) && ratio_lo >= 1.0 / bwd * (1.0 - 1e-9);
        rows.push(ChartCheckRow {
            chart_id: e.id.clone(),
            check: "bilipschitz_ratio".into(),
            max_deviation: ratio_hi,
            pass: bilip_ok && ratio_lo.is_finite(),
        });
    }
    Ok(rows)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::AffineMap;
    use crate::geometry::model::ModelSetKind;

    #[test]
    fn identity_chart_on_model_set_validates() {
        // The half-plate model domain is its own chart target.
        let target = ModelSet::new(ModelSetKind::HalfCubeHalfPlate, 2, 1.0).unwrap();
        let atlas = Atlas {
            domain: "half_cube_half_plate".into(),
            entries: vec![AtlasEntry {
                id: "identity".into(),
                patch_lo: vec![-1.0, -1.0],
                patch_hi: vec![1.0, 1.0],
                chart: Chart::identity(2),
                target,
                expected_abs_det: 1.0,
            }],
        };
        let member = |p: &[f64]| target.violation(p) == 0.0 && p[1] < 0.0;
        let rows = validate_atlas(&atlas, &member, 400).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert!(r.pass, "{} failed with {}", r.check, r.max_deviation);
        }
    }

    #[test]
    fn membership_check_catches_wrong_target() {
        // A chart that shifts upward pushes domain points out of K₋.
        let target = ModelSet::new(ModelSetKind::HalfCube, 2, 1.0).unwrap();
        let atlas = Atlas {
            domain: "broken".into(),
            entries: vec![AtlasEntry {
                id: "shift_up".into(),
                patch_lo: vec![-1.0, -1.0],
                patch_hi: vec![1.0, 0.0],
                chart: Chart::global(AffineMap::shift(&[0.0, 0.5])),
                target,
                expected_abs_det: 1.0,
            }],
        };
        let member = |p: &[f64]| p[1] < 0.0;
        let rows = validate_atlas(&atlas, &member, 400).unwrap();
        let mem = rows.iter().find(|r| r.check == "target_membership").unwrap();
        assert!(!mem.pass);
        assert!(mem.max_deviation > 0.0);
    }
}
