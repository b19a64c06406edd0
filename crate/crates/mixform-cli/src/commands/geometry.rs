//! `check-geometry`: validate a chart atlas against its model targets.

use std::path::Path;

use mixform::geometry::atlas::{validate_atlas, Atlas, AtlasEntry};
use mixform::geometry::beams::{beams_membership, crossing_beams_atlas};
use mixform::geometry::maps2d::half_plate_unfolding;
use mixform::geometry::model::{ModelSet, ModelSetKind};
use mixform::report::{chart_rows_to_csv, emit, write_manifest};
use mixform::{Error, Result};

use crate::config::Config;

pub const ALLOWED_KEYS: &[&str] = &["atlas", "samples"];

pub fn run(cfg: &Config, out: &Path, _seed: u64) -> Result<bool> {
    let samples: usize = cfg.get_or("samples", 2000)?;
    let atlas_name = cfg.require("atlas")?;
    let rows = match atlas_name {
        "CROSSING_BEAMS" => {
            let atlas = crossing_beams_atlas()?;
            validate_atlas(&atlas, &beams_membership, samples)?
        }
        "HALF_PLATE_UNFOLDING" => {
            // The planar unfolding maps the lower half square with its
            // partially Neumann top edge onto the model with the full
            // Neumann plate; the chart is volume-preserving piece by piece.
            let domain_model = ModelSet::new(ModelSetKind::HalfCubeHalfPlate, 2, 1.0)?;
            let entry = AtlasEntry {
                id: "half_plate_unfolding".into(),
                patch_lo: vec![-1.0, -1.0],
                patch_hi: vec![1.0, 0.0],
                chart: half_plate_unfolding(),
                target: ModelSet::new(ModelSetKind::HalfCubePlate, 2, 1.0)?,
                expected_abs_det: 1.0,
            };
            let atlas = Atlas {
                domain: "HALF_CUBE_HALF_PLATE".into(),
                entries: vec![entry],
            };
            let membership = move |p: &[f64]| domain_model.contains(p, 1e-12);
            validate_atlas(&atlas, &membership, samples)?
        }
        other => {
            return Err(Error::ConfigError {
                detail: format!(
                    "unknown atlas '{}'; valid: CROSSING_BEAMS, HALF_PLATE_UNFOLDING",
                    other
                ),
            })
        }
    };
    let all_pass = rows.iter().all(|r| r.pass);
    let mut produced = Vec::new();
    emit(out, "chart_report.csv", &chart_rows_to_csv(&rows), &mut produced)?;
    write_manifest(out, &produced)?;
    Ok(all_pass)
}
