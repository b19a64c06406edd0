//! `solve-parabolic`: march one quasilinear problem over a time interval.

use std::path::Path;

use mixform::fe::{interpolate, DofMap};
use mixform::geometry::presets::{build_preset, preset_by_name};
use mixform::nonlin::Nonlinearity;
use mixform::quasi::{implicit_euler, AdaptiveOptions, ParabolicOptions};
use mixform::report::{check_rows_to_csv, emit, mesh_to_vtk, vector_to_csv, write_manifest, CheckRow};
use mixform::Result;

use crate::config::Config;
use crate::commands::named_field;

pub const ALLOWED_KEYS: &[&str] = &[
    "preset",
    "level",
    "nonlinearity",
    "t0",
    "t1",
    "steps",
    "initial",
    "source",
    "blow_up_cap",
    "adaptive",
    "rel_tol",
    "min_step",
    "max_rejections",
    "vtk",
];

pub fn run(cfg: &Config, out: &Path, _seed: u64) -> Result<bool> {
    let kind = preset_by_name(cfg.require("preset")?)?;
    let level: usize = cfg.get_or("level", 1)?;
    let nonlin = Nonlinearity::by_name(cfg.get("nonlinearity").unwrap_or("IDENTITY"))?;
    let t0: f64 = cfg.get_or("t0", 0.0)?;
    let t1: f64 = cfg.get_or("t1", 1.0)?;
    let steps: usize = cfg.get_or("steps", 32)?;
    let initial_name = cfg.get("initial").unwrap_or("ZERO");
    let source_name = cfg.get("source").unwrap_or("ZERO");
    let cap: f64 = cfg.get_or("blow_up_cap", 1e8)?;
    let adaptive: bool = cfg.get_or("adaptive", false)?;
    let want_vtk: bool = cfg.get_or("vtk", false)?;

    let inst = build_preset(kind, level)?;
    let mesh = &inst.mesh;
    let bound = inst.coeff.bind(mesh)?;
    let map = DofMap::from_dirichlet_labels(mesh);

    let initial = named_field(initial_name, mesh)?;
    let source = named_field(source_name, mesh)?;
    let u0 = map.restrict(&interpolate(mesh, |p| initial(p)));
    let src = |p: &[f64], _t: f64| source(p);

    let opts = ParabolicOptions {
        n_steps: steps,
        blow_up_cap: cap,
        adaptive: if adaptive {
            Some(AdaptiveOptions {
                rel_tol: cfg.get_or("rel_tol", 1e-4)?,
                min_step: cfg.get_or("min_step", (t1 - t0).abs() * 1e-6)?,
                max_rejections: cfg.get_or("max_rejections", 40)?,
            })
        } else {
            None
        },
    };
    let traj = implicit_euler(mesh, &bound, &map, nonlin, &src, &u0, t0, t1, &opts)?;

    let mut rows: Vec<CheckRow> = Vec::new();
    let t_end = *traj.times.last().unwrap();
    rows.push(CheckRow::new(
        "final_time",
        "march",
        t_end,
        t1,
        (t_end - t1).abs() <= 1e-9 * (t1 - t0).abs().max(1.0),
    ));
    let count = (traj.times.len() - 1) as f64;
    if adaptive {
        rows.push(CheckRow::new("steps_taken", "adaptive", count, 1e9, count >= 1.0));
    } else {
        rows.push(CheckRow::new(
            "steps_taken",
            "fixed",
            count,
            steps as f64,
            count == steps as f64,
        ));
    }
    let full = map.prolong(traj.final_state());
    let sup = full.iter().fold(0.0_f64, |s, &v| s.max(v.abs()));
    rows.push(CheckRow::new("final_sup", "u", sup, cap, sup < cap));

    let all_pass = rows.iter().all(|r| r.pass);
    let mut produced = Vec::new();
    emit(out, "final_state.csv", &vector_to_csv(&full), &mut produced)?;
    emit(out, "parabolic_report.csv", &check_rows_to_csv(&rows), &mut produced)?;
    if want_vtk {
        emit(out, "final_state.vtk", &mesh_to_vtk(mesh, &[("u", &full)]), &mut produced)?;
    }
    write_manifest(out, &produced)?;
    Ok(all_pass)
}
