//! `solve-elliptic`: one stationary problem on a preset.
//!
//! Identity nonlinearity takes the direct linear path and admits an
//! optional boundary (Robin) term and mass shift; a genuine nonlinearity
//! is solved either by the substitution route (one linear solve plus a
//! vertexwise inverse) or by the fixed-point iteration with its recorded
//! residual history.

use std::path::Path;

use mixform::coeff::SurfaceCoefficient;
use mixform::fe::{assemble_boundary_mass, assemble_load, assemble_mass, assemble_stiffness, DofMap};
use mixform::linalg::{norm2, Csr, SpdSolver};
use mixform::nonlin::Nonlinearity;
use mixform::geometry::presets::{build_preset, preset_by_name};
use mixform::quasi::{
    assemble_state_stiffness, check_coercivity, solve_fixed_point, solve_kirchhoff,
};
use mixform::report::{check_rows_to_csv, emit, mesh_to_vtk, vector_to_csv, write_manifest, CheckRow};
use mixform::{Error, Result};

use crate::config::Config;
use crate::commands::named_field;

pub const ALLOWED_KEYS: &[&str] = &[
    "preset",
    "level",
    "nonlinearity",
    "method",
    "load",
    "max_iter",
    "tol",
    "vtk",
    "surface_tag",
    "surface_kappa",
    "mass_shift",
];

pub fn run(cfg: &Config, out: &Path, _seed: u64) -> Result<bool> {
    let kind = preset_by_name(cfg.require("preset")?)?;
    let level: usize = cfg.get_or("level", 1)?;
    let nonlin = Nonlinearity::by_name(cfg.get("nonlinearity").unwrap_or("IDENTITY"))?;
    let method = cfg.get("method").unwrap_or("FIXED_POINT");
    let load_name = cfg.get("load").unwrap_or("ONE");
    let max_iter: usize = cfg.get_or("max_iter", 30)?;
    let tol: f64 = cfg.get_or("tol", 1e-10)?;
    let want_vtk: bool = cfg.get_or("vtk", false)?;
    let kappa: f64 = cfg.get_or("surface_kappa", 0.0)?;
    let tag: i32 = cfg.get_or("surface_tag", 1)?;
    let shift: f64 = cfg.get_or("mass_shift", 0.0)?;

    let inst = build_preset(kind, level)?;
    let mesh = &inst.mesh;
    let bound = inst.coeff.bind(mesh)?;
    let map = DofMap::from_dirichlet_labels(mesh);

    let mut surface = inst.surface.clone();
    if kappa > 0.0 {
        if !mesh.facets.iter().any(|f| f.label == tag) {
            return Err(Error::EmptySurface { label: tag });
        }
        surface = SurfaceCoefficient::uniform(tag, kappa)?;
    }
    check_coercivity(&map, &surface, shift)?;

    let load = named_field(load_name, mesh)?;
    let rhs = assemble_load(mesh, &map, |p| load(p));
    let rhs_norm = norm2(&rhs).max(f64::MIN_POSITIVE);

    let mut rows: Vec<CheckRow> = Vec::new();
    let u = if matches!(nonlin, Nonlinearity::Identity) {
        let a = assemble_stiffness(mesh, &bound, &map)?;
        let q = assemble_boundary_mass(mesh, &surface, &map);
        let m = assemble_mass(mesh, &map);
        let system = Csr::linear_combination(&[(1.0, &a), (1.0, &q), (shift, &m)]);
        let solver = SpdSolver::new(&system)?;
        let u = solver.solve(&rhs)?;
        let su = system.matvec(&u);
        let r = norm2(&su.iter().zip(&rhs).map(|(x, y)| x - y).collect::<Vec<_>>());
        rows.push(CheckRow::bounded("linear_residual", "relative", r / rhs_norm, 1e-9));
        u
    } else {
        if kappa > 0.0 || shift != 0.0 {
            return Err(Error::ConfigError {
                detail: "surface_kappa and mass_shift apply only to the IDENTITY path".into(),
            });
        }
        match method {
            "KIRCHHOFF" => {
                let u = solve_kirchhoff(mesh, &bound, &map, nonlin, &rhs)?;
                // The substitution solve and the state-scaled operator are
                // different discretizations of the same problem; their gap
                // is a mesh-size defect, not a solver tolerance.
                let b = assemble_state_stiffness(mesh, &bound, &map, nonlin, &map.prolong(&u))?;
                let bu = b.matvec(&u);
                let defect =
                    norm2(&bu.iter().zip(&rhs).map(|(x, y)| x - y).collect::<Vec<_>>());
                rows.push(CheckRow::bounded(
                    "kirchhoff_defect",
                    "relative",
                    defect / rhs_norm,
                    1.0,
                ));
                u
            }
            "FIXED_POINT" => {
                let sol = solve_fixed_point(mesh, &bound, &map, nonlin, &rhs, max_iter, tol)?;
                let last = *sol.residuals.last().unwrap_or(&f64::NAN);
                rows.push(CheckRow::new(
                    "fixed_point_converged",
                    "relative_residual",
                    last / rhs_norm,
                    tol,
                    sol.converged,
                ));
                rows.push(CheckRow::bounded(
                    "fixed_point_iterations",
                    "count",
                    sol.residuals.len() as f64,
                    max_iter as f64,
                ));
                let mut worst_ratio = 0.0_f64;
                for w in sol.residuals.windows(2) {
                    worst_ratio = worst_ratio.max(w[1] / w[0].max(f64::MIN_POSITIVE));
                }
                rows.push(CheckRow::new(
                    "residual_decrease",
                    "max_step_ratio",
                    worst_ratio,
                    1.0,
                    worst_ratio < 1.0,
                ));
                sol.u
            }
            other => {
                return Err(Error::ConfigError {
                    detail: format!(
                        "unknown method '{}'; valid: FIXED_POINT, KIRCHHOFF",
                        other
                    ),
                })
            }
        }
    };

    let full = map.prolong(&u);
    let sup = full.iter().fold(0.0_f64, |s, &v| s.max(v.abs()));
    rows.push(CheckRow::new(
        "solution_sup",
        "u",
        sup,
        1e6,
        sup.is_finite() && sup <= 1e6,
    ));

    let all_pass = rows.iter().all(|r| r.pass);
    let mut produced = Vec::new();
    emit(out, "solution.csv", &vector_to_csv(&full), &mut produced)?;
    emit(out, "elliptic_report.csv", &check_rows_to_csv(&rows), &mut produced)?;
    if want_vtk {
        emit(out, "solution.vtk", &mesh_to_vtk(mesh, &[("u", &full)]), &mut produced)?;
    }
    write_manifest(out, &produced)?;
    Ok(all_pass)
}
