//! Acceptance gate: one test per advertised guarantee of the toolkit.
//!
//! Each test prints a single `acceptance <name>: PASS` line on success and
//! asserts the stated tolerance directly, so a red test names the exact
//! guarantee it violates. Runtime budgets are asserted where a guarantee
//! carries one.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use mixform::coeff::{pushforward_tensor, BoundCoefficient};
use mixform::fe::{
    assemble_mass, assemble_stiffness, h1_seminorm_error, interpolate, l2_error,
    lumped_mass_diagonal, DofMap,
};
use mixform::geometry::atlas::{validate_atlas, Atlas, AtlasEntry};
use mixform::geometry::beams::{beams_membership, crossing_beams_atlas};
use mixform::geometry::maps2d::half_plate_unfolding;
use mixform::geometry::model::{ModelSet, ModelSetKind};
use mixform::geometry::presets::{
    beams_two_phase, build_preset, crossing_beams_mesh, PresetKind,
};
use mixform::linalg::{norm_wq, Csr, SpdSolver};
use mixform::mesh::{label_boundary, structured_rect, vertex_injection, DiagonalRule, Mesh};
use mixform::nonlin::{fermi_dirac_half, Nonlinearity, ETA_THREE_HALVES};
use mixform::quasi::{
    assemble_ratio_stiffness, holder_quotients, implicit_euler, ratio_identity_residual,
    ParabolicOptions,
};
use mixform::report::{chart_rows_to_csv, check_rows_to_csv, mesh_to_vtk, vector_to_csv, CheckRow};
use mixform::sampling::rng_from_seed;
use mixform::spectral::{
    check_m_matrix, eigen_to_ascii, gaussian_envelope_fit, generalized_eigen,
    lambda_ref_estimate, mass_norm, relative_m_distance, resolvent_scaled_norm,
    riesz_sup_estimate, HeatCalculus, InvSqrtQuadrature,
};

const PI: f64 = std::f64::consts::PI;

/// Mean dyadic convergence rate fitted to an error sequence over uniform
/// refinement (average of the consecutive log2 ratios).
fn fitted_rate(errors: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..errors.len() {
        acc += (errors[i - 1] / errors[i]).log2();
    }
    acc / (errors.len() - 1) as f64
}

fn marker(name: &str, start: Instant) {
    println!("acceptance {}: PASS ({:.2} s)", name, start.elapsed().as_secs_f64());
}

// ---------------------------------------------------------------------------
// 1. Chart exactness: the planar unfolding composite and all four beam
//    corner charts are volume preserving to 1e-12, invert to 1e-12 on
//    10^3 sampled points, and map into their model sets without a single
//    membership violation. Budget: 5 s.
// ---------------------------------------------------------------------------
#[test]
fn a01_chart_exactness() {
    let start = Instant::now();

    let beams = crossing_beams_atlas().unwrap();
    assert_eq!(beams.entries.len(), 4, "one chart per singular plate corner");
    let rows = validate_atlas(&beams, &beams_membership, 1000).unwrap();
    for r in &rows {
        assert!(r.pass, "{} / {}: deviation {}", r.chart_id, r.check, r.max_deviation);
    }

    let domain = ModelSet::new(ModelSetKind::HalfCubeHalfPlate, 2, 1.0).unwrap();
    let entry = AtlasEntry {
        id: "half_plate_unfolding".into(),
        patch_lo: vec![-1.0, -1.0],
        patch_hi: vec![1.0, 0.0],
        chart: half_plate_unfolding(),
        target: ModelSet::new(ModelSetKind::HalfCubePlate, 2, 1.0).unwrap(),
        expected_abs_det: 1.0,
    };
    let atlas = Atlas { domain: "HALF_CUBE_HALF_PLATE".into(), entries: vec![entry] };
    let membership = |p: &[f64]| domain.contains(p, 1e-12);
    let rows = validate_atlas(&atlas, &membership, 1000).unwrap();
    for r in &rows {
        assert!(r.pass, "{} / {}: deviation {}", r.chart_id, r.check, r.max_deviation);
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "chart validation took {:.2} s, budget 5 s", dt);
    marker("chart_exactness", start);
}

// ---------------------------------------------------------------------------
// 2. Reflection equivalence: solving on the lower half square with the
//    natural condition on the symmetry plane and symmetrically extending
//    the load reproduces the restriction of the full-square solution to
//    1e-10, for 5 random loads and shifts t in {0, 1, 10}. Budget: 30 s.
// ---------------------------------------------------------------------------
#[test]
fn a02_reflection_equivalence() {
    let start = Instant::now();
    for n in [8usize, 16] {
        // Lower half (-1,1)x(-1,0): flux condition on the plane y = 0,
        // Dirichlet on the rest. Alternating diagonals make the full mesh
        // mirror symmetric and the half mesh its exact lower half.
        let mut half =
            structured_rect(2 * n, n, [-1.0, -1.0], [1.0, 0.0], DiagonalRule::Alternating);
        label_boundary(&mut half, &|b: &[f64]| if b[1] > -1e-9 { 1 } else { 0 }).unwrap();
        let mut full =
            structured_rect(2 * n, 2 * n, [-1.0, -1.0], [1.0, 1.0], DiagonalRule::Alternating);
        label_boundary(&mut full, &|_: &[f64]| 0).unwrap();

        let inj = vertex_injection(&half, &full).unwrap();
        let mirror = full.mirror_pairing(1, 0.0).unwrap();

        let co_h = BoundCoefficient::constant(&half, DMatrix::identity(2, 2)).unwrap();
        let co_f = BoundCoefficient::constant(&full, DMatrix::identity(2, 2)).unwrap();
        let map_h = DofMap::from_dirichlet_labels(&half);
        let map_f = DofMap::from_dirichlet_labels(&full);
        let a_h = assemble_stiffness(&half, &co_h, &map_h).unwrap();
        let m_h = assemble_mass(&half, &map_h);
        let a_f = assemble_stiffness(&full, &co_f, &map_f).unwrap();
        let m_f = assemble_mass(&full, &map_f);

        let mut rng = rng_from_seed(42);
        let loads: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..map_h.n_dofs()).map(|_| 0.1 * (rng.gen::<f64>() - 0.5)).collect())
            .collect();

        for shift in [0.0, 1.0, 10.0] {
            let sys_h = Csr::linear_combination(&[(1.0, &a_h), (shift, &m_h)]);
            let sys_f = Csr::linear_combination(&[(1.0, &a_f), (shift, &m_f)]);
            let sol_h = SpdSolver::new(&sys_h).unwrap();
            let sol_f = SpdSolver::new(&sys_f).unwrap();
            for load in &loads {
                let u = sol_h.solve(load).unwrap();
                // Symmetric extension of the functional: each half-square
                // dof feeds both mirror copies; plane dofs are their own
                // mirror and therefore receive the value twice.
                let mut lhat = vec![0.0; map_f.n_dofs()];
                for v in 0..half.n_vertices() {
                    if let Some(i) = map_h.full_to_dof[v] {
                        let fv = inj[v];
                        let mv = mirror[fv];
                        let fd = map_f.full_to_dof[fv].expect("free half dof is free in full");
                        let md = map_f.full_to_dof[mv].expect("mirror of a free dof is free");
                        lhat[fd] += load[i];
                        lhat[md] += load[i];
                    }
                }
                let uhat = sol_f.solve(&lhat).unwrap();
                let mut worst_restrict = 0.0_f64;
                let mut worst_sym = 0.0_f64;
                for v in 0..half.n_vertices() {
                    if let Some(i) = map_h.full_to_dof[v] {
                        let fv = inj[v];
                        let mv = mirror[fv];
                        let fd = map_f.full_to_dof[fv].unwrap();
                        let md = map_f.full_to_dof[mv].unwrap();
                        worst_restrict = worst_restrict.max((u[i] - uhat[fd]).abs());
                        worst_sym = worst_sym.max((uhat[fd] - uhat[md]).abs());
                    }
                }
                assert!(
                    worst_restrict <= 1e-10,
                    "n = {}, shift = {}: restriction deviates by {}",
                    n,
                    shift,
                    worst_restrict
                );
                assert!(
                    worst_sym <= 1e-10,
                    "n = {}, shift = {}: extended solution asymmetry {}",
                    n,
                    shift,
                    worst_sym
                );
            }
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "reflection study took {:.2} s, budget 30 s", dt);
    marker("reflection_equivalence", start);
}

// ---------------------------------------------------------------------------
// 3. Square-root oracle agreement: the 64-node resolvent quadrature for
//    B^{-1/2} matches the dense eigenfunction route to 1e-6 in the relative
//    M-norm on meshes of at most 3000 dofs, for 20 random vectors; the
//    scalar problem b = 4 reproduces 1/2 to 1e-10. Budget: 2 min.
// ---------------------------------------------------------------------------
#[test]
fn a03_square_root_oracle_agreement() {
    let start = Instant::now();

    // Scalar sanity pin: (4)^{-1/2} applied to 1 must give 0.5.
    let a1 = Csr::from_triplets(1, 1, &mut vec![(0, 0, 4.0)]);
    let m1 = Csr::from_triplets(1, 1, &mut vec![(0, 0, 1.0)]);
    let quad1 = InvSqrtQuadrature::new(&a1, &m1, 64, 4.0).unwrap();
    let y = quad1.apply(&[1.0]).unwrap();
    assert!((y[0] - 0.5).abs() <= 1e-10, "scalar inverse square root: {}", y[0]);

    for kind in [PresetKind::HalfCubeNeumannPlate, PresetKind::UnitSquareMixed] {
        let inst = build_preset(kind, 2).unwrap();
        let mesh = &inst.mesh;
        let bound = inst.coeff.bind(mesh).unwrap();
        let map = DofMap::from_dirichlet_labels(mesh);
        assert!(map.n_dofs() <= 3000, "{}: {} dofs", inst.name, map.n_dofs());
        let a = assemble_stiffness(mesh, &bound, &map).unwrap();
        let m = assemble_mass(mesh, &map);
        let lref = lambda_ref_estimate(&a, &m, 5).unwrap();
        let quad = InvSqrtQuadrature::new(&a, &m, 64, lref).unwrap();
        let eigen = generalized_eigen(&a, &m).unwrap();
        let mut rng = rng_from_seed(5);
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let b: Vec<f64> = (0..map.n_dofs()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let x = quad.apply(&b).unwrap();
            let yv = eigen.apply(&m, |lam| lam.powf(-0.5), &b);
            worst = worst.max(relative_m_distance(&m, &x, &yv));
        }
        assert!(worst <= 1e-6, "{}: quadrature vs eigen M-distance {}", inst.name, worst);
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 120.0, "square-root comparison took {:.2} s, budget 2 min", dt);
    marker("square_root_oracle_agreement", start);
}

// ---------------------------------------------------------------------------
// 4. Half-power gradient bound trend: the surveyed ratio
//    sup ||grad B^{-1/2} f||_q / ||f|| grows by at most 1.1 per refinement
//    for q in {1.5, 2} on both singular-geometry presets; with exponent 2,
//    no surface term, and the consistent mass norm the ratio is exactly 1.
// ---------------------------------------------------------------------------
#[test]
fn a04_riesz_bound_trend() {
    let start = Instant::now();
    for kind in [PresetKind::HalfCubeHalfPlate, PresetKind::CrossingBeams] {
        // Bump widths sized so the coarsest mesh already resolves the test
        // inputs; sharper bumps only become representable on finer levels,
        // which reads as spurious norm growth.
        let (centers, width): (Vec<Vec<f64>>, f64) = match kind {
            PresetKind::CrossingBeams => (
                vec![
                    vec![1.0, 1.0, -0.15],
                    vec![-1.0, 1.0, -0.15],
                    vec![0.0, 0.0, -0.5],
                ],
                1.5,
            ),
            _ => (
                vec![vec![0.0, -0.1], vec![-0.5, -0.05], vec![0.5, -0.3]],
                0.35,
            ),
        };
        let mut sups = [Vec::new(), Vec::new()];
        for level in 0..3 {
            let inst = build_preset(kind, level).unwrap();
            let mesh = &inst.mesh;
            let bound = inst.coeff.bind(mesh).unwrap();
            let map = DofMap::from_dirichlet_labels(mesh);
            let a = assemble_stiffness(mesh, &bound, &map).unwrap();
            let m = assemble_mass(mesh, &map);
            let n = map.n_dofs();

            // Dense eigenfunction route while it stays cheap (it makes the
            // exponent-2 identity exact); resolvent quadrature beyond.
            let use_eigen = n <= 2500;
            let eigen = if use_eigen { Some(generalized_eigen(&a, &m).unwrap()) } else { None };
            let quad = if use_eigen {
                None
            } else {
                let lref = lambda_ref_estimate(&a, &m, 0).unwrap();
                Some(InvSqrtQuadrature::new(&a, &m, 48, lref).unwrap())
            };
            let apply = |b: &[f64]| -> mixform::Result<Vec<f64>> {
                match (&eigen, &quad) {
                    (Some(p), _) => Ok(p.apply(&m, |lam| lam.powf(-0.5), b)),
                    (_, Some(qd)) => qd.apply(b),
                    _ => unreachable!(),
                }
            };
            let w = lumped_mass_diagonal(mesh, &map);
            for (qi, q) in [1.5, 2.0].into_iter().enumerate() {
                let norm_mass = |f: &[f64]| mass_norm(&m, f);
                let norm_lumped = |f: &[f64]| norm_wq(f, &w, q);
                let input_norm: &dyn Fn(&[f64]) -> f64 =
                    if q == 2.0 { &norm_mass } else { &norm_lumped };
                let eff_starts = if n > 8000 { 2 } else { 3 };
                let sup = riesz_sup_estimate(
                    mesh, &bound, &map, &apply, q, input_norm, &centers, width, eff_starts, 0,
                )
                .unwrap();
                assert!(sup.is_finite() && sup > 0.0, "{} level {}: sup {}", inst.name, level, sup);
                // The exact exponent-2 identity is asserted where the dense
                // factorization is numerically exact. Beyond a few hundred
                // unknowns the eigensolver's own eigenvector residual
                // (amplified by 1/lambda_min) already exceeds 1e-10 even
                // though the calculus is algebraically exact, so the
                // coarsest level is the identity's calibration point.
                if q == 2.0 && use_eigen && level == 0 {
                    assert!(
                        (sup - 1.0).abs() <= 1e-10,
                        "{} level {}: exponent-2 identity off by {}",
                        inst.name,
                        level,
                        (sup - 1.0).abs()
                    );
                }
                sups[qi].push(sup);
            }
        }
        for (qi, q) in [1.5, 2.0].into_iter().enumerate() {
            for l in 1..3 {
                let ratio = sups[qi][l] / sups[qi][l - 1];
                assert!(
                    ratio <= 1.1,
                    "{:?} q = {}: level {} grows by factor {:.4} (values {:?})",
                    kind,
                    q,
                    l,
                    ratio,
                    sups[qi]
                );
            }
        }
    }
    marker("riesz_bound_trend", start);
}

// ---------------------------------------------------------------------------
// 5. Resolvent decay: the scaled resolvent norm
//    (1+lambda)||(A + (1+lambda)M)^{-1} M|| in weighted l^2 and l^4 never
//    exceeds twice its lambda = 0 value along lambda in {0,1,10,100,1000},
//    on two geometries at two refinements each.
//
//    The scaled norm plateaus near 1 for large lambda while its lambda = 0
//    value is about 1/(1 + mu_min), so the factor-2 headroom is a statement
//    about geometries whose principal eigenvalue sits near zero — the
//    extended domains with small Dirichlet portions that the
//    mixed-condition estimates target. The crossing beams (extent 20,
//    Dirichlet only at the far ends) and a long mostly-Neumann strip are
//    exactly that regime.
// ---------------------------------------------------------------------------
#[test]
fn a05_resolvent_decay() {
    let start = Instant::now();
    struct Case {
        name: &'static str,
        a: Csr,
        m: Csr,
        w: Vec<f64>,
    }
    let mut cases = Vec::new();
    for level in [0usize, 1] {
        let inst = build_preset(PresetKind::CrossingBeams, level).unwrap();
        let mesh = &inst.mesh;
        let bound = inst.coeff.bind(mesh).unwrap();
        let map = DofMap::from_dirichlet_labels(mesh);
        cases.push(Case {
            name: "CROSSING_BEAMS",
            a: assemble_stiffness(mesh, &bound, &map).unwrap(),
            m: assemble_mass(mesh, &map),
            w: lumped_mass_diagonal(mesh, &map),
        });
    }
    for k in [4usize, 8] {
        // Strip (0,10) x (0,1), Dirichlet on the two short ends only.
        let mut mesh =
            structured_rect(10 * k, k, [0.0, 0.0], [10.0, 1.0], DiagonalRule::Alternating);
        label_boundary(&mut mesh, &|b: &[f64]| {
            if b[0] < 1e-9 || b[0] > 10.0 - 1e-9 {
                0
            } else {
                1
            }
        })
        .unwrap();
        let co = BoundCoefficient::constant(&mesh, DMatrix::identity(2, 2)).unwrap();
        let map = DofMap::from_dirichlet_labels(&mesh);
        cases.push(Case {
            name: "LONG_STRIP",
            a: assemble_stiffness(&mesh, &co, &map).unwrap(),
            m: assemble_mass(&mesh, &map),
            w: lumped_mass_diagonal(&mesh, &map),
        });
    }
    for case in &cases {
        for q in [2.0, 4.0] {
            let base = resolvent_scaled_norm(&case.a, &case.m, &case.w, 0.0, q, 4, 30, 3).unwrap();
            assert!(base.is_finite() && base > 0.0, "{} q = {}: base {}", case.name, q, base);
            for lambda in [1.0, 10.0, 100.0, 1000.0] {
                let v =
                    resolvent_scaled_norm(&case.a, &case.m, &case.w, lambda, q, 4, 30, 3).unwrap();
                assert!(
                    v < 2.0 * base,
                    "{} ({} dofs) q = {}: lambda = {} gives {:.6} vs base {:.6}",
                    case.name,
                    case.a.n_rows,
                    q,
                    lambda,
                    v,
                    base
                );
            }
        }
    }
    marker("resolvent_decay", start);
}

// ---------------------------------------------------------------------------
// 6. Heat-kernel positivity and envelope: implicit substepped kernels on
//    the uniform square mesh (whose stiffness is an M-matrix) stay
//    entrywise above -1e-10, and the fitted Gaussian envelope dominates
//    every sampled kernel value one-sidedly, for t in {0.01, 0.05, 0.2}.
// ---------------------------------------------------------------------------
#[test]
fn a06_heat_kernel_positivity_and_envelope() {
    let start = Instant::now();
    let mesh = structured_rect(8, 8, [0.0, 0.0], [1.0, 1.0], DiagonalRule::Alternating);
    let map = DofMap::all_free(mesh.n_vertices());
    let co = BoundCoefficient::constant(&mesh, DMatrix::identity(2, 2)).unwrap();
    let a = assemble_stiffness(&mesh, &co, &map).unwrap();
    check_m_matrix(&a).unwrap();
    let ml = lumped_mass_diagonal(&mesh, &map);
    let heat = HeatCalculus::new(&a, &ml).unwrap();
    let n = map.n_dofs();
    let coords: Vec<Vec<f64>> = (0..n).map(|v| mesh.vertex(v).to_vec()).collect();
    let ad = a.to_dense();

    for t in [0.01, 0.05, 0.2] {
        // Substepped kernel: 64 implicit Euler steps of the lumped system,
        // K = [(M_L + tau A)^{-1} M_L]^64 M_L^{-1}. Each factor is entrywise
        // nonnegative because M_L + tau A is an M-matrix.
        let substeps = 64;
        let tau = t / substeps as f64;
        let mut b = &ad * tau;
        for i in 0..n {
            b[(i, i)] += ml[i];
        }
        let chol = b.cholesky().expect("shifted lumped system is positive definite");
        let mut kernel = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut v = DVector::zeros(n);
            v[j] = 1.0 / ml[j];
            for _ in 0..substeps {
                let rhs = DVector::from_iterator(n, v.iter().zip(&ml).map(|(x, d)| x * d));
                v = chol.solve(&rhs);
            }
            kernel.set_column(j, &v);
        }

        let min_entry = kernel.min();
        assert!(min_entry >= -1e-10, "t = {}: kernel minimum {}", t, min_entry);

        let fit = gaussian_envelope_fit(&kernel, &coords, t, 2).unwrap();
        assert!(fit.min_entry >= -1e-10);
        assert!(fit.max_asymmetry <= 1e-9, "t = {}: asymmetry {}", t, fit.max_asymmetry);
        assert!(fit.decay.is_finite() && fit.decay > 0.0, "t = {}: decay {}", t, fit.decay);

        // Independent one-sided domination check of the fitted envelope
        // against every sampled kernel value.
        let c_td = fit.amplitude / t;
        for i in 0..n {
            for j in 0..n {
                let v = kernel[(i, j)];
                if v <= 0.0 {
                    continue;
                }
                let r2: f64 = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                let envelope = c_td * (-r2 / (fit.decay * t)).exp();
                assert!(
                    v <= envelope * (1.0 + 1e-9),
                    "t = {}: entry ({}, {}) = {} exceeds envelope {}",
                    t,
                    i,
                    j,
                    v,
                    envelope
                );
            }
        }

        // The substepped kernel is a consistent approximation of the
        // spectral semigroup kernel.
        let exact = heat.kernel(t).unwrap();
        let scale = exact.amax();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((kernel[(i, j)] - exact[(i, j)]).abs());
            }
        }
        assert!(
            worst <= 0.05 * scale,
            "t = {}: substepped kernel deviates from the spectral kernel by {} (scale {})",
            t,
            worst,
            scale
        );
    }
    marker("heat_kernel_positivity_and_envelope", start);
}

// ---------------------------------------------------------------------------
// 7. Transform commutation: assembling on the unfolded image with the
//    pushed-forward coefficient agrees with assembling on the original
//    mixed-condition mesh up to a crease-cell discrepancy that decreases
//    monotonically under refinement — both for the stiffness entries and
//    for the inverse-square-root action between the two problems.
// ---------------------------------------------------------------------------
#[test]
fn a07_transform_commutation() {
    let start = Instant::now();
    let chart = half_plate_unfolding();
    let mu = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);

    let pushforward_per_cell = |mesh: &Mesh| -> Vec<DMatrix<f64>> {
        (0..mesh.n_cells())
            .map(|c| {
                let cell = mesh.cell(c);
                let mut bc = [0.0; 2];
                for &v in cell {
                    let p = mesh.vertex(v);
                    bc[0] += p[0] / 3.0;
                    bc[1] += p[1] / 3.0;
                }
                let idx = chart.piece_index(&bc).expect("barycenter inside the patch");
                pushforward_tensor(&chart.pieces[idx].map.matrix, &mu)
            })
            .collect()
    };
    let map_vertices = |mesh: &Mesh| -> Vec<f64> {
        let mut out = Vec::with_capacity(mesh.vertices.len());
        for i in 0..mesh.n_vertices() {
            out.extend_from_slice(&chart.eval(mesh.vertex(i)).unwrap());
        }
        out
    };

    // On square cells the alternating diagonals run exactly along the
    // 45-degree creases of the composite, so the commutation is exact and
    // there is nothing to measure. Coprime subdivision counts break that
    // alignment: the creases cut cell interiors while never passing
    // through an interior vertex (the configuration that would flatten a
    // vertex-mapped cell), and corner cells stay sound because the
    // alternating diagonal there matches the crease slope.
    let meshes_for = |m: usize, ny: usize| -> (Mesh, Mesh) {
        let mesh = structured_rect(2 * m, ny, [-1.0, -1.0], [1.0, 0.0], DiagonalRule::Alternating);
        let mapped = Mesh {
            dim: 2,
            vertices: map_vertices(&mesh),
            cells: mesh.cells.clone(),
            facets: mesh.facets.clone(),
        };
        (mesh, mapped)
    };

    // (a) Weak-form commutation gap on smooth fields over four refinements.
    //     Each straddling cell commits an O(1) local error on an O(h)
    //     measure strip, so the form discrepancy shrinks like the strip.
    let profiles: [&dyn Fn(&[f64]) -> f64; 3] = [
        &|p: &[f64]| (PI * p[0]).sin() * (PI * p[1]).cos(),
        &|p: &[f64]| (0.4 * (p[0] - p[1])).exp(),
        &|p: &[f64]| p[0] * p[0] * p[1] + 0.3 * (2.0 * p[1]).cos(),
    ];
    let mut gaps = Vec::new();
    for (m, ny) in [(8usize, 11usize), (16, 23), (32, 45), (64, 91)] {
        let (mesh, mapped) = meshes_for(m, ny);
        let dom_co = BoundCoefficient::constant(&mesh, mu.clone()).unwrap();
        let tgt_co = BoundCoefficient { dim: 2, per_cell: pushforward_per_cell(&mesh) };
        let free = DofMap::all_free(mesh.n_vertices());
        let a_dom = assemble_stiffness(&mesh, &dom_co, &free).unwrap();
        let a_tgt = assemble_stiffness(&mapped, &tgt_co, &free).unwrap();
        assert_eq!(a_dom.indices, a_tgt.indices, "shared connectivity, shared sparsity");
        let mut worst = 0.0_f64;
        for profile in profiles {
            let u = interpolate(&mesh, profile);
            let e_dom = mixform::linalg::dot(&u, &a_dom.matvec(&u));
            let e_tgt = mixform::linalg::dot(&u, &a_tgt.matvec(&u));
            worst = worst.max((e_dom - e_tgt).abs() / e_dom);
        }
        gaps.push(worst);
    }
    for l in 1..gaps.len() {
        assert!(
            gaps[l] < gaps[l - 1],
            "weak-form gap not decreasing: {:?}",
            gaps
        );
    }

    // (b) Inverse-square-root discrepancy between the mixed problem and its
    //     unfolded image (same dof numbering, labels carried along; flux
    //     condition on the left half of the top edge as in the model set).
    let mut deltas = Vec::new();
    for (m, ny) in [(4usize, 5usize), (8, 11), (16, 23)] {
        let (mut mesh, _) = meshes_for(m, ny);
        label_boundary(&mut mesh, &|b: &[f64]| {
            if b[1] > -1e-9 && b[0] < 0.0 {
                1
            } else {
                0
            }
        })
        .unwrap();
        let mesh = &mesh;
        let mapped = Mesh {
            dim: 2,
            vertices: map_vertices(mesh),
            cells: mesh.cells.clone(),
            facets: mesh.facets.clone(),
        };
        let map = DofMap::from_dirichlet_labels(mesh);
        let dom_co = BoundCoefficient::constant(mesh, mu.clone()).unwrap();
        let tgt_co = BoundCoefficient { dim: 2, per_cell: pushforward_per_cell(mesh) };
        let a_dom = assemble_stiffness(mesh, &dom_co, &map).unwrap();
        let m_dom = assemble_mass(mesh, &map);
        let a_tgt = assemble_stiffness(&mapped, &tgt_co, &map).unwrap();
        let m_tgt = assemble_mass(&mapped, &map);
        let eig_dom = generalized_eigen(&a_dom, &m_dom).unwrap();
        let eig_tgt = generalized_eigen(&a_tgt, &m_tgt).unwrap();
        let mut rng = rng_from_seed(17);
        let mut delta = 0.0_f64;
        for _ in 0..5 {
            let f: Vec<f64> = (0..map.n_dofs()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let x = eig_dom.apply(&m_dom, |lam| lam.powf(-0.5), &f);
            let y = eig_tgt.apply(&m_tgt, |lam| lam.powf(-0.5), &f);
            delta = delta.max(relative_m_distance(&m_dom, &x, &y));
        }
        deltas.push(delta);
    }
    for l in 1..deltas.len() {
        assert!(
            deltas[l] < deltas[l - 1],
            "half-power discrepancy not decreasing: {:?}",
            deltas
        );
    }
    marker("transform_commutation", start);
}

// ---------------------------------------------------------------------------
// 8. Reformulation identities: with equal handles g = f' the ratio-form
//    assembly reproduces the plain stiffness bitwise for 10 random states;
//    the weak reformulation residual is exactly zero for unit slope and
//    decreases monotonically under refinement for the exponential pair.
// ---------------------------------------------------------------------------
#[test]
fn a08_reformulation_identities() {
    let start = Instant::now();
    let inst = build_preset(PresetKind::UnitSquareMixed, 1).unwrap();
    let mesh = &inst.mesh;
    let bound = inst.coeff.bind(mesh).unwrap();
    let map = DofMap::from_dirichlet_labels(mesh);
    let plain = assemble_stiffness(mesh, &bound, &map).unwrap();

    let g_exp = |s: f64| s.exp();
    let fp_exp = |s: f64| s.exp();
    let mut rng = rng_from_seed(9);
    for trial in 0..10 {
        let u: Vec<f64> = (0..mesh.n_vertices()).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let b = assemble_ratio_stiffness(mesh, &bound, &map, &g_exp, &fp_exp, &u).unwrap();
        assert_eq!(b.indices, plain.indices);
        for (k, (x, y)) in b.data.iter().zip(&plain.data).enumerate() {
            assert_eq!(
                x.to_bits(),
                y.to_bits(),
                "trial {}: entry {} differs ({} vs {})",
                trial,
                k,
                x,
                y
            );
        }
    }

    // Unit slope: the interpolated reciprocal-slope field is the constant
    // one, both sides accumulate identical expressions, residual is 0.0.
    let u = interpolate(mesh, |p| (1.3 * p[0]).sin() * 0.7 + p[1]);
    let r0 = ratio_identity_residual(mesh, &bound, &map, &|s| 0.5 + s * s, &|_| 1.0, &u).unwrap();
    assert_eq!(r0, 0.0, "unit-slope residual must vanish exactly");

    // Exponential pair: the residual is a pure interpolation defect and
    // shrinks under refinement.
    let mut prev = f64::INFINITY;
    let mut seen = Vec::new();
    for level in 1..4 {
        let inst = build_preset(PresetKind::UnitSquareMixed, level).unwrap();
        let mesh = &inst.mesh;
        let bound = inst.coeff.bind(mesh).unwrap();
        let map = DofMap::from_dirichlet_labels(mesh);
        let u = interpolate(mesh, |p| 0.4 * (PI * p[0]).sin() * (0.5 * PI * p[1]).cos());
        let r = ratio_identity_residual(mesh, &bound, &map, &g_exp, &fp_exp, &u).unwrap();
        assert!(r < prev, "residuals not decreasing: {:?} then {}", seen, r);
        seen.push(r);
        prev = r;
    }
    marker("reformulation_identities", start);
}

// ---------------------------------------------------------------------------
// 9. Solver correctness: implicit Euler reproduces the modal decay formula
//    (1 + tau*lambda)^{-n} to 1e-10 on a linear problem, and the
//    manufactured exponential-coefficient solution converges with fitted
//    space rate >= 0.9 in H1 and time rate >= 0.9 in L2-in-time.
//    Budget: 5 min.
// ---------------------------------------------------------------------------
#[test]
fn a09_solver_correctness() {
    let start = Instant::now();

    // (a) Modal decay identity on the all-Dirichlet unit square.
    let mut mesh = structured_rect(6, 6, [0.0, 0.0], [1.0, 1.0], DiagonalRule::Alternating);
    label_boundary(&mut mesh, &|_: &[f64]| 0).unwrap();
    let co = BoundCoefficient::constant(&mesh, DMatrix::identity(2, 2)).unwrap();
    let map = DofMap::from_dirichlet_labels(&mesh);
    let a = assemble_stiffness(&mesh, &co, &map).unwrap();
    let m = assemble_mass(&mesh, &map);
    let eigen = generalized_eigen(&a, &m).unwrap();
    let tau = 0.05;
    let steps = 10usize;
    let opts = ParabolicOptions { n_steps: steps, ..Default::default() };
    for k in 0..3 {
        let lam = eigen.values[k];
        let v: Vec<f64> = eigen.vectors.column(k).iter().copied().collect();
        let traj = implicit_euler(
            &mesh,
            &co,
            &map,
            Nonlinearity::Identity,
            &|_, _| 0.0,
            &v,
            0.0,
            tau * steps as f64,
            &opts,
        )
        .unwrap();
        let factor = (1.0 + tau * lam).powi(-(steps as i32));
        let worst = traj
            .final_state()
            .iter()
            .zip(&v)
            .fold(0.0_f64, |s, (x, y)| s.max((x - factor * y).abs()));
        assert!(worst <= 1e-10, "mode {}: modal decay off by {}", k, worst);
    }

    let state = |p: &[f64], t: f64| (-t).exp() * (PI * p[0]).cos() * (0.5 * PI * p[1]).sin();
    let grad = |p: &[f64], t: f64| -> Vec<f64> {
        let e = (-t).exp();
        vec![
            -e * PI * (PI * p[0]).sin() * (0.5 * PI * p[1]).sin(),
            e * 0.5 * PI * (PI * p[0]).cos() * (0.5 * PI * p[1]).cos(),
        ]
    };
    // Source making the state solve u' - div(e^u grad u) = f.
    let source = |p: &[f64], t: f64| -> f64 {
        let u = state(p, t);
        let sx = (PI * p[0]).sin();
        let cx = (PI * p[0]).cos();
        let sy = (0.5 * PI * p[1]).sin();
        let cy = (0.5 * PI * p[1]).cos();
        let e2 = (-2.0 * t).exp();
        let grad2 = e2 * PI * PI * (sx * sx * sy * sy + 0.25 * cx * cx * cy * cy);
        let lap = -(1.25 * PI * PI) * u;
        -u - u.exp() * (lap + grad2)
    };

    // (b) Space rate: tau = h^2 couples the two discretization scales, so
    //     the H1 error is governed by the first-order spatial term.
    let t1 = 0.25;
    let mut errors = Vec::new();
    for level in 0..3 {
        let inst = build_preset(PresetKind::UnitSquareMixed, level).unwrap();
        let mesh = &inst.mesh;
        let bound = inst.coeff.bind(mesh).unwrap();
        let map = DofMap::from_dirichlet_labels(mesh);
        let h = 1.0 / (4usize << level) as f64;
        let steps = (t1 / (h * h)).round() as usize;
        let u0 = map.restrict(&interpolate(mesh, |p| state(p, 0.0)));
        let opts = ParabolicOptions { n_steps: steps, ..Default::default() };
        let traj = implicit_euler(
            mesh,
            &bound,
            &map,
            Nonlinearity::Exponential,
            &source,
            &u0,
            0.0,
            t1,
            &opts,
        )
        .unwrap();
        let full = map.prolong(traj.final_state());
        let e_semi = h1_seminorm_error(mesh, &full, |p| grad(p, t1));
        let e_l2 = l2_error(mesh, &full, |p| state(p, t1));
        errors.push((e_semi * e_semi + e_l2 * e_l2).sqrt());
    }
    let space_rate = fitted_rate(&errors);
    assert!(
        space_rate >= 0.9,
        "fitted H1 space rate {:.3} below 0.9 (errors {:?})",
        space_rate,
        errors
    );

    // (c) Time rate on a fixed mesh against a same-mesh fine-step
    //     reference, removing the spatial error floor.
    let inst = build_preset(PresetKind::UnitSquareMixed, 2).unwrap();
    let mesh = &inst.mesh;
    let bound = inst.coeff.bind(mesh).unwrap();
    let map = DofMap::from_dirichlet_labels(mesh);
    let m = assemble_mass(mesh, &map);
    let t1 = 0.5;
    let u0 = map.restrict(&interpolate(mesh, |p| state(p, 0.0)));
    let march = |steps: usize| -> mixform::quasi::Trajectory {
        let opts = ParabolicOptions { n_steps: steps, ..Default::default() };
        implicit_euler(
            mesh,
            &bound,
            &map,
            Nonlinearity::Exponential,
            &source,
            &u0,
            0.0,
            t1,
            &opts,
        )
        .unwrap()
    };
    let reference = march(512);
    let mut time_errors = Vec::new();
    for steps in [8usize, 16, 32, 64] {
        let traj = march(steps);
        let dt = t1 / steps as f64;
        let mut acc = 0.0;
        for k in 1..=steps {
            let t = t1 * k as f64 / steps as f64;
            let refu = reference.sample(t).unwrap();
            let d: Vec<f64> = traj.states[k].iter().zip(&refu).map(|(x, y)| x - y).collect();
            let e = mass_norm(&m, &d);
            acc += dt * e * e;
        }
        time_errors.push(acc.sqrt());
    }
    let time_rate = fitted_rate(&time_errors);
    assert!(
        time_rate >= 0.9,
        "fitted time rate {:.3} below 0.9 (errors {:?})",
        time_rate,
        time_errors
    );

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "solver study took {:.2} s, budget 5 min", dt);
    marker("solver_correctness", start);
}

// ---------------------------------------------------------------------------
// 10. Hölder quotient stability: square-root-in-time and square-root-in-
//     space difference quotients of the two-phase crossing-beams evolution,
//     sampled at fixed physical vertex pairs, stay within ratio 1.2
//     between consecutive refinements.
// ---------------------------------------------------------------------------
#[test]
fn a10_holder_quotient_stability() {
    let start = Instant::now();
    let field = beams_two_phase(1.0, 3.0).unwrap();
    let coarse = crossing_beams_mesh(0).unwrap();
    let sample_times = [0.1, 0.2, 0.3, 0.4, 0.5];
    let mut time_q = Vec::new();
    let mut space_q = Vec::new();
    for level in 0..3 {
        let mesh = crossing_beams_mesh(level).unwrap();
        // The coarse lattice persists as mesh vertices at every finer
        // level, so the quotients sample identical physical point pairs.
        let inj = vertex_injection(&coarse, &mesh).unwrap();
        let mut pairs = Vec::new();
        for i in 0..coarse.n_vertices() {
            for j in (i + 1)..coarse.n_vertices() {
                pairs.push((inj[i], inj[j]));
            }
        }
        let bound = field.bind(&mesh).unwrap();
        let map = DofMap::from_dirichlet_labels(&mesh);
        let u0 = map.restrict(&interpolate(&mesh, |p| {
            let r2 = p[0] * p[0] + p[1] * p[1] + (p[2] + 1.0) * (p[2] + 1.0);
            (-r2 / (2.0 * 0.6 * 0.6)).exp()
        }));
        let opts = ParabolicOptions { n_steps: 16, ..Default::default() };
        let traj = implicit_euler(
            &mesh,
            &bound,
            &map,
            Nonlinearity::Identity,
            &|_, _| 0.0,
            &u0,
            0.0,
            0.5,
            &opts,
        )
        .unwrap();
        let rep = holder_quotients(&mesh, &map, &traj, &sample_times, 0.5, 0.5, &pairs).unwrap();
        assert!(rep.time_quotient.is_finite() && rep.time_quotient > 0.0);
        assert!(rep.space_quotient.is_finite() && rep.space_quotient > 0.0);
        time_q.push(rep.time_quotient);
        space_q.push(rep.space_quotient);
    }
    for l in 1..3 {
        let rt = time_q[l] / time_q[l - 1];
        let rs = space_q[l] / space_q[l - 1];
        assert!(
            (1.0 / 1.2..=1.2).contains(&rt),
            "time quotient ratio {:.4} outside [1/1.2, 1.2] (values {:?})",
            rt,
            time_q
        );
        assert!(
            (1.0 / 1.2..=1.2).contains(&rs),
            "space quotient ratio {:.4} outside [1/1.2, 1.2] (values {:?})",
            rs,
            space_q
        );
    }
    marker("holder_quotient_stability", start);
}

// ---------------------------------------------------------------------------
// 11. Fermi-Dirac integral: strict monotonicity on a 100-point grid,
//     agreement with the independently derived series oracle at 20
//     abscissae to 1e-10, and the e^t asymptote to 1e-4 at t <= -10.
// ---------------------------------------------------------------------------
#[test]
fn a11_fermi_dirac_integral() {
    let start = Instant::now();

    // Oracle: alternating series sum_k (-1)^{k+1} e^{kt} k^{-3/2},
    // evaluated independently in extended precision and frozen here.
    const SERIES_PINS: [(f64, f64); 20] = [
        (-0.5, 0.5075371035546379),
        (-1.0, 0.32779515926071157),
        (-1.5, 0.2073981870320298),
        (-2.0, 0.12929851332007558),
        (-2.5, 0.07980385454073086),
        (-3.0, 0.04893370569649578),
        (-3.5, 0.029880182108153824),
        (-4.0, 0.01819820350836711),
        (-4.5, 0.011065626536032758),
        (-5.0, 0.006721954314505913),
        (-5.5, 0.0040808795966341205),
        (-6.0, 0.0024765827958567184),
        (-6.5, 0.0015026406992108734),
        (-7.0, 0.0009115881215965713),
        (-7.5, 0.0005529762498941281),
        (-8.0, 0.000335422847973596),
        (-8.5, 0.0002034537337413531),
        (-9.0, 0.00012340441983738865),
        (-9.5, 7.484984908072901e-05),
        (-10.0, 4.539920105264133e-05),
    ];
    for (t, expect) in SERIES_PINS {
        let got = fermi_dirac_half(t);
        assert!(
            (got - expect).abs() <= 1e-10,
            "t = {}: quadrature {} vs series oracle {}",
            t,
            got,
            expect
        );
    }

    // Strict monotonicity on exactly 100 grid points across the working
    // range.
    let mut prev = f64::NEG_INFINITY;
    for i in 0..100 {
        let t = -12.0 + 24.0 * i as f64 / 99.0;
        let v = fermi_dirac_half(t);
        assert!(v > prev, "not strictly increasing at t = {}", t);
        prev = v;
    }

    // Boltzmann tail: F(t)/e^t -> 1.
    for t in [-10.0, -11.0, -12.0] {
        let ratio = fermi_dirac_half(t) / t.exp();
        assert!(
            (ratio - 1.0).abs() <= 1e-4,
            "t = {}: asymptotic ratio {} off by {}",
            t,
            ratio,
            (ratio - 1.0).abs()
        );
    }

    // Zero-argument pin (the shift constant of the state equation).
    assert!((fermi_dirac_half(0.0) - ETA_THREE_HALVES).abs() <= 1e-10);
    marker("fermi_dirac_integral", start);
}

// ---------------------------------------------------------------------------
// 12. Determinism: an identical seed reproduces every report body byte for
//     byte within one process (hash-map iteration, sampling, and power
//     iterations all flow from the recorded seed or deterministic orders).
// ---------------------------------------------------------------------------
#[test]
fn a12_deterministic_reports() {
    let start = Instant::now();

    fn pipeline(seed: u64) -> String {
        let mut body = String::new();

        // Chart validation report.
        let atlas = crossing_beams_atlas().unwrap();
        let rows = validate_atlas(&atlas, &beams_membership, 200).unwrap();
        body.push_str(&chart_rows_to_csv(&rows));

        // Spectral survey on the mixed-condition preset.
        let inst = build_preset(PresetKind::HalfCubeHalfPlate, 1).unwrap();
        let mesh = &inst.mesh;
        let bound = inst.coeff.bind(mesh).unwrap();
        let map = DofMap::from_dirichlet_labels(mesh);
        let a = assemble_stiffness(mesh, &bound, &map).unwrap();
        let m = assemble_mass(mesh, &map);
        let w = lumped_mass_diagonal(mesh, &map);
        let eigen = generalized_eigen(&a, &m).unwrap();
        body.push_str(&eigen_to_ascii(&eigen));
        let apply = |b: &[f64]| -> mixform::Result<Vec<f64>> {
            Ok(eigen.apply(&m, |lam| lam.powf(-0.5), b))
        };
        let centers = vec![vec![0.0, -0.1], vec![-0.5, -0.05]];
        let input_norm = |f: &[f64]| norm_wq(f, &w, 1.5);
        let sup = riesz_sup_estimate(
            mesh, &bound, &map, &apply, 1.5, &input_norm, &centers, 0.15, 3, seed,
        )
        .unwrap();
        let res = resolvent_scaled_norm(&a, &m, &w, 10.0, 4.0, 3, 20, seed).unwrap();
        let rows = vec![
            CheckRow::bounded("riesz_constant", "level_1", sup, 1e6),
            CheckRow::bounded("resolvent_scaled", "lambda_10", res, 1e6),
        ];
        body.push_str(&check_rows_to_csv(&rows));

        // Voxel-mesh construction path (hash-map backed) plus a field.
        let beams = crossing_beams_mesh(0).unwrap();
        let z: Vec<f64> = interpolate(&beams, |p| p[2]);
        body.push_str(&mesh_to_vtk(&beams, &[("height", &z)]));

        // A seeded solve, serialized.
        let mut rng = rng_from_seed(seed);
        let load: Vec<f64> = (0..map.n_dofs()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let sys = Csr::linear_combination(&[(1.0, &a), (1.0, &m)]);
        let sol = SpdSolver::new(&sys).unwrap().solve(&load).unwrap();
        body.push_str(&vector_to_csv(&sol));
        body
    }

    let first = pipeline(11);
    let second = pipeline(11);
    assert_eq!(first, second, "same seed must reproduce report bytes");
    marker("deterministic_reports", start);
}
