//! Half-spaces and polyhedra in dimension ≤ 3, with exact-enough feasibility.
//!
//! Chart pieces are intersections of half-spaces with rational normals, so
//! a Fourier–Motzkin elimination in f64 decides interior-nonemptiness
//! reliably: every arithmetic step combines dyadic rationals of small
//! height. The elimination is only used on the small systems produced by
//! chart composition (a dozen rows, dimension ≤ 3), where its quadratic
//! fill is harmless.

/// Closed half-space { x : n·x ≤ c }.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: &[f64], offset: f64) -> Self {
        Self { normal: normal.to_vec(), offset }
    }

    /// Signed slack c − n·x; nonnegative inside.
    pub fn slack(&self, p: &[f64]) -> f64 {
        self.offset - dot(&self.normal, p)
    }

    /// Same hyperplane, opposite side.
    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|v| -v).collect(),
            offset: -self.offset,
        }
    }

    fn scale_to_unit(&self) -> Option<Self> {
        let m = self.normal.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            return None;
        }
        Some(Self {
            normal: self.normal.iter().map(|v| v / m).collect(),
            offset: self.offset / m,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Intersection of finitely many closed half-spaces.
#[derive(Debug, Clone, Default)]
pub struct Polyhedron {
    pub halves: Vec<HalfSpace>,
}

/// Comparison tolerance for feasibility decisions. The constraint data is
/// dyadic-rational throughout, so any genuine degeneracy lands many orders
/// of magnitude below this while genuine interiors sit well above it.
const FEAS_TOL: f64 = 1e-9;

impl Polyhedron {
    pub fn new(halves: Vec<HalfSpace>) -> Self {
        Self { halves }
    }

    /// Whole space.
    pub fn all(_dim: usize) -> Self {
        Self { halves: Vec::new() }
    }

    /// Axis-aligned box lo[k] ≤ x_k ≤ hi[k].
    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Self {
        let d = lo.len();
        let mut halves = Vec::with_capacity(2 * d);
        for k in 0..d {
            let mut n = vec![0.0; d];
            n[k] = 1.0;
            halves.push(HalfSpace::new(&n, hi[k]));
            n[k] = -1.0;
            halves.push(HalfSpace::new(&n, -lo[k]));
        }
        Self { halves }
    }

    pub fn with(mut self, h: HalfSpace) -> Self {
        self.halves.push(h);
        self
    }

    /// Membership with slack tolerance (≥ −tol on every constraint).
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.halves.iter().all(|h| h.slack(p) >= -tol)
    }

    /// Largest constraint violation at p (0 inside the closed set).
    pub fn violation(&self, p: &[f64]) -> f64 {
        self.halves
            .iter()
            .map(|h| -h.slack(p))
            .fold(0.0_f64, f64::max)
    }

    /// Intersection of two constraint systems.
    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        let mut halves = self.halves.clone();
        halves.extend(other.halves.iter().cloned());
        Polyhedron { halves }
    }

    /// True if the OPEN interior (all constraints strict) is nonempty, by
    /// Fourier–Motzkin elimination of all variables.
    pub fn has_interior(&self, dim: usize) -> bool {
        // Rows are (normal, offset); the interior is nonempty iff the
        // strict system n·x < c is feasible.
        let mut rows: Vec<HalfSpace> = self
            .halves
            .iter()
            .filter_map(|h| h.scale_to_unit())
            .collect();
        // A zero row 0 ≤ c is immediately decidable.
        for h in &self.halves {
            if h.normal.iter().all(|v| *v == 0.0) && h.offset <= FEAS_TOL {
                // 0 < c fails (c ≤ 0 up to tolerance): empty interior.
                return false;
            }
        }
        for var in (0..dim).rev() {
            rows = eliminate(rows, var);
            if rows.len() > 4000 {
                // Defensive cap; never reached for chart-sized systems.
                dedup(&mut rows);
            }
        }
        // All variables gone: each row reads 0 < c.
        rows.iter().all(|h| h.offset > FEAS_TOL)
    }
}

/// Eliminate variable `var` from the strict system, pairing rows with
/// positive and negative coefficients.
fn eliminate(rows: Vec<HalfSpace>, var: usize) -> Vec<HalfSpace> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut keep = Vec::new();
    for r in rows {
        let a = r.normal[var];
        if a > FEAS_TOL {
            pos.push(r);
        } else if a < -FEAS_TOL {
            neg.push(r);
        } else {
            keep.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            let ap = p.normal[var];
            let an = -n.normal[var];
            // an·p + ap·n cancels the variable; strictness is preserved.
            let mut normal: Vec<f64> = p
                .normal
                .iter()
                .zip(&n.normal)
                .map(|(pv, nv)| an * pv + ap * nv)
                .collect();
            normal[var] = 0.0;
            let offset = an * p.offset + ap * n.offset;
            let h = HalfSpace { normal, offset };
            if let Some(h) = h.scale_to_unit() {
                keep.push(h);
            } else if h.offset <= FEAS_TOL {
                // Derived contradiction 0 < c with c ≤ 0: keep as witness.
                keep.push(h);
            }
        }
    }
    dedup(&mut keep);
    keep
}

fn dedup(rows: &mut Vec<HalfSpace>) {
    let mut out: Vec<HalfSpace> = Vec::with_capacity(rows.len());
    for r in rows.drain(..) {
        let dup = out.iter().any(|s| {
            s.normal
                .iter()
                .zip(&r.normal)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
                && (s.offset - r.offset).abs() <= 1e-12
        });
        if !dup {
            out.push(r);
        }
    }
    *rows = out;
}
