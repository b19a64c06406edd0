//! Sparse symmetric linear algebra: CSR storage, a cached direct solver
//! for moderate sizes with a Jacobi-CG fallback, Gauss–Legendre nodes, and
//! randomized norm estimators.
//!
//! The estimators deliberately report lower bounds: each randomized start
//! yields a certified ratio ‖Tx‖/‖x‖, and the maximum over starts and
//! iterations is what goes in reports. Ascent direction comes from the
//! duality map, but correctness of the bound never depends on it.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::Rng;

use crate::sampling::rng_from_seed;
use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &mut Vec<(usize, usize, f64)>,
    ) -> Csr {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n_rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in triplets.iter() {
            assert!(r < n_rows && c < n_cols);
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            indptr[r + 1] += indptr[r];
        }
        Csr { n_rows, n_cols, indptr, indices, data }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Csr {
        Csr {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.indices[k] == r {
                    d[r] = self.data[k];
                }
            }
        }
        d
    }

    /// Σ coef_i · A_i with identical shapes.
    pub fn linear_combination(terms: &[(f64, &Csr)]) -> Csr {
        assert!(!terms.is_empty());
        let (n_rows, n_cols) = (terms[0].1.n_rows, terms[0].1.n_cols);
        let mut triplets = Vec::new();
        for (coef, a) in terms {
            assert_eq!(a.n_rows, n_rows);
            assert_eq!(a.n_cols, n_cols);
            for r in 0..n_rows {
                for k in a.indptr[r]..a.indptr[r + 1] {
                    triplets.push((r, a.indices[k], coef * a.data[k]));
                }
            }
        }
        Csr::from_triplets(n_rows, n_cols, &mut triplets)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.data[k];
            }
        }
        m
    }

    /// Largest |a_ij − a_ji|; zero for exactly symmetric assembly.
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut worst = 0.0_f64;
        for i in 0..self.n_rows {
            for j in 0..i {
                worst = worst.max((d[(i, j)] - d[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn transpose(&self) -> Csr {
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.data.len());
        for r in 0..self.n_rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                triplets.push((self.indices[k], r, self.data[k]));
            }
        }
        Csr::from_triplets(self.n_cols, self.n_rows, &mut triplets)
    }
}

/// Default size up to which symmetric solves use a cached dense Cholesky
/// factorization; larger systems fall back to Jacobi-preconditioned CG.
pub const DENSE_SOLVER_THRESHOLD: usize = 3000;

/// CG convergence: relative residual target and iteration cap multiplier.
const CG_TOL: f64 = 1e-12;
const CG_MAX_ITER_FACTOR: usize = 40;

/// Cached solver for a symmetric positive definite matrix.
pub struct SpdSolver {
    n: usize,
    backend: SolverBackend,
}

enum SolverBackend {
    Dense(Cholesky<f64, Dyn>),
    Cg { a: Csr, inv_diag: Vec<f64> },
}

impl SpdSolver {
    pub fn new(a: &Csr) -> Result<SpdSolver> {
        SpdSolver::with_threshold(a, DENSE_SOLVER_THRESHOLD)
    }

    pub fn with_threshold(a: &Csr, dense_threshold: usize) -> Result<SpdSolver> {
        assert_eq!(a.n_rows, a.n_cols);
        let backend = if a.n_rows <= dense_threshold {
            let chol = Cholesky::new(a.to_dense()).ok_or_else(|| Error::Singular {
                detail: "Cholesky factorization failed; matrix is not SPD".into(),
            })?;
            SolverBackend::Dense(chol)
        } else {
            let diag = a.diag();
            let mut inv_diag = Vec::with_capacity(diag.len());
            for (i, d) in diag.iter().enumerate() {
                if *d <= 0.0 {
                    return Err(Error::Singular {
                        detail: format!("nonpositive diagonal entry {} at row {}", d, i),
                    });
                }
                inv_diag.push(1.0 / d);
            }
            SolverBackend::Cg { a: a.clone(), inv_diag }
        };
        Ok(SpdSolver { n: a.n_rows, backend })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.backend {
            SolverBackend::Dense(chol) => {
                let x = chol.solve(&nalgebra::DVector::from_row_slice(b));
                Ok(x.iter().copied().collect())
            }
            SolverBackend::Cg { a, inv_diag } => cg_solve(a, inv_diag, b),
        }
    }
}

fn cg_solve(a: &Csr, inv_diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n_rows;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = CG_MAX_ITER_FACTOR * n;
    for _ in 0..max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Singular {
                detail: "conjugate gradients met nonpositive curvature".into(),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= CG_TOL * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Singular {
        detail: format!(
            "conjugate gradients did not reach {:.1e} in {} iterations",
            CG_TOL, max_iter
        ),
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Weighted ℓ^q norm (Σ w_i |x_i|^q)^{1/q}; for q = 2 with unit weights
/// this is the Euclidean norm.
pub fn norm_wq(x: &[f64], w: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        x.iter()
            .zip(w)
            .map(|(xi, wi)| wi * xi * xi)
            .sum::<f64>()
            .sqrt()
    } else {
        x.iter()
            .zip(w)
            .map(|(xi, wi)| wi * xi.abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Largest eigenvalue estimate of the pencil (A, diag(w)) by power
/// iteration in the w-inner product. Returns a lower bound that is tight
/// after enough iterations.
pub fn lambda_max_lower(a: &Csr, w: &[f64], iters: usize, seed: u64) -> f64 {
    let n = a.n_rows;
    let mut rng = rng_from_seed(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut best = 0.0_f64;
    for _ in 0..iters {
        let nx = norm_wq(&x, w, 2.0);
        if nx == 0.0 {
            break;
        }
        for v in &mut x {
            *v /= nx;
        }
        let ax = a.matvec(&x);
        // Rayleigh quotient xᵀAx / xᵀWx with x normalized in w.
        best = best.max(dot(&x, &ax));
        for i in 0..n {
            x[i] = ax[i] / w[i];
        }
    }
    best
}

/// Smallest eigenvalue estimate of the pencil (A, diag(w)) by inverse
/// power iteration through a prepared solver for A.
pub fn lambda_min_estimate(
    solver: &SpdSolver,
    a: &Csr,
    w: &[f64],
    iters: usize,
    seed: u64,
) -> Result<f64> {
    let n = a.n_rows;
    let mut rng = rng_from_seed(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut rayleigh = 0.0;
    for _ in 0..iters {
        let nx = norm_wq(&x, w, 2.0);
        if nx == 0.0 {
            return Err(Error::Singular {
                detail: "inverse iteration collapsed to zero".into(),
            });
        }
        for v in &mut x {
            *v /= nx;
        }
        let wx: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| xi * wi).collect();
        let y = solver.solve(&wx)?;
        let ay = a.matvec(&y);
        let wy: f64 = y.iter().zip(w).map(|(yi, wi)| wi * yi * yi).sum();
        rayleigh = dot(&y, &ay) / wy;
        x = y;
    }
    Ok(rayleigh)
}

/// Lower bound for the operator norm of T between weighted ℓ^q spaces, by
/// the nonlinear power method with multiple seeded starts. Every reported
/// value is a genuine ratio ‖Tx‖_{w,q}/‖x‖_{w,q}.
#[allow(clippy::too_many_arguments)]
pub fn lq_norm_lower_bound(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    adjoint: &dyn Fn(&[f64]) -> Vec<f64>,
    n: usize,
    w: &[f64],
    q: f64,
    starts: usize,
    iters: usize,
    seed: u64,
) -> f64 {
    assert!(q > 1.0);
    let qc = q / (q - 1.0);
    let mut rng = rng_from_seed(seed);
    let mut best = 0.0_f64;
    for _ in 0..starts {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        for _ in 0..iters {
            let nx = norm_wq(&x, w, q);
            if !(nx > 0.0) || !nx.is_finite() {
                break;
            }
            for v in &mut x {
                *v /= nx;
            }
            let y = apply(&x);
            best = best.max(norm_wq(&y, w, q));
            // Ascent: dualize, pull back, dualize with the conjugate
            // exponent.
            let xi = dual_map(&y, q);
            let z = adjoint(&xi);
            x = dual_map(&z, qc);
        }
    }
    best
}

fn dual_map(y: &[f64], q: f64) -> Vec<f64> {
    y.iter()
        .map(|v| v.abs().powf(q - 1.0) * v.signum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spd() -> Csr {
        // Tridiagonal [2, -1] on 5 unknowns.
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        Csr::from_triplets(n, n, &mut t)
    }

    #[test]
    fn triplets_merge_duplicates() {
        let mut t = vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 5.0), (0, 1, 3.0)];
        let a = Csr::from_triplets(2, 2, &mut t);
        let d = a.to_dense();
        assert_eq!(d[(0, 0)], 3.0);
        assert_eq!(d[(0, 1)], 3.0);
        assert_eq!(d[(1, 0)], 5.0);
        assert_eq!(a.asymmetry(), 2.0);
    }

    #[test]
    fn dense_and_cg_paths_agree() {
        let a = small_spd();
        let b = vec![1.0, 0.0, 2.0, -1.0, 0.5];
        let dense = SpdSolver::with_threshold(&a, 100).unwrap();
        let cg = SpdSolver::with_threshold(&a, 1).unwrap();
        let xd = dense.solve(&b).unwrap();
        let xc = cg.solve(&b).unwrap();
        for (u, v) in xd.iter().zip(&xc) {
            assert!((u - v).abs() <= 1e-10);
        }
        let residual = a.matvec(&xd);
        for (ri, bi) in residual.iter().zip(&b) {
            assert!((ri - bi).abs() <= 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut t = vec![(0, 0, 1.0), (1, 1, -1.0)];
        let a = Csr::from_triplets(2, 2, &mut t);
        assert!(SpdSolver::with_threshold(&a, 100).is_err());
        let cg = SpdSolver::with_threshold(&a, 0);
        assert!(cg.is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n nodes are exact through degree 2n−1.
        let (x, w) = gauss_legendre(5);
        let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        assert!((integral - 2.0 / 9.0).abs() <= 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() <= 1e-14);
        // Odd monomials vanish by symmetry.
        let odd: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(3)).sum();
        assert!(odd.abs() <= 1e-15);
    }

    #[test]
    fn lambda_extremes_bracket_the_tridiagonal_spectrum() {
        // Eigenvalues of [2,-1] with n = 5 are 2 − 2cos(kπ/6).
        let a = small_spd();
        let w = vec![1.0; 5];
        let exact_max = 2.0 - 2.0 * (5.0 * std::f64::consts::PI / 6.0).cos();
        let exact_min = 2.0 - 2.0 * (std::f64::consts::PI / 6.0).cos();
        let hi = lambda_max_lower(&a, &w, 200, 3);
        assert!(hi <= exact_max + 1e-9);
        assert!(hi >= exact_max - 1e-6);
        let solver = SpdSolver::with_threshold(&a, 100).unwrap();
        let lo = lambda_min_estimate(&solver, &a, &w, 60, 4).unwrap();
        assert!((lo - exact_min).abs() <= 1e-9);
    }

    #[test]
    fn q_norm_lower_bound_matches_small_diagonal_operator() {
        // Diagonal operator diag(3, 1) has q-norm 3 for every q.
        let apply = |x: &[f64]| vec![3.0 * x[0], x[1]];
        let w = vec![1.0, 1.0];
        for q in [1.5, 2.0, 4.0] {
            let est = lq_norm_lower_bound(&apply, &apply, 2, &w, q, 10, 20, 42);
            assert!(est <= 3.0 + 1e-12);
            assert!(est >= 3.0 - 1e-9, "q = {} estimate {}", q, est);
        }
    }

    #[test]
    fn q_norm_lower_bound_on_nonnormal_matrix_vs_random_search() {
        // 2×2 shear [[1, 2], [0, 1]] in weighted ℓ^{1.5}.
        let apply = |x: &[f64]| vec![x[0] + 2.0 * x[1], x[1]];
        let adjoint = |x: &[f64]| vec![x[0], 2.0 * x[0] / 3.0 + x[1]];
        // Adjoint w.r.t. the w-pairing with w = (1, 3):
        // ⟨Ax, y⟩_w = x₁y₁ + 2x₂y₁ + 3x₂y₂ = ⟨x, A*y⟩_w.
        let w = vec![1.0, 3.0];
        let q = 1.5;
        let est = lq_norm_lower_bound(&apply, &adjoint, 2, &w, q, 20, 40, 7);
        // Dense random search for the same quantity.
        let mut rng = rng_from_seed(11);
        let mut brute = 0.0_f64;
        for _ in 0..20000 {
            let x = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
            let r = norm_wq(&apply(&x), &w, q) / norm_wq(&x, &w, q);
            brute = brute.max(r);
        }
        assert!(est >= brute - 1e-6, "boyd {} vs brute {}", est, brute);
        assert!(est <= brute + 5e-3);
    }
}
