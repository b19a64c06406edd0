//! Scalar nonlinearities and nonlocal couplings for quasilinear problems.
//!
//! Each nonlinearity is a smooth increasing F with F(0) = 0 available
//! together with its derivative G = F′ (the coefficient multiplier in
//! divergence form, since −∇·(μ∇F(u)) = −∇·(F′(u)μ∇u)) and its inverse
//! (the back-transform of the linearizing substitution w = F(u)).
//!
//! The Fermi–Dirac member is the complete integral of order one half,
//!     F_{1/2}(t) = (1/Γ(3/2)) ∫₀^∞ √ε/(1+e^{ε−t}) dε,
//! evaluated by composite Gauss–Legendre quadrature after ε = x², which
//! removes the square root and leaves an analytic integrand. Reference
//! facts used by the tests: the alternating series Σ(−1)^{k+1}e^{kt}k^{-3/2}
//! for t < 0, the value F(0) = (1−2^{-1/2})ζ(3/2), and the classical
//! limit F(t)/e^t → 1 as t → −∞.

use crate::linalg::Csr;
use crate::{Error, Result};

/// Quadrature layout for the Fermi–Dirac integrals: segments of this
/// length with this many Gauss–Legendre nodes each resolve the Fermi
/// edge (width ~ t^{-1/2} in the x = √ε variable) far below 1e-10 for
/// the arguments the toolkit uses (|t| ≤ 40).
const FERMI_SEGMENT: f64 = 0.25;
const FERMI_NODES: usize = 16;
/// Integrand support: beyond x² = t + 45 the tail is below 1e-17.
const FERMI_TAIL: f64 = 45.0;

fn fermi_quadrature(t: f64, power_of_x: u32) -> f64 {
    let front = match power_of_x {
        2 => 4.0 / std::f64::consts::PI.sqrt(),
        0 => 2.0 / std::f64::consts::PI.sqrt(),
        _ => unreachable!(),
    };
    let upper = (t.max(0.0) + FERMI_TAIL).sqrt();
    let (xs, ws) = crate::linalg::gauss_legendre(FERMI_NODES);
    let n_seg = (upper / FERMI_SEGMENT).ceil() as usize;
    let seg = upper / n_seg as f64;
    let mut total = 0.0;
    for s in 0..n_seg {
        let a = s as f64 * seg;
        let half = 0.5 * seg;
        let mid = a + half;
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            let xx = mid + half * x;
            let arg = xx * xx - t;
            // e^{arg} overflows to +∞ for large arg; 1/(1+∞) = 0 is the
            // correct limit, so no clamping is needed.
            let occupancy = 1.0 / (1.0 + arg.exp());
            let weight = if power_of_x == 2 { xx * xx } else { 1.0 };
            acc += w * weight * occupancy;
        }
        total += acc * half;
    }
    front * total
}

/// Complete Fermi–Dirac integral of order 1/2.
pub fn fermi_dirac_half(t: f64) -> f64 {
    fermi_quadrature(t, 2)
}

/// Complete Fermi–Dirac integral of order −1/2 (the derivative of the
/// order-1/2 integral).
pub fn fermi_dirac_minus_half(t: f64) -> f64 {
    fermi_quadrature(t, 0)
}

/// The catalog of scalar nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// F(s) = s: the linear case, G ≡ 1.
    Identity,
    /// F(s) = e^s − 1: exponential growth with F(0) = 0, G = e^s.
    Exponential,
    /// F(s) = F_{1/2}(s) − F_{1/2}(0): shifted Fermi–Dirac integral,
    /// increasing with saturating derivative for s → −∞.
    FermiDiracHalf,
}

/// Names accepted in configuration files.
pub const NONLINEARITY_NAMES: [(&str, Nonlinearity); 3] = [
    ("IDENTITY", Nonlinearity::Identity),
    ("EXPONENTIAL", Nonlinearity::Exponential),
    ("FERMI_DIRAC_HALF", Nonlinearity::FermiDiracHalf),
];

impl Nonlinearity {
    pub fn by_name(name: &str) -> Result<Nonlinearity> {
        NONLINEARITY_NAMES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, k)| *k)
            .ok_or_else(|| Error::ConfigError {
                detail: format!(
                    "unknown nonlinearity '{}'; valid names: {}",
                    name,
                    NONLINEARITY_NAMES
                        .iter()
                        .map(|(n, _)| *n)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Identity => "IDENTITY",
            Nonlinearity::Exponential => "EXPONENTIAL",
            Nonlinearity::FermiDiracHalf => "FERMI_DIRAC_HALF",
        }
    }

    /// F(s).
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::Identity => s,
            Nonlinearity::Exponential => s.exp_m1(),
            Nonlinearity::FermiDiracHalf => fermi_dirac_half(s) - ETA_THREE_HALVES,
        }
    }

    /// G(s) = F′(s); strictly positive for every member.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::Identity => 1.0,
            Nonlinearity::Exponential => s.exp(),
            Nonlinearity::FermiDiracHalf => fermi_dirac_minus_half(s),
        }
    }

    /// F⁻¹(w); fails with the range error when w is outside F's image.
    pub fn inverse(&self, w: f64) -> Result<f64> {
        match self {
            Nonlinearity::Identity => Ok(w),
            Nonlinearity::Exponential => {
                if w <= -1.0 {
                    return Err(Error::EtaBounds {
                        detail: format!("exp(s)-1 never reaches {}", w),
                    });
                }
                Ok(w.ln_1p())
            }
            Nonlinearity::FermiDiracHalf => {
                let target = w + ETA_THREE_HALVES;
                if target <= 0.0 {
                    return Err(Error::EtaBounds {
                        detail: format!(
                            "the Fermi-Dirac integral is positive; cannot invert {}",
                            w
                        ),
                    });
                }
                invert_fermi_half(target)
            }
        }
    }
}

/// F_{1/2}(0) = (1 − 2^{-1/2}) ζ(3/2).
pub const ETA_THREE_HALVES: f64 = 0.765147024625408;

/// Newton iteration with bisection safeguard for F_{1/2}(s) = target.
fn invert_fermi_half(target: f64) -> Result<f64> {
    // Starting guess from the two asymptotic regimes: F ≈ e^s for small
    // values, F ≈ (4/(3√π)) s^{3/2} for large ones.
    let mut s = if target < 0.7 {
        target.ln()
    } else {
        (0.75 * std::f64::consts::PI.sqrt() * target).powf(2.0 / 3.0)
    };
    let (mut lo, mut hi) = (-745.0_f64, 1e4_f64);
    for _ in 0..100 {
        let f = fermi_dirac_half(s) - target;
        if f.abs() <= 1e-13 * target.max(1.0) {
            return Ok(s);
        }
        if f > 0.0 {
            hi = hi.min(s);
        } else {
            lo = lo.max(s);
        }
        let d = fermi_dirac_minus_half(s);
        let mut next = s - f / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        s = next;
    }
    Err(Error::AuxSingular {
        detail: format!("Fermi-Dirac inversion stalled at target {}", target),
    })
}

/// Bounded positive couplings for nonlocal conductivity scalings.
#[derive(Debug, Clone, Copy)]
pub enum EtaFunction {
    /// η(s) = gain·s.
    Linear { gain: f64 },
    /// η(s) = scale/(1+s): conductivity decreasing with the coupling.
    Reciprocal { scale: f64 },
}

impl EtaFunction {
    /// Evaluate and fail when the result leaves the admissible range
    /// (0, ∞) — a vanishing or negative conductivity scale breaks
    /// ellipticity.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let v = match self {
            EtaFunction::Linear { gain } => gain * s,
            EtaFunction::Reciprocal { scale } => scale / (1.0 + s),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::EtaBounds {
                detail: format!("coupling value {} is outside (0, inf)", v),
            });
        }
        Ok(v)
    }
}

/// The nonlocal coupling functional ⟨u, φ⟩_M = uᵀ M φ.
pub fn nonlocal_coupling(u: &[f64], m: &Csr, profile: &[f64]) -> f64 {
    crate::linalg::dot(u, &m.matvec(profile))
}
