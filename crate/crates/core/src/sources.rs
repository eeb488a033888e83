//! Fields of moving point sources and the beam decomposition of the packet.
//!
//! A point source moving along the axis with speed `c` radiates the retarded
//! field `u⁺`, supported behind it (`x₁ + ct > 0`), and the advanced field `u⁻`,
//! supported in front of it. Their sum, shifted into complex space-time by
//! `x₁ → x₁ − iε/2`, `t → t − iε/(2c)`, is the non-stationary Gaussian beam.
//! Superposing beams over the spatial frequency `q` with the density
//! `F(q) = a q^{−ν−1} exp[−γ(q + κ²/q)]` reproduces the wave packet.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{GwpError, Result};
use crate::packet::PacketParams;
use crate::quad::{trapezoid_refine, Estimate};
use crate::special::{bessel_k, sqrt_pos_re};

/// Value of a source field, which is undefined on the source plane
/// `x₁ + ct = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Regular(Complex64),
    Singular,
}

impl FieldValue {
    pub fn value(self) -> Option<Complex64> {
        match self {
            FieldValue::Regular(v) => Some(v),
            FieldValue::Singular => None,
        }
    }

    pub fn is_singular(self) -> bool {
        matches!(self, FieldValue::Singular)
    }
}

/// Source plane coordinate `x₁ + ct` and the unregularized phase
/// `θ₀ = x₁ − ct + Σⱼ xⱼ²/(x₁ + ct)`.
fn split_phase(coords: &[f64], t: f64, c: f64) -> (f64, f64) {
    let w = coords[0] + c * t;
    let transverse: f64 = coords[1..].iter().map(|x| x * x).sum();
    (w, coords[0] - c * t + transverse / w)
}

/// `exp(iqθ₀) / √(x₁+ct)^{n−1}`, with the root of a negative `x₁+ct` taken as
/// the limit from `x₁ + ct − i0`. That is the branch the regularized beam
/// approaches as `ε → 0⁺`.
fn unregularized(q: f64, coords: &[f64], t: f64, c: f64) -> FieldValue {
    let (w, theta0) = split_phase(coords, t, c);
    if w == 0.0 {
        return FieldValue::Singular;
    }
    let root = sqrt_pos_re(Complex64::new(w, -0.0));
    let denom = root.powu((coords.len() - 1) as u32);
    FieldValue::Regular(Complex64::from_polar(1.0, q * theta0) / denom)
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(GwpError::Precondition(format!(
            "spatial frequency q must be positive, got {q}"
        )))
    }
}

/// Retarded field `Θ(x₁+ct) exp(iqθ₀) / √(x₁+ct)^{n−1}`: zero in front of the
/// source.
pub fn retarded_field(q: f64, coords: &[f64], t: f64, c: f64) -> Result<FieldValue> {
    check_q(q)?;
    let w = coords[0] + c * t;
    Ok(if w < 0.0 {
        FieldValue::Regular(Complex64::new(0.0, 0.0))
    } else {
        unregularized(q, coords, t, c)
    })
}

/// Advanced field `Θ(−x₁−ct) exp(iqθ₀) / √(x₁+ct)^{n−1}`: zero behind the
/// source.
pub fn advanced_field(q: f64, coords: &[f64], t: f64, c: f64) -> Result<FieldValue> {
    check_q(q)?;
    let w = coords[0] + c * t;
    Ok(if w > 0.0 {
        FieldValue::Regular(Complex64::new(0.0, 0.0))
    } else {
        unregularized(q, coords, t, c)
    })
}

/// `u⁺ + u⁻` shifted into complex space-time by `ε`; this is the Gaussian beam
/// `exp(iqθ) / Πⱼ √(x₁ + ct − iε)` with every `εⱼ = ε`.
pub fn regularized_sum(q: f64, coords: &[f64], t: f64, c: f64, epsilon: f64) -> Result<Complex64> {
    check_q(q)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GwpError::Precondition(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let w = Complex64::new(coords[0] + c * t, -epsilon);
    let transverse: f64 = coords[1..].iter().map(|x| x * x).sum();
    let theta = coords[0] - c * t + transverse / w;
    let denom = sqrt_pos_re(w).powu((coords.len() - 1) as u32);
    Ok((Complex64::new(0.0, q) * theta).exp() / denom)
}

/// Amplitude `A = −e^{−iπ/4} 4√π c²` of the elementary source pulse.
pub fn pulse_amplitude(c: f64) -> Complex64 {
    -Complex64::from_polar(4.0 * PI.sqrt() * c * c, -FRAC_PI_4)
}

/// Time profile `φ(q, t) = A √q exp(−2iqct)` of the source that emits the
/// beam of spatial frequency `q`.
pub fn elementary_pulse(q: f64, t: f64, c: f64) -> Result<Complex64> {
    check_q(q)?;
    Ok(pulse_amplitude(c) * q.sqrt() * Complex64::from_polar(1.0, -2.0 * q * c * t))
}

/// Normalization `a = p^{2ν} / ((2γ)^ν √(2π))` of the spectral density.
pub fn spectral_normalization(params: &PacketParams) -> f64 {
    let (p, nu, gamma) = (params.p(), params.nu(), params.gamma());
    (2.0 * nu * p.ln() - nu * (2.0 * gamma).ln()).exp() / (2.0 * PI).sqrt()
}

/// Beam spectral density `F(q) = a q^{−ν−1} exp[−γ(q + κ²/q)]`, zero for `q ≤ 0`.
pub fn spectral_density(q: f64, params: &PacketParams) -> f64 {
    if q.is_nan() || q <= 0.0 {
        return 0.0;
    }
    let gamma = params.gamma();
    let kappa = params.kappa();
    let log = spectral_normalization(params).ln()
        - (params.nu() + 1.0) * q.ln()
        - gamma * (q + kappa * kappa / q);
    log.exp()
}

/// Composite source pulse `Φ(t) = B σ^{ν−1/2} K_{ν−1/2}(σ)` with
/// `σ = p √(1 + 2ict/γ)` and `B = −4c² e^{−iπ/4} p / √γ`.
pub fn composite_pulse(t: f64, params: &PacketParams) -> Result<Complex64> {
    let (p, nu, gamma, c) = (params.p(), params.nu(), params.gamma(), params.c());
    let sigma = p * sqrt_pos_re(Complex64::new(1.0, 2.0 * c * t / gamma));
    let b = -Complex64::from_polar(4.0 * c * c * p / gamma.sqrt(), -FRAC_PI_4);
    Ok(b * sigma.powf(nu - 0.5) * bessel_k(nu - 0.5, sigma)?)
}

/// Settings for the beam-frequency quadratures.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Target relative change between successive trapezoid refinements.
    pub rel_tol: f64,
    /// Integrand decay (in e-folds below its peak scale) at which the `u`
    /// range is truncated.
    pub cutoff: f64,
    pub max_levels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            cutoff: 60.0,
            max_levels: 14,
        }
    }
}

/// Integrates `g(q)·F(q)` over `q > 0` after substituting `q = κe^u`, where
/// `F dq = a κ^{−ν} e^{−νu} e^{−p cosh u} du`. The returned value is scaled by
/// `e^p`. `log_g` gives `ln g(κe^u)`.
fn integrate_density(
    params: &PacketParams,
    spec: &QuadratureSpec,
    log_g: impl Fn(f64) -> Complex64,
) -> Result<Estimate<Complex64>> {
    let (p, nu) = (params.p(), params.nu());
    let kappa = params.kappa();
    let prefactor_log = spectral_normalization(params).ln() - nu * kappa.ln();
    // Half-width where p (cosh u − 1) outgrows |ν|u by the cutoff.
    let mut half: f64 = 0.5;
    while p * (half.cosh() - 1.0) - nu.abs() * half < spec.cutoff {
        half += 0.25;
    }
    let step = (half / 8.0).min(0.25);
    trapezoid_refine(
        |u: f64| {
            let exponent = prefactor_log - nu * u - p * (u.cosh() - 1.0) + log_g(u);
            if exponent.re < crate::packet::EXP_UNDERFLOW {
                Complex64::new(0.0, 0.0)
            } else {
                exponent.exp()
            }
        },
        half,
        step,
        spec.rel_tol,
        spec.max_levels,
    )
}

/// `Φ(t)` computed as `∫₀^∞ F(q) φ(q, t) dq`, independently of the closed form.
pub fn composite_pulse_by_quadrature(
    t: f64,
    params: &PacketParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let kappa = params.kappa();
    let c = params.c();
    let log_amp = pulse_amplitude(c).ln();
    let est = integrate_density(params, spec, |u| {
        let q = kappa * u.exp();
        log_amp + 0.5 * q.ln() + Complex64::new(0.0, -2.0 * q * c * t)
    })?;
    Ok(est.value * (-params.p()).exp())
}

/// `e^p ∫₀^∞ F(q) exp(iqθ) dq` for a complex phase with `Im θ ≥ 0`, which
/// equals `e^p √(2/π) (ps)^ν K_ν(ps)` with `s = √(1 − iθ/γ)`.
pub fn beam_profile_integral_scaled(
    theta: Complex64,
    params: &PacketParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    if theta.im < 0.0 {
        return Err(GwpError::Precondition(format!(
            "phase must have Im θ ≥ 0, got {theta}"
        )));
    }
    let kappa = params.kappa();
    Ok(integrate_density(params, spec, |u| {
        Complex64::new(0.0, kappa * u.exp()) * theta
    })?
    .value)
}

/// Beam-superposition oracle for the wave packet:
/// `∫₀^∞ F(q) ψ_beam(q, x, t) dq`, computed by quadrature over `q`.
pub fn beam_superposition_oracle(
    coords: &[f64],
    t: f64,
    params: &PacketParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    beam_superposition_oracle_scaled(coords, t, params, spec).map(|v| v * (-params.p()).exp())
}

/// `e^p` times [`beam_superposition_oracle`].
pub fn beam_superposition_oracle_scaled(
    coords: &[f64],
    t: f64,
    params: &PacketParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    if coords.len() != params.dim() {
        return Err(GwpError::Precondition(format!(
            "point has {} coordinates, packet is {}-dimensional",
            coords.len(),
            params.dim()
        )));
    }
    let theta = params.theta(coords, t);
    // ψ_beam(q) = e^{iqθ} / D, and the denominator does not depend on q.
    let beam_at_zero = params.beam(f64::MIN_POSITIVE, coords, t);
    let profile = beam_profile_integral_scaled(theta, params, spec)?;
    Ok(profile * beam_at_zero)
}
