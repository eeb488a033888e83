//! Closed forms of the Gaussian Wave Packet.
//!
//! In `n` spatial dimensions, with `x = (x₁, …, xₙ)` and time `t`,
//!
//! ```text
//! θ = x₁ − ct + Σⱼ xⱼ² / (x₁ + ct − iεⱼ)
//! s = √(1 − iθ/γ)                      (Re s ≥ 1)
//! ψ = √(2/π) (ps)^ν K_ν(ps) / Πⱼ √(x₁ + ct − iεⱼ)
//! ```
//!
//! and its spatial Fourier transform (`ψ̂(k) = ∫ ψ e^{−ik·x} dⁿx`) is
//!
//! ```text
//! ψ̂ = (2π)^{n/2} e^{iπ(n−1)/4} p^{2ν} γ^{−ν} / (k (k+k₁)^{ν+(n−1)/2})
//!     · exp[−(k+k₁)γ/2 − Σⱼ kⱼ²εⱼ / (2(k+k₁)) − p²/(2γ(k+k₁)) − ikct]
//! ```
//!
//! Every evaluator has a `_scaled` twin multiplied by `e^p`, the inverse of the
//! packet's peak decay, so that large `p` does not underflow.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{GwpError, Result};
use crate::special::{bessel_k_scaled, sqrt_pos_re};

/// Real-part threshold below which `exp` underflows in binary64.
pub const EXP_UNDERFLOW: f64 = -745.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of one Gaussian Wave Packet.
///
/// `epsilons` holds one transverse length per transverse axis, so the spatial
/// dimension is `epsilons.len() + 1`. Time is not a parameter; it is passed to
/// each evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketParams {
    p: f64,
    nu: f64,
    gamma: f64,
    epsilons: Vec<f64>,
    c: f64,
}

impl PacketParams {
    pub fn new(p: f64, nu: f64, gamma: f64, epsilons: Vec<f64>, c: f64) -> Result<Self> {
        let bad = |what: String| Err(GwpError::InvalidParams(what));
        if !(p > 0.0 && p.is_finite()) {
            return bad(format!("p must be positive, got {p}"));
        }
        if !nu.is_finite() {
            return bad(format!("nu must be finite, got {nu}"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {gamma}"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return bad(format!("c must be positive, got {c}"));
        }
        if epsilons.is_empty() {
            return bad("at least one transverse epsilon is required (dim >= 2)".into());
        }
        if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return bad(format!("every epsilon must be positive, got {e}"));
        }
        Ok(Self {
            p,
            nu,
            gamma,
            epsilons,
            c,
        })
    }

    /// Two-dimensional packet with a single transverse length.
    pub fn new_2d(p: f64, nu: f64, gamma: f64, eps: f64, c: f64) -> Result<Self> {
        Self::new(p, nu, gamma, vec![eps], c)
    }

    /// Axially symmetric packet in `dim` dimensions (all transverse lengths equal).
    pub fn axisymmetric(dim: usize, p: f64, nu: f64, gamma: f64, eps: f64, c: f64) -> Result<Self> {
        if dim < 2 {
            return Err(GwpError::InvalidParams(format!(
                "dim must be >= 2, got {dim}"
            )));
        }
        Self::new(p, nu, gamma, vec![eps; dim - 1], c)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn dim(&self) -> usize {
        self.epsilons.len() + 1
    }

    /// Carrier spatial frequency `κ = p / (2γ)`.
    pub fn kappa(&self) -> f64 {
        self.p / (2.0 * self.gamma)
    }

    /// Orders outside `[-10, 10]` are accepted but not covered by the test suite.
    pub fn nu_in_tested_range(&self) -> bool {
        self.nu.abs() <= 10.0
    }

    /// Longitudinal width of the large-p limit, `σ₁ = 2γ/√p`.
    pub fn sigma_long(&self) -> f64 {
        2.0 * self.gamma / self.p.sqrt()
    }

    /// Transverse width of the large-p limit along axis `j+1`, `σ = √(γεⱼ/p)`.
    pub fn sigma_trans(&self, j: usize) -> f64 {
        (self.gamma * self.epsilons[j] / self.p).sqrt()
    }

    /// Asymptotic widths for every axis, longitudinal first.
    pub fn sigmas(&self) -> Vec<f64> {
        std::iter::once(self.sigma_long())
            .chain((0..self.epsilons.len()).map(|j| self.sigma_trans(j)))
            .collect()
    }

    /// Same packet with every length multiplied by `lambda` and `p` kept fixed
    /// (so `κ → κ/λ`).
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.p,
            self.nu,
            self.gamma * lambda,
            self.epsilons.iter().map(|e| e * lambda).collect(),
            self.c,
        )
    }

    /// Same packet with `p` replaced.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(p, self.nu, self.gamma, self.epsilons.clone(), self.c)
    }

    /// Packet whose spectrum reproduces `|ψ̂|²/kⁿ` up to the factor `1/k^{n+1}`:
    /// lengths doubled, κ unchanged, order `2ν + (n−1)/2`.
    pub fn doubled(&self) -> Result<Self> {
        let n = self.dim() as f64;
        Self::new(
            2.0 * self.p,
            2.0 * self.nu + (n - 1.0) / 2.0,
            2.0 * self.gamma,
            self.epsilons.iter().map(|e| 2.0 * e).collect(),
            self.c,
        )
    }

    fn check_dim(&self, coords: &[f64]) {
        debug_assert_eq!(coords.len(), self.dim(), "point dimension mismatch");
    }

    /// `x₁ + ct − iεⱼ` for every transverse axis.
    fn shifted_axial(&self, x1: f64, t: f64) -> impl Iterator<Item = Complex64> + '_ {
        let axial = x1 + self.c * t;
        self.epsilons
            .iter()
            .map(move |&e| Complex64::new(axial, -e))
    }

    /// `Πⱼ √(x₁ + ct − iεⱼ)`, each root with positive real part.
    fn denominator(&self, x1: f64, t: f64) -> Complex64 {
        self.shifted_axial(x1, t).map(sqrt_pos_re).product()
    }

    /// Phase variable `θ`; `Im θ ≥ 0` for real points.
    pub fn theta(&self, coords: &[f64], t: f64) -> Complex64 {
        self.check_dim(coords);
        let x1 = coords[0];
        let mut theta = Complex64::new(x1 - self.c * t, 0.0);
        for (xj, w) in coords[1..].iter().zip(self.shifted_axial(x1, t)) {
            theta += xj * xj / w;
        }
        theta
    }

    /// `s = √(1 − iθ/γ)` with positive real part.
    pub fn s_value(&self, coords: &[f64], t: f64) -> Complex64 {
        s_from_theta(self.theta(coords, t), self.gamma)
    }

    /// `ψ(x, t)`. Underflows to zero once `p` exceeds roughly 700.
    pub fn evaluate(&self, coords: &[f64], t: f64) -> Complex64 {
        self.evaluate_scaled(coords, t) * (-self.p).exp()
    }

    /// `e^p ψ(x, t)`.
    pub fn evaluate_scaled(&self, coords: &[f64], t: f64) -> Complex64 {
        let s = self.s_value(coords, t);
        self.radial_profile_scaled(s) / self.denominator(coords[0], t)
    }

    /// `e^p √(2/π) (ps)^ν K_ν(ps)`, which is `e^{−p(s−1)}` for `ν = 1/2`.
    fn radial_profile_scaled(&self, s: Complex64) -> Complex64 {
        let decay = -self.p * (s - 1.0);
        if self.nu == 0.5 {
            return decay.exp();
        }
        let z = self.p * s;
        // Re z >= p > 0 for real evaluation points.
        let k = bessel_k_scaled(self.nu, z).expect("Re(ps) >= p > 0");
        (2.0 / PI).sqrt() * z.powf(self.nu) * k * decay.exp()
    }

    /// `ψ̂(k)` at time `t`.
    pub fn fourier(&self, k: &[f64], t: f64) -> Complex64 {
        self.fourier_with_shift(k, t, 0.0)
    }

    /// `e^p ψ̂(k)` at time `t`.
    pub fn fourier_scaled(&self, k: &[f64], t: f64) -> Complex64 {
        self.fourier_with_shift(k, t, self.p)
    }

    /// `|e^p ψ̂(k)|²`, skipping the phase.
    pub fn spectral_density_scaled(&self, k: &[f64]) -> f64 {
        match self.log_spectrum(k, self.p) {
            Some(log_mag) => (2.0 * log_mag).exp(),
            None => 0.0,
        }
    }

    fn fourier_with_shift(&self, k: &[f64], t: f64, shift: f64) -> Complex64 {
        let Some(log_mag) = self.log_spectrum(k, shift) else {
            return Complex64::new(0.0, 0.0);
        };
        let n = self.dim() as f64;
        let k_norm = norm(k);
        let phase = FRAC_PI_4 * (n - 1.0) - k_norm * self.c * t;
        Complex64::from_polar(log_mag.exp(), phase)
    }

    /// `ln|ψ̂(k)| + shift`, or `None` where the spectrum vanishes (k = 0, or the
    /// exponent underflows near `k + k₁ → 0`).
    fn log_spectrum(&self, k: &[f64], shift: f64) -> Option<f64> {
        debug_assert_eq!(k.len(), self.dim(), "frequency dimension mismatch");
        let k_norm = norm(k);
        if k_norm == 0.0 {
            return None;
        }
        let k1 = k[0];
        let transverse_sq: f64 = k[1..].iter().map(|v| v * v).sum();
        // k + k₁ without cancellation when k₁ < 0.
        let kp = if k1 >= 0.0 {
            k_norm + k1
        } else {
            transverse_sq / (k_norm - k1)
        };
        if kp <= 0.0 {
            return None;
        }
        let transverse: f64 = k[1..]
            .iter()
            .zip(&self.epsilons)
            .map(|(kj, e)| kj * kj * e)
            .sum();
        let exponent = -kp * self.gamma / 2.0
            - transverse / (2.0 * kp)
            - self.p * self.p / (2.0 * self.gamma * kp)
            + shift;
        if exponent < EXP_UNDERFLOW {
            return None;
        }
        let n = self.dim() as f64;
        let log_prefactor = 0.5 * n * (2.0 * PI).ln() + 2.0 * self.nu * self.p.ln()
            - self.nu * self.gamma.ln()
            - k_norm.ln()
            - (self.nu + (n - 1.0) / 2.0) * kp.ln();
        Some(log_prefactor + exponent)
    }

    /// Non-stationary Gaussian beam `exp(iqθ) / Πⱼ √(x₁ + ct − iεⱼ)`.
    pub fn beam(&self, q: f64, coords: &[f64], t: f64) -> Complex64 {
        let theta = self.theta(coords, t);
        (I * q * theta).exp() / self.denominator(coords[0], t)
    }

    /// Prefactor `C = p^{ν−1/2} e^{−p}` of the large-p limits, scaled by `e^p`.
    fn limit_prefactor_scaled(&self) -> f64 {
        self.p.powf(self.nu - 0.5)
    }

    /// Gaussian-envelope (Morlet) limit for large `p`.
    pub fn morlet_limit(&self, coords: &[f64], t: f64) -> Complex64 {
        self.morlet_limit_scaled(coords, t) * (-self.p).exp()
    }

    pub fn morlet_limit_scaled(&self, coords: &[f64], t: f64) -> Complex64 {
        self.check_dim(coords);
        let xi = coords[0] - self.c * t;
        let s1 = self.sigma_long();
        let mut exponent = Complex64::new(-xi * xi / (2.0 * s1 * s1), self.kappa() * xi);
        let mut denom = Complex64::new(1.0, 0.0);
        for (j, (&xj, &e)) in coords[1..].iter().zip(&self.epsilons).enumerate() {
            let sj = self.sigma_trans(j);
            exponent -= xj * xj / (2.0 * sj * sj);
            denom *= sqrt_pos_re(Complex64::new(0.0, -e));
        }
        self.limit_prefactor_scaled() * exponent.exp() / denom
    }

    /// Beam times longitudinal cutoff, `C ψ_beam(κ) exp(−κ(x₁−ct)²/(4γ))`.
    pub fn beam_cutoff_limit(&self, coords: &[f64], t: f64) -> Complex64 {
        self.beam_cutoff_limit_scaled(coords, t) * (-self.p).exp()
    }

    pub fn beam_cutoff_limit_scaled(&self, coords: &[f64], t: f64) -> Complex64 {
        let kappa = self.kappa();
        let xi = coords[0] - self.c * t;
        let cutoff = (-kappa * xi * xi / (4.0 * self.gamma)).exp();
        self.limit_prefactor_scaled() * self.beam(kappa, coords, t) * cutoff
    }

    /// Large-p limit at `ct` comparable to `ε`: the transverse width grows as
    /// `σⱼ √(1 + 4c²t²/εⱼ²)` and picks up a curvature phase.
    pub fn paraxial_time_limit(&self, coords: &[f64], t: f64) -> Complex64 {
        self.paraxial_time_limit_scaled(coords, t) * (-self.p).exp()
    }

    pub fn paraxial_time_limit_scaled(&self, coords: &[f64], t: f64) -> Complex64 {
        self.check_dim(coords);
        let kappa = self.kappa();
        let ct = self.c * t;
        let xi = coords[0] - ct;
        let s1 = self.sigma_long();
        let mut exponent = Complex64::new(-xi * xi / (2.0 * s1 * s1), kappa * xi);
        let mut denom = Complex64::new(1.0, 0.0);
        for (j, (&xj, &e)) in coords[1..].iter().zip(&self.epsilons).enumerate() {
            let spread = 1.0 + 4.0 * ct * ct / (e * e);
            let sj2 = self.sigma_trans(j).powi(2) * spread;
            exponent += Complex64::new(
                -xj * xj / (2.0 * sj2),
                2.0 * ct * kappa * xj * xj / (4.0 * ct * ct + e * e),
            );
            denom *= sqrt_pos_re(Complex64::new(2.0 * ct, -e));
        }
        self.limit_prefactor_scaled() * exponent.exp() / denom
    }

    /// Transverse width growth factor `√(1 + 4c²t²/εⱼ²)` of the paraxial limit.
    pub fn transverse_spread(&self, j: usize, t: f64) -> f64 {
        let ct = self.c * t;
        (1.0 + 4.0 * ct * ct / (self.epsilons[j] * self.epsilons[j])).sqrt()
    }
}

pub(crate) fn s_from_theta(theta: Complex64, gamma: f64) -> Complex64 {
    sqrt_pos_re(1.0 - I * theta / gamma)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Two-dimensional Morlet wavelet with its mean-correction term,
/// `exp(−x²/2σx² − y²/2σy²) [exp(−iκx) − exp(−κ²σx²/2)]`.
pub fn morlet_reference(x: f64, y: f64, kappa: f64, sigma_x: f64, sigma_y: f64) -> Complex64 {
    let envelope = (-x * x / (2.0 * sigma_x * sigma_x) - y * y / (2.0 * sigma_y * sigma_y)).exp();
    let correction = (-kappa * kappa * sigma_x * sigma_x / 2.0).exp();
    envelope * (Complex64::from_polar(1.0, -kappa * x) - correction)
}
