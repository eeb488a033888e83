//! Centers, RMS widths, uncertainty products and resolving powers.
//!
//! For a density `|ψ|²` the center is `x̄ = ∫ x |ψ|² / ∫ |ψ|²` and the width
//! is `Δx = (∫ (x − x̄)² |ψ|² / ∫ |ψ|²)^{1/2}`; the same functionals of `|ψ̂|²`
//! give `k̄` and `Δk`. Position integrals use tensor Gauss–Legendre panels on
//! a box that doubles until the moments settle, frequency integrals use polar
//! coordinates and the closed-form spectrum.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::cwt::{polar_breakpoints, ray_log_window};
use crate::error::{GwpError, Result};
use crate::grid::ComplexField;
use crate::packet::PacketParams;
use crate::quad::{adaptive, GaussLegendre, Multi, QuadValue};

/// Settings of the position-space box quadrature.
#[derive(Debug, Clone)]
pub struct BoxQuadrature {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Panels across the initial box.
    pub core_panels: usize,
    /// Panels in each newly added ring on each side.
    pub ring_panels: usize,
    /// Initial half-width in units of the supplied widths.
    pub core_widths: f64,
    /// Stop once norm, center and width change by less than this.
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for BoxQuadrature {
    fn default() -> Self {
        Self {
            order: 16,
            core_panels: 16,
            ring_panels: 4,
            core_widths: 8.0,
            rel_tol: 1e-8,
            max_doublings: 24,
        }
    }
}

/// Zeroth, first and second moments of a 2D density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionMoments {
    /// `∫ density`.
    pub mass: f64,
    pub center: [f64; 2],
    pub width: [f64; 2],
    /// Last relative change of (mass, center/width, width) when the box stopped growing.
    pub quad_err: f64,
}

/// Nodes and weights of the panels covering `[c − h, c + h]`, and of the ring
/// `[c ± h, c ± 2h]` added when the box doubles.
fn panel_nodes(gl: &GaussLegendre, lo: f64, hi: f64, panels: usize, out: &mut Vec<(f64, f64)>) {
    let step = (hi - lo) / panels as f64;
    for i in 0..panels {
        let a = lo + step * i as f64;
        out.extend(gl.mapped(a, a + step));
    }
}

fn tensor_sum<const N: usize>(
    f: &(impl Fn(f64, f64) -> Multi<N> + Sync),
    xs: &[(f64, f64)],
    ys: &[(f64, f64)],
) -> Multi<N> {
    let rows: Vec<Multi<N>> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let mut acc = Multi([0.0; N]);
            for &(y, wy) in ys {
                acc = acc + f(x, y) * (wx * wy);
            }
            acc
        })
        .collect();
    rows.into_iter().fold(Multi([0.0; N]), |a, b| a + b)
}

/// Integrates `f` over the plane on a box that starts at
/// `reference ± core_widths·widths` and doubles, reusing all previous nodes,
/// until `change(previous, current)` drops below `spec.rel_tol`. Returns the
/// integral and the last change.
pub fn box_integrate<const N: usize>(
    f: impl Fn(f64, f64) -> Multi<N> + Sync,
    reference: [f64; 2],
    widths: [f64; 2],
    spec: &BoxQuadrature,
    change: impl Fn(&Multi<N>, &Multi<N>) -> f64,
) -> Result<(Multi<N>, f64)> {
    if widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(GwpError::Precondition(format!(
            "box widths must be positive, got {widths:?}"
        )));
    }
    let gl = GaussLegendre::new(spec.order);
    let mut half = [spec.core_widths * widths[0], spec.core_widths * widths[1]];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    panel_nodes(
        &gl,
        reference[0] - half[0],
        reference[0] + half[0],
        spec.core_panels,
        &mut xs,
    );
    panel_nodes(
        &gl,
        reference[1] - half[1],
        reference[1] + half[1],
        spec.core_panels,
        &mut ys,
    );
    let mut sums = tensor_sum(&f, &xs, &ys);
    let mut last_change = f64::INFINITY;
    for level in 0..spec.max_doublings {
        let mut new_x = Vec::new();
        let mut new_y = Vec::new();
        for (axis, out) in [(0usize, &mut new_x), (1usize, &mut new_y)] {
            let (c, h) = (reference[axis], half[axis]);
            panel_nodes(&gl, c - 2.0 * h, c - h, spec.ring_panels, out);
            panel_nodes(&gl, c + h, c + 2.0 * h, spec.ring_panels, out);
        }
        let mut all_y = ys.clone();
        all_y.extend_from_slice(&new_y);
        let next = sums + tensor_sum(&f, &new_x, &all_y) + tensor_sum(&f, &xs, &new_y);
        xs.extend(new_x);
        ys = all_y;
        half = [2.0 * half[0], 2.0 * half[1]];
        last_change = change(&sums, &next);
        sums = next;
        if level >= 1 && last_change < spec.rel_tol {
            return Ok((sums, last_change));
        }
    }
    Err(GwpError::NonConvergence {
        what: "box quadrature (doubling)".into(),
        last_change,
    })
}

fn moments_from_sums(s: &Multi<5>, reference: [f64; 2]) -> ([f64; 2], [f64; 2], f64) {
    let [m0, mx, my, mxx, myy] = s.0;
    let offset = [mx / m0, my / m0];
    let var = [
        mxx / m0 - offset[0] * offset[0],
        myy / m0 - offset[1] * offset[1],
    ];
    (
        [reference[0] + offset[0], reference[1] + offset[1]],
        [var[0].max(0.0).sqrt(), var[1].max(0.0).sqrt()],
        m0,
    )
}

fn moment_change(old: &Multi<5>, new: &Multi<5>) -> f64 {
    let (c1, w1, m1) = moments_from_sums(old, [0.0, 0.0]);
    let (c2, w2, m2) = moments_from_sums(new, [0.0, 0.0]);
    [
        (m2 - m1).abs() / m2.abs(),
        (c2[0] - c1[0]).abs() / w2[0],
        (c2[1] - c1[1]).abs() / w2[1],
        (w2[0] - w1[0]).abs() / w2[0],
        (w2[1] - w1[1]).abs() / w2[1],
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Moments of `density(x, y)` over the plane, accumulated about
/// `reference`, which should be near the center. See [`box_integrate`].
pub fn position_moments(
    density: impl Fn(f64, f64) -> f64 + Sync,
    reference: [f64; 2],
    widths: [f64; 2],
    spec: &BoxQuadrature,
) -> Result<PositionMoments> {
    let (sums, quad_err) = box_integrate(
        |x, y| {
            let d = density(x, y);
            let (dx, dy) = (x - reference[0], y - reference[1]);
            Multi([d, d * dx, d * dy, d * dx * dx, d * dy * dy])
        },
        reference,
        widths,
        spec,
        moment_change,
    )?;
    let (center, width, mass) = moments_from_sums(&sums, reference);
    Ok(PositionMoments {
        mass,
        center,
        width,
        quad_err,
    })
}

/// Moments of `|ψ̂|²` in frequency space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyMoments {
    /// `∫ e^{2p} |ψ̂|² d²k`.
    pub mass_scaled: f64,
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub quad_err: f64,
}

const SPECTRAL_RADIAL_TOL: f64 = 1e-10;
const SPECTRAL_ANGULAR_TOL: f64 = 1e-9;

/// Frequency-space moments of a 2D packet in polar coordinates,
/// `d²k = k² d(ln k) dφ`, accumulated about `(κ, 0)`.
pub fn frequency_moments(params: &PacketParams) -> Result<FrequencyMoments> {
    if params.dim() != 2 {
        return Err(GwpError::Precondition(
            "moments are implemented for 2D packets".into(),
        ));
    }
    let kappa = params.kappa();
    let mut failure = None;
    // Far from the axis the density sinks into the underflow region, where a
    // relative target is meaningless; the on-axis ray sets an absolute floor.
    let mut radial = |phi: f64, abs_tol: f64| -> Multi<5> {
        let (s, c) = phi.sin_cos();
        let dir = [c, s];
        let Some((u0, half)) = ray_log_window(params, &dir, 4.0) else {
            return Multi([0.0; 5]);
        };
        let f = |u: f64| {
            let k = u.exp();
            let kv = [k * c, k * s];
            let d = params.spectral_density_scaled(&kv) * k * k;
            let dx = kv[0] - kappa;
            Multi([d, d * dx, d * kv[1], d * dx * dx, d * kv[1] * kv[1]])
        };
        let mut total = Multi([0.0; 5]);
        for (a, b) in [(u0 - half, u0), (u0, u0 + half)] {
            match adaptive(f, a, b, abs_tol, SPECTRAL_RADIAL_TOL, 4000) {
                Ok(est) => total = total + est.value,
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        total
    };
    let half_breaks = polar_breakpoints(params);
    let mut breaks: Vec<f64> = half_breaks.iter().rev().map(|b| -b).collect();
    breaks.extend_from_slice(&half_breaks[1..]);
    let on_axis = radial(0.0, 0.0).magnitude();
    let abs_tol = 1e-6 * SPECTRAL_RADIAL_TOL * on_axis;
    let angular_abs_tol = 1e-6 * SPECTRAL_ANGULAR_TOL * on_axis;
    let mut sums = Multi([0.0; 5]);
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let est = adaptive(
            |phi| radial(phi, abs_tol),
            w[0],
            w[1],
            angular_abs_tol,
            SPECTRAL_ANGULAR_TOL,
            4000,
        )?;
        sums = sums + est.value;
        err += est.error;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let (center, width, mass) = moments_from_sums(&sums, [kappa, 0.0]);
    Ok(FrequencyMoments {
        mass_scaled: mass,
        center,
        width,
        quad_err: err / mass + SPECTRAL_RADIAL_TOL,
    })
}

/// Which space [`centers_and_widths`] works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Position,
    Frequency,
}

/// Center and width of `|ψ|²` or `|ψ̂|²` for a 2D packet at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterWidth {
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub quad_err: f64,
}

/// Centers and widths in position space (at time `t`) or frequency space.
pub fn centers_and_widths(target: Target, params: &PacketParams, t: f64) -> Result<CenterWidth> {
    match target {
        Target::Position => {
            let m = packet_position_moments(params, t, &BoxQuadrature::default())?;
            Ok(CenterWidth {
                center: m.center,
                width: m.width,
                quad_err: m.quad_err,
            })
        }
        Target::Frequency => {
            let m = frequency_moments(params)?;
            Ok(CenterWidth {
                center: m.center,
                width: m.width,
                quad_err: m.quad_err,
            })
        }
    }
}

/// Position moments of `e^{2p}|ψ|²` for a 2D packet.
pub fn packet_position_moments(
    params: &PacketParams,
    t: f64,
    spec: &BoxQuadrature,
) -> Result<PositionMoments> {
    if params.dim() != 2 {
        return Err(GwpError::Precondition(
            "moments are implemented for 2D packets".into(),
        ));
    }
    let sig = params.sigmas();
    position_moments(
        |x, y| params.evaluate_scaled(&[x, y], t).norm_sqr(),
        [params.c() * t, 0.0],
        [sig[0], sig[1]],
        spec,
    )
}

/// `‖ψ‖₂` of a 2D packet by the same box quadrature as the moments.
pub fn l2_norm(params: &PacketParams, t: f64) -> Result<f64> {
    let m = packet_position_moments(params, t, &BoxQuadrature::default())?;
    Ok(m.mass.sqrt() * (-params.p()).exp())
}

/// `‖f‖₂` of a sampled field (Riemann sum over the grid).
pub fn l2_norm_field(field: &ComplexField) -> f64 {
    field.l2_norm_sq().sqrt()
}

/// Full set of localization metrics for one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub center_x: f64,
    pub center_y: f64,
    pub width_x: f64,
    pub width_y: f64,
    pub center_kx: f64,
    pub center_ky: f64,
    pub width_kx: f64,
    pub width_ky: f64,
    pub product_x: f64,
    pub product_y: f64,
    /// Scale resolving power, `None` when the packet is not directional.
    pub srp: Option<f64>,
    /// Angular resolving power in radians, `None` when not directional.
    pub arp: Option<f64>,
    pub directional: bool,
    pub quadrature_err: f64,
}

/// `(Δk_x·Δx, Δk_y·Δy)`.
pub fn uncertainty_products(position: &CenterWidth, frequency: &CenterWidth) -> (f64, f64) {
    (
        frequency.width[0] * position.width[0],
        frequency.width[1] * position.width[1],
    )
}

/// Scale and angular resolving powers and the directionality flag.
///
/// `SRP = (k̄_x + Δk_x)/(k̄_x − Δk_x)` and `ARP = 2 arccot(√(k̄_x² − Δk_x²)/Δk_y)`;
/// both are undefined unless the spectral ellipse excludes the origin,
/// `k̄_x > Δk_x`.
pub fn resolving_powers(frequency: &CenterWidth) -> (Option<f64>, Option<f64>, bool) {
    let kx = frequency.center[0];
    let dkx = frequency.width[0];
    let dky = frequency.width[1];
    let directional = kx > dkx;
    if !directional {
        return (None, None, false);
    }
    let srp = (kx + dkx) / (kx - dkx);
    let arp = 2.0 * (dky / (kx * kx - dkx * dkx).sqrt()).atan();
    (Some(srp), Some(arp), true)
}

/// Computes every metric of a 2D packet at `t = 0`.
pub fn moment_report(params: &PacketParams) -> Result<MomentReport> {
    let position = centers_and_widths(Target::Position, params, 0.0)?;
    let frequency = centers_and_widths(Target::Frequency, params, 0.0)?;
    let (product_x, product_y) = uncertainty_products(&position, &frequency);
    let (srp, arp, directional) = resolving_powers(&frequency);
    Ok(MomentReport {
        center_x: position.center[0],
        center_y: position.center[1],
        width_x: position.width[0],
        width_y: position.width[1],
        center_kx: frequency.center[0],
        center_ky: frequency.center[1],
        width_kx: frequency.width[0],
        width_ky: frequency.width[1],
        product_x,
        product_y,
        srp,
        arp,
        directional,
        quadrature_err: position.quad_err + frequency.quad_err,
    })
}

/// The two curve families of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// `ε/γ` held fixed while `p` varies.
    FixedEpsOverGamma,
    /// `2κε` held fixed while `p` varies.
    FixedKappaEps,
}

impl SweepMode {
    /// Family values used for the published curves.
    pub fn standard_values(self) -> &'static [f64] {
        match self {
            SweepMode::FixedEpsOverGamma => &[1.0 / 3.0, 2.0 / 3.0, 2.0],
            SweepMode::FixedKappaEps => &[4.0, 8.0, 64.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepMode::FixedEpsOverGamma => "eps-over-gamma",
            SweepMode::FixedKappaEps => "kappa-eps",
        }
    }
}

/// Packet of a sweep family at `√p`, taking `ε = 1` as the length unit:
/// `γ = 1/value` for fixed `ε/γ`, and `κ = value/2`, `γ = p/value` for fixed
/// `2κε`.
pub fn family_params(
    mode: SweepMode,
    value: f64,
    sqrt_p: f64,
    nu: f64,
    c: f64,
) -> Result<PacketParams> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(GwpError::InvalidParams(format!(
            "family value must be positive, got {value}"
        )));
    }
    let p = sqrt_p * sqrt_p;
    let gamma = match mode {
        SweepMode::FixedEpsOverGamma => 1.0 / value,
        SweepMode::FixedKappaEps => p / value,
    };
    PacketParams::new_2d(p, nu, gamma, 1.0, c)
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub sqrt_p: f64,
    pub report: MomentReport,
    /// `Δx/σ_x`, `Δy/σ_y`, `Δk_x·2σ_x`, `Δk_y·2σ_y` with the asymptotic widths
    /// `σ_x = 2γ/√p`, `σ_y = √(γε/p)`.
    pub ratios: [f64; 4],
    /// The same position ratios against the RMS widths of the Gaussian limit,
    /// `Δx/(σ_x/√2)` and `Δy/(σ_y/√2)`.
    pub rms_ratios: [f64; 2],
}

/// A curve family evaluated on a list of `√p` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub family_value: f64,
    /// The value is not one of the published curve families.
    pub nonstandard: bool,
    pub points: Vec<SweepPoint>,
}

/// Evaluates the metrics of one curve family at each `√p` (in parallel).
pub fn run_sweep(
    mode: SweepMode,
    value: f64,
    sqrt_p: &[f64],
    nu: f64,
    c: f64,
) -> Result<SweepResult> {
    if sqrt_p.is_empty() {
        return Err(GwpError::EmptyAxis("sqrt_p"));
    }
    let nonstandard = !mode
        .standard_values()
        .iter()
        .any(|v| (v - value).abs() <= 1e-12 * v);
    let points = sqrt_p
        .par_iter()
        .map(|&s| {
            let params = family_params(mode, value, s, nu, c)?;
            let report = moment_report(&params)?;
            let sig = params.sigmas();
            Ok(SweepPoint {
                sqrt_p: s,
                report,
                ratios: [
                    report.width_x / sig[0],
                    report.width_y / sig[1],
                    report.width_kx * 2.0 * sig[0],
                    report.width_ky * 2.0 * sig[1],
                ],
                rms_ratios: [
                    report.width_x * 2f64.sqrt() / sig[0],
                    report.width_y * 2f64.sqrt() / sig[1],
                ],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode,
        family_value: value,
        nonstandard,
        points,
    })
}

/// Asymptotic scale resolving power `(2√p + 1)/(2√p − 1)`.
pub fn asymptotic_srp(p: f64) -> f64 {
    let s = 2.0 * p.sqrt();
    (s + 1.0) / (s - 1.0)
}

/// The unit Gaussian reference used to check the functionals: `Δx·Δk = 1/2`.
pub fn gaussian_norm(sigma: f64) -> f64 {
    sigma * PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dft_spectrum, sample_field, FieldKind, GridSpec};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gaussian_norm_and_moments() {
        let s = 0.7;
        let m = position_moments(
            |x, y| (-(x * x + y * y) / (s * s)).exp(),
            [0.0, 0.0],
            [s, s],
            &BoxQuadrature::default(),
        )
        .unwrap();
        assert!(rel(m.mass.sqrt(), gaussian_norm(s)) < 1e-12);
        assert!(rel(m.width[0], s / 2f64.sqrt()) < 1e-12);
        // Translating the window does not change the norm.
        let shifted = position_moments(
            |x, y| (-((x - 0.3) * (x - 0.3) + (y + 0.2) * (y + 0.2)) / (s * s)).exp(),
            [0.25, -0.1],
            [s, s],
            &BoxQuadrature::default(),
        )
        .unwrap();
        assert!(rel(shifted.mass, m.mass) < 1e-12);
        assert!((shifted.center[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn gaussian_saturates_heisenberg() {
        // ψ = exp(−x²/(2a²) − y²/(2b²)) has Δx = a/√2 and Δk_x = 1/(a√2).
        let (a, b) = (0.8, 1.9);
        let m = position_moments(
            |x, y| (-x * x / (a * a) - y * y / (b * b)).exp(),
            [0.0, 0.0],
            [a, b],
            &BoxQuadrature::default(),
        )
        .unwrap();
        let mk = position_moments(
            |kx, ky| (-kx * kx * a * a - ky * ky * b * b).exp(),
            [0.0, 0.0],
            [1.0 / a, 1.0 / b],
            &BoxQuadrature::default(),
        )
        .unwrap();
        assert!((m.width[0] * mk.width[0] - 0.5).abs() < 1e-12);
        assert!((m.width[1] * mk.width[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fig2_norm_is_positive() {
        let pp = PacketParams::new_2d(1.0, 0.5, 0.5, 16.0, 1.0).unwrap();
        let n = l2_norm(&pp, 0.0).unwrap();
        assert!(n > 0.0 && n.is_finite());
    }

    #[test]
    fn symmetric_centers_vanish() {
        let pp = PacketParams::new_2d(4.0, 0.5, 1.0, 2.0, 1.0).unwrap();
        let r = moment_report(&pp).unwrap();
        assert!(r.center_y.abs() < 1e-10 * r.width_y);
        assert!(r.center_ky.abs() < 1e-10 * r.width_ky);
        assert!(r.product_x >= 0.5 - r.quadrature_err);
        assert!(r.product_y >= 0.5 - r.quadrature_err);
    }

    #[test]
    fn center_approaches_ct() {
        let t = 0.7;
        let dev = |p: f64| {
            let pp = PacketParams::new_2d(p, 0.5, 1.0, 1.0, 1.0).unwrap();
            let m = packet_position_moments(&pp, t, &BoxQuadrature::default()).unwrap();
            (m.center[0] - t).abs() / pp.sigma_long()
        };
        let (d4, d64, d256) = (dev(4.0), dev(64.0), dev(256.0));
        assert!(d64 < d4 && d256 < d64, "{d4} {d64} {d256}");
    }

    #[test]
    fn widths_approach_gaussian_limit() {
        // The same functional applied to the Gaussian-envelope limit.
        let spec = BoxQuadrature::default();
        let gap = |p: f64| {
            let pp = PacketParams::new_2d(p, 0.5, 1.0, 1.0, 1.0).unwrap();
            let sig = pp.sigmas();
            let exact = packet_position_moments(&pp, 0.0, &spec).unwrap();
            let limit = position_moments(
                |x, y| pp.morlet_limit_scaled(&[x, y], 0.0).norm_sqr(),
                [0.0, 0.0],
                [sig[0], sig[1]],
                &spec,
            )
            .unwrap();
            assert!(rel(limit.width[0], sig[0] / 2f64.sqrt()) < 1e-10);
            rel(exact.width[0], limit.width[0]).max(rel(exact.width[1], limit.width[1]))
        };
        let (g16, g256) = (gap(16.0), gap(256.0));
        assert!(g256 < g16 && g256 < 0.05, "{g16} {g256}");
    }

    #[test]
    fn frequency_moments_match_dft() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = GridSpec::centered(&[0.0, 0.0], &[12.0, 12.0], &[256, 256]).unwrap();
        let f = sample_field(FieldKind::Position, &grid, &pp, 0.0, true).unwrap();
        let spec = dft_spectrum(&f);
        let mut s = [0.0; 5];
        let mut k = [0.0; 2];
        for (i, v) in spec.iter().enumerate() {
            grid.dft_frequencies_into(i, &mut k);
            let d = v.norm_sqr();
            s[0] += d;
            s[1] += d * k[0];
            s[2] += d * k[1];
            s[3] += d * k[0] * k[0];
            s[4] += d * k[1] * k[1];
        }
        let kx = s[1] / s[0];
        let dkx = (s[3] / s[0] - kx * kx).sqrt();
        let dky = (s[4] / s[0] - (s[2] / s[0]).powi(2)).sqrt();
        let m = frequency_moments(&pp).unwrap();
        assert!(rel(m.center[0], kx) < 1e-4, "{} {kx}", m.center[0]);
        assert!(rel(m.width[0], dkx) < 1e-4, "{} {dkx}", m.width[0]);
        assert!(rel(m.width[1], dky) < 1e-4, "{} {dky}", m.width[1]);
    }

    #[test]
    fn parseval_through_moments() {
        let pp = PacketParams::new_2d(9.0, 0.5, 0.8, 1.3, 1.0).unwrap();
        let pos = packet_position_moments(&pp, 0.0, &BoxQuadrature::default()).unwrap();
        let freq = frequency_moments(&pp).unwrap();
        let spectral = freq.mass_scaled / (4.0 * PI * PI);
        assert!(rel(pos.mass, spectral) < 1e-6, "{} {spectral}", pos.mass);
    }

    #[test]
    fn srp_asymptote_and_directionality() {
        let pp = PacketParams::new_2d(1024.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let f = centers_and_widths(Target::Frequency, &pp, 0.0).unwrap();
        let (srp, arp, dir) = resolving_powers(&f);
        assert!(dir && arp.unwrap() > 0.0);
        assert!(rel(srp.unwrap(), asymptotic_srp(1024.0)) < 0.02);
        let small = PacketParams::new_2d(0.25, 0.5, 1.0, 1.0, 1.0).unwrap();
        let f = centers_and_widths(Target::Frequency, &small, 0.0).unwrap();
        let (srp, arp, dir) = resolving_powers(&f);
        assert!(!dir && srp.is_none() && arp.is_none(), "{:?}", f);
    }

    #[test]
    fn family_parameters() {
        let pp = family_params(SweepMode::FixedEpsOverGamma, 2.0, 4.0, 0.5, 1.0).unwrap();
        assert_eq!((pp.p(), pp.gamma(), pp.epsilons()[0]), (16.0, 0.5, 1.0));
        let pp = family_params(SweepMode::FixedKappaEps, 8.0, 4.0, 0.5, 1.0).unwrap();
        assert!((2.0 * pp.kappa() * pp.epsilons()[0] - 8.0).abs() < 1e-14);
        assert!(family_params(SweepMode::FixedKappaEps, 0.0, 4.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn nonstandard_flag() {
        let r = run_sweep(SweepMode::FixedEpsOverGamma, 5.0, &[2.0], 0.5, 1.0).unwrap();
        assert!(r.nonstandard);
        let r = run_sweep(SweepMode::FixedEpsOverGamma, 2.0 / 3.0, &[2.0], 0.5, 1.0).unwrap();
        assert!(!r.nonstandard);
    }

    fn last_two_change(mode: SweepMode, value: f64) -> f64 {
        let r = run_sweep(mode, value, &[7.5, 8.0], 0.5, 1.0).unwrap();
        let (a, b) = (&r.points[0], &r.points[1]);
        let curves = |p: &SweepPoint| {
            let m = &p.report;
            [
                p.ratios[0],
                p.ratios[1],
                p.ratios[2],
                p.ratios[3],
                m.product_x,
                m.product_y,
            ]
        };
        curves(a)
            .iter()
            .zip(curves(b))
            .map(|(x, y)| (y - x).abs() / y)
            .fold(0.0, f64::max)
    }

    #[test]
    fn fixed_ratio_sweeps_level_off() {
        for &v in SweepMode::FixedEpsOverGamma.standard_values() {
            let change = last_two_change(SweepMode::FixedEpsOverGamma, v);
            assert!(change < 0.02, "eps/gamma={v}: {change}");
        }
        assert!(last_two_change(SweepMode::FixedKappaEps, 64.0) < 0.02);
    }

    #[test]
    fn small_kappa_eps_sweeps_still_drift_at_sqrt_p_8() {
        // With 2κε fixed, ε/γ = 2κε/p shrinks, so these curves keep moving.
        for v in [4.0, 8.0] {
            let change = last_two_change(SweepMode::FixedKappaEps, v);
            assert!(change > 0.02, "2κε={v}: {change}");
        }
    }

    #[test]
    fn arp_decreases_with_p() {
        let grid: Vec<f64> = (2..=8).map(f64::from).collect();
        for &v in SweepMode::FixedEpsOverGamma.standard_values() {
            let r = run_sweep(SweepMode::FixedEpsOverGamma, v, &grid, 0.5, 1.0).unwrap();
            let arps: Vec<f64> = r.points.iter().map(|p| p.report.arp.unwrap()).collect();
            assert!(
                arps.windows(2).all(|w| w[1] < w[0]),
                "eps/gamma={v}: {arps:?}"
            );
        }
    }
}
