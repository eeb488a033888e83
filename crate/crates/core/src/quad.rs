//! One-dimensional quadrature rules shared by the metrics, admissibility and
//! source modules.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{GwpError, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Several integrals carried through one quadrature. Error control uses the
/// largest component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multi<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for Multi<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl<const N: usize> Sub for Multi<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl<const N: usize> Mul<f64> for Multi<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.0.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl<const N: usize> QuadValue for Multi<N> {
    fn zero() -> Self {
        Multi([0.0; N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        kron = kron + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = (kron - gauss).magnitude();
    (kron, err)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`,
/// bisecting the interval with the largest error until the total error is
/// below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Estimate<T>> {
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total = intervals.iter().fold(T::zero(), |acc, iv| acc + iv.2);
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Ok(Estimate {
                value: total,
                error: err,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(GwpError::NonConvergence {
                what: format!("adaptive quadrature on [{a}, {b}]"),
                last_change: err / total.magnitude().max(f64::MIN_POSITIVE),
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            return Err(GwpError::NonConvergence {
                what: format!("adaptive quadrature interval collapsed near {m}"),
                last_change: err,
            });
        }
        let (v1, e1) = gk15(&mut f, lo, m);
        let (v2, e2) = gk15(&mut f, m, hi);
        intervals.push((lo, m, v1, e1));
        intervals.push((m, hi, v2, e2));
    }
}

/// Adaptive integration over `[a, ∞)` using `x = a + s·u/(1 − u)`.
pub fn adaptive_semi_infinite<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Estimate<T>> {
    adaptive(
        |u| {
            if u >= 1.0 {
                return T::zero();
            }
            let one_minus = 1.0 - u;
            let x = a + scale * u / one_minus;
            let jac = scale / (one_minus * one_minus);
            let v = f(x);
            if v.magnitude() == 0.0 {
                T::zero()
            } else {
                v * jac
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        max_intervals,
    )
}

/// Trapezoid rule on the whole real line for integrands with (at least)
/// exponential decay, truncated to `[−half_width, half_width]` and halving
/// the step until two successive estimates agree to `rel_tol`. For
/// oscillatory integrands the target is floored at the rounding level of
/// `∫|f|`.
pub fn trapezoid_refine<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    half_width: f64,
    initial_step: f64,
    rel_tol: f64,
    max_levels: usize,
) -> Result<Estimate<T>> {
    let mut h = initial_step;
    let n = (half_width / h).ceil() as i64;
    let mut sum = T::zero();
    let mut abs_sum = 0.0;
    for j in -n..=n {
        let v = f(j as f64 * h);
        abs_sum += v.magnitude();
        sum = sum + v;
    }
    let mut estimate = sum * h;
    let mut n = n;
    let mut last_change = f64::INFINITY;
    for _ in 0..max_levels {
        // New points sit at odd multiples of h/2.
        let mut extra = T::zero();
        for j in -n..n {
            let v = f((j as f64 + 0.5) * h);
            abs_sum += v.magnitude();
            extra = extra + v;
        }
        sum = sum + extra;
        h *= 0.5;
        n *= 2;
        let next = sum * h;
        let change = (next - estimate).magnitude();
        last_change = change;
        estimate = next;
        let floor = 64.0 * f64::EPSILON * abs_sum * h;
        if change <= (rel_tol * estimate.magnitude()).max(floor) {
            return Ok(Estimate {
                value: estimate,
                error: change,
            });
        }
    }
    Err(GwpError::NonConvergence {
        what: "trapezoid refinement".into(),
        last_change: last_change / estimate.magnitude(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 40] {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let got = gl.integrate(0.0, 2.0, |x: f64| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((got - exact).abs() < 1e-12 * exact, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let est = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 0.0, 1e-12, 2000).unwrap();
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-2f64).atan();
        assert!((est.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let est =
            adaptive_semi_infinite(|x: f64| (-x * x).exp(), 0.0, 1.0, 0.0, 1e-12, 500).unwrap();
        assert!((est.value - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_oscillatory() {
        // ∫_0^π e^{ix} dx = 2i
        let est = adaptive(
            |x: f64| Complex64::from_polar(1.0, x),
            0.0,
            PI,
            0.0,
            1e-13,
            100,
        )
        .unwrap();
        assert!((est.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn trapezoid_double_exponential() {
        // ∫ e^{−cosh u} du = 2 K_0(1)
        let est = trapezoid_refine(|u: f64| (-u.cosh()).exp(), 8.0, 0.5, 1e-14, 10).unwrap();
        let k0_1 = 0.421_024_438_240_708_3;
        assert!((est.value - 2.0 * k0_1).abs() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let r = adaptive(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, 0.0, 1e-15, 8);
        assert!(matches!(r, Err(GwpError::NonConvergence { .. })));
    }
}
