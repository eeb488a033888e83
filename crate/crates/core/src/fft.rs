//! Multidimensional FFT over row-major complex arrays (last axis fastest).

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

/// Unnormalized forward transform, `X[m] = Σ x[j] e^{−2πi m·j/N}`.
pub fn forward(values: &mut [Complex64], shape: &[usize]) {
    transform(values, shape, FftDirection::Forward);
}

/// Inverse transform normalized by `1/N`, so `inverse(forward(x)) = x`.
pub fn inverse(values: &mut [Complex64], shape: &[usize]) {
    transform(values, shape, FftDirection::Inverse);
    let scale = 1.0 / values.len() as f64;
    values.par_iter_mut().for_each(|v| *v *= scale);
}

fn transform(values: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    assert_eq!(
        values.len(),
        shape.iter().product::<usize>(),
        "shape does not match buffer length"
    );
    let mut planner = FftPlanner::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let stride: usize = shape[axis + 1..].iter().product();
        let fft = planner.plan_fft(n, direction);
        let block = n * stride;
        if stride == 1 {
            values.par_chunks_mut(n).for_each(|line| fft.process(line));
            continue;
        }
        values.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for inner in 0..stride {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = chunk[inner + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    chunk[inner + i * stride] = *v;
                }
            }
        });
    }
}

/// Signed DFT index for bin `m` of an `n`-point transform: `0, 1, …, −2, −1`.
pub fn signed_index(m: usize, n: usize) -> i64 {
    if m < n.div_ceil(2) {
        m as i64
    } else {
        m as i64 - n as i64
    }
}
