//! Multi-dimensional complex FFTs on square grids, built from 1-D `rustfft` passes.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized transform of a row-major `side^dim` array.
///
/// `Forward` computes `sum_x a[x] exp(-2 pi i k.x / side)`, `Inverse` the same with `+`.
pub fn fft_nd(data: &mut [Complex64], dim: usize, side: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), side.pow(dim as u32));
    if side <= 1 {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(side, direction));
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        // stride of `axis` in row-major order: axis 0 is the slowest index
        let stride = side.pow((dim - 1 - axis) as u32);
        let block = stride * side;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

pub fn forward(data: &mut [Complex64], dim: usize, side: usize) {
    fft_nd(data, dim, side, FftDirection::Forward);
}

pub fn inverse(data: &mut [Complex64], dim: usize, side: usize) {
    fft_nd(data, dim, side, FftDirection::Inverse);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(a: &[Complex64], side: usize, sign: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
        for k0 in 0..side {
            for k1 in 0..side {
                let mut acc = Complex64::new(0.0, 0.0);
                for x0 in 0..side {
                    for x1 in 0..side {
                        let ph = sign * 2.0 * std::f64::consts::PI * ((k0 * x0 + k1 * x1) as f64)
                            / side as f64;
                        acc += a[x0 * side + x1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * side + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let side = 8;
        let a: Vec<Complex64> = (0..side * side)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut f = a.clone();
        forward(&mut f, 2, side);
        let expect = naive_dft_2d(&a, side, -1.0);
        for (x, y) in f.iter().zip(&expect) {
            assert!((x - y).norm() < 1e-12);
        }
        let mut g = a.clone();
        inverse(&mut g, 2, side);
        let expect = naive_dft_2d(&a, side, 1.0);
        for (x, y) in g.iter().zip(&expect) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
