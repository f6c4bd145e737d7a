//! Unnormalized multi-dimensional DFT on row-major buffers.
//!
//! Forward: `X_k = Σ_j x_j e^{-2πi jk/N}`. Inverse: same with `+i`, no
//! `1/N` factor; callers scale.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

pub(crate) fn forward(extents: &[usize], data: &mut [Complex64]) {
    transform(extents, data, FftDirection::Forward)
}

pub(crate) fn inverse(extents: &[usize], data: &mut [Complex64]) {
    transform(extents, data, FftDirection::Inverse)
}

fn transform(extents: &[usize], data: &mut [Complex64], direction: FftDirection) {
    match *extents {
        [n] => {
            debug_assert_eq!(data.len(), n);
            plan(n, direction).process(data);
        }
        [rows, cols] => {
            debug_assert_eq!(data.len(), rows * cols);
            let row_fft = plan(cols, direction);
            let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
            for row in data.chunks_exact_mut(cols) {
                row_fft.process_with_scratch(row, &mut scratch);
            }
            let col_fft = plan(rows, direction);
            scratch.resize(col_fft.get_inplace_scratch_len(), Complex64::default());
            let mut column = vec![Complex64::default(); rows];
            for c in 0..cols {
                for (r, v) in column.iter_mut().enumerate() {
                    *v = data[r * cols + c];
                }
                col_fft.process_with_scratch(&mut column, &mut scratch);
                for (r, v) in column.iter().enumerate() {
                    data[r * cols + c] = *v;
                }
            }
        }
        _ => unreachable!("grids are 1-D or 2-D"),
    }
}
