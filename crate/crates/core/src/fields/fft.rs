//! Three-dimensional FFTs on `n³` grids, `k` fastest.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft3 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fft: planner.plan_fft(n, direction),
        }
    }

    /// Unnormalized in-place transform of `data` (length `n³`).
    pub fn process(&self, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::default(); n];
        // along j
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    line[j] = data[(i * n + j) * n + k];
                }
                self.fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    data[(i * n + j) * n + k] = line[j];
                }
            }
        }
        // along i
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    line[i] = data[(i * n + j) * n + k];
                }
                self.fft.process_with_scratch(&mut line, &mut scratch);
                for i in 0..n {
                    data[(i * n + j) * n + k] = line[i];
                }
            }
        }
    }
}
