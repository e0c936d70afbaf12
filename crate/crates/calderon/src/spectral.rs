//! Shared FFT plumbing: cached plans and in-place 2-D transforms.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().unwrap();
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
            planner.plan_fft(n, dir)
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize, scratch: &mut Vec<Complex64>) {
    scratch.clear();
    scratch.extend_from_slice(data);
    for j in 0..n {
        for m in 0..n {
            data[m * n + j] = scratch[j * n + m];
        }
    }
}

/// Unnormalized 2-D DFT over an `n x n` row-major buffer; `forward` uses the
/// `e^{-2 pi i jk/N}` kernel. The inverse direction is likewise unnormalized
/// (caller divides by `N^2`).
pub fn fft2_inplace(data: &mut [Complex64], n: usize, forward: bool) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut tbuf = Vec::new();
    transpose(data, n, &mut tbuf);
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(data, n, &mut tbuf);
}

/// 1-D unnormalized DFT of a single buffer (used by the polar solver for
/// angular transforms).
pub fn fft1_inplace(data: &mut [Complex64], forward: bool) {
    let fft = plan(data.len(), forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
}
