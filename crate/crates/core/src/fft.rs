//! Multidimensional DFT on the periodic grid, built on 1-D FFTs applied
//! axis by axis.
//!
//! Conventions: the forward transform divides by `n^d`, so the coefficient
//! at frequency `k` is the normalized-measure inner product of the field
//! with `e^{ik·x}` sampled on the grid; the inverse transform carries no
//! scaling and reconstructs values exactly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::par;

struct PlanPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<PlanPair> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PlanPair>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(PlanPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transform_axis(data: &mut [Complex64], grid: &Grid, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = grid.points_per_axis();
    let d = grid.dim();
    let stride = n.pow((d - 1 - axis) as u32);
    let block = stride * n;
    let fft = fft.clone();
    par::for_each_chunk_mut(data, block, move |_, chunk| {
        let mut line = vec![Complex64::default(); n];
        for offset in 0..stride {
            for t in 0..n {
                line[t] = chunk[offset + t * stride];
            }
            fft.process(&mut line);
            for t in 0..n {
                chunk[offset + t * stride] = line[t];
            }
        }
    });
}

/// Forward DFT: grid values -> frequency coefficients (normalized by n^d).
pub fn forward(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let mut data = values.to_vec();
    let pair = plans(grid.points_per_axis());
    for axis in 0..grid.dim() {
        transform_axis(&mut data, grid, axis, &pair.forward);
    }
    let scale = 1.0 / grid.len() as f64;
    for v in &mut data {
        *v *= scale;
    }
    data
}

/// Inverse DFT: frequency coefficients -> grid values (no scaling).
pub fn inverse(grid: &Grid, spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut data = spectrum.to_vec();
    let pair = plans(grid.points_per_axis());
    for axis in 0..grid.dim() {
        transform_axis(&mut data, grid, axis, &pair.inverse);
    }
    data
}
