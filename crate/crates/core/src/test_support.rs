//! Helpers shared by unit tests: seeded random fields and brute-force
//! oracles kept independent of the transform pipeline they check.

use num_complex::Complex64;

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

/// splitmix64 stream; independent of the crate's experiment RNG.
pub fn splitmix_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed;
    move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        z as f64 / u64::MAX as f64 - 0.5
    }
}

/// Random real scalar field (random point values).
pub fn rng_field(grid: Grid, seed: u64) -> ScalarField {
    let mut next = splitmix_stream(seed);
    let values = (0..grid.len())
        .map(|_| Complex64::new(next(), 0.0))
        .collect();
    ScalarField::from_values(grid, values).unwrap()
}

/// Random complex scalar field.
pub fn rng_complex_field(grid: Grid, seed: u64) -> ScalarField {
    let mut next = splitmix_stream(seed);
    let values = (0..grid.len())
        .map(|_| Complex64::new(next(), next()))
        .collect();
    ScalarField::from_values(grid, values).unwrap()
}

/// Random real vector field with `ncomp` components.
pub fn rng_vector_field(grid: Grid, ncomp: usize, seed: u64) -> VectorField {
    let comps = (0..ncomp)
        .map(|j| rng_field(grid, seed.wrapping_mul(31).wrapping_add(j as u64)))
        .collect();
    VectorField::from_components(comps).unwrap()
}

/// Random real zero-mean scalar field.
pub fn rng_zero_mean_field(grid: Grid, seed: u64) -> ScalarField {
    let f = rng_field(grid, seed);
    let mean = f.mean();
    let shifted: Vec<Complex64> = f.values().iter().map(|v| v - mean).collect();
    ScalarField::from_values(grid, shifted).unwrap()
}

/// Max pointwise deviation between two fields, relative to the larger norm.
pub fn rel_err(a: &ScalarField, b: &ScalarField) -> f64 {
    let scale = a.l2_norm().max(b.l2_norm());
    let max: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        max
    } else {
        max / scale
    }
}

/// Direct O(n^{2d}) summation oracle for the forward transform.
pub fn forward_direct(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let len = grid.len();
    let d = grid.dim();
    let mut out = vec![Complex64::default(); len];
    let mut k = vec![0i64; d];
    let mut x = vec![0f64; d];
    for (flat_k, slot) in out.iter_mut().enumerate() {
        grid.frequency_of(flat_k, &mut k);
        let mut acc = Complex64::default();
        for (flat_x, &v) in values.iter().enumerate() {
            grid.point_of(flat_x, &mut x);
            let phase: f64 = k.iter().zip(&x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            acc += v * Complex64::new(0.0, -phase).exp();
        }
        *slot = acc / len as f64;
    }
    out
}
