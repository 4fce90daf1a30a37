//! Differential and singular-integral operators in the Fourier basis:
//! gradient, divergence, 2-form curl, Riesz transform, Leray projection,
//! fractional Laplacian, and the closed-form Hodge potential constructions.
//!
//! All operators act per frequency. Homogeneous symbols send the k = 0 mode
//! to zero, matching the convention that the homogeneous spaces are defined
//! modulo constants. The Riesz multiplier is k/|k| (symbol of
//! `(-i∇)(-Δ)^{-1/2}`), so the Riesz image of a real function is
//! imaginary-valued; a real curl-free field E corresponds to the scalar
//! f = i(-Δ)^{1/2}φ with E = Rf and ‖f‖ = ‖E‖.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{pair_list, ScalarField, TwoFormField, VectorField};
use crate::grid::{freq_norm, freq_norm2};

/// Default residual gate for the potential constructions.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// The Riesz convention used throughout: component j acts by k_j/|k|,
/// with value 0 at k = 0.
pub fn riesz_symbol(k: &[i64], j: usize) -> f64 {
    let n = freq_norm(k);
    if n == 0.0 {
        0.0
    } else {
        k[j] as f64 / n
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn expect_dim(f: &VectorField) -> Result<usize> {
    let d = f.grid().dim();
    if f.ncomp() != d {
        return Err(Error::ComponentMismatch {
            expected: d,
            got: f.ncomp(),
        });
    }
    Ok(d)
}

/// ∇φ: component j has spectrum i·k_j·φ̂(k).
pub fn gradient(phi: &ScalarField) -> VectorField {
    let grid = *phi.grid();
    let comps = (0..grid.dim())
        .map(|j| {
            phi.apply_multiplier(|k| I * k[j] as f64)
                .expect("finite multiplier")
        })
        .collect();
    VectorField::from_components(comps).expect("components share the grid")
}

/// ∇·F: spectrum Σ_j i·k_j·F̂_j(k).
pub fn divergence(f: &VectorField) -> Result<ScalarField> {
    let d = expect_dim(f)?;
    let grid = *f.grid();
    let mut spec = vec![Complex64::default(); grid.len()];
    let mut k = vec![0i64; d];
    for j in 0..d {
        let cj = f.component(j).spectrum();
        for (flat, slot) in spec.iter_mut().enumerate() {
            grid.frequency_of(flat, &mut k);
            *slot += I * k[j] as f64 * cj[flat];
        }
    }
    ScalarField::from_spectrum(grid, spec)
}

/// Antisymmetrized gradient (∇∧F)_{jl} = ∂_j F_l − ∂_l F_j for j < l.
pub fn curl(f: &VectorField) -> Result<TwoFormField> {
    let d = expect_dim(f)?;
    let grid = *f.grid();
    let mut comps = Vec::with_capacity(d * (d - 1) / 2);
    for (j, l) in pair_list(d) {
        let mut spec = vec![Complex64::default(); grid.len()];
        let cj = f.component(j).spectrum();
        let cl = f.component(l).spectrum();
        let mut k = vec![0i64; d];
        for (flat, slot) in spec.iter_mut().enumerate() {
            grid.frequency_of(flat, &mut k);
            *slot = I * (k[j] as f64 * cl[flat] - k[l] as f64 * cj[flat]);
        }
        comps.push(ScalarField::from_spectrum(grid, spec)?);
    }
    TwoFormField::from_components(grid, comps)
}

/// Classical d = 3 curl as a vector field.
pub fn curl_vector_3d(f: &VectorField) -> Result<VectorField> {
    if f.grid().dim() != 3 {
        return Err(Error::UnsupportedDimension {
            d: f.grid().dim(),
            constraint: "classical curl needs d = 3",
        });
    }
    let two_form = curl(f)?;
    // (∇∧F)_1 = (2,3)-component, (∇∧F)_2 = -(1,3), (∇∧F)_3 = (1,2)
    let c23 = two_form.component(1, 2).clone();
    let c13 = two_form.component(0, 2).scale(Complex64::new(-1.0, 0.0));
    let c12 = two_form.component(0, 1).clone();
    VectorField::from_components(vec![c23, c13, c12])
}

/// Riesz transform component R_j f with multiplier k_j/|k| (0 at k = 0).
pub fn riesz_component(f: &ScalarField, j: usize) -> ScalarField {
    f.apply_multiplier(|k| Complex64::new(riesz_symbol(k, j), 0.0))
        .expect("finite multiplier")
}

/// Full Riesz transform Rf = (R_1 f, …, R_d f); curl-free, and an isometry
/// on zero-mean scalars.
pub fn riesz(f: &ScalarField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|j| riesz_component(f, j)).collect();
    VectorField::from_components(comps).expect("components share the grid")
}

/// Leray projection onto divergence-free fields:
/// F̂(k) − k (k·F̂(k))/|k|² for k ≠ 0; the zero mode passes through.
pub fn leray_project(f: &VectorField) -> Result<VectorField> {
    let d = expect_dim(f)?;
    let grid = *f.grid();
    let spectra: Vec<&[Complex64]> = (0..d).map(|j| f.component(j).spectrum()).collect();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); grid.len()]; d];
    let mut k = vec![0i64; d];
    for flat in 0..grid.len() {
        grid.frequency_of(flat, &mut k);
        let n2 = freq_norm2(&k);
        if n2 == 0.0 {
            for j in 0..d {
                out[j][flat] = spectra[j][flat];
            }
            continue;
        }
        let kdotf: Complex64 = (0..d).map(|j| k[j] as f64 * spectra[j][flat]).sum();
        for j in 0..d {
            out[j][flat] = spectra[j][flat] - kdotf * (k[j] as f64 / n2);
        }
    }
    let comps = out
        .into_iter()
        .map(|spec| ScalarField::from_spectrum(grid, spec))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

fn zero_mean_gate(f: &ScalarField) -> Result<()> {
    let coeff = f.mean().norm();
    let tol = 1e-12 * (1.0 + f.l2_norm());
    if coeff > tol {
        return Err(Error::NonZeroMean { coeff, tol });
    }
    Ok(())
}

/// (−Δ)^{s/2}: multiplier |k|^s, zero mode mapped to 0. For s < 0 the input
/// must have zero mean.
pub fn fractional_laplacian(f: &ScalarField, s: f64) -> Result<ScalarField> {
    if s < 0.0 {
        zero_mean_gate(f)?;
    }
    f.apply_multiplier(|k| {
        let n = freq_norm(k);
        if n == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(n.powf(s), 0.0)
        }
    })
}

/// Zero-mean scalar potential φ with ∇φ = E. Requires E curl-free and
/// componentwise zero-mean.
pub fn scalar_potential(e: &VectorField) -> Result<ScalarField> {
    scalar_potential_with_tol(e, CONSTRAINT_TOL)
}

pub fn scalar_potential_with_tol(e: &VectorField, tol: f64) -> Result<ScalarField> {
    let d = expect_dim(e)?;
    let grid = *e.grid();
    let residual = curl(e)?.l2_norm();
    let gate = tol * (1.0 + e.l2_norm());
    if residual > gate {
        return Err(Error::ConstraintResidual {
            constraint: "curl",
            residual,
            tol: gate,
        });
    }
    for j in 0..d {
        zero_mean_gate(e.component(j))?;
    }
    let spectra: Vec<&[Complex64]> = (0..d).map(|j| e.component(j).spectrum()).collect();
    let mut spec = vec![Complex64::default(); grid.len()];
    let mut k = vec![0i64; d];
    for (flat, slot) in spec.iter_mut().enumerate() {
        grid.frequency_of(flat, &mut k);
        let n2 = freq_norm2(&k);
        if n2 == 0.0 {
            continue;
        }
        let kdote: Complex64 = (0..d).map(|j| k[j] as f64 * spectra[j][flat]).sum();
        // Ê = i k φ̂  =>  φ̂ = -i (k·Ê)/|k|²
        *slot = -I * kdote / n2;
    }
    ScalarField::from_spectrum(grid, spec)
}

fn div_free_gate(b: &VectorField, tol: f64) -> Result<()> {
    let residual = divergence(b)?.l2_norm();
    let gate = tol * (1.0 + b.l2_norm());
    if residual > gate {
        return Err(Error::ConstraintResidual {
            constraint: "divergence",
            residual,
            tol: gate,
        });
    }
    for j in 0..b.ncomp() {
        zero_mean_gate(b.component(j))?;
    }
    Ok(())
}

/// 2-form potential α of a divergence-free B: the unique per-frequency
/// solution of d*α = ω_B, dα = 0 orthogonal to the kernel,
/// α̂_{jl}(k) = i (k_j B̂_l − k_l B̂_j)/|k|².
pub fn two_form_potential(b: &VectorField) -> Result<TwoFormField> {
    two_form_potential_with_tol(b, CONSTRAINT_TOL)
}

pub fn two_form_potential_with_tol(b: &VectorField, tol: f64) -> Result<TwoFormField> {
    let d = expect_dim(b)?;
    let grid = *b.grid();
    div_free_gate(b, tol)?;
    let spectra: Vec<&[Complex64]> = (0..d).map(|j| b.component(j).spectrum()).collect();
    let mut comps = Vec::with_capacity(d * (d - 1) / 2);
    for (j, l) in pair_list(d) {
        let mut spec = vec![Complex64::default(); grid.len()];
        let mut k = vec![0i64; d];
        for (flat, slot) in spec.iter_mut().enumerate() {
            grid.frequency_of(flat, &mut k);
            let n2 = freq_norm2(&k);
            if n2 == 0.0 {
                continue;
            }
            *slot = I * (k[j] as f64 * spectra[l][flat] - k[l] as f64 * spectra[j][flat]) / n2;
        }
        comps.push(ScalarField::from_spectrum(grid, spec)?);
    }
    TwoFormField::from_components(grid, comps)
}

/// Divergence-free vector potential A with ∇∧A = B, d = 3 only:
/// Â(k) = i k×B̂(k)/|k|².
pub fn vector_potential_3d(b: &VectorField) -> Result<VectorField> {
    vector_potential_3d_with_tol(b, CONSTRAINT_TOL)
}

pub fn vector_potential_3d_with_tol(b: &VectorField, tol: f64) -> Result<VectorField> {
    if b.grid().dim() != 3 {
        return Err(Error::UnsupportedDimension {
            d: b.grid().dim(),
            constraint: "vector potential needs d = 3",
        });
    }
    expect_dim(b)?;
    div_free_gate(b, tol)?;
    let grid = *b.grid();
    let spectra: Vec<&[Complex64]> = (0..3).map(|j| b.component(j).spectrum()).collect();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); grid.len()]; 3];
    let mut k = vec![0i64; 3];
    for flat in 0..grid.len() {
        grid.frequency_of(flat, &mut k);
        let n2 = freq_norm2(&k);
        if n2 == 0.0 {
            continue;
        }
        let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
        let bv = [spectra[0][flat], spectra[1][flat], spectra[2][flat]];
        out[0][flat] = I * (kf[1] * bv[2] - kf[2] * bv[1]) / n2;
        out[1][flat] = I * (kf[2] * bv[0] - kf[0] * bv[2]) / n2;
        out[2][flat] = I * (kf[0] * bv[1] - kf[1] * bv[0]) / n2;
    }
    let comps = out
        .into_iter()
        .map(|spec| ScalarField::from_spectrum(grid, spec))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

/// Codifferential of a 2-form: (d*α)_l = Σ_{k>l} ∂_k α_{lk} − Σ_{j<l} ∂_j α_{jl},
/// the formal adjoint of the 2-form curl under the componentwise inner products.
pub fn codifferential(alpha: &TwoFormField) -> Result<VectorField> {
    let grid = *alpha.grid();
    let d = grid.dim();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); grid.len()]; d];
    let mut k = vec![0i64; d];
    for (j, l) in pair_list(d) {
        let spec = alpha.component(j, l).spectrum();
        for flat in 0..grid.len() {
            grid.frequency_of(flat, &mut k);
            // contributes +∂_l α_{jl} to slot j and −∂_j α_{jl} to slot l
            let del_l = I * k[l] as f64 * spec[flat];
            let del_j = I * k[j] as f64 * spec[flat];
            out[j][flat] += del_l;
            out[l][flat] -= del_j;
        }
    }
    let comps = out
        .into_iter()
        .map(|spec| ScalarField::from_spectrum(grid, spec))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

/// L² norm of the exterior derivative of a 2-form,
/// (dα)_{jkl} = ∂_j α_{kl} − ∂_k α_{jl} + ∂_l α_{jk} over j<k<l.
pub fn exterior_derivative_norm(alpha: &TwoFormField) -> f64 {
    let grid = *alpha.grid();
    let d = grid.dim();
    let mut total = 0.0f64;
    let mut k = vec![0i64; d];
    for j in 0..d {
        for kk in (j + 1)..d {
            for l in (kk + 1)..d {
                let s_kl = alpha.component(kk, l).spectrum();
                let s_jl = alpha.component(j, l).spectrum();
                let s_jk = alpha.component(j, kk).spectrum();
                let mut comp = 0.0f64;
                for flat in 0..grid.len() {
                    grid.frequency_of(flat, &mut k);
                    let v = I * k[j] as f64 * s_kl[flat] - I * k[kk] as f64 * s_jl[flat]
                        + I * k[l] as f64 * s_jk[flat];
                    comp += v.norm_sqr();
                }
                total += comp;
            }
        }
    }
    total.sqrt()
}

/// Pointwise wedge of a 1-form (vector field) with a vector field:
/// (w∧E)_{jl} = w_j E_l − w_l E_j.
pub fn wedge_1form(w: &VectorField, e: &VectorField) -> Result<TwoFormField> {
    let d = expect_dim(w)?;
    expect_dim(e)?;
    let grid = *w.grid();
    let mut comps = Vec::with_capacity(d * (d - 1) / 2);
    for (j, l) in pair_list(d) {
        let a = w.component(j).mul_pointwise(e.component(l))?;
        let b = w.component(l).mul_pointwise(e.component(j))?;
        comps.push(a.sub(&b)?);
    }
    TwoFormField::from_components(grid, comps)
}

/// Ḣ¹ energy ‖∇F‖²_{L²} = Σ_j Σ_k |k|² |F̂_j(k)|² of a vector field.
pub fn h1_energy_vec(f: &VectorField) -> f64 {
    let grid = *f.grid();
    let mut k = vec![0i64; grid.dim()];
    let mut total = 0.0;
    for j in 0..f.ncomp() {
        let spec = f.component(j).spectrum();
        for (flat, v) in spec.iter().enumerate() {
            grid.frequency_of(flat, &mut k);
            total += freq_norm2(&k) * v.norm_sqr();
        }
    }
    total
}

/// Ḣ¹ energy of a scalar field.
pub fn h1_energy(f: &ScalarField) -> f64 {
    let grid = *f.grid();
    let mut k = vec![0i64; grid.dim()];
    let mut total = 0.0;
    for (flat, v) in f.spectrum().iter().enumerate() {
        grid.frequency_of(flat, &mut k);
        total += freq_norm2(&k) * v.norm_sqr();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::test_support::{rng_field, rng_vector_field, rng_zero_mean_field};

    fn gridd(d: usize, n: usize) -> Grid {
        Grid::new(d, n).unwrap()
    }

    fn random_div_free(grid: Grid, seed: u64) -> VectorField {
        let f = rng_vector_field(grid, grid.dim(), seed);
        let p = leray_project(&f).unwrap();
        // drop the zero mode so potentials exist
        let comps = p
            .components()
            .iter()
            .map(|c| {
                let mean = c.mean();
                let values = c.values().iter().map(|v| v - mean).collect();
                ScalarField::from_values(grid, values).unwrap()
            })
            .collect();
        VectorField::from_components(comps).unwrap()
    }

    fn random_curl_free(grid: Grid, seed: u64) -> VectorField {
        gradient(&rng_field(grid, seed))
    }

    #[test]
    fn gradient_of_cos_mode() {
        let grid = gridd(2, 8);
        let phi = ScalarField::cos_mode(grid, &[1, 0], 1.0).unwrap();
        let g = gradient(&phi);
        let expect = ScalarField::sin_mode(grid, &[1, 0], -1.0).unwrap();
        assert!(crate::test_support::rel_err(g.component(0), &expect) < 1e-13);
        assert!(g.component(1).l2_norm() < 1e-13);

        let c = ScalarField::from_point_fn(grid, |_| Complex64::new(3.0, 0.0));
        assert!(gradient(&c).l2_norm() < 1e-13);
    }

    #[test]
    fn div_grad_is_minus_laplacian() {
        let grid = gridd(2, 8);
        let phi = rng_field(grid, 9);
        let lhs = divergence(&gradient(&phi)).unwrap();
        let rhs = fractional_laplacian(&phi, 2.0)
            .unwrap()
            .scale(Complex64::new(-1.0, 0.0));
        assert!(crate::test_support::rel_err(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn divergence_integration_by_parts() {
        let grid = gridd(2, 8);
        let f = rng_vector_field(grid, 2, 31);
        let phi = rng_field(grid, 32);
        let lhs = divergence(&f).unwrap().inner_product(&phi).unwrap();
        let rhs = f.inner_product(&gradient(&phi)).unwrap();
        assert!((lhs + rhs).norm() < 1e-12 * (1.0 + f.l2_norm() * phi.l2_norm()));
    }

    #[test]
    fn divergence_single_modes() {
        let grid = gridd(2, 8);
        // F = (-sin x1, 0) -> -cos x1
        let f = VectorField::from_components(vec![
            ScalarField::sin_mode(grid, &[1, 0], -1.0).unwrap(),
            ScalarField::zeros(grid),
        ])
        .unwrap();
        let div = divergence(&f).unwrap();
        let expect = ScalarField::cos_mode(grid, &[1, 0], -1.0).unwrap();
        assert!(crate::test_support::rel_err(&div, &expect) < 1e-13);
        // transverse mode has zero divergence
        let g = VectorField::from_components(vec![
            ScalarField::zeros(grid),
            ScalarField::cos_mode(grid, &[1, 0], 1.0).unwrap(),
        ])
        .unwrap();
        assert!(divergence(&g).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        for d in [2usize, 3, 4] {
            let grid = gridd(d, 6);
            let f = rng_field(grid, 7 + d as u64);
            let c = curl(&gradient(&f)).unwrap();
            assert!(c.l2_norm() < 1e-12 * (1.0 + f.l2_norm()));
        }
    }

    #[test]
    fn curl_single_mode_d3() {
        let grid = gridd(3, 8);
        // F = (0, sin x1, 0): only the (1,2)-pair survives with value cos x1
        let f = VectorField::from_components(vec![
            ScalarField::zeros(grid),
            ScalarField::sin_mode(grid, &[1, 0, 0], 1.0).unwrap(),
            ScalarField::zeros(grid),
        ])
        .unwrap();
        let c = curl(&f).unwrap();
        let expect = ScalarField::cos_mode(grid, &[1, 0, 0], 1.0).unwrap();
        assert!(crate::test_support::rel_err(c.component(0, 1), &expect) < 1e-13);
        assert!(c.component(0, 2).l2_norm() < 1e-13);
        assert!(c.component(1, 2).l2_norm() < 1e-13);
    }

    #[test]
    fn classical_curl_matches_two_form() {
        let grid = gridd(3, 8);
        let f = rng_vector_field(grid, 3, 55);
        let cv = curl_vector_3d(&f).unwrap();
        let c2 = curl(&f).unwrap();
        assert!(crate::test_support::rel_err(cv.component(0), c2.component(1, 2)) < 1e-12);
        let minus_c13 = c2.component(0, 2).scale(Complex64::new(-1.0, 0.0));
        assert!(crate::test_support::rel_err(cv.component(1), &minus_c13) < 1e-12);
        assert!(crate::test_support::rel_err(cv.component(2), c2.component(0, 1)) < 1e-12);
    }

    #[test]
    fn riesz_single_mode() {
        let grid = gridd(2, 16);
        let f = ScalarField::mode(grid, &[3, 4], Complex64::new(1.0, 0.0)).unwrap();
        let r = riesz(&f);
        let e0 = f.scale(Complex64::new(0.6, 0.0));
        let e1 = f.scale(Complex64::new(0.8, 0.0));
        assert!(crate::test_support::rel_err(r.component(0), &e0) < 1e-13);
        assert!(crate::test_support::rel_err(r.component(1), &e1) < 1e-13);
        // constants map to zero
        let c = ScalarField::from_point_fn(grid, |_| Complex64::new(2.0, 0.0));
        assert!(riesz(&c).l2_norm() < 1e-14);
    }

    #[test]
    fn riesz_isometry_and_curl_free() {
        let grid = gridd(2, 8);
        let f = rng_zero_mean_field(grid, 77);
        let r = riesz(&f);
        assert!((r.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
        assert!(curl(&r).unwrap().l2_norm() < 1e-12 * f.l2_norm());
        // symbol is unit-normalized off k = 0
        let grid3 = gridd(3, 4);
        for k in grid3.modes_in_ball(2.0) {
            let s: f64 = (0..3).map(|j| riesz_symbol(&k, j).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn leray_annihilates_gradients_and_is_idempotent() {
        let grid = gridd(3, 6);
        let phi = rng_zero_mean_field(grid, 5);
        let g = gradient(&phi);
        assert!(leray_project(&g).unwrap().l2_norm() < 1e-12 * (1.0 + g.l2_norm()));

        let f = rng_vector_field(grid, 3, 8);
        let p = leray_project(&f).unwrap();
        let pp = leray_project(&p).unwrap();
        assert!(divergence(&p).unwrap().l2_norm() < 1e-12 * (1.0 + f.l2_norm()));
        let dev: f64 = (0..3)
            .map(|j| {
                crate::test_support::rel_err(p.component(j), pp.component(j))
            })
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn helmholtz_split() {
        // F = leray(F) + gradient(scalar potential of the remainder)
        let grid = gridd(2, 8);
        let f = rng_vector_field(grid, 2, 21);
        let p = leray_project(&f).unwrap();
        let rem = f.sub(&p).unwrap();
        // remainder is curl-free with zero mean off the k=0 mode it inherits;
        // strip means before taking the potential
        let comps: Vec<ScalarField> = rem
            .components()
            .iter()
            .map(|c| {
                let mean = c.mean();
                let values = c.values().iter().map(|v| v - mean).collect();
                ScalarField::from_values(grid, values).unwrap()
            })
            .collect();
        let rem0 = VectorField::from_components(comps).unwrap();
        let phi = scalar_potential(&rem0).unwrap();
        let back = p.add(&gradient(&phi)).unwrap();
        // agree up to the constant (k=0) part of F
        for j in 0..2 {
            let diff = f.component(j).sub(back.component(j)).unwrap();
            let mean = diff.mean();
            let fluct: Vec<Complex64> = diff.values().iter().map(|v| v - mean).collect();
            let fluct_norm = ScalarField::from_values(grid, fluct).unwrap().l2_norm();
            assert!(fluct_norm < 1e-12 * (1.0 + f.l2_norm()));
        }
    }

    #[test]
    fn fractional_laplacian_modes_and_composition() {
        let grid = gridd(2, 8);
        let f = ScalarField::mode(grid, &[2, 0], Complex64::new(1.0, 0.0)).unwrap();
        let up = fractional_laplacian(&f, 1.0).unwrap();
        assert!(crate::test_support::rel_err(&up, &f.scale(2.0.into())) < 1e-13);
        let down = fractional_laplacian(&f, -1.0).unwrap();
        assert!(crate::test_support::rel_err(&down, &f.scale(0.5.into())) < 1e-13);

        let g = rng_zero_mean_field(grid, 99);
        let comp = fractional_laplacian(&fractional_laplacian(&g, -0.5).unwrap(), 0.5).unwrap();
        assert!(crate::test_support::rel_err(&comp, &g) < 1e-12);
    }

    #[test]
    fn fractional_laplacian_rejects_nonzero_mean() {
        let grid = gridd(2, 8);
        let f = ScalarField::from_point_fn(grid, |x| Complex64::new(1.0 + x[0].cos(), 0.0));
        assert!(matches!(
            fractional_laplacian(&f, -1.0),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn scalar_potential_roundtrip() {
        let grid = gridd(2, 8);
        // E = (-sin x1, 0) -> phi = cos x1
        let e = VectorField::from_components(vec![
            ScalarField::sin_mode(grid, &[1, 0], -1.0).unwrap(),
            ScalarField::zeros(grid),
        ])
        .unwrap();
        let phi = scalar_potential(&e).unwrap();
        let expect = ScalarField::cos_mode(grid, &[1, 0], 1.0).unwrap();
        assert!(crate::test_support::rel_err(&phi, &expect) < 1e-13);

        let phi0 = rng_zero_mean_field(grid, 4);
        let rec = scalar_potential(&gradient(&phi0)).unwrap();
        assert!(crate::test_support::rel_err(&rec, &phi0) < 1e-12);
        // Ḣ¹ seminorm of φ equals ‖E‖
        let e2 = gradient(&phi0);
        assert!((h1_energy(&phi0).sqrt() - e2.l2_norm()).abs() < 1e-12 * e2.l2_norm());
    }

    #[test]
    fn scalar_potential_rejects_rotational_input() {
        let grid = gridd(2, 8);
        let b = random_div_free(grid, 3);
        assert!(matches!(
            scalar_potential(&b),
            Err(Error::ConstraintResidual { .. })
        ));
    }

    #[test]
    fn two_form_potential_single_mode_d3() {
        let grid = gridd(3, 8);
        let b = VectorField::from_components(vec![
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::cos_mode(grid, &[1, 0, 0], 1.0).unwrap(),
        ])
        .unwrap();
        let alpha = two_form_potential(&b).unwrap();
        // single surviving pair (0,2) carries -sin x1 = -A_2 for A = (0, sin x1, 0)
        let expect = ScalarField::sin_mode(grid, &[1, 0, 0], -1.0).unwrap();
        assert!(crate::test_support::rel_err(alpha.component(0, 2), &expect) < 1e-13);
        assert!(alpha.component(0, 1).l2_norm() < 1e-13);
        assert!(alpha.component(1, 2).l2_norm() < 1e-13);
    }

    #[test]
    fn two_form_potential_properties() {
        for d in [2usize, 3, 4] {
            let grid = gridd(d, 6);
            let b = random_div_free(grid, 10 + d as u64);
            let alpha = two_form_potential(&b).unwrap();
            // d*α = ω_B
            let back = codifferential(&alpha).unwrap();
            let dev: f64 = (0..d)
                .map(|j| crate::test_support::rel_err(back.component(j), b.component(j)))
                .fold(0.0, f64::max);
            assert!(dev < 1e-10, "codifferential roundtrip d={d}: {dev:.3e}");
            // dα = 0
            assert!(exterior_derivative_norm(&alpha) < 1e-10 * (1.0 + b.l2_norm()));
            // ‖B‖² = Σ_{j<k} ‖∇α^{(j,k)}‖²
            let energy: f64 = alpha.components().iter().map(h1_energy).sum();
            let b2 = b.l2_norm().powi(2);
            assert!((energy - b2).abs() < 1e-10 * b2);
        }
    }

    #[test]
    fn two_form_potential_rejects_divergent_input() {
        let grid = gridd(3, 6);
        let e = random_curl_free(grid, 12);
        assert!(matches!(
            two_form_potential(&e),
            Err(Error::ConstraintResidual { .. })
        ));
    }

    #[test]
    fn vector_potential_3d_roundtrip() {
        let grid = gridd(3, 8);
        let b = VectorField::from_components(vec![
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::cos_mode(grid, &[1, 0, 0], 1.0).unwrap(),
        ])
        .unwrap();
        let a = vector_potential_3d(&b).unwrap();
        let expect = ScalarField::sin_mode(grid, &[1, 0, 0], 1.0).unwrap();
        assert!(crate::test_support::rel_err(a.component(1), &expect) < 1e-13);
        assert!(a.component(0).l2_norm() < 1e-13);
        assert!(a.component(2).l2_norm() < 1e-13);

        let b2 = random_div_free(grid, 61);
        let a2 = vector_potential_3d(&b2).unwrap();
        let rec = curl_vector_3d(&a2).unwrap();
        let dev: f64 = (0..3)
            .map(|j| crate::test_support::rel_err(rec.component(j), b2.component(j)))
            .fold(0.0, f64::max);
        assert!(dev < 1e-10);
        assert!(divergence(&a2).unwrap().l2_norm() < 1e-10 * (1.0 + b2.l2_norm()));
        // energy identity ‖∇A‖² = ‖∇∧A‖² + ‖∇·A‖² = ‖B‖²
        let grad2 = h1_energy_vec(&a2);
        let b_norm2 = b2.l2_norm().powi(2);
        assert!((grad2 - b_norm2).abs() < 1e-10 * b_norm2);
    }

    #[test]
    fn vector_potential_requires_d3() {
        let grid = gridd(2, 6);
        let b = random_div_free(grid, 2);
        assert!(matches!(
            vector_potential_3d(&b),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn two_form_matches_vector_potential_under_d3_identification() {
        let grid = gridd(3, 6);
        let b = random_div_free(grid, 90);
        let alpha = two_form_potential(&b).unwrap();
        let a = vector_potential_3d(&b).unwrap();
        // α_{23} = A_1, α_{13} = -A_2, α_{12} = A_3
        assert!(crate::test_support::rel_err(alpha.component(1, 2), a.component(0)) < 1e-12);
        let m = a.component(1).scale(Complex64::new(-1.0, 0.0));
        assert!(crate::test_support::rel_err(alpha.component(0, 2), &m) < 1e-12);
        assert!(crate::test_support::rel_err(alpha.component(0, 1), a.component(2)) < 1e-12);
    }

    #[test]
    fn hodge_energy_identity() {
        for d in [2usize, 3, 4] {
            let grid = gridd(d, 6);
            let f = rng_vector_field(grid, d, 44 + d as u64);
            // strip the k=0 mode (constants carry no gradient energy)
            let grad2 = h1_energy_vec(&f);
            let curl2 = curl(&f).unwrap().l2_norm().powi(2);
            let div2 = divergence(&f).unwrap().l2_norm().powi(2);
            assert!(
                (grad2 - curl2 - div2).abs() <= 1e-12 * grad2.max(1.0),
                "d={d}: {grad2} vs {curl2}+{div2}"
            );
        }
    }

    #[test]
    fn riesz_representation_of_curl_free_fields() {
        let grid = gridd(2, 8);
        let phi0 = rng_zero_mean_field(grid, 52);
        let e = gradient(&phi0);
        let phi = scalar_potential(&e).unwrap();
        let f = fractional_laplacian(&phi, 1.0).unwrap().scale(I);
        let rf = riesz(&f);
        let dev: f64 = (0..2)
            .map(|j| crate::test_support::rel_err(rf.component(j), e.component(j)))
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
        assert!((f.l2_norm() - e.l2_norm()).abs() < 1e-12 * e.l2_norm());
    }
}
