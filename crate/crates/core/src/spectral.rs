//! Dense Fourier-basis materialization of the commutator `[R_j, u]` and the
//! Cwikel-type product `u(-Δ)^{-1/2}`, singular value computation, and the
//! Hilbert-space counting bounds used by the proofs: the trace pairing
//! inequality Σ|⟨x_n, K y_n⟩| ≤ Σ s_n(K) and the weak-Schatten partial-sum
//! cap Σ_{n≤N} s_n ≤ p/(p-1)·‖K‖_{S^p_weak}·N^{1-1/p}.
//!
//! Matrices are indexed over the zero-excluded banded lattice, ordered by
//! (|k|, lex). The symbol u is hard-truncated to |k| <= band before
//! assembly (the dropped L² mass share is reported on the operator), so the
//! entry û(k-m) is alias-free for every index pair: differences with
//! |k-m| > band are exactly zero and the rest sit strictly inside the
//! lattice range.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{freq_norm, Grid};
use crate::par;

/// Zero-excluded banded frequency lattice, ordered by (|k|, lex).
#[derive(Debug, Clone)]
pub struct BandedLattice {
    grid: Grid,
    band: f64,
    modes: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl BandedLattice {
    pub fn new(grid: Grid, band: f64) -> Result<Self> {
        let limit = (grid.points_per_axis() / 2 - 1) as f64;
        if !(band >= 1.0) || band > limit {
            return Err(Error::BandTooLarge { band, limit });
        }
        let modes = grid.modes_in_ball(band);
        let index = modes
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Ok(Self {
            grid,
            band,
            modes,
            index,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Vec<i64>] {
        &self.modes
    }

    pub fn position(&self, k: &[i64]) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Restriction of a scalar field to the banded coefficient vector.
    pub fn coefficients(&self, f: &ScalarField) -> DVector<Complex64> {
        let spec = f.spectrum();
        DVector::from_iterator(
            self.modes.len(),
            self.modes.iter().map(|k| spec[self.grid.spectrum_index(k)]),
        )
    }

    /// Stacked banded coefficients of all components of a vector field.
    pub fn coefficients_stacked(&self, f: &VectorField) -> DVector<Complex64> {
        let m = self.modes.len();
        let mut out = DVector::from_element(m * f.ncomp(), Complex64::default());
        for j in 0..f.ncomp() {
            let spec = f.component(j).spectrum();
            for (i, k) in self.modes.iter().enumerate() {
                out[j * m + i] = spec[self.grid.spectrum_index(k)];
            }
        }
        out
    }

    /// Mass share of `u` dropped by truncation to |k| <= band, together with
    /// the surviving spectrum laid out on the full grid.
    fn truncate_symbol(&self, u: &ScalarField) -> (Vec<Complex64>, f64) {
        let spec = u.spectrum();
        let mut kept = vec![Complex64::default(); spec.len()];
        let mut total = 0.0f64;
        let mut dropped = 0.0f64;
        let mut k = vec![0i64; self.grid.dim()];
        let band2 = self.band * self.band;
        for (flat, &c) in spec.iter().enumerate() {
            let mass = c.norm_sqr();
            total += mass;
            self.grid.frequency_of(flat, &mut k);
            let n2: i64 = k.iter().map(|&ki| ki * ki).sum();
            if (n2 as f64) <= band2 {
                kept[flat] = c;
            } else {
                dropped += mass;
            }
        }
        let share = if total == 0.0 { 0.0 } else { dropped / total };
        (kept, share)
    }

    /// û(δ) of the truncated symbol; zero outside the band by construction.
    fn symbol_at(&self, kept: &[Complex64], delta: &[i64]) -> Complex64 {
        let n2: i64 = delta.iter().map(|&x| x * x).sum();
        if (n2 as f64) > self.band * self.band {
            return Complex64::default();
        }
        kept[self.grid.spectrum_index(delta)]
    }
}

/// A densely materialized operator between banded coefficient spaces, with
/// cached singular values.
#[derive(Debug)]
pub struct DenseOperator {
    lattice: Arc<BandedLattice>,
    /// number of stacked row blocks (1 for a single commutator component,
    /// d for the full vector commutator)
    pub row_components: usize,
    matrix: DMatrix<Complex64>,
    /// L² mass share of the symbol u dropped by band truncation
    pub truncated_mass: f64,
    singular: OnceLock<Vec<f64>>,
}

impl DenseOperator {
    pub fn lattice(&self) -> &BandedLattice {
        &self.lattice
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    /// Full singular value list, nonincreasing; computed once and cached.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if let Some(cached) = self.singular.get() {
            return Ok(cached.clone());
        }
        let values = compute_singular_values(&self.matrix)?;
        let _ = self.singular.set(values.clone());
        Ok(values)
    }
}

/// Singular values of an arbitrary complex matrix, sorted nonincreasing.
pub fn compute_singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Factorization("SVD did not converge".into()))?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(values)
}

fn assemble(
    lattice: &Arc<BandedLattice>,
    kept: &[Complex64],
    row_components: usize,
    truncated_mass: f64,
    symbol: impl Fn(usize, &[i64], &[i64]) -> f64 + Sync,
) -> DenseOperator {
    let m = lattice.len();
    let rows = row_components * m;
    let mut matrix = DMatrix::from_element(rows, m, Complex64::default());
    {
        let data = matrix.as_mut_slice(); // column-major: entry (r,c) at c*rows + r
        par::for_each_chunk_mut(data, rows, |c, col| {
            let mode_c = &lattice.modes()[c];
            let mut delta = vec![0i64; mode_c.len()];
            for (r, slot) in col.iter_mut().enumerate() {
                let (comp, ri) = (r / m, r % m);
                let mode_r = &lattice.modes()[ri];
                for (i, d) in delta.iter_mut().enumerate() {
                    *d = mode_r[i] - mode_c[i];
                }
                let coeff = lattice.symbol_at(kept, &delta);
                if coeff != Complex64::default() {
                    *slot = symbol(comp, mode_r, mode_c) * coeff;
                }
            }
        });
    }
    DenseOperator {
        lattice: lattice.clone(),
        row_components,
        matrix,
        truncated_mass,
        singular: OnceLock::new(),
    }
}

/// `[R_j, u]` on the banded lattice: entry (k, m) = (k_j/|k| − m_j/|m|)·û(k−m).
pub fn materialize_commutator(u: &ScalarField, j: usize, band: f64) -> Result<DenseOperator> {
    let grid = *u.grid();
    if j >= grid.dim() {
        return Err(Error::ComponentMismatch {
            expected: grid.dim(),
            got: j,
        });
    }
    let lattice = Arc::new(BandedLattice::new(grid, band)?);
    let (kept, truncated) = lattice.truncate_symbol(u);
    Ok(assemble(&lattice, &kept, 1, truncated, move |_, k, m| {
        crate::calculus::riesz_symbol(k, j) - crate::calculus::riesz_symbol(m, j)
    }))
}

/// The full vector commutator `[R, u]` with the d component blocks stacked
/// vertically; its singular values carry the weak-S^d functional of the
/// study.
pub fn materialize_commutator_stacked(u: &ScalarField, band: f64) -> Result<DenseOperator> {
    let grid = *u.grid();
    let lattice = Arc::new(BandedLattice::new(grid, band)?);
    let (kept, truncated) = lattice.truncate_symbol(u);
    Ok(assemble(
        &lattice,
        &kept,
        grid.dim(),
        truncated,
        move |comp, k, m| {
            crate::calculus::riesz_symbol(k, comp) - crate::calculus::riesz_symbol(m, comp)
        },
    ))
}

/// `u(-Δ)^{-1/2}` on the banded lattice: entry (k, m) = û(k−m)/|m|.
pub fn materialize_cwikel(u: &ScalarField, band: f64) -> Result<DenseOperator> {
    let grid = *u.grid();
    let lattice = Arc::new(BandedLattice::new(grid, band)?);
    let (kept, truncated) = lattice.truncate_symbol(u);
    Ok(assemble(&lattice, &kept, 1, truncated, move |_, _, m| {
        1.0 / freq_norm(m)
    }))
}

fn orthonormality_deviation(vectors: &[DVector<Complex64>]) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..vectors.len() {
        for j in i..vectors.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            let dot = vectors[i].dotc(&vectors[j]);
            dev = dev.max((dot - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Both sides of the trace pairing inequality
/// Σ_{n≤N} |⟨x_n, K y_n⟩| ≤ Σ_{n≤N} s_n(K)
/// for orthonormal systems (x_n) in the codomain and (y_n) in the domain.
pub fn trace_pairing_bound(
    op: &DenseOperator,
    x: &[DVector<Complex64>],
    y: &[DVector<Complex64>],
) -> Result<(f64, f64)> {
    trace_pairing_bound_matrix(&op.singular_values()?, op.matrix(), x, y)
}

/// Matrix-level form of [`trace_pairing_bound`], reusable on raw matrices.
pub fn trace_pairing_bound_matrix(
    singular_values: &[f64],
    matrix: &DMatrix<Complex64>,
    x: &[DVector<Complex64>],
    y: &[DVector<Complex64>],
) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n > matrix.nrows().min(matrix.ncols()) {
        return Err(Error::FamilyTooSmall {
            needed: n,
            available: matrix.nrows().min(matrix.ncols()),
        });
    }
    const TOL: f64 = 1e-10;
    let dev_x = orthonormality_deviation(x);
    let dev_y = orthonormality_deviation(y);
    let dev = dev_x.max(dev_y);
    if dev > TOL {
        return Err(Error::NonOrthonormal {
            deviation: dev,
            tol: TOL,
        });
    }
    let mut lhs = 0.0;
    for (xn, yn) in x.iter().zip(y) {
        lhs += xn.dotc(&(matrix * yn)).norm();
    }
    let rhs: f64 = singular_values.iter().take(n).sum();
    if lhs > rhs + TOL {
        return Err(Error::Factorization(format!(
            "trace pairing violated: {lhs} > {rhs}"
        )));
    }
    Ok((lhs, rhs))
}

/// Singular-value list as CSV (columns: n, s_n) for external plotting.
pub fn singular_values_csv(s: &[f64]) -> String {
    let mut csv = String::from("n,s_n\n");
    for (i, v) in s.iter().enumerate() {
        csv.push_str(&format!("{},{:?}\n", i + 1, v));
    }
    csv
}

/// Partial sum of singular values and its weak-Schatten cap:
/// (Σ_{n≤N} s_n, p/(p-1)·sup_n n^{1/p} s_n·N^{1-1/p}).
pub fn partial_sum_bound(s: &[f64], p: f64, n: usize) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            constraint: "p > 1",
        });
    }
    if n > s.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: s.len(),
        });
    }
    let weak = crate::norms::weak_lp_functional(s, p)?;
    let sum: f64 = s.iter().take(n).sum();
    let cap = p / (p - 1.0) * weak * (n as f64).powf(1.0 - 1.0 / p);
    if sum > cap + 1e-10 {
        return Err(Error::Factorization(format!(
            "partial-sum cap violated: {sum} > {cap}"
        )));
    }
    Ok((sum, cap))
}
