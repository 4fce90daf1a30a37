//! Clifford algebra generators: d Hermitian N×N matrices, N = 2^⌊d/2⌋,
//! with γ_j γ_k + γ_k γ_j = 2δ_{jk}, built by the standard tensor-product
//! recursion over Pauli blocks. Entries are 0, ±1 or ±i, so the relations
//! hold exactly in floating point.
//!
//! The recovery check materializes [γ·R, u] = Σ_j γ_j ⊗ [R_j, u] on the
//! banded space tensored with the spinor space and verifies the
//! anticommutation identity [R_j, u] = ½([γ·R, u] γ_j + γ_j [γ·R, u]).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spectral::materialize_commutator;

pub struct CliffordAlgebra {
    pub dim: usize,
    pub matrix_size: usize,
    gammas: Vec<DMatrix<Complex64>>,
}

fn pauli(which: usize) -> DMatrix<Complex64> {
    let z = Complex64::default();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match which {
        1 => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => unreachable!(),
    }
}

fn identity(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_diagonal_element(n, n, Complex64::new(1.0, 0.0))
}

/// σ₃^{⊗left} ⊗ block ⊗ I^{⊗right}
fn chain(left: usize, block: &DMatrix<Complex64>, right: usize) -> DMatrix<Complex64> {
    let mut acc = identity(1);
    for _ in 0..left {
        acc = acc.kronecker(&pauli(3));
    }
    acc = acc.kronecker(block);
    for _ in 0..right {
        acc = acc.kronecker(&identity(2));
    }
    acc
}

/// Standard recursive construction for 2 <= d <= 8.
pub fn clifford_generators(d: usize) -> Result<CliffordAlgebra> {
    if !(2..=8).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            constraint: "2 <= d <= 8",
        });
    }
    let m = d / 2;
    let mut gammas = Vec::with_capacity(d);
    for j in 1..=m {
        gammas.push(chain(j - 1, &pauli(1), m - j));
        gammas.push(chain(j - 1, &pauli(2), m - j));
    }
    if d % 2 == 1 {
        gammas.push(chain(m, &identity(1), 0));
    }
    gammas.truncate(d);
    Ok(CliffordAlgebra {
        dim: d,
        matrix_size: 1 << m,
        gammas,
    })
}

impl CliffordAlgebra {
    pub fn gammas(&self) -> &[DMatrix<Complex64>] {
        &self.gammas
    }

    /// max entry of |γ_j γ_k + γ_k γ_j − 2δ_{jk} I| over all pairs.
    pub fn max_anticommutation_deviation(&self) -> f64 {
        let n = self.matrix_size;
        let mut dev = 0.0f64;
        for j in 0..self.dim {
            for k in 0..self.dim {
                let anti = &self.gammas[j] * &self.gammas[k] + &self.gammas[k] * &self.gammas[j];
                let target = if j == k { 2.0 } else { 0.0 };
                let diff = anti - identity(n) * Complex64::new(target, 0.0);
                dev = dev.max(diff.iter().map(|v| v.norm()).fold(0.0, f64::max));
            }
        }
        dev
    }

    /// max entry of |γ_j − γ_j^H| over generators.
    pub fn max_hermiticity_deviation(&self) -> f64 {
        self.gammas
            .iter()
            .map(|g| {
                (g - g.adjoint())
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Matrix-level check of the recovery identity for component j. Returns the
/// two sides and their max entrywise deviation.
pub struct CommutatorRecovery {
    pub lhs: DMatrix<Complex64>,
    pub rhs: DMatrix<Complex64>,
    pub max_deviation: f64,
}

pub fn clifford_commutator_recovery(
    u: &ScalarField,
    j: usize,
    band: f64,
) -> Result<CommutatorRecovery> {
    let d = u.grid().dim();
    let algebra = clifford_generators(d)?;
    let components: Vec<DMatrix<Complex64>> = (0..d)
        .map(|l| Ok(materialize_commutator(u, l, band)?.matrix().clone()))
        .collect::<Result<_>>()?;
    let m = components[0].nrows();
    let n = algebra.matrix_size;
    // [γ·R, u] = Σ_l γ_l ⊗ [R_l, u]
    let mut gamma_comm = DMatrix::from_element(n * m, n * m, Complex64::default());
    for (gamma, component) in algebra.gammas.iter().zip(&components) {
        gamma_comm += gamma.kronecker(component);
    }
    let gamma_j = algebra.gammas[j].kronecker(&identity(m));
    let rhs = (&gamma_comm * &gamma_j + &gamma_j * &gamma_comm) * Complex64::new(0.5, 0.0);
    let lhs = identity(n).kronecker(&components[j]);
    let max_deviation = (&lhs - &rhs)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(CommutatorRecovery {
        lhs,
        rhs,
        max_deviation,
    })
}
