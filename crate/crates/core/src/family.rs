//! Generators for the orthonormal systems the inequalities quantify over:
//! longitudinal (curl-free) and transverse (divergence-free) plane-wave
//! families, semiclassical mode-ball families, Ḣ¹-normalized exponential
//! families, and seeded random constrained families.
//!
//! Plane-wave families satisfy their constraints exactly in the spectrum;
//! random families exist to guard the identity suites against
//! structure-specific coincidences. Every generator is deterministic in its
//! descriptor and seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{curl, divergence, leray_project};
use crate::error::{Error, Result};
use crate::field::{ScalarField, TwoFormField, VectorField};
use crate::grid::{canonical_rep, freq_norm, freq_norm2, Grid};

const GRAM_TOL: f64 = 1e-10;

/// Constraint class of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    CurlFree,
    DivFree,
    ScalarH1,
    ScalarL2,
}

/// Which inner product a Gram matrix is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramInner {
    L2,
    H1,
}

/// Fields an orthonormal family can be built from.
pub trait FamilyField: Clone + Send + Sync {
    fn field_grid(&self) -> &Grid;
    fn l2_inner(&self, other: &Self) -> Complex64;
    fn h1_inner(&self, other: &Self) -> Complex64;
    fn add_scaled(&mut self, c: Complex64, other: &Self);
    fn rescale(&mut self, c: Complex64);

    fn inner(&self, other: &Self, which: GramInner) -> Complex64 {
        match which {
            GramInner::L2 => self.l2_inner(other),
            GramInner::H1 => self.h1_inner(other),
        }
    }
}

fn h1_inner_scalar(a: &ScalarField, b: &ScalarField) -> Complex64 {
    let grid = *a.grid();
    let mut k = vec![0i64; grid.dim()];
    let mut acc = Complex64::default();
    for (flat, (x, y)) in a.spectrum().iter().zip(b.spectrum()).enumerate() {
        grid.frequency_of(flat, &mut k);
        acc += freq_norm2(&k) * x * y.conj();
    }
    acc
}

impl FamilyField for ScalarField {
    fn field_grid(&self) -> &Grid {
        self.grid()
    }
    fn l2_inner(&self, other: &Self) -> Complex64 {
        self.inner_product(other).expect("same grid")
    }
    fn h1_inner(&self, other: &Self) -> Complex64 {
        h1_inner_scalar(self, other)
    }
    fn add_scaled(&mut self, c: Complex64, other: &Self) {
        self.axpy(c, other);
    }
    fn rescale(&mut self, c: Complex64) {
        *self = self.scale(c);
    }
}

impl FamilyField for VectorField {
    fn field_grid(&self) -> &Grid {
        self.grid()
    }
    fn l2_inner(&self, other: &Self) -> Complex64 {
        self.inner_product(other).expect("same grid")
    }
    fn h1_inner(&self, other: &Self) -> Complex64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| h1_inner_scalar(a, b))
            .sum()
    }
    fn add_scaled(&mut self, c: Complex64, other: &Self) {
        self.axpy(c, other);
    }
    fn rescale(&mut self, c: Complex64) {
        *self = self.scale(c);
    }
}

impl FamilyField for TwoFormField {
    fn field_grid(&self) -> &Grid {
        self.grid()
    }
    fn l2_inner(&self, other: &Self) -> Complex64 {
        self.inner_product(other).expect("same grid")
    }
    fn h1_inner(&self, other: &Self) -> Complex64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| h1_inner_scalar(a, b))
            .sum()
    }
    fn add_scaled(&mut self, c: Complex64, other: &Self) {
        let comps: Vec<ScalarField> = self
            .components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| {
                let mut a = a.clone();
                a.axpy(c, b);
                a
            })
            .collect();
        *self = TwoFormField::from_components(*self.grid(), comps).expect("same shape");
    }
    fn rescale(&mut self, c: Complex64) {
        let comps: Vec<ScalarField> = self.components().iter().map(|a| a.scale(c)).collect();
        *self = TwoFormField::from_components(*self.grid(), comps).expect("same shape");
    }
}

/// Named recipe + parameters + seed; enough to regenerate a family
/// bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    ModeCurlFree {
        modes: Vec<Vec<i64>>,
    },
    ModeDivFree {
        modes: Vec<Vec<i64>>,
        per_mode: usize,
    },
    ModeDivFreeExplicit {
        modes: Vec<Vec<i64>>,
        polarizations: Vec<Vec<f64>>,
    },
    Semiclassical {
        radius: f64,
        kind: FamilyKind,
        cap: usize,
    },
    RandomVector {
        kind: FamilyKind,
        count: usize,
        band: f64,
        seed: u64,
    },
    RandomScalar {
        kind: FamilyKind,
        count: usize,
        band: f64,
        seed: u64,
    },
    H1Modes {
        radius: f64,
        m: usize,
        cap: usize,
    },
}

/// An ordered list of fields with a certified Gram matrix.
#[derive(Debug, Clone)]
pub struct OrthonormalFamily<F: FamilyField> {
    pub kind: FamilyKind,
    members: Vec<F>,
    gram: DMatrix<Complex64>,
    pub descriptor: FamilyDescriptor,
}

impl<F: FamilyField> OrthonormalFamily<F> {
    fn certify(
        kind: FamilyKind,
        members: Vec<F>,
        inner: GramInner,
        descriptor: FamilyDescriptor,
    ) -> Result<Self> {
        let gram = gram_matrix(&members, inner);
        let dev = gram_deviation(&gram);
        if dev > GRAM_TOL {
            return Err(Error::NonOrthonormal {
                deviation: dev,
                tol: GRAM_TOL,
            });
        }
        Ok(Self {
            kind,
            members,
            gram,
            descriptor,
        })
    }

    pub fn members(&self) -> &[F] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    /// Max |G - I| of the cached Gram matrix.
    pub fn gram_deviation(&self) -> f64 {
        gram_deviation(&self.gram)
    }
}

/// Gram matrix G[i][j] = ⟨m_i, m_j⟩ in the requested inner product.
pub fn gram_matrix<F: FamilyField>(members: &[F], inner: GramInner) -> DMatrix<Complex64> {
    let n = members.len();
    let entries = crate::par::map_indexed(n * n, |idx| {
        let (i, j) = (idx / n.max(1), idx % n.max(1));
        if j < i {
            Complex64::default() // filled from the conjugate below
        } else {
            members[i].inner(&members[j], inner)
        }
    });
    let mut gram = DMatrix::from_element(n, n, Complex64::default());
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = if j >= i {
                entries[i * n + j]
            } else {
                entries[j * n + i].conj()
            };
        }
    }
    gram
}

fn gram_deviation(gram: &DMatrix<Complex64>) -> f64 {
    let n = gram.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Report from re-checking a family: Gram deviation in the requested inner
/// product and the per-member constraint residual for the family's kind.
#[derive(Debug, Clone, Serialize)]
pub struct OrthonormalityReport {
    pub max_gram_deviation: f64,
    pub constraint_residuals: Vec<f64>,
}

fn scalar_constraint_residual(f: &ScalarField) -> f64 {
    f.mean().norm()
}

fn vector_constraint_residual(kind: FamilyKind, f: &VectorField) -> f64 {
    match kind {
        FamilyKind::CurlFree => curl(f).map(|c| c.l2_norm()).unwrap_or(f64::NAN),
        FamilyKind::DivFree => divergence(f).map(|d| d.l2_norm()).unwrap_or(f64::NAN),
        // M-component Ḣ¹ families only need zero mean per component
        FamilyKind::ScalarH1 | FamilyKind::ScalarL2 => f
            .components()
            .iter()
            .map(scalar_constraint_residual)
            .fold(0.0, f64::max),
    }
}

pub fn check_orthonormal_vector(
    fam: &OrthonormalFamily<VectorField>,
    inner: GramInner,
) -> OrthonormalityReport {
    let gram = gram_matrix(fam.members(), inner);
    OrthonormalityReport {
        max_gram_deviation: gram_deviation(&gram),
        constraint_residuals: fam
            .members()
            .iter()
            .map(|f| vector_constraint_residual(fam.kind, f))
            .collect(),
    }
}

pub fn check_orthonormal_scalar(
    fam: &OrthonormalFamily<ScalarField>,
    inner: GramInner,
) -> OrthonormalityReport {
    let gram = gram_matrix(fam.members(), inner);
    OrthonormalityReport {
        max_gram_deviation: gram_deviation(&gram),
        constraint_residuals: fam
            .members()
            .iter()
            .map(scalar_constraint_residual)
            .collect(),
    }
}

// --- mode validation -------------------------------------------------------

fn validate_modes(grid: &Grid, modes: &[Vec<i64>]) -> Result<()> {
    let mut seen: Vec<Vec<i64>> = Vec::with_capacity(modes.len());
    for k in modes {
        if !grid.contains_freq(k) {
            return Err(Error::ModeOutOfRange(k.clone()));
        }
        if k.iter().all(|&ki| ki == 0) {
            return Err(Error::ZeroMode);
        }
        if grid.touches_nyquist(k) {
            return Err(Error::NyquistMode(k.clone()));
        }
        let (canon, _) = canonical_rep(k);
        if seen.contains(&canon) {
            return Err(Error::DuplicateMode(k.clone()));
        }
        seen.push(canon);
    }
    Ok(())
}

/// Deterministic orthonormal basis of the orthogonal complement of k:
/// Gram-Schmidt of the coordinate vectors against k̂, in coordinate order.
pub fn transverse_basis(k: &[i64]) -> Vec<Vec<f64>> {
    let d = k.len();
    let norm = freq_norm(k);
    let khat: Vec<f64> = k.iter().map(|&ki| ki as f64 / norm).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for axis in 0..d {
        if basis.len() == d - 1 {
            break;
        }
        let mut v: Vec<f64> = (0..d).map(|i| if i == axis { 1.0 } else { 0.0 }).collect();
        let proj: f64 = khat[axis];
        for i in 0..d {
            v[i] -= proj * khat[i];
        }
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for i in 0..d {
                v[i] -= c * b[i];
            }
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            for x in &mut v {
                *x /= n;
            }
            basis.push(v);
        }
    }
    debug_assert_eq!(basis.len(), d - 1);
    basis
}

fn plane_wave_pair(grid: Grid, k: &[i64], direction: &[f64]) -> Result<[VectorField; 2]> {
    let amp = 2f64.sqrt();
    let cos_comps = direction
        .iter()
        .map(|&e| ScalarField::cos_mode(grid, k, amp * e))
        .collect::<Result<Vec<_>>>()?;
    let sin_comps = direction
        .iter()
        .map(|&e| ScalarField::sin_mode(grid, k, amp * e))
        .collect::<Result<Vec<_>>>()?;
    Ok([
        VectorField::from_components(cos_comps)?,
        VectorField::from_components(sin_comps)?,
    ])
}

/// Longitudinal plane-wave family: for each mode k the two real members
/// √2 (k/|k|) cos(k·x) and √2 (k/|k|) sin(k·x).
pub fn mode_family_curl_free(
    grid: Grid,
    modes: &[Vec<i64>],
) -> Result<OrthonormalFamily<VectorField>> {
    validate_modes(&grid, modes)?;
    let mut members = Vec::with_capacity(2 * modes.len());
    for k in modes {
        let norm = freq_norm(k);
        let khat: Vec<f64> = k.iter().map(|&ki| ki as f64 / norm).collect();
        members.extend(plane_wave_pair(grid, k, &khat)?);
    }
    OrthonormalFamily::certify(
        FamilyKind::CurlFree,
        members,
        GramInner::L2,
        FamilyDescriptor::ModeCurlFree {
            modes: modes.to_vec(),
        },
    )
}

/// How transverse polarizations are chosen for a div-free mode family.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizationRule {
    /// first `per_mode` vectors of the deterministic transverse basis
    Transverse { per_mode: usize },
    /// one explicit unit polarization per mode (parallel to the mode list)
    Explicit(Vec<Vec<f64>>),
}

/// Transverse plane-wave family: members √2 e cos(k·x), √2 e sin(k·x)
/// with e ⟂ k chosen by the polarization rule.
pub fn mode_family_div_free(
    grid: Grid,
    modes: &[Vec<i64>],
    rule: &PolarizationRule,
) -> Result<OrthonormalFamily<VectorField>> {
    validate_modes(&grid, modes)?;
    let d = grid.dim();
    let mut members = Vec::new();
    let (per_mode, explicit) = match rule {
        PolarizationRule::Transverse { per_mode } => {
            if *per_mode == 0 || *per_mode > d - 1 {
                return Err(Error::InvalidParameter {
                    name: "per_mode",
                    value: *per_mode as f64,
                    constraint: "1 <= per_mode <= d-1",
                });
            }
            (*per_mode, None)
        }
        PolarizationRule::Explicit(pols) => {
            if pols.len() != modes.len() {
                return Err(Error::LengthMismatch {
                    left: modes.len(),
                    right: pols.len(),
                });
            }
            (1, Some(pols))
        }
    };
    for (i, k) in modes.iter().enumerate() {
        let pols: Vec<Vec<f64>> = match explicit {
            Some(pols) => {
                let e = &pols[i];
                let norm: f64 = e.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter {
                        name: "polarization norm",
                        value: norm,
                        constraint: "unit length",
                    });
                }
                let dot: f64 = e
                    .iter()
                    .zip(k.iter())
                    .map(|(&ei, &ki)| ei * ki as f64)
                    .sum::<f64>()
                    / freq_norm(k);
                if dot.abs() > 1e-12 {
                    return Err(Error::NonTransverse {
                        mode: k.clone(),
                        polarization: e.clone(),
                        dot,
                    });
                }
                vec![e.clone()]
            }
            None => transverse_basis(k).into_iter().take(per_mode).collect(),
        };
        for e in &pols {
            members.extend(plane_wave_pair(grid, k, e)?);
        }
    }
    let descriptor = match rule {
        PolarizationRule::Transverse { per_mode } => FamilyDescriptor::ModeDivFree {
            modes: modes.to_vec(),
            per_mode: *per_mode,
        },
        PolarizationRule::Explicit(pols) => FamilyDescriptor::ModeDivFreeExplicit {
            modes: modes.to_vec(),
            polarizations: pols.clone(),
        },
    };
    OrthonormalFamily::certify(FamilyKind::DivFree, members, GramInner::L2, descriptor)
}

/// Family over every canonical lattice mode with 0 < |k| <= radius, ordered
/// by (|k|, lex), longitudinal or transverse (one polarization per mode so
/// prefixes of the two kinds stay aligned).
pub fn semiclassical_family(
    grid: Grid,
    radius: f64,
    kind: FamilyKind,
    cap: usize,
) -> Result<OrthonormalFamily<VectorField>> {
    if radius < 1.0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            constraint: "radius >= 1 (empty family otherwise)",
        });
    }
    let modes = grid.canonical_modes_in_ball(radius);
    if modes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            constraint: "at least one lattice mode in the ball",
        });
    }
    if 2 * modes.len() > cap {
        return Err(Error::FamilyTooSmall {
            needed: 2 * modes.len(),
            available: cap,
        });
    }
    let descriptor = FamilyDescriptor::Semiclassical { radius, kind, cap };
    let fam = match kind {
        FamilyKind::CurlFree => mode_family_curl_free(grid, &modes)?,
        FamilyKind::DivFree => {
            mode_family_div_free(grid, &modes, &PolarizationRule::Transverse { per_mode: 1 })?
        }
        _ => {
            return Err(Error::InvalidParameter {
                name: "kind",
                value: f64::NAN,
                constraint: "semiclassical families are curl_free or div_free",
            })
        }
    };
    OrthonormalFamily::certify(kind, fam.members, GramInner::L2, descriptor)
}

/// Ḣ¹-orthonormal family of M-component complex exponentials: member n puts
/// e^{ik·x}/|k| in component slot n mod M, with k running over the full mode
/// ball ordered by (|k|, lex).
pub fn h1_mode_family(
    grid: Grid,
    radius: f64,
    m: usize,
    cap: usize,
) -> Result<OrthonormalFamily<VectorField>> {
    if radius < 1.0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            constraint: "radius >= 1",
        });
    }
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
            constraint: "m >= 1",
        });
    }
    let modes = grid.modes_in_ball(radius);
    if modes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            constraint: "at least one lattice mode in the ball",
        });
    }
    let count = (m * modes.len()).min(cap);
    let mut members = Vec::with_capacity(count);
    for n in 0..count {
        let slot = n % m;
        let k = &modes[n / m];
        let coeff = Complex64::new(1.0 / freq_norm(k), 0.0);
        let comps = (0..m)
            .map(|j| {
                if j == slot {
                    ScalarField::mode(grid, k, coeff)
                } else {
                    Ok(ScalarField::zeros(grid))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        members.push(VectorField::from_components(comps)?);
    }
    OrthonormalFamily::certify(
        FamilyKind::ScalarH1,
        members,
        GramInner::H1,
        FamilyDescriptor::H1Modes { radius, m, cap },
    )
}

// --- random families -------------------------------------------------------

fn random_band_scalar(grid: Grid, band: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut spec = vec![Complex64::default(); grid.len()];
    for k in grid.canonical_modes_in_ball(band) {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        // a·cos(kx) + b·sin(kx): conjugate-symmetric coefficients
        let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
        spec[grid.spectrum_index(&k)] += Complex64::new(a / 2.0, -b / 2.0);
        spec[grid.spectrum_index(&neg)] += Complex64::new(a / 2.0, b / 2.0);
    }
    ScalarField::from_spectrum(grid, spec).expect("length by construction")
}

fn orthonormalize<F: FamilyField>(members: &mut [F], inner: GramInner) -> Result<()> {
    // two passes of modified Gram-Schmidt
    for pass in 0..2 {
        for i in 0..members.len() {
            let initial = members[i].inner(&members[i], inner).re.sqrt();
            for j in 0..i {
                let c = members[i].inner(&members[j], inner);
                let vj = members[j].clone();
                members[i].add_scaled(-c, &vj);
            }
            let norm = members[i].inner(&members[i], inner).re.sqrt();
            if pass == 0 && norm < 1e-8 * initial.max(1e-300) {
                return Err(Error::RankDeficient { index: i });
            }
            members[i].rescale(Complex64::new(1.0 / norm, 0.0));
        }
    }
    Ok(())
}

/// Dimension of the real banded constraint subspace for each kind.
pub fn constrained_subspace_dim(grid: &Grid, kind: FamilyKind, band: f64) -> usize {
    let canon = grid.canonical_modes_in_ball(band).len();
    match kind {
        FamilyKind::ScalarL2 | FamilyKind::ScalarH1 => 2 * canon,
        FamilyKind::CurlFree => 2 * canon,
        FamilyKind::DivFree => 2 * canon * (grid.dim() - 1),
    }
}

/// Random constrained vector family: band-limited draws projected onto the
/// constraint (Leray for div-free, gradient part for curl-free), then
/// orthonormalized. Deterministic in the seed.
pub fn random_vector_family(
    grid: Grid,
    kind: FamilyKind,
    count: usize,
    band: f64,
    seed: u64,
) -> Result<OrthonormalFamily<VectorField>> {
    if !matches!(kind, FamilyKind::CurlFree | FamilyKind::DivFree) {
        return Err(Error::InvalidParameter {
            name: "kind",
            value: f64::NAN,
            constraint: "random vector families are curl_free or div_free",
        });
    }
    let dim = constrained_subspace_dim(&grid, kind, band);
    if count > dim {
        return Err(Error::SubspaceExceeded { count, dim });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(count);
    for _ in 0..count {
        let comps: Vec<ScalarField> = (0..grid.dim())
            .map(|_| random_band_scalar(grid, band, &mut rng))
            .collect();
        let raw = VectorField::from_components(comps)?;
        let solenoidal = leray_project(&raw)?;
        let constrained = match kind {
            FamilyKind::DivFree => solenoidal,
            FamilyKind::CurlFree => raw.sub(&solenoidal)?,
            _ => unreachable!(),
        };
        members.push(constrained);
    }
    orthonormalize(&mut members, GramInner::L2)?;
    OrthonormalFamily::certify(
        kind,
        members,
        GramInner::L2,
        FamilyDescriptor::RandomVector {
            kind,
            count,
            band,
            seed,
        },
    )
}

/// Random zero-mean scalar family, orthonormal in L² or Ḣ¹ per its kind.
pub fn random_scalar_family(
    grid: Grid,
    kind: FamilyKind,
    count: usize,
    band: f64,
    seed: u64,
) -> Result<OrthonormalFamily<ScalarField>> {
    if !matches!(kind, FamilyKind::ScalarL2 | FamilyKind::ScalarH1) {
        return Err(Error::InvalidParameter {
            name: "kind",
            value: f64::NAN,
            constraint: "random scalar families are scalar_l2 or scalar_h1",
        });
    }
    let dim = constrained_subspace_dim(&grid, kind, band);
    if count > dim {
        return Err(Error::SubspaceExceeded { count, dim });
    }
    let inner = match kind {
        FamilyKind::ScalarH1 => GramInner::H1,
        _ => GramInner::L2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: Vec<ScalarField> = (0..count)
        .map(|_| random_band_scalar(grid, band, &mut rng))
        .collect();
    orthonormalize(&mut members, inner)?;
    OrthonormalFamily::certify(
        kind,
        members,
        inner,
        FamilyDescriptor::RandomScalar {
            kind,
            count,
            band,
            seed,
        },
    )
}

/// Either flavor of family, for descriptor-driven regeneration.
pub enum FamilyMembers {
    Scalar(OrthonormalFamily<ScalarField>),
    Vector(OrthonormalFamily<VectorField>),
}

/// Rebuild a family from its descriptor; bit-identical for the same seed.
pub fn regenerate(grid: Grid, descriptor: &FamilyDescriptor) -> Result<FamilyMembers> {
    Ok(match descriptor {
        FamilyDescriptor::ModeCurlFree { modes } => {
            FamilyMembers::Vector(mode_family_curl_free(grid, modes)?)
        }
        FamilyDescriptor::ModeDivFree { modes, per_mode } => FamilyMembers::Vector(
            mode_family_div_free(grid, modes, &PolarizationRule::Transverse { per_mode: *per_mode })?,
        ),
        FamilyDescriptor::ModeDivFreeExplicit {
            modes,
            polarizations,
        } => FamilyMembers::Vector(mode_family_div_free(
            grid,
            modes,
            &PolarizationRule::Explicit(polarizations.clone()),
        )?),
        FamilyDescriptor::Semiclassical { radius, kind, cap } => {
            FamilyMembers::Vector(semiclassical_family(grid, *radius, *kind, *cap)?)
        }
        FamilyDescriptor::RandomVector {
            kind,
            count,
            band,
            seed,
        } => FamilyMembers::Vector(random_vector_family(grid, *kind, *count, *band, *seed)?),
        FamilyDescriptor::RandomScalar {
            kind,
            count,
            band,
            seed,
        } => FamilyMembers::Scalar(random_scalar_family(grid, *kind, *count, *band, *seed)?),
        FamilyDescriptor::H1Modes { radius, m, cap } => {
            FamilyMembers::Vector(h1_mode_family(grid, *radius, *m, *cap)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{gradient, scalar_potential, two_form_potential};
    use crate::field::pair_list;

    fn gridd(d: usize, n: usize) -> Grid {
        Grid::new(d, n).unwrap()
    }

    #[test]
    fn curl_free_single_mode() {
        let grid = gridd(2, 8);
        let fam = mode_family_curl_free(grid, &[vec![1, 0]]).unwrap();
        assert_eq!(fam.len(), 2);
        assert!(fam.gram_deviation() < 1e-12);
        // explicit quadrature: first member is √2 (1,0) cos(x1)
        let expect = ScalarField::cos_mode(grid, &[1, 0], 2f64.sqrt()).unwrap();
        assert!(crate::test_support::rel_err(fam.members()[0].component(0), &expect) < 1e-13);
        assert!(fam.members()[0].component(1).l2_norm() < 1e-13);
        for m in fam.members() {
            assert!(curl(m).unwrap().l2_norm() < 1e-12);
        }
    }

    #[test]
    fn curl_free_two_modes_gram() {
        let grid = gridd(2, 8);
        let fam = mode_family_curl_free(grid, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(fam.len(), 4);
        // quadrature oracle for the Gram matrix
        let mut dev = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                let direct = fam.members()[i].inner_product(&fam.members()[j]).unwrap();
                dev = dev.max((direct - Complex64::new(target, 0.0)).norm());
            }
        }
        assert!(dev < 1e-12);
    }

    #[test]
    fn mode_family_rejects_bad_modes() {
        let grid = gridd(2, 8);
        assert!(matches!(
            mode_family_curl_free(grid, &[vec![0, 0]]),
            Err(Error::ZeroMode)
        ));
        assert!(matches!(
            mode_family_curl_free(grid, &[vec![1, 0], vec![1, 0]]),
            Err(Error::DuplicateMode(_))
        ));
        // negation-related pair
        assert!(matches!(
            mode_family_curl_free(grid, &[vec![1, 0], vec![-1, 0]]),
            Err(Error::DuplicateMode(_))
        ));
        // Nyquist row
        assert!(matches!(
            mode_family_curl_free(grid, &[vec![4, 0]]),
            Err(Error::NyquistMode(_))
        ));
    }

    #[test]
    fn div_free_exact_divergence() {
        let grid = gridd(2, 8);
        let fam = mode_family_div_free(
            grid,
            &[vec![1, 0]],
            &PolarizationRule::Explicit(vec![vec![0.0, 1.0]]),
        )
        .unwrap();
        for m in fam.members() {
            assert!(divergence(m).unwrap().l2_norm() < 1e-13);
        }
        // longitudinal polarization is rejected
        let r = mode_family_div_free(
            grid,
            &[vec![1, 0]],
            &PolarizationRule::Explicit(vec![vec![1.0, 0.0]]),
        );
        assert!(matches!(r, Err(Error::NonTransverse { .. })));
    }

    #[test]
    fn div_free_both_polarizations_d3() {
        let grid = gridd(3, 8);
        let fam = mode_family_div_free(
            grid,
            &[vec![1, 0, 0]],
            &PolarizationRule::Transverse { per_mode: 2 },
        )
        .unwrap();
        assert_eq!(fam.len(), 4);
        assert!(fam.gram_deviation() < 1e-12);
    }

    #[test]
    fn semiclassical_counts() {
        let grid = gridd(2, 16);
        let fam = semiclassical_family(grid, 1.0, FamilyKind::CurlFree, 1000).unwrap();
        assert_eq!(fam.len(), 4);
        let fam2 = semiclassical_family(grid, 2.0, FamilyKind::DivFree, 1000).unwrap();
        assert_eq!(fam2.len(), 12);
        assert!(semiclassical_family(grid, 0.5, FamilyKind::CurlFree, 1000).is_err());
        assert!(matches!(
            semiclassical_family(grid, 4.0, FamilyKind::CurlFree, 10),
            Err(Error::FamilyTooSmall { .. })
        ));
    }

    #[test]
    fn semiclassical_ordering_is_prefix_stable() {
        let grid = gridd(2, 16);
        let small = semiclassical_family(grid, 2.0, FamilyKind::CurlFree, 1000).unwrap();
        let large = semiclassical_family(grid, 3.0, FamilyKind::CurlFree, 1000).unwrap();
        for (a, b) in small.members().iter().zip(large.members()) {
            for j in 0..2 {
                assert!(crate::test_support::rel_err(a.component(j), b.component(j)) == 0.0);
            }
        }
    }

    #[test]
    fn random_family_gram_and_constraints() {
        let grid = gridd(2, 8);
        let one = random_vector_family(grid, FamilyKind::DivFree, 1, 3.0, 5).unwrap();
        assert_eq!(one.len(), 1);
        let fam = random_vector_family(grid, FamilyKind::DivFree, 8, 4.0, 5).unwrap();
        assert!(fam.gram_deviation() < 1e-10);
        for m in fam.members() {
            assert!(divergence(m).unwrap().l2_norm() < 1e-10);
        }
        let cf = random_vector_family(grid, FamilyKind::CurlFree, 8, 4.0, 6).unwrap();
        for m in cf.members() {
            assert!(curl(m).unwrap().l2_norm() < 1e-10);
        }
    }

    #[test]
    fn random_family_subspace_cap() {
        let grid = gridd(2, 8);
        let dim = constrained_subspace_dim(&grid, FamilyKind::CurlFree, 1.0);
        assert_eq!(dim, 4); // modes (1,0),(0,1): cos+sin each
        assert!(matches!(
            random_vector_family(grid, FamilyKind::CurlFree, dim + 1, 1.0, 1),
            Err(Error::SubspaceExceeded { .. })
        ));
        // exactly filling the subspace works
        let fam = random_vector_family(grid, FamilyKind::CurlFree, dim, 1.0, 1).unwrap();
        assert_eq!(fam.len(), dim);
    }

    #[test]
    fn check_orthonormal_reports() {
        let grid = gridd(2, 8);
        let fam = semiclassical_family(grid, 2.0, FamilyKind::CurlFree, 1000).unwrap();
        let report = check_orthonormal_vector(&fam, GramInner::L2);
        assert!(report.max_gram_deviation < 1e-12);
        assert!(report.constraint_residuals.iter().all(|&r| r < 1e-12));

        // Ḣ¹-orthonormal scalars give L²-orthonormal gradients …
        let h1 = random_scalar_family(grid, FamilyKind::ScalarH1, 6, 3.0, 9).unwrap();
        let grads: Vec<VectorField> = h1.members().iter().map(gradient).collect();
        let gram = gram_matrix(&grads, GramInner::L2);
        assert!(super::gram_deviation(&gram) < 1e-10);

        // … while gradients of an L²-orthonormal scalar family are not.
        let l2 = random_scalar_family(grid, FamilyKind::ScalarL2, 6, 3.0, 9).unwrap();
        let grads2: Vec<VectorField> = l2.members().iter().map(gradient).collect();
        let gram2 = gram_matrix(&grads2, GramInner::L2);
        assert!(super::gram_deviation(&gram2) > 1e-3);
    }

    #[test]
    fn potentials_inherit_orthonormality() {
        let grid = gridd(3, 8);
        // two-form potentials of a div-free family are Ḣ¹-orthonormal
        let bfam = random_vector_family(grid, FamilyKind::DivFree, 5, 2.0, 11).unwrap();
        let alphas: Vec<TwoFormField> = bfam
            .members()
            .iter()
            .map(|b| two_form_potential(b).unwrap())
            .collect();
        let gram = gram_matrix(&alphas, GramInner::H1);
        assert!(super::gram_deviation(&gram) < 1e-8);
        assert_eq!(alphas[0].ncomp(), pair_list(3).len());

        // scalar potentials of a curl-free family are Ḣ¹-orthonormal and
        // f = i(-Δ)^{1/2}φ are L²-orthonormal
        let efam = random_vector_family(grid, FamilyKind::CurlFree, 5, 2.0, 12).unwrap();
        let phis: Vec<ScalarField> = efam
            .members()
            .iter()
            .map(|e| scalar_potential(e).unwrap())
            .collect();
        let gram_phi = gram_matrix(&phis, GramInner::H1);
        assert!(super::gram_deviation(&gram_phi) < 1e-10);
        let fs: Vec<ScalarField> = phis
            .iter()
            .map(|phi| {
                crate::calculus::fractional_laplacian(phi, 1.0)
                    .unwrap()
                    .scale(Complex64::new(0.0, 1.0))
            })
            .collect();
        let gram_f = gram_matrix(&fs, GramInner::L2);
        assert!(super::gram_deviation(&gram_f) < 1e-10);
    }

    #[test]
    fn h1_mode_family_orthonormal() {
        let grid = gridd(3, 8);
        for m in [1usize, 3] {
            let fam = h1_mode_family(grid, 2.0, m, 10_000).unwrap();
            assert!(fam.gram_deviation() < 1e-12);
            assert_eq!(fam.members()[0].ncomp(), m);
        }
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let grid = gridd(2, 8);
        let fam = random_vector_family(grid, FamilyKind::DivFree, 4, 3.0, 77).unwrap();
        let FamilyMembers::Vector(again) = regenerate(grid, &fam.descriptor).unwrap() else {
            panic!("vector family expected");
        };
        for (a, b) in fam.members().iter().zip(again.members()) {
            for j in 0..2 {
                for (x, y) in a.component(j).values().iter().zip(b.component(j).values()) {
                    assert_eq!(x, y);
                }
            }
        }
        assert_eq!(fam.gram(), again.gram());
    }

    #[test]
    fn empty_family_report() {
        let members: Vec<VectorField> = Vec::new();
        let gram = gram_matrix(&members, GramInner::L2);
        assert_eq!(super::gram_deviation(&gram), 0.0);
    }
}
