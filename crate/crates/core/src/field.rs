//! Complex-valued scalar, vector, and 2-form fields on the periodic grid,
//! carrying grid values and a lazily cached spectrum.
//!
//! Everything is stored complex even when a field is known to be real;
//! reality is an invariant checked by tests, not a type. The spectrum
//! cache is a `OnceLock`, so concurrent reads race benignly and caching
//! is idempotent.

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;

/// Scalar grid function with values per grid point and a cached spectrum.
#[derive(Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for ScalarField {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            grid: self.grid,
            values: self.values.clone(),
            spectrum,
        }
    }
}

impl ScalarField {
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_spectrum(grid: Grid, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: spectrum.len(),
            });
        }
        let values = fft::inverse(&grid, &spectrum);
        let cache = OnceLock::new();
        let _ = cache.set(spectrum);
        Ok(Self {
            grid,
            values,
            spectrum: cache,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::default(); grid.len()],
            spectrum: OnceLock::new(),
        }
    }

    /// Build from a function of the spatial point.
    pub fn from_point_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let mut values = vec![Complex64::default(); grid.len()];
        let mut x = vec![0f64; grid.dim()];
        for (flat, v) in values.iter_mut().enumerate() {
            grid.point_of(flat, &mut x);
            *v = f(&x);
        }
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    /// The single complex mode `c · e^{ik·x}`.
    pub fn mode(grid: Grid, k: &[i64], coeff: Complex64) -> Result<Self> {
        if !grid.contains_freq(k) {
            return Err(Error::ModeOutOfRange(k.to_vec()));
        }
        let mut spec = vec![Complex64::default(); grid.len()];
        spec[grid.spectrum_index(k)] = coeff;
        Self::from_spectrum(grid, spec)
    }

    /// Real field `a·cos(k·x)`, exact in the spectrum (a/2 at ±k).
    pub fn cos_mode(grid: Grid, k: &[i64], a: f64) -> Result<Self> {
        if !grid.contains_freq(k) {
            return Err(Error::ModeOutOfRange(k.to_vec()));
        }
        if grid.touches_nyquist(k) {
            return Err(Error::NyquistMode(k.to_vec()));
        }
        let mut spec = vec![Complex64::default(); grid.len()];
        let half = Complex64::new(a / 2.0, 0.0);
        spec[grid.spectrum_index(k)] += half;
        let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
        spec[grid.spectrum_index(&neg)] += half;
        Self::from_spectrum(grid, spec)
    }

    /// Real field `a·sin(k·x)`, exact in the spectrum (∓ia/2 at ±k).
    pub fn sin_mode(grid: Grid, k: &[i64], a: f64) -> Result<Self> {
        if !grid.contains_freq(k) {
            return Err(Error::ModeOutOfRange(k.to_vec()));
        }
        if grid.touches_nyquist(k) {
            return Err(Error::NyquistMode(k.to_vec()));
        }
        let mut spec = vec![Complex64::default(); grid.len()];
        spec[grid.spectrum_index(k)] += Complex64::new(0.0, -a / 2.0);
        let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
        spec[grid.spectrum_index(&neg)] += Complex64::new(0.0, a / 2.0);
        Self::from_spectrum(grid, spec)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Frequency coefficients; computed once and cached.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| fft::forward(&self.grid, &self.values))
    }

    /// Coefficient at frequency `k`.
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.spectrum()[self.grid.spectrum_index(k)]
    }

    /// Mean value (= coefficient at k = 0, evaluated by quadrature).
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.grid.len() as f64
    }

    /// Apply a Fourier multiplier `m(k)`; the caller supplies the k = 0
    /// value explicitly and every `m(k)` must be finite.
    pub fn apply_multiplier(&self, m: impl Fn(&[i64]) -> Complex64) -> Result<Self> {
        let spec = self.spectrum();
        let mut out = vec![Complex64::default(); spec.len()];
        let mut k = vec![0i64; self.grid.dim()];
        for (flat, slot) in out.iter_mut().enumerate() {
            self.grid.frequency_of(flat, &mut k);
            let mk = m(&k);
            if !mk.re.is_finite() || !mk.im.is_finite() {
                return Err(Error::NonFiniteMultiplier(k));
            }
            *slot = mk * spec[flat];
        }
        Self::from_spectrum(self.grid, out)
    }

    /// L² inner product `∫ f·conj(g)` by normalized quadrature.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        check_same_grid(&self.grid, &other.grid)?;
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum / self.grid.len() as f64)
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum / self.grid.len() as f64).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        Self {
            grid: self.grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_values(self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Self::from_values(self.grid, values)
    }

    /// Pointwise product f·g (no conjugation).
    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Self::from_values(self.grid, values)
    }

    /// Largest imaginary part in magnitude, for reality checks.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// In-place `self += c·other`, dropping any cached spectrum.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        self.spectrum = OnceLock::new();
    }
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch {
            expected_d: a.dim(),
            expected_n: a.points_per_axis(),
            got_d: b.dim(),
            got_n: b.points_per_axis(),
        });
    }
    Ok(())
}

/// Vector field: a list of component scalars on a common grid. The component
/// count is usually the grid dimension d but may be any M >= 1 for
/// M-component orthonormal systems.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or(Error::ComponentMismatch { expected: 1, got: 0 })?
            .grid();
        for c in &components {
            check_same_grid(&grid, c.grid())?;
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid, ncomp: usize) -> Self {
        Self {
            grid,
            components: (0..ncomp).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn component(&self, j: usize) -> &ScalarField {
        &self.components[j]
    }

    #[inline]
    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    /// Componentwise L² inner product.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.ncomp() != other.ncomp() {
            return Err(Error::ComponentMismatch {
                expected: self.ncomp(),
                got: other.ncomp(),
            });
        }
        let mut acc = Complex64::default();
        for (a, b) in self.components.iter().zip(&other.components) {
            acc += a.inner_product(b)?;
        }
        Ok(acc)
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.components.iter().map(|c| c.l2_norm().powi(2)).sum();
        sum.sqrt()
    }

    /// Pointwise dot product Σ_j f_j·g_j, no conjugation.
    pub fn pointwise_dot(&self, other: &Self) -> Result<ScalarField> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.ncomp() != other.ncomp() {
            return Err(Error::ComponentMismatch {
                expected: self.ncomp(),
                got: other.ncomp(),
            });
        }
        let mut out = ScalarField::zeros(self.grid);
        for (a, b) in self.components.iter().zip(&other.components) {
            out.axpy(Complex64::new(1.0, 0.0), &a.mul_pointwise(b)?);
        }
        Ok(out)
    }

    /// Pointwise squared Euclidean magnitude Σ_j |f_j|², a real field.
    pub fn abs2(&self) -> ScalarField {
        let mut values = vec![Complex64::default(); self.grid.len()];
        for c in &self.components {
            for (slot, v) in values.iter_mut().zip(c.values()) {
                slot.re += v.norm_sqr();
            }
        }
        ScalarField::from_values(self.grid, values).expect("length by construction")
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|f| f.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        VectorField::from_components(comps)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        VectorField::from_components(comps)
    }

    /// Scale each component by a scalar field (pointwise u·F).
    pub fn mul_scalar_pointwise(&self, u: &ScalarField) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| c.mul_pointwise(u))
            .collect::<Result<Vec<_>>>()?;
        VectorField::from_components(comps)
    }

    /// In-place `self += c·other` componentwise.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        debug_assert_eq!(self.ncomp(), other.ncomp());
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(c, b);
        }
    }

    /// Classical cross product, d = 3 only.
    pub fn cross_3d(&self, other: &Self) -> Result<VectorField> {
        if self.ncomp() != 3 || other.ncomp() != 3 {
            return Err(Error::UnsupportedDimension {
                d: self.ncomp(),
                constraint: "cross product needs exactly 3 components",
            });
        }
        check_same_grid(&self.grid, &other.grid)?;
        let a = &self.components;
        let b = &other.components;
        let c0 = a[1].mul_pointwise(&b[2])?.sub(&a[2].mul_pointwise(&b[1])?)?;
        let c1 = a[2].mul_pointwise(&b[0])?.sub(&a[0].mul_pointwise(&b[2])?)?;
        let c2 = a[0].mul_pointwise(&b[1])?.sub(&a[1].mul_pointwise(&b[0])?)?;
        VectorField::from_components(vec![c0, c1, c2])
    }
}

/// 2-form field with d(d-1)/2 components indexed by ordered pairs (j,k), j<k,
/// in lexicographic order.
#[derive(Debug, Clone)]
pub struct TwoFormField {
    grid: Grid,
    components: Vec<ScalarField>,
}

/// Position of the (j,k) pair, j<k, in lexicographic order for dimension d.
pub fn pair_index(d: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < d);
    // pairs (0,1),(0,2),...,(0,d-1),(1,2),...
    j * d - j * (j + 1) / 2 + (k - j - 1)
}

/// Ordered list of index pairs (j,k), j<k, for dimension d.
pub fn pair_list(d: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
    for j in 0..d {
        for k in (j + 1)..d {
            pairs.push((j, k));
        }
    }
    pairs
}

impl TwoFormField {
    pub fn from_components(grid: Grid, components: Vec<ScalarField>) -> Result<Self> {
        let expected = grid.dim() * (grid.dim() - 1) / 2;
        if components.len() != expected {
            return Err(Error::ComponentMismatch {
                expected,
                got: components.len(),
            });
        }
        for c in &components {
            check_same_grid(&grid, c.grid())?;
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        let count = grid.dim() * (grid.dim() - 1) / 2;
        Self {
            grid,
            components: (0..count).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    /// Component α_{jk} for j<k.
    pub fn component(&self, j: usize, k: usize) -> &ScalarField {
        &self.components[pair_index(self.grid.dim(), j, k)]
    }

    #[inline]
    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.components.iter().map(|c| c.l2_norm().powi(2)).sum();
        sum.sqrt()
    }

    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        check_same_grid(&self.grid, &other.grid)?;
        let mut acc = Complex64::default();
        for (a, b) in self.components.iter().zip(&other.components) {
            acc += a.inner_product(b)?;
        }
        Ok(acc)
    }

    /// In-place `self += c·other` componentwise.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        debug_assert_eq!(self.ncomp(), other.ncomp());
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(c, b);
        }
    }
}

/// Σ_n E_n·B_n pointwise over equal-length lists on a common grid.
pub fn pointwise_dot_sum(e_list: &[VectorField], b_list: &[VectorField]) -> Result<ScalarField> {
    if e_list.len() != b_list.len() {
        return Err(Error::LengthMismatch {
            left: e_list.len(),
            right: b_list.len(),
        });
    }
    let first = e_list.first().ok_or(Error::ComponentMismatch { expected: 1, got: 0 })?;
    let grid = *first.grid();
    let mut acc = ScalarField::zeros(grid);
    for (e, b) in e_list.iter().zip(b_list) {
        check_same_grid(&grid, e.grid())?;
        acc.axpy(Complex64::new(1.0, 0.0), &e.pointwise_dot(b)?);
    }
    Ok(acc)
}

/// Σ_n |ψ_n|² pointwise, a real field.
pub fn pointwise_abs2_sum(list: &[VectorField]) -> Result<ScalarField> {
    let first = list.first().ok_or(Error::ComponentMismatch { expected: 1, got: 0 })?;
    let grid = *first.grid();
    let mut acc = ScalarField::zeros(grid);
    for f in list {
        check_same_grid(&grid, f.grid())?;
        acc.axpy(Complex64::new(1.0, 0.0), &f.abs2());
    }
    Ok(acc)
}

// --- flat field dump ------------------------------------------------------
//
// Textual format, stable within this repo:
//   line 1:  "divcurl-field v1"
//   line 2:  "<d> <n> <component count>"
//   then one "<re> <im>" pair per line, components concatenated,
//   each component row-major over the grid.

pub fn write_field_dump<W: Write>(mut w: W, grid: &Grid, components: &[&ScalarField]) -> Result<()> {
    writeln!(w, "divcurl-field v1")?;
    writeln!(w, "{} {} {}", grid.dim(), grid.points_per_axis(), components.len())?;
    for c in components {
        for v in c.values() {
            writeln!(w, "{:?} {:?}", v.re, v.im)?;
        }
    }
    Ok(())
}

pub fn read_field_dump<R: BufRead>(r: R) -> Result<(Grid, Vec<ScalarField>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::FieldFormat("empty input".into()))??;
    if header.trim() != "divcurl-field v1" {
        return Err(Error::FieldFormat(format!("bad header `{header}`")));
    }
    let meta = lines
        .next()
        .ok_or_else(|| Error::FieldFormat("missing size line".into()))??;
    let parts: Vec<usize> = meta
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::FieldFormat(format!("bad size token `{t}`"))))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        return Err(Error::FieldFormat("size line needs `d n ncomp`".into()));
    }
    let grid = Grid::new(parts[0], parts[1])?;
    let ncomp = parts[2];
    let mut fields = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let line = lines
                .next()
                .ok_or_else(|| Error::FieldFormat("truncated value block".into()))??;
            let mut it = line.split_whitespace();
            let re: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::FieldFormat(format!("bad value line `{line}`")))?;
            let im: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::FieldFormat(format!("bad value line `{line}`")))?;
            values.push(Complex64::new(re, im));
        }
        fields.push(ScalarField::from_values(grid, values)?);
    }
    Ok((grid, fields))
}
