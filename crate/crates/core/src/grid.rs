//! Uniform grid on the d-dimensional torus `[0, 2π)^d` and its integer
//! frequency lattice.
//!
//! The measure is normalized to total mass 1, so quadrature is the plain
//! grid average and `e^{ik·x}` is an orthonormal basis of L². Frequencies
//! run over integer vectors with components in `(-n/2, n/2]`; the Nyquist
//! rows `k_i = n/2` are retained by the transforms but have no negative
//! partner, so they are excluded from symmetry checks and from family
//! generators.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Grid descriptor: dimension `d` and points per axis `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    dim: usize,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidGrid(format!("d = {dim}, but d >= 2 is required")));
        }
        if points_per_axis < 4 || !points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n = {points_per_axis}, but an even n >= 4 is required"
            )));
        }
        // keep n^d within addressable range
        let len = (points_per_axis as u128).pow(dim as u32);
        if len > usize::MAX as u128 / 2 {
            return Err(Error::InvalidGrid(format!(
                "grid with n^d = {len} points is too large"
            )));
        }
        Ok(Self { dim, points_per_axis })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Total number of grid points, `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest representable frequency per axis, `n/2`.
    #[inline]
    pub fn nyquist(&self) -> i64 {
        (self.points_per_axis / 2) as i64
    }

    /// Signed frequency for the storage index `j` along one axis:
    /// `j` for `j <= n/2`, `j - n` otherwise, landing in `(-n/2, n/2]`.
    #[inline]
    pub fn signed_freq(&self, j: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage index along one axis for a signed frequency in `(-n/2, n/2]`.
    #[inline]
    pub fn freq_storage_index(&self, k: i64) -> usize {
        let n = self.points_per_axis as i64;
        debug_assert!(k > -n / 2 && k <= n / 2);
        k.rem_euclid(n) as usize
    }

    /// Decode a flat index into per-axis indices (row-major, axis 0 slowest).
    pub fn decode(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.points_per_axis;
        for a in (0..self.dim).rev() {
            out[a] = flat % n;
            flat /= n;
        }
    }

    /// Flat index of the spectrum entry holding frequency `k`.
    pub fn spectrum_index(&self, k: &[i64]) -> usize {
        let n = self.points_per_axis;
        let mut flat = 0;
        for &ki in k {
            flat = flat * n + self.freq_storage_index(ki);
        }
        flat
    }

    /// Frequency vector of a flat spectrum index.
    pub fn frequency_of(&self, flat: usize, out: &mut [i64]) {
        let n = self.points_per_axis;
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = self.signed_freq(rest % n);
            rest /= n;
        }
    }

    /// Spatial coordinates `x = 2π t / n` of a flat grid index.
    pub fn point_of(&self, flat: usize, out: &mut [f64]) {
        let n = self.points_per_axis;
        let mut rest = flat;
        let h = 2.0 * PI / n as f64;
        for a in (0..self.dim).rev() {
            out[a] = (rest % n) as f64 * h;
            rest /= n;
        }
    }

    /// True if `k` fits the lattice, i.e. every component lies in `(-n/2, n/2]`.
    pub fn contains_freq(&self, k: &[i64]) -> bool {
        let ny = self.nyquist();
        k.len() == self.dim && k.iter().all(|&ki| ki > -ny && ki <= ny)
    }

    /// True if any component sits on the Nyquist row `k_i = n/2`.
    pub fn touches_nyquist(&self, k: &[i64]) -> bool {
        let ny = self.nyquist();
        k.contains(&ny)
    }

    /// All nonzero lattice frequencies with `|k| <= band`, Nyquist rows excluded,
    /// sorted by (|k|², lexicographic). Both `k` and `-k` appear.
    pub fn modes_in_ball(&self, band: f64) -> Vec<Vec<i64>> {
        let band2 = band * band;
        let reach = band.floor() as i64;
        let ny = self.nyquist();
        let hi = reach.min(ny - 1);
        let mut modes = Vec::new();
        let mut k = vec![-hi; self.dim];
        'outer: loop {
            let norm2: i64 = k.iter().map(|&ki| ki * ki).sum();
            if norm2 > 0 && (norm2 as f64) <= band2 {
                modes.push(k.clone());
            }
            for a in (0..self.dim).rev() {
                if k[a] < hi {
                    k[a] += 1;
                    continue 'outer;
                }
                k[a] = -hi;
            }
            break;
        }
        modes.sort_by(|a, b| {
            let na: i64 = a.iter().map(|&x| x * x).sum();
            let nb: i64 = b.iter().map(|&x| x * x).sum();
            na.cmp(&nb).then_with(|| a.cmp(b))
        });
        modes
    }

    /// Canonical representatives of the ±k pairs in the ball: the member whose
    /// first nonzero component is positive. Same ordering as `modes_in_ball`.
    pub fn canonical_modes_in_ball(&self, band: f64) -> Vec<Vec<i64>> {
        self.modes_in_ball(band)
            .into_iter()
            .filter(|k| {
                k.iter()
                    .find(|&&ki| ki != 0)
                    .map(|&ki| ki > 0)
                    .unwrap_or(false)
            })
            .collect()
    }
}

/// Squared Euclidean norm of an integer frequency.
#[inline]
pub fn freq_norm2(k: &[i64]) -> f64 {
    k.iter().map(|&ki| (ki * ki) as f64).sum()
}

/// Euclidean norm of an integer frequency.
#[inline]
pub fn freq_norm(k: &[i64]) -> f64 {
    freq_norm2(k).sqrt()
}

/// Canonical representative of the ±k pair (first nonzero component positive).
pub fn canonical_rep(k: &[i64]) -> (Vec<i64>, f64) {
    match k.iter().find(|&&ki| ki != 0) {
        Some(&ki) if ki < 0 => (k.iter().map(|&x| -x).collect(), -1.0),
        _ => (k.to_vec(), 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1, 8).is_err());
        assert!(Grid::new(2, 3).is_err());
        assert!(Grid::new(2, 6).is_ok());
        assert!(Grid::new(2, 7).is_err());
    }

    #[test]
    fn point_count_is_n_to_the_d() {
        let g = Grid::new(3, 8).unwrap();
        assert_eq!(g.len(), 512);
    }

    #[test]
    fn signed_freq_lattice() {
        let g = Grid::new(2, 8).unwrap();
        let freqs: Vec<i64> = (0..8).map(|j| g.signed_freq(j)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        // closed under negation except the Nyquist row 4
        for &k in &freqs {
            if k != 4 {
                assert!(freqs.contains(&-k));
            }
        }
        assert!(!freqs.contains(&-4));
    }

    #[test]
    fn spectrum_index_roundtrip() {
        let g = Grid::new(3, 6).unwrap();
        let mut k = vec![0i64; 3];
        for flat in 0..g.len() {
            g.frequency_of(flat, &mut k);
            assert_eq!(g.spectrum_index(&k), flat);
        }
    }

    #[test]
    fn ball_counts_d2() {
        let g = Grid::new(2, 16).unwrap();
        // |k|^2 in {1,2,4}: (±1,0),(0,±1),(±1,±1),(±2,0),(0,±2) -> 12 modes
        assert_eq!(g.modes_in_ball(2.0).len(), 12);
        assert_eq!(g.canonical_modes_in_ball(2.0).len(), 6);
        // radius 1: 4 modes, 2 canonical
        let canon = g.canonical_modes_in_ball(1.0);
        assert_eq!(canon, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn ball_excludes_nyquist() {
        let g = Grid::new(2, 8).unwrap();
        let modes = g.modes_in_ball(6.0);
        assert!(modes.iter().all(|k| !g.touches_nyquist(k)));
        assert!(modes.iter().all(|k| k.iter().all(|&ki| ki.abs() <= 3)));
    }
}
