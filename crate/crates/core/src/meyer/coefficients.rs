use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detail band selector: bit `i` of `eps` set means the detail profile on axis `i`.
pub fn band_count(dim: usize) -> u8 {
    (1u8 << dim) - 1
}

pub fn eps_bits(eps: u8, dim: usize) -> Vec<u8> {
    (0..dim).map(|i| (eps >> i) & 1).collect()
}

/// Coefficients `a^eps_{j,k}` over levels `j_min..=j_max`: the scaling band at `j_min`
/// and every detail band at each level. Arrays are dense, `2^{jn}` entries per band,
/// translations in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletCoefficients {
    dim: usize,
    j_min: u32,
    j_max: u32,
    scaling: Vec<Complex64>,
    /// `detail[j - j_min][eps - 1]`
    detail: Vec<Vec<Vec<Complex64>>>,
}

impl WaveletCoefficients {
    pub fn zeros(dim: usize, j_min: u32, j_max: u32) -> Self {
        assert!(j_min <= j_max, "empty level range");
        let nb = band_count(dim) as usize;
        let detail = (j_min..=j_max)
            .map(|j| vec![vec![Complex64::new(0.0, 0.0); 1usize << (j as usize * dim)]; nb])
            .collect();
        Self {
            dim,
            j_min,
            j_max,
            scaling: vec![Complex64::new(0.0, 0.0); 1usize << (j_min as usize * dim)],
            detail,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn j_min(&self) -> u32 {
        self.j_min
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn scaling(&self) -> &[Complex64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [Complex64] {
        &mut self.scaling
    }

    pub fn detail(&self, j: u32, eps: u8) -> &[Complex64] {
        &self.detail[(j - self.j_min) as usize][eps as usize - 1]
    }

    pub fn detail_mut(&mut self, j: u32, eps: u8) -> &mut [Complex64] {
        &mut self.detail[(j - self.j_min) as usize][eps as usize - 1]
    }

    /// Band `eps` at level `j`; `eps = 0` names the scaling band and needs `j = j_min`.
    pub fn band(&self, eps: u8, j: u32) -> Result<&[Complex64]> {
        self.check(eps, j)?;
        Ok(if eps == 0 { &self.scaling } else { self.detail(j, eps) })
    }

    pub fn band_mut(&mut self, eps: u8, j: u32) -> Result<&mut [Complex64]> {
        self.check(eps, j)?;
        Ok(if eps == 0 { &mut self.scaling } else { self.detail_mut(j, eps) })
    }

    fn check(&self, eps: u8, j: u32) -> Result<()> {
        if j < self.j_min || j > self.j_max || eps > band_count(self.dim) || (eps == 0 && j != self.j_min) {
            return Err(Error::Domain(format!(
                "band (eps={eps}, j={j}) outside levels {}..={}",
                self.j_min, self.j_max
            )));
        }
        Ok(())
    }

    pub fn flat_k(&self, j: u32, k: &[usize]) -> usize {
        let side = 1usize << j;
        k.iter().fold(0, |acc, &ki| acc * side + ki % side)
    }

    pub fn unflatten_k(&self, j: u32, flat: usize) -> Vec<usize> {
        let side = 1usize << j;
        let mut k = vec![0; self.dim];
        let mut rem = flat;
        for i in (0..self.dim).rev() {
            k[i] = rem % side;
            rem /= side;
        }
        k
    }

    /// All entries as `(eps, j, flat k, value)`, scaling band first.
    pub fn entries(&self) -> impl Iterator<Item = (u8, u32, usize, Complex64)> + '_ {
        let scaling = self.scaling.iter().enumerate().map(move |(k, v)| (0u8, self.j_min, k, *v));
        let detail = self.detail.iter().enumerate().flat_map(move |(dj, bands)| {
            bands.iter().enumerate().flat_map(move |(e, vals)| {
                vals.iter()
                    .enumerate()
                    .map(move |(k, v)| ((e + 1) as u8, self.j_min + dj as u32, k, *v))
            })
        });
        scaling.chain(detail)
    }

    pub fn energy(&self) -> f64 {
        self.entries().map(|(_, _, _, v)| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.for_each_mut(|v| *v *= a);
        out
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut Complex64)) {
        self.scaling.iter_mut().for_each(&mut f);
        for bands in &mut self.detail {
            for vals in bands {
                vals.iter_mut().for_each(&mut f);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.dim, self.j_min, self.j_max) != (other.dim, other.j_min, other.j_max) {
            return Err(Error::ShapeMismatch("coefficient level ranges differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.scaling.iter_mut().zip(&other.scaling) {
            *a += b;
        }
        for (ba, bb) in out.detail.iter_mut().zip(&other.detail) {
            for (va, vb) in ba.iter_mut().zip(bb) {
                for (a, b) in va.iter_mut().zip(vb) {
                    *a += b;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let c = WaveletCoefficients::zeros(2, 1, 3);
        assert_eq!(c.scaling().len(), 4);
        assert_eq!(c.detail(3, 3).len(), 64);
        assert_eq!(c.entries().count(), 4 + 3 * (4 + 16 + 64));
        assert!(c.band(0, 2).is_err());
        assert_eq!(c.unflatten_k(2, c.flat_k(2, &[3, 1])), vec![3, 1]);
        assert_eq!(eps_bits(2, 2), vec![0, 1]);
    }
}
