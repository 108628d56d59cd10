//! Periodized tensor Meyer atoms and exact analysis/synthesis on a frequency lattice.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::coefficients::{band_count, WaveletCoefficients};
use super::window::MeyerWindow;
use crate::error::{Error, Result};
use crate::fft;
use crate::spectral::{Freq, FrequencyLattice, SpectralField, MAX_DIM};

const LEAKAGE_TOL: f64 = 1e-8;

/// Nonzero samples of `2^{-j/2} Psi^eps(2 pi m / 2^j)` along one axis.
#[derive(Clone, Debug)]
struct AxisFactor {
    /// `(axis index, frequency, value)`
    support: Vec<(usize, i64, Complex64)>,
}

#[derive(Clone, Debug)]
pub struct WaveletAtom {
    pub eps: u8,
    pub level: u32,
    pub k: Vec<usize>,
    pub spectrum: SpectralField,
}

/// Share of the energy of `f` missing from `c`, computed after rescaling so that tiny
/// fields do not underflow.
pub fn relative_leakage(f: &SpectralField, c: &WaveletCoefficients) -> f64 {
    let s = f.max_abs();
    if s == 0.0 {
        return 0.0;
    }
    let total: f64 = f.values().iter().map(|v| (v / s).norm_sqr()).sum();
    let mut energy = 0.0;
    for (_, _, _, v) in c.entries() {
        energy += (v / s).norm_sqr();
    }
    ((total - energy) / total).max(0.0)
}

/// The Meyer system sampled on one lattice, with per-level axis factors cached.
#[derive(Clone, Debug)]
pub struct MeyerBasis {
    lattice: FrequencyLattice,
    window: MeyerWindow,
    /// `factors[j][eps_i]`
    factors: Vec<[AxisFactor; 2]>,
}

impl MeyerBasis {
    pub fn new(lattice: FrequencyLattice, window: MeyerWindow) -> Self {
        let factors = (0..=lattice.max_atom_level())
            .map(|j| [axis_factor(&lattice, &window, j, 0), axis_factor(&lattice, &window, j, 1)])
            .collect();
        Self { lattice, window, factors }
    }

    pub fn with_default_window(lattice: FrequencyLattice) -> Self {
        Self::new(lattice, MeyerWindow::default())
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn window(&self) -> &MeyerWindow {
        &self.window
    }

    pub fn max_level(&self) -> u32 {
        self.lattice.max_atom_level()
    }

    pub fn check_level(&self, j: i64) -> Result<u32> {
        if j < 0 || j > self.max_level() as i64 {
            return Err(Error::InadmissibleLevel { requested: j, max: self.max_level() });
        }
        Ok(j as u32)
    }

    /// Spectrum of the periodized atom `Phi^eps_{j,k}`.
    pub fn atom(&self, eps: u8, j: u32, k: &[usize]) -> Result<WaveletAtom> {
        self.check_level(j as i64)?;
        let n = self.lattice.dim();
        if k.len() != n || eps > band_count(n) {
            return Err(Error::Domain("atom index does not match the lattice dimension".into()));
        }
        let side = 1usize << j;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); side.pow(n as u32)];
        let flat = k.iter().fold(0, |acc, &ki| acc * side + ki % side);
        coeffs[flat] = Complex64::new(1.0, 0.0);
        let mut values = vec![Complex64::new(0.0, 0.0); self.lattice.len()];
        self.synthesize_band_into(&coeffs, eps, j, &mut values);
        let spectrum = SpectralField::from_values(self.lattice, values, true)?;
        Ok(WaveletAtom { eps, level: j, k: k.iter().map(|v| v % side).collect(), spectrum })
    }

    /// Tensor window `prod_i 2^{-j/2} Psi^{eps_i}(2 pi m_i / 2^j)` at one frequency.
    pub fn band_window(&self, eps: u8, j: u32, m: &Freq) -> Complex64 {
        let scale = (1u64 << j) as f64;
        let mut w = Complex64::new(scale.powf(-0.5 * self.lattice.dim() as f64), 0.0);
        for i in 0..self.lattice.dim() {
            w *= self.window.profile((eps >> i) & 1, 2.0 * PI * m[i] as f64 / scale);
        }
        w
    }

    /// Calls `f(lattice flat index, frequency, window value)` over the band support.
    fn for_each_support(&self, eps: u8, j: u32, mut f: impl FnMut(usize, &Freq, Complex64)) {
        let n = self.lattice.dim();
        let size = self.lattice.size();
        let lists: Vec<&[(usize, i64, Complex64)]> =
            (0..n).map(|i| self.factors[j as usize][((eps >> i) & 1) as usize].support.as_slice()).collect();
        if lists.iter().any(|l| l.is_empty()) {
            return;
        }
        let mut pos = [0usize; MAX_DIM];
        loop {
            let mut flat = 0usize;
            let mut m = [0i64; MAX_DIM];
            let mut w = Complex64::new(1.0, 0.0);
            for i in 0..n {
                let (idx, mi, v) = lists[i][pos[i]];
                flat = flat * size + idx;
                m[i] = mi;
                w *= v;
            }
            f(flat, &m, w);
            let mut axis = n;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                pos[axis] += 1;
                if pos[axis] < lists[axis].len() {
                    break;
                }
                pos[axis] = 0;
            }
        }
    }

    /// `<f, Phi^eps_{j,k}>` for all `k`, without any completeness check.
    pub fn band_coefficients(&self, f: &SpectralField, eps: u8, j: u32) -> Vec<Complex64> {
        let n = self.lattice.dim();
        let side = 1usize << j;
        let mask = side as i64 - 1;
        let mut g = vec![Complex64::new(0.0, 0.0); side.pow(n as u32)];
        let vals = f.values();
        self.for_each_support(eps, j, |flat, m, w| {
            let v = vals[flat];
            if v.re == 0.0 && v.im == 0.0 {
                return;
            }
            let r = (0..n).fold(0usize, |acc, i| acc * side + (m[i] & mask) as usize);
            g[r] += v * w.conj();
        });
        fft::inverse(&mut g, n, side);
        g
    }

    /// Adds `sum_k a_k Phi^eps_{j,k}` into `out` (lattice values).
    pub fn synthesize_band_into(&self, a: &[Complex64], eps: u8, j: u32, out: &mut [Complex64]) {
        let n = self.lattice.dim();
        let side = 1usize << j;
        let mask = side as i64 - 1;
        if a.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
            return;
        }
        let mut big_a = a.to_vec();
        fft::forward(&mut big_a, n, side);
        self.for_each_support(eps, j, |flat, m, w| {
            let r = (0..n).fold(0usize, |acc, i| acc * side + (m[i] & mask) as usize);
            out[flat] += w * big_a[r];
        });
    }

    /// Coefficients over levels `j_min..=j_max` without the completeness check.
    pub fn analyze_unchecked(&self, f: &SpectralField, j_min: u32, j_max: u32) -> Result<WaveletCoefficients> {
        if f.lattice() != self.lattice {
            return Err(Error::ShapeMismatch("field and basis live on different lattices".into()));
        }
        self.check_level(j_min as i64)?;
        self.check_level(j_max as i64)?;
        if j_min > j_max {
            return Err(Error::Domain(format!("empty level range {j_min}..={j_max}")));
        }
        let n = self.lattice.dim();
        let nb = band_count(n);
        let mut jobs: Vec<(u8, u32)> = vec![(0, j_min)];
        for j in j_min..=j_max {
            for e in 1..=nb {
                jobs.push((e, j));
            }
        }
        let results: Vec<Vec<Complex64>> =
            jobs.par_iter().map(|&(e, j)| self.band_coefficients(f, e, j)).collect();
        let mut c = WaveletCoefficients::zeros(n, j_min, j_max);
        for ((e, j), vals) in jobs.into_iter().zip(results) {
            c.band_mut(e, j)?.copy_from_slice(&vals);
        }
        Ok(c)
    }

    /// `a^eps_{j,k} = <f, Phi^eps_{j,k}>` over the basis with scaling band at `j_min`.
    ///
    /// Fails with [`Error::Leakage`] when the coefficients miss more than `1e-8` of the
    /// field's energy.
    pub fn analyze(&self, f: &SpectralField, j_min: u32, j_max: u32) -> Result<WaveletCoefficients> {
        let c = self.analyze_unchecked(f, j_min, j_max)?;
        let missing = relative_leakage(f, &c);
        if missing > LEAKAGE_TOL {
            return Err(Error::Leakage { relative: missing });
        }
        Ok(c)
    }

    pub fn synthesize(&self, c: &WaveletCoefficients) -> Result<SpectralField> {
        if c.dim() != self.lattice.dim() {
            return Err(Error::ShapeMismatch("coefficient dimension differs from lattice".into()));
        }
        self.check_level(c.j_max() as i64)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.lattice.len()];
        self.synthesize_band_into(c.scaling(), 0, c.j_min(), &mut out);
        for j in c.j_min()..=c.j_max() {
            for e in 1..=band_count(c.dim()) {
                self.synthesize_band_into(c.detail(j, e), e, j, &mut out);
            }
        }
        let tol = 1e-12 * c.max_abs();
        let real = c.entries().all(|(_, _, _, v)| v.im.abs() <= tol);
        let f = SpectralField::from_values(self.lattice, out, false)?;
        if real {
            f.with_real_flag(true)
        } else {
            Ok(f)
        }
    }

    /// `sum_levels |window|^2` at `m`: scaling band at `j_min`, detail bands through `j_max`,
    /// without the `2^{-nj}` normalization.
    pub fn window_energy(&self, m: &Freq, j_min: u32, j_max: u32) -> f64 {
        let n = self.lattice.dim();
        let unnorm = |e: u8, j: u32| self.band_window(e, j, m).norm_sqr() * ((1u64 << j) as f64).powi(n as i32);
        let mut s = unnorm(0, j_min);
        for j in j_min..=j_max {
            for e in 1..=band_count(n) {
                s += unnorm(e, j);
            }
        }
        s
    }
}

fn axis_factor(lat: &FrequencyLattice, w: &MeyerWindow, j: u32, eps: u8) -> AxisFactor {
    let scale = (1u64 << j) as f64;
    let norm = scale.powf(-0.5);
    let support = (0..lat.size())
        .filter_map(|i| {
            let m = lat.axis_freq(i);
            let v = w.profile(eps, 2.0 * PI * m as f64 / scale) * norm;
            (v.re != 0.0 || v.im != 0.0).then_some((i, m, v))
        })
        .collect();
    AxisFactor { support }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::linf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(m: usize) -> MeyerBasis {
        MeyerBasis::with_default_window(FrequencyLattice::new(2, m).unwrap())
    }

    #[test]
    fn atoms_orthonormal_and_supported() {
        let b = basis(32);
        let a = b.atom(1, 2, &[1, 3]).unwrap();
        assert!((a.spectrum.norm_l2() - 1.0).abs() < 1e-12);
        let c = b.atom(1, 2, &[2, 3]).unwrap();
        assert!(a.spectrum.inner(&c.spectrum).norm() < 1e-12);
        let lat = b.lattice();
        for (i, v) in a.spectrum.values().iter().enumerate() {
            let m = lat.freq(i);
            let xi1 = 2.0 * PI * m[0] as f64;
            if xi1.abs() < (2.0 * PI / 3.0) * 4.0 {
                assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
            if (2.0 * PI * m[1] as f64).abs() > (4.0 * PI / 3.0) * 4.0 {
                assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
        }
        assert!(matches!(b.atom(1, 4, &[0, 0]), Err(Error::InadmissibleLevel { max: 3, .. })));
    }

    #[test]
    fn analyze_atom_is_unit_vector() {
        let b = basis(32);
        let a = b.atom(3, 2, &[0, 1]).unwrap();
        let c = b.analyze(&a.spectrum, 0, 3).unwrap();
        for (e, j, k, v) in c.entries() {
            let hit = e == 3 && j == 2 && k == 1;
            let target = if hit { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(target, 0.0)).norm() < 1e-12, "({e},{j},{k}) {v}");
        }
        let zero = b.analyze(&SpectralField::zeros(b.lattice()), 0, 3).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let back = b.synthesize(&c).unwrap();
        assert!((&back - &a.spectrum).norm_l2() < 1e-12);
    }

    #[test]
    fn round_trip_and_leakage() {
        let b = basis(64);
        let lat = b.lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let band = lat.field_band();
        let f = SpectralField::from_fn(lat, false, |m| {
            if linf(m, 2) <= band {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        for j_min in 0..=b.max_level() {
            let c = b.analyze(&f, j_min, b.max_level()).unwrap();
            assert!(((c.energy() - f.norm_l2().powi(2)) / f.norm_l2().powi(2)).abs() < 1e-12);
            let g = b.synthesize(&c).unwrap();
            assert!((&g - &f).norm_l2() / f.norm_l2() < 1e-12);
        }
        let wide = SpectralField::from_fn(lat, false, |m| {
            if m[0] == 30 && m[1] == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
        .unwrap();
        assert!(matches!(b.analyze(&wide, 0, b.max_level()), Err(Error::Leakage { .. })));
    }

    #[test]
    fn partition_of_unity() {
        let b = basis(64);
        let lat = b.lattice();
        for i in 0..lat.len() {
            let m = lat.freq(i);
            if linf(&m, 2) <= lat.field_band() {
                for j_min in [0, 2] {
                    assert!((b.window_energy(&m, j_min, b.max_level()) - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
