//! Fourier-side fields on the unit torus `[0,1)^n` and the Fourier-multiplier calculus.
//!
//! Frequencies are integer vectors `m` with `-M/2 <= m_i < M/2`, stored in FFT order
//! (index `i` holds `m = i` for `i < M/2` and `m = i - M` otherwise). The physical
//! frequency is `xi = 2 pi m`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

pub const MAX_DIM: usize = 3;
pub type Freq = [i64; MAX_DIM];

const HERMITIAN_TOL: f64 = 1e-12;
const DIV_FREE_TOL: f64 = 1e-10;
const MAX_DERIVATIVE_ORDER: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyLattice {
    dim: usize,
    size: usize,
}

impl FrequencyLattice {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::Domain(format!("dimension must be 2 or 3, got {dim}")));
        }
        if size < 16 || !size.is_power_of_two() {
            return Err(Error::Domain(format!(
                "points per axis must be a power of two >= 16, got {size}"
            )));
        }
        Ok(Self { dim, size })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nyquist(&self) -> i64 {
        (self.size / 2) as i64
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same dimension, twice the points per axis.
    pub fn doubled(&self) -> Self {
        Self { dim: self.dim, size: 2 * self.size }
    }

    pub fn log2_size(&self) -> u32 {
        self.size.trailing_zeros()
    }

    /// Finest level whose atoms fit strictly inside the Nyquist band.
    pub fn max_atom_level(&self) -> u32 {
        self.log2_size() - 2
    }

    /// Per-axis extent of the band used for fields that enter products.
    ///
    /// Fields with `|m_i| <= M/6` lie exactly in the span of the admissible atoms and
    /// their products are alias-free.
    pub fn field_band(&self) -> i64 {
        (self.size / 6) as i64
    }

    /// Largest per-axis extent accepted by [`pointwise_product`].
    pub fn product_band(&self) -> i64 {
        (self.size / 4) as i64 - 1
    }

    pub fn axis_freq(&self, i: usize) -> i64 {
        if i < self.size / 2 {
            i as i64
        } else {
            i as i64 - self.size as i64
        }
    }

    pub fn axis_index(&self, m: i64) -> Option<usize> {
        let h = self.nyquist();
        if m < -h || m >= h {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.size as i64) as usize)
        }
    }

    pub fn freq(&self, flat: usize) -> Freq {
        let mut out = [0i64; MAX_DIM];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = self.axis_freq(rem % self.size);
            rem /= self.size;
        }
        out
    }

    pub fn index(&self, m: &Freq) -> Option<usize> {
        let mut flat = 0usize;
        for &mi in m.iter().take(self.dim) {
            flat = flat * self.size + self.axis_index(mi)?;
        }
        Some(flat)
    }

    pub fn negate(&self, m: &Freq) -> Freq {
        let mut out = [0i64; MAX_DIM];
        for i in 0..self.dim {
            out[i] = -m[i];
        }
        out
    }

    /// `|xi|^2 = (2 pi)^2 |m|^2`.
    pub fn xi_sq(&self, m: &Freq) -> f64 {
        let s: i64 = m.iter().take(self.dim).map(|v| v * v).sum();
        4.0 * PI * PI * s as f64
    }

    pub fn xi(&self, m: &Freq) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for i in 0..self.dim {
            out[i] = 2.0 * PI * m[i] as f64;
        }
        out
    }
}

/// Largest per-axis `|m_i|` in `m`.
pub fn linf(m: &Freq, dim: usize) -> i64 {
    m.iter().take(dim).map(|v| v.abs()).max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: FrequencyLattice,
    values: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(lattice: FrequencyLattice) -> Self {
        Self { lattice, values: vec![Complex64::new(0.0, 0.0); lattice.len()], real: true }
    }

    /// Builds a field from coefficients in FFT order. A `real` flag is checked for
    /// Hermitian symmetry.
    pub fn from_values(lattice: FrequencyLattice, values: Vec<Complex64>, real: bool) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        let f = Self { lattice, values, real };
        if real {
            let defect = f.hermitian_defect();
            let scale = f.max_abs();
            if defect > HERMITIAN_TOL * scale {
                return Err(Error::Precondition(format!(
                    "field flagged real is not Hermitian (defect {defect:.3e})"
                )));
            }
        }
        Ok(f)
    }

    pub fn from_fn(
        lattice: FrequencyLattice,
        real: bool,
        mut f: impl FnMut(&Freq) -> Complex64,
    ) -> Result<Self> {
        let values = (0..lattice.len()).map(|i| f(&lattice.freq(i))).collect();
        Self::from_values(lattice, values, real)
    }

    /// Fourier coefficients of real samples taken at `x = p / M` (row-major).
    pub fn from_physical(lattice: FrequencyLattice, samples: &[f64]) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(Error::ShapeMismatch("sample count does not match lattice".into()));
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::forward(&mut data, lattice.dim(), lattice.size());
        let norm = 1.0 / lattice.len() as f64;
        for v in &mut data {
            *v *= norm;
        }
        let mut f = Self { lattice, values: data, real: true };
        f.symmetrize();
        Ok(f)
    }

    /// Point values at `x = p / M` (row-major).
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        fft::inverse(&mut data, self.lattice.dim(), self.lattice.size());
        data
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn at(&self, m: &Freq) -> Complex64 {
        self.lattice.index(m).map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<f, g> = sum_m f_m conj(g_m)`, the L2 inner product on the unit torus.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.lattice, other.lattice, "inner product across lattices");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum()
    }

    /// Largest `|v(-m) - conj(v(m))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let lat = self.lattice;
        let mut worst: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let m = lat.freq(i);
            let mirror = match lat.index(&lat.negate(&m)) {
                Some(j) => self.values[j],
                // -(-M/2) is not on the lattice; such modes must vanish in a real field
                None => Complex64::new(0.0, 0.0),
            };
            worst = worst.max((mirror - v.conj()).norm());
        }
        worst
    }

    /// Replaces values with their Hermitian part, removing roundoff asymmetry.
    fn symmetrize(&mut self) {
        let lat = self.lattice;
        let old = self.values.clone();
        for (i, v) in self.values.iter_mut().enumerate() {
            let m = lat.freq(i);
            *v = match lat.index(&lat.negate(&m)) {
                Some(j) => 0.5 * (old[i] + old[j].conj()),
                None => Complex64::new(0.0, 0.0),
            };
        }
    }

    /// Largest per-axis `|m_i|` carrying a nonzero coefficient; `-1` for the zero field.
    pub fn band_extent(&self) -> i64 {
        let mut e = -1;
        for (i, v) in self.values.iter().enumerate() {
            if v.re != 0.0 || v.im != 0.0 {
                e = e.max(linf(&self.lattice.freq(i), self.lattice.dim()));
            }
        }
        e
    }

    /// Sharp Fourier cutoff to `|m_i| <= band`.
    pub fn truncate(&self, band: i64) -> Self {
        let lat = self.lattice;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| if linf(&lat.freq(i), lat.dim()) <= band { *v } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self { lattice: lat, values, real: self.real }
    }

    /// Copies the coefficients onto another lattice of the same dimension.
    pub fn resample(&self, target: FrequencyLattice) -> Result<Self> {
        if target.dim() != self.lattice.dim() {
            return Err(Error::ShapeMismatch("resample across dimensions".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        for (i, v) in self.values.iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let m = self.lattice.freq(i);
            let j = target.index(&m).ok_or_else(|| {
                Error::Precondition("field band does not fit the target lattice".into())
            })?;
            out[j] = *v;
        }
        Ok(Self { lattice: target, values: out, real: self.real })
    }

    /// Moves the coefficient at `m` to `factor * m`, which realizes `x -> factor * x`.
    pub fn dilate(&self, factor: i64) -> Result<Self> {
        if factor < 1 {
            return Err(Error::Domain("dilation factor must be a positive integer".into()));
        }
        let lat = self.lattice;
        let mut out = vec![Complex64::new(0.0, 0.0); lat.len()];
        for (i, v) in self.values.iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let mut m = lat.freq(i);
            for mi in m.iter_mut().take(lat.dim()) {
                *mi *= factor;
            }
            let j = lat.index(&m).ok_or_else(|| {
                Error::Precondition("dilated band exceeds the lattice".into())
            })?;
            out[j] = *v;
        }
        Ok(Self { lattice: lat, values: out, real: self.real })
    }

    /// Coefficientwise multiplication by `symbol(m)`.
    pub fn apply_multiplier(&self, preserves_real: bool, symbol: impl Fn(&Freq) -> Complex64) -> Self {
        let lat = self.lattice;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| if v.re == 0.0 && v.im == 0.0 { *v } else { v * symbol(&lat.freq(i)) })
            .collect();
        Self { lattice: lat, values, real: self.real && preserves_real }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { lattice: self.lattice, values: self.values.iter().map(|v| v * a).collect(), real: self.real }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.lattice, other.lattice, "axpy across lattices");
        Self {
            lattice: self.lattice,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
            real: self.real && other.real,
        }
    }

    /// Spectrum of the real part of the physical field, flagged real.
    pub fn real_part(mut self) -> Self {
        if !self.real {
            self.symmetrize();
            self.real = true;
        }
        self
    }

    /// Sets the real flag; switching it on checks and then enforces Hermitian symmetry.
    pub fn with_real_flag(mut self, real: bool) -> Result<Self> {
        if real && !self.real {
            let mut f = Self::from_values(self.lattice, self.values, true)?;
            f.symmetrize();
            return Ok(f);
        }
        self.real = real;
        Ok(self)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
    divergence_free: bool,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::ShapeMismatch("vector field needs components".into()))?;
        let lat = first.lattice();
        if components.len() != lat.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} components, got {}",
                lat.dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.lattice() != lat) {
            return Err(Error::ShapeMismatch("components live on different lattices".into()));
        }
        Ok(Self { components, divergence_free: false })
    }

    pub fn zeros(lattice: FrequencyLattice) -> Self {
        Self {
            components: (0..lattice.dim()).map(|_| SpectralField::zeros(lattice)).collect(),
            divergence_free: true,
        }
    }

    /// Flags the field divergence-free after checking the relative defect.
    pub fn into_divergence_free(mut self) -> Result<Self> {
        let d = self.divergence_defect();
        if d > DIV_FREE_TOL {
            return Err(Error::Precondition(format!("divergence defect {d:.3e} exceeds {DIV_FREE_TOL:e}")));
        }
        self.divergence_free = true;
        Ok(self)
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.components[0].lattice()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, l: usize) -> &SpectralField {
        &self.components[l]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub fn is_real(&self) -> bool {
        self.components.iter().all(|c| c.is_real())
    }

    /// `max_m |sum_l i m_l v_l(m)| / max_m |v(m)|`, with `|v(m)|` the Euclidean length.
    pub fn divergence_defect(&self) -> f64 {
        let lat = self.lattice();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..lat.len() {
            let m = lat.freq(i);
            let mut div = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for (l, c) in self.components.iter().enumerate() {
                let v = c.values()[i];
                div += Complex64::new(0.0, m[l] as f64) * v;
                mag += v.norm_sqr();
            }
            num = num.max(div.norm());
            den = den.max(mag.sqrt());
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn norm_l2(&self) -> f64 {
        self.components.iter().map(|c| c.norm_l2().powi(2)).sum::<f64>().sqrt()
    }

    pub fn band_extent(&self) -> i64 {
        self.components.iter().map(|c| c.band_extent()).max().unwrap_or(-1)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Componentwise map; the divergence-free flag is kept only when `keeps_div_free`.
    pub fn map(&self, keeps_div_free: bool, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
            divergence_free: self.divergence_free && keeps_div_free,
        }
    }

    pub fn try_map(
        &self,
        keeps_div_free: bool,
        f: impl Fn(&SpectralField) -> Result<SpectralField>,
    ) -> Result<Self> {
        Ok(Self {
            components: self.components.iter().map(f).collect::<Result<_>>()?,
            divergence_free: self.divergence_free && keeps_div_free,
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(true, |c| c.scale(a))
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        Self {
            components: self.components.iter().zip(&other.components).map(|(x, y)| x.axpy(a, y)).collect(),
            divergence_free: self.divergence_free && other.divergence_free,
        }
    }
}

/// `e^{t Delta} f`: multiplies the coefficient at `m` by `exp(-t |2 pi m|^2)`.
pub fn heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat semigroup time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let lat = f.lattice();
    let mut out = f.apply_multiplier(true, |m| Complex64::new((-t * lat.xi_sq(m)).exp(), 0.0));
    // subnormal coefficients carry no relative precision and break leakage checks
    for v in &mut out.values {
        if v.norm() < f64::MIN_POSITIVE {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

pub fn heat_semigroup_vector(v: &VectorField, t: f64) -> Result<VectorField> {
    v.try_map(true, |c| heat_semigroup(c, t))
}

/// Leray projection with symbol `delta_{l,l'} - m_l m_l' / |m|^2`; the mean passes through.
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    let lat = v.lattice();
    let n = lat.dim();
    let mut out: Vec<Vec<Complex64>> = v.components().iter().map(|c| c.values().to_vec()).collect();
    for i in 0..lat.len() {
        let m = lat.freq(i);
        let m2: i64 = m.iter().take(n).map(|x| x * x).sum();
        if m2 == 0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for l in 0..n {
            dot += m[l] as f64 * v.component(l).values()[i];
        }
        let dot = dot / m2 as f64;
        for l in 0..n {
            out[l][i] -= m[l] as f64 * dot;
        }
    }
    let comps = out
        .into_iter()
        .zip(v.components())
        .map(|(vals, c)| SpectralField { lattice: lat, values: vals, real: c.is_real() })
        .collect();
    let mut res = VectorField::new(comps)?;
    res.divergence_free = true;
    Ok(res)
}

/// `(i xi)^alpha f` with `|alpha| <= 5`.
pub fn derivative(f: &SpectralField, alpha: &[u32]) -> Result<SpectralField> {
    let lat = f.lattice();
    if alpha.len() != lat.dim() {
        return Err(Error::ShapeMismatch("multi-index length differs from dimension".into()));
    }
    let order: u32 = alpha.iter().sum();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::Domain(format!("derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")));
    }
    if order == 0 {
        return Ok(f.clone());
    }
    Ok(f.apply_multiplier(true, |m| {
        let xi = lat.xi(m);
        let mut s = Complex64::new(1.0, 0.0);
        for (l, &a) in alpha.iter().enumerate() {
            s *= Complex64::new(0.0, xi[l]).powu(a);
        }
        s
    }))
}

pub fn gradient(f: &SpectralField) -> Result<VectorField> {
    let n = f.lattice().dim();
    let comps = (0..n)
        .map(|l| {
            let mut alpha = vec![0; n];
            alpha[l] = 1;
            derivative(f, &alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

pub fn divergence(v: &VectorField) -> Result<SpectralField> {
    let n = v.dim();
    let mut acc = SpectralField::zeros(v.lattice());
    for l in 0..n {
        let mut alpha = vec![0; n];
        alpha[l] = 1;
        acc = &acc + &derivative(v.component(l), &alpha)?;
    }
    Ok(acc)
}

/// Exact spectral coefficients of `f * g`.
///
/// Both inputs must satisfy `|m_i| < M/4`. The product is formed on the smallest
/// power-of-two grid exceeding twice the output band, which is alias-free.
pub fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    let lat = f.lattice();
    if g.lattice() != lat {
        return Err(Error::ShapeMismatch("product across lattices".into()));
    }
    let (ef, eg) = (f.band_extent(), g.band_extent());
    let limit = lat.product_band();
    for e in [ef, eg] {
        if e > limit {
            return Err(Error::Aliasing { extent: e, limit: limit + 1 });
        }
    }
    if ef < 0 || eg < 0 {
        return Ok(SpectralField::zeros(lat));
    }
    let out_band = ef + eg;
    let grid = (2 * out_band as usize + 1).next_power_of_two().max(2);
    let n = lat.dim();
    let grid_len = grid.pow(n as u32);
    let lift = |h: &SpectralField| {
        let mut data = vec![Complex64::new(0.0, 0.0); grid_len];
        for (i, v) in h.values().iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            data[grid_flat(&lat.freq(i), n, grid)] = *v;
        }
        fft::inverse(&mut data, n, grid);
        data
    };
    let mut pf = lift(f);
    let pg = lift(g);
    for (a, b) in pf.iter_mut().zip(&pg) {
        *a *= b;
    }
    fft::forward(&mut pf, n, grid);
    let norm = 1.0 / grid_len as f64;
    let mut values = vec![Complex64::new(0.0, 0.0); lat.len()];
    for (i, v) in values.iter_mut().enumerate() {
        let m = lat.freq(i);
        if linf(&m, n) <= out_band {
            *v = pf[grid_flat(&m, n, grid)] * norm;
        }
    }
    let mut out = SpectralField { lattice: lat, values, real: f.is_real() && g.is_real() };
    if out.real {
        out.symmetrize();
    }
    Ok(out)
}

fn grid_flat(m: &Freq, dim: usize, grid: usize) -> usize {
    let g = grid as i64;
    let mut flat = 0usize;
    for &mi in m.iter().take(dim) {
        flat = flat * grid + mi.rem_euclid(g) as usize;
    }
    flat
}
