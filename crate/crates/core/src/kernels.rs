//! The Duhamel operators `A^tau_l = e^{tau Delta} d_l` and
//! `A^tau_{l,l',l''} = e^{tau Delta} d_l d_l' d_l'' (-Delta)^{-1}`, their kernels at `tau = 1`,
//! and the coupling coefficients of atom products against them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::meyer::MeyerBasis;
use crate::spectral::{pointwise_product, FrequencyLattice, SpectralField, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum KernelKind {
    /// Symbol `i xi_l`.
    First { l: usize },
    /// Symbol `-i xi_l xi_l' xi_l'' / |xi|^2`, zero at `xi = 0`.
    Third { l: usize, lp: usize, lpp: usize },
}

impl KernelKind {
    pub fn check(&self, dim: usize) -> Result<()> {
        let ok = match *self {
            Self::First { l } => l < dim,
            Self::Third { l, lp, lpp } => l < dim && lp < dim && lpp < dim,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("kernel indices {self:?} out of range for n = {dim}")))
        }
    }

    /// Symbol without the heat factor.
    pub fn symbol(&self, xi: &[f64; MAX_DIM]) -> Complex64 {
        match *self {
            Self::First { l } => Complex64::new(0.0, xi[l]),
            Self::Third { l, lp, lpp } => {
                let r2: f64 = xi.iter().map(|x| x * x).sum();
                if r2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -xi[l] * xi[lp] * xi[lpp] / r2)
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::First { l } => format!("g_{}", l + 1),
            Self::Third { l, lp, lpp } => format!("g_{}{}{}", l + 1, lp + 1, lpp + 1),
        }
    }
}

/// `sigma(xi) f` with the kernel symbol and no heat factor.
pub fn apply_symbol(f: &SpectralField, kind: KernelKind) -> Result<SpectralField> {
    let lat = f.lattice();
    kind.check(lat.dim())?;
    Ok(f.apply_multiplier(true, |m| kind.symbol(&lat.xi(m))))
}

/// `A^tau f`: the kernel symbol times `exp(-tau |xi|^2)`.
pub fn apply_a(f: &SpectralField, tau: f64, kind: KernelKind) -> Result<SpectralField> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("elapsed time must be finite and >= 0, got {tau}")));
    }
    let lat = f.lattice();
    kind.check(lat.dim())?;
    Ok(f.apply_multiplier(true, |m| kind.symbol(&lat.xi(m)) * (-tau * lat.xi_sq(m)).exp()))
}

/// Samples of the `tau = 1` kernel on a grid of spacing `spacing` and period `size * spacing`.
#[derive(Clone, Debug, Serialize)]
pub struct KernelSamples {
    pub kind: KernelKind,
    pub dim: usize,
    pub size: usize,
    pub spacing: f64,
    /// Row-major, index `p` sits at `y = spacing * p` with `p` taken in `[-size/2, size/2)`.
    pub values: Vec<f64>,
}

impl KernelSamples {
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut y = [0.0; MAX_DIM];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            let i = rem % self.size;
            rem /= self.size;
            let p = if i < self.size / 2 { i as f64 } else { i as f64 - self.size as f64 };
            y[axis] = p * self.spacing;
        }
        y
    }
}

pub const KERNEL_SPACING: f64 = 0.25;

pub fn kernel_samples(kind: KernelKind, lattice: FrequencyLattice) -> Result<KernelSamples> {
    let (n, size) = (lattice.dim(), lattice.size());
    kind.check(n)?;
    let period = size as f64 * KERNEL_SPACING;
    let mut data = vec![Complex64::new(0.0, 0.0); lattice.len()];
    for (i, v) in data.iter_mut().enumerate() {
        let m = lattice.freq(i);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..n {
            xi[a] = 2.0 * std::f64::consts::PI * m[a] as f64 / period;
        }
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        *v = kind.symbol(&xi) * (-r2).exp();
    }
    fft::inverse(&mut data, n, size);
    let norm = period.powi(-(n as i32));
    Ok(KernelSamples { kind, dim: n, size, spacing: KERNEL_SPACING, values: data.iter().map(|v| v.re * norm).collect() })
}

/// `< sum_{j in levels} Phi^eps_{j,k} Phi^eps'_{j,k''}, A^tau Phi^0_{j_t,k'} >`.
///
/// `basis` must be able to hold the products, i.e. live on a lattice at least twice as
/// fine as the one the atoms were chosen for.
#[allow(clippy::too_many_arguments)]
pub fn coupling_coefficient(
    basis: &MeyerBasis,
    tau: f64,
    j_t: u32,
    levels: (u32, u32),
    (eps, k): (u8, &[usize]),
    (eps2, k2): (u8, &[usize]),
    k_scaling: &[usize],
    kind: KernelKind,
) -> Result<Complex64> {
    let lat = basis.lattice();
    let mut total = SpectralField::zeros(lat);
    for j in levels.0..=levels.1 {
        let a = basis.atom(eps, j, k)?.spectrum;
        let b = basis.atom(eps2, j, k2)?.spectrum;
        total = &total + &pointwise_product(&a, &b)?;
    }
    let target = apply_a(&basis.atom(0, j_t, k_scaling)?.spectrum, tau, kind)?;
    Ok(total.inner(&target))
}
