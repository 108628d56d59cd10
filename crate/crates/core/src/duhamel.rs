//! Exponential-integrator quadrature for `I(t) = int_0^t e^{(t-s) Delta} N(s) ds`.
//!
//! On each mesh interval the heat factor is integrated exactly per Fourier mode against
//! the linear interpolant of `N`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::TimeMesh;
use crate::spectral::SpectralField;

const PSI_SERIES_CUTOFF: f64 = 0.1;

/// `(1 - e^{-z}(1+z)) / z^2`
pub fn psi(z: f64) -> f64 {
    if z < PSI_SERIES_CUTOFF {
        // sum_k (-z)^k (k+1) / (k+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..=8 {
            term *= -z * (k + 1) as f64 / (k as f64 * (k + 2) as f64);
            sum += term;
        }
        sum
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

/// `(1 - e^{-z}) / z`
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Weights `(e^{-z}, w_a, w_b)` for `I_{i+1} = e^{-z} I_i + w_a N_i + w_b N_{i+1}`, `z = lambda h`.
pub fn etd_weights(lambda: f64, h: f64) -> (f64, f64, f64) {
    let z = lambda * h;
    let p = psi(z);
    ((-z).exp(), h * p, h * (phi1(z) - p))
}

/// Duhamel integral at every node of `mesh`, starting from `I = 0` at the first node.
pub fn duhamel_integral(mesh: &TimeMesh, integrand: &[SpectralField]) -> Result<Vec<SpectralField>> {
    if integrand.len() != mesh.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} integrand samples for {} mesh nodes",
            integrand.len(),
            mesh.len()
        )));
    }
    let lat = integrand[0].lattice();
    if integrand.iter().any(|f| f.lattice() != lat) {
        return Err(Error::ShapeMismatch("integrand samples on different lattices".into()));
    }
    let lambdas: Vec<f64> = (0..lat.len()).map(|i| lat.xi_sq(&lat.freq(i))).collect();
    let real = integrand.iter().all(|f| f.is_real());
    let times = mesh.times();
    let mut out = Vec::with_capacity(mesh.len());
    let mut cur = vec![Complex64::new(0.0, 0.0); lat.len()];
    out.push(SpectralField::from_values(lat, cur.clone(), false)?);
    for i in 0..times.len() - 1 {
        let h = times[i + 1] - times[i];
        let (na, nb) = (integrand[i].values(), integrand[i + 1].values());
        cur.par_iter_mut().enumerate().for_each(|(idx, c)| {
            let (a, b) = (na[idx], nb[idx]);
            if a.re == 0.0 && a.im == 0.0 && b.re == 0.0 && b.im == 0.0 && c.re == 0.0 && c.im == 0.0 {
                return;
            }
            let (d, wa, wb) = etd_weights(lambdas[idx], h);
            *c = d * *c + wa * a + wb * b;
        });
        out.push(SpectralField::from_values(lat, cur.clone(), false)?);
    }
    if real {
        out = out.into_iter().map(SpectralField::real_part).collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyLattice;

    #[test]
    fn weights_match_closed_forms() {
        for &z in &[1e-8, 1e-3, 0.05, 0.0999, 0.1, 0.5, 3.0, 40.0] {
            let direct = (1.0 - (-z as f64).exp() * (1.0 + z)) / (z * z);
            if z >= 0.01 {
                assert!((psi(z) - direct).abs() < 1e-12 * direct.abs().max(1e-3), "z={z}");
            }
            assert!((psi(z) - 0.5).abs() <= 0.5);
        }
        assert!((psi(0.0) - 0.5).abs() < 1e-16);
        assert_eq!(phi1(0.0), 1.0);
        // continuity across the series cutoff
        assert!((psi(0.1 - 1e-12) - psi(0.1)).abs() < 1e-12);
    }

    #[test]
    fn exact_for_linear_integrand() {
        // N(s) = s on mode m: I(t) = (lambda t - 1 + e^{-lambda t}) / lambda^2
        let lat = FrequencyLattice::new(2, 16).unwrap();
        let mesh = TimeMesh::with_origin(0, 3, 4).unwrap();
        let m = [1, 2, 0];
        let idx = lat.index(&m).unwrap();
        let lam = lat.xi_sq(&m);
        let fields: Vec<_> = mesh
            .times()
            .iter()
            .map(|&s| {
                let mut v = vec![Complex64::new(0.0, 0.0); lat.len()];
                v[idx] = Complex64::new(s, 0.0);
                SpectralField::from_values(lat, v, false).unwrap()
            })
            .collect();
        let out = duhamel_integral(&mesh, &fields).unwrap();
        for (f, &t) in out.iter().zip(mesh.times()) {
            let exact = (lam * t - 1.0 + (-lam * t).exp()) / (lam * lam);
            assert!((f.values()[idx].re - exact).abs() <= 1e-12 * exact.abs().max(1e-18));
        }
    }
}
