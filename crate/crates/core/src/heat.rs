//! Heat trajectories `u(t) = e^{t Delta} a` and experiments on their wavelet coefficients.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::DecaySample;
use crate::fft;
use crate::mesh::TimeMesh;
use crate::meyer::{analyze_parameter, band_count, MeyerBasis, ParameterIndexSet, WaveletCoefficients};
use crate::norms::{critical_besov, ypm_norm, NormOptions, Trajectory};
use crate::spectral::{heat_semigroup, leray_project, SpectralField, VectorField};

/// Real zero-mean field with Gaussian detail coefficients on levels `0..=top`.
///
/// Level `j` amplitudes carry the factor `2^{-jn/p}`, which gives every level a
/// comparable share of the critical Besov norm.
pub fn random_field(basis: &MeyerBasis, top: u32, p: f64, seed: u64) -> Result<SpectralField> {
    basis.check_level(top as i64)?;
    let n = basis.lattice().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = WaveletCoefficients::zeros(n, 0, top);
    for j in 0..=top {
        let amp = 2f64.powf(-(j as f64) * n as f64 / p);
        for e in 1..=band_count(n) {
            for v in c.detail_mut(j, e) {
                let x: f64 = StandardNormal.sample(&mut rng);
                *v = Complex64::new(amp * x, 0.0);
            }
        }
    }
    basis.synthesize(&c)?.with_real_flag(true)
}

/// [`random_field`] rescaled to critical Besov norm `norm`.
pub fn random_field_normalized(basis: &MeyerBasis, top: u32, p: f64, norm: f64, seed: u64) -> Result<SpectralField> {
    let f = random_field(basis, top, p, seed)?;
    let b = critical_besov(basis, std::slice::from_ref(&f), p)?;
    Ok(f.scale(norm / b))
}

/// Divergence-free vector field from Leray-projected [`random_field`] components.
pub fn random_vector_field(basis: &MeyerBasis, top: u32, p: f64, norm: f64, seed: u64) -> Result<VectorField> {
    let n = basis.lattice().dim();
    let comps = (0..n)
        .map(|l| random_field(basis, top, p, seed.wrapping_mul(31).wrapping_add(l as u64)))
        .collect::<Result<Vec<_>>>()?;
    let v = leray_project(&VectorField::new(comps)?)?;
    let b = critical_besov(basis, v.components(), p)?;
    if b == 0.0 {
        return Ok(v);
    }
    Ok(v.scale(norm / b))
}

#[derive(Clone, Debug)]
pub struct HeatTrajectory {
    pub initial: Vec<SpectralField>,
    pub trajectory: Trajectory,
}

impl HeatTrajectory {
    /// Largest relative deviation of a cached sample from a fresh semigroup evaluation.
    pub fn recheck(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, &t) in self.trajectory.times().iter().enumerate() {
            for (a, f) in self.initial.iter().zip(self.trajectory.state(i)) {
                let fresh = heat_semigroup(a, t)?;
                let scale = fresh.norm_l2().max(f64::MIN_POSITIVE);
                worst = worst.max((&fresh - f).norm_l2() / scale);
            }
        }
        Ok(worst)
    }
}

/// Samples `e^{t Delta} a` on the shells `lo..=hi` (no origin node) or on `mesh` if given.
pub fn make_heat_trajectory(a: &[SpectralField], mesh: TimeMesh) -> Result<HeatTrajectory> {
    if a.is_empty() {
        return Err(Error::ShapeMismatch("no components".into()));
    }
    let states = mesh
        .times()
        .par_iter()
        .map(|&t| a.iter().map(|f| heat_semigroup(f, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(HeatTrajectory { initial: a.to_vec(), trajectory: Trajectory::new(mesh, states)? })
}

pub fn heat_trajectory_on_shells(a: &[SpectralField], basis: &MeyerBasis, shells: (u32, u32), per_shell: usize) -> Result<HeatTrajectory> {
    if shells.1 > basis.max_level() {
        return Err(Error::InadmissibleLevel { requested: shells.1 as i64, max: basis.max_level() });
    }
    make_heat_trajectory(a, TimeMesh::shells(shells.0, shells.1, per_shell)?)
}

/// `<Phi'_{j',k'}, e^{t Delta} Phi_{j,k}>` as a function of the offset
/// `2^{J-j} k - 2^{J-j'} k' mod 2^J`, `J = max(j, j')`. `None` when the spectra are disjoint.
pub fn heat_coupling(basis: &MeyerBasis, t: f64, (e, j): (u8, u32), (ep, jp): (u8, u32)) -> Option<Vec<Complex64>> {
    let lat = basis.lattice();
    let n = lat.dim();
    let top = j.max(jp);
    let side = 1usize << top;
    let mask = side as i64 - 1;
    let mut g = vec![Complex64::new(0.0, 0.0); side.pow(n as u32)];
    let mut any = false;
    for i in 0..lat.len() {
        let m = lat.freq(i);
        let w = basis.band_window(e, j, &m);
        if w.re == 0.0 && w.im == 0.0 {
            continue;
        }
        let wp = basis.band_window(ep, jp, &m);
        if wp.re == 0.0 && wp.im == 0.0 {
            continue;
        }
        any = true;
        let r = (0..n).fold(0usize, |acc, a| acc * side + (m[a] & mask) as usize);
        g[r] += wp * w.conj() * (-t * lat.xi_sq(&m)).exp();
    }
    if !any {
        return None;
    }
    fft::inverse(&mut g, n, side);
    Some(g)
}

/// Largest deviation between the coefficients of `e^{t Delta} a` over the time-`t` index
/// set computed directly and computed by propagating the static coefficients of `a`
/// through pairwise atom couplings.
pub fn verify_transfer(basis: &MeyerBasis, a: &SpectralField, t: f64) -> Result<f64> {
    let lat = basis.lattice();
    let n = lat.dim();
    let jm = basis.max_level();
    let direct = analyze_parameter(basis, &heat_semigroup(a, t)?, t)?;
    let stat = basis.analyze(a, 0, jm)?;
    let index = ParameterIndexSet::new(t, jm)?;
    let mut targets: Vec<(u8, u32)> = vec![(0, index.j_t())];
    let mut sources: Vec<(u8, u32)> = vec![(0, 0)];
    for j in 0..=jm {
        for e in 1..=band_count(n) {
            sources.push((e, j));
            if j >= index.j_t() {
                targets.push((e, j));
            }
        }
    }
    let worst = targets
        .par_iter()
        .map(|&(e, j)| -> Result<f64> {
            let side_t = 1usize << j;
            let mut out = vec![Complex64::new(0.0, 0.0); side_t.pow(n as u32)];
            for &(ep, jp) in &sources {
                let src = stat.band(ep, jp)?;
                if src.iter().all(|v| v.norm() == 0.0) {
                    continue;
                }
                let Some(kern) = heat_coupling(basis, t, (e, j), (ep, jp)) else { continue };
                let top = j.max(jp);
                let side = 1usize << top;
                let side_s = 1usize << jp;
                for (kt, o) in out.iter_mut().enumerate() {
                    let kv = stat_unflatten(kt, side_t, n);
                    for (ks, s) in src.iter().enumerate() {
                        if s.re == 0.0 && s.im == 0.0 {
                            continue;
                        }
                        let kpv = stat_unflatten(ks, side_s, n);
                        let mut flat = 0usize;
                        for a in 0..n {
                            let d = (kv[a] << (top - j)) as i64 - (kpv[a] << (top - jp)) as i64;
                            flat = flat * side + d.rem_euclid(side as i64) as usize;
                        }
                        *o += s * kern[flat];
                    }
                }
            }
            let got = direct.band(e, j)?;
            Ok(out.iter().zip(got).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

fn stat_unflatten(flat: usize, side: usize, n: usize) -> [usize; 3] {
    let mut k = [0usize; 3];
    let mut rem = flat;
    for a in (0..n).rev() {
        k[a] = rem % side;
        rem /= side;
    }
    k
}

/// Periodic Euclidean length of `d` on a grid of `period` points per axis.
pub(crate) fn periodic_norm(d: &[f64], period: f64) -> f64 {
    d.iter()
        .map(|&x| {
            let r = x.rem_euclid(period);
            let r = r.min(period - r);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Circular convolution of `a` with `w(r)` on a `side^n` grid.
fn circular_convolve(a: &[f64], side: usize, n: usize, w: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut fw: Vec<Complex64> = (0..a.len())
        .map(|flat| {
            let k = stat_unflatten(flat, side, n);
            let r: Vec<f64> = k[..n].iter().map(|&x| x as f64).collect();
            Complex64::new(w(&r), 0.0)
        })
        .collect();
    fft::forward(&mut fa, n, side);
    fft::forward(&mut fw, n, side);
    for (x, y) in fa.iter_mut().zip(&fw) {
        *x *= y;
    }
    fft::inverse(&mut fa, n, side);
    let norm = 1.0 / a.len() as f64;
    fa.iter().map(|v| (v.re * norm).max(0.0)).collect()
}

/// Magnitudes of all detail bands at level `j` summed over `eps`.
fn detail_magnitudes(c: &WaveletCoefficients, j: u32) -> Vec<f64> {
    let n = c.dim();
    let mut out = vec![0.0; 1usize << (j as usize * n)];
    for e in 1..=band_count(n) {
        for (o, v) in out.iter_mut().zip(c.detail(j, e)) {
            *o += v.norm();
        }
    }
    out
}

/// Samples of the detail and scaling coefficient bounds for heat trajectories.
///
/// Detail coefficients at `(eps, j, k)` are compared with the neighbouring-level sum
/// `sum_{eps', |j-j'|<=1, k'} |a'_{j',k'}| (1+|2^{j-j'}k'-k|)^{-(n+1)}`; scaling coefficients
/// with `sum_{j'<=1+j_t} 2^{n(j'-j_t)/2} sum |a'_{j',k'}| (1+|k'-2^{j'-j_t}k|)^{-(n+1)}`.
pub fn heat_decay_samples(
    basis: &MeyerBasis,
    data: &[SpectralField],
    times: &[f64],
) -> Result<(Vec<DecaySample>, Vec<DecaySample>)> {
    let n = basis.lattice().dim();
    let jm = basis.max_level();
    let big_n = n as f64 + 1.0;
    let jobs: Vec<(usize, usize)> = (0..data.len()).flat_map(|d| (0..times.len()).map(move |t| (d, t))).collect();
    let per_job = jobs
        .par_iter()
        .map(|&(d, ti)| -> Result<(Vec<DecaySample>, Vec<DecaySample>)> {
            let config = d * times.len() + ti;
            let t = times[ti];
            let a = &data[d];
            let stat = basis.analyze(a, 0, jm)?;
            let index = ParameterIndexSet::new(t, jm)?;
            let jt = index.j_t();
            let now = basis.analyze(&heat_semigroup(a, t)?, jt, jm)?;
            let mags: Vec<Vec<f64>> = (0..=jm).map(|j| detail_magnitudes(&stat, j)).collect();
            let mut detail = Vec::new();
            for j in jt..=jm {
                let side = 1usize << j;
                let period = side as f64;
                let w = |r: &[f64]| (1.0 + periodic_norm(r, period)).powf(-big_n);
                let mut rhs = circular_convolve(&mags[j as usize], side, n, w);
                if j >= 1 {
                    // j' = j - 1: offsets 2k' - k, sources upsampled onto even points
                    let coarse = &mags[j as usize - 1];
                    let mut up = vec![0.0; side.pow(n as u32)];
                    for (kc, v) in coarse.iter().enumerate() {
                        let kv = stat_unflatten(kc, side / 2, n);
                        let flat = (0..n).fold(0usize, |acc, x| acc * side + 2 * kv[x]);
                        up[flat] = *v;
                    }
                    for (r, x) in rhs.iter_mut().zip(circular_convolve(&up, side, n, w)) {
                        *r += x;
                    }
                }
                if j < jm {
                    // j' = j + 1: offsets k'/2 - k, read on the finer grid at 2k
                    let fine_side = 2 * side;
                    let fine_period = fine_side as f64;
                    let wf = |r: &[f64]| (1.0 + periodic_norm(r, fine_period) / 2.0).powf(-big_n);
                    let conv = circular_convolve(&mags[j as usize + 1], fine_side, n, wf);
                    for (k, r) in rhs.iter_mut().enumerate() {
                        let kv = stat_unflatten(k, side, n);
                        let flat = (0..n).fold(0usize, |acc, x| acc * fine_side + 2 * kv[x]);
                        *r += conv[flat];
                    }
                }
                let mut vals = vec![0.0; side.pow(n as u32)];
                for e in 1..=band_count(n) {
                    for (k, v) in now.detail(j, e).iter().enumerate() {
                        vals[k] = f64::max(vals[k], v.norm());
                    }
                }
                let heat = t * 4f64.powi(j as i32);
                for (v, r) in vals.into_iter().zip(rhs) {
                    if r > 0.0 {
                        detail.push(DecaySample::new(config, v, r).heat(heat));
                    }
                }
            }
            let mut scaling = Vec::new();
            let side = 1usize << jt;
            for (k, v) in now.scaling().iter().enumerate() {
                let kv = stat_unflatten(k, side, n);
                let mut rhs = 0.0;
                for jp in 0..=(jt + 1).min(jm) {
                    let sp = 1usize << jp;
                    let weight = 2f64.powf(n as f64 * (jp as f64 - jt as f64) / 2.0);
                    let ratio = 2f64.powi(jp as i32 - jt as i32);
                    for (kp, m) in mags[jp as usize].iter().enumerate() {
                        if *m == 0.0 {
                            continue;
                        }
                        let kpv = stat_unflatten(kp, sp, n);
                        let d: Vec<f64> = (0..n).map(|x| kpv[x] as f64 - ratio * kv[x] as f64).collect();
                        rhs += weight * m * (1.0 + periodic_norm(&d, sp as f64)).powf(-big_n);
                    }
                }
                if rhs > 0.0 {
                    scaling.push(DecaySample::new(config, v.norm(), rhs));
                }
            }
            Ok((detail, scaling))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut detail = Vec::new();
    let mut scaling = Vec::new();
    for (d, s) in per_job {
        detail.extend(d);
        scaling.extend(s);
    }
    Ok((detail, scaling))
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingResult {
    pub ratios: Vec<f64>,
    pub constant: f64,
    pub skipped: usize,
}

/// Max over the ensemble of `||e^{t Delta} f||_Y / ||f||_{B^{n/p-1}_{p,p}}`.
pub fn embedding_experiment(
    basis: &MeyerBasis,
    ensemble: &[Vec<SpectralField>],
    opts: &NormOptions,
    shells: (u32, u32),
    per_shell: usize,
) -> Result<EmbeddingResult> {
    if ensemble.is_empty() {
        return Err(Error::Precondition("empty ensemble".into()));
    }
    let rows = ensemble
        .par_iter()
        .map(|f| -> Result<Option<f64>> {
            let b = critical_besov(basis, f, opts.p)?;
            if b == 0.0 {
                return Ok(None);
            }
            let traj = heat_trajectory_on_shells(f, basis, shells, per_shell)?;
            let r = ypm_norm(basis, &traj.trajectory, opts, shells)?;
            Ok(Some(r.total() / b))
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let ratios: Vec<f64> = rows.into_iter().flatten().collect();
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(EmbeddingResult { ratios, constant, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::{fit_decay, EstimateId, FitShape};
    use crate::spectral::FrequencyLattice;

    fn basis(m: usize) -> MeyerBasis {
        MeyerBasis::with_default_window(FrequencyLattice::new(2, m).unwrap())
    }

    #[test]
    fn trajectory_basics() {
        let b = basis(64);
        let zero = heat_trajectory_on_shells(&[SpectralField::zeros(b.lattice())], &b, (2, 3), 4).unwrap();
        assert!(zero.trajectory.states().iter().all(|s| s[0].max_abs() == 0.0));
        let a = random_field(&b, 3, 4.0, 1).unwrap();
        let h = heat_trajectory_on_shells(std::slice::from_ref(&a), &b, (0, 4), 4).unwrap();
        assert!(h.recheck().unwrap() < 1e-12);
        let norms: Vec<f64> = h.trajectory.states().iter().map(|s| s[0].norm_l2()).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        assert!(heat_trajectory_on_shells(&[a], &b, (0, 9), 4).is_err());
    }

    #[test]
    fn transfer_single_atom_and_random() {
        let b = basis(64);
        let atom = b.atom(2, 3, &[1, 4]).unwrap().spectrum;
        assert!(verify_transfer(&b, &atom, 0.01).unwrap() < 1e-10);
        let a = random_field(&b, 3, 4.0, 2).unwrap();
        assert!(verify_transfer(&b, &a, 2f64.powi(-4)).unwrap() < 1e-8);
        let small = verify_transfer(&b, &a, 1e-9).unwrap();
        assert!(small < 1e-8);
    }

    #[test]
    fn parameter_parseval_along_heat_flow() {
        let b = basis(64);
        let a = random_field(&b, 3, 4.0, 3).unwrap();
        for &t in &[1e-4, 2f64.powi(-6), 0.1, 1.5] {
            let f = heat_semigroup(&a, t).unwrap();
            let c = analyze_parameter(&b, &f, t).unwrap();
            assert!(((c.energy() - f.norm_l2().powi(2)) / f.norm_l2().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn single_atom_decay_rate() {
        // the slowest decay on a level-j detail band comes from its lowest lattice frequency
        let b = basis(64);
        let j = 3;
        let atom = b.atom(1, j, &[0, 0]).unwrap().spectrum;
        let m_min = ((2f64.powi(j as i32)) / 3.0).floor() as i64 + 1;
        let lam = 4.0 * std::f64::consts::PI.powi(2) * (m_min * m_min) as f64;
        for &t in &[0.001, 0.004, 0.01] {
            let v = heat_semigroup(&atom, t).unwrap().inner(&atom).norm();
            assert!(v <= (-lam * t).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn heat_decay_fit_on_small_ensemble() {
        let b = basis(64);
        let data: Vec<_> = (0..4).map(|s| random_field(&b, 3, 4.0, 10 + s).unwrap()).collect();
        let times = [2f64.powi(-8), 2f64.powi(-6), 2f64.powi(-5), 2f64.powi(-3)];
        let (detail, scaling) = heat_decay_samples(&b, &data, &times).unwrap();
        let fd = fit_decay(EstimateId::HeatDecayDetail, &detail, FitShape::new(true, false), 2, 64).unwrap();
        assert!(fd.constant.is_finite() && fd.c.unwrap() > 0.0);
        let fs = fit_decay(EstimateId::HeatDecayScaling, &scaling, FitShape::new(false, false), 2, 64).unwrap();
        assert!(fs.constant.is_finite());
    }

    #[test]
    fn embedding_homogeneous() {
        let b = basis(64);
        let f = random_field(&b, 3, 4.0, 5).unwrap();
        let opts = NormOptions::new(4.0, 1.0);
        let r1 = embedding_experiment(&b, &[vec![f.clone()]], &opts, (0, 4), 4).unwrap();
        let r2 = embedding_experiment(&b, &[vec![f.scale(7.0)]], &opts, (0, 4), 4).unwrap();
        assert!((r1.constant - r2.constant).abs() <= 1e-10 * r1.constant);
        assert!(embedding_experiment(&b, &[], &opts, (0, 4), 4).is_err());
    }
}
