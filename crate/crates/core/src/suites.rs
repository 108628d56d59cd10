//! Certification suites: sample ensembles for every decay estimate, two-resolution
//! stability of the fitted constants, ratio experiments for the norm estimates and
//! structural checks of the basis.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::{constant_at, fit_decay, DecayFit, DecaySample, EstimateId, FitShape};
use crate::heat::{heat_coupling, heat_decay_samples, make_heat_trajectory, periodic_norm, random_field};
use crate::kernels::{kernel_samples, KernelKind};
use crate::mesh::TimeMesh;
use crate::meyer::{band_count, MeyerBasis, MeyerWindow};
use crate::norms::{critical_besov, low_freq_bound_check, NormOptions};
use crate::paraproduct::{distinct_kinds, verify_operator_norm};
use crate::spectral::{linf, FrequencyLattice, SpectralField};

/// Allowed relative spread of a certified constant under resolution doubling.
pub const STABILITY_TOL: f64 = 0.25;
/// Allowed ratio between the largest and smallest constant of a norm experiment.
pub const EXPERIMENT_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteOptions {
    /// Configurations per estimate.
    pub configs: usize,
    pub seed: u64,
    /// Evaluation points per axis for physical-space samples.
    pub grid: usize,
    /// Highest atom level in the ensembles. Kept fixed across resolutions so the
    /// ensembles coincide.
    pub top: u32,
    /// Integrability exponent used to weight random data.
    pub p: f64,
    /// Time samples per shell in trajectory experiments.
    pub per_shell: usize,
}

impl SuiteOptions {
    /// Defaults for ensembles drawn on `base`.
    pub fn for_lattice(base: FrequencyLattice) -> Self {
        let n = base.dim();
        Self {
            configs: 120,
            seed: 0,
            grid: if n == 2 { 64 } else { 16 }.min(base.size()),
            top: base.max_atom_level(),
            p: n as f64 + 1.0,
            per_shell: 4,
        }
    }
}

pub fn shape_of(id: EstimateId) -> Option<FitShape> {
    Some(match id {
        EstimateId::KernelDecay => FitShape::new(false, false),
        EstimateId::AtomDecayScaling => FitShape::new(false, true),
        EstimateId::AtomDecayDetail => FitShape::new(true, true),
        EstimateId::CouplingDecay => FitShape::new(false, true),
        EstimateId::HeatDecayDetail => FitShape::new(true, false),
        EstimateId::HeatDecayScaling => FitShape::new(false, false),
        _ => return None,
    })
}

/// `(1+|y|)^{n+1} |g(y)|` samples of every distinct kernel, restricted to `|y|_inf <= radius`.
pub fn kernel_decay_samples(lattice: FrequencyLattice, radius: f64) -> Result<Vec<DecaySample>> {
    let n = lattice.dim();
    let mut out = Vec::new();
    for (ci, kind) in distinct_kinds(n).into_iter().enumerate() {
        let ks = kernel_samples(kind, lattice)?;
        for (flat, v) in ks.values.iter().enumerate() {
            let y = ks.position(flat);
            if y[..n].iter().any(|c| c.abs() > radius) {
                continue;
            }
            let d = y[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
            out.push(DecaySample::new(ci, v.abs(), 1.0).distance(d));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
struct AtomSpec {
    eps: u8,
    j: u32,
    j_t: u32,
    k: Vec<usize>,
    alpha: Vec<u32>,
    tau: f64,
}

fn random_k(rng: &mut ChaCha8Rng, j: u32, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..1usize << j)).collect()
}

fn random_alpha(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let order = rng.random_range(0..=5u32);
    let mut alpha = vec![0u32; n];
    for _ in 0..order {
        alpha[rng.random_range(0..n)] += 1;
    }
    alpha
}

/// Physical samples of `e^{tau Delta} d^alpha Phi`, with `(-Delta)^{-1}` inserted when
/// `|alpha| >= 3`, against `2^{(n/2+|alpha|) j} (1+|2^j x - k|)^{-N}`.
///
/// With `scaling` the atoms are scaling atoms at `j_t` and `tau <= 4^{1-j_t}`; the
/// inverse-Laplacian cases use the fixed exponent `n + |alpha| - 2`. Otherwise the atoms are
/// detail atoms at `j >= j_t` and the samples carry `heat = tau 4^j`.
pub fn atom_decay_samples(basis: &MeyerBasis, opts: &SuiteOptions, scaling: bool) -> Result<Vec<DecaySample>> {
    let lat = basis.lattice();
    let (n, size) = (lat.dim(), lat.size());
    basis.check_level(opts.top as i64)?;
    if opts.grid == 0 || opts.grid > size || size % opts.grid != 0 {
        return Err(Error::Precondition(format!("sample grid {} must divide the lattice size {size}", opts.grid)));
    }
    let stride = size / opts.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ if scaling { 0x5ca1 } else { 0xde7a });
    let specs: Vec<AtomSpec> = (0..opts.configs)
        .map(|_| {
            let j_t = rng.random_range(0..=opts.top);
            let (eps, j) = if scaling {
                (0, j_t)
            } else {
                (rng.random_range(1..=band_count(n)), rng.random_range(j_t..=opts.top))
            };
            let k = random_k(&mut rng, j, n);
            let alpha = random_alpha(&mut rng, n);
            let tau = 4f64.powi(1 - j_t as i32) * rng.random::<f64>();
            AtomSpec { eps, j, j_t, k, alpha, tau }
        })
        .collect();
    let per_config = specs
        .par_iter()
        .enumerate()
        .map(|(ci, s)| -> Result<Vec<DecaySample>> {
            let order: u32 = s.alpha.iter().sum();
            let atom = basis.atom(s.eps, s.j, &s.k)?.spectrum;
            let field = atom.apply_multiplier(true, |m| {
                let xi = lat.xi(m);
                let r2 = lat.xi_sq(m);
                let mut v = Complex64::new((-s.tau * r2).exp(), 0.0);
                for (a, &p) in s.alpha.iter().enumerate() {
                    v *= Complex64::new(0.0, xi[a]).powu(p);
                }
                if order >= 3 {
                    if r2 == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    v /= r2;
                }
                v
            });
            let vals = field.to_physical();
            let scale = (1u64 << s.j) as f64;
            let base = scale.powf(n as f64 / 2.0 + order as f64);
            let points = opts.grid.pow(n as u32);
            let mut out = Vec::with_capacity(points);
            let mut d = [0.0; 3];
            for p in 0..points {
                let mut rem = p;
                let mut flat = 0usize;
                let mut mult = 1usize;
                for a in (0..n).rev() {
                    let pa = rem % opts.grid;
                    rem /= opts.grid;
                    flat += pa * stride * mult;
                    mult *= size;
                    d[a] = scale * pa as f64 / opts.grid as f64 - s.k[a] as f64;
                }
                let mut sample = DecaySample::new(ci, vals[flat].re.abs(), base).distance(periodic_norm(&d[..n], scale));
                if scaling {
                    if order >= 3 {
                        sample = sample.fixed_exponent(n as f64 + order as f64 - 2.0);
                    }
                } else {
                    sample = sample.heat(s.tau * scale * scale);
                }
                debug_assert!(s.j >= s.j_t);
                out.push(sample);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_config.into_iter().flatten().collect())
}

/// Offsets `k'' - k` per coupling configuration.
const COUPLING_OFFSETS: usize = 6;

/// Coupling coefficients of detail products on levels `2 + j_s ..= top` against the kernels
/// applied to scaling atoms at `j_t >= 1`, against
/// `2^{j_t (1 + n/2)} sum_j (1+|2^{j_t-j} k - k'|)^{-(n+1)}` with distance `|k - k''|`.
///
/// `big` must hold the products of atoms up to level `top`, e.g. the doubled lattice.
pub fn coupling_decay_samples(big: &MeyerBasis, opts: &SuiteOptions) -> Result<Vec<DecaySample>> {
    let lat = big.lattice();
    let n = lat.dim();
    // level-0 scaling atoms are constants, which every kernel annihilates; levels up to 4
    // give offsets long enough to see the decay on coarse lattices
    let top = opts.top.max(4);
    big.check_level(top as i64)?;
    let bc = band_count(n);
    let kinds: Vec<KernelKind> = distinct_kinds(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc0u64);
    struct Spec {
        j_t: u32,
        lo: u32,
        tau: f64,
        eps: (u8, u8),
        kind: KernelKind,
        k: Vec<i64>,
        kp: Vec<usize>,
        offsets: Vec<Vec<i64>>,
    }
    let specs: Vec<Spec> = (0..opts.configs)
        .map(|_| {
            let j_t = rng.random_range(1..=top - 2);
            let j_s = rng.random_range(j_t..=top - 2);
            let lo = j_s + 2;
            let t = 4f64.powi(-(j_t as i32)) * (1.0 + 3.0 * rng.random::<f64>());
            let tau = t * rng.random::<f64>();
            let eps = (rng.random_range(1..=bc), rng.random_range(1..=bc));
            let kind = kinds[rng.random_range(0..kinds.len())];
            let k = (0..n).map(|_| rng.random_range(0..1i64 << lo)).collect();
            let kp = random_k(&mut rng, j_t, n);
            let half = 1i64 << (lo - 1);
            let mut offsets = vec![vec![0i64; n]];
            while offsets.len() < COUPLING_OFFSETS {
                offsets.push((0..n).map(|_| rng.random_range(-half..=half)).collect());
            }
            Spec { j_t, lo, tau, eps, kind, k, kp, offsets }
        })
        .collect();
    let wrap = 1i64 << top;
    let per_config = specs
        .par_iter()
        .enumerate()
        .map(|(ci, s)| -> Result<Vec<DecaySample>> {
            let target = crate::kernels::apply_a(&big.atom(0, s.j_t, &s.kp)?.spectrum, s.tau, s.kind)?.to_physical();
            let kk: Vec<usize> = s.k.iter().map(|&v| (v + wrap) as usize).collect();
            let firsts = (s.lo..=top)
                .map(|j| Ok(big.atom(s.eps.0, j, &kk)?.spectrum.to_physical()))
                .collect::<Result<Vec<_>>>()?;
            let mut base = 0.0;
            let period = (1u64 << s.j_t) as f64;
            for j in s.lo..=top {
                let shrink = 2f64.powi(s.j_t as i32 - j as i32);
                let d: Vec<f64> = (0..n).map(|a| shrink * s.k[a] as f64 - s.kp[a] as f64).collect();
                base += (1.0 + periodic_norm(&d, period)).powf(-(n as f64) - 1.0);
            }
            base *= 2f64.powf(s.j_t as f64 * (1.0 + n as f64 / 2.0));
            let mut out = Vec::with_capacity(s.offsets.len());
            for off in &s.offsets {
                let k2: Vec<usize> = (0..n).map(|a| (s.k[a] + off[a] + wrap) as usize).collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, j) in (s.lo..=top).enumerate() {
                    let second = big.atom(s.eps.1, j, &k2)?.spectrum.to_physical();
                    acc += firsts[i].iter().zip(&second).zip(&target).map(|((a, b), c)| a * b * c.conj()).sum::<Complex64>();
                }
                let value = acc.norm() / lat.len() as f64;
                let dist = off.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                out.push(DecaySample::new(ci, value, base).distance(dist));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_config.into_iter().flatten().collect())
}

/// Random data and evaluation times for the heat-decay ensembles: four times per datum,
/// spread over the shells `0..=top`.
pub fn heat_decay_ensemble(basis: &MeyerBasis, opts: &SuiteOptions) -> Result<(Vec<SpectralField>, Vec<f64>)> {
    let data_count = opts.configs.div_ceil(4).max(1);
    // one level below the finest keeps the heat-evolved data inside the coarse lattice's frame
    let top = opts.top.saturating_sub(1).max(1);
    let data = (0..data_count)
        .map(|i| random_field(basis, top, opts.p, opts.seed.wrapping_add(1000 + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let times = (0..4).map(|i| 4f64.powf(-(top as f64) * i as f64 / 3.0) * 0.9).collect();
    Ok((data, times))
}

/// Samples and the number of configurations they come from.
pub fn decay_samples(id: EstimateId, lattice: FrequencyLattice, opts: &SuiteOptions) -> Result<(Vec<DecaySample>, usize)> {
    let basis = MeyerBasis::with_default_window(lattice);
    match id {
        EstimateId::KernelDecay => {
            let klat = FrequencyLattice::new(lattice.dim(), lattice.size().max(KERNEL_LATTICE))?;
            let s = kernel_decay_samples(klat, KERNEL_RADIUS)?;
            let count = s.len();
            Ok((s, count))
        }
        EstimateId::AtomDecayScaling => Ok((atom_decay_samples(&basis, opts, true)?, opts.configs)),
        EstimateId::AtomDecayDetail => Ok((atom_decay_samples(&basis, opts, false)?, opts.configs)),
        EstimateId::CouplingDecay => {
            let big = MeyerBasis::with_default_window(lattice.doubled());
            Ok((coupling_decay_samples(&big, opts)?, opts.configs))
        }
        EstimateId::HeatDecayDetail | EstimateId::HeatDecayScaling => {
            let (data, times) = heat_decay_ensemble(&basis, opts)?;
            let (detail, scaling) = heat_decay_samples(&basis, &data, &times)?;
            let configs = data.len() * times.len();
            Ok((if id == EstimateId::HeatDecayDetail { detail } else { scaling }, configs))
        }
        _ => Err(Error::Precondition(format!("{id} is not a decay estimate"))),
    }
}

/// Kernel samples stay within a quarter period of the smallest kernel lattice, where
/// periodic images are negligible.
const KERNEL_LATTICE: usize = 128;
const KERNEL_RADIUS: f64 = KERNEL_LATTICE as f64 * crate::kernels::KERNEL_SPACING / 4.0;

#[derive(Clone, Debug, Serialize)]
pub struct DecayCertificate {
    pub id: EstimateId,
    pub configurations: usize,
    pub fits: Vec<DecayFit>,
    /// Shape shared by all resolutions: the smallest fitted rate and exponent.
    pub common_c: Option<f64>,
    pub common_exponent: f64,
    /// Constants at the common shape, one per resolution.
    pub constants: Vec<f64>,
    /// `max / min - 1` over `constants`.
    pub spread: f64,
    #[serde(skip)]
    pub seconds: Vec<f64>,
}

impl DecayCertificate {
    pub fn stable(&self) -> bool {
        self.constants.iter().all(|c| c.is_finite() && *c > 0.0) && self.spread <= STABILITY_TOL
    }
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo - 1.0
    } else {
        f64::INFINITY
    }
}

/// Fits `id` on every lattice with the same ensemble and compares the constants at the
/// common shape.
pub fn certify_decay(id: EstimateId, lattices: &[FrequencyLattice], opts: &SuiteOptions) -> Result<DecayCertificate> {
    let shape = shape_of(id).ok_or_else(|| Error::Precondition(format!("{id} is not a decay estimate")))?;
    if lattices.is_empty() {
        return Err(Error::Precondition("no resolutions to certify on".into()));
    }
    let mut fits = Vec::new();
    let mut all = Vec::new();
    let mut seconds = Vec::new();
    let mut configurations = 0;
    for &lat in lattices {
        let start = Instant::now();
        let (samples, count) = decay_samples(id, lat, opts)?;
        fits.push(fit_decay(id, &samples, shape, lat.dim(), lat.size())?);
        seconds.push(start.elapsed().as_secs_f64());
        configurations = count;
        all.push(samples);
    }
    let common_c = shape.fit_c.then(|| fits.iter().filter_map(|f| f.c).fold(f64::INFINITY, f64::min));
    let common_exponent = fits.iter().map(|f| f.exponent).fold(f64::INFINITY, f64::min);
    let constants: Vec<f64> = all.iter().map(|s| constant_at(s, shape, common_c.unwrap_or(0.0), common_exponent)).collect();
    Ok(DecayCertificate { id, configurations, spread: spread(&constants), fits, common_c, common_exponent, constants, seconds })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRun {
    pub resolution: usize,
    pub seed: u64,
    pub constant: f64,
    pub samples: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentCertificate {
    pub id: EstimateId,
    pub p: f64,
    pub m: f64,
    pub runs: Vec<ExperimentRun>,
    /// Largest over smallest constant across runs.
    pub factor: f64,
    pub notes: Vec<String>,
}

impl ExperimentCertificate {
    pub fn consistent(&self) -> bool {
        self.factor.is_finite() && self.factor <= EXPERIMENT_FACTOR
    }
}

/// Ensemble size and shells for a norm experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExperimentOptions {
    pub p: f64,
    pub m: f64,
    pub ensemble: usize,
    /// Highest level of the random data.
    pub top: u32,
    pub shells: (u32, u32),
    pub per_shell: usize,
}

fn scalar_ensemble(basis: &MeyerBasis, e: &ExperimentOptions, seed: u64) -> Result<Vec<SpectralField>> {
    (0..e.ensemble).map(|i| random_field(basis, e.top, e.p, seed.wrapping_mul(7919).wrapping_add(i as u64))).collect()
}

fn one_run(id: EstimateId, lat: FrequencyLattice, e: &ExperimentOptions, seed: u64, notes: &mut Vec<String>) -> Result<ExperimentRun> {
    let basis = MeyerBasis::with_default_window(lat);
    let mut opts = NormOptions::new(e.p, e.m);
    opts.allow_p_le_n = true;
    let data = scalar_ensemble(&basis, e, seed)?;
    let (constant, samples, skipped) = match id {
        EstimateId::Embedding => {
            let ens: Vec<Vec<SpectralField>> = data.into_iter().map(|f| vec![f]).collect();
            let r = crate::heat::embedding_experiment(&basis, &ens, &opts, e.shells, e.per_shell)?;
            (r.constant, r.ratios.len(), r.skipped)
        }
        EstimateId::LowFrequencyBound => {
            let ratios = data
                .par_iter()
                .map(|f| -> Result<Option<f64>> {
                    let b = critical_besov(&basis, std::slice::from_ref(f), e.p)?;
                    if b == 0.0 {
                        return Ok(None);
                    }
                    let traj = make_heat_trajectory(std::slice::from_ref(f), TimeMesh::shells(e.shells.0, e.shells.1, e.per_shell)?)?;
                    Ok(Some(low_freq_bound_check(&basis, &traj.trajectory, e.shells)? / b))
                })
                .collect::<Result<Vec<_>>>()?;
            let skipped = ratios.iter().filter(|r| r.is_none()).count();
            let r: Vec<f64> = ratios.into_iter().flatten().collect();
            (r.iter().copied().fold(0.0, f64::max), r.len(), skipped)
        }
        EstimateId::BilinearBound => {
            let mesh = TimeMesh::with_origin(e.shells.0, e.shells.1, e.per_shell)?;
            let traj = |f: &SpectralField| Ok::<_, Error>(make_heat_trajectory(std::slice::from_ref(f), mesh.clone())?.trajectory);
            let mut ratios = Vec::new();
            let mut skipped = 0;
            // one pair at a time keeps memory at two trajectories
            for (i, pair) in data.chunks_exact(2).enumerate() {
                let r = verify_operator_norm(&basis, &[(traj(&pair[0])?, traj(&pair[1])?)], &opts, e.shells)?;
                ratios.extend(r.ratios);
                skipped += r.skipped;
                notes.extend(r.notes.iter().map(|n| n.replacen("pair 0", &format!("pair {i}"), 1)));
            }
            (ratios.iter().copied().fold(0.0, f64::max), ratios.len(), skipped)
        }
        _ => return Err(Error::Precondition(format!("{id} is not a norm experiment"))),
    };
    Ok(ExperimentRun { resolution: lat.size(), seed, constant, samples, skipped })
}

/// Runs a norm experiment for every (lattice, seed) pair and compares the constants.
///
/// For the bilinear bound the ensemble is paired up, so `ensemble / 2` pairs are tested.
pub fn certify_experiment(
    id: EstimateId,
    lattices: &[FrequencyLattice],
    seeds: &[u64],
    e: &ExperimentOptions,
) -> Result<ExperimentCertificate> {
    if lattices.is_empty() || seeds.is_empty() {
        return Err(Error::Precondition("experiments need at least one resolution and one seed".into()));
    }
    let mut notes = Vec::new();
    let mut runs = Vec::new();
    for &lat in lattices {
        for &seed in seeds {
            runs.push(one_run(id, lat, e, seed, &mut notes)?);
        }
    }
    let constants: Vec<f64> = runs.iter().map(|r| r.constant).collect();
    let factor = spread(&constants) + 1.0;
    if e.m < 1.0 {
        notes.push(format!("m = {} < 1: outside the well-posedness range", e.m));
    }
    if e.p <= lattices[0].dim() as f64 {
        notes.push(format!("p = {} <= n: outside the well-posedness range", e.p));
    }
    Ok(ExperimentCertificate { id, p: e.p, m: e.m, runs, factor, notes })
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    /// Scaling level of the frame; `0` is the full basis.
    pub j_min: u32,
    pub gram: f64,
    pub partition: f64,
    pub round_trip: f64,
    pub parseval: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisReport {
    pub dim: usize,
    pub resolution: usize,
    pub max_level: u32,
    pub frames: Vec<RoundTrip>,
    #[serde(skip)]
    pub seconds: f64,
}

impl BasisReport {
    pub fn worst_gram(&self) -> f64 {
        self.frames.iter().map(|f| f.gram).fold(0.0, f64::max)
    }

    pub fn worst_partition(&self) -> f64 {
        self.frames.iter().map(|f| f.partition).fold(0.0, f64::max)
    }

    pub fn worst_round_trip(&self) -> f64 {
        self.frames.iter().map(|f| f.round_trip.max(f.parseval)).fold(0.0, f64::max)
    }
}

/// Largest `|<Phi_a, Phi_b> - delta_ab|` over all pairs of atoms in the bands `pairs`.
fn gram_over(basis: &MeyerBasis, pairs: &[((u8, u32), (u8, u32))]) -> f64 {
    pairs
        .par_iter()
        .map(|&(a, b)| match heat_coupling(basis, 0.0, a, b) {
            None => 0.0,
            Some(g) => g
                .iter()
                .enumerate()
                .map(|(r, v)| {
                    let expect = if a == b && r == 0 { 1.0 } else { 0.0 };
                    (v - expect).norm()
                })
                .fold(0.0, f64::max),
        })
        .reduce(|| 0.0, f64::max)
}

/// Real random field with independent modes in the field band.
pub fn band_limited_field(lattice: FrequencyLattice, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = lattice.field_band();
    let n = lattice.dim();
    let raw = SpectralField::from_fn(lattice, false, |m| {
        if linf(m, n) <= band {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let phys: Vec<f64> = raw.to_physical().iter().map(|v| v.re).collect();
    Ok(SpectralField::from_physical(lattice, &phys)?.truncate(band))
}

/// Gram deviation, partition of unity, analysis/synthesis round trip and Parseval for the
/// full basis and for the frames with scaling level `j_min` in `frames`.
pub fn basis_report(lattice: FrequencyLattice, window: &MeyerWindow, frames: &[u32], seed: u64) -> Result<BasisReport> {
    let start = Instant::now();
    let basis = MeyerBasis::new(lattice, window.clone());
    let n = lattice.dim();
    let jm = basis.max_level();
    let details: Vec<(u8, u32)> = (0..=jm).flat_map(|j| (1..=band_count(n)).map(move |e| (e, j))).collect();
    let adjacent = |a: (u8, u32), b: (u8, u32)| a.1.abs_diff(b.1) <= 1;
    let dd: Vec<_> = details.iter().flat_map(|&a| details.iter().map(move |&b| (a, b))).filter(|&(a, b)| adjacent(a, b)).collect();
    let detail_gram = gram_over(&basis, &dd);
    let f = band_limited_field(lattice, seed)?;
    let energy = f.norm_l2().powi(2);
    let mut levels = vec![0u32];
    levels.extend(frames.iter().copied().filter(|&j| j > 0));
    let mut out = Vec::new();
    for j_min in levels {
        basis.check_level(j_min as i64)?;
        let mut pairs: Vec<_> = details
            .iter()
            .filter(|b| b.1 >= j_min)
            .map(|&b| ((0, j_min), b))
            .filter(|&(a, b)| b.1 <= a.1 + 1)
            .collect();
        pairs.push(((0, j_min), (0, j_min)));
        // detail bands below the scaling level are not in this frame
        let mut dd_frame = detail_gram;
        if j_min > 0 {
            let kept: Vec<_> = dd.iter().copied().filter(|(a, b)| a.1 >= j_min && b.1 >= j_min).collect();
            dd_frame = gram_over(&basis, &kept);
        }
        let gram = gram_over(&basis, &pairs).max(dd_frame);
        let band = lattice.field_band();
        let partition = (0..lattice.len())
            .into_par_iter()
            .filter_map(|i| {
                let m = lattice.freq(i);
                (linf(&m, n) <= band).then(|| (basis.window_energy(&m, j_min, jm) - 1.0).abs())
            })
            .reduce(|| 0.0, f64::max);
        let c = basis.analyze(&f, j_min, jm)?;
        let back = basis.synthesize(&c)?;
        let round_trip = (&back - &f).norm_l2() / f.norm_l2();
        let parseval = (c.energy() / energy - 1.0).abs();
        out.push(RoundTrip { j_min, gram, partition, round_trip, parseval });
    }
    Ok(BasisReport { dim: n, resolution: lattice.size(), max_level: jm, frames: out, seconds: start.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::coupling_coefficient;

    fn lat(m: usize) -> FrequencyLattice {
        FrequencyLattice::new(2, m).unwrap()
    }

    #[test]
    fn basis_report_small() {
        let r = basis_report(lat(32), &MeyerWindow::default(), &[1, 2], 3).unwrap();
        assert_eq!(r.frames.len(), 3);
        assert!(r.worst_gram() < 1e-8, "{r:?}");
        assert!(r.worst_partition() < 1e-10);
        assert!(r.worst_round_trip() < 1e-10);
    }

    #[test]
    fn kernel_samples_certify() {
        let opts = SuiteOptions::for_lattice(lat(128));
        let c = certify_decay(EstimateId::KernelDecay, &[lat(128), lat(256)], &opts).unwrap();
        assert!(c.stable(), "{c:?}");
        assert_eq!(c.fits[0].exponent, 3.0);
    }

    #[test]
    fn coupling_matches_spectral_inner_product() {
        let l = lat(64);
        let mut opts = SuiteOptions::for_lattice(l);
        opts.configs = 2;
        opts.top = 4;
        let big = MeyerBasis::with_default_window(l.doubled());
        let s = coupling_decay_samples(&big, &opts).unwrap();
        assert_eq!(s.len(), 2 * COUPLING_OFFSETS);
        // replay the first configuration's zero offset through the spectral path
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc0u64);
        let j_t = rng.random_range(1..=2u32);
        let j_s = rng.random_range(j_t..=2u32);
        let lo = j_s + 2;
        let t = 4f64.powi(-(j_t as i32)) * (1.0 + 3.0 * rng.random::<f64>());
        let tau = t * rng.random::<f64>();
        let eps = (rng.random_range(1..=3u8), rng.random_range(1..=3u8));
        let kinds = distinct_kinds(2);
        let kind = kinds[rng.random_range(0..kinds.len())];
        let k: Vec<usize> = (0..2).map(|_| rng.random_range(0..1i64 << lo) as usize).collect();
        let kp = random_k(&mut rng, j_t, 2);
        let direct = coupling_coefficient(&big, tau, j_t, (lo, 4), (eps.0, &k), (eps.1, &k), &kp, kind).unwrap();
        assert!((direct.norm() - s[0].value).abs() <= 1e-12 * direct.norm().max(1e-300), "{} vs {}", direct.norm(), s[0].value);
    }

    #[test]
    fn atom_samples_shapes() {
        let l = lat(32);
        let mut opts = SuiteOptions::for_lattice(l);
        opts.configs = 6;
        opts.grid = 16;
        let b = MeyerBasis::with_default_window(l);
        let s = atom_decay_samples(&b, &opts, true).unwrap();
        assert_eq!(s.len(), 6 * 256);
        assert!(s.iter().all(|x| x.heat == 0.0));
        let d = atom_decay_samples(&b, &opts, false).unwrap();
        assert!(d.iter().any(|x| x.heat > 0.0));
        opts.grid = 12;
        assert!(atom_decay_samples(&b, &opts, true).is_err());
    }

    #[test]
    fn experiment_rejects_decay_ids() {
        let e = ExperimentOptions { p: 4.0, m: 1.0, ensemble: 2, top: 1, shells: (0, 2), per_shell: 4 };
        assert!(certify_experiment(EstimateId::KernelDecay, &[lat(32)], &[0], &e).is_err());
        let r = certify_experiment(EstimateId::Embedding, &[lat(32)], &[0, 1], &e).unwrap();
        assert_eq!(r.runs.len(), 2);
        assert!(r.factor >= 1.0);
    }
}
