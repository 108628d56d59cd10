//! Wavelet-side norms: Besov norms of fields and the shell-block norms of trajectories.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meyer::{band_count, relative_leakage, MeyerBasis, ParameterIndexSet, WaveletCoefficients};
use crate::mesh::TimeMesh;
use crate::spectral::{FrequencyLattice, SpectralField, VectorField};

const MIN_SHELL_SAMPLES: usize = 4;

/// Fields sampled on a [`TimeMesh`]; each state holds one (scalar) or `n` (vector) components.
#[derive(Clone, Debug)]
pub struct Trajectory {
    mesh: TimeMesh,
    states: Vec<Vec<SpectralField>>,
}

impl Trajectory {
    pub fn new(mesh: TimeMesh, states: Vec<Vec<SpectralField>>) -> Result<Self> {
        if states.len() != mesh.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} states for {} mesh nodes",
                states.len(),
                mesh.len()
            )));
        }
        let first = states
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::ShapeMismatch("empty trajectory".into()))?;
        let (lat, nc) = (first.lattice(), states[0].len());
        if states.iter().any(|s| s.len() != nc || s.iter().any(|f| f.lattice() != lat)) {
            return Err(Error::ShapeMismatch("trajectory states differ in shape".into()));
        }
        Ok(Self { mesh, states })
    }

    pub fn scalar(mesh: TimeMesh, fields: Vec<SpectralField>) -> Result<Self> {
        Self::new(mesh, fields.into_iter().map(|f| vec![f]).collect())
    }

    pub fn vector(mesh: TimeMesh, fields: Vec<VectorField>) -> Result<Self> {
        Self::new(mesh, fields.into_iter().map(|v| v.into_components()).collect())
    }

    pub fn zeros(mesh: TimeMesh, lattice: FrequencyLattice, components: usize) -> Self {
        let states = vec![vec![SpectralField::zeros(lattice); components]; mesh.len()];
        Self { mesh, states }
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn times(&self) -> &[f64] {
        self.mesh.times()
    }

    pub fn lattice(&self) -> FrequencyLattice {
        self.states[0][0].lattice()
    }

    pub fn components(&self) -> usize {
        self.states[0].len()
    }

    pub fn state(&self, i: usize) -> &[SpectralField] {
        &self.states[i]
    }

    pub fn states(&self) -> &[Vec<SpectralField>] {
        &self.states
    }

    pub fn vector_at(&self, i: usize) -> Result<VectorField> {
        VectorField::new(self.states[i].clone())
    }

    pub fn component(&self, l: usize) -> Self {
        Self { mesh: self.mesh.clone(), states: self.states.iter().map(|s| vec![s[l].clone()]).collect() }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            states: self.states.iter().map(|s| s.iter().map(|f| f.scale(a)).collect()).collect(),
        }
    }

    /// `self + a * other` on a shared mesh.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        if self.mesh != other.mesh || self.components() != other.components() {
            return Err(Error::ShapeMismatch("trajectories on different meshes".into()));
        }
        Ok(Self {
            mesh: self.mesh.clone(),
            states: self
                .states
                .iter()
                .zip(&other.states)
                .map(|(x, y)| x.iter().zip(y).map(|(f, g)| f.axpy(a, g)).collect())
                .collect(),
        })
    }
}

/// `2^{j(s + n/2 - n/p)}`-weighted `l^q(l^p)` norm of the detail bands of `c`.
pub fn besov_norm(c: &WaveletCoefficients, s: f64, p: f64, q: f64) -> Result<f64> {
    besov_norm_pooled(std::slice::from_ref(c), s, p, q)
}

/// Besov norm of a vector field: the inner `l^p` sums pool all components.
pub fn besov_norm_pooled(cs: &[WaveletCoefficients], s: f64, p: f64, q: f64) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let first = cs.first().ok_or_else(|| Error::Domain("no coefficients".into()))?;
    let n = first.dim() as f64;
    let mut level_terms = Vec::new();
    for j in first.j_min()..=first.j_max() {
        let mut inner = 0.0f64;
        for c in cs {
            for e in 1..=band_count(c.dim()) {
                for v in c.detail(j, e) {
                    if p.is_infinite() {
                        inner = inner.max(v.norm());
                    } else {
                        inner += v.norm().powf(p);
                    }
                }
            }
        }
        let lp = if p.is_infinite() { inner } else { inner.powf(1.0 / p) };
        let np = if p.is_infinite() { 0.0 } else { n / p };
        level_terms.push(2f64.powf(j as f64 * (s + n / 2.0 - np)) * lp);
    }
    Ok(if q.is_infinite() {
        level_terms.into_iter().fold(0.0, f64::max)
    } else {
        level_terms.iter().map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

/// `l^p` norm of the scaling band, reported apart from the Besov sum.
pub fn scaling_band_norm(c: &WaveletCoefficients, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(if p.is_infinite() {
        c.scaling().iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        c.scaling().iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    })
}

/// Critical Besov norm `B^{n/p-1}_{p,p}` of a (possibly vector) field over all detail levels.
pub fn critical_besov(basis: &MeyerBasis, comps: &[SpectralField], p: f64) -> Result<f64> {
    let cs = comps
        .iter()
        .map(|f| basis.analyze(f, 0, basis.max_level()))
        .collect::<Result<Vec<_>>>()?;
    let n = basis.lattice().dim() as f64;
    besov_norm_pooled(&cs, n / p - 1.0, p, p)
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormOptions {
    pub p: f64,
    pub m: f64,
    /// Accept `p <= n`, outside the well-posedness range.
    pub allow_p_le_n: bool,
    /// Offset of the scaling level from the time level.
    pub cut_offset: i64,
}

impl NormOptions {
    pub fn new(p: f64, m: f64) -> Self {
        Self { p, m, allow_p_le_n: false, cut_offset: 0 }
    }

    fn check(&self, n: usize) -> Result<Vec<String>> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::Domain(format!("p must be finite and >= 1, got {}", self.p)));
        }
        if !(self.m > 0.0) {
            return Err(Error::Domain(format!("m must be positive, got {}", self.m)));
        }
        let mut flags = Vec::new();
        if self.p <= n as f64 {
            if !self.allow_p_le_n {
                return Err(Error::Precondition(format!("p = {} must exceed n = {n}", self.p)));
            }
            flags.push(format!("p = {} <= n = {n}: outside the well-posedness range", self.p));
        }
        if self.m < 1.0 {
            flags.push(format!("m = {} < 1: outside the well-posedness range", self.m));
        }
        Ok(flags)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellBlocks {
    pub shell: u32,
    /// Scaling level used on this shell.
    pub j_t: u32,
    pub samples: usize,
    /// `A^p_{j'}`
    pub scaling: f64,
    /// `(j, A^{p,m}_{j,j'})` for `j_t <= j <= j_max`.
    pub detail: Vec<(u32, f64)>,
    /// Largest relative energy missed by the analysis over the shell samples.
    pub leakage: f64,
}

/// Per-sample `p`-power sums: scaling band and each detail level.
fn sample_sums(basis: &MeyerBasis, comps: &[SpectralField], j_t: u32, p: f64) -> Result<(f64, Vec<f64>, f64)> {
    let jm = basis.max_level();
    let mut scaling = 0.0;
    let mut detail = vec![0.0; (jm - j_t + 1) as usize];
    let mut leak: f64 = 0.0;
    for f in comps {
        let c = basis.analyze(f, j_t, jm)?;
        scaling += c.scaling().iter().map(|v| v.norm().powf(p)).sum::<f64>();
        for j in j_t..=jm {
            for e in 1..=band_count(c.dim()) {
                detail[(j - j_t) as usize] += c.detail(j, e).iter().map(|v| v.norm().powf(p)).sum::<f64>();
            }
        }
        leak = leak.max(relative_leakage(f, &c));
    }
    Ok((scaling, detail, leak))
}

/// `A^p_{j'}` and `A^{p,m}_{j,j'}` for shell `j'`, with sup over the shell realized on mesh samples.
pub fn block_norms(basis: &MeyerBasis, traj: &Trajectory, opts: &NormOptions, shell: u32) -> Result<ShellBlocks> {
    let n = basis.lattice().dim();
    opts.check(n)?;
    if traj.lattice() != basis.lattice() {
        return Err(Error::ShapeMismatch("trajectory and basis lattices differ".into()));
    }
    if shell > basis.max_level() {
        return Err(Error::InadmissibleLevel { requested: shell as i64, max: basis.max_level() });
    }
    let nodes = traj.mesh().shell_nodes(shell)?;
    if nodes.len() < MIN_SHELL_SAMPLES {
        return Err(Error::Precondition(format!(
            "shell {shell} has {} samples, at least {MIN_SHELL_SAMPLES} required",
            nodes.len()
        )));
    }
    let t0 = traj.times()[nodes.start];
    let index = ParameterIndexSet::with_cut_offset(t0, basis.max_level(), opts.cut_offset)?;
    let j_t = index.j_t();
    let p = opts.p;
    let per_sample = nodes
        .clone()
        .into_par_iter()
        .map(|i| sample_sums(basis, traj.state(i), j_t, p))
        .collect::<Result<Vec<_>>>()?;
    let mut max_s: f64 = 0.0;
    let mut max_d = vec![0.0f64; (basis.max_level() - j_t + 1) as usize];
    let mut leakage: f64 = 0.0;
    for (s, d, l) in per_sample {
        max_s = max_s.max(s);
        for (a, b) in max_d.iter_mut().zip(d) {
            *a = a.max(b);
        }
        leakage = leakage.max(l);
    }
    let hn = n as f64 / 2.0 - 1.0;
    let scaling = 2f64.powf(p * shell as f64 * hn) * max_s;
    let detail = max_d
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let j = j_t + i as u32;
            let w = 2f64.powf(2.0 * opts.m * p * (j as f64 - shell as f64) + p * j as f64 * hn);
            (j, w * v)
        })
        .collect();
    Ok(ShellBlocks { shell, j_t, samples: nodes.len(), scaling, detail, leakage })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub p: f64,
    pub m: f64,
    pub n: usize,
    pub shells: (u32, u32),
    pub blocks: Vec<ShellBlocks>,
    /// `H^p_0`
    pub h0: f64,
    /// `H^p_m`
    pub hm: f64,
    pub leakage: f64,
    pub flags: Vec<String>,
}

impl NormReport {
    /// `(H^p_0, H^p_m)` from stored blocks.
    pub fn assemble(blocks: &[ShellBlocks], p: f64) -> (f64, f64) {
        let mut a0: f64 = 0.0;
        let mut am: f64 = 0.0;
        for b in blocks {
            a0 = a0.max(b.scaling);
            let s: f64 = b.detail.iter().filter(|(j, _)| *j >= b.shell).map(|(_, v)| *v).sum();
            am = am.max(s);
        }
        (a0.powf(1.0 / p), am.powf(1.0 / p))
    }

    /// The scalar solution norm `H^p_0 + H^p_m`.
    pub fn total(&self) -> f64 {
        self.h0 + self.hm
    }
}

/// Shell-block norm of a trajectory over `shells = (lo, hi)`.
pub fn ypm_norm(basis: &MeyerBasis, traj: &Trajectory, opts: &NormOptions, shells: (u32, u32)) -> Result<NormReport> {
    let n = basis.lattice().dim();
    let flags = opts.check(n)?;
    let (lo, hi) = shells;
    if lo > hi {
        return Err(Error::Domain(format!("empty shell range {lo}..={hi}")));
    }
    let blocks = (lo..=hi).map(|s| block_norms(basis, traj, opts, s)).collect::<Result<Vec<_>>>()?;
    let (h0, hm) = NormReport::assemble(&blocks, opts.p);
    let leakage = blocks.iter().map(|b| b.leakage).fold(0.0, f64::max);
    Ok(NormReport { p: opts.p, m: opts.m, n, shells, blocks, h0, hm, leakage, flags })
}

/// Sup over the shell samples of the critical Besov norm `B^{n/p-1}_{p,p}`.
pub fn besov_sup(basis: &MeyerBasis, traj: &Trajectory, p: f64, shells: (u32, u32)) -> Result<f64> {
    let mut best: f64 = 0.0;
    for s in shells.0..=shells.1 {
        for i in traj.mesh().shell_nodes(s)? {
            best = best.max(critical_besov(basis, traj.state(i), p)?);
        }
    }
    Ok(best)
}

/// Sup over shells, samples, levels `j >= j_t` and `k` of `2^{nj/2} |a^0_{j,k}(t)| 2^{-j_t}`.
pub fn low_freq_bound_check(basis: &MeyerBasis, traj: &Trajectory, shells: (u32, u32)) -> Result<f64> {
    let n = basis.lattice().dim() as f64;
    let (lo, hi) = shells;
    let mut best: f64 = 0.0;
    for s in lo..=hi {
        for i in traj.mesh().shell_nodes(s)? {
            let j_t = ParameterIndexSet::new(traj.times()[i], basis.max_level())?.j_t();
            for f in traj.state(i) {
                for j in j_t..=basis.max_level() {
                    let a = basis.band_coefficients(f, 0, j);
                    let peak = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    best = best.max(2f64.powf(n * j as f64 / 2.0 - j_t as f64) * peak);
                }
            }
        }
    }
    Ok(best)
}
