//! Global-in-time Picard iteration for the mild Navier-Stokes equation
//! `u = e^{t Delta} a - B(u, u)` with `B(u, v) = int_0^t e^{(t-s) Delta} P div(u (x) v) ds`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::duhamel::duhamel_integral;
use crate::error::{Error, Result};
use crate::heat::random_vector_field;
use crate::kernels::KernelKind;
use crate::mesh::TimeMesh;
use crate::meyer::MeyerBasis;
use crate::norms::{critical_besov, ypm_norm, NormOptions, NormReport, Trajectory};
use crate::spectral::{
    derivative, heat_semigroup, leray_project, pointwise_product, FrequencyLattice, SpectralField, VectorField,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub p: f64,
    pub m: f64,
    /// Shells `(lo, hi)` entering the solution norm; `hi` is clamped to the finest level.
    pub shells: (u32, u32),
    pub samples_per_shell: usize,
    /// Quadrature shells beyond the finest level, resolving `s -> 0`.
    pub extra_shells: u32,
    pub max_iterations: usize,
    /// Stop once the increment norm falls below this multiple of the iterate norm.
    pub tolerance: f64,
    /// Critical Besov norm above which the data is reported as not small.
    pub smallness: f64,
    pub allow_m_below_one: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: 4.0,
            m: 1.0,
            shells: (0, u32::MAX),
            samples_per_shell: 16,
            extra_shells: 6,
            max_iterations: 12,
            tolerance: 1e-10,
            smallness: 0.01,
            allow_m_below_one: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, dim: usize) -> Result<Vec<String>> {
        let mut notes = Vec::new();
        if !(self.p > dim as f64) || !self.p.is_finite() {
            return Err(Error::Config(format!("p = {} must be finite and exceed n = {dim}", self.p)));
        }
        if !(self.m > 0.0) {
            return Err(Error::Config(format!("m = {} must be positive", self.m)));
        }
        if self.m < 1.0 {
            if !self.allow_m_below_one {
                return Err(Error::Config(format!("m = {} < 1 needs allow_m_below_one", self.m)));
            }
            notes.push(format!("m = {} < 1: outside the proven range", self.m));
        }
        if self.max_iterations < 3 {
            return Err(Error::Config(format!("iteration cap {} must be at least 3", self.max_iterations)));
        }
        if self.samples_per_shell < 4 {
            return Err(Error::Config("at least 4 samples per shell required".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(notes)
    }

    pub fn norm_options(&self) -> NormOptions {
        NormOptions::new(self.p, self.m)
    }

    /// Norm shells on a basis with finest level `j_max`.
    pub fn norm_shells(&self, j_max: u32) -> (u32, u32) {
        let hi = self.shells.1.min(j_max);
        (self.shells.0.min(hi), hi)
    }

    /// Quadrature mesh: the origin plus shells `lo..=j_max + extra_shells`.
    pub fn mesh(&self, j_max: u32) -> Result<TimeMesh> {
        let (lo, _) = self.norm_shells(j_max);
        TimeMesh::with_origin(lo, j_max + self.extra_shells, self.samples_per_shell)
    }
}

/// Symbols `sigma_l'` and `sigma_{l,l',l''}` combined so that component `l` of
/// `sum_l' sigma_l' w_{l' l} + sum_{l',l''} sigma_{l,l',l''} w_{l' l''}` is `P div(w)`.
fn tensor_symbol(lat: FrequencyLattice, w: &[Vec<SpectralField>]) -> Result<Vec<SpectralField>> {
    let n = lat.dim();
    (0..n)
        .map(|l| {
            let values: Vec<Complex64> = (0..lat.len())
                .map(|i| {
                    let m = lat.freq(i);
                    let xi = lat.xi(&m);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for lp in 0..n {
                        acc += KernelKind::First { l: lp }.symbol(&xi) * w[lp][l].values()[i];
                        for lpp in 0..n {
                            acc += KernelKind::Third { l, lp, lpp }.symbol(&xi) * w[lp][lpp].values()[i];
                        }
                    }
                    acc
                })
                .collect();
            Ok(SpectralField::from_values(lat, values, false)?.real_part())
        })
        .collect()
}

fn check_pair(u: &Trajectory, v: &Trajectory) -> Result<()> {
    if u.mesh() != v.mesh() {
        return Err(Error::ShapeMismatch("trajectories on different meshes".into()));
    }
    if u.lattice() != v.lattice() || u.components() != v.components() {
        return Err(Error::ShapeMismatch("trajectories of different shape".into()));
    }
    if u.components() != u.lattice().dim() {
        return Err(Error::ShapeMismatch("vector trajectories need n components".into()));
    }
    if !u.mesh().has_origin() {
        return Err(Error::Precondition("Duhamel integrals need a mesh starting at the origin".into()));
    }
    Ok(())
}

fn integrate_components(mesh: &TimeMesh, per_node: Vec<Vec<SpectralField>>, band: i64) -> Result<Vec<VectorField>> {
    let n = per_node[0].len();
    let mut comps: Vec<Vec<SpectralField>> = Vec::with_capacity(n);
    for l in 0..n {
        let series: Vec<SpectralField> = per_node.iter().map(|s| s[l].clone()).collect();
        comps.push(duhamel_integral(mesh, &series)?);
    }
    (0..mesh.len())
        .map(|i| {
            let v = VectorField::new(comps.iter().map(|c| c[i].truncate(band)).collect())?;
            Ok(v)
        })
        .collect()
}

/// `B(u, v)` at every mesh node, assembled from the operators `B_l'` and `B_{l,l',l''}`
/// and cut to the field band of the lattice.
pub fn full_bilinear(u: &Trajectory, v: &Trajectory) -> Result<Vec<VectorField>> {
    check_pair(u, v)?;
    let lat = u.lattice();
    let n = lat.dim();
    let per_node = (0..u.mesh().len())
        .into_par_iter()
        .map(|i| {
            let w = (0..n)
                .map(|a| (0..n).map(|b| pointwise_product(&u.state(i)[a], &v.state(i)[b])).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            tensor_symbol(lat, &w)
        })
        .collect::<Result<Vec<_>>>()?;
    let out = integrate_components(u.mesh(), per_node, lat.field_band())?;
    out.into_iter().map(|f| f.into_divergence_free()).collect()
}

/// The same integral as [`full_bilinear`] by Leray projection of `div(u (x) v)` in physical form.
pub fn direct_bilinear(u: &Trajectory, v: &Trajectory) -> Result<Vec<VectorField>> {
    check_pair(u, v)?;
    let lat = u.lattice();
    let n = lat.dim();
    let per_node = (0..u.mesh().len())
        .into_par_iter()
        .map(|i| {
            let div = (0..n)
                .map(|l| {
                    let mut acc = SpectralField::zeros(lat);
                    for lp in 0..n {
                        let mut alpha = vec![0u32; n];
                        alpha[lp] = 1;
                        let w = pointwise_product(&u.state(i)[lp], &v.state(i)[l])?;
                        acc = &acc + &derivative(&w, &alpha)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(leray_project(&VectorField::new(div)?)?.into_components())
        })
        .collect::<Result<Vec<_>>>()?;
    integrate_components(u.mesh(), per_node, lat.field_band())
}

/// `e^{t Delta} a` sampled on `mesh`.
pub fn heat_trajectory(a: &VectorField, mesh: &TimeMesh) -> Result<Trajectory> {
    let states = mesh
        .times()
        .par_iter()
        .map(|&t| a.components().iter().map(|f| heat_semigroup(f, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(mesh.clone(), states)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Converged,
    NonContraction,
    CapReached,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverState {
    pub status: SolverStatus,
    pub iterations: usize,
    /// `||u^{(k+1)} - u^{(k)}||_Y` for every completed iteration.
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub besov_data: f64,
    pub residual: f64,
    /// Largest relative divergence over all iterates and nodes.
    pub divergence: f64,
    pub norm: NormReport,
    pub notes: Vec<String>,
    pub config: SolverConfig,
    #[serde(skip)]
    pub solution: Trajectory,
    #[serde(skip)]
    pub linear: Trajectory,
}

fn max_divergence(t: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..t.mesh().len() {
        worst = worst.max(t.vector_at(i)?.divergence_defect());
    }
    Ok(worst)
}

fn from_vectors(mesh: &TimeMesh, fields: Vec<VectorField>) -> Result<Trajectory> {
    Trajectory::vector(mesh.clone(), fields)
}

/// Picard iteration from the heat trajectory of `a`.
pub fn picard_solve(basis: &MeyerBasis, a: &VectorField, cfg: &SolverConfig) -> Result<SolverState> {
    picard_from(basis, a, cfg, None)
}

/// Picard iteration started from `start` instead of `e^{t Delta} a`.
pub fn picard_from(basis: &MeyerBasis, a: &VectorField, cfg: &SolverConfig, start: Option<&Trajectory>) -> Result<SolverState> {
    let lat = basis.lattice();
    if a.lattice() != lat {
        return Err(Error::ShapeMismatch("data and basis live on different lattices".into()));
    }
    let n = lat.dim();
    let mut notes = cfg.validate(n)?;
    let defect = a.divergence_defect();
    if defect > 1e-10 {
        return Err(Error::Precondition(format!("initial data is not divergence-free (defect {defect:.3e})")));
    }
    if a.band_extent() > lat.field_band() {
        return Err(Error::Aliasing { extent: a.band_extent(), limit: lat.field_band() + 1 });
    }
    let besov_data = critical_besov(basis, a.components(), cfg.p)?;
    if besov_data > cfg.smallness {
        notes.push(format!("data norm {besov_data:.3e} above the smallness threshold {:.3e}", cfg.smallness));
    }
    let jm = basis.max_level();
    let shells = cfg.norm_shells(jm);
    let opts = cfg.norm_options();
    let mesh = cfg.mesh(jm)?;
    let linear = heat_trajectory(a, &mesh)?;
    let mut u = match start {
        Some(s) => {
            if s.mesh() != &mesh || s.lattice() != lat || s.components() != n {
                return Err(Error::ShapeMismatch("starting trajectory does not match the solver mesh".into()));
            }
            s.clone()
        }
        None => linear.clone(),
    };
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut divergence = max_divergence(&u)?;
    let mut status = SolverStatus::CapReached;
    let mut iterations = 0;
    if a.max_abs() == 0.0 && start.is_none() {
        status = SolverStatus::Converged;
    } else {
        let mut above_one = 0;
        for _ in 0..cfg.max_iterations {
            let b = from_vectors(&mesh, full_bilinear(&u, &u)?)?;
            let next = linear.axpy(-1.0, &b)?;
            let inc = ypm_norm(basis, &next.axpy(-1.0, &u)?, &opts, shells)?.total();
            let size = ypm_norm(basis, &next, &opts, shells)?.total();
            if let Some(&prev) = increments.last() {
                let r: f64 = if prev == 0.0 { 0.0 } else { inc / prev };
                above_one = if r >= 1.0 { above_one + 1 } else { 0 };
                ratios.push(r);
            }
            increments.push(inc);
            divergence = divergence.max(max_divergence(&next)?);
            u = next;
            iterations += 1;
            if inc <= cfg.tolerance * size {
                status = SolverStatus::Converged;
                break;
            }
            if above_one >= 2 {
                status = SolverStatus::NonContraction;
                break;
            }
        }
    }
    if status == SolverStatus::Converged && ratios.iter().any(|&r| r >= 1.0) {
        notes.push("converged with a non-contracting step".into());
    }
    let residual = residual(&u, &linear, a)?;
    let norm = ypm_norm(basis, &u, &opts, shells)?;
    Ok(SolverState {
        status,
        iterations,
        increments,
        ratios,
        besov_data,
        residual,
        divergence,
        norm,
        notes,
        config: cfg.clone(),
        solution: u,
        linear,
    })
}

/// `max_t ||u(t) - e^{t Delta} a + B(u, u)(t)|| / max(||u(t)||, ||a||)`.
pub fn residual(u: &Trajectory, linear: &Trajectory, a: &VectorField) -> Result<f64> {
    let b = full_bilinear(u, u)?;
    residual_with(u, linear, a, &b)
}

/// [`residual`] with a precomputed bilinear term.
pub fn residual_with(u: &Trajectory, linear: &Trajectory, a: &VectorField, b: &[VectorField]) -> Result<f64> {
    if b.len() != u.mesh().len() || linear.mesh() != u.mesh() {
        return Err(Error::ShapeMismatch("residual inputs on different meshes".into()));
    }
    let an = a.norm_l2();
    let mut worst: f64 = 0.0;
    for (i, bi) in b.iter().enumerate() {
        let mut num = 0.0;
        let mut un = 0.0;
        for (l, f) in u.state(i).iter().enumerate() {
            let r = &(f - &linear.state(i)[l]) + bi.component(l);
            num += r.norm_l2().powi(2);
            un += f.norm_l2().powi(2);
        }
        let den = un.sqrt().max(an);
        if den > 0.0 {
            worst = worst.max(num.sqrt() / den);
        }
    }
    Ok(worst)
}

/// `lambda a(lambda x)` on the lattice `lambda` times finer.
pub fn rescale_data(a: &VectorField, lambda: u32) -> Result<VectorField> {
    if !lambda.is_power_of_two() || lambda < 2 {
        return Err(Error::Domain(format!("rescaling factor must be a power of two >= 2, got {lambda}")));
    }
    let lat = a.lattice();
    let fine = FrequencyLattice::new(lat.dim(), lat.size() * lambda as usize)?;
    let comps = a
        .components()
        .iter()
        .map(|f| Ok(f.resample(fine)?.dilate(lambda as i64)?.scale(lambda as f64)))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)?.into_divergence_free()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub lambda: u32,
    /// Max over nodes of `||u_lambda - lambda u(lambda^2 t, lambda x)|| / max ||u_lambda||`.
    pub deviation: f64,
    pub iterations: (usize, usize),
    /// Critical Besov norms of the data and of the rescaled data per unit cell.
    pub besov: (f64, f64),
    pub besov_deviation: f64,
}

/// Solves for `a` and for `lambda a(lambda x)` and compares the second solution with the
/// rescaled first one at matched nodes.
pub fn scaling_check(basis: &MeyerBasis, a: &VectorField, lambda: u32, cfg: &SolverConfig) -> Result<ScalingReport> {
    let scaled = rescale_data(a, lambda)?;
    let shift = lambda.trailing_zeros();
    let fine = MeyerBasis::new(scaled.lattice(), basis.window().clone());
    let mut cfg2 = cfg.clone();
    let (lo, hi) = cfg.norm_shells(basis.max_level());
    cfg2.shells = (lo + shift, hi + shift);
    let s1 = picard_solve(basis, a, cfg)?;
    let s2 = picard_solve(&fine, &scaled, &cfg2)?;
    if s1.solution.times().len() != s2.solution.times().len() {
        return Err(Error::ShapeMismatch("rescaled meshes differ in size".into()));
    }
    let lam = lambda as f64;
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for i in 0..s1.solution.times().len() {
        let (t1, t2) = (s1.solution.times()[i], s2.solution.times()[i]);
        if (t1 - lam * lam * t2).abs() > 1e-12 * t1.max(1e-300) {
            return Err(Error::ShapeMismatch("rescaled meshes are not matched".into()));
        }
        for (f, g) in s1.solution.state(i).iter().zip(s2.solution.state(i)) {
            let pred = f.resample(fine.lattice())?.dilate(lambda as i64)?.scale(lam);
            diff = diff.max((&pred - g).norm_l2());
            size = size.max(g.norm_l2());
        }
    }
    let cell = lam.powf(fine.lattice().dim() as f64 / cfg.p);
    let b1 = critical_besov(basis, a.components(), cfg.p)?;
    let b2 = critical_besov(&fine, scaled.components(), cfg.p)? / cell;
    let besov_deviation = if b1 == 0.0 { (b2 - b1).abs() } else { (b2 - b1).abs() / b1 };
    Ok(ScalingReport {
        lambda,
        deviation: if size == 0.0 { diff } else { diff / size },
        iterations: (s1.iterations, s2.iterations),
        besov: (b1, b2),
        besov_deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    SingleAtom,
    Random,
    TaylorGreen,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::SingleAtom, Preset::Random, Preset::TaylorGreen];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::SingleAtom => "single-atom",
            Preset::Random => "random",
            Preset::TaylorGreen => "taylor-green",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?} (expected single-atom, random or taylor-green)")))
    }
}

/// Divergence-free initial data with critical Besov norm `scale`.
///
/// `single-atom` is the Leray projection of `Phi^{e_1}_{j,0} e_1` with `j = min(3, j_max - 1)`.
pub fn preset_data(basis: &MeyerBasis, preset: Preset, scale: f64, p: f64, seed: u64) -> Result<VectorField> {
    let lat = basis.lattice();
    let n = lat.dim();
    let jm = basis.max_level();
    if jm < 1 {
        return Err(Error::Precondition("lattice too coarse for presets".into()));
    }
    let raw = match preset {
        Preset::SingleAtom => {
            let j = 3.min(jm - 1);
            let atom = basis.atom(1, j, &vec![0; n])?.spectrum;
            let mut comps = vec![SpectralField::zeros(lat); n];
            comps[0] = atom;
            leray_project(&VectorField::new(comps)?)?
        }
        Preset::Random => random_vector_field(basis, jm - 1, p, 1.0, seed)?,
        Preset::TaylorGreen => {
            let phys = |l: usize| -> Vec<f64> {
                let size = lat.size();
                (0..lat.len())
                    .map(|flat| {
                        let mut x = [0.0; 3];
                        let mut rem = flat;
                        for a in (0..n).rev() {
                            x[a] = 2.0 * PI * (rem % size) as f64 / size as f64;
                            rem /= size;
                        }
                        let c = if n == 3 { x[2].cos() } else { 1.0 };
                        match l {
                            0 => x[0].sin() * x[1].cos() * c,
                            1 => -x[0].cos() * x[1].sin() * c,
                            _ => 0.0,
                        }
                    })
                    .collect()
            };
            let comps = (0..n).map(|l| SpectralField::from_physical(lat, &phys(l))).collect::<Result<Vec<_>>>()?;
            leray_project(&VectorField::new(comps)?)?
        }
    };
    let b = critical_besov(basis, raw.components(), p)?;
    if b == 0.0 {
        return Err(Error::Precondition("preset has zero norm".into()));
    }
    raw.scale(scale / b).into_divergence_free()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(m: usize) -> (MeyerBasis, SolverConfig) {
        let b = MeyerBasis::with_default_window(FrequencyLattice::new(2, m).unwrap());
        let cfg = SolverConfig { samples_per_shell: 8, extra_shells: 4, ..SolverConfig::default() };
        (b, cfg)
    }

    #[test]
    fn config_validation() {
        let cfg = SolverConfig::default();
        assert!(cfg.validate(2).unwrap().is_empty());
        assert!(SolverConfig { p: 2.0, ..cfg.clone() }.validate(2).is_err());
        assert!(SolverConfig { max_iterations: 2, ..cfg.clone() }.validate(2).is_err());
        assert!(SolverConfig { m: 0.5, ..cfg.clone() }.validate(2).is_err());
        let flagged = SolverConfig { m: 0.5, allow_m_below_one: true, ..cfg.clone() };
        assert_eq!(flagged.validate(2).unwrap().len(), 1);
        assert_eq!(cfg.norm_shells(4), (0, 4));
        assert!("vortex".parse::<Preset>().is_err());
        assert_eq!("taylor-green".parse::<Preset>().unwrap(), Preset::TaylorGreen);
    }

    #[test]
    fn bilinear_two_paths_and_divergence() {
        let (b, cfg) = setup(32);
        let mesh = cfg.mesh(b.max_level()).unwrap();
        let a = preset_data(&b, Preset::Random, 0.5, 4.0, 3).unwrap();
        let u = heat_trajectory(&a, &mesh).unwrap();
        let one = full_bilinear(&u, &u).unwrap();
        let two = direct_bilinear(&u, &u).unwrap();
        for (x, y) in one.iter().zip(&two) {
            let d: f64 = (0..2).map(|l| (x.component(l) - y.component(l)).norm_l2()).fold(0.0, f64::max);
            assert!(d <= 1e-12 * x.norm_l2().max(1e-300));
            assert!(x.divergence_defect() <= 1e-9);
        }
        let zero = Trajectory::zeros(mesh.clone(), b.lattice(), 2);
        assert!(full_bilinear(&zero, &zero).unwrap().iter().all(|v| v.max_abs() == 0.0));
    }

    #[test]
    fn zero_data_converges_immediately() {
        let (b, cfg) = setup(32);
        let s = picard_solve(&b, &VectorField::zeros(b.lattice()), &cfg).unwrap();
        assert_eq!((s.status, s.iterations), (SolverStatus::Converged, 0));
        assert_eq!(s.norm.total(), 0.0);
    }

    #[test]
    fn small_atom_contracts() {
        let (b, cfg) = setup(64);
        let a = preset_data(&b, Preset::SingleAtom, 1e-3, 4.0, 0).unwrap();
        assert!((critical_besov(&b, a.components(), 4.0).unwrap() - 1e-3).abs() < 1e-15);
        let s = picard_solve(&b, &a, &cfg).unwrap();
        assert_eq!(s.status, SolverStatus::Converged);
        assert!(s.iterations <= 6);
        assert!(s.ratios.iter().all(|&r| r < 0.5), "{:?}", s.ratios);
        assert!(s.residual < 1e-4);
        assert!(s.divergence <= 1e-9);
        let perturbed = a.scale(1.01);
        assert!(residual(&s.solution, &heat_trajectory(&perturbed, s.solution.mesh()).unwrap(), &perturbed).unwrap() > s.residual);
    }

    #[test]
    fn linear_case_has_zero_residual() {
        let (b, cfg) = setup(32);
        let a = preset_data(&b, Preset::TaylorGreen, 0.1, 4.0, 0).unwrap();
        let mesh = cfg.mesh(b.max_level()).unwrap();
        let u = heat_trajectory(&a, &mesh).unwrap();
        let zero = vec![VectorField::zeros(b.lattice()); mesh.len()];
        assert_eq!(residual_with(&u, &u, &a, &zero).unwrap(), 0.0);
    }

    #[test]
    fn large_data_does_not_contract() {
        let (b, cfg) = setup(32);
        let a = preset_data(&b, Preset::SingleAtom, 100.0, 4.0, 0).unwrap();
        let s = picard_solve(&b, &a, &cfg).unwrap();
        assert_ne!(s.status, SolverStatus::Converged);
        assert!(!s.notes.is_empty());
    }

    #[test]
    fn scaling_relabels_solutions() {
        let (b, cfg) = setup(32);
        let a = preset_data(&b, Preset::SingleAtom, 1e-2, 4.0, 0).unwrap();
        let r = scaling_check(&b, &a, 2, &cfg).unwrap();
        assert_eq!(r.iterations.0, r.iterations.1);
        assert!(r.deviation < 1e-2, "{}", r.deviation);
        assert!(r.besov_deviation < 1e-10);
        assert!(rescale_data(&a, 3).is_err());
        let z = scaling_check(&b, &VectorField::zeros(b.lattice()), 2, &cfg).unwrap();
        assert_eq!(z.deviation, 0.0);
    }
}
