//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use parawave::estimates::EstimateId;
use parawave::heat::random_field;
use parawave::kernels::KernelKind;
use parawave::mesh::TimeMesh;
use parawave::meyer::{band_count, MeyerBasis, MeyerWindow};
use parawave::paraproduct::{distinct_kinds, low_frequency_vanishing, paraproduct_decompose, scaling_pair_coupling};
use parawave::solver::{picard_solve, preset_data, scaling_check, Preset, SolverConfig, SolverStatus};
use parawave::spectral::{heat_semigroup, pointwise_product, FrequencyLattice, SpectralField};
use parawave::suites::{
    band_limited_field, basis_report, certify_decay, certify_experiment, ExperimentOptions, SuiteOptions,
    EXPERIMENT_FACTOR, STABILITY_TOL,
};
use parawave::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20;

struct Outcome {
    failures: usize,
}

impl Outcome {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn run(&mut self, id: u32, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        let start = Instant::now();
        match f() {
            Ok((pass, detail)) => self.line(id, name, pass, format!("{detail} [{:.1} s]", start.elapsed().as_secs_f64())),
            Err(e) => self.line(id, name, false, format!("error: {e}")),
        }
    }
}

fn lattice(m: usize) -> FrequencyLattice {
    FrequencyLattice::new(2, m).expect("lattice")
}

fn basis_certification() -> Result<(bool, String)> {
    let start = Instant::now();
    let r = basis_report(lattice(256), &MeyerWindow::default(), &[1, 2, 3, 4, 5], SEED)?;
    let secs = start.elapsed().as_secs_f64();
    let pass = r.frames.len() == 6
        && r.worst_gram() < 1e-8
        && r.worst_partition() < 1e-10
        && r.worst_round_trip() < 1e-10
        && secs <= 60.0;
    Ok((
        pass,
        format!(
            "M = 256, {} frames: Gram {:.2e} (< 1e-8), partition {:.2e} (< 1e-10), round trip {:.2e} (< 1e-10), {secs:.1} s (<= 60 s)",
            r.frames.len(),
            r.worst_gram(),
            r.worst_partition(),
            r.worst_round_trip()
        ),
    ))
}

fn decomposition_identity() -> Result<(bool, String)> {
    let lat = lattice(64);
    let big = MeyerBasis::with_default_window(lat.doubled());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let u = band_limited_field(lat, 2 * i + 1)?;
        let v = band_limited_field(lat, 2 * i + 2)?;
        let t = 4f64.powf(-5.0 * rng.random::<f64>());
        worst = worst.max(paraproduct_decompose(&big, &u, &v, t)?.completeness_residual());
    }
    Ok((worst < 1e-10, format!("100 pairs at M = 64: worst relative residual {worst:.2e} (< 1e-10)")))
}

fn random_kind(rng: &mut ChaCha8Rng) -> KernelKind {
    let kinds = distinct_kinds(2);
    kinds[rng.random_range(0..kinds.len())]
}

fn exact_support() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    // low-frequency vanishing: data on M = 32, operators on the doubled lattice
    let small = MeyerBasis::with_default_window(lattice(32));
    let big = MeyerBasis::with_default_window(lattice(64));
    let mesh = TimeMesh::with_origin(0, 6, 4)?;
    let mut low: f64 = 0.0;
    for i in 0..50u64 {
        let a = random_field(&small, 2, 4.0, 100 + 2 * i)?;
        let b = random_field(&small, 2, 4.0, 101 + 2 * i)?;
        let u: Vec<SpectralField> = mesh.times().iter().map(|&t| heat_semigroup(&a, t)).collect::<Result<_>>()?;
        let v: Vec<SpectralField> = mesh.times().iter().map(|&t| heat_semigroup(&b, t)).collect::<Result<_>>()?;
        let eps = rng.random_range(1..=band_count(2));
        low = low.max(low_frequency_vanishing(&big, &mesh, &u, &v, eps, random_kind(&mut rng))?);
    }
    // coupling restriction: scaling products at j_s against atoms at j' >= j_s + 2
    let basis = MeyerBasis::with_default_window(lattice(64));
    let jm = basis.max_level();
    let mut coupling: f64 = 0.0;
    for _ in 0..50 {
        let j_s = rng.random_range(0..=jm - 2);
        let jp = rng.random_range(j_s + 2..=jm);
        let k: Vec<usize> = (0..2).map(|_| rng.random_range(0..1usize << j_s)).collect();
        let k2: Vec<usize> = (0..2).map(|_| rng.random_range(0..1usize << j_s)).collect();
        let kp: Vec<usize> = (0..2).map(|_| rng.random_range(0..1usize << jp)).collect();
        let eps = rng.random_range(1..=band_count(2));
        let tau = 4f64.powf(-4.0 * rng.random::<f64>());
        let kind = random_kind(&mut rng);
        let c = scaling_pair_coupling(&basis, tau, j_s, (&k, &k2), (eps, jp, &kp), kind)?;
        let prod = pointwise_product(&basis.atom(0, j_s, &k)?.spectrum, &basis.atom(0, j_s, &k2)?.spectrum)?;
        let target = parawave::kernels::apply_a(&basis.atom(eps, jp, &kp)?.spectrum, tau, kind)?;
        let scale = prod.norm_l2() * target.norm_l2();
        coupling = coupling.max(if scale > 0.0 { c.norm() / scale } else { c.norm() });
    }
    Ok((
        low < 1e-10 && coupling < 1e-10,
        format!("50 configurations each: low-frequency coefficients {low:.2e}, coupling {coupling:.2e} (both < 1e-10)"),
    ))
}

fn decay_certification() -> Result<(bool, String)> {
    let lat = lattice(128);
    let opts = SuiteOptions { seed: SEED, ..SuiteOptions::for_lattice(lat) };
    let ids = [
        EstimateId::KernelDecay,
        EstimateId::AtomDecayScaling,
        EstimateId::AtomDecayDetail,
        EstimateId::CouplingDecay,
        EstimateId::HeatDecayDetail,
        EstimateId::HeatDecayScaling,
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut at_base = 0.0;
    for id in ids {
        match certify_decay(id, &[lat, lat.doubled()], &opts) {
            Ok(c) => {
                at_base += c.seconds[0];
                let ok = c.stable() && c.configurations >= 100;
                pass &= ok;
                parts.push(format!(
                    "{id} C = {:.3e} spread {:.1e}{}",
                    c.constants[0],
                    c.spread,
                    if ok { "" } else { " (not certified)" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{id}: {e}"));
            }
        }
    }
    pass &= at_base <= 300.0;
    Ok((
        pass,
        format!("M = 128 vs 256, spread <= {STABILITY_TOL}: {}; {at_base:.1} s at M = 128 (<= 300 s)", parts.join("; ")),
    ))
}

fn experiment_options(p: f64, m: f64, ensemble: usize) -> ExperimentOptions {
    ExperimentOptions { p, m, ensemble, top: 3, shells: (0, 5), per_shell: 4 }
}

fn embedding() -> Result<(bool, String)> {
    let lats = [lattice(128), lattice(256)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, m) in [(4.0, 1.0), (3.0, 1.0), (4.0, 2.0)] {
        let c = certify_experiment(EstimateId::Embedding, &lats, &[SEED, SEED + 1], &experiment_options(p, m, 8))?;
        let finite = c.runs.iter().all(|r| r.constant.is_finite() && r.constant > 0.0);
        pass &= finite && c.consistent();
        let consts: Vec<String> = c.runs.iter().map(|r| format!("{:.3}", r.constant)).collect();
        parts.push(format!("(p, m) = ({p}, {m}): [{}] factor {:.3}", consts.join(", "), c.factor));
    }
    Ok((pass, format!("M = 128, 256 x 2 seeds, factor <= {EXPERIMENT_FACTOR}: {}", parts.join("; "))))
}

fn bilinear() -> Result<(bool, String)> {
    let lats = [lattice(128), lattice(256)];
    let c = certify_experiment(EstimateId::BilinearBound, &lats, &[SEED], &experiment_options(4.0, 1.0, 100))?;
    let finite = c.runs.iter().all(|r| r.constant.is_finite() && r.constant > 0.0);
    let pairs: Vec<usize> = c.runs.iter().map(|r| r.samples + r.skipped).collect();
    Ok((
        finite && c.consistent() && pairs.iter().all(|&n| n == 50),
        format!(
            "50 pairs, (p, m) = (4, 1): constants {:.4} (M = 128), {:.4} (M = 256), factor {:.3} (<= {EXPERIMENT_FACTOR})",
            c.runs[0].constant, c.runs[1].constant, c.factor
        ),
    ))
}

fn solver_config() -> SolverConfig {
    SolverConfig { samples_per_shell: 16, extra_shells: 6, ..SolverConfig::default() }
}

fn well_posedness() -> Result<(bool, String)> {
    let basis = MeyerBasis::with_default_window(lattice(128));
    let a = preset_data(&basis, Preset::SingleAtom, 1e-3, 4.0, SEED)?;
    let cfg = solver_config();
    let start = Instant::now();
    let s = picard_solve(&basis, &a, &cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let fine = picard_solve(&basis, &a, &SolverConfig { samples_per_shell: 2 * cfg.samples_per_shell, ..cfg.clone() })?;
    let change = (fine.norm.hm - s.norm.hm).abs() / fine.norm.hm;
    let worst_ratio = s.ratios.iter().copied().fold(0.0, f64::max);
    let pass = s.status == SolverStatus::Converged
        && s.iterations <= 6
        && worst_ratio < 0.5
        && s.residual < 1e-4
        && s.divergence <= 1e-9
        && change < 0.02
        && secs <= 300.0;
    Ok((
        pass,
        format!(
            "M = 128, scale 1e-3: {:?} in {} iterations (<= 6), max ratio {worst_ratio:.2e} (< 0.5), residual {:.2e} (< 1e-4), divergence {:.2e} (<= 1e-9), mesh doubling changes H_m by {:.2e} (< 0.02), {secs:.1} s (<= 300 s)",
            s.status, s.iterations, s.residual, s.divergence, change
        ),
    ))
}

fn scaling() -> Result<(bool, String)> {
    let basis = MeyerBasis::with_default_window(lattice(64));
    let a = preset_data(&basis, Preset::SingleAtom, 1e-3, 4.0, SEED)?;
    let r = scaling_check(&basis, &a, 2, &solver_config())?;
    Ok((
        r.deviation <= 0.01 && r.besov_deviation <= 1e-10,
        format!(
            "lambda = 2 from M = 64 to 128: solution deviation {:.2e} (<= 0.01), Besov deviation {:.2e} (<= 1e-10)",
            r.deviation, r.besov_deviation
        ),
    ))
}

fn quadratic_response() -> Result<(bool, String)> {
    let basis = MeyerBasis::with_default_window(lattice(64));
    let cfg = SolverConfig { max_iterations: 3, ..solver_config() };
    let first = |scale: f64| -> Result<f64> {
        let a = preset_data(&basis, Preset::SingleAtom, scale, 4.0, SEED)?;
        Ok(picard_solve(&basis, &a, &cfg)?.increments[0])
    };
    let (full, half) = (first(1e-3)?, first(5e-4)?);
    let factor = full / half;
    Ok((factor >= 3.0, format!("first increment {full:.3e} -> {half:.3e} when the data is halved: factor {factor:.3} (>= 3)")))
}

fn main() -> ExitCode {
    let mut out = Outcome { failures: 0 };
    out.run(1, "basis certification", basis_certification);
    out.run(2, "decomposition identity", decomposition_identity);
    out.run(3, "exact-support facts", exact_support);
    out.run(4, "decay certifications", decay_certification);
    out.run(5, "embedding", embedding);
    out.run(6, "bilinear boundedness", bilinear);
    out.run(7, "well-posedness", well_posedness);
    out.run(8, "scaling invariance", scaling);
    out.run(9, "quadratic smallness response", quadratic_response);
    println!("{} of 9 criteria passed", 9 - out.failures);
    if out.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
