use parawave::meyer::MeyerBasis;
use parawave::norms::{ypm_norm, Trajectory};
use parawave::solver::{picard_from, picard_solve, preset_data, Preset, SolverConfig, SolverStatus};
use parawave::spectral::FrequencyLattice;

#[test]
fn zero_start_reaches_the_same_solution() {
    let basis = MeyerBasis::with_default_window(FrequencyLattice::new(2, 32).unwrap());
    let cfg = SolverConfig { max_iterations: 20, ..SolverConfig::default() };
    let a = preset_data(&basis, Preset::SingleAtom, 1e-3, cfg.p, 0).unwrap();
    let from_heat = picard_solve(&basis, &a, &cfg).unwrap();
    let mesh = cfg.mesh(basis.max_level()).unwrap();
    let zero = Trajectory::zeros(mesh, basis.lattice(), 2);
    let from_zero = picard_from(&basis, &a, &cfg, Some(&zero)).unwrap();
    assert_eq!(from_heat.status, SolverStatus::Converged);
    assert_eq!(from_zero.status, SolverStatus::Converged);
    assert!(from_zero.iterations > from_heat.iterations);
    let diff = from_zero.solution.axpy(-1.0, &from_heat.solution).unwrap();
    let shells = cfg.norm_shells(basis.max_level());
    let gap = ypm_norm(&basis, &diff, &cfg.norm_options(), shells).unwrap().total();
    assert!(gap <= 1e-8 * from_heat.norm.total(), "gap {gap:e}");
}
