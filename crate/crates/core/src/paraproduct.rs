//! Level projections, the paraproduct split of `u v` and the bilinear Duhamel operators
//! `B_l`, `B_{l,l',l''}` with their sub-operators.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::duhamel::duhamel_integral;
use crate::error::{Error, Result};
use crate::kernels::{apply_a, apply_symbol, KernelKind};
use crate::mesh::TimeMesh;
use crate::meyer::{band_count, relative_leakage, MeyerBasis, ParameterIndexSet};
use crate::norms::{ypm_norm, NormOptions, Trajectory};
use crate::spectral::{pointwise_product, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `P_j`: scaling band.
    P,
    /// `Q_j`: all detail bands.
    Q,
    /// `Q^eps_j`: one detail band.
    Band(u8),
}

pub fn level_project(basis: &MeyerBasis, f: &SpectralField, j: i64, kind: Projection) -> Result<SpectralField> {
    let j = basis.check_level(j)?;
    let lat = basis.lattice();
    if f.lattice() != lat {
        return Err(Error::ShapeMismatch("field and basis live on different lattices".into()));
    }
    let n = lat.dim();
    let bands: Vec<u8> = match kind {
        Projection::P => vec![0],
        Projection::Q => (1..=band_count(n)).collect(),
        Projection::Band(e) => {
            if e == 0 || e > band_count(n) {
                return Err(Error::Domain(format!("detail band {e} out of range for n = {n}")));
            }
            vec![e]
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); lat.len()];
    for e in bands {
        let a = basis.band_coefficients(f, e, j);
        basis.synthesize_band_into(&a, e, j, &mut out);
    }
    let out = SpectralField::from_values(lat, out, false)?;
    Ok(if f.is_real() { out.real_part() } else { out })
}

/// Level matched to time `s`; the origin uses the finest level.
pub fn level_at(s: f64, j_max: u32) -> Result<u32> {
    if s == 0.0 {
        return Ok(j_max);
    }
    Ok(ParameterIndexSet::new(s, j_max)?.j_t())
}

/// The fourteen terms of the split of `u v` around level `j_t`.
///
/// High terms sum over `2 + j_t <= j <= j_max`; `mid_*` sit at level `1 + j_t` and `low_*`
/// at level `j_t`.
#[derive(Clone, Debug)]
pub struct ParaproductTerms {
    pub j_t: u32,
    pub p2_q: SpectralField,
    pub q2_q: SpectralField,
    pub q1_q: SpectralField,
    pub q_q: SpectralField,
    pub q_q1: SpectralField,
    pub q_q2: SpectralField,
    pub q_p2: SpectralField,
    pub mid_p_q: SpectralField,
    pub mid_q_q: SpectralField,
    pub mid_q_p: SpectralField,
    pub low_p_q: SpectralField,
    pub low_q_q: SpectralField,
    pub low_q_p: SpectralField,
    pub low_p_p: SpectralField,
    pub product: SpectralField,
    /// Energy share of the inputs outside the levels `j_t..=j_max`.
    pub tail: f64,
}

impl ParaproductTerms {
    pub fn named(&self) -> [(&'static str, &SpectralField); 14] {
        [
            ("P[j-2]u Q[j]v", &self.p2_q),
            ("Q[j-2]u Q[j]v", &self.q2_q),
            ("Q[j-1]u Q[j]v", &self.q1_q),
            ("Q[j]u Q[j]v", &self.q_q),
            ("Q[j]u Q[j-1]v", &self.q_q1),
            ("Q[j]u Q[j-2]v", &self.q_q2),
            ("Q[j]u P[j-2]v", &self.q_p2),
            ("P[jt+1]u Q[jt+1]v", &self.mid_p_q),
            ("Q[jt+1]u Q[jt+1]v", &self.mid_q_q),
            ("Q[jt+1]u P[jt+1]v", &self.mid_q_p),
            ("P[jt]u Q[jt]v", &self.low_p_q),
            ("Q[jt]u Q[jt]v", &self.low_q_q),
            ("Q[jt]u P[jt]v", &self.low_q_p),
            ("P[jt]u P[jt]v", &self.low_p_p),
        ]
    }

    pub fn sum(&self) -> SpectralField {
        let mut acc = SpectralField::zeros(self.product.lattice());
        for (_, f) in self.named() {
            acc = &acc + f;
        }
        acc
    }

    /// `||sum - u v||_2 / ||u v||_2`, zero for a vanishing product.
    pub fn completeness_residual(&self) -> f64 {
        let d = (&self.sum() - &self.product).norm_l2();
        let r = self.product.norm_l2();
        if r == 0.0 {
            d
        } else {
            d / r
        }
    }

    /// `(name, ||term||_2^2)` rows.
    pub fn energies(&self) -> Vec<(&'static str, f64)> {
        self.named().iter().map(|(k, f)| (*k, f.norm_l2().powi(2))).collect()
    }
}

struct Projections {
    p: Vec<SpectralField>,
    q: Vec<SpectralField>,
}

impl Projections {
    fn new(basis: &MeyerBasis, f: &SpectralField, lo: u32) -> Result<Self> {
        let jm = basis.max_level();
        let p = (lo..=jm).map(|j| level_project(basis, f, j as i64, Projection::P)).collect::<Result<_>>()?;
        let q = (lo..=jm).map(|j| level_project(basis, f, j as i64, Projection::Q)).collect::<Result<_>>()?;
        Ok(Self { p, q })
    }
}

pub fn paraproduct_decompose(basis: &MeyerBasis, u: &SpectralField, v: &SpectralField, t: f64) -> Result<ParaproductTerms> {
    let lat = basis.lattice();
    let u = u.resample(lat)?;
    let v = v.resample(lat)?;
    let product = pointwise_product(&u, &v)?;
    let jm = basis.max_level();
    let jt = level_at(t, jm)?;
    let tail = {
        let cu = basis.analyze_unchecked(&u, jt, jm)?;
        let cv = basis.analyze_unchecked(&v, jt, jm)?;
        relative_leakage(&u, &cu).max(relative_leakage(&v, &cv))
    };
    let pu = Projections::new(basis, &u, jt)?;
    let pv = Projections::new(basis, &v, jt)?;
    fn at(x: &[SpectralField], lo: u32, j: u32) -> &SpectralField {
        &x[(j - lo) as usize]
    }
    let mul = |a: &SpectralField, b: &SpectralField| pointwise_product(a, b);
    let zero = SpectralField::zeros(lat);
    let mut high = vec![zero.clone(); 7];
    for j in (jt + 2)..=jm {
        let pieces = [
            mul(at(&pu.p, jt, j - 2), at(&pv.q, jt, j))?,
            mul(at(&pu.q, jt, j - 2), at(&pv.q, jt, j))?,
            mul(at(&pu.q, jt, j - 1), at(&pv.q, jt, j))?,
            mul(at(&pu.q, jt, j), at(&pv.q, jt, j))?,
            mul(at(&pu.q, jt, j), at(&pv.q, jt, j - 1))?,
            mul(at(&pu.q, jt, j), at(&pv.q, jt, j - 2))?,
            mul(at(&pu.q, jt, j), at(&pv.p, jt, j - 2))?,
        ];
        for (h, x) in high.iter_mut().zip(pieces) {
            *h = &*h + &x;
        }
    }
    let (mid_p_q, mid_q_q, mid_q_p) = if jt < jm {
        let j = jt + 1;
        (mul(at(&pu.p, jt, j), at(&pv.q, jt, j))?, mul(at(&pu.q, jt, j), at(&pv.q, jt, j))?, mul(at(&pu.q, jt, j), at(&pv.p, jt, j))?)
    } else {
        (zero.clone(), zero.clone(), zero.clone())
    };
    let mut it = high.into_iter();
    let mut next = || it.next().expect("seven high terms");
    Ok(ParaproductTerms {
        j_t: jt,
        p2_q: next(),
        q2_q: next(),
        q1_q: next(),
        q_q: next(),
        q_q1: next(),
        q_q2: next(),
        q_p2: next(),
        mid_p_q,
        mid_q_q,
        mid_q_p,
        low_p_q: mul(at(&pu.p, jt, jt), at(&pv.q, jt, jt))?,
        low_q_q: mul(at(&pu.q, jt, jt), at(&pv.q, jt, jt))?,
        low_q_p: mul(at(&pu.q, jt, jt), at(&pv.p, jt, jt))?,
        low_p_p: mul(at(&pu.p, jt, jt), at(&pv.p, jt, jt))?,
        product,
        tail,
    })
}

fn check_samples(mesh: &TimeMesh, u: &[SpectralField], v: &[SpectralField]) -> Result<()> {
    if u.len() != mesh.len() || v.len() != mesh.len() {
        return Err(Error::ShapeMismatch(format!(
            "trajectories with {} and {} samples on a mesh of {} nodes",
            u.len(),
            v.len(),
            mesh.len()
        )));
    }
    if !mesh.has_origin() {
        return Err(Error::Precondition("Duhamel integrals need a mesh starting at the origin".into()));
    }
    Ok(())
}

/// `int_0^t e^{(t-s) Delta} N(s) ds` at every node, with the integrand built per node.
pub fn duhamel_of(mesh: &TimeMesh, integrand: impl Fn(usize) -> Result<SpectralField> + Sync + Send) -> Result<Vec<SpectralField>> {
    let nodes = (0..mesh.len()).into_par_iter().map(integrand).collect::<Result<Vec<_>>>()?;
    duhamel_integral(mesh, &nodes)
}

/// `B_kind(u, v)(t) = int_0^t A^{t-s}_kind (u(s) v(s)) ds` at every mesh node.
pub fn bilinear_b(mesh: &TimeMesh, u: &[SpectralField], v: &[SpectralField], kind: KernelKind) -> Result<Vec<SpectralField>> {
    check_samples(mesh, u, v)?;
    let integral = duhamel_of(mesh, |i| pointwise_product(&u[i], &v[i]))?;
    integral.iter().map(|f| apply_symbol(f, kind)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubOperator {
    /// `sum_{j >= 2+j_s} P_{j-2} u Q^eps_j v`
    Eps(u8),
    /// `sum_{j >= 2+j_s} Q_j u Q_j v`
    B1,
    /// `P_{j_s} u P_{j_s} v`
    B2,
}

/// Integrand of a sub-operator at one time with level `j_s`.
///
/// Projections spread up to `|m_i| < 2^{j+1}/3`, so `basis` should sit on the doubled
/// lattice of the inputs; they are resampled onto it.
pub fn family_integrand(basis: &MeyerBasis, u: &SpectralField, v: &SpectralField, j_s: u32, which: SubOperator) -> Result<SpectralField> {
    let jm = basis.max_level();
    let lat = basis.lattice();
    let u = &u.resample(lat)?;
    let v = &v.resample(lat)?;
    match which {
        SubOperator::Eps(e) => {
            let mut acc = SpectralField::zeros(lat);
            for j in (j_s + 2)..=jm {
                let pu = level_project(basis, u, j as i64 - 2, Projection::P)?;
                let qv = level_project(basis, v, j as i64, Projection::Band(e))?;
                acc = &acc + &pointwise_product(&pu, &qv)?;
            }
            Ok(acc)
        }
        SubOperator::B1 => {
            let mut acc = SpectralField::zeros(lat);
            for j in (j_s + 2)..=jm {
                let qu = level_project(basis, u, j as i64, Projection::Q)?;
                let qv = level_project(basis, v, j as i64, Projection::Q)?;
                acc = &acc + &pointwise_product(&qu, &qv)?;
            }
            Ok(acc)
        }
        SubOperator::B2 => {
            let pu = level_project(basis, u, j_s as i64, Projection::P)?;
            let pv = level_project(basis, v, j_s as i64, Projection::P)?;
            pointwise_product(&pu, &pv)
        }
    }
}

/// Sub-operator of `B_kind` with the level `j_s` matched to each quadrature node.
pub fn bilinear_sub(
    basis: &MeyerBasis,
    mesh: &TimeMesh,
    u: &[SpectralField],
    v: &[SpectralField],
    which: SubOperator,
    kind: KernelKind,
) -> Result<Vec<SpectralField>> {
    check_samples(mesh, u, v)?;
    let jm = basis.max_level();
    let times = mesh.times();
    let integral = duhamel_of(mesh, |i| family_integrand(basis, &u[i], &v[i], level_at(times[i], jm)?, which))?;
    integral.iter().map(|f| apply_symbol(f, kind)).collect()
}

/// `max_i ||coarse_i - fine_i|| / max_i ||fine_i||` over the nodes of `coarse_mesh`, which
/// must all be nodes of `fine_mesh`.
pub fn refinement_change(
    coarse_mesh: &TimeMesh,
    coarse: &[SpectralField],
    fine_mesh: &TimeMesh,
    fine: &[SpectralField],
) -> Result<f64> {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, &t) in coarse.iter().zip(coarse_mesh.times()) {
        let j = fine_mesh
            .find(t)
            .ok_or_else(|| Error::ShapeMismatch(format!("node {t} missing from the refined mesh")))?;
        diff = diff.max((a - &fine[j]).norm_l2());
        scale = scale.max(fine[j].norm_l2());
    }
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// Step-halving change above which a quadrature result is reported as too coarse.
pub const QUADRATURE_WARN: f64 = 0.01;

/// `max_{i, k} |<B_eps(u, v)(t_i), Phi^0_{j_t,k}>|` relative to `sup_s ||u(s)|| ||v(s)||`.
pub fn low_frequency_vanishing(
    basis: &MeyerBasis,
    mesh: &TimeMesh,
    u: &[SpectralField],
    v: &[SpectralField],
    eps: u8,
    kind: KernelKind,
) -> Result<f64> {
    let out = bilinear_sub(basis, mesh, u, v, SubOperator::Eps(eps), kind)?;
    let jm = basis.max_level();
    let scale = u.iter().zip(v).map(|(a, b)| a.norm_l2() * b.norm_l2()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for (f, &t) in out.iter().zip(mesh.times()).skip(1) {
        let jt = level_at(t, jm)?;
        let c = basis.band_coefficients(f, 0, jt);
        worst = worst.max(c.iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    Ok(worst / scale)
}

/// `<Phi^0_{j_s,k} Phi^0_{j_s,k''}, A^tau Phi^eps_{j',k'}>`.
pub fn scaling_pair_coupling(
    basis: &MeyerBasis,
    tau: f64,
    j_s: u32,
    (k, k2): (&[usize], &[usize]),
    (eps, jp, kp): (u8, u32, &[usize]),
    kind: KernelKind,
) -> Result<Complex64> {
    let a = basis.atom(0, j_s, k)?.spectrum;
    let b = basis.atom(0, j_s, k2)?.spectrum;
    let target = apply_a(&basis.atom(eps, jp, kp)?.spectrum, tau, kind)?;
    Ok(pointwise_product(&a, &b)?.inner(&target))
}

/// Kernel kinds with distinct symbols: all `First`, and `Third` with sorted indices.
pub fn distinct_kinds(dim: usize) -> Vec<KernelKind> {
    let mut out: Vec<KernelKind> = (0..dim).map(|l| KernelKind::First { l }).collect();
    for l in 0..dim {
        for lp in l..dim {
            for lpp in lp..dim {
                out.push(KernelKind::Third { l, lp, lpp });
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorNormResult {
    pub ratios: Vec<f64>,
    pub constant: f64,
    pub skipped: usize,
    pub notes: Vec<String>,
}

/// Max over pairs and kernel kinds of `||B(u, v)||_Y / (||u||_Y ||v||_Y)` for scalar trajectories
/// on a mesh starting at the origin; outputs are analysed with `basis`.
pub fn verify_operator_norm(
    basis: &MeyerBasis,
    pairs: &[(Trajectory, Trajectory)],
    opts: &NormOptions,
    shells: (u32, u32),
) -> Result<OperatorNormResult> {
    let n = basis.lattice().dim();
    let kinds = distinct_kinds(n);
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(idx, (u, v))| -> Result<std::result::Result<f64, String>> {
            if u.components() != 1 || v.components() != 1 {
                return Err(Error::ShapeMismatch("operator norms take scalar trajectories".into()));
            }
            let nu = ypm_norm(basis, u, opts, shells)?.total();
            let nv = ypm_norm(basis, v, opts, shells)?.total();
            if nu == 0.0 || nv == 0.0 {
                return Ok(Err(format!("pair {idx}: zero input norm, skipped")));
            }
            let mesh = u.mesh();
            let uf: Vec<SpectralField> = u.states().iter().map(|s| s[0].clone()).collect();
            let vf: Vec<SpectralField> = v.states().iter().map(|s| s[0].clone()).collect();
            check_samples(mesh, &uf, &vf)?;
            let integral = duhamel_of(mesh, |i| pointwise_product(&uf[i], &vf[i]))?;
            let mut best: f64 = 0.0;
            for &kind in &kinds {
                let out = integral.iter().map(|f| apply_symbol(f, kind)).collect::<Result<Vec<_>>>()?;
                let traj = Trajectory::scalar(mesh.clone(), out)?;
                best = best.max(ypm_norm(basis, &traj, opts, shells)?.total() / (nu * nv));
            }
            Ok(Ok(best))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::new();
    let mut notes = Vec::new();
    for r in rows {
        match r {
            Ok(x) => ratios.push(x),
            Err(s) => notes.push(s),
        }
    }
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(OperatorNormResult { skipped: notes.len(), ratios, constant, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::random_field;
    use crate::spectral::{heat_semigroup, FrequencyLattice};

    fn basis(m: usize) -> MeyerBasis {
        MeyerBasis::with_default_window(FrequencyLattice::new(2, m).unwrap())
    }

    fn heat_samples(a: &SpectralField, mesh: &TimeMesh) -> Vec<SpectralField> {
        mesh.times().iter().map(|&t| heat_semigroup(a, t).unwrap()).collect()
    }

    #[test]
    fn projections() {
        let b = basis(64);
        let f = random_field(&b, 3, 4.0, 1).unwrap();
        for j0 in 0..=b.max_level() {
            let mut acc = level_project(&b, &f, j0 as i64, Projection::P).unwrap();
            for j in j0..=b.max_level() {
                acc = &acc + &level_project(&b, &f, j as i64, Projection::Q).unwrap();
            }
            assert!((&acc - &f).norm_l2() <= 1e-10 * f.norm_l2());
        }
        let atom = b.atom(2, 3, &[1, 1]).unwrap().spectrum;
        for j in [0, 1, 2, 4] {
            assert!(level_project(&b, &atom, j, Projection::Q).unwrap().norm_l2() < 1e-10);
        }
        let q3 = level_project(&b, &atom, 3, Projection::Band(2)).unwrap();
        assert!((&q3 - &atom).norm_l2() < 1e-10);
        // spectrum of P_j within |xi_i| <= (4 pi / 3) 2^j, i.e. |m_i| <= 2^{j+1} / 3
        let p2 = level_project(&b, &f, 2, Projection::P).unwrap();
        let lat = b.lattice();
        for (i, v) in p2.values().iter().enumerate() {
            let m = lat.freq(i);
            if m[0].abs() as f64 > 8.0 / 3.0 || m[1].abs() as f64 > 8.0 / 3.0 {
                assert!(v.norm() < 1e-12);
            }
        }
        assert!(level_project(&b, &f, 9, Projection::P).is_err());
        assert!(level_project(&b, &f, -1, Projection::Q).is_err());
        assert!(level_project(&b, &f, 1, Projection::Band(4)).is_err());
    }

    #[test]
    fn decomposition_complete() {
        let b = basis(64);
        let big = MeyerBasis::with_default_window(b.lattice().doubled());
        for seed in 0..4 {
            let u = random_field(&b, 3, 4.0, 2 * seed).unwrap();
            let v = random_field(&b, 3, 4.0, 2 * seed + 1).unwrap();
            for &t in &[1e-4, 0.01, 0.1, 2.0] {
                let terms = paraproduct_decompose(&big, &u, &v, t).unwrap();
                assert!(terms.completeness_residual() < 1e-10, "{}", terms.completeness_residual());
                assert!(terms.tail < 1e-12);
            }
        }
        let zero = SpectralField::zeros(b.lattice());
        let v = random_field(&b, 3, 4.0, 9).unwrap();
        let terms = paraproduct_decompose(&big, &zero, &v, 0.01).unwrap();
        assert!(terms.named().iter().all(|(_, f)| f.max_abs() == 0.0));
    }

    #[test]
    fn same_level_atoms_hit_only_qq_terms() {
        let b = basis(64);
        let big = MeyerBasis::with_default_window(b.lattice().doubled());
        let u = b.atom(1, 3, &[3, 5]).unwrap().spectrum;
        let v = b.atom(3, 3, &[7, 2]).unwrap().spectrum;
        let terms = paraproduct_decompose(&big, &u, &v, 2f64.powi(-2)).unwrap();
        assert_eq!(terms.j_t, 1);
        let allowed = ["Q[j-2]u Q[j]v", "Q[j-1]u Q[j]v", "Q[j]u Q[j]v", "Q[j]u Q[j-1]v", "Q[j]u Q[j-2]v"];
        for (name, f) in terms.named() {
            if !allowed.contains(&name) {
                assert!(f.norm_l2() < 1e-10, "{name}");
            }
        }
        assert!(terms.q_q.norm_l2() > 1e-3);
    }

    #[test]
    fn bilinear_linear_in_each_argument() {
        let b = basis(32);
        let mesh = TimeMesh::with_origin(0, 6, 4).unwrap();
        let u = heat_samples(&random_field(&b, 2, 4.0, 1).unwrap(), &mesh);
        let v = heat_samples(&random_field(&b, 2, 4.0, 2).unwrap(), &mesh);
        let kind = KernelKind::Third { l: 0, lp: 1, lpp: 1 };
        let base = bilinear_b(&mesh, &u, &v, kind).unwrap();
        let u2: Vec<_> = u.iter().map(|f| f.scale(2.0)).collect();
        let doubled = bilinear_b(&mesh, &u2, &v, kind).unwrap();
        for (a, d) in base.iter().zip(&doubled) {
            assert!((&a.scale(2.0) - d).norm_l2() <= 1e-12 * d.norm_l2().max(1e-300));
        }
        let swapped = bilinear_b(&mesh, &v, &u, kind).unwrap();
        for (a, s) in base.iter().zip(&swapped) {
            assert!((a - s).norm_l2() <= 1e-12 * a.norm_l2().max(1e-300));
        }
        let zero = vec![SpectralField::zeros(b.lattice()); mesh.len()];
        assert!(bilinear_b(&mesh, &zero, &v, kind).unwrap().iter().all(|f| f.max_abs() == 0.0));
        assert!(bilinear_b(&TimeMesh::shells(0, 6, 4).unwrap(), &u, &v, kind).is_err());
    }

    #[test]
    fn step_halving_order() {
        let b = basis(32);
        let coarse = TimeMesh::with_origin(0, 8, 4).unwrap();
        let a = random_field(&b, 2, 4.0, 5).unwrap();
        let c = random_field(&b, 2, 4.0, 6).unwrap();
        let kind = KernelKind::First { l: 0 };
        let run = |m: &TimeMesh| bilinear_b(m, &heat_samples(&a, m), &heat_samples(&c, m), kind).unwrap();
        let (m2, m4) = (coarse.refined(2).unwrap(), coarse.refined(4).unwrap());
        let (r1, r2, r4) = (run(&coarse), run(&m2), run(&m4));
        let e1 = refinement_change(&coarse, &r1, &m2, &r2).unwrap();
        let e2 = refinement_change(&m2, &r2, &m4, &r4).unwrap();
        let order = (e1 / e2).log2();
        assert!(order >= 1.8, "observed order {order}");
        assert!(e2 < QUADRATURE_WARN, "{e1} {e2}");
    }

    #[test]
    fn sub_operators_sum_to_full() {
        let b = basis(32);
        let mesh = TimeMesh::with_origin(0, 5, 4).unwrap();
        let u = heat_samples(&random_field(&b, 1, 4.0, 3).unwrap(), &mesh);
        let v = heat_samples(&random_field(&b, 1, 4.0, 4).unwrap(), &mesh);
        let kind = KernelKind::Third { l: 1, lp: 0, lpp: 1 };
        let full = bilinear_b(&mesh, &u, &v, kind).unwrap();
        let times = mesh.times();
        let split = duhamel_of(&mesh, |i| Ok(paraproduct_decompose(&b, &u[i], &v[i], times[i])?.sum())).unwrap();
        for (f, s) in full.iter().zip(&split) {
            let s = apply_symbol(s, kind).unwrap();
            assert!((f - &s).norm_l2() <= 1e-10 * f.norm_l2().max(1e-300));
        }
    }

    #[test]
    fn b2_vanishes_without_scaling_content() {
        let b = basis(32);
        let big = basis(64);
        let u = b.atom(1, 3, &[0, 1]).unwrap().spectrum;
        let v = b.atom(2, 3, &[4, 1]).unwrap().spectrum;
        for js in 0..=3 {
            let f = family_integrand(&big, &u, &v, js, SubOperator::B2).unwrap();
            assert!(f.norm_l2() < 1e-10);
        }
        assert!(family_integrand(&big, &u, &v, 4, SubOperator::B2).unwrap().norm_l2() > 1e-3);
    }

    #[test]
    fn low_frequencies_vanish() {
        let b = basis(32);
        let big = basis(64);
        let mesh = TimeMesh::with_origin(0, 6, 4).unwrap();
        let u = heat_samples(&random_field(&b, 2, 4.0, 7).unwrap(), &mesh);
        let v = heat_samples(&random_field(&b, 2, 4.0, 8).unwrap(), &mesh);
        for eps in 1..=3 {
            let r = low_frequency_vanishing(&big, &mesh, &u, &v, eps, KernelKind::Third { l: 0, lp: 0, lpp: 1 }).unwrap();
            assert!(r < 1e-10, "eps {eps}: {r}");
        }
    }

    #[test]
    fn coupling_restriction() {
        let b = basis(64);
        let kind = KernelKind::Third { l: 0, lp: 1, lpp: 1 };
        for (js, jp) in [(0, 2), (1, 3), (2, 4), (0, 4)] {
            let c = scaling_pair_coupling(&b, 0.01, js, (&[0, 0], &[0, 0]), (3, jp, &[1, 2]), kind).unwrap();
            assert!(c.norm() < 1e-12, "{js} {jp}: {c}");
        }
        let c = scaling_pair_coupling(&b, 0.001, 2, (&[1, 0], &[1, 1]), (1, 3, &[2, 1]), KernelKind::First { l: 0 }).unwrap();
        assert!(c.norm() > 1e-8);
    }

    #[test]
    fn operator_norm_skips_zero_pairs() {
        let b = basis(32);
        let mesh = TimeMesh::with_origin(0, 5, 4).unwrap();
        let zero = Trajectory::zeros(mesh.clone(), b.lattice(), 1);
        let r = verify_operator_norm(&b, &[(zero.clone(), zero)], &NormOptions::new(4.0, 1.0), (0, 3)).unwrap();
        assert_eq!((r.skipped, r.constant), (1, 0.0));
        let u = Trajectory::scalar(mesh.clone(), heat_samples(&random_field(&b, 1, 4.0, 1).unwrap(), &mesh)).unwrap();
        let r = verify_operator_norm(&b, &[(u.clone(), u)], &NormOptions::new(4.0, 1.0), (0, 3)).unwrap();
        assert!(r.constant.is_finite() && r.constant > 0.0);
    }
}
