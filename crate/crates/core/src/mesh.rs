//! Time meshes aligned with the dyadic shells `4^{-j'} <= t < 4^{1-j'}`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeMesh {
    times: Vec<f64>,
    samples_per_shell: usize,
    /// Coarsest shell (largest times).
    shell_lo: u32,
    /// Finest shell (smallest positive times).
    shell_hi: u32,
    origin: bool,
}

impl TimeMesh {
    /// `samples_per_shell` geometric nodes `4^{-j'} 4^{i/S}` in every shell `shell_lo..=shell_hi`.
    pub fn shells(shell_lo: u32, shell_hi: u32, samples_per_shell: usize) -> Result<Self> {
        Self::build(shell_lo, shell_hi, samples_per_shell, false)
    }

    /// [`TimeMesh::shells`] with `t = 0` prepended, as used for Duhamel integrals.
    pub fn with_origin(shell_lo: u32, shell_hi: u32, samples_per_shell: usize) -> Result<Self> {
        Self::build(shell_lo, shell_hi, samples_per_shell, true)
    }

    fn build(shell_lo: u32, shell_hi: u32, samples_per_shell: usize, origin: bool) -> Result<Self> {
        if shell_lo > shell_hi {
            return Err(Error::Domain(format!("empty shell range {shell_lo}..={shell_hi}")));
        }
        if samples_per_shell == 0 {
            return Err(Error::Domain("samples per shell must be positive".into()));
        }
        let mut times = Vec::with_capacity(origin as usize + samples_per_shell * (shell_hi - shell_lo + 1) as usize);
        if origin {
            times.push(0.0);
        }
        for shell in (shell_lo..=shell_hi).rev() {
            let base = 4f64.powi(-(shell as i32));
            for i in 0..samples_per_shell {
                times.push(base * 4f64.powf(i as f64 / samples_per_shell as f64));
            }
        }
        Ok(Self { times, samples_per_shell, shell_lo, shell_hi, origin })
    }

    /// The same shells with `factor` times as many samples; every old node is kept.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::build(self.shell_lo, self.shell_hi, self.samples_per_shell * factor, self.origin)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn samples_per_shell(&self) -> usize {
        self.samples_per_shell
    }

    pub fn shell_range(&self) -> (u32, u32) {
        (self.shell_lo, self.shell_hi)
    }

    pub fn has_origin(&self) -> bool {
        self.origin
    }

    /// Node indices inside shell `j'`.
    pub fn shell_nodes(&self, shell: u32) -> Result<std::ops::Range<usize>> {
        if shell < self.shell_lo || shell > self.shell_hi {
            return Err(Error::Domain(format!(
                "shell {shell} not covered by mesh shells {}..={}",
                self.shell_lo, self.shell_hi
            )));
        }
        let start = self.origin as usize + (self.shell_hi - shell) as usize * self.samples_per_shell;
        Ok(start..start + self.samples_per_shell)
    }

    /// Index of the node with time `t` up to relative `1e-12`.
    pub fn find(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(s.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_shells_four_samples() {
        let m = TimeMesh::shells(2, 3, 4).unwrap();
        let t = m.times();
        assert_eq!(t.len(), 8);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t[..4].iter().all(|&x| (2f64.powi(-6)..2f64.powi(-4)).contains(&x)));
        assert!(t[4..].iter().all(|&x| (2f64.powi(-4)..2f64.powi(-2)).contains(&x)));
        assert_eq!(m.shell_nodes(3).unwrap(), 0..4);
        assert_eq!(m.shell_nodes(2).unwrap(), 4..8);
        assert!(m.shell_nodes(1).is_err());
    }

    #[test]
    fn refinement_keeps_nodes() {
        let m = TimeMesh::with_origin(0, 4, 4).unwrap();
        let r = m.refined(2).unwrap();
        assert_eq!(r.len(), 1 + 5 * 8);
        for &t in m.times() {
            assert!(r.find(t).is_some());
        }
        assert_eq!(r.times()[0], 0.0);
    }
}
