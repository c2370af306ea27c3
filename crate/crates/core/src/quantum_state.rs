//! Truncated multimode Fock spaces, ladder operators and density operators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{trace_product, CMatrix};
use crate::tensor::{C64, ONE, ZERO};

pub const DEFAULT_MAX_DIM: usize = 4096;

/// Probability mass that state construction may discard to truncation.
pub const TRUNCATION_THRESHOLD: f64 = 1e-6;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    basis: Vec<Vec<usize>>,
    dim: usize,
}

impl FockSpace {
    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        Self::with_max_dim(cutoffs, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(cutoffs: &[usize], max_dim: usize) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(LabError::InvalidArgument("mode_count must be >= 1".into()));
        }
        if let Some(pos) = cutoffs.iter().position(|&c| c < 1) {
            return Err(LabError::InvalidArgument(format!(
                "cutoff for mode {pos} must be >= 1"
            )));
        }
        let mut dim: usize = 1;
        for &c in cutoffs {
            dim = dim
                .checked_mul(c + 1)
                .filter(|&d| d <= max_dim)
                .ok_or(LabError::SpaceTooLarge {
                    dim: cutoffs.iter().map(|&c| c as f64 + 1.0).product::<f64>() as usize,
                    max: max_dim,
                })?;
        }
        // Lexicographic enumeration, first mode slowest.
        let mut basis = Vec::with_capacity(dim);
        let mut occ = vec![0usize; cutoffs.len()];
        for _ in 0..dim {
            basis.push(occ.clone());
            for m in (0..cutoffs.len()).rev() {
                if occ[m] < cutoffs[m] {
                    occ[m] += 1;
                    break;
                }
                occ[m] = 0;
            }
        }
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            basis,
            dim,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    /// Position of an occupation tuple in the basis.
    pub fn index_of(&self, occupations: &[usize]) -> Option<usize> {
        if occupations.len() != self.cutoffs.len() {
            return None;
        }
        let mut idx = 0;
        for (&n, &c) in occupations.iter().zip(&self.cutoffs) {
            if n > c {
                return None;
            }
            idx = idx * (c + 1) + n;
        }
        Some(idx)
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoffs[mode + 1..].iter().map(|c| c + 1).product()
    }
}

pub fn build_fock_space(mode_count: usize, cutoffs: &[usize]) -> Result<FockSpace> {
    if mode_count != cutoffs.len() {
        return Err(LabError::InvalidArgument(format!(
            "mode_count {mode_count} does not match {} cutoffs",
            cutoffs.len()
        )));
    }
    FockSpace::new(cutoffs)
}

/// Annihilation and creation matrices for one mode.
pub fn ladder(space: &FockSpace, mode: usize) -> Result<(CMatrix, CMatrix)> {
    if mode >= space.mode_count() {
        return Err(LabError::IndexOutOfRange {
            index: mode,
            len: space.mode_count(),
        });
    }
    let stride = space.stride(mode);
    let mut a = CMatrix::zeros(space.dim(), space.dim());
    for (col, occ) in space.basis().iter().enumerate() {
        let n = occ[mode];
        if n > 0 {
            a[(col - stride, col)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    let adag = a.adjoint();
    Ok((a, adag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    pub amplitude: C64,
    pub occupations: Vec<usize>,
}

/// Recipe for a test state. Per-mode lists must have one entry per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum,
    Fock { occupations: Vec<usize> },
    Coherent { amplitudes: Vec<C64> },
    Thermal { mean_photons: Vec<f64> },
    Mixture { components: Vec<MixtureComponent> },
    PureSuperposition { terms: Vec<SuperpositionTerm> },
}

impl StateSpec {
    /// Classical amplitudes when the state is a coherent product (vacuum included).
    pub fn coherent_amplitudes(&self, mode_count: usize) -> Option<Vec<C64>> {
        match self {
            StateSpec::Vacuum => Some(vec![ZERO; mode_count]),
            StateSpec::Coherent { amplitudes } => Some(amplitudes.clone()),
            _ => None,
        }
    }

    /// Normal-ordered mode covariance `<a_m^dag a_n>` for zero-mean
    /// phase-insensitive Gaussian states.
    pub fn gaussian_covariance(&self, mode_count: usize) -> Option<CMatrix> {
        match self {
            StateSpec::Vacuum => Some(CMatrix::zeros(mode_count, mode_count)),
            StateSpec::Thermal { mean_photons } => Some(CMatrix::from_diagonal(
                &nalgebra::DVector::from_iterator(
                    mean_photons.len(),
                    mean_photons.iter().map(|&n| C64::new(n, 0.0)),
                ),
            )),
            _ => None,
        }
    }

    pub fn is_diagonal_in_number_basis(&self) -> bool {
        match self {
            StateSpec::Vacuum | StateSpec::Fock { .. } | StateSpec::Thermal { .. } => true,
            StateSpec::Mixture { components } => components
                .iter()
                .all(|c| c.state.is_diagonal_in_number_basis()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(space: &FockSpace, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(LabError::DimensionMismatch {
                expected: space.dim(),
                found: matrix.nrows(),
            });
        }
        let herm_err = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(LabError::InvalidState(format!(
                "not Hermitian (max deviation {herm_err:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(LabError::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -PSD_TOL {
            return Err(LabError::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    // Symmetrize so the solver sees an exactly Hermitian input.
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `Tr(rho * op)`.
pub fn trace_expect(rho: &DensityOperator, op: &CMatrix) -> Result<C64> {
    if op.nrows() != rho.dim() || op.ncols() != rho.dim() {
        return Err(LabError::DimensionMismatch {
            expected: rho.dim(),
            found: op.nrows(),
        });
    }
    Ok(trace_product(rho.matrix(), op))
}

pub fn make_state(space: &FockSpace, spec: &StateSpec) -> Result<DensityOperator> {
    let matrix = state_matrix(space, spec)?;
    DensityOperator::new(space, matrix)
}

fn check_len(space: &FockSpace, len: usize, what: &str) -> Result<()> {
    if len != space.mode_count() {
        return Err(LabError::InvalidArgument(format!(
            "{what}: expected {} per-mode entries, found {len}",
            space.mode_count()
        )));
    }
    Ok(())
}

fn state_matrix(space: &FockSpace, spec: &StateSpec) -> Result<CMatrix> {
    let dim = space.dim();
    match spec {
        StateSpec::Vacuum => {
            let mut m = CMatrix::zeros(dim, dim);
            m[(0, 0)] = ONE;
            Ok(m)
        }
        StateSpec::Fock { occupations } => {
            check_len(space, occupations.len(), "fock occupations")?;
            let idx = space.index_of(occupations).ok_or_else(|| {
                LabError::InvalidArgument(format!(
                    "fock occupations {occupations:?} exceed cutoffs {:?}",
                    space.cutoffs()
                ))
            })?;
            let mut m = CMatrix::zeros(dim, dim);
            m[(idx, idx)] = ONE;
            Ok(m)
        }
        StateSpec::Coherent { amplitudes } => {
            check_len(space, amplitudes.len(), "coherent amplitudes")?;
            let mut kept = 1.0;
            let per_mode: Vec<Vec<C64>> = amplitudes
                .iter()
                .zip(space.cutoffs())
                .map(|(&alpha, &cutoff)| {
                    let amps = coherent_amplitudes_truncated(alpha, cutoff);
                    kept *= amps.iter().map(|c| c.norm_sqr()).sum::<f64>();
                    amps
                })
                .collect();
            guard_truncation(1.0 - kept)?;
            let mut psi: Vec<C64> = space
                .basis()
                .iter()
                .map(|occ| {
                    occ.iter()
                        .zip(&per_mode)
                        .fold(ONE, |acc, (&n, amps)| acc * amps[n])
                })
                .collect();
            normalize(&mut psi);
            Ok(projector(&psi))
        }
        StateSpec::Thermal { mean_photons } => {
            check_len(space, mean_photons.len(), "thermal mean photons")?;
            if let Some(bad) = mean_photons.iter().find(|&&n| !(n >= 0.0) || !n.is_finite()) {
                return Err(LabError::InvalidArgument(format!(
                    "mean photon number {bad} must be finite and >= 0"
                )));
            }
            let mut kept = 1.0;
            let per_mode: Vec<Vec<f64>> = mean_photons
                .iter()
                .zip(space.cutoffs())
                .map(|(&nbar, &cutoff)| {
                    let ratio = nbar / (1.0 + nbar);
                    let probs: Vec<f64> = (0..=cutoff)
                        .map(|n| ratio.powi(n as i32) / (1.0 + nbar))
                        .collect();
                    kept *= probs.iter().sum::<f64>();
                    probs
                })
                .collect();
            guard_truncation(1.0 - kept)?;
            let mut diag: Vec<f64> = space
                .basis()
                .iter()
                .map(|occ| {
                    occ.iter()
                        .zip(&per_mode)
                        .fold(1.0, |acc, (&n, p)| acc * p[n])
                })
                .collect();
            let total: f64 = diag.iter().sum();
            diag.iter_mut().for_each(|p| *p /= total);
            Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                diag.into_iter().map(|p| C64::new(p, 0.0)),
            )))
        }
        StateSpec::Mixture { components } => {
            if components.is_empty() {
                return Err(LabError::InvalidArgument("mixture has no components".into()));
            }
            if components.iter().any(|c| !(c.weight >= 0.0)) {
                return Err(LabError::InvalidArgument(
                    "mixture weights must be nonnegative".into(),
                ));
            }
            let wsum: f64 = components.iter().map(|c| c.weight).sum();
            if (wsum - 1.0).abs() > 1e-12 {
                return Err(LabError::InvalidArgument(format!(
                    "mixture weights sum to {wsum}, expected 1"
                )));
            }
            let mut m = CMatrix::zeros(dim, dim);
            for c in components {
                m += state_matrix(space, &c.state)? * C64::new(c.weight, 0.0);
            }
            Ok(m)
        }
        StateSpec::PureSuperposition { terms } => {
            if terms.is_empty() {
                return Err(LabError::InvalidArgument("superposition has no terms".into()));
            }
            let mut psi = vec![ZERO; dim];
            for t in terms {
                check_len(space, t.occupations.len(), "superposition occupations")?;
                let idx = space.index_of(&t.occupations).ok_or_else(|| {
                    LabError::InvalidArgument(format!(
                        "occupations {:?} exceed cutoffs",
                        t.occupations
                    ))
                })?;
                psi[idx] += t.amplitude;
            }
            if psi.iter().all(|z| *z == ZERO) {
                return Err(LabError::InvalidArgument("superposition is the zero vector".into()));
            }
            normalize(&mut psi);
            Ok(projector(&psi))
        }
    }
}

/// Number-basis amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n <= cutoff`,
/// i.e. the displacement series applied to vacuum, before renormalization.
pub fn coherent_amplitudes_truncated(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    amps
}

fn guard_truncation(discarded: f64) -> Result<()> {
    if discarded > TRUNCATION_THRESHOLD {
        return Err(LabError::CutoffTooSmall {
            discarded,
            threshold: TRUNCATION_THRESHOLD,
        });
    }
    Ok(())
}

fn normalize(psi: &mut [C64]) {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
}

fn projector(psi: &[C64]) -> CMatrix {
    DMatrix::from_fn(psi.len(), psi.len(), |r, c| psi[r] * psi[c].conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dims_and_overflow() {
        assert_eq!(build_fock_space(1, &[3]).unwrap().dim(), 4);
        assert_eq!(build_fock_space(2, &[3, 3]).unwrap().dim(), 16);
        assert_eq!(build_fock_space(2, &[50, 50]).unwrap().dim(), 2601);
        assert!(matches!(
            build_fock_space(2, &[64, 64]),
            Err(LabError::SpaceTooLarge { dim: 4225, max: 4096 })
        ));
        assert!(matches!(
            build_fock_space(3, &[50, 50, 50]),
            Err(LabError::SpaceTooLarge { .. })
        ));
        assert!(matches!(
            build_fock_space(1, &[0]),
            Err(LabError::InvalidArgument(_))
        ));
    }

    #[test]
    fn basis_is_lexicographic_and_indexed() {
        let s = FockSpace::new(&[1, 2]).unwrap();
        assert_eq!(
            s.basis(),
            &[
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        for (i, occ) in s.basis().iter().enumerate() {
            assert_eq!(s.index_of(occ), Some(i));
        }
    }

    #[test]
    fn ladder_action() {
        let s = FockSpace::new(&[2]).unwrap();
        let (a, adag) = ladder(&s, 0).unwrap();
        assert_eq!(a[(0, 1)], ONE);
        assert!((a[(1, 2)] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(adag, a.adjoint());
        assert!(matches!(ladder(&s, 1), Err(LabError::IndexOutOfRange { .. })));
    }

    #[test]
    fn commutator_identity_below_top_level() {
        let s = FockSpace::new(&[5, 2]).unwrap();
        for mode in 0..2 {
            let (a, adag) = ladder(&s, mode).unwrap();
            let comm = &a * &adag - &adag * &a;
            for (i, occ) in s.basis().iter().enumerate() {
                if occ[mode] == s.cutoffs()[mode] {
                    continue;
                }
                for j in 0..s.dim() {
                    let expect = if i == j { ONE } else { ZERO };
                    assert!((comm[(i, j)] - expect).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn vacuum_and_fock() {
        let s = FockSpace::new(&[3]).unwrap();
        let vac = make_state(&s, &StateSpec::Vacuum).unwrap();
        assert_eq!(vac.matrix()[(0, 0)], ONE);
        let (a, adag) = ladder(&s, 0).unwrap();
        let num = &adag * &a;
        assert_eq!(trace_expect(&vac, &num).unwrap(), ZERO);
        let f1 = make_state(&s, &StateSpec::Fock { occupations: vec![1] }).unwrap();
        assert!((trace_expect(&f1, &num).unwrap() - ONE).norm() < 1e-15);
        let off_diag = f1
            .matrix()
            .iter()
            .enumerate()
            .filter(|(k, _)| k % (s.dim() + 1) != 0)
            .all(|(_, z)| *z == ZERO);
        assert!(off_diag);
        assert!(make_state(&s, &StateSpec::Fock { occupations: vec![4] }).is_err());
    }

    #[test]
    fn coherent_mean_amplitude() {
        let s = FockSpace::new(&[10]).unwrap();
        let rho = make_state(&s, &StateSpec::Coherent { amplitudes: vec![c(0.5, 0.0)] }).unwrap();
        let (a, _) = ladder(&s, 0).unwrap();
        let mean = trace_expect(&rho, &a).unwrap();
        assert!((mean - c(0.5, 0.0)).norm() < 1e-7);
        // Dense cross-check: <a> = sum_n c_n^* c_{n+1} sqrt(n+1).
        let amps = coherent_amplitudes_truncated(c(0.5, 0.0), 10);
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        let series: C64 = (0..10)
            .map(|n| amps[n].conj() * amps[n + 1] * ((n + 1) as f64).sqrt())
            .sum::<C64>()
            / norm;
        assert!((mean - series).norm() < 1e-14);
    }

    #[test]
    fn coherent_cutoff_guard() {
        let s = FockSpace::new(&[4]).unwrap();
        let err = make_state(&s, &StateSpec::Coherent { amplitudes: vec![c(2.0, 0.0)] });
        assert!(matches!(err, Err(LabError::CutoffTooSmall { .. })));
    }

    #[test]
    fn thermal_occupation() {
        let s = FockSpace::new(&[12]).unwrap();
        let rho = make_state(&s, &StateSpec::Thermal { mean_photons: vec![0.2] }).unwrap();
        let (a, adag) = ladder(&s, 0).unwrap();
        let n = trace_expect(&rho, &(&adag * &a)).unwrap();
        // Truncated geometric partial sum, independent of the matrix path.
        let x: f64 = 0.2 / 1.2;
        let z: f64 = (0..=12).map(|k| x.powi(k)).sum();
        let mean: f64 = (0..=12).map(|k| k as f64 * x.powi(k)).sum::<f64>() / z;
        assert!((n.re - mean).abs() < 1e-14);
        assert!((n.re - 0.2).abs() < 1e-6);
    }

    #[test]
    fn mixture_weights_checked() {
        let s = FockSpace::new(&[3]).unwrap();
        let bad = StateSpec::Mixture {
            components: vec![
                MixtureComponent { weight: 0.5, state: StateSpec::Vacuum },
                MixtureComponent { weight: 0.4, state: StateSpec::Vacuum },
            ],
        };
        assert!(make_state(&s, &bad).is_err());
        let good = StateSpec::Mixture {
            components: vec![
                MixtureComponent { weight: 0.5, state: StateSpec::Vacuum },
                MixtureComponent {
                    weight: 0.5,
                    state: StateSpec::Fock { occupations: vec![2] },
                },
            ],
        };
        let rho = make_state(&s, &good).unwrap();
        assert!((rho.matrix()[(2, 2)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn superposition_is_normalized() {
        let s = FockSpace::new(&[2, 2]).unwrap();
        let spec = StateSpec::PureSuperposition {
            terms: vec![
                SuperpositionTerm { amplitude: c(1.0, 0.0), occupations: vec![1, 0] },
                SuperpositionTerm { amplitude: c(0.0, 1.0), occupations: vec![0, 1] },
            ],
        };
        let rho = make_state(&s, &spec).unwrap();
        assert!((rho.matrix().trace() - ONE).norm() < 1e-15);
        assert!((rho.matrix()[(3, 1)] - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let s = FockSpace::new(&[1]).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = ONE;
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            DensityOperator::new(&s, m),
            Err(LabError::InvalidState(_))
        ));
    }
}
