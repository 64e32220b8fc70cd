//! State discrimination through the block state
//! `rho = sum_ij |i><j| (x) sqrt(eta_i rho_i) sqrt(eta_j rho_j)`.
//!
//! Optimal success for more than two states needs semidefinite programming
//! and is not computed; the pretty-good measurement and the best sampled
//! measurement are reported as lower bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lincore::{
    pinv_sqrt, psd_sqrt_clamped, tensor, trace_norm, validate_density, ComplexMatrix, DensityMatrix, Tolerances, C64,
    TOL_TRACE,
};
use crate::sample::random_povm;

/// Pseudo-inverse threshold on the support of `sum_j eta_j rho_j`.
pub const PINV_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QsdEnsemble {
    priors: Vec<f64>,
    states: Vec<ComplexMatrix>,
}

impl QsdEnsemble {
    pub fn new(priors: Vec<f64>, states: Vec<ComplexMatrix>) -> Result<Self> {
        if priors.is_empty() || priors.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if let Some(p) = priors.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::InvalidEnsemble(format!("negative prior {p}")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        let m = states[0].rows();
        let tol = Tolerances::default();
        let mut clean = Vec::with_capacity(states.len());
        for (i, s) in states.into_iter().enumerate() {
            if s.rows() != m || s.cols() != m {
                return Err(Error::InvalidEnsemble(format!("state {i} is not {m}x{m}")));
            }
            let d = validate_density(s, m, 1, &tol)
                .map_err(|e| Error::InvalidEnsemble(format!("state {i}: {e}")))?;
            clean.push(d.into_matrix());
        }
        Ok(QsdEnsemble { priors, states: clean })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }

    /// `sum_i eta_i tr(M_i rho_i)`
    pub fn success_probability(&self, povm: &[ComplexMatrix]) -> Result<f64> {
        if povm.len() != self.len() || povm.iter().any(|m| m.rows() != self.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "need {} measurement operators of size {}",
                self.len(),
                self.dim()
            )));
        }
        Ok(self
            .priors
            .iter()
            .zip(&self.states)
            .zip(povm)
            .map(|((eta, rho), m)| eta * (m * rho).trace().re)
            .sum())
    }
}

/// Block state with `dim_a` = number of states, `dim_b` = state dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct QsdState {
    pub rho: DensityMatrix,
}

/// The factor `A = (sqrt(eta_1 rho_1), ..., sqrt(eta_n rho_n))`, `m x nm`.
fn factor(ens: &QsdEnsemble) -> ComplexMatrix {
    let (n, m) = (ens.len(), ens.dim());
    let mut a = ComplexMatrix::zeros(m, n * m);
    for (i, (eta, rho)) in ens.priors.iter().zip(&ens.states).enumerate() {
        let s = psd_sqrt_clamped(&rho.scale_real(*eta));
        for r in 0..m {
            for c in 0..m {
                a[(r, i * m + c)] = s[(r, c)];
            }
        }
    }
    a
}

/// `rho = A^dag A`.
pub fn qsd_state(ens: &QsdEnsemble) -> Result<QsdState> {
    let a = factor(ens);
    let rho = (&a.adjoint() * &a).hermitian_part();
    let rho = validate_density(rho, ens.len(), ens.dim(), &Tolerances::default())?;
    Ok(QsdState { rho })
}

fn slot_projector(n: usize, m: usize, i: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    p[(i, i)] = C64::new(1.0, 0.0);
    tensor(&p, &ComplexMatrix::identity(m))
}

/// `p_i = tr(sqrt(rho) (|i><i| (x) I) sqrt(rho))` and
/// `omega_i = sqrt(rho) (|i><i| (x) I) sqrt(rho) / p_i`. Zero-weight slots
/// get the maximally mixed state as a placeholder.
pub fn qsd_ensemble(state: &QsdState) -> Result<QsdEnsemble> {
    let (n, m) = (state.rho.dim_a(), state.rho.dim_b());
    let dim = n * m;
    let sq = psd_sqrt_clamped(state.rho.matrix());
    let mut priors = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        let x = &(&sq * &slot_projector(n, m, i)) * &sq;
        let p = x.trace().re.max(0.0);
        priors.push(p);
        if p > 1e-14 {
            states.push(x.scale_real(1.0 / p).hermitian_part());
        } else {
            states.push(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64));
        }
    }
    let total: f64 = priors.iter().sum();
    for p in &mut priors {
        *p /= total;
    }
    QsdEnsemble::new(priors, states)
}

/// `(1 + ||eta_1 rho_1 - eta_2 rho_2||_1) / 2`
pub fn helstrom(ens: &QsdEnsemble) -> Result<f64> {
    if ens.len() != 2 {
        return Err(Error::InvalidEnsemble(format!(
            "Helstrom bound needs two states, got {}",
            ens.len()
        )));
    }
    let diff = &ens.states[0].scale_real(ens.priors[0]) - &ens.states[1].scale_real(ens.priors[1]);
    Ok(0.5 * (1.0 + trace_norm(&diff)))
}

/// Pretty-good measurement `S^{-1/2} eta_i rho_i S^{-1/2}`, with the kernel
/// of `S` shared evenly so the elements sum to the identity.
pub fn pgm(ens: &QsdEnsemble) -> Vec<ComplexMatrix> {
    let m = ens.dim();
    let mut s = ComplexMatrix::zeros(m, m);
    for (eta, rho) in ens.priors.iter().zip(&ens.states) {
        s = &s + &rho.scale_real(*eta);
    }
    let w = pinv_sqrt(&s, PINV_THRESHOLD);
    let support = &(&w * &s) * &w;
    let kernel = (&ComplexMatrix::identity(m) - &support).scale_real(1.0 / ens.len() as f64);
    ens.priors
        .iter()
        .zip(&ens.states)
        .map(|(eta, rho)| (&(&(&w * &rho.scale_real(*eta)) * &w) + &kernel).hermitian_part())
        .collect()
}

pub fn pgm_success(ens: &QsdEnsemble) -> Result<f64> {
    ens.success_probability(&pgm(ens))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    /// Largest `|sum eta_i tr(M_i rho_i) - sum p_i tr(N_i omega_i)|` over the
    /// tested measurements, together with `max |p_i - eta_i|`.
    pub max_deviation: f64,
    /// Largest `|p_i - eta_i|` alone.
    pub prior_deviation: f64,
    /// Largest deviation of a lifted measurement from a resolution of identity.
    pub povm_deviation: f64,
    /// Best success probability among the sampled measurements and the PGM.
    pub best_success: f64,
    pub pgm_success: f64,
    pub helstrom: Option<f64>,
    pub samples: usize,
}

/// Checks that discriminating `{rho_i, eta_i}` with a measurement `M` has the
/// same success probability as discriminating the extracted ensemble
/// `{omega_i, p_i}` with the lifted measurement
/// `N_i = sqrt(rho)^+ A^dag M_i A sqrt(rho)^+ + (I - Pi)/n`,
/// over `samples` random measurements and the PGM.
pub fn discrimination_equivalence_check(ens: &QsdEnsemble, samples: usize, seed: u64) -> Result<EquivalenceReport> {
    let (n, m) = (ens.len(), ens.dim());
    let dim = n * m;
    let state = qsd_state(ens)?;
    let extracted = qsd_ensemble(&state)?;
    let prior_deviation = ens
        .priors
        .iter()
        .zip(extracted.priors())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let a = factor(ens);
    let sq_pinv = pinv_sqrt(state.rho.matrix(), PINV_THRESHOLD);
    let sq = psd_sqrt_clamped(state.rho.matrix());
    let proj = &sq * &sq_pinv;
    let kernel = (&ComplexMatrix::identity(dim) - &proj).scale_real(1.0 / n as f64);
    let lift = |mi: &ComplexMatrix| -> ComplexMatrix {
        let core = (&(&(&(&sq_pinv * &a.adjoint()) * mi) * &a) * &sq_pinv).hermitian_part();
        &core + &kernel
    };

    let pgm_ops = pgm(ens);
    let pgm_p = ens.success_probability(&pgm_ops)?;
    let mut measurements = vec![pgm_ops];
    measurements.extend((0..samples).into_par_iter().map(|s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
        random_povm(m, n, &mut rng)
    }).collect::<Vec<_>>());

    let results: Vec<Result<(f64, f64, f64)>> = measurements
        .par_iter()
        .map(|ms| {
            let direct = ens.success_probability(ms)?;
            let lifted: Vec<ComplexMatrix> = ms.iter().map(lift).collect();
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for l in &lifted {
                sum = &sum + l;
            }
            let povm_dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
            let via = extracted.success_probability(&lifted)?;
            Ok((direct, (direct - via).abs(), povm_dev))
        })
        .collect();

    let mut best = 0.0f64;
    let mut max_dev = prior_deviation;
    let mut povm_deviation = 0.0f64;
    for r in results {
        let (p, dev, pd) = r?;
        best = best.max(p);
        max_dev = max_dev.max(dev);
        povm_deviation = povm_deviation.max(pd);
    }
    Ok(EquivalenceReport {
        max_deviation: max_dev,
        prior_deviation,
        povm_deviation,
        best_success: best,
        pgm_success: pgm_p,
        helstrom: if n == 2 { Some(helstrom(ens)?) } else { None },
        samples,
    })
}
