//! Classical and quantum Fisher information, and a maximum-likelihood check
//! of the Cramer-Rao bound.
//!
//! Every quantity here depends on the bipartite state only through its
//! reduced state on A, since all channels and measurements act as `X (x) I_B`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lincore::{eigh, partial_trace_b, ComplexMatrix, DensityMatrix, C64, TOL_PSD, TOL_TRACE};
use crate::resource::{KrausElement, PioChannel, P_FLOOR};

const IMAG_TOL: f64 = 1e-10;

/// Probabilities `P(l|eps0)` and their derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub probs: Vec<f64>,
    pub dprobs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>, dprobs: Vec<f64>) -> Result<Self> {
        if probs.len() != dprobs.len() || probs.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities with {} derivatives",
                probs.len(),
                dprobs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| p.is_nan() || **p < -TOL_TRACE) {
            return Err(Error::InvalidDistribution(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let dtotal: f64 = dprobs.iter().sum();
        if !dtotal.is_finite() || dtotal.abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("derivatives sum to {dtotal}")));
        }
        Ok(OutcomeDistribution { probs, dprobs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A measurement on subsystem A.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let n = first.rows();
        let mut sum = ComplexMatrix::zeros(n, n);
        for (k, m) in elements.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::InvalidPovm(format!("element {k} is not {n}x{n}")));
            }
            let residual = m.hermiticity_residual();
            if residual > crate::lincore::TOL_HERM {
                return Err(Error::InvalidPovm(format!(
                    "element {k} not Hermitian (residual {residual:e})"
                )));
            }
            let min = eigh(m).values.last().copied().unwrap_or(0.0);
            if min < -TOL_PSD {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {min:e}"
                )));
            }
            sum = &sum + m;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(n));
        if dev > TOL_TRACE {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {dev:e}"
            )));
        }
        Ok(Povm { elements })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn projective(basis: &ComplexMatrix) -> Result<Self> {
        Self::new(
            (0..basis.cols())
                .map(|k| ComplexMatrix::projector(&basis.column(k)))
                .collect(),
        )
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Diagonal generator `H = sum_n d_n |n><n|`, `d_n` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalGenerator {
    d: Vec<f64>,
}

impl DiagonalGenerator {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidArgument("empty generator".into()));
        }
        if let Some((i, &x)) = d.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!(
                "generator entry {i} = {x} outside [0, 1]"
            )));
        }
        Ok(DiagonalGenerator { d })
    }

    /// `|i><i|`
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange(format!("generator index {i} >= {n}")));
        }
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        Self::new(d)
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }
}

fn check_dims(ch: &PioChannel, rho: &DensityMatrix) -> Result<()> {
    if ch.dim_a() != rho.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, state has dim_a = {}",
            ch.dim_a(),
            rho.dim_a()
        )));
    }
    Ok(())
}

/// `(P_l, dP_l)` of one element on a reduced state.
fn element_prob(el: &KrausElement, rho_a: &ComplexMatrix, eps0: f64) -> (C64, C64) {
    let a = el.amplitudes(eps0);
    let n = a.len();
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for i in 0..n {
        if a[i].norm_sqr() == 0.0 {
            continue;
        }
        for j in 0..n {
            if el.targets[i] != el.targets[j] {
                continue;
            }
            let z = a[i] * a[j].conj() * rho_a[(i, j)];
            p += z;
            dp += z * C64::new(0.0, el.deriv[i] - el.deriv[j]);
        }
    }
    (p, dp)
}

/// Post-selective outcome distribution computed from a reduced state.
pub fn outcome_distribution_reduced(
    ch: &PioChannel,
    rho_a: &ComplexMatrix,
    eps0: f64,
) -> OutcomeDistribution {
    let (probs, dprobs) = ch
        .elements()
        .iter()
        .map(|el| {
            let (p, dp) = element_prob(el, rho_a, eps0);
            debug_assert!(p.im.abs() < IMAG_TOL && dp.im.abs() < IMAG_TOL);
            (p.re.max(0.0), dp.re)
        })
        .unzip();
    OutcomeDistribution { probs, dprobs }
}

/// `P(l|eps0) = tr(K_l rho_A K_l^dag)` and its analytic derivative.
pub fn outcome_distribution(ch: &PioChannel, rho: &DensityMatrix, eps0: f64) -> Result<OutcomeDistribution> {
    check_dims(ch, rho)?;
    let rho_a = partial_trace_b(rho);
    let mut probs = Vec::with_capacity(ch.elements().len());
    let mut dprobs = Vec::with_capacity(ch.elements().len());
    for el in ch.elements() {
        let (p, dp) = element_prob(el, &rho_a, eps0);
        if p.im.abs() > IMAG_TOL || dp.im.abs() > IMAG_TOL {
            return Err(Error::InvalidDistribution(format!(
                "complex probability {p} / derivative {dp}"
            )));
        }
        probs.push(p.re.max(0.0));
        dprobs.push(dp.re);
    }
    Ok(OutcomeDistribution { probs, dprobs })
}

/// `sum_{P_l >= p_floor} dP_l^2 / P_l`
pub fn classical_fi(dist: &OutcomeDistribution) -> f64 {
    dist.probs
        .iter()
        .zip(&dist.dprobs)
        .filter(|(p, _)| **p >= P_FLOOR)
        .map(|(p, dp)| dp * dp / p)
        .sum()
}

/// Convenience wrapper: post-selective Fisher information of a channel on a state.
pub fn channel_fi(ch: &PioChannel, rho: &DensityMatrix, eps0: f64) -> Result<f64> {
    Ok(classical_fi(&outcome_distribution(ch, rho, eps0)?))
}

/// Evolved reduced state `sum_l K_l rho_A K_l^dag` and its derivative
/// `sum_l K_l i[D_l, rho_A] K_l^dag`.
pub fn evolved_reduced(ch: &PioChannel, rho_a: &ComplexMatrix, eps0: f64) -> (ComplexMatrix, ComplexMatrix) {
    let n = ch.dim_a();
    let mut rho = ComplexMatrix::zeros(n, n);
    let mut drho = ComplexMatrix::zeros(n, n);
    for el in ch.elements() {
        let a = el.amplitudes(eps0);
        for i in 0..n {
            if a[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                if a[j].norm_sqr() == 0.0 {
                    continue;
                }
                let z = a[i] * a[j].conj() * rho_a[(i, j)];
                let (ti, tj) = (el.targets[i], el.targets[j]);
                rho[(ti, tj)] += z;
                drho[(ti, tj)] += z * C64::new(0.0, el.deriv[i] - el.deriv[j]);
            }
        }
    }
    (rho, drho)
}

fn check_povm(m: &Povm, n: usize) -> Result<()> {
    if m.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "POVM acts on dimension {}, channel on {n}",
            m.dim()
        )));
    }
    Ok(())
}

/// Distribution of a measurement on A after the full (non-post-selected) channel.
pub fn povm_distribution(m: &Povm, ch: &PioChannel, rho: &DensityMatrix, eps0: f64) -> Result<OutcomeDistribution> {
    check_dims(ch, rho)?;
    check_povm(m, ch.dim_a())?;
    let (r, dr) = evolved_reduced(ch, &partial_trace_b(rho), eps0);
    let probs = m.elements().iter().map(|e| (e * &r).trace().re.max(0.0)).collect();
    let dprobs = m.elements().iter().map(|e| (e * &dr).trace().re).collect();
    Ok(OutcomeDistribution { probs, dprobs })
}

pub fn fi_of_povm(m: &Povm, ch: &PioChannel, rho: &DensityMatrix, eps0: f64) -> Result<f64> {
    Ok(classical_fi(&povm_distribution(m, ch, rho, eps0)?))
}

/// SLD quantum Fisher information of a family with value `rho` and
/// derivative `drho` at the working point:
/// `2 sum_{p_i + p_j >= p_floor} |<i|drho|j>|^2 / (p_i + p_j)`.
pub fn qfi_from_derivative(rho: &ComplexMatrix, drho: &ComplexMatrix) -> f64 {
    let eig = eigh(rho);
    let v = &eig.vectors;
    let d = &(&v.adjoint() * drho) * v;
    let n = eig.values.len();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = eig.values[i].max(0.0) + eig.values[j].max(0.0);
            if s >= P_FLOOR {
                f += 2.0 * d[(i, j)].norm_sqr() / s;
            }
        }
    }
    f
}

/// Symmetric logarithmic derivative `L` with `drho = (L rho + rho L) / 2` on
/// the support, zero on the kernel-kernel block.
pub fn sld(rho: &ComplexMatrix, drho: &ComplexMatrix) -> ComplexMatrix {
    let eig = eigh(rho);
    let v = &eig.vectors;
    let mut d = &(&v.adjoint() * drho) * v;
    let n = eig.values.len();
    for i in 0..n {
        for j in 0..n {
            let s = eig.values[i].max(0.0) + eig.values[j].max(0.0);
            d[(i, j)] = if s >= P_FLOOR {
                d[(i, j)] * (2.0 / s)
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }
    (&(v * &d) * &v.adjoint()).hermitian_part()
}

/// Eigenvectors of the SLD, as columns. Measuring in this basis attains the
/// quantum Fisher information.
pub fn sld_eigenbasis(rho: &ComplexMatrix, drho: &ComplexMatrix) -> ComplexMatrix {
    eigh(&sld(rho, drho)).vectors
}

/// Maximum of [`fi_of_povm`] over all measurements on A, from the SLD
/// formula applied to the evolved reduced family.
pub fn qfi_family(ch: &PioChannel, rho: &DensityMatrix, eps0: f64) -> Result<f64> {
    check_dims(ch, rho)?;
    let (r, dr) = evolved_reduced(ch, &partial_trace_b(rho), eps0);
    Ok(qfi_from_derivative(&r, &dr))
}

/// QFI of `exp(-iH eps) rho_A exp(iH eps)` for diagonal `H`:
/// `2 sum (p_i - p_j)^2 / (p_i + p_j) |<i|H|j>|^2`.
pub fn qfi_unitary(rho_a: &ComplexMatrix, h: &DiagonalGenerator) -> Result<f64> {
    if !rho_a.is_square() || rho_a.rows() != h.values().len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} state with a generator of length {}",
            rho_a.rows(),
            rho_a.cols(),
            h.values().len()
        )));
    }
    let eig = eigh(rho_a);
    let n = eig.values.len();
    let v = &eig.vectors;
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (eig.values[i].max(0.0), eig.values[j].max(0.0));
            let s = pi + pj;
            if s < P_FLOOR {
                continue;
            }
            let hij: C64 = (0..n).map(|k| v[(k, i)].conj() * h.values()[k] * v[(k, j)]).sum();
            f += 2.0 * (pi - pj).powi(2) / s * hij.norm_sqr();
        }
    }
    Ok(f)
}

/// Measures the output of every element in an orthonormal basis
/// `{phi_i}` of A, giving the rank-one channel `{|i><phi_i| K_l}`.
pub fn compose_measurement(ch: &PioChannel, basis: &ComplexMatrix) -> Result<PioChannel> {
    let n = ch.dim_a();
    if basis.rows() != n || basis.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "measurement basis must be {n}x{n}"
        )));
    }
    let mut out = Vec::with_capacity(ch.elements().len() * n);
    for el in ch.elements() {
        for i in 0..n {
            let coeffs = (0..n)
                .map(|k| el.coeffs[k] * basis[(el.targets[k], i)].conj())
                .collect();
            out.push(KrausElement::new(vec![i; n], coeffs, el.phase0.clone(), el.deriv.clone()));
        }
    }
    Ok(PioChannel::new_unchecked(n, out).with_deriv_scale(ch.deriv_bound()))
}

/// Outcome of [`mle_simulation`].
#[derive(Clone, Debug, PartialEq)]
pub struct MleReport {
    pub mean: f64,
    pub variance: f64,
    pub crb: f64,
    pub fisher_information: f64,
}

impl MleReport {
    pub fn ratio(&self) -> f64 {
        self.variance / self.crb
    }
}

/// Per-outcome trigonometric polynomial `P_l(eps) = sum_k c_k exp(i w_k eps)`.
struct Likelihood {
    terms: Vec<Vec<(f64, C64)>>,
}

impl Likelihood {
    fn new(ch: &PioChannel, rho_a: &ComplexMatrix) -> Self {
        let n = ch.dim_a();
        let terms = ch
            .elements()
            .iter()
            .map(|el| {
                let a = el.amplitudes(0.0);
                let mut t = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        if el.targets[i] == el.targets[j] {
                            let z = a[i] * a[j].conj() * rho_a[(i, j)];
                            if z.norm() > 0.0 {
                                t.push((el.deriv[i] - el.deriv[j], z));
                            }
                        }
                    }
                }
                t
            })
            .collect();
        Likelihood { terms }
    }

    fn prob(&self, l: usize, eps: f64) -> f64 {
        self.terms[l]
            .iter()
            .map(|(w, z)| (z * C64::from_polar(1.0, w * eps)).re)
            .sum()
    }

    fn log_likelihood(&self, counts: &[u64], eps: f64) -> f64 {
        let mut ll = 0.0;
        for (l, &k) in counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let p = self.prob(l, eps);
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += k as f64 * p.ln();
        }
        ll
    }
}

const MLE_GRID: usize = 256;
const MLE_TOL: f64 = 1e-6;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn sample_counts(probs: &[f64], n: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (l, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if l + 1 == probs.len() {
            counts[l] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        counts[l] = k;
        left -= k;
        mass -= p;
    }
    counts
}

/// Simulates `n_trials` experiments of `n_shots` outcomes each at `eps_true`
/// and returns the spread of the maximum-likelihood estimates together with
/// the Cramer-Rao bound `1 / (n_shots F)`.
///
/// The likelihood is searched on `eps_true +- pi/2`: a 256-point grid
/// followed by golden-section refinement to 1e-6. The half-width keeps out the
/// mirror maximum that families like `cos(eps + gamma)` have at distance up to `pi`.
pub fn mle_simulation(
    ch: &PioChannel,
    rho: &DensityMatrix,
    eps_true: f64,
    n_shots: u64,
    n_trials: usize,
    seed: u64,
) -> Result<MleReport> {
    if n_shots == 0 || n_trials < 2 {
        return Err(Error::InvalidArgument(
            "need at least one shot and two trials".into(),
        ));
    }
    let dist = outcome_distribution(ch, rho, eps_true)?;
    let fi = classical_fi(&dist);
    if fi < P_FLOOR {
        return Err(Error::ZeroFisherInformation);
    }
    let lik = Likelihood::new(ch, &partial_trace_b(rho));
    let half = std::f64::consts::FRAC_PI_2;
    let (lo, hi) = (eps_true - half, eps_true + half);
    let step = (hi - lo) / (MLE_GRID - 1) as f64;

    let estimates: Vec<f64> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let counts = sample_counts(&dist.probs, n_shots, &mut rng);
            let ll = |e: f64| lik.log_likelihood(&counts, e);
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for k in 0..MLE_GRID {
                let v = ll(lo + step * k as f64);
                if v > best_val {
                    best_val = v;
                    best = k;
                }
            }
            let a = (lo + step * best.saturating_sub(1) as f64).max(lo);
            let b = (lo + step * (best + 1) as f64).min(hi);
            golden_max(ll, a, b, MLE_TOL)
        })
        .collect();

    let m = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let variance = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(MleReport {
        mean,
        variance,
        crb: 1.0 / (n_shots as f64 * fi),
        fisher_information: fi,
    })
}
