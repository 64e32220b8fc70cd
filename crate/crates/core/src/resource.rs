//! Partial incoherent states and phase-parametrized partial incoherent channels.
//!
//! A Kraus element acts on subsystem A as
//! `K(eps) = sum_n b_n exp(i g_n(eps)) |f(n)><n|` with affine phases
//! `g_n(eps) = phase0_n + deriv_n * eps`, so `phase0` is the phase at `eps = 0`.
//! Indices are 0-based throughout the library; the JSON format is 1-based.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::lincore::{eigh, partial_trace_b, tensor, ComplexMatrix, DensityMatrix, C64};

/// Outcomes with probability below this are treated as impossible.
pub const P_FLOOR: f64 = 1e-12;

/// Default residual tolerance for channel completeness.
pub const TOL_COMPLETENESS: f64 = 1e-9;

/// Extra evaluation points (besides the structural check) for completeness.
pub const SPOT_CHECK_EPS: [f64; 4] = [0.0, 0.37, -0.37, 1.91];

#[derive(Clone, Debug, PartialEq)]
pub struct KrausElement {
    pub targets: Vec<usize>,
    pub coeffs: Vec<C64>,
    pub phase0: Vec<f64>,
    pub deriv: Vec<f64>,
}

impl KrausElement {
    pub fn new(targets: Vec<usize>, coeffs: Vec<C64>, phase0: Vec<f64>, deriv: Vec<f64>) -> Self {
        KrausElement {
            targets,
            coeffs,
            phase0,
            deriv,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `b_n exp(i g_n(eps))`
    pub fn amplitudes(&self, eps: f64) -> Vec<C64> {
        self.coeffs
            .iter()
            .zip(self.phase0.iter().zip(&self.deriv))
            .map(|(b, (p, d))| b * C64::from_polar(1.0, p + d * eps))
            .collect()
    }

    /// The operator on A at `eps`.
    pub fn matrix(&self, dim_a: usize, eps: f64) -> ComplexMatrix {
        let mut k = ComplexMatrix::zeros(dim_a, dim_a);
        for (n, a) in self.amplitudes(eps).into_iter().enumerate() {
            k[(self.targets[n], n)] += a;
        }
        k
    }

    /// True when every index carrying a nonzero coefficient maps to the same
    /// target, so that `K^dag K` has rank at most one.
    pub fn is_rank1(&self) -> bool {
        let mut support = self
            .coeffs
            .iter()
            .zip(&self.targets)
            .filter(|(b, _)| b.norm() > 0.0)
            .map(|(_, &t)| t);
        match support.next() {
            Some(first) => support.all(|t| t == first),
            None => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PioChannel {
    dim_a: usize,
    elements: Vec<KrausElement>,
    deriv_scale: f64,
}

impl PioChannel {
    /// Builds a channel and checks its structure and completeness.
    pub fn new(dim_a: usize, elements: Vec<KrausElement>) -> Result<Self> {
        let ch = PioChannel {
            dim_a,
            elements,
            deriv_scale: 1.0,
        };
        validate_channel(&ch, TOL_COMPLETENESS)?;
        Ok(ch)
    }

    /// Builds a channel without any checks. Callers are expected to run
    /// [`validate_channel`] before trusting it.
    pub fn new_unchecked(dim_a: usize, elements: Vec<KrausElement>) -> Self {
        PioChannel {
            dim_a,
            elements,
            deriv_scale: 1.0,
        }
    }

    pub(crate) fn with_deriv_scale(mut self, scale: f64) -> Self {
        self.deriv_scale = scale;
        self
    }

    /// Single-element channel `U(eps) = sum_n exp(i d_n eps) |n><n|`.
    pub fn diagonal_unitary(d: &[f64]) -> Result<Self> {
        let n = d.len();
        Self::new(
            n,
            vec![KrausElement::new(
                (0..n).collect(),
                vec![C64::new(1.0, 0.0); n],
                vec![0.0; n],
                d.to_vec(),
            )],
        )
    }

    pub fn identity(dim_a: usize) -> Result<Self> {
        Self::diagonal_unitary(&vec![0.0; dim_a])
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn elements(&self) -> &[KrausElement] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<KrausElement> {
        self.elements
    }

    /// Upper bound on the phase derivatives. 1 for ordinary channels, `k` after
    /// [`derivative_rescale`](crate::coherence::derivative_rescale).
    pub fn deriv_bound(&self) -> f64 {
        self.deriv_scale
    }

    pub fn is_rescaled(&self) -> bool {
        self.deriv_scale != 1.0
    }

    pub fn rank1_flags(&self) -> Vec<bool> {
        self.elements.iter().map(KrausElement::is_rank1).collect()
    }

    pub fn is_rank1(&self) -> bool {
        self.elements.iter().all(KrausElement::is_rank1)
    }

    /// `sum_l K_l(eps)^dag K_l(eps)`
    pub fn completeness_matrix(&self, eps: f64) -> ComplexMatrix {
        let n = self.dim_a;
        let mut acc = ComplexMatrix::zeros(n, n);
        for el in &self.elements {
            let a = el.amplitudes(eps);
            for i in 0..n {
                for j in 0..n {
                    if el.targets[i] == el.targets[j] {
                        acc[(i, j)] += a[i].conj() * a[j];
                    }
                }
            }
        }
        acc
    }
}

/// Zeroes every off-diagonal A block `<i|_A rho |j>_A`, `i != j`.
pub fn luders_dephase(rho: &DensityMatrix) -> DensityMatrix {
    let (na, nb) = (rho.dim_a(), rho.dim_b());
    let mut out = rho.matrix().clone();
    for i in 0..na {
        for j in 0..na {
            if i == j {
                continue;
            }
            for b in 0..nb {
                for c in 0..nb {
                    out[(i * nb + b, j * nb + c)] = C64::new(0.0, 0.0);
                }
            }
        }
    }
    DensityMatrix::from_trusted(out, na, nb)
}

/// Block (Luders) definition: `||rho - Pi_L(rho)||_F <= tol`.
pub fn is_partial_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    (rho.matrix() - luders_dephase(rho).matrix()).frobenius_norm() <= tol
}

/// Reduced-state predicate: `tr_B rho` is diagonal within `tol` (Frobenius
/// norm of its off-diagonal part). Every Fisher-information quantity in this
/// crate vanishes exactly when this holds.
pub fn is_reduced_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    let ra = partial_trace_b(rho);
    let n = ra.rows();
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += ra[(i, j)].norm_sqr();
            }
        }
    }
    off.sqrt() <= tol
}

/// Worst completeness violation found by [`completeness_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompletenessReport {
    pub row: usize,
    pub col: usize,
    pub residual: f64,
    /// Largest deviation of `sum K^dag K` from the identity at the spot-check points.
    pub numeric_residual: f64,
}

fn check_structure(ch: &PioChannel) -> Result<()> {
    let n = ch.dim_a;
    if n == 0 {
        return Err(Error::MalformedChannel("dim_a must be positive".into()));
    }
    if ch.elements.is_empty() {
        return Err(Error::MalformedChannel("channel has no elements".into()));
    }
    let bound = ch.deriv_scale;
    for (l, el) in ch.elements.iter().enumerate() {
        if el.targets.len() != n || el.coeffs.len() != n || el.phase0.len() != n || el.deriv.len() != n {
            return Err(Error::MalformedChannel(format!(
                "element {l}: targets, coeffs, phase0 and deriv must all have length {n}"
            )));
        }
        if let Some(&t) = el.targets.iter().find(|&&t| t >= n) {
            return Err(Error::IndexOutOfRange(format!(
                "element {l}: target {t} outside 0..{n}"
            )));
        }
        let finite = el.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && el.phase0.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::MalformedChannel(format!("element {l}: non-finite entry")));
        }
        for (i, &d) in el.deriv.iter().enumerate() {
            if !(0.0..=bound).contains(&d) {
                return Err(Error::DerivOutOfRange {
                    element: l,
                    index: i,
                    value: d,
                    bound,
                });
            }
        }
    }
    Ok(())
}

/// Structural and numeric completeness residuals. Structural: for every
/// basis pair `(n, m)` the terms `conj(b_n) b_m exp(i(phase0_m - phase0_n))`
/// of elements with `f(n) = f(m)` are grouped by `deriv_m - deriv_n`; each
/// group must sum to zero, except the zero-difference group on the diagonal,
/// which must sum to one. This is equivalent to completeness for every `eps`.
pub fn completeness_report(ch: &PioChannel) -> Result<CompletenessReport> {
    check_structure(ch)?;
    let n = ch.dim_a;
    let mut worst = (0usize, 0usize, 0.0f64);
    let mut terms: Vec<(f64, C64)> = Vec::new();
    for i in 0..n {
        for j in i..n {
            terms.clear();
            for el in &ch.elements {
                if el.targets[i] != el.targets[j] {
                    continue;
                }
                let z = el.coeffs[i].conj()
                    * el.coeffs[j]
                    * C64::from_polar(1.0, el.phase0[j] - el.phase0[i]);
                terms.push((el.deriv[j] - el.deriv[i], z));
            }
            terms.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut k = 0;
            let mut saw_zero = false;
            while k < terms.len() {
                let delta = terms[k].0;
                let mut sum = C64::new(0.0, 0.0);
                while k < terms.len() && (terms[k].0 - delta).abs() <= 1e-12 {
                    sum += terms[k].1;
                    k += 1;
                }
                let expect = if i == j && delta.abs() <= 1e-12 {
                    saw_zero = true;
                    1.0
                } else {
                    0.0
                };
                let r = (sum - C64::new(expect, 0.0)).norm();
                if r > worst.2 {
                    worst = (i, j, r);
                }
            }
            if i == j && !saw_zero && 1.0 > worst.2 {
                worst = (i, j, 1.0);
            }
        }
    }

    let id = ComplexMatrix::identity(n);
    let numeric = SPOT_CHECK_EPS
        .iter()
        .map(|&e| ch.completeness_matrix(e).max_abs_diff(&id))
        .fold(0.0, f64::max);

    Ok(CompletenessReport {
        row: worst.0,
        col: worst.1,
        residual: worst.2,
        numeric_residual: numeric,
    })
}

/// Checks structure, the derivative range and completeness for all `eps`.
pub fn validate_channel(ch: &PioChannel, tol: f64) -> Result<CompletenessReport> {
    let report = completeness_report(ch)?;
    if report.residual > tol || report.numeric_residual > tol {
        return Err(Error::Completeness {
            row: report.row,
            col: report.col,
            residual: report.residual.max(report.numeric_residual),
        });
    }
    Ok(report)
}

/// Post-measurement states and probabilities of `K_l(eps) (x) I_B`.
/// Outcomes below [`P_FLOOR`] carry `None` instead of a state.
pub fn apply_channel(
    ch: &PioChannel,
    rho: &DensityMatrix,
    eps: f64,
) -> Result<(Vec<Option<DensityMatrix>>, Vec<f64>)> {
    if ch.dim_a != rho.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, state has dim_a = {}",
            ch.dim_a,
            rho.dim_a()
        )));
    }
    let id_b = ComplexMatrix::identity(rho.dim_b());
    let mut states = Vec::with_capacity(ch.elements.len());
    let mut probs = Vec::with_capacity(ch.elements.len());
    for el in &ch.elements {
        let phi = tensor(&el.matrix(ch.dim_a, eps), &id_b);
        let out = &(&phi * rho.matrix()) * &phi.adjoint();
        let p = out.trace().re.max(0.0);
        probs.push(p);
        if p < P_FLOOR {
            states.push(None);
        } else {
            let s = out.scale_real(1.0 / p).hermitian_part();
            states.push(Some(DensityMatrix::from_trusted(s, rho.dim_a(), rho.dim_b())));
        }
    }
    Ok((states, probs))
}

/// Splits every element into rank-one elements `|i><phi_i| U(eps)` from the
/// eigendecomposition `V^dag V = sum_i |phi_i><phi_i|` of its static part.
pub fn refine_to_rank1(ch: &PioChannel) -> Result<PioChannel> {
    check_structure(ch)?;
    let n = ch.dim_a;
    let mut out = Vec::new();
    for el in &ch.elements {
        let mut vv = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if el.targets[i] == el.targets[j] {
                    vv[(i, j)] = el.coeffs[i].conj() * el.coeffs[j];
                }
            }
        }
        let eig = eigh(&vv);
        for (i, &lam) in eig.values.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let s = lam.sqrt();
            out.push(KrausElement::new(
                vec![i; n],
                (0..n).map(|k| eig.vectors[(k, i)].conj() * s).collect(),
                el.phase0.clone(),
                el.deriv.clone(),
            ));
        }
    }
    Ok(PioChannel {
        dim_a: n,
        elements: out,
        deriv_scale: ch.deriv_scale,
    })
}

/// Three-element channel certifying coherence between basis states `i < j`:
/// `K1 = s e^{i(eps+gamma)}|i><i| + s|i><j|`,
/// `K2 = -s e^{i(eps+gamma)}|j><i| + s|j><j|` with `s = 1/sqrt(2)`, and
/// `K3` the identity on the remaining indices (empty when `n_a = 2`).
pub fn witness_channel(n_a: usize, i: usize, j: usize, gamma: f64) -> Result<PioChannel> {
    if !(i < j && j < n_a) {
        return Err(Error::IndexOutOfRange(format!(
            "witness pair ({i}, {j}) needs i < j < {n_a}"
        )));
    }
    let zero = C64::new(0.0, 0.0);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut phase0 = vec![0.0; n_a];
    phase0[i] = gamma;
    let mut deriv = vec![0.0; n_a];
    deriv[i] = 1.0;

    let mut c1 = vec![zero; n_a];
    c1[i] = s;
    c1[j] = s;
    let mut c2 = vec![zero; n_a];
    c2[i] = -s;
    c2[j] = s;
    let c3: Vec<C64> = (0..n_a)
        .map(|n| if n == i || n == j { zero } else { C64::new(1.0, 0.0) })
        .collect();

    PioChannel::new(
        n_a,
        vec![
            KrausElement::new(vec![i; n_a], c1, phase0.clone(), deriv.clone()),
            KrausElement::new(vec![j; n_a], c2, phase0, deriv),
            KrausElement::new((0..n_a).collect(), c3, vec![0.0; n_a], vec![0.0; n_a]),
        ],
    )
}
