//! Partial-coherence measures: the exact qubit value, the unitary
//! comparator, and a certified lower-bound search over rank-one channels.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{channel_fi, qfi_unitary, sld, DiagonalGenerator};
use crate::lincore::{eigh, partial_trace_b, ComplexMatrix, DensityMatrix, C64};
use crate::resource::{witness_channel, KrausElement, PioChannel, P_FLOOR};

/// Largest `dim_a` for which the unitary bound enumerates every binary generator.
pub const EXHAUSTIVE_LIMIT: usize = 20;

const THETA_PERIOD: f64 = 2.0 * PI / 3.0;
const THETA_GRID: usize = 24;
const SHARE_GRID: usize = 16;
const GOLDEN_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub n_restarts: usize,
    /// Number of basis pairs used by the ansatz; `None` means all pairs.
    pub n_groups_max: Option<usize>,
    pub seed: u64,
    pub step_tolerance: f64,
    pub max_iters: usize,
    /// Let each group's phase derivative vary in `[0, 1]` instead of fixing it to 1.
    pub continuous_deriv: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_restarts: 32,
            n_groups_max: None,
            seed: 0,
            step_tolerance: 1e-7,
            max_iters: 500,
            continuous_deriv: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 {
            return Err(Error::InvalidArgument("n_restarts must be at least 1".into()));
        }
        if self.step_tolerance.is_nan() || self.step_tolerance <= 0.0 {
            return Err(Error::InvalidArgument("step_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoherenceMode {
    ExactTwoQubit,
    UnitaryBound,
    HeuristicLowerBound,
}

impl CoherenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoherenceMode::ExactTwoQubit => "exact_two_qubit",
            CoherenceMode::UnitaryBound => "unitary_bound",
            CoherenceMode::HeuristicLowerBound => "heuristic_lower_bound",
        }
    }
}

impl std::fmt::Display for CoherenceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceResult {
    pub value: f64,
    pub mode: CoherenceMode,
    pub certificate: PioChannel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitaryBoundMode {
    /// Best binary generator.
    Full,
    /// Generator `|i><i|` (0-based).
    FixedIndex(usize),
}

fn commutator_derivative(rho_a: &ComplexMatrix, d: &[f64]) -> ComplexMatrix {
    let n = rho_a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = rho_a[(i, j)] * C64::new(0.0, d[i] - d[j]);
        }
    }
    out
}

/// Rank-one channel `{|l><psi_l| U(eps)}`, `U(eps) = exp(i eps diag(d))`,
/// with `psi_l` the eigenvectors of the SLD of `U rho_A U^dag`. Its
/// post-selective FI equals the QFI of that unitary family.
pub fn unitary_certificate(rho_a: &ComplexMatrix, d: &[f64]) -> Result<PioChannel> {
    let n = rho_a.rows();
    if d.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "generator of length {} for dimension {n}",
            d.len()
        )));
    }
    DiagonalGenerator::new(d.to_vec())?;
    let l = sld(rho_a, &commutator_derivative(rho_a, d));
    let basis = eigh(&l).vectors;
    let elements = (0..n)
        .map(|k| {
            KrausElement::new(
                vec![k; n],
                (0..n).map(|i| basis[(i, k)].conj()).collect(),
                vec![0.0; n],
                d.to_vec(),
            )
        })
        .collect();
    PioChannel::new(n, elements)
}

/// `F_Q(d) = d^T Q d` for the unitary family generated by `diag(d)`.
fn qfi_quadratic_form(rho_a: &ComplexMatrix) -> Vec<Vec<f64>> {
    let eig = eigh(rho_a);
    let n = eig.values.len();
    let v = &eig.vectors;
    let mut q = vec![vec![0.0; n]; n];
    let mut m = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (eig.values[i].max(0.0), eig.values[j].max(0.0));
            let s = pi + pj;
            if s < P_FLOOR || i == j {
                continue;
            }
            let w = 2.0 * (pi - pj).powi(2) / s;
            if w == 0.0 {
                continue;
            }
            for a in 0..n {
                m[a] = v[(a, i)].conj() * v[(a, j)];
            }
            for a in 0..n {
                for b in 0..n {
                    q[a][b] += w * (m[a] * m[b].conj()).re;
                }
            }
        }
    }
    q
}

fn quad(q: &[Vec<f64>], d: &[f64]) -> f64 {
    let n = d.len();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += d[a] * q[a][b] * d[b];
        }
    }
    s
}

fn best_binary_generator(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    if n <= EXHAUSTIVE_LIMIT {
        // d and 1 - d give the same family, so the last entry stays 0.
        // Gray-code walk, updating Qd one column at a time.
        let bits = n - 1;
        let mut d = vec![0.0; n];
        let mut qd = vec![0.0; n];
        let mut val = 0.0;
        let mut best = (0.0, 0u64);
        for k in 1u64..(1u64 << bits) {
            let b = k.trailing_zeros() as usize;
            let s = if d[b] == 0.0 { 1.0 } else { -1.0 };
            val += 2.0 * s * qd[b] + q[b][b];
            d[b] += s;
            for (a, x) in qd.iter_mut().enumerate() {
                *x += s * q[a][b];
            }
            if val > best.0 + TIE_TOL {
                best = (val, k ^ (k >> 1));
            }
        }
        return (0..n)
            .map(|i| if i < bits && best.1 >> i & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
    }
    // Greedy bit flips from every single-index start.
    let mut best_d = vec![0.0; n];
    let mut best_val = 0.0;
    for start in 0..n {
        let mut d = vec![0.0; n];
        d[start] = 1.0;
        let mut val = quad(q, &d);
        loop {
            let mut improved = false;
            for b in 0..n {
                d[b] = 1.0 - d[b];
                let v = quad(q, &d);
                if v > val + TIE_TOL {
                    val = v;
                    improved = true;
                } else {
                    d[b] = 1.0 - d[b];
                }
            }
            if !improved {
                break;
            }
        }
        if val > best_val + TIE_TOL {
            best_val = val;
            best_d = d;
        }
    }
    best_d
}

/// Unitary comparator and the generator achieving it.
pub fn unitary_bound_generator(rho: &DensityMatrix, mode: UnitaryBoundMode) -> Result<(f64, Vec<f64>)> {
    let rho_a = partial_trace_b(rho);
    let n = rho_a.rows();
    let d = match mode {
        UnitaryBoundMode::FixedIndex(i) => DiagonalGenerator::basis(n, i)?.values().to_vec(),
        UnitaryBoundMode::Full => best_binary_generator(&qfi_quadratic_form(&rho_a)),
    };
    let value = qfi_unitary(&rho_a, &DiagonalGenerator::new(d.clone())?)?;
    Ok((value, d))
}

/// Maximum QFI over unitary families `exp(i eps H)`, `H` diagonal with
/// binary entries (`Full`), or for `H = |i><i|` (`FixedIndex(i)`).
/// The objective is convex in each entry of `H`, so binary entries suffice.
/// Above [`EXHAUSTIVE_LIMIT`] levels the full mode uses greedy bit flips.
pub fn coherence_unitary_bound(rho: &DensityMatrix, mode: UnitaryBoundMode) -> Result<f64> {
    Ok(unitary_bound_generator(rho, mode)?.0)
}

/// Exact measure for a qubit A: the QFI of `exp(i eps |0><0|)`.
pub fn coherence_two_qubit(rho: &DensityMatrix) -> Result<CoherenceResult> {
    if rho.dim_a() != 2 {
        return Err(Error::InvalidArgument(format!(
            "two-level formula needs dim_a = 2, got {}",
            rho.dim_a()
        )));
    }
    let rho_a = partial_trace_b(rho);
    let d = [1.0, 0.0];
    let value = qfi_unitary(&rho_a, &DiagonalGenerator::new(d.to_vec())?)?;
    Ok(CoherenceResult {
        value,
        mode: CoherenceMode::ExactTwoQubit,
        certificate: unitary_certificate(&rho_a, &d)?,
    })
}

/// Witness channel on the pair maximizing `|rho_ij|^2 / (rho_ii + rho_jj)`,
/// phased so that its FI is `4 |rho_ij|^2 / (rho_ii + rho_jj)`.
/// `None` when the reduced state is diagonal.
pub fn witness_certificate(rho: &DensityMatrix) -> Result<Option<(PioChannel, f64)>> {
    let r = partial_trace_b(rho);
    let n = r.rows();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let s = r[(i, i)].re + r[(j, j)].re;
            let z = r[(i, j)].norm_sqr();
            if s < P_FLOOR || z == 0.0 {
                continue;
            }
            let score = z / s;
            if best.is_none_or(|b| score > b.2) {
                best = Some((i, j, score));
            }
        }
    }
    let Some((i, j, _)) = best else {
        return Ok(None);
    };
    let ch = witness_channel(n, i, j, FRAC_PI_2 - r[(i, j)].arg())?;
    let fi = channel_fi(&ch, rho, 0.0)?;
    Ok(Some((ch, fi)))
}

/// One harmonic triple on the basis pair `(n, m)`. Element `t` is
/// `|n>( sqrt(share_n/3) <n| + sqrt(share_m/3) e^{i(theta + 2 pi t/3)} <m| ) U(eps)`
/// with phase derivative `delta` on `n` and 0 elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGroup {
    pub n: usize,
    pub m: usize,
    pub share_n: f64,
    pub share_m: f64,
    pub theta: f64,
    pub delta: f64,
}

/// Builds the rank-one channel of a set of pair groups, topping up each
/// basis index with `sqrt(1 - u_k)|k><k|` where `u_k` is its total share.
pub fn pair_group_channel(dim_a: usize, groups: &[PairGroup]) -> Result<PioChannel> {
    let z = C64::new(0.0, 0.0);
    let mut used = vec![0.0; dim_a];
    let mut elements = Vec::new();
    for g in groups {
        if g.n >= dim_a || g.m >= dim_a || g.n == g.m {
            return Err(Error::IndexOutOfRange(format!("pair ({}, {})", g.n, g.m)));
        }
        used[g.n] += g.share_n;
        used[g.m] += g.share_m;
        if g.share_n <= 0.0 && g.share_m <= 0.0 {
            continue;
        }
        let mut deriv = vec![0.0; dim_a];
        deriv[g.n] = g.delta;
        for t in 0..3 {
            let mut coeffs = vec![z; dim_a];
            coeffs[g.n] = C64::new((g.share_n / 3.0).max(0.0).sqrt(), 0.0);
            coeffs[g.m] = C64::from_polar(
                (g.share_m / 3.0).max(0.0).sqrt(),
                g.theta + THETA_PERIOD * t as f64,
            );
            elements.push(KrausElement::new(vec![g.n; dim_a], coeffs, vec![0.0; dim_a], deriv.clone()));
        }
    }
    for (k, u) in used.iter().enumerate() {
        let rest = 1.0 - u;
        if rest < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "shares on level {k} sum to {u} > 1"
            )));
        }
        if rest > 1e-15 {
            let mut coeffs = vec![z; dim_a];
            coeffs[k] = C64::new(rest.sqrt(), 0.0);
            elements.push(KrausElement::new(vec![k; dim_a], coeffs, vec![0.0; dim_a], vec![0.0; dim_a]));
        }
    }
    PioChannel::new(dim_a, elements)
}

/// Reduced-state data of one basis pair.
struct PairData {
    n: usize,
    m: usize,
    rnn: f64,
    rmm: f64,
    r: f64,
    alpha: f64,
    /// `sqrt(rnn rmm) - r`, computed without cancellation.
    gap: f64,
}

/// Per-restart optimization state.
#[derive(Clone)]
struct Ansatz {
    shares: Vec<[f64; 2]>,
    theta: Vec<f64>,
    delta: Vec<f64>,
    fi: Vec<f64>,
}

fn group_fi(p: &PairData, sn: f64, sm: f64, theta: f64, delta: f64) -> f64 {
    let (sn, sm) = (sn.max(0.0), sm.max(0.0));
    let b = 2.0 / 3.0 * (sn * sm).sqrt() * p.r;
    if b == 0.0 || delta == 0.0 {
        return 0.0;
    }
    // a - b as a sum of nonnegative terms; probabilities are (a - b) + 2b cos^2(psi/2)
    let spread = (sn * p.rnn).sqrt() - (sm * p.rmm).sqrt();
    let a_minus_b = (spread * spread + 2.0 * (sn * sm).sqrt() * p.gap) / 3.0;
    let mut f = 0.0;
    for t in 0..3 {
        let psi = p.alpha - theta - THETA_PERIOD * t as f64;
        let c = (psi / 2.0).cos();
        let prob = a_minus_b + 2.0 * b * c * c;
        if prob >= P_FLOOR {
            let dp = delta * b * psi.sin();
            f += dp * dp / prob;
        }
    }
    f
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
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
    let x = (a + b) / 2.0;
    (x, f(x))
}

/// Grid scan followed by golden-section refinement around the best point.
fn maximize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    if hi - lo <= GOLDEN_TOL {
        return (lo, f(lo));
    }
    let step = (hi - lo) / grid as f64;
    let mut best = (lo, f(lo));
    for k in 1..=grid {
        let x = lo + step * k as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let (x, v) = golden_max(&f, (best.0 - step).max(lo), (best.0 + step).min(hi));
    if v > best.1 {
        (x, v)
    } else {
        best
    }
}

struct Problem {
    pairs: Vec<PairData>,
    /// For each basis index, its (group, side) memberships.
    members: Vec<Vec<(usize, usize)>>,
    continuous: bool,
}

impl Problem {
    fn new(rho_a: &ComplexMatrix, n_groups_max: Option<usize>, continuous: bool) -> Self {
        let n = rho_a.rows();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let z = rho_a[(i, j)];
                let (rnn, rmm, r) = (rho_a[(i, i)].re.max(0.0), rho_a[(j, j)].re.max(0.0), z.norm());
                let geo = (rnn * rmm).sqrt();
                let gap = if geo + r > 0.0 {
                    ((rnn * rmm - r * r) / (geo + r)).max(0.0)
                } else {
                    0.0
                };
                pairs.push(PairData {
                    n: i,
                    m: j,
                    rnn,
                    rmm,
                    r,
                    alpha: z.arg(),
                    gap,
                });
            }
        }
        if let Some(k) = n_groups_max {
            if k < pairs.len() {
                let score = |p: &PairData| {
                    let s = p.rnn + p.rmm;
                    if s < P_FLOOR {
                        0.0
                    } else {
                        p.r * p.r / s
                    }
                };
                // stable sort keeps index order among ties
                pairs.sort_by(|a, b| score(b).total_cmp(&score(a)));
                pairs.truncate(k);
                pairs.sort_by_key(|p| (p.n, p.m));
            }
        }
        let mut members = vec![Vec::new(); n];
        for (g, p) in pairs.iter().enumerate() {
            members[p.n].push((g, 0));
            members[p.m].push((g, 1));
        }
        Problem {
            pairs,
            members,
            continuous,
        }
    }

    fn eval(&self, g: usize, s: [f64; 2], theta: f64, delta: f64) -> f64 {
        group_fi(&self.pairs[g], s[0], s[1], theta, delta)
    }

    fn init(&self, rng: &mut ChaCha8Rng) -> Ansatz {
        let ng = self.pairs.len();
        let mut shares = vec![[0.0; 2]; ng];
        for mem in &self.members {
            let w: Vec<f64> = (0..=mem.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = w.iter().sum();
            for (k, &(g, side)) in mem.iter().enumerate() {
                shares[g][side] = w[k] / total;
            }
        }
        let theta: Vec<f64> = (0..ng).map(|_| rng.random::<f64>() * THETA_PERIOD).collect();
        let delta = vec![1.0; ng];
        let mut st = Ansatz {
            shares,
            theta,
            delta,
            fi: vec![0.0; ng],
        };
        for g in 0..ng {
            st.fi[g] = self.eval(g, st.shares[g], st.theta[g], st.delta[g]);
        }
        st
    }

    fn total(st: &Ansatz) -> f64 {
        st.fi.iter().sum()
    }

    fn sweep(&self, st: &mut Ansatz) {
        for g in 0..self.pairs.len() {
            let (s, d) = (st.shares[g], st.delta[g]);
            let (t, v) = maximize_1d(|t| self.eval(g, s, t, d), 0.0, THETA_PERIOD, THETA_GRID);
            if v > st.fi[g] {
                st.theta[g] = t;
                st.fi[g] = v;
            }
            if self.continuous {
                let th = st.theta[g];
                let (x, v) = maximize_1d(|x| self.eval(g, s, th, x), 0.0, 1.0, SHARE_GRID);
                if v > st.fi[g] {
                    st.delta[g] = x;
                    st.fi[g] = v;
                }
            }
        }

        for mem in &self.members {
            let slack = mem.len();
            for p in 0..=mem.len() {
                for q in p + 1..=mem.len() {
                    self.transfer(st, mem, p, q, slack);
                }
            }
        }
    }

    /// Moves share mass between coordinates `p` and `q` of one basis simplex
    /// (coordinate `slack` is the unused mass).
    fn transfer(&self, st: &mut Ansatz, mem: &[(usize, usize)], p: usize, q: usize, slack: usize) {
        let get = |st: &Ansatz, k: usize| -> f64 {
            if k == slack {
                let used: f64 = mem.iter().map(|&(g, s)| st.shares[g][s]).sum();
                (1.0 - used).max(0.0)
            } else {
                let (g, s) = mem[k];
                st.shares[g][s]
            }
        };
        let (xp, xq) = (get(st, p), get(st, q));
        if xp + xq <= 0.0 {
            return;
        }
        let groups: Vec<usize> = [p, q]
            .iter()
            .filter(|&&k| k != slack)
            .map(|&k| mem[k].0)
            .collect();
        let current: f64 = groups.iter().map(|&g| st.fi[g]).sum();

        let moved = |t: f64| -> Vec<(usize, [f64; 2])> {
            let mut out: Vec<(usize, [f64; 2])> = Vec::with_capacity(2);
            for (k, delta) in [(p, -t), (q, t)] {
                if k == slack {
                    continue;
                }
                let (g, s) = mem[k];
                let mut sh = match out.iter().find(|(h, _)| *h == g) {
                    Some((_, sh)) => *sh,
                    None => st.shares[g],
                };
                sh[s] = (sh[s] + delta).max(0.0);
                if let Some(e) = out.iter_mut().find(|(h, _)| *h == g) {
                    e.1 = sh;
                } else {
                    out.push((g, sh));
                }
            }
            out
        };
        let objective = |t: f64| -> f64 {
            moved(t)
                .iter()
                .map(|&(g, sh)| self.eval(g, sh, st.theta[g], st.delta[g]))
                .sum()
        };
        let (t, v) = maximize_1d(objective, -xq, xp, SHARE_GRID);
        if v > current {
            for (g, sh) in moved(t) {
                st.shares[g] = sh;
                st.fi[g] = self.eval(g, sh, st.theta[g], st.delta[g]);
            }
        }
    }

    fn run(&self, mut st: Ansatz, cfg: &SearchConfig) -> Ansatz {
        let mut last = Self::total(&st);
        for _ in 0..cfg.max_iters {
            self.sweep(&mut st);
            let now = Self::total(&st);
            if now - last < cfg.step_tolerance {
                break;
            }
            last = now;
        }
        // When the objective is flat in theta (a pure pair), prefer theta =
        // alpha: its smallest outcome probability stays at b/2 instead of
        // approaching zero, so the certificate evaluates without cancellation.
        for g in 0..self.pairs.len() {
            let alpha = self.pairs[g].alpha.rem_euclid(THETA_PERIOD);
            let v = self.eval(g, st.shares[g], alpha, st.delta[g]);
            if v >= st.fi[g] - TIE_TOL * (1.0 + st.fi[g]) {
                st.theta[g] = alpha;
                st.fi[g] = v;
            }
        }
        st
    }

    fn groups(&self, st: &Ansatz) -> Vec<PairGroup> {
        self.pairs
            .iter()
            .enumerate()
            .map(|(g, p)| PairGroup {
                n: p.n,
                m: p.m,
                share_n: st.shares[g][0],
                share_m: st.shares[g][1],
                theta: st.theta[g],
                delta: st.delta[g],
            })
            .collect()
    }
}

/// Certified lower bound on the post-selective coherence measure. Candidates
/// are the unitary-bound certificate, the witness certificate and the best of
/// `n_restarts` coordinate-ascent runs over pair-group channels; the reported
/// value is always the FI of the returned certificate.
pub fn coherence_search(rho: &DensityMatrix, cfg: &SearchConfig) -> Result<CoherenceResult> {
    cfg.validate()?;
    let rho_a = partial_trace_b(rho);
    let n = rho_a.rows();

    let (_, d) = unitary_bound_generator(rho, UnitaryBoundMode::Full)?;
    let uc = unitary_certificate(&rho_a, &d)?;
    let mut best = CoherenceResult {
        value: channel_fi(&uc, rho, 0.0)?,
        mode: CoherenceMode::UnitaryBound,
        certificate: uc,
    };
    let mut consider = |value: f64, certificate: PioChannel| {
        if value > best.value + TIE_TOL {
            best = CoherenceResult {
                value,
                mode: CoherenceMode::HeuristicLowerBound,
                certificate,
            };
        }
    };

    if let Some((ch, fi)) = witness_certificate(rho)? {
        consider(fi, ch);
    }

    let problem = Problem::new(&rho_a, cfg.n_groups_max, cfg.continuous_deriv);
    if !problem.pairs.is_empty() {
        let runs: Vec<(f64, Ansatz)> = (0..cfg.n_restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
                let st = problem.run(problem.init(&mut rng), cfg);
                (Problem::total(&st), st)
            })
            .collect();
        let mut top = 0;
        for (k, run) in runs.iter().enumerate() {
            if run.0 > runs[top].0 {
                top = k;
            }
        }
        let ch = pair_group_channel(n, &problem.groups(&runs[top].1))?;
        let fi = channel_fi(&ch, rho, 0.0)?;
        consider(fi, ch);
    }
    Ok(best)
}

/// Multiplies every phase derivative by `k > 0`. The result is meant for
/// estimation only; its derivative bound becomes `k` times the old one.
pub fn derivative_rescale(ch: &PioChannel, k: f64) -> Result<PioChannel> {
    if k <= 0.0 || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("rescale factor must be positive, got {k}")));
    }
    let elements = ch
        .elements()
        .iter()
        .map(|el| {
            let mut el = el.clone();
            for d in &mut el.deriv {
                *d *= k;
            }
            el
        })
        .collect();
    Ok(PioChannel::new_unchecked(ch.dim_a(), elements).with_deriv_scale(ch.deriv_bound() * k))
}
