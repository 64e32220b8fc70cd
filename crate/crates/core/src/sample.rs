//! Random generators for states, unitaries, measurements and channels.
//! Used by the property tests and the equivalence check.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::lincore::{pinv_sqrt, tensor, ComplexMatrix, DensityMatrix, C64};
use crate::resource::{KrausElement, PioChannel};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Complex Ginibre matrix.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::new(rows, cols, (0..rows * cols).map(|_| gaussian(rng)).collect())
        .expect("positive dimensions")
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = ginibre(n, n, rng);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = g.column(j);
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        if ok {
            let mut u = ComplexMatrix::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for (i, z) in col.iter().enumerate() {
                    u[(i, j)] = *z;
                }
            }
            return u;
        }
    }
}

/// Normalized Gaussian vector.
pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random density matrix of the given rank, `G G^dag / tr`.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, rank.clamp(1, n), rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr).hermitian_part()
}

/// Random bipartite state; `rank = None` draws it uniformly from `1..=n`.
pub fn random_state<R: Rng + ?Sized>(n_a: usize, n_b: usize, rank: Option<usize>, rng: &mut R) -> DensityMatrix {
    let n = n_a * n_b;
    let r = rank.unwrap_or_else(|| rng.random_range(1..=n));
    DensityMatrix::new(random_density_matrix(n, r, rng), n_a, n_b).expect("sampled state is valid")
}

pub fn random_pure_state<R: Rng + ?Sized>(n_a: usize, n_b: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_pure(&random_vector(n_a * n_b, rng), n_a, n_b).expect("sampled state is valid")
}

/// Random probability vector (flat Dirichlet).
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// State whose reduced state on A is diagonal: a purification-like
/// `sum_i sqrt(q_i)|i>|u_i>` with orthonormal `u_i` (global coherence
/// between A blocks, traceless off-diagonal blocks) mixed with a random
/// block-diagonal state. Needs `n_b >= n_a`.
pub fn random_reduced_incoherent_state<R: Rng + ?Sized>(n_a: usize, n_b: usize, rng: &mut R) -> DensityMatrix {
    assert!(n_b >= n_a, "need n_b >= n_a");
    let q = random_simplex(n_a, rng);
    let u = random_unitary(n_b, rng);
    let mut psi = vec![C64::new(0.0, 0.0); n_a * n_b];
    for i in 0..n_a {
        for b in 0..n_b {
            psi[i * n_b + b] = u[(b, i)] * q[i].sqrt();
        }
    }
    let pure = ComplexMatrix::projector(&psi);
    let inc = random_partial_incoherent_state(n_a, n_b, rng);
    let w: f64 = rng.random();
    let m = &pure.scale_real(w) + &inc.matrix().scale_real(1.0 - w);
    DensityMatrix::new(m, n_a, n_b).expect("mixture is valid")
}

/// `sum_i p_i |i><i| (x) sigma_i`
pub fn random_partial_incoherent_state<R: Rng + ?Sized>(n_a: usize, n_b: usize, rng: &mut R) -> DensityMatrix {
    let p = random_simplex(n_a, rng);
    let mut m = ComplexMatrix::zeros(n_a * n_b, n_a * n_b);
    for (i, &pi) in p.iter().enumerate() {
        let mut proj = ComplexMatrix::zeros(n_a, n_a);
        proj[(i, i)] = C64::new(pi, 0.0);
        let sigma = random_density_matrix(n_b, rng.random_range(1..=n_b), rng);
        m = &m + &tensor(&proj, &sigma);
    }
    DensityMatrix::new(m, n_a, n_b).expect("block-diagonal state is valid")
}

/// Random POVM with `k` elements on `C^n`: `S^{-1/2} G_i S^{-1/2}` for
/// random positive `G_i` with sum `S`. Ranks are drawn so that `S` is
/// invertible.
pub fn random_povm<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let mut total_rank = 0;
    let gs: Vec<ComplexMatrix> = (0..k)
        .map(|i| {
            let mut rank = rng.random_range(1..=n);
            if i + 1 == k {
                rank = rank.max(n.saturating_sub(total_rank));
            }
            total_rank += rank;
            let g = ginibre(n, rank, rng);
            &g * &g.adjoint()
        })
        .collect();
    let mut s = ComplexMatrix::zeros(n, n);
    for g in &gs {
        s = &s + g;
    }
    let w = pinv_sqrt(&s, 1e-12);
    gs.iter().map(|g| (&(&w * g) * &w).hermitian_part()).collect()
}

/// Random channel of the admissible form. Elements are drawn in groups
/// sharing one derivative vector and one phase vector; within a group the
/// levels are split into blocks, each block contributes the rows of a
/// random unitary scaled by that group's weights, and one element gathers
/// a row from every block with a distinct target per block.
pub fn random_g_channel<R: Rng + ?Sized>(n_a: usize, rng: &mut R) -> PioChannel {
    let n_groups = rng.random_range(1..=3usize);
    // per-level partition of unity over the groups
    let mut weights = vec![vec![0.0; n_a]; n_groups];
    for k in 0..n_a {
        for (wg, x) in weights.iter_mut().zip(random_simplex(n_groups, rng)) {
            wg[k] = x;
        }
    }
    let z = C64::new(0.0, 0.0);
    let mut elements = Vec::new();
    for wg in weights.iter() {
        let deriv: Vec<f64> = (0..n_a)
            .map(|_| match rng.random_range(0..3u8) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random(),
            })
            .collect();
        let phase: Vec<f64> = (0..n_a).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();

        // random partition of the levels into blocks
        let n_blocks = rng.random_range(1..=n_a);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
        for k in 0..n_a {
            blocks[rng.random_range(0..n_blocks)].push(k);
        }
        blocks.retain(|b| !b.is_empty());
        let mut targets_pool: Vec<usize> = (0..n_a).collect();
        targets_pool.shuffle(rng);
        let unitaries: Vec<ComplexMatrix> = blocks.iter().map(|b| random_unitary(b.len(), rng)).collect();
        let rows = blocks.iter().map(Vec::len).max().unwrap_or(0);
        for r in 0..rows {
            let mut targets = vec![0usize; n_a];
            let mut coeffs = vec![z; n_a];
            for (bi, block) in blocks.iter().enumerate() {
                let t = targets_pool[bi];
                for &k in block {
                    targets[k] = t;
                }
                if r < block.len() {
                    for (c, &k) in block.iter().enumerate() {
                        coeffs[k] = unitaries[bi][(r, c)] * wg[k].sqrt();
                    }
                }
            }
            elements.push(KrausElement::new(targets, coeffs, phase.clone(), deriv.clone()));
        }
    }
    PioChannel::new(n_a, elements).expect("sampled channel is complete")
}

/// Ensemble of `n` random `m x m` states with random priors.
pub fn random_ensemble<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> (Vec<f64>, Vec<ComplexMatrix>) {
    let priors = random_simplex(n, rng);
    let states = (0..n)
        .map(|_| random_density_matrix(m, rng.random_range(1..=m), rng))
        .collect();
    (priors, states)
}
