//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are small (the examples are at most 9x9 and the intended range
//! is up to 64x64), so everything is stored densely in row-major order.
//! Bipartite indices follow the Kronecker convention: the basis state
//! `|a>|b>` of `H_A (x) H_B` lives at index `a * dim_b + b`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const TOL_HERM: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-10;
pub const TOL_PSD: f64 = 1e-9;
pub const TOL_EIG: f64 = 1e-9;
pub const TOL_SQRT: f64 = 1e-9;

/// Numerical tolerances for validation. Defaults suit double precision up to
/// 64x64 matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub eig: f64,
    pub sqrt: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: TOL_HERM,
            trace: TOL_TRACE,
            psd: TOL_PSD,
            eig: TOL_EIG,
            sqrt: TOL_SQRT,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `|u><v|`
    pub fn ket_bra(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    /// Rank-1 projector `|v><v|` (not normalized).
    pub fn projector(v: &[C64]) -> Self {
        Self::ket_bra(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|m_ij - conj(m_ji)|`; zero for an exactly Hermitian matrix.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `(m + m^dag) / 2`
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// `M v`
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length does not match matrix");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<u| M |v>`
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A validated density matrix on `H_A (x) H_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates with the default tolerances.
    pub fn new(mat: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        validate_density(mat, dim_a, dim_b, &Tolerances::default())
    }

    /// `|psi><psi|` for a normalized (or normalizable) vector.
    pub fn from_pure(psi: &[C64], dim_a: usize, dim_b: usize) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector(&v), dim_a, dim_b)
    }

    /// `rho_a (x) rho_b` for two single-system states.
    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        Self::new(tensor(rho_a, rho_b), rho_a.rows(), rho_b.rows())
    }

    /// Wraps a matrix already known to satisfy the density invariants.
    pub(crate) fn from_trusted(mat: ComplexMatrix, dim_a: usize, dim_b: usize) -> Self {
        debug_assert_eq!(mat.rows(), dim_a * dim_b);
        DensityMatrix { dim_a, dim_b, mat }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Reduced state on A.
    pub fn reduced_a(&self) -> ComplexMatrix {
        partial_trace_b(self)
    }
}

/// Kronecker product, with `a`'s indices major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `(rho_A)_{nm} = sum_b <n,b| rho |m,b>`.
pub fn partial_trace_b(rho: &DensityMatrix) -> ComplexMatrix {
    partial_trace_b_raw(&rho.mat, rho.dim_a, rho.dim_b)
        .expect("density matrix dimensions are consistent")
}

/// Partial trace over B for an arbitrary square matrix on `C^{dim_a} (x) C^{dim_b}`.
pub fn partial_trace_b_raw(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if m.rows != dim_a * dim_b || m.cols != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix cannot be split as {dim_a} x {dim_b}",
            m.rows, m.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(dim_a, dim_a);
    for n in 0..dim_a {
        for k in 0..dim_a {
            out[(n, k)] = (0..dim_b).map(|b| m[(n * dim_b + b, k * dim_b + b)]).sum();
        }
    }
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order and column `k` of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(f(lambda)) V^dag`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Hermitian eigendecomposition. Each eigenvector is rotated so that its
/// first non-negligible component is real and positive; within degenerate
/// eigenspaces any orthonormal basis may be returned.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let residual = m.hermiticity_residual();
    if residual > TOL_HERM {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eigh(m))
}

/// Eigendecomposition of the Hermitian part of `m`, without the input check.
/// Used on matrices that are Hermitian by construction.
pub(crate) fn eigh(m: &ComplexMatrix) -> HermEig {
    let n = m.rows;
    let eig = m.hermitian_part().to_nalgebra().symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col: Vec<C64> = (0..n).map(|i| eig.eigenvectors[(i, src)]).collect();
        let phase = col
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(C64::new(1.0, 0.0));
        for (i, z) in col.iter().enumerate() {
            vectors[(i, k)] = z * phase;
        }
    }
    HermEig { values, vectors }
}

/// `sqrt` of the Hermitian part of `m` with negative eigenvalues clamped.
pub(crate) fn psd_sqrt_clamped(m: &ComplexMatrix) -> ComplexMatrix {
    eigh(m).reconstruct_with(|x| x.max(0.0).sqrt())
}

/// Moore-Penrose inverse square root on the eigenspaces above `threshold`.
pub(crate) fn pinv_sqrt(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    eigh(m).reconstruct_with(|x| if x > threshold { 1.0 / x.sqrt() } else { 0.0 })
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues within
/// `tol_psd` below zero are clamped.
pub fn psd_sqrt(m: &ComplexMatrix, tol_psd: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -tol_psd {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && m.is_hermitian(TOL_HERM) {
        if let Ok(eig) = herm_eig(m) {
            return eig.values.iter().map(|x| x.abs()).sum();
        }
    }
    m.to_nalgebra().singular_values().iter().sum()
}

/// Checks the density-matrix invariants and reports the first one that fails.
pub fn validate_density(
    m: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::DimensionMismatch("subsystem dimensions must be positive".into()));
    }
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if m.rows != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not match dim_a * dim_b = {dim_a} * {dim_b}",
            m.rows, m.cols
        )));
    }
    let residual = m.hermiticity_residual();
    if residual > tol.herm {
        return Err(Error::NotHermitian { residual });
    }
    let tr = m.trace();
    let deviation = (tr - C64::new(1.0, 0.0)).norm();
    if deviation > tol.trace {
        return Err(Error::TraceNotOne {
            trace: tr.re,
            deviation,
        });
    }
    let mat = m.hermitian_part();
    let min = eigh(&mat).values.last().copied().unwrap_or(0.0);
    if min < -tol.psd {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(DensityMatrix { dim_a, dim_b, mat })
}
