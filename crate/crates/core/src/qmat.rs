//! Dense complex matrix kernel: construction, composition and spectral
//! decomposition of operators on tensor-product spaces.
//!
//! All matrices are row-major `Vec<Complex<f64>>`. Spectral routines are
//! backed by nalgebra's Hermitian eigensolver; everything else is done by
//! direct index arithmetic so that tensor-factor bookkeeping stays explicit.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex<f64>;

pub const C_ZERO: C64 = Complex::new(0.0, 0.0);
pub const C_ONE: C64 = Complex::new(1.0, 0.0);

/// Party label for a tensor factor.
///
/// Factor order is fixed globally: every Alice factor precedes every Bob
/// factor inside a single state or operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

/// Ordered list of tensor-factor dimensions with a party tag per factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimsSpec {
    factors: Vec<(usize, Party)>,
}

impl DimsSpec {
    pub fn new(factors: Vec<(usize, Party)>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&(d, _)| d == 0) {
            return Err(Error::InvalidConfig {
                reason: "DimsSpec factors must be positive".into(),
            });
        }
        // Alice factors first, then Bob factors.
        let first_bob = factors.iter().position(|&(_, p)| p == Party::Bob);
        if let Some(k) = first_bob {
            if factors[k..].iter().any(|&(_, p)| p == Party::Alice) {
                return Err(Error::InvalidConfig {
                    reason: "DimsSpec must list all Alice factors before Bob factors".into(),
                });
            }
        }
        Ok(Self { factors })
    }

    /// Bipartite spec with a single factor per party.
    pub fn bipartite(d_a: usize, d_b: usize) -> Self {
        Self::new(vec![(d_a, Party::Alice), (d_b, Party::Bob)]).expect("positive dims")
    }

    pub fn factors(&self) -> &[(usize, Party)] {
        &self.factors
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&(d, _)| d).collect()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|&(d, _)| d).product()
    }

    pub fn party_dim(&self, party: Party) -> usize {
        self.factors
            .iter()
            .filter(|&&(_, p)| p == party)
            .map(|&(d, _)| d)
            .product()
    }

    pub fn party_positions(&self, party: Party) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|&(_, &(_, p))| p == party)
            .map(|(i, _)| i)
            .collect()
    }

    /// Spec for the tensor product of two systems, regrouped so that all
    /// Alice factors come first. Also returns the factor permutation taking
    /// the plain concatenated order `(self, other)` into the regrouped
    /// order, in the format accepted by [`permute_factors`].
    pub fn product(&self, other: &DimsSpec) -> (DimsSpec, Vec<usize>) {
        let n = self.factors.len();
        let mut perm = Vec::with_capacity(n + other.factors.len());
        let mut factors = Vec::with_capacity(n + other.factors.len());
        for party in [Party::Alice, Party::Bob] {
            for (i, &f) in self.factors.iter().enumerate() {
                if f.1 == party {
                    perm.push(i);
                    factors.push(f);
                }
            }
            for (j, &f) in other.factors.iter().enumerate() {
                if f.1 == party {
                    perm.push(n + j);
                    factors.push(f);
                }
            }
        }
        (DimsSpec { factors }, perm)
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(entries[i], 0.0)
            } else {
                C_ZERO
            }
        })
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Real part of the trace, checking that the imaginary residue is
    /// negligible.
    pub fn trace_re(&self) -> Result<f64> {
        let t = self.trace();
        if t.im.abs() > tol::IMAG_RESIDUE {
            return Err(Error::ImaginaryResidue { residue: t.im });
        }
        Ok(t.re)
    }

    /// Max entry-wise absolute deviation from another matrix.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entry deviation from Hermiticity.
    pub fn herm_deviation(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (M + M^dag)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C_ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// tr(self * other) without forming the product.
    pub fn trace_product(&self, other: &CMat) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut t = C_ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                t += self[(i, k)] * other[(k, i)];
            }
        }
        t
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// |v><v| for a column vector.
    pub fn outer(v: &[C64]) -> CMat {
        let n = v.len();
        CMat::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> CMat {
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, other: &CMat) -> CMat {
        self.matmul(other)
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

/// Kronecker product. Factor order is `(a, b)`: row index of the output is
/// `i_a * rows_b + i_b`.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let va = a[(ia, ja)];
            if va == C_ZERO {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = va * b[(ib, jb)];
                }
            }
        }
    }
    out
}

pub fn tensor_all(mats: &[&CMat]) -> CMat {
    assert!(!mats.is_empty());
    let mut out = mats[0].clone();
    for m in &mats[1..] {
        out = tensor(&out, m);
    }
    out
}

/// Swap operator V on C^d (x) C^d with V (x (x) y) = y (x) x.
pub fn swap_operator(d: usize) -> CMat {
    let mut v = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            v[(i * d + j, j * d + i)] = C_ONE;
        }
    }
    v
}

/// Row/column index permutation induced by reordering tensor factors.
///
/// `perm[k]` is the input factor that lands in output slot `k`. Returns
/// the lookup table `map` with `out[r, c] = in[map[r], map[c]]`.
fn factor_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    assert_eq!(dims.len(), perm.len());
    let n: usize = dims.iter().product();
    // input strides
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0usize; n];
    for (r, entry) in map.iter_mut().enumerate() {
        let mut rem = r;
        let mut lin = 0;
        for k in 0..out_dims.len() {
            let block: usize = out_dims[k + 1..].iter().product();
            let digit = rem / block;
            rem %= block;
            lin += digit * strides[perm[k]];
        }
        *entry = lin;
    }
    map
}

/// Reorder the tensor factors of a square operator.
///
/// `dims` are the input factor dimensions; `perm[k]` names the input factor
/// placed at output position `k`.
pub fn permute_factors(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let n: usize = dims.iter().product();
    assert_eq!(m.rows, n, "permute_factors: dims do not match matrix");
    assert!(m.is_square());
    {
        let mut seen = vec![false; dims.len()];
        for &p in perm {
            assert!(!seen[p], "permute_factors: duplicate factor in perm");
            seen[p] = true;
        }
    }
    let map = factor_index_map(dims, perm);
    CMat::from_fn(n, n, |r, c| m[(map[r], map[c])])
}

/// Trace out every factor not listed in `keep` (indices strictly
/// increasing); the result lives on the kept factors in their original
/// order. The trace of the output equals the trace of the input.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let n: usize = dims.iter().product();
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if m.rows != n {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: n,
            got: m.rows,
        });
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidConfig {
            reason: "partial_trace keep set must be strictly increasing factor indices".into(),
        });
    }
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kd: usize = keep.iter().map(|&k| dims[k]).product();
    let td: usize = traced.iter().map(|&k| dims[k]).product();

    // linear offsets of kept and traced multi-indices
    let offsets = |factors: &[usize], count: usize| -> Vec<usize> {
        let fdims: Vec<usize> = factors.iter().map(|&k| dims[k]).collect();
        (0..count)
            .map(|mut r| {
                let mut lin = 0;
                for (k, &f) in factors.iter().enumerate() {
                    let block: usize = fdims[k + 1..].iter().product();
                    lin += (r / block) * strides[f];
                    r %= block;
                }
                lin
            })
            .collect()
    };
    let keep_off = offsets(keep, kd);
    let trace_off = offsets(&traced, td);

    let mut out = CMat::zeros(kd, kd);
    for r in 0..kd {
        for c in 0..kd {
            let mut s = C_ZERO;
            for &t in &trace_off {
                s += m[(keep_off[r] + t, keep_off[c] + t)];
            }
            out[(r, c)] = s;
        }
    }
    Ok(out)
}

/// tr_S[(W_S (x) I) M] for a weight operator W on the factors listed in
/// `positions` (strictly increasing): trace out those factors of `M`,
/// weighted by `W`. The result lives on the remaining factors in their
/// original order. Contracted directly, so it costs
/// O(dim_rest^2 * dim_S^2) instead of a full-space multiplication.
pub fn weighted_partial_trace(
    weight: &CMat,
    m: &CMat,
    dims: &[usize],
    positions: &[usize],
) -> Result<CMat> {
    let n: usize = dims.iter().product();
    if m.rows != n || !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "weighted_partial_trace operand",
            expected: n,
            got: m.rows,
        });
    }
    let wd: usize = positions.iter().map(|&k| dims[k]).product();
    if weight.rows != wd || !weight.is_square() {
        return Err(Error::DimensionMismatch {
            context: "weighted_partial_trace weight",
            expected: wd,
            got: weight.rows,
        });
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) || positions.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidConfig {
            reason: "weighted_partial_trace positions must be strictly increasing".into(),
        });
    }
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !positions.contains(k)).collect();
    let rd: usize = rest.iter().map(|&k| dims[k]).product();
    let offsets = |factors: &[usize], count: usize| -> Vec<usize> {
        let fdims: Vec<usize> = factors.iter().map(|&k| dims[k]).collect();
        (0..count)
            .map(|mut r| {
                let mut lin = 0;
                for (k, &f) in factors.iter().enumerate() {
                    let block: usize = fdims[k + 1..].iter().product();
                    lin += (r / block) * strides[f];
                    r %= block;
                }
                lin
            })
            .collect()
    };
    let w_off = offsets(positions, wd);
    let r_off = offsets(&rest, rd);

    // out[y, y'] = sum_{x, x'} W[x, x'] M[(x', y), (x, y')]
    let mut out = CMat::zeros(rd, rd);
    for x in 0..wd {
        for xp in 0..wd {
            let wv = weight[(x, xp)];
            if wv == C_ZERO {
                continue;
            }
            for y in 0..rd {
                let mrow = (w_off[xp] + r_off[y]) * n;
                for yp in 0..rd {
                    out[(y, yp)] += wv * m.data[mrow + w_off[x] + r_off[yp]];
                }
            }
        }
    }
    Ok(out)
}

/// Embed an operator acting on the factors listed in `positions`
/// (in the operator's own factor order) into the full space described by
/// `dims`, tensoring identity on the remaining factors.
pub fn embed(m: &CMat, dims: &[usize], positions: &[usize]) -> Result<CMat> {
    let op_dim: usize = positions.iter().map(|&p| dims[p]).product();
    if m.rows != op_dim || m.cols != op_dim {
        return Err(Error::DimensionMismatch {
            context: "embed",
            expected: op_dim,
            got: m.rows,
        });
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !positions.contains(k)).collect();
    let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
    let big = tensor(m, &CMat::identity(rest_dim));
    // factor order of `big`: positions..., rest...; permute back to natural order
    let concat: Vec<usize> = positions.iter().chain(rest.iter()).copied().collect();
    let concat_dims: Vec<usize> = concat.iter().map(|&k| dims[k]).collect();
    let mut perm = vec![0usize; dims.len()];
    for (slot, &orig) in concat.iter().enumerate() {
        perm[orig] = slot;
    }
    Ok(permute_factors(&big, &concat_dims, &perm))
}

/// Hermitian eigendecomposition, eigenvalues descending.
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: CMat,
}

impl HermEig {
    /// Sum_j lambda_j |v_j><v_j| for a subset of eigenpairs.
    pub fn reconstruct_with(&self, weight: impl Fn(usize, f64) -> f64) -> CMat {
        let n = self.vectors.rows();
        let mut out = CMat::zeros(n, n);
        for (j, &lam) in self.values.iter().enumerate() {
            let w = weight(j, lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(j);
            for r in 0..n {
                for c in 0..n {
                    out[(r, c)] += v[r] * v[c].conj() * w;
                }
            }
        }
        out
    }
}

fn check_hermitian(h: &CMat) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let dev = h.herm_deviation();
    if dev > tol::HERMITICITY {
        return Err(Error::NonHermitian { deviation: dev });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// (M + M^dag)/2 before the solve; inputs further than [`tol::HERMITICITY`]
/// from Hermitian are rejected.
pub fn herm_eig(h: &CMat) -> Result<HermEig> {
    check_hermitian(h)?;
    let sym = h.hermitian_part().to_nalgebra();
    let eig = sym.symmetric_eigen();
    let n = h.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Signed spectral decomposition of a Hermitian matrix, ordered by
/// decreasing |lambda|. The |values| are the singular values.
pub fn herm_svd(f: &CMat) -> Result<HermEig> {
    let eig = herm_eig(f)?;
    let n = f.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.values[b]
            .abs()
            .partial_cmp(&eig.values[a].abs())
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.vectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMat) -> Result<f64> {
    Ok(*herm_eig(h)?
        .values
        .last()
        .expect("non-empty eigenvalue list"))
}

fn standard_complex(rng: &mut impl Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im)
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| standard_complex(rng))
}

/// Random density matrix of the requested rank (Ginibre construction
/// G G^dag / tr).
pub fn random_density(d: usize, rank: usize, rng: &mut impl Rng) -> CMat {
    assert!(rank >= 1 && rank <= d, "rank must be in 1..=d");
    let g = ginibre(d, rank, rng);
    let gg = g.matmul(&g.adjoint());
    let t = gg.trace().re;
    gg.scale_re(1.0 / t)
}

pub fn random_density_seeded(d: usize, rank: usize, seed: u64) -> CMat {
    random_density(d, rank, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, d, rng).to_nalgebra();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C_ONE
        };
        for i in 0..d {
            q[(i, j)] *= phase.conj();
        }
    }
    CMat::from_nalgebra(&q)
}

/// Random dichotomic observable: Haar-random orthonormal frame with a
/// balanced-as-possible +1/-1 assignment. Spectrum is exactly {+1, -1}.
pub fn random_observable(d: usize, rng: &mut impl Rng) -> CMat {
    let u = haar_unitary(d, rng);
    let signs: Vec<f64> = (0..d)
        .map(|k| if k < d.div_ceil(2) { 1.0 } else { -1.0 })
        .collect();
    let ud = CMat::from_fn(d, d, |i, j| u[(i, j)] * signs[j]);
    ud.matmul(&u.adjoint())
}

pub fn random_observable_seeded(d: usize, seed: u64) -> CMat {
    random_observable(d, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random pure state vector, normalized.
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d).map(|_| standard_complex(rng)).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}
