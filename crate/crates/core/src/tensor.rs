//! Dense complex linear algebra over small multipartite spaces.
//!
//! Tensor indices are big-endian over parties: for dims `(d1, d2, ..., dm)`
//! the computational basis state `|i1 i2 ... im>` sits at
//! `((i1 * d2 + i2) * d3 + i3) ...`. Every module in the crate shares this
//! convention.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Tolerance used when a matrix is required to be Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Kronecker product: `(a⊗b)[i*rb + k, j*cb + l] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two amplitude vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Tensor product of per-party factors, party 0 most significant.
pub fn tensor_product<V: AsRef<[Complex64]>>(factors: &[V]) -> Vec<Complex64> {
    factors
        .iter()
        .fold(vec![ONE], |acc, f| kron_vec(&acc, f.as_ref()))
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(a: &[Complex64]) -> Vec<Complex64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// `|v><v|`.
pub fn projector(v: &[Complex64]) -> ComplexMatrix {
    let d = v.len();
    ComplexMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj())
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// Which tensor factor a partial transpose acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Partial transpose of a bipartite operator on `C^dA ⊗ C^dB`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: [usize; 2], side: Side) -> Result<ComplexMatrix> {
    let [da, db] = dims;
    let d = da * db;
    if rho.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {d}x{d} for dims {da}x{db}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..da {
        for k in 0..db {
            for j in 0..da {
                for l in 0..db {
                    let (r, c) = match side {
                        Side::First => (j * db + k, i * db + l),
                        Side::Second => (i * db + l, j * db + k),
                    };
                    out[(r, c)] = rho[(i * db + k, j * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Row-major strides for big-endian indexing over `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        s[p] = s[p + 1] * dims[p + 1];
    }
    s
}

/// Index map for reordering parties: new party `k` is old party `order[k]`.
/// Returns, for every new flat index, the old flat index.
fn permutation_indices(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);
    (0..total)
        .map(|new_idx| {
            order
                .iter()
                .enumerate()
                .map(|(k, &p)| (new_idx / new_strides[k]) % new_dims[k] * old_strides[p])
                .sum()
        })
        .collect()
}

fn check_order(dims: &[usize], order: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "party order has {} entries for {} parties",
            order.len(),
            dims.len()
        )));
    }
    for &p in order {
        if p >= dims.len() || seen[p] {
            return Err(Error::InvalidParameter(format!("{order:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reorders the tensor factors of a vector: new party `k` is old party `order[k]`.
pub fn permute_vector(v: &[Complex64], dims: &[usize], order: &[usize]) -> Result<Vec<Complex64>> {
    check_order(dims, order)?;
    if v.len() != dims.iter().product::<usize>() {
        return Err(Error::DimensionMismatch(format!("vector length {} vs dims {dims:?}", v.len())));
    }
    Ok(permutation_indices(dims, order).into_iter().map(|i| v[i]).collect())
}

/// Reorders the tensor factors of an operator: new party `k` is old party `order[k]`.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    check_order(dims, order)?;
    let d: usize = dims.iter().product();
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} for dims {dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let idx = permutation_indices(dims, order);
    Ok(ComplexMatrix::from_fn(d, d, |r, c| m[(idx[r], idx[c])]))
}

/// Spectrum of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    /// `V Λ V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        &self.vectors * lambda * self.vectors.adjoint()
    }
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Eigen> {
    let dev = hermitian_deviation(m);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.min())
}

/// Gram-Schmidt: extends the orthonormal `basis` with the normalized residuals of
/// `candidates` whose norm after projection exceeds `tol`. Two projection passes
/// keep the result orthonormal to working precision.
pub fn extend_orthonormal<V: AsRef<[Complex64]>>(
    basis: &mut Vec<Vec<Complex64>>,
    candidates: &[V],
    tol: f64,
) {
    for cand in candidates {
        let cand = cand.as_ref();
        let scale = norm(cand);
        if scale == 0.0 {
            continue;
        }
        let mut r: Vec<Complex64> = cand.iter().map(|x| x / scale).collect();
        for _ in 0..2 {
            for q in basis.iter() {
                let c = inner(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        let n = norm(&r);
        if n > tol {
            basis.push(r.into_iter().map(|x| x / n).collect());
        }
    }
}

/// Orthonormal basis of the span of `vectors`.
pub fn orthonormal_span<V: AsRef<[Complex64]>>(vectors: &[V], tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, vectors, tol);
    basis
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `C^dim`,
/// built from the computational basis vectors in ascending order.
pub fn orthogonal_complement(basis: &[Vec<Complex64>], dim: usize, tol: f64) -> Vec<Vec<Complex64>> {
    let mut full = basis.to_vec();
    let start = full.len();
    let units: Vec<Vec<Complex64>> = (0..dim)
        .map(|k| (0..dim).map(|j| if j == k { ONE } else { ZERO }).collect())
        .collect();
    extend_orthonormal(&mut full, &units, tol);
    full.split_off(start)
}

/// One homogeneous condition `<bra| Π |ket> = 0` on an unknown Hermitian `Π`.
#[derive(Debug, Clone)]
pub struct HermitianConstraint {
    pub bra: Vec<Complex64>,
    pub ket: Vec<Complex64>,
}

impl HermitianConstraint {
    pub fn new(bra: Vec<Complex64>, ket: Vec<Complex64>) -> Self {
        Self { bra, ket }
    }

    /// `<bra| m |ket>`.
    pub fn evaluate(&self, m: &ComplexMatrix) -> Complex64 {
        let mk = m * ComplexVector::from_column_slice(&self.ket);
        inner(&self.bra, mk.as_slice())
    }
}

/// Real vector space of Hermitian matrices satisfying a constraint system.
#[derive(Debug, Clone)]
pub struct HermitianSolutionSpace {
    pub dim: usize,
    pub basis: Vec<ComplexMatrix>,
    pub rank: usize,
}

impl HermitianSolutionSpace {
    /// Whether `m` lies in the real span of the basis, judged by the residual of
    /// its orthogonal projection in the Hilbert-Schmidt inner product.
    pub fn contains(&self, m: &ComplexMatrix, tol: f64) -> bool {
        let coords: Vec<f64> = self.basis.iter().map(|b| hs_real(b, m)).collect();
        let mut proj = ComplexMatrix::zeros(self.dim, self.dim);
        for (b, c) in self.basis.iter().zip(coords) {
            proj += b.scale(c);
        }
        max_abs(&(m - proj)) <= tol
    }
}

/// `Re tr(a^dagger b)`.
fn hs_real(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Enumerates the `D²` real generators of the Hermitian matrices: diagonal units,
/// then for every `k < l` the symmetric pair `E_kl + E_lk` and the antisymmetric
/// pair `i E_kl - i E_lk`. The generators are orthonormal up to a factor √2 on
/// the off-diagonal ones.
#[derive(Debug, Clone, Copy)]
enum Generator {
    Diagonal(usize),
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

fn generators(dim: usize) -> Vec<Generator> {
    let mut g: Vec<Generator> = (0..dim).map(Generator::Diagonal).collect();
    for k in 0..dim {
        for l in k + 1..dim {
            g.push(Generator::Symmetric(k, l));
            g.push(Generator::Antisymmetric(k, l));
        }
    }
    g
}

impl Generator {
    /// `<u| G |v>`.
    fn sandwich(self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        match self {
            Generator::Diagonal(k) => u[k].conj() * v[k],
            Generator::Symmetric(k, l) => u[k].conj() * v[l] + u[l].conj() * v[k],
            Generator::Antisymmetric(k, l) => I * (u[k].conj() * v[l] - u[l].conj() * v[k]),
        }
    }

    fn add_to(self, m: &mut ComplexMatrix, x: f64) {
        match self {
            Generator::Diagonal(k) => m[(k, k)] += x,
            Generator::Symmetric(k, l) => {
                m[(k, l)] += x;
                m[(l, k)] += x;
            }
            Generator::Antisymmetric(k, l) => {
                m[(k, l)] += I * x;
                m[(l, k)] -= I * x;
            }
        }
    }
}

/// Solves `<bra|Π|ket> = 0` for all constraints over Hermitian `Π` of size `dim`.
///
/// Each constraint contributes its real and imaginary part as two real rows in
/// the generator coordinates. The null space of the stacked system is read off
/// the right singular vectors whose singular value is at most
/// `rank_tol * σ_max`. Hermiticity makes `<ket|Π|bra> = 0` follow automatically.
pub fn solve_hermitian_constraints(
    dim: usize,
    constraints: &[HermitianConstraint],
    rank_tol: f64,
) -> Result<HermitianSolutionSpace> {
    for (n, c) in constraints.iter().enumerate() {
        if c.bra.len() != dim || c.ket.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "constraint {n} has vectors of length {}/{}, expected {dim}",
                c.bra.len(),
                c.ket.len()
            )));
        }
    }
    let gens = generators(dim);
    let cols = gens.len();
    let to_matrix = |coeffs: &[f64]| {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (g, &x) in gens.iter().zip(coeffs) {
            if x != 0.0 {
                g.add_to(&mut m, x);
            }
        }
        m
    };

    if constraints.is_empty() || cols == 0 {
        let basis = (0..cols)
            .map(|k| {
                let mut e = vec![0.0; cols];
                e[k] = 1.0;
                to_matrix(&e)
            })
            .collect();
        return Ok(HermitianSolutionSpace { dim, basis, rank: cols });
    }

    // Pad with zero rows so the SVD exposes all `cols` right singular vectors.
    let rows = (2 * constraints.len()).max(cols);
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (n, c) in constraints.iter().enumerate() {
        for (j, g) in gens.iter().enumerate() {
            let z = g.sandwich(&c.bra, &c.ket);
            a[(2 * n, j)] = z.re;
            a[(2 * n + 1, j)] = z.im;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max;
    let basis: Vec<ComplexMatrix> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| {
            let coeffs: Vec<f64> = v_t.row(k).iter().copied().collect();
            to_matrix(&coeffs)
        })
        .collect();
    Ok(HermitianSolutionSpace {
        dim,
        rank: basis.len(),
        basis,
    })
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}
