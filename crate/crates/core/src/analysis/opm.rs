//! Orthogonality-preserving measurements on one block of a partition.
//!
//! A POVM element `Π` acting on block `b` keeps the post-measurement states
//! orthogonal iff `<ψ_i| Π ⊗ I |ψ_j> = <α_i|Π|α_j> · g_ij = 0` for every pair,
//! where `α` are the block factors and `g_ij` is the product of the overlaps
//! of all other factors. Pairs with `g_ij = 0` impose nothing; the rest give
//! linear conditions on `Π`. When the only solutions are multiples of the
//! identity on the span of the block factors, the block cannot start a
//! nontrivial orthogonality-preserving measurement.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{coarse_grain, Partition};
use crate::states::StateSet;
use crate::tensor::{self, ComplexMatrix, HermitianConstraint, HermitianSolutionSpace};
use crate::tolerance::Tolerances;

/// The constraint system for one block, before support compression.
#[derive(Debug, Clone)]
pub struct OpmConstraints {
    pub block: usize,
    pub block_dim: usize,
    /// Normalized block factor of every state.
    pub factors: Vec<Vec<Complex64>>,
    /// State pairs `(i, j)`, `i < j`, whose other factors overlap.
    pub pairs: Vec<(usize, usize)>,
    pub constraints: Vec<HermitianConstraint>,
    /// Orthonormal basis of the span of `factors`.
    pub support: Vec<Vec<Complex64>>,
}

impl OpmConstraints {
    pub fn support_dim(&self) -> usize {
        self.support.len()
    }

    /// Coordinates of `v` in the support basis.
    pub fn compress_vector(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.support.iter().map(|q| tensor::inner(q, v)).collect()
    }

    /// The constraints rewritten on the support span.
    pub fn compressed(&self) -> Vec<HermitianConstraint> {
        self.constraints
            .iter()
            .map(|c| HermitianConstraint::new(self.compress_vector(&c.bra), self.compress_vector(&c.ket)))
            .collect()
    }

    /// `Q X Q^dagger`: embeds an operator on the support back into the block space.
    pub fn pad(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let q = ComplexMatrix::from_fn(self.block_dim, self.support_dim(), |r, c| self.support[c][r]);
        &q * x * q.adjoint()
    }
}

/// Builds the constraint system of block `block` of `p`.
pub fn opm_constraints(set: &StateSet, p: &Partition, block: usize, tol: &Tolerances) -> Result<OpmConstraints> {
    if block >= p.len() {
        return Err(Error::InvalidParameter(format!("partition {p} has no block {}", block + 1)));
    }
    let cg = coarse_grain(set, p)?;
    let factors: Vec<Vec<Complex64>> = cg.states.iter().map(|s| s.normalized_factor(block)).collect();
    let others: Vec<Vec<Vec<Complex64>>> = cg
        .states
        .iter()
        .map(|s| {
            (0..p.len())
                .filter(|&c| c != block)
                .map(|c| s.normalized_factor(c))
                .collect()
        })
        .collect();
    let n = cg.len();
    let mut pairs = Vec::new();
    let mut constraints = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let g: Complex64 = others[i]
                .iter()
                .zip(&others[j])
                .map(|(a, b)| tensor::inner(a, b))
                .product();
            if g.norm() > tol.amplitude {
                pairs.push((i, j));
                constraints.push(HermitianConstraint::new(factors[i].clone(), factors[j].clone()));
            }
        }
    }
    let support = tensor::orthonormal_span(&factors, tol.rank);
    Ok(OpmConstraints {
        block,
        block_dim: cg.dims[block],
        factors,
        pairs,
        constraints,
        support,
    })
}

/// Triviality verdict for one block.
#[derive(Debug, Clone, Serialize)]
pub struct OpmAnalysis {
    pub block: usize,
    /// 1-based parties of the block, e.g. `"1,2"`.
    pub parties: String,
    pub block_dim: usize,
    pub support_dim: usize,
    pub constraint_count: usize,
    /// Real dimension of the Hermitian solutions on the support span.
    pub solution_rank: usize,
    pub trivial: bool,
    /// Traceless-on-support Hermitian solution, embedded in the block space.
    #[serde(serialize_with = "serialize_opt_matrix")]
    pub witness: Option<ComplexMatrix>,
}

fn serialize_opt_matrix<S: serde::Serializer>(m: &Option<ComplexMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows = m.as_ref().map(|m| {
        (0..m.nrows())
            .map(|r| m.row(r).iter().copied().collect::<Vec<Complex64>>())
            .collect::<Vec<_>>()
    });
    rows.serialize(s)
}

/// Solves a constraint system on its support span.
pub fn solve_on_support(sys: &OpmConstraints, tol: &Tolerances) -> Result<HermitianSolutionSpace> {
    tensor::solve_hermitian_constraints(sys.support_dim(), &sys.compressed(), tol.rank)
}

pub fn analyze_constraints(sys: &OpmConstraints, p: &Partition, tol: &Tolerances) -> Result<OpmAnalysis> {
    let space = solve_on_support(sys, tol)?;
    let r = sys.support_dim();
    let witness = (space.rank > 1)
        .then(|| {
            space
                .basis
                .iter()
                .map(|x| {
                    let trace: Complex64 = x.diagonal().iter().sum();
                    x - tensor::identity(r) * (trace / r as f64)
                })
                .max_by(|a, b| tensor::max_abs(a).total_cmp(&tensor::max_abs(b)))
        })
        .flatten()
        .map(|t| {
            let scale = tensor::max_abs(&t);
            sys.pad(&t.unscale(scale))
        });
    Ok(OpmAnalysis {
        block: sys.block,
        parties: p.block_label(sys.block),
        block_dim: sys.block_dim,
        support_dim: r,
        constraint_count: sys.constraints.len(),
        solution_rank: space.rank,
        trivial: space.rank == 1,
        witness,
    })
}

/// Whether block `block` of `p` can only perform trivial orthogonality-preserving
/// measurements on the set.
pub fn opm_triviality(set: &StateSet, p: &Partition, block: usize, tol: &Tolerances) -> Result<OpmAnalysis> {
    let sys = opm_constraints(set, p, block, tol)?;
    analyze_constraints(&sys, p, tol)
}

/// Every block of the partition is restricted to trivial orthogonality-preserving
/// measurements on `states`, so no party group can begin an informative
/// protocol and `states` (hence any superset) is LOCC indistinguishable.
#[derive(Debug, Clone, Serialize)]
pub struct IndistinguishabilityCertificate {
    /// Labels of the states the argument is made on.
    pub states: Vec<String>,
    /// Whether `states` is a proper subset of the analyzed set.
    pub subset: bool,
    pub blocks: Vec<OpmAnalysis>,
}

/// Certificate on the whole set, if every block is trivial.
pub fn indistinguishability_certificate(
    set: &StateSet,
    p: &Partition,
    tol: &Tolerances,
) -> Result<Option<IndistinguishabilityCertificate>> {
    let all: Vec<usize> = (0..set.len()).collect();
    subset_certificate(set, &all, p, tol)
}

/// Certificate on the states at `indices`.
pub fn subset_certificate(
    set: &StateSet,
    indices: &[usize],
    p: &Partition,
    tol: &Tolerances,
) -> Result<Option<IndistinguishabilityCertificate>> {
    if indices.len() < 2 {
        return Ok(None);
    }
    let sub = set.subset(set.name.clone(), indices)?;
    let mut blocks = Vec::with_capacity(p.len());
    for b in 0..p.len() {
        let a = opm_triviality(&sub, p, b, tol)?;
        if !a.trivial {
            return Ok(None);
        }
        blocks.push(a);
    }
    Ok(Some(IndistinguishabilityCertificate {
        states: sub.labels(),
        subset: indices.len() < set.len(),
        blocks,
    }))
}
