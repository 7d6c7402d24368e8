//! Bound-entanglement distribution checks: the normalized projector onto the
//! complement of an orthogonal product set, separability certificates from
//! product-basis completion in `2 ⊗ d`, the partial-transpose test and the
//! Choi-map witness.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partition::{coarse_grain, Partition};
use crate::states::{verify_set, ProductState, StateSet};
use crate::tensor::{self, ComplexMatrix, Side};
use crate::tolerance::Tolerances;

fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    matrix_rows(m).serialize(s)
}

/// Row-major nested rows, the layout used for matrices in JSON.
pub fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// Inverse of [`matrix_rows`]; rejects ragged input.
pub fn matrix_from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(n, c, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityMatrix {
    pub dims: Vec<usize>,
    #[serde(serialize_with = "serialize_matrix")]
    pub matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within `tol.amplitude`.
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} for dims {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > tol.amplitude {
            return Err(Error::InvalidParameter(format!("trace {trace} is not 1")));
        }
        let min = tensor::min_eigenvalue(&matrix)?;
        if min < -tol.amplitude {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { dims, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The matrix with parties reordered as the blocks of `p`, and the two
    /// merged dimensions, for a two-block `p`.
    pub fn bipartite_view(&self, p: &Partition) -> Result<(ComplexMatrix, [usize; 2])> {
        if p.len() != 2 || p.party_count() != self.dims.len() {
            return Err(Error::InvalidPartition(format!(
                "{p} is not a bipartition of {} parties",
                self.dims.len()
            )));
        }
        let m = tensor::permute_subsystems(&self.matrix, &self.dims, &p.party_order())?;
        let side = |k: usize| p.block(k).iter().map(|&q| self.dims[q]).product();
        Ok((m, [side(0), side(1)]))
    }
}

/// `(I - Σ |φ_i><φ_i|) / (D - n)` for an orthogonal set of `n` states in dimension `D`.
pub fn complement_mixed_state(set: &StateSet, tol: &Tolerances) -> Result<DensityMatrix> {
    let report = verify_set(set, tol);
    if !report.orthogonal {
        return Err(Error::NotOrthogonal(report.gram_residual));
    }
    let d = set.total_dim();
    let rest = d - set.len();
    if rest == 0 {
        return Err(Error::CompleteSet);
    }
    let m = (tensor::identity(d) - set.projector_sum()).unscale(rest as f64);
    Ok(DensityMatrix {
        dims: set.dims.clone(),
        matrix: m,
    })
}

/// The Choi map on a single qutrit operator.
pub fn choi_map(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.shape() != (3, 3) {
        return Err(Error::DimensionMismatch(format!(
            "the map acts on 3x3 matrices, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    choi_map_blocks(a, 1)
}

/// `Λ ⊗ I` on an operator over `C^3 ⊗ C^rest`: block `(k, l)` of the output
/// combines the `rest x rest` blocks exactly as the map combines scalars.
pub fn choi_map_blocks(m: &ComplexMatrix, rest: usize) -> Result<ComplexMatrix> {
    let d = 3 * rest;
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "expected {d}x{d}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let block = |k: usize, l: usize| m.view((k * rest, l * rest), (rest, rest));
    let mut out = ComplexMatrix::zeros(d, d);
    for k in 0..3 {
        for l in 0..3 {
            let b = if k == l {
                (block(k, k) + block((k + 1) % 3, (k + 1) % 3)) * Complex64::new(0.5, 0.0)
            } else {
                block(k, l) * Complex64::new(-0.5, 0.0)
            };
            out.view_mut((k * rest, l * rest), (rest, rest)).copy_from(&b);
        }
    }
    Ok(out)
}

/// The qutrit rotation by π/3 in the `|0>, |1>` plane.
pub fn eq8_unitary() -> ComplexMatrix {
    let h = 3f64.sqrt() / 2.0;
    let c = |x: f64| Complex64::new(x, 0.0);
    ComplexMatrix::from_row_slice(3, 3, &[c(0.5), c(h), c(0.0), c(-h), c(0.5), c(0.0), c(0.0), c(0.0), c(1.0)])
}

pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    tensor::max_abs(&(u * u.adjoint() - tensor::identity(u.nrows())))
}

/// Minimum eigenvalue of `(Λ ⊗ I)((U ⊗ I) ρ (U ⊗ I)^†)` with the qutrit as the
/// first party. A negative value certifies entanglement across the first cut.
pub fn choi_witness_min_eig(rho: &DensityMatrix, u: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let dev = unitarity_deviation(u);
    if u.shape() != (3, 3) || dev > tol.amplitude {
        return Err(Error::NotUnitary(dev));
    }
    if rho.dims.first() != Some(&3) {
        return Err(Error::DimensionMismatch(format!(
            "first party must be a qutrit, dims are {:?}",
            rho.dims
        )));
    }
    let rest = rho.dim() / 3;
    let big_u = tensor::kron(u, &tensor::identity(rest));
    let rotated = &big_u * &rho.matrix * big_u.adjoint();
    tensor::min_eigenvalue(&choi_map_blocks(&rotated, rest)?)
}

/// Minimum eigenvalue of the partial transpose across `bipartition`.
pub fn ppt_check(rho: &DensityMatrix, bipartition: &Partition) -> Result<f64> {
    let (m, dims) = rho.bipartite_view(bipartition)?;
    tensor::min_eigenvalue(&tensor::partial_transpose(&m, dims, Side::First)?)
}

fn qubit_perp(r: &[Complex64]) -> Vec<Complex64> {
    vec![-r[1].conj(), r[0].conj()]
}

/// Orthonormal basis of `span(outer) ⊖ span(inner)`.
fn relative_complement(outer: &[Vec<Complex64>], inner: &[Vec<Complex64>], tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis = tensor::orthonormal_span(inner, tol);
    let start = basis.len();
    tensor::extend_orthonormal(&mut basis, outer, tol);
    basis.split_off(start)
}

struct RayClass {
    ray: Vec<Complex64>,
    along: Vec<Vec<Complex64>>,
    across: Vec<Vec<Complex64>>,
}

/// Completes an orthogonal product set in `2 ⊗ d` (or `d ⊗ 2`) to a full
/// orthogonal product basis. The input states come first, followed by the
/// new states labelled `fill_1`, `fill_2`, ...
///
/// Qubit factors are grouped into classes of rays equal or orthogonal to one
/// another. Factors of distinct classes overlap, so their partner vectors are
/// orthogonal and the partner spans `T_c` of different classes are mutually
/// orthogonal. Each class is completed inside `T_c`, and the remainder of
/// `C^d` is covered by the computational qubit basis.
pub fn complete_product_basis(set: &StateSet, tol: &Tolerances) -> Result<StateSet> {
    if set.party_count() != 2 || !set.dims.contains(&2) {
        return Err(Error::CompletionFailed(format!(
            "need a 2 ⊗ d set, got dims {:?}",
            set.dims
        )));
    }
    let report = verify_set(set, tol);
    if !report.orthogonal {
        return Err(Error::NotOrthogonal(report.gram_residual));
    }
    let q = set.dims.iter().position(|&d| d == 2).expect("qubit side");
    let o = 1 - q;
    let d = set.dims[o];

    let mut classes: Vec<RayClass> = Vec::new();
    for s in &set.states {
        let r = s.normalized_factor(q);
        let v = s.normalized_factor(o);
        let mut placed = false;
        for c in classes.iter_mut() {
            let ov = tensor::inner(&c.ray, &r).norm();
            if (ov - 1.0).abs() <= tol.amplitude {
                c.along.push(v.clone());
                placed = true;
            } else if ov <= tol.amplitude {
                c.across.push(v.clone());
                placed = true;
            }
            if placed {
                break;
            }
        }
        if !placed {
            classes.push(RayClass {
                ray: r,
                along: vec![v],
                across: Vec::new(),
            });
        }
    }

    let mut fills: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::new();
    let mut covered: Vec<Vec<Complex64>> = Vec::new();
    for c in &classes {
        let all: Vec<Vec<Complex64>> = c.along.iter().chain(&c.across).cloned().collect();
        let t_c = tensor::orthonormal_span(&all, tol.rank);
        for x in relative_complement(&t_c, &c.along, tol.rank) {
            fills.push((c.ray.clone(), x));
        }
        let perp = qubit_perp(&c.ray);
        for x in relative_complement(&t_c, &c.across, tol.rank) {
            fills.push((perp.clone(), x));
        }
        covered.extend(t_c);
    }
    let covered = tensor::orthonormal_span(&covered, tol.rank);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for w in tensor::orthogonal_complement(&covered, d, tol.rank) {
        fills.push((vec![one, zero], w.clone()));
        fills.push((vec![zero, one], w));
    }

    let mut states = set.states.clone();
    for (k, (r, v)) in fills.into_iter().enumerate() {
        let factors = if q == 0 { vec![r, v] } else { vec![v, r] };
        states.push(ProductState::new(format!("fill_{}", k + 1), factors));
    }
    let done = StateSet::new(format!("{}+completion", set.name), set.dims.clone(), states)?;
    let check = verify_set(&done, tol);
    if !check.complete {
        return Err(Error::CompletionFailed(format!(
            "{} states, gram residual {:e}, completeness residual {:?}",
            check.count, check.gram_residual, check.completeness_residual
        )));
    }
    Ok(done)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedProduct {
    pub weight: f64,
    /// Two factors, in the block order of the bipartition.
    pub state: ProductState,
}

/// `ρ = Σ w |π><π|` with every `π` a product across the bipartition.
#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityCertificate {
    pub bipartition: Partition,
    /// Merged dimensions of the two sides.
    pub dims: [usize; 2],
    pub decomposition: Vec<WeightedProduct>,
    pub reconstruction_residual: f64,
}

impl SeparabilityCertificate {
    /// `Σ w |π><π|` in the party order of the bipartition.
    pub fn bipartite_matrix(&self) -> ComplexMatrix {
        let d = self.dims[0] * self.dims[1];
        let mut m = ComplexMatrix::zeros(d, d);
        for wp in &self.decomposition {
            m += tensor::projector(&wp.state.global_vector()).scale(wp.weight);
        }
        m
    }

    /// The certified state in the original party order.
    pub fn density_matrix(&self, party_dims: &[usize]) -> Result<ComplexMatrix> {
        let order = self.bipartition.party_order();
        let mut inverse = vec![0; order.len()];
        for (k, &p) in order.iter().enumerate() {
            inverse[p] = k;
        }
        let merged_dims: Vec<usize> = order.iter().map(|&p| party_dims[p]).collect();
        tensor::permute_subsystems(&self.bipartite_matrix(), &merged_dims, &inverse)
    }

    /// Wraps an explicit mixture of products; the residual starts at zero.
    pub fn from_products(
        bipartition: Partition,
        dims: [usize; 2],
        decomposition: Vec<WeightedProduct>,
    ) -> Result<Self> {
        if bipartition.len() != 2 {
            return Err(Error::InvalidPartition(format!("{bipartition} is not a bipartition")));
        }
        for wp in &decomposition {
            let shape: Vec<usize> = wp.state.factors.iter().map(Vec::len).collect();
            if shape != dims || wp.weight < 0.0 {
                return Err(Error::DimensionMismatch(format!(
                    "term {} has shape {shape:?} and weight {}",
                    wp.state.label, wp.weight
                )));
            }
        }
        Ok(Self {
            bipartition,
            dims,
            decomposition,
            reconstruction_residual: 0.0,
        })
    }
}

/// Separable decomposition of `complement_mixed_state(set)` across a
/// bipartition with a qubit side: the complement is spanned by the new states
/// of a product-basis completion, each with weight `1 / (D - n)`.
pub fn separability_certificate(
    set: &StateSet,
    bipartition: &Partition,
    tol: &Tolerances,
) -> Result<SeparabilityCertificate> {
    let rho = complement_mixed_state(set, tol)?;
    if bipartition.len() != 2 {
        return Err(Error::InvalidPartition(format!("{bipartition} is not a bipartition")));
    }
    let cg = coarse_grain(set, bipartition)?;
    let done = complete_product_basis(&cg, tol)?;
    let fresh = &done.states[set.len()..];
    let w = 1.0 / fresh.len() as f64;
    let decomposition: Vec<WeightedProduct> = fresh
        .iter()
        .map(|s| WeightedProduct {
            weight: w,
            state: s.clone(),
        })
        .collect();
    let mut cert = SeparabilityCertificate::from_products(bipartition.clone(), [cg.dims[0], cg.dims[1]], decomposition)?;
    let (target, _) = rho.bipartite_view(bipartition)?;
    cert.reconstruction_residual = tensor::max_abs(&(cert.bipartite_matrix() - target));
    if cert.reconstruction_residual > tol.rank {
        return Err(Error::CompletionFailed(format!(
            "reconstruction residual {:e}",
            cert.reconstruction_residual
        )));
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntanglementKind {
    Separable,
    PptEntangled,
    Undetected,
    Npt,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub bipartition: Partition,
    pub pt_min_eig: f64,
    pub witness_min_eig: f64,
    pub kind: EntanglementKind,
}

/// PPT value and Choi witness across `1 | rest`, with the qutrit first.
pub fn witness_report(rho: &DensityMatrix, u: &ComplexMatrix, tol: &Tolerances) -> Result<WitnessReport> {
    let m = rho.dims.len();
    let cut = Partition::new(vec![vec![0], (1..m).collect()], m)?;
    let pt_min_eig = ppt_check(rho, &cut)?;
    let witness_min_eig = choi_witness_min_eig(rho, u, tol)?;
    let kind = if pt_min_eig < -tol.witness {
        EntanglementKind::Npt
    } else if witness_min_eig < -tol.witness {
        EntanglementKind::PptEntangled
    } else {
        EntanglementKind::Undetected
    };
    Ok(WitnessReport {
        bipartition: cut,
        pt_min_eig,
        witness_min_eig,
        kind,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CutReport {
    /// `E_in`, `E_com` or `E_fin`.
    pub role: String,
    /// `AC|B`, `C|AB` or `A|BC`.
    pub cut: String,
    pub bipartition: Partition,
    pub kind: EntanglementKind,
    pub pt_min_eig: f64,
    pub witness_min_eig: Option<f64>,
    pub decomposition: Option<SeparabilityCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub set: String,
    pub rank: usize,
    pub cuts: Vec<CutReport>,
    /// Separable before and during the transfer, PPT-entangled after it.
    pub bound_entanglement_distributed: bool,
}

/// The three cuts of the qubit-transfer scenario for a `3 ⊗ 2 ⊗ 2` set: the
/// state must be separable across `AC|B` and `C|AB` and PPT entangled across
/// `A|BC`.
pub fn distribution_report(set: &StateSet, u: &ComplexMatrix, tol: &Tolerances) -> Result<DistributionReport> {
    if set.dims != [3, 2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "the scenario needs dims [3, 2, 2], got {:?}",
            set.dims
        )));
    }
    let rho = complement_mixed_state(set, tol)?;
    let mut cuts = Vec::new();
    for (role, cut, p) in [("E_in", "AC|B", "1,3|2"), ("E_com", "C|AB", "1,2|3")] {
        let p = Partition::parse(p, 3)?;
        let cert = separability_certificate(set, &p, tol)?;
        cuts.push(CutReport {
            role: role.into(),
            cut: cut.into(),
            bipartition: p.clone(),
            kind: EntanglementKind::Separable,
            pt_min_eig: ppt_check(&rho, &p)?,
            witness_min_eig: None,
            decomposition: Some(cert),
        });
    }
    let w = witness_report(&rho, u, tol)?;
    cuts.push(CutReport {
        role: "E_fin".into(),
        cut: "A|BC".into(),
        bipartition: w.bipartition,
        kind: w.kind,
        pt_min_eig: w.pt_min_eig,
        witness_min_eig: Some(w.witness_min_eig),
        decomposition: None,
    });
    let bound_entanglement_distributed = cuts[0].kind == EntanglementKind::Separable
        && cuts[1].kind == EntanglementKind::Separable
        && cuts[2].kind == EntanglementKind::PptEntangled;
    Ok(DistributionReport {
        set: set.name.clone(),
        rank: set.total_dim() - set.len(),
        cuts,
        bound_entanglement_distributed,
    })
}
