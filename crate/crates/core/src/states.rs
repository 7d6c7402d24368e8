//! Product states, state sets, and the generators for every set used in the
//! analyses.
//!
//! Local factors are stored unnormalized, as small integer combinations of
//! computational basis vectors (`|0+1>` is stored as `(1, 1)`). Normalization is
//! applied on demand whenever an inner product or global vector is needed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{self, ComplexMatrix};
use crate::tolerance::Tolerances;

/// A fully separable pure state `|a1>|a2>...|am>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub label: String,
    pub factors: Vec<Vec<Complex64>>,
}

impl ProductState {
    pub fn new(label: impl Into<String>, factors: Vec<Vec<Complex64>>) -> Self {
        Self {
            label: label.into(),
            factors,
        }
    }

    pub fn normalized_factor(&self, party: usize) -> Vec<Complex64> {
        tensor::normalized(&self.factors[party])
    }

    /// Normalized global amplitude vector.
    pub fn global_vector(&self) -> Vec<Complex64> {
        let normed: Vec<Vec<Complex64>> = (0..self.factors.len()).map(|p| self.normalized_factor(p)).collect();
        tensor::tensor_product(&normed)
    }

    /// `<self|other>` on normalized states, as a product of local overlaps.
    pub fn overlap(&self, other: &ProductState) -> Complex64 {
        self.factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| tensor::inner(a, b) / (tensor::norm(a) * tensor::norm(b)))
            .product()
    }

    /// Indices where the normalized factor of `party` has magnitude above `tol`.
    pub fn support(&self, party: usize, tol: f64) -> Vec<usize> {
        self.normalized_factor(party)
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > tol)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Mutually orthogonal product states over parties with dimensions `dims`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSet {
    pub name: String,
    pub dims: Vec<usize>,
    pub states: Vec<ProductState>,
}

impl StateSet {
    /// Checks shapes only: one factor per party, factor lengths matching `dims`,
    /// no zero factor, and at most `∏ dims` states. Orthogonality is checked by
    /// [`verify_set`].
    pub fn new(name: impl Into<String>, dims: Vec<usize>, states: Vec<ProductState>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidParameter(format!("bad party dimensions {dims:?}")));
        }
        for s in &states {
            if s.factors.len() != dims.len() {
                return Err(Error::DimensionMismatch(format!(
                    "state {} has {} factors for {} parties",
                    s.label,
                    s.factors.len(),
                    dims.len()
                )));
            }
            for (p, (f, &d)) in s.factors.iter().zip(&dims).enumerate() {
                if f.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "state {} factor {} has length {}, party dimension is {d}",
                        s.label,
                        p + 1,
                        f.len()
                    )));
                }
                if tensor::norm(f) == 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "state {} has a zero factor on party {}",
                        s.label,
                        p + 1
                    )));
                }
            }
        }
        let set = Self {
            name: name.into(),
            dims,
            states,
        };
        if set.len() > set.total_dim() {
            return Err(Error::InvalidParameter(format!(
                "{} states exceed the space dimension {}",
                set.len(),
                set.total_dim()
            )));
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn party_count(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(|s| s.label.clone()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s.label == label)
    }

    /// The states at `indices`, in that order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<StateSet> {
        let states = indices
            .iter()
            .map(|&i| {
                self.states
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("no state at index {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        StateSet::new(name, self.dims.clone(), states)
    }

    /// The states with the given labels, in that order.
    pub fn subset_by_labels(&self, name: impl Into<String>, labels: &[&str]) -> Result<StateSet> {
        let idx = labels
            .iter()
            .map(|l| {
                self.position(l)
                    .ok_or_else(|| Error::InvalidParameter(format!("no state labelled {l}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.subset(name, &idx)
    }

    /// Gram matrix of the normalized states.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.len();
        ComplexMatrix::from_fn(n, n, |i, j| self.states[i].overlap(&self.states[j]))
    }

    /// `Σ |ψ><ψ|` over the normalized states.
    pub fn projector_sum(&self) -> ComplexMatrix {
        let d = self.total_dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for s in &self.states {
            sum += tensor::projector(&s.global_vector());
        }
        sum
    }
}

/// Outcome of [`verify_set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub name: String,
    pub count: usize,
    pub dimension: usize,
    pub orthogonal: bool,
    pub complete: bool,
    /// Largest off-diagonal Gram entry.
    pub gram_residual: f64,
    /// `max |Σ projectors - I|`, only evaluated when the count equals the dimension.
    pub completeness_residual: Option<f64>,
}

pub fn verify_set(set: &StateSet, tol: &Tolerances) -> SetReport {
    let gram = set.gram();
    let n = set.len();
    let mut gram_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                gram_residual = gram_residual.max(gram[(i, j)].norm());
            }
        }
    }
    let orthogonal = gram_residual <= tol.amplitude;
    let completeness_residual = (n == set.total_dim()).then(|| {
        let d = set.total_dim();
        tensor::max_abs(&(set.projector_sum() - tensor::identity(d)))
    });
    let complete = orthogonal && completeness_residual.is_some_and(|r| r <= tol.amplitude);
    SetReport {
        name: set.name.clone(),
        count: n,
        dimension: set.total_dim(),
        orthogonal,
        complete,
        gram_residual,
        completeness_residual,
    }
}

/// Parses a local ket such as `2`, `0+1`, `2-0` or `0+1+2` into integer amplitudes.
fn parse_local(d: usize, token: &str) -> Result<Vec<Complex64>> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    let mut sign = 1.0;
    for ch in token.chars() {
        match ch {
            '+' => sign = 1.0,
            '-' => sign = -1.0,
            c => {
                let k = c
                    .to_digit(10)
                    .ok_or_else(|| Error::InvalidParameter(format!("bad character {c:?} in ket {token}")))?
                    as usize;
                if k >= d {
                    return Err(Error::InvalidParameter(format!("index {k} out of range for dimension {d}")));
                }
                v[k] += sign;
                sign = 1.0;
            }
        }
    }
    Ok(v)
}

impl ProductState {
    /// Builds a state from whitespace-separated local kets, e.g. `"0 0 1 0+1"`.
    pub fn from_kets(label: impl Into<String>, dims: &[usize], kets: &str) -> Result<Self> {
        let tokens: Vec<&str> = kets.split_whitespace().collect();
        if tokens.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{kets} has {} kets for {} parties",
                tokens.len(),
                dims.len()
            )));
        }
        let factors = tokens
            .iter()
            .zip(dims)
            .map(|(t, &d)| parse_local(d, t))
            .collect::<Result<_>>()?;
        Ok(ProductState::new(label, factors))
    }
}

fn product(label: impl Into<String>, dims: &[usize], kets: &str) -> ProductState {
    ProductState::from_kets(label, dims, kets).expect("valid kets")
}

fn ket_label(kets: &str) -> String {
    kets.split_whitespace().map(|t| format!("|{t}>")).collect()
}

/// Expands a pattern containing `±` into its `+` and `-` members.
fn plus_minus(pattern: &str) -> [String; 2] {
    [pattern.replace('±', "+"), pattern.replace('±', "-")]
}

fn from_patterns(name: &str, dims: &[usize], patterns: &[&str]) -> StateSet {
    let states = patterns
        .iter()
        .flat_map(|p| if p.contains('±') { plus_minus(p).to_vec() } else { vec![p.to_string()] })
        .map(|k| product(ket_label(&k), dims, &k))
        .collect();
    StateSet::new(name, dims.to_vec(), states).expect("built-in set is well formed")
}

const BENNETT_QUTRIT: [&str; 5] = ["0 0±1", "0±1 2", "2 1±2", "1±2 0", "1 1"];

/// The nine-state two-qutrit product basis.
pub fn bennett_qutrit_basis() -> StateSet {
    from_patterns("bennett-qutrit", &[3, 3], &BENNETT_QUTRIT)
}

/// The first eight states of [`bennett_qutrit_basis`] (all but `|1>|1>`).
pub fn bennett_subset_s() -> StateSet {
    from_patterns("bennett-S", &[3, 3], &BENNETT_QUTRIT[..4])
}

/// The eight-state three-qubit product basis.
pub fn bennett_three_qubit_basis() -> StateSet {
    from_patterns(
        "bennett-3qubit",
        &[2, 2, 2],
        &["0 1 0±1", "1 0±1 0", "0±1 0 1", "0 0 0", "1 1 1"],
    )
}

fn kets_to_factors(dims: &[usize], kets: &[Vec<(usize, f64)>]) -> Vec<Vec<Complex64>> {
    kets.iter()
        .zip(dims)
        .map(|(terms, &d)| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            for &(k, a) in terms {
                v[k] += a;
            }
            v
        })
        .collect()
}

/// The `6(d-1)` tripartite states in `(C^d)^⊗3`:
/// `|0>|i>|0±i>`, `|i>|0±i>|0>`, `|0±i>|0>|i>` for `i = 1..d-1`.
/// Labels are `psi_{j,i}` and `psi_{j,i}^perp`.
pub fn eq1_set(d: usize) -> Result<StateSet> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("tripartite set needs d >= 3, got {d}")));
    }
    let dims = vec![d; 3];
    let mut states = Vec::new();
    for family in 1..=3 {
        for i in 1..d {
            for (sign, suffix) in [(1.0, ""), (-1.0, "^perp")] {
                let basis = vec![(i, 1.0)];
                let zero = vec![(0, 1.0)];
                let sup = vec![(0, 1.0), (i, sign)];
                let kets = match family {
                    1 => [zero, basis, sup],
                    2 => [basis, sup, zero],
                    _ => [sup, zero, basis],
                };
                states.push(ProductState::new(
                    format!("psi_{family},{i}{suffix}"),
                    kets_to_factors(&dims, &kets),
                ));
            }
        }
    }
    StateSet::new(format!("eq1(d={d})"), dims, states)
}

/// The ten states in `C^3 ⊗ C^2 ⊗ C^2` that are indistinguishable only when
/// the two qubits are held together.
pub fn eq2_set() -> StateSet {
    let dims = [3, 2, 2];
    let rows = [
        "0-1 0 0", "0+1 0 0", "2-0 1 0", "2+0 1 0", "1 1 0-1", "1 1 0+1", "1-2 0 1", "1+2 0 1", "0 0-1 1",
        "0 0+1 1",
    ];
    let states = rows
        .iter()
        .enumerate()
        .map(|(k, r)| product(format!("psi_{}", k + 1), &dims, r))
        .collect();
    StateSet::new("eq2", dims.to_vec(), states).expect("built-in set is well formed")
}

/// The cyclic `m`-party generalization: for every family `j = 1..m` and
/// `i = 1..d-1`, `|i>` sits at party `m-j` and `|0±i>` at party `m-j+1`
/// (1-based, cyclic), with `|0>` everywhere else. `m = 3` gives the same rays
/// as [`eq1_set`].
pub fn eq3_set(m: usize, d: usize) -> Result<StateSet> {
    if m < 3 || d < 3 {
        return Err(Error::InvalidParameter(format!("generalized set needs m >= 3 and d >= 3, got m={m}, d={d}")));
    }
    let dims = vec![d; m];
    let mut states = Vec::new();
    for family in 1..=m {
        // 0-based positions of |i> and |0±i>
        let at_i = (m - family + m - 1) % m;
        let at_sup = (at_i + 1) % m;
        for i in 1..d {
            for (sign, suffix) in [(1.0, ""), (-1.0, "^perp")] {
                let kets: Vec<Vec<(usize, f64)>> = (0..m)
                    .map(|p| {
                        if p == at_i {
                            vec![(i, 1.0)]
                        } else if p == at_sup {
                            vec![(0, 1.0), (i, sign)]
                        } else {
                            vec![(0, 1.0)]
                        }
                    })
                    .collect();
                states.push(ProductState::new(
                    format!("psi_{family},{i}{suffix}"),
                    kets_to_factors(&dims, &kets),
                ));
            }
        }
    }
    let set = StateSet::new(format!("eq3(m={m},d={d})"), dims, states)?;
    let report = verify_set(&set, &Tolerances::default());
    if !report.orthogonal {
        return Err(Error::NotOrthogonal(report.gram_residual));
    }
    Ok(set)
}

/// Twisted rows of the four-qutrit basis, in printed reading order.
const EQ5_TWISTED: [&str; 20] = [
    "0 0 1 0±1", "0 0 2 0±2", "2 1 0 0±1", "1 1 2 0±1", "2 1 2 0±2",
    "0 1 0±1 0", "0 2 0±2 0", "1 0 0±1 2", "1 2 0±1 1", "1 2 0±2 2",
    "1 0±1 0 0", "2 0±2 0 0", "0 0±1 2 1", "2 0±1 1 1", "2 0±2 2 1",
    "0±1 0 0 1", "0±2 0 0 2", "0±1 2 1 0", "0±1 1 1 2", "0±2 2 1 2",
];

const EQ5_COMPUTATIONAL: [&str; 41] = [
    "0000", "0012", "0101", "0102", "0111", "0120", "0122", "0201", "0202", "0211", "0221", "0222", "1010",
    "1011", "1020", "1021", "1022", "1101", "1102", "1110", "1111", "1122", "1200", "1212", "1220", "1221",
    "2001", "2010", "2012", "2020", "2022", "2102", "2110", "2112", "2121", "2201", "2202", "2210", "2211",
    "2220", "2222",
];

/// The 81-state complete product basis of `(C^3)^⊗4`: 40 twisted states
/// followed by 41 computational states.
pub fn eq5_basis() -> StateSet {
    let spaced: Vec<String> = EQ5_COMPUTATIONAL
        .iter()
        .map(|s| s.chars().map(String::from).collect::<Vec<_>>().join(" "))
        .collect();
    let mut patterns: Vec<&str> = EQ5_TWISTED.to_vec();
    patterns.extend(spaced.iter().map(String::as_str));
    from_patterns("eq5", &[3, 3, 3, 3], &patterns)
}

/// Indices into [`eq5_basis`] of the sixteen twisted states in the first two
/// printed columns; as rays they coincide with `eq3_set(4, 3)`.
pub fn eq5_first_sixteen() -> Vec<usize> {
    (0..4)
        .flat_map(|row| (0..2).flat_map(move |col| [2 * (5 * row + col), 2 * (5 * row + col) + 1]))
        .collect()
}

/// `{psi_1, psi_3, psi_5, psi_7, psi_9}` of [`eq2_set`] plus `|s> = |0+1+2>|0+1>|0+1>`.
pub fn six_state_set() -> StateSet {
    let eq2 = eq2_set();
    let mut states: Vec<ProductState> = [0, 2, 4, 6, 8].iter().map(|&k| eq2.states[k].clone()).collect();
    states.push(product("s", &[3, 2, 2], "0+1+2 0+1 0+1"));
    StateSet::new("six-state", vec![3, 2, 2], states).expect("built-in set is well formed")
}

/// Computational basis of `⊗ C^d`, labelled by digit strings.
pub fn computational_basis(dims: &[usize]) -> Result<StateSet> {
    let probe = StateSet::new("computational", dims.to_vec(), Vec::new())?;
    let total = probe.total_dim();
    let mut states = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut digits = vec![0; dims.len()];
        for p in (0..dims.len()).rev() {
            digits[p] = rem % dims[p];
            rem /= dims[p];
        }
        let factors = digits
            .iter()
            .zip(dims)
            .map(|(&k, &d)| kets_to_factors(&[d], &[vec![(k, 1.0)]]).remove(0))
            .collect();
        let label = digits.iter().map(|k| format!("|{k}>")).collect::<String>();
        states.push(ProductState::new(label, factors));
    }
    StateSet::new(format!("computational{dims:?}"), dims.to_vec(), states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn bennett_sets_are_complete_or_subsets() {
        let q = bennett_qutrit_basis();
        assert_eq!(q.len(), 9);
        let r = verify_set(&q, &tol());
        assert!(r.orthogonal && r.complete, "{r:?}");

        let s = bennett_subset_s();
        assert_eq!(s.len(), 8);
        assert!(s.states.iter().all(|st| q.states.contains(st)));
        let r = verify_set(&s, &tol());
        assert!(r.orthogonal && !r.complete);

        let b3 = bennett_three_qubit_basis();
        assert_eq!(b3.len(), 8);
        let r = verify_set(&b3, &tol());
        assert!(r.orthogonal && r.complete);
    }

    #[test]
    fn tripartite_set_sizes_and_first_state() {
        let s3 = eq1_set(3).unwrap();
        assert_eq!(s3.len(), 12);
        assert!(verify_set(&s3, &tol()).orthogonal);
        assert_eq!(eq1_set(4).unwrap().len(), 18);
        let first = &s3.states[0];
        assert_eq!(first.label, "psi_1,1");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = crate::tensor::tensor_product(&[
            parse_local(3, "0").unwrap(),
            parse_local(3, "1").unwrap(),
            vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        let v = first.global_vector();
        assert!(v.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-15));
        assert!(eq1_set(2).is_err());
    }

    #[test]
    fn eq2_rows() {
        let s = eq2_set();
        assert_eq!(s.len(), 10);
        assert_eq!(s.dims, vec![3, 2, 2]);
        let r = verify_set(&s, &tol());
        assert!(r.orthogonal && !r.complete);
        assert_eq!(s.states[4], product("psi_5", &[3, 2, 2], "1 1 0-1"));
    }

    #[test]
    fn eq3_counts() {
        for (m, d, n) in [(3, 3, 12), (4, 3, 16), (5, 3, 20), (4, 4, 24), (6, 3, 24)] {
            let s = eq3_set(m, d).unwrap();
            assert_eq!(s.len(), n);
            assert_eq!(s.len(), 2 * m * (d - 1));
        }
        assert!(eq3_set(2, 3).is_err());
        assert!(eq3_set(4, 2).is_err());
    }

    #[test]
    fn eq3_places_last_family_cyclically() {
        let s = eq3_set(4, 3).unwrap();
        // family m: |0+i>|0>|0>|i>
        let last = s.position("psi_4,1").unwrap();
        assert_eq!(s.states[last], ProductState::new("psi_4,1", product("", &[3; 4], "0+1 0 0 1").factors));
        let first = s.position("psi_1,2^perp").unwrap();
        assert_eq!(s.states[first].factors, product("", &[3; 4], "0 0 2 0-2").factors);
    }

    #[test]
    fn eq5_is_a_complete_basis() {
        let b = eq5_basis();
        assert_eq!(b.len(), 81);
        let r = verify_set(&b, &tol());
        assert!(r.orthogonal && r.complete, "{r:?}");
        assert!(r.completeness_residual.unwrap() <= 1e-9);
        assert_eq!(b.states[0].label, "|0>|0>|1>|0+1>");
        assert_eq!(b.states[1].label, "|0>|0>|1>|0-1>");
        assert_eq!(b.states[80].label, "|2>|2>|2>|2>");
        assert_eq!(eq5_first_sixteen().len(), 16);
    }

    #[test]
    fn six_state_set_shape() {
        let s = six_state_set();
        assert_eq!(s.len(), 6);
        assert!(verify_set(&s, &tol()).orthogonal);
        let st = &s.states[5];
        let n: f64 = st.factors.iter().map(|f| crate::tensor::norm(f)).product();
        assert!((n - 12f64.sqrt()).abs() < 1e-12);
        assert!(st.overlap(&s.states[0]).norm() < 1e-15);
    }

    #[test]
    fn duplicate_state_is_not_orthogonal() {
        let mut s = eq2_set();
        s.states.push(s.states[0].clone());
        assert!(!verify_set(&s, &tol()).orthogonal);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(eq5_basis(), eq5_basis());
        assert_eq!(eq3_set(5, 3).unwrap(), eq3_set(5, 3).unwrap());
    }

    #[test]
    fn shape_errors() {
        let bad = ProductState::new("x", vec![parse_local(2, "0").unwrap()]);
        assert!(StateSet::new("x", vec![2, 2], vec![bad]).is_err());
        let zero = ProductState::new("z", vec![vec![Complex64::new(0.0, 0.0); 2]]);
        assert!(StateSet::new("z", vec![2], vec![zero]).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let s = eq2_set();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with(r#"{"name":"eq2","dims":[3,2,2],"states":[{"label":"psi_1","factors":[[[1.0,0.0],[-1.0,0.0],[0.0,0.0]]"#));
        let back: StateSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
