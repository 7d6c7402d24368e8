//! Partition-level verdicts, sweeps, tripartite classification, threshold and
//! resource placement.

use rayon::prelude::*;
use serde::Serialize;

use super::opm::{indistinguishability_certificate, subset_certificate, IndistinguishabilityCertificate};
use super::search::{search_with_diagnostics, ProtocolTree, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};
use crate::partition::{all_partitions, enumerate_k_partitions, Partition};
use crate::states::{verify_set, StateSet};
use crate::tolerance::Tolerances;

/// Stuck subsets tried for a subset certificate before giving up.
const MAX_SUBSET_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", content = "certificate", rename_all = "kebab-case")]
pub enum Status {
    Distinguishable(ProtocolTree),
    Indistinguishable(IndistinguishabilityCertificate),
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistinguishabilityVerdict {
    pub partition: Partition,
    #[serde(flatten)]
    pub status: Status,
}

impl DistinguishabilityVerdict {
    pub fn is_distinguishable(&self) -> bool {
        matches!(self.status, Status::Distinguishable(_))
    }

    pub fn is_indistinguishable(&self) -> bool {
        matches!(self.status, Status::Indistinguishable(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.status, Status::Inconclusive)
    }
}

fn require_orthogonal(set: &StateSet, tol: &Tolerances) -> Result<()> {
    let report = verify_set(set, tol);
    if !report.orthogonal {
        return Err(Error::NotOrthogonal(report.gram_residual));
    }
    Ok(())
}

/// Distinguishable if the search finds a protocol; otherwise indistinguishable
/// if every block is OPM-trivial on the whole set or on a subset where the
/// search got stuck (a set containing an indistinguishable subset is itself
/// indistinguishable); otherwise inconclusive.
pub fn analyze_partition(set: &StateSet, p: &Partition, tol: &Tolerances) -> Result<DistinguishabilityVerdict> {
    require_orthogonal(set, tol)?;
    analyze_unchecked(set, p, tol)
}

fn analyze_unchecked(set: &StateSet, p: &Partition, tol: &Tolerances) -> Result<DistinguishabilityVerdict> {
    let outcome = search_with_diagnostics(set, p, tol, DEFAULT_NODE_BUDGET)?;
    let verdict = |status| DistinguishabilityVerdict {
        partition: p.clone(),
        status,
    };
    if let Some(tree) = outcome.tree {
        return Ok(verdict(Status::Distinguishable(tree)));
    }
    if let Some(cert) = indistinguishability_certificate(set, p, tol)? {
        return Ok(verdict(Status::Indistinguishable(cert)));
    }
    let mut stuck = outcome.stuck;
    stuck.sort_by_key(Vec::len);
    stuck.dedup();
    for sub in stuck.iter().filter(|s| s.len() < set.len()).take(MAX_SUBSET_ATTEMPTS) {
        if let Some(cert) = subset_certificate(set, sub, p, tol)? {
            return Ok(verdict(Status::Indistinguishable(cert)));
        }
    }
    Ok(verdict(Status::Inconclusive))
}

fn analyze_all(set: &StateSet, parts: &[Partition], tol: &Tolerances) -> Result<Vec<DistinguishabilityVerdict>> {
    require_orthogonal(set, tol)?;
    parts.par_iter().map(|p| analyze_unchecked(set, p, tol)).collect()
}

/// Verdicts for every `k`-block partition, or every partition when `k` is `None`.
pub fn sweep(set: &StateSet, k: Option<usize>, tol: &Tolerances) -> Result<Vec<DistinguishabilityVerdict>> {
    let m = set.party_count();
    let parts = match k {
        Some(k) => enumerate_k_partitions(m, k)?,
        None => all_partitions(m),
    };
    analyze_all(set, &parts, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripartiteClass {
    /// (i) indistinguishable across every bipartition.
    GenuinelyNonlocal,
    /// (ii) indistinguishable in exactly two bipartitions.
    IndistinguishableInTwo,
    /// (iii) indistinguishable in exactly one bipartition.
    IndistinguishableInOne,
    /// (iv) distinguishable in every bipartition.
    DistinguishableInAll,
}

impl TripartiteClass {
    pub fn roman(self) -> &'static str {
        match self {
            TripartiteClass::GenuinelyNonlocal => "i",
            TripartiteClass::IndistinguishableInTwo => "ii",
            TripartiteClass::IndistinguishableInOne => "iii",
            TripartiteClass::DistinguishableInAll => "iv",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutVerdict {
    /// `A|BC`, `B|CA` or `C|AB`.
    pub cut: String,
    pub verdict: DistinguishabilityVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    /// `None` when a bipartition verdict is inconclusive.
    pub class: Option<TripartiteClass>,
    pub bipartitions: Vec<CutVerdict>,
    pub all_separate: DistinguishabilityVerdict,
    pub fully_distinguishable: Option<bool>,
    /// Distinguishable in every bipartition but not when all parties are apart.
    pub fully_bi_distinguishable: Option<bool>,
    pub inconclusive: bool,
}

pub fn classify_tripartite(set: &StateSet, tol: &Tolerances) -> Result<Classification> {
    if set.party_count() != 3 {
        return Err(Error::InvalidParameter(format!(
            "classification needs 3 parties, the set has {}",
            set.party_count()
        )));
    }
    let cuts = [("A|BC", "1|2,3"), ("B|CA", "2|1,3"), ("C|AB", "3|1,2")];
    let mut parts: Vec<Partition> = cuts.iter().map(|(_, s)| Partition::parse(s, 3)).collect::<Result<_>>()?;
    parts.push(Partition::all_separate(3));
    let mut verdicts = analyze_all(set, &parts, tol)?;
    let all_separate = verdicts.pop().expect("four verdicts");
    let bipartitions: Vec<CutVerdict> = cuts
        .iter()
        .zip(verdicts)
        .map(|((cut, _), verdict)| CutVerdict {
            cut: cut.to_string(),
            verdict,
        })
        .collect();

    let any_open = bipartitions.iter().any(|c| c.verdict.is_inconclusive());
    let class = (!any_open).then(|| {
        match bipartitions.iter().filter(|c| c.verdict.is_indistinguishable()).count() {
            3 => TripartiteClass::GenuinelyNonlocal,
            2 => TripartiteClass::IndistinguishableInTwo,
            1 => TripartiteClass::IndistinguishableInOne,
            _ => TripartiteClass::DistinguishableInAll,
        }
    });
    let fully_distinguishable = match all_separate.status {
        Status::Distinguishable(_) => Some(true),
        Status::Indistinguishable(_) => Some(false),
        Status::Inconclusive => None,
    };
    let fully_bi_distinguishable = match (class, fully_distinguishable) {
        (Some(TripartiteClass::DistinguishableInAll), Some(full)) => Some(!full),
        (Some(_), _) => Some(false),
        (None, Some(true)) => Some(false),
        (None, _) => None,
    };
    let inconclusive = any_open || all_separate.is_inconclusive();
    Ok(Classification {
        class,
        bipartitions,
        all_separate,
        fully_distinguishable,
        fully_bi_distinguishable,
        inconclusive,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub verdicts: Vec<DistinguishabilityVerdict>,
    /// Smallest largest-block size among partitions with a protocol.
    pub threshold: Option<usize>,
    /// Set when an inconclusive partition with smaller blocks might lower the threshold.
    pub upper_bound: bool,
}

/// Sweeps every partition of the parties, from fully merged to all separate.
pub fn threshold_scan(set: &StateSet, tol: &Tolerances) -> Result<ThresholdReport> {
    let verdicts = sweep(set, None, tol)?;
    let threshold = verdicts
        .iter()
        .filter(|v| v.is_distinguishable())
        .map(|v| v.partition.max_block_size())
        .min();
    let upper_bound = verdicts
        .iter()
        .any(|v| v.is_inconclusive() && threshold.is_none_or(|t| v.partition.max_block_size() < t));
    Ok(ThresholdReport {
        verdicts,
        threshold,
        upper_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    /// 1-based parties sharing the resource.
    pub pair: [usize; 2],
    pub verdict: DistinguishabilityVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub pairs: Vec<PairVerdict>,
    /// Pairs whose merge gives a protocol.
    pub valid: Vec<[usize; 2]>,
    pub inconclusive: bool,
}

/// Analyzes every partition where one pair of parties is merged and the rest
/// stay apart. A pair is a valid placement for a shared resource exactly when
/// the merged partition is distinguishable.
pub fn resource_placement_analysis(set: &StateSet, tol: &Tolerances) -> Result<ResourceReport> {
    let m = set.party_count();
    let mut keys = Vec::new();
    let mut parts = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            keys.push([i + 1, j + 1]);
            parts.push(Partition::pair(i, j, m)?);
        }
    }
    let verdicts = analyze_all(set, &parts, tol)?;
    let pairs: Vec<PairVerdict> = keys
        .into_iter()
        .zip(verdicts)
        .map(|(pair, verdict)| PairVerdict { pair, verdict })
        .collect();
    let valid = pairs.iter().filter(|p| p.verdict.is_distinguishable()).map(|p| p.pair).collect();
    let inconclusive = pairs.iter().any(|p| p.verdict.is_inconclusive());
    Ok(ResourceReport {
        pairs,
        valid,
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{computational_basis, eq2_set, ProductState};
    use num_complex::Complex64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn computational_basis_is_class_iv_and_fully_distinguishable() {
        let set = computational_basis(&[2, 2, 2]).unwrap();
        let c = classify_tripartite(&set, &tol()).unwrap();
        assert_eq!(c.class, Some(TripartiteClass::DistinguishableInAll));
        assert_eq!(c.fully_distinguishable, Some(true));
        assert_eq!(c.fully_bi_distinguishable, Some(false));
        let t = threshold_scan(&set, &tol()).unwrap();
        assert_eq!(t.threshold, Some(1));
    }

    #[test]
    fn non_orthogonal_sets_are_rejected() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let set = StateSet::new(
            "bad",
            vec![2, 2],
            vec![
                ProductState::new("a", vec![vec![one, zero], vec![one, zero]]),
                ProductState::new("b", vec![vec![one, one], vec![one, zero]]),
            ],
        )
        .unwrap();
        assert!(matches!(
            analyze_partition(&set, &Partition::all_separate(2), &tol()),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn classification_requires_three_parties() {
        let set = computational_basis(&[2, 2]).unwrap();
        assert!(classify_tripartite(&set, &tol()).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let v = analyze_partition(&eq2_set(), &Partition::parse("1|2,3", 3).unwrap(), &tol()).unwrap();
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["partition"], "1|2,3");
        assert!(j.get("status").is_some());
    }
}
