//! Party partitions, coarse-graining of state sets, and relabeling utilities.
//!
//! Parties are 0-based internally and 1-based in the string syntax
//! (`"1,3|2,4"`), matching the `A1 ... Am` labels.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::states::{ProductState, StateSet};
use crate::tensor;

/// Disjoint nonempty blocks of party indices covering `0..m`.
///
/// Canonical form: each block sorted ascending, blocks ordered by their
/// smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    parties: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, parties: usize) -> Result<Self> {
        let mut seen = vec![false; parties];
        let mut blocks = blocks;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            b.sort_unstable();
            for &p in b.iter() {
                if p >= parties {
                    return Err(Error::InvalidPartition(format!(
                        "party {} does not exist in a {parties}-party system",
                        p + 1
                    )));
                }
                if seen[p] {
                    return Err(Error::InvalidPartition(format!("party {} appears twice", p + 1)));
                }
                seen[p] = true;
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("party {} is not covered", p + 1)));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks, parties })
    }

    /// Every party in its own block.
    pub fn all_separate(parties: usize) -> Self {
        Self {
            blocks: (0..parties).map(|p| vec![p]).collect(),
            parties,
        }
    }

    /// One block holding every party.
    pub fn fully_merged(parties: usize) -> Self {
        Self {
            blocks: vec![(0..parties).collect()],
            parties,
        }
    }

    /// The partition with `{i, j}` as one block and every other party alone.
    pub fn pair(i: usize, j: usize, parties: usize) -> Result<Self> {
        let mut blocks = vec![vec![i, j]];
        blocks.extend((0..parties).filter(|&p| p != i && p != j).map(|p| vec![p]));
        Self::new(blocks, parties)
    }

    /// Parses the 1-based syntax `1,3|2,4` against a known party count.
    pub fn parse(s: &str, parties: usize) -> Result<Self> {
        let p: Partition = s.parse()?;
        if p.parties != parties {
            return Err(Error::InvalidPartition(format!(
                "{s} covers {} parties, the set has {parties}",
                p.parties
            )));
        }
        Ok(p)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &[usize] {
        &self.blocks[k]
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn party_count(&self) -> usize {
        self.parties
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Index of the block containing `party`.
    pub fn block_of(&self, party: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&party))
    }

    /// Whether every block of `finer` lies inside a block of `self`.
    pub fn coarsens(&self, finer: &Partition) -> bool {
        self.parties == finer.parties
            && finer.blocks.iter().all(|fb| {
                let home = self.block_of(fb[0]);
                fb.iter().all(|&p| self.block_of(p) == home)
            })
    }

    /// Parties in block order, i.e. the tensor-factor order after coarse-graining.
    pub fn party_order(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Block `k` in 1-based syntax, e.g. `"1,3"`.
    pub fn block_label(&self, k: usize) -> String {
        self.blocks[k]
            .iter()
            .map(|p| (p + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = (0..self.blocks.len()).map(|k| self.block_label(k)).collect();
        f.write_str(&s.join("|"))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for chunk in s.split('|') {
            let mut block = Vec::new();
            for tok in chunk.split(',') {
                let tok = tok.trim();
                let p: usize = tok
                    .parse()
                    .map_err(|_| Error::InvalidPartition(format!("bad party {tok:?} in {s:?}")))?;
                if p == 0 {
                    return Err(Error::InvalidPartition(format!("parties are 1-based in {s:?}")));
                }
                block.push(p - 1);
            }
            blocks.push(block);
        }
        let parties = blocks.iter().map(Vec::len).sum();
        Partition::new(blocks, parties)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All set partitions of `m` parties into exactly `k` blocks, generated from
/// restricted growth strings in lexicographic order.
pub fn enumerate_k_partitions(m: usize, k: usize) -> Result<Vec<Partition>> {
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= m, got k={k}, m={m}")));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    fn recurse(pos: usize, max: usize, k: usize, rgs: &mut Vec<usize>, out: &mut Vec<Partition>) {
        let m = rgs.len();
        // blocks still to open must fit in the remaining positions
        if max + 1 + (m - pos) < k {
            return;
        }
        if pos == m {
            if max + 1 == k {
                let mut blocks = vec![Vec::new(); k];
                for (p, &b) in rgs.iter().enumerate() {
                    blocks[b].push(p);
                }
                out.push(Partition { blocks, parties: m });
            }
            return;
        }
        for b in 0..=(max + 1).min(k - 1) {
            rgs[pos] = b;
            recurse(pos + 1, max.max(b), k, rgs, out);
        }
    }
    if m == 0 {
        return Ok(out);
    }
    rgs[0] = 0;
    recurse(1, 0, k, &mut rgs, &mut out);
    Ok(out)
}

/// Every partition of `m` parties, ordered by block count and then as in
/// [`enumerate_k_partitions`].
pub fn all_partitions(m: usize) -> Vec<Partition> {
    (1..=m)
        .flat_map(|k| enumerate_k_partitions(m, k).expect("k in range"))
        .collect()
}

/// Cyclic adjacency on `0..m`: `i` and `i+1 (mod m)` are adjacent.
pub fn cyclically_adjacent(i: usize, j: usize, m: usize) -> bool {
    i != j && ((i + 1) % m == j || (j + 1) % m == i)
}

/// Merges each block of `p` into one party. The merged factor is the Kronecker
/// product of the block's factors in ascending party order, so global rays are
/// unchanged up to the reordering of tensor factors.
pub fn coarse_grain(set: &StateSet, p: &Partition) -> Result<StateSet> {
    if p.party_count() != set.party_count() {
        return Err(Error::InvalidPartition(format!(
            "partition {p} has {} parties, the set has {}",
            p.party_count(),
            set.party_count()
        )));
    }
    let dims = p
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&q| set.dims[q]).product())
        .collect();
    let states = set
        .states
        .iter()
        .map(|s| {
            let factors = p
                .blocks()
                .iter()
                .map(|b| {
                    let parts: Vec<&Vec<Complex64>> = b.iter().map(|&q| &s.factors[q]).collect();
                    tensor::tensor_product(&parts)
                })
                .collect();
            ProductState::new(s.label.clone(), factors)
        })
        .collect();
    StateSet::new(format!("{}[{p}]", set.name), dims, states)
}

/// Partial injective relabeling of one party's computational basis.
///
/// Maps source indices `0..source_dim` into `0..target_dim`. When the two
/// dimensions agree, indices left unmapped are assigned the unused targets in
/// ascending order, so the map becomes a permutation. When `target_dim` is
/// smaller the map restricts the party to the image, and any state with
/// weight on an unmapped index is rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelMap {
    source_dim: usize,
    target_dim: usize,
    map: Vec<Option<usize>>,
}

impl RelabelMap {
    pub fn new(source_dim: usize, target_dim: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if target_dim > source_dim {
            return Err(Error::InvalidParameter(format!(
                "target dimension {target_dim} exceeds source dimension {source_dim}"
            )));
        }
        let mut map = vec![None; source_dim];
        let mut used = vec![false; target_dim];
        for &(from, to) in pairs {
            if from >= source_dim || to >= target_dim {
                return Err(Error::InvalidParameter(format!("{from}->{to} out of range")));
            }
            if map[from].is_some() {
                return Err(Error::NonInjective(format!("index {from} mapped twice")));
            }
            if used[to] {
                return Err(Error::NonInjective(format!("target {to} hit twice")));
            }
            map[from] = Some(to);
            used[to] = true;
        }
        if source_dim == target_dim {
            let mut free = (0..target_dim).filter(|&t| !used[t]);
            for slot in map.iter_mut().filter(|m| m.is_none()) {
                *slot = free.next();
            }
        }
        Ok(Self {
            source_dim,
            target_dim,
            map,
        })
    }

    /// A full permutation given as `perm[old] = new`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = perm.iter().copied().enumerate().collect();
        Self::new(perm.len(), perm.len(), &pairs)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            source_dim: dim,
            target_dim: dim,
            map: (0..dim).map(Some).collect(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn get(&self, from: usize) -> Option<usize> {
        self.map.get(from).copied().flatten()
    }
}

/// Relabels the computational basis of one party. Inner products are
/// preserved because the map is injective on every index carrying weight.
pub fn apply_relabeling(set: &StateSet, party: usize, map: &RelabelMap) -> Result<StateSet> {
    if party >= set.party_count() {
        return Err(Error::InvalidParameter(format!("no party {}", party + 1)));
    }
    if map.source_dim() != set.dims[party] {
        return Err(Error::DimensionMismatch(format!(
            "relabeling acts on dimension {}, party {} has dimension {}",
            map.source_dim(),
            party + 1,
            set.dims[party]
        )));
    }
    let mut dims = set.dims.clone();
    dims[party] = map.target_dim();
    let states = set
        .states
        .iter()
        .map(|s| {
            let mut fresh = vec![Complex64::new(0.0, 0.0); map.target_dim()];
            for (k, &amp) in s.factors[party].iter().enumerate() {
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                match map.get(k) {
                    Some(t) => fresh[t] = amp,
                    None => {
                        return Err(Error::UnmappedIndex {
                            label: s.label.clone(),
                            index: k,
                        })
                    }
                }
            }
            let mut factors = s.factors.clone();
            factors[party] = fresh;
            Ok(ProductState::new(s.label.clone(), factors))
        })
        .collect::<Result<Vec<_>>>()?;
    StateSet::new(set.name.clone(), dims, states)
}

/// Equality of two sets up to order, global phase and normalization: a
/// bijection with `|<a_σ(i)|b_i>| = 1` within `tol`. Greedy matching suffices
/// because members of an orthogonal set are pairwise distinct rays.
pub fn ray_set_equal(a: &StateSet, b: &StateSet, tol: f64) -> bool {
    if a.dims != b.dims || a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; a.len()];
    b.states.iter().all(|sb| {
        let hit = a
            .states
            .iter()
            .enumerate()
            .find(|(k, sa)| !used[*k] && (sa.overlap(sb).norm() - 1.0).abs() <= tol);
        match hit {
            Some((k, _)) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bennett_subset_s, eq2_set, eq3_set, verify_set};
    use crate::tolerance::Tolerances;

    #[test]
    fn counts_match_stirling_numbers() {
        for (m, k, n) in [(3, 2, 3), (4, 2, 7), (4, 3, 6), (5, 2, 15), (4, 4, 1), (5, 3, 25), (3, 1, 1)] {
            let parts = enumerate_k_partitions(m, k).unwrap();
            assert_eq!(parts.len(), n, "S({m},{k})");
            let mut dedup = parts.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), n);
            assert!(parts.iter().all(|p| p.len() == k));
        }
        assert_eq!(all_partitions(4).len(), 15);
        assert_eq!(all_partitions(5).len(), 52);
        assert!(enumerate_k_partitions(3, 0).is_err());
        assert!(enumerate_k_partitions(3, 4).is_err());
    }

    #[test]
    fn tripartite_bipartitions() {
        let names: Vec<String> = enumerate_k_partitions(3, 2).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["1,2|3", "1,3|2", "1|2,3"]);
    }

    #[test]
    fn parse_and_display() {
        let p = Partition::parse("2,4|1,3", 4).unwrap();
        assert_eq!(p.to_string(), "1,3|2,4");
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert!(Partition::parse("1|2", 3).is_err());
        assert!(Partition::parse("1,1|2", 2).is_err());
        assert!(Partition::parse("0|1", 2).is_err());
        assert!(Partition::parse("1|x", 2).is_err());
        assert_eq!(Partition::parse("1|2|3", 3).unwrap(), Partition::all_separate(3));
    }

    #[test]
    fn coarsening_relation() {
        let fine = Partition::parse("1|2|3|4", 4).unwrap();
        let mid = Partition::parse("1,3|2|4", 4).unwrap();
        let coarse = Partition::parse("1,3|2,4", 4).unwrap();
        assert!(mid.coarsens(&fine));
        assert!(coarse.coarsens(&mid));
        assert!(!mid.coarsens(&coarse));
        assert!(!Partition::parse("1,2|3,4", 4).unwrap().coarsens(&mid));
    }

    #[test]
    fn adjacency_is_cyclic() {
        assert!(cyclically_adjacent(0, 1, 4));
        assert!(cyclically_adjacent(3, 0, 4));
        assert!(!cyclically_adjacent(0, 2, 4));
        assert!(!cyclically_adjacent(1, 1, 4));
    }

    fn max_gram_gap(a: &StateSet, b: &StateSet) -> f64 {
        tensor::max_abs(&(a.gram() - b.gram()))
    }

    #[test]
    fn coarse_grain_keeps_gram_and_merges_dimensions() {
        let s = eq2_set();
        let p = Partition::parse("1|2,3", 3).unwrap();
        let cg = coarse_grain(&s, &p).unwrap();
        assert_eq!(cg.dims, vec![3, 4]);
        assert_eq!(cg.len(), 10);
        assert!(max_gram_gap(&s, &cg) <= 1e-12);

        let e3 = eq3_set(4, 3).unwrap();
        let cg = coarse_grain(&e3, &Partition::parse("1,3|2,4", 4).unwrap()).unwrap();
        assert_eq!(cg.dims, vec![9, 9]);
        assert_eq!(cg.len(), 16);

        let same = coarse_grain(&s, &Partition::all_separate(3)).unwrap();
        assert_eq!(same.states, s.states);
        assert!(coarse_grain(&s, &Partition::all_separate(4)).is_err());
    }

    #[test]
    fn coarse_grain_through_refinement_matches_direct() {
        let e3 = eq3_set(4, 3).unwrap();
        let direct = coarse_grain(&e3, &Partition::parse("1,2,3|4", 4).unwrap()).unwrap();
        let step = coarse_grain(&e3, &Partition::parse("1,2|3|4", 4).unwrap()).unwrap();
        let two = coarse_grain(&step, &Partition::parse("1,2|3", 3).unwrap()).unwrap();
        assert_eq!(direct.dims, two.dims);
        assert_eq!(direct.states, two.states);
    }

    #[test]
    fn relabeling_eq2_onto_bennett_rays() {
        let cg = coarse_grain(&eq2_set(), &Partition::parse("1|2,3", 3).unwrap()).unwrap();
        // |10>->0, |11>->1, |01>->2, |00>->3 on the merged BC index b*2+c
        let map = RelabelMap::new(4, 4, &[(2, 0), (3, 1), (1, 2), (0, 3)]).unwrap();
        let rel = apply_relabeling(&cg, 1, &map).unwrap();
        assert!(max_gram_gap(&cg, &rel) <= 1e-12);
        let idx: Vec<usize> = (2..10).collect();
        let sub = rel.subset("rel", &idx).unwrap();
        // drop the unused |3> level and compare with the two-qutrit subset
        let restrict = RelabelMap::new(4, 3, &[(0, 0), (1, 1), (2, 2)]).unwrap();
        let sub3 = apply_relabeling(&sub, 1, &restrict).unwrap();
        // the listed rays are the two-qutrit subset up to Alice's permutation 0->2, 1->0, 2->1
        let alice = RelabelMap::permutation(&[2, 0, 1]).unwrap();
        let aligned = apply_relabeling(&sub3, 0, &alice).unwrap();
        assert!(ray_set_equal(&aligned, &bennett_subset_s(), 1e-9));
        assert!(!ray_set_equal(&sub3, &bennett_subset_s(), 1e-9));
        // the relabeled rays are {|2±0>|0>, |1>|0±1>, |1±2>|2>, |0>|1±2>}
        let listed = StateSet::new(
            "listed",
            vec![3, 3],
            ["2+0 0", "2-0 0", "1 0+1", "1 0-1", "1+2 2", "1-2 2", "0 1+2", "0 1-2"]
                .iter()
                .map(|k| {
                    let f: Vec<Vec<Complex64>> = k
                        .split_whitespace()
                        .map(|t| {
                            let mut v = vec![Complex64::new(0.0, 0.0); 3];
                            let mut sign = 1.0;
                            for ch in t.chars() {
                                match ch {
                                    '+' => sign = 1.0,
                                    '-' => sign = -1.0,
                                    c => {
                                        v[c.to_digit(10).unwrap() as usize] += sign;
                                        sign = 1.0;
                                    }
                                }
                            }
                            v
                        })
                        .collect();
                    ProductState::new(*k, f)
                })
                .collect(),
        )
        .unwrap();
        assert!(ray_set_equal(&sub3, &listed, 1e-9));
    }

    #[test]
    fn identity_relabeling_is_a_no_op() {
        let s = eq2_set();
        let r = apply_relabeling(&s, 0, &RelabelMap::identity(3)).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn relabel_map_validation() {
        assert!(matches!(RelabelMap::new(3, 3, &[(0, 1), (1, 1)]), Err(Error::NonInjective(_))));
        assert!(matches!(RelabelMap::new(3, 3, &[(0, 1), (0, 2)]), Err(Error::NonInjective(_))));
        assert!(RelabelMap::new(2, 3, &[]).is_err());
        let s = eq2_set();
        let narrow = RelabelMap::new(3, 2, &[(0, 0), (1, 1)]).unwrap();
        assert!(matches!(apply_relabeling(&s, 0, &narrow), Err(Error::UnmappedIndex { .. })));
    }

    #[test]
    fn ray_equality_ignores_order_and_phase() {
        let s = bennett_subset_s();
        let mut shuffled = s.clone();
        shuffled.states.reverse();
        for st in shuffled.states.iter_mut().step_by(2) {
            for a in st.factors[0].iter_mut() {
                *a = -*a;
            }
        }
        assert!(ray_set_equal(&s, &shuffled, 1e-9));
        assert!(!ray_set_equal(&s, &crate::states::bennett_qutrit_basis(), 1e-9));
        assert!(verify_set(&shuffled, &Tolerances::default()).orthogonal);
    }
}
