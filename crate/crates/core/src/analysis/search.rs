//! Protocol-tree search for perfect LOCC discrimination.
//!
//! At every node some block measures in a coarse-grained computational basis:
//! the projectors are sums of computational basis projectors over groups of
//! indices, where a group is a connected component of the overlap graph of the
//! remaining states' supports on that block. Each state lies inside exactly
//! one group, so every projector either keeps a state intact or annihilates it,
//! and orthogonality among the survivors is untouched. Leaves hold at most two
//! states, which any two orthogonal pure states allow to finish by LOCC.
//!
//! Coarser groupings never help: they yield supersets of the finest outcome
//! subsets, and a set is at least as hard as any of its subsets. The search
//! therefore only tries the finest grouping of each block.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::partition::{coarse_grain, Partition};
use crate::states::StateSet;
use crate::tolerance::Tolerances;

/// Upper bound on expanded search nodes before giving up.
pub const DEFAULT_NODE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafKind {
    /// Outcome that no remaining state can produce.
    Empty,
    Singleton,
    /// Two orthogonal states, finished by the two-state LOCC protocol.
    WalgatePair,
    /// Single-block partition: one party holds everything and measures globally.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProtocolTree {
    Measure {
        block: usize,
        parties: String,
        /// Merged computational indices of each outcome.
        groups: Vec<Vec<usize>>,
        children: Vec<ProtocolTree>,
    },
    Leaf {
        states: Vec<usize>,
        labels: Vec<String>,
        kind: LeafKind,
    },
}

impl ProtocolTree {
    pub fn depth(&self) -> usize {
        match self {
            ProtocolTree::Measure { children, .. } => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
            ProtocolTree::Leaf { .. } => 0,
        }
    }

    /// All leaves, depth-first.
    pub fn leaves(&self) -> Vec<&ProtocolTree> {
        match self {
            ProtocolTree::Measure { children, .. } => children.iter().flat_map(Self::leaves).collect(),
            leaf => vec![leaf],
        }
    }
}

/// Result of a search, with the subsets on which no block could split.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub tree: Option<ProtocolTree>,
    /// Subsets (sorted state indices) where every block saw a single group.
    pub stuck: Vec<Vec<usize>>,
    pub exhausted: bool,
}

struct Searcher<'a> {
    set: &'a StateSet,
    p: &'a Partition,
    dims: Vec<usize>,
    /// supports[state][block]
    supports: Vec<Vec<Vec<usize>>>,
    memo: HashMap<Vec<usize>, Option<ProtocolTree>>,
    stuck: Vec<Vec<usize>>,
    expanded: usize,
    budget: usize,
    exhausted: bool,
}

struct Split {
    groups: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl<'a> Searcher<'a> {
    fn leaf(&self, states: &[usize], kind: LeafKind) -> ProtocolTree {
        ProtocolTree::Leaf {
            states: states.to_vec(),
            labels: states.iter().map(|&i| self.set.states[i].label.clone()).collect(),
            kind,
        }
    }

    /// Finest computational grouping of `block` for `states`. Indices outside
    /// every support form a trailing group with no members.
    fn split(&self, block: usize, states: &[usize]) -> Split {
        let dim = self.dims[block];
        let mut parent: Vec<usize> = (0..dim).collect();
        let mut touched = vec![false; dim];
        for &s in states {
            let sup = &self.supports[s][block];
            for &k in sup {
                touched[k] = true;
            }
            for w in sup.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut root_to_group: HashMap<usize, usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut rest = Vec::new();
        for (k, &seen) in touched.iter().enumerate() {
            if !seen {
                rest.push(k);
                continue;
            }
            let r = find(&mut parent, k);
            let g = *root_to_group.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(k);
        }
        let mut members = vec![Vec::new(); groups.len()];
        for &s in states {
            let r = find(&mut parent, self.supports[s][block][0]);
            members[root_to_group[&r]].push(s);
        }
        if !rest.is_empty() {
            groups.push(rest);
            members.push(Vec::new());
        }
        Split { groups, members }
    }

    fn solve(&mut self, states: &[usize]) -> Option<ProtocolTree> {
        match states.len() {
            0 => return Some(self.leaf(states, LeafKind::Empty)),
            1 => return Some(self.leaf(states, LeafKind::Singleton)),
            2 => return Some(self.leaf(states, LeafKind::WalgatePair)),
            _ => {}
        }
        if let Some(hit) = self.memo.get(states) {
            return hit.clone();
        }
        if self.expanded >= self.budget {
            self.exhausted = true;
            return None;
        }
        self.expanded += 1;

        let mut any_split = false;
        let mut found = None;
        'blocks: for block in 0..self.p.len() {
            let split = self.split(block, states);
            if split.members.iter().filter(|m| !m.is_empty()).count() < 2 {
                continue;
            }
            any_split = true;
            let mut children = Vec::with_capacity(split.groups.len());
            for m in &split.members {
                match self.solve(m) {
                    Some(t) => children.push(t),
                    None => continue 'blocks,
                }
            }
            found = Some(ProtocolTree::Measure {
                block,
                parties: self.p.block_label(block),
                groups: split.groups,
                children,
            });
            break;
        }
        if !any_split {
            self.stuck.push(states.to_vec());
        }
        self.memo.insert(states.to_vec(), found.clone());
        found
    }
}

/// Searches for a protocol tree, keeping the diagnostics.
pub fn search_with_diagnostics(
    set: &StateSet,
    p: &Partition,
    tol: &Tolerances,
    budget: usize,
) -> Result<SearchOutcome> {
    let cg = coarse_grain(set, p)?;
    let all: Vec<usize> = (0..set.len()).collect();
    if p.len() == 1 {
        let leaf = ProtocolTree::Leaf {
            states: all,
            labels: set.labels(),
            kind: LeafKind::Joint,
        };
        return Ok(SearchOutcome {
            tree: Some(leaf),
            stuck: Vec::new(),
            exhausted: false,
        });
    }
    let supports = cg
        .states
        .iter()
        .map(|s| (0..p.len()).map(|b| s.support(b, tol.amplitude)).collect())
        .collect();
    let mut searcher = Searcher {
        set,
        p,
        dims: cg.dims.clone(),
        supports,
        memo: HashMap::new(),
        stuck: Vec::new(),
        expanded: 0,
        budget,
        exhausted: false,
    };
    let tree = searcher.solve(&all);
    Ok(SearchOutcome {
        tree,
        stuck: searcher.stuck,
        exhausted: searcher.exhausted,
    })
}

/// A protocol tree certifying perfect LOCC discrimination within `p`, if the
/// search finds one. `None` means "no protocol found", not indistinguishable.
pub fn distinguishability_search(set: &StateSet, p: &Partition, tol: &Tolerances) -> Result<Option<ProtocolTree>> {
    Ok(search_with_diagnostics(set, p, tol, DEFAULT_NODE_BUDGET)?.tree)
}

/// Replays a tree against the set and checks that it is a valid perfect
/// discrimination protocol: each measurement's groups partition the block's
/// index set, each surviving state lies inside exactly one group (so the
/// projector leaves it intact), every state reaches exactly one leaf, and each
/// leaf holds at most two mutually orthogonal states.
pub fn replay(tree: &ProtocolTree, set: &StateSet, p: &Partition, tol: &Tolerances) -> std::result::Result<(), String> {
    let cg = coarse_grain(set, p).map_err(|e| e.to_string())?;
    let all: Vec<usize> = (0..set.len()).collect();
    replay_node(tree, &cg, p, &all, tol)
}

fn replay_node(
    tree: &ProtocolTree,
    cg: &StateSet,
    p: &Partition,
    current: &[usize],
    tol: &Tolerances,
) -> std::result::Result<(), String> {
    match tree {
        ProtocolTree::Leaf { states, kind, .. } => {
            let mut got = states.clone();
            got.sort_unstable();
            if got != current {
                return Err(format!("leaf holds {got:?}, protocol delivers {current:?}"));
            }
            let expected = match current.len() {
                _ if *kind == LeafKind::Joint => {
                    return if p.len() == 1 {
                        Ok(())
                    } else {
                        Err(format!("joint leaf in a {}-block partition", p.len()))
                    }
                }
                0 => LeafKind::Empty,
                1 => LeafKind::Singleton,
                2 => LeafKind::WalgatePair,
                n => return Err(format!("leaf with {n} states")),
            };
            if *kind != expected {
                return Err(format!("leaf kind {kind:?} for {} states", current.len()));
            }
            if current.len() == 2 {
                let ov = cg.states[current[0]].overlap(&cg.states[current[1]]).norm();
                if ov > tol.amplitude {
                    return Err(format!("leaf states overlap by {ov:e}"));
                }
            }
            Ok(())
        }
        ProtocolTree::Measure {
            block,
            groups,
            children,
            ..
        } => {
            let block = *block;
            if block >= p.len() {
                return Err(format!("no block {block}"));
            }
            if children.len() != groups.len() {
                return Err("one child per outcome required".into());
            }
            let dim = cg.dims[block];
            let mut owner = vec![usize::MAX; dim];
            for (g, idx) in groups.iter().enumerate() {
                for &k in idx {
                    if k >= dim || owner[k] != usize::MAX {
                        return Err(format!("index {k} missing from or repeated in the groups"));
                    }
                    owner[k] = g;
                }
            }
            if owner.contains(&usize::MAX) {
                return Err("groups do not cover the block".into());
            }
            let mut routed = vec![Vec::new(); groups.len()];
            for &s in current {
                let sup = cg.states[s].support(block, tol.amplitude);
                let g = owner[sup[0]];
                if sup.iter().any(|&k| owner[k] != g) {
                    return Err(format!("state {} straddles outcomes", cg.states[s].label));
                }
                routed[g].push(s);
            }
            for (child, states) in children.iter().zip(&routed) {
                replay_node(child, cg, p, states, tol)?;
            }
            Ok(())
        }
    }
}
