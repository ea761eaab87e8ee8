//! Minimum-weight perfect matching decoders.
//!
//! Defects are check nodes with a nonzero syndrome bit. When the graph has a
//! boundary, each defect gets a twin; defect `i` may pair with its own twin
//! at the cost of its boundary distance, and twins pair among themselves
//! for free. Unused twins then soak up whatever defects do not go to the
//! boundary.

mod blossom;
mod graph;

pub use blossom::{max_weight_matching, min_weight_perfect_matching};
pub use graph::{build_matching_graph, GraphEdge, MatchingGraph};

use rand::Rng;

use crate::codes::SingleShotBasis;
use crate::error::{check_len, Error, Result};
use crate::gf2::BitVec;

/// Brute force is exponential; this is the largest defect count accepted.
pub const BRUTE_FORCE_MAX_DEFECTS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    Pair(usize, usize),
    Boundary(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    /// Indices refer to positions in the defect list.
    pub pairs: Vec<Pairing>,
    pub weight: u64,
    /// Faults to flip, one bit per graph edge fault.
    pub correction: BitVec,
}

/// Core matching on `k` abstract defects with pairwise and boundary costs.
/// `pair_cost` returns `None` for unreachable pairs.
fn match_defects(
    k: usize,
    pair_cost: impl Fn(usize, usize) -> Option<u32>,
    boundary_cost: Option<&dyn Fn(usize) -> Option<u32>>,
) -> Result<(Vec<Pairing>, u64)> {
    if k == 0 {
        return Ok((Vec::new(), 0));
    }
    let mut edges = Vec::new();
    match boundary_cost {
        None => {
            if k % 2 == 1 {
                return Err(Error::InvalidSyndrome(format!(
                    "{k} defects and no boundary to absorb the odd one"
                )));
            }
            for i in 0..k {
                for j in i + 1..k {
                    if let Some(c) = pair_cost(i, j) {
                        edges.push((i, j, c));
                    }
                }
            }
            let mate = min_weight_perfect_matching(k, &edges)?;
            let mut pairs = Vec::with_capacity(k / 2);
            let mut weight = 0u64;
            for (i, &j) in mate.iter().enumerate() {
                if i < j {
                    pairs.push(Pairing::Pair(i, j));
                    weight += u64::from(pair_cost(i, j).expect("matched along an edge"));
                }
            }
            Ok((pairs, weight))
        }
        Some(bcost) => {
            let b: Vec<Option<u32>> = (0..k).map(bcost).collect();
            for i in 0..k {
                for j in i + 1..k {
                    if let Some(c) = pair_cost(i, j) {
                        // A pair costing more than both boundary trips is never used.
                        let via_boundary = match (b[i], b[j]) {
                            (Some(x), Some(y)) => u64::from(x) + u64::from(y),
                            _ => u64::MAX,
                        };
                        if u64::from(c) <= via_boundary {
                            edges.push((i, j, c));
                        }
                    }
                    edges.push((k + i, k + j, 0));
                }
                if let Some(c) = b[i] {
                    edges.push((i, k + i, c));
                }
            }
            let mate = min_weight_perfect_matching(2 * k, &edges)?;
            let mut pairs = Vec::new();
            let mut weight = 0u64;
            for i in 0..k {
                let j = mate[i];
                if j == k + i {
                    pairs.push(Pairing::Boundary(i));
                    weight += u64::from(b[i].expect("matched along an edge"));
                } else if j < k && i < j {
                    pairs.push(Pairing::Pair(i, j));
                    weight += u64::from(pair_cost(i, j).expect("matched along an edge"));
                }
            }
            Ok((pairs, weight))
        }
    }
}

fn finite(d: u32) -> Option<u32> {
    (d != u32::MAX).then_some(d)
}

/// Defect nodes of a syndrome over the graph's checks.
pub fn defects_of(syndrome: &BitVec) -> Vec<usize> {
    syndrome.ones().collect()
}

/// Exact MWPM of the defects of `syndrome`, with the correction read off
/// shortest paths.
pub fn mwpm_match(graph: &MatchingGraph, syndrome: &BitVec) -> Result<MatchResult> {
    check_len(graph.num_checks(), syndrome.len())?;
    let defects = defects_of(syndrome);
    let pair_cost = |i: usize, j: usize| finite(graph.distance(defects[i], defects[j]));
    let bcost = |i: usize| graph.boundary_distance(defects[i]).and_then(finite);
    let boundary: Option<&dyn Fn(usize) -> Option<u32>> = match graph.boundary() {
        Some(_) => Some(&bcost),
        None => None,
    };
    let (pairs, weight) = match_defects(defects.len(), pair_cost, boundary)?;
    let mut correction = BitVec::zeros(graph.num_faults());
    for p in &pairs {
        let (a, b) = match *p {
            Pairing::Pair(i, j) => (defects[i], defects[j]),
            Pairing::Boundary(i) => (defects[i], graph.boundary().expect("graph has a boundary")),
        };
        for f in graph.path(a, b) {
            correction.flip(f);
        }
    }
    Ok(MatchResult {
        pairs,
        weight,
        correction,
    })
}

/// Minimum matching weight by exhaustive search, for cross-checking.
/// `dist` is a `k×k` table; `boundary_dist[i]` is the cost of sending
/// defect `i` to the boundary.
pub fn brute_force_matching(dist: &[Vec<u32>], boundary_dist: Option<&[u32]>) -> Result<u64> {
    let k = dist.len();
    if k > BRUTE_FORCE_MAX_DEFECTS {
        return Err(Error::UnsupportedSize(format!(
            "brute force handles at most {BRUTE_FORCE_MAX_DEFECTS} defects, got {k}"
        )));
    }
    if boundary_dist.is_none() && k % 2 == 1 {
        return Err(Error::InvalidSyndrome(format!(
            "{k} defects and no boundary to absorb the odd one"
        )));
    }
    fn rec(remaining: u32, dist: &[Vec<u32>], bd: Option<&[u32]>) -> Option<u64> {
        if remaining == 0 {
            return Some(0);
        }
        let i = remaining.trailing_zeros() as usize;
        let rest = remaining & !(1 << i);
        let mut best: Option<u64> = None;
        let mut consider = |c: u32, rest: u32| {
            if c == u32::MAX {
                return;
            }
            if let Some(r) = rec(rest, dist, bd) {
                let total = r + u64::from(c);
                best = Some(best.map_or(total, |b| b.min(total)));
            }
        };
        if let Some(bd) = bd {
            consider(bd[i], rest);
        }
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            consider(dist[i][j], rest & !(1 << j));
        }
        best
    }
    let all = if k == 0 { 0 } else { (1u32 << k) - 1 };
    rec(all, dist, boundary_dist)
        .ok_or_else(|| Error::InvalidSyndrome("no perfect matching exists".into()))
}

/// Flips one uniformly chosen bit if the syndrome has odd parity, so that a
/// boundaryless graph can match it.
pub fn parity_repair<R: Rng + ?Sized>(syndrome: &mut BitVec, rng: &mut R) -> bool {
    if syndrome.parity() && !syndrome.is_empty() {
        let bit = rng.random_range(0..syndrome.len());
        syndrome.flip(bit);
        true
    } else {
        false
    }
}

/// Local syndrome equivalent to an observed single-shot syndrome.
pub fn map_syndrome_to_local(basis: &SingleShotBasis, observed: &BitVec) -> Result<BitVec> {
    check_len(basis.len(), observed.len())?;
    basis.elimination.lift_syndrome(observed)
}

/// Maps the observed single-shot syndrome onto the local checks and matches
/// it there. Returns the correction over the qubits.
pub fn decode_single_shot_round(
    basis: &SingleShotBasis,
    graph: &MatchingGraph,
    observed: &BitVec,
) -> Result<MatchResult> {
    let local = map_syndrome_to_local(basis, observed)?;
    mwpm_match(graph, &local)
}

/// Spatial graph stacked over time. A detection event at round `t` and check
/// `c` is `s_t[c] ⊕ s_{t-1}[c]`; events are a spatial distance plus the
/// number of rounds apart. All edges have unit weight.
#[derive(Clone, Debug)]
pub struct SpaceTimeGraph {
    pub base: MatchingGraph,
    /// Noisy rounds; one more, noiseless, round closes the history.
    pub rounds: usize,
}

impl SpaceTimeGraph {
    pub fn new(base: MatchingGraph, rounds: usize) -> Self {
        Self { base, rounds }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceTimeResult {
    /// `(round, check)` of every detection event.
    pub events: Vec<(usize, usize)>,
    pub pairs: Vec<Pairing>,
    pub weight: u64,
    pub correction: BitVec,
}

/// Decodes `rounds + 1` syndromes, the last of them noiseless, and returns
/// the data correction that the matched chains project to.
pub fn decode_repeated_rounds(
    graph: &SpaceTimeGraph,
    syndromes: &[BitVec],
) -> Result<SpaceTimeResult> {
    if syndromes.len() != graph.rounds + 1 {
        return Err(Error::DimensionMismatch {
            expected: graph.rounds + 1,
            found: syndromes.len(),
        });
    }
    let base = &graph.base;
    let mut events = Vec::new();
    let mut prev = BitVec::zeros(base.num_checks());
    for (t, s) in syndromes.iter().enumerate() {
        check_len(base.num_checks(), s.len())?;
        events.extend(s.xor(&prev).ones().map(|c| (t, c)));
        prev = s.clone();
    }
    let pair_cost = |i: usize, j: usize| {
        let ((ti, ci), (tj, cj)) = (events[i], events[j]);
        finite(base.distance(ci, cj)).map(|d| d + ti.abs_diff(tj) as u32)
    };
    let bcost = |i: usize| base.boundary_distance(events[i].1).and_then(finite);
    let boundary: Option<&dyn Fn(usize) -> Option<u32>> = match base.boundary() {
        Some(_) => Some(&bcost),
        None => None,
    };
    let (pairs, weight) = match_defects(events.len(), pair_cost, boundary)?;
    let mut correction = BitVec::zeros(base.num_faults());
    for p in &pairs {
        let (a, b) = match *p {
            Pairing::Pair(i, j) => (events[i].1, events[j].1),
            Pairing::Boundary(i) => (events[i].1, base.boundary().expect("graph has a boundary")),
        };
        for f in base.path(a, b) {
            correction.flip(f);
        }
    }
    Ok(SpaceTimeResult {
        events,
        pairs,
        weight,
        correction,
    })
}
