//! Optimal alignments as cheapest paths through the reachability graph of a
//! synchronous product.
//!
//! The graph is explored lazily: markings are dense token-count vectors
//! hashed into a closed set, and a binary heap orders the frontier by
//! `(g + h, moves, transition id)`. With the heuristic off this is plain
//! Dijkstra; with it on, A* with [`admissible_heuristic`], which is
//! consistent, so a marking is final at its first extraction either way.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use crate::cost::{move_cost, CostProfile};
use crate::net::{ActivityLabel, Marking};
use crate::product::{MoveKind, SyncProductNet};
use crate::{Error, Result};

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Use the trace-suffix heuristic (A*) instead of plain Dijkstra.
    pub heuristic: bool,
    /// Maximum number of markings finalized before giving up.
    pub node_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            heuristic: false,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMove {
    pub transition_id: String,
    pub kind: MoveKind,
    /// `None` is the gap `>>`.
    pub model_label: Option<ActivityLabel>,
    pub trace_label: Option<ActivityLabel>,
    pub weight: Option<f64>,
    pub cost: f64,
}

fn side(label: &Option<ActivityLabel>) -> String {
    match label {
        None => ">>".to_string(),
        Some(l) => l.to_string(),
    }
}

impl AlignmentMove {
    /// `kind<TAB>model_label<TAB>trace_label<TAB>weight<TAB>cost`
    pub fn detail_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.kind,
            side(&self.model_label),
            side(&self.trace_label),
            self.weight.map_or_else(|| "-".to_string(), |w| w.to_string()),
            self.cost
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Alignment {
    pub moves: Vec<AlignmentMove>,
    pub total_cost: f64,
}

impl Alignment {
    pub fn count(&self, kind: MoveKind) -> usize {
        self.moves.iter().filter(|m| m.kind == kind).count()
    }

    /// One [`AlignmentMove::detail_line`] per move.
    pub fn detail(&self) -> String {
        let mut out = String::new();
        for m in &self.moves {
            let _ = writeln!(out, "{}", m.detail_line());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub alignment: Alignment,
    pub explored_nodes: usize,
}

struct CompiledTransition {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    cost: f64,
    /// Index into `product.moves`.
    annotation: usize,
}

/// Index-based view of a product for the search loop. Transitions are sorted
/// by id so that their index doubles as the tie-break rank.
struct Compiled {
    transitions: Vec<CompiledTransition>,
    initial: Box<[u32]>,
    target: Box<[u32]>,
    trace_position: Vec<Option<usize>>,
    remaining_bound: Vec<f64>,
}

fn dense(m: &Marking, index: &HashMap<&str, usize>, n: usize) -> Result<Box<[u32]>> {
    let mut v = vec![0u32; n];
    for (p, c) in m.iter() {
        let i = *index.get(p).ok_or_else(|| Error::UnknownPlace(p.to_string()))?;
        v[i] = c;
    }
    Ok(v.into_boxed_slice())
}

/// Per trace position, the cheapest way to get past it: a log move or the
/// cheapest synchronous move available there.
fn position_bounds(product: &SyncProductNet, profile: &CostProfile) -> Result<Vec<f64>> {
    let position: HashMap<&str, usize> = product
        .trace_places
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let mut bounds = vec![profile.nonsync_cost; product.trace_len()];
    for (t, ann) in product.net.transitions.iter().zip(&product.moves) {
        if ann.kind != MoveKind::Sync {
            continue;
        }
        let Some(i) = product.net.preset(&t.id).find_map(|p| position.get(p).copied()) else {
            continue;
        };
        let c = move_cost(ann, profile)?;
        if c < bounds[i] {
            bounds[i] = c;
        }
    }
    Ok(bounds)
}

fn suffix_sums(bounds: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; bounds.len() + 1];
    for i in (0..bounds.len()).rev() {
        out[i] = bounds[i] + out[i + 1];
    }
    out
}

impl Compiled {
    fn new(product: &SyncProductNet, profile: &CostProfile) -> Result<Self> {
        let net = &product.net;
        let index: HashMap<&str, usize> = net
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let n = net.places.len();
        let mut order: Vec<usize> = (0..net.transitions.len()).collect();
        order.sort_by(|&a, &b| net.transitions[a].id.cmp(&net.transitions[b].id));
        let mut transitions = Vec::with_capacity(order.len());
        for i in order {
            let t = &net.transitions[i];
            let lookup = |p: &str| {
                index
                    .get(p)
                    .copied()
                    .ok_or_else(|| Error::UnknownPlace(p.to_string()))
            };
            transitions.push(CompiledTransition {
                inputs: net.preset(&t.id).map(lookup).collect::<Result<_>>()?,
                outputs: net.postset(&t.id).map(lookup).collect::<Result<_>>()?,
                cost: move_cost(&product.moves[i], profile)?,
                annotation: i,
            });
        }
        let mut trace_position = vec![None; n];
        for (pos, p) in product.trace_places.iter().enumerate() {
            let i = *index
                .get(p.as_str())
                .ok_or_else(|| Error::UnknownPlace(p.clone()))?;
            trace_position[i] = Some(pos);
        }
        Ok(Compiled {
            transitions,
            initial: dense(&net.initial_marking, &index, n)?,
            target: dense(&net.final_marking, &index, n)?,
            trace_position,
            remaining_bound: suffix_sums(&position_bounds(product, profile)?),
        })
    }

    fn heuristic(&self, marking: &[u32]) -> f64 {
        marking
            .iter()
            .zip(&self.trace_position)
            .find_map(|(&c, pos)| if c > 0 { *pos } else { None })
            .map_or(0.0, |pos| self.remaining_bound[pos])
    }
}

/// Lower bound on the remaining alignment cost from `marking`: every trace
/// position not yet passed needs exactly one log or synchronous move.
pub fn admissible_heuristic(
    marking: &Marking,
    product: &SyncProductNet,
    profile: &CostProfile,
) -> Result<f64> {
    let remaining = suffix_sums(&position_bounds(product, profile)?);
    let pos = product
        .trace_places
        .iter()
        .position(|p| marking.get(p) > 0);
    Ok(pos.map_or(0.0, |i| remaining[i]))
}

struct Node {
    marking: Box<[u32]>,
    g: f64,
    moves: u32,
    /// `(predecessor node, compiled transition)`.
    parent: Option<(usize, usize)>,
    closed: bool,
}

impl Node {
    fn key(&self) -> (f64, u32, usize) {
        (self.g, self.moves, self.parent.map_or(0, |p| p.1))
    }
}

fn better(a: (f64, u32, usize), b: (f64, u32, usize)) -> bool {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
        == Ordering::Less
}

#[derive(PartialEq)]
struct QueueEntry {
    f: f64,
    g: f64,
    moves: u32,
    rank: usize,
    goal: bool,
    node: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .f
            .total_cmp(&self.f)
            .then(other.moves.cmp(&self.moves))
            .then(other.rank.cmp(&self.rank))
            // the final marking wins otherwise-equal ties
            .then(self.goal.cmp(&other.goal))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest firing sequence from the product's initial to its final marking.
pub fn optimal_alignment(
    product: &SyncProductNet,
    profile: &CostProfile,
    options: &SearchOptions,
) -> Result<SearchResult> {
    profile.validate()?;
    let compiled = Compiled::new(product, profile)?;
    let h = |m: &[u32]| if options.heuristic { compiled.heuristic(m) } else { 0.0 };

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<Box<[u32]>, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();

    index.insert(compiled.initial.clone(), 0);
    nodes.push(Node {
        marking: compiled.initial.clone(),
        g: 0.0,
        moves: 0,
        parent: None,
        closed: false,
    });
    heap.push(QueueEntry {
        f: h(&compiled.initial),
        g: 0.0,
        moves: 0,
        rank: 0,
        goal: compiled.initial == compiled.target,
        node: 0,
    });

    let mut explored = 0usize;
    let mut scratch: Vec<u32> = Vec::with_capacity(compiled.initial.len());
    while let Some(entry) = heap.pop() {
        let current = &nodes[entry.node];
        if current.closed || current.g != entry.g || current.moves != entry.moves {
            continue;
        }
        if explored >= options.node_cap {
            return Err(Error::Capacity {
                what: "explored markings",
                limit: options.node_cap,
                frontier: heap.len() + 1,
            });
        }
        nodes[entry.node].closed = true;
        explored += 1;
        if nodes[entry.node].marking == compiled.target {
            return Ok(SearchResult {
                alignment: reconstruct(product, &compiled, &nodes, entry.node),
                explored_nodes: explored,
            });
        }
        let (g, moves) = (nodes[entry.node].g, nodes[entry.node].moves);
        for (rank, t) in compiled.transitions.iter().enumerate() {
            let marking = &nodes[entry.node].marking;
            if !t.inputs.iter().all(|&p| marking[p] > 0) {
                continue;
            }
            scratch.clear();
            scratch.extend_from_slice(marking);
            for &p in &t.inputs {
                scratch[p] -= 1;
            }
            for &p in &t.outputs {
                scratch[p] += 1;
            }
            let key = (g + t.cost, moves + 1, rank);
            let target = match index.entry(scratch.as_slice().into()) {
                Entry::Vacant(slot) => {
                    let id = nodes.len();
                    slot.insert(id);
                    nodes.push(Node {
                        marking: scratch.as_slice().into(),
                        g: key.0,
                        moves: key.1,
                        parent: Some((entry.node, rank)),
                        closed: false,
                    });
                    id
                }
                Entry::Occupied(slot) => {
                    let id = *slot.get();
                    let node = &mut nodes[id];
                    if node.closed || !better(key, node.key()) {
                        continue;
                    }
                    node.g = key.0;
                    node.moves = key.1;
                    node.parent = Some((entry.node, rank));
                    id
                }
            };
            heap.push(QueueEntry {
                f: key.0 + h(&nodes[target].marking),
                g: key.0,
                moves: key.1,
                rank,
                goal: nodes[target].marking == compiled.target,
                node: target,
            });
        }
    }
    Err(Error::NoAlignment { explored })
}

fn reconstruct(product: &SyncProductNet, compiled: &Compiled, nodes: &[Node], last: usize) -> Alignment {
    let mut path = Vec::new();
    let mut cursor = last;
    while let Some((prev, rank)) = nodes[cursor].parent {
        path.push(rank);
        cursor = prev;
    }
    path.reverse();
    let moves: Vec<AlignmentMove> = path
        .into_iter()
        .map(|rank| {
            let t = &compiled.transitions[rank];
            let ann = &product.moves[t.annotation];
            AlignmentMove {
                transition_id: ann.id.clone(),
                kind: ann.kind,
                model_label: ann.model_label.clone(),
                trace_label: ann.trace_label.clone(),
                weight: ann.weight,
                cost: t.cost,
            }
        })
        .collect();
    Alignment {
        moves,
        total_cost: nodes[last].g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::StochasticTrace;
    use crate::product::build_sync_product;
    use crate::synth::sequence_net;
    use crate::trace_net::build_stochastic_trace_net;

    fn product(model: &[&str], trace: &StochasticTrace) -> SyncProductNet {
        build_sync_product(&sequence_net(model), &build_stochastic_trace_net(trace).unwrap()).unwrap()
    }

    fn ab_bc() -> StochasticTrace {
        let mut trace = StochasticTrace::deterministic("1", ["A", "B"]);
        trace.events[1].distribution = vec![("B".into(), 0.2), ("C".into(), 0.8)];
        trace
    }

    const ONE_MINUS_E_M4: f64 = 0.981_684_361_111_265_8;

    #[test]
    fn stochastic_example() {
        let p = product(&["A", "B"], &ab_bc());
        for heuristic in [false, true] {
            let opts = SearchOptions { heuristic, ..Default::default() };
            let r = optimal_alignment(&p, &CostProfile::stochastic(), &opts).unwrap();
            assert!((r.alignment.total_cost - ONE_MINUS_E_M4).abs() < 1e-9);
            let ids: Vec<&str> = r.alignment.moves.iter().map(|m| m.transition_id.as_str()).collect();
            assert_eq!(ids, vec!["s:(t1,t_1_1)", "s:(t2,t_2_1)"]);
        }
    }

    #[test]
    fn lower_bound_example() {
        let p = product(&["A", "B"], &ab_bc());
        let r = optimal_alignment(&p, &CostProfile::lower_bound(), &SearchOptions::default()).unwrap();
        assert_eq!(r.alignment.total_cost, 0.0);
        assert_eq!(r.alignment.count(MoveKind::Sync), 2);
    }

    #[test]
    fn empty_trace_against_empty_model() {
        let p = product(&[], &StochasticTrace::deterministic("e", Vec::<String>::new()));
        let r = optimal_alignment(&p, &CostProfile::stochastic(), &SearchOptions::default()).unwrap();
        assert_eq!(r.alignment.total_cost, 0.0);
        assert!(r.alignment.moves.is_empty());
        assert_eq!(r.explored_nodes, 1);
    }

    #[test]
    fn perfect_fit_costs_nothing() {
        let p = product(&["A", "B"], &StochasticTrace::deterministic("d", ["A", "B"]));
        let r = optimal_alignment(&p, &CostProfile::deterministic(), &SearchOptions::default()).unwrap();
        assert_eq!(r.alignment.total_cost, 0.0);
    }

    #[test]
    fn deviations_cost_one_each() {
        let p = product(&["A", "B", "C"], &StochasticTrace::deterministic("d", ["A", "X", "C"]));
        let r = optimal_alignment(&p, &CostProfile::deterministic(), &SearchOptions::default()).unwrap();
        assert_eq!(r.alignment.total_cost, 2.0);
        assert_eq!(r.alignment.count(MoveKind::LogMove), 1);
        assert_eq!(r.alignment.count(MoveKind::ModelMove), 1);
    }

    #[test]
    fn unreachable_final_marking() {
        let mut model = sequence_net(&["A"]);
        model.final_marking = Marking::from_places(["p0", "p1"]);
        let trace = build_stochastic_trace_net(&StochasticTrace::deterministic("d", ["A"])).unwrap();
        let p = build_sync_product(&model, &trace).unwrap();
        assert!(matches!(
            optimal_alignment(&p, &CostProfile::stochastic(), &SearchOptions::default()),
            Err(Error::NoAlignment { .. })
        ));
    }

    #[test]
    fn node_cap_is_enforced() {
        // a generator transition makes the model unbounded
        let mut model = sequence_net(&["A"]);
        model.transitions.push(crate::net::Transition::new("gen", ActivityLabel::named("G")));
        model.arcs.push(("p0".into(), "gen".into()));
        model.arcs.push(("gen".into(), "p0".into()));
        model.places.push("sink".into());
        model.arcs.push(("gen".into(), "sink".into()));
        model.final_marking = Marking::from_places(["p1", "p1"]);
        let trace = build_stochastic_trace_net(&StochasticTrace::deterministic("d", ["A"])).unwrap();
        let p = build_sync_product(&model, &trace).unwrap();
        let opts = SearchOptions { heuristic: false, node_cap: 50 };
        match optimal_alignment(&p, &CostProfile::stochastic(), &opts) {
            Err(Error::Capacity { limit, frontier, .. }) => {
                assert_eq!(limit, 50);
                assert!(frontier > 0);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn heuristic_values() {
        let p = product(&["A", "B"], &ab_bc());
        let s = CostProfile::stochastic();
        let h0 = admissible_heuristic(&p.net.initial_marking, &p, &s).unwrap();
        assert!((h0 - ONE_MINUS_E_M4).abs() < 1e-12);
        assert_eq!(admissible_heuristic(&p.net.final_marking, &p, &s).unwrap(), 0.0);
        let lb = admissible_heuristic(&p.net.initial_marking, &p, &CostProfile::lower_bound()).unwrap();
        assert_eq!(lb, 0.0);
    }

    #[test]
    fn detail_dump_format() {
        let p = product(&["A", "B"], &ab_bc());
        let r = optimal_alignment(&p, &CostProfile::stochastic(), &SearchOptions::default()).unwrap();
        let dump = r.alignment.detail();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], "sync\tA\tA\t1\t0");
        assert!(lines[1].starts_with("sync\tB\tB\t0.2\t0.98168"));
    }

    #[test]
    fn invalid_profile_rejected() {
        let p = product(&["A"], &StochasticTrace::deterministic("d", ["A"]));
        let mut profile = CostProfile::stochastic();
        profile.nonsync_cost = -1.0;
        assert!(optimal_alignment(&p, &profile, &SearchOptions::default()).is_err());
    }
}
