//! Synthetic models and logs for tests and benchmarks.
//!
//! Models are block-structured process trees translated into sound workflow
//! nets; logs are random play-outs of a tree with optional insert/delete noise.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::log::StochasticTrace;
use crate::net::{ActivityLabel, Marking, SystemNet, Transition};

/// Sequential net `p0 -t1-> p1 -t2-> ... pn` with `ti` labeled `labels[i-1]`.
pub fn sequence_net(labels: &[&str]) -> SystemNet {
    let n = labels.len();
    let mut net = SystemNet {
        places: (0..=n).map(|i| format!("p{i}")).collect(),
        initial_marking: Marking::from_places(["p0"]),
        final_marking: Marking::from_places([format!("p{n}")]),
        ..SystemNet::default()
    };
    for (i, l) in labels.iter().enumerate() {
        let id = format!("t{}", i + 1);
        net.arcs.push((format!("p{i}"), id.clone()));
        net.arcs.push((id.clone(), format!("p{}", i + 1)));
        net.transitions.push(Transition::new(id, ActivityLabel::named(*l)));
    }
    net
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessTree {
    Activity(String),
    Tau,
    Seq(Vec<ProcessTree>),
    Xor(Vec<ProcessTree>),
    /// Do-body, redo-body: `do (redo do)*`.
    Loop(Box<ProcessTree>, Box<ProcessTree>),
    And(Vec<ProcessTree>),
}

struct NetWriter {
    net: SystemNet,
}

impl NetWriter {
    fn place(&mut self) -> String {
        let id = format!("p{}", self.net.places.len());
        self.net.places.push(id.clone());
        id
    }

    fn transition(&mut self, label: ActivityLabel, inputs: &[&str], outputs: &[&str]) {
        let id = format!("t{}", self.net.transitions.len() + 1);
        for p in inputs {
            self.net.arcs.push((p.to_string(), id.clone()));
        }
        for p in outputs {
            self.net.arcs.push((id.clone(), p.to_string()));
        }
        self.net.transitions.push(Transition::new(id, label));
    }

    fn emit(&mut self, tree: &ProcessTree, from: &str, to: &str) {
        match tree {
            ProcessTree::Activity(a) => self.transition(ActivityLabel::named(a.clone()), &[from], &[to]),
            ProcessTree::Tau => self.transition(ActivityLabel::Tau, &[from], &[to]),
            ProcessTree::Seq(children) => {
                let mut current = from.to_string();
                for (i, c) in children.iter().enumerate() {
                    let next = if i + 1 == children.len() {
                        to.to_string()
                    } else {
                        self.place()
                    };
                    self.emit(c, &current, &next);
                    current = next;
                }
                if children.is_empty() {
                    self.transition(ActivityLabel::Tau, &[from], &[to]);
                }
            }
            ProcessTree::Xor(children) => {
                for c in children {
                    self.emit(c, from, to);
                }
            }
            ProcessTree::Loop(body, redo) => {
                let start = self.place();
                let end = self.place();
                self.transition(ActivityLabel::Tau, &[from], &[&start]);
                self.emit(body, &start, &end);
                self.emit(redo, &end, &start);
                self.transition(ActivityLabel::Tau, &[&end], &[to]);
            }
            ProcessTree::And(children) => {
                let starts: Vec<String> = children.iter().map(|_| self.place()).collect();
                let ends: Vec<String> = children.iter().map(|_| self.place()).collect();
                let s: Vec<&str> = starts.iter().map(String::as_str).collect();
                let e: Vec<&str> = ends.iter().map(String::as_str).collect();
                self.transition(ActivityLabel::Tau, &[from], &s);
                for (c, (a, b)) in children.iter().zip(starts.iter().zip(&ends)) {
                    self.emit(c, a, b);
                }
                self.transition(ActivityLabel::Tau, &e, &[to]);
            }
        }
    }
}

impl ProcessTree {
    pub fn activity(label: &str) -> Self {
        ProcessTree::Activity(label.to_string())
    }

    /// Sound workflow net with one token on the source place initially and on
    /// the sink place finally.
    pub fn to_net(&self) -> SystemNet {
        let mut w = NetWriter {
            net: SystemNet::default(),
        };
        let source = w.place();
        let sink = w.place();
        w.emit(self, &source, &sink);
        w.net.initial_marking = Marking::from_places([source]);
        w.net.final_marking = Marking::from_places([sink]);
        w.net
    }

    /// Random play-out. Each loop repeats its redo part with probability
    /// `redo_probability`, at most `max_repeats` times.
    pub fn play_out<R: Rng + ?Sized>(&self, rng: &mut R, redo_probability: f64, max_repeats: usize) -> Vec<String> {
        let mut out = Vec::new();
        self.play_into(rng, redo_probability, max_repeats, &mut out);
        out
    }

    fn play_into<R: Rng + ?Sized>(&self, rng: &mut R, redo: f64, max: usize, out: &mut Vec<String>) {
        match self {
            ProcessTree::Activity(a) => out.push(a.clone()),
            ProcessTree::Tau => {}
            ProcessTree::Seq(children) => {
                for c in children {
                    c.play_into(rng, redo, max, out);
                }
            }
            ProcessTree::Xor(children) => {
                if let Some(c) = children.choose(rng) {
                    c.play_into(rng, redo, max, out);
                }
            }
            ProcessTree::Loop(body, back) => {
                body.play_into(rng, redo, max, out);
                let mut repeats = 0;
                while repeats < max && rng.random_bool(redo) {
                    back.play_into(rng, redo, max, out);
                    body.play_into(rng, redo, max, out);
                    repeats += 1;
                }
            }
            ProcessTree::And(children) => {
                let mut branches: Vec<std::collections::VecDeque<String>> = children
                    .iter()
                    .map(|c| c.play_out(rng, redo, max).into())
                    .collect();
                loop {
                    let live: Vec<usize> = (0..branches.len()).filter(|&i| !branches[i].is_empty()).collect();
                    let Some(&i) = live.choose(rng) else { break };
                    out.push(branches[i].pop_front().unwrap());
                }
            }
        }
    }

    /// Random tree over `alphabet` with at most `max_leaves` leaves.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, alphabet: &[String], max_leaves: usize, allow_and: bool) -> Self {
        if max_leaves <= 1 || rng.random_bool(0.3) {
            return if rng.random_bool(0.1) {
                ProcessTree::Tau
            } else {
                ProcessTree::Activity(alphabet.choose(rng).expect("nonempty alphabet").clone())
            };
        }
        let ops = if allow_and { 4 } else { 3 };
        let op = rng.random_range(0..ops);
        let left = rng.random_range(1..max_leaves);
        let right = max_leaves - left;
        let a = Self::random(rng, alphabet, left, allow_and);
        let b = Self::random(rng, alphabet, right.max(1), allow_and);
        match op {
            0 => ProcessTree::Seq(vec![a, b]),
            1 => ProcessTree::Xor(vec![a, b]),
            2 => ProcessTree::Loop(Box::new(a), Box::new(b)),
            _ => ProcessTree::And(vec![a, b]),
        }
    }
}

/// Ten-activity benchmark model `A (B|C) loop(D (E||F), G) (H|τ) I J`.
pub fn benchmark_tree() -> ProcessTree {
    use ProcessTree::*;
    let a = ProcessTree::activity;
    Seq(vec![
        a("A"),
        Xor(vec![a("B"), a("C")]),
        Loop(
            Box::new(Seq(vec![a("D"), And(vec![a("E"), a("F")])])),
            Box::new(a("G")),
        ),
        Xor(vec![a("H"), Tau]),
        a("I"),
        a("J"),
    ])
}

/// Noise for [`noisy_play_out`]: each event is dropped with `delete`
/// probability, and after each position a random activity is inserted with
/// `insert` probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub delete: f64,
    pub insert: f64,
}

pub fn noisy_play_out<R: Rng + ?Sized>(
    rng: &mut R,
    tree: &ProcessTree,
    alphabet: &[String],
    noise: Noise,
    redo_probability: f64,
    max_repeats: usize,
) -> Vec<String> {
    let clean = tree.play_out(rng, redo_probability, max_repeats);
    let mut out = Vec::with_capacity(clean.len() + 2);
    for a in clean {
        if !rng.random_bool(noise.delete) {
            out.push(a);
        }
        if rng.random_bool(noise.insert) {
            out.push(alphabet.choose(rng).expect("nonempty alphabet").clone());
        }
    }
    out
}

/// Deterministic trace with case id `case_id` from an activity sequence.
pub fn trace_from(case_id: impl Into<String>, activities: Vec<String>) -> StochasticTrace {
    StochasticTrace::deterministic(case_id, activities)
}

/// Random distribution over 1 to `max_choices` distinct activities of
/// `alphabet`, probabilities bounded away from 0.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, alphabet: &[String], max_choices: usize) -> Vec<(String, f64)> {
    let k = rng.random_range(1..=max_choices.min(alphabet.len()).max(1));
    let picked = rand::seq::index::sample(rng, alphabet.len(), k);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut out: Vec<(String, f64)> = picked
        .iter()
        .zip(&raw)
        .map(|(i, r)| (alphabet[i].clone(), r / total))
        .collect();
    let head: f64 = out[..k - 1].iter().map(|(_, p)| p).sum();
    out[k - 1].1 = 1.0 - head;
    out
}

/// Random stochastic trace of at most `max_len` events whose realization
/// count stays within `max_realizations`.
pub fn random_stochastic_trace<R: Rng + ?Sized>(
    rng: &mut R,
    case_id: impl Into<String>,
    alphabet: &[String],
    max_len: usize,
    max_choices: usize,
    max_realizations: u128,
) -> StochasticTrace {
    let len = rng.random_range(0..=max_len);
    let mut trace = StochasticTrace::deterministic(case_id, vec![alphabet[0].clone(); len]);
    let mut realizations: u128 = 1;
    for event in &mut trace.events {
        let budget = (max_realizations / realizations).max(1) as usize;
        event.distribution = random_distribution(rng, alphabet, max_choices.min(budget));
        realizations *= event.distribution.len() as u128;
    }
    trace
}

/// Random sound net built from sequence, choice and loop blocks over
/// `alphabet` with at most `max_transitions` transitions.
pub fn random_block_net<R: Rng + ?Sized>(rng: &mut R, alphabet: &[String], max_transitions: usize) -> SystemNet {
    loop {
        let leaves = rng.random_range(1..=6);
        let net = ProcessTree::random(rng, alphabet, leaves, false).to_net();
        if net.transitions.len() <= max_transitions {
            return net;
        }
    }
}

pub fn letters(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn benchmark_model_is_valid() {
        let net = benchmark_tree().to_net();
        assert!(net.validate().is_empty(), "{:?}", net.validate());
        assert_eq!(net.alphabet().len(), 10);
    }

    #[test]
    fn play_outs_replay_on_net() {
        let tree = benchmark_tree();
        let net = tree.to_net();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let trace = tree.play_out(&mut rng, 0.5, 5);
            assert!(replays(&net, &trace), "{trace:?}");
        }
    }

    /// Brute-force check that `trace` is in the net's language (τ closure by DFS).
    fn replays(net: &SystemNet, trace: &[String]) -> bool {
        fn go(net: &SystemNet, m: &Marking, rest: &[String], depth: usize) -> bool {
            if rest.is_empty() && *m == net.final_marking {
                return true;
            }
            if depth > 200 {
                return false;
            }
            for t in net.enabled_transitions(m).unwrap() {
                let label = &net.transition(t).unwrap().label;
                let next = net.fire(m, t).unwrap();
                match label.as_str() {
                    None => {
                        if go(net, &next, rest, depth + 1) {
                            return true;
                        }
                    }
                    Some(l) if rest.first().map(String::as_str) == Some(l) => {
                        if go(net, &next, &rest[1..], depth + 1) {
                            return true;
                        }
                    }
                    _ => {}
                }
            }
            false
        }
        go(net, &net.initial_marking, trace, 0)
    }

    #[test]
    fn random_trees_give_valid_nets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alphabet: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
        for _ in 0..50 {
            let tree = ProcessTree::random(&mut rng, &alphabet, 6, true);
            let net = tree.to_net();
            assert!(net.validate().is_empty());
            let trace = tree.play_out(&mut rng, 0.3, 3);
            assert!(replays(&net, &trace));
        }
    }

    #[test]
    fn random_instances_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alphabet = letters(6);
        for i in 0..200 {
            let net = random_block_net(&mut rng, &alphabet[..5], 12);
            assert!(net.transitions.len() <= 12);
            let t = random_stochastic_trace(&mut rng, i.to_string(), &alphabet, 6, 3, 256);
            t.validate().unwrap();
            assert!(t.len() <= 6);
            assert!(crate::log::realization_count(&t) <= 256);
            assert!(t.events.iter().all(|e| e.distribution.len() <= 3));
        }
    }

    #[test]
    fn sequence_net_shape() {
        let net = sequence_net(&["A", "B"]);
        assert!(net.validate().is_empty());
        assert_eq!(net.transitions[1].id, "t2");
    }
}
