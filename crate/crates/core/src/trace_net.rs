//! Stochastic trace nets: a sequential net with one place per position and,
//! between consecutive places, one weighted transition per possible activity.

use crate::log::StochasticTrace;
use crate::net::{ActivityLabel, Marking, SystemNet, Transition};
use crate::Result;

pub fn place_id(position: usize) -> String {
    format!("p_{position}")
}

/// Id of the `choice`-th alternative (1-based) of the `position`-th event (1-based).
pub fn transition_id(position: usize, choice: usize) -> String {
    format!("t_{position}_{choice}")
}

/// Builds the trace net of `trace`: places `p_0..p_n`, transitions
/// `t_i_j` from `p_{i-1}` to `p_i` labeled with the j-th activity of event i
/// and weighted with its probability; `[p_0]` to `[p_n]`.
pub fn build_stochastic_trace_net(trace: &StochasticTrace) -> Result<SystemNet> {
    trace.validate()?;
    let n = trace.events.len();
    let mut net = SystemNet {
        places: (0..=n).map(place_id).collect(),
        initial_marking: Marking::from_places([place_id(0)]),
        final_marking: Marking::from_places([place_id(n)]),
        ..SystemNet::default()
    };
    for (i, event) in trace.events.iter().enumerate() {
        for (j, (label, p)) in event.distribution.iter().enumerate() {
            let id = transition_id(i + 1, j + 1);
            net.arcs.push((place_id(i), id.clone()));
            net.arcs.push((id.clone(), place_id(i + 1)));
            net.transitions
                .push(Transition::new(id, ActivityLabel::named(label.clone())).with_weight(*p));
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::parse_log;
    use crate::log::StochasticEvent;

    fn table2() -> StochasticTrace {
        let doc = r#"{ "cases": [ { "case_id": "1", "events": [
            {"event_id":"e1","activities":{"A":1.0}},
            {"event_id":"e2","activities":{"B":0.2,"C":0.8}},
            {"event_id":"e3","activities":{"D":0.6,"E":0.2,"F":0.1,"G":0.1}},
            {"event_id":"e4","activities":{"F":1.0}} ] } ] }"#;
        parse_log(doc.as_bytes()).unwrap().traces.remove(0)
    }

    #[test]
    fn running_example_structure() {
        let net = build_stochastic_trace_net(&table2()).unwrap();
        assert!(net.validate().is_empty());
        assert_eq!(net.places.len(), 5);
        let expected = [
            ("t_1_1", "A", 1.0),
            ("t_2_1", "B", 0.2),
            ("t_2_2", "C", 0.8),
            ("t_3_1", "D", 0.6),
            ("t_3_2", "E", 0.2),
            ("t_3_3", "F", 0.1),
            ("t_3_4", "G", 0.1),
            ("t_4_1", "F", 1.0),
        ];
        assert_eq!(net.transitions.len(), expected.len());
        for (t, (id, label, w)) in net.transitions.iter().zip(expected) {
            assert_eq!(t.id, id);
            assert_eq!(t.label, ActivityLabel::named(label));
            assert_eq!(t.weight, Some(w));
        }
        let m1 = Marking::from_places(["p_1"]);
        assert_eq!(net.enabled_transitions(&m1).unwrap(), vec!["t_2_1", "t_2_2"]);
        assert_eq!(net.fire(&m1, "t_2_2").unwrap(), Marking::from_places(["p_2"]));
    }

    #[test]
    fn empty_trace_is_single_place() {
        let net = build_stochastic_trace_net(&StochasticTrace::deterministic("e", Vec::<String>::new())).unwrap();
        assert_eq!(net.places, vec!["p_0"]);
        assert!(net.transitions.is_empty());
        assert_eq!(net.initial_marking, net.final_marking);
    }

    #[test]
    fn deterministic_trace_is_classic_trace_model() {
        let net = build_stochastic_trace_net(&StochasticTrace::deterministic("d", ["A", "B"])).unwrap();
        assert_eq!(net.places.len(), 3);
        assert_eq!(net.transitions.len(), 2);
        assert!(net.transitions.iter().all(|t| t.weight == Some(1.0)));
    }

    #[test]
    fn invalid_trace_is_rejected() {
        let mut t = StochasticTrace::deterministic("d", ["A"]);
        t.events.push(StochasticEvent {
            event_id: "bad".into(),
            timestamp: None,
            distribution: vec![("B".into(), 0.5)],
        });
        assert!(build_stochastic_trace_net(&t).is_err());
    }

    #[test]
    fn ids_stay_unambiguous_past_ten() {
        let t = StochasticTrace::deterministic("d", (0..12).map(|i| format!("a{i}")));
        let net = build_stochastic_trace_net(&t).unwrap();
        assert!(net.validate().is_empty());
        assert_eq!(net.transitions[10].id, "t_11_1");
    }
}
