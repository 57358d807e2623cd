//! XES import. Only trace boundaries, `concept:name` and `time:timestamp`
//! are read; every event becomes a probability-1 distribution.

use crate::log::{StochasticEvent, StochasticLog, StochasticTrace};
use crate::xml::{parse_document, Element};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct XesImport {
    pub log: StochasticLog,
    /// Events dropped because they had no `concept:name`.
    pub skipped_events: usize,
}

fn string_attr<'a>(element: &'a Element, tag: &str, key: &str) -> Option<&'a str> {
    element
        .children
        .iter()
        .find(|c| c.name == tag && c.attr("key") == Some(key))
        .and_then(|c| c.attr("value"))
}

pub fn import_xes(bytes: &[u8]) -> Result<XesImport> {
    let root = parse_document(bytes)?;
    if root.name != "log" {
        return Err(Error::parse("root", format!("expected <log>, found <{}>", root.name)));
    }
    let mut traces = Vec::new();
    let mut skipped_events = 0;
    for (i, trace) in root.children_named("trace").enumerate() {
        let case_id = string_attr(trace, "string", "concept:name")
            .map(str::to_string)
            .unwrap_or_else(|| (i + 1).to_string());
        let mut events = Vec::new();
        for event in trace.children_named("event") {
            let Some(activity) = string_attr(event, "string", "concept:name") else {
                skipped_events += 1;
                continue;
            };
            let mut e = StochasticEvent::deterministic(format!("e{}", events.len() + 1), activity);
            e.timestamp = string_attr(event, "date", "time:timestamp").map(str::to_string);
            events.push(e);
        }
        traces.push(StochasticTrace { case_id, events });
    }
    Ok(XesImport {
        log: StochasticLog::new(traces)?,
        skipped_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imports_single_case() {
        let doc = br#"<?xml version="1.0" encoding="UTF-8" ?>
<log xes.version="1.0" xmlns="http://www.xes-standard.org/">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <global scope="event"><string key="concept:name" value="__INVALID__"/></global>
  <string key="concept:name" value="log name"/>
  <trace>
    <string key="concept:name" value="case-7"/>
    <event>
      <string key="concept:name" value="A"/>
      <string key="lifecycle:transition" value="complete"/>
      <date key="time:timestamp" value="2011-10-01T00:38:44.546+02:00"/>
    </event>
    <event><string key="lifecycle:transition" value="start"/></event>
    <event><string key="concept:name" value="B"/></event>
  </trace>
</log>"#;
        let import = import_xes(doc).unwrap();
        assert_eq!(import.skipped_events, 1);
        let t = &import.log.traces[0];
        assert_eq!(t.case_id, "case-7");
        assert_eq!(t.activities(), vec!["A", "B"]);
        assert!(t.is_deterministic());
        assert_eq!(t.events[0].timestamp.as_deref(), Some("2011-10-01T00:38:44.546+02:00"));
    }

    #[test]
    fn empty_log() {
        let import = import_xes(b"<log/>").unwrap();
        assert!(import.log.traces.is_empty());
    }

    #[test]
    fn malformed_xml_is_an_error() {
        assert!(matches!(import_xes(b"<log><trace>"), Err(Error::Parse { .. })));
        assert!(import_xes(b"<pnml/>").is_err());
    }
}
