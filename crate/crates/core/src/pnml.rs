//! Importer for the place/transition subset of PNML.
//!
//! Reads places, transitions (label from `<name><text>`), arcs and
//! `<initialMarking>`. A ProM-style `<finalmarkings>` block is honored when
//! present; otherwise the caller has to supply the final marking. Layout
//! (`graphics`) and tool annotations are skipped. Anything else, e.g. arc
//! inscriptions other than 1 or reset/inhibitor arc types, is rejected.

use crate::net::{ActivityLabel, Marking, SystemNet, Transition};
use crate::xml::{parse_document, Element};
use crate::{Error, Result};

const IGNORED: &[&str] = &["graphics", "toolspecific"];

fn unsupported(path: &str, element: &Element) -> Error {
    Error::Unsupported(format!("PNML element <{}> in {path}", element.name))
}

fn text_of(element: &Element) -> Option<&str> {
    element.child("text").map(|t| t.text.trim())
}

fn positive_count(text: &str, location: &str) -> Result<u32> {
    match text.parse::<u32>() {
        Ok(c) => Ok(c),
        Err(_) => Err(Error::parse(location, format!("expected token count, got {text:?}"))),
    }
}

fn required_attr<'a>(element: &'a Element, key: &str) -> Result<&'a str> {
    element
        .attr(key)
        .ok_or_else(|| Error::parse(format!("<{}>", element.name), format!("missing attribute {key}")))
}

#[derive(Default)]
struct Collector {
    net: SystemNet,
    final_marking: Option<Marking>,
}

impl Collector {
    fn visit_container(&mut self, element: &Element, path: &str) -> Result<()> {
        for child in &element.children {
            match child.name.as_str() {
                "page" => self.visit_container(child, &format!("{path}/page"))?,
                "place" => self.place(child)?,
                "transition" => self.transition(child)?,
                "arc" => self.arc(child)?,
                "finalmarkings" => self.final_markings(child)?,
                "name" => {}
                n if IGNORED.contains(&n) => {}
                _ => return Err(unsupported(path, child)),
            }
        }
        Ok(())
    }

    fn place(&mut self, element: &Element) -> Result<()> {
        let id = required_attr(element, "id")?.to_string();
        for child in &element.children {
            match child.name.as_str() {
                "initialMarking" => {
                    let text = text_of(child).unwrap_or("0");
                    let count = positive_count(text, &format!("place {id} initialMarking"))?;
                    self.net.initial_marking.add(id.clone(), count);
                }
                "name" => {}
                n if IGNORED.contains(&n) => {}
                _ => return Err(unsupported(&format!("place {id}"), child)),
            }
        }
        self.net.places.push(id);
        Ok(())
    }

    fn transition(&mut self, element: &Element) -> Result<()> {
        let id = required_attr(element, "id")?.to_string();
        let mut label = None;
        let mut invisible = false;
        for child in &element.children {
            match child.name.as_str() {
                "name" => label = text_of(child).filter(|t| !t.is_empty()).map(str::to_string),
                "toolspecific" => {
                    invisible |= child.attr("activity") == Some("$invisible$");
                }
                "graphics" => {}
                _ => return Err(unsupported(&format!("transition {id}"), child)),
            }
        }
        let label = match label {
            Some(l) if !invisible => ActivityLabel::Named(l),
            _ => ActivityLabel::Tau,
        };
        self.net.transitions.push(Transition::new(id, label));
        Ok(())
    }

    fn arc(&mut self, element: &Element) -> Result<()> {
        let source = required_attr(element, "source")?.to_string();
        let target = required_attr(element, "target")?.to_string();
        let location = format!("arc {source}->{target}");
        for child in &element.children {
            match child.name.as_str() {
                "inscription" => {
                    let text = text_of(child).unwrap_or("1");
                    if positive_count(text, &location)? != 1 {
                        return Err(Error::Unsupported(format!(
                            "arc multiplicity {text} on {location}"
                        )));
                    }
                }
                "arctype" => {
                    let kind = text_of(child).unwrap_or("normal");
                    if kind != "normal" {
                        return Err(Error::Unsupported(format!("{kind} arc on {location}")));
                    }
                }
                "name" => {}
                n if IGNORED.contains(&n) => {}
                _ => return Err(unsupported(&location, child)),
            }
        }
        self.net.arcs.push((source, target));
        Ok(())
    }

    fn final_markings(&mut self, element: &Element) -> Result<()> {
        let mut markings = element.children_named("marking");
        let Some(first) = markings.next() else {
            return Ok(());
        };
        if markings.next().is_some() {
            return Err(Error::Unsupported("more than one final marking".into()));
        }
        let mut m = Marking::new();
        for place in first.children_named("place") {
            let id = required_attr(place, "idref")?;
            let count = positive_count(text_of(place).unwrap_or("0"), &format!("final marking {id}"))?;
            m.add(id, count);
        }
        self.final_marking = Some(m);
        Ok(())
    }
}

/// Imports a PNML document. `final_marking` overrides (or supplies) the final
/// marking; it is required when the document does not carry one.
pub fn import_pnml(bytes: &[u8], final_marking: Option<Marking>) -> Result<SystemNet> {
    let root = parse_document(bytes)?;
    if root.name != "pnml" {
        return Err(Error::parse("root", format!("expected <pnml>, found <{}>", root.name)));
    }
    let mut nets = root.children_named("net");
    let net = nets
        .next()
        .ok_or_else(|| Error::parse("pnml", "document contains no <net>"))?;
    if nets.next().is_some() {
        return Err(Error::Unsupported("more than one <net> per document".into()));
    }
    let mut collector = Collector::default();
    collector.visit_container(net, "net")?;
    let mut result = collector.net;
    result.final_marking = match (final_marking, collector.final_marking) {
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => {
            return Err(Error::validation(
                "final marking",
                "PNML document has no final marking; supply one explicitly",
            ))
        }
    };
    if let Some(first) = result.validate().first() {
        return Err(Error::parse("net", first.clone()));
    }
    Ok(result)
}
