//! Loading nets and logs by file extension.

use std::path::Path;

use stocon_core::log::{parse_log, StochasticLog};
use stocon_core::net::{parse_net, Marking, SystemNet};
use stocon_core::pnml::import_pnml;
use stocon_core::xes::import_xes;

use crate::{read_file, CliError, Result};

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// `p1,p2:2` style marking: comma-separated places, optional `:count`.
pub fn parse_marking(spec: &str) -> Result<Marking> {
    let mut marking = Marking::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (place, count) = match item.rsplit_once(':') {
            Some((p, c)) => {
                let n: u32 = c
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad token count in marking item {item:?}")))?;
                (p, n)
            }
            None => (item, 1),
        };
        marking.add(place, count);
    }
    Ok(marking)
}

/// JSON net, or PNML when the extension is `.pnml`. A final marking given on
/// the command line is only accepted for PNML input.
pub fn load_net(path: &Path, final_marking: Option<&str>) -> Result<SystemNet> {
    let bytes = read_file(path)?;
    if has_extension(path, "pnml") {
        let fm = final_marking.map(parse_marking).transpose()?;
        return Ok(import_pnml(&bytes, fm)?);
    }
    if final_marking.is_some() {
        return Err(CliError::Usage(
            "--final-marking only applies to PNML nets; JSON nets carry their own".into(),
        ));
    }
    let net = parse_net(&bytes)?;
    Ok(net)
}

/// JSON log, or XES when the extension is `.xes`. Warnings go to stderr.
pub fn load_log(path: &Path) -> Result<StochasticLog> {
    let bytes = read_file(path)?;
    let log = if has_extension(path, "xes") {
        let import = import_xes(&bytes)?;
        if import.skipped_events > 0 {
            eprintln!(
                "warning: {}: skipped {} events without concept:name",
                path.display(),
                import.skipped_events
            );
        }
        import.log
    } else {
        parse_log(&bytes)?
    };
    for w in log.timestamp_warnings() {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marking_specs() {
        let m = parse_marking("end, p2:3").unwrap();
        assert_eq!(m.get("end"), 1);
        assert_eq!(m.get("p2"), 3);
        assert!(parse_marking("p:x").is_err());
        assert!(parse_marking("").unwrap().is_empty());
    }
}
