//! Plain-text grid ingestion and serialization.
//!
//! Edge-list format, one branch per line, comma separated, header required:
//!
//! ```text
//! bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status
//! 1,2,100,0.2,0.35,line,in_service
//! ```
//!
//! The optional companion bus file carries `bus_id,kv,role`; buses absent
//! from it default to `role=intermediate` with an unspecified voltage
//! level. UTF-8, LF or CRLF.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use super::{Branch, BranchKind, BranchStatus, Bus, BusId, BusRole, GridError, GridGraph};

/// Supported grid file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    EdgeList,
}

const EDGE_HEADER: &str = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status";
const BUS_HEADER: &str = "bus_id,kv,role";

fn parse_err(line: usize, message: impl Into<String>) -> GridError {
    GridError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_bus_id(tok: &str, line: usize) -> Result<BusId, GridError> {
    tok.trim()
        .parse::<u32>()
        .map(BusId)
        .map_err(|_| parse_err(line, format!("invalid bus id {tok:?}")))
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64, GridError> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

/// Parses an edge-list stream into branches. Line numbers are 1-based and
/// include the header.
pub fn parse_edge_list(reader: impl BufRead) -> Result<Vec<Branch>, GridError> {
    let mut branches = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != EDGE_HEADER {
                return Err(parse_err(
                    lineno,
                    format!("expected header {EDGE_HEADER:?}, got {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(
                lineno,
                format!("expected 7 fields, got {}", fields.len()),
            ));
        }
        let kind = match fields[5].trim() {
            "line" => BranchKind::Line,
            "switch" => BranchKind::Switch,
            "transformer" => BranchKind::Transformer,
            other => return Err(parse_err(lineno, format!("unknown branch kind {other:?}"))),
        };
        let status = match fields[6].trim() {
            "in_service" => BranchStatus::InService,
            "open" => BranchStatus::Open,
            other => return Err(parse_err(lineno, format!("unknown status {other:?}"))),
        };
        branches.push(Branch {
            from: parse_bus_id(fields[0], lineno)?,
            to: parse_bus_id(fields[1], lineno)?,
            length_m: parse_f64(fields[2], lineno, "length")?,
            r_ohm_per_km: parse_f64(fields[3], lineno, "resistance")?,
            x_ohm_per_km: parse_f64(fields[4], lineno, "reactance")?,
            kind,
            status,
        });
    }
    if !saw_header {
        return Err(parse_err(1, "empty edge list (missing header)"));
    }
    Ok(branches)
}

/// Parses a companion bus file (`bus_id,kv,role`). `kv` may be the literal
/// `unspecified`.
pub fn parse_bus_file(reader: impl BufRead) -> Result<Vec<Bus>, GridError> {
    let mut buses = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != BUS_HEADER {
                return Err(parse_err(
                    lineno,
                    format!("expected header {BUS_HEADER:?}, got {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                lineno,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let id = parse_bus_id(fields[0], lineno)?;
        let kv = match fields[1].trim() {
            "unspecified" | "" => None,
            tok => Some(parse_f64(tok, lineno, "voltage level")?),
        };
        let role = match fields[2].trim() {
            "generator" => BusRole::Generator,
            "load" => BusRole::Load,
            "intermediate" => BusRole::Intermediate,
            other => return Err(parse_err(lineno, format!("unknown bus role {other:?}"))),
        };
        buses.push(Bus {
            id,
            voltage_kv: kv,
            role,
        });
    }
    if !saw_header {
        return Err(parse_err(1, "empty bus file (missing header)"));
    }
    Ok(buses)
}

/// Loads a grid from an edge-list stream plus an optional bus stream.
/// Buses mentioned only by branches are created with defaults.
pub fn load_grid(
    edges: impl BufRead,
    bus_file: Option<impl BufRead>,
    format: GridFormat,
) -> Result<GridGraph, GridError> {
    let GridFormat::EdgeList = format;
    let branches = parse_edge_list(edges)?;
    let mut buses = match bus_file {
        Some(r) => parse_bus_file(r)?,
        None => Vec::new(),
    };
    let known: BTreeSet<BusId> = buses.iter().map(|b| b.id).collect();
    let mentioned: BTreeSet<BusId> = branches.iter().flat_map(|b| [b.from, b.to]).collect();
    for id in mentioned {
        if !known.contains(&id) {
            buses.push(Bus::new(id));
        }
    }
    GridGraph::new(buses, branches)
}

/// Writes the edge list in ingestion order; round-trips through
/// [`parse_edge_list`] to an identical branch list.
pub fn write_edge_list(g: &GridGraph, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{EDGE_HEADER}")?;
    for br in g.branches() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            br.from,
            br.to,
            br.length_m,
            br.r_ohm_per_km,
            br.x_ohm_per_km,
            br.kind.as_str(),
            br.status.as_str()
        )?;
    }
    Ok(())
}

pub fn write_bus_file(g: &GridGraph, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{BUS_HEADER}")?;
    for bus in g.buses() {
        let kv = match bus.voltage_kv {
            Some(v) => v.to_string(),
            None => "unspecified".into(),
        };
        writeln!(w, "{},{},{}", bus.id, kv, bus.role.as_str())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn minimal_two_row_file() {
        let text = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status\n\
                    1,2,100,0.2,0.35,line,in_service\n";
        let g = load_grid(Cursor::new(text), None::<Cursor<&str>>, GridFormat::EdgeList).unwrap();
        assert_eq!(g.n_buses(), 2);
        assert_eq!(g.n_in_service_branches(), 1);
    }

    #[test]
    fn crlf_and_comments_accepted() {
        let text = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status\r\n\
                    # comment\r\n\
                    1,2,100,0.2,0.35,line,in_service\r\n\
                    2,3,50,0.2,0.35,switch,open\r\n";
        let g = load_grid(Cursor::new(text), None::<Cursor<&str>>, GridFormat::EdgeList).unwrap();
        assert_eq!(g.n_buses(), 3);
        assert_eq!(g.n_in_service_branches(), 1);
        assert_eq!(g.branches()[1].kind, BranchKind::Switch);
    }

    #[test]
    fn unknown_bus_in_bus_file_is_kept_known_in_branch_required() {
        let edges = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status\n\
                     1,2,100,0.2,0.35,line,in_service\n";
        let buses = "bus_id,kv,role\n1,12.47,generator\n7,4.80,load\n";
        let g = load_grid(
            Cursor::new(edges),
            Some(Cursor::new(buses)),
            GridFormat::EdgeList,
        )
        .unwrap();
        assert_eq!(g.n_buses(), 3); // 1, 2, 7
        assert_eq!(g.bus(BusId(1)).unwrap().role, BusRole::Generator);
        assert_eq!(g.bus(BusId(2)).unwrap().role, BusRole::Intermediate);
        assert_eq!(g.bus(BusId(7)).unwrap().voltage_kv, Some(4.80));
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status\n\
                    1,2,100,0.2,0.35,line,in_service\n\
                    1,oops,100,0.2,0.35,line,in_service\n";
        match parse_edge_list(Cursor::new(text)) {
            Err(GridError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_reference_reported() {
        let edges = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status\n\
                     1,99,100,0.2,0.35,line,in_service\n";
        let buses = "bus_id,kv,role\n1,12.47,generator\n2,12.47,load\n";
        // bus 99 appears in a branch and is auto-created, so loading works;
        // a dangling error needs an explicit bus set without it.
        let branches = parse_edge_list(Cursor::new(edges)).unwrap();
        let bus_list = parse_bus_file(Cursor::new(buses)).unwrap();
        let err = GridGraph::new(bus_list, branches).unwrap_err();
        assert!(matches!(err, GridError::DanglingEndpoint { bus: BusId(99), .. }));
    }

    #[test]
    fn roundtrip_identical() {
        let text = "bus_a,bus_b,length_m,r_ohm_per_km,x_ohm_per_km,kind,status\n\
                    1,2,100.5,0.2,0.35,line,in_service\n\
                    2,3,0,0,0,switch,open\n\
                    3,4,1234.25,0.161,0.19,transformer,in_service\n";
        let g = load_grid(Cursor::new(text), None::<Cursor<&str>>, GridFormat::EdgeList).unwrap();
        let mut out = Vec::new();
        write_edge_list(&g, &mut out).unwrap();
        let g2 = load_grid(
            Cursor::new(out.as_slice()),
            None::<Cursor<&str>>,
            GridFormat::EdgeList,
        )
        .unwrap();
        assert_eq!(g, g2);
    }
}
