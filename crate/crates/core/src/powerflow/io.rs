//! State, limits and verdict file formats.
//!
//! State files are columnar: `bus_id,v_mag_pu,v_angle_deg,p_pu,q_pu`.
//! Limits files are key-value (`v_min_pu=0.95`, one per line). Verdicts
//! serialize as key-value lines with per-constraint pass/fail and slack.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{ConstraintLimits, ConstraintReport, PhasorState, PowerFlowError};
use crate::grid::GridGraph;

const STATE_HEADER: &str = "bus_id,v_mag_pu,v_angle_deg,p_pu,q_pu";

fn parse_err(line: usize, message: impl Into<String>) -> PowerFlowError {
    PowerFlowError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a per-bus state aligned with the grid's bus order. Every bus
/// must appear exactly once.
pub fn parse_state_file(
    g: &GridGraph,
    reader: impl BufRead,
) -> Result<PhasorState, PowerFlowError> {
    let n = g.n_buses();
    let mut voltages = vec![None; n];
    let mut powers = vec![None; n];
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != STATE_HEADER {
                return Err(parse_err(
                    lineno,
                    format!("expected header {STATE_HEADER:?}, got {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                lineno,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let bus_id = fields[0]
            .trim()
            .parse::<u32>()
            .map_err(|_| parse_err(lineno, format!("invalid bus id {:?}", fields[0])))?;
        let k = g
            .bus_index(crate::grid::BusId(bus_id))
            .ok_or_else(|| parse_err(lineno, format!("unknown bus {bus_id}")))?;
        let num = |i: usize, what: &str| -> Result<f64, PowerFlowError> {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("invalid {what} {:?}", fields[i])))
        };
        let (vm, va) = (num(1, "voltage magnitude")?, num(2, "voltage angle")?);
        let (p, q) = (num(3, "real power")?, num(4, "reactive power")?);
        if voltages[k].is_some() {
            return Err(parse_err(lineno, format!("duplicate state row for bus {bus_id}")));
        }
        voltages[k] = Some(Complex64::from_polar(vm, va.to_radians()));
        powers[k] = Some(Complex64::new(p, q));
    }
    if !saw_header {
        return Err(parse_err(1, "empty state file (missing header)"));
    }
    let mut v = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for k in 0..n {
        match (voltages[k], powers[k]) {
            (Some(vk), Some(sk)) => {
                v.push(vk);
                s.push(sk);
            }
            _ => {
                return Err(PowerFlowError::DimensionMismatch {
                    context: "state rows",
                    got: voltages.iter().filter(|x| x.is_some()).count(),
                    expected: n,
                })
            }
        }
    }
    Ok(PhasorState {
        voltages: v,
        currents: None,
        powers: Some(s),
    })
}

pub fn write_state_file(
    g: &GridGraph,
    state: &PhasorState,
    mut w: impl Write,
) -> std::io::Result<()> {
    writeln!(w, "{STATE_HEADER}")?;
    for (k, bus) in g.buses().iter().enumerate() {
        let v = state.voltages[k];
        let s = state
            .powers
            .as_ref()
            .map(|p| p[k])
            .unwrap_or(Complex64::new(0.0, 0.0));
        writeln!(
            w,
            "{},{},{},{},{}",
            bus.id,
            v.norm(),
            v.arg().to_degrees(),
            s.re,
            s.im
        )?;
    }
    Ok(())
}

/// Parses a key-value limits file. Required keys: `v_min_pu`, `v_max_pu`,
/// `p_min_pu`, `p_max_pu`, `q_min_pu`, `q_max_pu`, `i_line_max_pu`,
/// `epsilon`. Optional: `balance_tol`.
pub fn parse_limits_file(
    n_buses: usize,
    reader: impl BufRead,
) -> Result<ConstraintLimits, PowerFlowError> {
    let mut kv = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(lineno, format!("expected key=value, got {line:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid number {value:?}")))?;
        kv.insert(key.trim().to_string(), value);
    }
    let need = |key: &str| -> Result<f64, PowerFlowError> {
        kv.get(key)
            .copied()
            .ok_or_else(|| PowerFlowError::InvalidLimits(format!("missing limits field {key:?}")))
    };
    let limits = ConstraintLimits {
        s_min: vec![Complex64::new(need("p_min_pu")?, need("q_min_pu")?); n_buses],
        s_max: vec![Complex64::new(need("p_max_pu")?, need("q_max_pu")?); n_buses],
        v_min: need("v_min_pu")?,
        v_max: need("v_max_pu")?,
        i_line_max: need("i_line_max_pu")?,
        epsilon: need("epsilon")?,
        balance_tol: kv.get("balance_tol").copied().unwrap_or(1e-8),
    };
    limits.validate(n_buses)?;
    Ok(limits)
}

pub fn write_verdict_kv(report: &ConstraintReport, mut w: impl Write) -> std::io::Result<()> {
    let pf = |pass: bool| if pass { "pass" } else { "fail" };
    writeln!(w, "a_power_balance={}", pf(report.balance.pass))?;
    writeln!(w, "a_power_balance_slack={}", report.balance.slack)?;
    writeln!(w, "a_power_balance_residual={}", report.balance_residual)?;
    writeln!(w, "b_power_bounds={}", pf(report.power_bounds.pass))?;
    writeln!(w, "b_power_bounds_slack={}", report.power_bounds.slack)?;
    writeln!(w, "c_voltage_bounds={}", pf(report.voltage_bounds.pass))?;
    writeln!(w, "c_voltage_bounds_slack={}", report.voltage_bounds.slack)?;
    writeln!(w, "d_line_currents={}", pf(report.line_currents.pass))?;
    writeln!(w, "d_line_currents_slack={}", report.line_currents.slack)?;
    writeln!(w, "e_stability_mode={}", report.mode.as_str())?;
    writeln!(
        w,
        "e_stability_referenced={}",
        pf(report.stability.referenced.pass)
    )?;
    writeln!(
        w,
        "e_stability_referenced_max_re={}",
        report.stability.max_re_referenced
    )?;
    writeln!(w, "e_stability_raw={}", pf(report.stability.raw.pass))?;
    writeln!(w, "e_stability_raw_max_re={}", report.stability.max_re_raw)?;
    writeln!(w, "all_pass={}", pf(report.all_pass()))?;
    Ok(())
}
