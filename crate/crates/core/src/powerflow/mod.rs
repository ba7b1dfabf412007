//! Phasor bus quantities and steady-state operating constraints.
//!
//! Works in per-unit: feed it a per-unit admittance matrix and per-unit
//! voltages and everything stays commensurate. `injected_currents` is
//! `I = Y·V`, `injected_powers` is `S = V ⊙ I*` with `P = Re S`,
//! `Q = Im S`.

mod constraints;
mod io;
mod jacobian;

pub use constraints::{
    check_constraints, check_constraints_with, ConstraintOptions, ConstraintReport,
    ConstraintVerdict, JacobianMode, StabilityVerdict,
};
pub use io::{parse_limits_file, parse_state_file, write_state_file, write_verdict_kv};
pub use jacobian::{jacobian, JacobianMatrix};

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::AdmittanceMatrix;

#[derive(Debug, Error)]
pub enum PowerFlowError {
    #[error("dimension mismatch: {context} has length {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("bus {index} has zero voltage magnitude")]
    ZeroVoltageMagnitude { index: usize },
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("grid error: {0}")]
    Grid(#[from] crate::grid::GridError),
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Complex bus voltages with optionally populated currents and powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorState {
    pub voltages: Vec<Complex64>,
    pub currents: Option<Vec<Complex64>>,
    pub powers: Option<Vec<Complex64>>,
}

impl PhasorState {
    pub fn from_voltages(voltages: Vec<Complex64>) -> Self {
        PhasorState {
            voltages,
            currents: None,
            powers: None,
        }
    }

    /// Builds a self-consistent state from voltages: `I = Y·V`,
    /// `S = V ⊙ I*`.
    pub fn consistent(
        y: &AdmittanceMatrix,
        voltages: Vec<Complex64>,
    ) -> Result<Self, PowerFlowError> {
        let currents = injected_currents(y, &voltages)?;
        let powers = injected_powers(&voltages, &currents)?;
        Ok(PhasorState {
            voltages,
            currents: Some(currents),
            powers: Some(powers),
        })
    }

    pub fn n(&self) -> usize {
        self.voltages.len()
    }

    /// P vector, available when powers are populated.
    pub fn real_powers(&self) -> Option<Vec<f64>> {
        self.powers.as_ref().map(|s| s.iter().map(|c| c.re).collect())
    }

    /// Q vector, available when powers are populated.
    pub fn reactive_powers(&self) -> Option<Vec<f64>> {
        self.powers.as_ref().map(|s| s.iter().map(|c| c.im).collect())
    }
}

/// Per-bus complex-power bounds, voltage band, branch current limit and
/// stability margin.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintLimits {
    pub s_min: Vec<Complex64>,
    pub s_max: Vec<Complex64>,
    pub v_min: f64,
    pub v_max: f64,
    pub i_line_max: f64,
    pub epsilon: f64,
    /// Pass threshold for the power-balance residual.
    pub balance_tol: f64,
}

impl ConstraintLimits {
    /// Identical bounds applied to every bus.
    pub fn uniform(
        n: usize,
        s_min: Complex64,
        s_max: Complex64,
        v_min: f64,
        v_max: f64,
        i_line_max: f64,
        epsilon: f64,
    ) -> Result<Self, PowerFlowError> {
        let limits = ConstraintLimits {
            s_min: vec![s_min; n],
            s_max: vec![s_max; n],
            v_min,
            v_max,
            i_line_max,
            epsilon,
            balance_tol: 1e-8,
        };
        limits.validate(n)?;
        Ok(limits)
    }

    pub fn validate(&self, n: usize) -> Result<(), PowerFlowError> {
        if self.s_min.len() != n || self.s_max.len() != n {
            return Err(PowerFlowError::InvalidLimits(format!(
                "per-bus power bounds must have length {n}"
            )));
        }
        if !(self.v_min < self.v_max) {
            return Err(PowerFlowError::InvalidLimits(
                "v_min must be below v_max".into(),
            ));
        }
        if !(self.epsilon >= 0.0) {
            return Err(PowerFlowError::InvalidLimits("epsilon must be >= 0".into()));
        }
        if !(self.balance_tol > 0.0) {
            return Err(PowerFlowError::InvalidLimits(
                "balance_tol must be positive".into(),
            ));
        }
        for (lo, hi) in self.s_min.iter().zip(&self.s_max) {
            if lo.re > hi.re || lo.im > hi.im {
                return Err(PowerFlowError::InvalidLimits(
                    "s_min must be component-wise <= s_max".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `I = Y·V`.
pub fn injected_currents(
    y: &AdmittanceMatrix,
    v: &[Complex64],
) -> Result<Vec<Complex64>, PowerFlowError> {
    let n = y.n();
    if v.len() != n {
        return Err(PowerFlowError::DimensionMismatch {
            context: "voltage vector",
            got: v.len(),
            expected: n,
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += y.entries[(i, j)] * v[j];
        }
        out[i] = acc;
    }
    Ok(out)
}

/// `S = V ⊙ I*` element-wise.
pub fn injected_powers(
    v: &[Complex64],
    i: &[Complex64],
) -> Result<Vec<Complex64>, PowerFlowError> {
    if v.len() != i.len() {
        return Err(PowerFlowError::DimensionMismatch {
            context: "current vector",
            got: i.len(),
            expected: v.len(),
        });
    }
    Ok(v.iter().zip(i).map(|(vk, ik)| vk * ik.conj()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{admittance_matrix, Branch, GridGraph};

    fn two_bus_y(b_siemens: f64) -> AdmittanceMatrix {
        // pure series susceptance y = -j b between two buses
        let x_total = 1.0 / b_siemens;
        let g = GridGraph::from_branches(vec![Branch::line(1, 2, 1000.0, 0.0, x_total)]).unwrap();
        admittance_matrix(&g).unwrap()
    }

    fn polar(mag: f64, deg: f64) -> Complex64 {
        Complex64::from_polar(mag, deg.to_radians())
    }

    #[test]
    fn flat_profile_gives_zero_currents() {
        let y = two_bus_y(10.0);
        let v = vec![polar(1.0, 0.0); 2];
        let i = injected_currents(&y, &v).unwrap();
        for c in i {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn two_bus_current_matches_hand_arithmetic() {
        // y = -j10 S, V = [1∠0, 1∠-5°]: I1 = -j10 (1 - 1∠-5°)
        let y = two_bus_y(10.0);
        let v = vec![polar(1.0, 0.0), polar(1.0, -5.0)];
        let i = injected_currents(&y, &v).unwrap();
        let oracle = Complex64::new(0.0, -10.0) * (v[0] - v[1]);
        assert!((i[0] - oracle).norm() < 1e-10);
        assert!((i[1] + oracle).norm() < 1e-10);
    }

    #[test]
    fn current_linearity_in_voltage() {
        let y = two_bus_y(3.0);
        let v = vec![polar(1.02, 3.0), polar(0.97, -12.0)];
        let c = Complex64::new(0.3, -1.7);
        let i = injected_currents(&y, &v).unwrap();
        let vs: Vec<_> = v.iter().map(|x| x * c).collect();
        let is = injected_currents(&y, &vs).unwrap();
        for (a, b) in is.iter().zip(&i) {
            assert!((a - b * c).norm() < 1e-12);
        }
    }

    #[test]
    fn two_bus_power_matches_sine_rule() {
        // P1 = V1 V2 B sin(delta) for a pure susceptance tie
        let y = two_bus_y(10.0);
        let v = vec![polar(1.0, 0.0), polar(1.0, -5.0)];
        let i = injected_currents(&y, &v).unwrap();
        let s = injected_powers(&v, &i).unwrap();
        let expected = 10.0 * (5.0f64.to_radians()).sin();
        assert!((s[0].re - expected).abs() < 1e-10, "P1 = {}", s[0].re);
    }

    #[test]
    fn zero_current_zero_power_and_conjugation() {
        let v = vec![polar(1.0, 20.0), polar(1.1, -40.0)];
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        for s in injected_powers(&v, &zero).unwrap() {
            assert_eq!(s, Complex64::new(0.0, 0.0));
        }
        let i = vec![polar(0.5, 10.0), polar(0.7, 170.0)];
        let s = injected_powers(&v, &i).unwrap();
        let vc: Vec<_> = v.iter().map(|c| c.conj()).collect();
        let ic: Vec<_> = i.iter().map(|c| c.conj()).collect();
        let sc = injected_powers(&vc, &ic).unwrap();
        for (a, b) in s.iter().zip(&sc) {
            assert!((a.conj() - b).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_reported() {
        let y = two_bus_y(1.0);
        let err = injected_currents(&y, &[Complex64::new(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, PowerFlowError::DimensionMismatch { .. }));
    }

    #[test]
    fn consistent_state_populates_everything() {
        let y = two_bus_y(5.0);
        let v = vec![polar(1.0, 0.0), polar(0.98, -3.0)];
        let st = PhasorState::consistent(&y, v).unwrap();
        assert!(st.currents.is_some());
        assert!(st.powers.is_some());
        assert_eq!(st.real_powers().unwrap().len(), 2);
    }
}
