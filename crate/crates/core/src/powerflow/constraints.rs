//! The five steady-state operating checks:
//!
//! (a) power balance `S = V ⊙ (YV)*`
//! (b) per-bus complex power inside `[S_min, S_max]`, component-wise on P and Q
//! (c) voltage magnitudes inside `[V_min, V_max]`
//! (d) per-branch current magnitude `|y_pr(l)·(AV)_l|` below the line limit
//! (e) real parts of `eig(J(V))` at most `−ε`
//!
//! Each verdict carries a signed slack: positive means satisfied with that
//! much margin, negative means violated by that amount.

use num_complex::Complex64;

use super::{jacobian, ConstraintLimits, PhasorState, PowerFlowError};
use crate::grid::{
    admittance_matrix_with, branch_admittances, AdmittanceMatrix, AdmittanceOptions, GridGraph,
};

/// How the angle-reference singularity of J is handled for check (e).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Delete the slack bus angle row/column before the eigenvalue test.
    #[default]
    Referenced,
    /// Use the full 2N×2N Jacobian literally.
    Raw,
}

impl JacobianMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            JacobianMode::Referenced => "referenced",
            JacobianMode::Raw => "raw",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstraintOptions {
    pub mode: JacobianMode,
    /// Bus whose angle row/column is removed in referenced mode.
    pub slack_bus: usize,
    /// Impedance base: grid admittances (siemens) are multiplied by this
    /// to land in per-unit alongside the state.
    pub z_base_ohm: f64,
    pub admittance: AdmittanceOptions,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        ConstraintOptions {
            mode: JacobianMode::default(),
            slack_bus: 0,
            z_base_ohm: 1.0,
            admittance: AdmittanceOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintVerdict {
    pub pass: bool,
    /// Margin to the binding bound; negative = violated by that amount.
    pub slack: f64,
    /// Bus or branch index of the worst offender, when applicable.
    pub worst_index: Option<usize>,
}

impl ConstraintVerdict {
    fn from_slack(slack: f64, worst_index: Option<usize>) -> Self {
        ConstraintVerdict {
            pass: slack >= 0.0,
            slack,
            worst_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    /// Largest eigenvalue real part with the slack angle removed.
    pub max_re_referenced: f64,
    /// Largest eigenvalue real part of the literal 2N×2N Jacobian.
    pub max_re_raw: f64,
    pub referenced: ConstraintVerdict,
    pub raw: ConstraintVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub balance: ConstraintVerdict,
    /// ‖S − V⊙(YV)*‖∞, the measured quantity behind (a).
    pub balance_residual: f64,
    pub power_bounds: ConstraintVerdict,
    pub voltage_bounds: ConstraintVerdict,
    pub line_currents: ConstraintVerdict,
    pub stability: StabilityVerdict,
    pub mode: JacobianMode,
}

impl ConstraintReport {
    pub fn stability_verdict(&self) -> &ConstraintVerdict {
        match self.mode {
            JacobianMode::Referenced => &self.stability.referenced,
            JacobianMode::Raw => &self.stability.raw,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.balance.pass
            && self.power_bounds.pass
            && self.voltage_bounds.pass
            && self.line_currents.pass
            && self.stability_verdict().pass
    }
}

pub fn check_constraints(
    g: &GridGraph,
    state: &PhasorState,
    limits: &ConstraintLimits,
) -> Result<ConstraintReport, PowerFlowError> {
    check_constraints_with(g, state, limits, &ConstraintOptions::default())
}

pub fn check_constraints_with(
    g: &GridGraph,
    state: &PhasorState,
    limits: &ConstraintLimits,
    opts: &ConstraintOptions,
) -> Result<ConstraintReport, PowerFlowError> {
    let n = g.n_buses();
    if state.n() != n {
        return Err(PowerFlowError::DimensionMismatch {
            context: "phasor state",
            got: state.n(),
            expected: n,
        });
    }
    limits.validate(n)?;

    let mut y = admittance_matrix_with(g, &opts.admittance)?;
    if opts.z_base_ohm != 1.0 {
        y.entries.iter_mut().for_each(|c| *c *= opts.z_base_ohm);
    }
    let v = &state.voltages;
    let i_injected = super::injected_currents(&y, v)?;
    let s_from_v = super::injected_powers(v, &i_injected)?;
    let s: Vec<Complex64> = match &state.powers {
        Some(s) => s.clone(),
        None => s_from_v.clone(),
    };

    // (a) power balance
    let (mut residual, mut worst_a) = (0.0f64, None);
    for (k, (sk, sv)) in s.iter().zip(&s_from_v).enumerate() {
        let r = (sk - sv).norm();
        if r > residual {
            residual = r;
            worst_a = Some(k);
        }
    }
    let balance = ConstraintVerdict::from_slack(limits.balance_tol - residual, worst_a);

    // (b) per-bus power bounds, component-wise on P and Q
    let (mut slack_b, mut worst_b) = (f64::INFINITY, None);
    for (k, sk) in s.iter().enumerate() {
        let margins = [
            sk.re - limits.s_min[k].re,
            limits.s_max[k].re - sk.re,
            sk.im - limits.s_min[k].im,
            limits.s_max[k].im - sk.im,
        ];
        for m in margins {
            if m < slack_b {
                slack_b = m;
                worst_b = Some(k);
            }
        }
    }
    let power_bounds = ConstraintVerdict::from_slack(slack_b, worst_b);

    // (c) voltage band
    let (mut slack_c, mut worst_c) = (f64::INFINITY, None);
    for (k, vk) in v.iter().enumerate() {
        let mag = vk.norm();
        for m in [mag - limits.v_min, limits.v_max - mag] {
            if m < slack_c {
                slack_c = m;
                worst_c = Some(k);
            }
        }
    }
    let voltage_bounds = ConstraintVerdict::from_slack(slack_c, worst_c);

    // (d) per-branch current magnitudes
    let mut ypr = branch_admittances(g, &opts.admittance)?;
    if opts.z_base_ohm != 1.0 {
        ypr.iter_mut().for_each(|c| *c *= opts.z_base_ohm);
    }
    let (mut slack_d, mut worst_d) = (f64::INFINITY, None);
    for (row, (_, br)) in g.in_service_branches().enumerate() {
        let a = g.bus_index(br.from).unwrap();
        let b = g.bus_index(br.to).unwrap();
        let i_branch = (ypr[row] * (v[a] - v[b])).norm();
        let m = limits.i_line_max - i_branch;
        if m < slack_d {
            slack_d = m;
            worst_d = Some(row);
        }
    }
    let line_currents = ConstraintVerdict::from_slack(slack_d, worst_d);

    // (e) Jacobian spectrum
    let jac = jacobian(&y, v)?;
    let max_re_raw = max_real_eigenvalue(&jac.entries)?;
    let slack_idx = opts.slack_bus.min(n.saturating_sub(1));
    let referenced = jac.entries.clone().remove_row(slack_idx).remove_column(slack_idx);
    let max_re_referenced = max_real_eigenvalue(&referenced)?;
    let stability = StabilityVerdict {
        max_re_referenced,
        max_re_raw,
        referenced: ConstraintVerdict::from_slack(-limits.epsilon - max_re_referenced, None),
        raw: ConstraintVerdict::from_slack(-limits.epsilon - max_re_raw, None),
    };

    Ok(ConstraintReport {
        balance,
        balance_residual: residual,
        power_bounds,
        voltage_bounds,
        line_currents,
        stability,
        mode: opts.mode,
    })
}

/// Largest real part over the (generally complex) spectrum of a real
/// square matrix.
pub fn max_real_eigenvalue(m: &nalgebra::DMatrix<f64>) -> Result<f64, PowerFlowError> {
    if m.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let eigs = m.clone().complex_eigenvalues();
    Ok(eigs.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Eigenvalues of the full Jacobian; exposed for the angle-shift
/// null-vector property (series-only grids always carry a `Re ≈ 0` mode).
pub fn jacobian_eigenvalues(
    jac: &super::JacobianMatrix,
) -> Result<Vec<Complex64>, PowerFlowError> {
    Ok(jac.entries.clone().complex_eigenvalues().iter().cloned().collect())
}
