//! Analytic power-flow Jacobian.
//!
//! With `S(V) = diag(V)·(Y·V)*` and polar coordinates `V_k = |V_k| e^{jθ_k}`,
//! the sensitivities are
//!
//! ```text
//! ∂S/∂θ   = j·diag(V)·(diag(I) − Y·diag(V))*
//! ∂S/∂|V| = diag(V)·(Y·diag(V/|V|))* + diag(I*)·diag(V/|V|)
//! ```
//!
//! assembled into the 2N×2N real block matrix
//! `[[∂P/∂θ, ∂P/∂|V|], [∂Q/∂θ, ∂Q/∂|V|]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PowerFlowError;
use crate::grid::AdmittanceMatrix;

/// 2N×2N real Jacobian of the bus power injections.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub entries: DMatrix<f64>,
    n: usize,
}

impl JacobianMatrix {
    pub fn n_buses(&self) -> usize {
        self.n
    }

    /// dP/dθ block.
    pub fn dp_dtheta(&self) -> DMatrix<f64> {
        self.entries.view((0, 0), (self.n, self.n)).into_owned()
    }

    /// dP/d|V| block.
    pub fn dp_dvm(&self) -> DMatrix<f64> {
        self.entries.view((0, self.n), (self.n, self.n)).into_owned()
    }

    /// dQ/dθ block.
    pub fn dq_dtheta(&self) -> DMatrix<f64> {
        self.entries.view((self.n, 0), (self.n, self.n)).into_owned()
    }

    /// dQ/d|V| block.
    pub fn dq_dvm(&self) -> DMatrix<f64> {
        self.entries
            .view((self.n, self.n), (self.n, self.n))
            .into_owned()
    }
}

pub fn jacobian(y: &AdmittanceMatrix, v: &[Complex64]) -> Result<JacobianMatrix, PowerFlowError> {
    let n = y.n();
    if v.len() != n {
        return Err(PowerFlowError::DimensionMismatch {
            context: "voltage vector",
            got: v.len(),
            expected: n,
        });
    }
    for (k, vk) in v.iter().enumerate() {
        if vk.norm() == 0.0 {
            return Err(PowerFlowError::ZeroVoltageMagnitude { index: k });
        }
    }
    let i_bus = super::injected_currents(y, v)?;
    let vnorm: Vec<Complex64> = v.iter().map(|vk| vk / vk.norm()).collect();

    let mut ds_dtheta = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut ds_dvm = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let j = Complex64::new(0.0, 1.0);
    for r in 0..n {
        for c in 0..n {
            let yv = y.entries[(r, c)] * v[c];
            let yvn = y.entries[(r, c)] * vnorm[c];
            let mut dst = -yv;
            let mut dsv = v[r] * yvn.conj();
            if r == c {
                dst += i_bus[r];
                dsv += i_bus[r].conj() * vnorm[r];
            }
            ds_dtheta[(r, c)] = j * v[r] * dst.conj();
            ds_dvm[(r, c)] = dsv;
        }
    }

    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            out[(r, c)] = ds_dtheta[(r, c)].re;
            out[(r, n + c)] = ds_dvm[(r, c)].re;
            out[(n + r, c)] = ds_dtheta[(r, c)].im;
            out[(n + r, n + c)] = ds_dvm[(r, c)].im;
        }
    }
    Ok(JacobianMatrix { entries: out, n })
}
