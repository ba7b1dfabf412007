//! ABCD two-port cascade algebra.
//!
//! A line section of length `l` with characteristic impedance `Z0` and
//! propagation constant `γ(f)` has
//!
//! ```text
//! ABCD = [ cosh γl        Z0·sinh γl ]
//!        [ sinh γl / Z0   cosh γl    ]
//! ```
//!
//! Sections sampled on a common frequency grid cascade by matrix product.
//! Grounding at the main panel enters as a bridged tap: the companion
//! section's input impedance becomes a shunt two-port `[[1,0],[1/Z_in,1]]`
//! inserted at the panel position.

use num_complex::Complex64;

use super::{Attenuation, ChannelError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub const IDENTITY: Abcd = Abcd {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn mul(&self, rhs: &Abcd) -> Abcd {
        Abcd {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// `AD − BC`; 1 for reciprocal sections.
    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn shunt(admittance: Complex64) -> Abcd {
        Abcd {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: admittance,
            d: Complex64::new(1.0, 0.0),
        }
    }
}

/// A two-port sampled over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortNetwork {
    freqs: Vec<f64>,
    matrices: Vec<Abcd>,
}

impl TwoPortNetwork {
    pub fn new(freqs: Vec<f64>, matrices: Vec<Abcd>) -> Result<Self, ChannelError> {
        if freqs.len() != matrices.len() {
            return Err(ChannelError::InvalidParameter(
                "frequency grid and matrix list must have equal length".into(),
            ));
        }
        Ok(TwoPortNetwork { freqs, matrices })
    }

    pub fn identity(freqs: &[f64]) -> Self {
        TwoPortNetwork {
            freqs: freqs.to_vec(),
            matrices: vec![Abcd::IDENTITY; freqs.len()],
        }
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn matrices(&self) -> &[Abcd] {
        &self.matrices
    }
}

/// γ(f) = α(f) + j·2πf/v for a line with the standard attenuation form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    pub velocity_m_per_s: f64,
    pub attenuation: Attenuation,
}

impl PropagationModel {
    pub fn lossless(velocity_m_per_s: f64) -> Self {
        PropagationModel {
            velocity_m_per_s,
            attenuation: Attenuation::NONE,
        }
    }

    /// Per-meter propagation constant at `f`.
    pub fn gamma(&self, f_hz: f64) -> Complex64 {
        Complex64::new(
            self.attenuation.at(f_hz),
            2.0 * std::f64::consts::PI * f_hz / self.velocity_m_per_s,
        )
    }
}

/// Line section from an arbitrary per-meter propagation-constant function.
pub fn line_section_with(
    length_m: f64,
    z0: Complex64,
    gamma: impl Fn(f64) -> Complex64,
    freqs: &[f64],
) -> Result<TwoPortNetwork, ChannelError> {
    if z0.norm() == 0.0 {
        return Err(ChannelError::ZeroCharacteristicImpedance);
    }
    if !(length_m >= 0.0) {
        return Err(ChannelError::InvalidParameter(
            "section length must be >= 0".into(),
        ));
    }
    let matrices = freqs
        .iter()
        .map(|&f| {
            let gl = gamma(f) * length_m;
            let (ch, sh) = (gl.cosh(), gl.sinh());
            Abcd {
                a: ch,
                b: z0 * sh,
                c: sh / z0,
                d: ch,
            }
        })
        .collect();
    TwoPortNetwork::new(freqs.to_vec(), matrices)
}

pub fn line_section(
    length_m: f64,
    z0: Complex64,
    model: &PropagationModel,
    freqs: &[f64],
) -> Result<TwoPortNetwork, ChannelError> {
    line_section_with(length_m, z0, |f| model.gamma(f), freqs)
}

fn check_common_grid(sections: &[TwoPortNetwork]) -> Result<(), ChannelError> {
    for s in &sections[1..] {
        if s.freqs != sections[0].freqs {
            return Err(ChannelError::FrequencyGridMismatch);
        }
    }
    Ok(())
}

/// Ordered matrix product of the sections (first element is the source
/// side).
pub fn cascade(sections: &[TwoPortNetwork]) -> Result<TwoPortNetwork, ChannelError> {
    if sections.is_empty() {
        return Err(ChannelError::InvalidParameter(
            "cascade needs at least one section".into(),
        ));
    }
    check_common_grid(sections)?;
    let n = sections[0].freqs.len();
    let mut matrices = vec![Abcd::IDENTITY; n];
    for s in sections {
        for (acc, m) in matrices.iter_mut().zip(&s.matrices) {
            *acc = acc.mul(m);
        }
    }
    Ok(TwoPortNetwork {
        freqs: sections[0].freqs.clone(),
        matrices,
    })
}

/// Load side of the companion tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Open,
    Impedance(Complex64),
}

/// The grounding companion: a mirror line section terminated at its far
/// end, bridged at the main panel.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionTap {
    pub line: TwoPortNetwork,
    pub termination: Termination,
}

impl CompanionTap {
    /// Input impedance at each grid frequency: `(A·Z_T + B)/(C·Z_T + D)`,
    /// reducing to `A/C` for an open termination.
    pub fn input_impedances(&self) -> Vec<Complex64> {
        self.line
            .matrices
            .iter()
            .map(|m| match self.termination {
                Termination::Open => {
                    if m.c.norm() == 0.0 {
                        Complex64::new(f64::INFINITY, 0.0)
                    } else {
                        m.a / m.c
                    }
                }
                Termination::Impedance(zt) => (m.a * zt + m.b) / (m.c * zt + m.d),
            })
            .collect()
    }
}

/// Inserts the companion's input impedance as a shunt two-port at
/// position `panel_index` of the section list.
pub fn attach_companion(
    link: &[TwoPortNetwork],
    panel_index: usize,
    companion: &CompanionTap,
) -> Result<Vec<TwoPortNetwork>, ChannelError> {
    if panel_index > link.len() {
        return Err(ChannelError::InvalidParameter(format!(
            "panel index {panel_index} outside section list of length {}",
            link.len()
        )));
    }
    if !link.is_empty() {
        check_common_grid(link)?;
        if companion.line.freqs != link[0].freqs {
            return Err(ChannelError::FrequencyGridMismatch);
        }
    }
    let zin = companion.input_impedances();
    let matrices: Vec<Abcd> = zin
        .iter()
        .zip(companion.line.freqs.iter())
        .map(|(z, &f)| {
            if z.norm() == 0.0 {
                Err(ChannelError::ShortAtPanel { freq_hz: f })
            } else if z.re.is_infinite() || z.im.is_infinite() {
                Ok(Abcd::shunt(Complex64::new(0.0, 0.0)))
            } else {
                Ok(Abcd::shunt(z.inv()))
            }
        })
        .collect::<Result<_, _>>()?;
    let shunt = TwoPortNetwork {
        freqs: companion.line.freqs.clone(),
        matrices,
    };
    let mut out = link.to_vec();
    out.insert(panel_index, shunt);
    Ok(out)
}

/// Voltage transfer `V_load/V_source` of the cascaded link between a
/// source of internal impedance `Z_S` and a load `Z_L`:
/// `H = Z_L / (A·Z_L + B + C·Z_S·Z_L + D·Z_S)`.
pub fn endtoend_gain(
    link: &[TwoPortNetwork],
    source_impedance: Complex64,
    load_impedance: Complex64,
) -> Result<(Vec<f64>, Vec<Complex64>), ChannelError> {
    if load_impedance.norm() == 0.0 {
        return Err(ChannelError::InvalidParameter(
            "load impedance must be nonzero".into(),
        ));
    }
    let total = cascade(link)?;
    let mut h = Vec::with_capacity(total.freqs.len());
    for (m, &f) in total.matrices.iter().zip(&total.freqs) {
        let den = m.a * load_impedance
            + m.b
            + m.c * source_impedance * load_impedance
            + m.d * source_impedance;
        if den.norm() < 1e-300 {
            return Err(ChannelError::DegenerateDenominator { freq_hz: f });
        }
        h.push(load_impedance / den);
    }
    Ok((total.freqs, h))
}
