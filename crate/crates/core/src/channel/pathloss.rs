//! Per-km path-loss bands by network segment class, anchored at 100 kHz
//! and 10 MHz, interpolated in log-frequency and clamped outside the
//! anchor band.

use std::collections::BTreeMap;

use super::ChannelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SegmentClass {
    LowVoltage,
    MediumVoltageOverhead,
    MediumVoltageUnderground,
    HighVoltageOverhead,
}

impl SegmentClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentClass::LowVoltage => "lv",
            SegmentClass::MediumVoltageOverhead => "mv_overhead",
            SegmentClass::MediumVoltageUnderground => "mv_underground",
            SegmentClass::HighVoltageOverhead => "hv_overhead",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ChannelError> {
        match s {
            "lv" => Ok(SegmentClass::LowVoltage),
            "mv_overhead" => Ok(SegmentClass::MediumVoltageOverhead),
            "mv_underground" => Ok(SegmentClass::MediumVoltageUnderground),
            "hv_overhead" => Ok(SegmentClass::HighVoltageOverhead),
            other => Err(ChannelError::UnknownClass(other.to_string())),
        }
    }
}

/// Inclusive dB/km range at one frequency anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRange {
    pub low: f64,
    pub high: f64,
}

impl LossRange {
    fn pick(&self, sel: RangeSelector) -> f64 {
        match sel {
            RangeSelector::Midpoint => 0.5 * (self.low + self.high),
            RangeSelector::Optimistic => self.low,
            RangeSelector::Pessimistic => self.high,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeSelector {
    #[default]
    Midpoint,
    Optimistic,
    Pessimistic,
}

const ANCHOR_LO_HZ: f64 = 100e3;
const ANCHOR_HI_HZ: f64 = 10e6;

/// dB/km losses per class at the two frequency anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossTable {
    rows: BTreeMap<SegmentClass, (LossRange, LossRange)>,
}

impl PathLossTable {
    /// The typical published bands: LV 1.5–3 / 160–200, MV overhead
    /// 0.5–1 / 30–50, MV underground 1–2 / 50–80, HV overhead
    /// 0.01–0.09 / 2–4 dB/km at 100 kHz / 10 MHz.
    pub fn standard() -> Self {
        let mut rows = BTreeMap::new();
        let mut add = |class, lo: (f64, f64), hi: (f64, f64)| {
            rows.insert(
                class,
                (
                    LossRange { low: lo.0, high: lo.1 },
                    LossRange { low: hi.0, high: hi.1 },
                ),
            );
        };
        add(SegmentClass::LowVoltage, (1.5, 3.0), (160.0, 200.0));
        add(SegmentClass::MediumVoltageOverhead, (0.5, 1.0), (30.0, 50.0));
        add(SegmentClass::MediumVoltageUnderground, (1.0, 2.0), (50.0, 80.0));
        add(SegmentClass::HighVoltageOverhead, (0.01, 0.09), (2.0, 4.0));
        PathLossTable { rows }
    }

    pub fn with_rows(
        rows: BTreeMap<SegmentClass, (LossRange, LossRange)>,
    ) -> Result<Self, ChannelError> {
        for (class, (lo, hi)) in &rows {
            if !(lo.low > 0.0 && lo.high >= lo.low && hi.low > 0.0 && hi.high >= hi.low) {
                return Err(ChannelError::InvalidParameter(format!(
                    "losses for {} must be positive ordered ranges",
                    class.as_str()
                )));
            }
            if !(hi.low > lo.low && hi.high > lo.high) {
                return Err(ChannelError::InvalidParameter(format!(
                    "{}: loss at 10 MHz must exceed loss at 100 kHz",
                    class.as_str()
                )));
            }
        }
        Ok(PathLossTable { rows })
    }

    /// Path loss in dB for `distance_km` of the given class at `freq_hz`,
    /// midpoint of the published range.
    pub fn pathloss_db(
        &self,
        class: SegmentClass,
        freq_hz: f64,
        distance_km: f64,
    ) -> Result<f64, ChannelError> {
        self.pathloss_db_with(class, freq_hz, distance_km, RangeSelector::Midpoint)
    }

    pub fn pathloss_db_with(
        &self,
        class: SegmentClass,
        freq_hz: f64,
        distance_km: f64,
        sel: RangeSelector,
    ) -> Result<f64, ChannelError> {
        if !(freq_hz > 0.0) {
            return Err(ChannelError::InvalidParameter(
                "frequency must be positive".into(),
            ));
        }
        if !(distance_km >= 0.0) {
            return Err(ChannelError::InvalidParameter(
                "distance must be >= 0".into(),
            ));
        }
        let (lo, hi) = self
            .rows
            .get(&class)
            .ok_or_else(|| ChannelError::UnknownClass(class.as_str().to_string()))?;
        let per_km = {
            let f = freq_hz.clamp(ANCHOR_LO_HZ, ANCHOR_HI_HZ);
            let t = (f / ANCHOR_LO_HZ).log10() / (ANCHOR_HI_HZ / ANCHOR_LO_HZ).log10();
            let a = lo.pick(sel);
            let b = hi.pick(sel);
            a + (b - a) * t
        };
        Ok(per_km * distance_km)
    }
}
