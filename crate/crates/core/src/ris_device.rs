//! LC-RIS element model: mixture metadata, field-dependent transmittance
//! curves, the Relaxed/Aligned switching state and the Klein-Cook figure of
//! merit.
//!
//! The transmittance curve is an empirical knot table; refractive index,
//! birefringence and electro-optic coefficient are carried as metadata only.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{KnotError, Knots};
use crate::quantities::{
    ratio_to_db, ConcentrationWtPct, FieldVPerUm, GainDb, LengthUm, PowerMw, TemperatureC,
    TransmittanceRatio, Volts, WavelengthNm,
};

/// Default Klein-Cook threshold above which diffraction is single-order.
pub const BRAGG_THRESHOLD: f64 = 10.0;

/// Clear-glass-like transmittance of the unbiased cell.
pub const DEFAULT_RELAXED_TRANSMITTANCE: f64 = 0.96;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcMixture {
    pub host: String,
    pub host_wt_pct: ConcentrationWtPct,
    /// `None` when no sensitizer is added.
    pub sensitizer: Option<String>,
    pub sensitizer_wt_pct: ConcentrationWtPct,
    pub temperature: TemperatureC,
    pub wavelength: WavelengthNm,
    /// Free-form provenance notes (e.g. conflicting source labels).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl LcMixture {
    pub fn new(
        host: impl Into<String>,
        host_wt_pct: ConcentrationWtPct,
        sensitizer: Option<(String, ConcentrationWtPct)>,
        temperature: TemperatureC,
        wavelength: WavelengthNm,
    ) -> Result<Self> {
        let (sensitizer, sensitizer_wt_pct) = match sensitizer {
            Some((name, c)) => (Some(name), c),
            None => (None, ConcentrationWtPct::ZERO),
        };
        if host_wt_pct.value() + sensitizer_wt_pct.value() > 100.0 {
            return Err(Error::domain(
                "mixture",
                "combined concentration exceeds 100 wt%",
            ));
        }
        Ok(Self {
            host: host.into(),
            host_wt_pct,
            sensitizer,
            sensitizer_wt_pct,
            temperature,
            wavelength,
            notes: Vec::new(),
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Independent variable of a tabulated curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveAxis {
    /// Applied field E0 in V/µm.
    Field,
    /// Dye concentration in wt%.
    Concentration,
    /// Wavelength in nm.
    Wavelength,
}

impl CurveAxis {
    pub fn header(self) -> &'static str {
        match self {
            CurveAxis::Field => "e0_v_per_um",
            CurveAxis::Concentration => "concentration_wt_pct",
            CurveAxis::Wavelength => "wavelength_nm",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            CurveAxis::Field => "V/um",
            CurveAxis::Concentration => "wt%",
            CurveAxis::Wavelength => "nm",
        }
    }
}

/// Tabulated transmittance versus one independent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmittanceCurve {
    axis: CurveAxis,
    knots: Knots,
    provenance: String,
}

impl TransmittanceCurve {
    pub fn new(
        axis: CurveAxis,
        points: &[(f64, TransmittanceRatio)],
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let xs = points.iter().map(|p| p.0).collect();
        let ys = points.iter().map(|p| p.1.value()).collect();
        let knots = Knots::new(xs, ys).map_err(|e| {
            let msg = match e {
                KnotError::Empty => "curve needs at least one knot".to_string(),
                KnotError::LengthMismatch => unreachable!("built from pairs"),
                KnotError::NonFinite { index } => format!("knot {index} is not finite"),
                KnotError::NotIncreasing { index } => {
                    format!(
                        "knot {index}: {} values must be strictly increasing",
                        axis.header()
                    )
                }
            };
            Error::domain("transmittance curve", msg)
        })?;
        Ok(Self {
            axis,
            knots,
            provenance: provenance.into(),
        })
    }

    /// Field-axis curve from `(E0, ratio)` pairs.
    pub fn field(
        points: &[(FieldVPerUm, TransmittanceRatio)],
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let raw: Vec<_> = points.iter().map(|(e, t)| (e.value(), *t)).collect();
        Self::new(CurveAxis::Field, &raw, provenance)
    }

    pub fn axis(&self) -> CurveAxis {
        self.axis
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.knots.xs().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> (f64, f64) {
        self.knots.domain()
    }

    /// Knots as `(x, ratio)` pairs in increasing x.
    pub fn points(&self) -> impl Iterator<Item = (f64, TransmittanceRatio)> + '_ {
        self.knots
            .xs()
            .iter()
            .zip(self.knots.ys())
            .map(|(&x, &y)| (x, TransmittanceRatio::new(y).expect("validated knot")))
    }

    /// Interpolated transmittance at `x` on this curve's own axis.
    pub fn value_at(&self, x: f64) -> Result<TransmittanceRatio> {
        match self.knots.eval(x) {
            // convex combination of positive knots stays positive
            Some(t) => TransmittanceRatio::new(t),
            None => {
                let (min, max) = self.domain();
                Err(Error::OutOfDomain {
                    axis: self.axis.header(),
                    value: x,
                    min,
                    max,
                })
            }
        }
    }
}

/// Transmittance of a field-axis curve at `e0`. No extrapolation.
pub fn transmittance_at(curve: &TransmittanceCurve, e0: FieldVPerUm) -> Result<TransmittanceRatio> {
    if curve.axis != CurveAxis::Field {
        return Err(Error::domain(
            "transmittance curve",
            format!("curve is tabulated over {}, not field", curve.axis.header()),
        ));
    }
    curve.value_at(e0.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeviceState {
    /// Molecules parallel to the glass; passive attenuation.
    Relaxed,
    /// Molecules realigned by the applied field; the curve applies.
    Aligned,
}

/// Aligned iff `v_applied >= v_th`.
pub fn device_state(v_applied: Volts, v_th: Volts) -> DeviceState {
    if v_applied >= v_th {
        DeviceState::Aligned
    } else {
        DeviceState::Relaxed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisDevice {
    pub id: String,
    pub mixture: LcMixture,
    pub thickness: LengthUm,
    pub switching_voltage: Volts,
    pub relaxed_transmittance: TransmittanceRatio,
    pub refractive_index: f64,
    pub birefringence: f64,
    /// Electro-optic coefficient in pm/V, when known.
    pub electro_optic_pm_per_v: Option<f64>,
    pub grating_period: LengthUm,
    pub curve: TransmittanceCurve,
}

/// Geometry and switching parameters shared by a family of devices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceGeometry {
    pub thickness: LengthUm,
    pub switching_voltage: Volts,
    pub relaxed_transmittance: TransmittanceRatio,
    pub refractive_index: f64,
    pub birefringence: f64,
    pub electro_optic_pm_per_v: Option<f64>,
    pub grating_period: LengthUm,
}

impl Default for DeviceGeometry {
    fn default() -> Self {
        Self {
            thickness: LengthUm::new(10.0).unwrap(),
            switching_voltage: Volts::new(0.5).unwrap(),
            relaxed_transmittance: TransmittanceRatio::new(DEFAULT_RELAXED_TRANSMITTANCE).unwrap(),
            refractive_index: 1.5,
            birefringence: 0.2,
            electro_optic_pm_per_v: None,
            grating_period: LengthUm::new(1.0).unwrap(),
        }
    }
}

impl RisDevice {
    pub fn new(
        id: impl Into<String>,
        mixture: LcMixture,
        geometry: DeviceGeometry,
        curve: TransmittanceCurve,
    ) -> Result<Self> {
        if geometry.thickness.value() <= 0.0 {
            return Err(Error::domain("thickness", "must be positive"));
        }
        if geometry.grating_period.value() <= 0.0 {
            return Err(Error::domain("grating period", "must be positive"));
        }
        if geometry.relaxed_transmittance.value() > 1.0 {
            return Err(Error::domain("relaxed transmittance", "must be in (0, 1]"));
        }
        if !(geometry.refractive_index.is_finite() && geometry.refractive_index >= 1.0) {
            return Err(Error::domain("refractive index", "must be >= 1"));
        }
        if curve.axis() != CurveAxis::Field {
            return Err(Error::domain(
                "device curve",
                "must be tabulated over the applied field",
            ));
        }
        Ok(Self {
            id: id.into(),
            mixture,
            thickness: geometry.thickness,
            switching_voltage: geometry.switching_voltage,
            relaxed_transmittance: geometry.relaxed_transmittance,
            refractive_index: geometry.refractive_index,
            birefringence: geometry.birefringence,
            electro_optic_pm_per_v: geometry.electro_optic_pm_per_v,
            grating_period: geometry.grating_period,
            curve,
        })
    }

    /// Voltage across the cell for a uniform field `e0`.
    pub fn voltage_for_field(&self, e0: FieldVPerUm) -> Volts {
        Volts::new(e0.value() * self.thickness.value()).expect("product of non-negatives")
    }

    pub fn state(&self, v_applied: Volts) -> DeviceState {
        device_state(v_applied, self.switching_voltage)
    }

    /// Transmittance in the state selected by `v_applied`.
    pub fn transmittance(&self, e0: FieldVPerUm, v_applied: Volts) -> Result<TransmittanceRatio> {
        match self.state(v_applied) {
            DeviceState::Aligned => transmittance_at(&self.curve, e0),
            DeviceState::Relaxed => Ok(self.relaxed_transmittance),
        }
    }
}

pub fn emerged_power(
    p_i: PowerMw,
    device: &RisDevice,
    e0: FieldVPerUm,
    v_applied: Volts,
) -> Result<PowerMw> {
    Ok(p_i.scale(device.transmittance(e0, v_applied)?))
}

/// Aligned-state gain. Independent of `p_i` as long as it is positive.
pub fn gain_db_at(p_i: PowerMw, device: &RisDevice, e0: FieldVPerUm) -> Result<GainDb> {
    if p_i.value() <= 0.0 {
        return Err(Error::domain("power", "gain needs a positive input power"));
    }
    let p_e = emerged_power(p_i, device, e0, device.switching_voltage)?;
    Ok(ratio_to_db(p_e.ratio_to(p_i)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiffractionRegime {
    Bragg,
    RamanNath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KleinCook {
    pub q: f64,
    pub regime: DiffractionRegime,
}

/// Klein-Cook parameter `Q = 2π·λ·x / (n·Λ²)`; Bragg iff `Q > threshold`.
pub fn klein_cook(
    wavelength: WavelengthNm,
    thickness: LengthUm,
    refractive_index: f64,
    grating_period: LengthUm,
    threshold: f64,
) -> Result<KleinCook> {
    if thickness.value() <= 0.0 || grating_period.value() <= 0.0 {
        return Err(Error::domain(
            "geometry",
            "thickness and grating period must be positive",
        ));
    }
    if !(refractive_index.is_finite() && refractive_index >= 1.0) {
        return Err(Error::domain("refractive index", "must be >= 1"));
    }
    let period = grating_period.value();
    let q =
        2.0 * PI * wavelength.to_um() * thickness.value() / (refractive_index * period * period);
    let regime = if q > threshold {
        DiffractionRegime::Bragg
    } else {
        DiffractionRegime::RamanNath
    };
    Ok(KleinCook { q, regime })
}
