//! End-to-end link computation.
//!
//! The transmitter is a pure power source; distance enters only through
//! Beer-Lambert attenuation in air.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantities::{
    AttenuationCoeff, FieldVPerUm, LengthM, PowerMw, TransmittanceRatio, Volts,
};
use crate::ris_device::{emerged_power, RisDevice};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirChannel {
    zeta: AttenuationCoeff,
}

impl AirChannel {
    pub fn new(zeta: AttenuationCoeff) -> Result<Self> {
        if zeta.value() <= 0.0 {
            return Err(Error::domain("air attenuation", "must be positive"));
        }
        Ok(Self { zeta })
    }

    pub fn db_per_m(zeta: f64) -> Result<Self> {
        Self::new(AttenuationCoeff::db_per_m(zeta)?)
    }

    pub fn zeta(&self) -> AttenuationCoeff {
        self.zeta
    }

    pub fn zeta_db_per_m(&self) -> f64 {
        self.zeta.in_db_per_m()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photodetector {
    sensitivity: PowerMw,
    saturation: PowerMw,
}

impl Photodetector {
    pub fn new(sensitivity: PowerMw, saturation: PowerMw) -> Result<Self> {
        if !(sensitivity.value() > 0.0 && sensitivity < saturation) {
            return Err(Error::domain(
                "photodetector",
                format!("need 0 < sensitivity ({sensitivity}) < saturation ({saturation})"),
            ));
        }
        Ok(Self {
            sensitivity,
            saturation,
        })
    }

    pub fn sensitivity(&self) -> PowerMw {
        self.sensitivity
    }

    pub fn saturation(&self) -> PowerMw {
        self.saturation
    }

    /// Linear on `[P_sens, P_sat]`, both ends inclusive.
    pub fn classify(&self, p: PowerMw) -> PdState {
        if p < self.sensitivity {
            PdState::BelowSensitivity
        } else if p > self.saturation {
            PdState::Saturated
        } else {
            PdState::Linear
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PdState {
    BelowSensitivity,
    Linear,
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinkMode {
    /// RIS and PD share a package; the PD sits under the cell.
    EnhancedDetection,
    /// The RIS re-radiates towards a PD further down the path.
    RelayAmplification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    mode: LinkMode,
    d_tx_ris: LengthM,
    d_ris_pd: LengthM,
    pub channel: AirChannel,
    pub detector: Photodetector,
    pub device: RisDevice,
    pub e0: FieldVPerUm,
    pub v_applied: Volts,
    pub tx_power: PowerMw,
}

/// Everything needed for a [`LinkScenario`] except mode and distances.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParts {
    pub channel: AirChannel,
    pub detector: Photodetector,
    pub device: RisDevice,
    pub e0: FieldVPerUm,
    pub v_applied: Volts,
    pub tx_power: PowerMw,
}

impl LinkScenario {
    pub fn enhanced(parts: LinkParts, d_tx_ris: LengthM) -> Self {
        Self::from_parts(
            parts,
            LinkMode::EnhancedDetection,
            d_tx_ris,
            LengthM::new(0.0).unwrap(),
        )
    }

    pub fn relay(parts: LinkParts, d_tx_ris: LengthM, d_ris_pd: LengthM) -> Self {
        Self::from_parts(parts, LinkMode::RelayAmplification, d_tx_ris, d_ris_pd)
    }

    /// Enhanced detection forces a zero RIS→PD distance.
    pub fn new(
        parts: LinkParts,
        mode: LinkMode,
        d_tx_ris: LengthM,
        d_ris_pd: LengthM,
    ) -> Result<Self> {
        if mode == LinkMode::EnhancedDetection && d_ris_pd.value() != 0.0 {
            return Err(Error::domain(
                "d-ris-pd",
                "enhanced detection puts the PD under the cell; distance must be 0",
            ));
        }
        Ok(Self::from_parts(parts, mode, d_tx_ris, d_ris_pd))
    }

    fn from_parts(p: LinkParts, mode: LinkMode, d_tx_ris: LengthM, d_ris_pd: LengthM) -> Self {
        Self {
            mode,
            d_tx_ris,
            d_ris_pd,
            channel: p.channel,
            detector: p.detector,
            device: p.device,
            e0: p.e0,
            v_applied: p.v_applied,
            tx_power: p.tx_power,
        }
    }

    pub fn mode(&self) -> LinkMode {
        self.mode
    }

    pub fn d_tx_ris(&self) -> LengthM {
        self.d_tx_ris
    }

    pub fn d_ris_pd(&self) -> LengthM {
        self.d_ris_pd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkOutcome {
    pub ris_input: PowerMw,
    pub ris_output: PowerMw,
    pub pd_power: PowerMw,
    pub pd_state: PdState,
    pub ris_transmittance: TransmittanceRatio,
    pub dc_gain: TransmittanceRatio,
    /// Distance the RIS output could still travel before falling to the PD
    /// sensitivity, minus the RIS→PD distance already used. Negative when the
    /// link is short of sensitivity; `None` when the RIS output is zero.
    pub range_margin_m: Option<f64>,
}

pub fn air_transmittance(channel: &AirChannel, l: LengthM) -> TransmittanceRatio {
    let t = 10f64.powf(-channel.zeta_db_per_m() * l.value() / 10.0);
    // underflows to 0 only for absurd path lengths
    TransmittanceRatio::new(t.max(f64::MIN_POSITIVE)).unwrap()
}

pub fn channel_dc_gain(t_air: TransmittanceRatio, t_ris: TransmittanceRatio) -> TransmittanceRatio {
    t_air * t_ris
}

fn signed_range(p_e: PowerMw, p_ref: PowerMw, zeta_db: f64) -> f64 {
    10.0 / zeta_db * (p_e.value() / p_ref.value()).log10()
}

/// Distance over which `p_e` decays to `p_ref` in air.
pub fn range_extension(p_e: PowerMw, p_ref: PowerMw, zeta: AttenuationCoeff) -> Result<LengthM> {
    if p_ref.value() <= 0.0 {
        return Err(Error::domain("reference power", "must be positive"));
    }
    if zeta.value() <= 0.0 {
        return Err(Error::domain("air attenuation", "must be positive"));
    }
    if p_e < p_ref {
        return Err(Error::NoExtension {
            p_e: p_e.value(),
            p_ref: p_ref.value(),
        });
    }
    LengthM::new(signed_range(p_e, p_ref, zeta.in_db_per_m()))
}

pub fn simulate_link(s: &LinkScenario) -> Result<LinkOutcome> {
    let t_in = air_transmittance(&s.channel, s.d_tx_ris);
    let ris_input = s.tx_power.scale(t_in);
    let t_ris = s.device.transmittance(s.e0, s.v_applied)?;
    let ris_output = emerged_power(ris_input, &s.device, s.e0, s.v_applied)?;
    let t_out = match s.mode {
        LinkMode::EnhancedDetection => TransmittanceRatio::UNITY,
        LinkMode::RelayAmplification => air_transmittance(&s.channel, s.d_ris_pd),
    };
    let pd_power = ris_output.scale(t_out);
    let range_margin_m = (ris_output.value() > 0.0).then(|| {
        signed_range(
            ris_output,
            s.detector.sensitivity(),
            s.channel.zeta_db_per_m(),
        ) - s.d_ris_pd.value()
    });
    Ok(LinkOutcome {
        ris_input,
        ris_output,
        pd_power,
        pd_state: s.detector.classify(pd_power),
        ris_transmittance: t_ris,
        dc_gain: channel_dc_gain(t_in * t_out, t_ris),
        range_margin_m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LensKind {
    Clear,
    Prismatic,
    HeatAbsorbing,
}

/// Fractional power loss range of a conventional lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRange {
    pub min: f64,
    pub max: f64,
}

impl LossRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(0.0 <= min && min <= max && max < 1.0) {
            return Err(Error::domain("lens loss", "need 0 <= min <= max < 1"));
        }
        Ok(Self { min, max })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

impl LensKind {
    pub fn default_loss(self) -> LossRange {
        match self {
            LensKind::Clear => LossRange {
                min: 0.02,
                max: 0.04,
            },
            LensKind::Prismatic => LossRange {
                min: 0.05,
                max: 0.10,
            },
            LensKind::HeatAbsorbing => LossRange {
                min: 0.30,
                max: 0.30,
            },
        }
    }
}

/// Power after a conventional lens at the midpoint of its default loss range.
pub fn lens_baseline(p_i: PowerMw, lens: LensKind) -> PowerMw {
    lens_baseline_with(p_i, lens.default_loss())
}

pub fn lens_baseline_with(p_i: PowerMw, loss: LossRange) -> PowerMw {
    PowerMw::new(p_i.value() * (1.0 - loss.midpoint())).unwrap()
}
