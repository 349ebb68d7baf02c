//! Unit-tagged scalar types.
//!
//! Canonical internal units are mW, m, V/µm and natural attenuation (1/m).
//! Every constructor validates its invariant, so a value that exists is a
//! value that is usable.

use std::f64::consts::LN_10;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

macro_rules! non_negative_quantity {
    ($(#[$meta:meta])* $name:ident, $label:literal, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
        #[serde(transparent)]
        pub struct $name(f64);

        impl $name {
            pub const UNIT: &'static str = $unit;

            pub fn new(value: f64) -> Result<Self> {
                if !value.is_finite() {
                    return Err(Error::domain($label, format!("{value} is not finite")));
                }
                if value < 0.0 {
                    return Err(Error::domain($label, format!("{value} {} is negative", $unit)));
                }
                // normalise -0.0
                Ok(Self(value + 0.0))
            }

            pub const fn value(self) -> f64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

non_negative_quantity!(
    /// Optical power in milliwatts.
    PowerMw, "power", "mW"
);
non_negative_quantity!(
    /// Electric field magnitude in V/µm.
    FieldVPerUm, "field", "V/um"
);
non_negative_quantity!(
    /// Length in metres.
    LengthM, "length", "m"
);
non_negative_quantity!(
    /// Length in micrometres (device-scale geometry).
    LengthUm, "length", "um"
);
non_negative_quantity!(
    /// Applied or threshold voltage magnitude.
    Volts, "voltage", "V"
);
non_negative_quantity!(
    /// Radiant intensity in arbitrary but consistent units.
    Intensity, "intensity", "a.u."
);
non_negative_quantity!(
    /// Emission coefficient, intensity units per metre.
    EmissionCoeff, "emission coefficient", "a.u./m"
);

impl LengthUm {
    pub fn to_m(self) -> LengthM {
        LengthM(self.0 * 1e-6)
    }
}

impl LengthM {
    pub fn to_um(self) -> LengthUm {
        LengthUm(self.0 * 1e6)
    }
}

impl From<PowerMw> for Intensity {
    fn from(p: PowerMw) -> Self {
        Intensity(p.0)
    }
}

impl From<Intensity> for PowerMw {
    fn from(i: Intensity) -> Self {
        PowerMw(i.0)
    }
}

impl PowerMw {
    pub fn scale(self, ratio: TransmittanceRatio) -> PowerMw {
        PowerMw(self.0 * ratio.0)
    }

    /// Output/input ratio `self / reference`.
    pub fn ratio_to(self, reference: PowerMw) -> Result<TransmittanceRatio> {
        TransmittanceRatio::new(self.0 / reference.0)
    }
}

/// Wavelength in nanometres, restricted to the visible band.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct WavelengthNm(f64);

impl WavelengthNm {
    pub const VISIBLE: (f64, f64) = (380.0, 780.0);

    pub fn new(nm: f64) -> Result<Self> {
        let (lo, hi) = Self::VISIBLE;
        if !nm.is_finite() || !(lo..=hi).contains(&nm) {
            return Err(Error::domain(
                "wavelength",
                format!("{nm} nm is outside the visible band [{lo}, {hi}] nm"),
            ));
        }
        Ok(Self(nm))
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn to_um(self) -> f64 {
        self.0 * 1e-3
    }
}

/// Temperature in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct TemperatureC(f64);

impl TemperatureC {
    pub fn new(celsius: f64) -> Result<Self> {
        if !celsius.is_finite() {
            return Err(Error::domain("temperature", "not finite"));
        }
        Ok(Self(celsius))
    }

    pub const fn value(self) -> f64 {
        self.0
    }
}

/// Concentration in weight percent, 0..=100.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ConcentrationWtPct(f64);

impl ConcentrationWtPct {
    pub const ZERO: Self = Self(0.0);

    pub fn new(pct: f64) -> Result<Self> {
        if !pct.is_finite() || !(0.0..=100.0).contains(&pct) {
            return Err(Error::domain(
                "concentration",
                format!("{pct} wt% is outside [0, 100]"),
            ));
        }
        Ok(Self(pct))
    }

    pub const fn value(self) -> f64 {
        self.0
    }
}

/// Power ratio in decibels. May be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct GainDb(f64);

impl GainDb {
    pub const UNIT: &'static str = "dB";

    pub fn new(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::domain("gain", format!("{db} dB is not finite")));
        }
        Ok(Self(db))
    }

    pub const fn value(self) -> f64 {
        self.0
    }
}

/// Dimensionless output/input power ratio. Values above 1 mean amplification.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct TransmittanceRatio(f64);

impl TransmittanceRatio {
    pub const UNITY: Self = Self(1.0);
    pub const UNIT: &'static str = "ratio";

    pub fn new(ratio: f64) -> Result<Self> {
        if !ratio.is_finite() || ratio <= 0.0 {
            return Err(Error::domain(
                "transmittance",
                format!("{ratio} must be a positive finite ratio"),
            ));
        }
        Ok(Self(ratio))
    }

    pub fn from_percent(pct: f64) -> Result<Self> {
        Self::new(pct / 100.0)
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn is_amplifying(self) -> bool {
        self.0 > 1.0
    }
}

impl std::ops::Mul for TransmittanceRatio {
    type Output = TransmittanceRatio;

    fn mul(self, rhs: Self) -> Self {
        TransmittanceRatio(self.0 * rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AttenuationUnit {
    /// Decibels per metre.
    #[serde(rename = "dB/m")]
    DbPerM,
    /// Natural (nepers-style) coefficient, 1/m.
    #[serde(rename = "1/m")]
    PerM,
}

impl AttenuationUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            AttenuationUnit::DbPerM => "dB/m",
            AttenuationUnit::PerM => "1/m",
        }
    }
}

/// dB/m per natural 1/m: 10 / ln 10.
pub const DB_PER_NATURAL: f64 = 10.0 / LN_10;

/// Non-negative attenuation coefficient of a lossy medium, tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttenuationCoeff {
    value: f64,
    unit: AttenuationUnit,
}

impl AttenuationCoeff {
    pub fn new(value: f64, unit: AttenuationUnit) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::domain(
                "attenuation",
                format!("{value} {} must be finite and non-negative", unit.as_str()),
            ));
        }
        Ok(Self {
            value: value + 0.0,
            unit,
        })
    }

    pub fn db_per_m(value: f64) -> Result<Self> {
        Self::new(value, AttenuationUnit::DbPerM)
    }

    pub fn per_m(value: f64) -> Result<Self> {
        Self::new(value, AttenuationUnit::PerM)
    }

    /// Build from a per-centimetre natural coefficient.
    pub fn per_cm(value: f64) -> Result<Self> {
        Self::new(value * 100.0, AttenuationUnit::PerM)
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn unit(self) -> AttenuationUnit {
        self.unit
    }

    /// Natural coefficient in 1/m.
    pub fn natural(self) -> f64 {
        convert_attenuation(self, AttenuationUnit::PerM).value
    }

    pub fn in_db_per_m(self) -> f64 {
        convert_attenuation(self, AttenuationUnit::DbPerM).value
    }
}

pub fn db_to_ratio(gain: GainDb) -> TransmittanceRatio {
    TransmittanceRatio(10f64.powf(gain.0 / 10.0))
}

pub fn ratio_to_db(ratio: TransmittanceRatio) -> GainDb {
    GainDb(10.0 * ratio.0.log10())
}

/// Ratio-to-dB on a raw value, rejecting non-positive input.
pub fn try_ratio_to_db(ratio: f64) -> Result<GainDb> {
    Ok(ratio_to_db(TransmittanceRatio::new(ratio)?))
}

pub fn convert_attenuation(a: AttenuationCoeff, target: AttenuationUnit) -> AttenuationCoeff {
    let value = match (a.unit, target) {
        (AttenuationUnit::DbPerM, AttenuationUnit::DbPerM)
        | (AttenuationUnit::PerM, AttenuationUnit::PerM) => a.value,
        (AttenuationUnit::PerM, AttenuationUnit::DbPerM) => a.value * DB_PER_NATURAL,
        (AttenuationUnit::DbPerM, AttenuationUnit::PerM) => a.value / DB_PER_NATURAL,
    };
    AttenuationCoeff {
        value,
        unit: target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn db_to_ratio_examples() {
        assert_eq!(db_to_ratio(GainDb::new(0.0).unwrap()).value(), 1.0);
        // 10^0.00009 and 10^0.3 evaluated independently
        let r = db_to_ratio(GainDb::new(0.0009).unwrap()).value();
        assert!(close(r, 1.000_207_254_133, 1e-12), "{r}");
        let r = db_to_ratio(GainDb::new(3.0).unwrap()).value();
        assert!(close(r, 1.995_262_315, 1e-9), "{r}");
    }

    #[test]
    fn ratio_to_db_examples() {
        assert_eq!(ratio_to_db(TransmittanceRatio::UNITY).value(), 0.0);
        let g = try_ratio_to_db(6.0012 / 6.0).unwrap().value();
        assert!(close(g, 0.000_868_502_116, 1e-8), "{g}");
        assert!((g - 0.0009).abs() < 5e-5);
        let g = try_ratio_to_db(6.0391 / 6.0).unwrap().value();
        assert!(close(g, 0.028_209_706_6, 1e-8), "{g}");
    }

    #[test]
    fn ratio_to_db_rejects_non_positive() {
        assert!(try_ratio_to_db(0.0).is_err());
        assert!(try_ratio_to_db(-1.0).is_err());
        assert!(TransmittanceRatio::new(f64::NAN).is_err());
    }

    #[test]
    fn attenuation_examples() {
        let zero = AttenuationCoeff::db_per_m(0.0).unwrap();
        assert_eq!(
            convert_attenuation(zero, AttenuationUnit::PerM).value(),
            0.0
        );

        let air = AttenuationCoeff::db_per_m(0.0043).unwrap();
        let nat = convert_attenuation(air, AttenuationUnit::PerM).value();
        assert!(close(nat, 9.901e-4, 1e-3), "{nat}");

        let gain_medium = AttenuationCoeff::per_cm(1200.0).unwrap();
        assert_eq!(gain_medium.value(), 120_000.0);
        let db = gain_medium.in_db_per_m();
        assert!(close(db, 521_153.378_28, 1e-9), "{db}");
    }

    #[test]
    fn invariants_enforced() {
        assert!(PowerMw::new(-1e-9).is_err());
        assert!(PowerMw::new(f64::INFINITY).is_err());
        assert!(FieldVPerUm::new(-0.1).is_err());
        assert!(WavelengthNm::new(300.0).is_err());
        assert!(WavelengthNm::new(450.0).is_ok());
        assert!(ConcentrationWtPct::new(101.0).is_err());
        assert!(AttenuationCoeff::db_per_m(-0.1).is_err());
        assert!(GainDb::new(-3.0).is_ok());
        assert_eq!(
            PowerMw::new(-0.0).unwrap().value().to_bits(),
            0f64.to_bits()
        );
    }

    proptest! {
        #[test]
        fn db_round_trip(log_r in -6.0f64..6.0) {
            let r = TransmittanceRatio::new(10f64.powf(log_r)).unwrap();
            let back = db_to_ratio(ratio_to_db(r)).value();
            prop_assert!(close(back, r.value(), 1e-12));
        }

        #[test]
        fn db_of_product_is_sum(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let ra = TransmittanceRatio::new(a).unwrap();
            let rb = TransmittanceRatio::new(b).unwrap();
            let lhs = ratio_to_db(ra * rb).value();
            let rhs = ratio_to_db(ra).value() + ratio_to_db(rb).value();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn attenuation_round_trip(v in 0.0f64..1e6, db in proptest::bool::ANY) {
            let unit = if db { AttenuationUnit::DbPerM } else { AttenuationUnit::PerM };
            let other = if db { AttenuationUnit::PerM } else { AttenuationUnit::DbPerM };
            let a = AttenuationCoeff::new(v, unit).unwrap();
            let back = convert_attenuation(convert_attenuation(a, other), unit);
            prop_assert_eq!(back.unit(), unit);
            prop_assert!((back.value() - v).abs() <= 1e-12 * v);
        }
    }
}
