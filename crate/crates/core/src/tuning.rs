//! Fitting and optimisation over the device and link models.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::link_budget::range_extension;
use crate::quantities::{AttenuationCoeff, FieldVPerUm, GainDb, LengthM, PowerMw};
use crate::ris_device::{transmittance_at, RisDevice};

/// Reference power of the measurement table.
pub const TABLE_REFERENCE_MW: f64 = 6.0;

/// Bisection stops once the bracket is narrower than this (V/µm).
pub const FIELD_RESOLUTION: f64 = 1e-4;

/// One column of the measurement table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub mixture: String,
    pub e0: FieldVPerUm,
    pub p_e: PowerMw,
    pub listed_gain: GainDb,
    pub listed_range: LengthM,
}

/// Per-row `ζ_i = 10·log10(P_e/6) / l`, skipping rows with zero range or no gain.
pub fn per_row_attenuation(rows: &[Table1Row]) -> Vec<f64> {
    per_row_attenuation_ref(rows, TABLE_REFERENCE_MW)
}

fn per_row_attenuation_ref(rows: &[Table1Row], p_ref: f64) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.listed_range.value() > 0.0 && r.p_e.value() > p_ref)
        .map(|r| 10.0 * (r.p_e.value() / p_ref).log10() / r.listed_range.value())
        .collect()
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

/// Median of the per-row attenuation estimates, in dB/m.
pub fn fit_air_attenuation(rows: &[Table1Row]) -> Result<AttenuationCoeff> {
    fit_air_attenuation_ref(rows, PowerMw::new(TABLE_REFERENCE_MW)?)
}

/// As [`fit_air_attenuation`] for rows measured against another input power.
pub fn fit_air_attenuation_ref(rows: &[Table1Row], p_ref: PowerMw) -> Result<AttenuationCoeff> {
    if p_ref.value() <= 0.0 {
        return Err(Error::domain("reference power", "must be positive"));
    }
    let estimates = per_row_attenuation_ref(rows, p_ref.value());
    let zeta = median(estimates).ok_or_else(|| {
        Error::Fit(format!(
            "none of the {} rows has a positive listed range and P_e above {} mW",
            rows.len(),
            p_ref.value()
        ))
    })?;
    AttenuationCoeff::db_per_m(zeta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldTuning {
    /// Smallest tabulated field meeting the target.
    pub knot_field: FieldVPerUm,
    /// Smallest interpolated field meeting the target, within [`FIELD_RESOLUTION`].
    pub refined_field: FieldVPerUm,
    /// Range reached at `refined_field`.
    pub range: LengthM,
}

/// Negative when the device attenuates, so it still orders correctly.
fn signed_range_at(device: &RisDevice, e0: f64, zeta_db: f64) -> Result<f64> {
    let t = transmittance_at(&device.curve, FieldVPerUm::new(e0)?)?;
    Ok(10.0 / zeta_db * t.value().log10())
}

/// Smallest field whose range extension reaches `target`.
///
/// The knot grid is scanned first; since the interpolant is linear within a
/// segment, the first feasible point lies in the segment ending at the first
/// feasible knot, and bisection there finds it.
pub fn min_field_for_range(
    device: &RisDevice,
    target: LengthM,
    zeta: AttenuationCoeff,
    p_ref: PowerMw,
) -> Result<FieldTuning> {
    if zeta.value() <= 0.0 {
        return Err(Error::domain("air attenuation", "must be positive"));
    }
    if p_ref.value() <= 0.0 {
        return Err(Error::domain("reference power", "must be positive"));
    }
    let zeta_db = zeta.in_db_per_m();
    let goal = target.value();
    let knots: Vec<(f64, f64)> = device
        .curve
        .points()
        .map(|(e0, t)| (e0, 10.0 / zeta_db * t.value().log10()))
        .collect();

    let Some(hit) = knots.iter().position(|&(_, l)| l >= goal) else {
        let (best_field, best) =
            knots
                .iter()
                .copied()
                .fold((f64::NAN, f64::NEG_INFINITY), |acc, k| {
                    if k.1 > acc.1 {
                        k
                    } else {
                        acc
                    }
                });
        return Err(Error::Infeasible {
            target_m: goal,
            best_m: best,
            best_field_v_per_um: best_field,
        });
    };

    let knot_field = knots[hit].0;
    let refined = if hit == 0 {
        knot_field
    } else {
        let (mut lo, mut hi) = (knots[hit - 1].0, knot_field);
        while hi - lo > FIELD_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if signed_range_at(device, mid, zeta_db)? >= goal {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let refined_field = FieldVPerUm::new(refined)?;
    let p_e = p_ref.scale(transmittance_at(&device.curve, refined_field)?);
    Ok(FieldTuning {
        knot_field: FieldVPerUm::new(knot_field)?,
        refined_field,
        range: range_extension(p_e, p_ref, zeta)?,
    })
}

/// Knot field with the highest transmittance; ties go to the smallest field.
pub fn peak_gain_field(device: &RisDevice) -> FieldVPerUm {
    let mut best: Option<(f64, f64)> = None;
    for (e0, t) in device.curve.points() {
        match best {
            Some((_, bt)) if t.value() <= bt => {}
            _ => best = Some((e0, t.value())),
        }
    }
    let (e0, _) = best.expect("curves have at least one knot");
    FieldVPerUm::new(e0).expect("knot fields are validated")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub gain_db: f64,
    pub range_rel: f64,
    /// Absolute floor for short ranges, m.
    pub range_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gain_db: 1e-4,
            range_rel: 0.03,
            range_abs: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mismatch {
    GainMismatch,
    RangeMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowCheck {
    pub mixture: String,
    pub e0: FieldVPerUm,
    pub recomputed_gain_db: f64,
    pub recomputed_range_m: f64,
    pub gain_abs_dev_db: f64,
    pub range_abs_dev_m: f64,
    /// Relative to the listed range; `None` when the listed range is 0.
    pub range_rel_dev: Option<f64>,
    pub flags: Vec<Mismatch>,
}

impl RowCheck {
    pub fn has(&self, flag: Mismatch) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub zeta_db_per_m: f64,
    pub tolerances: Tolerances,
    pub rows: Vec<RowCheck>,
}

impl ConsistencyReport {
    pub fn count(&self, flag: Mismatch) -> usize {
        self.rows.iter().filter(|r| r.has(flag)).count()
    }
}

/// Recompute gain and range for every row and flag deviations beyond `tol`.
pub fn validate_table(
    rows: &[Table1Row],
    zeta: AttenuationCoeff,
    tol: Tolerances,
) -> Result<ConsistencyReport> {
    if zeta.value() <= 0.0 {
        return Err(Error::domain("air attenuation", "must be positive"));
    }
    let zeta_db = zeta.in_db_per_m();
    let checks = rows
        .iter()
        .map(|r| {
            let gain = 10.0 * (r.p_e.value() / TABLE_REFERENCE_MW).log10();
            let range = gain / zeta_db;
            let listed = r.listed_range.value();
            let gain_dev = (gain - r.listed_gain.value()).abs();
            let range_dev = (range - listed).abs();
            let mut flags = Vec::new();
            if gain_dev > tol.gain_db {
                flags.push(Mismatch::GainMismatch);
            }
            if range_dev > (tol.range_rel * listed).max(tol.range_abs) {
                flags.push(Mismatch::RangeMismatch);
            }
            RowCheck {
                mixture: r.mixture.clone(),
                e0: r.e0,
                recomputed_gain_db: gain,
                recomputed_range_m: range,
                gain_abs_dev_db: gain_dev,
                range_abs_dev_m: range_dev,
                range_rel_dev: (listed > 0.0).then(|| range_dev / listed),
                flags,
            }
        })
        .collect();
    Ok(ConsistencyReport {
        zeta_db_per_m: zeta_db,
        tolerances: tol,
        rows: checks,
    })
}
