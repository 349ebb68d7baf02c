//! One-dimensional radiative transfer along a path:
//!
//! ```text
//! dI/dx = -α(x)·I + ε(x)
//! ```
//!
//! Scattering is folded into α. A negative α describes a population-inverted
//! (gain) medium. With ε = 0 the solution is Beer-Lambert.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{KnotError, Knots};
use crate::quantities::{AttenuationCoeff, EmissionCoeff, Intensity, LengthM};

/// Below this |α·x| the emission term uses its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-8;

/// Default step count for [`rte_integrate`].
pub const DEFAULT_STEPS: usize = 1000;

/// Signed absorption coefficient in 1/m. Negative means gain.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct AbsorptionCoeff(f64);

impl AbsorptionCoeff {
    pub fn per_m(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::domain(
                "absorption",
                format!("{value} /m is not finite"),
            ));
        }
        Ok(Self(value))
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn is_gain(self) -> bool {
        self.0 < 0.0
    }
}

impl From<AttenuationCoeff> for AbsorptionCoeff {
    fn from(a: AttenuationCoeff) -> Self {
        Self(a.natural())
    }
}

/// Exponential gain coefficient Γ (1/m) of an amplifying medium, Γ > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct GainCoefficient(f64);

impl GainCoefficient {
    pub fn per_m(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::domain(
                "gain coefficient",
                format!("{value} /m is not positive; use rte_constant for lossy media"),
            ));
        }
        Ok(Self(value))
    }

    pub fn per_cm(value: f64) -> Result<Self> {
        Self::per_m(value * 100.0)
    }

    /// Γ = −α when the medium is inverted, `None` otherwise.
    pub fn from_absorption(alpha: AbsorptionCoeff) -> Option<Self> {
        alpha.is_gain().then_some(Self(-alpha.0))
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    pub fn as_absorption(self) -> AbsorptionCoeff {
        AbsorptionCoeff(-self.0)
    }
}

/// A depth-sampled coefficient, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    knots: Knots,
}

impl Profile {
    /// `depths_m` must be strictly increasing; every value finite.
    pub fn new(depths_m: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let knots = Knots::new(depths_m, values).map_err(|e| {
            let msg = match e {
                KnotError::Empty => "no samples".to_string(),
                KnotError::LengthMismatch => "depth and value counts differ".to_string(),
                KnotError::NonFinite { index } => format!("sample {index} is not finite"),
                KnotError::NotIncreasing { index } => {
                    format!("depth grid not strictly increasing at sample {index}")
                }
            };
            Error::domain("profile", msg)
        })?;
        Ok(Self { knots })
    }

    /// Sample `f` on `n + 1` evenly spaced depths over `[0, depth_m]`.
    pub fn sampled(depth_m: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = n.max(1);
        let xs: Vec<f64> = (0..=n).map(|i| depth_m * i as f64 / n as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.knots.domain()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    Sampled(Profile),
}

impl Coefficient {
    fn at(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            // covered range is checked before integration; clamp guards the
            // last-ulp overshoot of x + h at the far end
            Coefficient::Sampled(p) => {
                let (lo, hi) = p.domain();
                p.knots.eval(x.clamp(lo, hi)).unwrap_or(f64::NAN)
            }
        }
    }

    fn covers(&self, x_end: f64) -> bool {
        match self {
            Coefficient::Constant(_) => true,
            Coefficient::Sampled(p) => {
                let (lo, hi) = p.domain();
                lo <= 0.0 && hi >= x_end
            }
        }
    }
}

/// Absorption α(x) in 1/m (signed) and emission ε(x) in intensity/m.
#[derive(Debug, Clone, PartialEq)]
pub struct RteCoefficients {
    pub absorption: Coefficient,
    pub emission: Coefficient,
}

impl RteCoefficients {
    pub fn constant(alpha: AbsorptionCoeff, eps: EmissionCoeff) -> Self {
        Self {
            absorption: Coefficient::Constant(alpha.value()),
            emission: Coefficient::Constant(eps.value()),
        }
    }
}

fn finite_intensity(value: f64) -> Result<Intensity> {
    if !value.is_finite() {
        return Err(Error::domain("intensity", "solution overflowed"));
    }
    Intensity::new(value.max(0.0))
}

/// `i0·exp(−ζ·l)` through a lossy medium.
pub fn beer_lambert(i0: Intensity, zeta: AttenuationCoeff, l: LengthM) -> Intensity {
    // all three are non-negative by construction, so the result is in [0, i0]
    let out = i0.value() * (-zeta.natural() * l.value()).exp();
    Intensity::new(out).expect("beer-lambert output lies in [0, i0]")
}

/// Closed-form solution for constant coefficients.
///
/// Written as `i0·e^{−αx} + ε·x·φ(αx)` with `φ(z) = (1 − e^{−z})/z`, which is
/// the same as `S + (i0 − S)·e^{−αx}` with `S = ε/α` but has no α → 0 pole.
pub fn rte_constant(
    i0: Intensity,
    alpha: AbsorptionCoeff,
    eps: EmissionCoeff,
    x: LengthM,
) -> Result<Intensity> {
    let ax = alpha.value() * x.value();
    let homogeneous = i0.value() * (-alpha.value() * x.value()).exp();
    let phi = if ax.abs() < SERIES_THRESHOLD {
        1.0 - 0.5 * ax
    } else {
        -(-ax).exp_m1() / ax
    };
    finite_intensity(homogeneous + eps.value() * x.value() * phi)
}

/// Classical fixed-step RK4 integration of the transfer equation over
/// `[0, x_end]`.
pub fn rte_integrate(
    i0: Intensity,
    coeffs: &RteCoefficients,
    x_end: LengthM,
    steps: usize,
) -> Result<Intensity> {
    if steps == 0 {
        return Err(Error::domain("steps", "at least one step is required"));
    }
    let x_end = x_end.value();
    for (name, c) in [
        ("absorption", &coeffs.absorption),
        ("emission", &coeffs.emission),
    ] {
        if !c.covers(x_end) {
            return Err(Error::domain(
                "profile",
                format!("{name} profile does not cover [0, {x_end}] m"),
            ));
        }
    }

    let rhs = |x: f64, i: f64| -coeffs.absorption.at(x) * i + coeffs.emission.at(x);
    let h = x_end / steps as f64;
    let mut i = i0.value();
    for k in 0..steps {
        let x = k as f64 * h;
        let k1 = rhs(x, i);
        let k2 = rhs(x + 0.5 * h, i + 0.5 * h * k1);
        let k3 = rhs(x + 0.5 * h, i + 0.5 * h * k2);
        let k4 = rhs(x + h, i + h * k3);
        i += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    finite_intensity(i)
}

/// Output of a pure gain medium, `i0·exp(Γ·x)`.
pub fn gain_medium_output(i0: Intensity, gamma: GainCoefficient, x: LengthM) -> Result<Intensity> {
    rte_constant(i0, gamma.as_absorption(), EmissionCoeff::new(0.0)?, x)
}

/// Two-level populations for the cross-section absorption model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelPopulation {
    /// Lower-level number density, 1/m³.
    pub lower_density: f64,
    /// Upper-level number density, 1/m³.
    pub upper_density: f64,
    pub lower_degeneracy: f64,
    pub upper_degeneracy: f64,
}

/// `α = σ·(n1 − (g1/g2)·n2)`; negative under population inversion.
pub fn effective_absorption(
    pop: TwoLevelPopulation,
    cross_section_m2: f64,
) -> Result<AbsorptionCoeff> {
    let TwoLevelPopulation {
        lower_density: n1,
        upper_density: n2,
        lower_degeneracy: g1,
        upper_degeneracy: g2,
    } = pop;
    if !(cross_section_m2.is_finite() && cross_section_m2 > 0.0) {
        return Err(Error::domain("cross section", "must be positive"));
    }
    if !(g1 >= 1.0 && g2 >= 1.0 && g1.is_finite() && g2.is_finite()) {
        return Err(Error::domain("degeneracy", "must be >= 1"));
    }
    if !(n1 >= 0.0 && n2 >= 0.0 && n1.is_finite() && n2.is_finite()) {
        return Err(Error::domain(
            "population",
            "densities must be finite and >= 0",
        ));
    }
    AbsorptionCoeff::per_m(cross_section_m2 * (n1 - (g1 / g2) * n2))
}
