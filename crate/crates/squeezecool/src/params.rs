//! Parameter sets for the reduced (single cavity mode + mechanics) model and the
//! drive-scheme configuration.
//!
//! Unit conventions, used everywhere in this crate:
//!
//! * all rates and frequencies are measured in units of the mechanical frequency,
//!   so constructors fix `omega_m = 1`;
//! * the zero-point amplitude is absorbed into the force spectrum, which makes the
//!   cooling/heating rates plain combinations of the parameters below;
//! * the fluctuation vector ordering is (a₁, a₁†, b₁, b₁†) in every matrix.

use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::Result;

/// Parameters of the linearized single-cavity-mode model.
///
/// `kappa` and `gamma` are stored redundantly alongside their defining pieces
/// (`kappa = kappa_ex + kappa_0`, `gamma = omega_m / q_m`); [`ReducedParams::validate`]
/// rejects values that break either identity, and every operation in this crate
/// validates its inputs first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    /// Cavity detuning Δ in the frame rotating at the drive (units of ω_m).
    pub delta: f64,
    /// Mechanical frequency; the unit of every rate. Constructors set 1.
    pub omega_m: f64,
    /// External (input/output port) cavity dissipation κ_ex ≥ 0.
    pub kappa_ex: f64,
    /// Intrinsic cavity dissipation κ₀ ≥ 0.
    pub kappa_0: f64,
    /// Total cavity linewidth κ = κ_ex + κ₀ > 0.
    pub kappa: f64,
    /// Mechanical dissipation γ = ω_m / Q_m > 0.
    pub gamma: f64,
    /// Mechanical quality factor Q_m.
    pub q_m: f64,
    /// Linearized optomechanical coupling G ≥ 0.
    pub g: f64,
    /// Complex χ⁽²⁾ pump amplitude ε = ε_r + iε_i. Zero for the SB and SD schemes.
    pub eps: Complex64,
    /// Ambient thermal phonon occupancy n_th ≥ 0.
    pub n_th: f64,
}

impl ReducedParams {
    /// Builds a parameter set in units of ω_m with no χ⁽²⁾ pump (`eps = 0`).
    ///
    /// Set [`ReducedParams::eps`] afterwards (e.g. to
    /// [`crate::noise::optimal_eps`]) for the intracavity-squeezing scheme.
    pub fn new(
        delta: f64,
        kappa_ex: f64,
        kappa_0: f64,
        g: f64,
        n_th: f64,
        q_m: f64,
    ) -> Result<Self> {
        let omega_m = 1.0;
        let p = ReducedParams {
            delta,
            omega_m,
            kappa_ex,
            kappa_0,
            kappa: kappa_ex + kappa_0,
            gamma: omega_m / q_m,
            q_m,
            g,
            eps: Complex64::new(0.0, 0.0),
            n_th,
        };
        p.validate()?;
        Ok(p)
    }

    /// Copy of `self` with a different pump amplitude.
    pub fn with_eps(mut self, eps: Complex64) -> Self {
        self.eps = eps;
        self
    }

    /// Checks every structural invariant; all operations call this on entry.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta", self.delta),
            ("omega_m", self.omega_m),
            ("kappa_ex", self.kappa_ex),
            ("kappa_0", self.kappa_0),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("q_m", self.q_m),
            ("g", self.g),
            ("eps.re", self.eps.re),
            ("eps.im", self.eps.im),
            ("n_th", self.n_th),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(Error::invalid("omega_m", "must be > 0"));
        }
        if self.kappa_ex < 0.0 || self.kappa_0 < 0.0 {
            return Err(Error::invalid("kappa_ex/kappa_0", "must be >= 0"));
        }
        if self.kappa <= 0.0 {
            return Err(Error::invalid("kappa", "total linewidth must be > 0"));
        }
        let kappa_sum = self.kappa_ex + self.kappa_0;
        if (self.kappa - kappa_sum).abs() > 1e-12 * self.kappa {
            return Err(Error::invalid(
                "kappa",
                format!(
                    "must equal kappa_ex + kappa_0 = {kappa_sum}, got {}",
                    self.kappa
                ),
            ));
        }
        if self.gamma <= 0.0 || self.q_m <= 0.0 {
            return Err(Error::invalid("gamma", "gamma and q_m must be > 0"));
        }
        if (self.gamma * self.q_m - self.omega_m).abs() > 1e-12 * self.omega_m {
            return Err(Error::invalid(
                "gamma",
                format!(
                    "must equal omega_m / q_m = {}, got {}",
                    self.omega_m / self.q_m,
                    self.gamma
                ),
            ));
        }
        if self.g < 0.0 {
            return Err(Error::invalid("g", "coupling must be >= 0"));
        }
        if self.n_th < 0.0 {
            return Err(Error::invalid("n_th", "thermal occupancy must be >= 0"));
        }
        Ok(())
    }

    /// Parametric-oscillation threshold κ²/4 + Δ² for the pump strength 4|ε|².
    pub fn pump_threshold(&self) -> f64 {
        self.kappa * self.kappa / 4.0 + self.delta * self.delta
    }

    /// True when the pump sits strictly below the parametric-oscillation threshold,
    /// i.e. 4|ε|² < κ²/4 + Δ². Above it the optical subsystem alone is unstable.
    pub fn below_parametric_threshold(&self) -> bool {
        4.0 * self.eps.norm_sqr() < self.pump_threshold()
    }
}

/// Drive scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Conventional sideband cooling: coherent drive, vacuum optical input.
    Sb,
    /// Squeezed-vacuum drive through the external port.
    Sd,
    /// Intracavity squeezing from the χ⁽²⁾ pump ε.
    Is,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Sb => "sb",
            SchemeKind::Sd => "sd",
            SchemeKind::Is => "is",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sb" => Ok(SchemeKind::Sb),
            "sd" => Ok(SchemeKind::Sd),
            "is" => Ok(SchemeKind::Is),
            other => Err(Error::invalid(
                "scheme",
                format!("expected one of sb, sd, is; got `{other}`"),
            )),
        }
    }
}

/// Drive-scheme configuration: which scheme, and for SD the input squeezing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Input squeezing magnitude R ≥ 0 (SD only; zero otherwise).
    pub squeeze_r: f64,
    /// Input squeezing phase φ in radians (SD only).
    pub squeeze_phi: f64,
}

impl SchemeConfig {
    /// Conventional sideband cooling.
    pub fn sideband() -> Self {
        SchemeConfig {
            kind: SchemeKind::Sb,
            squeeze_r: 0.0,
            squeeze_phi: 0.0,
        }
    }

    /// Squeezed-vacuum drive with magnitude `r` and phase `phi`.
    pub fn squeezed_drive(r: f64, phi: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::Sd,
            squeeze_r: r,
            squeeze_phi: phi,
        }
    }

    /// Intracavity squeezing; the pump amplitude lives in [`ReducedParams::eps`].
    pub fn intracavity() -> Self {
        SchemeConfig {
            kind: SchemeKind::Is,
            squeeze_r: 0.0,
            squeeze_phi: 0.0,
        }
    }

    /// Structural checks on the scheme configuration alone.
    pub fn validate(&self) -> Result<()> {
        if !self.squeeze_r.is_finite() || !self.squeeze_phi.is_finite() {
            return Err(Error::invalid("squeeze_r/squeeze_phi", "must be finite"));
        }
        if self.squeeze_r < 0.0 {
            return Err(Error::invalid("squeeze_r", "must be >= 0"));
        }
        match self.kind {
            SchemeKind::Sb | SchemeKind::Is if self.squeeze_r != 0.0 => Err(Error::invalid(
                "squeeze_r",
                format!("must be 0 for scheme `{}`", self.kind),
            )),
            _ => Ok(()),
        }
    }

    /// Cross-checks the scheme against a parameter set: only the IS scheme may carry
    /// a nonzero pump ε.
    pub fn validate_with(&self, p: &ReducedParams) -> Result<()> {
        self.validate()?;
        p.validate()?;
        match self.kind {
            SchemeKind::Sb | SchemeKind::Sd if p.eps.norm_sqr() != 0.0 => Err(Error::invalid(
                "eps",
                format!("must be 0 for scheme `{}`, got {}", self.kind, p.eps),
            )),
            _ => Ok(()),
        }
    }
}
