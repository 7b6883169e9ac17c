//! Closed-form spectra, counterdiabatic costs and ground-state Bures angles of
//! the critical models.
//!
//! Every model reduces to one or more independent two-level problems
//! `H = h_z σ_z + h_x σ_x` (Landau-Zener, the momentum modes of the
//! transverse-field Ising chain) or to a single squeezed oscillator (the
//! effective Lipkin-Meshkov-Glick model in its symmetric phase). The
//! `Synthetic` model is the bare critical form `ε ∝ |g|^{zν}` with `g_c = 0`.
//!
//! Energies and rates are in units of `ω`. For the Landau-Zener model `Δ` and
//! `g` are themselves quoted in units of `ω`, so `ω` does not enter its formulas.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn default_omega() -> f64 {
    1.0
}

fn default_spacing() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub model: ModelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    LandauZener {
        delta: f64,
    },
    /// A single momentum mode `k_n = (2n − 1)π/(N b)` of the Ising chain.
    TfimMode {
        spins: usize,
        mode: usize,
        #[serde(default = "default_spacing")]
        spacing: f64,
        #[serde(default = "default_true")]
        include_shift: bool,
    },
    /// The full chain: all `N/2` positive momentum modes.
    TfimAggregate {
        spins: usize,
        #[serde(default = "default_spacing")]
        spacing: f64,
        #[serde(default = "default_true")]
        include_shift: bool,
        /// Apply one `−2ωg` shift to the whole chain instead of one per mode.
        #[serde(default)]
        single_shift: bool,
    },
    LmgEffective,
    Synthetic {
        z_nu: f64,
    },
}

/// Which spectral quantity enters the numerator of the speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyConvention {
    /// Instantaneous ground-state energy `ε_0`.
    #[default]
    GroundState,
    /// Excitation gap `ε_1 − ε_0`.
    Gap,
}

impl ModelParams {
    pub fn new(omega: f64, model: ModelKind) -> Result<Self> {
        let params = Self { omega, model };
        params.validate()?;
        Ok(params)
    }

    pub fn landau_zener(delta: f64) -> Result<Self> {
        Self::new(1.0, ModelKind::LandauZener { delta })
    }

    pub fn tfim_mode(spins: usize, mode: usize, include_shift: bool) -> Result<Self> {
        Self::new(
            1.0,
            ModelKind::TfimMode {
                spins,
                mode,
                spacing: 1.0,
                include_shift,
            },
        )
    }

    pub fn tfim_aggregate(spins: usize, include_shift: bool) -> Result<Self> {
        Self::new(
            1.0,
            ModelKind::TfimAggregate {
                spins,
                spacing: 1.0,
                include_shift,
                single_shift: false,
            },
        )
    }

    pub fn lmg() -> Self {
        Self {
            omega: 1.0,
            model: ModelKind::LmgEffective,
        }
    }

    pub fn synthetic(z_nu: f64) -> Result<Self> {
        Self::new(1.0, ModelKind::Synthetic { z_nu })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::domain(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        match self.model {
            ModelKind::LandauZener { delta } => {
                if !(delta.is_finite() && delta > 0.0) {
                    return Err(Error::domain(format!(
                        "delta must be positive, got {delta}"
                    )));
                }
            }
            ModelKind::TfimMode {
                spins,
                mode,
                spacing,
                ..
            } => {
                check_chain(spins, spacing)?;
                if mode == 0 || mode > spins / 2 {
                    return Err(Error::domain(format!(
                        "mode index {mode} outside 1..={}",
                        spins / 2
                    )));
                }
            }
            ModelKind::TfimAggregate { spins, spacing, .. } => check_chain(spins, spacing)?,
            ModelKind::LmgEffective => {}
            ModelKind::Synthetic { z_nu } => {
                if !(z_nu.is_finite() && z_nu > 0.0) {
                    return Err(Error::domain(format!("z_nu must be positive, got {z_nu}")));
                }
            }
        }
        Ok(())
    }

    /// Location `g_c` of the critical point (avoided crossing for LZ).
    pub fn critical_point(&self) -> f64 {
        match self.model {
            ModelKind::LandauZener { .. } | ModelKind::Synthetic { .. } => 0.0,
            ModelKind::TfimMode { .. }
            | ModelKind::TfimAggregate { .. }
            | ModelKind::LmgEffective => 1.0,
        }
    }

    /// `k_n b` of every mode the model carries.
    fn mode_phases(&self) -> Vec<f64> {
        match self.model {
            ModelKind::TfimMode { spins, mode, .. } => vec![mode_phase(spins, mode)],
            ModelKind::TfimAggregate { spins, .. } => {
                (1..=spins / 2).map(|n| mode_phase(spins, n)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Momentum `k_n` of a single TFIM mode.
    pub fn wavenumber(&self) -> Option<f64> {
        match self.model {
            ModelKind::TfimMode {
                spins,
                mode,
                spacing,
                ..
            } => Some(mode_phase(spins, mode) / spacing),
            _ => None,
        }
    }

    pub fn ground_energy(&self, convention: EnergyConvention, g: f64) -> Result<f64> {
        let omega = self.omega;
        match self.model {
            ModelKind::LandauZener { delta } => {
                let e = delta.hypot(g);
                Ok(match convention {
                    EnergyConvention::GroundState => -e,
                    EnergyConvention::Gap => 2.0 * e,
                })
            }
            ModelKind::TfimMode { include_shift, .. } => {
                let kb = self.mode_phases()[0];
                Ok(tfim_mode_energy(omega, kb, g, convention, include_shift))
            }
            ModelKind::TfimAggregate {
                include_shift,
                single_shift,
                ..
            } => {
                let per_mode_shift = include_shift && !single_shift;
                let sum: f64 = self
                    .mode_phases()
                    .into_iter()
                    .map(|kb| tfim_mode_energy(omega, kb, g, convention, per_mode_shift))
                    .sum();
                if convention == EnergyConvention::GroundState && include_shift && single_shift {
                    Ok(sum - 2.0 * omega * g)
                } else {
                    Ok(sum)
                }
            }
            ModelKind::LmgEffective => {
                let w = lmg_effective_frequency(omega, g)?;
                Ok(match convention {
                    EnergyConvention::GroundState => 0.5 * w,
                    EnergyConvention::Gap => w,
                })
            }
            ModelKind::Synthetic { z_nu } => Ok(g.abs().powf(z_nu)),
        }
    }

    /// Counterdiabatic cost rate `∂ₜC` at field `g` driven with rate `ġ`.
    pub fn cd_cost_rate(&self, g: f64, gdot: f64) -> Result<f64> {
        if !gdot.is_finite() {
            return Err(Error::InfiniteRate(format!("drive rate {gdot}")));
        }
        match self.model {
            ModelKind::LandauZener { delta } => Ok((gdot * delta).abs() / (delta * delta + g * g)),
            ModelKind::TfimMode { .. } | ModelKind::TfimAggregate { .. } => Ok(self
                .mode_phases()
                .into_iter()
                .map(|kb| tfim_mode_cost(kb, g, gdot))
                .sum()),
            ModelKind::LmgEffective => {
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::domain(format!(
                        "effective LMG model requires 0 <= g <= 1, got {g}"
                    )));
                }
                if g == 1.0 {
                    if gdot == 0.0 {
                        return Ok(0.0);
                    }
                    return Err(Error::InfiniteRate("LMG cost diverges at g = 1".into()));
                }
                // |ω̇_t| / (√8 ω_t) with ω̇_t = −ω g ġ / √(1 − g²).
                Ok((g * gdot).abs() / (8f64.sqrt() * (1.0 - g) * (1.0 + g)))
            }
            ModelKind::Synthetic { z_nu } => {
                if g == 0.0 {
                    return Err(Error::InfiniteRate(
                        "synthetic cost diverges at g = 0".into(),
                    ));
                }
                Ok(z_nu * gdot.abs() / g.abs())
            }
        }
    }

    /// Bures angle `arccos |⟨ψ_gs(g_ref)|ψ_gs(g)⟩|` between two ground states.
    ///
    /// Not defined for the synthetic model, whose speed denominator is fixed.
    pub fn bures_angle(&self, g_ref: f64, g: f64) -> Result<f64> {
        match self.model {
            ModelKind::LandauZener { delta } => {
                let overlap = (two_level_angle(g, delta) - two_level_angle(g_ref, delta)).cos();
                Ok(angle_from_overlap(overlap))
            }
            ModelKind::TfimMode { .. } | ModelKind::TfimAggregate { .. } => {
                let overlap: f64 = self.tfim_mode_overlaps(g_ref, g).iter().product();
                Ok(angle_from_overlap(overlap))
            }
            ModelKind::LmgEffective => {
                for x in [g_ref, g] {
                    if !(0.0..1.0).contains(&x) {
                        return Err(Error::domain(format!(
                            "LMG Bures angle requires 0 <= g < 1, got {x}"
                        )));
                    }
                }
                let w_ref = lmg_effective_frequency(self.omega, g_ref)?;
                let w = lmg_effective_frequency(self.omega, g)?;
                let fidelity = (2.0 * (w_ref * w).sqrt() / (w_ref + w)).sqrt();
                Ok(angle_from_overlap(fidelity))
            }
            ModelKind::Synthetic { .. } => Err(Error::domain(
                "the synthetic model has no ground-state overlap",
            )),
        }
    }

    /// Per-mode overlaps `cos(θ_k(g) − θ_k(g_ref))` of a TFIM model.
    pub fn tfim_mode_overlaps(&self, g_ref: f64, g: f64) -> Vec<f64> {
        let omega = self.omega;
        self.mode_phases()
            .into_iter()
            .map(|kb| (tfim_mode_angle(omega, kb, g) - tfim_mode_angle(omega, kb, g_ref)).cos())
            .collect()
    }

    /// Split a TFIM aggregate into its single-mode models.
    pub fn tfim_modes(&self) -> Vec<ModelParams> {
        match self.model {
            ModelKind::TfimAggregate {
                spins,
                spacing,
                include_shift,
                ..
            } => (1..=spins / 2)
                .map(|mode| ModelParams {
                    omega: self.omega,
                    model: ModelKind::TfimMode {
                        spins,
                        mode,
                        spacing,
                        include_shift,
                    },
                })
                .collect(),
            ModelKind::TfimMode { .. } => vec![*self],
            _ => Vec::new(),
        }
    }
}

fn check_chain(spins: usize, spacing: f64) -> Result<()> {
    if spins < 2 || !spins.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "spin count must be even and >= 2, got {spins}"
        )));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::domain(format!(
            "lattice spacing must be positive, got {spacing}"
        )));
    }
    Ok(())
}

/// `k_n b = (2n − 1)π/N`.
pub fn mode_phase(spins: usize, mode: usize) -> f64 {
    (2 * mode - 1) as f64 * PI / spins as f64
}

fn angle_from_overlap(overlap: f64) -> f64 {
    overlap.abs().min(1.0).acos()
}

/// Single-particle dispersion `sqrt(g² + 1 − 2g cos kb)`.
fn dispersion(kb: f64, g: f64) -> f64 {
    (g - kb.cos()).hypot(kb.sin())
}

fn tfim_mode_energy(
    omega: f64,
    kb: f64,
    g: f64,
    convention: EnergyConvention,
    include_shift: bool,
) -> f64 {
    let e = 2.0 * omega * dispersion(kb, g);
    match convention {
        EnergyConvention::GroundState => {
            if include_shift {
                -e - 2.0 * omega * g
            } else {
                -e
            }
        }
        EnergyConvention::Gap => 2.0 * e,
    }
}

fn tfim_mode_cost(kb: f64, g: f64, gdot: f64) -> f64 {
    let d = dispersion(kb, g);
    (gdot * kb.sin()).abs() / (d * d)
}

/// Mixing angle of the ground state `cos θ |0⟩ + sin θ |1⟩` of
/// `h_z σ_z + h_x σ_x` (with `σ_z = |1⟩⟨1| − |0⟩⟨0|`, `h_x > 0`):
/// `θ = arctan((h_z − sqrt(h_z² + h_x²)) / h_x)`.
pub fn two_level_angle(hz: f64, hx: f64) -> f64 {
    let e = hz.hypot(hx);
    let ratio = if hz > 0.0 {
        // h_z − E = −h_x² / (h_z + E), free of cancellation for large h_z.
        -hx / (hz + e)
    } else {
        (hz - e) / hx
    };
    ratio.atan()
}

/// Ground-state mixing angle `θ_k(g)` of TFIM mode `k b = kb`, with
/// `h_z = 2ω(g − cos kb)` and `h_x = 2ω sin kb`.
pub fn tfim_mode_angle(omega: f64, kb: f64, g: f64) -> f64 {
    two_level_angle(2.0 * omega * (g - kb.cos()), 2.0 * omega * kb.sin())
}

/// Effective oscillator frequency `ω_t = ω sqrt(1 − g²)` for `0 <= g <= 1`.
pub fn lmg_effective_frequency(omega: f64, g: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::domain(format!(
            "effective LMG model requires 0 <= g <= 1, got {g}"
        )));
    }
    Ok(omega * ((1.0 - g) * (1.0 + g)).sqrt())
}

/// Pure state of a two-level system in the `σ_z` eigenbasis (`|↑⟩`, `|↓⟩`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl TwoLevelState {
    pub fn new(c0: Complex64, c1: Complex64) -> Self {
        Self { c0, c1 }
    }

    pub fn norm(&self) -> f64 {
        (self.c0.norm_sqr() + self.c1.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            c0: self.c0 / n,
            c1: self.c1 / n,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TwoLevelState) -> Complex64 {
        self.c0.conj() * other.c0 + self.c1.conj() * other.c1
    }

    pub fn fidelity(&self, other: &TwoLevelState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.c0, self.c1]
    }

    pub fn from_array(a: [Complex64; 2]) -> Self {
        Self { c0: a[0], c1: a[1] }
    }
}

/// Ground state of `Δ σ_x + g σ_z`, with a real non-negative first amplitude.
pub fn lz_ground_state(delta: f64, g: f64) -> TwoLevelState {
    // Eigenvector for −E is ∝ (E − g, −Δ); E − g is evaluated without cancellation.
    let e = delta.hypot(g);
    let a = if g <= 0.0 {
        e - g
    } else {
        delta * delta / (e + g)
    };
    let n = a.hypot(delta);
    TwoLevelState::new(Complex64::new(a / n, 0.0), Complex64::new(-delta / n, 0.0))
}

/// Excited state of `Δ σ_x + g σ_z`, orthogonal to [`lz_ground_state`].
pub fn lz_excited_state(delta: f64, g: f64) -> TwoLevelState {
    let gs = lz_ground_state(delta, g);
    TwoLevelState::new(-gs.c1, gs.c0)
}
