//! Spectral densities of the three environments and the Bose occupation.
//!
//! All functions take and return cm⁻¹. They are evaluated on demand; only a
//! handful of discrete eigenvalue gaps are ever sampled.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{units, EmSpectralShape, ModelParams};

/// Underdamped Brownian (Drude–Lorentz-type) phonon spectral density
/// J(ν) = α ν₀² γ ν / [(ν² − ν₀²)² + γ²ν²]. Odd in ν.
pub fn phonon_sd(nu: f64, p: &ModelParams) -> f64 {
    let nu0_sq = p.nu0 * p.nu0;
    let detune = nu * nu - nu0_sq;
    p.alpha * nu0_sq * p.gamma * nu / (detune * detune + p.gamma * p.gamma * nu * nu)
}

/// Ohmic residual-bath spectral density J_R(ν) = γν / 2πν₀. Odd in ν.
pub fn residual_sd(nu: f64, p: &ModelParams) -> f64 {
    p.gamma * nu / (2.0 * PI * p.nu0)
}

/// Electromagnetic spectral density, zero for ω ≤ 0.
///
/// The cubic form is 𝒥(ω) = Γ₀ω³ / (2πε³), so 𝒥(ε) = Γ₀/2π.
pub fn em_sd(omega: f64, p: &ModelParams, shape: EmSpectralShape) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let j0 = p.gamma0_cm() / (2.0 * PI);
    match shape {
        EmSpectralShape::Cubic => j0 * (omega / p.epsilon).powi(3),
        EmSpectralShape::Flat => j0,
    }
}

/// Gaps with |ω| below this fraction of k_B·T are treated as zero.
const BOSE_ZERO_GAP_REL: f64 = 1e-12;

/// n(ω) = 1/(exp(ω/k_BT) − 1). Negative ω is allowed and satisfies
/// n(−ω) = −(n(ω) + 1).
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    let kt = units::thermal_energy(temperature);
    if omega.abs() <= BOSE_ZERO_GAP_REL * kt {
        return Err(Error::DegenerateGap { omega });
    }
    Ok(1.0 / (omega / kt).exp_m1())
}

/// The three spectral-density shapes that parametrize the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralDensityKind {
    PhononDrudeLorentz,
    ResidualOhmic,
    EmCubic,
}

impl SpectralDensityKind {
    pub fn eval(self, omega: f64, p: &ModelParams) -> f64 {
        match self {
            Self::PhononDrudeLorentz => phonon_sd(omega, p),
            Self::ResidualOhmic => residual_sd(omega, p),
            Self::EmCubic => em_sd(omega, p, EmSpectralShape::Cubic),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};

    fn fig2(alpha_ratio: f64) -> ModelParams {
        ModelParams::default().with_alpha_over_epsilon(alpha_ratio)
    }

    #[test]
    fn phonon_sd_values() {
        let p = fig2(0.1);
        assert_eq!(phonon_sd(0.0, &p), 0.0);
        // At the peak the closed form collapses to α ν₀ / γ.
        assert!((phonon_sd(400.0, &p) - 4032.5).abs() < 1e-9);
        assert_eq!(phonon_sd(-123.4, &p), -phonon_sd(123.4, &p));
    }

    #[test]
    fn residual_sd_values() {
        let p = fig2(0.1);
        assert_eq!(residual_sd(0.0, &p), 0.0);
        assert!((residual_sd(2.0 * PI * p.nu0, &p) - p.gamma).abs() < 1e-12);
        assert!((residual_sd(400.0, &p) - 80.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((residual_sd(400.0, &p) - 12.732).abs() < 1e-3);
        assert_eq!(residual_sd(-7.0, &p), -residual_sd(7.0, &p));
    }

    #[test]
    fn em_sd_values() {
        let p = fig2(0.1);
        let j0 = p.gamma0_cm() / (2.0 * PI);
        assert!((em_sd(p.epsilon, &p, EmSpectralShape::Cubic) - j0).abs() < 1e-18);
        assert_eq!(em_sd(0.0, &p, EmSpectralShape::Cubic), 0.0);
        assert!((em_sd(2.0 * p.epsilon, &p, EmSpectralShape::Cubic) - 8.0 * j0).abs() < 1e-15);
        assert_eq!(em_sd(-1.0, &p, EmSpectralShape::Cubic), 0.0);
        assert_eq!(em_sd(3.0, &p, EmSpectralShape::Flat), j0);
    }

    #[test]
    fn bose_values() {
        let t = 300.0;
        let kt = units::thermal_energy(t);
        assert!((bose_occupation(kt * 2f64.ln(), t).unwrap() - 1.0).abs() < 1e-12);
        // k_B·6000 K = 4170.2088 cm⁻¹; 1/(exp(8065/4170.2088) − 1)
        let n = bose_occupation(8065.0, 6000.0).unwrap();
        assert!((n - 0.1690).abs() < 1e-4, "{n}");
        for w in [0.5, 100.0, 8065.0] {
            let s = bose_occupation(-w, t).unwrap() + bose_occupation(w, t).unwrap() + 1.0;
            assert!(s.abs() < 1e-9 * (1.0 + bose_occupation(w, t).unwrap()));
        }
        assert!(matches!(bose_occupation(0.0, t), Err(Error::DegenerateGap { .. })));
    }

    #[test]
    fn reorganization_energy_quadrature() {
        // ∫₀^∞ J(ν)/ν dν = πα/2, split at a few ν₀ and mapped on the tail.
        for &(alpha, nu0, gamma) in
            &[(806.5, 400.0, 80.0), (2016.25, 400.0, 80.0), (100.0, 250.0, 500.0), (50.0, 1000.0, 20.0)]
        {
            let p = ModelParams { alpha, nu0, gamma, ..ModelParams::default() };
            let opts = QuadOptions { rel_tol: 1e-12, initial_panels: 64, ..Default::default() };
            let cut = 20.0 * nu0;
            let head = integrate(|v| if v == 0.0 { 0.0 } else { phonon_sd(v, &p) / v }, 0.0, cut, &opts)
                .unwrap()
                .value;
            // ν = cut/u, dν = cut/u² du for u ∈ (0, 1].
            let tail = integrate(
                |u| {
                    if u == 0.0 {
                        0.0
                    } else {
                        let v = cut / u;
                        phonon_sd(v, &p) / v * cut / (u * u)
                    }
                },
                0.0,
                1.0,
                &opts,
            )
            .unwrap()
            .value;
            let expected = PI * alpha / 2.0;
            assert!(((head + tail - expected) / expected).abs() < 1e-6, "{alpha} {nu0} {gamma}");
        }
    }

    #[test]
    fn densities_are_non_negative_for_positive_frequencies() {
        let p = fig2(0.3);
        for k in 1..2000 {
            let w = k as f64 * 10.0;
            for kind in [
                SpectralDensityKind::PhononDrudeLorentz,
                SpectralDensityKind::ResidualOhmic,
                SpectralDensityKind::EmCubic,
            ] {
                let v = kind.eval(w, &p);
                assert!(v.is_finite() && v >= 0.0);
                assert_eq!(kind.eval(0.0, &p), 0.0);
            }
        }
    }
}
