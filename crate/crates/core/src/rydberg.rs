//! Phase-loss trade-off of a Rydberg-EIT medium.
//!
//! The conditional phase `φ` and the attenuation coefficient `ε` lie on the
//! circle `φ² + (ε/2 − OD_b/4)² = (OD_b/4)²`. `ε` is the loss of *modal
//! amplitude*: the absorption probability is `τ = 1 − e^{−ε}`. Sources that
//! quote intensity loss differ from this convention by a factor of two.
//!
//! `OD_b = f64::INFINITY` is accepted and means a lossless medium.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Minimal loss for a given phase; used by every protocol.
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub phi: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub od_b: f64,
    pub branch: Branch,
}

impl CirclePoint {
    /// `φ² + (ε/2 − OD_b/4)² − (OD_b/4)²`, expanded so it stays accurate
    /// for large `OD_b`.
    pub fn circle_residual(&self) -> f64 {
        circle_residual(self.phi, self.epsilon, self.od_b)
    }
}

pub fn circle_residual(phi: f64, epsilon: f64, od_b: f64) -> f64 {
    if od_b.is_infinite() {
        return if epsilon == 0.0 { 0.0 } else { f64::INFINITY };
    }
    phi * phi + epsilon * epsilon / 4.0 - epsilon * od_b / 4.0
}

fn check_od(od_b: f64) -> Result<()> {
    if od_b.is_nan() || od_b <= 0.0 {
        return Err(Error::invalid(format!("OD_b must be positive, got {od_b}")));
    }
    Ok(())
}

pub fn loss_from_phase(phi: f64, od_b: f64) -> Result<CirclePoint> {
    loss_from_phase_on(phi, od_b, Branch::Lower)
}

pub fn loss_from_phase_on(phi: f64, od_b: f64, branch: Branch) -> Result<CirclePoint> {
    check_od(od_b)?;
    if !phi.is_finite() {
        return Err(Error::invalid(format!("phase must be finite, got {phi}")));
    }
    let radius = od_b / 4.0;
    if phi.abs() > radius {
        return Err(Error::UnreachablePhase { phi, od_b });
    }
    let epsilon = if od_b.is_infinite() {
        match branch {
            Branch::Lower => 0.0,
            Branch::Upper => f64::INFINITY,
        }
    } else {
        let root = ((radius - phi.abs()) * (radius + phi.abs())).max(0.0).sqrt();
        match branch {
            // 2(R − √(R²−φ²)) rewritten to avoid cancellation at small φ
            Branch::Lower => 2.0 * phi * phi / (radius + root),
            Branch::Upper => 2.0 * (radius + root),
        }
    };
    Ok(CirclePoint { phi, epsilon, tau: -(-epsilon).exp_m1(), od_b, branch })
}

/// Detuned operation: a lone photon picks up `phi1` with loss `eps1`; the
/// second photon inside the blockade picks up `phi2 = phi + phi1` with loss
/// `eps2`, both on the lower circle branch. The interferometer is
/// rebalanced by `delta = −2·phi1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetunedParams {
    pub phi: f64,
    pub phi1: f64,
    pub eps1: f64,
    pub tau1: f64,
    pub phi2: f64,
    pub eps2: f64,
    pub tau2: f64,
    pub delta: f64,
    pub od_b: f64,
}

impl DetunedParams {
    /// Total attenuation `ε₁ + ε₂`.
    pub fn epsilon(&self) -> f64 {
        self.eps1 + self.eps2
    }
}

pub fn detuned_params(phi: f64, phi1: f64, od_b: f64) -> Result<DetunedParams> {
    let single = loss_from_phase(phi1, od_b)?;
    let phi2 = phi + phi1;
    let pair = loss_from_phase(phi2, od_b).map_err(|_| Error::UnreachablePhase { phi: phi2, od_b })?;
    Ok(DetunedParams {
        phi,
        phi1,
        eps1: single.epsilon,
        tau1: single.tau,
        phi2,
        eps2: pair.epsilon,
        tau2: pair.tau,
        delta: -2.0 * phi1,
        od_b,
    })
}

/// Finesse `F = (OD/2)^0.4` of the effective cavity formed by a medium of
/// total optical depth `od_total`; the phase-loss circle radius grows by `F`.
pub fn effective_od_with_cavity(od_total: f64) -> Result<f64> {
    check_od(od_total)?;
    Ok((od_total / 2.0).powf(0.4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Independent route: bisection on the circle residual over [0, OD_b/2].
    fn bisect_lower(phi: f64, od_b: f64) -> f64 {
        let g = |e: f64| phi * phi + (e / 2.0 - od_b / 4.0).powi(2) - (od_b / 4.0).powi(2);
        let (mut lo, mut hi) = (0.0, od_b / 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_phase_is_lossless() {
        let p = loss_from_phase(0.0, 12.0).unwrap();
        assert_eq!((p.epsilon, p.tau), (0.0, 0.0));
        let u = loss_from_phase_on(0.0, 12.0, Branch::Upper).unwrap();
        assert!((u.epsilon - 12.0).abs() < 1e-12);
    }

    #[test]
    fn pi_phase_sits_on_the_apex_at_four_pi() {
        let p = loss_from_phase(PI, 4.0 * PI).unwrap();
        assert!((p.epsilon - 2.0 * PI).abs() < 1e-12);
        assert!(matches!(loss_from_phase(PI, 4.0 * PI - 1e-9), Err(Error::UnreachablePhase { .. })));
    }

    #[test]
    fn working_point_matches_bisection() {
        // frozen from the bisection oracle: eps = 0.146936034775, tau = 0.136650800024
        let p = loss_from_phase(PI / 3.0, 30.0).unwrap();
        assert!((p.epsilon - bisect_lower(PI / 3.0, 30.0)).abs() < 1e-12);
        assert!((p.epsilon - 0.146936034775).abs() < 1e-11);
        assert!((p.tau - 0.136650800024).abs() < 1e-11);
    }

    #[test]
    fn infinite_depth_is_lossless() {
        let p = loss_from_phase(PI, f64::INFINITY).unwrap();
        assert_eq!(p.tau, 0.0);
        assert_eq!(p.circle_residual(), 0.0);
    }

    #[test]
    fn detuned_reduces_to_resonant() {
        let d = detuned_params(1.1, 0.0, 30.0).unwrap();
        let r = loss_from_phase(1.1, 30.0).unwrap();
        assert_eq!(d.epsilon(), r.epsilon);
        assert_eq!(d.delta, 0.0);
    }

    #[test]
    fn detuned_branches_lie_on_circle() {
        let d = detuned_params(PI / 3.0, -PI / 33.0, 30.0).unwrap();
        assert!(circle_residual(d.phi1, d.eps1, 30.0).abs() < 1e-12);
        assert!(circle_residual(d.phi2, d.eps2, 30.0).abs() < 1e-12);
        assert_eq!(d.delta, 2.0 * PI / 33.0);
        assert!(d.epsilon() < loss_from_phase(PI / 3.0, 30.0).unwrap().epsilon);
        // strongly detuned small-OD point: φ₁ = −0.5 at OD_b = 3.5
        let s = detuned_params(0.5, -0.5, 3.5).unwrap();
        assert_eq!(s.phi2, 0.0);
        assert!(s.tau1 > 0.0 && s.tau2 == 0.0);
        assert!(detuned_params(1.5, -0.5, 3.5).is_err());
    }

    #[test]
    fn cavity_finesse() {
        assert!((effective_od_with_cavity(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((effective_od_with_cavity(200.0).unwrap() - 100f64.powf(0.4)).abs() < 1e-12);
        assert!((effective_od_with_cavity(200.0).unwrap() - 6.3096).abs() < 1e-4);
        assert!((effective_od_with_cavity(50.0).unwrap() - 3.6239).abs() < 1e-4);
        assert!(effective_od_with_cavity(0.0).is_err());
    }
}
