//! Closed-form success probabilities and the optimal-phase search.
//!
//! Every formula takes `τ` from the lower branch of the phase-loss circle.
//! The detuned variants take the single-photon phase `φ₁`; at `φ₁ = 0` they
//! reduce to the resonant ones.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{
    router_outcomes, run_bell_measurement_average, run_evl_bell_measurement_average, run_ghz, RouterOutcome, WorkingPoint,
};
use crate::rydberg::{detuned_params, loss_from_phase, DetunedParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Probability that a photon pair leaves the router in `w`.
    Router,
    Bm,
    Evl,
    Ghz,
    Cnot,
    /// CNOT built from ancilla-assisted Bell measurements.
    CnotEvl,
    Factorization,
    FactorizationEvl,
}

impl Protocol {
    pub const ALL: [Protocol; 8] = [
        Protocol::Router,
        Protocol::Bm,
        Protocol::Evl,
        Protocol::Ghz,
        Protocol::Cnot,
        Protocol::CnotEvl,
        Protocol::Factorization,
        Protocol::FactorizationEvl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Router => "router",
            Protocol::Bm => "bm",
            Protocol::Evl => "evl",
            Protocol::Ghz => "ghz",
            Protocol::Cnot => "cnot",
            Protocol::CnotEvl => "cnot-evl",
            Protocol::Factorization => "factorization",
            Protocol::FactorizationEvl => "factorization-evl",
        }
    }

    /// Value of the all-linear circuit (`φ = 0`, no loss, ideal detectors).
    pub fn linear_baseline(self) -> f64 {
        match self {
            Protocol::Router => 0.0,
            Protocol::Bm | Protocol::Ghz => 0.5,
            Protocol::Evl => 0.75,
            Protocol::Cnot => 1.0 / 32.0,
            Protocol::CnotEvl => 0.25 * 0.75f64.powi(3),
            Protocol::Factorization => 1.0 / 1024.0,
            Protocol::FactorizationEvl => (0.25 * 0.75f64.powi(3)).powi(2),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown protocol '{s}'")))
    }
}

fn check_pde(p_de: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_de) {
        return Err(Error::invalid(format!("p_de = {p_de} is not a probability")));
    }
    Ok(())
}

/// `(√(1−τ)·cos φ, τ)` at a resonant working point.
fn resonant(phi: f64, od_b: f64, p_de: f64) -> Result<(f64, f64)> {
    check_pde(p_de)?;
    let tau = loss_from_phase(phi, od_b)?.tau;
    Ok(((1.0 - tau).sqrt() * phi.cos(), tau))
}

pub fn p_bm_formula(phi: f64, od_b: f64, p_de: f64) -> Result<f64> {
    let (sc, tau) = resonant(phi, od_b, p_de)?;
    Ok(p_de.powi(2) * (1.0 - (sc + 1.0).powi(2) / 8.0 - tau / 4.0))
}

pub fn p_evl_formula(phi: f64, od_b: f64, p_de: f64) -> Result<f64> {
    let (sc, tau) = resonant(phi, od_b, p_de)?;
    Ok(p_de.powi(4) * (1.0 - (sc + 1.0).powi(2) / 16.0 - tau / 4.0))
}

pub fn p_ghz_formula(phi: f64, od_b: f64, p_de: f64) -> Result<f64> {
    let (sc, _) = resonant(phi, od_b, p_de)?;
    Ok(p_de * (0.5 + (sc - 1.0).powi(2) / 8.0))
}

/// `(√((1−τ₁)(1−τ₂))·cos φ, 1−τ₁, survival)` at a detuned working point.
fn detuned(phi: f64, phi1: f64, od_b: f64, p_de: f64) -> Result<(f64, f64, f64)> {
    check_pde(p_de)?;
    let DetunedParams { tau1, tau2, .. } = detuned_params(phi, phi1, od_b)?;
    let t1 = 1.0 - tau1;
    let survive = t1 * t1 / 2.0 + t1 * (2.0 - tau1 - tau2) / 4.0;
    Ok((((1.0 - tau1) * (1.0 - tau2)).sqrt() * phi.cos(), t1, survive))
}

pub fn p_bm_detuned_formula(phi: f64, phi1: f64, od_b: f64, p_de: f64) -> Result<f64> {
    let (sc, t1, survive) = detuned(phi, phi1, od_b, p_de)?;
    Ok(p_de.powi(2) * (survive - (sc + t1).powi(2) / 8.0))
}

pub fn p_evl_detuned_formula(phi: f64, phi1: f64, od_b: f64, p_de: f64) -> Result<f64> {
    let (sc, t1, survive) = detuned(phi, phi1, od_b, p_de)?;
    Ok(p_de.powi(4) * (survive - (sc + t1).powi(2) / 16.0))
}

/// `P_DE·[(1−τ₁)²/2 + (√((1−τ₁)(1−τ₂))·cos φ − (1−τ₁))²/8]`.
pub fn p_ghz_detuned_formula(phi: f64, phi1: f64, od_b: f64, p_de: f64) -> Result<f64> {
    let (sc, t1, _) = detuned(phi, phi1, od_b, p_de)?;
    Ok(p_de * (t1 * t1 / 2.0 + (sc - t1).powi(2) / 8.0))
}

/// Squared amplitudes of a photon pair leaving the router, including the
/// detuned case; `lost` is the remainder.
pub fn router_formula(wp: &WorkingPoint) -> Result<RouterOutcome> {
    let DetunedParams { tau1, tau2, .. } = wp.medium()?;
    let keep = ((1.0 - tau1) * (1.0 - tau2)).sqrt();
    let (kc, t1) = (keep * wp.phi.cos(), 1.0 - tau1);
    let d = wp.p_de * wp.p_de;
    let uu = d * (kc + t1).powi(2) / 4.0;
    let ww = d * (kc - t1).powi(2) / 4.0;
    let uw = d * keep * keep * wp.phi.sin().powi(2) / 2.0;
    Ok(RouterOutcome { uu, uw, ww, lost: 1.0 - uu - uw - ww })
}

/// `P_GHZ² · P_BM³`, with the ancilla-assisted BM when `evl` is set.
pub fn p_cnot_with(phi: f64, od_b: f64, p_de: f64, evl: bool) -> Result<f64> {
    let bm = if evl { p_evl_formula(phi, od_b, p_de)? } else { p_bm_formula(phi, od_b, p_de)? };
    Ok(p_ghz_formula(phi, od_b, p_de)?.powi(2) * bm.powi(3))
}

pub fn p_cnot(phi: f64, od_b: f64, p_de: f64) -> Result<f64> {
    p_cnot_with(phi, od_b, p_de, false)
}

/// Two CNOT gates.
pub fn p_factorization(phi: f64, od_b: f64, p_de: f64) -> Result<f64> {
    Ok(p_cnot(phi, od_b, p_de)?.powi(2))
}

/// Closed-form value of `protocol` at `wp`; detuned formulas are used when
/// `wp.phi1 != 0`.
pub fn formula(protocol: Protocol, wp: &WorkingPoint) -> Result<f64> {
    compose(
        protocol,
        wp,
        |w| match w.phi1 {
            0.0 => p_bm_formula(w.phi, w.od_b, w.p_de),
            phi1 => p_bm_detuned_formula(w.phi, phi1, w.od_b, w.p_de),
        },
        |w| match w.phi1 {
            0.0 => p_evl_formula(w.phi, w.od_b, w.p_de),
            phi1 => p_evl_detuned_formula(w.phi, phi1, w.od_b, w.p_de),
        },
        |w| match w.phi1 {
            0.0 => p_ghz_formula(w.phi, w.od_b, w.p_de),
            phi1 => p_ghz_detuned_formula(w.phi, phi1, w.od_b, w.p_de),
        },
        |w| Ok(router_formula(w)?.ww),
    )
}

/// Value of `protocol` from the exact circuit simulation. Composite gates
/// combine simulated building blocks.
pub fn simulate(protocol: Protocol, wp: &WorkingPoint) -> Result<f64> {
    compose(
        protocol,
        wp,
        |w| Ok(run_bell_measurement_average(w)?.p_success),
        |w| Ok(run_evl_bell_measurement_average(w)?.p_success),
        |w| Ok(run_ghz(w)?.p_success),
        |w| Ok(router_outcomes(w)?.ww),
    )
}

fn compose(
    protocol: Protocol,
    wp: &WorkingPoint,
    bm: impl Fn(&WorkingPoint) -> Result<f64>,
    evl: impl Fn(&WorkingPoint) -> Result<f64>,
    ghz: impl Fn(&WorkingPoint) -> Result<f64>,
    router: impl Fn(&WorkingPoint) -> Result<f64>,
) -> Result<f64> {
    let cnot = |b: f64| -> Result<f64> { Ok(ghz(wp)?.powi(2) * b.powi(3)) };
    match protocol {
        Protocol::Router => router(wp),
        Protocol::Bm => bm(wp),
        Protocol::Evl => evl(wp),
        Protocol::Ghz => ghz(wp),
        Protocol::Cnot => cnot(bm(wp)?),
        Protocol::CnotEvl => cnot(evl(wp)?),
        Protocol::Factorization => Ok(cnot(bm(wp)?)?.powi(2)),
        Protocol::FactorizationEvl => Ok(cnot(evl(wp)?)?.powi(2)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub phi: f64,
    pub od_b: f64,
    pub p_de: f64,
    pub phi1: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub protocol: Protocol,
    pub points: Vec<CurvePoint>,
}

/// Formula curve over `phis` (which must be strictly increasing) with
/// `φ₁ = phi1_ratio · φ`. Unreachable phases are skipped.
pub fn success_curve(protocol: Protocol, phis: &[f64], od_b: f64, p_de: f64, phi1_ratio: f64) -> Result<SuccessCurve> {
    if phis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("phase grid must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(phis.len());
    for &phi in phis {
        let wp = WorkingPoint::new(phi, od_b, p_de).with_phi1(phi1_ratio * phi);
        match formula(protocol, &wp) {
            Ok(probability) => points.push(CurvePoint { phi, od_b, p_de, phi1: wp.phi1, probability }),
            Err(Error::UnreachablePhase { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(SuccessCurve { protocol, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPhaseResult {
    pub od_b: f64,
    pub phi_opt: f64,
    pub p_opt: f64,
}

const GRID_POINTS: usize = 10_000;
const PHASE_TOL: f64 = 1e-9;

/// Maximizes the resonant formula over `φ ∈ (0, min(π, OD_b/4)]`: a
/// uniform grid brackets the maximum, golden-section search refines it.
pub fn find_optimal_phase(protocol: Protocol, od_b: f64, p_de: f64) -> Result<OptimalPhaseResult> {
    if od_b.is_nan() || od_b <= 0.0 {
        return Err(Error::invalid(format!("OD_b must be positive, got {od_b}")));
    }
    let hi = PI.min(od_b / 4.0);
    let f = |phi: f64| formula(protocol, &WorkingPoint::new(phi, od_b, p_de));
    let step = hi / GRID_POINTS as f64;
    let mut best = (hi, f(hi)?);
    for k in 1..GRID_POINTS {
        let phi = step * k as f64;
        let v = f(phi)?;
        if v > best.1 {
            best = (phi, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(step * 1e-3), (best.0 + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > PHASE_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    let mid = 0.5 * (a + b);
    let (phi_opt, p_opt) = [best, (mid, f(mid)?)]
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok(OptimalPhaseResult { od_b, phi_opt, p_opt })
}

/// Optimal phases over a range of depths with the power-law exponents
/// `(π − φ_opt) ∝ OD_b^α` and `(1 − P_opt) ∝ OD_b^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub protocol: Protocol,
    pub points: Vec<OptimalPhaseResult>,
    /// Exponent of `π − φ_opt`, fitted over `OD_b > 50`.
    pub fit_exponent_phase: f64,
    /// Exponent of `1 − P_opt`, fitted over `OD_b > 50`.
    pub fit_exponent_infidelity: f64,
}

/// Lower bound of the depths used in the exponent fits.
pub const FIT_MIN_OD: f64 = 50.0;

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
            .collect(),
    }
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn scaling_fit(protocol: Protocol, ods: &[f64], p_de: f64) -> Result<ScalingFit> {
    let points = ods
        .iter()
        .map(|&od| find_optimal_phase(protocol, od, p_de))
        .collect::<Result<Vec<_>>>()?;
    let fit: Vec<&OptimalPhaseResult> = points
        .iter()
        .filter(|p| p.od_b > FIT_MIN_OD && p.od_b.is_finite() && p.phi_opt < PI && p.p_opt < 1.0)
        .collect();
    if fit.len() < 2 {
        return Err(Error::invalid(format!("need at least two finite depths above {FIT_MIN_OD} to fit")));
    }
    let x: Vec<f64> = fit.iter().map(|p| p.od_b.ln()).collect();
    let yp: Vec<f64> = fit.iter().map(|p| (PI - p.phi_opt).ln()).collect();
    let yi: Vec<f64> = fit.iter().map(|p| (1.0 - p.p_opt).ln()).collect();
    Ok(ScalingFit {
        protocol,
        fit_exponent_phase: slope(&x, &yp),
        fit_exponent_infidelity: slope(&x, &yi),
        points,
    })
}
