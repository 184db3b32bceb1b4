//! Curie-temperature estimators for the (deformed) Kittel–Shore ferromagnet.
//!
//! At finite `N` the zero-field susceptibility falls monotonically with `T`;
//! the transition shows up as the knee where it switches from the ordered
//! to the Curie-like regime. `curie_susceptibility` locates that knee as the
//! maximizer of `-d ln χ / d ln T`, evaluated exactly from the block
//! distribution. `curie_equal_maxima` applies the two-peak criterion on the
//! level weights, valid only when the weight distribution is bimodal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{ModelConfig, Scaling};
use crate::qarith::{ln_gamma, log_q_number, DeformationParam};
use crate::thermo::{strict_local_maxima, ThermoModel};

pub const SUSCEPTIBILITY_GRID_POINTS: usize = 240;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurieMethod {
    SusceptibilityPeak,
    EqualMaxima,
    AnalyticFormula,
    LimitFormula,
    FitReference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Unimodal,
    Bimodal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
    /// Final bracket width (susceptibility) or `|g|` at the root (equal maxima).
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurieEstimate {
    pub eta: f64,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub method: CurieMethod,
    #[serde(rename = "T_C")]
    pub t_c: f64,
    pub regime: Option<Regime>,
    pub diagnostics: Diagnostics,
}

fn require_thermodynamic(cfg: &ModelConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.scaling != Scaling::Thermodynamic {
        return Err(Error::InvalidArgument("Curie estimates require thermodynamic scaling".into()));
    }
    if cfg.field != 0.0 {
        return Err(Error::InvalidArgument("Curie estimates are defined at zero field".into()));
    }
    if cfg.coupling <= 0.0 {
        return Err(Error::InvalidArgument("Curie estimates need a ferromagnetic coupling I > 0".into()));
    }
    Ok(())
}

fn check_range(range: (f64, f64)) -> Result<()> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid temperature range [{lo}, {hi}]")));
    }
    Ok(())
}

/// Classifies the level-weight distribution at `t`.
pub fn regime_at(model: &ThermoModel, t: f64) -> Result<Regime> {
    Ok(if two_peaks(model, t)?.is_some() { Regime::Bimodal } else { Regime::Unimodal })
}

/// Log-weights of the lowest-`p` and highest-`p` strict local maxima, when
/// there are at least two.
fn two_peaks(model: &ThermoModel, t: f64) -> Result<Option<(usize, usize, f64, f64)>> {
    let w = model.weights(t)?;
    let lz: Vec<f64> = w.levels.iter().map(|l| l.log_z).collect();
    let peaks = strict_local_maxima(&lz);
    if peaks.len() < 2 {
        return Ok(None);
    }
    let (a, b) = (peaks[0], peaks[peaks.len() - 1]);
    Ok(Some((a, b, lz[a], lz[b])))
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, usize)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut it = 0;
    while (b - a).abs() > tol && it < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        it += 1;
    }
    Ok((0.5 * (a + b), it))
}

/// Transition temperature from the susceptibility knee over `t_range`.
pub fn curie_susceptibility(cfg: &ModelConfig, t_range: (f64, f64)) -> Result<CurieEstimate> {
    require_thermodynamic(cfg)?;
    check_range(t_range)?;
    let model = ThermoModel::new(cfg)?;
    let (lo, hi) = t_range;
    let n = SUSCEPTIBILITY_GRID_POINTS;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let slopes: Vec<f64> =
        grid.par_iter().map(|&t| model.susceptibility_log_slope(t)).collect::<Result<_>>()?;
    let best = slopes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap();
    if best == 0 || best == n {
        return Err(Error::Regime(format!(
            "no susceptibility knee inside [{lo}, {hi}]: extremum at the range boundary"
        )));
    }
    let (a, b) = (grid[best - 1], grid[best + 1]);
    let (t_c, iterations) = golden_max(|t| model.susceptibility_log_slope(t), a, b, 1e-7)?;
    Ok(CurieEstimate {
        eta: cfg.eta,
        n_sites: cfg.n_sites,
        method: CurieMethod::SusceptibilityPeak,
        t_c,
        regime: Some(regime_at(&model, t_c)?),
        diagnostics: Diagnostics { bracket: Some((a, b)), iterations, residual: 1e-7 },
    })
}

/// Temperature at which the two competing peaks of the level weights are equal.
pub fn curie_equal_maxima(cfg: &ModelConfig, t_bracket: (f64, f64)) -> Result<CurieEstimate> {
    require_thermodynamic(cfg)?;
    check_range(t_bracket)?;
    let model = ThermoModel::new(cfg)?;
    let g = |t: f64| -> Result<Option<f64>> { Ok(two_peaks(&model, t)?.map(|(_, _, a, b)| b - a)) };

    let (lo, hi) = t_bracket;
    let coarse = 64;
    let grid: Vec<f64> = (0..=coarse).map(|k| lo + (hi - lo) * k as f64 / coarse as f64).collect();
    let values: Vec<Option<f64>> = grid.par_iter().map(|&t| g(t)).collect::<Result<_>>()?;
    if values.iter().all(Option::is_none) {
        return Err(Error::Regime(format!(
            "weight distribution is unimodal on [{lo}, {hi}]; use the susceptibility estimator"
        )));
    }
    let seed = (0..coarse).find(|&k| match (values[k], values[k + 1]) {
        (Some(a), Some(b)) => a == 0.0 || a.signum() != b.signum(),
        _ => false,
    });
    let Some(k) = seed else {
        return Err(Error::Regime(format!("the two weight peaks never cross on [{lo}, {hi}]")));
    };
    let (mut a, mut b) = (grid[k], grid[k + 1]);
    let mut ga = values[k].unwrap();
    let mut iterations = 0;
    let mut mid = a;
    let mut gm = ga;
    while iterations < 200 {
        if gm.abs() <= 1e-10 && iterations > 0 {
            break;
        }
        mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        gm = g(mid)?.ok_or_else(|| Error::Regime(format!("distribution turned unimodal at T = {mid}")))?;
        if gm == 0.0 {
            break;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(CurieEstimate {
        eta: cfg.eta,
        n_sites: cfg.n_sites,
        method: CurieMethod::EqualMaxima,
        t_c: mid,
        regime: Some(Regime::Bimodal),
        diagnostics: Diagnostics { bracket: Some((grid[k], grid[k + 1])), iterations, residual: gm.abs() },
    })
}

/// `T_C = I [N/2+1]_q [N/2]_q / (2 N ln(N! / ((N+1)(N/2)!(N/2+1)!)))`, `q = e^{η/N}`.
pub fn curie_analytic(n: u64, eta: f64, coupling: f64) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("N must be even and positive, got {n}")));
    }
    let nf = n as f64;
    let d = DeformationParam::new(eta / nf)?;
    let ln_num = log_q_number(nf / 2.0 + 1.0, d)? + log_q_number(nf / 2.0, d)?;
    let ln_ratio = ln_gamma(nf + 1.0) - (nf + 1.0).ln() - ln_gamma(nf / 2.0 + 1.0) - ln_gamma(nf / 2.0 + 2.0);
    if ln_ratio <= 0.0 {
        return Err(Error::InvalidArgument(format!("formula undefined at N = {n}")));
    }
    Ok(coupling * ln_num.exp() / (2.0 * nf * ln_ratio))
}

/// `2 sinh²(η/4) / (η² ln 2)`.
pub fn curie_limit(eta: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("limit formula needs eta > 0, got {eta}")));
    }
    let s = (eta / 4.0).sinh();
    Ok(2.0 * s * s / (eta * eta * std::f64::consts::LN_2))
}

/// Large-η form `e^{η/2} / (η² ln 4)`.
pub fn curie_limit_asymptotic(eta: f64) -> Result<f64> {
    curie_limit(eta)?;
    Ok((eta / 2.0).exp() / (eta * eta * 4f64.ln()))
}

/// Piecewise fit: 0.25 up to η = 3, a quintic on (3, 8].
pub fn curie_fit_reference(eta: f64) -> Result<f64> {
    if !(0.0..=8.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("fit is defined for eta in [0, 8], got {eta}")));
    }
    if eta <= 3.0 {
        return Ok(0.25);
    }
    const C: [f64; 6] = [0.25, 0.022959, -0.023077, 0.007164, -0.000779, 0.000035];
    Ok(C.iter().rev().fold(0.0, |acc, c| acc * eta + c))
}
