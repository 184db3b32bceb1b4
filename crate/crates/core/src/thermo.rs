//! Partition function and thermodynamic observables from the analytic spectrum.
//!
//! Energies are measured from the zero-field ground block, which does not
//! depend on `h`, so derivatives of `F` in `h` and `T` are those of the model.
//! With the field on, the Zeeman sum of a block is
//! `Σ_m e^{x m} = sinh((2J+1)x/2) / sinh(x/2)` with `x = βγh`, and the
//! within-block moments follow from its logarithmic derivatives:
//!
//! ```text
//! ⟨m⟩   = a L(a x) - L(x/2)/2
//! Var m = a² L'(a x) - L'(x/2)/4,     a = J + 1/2,  L(y) = coth y - 1/y
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::hamiltonian::ModelConfig;
use crate::qarith::{log_q_number, log_sum_exp, DeformationParam};
use crate::spectrum::blocks;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "log_Z")]
    pub log_z: f64,
    /// `-(k_B T / N) ln Z`.
    #[serde(rename = "F")]
    pub free_energy: f64,
    #[serde(rename = "C_V")]
    pub specific_heat: f64,
    #[serde(rename = "chi")]
    pub susceptibility: f64,
    #[serde(rename = "M")]
    pub magnetization: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelWeight {
    pub p: HalfInt,
    #[serde(rename = "J")]
    pub j: HalfInt,
    /// Energy above the zero-field ground block.
    #[serde(rename = "E_p")]
    pub energy: f64,
    pub log_z: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelWeights {
    #[serde(rename = "T")]
    pub t: f64,
    pub levels: Vec<LevelWeight>,
}

impl LevelWeights {
    /// Indices of strict local maxima of `log_z` over the level sequence,
    /// endpoints included. Plateaus do not count.
    pub fn local_maxima(&self) -> Vec<usize> {
        let lz: Vec<f64> = self.levels.iter().map(|l| l.log_z).collect();
        strict_local_maxima(&lz)
    }
}

pub(crate) fn strict_local_maxima(xs: &[f64]) -> Vec<usize> {
    let n = xs.len();
    (0..n)
        .filter(|&k| {
            let left = k == 0 || xs[k] > xs[k - 1];
            let right = k + 1 == n || xs[k] > xs[k + 1];
            left && right && n > 1
        })
        .collect()
}

#[derive(Clone, Debug)]
struct BlockData {
    j: HalfInt,
    p: HalfInt,
    ln_d: f64,
    /// `E_J - E_ground`, zero field.
    energy: f64,
}

/// Precomputed block data for repeated evaluation at many temperatures.
#[derive(Clone, Debug)]
pub struct ThermoModel {
    n_sites: usize,
    gamma: f64,
    field: f64,
    k_b: f64,
    blocks: Vec<BlockData>,
}

/// Block-resolved state at one temperature.
struct Resolved {
    beta: f64,
    log_z: f64,
    /// Normalized block weights.
    weights: Vec<f64>,
    log_block: Vec<f64>,
    mean_m: Vec<f64>,
    var_m: Vec<f64>,
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature must be positive and finite, got {t}")));
    }
    Ok(())
}

fn langevin(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        y * (1.0 / 3.0 - y2 * (1.0 / 45.0 - y2 * (2.0 / 945.0 - y2 * (1.0 / 4725.0 - y2 * 2.0 / 93555.0))))
    } else {
        1.0 / y.tanh() - 1.0 / y
    }
}

fn langevin_prime(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        1.0 / 3.0 - y2 * (1.0 / 15.0 - y2 * (2.0 / 189.0 - y2 * (1.0 / 675.0 - y2 * 2.0 / 10395.0)))
    } else {
        let s = y.sinh();
        1.0 / (y * y) - 1.0 / (s * s)
    }
}

/// `(⟨m⟩, Var m)` over `m = -J..J` with weights `e^{x m}`.
pub fn zeeman_moments(j: HalfInt, x: f64) -> (f64, f64) {
    if x == 0.0 {
        let jv = j.value();
        return (0.0, jv * (jv + 1.0) / 3.0);
    }
    let a = j.value() + 0.5;
    let mean = a * langevin(a * x) - 0.5 * langevin(0.5 * x);
    let var = a * a * langevin_prime(a * x) - 0.25 * langevin_prime(0.5 * x);
    (mean, var.max(0.0))
}

/// `ln Σ_{m=-J}^{J} e^{x m}`.
pub fn log_zeeman_factor(j: HalfInt, x: f64) -> f64 {
    let n = j.multiplet_dim() as f64;
    if x == 0.0 {
        return n.ln();
    }
    log_q_number(n, DeformationParam::new(x).expect("finite x")).expect("2J+1 >= 1")
}

impl ThermoModel {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        let bl = blocks(cfg)?;
        let e0 = bl.iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
        Ok(ThermoModel {
            n_sites: cfg.n_sites,
            gamma: cfg.gamma,
            field: cfg.field,
            k_b: cfg.k_b,
            blocks: bl
                .into_iter()
                .map(|b| BlockData { j: b.j, p: b.p, ln_d: b.multiplicity.ln(), energy: b.energy - e0 })
                .collect(),
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn resolve(&self, t: f64) -> Result<Resolved> {
        check_temperature(t)?;
        let beta = 1.0 / (self.k_b * t);
        let x = beta * self.gamma * self.field;
        let log_block: Vec<f64> = self
            .blocks
            .iter()
            .map(|b| b.ln_d + log_zeeman_factor(b.j, x) - beta * b.energy)
            .collect();
        let log_z = log_sum_exp(&log_block);
        if !log_z.is_finite() {
            return Err(Error::NonFinite(format!("log Z at T = {t}")));
        }
        let weights = log_block.iter().map(|l| (l - log_z).exp()).collect();
        let (mean_m, var_m) = self.blocks.iter().map(|b| zeeman_moments(b.j, x)).unzip();
        Ok(Resolved { beta, log_z, weights, log_block, mean_m, var_m })
    }

    pub fn log_z(&self, t: f64) -> Result<f64> {
        Ok(self.resolve(t)?.log_z)
    }

    pub fn weights(&self, t: f64) -> Result<LevelWeights> {
        let r = self.resolve(t)?;
        Ok(LevelWeights {
            t,
            levels: self
                .blocks
                .iter()
                .zip(r.log_block.iter().zip(&r.weights))
                .map(|(b, (&lz, &w))| LevelWeight { p: b.p, j: b.j, energy: b.energy, log_z: lz, weight: w })
                .collect(),
        })
    }

    pub fn observables(&self, t: f64) -> Result<ThermoPoint> {
        let r = self.resolve(t)?;
        let n = self.n_sites as f64;
        let gh = self.gamma * self.field;
        let mut mean_m = 0.0;
        let mut mean_e = 0.0;
        for (k, b) in self.blocks.iter().enumerate() {
            mean_m += r.weights[k] * r.mean_m[k];
            mean_e += r.weights[k] * (b.energy - gh * r.mean_m[k]);
        }
        let mut var_m = 0.0;
        let mut var_e = 0.0;
        for (k, b) in self.blocks.iter().enumerate() {
            let w = r.weights[k];
            let dm = r.mean_m[k] - mean_m;
            let de = b.energy - gh * r.mean_m[k] - mean_e;
            var_m += w * (dm * dm + r.var_m[k]);
            var_e += w * (de * de + gh * gh * r.var_m[k]);
        }
        Ok(ThermoPoint {
            t,
            log_z: r.log_z,
            free_energy: -self.k_b * t * r.log_z / n,
            specific_heat: var_e / (n * self.k_b * t * t),
            susceptibility: r.beta * self.gamma * self.gamma * var_m / n,
            magnetization: self.gamma * mean_m / n,
        })
    }

    /// `-d ln χ / d ln T` at zero field:
    /// `1 - β Cov(J(J+1)/3, E) / ⟨J(J+1)/3⟩` over the block distribution.
    pub fn susceptibility_log_slope(&self, t: f64) -> Result<f64> {
        if self.field != 0.0 {
            return Err(Error::InvalidArgument("susceptibility slope is defined at h = 0".into()));
        }
        let r = self.resolve(t)?;
        let v: Vec<f64> = self.blocks.iter().map(|b| b.j.value() * (b.j.value() + 1.0) / 3.0).collect();
        let mean_v: f64 = r.weights.iter().zip(&v).map(|(w, v)| w * v).sum();
        let mean_e: f64 = r.weights.iter().zip(&self.blocks).map(|(w, b)| w * b.energy).sum();
        let cov: f64 = r
            .weights
            .iter()
            .zip(v.iter().zip(&self.blocks))
            .map(|(w, (v, b))| w * (v - mean_v) * (b.energy - mean_e))
            .sum();
        if mean_v <= 0.0 {
            return Err(Error::Regime("no magnetic fluctuations: all weight in J = 0".into()));
        }
        Ok(1.0 - r.beta * cov / mean_v)
    }

    /// Observables over a temperature grid, evaluated in parallel, in grid order.
    pub fn sweep(&self, temperatures: &[f64]) -> Result<Vec<ThermoPoint>> {
        temperatures.par_iter().map(|&t| self.observables(t)).collect()
    }
}

pub fn partition_function(cfg: &ModelConfig, t: f64) -> Result<(f64, LevelWeights)> {
    check_temperature(t)?;
    let model = ThermoModel::new(cfg)?;
    let w = model.weights(t)?;
    Ok((model.log_z(t)?, w))
}

pub fn observables(cfg: &ModelConfig, t: f64) -> Result<ThermoPoint> {
    check_temperature(t)?;
    ThermoModel::new(cfg)?.observables(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Scaling;

    #[test]
    fn langevin_branches_meet() {
        for y in [0.0999999f64, 0.1, 0.100001] {
            let direct = 1.0 / y.tanh() - 1.0 / y;
            assert!((langevin(y) - direct).abs() < 1e-13);
            let s = y.sinh();
            assert!((langevin_prime(y) - (1.0 / (y * y) - 1.0 / (s * s))).abs() < 1e-11);
        }
        assert_eq!(langevin(0.0), 0.0);
        assert!((langevin(-0.05) + langevin(0.05)).abs() < 1e-18);
    }

    #[test]
    fn zeeman_moments_match_direct_sums() {
        for jt in [0i64, 1, 2, 5, 40] {
            let j = HalfInt::from_twice(jt);
            for x in [-3.0, -0.01, 1e-6, 0.07, 0.5, 2.0, 30.0] {
                let ms: Vec<f64> = j.projections().map(HalfInt::value).collect();
                let ws: Vec<f64> = ms.iter().map(|m| (x * m).exp()).collect();
                let z: f64 = ws.iter().sum();
                let mean: f64 = ms.iter().zip(&ws).map(|(m, w)| m * w).sum::<f64>() / z;
                let var: f64 = ms.iter().zip(&ws).map(|(m, w)| (m - mean).powi(2) * w).sum::<f64>() / z;
                let (a, b) = zeeman_moments(j, x);
                assert!((a - mean).abs() < 1e-10 * (1.0 + mean.abs()), "j={j} x={x}");
                assert!((b - var).abs() < 1e-9 * (1.0 + var), "j={j} x={x}: {b} vs {var}");
                assert!((log_zeeman_factor(j, x) - z.ln()).abs() < 1e-12 * (1.0 + z.ln().abs()));
            }
        }
    }

    #[test]
    fn two_site_antiferro() {
        let cfg = ModelConfig::spin_half(2).with_coupling(-1.0);
        for t in [0.1f64, 0.7, 3.0] {
            let b = (-1.0 / t).exp();
            let z = 1.0 + 3.0 * b;
            let p = observables(&cfg, t).unwrap();
            assert!((p.log_z - z.ln()).abs() < 1e-14);
            let frac = 3.0 * b / z;
            let cv = frac * (1.0 - frac) / (t * t) / 2.0;
            assert!((p.specific_heat - cv).abs() < 1e-14);
            // only the triplet carries <m^2> = 2/3
            assert!((p.susceptibility - frac * (2.0 / 3.0) / t / 2.0).abs() < 1e-14);
            assert_eq!(p.magnetization, 0.0);
        }
    }

    #[test]
    fn high_temperature_limits() {
        let cfg = ModelConfig::spin_half(50).with_eta(2.0).with_scaling(Scaling::Thermodynamic);
        let lz = ThermoModel::new(&cfg).unwrap().log_z(1e6).unwrap();
        assert!((lz - 50.0 * 2f64.ln()).abs() < 1e-6 * lz);
        let p = observables(&cfg, 1e4).unwrap();
        assert!((p.susceptibility * 4.0 * 1e4 - 1.0).abs() < 0.01);
    }

    #[test]
    fn weights_sum_to_one() {
        let cfg = ModelConfig::spin_half(1000).with_eta(4.0).with_scaling(Scaling::Thermodynamic).with_field(0.01);
        let (_, w) = partition_function(&cfg, 0.3).unwrap();
        let s: f64 = w.levels.iter().map(|l| l.weight).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(w.levels.iter().all(|l| (0.0..=1.0).contains(&l.weight)));
    }

    #[test]
    fn rejects_bad_temperatures() {
        let cfg = ModelConfig::spin_half(4);
        for t in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(observables(&cfg, t).is_err());
        }
    }

    #[test]
    fn local_maxima_detection() {
        assert_eq!(strict_local_maxima(&[3.0, 1.0, 2.0, 0.0]), vec![0, 2]);
        assert_eq!(strict_local_maxima(&[1.0, 2.0, 2.0, 1.0]), Vec::<usize>::new());
        assert_eq!(strict_local_maxima(&[1.0, 2.0, 3.0]), vec![2]);
        assert_eq!(strict_local_maxima(&[1.0]), Vec::<usize>::new());
    }
}
