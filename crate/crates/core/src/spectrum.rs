//! Closed-form spectrum: block spins `J`, multiplicities `d_J`, energies
//! `E(J) = -(I/2)([J]_q[J+1]_q - K_q)` and Zeeman lines, plus a dense
//! diagonalization oracle for small systems.

use nalgebra::SymmetricEigen;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::hamiltonian::ModelConfig;
use crate::matrix::OperatorMatrix;
use crate::qarith::{binomial_exact, ln_biguint, ln_gamma, log_sum_exp, q_number, DeformationParam};

/// Above this many sites spin-1/2 multiplicities are carried as logarithms.
pub const EXACT_MULTIPLICITY_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Multiplicity {
    Exact(BigUint),
    /// Natural logarithm of the multiplicity.
    Log(f64),
}

impl Multiplicity {
    pub fn ln(&self) -> f64 {
        match self {
            Multiplicity::Exact(n) => ln_biguint(n),
            Multiplicity::Log(l) => *l,
        }
    }

    pub fn log10(&self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Multiplicity::Exact(n) => Some(n),
            Multiplicity::Log(_) => None,
        }
    }

    /// As a float; may be infinite for huge values.
    pub fn to_f64(&self) -> f64 {
        match self {
            Multiplicity::Exact(n) => n.to_f64().unwrap_or(f64::INFINITY),
            Multiplicity::Log(l) => l.exp(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MultiplicityRepr {
    Exact(String),
    Log(f64),
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Exact(n) => MultiplicityRepr::Exact(n.to_string()),
            Multiplicity::Log(l) => MultiplicityRepr::Log(*l),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match MultiplicityRepr::deserialize(d)? {
            MultiplicityRepr::Exact(s) => {
                Multiplicity::Exact(s.parse().map_err(serde::de::Error::custom)?)
            }
            MultiplicityRepr::Log(l) => Multiplicity::Log(l),
        })
    }
}

fn check_jnj(big_j: HalfInt, n: usize, j: HalfInt) -> Result<()> {
    let top = n as i64 * j.twice();
    let bad = |why: &str| Err(Error::InvalidArgument(format!("J={big_j}, N={n}, j={j}: {why}")));
    if j.twice() < 0 {
        return Err(Error::InvalidSpin(j.to_string()));
    }
    if n == 0 {
        return bad("N must be at least 1");
    }
    if big_j.twice() < 0 {
        return bad("J must be non-negative");
    }
    if big_j.twice() > top {
        return bad("J exceeds Nj");
    }
    if (top - big_j.twice()) % 2 != 0 {
        return bad("J and Nj differ in integrality");
    }
    Ok(())
}

/// Coefficients of `(1 + x + … + x^{2j})^N`, index `k` counting states
/// with total projection `Nj - k`.
pub fn projection_counts_dp(n: usize, j: HalfInt) -> Vec<BigUint> {
    projection_counts_mixed(&vec![j; n])
}

/// Same as [`projection_counts_dp`] for a list of (possibly different) spins.
pub fn projection_counts_mixed(spins: &[HalfInt]) -> Vec<BigUint> {
    let mut coeffs = vec![BigUint::one()];
    for j in spins {
        let width = j.twice() as usize + 1;
        let mut next = vec![BigUint::zero(); coeffs.len() + width - 1];
        // sliding-window sum of `width` consecutive coefficients
        let mut window = BigUint::zero();
        for (k, slot) in next.iter_mut().enumerate() {
            if k < coeffs.len() {
                window += &coeffs[k];
            }
            if k >= width {
                window -= &coeffs[k - width];
            }
            *slot = window.clone();
        }
        coeffs = next;
    }
    coeffs
}

/// `d_J` from the dynamic-programming convolution.
pub fn multiplicity_dp(big_j: HalfInt, n: usize, j: HalfInt) -> Result<BigUint> {
    check_jnj(big_j, n, j)?;
    let counts = projection_counts_dp(n, j);
    Ok(block_from_counts(&counts, n as i64 * j.twice(), big_j))
}

fn block_from_counts(counts: &[BigUint], top_twice: i64, big_j: HalfInt) -> BigUint {
    let k = ((top_twice - big_j.twice()) / 2) as usize;
    if k == 0 {
        return counts[0].clone();
    }
    &counts[k] - &counts[k - 1]
}

/// Number of states with total projection `Nj - s`, by inclusion-exclusion.
fn omega_alternating(s: u64, n: u64, width: u64) -> Result<BigUint> {
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    for k in 0..=(s / width).min(n) {
        let rest = s - width * k;
        let term = binomial_exact(n, k)? * binomial_exact(rest + n - 1, n - 1)?;
        if k % 2 == 0 {
            pos += term;
        } else {
            neg += term;
        }
    }
    Ok(pos - neg)
}

/// `d_J = Ω(J) - Ω(J+1)` with Ω the alternating binomial sum.
pub fn multiplicity_alternating(big_j: HalfInt, n: usize, j: HalfInt) -> Result<BigUint> {
    check_jnj(big_j, n, j)?;
    let s = ((n as i64 * j.twice() - big_j.twice()) / 2) as u64;
    let width = j.twice() as u64 + 1;
    let here = omega_alternating(s, n as u64, width)?;
    if s == 0 {
        return Ok(here);
    }
    Ok(here - omega_alternating(s - 1, n as u64, width)?)
}

/// Spin-1/2 closed form `C(N, p) - C(N, p-1)`, `p = N/2 - J`.
pub fn multiplicity_spin_half(big_j: HalfInt, n: usize) -> Result<BigUint> {
    check_jnj(big_j, n, HalfInt::HALF)?;
    let p = ((n as i64 - big_j.twice()) / 2) as u64;
    let a = binomial_exact(n as u64, p)?;
    if p == 0 {
        return Ok(a);
    }
    Ok(a - binomial_exact(n as u64, p - 1)?)
}

/// `ln d_J` for spin-1/2 without forming the integers:
/// `ln Γ(N+1) + ln(N-2p+1) - ln Γ(p+1) - ln Γ(N-p+2)`.
pub fn log_multiplicity_spin_half(big_j: HalfInt, n: usize) -> Result<f64> {
    check_jnj(big_j, n, HalfInt::HALF)?;
    let p = ((n as i64 - big_j.twice()) / 2) as f64;
    let nf = n as f64;
    Ok(ln_gamma(nf + 1.0) + (nf - 2.0 * p + 1.0).ln() - ln_gamma(p + 1.0) - ln_gamma(nf - p + 2.0))
}

/// Exact multiplicity; the convolution and the alternating sum must agree.
pub fn multiplicity(big_j: HalfInt, n: usize, j: HalfInt) -> Result<BigUint> {
    let a = multiplicity_alternating(big_j, n, j)?;
    if n * (j.twice() as usize + 1) <= 4096 {
        let b = multiplicity_dp(big_j, n, j)?;
        if a != b {
            return Err(Error::InvalidArgument(format!(
                "multiplicity methods disagree for J={big_j}, N={n}, j={j}"
            )));
        }
    }
    Ok(a)
}

/// One irreducible block of the decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub j: HalfInt,
    /// `J_max - J`; equals `N/2 - J` for spin-1/2.
    pub p: HalfInt,
    pub multiplicity: Multiplicity,
    /// `-(I/2)([J]_q[J+1]_q - K_q)`, no Zeeman shift.
    pub energy: f64,
}

/// Block energy at the configuration's effective coupling and deformation.
pub fn block_energy(big_j: HalfInt, coupling: f64, d: DeformationParam, k_q: f64) -> f64 {
    let x = big_j.value();
    -0.5 * coupling * (q_number(x, d) * q_number(x + 1.0, d) - k_q)
}

/// All blocks, highest `J` first.
pub fn blocks(cfg: &ModelConfig) -> Result<Vec<Block>> {
    cfg.validate()?;
    let d = cfg.deformation()?;
    let k_q = cfg.casimir_constant()?;
    let coupling = cfg.effective_coupling();
    let top: HalfInt = cfg.spins.iter().fold(HalfInt::ZERO, |a, &b| a + b);
    let n = cfg.n_sites;

    let mults: Vec<(HalfInt, Multiplicity)> = match cfg.uniform_spin() {
        Some(j) if j == HalfInt::HALF => {
            let js: Vec<HalfInt> = (0..=n / 2).map(|p| top - HalfInt::from_int(p as i64)).collect();
            if n > EXACT_MULTIPLICITY_LIMIT {
                js.par_iter()
                    .map(|&bj| Ok((bj, Multiplicity::Log(log_multiplicity_spin_half(bj, n)?))))
                    .collect::<Result<_>>()?
            } else {
                spin_half_exact_table(n)
                    .into_iter()
                    .zip(js)
                    .map(|(d, bj)| (bj, Multiplicity::Exact(d)))
                    .collect()
            }
        }
        _ => {
            let counts = projection_counts_mixed(&cfg.spins);
            let top_twice = top.twice();
            (0..=top_twice / 2)
                .map(|k| top - HalfInt::from_int(k))
                .filter(|bj| bj.twice() >= 0)
                .map(|bj| (bj, Multiplicity::Exact(block_from_counts(&counts, top_twice, bj))))
                .filter(|(_, m)| m.exact().is_some_and(|d| !d.is_zero()))
                .collect()
        }
    };

    mults
        .into_iter()
        .map(|(bj, multiplicity)| {
            let energy = block_energy(bj, coupling, d, k_q);
            if !energy.is_finite() {
                return Err(Error::NonFinite(format!("block energy at J={bj}")));
            }
            Ok(Block { j: bj, p: top - bj, multiplicity, energy })
        })
        .collect()
}

/// `d_J` for `p = 0..=N/2` using the running binomial `C(N, p)`.
fn spin_half_exact_table(n: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n / 2 + 1);
    let mut prev = BigUint::zero();
    let mut cur = BigUint::one();
    for p in 0..=n / 2 {
        out.push(&cur - &prev);
        let next = &cur * BigUint::from(n - p) / BigUint::from(p + 1);
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    #[serde(rename = "J")]
    pub j: HalfInt,
    pub p: HalfInt,
    pub multiplicity: Multiplicity,
    /// Zeeman label; present only when the field is on.
    pub m: Option<HalfInt>,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "E_corr")]
    pub energy_corr: f64,
}

impl SpectrumLine {
    /// Number of states the line stands for: `d(2J+1)` at zero field, `d` otherwise.
    pub fn log_weight(&self) -> f64 {
        let ln_d = self.multiplicity.ln();
        match self.m {
            Some(_) => ln_d,
            None => ln_d + (self.j.multiplet_dim() as f64).ln(),
        }
    }
}

/// Minimum over all blocks (and Zeeman lines) of the raw energy.
pub fn ground_energy(cfg: &ModelConfig) -> Result<f64> {
    let gh = (cfg.gamma * cfg.field).abs();
    Ok(blocks(cfg)?
        .iter()
        .map(|b| b.energy - gh * b.j.value())
        .fold(f64::INFINITY, f64::min))
}

/// Analytic spectrum, highest `J` first and `m` descending within a block.
pub fn analytic_levels(cfg: &ModelConfig) -> Result<Vec<SpectrumLine>> {
    let blocks = blocks(cfg)?;
    let e0 = ground_energy(cfg)?;
    let gh = cfg.gamma * cfg.field;
    let mut lines = Vec::new();
    for b in blocks {
        if cfg.field == 0.0 {
            lines.push(SpectrumLine {
                j: b.j,
                p: b.p,
                multiplicity: b.multiplicity,
                m: None,
                energy: b.energy,
                energy_corr: b.energy - e0,
            });
        } else {
            for m in b.j.projections() {
                let e = b.energy - gh * m.value();
                lines.push(SpectrumLine {
                    j: b.j,
                    p: b.p,
                    multiplicity: b.multiplicity.clone(),
                    m: Some(m),
                    energy: e,
                    energy_corr: (e - e0).max(0.0),
                });
            }
        }
    }
    Ok(lines)
}

/// Every eigenvalue repeated by its degeneracy, ascending. Exact mode only.
pub fn expand_multiset(lines: &[SpectrumLine]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in lines {
        let d = line
            .multiplicity
            .exact()
            .and_then(|d| d.to_usize())
            .ok_or_else(|| Error::InvalidArgument("multiset expansion needs small exact multiplicities".into()))?;
        let count = if line.m.is_some() { d } else { d * line.j.multiplet_dim() };
        out.extend(std::iter::repeat_n(line.energy, count));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub center: f64,
    /// Natural log of the number of states in the bin; `None` when empty.
    pub log_weight: Option<f64>,
    /// State count, possibly `inf` for astronomically large systems.
    pub weight: f64,
    pub fraction: f64,
}

/// Histogram of `E_corr` over `bins` uniform bins on `[0, max E_corr]`.
/// Bins are closed on the right; the first bin also contains 0.
pub fn density_of_states(lines: &[SpectrumLine], bins: usize) -> Result<Vec<HistogramBin>> {
    if lines.is_empty() {
        return Err(Error::InvalidArgument("density of states of an empty spectrum".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let max = lines.iter().map(|l| l.energy_corr).fold(0.0, f64::max);
    let bins = if max > 0.0 { bins } else { 1 };
    let width = if max > 0.0 { max / bins as f64 } else { 0.0 };
    let mut logs: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for line in lines {
        let k = if width > 0.0 {
            ((line.energy_corr / width).ceil() as usize).clamp(1, bins) - 1
        } else {
            0
        };
        logs[k].push(line.log_weight());
    }
    let per_bin: Vec<Option<f64>> =
        logs.iter().map(|l| (!l.is_empty()).then(|| log_sum_exp(l))).collect();
    let total = log_sum_exp(&per_bin.iter().flatten().copied().collect::<Vec<_>>());
    Ok(per_bin
        .into_iter()
        .enumerate()
        .map(|(k, lw)| {
            let lower = k as f64 * width;
            let upper = if k + 1 == bins { max } else { (k + 1) as f64 * width };
            HistogramBin {
                lower,
                upper,
                center: 0.5 * (lower + upper),
                log_weight: lw,
                weight: lw.map_or(0.0, f64::exp),
                fraction: lw.map_or(0.0, |l| (l - total).exp()),
            }
        })
        .collect())
}

/// Full ascending spectrum of a Hermitian matrix by dense eigendecomposition,
/// with a per-eigenpair residual check.
pub fn diagonalize_oracle(h: &OperatorMatrix) -> Result<Vec<f64>> {
    let defect = h.hermitian_defect();
    if defect > 1e-10 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let m = h.as_matrix();
    let eig = SymmetricEigen::new(m.clone());
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let tolerance = 1e-9 * norm;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let residual = (m * v - v * num_complex::Complex64::new(lambda, 0.0)).norm();
        if residual > tolerance {
            return Err(Error::Residual { residual, tolerance });
        }
    }
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Largest `|a_k - b_k|` between two sorted spectra, relative to their scale.
pub fn spectrum_deviation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let scale = a.iter().chain(b).map(|x| x.abs()).fold(1.0, f64::max);
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale)
}
