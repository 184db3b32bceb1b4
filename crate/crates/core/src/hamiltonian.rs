//! Model configuration and Hamiltonian assembly.
//!
//! Two routes build the deformed Hamiltonian. The coalgebra route multiplies
//! the collective ladder operators; the explicit route sums the expanded
//! single-site, pair, diagonal and constant terms one by one. `build_qks_verified`
//! runs both and refuses to return a matrix if they disagree.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coalgebra::{collective_z_diagonal, coproduct_pm_deformed, coproduct_pm_undeformed, SiteLayout};
use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::matrix::OperatorMatrix;
use crate::qarith::{q_number, DeformationParam};
use crate::rep::{su2_generators, suq2_generators, SpinRep};

pub const DEFAULT_SIZE_CAP: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    #[default]
    Raw,
    /// `I -> I/N`, `eta -> eta/N`.
    Thermodynamic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_sites: usize,
    pub spins: Vec<HalfInt>,
    /// `I > 0` ferromagnetic, `I < 0` antiferromagnetic.
    pub coupling: f64,
    pub field: f64,
    pub gamma: f64,
    pub eta: f64,
    pub scaling: Scaling,
    pub k_b: f64,
    pub size_cap: usize,
}

impl ModelConfig {
    /// `n` sites of spin `j`, `I = 1`, no field, no deformation, raw scaling.
    pub fn uniform(n: usize, j: HalfInt) -> Self {
        ModelConfig {
            n_sites: n,
            spins: vec![j; n],
            coupling: 1.0,
            field: 0.0,
            gamma: 1.0,
            eta: 0.0,
            scaling: Scaling::Raw,
            k_b: 1.0,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    pub fn spin_half(n: usize) -> Self {
        Self::uniform(n, HalfInt::HALF)
    }

    pub fn mixed(spins: Vec<HalfInt>) -> Self {
        let mut cfg = Self::uniform(spins.len(), HalfInt::HALF);
        cfg.spins = spins;
        cfg
    }

    pub fn with_coupling(mut self, i: f64) -> Self {
        self.coupling = i;
        self
    }

    pub fn with_field(mut self, h: f64) -> Self {
        self.field = h;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn with_size_cap(mut self, cap: usize) -> Self {
        self.size_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if self.spins.len() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: self.spins.len() });
        }
        if let Some(bad) = self.spins.iter().find(|j| j.twice() < 0) {
            return Err(Error::InvalidSpin(bad.to_string()));
        }
        for (name, v) in [
            ("I", self.coupling),
            ("h", self.field),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("k_B", self.k_b),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if self.k_b <= 0.0 {
            return Err(Error::InvalidArgument("k_B must be positive".into()));
        }
        Ok(())
    }

    fn scale_factor(&self) -> f64 {
        match self.scaling {
            Scaling::Raw => 1.0,
            Scaling::Thermodynamic => 1.0 / self.n_sites as f64,
        }
    }

    /// Coupling actually entering the Hamiltonian.
    pub fn effective_coupling(&self) -> f64 {
        self.coupling * self.scale_factor()
    }

    /// Deformation actually entering the Hamiltonian.
    pub fn deformation(&self) -> Result<DeformationParam> {
        DeformationParam::new(self.eta * self.scale_factor())
    }

    /// The common site spin, if all sites carry the same one.
    pub fn uniform_spin(&self) -> Option<HalfInt> {
        let first = *self.spins.first()?;
        self.spins.iter().all(|&j| j == first).then_some(first)
    }

    pub fn layout(&self) -> Result<SiteLayout> {
        self.validate()?;
        SiteLayout::new(self.spins.clone())
    }

    /// `K_q = Σ_i [j_i]_q [j_i + 1]_q`.
    pub fn casimir_constant(&self) -> Result<f64> {
        let d = self.deformation()?;
        Ok(self
            .spins
            .iter()
            .map(|j| q_number(j.value(), d) * q_number(j.value() + 1.0, d))
            .sum())
    }

    fn checked_layout(&self) -> Result<SiteLayout> {
        let layout = self.layout()?;
        layout.check_cap(self.size_cap)?;
        Ok(layout)
    }
}

fn zeeman(cfg: &ModelConfig, layout: &SiteLayout) -> Vec<f64> {
    let gh = cfg.gamma * cfg.field;
    collective_z_diagonal(layout).into_iter().map(|m| -gh * m).collect()
}

fn add_diagonal(h: &mut OperatorMatrix, diag: &[f64]) {
    for (k, &v) in diag.iter().enumerate() {
        let cur = h.get(k, k);
        h.set(k, k, cur + v);
    }
}

/// Scale-aware agreement check between two assembly routes.
fn require_agreement(a: &OperatorMatrix, b: &OperatorMatrix, rel_tol: f64) -> Result<f64> {
    let deviation = a.max_abs_diff(b);
    let tolerance = rel_tol * a.max_abs().max(b.max_abs()).max(1.0);
    if deviation > tolerance {
        return Err(Error::RouteMismatch { deviation, tolerance });
    }
    Ok(deviation)
}

fn check_hermitian(h: &OperatorMatrix) -> Result<()> {
    let defect = h.hermitian_defect();
    if defect > 1e-12 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Undeformed Hamiltonian via `Δ_0(C) - Σ C^{(i)}`, cross-checked against the
/// pairwise Heisenberg sum.
pub fn build_ks(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let d = cfg.deformation()?;
    if !d.is_undeformed() {
        return Err(Error::InvalidArgument("build_ks requires eta = 0".into()));
    }
    let layout = cfg.checked_layout()?;
    let coalgebra = ks_coalgebra(cfg, &layout)?;
    let pairwise = build_ks_pairwise(cfg)?;
    require_agreement(&coalgebra, &pairwise, 1e-12)?;
    check_hermitian(&coalgebra)?;
    Ok(coalgebra)
}

fn ks_coalgebra(cfg: &ModelConfig, layout: &SiteLayout) -> Result<OperatorMatrix> {
    let (plus, minus) = coproduct_pm_undeformed(layout)?;
    let mz = collective_z_diagonal(layout);
    let k: f64 = cfg.spins.iter().map(|j| j.value() * (j.value() + 1.0)).sum();
    let mut c = &minus * &plus;
    add_diagonal(&mut c, &mz.iter().map(|m| m * (m + 1.0) - k).collect::<Vec<_>>());
    let mut h = c.scale(-0.5 * cfg.effective_coupling());
    add_diagonal(&mut h, &zeeman(cfg, layout));
    Ok(h)
}

/// `-I Σ_{i<j} J_i·J_j - γh Σ J_z^{(i)}`, assembled pair by pair.
pub fn build_ks_pairwise(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let layout = cfg.checked_layout()?;
    let reps: Vec<SpinRep> = cfg.spins.iter().map(|&j| su2_generators(j)).collect::<Result<_>>()?;
    let n = layout.n_sites();
    let dim = layout.total_dim();
    let projections = layout.projections();
    let mut h = OperatorMatrix::zeros(dim);
    let coupling = cfg.effective_coupling();
    for i in 0..n {
        for r in i + 1..n {
            // J_x J_x + J_y J_y = (J+ J- + J- J+)/2
            let mut term = OperatorMatrix::zeros(dim);
            add_local_pair(&mut term, &layout, (i, &reps[i].plus), (r, &reps[r].minus), |_| 0.5);
            add_local_pair(&mut term, &layout, (i, &reps[i].minus), (r, &reps[r].plus), |_| 0.5);
            let zz: Vec<f64> = projections.iter().map(|ms| ms[i] * ms[r]).collect();
            add_diagonal(&mut term, &zz);
            h += &term.scale(-coupling);
        }
    }
    add_diagonal(&mut h, &zeeman(cfg, &layout));
    Ok(h)
}

/// Accumulates `A^{(i)} B^{(r)} · diag(w)` where `w` is evaluated on the
/// per-site indices of the column (input) basis state.
fn add_local_pair(
    out: &mut OperatorMatrix,
    layout: &SiteLayout,
    (i, a): (usize, &OperatorMatrix),
    (r, b): (usize, &OperatorMatrix),
    weight: impl Fn(&[usize]) -> f64,
) {
    let dims = layout.dims();
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for s in (0..n - 1).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let mut idx = vec![0usize; n];
    for col in 0..layout.total_dim() {
        let mut rem = col;
        for s in 0..n {
            idx[s] = rem / strides[s];
            rem %= strides[s];
        }
        let w = weight(&idx);
        if w == 0.0 {
            continue;
        }
        let (ki, kr) = (idx[i], idx[r]);
        for ri in 0..dims[i] {
            let va = a.get(ri, ki);
            if va.norm() == 0.0 {
                continue;
            }
            for rr in 0..dims[r] {
                let vb = b.get(rr, kr);
                if vb.norm() == 0.0 {
                    continue;
                }
                let row = col + ri * strides[i] - ki * strides[i] + rr * strides[r] - kr * strides[r];
                let cur = out.get(row, col);
                out.set(row, col, cur + va * vb * w);
            }
        }
    }
}

/// `-(I/2)(Δ(L-)Δ(L+) + [ΔL_z]_q[ΔL_z + 1]_q - K_q) - γh ΔL_z`.
pub fn build_qks_coalgebra(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let d = cfg.deformation()?;
    let layout = cfg.checked_layout()?;
    let (plus, minus) = coproduct_pm_deformed(&layout, d)?;
    let k_q = cfg.casimir_constant()?;
    let mut c = &minus * &plus;
    let diag: Vec<f64> = collective_z_diagonal(&layout)
        .into_iter()
        .map(|m| q_number(m, d) * q_number(m + 1.0, d) - k_q)
        .collect();
    add_diagonal(&mut c, &diag);
    let mut h = c.scale(-0.5 * cfg.effective_coupling());
    add_diagonal(&mut h, &zeeman(cfg, &layout));
    Ok(h)
}

/// The fully expanded Hamiltonian, term by term:
///
/// ```text
/// single_i = e^{-η Σ_{t<i} L_z^t} (L- L+)^{(i)} e^{η Σ_{k>i} L_z^k}
/// pair_ir  = (e^{η/2} L-^{(i)} L+^{(r)} + e^{-η/2} L+^{(i)} L-^{(r)})
///            · e^{-η L_z^i / 2} e^{η L_z^r / 2} · Π_{t<i} e^{-η L_z^t} · Π_{k>r} e^{η L_z^k}
/// ```
///
/// plus `[ΣL_z]_q [ΣL_z + 1]_q - K_q`, all times `-I/2`, plus the Zeeman term.
pub fn build_qks_explicit(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    let d = cfg.deformation()?;
    let eta = d.eta();
    let layout = cfg.checked_layout()?;
    let reps: Vec<SpinRep> = cfg
        .spins
        .iter()
        .map(|&j| if d.is_undeformed() { su2_generators(j) } else { suq2_generators(j, d) })
        .collect::<Result<_>>()?;
    let n = layout.n_sites();
    let dim = layout.total_dim();
    let projections = layout.projections();
    let ms_of = |idx: &[usize], s: usize| cfg.spins[s].value() - idx[s] as f64;

    let mut inner = OperatorMatrix::zeros(dim);

    // single-site terms; L- L+ is diagonal on each site
    let single_site: Vec<Vec<f64>> = reps
        .iter()
        .map(|rep| (&rep.minus * &rep.plus).real_diagonal())
        .collect::<Result<_>>()?;
    let mut diag = vec![0.0; dim];
    for (k, ms) in projections.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..n {
            let kk = (cfg.spins[i].value() - ms[i]).round() as usize;
            let left: f64 = ms[..i].iter().sum();
            let right: f64 = ms[i + 1..].iter().sum();
            acc += (eta * (right - left)).exp() * single_site[i][kk];
        }
        let m: f64 = ms.iter().sum();
        diag[k] = acc + q_number(m, d) * q_number(m + 1.0, d);
    }
    let k_q = cfg.casimir_constant()?;
    for v in &mut diag {
        *v -= k_q;
    }
    add_diagonal(&mut inner, &diag);

    // pair terms, accumulated in fixed (i, r) order
    let (up, down) = ((0.5 * eta).exp(), (-0.5 * eta).exp());
    for i in 0..n {
        for r in i + 1..n {
            let dressing = |idx: &[usize]| {
                let tail_left: f64 = (0..i).map(|t| ms_of(idx, t)).sum();
                let tail_right: f64 = (r + 1..n).map(|k| ms_of(idx, k)).sum();
                (eta * (-0.5 * ms_of(idx, i) + 0.5 * ms_of(idx, r) - tail_left + tail_right)).exp()
            };
            add_local_pair(&mut inner, &layout, (i, &reps[i].minus), (r, &reps[r].plus), |idx| {
                up * dressing(idx)
            });
            add_local_pair(&mut inner, &layout, (i, &reps[i].plus), (r, &reps[r].minus), |idx| {
                down * dressing(idx)
            });
        }
    }

    let mut h = inner.scale(-0.5 * cfg.effective_coupling());
    add_diagonal(&mut h, &zeeman(cfg, &layout));
    Ok(h)
}

/// Builds by both routes and returns the coalgebra matrix with the
/// entrywise deviation between them.
pub fn build_qks_verified(cfg: &ModelConfig) -> Result<(OperatorMatrix, f64)> {
    let a = build_qks_coalgebra(cfg)?;
    let b = build_qks_explicit(cfg)?;
    let deviation = require_agreement(&a, &b, 1e-10)?;
    check_hermitian(&a)?;
    Ok((a, deviation))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DumpFormat {
    /// One row per line, `re im` pairs separated by spaces.
    Text,
    /// Little-endian `u64` dimension followed by row-major `f64` (re, im) pairs.
    Binary,
}

pub fn dump_matrix(h: &OperatorMatrix, format: DumpFormat, out: &mut impl Write) -> std::io::Result<()> {
    let n = h.dim();
    match format {
        DumpFormat::Text => {
            for i in 0..n {
                let row: Vec<String> = (0..n)
                    .map(|j| {
                        let z = h.get(i, j);
                        format!("{:.16e} {:.16e}", z.re, z.im)
                    })
                    .collect();
                writeln!(out, "{}", row.join(" "))?;
            }
        }
        DumpFormat::Binary => {
            out.write_all(&(n as u64).to_le_bytes())?;
            for i in 0..n {
                for j in 0..n {
                    let z = h.get(i, j);
                    out.write_all(&z.re.to_le_bytes())?;
                    out.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_binary_dump(bytes: &[u8]) -> Result<OperatorMatrix> {
    let bad = || Error::InvalidArgument("truncated matrix dump".into());
    let n = u64::from_le_bytes(bytes.get(..8).ok_or_else(bad)?.try_into().unwrap()) as usize;
    let need = 8 + n * n * 16;
    if bytes.len() != need {
        return Err(bad());
    }
    let mut h = OperatorMatrix::zeros(n);
    let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    for i in 0..n {
        for j in 0..n {
            let off = 8 + (i * n + j) * 16;
            h.set(i, j, Complex64::new(f(off), f(off + 8)));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling() {
        let cfg = ModelConfig::spin_half(10).with_coupling(2.0).with_eta(5.0).with_scaling(Scaling::Thermodynamic);
        assert!((cfg.effective_coupling() - 0.2).abs() < 1e-15);
        assert!((cfg.deformation().unwrap().eta() - 0.5).abs() < 1e-15);
        let raw = cfg.clone().with_scaling(Scaling::Raw);
        assert_eq!(raw.effective_coupling(), 2.0);
    }

    #[test]
    fn validation() {
        let mut cfg = ModelConfig::spin_half(3);
        cfg.spins.pop();
        assert!(cfg.validate().is_err());
        assert!(ModelConfig::spin_half(0).validate().is_err());
        assert!(ModelConfig::spin_half(2).with_eta(f64::NAN).validate().is_err());
        assert!(build_ks(&ModelConfig::spin_half(2).with_eta(0.1)).is_err());
    }

    #[test]
    fn size_cap_enforced() {
        let cfg = ModelConfig::spin_half(4).with_size_cap(8);
        assert!(matches!(build_qks_coalgebra(&cfg), Err(Error::SizeCapExceeded { dim: 16, cap: 8 })));
        assert!(matches!(build_qks_explicit(&cfg), Err(Error::SizeCapExceeded { .. })));
        assert!(matches!(build_ks(&cfg), Err(Error::SizeCapExceeded { .. })));
    }

    #[test]
    fn single_site_is_pure_zeeman() {
        let cfg = ModelConfig::spin_half(1).with_field(0.7).with_gamma(2.0).with_eta(0.4);
        let h = build_qks_coalgebra(&cfg).unwrap();
        let expected = OperatorMatrix::from_real_diagonal(&[-0.7, 0.7]);
        assert!(h.max_abs_diff(&expected) < 1e-14);
        assert!(build_ks(&cfg.clone().with_eta(0.0)).unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn two_sites_exchange_operator() {
        // -(I/2)(P - 1/2) with P the swap
        for i in [1.0, -1.0, 0.3] {
            let h = build_ks(&ModelConfig::spin_half(2).with_coupling(i)).unwrap();
            #[rustfmt::skip]
            let p = OperatorMatrix::from_real_rows(4, &[
                0.5, 0.0, 0.0, 0.0,
                0.0, -0.5, 1.0, 0.0,
                0.0, 1.0, -0.5, 0.0,
                0.0, 0.0, 0.0, 0.5,
            ]).unwrap();
            assert!(h.max_abs_diff(&p.scale(-i / 2.0)) < 1e-14);
        }
    }

    #[test]
    fn binary_dump_round_trip() {
        let h = build_qks_coalgebra(&ModelConfig::spin_half(3).with_eta(0.6).with_field(0.2)).unwrap();
        let mut buf = Vec::new();
        dump_matrix(&h, DumpFormat::Binary, &mut buf).unwrap();
        assert_eq!(read_binary_dump(&buf).unwrap(), h);
        assert!(read_binary_dump(&buf[..buf.len() - 1]).is_err());
        let mut text = Vec::new();
        dump_matrix(&h, DumpFormat::Text, &mut text).unwrap();
        assert_eq!(String::from_utf8(text).unwrap().lines().count(), 8);
    }
}
