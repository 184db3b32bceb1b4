//! Tensor-product layout, Kronecker embedding and the N-fold coproducts.
//!
//! Site 1 is the leftmost (most significant) tensor factor. The deformed
//! coproduct dresses site `i` with `q^{-L_z/2}` on every site to its left and
//! `q^{+L_z/2}` on every site to its right:
//!
//! ```text
//! Δ(L±) = Σ_i  q^{-L_z/2} ⊗ … ⊗ q^{-L_z/2} ⊗ L± ⊗ q^{L_z/2} ⊗ … ⊗ q^{L_z/2}
//! ```

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::matrix::{diag_left, OperatorMatrix};
use crate::qarith::{q_number, DeformationParam};
use crate::rep::{su2_generators, suq2_generators, SpinRep};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteLayout {
    spins: Vec<HalfInt>,
    dims: Vec<usize>,
    total_dim: usize,
}

impl SiteLayout {
    pub fn new(spins: Vec<HalfInt>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one site".into()));
        }
        if let Some(bad) = spins.iter().find(|j| j.twice() < 0) {
            return Err(Error::InvalidSpin(bad.to_string()));
        }
        let dims: Vec<usize> = spins.iter().map(|j| j.multiplet_dim()).collect();
        let total_dim = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidArgument("total dimension overflows usize".into()))?;
        Ok(SiteLayout { spins, dims, total_dim })
    }

    pub fn uniform(n: usize, j: HalfInt) -> Result<Self> {
        Self::new(vec![j; n])
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[HalfInt] {
        &self.spins
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn check_cap(&self, cap: usize) -> Result<()> {
        if self.total_dim > cap {
            return Err(Error::SizeCapExceeded { dim: self.total_dim, cap });
        }
        Ok(())
    }

    /// Layout of the sites `range` (0-based, half-open).
    pub fn sublayout(&self, range: std::ops::Range<usize>) -> Result<SiteLayout> {
        SiteLayout::new(self.spins[range].to_vec())
    }

    /// Per-site projection `m_i` for every product-basis index (site 1 first).
    pub fn projections(&self) -> Vec<Vec<f64>> {
        let n = self.n_sites();
        let mut out = Vec::with_capacity(self.total_dim);
        for idx in 0..self.total_dim {
            let mut rem = idx;
            let mut ms = vec![0.0; n];
            for s in (0..n).rev() {
                let k = rem % self.dims[s];
                rem /= self.dims[s];
                ms[s] = self.spins[s].value() - k as f64;
            }
            out.push(ms);
        }
        out
    }

    /// Human-readable product-basis label, e.g. `"1/2|-1/2"`.
    pub fn basis_label(&self, idx: usize) -> String {
        let mut rem = idx;
        let mut parts = vec![String::new(); self.n_sites()];
        for s in (0..self.n_sites()).rev() {
            let k = rem % self.dims[s];
            rem /= self.dims[s];
            parts[s] = (self.spins[s] - HalfInt::from_twice(2 * k as i64)).to_string();
        }
        parts.join("|")
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on the 1-based `site`.
pub fn embed(op: &OperatorMatrix, site: usize, layout: &SiteLayout) -> Result<OperatorMatrix> {
    if site == 0 || site > layout.n_sites() {
        return Err(Error::InvalidArgument(format!(
            "site {site} out of range 1..={}",
            layout.n_sites()
        )));
    }
    let d = layout.dims[site - 1];
    if op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.dim() });
    }
    let left: usize = layout.dims[..site - 1].iter().product();
    let right: usize = layout.dims[site..].iter().product();
    let mut out = OperatorMatrix::zeros(layout.total_dim);
    for i in 0..d {
        for k in 0..d {
            let v = op.get(i, k);
            if v.norm() == 0.0 {
                continue;
            }
            for a in 0..left {
                for b in 0..right {
                    out.set((a * d + i) * right + b, (a * d + k) * right + b, v);
                }
            }
        }
    }
    Ok(out)
}

/// Diagonal of the collective `Σ_i L_z^{(i)}`.
pub fn collective_z_diagonal(layout: &SiteLayout) -> Vec<f64> {
    layout.projections().into_iter().map(|ms| ms.iter().sum()).collect()
}

/// `Δ^{(N)}(L_z) = Σ_i L_z^{(i)}`, identical for the deformed and classical algebras.
pub fn coproduct_z(layout: &SiteLayout) -> OperatorMatrix {
    OperatorMatrix::from_real_diagonal(&collective_z_diagonal(layout))
}

fn site_reps(layout: &SiteLayout, d: DeformationParam) -> Result<Vec<SpinRep>> {
    layout
        .spins
        .iter()
        .map(|&j| if d.is_undeformed() { su2_generators(j) } else { suq2_generators(j, d) })
        .collect()
}

/// `(Σ_i J+^{(i)}, Σ_i J-^{(i)})`.
pub fn coproduct_pm_undeformed(layout: &SiteLayout) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let reps = site_reps(layout, DeformationParam::UNDEFORMED)?;
    let mut plus = OperatorMatrix::zeros(layout.total_dim);
    for (i, rep) in reps.iter().enumerate() {
        plus += &embed(&rep.plus, i + 1, layout)?;
    }
    let minus = plus.adjoint();
    Ok((plus, minus))
}

/// Deformed `(Δ^{(N)}(L+), Δ^{(N)}(L-))`.
///
/// The dressings are diagonal in the product basis and commute with the
/// single-site ladder operator they surround, so each term is a diagonal
/// left-multiplication of the embedded `L±^{(i)}`.
pub fn coproduct_pm_deformed(
    layout: &SiteLayout,
    d: DeformationParam,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let reps = site_reps(layout, d)?;
    let projections = layout.projections();
    let mut plus = OperatorMatrix::zeros(layout.total_dim);
    for (i, rep) in reps.iter().enumerate() {
        let dressing: Vec<f64> = projections
            .iter()
            .map(|ms| {
                let left: f64 = ms[..i].iter().sum();
                let right: f64 = ms[i + 1..].iter().sum();
                d.q_pow(0.5 * (right - left))
            })
            .collect();
        plus += &diag_left(&dressing, &embed(&rep.plus, i + 1, layout)?);
    }
    let minus = plus.adjoint();
    Ok((plus, minus))
}

/// `Δ^{(N)}(L+)` built by `Δ^{(k+1)} = (Δ^{(k)} ⊗ id) ∘ Δ`, i.e.
/// `Δ^{(k)}(L+) ⊗ q^{L_z/2} + q^{-Δ^{(k)}(L_z)/2} ⊗ L+`.
pub fn coproduct_plus_left_iterated(layout: &SiteLayout, d: DeformationParam) -> Result<OperatorMatrix> {
    let reps = site_reps(layout, d)?;
    let mut acc_plus = reps[0].plus.clone();
    let mut acc_z = reps[0].z.clone();
    for rep in &reps[1..] {
        let q_half_z = rep.z.map_diagonal(|m| d.q_pow(0.5 * m))?;
        let q_minus_acc = acc_z.map_diagonal(|m| d.q_pow(-0.5 * m))?;
        let next_plus = &acc_plus.kron(&q_half_z) + &q_minus_acc.kron(&rep.plus);
        let next_z = &acc_z.kron(&OperatorMatrix::identity(rep.dim()))
            + &OperatorMatrix::identity(acc_z.dim()).kron(&rep.z);
        acc_plus = next_plus;
        acc_z = next_z;
    }
    Ok(acc_plus)
}

/// `Δ^{(N)}(L+)` built by `Δ^{(k+1)} = (id ⊗ Δ^{(k)}) ∘ Δ`, i.e.
/// `L+ ⊗ q^{Δ^{(k)}(L_z)/2} + q^{-L_z/2} ⊗ Δ^{(k)}(L+)`.
pub fn coproduct_plus_right_iterated(layout: &SiteLayout, d: DeformationParam) -> Result<OperatorMatrix> {
    let reps = site_reps(layout, d)?;
    let last = reps.len() - 1;
    let mut acc_plus = reps[last].plus.clone();
    let mut acc_z = reps[last].z.clone();
    for rep in reps[..last].iter().rev() {
        let q_half_acc = acc_z.map_diagonal(|m| d.q_pow(0.5 * m))?;
        let q_minus_z = rep.z.map_diagonal(|m| d.q_pow(-0.5 * m))?;
        let next_plus = &rep.plus.kron(&q_half_acc) + &q_minus_z.kron(&acc_plus);
        let next_z = &rep.z.kron(&OperatorMatrix::identity(acc_z.dim()))
            + &OperatorMatrix::identity(rep.dim()).kron(&acc_z);
        acc_plus = next_plus;
        acc_z = next_z;
    }
    Ok(acc_plus)
}

/// Applies `[·]_q` entrywise to a real diagonal operator.
pub fn q_bracket_of_diagonal(op: &OperatorMatrix, d: DeformationParam) -> Result<OperatorMatrix> {
    op.map_diagonal(|x| q_number(x, d))
}
