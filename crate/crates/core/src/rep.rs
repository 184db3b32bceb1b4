//! Single-site spin-j matrices for `U(su(2))` and `U_q(su(2))`.
//!
//! The basis is ordered by descending projection: index `k` carries
//! `m = j - k`, so the z operator reads `diag(j, j-1, ..., -j)`.

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::matrix::{diag_left, diag_right, OperatorMatrix};
use crate::qarith::{q_number, DeformationParam};

#[derive(Clone, Debug)]
pub struct SpinRep {
    pub j: HalfInt,
    pub plus: OperatorMatrix,
    pub minus: OperatorMatrix,
    pub z: OperatorMatrix,
    pub deformation: DeformationParam,
}

impl SpinRep {
    pub fn dim(&self) -> usize {
        self.j.multiplet_dim()
    }

    /// Diagonal of the z operator, `j, j-1, ..., -j`.
    pub fn z_diagonal(&self) -> Vec<f64> {
        self.j.projections().map(HalfInt::value).collect()
    }
}

fn check_spin(j: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return Err(Error::InvalidSpin(j.to_string()));
    }
    Ok(())
}

/// Builds `(plus, z)` from the raising amplitude `a(m)` for `|m> -> |m+1>`.
fn ladder(j: HalfInt, amplitude: impl Fn(f64) -> f64) -> (OperatorMatrix, OperatorMatrix) {
    let dim = j.multiplet_dim();
    let mut plus = OperatorMatrix::zeros(dim);
    let ms: Vec<f64> = j.projections().map(HalfInt::value).collect();
    for k in 1..dim {
        plus.set(k - 1, k, amplitude(ms[k]).into());
    }
    (plus, OperatorMatrix::from_real_diagonal(&ms))
}

/// Spin-j irrep of `su(2)`: `J± |j,m> = sqrt((j∓m)(j±m+1)) |j,m±1>`.
pub fn su2_generators(j: HalfInt) -> Result<SpinRep> {
    check_spin(j)?;
    let jv = j.value();
    let (plus, z) = ladder(j, |m| ((jv - m) * (jv + m + 1.0)).sqrt());
    Ok(SpinRep { j, minus: plus.adjoint(), plus, z, deformation: DeformationParam::UNDEFORMED })
}

/// Spin-j irrep of `U_q(su(2))`: `L± |j,m> = sqrt([j∓m]_q [j±m+1]_q) |j,m±1>`.
pub fn suq2_generators(j: HalfInt, d: DeformationParam) -> Result<SpinRep> {
    check_spin(j)?;
    let jv = j.value();
    let (plus, z) = ladder(j, |m| (q_number(jv - m, d) * q_number(jv + m + 1.0, d)).sqrt());
    Ok(SpinRep { j, minus: plus.adjoint(), plus, z, deformation: d })
}

/// Deformed generators obtained from the classical ones by the diagonal
/// functional `F(J_z) = sqrt([j-J_z]_q [j+J_z+1]_q / ((j-J_z)(j+J_z+1)))`:
/// `L+ = J+ F`, `L- = F J-`. Entries where the denominator vanishes are set
/// to zero; they only ever multiply the annihilated top state.
pub fn deforming_functional(j: HalfInt, d: DeformationParam) -> Result<SpinRep> {
    let classical = su2_generators(j)?;
    let jv = j.value();
    let f: Vec<f64> = j
        .projections()
        .map(|m| {
            let m = m.value();
            let den = (jv - m) * (jv + m + 1.0);
            if den == 0.0 {
                0.0
            } else {
                (q_number(jv - m, d) * q_number(jv + m + 1.0, d) / den).sqrt()
            }
        })
        .collect();
    let plus = diag_right(&classical.plus, &f);
    let minus = diag_left(&f, &classical.minus);
    Ok(SpinRep { j, plus, minus, z: classical.z, deformation: d })
}

/// `C_q = L- L+ + [L_z]_q [L_z + 1]_q`.
pub fn q_casimir_matrix(rep: &SpinRep) -> OperatorMatrix {
    let d = rep.deformation;
    let diag: Vec<f64> =
        rep.z_diagonal().into_iter().map(|m| q_number(m, d) * q_number(m + 1.0, d)).collect();
    &(&rep.minus * &rep.plus) + &OperatorMatrix::from_real_diagonal(&diag)
}

/// The equivalent factorisation `L+ L- + [L_z]_q [L_z - 1]_q`.
pub fn q_casimir_matrix_lowering(rep: &SpinRep) -> OperatorMatrix {
    let d = rep.deformation;
    let diag: Vec<f64> =
        rep.z_diagonal().into_iter().map(|m| q_number(m, d) * q_number(m - 1.0, d)).collect();
    &(&rep.plus * &rep.minus) + &OperatorMatrix::from_real_diagonal(&diag)
}

/// Casimir eigenvalue `[j]_q [j+1]_q` of the spin-j irrep.
pub fn casimir_eigenvalue(j: HalfInt, d: DeformationParam) -> f64 {
    q_number(j.value(), d) * q_number(j.value() + 1.0, d)
}
