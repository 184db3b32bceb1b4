//! q-Clebsch–Gordan coefficients and the coupled (block-diagonal) basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coalgebra::SiteLayout;
use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::matrix::OperatorMatrix;
use crate::qarith::{log_q_number, log_sum_exp, q_factorial_log, q_number, DeformationParam};

fn int_of(x: HalfInt, what: &str) -> Result<u64> {
    match x.as_int() {
        Some(v) if v >= 0 => Ok(v as u64),
        _ => Err(Error::InvalidArgument(format!("{what} = {x} is not a non-negative integer"))),
    }
}

fn check_projection(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return Err(Error::InvalidSpin(j.to_string()));
    }
    if m.abs() > j || !(j - m).is_integer() {
        return Err(Error::InvalidArgument(format!("m = {m} is not a projection of j = {j}")));
    }
    Ok(())
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

fn ladder(j: HalfInt, m: f64, d: DeformationParam) -> f64 {
    // sqrt([j - m][j + m + 1])
    (q_number(j.value() - m, d) * q_number(j.value() + m + 1.0, d)).sqrt()
}

/// The coupled multiplet `|j M⟩` inside `j1 ⊗ j2`, one row per `M` (descending),
/// each indexed by the position of `m1` in `j1.projections()`.
///
/// The highest weight follows from `Δ(L+)ψ = 0`, a two-term ratio
/// `c(m1+1)/c(m1) = -q^{(j+1)/2} √([j1-m1][j1+m1+1]) / √([j2+m2][j2-m2+1])`
/// with no cancellation; rows down to `M = 0` come from applying `Δ(L-)`.
/// Rows with `M < 0` use the reflection
/// `⟨j1 m1; j2 m2 | j M⟩_q = (-1)^{j1+j2-j} ⟨j1 -m1; j2 -m2 | j -M⟩_{1/q}`,
/// which halves the number of lowering steps. The sign convention makes
/// `⟨j1 j1; j2 j-j1 | j j⟩` positive.
pub fn qcg_multiplet(j1: HalfInt, j2: HalfInt, j: HalfInt, d: DeformationParam) -> Result<Vec<Vec<f64>>> {
    let mut rows = lowered_rows(j1, j2, j, d)?;
    let dim = j.multiplet_dim();
    if rows.len() < dim {
        let mirror = lowered_rows(j1, j2, j, DeformationParam::new(-d.eta())?)?;
        let sign = if ((j1 + j2 - j).twice() / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for k in rows.len()..dim {
            let mut row = mirror[dim - 1 - k].clone();
            row.reverse();
            row.iter_mut().for_each(|x| *x *= sign);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Rows `M = j, j-1, …` down to `M >= 0`.
fn lowered_rows(j1: HalfInt, j2: HalfInt, j: HalfInt, d: DeformationParam) -> Result<Vec<Vec<f64>>> {
    if j1.twice() < 0 || j2.twice() < 0 {
        return Err(Error::InvalidSpin(format!("{j1}, {j2}")));
    }
    if j < (j1 - j2).abs() || j > j1 + j2 || !(j1 + j2 - j).is_integer() {
        return Err(Error::InvalidArgument(format!("j = {j} not in {j1} ⊗ {j2}")));
    }
    let reach = d.eta().abs() * (j1 + j2 + HalfInt::ONE).value();
    if reach > 600.0 {
        return Err(Error::InvalidArgument(format!("|eta|·(j1+j2+1) = {reach} overflows double precision")));
    }
    let eta = d.eta();
    let m1s: Vec<HalfInt> = j1.projections().collect();
    let in_j2 = |m2: HalfInt| m2.abs() <= j2;

    // highest weight, built upward from the smallest admissible m1
    let mut top = vec![0.0; m1s.len()];
    let lo = m1s.iter().rposition(|&m1| in_j2(j - m1)).unwrap();
    let hi = m1s.iter().position(|&m1| in_j2(j - m1)).unwrap();
    let mut log_c = vec![0.0; m1s.len()];
    for k in (hi..lo).rev() {
        let m1 = m1s[k + 1].value();
        let m2 = j.value() - m1 - 1.0;
        log_c[k] = log_c[k + 1] + ladder(j1, m1, d).ln() + 0.5 * eta * (j.value() + 1.0)
            - ladder(j2, m2, d).ln();
    }
    let norm = log_sum_exp(&log_c[hi..=lo].iter().map(|l| 2.0 * l).collect::<Vec<_>>()) / 2.0;
    for k in hi..=lo {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        top[k] = sign * (log_c[k] - norm).exp();
    }

    let mut rows = vec![top];
    for big_m in j.projections().skip(1).take_while(|m| m.twice() >= 0) {
        let prev = rows.last().unwrap();
        let above = big_m.value() + 1.0;
        let scale = ladder(j, -above, d);
        let mut row = vec![0.0; m1s.len()];
        for (k, &m1) in m1s.iter().enumerate() {
            let m2 = big_m - m1;
            if !in_j2(m2) {
                continue;
            }
            let mut x = 0.0;
            // L- on site 1 from (m1 + 1, m2)
            if k > 0 {
                x += prev[k - 1] * ladder(j1, -(m1.value() + 1.0), d) * d.q_pow(0.5 * m2.value());
            }
            // L- on site 2 from (m1, m2 + 1)
            if in_j2(m2 + HalfInt::ONE) {
                x += prev[k] * d.q_pow(-0.5 * m1.value()) * ladder(j2, -(m2.value() + 1.0), d);
            }
            row[k] = x / scale;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `⟨j1 m1; j2 m2 | j m⟩_q`, read off [`qcg_multiplet`].
pub fn qcg_coefficient(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
    d: DeformationParam,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j, m)?;
    let rows = qcg_multiplet(j1, j2, j, d)?;
    if m != m1 + m2 {
        return Ok(0.0);
    }
    let row = ((j - m).twice() / 2) as usize;
    let col = ((j1 - m1).twice() / 2) as usize;
    Ok(rows[row][col])
}

/// `⟨j1 m1; j2 m2 | j m⟩_q` from the closed-form alternating sum:
///
/// ```text
/// δ_{m,m1+m2} q^{(j1 m2 - j2 m1)/2 - a(j+j1+j2+1)/4}
///   × sqrt([2j+1][j+m]![j2-m2]![j+j1-j2]![a]![j+j1+j2+1]!
///          / ([j-m]![j1-m1]![j1+m1]![j2+m2]![j-j1+j2]!))
///   × Σ_n (-1)^{a+n} q^{n(j1+m1)/2} [2j2-n]![j1+j2-m-n]!
///          / ([n]![j2-m2-n]![a-n]![j+j1+j2-n+1]!)
/// ```
///
/// with `a = j1 + j2 - j` and `n` from 0 to `min(a, j2 - m2)`. Factorials are
/// summed in the log domain; the alternating sum is rescaled by its largest term.
/// The sum cancels badly once `|η|·(j1 + j2)` reaches a few units, so this
/// serves as a cross-check at small deformation; use [`qcg_coefficient`].
pub fn qcg_coefficient_closed_form(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
    d: DeformationParam,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j, m)?;
    if j < (j1 - j2).abs() || j > j1 + j2 || !(j1 + j2 - j).is_integer() {
        return Err(Error::InvalidArgument(format!("j = {j} not in {j1} ⊗ {j2}")));
    }
    if m != m1 + m2 {
        return Ok(0.0);
    }
    let eta = d.eta();
    let lf = |x: HalfInt, what: &str| -> Result<f64> { Ok(q_factorial_log(int_of(x, what)?, d)) };
    let a = j1 + j2 - j;
    let big = j + j1 + j2 + HalfInt::ONE;

    let ln_root = 0.5
        * (log_q_number((j + j + HalfInt::ONE).value(), d)?
            + lf(j + m, "j+m")?
            + lf(j2 - m2, "j2-m2")?
            + lf(j + j1 - j2, "j+j1-j2")?
            + lf(a, "a")?
            + lf(big, "j+j1+j2+1")?
            - lf(j - m, "j-m")?
            - lf(j1 - m1, "j1-m1")?
            - lf(j1 + m1, "j1+m1")?
            - lf(j2 + m2, "j2+m2")?
            - lf(j - j1 + j2, "j-j1+j2")?);
    let prefactor = eta * (0.5 * (j1.value() * m2.value() - j2.value() * m1.value())
        - 0.25 * a.value() * big.value());

    let a_int = int_of(a, "a")?;
    let upper = a_int.min(int_of(j2 - m2, "j2-m2")?);
    let mut terms = Vec::with_capacity(upper as usize + 1);
    for n in 0..=upper {
        let nh = HalfInt::from_int(n as i64);
        let ln_mag = lf(j2 + j2 - nh, "2j2-n")?
            + eta * n as f64 * (j1 + m1).value() / 2.0
            + lf(j1 + j2 - m - nh, "j1+j2-m-n")?
            - q_factorial_log(n, d)
            - lf(j2 - m2 - nh, "j2-m2-n")?
            - lf(a - nh, "a-n")?
            - lf(big - nh, "j+j1+j2-n+1")?;
        let sign = if (a_int + n) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((sign, ln_mag));
    }
    let scale = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let sum = compensated_sum(terms.iter().map(|&(s, l)| s * (l - scale).exp()));
    Ok(sum * (scale + ln_root + prefactor).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockLabel {
    #[serde(rename = "J")]
    pub j: HalfInt,
    /// 1-based copy index among blocks with the same `J`.
    pub copy: usize,
    pub m: HalfInt,
    /// Intermediate spins `J_1 = j_1, J_12, J_123, …, J`.
    pub path: Vec<HalfInt>,
}

/// Unitary change of basis from the product basis to the coupled basis.
/// Column `k` is the coupled vector labelled by `block_labels[k]`.
#[derive(Clone, Debug)]
pub struct CouplingTransform {
    pub matrix: OperatorMatrix,
    pub block_labels: Vec<BlockLabel>,
}

impl CouplingTransform {
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.matrix.dim()).map(|r| self.matrix.get(r, k).re).collect()
    }

    /// Column index of `(J, copy, m)`.
    pub fn find(&self, j: HalfInt, copy: usize, m: HalfInt) -> Option<usize> {
        self.block_labels.iter().position(|l| l.j == j && l.copy == copy && l.m == m)
    }
}

struct Channel {
    path: Vec<HalfInt>,
    /// One vector per `m`, descending.
    vectors: Vec<Vec<f64>>,
}

impl Channel {
    fn j(&self) -> HalfInt {
        *self.path.last().unwrap()
    }
}

/// Couples the sites left to right, `((j1 ⊗ j2) ⊗ j3) ⊗ …`.
///
/// Blocks come out with `J` descending. Copies of the same `J` are ordered by
/// their intermediate-spin path in descending lexicographic order, so for
/// three spin-1/2 sites copy 1 of `J = 1/2` passes through `J_12 = 1` and
/// copy 2 through `J_12 = 0`. Within a block `m` descends.
pub fn couple_all(layout: &SiteLayout, d: DeformationParam, size_cap: usize) -> Result<CouplingTransform> {
    layout.check_cap(size_cap)?;
    let spins = layout.spins();
    let dims = layout.dims();
    let mut channels = vec![Channel {
        path: vec![spins[0]],
        vectors: (0..dims[0])
            .map(|k| {
                let mut v = vec![0.0; dims[0]];
                v[k] = 1.0;
                v
            })
            .collect(),
    }];
    let mut cur_dim = dims[0];

    for (&js, &ds) in spins.iter().zip(dims).skip(1) {
        let new_dim = cur_dim * ds;
        let mut next = Vec::new();
        for ch in &channels {
            let jp = ch.j();
            let mut jn = jp + js;
            while jn >= (jp - js).abs() {
                let rows = qcg_multiplet(jp, js, jn, d)?;
                let mut vectors = Vec::with_capacity(jn.multiplet_dim());
                for (big_m, row) in jn.projections().zip(&rows) {
                    let mut v = vec![0.0; new_dim];
                    for (k1, m1) in jp.projections().enumerate() {
                        for (k2, m2) in js.projections().enumerate() {
                            if m1 + m2 != big_m {
                                continue;
                            }
                            let c = row[k1];
                            if c == 0.0 {
                                continue;
                            }
                            for (idx, &amp) in ch.vectors[k1].iter().enumerate() {
                                if amp != 0.0 {
                                    v[idx * ds + k2] += c * amp;
                                }
                            }
                        }
                    }
                    vectors.push(v);
                }
                let mut path = ch.path.clone();
                path.push(jn);
                next.push(Channel { path, vectors });
                jn = jn - HalfInt::ONE;
            }
        }
        channels = next;
        cur_dim = new_dim;
    }

    channels.sort_by(|a, b| b.j().cmp(&a.j()).then_with(|| b.path.cmp(&a.path)));
    let dim = layout.total_dim();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    let mut copy = 0usize;
    let mut last_j = None;
    for ch in &channels {
        if last_j == Some(ch.j()) {
            copy += 1;
        } else {
            copy = 1;
            last_j = Some(ch.j());
        }
        for (v, m) in ch.vectors.iter().zip(ch.j().projections()) {
            let col = labels.len();
            for (r, &x) in v.iter().enumerate() {
                matrix[(r, col)] = Complex64::new(x, 0.0);
            }
            labels.push(BlockLabel { j: ch.j(), copy, m, path: ch.path.clone() });
        }
    }
    Ok(CouplingTransform { matrix: OperatorMatrix::from_matrix(matrix)?, block_labels: labels })
}

/// The `J = N/2` state with projection `m` on `N` spin-1/2 sites, obtained by
/// lowering `|↑…↑⟩` with the deformed collective `L-` and normalizing.
pub fn q_dicke_state(n: usize, m: HalfInt, d: DeformationParam) -> Result<Vec<f64>> {
    if n == 0 || n > 30 {
        return Err(Error::InvalidArgument(format!("q-Dicke states need 1 <= N <= 30, got {n}")));
    }
    let top = HalfInt::from_twice(n as i64);
    if m.abs() > top || !(top - m).is_integer() {
        return Err(Error::InvalidArgument(format!("m = {m} invalid for N = {n}")));
    }
    let dim = 1usize << n;
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    let steps = ((top - m).twice() / 2) as usize;
    for _ in 0..steps {
        v = apply_lowering_spin_half(n, &v, d);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(v)
}

/// `Δ(L-)` on spin-1/2 sites, acting on a dense amplitude vector. Bit `N-1-i`
/// of the basis index is 1 when site `i` points down.
pub fn apply_lowering_spin_half(n: usize, v: &[f64], d: DeformationParam) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (idx, &amp) in v.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let m_of = |s: usize| if idx >> (n - 1 - s) & 1 == 0 { 0.5 } else { -0.5 };
        let mut left = 0.0;
        let mut right: f64 = (0..n).map(m_of).sum();
        for i in 0..n {
            let mi = m_of(i);
            right -= mi;
            if mi > 0.0 {
                let target = idx | (1 << (n - 1 - i));
                out[target] += amp * d.q_pow(0.5 * (right - left));
            }
            left += mi;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::q_number;

    fn h(t: i64) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn n2_coefficients() {
        for q in [0.3, 1.0, 2.0, 7.0] {
            let d = DeformationParam::from_q(q).unwrap();
            let s2 = q_number(2.0, d).sqrt();
            let c = qcg_coefficient(h(1), h(1), h(1), h(-1), h(2), h(0), d).unwrap();
            assert!((c - q.powf(-0.25) / s2).abs() < 1e-14);
            let c = qcg_coefficient(h(1), h(-1), h(1), h(1), h(2), h(0), d).unwrap();
            assert!((c - q.powf(0.25) / s2).abs() < 1e-14);
            let s = qcg_coefficient(h(1), h(-1), h(1), h(1), h(0), h(0), d).unwrap();
            assert!((s + q.powf(-0.25) / s2).abs() < 1e-14);
            let s = qcg_coefficient(h(1), h(1), h(1), h(-1), h(0), h(0), d).unwrap();
            assert!((s - q.powf(0.25) / s2).abs() < 1e-14);
            assert_eq!(qcg_coefficient(h(1), h(1), h(1), h(1), h(2), h(0), d).unwrap(), 0.0);
        }
        let c = qcg_coefficient(h(1), h(1), h(1), h(-1), h(2), h(0), DeformationParam::UNDEFORMED).unwrap();
        assert!((c - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_arguments() {
        let d = DeformationParam::UNDEFORMED;
        assert!(qcg_coefficient(h(1), h(3), h(1), h(-1), h(2), h(2), d).is_err());
        assert!(qcg_coefficient(h(1), h(1), h(1), h(-1), h(4), h(0), d).is_err());
        assert!(qcg_coefficient(h(1), h(1), h(1), h(-1), h(1), h(0), d).is_err());
        assert!(qcg_coefficient(h(2), h(1), h(1), h(0), h(1), h(1), d).is_err());
    }

    #[test]
    fn large_spins_stay_finite() {
        let d = DeformationParam::new(0.3).unwrap();
        let c = qcg_coefficient(h(40), h(10), h(40), h(-10), h(40), h(0), d).unwrap();
        assert!(c.is_finite() && c.abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn orthogonality_rows() {
        // Σ_{m1} C(j1 m1 j2 m-m1 | j m) C(j1 m1 j2 m-m1 | j' m) = δ_{jj'}
        let d = DeformationParam::new(0.8).unwrap();
        for (j1, j2) in [(h(2), h(1)), (h(3), h(2)), (h(4), h(4))] {
            let jmin = (j1 - j2).abs();
            let mut ja = j1 + j2;
            while ja >= jmin {
                let mut jb = j1 + j2;
                while jb >= jmin {
                    for m in ja.min(jb).projections() {
                        let mut s = 0.0;
                        for m1 in j1.projections() {
                            let m2 = m - m1;
                            if m2.abs() > j2 {
                                continue;
                            }
                            s += qcg_coefficient(j1, m1, j2, m2, ja, m, d).unwrap()
                                * qcg_coefficient(j1, m1, j2, m2, jb, m, d).unwrap();
                        }
                        let expected = if ja == jb { 1.0 } else { 0.0 };
                        assert!((s - expected).abs() < 1e-12, "{j1} {j2} {ja} {jb} {m}");
                    }
                    jb = jb - HalfInt::ONE;
                }
                ja = ja - HalfInt::ONE;
            }
        }
    }

    #[test]
    fn transform_labels_and_unitarity() {
        let layout = SiteLayout::uniform(3, h(1)).unwrap();
        let t = couple_all(&layout, DeformationParam::new(0.9).unwrap(), 8192).unwrap();
        let js: Vec<_> = t.block_labels.iter().map(|l| (l.j.twice(), l.copy)).collect();
        assert_eq!(js, vec![(3, 1), (3, 1), (3, 1), (3, 1), (1, 1), (1, 1), (1, 2), (1, 2)]);
        assert_eq!(t.block_labels[4].path, vec![h(1), h(2), h(1)]);
        assert_eq!(t.block_labels[6].path, vec![h(1), h(0), h(1)]);
        assert!(t.matrix.unitarity_defect() < 1e-12);
        assert!(couple_all(&layout, DeformationParam::UNDEFORMED, 4).is_err());
    }

    #[test]
    fn dicke_states() {
        let q = 3.0f64;
        let d = DeformationParam::from_q(q).unwrap();
        let v = q_dicke_state(3, h(-1), d).unwrap();
        let norm = q_number(3.0, d).sqrt();
        // |↓↓↑⟩ = 0b110, |↓↑↓⟩ = 0b101, |↑↓↓⟩ = 0b011
        assert!((v[0b110] - q.sqrt() / norm).abs() < 1e-14);
        assert!((v[0b101] - 1.0 / norm).abs() < 1e-14);
        assert!((v[0b011] - q.powf(-0.5) / norm).abs() < 1e-14);
        let top = q_dicke_state(5, h(5), d).unwrap();
        assert_eq!(top[0], 1.0);
        let bottom = q_dicke_state(5, h(-5), d).unwrap();
        assert!((bottom[31] - 1.0).abs() < 1e-15);
        assert!(q_dicke_state(3, h(2), d).is_err());
        assert!(q_dicke_state(3, h(5), d).is_err());
    }
}
