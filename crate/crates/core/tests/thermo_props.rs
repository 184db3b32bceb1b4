use num_bigint::BigUint;
use qks_core::hamiltonian::Scaling;
use qks_core::qarith::{binomial_exact, ln_gamma, log_sum_exp, q_number};
use qks_core::spectrum::{analytic_levels, blocks, expand_multiset};
use qks_core::thermo::{observables, partition_function, ThermoModel};
use qks_core::{DeformationParam, HalfInt, ModelConfig};

fn thermo_cfg(n: usize, eta: f64) -> ModelConfig {
    ModelConfig::spin_half(n).with_eta(eta).with_scaling(Scaling::Thermodynamic)
}

fn free_energy(cfg: &ModelConfig, t: f64) -> f64 {
    observables(cfg, t).unwrap().free_energy
}

/// Twice Richardson-extrapolated central differences over a ladder of steps,
/// keeping the estimate that agrees best with its neighbour.
fn ladder(est: impl Fn(f64) -> f64, scale: f64) -> f64 {
    let e: Vec<f64> = (0..14).map(|k| est(scale * 0.5 / 2f64.powi(k))).collect();
    let k = (0..e.len() - 1).min_by(|&a, &b| (e[a] - e[a + 1]).abs().total_cmp(&(e[b] - e[b + 1]).abs())).unwrap();
    e[k + 1]
}

fn extrapolate(d: impl Fn(f64) -> f64, step: f64) -> f64 {
    let r1 = (4.0 * d(step / 2.0) - d(step)) / 3.0;
    let r2 = (4.0 * d(step / 4.0) - d(step / 2.0)) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

fn second_derivative(f: impl Fn(f64) -> f64, x: f64, scale: f64) -> f64 {
    ladder(|h| extrapolate(|s| (f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s), h), scale)
}

fn first_derivative(f: impl Fn(f64) -> f64, x: f64, scale: f64) -> f64 {
    ladder(|h| extrapolate(|s| (f(x + s) - f(x - s)) / (2.0 * s), h), scale)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn fluctuation_forms_match_finite_differences() {
    for n in [2usize, 10, 100, 1000] {
        for eta in [0.0, 1.0, 5.0] {
            for field in [0.0, 0.05] {
                for t in [0.15, 0.3, 1.0, 3.0] {
                    let cfg = thermo_cfg(n, eta).with_field(field);
                    let p = observables(&cfg, t).unwrap();
                    let cv = -t * second_derivative(|x| free_energy(&cfg, x), t, t);
                    assert!(rel(p.specific_heat, cv) < 1e-6, "C_V N={n} eta={eta} h={field} T={t}: {} vs {cv}", p.specific_heat);
                    let f_of_h = |hh: f64| free_energy(&cfg.clone().with_field(hh), t);
                    let chi = -second_derivative(f_of_h, field, t);
                    assert!(rel(p.susceptibility, chi) < 1e-6, "chi N={n} eta={eta} h={field} T={t}: {} vs {chi}", p.susceptibility);
                    if field != 0.0 {
                        let m = -first_derivative(f_of_h, field, t);
                        assert!(rel(p.magnetization, m) < 1e-6, "M N={n} eta={eta} T={t}");
                    } else {
                        assert!(p.magnetization.abs() < 1e-10);
                    }
                }
            }
        }
    }
}

fn neumaier(xs: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

#[test]
fn log_sum_matches_direct_summation() {
    for n in [1usize, 2, 5, 12, 20] {
        for (eta, field) in [(0.0, 0.0), (0.7, 0.0), (1.5, 0.4)] {
            for coupling in [1.0, -1.0] {
                let cfg = ModelConfig::spin_half(n).with_eta(eta).with_field(field).with_coupling(coupling);
                let e0 = blocks(&cfg).unwrap().iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
                let levels = expand_multiset(&analytic_levels(&cfg).unwrap()).unwrap();
                for t in [0.5, 1.0, 4.0] {
                    let mut terms: Vec<f64> = levels.iter().map(|e| (-(e - e0) / t).exp()).collect();
                terms.sort_by(f64::total_cmp);
                let z = neumaier(&terms);
                    let (lz, _) = partition_function(&cfg, t).unwrap();
                    // energies carry rounding of order ε·max|E|
                    let scale = levels.iter().map(|e| e.abs()).fold(0.0, f64::max) / t;
                    assert!((lz - z.ln()).abs() < 1e-13 * (1.0 + scale) + 1e-12 * lz.abs(), "n={n} eta={eta} T={t}");
                }
            }
        }
    }
}

#[test]
fn closed_form_partition_function_for_even_n() {
    for n in (2..=100usize).step_by(14).chain([100]) {
        for eta in [0.0, 3.0, 9.0] {
            let cfg = thermo_cfg(n, eta);
            let d = DeformationParam::new(eta / n as f64).unwrap();
            let nf = n as f64;
            let i = 1.0;
            let e0 = -i / (2.0 * nf) * (q_number(nf / 2.0, d) * q_number(nf / 2.0 + 1.0, d) - nf * q_number(0.5, d) * q_number(1.5, d));
            for t in [0.2, 0.8, 2.0] {
                let beta = 1.0 / t;
                let terms: Vec<f64> = (0..=n / 2)
                    .map(|p| {
                        let pf = p as f64;
                        let ln_deg = 2.0 * (nf - 2.0 * pf + 1.0).ln() + ln_gamma(nf + 1.0)
                            - ln_gamma(nf - pf + 2.0)
                            - ln_gamma(pf + 1.0);
                        let jj = nf / 2.0 - pf;
                        let expo = beta * i / (2.0 * nf)
                            * (q_number(jj, d) * q_number(jj + 1.0, d) - nf * q_number(0.5, d) * q_number(1.5, d))
                            + beta * e0;
                        ln_deg + expo
                    })
                    .collect();
                let direct = log_sum_exp(&terms);
                let (lz, _) = partition_function(&cfg, t).unwrap();
                assert!((lz - direct).abs() < 1e-10 * direct.abs().max(1.0), "n={n} eta={eta} T={t}");
            }
        }
    }
}

#[test]
fn closed_form_degeneracy_is_multiplicity_times_dimension() {
    // (N-2p+1)^2 N! / ((N-p+1)! p!) == d_J (2J+1), exactly
    for n in (2..=200u64).step_by(2) {
        let b = blocks(&ModelConfig::spin_half(n as usize)).unwrap();
        for blk in b {
            let p = (blk.p.twice() / 2) as u64;
            let lhs = BigUint::from((n - 2 * p + 1).pow(2)) * binomial_exact(n + 1, p).unwrap() / BigUint::from(n + 1);
            let rhs = blk.multiplicity.exact().unwrap() * BigUint::from(blk.j.multiplet_dim());
            assert_eq!(lhs, rhs, "n={n} p={p}");
        }
    }
}

#[test]
fn state_count_at_high_temperature() {
    for n in [10usize, 1000, 100_000] {
        let model = ThermoModel::new(&thermo_cfg(n, 4.0)).unwrap();
        let lz = model.log_z(1e6).unwrap();
        assert!(rel(lz, n as f64 * 2f64.ln()) < 1e-6, "n={n}");
    }
}

#[test]
fn curie_law_at_high_temperature() {
    for n in [10usize, 1000] {
        let p = observables(&thermo_cfg(n, 2.0), 1e4).unwrap();
        assert!(rel(p.susceptibility, 1.0 / (4.0 * 1e4)) < 0.01);
    }
}

#[test]
fn log_z_increases_with_temperature() {
    // energies sit above the reference only at zero field
    for (n, eta) in [(7usize, 0.0), (100, 5.0), (1000, 9.0)] {
        let model = ThermoModel::new(&thermo_cfg(n, eta)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=60 {
            let lz = model.log_z(0.05 * k as f64).unwrap();
            assert!(lz >= prev);
            prev = lz;
        }
        assert!(model.log_z(3.0).unwrap() > model.log_z(0.5).unwrap());
    }
}

#[test]
fn weight_shapes_for_large_systems() {
    let flat = ThermoModel::new(&thermo_cfg(100_000, 0.0)).unwrap();
    for t in [0.1, 0.2, 0.25, 0.3, 0.5, 1.0] {
        let w = flat.weights(t).unwrap();
        assert_eq!(w.local_maxima().len(), 1, "T={t}");
        let s: f64 = w.levels.iter().map(|l| l.weight).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }
    let deformed = ThermoModel::new(&thermo_cfg(100_000, 9.0)).unwrap();
    let w = deformed.weights(0.786189).unwrap();
    let peaks = w.local_maxima();
    assert_eq!(peaks.len(), 2);
    assert!(w.levels[peaks[0]].p < HalfInt::from_int(1000));
    assert!(w.levels[peaks[1]].p > HalfInt::from_int(40_000));
}
