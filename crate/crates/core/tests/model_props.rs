use num_bigint::BigUint;
use proptest::prelude::*;
use qks_core::coalgebra::coproduct_z;
use qks_core::hamiltonian::{build_qks_coalgebra, build_qks_explicit, Scaling};
use qks_core::qcg::qcg_coefficient;
use qks_core::spectrum::{analytic_levels, blocks, diagonalize_oracle, expand_multiset, spectrum_deviation};
use qks_core::thermo::{observables, ThermoModel};
use qks_core::{DeformationParam, HalfInt, ModelConfig};

fn small_config() -> impl Strategy<Value = ModelConfig> {
    (
        prop::collection::vec(1i64..=3, 1..=4),
        -2.0f64..2.0,
        prop_oneof![Just(0.0), -1.0f64..1.0],
        prop_oneof![Just(1.0), Just(-1.0), -2.0f64..2.0],
    )
        .prop_map(|(spins, eta, field, coupling)| {
            ModelConfig::mixed(spins.into_iter().map(HalfInt::from_twice).collect())
                .with_eta(eta)
                .with_field(field)
                .with_coupling(coupling)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn routes_agree_and_are_hermitian(cfg in small_config()) {
        let a = build_qks_coalgebra(&cfg).unwrap();
        let b = build_qks_explicit(&cfg).unwrap();
        let scale = a.max_abs().max(1.0);
        prop_assert!(a.max_abs_diff(&b) < 1e-10 * scale);
        prop_assert!(a.hermitian_defect() < 1e-12 * scale);
        let z = coproduct_z(&cfg.layout().unwrap());
        prop_assert!(a.commutator(&z).max_abs() < 1e-10 * scale);
    }

    #[test]
    fn spectrum_matches_oracle(cfg in small_config()) {
        let oracle = diagonalize_oracle(&build_qks_coalgebra(&cfg).unwrap()).unwrap();
        let analytic = expand_multiset(&analytic_levels(&cfg).unwrap()).unwrap();
        prop_assert!(spectrum_deviation(&oracle, &analytic).unwrap() < 1e-9);
    }

    #[test]
    fn dimensions_add_up(spins in prop::collection::vec(0i64..=4, 1..=7)) {
        let spins: Vec<HalfInt> = spins.into_iter().map(HalfInt::from_twice).collect();
        let total: BigUint = blocks(&ModelConfig::mixed(spins.clone()))
            .unwrap()
            .iter()
            .map(|b| b.multiplicity.exact().unwrap() * BigUint::from(b.j.multiplet_dim()))
            .sum();
        let want: BigUint = spins.iter().map(|s| BigUint::from(s.multiplet_dim())).product();
        prop_assert_eq!(total, want);
    }

    #[test]
    fn qcg_rows_are_orthonormal(j1 in 0i64..=6, j2 in 0i64..=6, eta in -5.0f64..5.0) {
        let (j1, j2) = (HalfInt::from_twice(j1), HalfInt::from_twice(j2));
        let d = DeformationParam::new(eta).unwrap();
        let mut js = Vec::new();
        let mut j = j1 + j2;
        while j >= (j1 - j2).abs() {
            js.push(j);
            j = j - HalfInt::ONE;
        }
        // fixed m: the coefficients form an orthogonal matrix
        for m in (j1 + j2).projections() {
            let pairs: Vec<(HalfInt, HalfInt)> =
                j1.projections().map(|m1| (m1, m - m1)).filter(|(_, m2)| m2.abs() <= j2).collect();
            let allowed: Vec<HalfInt> = js.iter().copied().filter(|j| m.abs() <= *j).collect();
            prop_assert_eq!(pairs.len(), allowed.len());
            for &ja in &allowed {
                for &jb in &allowed {
                    let dot: f64 = pairs
                        .iter()
                        .map(|&(m1, m2)| {
                            qcg_coefficient(j1, m1, j2, m2, ja, m, d).unwrap()
                                * qcg_coefficient(j1, m1, j2, m2, jb, m, d).unwrap()
                        })
                        .sum();
                    let want = if ja == jb { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn thermo_is_physical(n in 2usize..400, eta in 0.0f64..9.0, t in 0.05f64..3.0, field in 0.0f64..0.2) {
        let cfg = ModelConfig::spin_half(n).with_eta(eta).with_field(field).with_scaling(Scaling::Thermodynamic);
        let p = observables(&cfg, t).unwrap();
        prop_assert!(p.specific_heat >= 0.0);
        prop_assert!(p.susceptibility >= 0.0);
        prop_assert!(p.magnetization >= 0.0 && p.magnetization <= 0.5 + 1e-12);
        let w = ThermoModel::new(&cfg).unwrap().weights(t).unwrap();
        let s: f64 = w.levels.iter().map(|l| l.weight).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }
}
