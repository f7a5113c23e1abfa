use plate_core::functionals::EigenfunctionFunctionals;
use plate_core::inequalities::{classical_suite, theorem11_report, SpectrumSource};
use plate_core::richardson::observed_order;
use plate_core::sequence::{brute_force_max, lemma_bound, random_instance, SequenceInstance};
use plate_core::{assemble_biharmonic, build_grid, DerivativeStencils, Domain};
use proptest::prelude::*;

fn increasing(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..50.0, len).prop_map(|steps| {
        let mut acc = 1.0;
        steps
            .into_iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weighted_mean_never_exceeds_the_bound(seed in any::<u64>(), len in 2usize..40, spread in 0.0f64..100.0) {
        let inst = random_instance(seed, len, spread);
        let bound = inst.bound().unwrap();
        prop_assert!(bound - inst.s >= -1e-12 * bound.abs().max(1.0), "{inst:?}");
        if inst.b > 0.0 {
            let best = brute_force_max(&inst.mu, inst.a, inst.b).unwrap();
            prop_assert!(best.s_max >= inst.s - 1e-9 * inst.s.abs().max(1.0));
            prop_assert!(best.s_max <= bound + 1e-9 * bound.abs().max(1.0));
        }
    }

    #[test]
    fn two_smallest_values_attain_the_bound(mu in increasing(6), w1 in 0.01f64..5.0, w2 in 0.01f64..5.0) {
        prop_assume!(mu[1] > mu[0]);
        let mut weights = vec![0.0; mu.len()];
        weights[0] = w1;
        weights[1] = w2;
        let inst = SequenceInstance::new(mu.clone(), weights).unwrap();
        let bound = lemma_bound(mu[0], mu[1], inst.a, inst.b).unwrap();
        prop_assert!((inst.s - bound).abs() <= 1e-12 * bound);
        let best = brute_force_max(&mu, inst.a, inst.b).unwrap();
        prop_assert!((best.s_max - bound).abs() <= 1e-12 * bound, "{best:?} vs {bound}");
    }

    #[test]
    fn biharmonic_form_is_the_weighted_laplacian_energy(
        d in 6usize..14,
        disk in any::<bool>(),
        values in prop::collection::vec(-1.0f64..1.0, 200),
    ) {
        let grid = if disk {
            build_grid(&Domain::unit_disk(), &[d, d]).unwrap()
        } else {
            build_grid(&Domain::cuboid(&[1.0, 0.5]).unwrap(), &[2 * d, d]).unwrap()
        };
        let a = assemble_biharmonic(&grid).unwrap();
        let u: Vec<f64> = (0..grid.node_count()).map(|i| values[i % values.len()]).collect();
        let au = a.matvec(&u);
        let form = grid.inner_product(&u, &au).unwrap();
        let lap = DerivativeStencils::new(&grid).apply_laplacian(&u).unwrap();
        let energy = grid.closure_inner_product(&lap, &lap).unwrap();
        prop_assert!(form > 0.0);
        prop_assert!((form - energy).abs() <= 1e-12 * energy, "{form} vs {energy}");
        for r in 0..a.dim() {
            for c in 0..a.dim() {
                prop_assert_eq!(a.get(r, c), a.get(c, r));
            }
        }
    }

    #[test]
    fn compensated_product_agrees_with_plain(d in 5usize..40, values in prop::collection::vec(-1.0f64..1.0, 50)) {
        let grid = build_grid(&Domain::unit_interval(), &[d]).unwrap();
        let a = assemble_biharmonic(&grid).unwrap();
        let u: Vec<f64> = (0..grid.node_count()).map(|i| values[i % values.len()]).collect();
        let scale = a.to_dense().abs().max();
        for (x, y) in a.matvec(&u).iter().zip(a.matvec_compensated(&u)) {
            prop_assert!((x - y).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn observed_order_recovers_power_laws(p in 0.5f64..4.0, c in 0.1f64..10.0, h0 in 0.05f64..0.5) {
        let h = [h0, h0 / 2.0, h0 / 4.0];
        let q = h.map(|x| 1.0 + c * x.powf(p));
        let got = observed_order(h, q).unwrap();
        prop_assert!((got - p).abs() < 1e-6, "{got} vs {p}");
    }

    #[test]
    fn reports_ignore_eigenvalues_beyond_their_range(ev in increasing(30), extra in increasing(5), k_max in 1usize..20) {
        let f = EigenfunctionFunctionals {
            grad_norm_sq: 1.0,
            lap_sq: ev[0],
            grad_lap_sq: 10.0,
            pure_second_sq: ev[0],
            gamma1: ev[0],
        };
        let mut longer = ev.clone();
        let top = *ev.last().unwrap();
        longer.extend(extra.iter().map(|e| e + top));
        let short = classical_suite(&ev, 2, k_max, SpectrumSource::Oracle, 0.0).unwrap();
        let long = classical_suite(&longer, 2, k_max, SpectrumSource::Oracle, 0.0).unwrap();
        prop_assert_eq!(&short, &long);
        for r in &short {
            prop_assert_eq!(r.verdict, r.recompute_verdict());
            prop_assert!(r.records.windows(2).all(|w| w[0].k < w[1].k));
        }
        let a = theorem11_report(&ev, &f, 2, k_max, SpectrumSource::Oracle, 0.0).unwrap();
        let b = theorem11_report(&longer, &f, 2, k_max, SpectrumSource::Oracle, 0.0).unwrap();
        prop_assert_eq!(a, b);
    }
}
