use plate_core::functionals::compute_functionals;
use plate_core::trial::{
    build_pair, expand, lemma22_check, prop21_check, prop21_pointwise, prop22_check, theorem21_check,
    verify_sj_identity, GDerivatives, POptions, ProductLaplacian, TestFunction, U1Fields,
};
use plate_core::{assemble_biharmonic, build_grid, solve_dense, DerivativeStencils, Domain, Grid, Spectrum};

fn setup(domain: Domain, d: usize, k: usize) -> (Grid, DerivativeStencils, Spectrum) {
    let divisions = vec![d; domain.dim];
    let grid = build_grid(&domain, &divisions).unwrap();
    let a = assemble_biharmonic(&grid).unwrap();
    let spectrum = solve_dense(&a, &grid, k).unwrap();
    let stencils = DerivativeStencils::new(&grid);
    (grid, stencils, spectrum)
}

#[test]
fn energy_identities_hold_to_round_off() {
    for (domain, d) in [
        (Domain::unit_interval(), 120),
        (Domain::unit_square(), 24),
        (Domain::unit_disk(), 24),
    ] {
        let (grid, stencils, spectrum) = setup(domain, d, 6);
        let f = compute_functionals(&spectrum, &grid, &stencils).unwrap();
        assert!((f.lap_sq / f.gamma1 - 1.0).abs() < 1e-12, "{f:?}");
        assert!(f.grad_norm_sq <= f.gamma1.sqrt(), "{f:?}");
        assert!(spectrum.orthonormality_error(&grid).unwrap() < 1e-10);
    }
}

#[test]
fn sj_identity_error_shrinks_with_refinement() {
    let g = TestFunction::cos(2.0, 0);
    let errs: Vec<f64> = [50, 100, 200]
        .into_iter()
        .map(|d| {
            let (grid, stencils, spectrum) = setup(Domain::unit_interval(), d, 12);
            let fields = U1Fields::from_spectrum(&spectrum, &stencils).unwrap();
            let e = expand(&spectrum, &g, &fields, &grid, &stencils, POptions::default()).unwrap();
            verify_sj_identity(&spectrum, &e)[..10]
                .iter()
                .cloned()
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[0] / errs[1] >= 3.0 && errs[1] / errs[2] >= 3.0, "{errs:?}");
}

#[test]
fn pair_identities_converge_at_second_order() {
    let mut gaps = vec![];
    for d in [16, 32] {
        let (grid, stencils, spectrum) = setup(Domain::unit_square(), d, 2);
        let fields = U1Fields::from_spectrum(&spectrum, &stencils).unwrap();
        let pair = build_pair(1.0, 0, &fields, &grid, &stencils, POptions::default()).unwrap();
        let l22 = lemma22_check(
            &TestFunction::cos(2.0, 1),
            &fields,
            &grid,
            &stencils,
            POptions::default(),
        )
        .unwrap();
        gaps.push([
            prop21_check(&pair, &grid).unwrap().gap,
            prop22_check(&pair, &fields, &grid).unwrap().gap,
            l22.gap,
        ]);
    }
    for i in 0..3 {
        let ratio = gaps[0][i] / gaps[1][i];
        assert!((3.0..5.5).contains(&ratio), "identity {i}: {gaps:?}");
    }
}

#[test]
fn expanded_products_satisfy_the_pointwise_form_exactly() {
    let (grid, stencils, spectrum) = setup(Domain::unit_square(), 20, 1);
    let fields = U1Fields::from_spectrum(&spectrum, &stencils).unwrap();
    let opts = POptions {
        g: GDerivatives::Analytic,
        product: ProductLaplacian::Expanded,
    };
    for a in [0.5, 1.0, 3.0] {
        for axis in 0..2 {
            let pair = build_pair(a, axis, &fields, &grid, &stencils, opts).unwrap();
            assert!(prop21_pointwise(&pair) <= 1e-12, "a={a} axis={axis}");
        }
    }
}

#[test]
fn trial_margins_are_nonnegative_on_the_beam() {
    let (grid, stencils, spectrum) = setup(Domain::unit_interval(), 100, 30);
    let fields = U1Fields::from_spectrum(&spectrum, &stencils).unwrap();
    for g in [
        TestFunction::cos(2.0, 0),
        TestFunction::sin(3.0, 0),
        TestFunction::quartic(0),
    ] {
        let e = expand(&spectrum, &g, &fields, &grid, &stencils, POptions::default()).unwrap();
        for k in 1..=5 {
            let m = theorem21_check(&spectrum.eigenvalues, &e, k).unwrap();
            assert!(m.margin > 0.0, "{} k={k}: {m:?}", g.label());
        }
    }
}
