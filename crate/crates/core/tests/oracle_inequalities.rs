use std::f64::consts::PI;

use plate_core::inequalities::{
    agmon_pleijel_fit, classical_suite, levine_protter_check, remark11_order_scan, theorem11_report,
    SpectrumSource, Verdict, DEFAULT_SCAN_START, ORACLE_BAND,
};
use plate_core::oracles::{beam_spectrum, disk_first_mode_functionals, disk_spectrum};

#[test]
fn proven_inequalities_hold_on_reference_spectra() {
    let beam = beam_spectrum(51).unwrap();
    let disk = disk_spectrum(31).unwrap();
    for (ev, n, vol) in [(&beam.eigenvalues, 1, 1.0), (&disk.eigenvalues, 2, PI)] {
        let mut reports = classical_suite(ev, n, 30, SpectrumSource::Oracle, ORACLE_BAND).unwrap();
        reports.push(levine_protter_check(ev, n, vol, 30, SpectrumSource::Oracle, ORACLE_BAND).unwrap());
        for r in reports.iter().filter(|r| r.asserted) {
            assert_eq!(r.verdict, Verdict::Holds, "{}", r.id);
            assert!(r.min_margin() > 0.0, "{}", r.id);
        }
    }
}

#[test]
fn gap_bound_holds_on_the_disk_reference() {
    let disk = disk_spectrum(11).unwrap();
    let f = disk_first_mode_functionals().unwrap();
    let r = theorem11_report(&disk.eigenvalues, &f, 2, 10, SpectrumSource::Oracle, ORACLE_BAND).unwrap();
    assert!(r.records.iter().all(|rec| rec.margin > 0.0));
    // Γ₂ = Γ₃ on the disk.
    assert_eq!(r.record(2).unwrap().lhs, 0.0);
}

#[test]
fn beam_quarter_roots_approach_pi() {
    let beam = beam_spectrum(50).unwrap();
    let fit = agmon_pleijel_fit(&beam.eigenvalues, 1, 1.0, 10, 50).unwrap();
    let last = fit.records.last().unwrap();
    assert!((last.quarter_root_ratio.unwrap() / PI - 1.0).abs() < 1e-3);
    assert!((fit.coefficient - PI.powi(4)).abs() < 1e-10);
}

#[test]
fn remark_scan_on_the_beam_reference() {
    let beam = beam_spectrum(201).unwrap();
    let f = plate_core::functionals::EigenfunctionFunctionals {
        grad_norm_sq: 12.3,
        lap_sq: beam.eigenvalues[0],
        grad_lap_sq: 0.0,
        pure_second_sq: beam.eigenvalues[0],
        gamma1: beam.eigenvalues[0],
    };
    let scan = remark11_order_scan(&beam.eigenvalues, &f, 1, DEFAULT_SCAN_START, 200).unwrap();
    assert!((scan.rhs_fit.slope - 2.0).abs() < 0.3, "{scan:?}");
    assert!((scan.gap_fit.slope - 3.0).abs() < 0.3, "{scan:?}");
}
