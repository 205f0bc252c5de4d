use couette_core::spectrum::{
    admissible_alphas, orr_sommerfeld_spectrum, rayleigh_spectrum, scan_alpha, BaseProfile,
    FILTER_TOL,
};
use couette_core::ShearProfile;
use std::f64::consts::PI;

fn oscillatory(n: u32) -> BaseProfile {
    BaseProfile::Oscillatory(ShearProfile::new(0.07, n).unwrap())
}

fn best_growth(profile: &BaseProfile) -> (f64, f64) {
    let scan = scan_alpha(profile, &admissible_alphas(2.0, 8), None, 129).unwrap();
    let b = scan.best().expect("a converged mode");
    (b.alpha, b.max_growth.unwrap())
}

#[test]
fn couette_rayleigh_spectrum_is_neutral() {
    for alpha in [0.5, 1.0, 2.0] {
        let r = rayleigh_spectrum(&BaseProfile::Couette, alpha, 65).unwrap();
        assert!(r.eigenvalues.iter().all(|c| c.im <= 1e-8), "alpha {alpha}");
    }
    let scan = scan_alpha(&BaseProfile::Couette, &admissible_alphas(2.0, 8), None, 65).unwrap();
    assert!(scan
        .entries
        .iter()
        .all(|e| e.max_growth.unwrap_or(0.0) <= 1e-8));
}

#[test]
fn oscillatory_shear_is_inviscidly_unstable_for_each_n() {
    let (a1, g1) = best_growth(&oscillatory(1));
    let (_, g2) = best_growth(&oscillatory(2));
    assert!(g1 > 0.0 && g2 > 0.0);
    assert!((a1 - PI).abs() < 1e-12);
    // leading rate at the best admissible wavenumber, fixed by resolution doubling
    assert!((g1 - 0.30034).abs() < 1e-4, "{g1}");
    assert!(g1.max(g2) / g1.min(g2) <= 1.5);
}

#[test]
fn rayleigh_eigenvalues_come_in_conjugate_pairs() {
    let r = rayleigh_spectrum(&oscillatory(1), PI, 129).unwrap();
    let unstable: Vec<_> = r.eigenvalues.iter().filter(|c| c.im > 1e-6).collect();
    assert!(!unstable.is_empty());
    for c in unstable {
        let paired = r
            .eigenvalues
            .iter()
            .any(|d| (d - c.conj()).norm() <= FILTER_TOL * c.norm().max(1.0));
        assert!(paired, "{c} has no conjugate");
    }
}

#[test]
fn retained_modes_have_small_residuals() {
    let ray = rayleigh_spectrum(&oscillatory(1), PI, 129).unwrap();
    let os = orr_sommerfeld_spectrum(&BaseProfile::Couette, 1.0, 1e4, 129).unwrap();
    for r in [&ray, &os] {
        assert!(!r.is_empty());
        assert!(r.residuals.iter().all(|&e| e <= 1e-8), "{:?}", r.residuals);
        assert_eq!(r.eigenvalues.len(), r.partners.len());
        for (c, p) in r.eigenvalues.iter().zip(&r.partners) {
            assert!((c - p).norm() <= FILTER_TOL * c.norm().max(1.0));
        }
    }
}

#[test]
fn couette_orr_sommerfeld_modes_decay() {
    let r = orr_sommerfeld_spectrum(&BaseProfile::Couette, 1.0, 1e4, 65).unwrap();
    assert!(!r.is_empty());
    assert!(r.growth_rates().iter().all(|&g| g < 0.0));
    assert_eq!(r.resolution, (65, 129));
}

#[test]
fn viscous_rates_approach_the_inviscid_rate() {
    let p = oscillatory(1);
    let inviscid = rayleigh_spectrum(&p, PI, 129)
        .unwrap()
        .leading_growth_rate()
        .unwrap();
    let g1 = orr_sommerfeld_spectrum(&p, PI, 1e4, 129)
        .unwrap()
        .leading_growth_rate()
        .unwrap();
    let g2 = orr_sommerfeld_spectrum(&p, PI, 2e4, 129)
        .unwrap()
        .leading_growth_rate()
        .unwrap();
    let (gap1, gap2) = (
        (inviscid - g1).abs() / inviscid,
        (inviscid - g2).abs() / inviscid,
    );
    assert!(gap1 <= 0.10 && gap2 <= 0.10, "{gap1} {gap2}");
    assert!(gap2 < gap1);
    // nearly equal across the two Reynolds numbers
    assert!((g1 - g2).abs() / g2 < 0.05);
}

#[test]
fn empty_scan_is_an_error() {
    assert!(scan_alpha(&BaseProfile::Couette, &[], None, 65).is_err());
}
