use proptest::prelude::*;
use satqkd::keyrate::{
    conditional_eigenvalues_general, evolve_channel, key_rate, mutual_information,
    mutual_information_conditional, repeaterless_bound, NoiseParams, ProtocolParams,
};
use satqkd::specfun::symplectic_eigenvalues;
use satqkd::states::{
    addition_probability, default_cutoff, fock_ket, oracle_cm_from_fock, pas_cm, pss_cm,
    source_cm, subtraction_probability, Scheme, SourceParams,
};

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![
        Just(Scheme::Tmsv),
        Just(Scheme::PhotonSubtracted),
        Just(Scheme::PhotonAdded)
    ]
}

fn source() -> impl Strategy<Value = SourceParams> {
    (scheme(), -2.0f64..2.0, 0.01f64..0.999, 1u32..=3)
        .prop_map(|(s, la, t_s, n)| SourceParams::new(s, 10f64.powf(la), t_s, n).unwrap())
}

fn noise() -> impl Strategy<Value = NoiseParams> {
    (0.0f64..0.3, 1.0f64..2.0, 0.3f64..1.0, 0.8f64..1.0).prop_map(|(epsilon, nu, eta_d, eta_r)| {
        NoiseParams {
            epsilon,
            nu,
            eta_d,
            eta_r,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mutual_information_routes_agree(src in source(), noise in noise(), t in 0.0f64..1.0) {
        let cm = source_cm(&src);
        let closed = mutual_information(&cm, t, &noise).unwrap();
        let schur = mutual_information_conditional(&cm, t, &noise).unwrap();
        prop_assert!((closed - schur).abs() <= 1e-10);
    }

    #[test]
    fn eigenvalue_routes_agree(src in source(), noise in noise(), t in 0.0f64..1.0) {
        let cm = source_cm(&src);
        let fast = key_rate(&ProtocolParams::new(src, noise).unwrap(), t).unwrap().sympl_eigs;
        let ab = symplectic_eigenvalues(&evolve_channel(cm, t, noise.epsilon).to_covariance()).unwrap();
        let cond = conditional_eigenvalues_general(&cm, t, &noise).unwrap();
        for (a, b) in fast.iter().zip(ab.iter().chain(&cond)) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn rate_below_repeaterless_bound(src in source(), noise in noise(), t in 0.0f64..0.9999) {
        let r = key_rate(&ProtocolParams::new(src, noise).unwrap(), t).unwrap();
        prop_assert!(r.rate >= 0.0);
        prop_assert!(r.rate <= repeaterless_bound(t).unwrap() + 1e-9);
    }

    #[test]
    fn lossless_channel_keeps_source_spectrum(src in source()) {
        let cm = source_cm(&src);
        let before = cm.symplectic_eigenvalues();
        let after = evolve_channel(cm, 1.0, 0.0).symplectic_eigenvalues();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn sources_are_physical(src in source()) {
        prop_assert!(source_cm(&src).is_physical());
        prop_assert!(source_cm(&src).to_covariance().is_physical());
    }

    #[test]
    fn subtraction_and_addition_differ_by_2n(la in -2.0f64..2.0, t_s in 0.01f64..0.999, n in 0u32..=3) {
        let alpha2 = 10f64.powf(la);
        let ps = pss_cm(alpha2, t_s, n);
        let pa = pas_cm(alpha2, t_s, n);
        let gap = 2.0 * n as f64;
        prop_assert!((ps.x - ps.y - gap).abs() <= 1e-9 * ps.x);
        prop_assert!((pa.y - pa.x - gap).abs() <= 1e-9 * pa.y);
        prop_assert!((ps.x - pa.x - gap).abs() <= 1e-9 * ps.x);
    }
}

#[test]
fn probabilities_in_unit_interval_on_search_grid() {
    for i in 0..64 {
        let alpha2 = 10f64.powf(-2.0 + 4.0 * i as f64 / 63.0);
        for j in 0..64 {
            let t_s = 0.01 + (0.999 - 0.01) * j as f64 / 63.0;
            for n in 0..=3 {
                for p in [
                    subtraction_probability(alpha2, t_s, n),
                    addition_probability(alpha2, t_s, n),
                ] {
                    assert!((0.0..=1.0).contains(&p), "P = {p} at α²={alpha2}, T_S={t_s}, N={n}");
                }
            }
        }
    }
}

#[test]
fn fock_construction_matches_closed_form() {
    for scheme in [Scheme::Tmsv, Scheme::PhotonSubtracted, Scheme::PhotonAdded] {
        for n in 0..=3 {
            for alpha2 in [1.0, 5.0, 20.0] {
                for t_s in [0.5, 0.7, 0.9] {
                    if scheme != Scheme::Tmsv && n == 0 {
                        continue;
                    }
                    let src = SourceParams::new(scheme, alpha2, t_s, n).unwrap();
                    let ket = fock_ket(&src, default_cutoff(alpha2, src.photons)).unwrap();
                    let fock = oracle_cm_from_fock(&ket).unwrap();
                    let closed = source_cm(&src);
                    for (a, b) in [(fock.x, closed.x), (fock.y, closed.y), (fock.z, closed.z)] {
                        assert!((a - b).abs() <= 1e-8, "{scheme} N={n} α²={alpha2} T_S={t_s}");
                    }
                }
            }
        }
    }
}

fn rate_at(src: SourceParams, noise: NoiseParams, t: f64) -> f64 {
    key_rate(&ProtocolParams::new(src, noise).unwrap(), t).unwrap().rate
}

fn grid_sources() -> Vec<SourceParams> {
    let mut out = Vec::new();
    for scheme in [Scheme::Tmsv, Scheme::PhotonSubtracted, Scheme::PhotonAdded] {
        for alpha2 in [0.5, 5.0, 20.0] {
            for t_s in [0.3, 0.7, 0.95] {
                out.push(SourceParams::new(scheme, alpha2, t_s, 1).unwrap());
            }
        }
    }
    out
}

#[test]
fn rate_nonincreasing_in_excess_noise() {
    let ts: Vec<f64> = (1..=30).map(|k| 10f64.powf(-0.1 * k as f64)).collect();
    for src in grid_sources() {
        for &t in &ts {
            let mut prev = f64::INFINITY;
            for k in 0..=20 {
                let noise = NoiseParams {
                    epsilon: 0.02 * k as f64,
                    ..NoiseParams::default()
                };
                let r = rate_at(src, noise, t);
                assert!(r <= prev + 1e-12, "ε sweep {src:?} T={t}");
                prev = r;
            }
        }
    }
}

#[test]
fn mutual_information_nonincreasing_in_detector_loss() {
    let ts: Vec<f64> = (1..=30).map(|k| 10f64.powf(-0.1 * k as f64)).collect();
    for src in grid_sources() {
        let cm = source_cm(&src);
        for &t in &ts {
            let mut prev = f64::INFINITY;
            for k in 0..=20 {
                let noise = NoiseParams {
                    eta_d: 1.0 - 0.04 * k as f64,
                    ..NoiseParams::default()
                };
                let i = mutual_information(&cm, t, &noise).unwrap();
                assert!(i <= prev + 1e-12, "η_d sweep {src:?} T={t}");
                prev = i;
            }
        }
    }
}

/// Textbook entanglement-based TMSV rate with homodyne detection on both
/// sides and a trusted detector of efficiency η and electronic noise
/// v_el = (1 − η)(ν − 1), written in terms of the channel-added noise χ.
fn textbook_tmsv_rate(alpha2: f64, t: f64, n: &NoiseParams) -> f64 {
    let g = |v: f64| {
        let x = 0.5 * (v - 1.0);
        if x <= 0.0 {
            0.0
        } else {
            (x + 1.0) * (x + 1.0).log2() - x * x.log2()
        }
    };
    let v = 1.0 + 2.0 * alpha2;
    let eta = n.eta_d;
    let chi_line = 1.0 / t - 1.0 + n.epsilon;
    let chi_hom = (1.0 + (1.0 - eta) * (n.nu - 1.0)) / eta - 1.0;
    let chi_tot = chi_line + chi_hom / t;
    let info = 0.5 * ((v + chi_tot) / (1.0 / v + chi_tot)).log2();
    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
    let b = t * t * (v * chi_line + 1.0).powi(2);
    let c = (a * chi_hom + v * b.sqrt() + t * (v + chi_line)) / (t * (v + chi_tot));
    let d = b.sqrt() * (v + b.sqrt() * chi_hom) / (t * (v + chi_tot));
    let pair = |p: f64, q: f64| {
        let root = (p * p - 4.0 * q).max(0.0).sqrt();
        ((0.5 * (p + root)).sqrt(), (0.5 * (p - root)).max(1.0).sqrt())
    };
    let (l1, l2) = pair(a, b);
    let (l3, l4) = pair(c, d);
    let holevo = g(l1) + g(l2) - g(l3) - g(l4);
    n.eta_r * info - holevo
}

#[test]
fn tmsv_rate_matches_textbook_trusted_detector_formula() {
    for alpha2 in [0.5, 2.0, 5.0, 20.0] {
        for db in [1.0, 5.0, 9.0, 15.0] {
            let t = 10f64.powf(-db / 10.0);
            for eta_d in [1.0, 0.96, 0.8, 0.68, 0.4] {
                for (epsilon, nu) in [(0.0, 1.0), (0.1, 1.1), (0.05, 1.5)] {
                    let noise = NoiseParams {
                        epsilon,
                        nu,
                        eta_d,
                        eta_r: 0.95,
                    };
                    let ours = key_rate(
                        &ProtocolParams::new(SourceParams::tmsv(alpha2).unwrap(), noise).unwrap(),
                        t,
                    )
                    .unwrap()
                    .raw_rate;
                    let want = textbook_tmsv_rate(alpha2, t, &noise);
                    assert!(
                        (ours - want).abs() <= 1e-10,
                        "α²={alpha2} T={t} {noise:?}: {ours} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn trusted_detector_loss_can_raise_the_rate() {
    // Under reverse reconciliation, trusted loss at Bob lowers Eve's Holevo
    // information faster than the mutual information, so the rate is not
    // monotone in η_d. Both this code and the textbook formula agree.
    let t = 10f64.powf(-0.9);
    let at = |eta_d| NoiseParams {
        eta_d,
        nu: 1.0,
        ..NoiseParams::default()
    };
    let src = SourceParams::tmsv(0.5).unwrap();
    let perfect = rate_at(src, at(1.0), t);
    let lossy = rate_at(src, at(0.96), t);
    assert!(lossy > perfect);
    assert!(textbook_tmsv_rate(0.5, t, &at(0.96)) > textbook_tmsv_rate(0.5, t, &at(1.0)));
}

#[test]
fn rate_nondecreasing_in_transmissivity() {
    for src in grid_sources() {
        let mut prev = 0.0;
        for k in 0..=400 {
            let t = 10f64.powf(-4.0 + 4.0 * k as f64 / 400.0).min(0.999_999);
            let r = rate_at(src, NoiseParams::default(), t);
            assert!(r >= prev - 1e-12, "{src:?} at T={t}: {r} < {prev}");
            prev = r;
        }
    }
}
