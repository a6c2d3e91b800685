use satqkd::atmosphere::TurbulenceScenario;
use satqkd::channel::{calibrate, transmissivity_from_db, CalibrationKnob, ChannelModel};
use satqkd::keyrate::{key_rate, NoiseParams, ProtocolParams};
use satqkd::optimize::{Optimizer, SearchDomain};
use satqkd::states::{Scheme, SourceParams};

fn noise() -> NoiseParams {
    NoiseParams::default()
}

#[test]
fn optimum_beats_every_grid_point() {
    let opt = Optimizer::new(noise());
    for db in [5.0, 15.0] {
        let t = transmissivity_from_db(db);
        for (scheme, n) in [(Scheme::PhotonSubtracted, 1), (Scheme::PhotonAdded, 2)] {
            let best = opt.fixed(scheme, n, t).unwrap();
            for i in 0..24 {
                for j in 0..24 {
                    let alpha2 = 10f64.powf(-2.0 + 4.0 * i as f64 / 23.0);
                    let t_s = 0.01 + 0.989 * j as f64 / 23.0;
                    let src = SourceParams::new(scheme, alpha2, t_s, n).unwrap();
                    let r = key_rate(&ProtocolParams::new(src, noise()).unwrap(), t).unwrap();
                    assert!(r.raw_rate <= best.best_raw_rate + 1e-12);
                }
            }
            // The reported optimum is reproducible from its own parameters.
            let r = key_rate(&ProtocolParams::new(best.source().unwrap(), noise()).unwrap(), t)
                .unwrap();
            assert_eq!(r.raw_rate, best.best_raw_rate);
        }
    }
}

#[test]
fn tmsv_search_is_one_dimensional() {
    let r = Optimizer::new(noise())
        .fixed(Scheme::Tmsv, 0, transmissivity_from_db(10.0))
        .unwrap();
    assert_eq!(r.best_t_s, 1.0);
    let d = SearchDomain::default();
    assert!(r.best_alpha2 >= d.alpha2_min && r.best_alpha2 <= d.alpha2_max);
}

fn ensemble(db: f64, n: usize) -> satqkd::channel::TransmissivityEnsemble {
    calibrate(
        &TurbulenceScenario::default(),
        ChannelModel::Full,
        CalibrationKnob::ScintillationIndex,
        db,
        n,
        31,
    )
    .unwrap()
    .ensemble
}

#[test]
fn per_sample_dominates_mean_based() {
    for db in [15.0, 25.0] {
        let ens = ensemble(db, 1 << 14);
        let opt = Optimizer::new(noise()).with_knots(128);
        for (scheme, n) in [
            (Scheme::Tmsv, 0),
            (Scheme::PhotonSubtracted, 1),
            (Scheme::PhotonAdded, 1),
        ] {
            let mean = opt.mean_based(scheme, n, &ens).unwrap();
            let each = opt.per_sample(scheme, n, &ens).unwrap();
            assert!(each.best_rate >= mean.best_rate - 1e-9, "{scheme} at {db} dB");
        }
    }
}

#[test]
fn knot_doubling_changes_little() {
    let ens = ensemble(20.0, 1 << 14);
    for (scheme, n) in [(Scheme::Tmsv, 0), (Scheme::PhotonSubtracted, 1)] {
        let coarse = Optimizer::new(noise()).with_knots(256).per_sample(scheme, n, &ens).unwrap();
        let fine = Optimizer::new(noise()).with_knots(512).per_sample(scheme, n, &ens).unwrap();
        let change = (fine.best_rate - coarse.best_rate).abs() / coarse.best_rate;
        assert!(change < 5e-3, "{scheme}: {change}");
    }
}

#[test]
fn optimizer_independent_of_thread_count() {
    let ens = ensemble(20.0, 1 << 12);
    let go = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let opt = Optimizer::new(noise()).with_knots(64);
                (
                    opt.fixed(Scheme::PhotonSubtracted, 2, 0.05).unwrap(),
                    opt.mean_based(Scheme::PhotonSubtracted, 1, &ens).unwrap(),
                    opt.per_sample(Scheme::PhotonSubtracted, 1, &ens).unwrap(),
                )
            })
    };
    assert_eq!(go(1), go(4));
}
