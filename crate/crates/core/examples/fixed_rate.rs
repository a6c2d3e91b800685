// Key rate against fixed channel attenuation for TMSV, photon-subtracted
// and photon-added sources, and where the two T-PS curves cross.

use satqkd::channel::transmissivity_from_db;
use satqkd::keyrate::{key_rate, repeaterless_bound, NoiseParams, ProtocolParams};
use satqkd::states::{Scheme, SourceParams};

pub fn run_example() -> satqkd::Result<()> {
    let noise = NoiseParams::default();
    let rate = |scheme, alpha2, db: f64| -> satqkd::Result<f64> {
        let src = SourceParams::new(scheme, alpha2, 0.7, 1)?;
        Ok(key_rate(&ProtocolParams::new(src, noise)?, transmissivity_from_db(db))?.rate)
    };

    println!(
        "{:>5} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "dB", "TMSV(20)", "T-PS(5)", "T-PS(20)", "T-PA(5)", "T-PA(20)", "RB"
    );
    for db in (5..=35).step_by(5).map(f64::from) {
        println!(
            "{db:>5} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}",
            rate(Scheme::Tmsv, 20.0, db)?,
            rate(Scheme::PhotonSubtracted, 5.0, db)?,
            rate(Scheme::PhotonSubtracted, 20.0, db)?,
            rate(Scheme::PhotonAdded, 5.0, db)?,
            rate(Scheme::PhotonAdded, 20.0, db)?,
            repeaterless_bound(transmissivity_from_db(db))?,
        );
    }

    // Bisect the attenuation where α² = 5 stops beating α² = 20.
    let gap = |db| -> satqkd::Result<f64> {
        Ok(rate(Scheme::PhotonSubtracted, 5.0, db)? - rate(Scheme::PhotonSubtracted, 20.0, db)?)
    };
    let (mut lo, mut hi) = (10.0, 35.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("T-PS curves for α² = 5 and α² = 20 cross at {:.2} dB", 0.5 * (lo + hi));
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
