// Jointly optimized (α², T_S) for each scheme at fixed attenuation.

use satqkd::channel::transmissivity_from_db;
use satqkd::keyrate::NoiseParams;
use satqkd::optimize::Optimizer;
use satqkd::states::Scheme;

pub fn run_example() -> satqkd::Result<()> {
    let optimizer = Optimizer::new(NoiseParams::default());
    let schemes = [
        (Scheme::Tmsv, 0),
        (Scheme::PhotonSubtracted, 1),
        (Scheme::PhotonSubtracted, 2),
        (Scheme::PhotonAdded, 1),
    ];
    println!(
        "{:>4} {:>6} {:>2} {:>9} {:>7} {:>11} {:>11}",
        "dB", "scheme", "N", "alpha2", "T_S", "rate", "raw rate"
    );
    for db in [5.0, 15.0, 25.0] {
        for (scheme, n) in schemes {
            let r = optimizer.fixed(scheme, n, transmissivity_from_db(db))?;
            println!(
                "{db:>4} {:>6} {n:>2} {:>9.3} {:>7.3} {:>11.4e} {:>11.4e}",
                scheme.label(),
                r.best_alpha2,
                r.best_t_s,
                r.best_rate,
                r.best_raw_rate
            );
        }
    }
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
