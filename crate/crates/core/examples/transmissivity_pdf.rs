// Sampled transmissivity distributions at matched mean attenuation for
// the full elliptic-beam model and for beam wandering alone.

use satqkd::atmosphere::TurbulenceScenario;
use satqkd::channel::{calibrate, ensemble_statistics, CalibrationKnob, ChannelModel};

pub fn run_example() -> satqkd::Result<()> {
    let scenario = TurbulenceScenario::default();
    for model in [ChannelModel::Full, ChannelModel::wandering_only()] {
        let cal = calibrate(
            &scenario,
            model,
            CalibrationKnob::ScintillationIndex,
            20.0,
            1 << 16,
            11,
        )?;
        let ens = &cal.ensemble;
        let stats = ensemble_statistics(ens)?;
        println!(
            "{}: σ_I² = {:.3}, mean T = {:.4e} ({:.2} dB), max T = {:.4}, flagged = {}",
            model.name(),
            cal.stats.sigma_i2,
            stats.mean_t,
            stats.mean_attenuation_db,
            ens.max_t(),
            ens.n_flagged()
        );
        let mut sorted = ens.samples().to_vec();
        sorted.sort_by(f64::total_cmp);
        for q in [0.01, 0.1, 0.5, 0.9, 0.99, 0.999] {
            let t = sorted[((q * sorted.len() as f64) as usize).min(sorted.len() - 1)];
            println!("  {:>5.1}% quantile  T = {t:.4e}", 100.0 * q);
        }
    }
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
