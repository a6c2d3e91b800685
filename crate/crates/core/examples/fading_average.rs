// Average key rate over fading channels with fixed source parameters,
// comparing the full model against beam wandering alone.

use satqkd::atmosphere::TurbulenceScenario;
use satqkd::channel::{calibrate, CalibrationKnob, ChannelModel};
use satqkd::keyrate::{average_key_rate, average_repeaterless_bound, NoiseParams, ProtocolParams};
use satqkd::states::{Scheme, SourceParams};

pub fn run_example() -> satqkd::Result<()> {
    let noise = NoiseParams::default();
    let scenario = TurbulenceScenario::default();
    let sources = [
        SourceParams::tmsv(20.0)?,
        SourceParams::new(Scheme::PhotonSubtracted, 20.0, 0.7, 1)?,
        SourceParams::new(Scheme::PhotonAdded, 20.0, 0.7, 1)?,
    ];
    for model in [ChannelModel::wandering_only(), ChannelModel::Full] {
        println!("{}", model.name());
        for db in [15.0, 20.0, 25.0, 30.0] {
            let ens = calibrate(&scenario, model, CalibrationKnob::ScintillationIndex, db, 1 << 16, 3)?
                .ensemble;
            print!("  {:>6.2} dB", ens.mean_attenuation_db());
            for src in sources {
                let r = average_key_rate(&ProtocolParams::new(src, noise)?, &ens)?;
                print!("  {} {:.3e}", src.scheme.label(), r.rate);
            }
            println!("  RB {:.3e}", average_repeaterless_bound(&ens)?.bound);
        }
    }
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
