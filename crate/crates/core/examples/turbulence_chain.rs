// From the Hufnagel–Valley profile to the moments of the elliptic beam,
// for an uplink and a downlink over a range of distances.

use satqkd::atmosphere::{
    beam_statistics_from_profile, cn2_profile, rytov_variance, scintillation_index, Link,
    TurbulenceScenario,
};

pub fn run_example() -> satqkd::Result<()> {
    let base = TurbulenceScenario::default();
    println!("C_n² at selected altitudes:");
    for h in [0.0, 1e3, 5e3, 10e3, 20e3] {
        println!("  h = {h:>7} m  C_n² = {:.3e}", cn2_profile(h, &base));
    }

    println!(
        "\n{:>8} {:>9} {:>10} {:>10} {:>10} {:>10}",
        "L [km]", "link", "σ_R²", "σ_I²", "<θ>", "σ_x²/W₀²"
    );
    for km in [5.0, 10.0, 20.0, 50.0] {
        for link in [Link::Downlink, Link::Uplink] {
            let sc = TurbulenceScenario {
                link,
                ..base.with_distance(km * 1e3)
            };
            let sr2 = rytov_variance(&sc)?;
            let st = beam_statistics_from_profile(&sc)?;
            println!(
                "{km:>8} {:>9} {sr2:>10.4e} {:>10.4e} {:>10.4} {:>10.4e}",
                format!("{link:?}"),
                scintillation_index(sr2, link),
                st.mean_theta,
                st.var_centroid / (sc.beam_waist * sc.beam_waist),
            );
        }
    }
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
