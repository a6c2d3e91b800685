#[allow(dead_code)]
mod fixed_rate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fixed_rate.rs"));
}

#[test]
fn fixed_rate_runs() {
    fixed_rate::run_example().expect("fixed_rate example should run");
}

#[allow(dead_code)]
mod optimal_fixed {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/optimal_fixed.rs"));
}

#[test]
fn optimal_fixed_runs() {
    optimal_fixed::run_example().expect("optimal_fixed example should run");
}

#[allow(dead_code)]
mod turbulence_chain {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/turbulence_chain.rs"));
}

#[test]
fn turbulence_chain_runs() {
    turbulence_chain::run_example().expect("turbulence_chain example should run");
}

#[allow(dead_code)]
mod transmissivity_pdf {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/transmissivity_pdf.rs"));
}

#[test]
fn transmissivity_pdf_runs() {
    transmissivity_pdf::run_example().expect("transmissivity_pdf example should run");
}

#[allow(dead_code)]
mod fading_average {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fading_average.rs"));
}

#[test]
fn fading_average_runs() {
    fading_average::run_example().expect("fading_average example should run");
}

#[allow(dead_code)]
mod deployment_modes {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/deployment_modes.rs"));
}

#[test]
fn deployment_modes_runs() {
    deployment_modes::run_example().expect("deployment_modes example should run");
}

#[allow(dead_code)]
mod fock_oracle {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fock_oracle.rs"));
}

#[test]
fn fock_oracle_runs() {
    fock_oracle::run_example().expect("fock_oracle example should run");
}

#[allow(dead_code)]
mod run_config {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/run_config.rs"));
}

#[test]
fn run_config_runs() {
    run_config::run_example().expect("run_config example should run");
}
