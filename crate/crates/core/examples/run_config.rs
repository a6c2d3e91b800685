// Drives a run from an inline TOML configuration and writes the CSV and
// manifest, as the command-line tool does.

use satqkd::run::{run, RunConfig};

const CONFIG: &str = r#"
mode = "fading"
seed = 2024
n_samples = 4096
schemes = ["tmsv", "t-ps"]

[protocol]
alpha2 = [10.0, 20.0]
t_s = [0.7]

[sweep]
values = [15.0, 25.0]

[channel]
model = "wandering-only"
"#;

pub fn run_example() -> satqkd::Result<()> {
    let mut cfg = RunConfig::from_toml_str(CONFIG)?;
    cfg.output_dir = std::env::temp_dir().join("satqkd-run-config-example");
    let out = run(&cfg)?;
    println!("config sha256 {}", out.manifest.config_sha256);
    print!("{}", std::fs::read_to_string(&out.csv_path)?);
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
