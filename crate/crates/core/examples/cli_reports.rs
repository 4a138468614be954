//! Drive the command-line front end from code: run `solve` and `verify` on
//! the bundled configuration files and print where the reports went.
//!
//!     cargo run --release --example cli_reports

use std::path::PathBuf;

fn main() {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let out = std::env::temp_dir().join("vortex-cli-reports");
    for (command, file) in [("solve", "solve.json"), ("verify", "verify.json"), ("topology", "topology.json")] {
        let dir = out.join(command);
        let code = vortex_lattice::cli::run([
            "vortex",
            command,
            "--config",
            here.join(file).to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        println!("{command}: exit code {code}, reports in {}", dir.display());
    }
}
