//! Classify the solution space for the three regimes τ < τ₀, τ = τ₀, τ > τ₀,
//! each from five random seeds.
//!
//!     cargo run --release --example trichotomy

use vortex_lattice::verify::{classify_solution_space, VolSpec};

fn main() -> vortex_lattice::Result<()> {
    for (d, k) in [(2, 4.0), (1, 4.0), (1, 8.0), (2, 16.0)] {
        let c = classify_solution_space(d, VolSpec::PiTimes(k), 1.0, 32, 1)?;
        let seeds: Vec<&str> = c.per_seed.iter().map(|s| s.as_str()).collect();
        let residuals: Vec<String> = c.residuals.iter().map(|r| format!("{r:.1e}")).collect();
        println!(
            "d={d} vol={k}π: {} (expected {}) seeds {seeds:?} residuals [{}]",
            c.classification.as_str(),
            c.expected.as_str(),
            residuals.join(", ")
        );
    }
    Ok(())
}
