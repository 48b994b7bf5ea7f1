//! Regenerates the sampled figure-eight cylinder loop in `data/`.
//!
//! `cargo run -p skewloop-cli --example bundle_data`

use skewloop_core::io::curve_to_json;
use skewloop_core::quadric::symmetric::figure_eight_cylinder;
use skewloop_core::SpaceCurve;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let curve = SpaceCurve::SampledC1(figure_eight_cylinder(4096));
    std::fs::write(dir.join("fig8_cylinder.json"), curve_to_json(&curve)).expect("data directory is writable");
}
