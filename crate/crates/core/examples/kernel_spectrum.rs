//! Empirical kernel spectra of the relativistic and Newtonian reservoirs and
//! their effective ranks.
//!
//! cargo run --release --example kernel_spectrum -- [n_samples]

use relqrc::datasets::{self, SpiralParams};
use relqrc::encoding::EncodingConfig;
use relqrc::gaussian_engine::ModeSet;
use relqrc::learning::{self, DesignMatrix};
use relqrc::reservoir::{self, ReservoirConfig};
use relqrc::worldline::KinematicsMode;

fn main() -> relqrc::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(120);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let data = datasets::two_spirals(&SpiralParams { n: 2 * n.div_ceil(2), ..Default::default() })?;
    let l = 1e-6;

    for kin in KinematicsMode::ALL {
        let enc = EncodingConfig::with_default_span(3.0, 2.0, 4, data.bounding_box()?);
        let cfg = ReservoirConfig::new(enc, ModeSet::paper_default(10), kin);
        let feats = reservoir::feature_matrix(&data.inputs(), &cfg, workers)?;
        let design = DesignMatrix::from_features(&feats, &data.labels)?;
        let spectrum = learning::kernel_spectrum(&design.phi, l).normalized();
        let head: Vec<String> = spectrum.nonzero(10).iter().map(|g| format!("{g:.1e}")).collect();
        println!("{kin}: effective rank {} (threshold {l:e})", spectrum.effective_rank());
        println!("  leading normalized eigenvalues: {}", head.join(" "));
    }
    Ok(())
}
