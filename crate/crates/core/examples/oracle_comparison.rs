//! Cross-check of the Gaussian engine against brute-force evolution of a
//! harmonic detector and one cavity mode in a truncated Fock space.
//!
//! cargo run --release --example oracle_comparison

use relqrc::dense_engine::{self, DetectorKind};
use relqrc::encoding::{self, EncodingConfig, InputRange};
use relqrc::gaussian_engine::{self, ModeSet, StepConfig};
use relqrc::worldline::KinematicsMode;
use relqrc::C64;

fn main() -> relqrc::Result<()> {
    let alpha = C64::new(0.0, 1.0);
    let modes = ModeSet::single_mode(3).with_alpha(alpha);
    let cfg = EncodingConfig::with_default_span(2.0, 2.0, 1, vec![InputRange::new(0.0, 1.0); 2]);
    let profile = encoding::encode(&[0.3, 0.7], &cfg)?;
    let times: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let step = StepConfig::default();

    for kin in KinematicsMode::ALL {
        let gauss = gaussian_engine::detector_trajectory(&modes, &profile, kin, &step, &times)?;
        let s0 = dense_engine::dense_initial(DetectorKind::Harmonic { levels: 12 }, alpha, 12)?;
        let run = dense_engine::dense_propagate(&s0, &modes, &profile, kin, &step, &times)?;
        let worst = gauss
            .iter()
            .zip(&run.snapshots)
            .map(|(g, d)| g.max_abs_diff(&d.detector_observables()))
            .fold(0.0, f64::max);
        println!("{kin}: max |Gaussian - dense| over {} samples = {worst:.3e} (leakage {:.1e})", times.len(), run.max_leakage);
    }
    Ok(())
}
