//! How many cavity modes the features need: compare truncations against the
//! largest one over a few random inputs.
//!
//! cargo run --release --example mode_convergence

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relqrc::encoding::{EncodingConfig, InputRange};
use relqrc::gaussian_engine::ModeSet;
use relqrc::reservoir::{self, ReservoirConfig};
use relqrc::worldline::KinematicsMode;

fn main() -> relqrc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inputs: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let enc = EncodingConfig::with_default_span(3.0, 2.0, 1, vec![InputRange::new(-1.0, 1.0); 2]);
    let features = |modes: ModeSet| {
        let cfg = ReservoirConfig::new(enc.clone(), modes, KinematicsMode::Relativistic);
        reservoir::feature_matrix(&inputs, &cfg, 1)
    };
    let reference = features(ModeSet::paper_default(15))?;
    let scale = reference.iter().flat_map(|f| &f.values).fold(0.0f64, |m, v| m.max(v.abs()));

    println!("{:>6} {:>14}", "modes", "rel. inf-norm");
    for (label, modes) in [
        ("3 only", ModeSet::single_mode(3)),
        ("1..3", ModeSet::paper_default(3)),
        ("1..5", ModeSet::paper_default(5)),
        ("1..10", ModeSet::paper_default(10)),
    ] {
        let diff = features(modes)?
            .iter()
            .zip(&reference)
            .flat_map(|(a, b)| a.values.iter().zip(&b.values).map(|(u, v)| (u - v).abs()))
            .fold(0.0f64, f64::max);
        println!("{label:>6} {:>14.3e}", diff / scale);
    }
    Ok(())
}
