//! Harmonic detector observables (n, q, p) along an encoded world line from
//! the Gaussian engine, relativistic against Newtonian.
//!
//! cargo run --release --example detector_trajectory -- [out.csv]

use relqrc::encoding::{self, EncodingConfig, InputRange};
use relqrc::gaussian_engine::{self, ModeSet, StepConfig};
use relqrc::worldline::KinematicsMode;

fn main() -> relqrc::Result<()> {
    let out = std::env::args().nth(1);
    let cfg = EncodingConfig::with_default_span(3.0, 2.0, 1, vec![InputRange::new(-1.0, 1.0); 2]);
    let profile = encoding::encode(&[0.3, -0.6], &cfg)?;
    let modes = ModeSet::paper_default(10);
    let times: Vec<f64> = (1..=80).map(|k| profile.total_duration() * k as f64 / 80.0).collect();

    let rel = gaussian_engine::detector_trajectory(&modes, &profile, KinematicsMode::Relativistic, &StepConfig::default(), &times)?;
    let newt = gaussian_engine::detector_trajectory(&modes, &profile, KinematicsMode::Newtonian, &StepConfig::default(), &times)?;

    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "tau", "n_rel", "q_rel", "n_newt", "q_newt");
    for (k, t) in times.iter().enumerate().step_by(8) {
        println!("{t:6.2} {:12.6} {:12.6} {:12.6} {:12.6}", rel[k].n, rel[k].q, newt[k].n, newt[k].q);
    }
    let gap = rel.iter().zip(&newt).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
    println!("max |rel - newt| over the trajectory: {gap:.4}");

    if let Some(path) = out {
        gaussian_engine::write_trajectory_csv(std::fs::File::create(&path)?, &times, &rel)?;
        println!("wrote relativistic trajectory to {path}");
    }
    Ok(())
}
