//! Two-level detector coupled to one coherently driven cavity mode, simulated
//! in a truncated Fock space with norm and leakage diagnostics.
//!
//! cargo run --release --example qubit_trajectory -- [|alpha|]

use relqrc::dense_engine::{self, DetectorKind};
use relqrc::encoding::{self, EncodingConfig, InputRange};
use relqrc::gaussian_engine::{ModeSet, StepConfig};
use relqrc::worldline::KinematicsMode;
use relqrc::C64;

fn main() -> relqrc::Result<()> {
    let amp: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let alpha = C64::new(0.0, amp);
    let modes = ModeSet::single_mode(3).with_alpha(alpha);
    let n_max = dense_engine::coherent_cutoff(alpha).ceil() as usize;
    let cfg = EncodingConfig::with_default_span(3.0, 2.0, 1, vec![InputRange::new(0.0, 1.0); 2]);
    let profile = encoding::encode(&[0.4, 0.9], &cfg)?;
    let times: Vec<f64> = (1..=8).map(|k| k as f64).collect();

    println!("alpha = {alpha}, Fock cutoff n_max = {n_max}");
    for kin in KinematicsMode::ALL {
        let s0 = dense_engine::dense_initial(DetectorKind::TwoLevel, alpha, n_max)?;
        let run = dense_engine::dense_propagate(&s0, &modes, &profile, kin, &StepConfig::default(), &times)?;
        println!("{kin}: max leakage {:.2e}, max norm drift {:.2e}", run.max_leakage, run.max_norm_drift);
        for (t, s) in times.iter().zip(run.into_valid()?) {
            let f = dense_engine::qubit_features(&s)?;
            println!("  tau {t:4.1}: P_e = {:.6}  <sx> = {:+.6}  <sy> = {:+.6}", f.pz, f.px, f.py);
        }
    }
    Ok(())
}
