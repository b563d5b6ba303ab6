//! Circuit-QED drive that emulates the detector world line: drive tones,
//! phase modulations, slow-phase validity and the coupling dictionary.
//!
//! cargo run --release --example cqed_drive -- [out.csv]

use relqrc::cqed_drive::{self, DriveParams, FrequencyUnit};
use relqrc::encoding::{self, EncodingConfig, InputRange};
use relqrc::gaussian_engine::ModeSet;
use relqrc::worldline::{KinematicsMode, Worldline};

fn main() -> relqrc::Result<()> {
    let params = DriveParams::circuit_example();
    let (plus, minus) = cqed_drive::drive_frequencies(&params)?;
    let ghz = params.units.factor_to(FrequencyUnit::GHz);
    println!("drive tones: omega+ = {:.3} GHz, omega- = {:.3} GHz", plus * ghz, minus * ghz);
    for w in params.warnings() {
        println!("warning: {w}");
    }

    let cfg = EncodingConfig::with_default_span(2.0, 2.0, 1, vec![InputRange::new(0.0, 1.0); 2]);
    let profile = encoding::encode(&[0.5, 0.5], &cfg)?;
    let wl = Worldline::new(&profile, KinematicsMode::Relativistic);
    let grid = cqed_drive::uniform_grid(&params, profile.total_duration(), 20.0)?;
    let signal = cqed_drive::drive_waveform(&params, &wl, &grid)?;
    let d = signal.diagnostics.expect("non-empty grid");
    println!("{} samples over {} us", signal.len(), profile.total_duration());
    println!("max phase rate = {:.3} Omega, max rate / min(omega+-) = {:.3e}", d.max_rate_over_omega, d.modulation_ratio);
    println!("max |zeta_exact - zeta_slow| / max |zeta| = {:.3e}", d.max_zeta_residual / d.max_zeta);

    let report = cqed_drive::effective_coupling_check(&params, &ModeSet::paper_default(10))?;
    println!(
        "coupling g*eta/Omega = {:.6}, lambda/sqrt(L w_n) = {:.6}, match = {}",
        report.drive_coupling, report.field_coupling, report.matches
    );

    if let Some(path) = std::env::args().nth(1) {
        signal.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), FrequencyUnit::MHz, None)?;
        println!("wrote {path}");
    }
    Ok(())
}
