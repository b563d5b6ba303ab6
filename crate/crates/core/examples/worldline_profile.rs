//! Encode one input point into an acceleration schedule and tabulate the
//! resulting world line under both kinematics.
//!
//! cargo run --example worldline_profile -- [x1] [x2]

use relqrc::encoding::{self, EncodingConfig, InputRange};
use relqrc::worldline::{KinematicsMode, Worldline};

fn main() -> relqrc::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let x = [args.first().copied().unwrap_or(0.25), args.get(1).copied().unwrap_or(0.75)];

    let cfg = EncodingConfig::with_default_span(2.0, 2.0, 1, vec![InputRange::new(0.0, 1.0); 2]);
    let accelerations = encoding::map_input(&x, &cfg)?;
    let profile = encoding::build_profile(&accelerations, &cfg)?;
    println!("input {x:?} -> accelerations {accelerations:?}");
    println!("{} segments, total proper time {}", profile.segments().len(), profile.total_duration());

    let rel = Worldline::new(&profile, KinematicsMode::Relativistic);
    let newt = Worldline::new(&profile, KinematicsMode::Newtonian);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "tau", "t_rel", "x_rel", "xi_rel", "t_newt", "x_newt");
    for i in 0..=16 {
        let tau = profile.total_duration() * i as f64 / 16.0;
        let r = rel.at(tau)?;
        let n = newt.at(tau)?;
        println!("{tau:6.2} {:10.5} {:10.5} {:10.5} {:10.5} {:10.5}", r.t, r.x, r.xi, n.t, n.x);
    }
    let end = rel.at(profile.total_duration())?;
    println!("closure: xi(end) = {:.2e}, x(end) = {:.2e}", end.xi, end.x);
    let (lo, hi) = rel.position_range();
    println!("relativistic excursion x in [{lo:.4}, {hi:.4}], max |xi| = {:.4}", rel.max_abs_rapidity());
    Ok(())
}
