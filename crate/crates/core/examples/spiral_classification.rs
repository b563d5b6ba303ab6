//! End-to-end two-spiral classification: relativistic against Newtonian
//! reservoir, ridge readout, train/test accuracy.
//!
//! cargo run --release --example spiral_classification -- [n_train] [n_test] [a0] [T] [m]

use relqrc::datasets::{self, SpiralParams};
use relqrc::encoding::EncodingConfig;
use relqrc::gaussian_engine::ModeSet;
use relqrc::learning::{self, DesignMatrix};
use relqrc::reservoir::{self, ReservoirConfig};
use relqrc::worldline::KinematicsMode;

fn main() -> relqrc::Result<()> {
    let a: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let get = |i: usize, d: f64| a.get(i).copied().unwrap_or(d);
    let (n_train, n_test) = (get(0, 160.0) as usize, get(1, 80.0) as usize);
    let (a0, period, m) = (get(2, 3.0), get(3, 2.0), get(4, 4.0) as usize);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let data = datasets::two_spirals(&SpiralParams { n: n_train + n_test, ..Default::default() })?;
    let (train, test) = datasets::split(&data, n_train, n_test, 1)?;
    let ranges = data.bounding_box()?;
    println!("two spirals: {n_train} train / {n_test} test, a0 = {a0}, T = {period}, m = {m}");

    for kin in KinematicsMode::ALL {
        let enc = EncodingConfig::with_default_span(a0, period, m, ranges.clone());
        let cfg = ReservoirConfig::new(enc, ModeSet::paper_default(10), kin);
        let start = std::time::Instant::now();
        let ftr = reservoir::feature_matrix(&train.inputs(), &cfg, workers)?;
        let fte = reservoir::feature_matrix(&test.inputs(), &cfg, workers)?;
        let design = DesignMatrix::from_features(&ftr, &train.labels)?;
        let model = learning::train_ridge(&design, 1e-6)?;
        println!(
            "{kin:>13}: A_train = {:.3}, A_test = {:.3}  ({} features, {:.1}s)",
            learning::accuracy(&model, &ftr, &train.labels)?,
            learning::accuracy(&model, &fte, &test.labels)?,
            cfg.feature_dim()?,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
