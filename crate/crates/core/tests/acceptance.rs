//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Select a subset with `RELQRC_ACCEPTANCE=1,5,12`.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relqrc::cqed_drive::{self, DriveParams, FrequencyUnit};
use relqrc::datasets::{self, LabeledDataset, SpiralParams};
use relqrc::dense_engine::{self, DetectorKind};
use relqrc::encoding::{self, EncodingConfig, InputRange};
use relqrc::gaussian_engine::{self, DetectorObservables, ModeSet, StepConfig};
use relqrc::learning::{self, DesignMatrix};
use relqrc::reservoir::{self, FeatureVector, ReservoirConfig};
use relqrc::worldline::{KinematicsMode, Worldline};
use relqrc::C64;

const REL: KinematicsMode = KinematicsMode::Relativistic;
const NEWT: KinematicsMode = KinematicsMode::Newtonian;
const L_REG: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Shared spiral data and a feature cache so cells reused by several
/// criteria are simulated once.
struct Bench {
    data: LabeledDataset,
    train: LabeledDataset,
    test: LabeledDataset,
    ranges: Vec<InputRange>,
    workers: usize,
    cache: HashMap<String, (Vec<FeatureVector>, Vec<FeatureVector>)>,
}

struct Cell {
    a_train: f64,
    a_test: f64,
    phi: DMatrix<f64>,
}

impl Bench {
    fn new() -> Self {
        let data = datasets::two_spirals(&SpiralParams { n: 1000, ..Default::default() }).unwrap();
        let (train, test) = datasets::split(&data, 800, 200, 1).unwrap();
        let ranges = data.bounding_box().unwrap();
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Bench { data, train, test, ranges, workers, cache: HashMap::new() }
    }

    fn reservoir(&self, a0: f64, period: f64, m: usize, kin: KinematicsMode) -> ReservoirConfig {
        let enc = EncodingConfig::with_default_span(a0, period, m, self.ranges.clone());
        ReservoirConfig::new(enc, ModeSet::paper_default(10), kin)
    }

    fn cell(&mut self, a0: f64, period: f64, m: usize, kin: KinematicsMode) -> Cell {
        let key = format!("{a0}/{period}/{m}/{kin}");
        if !self.cache.contains_key(&key) {
            let cfg = self.reservoir(a0, period, m, kin);
            let ftr = reservoir::feature_matrix(&self.train.inputs(), &cfg, self.workers).unwrap();
            let fte = reservoir::feature_matrix(&self.test.inputs(), &cfg, self.workers).unwrap();
            self.cache.insert(key.clone(), (ftr, fte));
        }
        let (ftr, fte) = &self.cache[&key];
        let design = DesignMatrix::from_features(ftr, &self.train.labels).unwrap();
        let model = learning::train_ridge(&design, L_REG).unwrap();
        Cell {
            a_train: learning::accuracy(&model, ftr, &self.train.labels).unwrap(),
            a_test: learning::accuracy(&model, fte, &self.test.labels).unwrap(),
            phi: design.phi,
        }
    }
}

fn paper_encoding(a0: f64, period: f64, m: usize) -> EncodingConfig {
    EncodingConfig::with_default_span(a0, period, m, vec![InputRange::new(0.0, 1.0); 2])
}

fn measurement_times(enc: &EncodingConfig) -> Vec<f64> {
    let k = (enc.total_duration() / (0.5 * enc.period)).round() as usize;
    (1..=k).map(|i| 0.5 * enc.period * i as f64).collect()
}

fn c1_symplecticity() -> Verdict {
    let modes = ModeSet::paper_default(10);
    let (mut symp, mut conj, mut runs) = (0.0f64, 0.0f64, 0);
    for a0 in [1.0, 2.0, 3.0] {
        for period in [1.0, 2.0, 3.0] {
            for m in [1, 4] {
                for kin in KinematicsMode::ALL {
                    let enc = paper_encoding(a0, period, m);
                    let profile = encoding::encode(&[0.3, 0.8], &enc).unwrap();
                    let props = gaussian_engine::propagate(&modes, &profile, kin, &StepConfig::default(), &measurement_times(&enc))
                        .unwrap();
                    for s in &props {
                        symp = symp.max(s.symplectic_error());
                        conj = conj.max(s.conjugation_error());
                    }
                    runs += 1;
                }
            }
        }
    }
    verdict(
        symp < 1e-9 && conj < 1e-9,
        format!("{runs} runs, max|SΩSᵀ−Ω| = {symp:.2e}, max|S−X·conj(S)·X| = {conj:.2e} (limit 1e-9)"),
    )
}

fn c2_closure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut xi_err, mut x_err, mut norm_err, mut norm_abs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for a0 in [1.0, 2.0, 3.0] {
        for period in [1.0, 2.0, 3.0] {
            for _ in 0..4 {
                let enc = paper_encoding(a0, period, 4);
                let x = [rng.gen::<f64>(), rng.gen::<f64>()];
                let profile = encoding::encode(&x, &enc).unwrap();
                let wl = Worldline::new(&profile, REL);
                let total = profile.total_duration();
                let n_periods = (total / period).round() as usize;
                for n in 1..=n_periods {
                    let p = wl.at(n as f64 * period).unwrap();
                    xi_err = xi_err.max(p.xi.abs());
                    if n % 2 == 0 {
                        x_err = x_err.max(p.x.abs());
                    }
                }
                for i in 0..10_000 {
                    let xi = wl.at(total * i as f64 / 9_999.0).unwrap().xi;
                    let (ut, ux) = (xi.cosh(), xi.sinh());
                    // each term carries rounding of order ε·u_t², so the
                    // error is measured on that scale
                    let e = (ut * ut - ux * ux - 1.0).abs();
                    norm_abs = norm_abs.max(e);
                    norm_err = norm_err.max(e / (ut * ut));
                }
            }
        }
    }
    verdict(
        xi_err < 1e-12 && x_err < 1e-12 && norm_err < 1e-12,
        format!(
            "max|ξ(nT)| = {xi_err:.1e}, max|x(2nT)| = {x_err:.1e}, max|u·u−1|/u_t² = {norm_err:.1e} (limit 1e-12; unscaled {norm_abs:.1e})"
        ),
    )
}

fn c3_oracle() -> Verdict {
    let alpha = C64::new(0.0, 1.0);
    let modes = ModeSet::single_mode(3).with_alpha(alpha);
    let enc = EncodingConfig::with_default_span(2.0, 2.0, 1, vec![InputRange::new(0.0, 1.0); 2]);
    let profile = encoding::encode(&[0.3, 0.7], &enc).unwrap();
    let times = measurement_times(&enc);
    let mut worst = 0.0f64;
    for kin in KinematicsMode::ALL {
        let g = gaussian_engine::detector_trajectory(&modes, &profile, kin, &StepConfig::default(), &times).unwrap();
        let s0 = dense_engine::dense_initial(DetectorKind::Harmonic { levels: 12 }, alpha, 12).unwrap();
        let run = dense_engine::dense_propagate(&s0, &modes, &profile, kin, &StepConfig::default(), &times).unwrap();
        for (a, b) in g.iter().zip(&run.snapshots) {
            worst = worst.max(a.max_abs_diff(&b.detector_observables()));
        }
    }
    verdict(worst < 1e-3, format!("{} samples × 2 kinematics, max |Δ(n,q,p)| = {worst:.2e} (limit 1e-3)", times.len()))
}

fn c4_single_mode(bench: &Bench) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let inputs: Vec<Vec<f64>> = (0..50)
        .map(|_| bench.ranges.iter().map(|r| rng.gen_range(r.min..=r.max)).collect())
        .collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for kin in KinematicsMode::ALL {
        let full = bench.reservoir(3.0, 2.0, 4, kin);
        let single = ReservoirConfig { modes: ModeSet::single_mode(3), ..full.clone() };
        let f10 = reservoir::feature_matrix(&inputs, &full, bench.workers).unwrap();
        let f1 = reservoir::feature_matrix(&inputs, &single, bench.workers).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in f1.iter().zip(&f10) {
            let scale = b.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = a.values.iter().zip(&b.values).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
            worst = worst.max(diff / scale);
        }
        pass &= worst < 1e-2;
        parts.push(format!("{kin} {worst:.3e}"));
    }
    verdict(
        pass,
        format!("50 inputs (a0=3, T=2, m=4), max relative ∞-norm N=1 vs N=10: {} (limit 1e-2)", parts.join(", ")),
    )
}

fn c5_gap(bench: &mut Bench) -> Verdict {
    let r = bench.cell(3.0, 2.0, 4, REL);
    let n = bench.cell(3.0, 2.0, 4, NEWT);
    let gap = r.a_test - n.a_test;
    verdict(
        gap >= 0.2 && r.a_test >= 0.85,
        format!(
            "A_test rel = {:.3}, newt = {:.3}, gap = {gap:.3} (need ≥ 0.2, rel ≥ 0.85); A_train rel = {:.3}, newt = {:.3}",
            r.a_test, n.a_test, r.a_train, n.a_train
        ),
    )
}

fn non_increasing(err: &[f64], band: f64) -> bool {
    err.windows(2).all(|w| w[1] <= w[0] + band)
}

fn c6_trends(bench: &mut Bench) -> Verdict {
    let t_err: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&t| 1.0 - bench.cell(1.0, t, 4, REL).a_test).collect();
    let a_err: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&a| 1.0 - bench.cell(a, 2.0, 4, REL).a_test).collect();
    let newt: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&a| bench.cell(a, 2.0, 4, NEWT).a_test).collect();
    let spread = newt.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - newt.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
    verdict(
        non_increasing(&t_err, 0.03) && non_increasing(&a_err, 0.03) && spread < 0.05,
        format!(
            "rel error vs T=1/2/3 (a0=1): {}; vs a0=1/2/3 (T=2): {}; newt A_test vs a0: {} (spread {spread:.3}, limit 0.05)",
            fmt(&t_err),
            fmt(&a_err),
            fmt(&newt)
        ),
    )
}

fn c7_repetitions(bench: &mut Bench) -> Verdict {
    let r1 = bench.cell(2.0, 2.0, 1, REL).a_test;
    let r4 = bench.cell(2.0, 2.0, 4, REL).a_test;
    let n1 = bench.cell(2.0, 2.0, 1, NEWT).a_test;
    let n4 = bench.cell(2.0, 2.0, 4, NEWT).a_test;
    verdict(
        r4 - r1 >= 0.05 && n4 - n1 < 0.05,
        format!("rel A_test m=1 → 4: {r1:.3} → {r4:.3} (need +0.05); newt: {n1:.3} → {n4:.3} (need < +0.05)"),
    )
}

fn c8_rank(bench: &mut Bench) -> Verdict {
    let rank = |phi: &DMatrix<f64>| learning::kernel_spectrum(phi, L_REG).normalized().effective_rank();
    let r = rank(&bench.cell(3.0, 2.0, 4, REL).phi);
    let n = rank(&bench.cell(3.0, 2.0, 4, NEWT).phi);
    verdict(
        r as f64 >= 1.5 * n as f64,
        format!("effective rank (γ/γmax > 1e-6) rel = {r}, newt = {n}, ratio = {:.2} (need ≥ 1.5)", r as f64 / n.max(1) as f64),
    )
}

fn c9_ridge() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_grad, mut worst_spec) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = rng.gen_range(1..=12);
        let n = rng.gen_range(2..=30);
        let l = 10f64.powf(rng.gen_range(-6.0..0.0));
        let phi = DMatrix::from_fn(d, n, |_, _| rng.gen_range(-1.0..1.0));
        let y = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let data = DesignMatrix::new(phi, y).unwrap();
        let w = learning::train_ridge(&data, l).unwrap().weights;
        let g = learning::ridge_gradient(&data, &w, l);
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst_grad = worst_grad.max(g.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + wn));
        let a = learning::kernel_spectrum(&data.phi, 0.0);
        let b = learning::gram_spectrum(&data.phi, 0.0);
        for i in 0..d.min(n) {
            worst_spec = worst_spec.max((a.eigenvalues[i] - b.eigenvalues[i]).abs());
        }
    }
    verdict(
        worst_grad < 1e-8 && worst_spec < 1e-9,
        format!("100 instances, max ‖∇L‖∞/(1+‖w‖) = {worst_grad:.1e} (limit 1e-8), max spectral mismatch = {worst_spec:.1e} (limit 1e-9)"),
    )
}

fn c10_qubit(bench: &Bench) -> Verdict {
    let (train, test) = datasets::split(&bench.data, 400, 100, 1).unwrap();
    let alpha = C64::new(0.0, 10.0);
    let modes = ModeSet::single_mode(3).with_alpha(alpha);
    let mut leak = 0.0f64;
    let mut drift = 0.0f64;
    let mut acc = [0.0; 2];
    for (slot, kin) in [REL, NEWT].into_iter().enumerate() {
        let enc = EncodingConfig::with_default_span(3.0, 2.0, 4, bench.ranges.clone());
        let times = measurement_times(&enc);
        let s0 = dense_engine::dense_initial(DetectorKind::TwoLevel, alpha, 180).unwrap();
        let mut featurize = |ds: &LabeledDataset| -> Vec<FeatureVector> {
            ds.points
                .iter()
                .map(|p| {
                    let profile = encoding::encode(p, &enc).unwrap();
                    let run = dense_engine::dense_propagate(&s0, &modes, &profile, kin, &StepConfig::default(), &times).unwrap();
                    leak = leak.max(run.max_leakage);
                    drift = drift.max(run.max_norm_drift);
                    let obs: Vec<DetectorObservables> = run
                        .snapshots
                        .iter()
                        .map(|s| {
                            let q = dense_engine::qubit_features(s).unwrap();
                            DetectorObservables { n: q.pz, q: q.px, p: q.py }
                        })
                        .collect();
                    FeatureVector::from_observables(&obs)
                })
                .collect()
        };
        let ftr = featurize(&train);
        let fte = featurize(&test);
        let model = learning::train_ridge(&DesignMatrix::from_features(&ftr, &train.labels).unwrap(), L_REG).unwrap();
        acc[slot] = learning::accuracy(&model, &fte, &test.labels).unwrap();
    }
    let gap = acc[0] - acc[1];
    verdict(
        gap >= 0.15 && drift < 1e-8 && leak < 1e-6,
        format!(
            "A_test rel = {:.3}, newt = {:.3}, gap = {gap:.3} (need ≥ 0.15); max norm drift = {drift:.1e}, max leakage = {leak:.1e}",
            acc[0], acc[1]
        ),
    )
}

fn c11_drive() -> Verdict {
    let p = DriveParams { omega_n: 1.0, k_n: 1.0, ..DriveParams::circuit_example() };
    let enc = paper_encoding(2.0, 2.0, 1);
    let mut max_rate = 0.0f64;
    for x in [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] {
        let wl = Worldline::new(&encoding::encode(&x, &enc).unwrap(), REL);
        let total = enc.total_duration();
        for i in 0..=20_000 {
            let ph = cqed_drive::phase_modulation(&wl.at(total * i as f64 / 20_000.0).unwrap(), REL, &p);
            max_rate = max_rate.max(ph.theta_dot_plus.abs()).max(ph.theta_dot_minus.abs());
        }
    }
    let (plus, minus) = cqed_drive::drive_frequencies(&p).unwrap();
    let ghz = FrequencyUnit::MHz.factor_to(FrequencyUnit::GHz);
    let freq_ok = plus == 2099.0 && minus == 99.0 && (plus * ghz - 2.099).abs() < 1e-12 && (minus * ghz - 0.099).abs() < 1e-12;
    let coupling = cqed_drive::effective_coupling_check(&p, &ModeSet::paper_default(10)).unwrap();
    verdict(
        max_rate <= 10.0 && freq_ok && coupling.matches,
        format!(
            "max θ̇± = {max_rate:.3} Ω (limit 10); ω+ = {:.3} GHz, ω− = {:.3} GHz; gη/Ω = {:.6} vs λ/√(Lω_n) = {:.6}",
            plus * ghz,
            minus * ghz,
            coupling.drive_coupling,
            coupling.field_coupling
        ),
    )
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "[dataset]\nn = 60\nn_train = 40\nn_test = 20\n[encoding]\na0 = 2.0\nrepetitions = 1\n[modes]\ncount = 4\n[convergence]\nsamples = 2\nmode_counts = [1, 4]\n",
    )
    .unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let args = ["relqrc", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "5", "--workers", workers, "train"];
        assert_eq!(relqrc::cli::main_with_args(args), 0);
        let read = |f: &str| std::fs::read(out.join(f)).unwrap();
        (read("metrics.json"), read("model.json"), read("predictions_test.csv"))
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    verdict(
        a == b && a == c,
        format!("metrics/model/predictions byte-identical across repeat: {}, across worker counts: {}", a == b, a == c),
    )
}

fn main() {
    let selected: Option<Vec<u32>> = std::env::var("RELQRC_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |i: u32| selected.as_ref().is_none_or(|s| s.contains(&i));
    let mut bench = Bench::new();
    let mut failures = Vec::new();
    let names = [
        "symplecticity & conjugation",
        "world-line closure",
        "oracle equivalence",
        "single-mode adequacy",
        "classification gap",
        "trend reproduction",
        "repetition effect",
        "kernel expressivity",
        "ridge optimality",
        "qubit variant",
        "drive bound",
        "determinism",
    ];
    for (idx, name) in names.iter().enumerate() {
        let id = idx as u32 + 1;
        if !wanted(id) {
            continue;
        }
        let start = Instant::now();
        let v = match id {
            1 => c1_symplecticity(),
            2 => c2_closure(),
            3 => c3_oracle(),
            4 => c4_single_mode(&bench),
            5 => c5_gap(&mut bench),
            6 => c6_trends(&mut bench),
            7 => c7_repetitions(&mut bench),
            8 => c8_rank(&mut bench),
            9 => c9_ridge(),
            10 => c10_qubit(&bench),
            11 => c11_drive(),
            _ => c12_determinism(),
        };
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{tag} [{id:>2}] {name}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failures.push(id);
        }
    }
    if !failures.is_empty() {
        let _ = writeln!(std::io::stderr(), "acceptance: {} criterion(s) failed: {failures:?}", failures.len());
        std::process::exit(1);
    }
}
