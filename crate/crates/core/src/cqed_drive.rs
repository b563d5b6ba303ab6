//! Phase-modulated two-tone drive that makes a static circuit-QED atom
//! experience the interaction of a detector moving along a chosen world line.
//!
//! Frequencies are plain numbers tagged with a [`FrequencyUnit`]; world-line
//! proper times are in the reciprocal unit (MHz ↔ µs).

use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::gaussian_engine::ModeSet;
use crate::worldline::{KinematicsMode, Worldline, WorldlinePoint};
use crate::{Error, Result};

/// Drive strengths at or above this break the small-η expansion.
pub const ETA_LIMIT: f64 = 0.1;
/// Drive strengths above this are accepted with a warning.
pub const ETA_WARN: f64 = 0.05;
/// Minimum ratio of the circuit energy scales to g before warning.
pub const RWA_RATIO_WARN: f64 = 50.0;
/// Minimum samples per fast drive period 2π/ω₊.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 20.0;
/// Relative tolerance of [`effective_coupling_check`].
pub const COUPLING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyUnit {
    Hz,
    #[serde(alias = "khz")]
    KHz,
    #[default]
    #[serde(alias = "mhz")]
    MHz,
    #[serde(alias = "ghz")]
    GHz,
}

impl FrequencyUnit {
    pub fn in_hz(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::KHz => "kHz",
            FrequencyUnit::MHz => "MHz",
            FrequencyUnit::GHz => "GHz",
        }
    }

    /// Factor converting a frequency in `self` to `target`.
    pub fn factor_to(self, target: FrequencyUnit) -> f64 {
        self.in_hz() / target.in_hz()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    /// Cavity frequency ω₀.
    pub omega0: f64,
    /// Atom energy ε.
    pub epsilon: f64,
    /// Simulated detector frequency Ω.
    pub omega_sim: f64,
    /// Atom–cavity coupling g.
    pub g: f64,
    /// Drive strength η.
    pub eta: f64,
    /// Simulated field-mode frequency ω_n.
    pub omega_n: f64,
    /// Simulated field-mode wavenumber k_n.
    pub k_n: f64,
    #[serde(default)]
    pub units: FrequencyUnit,
}

impl DriveParams {
    /// ω₀ = 1 GHz, ε = 1.1 GHz, Ω = ω_n = k_n = 1 MHz, g = 10/√(3π) MHz, η = 0.01.
    pub fn circuit_example() -> Self {
        DriveParams {
            omega0: 1000.0,
            epsilon: 1100.0,
            omega_sim: 1.0,
            g: 10.0 / (3.0 * std::f64::consts::PI).sqrt(),
            eta: 0.01,
            omega_n: 1.0,
            k_n: 1.0,
            units: FrequencyUnit::MHz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega0, self.epsilon, self.omega_sim, self.g, self.eta, self.omega_n, self.k_n];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("drive parameters must be finite".into()));
        }
        if !(0.0..ETA_LIMIT).contains(&self.eta) {
            return Err(Error::Config(format!("drive strength eta must lie in [0, {ETA_LIMIT}), got {}", self.eta)));
        }
        if self.g < 0.0 || self.omega_n < 0.0 || self.k_n < 0.0 {
            return Err(Error::Config("g, omega_n and k_n must be non-negative".into()));
        }
        Ok(())
    }

    /// min(ε, ω₀, |ε+ω₀|, |ε−ω₀|)/g; infinite when g = 0.
    pub fn rwa_ratio(&self) -> f64 {
        let scale = [self.epsilon, self.omega0, (self.epsilon + self.omega0).abs(), (self.epsilon - self.omega0).abs()]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if self.g == 0.0 {
            f64::INFINITY
        } else {
            scale / self.g
        }
    }

    /// Non-fatal validity concerns, also emitted through `log`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eta > ETA_WARN {
            out.push(format!("eta = {} exceeds {ETA_WARN}; small-drive expansion is marginal", self.eta));
        }
        let r = self.rwa_ratio();
        if r < RWA_RATIO_WARN {
            out.push(format!("rotating-wave ratio {r:.3} is below {RWA_RATIO_WARN}"));
        }
        for w in &out {
            log::warn!("{w}");
        }
        out
    }
}

/// ω± = ε ± ω₀ − Ω.
pub fn drive_frequencies(p: &DriveParams) -> Result<(f64, f64)> {
    p.validate()?;
    let plus = p.epsilon + p.omega0 - p.omega_sim;
    let minus = p.epsilon - p.omega0 - p.omega_sim;
    if !(plus > 0.0) || !(minus > 0.0) {
        return Err(Error::Config(format!("drive frequencies must be positive, got ω+ = {plus}, ω- = {minus}")));
    }
    Ok((plus, minus))
}

/// Phases θ± and their proper-time rates at one world-line event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub theta_dot_plus: f64,
    pub theta_dot_minus: f64,
}

/// θ± = ω_n t ± k_n x with θ̇± = ω_n cosh ξ ± k_n sinh ξ (relativistic) or
/// ω_n ± k_n v (Newtonian, where the point's `xi` is the velocity).
pub fn phase_modulation(wp: &WorldlinePoint, kinematics: KinematicsMode, p: &DriveParams) -> PhaseSample {
    let (dt, dx) = match kinematics {
        KinematicsMode::Relativistic => (wp.xi.cosh(), wp.xi.sinh()),
        KinematicsMode::Newtonian => (1.0, wp.xi),
    };
    PhaseSample {
        theta_plus: p.omega_n * wp.t + p.k_n * wp.x,
        theta_minus: p.omega_n * wp.t - p.k_n * wp.x,
        theta_dot_plus: p.omega_n * dt + p.k_n * dx,
        theta_dot_minus: p.omega_n * dt - p.k_n * dx,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveDiagnostics {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// max |ζ_exact − ζ_slow|.
    pub max_zeta_residual: f64,
    /// max |ζ_exact|.
    pub max_zeta: f64,
    /// max |θ̇±| / min(ω±).
    pub modulation_ratio: f64,
    /// max θ̇± in units of Ω.
    pub max_rate_over_omega: f64,
    /// min(ε, ω₀, |ε±ω₀|)/g.
    pub rwa_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriveSignal {
    pub tau: Vec<f64>,
    pub theta_plus: Vec<f64>,
    pub theta_minus: Vec<f64>,
    pub theta_dot_plus: Vec<f64>,
    pub theta_dot_minus: Vec<f64>,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub f: Vec<f64>,
    pub zeta_exact: Vec<f64>,
    pub zeta_slow: Vec<f64>,
    pub diagnostics: Option<DriveDiagnostics>,
    pub units: FrequencyUnit,
}

impl DriveSignal {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Columns τ, θ₊, θ₋, θ̇₊, θ̇₋, F, ζ_exact, ζ_slow with rates in `unit`
    /// and τ in its reciprocal.
    pub fn write_csv<W: Write>(&self, mut w: W, unit: FrequencyUnit, comment: Option<&str>) -> Result<()> {
        let s = self.units.factor_to(unit);
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "# rates in {}, tau in 1/{}", unit.symbol(), unit.symbol())?;
        writeln!(w, "tau,theta_plus,theta_minus,theta_dot_plus,theta_dot_minus,F,zeta_exact,zeta_slow")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.tau[i] / s,
                self.theta_plus[i],
                self.theta_minus[i],
                self.theta_dot_plus[i] * s,
                self.theta_dot_minus[i] * s,
                self.f[i],
                self.zeta_exact[i] * s,
                self.zeta_slow[i] * s,
            )?;
        }
        Ok(())
    }
}

/// Uniform grid on [0, duration] with `per_period` samples per 2π/ω₊.
pub fn uniform_grid(p: &DriveParams, duration: f64, per_period: f64) -> Result<Vec<f64>> {
    let (plus, _) = drive_frequencies(p)?;
    if !(duration >= 0.0) {
        return Err(Error::Config(format!("grid duration must be non-negative, got {duration}")));
    }
    if duration == 0.0 {
        return Ok(Vec::new());
    }
    let n = (duration * plus * per_period / TAU).ceil() as usize;
    Ok((0..=n).map(|i| duration * i as f64 / n as f64).collect())
}

/// F = F₊ + F₋ with F₊ = cos(ω₊τ − θ₋) − cos(ω₊τ − θ₊) and
/// F₋ = cos(ω₋τ + θ₊) − cos(ω₋τ + θ₋); ζ = dF/dτ analytically, plus the
/// slow-phase approximation that drops θ̇±.
pub fn drive_waveform(p: &DriveParams, worldline: &Worldline, tau_grid: &[f64]) -> Result<DriveSignal> {
    let (wp_, wm_) = drive_frequencies(p)?;
    let mut sig = DriveSignal { units: p.units, ..Default::default() };
    if tau_grid.is_empty() {
        return Ok(sig);
    }
    let max_gap = TAU / wp_ / MIN_SAMPLES_PER_PERIOD;
    for w in tau_grid.windows(2) {
        let gap = w[1] - w[0];
        if gap < 0.0 {
            return Err(Error::Config("drive grid must be sorted".into()));
        }
        if gap > max_gap * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "drive grid spacing {gap:.3e} exceeds {max_gap:.3e} ({MIN_SAMPLES_PER_PERIOD} samples per 2π/ω+)"
            )));
        }
    }

    let n = tau_grid.len();
    for v in [
        &mut sig.tau,
        &mut sig.theta_plus,
        &mut sig.theta_minus,
        &mut sig.theta_dot_plus,
        &mut sig.theta_dot_minus,
        &mut sig.f_plus,
        &mut sig.f_minus,
        &mut sig.f,
        &mut sig.zeta_exact,
        &mut sig.zeta_slow,
    ] {
        v.reserve(n);
    }
    let mut diag = DriveDiagnostics {
        omega_plus: wp_,
        omega_minus: wm_,
        max_zeta_residual: 0.0,
        max_zeta: 0.0,
        modulation_ratio: 0.0,
        max_rate_over_omega: 0.0,
        rwa_ratio: p.rwa_ratio(),
    };
    let mut max_rate = 0.0f64;
    for &tau in tau_grid {
        let ph = phase_modulation(&worldline.at(tau)?, worldline.mode(), p);
        let a1 = wp_ * tau - ph.theta_minus;
        let a2 = wp_ * tau - ph.theta_plus;
        let b1 = wm_ * tau + ph.theta_plus;
        let b2 = wm_ * tau + ph.theta_minus;
        let fp = a1.cos() - a2.cos();
        let fm = b1.cos() - b2.cos();
        let exact = -(wp_ - ph.theta_dot_minus) * a1.sin() + (wp_ - ph.theta_dot_plus) * a2.sin()
            - (wm_ + ph.theta_dot_plus) * b1.sin()
            + (wm_ + ph.theta_dot_minus) * b2.sin();
        let slow = -wp_ * a1.sin() + wp_ * a2.sin() - wm_ * b1.sin() + wm_ * b2.sin();

        max_rate = max_rate.max(ph.theta_dot_plus.abs()).max(ph.theta_dot_minus.abs());
        diag.max_zeta_residual = diag.max_zeta_residual.max((exact - slow).abs());
        diag.max_zeta = diag.max_zeta.max(exact.abs());

        sig.tau.push(tau);
        sig.theta_plus.push(ph.theta_plus);
        sig.theta_minus.push(ph.theta_minus);
        sig.theta_dot_plus.push(ph.theta_dot_plus);
        sig.theta_dot_minus.push(ph.theta_dot_minus);
        sig.f_plus.push(fp);
        sig.f_minus.push(fm);
        sig.f.push(fp + fm);
        sig.zeta_exact.push(exact);
        sig.zeta_slow.push(slow);
    }
    diag.modulation_ratio = max_rate / wp_.min(wm_);
    diag.max_rate_over_omega = max_rate / p.omega_sim;
    sig.diagnostics = Some(diag);
    Ok(sig)
}

/// Comparison of the drive-induced coupling gη/Ω with the field coupling
/// λ/√(Lω_n) of the simulated mode (both in units of Ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub mode: usize,
    pub drive_coupling: f64,
    pub field_coupling: f64,
    /// drive / field.
    pub ratio: f64,
    /// ω_n/Ω from the drive against the mode set.
    pub frequency_ratio_drive: f64,
    pub frequency_ratio_field: f64,
    pub zero_coupling: bool,
    pub matches: bool,
}

pub fn effective_coupling_check(p: &DriveParams, modes: &ModeSet) -> Result<CouplingReport> {
    p.validate()?;
    modes.validate()?;
    let n = modes.coherent_mode;
    let drive = p.g * p.eta / p.omega_sim;
    let field = modes.coupling_amplitude(n) / modes.detector_frequency;
    let ratio = drive / field;
    let fr_drive = p.omega_n / p.omega_sim;
    let fr_field = modes.omega(n) / modes.detector_frequency;
    let close = |a: f64, b: f64| (a - b).abs() <= COUPLING_TOLERANCE * a.abs().max(b.abs());
    let zero_coupling = drive == 0.0;
    let matches = !zero_coupling && close(drive, field) && close(fr_drive, fr_field);
    if zero_coupling {
        log::warn!("effective drive coupling is zero");
    }
    Ok(CouplingReport {
        mode: n,
        drive_coupling: drive,
        field_coupling: field,
        ratio,
        frequency_ratio_drive: fr_drive,
        frequency_ratio_field: fr_field,
        zero_coupling,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{build_profile, EncodingConfig, InputRange};
    use crate::worldline::{AccelerationProfile, KinematicsMode};
    use approx::assert_abs_diff_eq;

    fn accelerating_worldline(a0: f64, kin: KinematicsMode) -> Worldline {
        let enc = EncodingConfig::with_default_span(a0, 2.0, 1, vec![InputRange::new(0.0, 1.0); 2]);
        let profile = build_profile(&[a0 * 1.1, a0 * 0.9], &enc).unwrap();
        Worldline::new(&profile, kin)
    }

    #[test]
    fn circuit_example_frequencies() {
        let p = DriveParams::circuit_example();
        let (plus, minus) = drive_frequencies(&p).unwrap();
        assert_eq!((plus, minus), (2099.0, 99.0));
        let ghz = FrequencyUnit::MHz.factor_to(FrequencyUnit::GHz);
        assert_abs_diff_eq!(plus * ghz, 2.099, epsilon = 1e-12);
        assert_abs_diff_eq!(minus * ghz, 0.099, epsilon = 1e-12);
        // |ε − ω₀|/g ≈ 30.7, below the warning ratio
        let w = p.warnings();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("rotating-wave"));
        assert_abs_diff_eq!(p.rwa_ratio(), 100.0 / p.g, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_tone_rejected() {
        let p = DriveParams { epsilon: 1000.0, omega_sim: 0.0, ..DriveParams::circuit_example() };
        assert!(matches!(drive_frequencies(&p), Err(Error::Config(_))));
        let strong = DriveParams { eta: 0.2, ..DriveParams::circuit_example() };
        assert!(strong.validate().is_err());
        let marginal = DriveParams { eta: 0.07, g: 100.0, ..DriveParams::circuit_example() };
        assert_eq!(marginal.warnings().len(), 2);
    }

    #[test]
    fn detector_at_rest() {
        let p = DriveParams::circuit_example();
        let wp = WorldlinePoint { tau: 0.7, t: 0.7, x: 0.0, xi: 0.0 };
        let ph = phase_modulation(&wp, KinematicsMode::Relativistic, &p);
        assert_eq!((ph.theta_plus, ph.theta_minus), (0.7, 0.7));
        assert_eq!((ph.theta_dot_plus, ph.theta_dot_minus), (1.0, 1.0));
    }

    #[test]
    fn phase_rates_match_finite_differences() {
        let p = DriveParams { omega_n: 1.3, k_n: 0.8, ..DriveParams::circuit_example() };
        for kin in KinematicsMode::ALL {
            let wl = accelerating_worldline(2.0, kin);
            let h = 1e-6;
            for &tau in &[0.3, 1.7, 2.6, 3.9] {
                let c = phase_modulation(&wl.at(tau).unwrap(), kin, &p);
                let f = phase_modulation(&wl.at(tau + h).unwrap(), kin, &p);
                let b = phase_modulation(&wl.at(tau - h).unwrap(), kin, &p);
                assert_abs_diff_eq!((f.theta_plus - b.theta_plus) / (2.0 * h), c.theta_dot_plus, epsilon = 1e-7);
                assert_abs_diff_eq!((f.theta_minus - b.theta_minus) / (2.0 * h), c.theta_dot_minus, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn rate_identities() {
        let p = DriveParams::circuit_example();
        let wl = accelerating_worldline(3.0, KinematicsMode::Relativistic);
        for i in 0..=400 {
            let wp = wl.at(8.0 * i as f64 / 400.0).unwrap();
            let ph = phase_modulation(&wp, KinematicsMode::Relativistic, &p);
            let sum = ph.theta_dot_plus + ph.theta_dot_minus;
            let diff = ph.theta_dot_plus - ph.theta_dot_minus;
            assert_abs_diff_eq!(sum, 2.0 * p.omega_n * wp.xi.cosh(), epsilon = 1e-12 * sum.abs());
            assert_abs_diff_eq!(diff, 2.0 * p.k_n * wp.xi.sinh(), epsilon = 1e-12 * sum.abs());
        }
    }

    #[test]
    fn modulation_rate_bound() {
        let p = DriveParams::circuit_example();
        let wl = accelerating_worldline(2.0, KinematicsMode::Relativistic);
        let grid = uniform_grid(&p, 8.0, 20.0).unwrap();
        let sig = drive_waveform(&p, &wl, &grid).unwrap();
        let d = sig.diagnostics.unwrap();
        assert!(d.max_rate_over_omega <= 10.0, "{}", d.max_rate_over_omega);
        assert!(d.max_rate_over_omega > 5.0);
        assert!(d.modulation_ratio < 0.1);
    }

    #[test]
    fn static_world_line_slow_residual_bound() {
        let p = DriveParams { omega0: 20.0, epsilon: 30.0, ..DriveParams::circuit_example() };
        let wl = Worldline::new(&AccelerationProfile::constant(0.0, 5.0).unwrap(), KinematicsMode::Relativistic);
        let grid = uniform_grid(&p, 5.0, 40.0).unwrap();
        let sig = drive_waveform(&p, &wl, &grid).unwrap();
        let d = sig.diagnostics.unwrap();
        // four terms each off by θ̇ = ω_n
        assert!(d.max_zeta_residual <= 4.0 * p.omega_n + 1e-12);
        for i in 0..sig.len() {
            let tau = sig.tau[i];
            let (plus, minus) = (d.omega_plus, d.omega_minus);
            let beat = ((plus - p.omega_n) * tau).cos() - ((plus - p.omega_n) * tau).cos()
                + ((minus + p.omega_n) * tau).cos()
                - ((minus + p.omega_n) * tau).cos();
            assert_abs_diff_eq!(sig.f[i], beat, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeta_integrates_back_to_f() {
        let p = DriveParams { omega0: 20.0, epsilon: 30.0, ..DriveParams::circuit_example() };
        let wl = accelerating_worldline(2.0, KinematicsMode::Relativistic);
        let check = |per_period: f64| {
            let grid = uniform_grid(&p, 8.0, per_period).unwrap();
            let sig = drive_waveform(&p, &wl, &grid).unwrap();
            let mut acc = 0.0;
            let mut err = 0.0f64;
            for i in 1..sig.len() {
                acc += 0.5 * (sig.zeta_exact[i] + sig.zeta_exact[i - 1]) * (sig.tau[i] - sig.tau[i - 1]);
                err = err.max((acc - (sig.f[i] - sig.f[0])).abs());
            }
            err
        };
        let coarse = check(50.0);
        let fine = check(100.0);
        assert!(coarse < 1e-2, "{coarse}");
        // trapezoid rule: halving h cuts the error by about four
        assert!(fine < coarse / 3.0, "{coarse} {fine}");
    }

    #[test]
    fn grid_checks() {
        let p = DriveParams::circuit_example();
        let wl = accelerating_worldline(2.0, KinematicsMode::Relativistic);
        assert!(drive_waveform(&p, &wl, &[]).unwrap().is_empty());
        assert!(uniform_grid(&p, 0.0, 20.0).unwrap().is_empty());
        let coarse = uniform_grid(&p, 1.0, 10.0).unwrap();
        assert!(matches!(drive_waveform(&p, &wl, &coarse), Err(Error::Config(_))));
    }

    #[test]
    fn coupling_consistency() {
        let p = DriveParams::circuit_example();
        let modes = ModeSet::paper_default(10);
        let r = effective_coupling_check(&p, &modes).unwrap();
        assert!(r.matches, "{r:?}");
        assert_abs_diff_eq!(r.drive_coupling, 0.1 / (3.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);

        let doubled = effective_coupling_check(&p, &modes.clone().with_coupling(0.2)).unwrap();
        assert!(!doubled.matches);
        assert_abs_diff_eq!(doubled.ratio, 0.5, epsilon = 1e-12);
        let half_drive = effective_coupling_check(&DriveParams { eta: 0.02, ..p.clone() }, &modes).unwrap();
        assert_abs_diff_eq!(half_drive.ratio, 2.0, epsilon = 1e-12);

        let off = effective_coupling_check(&DriveParams { eta: 0.0, ..p }, &modes).unwrap();
        assert!(off.zero_coupling && !off.matches);
    }

    #[test]
    fn csv_export_converts_units() {
        let p = DriveParams::circuit_example();
        let wl = accelerating_worldline(2.0, KinematicsMode::Relativistic);
        let grid: Vec<f64> = (0..5).map(|i| i as f64 * 1e-4).collect();
        let sig = drive_waveform(&p, &wl, &grid).unwrap();
        let mut buf = Vec::new();
        sig.write_csv(&mut buf, FrequencyUnit::GHz, Some("test")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "tau,theta_plus,theta_minus,theta_dot_plus,theta_dot_minus,F,zeta_exact,zeta_slow");
        assert_eq!(rows.len(), 6);
        let last: Vec<f64> = rows[5].split(',').map(|s| s.parse().unwrap()).collect();
        assert_abs_diff_eq!(last[0], 4e-4 * 1e3, epsilon = 1e-12);
        assert_abs_diff_eq!(last[3], sig.theta_dot_plus[4] * 1e-3, epsilon = 1e-15);
    }
}
