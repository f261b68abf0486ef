//! End-to-end runs: closed-form populations, L–R projection, concurrence.
//!
//! Time is dimensionless `γ₀t` throughout, with `γ₀ = 1`. Base rates in a
//! [`RunConfig`] are multiples of `γ₀`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{
    amplitude_damping_populations, closed_form_populations, decay_pair, dephasing_populations,
    depolarizing_populations, stationary_concurrence, ChannelKind,
};
use crate::measures::{concurrence, config_for_indistinguishability, indistinguishability};
use crate::oracle::{build_generator, default_step, expm_propagate, integrate};
use crate::slocc::{probability_closed_form, project, stationary_probability, DistributedState};
use crate::states::{
    bell_state_norm, populations_to_pseudospin, selection_rule_check, BasisLabel, BellPopulations,
    SpatialConfig, Statistics, FORBIDDEN_TOL,
};
use crate::{Error, Result};

/// Comparison tolerance for [`run_validate`].
pub const VALIDATION_TOL: f64 = 1e-8;

/// Times, in units of `1/γ₀`, at which [`run_validate`] compares.
pub const VALIDATION_TIMES: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

/// Concurrence threshold that defines the critical time of sweeps under
/// amplitude damping.
pub const CRITICAL_CONCURRENCE: f64 = 1e-5;

/// Grid step for the critical-time search.
pub const CRITICAL_STEP: f64 = 1e-3;

/// CSV header of trajectory files.
pub const TRAJECTORY_HEADER: &str = "t,p_1m,p_1p,p_a,p_b,P_LR,C,I";

/// CSV header of sweep files.
pub const SWEEP_HEADER: &str = "I,l2,C,P_LR";

/// Ids accepted by [`run_figure`].
pub const FIGURE_IDS: [&str; 8] = ["2a", "2b", "3a", "3b", "4a", "4b", "A1", "A2"];

/// Indistinguishability values of the time-resolved figure curves.
pub const FIGURE_LEVELS: [f64; 4] = [0.0, 0.5, 0.75, 1.0];

const FIGURE_T_MAX: f64 = 10.0;
const FIGURE_SAMPLES: usize = 201;
const FIGURE_SWEEP_POINTS: usize = 51;

/// How the spatial wave functions are given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpatialSpec {
    /// `l²` and `l′²`; `r`, `r′` follow from normalization.
    Probabilities { l2: f64, lprime2: f64 },
    /// Target indistinguishability on the `l = r′` branch.
    Indistinguishability(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    Label(BasisLabel),
    /// Weights over the channel's basis, in its label order.
    Populations([f64; 4]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub channel: ChannelKind,
    pub statistics: Statistics,
    pub spatial: SpatialSpec,
    pub theta: f64,
    pub gamma0_l: f64,
    pub gamma0_r: f64,
    pub initial: InitialState,
    pub t_max: f64,
    pub samples: usize,
    /// Step for oracle cross-checks; `None` picks the default.
    pub dt_oracle: Option<f64>,
    pub output_path: Option<String>,
}

impl RunConfig {
    /// Figure-style defaults: `|1₋⟩`, unit rates, 201 samples up to `γ₀t = 10`.
    pub fn new(channel: ChannelKind, statistics: Statistics, spatial: SpatialSpec, theta: f64) -> Self {
        RunConfig {
            channel,
            statistics,
            spatial,
            theta,
            gamma0_l: 1.0,
            gamma0_r: 1.0,
            initial: InitialState::Label(BasisLabel::OneMinus),
            t_max: FIGURE_T_MAX,
            samples: FIGURE_SAMPLES,
            dt_oracle: None,
            output_path: None,
        }
    }

    pub fn spatial_config(&self) -> Result<SpatialConfig> {
        match self.spatial {
            SpatialSpec::Probabilities { l2, lprime2 } => {
                SpatialConfig::from_probabilities(l2, lprime2, self.theta, self.statistics)
            }
            SpatialSpec::Indistinguishability(target) => {
                config_for_indistinguishability(target, self.theta, self.statistics)
            }
        }
    }

    pub fn initial_populations(&self) -> Result<BellPopulations> {
        let basis = self.channel.basis();
        match self.initial {
            InitialState::Label(label) => BellPopulations::pure(basis, label),
            InitialState::Populations(p) => BellPopulations::new(basis, p),
        }
    }

    /// Checks the invariants and resolves the spatial configuration.
    pub fn validate(&self) -> Result<(SpatialConfig, BellPopulations)> {
        if self.samples < 2 {
            return Err(Error::InvalidConfig(format!("samples = {} must be at least 2", self.samples)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_max = {} must be positive", self.t_max)));
        }
        if let Some(dt) = self.dt_oracle {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!("dt_oracle = {dt} must be positive")));
            }
        }
        if self.channel == ChannelKind::AmplitudeDamping && self.gamma0_l != self.gamma0_r {
            return Err(Error::InvalidConfig(
                "amplitude damping needs gamma0L == gamma0R".into(),
            ));
        }
        let config = self.spatial_config()?;
        let p0 = self.initial_populations()?;
        selection_rule_check(&config, &p0)?;
        // Build once so negative rates are reported before any evolution.
        self.channel.effective_rates(&config, self.gamma0_l, self.gamma0_r)?;
        Ok((config, p0))
    }

    fn metadata(&self, config: &SpatialConfig) -> Vec<(String, String)> {
        let mut m = vec![
            ("channel".to_string(), self.channel.to_string()),
            ("statistics".to_string(), self.statistics.to_string()),
            ("theta".to_string(), fmt_num(self.theta)),
            ("l2".to_string(), fmt_num(config.l() * config.l())),
            ("lprime2".to_string(), fmt_num(config.lprime() * config.lprime())),
            ("gamma0L".to_string(), fmt_num(self.gamma0_l)),
        ];
        if self.channel != ChannelKind::Depolarizing {
            m.push(("gamma0R".to_string(), fmt_num(self.gamma0_r)));
        }
        m.push(("initial_state".to_string(), match self.initial {
            InitialState::Label(label) => label.name().to_string(),
            InitialState::Populations(p) => p.map(fmt_num).join(" "),
        }));
        m
    }
}

/// Closed-form populations under possibly different base rates at L and R.
pub fn evolve_populations(
    channel: ChannelKind,
    p0: &BellPopulations,
    config: &SpatialConfig,
    gamma0_l: f64,
    gamma0_r: f64,
    t: f64,
) -> Result<BellPopulations> {
    let rates = channel.effective_rates(config, gamma0_l, gamma0_r)?;
    let pair = decay_pair(&rates, channel.regions());
    match channel {
        ChannelKind::PhaseDamping => dephasing_populations(p0, pair, t),
        ChannelKind::Depolarizing => depolarizing_populations(p0, pair, t),
        ChannelKind::AmplitudeDamping => {
            if gamma0_l != gamma0_r {
                return Err(Error::InvalidConfig(
                    "amplitude damping needs gamma0L == gamma0R".into(),
                ));
            }
            amplitude_damping_populations(p0, config, gamma0_l, t)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub populations: [f64; 4],
    pub probability: f64,
    pub concurrence: f64,
    pub indistinguishability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<TrajectoryRow>,
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_metadata(out: &mut String, metadata: &[(String, String)]) {
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k}={v}");
    }
}

impl TrajectoryRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write_metadata(&mut out, &self.metadata);
        out.push_str(TRAJECTORY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields: Vec<String> = std::iter::once(r.t)
                .chain(r.populations)
                .chain([r.probability, r.concurrence, r.indistinguishability])
                .map(fmt_num)
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn concurrences(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.concurrence).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.probability).collect()
    }
}

fn row_at(
    cfg: &RunConfig,
    config: &SpatialConfig,
    p0: &BellPopulations,
    indist: f64,
    t: f64,
) -> Result<TrajectoryRow> {
    let pops = evolve_populations(cfg.channel, p0, config, cfg.gamma0_l, cfg.gamma0_r, t)?;
    let state = project(&pops, config).map_err(|e| {
        e.context(format!(
            "projection at t = {t} ({}, {}, l2 = {}, lprime2 = {}, theta = {})",
            cfg.channel,
            cfg.statistics,
            config.l() * config.l(),
            config.lprime() * config.lprime(),
            cfg.theta
        ))
    })?;
    Ok(TrajectoryRow {
        t,
        populations: pops.values(),
        probability: state.probability(),
        concurrence: concurrence(&state),
        indistinguishability: indist,
    })
}

/// Equally spaced samples of `[0, t_max]`.
pub fn time_grid(t_max: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2) - 1;
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

pub fn run_evolve(cfg: &RunConfig) -> Result<TrajectoryRecord> {
    let (config, p0) = cfg.validate()?;
    let indist = indistinguishability(&config)?.value;
    let rows = time_grid(cfg.t_max, cfg.samples)
        .into_iter()
        .map(|t| row_at(cfg, &config, &p0, indist, t))
        .collect::<Result<Vec<_>>>()?;
    let mut metadata = cfg.metadata(&config);
    metadata.push(("indistinguishability".into(), fmt_num(indist)));
    Ok(TrajectoryRecord { metadata, rows })
}

/// Distributed state from `|1₋⟩` after time `t` at unit base rates.
pub fn distributed_state(channel: ChannelKind, config: &SpatialConfig, t: f64) -> Result<DistributedState> {
    let p0 = BellPopulations::pure(channel.basis(), BasisLabel::OneMinus)?;
    let pops = closed_form_populations(channel, &p0, config, 1.0, t)?;
    project(&pops, config)
}

/// When a sweep evaluates the concurrence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepTime {
    /// Long-time values; for amplitude damping, the critical time instead.
    Stationary,
    At(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub channel: ChannelKind,
    pub statistics: Statistics,
    pub theta: f64,
    pub grid: Vec<f64>,
    pub time: SweepTime,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub indistinguishability: f64,
    pub l2: f64,
    pub concurrence: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write_metadata(&mut out, &self.metadata);
        out.push_str(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [r.indistinguishability, r.l2, r.concurrence, r.probability].map(fmt_num);
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Evenly spaced indistinguishability targets over `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    time_grid(1.0, points)
}

/// First multiple of [`CRITICAL_STEP`] at which the separated-qubit
/// concurrence under amplitude damping drops below [`CRITICAL_CONCURRENCE`].
///
/// The concurrence is monotone in time here, so the grid is searched by
/// bisection.
pub fn critical_time(statistics: Statistics, theta: f64) -> Result<f64> {
    let config = SpatialConfig::separated(statistics).with_theta(theta);
    let below = |k: u64| -> Result<bool> {
        let state = distributed_state(ChannelKind::AmplitudeDamping, &config, k as f64 * CRITICAL_STEP)?;
        Ok(concurrence(&state) < CRITICAL_CONCURRENCE)
    };
    let (mut lo, mut hi) = (0_u64, 1_u64);
    while !below(hi)? {
        lo = hi;
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::InvalidConfig("critical time not reached".into()));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 * CRITICAL_STEP)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    if let Some(bad) = cfg.grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidConfig(format!("grid value {bad} outside [0, 1]")));
    }
    let mut metadata = vec![
        ("channel".to_string(), cfg.channel.to_string()),
        ("statistics".to_string(), cfg.statistics.to_string()),
        ("theta".to_string(), fmt_num(cfg.theta)),
        ("initial_state".to_string(), BasisLabel::OneMinus.name().to_string()),
    ];
    let time = match (cfg.time, cfg.channel) {
        (SweepTime::Stationary, ChannelKind::AmplitudeDamping) => {
            let tau = critical_time(cfg.statistics, cfg.theta)?;
            metadata.push(("t".into(), "critical".into()));
            metadata.push(("tau".into(), fmt_num(tau)));
            Some(tau)
        }
        (SweepTime::Stationary, _) => {
            metadata.push(("t".into(), "stationary".into()));
            None
        }
        (SweepTime::At(t), _) => {
            metadata.push(("t".into(), fmt_num(t)));
            Some(t)
        }
    };
    let rows = cfg
        .grid
        .iter()
        .map(|&target| {
            let config = config_for_indistinguishability(target, cfg.theta, cfg.statistics)?;
            let (c, p) = match time {
                None => (
                    stationary_concurrence(cfg.channel, &config),
                    stationary_probability(cfg.channel, &config, 1.0)?,
                ),
                Some(t) => {
                    let state = distributed_state(cfg.channel, &config, t)
                        .map_err(|e| e.context(format!("sweep point I = {target}, t = {t}")))?;
                    (concurrence(&state), state.probability())
                }
            };
            Ok(SweepRow {
                indistinguishability: target,
                l2: config.l() * config.l(),
                concurrence: c,
                probability: p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { metadata, rows })
}

/// One CSV produced by [`run_figure`].
#[derive(Clone, Debug, PartialEq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

fn level_tag(level: f64) -> String {
    format!("I{level:.2}")
}

fn time_curves(
    figure: &str,
    panel: &str,
    channel: ChannelKind,
    statistics: Statistics,
    theta: f64,
) -> Result<Vec<FigureFile>> {
    FIGURE_LEVELS
        .iter()
        .map(|&level| {
            let cfg = RunConfig::new(channel, statistics, SpatialSpec::Indistinguishability(level), theta);
            let mut record = run_evolve(&cfg)?;
            record.metadata.insert(0, ("figure".into(), format!("{figure}{panel}")));
            Ok(FigureFile {
                name: format!("fig{figure}{panel}_{}.csv", level_tag(level)),
                contents: record.to_csv(),
            })
        })
        .collect()
}

fn sweep_curve(figure: &str, channel: ChannelKind, statistics: Statistics, theta: f64) -> Result<Vec<FigureFile>> {
    let mut table = run_sweep(&SweepConfig {
        channel,
        statistics,
        theta,
        grid: uniform_grid(FIGURE_SWEEP_POINTS),
        time: SweepTime::Stationary,
    })?;
    table.metadata.insert(0, ("figure".into(), figure.to_string()));
    Ok(vec![FigureFile {
        name: format!("fig{figure}.csv"),
        contents: table.to_csv(),
    }])
}

fn probability_panels(figure: &str, statistics: Statistics) -> Result<Vec<FigureFile>> {
    let theta = match statistics {
        Statistics::Fermion => 0.0,
        Statistics::Boson => PI,
    };
    let mut files = time_curves(figure, "a", ChannelKind::PhaseDamping, statistics, theta)?;
    files.extend(time_curves(figure, "b", ChannelKind::Depolarizing, statistics, theta)?);
    files.extend(time_curves(figure, "c", ChannelKind::AmplitudeDamping, statistics, FRAC_PI_2)?);
    Ok(files)
}

/// Data behind each figure, one CSV per curve, in a fixed order.
pub fn run_figure(id: &str) -> Result<Vec<FigureFile>> {
    let fermion = Statistics::Fermion;
    match id.trim() {
        "2a" => time_curves("2", "a", ChannelKind::PhaseDamping, fermion, 0.0),
        "2b" => sweep_curve("2b", ChannelKind::PhaseDamping, fermion, 0.0),
        "3a" => time_curves("3", "a", ChannelKind::Depolarizing, fermion, 0.0),
        "3b" => sweep_curve("3b", ChannelKind::Depolarizing, fermion, 0.0),
        "4a" => time_curves("4", "a", ChannelKind::AmplitudeDamping, fermion, FRAC_PI_2),
        "4b" => sweep_curve("4b", ChannelKind::AmplitudeDamping, fermion, FRAC_PI_2),
        "A1" | "a1" => probability_panels("A1", fermion),
        "A2" | "a2" => probability_panels("A2", Statistics::Boson),
        other => Err(Error::UnknownFigure(other.to_string())),
    }
}

/// Special cases [`run_validate`] can be pinned to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcedCase {
    /// Dephasing of separated qubits, checked against `C = e^{-γ₀t}`.
    SeparatedDephasing,
    /// Amplitude damping at `ξ = 1`, where `p₁₋` must not move.
    CoincidentDamping,
}

impl std::str::FromStr for ForcedCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separated-dephasing" => Ok(ForcedCase::SeparatedDephasing),
            "coincident-damping" => Ok(ForcedCase::CoincidentDamping),
            other => Err(Error::InvalidConfig(format!("unknown forced case `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    pub cases: usize,
    pub force: Option<ForcedCase>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            seed: 0,
            cases: 10,
            force: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub cases: usize,
    /// Closed form vs RK4.
    pub max_rk4_deviation: f64,
    /// Closed form vs matrix exponential.
    pub max_expm_deviation: f64,
    /// Projected probability vs its closed form, from `|1₋⟩`.
    pub max_probability_deviation: f64,
    /// Forced dephasing: concurrence vs `e^{-γ₀t}`.
    pub max_concurrence_deviation: Option<f64>,
    /// Forced amplitude damping: change of the closed-form `p₁₋`.
    pub max_p1m_drift: Option<f64>,
    pub probability_checks: usize,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed = {}, cases = {}", self.seed, self.cases)?;
        writeln!(f, "max |closed form - rk4|  = {:.3e}", self.max_rk4_deviation)?;
        writeln!(f, "max |closed form - expm| = {:.3e}", self.max_expm_deviation)?;
        writeln!(
            f,
            "max |P_LR project - closed form| = {:.3e} ({} checks)",
            self.max_probability_deviation, self.probability_checks
        )?;
        if let Some(d) = self.max_concurrence_deviation {
            writeln!(f, "max |C - exp(-t)| = {d:.3e}")?;
        }
        if let Some(d) = self.max_p1m_drift {
            writeln!(f, "max |p_1m(t) - p_1m(0)| = {d:.3e}")?;
        }
        for failure in &self.failures {
            writeln!(f, "FAIL {failure}")?;
        }
        write!(f, "{}", if self.passed() { "ok" } else { "validation failed" })
    }
}

struct Case {
    channel: ChannelKind,
    config: SpatialConfig,
    gamma0: f64,
    p0: BellPopulations,
}

fn random_populations(rng: &mut ChaCha8Rng, channel: ChannelKind, config: &SpatialConfig) -> Result<BellPopulations> {
    let basis = channel.basis();
    let mut w = basis.labels().map(|label| {
        if bell_state_norm(config, label) < FORBIDDEN_TOL {
            0.0
        } else {
            -(1.0 - rng.random::<f64>()).ln()
        }
    });
    let sum: f64 = w.iter().sum();
    for x in &mut w {
        *x /= sum;
    }
    BellPopulations::new(basis, w)
}

fn sample_case(rng: &mut ChaCha8Rng, force: Option<ForcedCase>) -> Result<Case> {
    let statistics = if rng.random_bool(0.5) {
        Statistics::Boson
    } else {
        Statistics::Fermion
    };
    let gamma0 = rng.random_range(0.5..2.0);
    let theta = rng.random_range(0.0..2.0 * PI);
    let (channel, config) = match force {
        Some(ForcedCase::SeparatedDephasing) => {
            (ChannelKind::PhaseDamping, SpatialConfig::separated(statistics).with_theta(theta))
        }
        Some(ForcedCase::CoincidentDamping) => {
            let l2 = rng.random_range(0.05..0.95);
            (
                ChannelKind::AmplitudeDamping,
                SpatialConfig::from_probabilities(l2, l2, theta, statistics)?,
            )
        }
        None => {
            let channel = ChannelKind::ALL[rng.random_range(0..3)];
            let config = SpatialConfig::from_probabilities(rng.random(), rng.random(), theta, statistics)?;
            (channel, config)
        }
    };
    let p0 = match force {
        Some(ForcedCase::SeparatedDephasing) => BellPopulations::pure(channel.basis(), BasisLabel::OneMinus)?,
        _ => random_populations(rng, channel, &config)?,
    };
    Ok(Case {
        channel,
        config,
        gamma0,
        p0,
    })
}

fn max_abs_diff(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn check_case(case: &Case, report: &mut ValidationReport, force: Option<ForcedCase>) -> Result<()> {
    let rates = case.channel.effective_rates(&case.config, case.gamma0, case.gamma0)?;
    let generator = build_generator(case.channel, &rates);
    let rho0 = populations_to_pseudospin(&case.p0);
    let dt = default_step(&rates);
    let basis = case.channel.basis();
    let one_minus = BellPopulations::pure(basis, BasisLabel::OneMinus)?;
    let singlet_allowed = bell_state_norm(&case.config, BasisLabel::OneMinus) >= FORBIDDEN_TOL;

    for tau in VALIDATION_TIMES {
        let t = tau / case.gamma0;
        let closed = closed_form_populations(case.channel, &case.p0, &case.config, case.gamma0, t)?.values();
        let rk4 = integrate(&generator, &rho0, t, dt)?.populations(basis).values();
        let expm = expm_propagate(&generator, &rho0, t).populations(basis).values();
        report.max_rk4_deviation = report.max_rk4_deviation.max(max_abs_diff(&closed, &rk4));
        report.max_expm_deviation = report.max_expm_deviation.max(max_abs_diff(&closed, &expm));

        if singlet_allowed {
            let pops = closed_form_populations(case.channel, &one_minus, &case.config, case.gamma0, t)?;
            let projected = project(&pops, &case.config);
            let formula = probability_closed_form(case.channel, &case.config, case.gamma0, t);
            match (projected, formula) {
                (Ok(state), Ok(p)) => {
                    report.probability_checks += 1;
                    let d = (state.probability() - p).abs();
                    report.max_probability_deviation = report.max_probability_deviation.max(d);
                    if force == Some(ForcedCase::SeparatedDephasing) {
                        let d = (concurrence(&state) - (-case.gamma0 * t).exp()).abs();
                        let slot = report.max_concurrence_deviation.get_or_insert(0.0);
                        *slot = slot.max(d);
                    }
                }
                // Both sides agree that post-selection is impossible.
                (Err(Error::ZeroProbability(_)), Err(Error::ZeroProbability(_))) => {}
                (a, b) => report.failures.push(format!(
                    "{} at t = {t}: projection {:?} vs closed form {:?}",
                    case.channel,
                    a.map(|s| s.probability()),
                    b
                )),
            }
        }
        if force == Some(ForcedCase::CoincidentDamping) {
            let d = (closed[0] - case.p0.values()[0]).abs();
            let slot = report.max_p1m_drift.get_or_insert(0.0);
            *slot = slot.max(d);
        }
    }
    Ok(())
}

/// Compares closed forms with the Lindblad oracle and projected probabilities
/// with their closed forms over seeded random cases.
pub fn run_validate(options: &ValidateOptions) -> Result<ValidationReport> {
    if options.cases == 0 {
        return Err(Error::InvalidConfig("cases must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut report = ValidationReport {
        seed: options.seed,
        cases: options.cases,
        ..Default::default()
    };
    for k in 0..options.cases {
        let case = sample_case(&mut rng, options.force)?;
        if let Err(e) = check_case(&case, &mut report, options.force) {
            report.failures.push(format!("case {k} ({}): {e}", case.channel));
        }
    }
    let limits = [
        ("rk4", Some(report.max_rk4_deviation)),
        ("expm", Some(report.max_expm_deviation)),
        ("probability", Some(report.max_probability_deviation)),
        ("concurrence", report.max_concurrence_deviation),
        ("p_1m drift", report.max_p1m_drift),
    ];
    for (name, value) in limits {
        if let Some(d) = value {
            if d.is_nan() || d > VALIDATION_TOL {
                report.failures.push(format!("{name} deviation {d:.3e} exceeds {VALIDATION_TOL:e}"));
            }
        }
    }
    Ok(report)
}
