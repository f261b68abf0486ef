//! Flat TOML run and sweep files.

use idq_core::channels::ChannelKind;
use idq_core::pipeline::{uniform_grid, InitialState, RunConfig, SpatialSpec, SweepConfig, SweepTime};
use idq_core::states::{BasisLabel, Statistics};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InitialField {
    Label(String),
    Populations([f64; 4]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    channel: String,
    statistics: String,
    #[serde(default)]
    theta: f64,
    indistinguishability: Option<f64>,
    l2: Option<f64>,
    lprime2: Option<f64>,
    #[serde(rename = "gamma0L", default = "one")]
    gamma0_l: f64,
    #[serde(rename = "gamma0R", default = "one")]
    gamma0_r: f64,
    initial_state: Option<InitialField>,
    t_max: f64,
    samples: usize,
    dt_oracle: Option<f64>,
    output_path: Option<String>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TimeField {
    Named(String),
    At(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    channel: String,
    statistics: String,
    #[serde(default)]
    theta: f64,
    grid: Option<Vec<f64>>,
    grid_points: Option<usize>,
    t: Option<TimeField>,
    output_path: Option<String>,
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn spatial(indist: Option<f64>, l2: Option<f64>, lprime2: Option<f64>) -> Result<SpatialSpec, String> {
    match (indist, l2, lprime2) {
        (Some(i), None, None) => Ok(SpatialSpec::Indistinguishability(i)),
        (None, Some(l2), Some(lprime2)) => Ok(SpatialSpec::Probabilities { l2, lprime2 }),
        _ => Err("give either `indistinguishability` or both `l2` and `lprime2`".into()),
    }
}

pub fn parse_run(text: &str) -> Result<RunConfig, String> {
    let f: RunFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let initial = match f.initial_state {
        None => InitialState::Label(BasisLabel::OneMinus),
        Some(InitialField::Label(s)) => InitialState::Label(parse(&s)?),
        Some(InitialField::Populations(p)) => InitialState::Populations(p),
    };
    Ok(RunConfig {
        channel: parse::<ChannelKind>(&f.channel)?,
        statistics: parse::<Statistics>(&f.statistics)?,
        spatial: spatial(f.indistinguishability, f.l2, f.lprime2)?,
        theta: f.theta,
        gamma0_l: f.gamma0_l,
        gamma0_r: f.gamma0_r,
        initial,
        t_max: f.t_max,
        samples: f.samples,
        dt_oracle: f.dt_oracle,
        output_path: f.output_path,
    })
}

pub fn parse_sweep(text: &str) -> Result<(SweepConfig, Option<String>), String> {
    let f: SweepFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let grid = match (f.grid, f.grid_points) {
        (Some(g), None) => g,
        (None, Some(n)) if n >= 2 => uniform_grid(n),
        (None, None) => uniform_grid(21),
        _ => return Err("give either `grid` or `grid_points` (at least 2)".into()),
    };
    let time = match f.t {
        None => SweepTime::Stationary,
        Some(TimeField::Named(s)) if s == "stationary" => SweepTime::Stationary,
        Some(TimeField::Named(s)) => return Err(format!("unknown sweep time `{s}`")),
        Some(TimeField::At(t)) if t >= 0.0 && t.is_finite() => SweepTime::At(t),
        Some(TimeField::At(t)) => return Err(format!("sweep time {t} must be non-negative")),
    };
    let cfg = SweepConfig {
        channel: parse(&f.channel)?,
        statistics: parse(&f.statistics)?,
        theta: f.theta,
        grid,
        time,
    };
    Ok((cfg, f.output_path))
}
