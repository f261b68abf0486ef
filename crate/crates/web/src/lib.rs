//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array` with a fixed number of columns
//! per row, so the page can plot without any JSON round trip.

use std::f64::consts::{FRAC_PI_2, PI};

use idq_core::channels::ChannelKind;
use idq_core::measures::l2_for_indistinguishability;
use idq_core::pipeline::{
    run_evolve, run_sweep, uniform_grid, RunConfig, SpatialSpec, SweepConfig, SweepTime,
};
use idq_core::states::Statistics;
use wasm_bindgen::prelude::*;

/// Exchange phase used in the figures: π/2 for amplitude damping, otherwise
/// 0 for fermions and π for bosons.
fn figure_theta(channel: ChannelKind, statistics: Statistics) -> f64 {
    match (channel, statistics) {
        (ChannelKind::AmplitudeDamping, _) => FRAC_PI_2,
        (_, Statistics::Fermion) => 0.0,
        (_, Statistics::Boson) => PI,
    }
}

fn parse_pair(channel: &str, statistics: &str) -> Result<(ChannelKind, Statistics), String> {
    let channel = channel.parse::<ChannelKind>().map_err(|e| e.to_string())?;
    let statistics = statistics.parse::<Statistics>().map_err(|e| e.to_string())?;
    Ok((channel, statistics))
}

/// Rows of `(t, C, P_LR)` from `|1₋⟩` on the `l = r′` branch.
pub fn curve(
    channel: &str,
    statistics: &str,
    indistinguishability: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let (channel, statistics) = parse_pair(channel, statistics)?;
    let mut cfg = RunConfig::new(
        channel,
        statistics,
        SpatialSpec::Indistinguishability(indistinguishability),
        figure_theta(channel, statistics),
    );
    cfg.t_max = t_max;
    cfg.samples = samples;
    let record = run_evolve(&cfg).map_err(|e| e.to_string())?;
    Ok(record
        .rows
        .iter()
        .flat_map(|r| [r.t, r.concurrence, r.probability])
        .collect())
}

/// Rows of `(I, l², C, P_LR)`: long-time values, or the critical-time values
/// for amplitude damping.
pub fn sweep(channel: &str, statistics: &str, points: usize) -> Result<Vec<f64>, String> {
    let (channel, statistics) = parse_pair(channel, statistics)?;
    let table = run_sweep(&SweepConfig {
        channel,
        statistics,
        theta: figure_theta(channel, statistics),
        grid: uniform_grid(points.max(2)),
        time: SweepTime::Stationary,
    })
    .map_err(|e| e.to_string())?;
    Ok(table
        .rows
        .iter()
        .flat_map(|r| [r.indistinguishability, r.l2, r.concurrence, r.probability])
        .collect())
}

#[wasm_bindgen(js_name = concurrenceCurve)]
pub fn concurrence_curve(
    channel: &str,
    statistics: &str,
    indistinguishability: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    curve(channel, statistics, indistinguishability, t_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = indistinguishabilitySweep)]
pub fn indistinguishability_sweep(channel: &str, statistics: &str, points: usize) -> Result<Vec<f64>, JsError> {
    sweep(channel, statistics, points).map_err(|e| JsError::new(&e))
}

/// `l²` on the `l = r′` branch for a target indistinguishability.
#[wasm_bindgen(js_name = l2ForIndistinguishability)]
pub fn l2_for(target: f64) -> Result<f64, JsError> {
    l2_for_indistinguishability(target).map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_rows_have_three_columns() {
        let v = curve("phase_damping", "boson", 1.0, 2.0, 5).unwrap();
        assert_eq!(v.len(), 15);
        assert!(v.chunks(3).all(|r| (r[1] - 1.0).abs() < 1e-10 && (r[2] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sweep_rows_have_four_columns() {
        let v = sweep("depolarizing", "fermion", 3).unwrap();
        assert_eq!(v.len(), 12);
        assert_eq!(v[2], 0.0);
        assert!((v[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_names_are_reported() {
        assert!(curve("bitflip", "boson", 0.5, 1.0, 3).is_err());
        assert!(sweep("depolarizing", "anyon", 3).is_err());
    }
}
