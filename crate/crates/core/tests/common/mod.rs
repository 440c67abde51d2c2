//! Reduced configurations of every experiment, small enough to rerun.

use rmt_core::runner::{parse_config, ExperimentConfig};

pub fn reduced_configs() -> Vec<ExperimentConfig> {
    [
        r#"{"experiment": "locallaw-scan", "sizes": [60, 120], "samples": 3, "seed": 1}"#,
        r#"{"experiment": "rigidity", "ensemble": {"distribution": "bernoulli"}, "sizes": [80], "samples": 3, "seed": 2}"#,
        r#"{"experiment": "counting", "sizes": [80], "samples": 3, "seed": 3}"#,
        r#"{"experiment": "edge", "sizes": [80], "samples": 3, "seed": 4}"#,
        r#"{"experiment": "dbm-gaps", "ensemble": {"distribution": "bernoulli"}, "sizes": [60], "samples": 3, "seed": 5}"#,
        r#"{"experiment": "moments-match", "sizes": [1], "samples": 1, "seed": 6,
            "params": {"grid": 3, "mc_draws": 2000, "gammas": [0.01, 0.1]}}"#,
        r#"{"experiment": "green-compare", "ensemble": {"distribution": "bernoulli"}, "sizes": [60], "samples": 4, "seed": 7,
            "params": {"reference": {"distribution": "gaussian"}, "energies": [0.0, 0.5]}}"#,
        r#"{"experiment": "largedev", "ensemble": {"distribution": "bernoulli"}, "sizes": [50], "samples": 50, "seed": 8,
            "params": {"case": "off-diagonal"}}"#,
        r#"{"experiment": "zmoments", "sizes": [60], "samples": 4, "seed": 9, "z_grid": [{"e": 0.5, "eta": 0.3}],
            "params": {"p_max": 4}}"#,
        r#"{"experiment": "correlations", "ensemble": {"distribution": "bernoulli"}, "sizes": [80], "samples": 3, "seed": 10}"#,
    ]
    .iter()
    .map(|t| parse_config(t).unwrap_or_else(|e| panic!("{t}: {e}")))
    .collect()
}
