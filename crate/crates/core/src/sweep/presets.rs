//! Named sweep presets, expressed as config fragments.

use crate::error::{config, Result};

pub const PRESET_NAMES: [&str; 3] = ["fig1", "fig2", "fig3"];

const FIG1: &str = r#"
engine = "auto"
derivative = true

[tls]
gap = 0.2
tunneling = 0.1

[coupling]
strength = 0.05

[grid]
h = { start = 0.0, stop = 1.5, step = 0.01 }
beta = [40.0]
gamma = [0.0]
n_sites = [8, 12, 16, "inf"]
"#;

const FIG2: &str = r#"
engine = "auto"

[tls]
gap = 0.2
tunneling = 0.1

[coupling]
strength = 0.05

[grid]
h = { start = 0.0, stop = 1.5, step = 0.01 }
beta = [40.0]
gamma = [0.8]
n_sites = [6, 10, "inf"]
"#;

const FIG3: &str = r#"
engine = "meanfield"

[tls]
gap = 0.2
tunneling = 0.1

[coupling]
strength = 0.05

[grid]
h = [0.5, 2.0]
inverse_beta = { start = 0.025, stop = 2.0, step = 0.025 }
gamma = [0.0, 1.0]
n_sites = ["inf"]
"#;

/// TOML text of a named preset.
pub fn preset(name: &str) -> Result<&'static str> {
    match name {
        "fig1" => Ok(FIG1),
        "fig2" => Ok(FIG2),
        "fig3" => Ok(FIG3),
        other => Err(config("preset", format!("unknown preset `{other}` (fig1, fig2, fig3)"))),
    }
}
