use std::path::Path;

use serde::Deserialize;

use b2quad::odecheck::{uniform_grid, OrderScanSetup, DEFAULT_SCAN_Z};
use b2quad::systems::{SystemId, SystemParams};
use b2quad::{CoeffPair, Coefficient, OdeConfig, QuadConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(rename = "bA", alias = "a1")]
    pub first: Coefficient,
    #[serde(rename = "bB", alias = "a2")]
    pub second: Coefficient,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default)]
    pub t0: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub t_end: f64,
    /// Number of output times, endpoints included.
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quad_abs: f64,
    pub quad_rel: f64,
    pub ode_rel: f64,
    pub ode_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_abs: 1e-12,
            quad_rel: 1e-12,
            ode_rel: 1e-10,
            ode_abs: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn quad(&self) -> QuadConfig {
        QuadConfig::with_tolerances(self.quad_abs, self.quad_rel)
    }

    pub fn ode(&self) -> OdeConfig {
        OdeConfig::with_tolerances(self.ode_rel, self.ode_abs)
    }
}

/// Input of `solve` and `compare`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    #[serde(default)]
    pub params: SystemParams,
    pub coefficients: Coefficients,
    pub initial: Initial,
    pub range: Range,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A validated [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Run {
    pub system: SystemId,
    pub params: SystemParams,
    pub coeffs: CoeffPair,
    pub t0: f64,
    pub state: Vec<f64>,
    pub t_end: f64,
    pub grid: Vec<f64>,
    pub tolerances: Tolerances,
}

/// Input of `order-scan`. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub coefficients: Option<Coefficients>,
    pub initial: Option<Initial>,
    pub range: Option<Range>,
    pub tolerances: Option<Tolerances>,
    pub k: Option<Vec<u32>>,
    pub z: Option<Vec<f64>>,
}

pub struct Scan {
    pub setup: OrderScanSetup,
    pub ks: Vec<u32>,
    pub zs: Vec<f64>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn check_tolerances(t: &Tolerances) -> Result<(), String> {
    t.quad().validate().map_err(|e| e.to_string())?;
    t.ode().validate().map_err(|e| e.to_string())
}

fn check_range(t0: f64, range: &Range) -> Result<(), String> {
    if !t0.is_finite() || !range.t_end.is_finite() || range.t_end <= t0 {
        return Err(format!("range.t_end must be finite and greater than t0 = {t0}"));
    }
    if range.grid < 2 {
        return Err(format!("range.grid must be at least 2, got {}", range.grid));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(self) -> Result<Run, String> {
        let system: SystemId = self.system.parse().map_err(|e: b2quad::systems::SystemError| e.to_string())?;
        self.params.validate(system).map_err(|e| e.to_string())?;
        if self.initial.state.len() != system.dim() {
            return Err(format!(
                "{system} needs a state of length {}, got {}",
                system.dim(),
                self.initial.state.len()
            ));
        }
        if self.initial.state.iter().any(|v| !v.is_finite()) {
            return Err("initial.state must be finite".into());
        }
        check_range(self.initial.t0, &self.range)?;
        check_tolerances(&self.tolerances)?;
        Ok(Run {
            system,
            params: self.params,
            coeffs: CoeffPair::new(self.coefficients.first, self.coefficients.second),
            t0: self.initial.t0,
            state: self.initial.state,
            t_end: self.range.t_end,
            grid: uniform_grid(self.initial.t0, self.range.t_end, self.range.grid),
            tolerances: self.tolerances,
        })
    }
}

impl ScanConfig {
    pub fn validate(self) -> Result<Scan, String> {
        let mut setup = OrderScanSetup::default();
        if let Some(c) = self.coefficients {
            setup.coeffs = CoeffPair::new(c.first, c.second);
        }
        if let Some(init) = self.initial {
            let state: [f64; 2] = init
                .state
                .as_slice()
                .try_into()
                .map_err(|_| format!("initial.state must have length 2, got {}", init.state.len()))?;
            setup.t0 = init.t0;
            setup.state = state;
        }
        let range = self.range.unwrap_or(Range { t_end: setup.t0 + 1.0, grid: 101 });
        check_range(setup.t0, &range)?;
        setup.grid = uniform_grid(setup.t0, range.t_end, range.grid);
        if let Some(t) = self.tolerances {
            check_tolerances(&t)?;
            setup.quad = t.quad();
        }
        let ks = self.k.unwrap_or_else(|| vec![1, 2, 3]);
        if ks.is_empty() {
            return Err("k must list at least one order".into());
        }
        let zs = self.z.unwrap_or_else(|| DEFAULT_SCAN_Z.to_vec());
        if zs.len() < 3 || zs.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
            return Err("z must list at least 3 positive values".into());
        }
        Ok(Scan { setup, ks, zs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Run, String> {
        serde_json::from_str::<RunConfig>(s).map_err(|e| e.to_string())?.validate()
    }

    const BASE: &str = r#"{"system": "canonical_b2",
        "coefficients": {"bA": {"family": "constant", "params": {"value": 1}},
                         "bB": {"family": "constant", "params": {"value": 1}}},
        "initial": {"t0": 0, "state": [1, 2]},
        "range": {"t_end": 1, "grid": 11}}"#;

    #[test]
    fn minimal_config() {
        let r = parse(BASE).unwrap();
        assert_eq!(r.system, SystemId::CanonicalB2);
        assert_eq!(r.grid.len(), 11);
        assert_eq!(r.grid[10], 1.0);
        assert_eq!(r.tolerances.ode_rel, 1e-10);
    }

    #[test]
    fn bernoulli_aliases() {
        let s = BASE.replace("\"bA\"", "\"a1\"").replace("\"bB\"", "\"a2\"");
        assert!(parse(&s).is_ok());
    }

    #[test]
    fn rejections() {
        assert!(parse(&BASE.replace("canonical_b2", "nope")).unwrap_err().contains("nope"));
        assert!(parse(&BASE.replace("[1, 2]", "[1]")).is_err());
        assert!(parse(&BASE.replace("\"grid\": 11", "\"grid\": 0")).is_err());
        assert!(parse(&BASE.replace("\"t_end\": 1", "\"t_end\": -1")).is_err());
        assert!(parse(&BASE.replace("canonical_b2", "bernoulli_polar")).is_err());
        assert!(parse(&BASE.replace("\"range\"", "\"extra\": 1, \"range\"")).is_err());
    }

    #[test]
    fn scan_defaults() {
        let s = ScanConfig::default().validate().unwrap();
        assert_eq!(s.ks, vec![1, 2, 3]);
        assert_eq!(s.zs.len(), 5);
        assert_eq!(s.setup.grid.len(), 101);
    }
}
