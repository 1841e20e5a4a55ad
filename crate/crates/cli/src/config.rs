//! TOML run configuration. Unknown keys are rejected.

use std::path::Path;

use flatlimit::experiments::{LengthScaleGrid, PrecisionPolicy};
use flatlimit::functionals::{Density, FunctionalSpec};
use flatlimit::gauss_optimal::OptimizerOptions;
use flatlimit::kernels::{DampedSeries, Damping, KernelFamily, KernelSpec, SeriesWeights};
use flatlimit::points::PointSet;
use flatlimit::quadrature::QuadratureOptions;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: Option<KernelConfig>,
    pub functional: Option<FunctionalConfig>,
    #[serde(default)]
    pub points: PointsConfig,
    pub grid: Option<GridConfig>,
    pub precision: Option<PrecisionConfigSection>,
    pub optimizer: Option<OptimizerOptions>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Gaussian,
    Exponential,
    Szego,
    DampedPowerSeries,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: KernelName,
    /// Only read by `wce`; sweeps take length scales from `[grid]`.
    pub length_scale: Option<f64>,
    pub damping: Option<Damping>,
    pub exponent: Option<f64>,
    pub weights: Option<SeriesWeights>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    LebesgueBox,
    GaussianMeasure,
    PointEval,
    NumericOracle,
}

/// Densities accepted for `numeric_oracle`; arbitrary weights need the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityName {
    Uniform,
    StandardNormal,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub kind: FunctionalKind,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub dimension: Option<usize>,
    pub point: Option<Vec<f64>>,
    pub density: Option<DensityName>,
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PointsConfig {
    /// One-dimensional nodes.
    pub nodes: Option<Vec<f64>>,
    pub coordinates: Option<Vec<Vec<f64>>>,
    /// Rule size for `optimal` and `gauss`.
    pub count: Option<usize>,
    /// Polynomial degree `m`.
    pub degree: Option<u32>,
    /// Fixed weights for `wce`; optimal weights are used when absent.
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
    pub fit_window: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum PolicyValue {
    Bits(u32),
    Name(String),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionConfigSection {
    pub policy: PolicyValue,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem; defaults to the subcommand name.
    pub name: Option<String>,
    pub directory: Option<String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn load(path: &Path) -> Result<(Config, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| bad(format!("{} is not UTF-8: {e}", path.display())))?;
    let cfg: Config = toml::from_str(text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    Ok((cfg, bytes))
}

/// Parses `auto`, `machine` or a bit count.
pub fn parse_policy(text: &str) -> Result<PrecisionPolicy, CliError> {
    match text.trim() {
        "auto" => Ok(PrecisionPolicy::Auto),
        "machine" => Ok(PrecisionPolicy::Machine),
        t => t
            .parse::<u32>()
            .map(PrecisionPolicy::Bits)
            .map_err(|_| bad(format!("precision must be auto, machine or a bit count, got {t:?}"))),
    }
}

impl PolicyValue {
    pub fn to_policy(&self) -> Result<PrecisionPolicy, CliError> {
        match self {
            PolicyValue::Bits(b) => Ok(PrecisionPolicy::Bits(*b)),
            PolicyValue::Name(n) => parse_policy(n),
        }
    }
}

impl Config {
    pub fn kernel(&self, length_scale: Option<f64>) -> Result<KernelSpec, CliError> {
        let k = self.kernel.as_ref().ok_or_else(|| bad("missing [kernel] section"))?;
        let series_keys = k.damping.is_some() || k.exponent.is_some() || k.weights.is_some() || k.tolerance.is_some();
        let family = match k.family {
            KernelName::DampedPowerSeries => KernelFamily::DampedPowerSeries(DampedSeries {
                damping: k.damping.unwrap_or(Damping::Gaussian),
                exponent: k.exponent.unwrap_or(2.0),
                weights: k.weights.unwrap_or(SeriesWeights::Factorial),
                tolerance: k.tolerance,
            }),
            _ if series_keys => {
                return Err(bad("damping, exponent, weights and tolerance only apply to damped_power_series"));
            }
            KernelName::Gaussian => KernelFamily::Gaussian,
            KernelName::Exponential => KernelFamily::Exponential,
            KernelName::Szego => KernelFamily::Szego,
        };
        let l = length_scale.or(k.length_scale).unwrap_or(1.0);
        Ok(KernelSpec::new(family, l)?)
    }

    pub fn kernel_length_scale(&self) -> Result<f64, CliError> {
        self.kernel
            .as_ref()
            .and_then(|k| k.length_scale)
            .ok_or_else(|| bad("[kernel] length_scale is required for this command"))
    }

    pub fn functional(&self) -> Result<FunctionalSpec, CliError> {
        let f = self.functional.as_ref().ok_or_else(|| bad("missing [functional] section"))?;
        let used = |name: &str, present: bool, allowed: bool| {
            if present && !allowed {
                Err(bad(format!("key {name} does not apply to functional kind {:?}", f.kind)))
            } else {
                Ok(())
            }
        };
        let is = |k: FunctionalKind| f.kind == k;
        let boxed = is(FunctionalKind::LebesgueBox) || is(FunctionalKind::NumericOracle);
        used("lower", f.lower.is_some(), boxed)?;
        used("upper", f.upper.is_some(), boxed)?;
        used("dimension", f.dimension.is_some(), is(FunctionalKind::GaussianMeasure))?;
        used("point", f.point.is_some(), is(FunctionalKind::PointEval))?;
        used("density", f.density.is_some(), is(FunctionalKind::NumericOracle))?;
        used("rel_tol", f.rel_tol.is_some(), is(FunctionalKind::NumericOracle))?;
        let need = |v: &Option<Vec<f64>>, name: &str| v.clone().ok_or_else(|| bad(format!("[functional] needs {name}")));
        Ok(match f.kind {
            FunctionalKind::LebesgueBox => FunctionalSpec::lebesgue_box(need(&f.lower, "lower")?, need(&f.upper, "upper")?)?,
            FunctionalKind::GaussianMeasure => FunctionalSpec::gaussian_measure(f.dimension.unwrap_or(1))?,
            FunctionalKind::PointEval => FunctionalSpec::point_eval(need(&f.point, "point")?)?,
            FunctionalKind::NumericOracle => {
                let density = match f.density.unwrap_or(DensityName::Uniform) {
                    DensityName::Uniform => Density::Uniform,
                    DensityName::StandardNormal => Density::StandardNormal,
                };
                let mut options = QuadratureOptions::default();
                if let Some(t) = f.rel_tol {
                    options.rel_tol = t;
                }
                FunctionalSpec::numeric_oracle(need(&f.lower, "lower")?, need(&f.upper, "upper")?, density, options)?
            }
        })
    }

    pub fn point_set(&self) -> Result<PointSet, CliError> {
        match (&self.points.nodes, &self.points.coordinates) {
            (Some(n), None) => Ok(PointSet::from_nodes(n)?),
            (None, Some(c)) => Ok(PointSet::new(c.clone())?),
            (Some(_), Some(_)) => Err(bad("[points] takes either nodes or coordinates, not both")),
            (None, None) => Err(bad("[points] needs nodes or coordinates")),
        }
    }

    pub fn degree(&self) -> Result<u32, CliError> {
        self.points.degree.ok_or_else(|| bad("[points] degree is required"))
    }

    pub fn count(&self) -> Result<usize, CliError> {
        match self.points.count {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(bad("[points] count must be positive")),
            None => Err(bad("[points] count is required")),
        }
    }

    pub fn grid(&self) -> Result<(LengthScaleGrid, Option<(f64, f64)>), CliError> {
        let g = self.grid.as_ref().ok_or_else(|| bad("missing [grid] section"))?;
        let grid = match (g.min, g.max, g.count, &g.values) {
            (Some(min), Some(max), Some(count), None) => LengthScaleGrid::Log { min, max, count },
            (None, None, None, Some(v)) => LengthScaleGrid::List(v.clone()),
            _ => return Err(bad("[grid] takes either min, max and count or values")),
        };
        grid.values()?;
        let window = g.fit_window.map(|[a, b]| (a, b));
        if let Some((a, b)) = window {
            if !(a > 0.0 && a <= b) {
                return Err(bad(format!("fit_window must satisfy 0 < lo <= hi, got [{a}, {b}]")));
            }
        }
        Ok((grid, window))
    }

    pub fn precision_policy(&self) -> Result<Option<PrecisionPolicy>, CliError> {
        self.precision.as_ref().map(|p| p.policy.to_policy()).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config, toml::de::Error> {
        toml::from_str(text)
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("[kernel]\nfamily = \"gaussian\"\nlenght_scale = 2.0\n").is_err());
        assert!(parse("[extra]\nx = 1\n").is_err());
        assert!(parse("[optimizer]\nrestart = 3\n").is_err());
    }

    #[test]
    fn full_sweep_config() {
        let cfg = parse(
            r#"
[kernel]
family = "gaussian"
[functional]
kind = "lebesgue_box"
lower = [-1.0]
upper = [1.0]
[points]
nodes = [-1.0, 0.0, 1.0]
degree = 2
[grid]
min = 10.0
max = 100.0
count = 9
[precision]
policy = "auto"
"#,
        )
        .unwrap();
        assert!(cfg.kernel(None).unwrap().is_gaussian());
        assert_eq!(cfg.point_set().unwrap().len(), 3);
        assert_eq!(cfg.precision_policy().unwrap(), Some(PrecisionPolicy::Auto));
        assert!(matches!(cfg.grid().unwrap().0, LengthScaleGrid::Log { count: 9, .. }));
    }

    #[test]
    fn policy_values() {
        assert_eq!(parse_policy("256").unwrap(), PrecisionPolicy::Bits(256));
        assert_eq!(parse_policy("machine").unwrap(), PrecisionPolicy::Machine);
        assert!(parse_policy("lots").is_err());
        let cfg = parse("[precision]\npolicy = 192\n").unwrap();
        assert_eq!(cfg.precision_policy().unwrap(), Some(PrecisionPolicy::Bits(192)));
    }

    #[test]
    fn misplaced_keys_are_config_errors() {
        let cfg = parse("[functional]\nkind = \"gaussian_measure\"\nlower = [0.0]\n").unwrap();
        assert!(cfg.functional().is_err());
        let cfg = parse("[kernel]\nfamily = \"gaussian\"\nexponent = 2.0\n").unwrap();
        assert!(cfg.kernel(None).is_err());
        let cfg = parse("[grid]\nmin = 10.0\nmax = 10.0\ncount = 1\n").unwrap();
        assert!(cfg.grid().is_err());
    }
}
