use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use charext::oracles::{ProbeSettings, Tolerances};
use charext::perturbation::GridSettings;
use charext::{BallConvention, DensitySpec, GridFunction};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Decide,
    Construct,
    Verify,
    Demo,
}

/// A density given by name (`triangular`, `ball`, `tabulated:<path>`) or as
/// an inline spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityRef {
    Named(String),
    Inline(DensitySpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GridConfig {
    pub points_per_axis: Option<usize>,
    pub radius_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ToleranceOverrides {
    pub quad: Option<f64>,
    pub mass: Option<f64>,
    pub pos: Option<f64>,
    pub band: Option<f64>,
    pub agree: Option<f64>,
}

/// Config file contents. Every field may be overridden on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub density: Option<DensityRef>,
    pub q: Option<f64>,
    pub delta: Option<f64>,
    pub n: Option<usize>,
    pub sigma: Option<f64>,
    pub grid: GridConfig,
    pub tolerances: ToleranceOverrides,
    pub output_dir: Option<PathBuf>,
    pub ball_convention: Option<BallConvention>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Radius,
    Power,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags take precedence over its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// triangular, ball or tabulated:<csv path>
    #[arg(long)]
    pub density: Option<String>,
    /// Ball exponent q (a number ≥ 2 or "inf")
    #[arg(long)]
    pub q: Option<String>,
    /// Ball radius δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Dimension
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Output grid points per axis (a power of two)
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Output grid half-width in units of π/σ
    #[arg(long)]
    pub grid_radius_factor: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Probe seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub ball_convention: Option<ConventionArg>,
    #[arg(long)]
    pub tol_quad: Option<f64>,
    #[arg(long)]
    pub tol_mass: Option<f64>,
    #[arg(long)]
    pub tol_pos: Option<f64>,
    #[arg(long)]
    pub tol_band: Option<f64>,
    #[arg(long)]
    pub tol_agree: Option<f64>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Resolved {
    pub density: DensitySpec,
    pub sigma: f64,
    pub grid: GridSettings,
    pub tolerances: Tolerances,
    pub probes: ProbeSettings,
    pub output_dir: PathBuf,
}

fn parse_q(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other.parse().with_context(|| format!("invalid --q value {s:?}")),
    }
}

impl RunArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(d) = &self.density {
            cfg.density = Some(DensityRef::Named(d.clone()));
        }
        if let Some(q) = &self.q {
            cfg.q = Some(parse_q(q)?);
        }
        cfg.delta = self.delta.or(cfg.delta);
        cfg.n = self.n.or(cfg.n);
        cfg.sigma = self.sigma.or(cfg.sigma);
        cfg.grid.points_per_axis = self.grid_points.or(cfg.grid.points_per_axis);
        cfg.grid.radius_factor = self.grid_radius_factor.or(cfg.grid.radius_factor);
        cfg.output_dir = self.out.clone().or(cfg.output_dir.take());
        cfg.seed = self.seed.or(cfg.seed);
        if let Some(c) = self.ball_convention {
            cfg.ball_convention = Some(match c {
                ConventionArg::Radius => BallConvention::Radius,
                ConventionArg::Power => BallConvention::Power,
            });
        }
        let t = &mut cfg.tolerances;
        t.quad = self.tol_quad.or(t.quad);
        t.mass = self.tol_mass.or(t.mass);
        t.pos = self.tol_pos.or(t.pos);
        t.band = self.tol_band.or(t.band);
        t.agree = self.tol_agree.or(t.agree);
        Ok(())
    }

    /// Reads the config file, if any, and applies the flags on top.
    pub fn merged(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn density_spec(&self) -> Result<DensitySpec> {
        let named = match &self.density {
            None => bail!("no density given (use --density)"),
            Some(DensityRef::Inline(spec)) => return Ok(spec.clone()),
            Some(DensityRef::Named(name)) => name.as_str(),
        };
        let convention = self.ball_convention.unwrap_or_default();
        let spec = match named {
            "triangular" => {
                if self.n.is_some_and(|n| n != 1) {
                    bail!("the triangular density is one-dimensional");
                }
                DensitySpec::triangular()
            }
            "ball" => {
                let q = self.q.unwrap_or(2.0);
                let delta = self.delta.unwrap_or(1.0);
                DensitySpec::ball_bump_with(q, delta, self.n.unwrap_or(1), convention)
            }
            other => match other.strip_prefix("tabulated:") {
                Some(path) => {
                    let grid = GridFunction::read_csv(Path::new(path))
                        .with_context(|| format!("cannot read tabulated density {path}"))?;
                    DensitySpec::tabulated(grid)
                }
                None => bail!("unknown density {other:?}: expected triangular, ball or tabulated:<path>"),
            },
        };
        Ok(spec)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let density = self.density_spec()?;
        density.validate()?;
        let density = density.normalize()?;
        let sigma = self.sigma.context("no σ given (use --sigma)")?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            bail!("σ must be positive, got {sigma}");
        }
        if let Some(p) = self.grid.points_per_axis {
            if !p.is_power_of_two() || p < 4 {
                bail!("grid points per axis must be a power of two ≥ 4, got {p}");
            }
        }
        if let Some(r) = self.grid.radius_factor {
            if !(r > 0.0 && r.is_finite()) {
                bail!("grid radius factor must be positive, got {r}");
            }
        }
        let grid = GridSettings {
            points_per_axis: self.grid.points_per_axis,
            radius_factor: self.grid.radius_factor,
            ..GridSettings::default()
        };
        let mut tolerances = Tolerances::for_dim(density.dim);
        let o = &self.tolerances;
        tolerances.quad = o.quad.unwrap_or(tolerances.quad);
        tolerances.mass = o.mass.unwrap_or(tolerances.mass);
        tolerances.pos = o.pos.unwrap_or(tolerances.pos);
        tolerances.band = o.band.unwrap_or(tolerances.band);
        tolerances.agree = o.agree.unwrap_or(tolerances.agree);
        for (name, v) in [
            ("quad", tolerances.quad),
            ("mass", tolerances.mass),
            ("pos", tolerances.pos),
            ("band", tolerances.band),
            ("agree", tolerances.agree),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerance {name} must be positive, got {v}");
            }
        }
        let probes = ProbeSettings { seed: self.seed.unwrap_or(42), ..ProbeSettings::default() };
        let output_dir = self.output_dir.clone().unwrap_or_else(|| PathBuf::from("charext-out"));
        Ok(Resolved { density, sigma, grid, tolerances, probes, output_dir })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let mut cfg: RunConfig =
            serde_json::from_str(r#"{"density": "ball", "sigma": 3.0, "n": 2, "grid": {"pointsPerAxis": 256}}"#).unwrap();
        let args = RunArgs { sigma: Some(4.0), q: Some("inf".into()), ..RunArgs::default() };
        args.apply(&mut cfg).unwrap();
        assert_eq!(cfg.sigma, Some(4.0));
        assert_eq!(cfg.q, Some(f64::INFINITY));
        assert_eq!(cfg.grid.points_per_axis, Some(256));
        let r = cfg.resolve().unwrap();
        assert_eq!(r.density.dim, 2);
        assert_eq!(r.probes.seed, 42);
    }

    #[test]
    fn inline_density() {
        let cfg: serde_json::Result<RunConfig> = serde_json::from_str(
            r#"{"density": {"family": "ball_bump", "params": {"q": 2.0, "delta": 1.0}, "dim": 1}, "sigma": 4.0}"#,
        );
        let cfg = cfg.unwrap();
        assert!(matches!(cfg.density, Some(DensityRef::Inline(_))));
        assert!(cfg.resolve().unwrap().density.is_normalized());
    }

    #[test]
    fn rejects_bad_settings() {
        let base = RunConfig { density: Some(DensityRef::Named("ball".into())), sigma: Some(4.0), ..RunConfig::default() };
        let mut bad = base.clone();
        bad.grid.points_per_axis = Some(1000);
        assert!(bad.resolve().is_err());
        let mut bad = base.clone();
        bad.sigma = Some(-1.0);
        assert!(bad.resolve().is_err());
        let mut bad = base;
        bad.density = Some(DensityRef::Named("gaussian".into()));
        assert!(bad.resolve().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sigma": 1, "bogus": 2}"#).is_err());
    }
}
