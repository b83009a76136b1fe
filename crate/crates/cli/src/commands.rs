use std::f64::consts::PI;
use std::path::Path;

use anyhow::{Context, Result};
use charext::lattice::{ball_certificate, find_certificate, verify_certificate, SearchGrid};
use charext::oracles::{verify_counterexample, VerificationReport, VERDICT_NON_UNIQUE};
use charext::perturbation::build_counterexample;
use charext::spectral::transform_at;
use charext::{CharFn, DensitySpec, Family, GridFunction};

use crate::config::{Command, Resolved};
use crate::report::{ConstructSection, DecideSection, Report, SCHEMA, THETA_FILE, XI_FILE};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Error = 1,
    Inconclusive = 2,
    Failed = 3,
}

fn base_report(command: Command, run: &Resolved, outcome: String) -> Report {
    Report {
        schema: SCHEMA.to_string(),
        command,
        density: run.density.clone(),
        sigma: run.sigma,
        tolerances: run.tolerances,
        probes: run.probes,
        outcome,
        notes: Vec::new(),
        decide: None,
        construct: None,
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Which sufficient condition, if any, covers this density and σ.
fn regime_notes(density: &DensitySpec, sigma: f64) -> Vec<String> {
    let mut notes = Vec::new();
    match &density.family {
        Family::Triangular1D => {
            notes.push(
                "cross-reference: for the triangular density a direct argument gives the σ-deterministic \
                 property for σ ≤ π/2, while lattice certificates exist for every σ < π; the two statements \
                 are reported side by side"
                    .to_string(),
            );
            if sigma <= PI / 2.0 {
                notes.push(format!("σ = {} ≤ π/2: covered by the direct argument", fmt(sigma)));
            }
        }
        Family::BallBump(p) => {
            let n = density.dim as f64;
            let r = density.ball_radius().unwrap_or(p.delta);
            let lattice = if p.q.is_infinite() { PI } else { PI * n.powf(1.0 / p.q) };
            let perturb = PI * n.sqrt();
            let product = r * sigma;
            if product < lattice {
                notes.push(format!(
                    "lattice regime: rσ = {} < π n^(1/q) = {}",
                    fmt(product),
                    fmt(lattice)
                ));
            }
            if product > perturb {
                notes.push(format!(
                    "perturbation regime: rσ = {} > π√n = {}; construct applies",
                    fmt(product),
                    fmt(perturb)
                ));
            }
            if product >= lattice && product <= perturb {
                notes.push(format!(
                    "gap: π n^(1/q) = {} ≤ rσ = {} ≤ π√n = {}; neither sufficient condition applies",
                    fmt(lattice),
                    fmt(product),
                    fmt(perturb)
                ));
            }
        }
        Family::Tabulated(_) => {}
    }
    notes
}

pub fn decide(run: &Resolved) -> Result<(Report, Status)> {
    let density = &run.density;
    let support = density.support();
    let sigma = run.sigma;
    let mut method = "grid search".to_string();
    let mut cert = None;
    if let Family::BallBump(p) = &density.family {
        let radius = density.ball_radius().unwrap_or(p.delta);
        cert = ball_certificate(p.q, radius, density.dim, sigma);
        if cert.is_some() {
            method = "ball recipe".to_string();
        }
    }
    if cert.is_none() {
        cert = find_certificate(&support, sigma, SearchGrid::default_for(density.dim))?;
    }
    let check = match &cert {
        Some(c) => Some(verify_certificate(&support, sigma, &c.a, &c.tau)?),
        None => None,
    };
    let found = check.is_some_and(|c| c.valid);
    let outcome = if found { "certificate found" } else { "no certificate found" };
    let mut report = base_report(Command::Decide, run, outcome.to_string());
    report.notes = regime_notes(density, sigma);
    if !found {
        report.notes.push("no certificate is not a proof that the property fails".to_string());
    }
    report.decide = Some(DecideSection { method, certificate: cert, check });
    Ok((report, if found { Status::Ok } else { Status::Inconclusive }))
}

pub fn construct(run: &Resolved, dump_fhat: bool) -> Result<(Report, Status)> {
    let ce = build_counterexample(&run.density, run.sigma, &run.grid, &run.probes, &run.tolerances)?;
    let dir = &run.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    ce.xi.write_csv(&dir.join(XI_FILE))?;
    ce.theta.write_csv(&dir.join(THETA_FILE))?;
    if dump_fhat {
        dump_axis_transforms(run, &ce.xi, dir)?;
    }
    let ok = ce.report.verdict == VERDICT_NON_UNIQUE;
    let mut report = base_report(Command::Construct, run, ce.report.verdict.clone());
    report.notes = regime_notes(&run.density, run.sigma);
    let n = run.density.dim;
    report.construct = Some(ConstructSection {
        grid: run.grid,
        points_per_axis: run.grid.points_for(n),
        half_width: run.grid.half_width(n, run.sigma),
        params: ce.params,
        band: ce.band,
        verification: ce.report,
        xi_file: XI_FILE.to_string(),
        theta_file: THETA_FILE.to_string(),
    });
    report.write(dir)?;
    Ok((report, if ok { Status::Ok } else { Status::Failed }))
}

/// `fhat_axis_k.csv`: f and ĝ = f − ξ̂ along each coordinate axis on `[-4σ, 4σ]`.
fn dump_axis_transforms(run: &Resolved, xi: &GridFunction<f64>, dir: &Path) -> Result<()> {
    let engine = CharFn::new(&run.density, &run.probes.quadrature)?;
    let n = run.density.dim;
    for k in 0..n {
        let path = dir.join(format!("fhat_axis_{k}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["x", "f_re", "f_im", "g_re", "g_im"])?;
        for i in 0..=400 {
            let mut x = vec![0.0; n];
            x[k] = run.sigma * (-4.0 + 0.02 * i as f64);
            let f = engine.eval(&x);
            let g = f - transform_at(xi, &x)?;
            w.write_record([x[k], f.re, f.im, g.re, g.im].map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Outcome of re-running the verification on stored artifacts.
pub struct Verified {
    pub stored: VerificationReport,
    pub recomputed: VerificationReport,
}

impl Verified {
    pub fn matches(&self) -> bool {
        self.stored.verdict == self.recomputed.verdict
    }
}

pub fn verify(dir: &Path) -> Result<(Verified, Status)> {
    let report = Report::read(dir)?;
    let section = report.construct.context("report.json holds no construct results")?;
    let theta_path = dir.join(&section.theta_file);
    let theta = GridFunction::read_csv(&theta_path).with_context(|| format!("cannot read {}", theta_path.display()))?;
    let recomputed =
        verify_counterexample(&report.density, &theta, &section.params, &report.probes, &report.tolerances)?;
    let v = Verified { stored: section.verification, recomputed };
    let status = if v.matches() { Status::Ok } else { Status::Failed };
    Ok((v, status))
}
