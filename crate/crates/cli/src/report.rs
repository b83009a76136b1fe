use std::path::Path;

use anyhow::{Context, Result};
use charext::lattice::{Certificate, CertificateCheck};
use charext::oracles::{ProbeSettings, Tolerances, VerificationReport};
use charext::perturbation::{GridSettings, PerturbationParams};
use charext::spectral::BandLimitReport;
use charext::DensitySpec;
use serde::{Deserialize, Serialize};

use crate::config::Command;

pub const SCHEMA: &str = "charext-report/1";
pub const REPORT_FILE: &str = "report.json";
pub const XI_FILE: &str = "xi.csv";
pub const THETA_FILE: &str = "theta.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema: String,
    pub command: Command,
    pub density: DensitySpec,
    pub sigma: f64,
    pub tolerances: Tolerances,
    pub probes: ProbeSettings,
    pub outcome: String,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decide: Option<DecideSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construct: Option<ConstructSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecideSection {
    pub method: String,
    pub certificate: Option<Certificate>,
    pub check: Option<CertificateCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructSection {
    pub grid: GridSettings,
    pub points_per_axis: usize,
    pub half_width: f64,
    pub params: PerturbationParams,
    pub band: BandLimitReport,
    pub verification: VerificationReport,
    pub xi_file: String,
    pub theta_file: String,
}

impl Report {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(REPORT_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(REPORT_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let report: Report = serde_json::from_str(&text).with_context(|| format!("corrupt {}", path.display()))?;
        anyhow::ensure!(report.schema == SCHEMA, "unsupported report schema {:?}", report.schema);
        Ok(report)
    }
}
