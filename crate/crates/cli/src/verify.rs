use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use qeraser_core::spacetime::{
    build_scenario, verify_scenario, RelationMatrix, ScenarioConfig, VerificationReport, BUNDLED_SCENARIOS,
};
use qeraser_core::Error;

use crate::exit::VerificationFailed;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Bundled scenario name or scenario file; repeatable (default: all bundled).
    #[arg(long)]
    pub scenario: Vec<String>,
    /// Directory for a CSV of every relation check.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn resolve_scenario(spec: &str) -> anyhow::Result<ScenarioConfig> {
    // File stems spell the prime as "p".
    let name = spec.strip_suffix("IIp").map(|s| format!("{s}II'")).unwrap_or_else(|| spec.to_string());
    if BUNDLED_SCENARIOS.contains(&name.as_str()) {
        return Ok(ScenarioConfig::bundled(&name)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        return Ok(ScenarioConfig::parse(&text)?);
    }
    Err(Error::Config(format!("unknown scenario {spec:?}; available: {}", BUNDLED_SCENARIOS.join(", "))).into())
}

pub fn verify(cfg: &ScenarioConfig) -> anyhow::Result<VerificationReport> {
    let geometry = build_scenario(cfg)?;
    Ok(verify_scenario(&geometry, &RelationMatrix::from_expected(&geometry))?)
}

pub fn verify_all(specs: &[String]) -> anyhow::Result<Vec<VerificationReport>> {
    let names: Vec<String> =
        if specs.is_empty() { BUNDLED_SCENARIOS.iter().map(|s| s.to_string()).collect() } else { specs.to_vec() };
    names.iter().map(|n| verify(&resolve_scenario(n)?)).collect()
}

pub fn relations_csv(reports: &[VerificationReport]) -> String {
    let mut s = String::from(VerificationReport::csv_header());
    s.push('\n');
    for r in reports {
        s.push_str(&r.to_csv_rows());
    }
    s
}

pub fn run(args: &VerifyArgs) -> anyhow::Result<()> {
    let reports = verify_all(&args.scenario)?;
    for r in &reports {
        print!("{}", r.to_text());
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("spacetime.csv"), relations_csv(&reports))?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.scenario.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(VerificationFailed(format!("relations differ from expectations in {}", failed.join(", "))).into())
    }
}
