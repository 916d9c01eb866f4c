use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ComparisonReport;
use crate::rank::{RankProfile, ToleranceGrid};
use crate::sectors::SectorWeights;

const PROFILE_HEADER: &str = "tolerance,rank,nullity";
const SECTORS_HEADER: &str = "tolerance,nullspace_dim,sector,weight";
const UNDEFINED: &str = "undefined";

/// 17 significant digits, enough to recover every `f64` exactly.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn profile_to_csv(profile: &RankProfile) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for ((t, r), n) in profile.grid.values().iter().zip(&profile.ranks).zip(&profile.nullities) {
        writeln!(out, "{},{r},{n}", sci(*t)).expect("string write");
    }
    out
}

/// Parse a profile table. The source label is not stored in the table and
/// comes back empty.
pub fn parse_profile(text: &str) -> Result<RankProfile> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == PROFILE_HEADER => {}
        _ => {
            return Err(Error::invalid(format!(
                "profile table must start with {PROFILE_HEADER:?}"
            )))
        }
    }
    let mut taus = Vec::new();
    let mut ranks = Vec::new();
    let mut ambient = None;
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Error::invalid(format!("profile row {}: cannot parse {line:?}", k + 1));
        let fields: Vec<&str> = line.split(',').collect();
        let [t, r, n] = fields.as_slice() else {
            return Err(bad());
        };
        let t: f64 = t.trim().parse().map_err(|_| bad())?;
        let r: usize = r.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        match ambient {
            None => ambient = Some(r + n),
            Some(a) if a != r + n => {
                return Err(Error::invalid(format!("profile row {}: rank + nullity != {a}", k + 1)))
            }
            _ => {}
        }
        taus.push(t);
        ranks.push(r);
    }
    let ambient = ambient.ok_or_else(|| Error::invalid("profile table has no rows"))?;
    RankProfile::from_ranks(ToleranceGrid::new(taus)?, ranks, ambient, "")
}

pub fn export_profile(profile: &RankProfile, path: &Path) -> Result<()> {
    super::write_atomic(path, profile_to_csv(profile).as_bytes())
}

pub fn read_profile(path: &Path) -> Result<RankProfile> {
    parse_profile(&super::read_text(path)?)
}

pub fn sectors_to_csv(weights: &SectorWeights) -> String {
    let mut out = String::from(SECTORS_HEADER);
    out.push('\n');
    let tol = sci(weights.tolerance);
    match &weights.weights {
        None => writeln!(out, "{tol},0,{UNDEFINED},{UNDEFINED}").expect("string write"),
        Some(ws) => {
            for w in ws {
                writeln!(out, "{tol},{},{},{}", weights.nullspace_dim, w.sector, sci(w.weight)).expect("string write");
            }
        }
    }
    out
}

pub fn export_sectors(weights: &SectorWeights, path: &Path) -> Result<()> {
    super::write_atomic(path, sectors_to_csv(weights).as_bytes())
}

pub fn report_to_string(report: &ComparisonReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

pub fn parse_report(text: &str) -> Result<ComparisonReport> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("report document: {e}")))
}

pub fn export_report(report: &ComparisonReport, path: &Path) -> Result<()> {
    super::write_atomic(path, report_to_string(report).as_bytes())
}

pub fn read_report(path: &Path) -> Result<ComparisonReport> {
    parse_report(&super::read_text(path)?)
}
