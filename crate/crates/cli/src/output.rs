use std::io::Write;
use std::path::Path;

use serde_json::json;

use ppw_core::verify::{write_reports_csv, InequalityReport, ReportStatus};

use crate::commands::RunOutput;
use crate::config::RunConfig;
use crate::error::CliError;

fn status_label(s: ReportStatus) -> &'static str {
    match s {
        ReportStatus::Satisfied => "ok",
        ReportStatus::NearEquality => "equality",
        ReportStatus::Violated => "VIOLATED",
        ReportStatus::NotApplicable => "n/a",
        ReportStatus::Informational => "info",
    }
}

pub fn print_table<W: Write>(reports: &[InequalityReport], mut w: W) -> std::io::Result<()> {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    writeln!(w, "{:<width$} {:>4} {:>16} {:>16} {:>14}  status", "name", "k", "lhs", "rhs", "margin")?;
    for r in reports {
        let k = r.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            w,
            "{:<width$} {:>4} {:>16.9e} {:>16.9e} {:>14.6e}  {}",
            r.name,
            k,
            r.lhs,
            r.rhs,
            r.margin,
            status_label(r.status)
        )?;
    }
    let failed = reports.iter().filter(|r| r.is_failure()).count();
    writeln!(w, "{} rows, {} violated", reports.len(), failed)
}

pub fn write_artifacts(config: &RunConfig, out: &RunOutput, exit_code: i32) -> Result<(), CliError> {
    let args = config.command.output();
    if let Some(path) = &args.out {
        let file = std::fs::File::create(path)?;
        match &out.spectrum {
            Some(spec) => spec.write_csv(file)?,
            None => write_reports_csv(&out.reports, file)?,
        }
    }
    if let Some(path) = &args.json {
        write_json(config, out, exit_code, path)?;
    }
    Ok(())
}

fn write_json(config: &RunConfig, out: &RunOutput, exit_code: i32, path: &Path) -> Result<(), CliError> {
    let doc = json!({
        "command": config.command.name(),
        "config": config,
        "metadata": {
            "version": env!("CARGO_PKG_VERSION"),
            "seeds": out.seeds,
        },
        "reports": out.reports,
        "payload": out.payload,
        "summary": {
            "rows": out.reports.len(),
            "violations": out.reports.iter().filter(|r| r.is_failure()).count(),
            "exit_code": exit_code,
        },
    });
    let text = serde_json::to_string_pretty(&doc).map_err(ppw_core::Error::from)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
