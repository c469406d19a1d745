use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use wavemap_core::catalog::{self, CatalogEntry, ENTRIES};
use wavemap_core::geometry::{CoordKind, LocalGeometry};
use wavemap_core::maps::MapPoint;

use crate::checks::{effective_seed, run_checks, RunOptions};
use crate::report::{emit_report, exit_code, Format, ReportHeader};
use crate::scenario::{load_scenario, Scenario};

/// Exit code for files that fail to load or validate.
pub const LOAD_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wavemap", version, about = "Verify curvature, map and field-equation identities on scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the checks declared in a scenario file.
    Check {
        file: PathBuf,
        /// Overrides the scenario's sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides every check's tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Adds per-check wall time to the text report.
        #[arg(long)]
        timings: bool,
    },
    /// Print curvature (and map quantities, if any) at one point.
    Curvature {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        at: Vec<f64>,
    },
    /// Inspect the built-in catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { name: String },
}

/// Runs a parsed command line, writing to `out` and `err`; returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Check {
            file,
            seed,
            tolerance,
            format,
            timings,
        } => check(&file, RunOptions { seed, tolerance }, format, timings, out, err),
        Command::Curvature { file, at } => curvature(&file, &at, out, err),
        Command::Catalog { action } => catalog_command(action, out, err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        1
    })
}

fn load(file: &Path, err: &mut dyn Write) -> std::io::Result<Option<Scenario>> {
    match load_scenario(file) {
        Ok(s) => Ok(Some(s)),
        Err(e) => {
            writeln!(err, "{e}")?;
            Ok(None)
        }
    }
}

fn check(
    file: &Path,
    opts: RunOptions,
    format: Format,
    timings: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<i32> {
    if let Some(t) = opts.tolerance {
        if !(t >= 0.0) {
            writeln!(err, "--tolerance must be non-negative")?;
            return Ok(LOAD_ERROR);
        }
    }
    let Some(s) = load(file, err)? else {
        return Ok(LOAD_ERROR);
    };
    let reports = run_checks(&s, &opts);
    let header = ReportHeader {
        scenario: s.name.clone(),
        seed: effective_seed(&s, &opts),
        sampling: s.sampling.describe(s.metric.dim()),
    };
    out.write_all(emit_report(&header, &reports, format, timings).as_bytes())?;
    Ok(exit_code(&reports))
}

fn curvature(file: &Path, at: &[f64], out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let Some(s) = load(file, err)? else {
        return Ok(LOAD_ERROR);
    };
    match curvature_text(&s, at) {
        Ok(text) => {
            out.write_all(text.as_bytes())?;
            Ok(0)
        }
        Err(e) => {
            writeln!(err, "error: {e}")?;
            Ok(1)
        }
    }
}

/// Metric, curvature and (with a map) energy and tension at `p`.
pub fn curvature_text(s: &Scenario, p: &[f64]) -> wavemap_core::Result<String> {
    let chart = s.metric.chart();
    if p.len() != chart.dim() {
        return Err(wavemap_core::Error::PointDimension {
            expected: chart.dim(),
            got: p.len(),
        });
    }
    let geo = LocalGeometry::at(&s.metric, p, 2)?;
    let mut t = String::new();
    let coords: Vec<String> = chart.names().iter().zip(p).map(|(n, x)| format!("{n} = {x}")).collect();
    let _ = writeln!(t, "point: {}", coords.join(", "));
    let _ = writeln!(t, "\nmetric g_ab:\n{}", geo.metric());
    let _ = writeln!(t, "\nRicci R_ab:\n{}", geo.ricci());
    let _ = writeln!(t, "\nscalar curvature R: {:.12e}", geo.scalar_curvature());
    let _ = writeln!(t, "\nEinstein G_ab:\n{}", geo.einstein());
    let _ = writeln!(t, "\nRiemann R_abcd (nonzero components):\n{}", geo.riemann());
    if let Some(map) = &s.map {
        let mp = MapPoint::at(map, &s.metric, p, 2)?;
        let _ = writeln!(t, "\nmap image: {:?}", mp.jet.image());
        let _ = writeln!(t, "energy density e: {:.12e}", mp.jet.energy_density(&mp.geo));
        let _ = writeln!(t, "tension: {}", mp.jet.tension(&mp.geo));
        let _ = writeln!(t, "\nenergy-momentum T_ab:\n{}", mp.jet.energy_momentum(&mp.geo));
    }
    Ok(t)
}

fn catalog_command(action: CatalogAction, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    match action {
        CatalogAction::List => {
            let width = ENTRIES.iter().map(|e| e.name.len()).max().unwrap_or(0);
            for e in ENTRIES {
                let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                let suffix = if params.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", params.join(", "))
                };
                writeln!(out, "{:<width$}  {}{suffix}", e.name, e.summary)?;
            }
            Ok(0)
        }
        CatalogAction::Show { name } => match catalog::build(&name, &[]) {
            Ok(entry) => {
                out.write_all(describe_entry(&entry).as_bytes())?;
                Ok(0)
            }
            Err(e) => {
                writeln!(err, "error: {e}")?;
                Ok(1)
            }
        },
    }
}

pub fn describe_entry(e: &CatalogEntry) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "{}: {}", e.name, e.summary);
    for (k, v) in &e.params {
        let _ = writeln!(t, "  parameter {k} = {v}");
    }
    let _ = writeln!(t, "\ncoordinates:");
    for c in e.metric.chart().coordinates() {
        let kind = match c.kind {
            CoordKind::Open => format!("({}, {})", c.lo, c.hi),
            CoordKind::Periodic { period } => format!("periodic, period {period}, from {}", c.lo),
            CoordKind::Polar => "polar angle".to_string(),
        };
        let _ = writeln!(t, "  {}: {kind}", c.name);
    }
    let _ = writeln!(t, "\nmetric (signature {:?}):", e.metric.signature());
    let names = e.metric.chart().names();
    for a in 0..e.metric.dim() {
        for b in a..e.metric.dim() {
            let c = e.metric.component(a, b);
            if !c.is_zero() {
                let _ = writeln!(t, "  g[{},{}] = {c}", names[a], names[b]);
            }
        }
    }
    if let Some(map) = &e.map {
        let target: Vec<&str> = map.target().chart().names().iter().map(String::as_str).collect();
        let _ = writeln!(t, "\nmap into ({}):", target.join(", "));
        for (y, c) in target.iter().zip(map.components()) {
            let _ = writeln!(t, "  {y} = {c}");
        }
    }
    if let Some(k) = e.kappa {
        let _ = writeln!(t, "kappa = {k}");
    }
    if !e.vector_fields.is_empty() {
        let _ = writeln!(t, "\nvector fields:");
        for (n, v) in &e.vector_fields {
            let comps: Vec<String> = v.components().iter().map(|c| c.to_string()).collect();
            let _ = writeln!(t, "  {n} = ({})", comps.join(", "));
        }
    }
    if let Some(form) = e.form {
        let _ = writeln!(t, "\nnormal form: {form}");
    }
    if !e.facts.is_empty() {
        let _ = writeln!(t, "\nfacts:");
        for f in &e.facts {
            let _ = writeln!(t, "  {f}");
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("wavemap").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(cli, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn catalog_list_names_every_entry() {
        let (code, out, _) = run(&["catalog", "list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), ENTRIES.len());
        assert!(out.contains("coupled_pp_wave") && out.contains("[kappa = 1]"));
    }

    #[test]
    fn catalog_show() {
        let (code, out, _) = run(&["catalog", "show", "sphere"]);
        assert_eq!(code, 0);
        assert!(out.contains("th: polar angle"), "{out}");
        assert!(out.contains("facts:"));
        let (code, _, err) = run(&["catalog", "show", "torus"]);
        assert_eq!(code, 1);
        assert!(err.contains("torus"));
    }

    #[test]
    fn missing_file_is_a_load_error() {
        let (code, _, err) = run(&["check", "/nonexistent/scenario.toml"]);
        assert_eq!(code, LOAD_ERROR);
        assert!(err.contains("/nonexistent/scenario.toml"));
    }

    #[test]
    fn negative_coordinates_parse() {
        let cli = Cli::try_parse_from(["wavemap", "curvature", "f.toml", "--at", "-0.5,1e-3"]).unwrap();
        match cli.command {
            Command::Curvature { at, .. } => assert_eq!(at, vec![-0.5, 1e-3]),
            _ => unreachable!(),
        }
    }
}
