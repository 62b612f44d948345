use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qfreq_core::blowup::{blowup_report, frequency_gap_scan, steps_to_csv, BlowupSequence, BlowupSettings, BlowupStep, FrequencyGap, GapEntry};
use qfreq_core::corpus::{self, CorpusEntry};
use qfreq_core::functionals::{estimate_holder_exponent, geometric_radii, radial_profile_with_tol, HolderEstimate, RadialProfile};
use qfreq_core::oscillation::courant_lebesgue_radius;
use qfreq_core::report::{anchors, fmt_f64, CheckRow, GridMeta, VerificationReport, REPORT_SCHEMA};
use qfreq_core::suite::{verify_corpus, SuiteSettings};
use qfreq_core::Point;
use serde::{Deserialize, Serialize};

use crate::config::{CorpusName, ExportFormat, RadiusGrid, RunConfig};
use crate::output::{loglog_svg, slug, OutDir};
use crate::UsageError;

pub const ANALYZE_SCHEMA: &str = "qfreq.analyze/1";
pub const BLOWUP_SCHEMA: &str = "qfreq.blowup/1";
pub const SCAN_SCHEMA: &str = "qfreq.scan/1";

/// Blow-up radii used when the config names none.
pub const DEFAULT_BLOWUP_RADII: [f64; 5] = [0.5, 0.25, 0.1, 0.05, 0.01];
/// Largest `Q` of the built-in branch-family scan.
pub const KQ_MAX: u32 = 5;

/// Outcome of a command: whether every check passed.
pub struct Outcome {
    pub passed: bool,
    pub failures: Vec<CheckRow>,
}

impl Outcome {
    fn from_report(rep: &VerificationReport) -> Self {
        Self { passed: rep.passed(), failures: rep.failures().cloned().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzedProfile {
    pub label: String,
    pub profile: RadialProfile<f64>,
    /// `H(r)/r` per radius.
    pub normalized_height: Vec<f64>,
    pub holder: Option<HolderEstimate<f64>>,
    pub plot: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArtifact {
    pub schema: String,
    pub tool_version: String,
    pub grid: GridMeta,
    pub profiles: Vec<AnalyzedProfile>,
    pub rows: Vec<CheckRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRun {
    pub label: String,
    pub x0: Point<f64>,
    pub radii: Vec<f64>,
    pub normalizers: Vec<f64>,
    pub steps: Vec<BlowupStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupArtifact {
    pub schema: String,
    pub tool_version: String,
    pub grid: GridMeta,
    pub runs: Vec<BlowupRun>,
    pub rows: Vec<CheckRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanArtifact {
    pub schema: String,
    pub tool_version: String,
    pub grid: GridMeta,
    pub gap: FrequencyGap,
}

fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").into()
}

fn fmt_point(p: Point<f64>) -> String {
    format!("({:?}, {:?})", p[0], p[1])
}

fn config_radii(grid: &RadiusGrid) -> Result<Vec<f64>, UsageError> {
    let radii = match grid {
        RadiusGrid::List(v) => v.clone(),
        RadiusGrid::Geometric { min, max, count } => {
            geometric_radii(*min, *max, *count).map_err(|e| UsageError(format!("radii: {e}")))?
        }
    };
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(UsageError("radii: must be positive and strictly increasing".into()));
    }
    Ok(radii)
}

pub fn analyze(cfg: &RunConfig, settings: &SuiteSettings, out: &OutDir) -> Result<Outcome> {
    let entries = cfg.corpus_entries()?;
    let custom = cfg.radii.as_ref().map(config_radii).transpose()?;
    let mut rep = VerificationReport::new("analyze", settings.meta());
    let mut profiles = Vec::new();
    let mut csv = String::from("label,u,v,r,D,H,N,H/r\n");
    for entry in &entries {
        for (i, probe) in entry.probes.iter().enumerate() {
            let radii = match &custom {
                Some(r) => r.clone(),
                None => probe.radii()?,
            };
            let label = format!("{} @ {}", entry.label, fmt_point(probe.center));
            let profile = radial_profile_with_tol(&entry.field, probe.center, &radii, &settings.quadrature(), settings.tol.monotonicity)
                .with_context(|| label.clone())?;
            rep.push(
                CheckRow::at_most(label.clone(), anchors::FREQUENCY_MONOTONE, profile.max_decrease(), settings.tol.monotonicity)
                    .with_note(format!("{} radii in [{:?}, {:?}]", radii.len(), radii[0], radii[radii.len() - 1])),
            );
            let holder = estimate_holder_exponent(&profile).ok();
            if let Some(h) = holder {
                rep.push(
                    CheckRow::info(label.clone(), anchors::HOLDER_EXPONENT, h.alpha)
                        .with_note(format!("fit over {} radii, rms residual {:?}", h.points, h.residual)),
                );
            }
            let normalized: Vec<f64> = (0..radii.len()).map(|k| profile.normalized_height(k)).collect();
            let plot = format!("{}-{}.svg", slug(&entry.label), i);
            let fit = holder.map(|h| {
                let k = profile.h_vals.iter().position(|&v| v > 0.0).unwrap_or(0);
                (h.alpha, normalized[k].ln() - 2.0 * h.alpha * radii[k].ln())
            });
            let title = match holder {
                Some(h) => format!("{label}: H(r)/r, slope {:.4}", 2.0 * h.alpha),
                None => format!("{label}: H(r)/r"),
            };
            out.write(&plot, loglog_svg(&title, &radii, &normalized, fit).as_bytes())?;
            for k in 0..radii.len() {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    csv_field(&entry.label),
                    fmt_f64(probe.center[0]),
                    fmt_f64(probe.center[1]),
                    fmt_f64(radii[k]),
                    fmt_f64(profile.d_vals[k]),
                    fmt_f64(profile.h_vals[k]),
                    profile.n_vals[k].map(fmt_f64).unwrap_or_default(),
                    fmt_f64(normalized[k]),
                ));
            }
            match holder {
                Some(h) => println!("{label}: exponent {:.6} over {} radii", h.alpha, h.points),
                None => println!("{label}: exponent undetermined"),
            }
            profiles.push(AnalyzedProfile { label, profile, normalized_height: normalized, holder, plot });
        }
    }
    let artifact = AnalyzeArtifact {
        schema: ANALYZE_SCHEMA.into(),
        tool_version: tool_version(),
        grid: settings.meta(),
        profiles,
        rows: rep.rows.clone(),
    };
    out.write_json("analyze.json", &artifact)?;
    out.write("profiles.csv", csv.as_bytes())?;
    Ok(Outcome::from_report(&rep))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn verify(cfg: &RunConfig, settings: &SuiteSettings, out: &OutDir) -> Result<Outcome> {
    let entries = cfg.corpus_entries()?;
    let mut rep = verify_corpus(&entries, settings)?;
    if let Some(count) = cfg.random_fields.filter(|_| cfg.corpus != Some(CorpusName::Random)) {
        let osc = settings.oscillation();
        for (i, field) in corpus::random_harmonic_corpus(cfg.seed(), count).iter().enumerate() {
            let cl = courant_lebesgue_radius(field, [0.0, 0.0], 1.0, &osc)?;
            rep.push(cl.row(&format!("random-{i} (seed {})", cfg.seed())));
        }
    }
    write_report(out, "report", &rep)?;
    let failed = rep.failures().count();
    println!("verify: {} checks, {} failed", rep.rows.len(), failed);
    Ok(Outcome::from_report(&rep))
}

fn write_report(out: &OutDir, stem: &str, rep: &VerificationReport) -> Result<()> {
    out.write_json(&format!("{stem}.json"), rep)?;
    out.write(&format!("{stem}.csv"), rep.to_csv()?.as_bytes())?;
    Ok(())
}

pub fn blowup(cfg: &RunConfig, settings: &SuiteSettings, out: &OutDir) -> Result<Outcome> {
    let entries = cfg.corpus_entries()?;
    let radii = cfg.blowup.as_ref().map(|b| b.radii.clone()).unwrap_or_else(|| DEFAULT_BLOWUP_RADII.to_vec());
    let bs = BlowupSettings { grid: settings.grid, oscillation: settings.oscillation() };
    let mut rep = VerificationReport::new("blowup", settings.meta());
    let mut runs = Vec::new();
    for entry in &entries {
        let x0 = cfg.blowup.as_ref().and_then(|b| b.x0).unwrap_or_else(|| entry.field.center());
        let seq = BlowupSequence::new(entry.field.clone(), x0, radii.clone(), settings.grid)
            .map_err(|e| UsageError(format!("blowup: {}: {e}", entry.label)))?;
        let (r, steps) = blowup_report(&seq, &bs).with_context(|| entry.label.clone())?;
        for mut row in r.rows {
            row.check = format!("{}: {}", entry.label, row.check);
            rep.push(row);
        }
        out.write(&format!("blowup-{}.csv", slug(&entry.label)), steps_to_csv(&steps)?.as_bytes())?;
        if let Some(last) = steps.last() {
            println!("{} @ {}: D(1) = {:.6} at r = {:?}", entry.label, fmt_point(x0), last.energy_one, last.r_j);
        }
        runs.push(BlowupRun { label: entry.label.clone(), x0, radii: seq.radii, normalizers: seq.normalizers, steps });
    }
    let artifact = BlowupArtifact {
        schema: BLOWUP_SCHEMA.into(),
        tool_version: tool_version(),
        grid: settings.meta(),
        runs,
        rows: rep.rows.clone(),
    };
    out.write_json("blowup.json", &artifact)?;
    Ok(Outcome::from_report(&rep))
}

fn gap_entries(cfg: &RunConfig) -> Result<Vec<GapEntry>, UsageError> {
    let fields = cfg.field_entries()?;
    if !fields.is_empty() {
        return Ok(fields
            .into_iter()
            .map(|e| {
                let points = if e.branch_points.is_empty() { vec![e.spec.center()] } else { e.branch_points };
                GapEntry { label: e.label, field: e.spec, points }
            })
            .collect());
    }
    match cfg.corpus {
        None | Some(CorpusName::Kq) => Ok(corpus::kq_corpus(KQ_MAX)),
        Some(_) => Ok(cfg
            .corpus_entries()?
            .into_iter()
            .filter(|e: &CorpusEntry| e.field.homogeneity().is_some())
            .map(|e| GapEntry { points: vec![e.field.center()], label: e.label, field: e.field })
            .collect()),
    }
}

pub fn scan(cfg: &RunConfig, settings: &SuiteSettings, out: &OutDir) -> Result<Outcome> {
    let entries = gap_entries(cfg)?;
    let gap = frequency_gap_scan(&entries, settings.grid)?;
    let rep = gap.report(settings.grid);
    out.write("scan.csv", gap.to_csv()?.as_bytes())?;
    match gap.delta_hat {
        Some(d) => println!("delta_hat = {d:.6} over {} points", gap.rows.iter().filter(|r| r.frequency.is_some()).count()),
        None => println!("delta_hat undetermined: no point met the precondition"),
    }
    let artifact = ScanArtifact { schema: SCAN_SCHEMA.into(), tool_version: tool_version(), grid: settings.meta(), gap };
    out.write_json("scan.json", &artifact)?;
    Ok(Outcome::from_report(&rep))
}

pub fn export(cfg: &RunConfig, out: &OutDir) -> Result<Outcome> {
    let Some(ex) = &cfg.export else {
        return Err(UsageError("export: config has no `export` section".into()).into());
    };
    let input = cfg.resolve(&ex.input);
    let text = fs::read_to_string(&input).map_err(|e| UsageError(format!("export.input: cannot read {}: {e}", input.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| UsageError(format!("export.input: {}: {e}", input.display())))?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or_default().to_string();
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("export").to_string();
    let bad = |e: serde_json::Error| UsageError(format!("export.input: {}: {e}", input.display()));
    let (name, bytes) = match (schema.as_str(), ex.format) {
        (REPORT_SCHEMA, ExportFormat::Csv) => {
            let rep: VerificationReport = serde_json::from_value(value).map_err(bad)?;
            (format!("{stem}.csv"), rep.to_csv()?)
        }
        (ANALYZE_SCHEMA, ExportFormat::Csv) => {
            let a: AnalyzeArtifact = serde_json::from_value(value).map_err(bad)?;
            let mut csv = String::from("label,r,D,H,N,H/r\n");
            for p in &a.profiles {
                let lines = p.profile.to_csv()?;
                for (k, line) in lines.lines().skip(1).enumerate() {
                    csv.push_str(&format!("{},{line},{}\n", csv_field(&p.label), fmt_f64(p.normalized_height[k])));
                }
            }
            (format!("{stem}.csv"), csv)
        }
        (BLOWUP_SCHEMA, ExportFormat::Csv) => {
            let b: BlowupArtifact = serde_json::from_value(value).map_err(bad)?;
            let mut csv = String::new();
            for run in &b.runs {
                let table = steps_to_csv(&run.steps)?;
                let mut lines = table.lines();
                let header = lines.next().unwrap_or_default();
                if csv.is_empty() {
                    csv.push_str(&format!("label,{header}\n"));
                }
                for line in lines {
                    csv.push_str(&format!("{},{line}\n", csv_field(&run.label)));
                }
            }
            (format!("{stem}.csv"), csv)
        }
        (SCAN_SCHEMA, ExportFormat::Csv) => {
            let s: ScanArtifact = serde_json::from_value(value).map_err(bad)?;
            (format!("{stem}.csv"), s.gap.to_csv()?)
        }
        (REPORT_SCHEMA | ANALYZE_SCHEMA | BLOWUP_SCHEMA | SCAN_SCHEMA, ExportFormat::Json) => {
            let mut text = serde_json::to_string_pretty(&value)?;
            text.push('\n');
            (format!("{stem}.json"), text)
        }
        (other, _) => {
            bail!(UsageError(format!("export.input: {}: unknown schema {other:?}", input.display())))
        }
    };
    if out_path_is(out, &name, &input) {
        bail!(UsageError(format!("export: output {name} would overwrite the input")));
    }
    let path = out.write(&name, bytes.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(Outcome { passed: true, failures: Vec::new() })
}

fn out_path_is(out: &OutDir, name: &str, input: &Path) -> bool {
    match (fs::canonicalize(out.root().join(name)), fs::canonicalize(input)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}
