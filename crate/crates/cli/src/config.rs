use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use qfreq_core::corpus::{self, CorpusEntry, Probe};
use qfreq_core::suite::SuiteSettings;
use qfreq_core::{DiskGrid, Field, Point};
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Verify,
    Blowup,
    Scan,
    Export,
}

/// Built-in field collections that can stand in for inline fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusName {
    Standard,
    PolynomialPhi,
    Kq,
    Random,
}

/// One field with the centers it is probed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldEntry {
    pub label: String,
    pub spec: Field,
    #[serde(default)]
    pub centers: Vec<Point<f64>>,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default)]
    pub branch_points: Vec<Point<f64>>,
}

fn default_r_max() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub angular: Option<usize>,
    pub radial: Option<usize>,
    pub fd_step: Option<f64>,
    pub series_order: Option<usize>,
    pub boundary_samples: Option<usize>,
    pub radius_scan: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusGrid {
    List(Vec<f64>),
    Geometric { min: f64, max: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    #[serde(default)]
    pub x0: Option<Point<f64>>,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    pub input: PathBuf,
    pub format: ExportFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Informational; the command given on the command line wins.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub fields: Vec<FieldEntry>,
    /// JSON files holding one field entry or a list of them, relative to
    /// the config file.
    #[serde(default)]
    pub field_files: Vec<PathBuf>,
    #[serde(default)]
    pub corpus: Option<CorpusName>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub radii: Option<RadiusGrid>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Seeded random harmonic fields added to the Courant-Lebesgue rows of
    /// `verify`, and the size of the `random` corpus.
    #[serde(default)]
    pub random_fields: Option<usize>,
    #[serde(default)]
    pub blowup: Option<BlowupConfig>,
    #[serde(default)]
    pub export: Option<ExportConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T, UsageError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        UsageError(format!("{}: at `{}`: {}", path.display(), at, e.into_inner()))
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = parse_json(&text, path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Inline fields followed by those loaded from `field_files`.
    pub fn field_entries(&self) -> Result<Vec<FieldEntry>, UsageError> {
        let mut out = self.fields.clone();
        for f in &self.field_files {
            let path = self.resolve(f);
            let text = fs::read_to_string(&path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
            #[derive(Deserialize)]
            #[serde(untagged)]
            enum OneOrMany {
                Many(Vec<FieldEntry>),
                One(Box<FieldEntry>),
            }
            match parse_json::<OneOrMany>(&text, &path)? {
                OneOrMany::Many(v) => out.extend(v),
                OneOrMany::One(e) => out.push(*e),
            }
        }
        Ok(out)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(corpus::DEFAULT_SEED)
    }

    /// The fields to run on: inline and file fields, else the named corpus.
    pub fn corpus_entries(&self) -> Result<Vec<CorpusEntry>, UsageError> {
        let entries = self.field_entries()?;
        if !entries.is_empty() {
            return Ok(entries.into_iter().map(to_corpus_entry).collect());
        }
        match self.corpus {
            Some(CorpusName::Standard) => Ok(corpus::standard_corpus()),
            Some(CorpusName::PolynomialPhi) => Ok(corpus::polynomial_phi_corpus()),
            Some(CorpusName::Random) => Ok(corpus::random_harmonic_corpus(self.seed(), self.random_fields.unwrap_or(corpus::RANDOM_FIELDS))
                .into_iter()
                .enumerate()
                .map(|(i, field)| CorpusEntry {
                    label: format!("random-{i}"),
                    field,
                    probes: vec![Probe { center: [0.0, 0.0], r_max: 1.0 }],
                })
                .collect()),
            Some(CorpusName::Kq) => Ok(corpus::kq_corpus(5)
                .into_iter()
                .map(|g| CorpusEntry { label: g.label, field: g.field, probes: vec![Probe { center: [0.0, 0.0], r_max: 1.0 }] })
                .collect()),
            None => Err(UsageError("config lists no `fields`, `field_files` or `corpus`".into())),
        }
    }

    pub fn suite_settings(&self) -> Result<SuiteSettings, UsageError> {
        let mut s = SuiteSettings::default();
        let g = &self.grid;
        let grid = DiskGrid::new(g.angular.unwrap_or(s.grid.angular), g.radial.unwrap_or(s.grid.radial))
            .map_err(|e| UsageError(format!("grid: {e}")))?;
        s.grid = grid;
        if let Some(v) = g.fd_step {
            if !(v > 0.0) {
                return Err(UsageError(format!("grid.fd_step must be positive, got {v}")));
            }
            s.fd_step = v;
        }
        if let Some(v) = g.series_order {
            s.series_order = v;
        }
        if let Some(v) = g.boundary_samples {
            if v == 0 {
                return Err(UsageError("grid.boundary_samples must be positive".into()));
            }
            s.boundary_samples = v;
        }
        if let Some(v) = g.radius_scan {
            if v < 2 {
                return Err(UsageError("grid.radius_scan must be at least 2".into()));
            }
            s.radius_scan = v;
        }
        for (name, &value) in &self.tolerances {
            s.tol.set(name, value).map_err(|e| UsageError(format!("tolerances.{name}: {e}")))?;
        }
        Ok(s)
    }
}

pub fn to_corpus_entry(e: FieldEntry) -> CorpusEntry {
    let centers = if e.centers.is_empty() { vec![e.spec.center()] } else { e.centers };
    CorpusEntry {
        label: e.label,
        field: e.spec,
        probes: centers.into_iter().map(|center| Probe { center, r_max: e.r_max }).collect(),
    }
}

/// Parse `a,r`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, r) = s.split_once(',').ok_or_else(|| format!("expected `angular,radial`, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(r)?))
}

/// Parse `name=value`.
pub fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected `name=value`, got {s:?}"))?;
    let v = value.trim().parse::<f64>().map_err(|e| format!("{value:?}: {e}"))?;
    Ok((name.trim().to_string(), v))
}
