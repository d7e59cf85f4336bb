//! Dataset specifications: CSV files, IDX pairs and synthetic generators.

use std::fs;
use std::path::{Path, PathBuf};

use oda_core::data::{gen_circles, gen_gaussians, load_csv, load_idx, Dataset, FeatureShape, LabelColumn};
use oda_core::OdaError;

type Result<T> = std::result::Result<T, OdaError>;

fn usage(msg: impl Into<String>) -> OdaError {
    OdaError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Gaussians,
    Circles,
}

/// A synthetic dataset recipe. `n` counts all rows across classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub seed: u64,
    /// Cluster std for gaussians, radial noise for circles.
    pub std: f64,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl GenSpec {
    pub fn new(kind: GenKind) -> Self {
        Self {
            kind,
            n: 1500,
            seed: 0,
            std: match kind {
                GenKind::Gaussians => 1.0,
                GenKind::Circles => 0.1,
            },
            centers: vec![vec![-3.0, 0.0], vec![3.0, 0.0]],
            radii: vec![1.0, 2.0],
        }
    }

    /// `gaussians` or `circles`, optionally followed by `:key=value,...`.
    pub fn parse(spec: &str) -> Result<Option<Self>> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let kind = match name {
            "gaussians" => GenKind::Gaussians,
            "circles" => GenKind::Circles,
            _ => return Ok(None),
        };
        let mut g = Self::new(kind);
        for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| usage(format!("bad generator option `{pair}`")))?;
            let bad = || usage(format!("bad value `{v}` for generator option `{k}`"));
            match k.trim() {
                "n" => g.n = v.trim().parse().map_err(|_| bad())?,
                "seed" => g.seed = v.trim().parse().map_err(|_| bad())?,
                "std" => g.std = v.trim().parse().map_err(|_| bad())?,
                _ => return Err(usage(format!("unknown generator option `{k}` (n, seed, std)"))),
            }
        }
        Ok(Some(g))
    }

    pub fn generate(&self) -> Result<Dataset> {
        let classes = match self.kind {
            GenKind::Gaussians => self.centers.len(),
            GenKind::Circles => self.radii.len(),
        };
        if self.n == 0 || !self.n.is_multiple_of(classes) {
            return Err(usage(format!("n must be a positive multiple of the class count {classes}")));
        }
        let per = self.n / classes;
        match self.kind {
            GenKind::Gaussians => gen_gaussians(self.seed, per, &self.centers, self.std),
            GenKind::Circles => gen_circles(self.seed, per, &self.radii, self.std),
        }
    }
}

/// Which column labels a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelChoice {
    /// A column named `label` if the header has one.
    Auto,
    None,
    Column(LabelColumn),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Csv {
        path: PathBuf,
        label: LabelChoice,
        shape: Option<FeatureShape>,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
    },
    Generated(GenSpec),
}

pub fn parse_shape(s: &str) -> Result<FeatureShape> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| usage(format!("shape must look like ROWSxCOLS, got `{s}`")))?;
    let rows: usize = r.trim().parse().map_err(|_| usage(format!("bad shape `{s}`")))?;
    let cols: usize = c.trim().parse().map_err(|_| usage(format!("bad shape `{s}`")))?;
    if rows == 0 || cols == 0 {
        return Err(usage("shape dimensions must be positive"));
    }
    Ok(FeatureShape::Image { rows, cols })
}

impl DataSpec {
    /// `idx:IMAGES,LABELS`, a generator spec, or a CSV path.
    pub fn parse(spec: &str, label_column: Option<&str>, shape: Option<&str>) -> Result<Self> {
        if let Some(g) = GenSpec::parse(spec)? {
            return Ok(Self::Generated(g));
        }
        if let Some(rest) = spec.strip_prefix("idx:") {
            let (images, labels) = rest
                .split_once(',')
                .ok_or_else(|| usage("idx data needs `idx:IMAGES,LABELS`"))?;
            return Ok(Self::Idx {
                images: PathBuf::from(images),
                labels: PathBuf::from(labels),
            });
        }
        let label = match label_column {
            None | Some("auto") => LabelChoice::Auto,
            Some("none") => LabelChoice::None,
            Some(c) => LabelChoice::Column(LabelColumn::parse(c)),
        };
        Ok(Self::Csv {
            path: PathBuf::from(spec),
            label,
            shape: shape.map(parse_shape).transpose()?,
        })
    }

    pub fn check_paths(&self) -> Result<()> {
        let paths: Vec<&Path> = match self {
            Self::Csv { path, .. } => vec![path],
            Self::Idx { images, labels } => vec![images, labels],
            Self::Generated(_) => vec![],
        };
        for p in paths {
            if !p.exists() {
                return Err(OdaError::Load {
                    path: p.to_path_buf(),
                    message: "file not found".into(),
                });
            }
        }
        Ok(())
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            Self::Generated(g) => g.generate(),
            Self::Idx { images, labels } => load_idx(images, labels),
            Self::Csv { path, label, shape } => {
                let column = match label {
                    LabelChoice::None => None,
                    LabelChoice::Column(c) => Some(c.clone()),
                    LabelChoice::Auto => has_label_header(path).then(|| LabelColumn::Name("label".into())),
                };
                let mut d = load_csv(path, column.as_ref())?;
                if let Some(s) = shape {
                    if d.dim() != s.len() && !d.is_empty() {
                        return Err(usage(format!("{} features do not fit shape {s}", d.dim())));
                    }
                    d.shape = *s;
                }
                Ok(d)
            }
        }
    }
}

fn has_label_header(path: &Path) -> bool {
    fs::read_to_string(path)
        .ok()
        .and_then(|t| t.lines().find(|l| !l.trim().is_empty()).map(str::to_string))
        .is_some_and(|first| first.split(',').any(|f| f.trim() == "label"))
}
