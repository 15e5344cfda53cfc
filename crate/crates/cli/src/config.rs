//! Run settings: flags override the key=value config file, which overrides
//! the built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use phasevar_core::asymptotics::ReferenceCurve;
use phasevar_core::schemes::load_h_table;
use phasevar_core::{PowerTail, SchemeModel};

/// Environment variable that redirects relative output paths.
pub const OUT_DIR_ENV: &str = "PHASEVAR_OUT_DIR";

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Comma-separated schemes: canonical, heterodyne, markI, markII,
    /// power:C:P, table:C:P
    #[arg(long)]
    pub scheme: Option<String>,
    /// Comma-separated methods: exact, continuum, squeezed, asymptotic,
    /// reference:<name>, truncated
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub nbar_min: Option<f64>,
    #[arg(long)]
    pub nbar_max: Option<f64>,
    #[arg(long)]
    pub points_per_decade: Option<u32>,
    /// Relative tolerance on the mean photon number
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV output path (stdout if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated plot kinds: loglog_variance, z_vs_nbar
    #[arg(long)]
    pub plot: Option<String>,
    /// h(m) table for `table:C:P` schemes
    #[arg(long)]
    pub h_table: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long)]
    pub threads: Option<usize>,
    /// key=value settings file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    LoglogVariance,
    ZVsNbar,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::LoglogVariance => "loglog_variance",
            Self::ZVsNbar => "z_vs_nbar",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Exact,
    Continuum,
    Squeezed,
    Asymptotic,
    Reference(ReferenceCurve),
    Truncated,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Self::Exact,
            "continuum" => Self::Continuum,
            "squeezed" => Self::Squeezed,
            "asymptotic" => Self::Asymptotic,
            "truncated" => Self::Truncated,
            _ => match s.strip_prefix("reference:") {
                Some(curve) => Self::Reference(curve.parse().map_err(|e| anyhow!("{e}"))?),
                None => bail!("unknown method '{s}'"),
            },
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Exact => "exact".into(),
            Self::Continuum => "continuum".into(),
            Self::Squeezed => "squeezed".into(),
            Self::Asymptotic => "asymptotic".into(),
            Self::Reference(c) => format!("reference:{c}"),
            Self::Truncated => "truncated".into(),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub schemes: Vec<SchemeModel>,
    pub methods: Vec<Method>,
    pub nbar_min: f64,
    pub nbar_max: f64,
    pub points_per_decade: u32,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub plots: Vec<PlotKind>,
    pub threads: usize,
}

/// Raw string values before parsing, in precedence order.
#[derive(Debug, Default)]
struct Raw {
    scheme: Option<String>,
    method: Option<String>,
    nbar_min: Option<String>,
    nbar_max: Option<String>,
    points_per_decade: Option<String>,
    tol: Option<String>,
    out: Option<String>,
    plot: Option<String>,
    h_table: Option<String>,
    threads: Option<String>,
}

fn read_config_file(path: &Path) -> Result<Raw> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut raw = Raw::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
        let value = Some(value.trim().to_string());
        match key.trim().replace('-', "_").as_str() {
            "scheme" => raw.scheme = value,
            "method" => raw.method = value,
            "nbar_min" => raw.nbar_min = value,
            "nbar_max" => raw.nbar_max = value,
            "points_per_decade" => raw.points_per_decade = value,
            "tol" => raw.tol = value,
            "out" => raw.out = value,
            "plot" => raw.plot = value,
            "h_table" => raw.h_table = value,
            "threads" => raw.threads = value,
            other => bail!("{}:{}: unknown key '{other}'", path.display(), i + 1),
        }
    }
    Ok(raw)
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| anyhow!("bad value for {key}: '{s}'"))
}

fn power_params(spec: &str, rest: &str) -> Result<PowerTail> {
    let (c, p) = rest
        .split_once(':')
        .ok_or_else(|| anyhow!("scheme '{spec}' needs the form name:C:P"))?;
    PowerTail::new(num("C", c)?, num("P", p)?).map_err(|e| anyhow!("{spec}: {e}"))
}

/// Parses one scheme name; `table:` schemes read `h_table`.
pub fn parse_scheme(spec: &str, h_table: Option<&Path>) -> Result<SchemeModel> {
    Ok(match spec {
        "canonical" => SchemeModel::canonical(),
        "heterodyne" => SchemeModel::heterodyne(),
        "markI" | "mark1" => SchemeModel::mark_i(),
        "markII" | "mark2" => SchemeModel::mark_ii(),
        _ => {
            if let Some(rest) = spec.strip_prefix("power:") {
                let t = power_params(spec, rest)?;
                SchemeModel::power_law(t.c, t.p).map_err(|e| anyhow!("{e}"))?
            } else if let Some(rest) = spec.strip_prefix("table") {
                let tail = match rest.strip_prefix(':') {
                    Some(r) => Some(power_params(spec, r)?),
                    None if rest.is_empty() => None,
                    None => bail!("unknown scheme '{spec}'"),
                };
                let path = h_table.ok_or_else(|| anyhow!("scheme '{spec}' needs --h-table"))?;
                load_h_table(path, tail).map_err(|e| anyhow!("{}: {e}", path.display()))?
            } else {
                bail!("unknown scheme '{spec}'")
            }
        }
    })
}

impl Settings {
    /// Merges flags, the config file they name and `defaults` (a
    /// subcommand-specific method list and range).
    pub fn resolve(args: &CommonArgs, default_methods: &str, default_range: (f64, f64)) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_config_file(p)?,
            None => Raw::default(),
        };
        let pick = |flag: Option<String>, file: &Option<String>| flag.or_else(|| file.clone());
        let raw = Raw {
            scheme: pick(args.scheme.clone(), &file.scheme),
            method: pick(args.method.clone(), &file.method),
            nbar_min: pick(args.nbar_min.map(|v| v.to_string()), &file.nbar_min),
            nbar_max: pick(args.nbar_max.map(|v| v.to_string()), &file.nbar_max),
            points_per_decade: pick(args.points_per_decade.map(|v| v.to_string()), &file.points_per_decade),
            tol: pick(args.tol.map(|v| v.to_string()), &file.tol),
            out: pick(args.out.as_ref().map(|p| p.display().to_string()), &file.out),
            plot: pick(args.plot.clone(), &file.plot),
            h_table: pick(args.h_table.as_ref().map(|p| p.display().to_string()), &file.h_table),
            threads: pick(args.threads.map(|v| v.to_string()), &file.threads),
        };

        let h_table = raw.h_table.as_deref().map(Path::new);
        let schemes = list(raw.scheme.as_deref().unwrap_or("heterodyne"))
            .map(|s| parse_scheme(s, h_table))
            .collect::<Result<Vec<_>>>()?;
        let methods = list(raw.method.as_deref().unwrap_or(default_methods))
            .map(Method::parse)
            .collect::<Result<Vec<_>>>()?;
        if schemes.is_empty() || methods.is_empty() {
            bail!("need at least one scheme and one method");
        }
        let nbar_min = match &raw.nbar_min {
            Some(s) => num("nbar_min", s)?,
            None => default_range.0,
        };
        let nbar_max = match &raw.nbar_max {
            Some(s) => num("nbar_max", s)?,
            None => default_range.1,
        };
        if !(nbar_min > 0.0 && nbar_min <= nbar_max && nbar_max.is_finite()) {
            bail!("need 0 < nbar_min <= nbar_max (got {nbar_min}, {nbar_max})");
        }
        let points_per_decade = match &raw.points_per_decade {
            Some(s) => num("points_per_decade", s)?,
            None => 5,
        };
        if points_per_decade == 0 {
            bail!("points_per_decade must be positive");
        }
        let tol = match &raw.tol {
            Some(s) => num("tol", s)?,
            None => 1e-6,
        };
        if !(tol > 0.0 && tol <= 0.1) {
            bail!("tol must lie in (0, 0.1] (got {tol})");
        }
        let plots = list(raw.plot.as_deref().unwrap_or(""))
            .map(|k| match k {
                "loglog_variance" => Ok(PlotKind::LoglogVariance),
                "z_vs_nbar" => Ok(PlotKind::ZVsNbar),
                _ => Err(anyhow!("unknown plot kind '{k}'")),
            })
            .collect::<Result<Vec<_>>>()?;
        let threads = match &raw.threads {
            Some(s) => num("threads", s)?,
            None => 0,
        };
        Ok(Self {
            schemes,
            methods,
            nbar_min,
            nbar_max,
            points_per_decade,
            tol,
            out: raw.out.map(PathBuf::from),
            plots,
            threads,
        })
    }

    /// Where the CSV goes; relative paths land under `$PHASEVAR_OUT_DIR`
    /// when it is set.
    pub fn out_path(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|p| resolve_output(p))
    }

    /// `<out stem>_<kind>.svg` next to the CSV, or `phasevar_<kind>.svg`.
    pub fn plot_path(&self, kind: PlotKind) -> PathBuf {
        let stem = self
            .out
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "phasevar".into());
        let name = format!("{stem}_{}.svg", kind.name());
        match self.out.as_ref().and_then(|p| p.parent()) {
            Some(dir) if !dir.as_os_str().is_empty() => resolve_output(&dir.join(name)),
            _ => resolve_output(Path::new(&name)),
        }
    }
}

pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Log-spaced grid `10^(k/ppd)` covering `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points_per_decade: u32) -> Vec<f64> {
    let ppd = points_per_decade as f64;
    let slack = 1e-9;
    let k0 = (lo.log10() * ppd - slack).ceil() as i64;
    let k1 = (hi.log10() * ppd + slack).floor() as i64;
    (k0..=k1).map(|k| 10f64.powf(k as f64 / ppd)).collect()
}
