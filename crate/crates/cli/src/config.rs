//! Problem files and run configuration.

use std::path::{Path, PathBuf};

use mpsl_core::nonlinearity::{ForcingTerm, NonlinearitySpec};
use mpsl_core::problem::{BoundarySide, ProblemSpec};
use serde::Deserialize;

use crate::CliError;

/// `f₀` / `f_∞` as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Limit {
    Number(f64),
    Text(Infinite),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum Infinite {
    #[serde(rename = "inf", alias = "infinity", alias = "Infinity")]
    Inf,
}

impl Limit {
    pub fn value(self) -> f64 {
        match self {
            Limit::Number(v) => v,
            Limit::Text(Infinite::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityFile {
    pub f: String,
    pub f0: Option<Limit>,
    pub finf: Option<Limit>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingFile {
    pub h: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub minus: BoundarySide<f64>,
    pub plus: BoundarySide<f64>,
    pub nonlinearity: Option<NonlinearityFile>,
    pub forcing: Option<ForcingFile>,
}

pub struct Problem {
    pub name: String,
    pub spec: ProblemSpec<f64>,
    pub nonlinearity: Option<NonlinearityFile>,
    pub forcing: Option<ForcingFile>,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let raw: ProblemFile =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let name = raw
            .name
            .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
        Ok(Problem { name, spec: ProblemSpec::new(raw.minus, raw.plus), nonlinearity: raw.nonlinearity, forcing: raw.forcing })
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec<f64>, CliError> {
        let Some(nl) = &self.nonlinearity else {
            return Err(CliError::Validation("problem file has no 'nonlinearity' section".into()));
        };
        NonlinearitySpec::new(&nl.f, nl.f0.map(Limit::value), nl.finf.map(Limit::value))
            .map_err(|e| CliError::Validation(format!("nonlinearity.f: {e}")))
    }

    pub fn forcing(&self) -> Result<ForcingTerm, CliError> {
        match &self.forcing {
            Some(h) => ForcingTerm::new(&h.h).map_err(|e| CliError::Validation(format!("forcing.h: {e}"))),
            None => Ok(ForcingTerm::zero()),
        }
    }
}

/// Optional config file; every key mirrors a command-line flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda_max: Option<f64>,
    pub k: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub eps_seed: Option<f64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut f = Formats { json: false, csv: false, svg: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "json" => f.json = true,
                "csv" => f.csv = true,
                "svg" => f.svg = true,
                "all" => f = Formats { json: true, csv: true, svg: true },
                other => return Err(CliError::Validation(format!("--format: unknown format '{other}'"))),
            }
        }
        Ok(f)
    }
}

/// Resolved settings: config file values overridden by flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda_max: f64,
    pub k: (i64, i64),
    pub tol: Option<f64>,
    pub seed: u64,
    pub eps_seed: Option<f64>,
    pub formats: Formats,
    pub out: PathBuf,
}

/// `"a..b"` (half open), `"a..=b"` or a single index.
pub fn parse_k_range(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Validation(format!("--k: expected 'a..b', 'a..=b' or 'k', got '{s}'"));
    let num = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?, num(b)? - 1)
    } else {
        let k = num(s)?;
        (k, k)
    };
    if lo < 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub struct FlagValues {
    pub lambda_max: Option<f64>,
    pub k: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub eps_seed: Option<f64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

impl RunConfig {
    pub fn resolve(flags: FlagValues, default_k: &str) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let lambda_max = flags.lambda_max.or(file.lambda_max).unwrap_or(100.0);
        if !(lambda_max.is_finite() && lambda_max > 0.0) {
            return Err(CliError::Validation(format!("--lambda-max must be positive, got {lambda_max}")));
        }
        let k = parse_k_range(flags.k.as_deref().or(file.k.as_deref()).unwrap_or(default_k))?;
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&t) {
                return Err(CliError::Validation(format!("--tol = {t} is outside [1e-14, 1e-2]")));
            }
        }
        let eps_seed = flags.eps_seed.or(file.eps_seed);
        if let Some(e) = eps_seed {
            if !(e > 0.0 && e <= 1.0) {
                return Err(CliError::Validation(format!("--eps-seed = {e} must lie in (0, 1]")));
            }
        }
        let formats = Formats::parse(flags.format.as_deref().or(file.format.as_deref()).unwrap_or("all"))?;
        Ok(RunConfig {
            lambda_max,
            k,
            tol,
            seed: flags.seed.or(file.seed).unwrap_or(1),
            eps_seed,
            formats,
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("mpsl-out")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("0..10").unwrap(), (0, 9));
        assert_eq!(parse_k_range("2..=4").unwrap(), (2, 4));
        assert_eq!(parse_k_range("3").unwrap(), (3, 3));
        assert!(parse_k_range("5..2").is_err());
        assert!(parse_k_range("x").is_err());
    }

    #[test]
    fn problem_file() {
        let text = r#"{"minus": {"alpha0": 1, "beta0": 0}, "plus": {"alpha0": 1, "beta0": 0, "alpha": [0.5], "beta": [0], "eta": [0]},
                      "nonlinearity": {"f": "xi^3 + 4*xi", "f0": 4, "finf": "inf"}}"#;
        let p = Problem::parse(text, Path::new("half.json")).unwrap();
        assert_eq!(p.name, "half");
        assert!(p.nonlinearity().unwrap().finf.is_infinite());
        assert!(Problem::parse(r#"{"minus": {"alpha0": 1, "beta0": 0}, "plus": {"alpha0": 1, "beta0": 0}, "extra": 1}"#, Path::new("x")).is_err());
    }
}
