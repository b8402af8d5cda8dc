//! Flat `key = value` config files and the `--tol.<name>` flags.

use std::path::Path;

use loopbundle_core::harness::{default_tolerances, RunConfig};
use loopbundle_core::Error;

#[derive(Default)]
pub struct ConfigFile {
    entries: Vec<(String, String)>,
    pub suite: Option<String>,
    pub atlas: Option<String>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut out = ConfigFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            match k.as_str() {
                "suite" => out.suite = Some(v),
                "atlas" => out.atlas = Some(v),
                _ => out.entries.push((k, v)),
            }
        }
        Ok(out)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), Error> {
        for (k, v) in &self.entries {
            let bad = || Error::InvalidConfig(format!("bad value `{v}` for `{k}`"));
            match k.as_str() {
                "loop" => cfg.loop_name = v.clone(),
                "samples" => cfg.samples = v.parse().map_err(|_| bad())?,
                "seed" => cfg.seed = v.parse().map_err(|_| bad())?,
                "steps" => cfg.steps = v.parse().map_err(|_| bad())?,
                "report" => cfg.report_path = Some(v.into()),
                _ => match k.strip_prefix("tol.") {
                    Some(name) => set_tolerance(cfg, name, v.parse().map_err(|_| bad())?)?,
                    None => return Err(Error::InvalidConfig(format!("unknown key `{k}`"))),
                },
            }
        }
        Ok(())
    }
}

pub fn set_tolerance(cfg: &mut RunConfig, name: &str, value: f64) -> Result<(), Error> {
    if !default_tolerances().contains_key(name) {
        return Err(Error::InvalidConfig(format!("unknown tolerance `{name}`")));
    }
    cfg.tolerances.insert(name.to_string(), value);
    Ok(())
}

/// Arguments left for clap, and the `(name, value)` tolerance overrides.
pub type SplitArgs = (Vec<String>, Vec<(String, f64)>);

/// Pulls `--tol.<name>=<v>` and `--tol.<name> <v>` out of argv before clap sees it.
pub fn split_tolerances(args: Vec<String>) -> Result<SplitArgs, Error> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| Error::InvalidConfig(format!("--tol.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        let v: f64 = value.parse().map_err(|_| Error::InvalidConfig(format!("--tol.{name}: `{value}` is not a number")))?;
        tols.push((name, v));
    }
    Ok((rest, tols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tolerance_flags_both_spellings() {
        let (rest, tols) = split_tolerances(argv("lb verify --tol.jacobi=1e-7 --samples 5 --tol.axioms 1e-12")).unwrap();
        assert_eq!(rest, argv("lb verify --samples 5"));
        assert_eq!(tols, vec![("jacobi".to_string(), 1e-7), ("axioms".to_string(), 1e-12)]);
    }

    #[test]
    fn tolerance_flag_needs_number() {
        assert!(split_tolerances(argv("lb verify --tol.jacobi=abc")).is_err());
        assert!(split_tolerances(argv("lb verify --tol.jacobi")).is_err());
    }

    #[test]
    fn config_file_keys() {
        let f = ConfigFile::parse("# run\nloop = qh2\nsamples=7\n\ntol.jacobi = 1e-5  # looser\nsuite = jacobi\n").unwrap();
        let mut cfg = RunConfig::default();
        f.apply(&mut cfg).unwrap();
        assert_eq!(cfg.loop_name, "qh2");
        assert_eq!(cfg.samples, 7);
        assert_eq!(cfg.tol("jacobi"), 1e-5);
        assert_eq!(f.suite.as_deref(), Some("jacobi"));
    }

    #[test]
    fn config_file_rejects_unknown() {
        let mut cfg = RunConfig::default();
        assert!(ConfigFile::parse("colour = blue").unwrap().apply(&mut cfg).is_err());
        assert!(ConfigFile::parse("tol.nothing = 1").unwrap().apply(&mut cfg).is_err());
        assert!(ConfigFile::parse("just words").is_err());
    }
}
