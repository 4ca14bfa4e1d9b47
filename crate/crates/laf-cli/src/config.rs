//! Run configuration with layered resolution.
//!
//! Settings come from four layers, weakest first: built-in defaults, a flat
//! `key = value` config file, `LAF_*` environment variables, command-line
//! flags.  Every layer carries raw strings; parsing and validation happen
//! once, after the merge, so an invalid value is rejected the same way no
//! matter where it came from.  Validation runs before any output directory
//! or file is touched: a bad configuration exits without side effects.

use crate::registry;
use laf_core::sieve;
use std::path::{Path, PathBuf};

/// Fully resolved, validated run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Selected experiment ids, in catalog order, deduplicated.
    pub experiment_ids: Vec<String>,
    /// Largest n streamed by the shared sieve pass.
    pub x_max: u64,
    /// Ascending sample points; every entry is in [3, x_max].
    pub x_samples: Vec<u64>,
    /// Sieve segment length in records.
    pub segment_size: usize,
    /// Segment cache directory; None disables caching.
    pub cache_dir: Option<PathBuf>,
    /// Sieve worker threads (results are identical at any count).
    pub threads: usize,
    /// Directory receiving the CSV/JSON reports.
    pub output_dir: PathBuf,
}

/// One source of raw settings.  `None` means "not set at this layer".
#[derive(Clone, Debug, Default)]
pub struct Layer {
    pub experiments: Option<String>,
    pub x_max: Option<String>,
    pub x_samples: Option<String>,
    pub segment_size: Option<String>,
    pub cache_dir: Option<String>,
    pub threads: Option<String>,
    pub out: Option<String>,
    /// Path to a config file; meaningful on the env and flag layers only.
    pub config: Option<String>,
}

fn overlay(base: Layer, over: Layer) -> Layer {
    Layer {
        experiments: over.experiments.or(base.experiments),
        x_max: over.x_max.or(base.x_max),
        x_samples: over.x_samples.or(base.x_samples),
        segment_size: over.segment_size.or(base.segment_size),
        cache_dir: over.cache_dir.or(base.cache_dir),
        threads: over.threads.or(base.threads),
        out: over.out.or(base.out),
        config: over.config.or(base.config),
    }
}

/// Parses a positive count, accepting both plain integers and scientific
/// notation ("1e6").  Scientific values must be integral and below 2^53.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = t
        .parse()
        .map_err(|_| format!("cannot parse '{t}' as a count"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("count '{t}' must be finite and non-negative"));
    }
    if v > 9.007_199_254_740_992e15 {
        return Err(format!("count '{t}' exceeds 2^53; write it as a plain integer"));
    }
    let r = v.round();
    if (v - r).abs() > 1e-9 * r.max(1.0) {
        return Err(format!("count '{t}' is not an integer"));
    }
    Ok(r as u64)
}

/// Parses sample points: either a comma list ("1e4,1e5,1e6") or a geometric
/// spec "start:ratio:count" ("1e4:10:4" = four decades from 1e4).  Output is
/// ascending and deduplicated.
pub fn parse_samples(s: &str) -> Result<Vec<u64>, String> {
    let t = s.trim();
    let mut vals: Vec<u64> = if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            return Err(format!(
                "geometric sample spec '{t}' must be start:ratio:count"
            ));
        }
        let start = parse_count(parts[0])?;
        let ratio: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse ratio '{}'", parts[1]))?;
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(format!("sample ratio must be a finite number > 1, got '{}'", parts[1]));
        }
        let count = parse_count(parts[2])?;
        if count == 0 || count > 64 {
            return Err(format!("sample count must be in 1..=64, got {count}"));
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut v = start as f64;
        for _ in 0..count {
            if v > 9.007_199_254_740_992e15 {
                return Err(format!("geometric sample spec '{t}' overflows 2^53"));
            }
            out.push(v.round() as u64);
            v *= ratio;
        }
        out
    } else {
        t.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(parse_count)
            .collect::<Result<_, _>>()?
    };
    vals.sort_unstable();
    vals.dedup();
    if vals.is_empty() {
        return Err("sample list is empty".into());
    }
    Ok(vals)
}

/// Resolves a requested name to a catalog id: exact match first, then a
/// unique prefix ("density_table" selects "density_table_31").
fn resolve_experiment_id(name: &str) -> Result<&'static str, String> {
    if let Some(spec) = registry::find(name) {
        return Ok(spec.id);
    }
    let matches: Vec<&'static str> = registry::REGISTRY
        .iter()
        .map(|e| e.id)
        .filter(|id| id.starts_with(name))
        .collect();
    match matches.as_slice() {
        [one] => Ok(one),
        [] => {
            let known: Vec<&str> = registry::REGISTRY.iter().map(|e| e.id).collect();
            Err(format!(
                "unknown experiment id '{name}'; known ids: {} (or 'all')",
                known.join(", ")
            ))
        }
        many => Err(format!(
            "experiment id '{name}' is ambiguous: matches {}",
            many.join(", ")
        )),
    }
}

fn parse_experiments(s: &str) -> Result<Vec<String>, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("all") {
        return Ok(registry::REGISTRY.iter().map(|e| e.id.to_string()).collect());
    }
    let mut requested: Vec<&str> = Vec::new();
    for part in t.split(',') {
        let name = part.trim();
        if name.is_empty() {
            continue;
        }
        requested.push(resolve_experiment_id(name)?);
    }
    if requested.is_empty() {
        return Err("no experiment ids given".into());
    }
    // Canonical order and dedup come from the catalog, so output files are
    // produced in a stable order no matter how the list was written.
    Ok(registry::REGISTRY
        .iter()
        .filter(|e| requested.contains(&e.id))
        .map(|e| e.id.to_string())
        .collect())
}

/// Reads a flat `key = value` file.  Blank lines and `#` comments are
/// skipped; unknown keys are errors so typos cannot silently do nothing.
pub fn layer_from_file(path: &Path) -> Result<Layer, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut layer = Layer::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            format!("{}:{}: expected key = value", path.display(), idx + 1)
        })?;
        let value = Some(v.trim().to_string());
        match k.trim() {
            "experiments" => layer.experiments = value,
            "x_max" => layer.x_max = value,
            "x_samples" => layer.x_samples = value,
            "segment_size" => layer.segment_size = value,
            "cache_dir" => layer.cache_dir = value,
            "threads" => layer.threads = value,
            "out" => layer.out = value,
            other => {
                return Err(format!(
                    "{}:{}: unknown key '{other}'",
                    path.display(),
                    idx + 1
                ))
            }
        }
    }
    Ok(layer)
}

/// Collects the `LAF_*` environment variables through an injected getter so
/// tests can run hermetically.
pub fn layer_from_env(get: impl Fn(&str) -> Option<String>) -> Layer {
    Layer {
        experiments: get("LAF_EXPERIMENTS"),
        x_max: get("LAF_X_MAX"),
        x_samples: get("LAF_X_SAMPLES"),
        segment_size: get("LAF_SEGMENT_SIZE"),
        cache_dir: get("LAF_CACHE_DIR"),
        threads: get("LAF_THREADS"),
        out: get("LAF_OUT"),
        config: get("LAF_CONFIG"),
    }
}

const DEFAULT_X_MAX: u64 = 10_000_000;
const DEFAULT_SAMPLE_DECADES: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];
const MIN_X: u64 = 3;
const MAX_THREADS: u64 = 512;

/// Merges flag/env/file layers over the defaults and validates everything.
pub fn resolve(
    flags: Layer,
    env_get: impl Fn(&str) -> Option<String>,
) -> Result<RunConfig, String> {
    let env = layer_from_env(env_get);
    let config_path = flags.config.clone().or_else(|| env.config.clone());
    let file = match &config_path {
        Some(p) => layer_from_file(Path::new(p))?,
        None => Layer::default(),
    };
    let merged = overlay(overlay(file, env), flags);

    let x_max = match &merged.x_max {
        Some(s) => parse_count(s)?,
        None => DEFAULT_X_MAX,
    };
    if x_max < MIN_X {
        return Err(format!("x-max must be at least {MIN_X}, got {x_max}"));
    }
    if x_max > sieve::GLOBAL_LIMIT {
        return Err(format!(
            "x-max {x_max} exceeds the supported limit {}",
            sieve::GLOBAL_LIMIT
        ));
    }

    let x_samples = match &merged.x_samples {
        Some(s) => {
            let vals = parse_samples(s)?;
            for &x in &vals {
                if x < MIN_X {
                    return Err(format!("sample point {x} is below the minimum {MIN_X}"));
                }
                if x > x_max {
                    return Err(format!("sample point {x} exceeds x-max {x_max}"));
                }
            }
            vals
        }
        None => {
            // Default: the decades up to x_max; for small runs just x_max.
            let mut vals: Vec<u64> = DEFAULT_SAMPLE_DECADES
                .iter()
                .copied()
                .filter(|&d| d <= x_max)
                .collect();
            if vals.is_empty() {
                vals.push(x_max);
            }
            vals
        }
    };

    let experiment_ids = parse_experiments(merged.experiments.as_deref().unwrap_or("all"))?;

    let segment_size = match &merged.segment_size {
        Some(s) => parse_count(s)?,
        None => sieve::DEFAULT_SEGMENT_SIZE as u64,
    };
    if segment_size == 0 || segment_size > sieve::MAX_SEGMENT_SIZE as u64 {
        return Err(format!(
            "segment-size must be in 1..={}, got {segment_size}",
            sieve::MAX_SEGMENT_SIZE
        ));
    }

    let threads = match &merged.threads {
        Some(s) => parse_count(s)?,
        None => 1,
    };
    if threads == 0 || threads > MAX_THREADS {
        return Err(format!("threads must be in 1..={MAX_THREADS}, got {threads}"));
    }

    let cache_dir = match &merged.cache_dir {
        Some(s) if s.trim().is_empty() => return Err("cache-dir is empty".into()),
        Some(s) => Some(PathBuf::from(s.trim())),
        None => None,
    };

    let output_dir = match &merged.out {
        Some(s) if s.trim().is_empty() => return Err("out directory is empty".into()),
        Some(s) => PathBuf::from(s.trim()),
        None => PathBuf::from("laf-out"),
    };

    Ok(RunConfig {
        experiment_ids,
        x_max,
        x_samples,
        segment_size: segment_size as usize,
        cache_dir,
        threads: threads as usize,
        output_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn counts_parse_plain_and_scientific() {
        assert_eq!(parse_count("12345").unwrap(), 12345);
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("2.5e1").unwrap(), 25);
        assert_eq!(parse_count(" 1E4 ").unwrap(), 10_000);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
        assert!(parse_count("1e300").is_err());
        assert!(parse_count("").is_err());
    }

    #[test]
    fn samples_parse_lists_and_geometric_specs() {
        assert_eq!(parse_samples("1e4,1e5,1e6").unwrap(), [10_000, 100_000, 1_000_000]);
        assert_eq!(parse_samples("1e2:10:3").unwrap(), [100, 1_000, 10_000]);
        assert_eq!(parse_samples("5,5,5").unwrap(), [5]);
        // unsorted input comes back ascending
        assert_eq!(parse_samples("1e5,1e4").unwrap(), [10_000, 100_000]);
        assert!(parse_samples("1e2:0.5:3").is_err());
        assert!(parse_samples("1e2:10").is_err());
        assert!(parse_samples("").is_err());
    }

    #[test]
    fn defaults_are_the_decade_grid_to_ten_million() {
        let cfg = resolve(Layer::default(), no_env).unwrap();
        assert_eq!(cfg.x_max, 10_000_000);
        assert_eq!(cfg.x_samples, [10_000, 100_000, 1_000_000, 10_000_000]);
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.segment_size, sieve::DEFAULT_SEGMENT_SIZE);
        assert_eq!(cfg.cache_dir, None);
        assert_eq!(cfg.experiment_ids.len(), registry::REGISTRY.len());
        assert_eq!(cfg.output_dir, PathBuf::from("laf-out"));
    }

    #[test]
    fn default_samples_clip_to_small_x_max() {
        let flags = Layer {
            x_max: Some("1e5".into()),
            ..Layer::default()
        };
        let cfg = resolve(flags, no_env).unwrap();
        assert_eq!(cfg.x_samples, [10_000, 100_000]);

        let flags = Layer {
            x_max: Some("5000".into()),
            ..Layer::default()
        };
        let cfg = resolve(flags, no_env).unwrap();
        assert_eq!(cfg.x_samples, [5000]);
    }

    #[test]
    fn explicit_samples_above_x_max_are_rejected() {
        let flags = Layer {
            x_max: Some("1e4".into()),
            x_samples: Some("1e4,1e5".into()),
            ..Layer::default()
        };
        let err = resolve(flags, no_env).unwrap_err();
        assert!(err.contains("exceeds x-max"), "{err}");
    }

    #[test]
    fn unknown_experiment_id_is_rejected_with_the_catalog() {
        let flags = Layer {
            experiments: Some("sum_beta_21,bogus_id".into()),
            ..Layer::default()
        };
        let err = resolve(flags, no_env).unwrap_err();
        assert!(err.contains("bogus_id"), "{err}");
        assert!(err.contains("sum_beta_21"), "{err}");
    }

    #[test]
    fn experiment_selection_is_deduped_into_catalog_order() {
        let flags = Layer {
            experiments: Some("consecutive_p3,sum_beta_21,consecutive_p3".into()),
            ..Layer::default()
        };
        let cfg = resolve(flags, no_env).unwrap();
        assert_eq!(cfg.experiment_ids, ["sum_beta_21", "consecutive_p3"]);
    }

    #[test]
    fn short_names_resolve_as_unique_prefixes() {
        let flags = Layer {
            experiments: Some("density_table,sum_beta".into()),
            ..Layer::default()
        };
        let cfg = resolve(flags, no_env).unwrap();
        assert_eq!(cfg.experiment_ids, ["sum_beta_21", "density_table_31"]);
        // Prefix matching never invents ids out of thin air.
        assert!(resolve_experiment_id("density_table_99").is_err());
        assert!(resolve_experiment_id("").is_err());
    }

    #[test]
    fn zero_threads_and_zero_segment_size_are_rejected() {
        let flags = Layer {
            threads: Some("0".into()),
            ..Layer::default()
        };
        assert!(resolve(flags, no_env).is_err());
        let flags = Layer {
            segment_size: Some("0".into()),
            ..Layer::default()
        };
        assert!(resolve(flags, no_env).is_err());
    }

    #[test]
    fn precedence_is_file_then_env_then_flags() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment line").unwrap();
        writeln!(file, "x_max = 1e3").unwrap();
        writeln!(file, "threads = 2").unwrap();
        writeln!(file, "out = from-file").unwrap();
        let path = file.path().to_str().unwrap().to_string();

        // File only.
        let flags = Layer {
            config: Some(path.clone()),
            ..Layer::default()
        };
        let cfg = resolve(flags, no_env).unwrap();
        assert_eq!(cfg.x_max, 1000);
        assert_eq!(cfg.threads, 2);
        assert_eq!(cfg.output_dir, PathBuf::from("from-file"));

        // Env overrides file.
        let flags = Layer {
            config: Some(path.clone()),
            ..Layer::default()
        };
        let env = |k: &str| match k {
            "LAF_X_MAX" => Some("2e3".to_string()),
            _ => None,
        };
        let cfg = resolve(flags, env).unwrap();
        assert_eq!(cfg.x_max, 2000);
        assert_eq!(cfg.threads, 2); // still from the file

        // Flags override env.
        let flags = Layer {
            config: Some(path.clone()),
            x_max: Some("5e3".into()),
            ..Layer::default()
        };
        let cfg = resolve(flags, env).unwrap();
        assert_eq!(cfg.x_max, 5000);

        // The config file itself can come from the environment.
        let env_with_config = |k: &str| match k {
            "LAF_CONFIG" => Some(path.clone()),
            _ => None,
        };
        let cfg = resolve(Layer::default(), env_with_config).unwrap();
        assert_eq!(cfg.x_max, 1000);
    }

    #[test]
    fn config_file_rejects_unknown_keys_and_bad_lines() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "x_mx = 1e3").unwrap();
        let err = layer_from_file(file.path()).unwrap_err();
        assert!(err.contains("unknown key 'x_mx'"), "{err}");

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "just some words").unwrap();
        let err = layer_from_file(file.path()).unwrap_err();
        assert!(err.contains("expected key = value"), "{err}");
    }

    #[test]
    fn tiny_x_max_is_rejected() {
        let flags = Layer {
            x_max: Some("2".into()),
            ..Layer::default()
        };
        assert!(resolve(flags, no_env).is_err());
    }
}
