//! `key=value` configuration with dotted keys. Defaults, the config file and
//! command-line flags are merged in that order into one string map, which is
//! then parsed and validated as a whole.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use gwp_core::{PacketParams, SweepMode};

/// Anything wrong with the configuration (exit status 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Keys accepted in config files and produced by flags.
pub const KNOWN_KEYS: &[&str] = &[
    "packet.p",
    "packet.nu",
    "packet.gamma",
    "packet.eps",
    "packet.c",
    "packet.t",
    "packet.dim",
    "grid.nx",
    "grid.ny",
    "grid.extent",
    "sweep.mode",
    "sweep.values",
    "sweep.sqrt_p",
    "cwt.scales",
    "cwt.scale_min",
    "cwt.scale_max",
    "cwt.angles",
    "cwt.input",
    "sources.q",
    "io.out",
    "io.pgm",
    "tol.roundtrip",
    "tol.convention",
];

/// Default packet: p = 0.5, ν = 1/2, γ = 0.25, ε = 1.
const DEFAULTS: &[(&str, &str)] = &[
    ("packet.p", "0.5"),
    ("packet.nu", "0.5"),
    ("packet.gamma", "0.25"),
    ("packet.eps", "1"),
    ("packet.c", "1"),
    ("packet.t", "0"),
    ("packet.dim", "2"),
    ("grid.nx", "256"),
    ("grid.ny", "256"),
    ("sweep.mode", "eps-over-gamma"),
    ("sweep.values", "1/3,2/3,2"),
    (
        "sweep.sqrt_p",
        "1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6,6.5,7,7.5,8",
    ),
    ("cwt.scales", "32"),
    ("cwt.angles", "16"),
    ("sources.q", "1"),
    ("io.out", "."),
    ("io.pgm", "false"),
    ("tol.roundtrip", "0.05"),
    ("tol.convention", "0.05"),
];

/// The transform commands default to a narrower-band analysing packet
/// (p = 32, γ = 1, ε = 1/2) unless any packet key is given.
const CWT_PACKET: &[(&str, &str)] = &[
    ("packet.p", "32"),
    ("packet.gamma", "1"),
    ("packet.eps", "0.5"),
];

/// Ordered key/value pairs from one source.
pub type Entries = Vec<(String, String)>;

/// Parses `key=value` lines; `#` starts a comment line, blank lines are skipped.
pub fn parse_config_text(text: &str, origin: &str) -> Result<Entries, ConfigError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!(
                "{origin}:{}: expected key=value, got {line:?}",
                lineno + 1
            ));
        };
        let key = key.trim();
        check_key(key).map_err(|e| ConfigError(format!("{origin}:{}: {}", lineno + 1, e.0)))?;
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Entries, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text, &path.display().to_string())
}

fn check_key(key: &str) -> Result<(), ConfigError> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        err(format!("unknown key {key:?}"))
    }
}

/// Merged view: defaults, then the file, then flags.
pub fn merge(
    command_uses_cwt_packet: bool,
    file: &Entries,
    flags: &Entries,
) -> BTreeMap<String, String> {
    let mut map: BTreeMap<String, String> = DEFAULTS
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let user_packet = file
        .iter()
        .chain(flags)
        .any(|(k, _)| k.starts_with("packet."));
    if command_uses_cwt_packet && !user_packet {
        for (k, v) in CWT_PACKET {
            map.insert(k.to_string(), v.to_string());
        }
    }
    for (k, v) in file.iter().chain(flags) {
        map.insert(k.clone(), v.clone());
    }
    map
}

/// A real number, also accepting a fraction `a/b`.
pub fn parse_number(s: &str) -> Result<f64, ConfigError> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("bad number {s:?}")))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("bad number {s:?}")))?;
            a / b
        }
        None => s
            .parse()
            .map_err(|_| ConfigError(format!("bad number {s:?}")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        err(format!("number {s:?} is not finite"))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<&str> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .collect();
    if items.is_empty() {
        return err("empty list");
    }
    items.into_iter().map(parse_number).collect()
}

fn parse_count(key: &str, s: &str) -> Result<usize, ConfigError> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => err(format!("{key} must be a positive integer, got {s:?}")),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool, ConfigError> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => err(format!("{key} must be true or false, got {s:?}")),
    }
}

pub fn parse_mode(s: &str) -> Result<SweepMode, ConfigError> {
    match s.trim() {
        "eps-over-gamma" => Ok(SweepMode::FixedEpsOverGamma),
        "kappa-eps" => Ok(SweepMode::FixedKappaEps),
        other => err(format!(
            "sweep.mode must be eps-over-gamma or kappa-eps, got {other:?}"
        )),
    }
}

/// Fully parsed configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: PacketParams,
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    /// Half-widths of the position window; `None` means ±6σ.
    pub extent: Option<[f64; 2]>,
    pub mode: SweepMode,
    pub values: Vec<f64>,
    pub sqrt_p: Vec<f64>,
    pub scales: usize,
    pub scale_min: Option<f64>,
    pub scale_max: Option<f64>,
    pub angles: usize,
    pub input: Option<PathBuf>,
    pub q: f64,
    pub out: PathBuf,
    pub pgm: bool,
    pub tolerances: BTreeMap<String, f64>,
    /// Every resolved key except output location, for provenance lines.
    pub summary: String,
}

impl RunConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let num = |k: &str| -> Result<f64, ConfigError> {
            parse_number(get(k).unwrap_or_default())
                .map_err(|e| ConfigError(format!("{k}: {}", e.0)))
        };
        let opt_num =
            |k: &str| -> Result<Option<f64>, ConfigError> { get(k).map(|_| num(k)).transpose() };
        let list = |k: &str| {
            parse_list(get(k).unwrap_or_default()).map_err(|e| ConfigError(format!("{k}: {}", e.0)))
        };

        let dim = parse_count("packet.dim", get("packet.dim").unwrap_or_default())?;
        if dim < 2 {
            return err("packet.dim must be at least 2");
        }
        let eps = list("packet.eps")?;
        let eps = match eps.len() {
            1 => vec![eps[0]; dim - 1],
            n if n == dim - 1 => eps,
            n => {
                return err(format!(
                    "packet.eps has {n} entries, expected 1 or {}",
                    dim - 1
                ))
            }
        };
        let params = PacketParams::new(
            num("packet.p")?,
            num("packet.nu")?,
            num("packet.gamma")?,
            eps,
            num("packet.c")?,
        )
        .map_err(|e| ConfigError(e.to_string()))?;

        let extent = match get("grid.extent") {
            None => None,
            Some(s) => {
                let v = parse_list(s).map_err(|e| ConfigError(format!("grid.extent: {}", e.0)))?;
                let pair = match v.as_slice() {
                    [a] => [*a, *a],
                    [a, b] => [*a, *b],
                    _ => return err("grid.extent takes one or two half-widths"),
                };
                if pair.iter().any(|h| *h <= 0.0) {
                    return err("grid.extent must be positive");
                }
                Some(pair)
            }
        };

        let values = list("sweep.values")?;
        if values.iter().any(|v| *v <= 0.0) {
            return err("sweep.values must be positive");
        }
        let sqrt_p = list("sweep.sqrt_p")?;
        if sqrt_p.iter().any(|v| *v <= 0.0) {
            return err("sweep.sqrt_p must be positive");
        }

        let scale_min = opt_num("cwt.scale_min")?;
        let scale_max = opt_num("cwt.scale_max")?;
        if let (Some(a), Some(b)) = (scale_min, scale_max) {
            if !(0.0 < a && a < b) {
                return err(format!(
                    "need 0 < cwt.scale_min < cwt.scale_max, got {a} and {b}"
                ));
            }
        }

        let mut tolerances = BTreeMap::new();
        for (k, v) in map.iter().filter(|(k, _)| k.starts_with("tol.")) {
            let value = parse_number(v).map_err(|e| ConfigError(format!("{k}: {}", e.0)))?;
            if value <= 0.0 {
                return err(format!("{k} must be positive"));
            }
            tolerances.insert(k["tol.".len()..].to_string(), value);
        }

        let q = num("sources.q")?;
        if q <= 0.0 {
            return err("sources.q must be positive");
        }

        let summary = map
            .iter()
            .filter(|(k, _)| !k.starts_with("io."))
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");

        Ok(Self {
            params,
            t: num("packet.t")?,
            nx: parse_count("grid.nx", get("grid.nx").unwrap_or_default())?,
            ny: parse_count("grid.ny", get("grid.ny").unwrap_or_default())?,
            extent,
            mode: parse_mode(get("sweep.mode").unwrap_or_default())?,
            values,
            sqrt_p,
            scales: parse_count("cwt.scales", get("cwt.scales").unwrap_or_default())?,
            scale_min,
            scale_max,
            angles: parse_count("cwt.angles", get("cwt.angles").unwrap_or_default())?,
            input: get("cwt.input").map(PathBuf::from),
            q,
            out: PathBuf::from(get("io.out").unwrap_or(".")),
            pgm: parse_bool("io.pgm", get("io.pgm").unwrap_or("false"))?,
            tolerances,
            summary,
        })
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}
