//! Flat `key = value` run configurations with one schema per command.
//!
//! Blank lines and lines starting with `#` are ignored. Every command accepts
//! a fixed set of keys; anything else is rejected, and defaults are filled in
//! at parse time so a serialized config is fully explicit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{CliError, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    KernelCheck,
    Symbol,
    Solve,
    Eig,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::KernelCheck,
        Command::Symbol,
        Command::Solve,
        Command::Eig,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::KernelCheck => "kernel-check",
            Command::Symbol => "symbol",
            Command::Solve => "solve",
            Command::Eig => "eig",
            Command::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError::Invalid {
                key: "command".into(),
                reason: format!("unknown command {s:?}"),
            })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Count,
    Text,
    RealList,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn describe(self) -> String {
        match self {
            Kind::Real => "a real number".into(),
            Kind::Count => "a nonnegative integer".into(),
            Kind::Text => "text".into(),
            Kind::RealList => "a comma-separated list of real numbers".into(),
            Kind::Choice(opts) => format!("one of {}", opts.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u64),
    Text(String),
    RealList(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => f.write_str(&real_text(*v)),
            Value::Count(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
            Value::RealList(v) => {
                let parts: Vec<String> = v.iter().map(|x| real_text(*x)).collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

/// Shortest text that parses back to the same bits; exponent form for very
/// small or large magnitudes.
pub fn real_text(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse_value(key: &str, kind: Kind, raw: &str) -> Result<Value, ConfigError> {
    let mismatch = || ConfigError::TypeMismatch {
        key: key.into(),
        expected: kind.describe(),
        found: raw.into(),
    };
    let real = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match kind {
        Kind::Real => real(raw).map(Value::Real).ok_or_else(mismatch),
        Kind::Count => raw.parse::<u64>().map(Value::Count).map_err(|_| mismatch()),
        Kind::Text => {
            if raw.is_empty() {
                Err(mismatch())
            } else {
                Ok(Value::Text(raw.into()))
            }
        }
        Kind::RealList => {
            let list: Option<Vec<f64>> = raw.split(',').map(real).collect();
            match list {
                Some(v) if !v.is_empty() => Ok(Value::RealList(v)),
                _ => Err(mismatch()),
            }
        }
        Kind::Choice(opts) => {
            if opts.contains(&raw) {
                Ok(Value::Text(raw.into()))
            } else {
                Err(mismatch())
            }
        }
    }
}

/// Default for a key, possibly depending on already resolved keys.
#[derive(Clone, Copy)]
enum Default {
    None,
    Fixed(&'static str),
    Derived(fn(&BTreeMap<String, Value>) -> Option<String>),
}

#[derive(Clone, Copy)]
struct KeySpec {
    name: &'static str,
    kind: Kind,
    required: bool,
    default: Default,
}

const fn req(name: &'static str, kind: Kind) -> KeySpec {
    KeySpec {
        name,
        kind,
        required: true,
        default: Default::None,
    }
}

const fn opt(name: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind,
        required: false,
        default: Default::Fixed(default),
    }
}

const fn optional(name: &'static str, kind: Kind) -> KeySpec {
    KeySpec {
        name,
        kind,
        required: false,
        default: Default::None,
    }
}

const fn derived(name: &'static str, kind: Kind, f: fn(&BTreeMap<String, Value>) -> Option<String>) -> KeySpec {
    KeySpec {
        name,
        kind,
        required: false,
        default: Default::Derived(f),
    }
}

pub const KERNEL_FAMILIES: &[&str] = &["truncated-power", "pure-power", "tabulated"];
pub const CUTOFFS: &[&str] = &["hard", "quintic"];
pub const MODES: &[&str] = &["vanishing", "diverging"];
pub const METHODS: &[&str] = &["newton", "gradient"];
pub const DEFAULT_OUT: &str = "nlpl-out";

fn text_of<'a>(values: &'a BTreeMap<String, Value>, key: &str) -> Option<&'a str> {
    match values.get(key) {
        Some(Value::Text(t)) => Some(t),
        _ => None,
    }
}

fn is_one_dimensional(values: &BTreeMap<String, Value>) -> bool {
    text_of(values, "domain").is_none_or(|d| d.trim_start().starts_with("interval"))
}

fn diverging(values: &BTreeMap<String, Value>) -> bool {
    text_of(values, "mode") == Some("diverging")
}

fn default_grid(values: &BTreeMap<String, Value>) -> Option<String> {
    Some(match (diverging(values), is_one_dimensional(values)) {
        (false, _) => "ratio 8".into(),
        (true, true) => format!("fixed {}", 1.0 / 128.0),
        (true, false) => format!("fixed {}", 1.0 / 16.0),
    })
}

fn default_reference_h(values: &BTreeMap<String, Value>) -> Option<String> {
    let h = match (diverging(values), is_one_dimensional(values)) {
        (false, true) => 1.0 / 256.0,
        (true, true) => 1.0 / 128.0,
        (_, false) => 1.0 / 16.0,
    };
    Some(h.to_string())
}

fn default_truncation(values: &BTreeMap<String, Value>) -> Option<String> {
    let domain = nlpl::calculus::Domain::<f64>::parse(text_of(values, "domain")?).ok()?;
    Some((32.0 * domain.diameter()).to_string())
}

const KERNEL_KEYS: [KeySpec; 4] = [
    req("kernel", Kind::Choice(KERNEL_FAMILIES)),
    optional("kernel.s", Kind::Real),
    opt("kernel.cutoff", Kind::Choice(CUTOFFS), "hard"),
    optional("kernel.table", Kind::Text),
];

fn schema(command: Command) -> Vec<KeySpec> {
    let mut keys = KERNEL_KEYS.to_vec();
    let problem = [
        req("domain", Kind::Text),
        req("h", Kind::Real),
        req("delta", Kind::Real),
        opt("mode", Kind::Choice(MODES), "vanishing"),
        req("p", Kind::Real),
    ];
    match command {
        Command::KernelCheck => keys.extend([
            opt("dim", Kind::Count, "1"),
            opt("radii.min", Kind::Real, "1e-6"),
            opt("radii.max", Kind::Real, "1"),
            opt("radii.per_decade", Kind::Count, "200"),
            opt("epsilon", Kind::Real, "1"),
        ]),
        Command::Symbol => keys.extend([
            opt("dim", Kind::Count, "1"),
            req("xi", Kind::RealList),
            optional("delta", Kind::Real),
            opt("mode", Kind::Choice(MODES), "vanishing"),
        ]),
        Command::Solve => {
            keys.extend(problem);
            keys.extend([
                opt("load", Kind::Real, "1"),
                opt("method", Kind::Choice(METHODS), "newton"),
                opt("tol", Kind::Real, "1e-10"),
                opt("max_iter", Kind::Count, "100000"),
            ]);
        }
        Command::Eig => {
            keys.extend(problem);
            keys.extend([
                req("m", Kind::Count),
                opt("tol", Kind::Real, "1e-10"),
                opt("max_iter", Kind::Count, "500"),
            ]);
        }
        Command::Sweep => keys.extend([
            req("domain", Kind::Text),
            req("mode", Kind::Choice(MODES)),
            req("deltas", Kind::RealList),
            req("p", Kind::Real),
            req("m", Kind::Count),
            derived("grid", Kind::Text, default_grid),
            derived("reference_h", Kind::Real, default_reference_h),
            derived("truncation_radius", Kind::Real, default_truncation),
            opt("tol", Kind::Real, "1e-12"),
            opt("certificate_tol", Kind::Real, "1e-5"),
            opt("max_iter", Kind::Count, "500"),
        ]),
    }
    keys.extend([opt("seed", Kind::Count, "0"), opt("out", Kind::Text, DEFAULT_OUT)]);
    keys
}

/// Keys accepted by `command`, in serialization order.
pub fn keys_for(command: Command) -> Vec<&'static str> {
    schema(command).iter().map(|k| k.name).collect()
}

/// A validated configuration with every default resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, Value>,
    /// Keys whose value came from a default rather than the input text.
    pub defaulted: BTreeSet<String>,
}

impl PartialEq for RunConfig {
    fn eq(&self, other: &Self) -> bool {
        self.command == other.command && self.values == other.values
    }
}

impl RunConfig {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Real(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn count(&self, key: &str) -> Option<u64> {
        match self.values.get(key) {
            Some(Value::Count(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        text_of(&self.values, key)
    }

    pub fn reals(&self, key: &str) -> Option<&[f64]> {
        match self.values.get(key) {
            Some(Value::RealList(v)) => Some(v),
            _ => None,
        }
    }

    /// Replaces a value, checking it against the schema; used for command-line overrides.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let spec = schema(self.command)
            .into_iter()
            .find(|k| k.name == key)
            .ok_or_else(|| ConfigError::UnknownKey {
                key: key.into(),
                command: self.command.name().into(),
            })?;
        let v = parse_value(key, spec.kind, raw)?;
        self.values.insert(key.into(), v);
        self.defaulted.remove(key);
        validate(self)
    }

    /// Fully explicit text form; `parse_config` of the result gives back `self`.
    pub fn serialize(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        for key in keys_for(self.command) {
            if let Some(v) = self.values.get(key) {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }
}

/// Parses a config whose text names its command.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_for(text, None)
}

/// Parses a config for `command`; a `command` key in the text must agree with it.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig, CliError> {
    let mut raw: Vec<(String, String, usize)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        // `#` starts a comment anywhere on the line
        let line = line.split_once('#').map_or(line, |(body, _)| body).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Malformed { line: i + 1 })?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !seen.insert(k.clone()) {
            return Err(ConfigError::Duplicate { key: k }.into());
        }
        raw.push((k, v, i + 1));
    }
    let named = raw
        .iter()
        .position(|(k, _, _)| k == "command")
        .map(|i| raw.remove(i).1.parse::<Command>())
        .transpose()?;
    let command = match (named, command) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::Invalid {
                key: "command".into(),
                reason: format!("config is for {a}, invoked as {b}"),
            }
            .into())
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(ConfigError::MissingKey { key: "command".into() }.into()),
    };
    let specs = schema(command);
    let mut values = BTreeMap::new();
    for (k, v, _) in &raw {
        let spec = specs.iter().find(|s| s.name == k).ok_or_else(|| ConfigError::UnknownKey {
            key: k.clone(),
            command: command.name().into(),
        })?;
        values.insert(k.clone(), parse_value(k, spec.kind, v)?);
    }
    for spec in &specs {
        if spec.required && !values.contains_key(spec.name) {
            return Err(ConfigError::MissingKey { key: spec.name.into() }.into());
        }
    }
    let mut defaulted = BTreeSet::new();
    for spec in &specs {
        if values.contains_key(spec.name) {
            continue;
        }
        let text = match spec.default {
            Default::None => None,
            Default::Fixed(t) => Some(t.to_string()),
            Default::Derived(f) => f(&values),
        };
        if let Some(t) = text {
            values.insert(spec.name.into(), parse_value(spec.name, spec.kind, &t)?);
            defaulted.insert(spec.name.to_string());
        }
    }
    let config = RunConfig {
        command,
        values,
        defaulted,
    };
    validate(&config)?;
    Ok(config)
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

fn positive(c: &RunConfig, key: &str) -> Result<(), ConfigError> {
    match c.real(key) {
        Some(v) if v <= 0.0 => Err(invalid(key, format!("must be positive, got {v}"))),
        _ => Ok(()),
    }
}

/// Range checks that need no computation.
fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    let family = c.text("kernel").unwrap_or_default();
    match family {
        "tabulated" => {
            if c.text("kernel.table").is_none() {
                return Err(ConfigError::MissingKey { key: "kernel.table".into() });
            }
            if c.real("kernel.s").is_some() {
                return Err(invalid("kernel.s", "tabulated kernels take no exponent"));
            }
        }
        _ => {
            let s = c.real("kernel.s").ok_or(ConfigError::MissingKey { key: "kernel.s".into() })?;
            if !(s > 0.0 && s < 1.0) {
                return Err(invalid("kernel.s", format!("must lie in (0, 1), got {s}")));
            }
            if c.text("kernel.table").is_some() {
                return Err(invalid("kernel.table", format!("{family} kernels are not tabulated")));
            }
        }
    }
    if let Some(p) = c.real("p") {
        if !(p > 1.0) {
            return Err(invalid("p", format!("must exceed 1, got {p}")));
        }
    }
    for key in ["h", "delta", "tol", "epsilon", "radii.min", "radii.max", "reference_h", "truncation_radius", "certificate_tol"] {
        positive(c, key)?;
    }
    if let (Some(lo), Some(hi)) = (c.real("radii.min"), c.real("radii.max")) {
        if lo >= hi {
            return Err(invalid("radii.max", "must exceed radii.min"));
        }
    }
    for key in ["m", "radii.per_decade", "max_iter", "dim"] {
        if c.count(key) == Some(0) {
            return Err(invalid(key, "must be at least 1"));
        }
    }
    if let Some(d) = c.count("dim") {
        if d > 2 {
            return Err(invalid("dim", format!("dimension {d} is not supported (1 or 2)")));
        }
    }
    if let (Some(p), Some(m)) = (c.real("p"), c.count("m")) {
        if p != 2.0 && m != 1 {
            return Err(invalid("m", "only the first eigenpair is computed when p != 2"));
        }
    }
    if let Some(d) = c.reals("deltas") {
        if d.iter().any(|v| *v <= 0.0) {
            return Err(invalid("deltas", "horizons must be positive"));
        }
    }
    if let Some(d) = c.text("domain") {
        nlpl::calculus::Domain::<f64>::parse(d).map_err(|e| invalid("domain", e.to_string()))?;
    }
    if let Some(g) = c.text("grid") {
        parse_grid(g).map_err(|r| invalid("grid", r))?;
    }
    Ok(())
}

/// `ratio <k>` (h = δ/k) or `fixed <h>`.
pub fn parse_grid(text: &str) -> Result<(bool, f64), String> {
    let mut parts = text.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let v: f64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .filter(|v: &f64| *v > 0.0 && v.is_finite())
        .ok_or_else(|| format!("expected 'ratio <k>' or 'fixed <h>', got {text:?}"))?;
    if parts.next().is_some() {
        return Err(format!("trailing text in grid policy {text:?}"));
    }
    match kind {
        "ratio" => Ok((true, v)),
        "fixed" => Ok((false, v)),
        _ => Err(format!("expected 'ratio <k>' or 'fixed <h>', got {text:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EIG: &str = "command = eig\nkernel = truncated-power\nkernel.s = 0.5\ndomain = interval 0 1\nh = 0.0125\ndelta = 0.1\np = 2\nm = 3\n";

    #[test]
    fn minimal_eig_config_gets_defaults() {
        let c = parse_config(EIG).unwrap();
        assert_eq!(c.command, Command::Eig);
        assert_eq!(c.real("tol"), Some(1e-10));
        assert_eq!(c.text("mode"), Some("vanishing"));
        assert_eq!(c.text("kernel.cutoff"), Some("hard"));
        assert!(c.defaulted.contains("tol") && !c.defaulted.contains("p"));
    }

    #[test]
    fn trailing_comments_are_ignored() {
        let text = EIG.replace("p = 2\n", "p = 2   # exponent\n# whole line\n");
        assert_eq!(parse_config(&text).unwrap(), parse_config(EIG).unwrap());
    }

    #[test]
    fn missing_exponent_is_named() {
        let text = EIG.replace("p = 2\n", "");
        match parse_config(&text) {
            Err(CliError::Config(ConfigError::MissingKey { key })) => assert_eq!(key, "p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horizon_lists_are_unknown_to_solve() {
        let text = EIG.replace("command = eig", "command = solve").replace("m = 3\n", "deltas = 0.1, 0.05\n");
        match parse_config(&text) {
            Err(CliError::Config(ConfigError::UnknownKey { key, .. })) => assert_eq!(key, "deltas"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_and_duplicates() {
        assert!(matches!(
            parse_config(&EIG.replace("p = 2", "p = two")),
            Err(CliError::Config(ConfigError::TypeMismatch { .. }))
        ));
        assert!(matches!(
            parse_config(&format!("{EIG}p = 3\n")),
            Err(CliError::Config(ConfigError::Duplicate { .. }))
        ));
        assert!(matches!(
            parse_config(&EIG.replace("m = 3", "m = -3")),
            Err(CliError::Config(ConfigError::TypeMismatch { .. }))
        ));
    }

    #[test]
    fn serialization_round_trips() {
        let c = parse_config(EIG).unwrap();
        let again = parse_config(&c.serialize()).unwrap();
        assert_eq!(c, again);
        assert!(again.defaulted.is_empty());
    }

    #[test]
    fn sweep_defaults_follow_the_mode() {
        let base = "command = sweep\nkernel = truncated-power\nkernel.s = 0.5\ndomain = interval 0 1\ndeltas = 1, 2\np = 2\nm = 1\n";
        let c = parse_config(&format!("{base}mode = diverging\n")).unwrap();
        assert_eq!(c.text("grid"), Some("fixed 0.0078125"));
        assert_eq!(c.real("truncation_radius"), Some(32.0));
        let c = parse_config(&format!("{base}mode = vanishing\n")).unwrap();
        assert_eq!(c.text("grid"), Some("ratio 8"));
        assert_eq!(c.real("reference_h"), Some(1.0 / 256.0));
    }

    #[test]
    fn command_must_agree_with_the_invocation() {
        assert!(parse_config_for(EIG, Some(Command::Eig)).is_ok());
        assert!(parse_config_for(EIG, Some(Command::Solve)).is_err());
        let bare = EIG.replace("command = eig\n", "");
        assert_eq!(parse_config_for(&bare, Some(Command::Eig)).unwrap().command, Command::Eig);
        assert!(matches!(
            parse_config(&bare),
            Err(CliError::Config(ConfigError::MissingKey { .. }))
        ));
    }
}
