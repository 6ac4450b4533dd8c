//! Scenario files: `[section]` headers and `key = value` lines.
//!
//! Parsing resolves every default, so a parsed config printed with
//! `Display` and parsed again compares equal.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use ism_core::integrators::{Scheme, XUpdate};
use ism_core::interactions::{KernelSpec, RadialProfile, SelfTerm};
use ism_core::Vec3;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_CFL: f64 = 0.8;
pub const DEFAULT_DIRECTORY: &str = "out";
/// Continuum exponent of the rank rule in three dimensions.
pub const RANK_EXPONENT: f64 = 5.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn global(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Deterministic,
    FreeSpace,
    Stochastic,
    Monokinetic1d,
    Polar2d,
    LineChain,
    EquilibriumScan,
}

impl Model {
    const ALL: [Model; 7] = [
        Model::Deterministic,
        Model::FreeSpace,
        Model::Stochastic,
        Model::Monokinetic1d,
        Model::Polar2d,
        Model::LineChain,
        Model::EquilibriumScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Deterministic => "deterministic",
            Model::FreeSpace => "free_space",
            Model::Stochastic => "stochastic",
            Model::Monokinetic1d => "monokinetic_1d",
            Model::Polar2d => "polar_2d",
            Model::LineChain => "line_chain",
            Model::EquilibriumScan => "equilibrium_scan",
        }
    }

    pub fn is_particle(self) -> bool {
        matches!(self, Model::Deterministic | Model::FreeSpace | Model::Stochastic)
    }

    fn sections(self) -> &'static [&'static str] {
        match self {
            Model::Deterministic | Model::FreeSpace | Model::Stochastic => {
                &["params", "kernel", "integration", "init", "analysis", "output"]
            }
            Model::Monokinetic1d | Model::LineChain => &["params", "kernel", "integration", "init", "output"],
            Model::Polar2d => &["params", "kernel", "init", "output"],
            Model::EquilibriumScan => &["scan", "output"],
        }
    }

    fn required_sections(self) -> &'static [&'static str] {
        match self {
            Model::EquilibriumScan => &[],
            Model::Polar2d => &["kernel", "init"],
            _ => &["params", "kernel", "integration", "init"],
        }
    }

    fn initializers(self) -> &'static [InitName] {
        match self {
            Model::Deterministic | Model::FreeSpace | Model::Stochastic => &[
                InitName::UniformSphere,
                InitName::AlignedPerturbed,
                InitName::TwoGroups,
                InitName::Equilibrium,
            ],
            Model::Monokinetic1d => &[InitName::UniformFieldPerturbed],
            Model::Polar2d => &[InitName::RotatingAnnulus],
            Model::LineChain => &[InitName::CircleChain, InitName::HelixChain],
            Model::EquilibriumScan => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Constant,
    Multiplicative,
    Distance,
    Rank,
}

impl KernelKind {
    const ALL: [KernelKind; 4] = [
        KernelKind::Constant,
        KernelKind::Multiplicative,
        KernelKind::Distance,
        KernelKind::Rank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Constant => "constant",
            KernelKind::Multiplicative => "multiplicative",
            KernelKind::Distance => "distance",
            KernelKind::Rank => "rank",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum InitName {
    UniformSphere,
    AlignedPerturbed,
    TwoGroups,
    Equilibrium,
    CircleChain,
    HelixChain,
    UniformFieldPerturbed,
    RotatingAnnulus,
}

impl InitName {
    const ALL: [InitName; 8] = [
        InitName::UniformSphere,
        InitName::AlignedPerturbed,
        InitName::TwoGroups,
        InitName::Equilibrium,
        InitName::CircleChain,
        InitName::HelixChain,
        InitName::UniformFieldPerturbed,
        InitName::RotatingAnnulus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitName::UniformSphere => "uniform_sphere",
            InitName::AlignedPerturbed => "aligned_perturbed",
            InitName::TwoGroups => "two_groups",
            InitName::Equilibrium => "equilibrium",
            InitName::CircleChain => "circle_chain",
            InitName::HelixChain => "helix_chain",
            InitName::UniformFieldPerturbed => "uniform_field_perturbed",
            InitName::RotatingAnnulus => "rotating_annulus",
        }
    }

    pub fn from_name(name: &str) -> Option<InitName> {
        InitName::ALL.into_iter().find(|n| n.name() == name)
    }

    fn keys(self) -> &'static [InitKey] {
        const BOX: InitKey = InitKey::real("box", 1.0, positive, "positive");
        const AXIS: InitKey = InitKey::vector("axis", [0.0, 0.0, 1.0]);
        const SAMPLES: InitKey = InitKey::count("samples", 128, 8);
        const UNIFORM_SPHERE: &[InitKey] = &[BOX, InitKey::real("spin_std", 0.5, nonnegative, "nonnegative")];
        const ALIGNED: &[InitKey] = &[BOX, AXIS, InitKey::real("delta", 0.0, angle, "in [0, pi]")];
        const TWO_GROUPS: &[InitKey] = &[BOX, AXIS, InitKey::real("angle", PI, angle, "in [0, pi]")];
        const EQUILIBRIUM: &[InitKey] = &[AXIS];
        const CIRCLE: &[InitKey] = &[InitKey::real("radius", 1.0, positive, "positive"), SAMPLES];
        const HELIX: &[InitKey] = &[
            InitKey::real("kappa", 1.0, positive, "positive"),
            InitKey::real("tau", 0.5, finite, "finite"),
            SAMPLES,
        ];
        const FIELD: &[InitKey] = &[
            InitKey::count("cells", 256, 8),
            InitKey::real("length", 2.0 * PI, positive, "positive"),
            InitKey::real("rho", 1.0, positive, "positive"),
            InitKey::count("mode", 1, 1),
            InitKey::real("amplitude", 1e-3, nonnegative, "nonnegative"),
        ];
        const ANNULUS: &[InitKey] = &[
            InitKey::count("cells", 128, 8),
            InitKey::real("length", 4.0, positive, "positive"),
            InitKey::real("r0", 1.0, positive, "positive"),
            InitKey::real("width", 0.5, positive, "positive"),
        ];
        match self {
            InitName::UniformSphere => UNIFORM_SPHERE,
            InitName::AlignedPerturbed => ALIGNED,
            InitName::TwoGroups => TWO_GROUPS,
            InitName::Equilibrium => EQUILIBRIUM,
            InitName::CircleChain => CIRCLE,
            InitName::HelixChain => HELIX,
            InitName::UniformFieldPerturbed => FIELD,
            InitName::RotatingAnnulus => ANNULUS,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Real {
        default: f64,
        check: fn(f64) -> bool,
        range: &'static str,
    },
    Count {
        default: usize,
        min: usize,
    },
    Vector([f64; 3]),
}

#[derive(Debug, Clone, Copy)]
struct InitKey {
    key: &'static str,
    slot: Slot,
}

impl InitKey {
    const fn real(key: &'static str, default: f64, check: fn(f64) -> bool, range: &'static str) -> Self {
        InitKey {
            key,
            slot: Slot::Real { default, check, range },
        }
    }

    const fn count(key: &'static str, default: usize, min: usize) -> Self {
        InitKey {
            key,
            slot: Slot::Count { default, min },
        }
    }

    const fn vector(key: &'static str, default: [f64; 3]) -> Self {
        InitKey {
            key,
            slot: Slot::Vector(default),
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0
}

fn nonnegative(x: f64) -> bool {
    x >= 0.0
}

fn finite(_: f64) -> bool {
    true
}

fn angle(x: f64) -> bool {
    (0.0..=PI).contains(&x)
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn open_unit_interval(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitValue {
    Real(f64),
    Count(usize),
    Vector(Vec3),
}

impl fmt::Display for InitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitValue::Real(x) => write!(f, "{x:?}"),
            InitValue::Count(n) => write!(f, "{n}"),
            InitValue::Vector(v) => write!(f, "{:?}, {:?}, {:?}", v.x, v.y, v.z),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub v: f64,
    pub coupling: f64,
    pub eta: Option<f64>,
    pub nu: Option<f64>,
    pub n_agents: Option<usize>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub value: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub profile: Option<RadialProfile>,
    pub q: Option<f64>,
    pub self_term: Option<SelfTerm>,
}

impl KernelConfig {
    /// Particle communication rule.
    pub fn spec(&self) -> KernelSpec {
        match self.kind {
            KernelKind::Constant => KernelSpec::Constant(self.value.unwrap_or(1.0)),
            KernelKind::Multiplicative => KernelSpec::Multiplicative(self.weights.clone().unwrap_or_default()),
            KernelKind::Distance => KernelSpec::Distance {
                profile: self.profile.clone().expect("distance kernel has a profile"),
                q: self.q.unwrap_or(0.0),
            },
            KernelKind::Rank => KernelSpec::Rank(self.profile.clone().expect("rank kernel has a profile")),
        }
    }

    /// Density exponent of the continuum limit.
    pub fn continuum_q(&self) -> f64 {
        match self.kind {
            KernelKind::Rank => RANK_EXPONENT,
            _ => self.q.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub x_update: Option<XUpdate>,
    pub cfl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitConfig {
    pub name: InitName,
    pub values: BTreeMap<&'static str, InitValue>,
}

impl InitConfig {
    pub fn real(&self, key: &str) -> f64 {
        match self.values.get(key) {
            Some(InitValue::Real(x)) => *x,
            other => panic!("initializer {} has no real `{key}`: {other:?}", self.name.name()),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        match self.values.get(key) {
            Some(InitValue::Count(n)) => *n,
            other => panic!("initializer {} has no count `{key}`: {other:?}", self.name.name()),
        }
    }

    pub fn vector(&self, key: &str) -> Vec3 {
        match self.values.get(key) {
            Some(InitValue::Vector(v)) => *v,
            other => panic!("initializer {} has no vector `{key}`: {other:?}", self.name.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub window: f64,
    pub tol: f64,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            window: ism_core::analysis::DEFAULT_WINDOW,
            tol: ism_core::analysis::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scan {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Output {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: Model,
    pub params: Option<Params>,
    pub kernel: Option<KernelConfig>,
    pub integration: Option<Integration>,
    pub init: Option<InitConfig>,
    pub analysis: Option<Analysis>,
    pub scan: Option<Scan>,
    pub output: Output,
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 7] = ["params", "kernel", "integration", "init", "analysis", "scan", "output"];

fn lex(text: &str, errors: &mut Vec<ConfigError>) -> (Vec<Entry>, Vec<Section>) {
    let mut root = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                errors.push(ConfigError::at(line, format!("malformed section header `{content}`")));
                continue;
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                errors.push(ConfigError::at(
                    line,
                    format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", ")),
                ));
            } else if let Some(first) = sections.iter().find(|s| s.name == name) {
                errors.push(ConfigError::at(
                    line,
                    format!("section [{name}] repeated at lines {} and {line}", first.line),
                ));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError::at(line, format!("expected `key = value` or `[section]`, found `{content}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            errors.push(ConfigError::at(line, format!("invalid key `{key}`")));
            continue;
        }
        if value.is_empty() {
            errors.push(ConfigError::at(line, format!("key `{key}` has no value")));
            continue;
        }
        let target = match sections.last_mut() {
            Some(s) => &mut s.entries,
            None => &mut root,
        };
        if let Some(first) = target.iter().find(|e| e.key == key) {
            errors.push(ConfigError::at(
                line,
                format!("duplicate key `{key}` at lines {} and {line}", first.line),
            ));
            continue;
        }
        target.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    (root, sections)
}

/// Entries of one section, tracking which keys were consumed.
struct Fields {
    section: String,
    line: usize,
    entries: Vec<(Entry, bool)>,
}

impl Fields {
    fn new(section: &Section) -> Self {
        Fields {
            section: section.name.clone(),
            line: section.line,
            entries: section.entries.iter().cloned().map(|e| (e, false)).collect(),
        }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        let slot = self.entries.iter_mut().find(|(e, _)| e.key == key)?;
        slot.1 = true;
        Some(slot.0.clone())
    }

    fn real(&mut self, key: &str, check: fn(f64) -> bool, range: &str, errors: &mut Vec<ConfigError>) -> Option<f64> {
        let e = self.take(key)?;
        let x = parse_real(&e, errors)?;
        if check(x) {
            Some(x)
        } else {
            errors.push(ConfigError::at(e.line, format!("`{key}` = {x} out of range: must be {range}")));
            None
        }
    }

    fn count(&mut self, key: &str, min: usize, errors: &mut Vec<ConfigError>) -> Option<usize> {
        let e = self.take(key)?;
        match e.value.parse::<usize>() {
            Ok(n) if n >= min => Some(n),
            Ok(n) => {
                errors.push(ConfigError::at(e.line, format!("`{key}` = {n} out of range: must be at least {min}")));
                None
            }
            Err(_) => {
                errors.push(ConfigError::at(
                    e.line,
                    format!("`{key}` expects a nonnegative integer, found `{}`", e.value),
                ));
                None
            }
        }
    }

    fn word<T: Copy>(&mut self, key: &str, options: &[(&str, T)], errors: &mut Vec<ConfigError>) -> Option<T> {
        let e = self.take(key)?;
        match options.iter().find(|(name, _)| *name == e.value) {
            Some((_, value)) => Some(*value),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                errors.push(ConfigError::at(
                    e.line,
                    format!("`{key}` = `{}` is not one of {}", e.value, names.join(", ")),
                ));
                None
            }
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries
            .iter()
            .find(|(e, _)| e.key == key)
            .map_or(self.line, |(e, _)| e.line)
    }

    fn finish(self, context: &str, errors: &mut Vec<ConfigError>) {
        for (e, used) in self.entries {
            if !used {
                errors.push(ConfigError::at(
                    e.line,
                    format!("unknown key `{}` in [{}]{context}", e.key, self.section),
                ));
            }
        }
    }
}

fn parse_real(e: &Entry, errors: &mut Vec<ConfigError>) -> Option<f64> {
    match e.value.parse::<f64>() {
        Ok(x) if x.is_finite() => Some(x),
        _ => {
            errors.push(ConfigError::at(
                e.line,
                format!("`{}` expects a finite number, found `{}`", e.key, e.value),
            ));
            None
        }
    }
}

fn parse_list(e: &Entry, errors: &mut Vec<ConfigError>) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    for item in e.value.split(',') {
        match item.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => out.push(x),
            _ => {
                errors.push(ConfigError::at(
                    e.line,
                    format!("`{}` expects comma-separated finite numbers, found `{}`", e.key, item.trim()),
                ));
                return None;
            }
        }
    }
    Some(out)
}

/// Parses and validates a scenario, collecting every error found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let (root, sections) = lex(text, &mut errors);

    let mut model = None;
    for e in &root {
        if e.key != "model" {
            errors.push(ConfigError::at(e.line, format!("unknown key `{}` before the first section", e.key)));
            continue;
        }
        match Model::ALL.into_iter().find(|m| m.name() == e.value) {
            Some(m) => model = Some(m),
            None => {
                let names: Vec<&str> = Model::ALL.iter().map(|m| m.name()).collect();
                errors.push(ConfigError::at(
                    e.line,
                    format!("unknown model `{}`; expected one of {}", e.value, names.join(", ")),
                ));
            }
        }
    }
    let Some(model) = model else {
        if !root.iter().any(|e| e.key == "model") {
            errors.push(ConfigError::global("missing `model = ...` before the first section"));
        }
        return Err(sorted(errors));
    };

    for s in &sections {
        if SECTIONS.contains(&s.name.as_str()) && !model.sections().contains(&s.name.as_str()) {
            errors.push(ConfigError::at(
                s.line,
                format!("section [{}] is not used by model `{}`", s.name, model.name()),
            ));
        }
    }
    for required in model.required_sections() {
        if !sections.iter().any(|s| s.name == *required) {
            errors.push(ConfigError::global(format!(
                "model `{}` needs a [{required}] section",
                model.name()
            )));
        }
    }
    let find = |name: &str| sections.iter().find(|s| s.name == name && model.sections().contains(&name));
    let empty = |name: &str| Section {
        name: name.to_string(),
        line: 0,
        entries: Vec::new(),
    };

    let params = if model.sections().contains(&"params") {
        let s = find("params").map_or_else(|| Fields::new(&empty("params")), Fields::new);
        Some(parse_params(model, s, &mut errors))
    } else {
        None
    };
    let n_agents = params.as_ref().and_then(|p| p.n_agents);
    let kernel = find("kernel").and_then(|s| parse_kernel(model, Fields::new(s), n_agents, &mut errors));
    let integration = find("integration").and_then(|s| parse_integration(model, Fields::new(s), &mut errors));
    let init = find("init").and_then(|s| parse_init(model, Fields::new(s), params.as_ref(), &mut errors));
    let analysis = if model.is_particle() {
        Some(find("analysis").map_or_else(Analysis::default, |s| parse_analysis(Fields::new(s), &mut errors)))
    } else {
        None
    };
    let scan = if model == Model::EquilibriumScan {
        Some(parse_scan(
            find("scan").map_or_else(|| Fields::new(&empty("scan")), Fields::new),
            &mut errors,
        ))
    } else {
        None
    };
    let output = find("output").map_or_else(
        || Output {
            directory: DEFAULT_DIRECTORY.to_string(),
            formats: vec![Format::Csv, Format::Json],
        },
        |s| parse_output(Fields::new(s), &mut errors),
    );

    if let (Some(init), Some(k)) = (&init, &kernel) {
        if init.name == InitName::Equilibrium && !(k.kind == KernelKind::Constant && k.value == Some(1.0)) {
            errors.push(ConfigError::global(
                "equilibrium initial data is drawn for the constant kernel with value 1",
            ));
        }
    }
    if errors.is_empty() {
        Ok(ScenarioConfig {
            model,
            params,
            kernel,
            integration,
            init,
            analysis,
            scan,
            output,
        })
    } else {
        Err(sorted(errors))
    }
}

fn sorted(mut errors: Vec<ConfigError>) -> Vec<ConfigError> {
    errors.sort_by_key(|e| e.line.unwrap_or(0));
    errors
}

fn parse_params(model: Model, mut f: Fields, errors: &mut Vec<ConfigError>) -> Params {
    let v = f.real("v", positive, "positive", errors).unwrap_or(1.0);
    let coupling = f.real("J", nonnegative, "nonnegative", errors).unwrap_or(1.0);
    let mut p = Params {
        v,
        coupling,
        eta: None,
        nu: None,
        n_agents: None,
        lambda: None,
    };
    if model.is_particle() {
        p.eta = Some(f.real("eta", nonnegative, "nonnegative", errors).unwrap_or(0.0));
        p.nu = Some(f.real("nu", nonnegative, "nonnegative", errors).unwrap_or(0.0));
        p.n_agents = f.count("N", 1, errors);
        if p.n_agents.is_none() && !f.entries.iter().any(|(e, _)| e.key == "N") {
            errors.push(ConfigError::at(f.line, "[params] needs the agent count `N`"));
        }
    }
    if model == Model::LineChain {
        p.lambda = Some(f.real("lambda", positive, "positive", errors).unwrap_or(1.0));
    }
    f.finish(&format!(" for model `{}`", model.name()), errors);
    p
}

fn parse_kernel(model: Model, mut f: Fields, n_agents: Option<usize>, errors: &mut Vec<ConfigError>) -> Option<KernelConfig> {
    let allowed: &[KernelKind] = match model {
        Model::Deterministic | Model::Stochastic => &KernelKind::ALL,
        Model::FreeSpace => &[KernelKind::Constant, KernelKind::Multiplicative],
        Model::Monokinetic1d | Model::Polar2d => &[KernelKind::Distance, KernelKind::Rank],
        Model::LineChain => &[KernelKind::Distance],
        Model::EquilibriumScan => &[],
    };
    let options: Vec<(&str, KernelKind)> = KernelKind::ALL.iter().map(|k| (k.name(), *k)).collect();
    let type_line = f.line_of("type");
    let Some(kind) = f.word("type", &options, errors) else {
        if !f.entries.iter().any(|(e, _)| e.key == "type") {
            errors.push(ConfigError::at(f.line, "[kernel] needs `type`"));
        }
        return None;
    };
    if !allowed.contains(&kind) {
        let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
        errors.push(ConfigError::at(
            type_line,
            format!(
                "kernel type `{}` out of range for model `{}`: must be one of {}",
                kind.name(),
                model.name(),
                names.join(", ")
            ),
        ));
        return None;
    }
    let mut k = KernelConfig {
        kind,
        value: None,
        weights: None,
        profile: None,
        q: None,
        self_term: None,
    };
    let particle = model.is_particle();
    if particle {
        let terms = [("include", SelfTerm::Include), ("exclude", SelfTerm::Exclude)];
        k.self_term = Some(f.word("self_term", &terms, errors).unwrap_or_default());
    }
    match kind {
        KernelKind::Constant => {
            k.value = Some(f.real("value", nonnegative, "nonnegative", errors).unwrap_or(1.0));
        }
        KernelKind::Multiplicative => match f.take("weights") {
            Some(e) => {
                if let Some(w) = parse_list(&e, errors) {
                    if let Some(bad) = w.iter().find(|x| !(**x > 0.0)) {
                        errors.push(ConfigError::at(e.line, format!("weight {bad} out of range: weights must be positive")));
                    } else if n_agents.is_some_and(|n| n != w.len()) {
                        errors.push(ConfigError::at(
                            e.line,
                            format!("{} weights given for N = {}", w.len(), n_agents.unwrap_or(0)),
                        ));
                    }
                    k.weights = Some(w);
                }
            }
            None => errors.push(ConfigError::at(f.line, "multiplicative kernel needs `weights`")),
        },
        KernelKind::Distance | KernelKind::Rank => {
            if particle {
                k.profile = parse_profile(&mut f, errors);
            }
            if kind == KernelKind::Distance {
                k.q = Some(f.real("q", unit_interval, "in [0, 1] for distance interaction", errors).unwrap_or(0.0));
            }
        }
    }
    f.finish(&format!(" for a {} kernel in model `{}`", kind.name(), model.name()), errors);
    Some(k)
}

fn parse_profile(f: &mut Fields, errors: &mut Vec<ConfigError>) -> Option<RadialProfile> {
    let line = f.line_of("profile");
    let options = [("indicator", 0), ("smooth_bump", 1), ("table", 2)];
    let which = f.word("profile", &options, errors);
    if which.is_none() && !f.entries.iter().any(|(e, _)| e.key == "profile") {
        errors.push(ConfigError::at(f.line, "distance and rank kernels need `profile`"));
    }
    let profile = match which? {
        0 | 1 => {
            let radius = match f.real("radius", positive, "positive", errors) {
                Some(r) => r,
                None => {
                    if !f.entries.iter().any(|(e, _)| e.key == "radius") {
                        errors.push(ConfigError::at(line, "this profile needs `radius`"));
                    }
                    return None;
                }
            };
            if which == Some(0) {
                RadialProfile::Indicator { radius }
            } else {
                RadialProfile::SmoothBump { radius }
            }
        }
        _ => {
            let Some(e) = f.take("knots") else {
                errors.push(ConfigError::at(line, "table profile needs `knots = r:value, ...`"));
                return None;
            };
            let mut knots = Vec::new();
            for item in e.value.split(',') {
                let pair = item.split_once(':').and_then(|(r, y)| {
                    let r = r.trim().parse::<f64>().ok().filter(|x| x.is_finite())?;
                    let y = y.trim().parse::<f64>().ok().filter(|x| x.is_finite())?;
                    Some((r, y))
                });
                match pair {
                    Some(p) => knots.push(p),
                    None => {
                        errors.push(ConfigError::at(e.line, format!("knot `{}` is not `r:value`", item.trim())));
                        return None;
                    }
                }
            }
            let profile = RadialProfile::Table { knots };
            if let Err(err) = profile.validate() {
                errors.push(ConfigError::at(e.line, err.to_string()));
                return None;
            }
            profile
        }
    };
    Some(profile)
}

fn parse_integration(model: Model, mut f: Fields, errors: &mut Vec<ConfigError>) -> Option<Integration> {
    let dt = f.real("dt", positive, "positive", errors).unwrap_or(DEFAULT_DT);
    let t_end = f.real("t_end", nonnegative, "nonnegative", errors);
    if t_end.is_none() && !f.entries.iter().any(|(e, _)| e.key == "t_end") {
        errors.push(ConfigError::at(f.line, "[integration] needs `t_end`"));
    }
    let stride = f.count("stride", 1, errors).unwrap_or(DEFAULT_STRIDE);
    let mut it = Integration {
        dt,
        t_end: t_end.unwrap_or(0.0),
        stride,
        seed: None,
        scheme: None,
        x_update: None,
        cfl: None,
    };
    let updates = [("chord", XUpdate::Chord), ("arc", XUpdate::Arc)];
    if model.is_particle() {
        match f.take("seed") {
            Some(e) => match e.value.parse::<u64>() {
                Ok(s) => it.seed = Some(s),
                Err(_) => errors.push(ConfigError::at(
                    e.line,
                    format!("`seed` expects an unsigned 64-bit integer, found `{}`", e.value),
                )),
            },
            None if model == Model::Stochastic => {
                errors.push(ConfigError::at(f.line, "stochastic models need an explicit `seed`"));
            }
            None => it.seed = Some(0),
        }
        let schemes = [("strang", Scheme::Strang), ("composition4", Scheme::Composition4)];
        it.scheme = Some(f.word("scheme", &schemes, errors).unwrap_or(Scheme::Strang));
        it.x_update = Some(f.word("x_update", &updates, errors).unwrap_or(XUpdate::Chord));
    }
    match model {
        Model::Monokinetic1d => {
            it.cfl = Some(f.real("cfl", open_unit_interval, "in (0, 1]", errors).unwrap_or(DEFAULT_CFL));
        }
        Model::LineChain => {
            it.x_update = Some(f.word("x_update", &updates, errors).unwrap_or(XUpdate::Chord));
        }
        _ => {}
    }
    f.finish(&format!(" for model `{}`", model.name()), errors);
    t_end.map(|_| it)
}

fn parse_init(model: Model, mut f: Fields, params: Option<&Params>, errors: &mut Vec<ConfigError>) -> Option<InitConfig> {
    let Some(e) = f.take("name") else {
        errors.push(ConfigError::at(f.line, "[init] needs `name`"));
        return None;
    };
    let allowed = model.initializers();
    let Some(name) = InitName::from_name(&e.value).filter(|n| allowed.contains(n)) else {
        let names: Vec<&str> = allowed.iter().map(|n| n.name()).collect();
        errors.push(ConfigError::at(
            e.line,
            format!(
                "initializer `{}` is not available for model `{}`; expected one of {}",
                e.value,
                model.name(),
                names.join(", ")
            ),
        ));
        return None;
    };
    if name == InitName::Equilibrium {
        let (eta, nu) = params.map_or((None, None), |p| (p.eta, p.nu));
        if !(eta.unwrap_or(0.0) > 0.0 && nu.unwrap_or(0.0) > 0.0) {
            errors.push(ConfigError::at(
                e.line,
                "equilibrium initial data needs eta > 0 and nu > 0 in [params] to fix the temperature",
            ));
        }
    }
    let mut values = BTreeMap::new();
    for k in name.keys() {
        let value = match k.slot {
            Slot::Real { default, check, range } => InitValue::Real(f.real(k.key, check, range, errors).unwrap_or(default)),
            Slot::Count { default, min } => InitValue::Count(f.count(k.key, min, errors).unwrap_or(default)),
            Slot::Vector(d) => {
                let mut v = Vec3::new(d[0], d[1], d[2]);
                if let Some(e) = f.take(k.key) {
                    match parse_list(&e, errors) {
                        Some(xs) if xs.len() == 3 => {
                            v = Vec3::new(xs[0], xs[1], xs[2]);
                            if v.norm() == 0.0 {
                                errors.push(ConfigError::at(e.line, format!("`{}` must be a nonzero vector", k.key)));
                            }
                        }
                        Some(xs) => errors.push(ConfigError::at(
                            e.line,
                            format!("`{}` expects three components, found {}", k.key, xs.len()),
                        )),
                        None => {}
                    }
                }
                InitValue::Vector(v)
            }
        };
        values.insert(k.key, value);
    }
    let init = InitConfig { name, values };
    if name == InitName::UniformFieldPerturbed && 2 * init.count("mode") >= init.count("cells") {
        errors.push(ConfigError::at(f.line_of("mode"), "`mode` out of range: must be below cells/2"));
    }
    if name == InitName::RotatingAnnulus && init.real("width") >= init.real("r0") {
        errors.push(ConfigError::at(
            f.line_of("width"),
            "`width` out of range: the annulus must stay away from the origin (width < r0)",
        ));
    }
    f.finish(&format!(" for initializer `{}`", name.name()), errors);
    Some(init)
}

fn parse_analysis(mut f: Fields, errors: &mut Vec<ConfigError>) -> Analysis {
    let d = Analysis::default();
    let a = Analysis {
        window: f.real("window", open_unit_interval, "in (0, 1]", errors).unwrap_or(d.window),
        tol: f.real("tol", positive, "positive", errors).unwrap_or(d.tol),
    };
    f.finish("", errors);
    a
}

fn parse_scan(mut f: Fields, errors: &mut Vec<ConfigError>) -> Scan {
    let s = Scan {
        min: f.real("min", nonnegative, "nonnegative", errors).unwrap_or(0.5),
        max: f.real("max", positive, "positive", errors).unwrap_or(10.0),
        steps: f.count("steps", 2, errors).unwrap_or(96),
    };
    if s.max <= s.min {
        errors.push(ConfigError::at(f.line_of("max"), "`max` out of range: must exceed `min`"));
    }
    f.finish("", errors);
    s
}

fn parse_output(mut f: Fields, errors: &mut Vec<ConfigError>) -> Output {
    let directory = f.take("directory").map_or_else(|| DEFAULT_DIRECTORY.to_string(), |e| e.value);
    let mut formats = vec![Format::Csv, Format::Json];
    if let Some(e) = f.take("formats") {
        formats.clear();
        for item in e.value.split(',').map(str::trim) {
            match item {
                "csv" => formats.push(Format::Csv),
                "json" => formats.push(Format::Json),
                other => errors.push(ConfigError::at(
                    e.line,
                    format!("unknown output format `{other}`; expected csv, json"),
                )),
            }
        }
        formats.sort();
        formats.dedup();
    }
    f.finish("", errors);
    Output { directory, formats }
}

fn profile_lines(p: &RadialProfile) -> String {
    match p {
        RadialProfile::Indicator { radius } => format!("profile = indicator\nradius = {radius:?}\n"),
        RadialProfile::SmoothBump { radius } => format!("profile = smooth_bump\nradius = {radius:?}\n"),
        RadialProfile::Table { knots } => {
            let items: Vec<String> = knots.iter().map(|(r, y)| format!("{r:?}:{y:?}")).collect();
            format!("profile = table\nknots = {}\n", items.join(", "))
        }
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model = {}", self.model.name())?;
        if let Some(p) = &self.params {
            writeln!(f, "\n[params]\nv = {:?}\nJ = {:?}", p.v, p.coupling)?;
            if let Some(x) = p.eta {
                writeln!(f, "eta = {x:?}")?;
            }
            if let Some(x) = p.nu {
                writeln!(f, "nu = {x:?}")?;
            }
            if let Some(n) = p.n_agents {
                writeln!(f, "N = {n}")?;
            }
            if let Some(x) = p.lambda {
                writeln!(f, "lambda = {x:?}")?;
            }
        }
        if let Some(k) = &self.kernel {
            writeln!(f, "\n[kernel]\ntype = {}", k.kind.name())?;
            if let Some(x) = k.value {
                writeln!(f, "value = {x:?}")?;
            }
            if let Some(w) = &k.weights {
                let items: Vec<String> = w.iter().map(|x| format!("{x:?}")).collect();
                writeln!(f, "weights = {}", items.join(", "))?;
            }
            if let Some(p) = &k.profile {
                f.write_str(&profile_lines(p))?;
            }
            if let Some(q) = k.q {
                writeln!(f, "q = {q:?}")?;
            }
            if let Some(s) = k.self_term {
                writeln!(f, "self_term = {}", if s == SelfTerm::Include { "include" } else { "exclude" })?;
            }
        }
        if let Some(it) = &self.integration {
            writeln!(f, "\n[integration]\ndt = {:?}\nt_end = {:?}\nstride = {}", it.dt, it.t_end, it.stride)?;
            if let Some(s) = it.seed {
                writeln!(f, "seed = {s}")?;
            }
            if let Some(s) = it.scheme {
                writeln!(f, "scheme = {}", if s == Scheme::Strang { "strang" } else { "composition4" })?;
            }
            if let Some(x) = it.x_update {
                writeln!(f, "x_update = {}", if x == XUpdate::Chord { "chord" } else { "arc" })?;
            }
            if let Some(c) = it.cfl {
                writeln!(f, "cfl = {c:?}")?;
            }
        }
        if let Some(init) = &self.init {
            writeln!(f, "\n[init]\nname = {}", init.name.name())?;
            for (k, v) in &init.values {
                writeln!(f, "{k} = {v}")?;
            }
        }
        if let Some(a) = &self.analysis {
            writeln!(f, "\n[analysis]\nwindow = {:?}\ntol = {:?}", a.window, a.tol)?;
        }
        if let Some(s) = &self.scan {
            writeln!(f, "\n[scan]\nmin = {:?}\nmax = {:?}\nsteps = {}", s.min, s.max, s.steps)?;
        }
        let formats: Vec<&str> = self.output.formats.iter().map(|x| x.name()).collect();
        writeln!(
            f,
            "\n[output]\ndirectory = {}\nformats = {}",
            self.output.directory,
            formats.join(", ")
        )
    }
}
