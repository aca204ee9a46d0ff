//! Strict TOML run configuration.

use crate::evolve::{Nonlinearity, Scheme};
use crate::illposed::THETA_RANGE;
use crate::normal_form::probe::{LemmaId, DEFAULT_GAPS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Picard,
    NormalformRoundtrip,
    Probe,
    Illposed,
    Subsonic,
    Scatter,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Simulate,
        Experiment::Picard,
        Experiment::NormalformRoundtrip,
        Experiment::Probe,
        Experiment::Illposed,
        Experiment::Subsonic,
        Experiment::Scatter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Picard => "picard",
            Experiment::NormalformRoundtrip => "normalform-roundtrip",
            Experiment::Probe => "probe",
            Experiment::Illposed => "illposed",
            Experiment::Subsonic => "subsonic",
            Experiment::Scatter => "scatter",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCfg {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    Zero,
    Gaussian,
    Random,
}

/// Initial data. `size`, when set, rescales `(u, N)` so that
/// `‖u‖_{H^{1/2}} + ‖N‖_{L²}` equals it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataCfg {
    pub kind: DataKind,
    pub amplitude: f64,
    pub wave_amplitude: f64,
    pub width: f64,
    pub size: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorCfg {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardCfg {
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "M")]
    pub nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Also run the analytic-mode splitting and report the distance.
    pub compare: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeBackendKind {
    Grid,
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeCfg {
    #[serde(rename = "lemma")]
    pub lemmas: Vec<LemmaId>,
    pub s: f64,
    pub l: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "K_list")]
    pub gaps: Vec<u32>,
    pub backend: ProbeBackendKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IllposedCfg {
    pub theta: f64,
    #[serde(rename = "J")]
    pub start: u32,
    #[serde(rename = "K")]
    pub gap: u32,
    pub n_max: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsonicCfg {
    pub alphas: Vec<f64>,
    pub t_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterCfg {
    pub t_min: f64,
    pub s: f64,
    pub l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsCfg {
    pub s_list: Vec<f64>,
    pub l_list: Vec<f64>,
    pub strichartz_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundtripCfg {
    pub samples: usize,
    pub size: f64,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IoCfg {
    /// `None`: `ZAK_OUTDIR`, else `out`.
    pub outdir: Option<String>,
    /// Steps between binary checkpoints; 0 disables them.
    pub checkpoint_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub gap: u32,
    pub mode: Nonlinearity,
    pub grid: GridCfg,
    pub data: DataCfg,
    pub integrator: IntegratorCfg,
    pub picard: PicardCfg,
    pub probe: ProbeCfg,
    pub illposed: IllposedCfg,
    pub subsonic: SubsonicCfg,
    pub scatter: ScatterCfg,
    pub diagnostics: DiagnosticsCfg,
    pub roundtrip: RoundtripCfg,
    pub io: IoCfg,
}

impl RunConfig {
    /// Defaults for `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self::common(experiment);
        if experiment == Experiment::Scatter {
            c.grid.n = 128;
            c.grid.length = 16.0 * std::f64::consts::PI;
            c.data.amplitude = 0.3;
            c.data.width = 2.0;
            c.integrator.dt = 0.01;
            c.integrator.t_end = 5.0;
            c.integrator.stride = 25;
        }
        c
    }

    fn common(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 1,
            alpha: 1.0,
            gap: 5,
            mode: Nonlinearity::Physical,
            grid: GridCfg {
                d: 2,
                n: 32,
                length: 2.0 * std::f64::consts::PI,
            },
            data: DataCfg {
                kind: DataKind::Gaussian,
                amplitude: 0.1,
                wave_amplitude: 0.0,
                width: 1.0,
                size: None,
            },
            integrator: IntegratorCfg {
                scheme: Scheme::StrangSplit,
                dt: 1e-3,
                t_end: 1.0,
                stride: 10,
            },
            picard: PicardCfg {
                t_end: 0.5,
                nodes: 64,
                tol: 1e-12,
                max_iter: 60,
                compare: false,
            },
            probe: ProbeCfg {
                lemmas: vec![LemmaId::Boundary3],
                s: 0.5,
                l: 0.0,
                samples: 50,
                seed: 20240601,
                gaps: DEFAULT_GAPS.to_vec(),
                backend: ProbeBackendKind::Radial,
            },
            illposed: IllposedCfg {
                theta: 0.6,
                start: 4,
                gap: 5,
                n_max: 40,
            },
            subsonic: SubsonicCfg {
                alphas: vec![2.0, 4.0, 8.0, 16.0],
                t_star: 0.5,
            },
            scatter: ScatterCfg {
                t_min: 1.0,
                s: 0.5,
                l: 0.0,
            },
            diagnostics: DiagnosticsCfg {
                s_list: vec![0.5, 1.0],
                l_list: vec![0.0],
                strichartz_s: 0.5,
            },
            roundtrip: RoundtripCfg {
                samples: 20,
                size: 0.1,
                tol: 1e-12,
                max_iter: 60,
            },
            io: IoCfg {
                outdir: None,
                checkpoint_every: 0,
            },
        }
    }

    /// Hex sha256 of the normalized config with `io.outdir` blanked.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.io.outdir = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Output directory: config, then `ZAK_OUTDIR`, then `out`.
    pub fn outdir(&self) -> String {
        self.io
            .outdir
            .clone()
            .or_else(|| std::env::var("ZAK_OUTDIR").ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| "out".into())
    }
}

/// Every violation found in a config, in reading order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration invalid:")?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Walks one table, recording used keys and type errors.
struct Reader<'a> {
    prefix: String,
    table: Option<&'a Table>,
    used: BTreeSet<String>,
}

impl<'a> Reader<'a> {
    fn new(prefix: &str, table: Option<&'a Table>) -> Self {
        Self {
            prefix: prefix.into(),
            table,
            used: BTreeSet::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.into()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.into());
        self.table.and_then(|t| t.get(key))
    }

    fn f64(&mut self, key: &str, default: f64, errs: &mut Vec<String>) -> f64 {
        match self.raw(key) {
            None => default,
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(v) => {
                errs.push(format!("{}: expected a number, got {}", self.path(key), v.type_str()));
                default
            }
        }
    }

    fn opt_f64(&mut self, key: &str, errs: &mut Vec<String>) -> Option<f64> {
        self.raw(key)?;
        Some(self.f64(key, f64::NAN, errs))
    }

    fn int(&mut self, key: &str, default: i64, errs: &mut Vec<String>) -> i64 {
        match self.raw(key) {
            None => default,
            Some(Value::Integer(i)) => *i,
            Some(v) => {
                errs.push(format!("{}: expected an integer, got {}", self.path(key), v.type_str()));
                default
            }
        }
    }

    fn unsigned<T: TryFrom<i64> + TryInto<i64> + Copy>(&mut self, key: &str, default: T, errs: &mut Vec<String>) -> T {
        let v = self.int(key, default.try_into().unwrap_or(i64::MAX), errs);
        T::try_from(v).unwrap_or_else(|_| {
            errs.push(format!("{}: {v} is out of range for a non-negative integer", self.path(key)));
            default
        })
    }

    fn boolean(&mut self, key: &str, default: bool, errs: &mut Vec<String>) -> bool {
        match self.raw(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(v) => {
                errs.push(format!("{}: expected true or false, got {}", self.path(key), v.type_str()));
                default
            }
        }
    }

    fn string(&mut self, key: &str, errs: &mut Vec<String>) -> Option<String> {
        match self.raw(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                errs.push(format!("{}: expected a string, got {}", self.path(key), v.type_str()));
                None
            }
        }
    }

    fn parsed<T>(&mut self, key: &str, default: T, errs: &mut Vec<String>, parse: impl Fn(&str) -> Result<T, String>) -> T {
        match self.string(key, errs) {
            None => default,
            Some(s) => parse(&s).unwrap_or_else(|e| {
                errs.push(format!("{}: {e}", self.path(key)));
                default
            }),
        }
    }

    fn f64_list(&mut self, key: &str, default: Vec<f64>, errs: &mut Vec<String>) -> Vec<f64> {
        match self.raw(key) {
            None => default,
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for v in a {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(i) => out.push(*i as f64),
                        other => {
                            errs.push(format!("{}: list entries must be numbers, got {}", self.path(key), other.type_str()));
                            return default;
                        }
                    }
                }
                out
            }
            Some(v) => {
                errs.push(format!("{}: expected a list of numbers, got {}", self.path(key), v.type_str()));
                default
            }
        }
    }

    fn strings(&mut self, key: &str, errs: &mut Vec<String>) -> Option<Vec<String>> {
        match self.raw(key) {
            None => None,
            Some(Value::String(s)) => Some(vec![s.clone()]),
            Some(Value::Array(a)) if a.iter().all(|v| v.is_str()) => {
                Some(a.iter().map(|v| v.as_str().unwrap_or_default().to_string()).collect())
            }
            Some(v) => {
                errs.push(format!("{}: expected a string or list of strings, got {}", self.path(key), v.type_str()));
                None
            }
        }
    }

    fn sub(&mut self, key: &str, errs: &mut Vec<String>) -> Reader<'a> {
        let p = self.path(key);
        match self.raw(key) {
            None => Reader::new(&p, None),
            Some(Value::Table(t)) => Reader::new(&p, Some(t)),
            Some(v) => {
                errs.push(format!("{p}: expected a table, got {}", v.type_str()));
                Reader::new(&p, None)
            }
        }
    }

    fn finish(self, errs: &mut Vec<String>) {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.used.contains(k) {
                    errs.push(format!("{}: unknown key", self.path(k)));
                }
            }
        }
    }
}

/// Sets a dotted key, creating tables on the way.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override {assignment:?} is not of the form key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(format!("override {assignment:?} has an empty key"));
    }
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(format!("override {key}: {p} is not a table")),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses, applies overrides, fills defaults and validates.
pub fn parse_config(text: &str, overrides: &[String], forced: Option<Experiment>) -> Result<RunConfig, ConfigErrors> {
    let mut table: Table = text
        .parse::<Table>()
        .map_err(|e| ConfigErrors(vec![format!("not valid TOML: {e}")]))?;
    let mut errs = Vec::new();
    for o in overrides {
        if let Err(e) = apply_override(&mut table, o) {
            errs.push(e);
        }
    }
    if let Some(e) = forced {
        table.insert("experiment".into(), Value::String(e.name().into()));
    }
    let cfg = read(&table, &mut errs);
    if let Some(c) = &cfg {
        validate(c, &mut errs);
    }
    match cfg {
        Some(c) if errs.is_empty() => Ok(c),
        _ => Err(ConfigErrors(errs)),
    }
}

fn read(table: &Table, errs: &mut Vec<String>) -> Option<RunConfig> {
    let mut top = Reader::new("", Some(table));
    let experiment = match top.string("experiment", errs) {
        None => {
            errs.push("experiment: missing (one of simulate, picard, normalform-roundtrip, probe, illposed, subsonic, scatter)".into());
            None
        }
        Some(s) => match s.parse::<Experiment>() {
            Ok(e) => Some(e),
            Err(e) => {
                errs.push(format!("experiment: {e}"));
                None
            }
        },
    };
    let mut c = RunConfig::defaults(experiment.unwrap_or(Experiment::Simulate));
    c.seed = top.unsigned("seed", c.seed, errs);
    c.alpha = top.f64("alpha", c.alpha, errs);
    c.gap = top.unsigned("K", c.gap, errs);
    c.mode = top.parsed("mode", c.mode, errs, |s| match s {
        "physical" => Ok(Nonlinearity::Physical),
        "analytic" => Ok(Nonlinearity::Analytic),
        o => Err(format!("unknown nonlinearity mode {o:?}; expected physical or analytic")),
    });

    let mut g = top.sub("grid", errs);
    c.grid.d = g.unsigned("d", c.grid.d, errs);
    c.grid.n = g.unsigned("n", c.grid.n, errs);
    c.grid.length = g.f64("L", c.grid.length, errs);
    g.finish(errs);

    let mut d = top.sub("data", errs);
    c.data.kind = d.parsed("kind", c.data.kind, errs, |s| match s {
        "zero" => Ok(DataKind::Zero),
        "gaussian" => Ok(DataKind::Gaussian),
        "random" => Ok(DataKind::Random),
        o => Err(format!("unknown data kind {o:?}; expected zero, gaussian or random")),
    });
    c.data.amplitude = d.f64("amplitude", c.data.amplitude, errs);
    c.data.wave_amplitude = d.f64("wave_amplitude", c.data.wave_amplitude, errs);
    c.data.width = d.f64("width", c.data.width, errs);
    c.data.size = d.opt_f64("size", errs);
    d.finish(errs);

    let mut i = top.sub("integrator", errs);
    c.integrator.scheme = i.parsed("scheme", c.integrator.scheme, errs, |s| match s {
        "strang-split" => Ok(Scheme::StrangSplit),
        "lawson-rk2" => Ok(Scheme::LawsonRk2),
        o => Err(format!("unknown scheme {o:?}; expected strang-split or lawson-rk2")),
    });
    c.integrator.dt = i.f64("dt", c.integrator.dt, errs);
    c.integrator.t_end = i.f64("t_end", c.integrator.t_end, errs);
    c.integrator.stride = i.unsigned("stride", c.integrator.stride, errs);
    i.finish(errs);

    let mut p = top.sub("picard", errs);
    c.picard.t_end = p.f64("T", c.picard.t_end, errs);
    c.picard.nodes = p.unsigned("M", c.picard.nodes, errs);
    c.picard.tol = p.f64("tol", c.picard.tol, errs);
    c.picard.max_iter = p.unsigned("max_iter", c.picard.max_iter, errs);
    c.picard.compare = p.boolean("compare", c.picard.compare, errs);
    p.finish(errs);

    let mut pr = top.sub("probe", errs);
    if let Some(names) = pr.strings("lemma", errs) {
        let mut ids = Vec::new();
        for n in names {
            match n.parse::<LemmaId>() {
                Ok(id) => ids.push(id),
                Err(_) => {
                    let all: Vec<&str> = LemmaId::ALL.iter().map(|l| l.name()).collect();
                    errs.push(format!("probe.lemma: unknown id {n:?}; expected one of {}", all.join(", ")));
                }
            }
        }
        c.probe.lemmas = ids;
    }
    c.probe.s = pr.f64("s", c.probe.s, errs);
    c.probe.l = pr.f64("l", c.probe.l, errs);
    c.probe.samples = pr.unsigned("samples", c.probe.samples, errs);
    c.probe.seed = pr.unsigned("seed", c.probe.seed, errs);
    let gaps = pr.f64_list("K_list", c.probe.gaps.iter().map(|k| *k as f64).collect(), errs);
    c.probe.gaps = gaps
        .iter()
        .filter_map(|&k| {
            if k.fract() == 0.0 && k >= 0.0 && k < u32::MAX as f64 {
                Some(k as u32)
            } else {
                errs.push(format!("probe.K_list: {k} is not a non-negative integer"));
                None
            }
        })
        .collect();
    c.probe.backend = pr.parsed("backend", c.probe.backend, errs, |s| match s {
        "grid" => Ok(ProbeBackendKind::Grid),
        "radial" => Ok(ProbeBackendKind::Radial),
        o => Err(format!("unknown probe backend {o:?}; expected grid or radial")),
    });
    pr.finish(errs);

    let mut il = top.sub("illposed", errs);
    c.illposed.theta = il.f64("theta", c.illposed.theta, errs);
    c.illposed.start = il.unsigned("J", c.illposed.start, errs);
    c.illposed.gap = il.unsigned("K", c.illposed.gap, errs);
    c.illposed.n_max = il.unsigned("n_max", c.illposed.n_max, errs);
    il.finish(errs);

    let mut su = top.sub("subsonic", errs);
    c.subsonic.alphas = su.f64_list("alphas", c.subsonic.alphas.clone(), errs);
    c.subsonic.t_star = su.f64("t_star", c.subsonic.t_star, errs);
    su.finish(errs);

    let mut sc = top.sub("scatter", errs);
    c.scatter.t_min = sc.f64("t_min", c.scatter.t_min, errs);
    c.scatter.s = sc.f64("s", c.scatter.s, errs);
    c.scatter.l = sc.f64("l", c.scatter.l, errs);
    sc.finish(errs);

    let mut di = top.sub("diagnostics", errs);
    c.diagnostics.s_list = di.f64_list("s_list", c.diagnostics.s_list.clone(), errs);
    c.diagnostics.l_list = di.f64_list("l_list", c.diagnostics.l_list.clone(), errs);
    c.diagnostics.strichartz_s = di.f64("strichartz_s", c.diagnostics.strichartz_s, errs);
    di.finish(errs);

    let mut rt = top.sub("roundtrip", errs);
    c.roundtrip.samples = rt.unsigned("samples", c.roundtrip.samples, errs);
    c.roundtrip.size = rt.f64("size", c.roundtrip.size, errs);
    c.roundtrip.tol = rt.f64("tol", c.roundtrip.tol, errs);
    c.roundtrip.max_iter = rt.unsigned("max_iter", c.roundtrip.max_iter, errs);
    rt.finish(errs);

    let mut io = top.sub("io", errs);
    c.io.outdir = io.string("outdir", errs);
    c.io.checkpoint_every = io.unsigned("checkpoint_every", c.io.checkpoint_every, errs);
    io.finish(errs);

    top.finish(errs);
    experiment.map(|_| c)
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn whole_steps(span: f64, dt: f64) -> bool {
    let k = (span / dt).round();
    k >= 1.0 && (k * dt - span).abs() <= 1e-9 * span.abs().max(1.0)
}

fn validate(c: &RunConfig, errs: &mut Vec<String>) {
    let mut e = |s: String| errs.push(s);
    if !(1..=4).contains(&c.grid.d) {
        e(format!("grid.d={}: grid-spectral requires dimension in 1..=4", c.grid.d));
    }
    if c.grid.n < 8 || !c.grid.n.is_power_of_two() {
        e(format!("grid.n={}: grid-spectral requires a power of two, at least 8", c.grid.n));
    }
    if !positive(c.grid.length) {
        e(format!("grid.L={}: side length must be positive and finite", c.grid.length));
    }
    if !positive(c.alpha) {
        e(format!("alpha={}: ion sound speed must be positive and finite", c.alpha));
    }
    if c.gap < 5 {
        e(format!("K={}: littlewood-paley requires frequency gap K >= 5", c.gap));
    }
    if !(c.data.amplitude.is_finite() && c.data.wave_amplitude.is_finite()) {
        e("data.amplitude and data.wave_amplitude must be finite".into());
    }
    if !positive(c.data.width) {
        e(format!("data.width={}: must be positive", c.data.width));
    }
    if let Some(s) = c.data.size {
        if !(s.is_finite() && s >= 0.0) {
            e(format!("data.size={s}: must be a non-negative number"));
        }
    }
    let it = &c.integrator;
    if !positive(it.dt) {
        e(format!("integrator.dt={}: zakharov-evolve requires dt > 0", it.dt));
    }
    if !positive(it.t_end) {
        e(format!("integrator.t_end={}: simulate requires t_end > 0", it.t_end));
    } else if positive(it.dt) && !whole_steps(it.t_end, it.dt) {
        e(format!("integrator.t_end={} is not a whole number of steps dt={}", it.t_end, it.dt));
    }
    if it.stride == 0 {
        e("integrator.stride must be at least 1".into());
    }
    if c.io.checkpoint_every > 0 && it.stride > 0 && c.io.checkpoint_every % it.stride != 0 {
        e(format!(
            "io.checkpoint_every={} must be a multiple of integrator.stride={}",
            c.io.checkpoint_every, it.stride
        ));
    }
    if c.diagnostics.s_list.iter().chain(&c.diagnostics.l_list).any(|x| !x.is_finite())
        || !c.diagnostics.strichartz_s.is_finite()
    {
        e("diagnostics: regularity indices must be finite".into());
    }
    let pc = &c.picard;
    if !positive(pc.t_end) {
        e(format!("picard.T={}: must be positive", pc.t_end));
    }
    if pc.nodes == 0 {
        e("picard.M must be at least 1".into());
    }
    if !positive(pc.tol) {
        e(format!("picard.tol={}: must be positive", pc.tol));
    }
    if pc.max_iter == 0 {
        e("picard.max_iter must be at least 1".into());
    }
    if c.experiment == Experiment::Picard && !(c.grid.d <= 2 || c.grid.n <= 16) {
        e(format!(
            "picard with grid.d={} needs grid.n <= 16 (zakharov-evolve memory rule: d <= 2, or d in {{3,4}} with n <= 16)",
            c.grid.d
        ));
    }
    let pr = &c.probe;
    if pr.lemmas.is_empty() {
        e("probe.lemma: at least one lemma id is required".into());
    }
    if !(pr.s.is_finite() && pr.l.is_finite()) {
        e("probe.s and probe.l must be finite".into());
    }
    if pr.samples == 0 {
        e("probe.samples must be at least 1".into());
    }
    if pr.gaps.is_empty() {
        e("probe.K_list must not be empty".into());
    }
    if let Some(k) = pr.gaps.iter().find(|k| **k < 5) {
        e(format!("probe.K_list entry {k}: littlewood-paley requires K >= 5"));
    }
    if pr.gaps.windows(2).any(|w| w[1] <= w[0]) {
        e("probe.K_list must be strictly increasing".into());
    }
    if pr.backend == ProbeBackendKind::Radial {
        for l in pr.lemmas.iter().filter(|l| !LemmaId::BOUNDARY.contains(l)) {
            e(format!("probe.lemma={l}: the radial backend carries boundary-1..4 only; use backend = \"grid\""));
        }
    }
    let il = &c.illposed;
    if !(il.theta > THETA_RANGE.0 && il.theta < THETA_RANGE.1) {
        e(format!(
            "illposed.theta={}: illposed-lab requires theta in the open interval (1/2, 3/4)",
            il.theta
        ));
    }
    if positive(c.alpha) {
        let need = c.alpha.log2().ceil() as i64 + 2;
        if (il.start as i64) < need {
            e(format!("illposed.J={}: illposed-lab requires J >= ceil(log2 alpha) + 2 = {need}", il.start));
        }
    }
    if il.gap == 0 {
        e("illposed.K must be at least 1".into());
    }
    if il.n_max > 200 || il.n_max <= il.start + il.gap {
        e(format!(
            "illposed.n_max={}: must exceed J + K = {} and be at most 200",
            il.n_max,
            il.start + il.gap
        ));
    }
    let su = &c.subsonic;
    if su.alphas.is_empty() || su.alphas.iter().any(|a| !positive(*a)) {
        e("subsonic.alphas must be a non-empty list of positive numbers".into());
    }
    if !positive(su.t_star) {
        e(format!("subsonic.t_star={}: must be positive", su.t_star));
    } else if c.experiment == Experiment::Subsonic && positive(it.dt) && !whole_steps(su.t_star, it.dt) {
        e(format!("subsonic.t_star={} is not a whole number of steps dt={}", su.t_star, it.dt));
    }
    let sc = &c.scatter;
    let late = c.experiment == Experiment::Scatter && positive(it.t_end) && sc.t_min >= it.t_end;
    if !(sc.t_min.is_finite() && sc.t_min >= 0.0) || late {
        e(format!(
            "scatter.t_min={}: must lie in [0, integrator.t_end={})",
            sc.t_min, it.t_end
        ));
    }
    if !(sc.s.is_finite() && sc.l.is_finite()) {
        e("scatter.s and scatter.l must be finite".into());
    }
    let rt = &c.roundtrip;
    if rt.samples == 0 {
        e("roundtrip.samples must be at least 1".into());
    }
    if !(rt.size.is_finite() && rt.size >= 0.0) {
        e(format!("roundtrip.size={}: must be non-negative", rt.size));
    }
    if !positive(rt.tol) || rt.max_iter == 0 {
        e("roundtrip.tol must be positive and roundtrip.max_iter at least 1".into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("experiment = \"simulate\"", &[], None).unwrap();
        assert_eq!(c.gap, 5);
        assert_eq!(c.alpha, 1.0);
        assert_eq!(c, RunConfig::defaults(Experiment::Simulate));
    }

    #[test]
    fn all_violations_are_collected() {
        let text = "experiment = \"illposed\"\nbogus = 1\n[grid]\nd = 5\nn = 12\n[illposed]\ntheta = 0.8\n";
        let e = parse_config(text, &[], None).unwrap_err();
        let all = e.0.join("\n");
        assert!(all.contains("bogus: unknown key"), "{all}");
        assert!(all.contains("dimension in 1..=4"), "{all}");
        assert!(all.contains("power of two"), "{all}");
        assert!(all.contains("(1/2, 3/4)"), "{all}");
    }

    #[test]
    fn overrides_win_and_type_check() {
        let c = parse_config(
            "experiment = \"simulate\"\n[grid]\nn = 16\n",
            &["grid.n=64".into(), "mode=analytic".into(), "io.outdir=/tmp/x".into()],
            None,
        )
        .unwrap();
        assert_eq!(c.grid.n, 64);
        assert_eq!(c.mode, Nonlinearity::Analytic);
        assert_eq!(c.io.outdir.as_deref(), Some("/tmp/x"));
        let e = parse_config("experiment = \"simulate\"", &["grid.n=\"big\"".into()], None).unwrap_err();
        assert!(e.0[0].contains("grid.n: expected an integer"));
        let c = parse_config("experiment = \"simulate\"", &[], Some(Experiment::Probe)).unwrap();
        assert_eq!(c.experiment, Experiment::Probe);
    }

    #[test]
    fn fingerprint_ignores_outdir_only() {
        let a = RunConfig::defaults(Experiment::Simulate);
        let mut b = a.clone();
        b.io.outdir = Some("elsewhere".into());
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.seed += 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn lemma_lists_and_backend_rules() {
        let c = parse_config(
            "experiment = \"probe\"\n[probe]\nlemma = [\"boundary-1\", \"boundary-3\"]\n",
            &[],
            None,
        )
        .unwrap();
        assert_eq!(c.probe.lemmas, vec![LemmaId::Boundary1, LemmaId::Boundary3]);
        let e = parse_config("experiment = \"probe\"\n[probe]\nlemma = \"quad-LH\"\n", &[], None).unwrap_err();
        assert!(e.0[0].contains("radial backend"));
    }

    #[test]
    fn picard_memory_rule() {
        let e = parse_config("experiment = \"picard\"\n[grid]\nd = 3\nn = 32\n", &[], None).unwrap_err();
        assert!(e.0[0].contains("memory rule"));
        assert!(parse_config("experiment = \"picard\"\n[grid]\nd = 3\nn = 16\n", &[], None).is_ok());
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        for e in Experiment::ALL {
            let c = RunConfig::defaults(e);
            let text = toml::to_string(&c).unwrap();
            assert_eq!(parse_config(&text, &[], None).unwrap(), c, "{e}");
        }
    }
}
