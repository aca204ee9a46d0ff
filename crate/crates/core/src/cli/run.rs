use super::config::{Experiment, ProbeBackendKind, RunConfig};
use super::data::{grid_of, initial_fields, initial_state};
use crate::diagnostics::{
    conservation, row_fields, scattering_profile, subsonic_compare, Diagnostics, DiagnosticsSpec,
};
use crate::dyadic::DyadicConfig;
use crate::error::{Result, ZakError};
use crate::evolve::{
    duhamel_residual, picard_solve, simulate, simulate_with, trajectory_distance, Nonlinearity,
    PicardOptions, StepOptions,
};
use crate::grid::{write_checkpoint, Checkpoint, ZakharovState};
use crate::illposed::{run_illposed, LacunarySpec};
use crate::normal_form::probe::{
    probe_boundary_radial, probe_estimate, EnsembleSpec, LemmaId, ProbeBackend, ProbeReport,
};
use crate::normal_form::radial_probe::RadialSetup;
use crate::normal_form::{default_floor, pair_norm, psi_forward, psi_inverse};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Characters of the fingerprint carried in checkpoint file names.
pub const FP_FILE_CHARS: usize = 16;

/// Files of one run; every file carries the config fingerprint.
pub struct Output {
    dir: PathBuf,
    fp: String,
    files: Vec<PathBuf>,
}

pub struct CsvWriter {
    w: BufWriter<File>,
}

impl CsvWriter {
    pub fn row(&mut self, fields: &[f64]) -> std::io::Result<()> {
        crate::diagnostics::write_csv_row(&mut self.w, fields)
    }

    pub fn text_row(&mut self, fields: &[String]) -> std::io::Result<()> {
        writeln!(self.w, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}

impl Output {
    pub fn create(dir: impl AsRef<Path>, cfg: &RunConfig) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        for stale in ["summary.json", "error.json"] {
            let p = dir.join(stale);
            if p.is_file() {
                fs::remove_file(p)?;
            }
        }
        let mut o = Self {
            dir,
            fp: cfg.fingerprint(),
            files: Vec::new(),
        };
        o.json("config.json", json!({ "config": cfg }))?;
        Ok(o)
    }

    pub fn fingerprint(&self) -> &str {
        &self.fp
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&mut self, name: &str, header: &[String]) -> Result<CsvWriter> {
        let p = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&p)?);
        writeln!(w, "# fingerprint: {}", self.fp)?;
        writeln!(w, "{}", header.join(","))?;
        self.files.push(p);
        Ok(CsvWriter { w })
    }

    /// Writes `value` with a leading `fingerprint` field.
    pub fn json(&mut self, name: &str, value: Value) -> Result<()> {
        let mut obj = serde_json::Map::new();
        obj.insert("fingerprint".into(), Value::String(self.fp.clone()));
        match value {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("value".into(), other);
            }
        }
        let p = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&p)?);
        serde_json::to_writer_pretty(&mut w, &Value::Object(obj))?;
        writeln!(w)?;
        w.flush()?;
        if !self.files.contains(&p) {
            self.files.push(p);
        }
        Ok(())
    }

    /// `<stem>_<fingerprint prefix>.zak` in the binary checkpoint format.
    pub fn checkpoint(&mut self, stem: &str, c: &Checkpoint) -> Result<PathBuf> {
        let p = self.dir.join(format!("{stem}_{}.zak", &self.fp[..FP_FILE_CHARS]));
        let f = BufWriter::new(File::create(&p)?);
        write_checkpoint(f, c)?;
        self.files.push(p.clone());
        Ok(p)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}

/// Whether the run completed or stopped on a finding (blow-up, divergence).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Finding,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub outdir: PathBuf,
    pub fingerprint: String,
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Ok => 0,
            RunStatus::Finding => 1,
        }
    }
}

fn error_json(e: &ZakError) -> Value {
    let kind = match e {
        ZakError::BlowUp { .. } => "blow-up",
        ZakError::Diverged { .. } => "diverged",
        ZakError::Unattainable { .. } => "unattainable",
        ZakError::Resonance { .. } => "resonance",
        ZakError::Quadrature(_) => "quadrature",
        ZakError::Io(_) => "io",
        _ => "error",
    };
    let mut v = json!({ "status": kind, "message": e.to_string() });
    match e {
        ZakError::BlowUp { t, last_valid } => {
            v["t"] = json!(t);
            v["last_valid"] = json!(last_valid);
        }
        ZakError::Diverged { differences, ratios } => {
            v["differences"] = json!(differences);
            v["ratios"] = json!(ratios);
        }
        ZakError::Unattainable { eps, best } => {
            v["eps"] = json!(eps);
            v["best"] = json!(best);
        }
        ZakError::Resonance {
            value,
            floor,
            first,
            second,
        } => {
            v["value"] = json!(value);
            v["floor"] = json!(floor);
            v["shells"] = json!([first, second]);
        }
        _ => {}
    }
    v
}

/// Runs the configured experiment in `cfg.outdir()`. Errors raised by the
/// experiment are written to `error.json` and returned as a finding; only
/// failures to create the output directory surface as `Err`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    run_in(cfg, cfg.outdir())
}

pub fn run_in(cfg: &RunConfig, dir: impl AsRef<Path>) -> Result<RunOutcome> {
    let mut out = Output::create(dir, cfg)?;
    let res = match cfg.experiment {
        Experiment::Simulate => run_simulate(cfg, &mut out),
        Experiment::Picard => run_picard(cfg, &mut out),
        Experiment::NormalformRoundtrip => run_roundtrip(cfg, &mut out),
        Experiment::Probe => run_probe(cfg, &mut out),
        Experiment::Illposed => run_illposed_exp(cfg, &mut out),
        Experiment::Subsonic => run_subsonic(cfg, &mut out),
        Experiment::Scatter => run_scatter(cfg, &mut out),
    };
    let (status, summary) = match res {
        Ok(mut v) => {
            v["status"] = json!("ok");
            v["experiment"] = json!(cfg.experiment.name());
            out.json("summary.json", v.clone())?;
            (RunStatus::Ok, v)
        }
        Err(ZakError::Io(e)) => return Err(ZakError::Io(e)),
        Err(e) => {
            let mut v = error_json(&e);
            v["experiment"] = json!(cfg.experiment.name());
            out.json("error.json", v.clone())?;
            (RunStatus::Finding, v)
        }
    };
    Ok(RunOutcome {
        status,
        outdir: out.dir.clone(),
        fingerprint: out.fp.clone(),
        summary,
        files: out.files.clone(),
    })
}

fn step_options(cfg: &RunConfig) -> StepOptions {
    StepOptions::new(cfg.integrator.scheme, cfg.mode)
}

fn dyadic(cfg: &RunConfig) -> Result<DyadicConfig> {
    DyadicConfig::new(&grid_of(cfg)?, cfg.gap, cfg.alpha)
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn run_simulate(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let st = initial_state(cfg)?;
    let spec = DiagnosticsSpec {
        s_list: cfg.diagnostics.s_list.clone(),
        l_list: cfg.diagnostics.l_list.clone(),
        strichartz_s: cfg.diagnostics.strichartz_s,
    };
    let mut diag = Diagnostics::new(spec, dyadic(cfg)?)?;
    let mut csv = out.csv("diagnostics.csv", &diag.header())?;
    let it = &cfg.integrator;
    let every = cfg.io.checkpoint_every;
    let mut rows = Vec::new();
    let mut ckpts: Vec<(usize, Checkpoint)> = Vec::new();
    let res = simulate_with(&st, it.dt, it.t_end, &step_options(cfg), it.stride, &mut |s: &ZakharovState| {
        let row = diag.observe(s)?;
        csv.row(&row_fields(&row))?;
        rows.push(row);
        if every > 0 {
            let k = (s.t / it.dt).round() as usize;
            if k % every == 0 {
                ckpts.push((k, Checkpoint::from_state(s)));
            }
        }
        Ok(())
    });
    csv.finish()?;
    for (k, c) in &ckpts {
        out.checkpoint(&format!("state_{k:08}"), c)?;
    }
    let traj = res?;
    let last = traj.last();
    Ok(json!({
        "integrator": traj.integrator,
        "snapshots": traj.states.len(),
        "t_final": last.t,
        "conservation": conservation(&rows),
        "final": {
            "mass": rows.last().map(|r| r.mass),
            "energy": rows.last().map(|r| r.energy),
            "sup_norm": last.sup_norm(),
        },
        "checkpoints": ckpts.len(),
    }))
}

fn run_picard(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let g = grid_of(cfg)?;
    let (u0, n0) = initial_fields(g, &cfg.data, cfg.seed);
    let dcfg = dyadic(cfg)?;
    let p = &cfg.picard;
    let opts = PicardOptions {
        tol: p.tol,
        max_iter: p.max_iter,
        ..PicardOptions::new(p.t_end, p.nodes, cfg.alpha)
    };
    let data_size = pair_norm(&u0, &n0);
    let res = picard_solve(&u0, &n0, &dcfg, &opts);
    let (diffs, ratios) = match &res {
        Ok((_, r)) => (r.differences.clone(), r.ratios.clone()),
        Err(ZakError::Diverged { differences, ratios }) => (differences.clone(), ratios.clone()),
        Err(_) => (Vec::new(), Vec::new()),
    };
    let mut csv = out.csv("picard.csv", &strs(&["iteration", "difference", "ratio"]))?;
    for (i, d) in diffs.iter().enumerate() {
        let r = if i == 0 { f64::NAN } else { ratios[i - 1] };
        csv.row(&[(i + 1) as f64, *d, r])?;
    }
    csv.finish()?;
    let (traj, report) = res?;
    let residual = duhamel_residual(&traj)?;
    out.checkpoint("picard_final", &Checkpoint::from_state(traj.last()))?;
    let mut v = json!({
        "data_size": data_size,
        "iterations": report.iterations,
        "observed_ratio": report.observed_ratio,
        "differences": report.differences,
        "ratios": report.ratios,
        "duhamel_residual": residual,
    });
    if p.compare {
        let dt = p.t_end / (8 * p.nodes) as f64;
        let st = ZakharovState::new(u0, n0, 0.0, cfg.alpha)?;
        let opts = StepOptions::new(cfg.integrator.scheme, Nonlinearity::Analytic);
        let split = simulate(&st, dt, p.t_end, &opts, 8)?;
        v["splitting_dt"] = json!(dt);
        v["splitting_distance"] = json!(trajectory_distance(&traj.states, &split.states, 0.5, 0.0)?);
    }
    Ok(v)
}

fn run_roundtrip(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let g = grid_of(cfg)?;
    let dcfg = dyadic(cfg)?;
    let rt = &cfg.roundtrip;
    let floor = default_floor(cfg.alpha);
    let data = super::config::DataCfg {
        kind: super::config::DataKind::Random,
        amplitude: 1.0,
        wave_amplitude: 1.0,
        width: cfg.data.width,
        size: Some(rt.size),
    };
    let rows = (0..rt.samples)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            let (u, n) = initial_fields(g, &data, seed);
            let st = ZakharovState::new(u, n, 0.0, cfg.alpha)?;
            let (up, np) = psi_forward(&st, &dcfg, floor)?;
            let (ui, ni, rep) = psi_inverse(&up, &np, &dcfg, floor, rt.tol, rt.max_iter)?;
            let err = pair_norm(&(&ui - &st.u), &(&ni - &st.wave));
            Ok((seed, err, rep.iterations, rep.observed_ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = out.csv("roundtrip.csv", &strs(&["sample_seed", "error", "iterations", "observed_ratio"]))?;
    for (seed, e, it, r) in &rows {
        csv.text_row(&[seed.to_string(), format!("{e:e}"), it.to_string(), format!("{r:e}")])?;
    }
    csv.finish()?;
    Ok(json!({
        "samples": rows.len(),
        "size": rt.size,
        "max_error": rows.iter().map(|r| r.1).fold(0.0, f64::max),
        "max_observed_ratio": rows.iter().map(|r| r.3).fold(0.0, f64::max),
        "max_iterations": rows.iter().map(|r| r.2).max(),
    }))
}

fn run_probe(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let pr = &cfg.probe;
    let ensemble = EnsembleSpec {
        size: pr.samples,
        seed: pr.seed,
        ..EnsembleSpec::default()
    };
    let reports: Vec<ProbeReport> = match pr.backend {
        ProbeBackendKind::Radial => {
            let setup = RadialSetup {
                alpha: cfg.alpha,
                ..RadialSetup::default()
            };
            let all = probe_boundary_radial(pr.s, pr.l, &pr.gaps, &setup, &ensemble)?;
            all.into_iter().filter(|r| pr.lemmas.contains(&r.lemma)).collect()
        }
        ProbeBackendKind::Grid => {
            let backend = ProbeBackend::Grid {
                dim: cfg.grid.d,
                n: cfg.grid.n,
                length: cfg.grid.length,
            };
            pr.lemmas
                .iter()
                .map(|&l| probe_estimate(l, pr.s, pr.l, cfg.alpha, &pr.gaps, &backend, &ensemble))
                .collect::<Result<_>>()?
        }
    };
    let mut csv = out.csv("probe.csv", &strs(&["lemma", "s", "l", "K", "sample_seed", "ratio"]))?;
    for r in &reports {
        for row in &r.rows {
            csv.text_row(&[
                row.lemma.name().to_string(),
                format!("{:e}", row.s),
                format!("{:e}", row.l),
                row.k.to_string(),
                row.sample_seed.to_string(),
                format!("{:e}", row.ratio),
            ])?;
        }
    }
    csv.finish()?;
    let lemmas: Vec<&str> = reports.iter().map(|r| r.lemma.name()).collect();
    Ok(json!({ "lemmas": lemmas, "reports": reports }))
}

fn run_illposed_exp(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let il = &cfg.illposed;
    let spec = LacunarySpec::new(il.theta, il.start, il.gap, il.n_max, cfg.alpha)?;
    let (series, verdict) = run_illposed(&spec)?;
    let mut csv = out.csv("illposed.csv", &strs(&["n", "S_n", "C_n", "ratio"]))?;
    for r in &series.rows {
        csv.row(&[r.n as f64, r.s_n, r.c_n, r.ratio])?;
    }
    csv.finish()?;
    Ok(json!({
        "diverging": verdict.diverging,
        "fitted_c": verdict.fitted_c,
        "cross_term_bound": verdict.cross_term_bound,
        "verdict": verdict,
    }))
}

fn run_subsonic(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let g = grid_of(cfg)?;
    let (u0, _) = initial_fields(g, &cfg.data, cfg.seed);
    let rows = subsonic_compare(
        &u0,
        &cfg.subsonic.alphas,
        cfg.subsonic.t_star,
        cfg.integrator.dt,
        &step_options(cfg),
    )?;
    let mut csv = out.csv("subsonic.csv", &strs(&["alpha", "error"]))?;
    for r in &rows {
        csv.row(&[r.alpha, r.error])?;
    }
    csv.finish()?;
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let decreasing = sorted.windows(2).all(|w| w[1].error < w[0].error);
    Ok(json!({ "rows": rows, "strictly_decreasing": decreasing }))
}

fn run_scatter(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let st = initial_state(cfg)?;
    let it = &cfg.integrator;
    let traj = simulate(&st, it.dt, it.t_end, &step_options(cfg), it.stride)?;
    let sc = &cfg.scatter;
    let rep = scattering_profile(&traj, sc.s, sc.l, sc.t_min)?;
    let mut csv = out.csv("scatter.csv", &strs(&["t0", "t1", "du", "dn", "rate"]))?;
    for r in &rep.table {
        csv.row(&[r.t0, r.t1, r.du, r.dn, r.rate])?;
    }
    csv.finish()?;
    if let (Some(u), Some(n)) = (&rep.u_plus, &rep.n_plus) {
        out.checkpoint(
            "profile",
            &Checkpoint {
                grid: *u.grid(),
                alpha: cfg.alpha,
                t: traj.last().t,
                fields: vec![u.clone(), n.clone()],
            },
        )?;
    }
    Ok(json!({
        "decay_factor": rep.decay_factor,
        "decaying": rep.decaying,
        "caveat": rep.caveat,
        "gaps": rep.table.len(),
    }))
}

/// Lemma ids present in a probe summary.
pub fn summary_lemmas(v: &Value) -> Vec<LemmaId> {
    v["lemmas"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_str()?.parse().ok()).collect())
        .unwrap_or_default()
}
