use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use zakharov::cli::config::Experiment;
use zakharov::cli::sweep::parse_vary;
use zakharov::cli::{parse_config, run, sweep, verify_dir, RunConfig};

/// Experiments on the Zakharov system in first-order form.
#[derive(Parser)]
#[command(name = "zakharov", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML config; omitted keys take defaults.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Dotted-key override, e.g. `--set grid.n=64`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (beats `io.outdir` and `ZAK_OUTDIR`).
    #[arg(long)]
    outdir: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time integration with diagnostics and checkpoints.
    Simulate(Common),
    /// Fixed-point solve of the Duhamel formulation.
    Picard(Common),
    /// Normal-form transformation followed by its inverse.
    NormalformRoundtrip(Common),
    /// Ratio sweeps over the dyadic gap K.
    Probe(Common),
    /// Lacunary antisymmetric construction.
    Illposed(Common),
    /// Comparison with the cubic Schrödinger limit for growing α.
    Subsonic(Common),
    /// Pullback Cauchy test for small-data scattering.
    Scatter(Common),
    /// Runs the experiment named inside CONFIG.
    Run {
        #[arg(value_name = "CONFIG")]
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Re-validates the fingerprints of every file in a run directory.
    Verify { outdir: PathBuf },
    /// Runs the Cartesian product of `--vary` lists.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=v1,v2,...`; repeatable.
        #[arg(long, required = true)]
        vary: Vec<String>,
    },
    /// Prints the default config of an experiment as TOML.
    Defaults { experiment: Experiment },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("{msg}");
    ExitCode::from(2)
}

fn failure(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("{msg}");
    ExitCode::from(1)
}

/// Config text plus overrides, flags last so they win.
fn load(c: &Common) -> Result<(String, Vec<String>), String> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?,
        None => String::new(),
    };
    let mut o = c.set.clone();
    if let Some(s) = c.seed {
        o.push(format!("seed={s}"));
    }
    if let Some(a) = c.alpha {
        o.push(format!("alpha={a:?}"));
    }
    if let Some(d) = &c.outdir {
        o.push(format!("io.outdir={}", toml::Value::String(d.clone())));
    }
    Ok((text, o))
}

fn execute(cfg: &RunConfig) -> ExitCode {
    match run(cfg) {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.summary).unwrap_or_default());
            eprintln!("outputs in {} (fingerprint {})", o.outdir.display(), o.fingerprint);
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => failure(e),
    }
}

fn single(c: &Common, forced: Option<Experiment>) -> ExitCode {
    let (text, o) = match load(c) {
        Ok(x) => x,
        Err(e) => return usage(e),
    };
    match parse_config(&text, &o, forced) {
        Ok(cfg) => execute(&cfg),
        Err(e) => usage(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage(e);
        }
    }
    match cli.cmd {
        Cmd::Simulate(c) => single(&c, Some(Experiment::Simulate)),
        Cmd::Picard(c) => single(&c, Some(Experiment::Picard)),
        Cmd::NormalformRoundtrip(c) => single(&c, Some(Experiment::NormalformRoundtrip)),
        Cmd::Probe(c) => single(&c, Some(Experiment::Probe)),
        Cmd::Illposed(c) => single(&c, Some(Experiment::Illposed)),
        Cmd::Subsonic(c) => single(&c, Some(Experiment::Subsonic)),
        Cmd::Scatter(c) => single(&c, Some(Experiment::Scatter)),
        Cmd::Run { file, mut common } => {
            common.config = Some(file);
            single(&common, None)
        }
        Cmd::Verify { outdir } => match verify_dir(&outdir) {
            Ok(r) => {
                println!("{}", serde_json::to_string_pretty(&r).unwrap_or_default());
                if r.ok() {
                    ExitCode::SUCCESS
                } else {
                    failure("fingerprint mismatch")
                }
            }
            Err(e) => failure(e),
        },
        Cmd::Sweep { common, vary } => {
            let (text, o) = match load(&common) {
                Ok(x) => x,
                Err(e) => return usage(e),
            };
            let vary = match vary.iter().map(|v| parse_vary(v)).collect::<Result<Vec<_>, _>>() {
                Ok(v) => v,
                Err(e) => return usage(e),
            };
            let base = match parse_config(&text, &o, None) {
                Ok(c) => c.outdir(),
                Err(e) => return usage(e),
            };
            match sweep(&text, &o, None, &vary, std::path::Path::new(&base)) {
                Ok(entries) => {
                    println!("{}", serde_json::to_string_pretty(&entries).unwrap_or_default());
                    if entries.iter().all(|e| e.exit_code == 0) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(zakharov::ZakError::Config(v)) => usage(zakharov::cli::ConfigErrors(v)),
                Err(e) => failure(e),
            }
        }
        Cmd::Defaults { experiment } => match toml::to_string(&RunConfig::defaults(experiment)) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => failure(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_tree_is_consistent() {
        Cli::command().debug_assert();
    }
}
