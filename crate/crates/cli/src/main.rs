//! `cbnet`: experiment runner and environment server.

mod experiment;
mod settings;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use cbnet::env::protocol::{serve_stdio, serve_tcp};
use cbnet::netmodel::read_positions_csv;
use cbnet::{CbEnv, CbPolicy, NetworkConfig, Point, Protocol, SinkPolicy};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use experiment::{parse_axis, parse_seeds, Experiment};
use settings::{parse_assignment, resolve, seed_from_env};

#[derive(Parser)]
#[command(
    name = "cbnet",
    version,
    about = "Clustered IoT network simulator with collaborative beamforming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat JSON config file with dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field override `key=value`; repeatable. Applied after --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Initial energy per node in joules.
    #[arg(long)]
    e0: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<NetworkConfig> {
        let mut overrides = self
            .overrides
            .iter()
            .map(|s| parse_assignment(s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(e0) = self.e0 {
            overrides.push(("initial_energy".into(), json!(e0)));
        }
        resolve(self.config.as_deref(), &overrides, seed_from_env().as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Runs lifetime traces for every sweep point and seed.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// omrp, leach or pegasis.
        #[arg(long, default_value = "omrp")]
        routing: String,
        /// none, random, energy_greedy or distance_greedy.
        #[arg(long, default_value = "none")]
        cb: String,
        /// max_energy, random or fixed:ID.
        #[arg(long, default_value = "max_energy")]
        sink_policy: String,
        /// Inclusive range `a..b` or a comma list.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        /// Sweep axis `key=v1,v2,...`; repeatable, crossed.
        #[arg(long, value_name = "KEY=V1,V2")]
        sweep: Vec<String>,
        /// Node positions CSV (`id,x,y`); fixes node_count.
        #[arg(long)]
        positions: Option<PathBuf>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Serves the environment over NDJSON on stdio or a TCP socket.
    Serve {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "omrp")]
        routing: String,
        #[arg(long)]
        positions: Option<PathBuf>,
        /// `host:port`; stdio when absent.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Checks a config and prints it fully resolved.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Checks a positions CSV and reports its extent.
    PositionsImport {
        csv: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn parse_protocol(name: &str) -> Result<Protocol> {
    Protocol::parse(name).ok_or_else(|| anyhow!("unknown routing `{name}` (expected omrp, leach or pegasis)"))
}

fn load_positions(path: Option<&Path>) -> Result<Option<Vec<Point>>> {
    path.map(|p| read_positions_csv(p).with_context(|| format!("importing {}", p.display())))
        .transpose()
}

fn print_json(value: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            routing,
            cb,
            sink_policy,
            seeds,
            sweep,
            positions,
            out,
            jobs,
        } => {
            let experiment = Experiment {
                base: config.resolve()?,
                protocol: parse_protocol(&routing)?,
                cb_policy: CbPolicy::parse(&cb).ok_or_else(|| anyhow!("unknown cb policy `{cb}`"))?,
                sink_policy: SinkPolicy::parse(&sink_policy)
                    .ok_or_else(|| anyhow!("unknown sink policy `{sink_policy}`"))?,
                seeds: parse_seeds(&seeds)?,
                axes: sweep.iter().map(|s| parse_axis(s)).collect::<Result<_>>()?,
                positions: load_positions(positions.as_deref())?,
                out_dir: out,
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
            let summary = pool.install(|| experiment.run())?;
            for p in &summary.points {
                eprintln!(
                    "point {} {}: FND {:.1} HND {:.1} AND {:.1} f2 {:.4e}",
                    p.index,
                    Value::Object(p.overrides.clone()),
                    p.fnd.mean,
                    p.hnd.mean,
                    p.and.mean,
                    p.f2.mean
                );
            }
            eprintln!("wrote {}", experiment.out_dir.join("summary.json").display());
        }
        Command::Serve {
            config,
            routing,
            positions,
            listen,
        } => {
            let mut config = config.resolve()?;
            let positions = load_positions(positions.as_deref())?;
            if let Some(p) = &positions {
                config.node_count = p.len();
            }
            let mut env = CbEnv::new(config, parse_protocol(&routing)?)?;
            if let Some(p) = positions {
                env = env.with_positions(p)?;
            }
            match listen {
                Some(addr) => serve_tcp(env, addr.as_str(), |bound| eprintln!("listening on {bound}"))?,
                None => serve_stdio(env)?,
            }
        }
        Command::ValidateConfig { config } => {
            print_json(&Value::Object(config.resolve()?.to_flat_json()))?;
        }
        Command::PositionsImport { csv, config } => {
            let config = config.resolve()?;
            let points = read_positions_csv(&csv).with_context(|| format!("importing {}", csv.display()))?;
            let fold =
                |f: fn(&Point) -> f64, pick: fn(f64, f64) -> f64, init: f64| points.iter().map(f).fold(init, pick);
            let outside = points
                .iter()
                .filter(|p| p.x < 0.0 || p.y < 0.0 || p.x > config.region_width || p.y > config.region_height)
                .count();
            print_json(&json!({
                "nodes": points.len(),
                "x_range": [fold(|p| p.x, f64::min, f64::INFINITY), fold(|p| p.x, f64::max, f64::NEG_INFINITY)],
                "y_range": [fold(|p| p.y, f64::min, f64::INFINITY), fold(|p| p.y, f64::max, f64::NEG_INFINITY)],
                "outside_region": outside,
            }))?;
        }
    }
    Ok(())
}
