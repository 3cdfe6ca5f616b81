//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::decomposition::PartitionPlan;
use crate::engine::{SpikeLog, StepTiming};
use crate::error::{Error, Result};
use crate::exchange::{simulate, SimulationOptions, SimulationResult};
use crate::io;
use crate::netbuild::{
    build_from_recipe, load_config, load_connectome, make_balanced_random_net_with, plan_network, run_reference,
    BalancedNetParams, ConnectomeMatrix, NetworkConfig, WiringRecipe,
};
use crate::network::Network;

#[derive(Parser, Debug)]
#[command(name = "cortex", version, about = "Distributed spiking network simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a network and write its raster and stats.
    Simulate(RunArgs),
    /// Print the partition plan for a config.
    Plan(RunArgs),
    /// Compare the distributed run against the serial reference.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Multiply every population count before building.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Compare against this raster instead of running the reference.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Time the balanced benchmark network at several sizes.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated problem sizes.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
        sizes: Vec<f64>,
        /// Neurons at size 1.
        #[arg(long, default_value_t = 2000)]
        unit: u32,
    },
    /// Split a raster into per-area spike files and binned rates.
    RasterData {
        #[command(flatten)]
        run: RunArgs,
        /// Raster to split (default: <out-dir>/spikes.txt).
        #[arg(long)]
        raster: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        bin_ms: f64,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ranks: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    /// Record which threads touch each synapse and neuron; abort on sharing.
    #[arg(long)]
    audit: bool,
    /// Wait for each exchange before computing.
    #[arg(long)]
    no_overlap: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Injected exchange latency in microseconds.
    #[arg(long, default_value_t = 0)]
    latency_us: u64,
    /// Also write per-step phase timings.
    #[arg(long)]
    timeline: bool,
}

impl RunArgs {
    fn config(&self) -> Result<NetworkConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| Error::config("--config", "required for this subcommand"))?;
        let mut cfg = load_config(path)?;
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut NetworkConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.ranks {
            cfg.decomposition.ranks = r;
        }
        if let Some(t) = self.threads {
            cfg.decomposition.threads = t;
        }
        if let Some(n) = self.steps {
            cfg.t_sim = n as f64 * cfg.dt;
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.clone();
        }
    }

    fn options(&self, cfg: &NetworkConfig) -> SimulationOptions {
        SimulationOptions {
            n_ranks: cfg.decomposition.ranks,
            n_threads: cfg.decomposition.threads,
            overlap: !self.no_overlap,
            audit: self.audit,
            latency: Duration::from_micros(self.latency_us),
            timeline: self.timeline,
            ..SimulationOptions::default()
        }
    }
}

/// Loads the connectome a config points to, if any.
pub fn config_connectome(cfg: &NetworkConfig) -> Result<Option<ConnectomeMatrix>> {
    cfg.connectome
        .as_ref()
        .map(|c| load_connectome(&c.matrix, c.distances.as_deref()))
        .transpose()
}

/// Network and partition plan for a config, using its decomposition knobs.
pub fn build_and_plan(cfg: &NetworkConfig) -> Result<(Network, PartitionPlan)> {
    let conn = config_connectome(cfg)?;
    let recipe = WiringRecipe::new(cfg, conn.as_ref())?;
    let net = build_from_recipe(cfg, &recipe)?;
    let plan = plan_network(cfg, &recipe, &net, cfg.decomposition.ranks, cfg.decomposition.threads)?;
    Ok((net, plan))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_outputs(dir: &Path, cfg: &NetworkConfig, plan: &PartitionPlan, res: &SimulationResult, args: &RunArgs) -> Result<()> {
    create_dir(dir)?;
    io::save_raster(&dir.join("spikes.txt"), &res.log)?;
    io::write_stats_csv(&dir.join("stats.csv"), res)?;
    write_file(&dir.join("resolved_config.toml"), &cfg.dump())?;
    write_file(&dir.join("plan.txt"), &plan.dump())?;
    if args.timeline {
        let tl: Vec<(usize, &[StepTiming])> = res.reports.iter().map(|r| (r.rank, r.timeline.as_slice())).collect();
        io::write_timeline_csv(&dir.join("timeline.csv"), &tl)?;
    }
    if args.audit {
        let mut text = String::from("rank max_threads_per_edge_or_neuron\n");
        for a in &res.audits {
            text.push_str(&format!("{} {}\n", a.rank, a.max_threads_per_item()));
        }
        write_file(&dir.join("audit.txt"), &text)?;
    }
    Ok(())
}

fn cmd_simulate(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.config()?;
    let (net, plan) = build_and_plan(&cfg)?;
    let n_steps = cfg.n_steps();
    let t0 = Instant::now();
    let res = simulate(&net, &plan, n_steps, &args.options(&cfg))?;
    res.check_conservation()?;
    let wall = t0.elapsed();
    write_outputs(&cfg.output.dir, &cfg, &plan, &res, args)?;
    let _ = writeln!(
        out,
        "{} neurons, {} synapses, {} steps on {} rank(s) x {} thread(s): {} spikes, {:.2} Hz, {:.3} s",
        net.n_neurons(),
        net.n_edges(),
        n_steps,
        plan.n_ranks,
        plan.n_threads,
        res.log.len(),
        res.log.mean_rate_hz(net.n_neurons(), n_steps),
        wall.as_secs_f64()
    );
    let _ = writeln!(out, "wrote {}", cfg.output.dir.display());
    Ok(0)
}

fn cmd_plan(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.config()?;
    let (_, plan) = build_and_plan(&cfg)?;
    let text = plan.dump();
    if let Some(dir) = &args.out_dir {
        create_dir(dir)?;
        write_file(&dir.join("plan.txt"), &text)?;
    }
    let _ = out.write_all(text.as_bytes());
    Ok(0)
}

fn scale_config(cfg: &mut NetworkConfig, scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::config("--scale", format!("must be positive, got {scale}")));
    }
    for area in &mut cfg.areas {
        for p in &mut area.populations {
            p.count = ((p.count as f64 * scale).round() as u32).max(1);
        }
    }
    Ok(())
}

fn cmd_verify(args: &RunArgs, scale: f64, reference: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = args.config()?;
    scale_config(&mut cfg, scale)?;
    let (net, plan) = build_and_plan(&cfg)?;
    let n_steps = cfg.n_steps();
    let res = simulate(&net, &plan, n_steps, &args.options(&cfg))?;
    res.check_conservation()?;
    let expected: SpikeLog = match reference {
        Some(p) => io::load_raster(p, net.dt)?,
        None => run_reference(&net, n_steps)?,
    };
    match res.log.first_divergence(&expected) {
        None => {
            let _ = writeln!(
                out,
                "verify ok: {} spikes over {} steps match the reference ({} rank(s) x {} thread(s))",
                res.log.len(),
                n_steps,
                plan.n_ranks,
                plan.n_threads
            );
            Ok(0)
        }
        Some((step, neuron)) => {
            let _ = writeln!(
                out,
                "verify FAILED: first divergence at step {step}, neuron {neuron} ({} vs {} spikes)",
                res.log.len(),
                expected.len()
            );
            Ok(1)
        }
    }
}

fn cmd_bench(args: &RunArgs, sizes: &[f64], unit: u32, out: &mut dyn Write) -> Result<i32> {
    let ranks = args.ranks.unwrap_or(2);
    let threads = args.threads.unwrap_or(2);
    let steps = args.steps.unwrap_or(1000);
    let _ = writeln!(
        out,
        "{:>6} {:>8} {:>10} {:>8} {:>9} {:>8}  per-rank memory (bytes)",
        "size", "neurons", "synapses", "spikes", "wall_s", "steps/s"
    );
    for &size in sizes {
        let p = BalancedNetParams {
            scale: size * unit as f64 / 10_000.0,
            seed: args.seed.unwrap_or(1),
            t_sim: steps as f64 * 0.1,
            ..BalancedNetParams::default()
        };
        let mut cfg = make_balanced_random_net_with(&p)?;
        cfg.decomposition.ranks = ranks;
        cfg.decomposition.threads = threads;
        let (net, plan) = build_and_plan(&cfg)?;
        let t0 = Instant::now();
        let res = simulate(&net, &plan, steps, &args.options(&cfg))?;
        let wall = t0.elapsed().as_secs_f64();
        let mem: Vec<String> = res.memory.iter().map(|m| m.estimate.bytes.to_string()).collect();
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>10} {:>8} {:>9.3} {:>8.0}  {}",
            size,
            net.n_neurons(),
            net.n_edges(),
            res.log.len(),
            wall,
            steps as f64 / wall,
            mem.join(",")
        );
    }
    Ok(0)
}

fn cmd_raster_data(args: &RunArgs, raster: Option<&Path>, bin_ms: f64, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.config()?;
    let (net, _) = build_and_plan(&cfg)?;
    let raster = raster.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.join("spikes.txt"));
    let log = io::load_raster(&raster, net.dt)?;
    let bin_steps = ((bin_ms / net.dt).round() as u64).max(1);
    let n_steps = cfg.n_steps().max(log.events.last().map_or(0, |e| e.0 + 1));
    let series = io::area_series(&net, &log, n_steps, bin_steps);
    let dir = cfg.output.dir.join("areas");
    let files = io::write_area_series(&dir, &series, bin_steps as f64 * net.dt)?;
    for s in &series {
        let _ = writeln!(
            out,
            "{}: {} neurons, {} spikes, {:.3} Hz",
            s.name,
            s.n_neurons,
            s.log.len(),
            s.log.mean_rate_hz(s.n_neurons as usize, n_steps)
        );
    }
    let _ = writeln!(out, "wrote {} files to {}", files.len(), dir.display());
    Ok(0)
}

/// Runs the CLI on `args` (including the program name), writing reports to
/// `out` and errors to stderr. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let res = match &cli.cmd {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Plan(a) => cmd_plan(a, out),
        Command::Verify { run, scale, reference } => cmd_verify(run, *scale, reference.as_deref(), out),
        Command::Bench { run, sizes, unit } => cmd_bench(run, sizes, *unit, out),
        Command::RasterData { run, raster, bin_ms } => cmd_raster_data(run, raster.as_deref(), *bin_ms, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
