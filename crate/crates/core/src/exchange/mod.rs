//! Spike exchange between simulated ranks.
//!
//! Every rank runs in its own thread next to a communication agent that owns
//! the rank's fabric endpoint. After each update the rank hands its spikes to
//! the agent, which broadcasts them (an empty message when nothing spiked, so
//! peers can count arrivals) and gathers the peers' spikes of the same step.
//! With a minimum delay of two or more steps the gather overlaps the next
//! step's computation.

mod fabric;

use std::thread;
use std::time::Duration;

use crossbeam_channel::{bounded, unbounded, Receiver, Sender};

use crate::decomposition::PartitionPlan;
use crate::engine::{
    build_rank_state, AccessAudit, MemoryCounters, RankOptions, RankState, RunOptions, RunReport,
    SpikeExchange, SpikeLog,
};
use crate::error::{Error, Result};
use crate::network::Network;

pub use fabric::{merge_round, ExchangeFabric, FabricConfig, RankEndpoint, SpikeMessage};

enum Command {
    Post(u64, Vec<u32>),
}

/// Rank-side handle of a communication agent.
pub struct AgentHandle {
    commands: Sender<Command>,
    results: Receiver<(u64, Result<Vec<u32>>)>,
}

impl SpikeExchange for AgentHandle {
    fn post(&mut self, step: u64, spikes: &[u32]) -> Result<()> {
        self.commands
            .send(Command::Post(step, spikes.to_vec()))
            .map_err(|_| Error::Disconnected("communication agent stopped".into()))
    }

    fn collect(&mut self, step: u64) -> Result<Vec<u32>> {
        let (got, r) = self
            .results
            .recv()
            .map_err(|_| Error::Disconnected("communication agent stopped".into()))?;
        if got != step {
            return Err(Error::Precondition(format!(
                "collected step {got} while waiting for step {step}"
            )));
        }
        r
    }
}

/// Totals reported by an agent when it shuts down.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AgentStats {
    pub sent_spikes: u64,
    pub sent_messages: u64,
}

fn agent_loop(
    mut endpoint: RankEndpoint,
    commands: Receiver<Command>,
    results: Sender<(u64, Result<Vec<u32>>)>,
) -> AgentStats {
    for cmd in commands {
        let Command::Post(step, spikes) = cmd;
        let r = endpoint
            .broadcast_spikes(step, &spikes)
            .and_then(|_| endpoint.gather_round(step));
        let failed = r.is_err();
        if results.send((step, r)).is_err() || failed {
            break;
        }
    }
    AgentStats {
        sent_spikes: endpoint.sent_spikes(),
        sent_messages: endpoint.sent_messages(),
    }
}

/// Runs `n_steps` of `state` with a dedicated communication thread owning
/// `endpoint`.
pub fn run_rank_with_comm_agent(
    state: &mut RankState,
    endpoint: RankEndpoint,
    n_steps: u64,
    opts: &RunOptions,
) -> Result<(RunReport, AgentStats)> {
    if endpoint.rank() != state.rank() {
        return Err(Error::Precondition(format!(
            "endpoint of rank {} given to rank {}",
            endpoint.rank(),
            state.rank()
        )));
    }
    thread::scope(|scope| {
        let (cmd_tx, cmd_rx) = unbounded();
        let (res_tx, res_rx) = bounded(1);
        let agent = scope.spawn(move || agent_loop(endpoint, cmd_rx, res_tx));
        let mut handle = AgentHandle {
            commands: cmd_tx,
            results: res_rx,
        };
        let report = state.run(n_steps, &mut handle, opts);
        drop(handle);
        let stats = agent
            .join()
            .map_err(|_| Error::Disconnected("communication agent panicked".into()))?;
        Ok((report?, stats))
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationOptions {
    pub n_ranks: usize,
    pub n_threads: usize,
    pub overlap: bool,
    pub audit: bool,
    pub latency: Duration,
    pub timeout: Duration,
    pub timeline: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            n_ranks: 1,
            n_threads: 1,
            overlap: true,
            audit: false,
            latency: Duration::ZERO,
            timeout: Duration::from_secs(60),
            timeline: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SimulationResult {
    /// Global spike log, all ranks merged.
    pub log: SpikeLog,
    pub reports: Vec<RunReport>,
    pub agents: Vec<AgentStats>,
    pub memory: Vec<MemoryCounters>,
    pub audits: Vec<AccessAudit>,
    /// Plastic weights `(edge, w)` at the end of the run, by edge id.
    pub plastic_weights: Vec<(u32, f64)>,
}

impl SimulationResult {
    /// Spikes emitted, spikes broadcast and spikes received must agree.
    pub fn check_conservation(&self) -> Result<()> {
        let emitted: u64 = self.reports.iter().map(|r| r.log.len() as u64).sum();
        let sent: u64 = self.agents.iter().map(|a| a.sent_spikes).sum();
        let n = self.reports.len() as u64;
        let received: u64 = self.reports.iter().map(|r| r.remote_spikes_received).sum();
        let merged = self.log.len() as u64;
        if emitted != merged || (n > 1 && sent != emitted) || received != emitted * (n - 1) {
            return Err(Error::Precondition(format!(
                "spike conservation failed: emitted {emitted}, merged {merged}, sent {sent}, received {received} over {n} ranks"
            )));
        }
        Ok(())
    }
}

/// Simulates `net` on `opts.n_ranks` in-process ranks using the rank map of
/// `plan` (thread ranges are re-derived for `opts.n_threads`).
pub fn simulate(
    net: &Network,
    plan: &PartitionPlan,
    n_steps: u64,
    opts: &SimulationOptions,
) -> Result<SimulationResult> {
    if plan.n_ranks != opts.n_ranks {
        return Err(Error::InconsistentPlan(format!(
            "plan has {} ranks, {} requested",
            plan.n_ranks, opts.n_ranks
        )));
    }
    let plan = plan.with_threads(opts.n_threads);
    let fabric = ExchangeFabric::new(FabricConfig {
        n_ranks: opts.n_ranks,
        latency: opts.latency,
        timeout: opts.timeout,
    })?;
    let rank_opts = RankOptions {
        audit: opts.audit,
        trace_deposits: false,
    };
    let run_opts = RunOptions {
        overlap: opts.overlap,
        timeline: opts.timeline,
    };
    let outcomes: Vec<Result<_>> = thread::scope(|scope| {
        let handles: Vec<_> = fabric
            .into_endpoints()
            .into_iter()
            .enumerate()
            .map(|(rank, endpoint)| {
                let plan = &plan;
                scope.spawn(move || {
                    let mut state = build_rank_state(net, plan, rank, &rank_opts)?;
                    let (report, stats) =
                        run_rank_with_comm_agent(&mut state, endpoint, n_steps, &run_opts)?;
                    Ok((report, stats, state))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Disconnected("rank thread panicked".into())))
            })
            .collect()
    });

    let mut result = SimulationResult::default();
    let mut first_err = None;
    for o in outcomes {
        match o {
            Ok((report, stats, state)) => {
                result.memory.push(state.memory());
                if let Some(a) = state.audit_report() {
                    result.audits.push(a);
                }
                result.plastic_weights.extend(state.plastic_weights());
                result.reports.push(report);
                result.agents.push(stats);
            }
            // a failing rank makes its peers time out; report the root cause
            Err(e) => {
                let root = !matches!(e, Error::GatherTimeout { .. } | Error::Disconnected(_));
                match &first_err {
                    None => first_err = Some(e),
                    Some(prev) if root && matches!(prev, Error::GatherTimeout { .. } | Error::Disconnected(_)) => {
                        first_err = Some(e)
                    }
                    _ => {}
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    result.plastic_weights.sort_unstable_by_key(|&(e, _)| e);
    result.log = SpikeLog::merge(net.dt, result.reports.iter().map(|r| &r.log));
    Ok(result)
}
