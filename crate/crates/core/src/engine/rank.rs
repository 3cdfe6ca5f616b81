use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, unbounded};

use crate::decomposition::{estimate_area_cost, CostEstimate, PartitionPlan};
use crate::dynamics::make_propagators;
use crate::error::{Error, Result};
use crate::graph::sorted;
use crate::network::Network;
use crate::plasticity::SpikeTrace;

use super::audit::{AccessAudit, ShardAudit};
use super::buffer::{ActiveSpike, SpikeBuffer};
use super::shard::{DepositEvent, ModelTable, ThreadShard};
use super::store::{EdgeStore, SynapseRecord, NOT_PLASTIC};
use super::SpikeLog;

/// Transport seam between a rank and its peers. `post` hands this rank's
/// spikes of `step` to the transport, `collect` returns the peers' spikes of
/// the same step, sorted ascending.
pub trait SpikeExchange {
    fn post(&mut self, step: u64, spikes: &[u32]) -> Result<()>;
    fn collect(&mut self, step: u64) -> Result<Vec<u32>>;
}

/// A rank without peers.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoExchange;

impl SpikeExchange for NoExchange {
    fn post(&mut self, _step: u64, _spikes: &[u32]) -> Result<()> {
        Ok(())
    }

    fn collect(&mut self, _step: u64) -> Result<Vec<u32>> {
        Ok(Vec::new())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RankOptions {
    /// Record which thread touches which edge and post-neuron.
    pub audit: bool,
    /// Record every synaptic deposit.
    pub trace_deposits: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Gather the previous step's remote spikes while the workers compute.
    /// Ignored when `d_min` is one step.
    pub overlap: bool,
    /// Keep per-step phase timings.
    pub timeline: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            overlap: true,
            timeline: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryCounters {
    pub n_owned: usize,
    /// Owned plus remote pre-neurons.
    pub n_pre: usize,
    pub n_remote_pre: usize,
    pub n_edges: usize,
    pub n_plastic: usize,
    /// Cost-model estimate for the stored items.
    pub estimate: CostEstimate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepTiming {
    pub step: u64,
    /// Dispatch to join of the compute workers.
    pub compute: Duration,
    /// Time blocked in `collect`.
    pub exchange_wait: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub rank: usize,
    /// Spikes emitted by this rank.
    pub log: SpikeLog,
    pub remote_spikes_received: u64,
    pub wall: Duration,
    pub compute: Duration,
    pub exchange_wait: Duration,
    pub timeline: Vec<StepTiming>,
}

/// Spike buffer together with the id tables needed to fill it.
#[derive(Debug)]
struct Ingress {
    buffer: SpikeBuffer,
    /// Owned ∪ remote pre ids, ascending.
    pre_table: Vec<u32>,
    owned: Vec<u32>,
}

impl Ingress {
    /// Buffers sorted global ids; ids without edges on this rank are dropped.
    fn enqueue(&mut self, ids: &[u32], emission: u64) -> Result<()> {
        let mut idx = Vec::with_capacity(ids.len());
        for &g in ids {
            if let Ok(i) = self.pre_table.binary_search(&g) {
                idx.push(i as u32);
            }
        }
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            idx.sort_unstable();
            if let Some(w) = idx.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateSpike {
                    pre: self.pre_table[w[0] as usize],
                    step: emission,
                });
            }
        }
        self.buffer.enqueue(emission, &idx).map_err(|e| match e {
            Error::DuplicateSpike { pre, step } => Error::DuplicateSpike {
                pre: self.pre_table[pre as usize],
                step,
            },
            other => other,
        })
    }
}

/// One simulated process: its owned neurons split over compute threads, the
/// incoming synapses of those neurons, and the spike buffer.
#[derive(Debug)]
pub struct RankState {
    rank: usize,
    step: u64,
    d_min: u16,
    shards: Vec<ThreadShard>,
    ingress: Ingress,
    /// Local spikes of `step - 1` not yet buffered.
    pending: Option<Vec<u32>>,
    memory: MemoryCounters,
    dt: f64,
}

/// Builds the state of `rank` from its indegree sub-graph.
pub fn build_rank_state(
    net: &Network,
    plan: &PartitionPlan,
    rank: usize,
    opts: &RankOptions,
) -> Result<RankState> {
    if plan.n_vertices() != net.n_neurons() {
        return Err(Error::InconsistentPlan(format!(
            "plan covers {} vertices, network has {}",
            plan.n_vertices(),
            net.n_neurons()
        )));
    }
    if rank >= plan.n_ranks {
        return Err(Error::InconsistentPlan(format!("rank {rank} of {}", plan.n_ranks)));
    }
    let (d_min, d_max) = (net.d_min_steps, net.d_max_steps);
    if d_min == 0 || d_min > d_max {
        return Err(Error::param(
            "delays",
            format!("need 1 <= d_min <= d_max steps, got {d_min}..{d_max}"),
        ));
    }
    let owned = plan.owned[rank].clone();
    let sub = net.graph.indegree_subgraph(&owned)?;
    let (_local, remote) = net.graph.split_local_remote(&sub, &owned)?;
    let pre_table = sorted::union(&owned, &remote.pre);

    let ranges = &plan.thread_ranges[rank];
    let mut thread_of_owned = vec![0usize; owned.len()];
    for (k, r) in ranges.iter().enumerate() {
        thread_of_owned[r.clone()].fill(k);
    }

    let mut per_thread: Vec<Vec<SynapseRecord>> = vec![Vec::new(); ranges.len()];
    for &e in &sub.edges {
        let (x, y) = net.graph.edge(e);
        let pre = pre_table.binary_search(&x).map_err(|_| Error::UnknownNeuron {
            edge: e,
            what: "pre",
            id: x,
            rank,
        })?;
        let target = owned.binary_search(&y).map_err(|_| Error::UnknownNeuron {
            edge: e,
            what: "post",
            id: y,
            rank,
        })?;
        let delay = net.delays[e];
        if delay < d_min || delay > d_max {
            return Err(Error::param(
                "delay",
                format!("edge {e} has {delay} steps outside [{d_min}, {d_max}]"),
            ));
        }
        per_thread[thread_of_owned[target]].push(SynapseRecord {
            pre: pre as u32,
            target: target as u32,
            weight: net.weights[e],
            edge: e as u32,
            delay_steps: delay,
            polarity: net.polarity[e],
            plastic: if net.plastic[e] { 0 } else { NOT_PLASTIC },
        });
    }

    let models = Arc::new(ModelTable {
        props: net
            .models
            .iter()
            .map(|p| make_propagators(p, net.dt))
            .collect::<Result<_>>()?,
        params: net.models.clone(),
        stdp: net.stdp,
        dt: net.dt,
    });

    let mut shards = Vec::with_capacity(ranges.len());
    for (range, records) in ranges.iter().zip(per_thread) {
        let ids = owned[range.clone()].to_vec();
        let (states, inputs) = ids.iter().map(|&v| net.neuron_init(v)).unzip();
        let model_of = ids.iter().map(|&v| net.population(v).model as u16).collect();
        let store = EdgeStore::build(records, pre_table.len(), d_min, d_max);
        let n_records = store.len();
        let mut shard = ThreadShard {
            base: range.start,
            post_traces: vec![SpikeTrace::default(); ids.len()],
            ids,
            states,
            inputs,
            model_of,
            store,
            plastic: Vec::new(),
            pre_traces: Vec::new(),
            plastic_in_offsets: Vec::new(),
            plastic_in: Vec::new(),
            models: Arc::clone(&models),
            audit: opts.audit.then(|| ShardAudit::new(n_records, owned.len())),
            deposits: opts.trace_deposits.then(Vec::new),
        };
        shard.index_plastic();
        shards.push(shard);
    }

    let n_edges = sub.edges.len();
    let memory = MemoryCounters {
        n_owned: owned.len(),
        n_pre: pre_table.len(),
        n_remote_pre: remote.pre.len(),
        n_edges,
        n_plastic: shards.iter().map(|s| s.plastic.len()).sum(),
        estimate: estimate_area_cost(owned.len() as u64, n_edges as u64, remote.pre.len() as u64),
    };
    Ok(RankState {
        rank,
        step: 0,
        d_min,
        shards,
        ingress: Ingress {
            buffer: SpikeBuffer::new(d_min, d_max),
            pre_table,
            owned,
        },
        pending: None,
        memory,
        dt: net.dt,
    })
}

impl RankState {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Next step to be simulated.
    pub fn current_step(&self) -> u64 {
        self.step
    }

    pub fn n_threads(&self) -> usize {
        self.shards.len()
    }

    pub fn owned(&self) -> &[u32] {
        &self.ingress.owned
    }

    pub fn pre_table(&self) -> &[u32] {
        &self.ingress.pre_table
    }

    pub fn memory(&self) -> MemoryCounters {
        self.memory
    }

    pub fn buffer(&self) -> &SpikeBuffer {
        &self.ingress.buffer
    }

    /// Edge stores of the compute threads.
    pub fn edge_stores(&self) -> Vec<&EdgeStore> {
        self.shards.iter().map(|s| &s.store).collect()
    }

    pub fn neuron_state(&self, id: u32) -> Option<&crate::dynamics::NeuronState> {
        let i = self.ingress.owned.binary_search(&id).ok()?;
        let shard = self.shards.iter().find(|s| (s.base..s.base + s.len()).contains(&i))?;
        shard.states.get(i - shard.base)
    }

    /// Current weights of plastic synapses as `(edge id, weight)`, by edge id.
    pub fn plastic_weights(&self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = self
            .shards
            .iter()
            .flat_map(|s| {
                s.store
                    .records()
                    .iter()
                    .filter(|r| r.plastic != NOT_PLASTIC)
                    .map(move |r| (r.edge, s.plastic[r.plastic as usize].w))
            })
            .collect();
        out.sort_unstable_by_key(|&(e, _)| e);
        out
    }

    /// Deposits recorded so far (deposit tracing only), by `(step, edge)`.
    pub fn deposit_log(&self) -> Vec<DepositEvent> {
        let mut out: Vec<DepositEvent> = self
            .shards
            .iter()
            .filter_map(|s| s.deposits.as_ref())
            .flatten()
            .copied()
            .collect();
        out.sort_by_key(|d| (d.step, d.edge));
        out
    }

    /// Buffers spikes of `emission` given as global ids, sorted ascending.
    /// Ids that feed no synapse on this rank are ignored.
    pub fn enqueue_spikes(&mut self, ids: &[u32], emission: u64) -> Result<()> {
        self.ingress.enqueue(ids, emission)
    }

    /// Delivers every buffered interaction due at the current step.
    pub fn deliver_interactions(&mut self) -> Result<()> {
        let active = self.ingress.buffer.active(self.step)?;
        for shard in &mut self.shards {
            shard.deliver(self.step, &active)?;
        }
        Ok(())
    }

    /// Steps every owned neuron; returns the global ids that spiked.
    pub fn update_neurons(&mut self) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        for shard in &mut self.shards {
            out.extend(shard.update(self.step)?);
        }
        Ok(self.to_global(out))
    }

    fn to_global(&self, owned_idx: Vec<u32>) -> Vec<u32> {
        owned_idx
            .into_iter()
            .map(|i| self.ingress.owned[i as usize])
            .collect()
    }

    /// One full step on the calling thread. `incoming` holds the spikes of
    /// other ranks at the previous step; ids owned here are skipped.
    pub fn step(&mut self, incoming: &[u32]) -> Result<Vec<u32>> {
        if let Some(local) = self.pending.take() {
            let e = self.step - 1;
            self.ingress.enqueue(&local, e)?;
            let owned = &self.ingress.owned;
            let remote: Vec<u32> = incoming
                .iter()
                .copied()
                .filter(|g| owned.binary_search(g).is_err())
                .collect();
            self.ingress.enqueue(&remote, e)?;
            self.ingress.buffer.mark_complete(e);
        }
        self.deliver_interactions()?;
        let spikes = self.update_neurons()?;
        self.ingress.buffer.retire(self.step);
        self.step += 1;
        self.pending = Some(spikes.clone());
        Ok(spikes)
    }

    /// Runs `n_steps` with one persistent worker per thread shard while the
    /// calling thread coordinates the buffer and the exchange. The spikes of
    /// the last step are posted and collected before returning.
    pub fn run<X: SpikeExchange + ?Sized>(
        &mut self,
        n_steps: u64,
        exchange: &mut X,
        opts: &RunOptions,
    ) -> Result<RunReport> {
        let start = Instant::now();
        let blocking = !opts.overlap || self.d_min == 1;
        let rank = self.rank;
        let dt = self.dt;
        let first = self.step;
        let RankState {
            shards,
            ingress,
            pending,
            step,
            ..
        } = self;
        let mut report = RunReport {
            rank,
            log: SpikeLog::new(dt),
            ..RunReport::default()
        };

        let result: Result<()> = thread::scope(|scope| {
            let (res_tx, res_rx) = unbounded::<(usize, Result<Vec<u32>>)>();
            let mut work_txs = Vec::with_capacity(shards.len());
            for (k, shard) in shards.iter_mut().enumerate() {
                let (tx, rx) = bounded::<(u64, Arc<Vec<ActiveSpike>>)>(1);
                let res_tx = res_tx.clone();
                scope.spawn(move || {
                    for (t, active) in rx {
                        let r = shard.process(t, &active);
                        if res_tx.send((k, r)).is_err() {
                            break;
                        }
                    }
                });
                work_txs.push(tx);
            }
            drop(res_tx);
            let n_workers = work_txs.len();
            let mut parts: Vec<Vec<u32>> = vec![Vec::new(); n_workers];

            for t in first..first + n_steps {
                let t0 = Instant::now();
                let mut wait = Duration::ZERO;
                let mut deferred = None;
                if let Some(local) = pending.take() {
                    let e = t - 1;
                    exchange.post(e, &local)?;
                    ingress.enqueue(&local, e)?;
                    if blocking {
                        let w0 = Instant::now();
                        let remote = exchange.collect(e)?;
                        wait += w0.elapsed();
                        report.remote_spikes_received += remote.len() as u64;
                        ingress.enqueue(&remote, e)?;
                        ingress.buffer.mark_complete(e);
                    } else {
                        deferred = Some(e);
                    }
                }

                let active = Arc::new(ingress.buffer.active(t)?);
                let c0 = Instant::now();
                for tx in &work_txs {
                    tx.send((t, Arc::clone(&active)))
                        .map_err(|_| Error::Disconnected("compute worker exited".into()))?;
                }
                if let Some(e) = deferred {
                    let w0 = Instant::now();
                    let remote = exchange.collect(e)?;
                    wait += w0.elapsed();
                    report.remote_spikes_received += remote.len() as u64;
                    ingress.enqueue(&remote, e)?;
                    ingress.buffer.mark_complete(e);
                }
                let mut first_err = None;
                for _ in 0..n_workers {
                    let (k, r) = res_rx
                        .recv()
                        .map_err(|_| Error::Disconnected("compute worker exited".into()))?;
                    match r {
                        Ok(v) => parts[k] = v,
                        Err(e) => {
                            first_err.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = first_err {
                    return Err(e);
                }
                let compute = c0.elapsed();
                // thread ranges are contiguous and ascending, so concatenation
                // keeps the ids sorted
                let spikes: Vec<u32> = parts
                    .iter_mut()
                    .flat_map(std::mem::take)
                    .map(|i| ingress.owned[i as usize])
                    .collect();
                ingress.buffer.retire(t);
                report.log.events.extend(spikes.iter().map(|&g| (t, g)));
                *pending = Some(spikes);
                *step = t + 1;

                report.compute += compute;
                report.exchange_wait += wait;
                if opts.timeline {
                    report.timeline.push(StepTiming {
                        step: t,
                        compute,
                        exchange_wait: wait,
                        total: t0.elapsed(),
                    });
                }
            }
            drop(work_txs);

            if let Some(local) = pending.take() {
                let e = *step - 1;
                exchange.post(e, &local)?;
                ingress.enqueue(&local, e)?;
                let w0 = Instant::now();
                let remote = exchange.collect(e)?;
                report.exchange_wait += w0.elapsed();
                report.remote_spikes_received += remote.len() as u64;
                ingress.enqueue(&remote, e)?;
                ingress.buffer.mark_complete(e);
            }
            Ok(())
        });
        result?;
        report.wall = start.elapsed();
        Ok(report)
    }

    /// Merged access record of all threads, or `None` without audit mode.
    pub fn audit_report(&self) -> Option<AccessAudit> {
        let mut out = AccessAudit {
            rank: self.rank,
            ..AccessAudit::default()
        };
        for (k, shard) in self.shards.iter().enumerate() {
            let audit = shard.audit.as_ref()?;
            let owns = shard.base..shard.base + shard.len();
            let mut edges = Vec::new();
            for (pos, r) in shard.store.records().iter().enumerate() {
                if audit.edge_hits[pos] {
                    edges.push(r.edge);
                    if !owns.contains(&(r.target as usize)) {
                        out.offending_edges.push(r.edge);
                    }
                }
            }
            let posts: Vec<u32> = (0..self.ingress.owned.len())
                .filter(|&i| audit.deposit_hits[i] || audit.update_hits[i])
                .map(|i| self.ingress.owned[i])
                .collect();
            out.merge_into(k, &edges, &posts);
        }
        out.offending_edges.sort_unstable();
        Some(out)
    }

    /// Test fixture: moves the synapse of `edge` into the store of
    /// `to_thread`, as if its thread tag had been corrupted. Plasticity state
    /// of the two affected threads is reset.
    pub fn inject_thread_fault(&mut self, edge: u32, to_thread: usize) -> Result<()> {
        if to_thread >= self.shards.len() {
            return Err(Error::param("to_thread", format!("{to_thread} ≥ {}", self.shards.len())));
        }
        let from = self
            .shards
            .iter()
            .position(|s| s.store.records().iter().any(|r| r.edge == edge))
            .ok_or_else(|| Error::param("edge", format!("edge {edge} is not stored on rank {}", self.rank)))?;
        if from == to_thread {
            return Ok(());
        }
        let n_pre = self.ingress.pre_table.len();
        let (d_min, d_max) = (self.d_min, self.ingress.buffer.capacity() as u16);
        let mut take = |k: usize| {
            let store = std::mem::take(&mut self.shards[k].store);
            let mut recs = store.into_records();
            for r in &mut recs {
                if r.plastic != NOT_PLASTIC {
                    r.weight = self.shards[k].plastic[r.plastic as usize].w;
                    r.plastic = 0;
                }
            }
            recs
        };
        let mut src = take(from);
        let mut dst = take(to_thread);
        let i = src.iter().position(|r| r.edge == edge).expect("edge located above");
        dst.push(src.remove(i));
        for (k, recs) in [(from, src), (to_thread, dst)] {
            let shard = &mut self.shards[k];
            shard.store = EdgeStore::build(recs, n_pre, d_min, d_max);
            shard.index_plastic();
            if let Some(a) = &mut shard.audit {
                a.edge_hits = vec![false; shard.store.len()];
            }
        }
        self.memory.n_edges = self.shards.iter().map(|s| s.store.len()).sum();
        Ok(())
    }
}
