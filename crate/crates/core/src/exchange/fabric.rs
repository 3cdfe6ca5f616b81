use std::collections::BTreeMap;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError, Sender};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeMessage {
    pub sender: usize,
    pub step: u64,
    /// Global ids, ascending.
    pub spikes: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FabricConfig {
    pub n_ranks: usize,
    /// Every message becomes visible to its receiver this long after sending.
    pub latency: Duration,
    /// Longest a gather waits for a missing peer.
    pub timeout: Duration,
}

impl FabricConfig {
    pub fn new(n_ranks: usize) -> Self {
        Self {
            n_ranks,
            latency: Duration::ZERO,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug)]
struct Envelope {
    msg: SpikeMessage,
    sent_at: Instant,
}

/// In-process interconnect: one inbox per rank, reliable and FIFO per sender.
#[derive(Debug)]
pub struct ExchangeFabric {
    endpoints: Vec<RankEndpoint>,
}

impl ExchangeFabric {
    pub fn new(cfg: FabricConfig) -> Result<Self> {
        if cfg.n_ranks == 0 {
            return Err(Error::param("n_ranks", "need at least one rank"));
        }
        let (txs, rxs): (Vec<Sender<Envelope>>, Vec<Receiver<Envelope>>) =
            (0..cfg.n_ranks).map(|_| unbounded()).unzip();
        let endpoints = rxs
            .into_iter()
            .enumerate()
            .map(|(rank, inbox)| RankEndpoint {
                rank,
                cfg,
                peers: txs.clone(),
                inbox,
                pending: BTreeMap::new(),
                last_sent: None,
                last_gathered: None,
                last_from: vec![None; cfg.n_ranks],
                sent_spikes: 0,
                sent_messages: 0,
            })
            .collect();
        Ok(Self { endpoints })
    }

    /// Hands out the per-rank endpoints, rank order.
    pub fn into_endpoints(self) -> Vec<RankEndpoint> {
        self.endpoints
    }
}

/// One rank's view of the fabric. Owned by that rank's communication agent.
#[derive(Debug)]
pub struct RankEndpoint {
    rank: usize,
    cfg: FabricConfig,
    peers: Vec<Sender<Envelope>>,
    inbox: Receiver<Envelope>,
    pending: BTreeMap<u64, Vec<SpikeMessage>>,
    last_sent: Option<u64>,
    last_gathered: Option<u64>,
    last_from: Vec<Option<u64>>,
    sent_spikes: u64,
    sent_messages: u64,
}

impl RankEndpoint {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_ranks(&self) -> usize {
        self.cfg.n_ranks
    }

    /// Spikes broadcast so far, counted once per broadcast.
    pub fn sent_spikes(&self) -> u64 {
        self.sent_spikes
    }

    pub fn sent_messages(&self) -> u64 {
        self.sent_messages
    }

    /// Sends `spikes` of `step` to every other rank, even when empty.
    pub fn broadcast_spikes(&mut self, step: u64, spikes: &[u32]) -> Result<()> {
        if let Some(last) = self.last_sent {
            if step <= last {
                return Err(Error::StepRegression {
                    rank: self.rank,
                    step,
                    last,
                });
            }
        }
        self.last_sent = Some(step);
        self.sent_spikes += spikes.len() as u64;
        let sent_at = Instant::now();
        for (r, tx) in self.peers.iter().enumerate() {
            if r == self.rank {
                continue;
            }
            let msg = SpikeMessage {
                sender: self.rank,
                step,
                spikes: spikes.to_vec(),
            };
            tx.send(Envelope { msg, sent_at })
                .map_err(|_| Error::Disconnected(format!("rank {r} inbox closed")))?;
            self.sent_messages += 1;
        }
        Ok(())
    }

    /// Waits for one message of `step` from every peer and returns the
    /// sorted union of their spikes.
    pub fn gather_round(&mut self, step: u64) -> Result<Vec<u32>> {
        if let Some(last) = self.last_gathered {
            if step <= last {
                return Err(Error::StepRegression {
                    rank: self.rank,
                    step,
                    last,
                });
            }
        }
        let expected = self.cfg.n_ranks - 1;
        let deadline = Instant::now() + self.cfg.timeout;
        while self.pending.get(&step).map_or(0, Vec::len) < expected {
            let env = match self.inbox.recv_deadline(deadline) {
                Ok(env) => env,
                Err(RecvTimeoutError::Timeout) => return Err(self.timeout_error(step)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::Disconnected(format!("inbox of rank {}", self.rank)))
                }
            };
            let ready = env.sent_at + self.cfg.latency;
            let now = Instant::now();
            if ready > now {
                thread::sleep(ready - now);
            }
            self.accept(env.msg)?;
        }
        self.last_gathered = Some(step);
        let msgs = self.pending.remove(&step).unwrap_or_default();
        merge_round(self.rank, step, &msgs)
    }

    fn accept(&mut self, msg: SpikeMessage) -> Result<()> {
        let s = msg.sender;
        if let Some(last) = self.last_from[s] {
            if msg.step <= last {
                return Err(Error::StepRegression {
                    rank: s,
                    step: msg.step,
                    last,
                });
            }
        }
        if self.last_gathered.is_some_and(|g| msg.step <= g) {
            return Err(Error::StepRegression {
                rank: s,
                step: msg.step,
                last: self.last_gathered.unwrap_or(0),
            });
        }
        self.last_from[s] = Some(msg.step);
        self.pending.entry(msg.step).or_default().push(msg);
        Ok(())
    }

    fn timeout_error(&self, step: u64) -> Error {
        let have: Vec<usize> = self
            .pending
            .get(&step)
            .map(|m| m.iter().map(|m| m.sender).collect())
            .unwrap_or_default();
        let missing = (0..self.cfg.n_ranks)
            .filter(|&r| r != self.rank && !have.contains(&r))
            .collect();
        Error::GatherTimeout {
            rank: self.rank,
            step,
            missing,
        }
    }
}

/// Sorted union of one round's messages; an id reported by two senders is an
/// ownership error.
pub fn merge_round(rank: usize, step: u64, msgs: &[SpikeMessage]) -> Result<Vec<u32>> {
    let mut tagged: Vec<(u32, usize)> = msgs
        .iter()
        .flat_map(|m| m.spikes.iter().map(move |&id| (id, m.sender)))
        .collect();
    tagged.sort_unstable();
    for w in tagged.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateOwner {
                rank,
                step,
                id: w[0].0,
                first: w[0].1,
                second: w[1].1,
            });
        }
    }
    Ok(tagged.into_iter().map(|(id, _)| id).collect())
}
