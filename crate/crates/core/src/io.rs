//! Text outputs: rasters, per-rank stats, step timelines and per-area series.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::engine::{SpikeLog, StepTiming};
use crate::error::{Error, Result};
use crate::exchange::SimulationResult;
use crate::network::Network;

/// Decimal places needed to print multiples of `dt` exactly enough to parse
/// them back to the same step.
fn time_decimals(dt: f64) -> usize {
    let mut d = 0;
    while d < 9 && ((dt * 10f64.powi(d as i32)).round() - dt * 10f64.powi(d as i32)).abs() > 1e-9 {
        d += 1;
    }
    d
}

/// Writes `time_ms neuron_id` lines ascending by (time, id).
pub fn write_raster<W: Write>(mut out: W, log: &SpikeLog) -> std::io::Result<()> {
    let prec = time_decimals(log.dt);
    let mut events = log.events.clone();
    if !log.is_sorted() {
        events.sort_unstable();
        events.dedup();
    }
    for (step, id) in events {
        writeln!(out, "{:.prec$} {id}", step as f64 * log.dt)?;
    }
    Ok(())
}

pub fn raster_string(log: &SpikeLog) -> String {
    let mut buf = Vec::new();
    write_raster(&mut buf, log).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// Parses a raster back into a log with step width `dt`. Lines must be
/// strictly ascending; blank lines and `#` comments are skipped.
pub fn read_raster<R: BufRead>(input: R, dt: f64) -> Result<SpikeLog> {
    let mut log = SpikeLog::new(dt);
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| Error::Parse {
            line: line_no,
            reason: format!("{reason}: `{line}`"),
        };
        let mut parts = line.split_whitespace();
        let (Some(t), Some(id), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected `time_ms neuron_id`"));
        };
        let t: f64 = t.parse().map_err(|_| bad("bad time"))?;
        let id: u32 = id.parse().map_err(|_| bad("bad neuron id"))?;
        if !(t >= 0.0) {
            return Err(bad("negative time"));
        }
        let ev = ((t / dt).round() as u64, id);
        if log.events.last().is_some_and(|&last| last >= ev) {
            return Err(bad("raster is not strictly ascending"));
        }
        log.events.push(ev);
    }
    Ok(log)
}

pub fn load_raster(path: &Path, dt: f64) -> Result<SpikeLog> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_raster(std::io::BufReader::new(f), dt)
}

pub fn save_raster(path: &Path, log: &SpikeLog) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_raster(&mut w, log).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// One row per rank: timing, traffic and memory counters.
pub fn write_stats_csv(path: &Path, result: &SimulationResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record([
        "rank",
        "wall_s",
        "compute_s",
        "exchange_wait_s",
        "spikes_emitted",
        "remote_spikes_received",
        "messages_sent",
        "n_owned",
        "n_pre",
        "n_remote_pre",
        "n_edges",
        "n_plastic",
        "estimated_bytes",
    ])
    .map_err(|e| csv_err(path, e))?;
    for (r, rep) in result.reports.iter().enumerate() {
        let m = &result.memory[r];
        let sent = result.agents.get(r).map_or(0, |a| a.sent_messages);
        w.write_record([
            r.to_string(),
            format!("{:.6}", rep.wall.as_secs_f64()),
            format!("{:.6}", rep.compute.as_secs_f64()),
            format!("{:.6}", rep.exchange_wait.as_secs_f64()),
            rep.log.len().to_string(),
            rep.remote_spikes_received.to_string(),
            sent.to_string(),
            m.n_owned.to_string(),
            m.n_pre.to_string(),
            m.n_remote_pre.to_string(),
            m.n_edges.to_string(),
            m.n_plastic.to_string(),
            m.estimate.bytes.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-step phase timings of every rank, in microseconds.
pub fn write_timeline_csv(path: &Path, timelines: &[(usize, &[StepTiming])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["rank", "step", "compute_us", "exchange_wait_us", "total_us"])
        .map_err(|e| csv_err(path, e))?;
    for &(rank, tl) in timelines {
        for s in tl {
            w.write_record([
                rank.to_string(),
                s.step.to_string(),
                s.compute.as_micros().to_string(),
                s.exchange_wait.as_micros().to_string(),
                s.total.as_micros().to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Spikes of one area, plus its population rate binned in time.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaSeries {
    pub name: String,
    pub n_neurons: u32,
    pub log: SpikeLog,
    /// Hz, one value per bin.
    pub rate: Vec<f64>,
}

/// Splits `log` by area tag and bins each area's rate in `bin_steps` steps.
pub fn area_series(net: &Network, log: &SpikeLog, n_steps: u64, bin_steps: u64) -> Vec<AreaSeries> {
    let bin_steps = bin_steps.max(1);
    let n_bins = n_steps.div_ceil(bin_steps) as usize;
    net.areas
        .iter()
        .map(|a| {
            let sub = log.restrict(a.vertices.clone());
            let n = a.vertices.len() as u32;
            let mut counts = vec![0u64; n_bins];
            for &(s, _) in &sub.events {
                if let Some(c) = counts.get_mut((s / bin_steps) as usize) {
                    *c += 1;
                }
            }
            let bin_s = bin_steps as f64 * log.dt * 1e-3;
            let rate = counts
                .iter()
                .map(|&c| if n == 0 { 0.0 } else { c as f64 / (n as f64 * bin_s) })
                .collect();
            AreaSeries {
                name: a.name.clone(),
                n_neurons: n,
                log: sub,
                rate,
            }
        })
        .collect()
}

/// Writes `raster_<area>.txt` per area and `rates.csv` with one column per
/// area. Returns the files written.
pub fn write_area_series(dir: &Path, series: &[AreaSeries], bin_ms: f64) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for s in series {
        let p = dir.join(format!("raster_{}.txt", s.name));
        save_raster(&p, &s.log)?;
        written.push(p);
    }
    let p = dir.join("rates.csv");
    let mut w = csv::Writer::from_path(&p).map_err(|e| csv_err(&p, e))?;
    let mut header = vec!["time_ms".to_string()];
    header.extend(series.iter().map(|s| s.name.clone()));
    w.write_record(&header).map_err(|e| csv_err(&p, e))?;
    let n_bins = series.first().map_or(0, |s| s.rate.len());
    for b in 0..n_bins {
        let mut row = vec![format!("{}", b as f64 * bin_ms)];
        row.extend(series.iter().map(|s| format!("{:.4}", s.rate[b])));
        w.write_record(&row).map_err(|e| csv_err(&p, e))?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    written.push(p);
    Ok(written)
}
