//! Config file in, raster and stats out, then the raster split by area.

use cortex::cli::build_and_plan;
use cortex::exchange::{simulate, SimulationOptions};
use cortex::io::{area_series, load_raster, save_raster, write_area_series, write_stats_csv};
use cortex::netbuild::load_config;

fn main() -> cortex::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/three_areas.toml"));
    let mut cfg = load_config(&path)?;
    cfg.t_sim = 100.0;
    let out = std::env::temp_dir().join("cortex_config_to_raster");
    std::fs::create_dir_all(&out).map_err(|e| cortex::Error::io(&out, e))?;

    let (net, plan) = build_and_plan(&cfg)?;
    let opts = SimulationOptions {
        n_ranks: plan.n_ranks,
        n_threads: plan.n_threads,
        ..SimulationOptions::default()
    };
    let res = simulate(&net, &plan, cfg.n_steps(), &opts)?;
    let raster = out.join("spikes.txt");
    save_raster(&raster, &res.log)?;
    write_stats_csv(&out.join("stats.csv"), &res)?;

    let back = load_raster(&raster, net.dt)?;
    assert_eq!(back, res.log);
    let series = area_series(&net, &back, cfg.n_steps(), 50);
    let files = write_area_series(&out.join("areas"), &series, 5.0)?;
    println!("{} spikes; wrote {} and {} per-area files under {}", back.len(), raster.display(), files.len(), out.display());
    Ok(())
}
