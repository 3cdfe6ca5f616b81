mod common;

use std::io::Cursor;
use std::path::Path;

use proptest::prelude::*;

use common::build;
use cortex::engine::SpikeLog;
use cortex::io::{area_series, raster_string, read_raster};
use cortex::netbuild::{
    build_network, load_connectome, make_layered_cortex_net, parse_config, run_reference, LayeredCortexParams,
};
use cortex::network::Network;

fn driven_areas(names: &[&str], n: u32, p_inter: f64) -> String {
    let mut s = String::from("seed = 77\n");
    for (i, name) in names.iter().enumerate() {
        s += &format!(
            "[[areas]]\nname = \"{name}\"\norigin = [{}, 0.0, 0.0]\n[[areas.populations]]\nname = \"E\"\ncount = {n}\n\
             drive = {{ poisson_rate = 9000.0, poisson_weight = 87.8 }}\nu_init = [-65.0, -55.0]\n",
            3.0 * i as f64
        );
    }
    for src in names {
        for tgt in names {
            let rule = if src == tgt { "fixed_indegree = 10".to_string() } else { format!("pairwise_bernoulli = {p_inter}") };
            s += &format!(
                "[[projections]]\nsource = \"{src}/E\"\ntarget = \"{tgt}/E\"\nrule = {{ {rule} }}\n\
                 weight = {{ constant = 40.0 }}\ndelay = {{ uniform = {{ low = 0.5, high = 2.0 }} }}\n"
            );
        }
    }
    s
}

fn same_wiring(a: &Network, b: &Network) -> bool {
    a.graph == b.graph && a.weights == b.weights && a.delays == b.delays && a.polarity == b.polarity && a.positions == b.positions
}

fn logs() -> impl Strategy<Value = SpikeLog> {
    prop::collection::btree_set((0u64..5000, 0u32..300), 0..300).prop_map(|set| SpikeLog {
        dt: 0.1,
        events: set.into_iter().collect(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn build_is_deterministic(n in 5u32..60, p in 0.0f64..0.3) {
        let text = driven_areas(&["A", "B"], n, p);
        let (_, _, a) = build(&text);
        let (_, _, b) = build(&text);
        prop_assert!(same_wiring(&a, &b));
    }

    #[test]
    fn config_dump_round_trips(
        n in 1u32..5000,
        p in 0.0f64..1.0,
        dt in prop::sample::select(vec![0.05, 0.1, 0.125, 0.25]),
        t_sim in 1.0f64..5000.0,
        seed in any::<u64>(),
    ) {
        let mut cfg = parse_config(&driven_areas(&["A", "B", "C"], n, p)).unwrap();
        cfg.dt = dt;
        cfg.t_sim = t_sim;
        cfg.seed = seed;
        let back = parse_config(&cfg.dump()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn raster_round_trips(log in logs()) {
        let text = raster_string(&log);
        let back = read_raster(Cursor::new(text), log.dt).unwrap();
        prop_assert!(back.is_sorted());
        prop_assert_eq!(back, log);
    }

    #[test]
    fn area_split_partitions_the_log(n in 5u32..40, steps in 50u64..400, bin in 1u64..50) {
        let (_, _, net) = build(&driven_areas(&["A", "B", "C"], n, 0.05));
        let log = run_reference(&net, steps).unwrap();
        let series = area_series(&net, &log, steps, bin);
        let mut merged: Vec<(u64, u32)> = series.iter().flat_map(|s| s.log.events.iter().copied()).collect();
        merged.sort_unstable();
        prop_assert_eq!(&merged, &log.events);
        for (s, a) in series.iter().zip(&net.areas) {
            prop_assert!(s.log.events.iter().all(|e| a.vertices.contains(&e.1)));
            let bin_s = bin as f64 * net.dt * 1e-3;
            let total: f64 = s.rate.iter().map(|r| r * s.n_neurons as f64 * bin_s).sum();
            prop_assert!((total - s.log.len() as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn unsorted_raster_reports_the_line() {
    let err = read_raster(Cursor::new("0.1 3\n0.3 1\n0.2 5\n"), 0.1).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn disconnected_areas_match_isolated_runs() {
    let steps = 1500;
    let (_, _, joint) = build(&driven_areas(&["A", "B"], 60, 0.0));
    let log = run_reference(&joint, steps).unwrap();
    assert!(log.len() > 50, "too quiet: {}", log.len());
    for (i, name) in ["A", "B"].iter().enumerate() {
        let (_, _, alone) = build(&driven_areas(&[name], 60, 0.0));
        let mut own = run_reference(&alone, steps).unwrap();
        let offset = joint.areas[i].vertices.start;
        for e in &mut own.events {
            e.1 += offset;
        }
        assert_eq!(log.restrict(joint.areas[i].vertices.clone()), own, "area {name}");
    }
}

fn toy_connectome() -> cortex::netbuild::ConnectomeMatrix {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    load_connectome(&data.join("toy_connectome.csv"), Some(&data.join("toy_distances.csv"))).unwrap()
}

#[test]
fn layered_two_area_net_is_active() {
    let mut conn = toy_connectome();
    conn.labels.truncate(2);
    conn.values.truncate(2);
    conn.values.iter_mut().for_each(|r| r.truncate(2));
    if let Some(d) = &mut conn.distances {
        d.truncate(2);
        d.iter_mut().for_each(|r| r.truncate(2));
    }
    let cfg = make_layered_cortex_net(&conn, &LayeredCortexParams::default()).unwrap();
    let net = build_network(&cfg, Some(&conn)).unwrap();
    assert_eq!(net.areas.len(), 2);
    let log = run_reference(&net, 500).unwrap();
    for a in &net.areas {
        assert!(!log.restrict(a.vertices.clone()).is_empty(), "area {} silent", a.name);
    }
    let inter = (0..net.n_edges())
        .filter(|&e| {
            let (s, t) = net.graph.edge(e);
            net.area_of(s) != net.area_of(t)
        })
        .count();
    assert!(inter > 0);
}

#[test]
fn zeroed_connectome_has_no_inter_area_edges() {
    let conn = toy_connectome().zeroed();
    let cfg = make_layered_cortex_net(&conn, &LayeredCortexParams::default()).unwrap();
    let net = build_network(&cfg, Some(&conn)).unwrap();
    assert!((0..net.n_edges()).all(|e| {
        let (s, t) = net.graph.edge(e);
        net.area_of(s) == net.area_of(t)
    }));
}

#[test]
fn reference_on_an_empty_net_is_silent() {
    let text = "[[areas]]\nname = \"x\"\n[[areas.populations]]\nname = \"E\"\ncount = 10\n";
    let (_, _, net) = build(text);
    assert_eq!(net.n_edges(), 0);
    assert!(run_reference(&net, 1000).unwrap().is_empty());
}
