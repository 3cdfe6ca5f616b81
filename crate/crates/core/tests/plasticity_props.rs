mod common;

use proptest::prelude::*;

use common::stdp_pair_sum_oracle;
use cortex::plasticity::{on_post_spike, on_pre_spike, PlasticSynapseState, SpikeTrace, StdpParams};

fn event_driven(p: &StdpParams, w0: f64, events: &[(f64, bool)]) -> Vec<f64> {
    let (mut k_plus, mut k_minus) = (SpikeTrace::default(), SpikeTrace::default());
    let mut s = PlasticSynapseState::new(w0);
    events
        .iter()
        .map(|&(t, is_pre)| {
            if is_pre {
                s = on_pre_spike(&s, &k_minus, p, t).unwrap();
                k_plus.bump(t, p.tau_plus).unwrap();
            } else {
                s = on_post_spike(&s, &k_plus, p, t).unwrap();
                k_minus.bump(t, p.tau_minus).unwrap();
            }
            s.w
        })
        .collect()
}

/// Interleaved pre/post events on a 1/8 ms grid, strictly increasing.
fn trains() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec((1u32..400, any::<bool>()), 1..400).prop_map(|gaps| {
        let mut t = 0u64;
        gaps.into_iter()
            .map(|(g, is_pre)| {
                t += g as u64;
                (t as f64 / 8.0, is_pre)
            })
            .collect()
    })
}

fn params() -> impl Strategy<Value = StdpParams> {
    (0.0f64..0.5, 0.0f64..0.2, 0.0f64..1.0, 5.0f64..40.0, 5.0f64..40.0, 0.5f64..100.0, 0.0f64..5.0).prop_map(
        |(lambda, alpha, mu, tau_plus, tau_minus, w_ref, w_min)| StdpParams {
            lambda,
            alpha,
            mu,
            tau_plus,
            tau_minus,
            w_ref,
            w_min,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn event_driven_matches_pair_sum(p in params(), events in trains(), w0 in 5.0f64..200.0) {
        let fast = event_driven(&p, w0, &events);
        let slow = stdp_pair_sum_oracle(&p, w0, &events);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{} vs {}", a, b);
        }
    }

    #[test]
    fn weights_stay_above_floor(p in params(), events in trains(), w0 in 5.0f64..200.0) {
        prop_assert!(event_driven(&p, w0, &events).iter().all(|&w| w >= p.w_min));
    }

    #[test]
    fn zero_learning_rate_freezes_weights(p in params(), events in trains(), w0 in 5.0f64..200.0) {
        let p = StdpParams { lambda: 0.0, ..p };
        prop_assert!(event_driven(&p, w0, &events).iter().all(|&w| w == w0));
    }

    #[test]
    fn time_shift_is_exact(p in params(), events in trains(), w0 in 5.0f64..200.0, shift in 0u32..4096) {
        let shifted: Vec<(f64, bool)> = events.iter().map(|&(t, b)| (t + shift as f64 / 8.0, b)).collect();
        prop_assert_eq!(event_driven(&p, w0, &events), event_driven(&p, w0, &shifted));
    }
}

#[test]
fn time_regression_is_rejected() {
    let p = StdpParams::default();
    let s = on_pre_spike(&PlasticSynapseState::new(10.0), &SpikeTrace::default(), &p, 5.0).unwrap();
    assert!(on_pre_spike(&s, &SpikeTrace::default(), &p, 4.0).is_err());
}
