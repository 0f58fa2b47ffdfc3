use modcs_core::dynamic::{generate_sequence, SequenceModel, SequenceVariant};
use modcs_core::harness::{exact_recon_probability, ExperimentConfig};
use modcs_core::io::{read_matrix, write_matrix};
use modcs_core::operators::gaussian_matrix;
use modcs_core::rng::{stream, Purpose};
use modcs_core::supports::{support_change_stats, IndexSet};
use proptest::prelude::*;

fn small_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: 64,
        s: 6,
        m_fracs: vec![0.3, 0.5],
        u_fracs: vec![0.1],
        e_fracs: vec![0.1],
        trials: 6,
        seed,
        ..ExperimentConfig::default()
    }
}

#[test]
fn experiment_is_reproducible() {
    let a = exact_recon_probability(&small_config(7)).unwrap();
    let b = exact_recon_probability(&small_config(7)).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.cells.len(), 2);
    for c in &a.cells {
        let p = c.method("modcs").unwrap().prob;
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn report_csv_has_echo_and_header() {
    let r = exact_recon_probability(&small_config(1)).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let echo = lines.next().unwrap();
    assert!(echo.starts_with("# "));
    let _: serde_json::Value = serde_json::from_str(&echo[2..]).unwrap();
    assert!(lines.next().unwrap().starts_with("m,u,e,noise_var,gamma,"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn matrix_csv_round_trip_is_exact() {
    let a = gaussian_matrix(7, 11, true, &mut stream(3, Purpose::Matrix, 0, 0)).unwrap();
    let mut buf = Vec::new();
    write_matrix(&mut buf, &a).unwrap();
    let b = read_matrix(buf.as_slice()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequence_respects_churn(seed in 0u64..1000, adds in 0usize..4, t_max in 1usize..8) {
        let model = SequenceModel {
            n: 80,
            s: 10,
            additions: adds,
            removals: adds,
            sigma_p2: 1.0,
            b_p: 5.0,
            t_max,
            initial_variance: 100.0,
            variant: SequenceVariant::Sparsified,
            seed,
        };
        let frames = generate_sequence(&model).unwrap();
        prop_assert_eq!(frames.len(), t_max + 1);
        for w in frames.windows(2) {
            let c = support_change_stats(&w[1].support, &w[0].support);
            prop_assert_eq!(c.additions, adds);
            prop_assert_eq!(c.removals, adds);
            prop_assert_eq!(w[1].support.len(), 10);
            let nz: IndexSet = w[1].x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
            prop_assert!(nz.is_subset(&w[1].support));
        }
    }
}
