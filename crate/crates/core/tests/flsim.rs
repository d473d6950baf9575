mod common;

use common::{brute_centroids, near_member};
use fedcent::attacks::{AttackKind, AttackSpec};
use fedcent::candidates::{centroid_hyperbox, trimmed_trusted_hyperbox};
use fedcent::dataio::{synth_blobs, Dataset};
use fedcent::flsim::{
    evaluate_model, forward_loss_grad, init_model, Activation, MlpConfig, Mode, Simulation,
    TrainConfig,
};
use fedcent::seed;
use ndarray::Array2;
use rand::Rng;

fn blobs() -> (Dataset, Dataset) {
    synth_blobs(8, 4, 60, 0.8, 21)
        .unwrap()
        .split(0.25, 21)
        .unwrap()
}

fn max_relative_fd_error(sizes: &[usize], seed_value: u64) -> f64 {
    let mut rng = seed::rng(seed_value);
    let params = init_model(&MlpConfig {
        layer_sizes: sizes.to_vec(),
        activation: Activation::Relu,
        init_seed: seed_value,
    })
    .unwrap();
    let mut params = params;
    // Nonzero biases so hidden units are not all symmetric.
    for x in params.flat.iter_mut() {
        *x += rng.random_range(-0.1..0.1);
    }
    let batch = 5;
    let x = Array2::from_shape_fn((batch, sizes[0]), |_| rng.random_range(-1.0..1.0));
    let labels: Vec<usize> = (0..batch)
        .map(|_| rng.random_range(0..*sizes.last().unwrap()))
        .collect();
    let (_, grad) = forward_loss_grad(&params, x.view(), &labels).unwrap();
    let h = 1e-5;
    let mut worst = 0.0_f64;
    for k in 0..params.len() {
        let mut plus = params.clone();
        plus.flat[k] += h;
        let mut minus = params.clone();
        minus.flat[k] -= h;
        let fp = forward_loss_grad(&plus, x.view(), &labels).unwrap().0;
        let fm = forward_loss_grad(&minus, x.view(), &labels).unwrap().0;
        let fd = (fp - fm) / (2.0 * h);
        let err = (grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

#[test]
fn gradient_matches_finite_differences() {
    for s in 0..10 {
        let err = max_relative_fd_error(&[4, 3, 2], s);
        assert!(err <= 1e-4, "seed {s}: {err}");
        let err = max_relative_fd_error(&[5, 4, 3, 3], 100 + s);
        assert!(err <= 1e-4, "seed {s}: {err}");
    }
}

#[test]
fn runs_are_deterministic() {
    let (train, test) = blobs();
    let mut cfg = TrainConfig::new(Mode::FedAvg, 4, 0.2, 7, 2, "box");
    cfg.attack = AttackSpec {
        kind: AttackKind::GaussianNoise { sigma: 1.0 },
        f: 2,
    };
    cfg.seed = 5;
    let strip = |mut v: Vec<fedcent::flsim::RoundRecord>| {
        v.iter_mut().for_each(|r| r.elapsed_ms = 0.0);
        v
    };
    let a = strip(
        Simulation::new(cfg.clone(), &train, &test)
            .unwrap()
            .run()
            .unwrap(),
    );
    let b = strip(Simulation::new(cfg, &train, &test).unwrap().run().unwrap());
    assert_eq!(a, b);
}

#[test]
fn single_full_batch_step_matches_fedsgd() {
    let (train, test) = blobs();
    let mut sgd = TrainConfig::new(Mode::FedSgd, 3, 0.5, 4, 1, "mean");
    sgd.seed = 3;
    let mut avg = sgd.clone();
    avg.mode = Mode::FedAvg;
    avg.local_steps = Some(1);
    avg.batch_size = train.len();
    let mut a = Simulation::new(sgd, &train, &test).unwrap();
    let mut b = Simulation::new(avg, &train, &test).unwrap();
    for _ in 0..3 {
        a.step().unwrap();
        b.step().unwrap();
        for (x, y) in a.params().flat.iter().zip(&b.params().flat) {
            assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn separable_data_is_learned_by_fedsgd() {
    let data = synth_blobs(4, 3, 40, 0.2, 8).unwrap();
    let mut cfg = TrainConfig::new(Mode::FedSgd, 200, 0.5, 4, 1, "mean");
    cfg.hidden = vec![8];
    let mut sim = Simulation::new(cfg, &data, &data).unwrap();
    let records = sim.run().unwrap();
    assert!(records.iter().any(|r| r.accuracy == 1.0));
    assert_eq!(evaluate_model(sim.params(), &data).unwrap().0, 1.0);
}

#[test]
fn identical_clients_make_every_aggregator_agree_with_mean() {
    let row = [0.3, -0.7, 1.1];
    let features = Array2::from_shape_fn((8, 3), |(_, k)| row[k]);
    let data = Dataset::new(features, vec![1; 8], 2).unwrap();
    for name in ["ball_center", "mda", "box"] {
        let cfg = TrainConfig::new(Mode::FedSgd, 1, 0.3, 4, 1, name);
        let mut sim = Simulation::new(cfg, &data, &data).unwrap();
        let out = sim.step_detailed().unwrap();
        assert!(out.layout.vectors().all(|v| v == out.layout.vector(0)));
        for (a, b) in out.aggregation.output.iter().zip(out.layout.vector(0)) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{name}");
        }
    }
}

#[test]
fn sign_flip_rounds_stay_within_guarantees() {
    let (train, test) = blobs();
    for name in ["mda", "box"] {
        let mut cfg = TrainConfig::new(Mode::FedSgd, 5, 0.3, 10, 3, name);
        cfg.attack = AttackSpec {
            kind: AttackKind::SignFlip,
            f: 1,
        };
        let mut sim = Simulation::new(cfg, &train, &test).unwrap();
        while !sim.is_done() {
            let out = sim.step_detailed().unwrap();
            let r = &out.record;
            assert!((0.0..=1.0).contains(&r.accuracy));
            match name {
                "mda" => assert!(near_member(
                    &brute_centroids(&out.layout),
                    &out.aggregation.output
                )),
                _ => {
                    assert!(trimmed_trusted_hyperbox(&out.layout)
                        .contains(&out.aggregation.output, 1e-9));
                    assert!(centroid_hyperbox(&out.layout).contains(&out.aggregation.output, 1e-9));
                }
            }
            let bound = if name == "mda" {
                2.0 + 1e-6
            } else {
                2.0 * 10f64.sqrt() + 1e-6
            };
            if r.rad_cov.unwrap() > 1e-12 {
                assert!(r.ratio.unwrap().value() <= bound, "{name}: {:?}", r.ratio);
            }
        }
    }
}

#[test]
fn omitted_clients_shrink_the_layout() {
    let (train, test) = blobs();
    for mode in [Mode::FedSgd, Mode::FedAvg] {
        let mut cfg = TrainConfig::new(mode, 2, 0.3, 7, 2, "box");
        cfg.attack = AttackSpec {
            kind: AttackKind::Omit,
            f: 2,
        };
        let mut sim = Simulation::new(cfg, &train, &test).unwrap();
        let out = sim.step_detailed().unwrap();
        assert_eq!(out.layout.m(), 5);
        assert!(out.layout.ids().all(|id| !sim.attacked().contains(&id)));
    }
}
