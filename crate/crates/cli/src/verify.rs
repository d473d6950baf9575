//! Randomized property suites behind `fedcent verify`.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::str::FromStr;

use fedcent::aggregators::{aggregate_box, aggregate_mda, AGGREGATOR_NAMES};
use fedcent::candidates::{
    candidate_centroids, centroid_hyperbox, covering_ball, trimmed_trusted_hyperbox,
    SAFE_AREA_MAX_N,
};
use fedcent::evaluation::{
    approximation_ratio, box_lb_directions, check_validity, gen_box_lb_instance,
    gen_convex_lb_instance, gen_random_instance, FaultStrategy, Validity, FAULT_STRATEGIES,
};
use fedcent::flsim::{forward_loss_grad, init_model, Activation, MlpConfig};
use fedcent::geometry::{euclidean_distance, hyperbox_intersection};
use fedcent::{get_aggregator, seed, ClientId, GroundTruth, Layout};
use ndarray::Array2;
use rand::Rng;

use crate::layout_file::format_layout;

const TAG_VERIFY: u64 = 0x7665_7269_6679;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Bounds,
    Lowerbounds,
    Gradients,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "geometry" => Suite::Geometry,
            "bounds" => Suite::Bounds,
            "lowerbounds" => Suite::Lowerbounds,
            "gradients" => Suite::Gradients,
            "all" => Suite::All,
            other => {
                return Err(format!(
                    "unknown suite `{other}` (valid: geometry, bounds, lowerbounds, gradients, all)"
                ))
            }
        })
    }
}

/// Outcome of one property over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Worst value of the checked quantity, when it is numeric.
    pub worst: Option<f64>,
    /// Description and layout dump of the first violation.
    pub reproducer: Option<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            trials: 0,
            violations: 0,
            worst: None,
            reproducer: None,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
            if self.reproducer.is_none() {
                self.reproducer = Some(what());
            }
        }
    }

    fn max(&mut self, v: f64) {
        self.worst = Some(self.worst.map_or(v, |w| w.max(v)));
    }

    fn min(&mut self, v: f64) {
        self.worst = Some(self.worst.map_or(v, |w| w.min(v)));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = format!("seed {}\n", self.seed);
        for c in &self.checks {
            let status = if c.violations == 0 { "ok  " } else { "FAIL" };
            write!(
                s,
                "{status} {:<34} trials {:>5}  violations {:>4}",
                c.name, c.trials, c.violations
            )
            .unwrap();
            if let Some(w) = c.worst {
                write!(s, "  worst {w:.6}").unwrap();
            }
            s.push('\n');
        }
        for c in self.checks.iter().filter(|c| c.reproducer.is_some()) {
            write!(
                s,
                "\nfirst violation of {}:\n{}",
                c.name,
                c.reproducer.as_deref().unwrap()
            )
            .unwrap();
        }
        s
    }
}

fn dump(what: String, layout: &Layout, faulty: &BTreeSet<ClientId>) -> String {
    format!("{what}\n{}", format_layout(layout, faulty))
}

/// Random instance for trial `k`: n <= 8, t < n/3, d <= 4.
fn random_instance(seed_value: u64, k: usize, all_faulty: bool) -> (Layout, GroundTruth) {
    let mut rng = seed::rng(seed::derive(seed_value, TAG_VERIFY, k as u64, 0));
    let n = rng.random_range(4..=8);
    let t = rng.random_range(1..=(n - 1) / 3);
    let d = rng.random_range(1..=4);
    let faulty = if all_faulty {
        t
    } else {
        rng.random_range(0..=t)
    };
    let strategy = FAULT_STRATEGIES[rng.random_range(0..FAULT_STRATEGIES.len())];
    gen_random_instance(n, t, d, faulty, strategy, &mut rng).expect("parameters are feasible")
}

pub fn run_suite(suite: Suite, seed_value: u64, trials: usize) -> Report {
    let checks = match suite {
        Suite::Geometry => geometry(seed_value, trials),
        Suite::Bounds => bounds(seed_value, trials),
        Suite::Lowerbounds => lower_bounds(),
        Suite::Gradients => gradients(seed_value, trials),
        Suite::All => [
            geometry(seed_value, trials),
            bounds(seed_value, trials),
            lower_bounds(),
            gradients(seed_value, trials),
        ]
        .concat(),
    };
    Report {
        seed: seed_value,
        checks,
    }
}

fn geometry(seed_value: u64, trials: usize) -> Vec<Check> {
    let mut ch = Check::new("centroid_box_matches_enumeration");
    let mut bx = Check::new("box_output_in_both_boxes");
    let mut mda = Check::new("mda_output_is_a_candidate");
    let mut ball = Check::new("ball_covers_candidates");
    let mut tth = Check::new("trimmed_box_inside_trusted_box");
    let mut meet = Check::new("trimmed_box_meets_centroid_box");
    let mut box_valid = Check::new("box_validity");
    for k in 0..trials {
        let (layout, truth) = random_instance(seed_value, k, false);
        let f = &truth.faulty;
        let cands = candidate_centroids(&layout).expect("small layout");
        let chb = centroid_hyperbox(&layout);
        let mut err = 0.0_f64;
        for j in 0..layout.dim() {
            let lo = cands
                .centroids
                .iter()
                .map(|c| c[j])
                .fold(f64::INFINITY, f64::min);
            let hi = cands
                .centroids
                .iter()
                .map(|c| c[j])
                .fold(f64::NEG_INFINITY, f64::max);
            let scale = lo.abs().max(hi.abs()).max(1.0);
            err = err
                .max((chb.lo()[j] - lo).abs() / scale)
                .max((chb.hi()[j] - hi).abs() / scale);
        }
        ch.max(err);
        ch.record(err <= 1e-12, || {
            dump(format!("relative error {err:e}"), &layout, f)
        });

        let tb = trimmed_trusted_hyperbox(&layout);
        let out = aggregate_box(&layout)
            .expect("box never fails on valid layouts")
            .output;
        bx.record(tb.contains(&out, 1e-9) && chb.contains(&out, 1e-9), || {
            dump(format!("output {out:?}"), &layout, f)
        });
        meet.record(
            hyperbox_intersection(&tb, &chb, 1e-9).unwrap().is_some(),
            || dump("disjoint".into(), &layout, f),
        );
        let th = truth.trusted_hyperbox();
        tth.record(
            th.contains(tb.lo(), 0.0) && th.contains(tb.hi(), 0.0),
            || dump("TTH not in TH".into(), &layout, f),
        );
        box_valid.record(
            check_validity(Validity::Box, &truth, &layout, &out, 1e-9),
            || dump(format!("output {out:?}"), &layout, f),
        );

        let m = aggregate_mda(&layout).unwrap().output;
        mda.record(cands.centroids.contains(&m), || {
            dump(format!("output {m:?}"), &layout, f)
        });

        let b = covering_ball(&layout, 1e-4).unwrap();
        let far = cands
            .centroids
            .iter()
            .map(|c| euclidean_distance(c, &b.center).unwrap())
            .fold(0.0, f64::max);
        ball.record(far <= b.radius * (1.0 + 1e-9) + 1e-12, || {
            dump(
                format!("candidate at {far} outside radius {}", b.radius),
                &layout,
                f,
            )
        });
    }

    // Identical honest vectors, adversarial faults.
    let mut strong = Check::new("mda_strong_validity");
    let mut weak = Check::new("weak_validity_all_aggregators");
    for k in 0..trials {
        let mut rng = seed::rng(seed::derive(seed_value, TAG_VERIFY, k as u64, 1));
        let n = rng.random_range(4..=9);
        let t = rng.random_range(1..=(n - 1) / 3);
        let d = rng.random_range(1..=3);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let strategy = FAULT_STRATEGIES[rng.random_range(0..FAULT_STRATEGIES.len())];
        let faulty_vecs: Vec<Option<Vec<f64>>> = (0..t)
            .map(|_| match strategy {
                FaultStrategy::Omit => None,
                FaultStrategy::Mimic => Some(v.clone()),
                _ => Some((0..d).map(|_| rng.random_range(-50.0..50.0)).collect()),
            })
            .collect();
        let honest: Vec<(ClientId, Vec<f64>)> = (0..n - t).map(|i| (i, v.clone())).collect();
        let mut received = honest.clone();
        received.extend(
            faulty_vecs
                .into_iter()
                .enumerate()
                .filter_map(|(j, x)| x.map(|x| (n - t + j, x))),
        );
        let faulty: BTreeSet<ClientId> = (n - t..n).collect();
        let layout = Layout::new(n, t, received).unwrap();
        let truth = GroundTruth::new(honest, faulty.clone()).unwrap();
        let out = aggregate_mda(&layout).unwrap().output;
        strong.record(
            check_validity(Validity::Strong, &truth, &layout, &out, 0.0),
            || dump(format!("output {out:?}"), &layout, &faulty),
        );

        let clean = Layout::new(n, t, (0..n).map(|i| (i, v.clone())).collect()).unwrap();
        let clean_truth = GroundTruth::new(clean.received().to_vec(), BTreeSet::new()).unwrap();
        for name in AGGREGATOR_NAMES {
            if *name == "safe_area" && d > 2 {
                continue;
            }
            let out = get_aggregator(name)
                .unwrap()
                .aggregate(&clean)
                .unwrap()
                .output;
            let tol = 1e-9 * v.iter().map(|x| x.abs()).fold(1.0, f64::max);
            weak.record(
                check_validity(Validity::Weak, &clean_truth, &clean, &out, tol),
                || dump(format!("{name} output {out:?}"), &clean, &BTreeSet::new()),
            );
        }
    }
    vec![ch, bx, mda, ball, tth, meet, box_valid, strong, weak]
}

/// Worst-case ratio bound of each aggregator, if it has one here.
pub fn ratio_bound(name: &str, n: usize, d: usize) -> Option<f64> {
    match name {
        "ball_center" => Some(1.0 + 1e-3),
        "mda" => Some(2.0 + 1e-6),
        "box" => Some(2.0 * (n.min(d) as f64).sqrt() + 1e-6),
        "safe_area" if d <= 2 && n <= SAFE_AREA_MAX_N => Some(2.0 * d as f64 + 1.0 + 1e-3),
        _ => None,
    }
}

fn bounds(seed_value: u64, trials: usize) -> Vec<Check> {
    let names = ["ball_center", "mda", "box", "safe_area"];
    let mut checks: Vec<Check> = names
        .iter()
        .map(|n| Check::new(&format!("{n}_ratio_bound")))
        .collect();
    for k in 0..trials {
        let (layout, truth) = random_instance(seed_value, k, true);
        let ball = covering_ball(&layout, 1e-6).unwrap();
        for (name, check) in names.iter().zip(&mut checks) {
            let Some(bound) = ratio_bound(name, layout.n(), layout.dim()) else {
                continue;
            };
            let out = get_aggregator(name)
                .unwrap()
                .aggregate(&layout)
                .unwrap()
                .output;
            let r = fedcent::evaluation::ratio_against_ball(&out, &truth, &ball)
                .unwrap()
                .ratio;
            check.max(r.value());
            check.record(r.value() <= bound, || {
                dump(format!("ratio {r} > {bound}"), &layout, &truth.faulty)
            });
        }
    }
    checks
}

fn lower_bounds() -> Vec<Check> {
    let mut point = Check::new("box_lb_trimmed_box_is_point");
    let mut ratio = Check::new("box_lb_forced_ratio");
    for (n, t, d) in [(4, 1, 3), (7, 2, 5), (10, 3, 8)] {
        let (layout, truth) = gen_box_lb_instance(n, t, d, 1.0).unwrap();
        point.record(trimmed_trusted_hyperbox(&layout).is_point(), || {
            dump(format!("n={n} t={t} d={d}"), &layout, &truth.faulty)
        });
        let out = aggregate_box(&layout).unwrap().output;
        let r = approximation_ratio(&out, &truth, &layout, 1e-6)
            .unwrap()
            .ratio
            .value();
        let want = (box_lb_directions(n, t, d) as f64 / 2.0).sqrt() - 1e-9;
        ratio.min(r);
        ratio.record(r >= want, || {
            dump(format!("ratio {r} < {want}"), &layout, &truth.faulty)
        });
    }
    let mut convex = Check::new("convex_lb_safe_area_ratio");
    for d in [1usize, 2] {
        let (layout, truth) = gen_convex_lb_instance(4, 1, d, 1.0).unwrap();
        let out = get_aggregator("safe_area")
            .unwrap()
            .aggregate(&layout)
            .unwrap()
            .output;
        let r = approximation_ratio(&out, &truth, &layout, 1e-6)
            .unwrap()
            .ratio
            .value();
        let want = 2.0 * d as f64 * 0.95;
        convex.min(r / (2.0 * d as f64));
        convex.record(r >= want, || {
            dump(format!("d={d}: ratio {r} < {want}"), &layout, &truth.faulty)
        });
    }
    vec![point, ratio, convex]
}

/// Mean cross-entropy and the on/off pattern of every hidden ReLU, from a
/// plain forward pass over the flat layout (per layer, row-major
/// `fan_in x fan_out` weights, then biases).
fn reference_forward(
    sizes: &[usize],
    flat: &[f64],
    x: &Array2<f64>,
    labels: &[usize],
) -> (f64, Vec<bool>) {
    let mut pattern = Vec::new();
    let mut loss = 0.0;
    for (row, &y) in labels.iter().enumerate() {
        let mut a: Vec<f64> = x.row(row).to_vec();
        let mut off = 0;
        for (l, w) in sizes.windows(2).enumerate() {
            let (fi, fo) = (w[0], w[1]);
            let mut z: Vec<f64> = flat[off + fi * fo..off + fi * fo + fo].to_vec();
            for (i, ai) in a.iter().enumerate() {
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj += ai * flat[off + i * fo + j];
                }
            }
            off += fi * fo + fo;
            if l + 2 < sizes.len() {
                pattern.extend(z.iter().map(|&v| v > 0.0));
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + a.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - a[y];
    }
    (loss / labels.len() as f64, pattern)
}

/// Largest relative error between the analytic gradient and central
/// differences with step 1e-5 of an independently computed loss. Coordinates
/// whose step switches a ReLU on or off are skipped, since the loss has a
/// kink there; the second value counts them.
pub fn finite_difference_error(sizes: &[usize], seed_value: u64) -> (f64, usize) {
    let mut rng = seed::rng(seed::derive(seed_value, TAG_VERIFY, 0, 2));
    let mut params = init_model(&MlpConfig {
        layer_sizes: sizes.to_vec(),
        activation: Activation::Relu,
        init_seed: seed_value,
    })
    .unwrap();
    for x in params.flat.iter_mut() {
        *x += rng.random_range(-0.1..0.1);
    }
    let batch = 6;
    let x = Array2::from_shape_fn((batch, sizes[0]), |_| rng.random_range(-1.0..1.0));
    let labels: Vec<usize> = (0..batch)
        .map(|_| rng.random_range(0..*sizes.last().unwrap()))
        .collect();
    let (_, grad) = forward_loss_grad(&params, x.view(), &labels).unwrap();
    let (_, base) = reference_forward(sizes, &params.flat, &x, &labels);
    let h = 1e-5;
    let mut worst = 0.0_f64;
    let mut skipped = 0;
    let mut flat = params.flat.clone();
    for k in 0..flat.len() {
        let orig = flat[k];
        flat[k] = orig + h;
        let (fp, pp) = reference_forward(sizes, &flat, &x, &labels);
        flat[k] = orig - h;
        let (fm, pm) = reference_forward(sizes, &flat, &x, &labels);
        flat[k] = orig;
        if pp != base || pm != base {
            skipped += 1;
            continue;
        }
        let fd = (fp - fm) / (2.0 * h);
        // Rounding alone makes the central difference off by ~1e-11, so
        // gradients below 1e-6 are compared on an absolute scale.
        worst = worst.max((grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-6));
    }
    (worst, skipped)
}

fn gradients(seed_value: u64, trials: usize) -> Vec<Check> {
    let mut c = Check::new("gradient_finite_difference");
    for k in 0..trials {
        let mut rng = seed::rng(seed::derive(seed_value, TAG_VERIFY, k as u64, 3));
        let depth = rng.random_range(2..=4);
        let sizes: Vec<usize> = (0..depth).map(|_| rng.random_range(2..=6)).collect();
        let s = seed::derive(seed_value, TAG_VERIFY, k as u64, 4);
        let (err, _) = finite_difference_error(&sizes, s);
        c.max(err);
        c.record(err <= 1e-4, || {
            format!("layer sizes {sizes:?}, seed {s}: relative error {err:e}\n")
        });
    }
    vec![c]
}
