//! Acceptance suite: every release criterion as a test, each printing a
//! single PASS line (run with `-- --nocapture` to see them).
//!
//! Criteria 1-6 are exact property and oracle checks; 7-9 exercise the
//! full pipeline on the simulator, including training both networks once
//! and sharing them across tests.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use bldc_core::estimator::{reconstruct_estimate, PositionEstimator, SpeedEstimator};
use bldc_core::features::{position_features, speed_ratio1, speed_ratio2, FeatureScaling};
use bldc_core::metrics::{f_score, mae, mae_wrapped_deg, ConfusionCounts, MetricsAccumulator};
use bldc_core::mlp::{split_dataset, train_on_split, BatchMode, Mlp, TrainConfig};
use bldc_core::motor::{
    bemf, commutation_step, run_profile, trapezoid_shape, MotorParams, SimConfig, SpeedProfile,
};
use bldc_core::num::{wrap360, Rng};
use bldc_core::pipeline::{
    build_position_dataset, build_speed_dataset, evaluate_speed, run_conditioned, sensorless_run,
    Feedback, PipelineConfig,
};
use bldc_core::signal::{ConditioningConfig, SignalChain};
use bldc_core::vsn::{angle_to_vsn, slot_midpoint_deg, vsn_to_label};

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(detail());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("{}: PASS", self.name);
        } else {
            println!("{}: FAIL - {}", self.name, self.failures.join("; "));
            panic!("{} failed: {}", self.name, self.failures.join("; "));
        }
    }
}

// ---------------------------------------------------------------------------
// Shared trained models for criteria 7 and 8.
// ---------------------------------------------------------------------------

struct Trained {
    position: Mlp,
    speed: Mlp,
    scaling: FeatureScaling,
    params: MotorParams,
    sim_cfg: SimConfig,
    cond_cfg: ConditioningConfig,
    pl_cfg: PipelineConfig,
    train_seconds: f64,
}

static TRAINED: OnceLock<Trained> = OnceLock::new();

fn trained() -> &'static Trained {
    TRAINED.get_or_init(|| {
        let t0 = Instant::now();
        let params = MotorParams::maxon_ec45();
        let sim_cfg = SimConfig::default();
        let cond_cfg = ConditioningConfig::for_rated_voltage(params.rated_voltage);
        let pl_cfg = PipelineConfig::default();
        let scaling = FeatureScaling::default();

        let tri = SpeedProfile::triangle(85.0, 1450.0, 12.0, 30.0);
        let ud = SpeedProfile::up_down(34.0);
        let run1 = run_conditioned(&tri, &params, &sim_cfg, &cond_cfg, &pl_cfg, 1101).unwrap();
        let run2 = run_conditioned(&ud, &params, &sim_cfg, &cond_cfg, &pl_cfg, 1102).unwrap();

        let mut ds = build_position_dataset(&run1.rows, params.pole_pairs, &scaling).unwrap();
        ds.merge(&build_position_dataset(&run2.rows, params.pole_pairs, &scaling).unwrap())
            .unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.3,
            max_epochs: 1200,
            batch_mode: BatchMode::Mini(1024),
            early_stop_patience: 150,
            split_fractions: (0.4, 0.1, 0.5),
            seed: 42,
        };
        let (tr, va, _) = split_dataset(&ds, &cfg).unwrap();
        let (position, _) = train_on_split(&tr, &va, (10, 5, 2), &cfg).unwrap();

        let mut sds = build_speed_dataset(
            &run1.rows,
            PositionEstimator::new(position.clone(), scaling, params.pole_pairs).unwrap(),
            &pl_cfg,
            params.pole_pairs,
        )
        .unwrap();
        sds.merge(
            &build_speed_dataset(
                &run2.rows,
                PositionEstimator::new(position.clone(), scaling, params.pole_pairs).unwrap(),
                &pl_cfg,
                params.pole_pairs,
            )
            .unwrap(),
        )
        .unwrap();
        let (str_, sva, _) = split_dataset(&sds, &cfg).unwrap();
        let (speed, _) = train_on_split(&str_, &sva, (21, 10, 1), &cfg).unwrap();

        Trained {
            position,
            speed,
            scaling,
            params,
            sim_cfg,
            cond_cfg,
            pl_cfg,
            train_seconds: t0.elapsed().as_secs_f64(),
        }
    })
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_gradient_correctness() {
    let mut c = Criterion::new("criterion 1 (gradient correctness)");
    let t0 = Instant::now();
    let mut rng = Rng::seed_from(3001);
    let h = 1e-5;
    for case in 0..50u64 {
        let n_in = 1 + (rng.next_u64() % 21) as usize;
        let n_hidden = 1 + (rng.next_u64() % 10) as usize;
        let n_out = 1 + (rng.next_u64() % 2) as usize;
        let net = Mlp::new(n_in, n_hidden, n_out, 7000 + case);
        let x: Vec<f64> = (0..n_in).map(|_| rng.range(-1.5, 1.5)).collect();
        let y: Vec<f64> = (0..n_out).map(|_| rng.range(-1.5, 1.5)).collect();
        let (g1, g2) = net.backprop_gradients(&x, &y).unwrap();

        let mut num = Vec::with_capacity(g1.len() + g2.len());
        for layer in 0..2 {
            let len = if layer == 0 { g1.len() } else { g2.len() };
            for idx in 0..len {
                let mut plus = net.clone();
                let mut minus = net.clone();
                if layer == 0 {
                    plus.theta1[idx] += h;
                    minus.theta1[idx] -= h;
                } else {
                    plus.theta2[idx] += h;
                    minus.theta2[idx] -= h;
                }
                num.push((plus.cost(&x, &y).unwrap() - minus.cost(&x, &y).unwrap()) / (2.0 * h));
            }
        }
        let analytic: Vec<f64> = g1.iter().chain(&g2).copied().collect();
        let diff: f64 = analytic
            .iter()
            .zip(&num)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = analytic.iter().map(|v| v * v).sum::<f64>().sqrt()
            + num.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = diff / norm.max(1e-12);
        c.check(rel < 1e-6, || {
            format!("case {case} ({n_in},{n_hidden},{n_out}): relative error {rel:.2e}")
        });
    }
    let elapsed = t0.elapsed().as_secs_f64();
    c.check(elapsed < 5.0, || format!("took {elapsed:.1}s (budget 5s)"));
    c.finish();
}

// ---------------------------------------------------------------------------
// 2. Formula oracles
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_formula_oracles() {
    let mut c = Criterion::new("criterion 2 (formula oracles)");
    let t0 = Instant::now();
    let mut rng = Rng::seed_from(3002);
    let rel_ok = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);

    // Voltage products.
    for _ in 0..1000 {
        let v_now = [
            rng.range(-5.0, 5.0),
            rng.range(-5.0, 5.0),
            rng.range(-5.0, 5.0),
        ];
        let v_next = [
            rng.range(-5.0, 5.0),
            rng.range(-5.0, 5.0),
            rng.range(-5.0, 5.0),
        ];
        let dt = rng.range(1e-6, 1e-2);
        let f = position_features(v_now, v_next, dt).unwrap();
        for k in 0..3 {
            let expect = v_now[k] * v_next[k];
            c.check(rel_ok(f.volt_mul[k], expect), || {
                format!("volt_mul[{k}]: {} vs {expect}", f.volt_mul[k])
            });
            c.check(
                (f.volt_mul[k] < 0.0)
                    == (v_now[k].signum() != v_next[k].signum()
                        && v_now[k] != 0.0
                        && v_next[k] != 0.0),
                || "zero-crossing sign rule violated".to_string(),
            );
        }
    }

    // Window ratios.
    for _ in 0..1000 {
        let mut w = Vec::with_capacity(10);
        let mut t = rng.range(0.0, 1.0);
        let mut b = rng.range(-720.0, 720.0);
        for _ in 0..10 {
            t += rng.range(1e-5, 1e-2);
            b += rng.range(-30.0, 60.0);
            w.push((b, t));
        }
        let got = speed_ratio1(&w, 10).unwrap();
        for p in 1..10 {
            let expect = (w[9].0 - w[9 - p].0) / (w[9].1 - w[9 - p].1);
            c.check(rel_ok(got[p - 1], expect), || {
                format!("ratio1 p={p}: {} vs {expect}", got[p - 1])
            });
        }
    }

    // Per-state cycle ratios.
    for _ in 0..1000 {
        let mut pairs: [Option<((f64, f64), (f64, f64))>; 12] = [None; 12];
        for pair in pairs.iter_mut() {
            let t0p = rng.range(0.0, 1.0);
            let b0 = rng.range(-720.0, 720.0);
            *pair = Some((
                (b0, t0p),
                (b0 + rng.range(-90.0, 90.0), t0p + rng.range(1e-4, 0.5)),
            ));
        }
        let (got, _) = speed_ratio2(&pairs).unwrap();
        for (q, pair) in pairs.iter().enumerate() {
            let ((b0, t0p), (b1, t1p)) = pair.unwrap();
            let expect = (b1 - b0) / (t1p - t0p);
            c.check(rel_ok(got[q], expect), || {
                format!("ratio2 q={}: {} vs {expect}", q + 1, got[q])
            });
        }
    }

    // F-score.
    for _ in 0..1000 {
        let mut counts = ConfusionCounts::new();
        for _ in 0..100 {
            let truth = (rng.next_u64() % 12) as usize;
            let pred = match rng.next_u64() % 4 {
                0 => None,
                1 => Some((rng.next_u64() % 12) as usize),
                _ => Some(truth),
            };
            counts.record(truth, pred);
        }
        let tp = counts.sum_tp() as f64;
        let fp = counts.sum_fp() as f64;
        let fn_ = counts.sum_fn() as f64;
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let expect = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
        c.check(rel_ok(f_score(&counts), expect), || {
            format!("f-score {} vs {expect}", f_score(&counts))
        });
    }

    // Mean absolute error, plain and wrapped.
    for _ in 0..1000 {
        let n = 1 + (rng.next_u64() % 24) as usize;
        let a: Vec<f64> = (0..n).map(|_| rng.range(-400.0, 400.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.range(-400.0, 400.0)).collect();
        let expect = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
        c.check(rel_ok(mae(&a, &b).unwrap(), expect), || {
            format!("mae {} vs {expect}", mae(&a, &b).unwrap())
        });
        let aw: Vec<f64> = a.iter().map(|v| wrap360(*v)).collect();
        let bw: Vec<f64> = b.iter().map(|v| wrap360(*v)).collect();
        let expect_w = aw
            .iter()
            .zip(&bw)
            .map(|(x, y)| {
                let d = (x - y).abs();
                d.min(360.0 - d)
            })
            .sum::<f64>()
            / n as f64;
        c.check(rel_ok(mae_wrapped_deg(&aw, &bw).unwrap(), expect_w), || {
            format!(
                "wrapped mae {} vs {expect_w}",
                mae_wrapped_deg(&aw, &bw).unwrap()
            )
        });
    }

    let elapsed = t0.elapsed().as_secs_f64();
    c.check(elapsed < 10.0, || {
        format!("took {elapsed:.1}s (budget 10s)")
    });
    c.finish();
}

// ---------------------------------------------------------------------------
// 3. State geometry
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_state_geometry() {
    let mut c = Criterion::new("criterion 3 (state geometry)");
    let kp = 8u32;
    let width = 30.0 / kp as f64;
    // Slots tile [0, 360) on a 0.01-degree grid with no gaps or overlaps.
    let mut prev_slot = 0u32;
    for i in 0..36_000 {
        let a = i as f64 * 0.01;
        let label = angle_to_vsn(a, kp).unwrap();
        let lo = (label.global_index - 1) as f64 * width;
        let hi = label.global_index as f64 * width;
        c.check(a >= lo && a < hi, || {
            format!("angle {a} assigned slot [{lo}, {hi})")
        });
        c.check(
            label.global_index == prev_slot || label.global_index == prev_slot + 1,
            || format!("slot sequence jumped at {a}"),
        );
        prev_slot = label.global_index;
    }
    c.check(prev_slot == 96, || format!("last slot {prev_slot}"));

    // All 96 labels are unit vectors.
    for g in 0..96u32 {
        let (s, cs) = vsn_to_label((g % 12 + 1) as u8, g / 12 + 1, kp).unwrap();
        let norm = s * s + cs * cs;
        c.check((norm - 1.0).abs() <= 1e-12, || {
            format!("slot {} norm {}", g + 1, norm)
        });
    }

    // Worked example: state 2 of the first cycle reads (0.098, 0.995).
    let (s, cs) = vsn_to_label(2, 1, kp).unwrap();
    c.check(
        (s * 1000.0).round() / 1000.0 == 0.098 && (cs * 1000.0).round() / 1000.0 == 0.995,
        || format!("worked example ({s:.6}, {cs:.6})"),
    );
    c.finish();
}

// ---------------------------------------------------------------------------
// 4. Angle reconstruction
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_angle_reconstruction() {
    let mut c = Criterion::new("criterion 4 (angle reconstruction)");
    let kp = 8u32;
    let threshold = 0.0328;
    for g in 0..96u32 {
        let (s, cs) = vsn_to_label((g % 12 + 1) as u8, g / 12 + 1, kp).unwrap();
        let est = reconstruct_estimate(s, cs, kp, threshold);
        let mid = slot_midpoint_deg(g, kp);
        let err = (est.angle_hat.unwrap() - mid).abs();
        c.check(err < 1e-9, || {
            format!("slot {}: error {err:.2e} deg", g + 1)
        });
        c.check(est.global_slot_hat == Some(g + 1), || {
            format!("slot {} classified {:?}", g + 1, est.global_slot_hat)
        });
    }
    // Scaling by any positive factor leaves the angle unchanged.
    let mut rng = Rng::seed_from(3004);
    for _ in 0..1000 {
        let s = rng.range(-1.0, 1.0);
        let cs = rng.range(-1.0, 1.0);
        if s == 0.0 && cs == 0.0 {
            continue;
        }
        let base = reconstruct_estimate(s, cs, kp, threshold)
            .angle_hat
            .unwrap();
        for scale in [1e-9, 1e-3, 0.5, 3.0, 1e6] {
            let scaled = reconstruct_estimate(scale * s, scale * cs, kp, threshold)
                .angle_hat
                .unwrap();
            let d = bldc_core::num::wrapped_diff_deg(base, scaled).abs();
            c.check(d < 1e-9, || {
                format!("angle moved {d:.2e} deg under scale {scale}")
            });
        }
    }
    c.finish();
}

// ---------------------------------------------------------------------------
// 5. Simulator physics
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_simulator_physics() {
    let mut c = Criterion::new("criterion 5 (simulator physics)");
    let params = MotorParams::maxon_ec45();

    // Zero speed gives exactly zero back-EMF.
    for deg in [0.0, 45.0, 133.0, 299.5] {
        c.check(bemf(deg, 0.0, &params) == [0.0; 3], || {
            format!("nonzero BEMF at standstill (angle {deg})")
        });
    }
    // Phase symmetry: each phase is a 120-degree-shifted copy.
    for k in 0..3600 {
        let th = k as f64 * 0.1;
        let e = bemf(th, 777.0, &params);
        let shifted = bemf(th + 120.0, 777.0, &params);
        c.check((e[0] - shifted[1]).abs() < 1e-12, || {
            format!("phase shift asymmetry at {th}")
        });
    }
    // The shape integrates to zero over one period.
    let n = 360_000;
    let mut sum = 0.0;
    for k in 0..n {
        sum += trapezoid_shape((k as f64 + 0.5) * (360.0 / n as f64));
    }
    sum *= 360.0 / n as f64;
    c.check(sum.abs() < 1e-9, || format!("shape integral {sum}"));

    // Constant speed: mechanical period equals pole pairs times the
    // electrical period, within one sample.
    let profile = SpeedProfile::constant(1500.0, 0.3);
    let trace = run_profile(&profile, &params, &SimConfig::default(), 3005).unwrap();
    let t_start = trace.profile_start_time + 0.1;
    let samples: Vec<_> = trace.samples.iter().filter(|s| s.time >= t_start).collect();
    let mut mech_wraps = Vec::new();
    let mut seq_wraps = Vec::new();
    let mut prev = samples[0];
    for s in &samples[1..] {
        if s.mech_deg < prev.mech_deg {
            mech_wraps.push(s.time);
        }
        if s.seq == 1 && prev.seq == 6 {
            seq_wraps.push(s.time);
        }
        prev = s;
        if mech_wraps.len() >= 3 {
            break;
        }
    }
    c.check(mech_wraps.len() >= 2 && seq_wraps.len() >= 9, || {
        "not enough cycles captured".to_string()
    });
    if mech_wraps.len() >= 2 && seq_wraps.len() >= 9 {
        let t_m = mech_wraps[1] - mech_wraps[0];
        let t_e = (seq_wraps[8] - seq_wraps[0]) / 8.0;
        let err = (t_m - params.pole_pairs as f64 * t_e).abs();
        c.check(err <= trace.acquisition_period + 1e-12, || {
            format!(
                "T_m {t_m:.6}s vs K_p*T_e {:.6}s (err {err:.2e})",
                params.pole_pairs as f64 * t_e
            )
        });
    }
    // Table consistency on every sample.
    for s in &samples {
        let elec = wrap360(s.mech_deg * params.pole_pairs as f64);
        c.check(commutation_step(elec).unwrap().seq == s.seq, || {
            format!("sequence mismatch at t={}", s.time)
        });
    }
    c.finish();
}

// ---------------------------------------------------------------------------
// 6. Filter attenuation
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_filter_attenuation() {
    let mut c = Criterion::new("criterion 6 (filter attenuation at 150 kHz)");
    let cond = ConditioningConfig::default();
    let fs = 1e6;
    let chain = SignalChain::new(cond.clone(), fs).unwrap();
    let analytic = chain.filter_magnitude_at(150e3);

    let mut chain = SignalChain::new(cond, fs).unwrap();
    let amp = 0.4;
    let mut peak: f64 = 0.0;
    let n = 80_000;
    for i in 0..n {
        let t = i as f64 / fs;
        let x = amp * (2.0 * core::f64::consts::PI * 150e3 * t).sin();
        let y = chain.process_linear(0, x);
        if i > n / 2 {
            peak = peak.max(y.abs());
        }
    }
    let measured = peak / (amp * chain.config().dc_gain());
    let analytic_db = 20.0 * analytic.log10();
    let measured_db = 20.0 * measured.log10();
    // Measured attenuation within 1 dB of (and at least as strong as) the
    // designed cascade response.
    c.check(measured_db <= analytic_db + 1.0, || {
        format!("measured {measured_db:.2} dB vs designed {analytic_db:.2} dB")
    });
    c.check(analytic_db < -20.0, || {
        format!("cascade only reaches {analytic_db:.2} dB at 150 kHz")
    });
    println!(
        "criterion 6 detail: designed {analytic_db:.2} dB, measured {measured_db:.2} dB at 150 kHz"
    );
    c.finish();
}

// ---------------------------------------------------------------------------
// 7. End-to-end trend reproduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_end_to_end_trends() {
    let mut c = Criterion::new("criterion 7 (end-to-end trend reproduction)");
    let tr = trained();
    let t0 = Instant::now(); // evaluation only; training time tracked separately
    let speeds = [125.0, 325.0, 600.0, 850.0, 1200.0, 1500.0];
    let cycles = 500.0;

    let results: Vec<(f64, MetricsAccumulator, f64)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, &rpm) in speeds.iter().enumerate() {
            handles.push(scope.spawn(move || {
                let out = evaluate_speed(
                    rpm,
                    cycles,
                    &tr.params,
                    &tr.sim_cfg,
                    &tr.cond_cfg,
                    &tr.pl_cfg,
                    PositionEstimator::new(tr.position.clone(), tr.scaling, tr.params.pole_pairs)
                        .unwrap(),
                    SpeedEstimator::new(tr.speed.clone(), tr.scaling).unwrap(),
                    4000 + i as u64,
                    0,
                )
                .unwrap();
                (rpm, out.accumulator, out.cycles)
            }));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut pooled = MetricsAccumulator::new();
    let mut success_125 = 0.0;
    let mut min_success_hi = f64::INFINITY;
    for (rpm, acc, run_cycles) in &results {
        pooled.merge(acc);
        let row = acc.clone().into_row(Some(*rpm));
        println!(
            "criterion 7 detail: {rpm:>6.0} rpm ({run_cycles:.0} cycles): F={:.3} \
             successful={:.3} unknown={:.3} erroneous={:.3} maeE={:.2}deg rel_speed={:.2}%",
            row.f_score,
            row.successful,
            row.unknown,
            row.erroneous,
            row.mae_elect_deg,
            row.rel_speed_err_pct
        );
        c.check(*run_cycles >= cycles, || {
            format!("{rpm} rpm ran only {run_cycles:.0} cycles")
        });
        if *rpm == 125.0 {
            success_125 = row.successful;
        } else if *rpm >= 325.0 {
            min_success_hi = min_success_hi.min(row.successful);
            c.check(row.mae_elect_deg <= 2.0, || {
                format!(
                    "{rpm} rpm: electrical MAE {:.2} > 2.0 deg",
                    row.mae_elect_deg
                )
            });
        }
    }
    let aggregate = pooled.into_row(None);
    println!(
        "criterion 7 detail: aggregate F={:.3} successful={:.3} rel_speed={:.2}% \
         ({} samples); evaluation {:.0}s, training {:.0}s",
        aggregate.f_score,
        aggregate.successful,
        aggregate.rel_speed_err_pct,
        aggregate.samples,
        t0.elapsed().as_secs_f64(),
        tr.train_seconds
    );
    c.check(aggregate.f_score >= 0.90, || {
        format!("aggregate F {:.3} < 0.90", aggregate.f_score)
    });
    c.check(success_125 < min_success_hi, || {
        format!(
            "no low-speed degradation: success(125) {success_125:.3} vs min at >=325 \
             {min_success_hi:.3}"
        )
    });
    c.check(aggregate.rel_speed_err_pct <= 5.0, || {
        format!(
            "relative speed error {:.2}% > 5%",
            aggregate.rel_speed_err_pct
        )
    });
    let total = t0.elapsed().as_secs_f64() + tr.train_seconds;
    c.check(total < 600.0, || {
        format!("full run took {total:.0}s (budget 600s)")
    });
    c.finish();
}

// ---------------------------------------------------------------------------
// 8. Sensorless loop
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_sensorless_loop() {
    let mut c = Criterion::new("criterion 8 (sensorless loop)");
    let tr = trained();

    let outcome = sensorless_run(
        850.0,
        100.0,
        &tr.params,
        &tr.sim_cfg,
        &tr.cond_cfg,
        &tr.pl_cfg,
        Feedback::Estimated {
            position: PositionEstimator::new(tr.position.clone(), tr.scaling, tr.params.pole_pairs)
                .unwrap(),
            speed: SpeedEstimator::new(tr.speed.clone(), tr.scaling).unwrap(),
        },
        4100,
        50,
    );
    match outcome {
        Ok(out) => {
            c.check(out.cycles >= 100.0, || {
                format!("only {:.1} cycles sustained", out.cycles)
            });
            let mean_speed =
                out.trace.iter().map(|s| s.speed_rpm).sum::<f64>() / out.trace.len() as f64;
            println!(
                "criterion 8 detail: sustained {:.0} cycles at mean {mean_speed:.0} rpm",
                out.cycles
            );
            c.check((mean_speed - 850.0).abs() < 100.0, || {
                format!("mean speed {mean_speed:.0} rpm drifted from 850")
            });
        }
        Err(e) => c.check(false, || format!("loss of lock: {e}")),
    }

    // Perfect-oracle substitution reproduces the sensor-based run bit for
    // bit.
    let a = sensorless_run(
        850.0,
        20.0,
        &tr.params,
        &tr.sim_cfg,
        &tr.cond_cfg,
        &tr.pl_cfg,
        Feedback::Sensor,
        4200,
        10,
    )
    .unwrap();
    let b = sensorless_run(
        850.0,
        20.0,
        &tr.params,
        &tr.sim_cfg,
        &tr.cond_cfg,
        &tr.pl_cfg,
        Feedback::Oracle,
        4200,
        10,
    )
    .unwrap();
    c.check(a.trace.len() == b.trace.len(), || {
        format!("trace lengths {} vs {}", a.trace.len(), b.trace.len())
    });
    for (x, y) in a.trace.iter().zip(&b.trace) {
        let same = x.time.to_bits() == y.time.to_bits()
            && x.mech_deg.to_bits() == y.mech_deg.to_bits()
            && x.speed_rpm.to_bits() == y.speed_rpm.to_bits()
            && x.seq == y.seq
            && (0..3).all(|k| x.v_raw[k].to_bits() == y.v_raw[k].to_bits());
        c.check(same, || format!("oracle trace diverges at t={}", x.time));
        if !c.failures.is_empty() {
            break;
        }
    }
    c.finish();
}

// ---------------------------------------------------------------------------
// 9. Determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_determinism() {
    let mut c = Criterion::new("criterion 9 (determinism)");
    let bin = env!("CARGO_BIN_EXE_bldc-workbench");
    let base = std::env::temp_dir().join(format!("bldc-wb-accept-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();
    let path = |s: &str| base.join(s).to_str().unwrap().to_string();

    let run_stage = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "stage {:?}: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
    };

    // Two passes of the full pipeline with identical seeds.
    for pass in ["p1", "p2"] {
        run_stage(&[
            "simulate",
            "--profile",
            "triangle",
            "--duration",
            "2.5",
            "--seed",
            "77",
            "--out-dir",
            &path(&format!("{pass}/sim")),
        ]);
        run_stage(&[
            "label",
            "--input",
            &path(&format!("{pass}/sim/conditioned.csv")),
            "--out-dir",
            &path(&format!("{pass}/lab")),
        ]);
        run_stage(&[
            "train",
            "--dataset",
            &path(&format!("{pass}/lab/labeled.csv")),
            "--target",
            "position",
            "--epochs",
            "4",
            "--seed",
            "5",
            "--out-dir",
            &path(&format!("{pass}/pos")),
        ]);
        run_stage(&[
            "train",
            "--dataset",
            &path(&format!("{pass}/lab/labeled.csv")),
            "--target",
            "speed",
            "--position-model",
            &path(&format!("{pass}/pos/model.json")),
            "--epochs",
            "4",
            "--seed",
            "6",
            "--out-dir",
            &path(&format!("{pass}/spd")),
        ]);
        run_stage(&[
            "eval",
            "--position-model",
            &path(&format!("{pass}/pos/model.json")),
            "--speed-model",
            &path(&format!("{pass}/spd/model.json")),
            "--speeds",
            "600",
            "--cycles",
            "4",
            "--seed",
            "7",
            "--out-dir",
            &path(&format!("{pass}/ev")),
        ]);
        run_stage(&[
            "run",
            "--position-model",
            &path(&format!("{pass}/pos/model.json")),
            "--speed-model",
            &path(&format!("{pass}/spd/model.json")),
            "--sensor-reference",
            "--rpm",
            "600",
            "--cycles",
            "5",
            "--seed",
            "8",
            "--out-dir",
            &path(&format!("{pass}/run")),
        ]);
    }

    for file in [
        "sim/conditioned.csv",
        "sim/trace.csv",
        "sim/metadata.json",
        "lab/labeled.csv",
        "lab/label_stats.json",
        "pos/model.json",
        "pos/history.csv",
        "spd/model.json",
        "spd/history.csv",
        "ev/report.csv",
        "ev/report.json",
        "ev/est_600.csv",
        "run/trace.csv",
        "run/estimates.csv",
    ] {
        let a = std::fs::read(base.join("p1").join(file)).unwrap();
        let b = std::fs::read(base.join("p2").join(file)).unwrap();
        c.check(a == b, || format!("{file} differs between identical runs"));
    }
    let _ = std::fs::remove_dir_all(&base);
    c.finish();
}
