//! Acceptance gate: one PASS/FAIL line per primary criterion.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use echo_core::dataset::{
    build, validate_dataset, write_scenes, AudioSource, BuildConfig, SceneRecord,
};
use echo_core::eval::{EgoDims, PublishedReference};
use echo_core::trajectory::{distance_to_polyline, reparameterize, speed_profile};
use echo_core::{
    arousal, emotionalize, evaluate, extract_features, modulate, normalize_features, obb_overlap,
    pitch_shift, synth_speech, time_stretch, ArousalWeights, AudioBuffer, EmotionLabel,
    EmotionProfileParams, EvalOptions, NormalizedFeatures, ObbBox, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(
        took <= budget,
        format!("took {took:.2?}, budget {budget:?}"),
    )
}

fn a_of(x: [f64; 4]) -> f64 {
    arousal(
        &NormalizedFeatures::new(x[0], x[1], x[2], x[3]),
        &ArousalWeights::default(),
    )
    .value
}

fn scalar_arousal(x: [f64; 4]) -> f64 {
    let s = |v: f64, k: f64, x0: f64| 1.0 / (1.0 + (-k * (v - x0)).exp());
    let a = 0.4 * s(x[0], 8.0, 0.4)
        + 0.4 * s(x[1], 10.0, 0.5)
        + 0.15 * s(x[2], 7.0, 0.5)
        + 0.05 * s(x[3], 6.0, 0.4);
    a.clamp(0.0, 1.0)
}

fn arousal_exactness() -> Outcome {
    let mid = a_of([0.4, 0.5, 0.5, 0.4]);
    check(
        (mid - 0.5).abs() <= 1e-12,
        format!("A(0.4,0.5,0.5,0.4) = {mid}"),
    )?;
    let mut worst: f64 = 0.0;
    for x in [[1.0; 4], [0.0; 4]] {
        worst = worst.max((a_of(x) - scalar_arousal(x)).abs());
    }
    check(worst <= 1e-9, format!("corner deviation {worst:e}"))?;
    Ok(format!("midpoint {mid}, corners within {worst:e}"))
}

fn arousal_monotonicity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let lo: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.2..1.2));
        let mut hi = lo;
        let i = rng.random_range(0..4);
        hi[i] += rng.random_range(0.0..1.0);
        check(
            a_of(hi) >= a_of(lo),
            format!("decrease at {lo:?} -> {hi:?}"),
        )?;
    }
    within_budget(start, Duration::from_secs(1))?;
    Ok("10000 pairs non-decreasing".into())
}

struct Case {
    points: Vec<[f64; 2]>,
    duration: f64,
    emotion: EmotionLabel,
    seed: u64,
}

fn trajectory_cases() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    (0..1000)
        .map(|_| {
            let n = rng.random_range(3..=20);
            Case {
                points: random_path(&mut rng, n),
                duration: rng.random_range(1.0..8.0),
                emotion: EmotionLabel::ALL[rng.random_range(0..3)],
                seed: rng.random(),
            }
        })
        .collect()
}

fn profile_params(emotion: EmotionLabel, seed: u64) -> EmotionProfileParams {
    EmotionProfileParams::for_emotion(emotion, seed)
        .unwrap_or_else(|| EmotionProfileParams::urgent(seed))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for c in trajectory_cases() {
        let traj = Trajectory::new(c.points.clone(), c.duration).map_err(|e| e.to_string())?;
        let got = modulate(&traj, c.emotion, &profile_params(c.emotion, c.seed))
            .map_err(|e| e.to_string())?;
        let want = oracle_modulate(&c.points, c.duration, c.emotion, c.seed, true);
        worst = worst.max(max_point_gap(&got.points, &want.points));
    }
    check(worst <= 1e-9, format!("max deviation {worst:e} m"))?;
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("1000 cases, max deviation {worst:e} m"))
}

fn invariants_for(
    points: &[[f64; 2]],
    duration: f64,
    emotion: EmotionLabel,
    seed: u64,
) -> Result<(), String> {
    let traj = Trajectory::new(points.to_vec(), duration).map_err(|e| e.to_string())?;
    let p = profile_params(emotion, seed);
    let got = modulate(&traj, emotion, &p).map_err(|e| e.to_string())?;
    let n = points.len();
    let gap = max_point_gap(&got.points[n - 1..], &points[n - 1..]);
    check(gap <= 1e-9, format!("endpoint moved {gap:e}"))?;
    for q in &got.points {
        let d = distance_to_polyline(points, *q);
        check(d <= 1e-9, format!("point {d:e} m off the path"))?;
    }
    let length = echo_core::arc_length(&traj)
        .map_err(|e| e.to_string())?
        .total;
    if length == 0.0 {
        check(got.points == points, "stationary input moved")?;
        return check(
            got.speeds.iter().all(|&v| v == 0.0),
            "stationary input has speed",
        );
    }
    let profile = speed_profile(&traj, emotion, &p).map_err(|e| e.to_string())?;
    let s = reparameterize(&traj, &profile)
        .map_err(|e| e.to_string())?
        .clamped;
    check(s.windows(2).all(|w| w[0] <= w[1]), "progress not monotone")?;
    if emotion != EmotionLabel::Normal {
        let (lo, hi) = (p.clip_lo * profile.v_avg, p.clip_hi * profile.v_avg);
        check(
            got.speeds.iter().all(|&v| v >= lo && v <= hi),
            "speed outside clip bounds",
        )?;
    }
    Ok(())
}

fn geometry_invariants() -> Outcome {
    for c in trajectory_cases() {
        invariants_for(&c.points, c.duration, c.emotion, c.seed)?;
    }
    let degenerate = [
        vec![[2.0, 2.0]; 7],
        vec![
            [0.0, 0.0],
            [0.0, 0.0],
            [4.0, 0.0],
            [4.0, 0.0],
            [4.0, 3.0],
            [4.0, 3.0],
            [4.0, 3.0],
        ],
        vec![[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]],
    ];
    for pts in &degenerate {
        for e in EmotionLabel::ALL {
            invariants_for(pts, 3.0, e, 5)?;
        }
    }
    Ok("1000 random + 9 degenerate cases".into())
}

fn emotion_ordering() -> Outcome {
    let mut margin = f64::INFINITY;
    for length in [1.0, 10.0, 30.0, 60.0] {
        let traj = Trajectory::new(straight_path(7, length), 3.0).map_err(|e| e.to_string())?;
        let progress = |e| -> Result<Vec<f64>, String> {
            let p = profile_params(e, 0).without_noise();
            let prof = speed_profile(&traj, e, &p).map_err(|e| e.to_string())?;
            Ok(reparameterize(&traj, &prof)
                .map_err(|e| e.to_string())?
                .clamped)
        };
        let (u, h) = (
            progress(EmotionLabel::Urgent)?,
            progress(EmotionLabel::Hesitant)?,
        );
        for i in 0..=3 {
            check(
                u[i] >= h[i],
                format!("length {length}, index {i}: {} < {}", u[i], h[i]),
            )?;
            if i > 0 {
                margin = margin.min((u[i] - h[i]) / length);
            }
        }
    }
    Ok(format!(
        "urgent ahead on indices 0..=3, min lead {margin:.3} of path"
    ))
}

fn score(audio: &AudioBuffer) -> Result<f64, String> {
    let f = extract_features(audio).map_err(|e| e.to_string())?;
    Ok(arousal(&normalize_features(&f), &ArousalWeights::default()).value)
}

fn prosody_contracts() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let (mut worst_dur, mut worst_f0): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let voice = synth_speech(&random_voice(&mut rng)).map_err(|e| e.to_string())?;
        let half = time_stretch(&voice, 2.0).map_err(|e| e.to_string())?;
        let want = voice.duration() / 2.0;
        worst_dur = worst_dur.max((half.duration() - want).abs() / want);

        let f0 = extract_features(&voice).map_err(|e| e.to_string())?.f0_mean;
        let up = pitch_shift(&voice, 1.5).map_err(|e| e.to_string())?;
        let f0_up = extract_features(&up).map_err(|e| e.to_string())?.f0_mean;
        worst_f0 = worst_f0.max((f0_up / f0 - 1.5).abs() / 1.5);

        let base = score(&voice)?;
        let urgent =
            score(&emotionalize(&voice, EmotionLabel::Urgent).map_err(|e| e.to_string())?)?;
        let hesitant =
            score(&emotionalize(&voice, EmotionLabel::Hesitant).map_err(|e| e.to_string())?)?;
        check(
            urgent > base && hesitant < base,
            format!("voice {k}: {hesitant:.3} / {base:.3} / {urgent:.3}"),
        )?;
    }
    check(
        worst_dur <= 0.02,
        format!("duration error {:.2}%", 100.0 * worst_dur),
    )?;
    check(
        worst_f0 <= 0.05,
        format!("F0 ratio error {:.2}%", 100.0 * worst_f0),
    )?;
    within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "50 voices; duration error <= {:.2}%, F0 error <= {:.2}%, arousal moves correctly",
        100.0 * worst_dur,
        100.0 * worst_f0
    ))
}

fn dsp_sanity() -> Outcome {
    let amp = 0.5;
    let f = extract_features(&tone(220.0, amp, 2.0)).map_err(|e| e.to_string())?;
    check(
        (f.f0_mean - 220.0).abs() <= 2.0,
        format!("F0 {}", f.f0_mean),
    )?;
    let rms = amp / 2f64.sqrt();
    check(
        (f.rms_mean - rms).abs() <= 0.02 * rms,
        format!("RMS {}", f.rms_mean),
    )?;
    check(
        (f.centroid_mean - 220.0).abs() <= 16000.0 / 512.0,
        format!("centroid {}", f.centroid_mean),
    )?;
    let pulsed = extract_features(&pulsed_tone(220.0, 2.0, 6.0)).map_err(|e| e.to_string())?;
    check(
        (pulsed.tempo_bpm - 120.0).abs() <= 6.0,
        format!("tempo {}", pulsed.tempo_bpm),
    )?;
    Ok(format!(
        "F0 {:.2} Hz, RMS {:.4}, centroid {:.1} Hz, tempo {:.1} BPM",
        f.f0_mean, f.rms_mean, f.centroid_mean, pulsed.tempo_bpm
    ))
}

fn scene(future: Vec<[f64; 2]>, agents: Vec<Vec<ObbBox>>) -> SceneRecord {
    SceneRecord {
        scene_id: "s".into(),
        frame_id: "f".into(),
        timestamp: 0.0,
        image_path: "f.jpg".into(),
        ego_history: vec![],
        ego_speed: 10.0,
        ego_accel: 0.0,
        ego_future: future,
        agents,
    }
}

fn eval_fixture(
    dir: &std::path::Path,
    s: SceneRecord,
    pred: &[[f64; 2]],
) -> Result<echo_core::EvalReport, String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let input = dir.join("scenes.jsonl");
    write_scenes(&input, &[s]).map_err(|e| e.to_string())?;
    let out = dir.join("ds");
    build(&BuildConfig {
        input,
        output: out.clone(),
        emotions: vec![EmotionLabel::Normal],
        seed: 0,
        k: 6,
        audio_source: AudioSource::Synthetic,
    })
    .map_err(|e| e.to_string())?;
    let preds = dir.join("pred.jsonl");
    let mut f = std::fs::File::create(&preds).map_err(|e| e.to_string())?;
    writeln!(
        f,
        "{}",
        serde_json::json!({"record_id": "f_normal", "trajectory": pred})
    )
    .map_err(|e| e.to_string())?;
    Ok(
        evaluate(out.join("dataset.jsonl"), &preds, &EvalOptions::default())
            .map_err(|e| e.to_string())?
            .0,
    )
}

fn obb_and_eval() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..10_000 {
        let (a, b) = (random_box(&mut rng), random_box(&mut rng));
        check(
            obb_overlap(&a, &b) == sampled_overlap(&a, &b, 1e-3),
            format!("pair {k} disagrees"),
        )?;
    }
    let p = ObbBox {
        cx: 0.0,
        cy: 0.0,
        yaw: 0.0,
        length: 2.0,
        width: 2.0,
    };
    let q = ObbBox {
        cx: 2.4,
        cy: 0.0,
        yaw: FRAC_PI_4,
        length: 2.0,
        width: 2.0,
    };
    check(
        obb_overlap(&p, &q) == sampled_overlap(&p, &q, 1e-3),
        "rotated example disagrees",
    )?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let future: Vec<[f64; 2]> = (1..=6).map(|i| [5.0 * i as f64, 0.0]).collect();
    let zero = eval_fixture(
        &dir.path().join("gt"),
        scene(future.clone(), vec![vec![]; 6]),
        &future,
    )?;
    check(
        zero.l2_m.horizons() == [0.0; 3] && zero.l2_m.avg == 0.0,
        "ground truth L2 not zero",
    )?;

    let ego = EgoDims::default();
    let mut agents = vec![vec![]; 6];
    agents[2].push(ObbBox {
        cx: 15.0,
        cy: 1.0,
        yaw: 0.0,
        length: ego.length,
        width: ego.width,
    });
    let shifted: Vec<[f64; 2]> = future.iter().map(|p| [p[0], p[1] + 1.0]).collect();
    let off = eval_fixture(&dir.path().join("off"), scene(future, agents), &shifted)?;
    check(
        (off.l2_m.avg - 1.0).abs() <= 1e-9,
        format!("offset avg L2 {}", off.l2_m.avg),
    )?;
    let rates = off.collision_rate_pct.horizons();
    check(
        rates == [0.0, 100.0, 100.0],
        format!("collision rates {rates:?}"),
    )?;
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "10000 pairs agree; offset avg L2 {:.12}, collisions {rates:?}",
        off.l2_m.avg
    ))
}

fn dataset_closure() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("scenes.jsonl");
    let scenes = write_fixture_scenes(&input, 12, 21);
    let cfg = |out: &str| BuildConfig {
        input: input.clone(),
        output: dir.path().join(out),
        emotions: EmotionLabel::ALL.to_vec(),
        seed: 42,
        k: 6,
        audio_source: AudioSource::Synthetic,
    };
    let report = build(&cfg("a")).map_err(|e| e.to_string())?;
    build(&cfg("b")).map_err(|e| e.to_string())?;
    let v = validate_dataset(dir.path().join("a/dataset.jsonl")).map_err(|e| e.to_string())?;
    check(
        v.is_clean(),
        format!(
            "{} findings, first {:?}",
            v.findings.len(),
            v.findings.first()
        ),
    )?;

    let files = |root: &str| -> Vec<(String, Vec<u8>)> {
        let base = dir.path().join(root);
        let mut out: Vec<_> = ["dataset.jsonl", "build_report.json", "intent_model.json"]
            .iter()
            .map(|f| {
                (
                    f.to_string(),
                    std::fs::read(base.join(f)).unwrap_or_default(),
                )
            })
            .collect();
        let mut wavs: Vec<_> = std::fs::read_dir(base.join("audio"))
            .map(|d| d.flatten().map(|e| e.path()).collect())
            .unwrap_or_else(|_| Vec::new());
        wavs.sort();
        for w in wavs {
            out.push((
                w.file_name().unwrap().to_string_lossy().into(),
                std::fs::read(&w).unwrap(),
            ));
        }
        out
    };
    check(files("a") == files("b"), "rebuild differs")?;
    let expected = scenes.len() * 3 - report.skipped.len();
    check(
        report.records_written == expected,
        format!("{} records, expected {expected}", report.records_written),
    )?;
    Ok(format!(
        "{} records, 0 findings, byte-identical rebuild, {} flagged",
        report.records_written,
        report.flagged.len()
    ))
}

fn reference_not_claimed() -> Outcome {
    let r = PublishedReference::default();
    check(
        r.l2_m.horizons() == [0.46, 0.52, 0.74] && r.l2_m.avg == 0.58,
        "L2 reference values",
    )?;
    check(
        r.collision_rate_pct.horizons() == [0.00, 0.12, 0.22] && r.collision_rate_pct.avg == 0.11,
        "collision reference values",
    )?;
    check(
        r.note.contains("not reproduced"),
        "reference note must disclaim reproduction",
    )?;
    Ok("published 0.58 m / 0.11% carried as report metadata only; not reproduced".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("arousal exactness", arousal_exactness),
        ("arousal monotonicity", arousal_monotonicity),
        (
            "trajectory modulation oracle equivalence",
            oracle_equivalence,
        ),
        ("geometry invariants", geometry_invariants),
        ("emotion ordering", emotion_ordering),
        ("prosody contracts", prosody_contracts),
        ("dsp sanity", dsp_sanity),
        ("obb oracle and evaluation fixtures", obb_and_eval),
        ("dataset closure", dataset_closure),
        ("published numbers not claimed", reference_not_claimed),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS  {name} ({:.2?}): {detail}", start.elapsed()),
            Err(why) => {
                println!("FAIL  {name} ({:.2?}): {why}", start.elapsed());
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
