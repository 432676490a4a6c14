//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.
//!
//! Run a subset by passing criterion numbers:
//! `cargo test -p invsim-validation --test acceptance -- 1 3 5`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use invsim::analysis::{
    compare_controllers, comparison_steps, relative_rms_error, run_metrics, CompareOptions, ComparisonRow, ComparisonTable,
    Settling, WaveformRecord,
};
use invsim::frames::{voltage_vector, AlphaBeta, SwitchingState};
use invsim::imitation::{collect, default_training_grid, CollectionGrid};
use invsim::mpc::{cost, Mpc, MpcState};
use invsim::nn::{save_model, train_scg, Activation, AnnModel, MlpParameters, Shape, TrainConfig, TrainReport};
use invsim::plant::{discretize, step_truth, FilterParams, LoadModel, LoadState, PlantState};
use invsim::scenario::{load_scenarios, LoadSpec, ScenarioConfig};
use invsim::sim::{simulate, MpcController, SimOptions};

type Outcome = Result<String, String>;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenarios(file: &str) -> Result<Vec<ScenarioConfig>, String> {
    load_scenarios(&scenario_dir().join(file)).map_err(|e| e.to_string())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

/// `exp(M)` by a truncated Taylor series (40 terms).
fn expm_series(m: &Matrix3<f64>) -> Matrix3<f64> {
    let mut sum = Matrix3::identity();
    let mut term = Matrix3::identity();
    for k in 1..=40 {
        term = term * m / k as f64;
        sum += term;
    }
    sum
}

fn random_params(rng: &mut ChaCha8Rng) -> FilterParams {
    loop {
        let p = FilterParams {
            l: rng.gen_range(0.5e-3..10e-3),
            c: rng.gen_range(10e-6..200e-6),
            ts: rng.gen_range(5e-6..100e-6),
            vdc: rng.gen_range(100.0..1000.0),
        };
        if p.validate().is_ok() {
            return p;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut sets = vec![FilterParams::nominal()];
    sets.extend((0..100).map(|_| random_params(&mut rng)));
    let (mut worst, mut worst_det) = (0.0f64, 0.0f64);
    for p in &sets {
        let m = discretize(p).map_err(|e| e.to_string())?;
        // augmented [A B Bd; 0 0 0] over one period, inputs share the last column pair
        let build = |input: [f64; 2]| {
            Matrix3::new(
                0.0, -1.0 / p.l, input[0],
                1.0 / p.c, 0.0, input[1],
                0.0, 0.0, 0.0,
            ) * p.ts
        };
        let eb = expm_series(&build([1.0 / p.l, 0.0]));
        let ed = expm_series(&build([0.0, -1.0 / p.c]));
        let pairs = [
            (m.aq[0][0], eb[(0, 0)]),
            (m.aq[0][1], eb[(0, 1)]),
            (m.aq[1][0], eb[(1, 0)]),
            (m.aq[1][1], eb[(1, 1)]),
            (m.bq[0], eb[(0, 2)]),
            (m.bq[1], eb[(1, 2)]),
            (m.bdq[0], ed[(0, 2)]),
            (m.bdq[1], ed[(1, 2)]),
        ];
        for (got, want) in pairs {
            worst = worst.max((got - want).abs() / want.abs());
        }
        worst_det = worst_det.max((m.det() - 1.0).abs());
    }
    ensure(
        worst <= 1e-12 && worst_det <= 1e-9,
        format!(
            "{} parameter sets, max elementwise relative error {worst:.2e} (limit 1e-12), max |det-1| {worst_det:.2e} (limit 1e-9)",
            sets.len()
        ),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let p = FilterParams::nominal();
    let mut notes = Vec::new();
    let mut ok = true;
    for r in [10.0, 5000.0] {
        let load = LoadModel::Resistive { r };
        let a = Matrix3::new(
            0.0, -1.0 / p.l, 1.0 / p.l,
            1.0 / p.c, -1.0 / (r * p.c), 0.0,
            0.0, 0.0, 0.0,
        ) * p.ts;
        let phi = a.exp();
        let ad = Matrix2::new(phi[(0, 0)], phi[(0, 1)], phi[(1, 0)], phi[(1, 1)]);
        let bd = Vector2::new(phi[(0, 2)], phi[(1, 2)]);

        let mut rng = ChaCha8Rng::seed_from_u64(202);
        let mut state = PlantState::zero(&load);
        let (mut xa, mut xb) = (Vector2::zeros(), Vector2::zeros());
        let mut max_err = [0.0f64; 2];
        let mut max_ref = [0.0f64; 2];
        for _ in 0..1000 {
            let s = SwitchingState::from_index(rng.gen_range(0..8)).unwrap();
            let v = voltage_vector(s, p.vdc).unwrap();
            state = step_truth(&state, s, &p, &load, 64).map_err(|e| e.to_string())?;
            xa = ad * xa + bd * v.alpha;
            xb = ad * xb + bd * v.beta;
            let got = [state.i_f.alpha, state.v_c.alpha, state.i_f.beta, state.v_c.beta];
            let want = [xa[0], xa[1], xb[0], xb[1]];
            for i in 0..4 {
                max_err[i % 2] = max_err[i % 2].max((got[i] - want[i]).abs());
                max_ref[i % 2] = max_ref[i % 2].max(want[i].abs());
            }
        }
        let rel = (max_err[0] / max_ref[0]).max(max_err[1] / max_ref[1]);
        ok &= rel <= 1e-6;
        notes.push(format!("R={r} Ω rel err {rel:.2e}"));
    }

    let load = LoadModel::OpenCircuit;
    let mut state = PlantState {
        i_f: AlphaBeta::new(12.0, -7.0),
        v_c: AlphaBeta::new(180.0, 95.0),
        load: LoadState::Stateless,
    };
    let e0 = state.filter_energy(&p);
    let zero = SwitchingState::new(false, false, false);
    for _ in 0..1000 {
        state = step_truth(&state, zero, &p, &load, 64).map_err(|e| e.to_string())?;
    }
    let drift = (state.filter_energy(&p) - e0).abs() / e0;
    ok &= drift <= 1e-6;
    notes.push(format!("open-circuit energy drift {drift:.2e}"));
    ensure(ok, format!("{} (limits 1e-6, 1000 steps, 64 substeps)", notes.join(", ")))
}

// ---------------------------------------------------------------- 3

/// Seven distinct vectors written out from the switch positions.
fn reference_vectors(vdc: f64) -> [(f64, f64); 7] {
    let states = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 1, 1), (0, 0, 1), (1, 0, 1)];
    states.map(|(a, b, c)| {
        let (a, b, c) = (a as f64, b as f64, c as f64);
        (
            vdc * 2.0 / 3.0 * (a - 0.5 * b - 0.5 * c),
            vdc * 2.0 / 3.0 * (3f64.sqrt() / 2.0) * (b - c),
        )
    })
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut mismatches = 0;
    let mut suboptimal = 0;
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        let mpc = Mpc::new(p).map_err(|e| e.to_string())?;
        let mut g = |s: f64| AlphaBeta::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
        let (i_f, v_c, i_f_prev, v_c_prev, v_ref) = (g(40.0), g(400.0), g(40.0), g(400.0), g(400.0));
        let mut st = MpcState::with_previous(i_f_prev, v_c_prev);
        let d = mpc.control_step(&mut st, i_f, v_c, v_ref);

        let preds = mpc.predictions(i_f, v_c, d.estimated_i_o);
        if preds.iter().any(|&v| cost(v_ref, v) < d.cost) {
            suboptimal += 1;
        }

        let m = discretize(&p).map_err(|e| e.to_string())?;
        let io = (
            i_f_prev.alpha - p.c / p.ts * (v_c.alpha - v_c_prev.alpha),
            i_f_prev.beta - p.c / p.ts * (v_c.beta - v_c_prev.beta),
        );
        let mut best = (usize::MAX, f64::INFINITY);
        for (l, (va, vb)) in reference_vectors(p.vdc).into_iter().enumerate() {
            let pa = m.aq[1][0] * i_f.alpha + m.aq[1][1] * v_c.alpha + m.bq[1] * va + m.bdq[1] * io.0;
            let pb = m.aq[1][0] * i_f.beta + m.aq[1][1] * v_c.beta + m.bq[1] * vb + m.bdq[1] * io.1;
            let j = (v_ref.alpha - pa).powi(2) + (v_ref.beta - pb).powi(2);
            if j < best.1 {
                best = (l, j);
            }
        }
        if best.0 != d.optimal_index {
            mismatches += 1;
        }
    }
    ensure(
        mismatches == 0 && suboptimal == 0,
        format!("10000 random states: {suboptimal} suboptimal choices, {mismatches} disagreements with the reference enumerator"),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let shape = Shape::new(8, 15, 7);
    let mut worst = 0.0f64;
    for draw in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + draw);
        let act = if draw % 5 == 4 { Activation::Logistic } else { Activation::Tanh };
        let net = MlpParameters::random(shape, act, &mut rng).map_err(|e| e.to_string())?;
        let rows = 24;
        let xs: Vec<f64> = (0..rows * 8).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ys: Vec<u8> = (0..rows).map(|_| rng.gen_range(0..7)).collect();
        let (_, g) = net.loss_and_gradient(&xs, &ys).map_err(|e| e.to_string())?;
        let h = 1e-5;
        let mut fd = vec![0.0; g.len()];
        let mut probe = net.clone();
        for i in 0..g.len() {
            let w0 = net.weights()[i];
            probe.weights_mut()[i] = w0 + h;
            let up = probe.loss(&xs, &ys).map_err(|e| e.to_string())?;
            probe.weights_mut()[i] = w0 - h;
            let down = probe.loss(&xs, &ys).map_err(|e| e.to_string())?;
            probe.weights_mut()[i] = w0;
            fd[i] = (up - down) / (2.0 * h);
        }
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
        worst = worst.max(diff / scale);
    }
    ensure(worst <= 1e-6, format!("20 draws, max relative error {worst:.2e} (limit 1e-6)"))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let s = scenarios("nominal.toml")?
        .into_iter()
        .find(|s| s.id == "nominal-5k")
        .ok_or("nominal-5k missing")?;
    let mut mpc = MpcController::new(&s).map_err(|e| e.to_string())?;
    let traj = simulate(&s, &mut mpc, comparison_steps(&s), &SimOptions::default()).map_err(|e| e.to_string())?;
    let m = run_metrics(&traj).map_err(|e| e.to_string())?;
    let rec = WaveformRecord::from_trajectory(&traj);
    let spc = rec.samples_per_cycle();
    let (start, end) = ((2.0 * spc).round() as usize, (6.0 * spc).round() as usize);
    let rms = 100.0 * relative_rms_error(&rec, start, end - start).map_err(|e| e.to_string())?;
    let thd = 100.0 * m.thd;
    ensure(
        (1.0..=6.0).contains(&thd) && rms <= 5.0,
        format!("5 kΩ: THD {thd:.3}% (band [1%, 6%]), RMS error cycles 3-6 {rms:.3}% (limit 5%)"),
    )
}

// ---------------------------------------------------------------- 6-9

struct Trained {
    model: AnnModel,
    report: TrainReport,
}

const TRAINING_CYCLES: f64 = 2.0;

fn criterion_6(trained: &mut Option<Trained>) -> Outcome {
    let grid = CollectionGrid::new(default_training_grid(TRAINING_CYCLES), TRAINING_CYCLES).map_err(|e| e.to_string())?;
    let data = collect(&grid, &SimOptions::default()).map_err(|e| e.to_string())?;
    let rows = data.len();
    if rows < 50_000 {
        return Err(format!("dataset has {rows} rows, fewer than 50000"));
    }
    let cfg = TrainConfig::default();
    let (model, report) = train_scg(&data.to_samples(cfg.layout), &cfg).map_err(|e| e.to_string())?;
    let acc = report.test.accuracy.ok_or("no held-out split")?;
    let detail = format!(
        "{rows} rows from {} scenarios, {} epochs ({:?}, best {}), held-out accuracy {:.2}% on {} rows (limit 60%)",
        grid.scenarios.len(),
        report.final_epoch,
        report.stop_reason,
        report.best_epoch,
        100.0 * acc,
        report.test.rows
    );
    *trained = Some(Trained { model, report });
    ensure(acc >= 0.60, detail)
}

fn model(trained: &Option<Trained>) -> Result<&AnnModel, String> {
    trained
        .as_ref()
        .map(|t| &t.model)
        .ok_or_else(|| "no trained network (criterion 6 did not produce one)".to_string())
}

fn same_operating_point(a: &ScenarioConfig, b: &ScenarioConfig) -> bool {
    a.load == b.load
        && (a.ts_us, a.l_mh, a.c_uf, a.vdc_v, a.vref_v, a.freq_hz) == (b.ts_us, b.l_mh, b.c_uf, b.vdc_v, b.vref_v, b.freq_hz)
}

fn criterion_7(trained: &Option<Trained>) -> Outcome {
    let model = model(trained)?;
    let training = default_training_grid(TRAINING_CYCLES);
    let test: Vec<ScenarioConfig> = scenarios("case1.toml")?
        .into_iter()
        .filter(|s| matches!(s.load, LoadSpec::Resistive { .. }))
        .collect();
    if let Some(s) = test.iter().find(|s| training.iter().any(|t| same_operating_point(s, t))) {
        return Err(format!("{} also appears in the training grid", s.id));
    }
    if test.len() < 10 {
        return Err(format!("only {} resistive test scenarios", test.len()));
    }
    let table = compare_controllers(&test, model, &CompareOptions::default()).map_err(|e| e.to_string())?;
    let within = table
        .rows
        .iter()
        .filter(|r| matches!((r.thd_ann, r.thd_mpc), (Some(a), Some(m)) if a <= 1.5 * m))
        .count();
    let frac = within as f64 / table.rows.len() as f64;
    let sum = table.summary();
    let (ma, mm) = (sum.median_thd_ann.unwrap_or(f64::NAN), sum.median_thd_mpc.unwrap_or(f64::NAN));
    let worst = table
        .rows
        .iter()
        .filter_map(|r| Some((r.thd_ann? / r.thd_mpc?, r.sample.as_str())))
        .fold((0.0, ""), |acc, x| if x.0 > acc.0 { x } else { acc });
    ensure(
        frac >= 0.8 && ma <= mm,
        format!(
            "{} scenarios: ANN <= 1.5x MPC in {within} ({:.0}%, need 80%), worst ratio {:.2} ({}); median THD ANN {ma:.4}% vs MPC {mm:.4}% (need ANN <= MPC); ANN lower in {}",
            table.rows.len(),
            100.0 * frac,
            worst.0,
            worst.1,
            sum.ann_wins
        ),
    )
}

fn settling_ms(s: Option<Settling>) -> String {
    match s {
        Some(Settling::At(t)) => format!("{:.2} ms", 1e3 * t),
        Some(Settling::Never) => "never".into(),
        None => "n/a".into(),
    }
}

fn criterion_8(trained: &Option<Trained>) -> Outcome {
    let model = model(trained)?;
    let s: Vec<ScenarioConfig> = scenarios("nominal.toml")?.into_iter().filter(|s| s.id == "no-load").collect();
    if s.len() != 1 {
        return Err("no-load scenario missing".into());
    }
    let table = compare_controllers(&s, model, &CompareOptions::default()).map_err(|e| e.to_string())?;
    let r = &table.rows[0];
    let ok = match (r.tss_ann_ms, r.tss_mpc_ms) {
        (Some(Settling::At(a)), Some(Settling::At(m))) => a < m,
        (Some(Settling::At(_)), Some(Settling::Never)) => true,
        _ => false,
    };
    ensure(
        ok,
        format!(
            "no-load settling (5% band): ANN {} vs MPC {} [{}]",
            settling_ms(r.tss_ann_ms),
            settling_ms(r.tss_mpc_ms),
            r.status
        ),
    )
}

fn row<'a>(t: &'a ComparisonTable, id: &str) -> Result<&'a ComparisonRow, String> {
    t.rows.iter().find(|r| r.sample == id).ok_or_else(|| format!("{id} missing"))
}

fn criterion_9(trained: &Option<Trained>) -> Outcome {
    const STRESS: &str = "S49";
    let model = model(trained)?;
    let mut cases: Vec<ScenarioConfig> = scenarios("nominal.toml")?
        .into_iter()
        .filter(|s| matches!(s.load, LoadSpec::Inductive { .. } | LoadSpec::Rectifier { .. }))
        .collect();
    cases.extend(scenarios("case2.toml")?);
    let table = compare_controllers(&cases, model, &CompareOptions::default()).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    for r in &table.rows {
        if r.status.contains("failed") || r.status.contains("unsafe") {
            problems.push(format!("{}: {}", r.sample, r.status));
        } else if r.sample != STRESS && (r.thd_ann.unwrap() >= 10.0 || r.thd_mpc.unwrap() >= 10.0) {
            problems.push(format!("{}: THD ANN {:.2}% MPC {:.2}%", r.sample, r.thd_ann.unwrap(), r.thd_mpc.unwrap()));
        }
    }
    let s49 = row(&table, STRESS)?;
    let s50 = row(&table, "S50")?;
    if !matches!(s49.thd_ann, Some(t) if t > 10.0) {
        problems.push(format!(
            "{STRESS} ANN THD {} is not above 10%",
            s49.thd_ann.map_or("n/a".into(), |t| format!("{t:.3}%"))
        ));
    }
    if !matches!((s50.thd_ann, s50.thd_mpc), (Some(a), Some(m)) if a < 5.0 && m < 5.0) {
        problems.push(format!("S50 THD ANN {:?} MPC {:?} not below 5%", s50.thd_ann, s50.thd_mpc));
    }
    let max_ann = table.rows.iter().filter_map(|r| r.thd_ann).fold(0.0, f64::max);
    let max_mpc = table.rows.iter().filter_map(|r| r.thd_mpc).fold(0.0, f64::max);
    let inductive = table.rows.iter().find(|r| r.load_kind == "inductive");
    let detail = format!(
        "{} nonlinear/inductive scenarios, max THD ANN {max_ann:.2}% MPC {max_mpc:.2}%; inductive ANN {} MPC {}; S49 ANN {} MPC {}; S50 ANN {} MPC {}",
        table.rows.len(),
        fmt_pct(inductive.and_then(|r| r.thd_ann)),
        fmt_pct(inductive.and_then(|r| r.thd_mpc)),
        fmt_pct(s49.thd_ann),
        fmt_pct(s49.thd_mpc),
        fmt_pct(s50.thd_ann),
        fmt_pct(s50.thd_mpc),
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |t| format!("{t:.3}%"))
}

// ---------------------------------------------------------------- 10

/// Collect, train and compare at reduced scale; returns the bytes of every
/// artifact.
fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let e = |e: invsim::Error| e.to_string();
    let grid: Vec<ScenarioConfig> = default_training_grid(1.0).into_iter().step_by(5).collect();
    let data = collect(&CollectionGrid::new(grid, 1.0).map_err(e)?, &SimOptions::default()).map_err(e)?;
    let data_path = dir.join("data.csv");
    data.save(&data_path).map_err(e)?;
    let cfg = TrainConfig {
        max_epochs: 40,
        seed: 11,
        ..TrainConfig::default()
    };
    let (model, _) = train_scg(&data.to_samples(cfg.layout), &cfg).map_err(e)?;
    let model_path = dir.join("model.bin");
    save_model(&model_path, &model).map_err(e)?;
    let test: Vec<ScenarioConfig> = scenarios("resistive_subset.toml")?.into_iter().take(3).collect();
    let wf = dir.join("waveforms");
    std::fs::create_dir_all(&wf).map_err(|e| e.to_string())?;
    let opts = CompareOptions {
        waveform_dir: Some(wf.clone()),
        ..CompareOptions::default()
    };
    let table = compare_controllers(&test, &model, &opts).map_err(e)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv).map_err(e)?;

    let mut out = vec![
        ("data.csv".to_string(), std::fs::read(&data_path).map_err(|e| e.to_string())?),
        ("model.bin".to_string(), std::fs::read(&model_path).map_err(|e| e.to_string())?),
        ("table.csv".to_string(), csv),
    ];
    let mut names: Vec<_> = std::fs::read_dir(&wf)
        .map_err(|e| e.to_string())?
        .map(|d| d.map(|d| d.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    names.sort();
    for n in names {
        out.push((n.clone(), std::fs::read(wf.join(&n)).map_err(|e| e.to_string())?));
    }
    Ok(out)
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let bytes: usize = first.iter().map(|(_, b)| b.len()).sum();
    ensure(
        first.len() == second.len() && differing.is_empty(),
        format!(
            "{} artifacts ({bytes} bytes) compared across two runs; differing: {}",
            first.len(),
            if differing.is_empty() { "none".to_string() } else { differing.join(", ") }
        ),
    )
}

// ----------------------------------------------------------------

fn main() {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |n: usize| selected.is_empty() || selected.contains(&n);
    // 7-9 need the network trained in 6
    let needs_model = [6, 7, 8, 9].iter().any(|&n| wanted(n) && n != 6);

    let names = [
        "discretization oracle",
        "plant oracle",
        "MPC optimality",
        "gradient check",
        "MPC steady-state band",
        "imitation quality",
        "closed-loop student performance",
        "transient contrast",
        "nonlinear-load behaviour",
        "determinism",
    ];
    let mut trained = None;
    let mut failed = 0;
    for (i, name) in names.iter().enumerate() {
        let n = i + 1;
        if !(wanted(n) || (n == 6 && needs_model)) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = match n {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&mut trained),
            7 => criterion_7(&trained),
            8 => criterion_8(&trained),
            9 => criterion_9(&trained),
            _ => criterion_10(),
        };
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {n:2} {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {n:2} {name}: {d} [{secs:.1}s]");
            }
        }
        if n == 6 {
            if let Some(t) = &trained {
                println!(
                    "      network {}: train accuracy {:.2}%, validation {:.2}%",
                    t.report.shape,
                    100.0 * t.report.train.accuracy.unwrap_or(f64::NAN),
                    100.0 * t.report.validation.accuracy.unwrap_or(f64::NAN)
                );
            }
        }
    }
    println!("acceptance: {failed} of {} criteria failed", names.iter().enumerate().filter(|(i, _)| wanted(i + 1) || (*i == 5 && needs_model)).count());
    if failed > 0 {
        std::process::exit(1);
    }
}
