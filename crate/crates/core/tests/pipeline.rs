//! Small end-to-end runs through the public API.

use invsim::analysis::{compare_controllers, run_metrics, CompareOptions};
use invsim::imitation::{collect, AnnController, CollectionGrid, CurrentSource, Dataset};
use invsim::nn::{load_model, save_model, train_scg, FeatureLayout, TrainConfig};
use invsim::scenario::{parse_scenarios, LoadSpec, ScenarioConfig};
use invsim::sim::{simulate, MpcController, SimOptions};

const GRID: &str = r#"
[[scenario]]
id = "r5"
load = "resistive"
r_ohm = 5.0
ts_us = 30.0
l_mh = 2.0
c_uf = 40.0
vdc_v = 500.0
vref_v = 200.0

[[scenario]]
id = "r20"
load = "resistive"
r_ohm = 20.0
ts_us = 25.0
l_mh = 2.5
c_uf = 50.0
vdc_v = 520.0
vref_v = 220.0

[[scenario]]
id = "r35"
load = "resistive"
r_ohm = 35.0
ts_us = 35.0
l_mh = 3.5
c_uf = 50.0
vdc_v = 480.0
vref_v = 180.0
"#;

fn grid() -> Vec<ScenarioConfig> {
    parse_scenarios(GRID, "grid.toml".as_ref()).unwrap()
}

#[test]
fn collect_train_save_load_and_run() {
    let data = collect(&CollectionGrid::new(grid(), 2.0).unwrap(), &SimOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    data.save(&path).unwrap();
    let data = Dataset::load(&path).unwrap();
    assert_eq!(data.scenario_ids, ["r5", "r20", "r35"]);

    for layout in [FeatureLayout::Base, FeatureLayout::Delayed] {
        let cfg = TrainConfig {
            max_epochs: 150,
            layout,
            ..TrainConfig::default()
        };
        let (model, report) = train_scg(&data.to_samples(layout), &cfg).unwrap();
        assert!(report.history.last().unwrap().train_loss < report.initial_train_loss);
        assert!(report.test.accuracy.unwrap() > 0.5, "{layout:?}: {:?}", report.test);

        let mpath = dir.path().join("m.bin");
        save_model(&mpath, &model).unwrap();
        let model = load_model(&mpath).unwrap();

        // unseen operating point
        let mut s = grid()[0].clone();
        s.id = "r12".into();
        s.load = LoadSpec::Resistive { r_ohm: 12.0 };
        for source in [CurrentSource::Measured, CurrentSource::Estimated] {
            let mut ann = AnnController::new(model.clone(), &s, source).unwrap();
            let traj = simulate(&s, &mut ann, s.steps(8.0), &SimOptions::default()).unwrap();
            let m = run_metrics(&traj).unwrap();
            assert!(m.thd < 0.05, "{layout:?} {source:?}: THD {}", m.thd);
            assert!(m.rms_error < 0.1, "{layout:?} {source:?}: rms {}", m.rms_error);
            assert!(m.max_voltage < 2.0 * s.vdc_v, "{layout:?} {source:?}: |v_c| reached {}", m.max_voltage);
        }
    }
}

#[test]
fn comparison_rows_follow_scenario_order() {
    let data = collect(&CollectionGrid::new(grid(), 1.0).unwrap(), &SimOptions::default()).unwrap();
    let cfg = TrainConfig {
        max_epochs: 60,
        ..TrainConfig::default()
    };
    let (model, _) = train_scg(&data.to_samples(cfg.layout), &cfg).unwrap();
    let table = compare_controllers(&grid(), &model, &CompareOptions::default()).unwrap();
    let ids: Vec<_> = table.rows.iter().map(|r| r.sample.as_str()).collect();
    assert_eq!(ids, ["r5", "r20", "r35"]);
    assert!(table.rows.iter().all(|r| !r.status.contains("unsafe")), "{:?}", table.rows);

    // expert figures in the table equal a standalone run
    let s = &grid()[1];
    let mut mpc = MpcController::new(s).unwrap();
    let traj = simulate(s, &mut mpc, invsim::analysis::comparison_steps(s), &SimOptions::default()).unwrap();
    let thd = run_metrics(&traj).unwrap().thd * 100.0;
    assert_eq!(table.rows[1].thd_mpc, Some(thd));
}
