//! End-to-end pipeline tests: fixture ingestion, config-driven data
//! preparation, training on generated data, and serialization through files.

use std::path::PathBuf;

use alstm::config::ExperimentConfig;
use alstm::datagen::{gen_mackey_glass, make_windows, scale_unit, split_train_test, SeriesSpec, WindowSpec};
use alstm::eval::predict_dataset;
use alstm::ingest::{clean_missing, ingest, load_series_csv, ColumnSel, CsvSpec};
use alstm::model::{AlstmParams, Mode, ModelConfig};
use alstm::optim::{train_model, TrainConfig};
use alstm::serialize::{parse_model, write_model_string};

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/power_fixture.csv")
}

#[test]
fn power_fixture_has_7000_rows() {
    let spec = CsvSpec::new(fixture_path(), ColumnSel::Name("Global_active_power".into()));
    let raw = load_series_csv(&spec).unwrap();
    assert_eq!(raw.len(), 7000);
    // The fixture carries missing markers that forward-fill must absorb.
    assert!(raw.iter().any(|v| v.is_none()));
    let cleaned = clean_missing(&raw).unwrap();
    assert_eq!(cleaned.len(), 7000);
    assert!(cleaned.values.iter().all(|v| v.is_finite()));
}

#[test]
fn fixture_pipeline_is_deterministic() {
    let spec = CsvSpec::new(fixture_path(), ColumnSel::Name("Global_active_power".into()));
    let a = ingest(&spec).unwrap();
    let b = ingest(&spec).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn mackey_pipeline_trains_and_round_trips() {
    // Small but real: generate, scale on the training prefix, window, train
    // briefly, and check the serialized model reproduces its predictions.
    let spec = SeriesSpec {
        n_points: 320,
        transient: 500,
        ..SeriesSpec::mackey_glass()
    };
    let series = gen_mackey_glass(&spec).unwrap();
    let scaled = scale_unit(&series, 0..220).unwrap();
    let (train, test) = split_train_test(&scaled, 220).unwrap();
    let wspec = WindowSpec {
        n_samples: 5,
        stride: 6,
        horizon: 1,
    };
    let train_ds = make_windows(&train, wspec).unwrap();
    let test_ds = make_windows(&test, wspec).unwrap();

    let config = ModelConfig {
        d_fx: 4,
        d_z: 2,
        d_fz: 4,
        n_h: 8,
        ..ModelConfig::default()
    };
    let tconfig = TrainConfig {
        epochs: 40,
        batch_size: 32,
        seed: 7,
        ..TrainConfig::default()
    };
    let (model, history) = train_model(&config, &tconfig, &train_ds).unwrap();
    assert!(history.last().unwrap() < history.first().unwrap());

    let pset = predict_dataset(&model, &test_ds).unwrap();
    let reloaded = parse_model(&write_model_string(&model)).unwrap();
    let pset2 = predict_dataset(&reloaded, &test_ds).unwrap();
    assert_eq!(pset.predictions(), pset2.predictions());
}

#[test]
fn experiment_config_drives_csv_pipeline() {
    let text = format!(
        "
[dataset]
kind = csv
path = {}
column = Global_active_power
delimiter = ;
n_train = 1000

[window]
n_samples = 5
stride = 6
horizon = 1
",
        fixture_path().display()
    );
    let config = ExperimentConfig::parse_str(&text).unwrap();
    let data = config.prepare_data().unwrap();
    assert_eq!(data.scaled.len(), 7000);
    assert_eq!(data.train.len(), 1000 - 24 - 1);
    assert_eq!(data.test.len(), 6000 - 24 - 1);
    // Training prefix is unit-scaled; later values may leave [0,1].
    let prefix = &data.scaled.values[..1000];
    assert!(prefix.iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn grad_check_passes_on_random_small_configs() {
    // Forward/backward agreement across a spread of small configurations,
    // each at most ~200 scalars.
    let cases = [
        (1usize, 2usize, 2usize, 2usize, 2usize, 1usize, Mode::Alstm),
        (1, 3, 2, 2, 2, 2, Mode::Alstm),
        (2, 2, 2, 3, 2, 1, Mode::Alstm),
        (1, 2, 2, 2, 4, 3, Mode::LstmBaseline),
    ];
    for (case_idx, (d_in, d_fx, d_z, d_fz, n_h, horizon, mode)) in cases.into_iter().enumerate() {
        let config = ModelConfig {
            d_in,
            d_fx,
            d_z,
            d_fz,
            n_h,
            horizon,
            beta: 1e-3,
            mode,
            ..ModelConfig::default()
        };
        let model = AlstmParams::init(config.clone(), 1000 + case_idx as u64).unwrap();
        assert!(
            model.num_scalars() <= 220,
            "case {case_idx}: {} scalars",
            model.num_scalars()
        );
        let err = grad_check_model(model, config, 10 + case_idx as u64);
        assert!(err <= 1e-4, "case {case_idx}: max relative error {err}");
    }
}

fn grad_check_model(mut model: AlstmParams, config: ModelConfig, data_seed: u64) -> f64 {
    use alstm::model::WindowSample;
    use alstm::rng::SeededRng;
    use alstm::tensor::Tensor;

    let mut rng = SeededRng::new(data_seed);
    let mut samples = Vec::new();
    for _ in 0..2 {
        let steps = (0..3)
            .map(|_| {
                let vals: Vec<f64> = (0..config.d_in).map(|_| rng.uniform(0.0, 1.0)).collect();
                Tensor::column(&vals)
            })
            .collect();
        let target_vals: Vec<f64> = (0..config.horizon * config.d_in)
            .map(|_| rng.uniform(0.0, 1.0))
            .collect();
        samples.push(WindowSample {
            steps,
            target: Tensor::column(&target_vals),
        });
    }
    let refs: Vec<&WindowSample> = samples.iter().collect();
    let (_, grads) = model.batch_grads(&refs, config.beta).unwrap();
    model.params_mut().zero_grads();
    model.params_mut().accumulate_grads(&grads, 1.0).unwrap();

    let layout = model.clone();
    let beta = config.beta;
    let mut set = std::mem::take(model.params_mut());
    alstm::gradcheck::grad_check(
        |s| {
            let mut probe = layout.clone();
            *probe.params_mut() = s.clone();
            probe.batch_loss_samples(&samples, beta)
        },
        &mut set,
        1e-5,
    )
    .unwrap()
}
