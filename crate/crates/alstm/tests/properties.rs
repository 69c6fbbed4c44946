//! Property tests over the crate's core invariants.

use proptest::prelude::*;

use alstm::datagen::{make_windows, scale_unit, Series, WindowSpec};
use alstm::eval::PredictionSet;
use alstm::model::{AlstmParams, CellVariant, Mode, ModelConfig};
use alstm::optim::{adam_step, AdamState, TrainConfig};
use alstm::params::{ParamKind, ParamSet};
use alstm::serialize::{parse_model, write_model_string};
use alstm::tensor::Tensor;

fn value_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0e3..1.0e3f64, len..=len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rmse_is_permutation_invariant(
        rows in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..40),
        seed in 0u64..1000,
    ) {
        let preds: Vec<Vec<f64>> = rows.iter().map(|(p, _)| vec![*p]).collect();
        let targets: Vec<Vec<f64>> = rows.iter().map(|(_, t)| vec![*t]).collect();
        let base = PredictionSet::new(preds.clone(), targets.clone(), 1).unwrap();

        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut rng = alstm::rng::SeededRng::new(seed);
        rng.shuffle(&mut order);
        let pset = PredictionSet::new(
            order.iter().map(|&i| preds[i].clone()).collect(),
            order.iter().map(|&i| targets[i].clone()).collect(),
            1,
        )
        .unwrap();
        prop_assert!((base.rmse() - pset.rmse()).abs() < 1e-12);
        prop_assert!(base.rmse() >= 0.0);
    }

    #[test]
    fn per_step_rmse_identity(
        rows in proptest::collection::vec(
            (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
            2..20,
        ),
    ) {
        // sum_j per_step_rmse[j]^2 / H == rmse^2 exactly (up to rounding).
        let preds: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1, r.2]).collect();
        let targets: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.3, r.4, r.5]).collect();
        let pset = PredictionSet::new(preds, targets, 3).unwrap();
        let lhs: f64 = pset.per_step_rmse().iter().map(|v| v * v).sum::<f64>() / 3.0;
        prop_assert!((lhs - pset.rmse().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn rmse_zero_iff_equal(values in proptest::collection::vec(0.0..1.0f64, 2..30)) {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let exact = PredictionSet::new(rows.clone(), rows.clone(), 1).unwrap();
        prop_assert_eq!(exact.rmse(), 0.0);
        let mut shifted = rows.clone();
        shifted[0][0] += 0.25;
        let off = PredictionSet::new(shifted, rows, 1).unwrap();
        prop_assert!(off.rmse() > 0.0);
    }

    #[test]
    fn windows_reference_source_indices(
        len in 30usize..120,
        n_samples in 1usize..5,
        stride in 1usize..4,
        horizon in 1usize..4,
    ) {
        let series = Series::new((0..len).map(|v| v as f64).collect());
        let spec = WindowSpec { n_samples, stride, horizon };
        prop_assume!(len >= spec.min_series_len());
        let ds = make_windows(&series, spec).unwrap();
        let span = spec.input_span();
        for (w, (input, target)) in ds.inputs.iter().zip(&ds.targets).enumerate() {
            let anchor = span + w;
            for (k, v) in input.iter().enumerate() {
                prop_assert_eq!(*v, series.values[anchor - span + k * stride]);
            }
            for (j, v) in target.iter().enumerate() {
                prop_assert_eq!(*v, series.values[anchor + 1 + j]);
            }
        }
    }

    #[test]
    fn scaling_round_trips(values in value_vec(20)) {
        let series = Series::new(values.clone());
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(max - min > 1e-6);
        let scaled = scale_unit(&series, 0..values.len()).unwrap();
        for (orig, v) in values.iter().zip(&scaled.values) {
            let back = scaled.unscale(*v).unwrap();
            prop_assert!((back - orig).abs() <= 1e-12 * orig.abs().max(1.0));
        }
    }

    #[test]
    fn adam_step_size_bounded(grads in proptest::collection::vec(-100.0..100.0f64, 8), steps in 1usize..40) {
        let mut set = ParamSet::new();
        let id = set.insert("p", ParamKind::Weight, Tensor::zeros(8, 1)).unwrap();
        let tconfig = TrainConfig::default();
        let mut state = AdamState::new(&set, &tconfig);
        for _ in 0..steps {
            let before: Vec<f64> = set.value(id).data().to_vec();
            set.zero_grads();
            let mut scratch = set.grad_scratch();
            scratch.get_mut(id).data_mut().copy_from_slice(&grads);
            set.accumulate_grads(&scratch, 1.0).unwrap();
            adam_step(&mut set, &mut state).unwrap();
            for (a, b) in before.iter().zip(set.value(id).data()) {
                prop_assert!((a - b).abs() <= 3.0 * tconfig.alpha + 1e-15);
            }
        }
    }

    #[test]
    fn serialization_round_trips_bit_exactly(
        seed in 0u64..500,
        n_h in 1usize..5,
        d_z in 1usize..4,
        horizon in 1usize..4,
        literal in proptest::bool::ANY,
        baseline in proptest::bool::ANY,
    ) {
        let config = ModelConfig {
            d_fx: 3,
            d_z,
            d_fz: 2,
            n_h,
            horizon,
            cell_variant: if literal { CellVariant::PaperLiteral } else { CellVariant::Standard },
            mode: if baseline { Mode::LstmBaseline } else { Mode::Alstm },
            ..ModelConfig::default()
        };
        let model = AlstmParams::init(config, seed).unwrap();
        let text = write_model_string(&model);
        let parsed = parse_model(&text).unwrap();
        prop_assert_eq!(write_model_string(&parsed), text);
    }
}
