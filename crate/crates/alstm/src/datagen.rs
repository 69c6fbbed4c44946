//! Chaotic benchmark generators, unit scaling, windowing, and splitting.

use crate::error::{Error, Result};

/// Which coordinate of a 3-D system becomes the scalar series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    fn pick(self, s: [f64; 3]) -> f64 {
        match self {
            Component::X => s[0],
            Component::Y => s[1],
            Component::Z => s[2],
        }
    }
}

/// System equations and their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    /// dx/dt = beta*x(t) + alpha*x(t-delta) / (1 + x(t-delta)^10),
    /// integrated by the explicit midpoint (second-order Runge-Kutta) method
    /// with a constant initial history `init`.
    MackeyGlass { alpha: f64, beta: f64, delta: f64, init: f64 },
    /// dx/dt = sigma(y-x), dy/dt = rho*x - y - xz, dz/dt = xy - beta*z.
    Lorenz { sigma: f64, rho: f64, beta: f64, init: [f64; 3] },
    /// dx/dt = -z - y, dy/dt = x + a*y, dz/dt = b + z(x - c).
    Rossler { a: f64, b: f64, c: f64, init: [f64; 3] },
}

/// Declarative description of a generated series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub system: SystemSpec,
    /// Integrator step.
    pub dt: f64,
    /// Output length after the transient.
    pub n_points: usize,
    /// Leading points discarded so the trajectory settles on the attractor.
    pub transient: usize,
    pub component: Component,
}

impl SeriesSpec {
    /// Mackey-Glass benchmark: alpha=0.2, beta=-0.1, delta=17, dt=0.1,
    /// constant history 1.2, 1000-point transient, 1500 output points.
    pub fn mackey_glass() -> SeriesSpec {
        SeriesSpec {
            system: SystemSpec::MackeyGlass {
                alpha: 0.2,
                beta: -0.1,
                delta: 17.0,
                init: 1.2,
            },
            dt: 0.1,
            n_points: 1500,
            transient: 1000,
            component: Component::X,
        }
    }

    /// Lorenz benchmark: sigma=10, rho=28, beta=8/3, dt=0.01 from (1,1,1).
    pub fn lorenz() -> SeriesSpec {
        SeriesSpec {
            system: SystemSpec::Lorenz {
                sigma: 10.0,
                rho: 28.0,
                beta: 8.0 / 3.0,
                init: [1.0, 1.0, 1.0],
            },
            dt: 0.01,
            n_points: 1500,
            transient: 1000,
            component: Component::X,
        }
    }

    /// Rossler benchmark: a=0.2, b=0.2, c=4.6, dt=0.1 from (1,1,1).
    pub fn rossler() -> SeriesSpec {
        SeriesSpec {
            system: SystemSpec::Rossler {
                a: 0.2,
                b: 0.2,
                c: 4.6,
                init: [1.0, 1.0, 1.0],
            },
            dt: 0.1,
            n_points: 1500,
            transient: 1000,
            component: Component::X,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_points == 0 {
            return Err(Error::Config("n_points must be >= 1".into()));
        }
        Ok(())
    }

    /// Short textual form echoed into generated CSV headers.
    pub fn describe(&self) -> String {
        let sys = match &self.system {
            SystemSpec::MackeyGlass { alpha, beta, delta, init } => {
                format!("mackey_glass alpha={alpha} beta={beta} delta={delta} init={init}")
            }
            SystemSpec::Lorenz { sigma, rho, beta, init } => {
                format!("lorenz sigma={sigma} rho={rho} beta={beta} init={init:?}")
            }
            SystemSpec::Rossler { a, b, c, init } => {
                format!("rossler a={a} b={b} c={c} init={init:?}")
            }
        };
        format!(
            "{sys} dt={} n_points={} transient={} component={:?}",
            self.dt, self.n_points, self.transient, self.component
        )
    }
}

/// A scalar series plus the scaling range recorded by `scale_unit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub scale_min: Option<f64>,
    pub scale_max: Option<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Series {
        Series {
            values,
            scale_min: None,
            scale_max: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Map a scaled value back to the original units.
    pub fn unscale(&self, v: f64) -> Result<f64> {
        match (self.scale_min, self.scale_max) {
            (Some(lo), Some(hi)) => Ok(lo + v * (hi - lo)),
            _ => Err(Error::State("series was never scaled".into())),
        }
    }
}

/// Dispatch on the system tag.
pub fn generate(spec: &SeriesSpec) -> Result<Series> {
    spec.validate()?;
    match spec.system {
        SystemSpec::MackeyGlass { .. } => gen_mackey_glass(spec),
        SystemSpec::Lorenz { .. } => gen_lorenz(spec),
        SystemSpec::Rossler { .. } => gen_rossler(spec),
    }
}

fn mackey_deriv(alpha: f64, beta: f64, x: f64, x_delayed: f64) -> f64 {
    beta * x + alpha * x_delayed / (1.0 + x_delayed.powi(10))
}

/// Integrate the Mackey-Glass delay equation with the explicit midpoint
/// method. The delayed term of the half step uses the midpoint of the two
/// adjacent buffered values.
pub fn gen_mackey_glass(spec: &SeriesSpec) -> Result<Series> {
    spec.validate()?;
    let (alpha, beta, delta, init) = match spec.system {
        SystemSpec::MackeyGlass { alpha, beta, delta, init } => (alpha, beta, delta, init),
        _ => return Err(Error::Config("spec is not a Mackey-Glass system".into())),
    };
    let ratio = delta / spec.dt;
    let n_delay = ratio.round();
    if n_delay < 1.0 || (ratio - n_delay).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "delay {delta} is not a positive integer multiple of dt {}",
            spec.dt
        )));
    }
    let n_delay = n_delay as usize;

    let total_steps = spec.transient + spec.n_points;
    // hist[0..=n_delay] is the constant history ending at t=0; each further
    // entry is one dt step.
    let mut hist = Vec::with_capacity(n_delay + 1 + total_steps);
    hist.resize(n_delay + 1, init);
    for j in n_delay..n_delay + total_steps {
        let x = hist[j];
        let xd_now = hist[j - n_delay];
        let xd_next = hist[j + 1 - n_delay];
        let k1 = mackey_deriv(alpha, beta, x, xd_now);
        let x_mid = x + 0.5 * spec.dt * k1;
        let xd_mid = 0.5 * (xd_now + xd_next);
        let k2 = mackey_deriv(alpha, beta, x_mid, xd_mid);
        let x_next = x + spec.dt * k2;
        if !x_next.is_finite() {
            return Err(Error::Numeric(format!("Mackey-Glass diverged at step {}", j - n_delay)));
        }
        hist.push(x_next);
    }
    let start = hist.len() - spec.n_points;
    Ok(Series::new(hist[start..].to_vec()))
}

pub fn lorenz_deriv(sigma: f64, rho: f64, beta: f64, s: [f64; 3]) -> [f64; 3] {
    [
        sigma * (s[1] - s[0]),
        rho * s[0] - s[1] - s[0] * s[2],
        s[0] * s[1] - beta * s[2],
    ]
}

pub fn rossler_deriv(a: f64, b: f64, c: f64, s: [f64; 3]) -> [f64; 3] {
    [-s[2] - s[1], s[0] + a * s[1], b + s[2] * (s[0] - c)]
}

/// One classical RK4 step of a 3-D autonomous system.
pub fn rk4_step(f: impl Fn([f64; 3]) -> [f64; 3], s: [f64; 3], dt: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], w: f64| [a[0] + w * b[0], a[1] + w * b[1], a[2] + w * b[2]];
    let k1 = f(s);
    let k2 = f(add(s, k1, dt / 2.0));
    let k3 = f(add(s, k2, dt / 2.0));
    let k4 = f(add(s, k3, dt));
    [
        s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

fn gen_rk4(
    spec: &SeriesSpec,
    init: [f64; 3],
    deriv: impl Fn([f64; 3]) -> [f64; 3],
) -> Result<Series> {
    let mut state = init;
    let total = spec.transient + spec.n_points;
    let mut out = Vec::with_capacity(spec.n_points);
    for step in 0..total {
        state = rk4_step(&deriv, state, spec.dt);
        if !state.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric(format!("integration diverged at step {step}")));
        }
        if step >= spec.transient {
            out.push(spec.component.pick(state));
        }
    }
    Ok(Series::new(out))
}

pub fn gen_lorenz(spec: &SeriesSpec) -> Result<Series> {
    spec.validate()?;
    match spec.system {
        SystemSpec::Lorenz { sigma, rho, beta, init } => {
            gen_rk4(spec, init, move |s| lorenz_deriv(sigma, rho, beta, s))
        }
        _ => Err(Error::Config("spec is not a Lorenz system".into())),
    }
}

pub fn gen_rossler(spec: &SeriesSpec) -> Result<Series> {
    spec.validate()?;
    match spec.system {
        SystemSpec::Rossler { a, b, c, init } => {
            gen_rk4(spec, init, move |s| rossler_deriv(a, b, c, s))
        }
        _ => Err(Error::Config("spec is not a Rossler system".into())),
    }
}

/// Affine map onto [0,1] fitted over `fit_range` only; values outside the
/// fitted range map outside [0,1] without clipping. The range is recorded on
/// the returned series for the inverse transform.
pub fn scale_unit(series: &Series, fit_range: std::ops::Range<usize>) -> Result<Series> {
    if fit_range.end > series.len() || fit_range.is_empty() {
        return Err(Error::Config(format!(
            "fit range {fit_range:?} invalid for series of length {}",
            series.len()
        )));
    }
    let window = &series.values[fit_range];
    let min = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() || !min.is_finite() || max <= min {
        return Err(Error::Numeric(format!(
            "degenerate scale: series is constant ({min}) over the fit range"
        )));
    }
    let scale = 1.0 / (max - min);
    Ok(Series {
        values: series.values.iter().map(|v| (v - min) * scale).collect(),
        scale_min: Some(min),
        scale_max: Some(max),
    })
}

/// Lagged-window layout: `n_samples` inputs spaced `stride` apart ending at
/// the anchor, followed by `horizon` target values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub n_samples: usize,
    pub stride: usize,
    pub horizon: usize,
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.stride == 0 || self.horizon == 0 {
            return Err(Error::Config(format!(
                "window spec fields must be >= 1: n_samples={} stride={} horizon={}",
                self.n_samples, self.stride, self.horizon
            )));
        }
        Ok(())
    }

    /// Index span covered by one window's inputs.
    pub fn input_span(&self) -> usize {
        (self.n_samples - 1) * self.stride
    }

    /// Shortest series that yields at least one window.
    pub fn min_series_len(&self) -> usize {
        self.input_span() + 1 + self.horizon
    }
}

/// Supervised pairs cut from a series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    /// Each entry holds `n_samples` lagged input values.
    pub inputs: Vec<Vec<f64>>,
    /// Each entry holds `horizon` future values.
    pub targets: Vec<Vec<f64>>,
    pub spec: WindowSpec,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Cut every valid window: anchors run from `input_span()` to
/// `len - 1 - horizon`, advancing by one; inputs sit at
/// anchor - (n_samples-1)*stride, ..., anchor - stride, anchor and targets at
/// anchor+1 ..= anchor+horizon.
pub fn make_windows(series: &Series, spec: WindowSpec) -> Result<WindowedDataset> {
    spec.validate()?;
    let len = series.len();
    if len < spec.min_series_len() {
        return Err(Error::Config(format!(
            "series of length {len} too short for windows: need at least {}",
            spec.min_series_len()
        )));
    }
    let span = spec.input_span();
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for anchor in span..len - spec.horizon {
        let input: Vec<f64> = (0..spec.n_samples)
            .map(|k| series.values[anchor - span + k * spec.stride])
            .collect();
        let target = series.values[anchor + 1..=anchor + spec.horizon].to_vec();
        inputs.push(input);
        targets.push(target);
    }
    Ok(WindowedDataset { inputs, targets, spec })
}

/// Contiguous prefix/suffix split with no shuffling.
pub fn split_train_test(series: &Series, n_train: usize) -> Result<(Series, Series)> {
    if n_train == 0 || n_train >= series.len() {
        return Err(Error::Config(format!(
            "n_train {n_train} out of range for series of length {}",
            series.len()
        )));
    }
    let train = Series {
        values: series.values[..n_train].to_vec(),
        scale_min: series.scale_min,
        scale_max: series.scale_max,
    };
    let test = Series {
        values: series.values[n_train..].to_vec(),
        scale_min: series.scale_min,
        scale_max: series.scale_max,
    };
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mackey_constant_history_is_a_fixed_point() {
        // At alpha=0.2, beta=-0.1 the constant solution x=1 satisfies
        // beta*1 + alpha*1/(1+1) = 0 exactly, so the series never moves.
        let spec = SeriesSpec {
            system: SystemSpec::MackeyGlass {
                alpha: 0.2,
                beta: -0.1,
                delta: 17.0,
                init: 1.0,
            },
            dt: 0.1,
            n_points: 2000,
            transient: 0,
            component: Component::X,
        };
        let series = gen_mackey_glass(&spec).unwrap();
        assert_eq!(series.len(), 2000);
        for &v in &series.values {
            assert!((v - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mackey_first_step_matches_fine_rk4_oracle() {
        // While t < delta the delayed term is the constant history, so the
        // equation reduces to dx/dt = beta*x + alpha*1.2/(1+1.2^10). Integrate
        // that with RK4 at dt=0.001 as an independent reference.
        let spec = SeriesSpec {
            system: SystemSpec::MackeyGlass {
                alpha: 0.2,
                beta: -0.1,
                delta: 17.0,
                init: 1.2,
            },
            dt: 0.1,
            n_points: 1,
            transient: 0,
            component: Component::X,
        };
        let first = gen_mackey_glass(&spec).unwrap().values[0];

        let forcing = 0.2 * 1.2 / (1.0 + 1.2_f64.powi(10));
        let f = |x: f64| -0.1 * x + forcing;
        let mut x = 1.2;
        let h = 0.001;
        for _ in 0..100 {
            let k1 = f(x);
            let k2 = f(x + h / 2.0 * k1);
            let k3 = f(x + h / 2.0 * k2);
            let k4 = f(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!(
            (first - x).abs() <= 1e-6,
            "midpoint step {first} vs reference {x}"
        );
    }

    #[test]
    fn mackey_output_length_contract() {
        let spec = SeriesSpec {
            n_points: 1500,
            transient: 1000,
            ..SeriesSpec::mackey_glass()
        };
        assert_eq!(gen_mackey_glass(&spec).unwrap().len(), 1500);
    }

    #[test]
    fn mackey_rejects_non_integer_delay_ratio() {
        let spec = SeriesSpec {
            system: SystemSpec::MackeyGlass {
                alpha: 0.2,
                beta: -0.1,
                delta: 17.05,
                init: 1.2,
            },
            ..SeriesSpec::mackey_glass()
        };
        assert!(matches!(gen_mackey_glass(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn mackey_is_deterministic() {
        let spec = SeriesSpec::mackey_glass();
        assert_eq!(gen_mackey_glass(&spec).unwrap(), gen_mackey_glass(&spec).unwrap());
    }

    #[test]
    fn lorenz_derivative_values() {
        assert_eq!(lorenz_deriv(10.0, 28.0, 8.0 / 3.0, [0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        let d = lorenz_deriv(10.0, 28.0, 8.0 / 3.0, [1.0, 1.0, 1.0]);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 26.0);
        assert!((d[2] - (1.0 - 8.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn lorenz_origin_is_an_equilibrium() {
        let spec = SeriesSpec {
            system: SystemSpec::Lorenz {
                sigma: 10.0,
                rho: 28.0,
                beta: 8.0 / 3.0,
                init: [0.0, 0.0, 0.0],
            },
            dt: 0.01,
            n_points: 100,
            transient: 0,
            component: Component::X,
        };
        let series = gen_lorenz(&spec).unwrap();
        assert!(series.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rossler_derivative_values() {
        let d0 = rossler_deriv(0.2, 0.2, 4.6, [0.0, 0.0, 0.0]);
        assert_eq!(d0[0], 0.0);
        assert_eq!(d0[1], 0.0);
        assert!((d0[2] - 0.2).abs() < 1e-15);
        let d1 = rossler_deriv(0.2, 0.2, 4.6, [1.0, 1.0, 1.0]);
        assert_eq!(d1[0], -2.0);
        assert!((d1[1] - 1.2).abs() < 1e-15);
        assert!((d1[2] - (0.2 + (1.0 - 4.6))).abs() < 1e-15);
    }

    #[test]
    fn rk4_step_halving_agreement() {
        // One dt=0.01 step versus ten dt=0.001 sub-steps. The Lorenz bound is
        // wider because its derivatives at (1,1,1) are already ~26, so the
        // coarse step carries a larger local error (measured 2.3e-6).
        let f = |s| lorenz_deriv(10.0, 28.0, 8.0 / 3.0, s);
        let coarse = rk4_step(f, [1.0, 1.0, 1.0], 0.01);
        let mut fine = [1.0, 1.0, 1.0];
        for _ in 0..10 {
            fine = rk4_step(f, fine, 0.001);
        }
        for k in 0..3 {
            assert!((coarse[k] - fine[k]).abs() < 5e-6, "component {k}");
        }

        let g = |s| rossler_deriv(0.2, 0.2, 4.6, s);
        let coarse = rk4_step(g, [1.0, 1.0, 1.0], 0.01);
        let mut fine = [1.0, 1.0, 1.0];
        for _ in 0..10 {
            fine = rk4_step(g, fine, 0.001);
        }
        for k in 0..3 {
            assert!((coarse[k] - fine[k]).abs() < 1e-8, "component {k}");
        }
    }

    #[test]
    fn scale_unit_basic_and_inverse() {
        let s = Series::new(vec![2.0, 4.0, 6.0]);
        let scaled = scale_unit(&s, 0..3).unwrap();
        assert_eq!(scaled.values, vec![0.0, 0.5, 1.0]);
        for (orig, v) in s.values.iter().zip(&scaled.values) {
            assert!((scaled.unscale(*v).unwrap() - orig).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_unit_no_clipping_beyond_fit_range() {
        let s = Series::new(vec![1.0, 2.0, 3.0, 10.0]);
        let scaled = scale_unit(&s, 0..3).unwrap();
        assert!(scaled.values[3] > 1.0);
    }

    #[test]
    fn scale_unit_rejects_constant_fit_range() {
        let s = Series::new(vec![5.0, 5.0, 5.0]);
        assert!(matches!(scale_unit(&s, 0..3), Err(Error::Numeric(_))));
    }

    #[test]
    fn windows_index_arithmetic() {
        // len=31, n=5, stride=6, horizon=1: anchors 24..=29, so 6 windows;
        // the first has inputs at 0,6,12,18,24 and target index 25.
        let series = Series::new((0..31).map(|v| v as f64).collect());
        let ds = make_windows(
            &series,
            WindowSpec {
                n_samples: 5,
                stride: 6,
                horizon: 1,
            },
        )
        .unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.inputs[0], vec![0.0, 6.0, 12.0, 18.0, 24.0]);
        assert_eq!(ds.targets[0], vec![25.0]);
        assert_eq!(ds.inputs[5], vec![5.0, 11.0, 17.0, 23.0, 29.0]);
        assert_eq!(ds.targets[5], vec![30.0]);
    }

    #[test]
    fn windows_one_lag_pairs() {
        let series = Series::new(vec![10.0, 20.0, 30.0, 40.0]);
        let ds = make_windows(
            &series,
            WindowSpec {
                n_samples: 1,
                stride: 1,
                horizon: 1,
            },
        )
        .unwrap();
        assert_eq!(ds.len(), 3);
        for k in 0..3 {
            assert_eq!(ds.inputs[k], vec![series.values[k]]);
            assert_eq!(ds.targets[k], vec![series.values[k + 1]]);
        }
    }

    #[test]
    fn windows_five_step_count() {
        // n=15, stride=6, horizon=5: span 84, count = len - 84 - 5.
        let len = 200;
        let series = Series::new((0..len).map(|v| v as f64).collect());
        let ds = make_windows(
            &series,
            WindowSpec {
                n_samples: 15,
                stride: 6,
                horizon: 5,
            },
        )
        .unwrap();
        assert_eq!(ds.len(), len as usize - 84 - 5);
    }

    #[test]
    fn windows_too_short_names_required_length() {
        let series = Series::new(vec![0.0; 10]);
        let err = make_windows(
            &series,
            WindowSpec {
                n_samples: 5,
                stride: 6,
                horizon: 1,
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("26"), "message was: {err}");
    }

    #[test]
    fn split_is_contiguous_and_exhaustive() {
        let series = Series::new((0..1500).map(|v| v as f64).collect());
        let (train, test) = split_train_test(&series, 1000).unwrap();
        assert_eq!(train.len(), 1000);
        assert_eq!(test.len(), 500);
        let mut joined = train.values.clone();
        joined.extend_from_slice(&test.values);
        assert_eq!(joined, series.values);

        let series = Series::new((0..7000).map(|v| v as f64).collect());
        let (train, test) = split_train_test(&series, 1000).unwrap();
        assert_eq!((train.len(), test.len()), (1000, 6000));
    }

    #[test]
    fn split_rejects_out_of_range() {
        let series = Series::new(vec![1.0, 2.0]);
        assert!(split_train_test(&series, 0).is_err());
        assert!(split_train_test(&series, 2).is_err());
    }
}
