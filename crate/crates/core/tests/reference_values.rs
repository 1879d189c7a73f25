//! Values taken from the discretized model (N = 4000 on [-1, 6]) and checked
//! against the continuum evaluation.

use decaylab::evolution::{partial_decay_densities, survival_probability};
use decaylab::{ChannelSpec, LeeModel, QuadratureConfig};

const FIG1_SURVIVAL: [(f64, f64); 5] = [
    (0.5, 0.933296819209),
    (1.0, 0.780959148385),
    (2.0, 0.510378497148),
    (5.0, 0.166198889365),
    (10.0, 0.025385461232),
];

// (t, h1, h2) from central differences of the channel occupations
const FIG2_DENSITIES: [(f64, f64, f64); 4] = [
    (1.0, 0.3050343216, 0.1242590389),
    (2.5, 0.1061623894, 0.0556829247),
    (5.0, 0.0336339348, 0.0124288442),
    (10.0, 0.0011502691, 0.0008115192),
];

#[test]
fn fig1_survival() {
    let model = LeeModel::new(2.0, vec![ChannelSpec::window(0.36, 0.0, 5.0).unwrap()]).unwrap();
    let spectral = model.spectral_function().unwrap();
    let cfg = QuadratureConfig::default();
    for (t, p) in FIG1_SURVIVAL {
        let got = survival_probability(&spectral, t, &cfg).unwrap();
        assert!((got - p).abs() < 1e-6, "t = {t}: {got} vs {p}");
    }
}

#[test]
fn fig2_channel_densities() {
    let model = LeeModel::new(
        2.0,
        vec![
            ChannelSpec::window(0.36, 0.0, 5.0).unwrap(),
            ChannelSpec::window(0.16, 0.5, 5.0).unwrap(),
        ],
    )
    .unwrap();
    let times: Vec<f64> = (0..=100).map(|j| 0.1 * j as f64).collect();
    let cd = partial_decay_densities(&model, &times, &QuadratureConfig::default()).unwrap();
    for (t, h1, h2) in FIG2_DENSITIES {
        let j = (t / 0.1).round() as usize;
        assert!((cd.per_channel[0][j] - h1).abs() < 1e-6, "t = {t}");
        assert!((cd.per_channel[1][j] - h2).abs() < 1e-6, "t = {t}");
    }
}
