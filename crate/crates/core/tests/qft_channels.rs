use decaylab::evolution::qft_partial_densities;
use decaylab::{QftChannel, QftModel, QuadratureConfig};

fn times() -> Vec<f64> {
    (0..=20).map(|j| 0.25 * j as f64).collect()
}

#[test]
fn identical_channels_share_evenly() {
    let ch = QftChannel::scalar_with_width(1.0, 0.25, 0.05).unwrap();
    let model = QftModel::new(1.0, vec![ch.clone(), ch]).unwrap();
    let cd = qft_partial_densities(&model, &times(), 20.0, &QuadratureConfig::default()).unwrap();
    for j in 1..cd.times.len() {
        assert!((cd.ratio(j).unwrap() - 1.0).abs() < 1e-9, "t = {}", cd.times[j]);
    }
}

#[test]
fn silent_channel_carries_nothing() {
    let model = QftModel::new(
        1.0,
        vec![
            QftChannel::scalar_with_width(1.0, 0.25, 0.1).unwrap(),
            QftChannel::scalar(0.0, 0.35),
        ],
    )
    .unwrap();
    let cd = qft_partial_densities(&model, &times(), 20.0, &QuadratureConfig::default()).unwrap();
    assert!(cd.per_channel[1].iter().all(|&h| h == 0.0));
    for j in 0..cd.times.len() {
        assert!((cd.per_channel[0][j] - cd.total[j]).abs() <= 1e-3 * cd.total.iter().fold(0.0f64, |a, b| a.max(*b)));
    }
}

#[test]
fn ratio_settles_between_cutoffs() {
    let model = QftModel::new(
        1.0,
        vec![
            QftChannel::scalar_with_width(1.0, 0.25, 0.06).unwrap(),
            QftChannel::scalar_with_width(1.0, 0.35, 0.04).unwrap(),
        ],
    )
    .unwrap();
    let cfg = QuadratureConfig::default();
    let a = qft_partial_densities(&model, &times(), 20.0, &cfg).unwrap();
    let b = qft_partial_densities(&model, &times(), 30.0, &cfg).unwrap();
    assert!(a.sum_rule_residual < 1e-10);
    for j in 1..a.times.len() {
        let (ra, rb) = (a.ratio(j).unwrap(), b.ratio(j).unwrap());
        assert!((ra / rb - 1.0).abs() < 1e-3, "t = {}: {ra} vs {rb}", a.times[j]);
    }
}
