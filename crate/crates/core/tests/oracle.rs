use decaylab::oracle::compare_survival;
use decaylab::{discretize, ChannelSpec, LeeModel, QuadratureConfig};

fn fig1() -> LeeModel {
    LeeModel::new(2.0, vec![ChannelSpec::window(0.36, 0.0, 5.0).unwrap()]).unwrap()
}

fn fig2() -> LeeModel {
    LeeModel::new(
        2.0,
        vec![
            ChannelSpec::window(0.36, 0.0, 5.0).unwrap(),
            ChannelSpec::window(0.16, 0.5, 5.0).unwrap(),
        ],
    )
    .unwrap()
}

#[test]
fn finite_model_tracks_continuum_survival() {
    let model = fig1();
    let dm = discretize(&model, 4000, (-1.0, 6.0)).unwrap();
    let es = dm.eigensolve().unwrap();
    let times: Vec<f64> = (0..=50).map(|j| 0.2 * j as f64).collect();
    let spectral = model.spectral_function().unwrap();
    let report = compare_survival(&dm, &es, &spectral, &times, &QuadratureConfig::default()).unwrap();
    assert_eq!(report.compared, times.len());
    assert!(report.max_abs_dp < 1e-3, "{report:?}");
    assert!(report.unitarity_defect < 1e-10);
}

#[test]
fn refinement_changes_little() {
    let model = fig1();
    let coarse = discretize(&model, 2000, (-2.0, 7.0)).unwrap().eigensolve().unwrap();
    let fine = discretize(&model, 4000, (-1.0, 6.0)).unwrap().eigensolve().unwrap();
    for j in 0..=40 {
        let t = 0.25 * j as f64;
        let d = (coarse.survival_probability(t) - fine.survival_probability(t)).abs();
        assert!(d < 1e-3, "t = {t}: {d}");
    }
}

#[test]
fn no_isolated_level_carries_weight() {
    let model = fig1();
    let z: f64 = model.find_poles().unwrap().iter().map(|p| p.weight).sum();
    assert!(z < 1e-6);
    let es = discretize(&model, 4000, (-1.0, 6.0)).unwrap().eigensolve().unwrap();
    let outside: f64 = es
        .overlaps()
        .iter()
        .filter(|(e, _)| *e < 0.0 || *e > 5.0)
        .map(|(_, w)| w)
        .sum();
    assert!(outside < 1e-6);
}

#[test]
fn occupations_close_probability() {
    let model = fig2();
    let es = discretize(&model, 1500, (-1.0, 6.0)).unwrap().eigensolve().unwrap();
    for t in [0.0, 0.7, 3.0, 20.0] {
        let w = es.channel_occupations(t);
        let p = es.survival_probability(t);
        assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!((w.iter().sum::<f64>() + p - 1.0).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn switched_off_channel_stays_empty() {
    let model = LeeModel::new(
        2.0,
        vec![
            ChannelSpec::window(0.36, 0.0, 5.0).unwrap(),
            ChannelSpec::window(0.0, 0.5, 5.0).unwrap(),
        ],
    )
    .unwrap();
    let es = discretize(&model, 800, (-1.0, 6.0)).unwrap().eigensolve().unwrap();
    for t in [0.5, 4.0] {
        assert_eq!(es.channel_occupations(t)[1], 0.0);
    }
}
