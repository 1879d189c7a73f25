//! Shared fixtures for the benchmarks.

use decaylab::{ChannelSpec, LeeModel, QftChannel, QftModel};

/// One window channel, `M = 2`, `g² = 0.36` on `(0, 5)`.
pub fn single_window() -> LeeModel {
    LeeModel::new(2.0, vec![ChannelSpec::window(0.36, 0.0, 5.0).unwrap()]).unwrap()
}

/// Two window channels with different thresholds.
pub fn two_windows() -> LeeModel {
    LeeModel::new(
        2.0,
        vec![
            ChannelSpec::window(0.36, 0.0, 5.0).unwrap(),
            ChannelSpec::window(0.16, 0.5, 5.0).unwrap(),
        ],
    )
    .unwrap()
}

/// Scalar daughters with `Γ/M = 0.1`.
pub fn scalar() -> QftModel {
    QftModel::new(1.0, vec![QftChannel::scalar_with_width(1.0, 0.25, 0.1).unwrap()]).unwrap()
}
