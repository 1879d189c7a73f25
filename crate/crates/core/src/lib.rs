pub mod emission;
pub mod error;
pub mod evolution;
pub mod lee;
pub mod numerics;
pub mod oracle;
pub mod qft;
pub mod spectral;

pub use emission::{linewidth, photon_spectrum, EmissionSpectrum};
pub use error::{DecayError, Result};
pub use evolution::{ChannelDensities, SurvivalSeries};
pub use lee::{BreitWigner, ChannelSpec, Dispersion, FormFactor, GoldenRule, LeeModel, TabulatedFormFactor};
pub use numerics::QuadratureConfig;
pub use oracle::{discretize, DiscretizedModel, Eigensystem, OracleReport};
pub use qft::{CutoffShape, QftChannel, QftChannelKind, QftModel, SelfEnergyTable};
pub use spectral::{Moment, Pole, PowerTail, SpectralFunction};
