//! Picard iteration in `ℓ_p^d`: spaces, self-maps, fixed-ball certificates,
//! scenarios and the rate functionals that bound their orbits.

mod map;
mod profile;
mod rates;
mod scenario;
mod space;

pub use map::{MapClass, MapDesc, SelfMap};
pub use profile::{ConvergenceRate, MuMetaRate, MuProfile, MuProfileDesc, MuRateDesc};
pub use rates::{
    approx_fixed_point_bound, asymptotic_regularity_rate, gamma_from_metastable_mu,
    gamma_from_mu_rate, lp_asymptotic_regularity_rate, nonexpansive_gamma, nonexpansive_omega,
    omega_decreasing_mu, omega_rate,
};
pub use scenario::{
    picard_orbit, slow_quadratic_line, FixedBallCertificate, Orbit, Scenario, ScenarioDesc,
    DEFAULT_ORBIT_CAP,
};
pub(crate) use scenario::check_dims;
pub use space::{LpSpace, TAU};
