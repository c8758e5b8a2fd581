//! Brute-force validators for the closed forms.

pub mod boxcount;
pub mod pressure;
pub mod stopping;
pub mod variational;

pub use boxcount::{box_count_many, box_count_tau, dyadic_deltas, BoxCount, MeshAccumulator};
pub use pressure::{gamma_pressure, pressure, pressure_bruteforce, CountVectorState, PressureEstimate, PressureTable};
pub use stopping::stopping_set_sum;
pub use variational::variational_tau_ifs;
