//! Energies, fluxes, radiation, relaxation and decay diagnostics of finished runs.

mod energy;
mod radiation;
mod relaxation;
mod scattering;
mod series;

pub use energy::{flux_balance, local_energy, max_excursion, outgoing_flux, AuditSettings, FluxBalance, LocalEnergy};
pub use radiation::{
    convolution_check, cumulative_at, farfield_coverage, g_omega, radiation_functional, retarded_time,
    ConvolutionCheck, RadiationSettings,
};
pub use relaxation::{
    relaxation_series, weighted_deviation_norm, weighted_deviation_series, window_max, Relaxation,
    RelaxationSummary, WeightedNorm, ENVELOPE_WINDOW,
};
pub use scattering::{
    remainder_norm, remainder_norm_quadrature, scattering_remainder, ScatterOptions, ScatteringRemainder,
};
pub use series::{
    decay_fit, decay_fit_series, majorant, DecayFit, DecayTarget, DiagnosticSeries, FitFlag, FIT_FLOOR,
    MIN_FIT_POINTS,
};

use rayon::prelude::*;

use crate::error::Result;

/// Maps `f` over `items` in parallel, keeping the input order.
pub(crate) fn par_map<X, Y, F>(items: &[X], f: F) -> Result<Vec<Y>>
where
    X: Copy + Sync,
    Y: Send,
    F: Fn(X) -> Result<Y> + Sync,
{
    items.par_iter().map(|x| f(*x)).collect()
}
