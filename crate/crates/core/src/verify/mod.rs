//! Checkers that measure both sides of the regularity estimates on discrete
//! fields and report the implied constants and fitted exponents.
//!
//! Every checker returns an [`EstimateReport`]. Quantities are node based:
//! integrals are node sums weighted by `h^d dt`, means are node averages and
//! sup norms are node maxima.

mod dnl;
mod pairs;
mod plaplace;
mod report;

pub use dnl::{
    check_compact_bounds, check_dnl_regularity, check_extinction_decay, empirical_harnack, RegularityReports,
    DEFAULT_GAMMA,
};
pub use pairs::{fit_holder_exponent, HolderFit};
pub use plaplace::{
    alpha_star, check_campanato_decay, check_comparison_estimate, check_comparison_principle,
    check_comparison_principle_below, check_energy_estimate, check_gluing, check_gradient_sup_bound,
    check_moser_bound, check_osc_comparison, check_oscillation_lemma, scaling_deficit, COMPARISON_TOL,
    OSC_COMPARISON_TOL,
};
pub use report::{write_csv, Budget, EstimateReport, CSV_COLUMNS};

use crate::fields::gradient;
use crate::fields::SpaceTimeField;
use crate::geometry::NodeSet;

/// Nodal gradients of `u` at every level of `set`, indexed by `level - first_level`.
pub(crate) fn level_gradients(u: &SpaceTimeField, set: &NodeSet) -> Vec<Vec<f64>> {
    set.levels().map(|l| gradient(u, l)).collect()
}

/// Frobenius norm of the gradient block of node `v` in a [`gradient`] vector.
pub(crate) fn block_norm(grad: &[f64], v: usize, width: usize) -> f64 {
    grad[v * width..(v + 1) * width].iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Node-sum quadrature weight `h^d dt`.
pub(crate) fn space_time_weight(u: &SpaceTimeField) -> f64 {
    u.grid().cell_volume() * u.grid().dt()
}
