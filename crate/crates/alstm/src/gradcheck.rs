//! Finite-difference validation of analytic gradients.

use crate::error::{Error, Result};
use crate::params::ParamSet;

/// Compare the gradients currently stored in `set` against central finite
/// differences of `loss_fn`, returning the maximum relative error
/// `|g_analytic - g_numeric| / max(1, |g_numeric|)` over every scalar entry.
///
/// `loss_fn` must be a deterministic function of the parameter values; it is
/// re-evaluated at perturbed points, so the stored gradients must have been
/// produced at the unperturbed values beforehand. An empty parameter set
/// yields 0.
pub fn grad_check(
    mut loss_fn: impl FnMut(&ParamSet) -> Result<f64>,
    set: &mut ParamSet,
    epsilon: f64,
) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::Config(format!(
            "grad_check epsilon {epsilon} outside [1e-7, 1e-3]"
        )));
    }
    let mut max_rel = 0.0_f64;
    for id in set.ids().collect::<Vec<_>>() {
        for k in 0..set.value(id).len() {
            let orig = set.value(id).data()[k];
            set.value_mut(id).data_mut()[k] = orig + epsilon;
            let loss_plus = loss_fn(set)?;
            set.value_mut(id).data_mut()[k] = orig - epsilon;
            let loss_minus = loss_fn(set)?;
            set.value_mut(id).data_mut()[k] = orig;
            if !loss_plus.is_finite() || !loss_minus.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss while perturbing {} entry {}",
                    set.name(id),
                    k
                )));
            }
            let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
            let analytic = set.grad(id).data()[k];
            let rel = (analytic - numeric).abs() / numeric.abs().max(1.0);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}
