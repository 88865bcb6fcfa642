use crate::model::{SystemConfig, MAX_N_MAX};

use super::ExperimentError;

/// Largest accepted change in a scalar result when `n_max` grows by one.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Truncations tried above the configured one before giving up.
pub const MAX_ESCALATION: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convergence {
    /// Smallest truncation whose result agrees with `n_max + 1`.
    pub n_max: usize,
    pub value: f64,
    /// `|value(n_max + 1) − value(n_max)|`.
    pub shift: f64,
}

/// Raises `n_max` from the configured value until `eval` changes by less than
/// `CONVERGENCE_TOL` between consecutive truncations.
pub fn converge_n_max<F>(cfg: &SystemConfig, mut eval: F) -> Result<Convergence, ExperimentError>
where
    F: FnMut(&SystemConfig) -> Result<f64, ExperimentError>,
{
    let limit = (cfg.n_max + MAX_ESCALATION).min(MAX_N_MAX);
    let mut c = cfg.clone();
    let mut value = eval(&c)?;
    let mut shift = f64::INFINITY;
    while c.n_max < limit {
        c.n_max += 1;
        let next = eval(&c)?;
        shift = (next - value).abs();
        if shift < CONVERGENCE_TOL {
            return Ok(Convergence { n_max: c.n_max - 1, value, shift });
        }
        value = next;
    }
    Err(ExperimentError::NotConverged { n_max: c.n_max, shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::C64;

    #[test]
    fn escalates_until_stable() {
        let cfg = SystemConfig::dimensionless([C64::new(1.0, 0.0); 3]);
        let r = converge_n_max(&cfg, |c| Ok(if c.n_max < 4 { c.n_max as f64 } else { 4.0 })).unwrap();
        assert_eq!(r.n_max, 4);
        assert_eq!(r.value, 4.0);
    }

    #[test]
    fn gives_up() {
        let cfg = SystemConfig::dimensionless([C64::new(1.0, 0.0); 3]);
        let r = converge_n_max(&cfg, |c| Ok(c.n_max as f64));
        assert!(matches!(r, Err(ExperimentError::NotConverged { .. })));
    }
}
