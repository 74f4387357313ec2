//! Discrete-time tanh echo state network used as the comparison baseline.
//!
//! The baseline shares the readout, task, and sweep code paths with the
//! OECT reservoir; only the stepping rule differs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsError, Reservoir};
use crate::network::spectral_radius_estimate;

/// Baseline construction constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    /// Target spectral radius of the coupling matrix.
    pub spectral_radius: f64,
    /// Input weights are drawn from `Uniform(-w_in_scale, w_in_scale)`.
    pub w_in_scale: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            spectral_radius: 1.0,
            w_in_scale: 0.03,
        }
    }
}

/// Leak-free tanh reservoir: `r <- tanh(A r + W_in u)`.
pub struct TanhReservoir {
    pub a: DMatrix<f64>,
    pub w_in: DMatrix<f64>,
    pub r: DVector<f64>,
    dt: f64,
    steps: usize,
}

impl TanhReservoir {
    /// Directed Erdős–Rényi coupling without self-loops, nonzero weights
    /// `Uniform(-1, 1)`, rescaled so the power-iteration spectral-radius
    /// estimate hits the configured target.
    pub fn sample(
        n: usize,
        d: usize,
        p: f64,
        cfg: &BaselineConfig,
        dt: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mut a = DMatrix::zeros(n, n);
        for row in 0..n {
            for col in 0..n {
                if row != col && rng.random::<f64>() < p {
                    a[(row, col)] = rng.random_range(-1.0..1.0);
                }
            }
        }
        let rho = spectral_radius_estimate(&a, 2000);
        if rho > 0.0 {
            a *= cfg.spectral_radius / rho;
        }
        let w_in = DMatrix::from_fn(n, d, |_, _| {
            rng.random_range(-cfg.w_in_scale..cfg.w_in_scale)
        });
        Self {
            a,
            w_in,
            r: DVector::zeros(n),
            dt,
            steps: 0,
        }
    }
}

/// One update of the baseline reservoir state.
pub fn tanh_step(res: &mut TanhReservoir, u: &DVector<f64>) {
    assert_eq!(u.len(), res.w_in.ncols());
    let mut pre = &res.a * &res.r + &res.w_in * u;
    pre.apply(|x| *x = x.tanh());
    res.r = pre;
    res.steps += 1;
}

impl Reservoir for TanhReservoir {
    fn step(&mut self, input: &[f64]) -> Result<(), DynamicsError> {
        let u = DVector::from_column_slice(input);
        tanh_step(self, &u);
        Ok(())
    }

    fn readout_state(&self) -> DVector<f64> {
        self.r.clone()
    }

    fn dim(&self) -> usize {
        self.r.len()
    }

    fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_zero_state() {
        let mut res = TanhReservoir {
            a: DMatrix::zeros(4, 4),
            w_in: DMatrix::zeros(4, 3),
            r: DVector::from_element(4, 0.9),
            dt: 0.01,
            steps: 0,
        };
        tanh_step(&mut res, &DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(res.r.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn state_stays_inside_unit_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut res = TanhReservoir::sample(20, 3, 0.5, &BaselineConfig::default(), 0.01, &mut rng);
        for k in 0..50 {
            let u = DVector::from_vec(vec![(k as f64).sin() * 30.0, -20.0, 45.0]);
            tanh_step(&mut res, &u);
            assert!(res.r.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn scalar_update_matches_tanh() {
        let mut res = TanhReservoir {
            a: DMatrix::zeros(1, 1),
            w_in: DMatrix::from_element(1, 1, 1.0),
            r: DVector::zeros(1),
            dt: 0.01,
            steps: 0,
        };
        tanh_step(&mut res, &DVector::from_element(1, 0.5));
        assert_relative_eq!(res.r[0], 0.462117, max_relative = 1e-5);
    }

    #[test]
    fn rescaled_coupling_hits_target_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let res = TanhReservoir::sample(80, 3, 0.2, &BaselineConfig::default(), 0.01, &mut rng);
        let rho = spectral_radius_estimate(&res.a, 2000);
        assert!((rho - 1.0).abs() < 1e-3, "rho = {rho}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            TanhReservoir::sample(15, 3, 0.3, &BaselineConfig::default(), 0.01, &mut rng)
        };
        let a = make();
        let b = make();
        assert_eq!(a.a, b.a);
        assert_eq!(a.w_in, b.w_in);
    }
}
