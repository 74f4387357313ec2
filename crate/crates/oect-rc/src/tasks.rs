//! Lorenz ground truth and the forecast-horizon metric.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Lorenz system parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

/// Uniformly sampled trajectory of the 3-dimensional task signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSeries {
    pub dt: f64,
    pub rows: Vec<[f64; 3]>,
}

/// Outcome of a forecast-horizon evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastResult {
    /// Earliest time at which the L2 error exceeded the tolerance, or the
    /// full evaluated duration when it never did.
    pub horizon: f64,
    pub exceeded: bool,
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("trajectory diverged to a non-finite state at step {step}")]
    Divergence { step: usize },
    #[error("series mismatch: lengths {len_a} vs {len_b}, dt {dt_a} vs {dt_b}")]
    SeriesMismatch {
        len_a: usize,
        len_b: usize,
        dt_a: f64,
        dt_b: f64,
    },
}

/// Lorenz vector field.
pub fn lorenz_rate(u: [f64; 3], p: &LorenzParams) -> [f64; 3] {
    let [x, y, z] = u;
    [
        p.sigma * (y - x),
        x * (p.rho - z) - y,
        x * y - p.beta * z,
    ]
}

fn rk4_step(u: [f64; 3], dt: f64, p: &LorenzParams) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = lorenz_rate(u, p);
    let k2 = lorenz_rate(add(u, k1, dt / 2.0), p);
    let k3 = lorenz_rate(add(u, k2, dt / 2.0), p);
    let k4 = lorenz_rate(add(u, k3, dt), p);
    [
        u[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        u[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Classical RK4 trajectory with `steps + 1` rows starting at `u0`.
pub fn integrate_rk4(
    p: &LorenzParams,
    u0: [f64; 3],
    dt: f64,
    steps: usize,
) -> Result<TaskSeries, TaskError> {
    assert!(dt > 0.0);
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(u0);
    let mut u = u0;
    for step in 0..steps {
        u = rk4_step(u, dt, p);
        if !u.iter().all(|x| x.is_finite()) {
            return Err(TaskError::Divergence { step });
        }
        rows.push(u);
    }
    Ok(TaskSeries { dt, rows })
}

/// Reference starting point used for initial-condition sampling.
pub const IC_BASE: [f64; 3] = [-7.4, -11.1, 20.0];

/// Samples an on-attractor initial condition: perturb the base point with
/// i.i.d. `Normal(0, 0.1)` noise (standard deviation 0.1) and integrate for
/// 10 time units so the trajectory relaxes to the attractor manifold.
pub fn sample_lorenz_ic(rng: &mut impl Rng, p: &LorenzParams) -> [f64; 3] {
    let normal = Normal::new(0.0, 0.1).expect("valid std");
    let start = [
        IC_BASE[0] + normal.sample(rng),
        IC_BASE[1] + normal.sample(rng),
        IC_BASE[2] + normal.sample(rng),
    ];
    relax_to_attractor(start, p)
}

/// Integrates 10 time units forward and returns the endpoint.
pub fn relax_to_attractor(start: [f64; 3], p: &LorenzParams) -> [f64; 3] {
    let series = integrate_rk4(p, start, 0.01, 1000).expect("relaxation stays finite");
    *series.rows.last().unwrap()
}

/// Forecast horizon: earliest time at which the pointwise L2 error exceeds
/// `delta`. Both series must share `dt` and length, with row `j` holding
/// the sample at time `(j + 1) * dt` (the first predicted point).
pub fn forecast_horizon(
    truth: &TaskSeries,
    pred: &TaskSeries,
    delta: f64,
) -> Result<ForecastResult, TaskError> {
    if truth.rows.len() != pred.rows.len() || truth.dt != pred.dt {
        return Err(TaskError::SeriesMismatch {
            len_a: truth.rows.len(),
            len_b: pred.rows.len(),
            dt_a: truth.dt,
            dt_b: pred.dt,
        });
    }
    for (j, (t, q)) in truth.rows.iter().zip(&pred.rows).enumerate() {
        let err = ((t[0] - q[0]).powi(2) + (t[1] - q[1]).powi(2) + (t[2] - q[2]).powi(2)).sqrt();
        if err > delta {
            return Ok(ForecastResult {
                horizon: (j + 1) as f64 * truth.dt,
                exceeded: true,
            });
        }
    }
    Ok(ForecastResult {
        horizon: truth.rows.len() as f64 * truth.dt,
        exceeded: false,
    })
}

/// Writes a series as CSV with header `t,x,y,z`, starting at `t = 0`.
pub fn write_series_csv(series: &TaskSeries, out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "t,x,y,z")?;
    for (i, row) in series.rows.iter().enumerate() {
        writeln!(out, "{},{},{},{}", i as f64 * series.dt, row[0], row[1], row[2])?;
    }
    Ok(())
}
