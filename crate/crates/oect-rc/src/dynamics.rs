//! Time integration of the coupled reservoir equations.
//!
//! The gate-drain algebraic loop is closed by lagging: the coupling sum
//! uses the drain voltages from the previous step, the channel voltages
//! advance by one RK4 step with that coupling frozen, and the drain
//! voltages are then updated once from the new channel voltages.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::device::{derived_coefficients, drain_voltage, CoeffPair, OectParams};
use crate::network::{CouplingMatrix, InputMatrix};
use crate::readout::ReadoutMatrix;

/// Instantaneous reservoir state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    /// Channel voltages (V).
    pub v1: DVector<f64>,
    /// Most recent drain voltages (V).
    pub v_d: DVector<f64>,
    /// Elapsed time (s).
    pub t: f64,
}

/// Recorded open-loop trajectory: drain-voltage rows aligned with the
/// inputs that drove them.
#[derive(Debug, Clone, PartialEq)]
pub struct StateHistory {
    pub times: Vec<f64>,
    /// T x n drain voltages; row `j` is the state after the step driven by
    /// input row `j`.
    pub v_d_rows: DMatrix<f64>,
    /// T x d drive values.
    pub inputs: DMatrix<f64>,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("integration diverged to a non-finite state at step {step}")]
    Divergence { step: usize },
}

/// Gate voltages `V_G = f .* V1 + A * V_D_prev + external`.
pub fn gate_voltages(
    coupling: &CouplingMatrix,
    state: &ReservoirState,
    external: &DVector<f64>,
) -> DVector<f64> {
    assert_eq!(state.v1.len(), coupling.a.nrows());
    assert_eq!(external.len(), coupling.a.nrows());
    &coupling.a * &state.v_d + coupling.f.component_mul(&state.v1) + external
}

/// Advances the reservoir by one step of size `dt`.
///
/// `external` and the lagged drain voltages are held constant while the
/// channel voltages take one RK4 step; the drain voltages are then updated
/// from the new channel voltages.
pub fn reservoir_step(
    devices: &[OectParams],
    coeffs: &[CoeffPair],
    coupling: &CouplingMatrix,
    state: &ReservoirState,
    external: &DVector<f64>,
    dt: f64,
) -> Result<ReservoirState, DynamicsError> {
    assert!(dt > 0.0);
    let n = devices.len();
    assert_eq!(coeffs.len(), n);
    assert_eq!(state.v1.len(), n);

    // Coupling contribution that stays frozen over the step.
    let frozen = {
        let mut c = &coupling.a * &state.v_d;
        c += external;
        c
    };

    let mut v1_new = DVector::zeros(n);
    for i in 0..n {
        let tau = devices[i].r_g * devices[i].c_g;
        let f = coupling.f[i];
        let c = frozen[i];
        // dv1/dt = (f*v1 + c - v1) / tau, scalar linear ODE per node.
        let rate = |v1: f64| ((f - 1.0) * v1 + c) / tau;
        let v1 = state.v1[i];
        let k1 = rate(v1);
        let k2 = rate(v1 + 0.5 * dt * k1);
        let k3 = rate(v1 + 0.5 * dt * k2);
        let k4 = rate(v1 + dt * k3);
        v1_new[i] = v1 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    let mut v_g_new = frozen;
    for i in 0..n {
        v_g_new[i] += coupling.f[i] * v1_new[i];
    }
    let mut v_d_new = DVector::zeros(n);
    for i in 0..n {
        let (vd, _) = drain_voltage(&devices[i], &coeffs[i], v_g_new[i], v1_new[i]);
        v_d_new[i] = vd;
    }

    if !v1_new.iter().chain(v_d_new.iter()).all(|x| x.is_finite()) {
        return Err(DynamicsError::Divergence { step: 0 });
    }

    Ok(ReservoirState {
        v1: v1_new,
        v_d: v_d_new,
        t: state.t + dt,
    })
}

/// Reservoir behind a common stepping interface, so the OECT network and
/// the tanh baseline share the training, prediction, and sweep code paths.
pub trait Reservoir {
    /// Advances one step of the internal dynamics driven by a task-space
    /// input vector.
    fn step(&mut self, input: &[f64]) -> Result<(), DynamicsError>;
    /// Current readout state vector.
    fn readout_state(&self) -> DVector<f64>;
    /// Readout dimensionality.
    fn dim(&self) -> usize;
    /// Elapsed time in task units.
    fn time(&self) -> f64;
}

/// OECT network reservoir.
pub struct OectReservoir {
    devices: Vec<OectParams>,
    coeffs: Vec<CoeffPair>,
    coupling: CouplingMatrix,
    w_in: InputMatrix,
    state: ReservoirState,
    dt: f64,
}

impl OectReservoir {
    /// Cold start: zero channel voltages, drain voltages evaluated once at
    /// `V_G = 0`.
    pub fn cold_start(
        devices: Vec<OectParams>,
        coupling: CouplingMatrix,
        w_in: InputMatrix,
        dt: f64,
    ) -> Self {
        let n = devices.len();
        assert_eq!(coupling.a.nrows(), n);
        assert_eq!(w_in.w_in.nrows(), n);
        let coeffs: Vec<CoeffPair> = devices.iter().map(derived_coefficients).collect();
        let v1 = DVector::zeros(n);
        let v_d = DVector::from_fn(n, |i, _| {
            drain_voltage(&devices[i], &coeffs[i], 0.0, 0.0).0
        });
        Self {
            devices,
            coeffs,
            coupling,
            w_in,
            state: ReservoirState { v1, v_d, t: 0.0 },
            dt,
        }
    }

    pub fn state(&self) -> &ReservoirState {
        &self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

impl Reservoir for OectReservoir {
    fn step(&mut self, input: &[f64]) -> Result<(), DynamicsError> {
        assert_eq!(input.len(), self.w_in.w_in.ncols());
        let u = DVector::from_column_slice(input);
        let external = &self.w_in.w_in * u;
        self.state = reservoir_step(
            &self.devices,
            &self.coeffs,
            &self.coupling,
            &self.state,
            &external,
            self.dt,
        )?;
        Ok(())
    }

    fn readout_state(&self) -> DVector<f64> {
        self.state.v_d.clone()
    }

    fn dim(&self) -> usize {
        self.devices.len()
    }

    fn time(&self) -> f64 {
        self.state.t
    }
}

/// Drives the reservoir with the rows of `drive` and records the readout
/// state after every step.
pub fn run_open_loop(
    reservoir: &mut dyn Reservoir,
    drive: &DMatrix<f64>,
) -> Result<StateHistory, DynamicsError> {
    assert!(drive.nrows() >= 1);
    let steps = drive.nrows();
    let n = reservoir.dim();
    let mut times = Vec::with_capacity(steps);
    let mut v_d_rows = DMatrix::zeros(steps, n);
    for j in 0..steps {
        let input: Vec<f64> = drive.row(j).iter().copied().collect();
        reservoir
            .step(&input)
            .map_err(|_| DynamicsError::Divergence { step: j })?;
        v_d_rows.row_mut(j).copy_from_slice(reservoir.readout_state().as_slice());
        times.push(reservoir.time());
    }
    Ok(StateHistory {
        times,
        v_d_rows,
        inputs: drive.clone(),
    })
}

/// Runs the reservoir autonomously: each step is driven by the readout of
/// the previous state, and the prediction rows are the readouts of the new
/// states.
pub fn run_closed_loop(
    reservoir: &mut dyn Reservoir,
    w_out: &ReadoutMatrix,
    steps: usize,
) -> Result<DMatrix<f64>, DynamicsError> {
    let d = w_out.w_out.nrows();
    let mut predictions = DMatrix::zeros(steps, d);
    for j in 0..steps {
        let z = &w_out.w_out * reservoir.readout_state();
        reservoir
            .step(z.as_slice())
            .map_err(|_| DynamicsError::Divergence { step: j })?;
        let z_new = &w_out.w_out * reservoir.readout_state();
        predictions.row_mut(j).copy_from_slice(z_new.as_slice());
    }
    Ok(predictions)
}

/// Writes a recorded trajectory as CSV with header `t,vd_0,...,vd_{n-1}`.
pub fn write_history_csv(
    history: &StateHistory,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    let n = history.v_d_rows.ncols();
    let header: Vec<String> = (0..n).map(|i| format!("vd_{i}")).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (j, t) in history.times.iter().enumerate() {
        let row: Vec<String> = history.v_d_rows.row(j).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{t},{}", row.join(","))?;
    }
    Ok(())
}
