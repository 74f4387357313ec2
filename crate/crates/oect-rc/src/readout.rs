//! Ridge-regression training of the linear output layer.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dynamics::StateHistory;

/// Trained linear readout mapping drain voltages to task coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutMatrix {
    /// d x n output matrix.
    pub w_out: DMatrix<f64>,
}

/// Portion of a recorded history used for fitting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingWindow {
    /// Leading transient rows discarded before the fit.
    pub washout_steps: usize,
    /// Rows entering the fit after the washout.
    pub fit_steps: usize,
}

#[derive(Debug, Error)]
pub enum ReadoutError {
    #[error("history has {available} rows but the window needs {needed}")]
    NotEnoughRows { available: usize, needed: usize },
    #[error("state matrix is ill-conditioned (condition number {cond:.3e}) and alpha = 0")]
    IllConditioned { cond: f64 },
    #[error("readout i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed readout file: {0}")]
    Parse(String),
}

/// Minimizes `sum_j ||W V_D(t_j) - u(t_j)||^2 + alpha ||W||_F^2` over the
/// post-washout window via the singular value decomposition of the stacked
/// state matrix.
pub fn ridge_fit(
    history: &StateHistory,
    targets: &DMatrix<f64>,
    alpha: f64,
    window: &TrainingWindow,
) -> Result<ReadoutMatrix, ReadoutError> {
    assert!(alpha >= 0.0);
    assert!(window.fit_steps >= 1);
    assert_eq!(history.v_d_rows.nrows(), targets.nrows());
    let needed = window.washout_steps + window.fit_steps;
    let available = history.v_d_rows.nrows();
    if available < needed {
        return Err(ReadoutError::NotEnoughRows { available, needed });
    }

    let x = history
        .v_d_rows
        .rows(window.washout_steps, window.fit_steps)
        .into_owned();
    let y = targets
        .rows(window.washout_steps, window.fit_steps)
        .into_owned();

    let svd = x.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let sigma = &svd.singular_values;

    let s_max = sigma.max();
    let s_min = sigma.min();
    if alpha == 0.0 && (s_min <= 0.0 || s_max / s_min > 1e12) {
        let cond = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
        return Err(ReadoutError::IllConditioned { cond });
    }

    // W = V diag(s / (s^2 + alpha)) U^T Y, with rows mapping to w_out columns.
    let mut uty = u.transpose() * &y;
    for (i, mut row) in uty.row_iter_mut().enumerate() {
        let s = sigma[i];
        row *= s / (s * s + alpha);
    }
    let w = v_t.transpose() * uty; // n x d
    Ok(ReadoutMatrix { w_out: w.transpose() })
}

/// Applies the readout: `W_out * v_d`.
pub fn readout_apply(w: &ReadoutMatrix, v_d: &DVector<f64>) -> DVector<f64> {
    assert_eq!(w.w_out.ncols(), v_d.len());
    &w.w_out * v_d
}

impl ReadoutMatrix {
    /// Plain-text serialization: header line `d n`, then d rows of n
    /// space-separated entries.
    pub fn write_text(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.w_out.nrows(), self.w_out.ncols())?;
        for row in self.w_out.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text(input: &str) -> Result<Self, ReadoutError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| ReadoutError::Parse("empty file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| ReadoutError::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_, _>>()?;
        let [d, n] = dims[..] else {
            return Err(ReadoutError::Parse(format!("bad header {header:?}")));
        };
        let mut w_out = DMatrix::zeros(d, n);
        for i in 0..d {
            let line = lines
                .next()
                .ok_or_else(|| ReadoutError::Parse(format!("missing row {i}")))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| ReadoutError::Parse(format!("bad value {t:?}"))))
                .collect::<Result<_, _>>()?;
            if vals.len() != n {
                return Err(ReadoutError::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    vals.len()
                )));
            }
            for (j, v) in vals.iter().enumerate() {
                w_out[(i, j)] = *v;
            }
        }
        Ok(Self { w_out })
    }
}
