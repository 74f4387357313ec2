//! Random device populations, directed resistor-network topology, and the
//! effective coupling matrices derived from them.
//!
//! Each node feeds its drain voltage to the gates of its out-neighbors
//! through a weighting resistor `R_w`. Summing currents at a gate gives an
//! effective adjacency matrix `A`, a leak vector `f`, and per-node
//! normalizers `S`. With the gate-leak term neglected, `A` is row-stochastic
//! over every node that has at least one in-edge.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::device::OectParams;

/// Mean and standard deviation of one device parameter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }
}

/// Sampling distributions for every [`OectParams`] field.
///
/// Each parameter is drawn from a gamma distribution matching the given
/// mean and standard deviation; a zero standard deviation collapses to the
/// exact mean, which is how the negative-mean voltages are specified.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ParamDistributions {
    pub v_bias: MeanStd,
    pub v_p: MeanStd,
    pub r: MeanStd,
    pub r_g: MeanStd,
    pub c_g: MeanStd,
    pub k_p: MeanStd,
    pub w: MeanStd,
    pub l: MeanStd,
}

impl Default for ParamDistributions {
    fn default() -> Self {
        Self {
            v_bias: MeanStd::new(-0.5, 0.0),
            v_p: MeanStd::new(-0.6, 0.0),
            r: MeanStd::new(500.0, 100.0),
            r_g: MeanStd::new(2.7e4, 2.7e3),
            c_g: MeanStd::new(8.98e-7, 8.98e-8),
            k_p: MeanStd::new(5.82e-4, 5.82e-5),
            w: MeanStd::new(1.01e-4, 0.0),
            l: MeanStd::new(2.0e-4, 0.0),
        }
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("parameter {name}: gamma sampling requires mean > 0 when std > 0 (mean = {mean}, std = {std})")]
    InvalidDistribution {
        name: &'static str,
        mean: f64,
        std: f64,
    },
}

/// Directed resistor network: `r_w[(n, m)]` is the weighting resistor on
/// the edge from drain `m` to gate `n`, infinite when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistorNetwork {
    pub n: usize,
    pub r_w: DMatrix<f64>,
    /// Per-node effective gate resistance, shared with the device array.
    pub r_g: Vec<f64>,
}

impl ResistorNetwork {
    /// Overwrites the per-node gate resistances with the ones carried by a
    /// sampled device array, so coupling and device dynamics agree.
    pub fn with_gate_resistances(mut self, devices: &[OectParams]) -> Self {
        assert_eq!(devices.len(), self.n);
        self.r_g = devices.iter().map(|d| d.r_g).collect();
        self
    }
}

/// Effective gate-coupling matrices of a resistor network.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    /// Effective adjacency: `a[(n, m)] = 1 / (R_w^{nm} S^n)`.
    pub a: DMatrix<f64>,
    /// Leak vector: `f^n = 1 / (R_G^n S^n)`, zero when the leak is neglected.
    pub f: DVector<f64>,
    /// Normalizers `S^n` in 1/Ohm.
    pub s: DVector<f64>,
    pub leak_neglected: bool,
}

/// Input layer: `w_in` maps a d-dimensional task signal to per-node gate
/// voltage contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMatrix {
    pub w_in: DMatrix<f64>,
}

fn sample_param(
    name: &'static str,
    dist: MeanStd,
    rng: &mut impl Rng,
) -> Result<f64, NetworkError> {
    if dist.std == 0.0 {
        return Ok(dist.mean);
    }
    if dist.mean <= 0.0 || dist.std < 0.0 {
        return Err(NetworkError::InvalidDistribution {
            name,
            mean: dist.mean,
            std: dist.std,
        });
    }
    let var = dist.std * dist.std;
    let shape = dist.mean * dist.mean / var;
    let scale = var / dist.mean;
    let gamma = Gamma::new(shape, scale).expect("positive shape and scale");
    Ok(gamma.sample(rng))
}

/// Draws `n` independent device parameter sets from `dists`.
pub fn sample_device_array(
    dists: &ParamDistributions,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<OectParams>, NetworkError> {
    assert!(n >= 1);
    let mut devices = Vec::with_capacity(n);
    for _ in 0..n {
        devices.push(OectParams {
            v_bias: sample_param("v_bias", dists.v_bias, rng)?,
            v_p: sample_param("v_p", dists.v_p, rng)?,
            r: sample_param("r", dists.r, rng)?,
            r_g: sample_param("r_g", dists.r_g, rng)?,
            c_g: sample_param("c_g", dists.c_g, rng)?,
            k_p: sample_param("k_p", dists.k_p, rng)?,
            w: sample_param("w", dists.w, rng)?,
            l: sample_param("l", dists.l, rng)?,
        });
    }
    Ok(devices)
}

/// Directed Erdős–Rényi topology without self-loops. Every ordered pair
/// `(m -> n)`, `m != n`, carries an edge with probability `p`, weighted by
/// a resistance drawn from `Uniform(r_low, r_high)`.
pub fn sample_topology(
    n: usize,
    p: f64,
    rng: &mut impl Rng,
    r_low: f64,
    r_high: f64,
) -> ResistorNetwork {
    assert!((0.0..=1.0).contains(&p));
    assert!(0.0 < r_low && r_low <= r_high);
    let mut r_w = DMatrix::from_element(n, n, f64::INFINITY);
    for row in 0..n {
        for col in 0..n {
            if row == col {
                continue;
            }
            if rng.random::<f64>() < p {
                r_w[(row, col)] = rng.random_range(r_low..=r_high);
            }
        }
    }
    let nominal_r_g = ParamDistributions::default().r_g.mean;
    ResistorNetwork {
        n,
        r_w,
        r_g: vec![nominal_r_g; n],
    }
}

/// Builds the effective adjacency `A`, leak vector `f`, and normalizers `S`.
///
/// With the leak neglected, a node with no in-edges has `S = 0`; its row of
/// `A` and its `f` entry are set to zero, so the node is driven only by the
/// external input.
pub fn effective_coupling(net: &ResistorNetwork, leak_neglected: bool) -> CouplingMatrix {
    let n = net.n;
    let mut a = DMatrix::zeros(n, n);
    let mut f = DVector::zeros(n);
    let mut s = DVector::zeros(n);
    for node in 0..n {
        let leak = if leak_neglected {
            0.0
        } else {
            1.0 / net.r_g[node]
        };
        let mut total = leak;
        for m in 0..n {
            total += 1.0 / net.r_w[(node, m)];
        }
        s[node] = total;
        if total == 0.0 {
            continue;
        }
        for m in 0..n {
            a[(node, m)] = 1.0 / (net.r_w[(node, m)] * total);
        }
        f[node] = leak / total;
    }
    CouplingMatrix {
        a,
        f,
        s,
        leak_neglected,
    }
}

/// Input matrix with i.i.d. `Uniform(-sigma, sigma)` entries.
pub fn sample_input_matrix(n: usize, d: usize, sigma: f64, rng: &mut impl Rng) -> InputMatrix {
    assert!(n >= 1 && d >= 1);
    assert!(sigma > 0.0);
    let w_in = DMatrix::from_fn(n, d, |_, _| rng.random_range(-sigma..sigma));
    InputMatrix { w_in }
}

/// Spectral-radius estimate by power iteration, tracking the geometric mean
/// of the per-step norm growth so complex dominant eigenvalue pairs also
/// converge.
pub fn spectral_radius_estimate(m: &DMatrix<f64>, iters: usize) -> f64 {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut log_sum = 0.0;
    let mut counted = 0usize;
    let burn_in = iters / 2;
    for i in 0..iters {
        v = m * &v;
        let s = v.norm();
        if s == 0.0 {
            return 0.0;
        }
        v /= s;
        if i >= burn_in {
            log_sum += s.ln();
            counted += 1;
        }
    }
    (log_sum / counted as f64).exp()
}
