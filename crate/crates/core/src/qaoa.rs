//! Desk-scale QAOA Max-Cut backend.
//!
//! Exact statevector simulation of `L`-layer QAOA on up to 24 qubits:
//! the problem unitary `e^{-iγC}` is a diagonal phase over the precomputed cut
//! values, and the mixer `e^{-iβ Σ X_q}` is a product of single-qubit
//! `cos β · I − i sin β · X` butterflies. Amplitude index `z` encodes qubit `q`
//! as bit `q` (little-endian); bitstrings print most significant qubit first.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::DomainBox;
use crate::rng::Stream;

/// Largest graph the simulator and the brute-force oracle accept.
pub const MAX_QUBITS: usize = 24;

pub const GRAPH_FORMAT: &str = "fvgraph/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaoaError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph has {n} nodes; at most {MAX_QUBITS} are supported")]
    TooLarge { n: usize },
    #[error("invalid QAOA problem: {0}")]
    InvalidProblem(String),
    #[error("{name}[{layer}] = {value} lies outside [0, {hi}]")]
    OutOfDomain {
        name: &'static str,
        layer: usize,
        value: f64,
        hi: f64,
    },
    #[error("shot count must be at least 1")]
    NoShots,
}

#[derive(Debug, Error)]
pub enum GraphFileError {
    #[error("graph file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported graph format {0:?}")]
    Version(String),
    #[error(transparent)]
    Graph(#[from] QaoaError),
}

/// Undirected graph with symmetric nonnegative weights and zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Build from a dense row-major `n × n` matrix.
    pub fn from_matrix(n: usize, weights: Vec<f64>) -> Result<Self, QaoaError> {
        if n < 2 {
            return Err(QaoaError::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        if n > MAX_QUBITS {
            return Err(QaoaError::TooLarge { n });
        }
        if weights.len() != n * n {
            return Err(QaoaError::InvalidGraph(format!("expected {} weights, got {}", n * n, weights.len())));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(QaoaError::InvalidGraph(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..i {
                let (a, b) = (weights[i * n + j], weights[j * n + i]);
                if a != b {
                    return Err(QaoaError::InvalidGraph(format!("asymmetric weight between {i} and {j}")));
                }
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(QaoaError::InvalidGraph(format!("weight between {i} and {j} must be finite and nonnegative")));
                }
            }
        }
        Ok(Self { n, weights })
    }

    /// Build from the rows of the strict upper triangle: `upper[i][k]` is the
    /// weight of edge `(i, i + 1 + k)`.
    pub fn from_upper(n: usize, upper: &[Vec<f64>]) -> Result<Self, QaoaError> {
        if upper.len() + 1 != n.max(1) {
            return Err(QaoaError::InvalidGraph(format!("expected {} upper rows, got {}", n.saturating_sub(1), upper.len())));
        }
        let mut w = vec![0.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            if row.len() != n - 1 - i {
                return Err(QaoaError::InvalidGraph(format!("upper row {i} should have {} entries", n - 1 - i)));
            }
            for (k, &v) in row.iter().enumerate() {
                let j = i + 1 + k;
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        Self::from_matrix(n, w)
    }

    pub fn upper_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n - 1)
            .map(|i| ((i + 1)..self.n).map(|j| self.weight(i, j)).collect())
            .collect()
    }

    /// Fully connected graph with i.i.d. `Uniform[0, 1)` weights.
    pub fn random(n: usize, rng: &mut Stream) -> Result<Self, QaoaError> {
        if n < 2 {
            return Err(QaoaError::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.next_f64();
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        Self::from_matrix(n, w)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.n).flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j))).map(|(i, j)| self.weight(i, j)).sum()
    }

    /// Relabel nodes: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, QaoaError> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(QaoaError::InvalidGraph("not a permutation".into()));
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[perm[i] * n + perm[j]] = self.weight(i, j);
            }
        }
        Self::from_matrix(n, w)
    }
}

/// `Uniform[0, 1)` fully connected graph on `n` nodes.
pub fn random_graph(n: usize, rng: &mut Stream) -> Result<WeightedGraph, QaoaError> {
    WeightedGraph::random(n, rng)
}

/// A computational basis state of `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bitstring {
    pub bits: u64,
    pub n: usize,
}

impl Bitstring {
    pub fn new(bits: u64, n: usize) -> Self {
        Self { bits, n }
    }

    pub fn bit(&self, q: usize) -> bool {
        (self.bits >> q) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        let mask = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        Self::new(!self.bits & mask, self.n)
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n)
    }
}

/// Weight of the edges crossing the partition encoded by `z`.
pub fn cut_value(g: &WeightedGraph, z: Bitstring) -> f64 {
    let mut acc = 0.0;
    for i in 0..g.n {
        for j in (i + 1)..g.n {
            if z.bit(i) != z.bit(j) {
                acc += g.weight(i, j);
            }
        }
    }
    acc
}

/// Exhaustive maximum cut. Ties go to the numerically smallest bitstring.
pub fn max_cut_oracle(g: &WeightedGraph) -> Result<(f64, Bitstring), QaoaError> {
    if g.n > MAX_QUBITS {
        return Err(QaoaError::TooLarge { n: g.n });
    }
    let mut best = (f64::NEG_INFINITY, Bitstring::new(0, g.n));
    for bits in 0..(1u64 << g.n) {
        let z = Bitstring::new(bits, g.n);
        let c = cut_value(g, z);
        if c > best.0 {
            best = (c, z);
        }
    }
    Ok(best)
}

/// Normalized amplitudes over the `2ⁿ` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|+⟩^⊗n`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amplitudes: vec![a; dim],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `a_z ← a_z · e^{−iγ C(z)}`.
    pub fn apply_phase(&mut self, diagonal: &[f64], gamma: f64) {
        for (a, &c) in self.amplitudes.iter_mut().zip(diagonal) {
            *a *= Complex64::from_polar(1.0, -gamma * c);
        }
    }

    /// `e^{−iβ X_q}` on every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        let minus_i_sin = Complex64::new(0.0, -s);
        let dim = self.amplitudes.len();
        let mut stride = 1;
        while stride < dim {
            for block in (0..dim).step_by(2 * stride) {
                for z in block..block + stride {
                    let a0 = self.amplitudes[z];
                    let a1 = self.amplitudes[z + stride];
                    self.amplitudes[z] = a0 * c + a1 * minus_i_sin;
                    self.amplitudes[z + stride] = a1 * c + a0 * minus_i_sin;
                }
            }
            stride *= 2;
        }
    }
}

/// A weighted graph, a layer count and the cached cut diagonal.
#[derive(Clone, Debug)]
pub struct QaoaProblem {
    graph: WeightedGraph,
    layers: usize,
    diagonal: Vec<f64>,
}

impl QaoaProblem {
    pub fn new(graph: WeightedGraph, layers: usize) -> Result<Self, QaoaError> {
        if layers == 0 {
            return Err(QaoaError::InvalidProblem("at least one layer is required".into()));
        }
        let n = graph.node_count();
        let diagonal = (0..(1u64 << n)).map(|z| cut_value(&graph, Bitstring::new(z, n))).collect();
        Ok(Self {
            graph,
            layers,
            diagonal,
        })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Cut value of every basis state, indexed by `z`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `[0, π]^L × [0, 2π]^L` in the `[β…, γ…]` layout.
    pub fn domain(&self) -> DomainBox {
        let l = self.layers;
        let lo = vec![0.0; 2 * l];
        let hi = std::iter::repeat_n(PI, l).chain(std::iter::repeat_n(2.0 * PI, l)).collect();
        DomainBox::new(lo, hi).expect("QAOA box is valid")
    }

    fn check(&self, beta: &[f64], gamma: &[f64]) -> Result<(), QaoaError> {
        if beta.len() != self.layers || gamma.len() != self.layers {
            return Err(QaoaError::InvalidProblem(format!(
                "expected {} β and γ values, got {} and {}",
                self.layers,
                beta.len(),
                gamma.len()
            )));
        }
        for (name, values, hi) in [("beta", beta, PI), ("gamma", gamma, 2.0 * PI)] {
            if let Some((layer, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= hi)) {
                return Err(QaoaError::OutOfDomain { name, layer, value, hi });
            }
        }
        Ok(())
    }

    /// `U_L(β_L) U_L(γ_L) … U_1(β_1) U_1(γ_1) |+⟩`.
    pub fn state(&self, beta: &[f64], gamma: &[f64]) -> Result<StateVector, QaoaError> {
        self.check(beta, gamma)?;
        let mut psi = StateVector::uniform(self.graph.node_count());
        for (&b, &g) in beta.iter().zip(gamma) {
            psi.apply_phase(&self.diagonal, g);
            psi.apply_mixer(b);
        }
        Ok(psi)
    }

    /// `⟨ψ|C|ψ⟩`.
    pub fn expectation_exact(&self, beta: &[f64], gamma: &[f64]) -> Result<f64, QaoaError> {
        let psi = self.state(beta, gamma)?;
        Ok(psi.amplitudes().iter().zip(&self.diagonal).map(|(a, c)| a.norm_sqr() * c).sum())
    }

    /// Cut values of `shots` basis states sampled from `|ψ|²` by inverse CDF
    /// (binary search over the cumulative probabilities).
    pub fn sample_cut_values(&self, beta: &[f64], gamma: &[f64], shots: u32, rng: &mut Stream) -> Result<Vec<f64>, QaoaError> {
        if shots == 0 {
            return Err(QaoaError::NoShots);
        }
        let psi = self.state(beta, gamma)?;
        let mut cdf = Vec::with_capacity(self.diagonal.len());
        let mut acc = 0.0;
        for a in psi.amplitudes() {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        Ok((0..shots)
            .map(|_| {
                let u = rng.next_f64() * total;
                let z = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                self.diagonal[z]
            })
            .collect())
    }

    /// Mean cut value over `shots` sampled basis states.
    pub fn expectation_shots(&self, beta: &[f64], gamma: &[f64], shots: u32, rng: &mut Stream) -> Result<f64, QaoaError> {
        let cuts = self.sample_cut_values(beta, gamma, shots, rng)?;
        Ok(cuts.iter().sum::<f64>() / shots as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub format: String,
    pub n: usize,
    /// Strict upper triangle, row `i` holding weights to nodes `i+1..n`.
    pub upper: Vec<Vec<f64>>,
}

pub fn write_graph(path: &Path, g: &WeightedGraph) -> Result<(), GraphFileError> {
    let file = GraphFile {
        format: GRAPH_FORMAT.into(),
        n: g.node_count(),
        upper: g.upper_rows(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph, GraphFileError> {
    let file: GraphFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format != GRAPH_FORMAT {
        return Err(GraphFileError::Version(file.format));
    }
    Ok(WeightedGraph::from_upper(file.n, &file.upper)?)
}
