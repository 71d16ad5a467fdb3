use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SolverError;

/// Ordered 1D node list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub nodes: Vec<f64>,
    /// Index of the node at `r2`, when the mesh carries one.
    pub interface: Option<usize>,
}

impl Mesh1D {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, SolverError> {
        if nodes.len() < 2 {
            return Err(SolverError::Mesh("need at least two nodes".into()));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(SolverError::Mesh(alloc::format!("nodes not strictly increasing at {}", w[0])));
            }
        }
        Ok(Self { nodes, interface: None })
    }

    /// `n` equal elements on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self, SolverError> {
        let n = n.max(1);
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        nodes[n] = b;
        Self::from_nodes(nodes)
    }

    /// Uniform pieces between consecutive `breaks`, with `counts[k]` elements
    /// on piece `k`. Every break is a node.
    pub fn piecewise(breaks: &[f64], counts: &[usize]) -> Result<Self, SolverError> {
        if breaks.len() != counts.len() + 1 {
            return Err(SolverError::Mesh("breaks and counts disagree".into()));
        }
        let mut nodes = alloc::vec![breaks[0]];
        for (k, &n) in counts.iter().enumerate() {
            let (a, b) = (breaks[k], breaks[k + 1]);
            let n = n.max(1);
            for i in 1..n {
                nodes.push(a + (b - a) * i as f64 / n as f64);
            }
            nodes.push(b);
        }
        Self::from_nodes(nodes)
    }

    /// Pieces between `breaks` with element size close to `h`.
    pub fn with_spacing(breaks: &[f64], h: f64) -> Result<Self, SolverError> {
        let counts: Vec<usize> = breaks
            .windows(2)
            .map(|w| libm::ceil((w[1] - w[0]) / h - 1e-9).max(1.0) as usize)
            .collect();
        Self::piecewise(breaks, &counts)
    }

    /// Marks the node at `r2`; errors when no node lies within `1e-12` of it.
    pub fn mark_interface(mut self, r2: f64) -> Result<Self, SolverError> {
        let k = self.node_index(r2).ok_or(SolverError::NotANode { r: r2 })?;
        self.nodes[k] = r2;
        self.interface = Some(k);
        Ok(self)
    }

    pub fn node_index(&self, r: f64) -> Option<usize> {
        let tol = 1e-12 * r.abs().max(1.0);
        self.nodes.iter().position(|&x| (x - r).abs() <= tol)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn element(&self, k: usize) -> (f64, f64) {
        (self.nodes[k], self.nodes[k + 1])
    }

    pub fn sizes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn h_max(&self) -> f64 {
        self.sizes().into_iter().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.sizes().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Element containing `r`; the right end belongs to the last element.
    pub fn locate(&self, r: f64) -> Option<usize> {
        if r < self.start() || r > self.end() {
            return None;
        }
        let k = self.nodes.partition_point(|&x| x <= r);
        Some(k.saturating_sub(1).min(self.elements() - 1))
    }
}
