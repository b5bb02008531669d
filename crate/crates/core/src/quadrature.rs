//! Composite Gauss-Legendre rules on the uniform mesh.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// An `n`-point Gauss-Legendre rule mapped to the reference cell `[0, 1]`.
///
/// Exact for polynomials of degree `2n - 1`.
#[derive(Debug, Clone)]
pub struct CellRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CellRule {
    pub fn new(points: usize) -> Result<Self> {
        let points = NonZeroUsize::new(points).ok_or(Error::TooFewNodes { got: 0, min: 1 })?;
        let rule = GaussLegendre::new(points);
        let mut pairs: Vec<(f64, f64)> = rule
            .nodes()
            .zip(rule.weights())
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self { nodes, weights })
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in `[0, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights summing to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_0^1 f` over `cells` equal cells.
    pub fn integrate_composite(&self, cells: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 1.0 / cells as f64;
        let mut total = 0.0;
        for c in 0..cells {
            let mut local = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                local += w * f((c as f64 + x) * h);
            }
            total += local;
        }
        total * h
    }
}
