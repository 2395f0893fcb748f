//! Gauss-Legendre quadrature over a truncated window.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const DEFAULT_NODE_COUNT: usize = 256;
pub const DEFAULT_HALFWIDTH: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    node_count: usize,
    truncation_halfwidth: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(node_count: usize, truncation_halfwidth: f64) -> Result<Self> {
        if node_count < 16 {
            return Err(Error::domain(format!("quadrature needs >= 16 nodes, got {node_count}")));
        }
        if !(truncation_halfwidth > 0.0 && truncation_halfwidth.is_finite()) {
            return Err(Error::domain("quadrature window half-width must be positive"));
        }
        let (nodes, weights) = gauss_legendre(node_count);
        Ok(Self {
            node_count,
            truncation_halfwidth,
            nodes,
            weights,
        })
    }

    /// Shared instance with 256 nodes over ±8.
    pub fn standard() -> &'static Quadrature {
        static STANDARD: OnceLock<Quadrature> = OnceLock::new();
        STANDARD.get_or_init(|| {
            Quadrature::new(DEFAULT_NODE_COUNT, DEFAULT_HALFWIDTH).expect("valid defaults")
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn truncation_halfwidth(&self) -> f64 {
        self.truncation_halfwidth
    }

    /// Integral of `f` over `[-w, w]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        let w = self.truncation_halfwidth;
        self.integrate_on(f, -w, w)
    }

    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn rule_on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

/// Integral of `f` over `[-8, 8]` with the standard rule.
pub fn integrate<F: FnMut(f64) -> f64>(f: F) -> f64 {
    Quadrature::standard().integrate(f)
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
