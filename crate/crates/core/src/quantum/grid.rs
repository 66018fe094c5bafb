//! Gauss-Lobatto-Legendre collocation on a mapped half-line box.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_traits::Float;

/// Coordinate map from the reference interval `[-1, 1]` onto `[0, q_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMap {
    /// `q = q_max (1 + x) / 2`.
    Linear,
    /// Kosloff–Tal-Ezer stretching, `q = q_max (1 + asin(βx)/asin β) / 2`.
    /// Pulls nodes away from both ends toward a uniform spacing as `β → 1`,
    /// while the Lobatto clustering still resolves the Coulomb region.
    Stretched { beta: f64 },
}

impl GridMap {
    pub(crate) fn map(&self, x: f64, q_max: f64) -> (f64, f64) {
        match *self {
            GridMap::Linear => (0.5 * q_max * (1.0 + x), 0.5 * q_max),
            GridMap::Stretched { beta } if beta > 0.0 => {
                let a = beta.asin();
                let q = 0.5 * q_max * (1.0 + (beta * x).asin() / a);
                let dq = 0.5 * q_max * beta / (a * (1.0 - beta * beta * x * x).sqrt());
                (q, dq)
            }
            GridMap::Stretched { .. } => GridMap::Linear.map(x, q_max),
        }
    }
}

/// Nodes, weights and collocation derivative of order `order` (so
/// `order + 1` points including both ends).
pub(crate) struct Lobatto {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `D[i][j] = ℓ_j'(x_i)` for the Lagrange cardinal functions `ℓ_j`.
    pub derivative: DMatrix<f64>,
}

/// Legendre `P_N` and `P_{N-1}` at `x` by the three-term recurrence.
fn legendre_pair(order: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=order {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

impl Lobatto {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2);
        let n = order;
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        for j in 0..=n {
            // Chebyshev-Lobatto start, Newton on (1 - x²) P_N'(x).
            let mut x = -(PI * j as f64 / nf).cos();
            if j != 0 && j != n {
                for _ in 0..100 {
                    let (p, pm) = legendre_pair(n, x);
                    let dx = (x * p - pm) / ((nf + 1.0) * p);
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
            }
            nodes.push(x);
        }
        let pn: Vec<f64> = nodes.iter().map(|&x| legendre_pair(n, x).0).collect();
        let weights = pn.iter().map(|p| 2.0 / (nf * (nf + 1.0) * p * p)).collect();
        let derivative = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            if i != j {
                pn[i] / (pn[j] * (nodes[i] - nodes[j]))
            } else if i == 0 {
                -nf * (nf + 1.0) / 4.0
            } else if i == n {
                nf * (nf + 1.0) / 4.0
            } else {
                0.0
            }
        });
        Lobatto {
            nodes,
            weights,
            derivative,
        }
    }
}

/// Discretised kinetic energy and grid data on the interior nodes.
pub(crate) struct Discretization {
    /// Interior positions `q_i`.
    pub q: Vec<f64>,
    /// Quadrature weights `w_i q'(x_i)`, so `∫ f dq ≈ Σ m_i f(q_i)`.
    pub mass: Vec<f64>,
    /// Symmetrised kinetic matrix `M^{-1/2} K M^{-1/2}`.
    pub kinetic: DMatrix<f64>,
}

/// Weak-form discretisation of `-½ d²/dq²` with Dirichlet conditions at
/// `q = 0` and `q = q_max`; `points` interior nodes.
pub(crate) fn discretize(points: usize, q_max: f64, map: GridMap) -> Discretization {
    let order = points + 1;
    let lob = Lobatto::new(order);
    let mapped: Vec<(f64, f64)> = lob.nodes.iter().map(|&x| map.map(x, q_max)).collect();

    // K_ij = ½ Σ_k (w_k / q'_k) D_ki D_kj over all nodes, i, j interior.
    let mut b = lob.derivative.columns(1, points).into_owned();
    for (k, mut row) in b.row_iter_mut().enumerate() {
        row *= (lob.weights[k] / mapped[k].1).sqrt();
    }
    let mut kinetic = b.transpose() * &b;
    kinetic *= 0.5;

    let q: Vec<f64> = mapped[1..=points].iter().map(|m| m.0).collect();
    let mass: Vec<f64> = (1..=points).map(|k| lob.weights[k] * mapped[k].1).collect();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    for j in 0..points {
        for i in 0..points {
            kinetic[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    Discretization { q, mass, kinetic }
}
