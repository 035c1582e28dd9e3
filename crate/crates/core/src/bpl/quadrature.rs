use crate::{Error, Result};

/// Gauss–Laguerre rule for `∫₀^∞ g(ξ) e^{−ξ} dξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// `(L_n(x), L_{n−1}(x))` by the three-term recurrence.
fn laguerre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, 1.0 - x);
    if n == 0 {
        return (p0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Nodes are the roots of `L_n`, found by Newton iteration from the usual
/// asymptotic initial guesses; weights are `x_i / ((n+1)² L_{n+1}(x_i)²)`,
/// rescaled to sum to one.
pub fn gauss_laguerre(n: usize) -> Result<QuadratureRule> {
    if !(1..=64).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "Gauss-Laguerre order must be in 1..=64, got {n}"
        )));
    }
    let nf = n as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            }
        };
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let (ln, lnm1) = laguerre(n, z);
            // x L_n'(x) = n (L_n − L_{n−1})
            let dp = nf * (ln - lnm1) / z;
            last = ln / dp;
            z -= last;
            if last.abs() <= 4.0 * f64::EPSILON * z.abs() {
                break;
            }
        }
        // Rounding in the recurrence can stall the last digit at large n.
        let converged = last.abs() <= 1e-11 * z.abs();
        if !converged || !z.is_finite() || (i > 0 && z <= nodes[i - 1]) {
            return Err(Error::QuadratureFailure(n));
        }
        let (lnp1, _) = laguerre(n + 1, z);
        let w = z / ((nf + 1.0) * (nf + 1.0) * lnp1 * lnp1);
        nodes.push(z);
        weights.push(w);
    }
    // The zeroth moment is exactly 1; rescaling removes the accumulated
    // rounding of the recurrence from every weight.
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule { nodes, weights })
}
