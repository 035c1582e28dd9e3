//! Linear stability of base and composed Runge–Kutta schemes.
//!
//! On `y' = λy` a Runge–Kutta step multiplies the state by
//! `P(z) = 1 + z bᵀ (I − zA)⁻¹ 1` with `z = τλ`; the real part of the
//! composed step multiplies it by `P_c(z) = Re(P(γ₂z)·P(γ₁z))`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::composition::CompositionCoefficients;
use crate::flows::ButcherTableau;
use crate::{Error, Result, C64};

/// `P(z)` by a direct linear solve.
pub fn stability_value(tab: &ButcherTableau, z: C64) -> Result<C64> {
    let s = tab.stages();
    let m = DMatrix::from_fn(s, s, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - z * tab.a[i][j]
    });
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let lu = m.lu();
    let pivot = lu.u().diagonal().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let pole = Error::PoleAtZ { re: z.re, im: z.im };
    if pivot <= 1e-14 * scale {
        return Err(pole);
    }
    let x = lu.solve(&DVector::from_element(s, C64::new(1.0, 0.0))).ok_or(pole.clone())?;
    let btx: C64 = tab.b.iter().zip(x.iter()).map(|(b, xi)| xi * *b).sum();
    let p = C64::new(1.0, 0.0) + z * btx;
    if p.re.is_finite() && p.im.is_finite() {
        Ok(p)
    } else {
        Err(pole)
    }
}

/// `Re(P(γ₂z)·P(γ₁z))`.
pub fn composed_stability_value(tab: &ButcherTableau, gamma1: C64, gamma2: C64, z: C64) -> Result<f64> {
    Ok((stability_value(tab, gamma2 * z)? * stability_value(tab, gamma1 * z)?).re)
}

/// `|P(z)|`, infinite at poles.
pub fn base_magnitude(tab: &ButcherTableau) -> impl Fn(C64) -> f64 + Sync + '_ {
    move |z| stability_value(tab, z).map_or(f64::INFINITY, |p| p.norm())
}

/// `|P_c(z)|` with the coefficients matching the tableau order.
pub fn composed_magnitude(tab: &ButcherTableau) -> Result<impl Fn(C64) -> f64 + Sync + '_> {
    let co = CompositionCoefficients::new(tab.order)?;
    Ok(move |z| {
        composed_stability_value(tab, co.gamma1, co.gamma2, z).map_or(f64::INFINITY, f64::abs)
    })
}

/// Rectangle `[xmin, xmax] × [ymin, ymax]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

/// Magnitudes sampled on a uniform `nx × ny` lattice, row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityGrid {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl StabilityGrid {
    pub fn node(&self, i: usize, j: usize) -> C64 {
        let r = &self.region;
        let dx = (r.xmax - r.xmin) / (self.nx - 1) as f64;
        let dy = (r.ymax - r.ymin) / (self.ny - 1) as f64;
        C64::new(r.xmin + i as f64 * dx, r.ymin + j as f64 * dy)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.value(i, j) <= 1.0
    }
}

/// Evaluates `magnitude` at every lattice node, in parallel.
pub fn scan_region<F>(magnitude: F, region: Region, nx: usize, ny: usize) -> Result<StabilityGrid>
where
    F: Fn(C64) -> f64 + Sync,
{
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 2 x 2 nodes, got {nx} x {ny}"
        )));
    }
    let mut grid = StabilityGrid {
        region,
        nx,
        ny,
        values: Vec::new(),
    };
    grid.values = (0..nx * ny)
        .into_par_iter()
        .map(|idx| magnitude(grid.node(idx % nx, idx / nx)))
        .collect();
    Ok(grid)
}

const SCAN_STEP: f64 = 0.01;
const SCAN_LIMIT: f64 = 100.0;

/// Left end of the stability interval on the negative real axis: scans
/// leftward from 0 in steps of 0.01 down to −100 for the first exit, then
/// bisects to 1e−10.
pub fn real_axis_crossing<F: Fn(C64) -> f64>(magnitude: F) -> Result<f64> {
    let at = |x: f64| magnitude(C64::new(x, 0.0));
    let steps = (SCAN_LIMIT / SCAN_STEP).round() as usize;
    let mut inside = 0.0;
    for k in 1..=steps {
        let x = -(k as f64) * SCAN_STEP;
        if at(x) > 1.0 {
            let (mut lo, mut hi) = (inside, x);
            while lo - hi > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if at(mid) > 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        inside = x;
    }
    Err(Error::UnboundedOnAxis)
}

/// `x,y,mag_base,mag_composed`, one row per node, row-major.
pub fn write_stability_csv<W: Write>(out: W, base: &StabilityGrid, composed: &StabilityGrid) -> Result<()> {
    if (base.nx, base.ny, base.region) != (composed.nx, composed.ny, composed.region) {
        return Err(Error::InvalidParameter("grids cover different lattices".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "mag_base", "mag_composed"])?;
    for j in 0..base.ny {
        for i in 0..base.nx {
            let z = base.node(i, j);
            w.write_record([
                z.re.to_string(),
                z.im.to_string(),
                base.value(i, j).to_string(),
                composed.value(i, j).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
