//! Shock-fitted coordinates for the duct.
//!
//! The subsonic region sits between the shock front `x1 = f(x2)` and the
//! exit plane `x1 = X`.  We map it to the unit square with
//!
//! ```text
//!   xi  = (x1 - f(eta)) / (X - f(eta)),      eta = x2,
//! ```
//!
//! so the front is `xi = 0`, the exit `xi = 1`, and the walls `eta = 0, 1`.
//! The metric terms are `dx1/dxi = X - f(eta)` (independent of `xi`) and
//! `dx1/deta = (1 - xi) f'(eta)`; the Jacobian `X - f` stays positive as long
//! as the front lies left of the exit, which `ShockFront::new` enforces.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Discrete shock front: samples of `f` on a uniform grid in `eta`, in
/// `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ShockFront {
    values: Vec<f64>,
    x_exit: f64,
    h_eta: f64,
}

impl ShockFront {
    /// Needs at least 4 nodes for the one-sided wall stencils.  The front
    /// must stay inside the duct, and must leave enough room to the exit
    /// that a translation of the front by its own spread still fits.
    pub fn new(values: Vec<f64>, x_exit: f64) -> Result<Self> {
        if !x_exit.is_finite() || x_exit <= 0.0 {
            return Err(Error::DegenerateFront(format!(
                "exit station must be positive and finite, got {x_exit}"
            )));
        }
        let m = values.len();
        if m < 4 {
            return Err(Error::DegenerateFront(format!(
                "front needs at least 4 nodes, got {m}"
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (j, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::DegenerateFront(format!(
                    "front value at node {j} is not finite"
                )));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo <= -1.0 || hi >= x_exit {
            return Err(Error::DegenerateFront(format!(
                "front range [{lo}, {hi}] leaves the duct (-1, {x_exit})"
            )));
        }
        // spread < distance to the exit, so the solve region never collapses
        if hi - lo >= x_exit - hi {
            return Err(Error::DegenerateFront(format!(
                "front spread {} too large for headroom {}",
                hi - lo,
                x_exit - hi
            )));
        }
        Ok(ShockFront {
            values,
            x_exit,
            h_eta: 1.0 / (m - 1) as f64,
        })
    }

    pub fn flat(t: f64, n_eta: usize, x_exit: f64) -> Result<Self> {
        ShockFront::new(vec![t; n_eta], x_exit)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_eta(&self) -> usize {
        self.values.len()
    }

    pub fn h_eta(&self) -> f64 {
        self.h_eta
    }

    pub fn x_exit(&self) -> f64 {
        self.x_exit
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spread of the front; zero exactly for a flat front.
    pub fn flatness(&self) -> f64 {
        self.max() - self.min()
    }

    /// Trapezoid mean over the cross-section.
    pub fn mean(&self) -> f64 {
        let m = self.values.len();
        let mut s = 0.5 * (self.values[0] + self.values[m - 1]);
        for &v in &self.values[1..m - 1] {
            s += v;
        }
        s * self.h_eta
    }

    /// `f'` at node `j`: centered in the interior, second-order one-sided at
    /// the walls.
    pub fn slope(&self, j: usize) -> f64 {
        let f = &self.values;
        let m = f.len();
        let h = self.h_eta;
        if j == 0 {
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        } else if j == m - 1 {
            (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h)
        } else {
            (f[j + 1] - f[j - 1]) / (2.0 * h)
        }
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.slope(j)).collect()
    }

    /// Slopes at the two walls, `(f'(0), f'(1))`.  Both vanish when the front
    /// meets the walls at right angles.
    pub fn wall_slopes(&self) -> (f64, f64) {
        (self.slope(0), self.slope(self.values.len() - 1))
    }
}

/// Tensor grid on the unit square plus the metric data of the duct mapping.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    n_xi: usize,
    n_eta: usize,
    h_xi: f64,
    h_eta: f64,
    x_exit: f64,
    front: Vec<f64>,
    fprime: Vec<f64>,
}

impl MappedGrid {
    pub fn new(front: &ShockFront, n_xi: usize) -> Result<Self> {
        if n_xi < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 nodes in xi, got {n_xi}"
            )));
        }
        Ok(MappedGrid {
            n_xi,
            n_eta: front.n_eta(),
            h_xi: 1.0 / (n_xi - 1) as f64,
            h_eta: front.h_eta(),
            x_exit: front.x_exit(),
            front: front.values().to_vec(),
            fprime: front.slopes(),
        })
    }

    pub fn n_xi(&self) -> usize {
        self.n_xi
    }

    pub fn n_eta(&self) -> usize {
        self.n_eta
    }

    pub fn h_xi(&self) -> f64 {
        self.h_xi
    }

    pub fn h_eta(&self) -> f64 {
        self.h_eta
    }

    pub fn x_exit(&self) -> f64 {
        self.x_exit
    }

    pub fn front_value(&self, j: usize) -> f64 {
        self.front[j]
    }

    pub fn front_slope(&self, j: usize) -> f64 {
        self.fprime[j]
    }

    pub fn xi(&self, i: usize) -> f64 {
        i as f64 * self.h_xi
    }

    pub fn eta(&self, j: usize) -> f64 {
        j as f64 * self.h_eta
    }

    pub fn x1(&self, i: usize, j: usize) -> f64 {
        let xi = self.xi(i);
        (1.0 - xi) * self.front[j] + xi * self.x_exit
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.eta(j)
    }

    /// `dx1/dxi`; also the Jacobian of the mapping, positive by construction.
    pub fn x_xi(&self, j: usize) -> f64 {
        self.x_exit - self.front[j]
    }

    /// `dx1/deta` at node `(i, j)`.
    pub fn x_eta(&self, i: usize, j: usize) -> f64 {
        (1.0 - self.xi(i)) * self.fprime[j]
    }

    /// Same metric at a fractional `xi` (used on cell faces).
    pub fn x_eta_at(&self, xi: f64, j: usize) -> f64 {
        (1.0 - xi) * self.fprime[j]
    }

    /// `d/dxi` of a node array: centered inside, second-order one-sided at
    /// the front and exit layers.
    pub fn dxi(&self, a: &Array2<f64>, i: usize, j: usize) -> f64 {
        let n = self.n_xi;
        let h = self.h_xi;
        if i == 0 {
            (-3.0 * a[[0, j]] + 4.0 * a[[1, j]] - a[[2, j]]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * a[[n - 1, j]] - 4.0 * a[[n - 2, j]] + a[[n - 3, j]]) / (2.0 * h)
        } else {
            (a[[i + 1, j]] - a[[i - 1, j]]) / (2.0 * h)
        }
    }

    /// `d/deta` of a node array, same stencil family as `dxi`.
    pub fn deta(&self, a: &Array2<f64>, i: usize, j: usize) -> f64 {
        let m = self.n_eta;
        let h = self.h_eta;
        if j == 0 {
            (-3.0 * a[[i, 0]] + 4.0 * a[[i, 1]] - a[[i, 2]]) / (2.0 * h)
        } else if j == m - 1 {
            (3.0 * a[[i, m - 1]] - 4.0 * a[[i, m - 2]] + a[[i, m - 3]]) / (2.0 * h)
        } else {
            (a[[i, j + 1]] - a[[i, j - 1]]) / (2.0 * h)
        }
    }

    /// Physical gradient of a node array via the chain rule.  The `eta`
    /// stencil here matches the stencil behind `front_slope`, so fields that
    /// are linear in `(x1, x2)` differentiate exactly even on curved grids.
    pub fn physical_gradient(&self, a: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let mut gx1 = Array2::zeros((self.n_xi, self.n_eta));
        let mut gx2 = Array2::zeros((self.n_xi, self.n_eta));
        for i in 0..self.n_xi {
            for j in 0..self.n_eta {
                let fxi = self.dxi(a, i, j);
                let feta = self.deta(a, i, j);
                let d1 = fxi / self.x_xi(j);
                gx1[[i, j]] = d1;
                gx2[[i, j]] = feta - d1 * self.x_eta(i, j);
            }
        }
        (gx1, gx2)
    }

    /// Cubic Lagrange interpolation of a row (values over the uniform `xi`
    /// nodes) at an arbitrary `xi` in `[0, 1]`.
    pub fn interp_xi(&self, row: &[f64], xi: f64) -> f64 {
        debug_assert_eq!(row.len(), self.n_xi);
        let n = self.n_xi;
        let h = self.h_xi;
        let pos = xi / h;
        let base = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let mut acc = 0.0;
        for k in 0..4 {
            let xk = (base + k) as f64;
            let mut w = 1.0;
            for l in 0..4 {
                if l != k {
                    let xl = (base + l) as f64;
                    w *= (pos - xl) / (xk - xl);
                }
            }
            acc += w * row[base + k];
        }
        acc
    }
}

/// Velocity potential sampled on a mapped grid.
#[derive(Debug, Clone)]
pub struct PotentialField {
    grid: MappedGrid,
    values: Array2<f64>,
}

impl PotentialField {
    pub fn new(grid: MappedGrid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.n_xi(), grid.n_eta()) {
            return Err(Error::InvalidGrid(format!(
                "field shape {:?} does not match grid {}x{}",
                values.dim(),
                grid.n_xi(),
                grid.n_eta()
            )));
        }
        Ok(PotentialField { grid, values })
    }

    pub fn grid(&self) -> &MappedGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn gradient(&self) -> (Array2<f64>, Array2<f64>) {
        self.grid.physical_gradient(&self.values)
    }

    /// Sample a node array along the vertical line `x1 = station`: one value
    /// per `eta` row, interpolated in `xi`.  Fails if the line leaves the
    /// mapped region on any row.
    pub fn station_values(&self, a: &Array2<f64>, station: f64) -> Result<Vec<f64>> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(g.n_eta());
        for j in 0..g.n_eta() {
            let xi = (station - g.front_value(j)) / g.x_xi(j);
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::StationOutsideRegion(station));
            }
            let row: Vec<f64> = (0..g.n_xi()).map(|i| a[[i, j]]).collect();
            out.push(g.interp_xi(&row, xi));
        }
        Ok(out)
    }
}
