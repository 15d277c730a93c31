//! The one-degree-of-freedom reduction F(G, g) on a grid, and its phase
//! portrait topology.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::hamiltonian::SecularModel;
use crate::error::{Error, Result};

/// F sampled on a cell-centred grid over g ∈ [0, π) and G/Λ ∈ (−1, 1),
/// row-major with G outer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FGrid {
    pub n_peri: usize,
    pub n_mom: usize,
    pub lambda: f64,
    pub values: Vec<f64>,
}

impl FGrid {
    pub fn sample(model: &SecularModel, n_peri: usize, n_mom: usize) -> Result<Self> {
        if n_peri < 3 || n_mom < 3 {
            return Err(Error::InvalidParameter(format!(
                "F grid needs at least 3×3 nodes, got {n_peri}×{n_mom}"
            )));
        }
        let lambda = model.params().lambda;
        let mut values = Vec::with_capacity(n_peri * n_mom);
        for j in 0..n_mom {
            for i in 0..n_peri {
                values.push(model.reduced_f(Self::mom(lambda, n_mom, j), Self::peri(n_peri, i))?);
            }
        }
        Ok(Self {
            n_peri,
            n_mom,
            lambda,
            values,
        })
    }

    fn peri(n: usize, i: usize) -> f64 {
        PI * (i as f64 + 0.5) / n as f64
    }

    fn mom(lambda: f64, n: usize, j: usize) -> f64 {
        lambda * (-1.0 + 2.0 * (j as f64 + 0.5) / n as f64)
    }

    /// (g, G) of node (i, j).
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [Self::peri(self.n_peri, i), Self::mom(self.lambda, self.n_mom, j)]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_peri + i]
    }

    /// Local extrema away from the G boundary, with g periodic. Each is the
    /// centre of a libration island. An extremum on the g = 0 line falls
    /// between two nodes of equal value; ties are reported once.
    pub fn extrema(&self) -> Vec<Extremum> {
        let mut out = Vec::new();
        for j in 1..self.n_mom - 1 {
            for i in 0..self.n_peri {
                let v = self.at(i, j);
                let mut above = true;
                let mut below = true;
                for dj in [-1i64, 0, 1] {
                    for di in [-1i64, 0, 1] {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let ii = (i as i64 + di).rem_euclid(self.n_peri as i64) as usize;
                        let jj = (j as i64 + dj) as usize;
                        let w = self.at(ii, jj);
                        if w == v {
                            // Keep the first node of a tied pair.
                            if (jj, ii) < (j, i) {
                                above = false;
                                below = false;
                            }
                            continue;
                        }
                        above &= v > w;
                        below &= v < w;
                    }
                }
                if above || below {
                    out.push(Extremum {
                        point: self.node(i, j),
                        value: v,
                        maximum: above,
                    });
                }
            }
        }
        out
    }

    /// Levels whose contours wind once around the cylinder: F − c has
    /// opposite signs on the two G boundaries for every g. Returns the open
    /// interval of such levels, if nonempty.
    pub fn rotational_levels(&self) -> Option<(f64, f64)> {
        let row = |j: usize| (0..self.n_peri).map(move |i| self.at(i, j));
        let lo_max = row(0).fold(f64::NEG_INFINITY, f64::max);
        let lo_min = row(0).fold(f64::INFINITY, f64::min);
        let hi_max = row(self.n_mom - 1).fold(f64::NEG_INFINITY, f64::max);
        let hi_min = row(self.n_mom - 1).fold(f64::INFINITY, f64::min);
        if hi_max < lo_min {
            Some((hi_max, lo_min))
        } else if lo_max < hi_min {
            Some((lo_max, hi_min))
        } else {
            None
        }
    }

    pub fn topology(&self) -> FTopology {
        FTopology {
            islands: self.extrema(),
            rotational_levels: self.rotational_levels(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    /// (g, G).
    pub point: [f64; 2],
    pub value: f64,
    pub maximum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTopology {
    pub islands: Vec<Extremum>,
    pub rotational_levels: Option<(f64, f64)>,
}

impl FTopology {
    /// Librational islands and rotational bands coexist.
    pub fn mixed(&self) -> bool {
        !self.islands.is_empty() && self.rotational_levels.is_some()
    }
}
