//! Rectangle geometry: node lattice, boundary enumeration, quadrature weights.
//!
//! The domain is the closed rectangle `[-l1/2, l1/2] x [-l2/2, l2/2]`, centered
//! at the origin, discretized by an `n1 x n2` node lattice including the
//! boundary. Centering is deliberate: the gauge construction integrates along
//! rays from the center, and the oscillatory ansatz factors grow like
//! `exp(xi.x / tau)`, which stays balanced when the box straddles the origin.
//!
//! Conventions fixed here and relied on everywhere else:
//! - node `(ix, iy)` sits at `(-l1/2 + ix*h1, -l2/2 + iy*h2)`, flat index
//!   `iy*n1 + ix`;
//! - interior nodes are `1..n1-1` x `1..n2-1`, flat interior index
//!   `(iy-1)*(n1-2) + (ix-1)`;
//! - the boundary is enumerated by a counterclockwise walk starting at the
//!   bottom-left corner: bottom row left to right, right column bottom to top,
//!   top row right to left, left column top to bottom. Each corner appears
//!   exactly once and belongs to the face that reaches it first in the walk,
//!   which fixes its outward normal;
//! - boundary quadrature is the per-face trapezoid rule, so corners carry the
//!   halved weight `(h1+h2)/2` and all other boundary nodes carry the full
//!   spacing of their face.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which face of the rectangle a boundary node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Face {
    Bottom,
    Right,
    Top,
    Left,
}

impl Face {
    /// Outward unit normal of the face.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Face::Bottom => [0.0, -1.0],
            Face::Right => [1.0, 0.0],
            Face::Top => [0.0, 1.0],
            Face::Left => [-1.0, 0.0],
        }
    }
}

/// One node of the boundary walk.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryNode {
    pub ix: usize,
    pub iy: usize,
    pub face: Face,
    /// Trapezoid arc weight of this node; the four corners are halved on both
    /// adjacent faces, hence carry `(h1+h2)/2`.
    pub weight: f64,
    /// True for the four corners.
    pub corner: bool,
}

/// Centered rectangle with an inclusive node lattice and a collar width.
///
/// The struct is plain data; geometry queries are methods so the type stays
/// `Copy` and fields can embed it by value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain2D {
    pub l1: f64,
    pub l2: f64,
    pub n1: usize,
    pub n2: usize,
    /// Collar width `w`: the collar is the open set of points closer than `w`
    /// to the boundary.
    pub collar_width: f64,
}

impl Domain2D {
    /// Validated constructor. Grids below 8 nodes per side cannot host the
    /// one-sided boundary stencils and interior machinery, and a collar at
    /// least half a side wide leaves no interior for supports to live in.
    pub fn new(l1: f64, l2: f64, n1: usize, n2: usize, collar_width: f64) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0) || !l1.is_finite() || !l2.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "side lengths must be positive and finite, got {l1} x {l2}"
            )));
        }
        if n1 < 8 || n2 < 8 {
            return Err(Error::InvalidDomain(format!(
                "need at least 8 nodes per side, got {n1} x {n2}"
            )));
        }
        if !(collar_width > 0.0 && collar_width < 0.5 * l1.min(l2)) {
            return Err(Error::InvalidDomain(format!(
                "collar width must lie in (0, min(l1,l2)/2), got {collar_width}"
            )));
        }
        Ok(Domain2D { l1, l2, n1, n2, collar_width })
    }

    pub fn h1(&self) -> f64 {
        self.l1 / (self.n1 - 1) as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / (self.n2 - 1) as f64
    }

    pub fn h_max(&self) -> f64 {
        self.h1().max(self.h2())
    }

    /// Cell area `h1*h2`, the weight of the interior inner product.
    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn num_nodes(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn num_interior(&self) -> usize {
        (self.n1 - 2) * (self.n2 - 2)
    }

    pub fn num_boundary(&self) -> usize {
        2 * (self.n1 + self.n2) - 4
    }

    pub fn x1(&self, ix: usize) -> f64 {
        -0.5 * self.l1 + ix as f64 * self.h1()
    }

    pub fn x2(&self, iy: usize) -> f64 {
        -0.5 * self.l2 + iy as f64 * self.h2()
    }

    pub fn pos(&self, ix: usize, iy: usize) -> [f64; 2] {
        [self.x1(ix), self.x2(iy)]
    }

    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n1 + ix
    }

    pub fn is_interior(&self, ix: usize, iy: usize) -> bool {
        ix >= 1 && ix <= self.n1 - 2 && iy >= 1 && iy <= self.n2 - 2
    }

    pub fn is_boundary(&self, ix: usize, iy: usize) -> bool {
        ix == 0 || iy == 0 || ix == self.n1 - 1 || iy == self.n2 - 1
    }

    pub fn interior_index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(self.is_interior(ix, iy));
        (iy - 1) * (self.n1 - 2) + (ix - 1)
    }

    /// Distance from a point to the boundary of the rectangle (negative
    /// outside).
    pub fn dist_to_boundary(&self, x: [f64; 2]) -> f64 {
        let dx = (0.5 * self.l1 - x[0]).min(x[0] + 0.5 * self.l1);
        let dy = (0.5 * self.l2 - x[1]).min(x[1] + 0.5 * self.l2);
        dx.min(dy)
    }

    /// True iff the node lies in the open collar `dist(x, Gamma) < w`.
    /// Boundary nodes are at distance zero, hence always in the collar.
    pub fn in_collar(&self, ix: usize, iy: usize) -> bool {
        self.dist_to_boundary(self.pos(ix, iy)) < self.collar_width
    }

    /// Counterclockwise boundary walk; see the module docs for the corner
    /// convention. The order of this walk is the canonical boundary-function
    /// ordering used by every export and quadrature.
    pub fn boundary_walk(&self) -> Vec<BoundaryNode> {
        let (n1, n2) = (self.n1, self.n2);
        let (h1, h2) = (self.h1(), self.h2());
        let corner_w = 0.5 * (h1 + h2);
        let mut out = Vec::with_capacity(self.num_boundary());
        let mut push = |ix: usize, iy: usize, face: Face| {
            let corner =
                (ix == 0 || ix == n1 - 1) && (iy == 0 || iy == n2 - 1);
            let weight = if corner {
                corner_w
            } else {
                match face {
                    Face::Bottom | Face::Top => h1,
                    Face::Left | Face::Right => h2,
                }
            };
            out.push(BoundaryNode { ix, iy, face, weight, corner });
        };
        for ix in 0..n1 {
            push(ix, 0, Face::Bottom);
        }
        for iy in 1..n2 {
            push(n1 - 1, iy, Face::Right);
        }
        for ix in (0..n1 - 1).rev() {
            push(ix, n2 - 1, Face::Top);
        }
        for iy in (1..n2 - 1).rev() {
            push(0, iy, Face::Left);
        }
        debug_assert_eq!(out.len(), self.num_boundary());
        out
    }

    /// Tensor-trapezoid area weight of a node (used for integrals over the
    /// closed rectangle; the interior inner product uses `cell_area` alone).
    pub fn area_weight(&self, ix: usize, iy: usize) -> f64 {
        let wx = if ix == 0 || ix == self.n1 - 1 { 0.5 } else { 1.0 };
        let wy = if iy == 0 || iy == self.n2 - 1 { 0.5 } else { 1.0 };
        wx * wy * self.cell_area()
    }
}
