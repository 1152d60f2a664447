//! Rectangular reference domain, node lattice and the configuration fields.

use crate::so3::{Rotation, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("plate lengths and thickness must be positive (got L1={0}, L2={1}, h={2})")]
    NonPositiveDimension(f64, f64, f64),
    #[error("need at least two nodes per direction (got {0}x{1})")]
    TooFewNodes(usize, usize),
    #[error("at least one edge must be clamped (Dirichlet)")]
    NoDirichletEdge,
    #[error("field has {got} entries, grid has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
}

/// One side of the rectangle `[0, L1] × [0, L2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// `x1 = 0`
    Left,
    /// `x1 = L1`
    Right,
    /// `x2 = 0`
    Bottom,
    /// `x2 = L2`
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    fn index(self) -> usize {
        match self {
            Edge::Left => 0,
            Edge::Right => 1,
            Edge::Bottom => 2,
            Edge::Top => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Dirichlet,
    Free,
}

/// Node lattice on the rectangle with a Dirichlet/free label per edge.
///
/// Node `(i, j)` sits at `((i)h1, (j)h2, 0)` with zero-based indices and is
/// stored at linear index `i + n1 * j`. Cell `(i, j)` has corners
/// `(i, j), (i+1, j), (i, j+1), (i+1, j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateGrid {
    lengths: [f64; 2],
    nodes: [usize; 2],
    thickness: f64,
    edges: [EdgeKind; 4],
}

impl PlateGrid {
    pub fn new(
        lengths: [f64; 2],
        nodes: [usize; 2],
        thickness: f64,
        edges: [(Edge, EdgeKind); 4],
    ) -> Result<Self, GridError> {
        if !(lengths[0] > 0.0 && lengths[1] > 0.0 && thickness > 0.0) {
            return Err(GridError::NonPositiveDimension(lengths[0], lengths[1], thickness));
        }
        if nodes[0] < 2 || nodes[1] < 2 {
            return Err(GridError::TooFewNodes(nodes[0], nodes[1]));
        }
        let mut kinds = [EdgeKind::Free; 4];
        for (edge, kind) in edges {
            kinds[edge.index()] = kind;
        }
        if !kinds.contains(&EdgeKind::Dirichlet) {
            return Err(GridError::NoDirichletEdge);
        }
        Ok(PlateGrid {
            lengths,
            nodes,
            thickness,
            edges: kinds,
        })
    }

    /// Square plate with every edge clamped.
    pub fn clamped_square(side: f64, n: usize, thickness: f64) -> Result<Self, GridError> {
        PlateGrid::new(
            [side, side],
            [n, n],
            thickness,
            [
                (Edge::Left, EdgeKind::Dirichlet),
                (Edge::Right, EdgeKind::Dirichlet),
                (Edge::Bottom, EdgeKind::Dirichlet),
                (Edge::Top, EdgeKind::Dirichlet),
            ],
        )
    }

    /// Same geometry and boundary labels with a different node count.
    pub fn with_nodes(&self, nodes: [usize; 2]) -> Result<Self, GridError> {
        let edges = [
            (Edge::Left, self.edges[0]),
            (Edge::Right, self.edges[1]),
            (Edge::Bottom, self.edges[2]),
            (Edge::Top, self.edges[3]),
        ];
        PlateGrid::new(self.lengths, nodes, self.thickness, edges)
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.lengths
    }
    pub fn nodes(&self) -> [usize; 2] {
        self.nodes
    }
    pub fn thickness(&self) -> f64 {
        self.thickness
    }
    pub fn spacing(&self) -> [f64; 2] {
        [
            self.lengths[0] / (self.nodes[0] - 1) as f64,
            self.lengths[1] / (self.nodes[1] - 1) as f64,
        ]
    }
    pub fn edge_kind(&self, edge: Edge) -> EdgeKind {
        self.edges[edge.index()]
    }
    pub fn node_count(&self) -> usize {
        self.nodes[0] * self.nodes[1]
    }
    pub fn cell_counts(&self) -> [usize; 2] {
        [self.nodes[0] - 1, self.nodes[1] - 1]
    }
    pub fn cell_count(&self) -> usize {
        (self.nodes[0] - 1) * (self.nodes[1] - 1)
    }
    pub fn cell_area(&self) -> f64 {
        let [h1, h2] = self.spacing();
        h1 * h2
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i + self.nodes[0] * j
    }
    #[inline]
    pub fn node_ij(&self, n: usize) -> (usize, usize) {
        (n % self.nodes[0], n / self.nodes[0])
    }
    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        i + (self.nodes[0] - 1) * j
    }
    #[inline]
    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        let n = self.nodes[0] - 1;
        (c % n, c / n)
    }

    /// Corner nodes `[a, b, c, d] = [(i,j), (i+1,j), (i,j+1), (i+1,j+1)]`.
    #[inline]
    pub fn cell_corners(&self, i: usize, j: usize) -> [usize; 4] {
        let a = self.node(i, j);
        let n1 = self.nodes[0];
        [a, a + 1, a + n1, a + n1 + 1]
    }

    pub fn reference_position(&self, n: usize) -> Vec3 {
        let (i, j) = self.node_ij(n);
        let [h1, h2] = self.spacing();
        Vec3::new(i as f64 * h1, j as f64 * h2, 0.0)
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(c);
        let [h1, h2] = self.spacing();
        [(i as f64 + 0.5) * h1, (j as f64 + 0.5) * h2]
    }

    /// Edges the node lies on.
    pub fn node_edges(&self, n: usize) -> impl Iterator<Item = Edge> + '_ {
        let (i, j) = self.node_ij(n);
        let [n1, n2] = self.nodes;
        Edge::ALL.into_iter().filter(move |e| match e {
            Edge::Left => i == 0,
            Edge::Right => i == n1 - 1,
            Edge::Bottom => j == 0,
            Edge::Top => j == n2 - 1,
        })
    }

    pub fn is_boundary(&self, n: usize) -> bool {
        self.node_edges(n).next().is_some()
    }

    pub fn is_dirichlet(&self, n: usize) -> bool {
        self.node_edges(n)
            .any(|e| self.edge_kind(e) == EdgeKind::Dirichlet)
    }

    /// Nodes on the Dirichlet part of the boundary, ascending.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&n| self.is_dirichlet(n)).collect()
    }

    /// Boundary nodes lying only on free edges, ascending.
    pub fn free_boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&n| self.is_boundary(n) && !self.is_dirichlet(n))
            .collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&n| !self.is_boundary(n)).collect()
    }

    /// Nodes of one edge in ascending order along the edge.
    pub fn edge_nodes(&self, edge: Edge) -> Vec<usize> {
        let [n1, n2] = self.nodes;
        match edge {
            Edge::Left => (0..n2).map(|j| self.node(0, j)).collect(),
            Edge::Right => (0..n2).map(|j| self.node(n1 - 1, j)).collect(),
            Edge::Bottom => (0..n1).map(|i| self.node(i, 0)).collect(),
            Edge::Top => (0..n1).map(|i| self.node(i, n2 - 1)).collect(),
        }
    }

    /// Trapezoid weights over the area, dual-cell areas of the nodes.
    pub fn area_weights(&self) -> Vec<f64> {
        let [n1, n2] = self.nodes;
        let area = self.cell_area();
        (0..self.node_count())
            .map(|n| {
                let (i, j) = self.node_ij(n);
                let wi = if i == 0 || i == n1 - 1 { 0.5 } else { 1.0 };
                let wj = if j == 0 || j == n2 - 1 { 0.5 } else { 1.0 };
                area * wi * wj
            })
            .collect()
    }

    /// Trapezoid weights along the free edges, aligned with [`free_boundary_nodes`].
    ///
    /// Segments ending on a Dirichlet node only contribute to their free end;
    /// the dropped term is constant on the admissible set.
    ///
    /// [`free_boundary_nodes`]: PlateGrid::free_boundary_nodes
    pub fn free_boundary_weights(&self) -> Vec<f64> {
        let free = self.free_boundary_nodes();
        let mut weight = vec![0.0; self.node_count()];
        let [h1, h2] = self.spacing();
        for edge in Edge::ALL {
            if self.edge_kind(edge) != EdgeKind::Free {
                continue;
            }
            let h = match edge {
                Edge::Left | Edge::Right => h2,
                Edge::Bottom | Edge::Top => h1,
            };
            let nodes = self.edge_nodes(edge);
            for pair in nodes.windows(2) {
                weight[pair[0]] += 0.5 * h;
                weight[pair[1]] += 0.5 * h;
            }
        }
        free.iter().map(|&n| weight[n]).collect()
    }
}

/// Per-node deformation `y` and rotation `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub y: Vec<Vec3>,
    pub q: Vec<Rotation>,
}

impl Configuration {
    /// `y = x`, `Q = 1`.
    pub fn reference(grid: &PlateGrid) -> Self {
        Configuration {
            y: (0..grid.node_count())
                .map(|n| grid.reference_position(n))
                .collect(),
            q: vec![Rotation::identity(); grid.node_count()],
        }
    }

    pub fn check_shape(&self, grid: &PlateGrid) -> Result<(), GridError> {
        for len in [self.y.len(), self.q.len()] {
            if len != grid.node_count() {
                return Err(GridError::ShapeMismatch {
                    expected: grid.node_count(),
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// Displacement `u = y − x` at node `n`.
    pub fn displacement(&self, grid: &PlateGrid, n: usize) -> Vec3 {
        self.y[n] - grid.reference_position(n)
    }

    /// Superposed rigid motion `(R y + c, R Q)`.
    pub fn rigidly_moved(&self, rotation: &Rotation, shift: &Vec3) -> Self {
        Configuration {
            y: self.y.iter().map(|y| *rotation * *y + shift).collect(),
            q: self.q.iter().map(|q| rotation.compose(q)).collect(),
        }
    }

    /// Interpolates onto a finer lattice of the same rectangle: bilinear for
    /// `y`, projected bilinear average for `Q`.
    pub fn prolongate(&self, coarse: &PlateGrid, fine: &PlateGrid) -> Configuration {
        let [l1, l2] = coarse.lengths();
        let [h1, h2] = coarse.spacing();
        let [c1, c2] = coarse.nodes();
        let mut y = Vec::with_capacity(fine.node_count());
        let mut q = Vec::with_capacity(fine.node_count());
        for n in 0..fine.node_count() {
            let x = fine.reference_position(n);
            let s = (x.x.min(l1) / h1).min((c1 - 1) as f64);
            let t = (x.y.min(l2) / h2).min((c2 - 1) as f64);
            let i = (s.floor() as usize).min(c1 - 2);
            let j = (t.floor() as usize).min(c2 - 2);
            let (fs, ft) = (s - i as f64, t - j as f64);
            let [a, b, c, d] = coarse.cell_corners(i, j);
            let w = [(1.0 - fs) * (1.0 - ft), fs * (1.0 - ft), (1.0 - fs) * ft, fs * ft];
            let corners = [a, b, c, d];
            let yy = corners
                .iter()
                .zip(w)
                .fold(Vec3::zeros(), |acc, (&k, wk)| acc + wk * self.y[k]);
            let qm = corners
                .iter()
                .zip(w)
                .fold(crate::so3::Mat3::zeros(), |acc, (&k, wk)| {
                    acc + wk * self.q[k].matrix()
                });
            y.push(yy);
            q.push(crate::so3::project_so3(&qm).unwrap_or_else(|_| self.q[a]));
        }
        Configuration { y, q }
    }
}
