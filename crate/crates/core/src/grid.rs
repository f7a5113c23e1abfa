//! Computational domains, uniform lattices and the discrete L² pairing.
//!
//! A [`Grid`] numbers the lattice points strictly inside the domain (the
//! unknowns) and, separately, the *closure* layer: lattice points outside
//! the domain that touch an interior point along an axis. Fields such as
//! `Δ_h u` are nonzero on that layer, and the closure quadrature weights are
//! chosen so that `uᵀ Δ²_h u` equals the weighted sum of `(Δ_h u)²` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Lattice multi-index. Unused trailing axes stay at zero.
pub type MultiIndex = [i64; 3];

/// Padding of the stored lattice on each side; the biharmonic stencil
/// reaches two points out.
const PAD: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Interval,
    Box,
    MaskedDisk,
}

/// A bounded Euclidean domain: an interval, an axis-aligned box, or a disk
/// represented by masking its bounding square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub dim: usize,
    /// Per-axis lengths of the (bounding) box.
    pub extents: Vec<f64>,
    /// Lower corner of the (bounding) box.
    pub origin: Vec<f64>,
    /// Disk radius, `None` for boxes.
    pub radius: Option<f64>,
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        Self::new(DomainKind::Interval, vec![length], vec![0.0], None)
    }

    pub fn unit_interval() -> Self {
        Self::interval(1.0).expect("unit interval is valid")
    }

    /// Box `[0, e₁] × … × [0, eₙ]`, `1 ≤ n ≤ 3`.
    pub fn cuboid(extents: &[f64]) -> Result<Self> {
        let kind = if extents.len() == 1 {
            DomainKind::Interval
        } else {
            DomainKind::Box
        };
        Self::new(kind, extents.to_vec(), vec![0.0; extents.len()], None)
    }

    pub fn unit_square() -> Self {
        Self::cuboid(&[1.0, 1.0]).expect("unit square is valid")
    }

    /// Disk of the given radius and center, masked out of its bounding square.
    pub fn disk(radius: f64, center: [f64; 2]) -> Result<Self> {
        Self::new(
            DomainKind::MaskedDisk,
            vec![2.0 * radius, 2.0 * radius],
            vec![center[0] - radius, center[1] - radius],
            Some(radius),
        )
    }

    pub fn unit_disk() -> Self {
        Self::disk(1.0, [0.0, 0.0]).expect("unit disk is valid")
    }

    fn new(kind: DomainKind, extents: Vec<f64>, origin: Vec<f64>, radius: Option<f64>) -> Result<Self> {
        let dim = extents.len();
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if extents.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidDomain(format!(
                "extents must be finite and positive: {extents:?}"
            )));
        }
        if kind == DomainKind::Interval && dim != 1 {
            return Err(Error::InvalidDomain("an interval is one-dimensional".into()));
        }
        if kind == DomainKind::MaskedDisk && dim != 2 {
            return Err(Error::InvalidDomain("a masked disk requires n = 2".into()));
        }
        Ok(Self {
            kind,
            dim,
            extents,
            origin,
            radius,
        })
    }

    /// Exact volume of the continuum domain.
    pub fn volume(&self) -> f64 {
        match self.kind {
            DomainKind::MaskedDisk => {
                let r = self.radius.unwrap_or(self.extents[0] / 2.0);
                std::f64::consts::PI * r * r
            }
            _ => self.extents.iter().product(),
        }
    }
}

/// Where the value of a lattice point comes from once the clamped boundary
/// conditions are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Pinned to zero (boundary or masked-out point).
    Zero,
    /// Equal to the unknown with this interior index (the point itself, or
    /// its even reflection across a box face).
    Node(usize),
}

/// Uniform lattice discretization of a [`Domain`].
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    divisions: Vec<usize>,
    h: f64,
    nodes: Vec<MultiIndex>,
    /// Closure-layer lattice points (outside the domain, axis-adjacent to an
    /// interior node). Closure index `N + i` refers to `boundary[i]`.
    boundary: Vec<MultiIndex>,
    boundary_weight: f64,
    /// Padded lattice lookup: interior index of each lattice point.
    interior_lookup: Vec<Option<usize>>,
    /// Padded lattice lookup: closure index of each lattice point.
    closure_lookup: Vec<Option<usize>>,
    padded_shape: [usize; 3],
}

/// Build the lattice for `domain` with the given number of divisions per axis.
pub fn build_grid(domain: &Domain, divisions: &[usize]) -> Result<Grid> {
    Grid::new(domain.clone(), divisions)
}

impl Grid {
    pub fn new(domain: Domain, divisions: &[usize]) -> Result<Self> {
        let n = domain.dim;
        if divisions.len() != n {
            return Err(Error::InvalidGrid(format!(
                "expected {n} division counts, got {}",
                divisions.len()
            )));
        }
        if let Some(d) = divisions.iter().find(|&&d| d < 4) {
            return Err(Error::InvalidGrid(format!(
                "at least 4 divisions per axis are needed for the biharmonic stencil (got {d})"
            )));
        }
        let spacings: Vec<f64> = domain
            .extents
            .iter()
            .zip(divisions)
            .map(|(e, &d)| e / d as f64)
            .collect();
        let h = spacings[0];
        if spacings.iter().any(|s| (s - h).abs() > 1e-12 * h) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be uniform across axes; extents {:?} with divisions {:?} give h = {:?}",
                domain.extents, divisions, spacings
            )));
        }

        let mut padded_shape = [1usize; 3];
        for a in 0..n {
            padded_shape[a] = divisions[a] + 1 + 2 * PAD as usize;
        }
        let total: usize = padded_shape.iter().product();

        let inside = |idx: &MultiIndex| -> bool {
            match domain.kind {
                DomainKind::Interval | DomainKind::Box => {
                    (0..n).all(|a| idx[a] > 0 && idx[a] < divisions[a] as i64)
                }
                DomainKind::MaskedDisk => {
                    // (2i − d)² + (2j − d)² < d² is the strict disk test in exact integers.
                    let d = divisions[0] as i64;
                    let x = 2 * idx[0] - d;
                    let y = 2 * idx[1] - d;
                    x * x + y * y < d * d
                }
            }
        };

        let mut nodes = Vec::new();
        let mut upper = [0i64; 3];
        for a in 0..n {
            upper[a] = divisions[a] as i64;
        }
        for i in 0..=upper[0] {
            for j in 0..=upper[1] {
                for k in 0..=upper[2] {
                    let idx = [i, j, k];
                    if inside(&idx) {
                        nodes.push(idx);
                    }
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::InvalidGrid(
                "the domain contains no interior lattice node at this resolution".into(),
            ));
        }

        let mut grid = Self {
            boundary_weight: match domain.kind {
                DomainKind::MaskedDisk => 1.0,
                _ => 0.5,
            },
            domain,
            divisions: divisions.to_vec(),
            h,
            nodes,
            boundary: Vec::new(),
            interior_lookup: vec![None; total],
            closure_lookup: vec![None; total],
            padded_shape,
        };
        for (i, idx) in grid.nodes.clone().iter().enumerate() {
            let slot = grid.slot(idx).expect("interior nodes lie in the lattice");
            grid.interior_lookup[slot] = Some(i);
            grid.closure_lookup[slot] = Some(i);
        }
        let mut boundary = Vec::new();
        for idx in &grid.nodes {
            for a in 0..n {
                for step in [-1i64, 1] {
                    let mut nb = *idx;
                    nb[a] += step;
                    let slot = grid.slot(&nb).expect("neighbours lie in the padded lattice");
                    if grid.closure_lookup[slot].is_none() {
                        grid.closure_lookup[slot] = Some(grid.nodes.len() + boundary.len());
                        boundary.push(nb);
                    }
                }
            }
        }
        // Lexicographic order for the closure layer too.
        boundary.sort();
        for (i, idx) in boundary.iter().enumerate() {
            let slot = grid.slot(idx).expect("closure nodes lie in the padded lattice");
            grid.closure_lookup[slot] = Some(grid.nodes.len() + i);
        }
        grid.boundary = boundary;
        Ok(grid)
    }

    fn slot(&self, idx: &MultiIndex) -> Option<usize> {
        let mut s = 0usize;
        for a in 0..3 {
            let shifted = if a < self.domain.dim { idx[a] + PAD } else { idx[a] };
            if shifted < 0 || shifted >= self.padded_shape[a] as i64 {
                return None;
            }
            s = s * self.padded_shape[a] + shifted as usize;
        }
        Some(s)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn divisions(&self) -> &[usize] {
        &self.divisions
    }

    /// Number of unknowns `N`.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Interior nodes followed by the closure layer.
    pub fn closure_count(&self) -> usize {
        self.nodes.len() + self.boundary.len()
    }

    pub fn nodes(&self) -> &[MultiIndex] {
        &self.nodes
    }

    pub fn boundary_nodes(&self) -> &[MultiIndex] {
        &self.boundary
    }

    /// Interior index of a lattice point, if it is an unknown.
    pub fn index_of(&self, idx: &MultiIndex) -> Option<usize> {
        self.slot(idx).and_then(|s| self.interior_lookup[s])
    }

    /// Closure index of a lattice point (interior or closure layer).
    pub fn closure_index_of(&self, idx: &MultiIndex) -> Option<usize> {
        self.slot(idx).and_then(|s| self.closure_lookup[s])
    }

    /// Multi-index of a closure index.
    pub fn closure_node(&self, c: usize) -> MultiIndex {
        if c < self.nodes.len() {
            self.nodes[c]
        } else {
            self.boundary[c - self.nodes.len()]
        }
    }

    /// Physical coordinates of a lattice point.
    pub fn coordinates(&self, idx: &MultiIndex) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.domain.origin[a] + idx[a] as f64 * self.h)
            .collect()
    }

    /// Coordinates of every interior node, in node order.
    pub fn node_coordinates(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|i| self.coordinates(i)).collect()
    }

    /// Coordinates of every closure node, in closure order.
    pub fn closure_coordinates(&self) -> Vec<Vec<f64>> {
        (0..self.closure_count())
            .map(|c| self.coordinates(&self.closure_node(c)))
            .collect()
    }

    /// Value source of any lattice point under the clamped conditions.
    ///
    /// Boxes use even reflection across each face (ghost = mirrored interior
    /// value, boundary = 0). Masked domains extend by zero.
    pub fn source(&self, idx: &MultiIndex) -> Source {
        match self.domain.kind {
            DomainKind::MaskedDisk => match self.index_of(idx) {
                Some(i) => Source::Node(i),
                None => Source::Zero,
            },
            DomainKind::Interval | DomainKind::Box => {
                let mut r = *idx;
                for a in 0..self.dim() {
                    let d = self.divisions[a] as i64;
                    if r[a] < 0 {
                        r[a] = -r[a];
                    } else if r[a] > d {
                        r[a] = 2 * d - r[a];
                    }
                    if r[a] <= 0 || r[a] >= d {
                        return Source::Zero;
                    }
                }
                match self.index_of(&r) {
                    Some(i) => Source::Node(i),
                    None => Source::Zero,
                }
            }
        }
    }

    /// Quadrature weight (relative to `hⁿ`) of a closure node.
    pub fn closure_weight(&self, c: usize) -> f64 {
        if c < self.nodes.len() {
            1.0
        } else {
            self.boundary_weight
        }
    }

    /// Weight of every closure-layer (non-interior) node.
    pub fn boundary_weight(&self) -> f64 {
        self.boundary_weight
    }

    /// `hⁿ`, the volume of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// `hⁿ · N`, the lattice estimate of `vol(Ω)`.
    pub fn volume_estimate(&self) -> f64 {
        self.cell_volume() * self.node_count() as f64
    }

    /// Discrete L² pairing `hⁿ Σ u v` over interior nodes.
    pub fn inner_product(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.node_count(), u.len())?;
        check_len(self.node_count(), v.len())?;
        Ok(self.cell_volume() * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn norm_sq(&self, u: &[f64]) -> Result<f64> {
        self.inner_product(u, u)
    }

    /// Weighted pairing over the closure: `hⁿ Σ w_c f_c g_c`.
    pub fn closure_inner_product(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        check_len(self.closure_count(), f.len())?;
        check_len(self.closure_count(), g.len())?;
        let n = self.node_count();
        let interior: f64 = f[..n].iter().zip(&g[..n]).map(|(a, b)| a * b).sum();
        let layer: f64 = f[n..].iter().zip(&g[n..]).map(|(a, b)| a * b).sum();
        Ok(self.cell_volume() * (interior + self.boundary_weight * layer))
    }

    /// Sample a function at the interior nodes.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|i| f(&self.coordinates(i))).collect()
    }

    /// Distance, in lattice steps, from an interior node to the nearest
    /// non-interior lattice point along any axis.
    pub fn steps_to_boundary(&self, node: usize) -> usize {
        let idx = self.nodes[node];
        let mut best = usize::MAX;
        for a in 0..self.dim() {
            for dir in [-1i64, 1] {
                let mut s = 1usize;
                loop {
                    let mut p = idx;
                    p[a] += dir * s as i64;
                    if self.index_of(&p).is_none() {
                        break;
                    }
                    s += 1;
                }
                best = best.min(s);
            }
        }
        best
    }
}
