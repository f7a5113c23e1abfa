//! Sparse symmetric discretizations of `Δ` and `Δ²` and derivative stencils.
//!
//! Stencil coefficients are assembled as small integers in units of `h⁻²`
//! (Laplacian) or `h⁻⁴` (biharmonic) and scaled once at the end, so the
//! biharmonic matrix `Δ_h ∘ Δ_h` comes out entry-wise symmetric with no
//! rounding at all.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::grid::{Grid, MultiIndex, Source};

/// Symmetric matrix storing the upper triangle (`row ≤ col`) in compressed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    name: String,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetricMatrix {
    /// Build from upper-triangle triplets; duplicates are summed.
    pub fn from_upper_triplets(
        name: impl Into<String>,
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            if r > c || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) is not in the upper triangle of a {dim}×{dim} matrix"
                )));
            }
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            name: name.into(),
            dim,
            row_ptr,
            cols,
            vals,
        })
    }

    /// `c · I`.
    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        Self::from_upper_triplets("scaled identity", dim, (0..dim).map(|i| (i, i, c)))
            .expect("diagonal triplets are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored (upper-triangle) entries.
    pub fn stored_entries(&self) -> usize {
        self.vals.len()
    }

    /// Upper-triangle entries of row `r` as `(col, value)`.
    pub fn upper_row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        self.upper_row(r)
            .find(|&(col, _)| col == c)
            .map(|(_, v)| v)
            .unwrap_or(0.0)
    }

    /// Nonzeros in the full (both triangles) row `r`.
    pub fn row_nonzeros(&self, r: usize) -> usize {
        let upper = self.upper_row(r).filter(|&(_, v)| v != 0.0).count();
        let lower = (0..r)
            .filter(|&q| self.upper_row(q).any(|(c, v)| c == r && v != 0.0))
            .count();
        upper + lower
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "matvec length mismatch for `{}`", self.name);
        let mut y = vec![0.0; self.dim];
        for r in 0..self.dim {
            let mut acc = 0.0;
            for (c, v) in self.upper_row(r) {
                acc += v * x[c];
                if c != r {
                    y[c] += v * x[r];
                }
            }
            y[r] += acc;
        }
        y
    }

    /// `A x` with error-free products and compensated sums per row, so each
    /// entry is accurate to a few ulps of its own magnitude despite the
    /// cancellation between large stencil coefficients.
    pub fn matvec_compensated(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "matvec length mismatch for `{}`", self.name);
        let mut sum = vec![0.0; self.dim];
        let mut err = vec![0.0; self.dim];
        let mut add = |i: usize, v: f64, xv: f64| {
            let p = v * xv;
            let pe = v.mul_add(xv, -p);
            let t = sum[i] + p;
            let z = t - sum[i];
            let se = (sum[i] - (t - z)) + (p - z);
            sum[i] = t;
            err[i] += se + pe;
        };
        for r in 0..self.dim {
            for (c, v) in self.upper_row(r) {
                add(r, v, x[c]);
                if c != r {
                    add(c, v, x[r]);
                }
            }
        }
        sum.iter().zip(&err).map(|(s, e)| s + e).collect()
    }

    /// Rows of the lower triangle, `(col, value)` with `col ≤ row`, sorted by column.
    pub fn lower_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.dim];
        for r in 0..self.dim {
            for (c, v) in self.upper_row(r) {
                rows[c].push((r, v));
            }
        }
        rows
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.upper_row(r) {
                m[(r, c)] = v;
                m[(c, r)] = v;
            }
        }
        m
    }

    /// Return a copy with `σ` subtracted from the diagonal.
    pub fn shifted(&self, sigma: f64) -> Self {
        let mut out = self.clone();
        if sigma != 0.0 {
            for r in 0..self.dim {
                let span = out.row_ptr[r]..out.row_ptr[r + 1];
                match out.cols[span.clone()].iter().position(|&c| c == r) {
                    Some(k) => out.vals[span.start + k] -= sigma,
                    None => {
                        // Diagonal missing: rebuild through triplets.
                        let trip: Vec<_> = (0..self.dim)
                            .flat_map(|q| self.upper_row(q).map(move |(c, v)| (q, c, v)))
                            .chain((0..self.dim).map(|i| (i, i, -sigma)))
                            .collect();
                        return Self::from_upper_triplets(self.name.clone(), self.dim, trip)
                            .expect("shifted triplets stay valid");
                    }
                }
            }
        }
        out
    }

    /// Coordinate text dump: one `row col value` line per stored entry,
    /// 17 significant digits.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {}x{} upper-triangle", self.name, self.dim, self.dim)?;
        for r in 0..self.dim {
            for (c, v) in self.upper_row(r) {
                writeln!(w, "{r} {c} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// `−Δ_h` (positive definite) together with the sign relating it to `Δ_h`.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    pub matrix: SparseSymmetricMatrix,
    /// `true`: `matrix = −Δ_h`.
    pub negated: bool,
}

fn offset(idx: &MultiIndex, axis: usize, step: i64) -> MultiIndex {
    let mut out = *idx;
    out[axis] += step;
    out
}

fn push_source(row: &mut BTreeMap<usize, i64>, src: Source, coef: i64) {
    if let Source::Node(i) = src {
        *row.entry(i).or_insert(0) += coef;
    }
}

/// Ghost-extended Laplacian rows on the closure, in units of `h⁻²`:
/// `(Δ_h u)_c` as a combination of interior unknowns.
fn closure_laplacian_rows(grid: &Grid) -> Vec<BTreeMap<usize, i64>> {
    let n = grid.dim();
    (0..grid.closure_count())
        .map(|c| {
            let idx = grid.closure_node(c);
            let mut row = BTreeMap::new();
            push_source(&mut row, grid.source(&idx), -2 * n as i64);
            for a in 0..n {
                push_source(&mut row, grid.source(&offset(&idx, a, -1)), 1);
                push_source(&mut row, grid.source(&offset(&idx, a, 1)), 1);
            }
            row.retain(|_, v| *v != 0);
            row
        })
        .collect()
}

/// Standard `(2n+1)`-point Laplacian with zero Dirichlet values, returned as `−Δ_h`.
pub fn assemble_laplacian(grid: &Grid) -> LaplacianMatrix {
    let n = grid.dim();
    let scale = grid.spacing().powi(-2);
    let mut trip = Vec::new();
    for (p, idx) in grid.nodes().iter().enumerate() {
        trip.push((p, p, 2.0 * n as f64 * scale));
        for a in 0..n {
            if let Some(q) = grid.index_of(&offset(idx, a, 1)) {
                trip.push((p.min(q), p.max(q), -scale));
            }
        }
    }
    LaplacianMatrix {
        matrix: SparseSymmetricMatrix::from_upper_triplets("-laplacian", grid.node_count(), trip)
            .expect("laplacian triplets are valid"),
        negated: true,
    }
}

/// Clamped biharmonic operator `Δ²_h = Δ_h ∘ (ghost-extended Δ_h)`.
///
/// The inner Laplacian is evaluated on the closure with the grid's ghost
/// rule; the outer one is the plain interior stencil reading those closure
/// values. On an interval with `h = 1/4` this reproduces
/// `h⁻⁴ [[7,−4,1],[−4,6,−4],[1,−4,7]]`.
pub fn assemble_biharmonic(grid: &Grid) -> Result<SparseSymmetricMatrix> {
    let n = grid.dim();
    let nodes = grid.node_count();
    let inner = closure_laplacian_rows(grid);

    let mut full: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); nodes];
    for (p, idx) in grid.nodes().iter().enumerate() {
        let mut outer: Vec<(usize, i64)> = vec![(p, -2 * n as i64)];
        for a in 0..n {
            for step in [-1, 1] {
                let c = grid
                    .closure_index_of(&offset(idx, a, step))
                    .ok_or_else(|| Error::Invariant("interior neighbour missing from closure".into()))?;
                outer.push((c, 1));
            }
        }
        let row = &mut full[p];
        for (c, w) in outer {
            for (&q, &v) in &inner[c] {
                *row.entry(q).or_insert(0) += w * v;
            }
        }
        row.retain(|_, v| *v != 0);
    }

    for (p, row) in full.iter().enumerate() {
        for (&q, &v) in row {
            if full[q].get(&p) != Some(&v) {
                return Err(Error::Invariant(format!(
                    "biharmonic assembly is not symmetric at ({p}, {q})"
                )));
            }
        }
    }

    let scale = grid.spacing().powi(-4);
    let trip = full
        .iter()
        .enumerate()
        .flat_map(|(p, row)| row.range(p..).map(move |(&q, &v)| (p, q, v as f64 * scale)));
    SparseSymmetricMatrix::from_upper_triplets("biharmonic", nodes, trip)
}

/// Centered difference appliers sharing the ghost convention of the
/// assembled operators.
#[derive(Debug, Clone)]
pub struct DerivativeStencils {
    dim: usize,
    h: f64,
    nodes: usize,
    closure: usize,
    /// Source of the value at each closure node itself.
    self_src: Vec<Source>,
    /// `[axis][0 = minus, 1 = plus]` value sources of each closure node's neighbours.
    nbr_src: Vec<Vec<[Source; 2]>>,
    /// Closure index of each interior node's neighbours.
    nbr_closure: Vec<Vec<[usize; 2]>>,
    /// Interior index of each interior node's neighbours, if interior.
    nbr_interior: Vec<Vec<[Option<usize>; 2]>>,
}

fn value(u: &[f64], s: Source) -> f64 {
    match s {
        Source::Zero => 0.0,
        Source::Node(i) => u[i],
    }
}

impl DerivativeStencils {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.dim();
        let closure = grid.closure_count();
        let mut self_src = Vec::with_capacity(closure);
        let mut nbr_src = Vec::with_capacity(closure);
        for c in 0..closure {
            let idx = grid.closure_node(c);
            self_src.push(grid.source(&idx));
            nbr_src.push(
                (0..n)
                    .map(|a| {
                        [
                            grid.source(&offset(&idx, a, -1)),
                            grid.source(&offset(&idx, a, 1)),
                        ]
                    })
                    .collect(),
            );
        }
        let mut nbr_closure = Vec::with_capacity(grid.node_count());
        let mut nbr_interior = Vec::with_capacity(grid.node_count());
        for idx in grid.nodes() {
            nbr_closure.push(
                (0..n)
                    .map(|a| {
                        [-1, 1].map(|s| {
                            grid.closure_index_of(&offset(idx, a, s))
                                .expect("interior neighbours are closure nodes")
                        })
                    })
                    .collect(),
            );
            nbr_interior.push(
                (0..n)
                    .map(|a| [-1, 1].map(|s| grid.index_of(&offset(idx, a, s))))
                    .collect(),
            );
        }
        Self {
            dim: n,
            h: grid.spacing(),
            nodes: grid.node_count(),
            closure,
            self_src,
            nbr_src,
            nbr_closure,
            nbr_interior,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Centered first differences at interior nodes, one vector per axis.
    pub fn apply_gradient(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(self.nodes, u.len())?;
        let inv = 0.5 / self.h;
        Ok((0..self.dim)
            .map(|a| {
                (0..self.nodes)
                    .map(|p| {
                        let [m, pl] = self.nbr_src[p][a];
                        (value(u, pl) - value(u, m)) * inv
                    })
                    .collect()
            })
            .collect())
    }

    /// Three-point second differences `∂²u/∂x_m²` on the closure, one vector per axis.
    pub fn apply_pure_second_derivatives(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(self.nodes, u.len())?;
        let inv = self.h.powi(-2);
        Ok((0..self.dim)
            .map(|a| {
                (0..self.closure)
                    .map(|c| {
                        let [m, pl] = self.nbr_src[c][a];
                        (value(u, m) - 2.0 * value(u, self.self_src[c]) + value(u, pl)) * inv
                    })
                    .collect()
            })
            .collect())
    }

    /// Ghost-extended `Δ_h u` on the closure.
    pub fn apply_laplacian(&self, u: &[f64]) -> Result<Vec<f64>> {
        let parts = self.apply_pure_second_derivatives(u)?;
        let mut out = vec![0.0; self.closure];
        for part in &parts {
            for (o, v) in out.iter_mut().zip(part) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Centered first differences at interior nodes of a field known on the closure.
    pub fn apply_closure_gradient(&self, field: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(self.closure, field.len())?;
        let inv = 0.5 / self.h;
        Ok((0..self.dim)
            .map(|a| {
                (0..self.nodes)
                    .map(|p| {
                        let [m, pl] = self.nbr_closure[p][a];
                        (field[pl] - field[m]) * inv
                    })
                    .collect()
            })
            .collect())
    }

    /// `∇(Δ_h u)` at interior nodes: ghost-extended Laplacian, then centered differences.
    pub fn apply_grad_laplacian(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        let lap = self.apply_laplacian(u)?;
        self.apply_closure_gradient(&lap)
    }

    /// `Δ_h w` at interior nodes for a field that vanishes outside the interior.
    pub fn apply_dirichlet_laplacian(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nodes, w.len())?;
        let inv = self.h.powi(-2);
        Ok((0..self.nodes)
            .map(|p| {
                let mut acc = -2.0 * self.dim as f64 * w[p];
                for a in 0..self.dim {
                    for q in self.nbr_interior[p][a].iter().flatten() {
                        acc += w[*q];
                    }
                }
                acc * inv
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Domain};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn beam(d: usize) -> Grid {
        build_grid(&Domain::unit_interval(), &[d]).unwrap()
    }

    #[test]
    fn laplacian_on_three_nodes() {
        let g = beam(4);
        let lap = assemble_laplacian(&g);
        assert!(lap.negated);
        let m = lap.matrix.to_dense();
        assert_eq!(m[(0, 0)], 32.0);
        assert_eq!(m[(0, 1)], -16.0);
        assert_eq!(m[(0, 2)], 0.0);
        let eig = m.symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let expected = 64.0 * (std::f64::consts::PI / 8.0).sin().powi(2);
        assert_relative_eq!(min, expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 9.3726, epsilon = 1e-4);
    }

    #[test]
    fn laplacian_of_constant_feels_the_boundary() {
        let g = build_grid(&Domain::unit_square(), &[8, 8]).unwrap();
        let lap = assemble_laplacian(&g).matrix;
        let y = lap.matvec(&vec![1.0; g.node_count()]);
        for (p, v) in y.iter().enumerate() {
            if g.steps_to_boundary(p) > 1 {
                assert_eq!(*v, 0.0);
            } else {
                assert!(*v > 0.0);
            }
        }
    }

    #[test]
    fn biharmonic_three_node_beam() {
        let g = beam(4);
        let b = assemble_biharmonic(&g).unwrap();
        let s = 256.0;
        let expected = [[7.0, -4.0, 1.0], [-4.0, 6.0, -4.0], [1.0, -4.0, 7.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(b.get(r, c), expected[r][c] * s);
            }
        }
        let mut ev: Vec<f64> = b
            .to_dense()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(f64::total_cmp);
        let r33 = 33f64.sqrt();
        assert_relative_eq!(ev[0], (7.0 - r33) * s, max_relative = 1e-12);
        assert_relative_eq!(ev[1], 6.0 * s, max_relative = 1e-12);
        assert_relative_eq!(ev[2], (7.0 + r33) * s, max_relative = 1e-12);
        // Persymmetric: (a, b, a) stays symmetric.
        let y = b.matvec(&[1.0, 2.0, 1.0]);
        assert_eq!(y[0], y[2]);
    }

    #[test]
    fn biharmonic_square_has_thirteen_point_footprint() {
        let g = build_grid(&Domain::unit_square(), &[10, 10]).unwrap();
        let b = assemble_biharmonic(&g).unwrap();
        let h4 = g.spacing().powi(4);
        for p in 0..g.node_count() {
            assert!(b.row_nonzeros(p) <= 13);
        }
        let centre = g.index_of(&[5, 5, 0]).unwrap();
        assert_relative_eq!(b.get(centre, centre) * h4, 20.0, max_relative = 1e-14);
        let corner = g.index_of(&[1, 1, 0]).unwrap();
        assert_relative_eq!(b.get(corner, corner) * h4, 22.0, max_relative = 1e-14);
        let edge = g.index_of(&[1, 5, 0]).unwrap();
        assert_relative_eq!(b.get(edge, edge) * h4, 21.0, max_relative = 1e-14);
    }

    #[test]
    fn compensated_matvec_resolves_cancellation() {
        let g = beam(400);
        let b = assemble_biharmonic(&g).unwrap();
        // A smooth clamped profile: A u ≈ u'''' = 24 away from the ends,
        // while individual stencil terms are of size h⁻⁴ ≈ 2.6e10.
        let u = g.sample(|x| (x[0] * (1.0 - x[0])).powi(2));
        let y = b.matvec_compensated(&u);
        let plain = b.matvec(&u);
        let mid = g.node_count() / 2;
        assert!((y[mid] - 24.0).abs() < 1e-12 * 2.6e10 * 1e-3);
        assert!((y[mid] - plain[mid]).abs() < 1e-4);
        let xs: Vec<f64> = (0..g.node_count()).map(|i| (i as f64).sin()).collect();
        let (a, c) = (b.matvec(&xs), b.matvec_compensated(&xs));
        for (p, q) in a.iter().zip(&c) {
            assert!((p - q).abs() <= 1e-14 * 2.6e10 * 16.0);
        }
    }

    #[test]
    fn biharmonic_is_exactly_symmetric() {
        for dom in [Domain::unit_square(), Domain::unit_disk()] {
            let g = build_grid(&dom, &[12, 12]).unwrap();
            let b = assemble_biharmonic(&g).unwrap().to_dense();
            assert_eq!(b, b.transpose());
        }
        let g = build_grid(&Domain::cuboid(&[1.0, 1.0, 1.0]).unwrap(), &[5, 5, 5]).unwrap();
        let b = assemble_biharmonic(&g).unwrap().to_dense();
        assert_eq!(b, b.transpose());
    }

    #[test]
    fn quadratic_form_equals_weighted_laplacian_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dom, d) in [
            (Domain::unit_interval(), vec![17]),
            (Domain::unit_square(), vec![9, 9]),
            (Domain::unit_disk(), vec![14, 14]),
            (Domain::cuboid(&[1.0, 1.0, 1.0]).unwrap(), vec![5, 5, 5]),
        ] {
            let g = build_grid(&dom, &d).unwrap();
            let b = assemble_biharmonic(&g).unwrap();
            let st = DerivativeStencils::new(&g);
            for _ in 0..5 {
                let u: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let quad = g.inner_product(&u, &b.matvec(&u)).unwrap();
                let lap = st.apply_laplacian(&u).unwrap();
                let norm = g.closure_inner_product(&lap, &lap).unwrap();
                assert_relative_eq!(quad, norm, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let g = build_grid(&Domain::unit_disk(), &[10, 10]).unwrap();
        let b = assemble_biharmonic(&g).unwrap();
        let x: Vec<f64> = (0..g.node_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let dense = b.to_dense() * nalgebra::DVector::from_vec(x.clone());
        for (a, e) in b.matvec(&x).iter().zip(dense.iter()) {
            assert_relative_eq!(*a, *e, max_relative = 1e-12, epsilon = 1e-9);
        }
    }

    fn max_err(g: &Grid, approx: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
        g.node_coordinates()
            .iter()
            .zip(approx)
            .map(|(c, a)| (a - exact(c[0])).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gradient_of_sine_is_second_order() {
        use std::f64::consts::PI;
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&d| {
                let g = beam(d);
                let st = DerivativeStencils::new(&g);
                let u = g.sample(|x| (PI * x[0]).sin());
                let du = st.apply_gradient(&u).unwrap();
                max_err(&g, &du[0], |x| PI * (PI * x).cos())
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gradient_parity_and_zero() {
        let g = beam(16);
        let st = DerivativeStencils::new(&g);
        let zero = st.apply_gradient(&vec![0.0; g.node_count()]).unwrap();
        assert!(zero[0].iter().all(|v| *v == 0.0));
        // Odd about x = 1/2 → even derivative.
        let u = g.sample(|x| (x[0] - 0.5).powi(3));
        let du = &st.apply_gradient(&u).unwrap()[0];
        let n = du.len();
        for i in 0..n {
            assert_relative_eq!(du[i], du[n - 1 - i], max_relative = 1e-12);
        }
    }

    #[test]
    fn second_derivative_of_clamped_quartic() {
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&d| {
                let g = beam(d);
                let st = DerivativeStencils::new(&g);
                let u = g.sample(|x| x[0].powi(2) * (1.0 - x[0]).powi(2));
                let d2 = st.apply_pure_second_derivatives(&u).unwrap();
                let lap = st.apply_laplacian(&u).unwrap();
                assert_eq!(d2[0], lap);
                max_err(&g, &d2[0][..g.node_count()], |x| 2.0 - 12.0 * x + 12.0 * x * x)
            })
            .collect();
        // Exact for quartics up to the h² u'''' / 12 term.
        assert_relative_eq!(errs[0], 24.0 / 12.0 / 32f64.powi(2), max_relative = 1e-8);
        assert!(errs[0] / errs[1] > 3.9);
    }

    #[test]
    fn separable_second_derivatives_in_two_dimensions() {
        let f = |x: f64| (x * (1.0 - x)).powi(2);
        let f2 = |x: f64| 2.0 - 12.0 * x + 12.0 * x * x;
        let g = build_grid(&Domain::unit_square(), &[40, 40]).unwrap();
        let st = DerivativeStencils::new(&g);
        let u = g.sample(|x| f(x[0]) * f(x[1]));
        let d2 = st.apply_pure_second_derivatives(&u).unwrap();
        let coords = g.node_coordinates();
        let mut worst: f64 = 0.0;
        for (p, c) in coords.iter().enumerate() {
            worst = worst.max((d2[0][p] - f2(c[0]) * f(c[1])).abs());
            worst = worst.max((d2[1][p] - f(c[0]) * f2(c[1])).abs());
        }
        assert!(worst < 2.0 * g.spacing().powi(2), "worst {worst}");
    }

    #[test]
    fn cubic_is_differenced_to_known_truncation_inside() {
        // Centered differences of a cubic: D u = u' + h² u''' / 6, D² u = u''.
        let g = beam(20);
        let st = DerivativeStencils::new(&g);
        let u = g.sample(|x| x[0] * x[0] * (3.0 - 2.0 * x[0]));
        let du = &st.apply_gradient(&u).unwrap()[0];
        let d2 = &st.apply_pure_second_derivatives(&u).unwrap()[0];
        for (p, c) in g.node_coordinates().iter().enumerate() {
            if g.steps_to_boundary(p) > 2 {
                let x = c[0];
                let h2 = g.spacing().powi(2);
                assert_relative_eq!(du[p], 6.0 * x - 6.0 * x * x - 2.0 * h2, epsilon = 1e-11);
                assert_relative_eq!(d2[p], 6.0 - 12.0 * x, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn grad_laplacian_of_sine() {
        use std::f64::consts::PI;
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&d| {
                let g = beam(d);
                let st = DerivativeStencils::new(&g);
                let u = g.sample(|x| (PI * x[0]).sin());
                // sin(πx) is odd about the ends, not even: compare away from them.
                let gl = &st.apply_grad_laplacian(&u).unwrap()[0];
                g.node_coordinates()
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| g.steps_to_boundary(*p) > 2)
                    .map(|(p, c)| (gl[p] + PI.powi(3) * (PI * c[0]).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn grad_laplacian_is_linear() {
        let g = build_grid(&Domain::unit_square(), &[8, 8]).unwrap();
        let st = DerivativeStencils::new(&g);
        let u: Vec<f64> = (0..g.node_count()).map(|i| (i as f64).sin()).collect();
        let v: Vec<f64> = (0..g.node_count()).map(|i| (i as f64 * 0.3).cos()).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (gu, gv, gw) = (
            st.apply_grad_laplacian(&u).unwrap(),
            st.apply_grad_laplacian(&v).unwrap(),
            st.apply_grad_laplacian(&w).unwrap(),
        );
        for a in 0..2 {
            for p in 0..g.node_count() {
                assert_relative_eq!(
                    gw[a][p],
                    gu[a][p] + gv[a][p],
                    epsilon = 1e-9,
                    max_relative = 1e-12
                );
            }
        }
        let zero = st.apply_grad_laplacian(&vec![0.0; g.node_count()]).unwrap();
        assert!(zero.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn coordinate_dump_has_one_line_per_entry() {
        let g = beam(4);
        let b = assemble_biharmonic(&g).unwrap();
        let mut buf = Vec::new();
        b.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(lines.len(), b.stored_entries());
        assert_eq!(lines[0], "0 0 1.7920000000000000e3");
    }
}
