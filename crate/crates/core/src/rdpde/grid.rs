use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigenvalue, DenseMatrix, Weight};
use crate::scalar::Scalar;

/// Vertex-centered grid `x_i = i·L/(N−1)` on `[0, L]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D<T> {
    length: T,
    n_points: usize,
    weights: Vec<T>,
}

impl<T: Scalar> Grid1D<T> {
    pub fn new(length: T, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::Grid(format!("need at least 3 points, got {n_points}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::Grid(format!("length must be positive and finite, got {length}")));
        }
        let h = length / T::of((n_points - 1) as f64);
        let mut weights = vec![h; n_points];
        weights[0] = h * T::of(0.5);
        weights[n_points - 1] = h * T::of(0.5);
        Ok(Self { length, n_points, weights })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> T {
        self.length / T::of((self.n_points - 1) as f64)
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            self.length
        } else {
            self.spacing() * T::of(i as f64)
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    pub fn quad_weights(&self) -> &[T] {
        &self.weights
    }
}

/// Dense `N×N` Neumann Laplacian with reflecting ghost nodes.
pub fn neumann_laplacian<T: Scalar>(grid: &Grid1D<T>) -> DenseMatrix<T> {
    let n = grid.n_points();
    let inv_h2 = T::one() / (grid.spacing() * grid.spacing());
    let two = T::of(2.0);
    DenseMatrix::from_fn(n, n, |i, j| {
        let v = if i == j {
            -two
        } else if i == 0 && j == 1 || i == n - 1 && j == n - 2 {
            two
        } else if i.abs_diff(j) == 1 {
            T::one()
        } else {
            T::zero()
        };
        v * inv_h2
    })
}

/// Applies the Neumann Laplacian stencil to every species of a node-major
/// state with `n` species per node.
pub(crate) fn laplacian_all<T: Scalar>(x: &[T], n: usize, inv_h2: T, out: &mut [T]) {
    let len = x.len();
    let two = T::of(2.0);
    for i in 0..n {
        out[i] = two * (x[i + n] - x[i]) * inv_h2;
    }
    for i in n..len - n {
        out[i] = (x[i - n] - two * x[i] + x[i + n]) * inv_h2;
    }
    for i in len - n..len {
        out[i] = two * (x[i - n] - x[i]) * inv_h2;
    }
}

/// `k`-th smallest eigenvalue (0-based) of the discrete Neumann `−Δ`, from the symmetric
/// tridiagonal matrix `W^{1/2}(−L)W^{−1/2}`.
pub fn neumann_eigenvalue<T: Scalar>(grid: &Grid1D<T>, k: usize) -> Result<T> {
    let n = grid.n_points();
    let inv_h2 = T::one() / (grid.spacing() * grid.spacing());
    let diag = vec![T::of(2.0) * inv_h2; n];
    let mut off = vec![-inv_h2; n - 1];
    off[0] = -T::of(2.0).sqrt() * inv_h2;
    off[n - 2] = off[0];
    tridiagonal_eigenvalue(&diag, &off, k)
}

/// `λ₂` of the discrete Neumann `−Δ`; tends to `(π/L)²`.
pub fn neumann_lambda2<T: Scalar>(grid: &Grid1D<T>) -> T {
    neumann_eigenvalue(grid, 1).expect("grid has at least 3 points")
}

/// `(π/L)²`.
pub fn neumann_lambda2_exact<T: Scalar>(length: T) -> T {
    let r = T::of(std::f64::consts::PI) / length;
    r * r
}

/// Species values on a grid, stored node-major: `values[j·n + s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid1D<T>,
    n_species: usize,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn new(grid: Grid1D<T>, n_species: usize, values: Vec<T>) -> Result<Self> {
        if n_species == 0 || values.len() != grid.n_points() * n_species {
            return Err(Error::Dimension(format!(
                "{} values for {} nodes and {n_species} species",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values".into()));
        }
        Ok(Self { grid, n_species, values })
    }

    /// Samples `f(x)` (one value per species) at every node.
    pub fn from_fn(grid: &Grid1D<T>, n_species: usize, f: impl Fn(T) -> Vec<T>) -> Result<Self> {
        let values = grid.nodes().into_iter().flat_map(&f).collect();
        Self::new(grid.clone(), n_species, values)
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, node: usize) -> &[T] {
        &self.values[node * self.n_species..(node + 1) * self.n_species]
    }

    pub fn species(&self, s: usize) -> Vec<T> {
        self.values.iter().skip(s).step_by(self.n_species).copied().collect()
    }

    /// `(1/L)·Σ_j w_j u_s(x_j)` for every species.
    pub fn weighted_mean(&self) -> Vec<T> {
        let mut mean = vec![T::zero(); self.n_species];
        for (j, &w) in self.grid.quad_weights().iter().enumerate() {
            for (m, &u) in mean.iter_mut().zip(self.at(j)) {
                *m = *m + w * u;
            }
        }
        mean.iter().map(|&m| m / self.grid.length()).collect()
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.n_species != other.n_species {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Self { grid: self.grid.clone(), n_species: self.n_species, values })
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            grid: self.grid.clone(),
            n_species: self.n_species,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// Weighted `L²` inner product `Σ_j w_j u(x_j)ᵀ v(x_j)`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid || self.n_species != other.n_species {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        let n = self.n_species;
        Ok(self
            .grid
            .quad_weights()
            .iter()
            .enumerate()
            .map(|(j, &w)| w * (0..n).map(|s| self.values[j * n + s] * other.values[j * n + s]).sum::<T>())
            .sum())
    }

    /// CSV with columns `x, u_1, …, u_n`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut header = vec!["x".to_string()];
        header.extend((1..=self.n_species).map(|s| format!("u_{s}")));
        let rows = (0..self.grid.n_points()).map(|j| {
            let mut row = vec![self.grid.node(j)];
            row.extend_from_slice(self.at(j));
            row
        });
        crate::export::write_csv(out, &header, rows)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid1D<T>, n_species: usize, values: Vec<T>) -> Self {
        Self { grid, n_species, values }
    }
}

/// `Π_S u = u − ū`, the weighted-mean-free part of each species.
pub fn project_meanfree<T: Scalar>(field: &Field<T>) -> Field<T> {
    let mean = field.weighted_mean();
    let n = field.n_species();
    let values = field.values().iter().enumerate().map(|(k, &v)| v - mean[k % n]).collect();
    Field::from_parts_unchecked(field.grid().clone(), n, values)
}

/// `‖Π_S(P^{1/2} u)‖` in the weighted `L²` norm.
pub fn rd_seminorm<T: Scalar>(field: &Field<T>, p: &DenseMatrix<T>) -> Result<T> {
    rd_seminorm_weighted(field, &Weight::new(p.clone())?)
}

/// [`rd_seminorm`] with a precomputed weight.
pub fn rd_seminorm_weighted<T: Scalar>(field: &Field<T>, weight: &Weight<T>) -> Result<T> {
    let n = field.n_species();
    if weight.dim() != n {
        return Err(Error::Dimension(format!("weight of size {} for {n} species", weight.dim())));
    }
    let root = weight.sqrt();
    let mut values = Vec::with_capacity(field.values().len());
    for j in 0..field.grid().n_points() {
        values.extend(root.try_mul_vec(field.at(j))?);
    }
    let rooted = Field::from_parts_unchecked(field.grid().clone(), n, values);
    let projected = project_meanfree(&rooted);
    Ok(projected.inner(&projected)?.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid1D<f64> {
        Grid1D::new(1.0, n).unwrap()
    }

    #[test]
    fn weights_sum_to_length() {
        for (l, n) in [(1.0, 3), (2.5, 101), (0.3, 7)] {
            let g = Grid1D::new(l, n).unwrap();
            assert!((g.quad_weights().iter().sum::<f64>() - l).abs() <= 1e-12);
        }
        assert!(matches!(Grid1D::new(1.0, 2), Err(Error::Grid(_))));
    }

    #[test]
    fn small_laplacian() {
        let lap = neumann_laplacian(&grid(3));
        let expect =
            DenseMatrix::from_rows(&[[-2.0, 2.0, 0.0], [1.0, -2.0, 1.0], [0.0, 2.0, -2.0]]).unwrap().scale(4.0);
        assert_eq!(lap, expect);
        for i in 0..3 {
            assert_eq!(lap.row(i).iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn laplacian_of_cosine() {
        let g = grid(201);
        let lap = neumann_laplacian(&g);
        let u: Vec<f64> = g.nodes().iter().map(|x| (PI * x).cos()).collect();
        let lu = lap.try_mul_vec(&u).unwrap();
        let inv_h2 = 1.0 / (g.spacing() * g.spacing());
        let mut stencil = vec![0.0; u.len()];
        laplacian_all(&u, 1, inv_h2, &mut stencil);
        for ((&x, &v), &s) in g.nodes().iter().zip(&lu).zip(&stencil) {
            assert!((v + PI * PI * (PI * x).cos()).abs() <= 1e-3);
            assert!((s - v).abs() <= 1e-12 * inv_h2);
        }
    }

    #[test]
    fn weighted_laplacian_is_symmetric() {
        let g = grid(11);
        let lap = neumann_laplacian(&g);
        let wl = DenseMatrix::from_diagonal(g.quad_weights()).try_mul(&lap).unwrap();
        assert!(wl.is_symmetric(1e-10));
    }

    #[test]
    fn lambda2_examples() {
        assert!((neumann_lambda2(&grid(401)) - PI * PI).abs() <= 0.01);
        let g2 = Grid1D::new(2.0, 401).unwrap();
        assert!((neumann_lambda2(&g2) - PI * PI / 4.0).abs() <= 0.005);
        assert!(neumann_eigenvalue(&grid(401), 0).unwrap().abs() <= 1e-9);
        let e1 = (neumann_lambda2(&grid(101)) - PI * PI).abs();
        let e2 = (neumann_lambda2(&grid(201)) - PI * PI).abs();
        assert!((3.5..=4.5).contains(&(e1 / e2)));
    }

    #[test]
    fn lambda2_matches_dense_eigensolve() {
        let g = grid(9);
        let lap = neumann_laplacian(&g);
        let w = g.quad_weights();
        let sym = DenseMatrix::from_fn(9, 9, |i, j| -lap[(i, j)] * (w[i] / w[j]).sqrt());
        let eig = crate::linalg::symmetric_eigen(&sym).unwrap();
        assert!((eig.values[1] - neumann_lambda2(&g)).abs() <= 1e-9);
    }

    #[test]
    fn projection_examples() {
        let g = grid(101);
        let c = Field::from_fn(&g, 2, |_| vec![3.0, -1.0]).unwrap();
        assert!(project_meanfree(&c).values().iter().all(|v| v.abs() <= 1e-12));

        let x = Field::from_fn(&g, 1, |x| vec![x]).unwrap();
        let px = project_meanfree(&x);
        assert!(px.weighted_mean()[0].abs() <= 1e-12);
        for (j, &v) in px.values().iter().enumerate() {
            assert!((v - (g.node(j) - 0.5)).abs() <= 1e-12);
        }
        let again = project_meanfree(&px);
        assert!(again.try_sub(&px).unwrap().values().iter().all(|v| v.abs() <= 1e-15));
    }

    #[test]
    fn seminorm_examples() {
        let g = grid(401);
        let id = DenseMatrix::identity(2);
        let c = Field::from_fn(&g, 2, |_| vec![1.0, 2.0]).unwrap();
        assert!(rd_seminorm(&c, &id).unwrap() <= 1e-12);

        let cosine = Field::from_fn(&g, 2, |x| vec![(PI * x).cos(), 0.0]).unwrap();
        let s = rd_seminorm(&cosine, &id).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() <= 1e-3);
        assert_eq!(rd_seminorm(&cosine.scale(-4.0), &id).unwrap(), 4.0 * s);

        let bad = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(rd_seminorm(&cosine, &bad).is_err());
    }

    #[test]
    fn csv_columns() {
        let f = Field::from_fn(&grid(3), 2, |x| vec![x, 2.0 * x]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,u_1,u_2\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
