//! Classical piecewise-linear finite elements on a vertex lattice, used as the
//! local reference. In 1D samples are cells; in 2D every lattice square is
//! split along its rising diagonal into two triangles.

use crate::calculus::{Domain, GradientMap};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct VertexLattice<T> {
    domain: Domain<T>,
    origin: [T; 2],
    h: [T; 2],
    /// Cells per axis.
    cells: [usize; 2],
    dofs: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl<T: Real> VertexLattice<T> {
    /// Lattice over the bounding box of Ω with spacing close to `h`; the
    /// spacing is adjusted per axis so the box edges are vertices.
    pub fn new(domain: Domain<T>, h: T) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Geometry(format!("spacing must be positive, got {h}")));
        }
        let dim = domain.dim();
        let (lo, hi) = domain.bounds();
        let mut cells = [1usize; 2];
        let mut hs = [T::one(); 2];
        for a in 0..dim {
            let extent = hi[a] - lo[a];
            let n = (extent / h).round().to_usize().unwrap_or(usize::MAX).max(2);
            cells[a] = n;
            hs[a] = extent / T::from_usize_lossy(n);
        }
        let verts = (cells[0] + 1) * if dim == 2 { cells[1] + 1 } else { 1 };
        if verts > crate::calculus::NODE_CAP {
            return Err(Error::MemoryBudget {
                nodes: verts,
                cap: crate::calculus::NODE_CAP,
            });
        }
        let mut lattice = Self {
            domain,
            origin: lo,
            h: hs,
            cells,
            dofs: Vec::new(),
            position: vec![None; verts],
        };
        for idx in 0..verts {
            if domain.contains(&lattice.vertex(idx)[..dim]) {
                lattice.position[idx] = Some(lattice.dofs.len());
                lattice.dofs.push(idx);
            }
        }
        if lattice.dofs.is_empty() {
            return Err(Error::Geometry("no lattice vertex falls inside the domain".into()));
        }
        Ok(lattice)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn spacing(&self) -> [T; 2] {
        self.h
    }

    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    fn row(&self) -> usize {
        self.cells[0] + 1
    }

    pub fn vertex(&self, idx: usize) -> [T; 2] {
        let (i, j) = (idx % self.row(), idx / self.row());
        [
            self.origin[0] + T::from_usize_lossy(i) * self.h[0],
            self.origin[1] + T::from_usize_lossy(j) * self.h[1],
        ]
    }

    /// Lattice indices of the degrees of freedom (vertices inside Ω).
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    fn value(&self, x: &[T], i: usize, j: usize) -> T {
        self.position[i + self.row() * j].map_or(T::zero(), |k| x[k])
    }

    /// Piecewise-linear interpolant of the dof vector `x` at `p`; zero off the lattice.
    pub fn eval(&self, x: &[T], p: &[T]) -> T {
        let mut t = [T::zero(); 2];
        let mut cell = [0usize; 2];
        for a in 0..self.dim() {
            let s = (p[a] - self.origin[a]) / self.h[a];
            if !(s >= T::zero()) || s > T::from_usize_lossy(self.cells[a]) {
                return T::zero();
            }
            let c = s.floor().to_usize().unwrap_or(0).min(self.cells[a] - 1);
            cell[a] = c;
            t[a] = s - T::from_usize_lossy(c);
        }
        let (i, j) = (cell[0], cell[1]);
        if self.dim() == 1 {
            let (l, r) = (self.value(x, i, 0), self.value(x, i + 1, 0));
            return l + t[0] * (r - l);
        }
        let v00 = self.value(x, i, j);
        let v11 = self.value(x, i + 1, j + 1);
        if t[0] >= t[1] {
            let v10 = self.value(x, i + 1, j);
            v00 + t[0] * (v10 - v00) + t[1] * (v11 - v10)
        } else {
            let v01 = self.value(x, i, j + 1);
            v00 + t[1] * (v01 - v00) + t[0] * (v11 - v01)
        }
    }
}

/// Element gradients of P1 functions vanishing outside Ω.
#[derive(Debug, Clone)]
pub struct LocalGradient<T> {
    lattice: VertexLattice<T>,
}

impl<T: Real> LocalGradient<T> {
    pub fn new(lattice: VertexLattice<T>) -> Self {
        Self { lattice }
    }

    pub fn lattice(&self) -> &VertexLattice<T> {
        &self.lattice
    }

    /// Scatters the dofs onto every lattice vertex.
    fn full(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.lattice.position.len()];
        for (&i, &v) in self.lattice.dofs.iter().zip(x) {
            out[i] = v;
        }
        out
    }
}

impl<T: Real> GradientMap<T> for LocalGradient<T> {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn dofs(&self) -> usize {
        self.lattice.dofs.len()
    }

    fn samples(&self) -> usize {
        let [nx, ny] = self.lattice.cells;
        if self.dim() == 1 {
            nx
        } else {
            2 * nx * ny
        }
    }

    fn sample_weight(&self) -> T {
        let [hx, hy] = self.lattice.h;
        if self.dim() == 1 {
            hx
        } else {
            hx * hy / T::lit(2.0)
        }
    }

    fn mass_weight(&self) -> T {
        let [hx, hy] = self.lattice.h;
        if self.dim() == 1 {
            hx
        } else {
            hx * hy
        }
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        let u = self.full(x);
        let [nx, ny] = self.lattice.cells;
        let [hx, hy] = self.lattice.h;
        if self.dim() == 1 {
            return (0..nx).map(|i| (u[i + 1] - u[i]) / hx).collect();
        }
        let row = nx + 1;
        let s = 2 * nx * ny;
        let mut g = vec![T::zero(); 2 * s];
        for j in 0..ny {
            for i in 0..nx {
                let v00 = u[i + row * j];
                let v10 = u[i + 1 + row * j];
                let v01 = u[i + row * (j + 1)];
                let v11 = u[i + 1 + row * (j + 1)];
                let k = 2 * (i + nx * j);
                // lower triangle (00, 10, 11), upper triangle (00, 01, 11)
                g[k] = (v10 - v00) / hx;
                g[s + k] = (v11 - v10) / hy;
                g[k + 1] = (v11 - v01) / hx;
                g[s + k + 1] = (v01 - v00) / hy;
            }
        }
        g
    }

    fn apply_transpose(&self, g: &[T]) -> Vec<T> {
        let [nx, ny] = self.lattice.cells;
        let [hx, hy] = self.lattice.h;
        let mut u = vec![T::zero(); self.lattice.position.len()];
        if self.dim() == 1 {
            for i in 0..nx {
                let q = g[i] / hx;
                u[i + 1] = u[i + 1] + q;
                u[i] = u[i] - q;
            }
        } else {
            let row = nx + 1;
            let s = 2 * nx * ny;
            for j in 0..ny {
                for i in 0..nx {
                    let (i00, i10, i01, i11) = (i + row * j, i + 1 + row * j, i + row * (j + 1), i + 1 + row * (j + 1));
                    let k = 2 * (i + nx * j);
                    let (a, b) = (g[k] / hx, g[s + k] / hy);
                    u[i10] = u[i10] + a - b;
                    u[i00] = u[i00] - a;
                    u[i11] = u[i11] + b;
                    let (c, d) = (g[k + 1] / hx, g[s + k + 1] / hy);
                    u[i11] = u[i11] + c;
                    u[i01] = u[i01] - c + d;
                    u[i00] = u[i00] - d;
                }
            }
        }
        self.lattice.dofs.iter().map(|&i| u[i]).collect()
    }
}
