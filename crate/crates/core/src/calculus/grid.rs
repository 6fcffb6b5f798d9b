//! Uniform cell-centered grids over a padded box with region masks.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default cap on the number of grid nodes.
pub const NODE_CAP: usize = 1 << 22;

/// Bounded domain Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<T> {
    Interval { a: T, b: T },
    Rectangle { x: (T, T), y: (T, T) },
    Disk { center: [T; 2], radius: T },
}

impl<T: Real> Domain<T> {
    pub fn unit_interval() -> Self {
        Domain::Interval {
            a: T::zero(),
            b: T::one(),
        }
    }

    pub fn unit_square() -> Self {
        Domain::Rectangle {
            x: (T::zero(), T::one()),
            y: (T::zero(), T::one()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Lower and upper corners of the bounding box.
    pub fn bounds(&self) -> ([T; 2], [T; 2]) {
        match *self {
            Domain::Interval { a, b } => ([a, T::zero()], [b, T::zero()]),
            Domain::Rectangle { x, y } => ([x.0, y.0], [x.1, y.1]),
            Domain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        }
    }

    pub fn diameter(&self) -> T {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rectangle { x, y } => (x.1 - x.0).hypot(y.1 - y.0),
            Domain::Disk { radius, .. } => radius + radius,
        }
    }

    /// Euclidean distance from `p` to Ω (zero inside).
    pub fn distance(&self, p: &[T]) -> T {
        match *self {
            Domain::Interval { a, b } => (a - p[0]).max(p[0] - b).max(T::zero()),
            Domain::Rectangle { x, y } => {
                let dx = (x.0 - p[0]).max(p[0] - x.1).max(T::zero());
                let dy = (y.0 - p[1]).max(p[1] - y.1).max(T::zero());
                dx.hypot(dy)
            }
            Domain::Disk { center, radius } => {
                ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).max(T::zero())
            }
        }
    }

    /// Strict containment in the open set Ω.
    pub fn contains(&self, p: &[T]) -> bool {
        match *self {
            Domain::Interval { a, b } => p[0] > a && p[0] < b,
            Domain::Rectangle { x, y } => p[0] > x.0 && p[0] < x.1 && p[1] > y.0 && p[1] < y.1,
            Domain::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) < radius,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { a, b } => a.is_finite() && b.is_finite() && b > a,
            Domain::Rectangle { x, y } => {
                x.0.is_finite() && x.1.is_finite() && y.0.is_finite() && y.1.is_finite() && x.1 > x.0 && y.1 > y.0
            }
            Domain::Disk { center, radius } => center[0].is_finite() && center[1].is_finite() && radius > T::zero(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("degenerate domain {self:?}")))
        }
    }

    /// Smallest side length of the bounding box.
    fn min_extent(&self) -> T {
        let (lo, hi) = self.bounds();
        match self.dim() {
            1 => hi[0] - lo[0],
            _ => (hi[0] - lo[0]).min(hi[1] - lo[1]),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Interval { a, b } => format!("interval {a:e} {b:e}"),
            Domain::Rectangle { x, y } => format!("rectangle {:e} {:e} {:e} {:e}", x.0, x.1, y.0, y.1),
            Domain::Disk { center, radius } => {
                format!("disk {:e} {:e} {:e}", center[0], center[1], radius)
            }
        }
    }

    /// Inverse of [`Domain::describe`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let nums: Vec<f64> = parts
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in domain"))))
            .collect::<Result<_>>()?;
        let want = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("domain {kind} takes {k} numbers, got {}", nums.len())))
            }
        };
        let d = match kind {
            "interval" => {
                want(2)?;
                Domain::Interval {
                    a: T::lit(nums[0]),
                    b: T::lit(nums[1]),
                }
            }
            "rectangle" => {
                want(4)?;
                Domain::Rectangle {
                    x: (T::lit(nums[0]), T::lit(nums[1])),
                    y: (T::lit(nums[2]), T::lit(nums[3])),
                }
            }
            "disk" => {
                want(3)?;
                Domain::Disk {
                    center: [T::lit(nums[0]), T::lit(nums[1])],
                    radius: T::lit(nums[2]),
                }
            }
            _ => return Err(Error::Parse(format!("unknown domain kind {kind:?}"))),
        };
        d.validate()?;
        Ok(d)
    }
}

/// Role of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Node center in Ω.
    Domain,
    /// Node center within the collar width of Ω but outside it.
    Collar,
    Exterior,
}

impl Region {
    pub fn code(self) -> char {
        match self {
            Region::Domain => 'd',
            Region::Collar => 'c',
            Region::Exterior => 'e',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'd' => Some(Region::Domain),
            'c' => Some(Region::Collar),
            'e' => Some(Region::Exterior),
            _ => None,
        }
    }
}

/// Uniform tensor grid of cell centers over a box containing Ω, its collar
/// and a zero padding ring. Node `(i, j)` sits at
/// `origin + ((i + 1/2) h, (j + 1/2) h)` and has linear index `i + shape[0] * j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    domain: Domain<T>,
    h: T,
    delta: T,
    collar: T,
    padding: T,
    origin: [T; 2],
    shape: [usize; 2],
    regions: Vec<Region>,
    dofs: Vec<usize>,
}

/// Grid for Ω with collar width `2δ` and padding `max(δ, box/4)`.
pub fn build_grid<T: Real>(domain: Domain<T>, h: T, delta: T) -> Result<Arc<Grid<T>>> {
    Grid::new(domain, h, delta).map(Arc::new)
}

impl<T: Real> Grid<T> {
    pub fn new(domain: Domain<T>, h: T, delta: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::Geometry(format!("horizon must be positive, got {delta}")));
        }
        domain.validate()?;
        let collar = delta + delta;
        let (lo, hi) = domain.bounds();
        let widest = (0..domain.dim())
            .map(|a| hi[a] - lo[a] + collar + collar)
            .fold(T::zero(), T::max);
        let padding = delta.max(widest / T::lit(4.0));
        Self::with_layout(domain, h, delta, collar, padding, NODE_CAP)
    }

    /// Grid with explicit collar width and padding.
    pub fn with_layout(domain: Domain<T>, h: T, delta: T, collar: T, padding: T, cap: usize) -> Result<Self> {
        domain.validate()?;
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Geometry(format!("spacing must be positive, got {h}")));
        }
        if h > domain.min_extent() {
            return Err(Error::Geometry(format!(
                "spacing {h} exceeds the domain extent {}",
                domain.min_extent()
            )));
        }
        if !(collar >= T::zero()) || !(padding >= T::zero()) || !delta.is_finite() || !(delta >= T::zero()) {
            return Err(Error::Geometry("collar, padding and horizon must be nonnegative".into()));
        }
        let dim = domain.dim();
        let (lo, hi) = domain.bounds();
        let mut origin = [T::zero(); 2];
        let mut shape = [1usize; 2];
        let mut total: f64 = 1.0;
        for a in 0..dim {
            let margin = ((collar + padding) / h).ceil().to_usize().unwrap_or(usize::MAX);
            let inner = ((hi[a] - lo[a]) / h - T::lit(1e-9)).ceil().to_usize().unwrap_or(usize::MAX);
            let n = margin.saturating_mul(2).saturating_add(inner);
            origin[a] = lo[a] - T::from_usize_lossy(margin) * h;
            shape[a] = n;
            total *= n as f64;
        }
        if total > cap as f64 {
            return Err(Error::MemoryBudget {
                nodes: total.min(usize::MAX as f64) as usize,
                cap,
            });
        }
        let count = shape[0] * shape[1];
        let mut regions = Vec::with_capacity(count);
        let mut dofs = Vec::new();
        let mut p = [T::zero(); 2];
        for idx in 0..count {
            let (i, j) = (idx % shape[0], idx / shape[0]);
            p[0] = origin[0] + (T::from_usize_lossy(i) + T::lit(0.5)) * h;
            p[1] = origin[1] + (T::from_usize_lossy(j) + T::lit(0.5)) * h;
            let r = if domain.contains(&p[..dim]) {
                dofs.push(idx);
                Region::Domain
            } else if domain.distance(&p[..dim]) < collar {
                Region::Collar
            } else {
                Region::Exterior
            };
            regions.push(r);
        }
        if dofs.is_empty() {
            return Err(Error::Geometry("no grid node falls inside the domain".into()));
        }
        Ok(Self {
            domain,
            h,
            delta,
            collar,
            padding,
            origin,
            shape,
            regions,
            dofs,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn collar_width(&self) -> T {
        self.collar
    }

    pub fn padding(&self) -> T {
        self.padding
    }

    pub fn origin(&self) -> [T; 2] {
        self.origin
    }

    /// Node counts per axis; the second entry is 1 in one dimension.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Box side lengths.
    pub fn box_lengths(&self) -> [T; 2] {
        [
            T::from_usize_lossy(self.shape[0]) * self.h,
            T::from_usize_lossy(self.shape[1]) * self.h,
        ]
    }

    /// Cell volume hⁿ.
    pub fn cell_volume(&self) -> T {
        self.h.powi(self.dim() as i32)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, idx: usize) -> Region {
        self.regions[idx]
    }

    /// Linear indices of the nodes in Ω, increasing.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    pub fn multi_index(&self, idx: usize) -> (usize, usize) {
        (idx % self.shape[0], idx / self.shape[0])
    }

    /// Coordinates of a node (second entry unused in one dimension).
    pub fn node(&self, idx: usize) -> [T; 2] {
        let (i, j) = self.multi_index(idx);
        [
            self.origin[0] + (T::from_usize_lossy(i) + T::lit(0.5)) * self.h,
            self.origin[1] + (T::from_usize_lossy(j) + T::lit(0.5)) * self.h,
        ]
    }

    /// Distance from a node to the nearest box face.
    pub fn distance_to_box_edge(&self, idx: usize) -> T {
        let p = self.node(idx);
        let len = self.box_lengths();
        let mut d = T::infinity();
        for a in 0..self.dim() {
            let x = p[a] - self.origin[a];
            d = d.min(x).min(len[a] - x);
        }
        d
    }

    /// Smallest distance from Ω-plus-collar to the box boundary.
    pub fn ring_width(&self) -> T {
        let (lo, hi) = self.domain.bounds();
        let len = self.box_lengths();
        let mut w = T::infinity();
        for a in 0..self.dim() {
            w = w.min(lo[a] - self.collar - self.origin[a]);
            w = w.min(self.origin[a] + len[a] - hi[a] - self.collar);
        }
        w
    }

    /// True for nodes outside Ω plus collar.
    pub fn is_padding(&self, idx: usize) -> bool {
        self.regions[idx] == Region::Exterior
    }

    /// Maps a node index to its position in [`Grid::dofs`].
    pub fn dof_position(&self, idx: usize) -> Option<usize> {
        self.dofs.binary_search(&idx).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_layout() {
        let g = build_grid(Domain::<f64>::unit_interval(), 1.0 / 64.0, 0.1).unwrap();
        let len = g.box_lengths()[0];
        assert!(g.origin()[0] <= -0.3 && g.origin()[0] + len >= 1.3);
        assert_eq!(g.dofs().len(), 64);
        let count = |r| g.regions().iter().filter(|x| **x == r).count();
        assert_eq!(count(Region::Domain) + count(Region::Collar) + count(Region::Exterior), g.len());
        // collar is 2δ wide on each side
        assert_eq!(count(Region::Collar), 2 * 13);
        assert!(g.ring_width() >= 0.1);
    }

    #[test]
    fn zero_horizon_is_rejected() {
        assert!(matches!(
            build_grid(Domain::<f64>::unit_interval(), 1.0 / 64.0, 0.0),
            Err(Error::Geometry(_))
        ));
        assert!(build_grid(Domain::<f64>::unit_interval(), 2.0, 0.1).is_err());
    }

    #[test]
    fn square_collar_on_all_sides() {
        let g = build_grid(Domain::<f64>::unit_square(), 1.0 / 32.0, 0.125).unwrap();
        assert_eq!(g.dofs().len(), 32 * 32);
        let collar: Vec<[f64; 2]> = (0..g.len())
            .filter(|&i| g.region(i) == Region::Collar)
            .map(|i| g.node(i))
            .collect();
        assert!(collar.iter().any(|p| p[0] < 0.0 && p[1] > 0.0 && p[1] < 1.0));
        assert!(collar.iter().any(|p| p[0] > 1.0 && p[1] > 0.0 && p[1] < 1.0));
        assert!(collar.iter().any(|p| p[1] < 0.0 && p[0] > 0.0 && p[0] < 1.0));
        assert!(collar.iter().any(|p| p[1] > 1.0 && p[0] > 0.0 && p[0] < 1.0));
    }

    #[test]
    fn node_cap() {
        let err = Grid::with_layout(Domain::<f64>::unit_square(), 1e-3, 0.1, 0.2, 0.3, 1 << 10).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { .. }));
    }

    #[test]
    fn disk_masks() {
        let d = Domain::Disk {
            center: [0.0f64, 0.0],
            radius: 1.0,
        };
        let g = build_grid(d, 0.05, 0.1).unwrap();
        for &i in g.dofs() {
            let p = g.node(i);
            assert!(p[0].hypot(p[1]) < 1.0);
        }
        let n = g.dofs().len() as f64 * 0.05 * 0.05;
        assert!((n - std::f64::consts::PI).abs() < 0.05);
    }

    #[test]
    fn domain_text_round_trip() {
        for d in [
            Domain::Interval { a: -1.0, b: 2.5 },
            Domain::unit_square(),
            Domain::Disk {
                center: [0.5, -0.25],
                radius: 0.75,
            },
        ] {
            assert_eq!(Domain::<f64>::parse(&d.describe()).unwrap(), d);
        }
    }
}
