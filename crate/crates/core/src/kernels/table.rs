//! Tabulated radial profiles: two-column text files and log-log interpolation.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Strictly increasing radii with nonnegative samples, interpolated
/// piecewise linearly in log-log coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    radii: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> Table<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::Table(format!(
                "{} radii but {} values",
                radii.len(),
                values.len()
            )));
        }
        if radii.len() < 2 {
            return Err(Error::Table("need at least two rows".into()));
        }
        if !(radii[0] > T::zero()) {
            return Err(Error::Table("radii must be positive".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table("radii must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) || !(values[0] > T::zero())
        {
            return Err(Error::NonpositiveProfile);
        }
        Ok(Self { radii, values })
    }

    /// Parses `radius value` rows; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(|c: char| c.is_whitespace() || c == ',').filter(|c| !c.is_empty());
            let mut next = |name: &str| -> Result<T> {
                let tok = cols.next().ok_or_else(|| {
                    Error::Table(format!("line {}: missing {name}", lineno + 1))
                })?;
                tok.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Table(format!("line {}: bad number {tok:?}", lineno + 1)))
            };
            let r = next("radius")?;
            let v = next("value")?;
            if cols.next().is_some() {
                return Err(Error::Table(format!("line {}: expected two columns", lineno + 1)));
            }
            radii.push(r);
            values.push(v);
        }
        Self::new(radii, values)
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn last_radius(&self) -> T {
        *self.radii.last().expect("non-empty table")
    }

    pub fn eval(&self, r: T) -> T {
        let n = self.radii.len();
        if r > self.radii[n - 1] {
            return T::zero();
        }
        if r <= self.radii[0] {
            // power-law continuation of the first segment towards the origin
            let (r0, r1, v0, v1) = (self.radii[0], self.radii[1], self.values[0], self.values[1]);
            if v1 > T::zero() {
                let slope = (v1 / v0).ln() / (r1 / r0).ln();
                return v0 * (r / r0).powf(slope);
            }
            return v0;
        }
        let i = match self
            .radii
            .binary_search_by(|x| x.partial_cmp(&r).expect("finite radius"))
        {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        interp_loglog(self.radii[i], self.radii[i + 1], self.values[i], self.values[i + 1], r)
    }
}

pub(crate) fn interp_loglog<T: Real>(r0: T, r1: T, v0: T, v1: T, r: T) -> T {
    if v0 > T::zero() && v1 > T::zero() {
        let t = (r / r0).ln() / (r1 / r0).ln();
        (v0.ln() * (T::one() - t) + v1.ln() * t).exp()
    } else {
        let t = (r - r0) / (r1 - r0);
        v0 * (T::one() - t) + v1 * t
    }
}
