//! Directory layout of a stored [`EigenSet`]:
//!
//! ```text
//! eigenpairs.csv        m,p,alpha,lambda,residual,relative_residual,rayleigh
//! eigenfunction_1.txt   field dump of u_1
//! eigenfunction_2.txt   ...
//! ```

use std::fs;
use std::path::Path;

use super::{EigenPair, EigenSet, ResidualReport};
use crate::calculus::{read_dump, write_dump};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MANIFEST_NAME: &str = "eigenpairs.csv";
pub const MANIFEST_HEADER: &str = "m,p,alpha,lambda,residual,relative_residual,rayleigh";

pub fn eigenfunction_file(m: usize) -> String {
    format!("eigenfunction_{m}.txt")
}

fn sci<T: Real>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

impl<T: Real> EigenSet<T> {
    /// CSV manifest with one row per pair.
    pub fn manifest_csv(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for (k, e) in self.pairs.iter().enumerate() {
            let r = &e.residual;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                k + 1,
                sci(self.p),
                sci(r.alpha),
                sci(e.lambda),
                sci(r.norm),
                sci(r.relative),
                sci(r.rayleigh)
            ));
        }
        out
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(MANIFEST_NAME), self.manifest_csv())?;
        for (k, e) in self.pairs.iter().enumerate() {
            fs::write(dir.join(eigenfunction_file(k + 1)), write_dump(e.u.grid(), &[e.u.values()])?)?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MANIFEST_HEADER) {
            return Err(Error::Parse("unexpected eigenpair manifest header".into()));
        }
        let mut p = None;
        let mut pairs = Vec::new();
        for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(Error::Parse(format!("manifest row {} has {} columns", row + 1, cols.len())));
            }
            let num = |i: usize| -> Result<T> {
                cols[i]
                    .trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Parse(format!("bad number {:?}", cols[i])))
            };
            let m: usize = cols[0].trim().parse().map_err(|_| Error::Parse("bad index".into()))?;
            if m != row + 1 {
                return Err(Error::Parse(format!("manifest rows out of order at m = {m}")));
            }
            p = Some(num(1)?);
            let dump = read_dump::<T>(&fs::read_to_string(dir.join(eigenfunction_file(m)))?)?;
            pairs.push(EigenPair {
                lambda: num(3)?,
                u: dump.scalar()?,
                residual: ResidualReport {
                    alpha: num(2)?,
                    norm: num(4)?,
                    relative: num(5)?,
                    rayleigh: num(6)?,
                },
            });
        }
        let p = p.ok_or_else(|| Error::Parse("empty eigenpair manifest".into()))?;
        Ok(EigenSet { p, pairs })
    }
}
