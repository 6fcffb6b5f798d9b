//! Plain-text field dumps.
//!
//! ```text
//! format = nlpl-field-v1
//! dim = 1
//! shape = 102 1
//! h = 1.5625000000000000e-2
//! origin = -5.4687500000000000e-1 0.0000000000000000e0
//! domain = interval 0e0 1e0
//! delta = 1.0000000000000001e-1
//! collar = 2.0000000000000001e-1
//! padding = 3.5000000000000003e-1
//! components = 1
//! data
//! e 0.0000000000000000e0
//! ...
//! ```
//!
//! After the `data` line there is one row per node in linear index order
//! (x fastest): the region code (`d` domain, `c` collar, `e` exterior)
//! followed by the component values in `{:.16e}` notation.

use std::fmt::Write as _;
use std::sync::Arc;

use super::field::{Field, VectorField};
use super::grid::{Domain, Grid, Region, NODE_CAP};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const FORMAT_TAG: &str = "nlpl-field-v1";

/// Contents of a parsed dump.
#[derive(Debug, Clone)]
pub struct FieldDump<T> {
    pub grid: Arc<Grid<T>>,
    pub components: Vec<Vec<T>>,
}

impl<T: Real> FieldDump<T> {
    pub fn scalar(&self) -> Result<Field<T>> {
        if self.components.len() != 1 {
            return Err(Error::Shape("dump holds a vector field".into()));
        }
        Field::new(&self.grid, self.components[0].clone())
    }

    pub fn vector(&self) -> Result<VectorField<T>> {
        VectorField::new(&self.grid, self.components.clone())
    }
}

fn e17<T: Real>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

/// Serializes one or more components living on `grid`.
pub fn write_dump<T: Real>(grid: &Grid<T>, components: &[&[T]]) -> Result<String> {
    if components.is_empty() || components.iter().any(|c| c.len() != grid.len()) {
        return Err(Error::Shape("dump components do not match the grid".into()));
    }
    let mut out = String::new();
    let o = grid.origin();
    let s = grid.shape();
    let _ = writeln!(out, "format = {FORMAT_TAG}");
    let _ = writeln!(out, "dim = {}", grid.dim());
    let _ = writeln!(out, "shape = {} {}", s[0], s[1]);
    let _ = writeln!(out, "h = {}", e17(grid.h()));
    let _ = writeln!(out, "origin = {} {}", e17(o[0]), e17(o[1]));
    let _ = writeln!(out, "domain = {}", grid.domain().describe());
    let _ = writeln!(out, "delta = {}", e17(grid.delta()));
    let _ = writeln!(out, "collar = {}", e17(grid.collar_width()));
    let _ = writeln!(out, "padding = {}", e17(grid.padding()));
    let _ = writeln!(out, "components = {}", components.len());
    let _ = writeln!(out, "data");
    for i in 0..grid.len() {
        out.push(grid.region(i).code());
        for c in components {
            out.push(' ');
            out.push_str(&e17(c[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn read_dump<T: Real>(text: &str) -> Result<FieldDump<T>> {
    let mut lines = text.lines();
    let mut header = std::collections::BTreeMap::new();
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "data" {
            break;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header line {line:?}")))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| -> Result<&String> { header.get(k).ok_or_else(|| Error::Parse(format!("missing header key {k:?}"))) };
    if get("format")? != FORMAT_TAG {
        return Err(Error::Parse(format!("unknown dump format {:?}", get("format")?)));
    }
    let num = |k: &str| -> Result<T> {
        get(k)?
            .parse::<f64>()
            .map(T::lit)
            .map_err(|_| Error::Parse(format!("bad number for {k:?}")))
    };
    let domain = Domain::parse(get("domain")?)?;
    let grid = Grid::with_layout(domain, num("h")?, num("delta")?, num("collar")?, num("padding")?, NODE_CAP)?;
    let shape: Vec<usize> = get("shape")?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse("bad shape".into())))
        .collect::<Result<_>>()?;
    if shape != grid.shape() {
        return Err(Error::Parse(format!(
            "recorded shape {shape:?} does not match the rebuilt grid {:?}",
            grid.shape()
        )));
    }
    let ncomp: usize = get("components")?
        .parse()
        .map_err(|_| Error::Parse("bad component count".into()))?;
    let mut components = vec![Vec::with_capacity(grid.len()); ncomp];
    let mut count = 0;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if count >= grid.len() {
            return Err(Error::Parse("more data rows than nodes".into()));
        }
        let mut parts = line.split_whitespace();
        let code = parts
            .next()
            .and_then(|t| t.chars().next())
            .and_then(Region::from_code)
            .ok_or_else(|| Error::Parse(format!("bad region code in row {count}")))?;
        if code != grid.region(count) {
            return Err(Error::Parse(format!("region mismatch at node {count}")));
        }
        for comp in components.iter_mut() {
            let tok = parts.next().ok_or_else(|| Error::Parse(format!("short row {count}")))?;
            comp.push(T::lit(tok.parse::<f64>().map_err(|_| Error::Parse(format!("bad value {tok:?}")))?));
        }
        count += 1;
    }
    if count != grid.len() {
        return Err(Error::Parse(format!("{count} data rows for {} nodes", grid.len())));
    }
    Ok(FieldDump {
        grid: Arc::new(grid),
        components,
    })
}
