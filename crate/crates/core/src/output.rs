//! Eulerian reconstruction of the Lagrangian solution and file output.
//!
//! # Time series
//!
//! CSV with one row per sample. For two components in 2D the header is
//! `t,N1,N2,N,E,Lz1,Lz2,Lz,sx,sy,sr`; in general there is one `Nj` and one
//! `Lzj` column per component and 3D runs add `sz` before `sr`. Numbers are
//! written in shortest round-trip exponent form, and an undefined `<L_z>_j`
//! (empty component) is written as `NaN`.
//!
//! # Grid dumps
//!
//! ```text
//! b"ROTBEC1\0"
//! u64 (little endian)  byte length of the metadata block
//! metadata             UTF-8 `key=value` lines: dim, domain, cells, t, omega, components
//! payload              per component, nodes in row-major order (last axis fastest),
//!                      each node as little-endian f64 re then im
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{BoxDomain, ComplexField, GridSpec, SinePlan, SpectralField};
use crate::observables::{DiagnosticsRecord, Widths};
use crate::rotating::{map_point, Direction};
use crate::state::CoupledState;

pub const DUMP_MAGIC: &[u8; 8] = b"ROTBEC1\0";

/// Values of the sine series at arbitrary points; points outside the closed
/// box give zero.
pub fn sine_series_evaluate(spectrum: &SpectralField, points: &[Vec<f64>]) -> Vec<Complex64> {
    let grid = spectrum.grid();
    let dim = grid.dim();
    let shape = grid.node_shape();
    let coeffs = spectrum.coefficients();
    let mut tables: Vec<Vec<f64>> = (0..3).map(|a| vec![0.0; shape[a]]).collect();
    tables[2][0] = 1.0;
    points
        .iter()
        .map(|point| {
            if !grid.domain().contains(point) {
                return Complex64::new(0.0, 0.0);
            }
            for (a, table) in tables.iter_mut().enumerate().take(dim) {
                let (lo, _) = grid.domain().bounds(a);
                for (p, v) in table.iter_mut().enumerate() {
                    *v = (grid.frequency(a, p) * (point[a] - lo)).sin();
                }
            }
            let (kz_lo, kz_hi) = if dim == 3 { (1, shape[2] - 1) } else { (0, 1) };
            let mut sum = Complex64::new(0.0, 0.0);
            for p in 1..shape[0] - 1 {
                let mut row = Complex64::new(0.0, 0.0);
                for q in 1..shape[1] - 1 {
                    let mut col = Complex64::new(0.0, 0.0);
                    for r in kz_lo..kz_hi {
                        col += coeffs[[p, q, r]] * tables[2][r];
                    }
                    row += col * tables[1][q];
                }
                sum += row * tables[0][p];
            }
            sum
        })
        .collect()
}

/// `psi_j(x, t) = phi_j(A(t)^T x)` at every node of `eulerian`.
pub fn eulerian_frame(
    state: &CoupledState,
    t: f64,
    omega: f64,
    eulerian: &GridSpec,
) -> Result<Vec<ComplexField>> {
    if eulerian.dim() != state.grid().dim() {
        return Err(Error::GridMismatch(format!(
            "Eulerian grid is {}-dimensional, state is {}-dimensional",
            eulerian.dim(),
            state.grid().dim()
        )));
    }
    let plan = SinePlan::new(state.grid());
    let shape = eulerian.node_shape();
    let points: Vec<Vec<f64>> = ndarray::indices(shape)
        .into_iter()
        .map(|(i, j, k)| {
            let x = eulerian.node_point([i, j, k]);
            map_point(&x, t, omega, Direction::ToLagrangian)
        })
        .collect();
    state
        .components()
        .iter()
        .map(|c| {
            let spectrum = plan.forward(c)?;
            let values = sine_series_evaluate(&spectrum, &points);
            let array = Array3::from_shape_vec(shape, values).expect("one value per node");
            ComplexField::from_values(eulerian, array)
        })
        .collect()
}

fn timeseries_header(components: usize, three_d: bool) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=components).map(|j| format!("N{j}")));
    cols.push("N".into());
    cols.push("E".into());
    cols.extend((1..=components).map(|j| format!("Lz{j}")));
    cols.push("Lz".into());
    cols.push("sx".into());
    cols.push("sy".into());
    if three_d {
        cols.push("sz".into());
    }
    cols.push("sr".into());
    cols.join(",")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the time series; an empty slice gives the two-component header only.
pub fn write_timeseries(records: &[DiagnosticsRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (m, three_d) = records
        .first()
        .map_or((2, false), |r| (r.masses.len(), r.widths.sigma_z.is_some()));
    let mut out = create(path)?;
    let mut text = timeseries_header(m, three_d);
    text.push('\n');
    for r in records {
        if r.masses.len() != m || r.lz.len() != m || r.widths.sigma_z.is_some() != three_d {
            return Err(Error::InvalidParameter(format!(
                "record at t = {} does not match the first record's layout",
                r.t
            )));
        }
        let mut row = vec![r.t];
        row.extend(&r.masses);
        row.push(r.total_mass);
        row.push(r.energy);
        row.extend(r.lz.iter().map(|l| l.unwrap_or(f64::NAN)));
        row.push(r.lz_total);
        row.push(r.widths.sigma_x);
        row.push(r.widths.sigma_y);
        row.extend(r.widths.sigma_z);
        row.push(r.widths.sigma_r);
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Parses a file produced by [`write_timeseries`].
pub fn read_timeseries(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(path, "missing header"))?
        .map_err(|e| Error::io(path, e))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let m = cols.iter().filter(|c| c.starts_with('N') && c.len() > 1).count();
    let three_d = cols.contains(&"sz");
    if header.trim() != timeseries_header(m, three_d) {
        return Err(Error::format(path, format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::format(path, format!("line {}: {e}", n + 2)))?;
        if values.len() != cols.len() {
            return Err(Error::format(
                path,
                format!("line {}: {} fields, expected {}", n + 2, values.len(), cols.len()),
            ));
        }
        let mut it = values.into_iter();
        let mut next = || it.next().expect("length checked");
        let t = next();
        let masses: Vec<f64> = (0..m).map(|_| next()).collect();
        let total_mass = next();
        let energy = next();
        let lz = (0..m)
            .map(|_| Some(next()).filter(|v| !v.is_nan()))
            .collect();
        let lz_total = next();
        let sigma_x = next();
        let sigma_y = next();
        let sigma_z = three_d.then(&mut next);
        let sigma_r = next();
        records.push(DiagnosticsRecord {
            t,
            masses,
            total_mass,
            energy,
            lz,
            lz_total,
            widths: Widths {
                sigma_x,
                sigma_y,
                sigma_z,
                sigma_r,
            },
        });
    }
    Ok(records)
}

/// Header fields of a grid dump besides the grid itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpMetadata {
    pub t: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub metadata: DumpMetadata,
    pub grid: GridSpec,
    pub components: Vec<ComplexField>,
}

fn metadata_text(grid: &GridSpec, meta: &DumpMetadata, components: usize) -> String {
    let dim = grid.dim();
    let domain: Vec<String> = (0..dim)
        .flat_map(|a| {
            let (lo, hi) = grid.domain().bounds(a);
            [format!("{lo:e}"), format!("{hi:e}")]
        })
        .collect();
    let cells: Vec<String> = (0..dim).map(|a| grid.cells(a).to_string()).collect();
    format!(
        "dim={dim}\ndomain={}\ncells={}\nt={:e}\nomega={:e}\ncomponents={components}\n",
        domain.join(","),
        cells.join(","),
        meta.t,
        meta.omega
    )
}

/// Writes one or more fields on a common grid.
pub fn write_grid_dump(
    fields: &[ComplexField],
    metadata: &DumpMetadata,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let grid = fields
        .first()
        .ok_or_else(|| Error::InvalidParameter("grid dump needs at least one field".into()))?
        .grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch("dumped fields live on different grids".into()));
    }
    let text = metadata_text(grid, metadata, fields.len());
    let mut bytes = Vec::with_capacity(16 + text.len() + 16 * grid.node_count() * fields.len());
    bytes.extend_from_slice(DUMP_MAGIC);
    bytes.extend_from_slice(&(text.len() as u64).to_le_bytes());
    bytes.extend_from_slice(text.as_bytes());
    for f in fields {
        for v in f.values().iter() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    let mut out = create(path)?;
    out.write_all(&bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn parse_list<T: std::str::FromStr>(path: &Path, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::format(path, format!("bad value {v:?} for {key}")))
        })
        .collect()
}

/// Inverse of [`write_grid_dump`].
pub fn read_grid_dump(path: impl AsRef<Path>) -> Result<GridDump> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 16 || &bytes[..8] != DUMP_MAGIC {
        return Err(Error::format(path, "missing ROTBEC1 magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let end = 16usize
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::format(path, "metadata block runs past end of file"))?;
    let text = std::str::from_utf8(&bytes[16..end])
        .map_err(|_| Error::format(path, "metadata is not UTF-8"))?;

    let mut dim = None;
    let mut domain = None;
    let mut cells = None;
    let mut t = None;
    let mut omega = None;
    let mut components = None;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, format!("metadata line {line:?} has no '='")))?;
        let value = value.trim();
        match key.trim() {
            "dim" => dim = Some(parse_list::<usize>(path, key, value)?[0]),
            "domain" => domain = Some(parse_list::<f64>(path, key, value)?),
            "cells" => cells = Some(parse_list::<usize>(path, key, value)?),
            "t" => t = Some(parse_list::<f64>(path, key, value)?[0]),
            "omega" => omega = Some(parse_list::<f64>(path, key, value)?[0]),
            "components" => components = Some(parse_list::<usize>(path, key, value)?[0]),
            other => return Err(Error::format(path, format!("unknown metadata key {other:?}"))),
        }
    }
    let missing = |k: &str| Error::format(path, format!("metadata lacks {k}"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let domain = domain.ok_or_else(|| missing("domain"))?;
    let cells = cells.ok_or_else(|| missing("cells"))?;
    let components = components.ok_or_else(|| missing("components"))?;
    let metadata = DumpMetadata {
        t: t.ok_or_else(|| missing("t"))?,
        omega: omega.ok_or_else(|| missing("omega"))?,
    };
    if domain.len() != 2 * dim || cells.len() != dim {
        return Err(Error::format(path, "domain/cells do not match dim"));
    }
    let bounds: Vec<(f64, f64)> = domain.chunks(2).map(|c| (c[0], c[1])).collect();
    let grid = BoxDomain::new(&bounds)
        .and_then(|d| GridSpec::new(d, &cells))
        .map_err(|e| Error::format(path, e.to_string()))?;

    let nodes = grid.node_count();
    let payload = &bytes[end..];
    if payload.len() != components * nodes * 16 {
        return Err(Error::format(
            path,
            format!(
                "payload has {} bytes, metadata implies {} ({components} x {nodes} nodes)",
                payload.len(),
                components * nodes * 16
            ),
        ));
    }
    let read = |i: usize| f64::from_le_bytes(payload[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let components = (0..components)
        .map(|c| {
            let values: Vec<Complex64> = (0..nodes)
                .map(|n| {
                    let i = 2 * (c * nodes + n);
                    Complex64::new(read(i), read(i + 1))
                })
                .collect();
            let array = Array3::from_shape_vec(grid.node_shape(), values).expect("sized above");
            ComplexField::from_values(&grid, array)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridDump {
        metadata,
        grid,
        components,
    })
}
