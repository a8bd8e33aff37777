//! Raw binary field format.
//!
//! Little-endian layout:
//!
//! ```text
//! offset  size  content
//!      0     4  magic "CMFF"
//!      4     2  format version (u16, currently 1)
//!      6     1  field kind: 0 spatial scalar, 1 cyclic scalar, 2 flow
//!      7     1  element type: 0 = f64 little-endian
//!      8     1  number of spatial axes (1..=3)
//!      9     3  reserved, zero
//!     12     4  n_theta (u32)
//!     16   8*A  spatial dims (u64 each)
//!      .     .  payload: f64 values in the in-memory layout
//! ```
//!
//! Payload lengths: `prod(dims)` for spatial scalars, `prod(dims) * n_theta`
//! for cyclic scalars (theta fastest), `prod(dims) * n_theta * (A + 1)` for
//! flows (component tuple interleaved per node, spatial axes then theta).
//! Writing and reading are bit-exact round trips for finite values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use cyclic_maxflow::{CyclicScalarField, CylinderGrid, FlowField, SpatialScalarField};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"CMFF";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("truncated field file: needed {expected} bytes at offset {offset}, found {found}")]
    Truncated {
        offset: u64,
        expected: usize,
        found: usize,
    },
    #[error("bad magic at offset 0: expected {MAGIC:?}, got {got:?}")]
    BadMagic { got: [u8; 4] },
    #[error("unsupported format version {version} at offset 4")]
    Version { version: u16 },
    #[error("unknown field kind {kind} at offset 6")]
    Kind { kind: u8 },
    #[error("unknown element type {element} at offset 7")]
    Element { element: u8 },
    #[error("invalid grid in header: {0}")]
    Grid(cyclic_maxflow::Error),
    #[error("invalid payload: {0}")]
    Payload(cyclic_maxflow::Error),
    #[error("expected a {expected} field, found {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
}

/// Any of the three field types the format can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Spatial(SpatialScalarField),
    Cyclic(CyclicScalarField),
    Flow(FlowField),
}

impl AnyField {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyField::Spatial(_) => "spatial scalar",
            AnyField::Cyclic(_) => "cyclic scalar",
            AnyField::Flow(_) => "flow",
        }
    }

    pub fn grid(&self) -> &CylinderGrid {
        match self {
            AnyField::Spatial(f) => f.grid(),
            AnyField::Cyclic(f) => f.grid(),
            AnyField::Flow(f) => f.grid(),
        }
    }
}

fn kind_code(field: &AnyField) -> u8 {
    match field {
        AnyField::Spatial(_) => 0,
        AnyField::Cyclic(_) => 1,
        AnyField::Flow(_) => 2,
    }
}

fn write_header<W: Write>(w: &mut W, grid: &CylinderGrid, kind: u8) -> std::io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind, 0u8, grid.num_spatial_axes() as u8, 0, 0, 0])?;
    w.write_all(&(grid.n_theta() as u32).to_le_bytes())?;
    for &d in grid.spatial_dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    Ok(())
}

fn write_values<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for &v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_field(path: &Path, field: &AnyField) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, field.grid(), kind_code(field))?;
    match field {
        AnyField::Spatial(f) => write_values(&mut w, f.values())?,
        AnyField::Cyclic(f) => write_values(&mut w, f.values())?,
        AnyField::Flow(f) => write_values(&mut w, f.components())?,
    }
    w.flush()?;
    Ok(())
}

pub fn write_spatial(path: &Path, field: &SpatialScalarField) -> Result<(), FormatError> {
    write_field(path, &AnyField::Spatial(field.clone()))
}

pub fn write_cyclic(path: &Path, field: &CyclicScalarField) -> Result<(), FormatError> {
    write_field(path, &AnyField::Cyclic(field.clone()))
}

pub fn write_flow(path: &Path, field: &FlowField) -> Result<(), FormatError> {
    write_field(path, &AnyField::Flow(field.clone()))
}

struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn read_exact(&mut self, buf: &mut [u8]) -> Result<(), FormatError> {
        let start = self.offset;
        let mut filled = 0;
        while filled < buf.len() {
            let n = self.inner.read(&mut buf[filled..])?;
            if n == 0 {
                return Err(FormatError::Truncated {
                    offset: start,
                    expected: buf.len(),
                    found: filled,
                });
            }
            filled += n;
            self.offset += n as u64;
        }
        Ok(())
    }

    fn read_u16(&mut self) -> Result<u16, FormatError> {
        let mut b = [0u8; 2];
        self.read_exact(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }

    fn read_u32(&mut self) -> Result<u32, FormatError> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_u64(&mut self) -> Result<u64, FormatError> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn read_values(&mut self, count: usize) -> Result<Vec<f64>, FormatError> {
        let mut values = vec![0.0f64; count];
        let mut b = [0u8; 8];
        for v in values.iter_mut() {
            self.read_exact(&mut b)?;
            *v = f64::from_le_bytes(b);
        }
        Ok(values)
    }
}

/// Reads any field file; the header decides which variant comes back.
pub fn read_field(path: &Path) -> Result<AnyField, FormatError> {
    let mut c = Cursor {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };

    let mut magic = [0u8; 4];
    c.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic { got: magic });
    }
    let version = c.read_u16()?;
    if version != VERSION {
        return Err(FormatError::Version { version });
    }
    let mut rest = [0u8; 6];
    c.read_exact(&mut rest)?;
    let kind = rest[0];
    let element = rest[1];
    let num_axes = rest[2] as usize;
    if element != 0 {
        return Err(FormatError::Element { element });
    }
    let n_theta = c.read_u32()? as usize;
    let mut dims = Vec::with_capacity(num_axes);
    for _ in 0..num_axes {
        dims.push(c.read_u64()? as usize);
    }
    let grid = CylinderGrid::new(&dims, n_theta).map_err(FormatError::Grid)?;

    match kind {
        0 => {
            let values = c.read_values(grid.num_voxels())?;
            let f = SpatialScalarField::from_values(&grid, values).map_err(FormatError::Payload)?;
            Ok(AnyField::Spatial(f))
        }
        1 => {
            let values = c.read_values(grid.num_nodes())?;
            let f = CyclicScalarField::from_values(&grid, values).map_err(FormatError::Payload)?;
            Ok(AnyField::Cyclic(f))
        }
        2 => {
            let values = c.read_values(grid.num_nodes() * grid.num_flow_axes())?;
            let f = FlowField::from_components(&grid, values).map_err(FormatError::Payload)?;
            Ok(AnyField::Flow(f))
        }
        other => Err(FormatError::Kind { kind: other }),
    }
}

pub fn read_spatial(path: &Path) -> Result<SpatialScalarField, FormatError> {
    match read_field(path)? {
        AnyField::Spatial(f) => Ok(f),
        other => Err(FormatError::WrongKind {
            expected: "spatial scalar",
            found: other.kind_name(),
        }),
    }
}

pub fn read_cyclic(path: &Path) -> Result<CyclicScalarField, FormatError> {
    match read_field(path)? {
        AnyField::Cyclic(f) => Ok(f),
        other => Err(FormatError::WrongKind {
            expected: "cyclic scalar",
            found: other.kind_name(),
        }),
    }
}

/// True if the file starts with the field-format magic (used to tell raw
/// fields apart from images when both are accepted).
pub fn has_field_magic(path: &Path) -> bool {
    let mut buf = [0u8; 4];
    match File::open(path).and_then(|mut f| f.read_exact(&mut buf)) {
        Ok(()) => buf == MAGIC,
        Err(_) => false,
    }
}
