//! File formats: ASCII PLY clouds, OBJ/STL meshes.

mod mesh;
mod ply;

pub use mesh::{load_mesh, obj_string, parse_obj, parse_stl, read_obj, read_stl, write_obj};
pub use ply::{parse_ply, read_ply, write_ply, ply_string};

use std::path::Path;

use crate::error::{Error, Result};

/// Writes `contents` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
