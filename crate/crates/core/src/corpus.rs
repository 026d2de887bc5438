//! Builtin kernels and name/path resolution.

use std::path::{Path, PathBuf};

use crate::kernel::{parse_kernel, KernelError, Prdg};

pub const NAMES: [&str; 7] = ["heat1d-fig7", "heat1d", "heat2d", "heat3d", "triangle", "lud", "osp"];

const SOURCES: [(&str, &str); 7] = [
    ("heat1d-fig7", include_str!("../kernels/heat1d-fig7.kernel")),
    ("heat1d", include_str!("../kernels/heat1d.kernel")),
    ("heat2d", include_str!("../kernels/heat2d.kernel")),
    ("heat3d", include_str!("../kernels/heat3d.kernel")),
    ("triangle", include_str!("../kernels/triangle.kernel")),
    ("lud", include_str!("../kernels/lud.kernel")),
    ("osp", include_str!("../kernels/osp.kernel")),
];

/// Environment variable holding extra kernel directories, `:`-separated.
pub const SEARCH_PATH_VAR: &str = "PCOT_KERNEL_PATH";

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a builtin kernel by name.
pub fn load(name: &str) -> Result<Prdg, KernelError> {
    let text = source(name).ok_or_else(|| KernelError::Validation(format!("no builtin kernel `{name}`")))?;
    parse_kernel(text)
}

#[derive(Debug)]
pub enum Located {
    File(PathBuf, String),
    Builtin(&'static str),
}

/// Finds a kernel by explicit path, then in the search path, then among the
/// builtins. A trailing `.kernel` on a bare name is optional.
pub fn locate(spec: &str) -> std::io::Result<Located> {
    let direct = Path::new(spec);
    if direct.is_file() {
        return Ok(Located::File(direct.to_path_buf(), std::fs::read_to_string(direct)?));
    }
    let stem = spec.strip_suffix(".kernel").unwrap_or(spec);
    if let Some(dirs) = std::env::var_os(SEARCH_PATH_VAR) {
        for dir in std::env::split_paths(&dirs) {
            for cand in [dir.join(format!("{stem}.kernel")), dir.join(stem)] {
                if cand.is_file() {
                    let text = std::fs::read_to_string(&cand)?;
                    return Ok(Located::File(cand, text));
                }
            }
        }
    }
    if let Some(text) = source(stem) {
        return Ok(Located::Builtin(text));
    }
    Err(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("kernel `{spec}` not found (checked path, {SEARCH_PATH_VAR}, builtins)"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses() {
        for name in NAMES {
            let p = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(p.name, name);
        }
    }

    #[test]
    fn builtins_validate_at_several_sizes() {
        use crate::kernel::embed;
        use std::collections::BTreeMap;
        for name in NAMES {
            let p = embed(&load(name).unwrap());
            for n in [4, 5, 7] {
                let over: BTreeMap<String, i64> = p.params.iter().map(|q| (q.clone(), n)).collect();
                let vals = p.param_values(&over).unwrap();
                p.validate_sampled(&vals).unwrap_or_else(|e| panic!("{name} at {n}: {e}"));
            }
        }
    }

    #[test]
    fn locate_prefers_search_path() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mine.kernel"), source("triangle").unwrap()).unwrap();
        std::env::set_var(SEARCH_PATH_VAR, dir.path());
        assert!(matches!(locate("mine").unwrap(), Located::File(..)));
        assert!(matches!(locate("heat2d.kernel").unwrap(), Located::Builtin(_)));
        assert!(locate("nope").is_err());
    }
}
