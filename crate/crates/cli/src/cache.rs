use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mhl_core::f2linalg::Subspace;
use mhl_core::Result;

/// Hit subspaces on disk, one file per `(n, d[, a])`.
pub struct SubspaceCache {
    dir: PathBuf,
}

impl SubspaceCache {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
        }
    }

    pub fn path(&self, n: usize, d: usize, component: Option<usize>) -> PathBuf {
        let name = match component {
            Some(a) => format!("hit_n{n}_d{d}_a{a}.f2s"),
            None => format!("hit_n{n}_d{d}.f2s"),
        };
        self.dir.join(name)
    }

    /// A cached subspace over `ncols` columns, or `None` if absent or unusable.
    pub fn load(
        &self,
        n: usize,
        d: usize,
        component: Option<usize>,
        ncols: usize,
    ) -> Option<Subspace> {
        let path = self.path(n, d, component);
        let file = fs::File::open(&path).ok()?;
        match Subspace::read_cache(BufReader::new(file)) {
            Ok(s) if s.ncols() == ncols => Some(s),
            Ok(s) => {
                eprintln!(
                    "warning: ignoring {}: {} columns, expected {ncols}",
                    path.display(),
                    s.ncols()
                );
                None
            }
            Err(e) => {
                eprintln!("warning: ignoring {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store(&self, n: usize, d: usize, component: Option<usize>, s: &Subspace) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(n, d, component);
        let tmp = path.with_extension("f2s.tmp");
        {
            let mut out = BufWriter::new(fs::File::create(&tmp)?);
            s.write_cache(&mut out)?;
            out.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
