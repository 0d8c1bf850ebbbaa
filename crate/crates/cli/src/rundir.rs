use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use asyncswap::pipeline::VERSION;

pub const LOCK_NAME: &str = ".asyncswap.lock";

/// Exclusive ownership of an output directory for the life of the value.
pub struct RunDir {
    path: PathBuf,
    lock: PathBuf,
    /// `# asyncswap <version> config <digest>` line put on every text file.
    stamp: String,
}

impl RunDir {
    pub fn open(path: &Path, config_digest: &str) -> io::Result<Self> {
        fs::create_dir_all(path)?;
        let lock = path.join(LOCK_NAME);
        let mut f = OpenOptions::new().write(true).create_new(true).open(&lock).map_err(|e| {
            if e.kind() == io::ErrorKind::AlreadyExists {
                io::Error::new(e.kind(), format!("{} is locked by another run ({})", path.display(), lock.display()))
            } else {
                e
            }
        })?;
        writeln!(f, "pid = {}", std::process::id())?;
        Ok(Self {
            path: path.to_path_buf(),
            lock,
            stamp: format!("# asyncswap {VERSION} config {config_digest}\n"),
        })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Writes `body` behind the provenance line, via a temporary file.
    pub fn write_text(&self, name: &str, body: &str) -> io::Result<PathBuf> {
        let dest = self.file(name);
        let tmp = self.file(&format!(".{name}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(self.stamp.as_bytes())?;
            f.write_all(body.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &dest)?;
        Ok(dest)
    }

    pub fn write_with<F>(&self, name: &str, write: F) -> io::Result<PathBuf>
    where
        F: FnOnce(&mut File) -> io::Result<()>,
    {
        let dest = self.file(name);
        let tmp = self.file(&format!(".{name}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            write(&mut f)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &dest)?;
        Ok(dest)
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
