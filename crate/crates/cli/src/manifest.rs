use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use otcic::io;

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputFile {
    pub fn hash(path: &Path) -> std::io::Result<Self> {
        let data = std::fs::read(path)?;
        Ok(Self {
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: format!("{:x}", Sha256::digest(&data)),
        })
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    threads: Option<usize>,
    config: &'a C,
    inputs: &'a [InputFile],
    outputs: &'a [String],
}

/// Collects outputs for one run, written atomically, then the manifest.
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> otcic::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> otcic::Result<()> {
        io::write_json(&self.dir.join(name), value)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, name: &str, table: &io::Table) -> otcic::Result<()> {
        io::write_table(&self.dir.join(name), table)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn finish<C: Serialize>(
        self,
        command: &str,
        threads: Option<usize>,
        config: &C,
        inputs: &[InputFile],
    ) -> otcic::Result<()> {
        let m = Manifest {
            tool: "otcic",
            version: env!("CARGO_PKG_VERSION"),
            command,
            threads,
            config,
            inputs,
            outputs: &self.written,
        };
        io::write_json(&self.dir.join("manifest.json"), &m)
    }
}
