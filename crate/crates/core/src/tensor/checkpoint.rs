//! Text checkpoint format for named parameter tensors.
//!
//! ```text
//! heartnet-checkpoint 1
//! entries <n>
//! tensor <name> <ndim> <dim0> <dim1> ...
//! <values, row-major, space separated>
//! ...
//! end
//! ```
//!
//! Values are written with `{:e}`, the shortest representation that parses
//! back to the identical `f64`, so save/load is bit-exact. Names must be
//! non-empty, unique and free of whitespace. Zero-sized tensors have an empty
//! value line.

use std::path::Path;

use super::Tensor;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "heartnet-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub entries: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Format(format!("invalid tensor name `{name}`")));
        }
        if self.get(&name).is_some() {
            return Err(Error::Format(format!("duplicate tensor name `{name}`")));
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn take(&self, name: &str) -> Result<Tensor> {
        self.get(name)
            .cloned()
            .ok_or_else(|| Error::Format(format!("checkpoint has no tensor `{name}`")))
    }

    pub fn render(&self) -> String {
        let mut out = format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\nentries {}\n", self.entries.len());
        for (name, t) in &self.entries {
            out.push_str(&format!("tensor {name} {}", t.ndim()));
            for d in t.shape() {
                out.push_str(&format!(" {d}"));
            }
            out.push('\n');
            let vals: Vec<String> = t.data().iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("checkpoint truncated before {what}")))
        };
        let head = next("header")?;
        let version = head
            .strip_prefix(CHECKPOINT_MAGIC)
            .map(str::trim)
            .ok_or_else(|| Error::Format("not a heartnet checkpoint".into()))?;
        if version != CHECKPOINT_VERSION.to_string() {
            return Err(Error::Format(format!("unsupported checkpoint version `{version}`")));
        }
        let count: usize = next("entry count")?
            .strip_prefix("entries ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format("bad entry count line".into()))?;
        let mut ckpt = Checkpoint::new();
        for _ in 0..count {
            let desc = next("tensor descriptor")?;
            let parts: Vec<&str> = desc.split_whitespace().collect();
            if parts.len() < 3 || parts[0] != "tensor" {
                return Err(Error::Format(format!("bad tensor descriptor `{desc}`")));
            }
            let ndim: usize = parts[2]
                .parse()
                .map_err(|_| Error::Format(format!("bad ndim in `{desc}`")))?;
            if parts.len() != 3 + ndim {
                return Err(Error::Format(format!("dimension count mismatch in `{desc}`")));
            }
            let shape = parts[3..]
                .iter()
                .map(|d| d.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Format(format!("bad dimension in `{desc}`")))?;
            let values = next("tensor values")?
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Format(format!("bad value for tensor `{}`", parts[1])))?;
            ckpt.push(parts[1], Tensor::new(shape, values)?)?;
        }
        if next("end marker")?.trim() != "end" {
            return Err(Error::Format("missing end marker".into()));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
