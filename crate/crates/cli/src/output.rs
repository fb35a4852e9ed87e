use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Where a command writes: `--out` wins, then the output directory with the
/// command's default file name, then stdout. `--out -` also means stdout.
pub fn destination(out: Option<&Path>, out_dir: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match (out, out_dir) {
        (Some(p), _) if p == Path::new("-") => None,
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(dir)) => Some(dir.join(default_name)),
        (None, None) => None,
    }
}

pub fn open(dest: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match dest {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Edge list: one `u v` or `u-v` per line; `#` starts a comment.
pub fn read_edges(path: &Path) -> anyhow::Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let e: starclip_core::Edge = line
            .parse()
            .with_context(|| format!("{}:{}: expected an edge, got {line:?}", path.display(), i + 1))?;
        out.push((e.u, e.v));
    }
    Ok(out)
}
