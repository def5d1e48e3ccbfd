//! Plain-text predictor files.
//!
//! ```text
//! sdnoise-predictor 1
//! arch mlp
//! d 30
//! decision flipped
//! params 13301
//! <one parameter per line>
//! ```
//!
//! Parameters are listed layer by layer, each weight matrix row-major with
//! one row per input unit (`fan_in x fan_out`), followed by its bias vector.
//! The linear model is its `d` weights then the bias. Values use the
//! shortest representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sdnoise_core::{Arch, Predictor, Sign};

use crate::error::{Error, Result};

const MAGIC: &str = "sdnoise-predictor 1";

/// How a score becomes a class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Sign,
    /// Negated sign, for weighted training with a negative scale.
    Flipped,
}

impl Decision {
    pub fn from_flip(flip: bool) -> Self {
        if flip {
            Decision::Flipped
        } else {
            Decision::Sign
        }
    }

    pub fn label(self, score: f64) -> Sign {
        match self {
            Decision::Sign => Sign::of_score(score),
            Decision::Flipped => Sign::of_score(score).flipped(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SavedModel {
    pub predictor: Predictor,
    pub decision: Decision,
}

pub fn arch_name(arch: Arch) -> &'static str {
    match arch {
        Arch::Linear => "linear",
        Arch::Mlp => "mlp",
    }
}

pub fn to_text(model: &SavedModel) -> String {
    let p = &model.predictor;
    let mut s = String::new();
    let decision = match model.decision {
        Decision::Sign => "sign",
        Decision::Flipped => "flipped",
    };
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "arch {}", arch_name(p.arch()));
    let _ = writeln!(s, "d {}", p.d());
    let _ = writeln!(s, "decision {decision}");
    let _ = writeln!(s, "params {}", p.params().len());
    for v in p.params() {
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn from_text(text: &str, origin: &Path) -> Result<SavedModel> {
    let bad = |line: usize, message: &str| Error::Parse {
        path: origin.to_path_buf(),
        line: line as u64,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, &format!("missing {what}")));
    let (n, magic) = next("header")?;
    if magic != MAGIC {
        return Err(bad(n, "not a predictor file"));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, l) = next(key)?;
        l.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(|v| (n, v.to_string()))
            .ok_or_else(|| bad(n, &format!("expected `{key} <value>`")))
    };
    let (n, arch) = field("arch")?;
    let arch = match arch.as_str() {
        "linear" => Arch::Linear,
        "mlp" => Arch::Mlp,
        _ => return Err(bad(n, "unknown architecture")),
    };
    let (n, d) = field("d")?;
    let d: usize = d.parse().map_err(|_| bad(n, "bad dimension"))?;
    let (n, decision) = field("decision")?;
    let decision = match decision.as_str() {
        "sign" => Decision::Sign,
        "flipped" => Decision::Flipped,
        _ => return Err(bad(n, "unknown decision rule")),
    };
    let (n, count) = field("params")?;
    let count: usize = count.parse().map_err(|_| bad(n, "bad parameter count"))?;
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = next("parameter")?;
        params.push(l.parse::<f64>().map_err(|_| bad(n, "bad parameter value"))?);
    }
    let predictor = Predictor::from_params(arch, d, params)?;
    Ok(SavedModel { predictor, decision })
}

pub fn save(model: &SavedModel, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<SavedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text, path)
}
