use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rqaoa_core::{ising, IsingModel};

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Edge-list file (`i j [w]` per line), or a `.json` model file.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Unit-weight complete graph on M vertices.
    #[arg(long, value_name = "M")]
    pub complete: Option<usize>,
}

/// A loaded instance with what is known about it in closed form.
pub struct Instance {
    pub model: IsingModel,
    /// `Some(n)` for `K_2n`.
    pub half: Option<usize>,
    /// Closed-form optimum when the graph is complete.
    pub known_optimum: Option<f64>,
}

impl GraphSource {
    pub fn load(&self) -> Result<Instance> {
        if let Some(m) = self.complete {
            if m < 2 {
                bail!("--complete needs at least 2 vertices, got {m}");
            }
            let model = IsingModel::complete(m)?;
            let optimum = ((m / 2) * (m - m / 2)) as f64;
            return Ok(Instance {
                model,
                half: (m % 2 == 0).then_some(m / 2),
                known_optimum: Some(optimum),
            });
        }
        let path = self.graph.as_deref().expect("clap enforces one source");
        Ok(Instance {
            model: read_model(path)?,
            half: None,
            known_optimum: None,
        })
    }
}

pub fn read_model(path: &Path) -> Result<IsingModel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let model = if is_json {
        ising::from_json(&text)
    } else {
        ising::parse_edge_list(&text)
    };
    model.with_context(|| format!("cannot parse {}", path.display()))
}

impl Instance {
    /// Exact optimum: closed form if known, else brute force within `cap`.
    pub fn optimum(&self, cap: usize) -> Option<f64> {
        self.known_optimum.or_else(|| {
            (self.model.vertex_count() <= cap)
                .then(|| self.model.brute_force_max().ok().map(|(_, v)| v))
                .flatten()
        })
    }

    pub fn bound(&self) -> Option<f64> {
        self.half.map(|n| 1.0 - 1.0 / (8.0 * (n * n) as f64))
    }
}
