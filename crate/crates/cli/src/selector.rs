//! Problem selectors of the form `name[:key=value,...]`.
//!
//! | name        | keys                                              |
//! |-------------|---------------------------------------------------|
//! | `quadratic` | `d` (default 10)                                  |
//! | `norm`      | `d` (default 10)                                  |
//! | `logistic`  | `data` (CSV path; default the shipped digits)     |
//! | `sigmoid`   | `data` (binary CSV; default odd/even digits)      |
//! | `attack`    | `model`, `images`, `c` (1), `kappa` (0), `radius` (1) |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use zovr_core::problems::builtin;
use zovr_core::problems::{
    load_dataset_csv, load_model_csv, make_logistic, make_norm, make_quadratic, make_sigmoid_least_squares,
    make_universal_attack,
};
use zovr_core::BlackBoxProblem;

use crate::error::{CliError, CliResult};

pub type SharedProblem = Arc<dyn BlackBoxProblem>;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Quadratic {
        d: usize,
    },
    Norm {
        d: usize,
    },
    Logistic {
        data: Option<PathBuf>,
    },
    Sigmoid {
        data: Option<PathBuf>,
    },
    Attack {
        model: Option<PathBuf>,
        images: Option<PathBuf>,
        c: f64,
        kappa: f64,
        radius: f64,
    },
}

struct Params<'a> {
    name: &'a str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn parse(name: &'a str, raw: &'a str, allowed: &[&str]) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        for pair in raw.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("problem parameter `{pair}` is not `key=value`")))?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(CliError::usage(format!(
                    "`{name}` takes {}; got `{k}`",
                    if allowed.is_empty() {
                        "no parameters".to_string()
                    } else {
                        allowed.join(", ")
                    }
                )));
            }
            map.insert(k, v.trim());
        }
        Ok(Params { name, map })
    }

    fn num<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::usage(format!("`{}`: invalid {key} `{v}`", self.name))),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.map.get(key).map(PathBuf::from)
    }
}

impl FromStr for ProblemSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim();
        let spec = match name {
            "quadratic" | "norm" => {
                let p = Params::parse(name, rest, &["d"])?;
                let d = p.num("d", 10usize)?;
                if d == 0 {
                    return Err(CliError::usage("dimension d must be at least 1"));
                }
                if name == "quadratic" {
                    ProblemSpec::Quadratic { d }
                } else {
                    ProblemSpec::Norm { d }
                }
            }
            "logistic" => ProblemSpec::Logistic {
                data: Params::parse(name, rest, &["data"])?.path("data"),
            },
            "sigmoid" => ProblemSpec::Sigmoid {
                data: Params::parse(name, rest, &["data"])?.path("data"),
            },
            "attack" => {
                let p = Params::parse(name, rest, &["model", "images", "c", "kappa", "radius"])?;
                ProblemSpec::Attack {
                    model: p.path("model"),
                    images: p.path("images"),
                    c: p.num("c", 1.0)?,
                    kappa: p.num("kappa", 0.0)?,
                    radius: p.num("radius", 1.0)?,
                }
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown problem `{other}` (expected quadratic, norm, logistic, sigmoid or attack)"
                )))
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("builtin".to_string(), |p| p.display().to_string());
        match self {
            ProblemSpec::Quadratic { d } => write!(f, "quadratic:d={d}"),
            ProblemSpec::Norm { d } => write!(f, "norm:d={d}"),
            ProblemSpec::Logistic { data } => write!(f, "logistic:data={}", path(data)),
            ProblemSpec::Sigmoid { data } => write!(f, "sigmoid:data={}", path(data)),
            ProblemSpec::Attack {
                model,
                images,
                c,
                kappa,
                radius,
            } => write!(
                f,
                "attack:model={},images={},c={c},kappa={kappa},radius={radius}",
                path(model),
                path(images)
            ),
        }
    }
}

fn with_path<T>(path: &Path, r: zovr_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

impl ProblemSpec {
    pub fn build(&self) -> CliResult<SharedProblem> {
        let problem: SharedProblem = match self {
            ProblemSpec::Quadratic { d } => Arc::new(make_quadratic(*d, None)?),
            ProblemSpec::Norm { d } => Arc::new(make_norm(*d)?),
            ProblemSpec::Logistic { data } => {
                let ds = match data {
                    Some(p) => with_path(p, load_dataset_csv(p))?,
                    None => builtin::digits(),
                };
                Arc::new(make_logistic(ds)?)
            }
            ProblemSpec::Sigmoid { data } => {
                let ds = match data {
                    Some(p) => with_path(p, load_dataset_csv(p))?,
                    None => builtin::digits_binary(),
                };
                Arc::new(make_sigmoid_least_squares(ds)?)
            }
            ProblemSpec::Attack {
                model,
                images,
                c,
                kappa,
                radius,
            } => {
                let model = match model {
                    Some(p) => with_path(p, load_model_csv(p))?,
                    None => builtin::attack_model(),
                };
                let images = match images {
                    Some(p) => with_path(p, load_dataset_csv(p))?,
                    None => builtin::attack_images(),
                };
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(CliError::usage(format!("attack radius must be positive, got {radius}")));
                }
                Arc::new(make_universal_attack(model, images, *c, *kappa)?.with_box_radius(*radius))
            }
        };
        Ok(problem)
    }
}
