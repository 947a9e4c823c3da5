//! Flat key=value experiment configuration: parsing, defaulting, and
//! cross-field validation that reports every violation at once.

use fracheat_core::correlation::{CorrelationKernel, CorrelationVariant};
use fracheat_core::field_sim::{Domain, InitialData, NoiseKind, SigmaSpec, SimConfig};
use fracheat_core::lattice::{Lattice, ScalarField};
use fracheat_core::StableKernelSpec;
use serde::Serialize;
use std::collections::BTreeMap;

/// Keys understood by the simulate/moments configs. Anything else in the
/// file is an error by name.
const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "dim",
    "kernel",
    "beta",
    "ou_exponent",
    "sigma_form",
    "gamma",
    "lambda",
    "kappa",
    "u0",
    "u0_radius",
    "u0_file",
    "L",
    "n",
    "dt",
    "t_end",
    "trunc_N",
    "paths",
    "seed",
    "domain",
    "radius",
    "snapshot_times",
    "probes",
    "probe_pairs",
    "experiment",
    "kappas",
    "horizons",
    "threshold",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ExperimentKind {
    Moments,
    KappaSweep,
    HorizonSweep,
    Dirichlet,
}

/// Parsed and validated experiment configuration.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub paths: u64,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
    pub probes: Vec<Vec<f64>>,
    pub probe_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub experiment: ExperimentKind,
    pub kappas: Vec<f64>,
    pub horizons: Vec<f64>,
    pub threshold: f64,
    /// Raw key=value pairs after defaulting, echoed into every manifest.
    pub echo: BTreeMap<String, String>,
}

/// Parse and validate a config file body. Returns either the config or the
/// full list of violations (unknown keys, parse failures, constraint
/// breaches), never just the first.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, Vec<String>> {
    let mut violations = Vec::new();
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {}: expected key=value, got '{line}'", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            violations.push(format!("unknown key '{key}'"));
            continue;
        }
        if raw.insert(key.clone(), value).is_some() {
            violations.push(format!("duplicate key '{key}'"));
        }
    }

    let mut get_f64 = |key: &str, default: Option<f64>| -> Option<f64> {
        match raw.get(key) {
            Some(v) => match v.parse::<f64>() {
                Ok(x) => Some(x),
                Err(_) => {
                    violations.push(format!("key '{key}': not a number: '{v}'"));
                    None
                }
            },
            None => default,
        }
    };

    let alpha = get_f64("alpha", Some(1.5));
    let dim_f = get_f64("dim", Some(1.0));
    let beta = get_f64("beta", None);
    let ou_exponent = get_f64("ou_exponent", Some(1.0));
    let gamma = get_f64("gamma", Some(1.0));
    let lambda = get_f64("lambda", Some(1.0));
    let kappa = get_f64("kappa", None);
    let u0_radius = get_f64("u0_radius", Some(1.0));
    let half_width = get_f64("L", Some(8.0));
    let n_f = get_f64("n", Some(512.0));
    let dt = get_f64("dt", Some(1e-3));
    let t_end = get_f64("t_end", Some(1.0));
    let trunc = get_f64("trunc_N", None);
    let paths_f = get_f64("paths", Some(1000.0));
    let seed_f = get_f64("seed", Some(1.0));
    let radius = get_f64("radius", None);
    let threshold = get_f64("threshold", Some(0.5)).unwrap_or(0.5);

    let kernel_name = raw.get("kernel").cloned().unwrap_or_else(|| "white".to_string());
    let sigma_form = raw.get("sigma_form").cloned().unwrap_or_else(|| "power".to_string());
    let u0_kind = raw.get("u0").cloned().unwrap_or_else(|| "constant".to_string());
    let domain_name = raw.get("domain").cloned().unwrap_or_else(|| "free".to_string());
    let experiment_name = raw.get("experiment").cloned().unwrap_or_else(|| "moments".to_string());

    let dim = match dim_f {
        Some(d) if d == d.trunc() && (1.0..=3.0).contains(&d) => d as usize,
        Some(d) => {
            violations.push(format!("dim must be an integer in 1..=3, got {d}"));
            1
        }
        None => 1,
    };
    let alpha = alpha.unwrap_or(1.5);
    if !(alpha > 0.0 && alpha <= 2.0) {
        violations.push(format!("alpha must be in (0, 2], got {alpha}"));
    }

    // noise kernel
    let noise = match kernel_name.as_str() {
        "white" => {
            if dim != 1 || !(alpha > 1.0 && alpha < 2.0) {
                violations.push("white noise requires d=1, 1<alpha<2".to_string());
            }
            NoiseKind::White
        }
        "riesz" => match beta {
            Some(b) if b > 0.0 && b < dim as f64 => {
                match CorrelationKernel::new(CorrelationVariant::Riesz { beta: b }, dim) {
                    Ok(k) => NoiseKind::Colored(k),
                    Err(e) => {
                        violations.push(e.to_string());
                        NoiseKind::White
                    }
                }
            }
            Some(b) => {
                violations.push(format!("beta < d required (and beta > 0), got beta={b}, d={dim}"));
                NoiseKind::White
            }
            None => {
                violations.push("riesz kernel requires the 'beta' key".to_string());
                NoiseKind::White
            }
        },
        "ou" => {
            let e = ou_exponent.unwrap_or(1.0);
            match CorrelationKernel::new(CorrelationVariant::OrnsteinUhlenbeck { exponent: e }, dim)
            {
                Ok(k) => NoiseKind::Colored(k),
                Err(err) => {
                    violations.push(err.to_string());
                    NoiseKind::White
                }
            }
        }
        "poisson" => NoiseKind::Colored(
            CorrelationKernel::new(CorrelationVariant::Poisson, dim).expect("valid"),
        ),
        "cauchy" => NoiseKind::Colored(
            CorrelationKernel::new(CorrelationVariant::Cauchy, dim).expect("valid"),
        ),
        "expo" => {
            violations.push(
                "the exponential-type kernel admits no stationary sampling; \
                 it is limited to verify-correlation"
                    .to_string(),
            );
            NoiseKind::White
        }
        other => {
            violations.push(format!(
                "unknown kernel '{other}' (expected white|riesz|ou|poisson|cauchy)"
            ));
            NoiseKind::White
        }
    };

    // nonlinearity
    let sigma = match sigma_form.as_str() {
        "power" => SigmaSpec::pure_power(gamma.unwrap_or(1.0)).unwrap_or_else(|e| {
            violations.push(e.to_string());
            SigmaSpec::PurePower { gamma: 1.0 }
        }),
        "linear" => SigmaSpec::linear(lambda.unwrap_or(1.0)).unwrap_or_else(|e| {
            violations.push(e.to_string());
            SigmaSpec::Linear { lambda: 1.0 }
        }),
        "zero" => SigmaSpec::Linear { lambda: 0.0 },
        other => {
            violations.push(format!("unknown sigma_form '{other}' (expected power|linear|zero)"));
            SigmaSpec::Linear { lambda: 0.0 }
        }
    };

    // lattice
    let n = match n_f {
        Some(v) if v == v.trunc() && v >= 2.0 => v as usize,
        _ => {
            violations.push("n must be an integer >= 2".to_string());
            512
        }
    };
    let half_width = half_width.unwrap_or(8.0);
    let lattice = match Lattice::new(dim, half_width, n) {
        Ok(l) => l,
        Err(e) => {
            violations.push(e.to_string());
            Lattice::new(dim, 8.0, 512).expect("fallback lattice")
        }
    };

    // initial data
    let initial = match u0_kind.as_str() {
        "constant" => match kappa {
            Some(k) if k >= 0.0 => InitialData::Constant { level: k },
            Some(k) => {
                violations.push(format!("kappa must be >= 0, got {k}"));
                InitialData::Constant { level: 1.0 }
            }
            None => {
                violations.push("constant initial data requires 'kappa' (or use u0_file)".to_string());
                InitialData::Constant { level: 1.0 }
            }
        },
        "ball" => InitialData::BallIndicator {
            level: kappa.unwrap_or_else(|| {
                violations.push("ball initial data requires 'kappa'".to_string());
                1.0
            }),
            radius: u0_radius.unwrap_or(1.0),
        },
        "file" => match raw.get("u0_file") {
            Some(path) => match load_u0_file(path, lattice) {
                Ok(f) => InitialData::Field(f),
                Err(e) => {
                    violations.push(format!("u0_file '{path}': {e}"));
                    InitialData::Constant { level: 1.0 }
                }
            },
            None => {
                violations.push("u0 = file requires the 'u0_file' key".to_string());
                InitialData::Constant { level: 1.0 }
            }
        },
        other => {
            violations.push(format!("unknown u0 '{other}' (expected constant|ball|file)"));
            InitialData::Constant { level: 1.0 }
        }
    };

    // domain
    let domain = match domain_name.as_str() {
        "free" => Domain::Free,
        "ball" => match radius {
            Some(r) if r > 0.0 => Domain::Ball { radius: r },
            _ => {
                violations.push("ball domain requires radius > 0".to_string());
                Domain::Free
            }
        },
        other => {
            violations.push(format!("unknown domain '{other}' (expected free|ball)"));
            Domain::Free
        }
    };

    let trunc_level = trunc.unwrap_or_else(|| {
        // default: 10 x the initial sup
        let sup = match &initial {
            InitialData::Constant { level } => *level,
            InitialData::BallIndicator { level, .. } => *level,
            InitialData::Field(f) => f.sup_abs(),
        };
        10.0 * sup.max(0.1)
    });

    let spec = match StableKernelSpec::new(alpha, dim) {
        Ok(s) => s,
        Err(e) => {
            violations.push(e.to_string());
            StableKernelSpec::new(1.5, 1).expect("fallback spec")
        }
    };

    let dt = dt.unwrap_or(1e-3);
    let t_end = t_end.unwrap_or(1.0);
    let sim = SimConfig {
        spec,
        sigma,
        noise,
        lattice,
        initial,
        dt,
        t_end,
        trunc_level,
        domain,
    };
    if let Err(e) = sim.validate() {
        violations.push(e.to_string());
    }

    let paths = match paths_f {
        Some(p) if p >= 1.0 && p == p.trunc() => p as u64,
        _ => {
            violations.push("paths must be a positive integer".to_string());
            1
        }
    };
    let seed = match seed_f {
        Some(s) if s >= 0.0 && s == s.trunc() => s as u64,
        _ => {
            violations.push("seed must be a nonnegative integer".to_string());
            1
        }
    };
    if !(threshold > 0.0 && threshold <= 1.0) {
        violations.push(format!("threshold must be in (0, 1], got {threshold}"));
    }

    let snapshot_times = match raw.get("snapshot_times") {
        Some(v) => parse_list(v).unwrap_or_else(|e| {
            violations.push(format!("snapshot_times: {e}"));
            Vec::new()
        }),
        None => (1..=5).map(|i| t_end * i as f64 / 5.0).collect(),
    };
    let probes = match raw.get("probes") {
        Some(v) => parse_points(v, dim).unwrap_or_else(|e| {
            violations.push(format!("probes: {e}"));
            Vec::new()
        }),
        None => vec![vec![0.0; dim]],
    };
    let probe_pairs = match raw.get("probe_pairs") {
        Some(v) => parse_pairs(v, dim).unwrap_or_else(|e| {
            violations.push(format!("probe_pairs: {e}"));
            Vec::new()
        }),
        None => Vec::new(),
    };
    let kappas = match raw.get("kappas") {
        Some(v) => parse_list(v).unwrap_or_else(|e| {
            violations.push(format!("kappas: {e}"));
            Vec::new()
        }),
        None => Vec::new(),
    };
    let horizons = match raw.get("horizons") {
        Some(v) => parse_list(v).unwrap_or_else(|e| {
            violations.push(format!("horizons: {e}"));
            Vec::new()
        }),
        None => Vec::new(),
    };
    let experiment = match experiment_name.as_str() {
        "moments" => ExperimentKind::Moments,
        "kappa-sweep" => ExperimentKind::KappaSweep,
        "horizon-sweep" => ExperimentKind::HorizonSweep,
        "dirichlet" => ExperimentKind::Dirichlet,
        other => {
            violations.push(format!(
                "unknown experiment '{other}' (expected moments|kappa-sweep|horizon-sweep|dirichlet)"
            ));
            ExperimentKind::Moments
        }
    };
    match experiment {
        ExperimentKind::KappaSweep if kappas.len() < 3 => {
            violations.push("kappa-sweep requires 'kappas' with >= 3 increasing values".to_string());
        }
        ExperimentKind::HorizonSweep if horizons.len() < 2 => {
            violations
                .push("horizon-sweep requires 'horizons' with >= 2 increasing values".to_string());
        }
        ExperimentKind::Dirichlet if !matches!(domain, Domain::Ball { .. }) => {
            violations.push("dirichlet experiment requires domain = ball".to_string());
        }
        _ => {}
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    // echo = actual values in effect, not just the file contents
    let mut echo = raw;
    let defaults: &[(&str, String)] = &[
        ("alpha", alpha.to_string()),
        ("dim", dim.to_string()),
        ("kernel", kernel_name.clone()),
        ("sigma_form", sigma_form.clone()),
        ("L", half_width.to_string()),
        ("n", n.to_string()),
        ("dt", dt.to_string()),
        ("t_end", t_end.to_string()),
        ("trunc_N", trunc_level.to_string()),
        ("paths", paths.to_string()),
        ("seed", seed.to_string()),
        ("domain", domain_name.clone()),
        ("threshold", threshold.to_string()),
        ("experiment", experiment_name.clone()),
        ("u0", u0_kind.clone()),
    ];
    for (k, v) in defaults {
        echo.entry((*k).to_string()).or_insert_with(|| v.clone());
    }

    Ok(ExperimentConfig {
        sim,
        paths,
        seed,
        snapshot_times,
        probes,
        probe_pairs,
        experiment,
        kappas,
        horizons,
        threshold,
        echo,
    })
}

fn load_u0_file(path: &str, lattice: Lattice) -> Result<ScalarField, String> {
    let body = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let values: Result<Vec<f64>, String> = body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|e| format!("bad value '{l}': {e}")))
        .collect();
    ScalarField::from_values(lattice, values?).map_err(|e| e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect()
}

/// Points are ';'-separated, coordinates ','-separated: "0 ; 0.5" (d=1),
/// "0,0 ; 1,0.5" (d=2).
fn parse_points(s: &str, dim: usize) -> Result<Vec<Vec<f64>>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let p = parse_list(t)?;
            if p.len() != dim {
                return Err(format!("point '{t}' has {} coordinates, expected {dim}", p.len()));
            }
            Ok(p)
        })
        .collect()
}

/// Pairs are ';'-separated, the two points '|'-separated: "0 | 0.5 ; 0 | 1".
fn parse_pairs(s: &str, dim: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let mut halves = t.split('|');
            let a = halves.next().ok_or_else(|| format!("pair '{t}': missing first point"))?;
            let b = halves.next().ok_or_else(|| format!("pair '{t}': missing second point"))?;
            if halves.next().is_some() {
                return Err(format!("pair '{t}': too many '|'"));
            }
            let pa = parse_points(a, dim)?.pop().ok_or_else(|| format!("pair '{t}': empty"))?;
            let pb = parse_points(b, dim)?.pop().ok_or_else(|| format!("pair '{t}': empty"))?;
            Ok((pa, pb))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_valid_config_fills_defaults() {
        let cfg = validate_config("kappa = 1\n").unwrap();
        assert_eq!(cfg.paths, 1000);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.threshold, 0.5);
        assert_eq!(cfg.echo.get("alpha").unwrap(), "1.5");
        assert_eq!(cfg.echo.get("trunc_N").unwrap(), "10");
        assert_eq!(cfg.snapshot_times.len(), 5);
    }

    #[test]
    fn white_noise_dimension_violation() {
        let err = validate_config("kappa=1\ndim=2\nalpha=1.5\nkernel=white\n").unwrap_err();
        assert!(
            err.iter().any(|v| v.contains("white noise requires d=1, 1<alpha<2")),
            "{err:?}"
        );
    }

    #[test]
    fn riesz_beta_violation() {
        let err = validate_config("kappa=1\nkernel=riesz\nbeta=1.5\ndim=1\n").unwrap_err();
        assert!(err.iter().any(|v| v.contains("beta < d required")), "{err:?}");
    }

    #[test]
    fn unknown_keys_named() {
        let err = validate_config("kappa=1\nbogus_key=3\nother=1\n").unwrap_err();
        assert!(err.iter().any(|v| v.contains("unknown key 'bogus_key'")));
        assert!(err.iter().any(|v| v.contains("unknown key 'other'")));
    }

    #[test]
    fn all_violations_reported_together() {
        let err =
            validate_config("kappa=-1\nn=100\ndt=-0.5\nkernel=riesz\nbeta=2.0\n").unwrap_err();
        assert!(err.len() >= 4, "expected aggregated violations, got {err:?}");
    }

    #[test]
    fn probes_and_pairs_parse() {
        let cfg = validate_config(
            "kappa=1\nprobes = 0 ; 0.5\nprobe_pairs = 0 | 0.5 ; 0 | 0.25\n",
        )
        .unwrap();
        assert_eq!(cfg.probes, vec![vec![0.0], vec![0.5]]);
        assert_eq!(cfg.probe_pairs.len(), 2);
        assert_eq!(cfg.probe_pairs[0], (vec![0.0], vec![0.5]));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = validate_config("# a comment\n\nkappa = 2 \n# another\n").unwrap();
        match cfg.sim.initial {
            InitialData::Constant { level } => assert_eq!(level, 2.0),
            _ => panic!("expected constant"),
        }
    }
}
