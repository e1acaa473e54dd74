use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::grid::Boundary;

/// Every problem found in a run configuration, each tagged with its line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<(usize, String)>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (line, msg)) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if *line == 0 {
                write!(f, "config: {msg}")?;
            } else {
                write!(f, "config line {line}: {msg}")?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Kernel,
    Ibvp,
    Cauchy,
    Verify,
    Convergence,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Kernel => "kernel",
            Subcommand::Ibvp => "ibvp",
            Subcommand::Cauchy => "cauchy",
            Subcommand::Verify => "verify",
            Subcommand::Convergence => "convergence",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "kernel" => Ok(Subcommand::Kernel),
            "ibvp" => Ok(Subcommand::Ibvp),
            "cauchy" => Ok(Subcommand::Cauchy),
            "verify" => Ok(Subcommand::Verify),
            "convergence" => Ok(Subcommand::Convergence),
            other => Err(format!("unknown subcommand '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelBlock {
    pub dimension: usize,
    pub eta_max: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridBlock {
    pub dims: usize,
    pub extents: Vec<f64>,
    pub points: Vec<usize>,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialBlock {
    /// mean + amplitude·exp(−|x − centre|²/width²)
    Gaussian {
        mean: f64,
        amplitude: f64,
        width: f64,
    },
    /// mean + amplitude·Π cos(m_a π x_a / L_a); mode indices per axis.
    Cosine {
        mean: f64,
        amplitude: f64,
        modes: Vec<usize>,
    },
    /// mean + amplitude·(random band-limited field with unit L² norm).
    Random {
        mean: f64,
        amplitude: f64,
        band: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum GBlock {
    Zero,
    Cubic {
        c: f64,
    },
    Power {
        alpha: f64,
    },
    /// Bounded surrogate of `base` around the gradient of the initial data.
    Truncated {
        base: Box<GBlock>,
        theta_outer: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeBlock {
    pub horizon: f64,
    pub steps: Option<usize>,
    /// Picard window length; the whole horizon when absent.
    pub window: Option<f64>,
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub inner: f64,
    pub inner_max_iter: usize,
    pub damping: f64,
    pub picard: f64,
    pub picard_max_iter: usize,
    pub picard_samples: usize,
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inner: 1e-10,
            inner_max_iter: 200,
            damping: 1.0,
            picard: 1e-10,
            picard_max_iter: 60,
            picard_samples: 33,
            quadrature: 1e-12,
        }
    }
}

/// Fully validated run configuration; serializes as the manifest echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub seed: u64,
    pub kernel: Option<KernelBlock>,
    pub grid: Option<GridBlock>,
    pub initial: Option<InitialBlock>,
    pub g: Option<GBlock>,
    pub time: Option<TimeBlock>,
    pub tolerances: Tolerances,
    pub allow_unsupported: bool,
    pub gronwall: Option<(f64, f64)>,
    pub horizon_k: usize,
    pub planar_s: Option<f64>,
    pub decay_p: Option<f64>,
    pub decay_times: Vec<f64>,
    pub convergence_levels: Vec<usize>,
    pub verify_draws: usize,
}

const KEYS: &[&str] = &[
    "seed",
    "kernel.dimension",
    "kernel.eta_max",
    "kernel.resolution",
    "grid.dims",
    "grid.extents",
    "grid.points",
    "grid.boundary",
    "initial.kind",
    "initial.mean",
    "initial.amplitude",
    "initial.width",
    "initial.modes",
    "initial.band",
    "g.form",
    "g.base",
    "g.c",
    "g.alpha",
    "g.theta_outer",
    "time.T",
    "time.steps",
    "time.window",
    "time.snapshots",
    "tol.inner",
    "tol.inner_max_iter",
    "tol.damping",
    "tol.picard",
    "tol.picard_max_iter",
    "tol.picard_samples",
    "tol.quadrature",
    "run.allow_unsupported",
    "gronwall.c1",
    "gronwall.c2",
    "horizon.k",
    "horizon.planar_s",
    "decay.p",
    "decay.times",
    "convergence.levels",
    "verify.draws",
];

struct Parser {
    entries: BTreeMap<String, (usize, String)>,
    errors: Vec<(usize, String)>,
}

impl Parser {
    fn read(text: &str) -> Self {
        let mut p = Parser {
            entries: BTreeMap::new(),
            errors: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                p.errors
                    .push((line, format!("expected 'key = value', got '{body}'")));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                p.errors.push((line, format!("unknown key '{k}'")));
            } else if v.is_empty() {
                p.errors.push((line, format!("'{k}' has no value")));
            } else if let Some((first, _)) = p.entries.get(k) {
                p.errors
                    .push((line, format!("'{k}' already set on line {first}")));
            } else {
                p.entries.insert(k.to_string(), (line, v.to_string()));
            }
        }
        p
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.0)
    }

    /// Parses `key` when present; `check` returns a range complaint.
    fn get<T: FromStr>(&mut self, key: &str, check: impl Fn(&T) -> Option<String>) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let (line, raw) = self.entries.get(key)?.clone();
        match raw.parse::<T>() {
            Ok(v) => match check(&v) {
                None => Some(v),
                Some(msg) => {
                    self.errors.push((line, format!("{key} = {raw}: {msg}")));
                    None
                }
            },
            Err(e) => {
                self.errors.push((line, format!("{key} = {raw}: {e}")));
                None
            }
        }
    }

    fn require<T: FromStr>(
        &mut self,
        key: &str,
        why: &str,
        check: impl Fn(&T) -> Option<String>,
    ) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        if !self.has(key) {
            self.errors.push((0, format!("missing '{key}' ({why})")));
            return None;
        }
        self.get(key, check)
    }

    fn list<T: FromStr>(
        &mut self,
        key: &str,
        check: impl Fn(&T) -> Option<String>,
    ) -> Option<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let (line, raw) = self.entries.get(key)?.clone();
        let mut out = Vec::new();
        for item in raw.split(',') {
            match item.trim().parse::<T>() {
                Ok(v) => {
                    if let Some(msg) = check(&v) {
                        self.errors
                            .push((line, format!("{key}: element '{}': {msg}", item.trim())));
                        return None;
                    }
                    out.push(v);
                }
                Err(e) => {
                    self.errors
                        .push((line, format!("{key}: element '{}': {e}", item.trim())));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn complain(&mut self, key: &str, msg: impl Into<String>) {
        let line = self.line(key);
        self.errors.push((line, msg.into()));
    }
}

fn positive(v: &f64) -> Option<String> {
    (!(*v > 0.0 && v.is_finite())).then(|| "must be positive and finite".into())
}

fn nonnegative(v: &f64) -> Option<String> {
    (!(*v >= 0.0 && v.is_finite())).then(|| "must be nonnegative and finite".into())
}

fn finite(v: &f64) -> Option<String> {
    (!v.is_finite()).then(|| "must be finite".into())
}

fn at_least(min: usize) -> impl Fn(&usize) -> Option<String> {
    move |v| (*v < min).then(|| format!("must be at least {min}"))
}

fn any<T>(_: &T) -> Option<String> {
    None
}

fn parse_g(p: &mut Parser, key: &str, allow_truncated: bool) -> Option<GBlock> {
    let form: String = p.require(key, "the nonlinearity", any)?;
    match form.as_str() {
        "zero" => Some(GBlock::Zero),
        "cubic" => Some(GBlock::Cubic {
            c: p.require("g.c", "cubic form", nonnegative)?,
        }),
        "power" => Some(GBlock::Power {
            alpha: p.require("g.alpha", "power form", |a: &f64| {
                (!(*a > 0.0 && a.is_finite())).then(|| "must be positive".into())
            })?,
        }),
        "truncated" if allow_truncated => {
            let theta_outer = p.get("g.theta_outer", |v: &f64| {
                (!(*v > 1.0 && v.is_finite())).then(|| "must exceed 1".into())
            });
            let base = parse_g(p, "g.base", false)?;
            Some(GBlock::Truncated {
                base: Box::new(base),
                theta_outer: theta_outer.unwrap_or(2.0),
            })
        }
        other => {
            let allowed = if allow_truncated {
                "zero, cubic, power or truncated"
            } else {
                "zero, cubic or power"
            };
            p.complain(key, format!("{key} = {other}: expected {allowed}"));
            None
        }
    }
}

fn parse_grid(p: &mut Parser) -> Option<GridBlock> {
    let dims: Option<usize> = p.require("grid.dims", "grid block", |d: &usize| {
        (!(1..=3).contains(d)).then(|| "must be 1, 2 or 3".into())
    });
    let extents: Option<Vec<f64>> = if p.has("grid.extents") {
        p.list("grid.extents", positive)
    } else {
        p.errors
            .push((0, "missing 'grid.extents' (grid block)".into()));
        None
    };
    let points: Option<Vec<usize>> = if p.has("grid.points") {
        p.list("grid.points", at_least(2))
    } else {
        p.errors
            .push((0, "missing 'grid.points' (grid block)".into()));
        None
    };
    let boundary: Option<Boundary> = p.require("grid.boundary", "grid block", any);
    let (dims, extents, points, boundary) = (dims?, extents?, points?, boundary?);
    let mut ok = true;
    if extents.len() != dims {
        p.complain(
            "grid.extents",
            format!(
                "grid.extents has {} entries, grid.dims = {dims}",
                extents.len()
            ),
        );
        ok = false;
    }
    if points.len() != dims {
        p.complain(
            "grid.points",
            format!(
                "grid.points has {} entries, grid.dims = {dims}",
                points.len()
            ),
        );
        ok = false;
    }
    if boundary == Boundary::Periodic && points.iter().any(|n| n % 2 != 0) {
        p.complain(
            "grid.points",
            "periodic grids need an even number of points per axis",
        );
        ok = false;
    }
    ok.then_some(GridBlock {
        dims,
        extents,
        points,
        boundary,
    })
}

fn parse_initial(p: &mut Parser, dims: Option<usize>) -> Option<InitialBlock> {
    let kind: String = p.require("initial.kind", "initial data", any)?;
    let mean = p.get("initial.mean", finite).unwrap_or(0.0);
    let amplitude = p.require("initial.amplitude", "initial data", finite);
    match kind.as_str() {
        "gaussian" => {
            let width = p.require("initial.width", "gaussian data", positive);
            Some(InitialBlock::Gaussian {
                mean,
                amplitude: amplitude?,
                width: width?,
            })
        }
        "cosine" => {
            let modes = if p.has("initial.modes") {
                p.list("initial.modes", any::<usize>)
            } else {
                p.errors
                    .push((0, "missing 'initial.modes' (cosine data)".into()));
                None
            }?;
            if let Some(d) = dims {
                if modes.len() != d {
                    p.complain(
                        "initial.modes",
                        format!("initial.modes has {} entries, grid.dims = {d}", modes.len()),
                    );
                    return None;
                }
            }
            Some(InitialBlock::Cosine {
                mean,
                amplitude: amplitude?,
                modes,
            })
        }
        "random" => {
            let band = p.require("initial.band", "random data", at_least(1));
            Some(InitialBlock::Random {
                mean,
                amplitude: amplitude?,
                band: band?,
            })
        }
        other => {
            p.complain(
                "initial.kind",
                format!("initial.kind = {other}: expected gaussian, cosine or random"),
            );
            None
        }
    }
}

/// Parses the line-oriented `key = value` format (`#` starts a comment) for
/// `subcommand`, reporting every problem at once.
pub fn parse_config(text: &str, subcommand: Subcommand) -> Result<RunConfig, ConfigErrors> {
    let mut p = Parser::read(text);
    let seed = p.get("seed", any::<u64>).unwrap_or(0);

    let needs_field = matches!(
        subcommand,
        Subcommand::Ibvp | Subcommand::Cauchy | Subcommand::Convergence
    );
    let kernel = if subcommand == Subcommand::Kernel {
        let dimension = p.require("kernel.dimension", "kernel block", |d: &usize| {
            (!(1..=3).contains(d)).then(|| "must be 1, 2 or 3".into())
        });
        let eta_max = p.require("kernel.eta_max", "kernel block", positive);
        let resolution = p.get("kernel.resolution", at_least(2)).unwrap_or(200);
        match (dimension, eta_max) {
            (Some(dimension), Some(eta_max)) => Some(KernelBlock {
                dimension,
                eta_max,
                resolution,
            }),
            _ => None,
        }
    } else {
        None
    };

    let grid = if needs_field {
        parse_grid(&mut p)
    } else {
        None
    };
    let initial = if needs_field {
        parse_initial(&mut p, grid.as_ref().map(|g| g.dims))
    } else {
        None
    };
    let g = if needs_field {
        parse_g(&mut p, "g.form", true)
    } else {
        None
    };

    let time = if needs_field {
        let horizon = p.require("time.T", "time block", positive);
        let steps = p.get("time.steps", at_least(1));
        if steps.is_none() && !p.has("time.steps") && subcommand == Subcommand::Ibvp {
            p.errors
                .push((0, "missing 'time.steps' (ibvp time block)".into()));
        }
        let window = p.get("time.window", positive);
        let snapshots = if p.has("time.snapshots") {
            p.list("time.snapshots", nonnegative).unwrap_or_default()
        } else {
            Vec::new()
        };
        if let Some(t) = horizon {
            if snapshots.iter().any(|&s| s > t) {
                p.complain("time.snapshots", "snapshot times must not exceed time.T");
            }
        }
        horizon.map(|horizon| TimeBlock {
            horizon,
            steps,
            window,
            snapshots,
        })
    } else {
        None
    };

    if subcommand == Subcommand::Cauchy {
        if let Some(g) = &grid {
            if g.boundary != Boundary::Periodic {
                p.complain(
                    "grid.boundary",
                    "the cauchy subcommand needs a periodic grid",
                );
            }
        }
    }

    let d = Tolerances::default();
    let tolerances = Tolerances {
        inner: p.get("tol.inner", positive).unwrap_or(d.inner),
        inner_max_iter: p
            .get("tol.inner_max_iter", at_least(1))
            .unwrap_or(d.inner_max_iter),
        damping: p
            .get("tol.damping", |v: &f64| {
                (!(*v > 0.0 && *v <= 1.0)).then(|| "must lie in (0, 1]".into())
            })
            .unwrap_or(d.damping),
        picard: p.get("tol.picard", positive).unwrap_or(d.picard),
        picard_max_iter: p
            .get("tol.picard_max_iter", at_least(1))
            .unwrap_or(d.picard_max_iter),
        picard_samples: p
            .get("tol.picard_samples", at_least(3))
            .unwrap_or(d.picard_samples),
        quadrature: p.get("tol.quadrature", positive).unwrap_or(d.quadrature),
    };

    let allow_unsupported = p.get("run.allow_unsupported", any::<bool>).unwrap_or(false);
    let gronwall = match (p.has("gronwall.c1"), p.has("gronwall.c2")) {
        (false, false) => None,
        (true, true) => {
            let c1 = p.get("gronwall.c1", positive);
            let c2 = p.get("gronwall.c2", positive);
            c1.zip(c2)
        }
        _ => {
            p.errors.push((
                0,
                "gronwall.c1 and gronwall.c2 must be given together".into(),
            ));
            None
        }
    };
    let horizon_k = p.get("horizon.k", at_least(1)).unwrap_or(2);
    let planar_s = p.get("horizon.planar_s", |s: &f64| {
        (!(*s > 1.0 && s.is_finite())).then(|| "must exceed 1".into())
    });
    let decay_p = p.get("decay.p", |v: &f64| {
        (!(*v >= 1.0)).then(|| "must be at least 1 (or inf)".into())
    });
    let decay_times = if p.has("decay.times") {
        p.list("decay.times", positive).unwrap_or_default()
    } else {
        Vec::new()
    };
    if !decay_times.is_empty() && decay_times.len() < 4 {
        p.complain("decay.times", "decay.times needs at least 4 entries");
    }

    let convergence_levels = if subcommand == Subcommand::Convergence {
        if p.has("convergence.levels") {
            let levels = p
                .list("convergence.levels", at_least(1))
                .unwrap_or_default();
            if !levels.is_empty() && (levels.len() < 2 || levels.windows(2).any(|w| w[1] <= w[0])) {
                p.complain(
                    "convergence.levels",
                    "convergence.levels needs at least 2 increasing step counts",
                );
            }
            levels
        } else {
            vec![16, 32, 64, 128]
        }
    } else {
        Vec::new()
    };
    let verify_draws = p.get("verify.draws", at_least(1)).unwrap_or(20);

    // Keys that belong to blocks the subcommand never reads are likely mistakes.
    let unused: &[&str] = match subcommand {
        Subcommand::Kernel => &["grid.", "initial.", "g.", "time.", "convergence."],
        Subcommand::Verify => &[
            "kernel.",
            "grid.",
            "initial.",
            "g.",
            "time.",
            "convergence.",
        ],
        Subcommand::Ibvp | Subcommand::Cauchy => &["kernel.", "convergence."],
        Subcommand::Convergence => &["kernel."],
    };
    for prefix in unused {
        if p.has_prefix(prefix) {
            let keys: Vec<String> = p
                .entries
                .keys()
                .filter(|k| k.starts_with(prefix))
                .cloned()
                .collect();
            for k in keys {
                p.complain(
                    &k,
                    format!("'{k}' is not used by the {} subcommand", subcommand.name()),
                );
            }
        }
    }

    if !p.errors.is_empty() {
        p.errors.sort_by_key(|e| e.0);
        return Err(ConfigErrors(p.errors));
    }
    Ok(RunConfig {
        subcommand,
        seed,
        kernel,
        grid,
        initial,
        g,
        time,
        tolerances,
        allow_unsupported,
        gronwall,
        horizon_k,
        planar_s,
        decay_p,
        decay_times,
        convergence_levels,
        verify_draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const IBVP: &str = "
        grid.dims = 2
        grid.extents = 1, 1
        grid.points = 16, 16
        grid.boundary = neumann
        initial.kind = cosine
        initial.amplitude = 0.1
        initial.modes = 1, 2
        g.form = cubic
        g.c = 1
        time.T = 0.01
        time.steps = 10
    ";

    #[test]
    fn minimal_kernel_config() {
        let cfg = parse_config(
            "kernel.dimension = 2\nkernel.eta_max = 20 # comment\n",
            Subcommand::Kernel,
        )
        .unwrap();
        let k = cfg.kernel.unwrap();
        assert_eq!((k.dimension, k.eta_max), (2, 20.0));
    }

    #[test]
    fn ibvp_config_parses() {
        let cfg = parse_config(IBVP, Subcommand::Ibvp).unwrap();
        assert_eq!(cfg.g, Some(GBlock::Cubic { c: 1.0 }));
        assert_eq!(cfg.time.unwrap().steps, Some(10));
        assert_eq!(cfg.grid.unwrap().boundary, Boundary::NeumannBox);
    }

    #[test]
    fn negative_alpha_reports_its_line() {
        let text = IBVP
            .replace("g.form = cubic", "g.form = power")
            .replace("g.c = 1", "g.alpha = -1");
        let err = parse_config(&text, Subcommand::Ibvp).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].0, 10);
        assert!(err.0[0].1.contains("g.alpha"));
    }

    #[test]
    fn every_error_is_reported() {
        let text = IBVP
            .replace("time.steps = 10", "time.steps = 0")
            .replace("grid.dims = 2", "grid.dims = 2\nbogus = 1");
        let err = parse_config(&text, Subcommand::Ibvp).unwrap_err();
        let msgs: Vec<&str> = err.0.iter().map(|e| e.1.as_str()).collect();
        assert!(msgs.iter().any(|m| m.contains("unknown key 'bogus'")));
        assert!(msgs.iter().any(|m| m.contains("time.steps")));
        assert!(err.to_string().contains("config line 3"));
    }

    #[test]
    fn missing_blocks_are_named() {
        let err = parse_config("seed = 3\n", Subcommand::Ibvp).unwrap_err();
        let text = err.to_string();
        for key in [
            "grid.dims",
            "initial.kind",
            "g.form",
            "time.T",
            "time.steps",
        ] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
    }

    #[test]
    fn malformed_lines_and_duplicates() {
        let err = parse_config(
            "kernel.dimension 2\nkernel.eta_max = 1\nkernel.eta_max = 2\n",
            Subcommand::Kernel,
        )
        .unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|e| e.0 == 1 && e.1.contains("key = value")));
        assert!(err
            .0
            .iter()
            .any(|e| e.0 == 3 && e.1.contains("already set")));
    }

    #[test]
    fn cauchy_needs_periodic_grid() {
        let err = parse_config(IBVP, Subcommand::Cauchy).unwrap_err();
        assert!(err.to_string().contains("periodic"));
    }
}
