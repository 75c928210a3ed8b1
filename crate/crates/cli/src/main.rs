// SPDX-License-Identifier: Apache-2.0

//! `sugeo`: command-line front end for `sugeo-core`.
//!
//! Structured output is JSON (CSV for `reproduce`), written to stdout or to
//! `--out`. Exit status is 0 on success, 1 when the library reports a domain
//! error (its variant name is printed verbatim) and 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use sugeo_core::acceptance;
use sugeo_core::bounds::{self, Circuit, CliffordGate, IsometryKind, IsometryMap};
use sugeo_core::config::RunConfig;
use sugeo_core::coords::{self, UnitaryOperator};
use sugeo_core::geodesic::{self, Curve, LagrangianForm, ShootOptions};
use sugeo_core::lattice::{self, DiagonalUnitary};
use sugeo_core::metric::{self, MetricSpec};
use sugeo_core::pauli::{self, PauliString, PauliVector};

#[derive(Parser, Debug)]
#[command(name = "sugeo", version, about = "Finsler geometry of SU(2^n) and circuit-size lower bounds")]
struct Cli {
    /// Seed for every sampled quantity (ChaCha8, `seed_from_u64`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run configuration JSON (`n_cap`, `seed`, `tolerances`, `output_dir`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the local norm of a Pauli vector.
    MetricEval {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Convert a tangent vector between Pauli and adapted coordinates.
    Coordchange {
        /// JSON `{x, y, direction}` with direction `forward` or `backward`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Integrate the geodesic equation from `(x0, y0)`.
    GeodesicShoot {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        x0: PathBuf,
        #[arg(long)]
        y0: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Permit n = 3 (slow: 63 coordinates).
        #[arg(long)]
        allow_n3: bool,
    },
    /// Euler–Lagrange residual of a sampled curve.
    GeodesicResidual {
        #[arg(long)]
        curve: PathBuf,
        /// Metric to test against; defaults to the one stored in the curve.
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Form::Squared)]
        form: Form,
    },
    /// `exp(-i t H₀)` for `H₀` supported on a stabilizer subgroup.
    PauliGeodesic {
        #[arg(long)]
        metric: PathBuf,
        /// Comma-separated commuting generators, e.g. `ZI,IZ`.
        #[arg(long)]
        generators: String,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Shortest Pauli geodesic to a diagonal unitary.
    CvpMin {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        phases: PathBuf,
        #[arg(long, default_value_t = lattice::DEFAULT_WINDOW)]
        window: usize,
    },
    /// Radius below which a fraction `f` of diagonal unitaries cannot lie.
    VolumeBound {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        f: f64,
        #[arg(long)]
        n: usize,
    },
    /// Length of the smoothed curve built from a circuit.
    LowerBound {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, default_value_t = 64)]
        steps_per_gate: usize,
    },
    /// Test whether a map preserves the metric on random Hamiltonians.
    IsometryCheck {
        #[arg(long, value_parser = parse_kind)]
        kind: IsometryKind,
        /// Clifford gate (`cnot`, `cz`, `h`, `s`, optionally `:q,q`) or the
        /// Pauli string for `--kind pauli`.
        #[arg(long)]
        gate: Option<String>,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Run acceptance criteria and print a CSV summary.
    Reproduce {
        /// Suite name, criterion number, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    Squared,
    Unsquared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Direction {
    Forward,
    Backward,
}

#[derive(Deserialize)]
struct CoordChangeInput {
    x: PauliVector,
    y: PauliVector,
    direction: Direction,
}

fn parse_kind(s: &str) -> Result<IsometryKind, String> {
    s.parse().map_err(|e: sugeo_core::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Domain(sugeo_core::Error),
}

impl From<sugeo_core::Error> for Failure {
    fn from(e: sugeo_core::Error) -> Self {
        Failure::Domain(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_json<T: DeserializeOwned>(flag: &str, path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("--{flag} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("--{flag} {}: {e}", path.display())))
}

struct Ctx {
    config: RunConfig,
    seed: u64,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

enum Output {
    Json(serde_json::Value),
    Text(String),
}

fn run(cli: Cli) -> CliResult<Output> {
    let base = match &cli.config {
        Some(p) => read_json::<RunConfig>("config", p)?,
        None => RunConfig::default(),
    };
    let config = base.with_env()?;
    let seed = cli.seed.unwrap_or(config.seed);
    let ctx = Ctx { config, seed };
    let value = match cli.command {
        Command::MetricEval { metric, vector } => {
            let spec: MetricSpec = read_json("metric", &metric)?;
            let y: PauliVector = read_json("vector", &vector)?;
            ctx.config.check_n(y.n())?;
            json!({ "value": metric::norm(&spec, &y)? })
        }
        Command::Coordchange { input } => {
            let req: CoordChangeInput = read_json("input", &input)?;
            ctx.config.check_n(req.x.n())?;
            let y = match req.direction {
                Direction::Forward => coords::change_coords_forward(&req.x, &req.y)?,
                Direction::Backward => coords::change_coords_backward(&req.x, &req.y)?,
            };
            json!({ "x": req.x, "y": y, "direction": req.direction })
        }
        Command::GeodesicShoot {
            metric,
            x0,
            y0,
            t,
            steps,
            allow_n3,
        } => {
            let spec: MetricSpec = read_json("metric", &metric)?;
            let x0: PauliVector = read_json("x0", &x0)?;
            let y0: PauliVector = read_json("y0", &y0)?;
            ctx.config.check_n(x0.n())?;
            let defaults = ShootOptions::default();
            let opts = ShootOptions {
                speed_tol: ctx.config.tolerance("speed", defaults.speed_tol),
                max_n: if allow_n3 { 3 } else { defaults.max_n },
                ..defaults
            };
            let curve = geodesic::shoot_geodesic_with(&spec, &x0, &y0, t, steps, &opts)?;
            to_value(&curve)
        }
        Command::GeodesicResidual { curve, metric, form } => {
            let curve: Curve = read_json("curve", &curve)?;
            if curve.samples.len() < 3 {
                return Err(Failure::Usage("--curve: need at least 3 samples".into()));
            }
            let spec = match metric {
                Some(p) => read_json("metric", &p)?,
                None => curve.metric.clone(),
            };
            let form = match form {
                Form::Squared => LagrangianForm::Squared,
                Form::Unsquared => LagrangianForm::Unsquared,
            };
            json!({ "residual": geodesic::el_residual_with(&spec, &curve, form)? })
        }
        Command::PauliGeodesic {
            metric,
            generators,
            coeffs,
            t,
            steps,
        } => {
            let spec: MetricSpec = read_json("metric", &metric)?;
            let coeffs: PauliVector = read_json("coeffs", &coeffs)?;
            ctx.config.check_n(coeffs.n())?;
            let gens = generators
                .split(',')
                .map(|g| g.trim().parse::<PauliString>())
                .collect::<Result<Vec<_>, _>>()?;
            let group = pauli::stabilizer_span(gens)?;
            let u: UnitaryOperator = geodesic::pauli_geodesic(&group, &coeffs, t)?;
            let curve = geodesic::pauli_geodesic_curve(&spec, &group, &coeffs, t, steps)?;
            json!({
                "unitary": u,
                "length": geodesic::curve_length(&spec, &curve)?,
                "norm": metric::norm(&spec, &coeffs)?,
            })
        }
        Command::CvpMin { metric, phases, window } => {
            let spec: MetricSpec = read_json("metric", &metric)?;
            let u: DiagonalUnitary = read_json("phases", &phases)?;
            ctx.config.check_n(u.n())?;
            let res = lattice::cvp_minimal_pauli_geodesic(&spec, &u, window)?;
            json!({ "value": res.value, "m": res.minimizer, "certified": res.certified })
        }
        Command::VolumeBound { metric, f, n } => {
            let spec: MetricSpec = read_json("metric", &metric)?;
            ctx.config.check_n(n)?;
            json!({ "r_lower": lattice::coverage_bound(&spec, f, n)? })
        }
        Command::LowerBound {
            circuit,
            metric,
            steps_per_gate,
        } => {
            let circuit: Circuit = read_json("circuit", &circuit)?;
            let spec: MetricSpec = read_json("metric", &metric)?;
            ctx.config.check_n(circuit.n)?;
            let curve = bounds::circuit_to_curve(&circuit, &spec, steps_per_gate)?;
            let tol = ctx.config.tolerance("length", 1e-6);
            json!({
                "length": curve.length,
                "gate_count": curve.gate_count,
                "bound_holds": curve.bound_holds(tol),
            })
        }
        Command::IsometryCheck {
            kind,
            gate,
            metric,
            n,
            samples,
        } => {
            let spec: MetricSpec = read_json("metric", &metric)?;
            ctx.config.check_n(n)?;
            let mut rng = ctx.rng();
            let map = match kind {
                IsometryKind::Pauli => {
                    let s = gate.ok_or_else(|| Failure::Usage("--gate <PAULI> is required for --kind pauli".into()))?;
                    IsometryMap::PauliConjugation(s.parse()?)
                }
                IsometryKind::Clifford => {
                    let g: CliffordGate = gate.as_deref().unwrap_or("cnot").parse()?;
                    IsometryMap::CliffordConjugation(g)
                }
                IsometryKind::ComplexConjugation => IsometryMap::ComplexConjugation,
                IsometryKind::LocalUnitary => IsometryMap::random_local(n, &mut rng),
                IsometryKind::Unitary => IsometryMap::random_unitary(n, &mut rng),
            };
            let report = bounds::isometry_check(&map, &spec, n, samples, &mut rng)?;
            json!({
                "kind": report.kind,
                "family": report.family,
                "applicable": report.applicable,
                "max_deviation": report.max_deviation,
                "counterexample": report.counterexample,
                "samples": report.samples,
                "pass": report.passes(),
            })
        }
        Command::Reproduce { suite } => {
            let rows = acceptance::run_suite(&suite, ctx.seed)?;
            for r in &rows {
                eprintln!("{}", r.line());
            }
            return Ok(Output::Text(acceptance::to_csv(&rows)));
        }
    };
    Ok(Output::Json(value))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("library types serialize to JSON")
}

fn emit(out: Option<&Path>, output: Output) -> std::io::Result<()> {
    let text = match output {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        Output::Text(s) => s,
    };
    match out {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(output) => match emit(out.as_deref(), output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: --out: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
