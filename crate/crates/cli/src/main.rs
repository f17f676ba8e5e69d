//! `modpforms` command-line interface.
//!
//! Exit status: 0 on success, 2 for precondition errors (JSON on stderr),
//! 1 when a computed identity fails (an invariant-violation error or a false verdict).

mod config;
mod scenario;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use modpforms::commalg::{hilbert_limit_compare, Poly, RingPresentation, TruncatedLocalRing};
use modpforms::hecke::{apply, input_precision, operator_matrix, ord_no_decompose};
use modpforms::heckealg::{
    algebra_precision, cokernel_report_with, default_prime_bound, duality_pairing, generate_algebra, k_pk_check,
    periodicity_check, socle_dim, twist_check, CokernelKind,
};
use modpforms::level1::{self, filtration, sturm};
use modpforms::serreweight::{self, nonordinary_eigenspace_dim, scan_report, ResidualDescriptor};
use modpforms::{Error, FieldContext, Form, HeckeOperatorLabel, QExpansion, Result, SpaceKind};

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "modpforms", version, about = "Exact computations with mod-p modular forms of level one")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Characteristic (prime >= 5).
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Number of q-expansion coefficients; defaults to what the command needs.
    #[arg(long, global = true)]
    prec: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for weight scans (output does not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Defaults file with `key = value` lines (p, prec, format, jobs).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Full,
    Cusp,
}

impl From<KindArg> for SpaceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Full => SpaceKind::Full,
            KindArg::Cusp => SpaceKind::Cusp,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    Periodicity,
    Twist,
    Kpk,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basis of M_k or S_k as q-expansions.
    Basis {
        #[arg(long)]
        weight: u32,
        #[arg(long, value_enum, default_value = "full")]
        kind: KindArg,
    },
    /// Operator matrix on a space (CSV, column j = image of basis form j), or the operator
    /// applied to a q-expansion file.
    Hecke {
        #[arg(long)]
        weight: Option<u32>,
        #[arg(long, visible_alias = "space", value_enum, default_value = "full")]
        kind: KindArg,
        /// Operator label: T<n>, U<l>, Vp, theta, D<d>.
        #[arg(long)]
        op: String,
        /// q-expansion file in the text format; prints the image instead of a matrix.
        #[arg(long)]
        apply: Option<PathBuf>,
    },
    /// Full or anemic Hecke algebra of a space.
    HeckeAlgebra {
        #[arg(long)]
        weight: u32,
        #[arg(long, value_enum, default_value = "cusp")]
        kind: KindArg,
        #[arg(long)]
        bound: Option<u64>,
        /// Leave out the operators at p.
        #[arg(long)]
        anemic: bool,
    },
    /// Pairing (T, f) -> a_1(T f) on a cusp space.
    Duality {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        anemic: bool,
    },
    /// Cokernel of the anemic algebra and the j(k) rank law.
    Cokernel {
        #[arg(long)]
        weight: u32,
        #[arg(long, default_value = "cusp")]
        kind: String,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Charpoly comparisons on S(k) = M_k / A M_{k-(p-1)}.
    SerreForms {
        #[arg(long)]
        weight: u32,
        #[arg(long, value_enum)]
        check: CheckArg,
        /// Prime l of the operator T_l.
        #[arg(long, default_value_t = 2)]
        ell: u64,
    },
    /// Dimension of the simultaneous eigenspace in S(k).
    Socle {
        #[arg(long)]
        weight: u32,
        /// JSON object mapping primes (or "T<l>") to eigenvalues.
        #[arg(long)]
        eigensystem: PathBuf,
    },
    /// Serre weight and non-ordinary Serre weight of a descriptor.
    SerreWeight {
        #[arg(long)]
        descriptor: PathBuf,
        /// Include the derivation path.
        #[arg(long)]
        trace: bool,
    },
    /// Least weight whose non-ordinary part carries an eigensystem.
    NoScan {
        #[arg(long)]
        eigensystem: PathBuf,
        #[arg(long)]
        kmax: u32,
    },
    /// Filtration of a q-expansion given in the text format.
    Filtration {
        #[arg(long)]
        form: PathBuf,
    },
    /// Ordinary / non-ordinary decomposition under U_p.
    Decompose {
        #[arg(long)]
        weight: u32,
        #[arg(long, value_enum, default_value = "cusp")]
        kind: KindArg,
    },
    /// Hilbert function of a truncated local ring.
    Hilbert {
        #[arg(long)]
        ring: PathBuf,
        #[arg(long)]
        trunc: u32,
        /// Also test regularity of this element up to the given degree.
        #[arg(long, requires = "up_to")]
        regular: Option<String>,
        #[arg(long)]
        up_to: Option<u32>,
    },
    /// Coefficientwise convergence of Hilbert functions along a sequence of rings.
    HilbertCompare {
        /// JSON list of ring presentations.
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        imax: u32,
        #[arg(long)]
        trunc: Option<u32>,
    },
    /// Ultraproducts and patching on a JSON scenario.
    Ultrapatch {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        depth: usize,
    },
}

/// Settled global options.
struct Settings {
    p: Option<u64>,
    prec: Option<usize>,
    format: Option<Format>,
    jobs: Option<usize>,
}

impl Settings {
    fn ctx(&self) -> Result<FieldContext> {
        let p = self.p.ok_or_else(|| Error::Invalid("--p is required (flag or config file)".into()))?;
        FieldContext::new(p)
    }
}

/// Rendered output and whether every verdict in it held.
struct Rendered {
    body: String,
    ok: bool,
}

impl Rendered {
    fn json<T: Serialize>(value: &T, format: Option<Format>, ok: bool) -> Result<Self> {
        let body = match format {
            None | Some(Format::Json) => serde_json::to_string(value),
            Some(Format::Text) => serde_json::to_string_pretty(value),
            Some(Format::Csv) => return Err(Error::Invalid("this command has no CSV output".into())),
        }
        .map_err(|e| Error::Invalid(format!("serialization failed: {e}")))?;
        Ok(Rendered { body: body + "\n", ok })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn eigensystem(path: &Path) -> Result<Vec<(u64, u64)>> {
    let raw: BTreeMap<String, u64> = read_json(path)?;
    let mut out = raw
        .into_iter()
        .map(|(k, v)| {
            let l = k.trim_start_matches('T').parse::<u64>().map_err(|_| Error::Parse(format!("bad key '{k}'")))?;
            Ok((l, v))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    Ok(out)
}

fn matrix_rows(m: &modpforms::Matrix) -> Vec<Vec<u64>> {
    m.to_rows()
}

fn run(cmd: &Command, s: &Settings) -> Result<Rendered> {
    let fmt = s.format;
    match cmd {
        Command::Basis { weight, kind } => {
            let ctx = s.ctx()?;
            let prec = s.prec.unwrap_or_else(|| sturm(*weight));
            let space = level1::basis(ctx, *weight, (*kind).into(), prec)?;
            let body = match fmt {
                None | Some(Format::Text) => {
                    space.basis().iter().map(|f| f.to_text(*weight as i64) + "\n").collect::<String>()
                }
                Some(Format::Csv) => space
                    .basis()
                    .iter()
                    .map(|f| {
                        let r: Vec<String> = f.residues().unwrap().iter().map(|c| c.to_string()).collect();
                        r.join(",") + "\n"
                    })
                    .collect(),
                Some(Format::Json) => {
                    let rows: Vec<&[u64]> = space.basis().iter().map(|f| f.residues().unwrap()).collect();
                    json!({"p": ctx.p(), "weight": weight, "kind": space.kind(), "prec": prec, "basis": rows})
                        .to_string()
                        + "\n"
                }
            };
            Ok(Rendered { body, ok: true })
        }
        Command::Hecke { weight, kind, op, apply: file } => {
            let op: HeckeOperatorLabel = op.parse()?;
            if let Some(path) = file {
                let (series, k) = QExpansion::parse_text(&read(path)?)?;
                let k = u32::try_from(k).map_err(|_| Error::UnsupportedWeight(k))?;
                let image = apply(&Form::new(k, series), op)?;
                return Ok(Rendered { body: image.series.to_text(image.weight as i64) + "\n", ok: true });
            }
            let ctx = s.ctx()?;
            let weight = weight.ok_or_else(|| Error::Invalid("--weight or --apply is required".into()))?;
            let prec = s.prec.unwrap_or_else(|| input_precision(&[op], sturm(weight), ctx.p()).max(sturm(weight)));
            let space = level1::basis(ctx, weight, (*kind).into(), prec)?;
            let m = operator_matrix(&space, op)?;
            if matches!(fmt, None | Some(Format::Csv)) {
                let body = matrix_rows(&m)
                    .iter()
                    .map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",") + "\n")
                    .collect();
                return Ok(Rendered { body, ok: true });
            }
            let value = json!({
                "inputs": {"p": ctx.p(), "weight": weight, "kind": space.kind(), "op": op.to_string(), "prec": prec},
                "dim": space.dim(),
                "matrix": matrix_rows(&m),
                "charpoly": m.charpoly(),
            });
            Rendered::json(&value, fmt, true)
        }
        Command::HeckeAlgebra { weight, kind, bound, anemic } => {
            let ctx = s.ctx()?;
            let bound = bound.unwrap_or_else(|| default_prime_bound(*weight));
            let prec = s.prec.unwrap_or_else(|| algebra_precision(ctx.p(), *weight, bound));
            let space = level1::basis(ctx, *weight, (*kind).into(), prec)?;
            let alg = generate_algebra(&space, bound, !anemic)?;
            let gens: Vec<String> = alg.generators.iter().map(|g| g.to_string()).collect();
            let charpolys: BTreeMap<String, Vec<u64>> = alg
                .generators
                .iter()
                .map(|g| Ok((g.to_string(), operator_matrix(&space, *g)?.charpoly())))
                .collect::<Result<_>>()?;
            let value = json!({
                "inputs": {"p": ctx.p(), "weight": weight, "kind": space.kind(), "bound": bound, "include_p": !anemic},
                "dims": {"space": space.dim(), "algebra": alg.dim},
                "generators": gens,
                "charpolys": charpolys,
                "degenerate": alg.is_degenerate(),
            });
            Rendered::json(&value, fmt, true)
        }
        Command::Duality { weight, bound, anemic } => {
            let ctx = s.ctx()?;
            let bound = bound.unwrap_or_else(|| default_prime_bound(*weight));
            let prec = s.prec.unwrap_or_else(|| algebra_precision(ctx.p(), *weight, bound));
            let space = level1::basis(ctx, *weight, SpaceKind::Cusp, prec)?;
            let rep = duality_pairing(&generate_algebra(&space, bound, !anemic)?, &space)?;
            let ok = rep.perfect;
            let value = json!({"inputs": {"p": ctx.p(), "weight": weight, "bound": bound}, "report": rep});
            Rendered::json(&value, fmt, ok)
        }
        Command::Cokernel { weight, kind, bound } => {
            let ctx = s.ctx()?;
            let kind: CokernelKind = kind.parse()?;
            let bound = bound.unwrap_or_else(|| default_prime_bound(*weight));
            let rep = cokernel_report_with(ctx, *weight, kind, bound)?;
            let ok = rep.verdict;
            Rendered::json(&rep, fmt, ok)
        }
        Command::SerreForms { weight, check, ell } => {
            let ctx = s.ctx()?;
            let rep = match check {
                CheckArg::Periodicity => periodicity_check(ctx, *weight, HeckeOperatorLabel::T(*ell))?,
                CheckArg::Twist => twist_check(ctx, *weight, *ell)?,
                CheckArg::Kpk => k_pk_check(ctx, *weight, *ell)?,
            };
            let ok = rep.verdict;
            Rendered::json(&rep, fmt, ok)
        }
        Command::Socle { weight, eigensystem: path } => {
            let ctx = s.ctx()?;
            let system = eigensystem(path)?;
            let dim = socle_dim(ctx, *weight, &system)?;
            let value = json!({
                "inputs": {"p": ctx.p(), "weight": weight, "eigensystem": system},
                "socle_dim": dim,
                "at_most_one": dim <= 1,
                "level": "eigensystem-level",
            });
            Rendered::json(&value, fmt, true)
        }
        Command::SerreWeight { descriptor, trace } => {
            let d: ResidualDescriptor = read_json(descriptor)?;
            let rep = serreweight::report(&d)?;
            let value = if *trace {
                json!({"k": rep.k, "k_no": rep.k_no, "case_trace": rep.case_trace})
            } else {
                json!({"k": rep.k, "k_no": rep.k_no})
            };
            Rendered::json(&value, fmt, true)
        }
        Command::NoScan { eigensystem: path, kmax } => {
            let ctx = s.ctx()?;
            let system = eigensystem(path)?;
            let weights: Vec<u32> = (2..=*kmax).collect();
            let compute = || {
                weights
                    .par_iter()
                    .map(|&k| Ok((k, nonordinary_eigenspace_dim(ctx, k, &system)?)))
                    .collect::<Result<Vec<_>>>()
            };
            let dims = match s.jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
                    .install(compute)?,
                None => compute()?,
            };
            Rendered::json(&scan_report(ctx, &system, *kmax, dims), fmt, true)
        }
        Command::Filtration { form } => {
            let (series, k) = QExpansion::parse_text(&read(form)?)?;
            let k = u32::try_from(k).map_err(|_| Error::UnsupportedWeight(k))?;
            let w = filtration(&Form::new(k, series))?;
            let value = json!({"weight": k, "filtration": w.value(), "zero": w.value().is_none()});
            Rendered::json(&value, fmt, true)
        }
        Command::Decompose { weight, kind } => {
            let ctx = s.ctx()?;
            let prec = s.prec.unwrap_or(ctx.p() as usize * sturm(*weight));
            let space = level1::basis(ctx, *weight, (*kind).into(), prec)?;
            let d = ord_no_decompose(&space)?;
            let ok = d.ordinary_is_invertible() && d.nonordinary_is_nilpotent();
            let value = json!({
                "inputs": {"p": ctx.p(), "weight": weight, "kind": space.kind(), "prec": prec},
                "dims": {"space": space.dim(), "ordinary": d.ordinary.dim(), "nonordinary": d.nonordinary.dim()},
                "up_matrix": matrix_rows(&d.up_matrix),
                "charpoly_up": d.up_matrix.charpoly(),
                "verdicts": {"ordinary_invertible": d.ordinary_is_invertible(), "nonordinary_nilpotent": d.nonordinary_is_nilpotent()},
            });
            Rendered::json(&value, fmt, ok)
        }
        Command::Hilbert { ring, trunc, regular, up_to } => {
            let pres: RingPresentation = read_json(ring)?;
            let r = TruncatedLocalRing::from_presentation(&pres, *trunc)?;
            let h = r.hilbert_function();
            let regularity = match (regular, up_to) {
                (Some(f), Some(d)) => Some(r.is_regular_up_to(&Poly::parse(r.ctx(), r.vars(), f)?, *d)?),
                _ => None,
            };
            let body = match fmt {
                None | Some(Format::Csv) => {
                    let mut out = h.to_csv();
                    if let Some(v) = regularity {
                        out.push_str(&format!("# regular up to {}: {v}\n", up_to.unwrap()));
                    }
                    out
                }
                Some(Format::Text) => {
                    let vals: Vec<String> = h.coeffs.iter().map(|c| c.to_string()).collect();
                    vals.join(" ") + "\n"
                }
                Some(Format::Json) => {
                    json!({"trunc": trunc, "hilbert": h.coeffs, "regular_up_to": regularity.map(|v| json!({"degree": up_to, "verdict": v}))})
                        .to_string()
                        + "\n"
                }
            };
            Ok(Rendered { body, ok: true })
        }
        Command::HilbertCompare { sequence, target, imax, trunc } => {
            let d = trunc.unwrap_or(*imax);
            let seq: Vec<RingPresentation> = read_json(sequence)?;
            let seq = seq.iter().map(|p| TruncatedLocalRing::from_presentation(p, d)).collect::<Result<Vec<_>>>()?;
            let target = TruncatedLocalRing::from_presentation(&read_json(target)?, d)?;
            let rep = hilbert_limit_compare(&seq, &target, *imax)?;
            let rows: Vec<_> = rep
                .iter()
                .map(|c| {
                    let stab = c.stabilizes_at.map(|i| json!(i)).unwrap_or(json!("NOT-STABILIZED"));
                    json!({"i": c.i, "target": c.target, "values": c.values, "stabilizes_at": stab})
                })
                .collect();
            Rendered::json(&json!({"i_max": imax, "trunc": d, "coefficients": rows}), fmt, true)
        }
        Command::Ultrapatch { scenario: path, depth } => {
            let sc: scenario::Scenario = read_json(path)?;
            let rep = scenario::run(&sc, *depth)?;
            let ok = rep.verdict;
            Rendered::json(&rep, fmt, ok)
        }
    }
}

fn settle(global: &Global) -> Result<Settings> {
    let cfg = match &global.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let cfg_format = match cfg.format.as_deref() {
        None => None,
        Some(f) => Some(Format::from_str(f, true).map_err(|_| Error::Parse(format!("config: unknown format '{f}'")))?),
    };
    Ok(Settings {
        p: global.p.or(cfg.p),
        prec: global.prec.or(cfg.prec),
        format: global.format.or(cfg_format),
        jobs: global.jobs.or(cfg.jobs),
    })
}

fn emit(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| Error::Invalid(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settle(&cli.global).and_then(|s| run(&cli.command, &s));
    match result.and_then(|r| emit(&r.body, cli.global.out.as_deref()).map(|_| r.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let report = json!({"error": e.kind(), "message": e.to_string()});
            eprintln!("{report}");
            ExitCode::from(if e.is_invariant_violation() { 1 } else { 2 })
        }
    }
}

