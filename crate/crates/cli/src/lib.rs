//! Command implementations behind the `chorefair` binary.
//!
//! Every command reads JSON files, writes pretty-printed JSON, and reports
//! failures through [`CliError`], whose [`CliError::exit_code`] is the
//! process status.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chorefair::equilibrium::{
    approx_ceei, default_epsilon, exact_ceei, verify_fisher_equilibrium, EquilibriumReport, SearchLimits,
};
use chorefair::rational::{int, parse_rat, serde_rat};
use chorefair::surplus::{fair_and_efficient, CeeiSolver, SolveOptions};
use chorefair::three_agent::solve_three;
use chorefair::verify::{
    check_ef1, check_efx, check_fisher_eq, check_fpo, check_nondegenerate, check_pef1, check_po_brute,
    check_proportional, check_tefx, Certificate, VerifyLimits,
};
use chorefair::{ChoreCopy, Instance, MarketOutcome, PriceVector, Rat, SurplusAllocation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Library(#[from] chorefair::Error),
    /// The checked property does not hold; the certificate was still written.
    #[error("property {0} does not hold")]
    Violated(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use chorefair::Error as E;
        match self {
            CliError::Violated(_) => 1,
            CliError::Input(_) => 2,
            CliError::Library(
                E::IndexOutOfRange { .. }
                | E::InvalidInput(_)
                | E::NoChores
                | E::ZeroDisutility { .. }
                | E::InstanceTooLarge(_)
                | E::WrongAgentCount(_),
            ) => 2,
            CliError::Library(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses JSON, reporting the failing field path and line/column.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            inner.to_string()
        } else {
            format!("at field `{path}`: {inner}")
        }
    })
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}

pub fn read_instance(path: &Path) -> CliResult<Instance> {
    read_json(path)
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub agents: usize,
    pub chores: usize,
    pub maxd: u32,
    pub seed: u64,
}

/// Uniform integer disutilities in `[1, maxd]` from a seeded ChaCha stream,
/// row by row.
pub fn generate(p: &GenParams) -> CliResult<Instance> {
    if p.agents == 0 {
        return Err(CliError::Input("--agents must be at least 1".into()));
    }
    if p.maxd == 0 {
        return Err(CliError::Input("--maxd must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rows: Vec<Vec<i64>> = (0..p.agents)
        .map(|_| (0..p.chores).map(|_| rng.gen_range(1..=i64::from(p.maxd))).collect())
        .collect();
    let rows = rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect();
    Ok(Instance::with_chores(rows, Some(p.chores))?)
}

pub fn cmd_gen(p: &GenParams, out: Option<&Path>) -> CliResult<()> {
    emit(out, &to_pretty(&generate(p)?))
}

#[derive(Debug, Clone, Default)]
pub struct SurplusFlags {
    pub exact: bool,
    pub epsilon: Option<String>,
    pub trace: Option<PathBuf>,
}

#[derive(Serialize)]
struct SurplusTrace<'a> {
    events: &'a [chorefair::surplus::TraceEvent],
    #[serde(with = "serde_rat::matrix")]
    checkpoints: Vec<Vec<Rat>>,
}

pub fn cmd_solve_surplus(input: &Path, out: Option<&Path>, flags: &SurplusFlags) -> CliResult<()> {
    let inst = read_instance(input)?;
    let epsilon = flags
        .epsilon
        .as_deref()
        .map(|s| parse_rat(s).map_err(|e| CliError::Input(format!("--epsilon: {e}"))))
        .transpose()?;
    let opts = SolveOptions {
        solver: if flags.exact {
            CeeiSolver::Exact
        } else {
            CeeiSolver::Approx
        },
        epsilon,
        ..SolveOptions::default()
    };
    let result = fair_and_efficient(&inst, &opts)?;
    if let Some(t) = &flags.trace {
        let trace = SurplusTrace {
            events: &result.trace,
            checkpoints: result.checkpoints.clone(),
        };
        emit(Some(t), &to_pretty(&trace))?;
    }
    emit(out, &to_pretty(&result))
}

pub fn cmd_solve_three(input: &Path, out: Option<&Path>, trace: Option<&Path>) -> CliResult<()> {
    let inst = read_instance(input)?;
    let result = solve_three(&inst)?;
    if let Some(t) = trace {
        emit(Some(t), &to_pretty(&result.trace))?;
    }
    #[derive(Serialize)]
    struct Output<'a> {
        kind: chorefair::three_agent::Kind,
        allocation: &'a SurplusAllocation,
        assignment: [usize; 3],
        iterations: usize,
        #[serde(with = "serde_rat")]
        perturbation: Rat,
        certificates: [&'a Certificate; 1],
    }
    let o = Output {
        kind: result.kind,
        allocation: &result.allocation,
        assignment: result.assignment,
        iterations: result.iterations,
        perturbation: result.perturbation.clone(),
        certificates: [&result.certificate],
    };
    emit(out, &to_pretty(&o))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PropertyFlag {
    Ef1,
    Efx,
    Tefx,
    Prop,
    Pef1,
    Po,
    Fpo,
    Fisher,
    Nondeg,
}

/// Either a bare list of bundles or any object with an "allocation" field
/// (and optionally "prices"), such as the output of a solve command.
fn read_allocation(path: &Path, inst: &Instance) -> CliResult<(SurplusAllocation, Option<PriceVector>)> {
    let v: Value = read_json(path)?;
    let (bundles, prices) = match v {
        Value::Array(_) => (v, None),
        Value::Object(mut map) => {
            let b = map
                .remove("allocation")
                .ok_or_else(|| CliError::Input(format!("{}: missing field `allocation`", path.display())))?;
            (b, map.remove("prices"))
        }
        _ => {
            return Err(CliError::Input(format!(
                "{}: expected a list of bundles or an object with `allocation`",
                path.display()
            )))
        }
    };
    let bundles: Vec<Vec<ChoreCopy>> =
        parse_json(&bundles.to_string()).map_err(|e| CliError::Input(format!("{}: allocation {e}", path.display())))?;
    let alloc = SurplusAllocation::new(
        bundles.into_iter().map(|b| b.into_iter().collect()).collect(),
        inst.chores(),
    )?;
    let prices = prices
        .map(|p| parse_json::<PriceVector>(&p.to_string()))
        .transpose()
        .map_err(|e| CliError::Input(format!("{}: prices {e}", path.display())))?;
    Ok((alloc, prices))
}

fn read_prices(path: &Path) -> CliResult<PriceVector> {
    let v: Value = read_json(path)?;
    let v = match v {
        Value::Object(mut map) => map
            .remove("prices")
            .ok_or_else(|| CliError::Input(format!("{}: missing field `prices`", path.display())))?,
        other => other,
    };
    parse_json(&v.to_string()).map_err(|e| CliError::Input(format!("{}: prices {e}", path.display())))
}

/// Checks one property and prints its certificate; `Violated` when it fails.
pub fn cmd_verify(
    input: &Path,
    alloc: Option<&Path>,
    property: PropertyFlag,
    prices: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<Certificate> {
    let inst = read_instance(input)?;
    let limits = VerifyLimits::default();
    let cert = if property == PropertyFlag::Nondeg {
        check_nondegenerate(&inst, limits)?
    } else {
        let path = alloc.ok_or_else(|| CliError::Input("--alloc is required for this property".into()))?;
        let (a, embedded) = read_allocation(path, &inst)?;
        let p = match prices {
            Some(pp) => Some(read_prices(pp)?),
            None => embedded,
        };
        let need_prices = || {
            p.clone()
                .ok_or_else(|| CliError::Input("this property needs prices (--prices)".into()))
        };
        match property {
            PropertyFlag::Ef1 => check_ef1(&inst, &a)?,
            PropertyFlag::Efx => check_efx(&inst, &a)?,
            PropertyFlag::Tefx => check_tefx(&inst, &a)?,
            PropertyFlag::Prop => check_proportional(&inst, &a)?,
            PropertyFlag::Pef1 => check_pef1(&need_prices()?, &a)?,
            PropertyFlag::Po => check_po_brute(&inst, &a, limits)?,
            PropertyFlag::Fpo => check_fpo(&inst, &a, limits)?,
            PropertyFlag::Fisher => check_fisher_eq(&inst, &a, &need_prices()?)?,
            PropertyFlag::Nondeg => unreachable!(),
        }
    };
    emit(out, &to_pretty(&cert))?;
    if cert.holds {
        Ok(cert)
    } else {
        Err(CliError::Violated(format!("{:?}", cert.property)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleFlag {
    CeeiExact,
    CeeiApprox,
    PoBrute,
}

#[derive(Serialize, Deserialize)]
pub struct OracleMarket {
    pub outcome: MarketOutcome,
    pub report: EquilibriumReport,
}

pub fn cmd_oracle(
    input: &Path,
    which: OracleFlag,
    alloc: Option<&Path>,
    epsilon: Option<&str>,
    out: Option<&Path>,
) -> CliResult<()> {
    let inst = read_instance(input)?;
    let text = match which {
        OracleFlag::CeeiExact | OracleFlag::CeeiApprox => {
            let outcome = if which == OracleFlag::CeeiExact {
                exact_ceei(&inst, SearchLimits::default())?
            } else {
                let eps = match epsilon {
                    Some(s) => parse_rat(s).map_err(|e| CliError::Input(format!("--epsilon: {e}")))?,
                    None if inst.chores() == 0 => return Err(chorefair::Error::NoChores.into()),
                    None => default_epsilon(&inst),
                };
                approx_ceei(&inst, &eps)?
            };
            let report = verify_fisher_equilibrium(&inst, &outcome);
            to_pretty(&OracleMarket { outcome, report })
        }
        OracleFlag::PoBrute => {
            let path = alloc.ok_or_else(|| CliError::Input("po-brute needs --alloc".into()))?;
            let (a, _) = read_allocation(path, &inst)?;
            to_pretty(&check_po_brute(&inst, &a, VerifyLimits::default())?)
        }
    };
    emit(out, &text)
}
