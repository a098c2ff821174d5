//! Command-line front end for the coarse-cancel workbench.
//!
//! Every command produces a JSON report and an exit code: 0 when the run
//! succeeds, 2 when a certificate or hypothesis check fails, 1 on error.

pub mod corpus;
pub mod io;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use coarse_cancel::action::{self, acylindricity_table, classify, translation_length};
use coarse_cancel::coneoff::{build_coneoff, refinement_change, verify_cone_ball, verify_sandwich, FamilySpec};
use coarse_cancel::geodesy::{self, quasi_convexity_constant, strong_quasi_convexity_check, subset_from_ids, subset_ids};
use coarse_cancel::grouptheory::{
    automorphisms, bass_serre_window, group_exponent, has_involution, holomorph_permutations, malnormality_check,
    permutation_order, AmalgamSpec, AUT_CAP,
};
use coarse_cancel::invariants::{best_nu_bound, build_ledger, invariant_e, kappa_for_hyperbolic, InvariantLedger, LedgerOptions};
use coarse_cancel::metric::{hyperbolicity_delta, verify_four_point_forms, verify_metric_inequalities, FiniteMetricSpace};
use coarse_cancel::smallcancel::{
    certify_small_cancellation, critical_exponent_n0, critical_exponent_n1, kappa_mcg_style, lambda_n,
    propagate_ledger, quotient_iteration_trace, rescale_to_fit, Constants, Exponent, FamilyStats,
};

use crate::io::{load_acyl_rows, load_constants, load_graph, load_group, load_window, read_json, AmalgamSource, WindowBundle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coarse-cancel", version, about = "Coarse hyperbolic geometry and small cancellation on finite windows")]
pub struct Cli {
    /// Worker threads for the parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Absolute comparison tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Seed for sampled verifications.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Constants file (canonical when omitted).
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Four-point hyperbolicity constant of a graph.
    Delta {
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        subdivide: usize,
        /// Also check the five-point inequalities on up to this many tuples.
        #[arg(long)]
        five_point: Option<u64>,
    },
    /// Quasi-convexity and strong quasi-convexity of a subset.
    Qc(SubsetArgs),
    /// Hull of a subset and its quasi-convexity constant.
    Hull(SubsetArgs),
    /// Isometries of a group acting on a window.
    #[command(subcommand)]
    Act(ActCommand),
    /// Finite group tables and their holomorphs.
    #[command(subcommand)]
    Group(GroupCommand),
    /// Bass-Serre tree windows of amalgamated products.
    #[command(subcommand)]
    Tree(TreeCommand),
    /// Action invariants and the ledger.
    #[command(subcommand)]
    Inv(InvCommand),
    /// Cone-off of a graph over a family of subsets.
    #[command(subcommand)]
    Coneoff(ConeoffCommand),
    /// Check the small cancellation hypotheses for given family statistics.
    Certify { stats: PathBuf },
    /// Critical exponent n0 of the constants.
    N0 {
        #[arg(long, default_value_t = 1)]
        nu0: u64,
    },
    /// Check the induction hypotheses and propagate a ledger without rescaling.
    Propagate(LedgerStepArgs),
    /// Iterate quotient steps on the rescaled space and report stable-length decay.
    Trace {
        #[command(flatten)]
        step: LedgerStepArgs,
        /// Initial stable length of the tracked element.
        #[arg(long, default_value_t = 1.0)]
        ell0: f64,
        /// Rescale the ledger to meet delta <= delta1 and the A bound first.
        #[arg(long)]
        rescale: bool,
    },
    /// Run a corpus manifest and diff against its goldens.
    Corpus {
        manifest: PathBuf,
        /// Rewrite the goldens from this run.
        #[arg(long)]
        bless: bool,
    },
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    pub graph: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub subset: Vec<String>,
    /// δ used by the strong check and the hull (default: the graph's own).
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Graph file, or a window bundle from `tree build`.
    pub space: PathBuf,
    /// Action file when `space` is a bare graph.
    pub action: Option<PathBuf>,
    #[arg(long)]
    pub max_word_length: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ActCommand {
    /// Classify a word as elliptic or loxodromic on the window.
    Classify {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 6)]
        max_power: usize,
    },
    /// Acylindricity counts N(d) at displacement l.
    Acyl {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 0.0)]
        l: f64,
    },
    /// Points displaced less than len + 8δ.
    Axis {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        word: String,
        #[arg(long)]
        delta: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GroupCommand {
    /// Order and exponent of the holomorph F ⋊ Aut F.
    Hol { group: PathBuf },
    /// Order, exponent and involutions of a group.
    Exp { group: PathBuf },
    /// Whether a subgroup is malnormal.
    Malnormal {
        group: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        subgroup: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TreeCommand {
    /// Ball of the Bass-Serre tree of an amalgam with its generators acting.
    Build {
        amalgam: PathBuf,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        #[arg(long, default_value_t = 4)]
        max_word_length: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum InvCommand {
    /// Estimate (δ, rinj, e, ν, A) on a window with bound directions.
    Ledger {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 4)]
        word_cap: usize,
        #[arg(long, default_value_t = 4)]
        max_power: usize,
        /// Multiple of δ used as l in the acylindricity table.
        #[arg(long, default_value_t = 166.0)]
        acyl_factor: f64,
        /// Structural upper bound on A.
        #[arg(long)]
        a_upper: Option<f64>,
        /// Maximal finite normal subgroups of the maximal loxodromic subgroups.
        #[arg(long = "finite-normal")]
        finite_normal: Vec<PathBuf>,
        #[arg(long)]
        no_involution: Option<bool>,
    },
    /// lcm of holomorph exponents.
    E { groups: Vec<PathBuf> },
    /// ν ≤ N + M from an acylindricity table.
    NuBound {
        table: PathBuf,
        #[arg(long)]
        rinj: f64,
    },
    /// κ for a hyperbolic group, or lcm(e, index) when --index is given.
    Kappa {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        e: u64,
        #[arg(long)]
        index: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct ConeoffArgs {
    pub graph: PathBuf,
    pub family: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 4)]
    pub radial: usize,
    /// δ for the strong quasi-convexity warnings (default: the graph's own).
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ConeoffCommand {
    /// Sampled cone-off with its chain metric.
    Build(ConeoffArgs),
    /// Sandwich, cone-ball and refinement checks.
    Verify(ConeoffArgs),
}

#[derive(Debug, Args)]
pub struct LedgerStepArgs {
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Exponent of the quotient.
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub nu0: u64,
    /// Critical exponent n1 (default: smallest admissible for the ledger's rinj).
    #[arg(long)]
    pub n1: Option<u64>,
}

/// A finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit: i32,
}

/// Parse-free entry point: set tolerance, build the worker pool, dispatch.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
        bail!("tolerance must be positive");
    }
    if cli.threads == Some(0) {
        bail!("threads must be at least 1");
    }
    coarse_cancel::set_tolerance(cli.tolerance);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    pool.install(|| dispatch(cli, Path::new(".")))
}

fn envelope(cli: &Cli, name: &str, consts: &Constants, result: Value, exit: i32) -> Outcome {
    let report = json!({
        "command": name,
        "mode": consts.mode,
        "tolerance": cli.tolerance,
        "seed": cli.seed,
        "result": result,
    });
    Outcome { report, exit }
}

fn ok(cli: &Cli, name: &str, consts: &Constants, result: Value) -> Result<Outcome> {
    Ok(envelope(cli, name, consts, result, EXIT_OK))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn space_of(graph: &Path, subdivide: usize) -> Result<FiniteMetricSpace> {
    let g = load_graph(graph)?.subdivide(subdivide)?;
    Ok(FiniteMetricSpace::from_graph(&g)?)
}

/// Run one command inside the current pool; relative paths resolve against `base`.
pub fn dispatch(cli: &Cli, base: &Path) -> Result<Outcome> {
    let r = |p: &PathBuf| resolve(base, p);
    let consts = load_constants(cli.constants.as_ref().map(r).as_deref())?;
    match &cli.command {
        Command::Delta { graph, subdivide, five_point } => {
            let sp = space_of(&r(graph), *subdivide)?;
            let rep = hyperbolicity_delta(&sp);
            let forms = verify_four_point_forms(&sp, rep.delta);
            let five = five_point.map(|b| verify_metric_inequalities(&sp, rep.delta, b, cli.seed));
            let mut out = json!({ "points": sp.len(), "delta": rep.delta, "witness": rep.witness, "four_point_forms": forms });
            if let Some(f) = five {
                out["five_point"] = serde_json::to_value(f)?;
            }
            ok(cli, "delta", &consts, out)
        }
        Command::Qc(a) => {
            let sp = space_of(&r(&a.graph), 1)?;
            let ys = subset_from_ids(&sp, &a.subset)?;
            let delta = a.delta.unwrap_or_else(|| hyperbolicity_delta(&sp).delta);
            let alpha = quasi_convexity_constant(&sp, &ys);
            let strong = strong_quasi_convexity_check(&sp, &ys, delta);
            ok(cli, "qc", &consts, json!({ "subset": subset_ids(&sp, &ys), "alpha": alpha, "strong": strong }))
        }
        Command::Hull(a) => {
            let sp = space_of(&r(&a.graph), 1)?;
            let ys = subset_from_ids(&sp, &a.subset)?;
            let delta = a.delta.unwrap_or_else(|| hyperbolicity_delta(&sp).delta);
            let h = geodesy::hull(&sp, &ys, delta);
            let alpha = quasi_convexity_constant(&sp, &h);
            let out = json!({ "delta": delta, "hull": subset_ids(&sp, &h), "alpha": alpha, "within_6delta": alpha <= 6.0 * delta + coarse_cancel::tol() });
            ok(cli, "hull", &consts, out)
        }
        Command::Act(c) => act(cli, &consts, c, base),
        Command::Group(c) => group(cli, &consts, c, base),
        Command::Tree(TreeCommand::Build { amalgam, radius, max_word_length }) => {
            let spec: AmalgamSpec = read_json(&r(amalgam))?;
            let (data, gens) = spec.build()?;
            let w = bass_serre_window(Arc::new(data), &gens, *radius, *max_word_length)?;
            let bundle = WindowBundle {
                graph: w.graph().cloned().context("tree window lost its graph")?,
                action: w.to_spec(),
                amalgam: Some(AmalgamSource { spec, radius: *radius }),
            };
            ok(cli, "tree build", &consts, serde_json::to_value(bundle)?)
        }
        Command::Inv(c) => inv(cli, &consts, c, base),
        Command::Coneoff(c) => coneoff(cli, &consts, c, base),
        Command::Certify { stats } => {
            #[derive(Deserialize)]
            struct Input {
                delta: f64,
                rho: f64,
                #[serde(flatten)]
                stats: FamilyStats,
            }
            let inp: Input = read_json(&r(stats))?;
            let cert = certify_small_cancellation(inp.delta, inp.rho, &inp.stats, &consts);
            let exit = if cert.overall { EXIT_OK } else { EXIT_FAILED };
            let out = json!({ "constants": consts, "certificate": cert });
            Ok(envelope(cli, "certify", &consts, out, exit))
        }
        Command::N0 { nu0 } => {
            let cn = critical_exponent_n0(&consts, *nu0)?;
            let lambda = match cn.n0 {
                Exponent::Exact { n } => Some(lambda_n(n, &consts)?.value),
                Exponent::Astronomical { .. } => None,
            };
            ok(cli, "n0", &consts, json!({ "constants": consts, "nu0": nu0, "critical": cn, "lambda_n0": lambda }))
        }
        Command::Propagate(s) => {
            let ledger: InvariantLedger = read_json(&r(&s.ledger))?;
            let n1 = pick_n1(&ledger, s, &consts)?;
            let mut ledgers = vec![ledger];
            let mut failure = None;
            for _ in 0..s.steps {
                match propagate_ledger(ledgers.last().unwrap(), &n1, s.n, s.nu0, &consts) {
                    Ok(l) => ledgers.push(l),
                    Err(coarse_cancel::Error::Precondition(m)) => {
                        failure = Some(m);
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let exit = if failure.is_some() { EXIT_FAILED } else { EXIT_OK };
            let out = json!({ "constants": consts, "n": s.n, "n1": n1, "ledgers": ledgers, "failure": failure });
            Ok(envelope(cli, "propagate", &consts, out, exit))
        }
        Command::Trace { step, ell0, rescale } => {
            let mut ledger: InvariantLedger = read_json(&r(&step.ledger))?;
            let mut scale = None;
            if *rescale {
                let (s, l) = rescale_to_fit(&ledger, step.nu0, &consts);
                scale = Some(s);
                ledger = l;
            }
            let n1 = pick_n1(&ledger, step, &consts)?;
            let tr = quotient_iteration_trace(&ledger, step.n, &n1, step.nu0, step.steps, *ell0, &consts)?;
            let exit = if tr.truncated.is_some() { EXIT_FAILED } else { EXIT_OK };
            let out = json!({ "constants": consts, "rescaled_by": scale, "trace": tr });
            Ok(envelope(cli, "trace", &consts, out, exit))
        }
        Command::Corpus { manifest, bless } => {
            let run = corpus::run_manifest(&r(manifest), *bless)?;
            let exit = if run.all_passed() { EXIT_OK } else { EXIT_ERROR };
            Ok(envelope(cli, "corpus", &consts, run.summary(), exit))
        }
    }
}

fn pick_n1(ledger: &InvariantLedger, s: &LedgerStepArgs, consts: &Constants) -> Result<Exponent> {
    Ok(match s.n1 {
        Some(n) => Exponent::Exact { n },
        None => {
            let n0 = critical_exponent_n0(consts, s.nu0)?.n0;
            critical_exponent_n1(ledger.rinj.value, &n0, consts)
        }
    })
}

fn act(cli: &Cli, consts: &Constants, c: &ActCommand, base: &Path) -> Result<Outcome> {
    let load = |w: &WindowArgs| load_window(&resolve(base, &w.space), w.action.as_ref().map(|p| resolve(base, p)).as_deref(), w.max_word_length);
    match c {
        ActCommand::Classify { window, word, max_power } => {
            let w = load(window)?;
            let g = w.parse(word)?;
            let out = match classify(&w, &g, *max_power) {
                Ok(cl) => json!({ "word": word, "classification": cl }),
                Err(coarse_cancel::Error::Precondition(m)) => json!({ "word": word, "classification": { "kind": "Inconclusive", "reason": m } }),
                Err(e) => return Err(e.into()),
            };
            ok(cli, "act classify", consts, out)
        }
        ActCommand::Acyl { window, l } => {
            let w = load(window)?;
            let rows = acylindricity_table(&w, *l)?;
            ok(cli, "act acyl", consts, json!({ "l": l, "max_word_length": w.max_word_length, "rows": rows }))
        }
        ActCommand::Axis { window, word, delta } => {
            let w = load(window)?;
            let g = w.parse(word)?;
            let delta = delta.unwrap_or_else(|| hyperbolicity_delta(&w.space).delta);
            let len = translation_length(&w, &g)?;
            let ax = action::axis(&w, &g, delta)?;
            ok(cli, "act axis", consts, json!({ "word": word, "delta": delta, "translation_length": len, "axis": subset_ids(&w.space, &ax) }))
        }
    }
}

fn group(cli: &Cli, consts: &Constants, c: &GroupCommand, base: &Path) -> Result<Outcome> {
    match c {
        GroupCommand::Hol { group } => {
            let f = load_group(&resolve(base, group))?;
            let auts = automorphisms(&f, AUT_CAP)?;
            let perms = holomorph_permutations(&f, AUT_CAP)?;
            let mut orders: Vec<u64> = perms.iter().map(|p| permutation_order(&p.2)).collect();
            orders.sort_unstable();
            orders.dedup();
            let exponent = orders.iter().fold(1u64, |a, &o| num_integer::lcm(a, o));
            let out = json!({ "order": f.order(), "aut_order": auts.len(), "hol_order": perms.len(), "hol_exponent": exponent, "element_orders": orders });
            ok(cli, "group hol", consts, out)
        }
        GroupCommand::Exp { group } => {
            let g = load_group(&resolve(base, group))?;
            ok(cli, "group exp", consts, json!({ "order": g.order(), "exponent": group_exponent(&g), "has_involution": has_involution(&g) }))
        }
        GroupCommand::Malnormal { group, subgroup } => {
            let g = load_group(&resolve(base, group))?;
            let h = subgroup.iter().map(|x| g.index_of(x)).collect::<coarse_cancel::Result<Vec<usize>>>()?;
            ok(cli, "group malnormal", consts, json!({ "subgroup": subgroup, "malnormal": malnormality_check(&g, &h)? }))
        }
    }
}

fn inv(cli: &Cli, consts: &Constants, c: &InvCommand, base: &Path) -> Result<Outcome> {
    match c {
        InvCommand::Ledger { window, word_cap, max_power, acyl_factor, a_upper, finite_normal, no_involution } => {
            let w = load_window(&resolve(base, &window.space), window.action.as_ref().map(|p| resolve(base, p)).as_deref(), window.max_word_length)?;
            let mut opts = LedgerOptions {
                word_cap: *word_cap,
                max_power: *max_power,
                l_s: consts.l_s,
                acyl_l_factor: *acyl_factor,
                a_upper: *a_upper,
                no_involution: *no_involution,
                ..Default::default()
            };
            if !finite_normal.is_empty() {
                opts.finite_normal = finite_normal.iter().map(|p| load_group(&resolve(base, p))).collect::<Result<_>>()?;
            }
            let ledger = build_ledger(&w, &opts)?;
            ok(cli, "inv ledger", consts, json!({ "L_S": consts.l_s, "ledger": ledger }))
        }
        InvCommand::E { groups } => {
            let gs = groups.iter().map(|p| load_group(&resolve(base, p))).collect::<Result<Vec<_>>>()?;
            ok(cli, "inv e", consts, json!({ "e": invariant_e(&gs, AUT_CAP)? }))
        }
        InvCommand::NuBound { table, rinj } => {
            let rows = load_acyl_rows(&resolve(base, table))?;
            let (nu, row) = best_nu_bound(&rows, *rinj)?;
            ok(cli, "inv nu-bound", consts, json!({ "nu": nu, "row": row, "rinj": rinj }))
        }
        InvCommand::Kappa { orders, e, index } => {
            let out = match index {
                Some(i) => json!({ "kappa": kappa_mcg_style(*e, *i)?, "rule": "lcm(e, index)" }),
                None => json!({ "kappa": kappa_for_hyperbolic(orders, *e)?, "rule": "lcm(e, elliptic orders)" }),
            };
            ok(cli, "inv kappa", consts, out)
        }
    }
}

fn coneoff(cli: &Cli, consts: &Constants, c: &ConeoffCommand, base: &Path) -> Result<Outcome> {
    let (ConeoffCommand::Build(a) | ConeoffCommand::Verify(a)) = c;
    let sp = space_of(&resolve(base, &a.graph), 1)?;
    let fam: FamilySpec = read_json(&resolve(base, &a.family))?;
    let subsets = fam.subsets(&sp)?;
    let delta = a.delta.unwrap_or_else(|| hyperbolicity_delta(&sp).delta);
    let co = build_coneoff(&sp, &subsets, a.rho, a.radial, delta)?;
    match c {
        ConeoffCommand::Build(_) => {
            let sample = hyperbolicity_delta(&co.space);
            let out = json!({
                "rho": a.rho,
                "radial": a.radial,
                "base_points": sp.len(),
                "sample_points": co.points.len(),
                "ids": co.space.ids(),
                "delta_base": delta,
                "delta_sample": sample.delta,
                "warnings": co.warnings,
                "sandwich": verify_sandwich(&co),
            });
            ok(cli, "coneoff build", consts, out)
        }
        ConeoffCommand::Verify(_) => {
            let sandwich = verify_sandwich(&co);
            let ball = verify_cone_ball(&co);
            let fine = build_coneoff(&sp, &subsets, a.rho, 2 * a.radial, delta)?;
            let change = refinement_change(&co, &fine)?;
            // extra samples can only shorten chains
            let refinement_ok = change <= coarse_cancel::tol();
            let pass = sandwich.holds && ball.violations.is_empty() && refinement_ok;
            let out = json!({
                "rho": a.rho,
                "sandwich": sandwich,
                "cone_ball": ball,
                "refinement_change": change,
                "refinement_ok": refinement_ok,
                "warnings": co.warnings,
            });
            Ok(envelope(cli, "coneoff verify", consts, out, if pass { EXIT_OK } else { EXIT_FAILED }))
        }
    }
}
