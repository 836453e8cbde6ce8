//! Command-line surface for the squier library.
//!
//! One command per process; all outputs are deterministic for identical
//! inputs, and files are written atomically (temp file plus rename). Exit
//! codes: 0 success, 1 verification failure, 2 inconclusive within a
//! budget, 3 input error.

mod rees;

use std::collections::BTreeSet;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use squier::extension::{
    assemble_x, fdt_base_finite_regular, restrict_base, Budgets, ExtensionError,
};
use squier::graph::{parse_path, FindPathError, PathFinder};
use squier::homotopy::{
    critical_pair_base, homotopic_bounded, parse_base, serialize_base, validate_base, Homotopy,
    HomotopyBase,
};
use squier::oracle::{
    self, enumerate, from_table, green, maximal_subgroups, right_cosets, serialize_table,
    tables_isomorphic, EnumerateError, FiniteSemigroup,
};
use squier::subgroup::{base_kw, build_context, subgroup_presentation};
use squier::words::{
    parse_presentation, serialize_presentation, Interner, Presentation, Word,
};

const DEFAULT_LIMIT: usize = 1000;

#[derive(Parser)]
#[command(name = "squier", version, about = "Homotopy bases for semigroup presentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BudgetArgs {
    /// Node budget for word-identification and path searches.
    #[arg(long, default_value_t = oracle::DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    /// Move budget for homotopy searches.
    #[arg(long, default_value_t = 10_000)]
    move_budget: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the finite semigroup defined by a presentation or table.
    Enumerate {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Green's relations, idempotents and maximal subgroups.
    Green {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Right cosets of a subgroup under the generator action.
    Cosets {
        input: PathBuf,
        /// Subgroup as `;`-separated words, letters space-separated.
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// The coset-alphabet presentation of a subgroup.
    SubgroupPresent {
        input: PathBuf,
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        /// Output `.sgp` path; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// The homotopy base K ∪ W for a subgroup, plus its presentation.
    SubgroupBase {
        input: PathBuf,
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        /// Homotopy base for the input presentation; defaults to the
        /// critical-pair base of a complete system.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Output `.hb` path; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the subgroup presentation.
        #[arg(long)]
        pres_out: Option<PathBuf>,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// The ideal-extension presentation of a Rees matrix file.
    ExtensionPresent {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// The homotopy base X for an ideal extension, plus its presentation.
    ExtensionBase {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        /// Homotopy base for the group presentation; defaults to the
        /// critical-pair base of a complete system.
        #[arg(long)]
        group_base: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        pres_out: Option<PathBuf>,
        /// Word-count cap for the X3 enumeration.
        #[arg(long, default_value_t = 2_000_000)]
        x3_budget: usize,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Presentation and homotopy base for a finite regular semigroup table.
    FdtRegular {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        pres_out: Option<PathBuf>,
        #[arg(long, default_value_t = 2_000_000)]
        x3_budget: usize,
        /// Re-enumerate the output presentation and compare against the
        /// input table.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Validate every pair of a homotopy base over a presentation.
    VerifyBase {
        base: PathBuf,
        presentation: PathBuf,
    },
    /// Bounded homotopy search between two parallel paths modulo a base.
    HomotopyCheck {
        presentation: PathBuf,
        base: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
}

enum CmdError {
    /// Exit 1: a constructed or supplied object failed verification.
    Verification(String),
    /// Exit 2: a budgeted search was inconclusive.
    Inconclusive(String),
    /// Exit 3: unreadable or ill-formed input.
    Input(String),
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            CmdError::Verification(_) => 1,
            CmdError::Inconclusive(_) => 2,
            CmdError::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Verification(m) | CmdError::Inconclusive(m) | CmdError::Input(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CmdError {
    CmdError::Input(e.to_string())
}

fn map_enumerate_err(e: EnumerateError) -> CmdError {
    match e {
        EnumerateError::Undecided { .. } | EnumerateError::LimitExceeded { .. } => {
            CmdError::Inconclusive(e.to_string())
        }
        other => CmdError::Verification(other.to_string()),
    }
}

fn map_extension_err(e: ExtensionError) -> CmdError {
    match e {
        ExtensionError::Find(FindPathError::Inconclusive { .. }) => {
            CmdError::Inconclusive(e.to_string())
        }
        ExtensionError::X3Budget { .. } => CmdError::Inconclusive(e.to_string()),
        ExtensionError::Rees(_) | ExtensionError::BadEmbedding { .. } => input_err(e),
        other => CmdError::Verification(other.to_string()),
    }
}

fn read_file(path: &FsPath) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Atomic write: temp file in the target directory, then rename.
fn write_file(path: &FsPath, content: &str) -> Result<(), CmdError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)
        .and_then(|()| std::fs::rename(&tmp, path))
        .map_err(|e| CmdError::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), CmdError> {
    match output {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn header(verb: &str, budgets: &BudgetArgs, extra: &[(&str, usize)]) -> String {
    let mut out = format!("# squier {verb}\n# node-budget: {}\n", budgets.node_budget);
    for (k, v) in extra {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

/// Loads a `.sgp` or `.tbl` input as an oracle, returning the presentation
/// used for word input (the table presentation for `.tbl` files).
fn load_semigroup(
    path: &FsPath,
    limit: usize,
    node_budget: usize,
    interner: &mut Interner,
) -> Result<(Presentation, FiniteSemigroup), CmdError> {
    let text = read_file(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("tbl") => {
            let s = from_table(&text, interner).map_err(input_err)?;
            let (p, _) = oracle::table_presentation(&s, interner);
            Ok((p, s))
        }
        _ => {
            let p = parse_presentation(&text, interner).map_err(input_err)?;
            let s = enumerate(&p, limit, node_budget).map_err(map_enumerate_err)?;
            Ok((p, s))
        }
    }
}

/// Parses the `--subgroup` flag: `;`-separated words with space-separated
/// letters, evaluated to an element set.
fn parse_subgroup(
    flag: &str,
    p: &Presentation,
    s: &FiniteSemigroup,
    interner: &Interner,
) -> Result<BTreeSet<usize>, CmdError> {
    let by_name: std::collections::BTreeMap<String, squier::words::Letter> = p
        .alphabet()
        .iter()
        .map(|&l| (interner.name(l).to_string(), l))
        .collect();
    let mut out = BTreeSet::new();
    for item in flag.split(";") {
        let mut w = Word::empty();
        for name in item.split_whitespace() {
            let letter = by_name
                .get(name)
                .ok_or_else(|| CmdError::Input(format!("unknown letter `{name}` in --subgroup")))?;
            w.push(*letter);
        }
        if w.is_empty() {
            return Err(CmdError::Input("empty word in --subgroup".into()));
        }
        let elt = s
            .eval(&w)
            .map_err(|e| CmdError::Input(format!("cannot evaluate subgroup word: {e}")))?;
        out.insert(elt);
    }
    Ok(out)
}

fn base_for_presentation(
    p: &Presentation,
    supplied: &Option<PathBuf>,
    interner: &Interner,
) -> Result<HomotopyBase, CmdError> {
    match supplied {
        Some(path) => {
            let text = read_file(path)?;
            parse_base(&text, p, interner).map_err(input_err)
        }
        None => {
            let cert = oracle::certify_complete(p).map_err(|e| {
                CmdError::Input(format!(
                    "presentation is not a complete rewriting system ({e}); supply --base"
                ))
            })?;
            critical_pair_base(p, &cert).map_err(|e| CmdError::Verification(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let mut interner = Interner::new();
    match cli.command {
        Command::Enumerate {
            input,
            limit,
            budgets,
        } => {
            let (_, s) = load_semigroup(&input, limit, budgets.node_budget, &mut interner)?;
            println!("{} elements", s.size());
            print!("{}", serialize_table(&s, &interner));
            Ok(())
        }
        Command::Green {
            input,
            limit,
            budgets,
        } => {
            let (_, s) = load_semigroup(&input, limit, budgets.node_budget, &mut interner)?;
            let g = green(&s);
            let show = |name: &str, part: &oracle::Partition| {
                let classes: Vec<String> = part
                    .classes()
                    .iter()
                    .map(|class| {
                        let names: Vec<String> = class
                            .iter()
                            .map(|&x| s.display_element(x, &interner))
                            .collect();
                        format!("{{{}}}", names.join(" "))
                    })
                    .collect();
                println!("{name}: {}", classes.join(" "));
            };
            show("R-classes", &g.r);
            show("L-classes", &g.l);
            show("H-classes", &g.h);
            show("D-classes", &g.d);
            show("J-classes", &g.j);
            let idem: Vec<String> = g
                .idempotents
                .iter()
                .map(|&x| s.display_element(x, &interner))
                .collect();
            println!("idempotents: {}", idem.join(" "));
            let subs: Vec<String> = maximal_subgroups(&s, &g)
                .iter()
                .map(|class| {
                    let names: Vec<String> = class
                        .iter()
                        .map(|&x| s.display_element(x, &interner))
                        .collect();
                    format!("{{{}}}", names.join(" "))
                })
                .collect();
            println!("maximal subgroups: {}", subs.join(" "));
            Ok(())
        }
        Command::Cosets {
            input,
            subgroup,
            limit,
            budgets,
        } => {
            let (p, s) = load_semigroup(&input, limit, budgets.node_budget, &mut interner)?;
            let g = parse_subgroup(&subgroup, &p, &s, &interner)?;
            let fam = right_cosets(&s, &g, &p).map_err(|e| CmdError::Input(e.to_string()))?;
            println!("{} cosets", fam.len());
            for i in 1..=fam.len() {
                let names: Vec<String> = fam
                    .coset(i)
                    .iter()
                    .map(|&x| s.display_element(x, &interner))
                    .collect();
                println!("C{i}: {}", names.join(" "));
            }
            println!("action:");
            for i in 1..=fam.len() {
                for &l in fam.alphabet() {
                    let t = fam.act(i, l);
                    println!("C{i} {} -> C{t}", interner.name(l));
                }
            }
            Ok(())
        }
        Command::SubgroupPresent {
            input,
            subgroup,
            limit,
            output,
            budgets,
        } => {
            let (p, s) = load_semigroup(&input, limit, budgets.node_budget, &mut interner)?;
            let g = parse_subgroup(&subgroup, &p, &s, &interner)?;
            let ctx = build_context(&p, &s, &g, &mut interner)
                .map_err(|e| CmdError::Input(e.to_string()))?;
            let sp = subgroup_presentation(&ctx);
            let text = format!(
                "{}{}",
                header("subgroup-present", &budgets, &[]),
                serialize_presentation(sp.presentation(), &interner)
            );
            emit(&output, &text)
        }
        Command::SubgroupBase {
            input,
            subgroup,
            limit,
            base,
            output,
            pres_out,
            budgets,
        } => {
            let (p, s) = load_semigroup(&input, limit, budgets.node_budget, &mut interner)?;
            let x = base_for_presentation(&p, &base, &interner)?;
            let g = parse_subgroup(&subgroup, &p, &s, &interner)?;
            let ctx = build_context(&p, &s, &g, &mut interner)
                .map_err(|e| CmdError::Input(e.to_string()))?;
            let sp = subgroup_presentation(&ctx);
            let mut finder = PathFinder::new(budgets.node_budget);
            let kw = base_kw(&ctx, &sp, &mut finder, &x).map_err(|e| match e {
                squier::subgroup::TransportError::Find(FindPathError::Inconclusive { .. }) => {
                    CmdError::Inconclusive(e.to_string())
                }
                other => CmdError::Verification(other.to_string()),
            })?;
            if let Some(path) = &pres_out {
                let text = format!(
                    "{}{}",
                    header("subgroup-present", &budgets, &[]),
                    serialize_presentation(sp.presentation(), &interner)
                );
                write_file(path, &text)?;
            }
            let text = format!(
                "{}{}",
                header("subgroup-base", &budgets, &[]),
                serialize_base(&kw, &interner)
            );
            emit(&output, &text)
        }
        Command::ExtensionPresent {
            input,
            limit,
            output,
            budgets,
        } => {
            let loaded = rees::load(&input, limit, budgets.node_budget, &mut interner)?;
            let (gp, ctx) = rees::build(&loaded, &mut interner)?;
            let text = if loaded.with_zero {
                serialize_presentation(gp.presentation(), &interner)
            } else {
                let drop: BTreeSet<_> = ctx.z_letters().iter().copied().collect();
                let (p1, _) = restrict_base(&HomotopyBase::empty(), gp.presentation(), &drop)
                    .map_err(|e| CmdError::Verification(e.to_string()))?;
                serialize_presentation(&p1, &interner)
            };
            emit(
                &output,
                &format!("{}{}", header("extension-present", &budgets, &[]), text),
            )
        }
        Command::ExtensionBase {
            input,
            limit,
            group_base,
            output,
            pres_out,
            x3_budget,
            budgets,
        } => {
            let loaded = rees::load(&input, limit, budgets.node_budget, &mut interner)?;
            let (gp, ctx) = rees::build(&loaded, &mut interner)?;
            let x_g = base_for_presentation(&loaded.g_pres, &group_base, &interner)?;
            let t_cert = oracle::certify_complete(&loaded.t_pres)
                .expect("the trivial ideal presentation is complete");
            let x_t = critical_pair_base(&loaded.t_pres, &t_cert)
                .map_err(|e| CmdError::Verification(e.to_string()))?;
            let mut finder = PathFinder::new(budgets.node_budget);
            let x = assemble_x(&ctx, &gp, &mut finder, &x_g, &x_t, x3_budget)
                .map_err(map_extension_err)?;
            let (pres_text, base_text) = if loaded.with_zero {
                (
                    serialize_presentation(gp.presentation(), &interner),
                    serialize_base(&x, &interner),
                )
            } else {
                let drop: BTreeSet<_> = ctx.z_letters().iter().copied().collect();
                let (p1, x1) = restrict_base(&x, gp.presentation(), &drop)
                    .map_err(|e| CmdError::Verification(e.to_string()))?;
                (
                    serialize_presentation(&p1, &interner),
                    serialize_base(&x1, &interner),
                )
            };
            if let Some(path) = &pres_out {
                let text = format!(
                    "{}{}",
                    header("extension-present", &budgets, &[("x3-budget", x3_budget)]),
                    pres_text
                );
                write_file(path, &text)?;
            }
            emit(
                &output,
                &format!(
                    "{}{}",
                    header("extension-base", &budgets, &[("x3-budget", x3_budget)]),
                    base_text
                ),
            )
        }
        Command::FdtRegular {
            input,
            output,
            pres_out,
            x3_budget,
            verify,
            budgets,
        } => {
            let text = read_file(&input)?;
            let s = from_table(&text, &mut interner).map_err(input_err)?;
            let (p, base) = fdt_base_finite_regular(
                &s,
                &mut interner,
                Budgets {
                    node_budget: budgets.node_budget,
                    x3_word_budget: x3_budget,
                },
            )
            .map_err(map_extension_err)?;
            let report = validate_base(&base, &p);
            if !report.all_pass() {
                return Err(CmdError::Verification(
                    "output base failed validation".into(),
                ));
            }
            if verify {
                let s2 = enumerate(&p, s.size() + 1, budgets.node_budget)
                    .map_err(map_enumerate_err)?;
                if s2.size() != s.size() || !tables_isomorphic(&s2, &s) {
                    return Err(CmdError::Verification(
                        "re-enumeration does not match the input table".into(),
                    ));
                }
                eprintln!("verified: {} elements, tables isomorphic", s2.size());
            }
            if let Some(path) = &pres_out {
                let text = format!(
                    "{}{}",
                    header("fdt-regular", &budgets, &[("x3-budget", x3_budget)]),
                    serialize_presentation(&p, &interner)
                );
                write_file(path, &text)?;
            }
            emit(
                &output,
                &format!(
                    "{}{}",
                    header("fdt-regular", &budgets, &[("x3-budget", x3_budget)]),
                    serialize_base(&base, &interner)
                ),
            )
        }
        Command::VerifyBase { base, presentation } => {
            let ptext = read_file(&presentation)?;
            let p = parse_presentation(&ptext, &mut interner).map_err(input_err)?;
            let btext = read_file(&base)?;
            let b = parse_base(&btext, &p, &interner).map_err(input_err)?;
            let report = validate_base(&b, &p);
            if report.all_pass() {
                println!("{} pairs: all valid", b.len());
                Ok(())
            } else {
                for (k, why) in report.failures() {
                    eprintln!("pair {k}: {why}");
                }
                Err(CmdError::Verification(format!(
                    "{} of {} pairs failed",
                    report.failures().count(),
                    b.len()
                )))
            }
        }
        Command::HomotopyCheck {
            presentation,
            base,
            left,
            right,
            budgets,
        } => {
            let ptext = read_file(&presentation)?;
            let p = parse_presentation(&ptext, &mut interner).map_err(input_err)?;
            let btext = read_file(&base)?;
            let b = parse_base(&btext, &p, &interner).map_err(input_err)?;
            let lp = parse_path(&left, &p, &interner).map_err(input_err)?;
            let rp = parse_path(&right, &p, &interner).map_err(input_err)?;
            match homotopic_bounded(&p, &lp, &rp, &b, budgets.move_budget) {
                Ok(Homotopy::Equivalent(moves)) => {
                    println!("equivalent: {} moves", moves.len());
                    Ok(())
                }
                Ok(Homotopy::Inconclusive) => Err(CmdError::Inconclusive(format!(
                    "no certificate within {} moves",
                    budgets.move_budget
                ))),
                Err(e) => Err(CmdError::Verification(e.to_string())),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("squier: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
