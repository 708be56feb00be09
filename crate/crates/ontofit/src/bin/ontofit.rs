//! Command-line front end: fitting decisions, witness construction, basis
//! construction, constraint checking, chase entailment, and instance
//! generation.
//!
//! Exit codes: 0 = exists/holds, 1 = not, 2 = resource limit exceeded
//! (verdict unknown), 64 = usage error, 65 = parse error, 70 = internal
//! error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ontofit::concepts::Dialect;
use ontofit::dl_fitting::{
    el_basis, el_fit_ontology, el_fit_tgd, parse_ontology, satisfies_ontology, DlOntology,
};
use ontofit::oracle::{gen_named, Generated, CATALOG};
use ontofit::relational::{parse_fact_file, Instance};
use ontofit::tgd::{entails, model_check_ontology, parse_tgd_file, Entailment, TgdClass};
use ontofit::tgd_basis::{gtgd_basis, ind_basis};
use ontofit::tgd_fitting::{fit_ontology, fit_tgd, FitVerdict, FitWitness};
use ontofit::{Error, Limits};

const EXIT_NO: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "ontofit",
    about = "Fitting constraints and finite bases from relational examples",
    disable_help_subcommand = true
)]
struct Cli {
    /// Cap on values/facts created by a direct product.
    #[arg(long, global = true, value_name = "N")]
    max_product_size: Option<usize>,

    /// Cap on active-domain size for subset enumeration (bases and
    /// unrestricted-TGD candidate sets).
    #[arg(long, global = true, value_name = "N")]
    max_subsets: Option<usize>,

    /// Seed for randomized test-corpus generation; never affects verdicts.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Report concept sizes as DAG (succinct) sizes [default].
    #[arg(long, global = true, conflicts_with = "tree")]
    succinct: bool,

    /// Report concept sizes as expanded tree sizes.
    #[arg(long, global = true)]
    tree: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FitArgs {
    /// Constraint language: EL, ELI, ELbot, ELIbot, GTGD, FGTGD, F1TGD,
    /// FULL, IND, or TGD.
    #[arg(long)]
    class: String,

    /// Fit a single dependency/inclusion or an ontology.
    #[arg(long, default_value = "tgd", value_parser = ["tgd", "ontology"])]
    mode: String,

    /// Positive example fact files.
    #[arg(long, required = true, num_args = 1..)]
    pos: Vec<PathBuf>,

    /// Negative example fact files.
    #[arg(long, required = true, num_args = 1..)]
    neg: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a fitting constraint exists.
    FitExists(FitArgs),
    /// Decide fitting existence and print a verified witness.
    Fit(FitArgs),
    /// Construct a finite basis of the given instances.
    Basis {
        /// Basis language: EL, ELI, ELbot, ELIbot, GTGD, or IND.
        #[arg(long)]
        class: String,
        /// Keep unpruned GTGD bodies (larger output, same entailments).
        #[arg(long)]
        unpruned: bool,
        /// Instance fact files.
        #[arg(required = true, num_args = 1..)]
        files: Vec<PathBuf>,
    },
    /// Check whether an instance satisfies a constraint file (TGDs or
    /// concept inclusions).
    Check {
        #[arg(long)]
        constraint: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Decide chase entailment of a TGD from a TGD ontology.
    Entail {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        tgd: PathBuf,
        /// Chase round cap.
        #[arg(long, value_name = "K")]
        rounds: Option<usize>,
    },
    /// Print a named instance, fitting instance, rule set, or rule from the
    /// built-in catalog.
    Gen {
        /// Catalog name; omit to list the catalog.
        name: Option<String>,
        /// Size parameter for the scalable families.
        n: Option<usize>,
    },
}

enum Lang {
    Dl(Dialect),
    Tgd(TgdClass),
}

fn parse_lang(s: &str) -> Result<Lang, Error> {
    if let Some(d) = Dialect::parse(s) {
        return Ok(Lang::Dl(d));
    }
    if let Some(c) = TgdClass::parse(s) {
        return Ok(Lang::Tgd(c));
    }
    Err(Error::Usage(format!(
        "unknown class {s:?} (expected EL, ELI, ELbot, ELIbot, GTGD, FGTGD, F1TGD, FULL, IND, or TGD)"
    )))
}

fn read_instance(path: &PathBuf) -> Result<Instance, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_fact_file(&text)?.instance)
}

fn read_instances(paths: &[PathBuf]) -> Result<Vec<Instance>, Error> {
    paths.iter().map(read_instance).collect()
}

fn exit_of(err: &Error) -> u8 {
    match err {
        Error::Usage(_) | Error::Precondition(_) | Error::Dialect(_) => EXIT_USAGE,
        Error::Parse(_) => EXIT_PARSE,
        Error::ResourceLimit(_) => EXIT_LIMIT,
        Error::PointConstraint(_) | Error::Invariant(_) => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `ontofit basis … | head`) instead
    // of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version go to stdout with success; real argument errors
            // are usage errors.
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(EXIT_USAGE) };
        }
    };
    let mut limits = Limits::default();
    if let Some(n) = cli.max_product_size {
        limits.max_product_values = n;
        limits.max_product_facts = n;
    }
    if let Some(n) = cli.max_subsets {
        limits.max_subset_domain = n;
        limits.max_basis_domain = n;
    }
    let tree = cli.tree;
    match run(&cli.command, &limits, tree) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_of(&e))
        }
    }
}

fn run(command: &Command, limits: &Limits, tree: bool) -> Result<u8, Error> {
    match command {
        Command::FitExists(args) => cmd_fit(args, limits, tree, false),
        Command::Fit(args) => cmd_fit(args, limits, tree, true),
        Command::Basis { class, unpruned, files } => cmd_basis(class, *unpruned, files, limits),
        Command::Check { constraint, instance } => cmd_check(constraint, instance, limits),
        Command::Entail { ontology, tgd, rounds } => cmd_entail(ontology, tgd, *rounds, limits),
        Command::Gen { name, n } => cmd_gen(name.as_deref(), *n),
    }
}

fn concept_size(c: ontofit::concepts::Concept, tree: bool) -> String {
    if tree {
        c.tree_size().to_string()
    } else {
        c.succinct_size().to_string()
    }
}

fn print_dl_ontology_witness(o: &DlOntology, tree: bool) {
    println!("members: {}", o.len());
    let mut lines: Vec<_> = o.inclusions.iter().collect();
    lines.sort();
    for ci in lines {
        println!("witness: {ci}");
        println!(
            "witness-size: {}",
            concept_size(ci.lhs, tree).parse::<u128>().unwrap_or(0)
                + concept_size(ci.rhs, tree).parse::<u128>().unwrap_or(0)
        );
    }
}

fn cmd_fit(args: &FitArgs, limits: &Limits, tree: bool, print_witness: bool) -> Result<u8, Error> {
    let lang = parse_lang(&args.class)?;
    let pos = read_instances(&args.pos)?;
    let neg = read_instances(&args.neg)?;
    println!("class: {}", args.class);
    println!("mode: {}", args.mode);
    match lang {
        Lang::Dl(dialect) => {
            if args.mode == "ontology" {
                let fit = el_fit_ontology(&pos, &neg, dialect, limits)?;
                println!("exists: {}", fit.exists);
                if print_witness {
                    if let Some(o) = &fit.witness {
                        print_dl_ontology_witness(o, tree);
                    }
                }
                Ok(if fit.exists { 0 } else { EXIT_NO })
            } else {
                let fit = el_fit_tgd(&pos, &neg, dialect, limits)?;
                println!("exists: {}", fit.exists);
                if print_witness {
                    if let Some(ci) = &fit.witness {
                        println!("witness: {ci}");
                        println!(
                            "witness-size: {}",
                            concept_size(ci.lhs, tree).parse::<u128>().unwrap_or(0)
                                + concept_size(ci.rhs, tree).parse::<u128>().unwrap_or(0)
                        );
                    }
                }
                Ok(if fit.exists { 0 } else { EXIT_NO })
            }
        }
        Lang::Tgd(class) => {
            let verdict: FitVerdict = if args.mode == "ontology" {
                fit_ontology(&pos, &neg, class, limits)?
            } else {
                fit_tgd(&pos, &neg, class, limits)?
            };
            println!("exists: {}", verdict.exists);
            println!("resource-limited: {}", verdict.resource_limited);
            if print_witness {
                match &verdict.witness {
                    Some(FitWitness::Tgd(t)) => println!("witness: {}", t.to_text()),
                    Some(FitWitness::Ontology(o)) => {
                        println!("members: {}", o.len());
                        for t in o.tgds() {
                            println!("witness: {}", t.to_text());
                        }
                    }
                    None => {}
                }
                for line in &verdict.certificate {
                    println!("certificate: {line}");
                }
            }
            Ok(if verdict.exists {
                0
            } else if verdict.resource_limited {
                EXIT_LIMIT
            } else {
                EXIT_NO
            })
        }
    }
}

fn cmd_basis(
    class: &str,
    unpruned: bool,
    files: &[PathBuf],
    limits: &Limits,
) -> Result<u8, Error> {
    let h = read_instances(files)?;
    println!("class: {class}");
    if let Some(dialect) = Dialect::parse(class) {
        let basis = el_basis(&h, dialect, limits)?;
        println!("members: {}", basis.len());
        let mut lines: Vec<_> = basis.inclusions.iter().map(|ci| ci.to_string()).collect();
        lines.sort();
        for line in lines {
            println!("inclusion: {line}");
        }
        return Ok(0);
    }
    let basis = match TgdClass::parse(class) {
        Some(TgdClass::Guarded) => gtgd_basis(&h, !unpruned, limits)?,
        Some(TgdClass::Ind) => ind_basis(&h, limits)?,
        _ => {
            return Err(Error::Usage(format!(
                "basis construction supports EL, ELI, ELbot, ELIbot, GTGD, and IND, not {class:?}"
            )))
        }
    };
    println!("members: {}", basis.len());
    for t in basis.tgds() {
        println!("tgd: {}", t.to_text());
    }
    Ok(0)
}

fn cmd_check(constraint: &PathBuf, instance: &PathBuf, limits: &Limits) -> Result<u8, Error> {
    let text = fs::read_to_string(constraint)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", constraint.display())))?;
    let i = read_instance(instance)?;
    // A constraint file holds either TGDs or concept inclusions; try the TGD
    // parser first, then the most permissive DL dialect.
    let holds = match parse_tgd_file(&text) {
        Ok(o) => {
            println!("constraint-kind: tgd");
            println!("members: {}", o.len());
            model_check_ontology(&i, &o, limits)?
        }
        Err(tgd_err) => {
            let o = parse_ontology(&text, Dialect::EliBot).map_err(|dl_err| {
                Error::Parse(format!(
                    "not a TGD file ({tgd_err}) and not a concept-inclusion file ({dl_err})"
                ))
            })?;
            println!("constraint-kind: dl");
            println!("members: {}", o.len());
            satisfies_ontology(&i, &o)?
        }
    };
    println!("holds: {holds}");
    Ok(if holds { 0 } else { EXIT_NO })
}

fn cmd_entail(
    ontology: &PathBuf,
    tgd: &PathBuf,
    rounds: Option<usize>,
    limits: &Limits,
) -> Result<u8, Error> {
    let o_text = fs::read_to_string(ontology)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", ontology.display())))?;
    let t_text = fs::read_to_string(tgd)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", tgd.display())))?;
    let o = parse_tgd_file(&o_text)?;
    let t_set = parse_tgd_file(&t_text)?;
    let mut limits = limits.clone();
    if let Some(k) = rounds {
        limits.max_chase_rounds = k;
    }
    let mut all_yes = true;
    let mut any_unknown = false;
    for t in t_set.tgds() {
        let verdict = entails(&o, t, &limits)?;
        println!(
            "entailed: {} :: {}",
            match verdict {
                Entailment::Yes => "yes",
                Entailment::No => "no",
                Entailment::Unknown => "unknown",
            },
            t.to_text()
        );
        match verdict {
            Entailment::Yes => {}
            Entailment::No => all_yes = false,
            Entailment::Unknown => any_unknown = true,
        }
    }
    Ok(if any_unknown {
        EXIT_LIMIT
    } else if all_yes {
        0
    } else {
        EXIT_NO
    })
}

fn cmd_gen(name: Option<&str>, n: Option<usize>) -> Result<u8, Error> {
    let Some(name) = name else {
        for entry in CATALOG {
            println!("name: {entry}");
        }
        return Ok(0);
    };
    match gen_named(name, n)? {
        Generated::Instance(i) => print!("{}", i.to_fact_text()),
        Generated::Fitting { pos, neg } => {
            for (k, i) in pos.iter().enumerate() {
                println!("# pos {k}");
                print!("{}", i.to_fact_text());
            }
            for (k, i) in neg.iter().enumerate() {
                println!("# neg {k}");
                print!("{}", i.to_fact_text());
            }
        }
        Generated::Ontology(o) => {
            for t in o.tgds() {
                println!("{}", t.to_text());
            }
        }
        Generated::Tgd(t) => println!("{}", t.to_text()),
    }
    Ok(0)
}
