//! `ctl`: check models, extract evidence, build and validate proof bundles.
//!
//! Exit status is 0 on success, 1 when the answer is negative (the formula
//! fails, validation finds problems), 2 on usage or input errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ctl_evidence::checker::{check_with, CheckOptions};
use ctl_evidence::evidence::{
    evidence_for, is_min_counter, is_min_counter_transposed, EvidenceRequest, Flavor,
};
use ctl_evidence::model::{load_model, load_model_with, LoadOptions};
use ctl_evidence::oracle::{
    is_constrained_closed_bounded, is_evidence_semantic, naive_sat, semantic_verdict,
    syntactically_unconstrained, Budget,
};
use ctl_evidence::proof::{
    build_proof, export_dot, import_bundle, validate_bundle, EvidenceBundle, Provenance,
};
use ctl_evidence::{parse_formula, Assertion, Formula, Model, Operator, StateId};

#[derive(Parser)]
#[command(
    name = "ctl",
    version,
    about = "Explicit-state CTL model checking with evidence"
)]
struct Cli {
    /// Treat missing proposition labels as ff (with a warning) instead of failing.
    #[arg(long, global = true)]
    permissive_labels: bool,
    /// Also report the literal (transposed) reading of the E[.. U ..]
    /// counterexample shape.
    #[arg(long, global = true)]
    strict_table2: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a model and print the truth table.
    Check(CheckArgs),
    /// Write evidence for one state and subformula.
    Evidence(EvidenceArgs),
    /// Build an evidence bundle, or validate one.
    Proof(ProofArgs),
    /// Brute-force cross-checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct FormulaArgs {
    /// Formula text; may be repeated.
    #[arg(short, long = "formula")]
    formulas: Vec<String>,
    /// File holding one formula per non-empty line.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

impl FormulaArgs {
    fn parse(&self) -> Result<Vec<Formula>> {
        let mut texts = self.formulas.clone();
        if let Some(path) = &self.formula_file {
            let text = read(path)?;
            texts.extend(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(String::from),
            );
        }
        if texts.is_empty() {
            bail!("no formula given; use --formula or --formula-file");
        }
        texts
            .iter()
            .map(|t| parse_formula(t).with_context(|| format!("parsing `{t}`")))
            .collect()
    }

    fn single(&self) -> Result<Formula> {
        let mut fs = self.parse()?;
        if fs.len() != 1 {
            bail!("expected exactly one formula, got {}", fs.len());
        }
        Ok(fs.remove(0))
    }
}

#[derive(Args)]
struct CheckArgs {
    model: PathBuf,
    #[command(flatten)]
    formula: FormulaArgs,
    /// State deciding the exit status; defaults to the least state id.
    #[arg(long)]
    state: Option<String>,
    /// Print the subformulas with the indices `evidence --assert-formula` takes.
    #[arg(long)]
    show_ast: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Args)]
struct EvidenceArgs {
    model: PathBuf,
    #[command(flatten)]
    formula: FormulaArgs,
    /// Defaults to the least state id.
    #[arg(long)]
    state: Option<String>,
    /// Subformula to give evidence for, by preorder index or text; defaults to the whole formula.
    #[arg(long)]
    assert_formula: Option<String>,
    #[arg(long)]
    natural: bool,
    #[arg(long)]
    local_closure: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProofArgs {
    #[arg(required_unless_present = "bundle")]
    model: Option<PathBuf>,
    #[command(flatten)]
    formula: FormulaArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Re-import the written bundle and validate it.
    #[arg(long)]
    validate: bool,
    /// Validate an existing bundle instead of building one.
    #[arg(long, conflicts_with_all = ["model", "output"])]
    bundle: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare the checker with path-enumerating semantics.
    Sat {
        model: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
    },
    /// Decide evidence by enumerating bounded sound supermodels.
    Evidence {
        /// A model in ctl-model/1 form, labelled over children of the formula.
        model: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long)]
        state: String,
        /// tt or ff.
        #[arg(long, value_parser = parse_value, action = clap::ArgAction::Set)]
        value: bool,
        #[arg(long, default_value_t = 1)]
        fresh: usize,
        #[arg(long, default_value_t = 2)]
        max_added: usize,
    },
    /// Look for a labelling over the formulas that no model realizes.
    Constrained {
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long, default_value_t = 2)]
        max_states: usize,
    },
}

fn parse_value(s: &str) -> Result<bool, String> {
    match s {
        "tt" | "true" => Ok(true),
        "ff" | "false" => Ok(false),
        _ => Err(format!("expected tt or ff, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ctl: error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Check(args) => cmd_check(cli, args),
        Command::Evidence(args) => cmd_evidence(cli, args),
        Command::Proof(args) => cmd_proof(cli, args),
        Command::Oracle(cmd) => cmd_oracle(cli, cmd),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_kripke(cli: &Cli, path: &Path, formulas: &[Formula]) -> Result<Model> {
    let opts = LoadOptions {
        kripke: true,
        permissive: cli.permissive_labels,
        required_props: formulas
            .iter()
            .flat_map(Formula::propositions)
            .map(|p| p.to_string())
            .collect(),
    };
    let (m, warnings) = load_model_with(&read(path)?, &opts)
        .with_context(|| format!("loading {}", path.display()))?;
    for w in warnings {
        eprintln!("ctl: warning: {w}");
    }
    Ok(m)
}

fn label(cli: &Cli, m: &Model, f: &Formula) -> Result<Model> {
    let opts = CheckOptions {
        permissive: cli.permissive_labels,
    };
    let (full, warnings) = check_with(m, f, opts)?;
    for w in warnings {
        eprintln!("ctl: warning: {w}");
    }
    Ok(full)
}

fn pick_state(m: &Model, state: Option<&str>) -> Result<StateId> {
    match state {
        Some(s) => m
            .state(s)
            .cloned()
            .with_context(|| format!("unknown state `{s}`")),
        None => m
            .states()
            .next()
            .cloned()
            .context("the model has no states"),
    }
}

fn value(b: bool) -> &'static str {
    if b {
        "tt"
    } else {
        "ff"
    }
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> Result<u8> {
    let formulas = args.formula.parse()?;
    let m = load_kripke(cli, &args.model, &formulas)?;
    let state = pick_state(&m, args.state.as_deref())?;
    let mut all = true;
    for (i, f) in formulas.iter().enumerate() {
        if i > 0 {
            println!();
        }
        println!("formula: {f}");
        let full = label(cli, &m, f)?;
        if args.show_ast {
            for (k, g) in f.preorder().iter().enumerate() {
                println!("  [{k}] {g}");
            }
        }
        let mut columns: Vec<&Formula> = Vec::new();
        for g in f.preorder() {
            if !columns.contains(&g) {
                columns.push(g);
            }
        }
        print_table(&full, &columns);
        let holds = full.label(&state, f).expect("labelled");
        println!("{state}: {}", value(holds));
        all &= holds;
    }
    Ok(if all { 0 } else { 1 })
}

fn print_table(full: &Model, columns: &[&Formula]) {
    let heads: Vec<String> = columns.iter().map(|g| g.to_string()).collect();
    let first = full
        .states()
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
        .max("state".len());
    let mut line = format!("{:<first$}", "state");
    for h in &heads {
        line.push_str(&format!("  {h:<w$}", w = h.len().max(2)));
    }
    println!("{}", line.trim_end());
    for s in full.states() {
        let mut line = format!("{:<first$}", s.as_str());
        for (g, h) in columns.iter().zip(&heads) {
            let v = full.label(s, g).map_or("-", value);
            line.push_str(&format!("  {v:<w$}", w = h.len().max(2)));
        }
        println!("{}", line.trim_end());
    }
}

fn select<'a>(f: &'a Formula, sel: Option<&str>) -> Result<&'a Formula> {
    let Some(sel) = sel else { return Ok(f) };
    let nodes = f.preorder();
    if let Ok(i) = sel.parse::<usize>() {
        return nodes
            .get(i)
            .copied()
            .with_context(|| format!("subformula index {i} out of range 0..{}", nodes.len()));
    }
    let g = parse_formula(sel).with_context(|| format!("parsing `{sel}`"))?;
    nodes
        .into_iter()
        .find(|n| **n == g)
        .with_context(|| format!("`{g}` is not a subformula of `{f}`"))
}

fn cmd_evidence(cli: &Cli, args: &EvidenceArgs) -> Result<u8> {
    let f = args.formula.single()?;
    let g = select(&f, args.assert_formula.as_deref())?.desugar();
    if !g.is_compound() {
        bail!("`{g}` is a proposition; there is nothing to give evidence for");
    }
    let m = load_kripke(cli, &args.model, std::slice::from_ref(&f))?;
    let state = pick_state(&m, args.state.as_deref())?;
    let full = label(cli, &m, &g)?;
    let req = EvidenceRequest {
        state: state.clone(),
        formula: g.clone(),
        flavor: if args.natural {
            Flavor::Natural
        } else {
            Flavor::Minimal
        },
        locally_closed: args.local_closure,
    };
    let e = evidence_for(&full, &req)?;
    let truth = full.label(&state, &g).expect("labelled");
    if cli.strict_table2
        && g.operator() == Some(Operator::EU)
        && !truth
        && !args.natural
        && !args.local_closure
    {
        eprintln!(
            "ctl: minimal E[.. U ..] counterexample shape: resolved reading {}, literal reading {}",
            matches_word(is_min_counter(&e, &state, &g)?),
            matches_word(is_min_counter_transposed(&e, &state, &g)?),
        );
    }
    let text = match args.format {
        Format::Json => e.to_json(),
        Format::Dot => export_dot(&e, None, &g)?,
    };
    write_out(args.output.as_deref(), &text)?;
    Ok(0)
}

fn matches_word(b: bool) -> &'static str {
    if b {
        "matches"
    } else {
        "does not match"
    }
}

fn cmd_proof(cli: &Cli, args: &ProofArgs) -> Result<u8> {
    if let Some(path) = &args.bundle {
        let bundle =
            import_bundle(&read(path)?).with_context(|| format!("importing {}", path.display()))?;
        let report = validate_bundle(&bundle);
        print!("{report}");
        return Ok(if report.is_ok() { 0 } else { 1 });
    }
    let path = args.model.as_deref().expect("required by clap");
    let f = args.formula.single()?;
    let text = read(path)?;
    let m = load_kripke(cli, path, std::slice::from_ref(&f))?;
    let full = label(cli, &m, &f)?;
    let proof = build_proof(&full)?;
    let name = path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into(),
    );
    let provenance = Provenance::new().with_input(name, text.as_bytes());
    let bundle = EvidenceBundle::from_proof(&proof, &f, provenance)?;
    let json = bundle.to_json();
    write_out(args.output.as_deref(), &json)?;
    if !args.validate {
        return Ok(0);
    }
    let report = validate_bundle(&import_bundle(&json)?);
    if args.output.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(if report.is_ok() { 0 } else { 1 })
}

fn cmd_oracle(cli: &Cli, cmd: &OracleCommand) -> Result<u8> {
    match cmd {
        OracleCommand::Sat { model, formula } => {
            let f = formula.single()?;
            let m = load_kripke(cli, model, std::slice::from_ref(&f))?;
            let full = label(cli, &m, &f)?;
            let mut agree = true;
            for s in m.states() {
                let naive = naive_sat(&m, s, &f)?;
                let checked = full.label(s, &f).expect("labelled");
                let mark = if naive == checked { "" } else { "  MISMATCH" };
                println!(
                    "{s}: oracle {} checker {}{mark}",
                    value(naive),
                    value(checked)
                );
                agree &= naive == checked;
            }
            Ok(if agree { 0 } else { 1 })
        }
        OracleCommand::Evidence {
            model,
            formula,
            state,
            value: v,
            fresh,
            max_added,
        } => {
            let f = formula.single()?;
            let m = load_model(&read(model)?)
                .with_context(|| format!("loading {}", model.display()))?;
            let s = pick_state(&m, Some(state))?;
            let a = Assertion::new(s, f, *v);
            let budget = Budget::new(*fresh, *max_added);
            let evidence = is_evidence_semantic(&m, &a, budget)?;
            let verdict = semantic_verdict(&m, &a, budget)?;
            println!(
                "{a}: {} supermodels, {} violations",
                verdict.supermodels, verdict.violations
            );
            println!(
                "evidence within budget: {}",
                if evidence { "yes" } else { "no" }
            );
            Ok(if evidence { 0 } else { 1 })
        }
        OracleCommand::Constrained {
            formula,
            max_states,
        } => {
            let fs = formula.parse()?;
            let set: BTreeSet<String> = fs.iter().map(|f| f.to_string()).collect();
            println!(
                "formulas: {}",
                set.into_iter().collect::<Vec<_>>().join(", ")
            );
            let syntactic = syntactically_unconstrained(&fs);
            println!(
                "syntactically unconstrained: {}",
                if syntactic { "yes" } else { "no" }
            );
            let found = is_constrained_closed_bounded(&fs, *max_states)?;
            println!(
                "inconsistent closed labelling within {max_states} states: {}",
                if found { "found" } else { "none" }
            );
            Ok(if found { 1 } else { 0 })
        }
    }
}
