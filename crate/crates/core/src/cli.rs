//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a verification check
//! failed, 3 the requested branch has zero probability.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::acceptance::{self, DEFAULT_SEED};
use crate::graphstate::WeightedGraph;
use crate::optics::{self, OpticsError, RecipeStep};
use crate::phase::Phase;
use crate::qstate::StateVector;
use crate::report::{self, Report};
use crate::toffoli::{
    self, LinkingByproducts, LinkingModel, ResourceVariant, TargetEncoding, ToffoliError, VariantKind, TOLERANCE,
    WIRE_LABELS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_ZERO_PROBABILITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mbqc-toffoli", version, about = "Measurement-based Toffoli gates on weighted graph states")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted graph states.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Toffoli gates on the six-, seven- and eight-qubit resources.
    #[command(subcommand)]
    Toffoli(ToffoliCommand),
    /// Photonic construction of the six-qubit resource.
    #[command(subcommand)]
    Optics(OpticsCommand),
    /// Acceptance checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Build the state of a graph document and print its amplitudes.
    Build {
        file: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct ResourceArgs {
    /// six, seven or eight
    #[arg(long, default_value = "six")]
    variant: VariantKind,
    /// Gate angle as a multiple of π, e.g. 1 or 1/4.
    #[arg(long, default_value = "1")]
    theta: Phase,
}

impl ResourceArgs {
    fn resolve(&self) -> Result<ResourceVariant, ToffoliError> {
        ResourceVariant::with_theta(self.variant, self.theta)
    }

    fn echo(&self) -> Vec<String> {
        vec!["--variant".into(), self.variant.to_string(), "--theta".into(), pi_fraction(self.theta)]
    }
}

#[derive(Args, Debug, Clone)]
struct LinkingArgs {
    /// X byproducts from linking, bits for (c1, c2, t).
    #[arg(long, default_value = "000")]
    sx: String,
    /// Z byproducts from linking, bits for (c1, c2, t).
    #[arg(long, default_value = "000")]
    sz: String,
}

impl LinkingArgs {
    fn resolve(&self) -> Result<LinkingByproducts, ToffoliError> {
        LinkingByproducts::from_bits(&self.sx, &self.sz)
    }

    fn echo(&self) -> Vec<String> {
        vec!["--sx".into(), self.sx.clone(), "--sz".into(), self.sz.clone()]
    }
}

#[derive(Subcommand, Debug)]
enum ToffoliCommand {
    /// Run one measurement branch on an input state.
    Run {
        #[command(flatten)]
        resource: ResourceArgs,
        /// Three bits for (c1, c2, t), or a state file.
        #[arg(long)]
        input: String,
        /// Outcome bits in measurement-label order; all zero by default.
        #[arg(long)]
        outcomes: Option<String>,
        #[command(flatten)]
        linking: LinkingArgs,
        /// hadamard (Toffoli at θ = π) or raw (H_t·CCZ^θ).
        #[arg(long, default_value = "hadamard", value_parser = parse_encoding)]
        encoding: TargetEncoding,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Classify every outcome branch for one linking case.
    Enumerate {
        #[command(flatten)]
        resource: ResourceArgs,
        #[command(flatten)]
        linking: LinkingArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Success probability over branches and linking cases.
    Success {
        #[command(flatten)]
        resource: ResourceArgs,
        /// none or uniform
        #[arg(long, default_value = "none")]
        linking: LinkingModel,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum OpticsCommand {
    /// Execute a photonic recipe; the built-in six-qubit recipe by default.
    Run {
        #[arg(long)]
        recipe: Option<PathBuf>,
        /// Also run every combination of measurement outcomes.
        #[arg(long)]
        sweep_outcomes: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Run the ten acceptance criteria.
    All {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn parse_encoding(s: &str) -> Result<TargetEncoding, String> {
    match s {
        "hadamard" => Ok(TargetEncoding::Hadamard),
        "raw" => Ok(TargetEncoding::Raw),
        _ => Err(format!("unknown encoding {s:?} (hadamard, raw)")),
    }
}

fn pi_fraction(p: Phase) -> String {
    match p.signed_pi_ratio() {
        Some(r) if *r.denom() == 1 => r.numer().to_string(),
        Some(r) => format!("{}/{}", r.numer(), r.denom()),
        None => format!("{}rad", p.radians()),
    }
}

/// A failed command: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<ToffoliError> for Failure {
    fn from(e: ToffoliError) -> Self {
        let code = if matches!(e, ToffoliError::ZeroProbability(_)) { EXIT_ZERO_PROBABILITY } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

impl From<OpticsError> for Failure {
    fn from(e: OpticsError) -> Self {
        let code = if matches!(e, OpticsError::ZeroProbability { .. }) { EXIT_ZERO_PROBABILITY } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::usage(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_fail(path, e))
}

fn emit<I: Serialize, R: Serialize>(json: &Option<PathBuf>, command: Vec<String>, inputs: I, results: R) -> Result<(), Failure> {
    if let Some(path) = json {
        Report::new(command, inputs, results).write(path).map_err(|e| io_fail(path, e))?;
    }
    Ok(())
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Graph(GraphCommand::Build { file, json }) => graph_build(&file, &json, out),
        Command::Toffoli(c) => toffoli_cmd(c, out),
        Command::Optics(OpticsCommand::Run { recipe, sweep_outcomes, json }) => optics_run(recipe.as_deref(), sweep_outcomes, &json, out),
        Command::Verify(VerifyCommand::All { seed, json }) => verify_all(seed, &json, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[derive(Serialize)]
struct GraphInputs {
    file: String,
    vertices: usize,
    edges: usize,
}

fn graph_build(file: &Path, json: &Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let g = WeightedGraph::from_json(&read(file)?).map_err(Failure::usage)?;
    let s = g.build_state().map_err(Failure::usage)?;
    let n = g.vertex_count();
    let _ = writeln!(out, "{n} vertices, {} edges; basis label lists vertex {} first", g.edges().len(), n.saturating_sub(1));
    for (i, a) in s.amplitudes().iter().enumerate() {
        let _ = writeln!(out, "|{:0width$b}>  {:+.12} {:+.12}i", i, a.re, a.im, width = n.max(1));
    }
    let name = file.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
    emit(
        json,
        vec!["graph".into(), "build".into(), name.clone()],
        GraphInputs { file: name, vertices: n, edges: g.edges().len() },
        report::amplitudes(&s),
    )?;
    Ok(EXIT_OK)
}

fn parse_input(arg: &str) -> Result<StateVector, Failure> {
    if arg.len() == 3 && arg.bytes().all(|b| b == b'0' || b == b'1') {
        // (c1, c2, t) = qubits (0, 1, 2)
        let bits: Vec<u8> = arg.bytes().map(|b| b - b'0').collect();
        let index = usize::from(bits[0]) | usize::from(bits[1]) << 1 | usize::from(bits[2]) << 2;
        return StateVector::basis_state(3, index).map_err(Failure::usage);
    }
    let s = report::parse_state(&read(Path::new(arg))?).map_err(Failure::usage)?;
    if s.num_qubits() != 3 {
        return Err(Failure::usage(format!("input state has {} qubits, expected 3", s.num_qubits())));
    }
    Ok(s)
}

#[derive(Serialize)]
struct RunInputs {
    variant: ResourceVariant,
    linking: LinkingByproducts,
    outcomes: String,
    encoding: TargetEncoding,
    input: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct RunResults {
    probability: f64,
    sigma: String,
    success: bool,
    fidelity: f64,
    output: Vec<[f64; 2]>,
    expected: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct CaseInputs {
    variant: ResourceVariant,
    linking: LinkingByproducts,
}

#[derive(Serialize)]
struct SuccessInputs {
    variant: ResourceVariant,
    linking_model: LinkingModel,
}

fn toffoli_cmd(c: ToffoliCommand, out: &mut dyn Write) -> CmdResult {
    match c {
        ToffoliCommand::Run { resource, input, outcomes, linking, encoding, json } => {
            let v = resource.resolve()?;
            let l = linking.resolve()?;
            let psi = parse_input(&input)?;
            let bits = outcomes.unwrap_or_else(|| "0".repeat(v.kind.measured_labels().len()));
            let o = v.outcomes_from_bits(&bits)?;
            let run = toffoli::run_gate(v, &psi, l, &o, encoding)?;
            let sigma = run.sigma.describe(&WIRE_LABELS);
            let _ = writeln!(out, "{} θ={} {} outcomes {}", v.kind, v.theta, l, bits);
            let _ = writeln!(out, "probability  {:.12}", run.probability);
            let _ = writeln!(out, "byproduct    {sigma}");
            let _ = writeln!(out, "success      {}", if run.success { "yes" } else { "no (non-local byproduct)" });
            let _ = writeln!(out, "fidelity     {:.12}", run.fidelity);
            let mut cmd = strs(&["toffoli", "run"]);
            cmd.extend(resource.echo());
            cmd.extend(["--input".into(), input.clone(), "--outcomes".into(), bits.clone()]);
            cmd.extend(linking.echo());
            cmd.extend(["--encoding".into(), format!("{encoding:?}").to_lowercase()]);
            emit(
                &json,
                cmd,
                RunInputs { variant: v, linking: l, outcomes: bits, encoding, input: report::amplitudes(&psi) },
                RunResults {
                    probability: run.probability,
                    sigma,
                    success: run.success,
                    fidelity: run.fidelity,
                    output: report::amplitudes(&run.output),
                    expected: report::amplitudes(&run.expected),
                },
            )?;
            Ok(if run.fidelity >= 1.0 - TOLERANCE { EXIT_OK } else { EXIT_VERIFY })
        }
        ToffoliCommand::Enumerate { resource, linking, json } => {
            let v = resource.resolve()?;
            let l = linking.resolve()?;
            let branches = toffoli::enumerate_branches(v, l)?;
            let _ = writeln!(out, "{} θ={} {}", v.kind, v.theta, l);
            let _ = writeln!(out, "{:<9} {:>10}  {:<6} byproduct", "outcomes", "prob", "local");
            let mut ok = true;
            for b in &branches {
                let _ = writeln!(
                    out,
                    "{:<9} {:>10.6}  {:<6} {}",
                    b.outcomes,
                    b.probability,
                    if b.local { "yes" } else { "no" },
                    b.predicted.as_deref().unwrap_or("(no prediction: base program)")
                );
                if let (Some(d), Some(pl)) = (b.sigma_distance, b.predicted_local) {
                    ok &= d <= TOLERANCE && pl == b.local;
                }
            }
            let mut cmd = strs(&["toffoli", "enumerate"]);
            cmd.extend(resource.echo());
            cmd.extend(linking.echo());
            emit(&json, cmd, CaseInputs { variant: v, linking: l }, &branches)?;
            Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
        }
        ToffoliCommand::Success { resource, linking, json } => {
            let v = resource.resolve()?;
            let r = toffoli::success_probability(v, linking)?;
            let exact = r.exact.map_or_else(|| "n/a".to_string(), |e| e.to_string());
            let _ = writeln!(out, "{} θ={} linking {}", v.kind, v.theta, format!("{linking:?}").to_lowercase());
            let _ = writeln!(out, "success probability {:.12} (exact {exact})", r.success_probability);
            let _ = writeln!(out, "predictions match   {}", r.predictions_match);
            let mut cmd = strs(&["toffoli", "success"]);
            cmd.extend(resource.echo());
            cmd.extend(["--linking".into(), format!("{linking:?}").to_lowercase()]);
            emit(&json, cmd, SuccessInputs { variant: v, linking_model: linking }, &r)?;
            Ok(if r.predictions_match { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

#[derive(Serialize)]
struct OpticsInputs {
    recipe: String,
    steps: usize,
    sweep_outcomes: bool,
}

#[derive(Serialize)]
struct SnapshotRecord {
    label: String,
    modes: Vec<usize>,
    cumulative_probability: f64,
}

#[derive(Serialize)]
struct SweepRecord {
    outcomes: String,
    probability: f64,
    oracle: f64,
}

#[derive(Serialize)]
struct OpticsResults {
    snapshots: Vec<SnapshotRecord>,
    final_modes: Vec<usize>,
    coincidence_probability: f64,
    oracle_probability: f64,
    /// Only for registers holding exactly modes 1 to 6.
    six_qubit_graph_fidelity: Option<f64>,
    sweep: Vec<SweepRecord>,
}

fn sweep(steps: &[RecipeStep]) -> Result<Vec<SweepRecord>, Failure> {
    let m = optics::measurement_count(steps);
    let mut records = Vec::new();
    for bits in 0..1usize << m {
        let outcomes: Vec<u8> = (0..m).map(|k| ((bits >> (m - 1 - k)) & 1) as u8).collect();
        let s = optics::with_outcomes(steps, &outcomes);
        let probability = match optics::coincidence_probability(&s) {
            Ok(p) => p,
            Err(OpticsError::ZeroProbability { .. }) => 0.0,
            Err(e) => return Err(e.into()),
        };
        let oracle = optics::global_projector_probability(&s)?;
        records.push(SweepRecord { outcomes: outcomes.iter().map(|b| b.to_string()).collect(), probability, oracle });
    }
    Ok(records)
}

fn optics_run(recipe: Option<&Path>, sweep_outcomes: bool, json: &Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let (name, steps) = match recipe {
        Some(p) => (p.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned()), optics::parse_recipe(&read(p)?)?),
        None => ("built-in six-qubit".to_string(), optics::six_qubit_recipe()),
    };
    let run = optics::run_recipe(&steps)?;
    let p = run.register.cumulative_prob();
    let oracle = optics::global_projector_probability(&steps)?;
    let mut sorted = run.register.modes().to_vec();
    sorted.sort_unstable();
    let graph_fid = if sorted == [1, 2, 3, 4, 5, 6] {
        let graph = toffoli::build_resource(ResourceVariant::new(VariantKind::Six)).build_state().map_err(Failure::usage)?;
        Some(run.register.state_in_order(&[1, 2, 3, 4, 5, 6])?.fidelity(&graph).map_err(Failure::usage)?)
    } else {
        None
    };
    let _ = writeln!(out, "recipe {name}: {} steps", steps.len());
    for s in &run.snapshots {
        let _ = writeln!(out, "{:<6} modes {:?}  cumulative probability {:.6e}", s.label, s.modes, s.cumulative_prob);
    }
    let _ = writeln!(out, "coincidence probability {p:.12e} (oracle {oracle:.12e})");
    if let Some(f) = graph_fid {
        let _ = writeln!(out, "fidelity with the six-qubit graph state {f:.12}");
    }
    let records = if sweep_outcomes { sweep(&steps)? } else { Vec::new() };
    let mut ok = (p - oracle).abs() <= 1e-12;
    for r in &records {
        let _ = writeln!(out, "outcomes {}  probability {:.12e} (oracle {:.12e})", r.outcomes, r.probability, r.oracle);
        ok &= (r.probability - r.oracle).abs() <= 1e-12;
    }
    if recipe.is_none() {
        ok &= graph_fid.is_some_and(|f| f >= 1.0 - TOLERANCE);
    }
    let mut cmd = strs(&["optics", "run"]);
    if recipe.is_some() {
        cmd.extend(["--recipe".into(), name.clone()]);
    }
    if sweep_outcomes {
        cmd.push("--sweep-outcomes".into());
    }
    emit(
        json,
        cmd,
        OpticsInputs { recipe: name, steps: steps.len(), sweep_outcomes },
        OpticsResults {
            snapshots: run
                .snapshots
                .iter()
                .map(|s| SnapshotRecord { label: s.label.clone(), modes: s.modes.clone(), cumulative_probability: s.cumulative_prob })
                .collect(),
            final_modes: run.register.modes().to_vec(),
            coincidence_probability: p,
            oracle_probability: oracle,
            six_qubit_graph_fidelity: graph_fid,
            sweep: records,
        },
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}

#[derive(Serialize)]
struct VerifyInputs {
    seed: u64,
}

fn verify_all(seed: u64, json: &Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let report = acceptance::run_all(seed);
    for c in &report.criteria {
        let _ = writeln!(out, "{}", c.line());
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    let _ = writeln!(out, "{passed}/{} criteria passed", report.criteria.len());
    emit(json, vec!["verify".into(), "all".into(), "--seed".into(), seed.to_string()], VerifyInputs { seed }, &report.criteria)?;
    Ok(if report.all_passed { EXIT_OK } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut full = vec!["mbqc-toffoli"];
        full.extend_from_slice(args);
        let code = run(full, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["toffoli", "run", "--variant", "nine", "--input", "000"]).0, EXIT_USAGE);
        assert_eq!(call(&["toffoli", "run", "--input", "000", "--outcomes", "01"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn input_bits_follow_wire_order() {
        let s = parse_input("100").unwrap();
        assert_eq!(s.amplitudes()[1].re, 1.0);
        let s = parse_input("001").unwrap();
        assert_eq!(s.amplitudes()[4].re, 1.0);
    }

    #[test]
    fn run_prints_branch() {
        let (code, out, _) = call(&["toffoli", "run", "--variant", "seven", "--input", "110", "--outcomes", "1011"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("probability  0.062500000000"), "{out}");
        assert!(out.contains("success      yes"));
    }

    #[test]
    fn pi_fractions_echo() {
        assert_eq!(pi_fraction(Phase::pi()), "1");
        assert_eq!(pi_fraction(Phase::pi_frac(-1, 4)), "-1/4");
    }
}
