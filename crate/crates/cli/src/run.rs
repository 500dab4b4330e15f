use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use splc_core::cost::cost_to_json;
use splc_core::frontend::{parse_expr, pretty};
use splc_core::gen::{generate, GenConfig};
use splc_core::lospre::{derive_instance, CostK, LospreInstance, LospreSolution};
use splc_core::oracle::{brute_force_lospre, brute_force_ra, OracleBudget, OracleError};
use splc_core::regalloc::{
    min_cost_allocation_with, min_registers, spill_free_with, CostModel, PartialAssignment, RaOptions, SpillFree,
    SpillWeights,
};
use splc_core::spl::{decomposition_to_dot, graph_to_dot};
use splc_core::{Cost, Program};

use crate::{Cli, Command, Format, Input, LospreSource, OracleCommand, RaArgs};

pub const OK: u8 = 0;
pub const NEGATIVE: u8 = 1;
pub const USAGE: u8 = 2;
pub const INPUT: u8 = 3;
pub const BUDGET: u8 = 4;

/// A reason to stop, with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        Failure::new(BUDGET, e.to_string())
    }
}

/// What to print and the status to exit with.
struct Output {
    stdout: String,
    dot: Option<String>,
    code: u8,
}

impl Output {
    fn ok(stdout: String) -> Output {
        Output { stdout, dot: None, code: OK }
    }

    fn with_dot(mut self, dot: String) -> Output {
        self.dot = Some(dot);
        self
    }

    fn verdict(mut self, positive: bool) -> Output {
        self.code = if positive { OK } else { NEGATIVE };
        self
    }
}

pub fn run(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(out) => {
            if let (Some(path), Some(dot)) = (&cli.dot, &out.dot) {
                if let Err(e) = std::fs::write(path, dot) {
                    eprintln!("splc: cannot write {}: {e}", path.display());
                    return INPUT;
                }
            }
            print!("{}", out.stdout);
            out.code
        }
        Err(f) => {
            eprintln!("splc: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let format = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Parse { input, require_closed } => parse_cmd(input, format, *require_closed),
        Command::Decompose { input, tree } => decompose_cmd(input, format, *tree),
        Command::Liveness { input } => liveness_cmd(input, format),
        Command::Regalloc { input, min_registers: true, max, .. } => {
            min_registers_cmd(input, max.expect("clap requires --max"), format)
        }
        Command::Regalloc { input, ra, canonical, no_early_exit, .. } => {
            let options = RaOptions { canonical: *canonical, early_exit: !*no_early_exit };
            regalloc_cmd(input, ra, options, format)
        }
        Command::Lospre { input, source } => lospre_cmd(input, source, format, None),
        Command::Oracle { which: OracleCommand::Ra { input, ra, budget } } => oracle_ra_cmd(input, ra, *budget, format),
        Command::Oracle { which: OracleCommand::Lospre { input, source, budget } } => {
            lospre_cmd(input, source, format, Some(*budget))
        }
        Command::Gen { seed, statements, vars, depth } => {
            if *statements == 0 || *vars == 0 {
                return Err(Failure::new(USAGE, "--statements and --vars must be positive"));
            }
            let config =
                GenConfig { statements: *statements, variables: *vars, max_depth: *depth, ..GenConfig::default() };
            Ok(Output::ok(generate(*seed, &config) + "\n"))
        }
    }
}

fn read_text(path: Option<&Path>) -> Result<(String, String), Failure> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p)
            .map(|text| (p.display().to_string(), text))
            .map_err(|e| Failure::new(INPUT, format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::new(INPUT, format!("cannot read stdin: {e}")))?;
            Ok(("<stdin>".to_string(), text))
        }
    }
}

fn load(input: &Input) -> Result<Program, Failure> {
    let (name, text) = read_text(input.file.as_deref())?;
    Program::parse(&text).map_err(|e| Failure::new(INPUT, format!("{name}:{e}")))
}

fn load_closed(input: &Input) -> Result<Program, Failure> {
    let program = load(input)?;
    if !program.graph.is_closed() {
        return Err(Failure::new(NEGATIVE, "program is not closed: break or continue outside a loop"));
    }
    Ok(program)
}

fn json(value: &serde_json::Value) -> String {
    serde_json::to_string(value).expect("JSON values serialise") + "\n"
}

fn unsupported(format: Format, what: &str) -> Failure {
    let name = match format {
        Format::Json => "json",
        Format::Dot => "dot",
        Format::Text => "text",
    };
    Failure::new(USAGE, format!("--format {name} is not available for {what}"))
}

fn parse_cmd(input: &Input, format: Format, require_closed: bool) -> Result<Output, Failure> {
    let (name, text) = read_text(input.file.as_deref())?;
    let ast = splc_core::parse(&text).map_err(|e| Failure::new(INPUT, format!("{name}:{e}")))?;
    let closed = splc_core::check_closed(&ast);
    let stdout = match format {
        Format::Json => json(&serde_json::json!({ "closed": closed, "ast": ast.to_json() })),
        Format::Text => format!("{}\nclosed: {closed}\n", pretty(&ast)),
        Format::Dot => return Err(unsupported(format, "parse")),
    };
    Ok(Output::ok(stdout).verdict(closed || !require_closed))
}

fn decompose_cmd(input: &Input, format: Format, tree: bool) -> Result<Output, Failure> {
    let p = load(input)?;
    let dot = if tree { decomposition_to_dot(&p.decomp) } else { graph_to_dot(&p.graph) };
    let stdout = match format {
        Format::Json => json(&serde_json::json!({
            "closed": p.graph.is_closed(),
            "graph": p.graph.to_json(),
            "decomposition": p.decomp.to_json(),
        })),
        Format::Dot => dot.clone(),
        Format::Text => {
            let mut s = String::new();
            let b = p.graph.boundary();
            let _ = writeln!(s, "vertices: {} (S={} T={} B={} C={})", p.graph.vertex_count(), b.s, b.t, b.b, b.c);
            for e in p.graph.edges() {
                let labels: Vec<String> = e.labels.iter().map(|l| l.to_string()).collect();
                let _ = writeln!(s, "{} -> {}  {}", e.src, e.dst, labels.join("; "));
            }
            let _ = writeln!(s, "decomposition: {}", p.decomp.outline());
            s
        }
    };
    Ok(Output::ok(stdout).with_dot(dot))
}

fn liveness_cmd(input: &Input, format: Format) -> Result<Output, Failure> {
    let p = load(input)?;
    let dot = p.interference.to_dot();
    let stdout = match format {
        Format::Json => json(&p.live.to_json(&p.interference)),
        Format::Dot => dot.clone(),
        Format::Text => {
            let mut s = String::new();
            for (v, _) in p.live.vertices() {
                let _ = writeln!(s, "L({v}) = {{{}}}", p.live.names_at_vertex(v).join(", "));
            }
            for [a, b] in p.interference.edge_names() {
                let _ = writeln!(s, "{a} -- {b}");
            }
            s
        }
    };
    Ok(Output::ok(stdout).with_dot(dot))
}

fn registers(ra: &RaArgs) -> Result<u32, Failure> {
    ra.registers.ok_or_else(|| Failure::new(USAGE, "the register count -r is required"))
}

fn cost_model(p: &Program, ra: &RaArgs) -> Result<Box<dyn CostModel>, Failure> {
    if ra.spill_free {
        return Ok(Box::new(SpillFree));
    }
    match &ra.cost {
        None => Ok(Box::new(SpillWeights::unit())),
        Some(path) => {
            let (_, text) = read_text(Some(path))?;
            SpillWeights::from_json(&text, &p.graph, p.live.vars())
                .map(|m| Box::new(m) as Box<dyn CostModel>)
                .map_err(|e| Failure::new(INPUT, format!("{}: {e}", path.display())))
        }
    }
}

fn assignment_text(p: &Program, a: Option<&PartialAssignment>) -> String {
    match a {
        None => "none".to_string(),
        Some(a) => {
            let parts: Vec<String> =
                a.pairs().iter().map(|(v, s)| format!("{} -> {s}", p.live.vars().name(*v))).collect();
            parts.join(", ")
        }
    }
}

fn ra_output(
    p: &Program,
    ra: &RaArgs,
    cost: Cost,
    assignment: Option<&PartialAssignment>,
    format: Format,
) -> Result<Output, Failure> {
    let vars = p.live.vars();
    let stdout = match (format, ra.spill_free) {
        (Format::Json, true) => json(&serde_json::json!({
            "feasible": cost == Cost::ZERO,
            "assignment": assignment.map(|a| a.to_json(vars)),
            "registers": registers(ra)?,
        })),
        (Format::Json, false) => json(&serde_json::json!({
            "cost": cost_to_json(&cost),
            "assignment": assignment.map(|a| a.to_json(vars)),
            "registers": registers(ra)?,
        })),
        (Format::Text, true) => {
            format!("feasible: {}\nassignment: {}\n", cost == Cost::ZERO, assignment_text(p, assignment))
        }
        (Format::Text, false) => format!("cost: {cost}\nassignment: {}\n", assignment_text(p, assignment)),
        (Format::Dot, _) => graph_to_dot(&p.graph),
    };
    let positive = if ra.spill_free { cost == Cost::ZERO } else { cost.is_finite() };
    Ok(Output::ok(stdout).with_dot(graph_to_dot(&p.graph)).verdict(positive))
}

fn regalloc_cmd(input: &Input, ra: &RaArgs, options: RaOptions, format: Format) -> Result<Output, Failure> {
    let p = load_closed(input)?;
    if ra.spill_free {
        let res = spill_free_with(p.ra_problem(), registers(ra)?, options);
        let cost = if res.feasible { Cost::ZERO } else { Cost::Infinite };
        return ra_output(&p, ra, cost, res.assignment.as_ref(), format);
    }
    let model = cost_model(&p, ra)?;
    let res = min_cost_allocation_with(p.ra_problem(), model.as_ref(), registers(ra)?, options);
    ra_output(&p, ra, res.cost, res.assignment.as_ref(), format)
}

fn min_registers_cmd(input: &Input, max: u32, format: Format) -> Result<Output, Failure> {
    let p = load_closed(input)?;
    let found = min_registers(p.ra_problem(), max);
    let stdout = match (format, found) {
        (Format::Dot, _) => return Err(unsupported(format, "--min-registers")),
        (_, Some(r)) => format!("{r}\n"),
        (Format::Json, None) => "null\n".to_string(),
        (Format::Text, None) => format!("more than {max}\n"),
    };
    Ok(Output::ok(stdout).verdict(found.is_some()))
}

fn oracle_ra_cmd(input: &Input, ra: &RaArgs, budget: u64, format: Format) -> Result<Output, Failure> {
    let p = load_closed(input)?;
    let model = cost_model(&p, ra)?;
    let budget = oracle_budget(budget);
    let res = brute_force_ra(&p.graph, &p.live, &p.interference, model.as_ref(), registers(ra)?, &budget)?;
    ra_output(&p, ra, res.cost, res.assignment.as_ref(), format)
}

fn oracle_budget(max_enumeration: u64) -> OracleBudget {
    OracleBudget { max_vars: 64, max_vertices: 63, max_registers: u32::MAX - 1, max_enumeration }
}

fn instance(p: &Program, source: &LospreSource) -> Result<LospreInstance, Failure> {
    match (&source.instance, &source.expr) {
        (Some(path), _) => {
            let (_, text) = read_text(Some(path))?;
            LospreInstance::from_json(&text, &p.graph)
                .map_err(|e| Failure::new(INPUT, format!("{}: {e}", path.display())))
        }
        (None, Some(text)) => {
            let e = parse_expr(text).map_err(|e| Failure::new(INPUT, format!("--expr:{e}")))?;
            Ok(derive_instance(&p.graph, &e, CostK::ints(1, 0), CostK::ints(0, 1)))
        }
        (None, None) => Err(Failure::new(USAGE, "one of --instance or --expr is required")),
    }
}

fn lospre_cmd(input: &Input, source: &LospreSource, format: Format, budget: Option<u64>) -> Result<Output, Failure> {
    let p = load_closed(input)?;
    let inst = instance(&p, source)?;
    let sol: LospreSolution = match budget {
        None => splc_core::lospre::solve(&p.graph, &p.decomp, &inst).map_err(|e| Failure::new(INPUT, e.to_string()))?,
        Some(b) => brute_force_lospre(&p.graph, &inst, &oracle_budget(b))?,
    };
    let stdout = match format {
        Format::Json => json(&sol.to_json()),
        Format::Text => {
            let life: Vec<String> = sol.life_set.iter().map(|v| v.to_string()).collect();
            let calc: Vec<String> = sol.calculating_set.iter().map(|(x, y)| format!("({x},{y})")).collect();
            format!("cost: {}\nlife set: {{{}}}\ncalculating set: {{{}}}\n", sol.cost, life.join(", "), calc.join(", "))
        }
        Format::Dot => graph_to_dot(&p.graph),
    };
    Ok(Output::ok(stdout).with_dot(graph_to_dot(&p.graph)))
}
