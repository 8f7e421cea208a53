use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use semiorbit::activity::{automaton_active_acceptor, count_words, growth_class, GrowthClass};
use semiorbit::decision::{
    build_orbit_buchi, decide_r_finiteness, decide_subsemigroup_finiteness, dual_torsion_checks,
    UltimatelyPeriodicWord, Verdict,
};
use semiorbit::expansion::build_nfra;
use semiorbit::instance::{parse_subset, resolve_language, RSpec};
use semiorbit::orbits::{find_expander, orbital_transducer, product_with_r, r_orbit_size, NerodeDfa};
use semiorbit::semigroup::{discover_closed_subsets, saturate, DEFAULT_CAP};
use semiorbit::{corpus, parse_instance, Error, ProblemInstance, SAutomaton, SaturatedAutomaton};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "semiorbit", version, about = "Orbits and finiteness of automaton semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Instance file, or `corpus:<name>` for a bundled example.
    instance: String,
    /// Override the `S` directive, e.g. `{e,z}` or `Q`.
    #[arg(long = "S", value_name = "SUBSET")]
    s: Option<String>,
    /// Override the `R` directive: `Q*`, a regex over state names, or `@file.dfa`.
    #[arg(long = "R", value_name = "LANGUAGE")]
    r: Option<String>,
    /// Element cap for semigroup enumeration.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Print `key: value` lines instead of JSON.
    #[arg(long)]
    text: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Growth class of the S-activity.
    Activity(Common),
    /// Size of the R-orbit of a word.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        word: String,
        /// Write the product with R as Graphviz.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Whether the image of R in the semigroup is finite.
    Finite(Common),
    /// Whether the subsemigroup generated by some state words is finite.
    SubFinite {
        #[command(flatten)]
        common: Common,
        /// Comma-separated generator words.
        #[arg(long)]
        gens: String,
    },
    /// Torsion questions for the semigroup of the dual automaton.
    Torsion(Common),
    /// The acceptor of ω-words with infinite R-orbit.
    Buchi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// The finiteness verdict with orbit sizes along the witness.
    Witness(Common),
    /// Closed state subsets and the size of their semigroups.
    Closed(Common),
    /// Graphviz output: the automaton, or with `--word` the product with R,
    /// or with `--word` and `--nfra` the relation acceptor.
    Dot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        word: Option<String>,
        #[arg(long, requires = "word")]
        nfra: bool,
    },
}

struct Loaded {
    inst: ProblemInstance,
    base: Option<PathBuf>,
    common_r: RSpec,
    s: Option<Vec<usize>>,
}

impl Loaded {
    fn new(c: &Common) -> Result<Loaded, Error> {
        let (text, base) = match c.instance.strip_prefix("corpus:") {
            Some(name) => {
                let (_, t) = corpus::ALL
                    .iter()
                    .find(|(n, _)| *n == name)
                    .ok_or_else(|| Error::Input(format!("no bundled example named {name:?}")))?;
                (t.to_string(), None)
            }
            None => {
                let path = Path::new(&c.instance);
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
                (text, path.parent().map(Path::to_path_buf))
            }
        };
        let inst = parse_instance(&text)?;
        let s = match &c.s {
            Some(s) => Some(parse_subset(&inst.automaton, s)?),
            None => inst.s.clone(),
        };
        let common_r = match &c.r {
            Some(r) => RSpec::parse(r),
            None => inst.r.clone(),
        };
        Ok(Loaded {
            inst,
            base,
            common_r,
            s,
        })
    }

    fn t(&self) -> &SAutomaton {
        &self.inst.automaton
    }

    fn s(&self) -> Result<&[usize], Error> {
        self.s
            .as_deref()
            .ok_or_else(|| Error::Input("no S given; add an `S = {...}` line or pass --S".into()))
    }

    fn language(&self) -> Result<NerodeDfa, Error> {
        let dfa = resolve_language(self.t(), &self.common_r, |p| {
            let path = match &self.base {
                Some(b) => b.join(p),
                None => PathBuf::from(p),
            };
            std::fs::read_to_string(&path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
        })?;
        NerodeDfa::new(&dfa)
    }

    fn saturated(&self, cap: usize) -> Result<SaturatedAutomaton, Error> {
        saturate(self.t(), self.s()?, cap)
    }
}

fn witness_json(t: &SAutomaton, w: &UltimatelyPeriodicWord) -> Value {
    json!({
        "stem": t.format_letter_word(&w.stem),
        "loop": t.format_letter_word(&w.period),
    })
}

fn verdict_json(t: &SAutomaton, v: &Verdict) -> Map<String, Value> {
    let mut m = Map::new();
    match v {
        Verdict::Finite { order } => {
            m.insert("verdict".into(), json!("finite"));
            m.insert("order".into(), json!(order));
        }
        Verdict::Infinite { witness } => {
            m.insert("verdict".into(), json!("infinite"));
            m.insert("witness".into(), witness_json(t, witness));
        }
    }
    m
}

fn class_json(c: GrowthClass) -> (Value, Value) {
    match c {
        GrowthClass::Finite => (json!("finite"), Value::Null),
        GrowthClass::Polynomial(d) => (json!("polynomial"), json!(d)),
        GrowthClass::Exponential => (json!("exponential"), Value::Null),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

enum Output {
    Report(Map<String, Value>),
    Raw(String),
}

fn run(cmd: &Command) -> Result<Output, Error> {
    let mut out = Map::new();
    match cmd {
        Command::Activity(c) => {
            let l = Loaded::new(c)?;
            let sa = l.saturated(c.cap)?;
            let nfa = automaton_active_acceptor(&sa).nfa;
            let report = growth_class(&nfa)?;
            let (class, degree) = class_json(report.class);
            out.insert("bounded".into(), json!(report.bounded));
            out.insert("class".into(), class);
            out.insert("degree".into(), degree);
            out.insert("sup_count".into(), json!(report.sup_count));
            out.insert("counts".into(), json!(count_words(&nfa, 8)?));
        }
        Command::Orbit { common, word, dot } => {
            let l = Loaded::new(common)?;
            let t = l.t();
            let w = t.parse_letter_word(word)?;
            let d = l.language()?;
            out.insert("word".into(), json!(t.format_letter_word(&w)));
            out.insert("orbit_size".into(), json!(r_orbit_size(t, &w, &d)?));
            let o = orbital_transducer(t, &w)?;
            let m = product_with_r(&o, &d)?;
            let words: BTreeSet<String> = (0..m.len())
                .filter(|&s| m.accepting[s])
                .map(|s| t.format_letter_word(&o.words[m.states[s].0]))
                .collect();
            out.insert("orbit".into(), json!(words));
            let expander = find_expander(t, &w, &d, 4)?.map(|x| t.format_letter_word(&x));
            out.insert("expander".into(), json!(expander));
            if let Some(path) = dot {
                write_file(path, &m.to_dot(&o, t))?;
            }
        }
        Command::Finite(c) => {
            let l = Loaded::new(c)?;
            let sa = l.saturated(c.cap)?;
            let d = l.language()?.lift(&sa)?;
            out.extend(verdict_json(l.t(), &decide_r_finiteness(&sa, &d)?));
        }
        Command::SubFinite { common, gens } => {
            let l = Loaded::new(common)?;
            let t = l.t();
            let gs = gens
                .split(',')
                .map(|g| t.parse_state_word(g.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            out.insert(
                "gens".into(),
                json!(gs.iter().map(|g| t.format_state_word(g)).collect::<Vec<_>>()),
            );
            out.extend(verdict_json(t, &decide_subsemigroup_finiteness(t, l.s()?, &gs, common.cap)?));
        }
        Command::Torsion(c) => {
            let l = Loaded::new(c)?;
            let r = dual_torsion_checks(&l.saturated(c.cap)?)?;
            out.insert("has_torsion_element".into(), json!(r.has_torsion_element));
            out.insert("has_element_without_torsion".into(), json!(r.has_element_without_torsion));
            out.insert("torsion_free".into(), json!(r.torsion_free));
        }
        Command::Buchi { common, dot } => {
            let l = Loaded::new(common)?;
            let sa = l.saturated(common.cap)?;
            let d = l.language()?.lift(&sa)?;
            let ob = build_orbit_buchi(&sa, &d)?;
            let t = l.t();
            let reps: Vec<String> = ob.representatives.iter().map(|w| t.format_letter_word(w)).collect();
            let marked = ob.buchi.edges.iter().flatten().filter(|e| e.2).count();
            out.insert("states".into(), json!(ob.buchi.num_states()));
            out.insert("accepting_transitions".into(), json!(marked));
            out.insert("representatives".into(), json!(reps));
            out.insert("activity_bound".into(), json!(ob.activity_bound));
            if let Some(path) = dot {
                let labels: Vec<String> = reps.iter().map(|r| if r.is_empty() { "ε".into() } else { r.clone() }).collect();
                write_file(path, &ob.buchi.to_dot(t.letters(), Some(&labels)))?;
            }
        }
        Command::Witness(c) => {
            let l = Loaded::new(c)?;
            let sa = l.saturated(c.cap)?;
            let d = l.language()?.lift(&sa)?;
            let v = decide_r_finiteness(&sa, &d)?;
            if let Verdict::Infinite { witness } = &v {
                let mut word = witness.stem.clone();
                let mut sizes = vec![r_orbit_size(&sa.automaton, &word, &d)?];
                for _ in 0..4 {
                    word = word.concat(&witness.period);
                    sizes.push(r_orbit_size(&sa.automaton, &word, &d)?);
                }
                out.insert("orbit_sizes".into(), json!(sizes));
            }
            out.extend(verdict_json(l.t(), &v));
        }
        Command::Closed(c) => {
            let l = Loaded::new(c)?;
            let t = l.t();
            let list: Vec<Value> = discover_closed_subsets(t, c.cap)?
                .into_iter()
                .map(|(s, e)| {
                    let names: Vec<&str> = s.iter().map(|&i| t.state_name(i)).collect();
                    json!({
                        "subset": format!("{{{}}}", names.join(",")),
                        "order": e.finite().map(|f| f.len()),
                    })
                })
                .collect();
            out.insert("subsets".into(), json!(list));
        }
        Command::Dot { common, word, nfra } => {
            let l = Loaded::new(common)?;
            let t = l.t();
            let Some(word) = word else { return Ok(Output::Raw(t.to_dot())) };
            let w = t.parse_letter_word(word)?;
            if *nfra {
                let sa = l.saturated(common.cap)?;
                let d = l.language()?.lift(&sa)?;
                let (a, _) = build_nfra(&sa, &w, &d, None)?;
                return Ok(Output::Raw(a.to_dot(sa.automaton.states())));
            }
            let d = l.language()?;
            let o = orbital_transducer(t, &w)?;
            return Ok(Output::Raw(product_with_r(&o, &d)?.to_dot(&o, t)));
        }
    }
    Ok(Output::Report(out))
}

fn command_name(cmd: &Command) -> (&'static str, &Common) {
    match cmd {
        Command::Activity(c) => ("activity", c),
        Command::Orbit { common, .. } => ("orbit", common),
        Command::Finite(c) => ("finite", c),
        Command::SubFinite { common, .. } => ("sub-finite", common),
        Command::Torsion(c) => ("torsion", c),
        Command::Buchi { common, .. } => ("buchi", common),
        Command::Witness(c) => ("witness", c),
        Command::Closed(c) => ("closed", c),
        Command::Dot { common, .. } => ("dot", common),
    }
}

fn render(m: &Map<String, Value>, text: bool) -> String {
    if !text {
        return serde_json::to_string(m).expect("reports serialize");
    }
    m.iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}: {s}"),
            other => format!("{k}: {other}"),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn exit_code(e: &Error) -> (u8, &'static str) {
    match e {
        Error::Input(_) | Error::Parse { .. } => (1, "input"),
        Error::Precondition(_) => (2, "precondition"),
        Error::Resource(_) => (3, "resource"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = command_name(&cli.command);
    let mut head = Map::new();
    head.insert("schema".into(), json!(SCHEMA));
    head.insert("command".into(), json!(name));
    match run(&cli.command) {
        Ok(Output::Raw(s)) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Ok(Output::Report(body)) => {
            head.extend(body);
            println!("{}", render(&head, common.text));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (code, kind) = exit_code(&e);
            head.insert("error".into(), json!({"kind": kind, "message": e.to_string()}));
            println!("{}", render(&head, common.text));
            eprintln!("semiorbit: {e}");
            ExitCode::from(code)
        }
    }
}

