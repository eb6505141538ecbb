//! Human, JSON and CSV renderings of every command's result.
//!
//! JSON is one compact document per invocation with every natural number as
//! a decimal string. CSV always starts with a header row.

use std::collections::BTreeMap;
use std::io;

use clap::ValueEnum;
use collatz_lab::claims::PrimePair;
use collatz_lab::claims::Stat;
use collatz_lab::primes::{primality, Primality, DEFAULT_MR_ROUNDS};
use collatz_lab::{
    BackwardChain, BackwardPolicy, Budget, ClaimReport, ClaimSpec, GeneratorVerdict, Nat,
    OrderIndex, ScanRange, SpeedValue, Trajectory,
};
use serde::Serialize;

const HUMAN_PREVIEW: usize = 20;
const HUMAN_COUNTEREXAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

pub struct Out {
    pub format: Format,
    pub full: bool,
}

fn emit_json<T: Serialize + ?Sized>(value: &T) {
    let text = serde_json::to_string(value).expect("report types serialize");
    println!("{text}");
}

fn emit_csv<I>(header: &[&str], rows: I)
where
    I: IntoIterator<Item = Vec<String>>,
{
    let stdout = io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    w.write_record(header).expect("write to stdout");
    for row in rows {
        w.write_record(&row).expect("write to stdout");
    }
    w.flush().expect("write to stdout");
}

fn status(r: &OrderIndex) -> &'static str {
    if r.is_converged() {
        "converged"
    } else {
        "cap_exceeded"
    }
}

fn opt(v: Option<u64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl Out {
    fn preview<T: ToString>(&self, items: &[T]) -> String {
        let shown = if self.full {
            items.len()
        } else {
            items.len().min(HUMAN_PREVIEW)
        };
        let mut s: Vec<String> = items[..shown].iter().map(T::to_string).collect();
        if shown < items.len() {
            s.push(format!("... ({} total)", items.len()));
        }
        s.join(", ")
    }

    pub fn trajectory(&self, t: &Trajectory) {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: &'a Nat,
            steps: u64,
            status: &'a str,
            peak: &'a Nat,
            elements: &'a [Nat],
        }
        let st = if t.converged() {
            "converged"
        } else {
            "cap_exceeded"
        };
        match self.format {
            Format::Json => emit_json(&Doc {
                n: &t.start,
                steps: t.steps_taken(),
                status: st,
                peak: &t.peak,
                elements: &t.elements,
            }),
            Format::Csv => emit_csv(
                &["step", "value"],
                t.elements
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vec![(i + 1).to_string(), v.to_string()]),
            ),
            Format::Human => {
                println!("n:      {}", t.start);
                println!("steps:  {} ({st})", t.steps_taken());
                println!("peak:   {}", t.peak);
                println!("values: {}", self.preview(&t.elements));
            }
        }
    }

    pub fn order(&self, n: &Nat, r: &OrderIndex) {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: &'a Nat,
            tau: Option<u64>,
            ind: Option<u64>,
            status: &'a str,
        }
        match self.format {
            Format::Json => emit_json(&Doc {
                n,
                tau: r.tau(),
                ind: r.ind(),
                status: status(r),
            }),
            Format::Csv => emit_csv(
                &["n", "tau", "ind", "status"],
                [vec![
                    n.to_string(),
                    opt(r.tau()),
                    opt(r.ind()),
                    status(r).into(),
                ]],
            ),
            Format::Human => match r {
                OrderIndex::Converged { tau, ind } => {
                    println!("tau({n}) = {tau}, Ind({n}) = {ind}: f^{tau}({n}) = 2^{ind}")
                }
                OrderIndex::CapExceeded => println!("{n}: step cap exceeded before a power of two"),
            },
        }
    }

    pub fn speed(&self, n: &Nat, j: u64, k: u64, v: &SpeedValue) {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: &'a Nat,
            j: u64,
            k: u64,
            nu: String,
            numerator: &'a Nat,
            denominator: u64,
        }
        match self.format {
            Format::Json => emit_json(&Doc {
                n,
                j,
                k,
                nu: v.to_string(),
                numerator: v.numerator(),
                denominator: v.denominator(),
            }),
            Format::Csv => emit_csv(
                &["n", "j", "k", "nu"],
                [vec![
                    n.to_string(),
                    j.to_string(),
                    k.to_string(),
                    v.to_string(),
                ]],
            ),
            Format::Human => println!("{v}"),
        }
    }

    pub fn backward(&self, c: &BackwardChain) {
        #[derive(Serialize)]
        struct Doc<'a> {
            base: &'a Nat,
            policy: BackwardPolicy,
            depth: usize,
            elements: &'a [Nat],
        }
        match self.format {
            Format::Json => emit_json(&Doc {
                base: &c.base,
                policy: c.policy,
                depth: c.depth(),
                elements: &c.elements,
            }),
            Format::Csv => emit_csv(
                &["s", "value"],
                c.elements
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vec![(i + 1).to_string(), v.to_string()]),
            ),
            Format::Human => {
                println!("base {} policy {} depth {}", c.base, c.policy, c.depth());
                println!("{}", self.preview(&c.elements));
            }
        }
    }

    pub fn generator(&self, n: &Nat, policy: BackwardPolicy, depth: usize, v: &GeneratorVerdict) {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: &'a Nat,
            policy: BackwardPolicy,
            max_depth: usize,
            #[serde(flatten)]
            verdict: &'a GeneratorVerdict,
        }
        let (name, d, w) = match v {
            GeneratorVerdict::Proved => ("proved", None, None),
            GeneratorVerdict::Refuted { depth, witness } => {
                ("refuted", Some(*depth), Some(witness))
            }
            GeneratorVerdict::UndecidedUpToDepth { depth } => {
                ("undecided_up_to_depth", Some(*depth), None)
            }
        };
        match self.format {
            Format::Json => emit_json(&Doc {
                n,
                policy,
                max_depth: depth,
                verdict: v,
            }),
            Format::Csv => emit_csv(
                &["n", "policy", "verdict", "depth", "witness"],
                [vec![
                    n.to_string(),
                    policy.to_string(),
                    name.into(),
                    d.map_or_else(String::new, |d| d.to_string()),
                    w.map_or_else(String::new, Nat::to_string),
                ]],
            ),
            Format::Human => match v {
                GeneratorVerdict::Proved => {
                    println!("{n} is a generator: 3 | {n}, so every backward element is even")
                }
                GeneratorVerdict::Refuted { depth, witness } => println!(
                    "{n} is not a generator: odd backward element {witness} at depth {depth}"
                ),
                GeneratorVerdict::UndecidedUpToDepth { depth } => {
                    println!("{n}: backward chain stays even to depth {depth}; undecided")
                }
            },
        }
    }

    pub fn translate(&self, n: &Nat, policy: BackwardPolicy, chain: &[Nat], pairs: &[PrimePair]) {
        #[derive(Serialize)]
        struct Element<'a> {
            s: usize,
            value: &'a Nat,
            primality: Primality,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            base: &'a Nat,
            policy: BackwardPolicy,
            elements: Vec<Element<'a>>,
            prime_pairs: &'a [PrimePair],
        }
        let flags: Vec<Primality> = chain
            .iter()
            .map(|e| primality(e, DEFAULT_MR_ROUNDS))
            .collect();
        match self.format {
            Format::Json => emit_json(&Doc {
                base: n,
                policy,
                elements: chain
                    .iter()
                    .zip(&flags)
                    .enumerate()
                    .map(|(i, (value, &primality))| Element {
                        s: i + 1,
                        value,
                        primality,
                    })
                    .collect(),
                prime_pairs: pairs,
            }),
            Format::Csv => emit_csv(
                &["s", "value", "primality"],
                chain.iter().zip(&flags).enumerate().map(|(i, (v, p))| {
                    vec![
                        (i + 1).to_string(),
                        v.to_string(),
                        primality_name(*p).into(),
                    ]
                }),
            ),
            Format::Human => {
                println!("translate of {n} under {policy}");
                let marked: Vec<String> = chain
                    .iter()
                    .zip(&flags)
                    .map(|(v, p)| match p {
                        Primality::Composite => v.to_string(),
                        Primality::Prime => format!("{v}*"),
                        Primality::ProbablePrime => format!("{v}?"),
                    })
                    .collect();
                println!("{}", self.preview(&marked));
                println!("(* prime, ? probable prime)");
                for p in pairs {
                    let sg = if p.sophie_germain {
                        "Sophie Germain"
                    } else {
                        "NOT Sophie Germain"
                    };
                    println!(
                        "consecutive primes c_{} = {}, c_{} = {}: {sg}",
                        p.index,
                        p.lower,
                        p.index + 1,
                        p.upper
                    );
                }
            }
        }
    }

    pub fn sumlog(&self, n: &Nat, sums: &[f64]) {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: &'a Nat,
            terms: usize,
            sums: &'a [f64],
        }
        match self.format {
            Format::Json => emit_json(&Doc {
                n,
                terms: sums.len(),
                sums,
            }),
            Format::Csv => emit_csv(
                &["t", "partial_sum"],
                sums.iter()
                    .enumerate()
                    .map(|(i, s)| vec![(i + 1).to_string(), s.to_string()]),
            ),
            Format::Human => {
                let shown: Vec<String> = sums.iter().map(|s| format!("{s:.6}")).collect();
                println!("{}", self.preview(&shown));
            }
        }
    }

    pub fn claim_list(&self, claims: &[ClaimSpec]) {
        let policy = |c: &ClaimSpec| c.policy.map_or_else(|| "-".to_string(), |p| p.to_string());
        match self.format {
            Format::Json => emit_json(claims),
            Format::Csv => emit_csv(
                &["id", "kind", "policy", "statement", "bounded_semantics"],
                claims.iter().map(|c| {
                    vec![
                        c.id.into(),
                        c.kind.to_string(),
                        policy(c),
                        c.statement.into(),
                        c.bounded_semantics.into(),
                    ]
                }),
            ),
            Format::Human => {
                for c in claims {
                    println!(
                        "{:<11}{:<15}{:<8}{}",
                        c.id,
                        c.kind.to_string(),
                        policy(c),
                        c.statement
                    );
                }
            }
        }
    }

    pub fn reports(&self, reports: &[ClaimReport]) {
        match self.format {
            Format::Json => emit_json(reports),
            Format::Csv => emit_csv(
                &[
                    "id",
                    "range_lo",
                    "range_hi",
                    "max_steps",
                    "depth",
                    "window",
                    "policy",
                    "checked",
                    "counterexamples_total",
                    "verdict",
                    "first_counterexample",
                    "statistics",
                    "elapsed",
                ],
                reports.iter().map(|r| {
                    vec![
                        r.id.clone(),
                        r.range.lo.to_string(),
                        r.range.hi.to_string(),
                        r.budget.max_steps.to_string(),
                        r.budget.depth.to_string(),
                        r.budget.window.to_string(),
                        r.policy.map_or_else(String::new, |p| p.to_string()),
                        r.checked.to_string(),
                        count(&r.statistics, "counterexamples_total"),
                        r.verdict.to_string(),
                        r.counterexamples
                            .first()
                            .map_or_else(String::new, |c| c.input.to_string()),
                        r.statistics
                            .iter()
                            .map(|(k, v)| format!("{k}={v}"))
                            .collect::<Vec<_>>()
                            .join(";"),
                        format!("{:.3}", r.elapsed),
                    ]
                }),
            ),
            Format::Human => {
                for (i, r) in reports.iter().enumerate() {
                    if i > 0 {
                        println!();
                    }
                    self.human_report(r);
                }
            }
        }
    }

    fn human_report(&self, r: &ClaimReport) {
        let Budget {
            max_steps,
            depth,
            window,
        } = r.budget;
        println!("{}  {}", r.id, r.verdict);
        print!(
            "  range {}  max_steps {max_steps}  depth {depth}  window {window}",
            r.range
        );
        match r.policy {
            Some(p) => println!("  policy {p}"),
            None => println!(),
        }
        println!("  checked {}", r.checked);
        if !r.counterexamples.is_empty() {
            println!(
                "  counterexamples: {} total, {} listed",
                count(&r.statistics, "counterexamples_total"),
                r.counterexamples.len()
            );
            let shown = if self.full {
                r.counterexamples.len()
            } else {
                r.counterexamples.len().min(HUMAN_COUNTEREXAMPLES)
            };
            for c in &r.counterexamples[..shown] {
                println!("    {}: {}", c.input, c.detail);
            }
            if shown < r.counterexamples.len() {
                println!("    ... (--full lists all)");
            }
        }
        for (k, v) in &r.statistics {
            println!("  {k} = {v}");
        }
        for note in &r.notes {
            println!("  note: {note}");
        }
        println!("  elapsed {:.3}s", r.elapsed);
    }

    pub fn scan(&self, range: ScanRange, results: &[(u64, OrderIndex)]) {
        #[derive(Serialize)]
        struct Row {
            n: Nat,
            tau: Option<u64>,
            ind: Option<u64>,
            status: &'static str,
        }
        #[derive(Serialize)]
        struct Doc {
            range: ScanRange,
            results: Vec<Row>,
        }
        match self.format {
            Format::Json => emit_json(&Doc {
                range,
                results: results
                    .iter()
                    .map(|(n, r)| Row {
                        n: Nat::from(*n),
                        tau: r.tau(),
                        ind: r.ind(),
                        status: status(r),
                    })
                    .collect(),
            }),
            Format::Csv => emit_csv(
                &["n", "tau", "ind", "status"],
                results.iter().map(|(n, r)| {
                    vec![n.to_string(), opt(r.tau()), opt(r.ind()), status(r).into()]
                }),
            ),
            Format::Human => {
                let converged = results.iter().filter(|(_, r)| r.is_converged()).count();
                println!(
                    "range {range}: {} values, {converged} converged",
                    results.len()
                );
                let longest = results
                    .iter()
                    .filter_map(|(n, r)| r.tau().map(|t| (t, *n)))
                    .max_by_key(|&(t, n)| (t, std::cmp::Reverse(n)));
                if let Some((tau, n)) = longest {
                    println!("largest tau = {tau} at n = {n}");
                }
                let mut by_ind: BTreeMap<u64, u64> = BTreeMap::new();
                for ind in results.iter().filter_map(|(_, r)| r.ind()) {
                    *by_ind.entry(ind).or_default() += 1;
                }
                for (ind, c) in by_ind {
                    println!("Ind = {ind}: {c}");
                }
                if converged < results.len() {
                    println!("cap exceeded: {}", results.len() - converged);
                }
            }
        }
    }
}

fn primality_name(p: Primality) -> &'static str {
    match p {
        Primality::Composite => "composite",
        Primality::Prime => "prime",
        Primality::ProbablePrime => "probable_prime",
    }
}

fn count(stats: &BTreeMap<String, Stat>, key: &str) -> String {
    stats.get(key).map_or_else(|| "0".into(), Stat::to_string)
}
