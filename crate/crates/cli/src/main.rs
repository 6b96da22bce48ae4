//! `chandas`: scansion, meter validation, n-gram training and metrically
//! constrained generation from the command line.

use std::io::{self, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use chandas::decode::mask_service::{serve_mask, serve_mask_tcp, MaskServiceConfig};
use chandas::decode::{
    run_batch, BenchReport, DecodeConfig, DecodeError, GenerateRequest, Generation, Partial,
    SamplerSpec,
};
use chandas::eval::{evaluate, evaluate_generations, ingest, parse_corpus, EvalError, Format};
use chandas::lm::{LanguageModel, LmError, LocalLm, NgramModel, RemoteLm, Vocab};
use chandas::meter::{MeterError, MeterSpec};
use chandas::prosody::{ganas, weigh, Mode};
use chandas::script::{nfc, parse, syllabify, Script, ScriptError};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "chandas", version, about = "Sanskrit prosody: scansion, meter validation and constrained verse generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split text into syllables.
    Syllabify(TextArgs),
    /// Print the laghu/guru weights of a text.
    Scan(TextArgs),
    /// Classify verses against a meter.
    Validate(ValidateArgs),
    /// Train the n-gram reference model.
    TrainLm(TrainArgs),
    /// Generate verses under the meter.
    Generate(GenerateArgs),
    /// Evaluate a corpus, or a batch of fresh generations.
    Eval(EvalArgs),
    /// Measure decoding latency and throughput.
    Bench(BenchArgs),
    /// Answer mask queries from an external decoding loop.
    ServeMask(ServeMaskArgs),
}

#[derive(Args)]
struct TextArgs {
    /// Text to process; reads stdin when neither this nor --file is given.
    #[arg(long, conflicts_with = "file")]
    text: Option<String>,
    /// File with one text per line.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Input script; detected per line when omitted.
    #[arg(long)]
    script: Option<Script>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MeterArgs {
    /// Meter spec file or builtin name.
    #[arg(long, default_value = "anustubh")]
    meter: String,
    /// Colon-separated directories searched for meter files.
    #[arg(long, env = "CHANDAS_METER_PATH", hide_env_values = true)]
    meter_path: Option<String>,
}

impl MeterArgs {
    fn spec(&self) -> Result<MeterSpec, Failure> {
        Ok(MeterSpec::resolve(&self.meter, self.meter_path.as_deref())?)
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    meter: MeterArgs,
    /// A single verse.
    #[arg(long, conflicts_with = "file")]
    text: Option<String>,
    /// Corpus file (JSONL or TSV).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Corpus format; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus (JSONL or TSV).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long, default_value_t = chandas::lm::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = chandas::lm::DEFAULT_SMOOTHING)]
    smoothing: f64,
    /// Every n-th verse is held out to measure perplexity (0: none).
    #[arg(long, default_value_t = 0)]
    holdout_every: usize,
    /// Where to write the model.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    meter: MeterArgs,
    /// Model file, or tcp://host:port of a model server.
    #[arg(long)]
    lm: String,
    /// Vocabulary for a remote model: a model file or a JSON token array.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Seconds to wait for a remote model.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    #[arg(long, default_value_t = 25)]
    k_init: usize,
    /// Escalation ceiling; defaults to the vocabulary size.
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    k_growth: f64,
    #[arg(long, default_value = "greedy")]
    sampler: String,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    top_p: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    cache_size: usize,
    /// Do not enforce the meter; score the output afterwards instead.
    #[arg(long)]
    no_mask: bool,
    /// Number of generations; generation i uses seed + i.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Text every verse must start with.
    #[arg(long, default_value = "")]
    prefix: String,
    /// File of prefixes, one per line, used in turn.
    #[arg(long)]
    prefixes: Option<PathBuf>,
    /// Conditioning text seen by the model but not part of the verse.
    #[arg(long, default_value = "")]
    prompt: String,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    decode: DecodeArgs,
    #[arg(long)]
    json: bool,
    /// Leave wall-clock fields out so output is reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    meter: MeterArgs,
    /// Corpus to evaluate.
    #[arg(long, conflicts_with = "lm")]
    file: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Generate with this model and evaluate the results instead.
    #[arg(long)]
    lm: Option<String>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value = "greedy")]
    sampler: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_mask: bool,
    /// Also write per-record verdicts as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the JSON report (the default output is a summary line).
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    decode: DecodeArgs,
    /// Run twice, with the configured cache and with none.
    #[arg(long)]
    compare_cache: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeMaskArgs {
    #[command(flatten)]
    meter: MeterArgs,
    /// Listen on this TCP address instead of serving one session on stdio.
    #[arg(long)]
    listen: Option<String>,
    #[arg(long, default_value_t = 1000)]
    cache_size: usize,
}

/// A domain error: reported on stderr, exit status 1.
#[derive(Debug)]
struct Failure(String);

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure(e.to_string())
            }
        }
    )*};
}
failure_from!(ScriptError, MeterError, LmError, EvalError, DecodeError, io::Error, serde_json::Error);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Syllabify(a) => syllabify_cmd(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::TrainLm(a) => train_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::ServeMask(a) => serve_mask_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn input_lines(text: &Option<String>, file: &Option<PathBuf>) -> Result<Vec<String>, Failure> {
    let raw = match (text, file) {
        (Some(t), _) => return Ok(vec![t.clone()]),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?,
        (None, None) => io::read_to_string(io::stdin())?,
    };
    Ok(raw
        .lines()
        .map(|l| l.trim_start_matches('\u{feff}').trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

#[derive(Serialize)]
struct SyllableOut {
    text: String,
    iast: String,
    weight: char,
}

#[derive(Serialize)]
struct ScanOut {
    text: String,
    script: Script,
    syllables: usize,
    weights: String,
    ganas: Vec<&'static str>,
    remainder: String,
    detail: Vec<SyllableOut>,
}

fn scan_text(text: &str, script: Option<Script>) -> Result<ScanOut, Failure> {
    let script = script.unwrap_or_else(|| Script::detect(text));
    let syl = syllabify(&parse(text, script)?);
    let w = weigh(&syl, Mode::Final);
    let (gs, rest) = ganas(&w.weights);
    let normalized = nfc(text);
    let detail = syl
        .syllables
        .iter()
        .zip(&w.weights)
        .map(|(s, wt)| SyllableOut {
            text: normalized.get(s.span.clone()).unwrap_or_default().to_string(),
            iast: s.to_iast(),
            weight: wt.as_char(),
        })
        .collect();
    Ok(ScanOut {
        text: text.to_string(),
        script,
        syllables: syl.syllables.len(),
        weights: w.to_string(),
        ganas: gs.iter().map(|g| g.name()).collect(),
        remainder: rest.iter().map(|x| x.as_char()).collect(),
        detail,
    })
}

fn syllabify_cmd(a: TextArgs) -> Result<ExitCode, Failure> {
    for line in input_lines(&a.text, &a.file)? {
        let out = scan_text(&line, a.script)?;
        if a.json {
            #[derive(Serialize)]
            struct Out<'a> {
                text: &'a str,
                syllables: Vec<&'a str>,
                iast: Vec<&'a str>,
            }
            print_json(&Out {
                text: &out.text,
                syllables: out.detail.iter().map(|d| d.text.as_str()).collect(),
                iast: out.detail.iter().map(|d| d.iast.as_str()).collect(),
            })?;
        } else {
            let parts: Vec<&str> = out.detail.iter().map(|d| d.text.as_str()).collect();
            println!("{}", parts.join(" · "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn scan_cmd(a: TextArgs) -> Result<ExitCode, Failure> {
    for line in input_lines(&a.text, &a.file)? {
        let out = scan_text(&line, a.script)?;
        if a.json {
            print_json(&out)?;
        } else {
            println!("{}\t{} syllables\t{}", out.weights, out.syllables, out.ganas.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn corpus_format(path: &Path, format: Option<Format>) -> Result<Format, Failure> {
    format
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| Failure(format!("{}: cannot tell the format; pass --format", path.display())))
}

fn validate_cmd(a: ValidateArgs) -> Result<ExitCode, Failure> {
    let spec = a.meter.spec()?;
    let corpus = match (&a.text, &a.file) {
        (Some(t), _) => parse_corpus(&format!("1\t\t{}\n", t.replace(['\t', '\n'], " ")), Format::Tsv)?,
        (None, Some(path)) => ingest(path, corpus_format(path, a.format)?)?,
        (None, None) => {
            let body = io::read_to_string(io::stdin())?;
            parse_corpus(&body, a.format.unwrap_or(Format::Tsv))?
        }
    };
    let report = evaluate(&corpus, &spec)?;
    if a.json {
        println!("{}", report.to_json());
    } else {
        for v in &report.verdicts {
            let detail = match (v.first_violation, v.syllables, &v.error) {
                (Some(p), _, _) => format!("position {p}"),
                (None, Some(n), _) if v.verdict == "invalid" => format!("{n} syllables"),
                (_, _, Some(e)) => e.clone(),
                _ => String::new(),
            };
            println!("{}\t{}\t{}\t{}", v.id, v.verdict, v.weights.as_deref().unwrap_or("-"), detail);
        }
        println!(
            "full {:.1}%  partial {:.1}%  invalid {:.1}%  ({} records)",
            report.full_pct, report.partial_pct, report.invalid_pct, report.records
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn train_cmd(a: TrainArgs) -> Result<ExitCode, Failure> {
    let corpus = ingest(&a.corpus, corpus_format(&a.corpus, a.format)?)?;
    let texts: Vec<&str> = corpus
        .records
        .iter()
        .filter(|r| r.unparseable.is_none())
        .map(|r| r.sanskrit.as_str())
        .collect();
    let (train, held): (Vec<(usize, &str)>, Vec<(usize, &str)>) = texts
        .iter()
        .copied()
        .enumerate()
        .partition(|(i, _)| a.holdout_every == 0 || (i + 1) % a.holdout_every != 0);
    let train: Vec<&str> = train.into_iter().map(|(_, t)| t).collect();
    let held: Vec<&str> = held.into_iter().map(|(_, t)| t).collect();
    let model = NgramModel::train_with(&train, a.order, a.smoothing)?;
    model.save(&a.out)?;
    #[derive(Serialize)]
    struct Out {
        verses: usize,
        held_out: usize,
        vocab: usize,
        order: usize,
        perplexity: Option<f64>,
        uniform_perplexity: f64,
        vocab_sha256: String,
    }
    let out = Out {
        verses: train.len(),
        held_out: held.len(),
        vocab: model.vocab().len(),
        order: model.order(),
        perplexity: if held.is_empty() { None } else { Some(model.perplexity(&held)?) },
        uniform_perplexity: (model.vocab().len() - 1) as f64,
        vocab_sha256: model.vocab().digest(),
    };
    if a.json {
        print_json(&out)?;
    } else {
        println!(
            "trained order-{} model on {} verses, {} tokens -> {}",
            out.order,
            out.verses,
            out.vocab,
            a.out.display()
        );
        if let Some(p) = out.perplexity {
            println!("held-out perplexity {p:.3} over {} verses (uniform {:.0})", out.held_out, out.uniform_perplexity);
        }
    }
    Ok(ExitCode::SUCCESS)
}

enum Model {
    Local(NgramModel),
    Remote(RemoteLm<BufReader<TcpStream>, TcpStream>),
}

fn load_vocab(path: &Path) -> Result<Vocab, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let tokens = match &value {
        serde_json::Value::Array(_) => value.clone(),
        serde_json::Value::Object(o) => o.get("vocab").cloned().unwrap_or_default(),
        _ => serde_json::Value::Null,
    };
    let tokens: Vec<String> = serde_json::from_value(tokens)
        .map_err(|_| Failure(format!("{}: no token list found", path.display())))?;
    Ok(Vocab::from_tokens(tokens)?)
}

fn open_model(lm: &str, vocab: &Option<PathBuf>, timeout: u64) -> Result<Model, Failure> {
    match lm.strip_prefix("tcp://") {
        Some(addr) => {
            let vocab = vocab
                .as_ref()
                .ok_or_else(|| Failure("a remote model needs --vocab".into()))?;
            let vocab = load_vocab(vocab)?;
            Ok(Model::Remote(RemoteLm::connect_tcp(
                addr,
                vocab,
                Duration::from_secs(timeout),
            )?))
        }
        None => Ok(Model::Local(NgramModel::load(Path::new(lm))?)),
    }
}

fn with_model<T>(
    lm: &str,
    vocab: &Option<PathBuf>,
    timeout: u64,
    f: impl FnOnce(&mut dyn LanguageModel) -> Result<T, Failure>,
) -> Result<T, Failure> {
    match open_model(lm, vocab, timeout)? {
        Model::Local(m) => f(&mut LocalLm::new(&m)),
        Model::Remote(mut r) => f(&mut r),
    }
}

impl DecodeArgs {
    fn config(&self) -> Result<DecodeConfig, Failure> {
        let sampler = SamplerSpec::from_name(&self.sampler, self.temperature, self.top_p, self.top_k, self.alpha)?;
        Ok(DecodeConfig {
            k_init: self.k_init,
            k_max: self.k_max,
            k_growth: self.k_growth,
            sampler,
            cache_capacity: self.cache_size,
            seed: self.seed,
            mask: !self.no_mask,
            ..DecodeConfig::default()
        })
    }

    fn requests(&self, vocab: &Vocab) -> Result<Vec<GenerateRequest>, Failure> {
        let prompt_context = vocab.tokenize(&self.prompt)?;
        let prefixes: Vec<String> = match &self.prefixes {
            Some(path) => input_lines(&None, &Some(path.clone()))?
                .into_iter()
                .map(|p| if p.ends_with(' ') { p } else { format!("{p} ") })
                .collect(),
            None => vec![self.prefix.clone()],
        };
        Ok((0..self.count)
            .map(|i| GenerateRequest {
                prompt_context: prompt_context.clone(),
                prefix: prefixes[i % prefixes.len()].clone(),
            })
            .collect())
    }

    fn run(&self, lm: &mut dyn LanguageModel, config: &DecodeConfig) -> Result<Vec<Result<Generation, Box<Partial>>>, Failure> {
        let spec = self.meter.spec()?;
        let requests = self.requests(lm.vocab())?;
        Ok(run_batch(lm, &spec, config, &requests)?)
    }
}

#[derive(Serialize)]
struct DeadEndRecord {
    text_devanagari: String,
    syllables: usize,
    verdict: &'static str,
    stats: chandas::decode::GenerationStats,
}

fn generate_cmd(a: GenerateArgs) -> Result<ExitCode, Failure> {
    let config = a.decode.config()?;
    let outcomes = with_model(&a.decode.lm, &a.decode.vocab, a.decode.timeout, |lm| a.decode.run(lm, &config))?;
    let mut dead = 0;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for o in &outcomes {
        match o {
            Ok(g) => {
                if a.json {
                    writeln!(out, "{}", serde_json::to_string(&g.record(!a.no_timing))?)?;
                } else {
                    writeln!(out, "{}\t{}\t{}", g.text, g.weights, g.verdict.label())?;
                }
            }
            Err(p) => {
                dead += 1;
                if a.json {
                    let rec = DeadEndRecord {
                        text_devanagari: p.text.clone(),
                        syllables: p.syllables,
                        verdict: "dead_end",
                        stats: p.stats(!a.no_timing),
                    };
                    writeln!(out, "{}", serde_json::to_string(&rec)?)?;
                } else {
                    writeln!(out, "{}\t-\tdead end after {} syllables", p.text, p.syllables)?;
                }
            }
        }
    }
    if dead > 0 {
        eprintln!("error: {dead} of {} generations hit a dead end", outcomes.len());
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_cmd(a: EvalArgs) -> Result<ExitCode, Failure> {
    let spec = a.meter.spec()?;
    let report = match (&a.file, &a.lm) {
        (Some(path), _) => evaluate(&ingest(path, corpus_format(path, a.format)?)?, &spec)?,
        (None, Some(lm)) => {
            let sampler = SamplerSpec::from_name(&a.sampler, None, None, None, None)?;
            let config = DecodeConfig {
                sampler,
                seed: a.seed,
                mask: !a.no_mask,
                ..DecodeConfig::default()
            };
            let outcomes = with_model(lm, &None, 30, |lm| {
                Ok(run_batch(lm, &spec, &config, &vec![GenerateRequest::default(); a.count])?)
            })?;
            evaluate_generations(&outcomes, &spec)?
        }
        (None, None) => return Err(Failure("pass --file or --lm".into())),
    };
    if let Some(path) = &a.csv {
        std::fs::write(path, report.to_csv())?;
    }
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!(
            "full {:.1}%  partial {:.1}%  invalid {:.1}%  ({} records",
            report.full_pct, report.partial_pct, report.invalid_pct, report.records
        );
        if let Some(rate) = report.dead_end_rate {
            print!(", dead ends {rate:.1}%");
        }
        println!(")");
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_cmd(a: BenchArgs) -> Result<ExitCode, Failure> {
    let config = a.decode.config()?;
    let mut reports: Vec<(String, BenchReport)> = Vec::new();
    with_model(&a.decode.lm, &a.decode.vocab, a.decode.timeout, |lm| {
        let outcomes = a.decode.run(lm, &config)?;
        reports.push((format!("cache {}", config.cache_capacity), BenchReport::from_outcomes(&outcomes, true)));
        if a.compare_cache {
            let off = DecodeConfig {
                cache_capacity: 0,
                ..config.clone()
            };
            let outcomes = a.decode.run(lm, &off)?;
            reports.push(("cache 0".into(), BenchReport::from_outcomes(&outcomes, true)));
        }
        Ok(())
    })?;
    if a.json {
        #[derive(Serialize)]
        struct Out<'a> {
            label: &'a str,
            #[serde(flatten)]
            report: &'a BenchReport,
        }
        for (label, report) in &reports {
            print_json(&Out { label, report })?;
        }
    } else {
        for (label, r) in &reports {
            println!(
                "{label}: {} generations, {} tokens, {:.3} ms/token, {:.1} tok/s, cache hits {:.1}%, escalations/token {:.3}, scansion {:.0}% of step time, dead ends {:.1}%",
                r.generations,
                r.tokens,
                r.latency_mean_s.unwrap_or_default() * 1e3,
                r.throughput_tok_s.unwrap_or_default(),
                r.cache_hit_rate * 100.0,
                r.escalation_rate,
                r.scansion_fraction.unwrap_or_default() * 100.0,
                r.dead_end_rate,
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve_mask_cmd(a: ServeMaskArgs) -> Result<ExitCode, Failure> {
    let config = MaskServiceConfig {
        default_meter: a.meter.spec()?,
        meter_path: a.meter.meter_path.clone(),
        cache_capacity: a.cache_size,
    };
    match &a.listen {
        Some(addr) => {
            let listener = TcpListener::bind(addr)?;
            eprintln!("serving masks on {}", listener.local_addr()?);
            serve_mask_tcp(Arc::new(config), listener)?;
        }
        None => {
            let stdin = io::stdin();
            serve_mask(&config, 1, stdin.lock(), io::stdout().lock())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
