use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Args;
use flutter_core::fixtures;
use flutter_core::imaging::{
    self, io as image_io, run_experiment_matrix, ExperimentPlan, MotionPsf, RasterImage,
    DEFAULT_NOISE_FACTOR, DEFAULT_RL_ITERATIONS,
};
use flutter_core::optimizer::{
    self, CodeSummary, GaConfig, GenerationRecord, MeritKind, SearchConfig,
};
use flutter_core::seqcore::{
    parse_code_text, parse_sequence_text, ExposureSequence, InterleavedCode,
};
use flutter_core::spectral::{combined_response, complement_spectrum_check, power_spectrum};
use serde_json::{json, Map, Value};

use crate::config::{resolve, resolve_opt, ConfigFile, Resolved};
use crate::{Cli, CliError, Command, Format, GlobalArgs};

const DEFAULT_SIZE: usize = 256;

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Exposure windows per code (N).
    #[arg(long)]
    arity: Option<u8>,
    /// Chips per window.
    #[arg(long)]
    length: Option<usize>,
    /// Zero-padded transform length (default: next power of two of the length).
    #[arg(long)]
    n_fft: Option<usize>,
    /// max-min, avg-min or avg-pairs.
    #[arg(long)]
    merit: Option<MeritKind>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Individuals copied unchanged each generation (default: min(3, population - 1)).
    #[arg(long)]
    elite: Option<usize>,
    /// Crossover probability.
    #[arg(long)]
    crossover: Option<f64>,
    /// Per-gene mutation probability.
    #[arg(long)]
    mutation: Option<f64>,
    /// Added to scores to form roulette weights; must exceed 300.
    #[arg(long)]
    selection_offset: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Number of random codes drawn.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    arity: Option<u8>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    n_fft: Option<usize>,
    #[arg(long)]
    merit: Option<MeritKind>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Binary sequence: a file path or a literal such as 1101.
    #[arg(long, conflicts_with = "word")]
    sequence: Option<String>,
    /// One-of-N code word: a file path or a literal word.
    #[arg(long)]
    word: Option<String>,
    /// Arity of a literal word or of a file without an N= header.
    #[arg(long)]
    arity: Option<u8>,
    #[arg(long)]
    n_fft: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Ground-truth image (default: a synthetic test pattern).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Side of the synthetic test pattern.
    #[arg(long)]
    size: Option<usize>,
    /// Noise factor.
    #[arg(long)]
    nf: Option<f64>,
    /// Richardson-Lucy iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Comma-separated conditions or combinations to run (default: all).
    #[arg(long, value_delimiter = ',')]
    conditions: Option<Vec<String>>,
    /// Single custom kernel instead of the standard matrix: delta, flat:L or a kernel file.
    #[arg(long)]
    psf: Option<String>,
    /// Duty cycle of the custom kernel.
    #[arg(long)]
    dc: Option<f64>,
    /// Coded-pair sequence: file path or literal.
    #[arg(long)]
    raskar: Option<String>,
    /// Triplet code word: file path or literal.
    #[arg(long)]
    triplet: Option<String>,
}

/// Global settings after merging flags and the config file.
struct Context {
    seed: u64,
    format: Format,
    out_dir: PathBuf,
    file: ConfigFile,
    resolved: Resolved,
}

impl Context {
    fn new(global: GlobalArgs, command: &str) -> Result<Self, CliError> {
        let mut file = match &global.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
                ConfigFile::parse(&text)?
            }
            None => ConfigFile::default(),
        };
        if let Some(recorded) = file.take::<String>("command")? {
            if recorded != command {
                return Err(CliError::Usage(format!(
                    "config was written by `{recorded}`, not `{command}`"
                )));
            }
        }
        let seed = match resolve_opt(global.seed, &mut file, "seed")? {
            Some(seed) => seed,
            None => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0),
        };
        eprintln!("seed: {seed}");
        let format = resolve(global.format, &mut file, "format", Format::Csv)?;
        let out_dir = global.out_dir.unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&out_dir)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;
        let mut resolved = Resolved::new(command);
        resolved.set("seed", seed);
        resolved.set("format", format.name());
        Ok(Self {
            seed,
            format,
            out_dir,
            file,
            resolved,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }

    fn write_json(&self, name: &str, value: &Value) -> Result<String, CliError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            + "\n";
        self.write(name, &text)?;
        Ok(text)
    }

    /// Rejects leftover config keys and writes `config.ini`.
    fn finish_config(&mut self) -> Result<(), CliError> {
        std::mem::take(&mut self.file).finish()?;
        self.write("config.ini", self.resolved.to_ini())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize(args) => optimize(Context::new(cli.global, "optimize")?, args),
        Command::Sample(args) => sample(Context::new(cli.global, "sample")?, args),
        Command::Spectrum(args) => spectrum(Context::new(cli.global, "spectrum")?, args),
        Command::Simulate(args) => simulate(Context::new(cli.global, "simulate")?, args),
    }
}

fn default_n_fft(length: usize) -> usize {
    length.max(2).next_power_of_two()
}

fn result_json(summary: &CodeSummary, ctx: &Context) -> Result<Value, CliError> {
    let mut value = serde_json::to_value(summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .expect("summary serializes to an object");
    obj.insert("seed".into(), ctx.seed.into());
    obj.insert("config".into(), ctx.resolved.to_json());
    Ok(value)
}

fn emit_result(
    ctx: &Context,
    code: &InterleavedCode,
    merit: MeritKind,
    n_fft: usize,
) -> Result<(), CliError> {
    let summary = CodeSummary::new(code, merit, n_fft)?;
    let text = ctx.write_json("result.json", &result_json(&summary, ctx)?)?;
    ctx.write("code.txt", code.to_text())?;
    print!("{text}");
    Ok(())
}

fn optimize(mut ctx: Context, args: OptimizeArgs) -> Result<(), CliError> {
    let f = &mut ctx.file;
    let defaults = GaConfig::default();
    let arity = resolve(args.arity, f, "arity", defaults.arity)?;
    let length = resolve(args.length, f, "length", defaults.length)?;
    let n_fft = resolve(args.n_fft, f, "n-fft", default_n_fft(length))?;
    let merit = resolve(args.merit, f, "merit", defaults.merit)?;
    let generations = resolve(args.generations, f, "generations", defaults.generations)?;
    let population = resolve(args.population, f, "population", defaults.population_size)?;
    let elite = resolve(
        args.elite,
        f,
        "elite",
        defaults.elite_count.min(population.saturating_sub(1)),
    )?;
    let crossover = resolve(args.crossover, f, "crossover", defaults.crossover_prob)?;
    let mutation = resolve(
        args.mutation,
        f,
        "mutation",
        defaults.mutation_prob_per_gene,
    )?;
    let offset = resolve(
        args.selection_offset,
        f,
        "selection-offset",
        defaults.selection_offset,
    )?;
    let cfg = GaConfig {
        population_size: population,
        elite_count: elite,
        crossover_prob: crossover,
        mutation_prob_per_gene: mutation,
        selection_offset: offset,
        arity,
        length,
        n_fft,
        merit,
        generations,
        seed: ctx.seed,
    };
    cfg.validate()?;
    let r = &mut ctx.resolved;
    r.set("arity", arity);
    r.set("length", length);
    r.set("n-fft", n_fft);
    r.set("merit", merit.name());
    r.set("generations", generations);
    r.set("population", population);
    r.set("elite", elite);
    r.set("crossover", crossover);
    r.set("mutation", mutation);
    r.set("selection-offset", offset);
    ctx.finish_config()?;

    let (progress_name, header) = match ctx.format {
        Format::Csv => ("progress.csv", Some("generation,score,word")),
        Format::Json => ("progress.jsonl", None),
    };
    let progress_path = ctx.path(progress_name);
    let file = fs::File::create(&progress_path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", progress_path.display())))?;
    let mut progress = BufWriter::new(file);
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    let mut io_result = Ok(());
    if let Some(h) = header {
        io_result = writeln!(progress, "{h}").and_then(|_| writeln!(err, "{h}"));
    }
    let format = ctx.format;
    let mut sink = |rec: &GenerationRecord| {
        let line = match format {
            Format::Csv => format!("{},{},{}", rec.generation, rec.score, rec.word),
            Format::Json => serde_json::to_string(rec).expect("record serializes"),
        };
        if io_result.is_ok() {
            io_result = writeln!(progress, "{line}").and_then(|_| writeln!(err, "{line}"));
        }
    };
    let outcome = optimizer::run(&cfg, &mut sink)?;
    io_result?;
    progress.flush()?;
    drop(err);

    emit_result(&ctx, &outcome.best.code, merit, n_fft)
}

fn sample(mut ctx: Context, args: SampleArgs) -> Result<(), CliError> {
    let f = &mut ctx.file;
    let defaults = SearchConfig::default();
    let count = resolve(args.count, f, "count", defaults.count)?;
    let arity = resolve(args.arity, f, "arity", defaults.arity)?;
    let length = resolve(args.length, f, "length", defaults.length)?;
    let n_fft = resolve(args.n_fft, f, "n-fft", default_n_fft(length))?;
    let merit = resolve(args.merit, f, "merit", defaults.merit)?;
    let r = &mut ctx.resolved;
    r.set("count", count);
    r.set("arity", arity);
    r.set("length", length);
    r.set("n-fft", n_fft);
    r.set("merit", merit.name());
    let cfg = SearchConfig {
        count,
        arity,
        length,
        n_fft,
        merit,
        seed: ctx.seed,
    };
    let best = optimizer::random_search(&cfg)?;
    ctx.finish_config()?;
    emit_result(&ctx, &best.code, merit, n_fft)
}

/// Reads `source` as a file when it names one, else treats it as literal text.
fn read_source(source: &str) -> Result<String, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{source}: {e}")))
    } else {
        Ok(source.to_string())
    }
}

fn parse_word_source(source: &str, arity: u8) -> Result<InterleavedCode, CliError> {
    Ok(parse_code_text(&read_source(source)?, arity)?)
}

fn parse_sequence_source(source: &str) -> Result<ExposureSequence, CliError> {
    Ok(parse_sequence_text(&read_source(source)?)?)
}

fn complement_json(seq: &ExposureSequence) -> Value {
    let check = complement_spectrum_check(seq);
    json!({
        "holds": check.holds,
        "max_deviation": check.max_deviation,
        "dc_sequence": check.dc_sequence,
        "dc_complement": check.dc_complement,
    })
}

fn sequence_json(name: &str, seq: &ExposureSequence, min_db: f64) -> Value {
    json!({
        "name": name,
        "sequence": seq.to_string(),
        "duty_cycle": seq.duty_cycle().ratio(),
        "open_chips": seq.ones(),
        "min_db": min_db,
        "complement_check": complement_json(seq),
    })
}

fn spectrum(mut ctx: Context, args: SpectrumArgs) -> Result<(), CliError> {
    let f = &mut ctx.file;
    let sequence = resolve_opt(args.sequence, f, "sequence")?;
    let word = resolve_opt(args.word, f, "word")?;
    let arity = resolve(args.arity, f, "arity", 3u8)?;
    let n_fft_flag = resolve_opt(args.n_fft, f, "n-fft")?;

    let summary = match (sequence, word) {
        (Some(src), None) => {
            let seq = parse_sequence_source(&src)?;
            let n_fft = n_fft_flag.unwrap_or_else(|| default_n_fft(seq.len()));
            ctx.resolved.set("sequence", seq.to_string());
            ctx.resolved.set("n-fft", n_fft);
            ctx.finish_config()?;
            let ps = power_spectrum(&seq, n_fft)?;
            ctx.write("spectrum.csv", ps.to_csv())?;
            let mut obj = Map::new();
            obj.insert("n_fft".into(), n_fft.into());
            obj.insert(
                "sequences".into(),
                json!([sequence_json("sequence", &seq, ps.min_db())]),
            );
            obj.insert("files".into(), json!(["spectrum.csv"]));
            obj
        }
        (None, Some(src)) => {
            let code = parse_word_source(&src, arity)?;
            let n_fft = n_fft_flag.unwrap_or_else(|| default_n_fft(code.len()));
            let r = &mut ctx.resolved;
            r.set("word", code.to_word());
            r.set("arity", code.arity());
            r.set("n-fft", n_fft);
            ctx.finish_config()?;
            let mut files = Vec::new();
            let mut sequences = Vec::new();
            let mut spectra = Vec::new();
            // s1 is the highest bit plane, matching the simulation's naming.
            for (i, plane) in (0..code.arity()).rev().enumerate() {
                let seq = code.plane(plane).expect("plane below arity");
                let ps = power_spectrum(&seq, n_fft)?;
                let name = format!("s{}", i + 1);
                let file = format!("spectrum-{name}.csv");
                ctx.write(&file, ps.to_csv())?;
                files.push(file);
                let mut entry = sequence_json(&name, &seq, ps.min_db());
                entry["plane"] = plane.into();
                sequences.push(entry);
                spectra.push(ps);
            }
            let combined = combined_response(&spectra)?;
            ctx.write("spectrum-combined.csv", combined.to_csv())?;
            files.push("spectrum-combined.csv".into());
            let mut merits = Map::new();
            for kind in MeritKind::ALL {
                if kind.supports_arity(code.arity()) {
                    merits.insert(
                        kind.name().into(),
                        optimizer::merit(&code, kind, n_fft)?.into(),
                    );
                }
            }
            let mut obj = Map::new();
            obj.insert("word".into(), code.to_word().into());
            obj.insert("arity".into(), code.arity().into());
            obj.insert("n_fft".into(), n_fft.into());
            obj.insert("sequences".into(), Value::Array(sequences));
            obj.insert("combined_min_db".into(), combined.min_db().into());
            obj.insert("merits".into(), Value::Object(merits));
            obj.insert("files".into(), json!(files));
            obj
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --sequence or --word".into(),
            ))
        }
    };
    let mut summary = summary;
    summary.insert("seed".into(), ctx.seed.into());
    summary.insert("config".into(), ctx.resolved.to_json());
    let text = ctx.write_json("summary.json", &Value::Object(summary))?;
    print!("{text}");
    Ok(())
}

fn parse_psf(spec: &str) -> Result<MotionPsf, CliError> {
    if spec == "delta" {
        return Ok(MotionPsf::delta());
    }
    if let Some(len) = spec.strip_prefix("flat:") {
        let len: usize = len
            .parse()
            .map_err(|_| CliError::Usage(format!("bad flat kernel length in {spec:?}")))?;
        return Ok(MotionPsf::flat(len)?);
    }
    Ok(image_io::load_psf(Path::new(spec))?)
}

fn simulate(mut ctx: Context, args: SimulateArgs) -> Result<(), CliError> {
    let f = &mut ctx.file;
    let truth_path = resolve_opt(args.truth, f, "truth")?;
    let size = resolve(args.size, f, "size", DEFAULT_SIZE)?;
    let nf = resolve(args.nf, f, "nf", DEFAULT_NOISE_FACTOR)?;
    let iterations = resolve(args.iterations, f, "iterations", DEFAULT_RL_ITERATIONS)?;
    let conditions = match args.conditions {
        Some(list) => Some(list),
        None => f.take::<String>("conditions")?.map(|s| {
            s.split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect()
        }),
    };
    let psf_spec = resolve_opt(args.psf, f, "psf")?;
    let dc = resolve(args.dc, f, "dc", 1.0)?;
    let raskar_src = resolve(args.raskar, f, "raskar", fixtures::RASKAR_CODE.to_string())?;
    let triplet_src = resolve(
        args.triplet,
        f,
        "triplet",
        fixtures::AVG_MIN.word.to_string(),
    )?;

    if !(nf >= 0.0 && nf.is_finite()) {
        return Err(CliError::Usage(format!(
            "noise factor {nf} must be finite and non-negative"
        )));
    }
    let r = &mut ctx.resolved;
    match &truth_path {
        Some(p) => r.set("truth", p.display().to_string()),
        None => r.set("size", size),
    }
    r.set("nf", nf);
    r.set("iterations", iterations);
    let plan = match &psf_spec {
        Some(spec) => {
            r.set("psf", spec.as_str());
            r.set("dc", dc);
            ExperimentPlan::single("custom", parse_psf(spec)?, dc, nf, iterations)
        }
        None => {
            let coded = parse_sequence_source(&raskar_src)?;
            let triplet = parse_word_source(&triplet_src, 3)?;
            r.set("raskar", coded.to_string());
            r.set("triplet", triplet.to_word());
            ExperimentPlan::standard(&coded, &triplet, nf, iterations)?
        }
    };
    let plan = match &conditions {
        Some(names) => {
            ctx.resolved.set("conditions", names.join(","));
            plan.select(names)?
        }
        None => plan,
    };
    ctx.finish_config()?;

    let truth: RasterImage = match &truth_path {
        Some(p) => image_io::load_image(p)?,
        None => imaging::test_pattern(size, size)?,
    };
    let report = run_experiment_matrix(&truth, &plan, ctx.seed)?;
    let mut files = Vec::new();
    if truth_path.is_none() {
        image_io::save_png(&truth, &ctx.path("truth.png"))?;
        files.push("truth.png".to_string());
    }
    files.extend(report.write_images(&ctx.out_dir)?);

    for c in &report.conditions {
        eprintln!(
            "{:<12} rmse {:.5}  psnr {:.2} dB  (interior {:.5})",
            c.name, c.metrics.full.rmse, c.metrics.full.psnr_db, c.metrics.interior.rmse
        );
    }
    for c in &report.combined {
        eprintln!(
            "{:<12} rmse {:.5}  psnr {:.2} dB  (interior {:.5})",
            c.name, c.metrics.full.rmse, c.metrics.full.psnr_db, c.metrics.interior.rmse
        );
    }
    let mut value =
        serde_json::to_value(report.summary()).map_err(|e| CliError::Runtime(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .expect("report serializes to an object");
    obj.insert("config".into(), ctx.resolved.to_json());
    obj.insert("files".into(), json!(files));
    let text = ctx.write_json("report.json", &value)?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use flutter_core::{seqcore, spectral};

    #[test]
    fn psf_specs() {
        assert_eq!(parse_psf("delta").unwrap(), MotionPsf::delta());
        assert_eq!(parse_psf("flat:5").unwrap(), MotionPsf::flat(5).unwrap());
        assert!(matches!(parse_psf("flat:x"), Err(CliError::Usage(_))));
        assert!(matches!(parse_psf("flat:0"), Err(CliError::Usage(_))));
        assert!(matches!(
            parse_psf("/nonexistent/k.pgm"),
            Err(CliError::Runtime(_))
        ));
    }

    #[test]
    fn literal_sources() {
        assert_eq!(parse_sequence_source("1101").unwrap().to_string(), "1101");
        let code = parse_word_source(fixtures::AVG_MIN.word, 3).unwrap();
        assert_eq!(code.to_word(), fixtures::AVG_MIN.word);
        assert_eq!(default_n_fft(52), spectral::DEFAULT_FFT_LEN);
        assert_eq!(default_n_fft(seqcore::DEFAULT_LENGTH), 64);
    }
}
