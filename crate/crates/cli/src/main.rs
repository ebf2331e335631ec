use std::collections::BTreeSet;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gemcat::classification::{classify, label_classes, ClassRecord, ClassifyOptions};
use gemcat::code::{code, Code};
use gemcat::generation::{extend_seed, generate_s3, Catalogue};
use gemcat::graph::ColouredGraph;
use gemcat::ingest::{barycentric_gem, crystallize};
use gemcat::io::{
    parse_catalogue, parse_facets, parse_gem, parse_json_lines, to_json_lines, CatalogueFile, CatalogueKind,
    FormatError,
};
use gemcat::summary::CatalogueSummary;
use gemcat::topology::invariants;
use log::info;
use rayon::prelude::*;

/// Generation, invariants and classification of crystallizations of
/// PL 4-manifolds.
#[derive(Parser)]
#[command(name = "gemcat", version)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "GEMCAT_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the 4-coloured gems of S³ of the given order.
    GenS3 {
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Generate the catalogue of 5-coloured crystallizations of the given order.
    Gen4 {
        #[arg(long)]
        order: usize,
        /// Seed file (an s3 catalogue of the same order); generated if omitted.
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Only extend seeds with 0-based index in A..B (half-open).
        #[arg(long, value_parser = parse_range)]
        seed_range: Option<Range<usize>>,
        /// Directory holding one result file per finished seed; finished
        /// seeds are skipped on a rerun.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Output prefix: writes PREFIX.bipartite.txt and PREFIX.nonbipartite.txt.
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Invariant records (JSON lines) for every code of a catalogue file.
    Invariants {
        #[arg(short = 'i', long)]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Partition catalogue members into classes of θ-equivalent graphs.
    Classify {
        /// Catalogue files.
        #[arg(short = 'i', long = "input", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        /// Schedule positions per graph and pass.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 5)]
        passes: usize,
        /// Run every pass even if the partition stops changing.
        #[arg(long)]
        all_passes: bool,
        /// Representatives: one `LABEL CODE` pair per line; codes not among the
        /// inputs are added to them.
        #[arg(long)]
        reps: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Reduce a gem to a rigid dipole-free crystallization.
    Reduce {
        #[arg(short = 'i', long)]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Turn a facet list into a crystallization via its barycentric gem.
    Convert {
        #[arg(short = 'i', long)]
        input: PathBuf,
        /// Write the barycentric gem without reducing it.
        #[arg(long)]
        no_reduce: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Print the canonical code of a gem.
    Code {
        #[arg(short = 'i', long)]
        input: PathBuf,
    },
    /// Count table for catalogue files, and class table for a partition report.
    Summary {
        /// Catalogue files.
        files: Vec<PathBuf>,
        /// Partition report written by `classify`.
        #[arg(long)]
        classes: Option<PathBuf>,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Output {
    /// Output file (default: standard output).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

impl Output {
    fn write(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(p) => write_file(p, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn parse_range(s: &str) -> Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: usize = a.parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b: usize = b.parse().map_err(|_| format!("bad range end {b:?}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok(a..b)
}

/// Marks errors that come from reading or parsing input files.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError(anyhow!("{}: {e}", path.display())).into())
}

fn parsed<T>(path: &Path, r: Result<T, FormatError>) -> Result<T> {
    r.map_err(|e| InputError(anyhow!("{}: {e}", path.display())).into())
}

/// Writes through a temporary file so readers never see partial output.
fn write_file(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_catalogue(path: &Path) -> Result<CatalogueFile> {
    parsed(path, parse_catalogue(&read(path)?))
}

fn read_gem(path: &Path) -> Result<ColouredGraph> {
    parsed(path, parse_gem(&read(path)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenS3 { order, out } => {
            let codes = generate_s3(order)?;
            info!("order {order}: {} gems of S3", codes.len());
            out.write(&CatalogueFile::new(order, CatalogueKind::S3, codes).to_text())
        }
        Command::Gen4 {
            order,
            seeds,
            seed_range,
            checkpoint,
            output,
        } => gen4(order, seeds, seed_range, checkpoint, &output),
        Command::Invariants { input, out } => {
            let file = read_catalogue(&input)?;
            let records = file
                .codes
                .par_iter()
                .map(|c| invariants(&c.to_graph(), c))
                .collect::<Result<Vec<_>, _>>()?;
            out.write(&to_json_lines(&records))
        }
        Command::Classify {
            inputs,
            budget,
            passes,
            all_passes,
            reps,
            out,
        } => {
            let mut codes = Vec::new();
            for p in &inputs {
                codes.extend(read_catalogue(p)?.codes);
            }
            let mut labelled = Vec::new();
            if let Some(p) = &reps {
                let text = read(p)?;
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let (label, c) = line.split_once(char::is_whitespace).ok_or_else(|| {
                        InputError(anyhow!("{}: line {}: expected `LABEL CODE`", p.display(), i + 1))
                    })?;
                    let c: Code = c.trim().parse().map_err(|e| {
                        InputError(anyhow!("{}: line {}: {e}", p.display(), i + 1))
                    })?;
                    let c = code(&c.to_graph())?;
                    let index = match codes.iter().position(|x| *x == c) {
                        Some(i) => i,
                        None => {
                            codes.push(c);
                            codes.len() - 1
                        }
                    };
                    labelled.push((index, label.to_string()));
                }
            }
            let graphs: Vec<ColouredGraph> = codes.iter().map(Code::to_graph).collect();
            let options = ClassifyOptions {
                budget,
                passes,
                stop_when_stable: !all_passes,
            };
            let mut partition = classify(&graphs, options)?;
            let reps: Vec<(usize, &str)> = labelled.iter().map(|(i, l)| (*i, l.as_str())).collect();
            label_classes(&mut partition, &reps)?;
            let s = &partition.stats;
            info!(
                "{} classes; {} applications, {} failures, {} handle events, {} blocked, {} passes",
                partition.class_count(),
                s.applications,
                s.failures,
                s.handle_events,
                s.blocked_by_handles,
                s.passes_run
            );
            out.write(&to_json_lines(&partition.report()))
        }
        Command::Reduce { input, out } => {
            let r = crystallize(&read_gem(&input)?)?;
            out.write(&format!(
                "# orientable_handles={} nonorientable_handles={}\n{}",
                r.orientable_handles,
                r.nonorientable_handles,
                r.graph.to_text()
            ))
        }
        Command::Convert { input, no_reduce, out } => {
            let k = parsed(&input, parse_facets(&read(&input)?))?;
            let g = barycentric_gem(&k)?;
            if no_reduce {
                return out.write(&g.to_text());
            }
            let r = crystallize(&g)?;
            out.write(&format!(
                "# orientable_handles={} nonorientable_handles={}\n{}",
                r.orientable_handles,
                r.nonorientable_handles,
                r.graph.to_text()
            ))
        }
        Command::Code { input } => {
            println!("{}", code(&read_gem(&input)?)?);
            Ok(())
        }
        Command::Summary { files, classes, json } => {
            let mut summary = CatalogueSummary::new();
            for p in &files {
                summary.add_catalogue(&read_catalogue(p)?);
            }
            if let Some(p) = &classes {
                let report: Vec<ClassRecord> = parsed(p, parse_json_lines(&read(p)?))?;
                summary.add_classes(&report);
            }
            if json {
                print!("{}", to_json_lines(std::slice::from_ref(&summary)));
            } else {
                print!("{}", summary.render());
            }
            Ok(())
        }
    }
}

fn gen4(
    order: usize,
    seeds: Option<PathBuf>,
    range: Option<Range<usize>>,
    checkpoint: Option<PathBuf>,
    output: &Path,
) -> Result<()> {
    let seeds = match &seeds {
        Some(p) => {
            let f = read_catalogue(p)?;
            if f.kind != CatalogueKind::S3 || f.order != order {
                return Err(InputError(anyhow!(
                    "{}: expected an s3 catalogue of order {order}",
                    p.display()
                ))
                .into());
            }
            f.codes
        }
        None => generate_s3(order)?,
    };
    let range = range.unwrap_or(0..seeds.len());
    if range.end > seeds.len() {
        bail!("seed range {range:?} exceeds the {} seeds", seeds.len());
    }
    if let Some(dir) = &checkpoint {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    info!("extending seeds {range:?} of {}", seeds.len());
    let per_seed = range
        .clone()
        .into_par_iter()
        .map(|i| -> Result<BTreeSet<Code>> {
            let ck = checkpoint.as_ref().map(|d| d.join(format!("seed-{i}.txt")));
            if let Some(p) = ck.as_ref().filter(|p| p.exists()) {
                return Ok(read_catalogue(p)?.codes.into_iter().collect());
            }
            let found = extend_seed(&seeds[i].to_graph(), true)?;
            if let Some(p) = &ck {
                // checkpoints hold both kinds; they are split when merging
                let f = CatalogueFile::new(order, CatalogueKind::Bipartite, found.iter().cloned().collect());
                write_file(p, &f.to_text())?;
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?;
    let cat = Catalogue::from_codes(per_seed.into_iter().flatten());
    info!(
        "order {order}: {} bipartite, {} non-bipartite",
        cat.bipartite.len(),
        cat.nonbipartite.len()
    );
    let name = |kind: &str| {
        let mut s = output.as_os_str().to_owned();
        s.push(format!(".{kind}.txt"));
        PathBuf::from(s)
    };
    write_file(
        &name("bipartite"),
        &CatalogueFile::new(order, CatalogueKind::Bipartite, cat.bipartite.into_iter().collect()).to_text(),
    )?;
    write_file(
        &name("nonbipartite"),
        &CatalogueFile::new(order, CatalogueKind::Nonbipartite, cat.nonbipartite.into_iter().collect()).to_text(),
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<InputError>() || c.is::<FormatError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
