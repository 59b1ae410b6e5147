use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dnapix::codec::{quantization_only, psnr, SidecarMetadata};
use dnapix::oligo::OligoLayout;
use dnapix::pgm::{self, GrayImage};
use dnapix::{
    amplify_and_sequence, compute_metrics, decode_image, encode_image, fasta, rd_sweep, reverse_complement, Codebook,
    Image, Oligo, RateTarget, ReadSet, Strategy,
};
use serde_json::{json, Map, Value};

mod config;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "dnapix", version, about = "Wavelet image coding onto constrained DNA oligos")]
struct Cli {
    /// TOML file overriding the built-in defaults ([encode], [channel], [decode]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PGM image into oligos.fasta and meta.toml.
    Encode {
        image: PathBuf,
        /// Target coding rate in input bits per payload nucleotide.
        #[arg(short = 'r', long, conflicts_with = "budget", required_unless_present = "budget")]
        rate: Option<f64>,
        /// Payload nucleotide budget.
        #[arg(short = 'b', long)]
        budget: Option<u64>,
        #[arg(short = 'o', long)]
        out: PathBuf,
        #[command(flatten)]
        encode: EncodeFlags,
    },
    /// Simulate amplification and sequencing of an oligo FASTA.
    Simulate {
        oligos: PathBuf,
        /// Sidecar metadata, for the primer layout.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(short = 'o', long)]
        out: PathBuf,
        #[arg(long)]
        coverage: Option<f64>,
        #[arg(long)]
        p_sub: Option<f64>,
        #[arg(long)]
        p_ins: Option<f64>,
        #[arg(long)]
        p_del: Option<f64>,
        #[arg(long)]
        p_revcomp: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decode reads (or oligos) back into a PGM image.
    Decode {
        reads: PathBuf,
        meta: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Seed of the random strategy.
        #[arg(long)]
        seed: Option<u64>,
        /// Original image, to report PSNR.
        #[arg(long)]
        original: Option<PathBuf>,
    },
    /// PSNR between two images, plus densities when oligos are given.
    Metrics {
        original: PathBuf,
        reconstructed: PathBuf,
        oligos: Option<PathBuf>,
        /// Sidecar metadata, for the oligo layout.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// PSNR against coding rate, as a two-column table.
    RdSweep {
        image: PathBuf,
        /// Target rates in bits per nucleotide.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        rates: Vec<f64>,
        /// Table destination (default: stdout).
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        encode: EncodeFlags,
    },
    /// Print the codebook for k quantization levels.
    CodebookDump {
        #[arg(short = 'k', long)]
        k: u32,
        /// Lengthen codewords until every level has two replicas.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct EncodeFlags {
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    image_id: Option<u32>,
    #[arg(long)]
    strict_dispersion: bool,
    #[arg(long)]
    refinement_rounds: Option<usize>,
}

impl EncodeFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        let e = &mut cfg.encode;
        if let Some(v) = self.levels {
            e.levels = v;
        }
        if let Some(v) = self.seed {
            e.seed = v;
        }
        if let Some(v) = self.image_id {
            e.image_id = v;
        }
        if self.strict_dispersion {
            e.strict_dispersion = true;
        }
        if let Some(v) = self.refinement_rounds {
            e.refinement_rounds = v;
        }
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<dnapix::Error> for Failure {
    fn from(e: dnapix::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

fn with_path(path: &Path) -> impl FnOnce(dnapix::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

fn read_image(path: &Path) -> Outcome<Image> {
    let g = pgm::read(path).map_err(with_path(path))?;
    Ok(Image::from_u8(g.width, g.height, &g.pixels)?)
}

fn write_image(path: &Path, img: &Image) -> Outcome<()> {
    let g = GrayImage { width: img.width, height: img.height, pixels: img.to_u8() };
    pgm::write(path, &g).map_err(with_path(path))
}

fn read_meta(path: &Path) -> Outcome<SidecarMetadata> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    SidecarMetadata::from_toml(&text).map_err(with_path(path))
}

/// Strips flanking primers when present, in either orientation.
fn trim_primers(seq: &[u8], layout: &OligoLayout) -> Vec<u8> {
    let (p5, p3) = (layout.primer_5.as_bytes(), layout.primer_3.as_bytes());
    let strip = |s: &[u8], head: &[u8], tail: &[u8]| {
        (s.len() >= head.len() + tail.len() && s.starts_with(head) && s.ends_with(tail))
            .then(|| s[head.len()..s.len() - tail.len()].to_vec())
    };
    if let Some(body) = strip(seq, p5, p3) {
        return body;
    }
    if let (Ok(rc3), Ok(rc5)) = (reverse_complement(p3), reverse_complement(p5)) {
        if let Some(body) = strip(seq, &rc3, &rc5) {
            return body;
        }
    }
    seq.to_vec()
}

fn emit(json_mode: bool, report: Value) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        return;
    }
    fn lines(prefix: &str, v: &Value) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    lines(&key, v);
                }
            }
            Value::String(s) => println!("{prefix}: {s}"),
            other => println!("{prefix}: {other}"),
        }
    }
    lines("", &report);
}

fn fmt_db(db: f64) -> Value {
    if db.is_finite() {
        json!(db)
    } else {
        json!("inf")
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };

    match &cli.command {
        Command::Encode { encode, .. } | Command::RdSweep { encode, .. } => encode.apply(&mut cfg),
        Command::Simulate { coverage, p_sub, p_ins, p_del, p_revcomp, seed, .. } => {
            let c = &mut cfg.channel;
            for (dst, src) in [(&mut c.mean_coverage, coverage), (&mut c.p_sub, p_sub), (&mut c.p_ins, p_ins), (&mut c.p_del, p_del), (&mut c.p_revcomp, p_revcomp)] {
                if let Some(v) = src {
                    *dst = *v;
                }
            }
            if let Some(s) = seed {
                c.seed = *s;
            }
        }
        Command::Decode { strategy, seed, .. } => {
            if let Some(s) = strategy {
                cfg.decode.strategy = *s;
            }
            if let Some(s) = seed {
                cfg.decode.seed = *s;
            }
        }
        _ => {}
    }
    eprintln!("# effective configuration\n{}", cfg.to_toml());

    match cli.command {
        Command::Encode { image, rate, budget, out, .. } => {
            let target = match (rate, budget) {
                (Some(r), None) => RateTarget::BitsPerNt(r),
                (None, Some(b)) => RateTarget::Nucleotides(b),
                _ => return Err(Failure::Usage("give exactly one of --rate or --budget".into())),
            };
            let img = read_image(&image)?;
            let enc = encode_image(&img, target, &cfg.encode)?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            let fasta_path = out.join("oligos.fasta");
            let meta_path = out.join("meta.toml");
            let layout = &enc.metadata.layout;
            fasta::write(&fasta_path, enc.oligos.iter().map(|o| (o.record_id(), o.synthesized(layout))))
                .map_err(with_path(&fasta_path))?;
            fs::write(&meta_path, enc.metadata.to_toml()?).map_err(io_err(&meta_path))?;
            let recon = quantization_only(&img, &enc.metadata)?;
            let m = compute_metrics(&img, &recon, enc.oligos.len(), layout)?;
            emit(
                cli.json,
                json!({
                    "oligos": fasta_path.display().to_string(),
                    "metadata": meta_path.display().to_string(),
                    "oligo_count": m.oligo_count,
                    "payload_nts": m.payload_nts,
                    "stream_nts": enc.metadata.stream_len,
                    "coding_potential_bits_per_nt": m.coding_potential_bits_per_nt,
                    "net_information_density": m.net_information_density,
                    "total_nts": m.total_nts,
                    "expected_psnr_db": fmt_db(m.psnr_db),
                    "steps": enc.allocation.steps,
                }),
            );
        }
        Command::Simulate { oligos, meta, out, .. } => {
            let layout = match &meta {
                Some(p) => read_meta(p)?.layout,
                None => cfg.encode.layout.clone(),
            };
            let records = fasta::read(&oligos).map_err(with_path(&oligos))?;
            let bodies: Vec<Oligo> = records
                .iter()
                .enumerate()
                .map(|(i, r)| Oligo { image_id: 0, offset: i as u64, body: trim_primers(&r.seq, &layout) })
                .collect();
            let reads = amplify_and_sequence(&bodies, &cfg.channel)?;
            fasta::write(&out, reads.reads().iter().enumerate().map(|(i, r)| (format!("read_{i}"), r.clone())))
                .map_err(with_path(&out))?;
            emit(
                cli.json,
                json!({ "oligos_in": bodies.len(), "reads_out": reads.len(), "reads": out.display().to_string() }),
            );
        }
        Command::Decode { reads, meta, out, original, .. } => {
            let meta = read_meta(&meta)?;
            let records = fasta::read(&reads).map_err(with_path(&reads))?;
            let set = ReadSet::from_reads(records.iter().map(|r| trim_primers(&r.seq, &meta.layout)).collect());
            let dec = decode_image::<f64>(&set, &meta, cfg.decode.strategy, cfg.decode.seed)?;
            write_image(&out, &dec.image)?;
            let r = &dec.report;
            let mut report = Map::new();
            report.insert("image".into(), json!(out.display().to_string()));
            report.insert("strategy".into(), json!(r.strategy.to_string()));
            report.insert("total_reads".into(), json!(r.total_reads));
            report.insert("accepted_reads".into(), json!(r.accepted_reads()));
            report.insert("chosen_copies".into(), json!(r.chosen_copies()));
            report.insert("other_copies".into(), json!(r.other_copies()));
            report.insert("rejected".into(), serde_json::to_value(r.rejected).expect("counts serialize"));
            report.insert("missing_chunks".into(), json!(r.missing.len()));
            report.insert("substituted_codewords".into(), json!(dec.substituted_count()));
            if let Some(p) = original {
                let img = read_image(&p)?;
                let (db, mse) = psnr(&img, &dec.image)?;
                report.insert("psnr_db".into(), fmt_db(db));
                report.insert("mse".into(), json!(mse));
            }
            emit(cli.json, Value::Object(report));
        }
        Command::Metrics { original, reconstructed, oligos, meta } => {
            let a = read_image(&original)?;
            let b = read_image(&reconstructed)?;
            let report = match oligos {
                Some(path) => {
                    let layout = match &meta {
                        Some(p) => read_meta(p)?.layout,
                        None => cfg.encode.layout.clone(),
                    };
                    let count = fasta::read(&path).map_err(with_path(&path))?.len();
                    let m = compute_metrics(&a, &b, count, &layout)?;
                    let mut v = serde_json::to_value(&m).expect("metrics serialize");
                    v["psnr_db"] = fmt_db(m.psnr_db);
                    v
                }
                None => {
                    let (db, mse) = psnr(&a, &b)?;
                    json!({ "psnr_db": fmt_db(db), "mse": mse })
                }
            };
            emit(cli.json, report);
        }
        Command::RdSweep { image, rates, out, .. } => {
            let img = read_image(&image)?;
            let points = rd_sweep(&img, &rates, &cfg.encode)?;
            if cli.json {
                let rows: Vec<Value> = points
                    .iter()
                    .map(|p| {
                        json!({
                            "target_bits_per_nt": p.target_bits_per_nt,
                            "bits_per_nt": p.bits_per_nt,
                            "psnr_db": fmt_db(p.psnr_db),
                            "oligo_count": p.oligo_count,
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&rows).expect("sweep serializes"));
            }
            let mut table = String::from("# bits_per_nt\tpsnr_db\n");
            for p in &points {
                table.push_str(&format!("{:.4}\t{:.4}\n", p.bits_per_nt, p.psnr_db));
            }
            match out {
                Some(p) => fs::write(&p, table).map_err(io_err(&p))?,
                None if !cli.json => print!("{table}"),
                None => {}
            }
        }
        Command::CodebookDump { k, strict } => {
            let book = Codebook::build(k, strict)?;
            let entries = book.entries();
            if cli.json {
                let e: Vec<Value> = entries
                    .iter()
                    .enumerate()
                    .map(|(p, w)| json!({ "position": p + 1, "codeword": w, "index": p as u64 % k as u64 + 1 }))
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "k": k, "l": book.l(), "size": book.size(), "m": book.m(), "entries": e }))
                        .expect("codebook serializes")
                );
            } else {
                println!("# k={k} l={} L={} m={}", book.l(), book.size(), book.m());
                println!("# position\tcodeword\tindex");
                for (p, w) in entries.iter().enumerate() {
                    println!("{}\t{w}\t{}", p + 1, p as u64 % k as u64 + 1);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("dnapix: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("dnapix: {m}");
            ExitCode::from(2)
        }
    }
}
