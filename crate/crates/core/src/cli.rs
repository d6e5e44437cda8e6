//! The `certmask` command line: `bounds`, `tile`, `verify`, `infer`,
//! `certify` and `bench`.
//!
//! Output is JSON on stdout. Exit codes: 0 success, 1 verification or
//! certification failure, 2 configuration or runtime error.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::certify::{
    double_masking_passes, evaluate_manifest, predict_all, aggregate, AdversarySearch, Certifier, CertifyOptions,
};
use crate::classifier::{serve, CallCounter, Classifier, ClassifierSpec, Constant, Label};
use crate::coverage::verify_with_limit;
use crate::dataset::Manifest;
use crate::error::{Error, Result};
use crate::geometry::{DomainSize, MaskPlacement, MaskSpec, PatchSpec};
use crate::image::Image;
use crate::masking::FillPolicy;
use crate::tiling::{build, default_folds, forward_pass_counts, theoretical_bounds, MaskSet, Strategy, TilingConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "certmask", version, about = "k-fold mask coverings and certified masked inference")]
pub struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = "CERTMASK_JOBS")]
    pub jobs: Option<usize>,
    /// Omit the run metadata block so identical runs print identical bytes
    #[arg(long, global = true)]
    pub no_meta: bool,
    /// Human-readable table instead of JSON
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form mask-count bounds
    Bounds(BoundsArgs),
    /// Build a mask set and write it as JSON
    Tile(TileArgs),
    /// Exhaustively check k-fold coverage of a mask set
    Verify(VerifyArgs),
    /// Masked inference on one image or a manifest
    Infer(InferArgs),
    /// Certify one image or evaluate a manifest
    Certify(CertifyArgs),
    /// Classifier calls and wall-clock: single round vs double masking
    Bench(BenchArgs),
    /// Serve a built-in classifier over the external protocol on stdio
    #[command(hide = true)]
    ServeBuiltin {
        #[arg(long)]
        classifier: String,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct GeometryArgs {
    /// Named geometry: imagenet-1pct, imagenet-2pct, imagenet-3pct, cifar-0p4pct, cifar-2p4pct
    #[arg(long)]
    pub preset: Option<String>,
    /// Image size, WxH
    #[arg(long)]
    pub domain: Option<DomainSize>,
    /// Mask size, WxH
    #[arg(long)]
    pub mask: Option<MaskSpec>,
    /// Patch size, WxH
    #[arg(long, conflicts_with = "patch_pct")]
    pub patch: Option<PatchSpec>,
    /// Square patch covering this percentage of the image
    #[arg(long)]
    pub patch_pct: Option<String>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Sweep square mask sides LO:HI (inclusive)
    #[arg(long, conflicts_with = "sweep_patch")]
    pub sweep_mask: Option<String>,
    /// Sweep square patch sides LO:HI (inclusive)
    #[arg(long)]
    pub sweep_patch: Option<String>,
    /// CSV rows instead of JSON
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct TileArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value = "offset")]
    pub strategy: Strategy,
    /// Output file (stdout if absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MaskSetSource {
    /// Mask-set JSON file; read from stdin when absent
    #[arg(long)]
    pub mask_set: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: MaskSetSource,
    /// Check against this patch size instead of the one recorded in the file
    #[arg(long)]
    pub patch: Option<PatchSpec>,
    /// Required multiplicity instead of the recorded k
    #[arg(long)]
    pub k: Option<u32>,
    /// Maximum number of gap anchors listed
    #[arg(long, default_value_t = crate::coverage::DEFAULT_GAP_LIMIT)]
    pub gap_limit: usize,
}

#[derive(Args, Debug)]
pub struct ClassifierArgs {
    /// constant:LABEL[:CLASSES], mean-threshold:T1,T2,..., lookup:FILE, external:CMD ARGS
    #[arg(long)]
    pub classifier: String,
    /// Timeout for each external classifier reply
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Mask fill: zero, mean or constant:V[,V,V]
    #[arg(long, default_value = "zero")]
    pub fill: FillPolicy,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[command(flatten)]
    pub source: MaskSetSource,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    pub image: Option<PathBuf>,
    /// CSV manifest of path,label rows
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: MaskSetSource,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest", requires = "label")]
    pub image: Option<PathBuf>,
    /// True label of --image
    #[arg(long)]
    pub label: Option<u32>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Enumerate every free-vote assignment instead of the exact count analysis
    #[arg(long)]
    pub brute_force: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Mask counts to run, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 9, 16, 36])]
    pub n: Vec<u32>,
    /// Side of the synthetic square image
    #[arg(long, default_value_t = 32)]
    pub size: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: bool,
}

/// A preset's domain, mask and patch, with k = 6 split as 3 x 2.
pub fn preset(name: &str) -> Option<(DomainSize, MaskSpec, PatchSpec)> {
    let (mask, patch) = match name {
        "imagenet-1pct" => (32, 23),
        "imagenet-2pct" => (48, 32),
        "imagenet-3pct" => (56, 39),
        "cifar-0p4pct" => (16, 15),
        "cifar-2p4pct" => (56, 35),
        _ => return None,
    };
    Some((DomainSize { lx: 224, ly: 224 }, MaskSpec { mx: mask, my: mask }, PatchSpec { px: patch, py: patch }))
}

pub const PRESETS: [&str; 5] = ["imagenet-1pct", "imagenet-2pct", "imagenet-3pct", "cifar-0p4pct", "cifar-2p4pct"];

/// Smallest square side `s` with `s^2 >= pct/100 * lx * ly`, in exact
/// integer arithmetic on the decimal `pct`.
pub fn patch_side_for_pct(pct: &str, domain: DomainSize) -> Result<u32> {
    let bad = || Error::Geometry(format!("bad patch percentage {pct:?}"));
    let (int, frac) = pct.trim().split_once('.').unwrap_or((pct.trim(), ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 9 {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num: u128 = digits.parse().map_err(|_| bad())?;
    let den: u128 = 100 * 10u128.pow(frac.len() as u32);
    if num == 0 || num > den {
        return Err(bad());
    }
    let area = num * u128::from(domain.lx) * u128::from(domain.ly);
    let mut s = ((area as f64 / den as f64).sqrt() as u128).saturating_sub(1);
    while s * s * den < area {
        s += 1;
    }
    u32::try_from(s).map_err(|_| bad())
}

impl GeometryArgs {
    pub fn resolve(&self) -> Result<TilingConfig> {
        let base = match &self.preset {
            Some(name) => Some(preset(name).ok_or_else(|| {
                Error::Geometry(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))
            })?),
            None => None,
        };
        let domain = self
            .domain
            .or(base.map(|b| b.0))
            .ok_or_else(|| Error::Geometry("--domain or --preset required".into()))?;
        let mask = self
            .mask
            .or(base.map(|b| b.1))
            .ok_or_else(|| Error::Geometry("--mask or --preset required".into()))?;
        let patch = match (&self.patch, &self.patch_pct) {
            (Some(p), _) => *p,
            (None, Some(pct)) => PatchSpec::square(patch_side_for_pct(pct, domain)?)?,
            (None, None) => base
                .map(|b| b.2)
                .ok_or_else(|| Error::Geometry("--patch, --patch-pct or --preset required".into()))?,
        };
        let k = self.k.unwrap_or(if base.is_some() { 6 } else { 1 });
        let (m, n) = match (self.m, self.n, base.is_some() && self.k.is_none()) {
            (Some(m), Some(n), _) => (m, n),
            (None, None, true) => (3, 2),
            (None, None, false) => default_folds(k),
            (Some(m), None, _) if m > 0 && k.is_multiple_of(m) => (m, k / m),
            (None, Some(n), _) if n > 0 && k.is_multiple_of(n) => (k / n, n),
            _ => return Err(Error::Geometry(format!("cannot split k={k} with the given --m/--n"))),
        };
        Ok(TilingConfig { domain, mask, patch, k, m, n })
    }
}

impl ClassifierArgs {
    fn instantiate(&self) -> Result<Box<dyn Classifier>> {
        let mut spec: ClassifierSpec = self.classifier.parse()?;
        if let (ClassifierSpec::External { timeout_ms, .. }, Some(t)) = (&mut spec, self.timeout_ms) {
            *timeout_ms = t;
        }
        spec.instantiate()
    }
}

struct Io<'a> {
    stdin: &'a mut dyn BufRead,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

struct Ctx {
    meta: bool,
    pretty: bool,
    started: Instant,
}

impl Ctx {
    fn emit(&self, out: &mut dyn Write, value: impl Serialize) -> Result<()> {
        let mut value = serde_json::to_value(value)?;
        if self.meta {
            if let Value::Object(map) = &mut value {
                let unix_ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
                map.insert(
                    "meta".into(),
                    json!({
                        "version": env!("CARGO_PKG_VERSION"),
                        "unix_ms": unix_ms as u64,
                        "elapsed_ms": self.started.elapsed().as_secs_f64() * 1e3,
                    }),
                );
            }
        }
        if self.pretty {
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in rows {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        } else {
            writeln!(out, "{}", serde_json::to_string(&value)?)?;
        }
        Ok(())
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows))
        }
        Value::Array(items) => {
            rows.push((prefix.to_owned(), items.iter().map(Value::to_string).collect::<Vec<_>>().join(" ")))
        }
        Value::String(s) => rows.push((prefix.to_owned(), s.clone())),
        other => rows.push((prefix.to_owned(), other.to_string())),
    }
}

fn load_mask_set(source: &MaskSetSource, stdin: &mut dyn BufRead) -> Result<MaskSet> {
    let text = match &source.mask_set {
        Some(p) => std::fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            s
        }
    };
    MaskSet::from_json(&text)
}

fn parse_range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Geometry(format!("expected LO:HI, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi): (u32, u32) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct BoundsRow {
    mask: String,
    patch: String,
    kfold_lb: u64,
    replicated_count: u64,
    offset_count: u64,
    approx_ratio: String,
}

fn cmd_bounds(args: &BoundsArgs, ctx: &Ctx, io: &mut Io) -> Result<i32> {
    let config = args.geometry.resolve()?;
    let sweep = match (&args.sweep_mask, &args.sweep_patch) {
        (Some(r), _) => Some((true, parse_range(r)?)),
        (_, Some(r)) => Some((false, parse_range(r)?)),
        _ => None,
    };
    let Some((vary_mask, (lo, hi))) = sweep else {
        let b = theoretical_bounds(&config)?;
        if args.csv {
            let row = BoundsRow {
                mask: config.mask.to_string(),
                patch: config.patch.to_string(),
                kfold_lb: b.kfold_lb,
                replicated_count: b.replicated_count,
                offset_count: b.offset_count,
                approx_ratio: b.approx_ratio.to_string(),
            };
            return write_csv(io.stdout, [row]).map(|_| EXIT_OK);
        }
        let mut v = serde_json::to_value(b)?;
        v["approx_ratio_decimal"] = json!(format!("{:.4}", b.approx_ratio.to_f64()));
        v["config"] = serde_json::to_value(config)?;
        ctx.emit(io.stdout, v)?;
        return Ok(EXIT_OK);
    };
    let mut rows = Vec::new();
    for side in lo..=hi {
        let mut c = config;
        if vary_mask {
            c.mask = MaskSpec::square(side)?;
        } else {
            c.patch = PatchSpec::square(side)?;
        }
        // sizes where the mask cannot contain the patch have no bound
        if let Ok(b) = theoretical_bounds(&c) {
            rows.push(BoundsRow {
                mask: c.mask.to_string(),
                patch: c.patch.to_string(),
                kfold_lb: b.kfold_lb,
                replicated_count: b.replicated_count,
                offset_count: b.offset_count,
                approx_ratio: b.approx_ratio.to_string(),
            });
        }
    }
    if args.csv {
        write_csv(io.stdout, rows)?;
    } else {
        ctx.emit(io.stdout, json!({ "rows": rows }))?;
    }
    Ok(EXIT_OK)
}

fn write_csv<T: Serialize>(out: &mut dyn Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_tile(args: &TileArgs, ctx: &Ctx, io: &mut Io) -> Result<i32> {
    let config = args.geometry.resolve()?;
    let set = build(&config, args.strategy)?;
    let text = if ctx.pretty { set.to_json_pretty()? } else { set.to_json()? };
    match &args.output {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(io.stdout, "{text}")?,
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, ctx: &Ctx, io: &mut Io) -> Result<i32> {
    let mut set = load_mask_set(&args.source, io.stdin)?;
    if let Some(p) = args.patch {
        set.config.patch = p;
    }
    if let Some(k) = args.k {
        set.config.k = k;
    }
    let report = verify_with_limit(&set, args.gap_limit);
    let ok = report.is_k_covered(set.k());
    let mut v = serde_json::to_value(&report)?;
    v["k"] = json!(set.k());
    v["masks"] = json!(set.len());
    v["covered"] = json!(ok);
    ctx.emit(io.stdout, v)?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_infer(args: &InferArgs, ctx: &Ctx, io: &mut Io) -> Result<i32> {
    let set = load_mask_set(&args.source, io.stdin)?;
    let classifier = args.classifier.instantiate()?;
    let fill = &args.classifier.fill;
    let run = |image: &Image| -> Result<Value> {
        let preds = predict_all(image, &set, &*classifier, fill)?;
        let outcome = aggregate(preds.labels(), set.k());
        Ok(json!({ "outcome": outcome, "predictions": preds }))
    };
    if let Some(path) = &args.image {
        let v = run(&Image::read(path)?)?;
        ctx.emit(io.stdout, v)?;
        return Ok(EXIT_OK);
    }
    let manifest = Manifest::load(args.manifest.as_ref().expect("clap requires image or manifest"))?;
    let mut results = Vec::with_capacity(manifest.entries.len());
    for e in &manifest.entries {
        let mut entry = Map::new();
        entry.insert("path".into(), json!(e.path.display().to_string()));
        entry.insert("label".into(), json!(e.label));
        match Image::read(&e.path).and_then(|img| run(&img)) {
            Ok(Value::Object(r)) => entry.extend(r),
            Ok(_) => unreachable!("run returns an object"),
            Err(err) => {
                entry.insert("error".into(), json!(err.to_string()));
            }
        }
        results.push(Value::Object(entry));
    }
    ctx.emit(io.stdout, json!({ "results": results }))?;
    Ok(EXIT_OK)
}

fn cmd_certify(args: &CertifyArgs, ctx: &Ctx, io: &mut Io) -> Result<i32> {
    let set = load_mask_set(&args.source, io.stdin)?;
    let classifier = args.classifier.instantiate()?;
    let options = CertifyOptions {
        fill: args.classifier.fill.clone(),
        search: if args.brute_force { AdversarySearch::BruteForce } else { AdversarySearch::Exact },
    };
    if let Some(path) = &args.image {
        let truth = Label(args.label.expect("clap requires --label with --image"));
        let image = Image::read(path)?;
        let result = Certifier::new(&set)?.certify(&image, truth, &*classifier, &options)?;
        ctx.emit(io.stdout, &result)?;
        return Ok(if result.certified { EXIT_OK } else { EXIT_FAILED });
    }
    let manifest = args.manifest.as_ref().expect("clap requires image or manifest");
    let summary = evaluate_manifest(manifest, &set, &*classifier, &options)?;
    ctx.emit(io.stdout, &summary)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BenchRow {
    n: u32,
    certmask: u64,
    double_masking: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    certmask_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    double_masking_ms: Option<f64>,
}

fn bench_one(n: u32, size: u32, seed: u64, timed: bool) -> Result<BenchRow> {
    let domain = DomainSize::square(size)?;
    let side = (size / 4).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(n));
    let placements = (0..n)
        .map(|_| MaskPlacement::clipped(i64::from(rng.gen_range(0..size)), i64::from(rng.gen_range(0..size))))
        .collect();
    let set = MaskSet {
        config: TilingConfig::new(domain, MaskSpec::square(side)?, PatchSpec::square(1)?, 1),
        strategy: Strategy::Single,
        placements,
        stride_x: None,
        stride_y: None,
    };
    let pixels = (0..size as usize * size as usize).map(|_| rng.gen()).collect();
    let image = Image::new(size, size, 1, pixels)?;
    let counter = CallCounter::new(Constant::new(Label(0), 2)?);
    let fill = FillPolicy::Zero;

    let t0 = Instant::now();
    predict_all(&image, &set, &counter, &fill)?;
    let single = t0.elapsed();
    let certmask = counter.calls();
    counter.reset();
    let t1 = Instant::now();
    let passes = double_masking_passes(&image, &set, &counter, &fill)?;
    let double = t1.elapsed();
    debug_assert_eq!(passes, counter.calls());
    let expected = forward_pass_counts(u64::from(n));
    if certmask != expected.certmask || passes != expected.double_masking {
        return Err(Error::Classifier(format!("call count drift at n={n}: {certmask}/{passes}")));
    }
    let ms = |d: Duration| timed.then_some(d.as_secs_f64() * 1e3);
    Ok(BenchRow { n, certmask, double_masking: passes, certmask_ms: ms(single), double_masking_ms: ms(double) })
}

fn cmd_bench(args: &BenchArgs, ctx: &Ctx, io: &mut Io) -> Result<i32> {
    if args.n.is_empty() || args.n.contains(&0) {
        return Err(Error::Geometry("--n needs positive mask counts".into()));
    }
    let rows = args
        .n
        .iter()
        .map(|&n| bench_one(n, args.size, args.seed, ctx.meta))
        .collect::<Result<Vec<_>>>()?;
    if args.csv {
        write_csv(io.stdout, rows)?;
    } else if rows.len() == 1 {
        ctx.emit(io.stdout, &rows[0])?;
    } else {
        ctx.emit(io.stdout, json!({ "runs": rows }))?;
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, io: &mut Io) -> Result<i32> {
    let ctx = Ctx { meta: !cli.no_meta, pretty: cli.pretty, started: Instant::now() };
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, &ctx, io),
        Command::Tile(a) => cmd_tile(a, &ctx, io),
        Command::Verify(a) => cmd_verify(a, &ctx, io),
        Command::Infer(a) => cmd_infer(a, &ctx, io),
        Command::Certify(a) => cmd_certify(a, &ctx, io),
        Command::Bench(a) => cmd_bench(a, &ctx, io),
        Command::ServeBuiltin { classifier } => {
            let spec: ClassifierSpec = classifier.parse()?;
            if matches!(spec, ClassifierSpec::External { .. }) {
                return Err(Error::Classifier("serve-builtin needs a built-in classifier".into()));
            }
            serve(&*spec.instantiate()?, &mut *io.stdin, &mut *io.stdout)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut io = Io { stdin, stdout, stderr };
    let outcome = match cli.jobs {
        Some(0) => Err(Error::Geometry("--jobs must be positive".into())),
        Some(j) => {
            // the global pool can only be sized once per process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
            dispatch(&cli, &mut io)
        }
        None => dispatch(&cli, &mut io),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}

