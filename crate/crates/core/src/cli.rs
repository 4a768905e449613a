//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::constructions::{
    adversarial_meta, clean_domain, large_k_family, lower_bound_family, odd_even_domain,
    product_family, DEFAULT_PRODUCT_CAP,
};
use crate::dimensions::{
    gdim, partial_vc_dim_capped, verify_certificate, DimensionQuery, PartialConceptClass,
    DEFAULT_SIZE_CAP,
};
use crate::divergence::{
    divergence_matrix, greedy_cover, h_divergence, triangle_violations, DivergenceQuery,
};
use crate::error::{Error, Result};
use crate::experiments::{
    run_lower_bound, run_scaling, run_uniform_convergence, write_report, ConceptSource,
    ExperimentReport, Generator, LowerBoundConfig, RunOptions, ScalingConfig,
    UniformConvergenceConfig,
};
use crate::io;
use crate::learner::{
    estimate_errors, exact_errors, minmax_erm, pooled_erm, sample_domain_indices,
    sample_training_set, uniform_weights,
};
use crate::model::{domain_risk, DomainFamily};
use crate::rational::Rational;
use crate::sampling::{rng_from_seed, DEFAULT_SEED};

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn existing_file(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "genlab", version, about = "Domain generalization toolkit")]
struct Cli {
    /// Master seed
    #[arg(long, global = true, env = "GENLAB_SEED")]
    seed: Option<u64>,
    /// Worker threads; never changes outputs
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Machine-readable summary instead of the text line
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Decimal places for float columns
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct QueryArgs {
    #[arg(long, value_parser = rational_arg)]
    pub tau: Rational,
    #[arg(long, value_parser = rational_arg)]
    pub alpha: Rational,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Domain shattering dimension of a class on a family
    Gdim {
        #[arg(long, value_parser = existing_file)]
        class: PathBuf,
        #[arg(long, value_parser = existing_file)]
        domains: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
        cap: usize,
        /// Write the certificate here
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// VC dimension of a class
    Vcdim {
        #[arg(long, value_parser = existing_file)]
        class: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
        cap: usize,
    },
    /// Check a shattering certificate; exit status 1 if it fails
    VerifyCert {
        #[arg(long, value_parser = existing_file)]
        class: PathBuf,
        #[arg(long, value_parser = existing_file)]
        domains: PathBuf,
        #[arg(long, value_parser = existing_file)]
        cert: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Sample a training set and run an ERM selector
    Learn {
        #[arg(long, value_parser = existing_file)]
        class: PathBuf,
        #[arg(long, value_parser = existing_file)]
        meta: PathBuf,
        #[arg(long)]
        n: usize,
        /// Points per domain; exact domain errors when absent
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = Selector::Minmax)]
        selector: Selector,
        /// Report Er at this threshold
        #[arg(long, value_parser = rational_arg)]
        tau: Option<Rational>,
        /// Directory for the training set and error table
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a construction as JSON files
    Construct {
        #[command(subcommand)]
        which: Construct,
    },
    /// (H, tau)-divergence between two domains
    Divergence {
        #[arg(long, value_parser = existing_file)]
        class: PathBuf,
        #[arg(long, value_parser = existing_file)]
        d1: PathBuf,
        #[arg(long, value_parser = existing_file)]
        d2: PathBuf,
        /// Omit for the plain H-divergence
        #[arg(long, value_parser = rational_arg)]
        tau: Option<Rational>,
    },
    /// Greedy cover of a family under the divergence
    Cover {
        #[arg(long, value_parser = existing_file)]
        class: PathBuf,
        #[arg(long, value_parser = existing_file)]
        domains: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        radius: Rational,
        #[arg(long, value_parser = rational_arg)]
        tau: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded experiment runs
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Selector {
    Minmax,
    Pooled,
}

#[derive(Clone, Debug, Args)]
pub struct LowerBoundArgs {
    #[arg(long, value_parser = existing_file)]
    pub class: PathBuf,
    #[arg(long, value_parser = existing_file)]
    pub domains: PathBuf,
    #[arg(long, value_parser = existing_file)]
    pub cert: PathBuf,
    /// Domain every hypothesis labels perfectly; derived from the class when absent
    #[arg(long, value_parser = existing_file)]
    pub clean: Option<PathBuf>,
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Construct {
    OddEven {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    LargeK {
        #[arg(long, value_parser = rational_arg)]
        alpha: Rational,
        #[arg(long)]
        out: PathBuf,
    },
    Product {
        #[arg(long, value_parser = rational_arg)]
        alpha: Rational,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = DEFAULT_PRODUCT_CAP)]
        cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    LowerBound(LowerBoundArgs),
    Adversarial {
        #[command(flatten)]
        base: LowerBoundArgs,
        #[arg(long, value_parser = rational_arg)]
        gamma: Rational,
        /// One 0/1 character per shattered domain; drawn from the seed when absent
        #[arg(long)]
        bits: Option<String>,
    },
}

#[derive(Clone, Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_parser = existing_file)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Experiment {
    Scaling(ExperimentArgs),
    UniformConvergence(ExperimentArgs),
    LowerBound(ExperimentArgs),
}

#[derive(Clone, Debug)]
pub struct CliConfig {
    pub command: Command,
    pub seed: u64,
    /// Whether the seed came from the flag or environment rather than the default.
    pub seed_given: bool,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub precision: usize,
}

/// Result of a command: exit status and the line printed to stdout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub success: bool,
    pub summary: String,
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    if cli.threads == Some(0) {
        return Err(clap::Error::raw(
            clap::error::ErrorKind::ValueValidation,
            "--threads must be at least 1\n",
        ));
    }
    Ok(CliConfig {
        command: cli.command,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        seed_given: cli.seed.is_some(),
        threads: cli.threads,
        format: cli.format,
        precision: cli.precision,
    })
}

/// Ordered summary fields.
struct Summary(Vec<(&'static str, Value)>);

impl Summary {
    fn new() -> Self {
        Summary(Vec::new())
    }

    fn add(mut self, key: &'static str, v: impl Serialize) -> Self {
        self.0
            .push((key, serde_json::to_value(v).unwrap_or(Value::Null)));
        self
    }

    fn render(&self, format: Option<Format>) -> String {
        let plain = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        match format {
            None => {
                let mut s = String::new();
                for (i, (k, v)) in self.0.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{k}={}", plain(v));
                }
                s
            }
            Some(Format::Json) => {
                let map: Map<String, Value> = self
                    .0
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect();
                Value::Object(map).to_string()
            }
            Some(Format::Csv) => {
                let keys: Vec<&str> = self.0.iter().map(|(k, _)| *k).collect();
                let vals: Vec<String> = self.0.iter().map(|(_, v)| plain(v)).collect();
                let mut w = csv::Writer::from_writer(Vec::new());
                let _ = w.write_record(&keys);
                let _ = w.write_record(&vals);
                let bytes = w.into_inner().unwrap_or_default();
                String::from_utf8_lossy(&bytes).trim_end().to_string()
            }
        }
    }
}

fn query(q: &QueryArgs) -> Result<DimensionQuery> {
    DimensionQuery::new(q.tau.clone(), q.alpha.clone())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, v: &T) -> Result<()> {
    io::write_atomic(path, io::to_json(v)?.as_bytes())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    io::write_atomic(path, text.as_bytes())
}

fn out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

/// Relative config paths are read against the config file's directory.
fn rebase(path: &mut PathBuf, base: &Path) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => io::load_json(p, "experiment config").map_err(|e| Error::Config(e.to_string())),
        None => Ok(T::default()),
    }
}

fn config_base(path: Option<&Path>) -> PathBuf {
    path.and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

fn finish_experiment(
    report: &ExperimentReport,
    args: &ExperimentArgs,
    cfg: &CliConfig,
) -> Result<Summary> {
    let paths = write_report(report, &args.out, cfg.precision)?;
    Ok(Summary::new()
        .add("experiment", &report.experiment)
        .add("rows", report.rows.len())
        .add("csv", show(&paths.csv))
        .add("json", show(&paths.json))
        .add("series", show(&paths.series)))
}

fn run_experiment(which: &Experiment, cfg: &CliConfig) -> Result<Summary> {
    let opts = RunOptions {
        threads: cfg.threads,
    };
    match which {
        Experiment::Scaling(args) => {
            let mut c: ScalingConfig = load_config(args.config.as_deref())?;
            if let Generator::Explicit { class, meta } = &mut c.generator {
                let base = config_base(args.config.as_deref());
                rebase(class, &base);
                rebase(meta, &base);
            }
            if cfg.seed_given {
                c.seed = cfg.seed;
            }
            finish_experiment(&run_scaling(&c, &opts)?, args, cfg)
        }
        Experiment::UniformConvergence(args) => {
            let mut c: UniformConvergenceConfig = load_config(args.config.as_deref())?;
            if let ConceptSource::Explicit { class, meta } = &mut c.source {
                let base = config_base(args.config.as_deref());
                rebase(class, &base);
                rebase(meta, &base);
            }
            if cfg.seed_given {
                c.seed = cfg.seed;
            }
            finish_experiment(&run_uniform_convergence(&c, &opts)?, args, cfg)
        }
        Experiment::LowerBound(args) => {
            let mut c: LowerBoundConfig = load_config(args.config.as_deref())?;
            if cfg.seed_given {
                c.seed = cfg.seed;
            }
            finish_experiment(&run_lower_bound(&c, &opts)?, args, cfg)
        }
    }
}

fn write_family_bundle(
    dir: &Path,
    class: &crate::model::HypothesisClass,
    family: &DomainFamily,
    cert: Option<&crate::dimensions::ShatteringCertificate>,
) -> Result<Summary> {
    out_dir(dir)?;
    let class_path = dir.join("class.json");
    let family_path = dir.join("family.json");
    write_text(&class_path, &io::class_to_json(class)?)?;
    write_text(&family_path, &io::family_to_json(family)?)?;
    let mut s = Summary::new()
        .add("class", show(&class_path))
        .add("family", show(&family_path));
    if let Some(c) = cert {
        let cert_path = dir.join("certificate.json");
        write_json(&cert_path, c)?;
        s = s.add("certificate", show(&cert_path));
    }
    Ok(s)
}

fn load_lower_bound(
    a: &LowerBoundArgs,
) -> Result<(
    crate::model::HypothesisClass,
    crate::constructions::LowerBoundFamily,
)> {
    let hc = io::load_class(&a.class)?;
    let g = io::load_family(&a.domains)?;
    let cert = io::load_certificate(&a.cert)?;
    let d0 = match &a.clean {
        Some(p) => io::load_domain(p)?,
        None => clean_domain(&hc)?,
    };
    let lbf = lower_bound_family(&hc, &g, &d0, &cert, &a.query.tau, &a.query.alpha)?;
    Ok((hc, lbf))
}

fn run_construct(which: &Construct, cfg: &CliConfig) -> Result<Summary> {
    match which {
        Construct::OddEven { m, out } => {
            let (d, slice) = odd_even_domain(*m)?;
            out_dir(out)?;
            let dom = out.join("domain.json");
            let class = out.join("class.json");
            write_text(&dom, &io::domain_to_json(&d)?)?;
            write_text(&class, &io::class_to_json(&slice.class())?)?;
            Ok(Summary::new()
                .add("m", m)
                .add("domain", show(&dom))
                .add("class", show(&class)))
        }
        Construct::LargeK { alpha, out } => {
            let fam = large_k_family(alpha)?;
            let s = write_family_bundle(out, &fam.class(), &fam.family, Some(&fam.certificate()))?;
            let mut s2 = Summary::new().add("k", fam.k);
            s2.0.extend(s.0);
            Ok(s2)
        }
        Construct::Product {
            alpha,
            copies,
            cap,
            out,
        } => {
            let base = large_k_family(alpha)?;
            let p = product_family(&base, *copies, *cap)?;
            let s = write_family_bundle(out, &p.class, &p.family, Some(&p.certificate))?;
            let mut s2 = Summary::new().add("gdim", p.certificate.set.len());
            s2.0.extend(s.0);
            Ok(s2)
        }
        Construct::LowerBound(a) => {
            let (hc, lbf) = load_lower_bound(a)?;
            let s = write_family_bundle(&a.out, &hc, &lbf.extended, None)?;
            let info = a.out.join("lower-bound.json");
            write_json(
                &info,
                &json!({
                    "tau": lbf.tau,
                    "alpha": lbf.alpha,
                    "lambda": lbf.lambda,
                    "pair_floor": lbf.pair_floor(),
                    "tau_prime": lbf.default_tau_prime(),
                    "shattered": lbf.shattered,
                    "clean_index": lbf.clean_index(),
                    "flipped_indices": (0..lbf.d()).map(|i| lbf.flipped_index(i)).collect::<Vec<_>>(),
                }),
            )?;
            let mut s2 = Summary::new().add("d", lbf.d()).add("lambda", &lbf.lambda);
            s2.0.extend(s.0);
            Ok(s2.add("info", show(&info)))
        }
        Construct::Adversarial { base, gamma, bits } => {
            let (_, lbf) = load_lower_bound(base)?;
            let b: Vec<bool> = match bits {
                Some(s) => s
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::Config(format!("--bits: unexpected {other:?}"))),
                    })
                    .collect::<Result<_>>()?,
                None => {
                    let mut rng = rng_from_seed(cfg.seed);
                    (0..lbf.d()).map(|_| rng.random_bool(0.5)).collect()
                }
            };
            let p = adversarial_meta(&lbf, &b, gamma)?;
            out_dir(&base.out)?;
            let meta = base.out.join("meta.json");
            write_text(&meta, &io::meta_to_json(&p)?)?;
            let bit_str: String = b.iter().map(|&x| if x { '1' } else { '0' }).collect();
            Ok(Summary::new().add("b", bit_str).add("meta", show(&meta)))
        }
    }
}

pub fn run(cfg: &CliConfig) -> Result<Outcome> {
    let mut success = true;
    let summary = match &cfg.command {
        Command::Gdim {
            class,
            domains,
            query: qa,
            cap,
            cert_out,
        } => {
            let hc = io::load_class(class)?;
            let g = io::load_family(domains)?;
            let r = gdim(&hc, &g, &query(qa)?.with_cap(*cap))?;
            let mut s = Summary::new()
                .add("gdim", r.dimension)
                .add("exact", r.exact);
            if let Some(p) = cert_out {
                write_json(p, &r.certificate)?;
                s = s.add("certificate", show(p));
            }
            s
        }
        Command::Vcdim { class, cap } => {
            let hc = io::load_class(class)?;
            let r = partial_vc_dim_capped(&PartialConceptClass::from_total(&hc), *cap);
            Summary::new()
                .add("vcdim", r.dimension)
                .add("exact", r.exact)
        }
        Command::VerifyCert {
            class,
            domains,
            cert,
            query: qa,
        } => {
            let hc = io::load_class(class)?;
            let g = io::load_family(domains)?;
            let c = io::load_certificate(cert)?;
            success = verify_certificate(&c, &hc, &g, &query(qa)?)?;
            Summary::new()
                .add("valid", success)
                .add("size", c.set.len())
        }
        Command::Learn {
            class,
            meta,
            n,
            m,
            selector,
            tau,
            out,
        } => {
            let hc = io::load_class(class)?;
            let p = io::load_meta(meta)?;
            let (table, idx, training) = match m {
                Some(m) => {
                    let t = sample_training_set(&p, *n, *m, cfg.seed)?;
                    (estimate_errors(&hc, &t)?, t.domain_indices.clone(), Some(t))
                }
                None => {
                    if *n == 0 {
                        return Err(Error::Config("--n must be at least 1".into()));
                    }
                    let idx = sample_domain_indices(&p, *n, cfg.seed);
                    (exact_errors(&hc, p.family(), &idx)?, idx, None)
                }
            };
            let h = match selector {
                Selector::Minmax => minmax_erm(&table)?,
                Selector::Pooled => pooled_erm(&table, &uniform_weights(table.columns()))?,
            };
            let mut s = Summary::new()
                .add("hypothesis", h)
                .add("max_train_err", table.row_max(h).cloned());
            if let Some(tau) = tau {
                s = s.add("er", domain_risk(&p, tau, &hc.members()[h])?);
            }
            if let Some(dir) = out {
                out_dir(dir)?;
                let tp = dir.join("error-table.json");
                write_json(&tp, &json!({ "domain_indices": idx, "table": table }))?;
                s = s.add("table", show(&tp));
                if let Some(t) = training {
                    let sp = dir.join("training-set.json");
                    write_json(&sp, &t)?;
                    s = s.add("training_set", show(&sp));
                }
            }
            s
        }
        Command::Construct { which } => run_construct(which, cfg)?,
        Command::Divergence { class, d1, d2, tau } => {
            let hc = io::load_class(class)?;
            let a = io::load_domain(d1)?;
            let b = io::load_domain(d2)?;
            let q = match tau {
                Some(t) => DivergenceQuery::thresholded(t.clone())?,
                None => DivergenceQuery::classic(),
            };
            let d = h_divergence(&hc, &a, &b, &q)?;
            Summary::new()
                .add("divergence", &d.value)
                .add("vacuous", d.vacuous)
        }
        Command::Cover {
            class,
            domains,
            radius,
            tau,
            out,
        } => {
            let hc = io::load_class(class)?;
            let g = io::load_family(domains)?;
            let q = match tau {
                Some(t) => DivergenceQuery::thresholded(t.clone())?,
                None => DivergenceQuery::classic(),
            };
            let cover = greedy_cover(&g, &hc, radius, &q)?;
            let violations = triangle_violations(&divergence_matrix(&hc, &g, &q)?).len();
            let mut s = Summary::new()
                .add("cover_size", cover.len())
                .add("centers", &cover.centers)
                .add("triangle_violations", violations);
            if let Some(p) = out {
                write_json(p, &cover)?;
                s = s.add("cover", show(p));
            }
            s
        }
        Command::Experiment { which } => run_experiment(which, cfg)?,
    };
    Ok(Outcome {
        success,
        summary: summary.render(cfg.format),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("h.json"),
            r#"{"space": 1, "hypotheses": [[0]]}"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("g.json"),
            r#"{"domains": [{"space": 1, "atoms": [{"x": 0, "y": 0, "mass": "1/1"}]}]}"#,
        )
        .unwrap();
        dir
    }

    fn argv(dir: &Path, rest: &[&str]) -> Vec<String> {
        let mut v = vec!["genlab".to_string()];
        for a in rest {
            v.push(a.replace("{d}", &dir.display().to_string()));
        }
        v
    }

    #[test]
    fn gdim_query_from_flags() {
        let dir = files();
        let cfg = parse_args(argv(
            dir.path(),
            &[
                "gdim",
                "--class",
                "{d}/h.json",
                "--domains",
                "{d}/g.json",
                "--tau",
                "3/10",
                "--alpha",
                "1/10",
            ],
        ))
        .unwrap();
        let Command::Gdim { query: qa, .. } = &cfg.command else {
            panic!()
        };
        assert_eq!(
            query(qa).unwrap(),
            DimensionQuery::new(crate::q(3, 10), crate::q(1, 10)).unwrap()
        );
        let out = run(&cfg).unwrap();
        assert!(out.success);
        assert_eq!(out.summary, "gdim=0 exact=true");
    }

    #[test]
    fn missing_tau_is_usage_error() {
        let dir = files();
        let err = parse_args(argv(
            dir.path(),
            &[
                "gdim",
                "--class",
                "{d}/h.json",
                "--domains",
                "{d}/g.json",
                "--alpha",
                "1/10",
            ],
        ))
        .unwrap_err();
        assert!(err.to_string().contains("--tau"));
    }

    #[test]
    fn decimal_and_missing_file_rejected() {
        let dir = files();
        let err = parse_args(argv(
            dir.path(),
            &[
                "gdim",
                "--class",
                "{d}/h.json",
                "--domains",
                "{d}/g.json",
                "--tau",
                "0.3",
                "--alpha",
                "1/10",
            ],
        ))
        .unwrap_err();
        assert!(err.to_string().contains("--tau"));
        assert!(parse_args(argv(dir.path(), &["vcdim", "--class", "{d}/nope.json"],)).is_err());
    }

    #[test]
    fn summary_formats() {
        let s = Summary::new().add("k", 4).add("path", "a b");
        assert_eq!(s.render(None), "k=4 path=a b");
        assert_eq!(s.render(Some(Format::Json)), r#"{"k":4,"path":"a b"}"#);
        assert_eq!(s.render(Some(Format::Csv)), "k,path\n4,a b");
    }

    #[test]
    fn seed_flag_recorded() {
        let dir = files();
        let cfg = parse_args(argv(
            dir.path(),
            &["--seed", "42", "vcdim", "--class", "{d}/h.json"],
        ))
        .unwrap();
        assert_eq!(cfg.seed, 42);
        assert!(cfg.seed_given);
    }
}
