//! JSON file formats and atomic output.
//!
//! Domains: `{"space": N, "atoms": [{"x": i, "y": 0|1, "mass": "p/q"}]}`.
//! Classes: `{"space": N, "hypotheses": [[0|1, ...], ...]}`.
//! Families: `{"domains": [domain | "path.json", ...]}`, plus `"weights"` for
//! a meta-distribution. Path entries are resolved by the caller.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::dimensions::{DimensionQuery, ShatteringCertificate};
use crate::error::{Error, Result};
use crate::model::{
    Atom, DomainFamily, Hypothesis, HypothesisClass, InstanceSpace, LabeledDistribution,
    MetaDistribution,
};
use crate::rational::Rational;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    space: usize,
    atoms: Vec<Atom>,
}

impl DomainFile {
    fn build(self) -> Result<LabeledDistribution> {
        LabeledDistribution::new(InstanceSpace::new(self.space)?, self.atoms)
    }

    fn of(d: &LabeledDistribution) -> Self {
        DomainFile {
            space: d.space().size(),
            atoms: d.atoms().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassFile {
    space: usize,
    hypotheses: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DomainEntry {
    Inline(DomainFile),
    Ref(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    domains: Vec<DomainEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Rational>>,
}

/// Maps a domain reference to the referenced file's text.
pub type Resolver<'a> = &'a dyn Fn(&str) -> Result<String>;

/// Resolver for inputs that must be self-contained.
pub fn no_refs(r: &str) -> Result<String> {
    Err(Error::Parse(format!(
        "file reference {r:?} not allowed here"
    )))
}

/// Resolver reading references relative to `base`.
pub fn dir_resolver(base: &Path) -> impl Fn(&str) -> Result<String> + '_ {
    move |r: &str| {
        let path = base.join(r);
        fs::read_to_string(&path)
            .map_err(|e| Error::Parse(format!("reading {}: {e}", path.display())))
    }
}

fn from_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    text.parse()
}

pub fn parse_domain(text: &str) -> Result<LabeledDistribution> {
    from_json::<DomainFile>(text, "domain")?.build()
}

pub fn domain_to_json(d: &LabeledDistribution) -> Result<String> {
    to_json(&DomainFile::of(d))
}

pub fn parse_class(text: &str) -> Result<HypothesisClass> {
    let file: ClassFile = from_json(text, "class")?;
    let space = InstanceSpace::new(file.space)?;
    let members = file
        .hypotheses
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .map(|b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(Error::Parse(format!(
                        "hypothesis {i}: label must be 0 or 1, got {other}"
                    ))),
                })
                .collect::<Result<Vec<bool>>>()
                .map(Hypothesis::new)
        })
        .collect::<Result<Vec<_>>>()?;
    HypothesisClass::new(space, members)
}

pub fn class_to_json(hc: &HypothesisClass) -> Result<String> {
    to_json(&ClassFile {
        space: hc.space().size(),
        hypotheses: hc
            .members()
            .iter()
            .map(|h| h.labels().iter().map(|&b| u8::from(b)).collect())
            .collect(),
    })
}

fn build_family(entries: Vec<DomainEntry>, resolve: Resolver) -> Result<DomainFamily> {
    let domains = entries
        .into_iter()
        .map(|e| match e {
            DomainEntry::Inline(d) => d.build(),
            DomainEntry::Ref(r) => parse_domain(&resolve(&r)?),
        })
        .collect::<Result<Vec<_>>>()?;
    let Some(first) = domains.first() else {
        return Err(Error::Parse("family lists no domains".into()));
    };
    DomainFamily::new(first.space(), domains)
}

pub fn parse_family(text: &str, resolve: Resolver) -> Result<DomainFamily> {
    let file: FamilyFile = from_json(text, "family")?;
    build_family(file.domains, resolve)
}

/// A meta-distribution file; a family file without `"weights"` is read as uniform.
pub fn parse_meta(text: &str, resolve: Resolver) -> Result<MetaDistribution> {
    let file: FamilyFile = from_json(text, "meta-distribution")?;
    let family = build_family(file.domains, resolve)?;
    match file.weights {
        Some(w) => MetaDistribution::new(family, w),
        None => MetaDistribution::uniform(family),
    }
}

pub fn family_to_json(g: &DomainFamily) -> Result<String> {
    to_json(&FamilyFile {
        domains: g
            .domains()
            .iter()
            .map(|d| DomainEntry::Inline(DomainFile::of(d)))
            .collect(),
        weights: None,
    })
}

pub fn meta_to_json(p: &MetaDistribution) -> Result<String> {
    to_json(&FamilyFile {
        domains: p
            .family()
            .domains()
            .iter()
            .map(|d| DomainEntry::Inline(DomainFile::of(d)))
            .collect(),
        weights: Some(p.weights().to_vec()),
    })
}

pub fn parse_certificate(text: &str) -> Result<ShatteringCertificate> {
    from_json(text, "certificate")
}

pub fn parse_query(text: &str) -> Result<DimensionQuery> {
    let q: DimensionQuery = from_json(text, "query")?;
    let cap = q.cap;
    let checked = DimensionQuery::new(q.tau, q.alpha)?;
    Ok(match cap {
        Some(c) => checked.with_cap(c),
        None => checked,
    })
}

/// Any serde type from JSON, with a parse error naming `what`.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    from_json(text, what)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn parent(path: &Path) -> PathBuf {
    path.parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn load_domain(path: &Path) -> Result<LabeledDistribution> {
    parse_domain(&read(path)?)
}

pub fn load_class(path: &Path) -> Result<HypothesisClass> {
    parse_class(&read(path)?)
}

pub fn load_family(path: &Path) -> Result<DomainFamily> {
    let base = parent(path);
    let resolve = dir_resolver(&base);
    parse_family(&read(path)?, &resolve)
}

pub fn load_meta(path: &Path) -> Result<MetaDistribution> {
    let base = parent(path);
    let resolve = dir_resolver(&base);
    parse_meta(&read(path)?, &resolve)
}

pub fn load_certificate(path: &Path) -> Result<ShatteringCertificate> {
    parse_certificate(&read(path)?)
}

pub fn load_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    parse_json(&read(path)?, what)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = parent(path);
    let mut tmp = NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
