//! Command-line front door. Every verb reads canonical JSON documents,
//! dispatches to one library entry point, and writes a report document with a
//! `checks` array. Exit codes: 0 success, 1 verification failure, 2 input
//! error.

use clap::{Parser, Subcommand};
use posheaf::cosheaf::{certify_closed_image, verify_certificate};
use posheaf::docs;
use posheaf::sheaf::{derived_pushforward, pseudo_free_resolve, realize, PosetRep};
use posheaf::stratify::proper_refine;
use posheaf::suite::{run_all, stalkwise_homology_equal, verify_region};
use posheaf::{derham, Error, Result};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "posheaf",
    version,
    about = "Constructible sheaves on finite posets: homology, pushforwards, \
             resolutions, closed-image certificates, stratification repair, \
             and fiberwise grid verification"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Stalkwise homology of a representation, optionally pushed forward
    /// along a monotone map first.
    Homology {
        #[arg(long)]
        sheaf: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derived pushforward of a representation along a monotone map.
    Pushforward {
        #[arg(long)]
        sheaf: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pseudo-free resolution of a representation, checked against the input.
    Resolve {
        #[arg(long)]
        sheaf: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Proper stratification refining a collection of locally closed sets.
    Refine {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        sets: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-image certificate for a combinatorial map, with independent
    /// verification.
    CertifyClosedImage {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The four numeric identities of the fiberwise layer, on a given region.
    DerhamVerify {
        #[arg(long)]
        region: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full acceptance battery; prints one pass/fail line per criterion.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read_doc(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    docs::parse(&text).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn emit(report: &Value, out: Option<&Path>) -> Result<()> {
    let text = docs::to_canonical_string(report);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check(name: &str, pass: bool) -> Value {
    json!({ "name": name, "pass": pass })
}

fn all_pass(checks: &[Value]) -> bool {
    checks.iter().all(|c| c["pass"] == Value::Bool(true))
}

/// Nonzero homology dimensions per stalk, keyed by element label and degree.
fn homology_doc(f: &PosetRep) -> Value {
    let mut stalks = Map::new();
    let (lo, hi) = f.degree_range();
    for p in 0..f.base().len() {
        let mut per = Map::new();
        for k in lo..=hi {
            let d = f.stalk(p).homology_at(k);
            if d > 0 {
                per.insert(k.to_string(), Value::from(d));
            }
        }
        stalks.insert(f.base().label(p).to_string(), Value::Object(per));
    }
    Value::Object(stalks)
}

fn finish(payload: Value, checks: Vec<Value>, out: Option<&Path>) -> Result<ExitCode> {
    let ok = all_pass(&checks);
    let mut report = payload;
    report
        .as_object_mut()
        .expect("report payloads are objects")
        .insert("checks".to_string(), Value::Array(checks));
    emit(&report, out)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(verb: Verb) -> Result<ExitCode> {
    match verb {
        Verb::Homology { sheaf, map, out } => {
            let f = docs::representation_from_doc(&read_doc(&sheaf)?, "$")?;
            let f = match map {
                Some(path) => {
                    let g = docs::monotone_map_from_doc(&read_doc(&path)?, "$")?;
                    derived_pushforward(&g, &f)?
                }
                None => f,
            };
            finish(json!({ "homology": homology_doc(&f) }), vec![], out.as_deref())
        }
        Verb::Pushforward { sheaf, map, out } => {
            let f = docs::representation_from_doc(&read_doc(&sheaf)?, "$")?;
            let g = docs::monotone_map_from_doc(&read_doc(&map)?, "$")?;
            let push = derived_pushforward(&g, &f)?;
            finish(
                json!({ "representation": docs::representation_to_doc(&push) }),
                vec![],
                out.as_deref(),
            )
        }
        Verb::Resolve { sheaf, out } => {
            let f = docs::representation_from_doc(&read_doc(&sheaf)?, "$")?;
            let q = pseudo_free_resolve(&f)?;
            let checks = vec![
                check(
                    "realization has the stalkwise homology of the input",
                    stalkwise_homology_equal(&realize(&q), &f),
                ),
                check(
                    "resolution length within twice the poset size",
                    q.terms().len() <= 2 * f.base().len(),
                ),
            ];
            finish(
                json!({ "resolution": docs::pseudo_free_to_doc(&q) }),
                checks,
                out.as_deref(),
            )
        }
        Verb::Refine { space, sets, out } => {
            let x = docs::poset_from_doc(&read_doc(&space)?, "$")?;
            let sets_doc = read_doc(&sets)?;
            let arr = sets_doc
                .as_array()
                .ok_or_else(|| Error::invalid("$: the sets document is an array of label arrays"))?;
            let mut theta = Vec::new();
            for (i, member) in arr.iter().enumerate() {
                let labels = member.as_array().ok_or_else(|| {
                    Error::invalid(format!("$[{i}]: each set is an array of element labels"))
                })?;
                let mut set = Vec::new();
                for (j, l) in labels.iter().enumerate() {
                    let name = l.as_str().ok_or_else(|| {
                        Error::invalid(format!("$[{i}][{j}]: labels are strings"))
                    })?;
                    set.push(x.index_of(name).ok_or_else(|| {
                        Error::invalid(format!("$[{i}][{j}]: unknown element {name:?}"))
                    })?);
                }
                set.sort_unstable();
                set.dedup();
                theta.push(set);
            }
            let s = proper_refine(&x, &theta)?;
            let strata = s.strata();
            let unions = theta.iter().all(|member| {
                member
                    .iter()
                    .all(|&p| strata[s.map().apply(p)].iter().all(|q| member.contains(q)))
            });
            let checks = vec![
                check("stratification is proper", s.is_proper()),
                check("every input set is a union of strata", unions),
            ];
            finish(
                json!({ "stratification": docs::stratification_to_doc(&s) }),
                checks,
                out.as_deref(),
            )
        }
        Verb::CertifyClosedImage { map, out } => {
            let m = docs::combinatorial_map_from_doc(&read_doc(&map)?, "$")?;
            let cert = certify_closed_image(&m)?;
            let checks = vec![check("certificate verifies", verify_certificate(&m, &cert))];
            finish(
                json!({ "certificate": docs::certificate_to_doc(&cert, m.space()) }),
                checks,
                out.as_deref(),
            )
        }
        Verb::DerhamVerify { region, out } => {
            let r = docs::region_from_doc(&read_doc(&region)?, "$")?;
            let checks: Vec<Value> = verify_region(&r)?
                .into_iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "pass": c.pass,
                        "max_error": c.max_error,
                        "tolerance": c.tolerance,
                    })
                })
                .collect();
            finish(
                json!({ "decay_proxy": derham::BOUNDARY_TOL }),
                checks,
                out.as_deref(),
            )
        }
        Verb::Selftest { seed } => {
            let reports = run_all(seed);
            for r in &reports {
                println!("{}", r.line());
            }
            Ok(if reports.iter().all(|r| r.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                Error::InvalidInput(_) => 2,
                Error::Verification(_) => 1,
                Error::Internal(_) => 70,
            })
        }
    }
}
