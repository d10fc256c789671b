//! `moore`: command-line front end to the Moore A∞-algebra library.
//!
//! Exit status: 0 success, 1 a self-test or check reported a failure,
//! 2 parse error, 3 domain error, 4 internal invariant breach.

mod cochain;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use moore_core::ainfty::dualize;
use moore_core::hochschild::{hh_bruteforce, hh_closed_form};
use moore_core::moduli::{
    act, act_odd, canonicalize_char0, canonicalize_dvr, degree_audit, equivalent,
    orbit_invariant_char0,
};
use moore_core::noncomm::{check_square_zero, SquareZeroFailure};
use moore_core::selftest::{run_all, verify_random, verify_universal};
use moore_core::{CoeffRing, Error, MooreAlgebra, PowerSeries};
use serde::Deserialize;
use serde_json::{json, Value};

const FALLBACK_TRUNC: usize = 16;

#[derive(Parser, Debug)]
#[command(
    name = "moore",
    version,
    about = "Exact computations with Moore A∞-algebras"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Debug, Default)]
struct Global {
    /// Coefficient ring: Q, F<p> or Zp:<p>:<K>, optionally with [v].
    #[arg(long, global = true)]
    ring: Option<String>,
    /// Characteristic series u(t) of an even structure.
    #[arg(long, global = true)]
    series: Option<String>,
    /// t-adic truncation (default: $MOORE_DEFAULT_TRUNC, else 16).
    #[arg(long, global = true)]
    trunc: Option<usize>,
    /// Suspension parity d (default 0 for even structures, 1 for odd).
    #[arg(long, global = true, allow_hyphen_values = true)]
    d: Option<i64>,
    /// Series v(t) of an odd structure.
    #[arg(long, global = true)]
    v: Option<String>,
    /// Series w(t) of an odd structure.
    #[arg(long, global = true)]
    w: Option<String>,
    /// Emit JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized verbs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with defaults for the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Check m*∘m* = 0 for the given structure.
    Check,
    /// Apply a normalized automorphism (G, F); even structures take F only.
    Act {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: Option<String>,
    },
    /// Height of u (or of v for odd structures).
    Height,
    /// Canonical form and witness over a graded field or ℤ/p^K.
    Canonicalize,
    /// Orbit invariant (n, class of u_n) over a graded field.
    Invariant,
    /// Decide whether two even structures are isomorphic.
    Equivalent {
        #[arg(long)]
        other: String,
    },
    /// Hochschild cohomology of an even structure.
    Hochschild {
        /// Also compute the brute-force complex.
        #[arg(long)]
        bruteforce: bool,
        #[arg(long, default_value_t = 6)]
        maxdeg: usize,
    },
    /// Square-zero check with symbolic coefficients.
    VerifyUniversal {
        #[arg(long, value_enum, default_value_t = Parity::Even)]
        parity: Parity,
        #[arg(long, default_value_t = 8)]
        arity: usize,
    },
    /// Run the normalization retraction on a cochain.
    NormalizeCochain {
        /// Entries `[a|b] -> c : coeff`, separated by ';'.
        #[arg(long)]
        cochain: String,
        /// Number of h-steps (default: the cochain truncation).
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Degree audit in Laurent mode.
    Audit,
    /// Run every randomized acceptance suite.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Parity {
    Even,
    Odd,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct Config {
    ring: Option<String>,
    series: Option<String>,
    trunc: Option<usize>,
    d: Option<i64>,
    v: Option<String>,
    w: Option<String>,
    json: Option<bool>,
    seed: Option<u64>,
}

/// Failure of a command, mapped to an exit status.
enum Failure {
    Usage(String),
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<Report, Failure>;

/// Text and JSON renderings of a successful result.
struct Report {
    text: String,
    json: Value,
}

struct Opts {
    ring: Option<String>,
    series: Option<String>,
    trunc: usize,
    d: Option<i64>,
    v: Option<String>,
    w: Option<String>,
    json: bool,
    seed: u64,
}

impl Opts {
    fn resolve(g: Global) -> Result<Opts, Failure> {
        let cfg = match &g.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<Config>(&text)
                    .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
            }
            None => Config::default(),
        };
        let env_trunc =
            match std::env::var("MOORE_DEFAULT_TRUNC") {
                Ok(s) => Some(s.trim().parse().map_err(|_| {
                    Failure::Usage(format!("MOORE_DEFAULT_TRUNC: not a number: {s}"))
                })?),
                Err(_) => None,
            };
        Ok(Opts {
            ring: g.ring.or(cfg.ring),
            series: g.series.or(cfg.series),
            trunc: g
                .trunc
                .or(cfg.trunc)
                .or(env_trunc)
                .unwrap_or(FALLBACK_TRUNC),
            d: g.d.or(cfg.d),
            v: g.v.or(cfg.v),
            w: g.w.or(cfg.w),
            json: g.json || cfg.json.unwrap_or(false),
            seed: g.seed.or(cfg.seed).unwrap_or(0),
        })
    }

    fn ring(&self) -> Result<CoeffRing, Failure> {
        let s = self
            .ring
            .as_deref()
            .ok_or_else(|| Failure::Usage("--ring is required".into()))?;
        Ok(s.parse()?)
    }

    fn parse_series(&self, r: &CoeffRing, s: &str) -> Result<PowerSeries, Failure> {
        Ok(PowerSeries::parse(r, s, self.trunc)?)
    }

    fn series(&self, r: &CoeffRing) -> Result<PowerSeries, Failure> {
        let s = self
            .series
            .as_deref()
            .ok_or_else(|| Failure::Usage("--series is required".into()))?;
        self.parse_series(r, s)
    }

    /// Even structure from `--series`, or odd from `--v`/`--w`.
    fn algebra(&self) -> Result<MooreAlgebra, Failure> {
        let r = self.ring()?;
        match (&self.series, &self.v, &self.w) {
            (Some(_), None, None) => Ok(MooreAlgebra::even(self.series(&r)?, self.d.unwrap_or(0))?),
            (None, Some(v), Some(w)) => Ok(MooreAlgebra::odd(
                self.parse_series(&r, v)?,
                self.parse_series(&r, w)?,
                self.d.unwrap_or(1),
            )?),
            _ => Err(Failure::Usage(
                "give either --series, or both --v and --w".into(),
            )),
        }
    }
}

fn square_zero_report(failure: Option<SquareZeroFailure>, what: &str) -> Outcome {
    match failure {
        None => Ok(Report {
            text: format!("m∘m = 0: PASS ({what})"),
            json: json!({ "square_zero": true }),
        }),
        Some(f) => Err(Failure::Check(format!(
            "m∘m = 0: FAIL ({what}): coefficient {} of {} in (m*∘m*)({:?})",
            f.coeff, f.word, f.generator
        ))),
    }
}

fn structure_json(m: &MooreAlgebra) -> Value {
    match m {
        MooreAlgebra::Even { u, d } => json!({ "parity": "even", "d": d, "u": u.to_text() }),
        MooreAlgebra::Odd { v, w, d } => {
            json!({ "parity": "odd", "d": d, "v": v.to_text(), "w": w.to_text() })
        }
    }
}

fn structure_text(m: &MooreAlgebra) -> String {
    match m {
        MooreAlgebra::Even { u, .. } => format!("u = {u}"),
        MooreAlgebra::Odd { v, w, .. } => format!("v = {v}\nw = {w}"),
    }
}

fn run(verb: Verb, o: &Opts) -> Outcome {
    match verb {
        Verb::Check => {
            let m = o.algebra()?;
            let xi = m.mstar(o.trunc)?;
            square_zero_report(check_square_zero(&xi)?, &format!("word length {}", o.trunc))
        }
        Verb::Act { f, g } => {
            let m = o.algebra()?;
            let f = o.parse_series(m.ring(), &f)?;
            let moved = match (&m, g) {
                (MooreAlgebra::Even { .. }, None) => act(&m, &f)?,
                (MooreAlgebra::Even { .. }, Some(_)) => {
                    return Err(Failure::Usage("--g applies to odd structures only".into()))
                }
                (MooreAlgebra::Odd { .. }, g) => {
                    let g = match g {
                        Some(g) => o.parse_series(m.ring(), &g)?,
                        None => PowerSeries::zero(m.ring(), o.trunc),
                    };
                    act_odd(&m, &g, &f)?
                }
            };
            Ok(Report {
                text: structure_text(&moved),
                json: structure_json(&moved),
            })
        }
        Verb::Height => {
            let m = o.algebra()?;
            let h = m.height()?;
            Ok(Report {
                text: h.to_string(),
                json: json!({ "height": h }),
            })
        }
        Verb::Canonicalize => {
            let r = o.ring()?;
            let u = o.series(&r)?;
            let c = if r.dvr_params().is_ok() {
                canonicalize_dvr(&u)?
            } else {
                canonicalize_char0(&u)?
            };
            let mut text = format!("form    = {}\nwitness = {}", c.form, c.witness);
            if let Some(e) = c.pi_precision {
                text.push_str(&format!("\nexact modulo π^{e}"));
            }
            Ok(Report {
                text,
                json: c.to_json(),
            })
        }
        Verb::Invariant => {
            let m = o.algebra()?;
            let inv = orbit_invariant_char0(&m)?;
            let r = m.ring();
            Ok(Report {
                text: format!("height {}, class {}", inv.n, r.format(&inv.class)),
                json: json!({ "n": inv.n, "class": r.format(&inv.class), "leading": r.format(inv.leading()) }),
            })
        }
        Verb::Equivalent { other } => {
            let a = o.algebra()?;
            let b = MooreAlgebra::even(o.parse_series(a.ring(), &other)?, a.d())?;
            let eq = equivalent(&a, &b)?;
            Ok(Report {
                text: if eq { "equivalent" } else { "not equivalent" }.into(),
                json: json!({ "equivalent": eq }),
            })
        }
        Verb::Hochschild { bruteforce, maxdeg } => {
            let m = o.algebra()?;
            let mut out = Vec::new();
            let mut js = json!({});
            if bruteforce {
                let b = hh_bruteforce(&m, maxdeg)?;
                out.push(format!(
                    "brute force to t-degree {maxdeg}: A {:?}, B {:?}",
                    b.a_dims, b.b_dims
                ));
                js["bruteforce"] =
                    serde_json::to_value(&b).map_err(|e| Error::Invariant(e.to_string()))?;
                if !b.square_zero {
                    return Err(Failure::Lib(Error::Invariant(
                        "brute-force differential is not square-zero".into(),
                    )));
                }
            }
            match hh_closed_form(&m) {
                Ok(rep) => {
                    out.insert(
                        0,
                        format!(
                            "HH = {} ({}), rank {}",
                            rep.quotient,
                            serde_json::to_value(rep.torsion)
                                .ok()
                                .and_then(|v| v.as_str().map(String::from))
                                .unwrap_or_default(),
                            rep.rank
                        ),
                    );
                    if rep.index_discrepancy {
                        out.push(format!(
                            "note: computed index {} differs from the height {} of u mod π",
                            rep.rank,
                            rep.mod_p_height.map_or("?".into(), |h| h.to_string())
                        ));
                    }
                    let v =
                        serde_json::to_value(&rep).map_err(|e| Error::Invariant(e.to_string()))?;
                    if bruteforce {
                        js["report"] = v;
                    } else {
                        js = v;
                    }
                }
                Err(e) if bruteforce && !e.is_internal() => {
                    out.push(format!("closed form unavailable: {} ({e})", e.name()));
                }
                Err(e) => return Err(e.into()),
            }
            Ok(Report {
                text: out.join("\n"),
                json: js,
            })
        }
        Verb::VerifyUniversal { parity, arity } => {
            let odd = parity == Parity::Odd;
            let symbolic = verify_universal(odd, arity, o.trunc)?;
            let random = verify_random(odd, arity, o.trunc, o.seed)?;
            let what = format!("{parity:?} arity {arity}, word length {}", o.trunc).to_lowercase();
            if let Some(f) = random {
                return Err(Failure::Check(format!(
                    "m∘m = 0: FAIL (random check over F_2147483647): coefficient {} of {}",
                    f.coeff, f.word
                )));
            }
            square_zero_report(symbolic, &what)
        }
        Verb::NormalizeCochain { cochain, levels } => {
            let m = o.algebra()?;
            let s = dualize(&m.mstar(o.trunc)?)?;
            let c = cochain::parse(s.basis(), s.ring(), s.exact_to(), &cochain)?;
            let n = s.normalize(&c, levels.unwrap_or(s.exact_to()))?;
            let normalized = n.normalized.is_normalized(n.normalized.exact_to());
            let text = format!(
                "normalized = {}\nwitness    = {}\ncorrection = {}",
                cochain::format(&n.normalized),
                cochain::format(&n.witness),
                cochain::format(&n.correction)
            );
            Ok(Report {
                text,
                json: json!({
                    "normalized": cochain::format(&n.normalized),
                    "witness": cochain::format(&n.witness),
                    "correction": cochain::format(&n.correction),
                    "is_normalized": normalized,
                }),
            })
        }
        Verb::Audit => {
            let m = o.algebra()?;
            let report = degree_audit(&m);
            let text = if report.is_empty() {
                "no degree violations".into()
            } else {
                report
                    .iter()
                    .map(|v| {
                        format!(
                            "{} = {}: expected degree {}, found {:?}",
                            v.coefficient, v.value, v.expected, v.found
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            let js = serde_json::to_value(&report).map_err(|e| Error::Invariant(e.to_string()))?;
            Ok(Report {
                text,
                json: json!({ "violations": js }),
            })
        }
        Verb::Selftest => {
            let outcomes = run_all(o.seed);
            let text = outcomes
                .iter()
                .map(|s| {
                    format!(
                        "{:>2} {} {}: {}",
                        s.id,
                        if s.passed { "PASS" } else { "FAIL" },
                        s.name,
                        s.detail
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let js =
                serde_json::to_value(&outcomes).map_err(|e| Error::Invariant(e.to_string()))?;
            if outcomes.iter().all(|s| s.passed) {
                Ok(Report {
                    text,
                    json: json!({ "seed": o.seed, "suites": js }),
                })
            } else {
                Err(Failure::Check(text))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Opts::resolve(cli.global).and_then(|o| {
        let json = o.json;
        run(cli.verb, &o).map(|r| (r, json))
    });
    match result {
        Ok((r, json)) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&r.json).expect("JSON values serialize")
                );
            } else {
                println!("{}", r.text);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(if e.is_parse() {
                2
            } else if e.is_internal() {
                4
            } else {
                3
            })
        }
    }
}
