//! The `selstab` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rayon::prelude::*;
use selstab_core::counting::{
    census_n1, count_lower_bound_m, disc_exponent, fit_exponents, integer_root, malle_reference, partial_sum,
    CountReport, PrimePool, S0Data,
};
use selstab_core::curve::CurveQ;
use selstab_core::fields::{scholz_check, AbelianFieldDesc, SplitTester};
use selstab_core::groups::{central_filtration, extension_class, h2, malle_invariant};
use selstab_core::modarith::sieve_primes;
use selstab_core::selmer::{
    certify_selmer_vanishing, dual_dimension, enumerate_w_t, find_s0, predicted_wt_size, vs_dimension,
    wiles_difference, Coefficient, SelmerSpec,
};
use selstab_core::sieve::{
    density_report, find_primes, in_te_report, surjectivity_heuristic, SearchLimit, SearchSpec, TEParams,
};
use selstab_core::Rational;
use serde::Serialize;
use serde_json::json;

use crate::cache::ApCache;
use crate::error::{input, CliError};
use crate::io::{
    default_kernel_generator, load_group, parse_curve, parse_list, parse_pairs, parse_product, parse_set,
    read_curve_list, write_group_table,
};

#[derive(Debug, Parser)]
#[command(name = "selstab", version, about = "Selmer-stable abelian l-extensions of Q: experiments and checks")]
pub struct Cli {
    /// worker threads for prime-range work (0: all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// directory of a_p cache files
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// force JSON output
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// force CSV output where a table makes sense
    #[arg(long, global = true)]
    pub csv: bool,
    /// permit ell = 2, 3 (oracle testing only)
    #[arg(long, global = true)]
    pub allow_small_ell: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of a_p for primes up to a bound
    Ap(ApArgs),
    /// Clause-by-clause membership in T(E,K) for every prime up to a bound
    Sieve(CurveArgs),
    /// Empirical density of T(E,K) against the closed form
    Density(DensityArgs),
    /// Primes satisfying a conjunction of conditions
    FindPrime(FindPrimeArgs),
    /// Discriminant, splitting and Scholz checks on a field descriptor
    #[command(subcommand)]
    Field(FieldCommand),
    /// Selmer dimension calculus
    #[command(subcommand)]
    Selmer(SelmerCommand),
    /// Partial sums, lower-bound counts and exponent fits
    #[command(subcommand)]
    Count(CountCommand),
    /// Group cohomology and filtrations on multiplication tables
    #[command(subcommand)]
    Group(GroupCommand),
    /// Run the acceptance suite
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct ApArgs {
    /// "a1,a2,a3,a4,a6"
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub bound: u64,
    #[arg(long, default_value_t = 2)]
    pub from: u64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub ell: u64,
    #[arg(long)]
    pub bound: u64,
    /// base field K as a descriptor (default Q)
    #[arg(long)]
    pub desc: Option<String>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// single curve; or use --curves
    #[arg(long, required_unless_present = "curves")]
    pub curve: Option<String>,
    /// CSV "label,a1,a2,a3,a4,a6"
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long)]
    pub ell: u64,
    #[arg(long)]
    pub bound: u64,
    #[arg(long)]
    pub desc: Option<String>,
    /// primes scanned by the surjectivity heuristic
    #[arg(long, default_value_t = 20_000)]
    pub surjectivity_bound: u64,
}

#[derive(Debug, Args)]
pub struct FindPrimeArgs {
    #[arg(long)]
    pub ell: u64,
    #[arg(long)]
    pub bound: u64,
    /// p ≡ 1 mod ell^N
    #[arg(long = "N", default_value_t = 0)]
    pub level: u32,
    /// require p in T(E,K); needs --curve
    #[arg(long)]
    pub in_te: bool,
    #[arg(long)]
    pub curve: Option<String>,
    /// base K for --in-te
    #[arg(long)]
    pub desc: Option<String>,
    #[arg(long, default_value = "")]
    pub avoid: String,
    /// field in which p must split completely (repeatable)
    #[arg(long)]
    pub split_in: Vec<String>,
    /// residue index targets "v:c,v:c"
    #[arg(long, default_value = "")]
    pub symbol: String,
    /// product that must not be an ell-th power, "2^1*5^3" (repeatable)
    #[arg(long)]
    pub not_power: Vec<String>,
    #[arg(long)]
    pub pin: Option<u64>,
    #[arg(long)]
    pub max_hits: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum FieldCommand {
    /// |disc| by the conductor-discriminant formula
    Disc {
        #[arg(long)]
        desc: String,
        /// also enumerate the character group
        #[arg(long)]
        check: bool,
    },
    /// whether primes split completely
    Split {
        #[arg(long)]
        desc: String,
        /// primes to test; or --bound for a census
        #[arg(long, default_value = "")]
        r: String,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// the Scholz property at level N
    Scholz {
        #[arg(long)]
        desc: String,
        #[arg(long = "N")]
        level: u32,
    },
    /// degree, invariants, ramification
    Info {
        #[arg(long)]
        desc: String,
    },
}

#[derive(Debug, Args)]
pub struct SelmerSetArgs {
    #[arg(long)]
    pub ell: u64,
    /// free primes
    #[arg(long = "S", default_value = "")]
    pub s: String,
    /// zero-condition primes; Σ of --curve is added
    #[arg(long = "Z", default_value = "")]
    pub z: String,
    #[arg(long)]
    pub curve: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SelmerCommand {
    /// dim V_S via the character model
    VsDim(SelmerSetArgs),
    /// dim V_S^⊥ via the Kummer model
    DualDim(SelmerSetArgs),
    /// dim V_S − dim V_S^⊥ from local data
    Wiles {
        #[command(flatten)]
        set: SelmerSetArgs,
        /// trivial or dual
        #[arg(long, default_value = "trivial")]
        coefficient: String,
    },
    /// greedy S0 killing the dual Selmer space
    FindS0 {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        ell: u64,
        /// extra zero-condition primes beyond Σ
        #[arg(long = "Z", default_value = "")]
        z: String,
        #[arg(long)]
        desc: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// the twist family W_T for a finished S0
    EnumerateWt {
        #[command(flatten)]
        set: SelmerSetArgs,
        #[arg(long = "T")]
        t: String,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u128,
    },
    /// check the sufficient conditions for Sel(E/L) = 0
    Certify {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        desc: String,
        #[arg(long)]
        assert_selmer_zero: bool,
        #[arg(long)]
        assert_surjective: bool,
    },
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[arg(long)]
    pub ell: u64,
    /// explicit pool primes
    #[arg(long)]
    pub pool: Option<String>,
    /// or: T(E,L) primes up to this bound, minus Z and S0
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long, default_value_t = 300)]
    pub pool_bound: u64,
    #[arg(long = "Z", default_value = "")]
    pub z: String,
    #[arg(long)]
    pub desc: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub s0_bound: u64,
}

#[derive(Debug, Subcommand)]
pub enum CountCommand {
    /// S(X) = Σ_{n ≤ X} a_n
    Partial {
        #[command(flatten)]
        pool: PoolArgs,
        /// thresholds, e.g. "350,1e6,341^4"
        #[arg(long = "X")]
        x: String,
    },
    /// lower-bound counts for M(G,E;X)
    M {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long = "X")]
        x: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// the discriminant constant, "p/q"
        #[arg(long)]
        c2: Option<String>,
    },
    /// CSV of X, S, M_lower over a logarithmic grid
    Table {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long, default_value_t = 6)]
        from_exp: u32,
        #[arg(long, default_value_t = 10)]
        to_exp: u32,
        #[arg(long, default_value_t = 4)]
        per_decade: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        c2: Option<String>,
    },
    /// least-squares exponents from a table CSV
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// S or M_lower
        #[arg(long, default_value = "M_lower")]
        column: String,
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// n = 1 twists with exact discriminant ≤ X, each certified
    Census {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long = "X")]
        x: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum GroupCommand {
    /// dim H²(G, Z/ell), trivial action
    H2 {
        /// table file or cyclic:<l>^<k>, elementary:<l>^<r>, heisenberg:<l>
        #[arg(long)]
        table: String,
        #[arg(long)]
        ell: u64,
    },
    /// central series with Z/ell steps
    Filtration {
        #[arg(long)]
        table: String,
        #[arg(long)]
        ell: u64,
    },
    /// class of G̃ → G̃/<z> for a central z of order ell
    ExtensionClass {
        #[arg(long)]
        table: String,
        #[arg(long)]
        ell: u64,
        /// index of z (default: least central element of order ell)
        #[arg(long)]
        kernel: Option<usize>,
    },
    /// a(G) by orbit counting
    MalleInvariant {
        #[arg(long)]
        table: String,
    },
    /// write the standard tables for ell to a directory
    Export {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// shorter bounds for a quick smoke run
    #[arg(long)]
    pub quick: bool,
}

/// Where output goes; kept separate so tests can capture it.
pub struct Output<'a> {
    pub out: &'a mut dyn Write,
    pub json: bool,
    pub csv: bool,
}

impl Output<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut *self.out, value)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if self.json {
            let objs: Vec<BTreeMap<&str, &String>> =
                rows.iter().map(|r| header.iter().copied().zip(r).collect()).collect();
            return self.json(&objs);
        }
        let mut w = csv::Writer::from_writer(&mut *self.out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_ell(ell: u64, allow_small: bool) -> Result<(), CliError> {
    if ell < 5 && !allow_small {
        return Err(CliError::Usage(format!("ell = {ell} is below 5; pass --allow-small-ell for oracle runs")));
    }
    Ok(())
}

fn parse_desc(s: &str) -> Result<AbelianFieldDesc, CliError> {
    Ok(s.parse::<AbelianFieldDesc>()?)
}

fn base_field(desc: &Option<String>, ell: u64) -> Result<AbelianFieldDesc, CliError> {
    match desc {
        Some(d) => {
            let f = parse_desc(d)?;
            if f.ell() != ell {
                return Err(input(format!("descriptor is for ell = {}, not {ell}", f.ell())));
            }
            Ok(f)
        }
        None => Ok(AbelianFieldDesc::trivial(ell)?),
    }
}

fn te_params(curve: &CurveQ, ell: u64, desc: &Option<String>, allow_small: bool) -> Result<TEParams, CliError> {
    check_ell(ell, allow_small)?;
    let base = base_field(desc, ell)?;
    Ok(if allow_small {
        TEParams::new(curve.clone(), ell, base)?
    } else {
        TEParams::theorem(curve.clone(), ell, base)?
    })
}

/// `"123"`, `"1e10"`, `"341^4"`.
pub fn parse_threshold(s: &str) -> Result<BigUint, CliError> {
    let s = s.trim();
    let bad = || input(format!("bad threshold {s:?}"));
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: BigUint = m.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return Ok(m * BigUint::from(10u32).pow(e));
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: BigUint = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return Ok(b.pow(e));
    }
    s.parse().map_err(|_| bad())
}

fn parse_thresholds(s: &str) -> Result<Vec<BigUint>, CliError> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_threshold).collect()
}

fn to_u128(x: &BigUint) -> Result<u128, CliError> {
    u128::try_from(x).map_err(|_| input(format!("threshold {x} exceeds 2^128")))
}

fn parse_c2(c2: &Option<String>) -> Result<(Rational, bool), CliError> {
    match c2 {
        None => Ok((Rational::from(1), true)),
        Some(s) => Ok((s.parse::<Rational>().map_err(|_| input(format!("bad c2 {s:?}")))?, false)),
    }
}

/// Σ of the curve plus explicit primes plus ramified primes of the base.
fn zero_set(extra: &str, params: &TEParams) -> Result<BTreeSet<u64>, CliError> {
    let mut z = parse_set(extra)?;
    z.extend(params.sigma());
    z.extend(params.base().ramified_primes());
    Ok(z)
}

fn selmer_spec(args: &SelmerSetArgs, coefficient: Coefficient) -> Result<(SelmerSpec, Option<Vec<u64>>), CliError> {
    let s = parse_set(&args.s)?;
    let mut z = parse_set(&args.z)?;
    let mut sigma = None;
    if let Some(c) = &args.curve {
        let curve = parse_curve(c)?;
        let sg = curve.sigma(args.ell);
        z.extend(&sg);
        sigma = Some(sg);
    }
    z.insert(args.ell);
    Ok((SelmerSpec::new(args.ell, s, z, coefficient)?, sigma))
}

/// Pool, S0 and the Selmer spec for S0, from either an explicit list or a curve.
struct CountSetup {
    pool: PrimePool,
    s0: S0Data,
    spec_s0: Option<SelmerSpec>,
    sigma: Vec<u64>,
    cache: Option<ApCache>,
}

fn count_setup(args: &PoolArgs, cli: &Cli) -> Result<CountSetup, CliError> {
    match (&args.pool, &args.curve) {
        (Some(p), None) => Ok(CountSetup {
            pool: PrimePool::new(args.ell, parse_list(p)?)?,
            s0: S0Data {
                primes: vec![],
                dim_v: 0,
            },
            spec_s0: None,
            sigma: vec![],
            cache: None,
        }),
        (None, Some(c)) => {
            let curve = parse_curve(c)?;
            let params = te_params(&curve, args.ell, &args.desc, cli.allow_small_ell)?;
            let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
            let z = zero_set(&args.z, &params)?;
            let res = find_s0(&params, &z, args.s0_bound, &cache)?;
            if !res.complete {
                return Err(CliError::Core(selstab_core::Error::Precondition(res.note)));
            }
            let mut avoid = z.clone();
            avoid.extend(&res.s0);
            cache.prefill(&sieve_primes(args.pool_bound))?;
            let pool = PrimePool::from_te(&params, &avoid, args.pool_bound, &cache)?;
            cache.save()?;
            let spec_s0 = SelmerSpec::trivial(args.ell, res.s0.clone(), z)?;
            Ok(CountSetup {
                pool,
                s0: S0Data::from(&res),
                spec_s0: Some(spec_s0),
                sigma: params.sigma(),
                cache: Some(cache),
            })
        }
        _ => Err(CliError::Usage("give exactly one of --pool or --curve".into())),
    }
}

fn grid(from_exp: u32, to_exp: u32, per_decade: u32) -> Result<Vec<u128>, CliError> {
    if from_exp >= to_exp || per_decade == 0 || to_exp > 38 {
        return Err(CliError::Usage("need from_exp < to_exp <= 38 and per_decade >= 1".into()));
    }
    let steps = (to_exp - from_exp) * per_decade;
    Ok((0..=steps)
        .map(|i| {
            let e = from_exp as f64 + i as f64 / per_decade as f64;
            let x = 10f64.powf(e).round();
            // integer exponents exactly
            if i % per_decade == 0 {
                10u128.pow(from_exp + i / per_decade)
            } else {
                x as u128
            }
        })
        .collect())
}

pub fn run(cli: &Cli, out: &mut Output) -> Result<(), CliError> {
    match &cli.command {
        Command::Ap(a) => {
            let curve = parse_curve(&a.curve)?;
            let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
            let primes: Vec<u64> = sieve_primes(a.bound).into_iter().filter(|&p| p >= a.from).collect();
            cache.prefill(&primes)?;
            cache.save()?;
            let rows: Vec<Vec<String>> = primes
                .iter()
                .map(|&p| {
                    let good = curve.has_good_reduction(p);
                    let ap = if good {
                        selstab_core::sieve::TraceSource::trace(&cache, &curve, p)?.to_string()
                    } else {
                        String::new()
                    };
                    Ok(vec![p.to_string(), ap, good.to_string()])
                })
                .collect::<Result<_, CliError>>()?;
            out.table(&["p", "a_p", "good"], &rows)
        }
        Command::Sieve(a) => {
            let curve = parse_curve(&a.curve)?;
            let params = te_params(&curve, a.ell, &a.desc, cli.allow_small_ell)?;
            let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
            let primes = sieve_primes(a.bound);
            let reports = primes
                .par_iter()
                .map(|&p| in_te_report(p, &params, &cache))
                .collect::<Result<Vec<_>, _>>()?;
            cache.save()?;
            let b = |x: Option<bool>| x.map(|v| v.to_string()).unwrap_or_default();
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.p.to_string(),
                        r.a.to_string(),
                        b(r.b),
                        b(r.c),
                        b(r.d),
                        r.ap.map(|x| x.to_string()).unwrap_or_default(),
                        r.member().to_string(),
                    ]
                })
                .collect();
            out.table(&["p", "a", "b", "c", "d", "a_p", "member"], &rows)
        }
        Command::Density(a) => {
            let curves: Vec<(String, CurveQ)> = match (&a.curve, &a.curves) {
                (Some(c), None) => vec![(c.clone(), parse_curve(c)?)],
                (None, Some(path)) => read_curve_list(path)?,
                _ => return Err(CliError::Usage("give exactly one of --curve or --curves".into())),
            };
            let mut reports = Vec::new();
            for (label, curve) in curves {
                let params = te_params(&curve, a.ell, &a.desc, cli.allow_small_ell)?;
                let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
                let primes = sieve_primes(a.bound);
                let members = primes
                    .par_iter()
                    .map(|&p| Ok(in_te_report(p, &params, &cache)?.member()))
                    .collect::<Result<Vec<bool>, selstab_core::Error>>()?;
                let count = members.iter().filter(|&&m| m).count() as u64;
                let surj = surjectivity_heuristic(&curve, a.ell, a.surjectivity_bound.min(a.bound), &cache)?;
                cache.save()?;
                let report = density_report(&params, a.bound, count, primes.len() as u64);
                reports.push(json!({
                    "label": label,
                    "curve": curve.key(),
                    "sigma": params.sigma(),
                    "base": params.base().to_string(),
                    "surjectivity": surj,
                    "density": report,
                }));
            }
            if reports.len() == 1 {
                out.json(&reports[0])
            } else {
                out.json(&reports)
            }
        }
        Command::FindPrime(a) => {
            check_ell(a.ell, cli.allow_small_ell)?;
            let spec = SearchSpec {
                level: a.level,
                in_te: a.in_te,
                avoid: parse_set(&a.avoid)?,
                split_in: a.split_in.iter().map(|d| parse_desc(d)).collect::<Result<_, _>>()?,
                symbol_targets: parse_pairs(&a.symbol)?,
                not_ell_power: a.not_power.iter().map(|s| parse_product(s)).collect::<Result<_, _>>()?,
                pinned: a.pin,
            };
            let limit = SearchLimit {
                max_hits: a.max_hits,
                bound: a.bound,
            };
            let outcome = match &a.curve {
                Some(c) => {
                    let curve = parse_curve(c)?;
                    let params = te_params(&curve, a.ell, &a.desc, cli.allow_small_ell)?;
                    let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
                    let o = find_primes(&spec, a.ell, Some(&params), limit, &cache)?;
                    cache.save()?;
                    o
                }
                None if a.in_te => return Err(CliError::Usage("--in-te needs --curve".into())),
                None => find_primes(&spec, a.ell, None, limit, &selstab_core::curve::PointCounter::default())?,
            };
            out.json(&outcome)
        }
        Command::Field(f) => run_field(f, out),
        Command::Selmer(s) => run_selmer(s, cli, out),
        Command::Count(c) => run_count(c, cli, out),
        Command::Group(g) => run_group(g, out),
        Command::Selftest(a) => {
            let opts = if a.quick {
                crate::acceptance::Options::quick()
            } else {
                crate::acceptance::Options::full()
            };
            let opts = crate::acceptance::Options {
                cache_dir: cli.cache_dir.clone(),
                ..opts
            };
            let results = crate::acceptance::run_all(&opts);
            for r in &results {
                writeln!(out.out, "{}", r.line())?;
            }
            let failed: Vec<&str> = results.iter().filter(|r| r.gating_failure()).map(|r| r.id.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(format!("acceptance criteria failed: {}", failed.join(", "))))
            }
        }
    }
}

fn run_field(cmd: &FieldCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        FieldCommand::Disc { desc, check } => {
            let f = parse_desc(desc)?;
            let disc = f.discriminant_abs();
            let mut v = json!({ "descriptor": f.to_string(), "degree": f.degree(), "discriminant": disc.to_string() });
            if *check {
                v["by_enumeration"] = json!(f.discriminant_by_enumeration()?.to_string());
            }
            if out.json {
                out.json(&v)
            } else {
                writeln!(out.out, "{disc}")?;
                Ok(())
            }
        }
        FieldCommand::Split { desc, r, bound } => {
            let f = parse_desc(desc)?;
            match bound {
                Some(b) => {
                    let tester = SplitTester::new(f.clone());
                    let primes = sieve_primes(*b);
                    let split = primes.par_iter().filter(|&&p| tester.splits(p)).count();
                    out.json(&json!({
                        "descriptor": f.to_string(),
                        "bound": b,
                        "primes": primes.len(),
                        "split": split,
                        "fraction": split as f64 / primes.len().max(1) as f64,
                        "expected": format!("1/{}", f.degree()),
                    }))
                }
                None => {
                    let rows: Vec<Vec<String>> = parse_list(r)?
                        .into_iter()
                        .map(|p| Ok(vec![p.to_string(), f.splits_completely(p)?.to_string()]))
                        .collect::<Result<_, CliError>>()?;
                    out.table(&["r", "splits"], &rows)
                }
            }
        }
        FieldCommand::Scholz { desc, level } => out.json(&scholz_check(&parse_desc(desc)?, *level)?),
        FieldCommand::Info { desc } => {
            let f = parse_desc(desc)?;
            let inertia: BTreeMap<String, u64> = f
                .ramified_primes()
                .into_iter()
                .map(|p| Ok((p.to_string(), f.inertial_degree(p)?)))
                .collect::<Result<_, selstab_core::Error>>()?;
            out.json(&json!({
                "descriptor": f.to_string(),
                "degree": f.degree(),
                "invariants": f.invariants(),
                "conductors": f.conductors(),
                "discriminant": f.discriminant_abs().to_string(),
                "inertial_degrees": inertia,
            }))
        }
    }
}

fn run_selmer(cmd: &SelmerCommand, cli: &Cli, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        SelmerCommand::VsDim(a) => {
            let (spec, sigma) = selmer_spec(a, Coefficient::Trivial)?;
            let (dim, basis) = vs_dimension(&spec)?;
            out.json(&json!({ "sigma": sigma, "S": spec.s(), "Z": spec.z_part(), "dim": dim, "basis": basis }))
        }
        SelmerCommand::DualDim(a) => {
            let (spec, sigma) = selmer_spec(a, Coefficient::Trivial)?;
            let (dim, basis) = dual_dimension(&spec)?;
            out.json(&json!({ "sigma": sigma, "S": spec.s(), "Z": spec.z_part(), "dim": dim, "basis": basis }))
        }
        SelmerCommand::Wiles { set, coefficient } => {
            let coef = match coefficient.as_str() {
                "trivial" => Coefficient::Trivial,
                "dual" => Coefficient::Dual,
                other => return Err(CliError::Usage(format!("unknown coefficient {other:?}"))),
            };
            let (spec, sigma) = selmer_spec(set, coef)?;
            let mut v = json!({
                "sigma": sigma,
                "S": spec.s(),
                "Z": spec.z_part(),
                "coefficient": coefficient,
                "wiles_difference": wiles_difference(&spec),
            });
            if coef == Coefficient::Trivial {
                let vs = vs_dimension(&spec)?.0 as i64;
                let dual = dual_dimension(&spec)?.0 as i64;
                v["vs_dim"] = json!(vs);
                v["dual_dim"] = json!(dual);
                v["identity_holds"] = json!(vs - dual == wiles_difference(&spec));
            }
            out.json(&v)
        }
        SelmerCommand::FindS0 {
            curve,
            ell,
            z,
            desc,
            bound,
        } => {
            let curve = parse_curve(curve)?;
            let params = te_params(&curve, *ell, desc, cli.allow_small_ell)?;
            let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
            let zs = zero_set(z, &params)?;
            let res = find_s0(&params, &zs, *bound, &cache)?;
            cache.save()?;
            out.json(&json!({ "sigma": params.sigma(), "Z": zs, "result": res }))
        }
        SelmerCommand::EnumerateWt { set, t, cap } => {
            let (spec, _) = selmer_spec(set, Coefficient::Trivial)?;
            let t = parse_set(t)?;
            let w = enumerate_w_t(&spec, &t, *cap)?;
            let dim_v = vs_dimension(&spec)?.0;
            let members: Vec<_> = w
                .iter()
                .map(|f| Ok(json!({ "coefficients": f.coefficients, "field": f.field(set.ell)?.to_string() })))
                .collect::<Result<_, selstab_core::Error>>()?;
            out.json(&json!({
                "S0": spec.s(),
                "T": t,
                "dim_v_s0": dim_v,
                "predicted": predicted_wt_size(set.ell, t.len(), dim_v).to_string(),
                "count": w.len(),
                "members": members,
            }))
        }
        SelmerCommand::Certify {
            curve,
            ell,
            desc,
            assert_selmer_zero,
            assert_surjective,
        } => {
            check_ell(*ell, cli.allow_small_ell)?;
            let curve = parse_curve(curve)?;
            let field = parse_desc(desc)?;
            let mut cache = ApCache::with_dir(cli.cache_dir.as_deref(), &curve)?;
            let cert = certify_selmer_vanishing(&curve, *ell, &field, *assert_selmer_zero, &cache)?;
            cache.save()?;
            out.json(&json!({
                "hypotheses": {
                    "selmer_zero_over_q": *assert_selmer_zero,
                    "surjective_mod_ell": *assert_surjective,
                },
                "certificate": cert,
            }))
        }
    }
}

fn m_reports(
    setup: &CountSetup,
    xs: &[BigUint],
    n: u32,
    c2: Rational,
) -> Result<Vec<CountReport>, CliError> {
    xs.iter()
        .map(|x| Ok(count_lower_bound_m(&setup.pool, &setup.s0, x, n, c2)?))
        .collect()
}

fn run_count(cmd: &CountCommand, cli: &Cli, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        CountCommand::Partial { pool, x } => {
            let setup = count_setup(pool, cli)?;
            let rows: Vec<Vec<String>> = parse_thresholds(x)?
                .iter()
                .map(|x| Ok(vec![x.to_string(), partial_sum(&setup.pool, to_u128(x)?)?.to_string()]))
                .collect::<Result<_, CliError>>()?;
            if out.csv {
                out.table(&["X", "S"], &rows)
            } else {
                let vals: Vec<_> = rows.iter().map(|r| json!({ "X": r[0], "S": r[1] })).collect();
                out.json(&json!({ "pool": setup.pool, "S0": setup.s0, "values": vals }))
            }
        }
        CountCommand::M { pool, x, n, c2 } => {
            let setup = count_setup(pool, cli)?;
            let (c2v, defaulted) = parse_c2(c2)?;
            let reports = m_reports(&setup, &parse_thresholds(x)?, *n, c2v)?;
            let mut v = json!({
                "sigma": setup.sigma,
                "S0": setup.s0,
                "pool": setup.pool,
                "c2": c2v.to_string(),
                "reports": reports,
                "reference": malle_reference(pool.ell, *n)?,
            });
            if *n > 1 && defaulted {
                v["warning"] = json!("c2 defaulted to 1; the true constant depends on the curve and group, so counts are conditional");
            }
            out.json(&v)
        }
        CountCommand::Table {
            pool,
            from_exp,
            to_exp,
            per_decade,
            n,
            c2,
        } => {
            let setup = count_setup(pool, cli)?;
            let (c2v, _) = parse_c2(c2)?;
            let e = disc_exponent(pool.ell, *n)?;
            let mut rows = Vec::new();
            for x in grid(*from_exp, *to_exp, *per_decade)? {
                let product_bound = integer_root(x, e);
                let s = partial_sum(&setup.pool, product_bound)?;
                let m = count_lower_bound_m(&setup.pool, &setup.s0, &BigUint::from(x), *n, c2v)?;
                rows.push(vec![x.to_string(), product_bound.to_string(), s.to_string(), m.value.to_string()]);
            }
            out.table(&["X", "product_bound", "S", "M_lower"], &rows)
        }
        CountCommand::Fit { input: path, column, ell, n } => {
            let mut rdr = csv::Reader::from_path(path)?;
            let headers = rdr.headers()?.clone();
            let xi = headers.iter().position(|h| h == "X").ok_or_else(|| input("table has no X column"))?;
            let ci = headers
                .iter()
                .position(|h| h == column)
                .ok_or_else(|| input(format!("table has no {column} column")))?;
            let mut pts = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                let x: f64 = rec[xi].parse().map_err(|_| input("bad X value"))?;
                let s: f64 = rec[ci].parse().map_err(|_| input("bad count value"))?;
                pts.push((x, s));
            }
            let fit = fit_exponents(&pts)?;
            let reference = malle_reference(*ell, *n)?;
            out.json(&json!({
                "column": column,
                "points": pts.len(),
                "fit": fit,
                "target_a": reference.a.to_string(),
                "target_delta_minus_one": (reference.delta - Rational::from(1)).to_string(),
                "note": "diagnostic only: convergence in log X is slow",
            }))
        }
        CountCommand::Census { pool, x } => {
            let setup = count_setup(pool, cli)?;
            let spec = setup
                .spec_s0
                .as_ref()
                .ok_or_else(|| CliError::Usage("census needs --curve".into()))?;
            let curve = parse_curve(pool.curve.as_deref().unwrap_or_default())?;
            let cache = setup.cache.as_ref().expect("curve setup has a cache");
            let mut out_rows = Vec::new();
            for x in parse_thresholds(x)? {
                let x = to_u128(&x)?;
                let census = census_n1(&setup.pool, spec, x, 1 << 24)?;
                let mut certified = 0u64;
                for f in &census.members {
                    let field = f.field(pool.ell)?;
                    if certify_selmer_vanishing(&curve, pool.ell, &field, true, cache)?.is_certified() {
                        certified += 1;
                    }
                }
                out_rows.push(json!({
                    "X": x.to_string(),
                    "characters": census.count().to_string(),
                    "fields": census.field_count(pool.ell).to_string(),
                    "certified": certified,
                    "w_total": census.w_total.to_string(),
                    "partial_sum": partial_sum(&setup.pool, integer_root(x, (pool.ell - 1) as u32))?.to_string(),
                }));
            }
            out.json(&json!({ "S0": setup.s0, "pool": setup.pool, "census": out_rows }))
        }
    }
}

fn run_group(cmd: &GroupCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        GroupCommand::H2 { table, ell } => {
            let g = load_group(table, Some(*ell))?;
            let h = h2(&g, *ell)?;
            out.json(&json!({ "order": h.order, "ell": h.ell, "z2_dim": h.z2_dim, "b2_dim": h.b2_dim, "h2_dim": h.dim() }))
        }
        GroupCommand::Filtration { table, ell } => {
            let g = load_group(table, Some(*ell))?;
            let f = central_filtration(&g, *ell)?;
            let verified = f.verify(&g, *ell);
            out.json(&json!({ "length": f.len(), "subgroups": f.subgroups, "verified": verified }))
        }
        GroupCommand::ExtensionClass { table, ell, kernel } => {
            let gt = load_group(table, Some(*ell))?;
            let z = match kernel {
                Some(z) => *z,
                None => default_kernel_generator(&gt, *ell)?,
            };
            let sub = gt.generated(&[z]);
            let (g, pi) = gt.quotient(&sub)?;
            let class = extension_class(&gt, &g, &pi, *ell)?;
            out.json(&json!({
                "order": gt.order(),
                "kernel_generator": z,
                "quotient_order": g.order(),
                "split": class.is_split(),
                "class": class,
            }))
        }
        GroupCommand::MalleInvariant { table } => {
            let g = load_group(table, None)?;
            let (index, a) = malle_invariant(&g)?;
            out.json(&json!({ "order": g.order(), "min_index": index, "a": a.to_string() }))
        }
        GroupCommand::Export { ell, out: dir } => {
            std::fs::create_dir_all(dir)?;
            let mut names = Vec::new();
            for (name, g) in selstab_core::groups::corpus(*ell)? {
                let file = format!("{}.tbl", name.replace(['(', ')'], "").replace('^', "e").to_lowercase());
                write_group_table(&dir.join(&file), &g)?;
                names.push(json!({ "name": name, "file": file, "order": g.order() }));
            }
            out.json(&names)
        }
    }
}

/// Parse, configure the thread pool and run; errors become JSON on stderr.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit_code();
        }
    };
    if cli.workers > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    }
    let mut output = Output {
        out: stdout,
        json: cli.json,
        csv: cli.csv,
    };
    match run(&cli, &mut output) {
        Ok(()) => 0,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}
